use std::collections::BTreeSet;

use grounding_core::gridworld::WorldSpec;
use grounding_core::modulus::{check_minimality, is_valid_modulus, minimal_oscillation, ModulusCurve};
use grounding_core::semantics::{homomorphic_extension, FiniteMetricSpace, Literal, Meaning, RoleSet, Term};
use proptest::prelude::*;

fn literal() -> impl Strategy<Value = Literal> {
    (0usize..6, any::<bool>()).prop_map(|(r, positive)| Literal {
        role: ["A", "B", "C", "D", "E", "F"][r].into(),
        positive,
    })
}

fn literals() -> impl Strategy<Value = Vec<Literal>> {
    prop::collection::vec(literal(), 0..8)
}

fn jaccard(a: &BTreeSet<Literal>, b: &BTreeSet<Literal>) -> f64 {
    let union = a.union(b).count();
    if union == 0 {
        0.0
    } else {
        a.symmetric_difference(b).count() as f64 / union as f64
    }
}

fn brute_omega(xs: &[f64], image: &[Meaning], eps: f64) -> f64 {
    let mut best: f64 = 0.0;
    for i in 0..xs.len() {
        for j in 0..xs.len() {
            if (xs[i] - xs[j]).abs() <= eps {
                best = best.max(image[i].distance(&image[j]).unwrap());
            }
        }
    }
    best
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn role_sets_agree_with_btreeset(a in literals(), b in literals(), probe in literal()) {
        let (sa, sb) = (RoleSet::from_literals(a.clone()), RoleSet::from_literals(b.clone()));
        let (ta, tb): (BTreeSet<Literal>, BTreeSet<Literal>) = (a.into_iter().collect(), b.into_iter().collect());
        prop_assert_eq!(sa.iter().cloned().collect::<Vec<_>>(), ta.iter().cloned().collect::<Vec<_>>());
        prop_assert_eq!(
            sa.union(&sb).iter().cloned().collect::<Vec<_>>(),
            ta.union(&tb).cloned().collect::<Vec<_>>()
        );
        prop_assert_eq!(sa.distance(&sb), jaccard(&ta, &tb));
        prop_assert_eq!(sa.contains(&probe), ta.contains(&probe));
        let clash = ta.iter().any(|l| ta.contains(&l.negated()));
        prop_assert_eq!(sa.is_consistent(), !clash);
        if let Some(l) = sa.first_clash() {
            prop_assert!(l.positive && sa.contains(&l.negated()));
        }
        let mut grown = sa.clone();
        let fresh = grown.insert(probe.clone());
        prop_assert_eq!(fresh, !ta.contains(&probe));
        let mut tc = ta.clone();
        tc.insert(probe);
        prop_assert_eq!(grown.iter().cloned().collect::<Vec<_>>(), tc.into_iter().collect::<Vec<_>>());
    }

    #[test]
    fn role_distance_is_a_metric(a in literals(), b in literals(), c in literals()) {
        let (a, b, c) = (RoleSet::from_literals(a), RoleSet::from_literals(b), RoleSet::from_literals(c));
        prop_assert_eq!(a.distance(&a), 0.0);
        prop_assert_eq!(a.distance(&b), b.distance(&a));
        prop_assert!(a.distance(&c) <= a.distance(&b) + b.distance(&c) + 1e-12);
    }

    #[test]
    fn role_sets_survive_serialization(a in literals()) {
        #[derive(serde::Serialize, serde::Deserialize)]
        struct Doc { roles: RoleSet }
        let set = RoleSet::from_literals(a);
        let text = toml::to_string(&Doc { roles: set.clone() }).unwrap();
        prop_assert_eq!(toml::from_str::<Doc>(&text).unwrap().roles, set);
    }

    #[test]
    fn minimal_oscillation_is_the_least_modulus(
        xs in prop::collection::vec(0.0f64..5.0, 2..9),
        ys in prop::collection::vec(-3.0f64..3.0, 9),
        grid_top in 0.5f64..6.0,
    ) {
        let space = FiniteMetricSpace::on_line(&xs);
        let image: Vec<Meaning> = xs.iter().zip(&ys).map(|(x, y)| Meaning::vector(&[x * y, y.sin()])).collect();
        let grid: Vec<f64> = (0..=10).map(|k| grid_top * k as f64 / 10.0).collect();
        let omega = minimal_oscillation(&space, &image, &grid).unwrap();
        prop_assert!(omega.is_monotone());
        for &s in &grid {
            prop_assert!((omega.value_at(s) - brute_omega(&xs, &image, s)).abs() < 1e-12);
        }
        if xs.iter().map(|x| x.to_bits()).collect::<BTreeSet<_>>().len() == xs.len() {
            // Lipschitz envelope through the steepest pair.
            let mut lip: f64 = 0.0;
            for i in 0..xs.len() {
                for j in 0..i {
                    lip = lip.max(image[i].distance(&image[j]).unwrap() / (xs[i] - xs[j]).abs());
                }
            }
            let lipschitz = ModulusCurve::from_fn(omega.grid.clone(), |s| lip * s).unwrap();
            prop_assert!(is_valid_modulus(&lipschitz, &space, &image).unwrap().is_ok());
            prop_assert!(check_minimality(&space, &image, &lipschitz).unwrap().is_ok());
        }
    }

    #[test]
    fn gridworld_gold_is_vector_addition(
        red in (0.0f64..10.0, 0.0f64..10.0),
        blue in (0.0f64..10.0, 0.0f64..10.0),
    ) {
        let mut world = WorldSpec::default();
        world.landmarks.insert("RED".into(), [red.0, red.1]);
        world.landmarks.insert("BLUE".into(), [blue.0, blue.1]);
        let interp = world.interpretation().unwrap();
        for c in world.composites().unwrap() {
            let Term::Node(_, args) = &c else { unreachable!() };
            let a = homomorphic_extension(&interp, &args[0]).unwrap();
            let b = homomorphic_extension(&interp, &args[1]).unwrap();
            let (a, b) = (a.as_vector().unwrap(), b.as_vector().unwrap());
            let whole = homomorphic_extension(&interp, &c).unwrap();
            prop_assert_eq!(whole.as_vector().unwrap(), &[a[0] + b[0], a[1] + b[1]][..]);
            prop_assert_eq!(world.gold_meaning(&c).unwrap(), [a[0] + b[0], a[1] + b[1]]);
        }
    }
}
