use std::collections::BTreeMap;
use std::sync::Arc;

use proptest::prelude::*;

use super::*;

fn gridworld_interp() -> IntendedInterpretation {
    let mut g = TypedGrammar::new();
    for (name, sort) in [("RED", "COLOR"), ("NORTH", "DIRECTION")] {
        g.add_atom(Atom::new(name, Sort::new(sort)).unwrap()).unwrap();
    }
    g.add_constructor(
        Constructor::new(
            "compose",
            vec![Sort::new("COLOR"), Sort::new("DIRECTION")],
            Sort::new("LOCATION"),
        )
        .unwrap(),
    )
    .unwrap();
    let ops = BTreeMap::from([("compose".to_string(), MeaningOp::VectorAdd)]);
    let algebra = SemanticAlgebra::new(Arc::new(g), Carrier::Vector { dim: 2 }, ops).unwrap();
    let gold = BTreeMap::from([
        ("RED".to_string(), Meaning::vector(&[8.0, 8.0])),
        ("NORTH".to_string(), Meaning::vector(&[0.0, 1.0])),
    ]);
    IntendedInterpretation::new(Arc::new(algebra), gold).unwrap()
}

/// Three atoms of one sort on the line; `plus` adds, `twice` doubles.
fn toy_interp() -> IntendedInterpretation {
    let s = || Sort::new("S");
    let mut g = TypedGrammar::new();
    for name in ["a", "b", "c"] {
        g.add_atom(Atom::new(name, s()).unwrap()).unwrap();
    }
    g.add_constructor(Constructor::new("plus", vec![s(), s()], s()).unwrap()).unwrap();
    g.add_constructor(Constructor::new("twice", vec![s()], s()).unwrap()).unwrap();
    let ops = BTreeMap::from([
        ("plus".to_string(), MeaningOp::VectorAdd),
        (
            "twice".to_string(),
            MeaningOp::custom(|args| {
                let v = args[0].as_vector().unwrap();
                Ok(Meaning::Vector(v.iter().map(|x| 2.0 * x).collect()))
            }),
        ),
    ]);
    let algebra = SemanticAlgebra::new(Arc::new(g), Carrier::Vector { dim: 1 }, ops).unwrap();
    let gold = BTreeMap::from([
        ("a".to_string(), Meaning::vector(&[1.0])),
        ("b".to_string(), Meaning::vector(&[-3.0])),
        ("c".to_string(), Meaning::vector(&[0.5])),
    ]);
    IntendedInterpretation::new(Arc::new(algebra), gold).unwrap()
}

/// Independent evaluator for the toy algebra: matches on constructor names
/// directly instead of going through `SemanticAlgebra::apply`.
fn brute_force_toy(term: &Term) -> f64 {
    match term {
        Term::Leaf(atom) => match atom.name.as_str() {
            "a" => 1.0,
            "b" => -3.0,
            "c" => 0.5,
            other => panic!("unexpected atom {other}"),
        },
        Term::Node(ctor, children) => match ctor.name.as_str() {
            "plus" => brute_force_toy(&children[0]) + brute_force_toy(&children[1]),
            "twice" => 2.0 * brute_force_toy(&children[0]),
            other => panic!("unexpected constructor {other}"),
        },
    }
}

#[test]
fn extension_of_red_north_is_vector_sum() {
    let interp = gridworld_interp();
    let g = interp.algebra().grammar();
    let t = g.parse_term("(compose RED NORTH)").unwrap();
    assert_eq!(homomorphic_extension(&interp, &t).unwrap(), Meaning::vector(&[8.0, 9.0]));
    assert_eq!(
        homomorphic_extension(&interp, &g.leaf("RED").unwrap()).unwrap(),
        Meaning::vector(&[8.0, 8.0])
    );
}

#[test]
fn extension_matches_brute_force_on_depth_three_term() {
    let interp = toy_interp();
    let g = interp.algebra().grammar();
    let t = g.parse_term("(plus (twice (plus a b)) (plus c (twice a)))").unwrap();
    assert_eq!(t.depth(), 4);
    let t3 = g.parse_term("(plus (twice a) (plus b c))").unwrap();
    assert_eq!(t3.depth(), 3);
    for term in [t, t3] {
        let got = homomorphic_extension(&interp, &term).unwrap();
        assert_eq!(got, Meaning::vector(&[brute_force_toy(&term)]));
    }
}

#[test]
fn extension_reports_sort_mismatch_for_forged_term() {
    let interp = gridworld_interp();
    let g = interp.algebra().grammar();
    let red = g.leaf("RED").unwrap();
    let ctor = g.constructor("compose").unwrap().clone();
    let forged = Term::Node(ctor, vec![red.clone(), red]);
    assert!(matches!(
        homomorphic_extension(&interp, &forged),
        Err(SemanticsError::SortMismatch { .. })
    ));
}

#[test]
fn extension_is_a_homomorphism() {
    let interp = toy_interp();
    let terms = interp.algebra().grammar().terms_up_to_depth(3);
    let dev = check_homomorphism(
        |t| homomorphic_extension(&interp, t),
        interp.algebra(),
        &terms,
    )
    .unwrap();
    assert_eq!(dev, 0.0);
}

#[test]
fn printed_agent_composition_deviation() {
    let interp = gridworld_interp();
    let g = interp.algebra().grammar();
    let red_north = g.parse_term("(compose RED NORTH)").unwrap();
    let table: BTreeMap<Term, Meaning> = BTreeMap::from([
        (g.leaf("RED").unwrap(), Meaning::vector(&[7.941, 8.224])),
        (g.leaf("NORTH").unwrap(), Meaning::vector(&[-0.097, 1.114])),
        (red_north.clone(), Meaning::vector(&[7.726, 9.522])),
    ]);
    let dev = check_homomorphism(
        |t| Ok::<_, SemanticsError>(table[t].clone()),
        interp.algebra(),
        &[red_north],
    )
    .unwrap();
    // Printed coordinates are rounded to 3 decimals; they give 0.21859.
    assert!((dev - 0.2191).abs() < 1e-3, "{dev}");
}

#[test]
fn undefined_atoms_propagate_through_check() {
    let interp = toy_interp();
    let terms = interp.algebra().grammar().terms_up_to_depth(2);
    let err = check_homomorphism(
        |t| {
            if t.surface_tokens().contains(&"c".to_string()) {
                Err(SemanticsError::UndefinedAtom("c".into()))
            } else {
                homomorphic_extension(&interp, t)
            }
        },
        interp.algebra(),
        &terms,
    );
    assert!(matches!(err, Err(SemanticsError::UndefinedAtom(_))));
}

#[test]
fn terms_enumeration_counts() {
    let interp = toy_interp();
    let g = interp.algebra().grammar();
    // depth <= 1: 3 atoms; <= 2: 3 + 3*3 + 3 = 15; <= 3: 3 + 15*15 + 15 = 243.
    assert_eq!(g.terms_up_to_depth(1).len(), 3);
    assert_eq!(g.terms_up_to_depth(2).len(), 15);
    assert_eq!(g.terms_up_to_depth(3).len(), 243);
    assert!(g.terms_up_to_depth(3).iter().all(|t| g.check(t).is_ok()));
}

/// Sum of atom values along the surface: a homomorphism for the `plus`-only
/// fragment computed without recursion over constructors.
fn surface_sum(term: &Term) -> Meaning {
    let total: f64 = term
        .surface()
        .iter()
        .map(|a| match a.name.as_str() {
            "a" => 1.0,
            "b" => -3.0,
            _ => 0.5,
        })
        .sum();
    Meaning::vector(&[total])
}

#[test]
fn coincidence_with_extension_up_to_depth_four() {
    let s = || Sort::new("S");
    let mut g = TypedGrammar::new();
    for name in ["a", "b"] {
        g.add_atom(Atom::new(name, s()).unwrap()).unwrap();
    }
    g.add_constructor(Constructor::new("plus", vec![s(), s()], s()).unwrap()).unwrap();
    let ops = BTreeMap::from([("plus".to_string(), MeaningOp::VectorAdd)]);
    let algebra = Arc::new(SemanticAlgebra::new(Arc::new(g), Carrier::Vector { dim: 1 }, ops).unwrap());
    let gold = BTreeMap::from([
        ("a".to_string(), Meaning::vector(&[1.0])),
        ("b".to_string(), Meaning::vector(&[-3.0])),
    ]);
    let interp = IntendedInterpretation::new(algebra.clone(), gold).unwrap();
    let terms = algebra.grammar().terms_up_to_depth(4);
    assert_eq!(terms.len(), 2 + 38 * 38);
    let dev = check_homomorphism(|t| Ok::<_, SemanticsError>(surface_sum(t)), &algebra, &terms).unwrap();
    assert_eq!(dev, 0.0);
    for t in &terms {
        assert_eq!(surface_sum(t), homomorphic_extension(&interp, t).unwrap());
    }
}

proptest! {
    #[test]
    fn random_tabulated_map_deviation_matches_per_node_recomputation(
        values in prop::collection::vec(-5.0f64..5.0, 243)
    ) {
        let interp = toy_interp();
        let g = interp.algebra().grammar();
        let all = g.terms_up_to_depth(3);
        let table: BTreeMap<&Term, f64> = all.iter().zip(values.iter().copied()).collect();
        let items: Vec<Term> = all.iter().filter(|t| !t.is_leaf()).take(10).cloned().collect();
        let lookup = |t: &Term| table[t];

        let mut expected: f64 = 0.0;
        for item in &items {
            for sub in item.subterms() {
                if let Term::Node(ctor, ch) = sub {
                    let combined = match ctor.name.as_str() {
                        "plus" => lookup(&ch[0]) + lookup(&ch[1]),
                        _ => 2.0 * lookup(&ch[0]),
                    };
                    expected = expected.max((lookup(sub) - combined).abs());
                }
            }
        }
        let got = check_homomorphism(
            |t| Ok::<_, SemanticsError>(Meaning::vector(&[lookup(t)])),
            interp.algebra(),
            &items,
        ).unwrap();
        prop_assert!((got - expected).abs() < 1e-12);
    }
}
