
use super::*;
use crate::semantics::{
    Atom, Constructor, FiniteMetricSpace, Meaning, MeaningType, Sort, TypedGrammar,
};

fn ctx() -> EvalContext {
    EvalContext::new("test", MeaningType::Ext)
}

fn grid_grammar() -> TypedGrammar {
    let mut g = TypedGrammar::new();
    for (n, s) in [("RED", "COLOR"), ("BLUE", "COLOR"), ("NORTH", "DIRECTION"), ("EAST", "DIRECTION")] {
        g.add_atom(Atom::new(n, Sort::new(s)).unwrap()).unwrap();
    }
    g.add_constructor(
        Constructor::new("compose", vec![Sort::new("COLOR"), Sort::new("DIRECTION")], Sort::new("LOCATION"))
            .unwrap(),
    )
    .unwrap();
    g
}

fn printed_table() -> TabulatedArchitecture {
    TabulatedArchitecture::from_entries(
        "printed",
        [
            ("RED", Meaning::vector(&[7.941, 8.224])),
            ("NORTH", Meaning::vector(&[-0.097, 1.114])),
            ("RED NORTH", Meaning::vector(&[7.726, 9.522])),
        ],
        ProvenanceRecord::stipulated(),
    )
    .unwrap()
    .with_first_token_mechanism("modifier-integration")
}

#[test]
fn interpret_is_the_stage_composition() {
    let arch = printed_table();
    let g = grid_grammar();
    let t = g.parse_term("(compose RED NORTH)").unwrap();
    let on = Switches::all_on();
    let staged = arch
        .align(arch.conceptualize(&arch.encode(&t, &on).unwrap(), &on).unwrap(), &ctx(), &on)
        .unwrap();
    assert_eq!(interpret(&arch, &t, &ctx()).unwrap(), staged);
}

#[test]
fn first_token_ablation_and_unknown_ids() {
    let arch = printed_table();
    let g = grid_grammar();
    let t = g.parse_term("(compose RED NORTH)").unwrap();
    let red = g.leaf("RED").unwrap();
    let ablated = interpret_under(&arch, &t, &ctx(), &["modifier-integration"]).unwrap();
    assert_eq!(ablated, interpret(&arch, &red, &ctx()).unwrap());
    let none: [&str; 0] = [];
    assert_eq!(
        interpret_under(&arch, &t, &ctx(), &none).unwrap(),
        interpret(&arch, &t, &ctx()).unwrap()
    );
    assert_eq!(
        interpret_under(&arch, &t, &ctx(), &["nope"]),
        Err(ArchError::UnknownMechanism("nope".into()))
    );
    let blue = g.leaf("BLUE").unwrap();
    assert!(matches!(interpret(&arch, &blue, &ctx()), Err(ArchError::UnknownToken(_))));
}

#[test]
fn ablation_round_trip_is_bit_identical() {
    let arch = printed_table();
    let g = grid_grammar();
    let t = g.parse_term("(compose RED NORTH)").unwrap();
    let before = interpret(&arch, &t, &ctx()).unwrap();
    let _ = interpret_under(&arch, &t, &ctx(), &["modifier-integration"]).unwrap();
    let after = interpret(&arch, &t, &ctx()).unwrap();
    assert_eq!(
        before.as_vector().unwrap().iter().map(|x| x.to_bits()).collect::<Vec<_>>(),
        after.as_vector().unwrap().iter().map(|x| x.to_bits()).collect::<Vec<_>>()
    );
}

#[test]
fn identity_perturbation_leaves_output_unchanged() {
    let arch = printed_table();
    let u = Perturbation::identity("none");
    let (a, b) = perturb_and_interpret(&arch, &Representation::Point(2), &u, &ctx()).unwrap();
    assert_eq!(a, b);
    assert!(Perturbation::new("bad", -1.0, |r| Ok(r.clone())).is_err());
}

#[test]
fn swap_to_nearest_neighbor_drift_matches_table() {
    let xs = [0.0, 0.3, 1.0, 1.2, 2.5, 4.0];
    let space = FiniteMetricSpace::on_line(&xs);
    let s_vals = [0.0, 5.0, 1.0, -2.0, 3.0, 3.5];
    let values = s_vals.iter().map(|&v| Meaning::vector(&[v])).collect();
    let arch = TabulatedArchitecture::new("line", space.clone(), values, ProvenanceRecord::stipulated()).unwrap();
    for i in 0..xs.len() {
        let nearest = (0..xs.len())
            .filter(|&j| j != i)
            .min_by(|&a, &b| space.distance(i, a).total_cmp(&space.distance(i, b)))
            .unwrap();
        let u = Perturbation::new("nn-swap", space.distance(i, nearest), move |r| match r {
            Representation::Point(k) if *k == i => Ok(Representation::Point(nearest)),
            _ => unreachable!(),
        })
        .unwrap();
        let (a, b) = perturb_and_interpret(&arch, &Representation::Point(i), &u, &ctx()).unwrap();
        let drift = a.distance(&b).unwrap();
        assert_eq!(drift, (s_vals[i] - s_vals[nearest]).abs());
    }
}

#[test]
fn finite_neighborhood_threat_enumerates_the_ball() {
    let space = FiniteMetricSpace::on_line(&[0.0, 1.0, 3.0]);
    let threat = FiniteNeighborhoodThreat::new(space);
    let ball = threat.enumerate(&Representation::Point(0), 1.5).unwrap().unwrap();
    let targets: Vec<_> = ball
        .iter()
        .map(|u| u.apply(&Representation::Point(0)).unwrap())
        .collect();
    assert_eq!(targets, vec![Representation::Point(0), Representation::Point(1)]);
    assert!(threat.enumerate(&Representation::Vector(vec![0.0]), 1.0).unwrap().is_err());
}

#[test]
fn provenance_rules() {
    assert!(ProvenanceRecord::learned("rl", [], true).is_err());
    let strong = ProvenanceRecord::learned("rl", [Stage::Encoder, Stage::Conceptualizer], true).unwrap();
    assert_eq!(strong.g0_level, G0Level::Strong);
    let external = ProvenanceRecord::learned("rl", [Stage::Encoder], false).unwrap();
    assert_eq!(external.g0_level, G0Level::Weak);
    let forged = ProvenanceRecord {
        g0_level: G0Level::Strong,
        training_process: None,
        acquired_components: Default::default(),
    };
    assert!(forged.validate().is_err());
}

#[test]
fn symbol_tree_mirrors_term_shape() {
    let g = grid_grammar();
    let t = g.parse_term("(compose BLUE EAST)").unwrap();
    let tree = SymbolTree::from_term(&t);
    assert_eq!(tree.tokens(), vec!["BLUE", "EAST"]);
}
