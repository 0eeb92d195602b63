//! Property suites behind `verify`.

use grounding_core::architecture::interpret;
use grounding_core::audit::{composition_deficit, preservation_error, Aggregator};
use grounding_core::gridworld::{gradient_check, Agent, AgentSpec, TrainConfig, WorldSpec};
use grounding_core::modulus::{
    check_minimality, is_valid_modulus, minimal_oscillation, oscillation_at, uniform_discreteness,
    vanishing_limit_check, ModulusCurve,
};
use grounding_core::rng::SeedStreams;
use grounding_core::semantics::{
    homomorphic_extension, Atom, Euclidean, EvalContext, FiniteMetricSpace, Meaning, MeaningType, Term,
};
use grounding_core::symbolic::{RuleBase, SymbolicArchitecture};
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::config::VerifySection;
use crate::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum Suite {
    Modulus,
    Homomorphism,
    Counterexample,
    Gradients,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SuiteReport {
    pub suite: String,
    pub passed: bool,
    pub lines: Vec<String>,
}

impl SuiteReport {
    fn new(suite: &str) -> Self {
        SuiteReport {
            suite: suite.to_string(),
            passed: true,
            lines: Vec::new(),
        }
    }

    fn check(&mut self, ok: bool, line: String) {
        self.passed &= ok;
        self.lines.push(format!("[{}] {line}", if ok { "ok" } else { "FAIL" }));
    }

    fn merge(mut self, other: SuiteReport) -> Self {
        self.passed &= other.passed;
        self.lines.extend(other.lines);
        self
    }
}

fn runtime<E: std::fmt::Display>(e: E) -> CliError {
    CliError::Runtime(e.to_string())
}

/// Pairwise image oscillation within `eps`, by direct enumeration of
/// ordered pairs.
fn brute_omega(space: &FiniteMetricSpace, image: &[Meaning], eps: f64) -> f64 {
    let mut best: f64 = 0.0;
    for i in 0..space.len() {
        for j in 0..space.len() {
            if space.distance(i, j) <= eps {
                best = best.max(image[i].distance(&image[j]).unwrap_or(f64::INFINITY));
            }
        }
    }
    best
}

/// `ω*` on random finite spaces: monotone, zero at 0, dominating every pair
/// oscillation, and below every valid modulus drawn at random.
pub fn modulus_properties(spaces: usize, max_points: usize, seed: u64) -> Result<SuiteReport, CliError> {
    let mut rng = SeedStreams::new(seed).stream("verify/modulus");
    let mut report = SuiteReport::new("modulus");
    let (mut violations, mut candidates) = (0usize, 0usize);
    for _ in 0..spaces {
        let n = rng.gen_range(2..=max_points.max(2));
        let dim = rng.gen_range(1..=3);
        let lattice = rng.gen_bool(0.3);
        let points: Vec<Vec<f64>> = (0..n)
            .map(|_| {
                (0..dim)
                    .map(|_| {
                        let x: f64 = rng.gen_range(0.0..1.0);
                        if lattice {
                            (x * 4.0).round() / 4.0 + 1e-3 * rng.gen_range(0.0..1.0)
                        } else {
                            x
                        }
                    })
                    .collect()
            })
            .collect();
        let space = FiniteMetricSpace::from_points(&points, &Euclidean);
        let image: Vec<Meaning> = if rng.gen_bool(0.5) {
            (0..n).map(|_| Meaning::vector(&[rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0)])).collect()
        } else {
            (0..n).map(|_| Meaning::Label(format!("L{}", rng.gen_range(0..3)))).collect()
        };
        let mut grid = vec![0.0];
        grid.extend((1..=8).map(|k| k as f64 * space.diameter().max(1e-9) / 8.0));
        let omega = minimal_oscillation(&space, &image, &grid).map_err(runtime)?;
        let mut ok = omega.is_monotone() && omega.values[0] == 0.0;
        ok &= matches!(is_valid_modulus(&omega, &space, &image).map_err(runtime)?, Ok(()));
        for &s in &omega.grid {
            ok &= (omega.value_at(s) - brute_omega(&space, &image, s)).abs() <= 1e-12;
            ok &= (oscillation_at(&space, &image, s).map_err(runtime)? - omega.value_at(s)).abs() <= 1e-12;
        }
        for (i, j, d) in space.pairs() {
            ok &= image[i].distance(&image[j]).map_err(runtime)? <= omega.value_at(d) + 1e-12;
        }
        // valid moduli: ω* plus a random monotone margin, and random monotone
        // curves that happen to pass the validity check
        for _ in 0..5 {
            let mut margin = 0.0;
            let lifted: Vec<f64> = omega
                .values
                .iter()
                .enumerate()
                .map(|(k, v)| {
                    if k > 0 {
                        margin += rng.gen_range(0.0..0.5);
                    }
                    v + margin
                })
                .collect();
            let candidate = ModulusCurve::new(omega.grid.clone(), lifted).map_err(runtime)?;
            candidates += 1;
            ok &= matches!(is_valid_modulus(&candidate, &space, &image).map_err(runtime)?, Ok(()));
            ok &= matches!(check_minimality(&space, &image, &candidate).map_err(runtime)?, Ok(()));

            let mut level = 0.0;
            let random: Vec<f64> = omega
                .grid
                .iter()
                .enumerate()
                .map(|(k, _)| {
                    if k > 0 {
                        level += rng.gen_range(0.0..1.5);
                    }
                    level
                })
                .collect();
            let candidate = ModulusCurve::new(omega.grid.clone(), random).map_err(runtime)?;
            if matches!(is_valid_modulus(&candidate, &space, &image).map_err(runtime)?, Ok(())) {
                candidates += 1;
                ok &= matches!(check_minimality(&space, &image, &candidate).map_err(runtime)?, Ok(()));
            }
        }
        if !ok {
            violations += 1;
        }
    }
    report.check(
        violations == 0,
        format!("{spaces} random spaces (<= {max_points} points), {candidates} valid moduli compared: {violations} violations"),
    );
    Ok(report)
}

/// On a discrete space `ω*` is 0 below 1 and the image diameter from 1 on,
/// and `ε ↦ (diam / δ0) ε` is a valid modulus.
pub fn discrete_corollary(seed: u64) -> Result<SuiteReport, CliError> {
    let mut rng = SeedStreams::new(seed).stream("verify/discrete");
    let mut report = SuiteReport::new("modulus");
    let mut failures = 0usize;
    let mut cases = 0usize;
    for n in 2..=10 {
        for _ in 0..5 {
            cases += 1;
            let space = FiniteMetricSpace::discrete(n);
            let image: Vec<Meaning> = (0..n)
                .map(|_| Meaning::vector(&[rng.gen_range(-3.0..3.0), rng.gen_range(-3.0..3.0)]))
                .collect();
            let mut diam: f64 = 0.0;
            for a in &image {
                for b in &image {
                    diam = diam.max(a.distance(b).map_err(runtime)?);
                }
            }
            let mut ok = true;
            for eps in [0.0, 0.25, 0.5, 0.999] {
                ok &= oscillation_at(&space, &image, eps).map_err(runtime)? == 0.0;
            }
            for eps in [1.0, 1.5, 4.0] {
                ok &= oscillation_at(&space, &image, eps).map_err(runtime)? == diam;
            }
            let delta0 = uniform_discreteness(&space);
            ok &= delta0 == Some(1.0);
            let lipschitz = diam / delta0.unwrap_or(1.0);
            let candidate = ModulusCurve::from_fn(vec![0.0, 0.5, 1.0, 2.0], |e| lipschitz * e).map_err(runtime)?;
            ok &= matches!(is_valid_modulus(&candidate, &space, &image).map_err(runtime)?, Ok(()));
            if !ok {
                failures += 1;
            }
        }
    }
    report.check(
        failures == 0,
        format!("discrete spaces: {cases} cases, omega* = 0 below 1 and = diam from 1; Lipschitz bound valid; {failures} failures"),
    );
    Ok(report)
}

/// The truncated `{0} ∪ {1/n}` with `S(0) = 0`, `S(1/n) = 1`: `ω*` stays at
/// 1 down to the finest probe, so the vanishing-limit check must fail. The
/// identity map on the same space is the control and must pass.
pub fn counterexample(n: usize) -> Result<SuiteReport, CliError> {
    let mut report = SuiteReport::new("counterexample");
    let mut xs = vec![0.0];
    xs.extend((1..=n).map(|k| 1.0 / k as f64));
    let space = FiniteMetricSpace::on_line(&xs);
    let step: Vec<Meaning> = xs.iter().map(|&x| Meaning::vector(&[if x == 0.0 { 0.0 } else { 1.0 }])).collect();
    let ident: Vec<Meaning> = xs.iter().map(|&x| Meaning::vector(&[x])).collect();
    let finest = 1.0 / n as f64;
    let probes = [finest, 2.0 * finest, 0.1, 0.5, 1.0];
    let mut grid = vec![0.0];
    grid.extend(probes);
    grid.sort_by(f64::total_cmp);
    grid.dedup();

    let curve = minimal_oscillation(&space, &step, &grid).map_err(runtime)?;
    let at_probes: Vec<f64> = probes.iter().map(|&p| curve.value_at(p)).collect();
    report.check(
        at_probes.iter().all(|&v| v == 1.0),
        format!("omega* = 1 at every probe scale >= 1/{n}: {at_probes:?}"),
    );
    let detected = vanishing_limit_check(&curve, &probes).is_err();
    report.check(detected, "step map: non-vanishing limit detected".into());

    let control = minimal_oscillation(&space, &ident, &grid).map_err(runtime)?;
    report.check(
        vanishing_limit_check(&control, &probes).is_ok(),
        format!("identity control: omega*(1/{n}) = {}", control.value_at(finest)),
    );
    Ok(report)
}

/// Stipulated symbolic lookup: exact atom preservation, zero composition
/// deficit and coincidence with the homomorphic extension on every term up
/// to `depth`.
pub fn homomorphism(kb: &RuleBase, depth: usize) -> Result<SuiteReport, CliError> {
    let mut report = SuiteReport::new("homomorphism");
    let arch = SymbolicArchitecture::new(kb.clone());
    let interp = kb.interpretation().map_err(runtime)?;
    let ctx = EvalContext::new("lexicon", MeaningType::Inf);
    let grammar = interp.algebra().grammar();
    let atoms: Vec<Atom> = grammar.atoms().cloned().collect();
    let pres = preservation_error(&arch, &interp, &ctx, &atoms, Aggregator::Max).map_err(runtime)?;
    report.check(pres.value == 0.0, format!("eps_pres = {} over {} atoms", pres.value, atoms.len()));

    let terms = grammar.terms_up_to_depth(depth);
    let mut mismatches = 0usize;
    for t in &terms {
        let got = interpret(&arch, t, &ctx).map_err(runtime)?;
        if got != homomorphic_extension(&interp, t).map_err(runtime)? {
            mismatches += 1;
        }
    }
    report.check(
        mismatches == 0,
        format!("interpret = homomorphic extension on {} terms of depth <= {depth}: {mismatches} mismatches", terms.len()),
    );
    let nodes: Vec<Term> = terms.into_iter().filter(|t| !t.is_leaf()).collect();
    let delta = composition_deficit(&arch, interp.algebra(), &ctx, &nodes, Aggregator::Max).map_err(runtime)?;
    report.check(delta.value == 0.0, format!("delta_comp = {} over {} composites", delta.value, nodes.len()));
    Ok(report)
}

/// Backward pass against central differences at initialization.
pub fn gradients(
    spec: &AgentSpec,
    world: &WorldSpec,
    training: &TrainConfig,
    seed: u64,
    probes: Option<usize>,
) -> Result<SuiteReport, CliError> {
    let mut report = SuiteReport::new("gradients");
    let agent = Agent::init(spec.clone()).map_err(runtime)?;
    let check = gradient_check(&agent, world, training, seed, probes).map_err(runtime)?;
    for g in &check.groups {
        report.check(
            g.max_relative_error <= 1e-4,
            format!("{:<20} {:>6} coordinates, max relative error {:.3e}", g.group, g.checked, g.max_relative_error),
        );
    }
    report.lines.push(format!("max relative error {:.3e}", check.max_relative_error()));
    Ok(report)
}

pub struct SuiteInputs<'a> {
    pub section: &'a VerifySection,
    pub seed: u64,
    pub kb: &'a RuleBase,
    pub spec: &'a AgentSpec,
    pub world: &'a WorldSpec,
    pub training: &'a TrainConfig,
}

pub fn run_suite(suite: Suite, inputs: &SuiteInputs<'_>) -> Result<SuiteReport, CliError> {
    let s = inputs.section;
    match suite {
        Suite::Modulus => Ok(modulus_properties(s.spaces, s.max_points, inputs.seed)?.merge(discrete_corollary(inputs.seed)?)),
        Suite::Homomorphism => homomorphism(inputs.kb, s.depth),
        Suite::Counterexample => counterexample(s.counterexample_n),
        Suite::Gradients => gradients(inputs.spec, inputs.world, inputs.training, inputs.seed, s.gradient_probes),
    }
}
