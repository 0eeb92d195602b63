use serde::{Deserialize, Serialize};

use super::{distance, Aggregator, AuditError, SuccessPredicate};
use crate::architecture::{interpret, interpret_under, switches_for, GroundingArchitecture};
use crate::semantics::{
    homomorphic_extension, Atom, EvalContext, IntendedInterpretation, Meaning, SemanticAlgebra, Term,
};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ItemRow {
    pub item: String,
    pub realized: Meaning,
    pub target: Meaning,
    pub distance: f64,
}

/// An aggregated error and the rows behind it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ErrorReport {
    pub value: f64,
    pub aggregator: Aggregator,
    pub rows: Vec<ItemRow>,
}

fn report(rows: Vec<ItemRow>, aggregator: Aggregator, empty: AuditError) -> Result<ErrorReport, AuditError> {
    let distances: Vec<f64> = rows.iter().map(|r| r.distance).collect();
    let value = aggregator.aggregate(&distances).ok_or(empty)?;
    Ok(ErrorReport {
        value,
        aggregator,
        rows,
    })
}

/// G1: `d(interpret(a), I(a))` over atoms.
pub fn preservation_error(
    arch: &dyn GroundingArchitecture,
    interp: &IntendedInterpretation,
    ctx: &EvalContext,
    atoms: &[Atom],
    aggregator: Aggregator,
) -> Result<ErrorReport, AuditError> {
    if atoms.is_empty() {
        return Err(AuditError::EmptyAtomSet);
    }
    let terms: Vec<Term> = atoms.iter().cloned().map(Term::Leaf).collect();
    let rows = gold_rows(arch, interp, ctx, &terms)?;
    report(rows, aggregator, AuditError::EmptyAtomSet)
}

/// G2a: `d(interpret(τ), I↑(τ))` over possibly composite items.
pub fn faithfulness_error(
    arch: &dyn GroundingArchitecture,
    interp: &IntendedInterpretation,
    ctx: &EvalContext,
    items: &[Term],
    aggregator: Aggregator,
) -> Result<ErrorReport, AuditError> {
    if items.is_empty() {
        return Err(AuditError::EmptyItemSet);
    }
    let rows = gold_rows(arch, interp, ctx, items)?;
    report(rows, aggregator, AuditError::EmptyItemSet)
}

fn gold_rows(
    arch: &dyn GroundingArchitecture,
    interp: &IntendedInterpretation,
    ctx: &EvalContext,
    terms: &[Term],
) -> Result<Vec<ItemRow>, AuditError> {
    terms
        .iter()
        .map(|t| {
            let target = homomorphic_extension(interp, t)?;
            let realized = interpret(arch, t, ctx)?;
            let d = distance(arch, &realized, &target, ctx)?;
            Ok(ItemRow {
                item: t.to_string(),
                realized,
                target,
                distance: d,
            })
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AceRow {
    pub item: String,
    pub target: Meaning,
    pub on: Meaning,
    pub off: Meaning,
    pub distance_on: f64,
    pub distance_off: f64,
    pub success_on: bool,
    pub success_off: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AceReport {
    /// Mean of `succ(on) - succ(off)`, in `[-1, 1]`.
    pub ace: f64,
    /// Mean of `d(off, gold) - d(on, gold)`; positive when the mechanism
    /// reduces error.
    pub ace_continuous: f64,
    pub mechanisms: Vec<String>,
    pub rows: Vec<AceRow>,
}

/// G2b by ablation: every instance is run with the mechanisms on and off.
pub fn estimate_ace<S: AsRef<str>>(
    arch: &dyn GroundingArchitecture,
    mechanisms: &[S],
    ctx: &EvalContext,
    instances: &[(Term, Meaning)],
    succ: SuccessPredicate,
) -> Result<AceReport, AuditError> {
    if instances.is_empty() {
        return Err(AuditError::EmptyInstanceSet);
    }
    switches_for(arch, mechanisms)?;
    let mut rows = Vec::with_capacity(instances.len());
    for (term, target) in instances {
        let on = interpret(arch, term, ctx)?;
        let off = interpret_under(arch, term, ctx, mechanisms)?;
        let distance_on = distance(arch, &on, target, ctx)?;
        let distance_off = distance(arch, &off, target, ctx)?;
        rows.push(AceRow {
            item: term.to_string(),
            target: target.clone(),
            on,
            off,
            distance_on,
            distance_off,
            success_on: succ.succeeds(distance_on),
            success_off: succ.succeeds(distance_off),
        });
    }
    let n = rows.len() as f64;
    let ace = rows
        .iter()
        .map(|r| f64::from(u8::from(r.success_on)) - f64::from(u8::from(r.success_off)))
        .sum::<f64>()
        / n;
    let ace_continuous = rows.iter().map(|r| r.distance_off - r.distance_on).sum::<f64>() / n;
    Ok(AceReport {
        ace,
        ace_continuous,
        mechanisms: mechanisms.iter().map(|m| m.as_ref().to_string()).collect(),
        rows,
    })
}

/// G4 deficit: `d(interpret(f(σ⃗)), f^M(interpret(σ1), …))`. Both sides use
/// the architecture's own part meanings, not the gold ones.
pub fn composition_deficit(
    arch: &dyn GroundingArchitecture,
    algebra: &SemanticAlgebra,
    ctx: &EvalContext,
    node_terms: &[Term],
    aggregator: Aggregator,
) -> Result<ErrorReport, AuditError> {
    if node_terms.is_empty() {
        return Err(AuditError::EmptyItemSet);
    }
    let mut rows = Vec::with_capacity(node_terms.len());
    for term in node_terms {
        let Term::Node(ctor, children) = term else {
            return Err(AuditError::LeafTermRejected(term.to_string()));
        };
        let realized = interpret(arch, term, ctx)?;
        let parts = children
            .iter()
            .map(|c| interpret(arch, c, ctx))
            .collect::<Result<Vec<_>, _>>()?;
        let target = algebra.apply(&ctor.name, &parts)?;
        let d = distance(arch, &realized, &target, ctx)?;
        rows.push(ItemRow {
            item: term.to_string(),
            realized,
            target,
            distance: d,
        });
    }
    report(rows, aggregator, AuditError::EmptyItemSet)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SystematicityReport {
    pub beta: f64,
    pub tau: f64,
    pub rows: Vec<ItemRow>,
}

/// `β = (1/|D|) Σ 1[d(interpret(τ), gold(τ)) ≤ τ]` over held-out items.
pub fn systematicity(
    arch: &dyn GroundingArchitecture,
    ctx: &EvalContext,
    heldout: &[(Term, Meaning)],
    tau: f64,
) -> Result<SystematicityReport, AuditError> {
    if heldout.is_empty() {
        return Err(AuditError::EmptyHeldout);
    }
    if !(tau >= 0.0) {
        return Err(AuditError::NegativeThreshold(tau));
    }
    let rows = heldout
        .iter()
        .map(|(term, target)| {
            let realized = interpret(arch, term, ctx)?;
            let d = distance(arch, &realized, target, ctx)?;
            Ok(ItemRow {
                item: term.to_string(),
                realized,
                target: target.clone(),
                distance: d,
            })
        })
        .collect::<Result<Vec<_>, AuditError>>()?;
    let hits = rows.iter().filter(|r| r.distance <= tau).count();
    Ok(SystematicityReport {
        beta: hits as f64 / rows.len() as f64,
        tau,
        rows,
    })
}
