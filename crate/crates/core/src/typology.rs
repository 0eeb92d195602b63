//! Cell labels and archetypes for a grounding profile under explicit cutoffs.
//!
//! Errors rate "high" when at or below their cutoff; ACE and β rate "high"
//! when at or above theirs.

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::architecture::G0Level;
use crate::audit::GroundingProfile;

#[derive(Debug, Clone, Error, PartialEq)]
pub enum TypologyError {
    #[error("cutoff `{0}` must be a nonnegative number, got {1}")]
    NegativeCutoff(&'static str, f64),
    #[error("beta_min must lie in [0, 1], got {0}")]
    BetaRange(f64),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ThresholdPolicy {
    pub g1_max_err: f64,
    pub g2a_max_err: f64,
    pub g2b_min_ace: f64,
    /// Continuous ACE at or above this also rates G2b high. `None` disables
    /// the continuous route.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub g2b_min_ace_continuous: Option<f64>,
    pub g3_ref_scale: f64,
    pub g3_max_modulus_at_ref_scale: f64,
    pub g4_max_delta: f64,
    pub beta_min: f64,
}

impl ThresholdPolicy {
    /// Conventions scaled to the task's success threshold. These are not
    /// adequacy claims; override them per application.
    pub fn scaled_to(task_threshold: f64, ref_scale: f64) -> Self {
        ThresholdPolicy {
            g1_max_err: 0.25 * task_threshold,
            g2a_max_err: task_threshold,
            g2b_min_ace: 0.1,
            g2b_min_ace_continuous: Some(0.25 * task_threshold),
            g3_ref_scale: ref_scale,
            g3_max_modulus_at_ref_scale: 0.5 * ref_scale,
            g4_max_delta: 0.5 * task_threshold,
            beta_min: 0.75,
        }
    }

    pub fn validate(&self) -> Result<(), TypologyError> {
        let cutoffs = [
            ("g1_max_err", self.g1_max_err),
            ("g2a_max_err", self.g2a_max_err),
            ("g2b_min_ace", self.g2b_min_ace),
            ("g2b_min_ace_continuous", self.g2b_min_ace_continuous.unwrap_or(0.0)),
            ("g3_ref_scale", self.g3_ref_scale),
            ("g3_max_modulus_at_ref_scale", self.g3_max_modulus_at_ref_scale),
            ("g4_max_delta", self.g4_max_delta),
        ];
        for (name, v) in cutoffs {
            if !(v >= 0.0) {
                return Err(TypologyError::NegativeCutoff(name, v));
            }
        }
        if !(0.0..=1.0).contains(&self.beta_min) {
            return Err(TypologyError::BetaRange(self.beta_min));
        }
        Ok(())
    }
}

impl Default for ThresholdPolicy {
    fn default() -> Self {
        ThresholdPolicy::scaled_to(0.5, 0.5)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub value: f64,
    pub cutoff: f64,
    pub high: bool,
}

impl Check {
    fn at_most(value: f64, cutoff: f64) -> Self {
        Check { value, cutoff, high: value <= cutoff }
    }

    fn at_least(value: f64, cutoff: f64) -> Self {
        Check { value, cutoff, high: value >= cutoff }
    }
}

/// Every bit the labels are derived from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Rationale {
    pub g0_strong: bool,
    pub g1: Check,
    pub g2a: Check,
    pub ace: Check,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ace_continuous: Option<Check>,
    /// Causal contribution on record and a learned (strong) provenance.
    pub g2b_high: bool,
    pub g3: Check,
    pub g4: Check,
    pub beta: Check,
}

impl Rationale {
    pub fn from_profile(profile: &GroundingProfile, policy: &ThresholdPolicy) -> Self {
        let g0_strong = profile.g0_level == G0Level::Strong;
        let ace = Check::at_least(profile.ace, policy.g2b_min_ace);
        let ace_continuous = policy
            .g2b_min_ace_continuous
            .map(|c| Check::at_least(profile.ace_continuous, c));
        let contributes = ace.high || ace_continuous.is_some_and(|c| c.high);
        Rationale {
            g0_strong,
            g1: Check::at_most(profile.eps_pres, policy.g1_max_err),
            g2a: Check::at_most(profile.eps_faith, policy.g2a_max_err),
            ace,
            ace_continuous,
            g2b_high: g0_strong && contributes,
            g3: Check::at_most(profile.omega_at(policy.g3_ref_scale), policy.g3_max_modulus_at_ref_scale),
            g4: Check::at_most(profile.delta_comp, policy.g4_max_delta),
            beta: Check::at_least(profile.beta, policy.beta_min),
        }
    }
}

macro_rules! labels {
    ($name:ident { $($variant:ident => $text:literal),* $(,)? }) => {
        #[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
        pub enum $name {
            $(#[serde(rename = $text)] $variant,)*
        }

        impl fmt::Display for $name {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str(match self { $($name::$variant => $text,)* })
            }
        }
    };
}

labels!(G2aG4Cell {
    Grounded => "grounded",
    Memorizer => "memorizer",
    Miscalibrated => "miscalibrated",
    Lost => "lost",
});

labels!(G2aG2bCell {
    Competent => "competent",
    Lucky => "lucky",
    EffortfulFailure => "effortful failure",
    Random => "random",
});

labels!(G3G4Cell {
    SmoothGeneralist => "smooth generalist",
    RobustLookup => "robust lookup",
    BrittleAlgebraist => "brittle algebraist",
    FragileMemorizer => "fragile memorizer",
});

labels!(G0G2aCell {
    Genuine => "genuine",
    AuthenticFailure => "authentic failure",
    CargoCult => "cargo cult",
    BrokenPuppet => "broken puppet",
});

labels!(Archetype {
    Parrot => "parrot",
    Calculator => "calculator",
    GlassCanon => "glass canon",
    FluentEmpty => "fluent empty",
    BrittleExpert => "brittle expert",
    Drifter => "drifter",
    Grounded => "grounded",
    Unclassified => "unclassified",
});

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TypologyVerdict {
    pub cell_g2a_g4: G2aG4Cell,
    pub cell_g2a_g2b: G2aG2bCell,
    pub cell_g3_g4: G3G4Cell,
    pub cell_g0_g2a: G0G2aCell,
    pub archetype: Archetype,
    pub rationale: Rationale,
}

/// The four 2×2 cells. The archetype field is left `Unclassified`.
pub fn classify_cells(profile: &GroundingProfile, policy: &ThresholdPolicy) -> TypologyVerdict {
    let r = Rationale::from_profile(profile, policy);
    let (g2a, g2b, g3, g4) = (r.g2a.high, r.g2b_high, r.g3.high, r.g4.high);
    TypologyVerdict {
        cell_g2a_g4: match (g2a, g4) {
            (true, true) => G2aG4Cell::Grounded,
            (true, false) => G2aG4Cell::Memorizer,
            (false, true) => G2aG4Cell::Miscalibrated,
            (false, false) => G2aG4Cell::Lost,
        },
        cell_g2a_g2b: match (g2a, g2b) {
            (true, true) => G2aG2bCell::Competent,
            (true, false) => G2aG2bCell::Lucky,
            (false, true) => G2aG2bCell::EffortfulFailure,
            (false, false) => G2aG2bCell::Random,
        },
        cell_g3_g4: match (g3, g4) {
            (true, true) => G3G4Cell::SmoothGeneralist,
            (true, false) => G3G4Cell::RobustLookup,
            (false, true) => G3G4Cell::BrittleAlgebraist,
            (false, false) => G3G4Cell::FragileMemorizer,
        },
        cell_g0_g2a: match (r.g0_strong, g2a) {
            (true, true) => G0G2aCell::Genuine,
            (true, false) => G0G2aCell::AuthenticFailure,
            (false, true) => G0G2aCell::CargoCult,
            (false, false) => G0G2aCell::BrokenPuppet,
        },
        archetype: Archetype::Unclassified,
        rationale: r,
    }
}

/// First matching archetype for a single profile. Fluent empty needs two
/// evaluations and is never returned here; see [`classify_archetype_pair`].
///
/// Brittle expert is tested before glass canon: every brittle expert also
/// matches glass canon, so the printed order would hide it.
pub fn classify_archetype(profile: &GroundingProfile, policy: &ThresholdPolicy) -> Archetype {
    first_match(&Rationale::from_profile(profile, policy), None)
}

/// Like [`classify_archetype`] on the world-referential profile, with the
/// fluent-empty row also checked against the linguistic one.
pub fn classify_archetype_pair(
    linguistic: &GroundingProfile,
    extensional: &GroundingProfile,
    policy: &ThresholdPolicy,
) -> Archetype {
    let ling = Rationale::from_profile(linguistic, policy);
    first_match(&Rationale::from_profile(extensional, policy), Some(&ling))
}

fn first_match(r: &Rationale, linguistic: Option<&Rationale>) -> Archetype {
    let g4 = r.g4.high && r.beta.high;
    if r.g2a.high && !r.g2b_high && !g4 {
        Archetype::Parrot
    } else if r.g4.high && !r.g1.high {
        Archetype::Calculator
    } else if r.g2a.high && r.g2b_high && !r.g3.high {
        Archetype::BrittleExpert
    } else if r.g2a.high && !r.g3.high {
        Archetype::GlassCanon
    } else if linguistic.is_some_and(|l| l.g3.high && l.g4.high && l.beta.high) && !r.g2b_high {
        Archetype::FluentEmpty
    } else if !r.g1.high && !r.g2a.high {
        Archetype::Drifter
    } else if r.g0_strong && r.g1.high && r.g2a.high && r.g2b_high && r.g3.high && g4 {
        Archetype::Grounded
    } else {
        Archetype::Unclassified
    }
}

/// Cells plus the single-profile archetype.
pub fn classify(profile: &GroundingProfile, policy: &ThresholdPolicy) -> TypologyVerdict {
    let mut v = classify_cells(profile, policy);
    v.archetype = first_match(&v.rationale, None);
    v
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::audit::{EvalSummary, OmegaEntry, ProfileNotes};
    use crate::semantics::MeaningType;
    use proptest::prelude::*;

    fn profile(
        eps_pres: f64,
        eps_faith: f64,
        ace: f64,
        ace_continuous: f64,
        omega_half: f64,
        delta_comp: f64,
        beta: f64,
        g0: G0Level,
    ) -> GroundingProfile {
        GroundingProfile {
            eps_pres,
            eps_faith,
            ace,
            ace_continuous,
            omega_curve: vec![
                OmegaEntry { scale: 0.0, bound: 0.0 },
                OmegaEntry { scale: 0.5, bound: omega_half },
            ],
            delta_comp,
            beta,
            g0_level: g0,
            eval: EvalSummary {
                context: "plane".into(),
                meaning_type: MeaningType::Ext,
                threat_model: "gaussian".into(),
                reference: "commands".into(),
                alpha: 0.05,
            },
            notes: ProfileNotes {
                ace_continuous_extension: true,
                robustness_estimator: String::new(),
                aggregators: Default::default(),
            },
        }
    }

    fn printed() -> GroundingProfile {
        profile(0.2313, 0.5897, 0.0, 0.188, 0.176, 0.2191, 0.5, G0Level::Strong)
    }

    #[test]
    fn printed_profile_is_miscalibrated_effortful_failure() {
        let v = classify(&printed(), &ThresholdPolicy::default());
        assert_eq!(v.cell_g2a_g4, G2aG4Cell::Miscalibrated);
        assert_eq!(v.cell_g2a_g2b, G2aG2bCell::EffortfulFailure);
        assert_eq!(v.cell_g3_g4, G3G4Cell::SmoothGeneralist);
        assert_eq!(v.cell_g0_g2a, G0G2aCell::AuthenticFailure);
        assert!(!v.rationale.ace.high);
        assert!(v.rationale.ace_continuous.unwrap().high);
    }

    #[test]
    fn all_high_and_all_low() {
        let policy = ThresholdPolicy::default();
        let good = classify(&profile(0.0, 0.0, 1.0, 1.0, 0.0, 0.0, 1.0, G0Level::Strong), &policy);
        assert_eq!(
            (good.cell_g2a_g4, good.cell_g2a_g2b, good.cell_g3_g4, good.cell_g0_g2a, good.archetype),
            (
                G2aG4Cell::Grounded,
                G2aG2bCell::Competent,
                G3G4Cell::SmoothGeneralist,
                G0G2aCell::Genuine,
                Archetype::Grounded
            )
        );
        let bad = classify(&profile(9.0, 9.0, -1.0, -5.0, 9.0, 9.0, 0.0, G0Level::Weak), &policy);
        assert_eq!(
            (bad.cell_g2a_g4, bad.cell_g2a_g2b, bad.cell_g3_g4, bad.cell_g0_g2a, bad.archetype),
            (
                G2aG4Cell::Lost,
                G2aG2bCell::Random,
                G3G4Cell::FragileMemorizer,
                G0G2aCell::BrokenPuppet,
                Archetype::Drifter
            )
        );
    }

    #[test]
    fn archetype_rows() {
        let p = ThresholdPolicy::default();
        let s = G0Level::Strong;
        let parrot = profile(0.0, 0.1, 0.0, 0.0, 0.0, 1.0, 0.0, s);
        assert_eq!(classify_archetype(&parrot, &p), Archetype::Parrot);
        let calculator = profile(1.0, 1.0, 0.0, 0.0, 0.0, 0.0, 1.0, s);
        assert_eq!(classify_archetype(&calculator, &p), Archetype::Calculator);
        let brittle = profile(0.0, 0.0, 1.0, 1.0, 1.0, 0.0, 1.0, s);
        assert_eq!(classify_archetype(&brittle, &p), Archetype::BrittleExpert);
        let glass = profile(0.0, 0.0, 0.0, 0.0, 1.0, 0.0, 1.0, G0Level::Weak);
        assert_eq!(classify_archetype(&glass, &p), Archetype::GlassCanon);
        let grounded = profile(0.0, 0.0, 1.0, 1.0, 0.0, 0.0, 1.0, s);
        assert_eq!(classify_archetype(&grounded, &p), Archetype::Grounded);
        assert_eq!(classify_archetype(&printed(), &p), Archetype::Calculator);
    }

    #[test]
    fn fluent_empty_needs_two_profiles() {
        let p = ThresholdPolicy::default();
        let ling = profile(0.0, 0.3, 0.0, 0.0, 0.0, 0.0, 1.0, G0Level::Weak);
        let ext = profile(0.05, 2.0, 0.0, 0.0, 0.0, 1.0, 0.0, G0Level::Weak);
        assert_eq!(classify_archetype(&ext, &p), Archetype::Unclassified);
        assert_eq!(classify_archetype_pair(&ling, &ext, &p), Archetype::FluentEmpty);
    }

    #[test]
    fn policy_validation_and_round_trip() {
        let mut p = ThresholdPolicy::default();
        assert!(p.validate().is_ok());
        let text = toml::to_string(&p).unwrap();
        assert_eq!(toml::from_str::<ThresholdPolicy>(&text).unwrap(), p);
        p.beta_min = 1.5;
        assert_eq!(p.validate(), Err(TypologyError::BetaRange(1.5)));
        p.beta_min = 0.5;
        p.g4_max_delta = -1.0;
        assert!(p.validate().is_err());
    }

    fn rows(v: &TypologyVerdict) -> [bool; 4] {
        [
            matches!(v.cell_g2a_g4, G2aG4Cell::Grounded | G2aG4Cell::Memorizer),
            matches!(v.cell_g2a_g4, G2aG4Cell::Grounded | G2aG4Cell::Miscalibrated),
            matches!(v.cell_g2a_g2b, G2aG2bCell::Competent | G2aG2bCell::EffortfulFailure),
            matches!(v.cell_g3_g4, G3G4Cell::SmoothGeneralist | G3G4Cell::RobustLookup),
        ]
    }

    proptest! {
        #[test]
        fn improving_one_quantity_never_lowers_a_bit(
            q in prop::collection::vec(0.0f64..1.0, 7),
            which in 0usize..7,
            gain in 0.0f64..1.0,
        ) {
            let p = ThresholdPolicy::default();
            let base = profile(q[0], q[1], q[2], q[3], q[4], q[5], q[6], G0Level::Strong);
            let mut better = base.clone();
            match which {
                0 => better.eps_pres *= 1.0 - gain,
                1 => better.eps_faith *= 1.0 - gain,
                2 => better.ace += gain,
                3 => better.ace_continuous += gain,
                4 => better.omega_curve[1].bound *= 1.0 - gain,
                5 => better.delta_comp *= 1.0 - gain,
                _ => better.beta = (better.beta + gain).min(1.0),
            }
            let before = rows(&classify_cells(&base, &p));
            let after = rows(&classify_cells(&better, &p));
            for (b, a) in before.iter().zip(after) {
                prop_assert!(!*b || a);
            }
        }
    }
}
