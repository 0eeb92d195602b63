//! The profile report: a TOML document whose layout is described in
//! `docs/report-schema.md`. Everything except `generated_at` is a function
//! of the config and the seed.

use std::io::Write;
use std::path::Path;

use grounding_core::audit::{GroundingProfile, ProfileTables};
use grounding_core::gridworld::AtomCurve;
use grounding_core::typology::{classify, ThresholdPolicy, TypologyVerdict};
use serde::{Deserialize, Serialize};

use crate::config::AuditSection;
use crate::CliError;

pub const REPORT_SCHEMA: &str = "grounding-report/1";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Extensions {
    /// The report carries `ace_continuous` next to the binary ACE.
    pub ace_continuous: bool,
    /// Per-atom robustness curves are included.
    pub per_atom_robustness: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ArchitectureInfo {
    pub name: String,
    pub mechanisms: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProfileReport {
    pub schema: String,
    pub toolkit_version: String,
    /// Seconds since the Unix epoch; not covered by the determinism contract.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub generated_at: Option<String>,
    pub seed: u64,
    pub extensions: Extensions,
    pub architecture: ArchitectureInfo,
    pub profile: GroundingProfile,
    pub verdict: TypologyVerdict,
    pub thresholds: ThresholdPolicy,
    pub config: AuditSection,
    pub tables: ProfileTables,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub per_atom: Vec<AtomCurve>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SchemaViolation(pub String);

impl ProfileReport {
    pub fn to_toml_string(&self) -> Result<String, CliError> {
        toml::to_string(self).map_err(|e| CliError::Runtime(format!("serializing report: {e}")))
    }

    pub fn from_toml_str(text: &str) -> Result<Self, toml::de::Error> {
        toml::from_str(text)
    }

    pub fn write(&self, path: &Path) -> Result<(), CliError> {
        let text = self.to_toml_string()?;
        let mut f = std::fs::File::create(path).map_err(|e| CliError::io(path, e))?;
        f.write_all(text.as_bytes()).map_err(|e| CliError::io(path, e))
    }

    /// The report with the timestamp removed, for determinism comparisons.
    pub fn without_timestamp(&self) -> Self {
        ProfileReport {
            generated_at: None,
            ..self.clone()
        }
    }

    /// Checks the constraints the schema places on a report.
    pub fn validate(&self) -> Result<(), SchemaViolation> {
        let fail = |m: String| Err(SchemaViolation(m));
        if self.schema != REPORT_SCHEMA {
            return fail(format!("schema `{}`, expected `{REPORT_SCHEMA}`", self.schema));
        }
        let p = &self.profile;
        for (name, v) in [
            ("eps_pres", p.eps_pres),
            ("eps_faith", p.eps_faith),
            ("delta_comp", p.delta_comp),
        ] {
            if !(v >= 0.0) {
                return fail(format!("{name} = {v} must be nonnegative"));
            }
        }
        if !(-1.0..=1.0).contains(&p.ace) {
            return fail(format!("ace = {} outside [-1, 1]", p.ace));
        }
        if !(0.0..=1.0).contains(&p.beta) {
            return fail(format!("beta = {} outside [0, 1]", p.beta));
        }
        match p.omega_curve.first() {
            Some(first) if first.scale == 0.0 && first.bound == 0.0 => {}
            _ => return fail("omega_curve must start at (0, 0)".into()),
        }
        if p.omega_curve.windows(2).any(|w| w[0].scale >= w[1].scale || w[0].bound > w[1].bound) {
            return fail("omega_curve must be ascending in scale and monotone".into());
        }
        let t = &self.tables;
        let pairs = [
            ("eps_pres", p.eps_pres, t.preservation.value),
            ("eps_faith", p.eps_faith, t.faithfulness.value),
            ("ace", p.ace, t.ace.ace),
            ("ace_continuous", p.ace_continuous, t.ace.ace_continuous),
            ("delta_comp", p.delta_comp, t.composition.value),
            ("beta", p.beta, t.systematicity.beta),
        ];
        for (name, a, b) in pairs {
            if a != b {
                return fail(format!("profile {name} = {a} disagrees with its table ({b})"));
            }
        }
        if p.omega_curve.len() != t.robustness.points.len() {
            return fail("omega_curve and robustness table differ in length".into());
        }
        if self.thresholds.validate().is_err() {
            return fail("thresholds are invalid".into());
        }
        let expected = classify(p, &self.thresholds);
        if expected.rationale != self.verdict.rationale
            || expected.cell_g2a_g4 != self.verdict.cell_g2a_g4
            || expected.cell_g2a_g2b != self.verdict.cell_g2a_g2b
            || expected.cell_g3_g4 != self.verdict.cell_g3_g4
            || expected.cell_g0_g2a != self.verdict.cell_g0_g2a
        {
            return fail("verdict does not follow from the profile and thresholds".into());
        }
        if self.extensions.ace_continuous != p.notes.ace_continuous_extension {
            return fail("extensions.ace_continuous disagrees with the profile notes".into());
        }
        if self.extensions.per_atom_robustness == self.per_atom.is_empty() {
            return fail("extensions.per_atom_robustness disagrees with per_atom".into());
        }
        Ok(())
    }
}

/// Input of `classify`: a profile (a report is accepted as is) and optional
/// thresholds; a second, extensional profile enables pair archetypes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassifyInput {
    pub profile: GroundingProfile,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub thresholds: Option<ThresholdPolicy>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub extensional_profile: Option<GroundingProfile>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassifyOutput {
    pub thresholds: ThresholdPolicy,
    pub verdict: TypologyVerdict,
}

pub fn timestamp() -> Option<String> {
    std::time::SystemTime::now()
        .duration_since(std::time::UNIX_EPOCH)
        .ok()
        .map(|d| d.as_secs().to_string())
}

/// The per-measure tables as CSV files in `dir`.
pub fn write_csv_tables(report: &ProfileReport, dir: &Path) -> Result<Vec<std::path::PathBuf>, CliError> {
    std::fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
    let t = &report.tables;
    let mut written = Vec::new();
    let mut emit = |name: &str, header: &[&str], rows: Vec<Vec<String>>| -> Result<(), CliError> {
        let path = dir.join(name);
        let csv_err = |e: csv::Error| CliError::Runtime(format!("{}: {e}", path.display()));
        let mut w = csv::Writer::from_path(&path).map_err(csv_err)?;
        w.write_record(header).map_err(csv_err)?;
        for r in rows {
            w.write_record(&r).map_err(csv_err)?;
        }
        w.flush().map_err(|e| CliError::io(&path, e))?;
        written.push(path);
        Ok(())
    };
    let meaning = |m: &grounding_core::semantics::Meaning| format!("{m}");
    let item_rows = |rows: &[grounding_core::audit::ItemRow]| {
        rows.iter()
            .map(|r| vec![r.item.clone(), meaning(&r.realized), meaning(&r.target), r.distance.to_string()])
            .collect::<Vec<_>>()
    };
    let item_header = ["item", "realized", "target", "distance"];
    emit("preservation.csv", &item_header, item_rows(&t.preservation.rows))?;
    emit("faithfulness.csv", &item_header, item_rows(&t.faithfulness.rows))?;
    emit("composition.csv", &item_header, item_rows(&t.composition.rows))?;
    emit("systematicity.csv", &item_header, item_rows(&t.systematicity.rows))?;
    emit(
        "ace.csv",
        &["item", "target", "on", "off", "distance_on", "distance_off", "success_on", "success_off"],
        t.ace
            .rows
            .iter()
            .map(|r| {
                vec![
                    r.item.clone(),
                    meaning(&r.target),
                    meaning(&r.on),
                    meaning(&r.off),
                    r.distance_on.to_string(),
                    r.distance_off.to_string(),
                    r.success_on.to_string(),
                    r.success_off.to_string(),
                ]
            })
            .collect(),
    )?;
    let mut curve_rows: Vec<Vec<String>> = t
        .robustness
        .points
        .iter()
        .map(|p| vec!["pooled".into(), p.scale.to_string(), p.quantile.to_string(), p.bound.to_string()])
        .collect();
    for c in &report.per_atom {
        curve_rows.extend(
            c.curve
                .points
                .iter()
                .map(|p| vec![c.atom.clone(), p.scale.to_string(), p.quantile.to_string(), p.bound.to_string()]),
        );
    }
    emit("robustness.csv", &["reference", "scale", "quantile", "bound"], curve_rows)?;
    let p = &report.profile;
    emit(
        "profile.csv",
        &["quantity", "value"],
        vec![
            vec!["eps_pres".into(), p.eps_pres.to_string()],
            vec!["eps_faith".into(), p.eps_faith.to_string()],
            vec!["ace".into(), p.ace.to_string()],
            vec!["ace_continuous".into(), p.ace_continuous.to_string()],
            vec!["delta_comp".into(), p.delta_comp.to_string()],
            vec!["beta".into(), p.beta.to_string()],
            vec!["g0_level".into(), p.g0_level.to_string()],
            vec!["archetype".into(), report.verdict.archetype.to_string()],
        ],
    )?;
    Ok(written)
}
