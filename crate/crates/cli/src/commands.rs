use std::path::{Path, PathBuf};
use std::sync::Arc;

use grounding_core::architecture::{
    FiniteNeighborhoodThreat, FixedSampler, GroundingArchitecture, Representation,
    RepresentationSampler, SymbolTree, ThreatModel,
};
use grounding_core::audit::{
    grounding_profile, robustness_curve, EvaluationTuple, ProfileRequest, SamplingPlan, SuccessPredicate,
};
use grounding_core::gridworld::{
    build_architecture, printed_agent, train, AtomCurve, GaussianNormThreat, GridError, WeightFile, WorldSpec,
};
use grounding_core::rng::SeedStreams;
use grounding_core::semantics::{
    homomorphic_extension, Atom, EvalContext, IntendedInterpretation, MeaningType, Term, TypedGrammar,
};
use grounding_core::symbolic::{EditThreat, RuleBase, SymbolicArchitecture, DEFAULT_RULES};
use grounding_core::typology::{classify, classify_archetype_pair};
use log::{info, warn};

use crate::config::{ArchitectureSource, AuditSection, Config, PlanKind};
use crate::report::{
    timestamp, write_csv_tables, ArchitectureInfo, ClassifyInput, ClassifyOutput, Extensions, ProfileReport,
    REPORT_SCHEMA,
};
use crate::verify::{run_suite, Suite, SuiteInputs, SuiteReport};
use crate::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, clap::ValueEnum)]
pub enum Format {
    #[default]
    Report,
    CsvTables,
}

fn runtime<E: std::fmt::Display>(e: E) -> CliError {
    CliError::Runtime(e.to_string())
}

fn create_dir(dir: &Path) -> Result<(), CliError> {
    std::fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrainOutcome {
    pub weights: PathBuf,
    pub log_csv: PathBuf,
    pub final_loss: f64,
    pub converged: bool,
}

/// Trains the agent and writes `weights.toml` and `train_log.csv` to the
/// output directory.
pub fn cmd_train(cfg: &Config) -> Result<TrainOutcome, CliError> {
    let section = cfg.train.clone().unwrap_or_default();
    let training = section.train_config(cfg.seed);
    let world = cfg.world();
    let (agent, log) = train(&world, &cfg.agent_spec(), &training).map_err(|e| match e {
        GridError::DivergedTraining { .. } => CliError::Diverged(e.to_string()),
        GridError::InvalidConfig(m) | GridError::InvalidWorld(m) | GridError::MalformedCommand(m) => {
            cfg.config_error(m)
        }
        GridError::UnknownToken(t) => cfg.config_error(format!("unknown token `{t}`")),
        GridError::Semantics(s) => cfg.config_error(s.to_string()),
        other => runtime(other),
    })?;
    let dir = cfg.output_dir();
    create_dir(&dir)?;
    let weights = dir.join("weights.toml");
    let text = WeightFile::from_agent(&agent).to_toml_string().map_err(runtime)?;
    std::fs::write(&weights, text).map_err(|e| CliError::io(&weights, e))?;

    let log_csv = dir.join("train_log.csv");
    let csv_err = |e: csv::Error| CliError::Runtime(format!("{}: {e}", log_csv.display()));
    let mut w = csv::Writer::from_path(&log_csv).map_err(csv_err)?;
    w.write_record(["episode", "loss"]).map_err(csv_err)?;
    for row in &log.rows {
        w.write_record([row.episode.to_string(), row.loss.to_string()]).map_err(csv_err)?;
    }
    w.flush().map_err(|e| CliError::io(&log_csv, e))?;

    let final_loss = log.last().map_or(f64::NAN, |r| r.loss);
    let converged = final_loss < section.target_loss;
    if converged {
        info!("final mean distance {final_loss:.5} after {} episodes", training.episodes);
    } else {
        warn!(
            "final mean distance {final_loss:.5} is not below the target {}",
            section.target_loss
        );
    }
    Ok(TrainOutcome {
        weights,
        log_csv,
        final_loss,
        converged,
    })
}

/// Everything an audit needs, resolved from the config.
struct Prepared {
    arch: Box<dyn GroundingArchitecture>,
    interp: IntendedInterpretation,
    ctx: EvalContext,
    atoms: Vec<Atom>,
    items: Vec<Term>,
    heldout: Vec<Term>,
    threat: Arc<dyn ThreatModel>,
    reference: Arc<dyn RepresentationSampler>,
    /// Single-point references for per-atom curves.
    per_atom: Vec<(String, Representation)>,
}

fn parse_list(
    cfg: &Config,
    given: &Option<Vec<String>>,
    default: Vec<Term>,
    parse: impl Fn(&str) -> Result<Term, String>,
) -> Result<Vec<Term>, CliError> {
    match given {
        None => Ok(default),
        Some(texts) => texts.iter().map(|t| parse(t).map_err(|m| cfg.config_error(m))).collect(),
    }
}

fn atoms_of(cfg: &Config, grammar: &TypedGrammar, given: &Option<Vec<String>>) -> Result<Vec<Atom>, CliError> {
    match given {
        None => Ok(grammar.atoms().cloned().collect()),
        Some(names) => names
            .iter()
            .map(|n| {
                grammar
                    .atom(n)
                    .cloned()
                    .ok_or_else(|| cfg.config_error(format!("unknown atom `{n}`")))
            })
            .collect(),
    }
}

fn world_threat(name: &str, cfg: &Config) -> Result<Arc<dyn ThreatModel>, CliError> {
    match name {
        "gaussian-norm" => Ok(Arc::new(GaussianNormThreat)),
        other => Err(cfg.config_error(format!("threat `{other}` is not available for this architecture"))),
    }
}

fn prepare(cfg: &Config, a: &AuditSection) -> Result<Prepared, CliError> {
    match &a.architecture {
        ArchitectureSource::Gridworld { weights } => {
            let path = cfg.resolve(weights);
            let text = std::fs::read_to_string(&path).map_err(|e| CliError::io(&path, e))?;
            let agent = WeightFile::from_toml_str(&text)
                .and_then(|w| w.to_agent())
                .map_err(|e| cfg.config_error(format!("{}: {e}", path.display())))?;
            let training = cfg.train.clone().unwrap_or_default().train_config(cfg.seed);
            let arch = build_architecture(agent, &training).map_err(runtime)?;
            let world = cfg.world();
            let interp = world.interpretation().map_err(runtime)?;
            let grammar = interp.algebra().grammar();
            let parse = |t: &str| world.parse_command(t).map_err(|e| e.to_string());
            let atoms = atoms_of(cfg, grammar, &a.atoms)?;
            let items = parse_list(cfg, &a.items, world.composites().map_err(runtime)?, parse)?;
            let heldout = parse_list(
                cfg,
                &a.heldout,
                world.parse_commands(&training.heldout).map_err(runtime)?,
                parse,
            )?;
            let mut per_atom = Vec::new();
            for atom in &atoms {
                let h = arch.hidden(&Term::Leaf(atom.clone())).map_err(runtime)?;
                per_atom.push((atom.name.clone(), Representation::Vector(h)));
            }
            let reference = Arc::new(FixedSampler::new(
                "atom-hidden-states",
                per_atom.iter().map(|(_, r)| r.clone()).collect(),
            ));
            let threat = world_threat(a.threat.as_deref().unwrap_or("gaussian-norm"), cfg)?;
            Ok(Prepared {
                ctx: EvalContext::new(
                    a.context.clone().unwrap_or_else(|| "navigation".into()),
                    a.meaning_type.unwrap_or(MeaningType::Ext),
                ),
                arch: Box::new(arch),
                interp,
                atoms,
                items,
                heldout,
                threat,
                reference,
                per_atom,
            })
        }
        ArchitectureSource::Printed => {
            let world = WorldSpec::default();
            let arch = printed_agent().map_err(runtime)?;
            let interp = world.interpretation().map_err(runtime)?;
            let grammar = interp.algebra().grammar();
            let parse = |t: &str| world.parse_command(t).map_err(|e| e.to_string());
            let atoms = match &a.atoms {
                None => vec![grammar.atom("RED").cloned().ok_or_else(|| runtime("RED"))?, grammar
                    .atom("NORTH")
                    .cloned()
                    .ok_or_else(|| runtime("NORTH"))?],
                given => atoms_of(cfg, grammar, given)?,
            };
            let items = parse_list(cfg, &a.items, vec![parse("RED NORTH").map_err(runtime)?], parse)?;
            let heldout = parse_list(
                cfg,
                &a.heldout,
                vec![parse("BLUE EAST").map_err(runtime)?, parse("RED WEST").map_err(runtime)?],
                parse,
            )?;
            let space = arch.space().clone();
            let points: Vec<Representation> = (0..space.len()).map(Representation::Point).collect();
            let threat: Arc<dyn ThreatModel> = match a.threat.as_deref().unwrap_or("finite-neighborhood") {
                "finite-neighborhood" => Arc::new(FiniteNeighborhoodThreat::new(space)),
                other => return Err(cfg.config_error(format!("threat `{other}` is not available for the printed table"))),
            };
            Ok(Prepared {
                ctx: EvalContext::new(
                    a.context.clone().unwrap_or_else(|| "navigation".into()),
                    a.meaning_type.unwrap_or(MeaningType::Ext),
                ),
                arch: Box::new(arch),
                interp,
                atoms,
                items,
                heldout,
                threat,
                reference: Arc::new(FixedSampler::new("printed-table", points)),
                per_atom: Vec::new(),
            })
        }
        ArchitectureSource::Symbolic { rules } => {
            let kb = match rules {
                None => RuleBase::from_toml_str(DEFAULT_RULES),
                Some(p) => {
                    let path = cfg.resolve(p);
                    let text = std::fs::read_to_string(&path).map_err(|e| CliError::io(&path, e))?;
                    RuleBase::from_toml_str(&text)
                }
            }
            .map_err(|e| cfg.config_error(e.to_string()))?;
            let interp = kb.interpretation().map_err(runtime)?;
            let grammar = interp.algebra().grammar().clone();
            let parse = |t: &str| grammar.parse_term(t).map_err(|e| e.to_string());
            let shallow = grammar.terms_up_to_depth(2);
            let atoms = atoms_of(cfg, &grammar, &a.atoms)?;
            let items = parse_list(
                cfg,
                &a.items,
                shallow.iter().filter(|t| !t.is_leaf()).cloned().collect(),
                parse,
            )?;
            let heldout = parse_list(
                cfg,
                &a.heldout,
                grammar.terms_up_to_depth(3).into_iter().filter(|t| t.depth() == 3).collect(),
                parse,
            )?;
            let reps = shallow
                .iter()
                .map(|t| Representation::Symbols(SymbolTree::from_term(t)))
                .collect();
            let threat: Arc<dyn ThreatModel> = match a.threat.as_deref().unwrap_or("edit") {
                "edit" => Arc::new(EditThreat),
                other => return Err(cfg.config_error(format!("threat `{other}` is not available for symbol trees"))),
            };
            Ok(Prepared {
                ctx: EvalContext::new(
                    a.context.clone().unwrap_or_else(|| "lexicon".into()),
                    a.meaning_type.unwrap_or(MeaningType::Inf),
                ),
                arch: Box::new(SymbolicArchitecture::new(kb)),
                interp,
                atoms,
                items,
                heldout,
                threat,
                reference: Arc::new(FixedSampler::new("terms-depth-2", reps)),
                per_atom: Vec::new(),
            })
        }
    }
}

/// Runs the configured audit and returns the report (not yet written).
pub fn build_report(cfg: &Config) -> Result<ProfileReport, CliError> {
    let a = cfg
        .audit
        .clone()
        .ok_or_else(|| cfg.config_error("no [audit] section"))?;
    cfg.check_audit_inputs()?;
    let p = prepare(cfg, &a)?;
    let policy = cfg.thresholds();
    let plan = match a.plan {
        PlanKind::Random => SamplingPlan::Random {
            samples_per_scale: a.samples_per_scale,
        },
        PlanKind::Exhaustive => SamplingPlan::Exhaustive,
    };
    let eval = EvaluationTuple::new(p.ctx.clone(), p.threat.clone(), p.reference.clone(), a.alpha)
        .map_err(|e| cfg.config_error(e.to_string()))?;
    let heldout = p
        .heldout
        .iter()
        .map(|t| Ok((t.clone(), homomorphic_extension(&p.interp, t).map_err(runtime)?)))
        .collect::<Result<Vec<_>, CliError>>()?;
    let mechanisms: Vec<String> = match &a.mechanisms {
        Some(m) => m.clone(),
        None => p.arch.mechanisms().iter().map(|m| m.id.clone()).collect(),
    };
    let streams = SeedStreams::new(cfg.seed);
    let req = ProfileRequest {
        interp: &p.interp,
        eval: &eval,
        atoms: &p.atoms,
        items: &p.items,
        heldout: &heldout,
        mechanisms: &mechanisms,
        succ: SuccessPredicate::new(a.success_threshold).map_err(|e| cfg.config_error(e.to_string()))?,
        scales: &a.scales,
        plan,
        tau: a.tau,
        aggregators: a.aggregators,
        streams,
    };
    let audit = grounding_profile(p.arch.as_ref(), &req).map_err(runtime)?;
    let verdict = classify(&audit.profile, &policy);

    let mut per_atom = Vec::new();
    for (name, rep) in &p.per_atom {
        let single = FixedSampler::new(format!("hidden({name})"), vec![rep.clone()]);
        let eval = EvaluationTuple::new(p.ctx.clone(), p.threat.clone(), Arc::new(single), a.alpha).map_err(runtime)?;
        let curve = robustness_curve(p.arch.as_ref(), &eval, &a.scales, plan, &streams.child(&format!("atom/{name}")))
            .map_err(runtime)?;
        per_atom.push(AtomCurve {
            atom: name.clone(),
            curve,
        });
    }
    Ok(ProfileReport {
        schema: REPORT_SCHEMA.to_string(),
        toolkit_version: env!("CARGO_PKG_VERSION").to_string(),
        generated_at: timestamp(),
        seed: cfg.seed,
        extensions: Extensions {
            ace_continuous: audit.profile.notes.ace_continuous_extension,
            per_atom_robustness: !per_atom.is_empty(),
        },
        architecture: ArchitectureInfo {
            name: p.arch.name().to_string(),
            mechanisms,
        },
        profile: audit.profile,
        verdict,
        thresholds: policy,
        config: a,
        tables: audit.tables,
        per_atom,
    })
}

/// Writes `report.toml` or the CSV tables into the output directory and
/// returns what was written.
pub fn cmd_audit(cfg: &Config, format: Format) -> Result<Vec<PathBuf>, CliError> {
    let report = build_report(cfg)?;
    if let Err(v) = report.validate() {
        return Err(CliError::Runtime(format!("report fails its schema: {}", v.0)));
    }
    let dir = cfg.output_dir();
    create_dir(&dir)?;
    match format {
        Format::Report => {
            let path = dir.join("report.toml");
            report.write(&path)?;
            Ok(vec![path])
        }
        Format::CsvTables => write_csv_tables(&report, &dir.join("tables")),
    }
}

pub fn cmd_verify(cfg: &Config, suite: Suite) -> Result<SuiteReport, CliError> {
    let section = cfg.verify.clone().unwrap_or_default();
    let kb = match cfg.audit.as_ref().map(|a| &a.architecture) {
        Some(ArchitectureSource::Symbolic { rules: Some(p) }) => {
            let path = cfg.resolve(p);
            let text = std::fs::read_to_string(&path).map_err(|e| CliError::io(&path, e))?;
            RuleBase::from_toml_str(&text)
        }
        _ => RuleBase::from_toml_str(DEFAULT_RULES),
    }
    .map_err(|e| cfg.config_error(e.to_string()))?;
    let training = cfg.train.clone().unwrap_or_default().train_config(cfg.seed);
    let inputs = SuiteInputs {
        section: &section,
        seed: cfg.seed,
        kb: &kb,
        spec: &cfg.agent_spec(),
        world: &cfg.world(),
        training: &training,
    };
    let report = run_suite(suite, &inputs)?;
    if report.passed {
        Ok(report)
    } else {
        Err(CliError::VerifyFailed(report.lines.join("\n")))
    }
}

/// Classifies the profile in `input` under its thresholds, or the default
/// policy when it has none.
pub fn cmd_classify(input: &Path) -> Result<ClassifyOutput, CliError> {
    let text = std::fs::read_to_string(input).map_err(|e| CliError::Config {
        path: input.to_path_buf(),
        message: e.to_string(),
    })?;
    let parsed: ClassifyInput = toml::from_str(&text).map_err(|e| CliError::Config {
        path: input.to_path_buf(),
        message: e.to_string(),
    })?;
    let thresholds = parsed.thresholds.unwrap_or_default();
    thresholds.validate().map_err(|e| CliError::Config {
        path: input.to_path_buf(),
        message: e.to_string(),
    })?;
    let mut verdict = classify(&parsed.profile, &thresholds);
    if let Some(ext) = &parsed.extensional_profile {
        verdict.archetype = classify_archetype_pair(&parsed.profile, ext, &thresholds);
    }
    Ok(ClassifyOutput { thresholds, verdict })
}
