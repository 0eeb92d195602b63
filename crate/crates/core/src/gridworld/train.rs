use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use super::agent::{Agent, AgentSpec, Group};
use super::{GridError, WorldSpec};
use crate::rng::{SeedStreams, StreamRng};
use crate::semantics::Term;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TrainConfig {
    pub episodes: usize,
    pub learning_rate: f64,
    /// Learning rate reached by a cosine schedule on the last episode.
    pub final_learning_rate: f64,
    pub sigma: f64,
    pub baseline_decay: f64,
    /// Policy samples per command per episode.
    pub samples_per_command: usize,
    pub heldout: Vec<String>,
    pub log_every: usize,
    pub seed: u64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            episodes: 3000,
            learning_rate: 3e-3,
            final_learning_rate: 1e-4,
            sigma: 0.3,
            baseline_decay: 0.99,
            samples_per_command: 8,
            heldout: vec!["(compose BLUE EAST)".into(), "(compose RED WEST)".into()],
            log_every: 100,
            seed: 0,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<(), GridError> {
        let bad = |m: &str| Err(GridError::InvalidConfig(m.to_string()));
        if !(self.sigma > 0.0) {
            return bad("sigma must be positive");
        }
        if !(self.learning_rate > 0.0) || !(self.final_learning_rate > 0.0) {
            return bad("learning rates must be positive");
        }
        if !(0.0..1.0).contains(&self.baseline_decay) {
            return bad("baseline_decay must lie in [0, 1)");
        }
        if self.samples_per_command == 0 {
            return bad("samples_per_command must be at least 1");
        }
        if self.log_every == 0 || self.log_every > 500 {
            return bad("log_every must lie in 1..=500");
        }
        Ok(())
    }

    /// A one-line description of the training process for provenance.
    pub fn descriptor(&self) -> String {
        format!(
            "REINFORCE, gaussian policy sigma={}, {} episodes x {} samples, adam lr={}..{}, baseline decay={}, seed={}",
            self.sigma,
            self.episodes,
            self.samples_per_command,
            self.learning_rate,
            self.final_learning_rate,
            self.baseline_decay,
            self.seed
        )
    }

    fn rate(&self, episode: usize) -> f64 {
        if self.episodes <= 1 {
            return self.learning_rate;
        }
        let t = episode as f64 / (self.episodes - 1) as f64;
        self.final_learning_rate
            + 0.5 * (self.learning_rate - self.final_learning_rate) * (1.0 + (std::f64::consts::PI * t).cos())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LogRow {
    pub episode: usize,
    /// Mean `‖μ − gold‖` over the training commands.
    pub loss: f64,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct TrainLog {
    pub rows: Vec<LogRow>,
}

impl TrainLog {
    pub fn last(&self) -> Option<LogRow> {
        self.rows.last().copied()
    }

    pub fn min_loss(&self) -> Option<f64> {
        self.rows.iter().map(|r| r.loss).reduce(f64::min)
    }
}

/// A command as token indices with its target.
#[derive(Debug, Clone)]
pub(crate) struct Example {
    pub tokens: Vec<usize>,
    pub gold: [f64; 2],
}

pub(crate) fn training_set(world: &WorldSpec, spec: &AgentSpec, heldout: &[Term]) -> Result<Vec<Example>, GridError> {
    world
        .commands()?
        .into_iter()
        .filter(|c| !heldout.contains(c))
        .map(|c| example(world, spec, &c))
        .collect()
}

pub(crate) fn example(world: &WorldSpec, spec: &AgentSpec, term: &Term) -> Result<Example, GridError> {
    let tokens = term
        .surface_tokens()
        .iter()
        .map(|t| spec.token_index(t))
        .collect::<Result<_, _>>()?;
    Ok(Example {
        tokens,
        gold: world.gold_meaning(term)?,
    })
}

fn dist(a: [f64; 2], b: [f64; 2]) -> f64 {
    ((a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2)).sqrt()
}

/// Actions and centred rewards for one command, held fixed while the
/// surrogate `−(R − b) log π(a | μ)` is differentiated.
#[derive(Debug, Clone)]
struct Rollout {
    actions: Vec<[f64; 2]>,
    advantages: Vec<f64>,
}

fn sample_actions(mu: [f64; 2], sigma: f64, k: usize, rng: &mut StreamRng) -> Vec<[f64; 2]> {
    (0..k)
        .map(|_| {
            let nx: f64 = StandardNormal.sample(rng);
            let ny: f64 = StandardNormal.sample(rng);
            [mu[0] + sigma * nx, mu[1] + sigma * ny]
        })
        .collect()
}

/// `∂/∂μ` of the mean surrogate over the rollout, scaled by `weight`.
fn surrogate_grad(mu: [f64; 2], roll: &Rollout, sigma: f64, weight: f64) -> [f64; 2] {
    let k = roll.actions.len() as f64;
    let mut g = [0.0; 2];
    for (a, adv) in roll.actions.iter().zip(&roll.advantages) {
        for d in 0..2 {
            g[d] -= weight * adv * (a[d] - mu[d]) / (sigma * sigma * k);
        }
    }
    g
}

fn surrogate(mu: [f64; 2], roll: &Rollout, sigma: f64, weight: f64) -> f64 {
    let k = roll.actions.len() as f64;
    roll.actions
        .iter()
        .zip(&roll.advantages)
        .map(|(a, adv)| {
            let log_pi = -((a[0] - mu[0]).powi(2) + (a[1] - mu[1]).powi(2)) / (2.0 * sigma * sigma);
            -weight * adv * log_pi / k
        })
        .sum()
}

struct Adam {
    m: Vec<f64>,
    v: Vec<f64>,
    t: i32,
}

impl Adam {
    const B1: f64 = 0.9;
    const B2: f64 = 0.999;
    const EPS: f64 = 1e-8;

    fn new(n: usize) -> Self {
        Adam {
            m: vec![0.0; n],
            v: vec![0.0; n],
            t: 0,
        }
    }

    fn step(&mut self, params: &mut [f64], grad: &[f64], lr: f64) {
        self.t += 1;
        let c1 = 1.0 - Self::B1.powi(self.t);
        let c2 = 1.0 - Self::B2.powi(self.t);
        for i in 0..params.len() {
            self.m[i] = Self::B1 * self.m[i] + (1.0 - Self::B1) * grad[i];
            self.v[i] = Self::B2 * self.v[i] + (1.0 - Self::B2) * grad[i] * grad[i];
            params[i] -= lr * (self.m[i] / c1) / ((self.v[i] / c2).sqrt() + Self::EPS);
        }
    }
}

/// Mean distance of the deterministic outputs to their targets.
pub(crate) fn mean_distance(agent: &Agent, set: &[Example]) -> Result<f64, GridError> {
    let mut total = 0.0;
    for ex in set {
        total += dist(agent.forward(&ex.tokens)?.output, ex.gold);
    }
    Ok(total / set.len() as f64)
}

/// REINFORCE with a per-command running-mean baseline and Adam.
///
/// One episode visits every training command once and draws
/// `samples_per_command` actions around each predicted coordinate.
pub fn train(world: &WorldSpec, spec: &AgentSpec, config: &TrainConfig) -> Result<(Agent, TrainLog), GridError> {
    world.validate()?;
    config.validate()?;
    let mut agent = Agent::init(spec.clone())?;
    let heldout = world.parse_commands(&config.heldout)?;
    let set = training_set(world, spec, &heldout)?;
    let mut log = TrainLog::default();
    if config.episodes == 0 {
        log.rows.push(LogRow {
            episode: 0,
            loss: mean_distance(&agent, &set)?,
        });
        return Ok((agent, log));
    }

    let mut rng = SeedStreams::new(config.seed).stream("gridworld/train");
    let mut adam = Adam::new(agent.len());
    let mut baselines: Vec<Option<f64>> = vec![None; set.len()];
    let weight = 1.0 / set.len() as f64;
    for episode in 0..config.episodes {
        let mut grad = vec![0.0; agent.len()];
        let mut loss = 0.0;
        for (i, ex) in set.iter().enumerate() {
            let trace = agent.forward(&ex.tokens)?;
            let mu = trace.output;
            loss += dist(mu, ex.gold) * weight;
            let actions = sample_actions(mu, config.sigma, config.samples_per_command, &mut rng);
            let rewards: Vec<f64> = actions.iter().map(|a| -dist(*a, ex.gold)).collect();
            let mean_reward = rewards.iter().sum::<f64>() / rewards.len() as f64;
            let b = *baselines[i].get_or_insert(mean_reward);
            let roll = Rollout {
                advantages: rewards.iter().map(|r| r - b).collect(),
                actions,
            };
            agent.backward(&trace, surrogate_grad(mu, &roll, config.sigma, weight), &mut grad);
            baselines[i] = Some(config.baseline_decay * b + (1.0 - config.baseline_decay) * mean_reward);
        }
        if !loss.is_finite() || loss > 1e3 {
            return Err(GridError::DivergedTraining { episode, loss });
        }
        if episode % config.log_every == 0 {
            log.rows.push(LogRow { episode, loss });
        }
        adam.step(agent.params_mut(), &grad, config.rate(episode));
    }
    let loss = mean_distance(&agent, &set)?;
    if !loss.is_finite() || loss > 1e3 {
        return Err(GridError::DivergedTraining {
            episode: config.episodes,
            loss,
        });
    }
    log.rows.push(LogRow {
        episode: config.episodes,
        loss,
    });
    Ok((agent, log))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroupCheck {
    pub group: String,
    pub checked: usize,
    pub max_relative_error: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GradientCheck {
    pub step: f64,
    pub groups: Vec<GroupCheck>,
}

impl GradientCheck {
    pub fn max_relative_error(&self) -> f64 {
        self.groups.iter().map(|g| g.max_relative_error).fold(0.0, f64::max)
    }
}

/// Compares the backward pass against central differences of the REINFORCE
/// surrogate on one fixed minibatch (every training command, actions drawn
/// from `seed`).
///
/// `per_group` caps how many coordinates of each tensor are probed; they
/// are spread evenly over the tensor. The relative error of a coordinate is
/// `|a − n| / max(|a|, |n|, floor)` with `floor = 1e-6`, so coordinates whose
/// true gradient is zero are compared absolutely.
pub fn gradient_check(
    agent: &Agent,
    world: &WorldSpec,
    config: &TrainConfig,
    seed: u64,
    per_group: Option<usize>,
) -> Result<GradientCheck, GridError> {
    const STEP: f64 = 1e-5;
    const FLOOR: f64 = 1e-6;
    config.validate()?;
    let heldout = world.parse_commands(&config.heldout)?;
    let set = training_set(world, agent.spec(), &heldout)?;
    let weight = 1.0 / set.len() as f64;
    let mut rng = SeedStreams::new(seed).stream("gridworld/gradient-check");
    let mut rolls = Vec::with_capacity(set.len());
    let mut analytic = vec![0.0; agent.len()];
    for ex in &set {
        let trace = agent.forward(&ex.tokens)?;
        let mu = trace.output;
        let actions = sample_actions(mu, config.sigma, config.samples_per_command, &mut rng);
        let rewards: Vec<f64> = actions.iter().map(|a| -dist(*a, ex.gold)).collect();
        let b = rewards.iter().sum::<f64>() / rewards.len() as f64;
        let roll = Rollout {
            advantages: rewards.iter().map(|r| r - b).collect(),
            actions,
        };
        agent.backward(&trace, surrogate_grad(mu, &roll, config.sigma, weight), &mut analytic);
        rolls.push(roll);
    }
    let loss = |a: &Agent| -> Result<f64, GridError> {
        let mut total = 0.0;
        for (ex, roll) in set.iter().zip(&rolls) {
            total += surrogate(a.forward(&ex.tokens)?.output, roll, config.sigma, weight);
        }
        Ok(total)
    };

    let mut probe = agent.clone();
    let mut groups = Vec::new();
    for g in Group::ALL {
        let range = agent.range(g);
        let n = range.len();
        let take = per_group.map_or(n, |k| k.min(n).max(1));
        let mut worst: f64 = 0.0;
        for j in 0..take {
            let i = range.start + j * n / take;
            let orig = probe.params()[i];
            probe.params_mut()[i] = orig + STEP;
            let up = loss(&probe)?;
            probe.params_mut()[i] = orig - STEP;
            let down = loss(&probe)?;
            probe.params_mut()[i] = orig;
            let numeric = (up - down) / (2.0 * STEP);
            let a = analytic[i];
            let rel = (a - numeric).abs() / a.abs().max(numeric.abs()).max(FLOOR);
            worst = worst.max(rel);
        }
        groups.push(GroupCheck {
            group: g.name().to_string(),
            checked: take,
            max_relative_error: worst,
        });
    }
    Ok(GradientCheck { step: STEP, groups })
}
