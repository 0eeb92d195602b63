use rand::Rng;
use serde::{Deserialize, Serialize};

use super::GridError;
use crate::rng::SeedStreams;

pub const DEFAULT_VOCAB: [&str; 6] = ["RED", "BLUE", "NORTH", "SOUTH", "EAST", "WEST"];

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AgentSpec {
    pub vocab: Vec<String>,
    pub embed_width: usize,
    pub hidden_width: usize,
    pub seed: u64,
}

impl Default for AgentSpec {
    fn default() -> Self {
        AgentSpec {
            vocab: DEFAULT_VOCAB.iter().map(|s| s.to_string()).collect(),
            embed_width: 16,
            hidden_width: 64,
            seed: 0,
        }
    }
}

impl AgentSpec {
    pub fn validate(&self) -> Result<(), GridError> {
        if self.vocab.is_empty() || self.embed_width == 0 || self.hidden_width == 0 {
            return Err(GridError::InvalidConfig("vocabulary and widths must be nonempty".into()));
        }
        Ok(())
    }

    pub fn token_index(&self, token: &str) -> Result<usize, GridError> {
        self.vocab
            .iter()
            .position(|v| v == token)
            .ok_or_else(|| GridError::UnknownToken(token.to_string()))
    }
}

/// Parameter tensors, in storage order.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Group {
    Embedding,
    Wz,
    Wr,
    Wh,
    Uz,
    Ur,
    Uh,
    Bz,
    Br,
    Bh,
    DecoderW,
    DecoderB,
}

impl Group {
    pub const ALL: [Group; 12] = [
        Group::Embedding,
        Group::Wz,
        Group::Wr,
        Group::Wh,
        Group::Uz,
        Group::Ur,
        Group::Uh,
        Group::Bz,
        Group::Br,
        Group::Bh,
        Group::DecoderW,
        Group::DecoderB,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Group::Embedding => "embedding",
            Group::Wz => "update.input",
            Group::Wr => "reset.input",
            Group::Wh => "candidate.input",
            Group::Uz => "update.recurrent",
            Group::Ur => "reset.recurrent",
            Group::Uh => "candidate.recurrent",
            Group::Bz => "update.bias",
            Group::Br => "reset.bias",
            Group::Bh => "candidate.bias",
            Group::DecoderW => "decoder.weight",
            Group::DecoderB => "decoder.bias",
        }
    }

    /// Row-major `(rows, cols)`.
    pub fn shape(self, spec: &AgentSpec) -> (usize, usize) {
        let (v, e, h) = (spec.vocab.len(), spec.embed_width, spec.hidden_width);
        match self {
            Group::Embedding => (v, e),
            Group::Wz | Group::Wr | Group::Wh => (h, e),
            Group::Uz | Group::Ur | Group::Uh => (h, h),
            Group::Bz | Group::Br | Group::Bh => (h, 1),
            Group::DecoderW => (2, h),
            Group::DecoderB => (2, 1),
        }
    }

    fn index(self) -> usize {
        Group::ALL.iter().position(|g| *g == self).unwrap_or(0)
    }
}

/// Embedding, a gated recurrent cell and a linear read-out to the plane.
#[derive(Debug, Clone, PartialEq)]
pub struct Agent {
    spec: AgentSpec,
    offsets: [usize; 13],
    params: Vec<f64>,
}

/// Per-step values kept for the backward pass.
#[derive(Debug, Clone, PartialEq)]
pub struct Step {
    pub token: usize,
    pub h_prev: Vec<f64>,
    pub z: Vec<f64>,
    pub r: Vec<f64>,
    pub candidate: Vec<f64>,
    pub h: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Trace {
    pub steps: Vec<Step>,
    pub output: [f64; 2],
}

impl Trace {
    pub fn hidden_states(&self) -> impl Iterator<Item = &[f64]> {
        self.steps.iter().map(|s| s.h.as_slice())
    }

    pub fn final_hidden(&self) -> &[f64] {
        &self.steps.last().expect("forward runs at least one step").h
    }
}

fn sigmoid(x: f64) -> f64 {
    1.0 / (1.0 + (-x).exp())
}

/// `out += M x` for row-major `M` of shape `(out.len(), x.len())`.
fn matvec_add(m: &[f64], x: &[f64], out: &mut [f64]) {
    let cols = x.len();
    for (i, o) in out.iter_mut().enumerate() {
        let row = &m[i * cols..(i + 1) * cols];
        *o += row.iter().zip(x).map(|(a, b)| a * b).sum::<f64>();
    }
}

/// `out += Mᵀ y`.
fn matvec_t_add(m: &[f64], y: &[f64], out: &mut [f64]) {
    let cols = out.len();
    for (i, yi) in y.iter().enumerate() {
        let row = &m[i * cols..(i + 1) * cols];
        for (o, a) in out.iter_mut().zip(row) {
            *o += a * yi;
        }
    }
}

/// `G += y xᵀ`.
fn outer_add(g: &mut [f64], y: &[f64], x: &[f64]) {
    let cols = x.len();
    for (i, yi) in y.iter().enumerate() {
        for (gij, xj) in g[i * cols..(i + 1) * cols].iter_mut().zip(x) {
            *gij += yi * xj;
        }
    }
}

impl Agent {
    /// Uniform `±1/√fan_in` for every tensor, drawn from the spec's seed.
    pub fn init(spec: AgentSpec) -> Result<Self, GridError> {
        let mut agent = Self::zeros(spec)?;
        let mut rng = SeedStreams::new(agent.spec.seed).stream("agent/init");
        for g in Group::ALL {
            let fan_in = match g {
                Group::Embedding | Group::Wz | Group::Wr | Group::Wh => agent.spec.embed_width,
                _ => agent.spec.hidden_width,
            };
            let bound = 1.0 / (fan_in as f64).sqrt();
            for w in agent.group_mut(g) {
                *w = rng.gen_range(-bound..bound);
            }
        }
        Ok(agent)
    }

    pub fn zeros(spec: AgentSpec) -> Result<Self, GridError> {
        spec.validate()?;
        let mut offsets = [0usize; 13];
        for (i, g) in Group::ALL.iter().enumerate() {
            let (r, c) = g.shape(&spec);
            offsets[i + 1] = offsets[i] + r * c;
        }
        Ok(Agent {
            params: vec![0.0; offsets[12]],
            offsets,
            spec,
        })
    }

    pub fn spec(&self) -> &AgentSpec {
        &self.spec
    }

    pub fn params(&self) -> &[f64] {
        &self.params
    }

    pub fn params_mut(&mut self) -> &mut [f64] {
        &mut self.params
    }

    pub fn len(&self) -> usize {
        self.params.len()
    }

    pub fn is_empty(&self) -> bool {
        self.params.is_empty()
    }

    pub fn range(&self, g: Group) -> std::ops::Range<usize> {
        let i = g.index();
        self.offsets[i]..self.offsets[i + 1]
    }

    pub fn group(&self, g: Group) -> &[f64] {
        &self.params[self.range(g)]
    }

    pub fn group_mut(&mut self, g: Group) -> &mut [f64] {
        let r = self.range(g);
        &mut self.params[r]
    }

    pub fn tokens(&self, words: &[&str]) -> Result<Vec<usize>, GridError> {
        words.iter().map(|w| self.spec.token_index(w)).collect()
    }

    /// Runs the recurrence over `tokens` from a zero state and decodes the
    /// final hidden state.
    pub fn forward(&self, tokens: &[usize]) -> Result<Trace, GridError> {
        if tokens.is_empty() {
            return Err(GridError::MalformedCommand("empty command".into()));
        }
        let (e, h) = (self.spec.embed_width, self.spec.hidden_width);
        let emb = self.group(Group::Embedding);
        let mut state = vec![0.0; h];
        let mut steps = Vec::with_capacity(tokens.len());
        for &tok in tokens {
            if tok >= self.spec.vocab.len() {
                return Err(GridError::UnknownToken(format!("#{tok}")));
            }
            let x = &emb[tok * e..(tok + 1) * e];
            let mut az = self.group(Group::Bz).to_vec();
            matvec_add(self.group(Group::Wz), x, &mut az);
            matvec_add(self.group(Group::Uz), &state, &mut az);
            let mut ar = self.group(Group::Br).to_vec();
            matvec_add(self.group(Group::Wr), x, &mut ar);
            matvec_add(self.group(Group::Ur), &state, &mut ar);
            let z: Vec<f64> = az.into_iter().map(sigmoid).collect();
            let r: Vec<f64> = ar.into_iter().map(sigmoid).collect();
            let rh: Vec<f64> = r.iter().zip(&state).map(|(a, b)| a * b).collect();
            let mut ah = self.group(Group::Bh).to_vec();
            matvec_add(self.group(Group::Wh), x, &mut ah);
            matvec_add(self.group(Group::Uh), &rh, &mut ah);
            let candidate: Vec<f64> = ah.into_iter().map(f64::tanh).collect();
            let next: Vec<f64> = (0..h)
                .map(|i| (1.0 - z[i]) * state[i] + z[i] * candidate[i])
                .collect();
            steps.push(Step {
                token: tok,
                h_prev: std::mem::replace(&mut state, next.clone()),
                z,
                r,
                candidate,
                h: next,
            });
        }
        let output = self.decode(&state);
        Ok(Trace { steps, output })
    }

    /// The linear read-out `Γ`.
    pub fn decode(&self, hidden: &[f64]) -> [f64; 2] {
        let mut y = self.group(Group::DecoderB).to_vec();
        matvec_add(self.group(Group::DecoderW), hidden, &mut y);
        [y[0], y[1]]
    }

    /// Accumulates `∂L/∂θ` into `grad` given `∂L/∂output`.
    pub fn backward(&self, trace: &Trace, d_out: [f64; 2], grad: &mut [f64]) {
        let (e, h) = (self.spec.embed_width, self.spec.hidden_width);
        let emb = self.group(Group::Embedding);
        let r = |g: Group| self.range(g);
        outer_add(&mut grad[r(Group::DecoderW)], &d_out, trace.final_hidden());
        for (gb, d) in grad[r(Group::DecoderB)].iter_mut().zip(d_out) {
            *gb += d;
        }
        let mut dh = vec![0.0; h];
        matvec_t_add(self.group(Group::DecoderW), &d_out, &mut dh);

        for step in trace.steps.iter().rev() {
            let x = &emb[step.token * e..(step.token + 1) * e];
            let mut dh_prev: Vec<f64> = (0..h).map(|i| dh[i] * (1.0 - step.z[i])).collect();
            let da_h: Vec<f64> = (0..h)
                .map(|i| dh[i] * step.z[i] * (1.0 - step.candidate[i] * step.candidate[i]))
                .collect();
            let da_z: Vec<f64> = (0..h)
                .map(|i| dh[i] * (step.candidate[i] - step.h_prev[i]) * step.z[i] * (1.0 - step.z[i]))
                .collect();
            let rh: Vec<f64> = (0..h).map(|i| step.r[i] * step.h_prev[i]).collect();
            let mut d_rh = vec![0.0; h];
            matvec_t_add(self.group(Group::Uh), &da_h, &mut d_rh);
            let da_r: Vec<f64> = (0..h)
                .map(|i| d_rh[i] * step.h_prev[i] * step.r[i] * (1.0 - step.r[i]))
                .collect();
            for i in 0..h {
                dh_prev[i] += d_rh[i] * step.r[i];
            }
            matvec_t_add(self.group(Group::Uz), &da_z, &mut dh_prev);
            matvec_t_add(self.group(Group::Ur), &da_r, &mut dh_prev);

            outer_add(&mut grad[r(Group::Wz)], &da_z, x);
            outer_add(&mut grad[r(Group::Wr)], &da_r, x);
            outer_add(&mut grad[r(Group::Wh)], &da_h, x);
            outer_add(&mut grad[r(Group::Uz)], &da_z, &step.h_prev);
            outer_add(&mut grad[r(Group::Ur)], &da_r, &step.h_prev);
            outer_add(&mut grad[r(Group::Uh)], &da_h, &rh);
            for (g, d) in [(Group::Bz, &da_z), (Group::Br, &da_r), (Group::Bh, &da_h)] {
                for (gb, v) in grad[r(g)].iter_mut().zip(d.iter()) {
                    *gb += v;
                }
            }
            let mut dx = vec![0.0; e];
            matvec_t_add(self.group(Group::Wz), &da_z, &mut dx);
            matvec_t_add(self.group(Group::Wr), &da_r, &mut dx);
            matvec_t_add(self.group(Group::Wh), &da_h, &mut dx);
            let base = self.range(Group::Embedding).start + step.token * e;
            for (g, v) in grad[base..base + e].iter_mut().zip(dx) {
                *g += v;
            }
            dh = dh_prev;
        }
    }
}
