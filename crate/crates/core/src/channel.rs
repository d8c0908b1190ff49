//! Binary-input additive-noise channels and their finite-state reductions.

use rand::{Rng, RngCore};
use serde::{Deserialize, Serialize};

use crate::noise::{GilbertElliottNoise, MarkovNoiseModel};
use crate::rng::stream_rng;
use crate::{Error, Result};

/// Signal levels for input bits 0 and 1.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ModulationMap {
    a0: f64,
    a1: f64,
}

impl ModulationMap {
    pub fn new(a0: f64, a1: f64) -> Result<Self> {
        if !(a0.is_finite() && a1.is_finite()) || a0 == a1 {
            return Err(Error::InvalidParameter(format!(
                "modulation levels must be finite and distinct, got ({a0}, {a1})"
            )));
        }
        Ok(Self { a0, a1 })
    }

    /// Bit 0 → −a, bit 1 → +a.
    pub fn antipodal(a: f64) -> Result<Self> {
        Self::new(-a, a)
    }

    /// Bit 0 → 0, bit 1 → a.
    pub fn on_off(a: f64) -> Result<Self> {
        Self::new(0.0, a)
    }

    #[inline]
    pub fn level(&self, bit: u8) -> f64 {
        if bit == 0 {
            self.a0
        } else {
            self.a1
        }
    }

    pub fn levels(&self) -> [f64; 2] {
        [self.a0, self.a1]
    }

    pub fn midpoint(&self) -> f64 {
        0.5 * (self.a0 + self.a1)
    }

    /// `a₁ − a₀`.
    pub fn separation(&self) -> f64 {
        self.a1 - self.a0
    }
}

/// How the real output line is cut into discrete cells for a finite-state reduction.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", tag = "kind")]
pub enum OutputQuantizer {
    /// Two cells split at the midpoint of the modulation levels.
    HardDecision,
    /// `cells` equal-width cells on `[lo, hi]` plus two unbounded outer cells.
    Uniform { cells: usize, lo: f64, hi: f64 },
    /// Explicit increasing interior thresholds.
    Thresholds { edges: Vec<f64> },
}

impl OutputQuantizer {
    fn edges(&self, map: &ModulationMap) -> Result<Vec<f64>> {
        let edges = match self {
            OutputQuantizer::HardDecision => vec![map.midpoint()],
            OutputQuantizer::Uniform { cells, lo, hi } => {
                if *cells == 0 || !(lo < hi) {
                    return Err(Error::InvalidParameter(format!(
                        "uniform quantizer needs cells ≥ 1 and lo < hi, got {cells}, [{lo}, {hi}]"
                    )));
                }
                (0..=*cells)
                    .map(|k| lo + (hi - lo) * k as f64 / *cells as f64)
                    .collect()
            }
            OutputQuantizer::Thresholds { edges } => edges.clone(),
        };
        if edges.windows(2).any(|w| !(w[0] < w[1])) || edges.iter().any(|e| !e.is_finite()) {
            return Err(Error::InvalidParameter(
                "quantizer thresholds must be finite and strictly increasing".into(),
            ));
        }
        Ok(edges)
    }

    /// Cell index of a real output.
    pub fn cell(&self, map: &ModulationMap, y: f64) -> Result<usize> {
        let edges = self.edges(map)?;
        Ok(edges.partition_point(|&e| e <= y))
    }
}

/// A binary-input channel `Y = m(X) + N` with Markov noise.
#[derive(Clone, Debug, PartialEq)]
pub struct MemoryChannel<N> {
    noise: N,
    map: ModulationMap,
}

impl<N: MarkovNoiseModel> MemoryChannel<N> {
    pub fn new(noise: N, map: ModulationMap) -> Self {
        Self { noise, map }
    }

    pub fn noise(&self) -> &N {
        &self.noise
    }

    pub fn map(&self) -> &ModulationMap {
        &self.map
    }

    /// `W(y|x)`.
    pub fn likelihood(&self, y: f64, x: u8) -> f64 {
        self.noise.marginal_pdf(y - self.map.level(x))
    }

    /// Genie-aided likelihood `W̃(y|x, n₀)` given the previous noise sample.
    pub fn ga_likelihood(&self, y: f64, x: u8, n0: f64) -> f64 {
        self.noise.conditional_pdf(y - self.map.level(x), n0)
    }

    pub fn transmit(&self, bits: &[u8], seed: u64) -> Vec<f64> {
        let mut rng = stream_rng(seed, 0);
        self.transmit_with(bits, &mut rng)
    }

    pub fn transmit_with(&self, bits: &[u8], rng: &mut dyn RngCore) -> Vec<f64> {
        let noise = crate::noise::sample_path_with(&self.noise, bits.len(), rng);
        bits.iter()
            .zip(noise)
            .map(|(&b, n)| self.map.level(b) + n)
            .collect()
    }

    /// Reduces the channel to a finite-state channel.
    ///
    /// States are the `bins` equal-probability cells of the stationary noise
    /// marginal. Transitions integrate the conditional noise law over each
    /// source bin; emissions give the probability of each output cell when the
    /// noise is distributed as the marginal restricted to the state's bin.
    pub fn to_fsc(&self, bins: usize, output: &OutputQuantizer) -> Result<FiniteStateChannel> {
        if bins == 0 {
            return Err(Error::InvalidParameter("bins must be at least 1".into()));
        }
        let noise = &self.noise;
        let b = bins as f64;
        // Interior state edges in noise units; outer edges are ±∞.
        let mut state_edges = vec![f64::NEG_INFINITY];
        state_edges.extend((1..bins).map(|k| noise.marginal_quantile(k as f64 / b)));
        state_edges.push(f64::INFINITY);
        if state_edges.windows(2).any(|w| !(w[0] < w[1])) {
            return Err(Error::Degenerate("quantile bins collapse".into()));
        }

        const SUB: usize = 32;
        let mut transition = vec![vec![0.0; bins]; bins];
        for (from, row) in transition.iter_mut().enumerate() {
            for k in 0..SUB {
                let p = (from as f64 + (k as f64 + 0.5) / SUB as f64) / b;
                let n0 = noise.marginal_quantile(p);
                let mut prev = 0.0;
                for (to, cell) in row.iter_mut().enumerate() {
                    let c = if to + 1 == bins {
                        1.0
                    } else {
                        noise.conditional_cdf(state_edges[to + 1], n0)
                    };
                    *cell += (c - prev).max(0.0);
                    prev = c;
                }
            }
            let s: f64 = row.iter().sum();
            if s <= 0.0 {
                return Err(Error::Degenerate(format!("state bin {from} has no mass")));
            }
            row.iter_mut().for_each(|v| *v /= s);
        }

        let out_edges = output.edges(&self.map)?;
        let outputs = out_edges.len() + 1;
        let cdf = |n: f64| {
            if n == f64::NEG_INFINITY {
                0.0
            } else if n == f64::INFINITY {
                1.0
            } else {
                noise.marginal_cdf(n)
            }
        };
        let mut emission = vec![vec![vec![0.0; outputs]; 2]; bins];
        for (s, em) in emission.iter_mut().enumerate() {
            let (elo, ehi) = (state_edges[s], state_edges[s + 1]);
            for x in 0..2u8 {
                let a = self.map.level(x);
                let row = &mut em[x as usize];
                for (y, v) in row.iter_mut().enumerate() {
                    let lo = if y == 0 { f64::NEG_INFINITY } else { out_edges[y - 1] - a };
                    let hi = if y + 1 == outputs { f64::INFINITY } else { out_edges[y] - a };
                    let (l, h) = (lo.max(elo), hi.min(ehi));
                    if l < h {
                        *v = (b * (cdf(h) - cdf(l))).max(0.0);
                    }
                }
                let total: f64 = row.iter().sum();
                if total <= 0.0 {
                    return Err(Error::Degenerate(format!("state {s} emits nothing")));
                }
                row.iter_mut().for_each(|v| *v /= total);
            }
        }
        FiniteStateChannel::new(transition, emission)
    }
}

/// A hidden-Markov binary-input channel with a finite output alphabet.
///
/// A block starts from a boundary state `s₀` (the state of the symbol before
/// the block), drawn from the stationary law unless a genie fixes it. At time
/// `t ≥ 1` the state moves to `s_t ~ P(·|s_{t−1})` and the output is drawn
/// from `emission[s_t][x_t]`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FiniteStateChannel {
    transition: Vec<Vec<f64>>,
    emission: Vec<Vec<Vec<f64>>>,
    stationary: Vec<f64>,
}

const STOCHASTIC_TOL: f64 = 1e-9;

impl FiniteStateChannel {
    /// `transition[s][s']`, `emission[s][x][y]`.
    pub fn new(transition: Vec<Vec<f64>>, emission: Vec<Vec<Vec<f64>>>) -> Result<Self> {
        let states = transition.len();
        if states == 0 || emission.len() != states {
            return Err(Error::InvalidParameter(format!(
                "need matching non-empty state sets, got {} transitions and {} emissions",
                states,
                emission.len()
            )));
        }
        for (s, row) in transition.iter().enumerate() {
            check_distribution(row, states, &format!("transition row {s}"))?;
        }
        let outputs = emission[0].first().map_or(0, Vec::len);
        if outputs == 0 {
            return Err(Error::InvalidParameter("empty output alphabet".into()));
        }
        for (s, em) in emission.iter().enumerate() {
            if em.len() != 2 {
                return Err(Error::InvalidParameter(format!(
                    "state {s} must have emissions for inputs 0 and 1"
                )));
            }
            for (x, row) in em.iter().enumerate() {
                check_distribution(row, outputs, &format!("emission ({s}, {x})"))?;
            }
        }
        let stationary = stationary_distribution(&transition)?;
        Ok(Self {
            transition,
            emission,
            stationary,
        })
    }

    /// One-state channel with emission `w[x][y]`.
    pub fn memoryless(w: [Vec<f64>; 2]) -> Result<Self> {
        Self::new(vec![vec![1.0]], vec![w.to_vec()])
    }

    pub fn bsc(p: f64) -> Result<Self> {
        Self::memoryless([vec![1.0 - p, p], vec![p, 1.0 - p]])
    }

    /// Exact embedding of a Gilbert–Elliott error process: `y = x ⊕ e`.
    pub fn gilbert_elliott(ge: &GilbertElliottNoise) -> Self {
        let p = ge.transition();
        let e = ge.error_probs();
        let emission = (0..2)
            .map(|s| {
                vec![vec![1.0 - e[s], e[s]], vec![e[s], 1.0 - e[s]]]
            })
            .collect();
        Self::new(p.iter().map(|r| r.to_vec()).collect(), emission)
            .expect("validated Gilbert–Elliott parameters")
    }

    pub fn states(&self) -> usize {
        self.transition.len()
    }

    pub fn outputs(&self) -> usize {
        self.emission[0][0].len()
    }

    pub fn transition(&self) -> &[Vec<f64>] {
        &self.transition
    }

    #[inline]
    pub fn emission(&self, s: usize, x: u8, y: usize) -> f64 {
        self.emission[s][x as usize][y]
    }

    pub fn stationary(&self) -> &[f64] {
        &self.stationary
    }

    /// Single-letter channel `W(y|x) = Σ_s π(s) E(y|x, s)`.
    pub fn marginal_channel(&self) -> [Vec<f64>; 2] {
        let mut w = [vec![0.0; self.outputs()], vec![0.0; self.outputs()]];
        for (s, &p) in self.stationary.iter().enumerate() {
            for x in 0..2 {
                for (y, v) in w[x].iter_mut().enumerate() {
                    *v += p * self.emission[s][x][y];
                }
            }
        }
        w
    }

    /// Channel given the boundary state: `W̃(y|x, s₀) = Σ_s P(s|s₀) E(y|x, s)`.
    pub fn genie_channel(&self, s0: usize) -> [Vec<f64>; 2] {
        let mut w = [vec![0.0; self.outputs()], vec![0.0; self.outputs()]];
        for (s, &p) in self.transition[s0].iter().enumerate() {
            for x in 0..2 {
                for (y, v) in w[x].iter_mut().enumerate() {
                    *v += p * self.emission[s][x][y];
                }
            }
        }
        w
    }

    /// Probability that the output differs from the input, for binary outputs.
    pub fn crossover_rate(&self) -> Option<f64> {
        (self.outputs() == 2).then(|| {
            let w = self.marginal_channel();
            0.5 * (w[0][1] + w[1][0])
        })
    }

    /// Advances a forward vector by one symbol: `α'(s) = Σ_{s'} α(s') P(s|s') E(y|x, s)`.
    pub fn forward_step(&self, alpha: &[f64], x: u8, y: usize, out: &mut [f64]) {
        out.iter_mut().for_each(|v| *v = 0.0);
        for (sp, &a) in alpha.iter().enumerate() {
            if a == 0.0 {
                continue;
            }
            for (s, &p) in self.transition[sp].iter().enumerate() {
                out[s] += a * p;
            }
        }
        for (s, v) in out.iter_mut().enumerate() {
            *v *= self.emission[s][x as usize][y];
        }
    }

    /// `P(y | x, s₀ ~ init)` by the forward algorithm; `init = None` uses the stationary law.
    pub fn sequence_likelihood(&self, x: &[u8], y: &[usize], init: Option<usize>) -> Result<f64> {
        if x.len() != y.len() {
            return Err(Error::LengthMismatch {
                expected: x.len(),
                got: y.len(),
            });
        }
        let mut alpha = self.initial(init);
        let mut next = vec![0.0; self.states()];
        for (&xi, &yi) in x.iter().zip(y) {
            self.forward_step(&alpha, xi, yi, &mut next);
            std::mem::swap(&mut alpha, &mut next);
        }
        Ok(alpha.iter().sum())
    }

    pub(crate) fn initial(&self, init: Option<usize>) -> Vec<f64> {
        match init {
            None => self.stationary.clone(),
            Some(s) => {
                let mut v = vec![0.0; self.states()];
                v[s] = 1.0;
                v
            }
        }
    }

    /// Emission of the output process under uniform inputs, `Ē(y|s) = ½ Σ_x E(y|x, s)`.
    pub fn input_averaged_emission(&self) -> Vec<Vec<f64>> {
        self.emission
            .iter()
            .map(|em| em[0].iter().zip(&em[1]).map(|(a, b)| 0.5 * (a + b)).collect())
            .collect()
    }

    fn draw(weights: &[f64], rng: &mut dyn RngCore) -> usize {
        let u: f64 = rng.random();
        let mut acc = 0.0;
        for (k, &w) in weights.iter().enumerate() {
            acc += w;
            if u < acc {
                return k;
            }
        }
        weights.iter().rposition(|&w| w > 0.0).unwrap_or(0)
    }

    pub fn draw_stationary(&self, rng: &mut dyn RngCore) -> usize {
        Self::draw(&self.stationary, rng)
    }

    /// Transmits `x` starting from boundary state `s0`; returns outputs and visited states.
    pub fn transmit_from(&self, x: &[u8], s0: usize, rng: &mut dyn RngCore) -> (Vec<usize>, Vec<usize>) {
        let mut s = s0;
        let mut ys = Vec::with_capacity(x.len());
        let mut states = Vec::with_capacity(x.len());
        for &xi in x {
            s = Self::draw(&self.transition[s], rng);
            states.push(s);
            ys.push(Self::draw(&self.emission[s][xi as usize], rng));
        }
        (ys, states)
    }

    /// Transmits `x` from a stationary boundary state; returns `(s₀, outputs)`.
    pub fn transmit_with(&self, x: &[u8], rng: &mut dyn RngCore) -> (usize, Vec<usize>) {
        let s0 = self.draw_stationary(rng);
        (s0, self.transmit_from(x, s0, rng).0)
    }

    pub fn transmit(&self, x: &[u8], seed: u64) -> Vec<usize> {
        let mut rng = stream_rng(seed, 0);
        self.transmit_with(x, &mut rng).1
    }
}

fn check_distribution(row: &[f64], len: usize, what: &str) -> Result<()> {
    if row.len() != len {
        return Err(Error::LengthMismatch {
            expected: len,
            got: row.len(),
        });
    }
    if row.iter().any(|v| !v.is_finite() || *v < 0.0) {
        return Err(Error::InvalidParameter(format!("{what} has negative entries")));
    }
    let s: f64 = row.iter().sum();
    if (s - 1.0).abs() > STOCHASTIC_TOL {
        return Err(Error::InvalidParameter(format!("{what} sums to {s}, not 1")));
    }
    Ok(())
}

/// Solves `π P = π`, `Σ π = 1` by Gaussian elimination with partial pivoting.
fn stationary_distribution(p: &[Vec<f64>]) -> Result<Vec<f64>> {
    let n = p.len();
    // Rows of (Pᵀ − I), last row replaced by the normalisation constraint.
    let mut a = vec![vec![0.0; n + 1]; n];
    for i in 0..n {
        for j in 0..n {
            a[i][j] = p[j][i] - if i == j { 1.0 } else { 0.0 };
        }
    }
    a[n - 1] = vec![1.0; n + 1];
    for col in 0..n {
        let piv = (col..n)
            .max_by(|&r1, &r2| a[r1][col].abs().total_cmp(&a[r2][col].abs()))
            .unwrap();
        if a[piv][col].abs() < 1e-14 {
            return Err(Error::Degenerate(
                "transition matrix has no unique stationary distribution".into(),
            ));
        }
        a.swap(col, piv);
        for r in 0..n {
            if r != col {
                let f = a[r][col] / a[col][col];
                if f != 0.0 {
                    for c in col..=n {
                        a[r][c] -= f * a[col][c];
                    }
                }
            }
        }
    }
    let mut pi: Vec<f64> = (0..n).map(|i| (a[i][n] / a[i][i]).max(0.0)).collect();
    let s: f64 = pi.iter().sum();
    pi.iter_mut().for_each(|v| *v /= s);
    Ok(pi)
}
