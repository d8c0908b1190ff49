//! Scalar information quantities of memory channels.
//!
//! Continuous channels are handled by quadrature in noise-centred
//! coordinates: every expectation over a true input is written as an integral
//! against the noise law, so the grid follows the density rather than the
//! output line. Each quadrature quantity has a Monte-Carlo twin used as an
//! independent cross-check. Finite-state channels are handled by exact
//! enumeration over output strings with the forward recursion.
//!
//! All mutual informations are in bits and assume uniform, independent inputs.

use std::f64::consts::LN_2;

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::channel::{FiniteStateChannel, MemoryChannel};
use crate::estimate::{EstimateWithCI, MeanAccumulator};
use crate::noise::{conditional_axis, marginal_axis, MarkovNoiseModel};
use crate::quadrature::{integrate_2d, integrate_par, Axis, QuadratureSpec};
use crate::rng::par_accumulate;
use crate::{Error, Result};

/// Increment below which the output tail series is considered converged.
pub const TAIL_INCREMENT: f64 = 1e-6;

/// Largest number of output strings enumerated for a block entropy.
pub const STRING_BUDGET: usize = 1 << 24;

#[inline]
fn ln_add(a: f64, b: f64) -> f64 {
    if a == f64::NEG_INFINITY {
        return b;
    }
    if b == f64::NEG_INFINITY {
        return a;
    }
    let m = a.max(b);
    m + ((a - m).exp() + (b - m).exp()).ln()
}

fn ln_sum(xs: &[f64]) -> f64 {
    let m = xs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if m == f64::NEG_INFINITY {
        return m;
    }
    m + xs.iter().map(|x| (x - m).exp()).sum::<f64>().ln()
}

fn quad_estimate<const K: usize>(q: &crate::quadrature::Quad<K>, k: usize) -> EstimateWithCI {
    EstimateWithCI::quadrature(q.values[k], q.residual, q.nodes, q.converged)
}

// ---------------------------------------------------------------------------
// Continuous channels: quadrature

/// `I(W)` by one-dimensional quadrature.
pub fn mi_w<N: MarkovNoiseModel>(ch: &MemoryChannel<N>, spec: &QuadratureSpec) -> EstimateWithCI {
    let noise = ch.noise();
    let d = ch.map().separation();
    let axis = marginal_axis(noise, spec, 0.0, 0.0);
    let q = integrate_par(&axis, spec, |n| {
        let lt = noise.marginal_log_pdf(n);
        let w = lt.exp();
        if w == 0.0 {
            return [0.0];
        }
        // True input 0 sees the alternative shifted by −d, input 1 by +d.
        let s0 = lt - ln_add(lt, noise.marginal_log_pdf(n - d)) + LN_2;
        let s1 = lt - ln_add(lt, noise.marginal_log_pdf(n + d)) + LN_2;
        [w * 0.5 * (s0 + s1) / LN_2]
    });
    quad_estimate(&q, 0)
}

/// Bhattacharyya parameter `Z(W) = ∫ √(W(y|0)·W(y|1)) dy`.
pub fn z_w<N: MarkovNoiseModel>(ch: &MemoryChannel<N>, spec: &QuadratureSpec) -> EstimateWithCI {
    let noise = ch.noise();
    let [a0, a1] = ch.map().levels();
    let axis = marginal_axis(noise, spec, ch.map().midpoint(), 0.5 * (a1 - a0).abs());
    let q = integrate_par(&axis, spec, |y| {
        [(0.5 * (noise.marginal_log_pdf(y - a0) + noise.marginal_log_pdf(y - a1))).exp()]
    });
    quad_estimate(&q, 0)
}

fn genie_axis<N: MarkovNoiseModel>(ch: &MemoryChannel<N>, n0: f64) -> Axis {
    let half = 0.5 * ch.map().separation().abs();
    let ax = conditional_axis(ch.noise(), n0, half);
    Axis::new(ax.center + ch.map().midpoint(), ax.scale, ax.half_width)
}

/// Conditional Bhattacharyya parameter of the genie-aided channel given the previous noise sample.
pub fn zg_conditional<N: MarkovNoiseModel>(
    ch: &MemoryChannel<N>,
    n0: f64,
    spec: &QuadratureSpec,
) -> EstimateWithCI {
    let noise = ch.noise();
    let [a0, a1] = ch.map().levels();
    let axis = genie_axis(ch, n0);
    let q = integrate_par(&axis, spec, |y| {
        let l0 = noise.conditional_log_pdf(y - a0, n0);
        let l1 = noise.conditional_log_pdf(y - a1, n0);
        [(0.5 * (l0 + l1)).exp()]
    });
    quad_estimate(&q, 0)
}

/// `Z_g(W)`: the conditional Bhattacharyya parameter averaged over the stationary previous noise.
pub fn zg_w<N: MarkovNoiseModel>(ch: &MemoryChannel<N>, spec: &QuadratureSpec) -> EstimateWithCI {
    let noise = ch.noise();
    let [a0, a1] = ch.map().levels();
    let outer = marginal_axis(noise, spec, 0.0, 0.0);
    let q = integrate_2d(
        &outer,
        |n0| genie_axis(ch, n0),
        spec,
        |n0, y| {
            let l0 = noise.conditional_log_pdf(y - a0, n0);
            let l1 = noise.conditional_log_pdf(y - a1, n0);
            [(noise.marginal_log_pdf(n0) + 0.5 * (l0 + l1)).exp()]
        },
    );
    quad_estimate(&q, 0)
}

/// Integrates `g(n0, n1)` against the joint noise law of two consecutive samples.
fn noise_pair_integral<N, G>(noise: &N, spec: &QuadratureSpec, g: G) -> crate::quadrature::Quad<2>
where
    N: MarkovNoiseModel,
    G: Fn(f64, f64) -> [f64; 2] + Sync,
{
    let outer = marginal_axis(noise, spec, 0.0, 0.0);
    integrate_2d(
        &outer,
        |n0| conditional_axis(noise, n0, 0.0),
        spec,
        |n0, n1| {
            let w = (noise.marginal_log_pdf(n0) + noise.conditional_log_pdf(n1, n0)).exp();
            if w == 0.0 {
                return [0.0, 0.0];
            }
            let v = g(n0, n1);
            [w * v[0], w * v[1]]
        },
    )
}

/// Pointwise log-ratio `log p(y0,y1) − log p(y0) − log p(y1)` in nats.
fn output_pair_score<N: MarkovNoiseModel>(noise: &N, a: [f64; 2], y0: f64, y1: f64) -> f64 {
    let mut joint = [0.0; 4];
    for x0 in 0..2 {
        let e0 = y0 - a[x0];
        let l0 = noise.marginal_log_pdf(e0);
        for x1 in 0..2 {
            joint[2 * x0 + x1] = l0 + noise.conditional_log_pdf(y1 - a[x1], e0);
        }
    }
    let lp01 = ln_sum(&joint) - 2.0 * LN_2;
    let lp0 = ln_add(noise.marginal_log_pdf(y0 - a[0]), noise.marginal_log_pdf(y0 - a[1])) - LN_2;
    let lp1 = ln_add(noise.marginal_log_pdf(y1 - a[0]), noise.marginal_log_pdf(y1 - a[1])) - LN_2;
    lp01 - lp0 - lp1
}

/// `I(Y₁; Y₀)` between consecutive outputs.
pub fn output_pair_mi<N: MarkovNoiseModel>(
    ch: &MemoryChannel<N>,
    spec: &QuadratureSpec,
) -> EstimateWithCI {
    let noise = ch.noise();
    let a = ch.map().levels();
    let q = noise_pair_integral(noise, spec, |n0, n1| {
        let mut s = 0.0;
        for x0 in 0..2 {
            for x1 in 0..2 {
                s += output_pair_score(noise, a, a[x0] + n0, a[x1] + n1);
            }
        }
        [0.25 * s / LN_2, 0.0]
    });
    quad_estimate(&q, 0)
}

/// Pointwise scores `(log p(y|u1) − log p(y), log p(y|u1,u2) − log p(y|u1))` in nats
/// for the length-2 transform `x = (u1⊕u2, u2)`.
fn single_layer_scores<N: MarkovNoiseModel>(
    noise: &N,
    a: [f64; 2],
    u: [usize; 2],
    y: [f64; 2],
) -> [f64; 2] {
    let mut lp = [0.0; 4];
    for v1 in 0..2 {
        for v2 in 0..2 {
            let e1 = y[0] - a[v1 ^ v2];
            let e2 = y[1] - a[v2];
            lp[2 * v1 + v2] = noise.marginal_log_pdf(e1) + noise.conditional_log_pdf(e2, e1);
        }
    }
    let l_u1 = ln_add(lp[2 * u[0]], lp[2 * u[0] + 1]) - LN_2;
    let l_all = ln_sum(&lp) - 2.0 * LN_2;
    [l_u1 - l_all, lp[2 * u[0] + u[1]] - l_u1]
}

/// `(I(W₂⁽¹⁾), I(W₂⁽²⁾))` for the two subchannels of one polarization step.
pub fn single_layer_mi<N: MarkovNoiseModel>(
    ch: &MemoryChannel<N>,
    spec: &QuadratureSpec,
) -> (EstimateWithCI, EstimateWithCI) {
    let noise = ch.noise();
    let a = ch.map().levels();
    let q = noise_pair_integral(noise, spec, |n1, n2| {
        let mut s = [0.0; 2];
        for u1 in 0..2 {
            for u2 in 0..2 {
                let y = [a[u1 ^ u2] + n1, a[u2] + n2];
                let v = single_layer_scores(noise, a, [u1, u2], y);
                s[0] += v[0];
                s[1] += v[1];
            }
        }
        [0.25 * s[0] / LN_2, 0.25 * s[1] / LN_2]
    });
    (quad_estimate(&q, 0), quad_estimate(&q, 1))
}

/// Both sides of the length-2 mutual-information identity.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Lemma1Terms {
    pub i_w: EstimateWithCI,
    pub i_first: EstimateWithCI,
    pub i_second: EstimateWithCI,
    pub noise_pair: EstimateWithCI,
    pub output_pair: EstimateWithCI,
}

impl Lemma1Terms {
    /// `I(W₂⁽¹⁾) + I(W₂⁽²⁾) − 2I(W)`.
    pub fn gap(&self) -> f64 {
        self.i_first.value + self.i_second.value - 2.0 * self.i_w.value
    }

    /// `I(N₁;N₀) − I(Y₁;Y₀)`.
    pub fn predicted_gap(&self) -> f64 {
        self.noise_pair.value - self.output_pair.value
    }

    /// Left side minus right side of the identity.
    pub fn residual(&self) -> f64 {
        self.gap() - self.predicted_gap()
    }

    /// Sum of the reported residuals of all five estimates.
    pub fn tolerance(&self) -> f64 {
        self.i_first.stderr
            + self.i_second.stderr
            + 2.0 * self.i_w.stderr
            + self.noise_pair.stderr
            + self.output_pair.stderr
    }

    pub fn flagged(&self) -> bool {
        [
            self.i_w,
            self.i_first,
            self.i_second,
            self.noise_pair,
            self.output_pair,
        ]
        .iter()
        .any(|e| e.flagged)
    }
}

/// Evaluates every term of the length-2 identity by independent quadratures.
pub fn lemma1_residual<N: MarkovNoiseModel>(
    ch: &MemoryChannel<N>,
    spec: &QuadratureSpec,
) -> Result<Lemma1Terms> {
    let (i_first, i_second) = single_layer_mi(ch, spec);
    Ok(Lemma1Terms {
        i_w: mi_w(ch, spec),
        i_first,
        i_second,
        noise_pair: crate::noise::noise_pair_mi(ch.noise(), spec)?,
        output_pair: output_pair_mi(ch, spec),
    })
}

// ---------------------------------------------------------------------------
// Continuous channels: Monte-Carlo twins

fn mc_mean<F>(samples: usize, seed: u64, f: F) -> Result<EstimateWithCI>
where
    F: Fn(&mut ChaCha8Rng) -> f64 + Sync,
{
    mc_means::<1, _>(samples, seed, |rng| [f(rng)]).map(|[e]| e)
}

fn mc_means<const K: usize, F>(samples: usize, seed: u64, f: F) -> Result<[EstimateWithCI; K]>
where
    F: Fn(&mut ChaCha8Rng) -> [f64; K] + Sync,
{
    if samples < crate::trellis::MIN_SAMPLES {
        return Err(Error::TooFewSamples {
            got: samples,
            min: crate::trellis::MIN_SAMPLES,
        });
    }
    let acc = par_accumulate(
        samples,
        seed,
        || [MeanAccumulator::new(); K],
        |acc, rng, _| {
            for (a, v) in acc.iter_mut().zip(f(rng)) {
                a.push(v);
            }
        },
        |a, b| {
            for (x, y) in a.iter_mut().zip(&b) {
                x.merge(y);
            }
        },
    );
    Ok(acc.map(|a| EstimateWithCI::monte_carlo(&a)))
}

fn bit(rng: &mut ChaCha8Rng) -> usize {
    rng.random::<bool>() as usize
}

/// Monte-Carlo estimate of `I(W)`.
pub fn mi_w_mc<N: MarkovNoiseModel>(
    ch: &MemoryChannel<N>,
    samples: usize,
    seed: u64,
) -> Result<EstimateWithCI> {
    let noise = ch.noise();
    let a = ch.map().levels();
    mc_mean(samples, seed, |rng| {
        let x = bit(rng);
        let y = a[x] + noise.sample_marginal(rng);
        let lt = noise.marginal_log_pdf(y - a[x]);
        let la = noise.marginal_log_pdf(y - a[1 - x]);
        (lt - ln_add(lt, la) + LN_2) / LN_2
    })
}

/// Monte-Carlo estimate of `Z(W)` as the mean square-root likelihood ratio.
pub fn z_w_mc<N: MarkovNoiseModel>(
    ch: &MemoryChannel<N>,
    samples: usize,
    seed: u64,
) -> Result<EstimateWithCI> {
    let noise = ch.noise();
    let a = ch.map().levels();
    mc_mean(samples, seed, |rng| {
        let x = bit(rng);
        let y = a[x] + noise.sample_marginal(rng);
        (0.5 * (noise.marginal_log_pdf(y - a[1 - x]) - noise.marginal_log_pdf(y - a[x]))).exp()
    })
}

/// Monte-Carlo estimate of `Z_g(W)`.
pub fn zg_w_mc<N: MarkovNoiseModel>(
    ch: &MemoryChannel<N>,
    samples: usize,
    seed: u64,
) -> Result<EstimateWithCI> {
    let noise = ch.noise();
    let a = ch.map().levels();
    mc_mean(samples, seed, |rng| {
        let n0 = noise.sample_marginal(rng);
        let x = bit(rng);
        let y = a[x] + noise.sample_conditional(n0, rng);
        let lt = noise.conditional_log_pdf(y - a[x], n0);
        let la = noise.conditional_log_pdf(y - a[1 - x], n0);
        (0.5 * (la - lt)).exp()
    })
}

/// Monte-Carlo estimate of `I(Y₁; Y₀)`.
pub fn output_pair_mi_mc<N: MarkovNoiseModel>(
    ch: &MemoryChannel<N>,
    samples: usize,
    seed: u64,
) -> Result<EstimateWithCI> {
    let noise = ch.noise();
    let a = ch.map().levels();
    mc_mean(samples, seed, |rng| {
        let n0 = noise.sample_marginal(rng);
        let n1 = noise.sample_conditional(n0, rng);
        let (x0, x1) = (bit(rng), bit(rng));
        output_pair_score(noise, a, a[x0] + n0, a[x1] + n1) / LN_2
    })
}

/// Monte-Carlo estimates of `(I(W₂⁽¹⁾), I(W₂⁽²⁾))`.
pub fn single_layer_mi_mc<N: MarkovNoiseModel>(
    ch: &MemoryChannel<N>,
    samples: usize,
    seed: u64,
) -> Result<(EstimateWithCI, EstimateWithCI)> {
    let noise = ch.noise();
    let a = ch.map().levels();
    let [e1, e2] = mc_means(samples, seed, |rng| {
        let n1 = noise.sample_marginal(rng);
        let n2 = noise.sample_conditional(n1, rng);
        let (u1, u2) = (bit(rng), bit(rng));
        let y = [a[u1 ^ u2] + n1, a[u2] + n2];
        single_layer_scores(noise, a, [u1, u2], y).map(|v| v / LN_2)
    })?;
    Ok((e1, e2))
}

// ---------------------------------------------------------------------------
// Finite-state channels: exact enumeration

fn binary_input_mi(w: &[Vec<f64>; 2]) -> f64 {
    let mut total = 0.0;
    for x in 0..2 {
        for (y, &p) in w[x].iter().enumerate() {
            if p > 0.0 {
                let avg = 0.5 * (w[0][y] + w[1][y]);
                total += 0.5 * p * (p / avg).log2();
            }
        }
    }
    total
}

fn bhattacharyya(w: &[Vec<f64>; 2]) -> f64 {
    w[0].iter().zip(&w[1]).map(|(a, b)| (a * b).sqrt()).sum()
}

/// Exact `I(W)` of the state-averaged channel.
pub fn fsc_mi_w(fsc: &FiniteStateChannel) -> EstimateWithCI {
    EstimateWithCI::enumeration(binary_input_mi(&fsc.marginal_channel()), fsc.outputs())
}

/// Exact `Z(W)` of the state-averaged channel.
pub fn fsc_z_w(fsc: &FiniteStateChannel) -> EstimateWithCI {
    EstimateWithCI::enumeration(bhattacharyya(&fsc.marginal_channel()), fsc.outputs())
}

/// Exact genie-aided Bhattacharyya parameters of a finite-state channel.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FscGenieZ {
    /// Conditional value per boundary state.
    pub conditional: Vec<f64>,
    /// Stationary average of `conditional`.
    pub mean: f64,
}

/// `Z_g` with the previous state revealed, per state and averaged.
pub fn fsc_zg(fsc: &FiniteStateChannel) -> FscGenieZ {
    let conditional: Vec<f64> = (0..fsc.states())
        .map(|s| bhattacharyya(&fsc.genie_channel(s)))
        .collect();
    let mean = conditional
        .iter()
        .zip(fsc.stationary())
        .map(|(z, p)| z * p)
        .sum();
    FscGenieZ { conditional, mean }
}

fn mi_from_joint(joint: &[Vec<f64>]) -> f64 {
    let rows: Vec<f64> = joint.iter().map(|r| r.iter().sum()).collect();
    let cols: Vec<f64> = (0..joint[0].len())
        .map(|j| joint.iter().map(|r| r[j]).sum())
        .collect();
    let mut total = 0.0;
    for (i, r) in joint.iter().enumerate() {
        for (j, &p) in r.iter().enumerate() {
            if p > 0.0 {
                total += p * (p / (rows[i] * cols[j])).log2();
            }
        }
    }
    total.max(0.0)
}

/// Exact `I(Y₁; Y₀)` between consecutive outputs of a stationary finite-state channel.
pub fn fsc_output_pair_mi(fsc: &FiniteStateChannel) -> EstimateWithCI {
    let em = fsc.input_averaged_emission();
    let (s, o) = (fsc.states(), fsc.outputs());
    let mut joint = vec![vec![0.0; o]; o];
    for s0 in 0..s {
        let p0 = fsc.stationary()[s0];
        for s1 in 0..s {
            let p = p0 * fsc.transition()[s0][s1];
            for y0 in 0..o {
                for y1 in 0..o {
                    joint[y0][y1] += p * em[s0][y0] * em[s1][y1];
                }
            }
        }
    }
    EstimateWithCI::enumeration(mi_from_joint(&joint), s * s * o * o)
}

/// Exact `(I(W₂⁽¹⁾), I(W₂⁽²⁾))` by summing over both outputs and all state pairs.
pub fn fsc_single_layer_mi(fsc: &FiniteStateChannel) -> (EstimateWithCI, EstimateWithCI) {
    let (s, o) = (fsc.states(), fsc.outputs());
    let pi = fsc.stationary();
    let p = fsc.transition();
    let mut i1 = 0.0;
    let mut i2 = 0.0;
    for y1 in 0..o {
        for y2 in 0..o {
            // like[u1][u2] = p(y1, y2 | u1, u2)
            let mut like = [[0.0; 2]; 2];
            for (u1, row) in like.iter_mut().enumerate() {
                for (u2, v) in row.iter_mut().enumerate() {
                    let x1 = (u1 ^ u2) as u8;
                    let x2 = u2 as u8;
                    let mut acc = 0.0;
                    for s1 in 0..s {
                        let e1 = pi[s1] * fsc.emission(s1, x1, y1);
                        if e1 == 0.0 {
                            continue;
                        }
                        for s2 in 0..s {
                            acc += e1 * p[s1][s2] * fsc.emission(s2, x2, y2);
                        }
                    }
                    *v = acc;
                }
            }
            let all = 0.25 * (like[0][0] + like[0][1] + like[1][0] + like[1][1]);
            for u1 in 0..2 {
                let half = 0.5 * (like[u1][0] + like[u1][1]);
                for u2 in 0..2 {
                    let l = like[u1][u2];
                    if l > 0.0 {
                        i1 += 0.25 * l * (half / all).log2();
                        i2 += 0.25 * l * (l / half).log2();
                    }
                }
            }
        }
    }
    let terms = o * o * s * s * 4;
    (
        EstimateWithCI::enumeration(i1, terms),
        EstimateWithCI::enumeration(i2, terms),
    )
}

fn check_strings(outputs: usize, len: usize) -> Result<()> {
    let count = (outputs as f64).powi(len as i32);
    if count > STRING_BUDGET as f64 {
        return Err(Error::TooLarge(format!(
            "{outputs}^{len} output strings exceed the budget of {STRING_BUDGET}"
        )));
    }
    Ok(())
}

/// Visits every output string of length `len` with its stationary probability.
fn for_each_string<F: FnMut(&[usize], f64)>(fsc: &FiniteStateChannel, len: usize, mut visit: F) {
    let em = fsc.input_averaged_emission();
    let (s, o) = (fsc.states(), fsc.outputs());
    let p = fsc.transition();
    // alpha[t] is the forward vector after t symbols; the first symbol uses the stationary state.
    let mut alpha = vec![vec![0.0; s]; len + 1];
    alpha[0] = fsc.stationary().to_vec();
    let mut ys = vec![0usize; len];
    let mut t = 0usize;
    if len == 0 {
        visit(&ys, 1.0);
        return;
    }
    // Iterative DFS: ys[t] is the symbol currently tried at depth t.
    loop {
        // Fill alpha[t + 1] for symbol ys[t].
        let (prev, next) = alpha.split_at_mut(t + 1);
        let a = &prev[t];
        let out = &mut next[0];
        for (j, v) in out.iter_mut().enumerate() {
            let mut acc = 0.0;
            if t == 0 {
                acc = a[j];
            } else {
                for i in 0..s {
                    acc += a[i] * p[i][j];
                }
            }
            *v = acc * em[j][ys[t]];
        }
        if t + 1 == len {
            visit(&ys, alpha[len].iter().sum());
            // Advance to the next string.
            loop {
                ys[t] += 1;
                if ys[t] < o {
                    break;
                }
                ys[t] = 0;
                if t == 0 {
                    return;
                }
                t -= 1;
            }
        } else {
            t += 1;
            ys[t] = 0;
        }
    }
}

/// Entropy in bits of `len` consecutive stationary outputs.
fn block_entropy(fsc: &FiniteStateChannel, len: usize) -> f64 {
    let mut h = 0.0;
    for_each_string(fsc, len, |_, p| {
        if p > 0.0 {
            h -= p * p.log2();
        }
    });
    h
}

/// `I(Y₀; Y₁ⁱ)` for `i = 1..=i_max`, with a data-processing bound.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TailMi {
    /// `values[i-1] = I(Y₀; Y₁ⁱ)`.
    pub values: Vec<f64>,
    /// `I(Y₀; S₁)`: the past output reaches the future only through the state.
    pub bound: f64,
}

impl TailMi {
    /// `I(Y₀; Yᵢ | Y₁ⁱ⁻¹)` for `i = 1..=i_max`.
    pub fn increments(&self) -> Vec<f64> {
        let mut prev = 0.0;
        self.values
            .iter()
            .map(|&v| {
                let d = v - prev;
                prev = v;
                d
            })
            .collect()
    }
}

/// Largest horizon accepted by [`truncated_tail_mi`].
pub const MAX_TAIL: usize = 22;

/// Exact `I(Y₀; Y₁ⁱ) = H₁ + Hᵢ − Hᵢ₊₁` from stationary block entropies.
pub fn truncated_tail_mi(fsc: &FiniteStateChannel, i_max: usize) -> Result<TailMi> {
    if i_max == 0 || i_max > MAX_TAIL {
        return Err(Error::InvalidParameter(format!(
            "tail horizon must lie in 1..={MAX_TAIL}, got {i_max}"
        )));
    }
    check_strings(fsc.outputs(), i_max + 1)?;
    let h: Vec<f64> = (0..=i_max + 1).map(|k| block_entropy(fsc, k)).collect();
    let values = (1..=i_max)
        .map(|i| (h[1] + h[i] - h[i + 1]).max(0.0))
        .collect();
    Ok(TailMi {
        values,
        bound: output_state_mi(fsc),
    })
}

/// `I(Y₀; S₁)` under the stationary law.
fn output_state_mi(fsc: &FiniteStateChannel) -> f64 {
    let em = fsc.input_averaged_emission();
    let (s, o) = (fsc.states(), fsc.outputs());
    let mut joint = vec![vec![0.0; s]; o];
    for s0 in 0..s {
        let p0 = fsc.stationary()[s0];
        for y0 in 0..o {
            for s1 in 0..s {
                joint[y0][s1] += p0 * em[s0][y0] * fsc.transition()[s0][s1];
            }
        }
    }
    mi_from_joint(&joint)
}

/// Both sides of the block identity relating adjacent-block mutual informations
/// to the output tail series, for `L = 2^l`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BlockIdentity {
    /// `Σ_{i=1}^{l} 2^{i−1}·I(Y₁^m; Y_{m+1}^{2m})` with `m = 2^{l−i}`.
    pub lhs: f64,
    /// `Σ_{i=1}^{L−1} I(Y₀; Y₁ⁱ)`.
    pub rhs: f64,
}

/// Mutual information between two adjacent stationary output blocks of length `m`,
/// from the joint law of all `2m`-strings.
fn adjacent_block_mi(fsc: &FiniteStateChannel, m: usize) -> f64 {
    let o = fsc.outputs();
    let n = o.pow(m as u32);
    let mut joint = vec![vec![0.0; n]; n];
    for_each_string(fsc, 2 * m, |ys, p| {
        let a = ys[..m].iter().fold(0, |acc, &y| acc * o + y);
        let b = ys[m..].iter().fold(0, |acc, &y| acc * o + y);
        joint[a][b] += p;
    });
    mi_from_joint(&joint)
}

pub fn block_mi_identity(fsc: &FiniteStateChannel, l: u32) -> Result<BlockIdentity> {
    if l == 0 {
        return Err(Error::InvalidParameter("layer count must be at least 1".into()));
    }
    let len = 1usize << l;
    check_strings(fsc.outputs(), len)?;
    let lhs = (1..=l)
        .map(|i| {
            let m = 1usize << (l - i);
            (1u64 << (i - 1)) as f64 * adjacent_block_mi(fsc, m)
        })
        .sum();
    let h: Vec<f64> = (0..=len).map(|k| block_entropy(fsc, k)).collect();
    let rhs = (1..len).map(|i| h[1] + h[i] - h[i + 1]).sum();
    Ok(BlockIdentity { lhs, rhs })
}

/// Components of `I†(W) = I(N₁;N₀) − ½·I(Y₁;Y₀) − I(Y₀;Y₁^∞)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct IDagger {
    pub value: EstimateWithCI,
    pub noise_pair: EstimateWithCI,
    pub output_pair: EstimateWithCI,
    /// Truncated tail sum; `stderr` carries the last increment as a one-sided uncertainty.
    pub tail: EstimateWithCI,
    pub tail_terms: usize,
}

/// `I†(W)` for a finite-state channel given the noise-pair mutual information.
///
/// The tail `I(Y₀; Y₁ⁱ)` is extended until its increment drops below
/// [`TAIL_INCREMENT`] or the enumeration budget is reached, in which case the
/// estimate is flagged.
pub fn i_dagger(fsc: &FiniteStateChannel, noise_pair: EstimateWithCI) -> Result<IDagger> {
    let output_pair = fsc_output_pair_mi(fsc);
    let o = fsc.outputs() as f64;
    let horizon = (1..=MAX_TAIL)
        .take_while(|&i| o.powi(i as i32 + 1) <= STRING_BUDGET as f64)
        .last()
        .unwrap_or(1);
    let mut h = vec![0.0, block_entropy(fsc, 1)];
    let mut tail = 0.0;
    let mut last_inc = f64::INFINITY;
    let mut terms = 0;
    let mut converged = false;
    for i in 1..=horizon {
        h.push(block_entropy(fsc, i + 1));
        let v = (h[1] + h[i] - h[i + 1]).max(0.0);
        last_inc = v - tail;
        tail = v;
        terms = i;
        if last_inc.abs() < TAIL_INCREMENT {
            converged = true;
            break;
        }
    }
    let tail_est = EstimateWithCI::enumeration(tail, terms).with_flag(!converged);
    let tail_est = EstimateWithCI {
        stderr: last_inc.abs(),
        ..tail_est
    };
    let value = noise_pair.value - 0.5 * output_pair.value - tail;
    let value = EstimateWithCI {
        value,
        stderr: noise_pair.stderr + tail_est.stderr,
        method: noise_pair.method,
        samples: noise_pair.samples + terms,
        flagged: noise_pair.flagged || !converged,
    };
    Ok(IDagger {
        value,
        noise_pair,
        output_pair,
        tail: tail_est,
        tail_terms: terms,
    })
}

// ---------------------------------------------------------------------------
// I/Z consistency

/// `I ≥ log₂(2/(1+Z))` and `I² + Z² ≤ 1`.
pub fn i_z_bounds_check(i: f64, z: f64) -> bool {
    i_z_bounds_check_tol(i, z, 0.0)
}

/// [`i_z_bounds_check`] with both inequalities relaxed by `tol`.
pub fn i_z_bounds_check_tol(i: f64, z: f64, tol: f64) -> bool {
    i + tol >= (2.0 / (1.0 + z)).log2() && i * i + z * z <= 1.0 + tol
}
