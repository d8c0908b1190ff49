//! Polarized subchannels over finite-state channels.
//!
//! A subchannel metric for a contiguous block of outputs is a pair of
//! `S × S` matrices indexed by the hidden state before the block and the
//! state at its end, one per hypothesis of the bit being decided. Adjacent
//! blocks combine by matrix products:
//!
//! * first bit of a pair: `T_c = Σ_d A_{c⊕d}·B_d`;
//! * second bit, given the first decision `ĉ`: `T_d = A_{ĉ⊕d}·B_d`,
//!
//! where `A` belongs to the earlier block. At the root the boundary states are
//! marginalised with a prior on the state before the block: the stationary law
//! for the real channel or a point mass for the genie-aided one.

use std::f64::consts::LN_2;

use serde::{Deserialize, Serialize};

use crate::channel::FiniteStateChannel;
use crate::estimate::{EstimateWithCI, MeanAccumulator};
use crate::polar::{encode_in_place, log2_len, FrozenSet, PolarTransform};
use crate::rng::par_accumulate;
use crate::{Error, Result};

/// Minimum number of samples accepted by Monte-Carlo estimators.
pub const MIN_SAMPLES: usize = 100;

/// Successive-cancellation engine over boundary-state tables.
pub struct TrellisDecoder<'a> {
    fsc: &'a FiniteStateChannel,
    len: usize,
    layers: u32,
    states: usize,
    /// `leaf[y][b]`: `P(s|s')·E(y|b, s)` as a row-major `S × S` matrix.
    leaf: Vec<[Vec<f64>; 2]>,
    /// Level `λ` holds, per node, the two tables of the node's current message.
    tables: Vec<Vec<f64>>,
    /// Level `λ` holds, per node, the decision on the node's last even message.
    partner: Vec<Vec<u8>>,
    scratch: Vec<f64>,
}

impl<'a> TrellisDecoder<'a> {
    pub fn new(fsc: &'a FiniteStateChannel, len: usize) -> Result<Self> {
        let layers = log2_len(len)?;
        let s = fsc.states();
        let leaf = (0..fsc.outputs())
            .map(|y| {
                let mk = |b: u8| {
                    let mut m = vec![0.0; s * s];
                    for sp in 0..s {
                        for sn in 0..s {
                            m[sp * s + sn] = fsc.transition()[sp][sn] * fsc.emission(sn, b, y);
                        }
                    }
                    m
                };
                [mk(0), mk(1)]
            })
            .collect();
        let tables = (0..=layers)
            .map(|lv| vec![0.0; (len >> lv) * 2 * s * s])
            .collect();
        let partner = (0..=layers).map(|lv| vec![0u8; len >> lv]).collect();
        Ok(Self {
            fsc,
            len,
            layers,
            states: s,
            leaf,
            tables,
            partner,
            scratch: vec![0.0; s * s],
        })
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Runs SC over `y`. For each index `j` in order, `choose(j, T₀, T₁)` receives
    /// the root tables and returns the bit to commit. Returns the committed bits.
    pub fn run<F>(&mut self, y: &[usize], mut choose: F) -> Result<Vec<u8>>
    where
        F: FnMut(usize, &[f64], &[f64]) -> u8,
    {
        if y.len() != self.len {
            return Err(Error::LengthMismatch {
                expected: self.len,
                got: y.len(),
            });
        }
        if let Some(&bad) = y.iter().find(|&&v| v >= self.fsc.outputs()) {
            return Err(Error::InvalidParameter(format!("output symbol {bad} out of range")));
        }
        let ss = self.states * self.states;
        for (t, &yt) in y.iter().enumerate() {
            let base = t * 2 * ss;
            self.tables[0][base..base + ss].copy_from_slice(&self.leaf[yt][0]);
            self.tables[0][base + ss..base + 2 * ss].copy_from_slice(&self.leaf[yt][1]);
        }
        let mut u = vec![0u8; self.len];
        let top = self.layers as usize;
        for (j, uj) in u.iter_mut().enumerate() {
            self.compute(top, j);
            let root = &self.tables[top];
            let b = choose(j, &root[..ss], &root[ss..2 * ss]);
            *uj = b;
            self.decide(top, j, &[b]);
        }
        Ok(u)
    }

    fn compute(&mut self, level: usize, m: usize) {
        if level == 0 {
            return;
        }
        let even = m.is_multiple_of(2);
        if even {
            self.compute(level - 1, m >> 1);
        }
        let s = self.states;
        let ss = s * s;
        let (lower, upper) = self.tables.split_at_mut(level);
        let child = &lower[level - 1];
        let node_tables = &mut upper[0];
        let partner = &self.partner[level];
        let scratch = &mut self.scratch;
        for p in 0..(self.len >> level) {
            let a = &child[(2 * p) * 2 * ss..(2 * p + 1) * 2 * ss];
            let b = &child[(2 * p + 1) * 2 * ss..(2 * p + 2) * 2 * ss];
            let (a0, a1) = a.split_at(ss);
            let (b0, b1) = b.split_at(ss);
            let out = &mut node_tables[p * 2 * ss..(p + 1) * 2 * ss];
            let (t0, t1) = out.split_at_mut(ss);
            if even {
                matmul(a0, b0, t0, s);
                matmul(a1, b1, scratch, s);
                add_into(t0, scratch);
                matmul(a1, b0, t1, s);
                matmul(a0, b1, scratch, s);
                add_into(t1, scratch);
            } else if partner[p] == 0 {
                matmul(a0, b0, t0, s);
                matmul(a1, b1, t1, s);
            } else {
                matmul(a1, b0, t0, s);
                matmul(a0, b1, t1, s);
            }
            let max = out.iter().fold(0.0f64, |m, &v| m.max(v));
            if max > 0.0 && max.is_finite() {
                let inv = 1.0 / max;
                out.iter_mut().for_each(|v| *v *= inv);
            }
        }
    }

    fn decide(&mut self, level: usize, m: usize, values: &[u8]) {
        if m.is_multiple_of(2) {
            self.partner[level].copy_from_slice(values);
            return;
        }
        if level == 0 {
            return;
        }
        let mut child = vec![0u8; values.len() * 2];
        for (p, &d) in values.iter().enumerate() {
            child[2 * p] = self.partner[level][p] ^ d;
            child[2 * p + 1] = d;
        }
        self.decide(level - 1, m >> 1, &child);
    }
}

fn matmul(a: &[f64], b: &[f64], out: &mut [f64], s: usize) {
    if s == 2 {
        out[0] = a[0] * b[0] + a[1] * b[2];
        out[1] = a[0] * b[1] + a[1] * b[3];
        out[2] = a[2] * b[0] + a[3] * b[2];
        out[3] = a[2] * b[1] + a[3] * b[3];
        return;
    }
    out.iter_mut().for_each(|v| *v = 0.0);
    for i in 0..s {
        for k in 0..s {
            let aik = a[i * s + k];
            if aik == 0.0 {
                continue;
            }
            let row = &b[k * s..(k + 1) * s];
            let o = &mut out[i * s..(i + 1) * s];
            for (ov, &bv) in o.iter_mut().zip(row) {
                *ov += aik * bv;
            }
        }
    }
}

fn add_into(a: &mut [f64], b: &[f64]) {
    for (x, y) in a.iter_mut().zip(b) {
        *x += y;
    }
}

/// `Σ_{s₀, s_L} μ(s₀)·T[s₀][s_L]`.
pub fn reduce_table(table: &[f64], prior: &[f64]) -> f64 {
    let s = prior.len();
    prior
        .iter()
        .enumerate()
        .filter(|(_, &p)| p != 0.0)
        .map(|(i, &p)| p * table[i * s..(i + 1) * s].iter().sum::<f64>())
        .sum()
}

/// Relative margin below which two hypotheses count as tied; ties decide 0.
pub const TIE: f64 = 1e-9;

/// State-aware SC decoding with a stationary boundary prior; frozen bits are zero.
pub fn sc_trellis_decode(fsc: &FiniteStateChannel, y: &[usize], frozen: &FrozenSet) -> Result<Vec<u8>> {
    let mut dec = TrellisDecoder::new(fsc, y.len())?;
    if frozen.len() != y.len() {
        return Err(Error::LengthMismatch {
            expected: y.len(),
            got: frozen.len(),
        });
    }
    let mask = frozen.mask();
    let prior = fsc.stationary().to_vec();
    dec.run(y, |j, t0, t1| {
        if mask[j] {
            0
        } else {
            u8::from(reduce_table(t1, &prior) > reduce_table(t0, &prior) * (1.0 + TIE))
        }
    })
}

/// Memoryless SC on log-likelihood ratios `ln W(y|0)/W(y|1)` with exact check-node updates.
///
/// `choose(j, llr)` returns the bit committed at index `j`.
pub fn memoryless_sc<F>(llr: &[f64], choose: &mut F) -> Result<Vec<u8>>
where
    F: FnMut(usize, f64) -> u8,
{
    let layers = log2_len(llr.len())?;
    // Work in F^{⊗l} order: position j of the tree sees channel output bitrev(j).
    let permuted: Vec<f64> = (0..llr.len())
        .map(|j| llr[crate::polar::bit_reverse(j, layers)])
        .collect();
    let mut u = vec![0u8; llr.len()];
    sc_tree(&permuted, 0, &mut u, choose);
    Ok(u)
}

/// Decodes `u[offset..offset + llr.len()]` and returns the sub-codeword `u·F^{⊗k}`.
fn sc_tree<F>(llr: &[f64], offset: usize, u: &mut [u8], choose: &mut F) -> Vec<u8>
where
    F: FnMut(usize, f64) -> u8,
{
    if llr.len() == 1 {
        let b = choose(offset, llr[0]);
        u[offset] = b;
        return vec![b];
    }
    let half = llr.len() / 2;
    let (la, lb) = llr.split_at(half);
    let left: Vec<f64> = la.iter().zip(lb).map(|(&a, &b)| boxplus(a, b)).collect();
    let ca = sc_tree(&left, offset, u, choose);
    let right: Vec<f64> = la
        .iter()
        .zip(lb)
        .zip(&ca)
        .map(|((&a, &b), &c)| if c == 0 { b + a } else { b - a })
        .collect();
    let cb = sc_tree(&right, offset + half, u, choose);
    ca.iter().zip(&cb).map(|(a, b)| a ^ b).chain(cb.iter().copied()).collect()
}

/// `2·atanh(tanh(a/2)·tanh(b/2))`, evaluated stably for large magnitudes.
pub fn boxplus(a: f64, b: f64) -> f64 {
    let sign = a.signum() * b.signum();
    let (x, y) = (a.abs(), b.abs());
    let m = x.min(y);
    sign * (m + (-(x + y)).exp().ln_1p() - (-(x - y).abs()).exp().ln_1p())
}

/// SC decoding with a memoryless decoder fed marginal single-letter likelihoods.
pub fn memoryless_sc_decode(fsc: &FiniteStateChannel, y: &[usize], frozen: &FrozenSet) -> Result<Vec<u8>> {
    let w = fsc.marginal_channel();
    let llr: Vec<f64> = y.iter().map(|&v| (w[0][v] / w[1][v]).ln()).collect();
    let mask = frozen.mask();
    memoryless_sc(&llr, &mut |j, l| if mask[j] { 0 } else { u8::from(l < -TIE) })
}

// ---------------------------------------------------------------------------
// Exact enumeration

/// Exact metrics of one polarized subchannel.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SplitExact {
    /// 1-based subchannel index.
    pub index: usize,
    pub z: f64,
    pub i: f64,
    /// `Σ_s π(s)·zg_cond[s]`.
    pub zg: f64,
    /// Bhattacharyya parameter given the boundary state before the block.
    pub zg_cond: Vec<f64>,
}

/// Upper bound on enumerated terms (output strings × input vectors × states).
pub const ENUMERATION_BUDGET: usize = 1 << 26;

/// All `L` subchannels by summing over every output string, input vector and boundary state.
pub fn split_channel_exact(fsc: &FiniteStateChannel, len: usize) -> Result<Vec<SplitExact>> {
    log2_len(len)?;
    let s = fsc.states();
    let o = fsc.outputs();
    let strings = o
        .checked_pow(len as u32)
        .filter(|n| n.saturating_mul(s << len) <= ENUMERATION_BUDGET)
        .ok_or_else(|| {
            Error::TooLarge(format!("{o}^{len} outputs × 2^{len} inputs × {s} states"))
        })?;
    let nu = 1usize << len;
    // u₁ is the most significant bit so that fixing a prefix selects a contiguous range.
    let x_of_u: Vec<usize> = (0..nu)
        .map(|ui| {
            let mut u: Vec<u8> = (0..len).map(|j| ((ui >> (len - 1 - j)) & 1) as u8).collect();
            encode_in_place(&mut u);
            u.iter().enumerate().fold(0usize, |acc, (t, &b)| acc | ((b as usize) << t))
        })
        .collect();
    let pi = fsc.stationary();
    let scale = 0.5f64.powi(len as i32 - 1);

    struct Acc {
        z: Vec<f64>,
        i: Vec<f64>,
        zc: Vec<Vec<f64>>,
    }
    let init = || Acc {
        z: vec![0.0; len],
        i: vec![0.0; len],
        zc: vec![vec![0.0; s]; len],
    };
    use rayon::prelude::*;
    let parts: Vec<Acc> = (0..strings)
        .into_par_iter()
        .fold_chunks(64, init, |mut acc, yi| {
            let y: Vec<usize> = (0..len).map(|t| (yi / o.pow(t as u32)) % o).collect();
            // cum[s0][k] = Σ_{u < k} P(y | x(u), s0), prefix sums in u order.
            let mut cum = vec![vec![0.0; nu + 1]; s];
            for (s0, c) in cum.iter_mut().enumerate() {
                let px = all_input_likelihoods(fsc, &y, s0);
                for ui in 0..nu {
                    c[ui + 1] = c[ui] + px[x_of_u[ui]];
                }
            }
            let mut ws = vec![[0.0f64; 2]; s];
            for i in 0..len {
                let tail = len - i - 1;
                for prefix in 0..(1usize << i) {
                    for (s0, w) in ws.iter_mut().enumerate() {
                        for b in 0..2 {
                            let start = (prefix << (tail + 1)) | (b << tail);
                            w[b] = scale * (cum[s0][start + (1 << tail)] - cum[s0][start]);
                        }
                    }
                    let mut wp = [0.0; 2];
                    for (s0, w) in ws.iter().enumerate() {
                        wp[0] += pi[s0] * w[0];
                        wp[1] += pi[s0] * w[1];
                        acc.zc[i][s0] += (w[0] * w[1]).sqrt();
                    }
                    acc.z[i] += (wp[0] * wp[1]).sqrt();
                    let avg = 0.5 * (wp[0] + wp[1]);
                    for &w in &wp {
                        if w > 0.0 {
                            acc.i[i] += 0.5 * w * (w / avg).log2();
                        }
                    }
                }
            }
            acc
        })
        .collect();
    let mut tot = init();
    for p in parts {
        for i in 0..len {
            tot.z[i] += p.z[i];
            tot.i[i] += p.i[i];
            for s0 in 0..s {
                tot.zc[i][s0] += p.zc[i][s0];
            }
        }
    }
    Ok((0..len)
        .map(|i| SplitExact {
            index: i + 1,
            z: tot.z[i].min(1.0),
            i: tot.i[i].clamp(0.0, 1.0),
            zg: pi.iter().zip(&tot.zc[i]).map(|(p, z)| p * z).sum::<f64>().min(1.0),
            zg_cond: tot.zc[i].clone(),
        })
        .collect())
}

/// `P(y | x, s₀)` for every input word `x` (bit `t` of the index is `x_t`).
fn all_input_likelihoods(fsc: &FiniteStateChannel, y: &[usize], s0: usize) -> Vec<f64> {
    let len = y.len();
    let mut out = vec![0.0; 1 << len];
    let alpha = fsc.initial(Some(s0));
    fn walk(
        fsc: &FiniteStateChannel,
        y: &[usize],
        t: usize,
        x: usize,
        alpha: &[f64],
        out: &mut [f64],
    ) {
        if t == y.len() {
            out[x] = alpha.iter().sum();
            return;
        }
        let mut next = vec![0.0; alpha.len()];
        for b in 0..2u8 {
            fsc.forward_step(alpha, b, y[t], &mut next);
            walk(fsc, y, t + 1, x | ((b as usize) << t), &next, out);
        }
    }
    walk(fsc, y, 0, 0, &alpha, &mut out);
    out
}

// ---------------------------------------------------------------------------
// Reports

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PolarIndexRow {
    /// 1-based subchannel index.
    pub index: usize,
    pub z: EstimateWithCI,
    pub i: EstimateWithCI,
}

/// Per-index Bhattacharyya and mutual-information estimates for one block length.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PolarIndexReport {
    pub len: usize,
    pub rows: Vec<PolarIndexRow>,
}

impl PolarIndexReport {
    pub fn from_exact(len: usize, exact: &[SplitExact]) -> Self {
        Self {
            len,
            rows: exact
                .iter()
                .map(|e| PolarIndexRow {
                    index: e.index,
                    z: EstimateWithCI::enumeration(e.z, 1),
                    i: EstimateWithCI::enumeration(e.i, 1),
                })
                .collect(),
        }
    }

    /// Average of the per-index mutual-information estimates.
    pub fn mean_i(&self) -> f64 {
        self.rows.iter().map(|r| r.i.value).sum::<f64>() / self.rows.len() as f64
    }

    /// Fraction of rows satisfying `pred` on the point estimates.
    pub fn fraction<P: Fn(&PolarIndexRow) -> bool>(&self, pred: P) -> f64 {
        self.rows.iter().filter(|r| pred(r)).count() as f64 / self.rows.len() as f64
    }

    pub fn z_values(&self) -> Vec<f64> {
        self.rows.iter().map(|r| r.z.value).collect()
    }
}

// ---------------------------------------------------------------------------
// Monte-Carlo density evolution

/// Sample accumulators for one subchannel.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct McSplitRow {
    pub index: usize,
    pub z: MeanAccumulator,
    pub i: MeanAccumulator,
    /// Genie-aided Bhattacharyya estimate with the true boundary state revealed.
    pub zg: MeanAccumulator,
    /// The same split by the realised boundary state.
    pub zg_cond: Vec<MeanAccumulator>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct McSplit {
    pub len: usize,
    pub samples: usize,
    pub rows: Vec<McSplitRow>,
    /// Per-sample average of the mutual-information scores over all indices.
    pub block_mean_i: MeanAccumulator,
}

impl McSplit {
    /// `(1/L)·Σᵢ I(W_L^{(i)})` with a standard error that accounts for the
    /// correlation between indices sharing a sample.
    pub fn mean_i(&self) -> EstimateWithCI {
        EstimateWithCI::monte_carlo(&self.block_mean_i)
    }

    pub fn report(&self) -> PolarIndexReport {
        PolarIndexReport {
            len: self.len,
            rows: self
                .rows
                .iter()
                .map(|r| PolarIndexRow {
                    index: r.index,
                    z: EstimateWithCI::monte_carlo(&r.z),
                    i: EstimateWithCI::monte_carlo(&r.i),
                })
                .collect(),
        }
    }
}

/// Genie-aided Monte-Carlo estimates for every subchannel of length `len`.
///
/// Each sample draws a uniform input word, a stationary boundary state and a
/// channel realisation, then runs the SC recursion with the true bits fed
/// back. With `r = W(alt)/W(true)` at the root, `√r` estimates `Z` and
/// `1 − log₂(1 + r)` estimates `I`. The same tables reduced with the true
/// boundary state give the genie-aided `Z_g`.
pub fn mc_split(fsc: &FiniteStateChannel, len: usize, samples: usize, seed: u64) -> Result<McSplit> {
    use rand::Rng;
    if samples < MIN_SAMPLES {
        return Err(Error::TooFewSamples {
            got: samples,
            min: MIN_SAMPLES,
        });
    }
    let transform = PolarTransform::new(len)?;
    let s = fsc.states();
    let pi = fsc.stationary().to_vec();
    let init = || {
        let rows = (0..len)
            .map(|i| McSplitRow {
                index: i + 1,
                zg_cond: vec![MeanAccumulator::new(); s],
                ..Default::default()
            })
            .collect::<Vec<_>>();
        (rows, MeanAccumulator::new())
    };
    let (rows, block_mean_i) = par_accumulate(
        samples,
        seed,
        init,
        |(acc, block), rng, _| {
            let u: Vec<u8> = (0..len).map(|_| rng.random::<bool>() as u8).collect();
            let x = transform.encode(&u).expect("length fixed");
            let (s0, y) = fsc.transmit_with(&x, rng);
            let mut score_sum = 0.0;
            let mut point = vec![0.0; s];
            point[s0] = 1.0;
            let mut dec = TrellisDecoder::new(fsc, len).expect("length fixed");
            dec.run(&y, |j, t0, t1| {
                let truth = u[j];
                let (tt, ta) = if truth == 0 { (t0, t1) } else { (t1, t0) };
                let r = reduce_table(ta, &pi) / reduce_table(tt, &pi);
                let rg = reduce_table(ta, &point) / reduce_table(tt, &point);
                let row = &mut acc[j];
                let score = 1.0 - r.ln_1p() / LN_2;
                score_sum += score;
                row.z.push(r.sqrt());
                row.i.push(score);
                row.zg.push(rg.sqrt());
                row.zg_cond[s0].push(rg.sqrt());
                truth
            })
            .expect("length fixed");
            block.push(score_sum / len as f64);
        },
        |(a, ab), (b, bb)| {
            ab.merge(&bb);
            for (ra, rb) in a.iter_mut().zip(b) {
                ra.z.merge(&rb.z);
                ra.i.merge(&rb.i);
                ra.zg.merge(&rb.zg);
                for (x, y) in ra.zg_cond.iter_mut().zip(&rb.zg_cond) {
                    x.merge(y);
                }
            }
        },
    );
    Ok(McSplit {
        len,
        samples,
        rows,
        block_mean_i,
    })
}

/// [`mc_split`] restricted to the 1-based `indices` (all when `None`), as a report.
pub fn mc_density_evolution(
    fsc: &FiniteStateChannel,
    len: usize,
    indices: Option<&[usize]>,
    samples: usize,
    seed: u64,
) -> Result<PolarIndexReport> {
    let mut report = mc_split(fsc, len, samples, seed)?.report();
    if let Some(keep) = indices {
        if let Some(&bad) = keep.iter().find(|&&i| i == 0 || i > len) {
            return Err(Error::InvalidParameter(format!("index {bad} outside 1..={len}")));
        }
        report.rows.retain(|r| keep.contains(&r.index));
    }
    Ok(report)
}

/// Genie-aided Monte-Carlo density evolution for a memoryless channel using the
/// LLR-domain SC reference decoder.
pub fn memoryless_density_evolution(
    w: &[Vec<f64>; 2],
    len: usize,
    samples: usize,
    seed: u64,
) -> Result<PolarIndexReport> {
    use rand::Rng;
    if samples < MIN_SAMPLES {
        return Err(Error::TooFewSamples {
            got: samples,
            min: MIN_SAMPLES,
        });
    }
    let transform = PolarTransform::new(len)?;
    let cdf: [Vec<f64>; 2] = [0, 1].map(|x| {
        w[x].iter()
            .scan(0.0, |c, &p| {
                *c += p;
                Some(*c)
            })
            .collect()
    });
    let rows = par_accumulate(
        samples,
        seed,
        || vec![(MeanAccumulator::new(), MeanAccumulator::new()); len],
        |acc, rng, _| {
            let u: Vec<u8> = (0..len).map(|_| rng.random::<bool>() as u8).collect();
            let x = transform.encode(&u).expect("length fixed");
            let llr: Vec<f64> = x
                .iter()
                .map(|&xi| {
                    let v: f64 = rng.random();
                    let c = &cdf[xi as usize];
                    let y = c.partition_point(|&q| q <= v).min(c.len() - 1);
                    (w[0][y] / w[1][y]).ln()
                })
                .collect();
            memoryless_sc(&llr, &mut |j, l| {
                // Likelihood ratio of the wrong bit over the true bit.
                let r = if u[j] == 0 { (-l).exp() } else { l.exp() };
                acc[j].0.push(r.sqrt());
                acc[j].1.push(1.0 - r.ln_1p() / LN_2);
                u[j]
            })
            .expect("length fixed");
        },
        |a, b| {
            for (x, y) in a.iter_mut().zip(b) {
                x.0.merge(&y.0);
                x.1.merge(&y.1);
            }
        },
    );
    Ok(PolarIndexReport {
        len,
        rows: rows
            .iter()
            .enumerate()
            .map(|(k, (z, i))| PolarIndexRow {
                index: k + 1,
                z: EstimateWithCI::monte_carlo(z),
                i: EstimateWithCI::monte_carlo(i),
            })
            .collect(),
    })
}

// ---------------------------------------------------------------------------
// One-step Bhattacharyya inequalities

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Verdict {
    Holds,
    /// Violated by less than three combined standard errors.
    Inconclusive,
    Violated,
}

/// `lhs ≤ rhs`, with the combined standard error of both sides.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct InequalityCheck {
    pub name: String,
    pub lhs: f64,
    pub rhs: f64,
    pub stderr: f64,
    pub verdict: Verdict,
}

/// Absolute slack granted to exact comparisons for floating-point rounding.
pub const EXACT_SLACK: f64 = 1e-12;

impl InequalityCheck {
    pub fn new(name: &str, lhs: f64, rhs: f64, stderr: f64) -> Self {
        let slack = rhs - lhs;
        let verdict = if slack >= -EXACT_SLACK {
            Verdict::Holds
        } else if slack >= -3.0 * stderr {
            Verdict::Inconclusive
        } else {
            Verdict::Violated
        };
        Self {
            name: name.into(),
            lhs,
            rhs,
            stderr,
            verdict,
        }
    }

    pub fn slack(&self) -> f64 {
        self.rhs - self.lhs
    }
}

/// The parent and child quantities entering the one-step inequalities.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Theorem4Record {
    /// Parent block length `L`.
    pub len: usize,
    /// 1-based parent index `i`.
    pub index: usize,
    pub z: f64,
    pub zg: f64,
    pub zg_inf: f64,
    pub zg_sup: f64,
    pub z_odd: f64,
    pub z_even: f64,
    pub checks: Vec<InequalityCheck>,
}

impl Theorem4Record {
    pub fn violated(&self) -> bool {
        self.checks.iter().any(|c| c.verdict == Verdict::Violated)
    }
}

/// Values with standard errors: `(z, zg, zg_inf, zg_sup, z_odd, z_even)`.
struct Sides {
    v: [f64; 6],
    se: [f64; 6],
}

fn theorem4_checks(len: usize, index: usize, s: Sides) -> Theorem4Record {
    let [z, zg, inf, sup, zo, ze] = s.v;
    let [ez, ezg, einf, esup, eo, ee] = s.se;
    let hyp = |xs: &[f64]| xs.iter().map(|x| x * x).sum::<f64>().sqrt();
    let checks = vec![
        InequalityCheck::new(
            "odd-upper",
            zo,
            z + zg - z * inf,
            hyp(&[eo, ez * (1.0 - inf), ezg, z * einf]),
        ),
        InequalityCheck::new("odd-lower", 0.5 * (z + zg), zo, hyp(&[0.5 * ez, 0.5 * ezg, eo])),
        InequalityCheck::new("even-upper", ze, z * sup, hyp(&[ee, ez * sup, z * esup])),
        InequalityCheck::new("sum-upper", zo + ze, z + zg, hyp(&[eo, ee, ez, ezg])),
        InequalityCheck::new("genie-jensen", z + zg, 2.0 * z, hyp(&[ez, ezg])),
        InequalityCheck::new("even-below-mean", ze, 0.5 * (z + zg), hyp(&[ee, 0.5 * ez, 0.5 * ezg])),
    ];
    Theorem4Record {
        len,
        index,
        z,
        zg,
        zg_inf: inf,
        zg_sup: sup,
        z_odd: zo,
        z_even: ze,
        checks,
    }
}

/// Exact one-step inequalities from `L` to `2L` (requires `2L` within the enumeration budget).
pub fn theorem4_exact(fsc: &FiniteStateChannel, len: usize) -> Result<Vec<Theorem4Record>> {
    let parent = split_channel_exact(fsc, len)?;
    let child = split_channel_exact(fsc, 2 * len)?;
    Ok(parent
        .iter()
        .enumerate()
        .map(|(i, p)| {
            let inf = p.zg_cond.iter().copied().fold(f64::INFINITY, f64::min);
            let sup = p.zg_cond.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            theorem4_checks(
                len,
                i + 1,
                Sides {
                    v: [p.z, p.zg, inf, sup, child[2 * i].z, child[2 * i + 1].z],
                    se: [0.0; 6],
                },
            )
        })
        .collect())
}

/// One-step inequalities from Monte-Carlo runs at `L` and `2L`.
///
/// The conditional genie parameters come from the parent run split by
/// boundary state; the extreme states are those with the extreme sample means.
pub fn theorem4_mc(fsc: &FiniteStateChannel, len: usize, samples: usize, seed: u64) -> Result<Vec<Theorem4Record>> {
    let parent = mc_split(fsc, len, samples, seed)?;
    let child = mc_split(fsc, 2 * len, samples, seed ^ 0x9e37_79b9_7f4a_7c15)?;
    Ok(parent
        .rows
        .iter()
        .enumerate()
        .map(|(i, p)| {
            let populated: Vec<&MeanAccumulator> =
                p.zg_cond.iter().filter(|a| a.count() >= 2).collect();
            let inf = populated
                .iter()
                .min_by(|a, b| a.mean().total_cmp(&b.mean()))
                .copied()
                .cloned()
                .unwrap_or_default();
            let sup = populated
                .iter()
                .max_by(|a, b| a.mean().total_cmp(&b.mean()))
                .copied()
                .cloned()
                .unwrap_or_default();
            let (o, e) = (&child.rows[2 * i], &child.rows[2 * i + 1]);
            theorem4_checks(
                len,
                i + 1,
                Sides {
                    v: [p.z.mean(), p.zg.mean(), inf.mean(), sup.mean(), o.z.mean(), e.z.mean()],
                    se: [
                        p.z.stderr(),
                        p.zg.stderr(),
                        inf.stderr(),
                        sup.stderr(),
                        o.z.stderr(),
                        e.z.stderr(),
                    ],
                },
            )
        })
        .collect())
}

// ---------------------------------------------------------------------------
// Bit-error-rate comparison

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BerPoint {
    pub blocks: usize,
    pub info_bits: usize,
    pub ber: f64,
    pub stderr: f64,
}

impl BerPoint {
    fn from_acc(acc: &MeanAccumulator, info_bits: usize) -> Self {
        Self {
            blocks: acc.count(),
            info_bits,
            ber: acc.mean(),
            stderr: acc.stderr(),
        }
    }

    /// Normal-approximation 95% interval.
    pub fn ci95(&self) -> (f64, f64) {
        (self.ber - 1.96 * self.stderr, self.ber + 1.96 * self.stderr)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BerComparison {
    pub memory_aware: BerPoint,
    pub memoryless: BerPoint,
}

impl BerComparison {
    /// True when the memory-aware interval lies strictly below the memoryless one.
    pub fn separated(&self) -> bool {
        self.memory_aware.ci95().1 < self.memoryless.ci95().0
    }
}

/// Decodes the same random blocks with the state-aware and the memoryless SC decoders.
///
/// The per-block bit-error fraction over information bits is averaged; its
/// sample standard error gives the interval.
pub fn simulate_ber(
    fsc: &FiniteStateChannel,
    frozen: &FrozenSet,
    blocks: usize,
    seed: u64,
) -> Result<BerComparison> {
    use rand::Rng;
    let len = frozen.len();
    let transform = PolarTransform::new(len)?;
    let mask = frozen.mask();
    let info = frozen.info_count();
    if info == 0 {
        return Err(Error::InvalidParameter("no information bits".into()));
    }
    let (aware, plain) = par_accumulate(
        blocks,
        seed,
        || (MeanAccumulator::new(), MeanAccumulator::new()),
        |acc, rng, _| {
            let u: Vec<u8> = mask
                .iter()
                .map(|&f| if f { 0 } else { rng.random::<bool>() as u8 })
                .collect();
            let x = transform.encode(&u).expect("length fixed");
            let (_, y) = fsc.transmit_with(&x, rng);
            let errs = |d: &[u8]| {
                d.iter()
                    .zip(&u)
                    .zip(&mask)
                    .filter(|((a, b), &f)| !f && a != b)
                    .count() as f64
                    / info as f64
            };
            let a = sc_trellis_decode(fsc, &y, frozen).expect("length fixed");
            let m = memoryless_sc_decode(fsc, &y, frozen).expect("length fixed");
            acc.0.push(errs(&a));
            acc.1.push(errs(&m));
        },
        |a, b| {
            a.0.merge(&b.0);
            a.1.merge(&b.1);
        },
    );
    Ok(BerComparison {
        memory_aware: BerPoint::from_acc(&aware, info),
        memoryless: BerPoint::from_acc(&plain, info),
    })
}
