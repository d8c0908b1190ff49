//! Polarization-rate machinery.
//!
//! Two pieces: the extremal recursion `x ↦ 2x` / `x ↦ x + 1` over a bit
//! string of fixed weight, and a pair of log-domain random walks that bound
//! `log₂ Z` of a randomly chosen subchannel from below (`S`) and above (`U`).
//! Both walks are driven by fair bits, one per polarization layer.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::estimate::MeanAccumulator;
use crate::rng::par_accumulate;
use crate::trellis::{McSplit, PolarIndexReport, SplitExact};
use crate::{Error, Result};

/// Largest `n` accepted by [`lemma4_extremes`].
pub const MAX_RECURSION_LEN: u32 = 24;

/// Extremes of `x_{n+1}` over all bit strings of weight `h`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RecursionExtremes {
    pub min: f64,
    pub max: f64,
    /// `x0·2^h + n − h`: all doublings first.
    pub min_closed_form: f64,
    /// `(x0 + n − h)·2^h`: all additions first.
    pub max_closed_form: f64,
    pub strings: u64,
}

/// Runs `x_{j+1} = 2x_j` (bit set) or `x_j + 1` (bit clear) from `x_1 = x0`,
/// where bit `j − 1` of `mask` drives step `j`.
fn run_recursion(mask: u32, n: u32, x0: f64) -> f64 {
    (0..n).fold(x0, |x, j| if mask >> j & 1 == 1 { 2.0 * x } else { x + 1.0 })
}

/// Enumerates every weight-`h` string of length `n` and records the extremes of the recursion.
pub fn lemma4_extremes(n: u32, h: u32, x0: f64) -> Result<RecursionExtremes> {
    if h > n {
        return Err(Error::InvalidParameter(format!("weight {h} exceeds length {n}")));
    }
    if n > MAX_RECURSION_LEN {
        return Err(Error::TooLarge(format!(
            "length {n} exceeds {MAX_RECURSION_LEN}"
        )));
    }
    let mut min = f64::INFINITY;
    let mut max = f64::NEG_INFINITY;
    let mut strings = 0u64;
    let limit = 1u64 << n;
    // Gosper's hack walks the weight-h masks in increasing order.
    let mut mask: u64 = (1u64 << h) - 1;
    while mask < limit {
        let x = run_recursion(mask as u32, n, x0);
        min = min.min(x);
        max = max.max(x);
        strings += 1;
        if mask == 0 {
            break;
        }
        let c = mask & mask.wrapping_neg();
        let r = mask + c;
        mask = (((r ^ mask) >> 2) / c) | r;
    }
    let p = 2f64.powi(h as i32);
    Ok(RecursionExtremes {
        min,
        max,
        min_closed_form: x0 * p + (n - h) as f64,
        max_closed_form: (x0 + (n - h) as f64) * p,
        strings,
    })
}

/// Parameters of the bounding processes.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BoundProcessConfig {
    /// Largest ratio `Z_g/Z` over all subchannels.
    pub rho: f64,
    /// Smallest contraction `Z(W_{2L}^{(2i)}) / Z(W_L^{(i)})`.
    pub lambda: f64,
    /// Initial `log₂ Z` of the lower process at `l = 2`.
    pub s2: f64,
    /// Initial `log₂ Z` of the upper process at `l = 2`.
    pub u2: f64,
    pub l_max: u32,
}

impl BoundProcessConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidParameter(m));
        if !(self.rho >= 0.0) || !self.rho.is_finite() {
            return bad(format!("rho must be non-negative, got {}", self.rho));
        }
        if !(self.lambda > 0.0 && self.lambda <= 1.0) {
            return bad(format!("lambda must lie in (0, 1], got {}", self.lambda));
        }
        if !(self.s2 <= 0.0 && self.u2 <= 0.0) {
            return bad("initial log values must be non-positive".into());
        }
        if self.l_max < 2 || self.l_max > 62 {
            return bad(format!("l_max must lie in 2..=62, got {}", self.l_max));
        }
        Ok(())
    }

    pub fn constants(&self) -> RateConstants {
        RateConstants::new(self.rho, self.lambda, self.s2)
    }
}

/// Constants of the polynomial upper threshold `c0·L^{c1/2}` and the lower
/// threshold `2^{c2·√L + c3(l)}`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RateConstants {
    pub rho: f64,
    pub lambda: f64,
    pub c0: f64,
    pub c1: f64,
    pub c2: f64,
}

impl RateConstants {
    pub fn new(rho: f64, lambda: f64, s2: f64) -> Self {
        let c1 = (lambda * (1.0 + rho - lambda)).log2();
        Self {
            rho,
            lambda,
            c0: 2f64.powf(-0.5 * c1),
            c1,
            c2: s2 / std::f64::consts::SQRT_2,
        }
    }

    /// Whether the upper process drifts to −∞, i.e. `λ(1+ρ−λ) < 1`.
    pub fn contracting(&self) -> bool {
        self.c1 < 0.0
    }

    /// `(ρ+1)·2^{(l−3)/2}`; grows with the layer count.
    pub fn c3(&self, l: u32) -> f64 {
        (self.rho + 1.0) * 2f64.powf((l as f64 - 3.0) / 2.0)
    }

    /// `log₂(c0·L^{c1/2})` for `L = 2^l`.
    pub fn upper_log_threshold(&self, l: u32) -> f64 {
        self.c0.log2() + 0.5 * self.c1 * l as f64
    }

    /// `c2·√L + c3(l)` for `L = 2^l`.
    pub fn lower_log_threshold(&self, l: u32) -> f64 {
        self.c2 * 2f64.powf(l as f64 / 2.0) + self.c3(l)
    }
}

/// Per-layer statistics of the simulated processes.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoundLevel {
    pub l: u32,
    /// Fraction of paths with `U_l ≤ log₂(c0·L^{c1/2})`.
    pub upper_fraction: f64,
    pub upper_stderr: f64,
    /// Fraction of paths with `S_l ≥ c2·√L + c3(l)`.
    pub lower_fraction: f64,
    pub lower_stderr: f64,
    pub mean_u: f64,
    pub mean_s: f64,
    /// Paths with `S_l > U_l`; only meaningful when both start from the same value.
    pub order_violations: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoundProcessStats {
    pub config: BoundProcessConfig,
    pub constants: RateConstants,
    pub paths: usize,
    /// Set when `λ(1+ρ−λ) ≥ 1`, in which case the upper threshold does not decay.
    pub flagged: bool,
    /// Layers `2..=l_max`.
    pub levels: Vec<BoundLevel>,
}

fn binomial_stderr(p: f64, n: usize) -> f64 {
    if n == 0 {
        return 0.0;
    }
    (p * (1.0 - p) / n as f64).sqrt()
}

#[derive(Clone)]
struct LevelAcc {
    upper: usize,
    lower: usize,
    order: usize,
    u: MeanAccumulator,
    s: MeanAccumulator,
}

/// Simulates `paths` independent trajectories of both processes.
pub fn simulate_bound_processes(
    cfg: &BoundProcessConfig,
    paths: usize,
    seed: u64,
) -> Result<BoundProcessStats> {
    cfg.validate()?;
    if paths == 0 {
        return Err(Error::TooFewSamples { got: 0, min: 1 });
    }
    let k = cfg.constants();
    let levels = (cfg.l_max - 1) as usize;
    let up: Vec<f64> = (2..=cfg.l_max).map(|l| k.upper_log_threshold(l)).collect();
    let lo: Vec<f64> = (2..=cfg.l_max).map(|l| k.lower_log_threshold(l)).collect();
    let half_rho = (0.5 * (1.0 + cfg.rho)).log2();
    let log_lambda = cfg.lambda.log2();
    let log_rest = (1.0 + cfg.rho - cfg.lambda).log2();
    let init = || {
        vec![
            LevelAcc {
                upper: 0,
                lower: 0,
                order: 0,
                u: MeanAccumulator::new(),
                s: MeanAccumulator::new(),
            };
            levels
        ]
    };
    let acc = par_accumulate(
        paths,
        seed,
        init,
        |acc, rng, _| {
            let (mut s, mut u) = (cfg.s2, cfg.u2);
            for (j, a) in acc.iter_mut().enumerate() {
                if j > 0 {
                    if rng.random::<bool>() {
                        s *= 2.0;
                        u += log_lambda;
                    } else {
                        s += half_rho;
                        u += log_rest;
                    }
                }
                a.upper += (u <= up[j]) as usize;
                a.lower += (s >= lo[j]) as usize;
                a.order += (s > u) as usize;
                a.u.push(u);
                a.s.push(s);
            }
        },
        |a, b| {
            for (x, y) in a.iter_mut().zip(b) {
                x.upper += y.upper;
                x.lower += y.lower;
                x.order += y.order;
                x.u.merge(&y.u);
                x.s.merge(&y.s);
            }
        },
    );
    let levels = acc
        .iter()
        .enumerate()
        .map(|(j, a)| {
            let fu = a.upper as f64 / paths as f64;
            let fl = a.lower as f64 / paths as f64;
            BoundLevel {
                l: j as u32 + 2,
                upper_fraction: fu,
                upper_stderr: binomial_stderr(fu, paths),
                lower_fraction: fl,
                lower_stderr: binomial_stderr(fl, paths),
                mean_u: a.u.mean(),
                mean_s: a.s.mean(),
                order_violations: a.order,
            }
        })
        .collect();
    Ok(BoundProcessStats {
        config: *cfg,
        constants: k,
        paths,
        flagged: !k.contracting(),
        levels,
    })
}

/// Plain and genie-aided Bhattacharyya parameters of every subchannel at one length.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GenieZLevel {
    pub len: usize,
    pub z: Vec<f64>,
    pub zg: Vec<f64>,
}

impl GenieZLevel {
    pub fn from_exact(rows: &[SplitExact]) -> Self {
        Self {
            len: rows.len(),
            z: rows.iter().map(|r| r.z).collect(),
            zg: rows.iter().map(|r| r.zg).collect(),
        }
    }

    pub fn from_mc(split: &McSplit) -> Self {
        Self {
            len: split.len,
            z: split.rows.iter().map(|r| r.z.mean()).collect(),
            zg: split.rows.iter().map(|r| r.zg.mean()).collect(),
        }
    }
}

/// Empirical `ρ` and `λ` with a note on clamping.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RhoLambda {
    pub rho: f64,
    pub lambda: f64,
    /// Raw values before clamping to `[0, 1]`.
    pub raw_rho: f64,
    pub raw_lambda: f64,
    pub clamped: bool,
}

/// Parent Bhattacharyya values below this are too small for a meaningful ratio.
const RATIO_FLOOR: f64 = 1e-12;

/// `ρ = max Z_g/Z` over all levels and `λ = min Z(W_{2L}^{(2i)})/Z(W_L^{(i)})`
/// over all consecutive pairs of levels.
pub fn estimate_rho_lambda(levels: &[GenieZLevel]) -> Result<RhoLambda> {
    if levels.is_empty() {
        return Err(Error::Missing("no subchannel levels".into()));
    }
    let mut rho = f64::NEG_INFINITY;
    for lv in levels {
        for (z, zg) in lv.z.iter().zip(&lv.zg) {
            if *z > RATIO_FLOOR {
                rho = rho.max(zg / z);
            }
        }
    }
    let mut lambda = f64::INFINITY;
    for w in levels.windows(2) {
        let (parent, child) = (&w[0], &w[1]);
        if child.len != 2 * parent.len {
            continue;
        }
        for (i, z) in parent.z.iter().enumerate() {
            if *z > RATIO_FLOOR {
                lambda = lambda.min(child.z[2 * i + 1] / z);
            }
        }
    }
    if !rho.is_finite() || !lambda.is_finite() {
        return Err(Error::Missing(
            "need non-degenerate Z values at two consecutive lengths".into(),
        ));
    }
    let (r, l) = (rho.clamp(0.0, 1.0), lambda.clamp(f64::MIN_POSITIVE, 1.0));
    Ok(RhoLambda {
        rho: r,
        lambda: l,
        raw_rho: rho,
        raw_lambda: lambda,
        clamped: r != rho || l != lambda,
    })
}

/// One point of a threshold-fraction trend.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrendRecord {
    #[serde(rename = "L")]
    pub len: usize,
    pub threshold: f64,
    pub fraction: f64,
    pub stderr: f64,
    pub target: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RateTrend {
    /// `Pr[Z ≤ c0·L^{c1/2}]`, targeting `I(W) + I†(W)`.
    pub upper: Vec<TrendRecord>,
    /// `Pr[Z ≥ 2^{c2·√L + c3(l)}]`, targeting 1.
    pub lower: Vec<TrendRecord>,
}

impl RateTrend {
    pub fn upper_non_decreasing(&self, slack: f64) -> bool {
        non_decreasing(&self.upper, slack)
    }
}

/// Whether consecutive fractions never drop by more than `slack`.
pub fn non_decreasing(records: &[TrendRecord], slack: f64) -> bool {
    records.windows(2).all(|w| w[1].fraction + slack >= w[0].fraction)
}

/// Fractions of subchannels below the upper threshold and above the lower one
/// along a ladder of block lengths.
pub fn empirical_rate_check(
    ladder: &[PolarIndexReport],
    constants: &RateConstants,
    target: f64,
) -> Result<RateTrend> {
    if ladder.is_empty() {
        return Err(Error::Missing("empty block-length ladder".into()));
    }
    let mut upper = Vec::with_capacity(ladder.len());
    let mut lower = Vec::with_capacity(ladder.len());
    for rep in ladder {
        if rep.rows.len() != rep.len {
            return Err(Error::Missing(format!(
                "report for L = {} has {} rows",
                rep.len,
                rep.rows.len()
            )));
        }
        let l = crate::polar::log2_len(rep.len)?;
        let up = 2f64.powf(constants.upper_log_threshold(l));
        let lo = 2f64.powf(constants.lower_log_threshold(l));
        let n = rep.len;
        let fu = rep.fraction(|r| r.z.value <= up);
        let fl = rep.fraction(|r| r.z.value >= lo);
        upper.push(TrendRecord {
            len: n,
            threshold: up,
            fraction: fu,
            stderr: binomial_stderr(fu, n),
            target,
        });
        lower.push(TrendRecord {
            len: n,
            threshold: lo,
            fraction: fl,
            stderr: binomial_stderr(fl, n),
            target: 1.0,
        });
    }
    Ok(RateTrend { upper, lower })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::FiniteStateChannel;
    use crate::estimate::EstimateWithCI;
    use crate::trellis::PolarIndexRow;

    #[test]
    fn hand_checked_small_cases() {
        // n = 2, h = 1: (double, add) gives 3, (add, double) gives 4.
        let e = lemma4_extremes(2, 1, 1.0).unwrap();
        assert_eq!((e.min, e.max, e.strings), (3.0, 4.0, 2));
        for n in 0..10 {
            let e = lemma4_extremes(n, 0, 1.0).unwrap();
            assert_eq!((e.min, e.max), (1.0 + n as f64, 1.0 + n as f64));
        }
    }

    #[test]
    fn extremes_match_closed_forms_by_full_enumeration() {
        // Oracle: enumerate all 2^n strings and bucket by weight.
        for n in 1..=12u32 {
            let mut min = vec![f64::INFINITY; n as usize + 1];
            let mut max = vec![f64::NEG_INFINITY; n as usize + 1];
            for mask in 0u32..(1 << n) {
                let mut x = 1.0;
                for j in 0..n {
                    x = if mask & (1 << j) != 0 { 2.0 * x } else { x + 1.0 };
                }
                let h = mask.count_ones() as usize;
                min[h] = f64::min(min[h], x);
                max[h] = f64::max(max[h], x);
            }
            for h in 0..=n {
                let e = lemma4_extremes(n, h, 1.0).unwrap();
                assert_eq!(e.min, min[h as usize]);
                assert_eq!(e.max, max[h as usize]);
                assert_eq!(e.min, e.min_closed_form);
                assert_eq!(e.max, e.max_closed_form);
            }
        }
    }

    #[test]
    fn extremes_guard() {
        assert!(lemma4_extremes(3, 4, 1.0).is_err());
        assert!(lemma4_extremes(25, 1, 1.0).is_err());
    }

    #[test]
    fn constants_and_thresholds() {
        let k = RateConstants::new(1.0, 0.5, -1.0);
        assert!((k.c1 - 0.75f64.log2()).abs() < 1e-15);
        assert!((k.c0 - 0.75f64.powf(-0.5)).abs() < 1e-12);
        assert!(k.contracting());
        // log2(c0·L^{c1/2}) = c1·(l − 1)/2.
        assert!((k.upper_log_threshold(10) - k.c1 * 4.5).abs() < 1e-12);
        assert!(!RateConstants::new(1.0, 1.0, -1.0).contracting());
    }

    #[test]
    fn processes_are_deterministic_and_drift_down() {
        let cfg = BoundProcessConfig {
            rho: 1.0,
            lambda: 0.5,
            s2: -0.5,
            u2: -0.5,
            l_max: 12,
        };
        let a = simulate_bound_processes(&cfg, 5000, 4).unwrap();
        let b = simulate_bound_processes(&cfg, 5000, 4).unwrap();
        assert_eq!(a, b);
        assert!(!a.flagged);
        assert_eq!(a.levels.len(), 11);
        assert_eq!(a.levels[0].mean_u, -0.5);
        // Mean drift of U is c1/2 per layer.
        let drift = (a.levels[10].mean_u - a.levels[0].mean_u) / 10.0;
        assert!((drift - 0.5 * a.constants.c1).abs() < 0.05, "{drift}");
    }

    #[test]
    fn memoryless_degeneration_contracts() {
        // ρ = 0 with λ = Z: both branches shrink log Z.
        let cfg = BoundProcessConfig {
            rho: 0.0,
            lambda: 0.6,
            s2: -1.0,
            u2: -0.2,
            l_max: 10,
        };
        let st = simulate_bound_processes(&cfg, 2000, 1).unwrap();
        for w in st.levels.windows(2) {
            assert!(w[1].mean_u < w[0].mean_u);
        }
        assert!(simulate_bound_processes(
            &BoundProcessConfig { lambda: 0.0, ..cfg },
            10,
            1
        )
        .is_err());
    }

    #[test]
    fn non_contracting_configuration_is_flagged() {
        let cfg = BoundProcessConfig {
            rho: 3.0,
            lambda: 0.9,
            s2: -1.0,
            u2: -1.0,
            l_max: 4,
        };
        assert!(simulate_bound_processes(&cfg, 100, 0).unwrap().flagged);
    }

    #[test]
    fn rho_lambda_from_memoryless_enumeration() {
        let fsc = FiniteStateChannel::bsc(0.1).unwrap();
        let levels: Vec<GenieZLevel> = [1, 2, 4]
            .iter()
            .map(|&l| GenieZLevel::from_exact(&crate::trellis::split_channel_exact(&fsc, l).unwrap()))
            .collect();
        let rl = estimate_rho_lambda(&levels).unwrap();
        // Without memory Z_g = Z and the even child is Z², so λ = min Z.
        assert!((rl.rho - 1.0).abs() < 1e-9);
        let min_z = levels[..2]
            .iter()
            .flat_map(|l| l.z.iter().copied())
            .fold(f64::INFINITY, f64::min);
        assert!((rl.lambda - min_z).abs() < 1e-9);
    }

    fn report(zs: &[f64]) -> PolarIndexReport {
        PolarIndexReport {
            len: zs.len(),
            rows: zs
                .iter()
                .enumerate()
                .map(|(i, &z)| PolarIndexRow {
                    index: i + 1,
                    z: EstimateWithCI::enumeration(z, 1),
                    i: EstimateWithCI::enumeration(1.0 - z, 1),
                })
                .collect(),
        }
    }

    #[test]
    fn perfect_channel_trend_is_one() {
        let k = RateConstants::new(1.0, 0.5, -1.0);
        let ladder = vec![report(&[0.0; 4]), report(&[0.0; 8])];
        let t = empirical_rate_check(&ladder, &k, 1.0).unwrap();
        assert!(t.upper.iter().all(|r| r.fraction == 1.0));
        assert!(t.upper_non_decreasing(0.0));
        assert!(empirical_rate_check(&[], &k, 1.0).is_err());
        let mut broken = report(&[0.0; 4]);
        broken.rows.pop();
        assert!(empirical_rate_check(&[broken], &k, 1.0).is_err());
    }
}
