//! Stationary first-order Markov noise models.
//!
//! Continuous models implement [`MarkovNoiseModel`]: a marginal density, a
//! one-step conditional density and a sampler whose first draw comes from the
//! marginal. Both shipped models are bivariate elliptical laws with a Toeplitz
//! scale matrix, so the conditional of `N₁` given `N₀` is a location-scale
//! family; integrators use [`MarkovNoiseModel::conditional_location_scale`] to
//! centre their grids on it.
//!
//! The Gilbert–Elliott error process is hidden-Markov rather than order-1
//! Markov and therefore does not implement the trait; it reaches the rest of
//! the crate through [`crate::channel::FiniteStateChannel`].

use std::f64::consts::{LN_2, PI};
use std::fmt::Debug;

use rand::{Rng, RngCore};
use rand_distr::{Distribution, StandardNormal, StudentT};
use serde::{Deserialize, Serialize};
use statrs::function::beta::{beta_reg, inv_beta_reg};
use statrs::function::erf::{erfc, erfc_inv};
use statrs::function::gamma::ln_gamma;

use crate::estimate::EstimateWithCI;
use crate::quadrature::{integrate_2d, Axis, QuadratureSpec};
use crate::rng::stream_rng;
use crate::{Error, Result};

/// Tail probability left outside the truncated quadrature domain.
pub const TAIL_PROB: f64 = 1e-10;

/// Minimum truncation, in standard deviations, for finite-variance laws.
pub const MIN_SIGMAS: f64 = 8.0;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum OutputAlphabet {
    Continuous,
    Binary,
}

pub trait MarkovNoiseModel: Send + Sync + Debug {
    fn marginal_log_pdf(&self, n: f64) -> f64;

    /// Log-density of `N₁ = n1` given `N₀ = n0`.
    fn conditional_log_pdf(&self, n1: f64, n0: f64) -> f64;

    fn joint_log_pdf(&self, n0: f64, n1: f64) -> f64 {
        self.marginal_log_pdf(n0) + self.conditional_log_pdf(n1, n0)
    }

    fn marginal_pdf(&self, n: f64) -> f64 {
        self.marginal_log_pdf(n).exp()
    }

    fn conditional_pdf(&self, n1: f64, n0: f64) -> f64 {
        self.conditional_log_pdf(n1, n0).exp()
    }

    /// Scale parameter of the marginal (standard deviation for Gaussians).
    fn marginal_scale(&self) -> f64;

    /// Location and scale of the conditional law of `N₁` given `N₀ = n0`.
    fn conditional_location_scale(&self, n0: f64) -> (f64, f64);

    /// Symmetric half-width of the marginal quadrature domain.
    fn truncation(&self) -> f64;

    /// Half-width of the conditional quadrature domain in units of the conditional scale.
    fn conditional_truncation(&self) -> f64;

    fn marginal_cdf(&self, n: f64) -> f64;

    fn marginal_quantile(&self, p: f64) -> f64;

    /// CDF of `N₁` given `N₀ = n0`.
    fn conditional_cdf(&self, n1: f64, n0: f64) -> f64;

    fn sample_marginal(&self, rng: &mut dyn RngCore) -> f64;

    fn sample_conditional(&self, n0: f64, rng: &mut dyn RngCore) -> f64;

    fn alphabet(&self) -> OutputAlphabet {
        OutputAlphabet::Continuous
    }

    fn order(&self) -> usize {
        1
    }

    /// Short identifier used in reports.
    fn id(&self) -> String;

    /// Named parameters, in a fixed order, for report hashing.
    fn params(&self) -> Vec<(&'static str, f64)>;

    /// A stationary path: the first sample from the marginal, then one-step conditionals.
    fn sample_path(&self, len: usize, seed: u64) -> Vec<f64> {
        let mut rng = stream_rng(seed, 0);
        sample_path_with(self, len, &mut rng)
    }
}

pub fn sample_path_with<N: MarkovNoiseModel + ?Sized>(
    model: &N,
    len: usize,
    rng: &mut dyn RngCore,
) -> Vec<f64> {
    let mut out = Vec::with_capacity(len);
    if len == 0 {
        return out;
    }
    let mut prev = model.sample_marginal(rng);
    out.push(prev);
    for _ in 1..len {
        prev = model.sample_conditional(prev, rng);
        out.push(prev);
    }
    out
}

// ---------------------------------------------------------------------------
// Standard univariate laws

const LN_SQRT_2PI: f64 = 0.918_938_533_204_672_8;

fn std_normal_ln_pdf(z: f64) -> f64 {
    -0.5 * z * z - LN_SQRT_2PI
}

fn std_normal_cdf(z: f64) -> f64 {
    0.5 * erfc(-z / std::f64::consts::SQRT_2)
}

fn std_normal_quantile(p: f64) -> f64 {
    -std::f64::consts::SQRT_2 * erfc_inv(2.0 * p)
}

/// Standardised Student-t law with `nu` degrees of freedom.
#[derive(Clone, Copy, Debug, PartialEq)]
struct StdStudent {
    nu: f64,
    ln_norm: f64,
}

impl StdStudent {
    fn new(nu: f64) -> Self {
        let ln_norm = ln_gamma(0.5 * (nu + 1.0)) - ln_gamma(0.5 * nu) - 0.5 * (nu * PI).ln();
        Self { nu, ln_norm }
    }

    fn ln_pdf(&self, z: f64) -> f64 {
        self.ln_norm - 0.5 * (self.nu + 1.0) * (z * z / self.nu).ln_1p()
    }

    /// Lower-tail probability `P(T ≤ z)` computed without cancellation in either tail.
    fn cdf(&self, z: f64) -> f64 {
        let x = self.nu / (self.nu + z * z);
        let tail = 0.5 * beta_reg(0.5 * self.nu, 0.5, x);
        if z <= 0.0 {
            tail
        } else {
            1.0 - tail
        }
    }

    fn quantile(&self, p: f64) -> f64 {
        if p == 0.5 {
            return 0.0;
        }
        let tail = p.min(1.0 - p);
        let x = inv_beta_reg(0.5 * self.nu, 0.5, 2.0 * tail);
        let t = (self.nu * (1.0 - x) / x).sqrt();
        if p < 0.5 {
            -t
        } else {
            t
        }
    }

    fn truncation(&self) -> f64 {
        let q = self.quantile(1.0 - TAIL_PROB);
        if self.nu > 2.0 {
            q.max(MIN_SIGMAS * (self.nu / (self.nu - 2.0)).sqrt())
        } else {
            q
        }
    }
}

fn check_toeplitz(s11: f64, s12: f64) -> Result<()> {
    if !(s11.is_finite() && s12.is_finite()) || s11 <= 0.0 {
        return Err(Error::InvalidParameter(format!(
            "Σ₁₁ must be positive and finite, got {s11}"
        )));
    }
    if s12.abs() >= s11 {
        return Err(Error::InvalidParameter(format!(
            "Σ is not positive definite: |Σ₁₂| = {} ≥ Σ₁₁ = {s11}",
            s12.abs()
        )));
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// Bivariate Gaussian

/// Colored Gaussian noise: `(N₀, N₁) ~ N(0, Σ)` with `Σ = [[v, c], [c, v]]`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BivariateGaussianNoise {
    s11: f64,
    s12: f64,
}

impl BivariateGaussianNoise {
    pub fn new(s11: f64, s12: f64) -> Result<Self> {
        check_toeplitz(s11, s12)?;
        Ok(Self { s11, s12 })
    }

    /// Unit-variance noise with lag-1 correlation `rho`.
    pub fn with_correlation(rho: f64) -> Result<Self> {
        Self::new(1.0, rho)
    }

    pub fn sigma11(&self) -> f64 {
        self.s11
    }

    pub fn sigma12(&self) -> f64 {
        self.s12
    }

    pub fn correlation(&self) -> f64 {
        self.s12 / self.s11
    }

    /// `det(Σ)/Σ₁₁`, equal to `1/(Σ⁻¹)₁₁`.
    pub fn conditional_variance(&self) -> f64 {
        (self.s11 * self.s11 - self.s12 * self.s12) / self.s11
    }
}

impl MarkovNoiseModel for BivariateGaussianNoise {
    fn marginal_log_pdf(&self, n: f64) -> f64 {
        let s = self.s11.sqrt();
        std_normal_ln_pdf(n / s) - s.ln()
    }

    fn conditional_log_pdf(&self, n1: f64, n0: f64) -> f64 {
        let (m, s) = self.conditional_location_scale(n0);
        std_normal_ln_pdf((n1 - m) / s) - s.ln()
    }

    fn marginal_scale(&self) -> f64 {
        self.s11.sqrt()
    }

    fn conditional_location_scale(&self, n0: f64) -> (f64, f64) {
        (self.correlation() * n0, self.conditional_variance().sqrt())
    }

    fn truncation(&self) -> f64 {
        let q = std_normal_quantile(1.0 - TAIL_PROB);
        q.max(MIN_SIGMAS) * self.marginal_scale()
    }

    fn conditional_truncation(&self) -> f64 {
        std_normal_quantile(1.0 - TAIL_PROB).max(MIN_SIGMAS)
    }

    fn marginal_cdf(&self, n: f64) -> f64 {
        std_normal_cdf(n / self.marginal_scale())
    }

    fn marginal_quantile(&self, p: f64) -> f64 {
        std_normal_quantile(p) * self.marginal_scale()
    }

    fn conditional_cdf(&self, n1: f64, n0: f64) -> f64 {
        let (m, s) = self.conditional_location_scale(n0);
        std_normal_cdf((n1 - m) / s)
    }

    fn sample_marginal(&self, rng: &mut dyn RngCore) -> f64 {
        let z: f64 = rng.sample(StandardNormal);
        z * self.marginal_scale()
    }

    fn sample_conditional(&self, n0: f64, rng: &mut dyn RngCore) -> f64 {
        let (m, s) = self.conditional_location_scale(n0);
        let z: f64 = rng.sample(StandardNormal);
        m + s * z
    }

    fn id(&self) -> String {
        "gaussian".into()
    }

    fn params(&self) -> Vec<(&'static str, f64)> {
        vec![("sigma11", self.s11), ("sigma12", self.s12)]
    }
}

// ---------------------------------------------------------------------------
// Bivariate Student

/// Bivariate Student-t noise `(T₀, T₁) ~ t_ν(0, Σ)`.
///
/// The marginal is `t_ν` with scale `√Σ₁₁`. Given `T₀ = t₀`, `T₁` is `t_{ν+1}`
/// with location `δ = t₀Σ₁₂/Σ₁₁` and squared scale `σ(ν + t₀²/Σ₁₁)/(ν + 1)`,
/// where `σ = det(Σ)/Σ₁₁`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BivariateStudentNoise {
    s11: f64,
    s12: f64,
    nu: f64,
    marginal: StdStudent,
    conditional: StdStudent,
    joint_ln_norm: f64,
}

impl BivariateStudentNoise {
    pub fn new(s11: f64, s12: f64, nu: f64) -> Result<Self> {
        check_toeplitz(s11, s12)?;
        if !(nu.is_finite() && nu > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "degrees of freedom must be positive, got {nu}"
            )));
        }
        let det = s11 * s11 - s12 * s12;
        let joint_ln_norm =
            ln_gamma(0.5 * (nu + 2.0)) - ln_gamma(0.5 * nu) - (nu * PI).ln() - 0.5 * det.ln();
        Ok(Self {
            s11,
            s12,
            nu,
            marginal: StdStudent::new(nu),
            conditional: StdStudent::new(nu + 1.0),
            joint_ln_norm,
        })
    }

    pub fn sigma11(&self) -> f64 {
        self.s11
    }

    pub fn sigma12(&self) -> f64 {
        self.s12
    }

    pub fn dof(&self) -> f64 {
        self.nu
    }

    /// `σ = det(Σ)/Σ₁₁`.
    pub fn sigma(&self) -> f64 {
        (self.s11 * self.s11 - self.s12 * self.s12) / self.s11
    }

    /// `δ = t₀Σ₁₂/Σ₁₁`.
    pub fn delta(&self, t0: f64) -> f64 {
        t0 * self.s12 / self.s11
    }

    /// Joint log-density evaluated directly from the quadratic form.
    pub fn joint_log_pdf_direct(&self, t0: f64, t1: f64) -> f64 {
        let det = self.s11 * self.s11 - self.s12 * self.s12;
        let q = (self.s11 * t0 * t0 - 2.0 * self.s12 * t0 * t1 + self.s11 * t1 * t1) / det;
        self.joint_ln_norm - 0.5 * (self.nu + 2.0) * (q / self.nu).ln_1p()
    }
}

impl MarkovNoiseModel for BivariateStudentNoise {
    fn marginal_log_pdf(&self, n: f64) -> f64 {
        let s = self.s11.sqrt();
        self.marginal.ln_pdf(n / s) - s.ln()
    }

    fn conditional_log_pdf(&self, n1: f64, n0: f64) -> f64 {
        let (m, s) = self.conditional_location_scale(n0);
        self.conditional.ln_pdf((n1 - m) / s) - s.ln()
    }

    fn marginal_scale(&self) -> f64 {
        self.s11.sqrt()
    }

    fn conditional_location_scale(&self, n0: f64) -> (f64, f64) {
        let var = self.sigma() * (self.nu + n0 * n0 / self.s11) / (self.nu + 1.0);
        (self.delta(n0), var.sqrt())
    }

    fn truncation(&self) -> f64 {
        self.marginal.truncation() * self.marginal_scale()
    }

    fn conditional_truncation(&self) -> f64 {
        self.conditional.truncation()
    }

    fn marginal_cdf(&self, n: f64) -> f64 {
        self.marginal.cdf(n / self.marginal_scale())
    }

    fn marginal_quantile(&self, p: f64) -> f64 {
        self.marginal.quantile(p) * self.marginal_scale()
    }

    fn conditional_cdf(&self, n1: f64, n0: f64) -> f64 {
        let (m, s) = self.conditional_location_scale(n0);
        self.conditional.cdf((n1 - m) / s)
    }

    fn sample_marginal(&self, rng: &mut dyn RngCore) -> f64 {
        let t = StudentT::new(self.nu).expect("validated dof");
        t.sample(rng) * self.marginal_scale()
    }

    fn sample_conditional(&self, n0: f64, rng: &mut dyn RngCore) -> f64 {
        let (m, s) = self.conditional_location_scale(n0);
        let t = StudentT::new(self.nu + 1.0).expect("validated dof");
        m + s * t.sample(rng)
    }

    fn id(&self) -> String {
        "student".into()
    }

    fn params(&self) -> Vec<(&'static str, f64)> {
        vec![("sigma11", self.s11), ("sigma12", self.s12), ("nu", self.nu)]
    }
}

// ---------------------------------------------------------------------------
// Closed set of continuous models used by configs

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum ContinuousNoise {
    Gaussian(BivariateGaussianNoise),
    Student(BivariateStudentNoise),
}

impl From<BivariateGaussianNoise> for ContinuousNoise {
    fn from(g: BivariateGaussianNoise) -> Self {
        ContinuousNoise::Gaussian(g)
    }
}

impl From<BivariateStudentNoise> for ContinuousNoise {
    fn from(s: BivariateStudentNoise) -> Self {
        ContinuousNoise::Student(s)
    }
}

macro_rules! delegate {
    ($self:ident, $m:ident($($a:expr),*)) => {
        match $self {
            ContinuousNoise::Gaussian(g) => g.$m($($a),*),
            ContinuousNoise::Student(s) => s.$m($($a),*),
        }
    };
}

impl MarkovNoiseModel for ContinuousNoise {
    fn marginal_log_pdf(&self, n: f64) -> f64 {
        delegate!(self, marginal_log_pdf(n))
    }
    fn conditional_log_pdf(&self, n1: f64, n0: f64) -> f64 {
        delegate!(self, conditional_log_pdf(n1, n0))
    }
    fn marginal_scale(&self) -> f64 {
        delegate!(self, marginal_scale())
    }
    fn conditional_location_scale(&self, n0: f64) -> (f64, f64) {
        delegate!(self, conditional_location_scale(n0))
    }
    fn truncation(&self) -> f64 {
        delegate!(self, truncation())
    }
    fn conditional_truncation(&self) -> f64 {
        delegate!(self, conditional_truncation())
    }
    fn marginal_cdf(&self, n: f64) -> f64 {
        delegate!(self, marginal_cdf(n))
    }
    fn marginal_quantile(&self, p: f64) -> f64 {
        delegate!(self, marginal_quantile(p))
    }
    fn conditional_cdf(&self, n1: f64, n0: f64) -> f64 {
        delegate!(self, conditional_cdf(n1, n0))
    }
    fn sample_marginal(&self, rng: &mut dyn RngCore) -> f64 {
        delegate!(self, sample_marginal(rng))
    }
    fn sample_conditional(&self, n0: f64, rng: &mut dyn RngCore) -> f64 {
        delegate!(self, sample_conditional(n0, rng))
    }
    fn id(&self) -> String {
        delegate!(self, id())
    }
    fn params(&self) -> Vec<(&'static str, f64)> {
        delegate!(self, params())
    }
}

/// Marginal quadrature axis honouring a spec override.
pub(crate) fn marginal_axis<N: MarkovNoiseModel + ?Sized>(
    model: &N,
    spec: &QuadratureSpec,
    center: f64,
    extra: f64,
) -> Axis {
    let t = spec.truncation.unwrap_or_else(|| model.truncation());
    Axis::new(center, model.marginal_scale(), t + extra)
}

/// Conditional quadrature axis for `N₁` given `N₀ = n0`, centred at the conditional location.
pub(crate) fn conditional_axis<N: MarkovNoiseModel + ?Sized>(model: &N, n0: f64, extra: f64) -> Axis {
    let (m, s) = model.conditional_location_scale(n0);
    Axis::new(m, s, model.conditional_truncation() * s + extra)
}

fn check_truncation<N: MarkovNoiseModel + ?Sized>(model: &N, spec: &QuadratureSpec) -> Result<()> {
    if let Some(t) = spec.truncation {
        let (_, s) = model.conditional_location_scale(0.0);
        if t < MIN_SIGMAS * s {
            return Err(Error::InvalidParameter(format!(
                "truncation {t} covers fewer than {MIN_SIGMAS} conditional scales ({s})"
            )));
        }
    }
    Ok(())
}

/// `I(N₁; N₀)` in bits by nested quadrature over the joint density.
pub fn noise_pair_mi<N: MarkovNoiseModel + ?Sized>(
    model: &N,
    spec: &QuadratureSpec,
) -> Result<EstimateWithCI> {
    check_truncation(model, spec)?;
    let outer = marginal_axis(model, spec, 0.0, 0.0);
    let q = integrate_2d(
        &outer,
        |n0| conditional_axis(model, n0, 0.0),
        spec,
        |n0, n1| {
            let lc = model.conditional_log_pdf(n1, n0);
            let w = (model.marginal_log_pdf(n0) + lc).exp();
            if w == 0.0 {
                return [0.0];
            }
            [w * (lc - model.marginal_log_pdf(n1)) / LN_2]
        },
    );
    Ok(EstimateWithCI::quadrature(
        q.values[0].max(0.0),
        q.residual,
        q.nodes,
        q.converged,
    ))
}

// ---------------------------------------------------------------------------
// Gilbert–Elliott

/// Two-state hidden-Markov binary error process.
///
/// State 0 is "good", state 1 "bad". At each time the state evolves by the
/// row-stochastic `transition` and an error is emitted with the current
/// state's probability.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GilbertElliottNoise {
    transition: [[f64; 2]; 2],
    error: [f64; 2],
}

#[derive(Clone, Debug, PartialEq)]
pub struct GilbertElliottPath {
    pub errors: Vec<u8>,
    pub states: Vec<u8>,
}

impl GilbertElliottNoise {
    pub fn new(transition: [[f64; 2]; 2], error: [f64; 2]) -> Result<Self> {
        for (r, row) in transition.iter().enumerate() {
            if row.iter().any(|p| !(0.0..=1.0).contains(p)) || (row[0] + row[1] - 1.0).abs() > 1e-12 {
                return Err(Error::InvalidParameter(format!(
                    "transition row {r} is not stochastic: {row:?}"
                )));
            }
        }
        if transition[0][1] == 0.0 || transition[1][0] == 0.0 {
            return Err(Error::InvalidParameter(
                "transition matrix is reducible".into(),
            ));
        }
        if transition[0][1] == 1.0 && transition[1][0] == 1.0 {
            return Err(Error::InvalidParameter(
                "transition matrix is periodic".into(),
            ));
        }
        if error.iter().any(|e| !(0.0..=1.0).contains(e)) {
            return Err(Error::InvalidParameter(format!(
                "error probabilities must lie in [0, 1], got {error:?}"
            )));
        }
        Ok(Self { transition, error })
    }

    /// Symmetric switching with probability `flip` between states.
    pub fn symmetric(flip: f64, e_good: f64, e_bad: f64) -> Result<Self> {
        Self::new([[1.0 - flip, flip], [flip, 1.0 - flip]], [e_good, e_bad])
    }

    pub fn transition(&self) -> [[f64; 2]; 2] {
        self.transition
    }

    pub fn error_probs(&self) -> [f64; 2] {
        self.error
    }

    pub fn stationary(&self) -> [f64; 2] {
        let a = self.transition[0][1];
        let b = self.transition[1][0];
        [b / (a + b), a / (a + b)]
    }

    /// Stationary error probability `Σ π(s) e_s`.
    pub fn error_rate(&self) -> f64 {
        let pi = self.stationary();
        pi[0] * self.error[0] + pi[1] * self.error[1]
    }

    fn emit(&self, s: usize, e: usize) -> f64 {
        if e == 1 {
            self.error[s]
        } else {
            1.0 - self.error[s]
        }
    }

    /// Joint law of two consecutive error symbols, `P(E₀ = a, E₁ = b)`.
    pub fn pair_joint(&self) -> [[f64; 2]; 2] {
        let pi = self.stationary();
        let mut out = [[0.0; 2]; 2];
        for (a, row) in out.iter_mut().enumerate() {
            for (b, cell) in row.iter_mut().enumerate() {
                for s0 in 0..2 {
                    for s1 in 0..2 {
                        *cell += pi[s0] * self.emit(s0, a) * self.transition[s0][s1] * self.emit(s1, b);
                    }
                }
            }
        }
        out
    }

    /// `I(N₁; N₀)` in bits from the exact four-cell joint.
    pub fn noise_pair_mi(&self) -> EstimateWithCI {
        let j = self.pair_joint();
        let m0 = [j[0][0] + j[0][1], j[1][0] + j[1][1]];
        let m1 = [j[0][0] + j[1][0], j[0][1] + j[1][1]];
        let mut mi = 0.0;
        for a in 0..2 {
            for b in 0..2 {
                if j[a][b] > 0.0 {
                    mi += j[a][b] * (j[a][b] / (m0[a] * m1[b])).log2();
                }
            }
        }
        EstimateWithCI::enumeration(mi.max(0.0), 16)
    }

    /// A stationary error path; the state before the first symbol is drawn from `π`.
    pub fn sample_path(&self, len: usize, seed: u64) -> GilbertElliottPath {
        let mut rng = stream_rng(seed, 0);
        self.sample_path_with(len, &mut rng)
    }

    pub fn sample_path_with(&self, len: usize, rng: &mut dyn RngCore) -> GilbertElliottPath {
        let pi = self.stationary();
        let mut s = usize::from(rng.random::<f64>() >= pi[0]);
        let mut errors = Vec::with_capacity(len);
        let mut states = Vec::with_capacity(len);
        for _ in 0..len {
            s = usize::from(rng.random::<f64>() >= self.transition[s][0]);
            states.push(s as u8);
            errors.push(u8::from(rng.random::<f64>() < self.error[s]));
        }
        GilbertElliottPath { errors, states }
    }

    pub fn id(&self) -> String {
        "gilbert-elliott".into()
    }

    pub fn params(&self) -> Vec<(&'static str, f64)> {
        vec![
            ("p01", self.transition[0][1]),
            ("p10", self.transition[1][0]),
            ("e_good", self.error[0]),
            ("e_bad", self.error[1]),
        ]
    }
}
