//! Nested trapezoid quadrature on sinh-mapped axes.
//!
//! An axis `x = center + scale·sinh(u)` turns algebraic (Student) and
//! Gaussian tails alike into rapidly decaying integrands in `u`, where the
//! trapezoid rule converges geometrically. Each refinement halves the step
//! and reuses all previous nodes; the difference between the last two levels
//! is reported as the residual.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct QuadratureSpec {
    /// Step of the coarsest level, in mapped units.
    pub initial_step: f64,
    /// Refinements always performed before the residual is checked.
    pub min_refinements: u32,
    pub max_refinements: u32,
    /// Absolute residual accepted between the two finest levels.
    pub tol: f64,
    /// Overrides the model-derived truncation half-width when set.
    #[serde(default)]
    pub truncation: Option<f64>,
}

impl Default for QuadratureSpec {
    fn default() -> Self {
        Self {
            initial_step: 0.1,
            min_refinements: 1,
            max_refinements: 7,
            tol: 1e-7,
            truncation: None,
        }
    }
}

impl QuadratureSpec {
    /// A cheaper spec used for inner integrals of nested 2-D rules.
    pub fn inner(&self) -> Self {
        Self {
            tol: self.tol * 0.1,
            ..*self
        }
    }

    pub fn with_tol(mut self, tol: f64) -> Self {
        self.tol = tol;
        self
    }
}

/// A sinh-mapped integration axis covering `[center - half_width, center + half_width]`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Axis {
    pub center: f64,
    pub scale: f64,
    pub half_width: f64,
}

impl Axis {
    pub fn new(center: f64, scale: f64, half_width: f64) -> Self {
        debug_assert!(scale > 0.0 && half_width > 0.0);
        Self {
            center,
            scale,
            half_width,
        }
    }

    fn u_max(&self) -> f64 {
        (self.half_width / self.scale).asinh()
    }

    #[inline]
    fn map(&self, u: f64) -> (f64, f64) {
        (
            self.center + self.scale * u.sinh(),
            self.scale * u.cosh(),
        )
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Quad<const K: usize> {
    pub values: [f64; K],
    /// Largest component-wise difference between the two finest levels,
    /// plus any residual carried by inner integrals.
    pub residual: f64,
    pub nodes: usize,
    pub converged: bool,
}

struct Level<const K: usize> {
    values: [f64; K],
    aux: f64,
    nodes: usize,
}

fn run<const K: usize, G>(axis: &Axis, spec: &QuadratureSpec, parallel: bool, g: G) -> Quad<K>
where
    G: Fn(f64) -> ([f64; K], f64) + Sync,
{
    let u_max = axis.u_max();
    let mut n = ((2.0 * u_max / spec.initial_step).ceil() as usize).max(4);
    let mut h = 2.0 * u_max / n as f64;

    let eval = |u: f64| -> ([f64; K], f64) {
        let (x, jac) = axis.map(u);
        let (v, a) = g(x);
        let mut out = [0.0; K];
        for k in 0..K {
            out[k] = v[k] * jac;
        }
        (out, a * jac)
    };
    let sum_nodes = |nodes: Vec<f64>, weights_half_ends: bool| -> Level<K> {
        let count = nodes.len();
        let evals: Vec<([f64; K], f64)> = if parallel {
            nodes.par_iter().map(|&u| eval(u)).collect()
        } else {
            nodes.iter().map(|&u| eval(u)).collect()
        };
        let mut values = [0.0; K];
        let mut aux = 0.0;
        for (j, (v, a)) in evals.iter().enumerate() {
            let w = if weights_half_ends && (j == 0 || j == count - 1) {
                0.5
            } else {
                1.0
            };
            for k in 0..K {
                values[k] += w * v[k];
            }
            aux += w * a;
        }
        Level {
            values,
            aux,
            nodes: count,
        }
    };

    let first: Vec<f64> = (0..=n).map(|j| -u_max + j as f64 * h).collect();
    let mut acc = sum_nodes(first, true);
    let mut total_nodes = acc.nodes;
    let mut prev: [f64; K] = acc.values.map(|s| s * h);
    let mut prev_aux = acc.aux * h;
    let mut residual = f64::INFINITY;
    let mut converged = false;

    for level in 1..=spec.max_refinements {
        let mids: Vec<f64> = (0..n).map(|j| -u_max + (j as f64 + 0.5) * h).collect();
        let add = sum_nodes(mids, false);
        total_nodes += add.nodes;
        for k in 0..K {
            acc.values[k] += add.values[k];
        }
        acc.aux += add.aux;
        n *= 2;
        h *= 0.5;
        let cur: [f64; K] = acc.values.map(|s| s * h);
        let cur_aux = acc.aux * h;
        residual = (0..K)
            .map(|k| (cur[k] - prev[k]).abs())
            .fold(0.0, f64::max);
        prev = cur;
        prev_aux = cur_aux;
        if level >= spec.min_refinements && residual <= spec.tol {
            converged = true;
            break;
        }
    }

    Quad {
        values: prev,
        residual: residual + prev_aux.abs(),
        nodes: total_nodes,
        converged,
    }
}

/// Integrates a vector-valued function along one axis, evaluating nodes sequentially.
pub fn integrate<const K: usize, F>(axis: &Axis, spec: &QuadratureSpec, f: F) -> Quad<K>
where
    F: Fn(f64) -> [f64; K] + Sync,
{
    run(axis, spec, false, |x| (f(x), 0.0))
}

/// Like [`integrate`] but spreads node evaluations over the rayon pool.
pub fn integrate_par<const K: usize, F>(axis: &Axis, spec: &QuadratureSpec, f: F) -> Quad<K>
where
    F: Fn(f64) -> [f64; K] + Sync,
{
    run(axis, spec, true, |x| (f(x), 0.0))
}

/// Nested 2-D rule: `∫ dx ∫ dy f(x, y)` with an inner axis chosen per outer node.
///
/// Outer nodes run in parallel; every inner integral is refined on its own and
/// its residual is integrated along the outer axis into the total residual.
pub fn integrate_2d<const K: usize, A, F>(
    outer: &Axis,
    inner_axis: A,
    spec: &QuadratureSpec,
    f: F,
) -> Quad<K>
where
    A: Fn(f64) -> Axis + Sync,
    F: Fn(f64, f64) -> [f64; K] + Sync,
{
    let inner_spec = spec.inner();
    let inner_nodes = std::sync::atomic::AtomicUsize::new(0);
    let inner_failed = std::sync::atomic::AtomicBool::new(false);
    let mut q = run(outer, spec, true, |x| {
        let ax = inner_axis(x);
        let r = integrate(&ax, &inner_spec, |y| f(x, y));
        inner_nodes.fetch_add(r.nodes, std::sync::atomic::Ordering::Relaxed);
        if !r.converged {
            inner_failed.store(true, std::sync::atomic::Ordering::Relaxed);
        }
        (r.values, r.residual)
    });
    q.nodes = inner_nodes.into_inner();
    q.converged &= !inner_failed.into_inner();
    q
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn gaussian_moments() {
        let spec = QuadratureSpec::default();
        let axis = Axis::new(0.0, 1.0, 10.0);
        let q = integrate(&axis, &spec, |x| {
            let p = (-0.5 * x * x).exp() / (2.0 * PI).sqrt();
            [p, x * x * p]
        });
        assert!(q.converged);
        assert!((q.values[0] - 1.0).abs() < 1e-12);
        assert!((q.values[1] - 1.0).abs() < 1e-10);
    }

    #[test]
    fn cauchy_mass_on_wide_axis() {
        // 1/(π(1+x²)) over [-T, T] has mass 2 atan(T)/π.
        let spec = QuadratureSpec::default();
        let t = 1e8;
        let axis = Axis::new(0.0, 1.0, t);
        let q = integrate(&axis, &spec, |x| [1.0 / (PI * (1.0 + x * x))]);
        let exact = 2.0 * t.atan() / PI;
        assert!((q.values[0] - exact).abs() < 1e-10, "{}", q.values[0]);
    }

    #[test]
    fn nested_2d_product_density() {
        let spec = QuadratureSpec::default();
        let outer = Axis::new(0.0, 1.0, 9.0);
        let q = integrate_2d(
            &outer,
            |x| Axis::new(0.5 * x, 0.8, 9.0 * 0.8),
            &spec,
            |x, y| {
                let px = (-0.5 * x * x).exp() / (2.0 * PI).sqrt();
                let z = (y - 0.5 * x) / 0.8;
                let py = (-0.5 * z * z).exp() / (0.8 * (2.0 * PI).sqrt());
                [px * py]
            },
        );
        assert!(q.converged);
        assert!((q.values[0] - 1.0).abs() < 1e-10);
    }

    #[test]
    fn parallel_matches_sequential_bitwise() {
        let spec = QuadratureSpec::default();
        let axis = Axis::new(1.0, 2.0, 30.0);
        let f = |x: f64| [(-(x - 1.0).powi(2) / 8.0).exp(), x.sin() * (-x * x / 50.0).exp()];
        let a = integrate(&axis, &spec, f);
        let b = integrate_par(&axis, &spec, f);
        assert_eq!(a.values, b.values);
    }
}
