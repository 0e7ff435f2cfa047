//! Direct a posteriori error bounds.
//!
//! `‖(u_h − u)(t)‖ ≤ (1 + ω)(D_t^α + λ)^{-1}‖R_h‖(t)` with
//!
//! ```text
//! (D_t^α + λ)^{-1} v(t) = ∫₀ᵗ (t−s)^{α−1} E_{α,α}(−λ(t−s)^α) v(s) ds
//!                       = (1/α) ∫₀^{t^α} E_{α,α}(−λw) v(t − w^{1/α}) dw.
//! ```
//!
//! The residual norm between samples is replaced by the piecewise-linear
//! interpolant of the sampled values.

use std::f64::consts::PI;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::caputo::TimeSolution;
use crate::error::{domain, Error, Result};
use crate::fem::SpatialNorm;
use crate::mesh::{fmt_f64, SamplingGrid};
use crate::problem::DiscreteProblem;
use crate::quadrature::{integrate_adaptive, QuadratureRequest, DEFAULT_MAX_PANELS};
use crate::residual::{sample_residual, BarrierSpec};
use crate::special::{gamma_pos, mittag_leffler_neg, MLParams};

const BOUND_REL_TOL: f64 = 1e-10;
const TABLE_NODES: usize = 16;
const TABLE_TOL: f64 = 1e-11;

/// Piecewise-linear nonnegative function through `(times[i], values[i])`,
/// with `times[0] = 0`.
#[derive(Debug, Clone, PartialEq)]
pub struct Envelope {
    times: Vec<f64>,
    values: Vec<f64>,
}

impl Envelope {
    pub fn new(times: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        if times.len() != values.len() || times.len() < 2 {
            return domain("envelope needs at least two (t, v) pairs of equal length");
        }
        if times[0] != 0.0 {
            return domain(format!("envelope must start at t = 0, got {}", times[0]));
        }
        if times.windows(2).any(|w| !(w[1] > w[0])) {
            return domain("envelope times must be strictly increasing");
        }
        if values.iter().any(|v| !(v.is_finite() && *v >= 0.0)) {
            return domain("envelope values must be finite and nonnegative");
        }
        Ok(Self { times, values })
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn end(&self) -> f64 {
        *self.times.last().expect("non-empty")
    }

    pub fn eval(&self, s: f64) -> f64 {
        let t = &self.times;
        let i = t.partition_point(|&x| x <= s).clamp(1, t.len() - 1);
        let (a, b) = (t[i - 1], t[i]);
        let th = ((s - a) / (b - a)).clamp(0.0, 1.0);
        self.values[i - 1] + th * (self.values[i] - self.values[i - 1])
    }
}

/// Piecewise Chebyshev interpolant of `w ↦ E_{α,α}(−λw)` on `[0, w_max]`.
#[derive(Debug, Clone)]
pub struct KernelTable {
    alpha: f64,
    lambda: f64,
    edges: Vec<f64>,
    // Chebyshev coefficients, TABLE_NODES per panel
    coeffs: Vec<[f64; TABLE_NODES]>,
}

impl KernelTable {
    pub fn new(alpha: f64, lambda: f64, w_max: f64) -> Result<Self> {
        if !(alpha > 0.0 && alpha <= 1.0) {
            return domain(format!("alpha must lie in (0, 1], got {alpha}"));
        }
        if !(lambda >= 0.0 && lambda.is_finite()) {
            return domain(format!("lambda must be finite and nonnegative, got {lambda}"));
        }
        if !(w_max > 0.0 && w_max.is_finite()) {
            return domain(format!("kernel range must be positive, got {w_max}"));
        }
        let p = MLParams::new(alpha, alpha)?;
        let f = |w: f64| mittag_leffler_neg(p, -lambda * w);
        let mut table = Self {
            alpha,
            lambda,
            edges: vec![0.0],
            coeffs: Vec::new(),
        };
        if lambda == 0.0 {
            return Ok(table);
        }
        // split until each panel reproduces the function at its midpoints
        let mut stack = vec![(0.0, w_max)];
        let mut panels: Vec<(f64, f64, [f64; TABLE_NODES])> = Vec::new();
        while let Some((a, b)) = stack.pop() {
            let c = cheb_fit(&f, a, b)?;
            let mut worst: f64 = 0.0;
            for j in 0..TABLE_NODES {
                let x = a + (b - a) * (j as f64 + 0.5) / TABLE_NODES as f64;
                let v = f(x)?;
                worst = worst.max((cheb_eval(&c, a, b, x) - v).abs() / v.abs().max(1e-300));
            }
            if worst <= TABLE_TOL || b - a <= w_max * 1e-12 {
                panels.push((a, b, c));
            } else {
                let m = 0.5 * (a + b);
                stack.push((m, b));
                stack.push((a, m));
            }
        }
        panels.sort_by(|x, y| x.0.total_cmp(&y.0));
        for (_, b, c) in panels {
            table.edges.push(b);
            table.coeffs.push(c);
        }
        Ok(table)
    }

    pub fn eval(&self, w: f64) -> f64 {
        if self.lambda == 0.0 {
            return 1.0 / gamma_pos(self.alpha);
        }
        let i = self
            .edges
            .partition_point(|&e| e <= w)
            .clamp(1, self.coeffs.len());
        cheb_eval(&self.coeffs[i - 1], self.edges[i - 1], self.edges[i], w)
    }
}

fn cheb_fit(
    f: &impl Fn(f64) -> Result<f64>,
    a: f64,
    b: f64,
) -> Result<[f64; TABLE_NODES]> {
    let n = TABLE_NODES;
    let mut vals = [0.0; TABLE_NODES];
    for (j, v) in vals.iter_mut().enumerate() {
        let x = (PI * (j as f64 + 0.5) / n as f64).cos();
        *v = f(0.5 * (a + b) + 0.5 * (b - a) * x)?;
    }
    let mut c = [0.0; TABLE_NODES];
    for (k, ck) in c.iter_mut().enumerate() {
        let mut s = 0.0;
        for (j, v) in vals.iter().enumerate() {
            s += v * (PI * k as f64 * (j as f64 + 0.5) / n as f64).cos();
        }
        *ck = 2.0 * s / n as f64;
    }
    c[0] *= 0.5;
    Ok(c)
}

fn cheb_eval(c: &[f64; TABLE_NODES], a: f64, b: f64, w: f64) -> f64 {
    let x = ((2.0 * w - a - b) / (b - a)).clamp(-1.0, 1.0);
    let (mut b1, mut b2) = (0.0, 0.0);
    for &ck in c.iter().skip(1).rev() {
        let t = 2.0 * x * b1 - b2 + ck;
        b2 = b1;
        b1 = t;
    }
    x * b1 - b2 + c[0]
}

/// `(D_t^α + λ)^{-1} v(t)` for a general integrand, with `breakpoints`
/// marking where `v` is not smooth.
pub fn inverse_fractional_operator(
    alpha: f64,
    lambda: f64,
    v: impl Fn(f64) -> f64,
    breakpoints: &[f64],
    t: f64,
) -> Result<f64> {
    if !(t > 0.0 && t.is_finite()) {
        return domain(format!("time must be positive, got {t}"));
    }
    let kernel = KernelTable::new(alpha, lambda, t.powf(alpha))?;
    inverse_with_kernel(&kernel, v, breakpoints, t)
}

fn inverse_with_kernel(
    kernel: &KernelTable,
    v: impl Fn(f64) -> f64,
    breakpoints: &[f64],
    t: f64,
) -> Result<f64> {
    let alpha = kernel.alpha;
    let w_max = t.powf(alpha);
    let mut way: Vec<f64> = breakpoints
        .iter()
        .filter(|&&s| s > 0.0 && s < t)
        .map(|&s| (t - s).powf(alpha))
        .collect();
    way.extend(kernel.edges.iter().copied().filter(|&e| e > 0.0 && e < w_max));
    let panels = DEFAULT_MAX_PANELS + 4 * way.len();
    let req = QuadratureRequest::new(
        |w: f64, out: &mut [f64]| out[0] = kernel.eval(w) * v(t - w.powf(1.0 / alpha)),
        1,
        0.0,
        w_max,
    )
    .rel_tol(BOUND_REL_TOL)
    .waypoints(way)
    .max_panels(panels);
    Ok(integrate_adaptive(req)?.value[0] / alpha)
}

/// `(D_t^α + λ)^{-1}` applied to an envelope, at several times.
pub fn inverse_of_envelope(alpha: f64, lambda: f64, env: &Envelope, times: &[f64]) -> Result<Vec<f64>> {
    let Some(t_max) = times.iter().copied().reduce(f64::max) else {
        return Ok(Vec::new());
    };
    if t_max > env.end() * (1.0 + 4.0 * f64::EPSILON) {
        return domain(format!(
            "envelope covers (0, {}] but the bound is requested at t = {t_max}",
            env.end()
        ));
    }
    let kernel = KernelTable::new(alpha, lambda, t_max.powf(alpha))?;
    times
        .iter()
        .map(|&t| {
            if !(t > 0.0) {
                return domain(format!("time must be positive, got {t}"));
            }
            let v = |s: f64| env.eval(s);
            inverse_with_kernel(&kernel, v, env.times(), t)
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundTrace {
    pub times: Vec<f64>,
    pub residuals: Vec<f64>,
    pub bounds: Vec<f64>,
    pub errors: Option<Vec<f64>>,
}

impl BoundTrace {
    /// Times where the measured error exceeds the bound.
    pub fn violations(&self) -> Vec<(f64, f64, f64)> {
        let Some(errors) = &self.errors else { return Vec::new() };
        self.times
            .iter()
            .zip(&self.bounds)
            .zip(errors)
            .filter(|((_, b), e)| **e > **b)
            .map(|((t, b), e)| (*t, *e, *b))
            .collect()
    }

    pub fn to_csv(&self) -> String {
        let mut s = String::from("t,bound,error\n");
        for (i, (t, b)) in self.times.iter().zip(&self.bounds).enumerate() {
            let e = self
                .errors
                .as_ref()
                .map(|e| fmt_f64(e[i]))
                .unwrap_or_default();
            let _ = writeln!(s, "{},{},{e}", fmt_f64(*t), fmt_f64(*b));
        }
        s
    }
}

/// Resamples the residual of `sol` with `samples` points per interval and
/// evaluates the direct bound at every sample and node.
pub fn bound_trace(
    problem: &DiscreteProblem,
    sol: &TimeSolution,
    lambda: f64,
    omega: f64,
    norm: SpatialNorm,
    samples: usize,
) -> Result<BoundTrace> {
    if sol.intervals() == 0 {
        return Err(Error::Precondition("solution has no intervals".into()));
    }
    if !(omega >= 0.0) {
        return domain(format!("omega must be nonnegative, got {omega}"));
    }
    let alpha = problem.alpha();
    let mut grid = SamplingGrid::new(alpha, samples)?;
    grid.points.push(1.0);
    let probe = BarrierSpec::r0(0.0, 0.0, 1.0, norm);
    let r0 = problem.space.norm(norm, &(&problem.lu0 - problem.load(0.0)))?;
    let mut times = vec![0.0];
    let mut residuals = vec![r0];
    for k in 1..=sol.intervals() {
        for s in sample_residual(problem, sol, k, &grid, &probe)? {
            let t = if s.t_loc == 1.0 { sol.nodes()[k] } else { s.t };
            if t > *times.last().expect("non-empty") {
                times.push(t);
                residuals.push(s.norm);
            }
        }
    }
    let env = Envelope::new(times.clone(), residuals.clone())?;
    times.remove(0);
    residuals.remove(0);
    let bounds: Vec<f64> = inverse_of_envelope(alpha, lambda, &env, &times)?
        .into_iter()
        .map(|b| (1.0 + omega) * b)
        .collect();
    let errors = match problem.spec.exact {
        Some(_) => Some(
            times
                .iter()
                .map(|&t| {
                    let e = sol.value_at(t)? - problem.exact(t).expect("exact solution present");
                    problem.space.norm(norm, &e)
                })
                .collect::<Result<Vec<f64>>>()?,
        ),
        None => None,
    };
    Ok(BoundTrace {
        times,
        residuals,
        bounds,
        errors,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constant_input_without_reaction() {
        for &(a, t) in &[(0.4f64, 0.7f64), (0.9, 2.0), (0.1, 1e-3)] {
            let got = inverse_fractional_operator(a, 0.0, |_| 1.0, &[], t).unwrap();
            let want = t.powf(a) / gamma_pos(a + 1.0);
            assert!((got - want).abs() <= 1e-10 * want, "{a} {t}: {got} vs {want}");
        }
    }

    #[test]
    fn classical_resolvent() {
        let (lam, t) = (3.0f64, 0.8f64);
        let got = inverse_fractional_operator(1.0, lam, |_| 1.0, &[], t).unwrap();
        let want = -(-lam * t).exp_m1() / lam;
        assert!((got - want).abs() <= 1e-10 * want);
    }

    #[test]
    fn linear_input_power_rule() {
        let t = 0.6f64;
        let got = inverse_fractional_operator(0.5, 0.0, |s| s, &[], t).unwrap();
        let want = t.powf(1.5) / gamma_pos(2.5);
        assert!((got - want).abs() <= 1e-10 * want);
    }

    #[test]
    fn kernel_table_accuracy() {
        let p = MLParams::new(0.4, 0.4).unwrap();
        let table = KernelTable::new(0.4, 9.0, 2.0).unwrap();
        for i in 0..50 {
            let w = 2.0 * i as f64 / 49.0;
            let want = mittag_leffler_neg(p, -9.0 * w).unwrap();
            assert!((table.eval(w) - want).abs() <= 1e-10 * want.abs());
        }
    }

    #[test]
    fn envelope_interpolates_and_validates() {
        let e = Envelope::new(vec![0.0, 1.0, 3.0], vec![2.0, 0.0, 4.0]).unwrap();
        assert_eq!(e.eval(0.5), 1.0);
        assert_eq!(e.eval(2.0), 2.0);
        assert_eq!(e.eval(3.0), 4.0);
        assert!(Envelope::new(vec![0.1, 1.0], vec![0.0, 0.0]).is_err());
        assert!(Envelope::new(vec![0.0, 1.0], vec![-1.0, 0.0]).is_err());
        assert!(inverse_of_envelope(0.5, 0.0, &e, &[3.5]).is_err());
    }
}
