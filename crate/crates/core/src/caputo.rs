//! Piecewise-polynomial time solutions and the stable evaluation of their
//! Caputo derivative.
//!
//! Every representation is stored in the hierarchical basis: on interval
//! `j` the solution is `Σ_ℓ U_j^ℓ ψˡ(σ)`, `σ = (t − t_{j−1})/τ_j`. L1 has
//! degree one, collocation degree `m`, and L1-2 degree two from the second
//! interval on with the single interior coefficient `−τ_j² y_j`.
//!
//! For `t` in interval `k` the Caputo integral splits into a history part
//! over intervals `j < k` and a singular part over interval `k`. A history
//! term is
//!
//! ```text
//! ∫ ∂u (t − s)^{−α} ds = S_j/((1 − α) τ_j) · W_j + d^{−α} Σ_interior Q_ℓ(r) U_j^ℓ
//! ```
//!
//! with `d = t − t_{j−1}`, `r = τ_j/d`, `S_j = −d^{1−α} expm1((1−α) log1p(−r))`,
//! `W_j = τ_j ∂u(t_j⁻)` and `Q_ℓ(r) = ∫₀¹ [∂ψˡ(σ) − ∂ψˡ(1)] (1 − rσ)^{−α} dσ`.
//! All times are handled relative to the current interval so that steps
//! many orders of magnitude apart do not cancel.

use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::Arc;

use nalgebra::DVector;
use serde::{Deserialize, Serialize};

use crate::basis::{history_moment, i_sing_unchecked, psi};
use crate::error::{domain, Error, Result};
use crate::fem::SpatialVector;
use crate::method::{MethodKind, MethodSpec};
use crate::quadrature::{integrate_adaptive, QuadratureRequest};
use crate::special::{gamma_pos, power_diff_unchecked};

/// History remainders with `r` at or below this use the binomial series.
const SERIES_RADIUS: f64 = 0.5;
const REMAINDER_REL_TOL: f64 = 1e-12;
const REMAINDER_WAYPOINTS: [f64; 3] = [0.5, 0.9, 0.99];

#[derive(Debug, Default)]
pub struct EvalCounters {
    caputo_evals: AtomicU64,
    history_terms: AtomicU64,
    quadrature_calls: AtomicU64,
    interval_solves: AtomicU64,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct EvalCounts {
    pub caputo_evals: u64,
    pub history_terms: u64,
    pub quadrature_calls: u64,
    pub interval_solves: u64,
}

impl EvalCounters {
    pub fn snapshot(&self) -> EvalCounts {
        EvalCounts {
            caputo_evals: self.caputo_evals.load(Ordering::Relaxed),
            history_terms: self.history_terms.load(Ordering::Relaxed),
            quadrature_calls: self.quadrature_calls.load(Ordering::Relaxed),
            interval_solves: self.interval_solves.load(Ordering::Relaxed),
        }
    }

    pub(crate) fn count_solve(&self) {
        self.interval_solves.fetch_add(1, Ordering::Relaxed);
    }
}

/// Continuous piecewise-polynomial solution `u_h` built interval by interval.
#[derive(Debug, Clone)]
pub struct TimeSolution {
    method: MethodSpec,
    alpha: f64,
    dim: usize,
    recip_gamma: f64,
    nodes: Vec<f64>,
    // nodal values U_0..U_k, flat
    values: Vec<f64>,
    // W_j = U_j^m − U_j^0 − Σ interior, flat, one block per interval
    slopes: Vec<f64>,
    // interior hierarchical coefficients, flat
    interior: Vec<f64>,
    // block offset of interval j's interior coefficients, len = intervals + 1
    interior_start: Vec<usize>,
    // L1-2 divided differences, one per interval (None on the first)
    y: Vec<Option<SpatialVector>>,
    counters: Arc<EvalCounters>,
}

impl TimeSolution {
    pub fn new(method: MethodSpec, alpha: f64, u0: &SpatialVector) -> Result<Self> {
        if !(alpha > 0.0 && alpha < 1.0) {
            return domain(format!("alpha must lie in (0,1), got {alpha}"));
        }
        if u0.iter().any(|v| !v.is_finite()) {
            return Err(Error::Precondition("initial value is not finite".into()));
        }
        Ok(Self {
            method,
            alpha,
            dim: u0.len(),
            recip_gamma: 1.0 / gamma_pos(1.0 - alpha),
            nodes: vec![0.0],
            values: u0.as_slice().to_vec(),
            slopes: Vec::new(),
            interior: Vec::new(),
            interior_start: vec![0],
            y: Vec::new(),
            counters: Arc::new(EvalCounters::default()),
        })
    }

    pub fn method(&self) -> MethodSpec {
        self.method
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    /// Number of completed intervals.
    pub fn intervals(&self) -> usize {
        self.nodes.len() - 1
    }

    pub fn tau(&self, k: usize) -> f64 {
        self.nodes[k] - self.nodes[k - 1]
    }

    pub fn counters(&self) -> &Arc<EvalCounters> {
        &self.counters
    }

    pub fn degree(&self, k: usize) -> usize {
        self.interior_start[k] - self.interior_start[k - 1] + 1
    }

    fn block<'a>(&self, buf: &'a [f64], i: usize) -> &'a [f64] {
        &buf[i * self.dim..(i + 1) * self.dim]
    }

    /// Nodal value `U_k`.
    pub fn value(&self, k: usize) -> SpatialVector {
        DVector::from_column_slice(self.block(&self.values, k))
    }

    pub(crate) fn value_slice(&self, k: usize) -> &[f64] {
        self.block(&self.values, k)
    }

    /// Hierarchical coefficients `U_k^0..U_k^m` of interval `k`.
    pub fn coefficients(&self, k: usize) -> Vec<SpatialVector> {
        let mut out = vec![self.value(k - 1)];
        for b in self.interior_start[k - 1]..self.interior_start[k] {
            out.push(DVector::from_column_slice(self.block(&self.interior, b)));
        }
        out.push(self.value(k));
        out
    }

    /// Stored L1-2 second divided difference `y_k` (None for other methods
    /// and on the first interval).
    pub fn y(&self, k: usize) -> Option<&SpatialVector> {
        self.y.get(k - 1).and_then(|v| v.as_ref())
    }

    /// Appends interval `(t_{k−1}, t_end]` with the given interior
    /// hierarchical coefficients and end value.
    pub fn push_interval(
        &mut self,
        t_end: f64,
        interior: &[SpatialVector],
        end: &SpatialVector,
    ) -> Result<()> {
        let k = self.intervals() + 1;
        let last = *self.nodes.last().expect("non-empty");
        if !(t_end > last) || !t_end.is_finite() {
            return Err(Error::Precondition(format!(
                "interval end {t_end} does not exceed previous node {last}"
            )));
        }
        let degree = interior.len() + 1;
        if degree != self.method.degree_on(k) {
            return Err(Error::Precondition(format!(
                "interval {k} needs degree {}, got {degree}",
                self.method.degree_on(k)
            )));
        }
        for v in interior.iter().chain(std::iter::once(end)) {
            if v.len() != self.dim {
                return Err(Error::DimensionMismatch {
                    expected: self.dim,
                    got: v.len(),
                });
            }
        }
        let tau = t_end - last;
        let start = self.slopes.len();
        self.slopes.extend_from_slice(end.as_slice());
        let prev = (self.values.len() - self.dim)..self.values.len();
        for (i, p) in prev.enumerate() {
            self.slopes[start + i] -= self.values[p];
        }
        for v in interior {
            for i in 0..self.dim {
                self.slopes[start + i] -= v[i];
            }
            self.interior.extend_from_slice(v.as_slice());
        }
        self.values.extend_from_slice(end.as_slice());
        self.interior_start
            .push(self.interior_start[k - 1] + interior.len());
        self.nodes.push(t_end);
        let y = match (self.method.kind(), interior.first()) {
            (MethodKind::L12, Some(c)) => Some(c * (-1.0 / (tau * tau))),
            _ => None,
        };
        self.y.push(y);
        Ok(())
    }

    /// Removes the last interval.
    pub fn pop_interval(&mut self) -> Option<()> {
        let k = self.intervals();
        if k == 0 {
            return None;
        }
        self.nodes.pop();
        self.values.truncate(k * self.dim);
        self.slopes.truncate((k - 1) * self.dim);
        self.interior_start.pop();
        self.interior
            .truncate(self.interior_start[k - 1] * self.dim);
        self.y.pop();
        Some(())
    }

    /// Interval containing `t`, i.e. `t ∈ (t_{k−1}, t_k]`.
    pub fn locate(&self, t: f64) -> Result<usize> {
        let end = *self.nodes.last().expect("non-empty");
        if !(t > 0.0 && t <= end) {
            return domain(format!("time {t} outside (0, {end}]"));
        }
        Ok(self.nodes.partition_point(|&x| x < t).max(1))
    }

    /// `u_h(t)`.
    pub fn value_at(&self, t: f64) -> Result<SpatialVector> {
        if t == 0.0 {
            return Ok(self.value(0));
        }
        let k = self.locate(t)?;
        let t_loc = (t - self.nodes[k - 1]) / self.tau(k);
        Ok(self.value_local(k, t_loc))
    }

    pub fn value_local(&self, k: usize, t_loc: f64) -> SpatialVector {
        let m = self.degree(k);
        let mut out = DVector::zeros(self.dim);
        let (p0, pm) = (psi(0, m, t_loc), psi(m, m, t_loc));
        let (a, b) = (self.block(&self.values, k - 1), self.block(&self.values, k));
        for i in 0..self.dim {
            out[i] = p0 * a[i] + pm * b[i];
        }
        for (l, blk) in (self.interior_start[k - 1]..self.interior_start[k]).enumerate() {
            let c = psi(l + 1, m, t_loc);
            let v = self.block(&self.interior, blk);
            for i in 0..self.dim {
                out[i] += c * v[i];
            }
        }
        out
    }

    /// `D_t^α u_h(t)` for `t ∈ (0, T]`.
    pub fn eval_caputo(&self, t: f64) -> Result<SpatialVector> {
        let k = self.locate(t)?;
        let t_loc = (t - self.nodes[k - 1]) / self.tau(k);
        self.eval_local(k, t_loc)
    }

    /// `D_t^α u_h` at `t_{k−1} + τ_k·t_loc`, `t_loc ∈ (0, 1]`.
    pub fn eval_local(&self, k: usize, t_loc: f64) -> Result<SpatialVector> {
        if k == 0 || k > self.intervals() {
            return domain(format!("interval {k} not available"));
        }
        if !(t_loc > 0.0 && t_loc <= 1.0) {
            return domain(format!("local time must lie in (0,1], got {t_loc}"));
        }
        let mut out = DVector::zeros(self.dim);
        let mut kernel = HistoryKernel::new(self.alpha);
        let tau = self.tau(k);
        self.history_into(k, tau, t_loc, &mut kernel, out.as_mut_slice())?;
        self.singular_into(k, tau, t_loc, 1.0, out.as_mut_slice());
        out *= self.recip_gamma;
        Ok(out)
    }

    /// Caputo values at the interval's reference points `c_0..c_m`; the
    /// first entry is the value at `t_{k−1}` (zero at `t = 0`).
    pub fn caputo_at_nodes(&self, k: usize) -> Result<Vec<SpatialVector>> {
        let pts = self.method.collocation_points();
        let pts: Vec<f64> = if self.degree(k) == pts.len() - 1 {
            pts
        } else {
            vec![0.0, 1.0]
        };
        let mut out = Vec::with_capacity(pts.len());
        out.push(if k == 1 {
            DVector::zeros(self.dim)
        } else {
            self.eval_local(k - 1, 1.0)?
        });
        for &c in &pts[1..] {
            out.push(self.eval_local(k, c)?);
        }
        Ok(out)
    }

    /// Adds the unscaled history sum (intervals `1..k−1`) for the point
    /// `t_{k−1} + tau·t_loc` into `out`. The interval `k` itself need not
    /// exist yet; only `tau` is used.
    pub(crate) fn history_into(
        &self,
        k: usize,
        tau: f64,
        t_loc: f64,
        kernel: &mut HistoryKernel,
        out: &mut [f64],
    ) -> Result<()> {
        self.counters.caputo_evals.fetch_add(1, Ordering::Relaxed);
        if k <= 1 {
            return Ok(());
        }
        let alpha = self.alpha;
        let beta = 1.0 - alpha;
        let t_prev = self.nodes[k - 1];
        let shift = tau * t_loc;
        let dim = self.dim;
        let mut quad_calls = 0u64;
        for j in 1..k {
            let tj = self.nodes[j - 1];
            let tau_j = self.nodes[j] - tj;
            let d = (t_prev - tj) + shift;
            let r = tau_j / d;
            let d_pow = (-alpha * d.ln()).exp();
            // −expm1(β log1p(−r)) / (β r), the mean of (1 − rσ)^{−α} over σ
            let mean = -(beta * (-r).ln_1p()).exp_m1() / (beta * r);
            let c = d_pow * mean;
            let w = self.block(&self.slopes, j - 1);
            for i in 0..dim {
                out[i] += c * w[i];
            }
            let (lo, hi) = (self.interior_start[j - 1], self.interior_start[j]);
            if hi > lo {
                let n_int = hi - lo;
                let q = kernel
                    .remainder(r, n_int, &mut quad_calls)
                    .map_err(|e| Error::History {
                        interval: j,
                        source: Box::new(e),
                    })?;
                for (l, blk) in (lo..hi).enumerate() {
                    let cq = d_pow * q[l];
                    let v = self.block(&self.interior, blk);
                    for i in 0..dim {
                        out[i] += cq * v[i];
                    }
                }
            }
        }
        self.counters
            .history_terms
            .fetch_add((k - 1) as u64, Ordering::Relaxed);
        if quad_calls > 0 {
            self.counters
                .quadrature_calls
                .fetch_add(quad_calls, Ordering::Relaxed);
        }
        Ok(())
    }

    /// Adds `scale·τ_k^{−α} Σ_ℓ Î^ℓ(t_loc) U_k^ℓ` for a stored interval.
    fn singular_into(&self, k: usize, tau: f64, t_loc: f64, scale: f64, out: &mut [f64]) {
        let m = self.degree(k);
        let s = scale * tau.powf(-self.alpha);
        let edge = s * i_sing_unchecked(m, m, self.alpha, t_loc);
        let (a, b) = (self.block(&self.values, k - 1), self.block(&self.values, k));
        for i in 0..self.dim {
            out[i] += edge * (b[i] - a[i]);
        }
        for (l, blk) in (self.interior_start[k - 1]..self.interior_start[k]).enumerate() {
            let c = s * i_sing_unchecked(l + 1, m, self.alpha, t_loc);
            let v = self.block(&self.interior, blk);
            for i in 0..self.dim {
                out[i] += c * v[i];
            }
        }
    }

    pub(crate) fn recip_gamma(&self) -> f64 {
        self.recip_gamma
    }
}

/// Evaluates the history remainders `Q_ℓ(r)` for interior indices.
#[derive(Debug, Clone)]
pub(crate) struct HistoryKernel {
    alpha: f64,
    buf: Vec<f64>,
}

impl HistoryKernel {
    pub(crate) fn new(alpha: f64) -> Self {
        Self {
            alpha,
            buf: Vec::new(),
        }
    }

    /// `Q_ℓ(r)` for ℓ = 1..=n.
    pub(crate) fn remainder(&mut self, r: f64, n: usize, calls: &mut u64) -> Result<&[f64]> {
        self.buf.clear();
        self.buf.resize(n, 0.0);
        if r <= SERIES_RADIUS {
            series_remainder(self.alpha, r, &mut self.buf);
            return Ok(&self.buf);
        }
        *calls += 1;
        let alpha = self.alpha;
        let integrand = |s: f64, out: &mut [f64]| {
            let w = (-alpha * (-r * s).ln_1p()).exp();
            let mut sp = 1.0; // σ^{ℓ−1}
            for (l, o) in out.iter_mut().enumerate() {
                let ell = (l + 1) as f64;
                let next = sp * s;
                *o = (ell * sp * (1.0 - s) - next + 1.0) * w;
                sp = next;
            }
        };
        let req = QuadratureRequest::new(integrand, n, 0.0, 1.0)
            .rel_tol(REMAINDER_REL_TOL)
            .waypoints(REMAINDER_WAYPOINTS.to_vec());
        let res = integrate_adaptive(req)?;
        self.buf.copy_from_slice(&res.value);
        Ok(&self.buf)
    }
}

/// `Q_ℓ(r) = Σ_n (α)_n/n! rⁿ ∫₀¹ [∂ψˡ − ∂ψˡ(1)] σⁿ dσ` for `r ≤ 1/2`.
fn series_remainder(alpha: f64, r: f64, out: &mut [f64]) {
    out.iter_mut().for_each(|o| *o = 0.0);
    let mut c = 1.0;
    let mut n = 0usize;
    loop {
        for (l, o) in out.iter_mut().enumerate() {
            *o += c * history_moment(l + 1, n);
        }
        c *= (alpha + n as f64) / (n + 1) as f64 * r;
        n += 1;
        if c < 1e-17 || n > 200 {
            break;
        }
    }
}

/// `(t − s)^{1−α}` difference kernel of the L1 scheme, exposed for tests:
/// `∫_{t_{j−1}}^{t_j} (t − s)^{−α} ds` computed stably.
pub fn l1_history_weight(alpha: f64, t: f64, t_lo: f64, t_hi: f64) -> Result<f64> {
    if !(t_lo < t_hi && t_hi <= t) {
        return domain(format!("need t_lo < t_hi <= t, got {t_lo}, {t_hi}, {t}"));
    }
    let beta = 1.0 - alpha;
    Ok(-power_diff_unchecked(t - t_lo, t - t_hi, beta) / beta)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quadrature::integrate_scalar;

    fn vec1(x: f64) -> SpatialVector {
        DVector::from_element(1, x)
    }

    #[test]
    fn linear_single_interval() {
        let a = 0.3;
        let tau = 0.8;
        let c = 1.7;
        let mut sol = TimeSolution::new(MethodSpec::l1(), a, &vec1(0.0)).unwrap();
        sol.push_interval(tau, &[], &vec1(c * tau)).unwrap();
        for t in [1e-9, 0.1, 0.5, 0.8] {
            let got = sol.eval_caputo(t).unwrap()[0];
            let want = c * t.powf(1.0 - a) / gamma_pos(2.0 - a);
            assert!((got - want).abs() <= 1e-14 * want.abs(), "{got} vs {want}");
        }
    }

    #[test]
    fn constant_solution_has_zero_derivative() {
        for method in [MethodSpec::l1(), MethodSpec::l12(), MethodSpec::collocation(4).unwrap()] {
            let u = DVector::from_vec(vec![0.3, -1.2]);
            let mut sol = TimeSolution::new(method, 0.6, &u).unwrap();
            for (k, t) in [0.1, 0.35, 0.7, 1.0].into_iter().enumerate() {
                let deg = method.degree_on(k + 1);
                let interior = vec![DVector::zeros(2); deg - 1];
                sol.push_interval(t, &interior, &u).unwrap();
            }
            for t in [0.05, 0.2, 0.5, 1.0] {
                assert!(sol.eval_caputo(t).unwrap().amax() < 1e-15);
            }
        }
    }

    #[test]
    fn series_matches_quadrature() {
        for &alpha in &[0.1, 0.5, 0.99] {
            for &r in &[1e-8, 0.1, 0.3, 0.5] {
                let mut out = vec![0.0; 7];
                series_remainder(alpha, r, &mut out);
                for (l, q) in out.iter().enumerate() {
                    let ell = (l + 1) as i32;
                    let e = ell as f64;
                    let f = |s: f64| {
                        (e * s.powi(ell - 1) * (1.0 - s) - s.powi(ell) + 1.0)
                            * (1.0 - r * s).powf(-alpha)
                    };
                    let want = integrate_scalar(f, 0.0, 1.0, 1e-14, &[]).unwrap();
                    assert!((q - want).abs() < 1e-14 * want, "{alpha} {r} {l}");
                }
            }
        }
    }

    #[test]
    fn push_pop_restores_state() {
        let m = MethodSpec::collocation(3).unwrap();
        let mut sol = TimeSolution::new(m, 0.4, &vec1(1.0)).unwrap();
        let int = [vec1(0.2), vec1(-0.1)];
        sol.push_interval(0.5, &int, &vec1(2.0)).unwrap();
        let snapshot = sol.clone();
        sol.push_interval(1.0, &int, &vec1(3.0)).unwrap();
        sol.pop_interval().unwrap();
        assert_eq!(sol.nodes(), snapshot.nodes());
        assert_eq!(sol.values, snapshot.values);
        assert_eq!(sol.interior, snapshot.interior);
        assert_eq!(sol.slopes, snapshot.slopes);
    }

    #[test]
    fn push_validates_degree_and_time() {
        let mut sol = TimeSolution::new(MethodSpec::l12(), 0.4, &vec1(1.0)).unwrap();
        assert!(sol.push_interval(0.5, &[vec1(0.0)], &vec1(1.0)).is_err());
        sol.push_interval(0.5, &[], &vec1(1.0)).unwrap();
        assert!(sol.push_interval(0.4, &[vec1(0.0)], &vec1(1.0)).is_err());
        assert!(sol.push_interval(0.9, &[], &vec1(1.0)).is_err());
        sol.push_interval(0.9, &[vec1(0.08)], &vec1(1.0)).unwrap();
        assert!((sol.y(2).unwrap()[0] + 0.08 / 0.16).abs() < 1e-15);
        assert!(sol.y(1).is_none());
    }

    #[test]
    fn eval_outside_range_is_domain_error() {
        let mut sol = TimeSolution::new(MethodSpec::l1(), 0.4, &vec1(1.0)).unwrap();
        sol.push_interval(1.0, &[], &vec1(1.0)).unwrap();
        assert!(sol.eval_caputo(0.0).is_err());
        assert!(sol.eval_caputo(1.5).is_err());
        assert!(sol.eval_local(2, 0.5).is_err());
    }

    #[test]
    fn l1_weight_is_stable() {
        let w = l1_history_weight(0.5, 1.0, 0.0, 1.0).unwrap();
        assert!((w - 2.0).abs() < 1e-15);
    }
}
