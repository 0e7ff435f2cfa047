//! Residual sampling and the residual barriers.
//!
//! On interval `k` the residual `R = D_t^α U + M⁻¹AU − F` is recovered
//! without applying the spatial operator: with `G = D_t^α U − F` and
//! Lagrange interpolation `I` through the interval's interpolation points,
//! `R = G − I[G] + Σ_i L_i R(t_i)`. The residual vanishes at every
//! enforcement point, so only an interpolation point at `t = 0` contributes,
//! with `R(0) − G(0) = L u₀`.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::caputo::TimeSolution;
use crate::error::{domain, Error, Result};
use crate::fem::{SpatialNorm, SpatialVector};
use crate::mesh::{fmt_f64, SamplingGrid};
use crate::method::MethodKind;
use crate::problem::DiscreteProblem;
use crate::special::gamma_pos;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum BarrierKind {
    #[default]
    R0,
    R1,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BarrierSpec {
    pub kind: BarrierKind,
    pub lambda: f64,
    pub omega: f64,
    /// Profile width of the `R1` barrier.
    pub tau_prof: Option<f64>,
    pub tol: f64,
    pub norm: SpatialNorm,
}

impl BarrierSpec {
    pub fn r0(lambda: f64, omega: f64, tol: f64, norm: SpatialNorm) -> Self {
        Self {
            kind: BarrierKind::R0,
            lambda,
            omega,
            tau_prof: None,
            tol,
            norm,
        }
    }

    pub fn r1(lambda: f64, omega: f64, tau_prof: Option<f64>, tol: f64, norm: SpatialNorm) -> Self {
        Self {
            kind: BarrierKind::R1,
            lambda,
            omega,
            tau_prof,
            tol,
            norm,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.lambda >= 0.0 && self.lambda.is_finite()) {
            return Err(Error::Config(format!("lambda must be >= 0, got {}", self.lambda)));
        }
        if !(self.omega >= 0.0 && self.omega.is_finite()) {
            return Err(Error::Config(format!("omega must be >= 0, got {}", self.omega)));
        }
        if self.omega > 0.0 && self.norm == SpatialNorm::L2 {
            return Err(Error::Config("omega > 0 is only valid with the max norm".into()));
        }
        if !(self.tol > 0.0 && self.tol.is_finite()) {
            return Err(Error::Config(format!("TOL must be positive, got {}", self.tol)));
        }
        if let Some(tp) = self.tau_prof {
            if !(tp > 0.0) {
                return Err(Error::Config(format!("tau_prof must be positive, got {tp}")));
            }
        }
        Ok(())
    }

    pub fn with_tau_prof(mut self, tau: f64) -> Self {
        self.tau_prof = Some(tau);
        self
    }

    /// Barrier value at `t > 0`.
    pub fn barrier(&self, alpha: f64, t: f64) -> Result<f64> {
        if !(t > 0.0) {
            return domain(format!("barrier needs t > 0, got {t}"));
        }
        if !(alpha > 0.0 && alpha < 1.0) {
            return domain(format!("alpha must lie in (0,1), got {alpha}"));
        }
        let rg = 1.0 / gamma_pos(1.0 - alpha);
        Ok(match self.kind {
            BarrierKind::R0 => rg * t.powf(-alpha) + self.lambda,
            BarrierKind::R1 => {
                let tp = self.tau_prof.ok_or_else(|| {
                    Error::Precondition("R1 barrier needs a profile width".into())
                })?;
                rg * profile(1.0 - alpha, tp / t) / t + self.lambda * tp.max(t).powf(alpha - 1.0)
            }
        })
    }

    /// `TOL·barrier(t)/(1 + ω)`.
    pub fn threshold(&self, alpha: f64, t: f64) -> Result<f64> {
        Ok(self.tol * self.barrier(alpha, t)? / (1.0 + self.omega))
    }
}

/// `ρ(s) = s^{−β}[1 − ((1 − s)⁺)^β]`.
pub fn profile(beta: f64, s: f64) -> f64 {
    if s < 1.0 {
        profile_inner(beta, s)
    } else {
        s.powf(-beta)
    }
}

/// Branch of `ρ` used for `s < 1`, defined on `(0, 1]`.
pub fn profile_inner(beta: f64, s: f64) -> f64 {
    s.powf(-beta) * -(beta * (-s).ln_1p()).exp_m1()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ResidualSample {
    pub t: f64,
    pub t_loc: f64,
    pub norm: f64,
    pub threshold: f64,
    pub pass: bool,
}

pub fn residual_csv(samples: &[(usize, ResidualSample)]) -> String {
    let mut s = String::from("interval,t,norm,threshold,pass\n");
    for (k, r) in samples {
        let _ = writeln!(
            s,
            "{k},{},{},{},{}",
            fmt_f64(r.t),
            fmt_f64(r.norm),
            fmt_f64(r.threshold),
            r.pass as u8
        );
    }
    s
}

/// `G = D_t^α U − F` at the node `t_j`, `j ≥ 1`.
pub(crate) fn node_defect(problem: &DiscreteProblem, sol: &TimeSolution, j: usize) -> Result<SpatialVector> {
    Ok(sol.eval_local(j, 1.0)? - problem.load(sol.nodes()[j]))
}

/// Interpolation points of interval `k` in local coordinates with the
/// correction values `V_i` (`−G(t_i)`, or `L u₀` at `t = 0`).
pub(crate) struct Correction {
    pub points: Vec<f64>,
    pub values: Vec<SpatialVector>,
}

impl Correction {
    pub(crate) fn build(
        problem: &DiscreteProblem,
        sol: &TimeSolution,
        k: usize,
        interior: &[(f64, SpatialVector)],
        node_defect_at: &mut dyn FnMut(usize) -> Result<SpatialVector>,
    ) -> Result<Self> {
        let mut points = Vec::new();
        let mut values = Vec::new();
        let mut push_node = |j: usize, s: f64, points: &mut Vec<f64>, values: &mut Vec<SpatialVector>| -> Result<()> {
            points.push(s);
            values.push(if j == 0 {
                problem.lu0.clone()
            } else {
                -node_defect_at(j)?
            });
            Ok(())
        };
        if sol.method().kind() == MethodKind::L12 && sol.degree(k) == 2 {
            let s = -sol.tau(k - 1) / sol.tau(k);
            push_node(k - 2, s, &mut points, &mut values)?;
        }
        push_node(k - 1, 0.0, &mut points, &mut values)?;
        for (c, g) in interior {
            points.push(*c);
            values.push(-g);
        }
        Ok(Self { points, values })
    }

    fn weights(&self, s: f64) -> Vec<f64> {
        let p = &self.points;
        (0..p.len())
            .map(|i| {
                let mut w = 1.0;
                for j in 0..p.len() {
                    if j != i {
                        w *= (s - p[j]) / (p[i] - p[j]);
                    }
                }
                w
            })
            .collect()
    }
}

/// Samples `‖R_h‖` on interval `k` at the grid points.
pub fn sample_residual(
    problem: &DiscreteProblem,
    sol: &TimeSolution,
    k: usize,
    grid: &SamplingGrid,
    barrier: &BarrierSpec,
) -> Result<Vec<ResidualSample>> {
    if k == 0 || k > sol.intervals() {
        return domain(format!("interval {k} not available"));
    }
    let pts: Vec<f64> = match (sol.method().kind(), sol.degree(k)) {
        (MethodKind::Coll, m) => (1..=m).map(|l| l as f64 / m as f64).collect(),
        _ => vec![1.0],
    };
    let mut interior = Vec::with_capacity(pts.len());
    for &c in &pts {
        let t = if c == 1.0 {
            sol.nodes()[k]
        } else {
            sol.nodes()[k - 1] + sol.tau(k) * c
        };
        interior.push((c, sol.eval_local(k, c)? - problem.load(t)));
    }
    let mut defect = |j: usize| node_defect(problem, sol, j);
    let corr = Correction::build(problem, sol, k, &interior, &mut defect)?;
    sample_with(problem, sol, k, grid, barrier, &corr)
}

pub(crate) fn sample_with(
    problem: &DiscreteProblem,
    sol: &TimeSolution,
    k: usize,
    grid: &SamplingGrid,
    barrier: &BarrierSpec,
    corr: &Correction,
) -> Result<Vec<ResidualSample>> {
    let t_prev = sol.nodes()[k - 1];
    let tau = sol.tau(k);
    let alpha = sol.alpha();
    let mut out = Vec::with_capacity(grid.points.len());
    for &s in &grid.points {
        let t = t_prev + tau * s;
        let mut r = sol.eval_local(k, s)? - problem.load(t);
        for (w, v) in corr.weights(s).into_iter().zip(&corr.values) {
            r.axpy(w, v, 1.0);
        }
        let norm = problem.space.norm_slice(barrier.norm, r.as_slice());
        if !norm.is_finite() {
            return Err(Error::Precondition(format!(
                "non-finite residual at t = {t} on interval {k}"
            )));
        }
        let threshold = barrier.threshold(alpha, t)?;
        out.push(ResidualSample {
            t,
            t_loc: s,
            norm,
            threshold,
            pass: norm <= threshold,
        });
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn r0_at_unit_time() {
        let b = BarrierSpec::r0(0.0, 0.0, 1.0, SpatialNorm::Linf);
        let v = b.barrier(0.5, 1.0).unwrap();
        assert!((v - 1.0 / PI.sqrt()).abs() < 1e-15);
        assert!(b.barrier(0.5, 0.0).is_err());
    }

    #[test]
    fn profile_values() {
        assert_eq!(profile(0.6, 1.0), 1.0);
        // 2^{−0.6}
        assert!((profile(0.6, 2.0) - 0.659_753_955_386_447_1).abs() < 1e-15);
        let b = BarrierSpec::r1(0.0, 0.0, Some(0.3), 1.0, SpatialNorm::Linf);
        let v = b.barrier(0.4, 0.3).unwrap();
        assert!((v - 1.0 / (0.3 * gamma_pos(0.6))).abs() < 1e-14);
    }

    #[test]
    fn r1_is_continuous_at_profile_width() {
        // the branch for t > τ_prof extended to s = 1 meets the other one
        for beta in [0.01, 0.6, 0.9] {
            let inside = profile_inner(beta, 1.0);
            assert!((inside - profile(beta, 1.0)).abs() <= 1e-12);
        }
        let b = BarrierSpec::r1(PI * PI, 0.0, Some(1e-3), 1.0, SpatialNorm::Linf);
        let at = b.barrier(0.4, 1e-3).unwrap();
        let mut last = f64::INFINITY;
        for e in [1e-4, 1e-8, 1e-12] {
            let gap = (b.barrier(0.4, 1e-3 * (1.0 + e)).unwrap() - at).abs() / at;
            assert!(gap < last);
            last = gap;
        }
    }

    #[test]
    fn omega_scales_threshold() {
        let a = BarrierSpec::r0(PI * PI, 0.0, 1e-3, SpatialNorm::Linf);
        let b = BarrierSpec::r0(PI * PI, PI * PI / 8.0, 1e-3, SpatialNorm::Linf);
        for t in [1e-6, 0.1, 1.0] {
            let ratio = b.threshold(0.4, t).unwrap() / a.threshold(0.4, t).unwrap();
            assert!((ratio * (1.0 + PI * PI / 8.0) - 1.0).abs() < 1e-15);
        }
    }

    #[test]
    fn validation() {
        assert!(BarrierSpec::r0(-1.0, 0.0, 1e-3, SpatialNorm::Linf).validate().is_err());
        assert!(BarrierSpec::r0(1.0, 0.5, 1e-3, SpatialNorm::L2).validate().is_err());
        assert!(BarrierSpec::r0(1.0, 0.0, 0.0, SpatialNorm::L2).validate().is_err());
        assert!(BarrierSpec::r1(1.0, 0.0, None, 1e-3, SpatialNorm::Linf).barrier(0.5, 1.0).is_err());
    }
}
