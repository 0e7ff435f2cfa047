//! One-interval solvers for L1, L1-2 and continuous collocation.
//!
//! The collocation equations are imposed in the weak finite element sense:
//! at every enforcement point `t = t_{k−1} + c·τ_k`
//!
//! ```text
//! M D_t^α U(t) + A U(t) = ∫ f(·, t) φ_i
//! ```
//!
//! where the Caputo derivative is split into the known history and the
//! current-interval part that is linear in the unknown coefficients.

use nalgebra::{DMatrix, DVector};

use crate::basis::{i_sing_unchecked, psi};
use crate::caputo::{HistoryKernel, TimeSolution};
use crate::error::{Error, Result};
use crate::fem::{SpatialNorm, SpatialVector};
use crate::mesh::TemporalMesh;
use crate::method::{MethodKind, MethodSpec};
use crate::problem::DiscreteProblem;

/// Caputo derivative and load at the enforcement points of a solved
/// interval, kept so that residual sampling can reuse them.
#[derive(Debug, Clone)]
pub struct EnforcementData {
    pub t_loc: Vec<f64>,
    pub caputo: Vec<SpatialVector>,
    pub load: Vec<SpatialVector>,
}

pub struct Stepper<'a> {
    problem: &'a DiscreteProblem,
    method: MethodSpec,
}

impl<'a> Stepper<'a> {
    pub fn new(problem: &'a DiscreteProblem, method: MethodSpec) -> Self {
        Self { problem, method }
    }

    pub fn method(&self) -> MethodSpec {
        self.method
    }

    pub fn problem(&self) -> &DiscreteProblem {
        self.problem
    }

    /// Fresh solution holding only the initial value.
    pub fn start(&self) -> Result<TimeSolution> {
        TimeSolution::new(self.method, self.problem.alpha(), &self.problem.u0)
    }

    /// Solves interval `k = sol.intervals() + 1` ending at `t_end` and
    /// appends it to `sol`.
    pub fn step(&self, sol: &mut TimeSolution, t_end: f64) -> Result<EnforcementData> {
        if sol.method() != self.method {
            return Err(Error::Precondition("solution and stepper use different methods".into()));
        }
        if sol.dim() != self.problem.space.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.problem.space.dim(),
                got: sol.dim(),
            });
        }
        let k = sol.intervals() + 1;
        let t_prev = sol.nodes()[k - 1];
        let tau = t_end - t_prev;
        if !(tau > 0.0) || !t_end.is_finite() {
            return Err(Error::Precondition(format!(
                "interval end {t_end} does not exceed previous node {t_prev}"
            )));
        }
        sol.counters().count_solve();
        let out = match (self.method.kind(), self.method.degree_on(k)) {
            (MethodKind::L12, 2) => self.step_l12(sol, k, t_end, tau)?,
            (_, m) => self.step_collocation(sol, k, m, t_end, tau)?,
        };
        Ok(out)
    }

    fn history(&self, sol: &TimeSolution, k: usize, tau: f64, c: f64) -> Result<SpatialVector> {
        let mut h = DVector::zeros(sol.dim());
        let mut kernel = HistoryKernel::new(sol.alpha());
        sol.history_into(k, tau, c, &mut kernel, h.as_mut_slice())?;
        Ok(h)
    }

    fn step_collocation(
        &self,
        sol: &mut TimeSolution,
        k: usize,
        m: usize,
        t_end: f64,
        tau: f64,
    ) -> Result<EnforcementData> {
        let space = &self.problem.space;
        let (mass, stiff) = (space.mass(), space.stiffness());
        let n = space.dim();
        let alpha = sol.alpha();
        let c_alpha = sol.recip_gamma();
        let scale = c_alpha * tau.powf(-alpha);
        let t_prev = sol.nodes()[k - 1];
        let u_prev = DVector::from_column_slice(sol.value_slice(k - 1));
        let m_u_prev = mass * &u_prev;
        let a_u_prev = stiff * &u_prev;

        let pts: Vec<f64> = (1..=m).map(|l| l as f64 / m as f64).collect();
        let mut system = DMatrix::zeros(m * n, m * n);
        let mut rhs = DVector::zeros(m * n);
        let mut histories = Vec::with_capacity(m);
        let mut loads = Vec::with_capacity(m);
        for (row, &c) in pts.iter().enumerate() {
            let h = self.history(sol, k, tau, c)?;
            let t = if row + 1 == m { t_end } else { t_prev + tau * c };
            let b = self.problem.load_vector(t);
            let mut r = &b - &(mass * &h) * c_alpha;
            let i0 = scale * i_sing_unchecked(0, m, alpha, c);
            let p0 = psi(0, m, c);
            r -= &m_u_prev * i0 + &a_u_prev * p0;
            rhs.rows_mut(row * n, n).copy_from(&r);
            for col in 0..m {
                let ell = col + 1;
                let wi = scale * i_sing_unchecked(ell, m, alpha, c);
                let wp = psi(ell, m, c);
                let mut blk = system.view_mut((row * n, col * n), (n, n));
                blk.zip_zip_apply(mass, stiff, |x, mv, av| *x = wi * mv + wp * av);
            }
            histories.push(h);
            loads.push(b);
        }
        let sol_vec = system
            .lu()
            .solve(&rhs)
            .ok_or(Error::SingularSystem { interval: k })?;
        if sol_vec.iter().any(|v| !v.is_finite()) {
            return Err(Error::SingularSystem { interval: k });
        }
        let blocks: Vec<SpatialVector> = (0..m)
            .map(|l| sol_vec.rows(l * n, n).into_owned())
            .collect();
        sol.push_interval(t_end, &blocks[..m - 1], &blocks[m - 1])?;

        let mut caputo = Vec::with_capacity(m);
        for (row, &c) in pts.iter().enumerate() {
            let mut d = histories[row].clone();
            d += &u_prev * (tau.powf(-alpha) * i_sing_unchecked(0, m, alpha, c));
            for (col, blk) in blocks.iter().enumerate() {
                d += blk * (tau.powf(-alpha) * i_sing_unchecked(col + 1, m, alpha, c));
            }
            caputo.push(d * c_alpha);
        }
        Ok(EnforcementData {
            t_loc: pts,
            caputo,
            load: loads.iter().map(|b| space.solve_mass(b)).collect(),
        })
    }

    fn step_l12(
        &self,
        sol: &mut TimeSolution,
        k: usize,
        t_end: f64,
        tau: f64,
    ) -> Result<EnforcementData> {
        let space = &self.problem.space;
        let (mass, stiff) = (space.mass(), space.stiffness());
        let alpha = sol.alpha();
        let c_alpha = sol.recip_gamma();
        let tau_prev = sol.tau(k - 1);
        let u1 = DVector::from_column_slice(sol.value_slice(k - 1));
        let u2 = DVector::from_column_slice(sol.value_slice(k - 2));
        // interior coefficient −τ_k² y_k = a·U_k + g
        let sum = tau + tau_prev;
        let a = -tau / sum;
        let g = &u1 * (tau / sum) + (&u1 - &u2) * (tau * tau / (tau_prev * sum));

        let (i0, i1, i2) = (
            i_sing_unchecked(0, 2, alpha, 1.0),
            i_sing_unchecked(1, 2, alpha, 1.0),
            i_sing_unchecked(2, 2, alpha, 1.0),
        );
        let scale = c_alpha * tau.powf(-alpha);
        let h = self.history(sol, k, tau, 1.0)?;
        let b = self.problem.load_vector(t_end);
        let known = &u1 * i0 + &g * i1;
        let rhs = &b - mass * (&h * c_alpha + &known * scale);
        let system = mass * (scale * (i2 + a * i1)) + stiff;
        let u_new = system
            .lu()
            .solve(&rhs)
            .ok_or(Error::SingularSystem { interval: k })?;
        if u_new.iter().any(|v| !v.is_finite()) {
            return Err(Error::SingularSystem { interval: k });
        }
        let interior = &u_new * a + &g;
        let caputo = (&h + (&u1 * i0 + &interior * i1 + &u_new * i2) * tau.powf(-alpha)) * c_alpha;
        sol.push_interval(t_end, &[interior], &u_new)?;
        Ok(EnforcementData {
            t_loc: vec![1.0],
            caputo: vec![caputo],
            load: vec![space.solve_mass(&b)],
        })
    }
}

/// Norms of the directly evaluated residual `D_t^α U + M⁻¹AU − F` at the
/// enforcement points of interval `k`.
pub fn residual_at_enforcement_points(
    problem: &DiscreteProblem,
    sol: &TimeSolution,
    k: usize,
    norm: SpatialNorm,
) -> Result<Vec<f64>> {
    let pts: Vec<f64> = match (sol.method().kind(), sol.degree(k)) {
        (MethodKind::Coll, m) => (1..=m).map(|l| l as f64 / m as f64).collect(),
        _ => vec![1.0],
    };
    let t_prev = sol.nodes()[k - 1];
    let tau = sol.tau(k);
    pts.iter()
        .map(|&c| {
            let t = if c == 1.0 { sol.nodes()[k] } else { t_prev + tau * c };
            let u = sol.value_local(k, c);
            let r = sol.eval_local(k, c)? + problem.space.apply_operator(&u) - problem.load(t);
            problem.space.norm(norm, &r)
        })
        .collect()
}

/// Runs the method on a prescribed mesh.
pub fn solve_on_mesh(
    problem: &DiscreteProblem,
    method: MethodSpec,
    mesh: &TemporalMesh,
) -> Result<TimeSolution> {
    let stepper = Stepper::new(problem, method);
    let mut sol = stepper.start()?;
    for &t in &mesh.nodes()[1..] {
        stepper.step(&mut sol, t)?;
    }
    Ok(sol)
}
