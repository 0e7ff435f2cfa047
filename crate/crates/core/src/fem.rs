//! Piecewise-quadratic Lagrange finite elements on a uniform grid of
//! `(0, x̄)` with homogeneous Dirichlet conditions, for `L = -∂²ₓ`.
//!
//! Interior degrees of freedom are ordered by coordinate: dof `i` sits at
//! `x = (i + 1)·h/2`, so element `e` couples global nodes `2e, 2e+1, 2e+2`
//! and the two boundary nodes are eliminated.

use nalgebra::{Cholesky, DMatrix, DVector, Dyn};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type SpatialVector = DVector<f64>;

/// Norm used for residuals and errors.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum SpatialNorm {
    L2,
    #[default]
    Linf,
}

const MASS_REF: [[f64; 3]; 3] = [[4.0, 2.0, -1.0], [2.0, 16.0, 2.0], [-1.0, 2.0, 4.0]];
const STIFF_REF: [[f64; 3]; 3] = [[7.0, -8.0, 1.0], [-8.0, 16.0, -8.0], [1.0, -8.0, 7.0]];

// 5-point Gauss-Legendre on [0, 1]
const GAUSS5_X: [f64; 5] = [
    0.046_910_077_030_668_004,
    0.230_765_344_947_158_45,
    0.5,
    0.769_234_655_052_841_6,
    0.953_089_922_969_332,
];
const GAUSS5_W: [f64; 5] = [
    0.118_463_442_528_094_54,
    0.239_314_335_249_683_23,
    0.284_444_444_444_444_45,
    0.239_314_335_249_683_23,
    0.118_463_442_528_094_54,
];

/// Points per element used by the discrete max norm (element ends included).
pub const LINF_POINTS_PER_CELL: usize = 11;

#[inline]
fn shape(xi: f64) -> [f64; 3] {
    [
        2.0 * (xi - 0.5) * (xi - 1.0),
        4.0 * xi * (1.0 - xi),
        2.0 * xi * (xi - 0.5),
    ]
}

#[derive(Debug, Clone)]
pub struct SpatialDiscretization {
    xbar: f64,
    n_cells: usize,
    h: f64,
    coords: Vec<f64>,
    mass: DMatrix<f64>,
    stiffness: DMatrix<f64>,
    mass_chol: Cholesky<f64, Dyn>,
    stiff_chol: Cholesky<f64, Dyn>,
}

impl SpatialDiscretization {
    pub fn assemble(xbar: f64, n_cells: usize) -> Result<Self> {
        if n_cells < 2 {
            return Err(Error::Precondition(format!("need at least 2 cells, got {n_cells}")));
        }
        if !(xbar > 0.0 && xbar.is_finite()) {
            return Err(Error::Precondition(format!("interval length must be positive, got {xbar}")));
        }
        let h = xbar / n_cells as f64;
        let n = 2 * n_cells - 1;
        let mut mass = DMatrix::zeros(n, n);
        let mut stiffness = DMatrix::zeros(n, n);
        for e in 0..n_cells {
            for a in 0..3 {
                let Some(i) = interior(2 * e + a, n_cells) else { continue };
                for b in 0..3 {
                    let Some(j) = interior(2 * e + b, n_cells) else { continue };
                    mass[(i, j)] += h / 30.0 * MASS_REF[a][b];
                    stiffness[(i, j)] += STIFF_REF[a][b] / (3.0 * h);
                }
            }
        }
        let coords = (1..=n).map(|i| i as f64 * 0.5 * h).collect();
        let mass_chol = Cholesky::new(mass.clone())
            .ok_or_else(|| Error::Precondition("mass matrix is not positive definite".into()))?;
        let stiff_chol = Cholesky::new(stiffness.clone())
            .ok_or_else(|| Error::Precondition("stiffness matrix is not positive definite".into()))?;
        Ok(Self {
            xbar,
            n_cells,
            h,
            coords,
            mass,
            stiffness,
            mass_chol,
            stiff_chol,
        })
    }

    pub fn dim(&self) -> usize {
        self.coords.len()
    }

    pub fn xbar(&self) -> f64 {
        self.xbar
    }

    pub fn n_cells(&self) -> usize {
        self.n_cells
    }

    pub fn coords(&self) -> &[f64] {
        &self.coords
    }

    pub fn mass(&self) -> &DMatrix<f64> {
        &self.mass
    }

    pub fn stiffness(&self) -> &DMatrix<f64> {
        &self.stiffness
    }

    /// Nodal interpolation at the interior dofs.
    pub fn interpolate(&self, f: impl Fn(f64) -> f64) -> SpatialVector {
        DVector::from_iterator(self.dim(), self.coords.iter().map(|&x| f(x)))
    }

    /// Load vector `∫ f φ_i dx` with 5-point Gauss per element.
    ///
    /// `f` may be nonzero on the boundary; only interior test functions are
    /// used.
    pub fn load(&self, f: impl Fn(f64) -> f64) -> SpatialVector {
        let mut b = DVector::zeros(self.dim());
        for e in 0..self.n_cells {
            let x0 = e as f64 * self.h;
            let mut acc = [0.0; 3];
            for (xi, w) in GAUSS5_X.iter().zip(GAUSS5_W) {
                let fx = f(x0 + xi * self.h) * w * self.h;
                let phi = shape(*xi);
                for a in 0..3 {
                    acc[a] += fx * phi[a];
                }
            }
            for (a, v) in acc.iter().enumerate() {
                if let Some(i) = interior(2 * e + a, self.n_cells) {
                    b[i] += v;
                }
            }
        }
        b
    }

    /// L2 projection onto the discrete space: `M⁻¹ ∫ f φ_i`.
    pub fn project(&self, f: impl Fn(f64) -> f64) -> SpatialVector {
        self.solve_mass(&self.load(f))
    }

    pub fn solve_mass(&self, b: &SpatialVector) -> SpatialVector {
        self.mass_chol.solve(b)
    }

    pub fn solve_stiffness(&self, b: &SpatialVector) -> SpatialVector {
        self.stiff_chol.solve(b)
    }

    /// Discrete `L v` as a function in the FE space: `M⁻¹ A v`.
    pub fn apply_operator(&self, v: &SpatialVector) -> SpatialVector {
        self.solve_mass(&(&self.stiffness * v))
    }

    fn check(&self, v: &SpatialVector) -> Result<()> {
        if v.len() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                got: v.len(),
            });
        }
        Ok(())
    }

    pub fn l2_norm(&self, v: &SpatialVector) -> Result<f64> {
        self.check(v)?;
        Ok(self.l2_unchecked(v.as_slice()))
    }

    pub fn linf_norm(&self, v: &SpatialVector) -> Result<f64> {
        self.check(v)?;
        Ok(self.linf_unchecked(v.as_slice()))
    }

    pub fn norm(&self, kind: SpatialNorm, v: &SpatialVector) -> Result<f64> {
        match kind {
            SpatialNorm::L2 => self.l2_norm(v),
            SpatialNorm::Linf => self.linf_norm(v),
        }
    }

    pub(crate) fn norm_slice(&self, kind: SpatialNorm, v: &[f64]) -> f64 {
        debug_assert_eq!(v.len(), self.dim());
        match kind {
            SpatialNorm::L2 => self.l2_unchecked(v),
            SpatialNorm::Linf => self.linf_unchecked(v),
        }
    }

    fn l2_unchecked(&self, v: &[f64]) -> f64 {
        let n = v.len();
        let mut s = 0.0;
        for j in 0..n {
            let mut row = 0.0;
            let lo = j.saturating_sub(2);
            let hi = (j + 3).min(n);
            for (i, vi) in v.iter().enumerate().take(hi).skip(lo) {
                row += self.mass[(i, j)] * vi;
            }
            s += row * v[j];
        }
        s.max(0.0).sqrt()
    }

    fn linf_unchecked(&self, v: &[f64]) -> f64 {
        let mut best = 0.0f64;
        for e in 0..self.n_cells {
            let nodal = self.element_values(v, e);
            for j in 0..LINF_POINTS_PER_CELL {
                let phi = shape(j as f64 / (LINF_POINTS_PER_CELL - 1) as f64);
                let val = nodal[0] * phi[0] + nodal[1] * phi[1] + nodal[2] * phi[2];
                best = best.max(val.abs());
            }
        }
        best
    }

    fn element_values(&self, v: &[f64], e: usize) -> [f64; 3] {
        let mut out = [0.0; 3];
        for (a, o) in out.iter_mut().enumerate() {
            if let Some(i) = interior(2 * e + a, self.n_cells) {
                *o = v[i];
            }
        }
        out
    }

    /// Point evaluation of the FE function with coefficients `v`.
    pub fn eval(&self, v: &SpatialVector, x: f64) -> Result<f64> {
        self.check(v)?;
        if !(0.0..=self.xbar).contains(&x) {
            return Err(Error::Domain(format!("x = {x} outside [0, {}]", self.xbar)));
        }
        let e = ((x / self.h) as usize).min(self.n_cells - 1);
        let xi = (x - e as f64 * self.h) / self.h;
        let nodal = self.element_values(v.as_slice(), e);
        let phi = shape(xi);
        Ok(nodal[0] * phi[0] + nodal[1] * phi[1] + nodal[2] * phi[2])
    }
}

fn interior(global: usize, n_cells: usize) -> Option<usize> {
    (global > 0 && global < 2 * n_cells).then(|| global - 1)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn matrices_are_bitwise_symmetric() {
        let d = SpatialDiscretization::assemble(1.3, 7).unwrap();
        assert_eq!(d.mass(), &d.mass().transpose());
        assert_eq!(d.stiffness(), &d.stiffness().transpose());
        assert_eq!(d.dim(), 13);
    }

    #[test]
    fn quadratic_energy_is_exact() {
        let d = SpatialDiscretization::assemble(1.0, 10).unwrap();
        let v = d.interpolate(|x| x * (1.0 - x));
        let energy = v.dot(&(d.stiffness() * &v));
        assert!((energy - 1.0 / 3.0).abs() < 1e-14);
        assert!((d.l2_norm(&v).unwrap() - (1.0f64 / 30.0).sqrt()).abs() < 1e-14);
        assert!((d.linf_norm(&v).unwrap() - 0.25).abs() < 1e-15);
    }

    #[test]
    fn zero_vector_norms() {
        let d = SpatialDiscretization::assemble(1.0, 10).unwrap();
        let z = DVector::zeros(d.dim());
        assert_eq!(d.l2_norm(&z).unwrap(), 0.0);
        assert_eq!(d.linf_norm(&z).unwrap(), 0.0);
        assert!(d.l2_norm(&DVector::zeros(3)).is_err());
    }

    #[test]
    fn sine_l2_norm() {
        let d = SpatialDiscretization::assemble(1.0, 10).unwrap();
        let v = d.interpolate(|x| (PI * x).sin());
        assert!((d.l2_norm(&v).unwrap() - 0.5f64.sqrt()).abs() < 1e-4);
    }

    #[test]
    fn constant_load_projects_exactly() {
        let d = SpatialDiscretization::assemble(1.0, 10).unwrap();
        let u0 = d.interpolate(|x| x * (1.0 - x));
        let lu = d.apply_operator(&u0);
        let two = d.project(|_| 2.0);
        assert!((lu - two).amax() < 1e-12);
    }

    #[test]
    fn point_evaluation_reproduces_quadratics() {
        let d = SpatialDiscretization::assemble(2.0, 4).unwrap();
        let v = d.interpolate(|x| x * (2.0 - x));
        for x in [0.0, 0.13, 0.77, 1.5, 2.0] {
            assert!((d.eval(&v, x).unwrap() - x * (2.0 - x)).abs() < 1e-14);
        }
        assert!(d.eval(&v, 2.5).is_err());
    }

    #[test]
    fn rejects_too_few_cells() {
        assert!(SpatialDiscretization::assemble(1.0, 1).is_err());
    }
}
