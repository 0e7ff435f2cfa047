//! Problem data `D_t^α u − u_xx = f` on `(0, x̄) × (0, T]` and its spatial
//! discretization.

use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::fem::{SpatialDiscretization, SpatialVector};
use crate::special::gamma_pos;

pub type SpaceTimeFn = Arc<dyn Fn(f64, f64) -> f64 + Send + Sync>;
pub type SpaceFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

#[derive(Clone)]
pub struct ProblemSpec {
    pub name: String,
    pub alpha: f64,
    pub t_end: f64,
    pub xbar: f64,
    /// f(x, t)
    pub source: SpaceTimeFn,
    pub initial: SpaceFn,
    /// `L u₀ = −u₀''`; when absent the discrete surrogate `M⁻¹ A U₀` is used.
    pub initial_operator: Option<SpaceFn>,
    pub exact: Option<SpaceTimeFn>,
}

impl fmt::Debug for ProblemSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ProblemSpec")
            .field("name", &self.name)
            .field("alpha", &self.alpha)
            .field("t_end", &self.t_end)
            .field("xbar", &self.xbar)
            .field("has_exact", &self.exact.is_some())
            .finish()
    }
}

impl ProblemSpec {
    pub fn validate(&self) -> Result<()> {
        if !(self.alpha > 0.0 && self.alpha < 1.0) {
            return Err(Error::Config(format!("alpha must lie in (0,1), got {}", self.alpha)));
        }
        if !(self.t_end > 0.0 && self.t_end.is_finite()) {
            return Err(Error::Config(format!("T must be positive, got {}", self.t_end)));
        }
        if !(self.xbar > 0.0 && self.xbar.is_finite()) {
            return Err(Error::Config(format!("x̄ must be positive, got {}", self.xbar)));
        }
        Ok(())
    }
}

/// Manufactured solution `u = (t^α − t² + 1)·x(1 − x)` on the unit square.
pub fn builtin_example1(alpha: f64) -> Result<ProblemSpec> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::Config(format!("alpha must lie in (0,1), got {alpha}")));
    }
    let g1 = gamma_pos(1.0 + alpha);
    let g3 = gamma_pos(3.0 - alpha);
    let source = move |x: f64, t: f64| {
        let shape = x * (1.0 - x);
        (g1 - 2.0 * t.powf(2.0 - alpha) / g3) * shape + 2.0 * (t.powf(alpha) - t * t + 1.0)
    };
    let exact = move |x: f64, t: f64| (t.powf(alpha) - t * t + 1.0) * x * (1.0 - x);
    Ok(ProblemSpec {
        name: "example1".into(),
        alpha,
        t_end: 1.0,
        xbar: 1.0,
        source: Arc::new(source),
        initial: Arc::new(|x| x * (1.0 - x)),
        initial_operator: Some(Arc::new(|_| 2.0)),
        exact: Some(Arc::new(exact)),
    })
}

/// Rough forcing `(t^γ − t)·sin((πx)²) + t·exp(−100(2t − 1)²)` with `u₀ = 0`.
pub fn builtin_example2(alpha: f64, gamma: f64) -> Result<ProblemSpec> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::Config(format!("alpha must lie in (0,1), got {alpha}")));
    }
    if !(0.0..=alpha).contains(&gamma) {
        return Err(Error::Config(format!("gamma must lie in [0, alpha], got {gamma}")));
    }
    let source = move |x: f64, t: f64| {
        let px = std::f64::consts::PI * x;
        (t.powf(gamma) - t) * (px * px).sin() + t * (-100.0 * (2.0 * t - 1.0).powi(2)).exp()
    };
    Ok(ProblemSpec {
        name: "example2".into(),
        alpha,
        t_end: 1.0,
        xbar: 1.0,
        source: Arc::new(source),
        initial: Arc::new(|_| 0.0),
        initial_operator: Some(Arc::new(|_| 0.0)),
        exact: None,
    })
}

/// Problem data mapped to the finite element space.
///
/// The load enters as `F(t) = M⁻¹ ∫ f(·,t) φ_i`, so the semi-discrete
/// system reads `D_t^α U + M⁻¹ A U = F`.
#[derive(Debug, Clone)]
pub struct DiscreteProblem {
    pub spec: ProblemSpec,
    pub space: SpatialDiscretization,
    pub u0: SpatialVector,
    pub lu0: SpatialVector,
}

impl DiscreteProblem {
    pub fn new(spec: ProblemSpec, n_cells: usize) -> Result<Self> {
        spec.validate()?;
        let space = SpatialDiscretization::assemble(spec.xbar, n_cells)?;
        let u0 = space.interpolate(|x| (spec.initial)(x));
        let lu0 = match &spec.initial_operator {
            Some(op) => space.project(|x| op(x)),
            None => space.apply_operator(&u0),
        };
        Ok(Self {
            spec,
            space,
            u0,
            lu0,
        })
    }

    pub fn alpha(&self) -> f64 {
        self.spec.alpha
    }

    pub fn t_end(&self) -> f64 {
        self.spec.t_end
    }

    /// `∫ f(·, t) φ_i`.
    pub fn load_vector(&self, t: f64) -> SpatialVector {
        let f = &self.spec.source;
        self.space.load(|x| f(x, t))
    }

    /// `F(t) = M⁻¹ ∫ f(·, t) φ_i`.
    pub fn load(&self, t: f64) -> SpatialVector {
        self.space.solve_mass(&self.load_vector(t))
    }

    /// Nodal interpolant of the exact solution, if known.
    pub fn exact(&self, t: f64) -> Option<SpatialVector> {
        let u = self.spec.exact.as_ref()?;
        Some(self.space.interpolate(|x| u(x, t)))
    }
}
