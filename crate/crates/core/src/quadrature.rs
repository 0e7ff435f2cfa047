//! Adaptive Gauss–Kronrod (7,15) quadrature for vector-valued integrands.
//!
//! All components share one refinement tree: the panel with the largest
//! scaled error estimate is bisected until every component meets its
//! tolerance.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use crate::error::{Error, Result};

#[allow(clippy::excessive_precision)]
const XGK: [f64; 8] = [
    0.991_455_371_120_812_639_206_854_697_526_329,
    0.949_107_912_342_758_524_526_189_684_047_851,
    0.864_864_423_359_769_072_789_712_788_640_926,
    0.741_531_185_599_394_439_863_864_773_280_788,
    0.586_087_235_467_691_130_294_144_838_258_730,
    0.405_845_151_377_397_166_906_606_412_076_961,
    0.207_784_955_007_898_467_600_689_403_773_245,
    0.0,
];

#[allow(clippy::excessive_precision)]
const WGK: [f64; 8] = [
    0.022_935_322_010_529_224_963_732_008_058_970,
    0.063_092_092_629_978_553_290_700_663_189_204,
    0.104_790_010_322_250_183_839_876_322_541_518,
    0.140_653_259_715_525_918_745_189_590_510_238,
    0.169_004_726_639_267_902_826_583_426_598_550,
    0.190_350_578_064_785_409_913_256_402_421_014,
    0.204_432_940_075_298_892_414_161_999_234_649,
    0.209_482_141_084_727_828_012_999_174_891_714,
];

// Gauss weights for XGK[1], XGK[3], XGK[5], XGK[7]
#[allow(clippy::excessive_precision)]
const WG: [f64; 4] = [
    0.129_484_966_168_869_693_270_611_432_679_082,
    0.279_705_391_489_276_667_901_467_771_423_780,
    0.381_830_050_505_118_944_950_369_775_488_975,
    0.417_959_183_673_469_387_755_102_040_816_327,
];

pub const DEFAULT_REL_TOL: f64 = 1e-14;
pub const DEFAULT_MAX_PANELS: usize = 2000;
const ABS_FLOOR: f64 = 1e-300;

/// A vector-valued integral over [a, b]. The integrand writes its value block
/// into the provided slice.
pub struct QuadratureRequest<F> {
    pub integrand: F,
    pub dim: usize,
    pub a: f64,
    pub b: f64,
    pub rel_tol: f64,
    pub waypoints: Vec<f64>,
    pub max_panels: usize,
}

impl<F: FnMut(f64, &mut [f64])> QuadratureRequest<F> {
    pub fn new(integrand: F, dim: usize, a: f64, b: f64) -> Self {
        Self {
            integrand,
            dim,
            a,
            b,
            rel_tol: DEFAULT_REL_TOL,
            waypoints: Vec::new(),
            max_panels: DEFAULT_MAX_PANELS,
        }
    }

    pub fn rel_tol(mut self, tol: f64) -> Self {
        self.rel_tol = tol;
        self
    }

    /// Initial split points. Points outside (a, b) are dropped, the rest are
    /// sorted and deduplicated.
    pub fn waypoints(mut self, pts: impl Into<Vec<f64>>) -> Self {
        self.waypoints = pts.into();
        self
    }

    pub fn max_panels(mut self, n: usize) -> Self {
        self.max_panels = n;
        self
    }
}

#[derive(Debug, Clone)]
pub struct QuadratureOutput {
    pub value: Vec<f64>,
    pub error: Vec<f64>,
    pub panels: usize,
    pub evaluations: usize,
}

struct Panel {
    a: f64,
    b: f64,
    value: Vec<f64>,
    error: Vec<f64>,
    priority: f64,
}

impl PartialEq for Panel {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}
impl Eq for Panel {}
impl PartialOrd for Panel {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Panel {
    fn cmp(&self, other: &Self) -> Ordering {
        // ties broken by position so the refinement order is deterministic
        self.priority
            .total_cmp(&other.priority)
            .then_with(|| other.a.total_cmp(&self.a))
    }
}

struct Kernel<F> {
    f: F,
    dim: usize,
    buf: Vec<f64>,
    evaluations: usize,
}

impl<F: FnMut(f64, &mut [f64])> Kernel<F> {
    fn eval(&mut self, x: f64) -> Result<()> {
        (self.f)(x, &mut self.buf);
        self.evaluations += 1;
        if self.buf.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFiniteIntegrand { abscissa: x });
        }
        Ok(())
    }

    /// One GK15 panel: Kronrod value and |K - G| per component.
    fn rule(&mut self, a: f64, b: f64) -> Result<(Vec<f64>, Vec<f64>)> {
        let center = 0.5 * (a + b);
        let half = 0.5 * (b - a);
        let mut kron = vec![0.0; self.dim];
        let mut gauss = vec![0.0; self.dim];

        self.eval(center)?;
        for c in 0..self.dim {
            kron[c] = WGK[7] * self.buf[c];
            gauss[c] = WG[3] * self.buf[c];
        }
        for j in 0..7 {
            let dx = half * XGK[j];
            for x in [center - dx, center + dx] {
                self.eval(x)?;
                for c in 0..self.dim {
                    kron[c] += WGK[j] * self.buf[c];
                    if j % 2 == 1 {
                        gauss[c] += WG[j / 2] * self.buf[c];
                    }
                }
            }
        }
        let mut err = vec![0.0; self.dim];
        for c in 0..self.dim {
            kron[c] *= half;
            gauss[c] *= half;
            err[c] = (kron[c] - gauss[c]).abs();
        }
        Ok((kron, err))
    }
}

/// Integrate `req.integrand` over [a, b] adaptively.
///
/// Succeeds once, for every component c, the summed panel error is at most
/// `rel_tol·|I_c|` (with an absolute floor of 1e-300). `rel_tol` below
/// 50·ε is raised to 50·ε, since no double-precision rule can do better.
pub fn integrate_adaptive<F: FnMut(f64, &mut [f64])>(
    req: QuadratureRequest<F>,
) -> Result<QuadratureOutput> {
    let QuadratureRequest {
        integrand,
        dim,
        a,
        b,
        rel_tol,
        mut waypoints,
        max_panels,
    } = req;
    if !(a < b) || !a.is_finite() || !b.is_finite() {
        return Err(Error::Domain(format!("quadrature needs finite a < b, got [{a}, {b}]")));
    }
    if !(rel_tol > 0.0) {
        return Err(Error::Domain(format!("rel_tol must be positive, got {rel_tol}")));
    }
    let rel_tol = rel_tol.max(50.0 * f64::EPSILON);

    waypoints.retain(|&w| w > a && w < b);
    waypoints.sort_by(f64::total_cmp);
    waypoints.dedup();

    let mut kernel = Kernel {
        f: integrand,
        dim,
        buf: vec![0.0; dim],
        evaluations: 0,
    };

    let mut edges = Vec::with_capacity(waypoints.len() + 2);
    edges.push(a);
    edges.extend_from_slice(&waypoints);
    edges.push(b);

    let mut raw = Vec::with_capacity(edges.len() - 1);
    for w in edges.windows(2) {
        let (v, e) = kernel.rule(w[0], w[1])?;
        raw.push((w[0], w[1], v, e));
    }
    let mut total = vec![0.0; dim];
    let mut total_err = vec![0.0; dim];
    for (_, _, v, e) in &raw {
        for c in 0..dim {
            total[c] += v[c];
            total_err[c] += e[c];
        }
    }
    // fixed per-component scales keep the refinement order comparable across
    // components of very different magnitude
    let scale: Vec<f64> = total.iter().map(|v| v.abs().max(ABS_FLOOR)).collect();
    let priority = |e: &[f64]| -> f64 {
        e.iter()
            .zip(&scale)
            .map(|(e, s)| e / s)
            .fold(0.0, f64::max)
    };

    let mut heap = BinaryHeap::with_capacity(64);
    for (pa, pb, value, error) in raw {
        let priority = priority(&error);
        heap.push(Panel {
            a: pa,
            b: pb,
            value,
            error,
            priority,
        });
    }

    let converged = |total: &[f64], total_err: &[f64]| {
        total
            .iter()
            .zip(total_err)
            .all(|(v, e)| *e <= (rel_tol * v.abs()).max(ABS_FLOOR))
    };

    while !converged(&total, &total_err) {
        if heap.len() >= max_panels {
            let worst = total_err.iter().cloned().fold(0.0, f64::max);
            return Err(Error::QuadratureConvergence {
                panels: heap.len(),
                error: worst,
                estimate: total,
            });
        }
        let worst = heap.pop().expect("at least one panel");
        let mid = 0.5 * (worst.a + worst.b);
        if !(mid > worst.a && mid < worst.b) {
            // the panel cannot be split further in floating point
            let est = total_err.iter().cloned().fold(0.0, f64::max);
            return Err(Error::QuadratureConvergence {
                panels: heap.len() + 1,
                error: est,
                estimate: total,
            });
        }
        let (lv, le) = kernel.rule(worst.a, mid)?;
        let (rv, re) = kernel.rule(mid, worst.b)?;
        for c in 0..dim {
            total[c] += lv[c] + rv[c] - worst.value[c];
            total_err[c] += le[c] + re[c] - worst.error[c];
        }
        heap.push(Panel {
            a: worst.a,
            b: mid,
            priority: priority(&le),
            value: lv,
            error: le,
        });
        heap.push(Panel {
            a: mid,
            b: worst.b,
            priority: priority(&re),
            value: rv,
            error: re,
        });
    }

    // re-sum in a fixed order so the result does not depend on update drift
    let mut panels: Vec<Panel> = heap.into_vec();
    panels.sort_by(|p, q| p.a.total_cmp(&q.a));
    let mut value = vec![0.0; dim];
    let mut error = vec![0.0; dim];
    for p in &panels {
        for c in 0..dim {
            value[c] += p.value[c];
            error[c] += p.error[c];
        }
    }
    Ok(QuadratureOutput {
        value,
        error,
        panels: panels.len(),
        evaluations: kernel.evaluations,
    })
}

/// Integrate a scalar function; convenience wrapper.
pub fn integrate_scalar(
    mut f: impl FnMut(f64) -> f64,
    a: f64,
    b: f64,
    rel_tol: f64,
    waypoints: &[f64],
) -> Result<f64> {
    let req = QuadratureRequest::new(|x: f64, out: &mut [f64]| out[0] = f(x), 1, a, b)
        .rel_tol(rel_tol)
        .waypoints(waypoints.to_vec());
    Ok(integrate_adaptive(req)?.value[0])
}

#[cfg(test)]
pub(crate) fn gk15_single(f: impl Fn(f64) -> f64, a: f64, b: f64) -> (f64, f64) {
    let mut k = Kernel {
        f: |x: f64, out: &mut [f64]| out[0] = f(x),
        dim: 1,
        buf: vec![0.0],
        evaluations: 0,
    };
    let (v, e) = k.rule(a, b).unwrap();
    (v[0], e[0])
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn weights_sum_to_two() {
        let k: f64 = WGK[7] + 2.0 * WGK[..7].iter().sum::<f64>();
        let g: f64 = WG[3] + 2.0 * WG[..3].iter().sum::<f64>();
        assert!((k - 2.0).abs() < 1e-15);
        assert!((g - 2.0).abs() < 1e-15);
    }

    #[test]
    fn single_panel_is_exact_for_low_degree_monomials() {
        for j in 0..=13 {
            let (v, _) = gk15_single(|x| x.powi(j), 0.0, 1.0);
            let want = 1.0 / (j as f64 + 1.0);
            assert!((v - want).abs() <= 1e-15, "degree {j}: {v} vs {want}");
        }
        // the Kronrod extension is exact well beyond the Gauss rule
        for j in 14..=22 {
            let (v, _) = gk15_single(|x| x.powi(j), 0.0, 1.0);
            assert!((v - 1.0 / (j as f64 + 1.0)).abs() <= 1e-15);
        }
    }

    #[test]
    fn simple_integrals() {
        let one = integrate_scalar(|_| 1.0, 0.0, 1.0, 1e-14, &[]).unwrap();
        assert!((one - 1.0).abs() < 1e-15);
        let sq = integrate_scalar(|x| x * x, 0.0, 1.0, 1e-14, &[]).unwrap();
        assert!((sq - 1.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn non_finite_integrand_reports_abscissa() {
        let req = QuadratureRequest::new(
            |x: f64, out: &mut [f64]| out[0] = if x > 0.5 { f64::NAN } else { 1.0 },
            1,
            0.0,
            1.0,
        );
        match integrate_adaptive(req) {
            Err(Error::NonFiniteIntegrand { abscissa }) => assert!(abscissa > 0.5),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn panel_limit_reports_best_estimate() {
        // a jump that bisection never resolves to 1e-14 within 8 panels
        let req = QuadratureRequest::new(
            |x: f64, out: &mut [f64]| out[0] = if x > 1.0 / 3.0 { 1.0 } else { 0.0 },
            1,
            0.0,
            1.0,
        )
        .max_panels(8);
        match integrate_adaptive(req) {
            Err(Error::QuadratureConvergence { estimate, .. }) => {
                assert!((estimate[0] - 2.0 / 3.0).abs() < 0.1)
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn invalid_interval_is_rejected() {
        let req = QuadratureRequest::new(|_: f64, out: &mut [f64]| out[0] = 1.0, 1, 1.0, 1.0);
        assert!(integrate_adaptive(req).is_err());
    }

    #[test]
    fn vector_components_share_panels() {
        let req = QuadratureRequest::new(
            |x: f64, out: &mut [f64]| {
                out[0] = x.sqrt();
                out[1] = 1e-8 * x.cos();
            },
            2,
            0.0,
            1.0,
        )
        .rel_tol(1e-12);
        let out = integrate_adaptive(req).unwrap();
        assert!((out.value[0] - 2.0 / 3.0).abs() < 1e-12);
        assert!((out.value[1] - 1e-8 * 1f64.sin()).abs() < 1e-20);
    }
}
