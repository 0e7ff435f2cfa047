//! Brute-force reference values shared by the integration tests.

#![allow(dead_code)]

use std::f64::consts::PI;

/// Gauss–Legendre nodes and weights on [−1, 1] by Newton iteration.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    for i in 0..n {
        let mut z = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        for _ in 0..100 {
            let (p, dp) = legendre(n, z);
            let dz = p / dp;
            z -= dz;
            if dz.abs() < 1e-16 {
                break;
            }
        }
        let (_, dp) = legendre(n, z);
        x[i] = z;
        w[i] = 2.0 / ((1.0 - z * z) * dp * dp);
    }
    (x, w)
}

fn legendre(n: usize, z: f64) -> (f64, f64) {
    let (mut p0, mut p1) = (1.0, z);
    for k in 2..=n {
        let p2 = ((2 * k - 1) as f64 * z * p1 - (k - 1) as f64 * p0) / k as f64;
        p0 = p1;
        p1 = p2;
    }
    let dp = n as f64 * (z * p1 - p0) / (z * z - 1.0);
    (p1, dp)
}

pub fn psi(l: usize, m: usize, s: f64) -> f64 {
    match l {
        0 => 1.0 - s,
        _ if l == m => s,
        _ => s.powi(l as i32) - s.powi(l as i32 + 1),
    }
}

pub fn dpsi(l: usize, m: usize, s: f64) -> f64 {
    match l {
        0 => -1.0,
        _ if l == m => 1.0,
        _ => l as f64 * s.powi(l as i32 - 1) - (l + 1) as f64 * s.powi(l as i32),
    }
}

/// Continuous piecewise polynomial in the hierarchical basis.
#[derive(Debug, Clone)]
pub struct PiecewisePoly {
    pub nodes: Vec<f64>,
    /// `coeffs[j][ℓ]` is the vector coefficient of `ψ^ℓ` on interval `j+1`.
    pub coeffs: Vec<Vec<Vec<f64>>>,
}

impl PiecewisePoly {
    pub fn dim(&self) -> usize {
        self.coeffs[0][0].len()
    }

    fn derivative(&self, j: usize, s: f64, out: &mut [f64]) {
        let (a, b) = (self.nodes[j], self.nodes[j + 1]);
        let tau = b - a;
        let sigma = (s - a) / tau;
        let c = &self.coeffs[j];
        let m = c.len() - 1;
        out.iter_mut().for_each(|v| *v = 0.0);
        for (l, cl) in c.iter().enumerate() {
            let d = dpsi(l, m, sigma) / tau;
            for (o, v) in out.iter_mut().zip(cl) {
                *o += d * v;
            }
        }
    }

    /// `∫ u'(s)(t − s)^{−α} ds / Γ(1 − α)` with `w = (t − s)^{1−α}` and
    /// geometrically graded composite Gauss–Legendre.
    pub fn caputo(&self, alpha: f64, gamma_1ma: f64, t: f64) -> Vec<f64> {
        let (gx, gw) = gauss_legendre(20);
        let dim = self.dim();
        let mut acc = vec![0.0; dim];
        let mut d = vec![0.0; dim];
        let e = 1.0 - alpha;
        for j in 0..self.coeffs.len() {
            let a = self.nodes[j];
            if a >= t {
                break;
            }
            let b = self.nodes[j + 1].min(t);
            let w_hi = (t - a).powf(e);
            let w_lo = if b >= t { 0.0 } else { (t - b).powf(e) };
            let mut edges = vec![w_hi];
            if w_lo == 0.0 {
                let mut w = w_hi;
                for _ in 0..200 {
                    w *= 0.5;
                    edges.push(w);
                }
                edges.push(0.0);
            } else {
                let mut w = w_hi;
                while w > 2.0 * w_lo {
                    w *= 0.5;
                    edges.push(w);
                }
                edges.push(w_lo);
            }
            for p in edges.windows(2) {
                let (hi, lo) = (p[0], p[1]);
                let (mid, half) = (0.5 * (hi + lo), 0.5 * (hi - lo));
                for (x, wt) in gx.iter().zip(&gw) {
                    let w = mid + half * x;
                    let s = (t - w.powf(1.0 / e)).clamp(a, b);
                    self.derivative(j, s, &mut d);
                    for (o, v) in acc.iter_mut().zip(&d) {
                        *o += wt * half * v;
                    }
                }
            }
        }
        acc.iter().map(|v| v / (e * gamma_1ma)).collect()
    }
}

/// Hierarchical interior coefficient of the quadratic through
/// `(t_{k−2}, u2), (t_{k−1}, u1), (t_k, u0)` on `[t_{k−1}, t_k]`.
pub fn l12_interior(t2: f64, t1: f64, t0: f64, u2: f64, u1: f64, u0: f64) -> f64 {
    let s = (t2 - t1) / (t0 - t1);
    (u2 - u1 * (1.0 - s) - u0 * s) / (s * (1.0 - s))
}
