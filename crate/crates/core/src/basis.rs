//! Hierarchical reference basis on [0, 1] and its closed-form singular
//! integrals.
//!
//! `ψ⁰ = 1 − σ`, `ψᵐ = σ`, `ψˡ = σˡ(1 − σ)` for `0 < ℓ < m`.

use crate::error::{domain, Result};

pub fn psi(ell: usize, m: usize, s: f64) -> f64 {
    if ell == 0 {
        1.0 - s
    } else if ell == m {
        s
    } else {
        s.powi(ell as i32) * (1.0 - s)
    }
}

pub fn dpsi(ell: usize, m: usize, s: f64) -> f64 {
    if ell == 0 {
        -1.0
    } else if ell == m {
        1.0
    } else {
        let l = ell as i32;
        ell as f64 * s.powi(l - 1) * (1.0 - s) - s.powi(l)
    }
}

/// `∫₀ᵗ σʲ (t − σ)^{−α} dσ = t^{j+1−α} · j! / ∏_{i=1}^{j+1} (i − α)`.
fn monomial_singular(j: usize, alpha: f64, t: f64) -> f64 {
    let mut c = 1.0;
    for i in 1..=j + 1 {
        c *= if i <= j { i as f64 } else { 1.0 } / (i as f64 - alpha);
    }
    c * t.powf(j as f64 + 1.0 - alpha)
}

/// `∫₀^{t_loc} ∂ψˡ(σ) (t_loc − σ)^{−α} dσ`.
pub fn i_sing(ell: usize, m: usize, alpha: f64, t_loc: f64) -> Result<f64> {
    if m == 0 || ell > m {
        return domain(format!("basis index {ell} out of range for degree {m}"));
    }
    if !(alpha > 0.0 && alpha < 1.0) {
        return domain(format!("alpha must lie in (0,1), got {alpha}"));
    }
    if !(t_loc > 0.0 && t_loc <= 1.0) {
        return domain(format!("local time must lie in (0,1], got {t_loc}"));
    }
    Ok(i_sing_unchecked(ell, m, alpha, t_loc))
}

#[inline]
pub(crate) fn i_sing_unchecked(ell: usize, m: usize, alpha: f64, t_loc: f64) -> f64 {
    let edge = t_loc.powf(1.0 - alpha) / (1.0 - alpha);
    if ell == 0 {
        -edge
    } else if ell == m {
        edge
    } else {
        // ∂ψˡ = ℓσ^{ℓ−1} − (ℓ+1)σˡ
        ell as f64 * monomial_singular(ell - 1, alpha, t_loc)
            - (ell + 1) as f64 * monomial_singular(ell, alpha, t_loc)
    }
}

/// `∫₀¹ [∂ψˡ(σ) − ∂ψˡ(1)] σⁿ dσ` for an interior index.
#[inline]
pub(crate) fn history_moment(ell: usize, n: usize) -> f64 {
    let (l, n) = (ell as f64, n as f64);
    l / ((l + n) * (l + n + 1.0)) + l / ((n + 1.0) * (n + l + 1.0))
}
