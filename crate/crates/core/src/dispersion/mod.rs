//! Closed-form spectral objects: ω(λ; ξ₁), the roots λ±, λ'±, η±, and the
//! inversion contours.

pub mod contour;

use num_complex::Complex64;

use crate::error::{Error, Result};

pub use contour::{
    build_deformed_contours, build_sector_contour, sector_contour_for, Branch, Contour, ContourOpts,
    ContourPiece, PieceKind, PieceLabel, Side,
};

/// ω² = λ + ξ₁² + ξ₁²/λ.
#[inline]
pub fn omega_sq(lambda: Complex64, xi1: f64) -> Complex64 {
    let k2 = xi1 * xi1;
    lambda + k2 + k2 / lambda
}

/// Principal branch of ω(λ; ξ₁); Re ω ≥ 0.
pub fn omega(lambda: Complex64, xi1: f64) -> Result<Complex64> {
    if lambda == Complex64::new(0.0, 0.0) {
        return Err(Error::Domain("omega is singular at lambda = 0".into()));
    }
    Ok(omega_principal(lambda, xi1))
}

#[inline]
pub(crate) fn omega_principal(lambda: Complex64, xi1: f64) -> Complex64 {
    let w = omega_sq(lambda, xi1).sqrt();
    if w.re < 0.0 {
        -w
    } else {
        w
    }
}

/// Boundary value of ω on a cut, approached from the side `normal` points to.
///
/// Off the cut this is the principal value.
pub fn omega_side(lambda: Complex64, xi1: f64, normal: Complex64) -> Complex64 {
    let w2 = omega_sq(lambda, xi1);
    if w2.re >= 0.0 || w2.im.abs() > 1e-9 * (1.0 + w2.norm()) {
        return omega_principal(lambda, xi1);
    }
    let k2 = xi1 * xi1;
    let dir = (Complex64::new(1.0, 0.0) - k2 / (lambda * lambda)) * normal;
    let s = if dir.im >= 0.0 { 1.0 } else { -1.0 };
    Complex64::new(0.0, s * (-w2.re).sqrt())
}

/// Roots of λ² + |ξ|²λ + ξ₁² = 0; λ₊ has the larger real part, ties broken
/// by positive imaginary part.
pub fn lambda_pm(xi1: f64, xi2: f64) -> (Complex64, Complex64) {
    let s = xi1 * xi1 + xi2 * xi2;
    let k2 = xi1 * xi1;
    let disc = s * s - 4.0 * k2;
    if disc >= 0.0 {
        let lm = -0.5 * (s + disc.sqrt());
        let lp = if lm != 0.0 { k2 / lm } else { 0.0 };
        (Complex64::new(lp, 0.0), Complex64::new(lm, 0.0))
    } else {
        let im = 0.5 * (-disc).sqrt();
        (Complex64::new(-0.5 * s, im), Complex64::new(-0.5 * s, -im))
    }
}

/// λ'± = λ±(ξ₁, 0).
pub fn lambda_prime_pm(xi1: f64) -> (Complex64, Complex64) {
    lambda_pm(xi1, 0.0)
}

/// η± = |ξ|²/2 ± ½√(|ξ|⁴ − 4ξ₁²) in the real regime.
pub fn eta_pm(xi1: f64, xi2: f64) -> Result<(f64, f64)> {
    let s = xi1 * xi1 + xi2 * xi2;
    let k2 = xi1 * xi1;
    let mut disc = s * s - 4.0 * k2;
    if disc < 0.0 {
        if disc > -1e-14 * s * s {
            disc = 0.0;
        } else {
            return Err(Error::Domain(format!(
                "eta_pm needs |xi|^4 >= 4 xi1^2 (xi = ({xi1}, {xi2}))"
            )));
        }
    }
    let ep = 0.5 * (s + disc.sqrt());
    let em = if ep > 0.0 { k2 / ep } else { 0.0 };
    Ok((ep, em))
}

/// dη₋/dξ₂ = 2ξ₂ λ₊/(λ₊ − λ₋).
pub fn jacobian_eta_minus(xi1: f64, xi2: f64) -> Result<Complex64> {
    let s = xi1 * xi1 + xi2 * xi2;
    let disc = s * s - 4.0 * xi1 * xi1;
    if disc <= 1e-14 * s * s || s == 0.0 {
        return Err(Error::Domain(format!(
            "degenerate or complex discriminant at xi = ({xi1}, {xi2})"
        )));
    }
    let (lp, lm) = lambda_pm(xi1, xi2);
    Ok(2.0 * xi2 * lp / (lp - lm))
}

/// Point on the upper Π arc in the η parametrization:
/// λ = (Re λ'₊ − η) + i D(η), D = √((Im λ'₊)² + 2 Re λ'₊ η − η²), η ∈ [0, d₀].
pub fn gamma2_point(xi1: f64, eta: f64) -> Result<Complex64> {
    let k = xi1.abs();
    if k == 0.0 || k > 2.0 {
        return Err(Error::Domain("the Pi arcs exist only for 0 < |xi1| <= 2".into()));
    }
    let (lp, _) = lambda_prime_pm(xi1);
    let d2 = lp.im * lp.im + 2.0 * lp.re * eta - eta * eta;
    // Written out: (Im λ'₊)² + 2Re λ'₊η − η² = ξ₁² − (Re λ'₊ − η)².
    let d = d2.max(0.0).sqrt();
    Ok(Complex64::new(lp.re - eta, d))
}

/// Parameter range of [`gamma2_point`]: (0, d₀) with d₀ = Re λ'₊ + |ξ₁|.
pub fn gamma2_parameter_range(xi1: f64) -> (f64, f64) {
    let (lp, _) = lambda_prime_pm(xi1);
    (0.0, lp.re + xi1.abs())
}
