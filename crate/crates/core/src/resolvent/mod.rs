//! Exact per-mode solution of the Laplace-transformed linear problem.
//!
//! With h = û₀ + f̂ + (iξ₁/λ)(b̂₀ + ĝ), corrected by the pressure particular
//! part so that it is divergence free, the velocity mode is
//!
//!   û₂ = G_ω[h₂] − M₀ K,   û₁ = (i/ξ₁) ∂₂û₂,
//!
//! where G_ω is the Dirichlet Green operator of ω² − ∂₂² on the half line,
//! M₀ = ∫₀^∞ e^{−ωy} h₂ dy and K = (e^{−|ξ₁|x} − e^{−ωx})/(ω − |ξ₁|).
//! The pressure is p̂ = C e^{−|ξ₁|x} − E_{|ξ₁|}[q] with C = −M₀(ω+|ξ₁|)/|ξ₁|.

pub mod kernel;

use num_complex::Complex64;
use serde::Serialize;

use crate::dispersion::omega_principal;
use crate::error::{Error, Result};
use crate::spectral::{Grid, ModeProfile};

pub use kernel::{
    e_kernel_apply, e_kernel_apply_d2, e_kernel_exp, e_kernel_trace, kernel_ratio,
    kernel_ratio_with_omega, KernelRatio,
};
use kernel::{k_profile, moments};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const I: Complex64 = Complex64::new(0.0, 1.0);

/// Right-hand side for one mode: initial data and (optional) transformed forcing.
#[derive(Debug, Clone)]
pub struct ModeRhs {
    pub u0: [ModeProfile; 2],
    pub b0: [ModeProfile; 2],
    pub f: Option<[ModeProfile; 2]>,
    pub g: Option<[ModeProfile; 2]>,
}

impl ModeRhs {
    pub fn initial(u0: [ModeProfile; 2], b0: [ModeProfile; 2]) -> Self {
        Self { u0, b0, f: None, g: None }
    }

    pub fn xi1(&self) -> f64 {
        self.u0[0].xi1
    }
}

/// Velocity, field and pressure modes at one λ.
#[derive(Debug, Clone)]
pub struct ResolventMode {
    pub u1: ModeProfile,
    pub u2: ModeProfile,
    pub b1: ModeProfile,
    pub b2: ModeProfile,
    pub p: ModeProfile,
    /// ∂₂û₂ from exact moments.
    pub du2: ModeProfile,
    /// û₁ from the direct Green-function formula, for cross-checking.
    pub u1_direct: ModeProfile,
    pub lambda: Complex64,
    pub omega: Complex64,
    pub xi1: f64,
    /// Coefficient of e^{−ωx₂} in û₁ = E_ω[h₁] + A e^{−ωx₂} + D e^{−|ξ₁|x₂}.
    pub a_coeff: Complex64,
    /// Always zero: no growing homogeneous solution is admitted.
    pub b_coeff: Complex64,
    pub c_coeff: Complex64,
}

/// Particular pressure part −E_{|ξ₁|}[q], q = iξ₁f̂₁ + ∂₂f̂₂, with its ∂₂.
#[derive(Debug, Clone)]
pub struct PressureMode {
    /// Coefficient of the homogeneous solution; fixed later by the wall condition.
    pub c_coeff: Complex64,
    pub particular: ModeProfile,
    pub d_particular: ModeProfile,
    /// Homogeneous basis e^{−|ξ₁|x₂}.
    pub homogeneous: Vec<f64>,
}

pub fn pressure_mode(grid: &Grid, xi1: f64, f: (&ModeProfile, &ModeProfile)) -> Result<PressureMode> {
    let x = &grid.x2;
    let n = x.len();
    if f.0.values.len() != n || f.1.values.len() != n {
        return Err(Error::ShapeMismatch { expected: n, got: f.0.values.len().min(f.1.values.len()) });
    }
    if xi1 == 0.0 {
        // ∂₂p = f₂ (zero at infinity), zero mean gauge.
        let f2 = &f.1.values;
        if f2.iter().any(|v| !v.is_finite()) {
            return Err(Error::Domain("non-finite forcing in the zero mode".into()));
        }
        let mut p = vec![ZERO; n];
        for j in 1..n {
            p[j] = p[j - 1] + (f2[j] + f2[j - 1]) * (0.5 * (x[j] - x[j - 1]));
        }
        let mean: Complex64 = p.iter().zip(&grid.w2).map(|(a, w)| a * *w).sum::<Complex64>() / grid.spec.l2;
        for v in &mut p {
            *v -= mean;
        }
        return Ok(PressureMode {
            c_coeff: ZERO,
            particular: ModeProfile::new(0.0, p),
            d_particular: ModeProfile::new(0.0, f2.clone()),
            homogeneous: vec![1.0; n],
        });
    }
    let k = xi1.abs();
    let df2 = grid.diff.derivative(&f.1.values, 1)?;
    let q: Vec<Complex64> = f.0.values.iter().zip(&df2).map(|(a, b)| I * xi1 * a + b).collect();
    let m = moments(Complex64::new(k, 0.0), x, &[&q]);
    let p: Vec<Complex64> = m.left[0].iter().zip(&m.right[0]).map(|(l, r)| -(l + r) / (2.0 * k)).collect();
    let dp: Vec<Complex64> = m.left[0].iter().zip(&m.right[0]).map(|(l, r)| -(r - l) * 0.5).collect();
    Ok(PressureMode {
        c_coeff: ZERO,
        particular: ModeProfile::new(xi1, p),
        d_particular: ModeProfile::new(xi1, dp),
        homogeneous: x.iter().map(|t| (-k * t).exp()).collect(),
    })
}

/// Precomputed λ-independent data for evaluating one mode at many λ.
#[derive(Debug, Clone)]
pub struct ModeAssembler<'g> {
    grid: &'g Grid,
    xi1: f64,
    /// λ-independent and 1/λ parts of h₁, h₂ (pressure-corrected).
    a1: Vec<Complex64>,
    c1: Vec<Complex64>,
    a2: Vec<Complex64>,
    c2: Vec<Complex64>,
    /// b̂₀ + ĝ.
    bsrc: [Vec<Complex64>; 2],
    ek: Vec<f64>,
    p_part: Vec<Complex64>,
}

/// Velocity and field profiles only (the fast path used under the contour integral).
#[derive(Debug, Clone)]
pub struct ModeFields {
    pub u1: Vec<Complex64>,
    pub u2: Vec<Complex64>,
    pub b1: Vec<Complex64>,
    pub b2: Vec<Complex64>,
}

impl<'g> ModeAssembler<'g> {
    pub fn new(grid: &'g Grid, rhs: &ModeRhs) -> Result<Self> {
        let xi1 = rhs.xi1();
        if xi1 == 0.0 {
            return Err(Error::Domain("the resolvent formulas need xi1 != 0".into()));
        }
        let n = grid.n2();
        for p in rhs.u0.iter().chain(&rhs.b0).chain(rhs.f.iter().flatten()).chain(rhs.g.iter().flatten()) {
            if p.values.len() != n {
                return Err(Error::ShapeMismatch { expected: n, got: p.values.len() });
            }
            if p.values.iter().any(|v| !v.is_finite()) {
                return Err(Error::Domain("non-finite mode data".into()));
            }
        }
        let k = xi1.abs();
        let mut a1 = rhs.u0[0].values.clone();
        let mut a2 = rhs.u0[1].values.clone();
        let mut bsrc = [rhs.b0[0].values.clone(), rhs.b0[1].values.clone()];
        let mut p_part = vec![ZERO; n];
        if let Some(f) = &rhs.f {
            let pm = pressure_mode(grid, xi1, (&f[0], &f[1]))?;
            for j in 0..n {
                // h + ∇̂(−p_particular)…: subtracting ∇̂p_part with p_part = −E[q]
                a1[j] += f[0].values[j] - I * xi1 * pm.particular.values[j];
                a2[j] += f[1].values[j] - pm.d_particular.values[j];
            }
            p_part = pm.particular.values;
        }
        if let Some(g) = &rhs.g {
            for j in 0..n {
                bsrc[0][j] += g[0].values[j];
                bsrc[1][j] += g[1].values[j];
            }
        }
        let c1 = bsrc[0].iter().map(|v| I * xi1 * v).collect();
        let c2 = bsrc[1].iter().map(|v| I * xi1 * v).collect();
        let ek = grid.x2.iter().map(|t| (-k * t).exp()).collect();
        Ok(Self { grid, xi1, a1, c1, a2, c2, bsrc, ek, p_part })
    }

    pub fn xi1(&self) -> f64 {
        self.xi1
    }

    /// û and b̂ at λ with branch value ω (Re ω ≥ 0; Re ω = 0 allowed on cut sides).
    pub fn fields(&self, lambda: Complex64, omega: Complex64) -> Result<ModeFields> {
        let (u1, u2, _, _) = self.core(lambda, omega, false)?;
        let il = 1.0 / lambda;
        let ixi = I * self.xi1;
        let b1 = u1.iter().zip(&self.bsrc[0]).map(|(u, s)| (ixi * u + s) * il).collect();
        let b2 = u2.iter().zip(&self.bsrc[1]).map(|(u, s)| (ixi * u + s) * il).collect();
        Ok(ModeFields { u1, u2, b1, b2 })
    }

    /// Returns (û₁, û₂, ∂₂û₂, extras) where extras carry M₀ and the
    /// direct û₁ when requested.
    #[allow(clippy::type_complexity)]
    fn core(
        &self,
        lambda: Complex64,
        omega: Complex64,
        extras: bool,
    ) -> Result<(Vec<Complex64>, Vec<Complex64>, Vec<Complex64>, Option<(Complex64, Vec<Complex64>, Complex64)>)> {
        if lambda == ZERO || !lambda.is_finite() {
            return Err(Error::Domain(format!("resolvent undefined at lambda = {lambda}")));
        }
        if omega.re < 0.0 || omega == ZERO || !omega.is_finite() {
            return Err(Error::Domain(format!("invalid branch value omega = {omega} at lambda = {lambda}")));
        }
        let x = &self.grid.x2;
        let n = x.len();
        let k = self.xi1.abs();
        let il = 1.0 / lambda;
        let h2: Vec<Complex64> = self.a2.iter().zip(&self.c2).map(|(a, c)| a + c * il).collect();
        let mom = if extras {
            let h1: Vec<Complex64> = self.a1.iter().zip(&self.c1).map(|(a, c)| a + c * il).collect();
            moments(omega, x, &[&h2, &h1])
        } else {
            moments(omega, x, &[&h2])
        };
        let (l, r) = (&mom.left[0], &mom.right[0]);
        let ew = &mom.decay;
        let m0 = r[0];
        let inv2w = 1.0 / (2.0 * omega);
        let mut u1 = vec![ZERO; n];
        let mut u2 = vec![ZERO; n];
        let mut du2 = vec![ZERO; n];
        let mut kk = vec![ZERO; n];
        let fac = I / self.xi1;
        for j in 0..n {
            let kj = k_profile(omega, self.xi1, x[j], self.ek[j], ew[j]);
            kk[j] = kj;
            let g = (l[j] + r[j] - m0 * ew[j]) * inv2w;
            let dg = (r[j] - l[j]) * 0.5 + m0 * 0.5 * ew[j];
            let dk = -k * kj + ew[j];
            u2[j] = g - m0 * kj;
            du2[j] = dg - m0 * dk;
            u1[j] = fac * du2[j];
        }
        u2[0] = ZERO;
        let ex = if extras {
            let (l1, r1) = (&mom.left[1], &mom.right[1]);
            let sg = Complex64::new(0.0, self.xi1.signum());
            let e10 = r1[0] * inv2w;
            let direct: Vec<Complex64> = (0..n)
                .map(|j| (l1[j] + r1[j] - r1[0] * ew[j]) * inv2w + sg * m0 * kk[j])
                .collect();
            let d = omega - k;
            let a = if d.norm() > 1e-8 * (1.0 + omega.norm()) { -e10 - sg * m0 / d } else { Complex64::new(f64::NAN, f64::NAN) };
            Some((m0, direct, a))
        } else {
            None
        };
        Ok((u1, u2, du2, ex))
    }

    /// Full mode at λ with branch value ω.
    pub fn mode(&self, lambda: Complex64, omega: Complex64) -> Result<ResolventMode> {
        let (u1, u2, du2, ex) = self.core(lambda, omega, true)?;
        let (m0, direct, a) = ex.expect("extras requested");
        let k = self.xi1.abs();
        let il = 1.0 / lambda;
        let ixi = I * self.xi1;
        let c = -m0 * (omega + k) / k;
        let p: Vec<Complex64> = self.ek.iter().zip(&self.p_part).map(|(e, q)| c * *e + q).collect();
        let b1 = u1.iter().zip(&self.bsrc[0]).map(|(u, s)| (ixi * u + s) * il).collect();
        let b2 = u2.iter().zip(&self.bsrc[1]).map(|(u, s)| (ixi * u + s) * il).collect();
        let xi = self.xi1;
        Ok(ResolventMode {
            u1: ModeProfile::new(xi, u1),
            u2: ModeProfile::new(xi, u2),
            b1: ModeProfile::new(xi, b1),
            b2: ModeProfile::new(xi, b2),
            p: ModeProfile::new(xi, p),
            du2: ModeProfile::new(xi, du2),
            u1_direct: ModeProfile::new(xi, direct),
            lambda,
            omega,
            xi1: xi,
            a_coeff: a,
            b_coeff: ZERO,
            c_coeff: c,
        })
    }
}

/// Mode solution at λ on the principal branch.
pub fn assemble_mode(grid: &Grid, lambda: Complex64, xi1: f64, rhs: &ModeRhs) -> Result<ResolventMode> {
    if (rhs.xi1() - xi1).abs() > 1e-14 * (1.0 + xi1.abs()) {
        return Err(Error::Domain(format!("rhs frequency {} differs from xi1 = {xi1}", rhs.xi1())));
    }
    if lambda == ZERO {
        return Err(Error::Domain("resolvent undefined at lambda = 0".into()));
    }
    let w2 = crate::dispersion::omega_sq(lambda, xi1);
    if w2.im == 0.0 && w2.re <= 0.0 {
        return Err(Error::Domain(format!("lambda = {lambda} lies on a branch cut")));
    }
    let omega = omega_principal(lambda, xi1);
    ModeAssembler::new(grid, rhs)?.mode(lambda, omega)
}

/// Residuals of one assembled mode, as reported by `resolvent-check`.
#[derive(Debug, Clone, Serialize)]
pub struct ModeDiagnostics {
    pub lambda: [f64; 2],
    pub xi1: f64,
    pub norm_u: f64,
    pub wall_u1: f64,
    pub wall_u2: f64,
    pub wall_du2: f64,
    pub divergence: f64,
    pub ode_residual: f64,
    pub b_relation: f64,
    pub u1_direct_gap: f64,
}

/// Boundary values, divergence and ODE residual of an assembled mode.
pub fn diagnose(grid: &Grid, m: &ResolventMode, rhs: &ModeRhs) -> Result<ModeDiagnostics> {
    let n = grid.n2();
    let norm_u = (grid.profile_norm2(&m.u1.values) + grid.profile_norm2(&m.u2.values)).sqrt();
    let scale = norm_u.max(f64::MIN_POSITIVE);
    let ixi = I * m.xi1;
    let du2 = grid.diff.derivative(&m.u2.values, 1)?;
    let div: Vec<Complex64> = (0..n).map(|j| ixi * m.u1.values[j] + m.du2.values[j]).collect();
    // (ω² − ∂₂²)û = h − ∇̂p on interior nodes, with FD second derivatives.
    let il = 1.0 / m.lambda;
    let w2 = m.omega * m.omega;
    let dp = grid.diff.derivative(&m.p.values, 1)?;
    let mut res = 0.0;
    let mut den = 0.0;
    for (c, u) in [(0usize, &m.u1), (1, &m.u2)] {
        let d2 = grid.diff.derivative(&u.values, 2)?;
        for j in 1..n - 1 {
            let mut h = rhs.u0[c].values[j] + ixi * il * rhs.b0[c].values[j];
            if let Some(f) = &rhs.f {
                h += f[c].values[j];
            }
            if let Some(g) = &rhs.g {
                h += ixi * il * g[c].values[j];
            }
            let grad = if c == 0 { ixi * m.p.values[j] } else { dp[j] };
            let r = w2 * u.values[j] - d2[j] - (h - grad);
            res += grid.w2[j] * r.norm_sqr();
            den += grid.w2[j] * (h.norm_sqr() + (w2 * u.values[j]).norm_sqr());
        }
    }
    let mut brel: f64 = 0.0;
    for c in 0..2 {
        let (b, u) = if c == 0 { (&m.b1, &m.u1) } else { (&m.b2, &m.u2) };
        for j in 0..n {
            let mut src = rhs.b0[c].values[j];
            if let Some(g) = &rhs.g {
                src += g[c].values[j];
            }
            let r = b.values[j] - ixi * il * u.values[j] - il * src;
            brel = brel.max(r.norm() / (1.0 + b.values[j].norm()));
        }
    }
    let gap = m
        .u1
        .values
        .iter()
        .zip(&m.u1_direct.values)
        .map(|(a, b)| (a - b).norm())
        .fold(0.0, f64::max);
    let _ = du2;
    Ok(ModeDiagnostics {
        lambda: [m.lambda.re, m.lambda.im],
        xi1: m.xi1,
        norm_u,
        wall_u1: m.u1.values[0].norm() / scale,
        wall_u2: m.u2.values[0].norm() / scale,
        wall_du2: m.du2.values[0].norm() / scale,
        divergence: (grid.profile_norm2(&div)).sqrt() / scale,
        ode_residual: (res / den.max(f64::MIN_POSITIVE)).sqrt(),
        b_relation: brel,
        u1_direct_gap: gap / scale,
    })
}
