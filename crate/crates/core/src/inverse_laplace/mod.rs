//! Time-domain linear evolution by numerical inversion of the Laplace
//! transform, plus whole-space closed forms used as comparators.

use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dispersion::contour::{default_eps, large_arc_radius, sector_contour_for};
use crate::dispersion::{build_deformed_contours, lambda_pm, Contour, ContourOpts, PieceLabel};
use crate::error::{Error, Result};
use crate::resolvent::kernel::moments;
use crate::resolvent::{ModeAssembler, ModeRhs};
use crate::spectral::{
    divergence_norm_interior, fft_x1, ifft_x1, norm, Grid, ModeProfile, ModeStack, NormSpec, VectorField,
};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const I: Complex64 = Complex64::new(0.0, 1.0);

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum ContourChoice {
    #[default]
    Sector,
    Deformed,
}

/// Integral over a contour with node-doubling error indicator.
#[derive(Debug, Clone)]
pub struct IntegralResult {
    pub value: Vec<Complex64>,
    /// max-norm difference against the half-density rule.
    pub error: f64,
    pub nodes: usize,
    /// Max-norm of each labelled piece's contribution.
    pub pieces: Vec<(PieceLabel, f64)>,
}

fn integrate_nodes<F>(contour: &Contour, xi1: f64, t: f64, integrand: &mut F) -> Result<IntegralResult>
where
    F: FnMut(Complex64, Complex64) -> Result<Vec<Complex64>>,
{
    let mut total: Vec<Complex64> = Vec::new();
    let mut pieces: Vec<(PieceLabel, Vec<Complex64>)> = Vec::new();
    let norm = 1.0 / (2.0 * PI * I);
    for p in &contour.pieces {
        let mut acc: Vec<Complex64> = Vec::new();
        for i in 0..p.nodes.len() {
            let lam = p.nodes[i];
            let w = p.omega(i, xi1);
            let v = integrand(lam, w)?;
            if v.iter().any(|z| !z.is_finite()) {
                return Err(Error::NonFinite { lambda: lam });
            }
            if acc.is_empty() {
                acc = vec![ZERO; v.len()];
            }
            if v.len() != acc.len() {
                return Err(Error::ShapeMismatch { expected: acc.len(), got: v.len() });
            }
            let f = p.weights[i] * (lam * t).exp() * norm;
            for (a, b) in acc.iter_mut().zip(&v) {
                *a += f * b;
            }
        }
        if acc.is_empty() {
            continue;
        }
        if total.is_empty() {
            total = vec![ZERO; acc.len()];
        }
        for (a, b) in total.iter_mut().zip(&acc) {
            *a += b;
        }
        match pieces.iter_mut().find(|(l, _)| *l == p.label) {
            Some((_, s)) => {
                for (a, b) in s.iter_mut().zip(&acc) {
                    *a += b;
                }
            }
            None => pieces.push((p.label, acc)),
        }
    }
    let pieces = pieces
        .into_iter()
        .map(|(l, v)| (l, v.iter().fold(0.0f64, |m, z| m.max(z.norm()))))
        .collect();
    Ok(IntegralResult { value: total, error: 0.0, nodes: contour.node_count(), pieces })
}

fn max_diff(a: &[Complex64], b: &[Complex64]) -> f64 {
    a.iter().zip(b).fold(0.0, |m, (x, y)| m.max((x - y).norm()))
}

fn max_abs(a: &[Complex64]) -> f64 {
    a.iter().fold(0.0, |m, x| m.max(x.norm()))
}

/// (1/2πi) Σ w_k e^{λ_k t} F(λ_k, ω_k), with the half-density rule as error indicator.
pub fn contour_integrate<F>(contour: &Contour, xi1: f64, t: f64, mut integrand: F) -> Result<IntegralResult>
where
    F: FnMut(Complex64, Complex64) -> Result<Vec<Complex64>>,
{
    let full = integrate_nodes(contour, xi1, t, &mut integrand)?;
    let half = integrate_nodes(&contour.rescaled(0.5)?, xi1, t, &mut integrand)?;
    let error = if full.value.is_empty() { 0.0 } else { max_diff(&full.value, &half.value) };
    Ok(IntegralResult { error, ..full })
}

/// Node budget controls for [`linear_evolve_mode`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct EvolveOpts {
    pub choice: ContourChoice,
    /// Initial nodes per unit effective length.
    pub n_per_unit: f64,
    pub rel_tol: f64,
    pub max_nodes: usize,
    /// Small-circle radius for deformed contours (None: default).
    pub eps: Option<f64>,
    /// Admissible ‖div‖/‖·‖ of the initial data (discrete divergence is O(h²)).
    pub div_tol: f64,
}

impl Default for EvolveOpts {
    fn default() -> Self {
        Self { choice: ContourChoice::Sector, n_per_unit: 1.0, rel_tol: 1e-7, max_nodes: 1 << 14, eps: None, div_tol: 1e-2 }
    }
}

/// One evolved mode.
#[derive(Debug, Clone)]
pub struct ModeState {
    pub xi1: f64,
    pub t: f64,
    pub u: [Vec<Complex64>; 2],
    pub b: [Vec<Complex64>; 2],
    pub error: f64,
    pub nodes: usize,
    pub converged: bool,
    pub pieces: Vec<(PieceLabel, f64)>,
}

fn build_contour(xi1: f64, t: f64, n: f64, x_scale: f64, opts: &EvolveOpts) -> Result<Contour> {
    match opts.choice {
        ContourChoice::Sector => sector_contour_for(xi1, t, n, x_scale),
        ContourChoice::Deformed => {
            if xi1 == 0.0 {
                return sector_contour_for(xi1, t, n, x_scale);
            }
            let eps = opts.eps.unwrap_or_else(|| default_eps(xi1));
            let r7 = large_arc_radius(t).max(2.0 * xi1.abs() + 2.0);
            build_deformed_contours(xi1, eps, r7, n, ContourOpts { t, x_scale })
        }
    }
}

/// Adaptive doubling of the node density until successive results agree.
fn adaptive<F>(xi1: f64, t: f64, x_scale: f64, opts: &EvolveOpts, mut integrand: F) -> Result<(IntegralResult, bool)>
where
    F: FnMut(Complex64, Complex64) -> Result<Vec<Complex64>>,
{
    let mut n = opts.n_per_unit;
    let mut prev = integrate_nodes(&build_contour(xi1, t, n, x_scale, opts)?, xi1, t, &mut integrand)?;
    loop {
        n *= 2.0;
        let c = build_contour(xi1, t, n, x_scale, opts)?;
        if c.node_count() > opts.max_nodes && prev.nodes > 0 {
            let mut r = integrate_nodes(&c, xi1, t, &mut integrand)?;
            r.error = max_diff(&r.value, &prev.value);
            let ok = r.error <= opts.rel_tol * max_abs(&r.value).max(1e-300);
            return Ok((r, ok));
        }
        let mut r = integrate_nodes(&c, xi1, t, &mut integrand)?;
        r.error = max_diff(&r.value, &prev.value);
        let scale = max_abs(&r.value);
        if r.error <= opts.rel_tol * scale || scale == 0.0 {
            return Ok((r, true));
        }
        prev = r;
    }
}

/// Dirichlet Green operator G_ω[f] = E_ω[f] − E_ω[f]₀ e^{−ωx} on the nodes.
fn dirichlet_green(omega: Complex64, x: &[f64], fs: &[&[Complex64]]) -> Vec<Vec<Complex64>> {
    let m = moments(omega, x, fs);
    let inv = 1.0 / (2.0 * omega);
    (0..fs.len())
        .map(|k| {
            let (l, r) = (&m.left[k], &m.right[k]);
            (0..x.len()).map(|j| (l[j] + r[j] - r[0] * m.decay[j]) * inv).collect()
        })
        .collect()
}

/// Evolves one Fourier mode of the linear problem to time t > 0.
pub fn linear_evolve_mode(
    grid: &Grid,
    xi1: f64,
    u0: &[ModeProfile; 2],
    b0: &[ModeProfile; 2],
    t: f64,
    opts: &EvolveOpts,
) -> Result<ModeState> {
    if !(t > 0.0) {
        return Err(Error::Domain(format!("linear_evolve_mode needs t > 0, got {t}")));
    }
    let n = grid.n2();
    let zero_data = u0.iter().chain(b0).all(|p| p.values.iter().all(|v| *v == ZERO));
    if zero_data {
        let z = vec![ZERO; n];
        return Ok(ModeState {
            xi1,
            t,
            u: [z.clone(), z.clone()],
            b: [z.clone(), z],
            error: 0.0,
            nodes: 0,
            converged: true,
            pieces: Vec::new(),
        });
    }
    let x_scale = grid.spec.l2;
    let (res, converged) = if xi1 == 0.0 {
        // Heat flow with Dirichlet wall for u, identity for b.
        let x = &grid.x2;
        let (a, b) = (&u0[0].values, &u0[1].values);
        adaptive(0.0, t, x_scale, opts, |_lam, w| {
            let g = dirichlet_green(w, x, &[a, b]);
            let mut out = Vec::with_capacity(2 * n);
            out.extend_from_slice(&g[0]);
            out.extend_from_slice(&g[1]);
            Ok(out)
        })?
    } else {
        let rhs = ModeRhs::initial(u0.clone(), b0.clone());
        let asm = ModeAssembler::new(grid, &rhs)?;
        adaptive(xi1, t, x_scale, opts, |lam, w| {
            let f = asm.fields(lam, w)?;
            let mut out = Vec::with_capacity(4 * n);
            out.extend(f.u1);
            out.extend(f.u2);
            out.extend(f.b1);
            out.extend(f.b2);
            Ok(out)
        })?
    };
    let v = res.value;
    let (u, b) = if xi1 == 0.0 {
        (
            [v[..n].to_vec(), v[n..2 * n].to_vec()],
            [b0[0].values.clone(), b0[1].values.clone()],
        )
    } else {
        (
            [v[..n].to_vec(), v[n..2 * n].to_vec()],
            [v[2 * n..3 * n].to_vec(), v[3 * n..].to_vec()],
        )
    };
    Ok(ModeState { xi1, t, u, b, error: res.error, nodes: res.nodes, converged, pieces: res.pieces })
}

/// Inverse transform of G_ω[f] alone: the odd-extension (I₁) part of û₁ when b₀ = 0.
pub fn dirichlet_part_evolve(grid: &Grid, xi1: f64, f: &ModeProfile, t: f64, opts: &EvolveOpts) -> Result<Vec<Complex64>> {
    let x = &grid.x2;
    let v = &f.values;
    let (r, _) = adaptive(xi1, t, grid.spec.l2, opts, |_l, w| Ok(dirichlet_green(w, x, &[v]).remove(0)))?;
    Ok(r.value)
}

/// Physical fields at one time.
#[derive(Debug, Clone)]
pub struct Snapshot {
    pub t: f64,
    pub u: VectorField,
    pub b: VectorField,
}

/// Conditions required of initial data; returns the list of violations.
pub fn compatibility_violations(u0: &VectorField, b0: &VectorField, div_tol: f64) -> Result<Vec<String>> {
    let mut v = Vec::new();
    let g = u0.grid();
    let n1 = g.n1();
    let scale_u = u0.max_abs().max(b0.max_abs()).max(1e-300);
    let nu = norm(&[&u0.c1, &u0.c2], NormSpec::L2)?;
    let nb = norm(&[&b0.c1, &b0.c2], NormSpec::L2)?;
    let du = divergence_norm_interior(u0)?;
    let db = divergence_norm_interior(b0)?;
    if du > div_tol * nu.max(1e-300) && nu > 0.0 {
        v.push(format!("div u0 = {du:.3e} exceeds tolerance"));
    }
    if db > div_tol * nb.max(1e-300) && nb > 0.0 {
        v.push(format!("div b0 = {db:.3e} exceeds tolerance"));
    }
    let wall = |f: &crate::spectral::ScalarField| f.values[..n1].iter().fold(0.0f64, |m, x| m.max(x.abs()));
    for (name, f) in [("u1", &u0.c1), ("u2", &u0.c2), ("b1", &b0.c1), ("b2", &b0.c2)] {
        let w = wall(f);
        if w > 1e-10 * scale_u {
            v.push(format!("{name} = {w:.3e} at the wall"));
        }
    }
    Ok(v)
}

/// Linear evolution of physical fields to each requested time.
pub fn linear_evolve(u0: &VectorField, b0: &VectorField, times: &[f64], opts: &EvolveOpts) -> Result<Vec<Snapshot>> {
    let g = u0.grid().clone();
    if !b0.grid().same_as(&g) {
        return Err(Error::Domain("u0 and b0 on different grids".into()));
    }
    let bad = compatibility_violations(u0, b0, opts.div_tol)?;
    if !bad.is_empty() {
        return Err(Error::Incompatible(bad.join("; ")));
    }
    let m = [fft_x1(&u0.c1)?, fft_x1(&u0.c2)?, fft_x1(&b0.c1)?, fft_x1(&b0.c2)?];
    let mut out = Vec::with_capacity(times.len());
    for &t in times {
        if t < 0.0 {
            return Err(Error::Domain(format!("negative time {t}")));
        }
        if t == 0.0 {
            out.push(Snapshot { t, u: u0.clone(), b: b0.clone() });
            continue;
        }
        let states: Vec<Result<ModeState>> = (0..g.nyquist())
            .into_par_iter()
            .map(|k| {
                let xi = g.xi1[k];
                let p = |s: &ModeStack| ModeProfile::new(xi, s.mode(k).to_vec());
                linear_evolve_mode(&g, xi, &[p(&m[0]), p(&m[1])], &[p(&m[2]), p(&m[3])], t, opts)
            })
            .collect();
        let mut s = [ModeStack::zeros(&g), ModeStack::zeros(&g), ModeStack::zeros(&g), ModeStack::zeros(&g)];
        for (k, st) in states.into_iter().enumerate() {
            let st = st?;
            s[0].set_hermitian(k, &st.u[0]);
            s[1].set_hermitian(k, &st.u[1]);
            s[2].set_hermitian(k, &st.b[0]);
            s[3].set_hermitian(k, &st.b[1]);
        }
        let [a, b, c, d] = s;
        out.push(Snapshot {
            t,
            u: VectorField::new(ifft_x1(&a)?, ifft_x1(&b)?)?,
            b: VectorField::new(ifft_x1(&c)?, ifft_x1(&d)?)?,
        });
    }
    Ok(out)
}

/// Divided differences (e^{λ₊t} − e^{λ₋t})/(λ₊−λ₋) and (λ₊e^{λ₊t} − λ₋e^{λ₋t})/(λ₊−λ₋),
/// and the conjugate form (λ₊e^{λ₋t} − λ₋e^{λ₊t})/(λ₊−λ₋).
fn divided(lp: Complex64, lm: Complex64, t: f64) -> (Complex64, Complex64, Complex64) {
    let (ep, em) = ((lp * t).exp(), (lm * t).exp());
    if (lp - lm).norm() < 1e-8 {
        let l = 0.5 * (lp + lm);
        let e = (l * t).exp();
        // d/dλ e^{λt} = t e^{λt}; d/dλ (λ e^{λt}) = (1 + λt) e^{λt}
        (t * e, (1.0 + l * t) * e, (1.0 - l * t) * e)
    } else {
        let d = lp - lm;
        ((ep - em) / d, (lp * ep - lm * em) / d, (lp * em - lm * ep) / d)
    }
}

/// Exact whole-space evolution of (û, b̂) at full frequency (ξ₁, ξ₂).
pub fn whole_space_mode_exp(
    xi1: f64,
    xi2: f64,
    u0: [Complex64; 2],
    b0: [Complex64; 2],
    t: f64,
) -> ([Complex64; 2], [Complex64; 2]) {
    let (lp, lm) = lambda_pm(xi1, xi2);
    let (d0, d1, dc) = divided(lp, lm, t);
    let ix = I * xi1;
    let mut u = [ZERO; 2];
    let mut b = [ZERO; 2];
    for c in 0..2 {
        u[c] = d1 * u0[c] + ix * d0 * b0[c];
        b[c] = ix * d0 * u0[c] + dc * b0[c];
    }
    (u, b)
}

#[cfg(test)]
mod tests;
