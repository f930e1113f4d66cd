use std::sync::Arc;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use super::{Scheme, SolverConfig, State};
use crate::error::{Error, Result};
use crate::linalg::{BandLu, BandMatrix};
use crate::resolvent::pressure_mode;
use crate::spectral::deriv::{fornberg_weights, StencilRow};
use crate::spectral::{fft_x1, ifft_x1, Grid, ModeProfile, ModeStack, ScalarField, VectorField};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const I: Complex64 = Complex64::new(0.0, 1.0);

/// Per-mode operators. For k ≠ 0: `a` is Δ_h with the clamped-wall closure
/// rows, `b` is Δ_h² on interior rows, `l` the 3-point ∂₂². For the mean
/// mode `lu` is the heat operator.
struct ModeOp {
    xi: f64,
    lu: BandLu,
    a: Vec<StencilRow>,
    b: Vec<StencilRow>,
    l: Vec<StencilRow>,
}

fn apply(rows: &[StencilRow], v: &[Complex64], j: usize) -> Complex64 {
    let r = &rows[j];
    r.w.iter().enumerate().fold(ZERO, |s, (i, w)| s + v[r.start + i] * *w)
}

/// ψ''(0) for ψ(0) = ψ'(0) = 0 from the quadratic-cubic fit through two nodes at distances a < b.
fn clamp_weights(a: f64, b: f64) -> (f64, f64) {
    let d = a * a * b * b * (b - a);
    (2.0 * b * b * b / d, -2.0 * a * a * a / d)
}

fn build_op(grid: &Grid, k: usize, dt: f64) -> Result<ModeOp> {
    let x = &grid.x2;
    let n = x.len();
    let xi = grid.xi1[k];
    let x2 = xi * xi;
    let mut l = vec![StencilRow { start: 0, w: Vec::new() }; n];
    for j in 1..n - 1 {
        let w = fornberg_weights(x[j], &x[j - 1..=j + 1], 2);
        l[j] = StencilRow { start: j - 1, w };
    }
    if k == 0 {
        let mut m = BandMatrix::zeros(n, 1, 1);
        m.add(0, 0, Complex64::new(1.0, 0.0));
        m.add(n - 1, n - 1, Complex64::new(1.0, 0.0));
        for j in 1..n - 1 {
            for (i, w) in l[j].w.iter().enumerate() {
                let d = if i == 1 { 1.0 } else { 0.0 };
                m.add(j, j - 1 + i, Complex64::new(d - 0.5 * dt * w, 0.0));
            }
        }
        return Ok(ModeOp { xi, lu: m.factor(k)?, a: Vec::new(), b: Vec::new(), l });
    }
    let mut a = vec![StencilRow { start: 0, w: Vec::new() }; n];
    let (c1, c2) = clamp_weights(x[1], x[2]);
    a[0] = StencilRow { start: 0, w: vec![0.0, c1, c2] };
    let (t1, t2) = clamp_weights(x[n - 1] - x[n - 2], x[n - 1] - x[n - 3]);
    a[n - 1] = StencilRow { start: n - 3, w: vec![t2, t1, 0.0] };
    for j in 1..n - 1 {
        let w = &l[j].w;
        a[j] = StencilRow { start: j - 1, w: vec![w[0], w[1] - x2, w[2]] };
    }
    let mut b = vec![StencilRow { start: 0, w: Vec::new() }; n];
    for j in 1..n - 1 {
        let start = j.saturating_sub(2);
        let end = (j + 2).min(n - 1);
        let mut w = vec![0.0; end - start + 1];
        let mut acc = |row: &StencilRow, c: f64| {
            for (i, v) in row.w.iter().enumerate() {
                w[row.start + i - start] += c * v;
            }
        };
        for (i, lw) in l[j].w.iter().enumerate() {
            acc(&a[j - 1 + i], *lw);
        }
        acc(&a[j], -x2);
        b[j] = StencilRow { start, w };
    }
    let alpha = 1.0 + 0.25 * dt * dt * x2;
    let mut m = BandMatrix::zeros(n, 2, 2);
    m.add(0, 0, Complex64::new(1.0, 0.0));
    m.add(n - 1, n - 1, Complex64::new(1.0, 0.0));
    for j in 1..n - 1 {
        for (i, w) in a[j].w.iter().enumerate() {
            m.add(j, a[j].start + i, Complex64::new(alpha * w, 0.0));
        }
        for (i, w) in b[j].w.iter().enumerate() {
            m.add(j, b[j].start + i, Complex64::new(-0.5 * dt * w, 0.0));
        }
    }
    Ok(ModeOp { xi, lu: m.factor(k)?, a, b, l })
}

/// Nonlinear forcing in mode space: momentum f = −u·∇u + b·∇b and the
/// magnetic potential source g = u₁b₂ − u₂b₁.
#[derive(Clone)]
struct Forcing {
    f1: ModeStack,
    f2: ModeStack,
    g: ModeStack,
}

impl Forcing {
    fn extrapolate(&self, old: &Forcing) -> Forcing {
        let comb = |a: &ModeStack, b: &ModeStack| {
            let mut out = a.clone();
            for (o, v) in out.data.iter_mut().zip(&b.data) {
                *o = 1.5 * *o - 0.5 * v;
            }
            out
        };
        Forcing { f1: comb(&self.f1, &old.f1), f2: comb(&self.f2, &old.f2), g: comb(&self.g, &old.g) }
    }
}

#[derive(Debug, Clone, Copy, Default, Serialize)]
pub struct SolverStats {
    pub steps: u64,
    pub t: f64,
    /// ½(‖u‖² + ‖b‖²).
    pub energy: f64,
    /// ∫₀ᵗ ‖∇u‖², each step contributing dt·‖∇u‖² at the midpoint state.
    pub dissipation: f64,
    /// ‖∇u‖² at the current time.
    pub grad_u_sq: f64,
    /// Largest advective CFL number seen.
    pub max_cfl: f64,
}

pub struct Solver {
    grid: Arc<Grid>,
    cfg: SolverConfig,
    psi: ModeStack,
    phi: ModeStack,
    ops: Vec<ModeOp>,
    prev: Option<Forcing>,
    stats: SolverStats,
}

impl std::fmt::Debug for Solver {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Solver").field("cfg", &self.cfg).field("stats", &self.stats).finish()
    }
}

impl Solver {
    /// Builds the solver from physical fields. Each mode's stream functions are
    /// recovered from the normal components; the mean modes keep u₁, b₁.
    pub fn new(cfg: SolverConfig, u0: &VectorField, b0: &VectorField) -> Result<Self> {
        cfg.validate()?;
        let grid = u0.grid().clone();
        if !b0.grid().same_as(&grid) {
            return Err(Error::Domain("u0 and b0 on different grids".into()));
        }
        if !(u0.c1.is_finite() && u0.c2.is_finite() && b0.c1.is_finite() && b0.c2.is_finite()) {
            return Err(Error::Domain("initial fields are not finite".into()));
        }
        let ops = (0..grid.nyquist())
            .into_par_iter()
            .map(|k| build_op(&grid, k, cfg.dt))
            .collect::<Result<Vec<_>>>()?;
        let psi = stream_from(&fft_x1(&u0.c1)?, &fft_x1(&u0.c2)?);
        let phi = stream_from(&fft_x1(&b0.c1)?, &fft_x1(&b0.c2)?);
        let mut s = Self { grid, cfg, psi, phi, ops, prev: None, stats: SolverStats::default() };
        s.refresh_stats();
        s.stats.max_cfl = 0.0;
        Ok(s)
    }

    pub fn grid(&self) -> &Arc<Grid> {
        &self.grid
    }

    pub fn config(&self) -> &SolverConfig {
        &self.cfg
    }

    pub fn t(&self) -> f64 {
        self.stats.t
    }

    pub fn stats(&self) -> SolverStats {
        self.stats
    }

    fn refresh_stats(&mut self) {
        let (u1, u2, b1, b2) = self.modes();
        let g = &self.grid;
        let e = 0.5 * (mode_l2sq(g, &u1, 0, false) + mode_l2sq(g, &u2, 0, false))
            + 0.5 * (mode_l2sq(g, &b1, 0, false) + mode_l2sq(g, &b2, 0, false));
        self.stats.energy = e;
        self.stats.grad_u_sq = grad_sq(g, &u1, &u2);
    }

    /// Mode stacks of (u₁, u₂, b₁, b₂).
    pub fn modes(&self) -> (ModeStack, ModeStack, ModeStack, ModeStack) {
        let (u1, u2) = curl_modes(&self.psi, true);
        let (b1, b2) = curl_modes(&self.phi, false);
        (u1, u2, b1, b2)
    }

    pub fn state(&self) -> Result<State> {
        let (u1, u2, b1, b2) = self.modes();
        Ok(State {
            t: self.stats.t,
            u: VectorField::new(ifft_x1(&u1)?, ifft_x1(&u2)?)?,
            b: VectorField::new(ifft_x1(&b1)?, ifft_x1(&b2)?)?,
            p: None,
        })
    }

    /// State including the pressure, recovered from the Neumann problem
    /// Δp = div f, ∂₂p = ∂₂²u₂ + f₂ at the wall.
    pub fn state_with_pressure(&self) -> Result<State> {
        let mut s = self.state()?;
        let g = &self.grid;
        let n = g.n2();
        let forcing = if self.cfg.scheme == Scheme::Nonlinear {
            Some(self.forcing()?.0)
        } else {
            None
        };
        let (_, u2, _, _) = self.modes();
        let mut p = ModeStack::zeros(g);
        for k in 0..g.nyquist() {
            let xi = g.xi1[k];
            let (f1, f2) = match &forcing {
                Some(f) => (f.f1.profile(k), f.f2.profile(k)),
                None => (ModeProfile::zeros(xi, n), ModeProfile::zeros(xi, n)),
            };
            let pm = pressure_mode(g, xi, (&f1, &f2))?;
            if k == 0 {
                p.set_hermitian(0, &pm.particular.values);
                continue;
            }
            let d2u2 = g.diff.derivative(u2.mode(k), 2)?;
            let target = d2u2[0] + f2.values[0];
            let c = (pm.d_particular.values[0] - target) / xi.abs();
            let v: Vec<_> =
                pm.particular.values.iter().zip(&pm.homogeneous).map(|(a, h)| a + c * *h).collect();
            p.set_hermitian(k, &v);
        }
        s.p = Some(ifft_x1(&p)?);
        Ok(s)
    }

    fn forcing(&self) -> Result<(Forcing, f64)> {
        let g = &self.grid;
        let (u1, u2, b1, b2) = self.modes();
        let phys = |m: &ModeStack| ifft_x1(m);
        let dx1 = |m: &ModeStack| crate::spectral::d1_modes(m);
        let dx2 = |m: &ModeStack| crate::spectral::d2_modes(m, 1);
        let (pu1, pu2, pb1, pb2) = (phys(&u1)?, phys(&u2)?, phys(&b1)?, phys(&b2)?);
        let a11 = phys(&dx1(&u1))?;
        let a21 = phys(&dx2(&u1)?)?;
        let a12 = phys(&dx1(&u2))?;
        let a22 = phys(&dx2(&u2)?)?;
        let c11 = phys(&dx1(&b1))?;
        let c21 = phys(&dx2(&b1)?)?;
        let c12 = phys(&dx1(&b2))?;
        let c22 = phys(&dx2(&b2)?)?;
        let nn = pu1.values.len();
        let mut f1 = vec![0.0; nn];
        let mut f2 = vec![0.0; nn];
        let mut gg = vec![0.0; nn];
        let (mut s1, mut s2) = (0.0f64, 0.0f64);
        for i in 0..nn {
            let (x1, x2, y1, y2) = (pu1.values[i], pu2.values[i], pb1.values[i], pb2.values[i]);
            f1[i] = -(x1 * a11.values[i] + x2 * a21.values[i]) + (y1 * c11.values[i] + y2 * c21.values[i]);
            f2[i] = -(x1 * a12.values[i] + x2 * a22.values[i]) + (y1 * c12.values[i] + y2 * c22.values[i]);
            gg[i] = x1 * y2 - x2 * y1;
            s1 = s1.max(x1.abs()).max(y1.abs());
            s2 = s2.max(x2.abs()).max(y2.abs());
        }
        let cfl = self.cfg.dt * (s1 / g.dx1() + s2 / g.min_dx2());
        let mut f = Forcing {
            f1: fft_x1(&ScalarField::from_values(g, f1)?)?,
            f2: fft_x1(&ScalarField::from_values(g, f2)?)?,
            g: fft_x1(&ScalarField::from_values(g, gg)?)?,
        };
        let n1 = g.n1();
        for k in 0..n1 {
            let kk = if k <= n1 / 2 { k } else { n1 - k };
            let cut = k == g.nyquist() || (self.cfg.dealias && 3 * kk > n1);
            if cut {
                for m in [&mut f.f1, &mut f.f2, &mut f.g] {
                    m.mode_mut(k).iter_mut().for_each(|z| *z = ZERO);
                }
            }
        }
        Ok((f, cfl))
    }

    /// One step of the scheme selected in the configuration.
    pub fn step(&mut self) -> Result<()> {
        match self.cfg.scheme {
            Scheme::Linear => self.step_linear(),
            Scheme::Nonlinear => self.step_nonlinear(),
        }
    }

    /// Crank–Nicolson step of the linearized system.
    pub fn step_linear(&mut self) -> Result<()> {
        self.advance(None)
    }

    /// IMEX step: linear terms as in [`Solver::step_linear`], nonlinear terms
    /// by second-order extrapolation (forward Euler on the first step).
    pub fn step_nonlinear(&mut self) -> Result<()> {
        let (f, cfl) = self.forcing()?;
        if cfl > self.cfg.cfl_safety {
            return Err(Error::Cfl { dt: self.cfg.dt, limit: self.cfg.dt * self.cfg.cfl_safety / cfl });
        }
        self.stats.max_cfl = self.stats.max_cfl.max(cfl);
        let ext = match &self.prev {
            Some(old) => f.extrapolate(old),
            None => f.clone(),
        };
        self.advance(Some(&ext))?;
        self.prev = Some(f);
        Ok(())
    }

    fn advance(&mut self, forcing: Option<&Forcing>) -> Result<()> {
        let g = self.grid.clone();
        let n = g.n2();
        let dt = self.cfg.dt;
        let e_old = self.stats.energy;
        let psi_old = self.psi.clone();
        let psi = &self.psi;
        let phi = &self.phi;
        let results: Vec<(Vec<Complex64>, Vec<Complex64>)> = self
            .ops
            .par_iter()
            .enumerate()
            .map(|(k, op)| {
                let p = psi.mode(k);
                let f = phi.mode(k);
                let mut d = vec![ZERO; n];
                if k == 0 {
                    let mut r = vec![ZERO; n];
                    for j in 1..n - 1 {
                        r[j] = p[j] + 0.5 * dt * apply(&op.l, p, j);
                        if let Some(fc) = forcing {
                            r[j] += dt * fc.f1.mode(0)[j].re;
                        }
                    }
                    op.lu.solve_in_place(&mut r);
                    r[0] = ZERO;
                    r[n - 1] = ZERO;
                    let mut bn = f.to_vec();
                    if let Some(fc) = forcing {
                        g.diff.d1_into(fc.g.mode(0), &mut d);
                        for (b, v) in bn.iter_mut().zip(&d) {
                            *b += dt * v.re;
                        }
                    }
                    return (r, bn);
                }
                let xi = op.xi;
                let x2 = xi * xi;
                let am = 1.0 - 0.25 * dt * dt * x2;
                let mut r = vec![ZERO; n];
                let (mut curl, mut nphi) = (Vec::new(), Vec::new());
                if let Some(fc) = forcing {
                    g.diff.d1_into(fc.f1.mode(k), &mut d);
                    curl = fc.f2.mode(k).iter().zip(&d).map(|(a, b)| I * xi * a - b).collect();
                    nphi = fc.g.mode(k).to_vec();
                }
                for j in 1..n - 1 {
                    let mut v = am * apply(&op.a, p, j) + 0.5 * dt * apply(&op.b, p, j) + dt * I * xi * apply(&op.a, f, j);
                    if forcing.is_some() {
                        v += dt * (-curl[j] + 0.5 * I * xi * dt * apply(&op.a, &nphi, j));
                    }
                    r[j] = v;
                }
                op.lu.solve_in_place(&mut r);
                r[0] = ZERO;
                r[n - 1] = ZERO;
                let mut fnew: Vec<Complex64> = (0..n).map(|j| f[j] + 0.5 * dt * I * xi * (r[j] + p[j])).collect();
                if forcing.is_some() {
                    for (a, b) in fnew.iter_mut().zip(&nphi) {
                        *a += dt * b;
                    }
                }
                fnew[0] = ZERO;
                fnew[n - 1] = ZERO;
                (r, fnew)
            })
            .collect();
        for (k, (p, f)) in results.into_iter().enumerate() {
            self.psi.set_hermitian(k, &p);
            self.phi.set_hermitian(k, &f);
        }
        self.stats.steps += 1;
        self.stats.t = self.stats.steps as f64 * dt;
        self.refresh_stats();
        let e = self.stats.energy;
        if !e.is_finite() {
            return Err(Error::Blowup { t: self.stats.t, factor: f64::INFINITY });
        }
        if e_old > 0.0 && e > 100.0 * e_old {
            return Err(Error::Blowup { t: self.stats.t, factor: (e / e_old).sqrt() });
        }
        // CN dissipates ‖∇u‖² at the midpoint state.
        let mut mid = psi_old;
        for (m, v) in mid.data.iter_mut().zip(&self.psi.data) {
            *m = 0.5 * (*m + v);
        }
        let (m1, m2) = curl_modes(&mid, true);
        self.stats.dissipation += dt * grad_sq(&g, &m1, &m2);
        Ok(())
    }

    /// Advances to `t_end` (rounded to a whole number of steps).
    pub fn advance_to(&mut self, t_end: f64) -> Result<()> {
        let target = (t_end / self.cfg.dt).round() as u64;
        while self.stats.steps < target {
            self.step()?;
        }
        Ok(())
    }
}

/// (∂₂ψ, −∂₁ψ) per mode; the mean mode holds the first component directly.
/// `clamp` zeroes the first component at both ends.
fn curl_modes(psi: &ModeStack, clamp: bool) -> (ModeStack, ModeStack) {
    let g = &psi.grid;
    let n = g.n2();
    let mut v1 = ModeStack::zeros(g);
    let mut v2 = ModeStack::zeros(g);
    let mut d = vec![ZERO; n];
    for k in 0..g.nyquist() {
        let p = psi.mode(k);
        if k == 0 {
            v1.set_hermitian(0, p);
            continue;
        }
        let xi = g.xi1[k];
        g.diff.d1_into(p, &mut d);
        if clamp {
            d[0] = ZERO;
            d[n - 1] = ZERO;
        }
        v1.set_hermitian(k, &d);
        let v: Vec<_> = p.iter().map(|z| -I * xi * z).collect();
        v2.set_hermitian(k, &v);
    }
    (v1, v2)
}

/// ‖∇u‖² from the velocity modes.
fn grad_sq(g: &Grid, u1: &ModeStack, u2: &ModeStack) -> f64 {
    mode_l2sq(g, u1, 1, false) + mode_l2sq(g, u2, 1, false) + mode_l2sq(g, u1, 0, true) + mode_l2sq(g, u2, 0, true)
}

/// Stream functions from mode stacks of (v₁, v₂): ψ = i v̂₂/ξ₁, mean mode keeps v̂₁.
fn stream_from(v1: &ModeStack, v2: &ModeStack) -> ModeStack {
    let g = v1.grid.clone();
    let n = g.n2();
    let mut out = ModeStack::zeros(&g);
    for k in 0..g.nyquist() {
        let mut p: Vec<Complex64> = if k == 0 {
            v1.mode(0).iter().map(|z| Complex64::new(z.re, 0.0)).collect()
        } else {
            let xi = g.xi1[k];
            v2.mode(k).iter().map(|z| I * z / xi).collect()
        };
        p[0] = ZERO;
        p[n - 1] = ZERO;
        out.set_hermitian(k, &p);
    }
    out
}

/// L1 Σ_k ∫ |∂^a f̂_k|², with a horizontal derivatives (`order`) or one vertical (`vertical`).
pub(crate) fn mode_l2sq(g: &Grid, m: &ModeStack, order: i32, vertical: bool) -> f64 {
    let n = g.n2();
    let mut d = vec![ZERO; n];
    let mut total = Vec::with_capacity(g.nyquist());
    for k in 0..g.nyquist() {
        let v = m.mode(k);
        let s = if vertical {
            g.diff.d1_into(v, &mut d);
            g.profile_norm2(&d)
        } else {
            g.profile_norm2(v)
        };
        let w = if k == 0 { 1.0 } else { 2.0 };
        total.push(w * s * g.xi1[k].powi(2 * order));
    }
    g.spec.l1 * crate::quadrature::compensated_sum(total.into_iter())
}

