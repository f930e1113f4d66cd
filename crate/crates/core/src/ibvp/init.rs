use std::f64::consts::PI;
use std::sync::Arc;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::spectral::{
    derivative_x1, derivative_x2, divergence, fft_x1, helmholtz_project, ifft_x1, Grid, ModeStack, ScalarField,
    VectorField,
};

/// How b₀ relates to u₀.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum FieldRelation {
    /// b₀ = u₀: the quadratic terms of the momentum and induction equations cancel at t = 0.
    #[default]
    Alfvenic,
    /// b₀ from its own random stream function.
    Independent,
    /// b₀ = 0.
    Zero,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct InitSpec {
    /// Target max|u₀|.
    pub amplitude: f64,
    pub radius: f64,
    pub center: [f64; 2],
    pub seed: u64,
    pub zero_x1_mean: bool,
    pub relation: FieldRelation,
    /// Number of random plane-wave factors in the stream function.
    pub modes: usize,
}

impl Default for InitSpec {
    fn default() -> Self {
        Self {
            amplitude: 0.01,
            radius: 4.0,
            center: [0.0, 6.0],
            seed: 0,
            zero_x1_mean: true,
            relation: FieldRelation::Alfvenic,
            modes: 3,
        }
    }
}

impl InitSpec {
    pub fn validate(&self, grid: &Grid) -> Result<()> {
        if !(self.amplitude.is_finite() && self.amplitude >= 0.0) {
            return Err(Error::config("init.amplitude", "must be finite and >= 0"));
        }
        if !(self.radius.is_finite() && self.radius > 0.0) {
            return Err(Error::config("init.radius", "must be > 0"));
        }
        let [c1, c2] = self.center;
        if !(c1.is_finite() && c2.is_finite()) {
            return Err(Error::config("init.center", "must be finite"));
        }
        if c2 < self.radius || c2 + self.radius > grid.spec.l2 {
            return Err(Error::config(
                "init.center",
                format!(
                    "support [{}, {}] in x2 does not fit in [0, {}]",
                    c2 - self.radius,
                    c2 + self.radius,
                    grid.spec.l2
                ),
            ));
        }
        if 2.0 * self.radius > grid.spec.l1 {
            return Err(Error::config("init.radius", "support wider than the period"));
        }
        if self.modes == 0 {
            return Err(Error::config("init.modes", "must be >= 1"));
        }
        Ok(())
    }
}

/// Random compactly supported stream function, (1 − ρ²)⁶ times a sum of plane waves.
fn stream_function(grid: &Arc<Grid>, spec: &InitSpec, rng: &mut ChaCha8Rng) -> ScalarField {
    let waves: Vec<(f64, f64, f64, f64)> = (0..spec.modes)
        .map(|_| {
            let a = rng.gen_range(0.5..1.0);
            let k = rng.gen_range(0.5..2.5);
            let dir = rng.gen_range(0.0..2.0 * PI);
            let th = rng.gen_range(0.0..2.0 * PI);
            (a, k * dir.cos(), k * dir.sin(), th)
        })
        .collect();
    let l1 = grid.spec.l1;
    let r = spec.radius;
    let [c1, c2] = spec.center;
    ScalarField::from_fn(grid, |x1, x2| {
        let d1 = (x1 - c1 + 0.5 * l1).rem_euclid(l1) - 0.5 * l1;
        let d2 = x2 - c2;
        let rho2 = (d1 * d1 + d2 * d2) / (r * r);
        if rho2 >= 1.0 {
            return 0.0;
        }
        let env = (1.0 - rho2).powi(6);
        env * waves.iter().map(|(a, k1, k2, th)| a * (k1 * d1 / r + k2 * d2 / r + th).cos()).sum::<f64>()
    })
}

/// Velocity-type field (∂₂ψ, −∂₁ψ) assembled per mode so that the discrete
/// divergence vanishes identically.
fn curl_field(psi: &ScalarField, zero_mean: bool) -> Result<VectorField> {
    let g = psi.grid.clone();
    let n = g.n2();
    let mut m = fft_x1(psi)?;
    let zero = Complex64::new(0.0, 0.0);
    let nyq = g.nyquist();
    m.mode_mut(nyq).iter_mut().for_each(|z| *z = zero);
    if zero_mean {
        m.mode_mut(0).iter_mut().for_each(|z| *z = zero);
    }
    let mut v1 = ModeStack::zeros(&g);
    let mut v2 = ModeStack::zeros(&g);
    let mut d = vec![zero; n];
    for k in 0..nyq {
        let p = m.mode(k).to_vec();
        g.diff.d1_into(&p, &mut d);
        v1.set_hermitian(k, &d);
        let xi = g.xi1[k];
        let w: Vec<_> = p.iter().map(|z| Complex64::new(0.0, -xi) * z).collect();
        v2.set_hermitian(k, &w);
    }
    VectorField::new(ifft_x1(&v1)?, ifft_x1(&v2)?)
}

/// Divergence-free, wall-compatible perturbation data. Returns (u₀, b₀).
pub fn make_initial_data(grid: &Arc<Grid>, spec: &InitSpec) -> Result<(VectorField, VectorField)> {
    spec.validate(grid)?;
    if spec.amplitude == 0.0 {
        return Ok((VectorField::zeros(grid), VectorField::zeros(grid)));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let normalized = |v: VectorField| -> Result<VectorField> {
        let m = v.max_abs();
        if m == 0.0 {
            return Err(Error::Domain("stream function vanished on the grid; increase radius or resolution".into()));
        }
        let s = spec.amplitude / m;
        VectorField::new(v.c1.scaled(s), v.c2.scaled(s))
    };
    let u = normalized(curl_field(&stream_function(grid, spec, &mut rng), spec.zero_x1_mean)?)?;
    let b = match spec.relation {
        FieldRelation::Alfvenic => u.clone(),
        FieldRelation::Independent => {
            normalized(curl_field(&stream_function(grid, spec, &mut rng), spec.zero_x1_mean)?)?
        }
        FieldRelation::Zero => VectorField::zeros(grid),
    };
    Ok((u, b))
}

/// Residuals of the compatibility conditions. All entries are max-norms.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Default)]
pub struct CompatibilityReport {
    pub div_u: f64,
    pub div_b: f64,
    pub u1_wall: f64,
    pub u2_wall: f64,
    pub b2_wall: f64,
    pub b1_wall: f64,
    pub d2_b1_wall: f64,
    /// Wall trace of 𝒫(Δu₀ − u₀·∇u₀ + b₀·∇b₀).
    pub accel_wall: f64,
    /// max(max|u₀|, max|b₀|), the reference for relative checks.
    pub scale: f64,
}

impl CompatibilityReport {
    pub fn entries(&self) -> [(&'static str, f64); 8] {
        [
            ("div_u", self.div_u),
            ("div_b", self.div_b),
            ("u1_wall", self.u1_wall),
            ("u2_wall", self.u2_wall),
            ("b2_wall", self.b2_wall),
            ("b1_wall", self.b1_wall),
            ("d2_b1_wall", self.d2_b1_wall),
            ("accel_wall", self.accel_wall),
        ]
    }

    pub fn max_residual(&self) -> f64 {
        self.entries().iter().fold(0.0, |m, (_, v)| m.max(*v))
    }

    /// Names of conditions whose residual exceeds `rel_tol · scale`.
    pub fn violations(&self, rel_tol: f64) -> Vec<&'static str> {
        let lim = rel_tol * self.scale;
        self.entries().iter().filter(|(_, v)| !(*v <= lim)).map(|(k, _)| *k).collect()
    }

    pub fn is_compatible(&self, rel_tol: f64) -> bool {
        self.violations(rel_tol).is_empty()
    }
}

fn wall_max(f: &ScalarField) -> f64 {
    let n1 = f.grid.n1();
    f.values[..n1].iter().fold(0.0, |m, v| m.max(v.abs()))
}

fn advect(a: &VectorField, v: &VectorField) -> Result<VectorField> {
    let comp = |c: &ScalarField| -> Result<ScalarField> {
        let d1 = derivative_x1(c)?;
        let d2 = derivative_x2(c, 1)?;
        let vals = (0..c.values.len())
            .map(|i| a.c1.values[i] * d1.values[i] + a.c2.values[i] * d2.values[i])
            .collect();
        ScalarField::from_values(&c.grid, vals)
    };
    VectorField::new(comp(&v.c1)?, comp(&v.c2)?)
}

fn laplacian(c: &ScalarField) -> Result<ScalarField> {
    let d11 = derivative_x1(&derivative_x1(c)?)?;
    let mut d22 = derivative_x2(c, 2)?;
    d22.axpy(1.0, &d11);
    Ok(d22)
}

pub fn check_compatibility(u0: &VectorField, b0: &VectorField) -> Result<CompatibilityReport> {
    if !u0.grid().same_as(b0.grid()) {
        return Err(Error::Domain("u0 and b0 on different grids".into()));
    }
    let max_abs = |f: &ScalarField| f.max_abs();
    let scale = u0.max_abs().max(b0.max_abs());
    if scale == 0.0 {
        return Ok(CompatibilityReport::default());
    }
    let mut acc = VectorField::new(laplacian(&u0.c1)?, laplacian(&u0.c2)?)?;
    let uu = advect(u0, u0)?;
    let bb = advect(b0, b0)?;
    acc.c1.axpy(-1.0, &uu.c1);
    acc.c2.axpy(-1.0, &uu.c2);
    acc.c1.axpy(1.0, &bb.c1);
    acc.c2.axpy(1.0, &bb.c2);
    let pa = helmholtz_project(&acc)?;
    Ok(CompatibilityReport {
        div_u: max_abs(&divergence(u0)?),
        div_b: max_abs(&divergence(b0)?),
        u1_wall: wall_max(&u0.c1),
        u2_wall: wall_max(&u0.c2),
        b2_wall: wall_max(&b0.c2),
        b1_wall: wall_max(&b0.c1),
        d2_b1_wall: wall_max(&derivative_x2(&b0.c1, 1)?),
        accel_wall: wall_max(&pa.c1).max(wall_max(&pa.c2)),
        scale,
    })
}
