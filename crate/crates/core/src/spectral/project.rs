use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::linalg::BandMatrix;
use crate::quadrature::compensated_sum;
use crate::spectral::field::{fft_x1, ifft_x1, ModeStack, ScalarField, VectorField};
use crate::spectral::Grid;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// Discrete divergence iξ₁v̂₁ + D₂v̂₂ in mode space (Nyquist dropped).
pub fn divergence_modes(v1: &ModeStack, v2: &ModeStack) -> ModeStack {
    let g = &v1.grid;
    let mut out = ModeStack::zeros(g);
    let n2 = g.n2();
    let mut d = vec![ZERO; n2];
    for k in 0..g.n1() {
        if k == g.nyquist() {
            continue;
        }
        let xi = Complex64::new(0.0, g.xi1[k]);
        g.diff.d1_into(v2.mode(k), &mut d);
        for ((o, a), b) in out.mode_mut(k).iter_mut().zip(v1.mode(k)).zip(&d) {
            *o = xi * a + b;
        }
    }
    out
}

/// Discrete divergence of a vector field.
pub fn divergence(v: &VectorField) -> Result<ScalarField> {
    let m1 = fft_x1(&v.c1)?;
    let m2 = fft_x1(&v.c2)?;
    ifft_x1(&divergence_modes(&m1, &m2))
}

/// L² norm of the discrete divergence over interior x₂ nodes.
pub fn divergence_norm_interior(v: &VectorField) -> Result<f64> {
    let d = divergence(v)?;
    let g = &d.grid;
    let n1 = g.n1();
    let n2 = g.n2();
    let dx1 = g.dx1();
    Ok(compensated_sum((1..n2 - 1).map(|j| {
        g.w2[j] * dx1 * d.values[j * n1..(j + 1) * n1].iter().map(|x| x * x).sum::<f64>()
    }))
    .sqrt())
}

/// Solves the potential problem for one mode with ξ₁ ≠ 0.
///
/// Rows: D₂φ(0) = v₂(0); (D₂D₂ − ξ₁²)φ = div on interior nodes;
/// D₂φ + |ξ₁|φ = 0 at x₂ = L2.
pub(crate) fn potential_mode(
    grid: &Grid,
    mode: usize,
    xi: f64,
    v1: &[Complex64],
    v2: &[Complex64],
) -> Result<Vec<Complex64>> {
    let n = grid.n2();
    let d1 = &grid.diff.d1;
    let mut a = BandMatrix::zeros(n, 2, 2);
    let mut rhs = vec![ZERO; n];
    for (k, w) in d1[0].w.iter().enumerate() {
        a.add(0, d1[0].start + k, Complex64::new(*w, 0.0));
    }
    rhs[0] = v2[0];
    let mut dv2 = vec![ZERO; n];
    grid.diff.d1_into(v2, &mut dv2);
    let ixi = Complex64::new(0.0, xi);
    for j in 1..n - 1 {
        for (k, wo) in d1[j].w.iter().enumerate() {
            let m = d1[j].start + k;
            for (l, wi) in d1[m].w.iter().enumerate() {
                a.add(j, d1[m].start + l, Complex64::new(wo * wi, 0.0));
            }
        }
        a.add(j, j, Complex64::new(-xi * xi, 0.0));
        rhs[j] = ixi * v1[j] + dv2[j];
    }
    let last = &d1[n - 1];
    for (k, w) in last.w.iter().enumerate() {
        a.add(n - 1, last.start + k, Complex64::new(*w, 0.0));
    }
    a.add(n - 1, n - 1, Complex64::new(xi.abs(), 0.0));
    let lu = a.factor(mode)?;
    lu.solve_in_place(&mut rhs);
    if rhs.iter().any(|z| !z.is_finite()) {
        return Err(Error::Singular { mode, reason: "non-finite potential".into() });
    }
    Ok(rhs)
}

/// Helmholtz projection onto discretely divergence-free fields with zero
/// normal trace at x₂ = 0. Returns the projected field and the potential.
pub fn helmholtz_project_with_potential(v: &VectorField) -> Result<(VectorField, ScalarField)> {
    let g = v.grid().clone();
    for c in [&v.c1, &v.c2] {
        if !c.is_finite() {
            return Err(Error::Domain("projection input has non-finite entries".into()));
        }
    }
    let m1 = fft_x1(&v.c1)?;
    let m2 = fft_x1(&v.c2)?;
    let mut p1 = ModeStack::zeros(&g);
    let mut p2 = ModeStack::zeros(&g);
    let mut phi = ModeStack::zeros(&g);
    let n2 = g.n2();
    for k in 0..=g.nyquist() {
        let (a, b) = (m1.mode(k), m2.mode(k));
        if k == 0 || k == g.nyquist() {
            // Divergence-free means v₂ ≡ 0 here; φ' = v₂ with zero mean.
            let mut ph = vec![ZERO; n2];
            for j in 1..n2 {
                ph[j] = ph[j - 1] + (b[j] + b[j - 1]) * (0.5 * (g.x2[j] - g.x2[j - 1]));
            }
            let mean: Complex64 =
                ph.iter().zip(&g.w2).map(|(p, w)| p * *w).sum::<Complex64>() / g.spec.l2;
            for p in &mut ph {
                *p -= mean;
            }
            p1.set_hermitian(k, a);
            p2.set_hermitian(k, &vec![ZERO; n2]);
            phi.set_hermitian(k, &ph);
            continue;
        }
        let xi = g.xi1[k];
        let ph = potential_mode(&g, k, xi, a, b)?;
        let mut dph = vec![ZERO; n2];
        g.diff.d1_into(&ph, &mut dph);
        let ixi = Complex64::new(0.0, xi);
        let q1: Vec<Complex64> = a.iter().zip(&ph).map(|(x, p)| x - ixi * p).collect();
        let q2: Vec<Complex64> = b.iter().zip(&dph).map(|(x, d)| x - d).collect();
        p1.set_hermitian(k, &q1);
        p2.set_hermitian(k, &q2);
        phi.set_hermitian(k, &ph);
    }
    Ok((VectorField::new(ifft_x1(&p1)?, ifft_x1(&p2)?)?, ifft_x1(&phi)?))
}

pub fn helmholtz_project(v: &VectorField) -> Result<VectorField> {
    Ok(helmholtz_project_with_potential(v)?.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::{norm, GridSpec, NormSpec};
    use std::sync::Arc;

    fn grid(n2: usize) -> Arc<Grid> {
        Grid::new(GridSpec::new(20.0, 32, 12.0, n2, 1.0)).unwrap()
    }

    fn vnorm(v: &VectorField) -> f64 {
        norm(&[&v.c1, &v.c2], NormSpec::L2).unwrap()
    }

    fn bump(x1: f64, x2: f64, c: (f64, f64)) -> f64 {
        (-((x1 - c.0).powi(2) + (x2 - c.1).powi(2))).exp()
    }

    fn random_like(g: &Arc<Grid>) -> VectorField {
        let c1 = ScalarField::from_fn(g, |x1, x2| bump(x1, x2, (9.0, 2.0)) + 0.3 * x2 * (-x2).exp());
        let c2 = ScalarField::from_fn(g, |x1, x2| bump(x1, x2, (11.0, 1.0)) * (1.0 + x1 / 10.0));
        VectorField::new(c1, c2).unwrap()
    }

    #[test]
    fn projected_field_is_divergence_free_with_zero_normal_trace() {
        let g = grid(97);
        let v = random_like(&g);
        let p = helmholtz_project(&v).unwrap();
        let div = divergence_norm_interior(&p).unwrap();
        assert!(div < 1e-8 * vnorm(&v), "divergence {div}");
        let n1 = g.n1();
        assert!(p.c2.values[..n1].iter().all(|x| x.abs() < 1e-12));
    }

    #[test]
    fn idempotent() {
        let g = grid(97);
        let v = random_like(&g);
        let p = helmholtz_project(&v).unwrap();
        let pp = helmholtz_project(&p).unwrap();
        let mut d = pp.clone();
        d.c1.axpy(-1.0, &p.c1);
        d.c2.axpy(-1.0, &p.c2);
        assert!(vnorm(&d) < 1e-8 * vnorm(&v));
    }

    #[test]
    fn gradient_is_annihilated() {
        let g = grid(193);
        let phi = ScalarField::from_fn(&g, |x1, x2| bump(x1, x2, (10.0, 3.0)) + bump(x1, -x2, (10.0, 3.0)));
        let gx = crate::spectral::derivative_x1(&phi).unwrap();
        let gy = crate::spectral::derivative_x2(&phi, 1).unwrap();
        let v = VectorField::new(gx, gy).unwrap();
        let p = helmholtz_project(&v).unwrap();
        assert!(vnorm(&p) < 1e-3 * vnorm(&v), "{}", vnorm(&p) / vnorm(&v));
    }

    // Inner product ⟨Pv, v − Pv⟩ on [0, L2] minus the exterior contribution
    // ∫_{x₂>L2} |∇φ|² of the decaying potential continued past the top.
    fn orth_defect(n2: usize) -> f64 {
        let g = grid(n2);
        let v = random_like(&g);
        let (p, phi) = helmholtz_project_with_potential(&v).unwrap();
        let mut r = v.clone();
        r.c1.axpy(-1.0, &p.c1);
        r.c2.axpy(-1.0, &p.c2);
        let n1 = g.n1();
        let mut inner = 0.0;
        for j in 0..g.n2() {
            for i in 0..n1 {
                let id = j * n1 + i;
                inner += g.w2[j] * g.dx1() * (p.c1.values[id] * r.c1.values[id] + p.c2.values[id] * r.c2.values[id]);
            }
        }
        let top = fft_x1(&phi).unwrap();
        let tail: f64 = (0..n1)
            .map(|k| g.spec.l1 * g.xi1[k].abs() * top.mode(k)[g.n2() - 1].norm_sqr())
            .sum();
        (inner - tail).abs() / vnorm(&v).powi(2)
    }

    #[test]
    fn orthogonality_defect_converges_at_second_order() {
        let (a, b) = (orth_defect(97), orth_defect(193));
        assert!(a < 1e-2 && b < a / 3.0, "defects {a} {b}");
    }
}
