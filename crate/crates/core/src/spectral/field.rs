use std::sync::Arc;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::spectral::Grid;

/// Real field on the N1×N2 grid, stored x₁-fastest: `values[i2 * N1 + i1]`.
#[derive(Debug, Clone)]
pub struct ScalarField {
    pub grid: Arc<Grid>,
    pub values: Vec<f64>,
}

impl ScalarField {
    pub fn zeros(grid: &Arc<Grid>) -> Self {
        Self { grid: grid.clone(), values: vec![0.0; grid.n1() * grid.n2()] }
    }

    pub fn from_values(grid: &Arc<Grid>, values: Vec<f64>) -> Result<Self> {
        let n = grid.n1() * grid.n2();
        if values.len() != n {
            return Err(Error::ShapeMismatch { expected: n, got: values.len() });
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::Domain("field has non-finite entries".into()));
        }
        Ok(Self { grid: grid.clone(), values })
    }

    pub fn from_fn(grid: &Arc<Grid>, mut f: impl FnMut(f64, f64) -> f64) -> Self {
        let (n1, n2) = (grid.n1(), grid.n2());
        let mut values = vec![0.0; n1 * n2];
        for j in 0..n2 {
            for i in 0..n1 {
                values[j * n1 + i] = f(grid.x1[i], grid.x2[j]);
            }
        }
        Self { grid: grid.clone(), values }
    }

    #[inline]
    pub fn at(&self, i1: usize, i2: usize) -> f64 {
        self.values[i2 * self.grid.n1() + i1]
    }

    pub fn is_finite(&self) -> bool {
        self.values.iter().all(|v| v.is_finite())
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn scaled(&self, a: f64) -> Self {
        Self { grid: self.grid.clone(), values: self.values.iter().map(|v| a * v).collect() }
    }

    pub fn axpy(&mut self, a: f64, other: &ScalarField) {
        for (v, o) in self.values.iter_mut().zip(&other.values) {
            *v += a * o;
        }
    }

    /// Values along x₂ at fixed x₁ index.
    pub fn column(&self, i1: usize) -> Vec<f64> {
        let n1 = self.grid.n1();
        (0..self.grid.n2()).map(|j| self.values[j * n1 + i1]).collect()
    }
}

/// Pair of scalar fields on one grid.
#[derive(Debug, Clone)]
pub struct VectorField {
    pub c1: ScalarField,
    pub c2: ScalarField,
}

impl VectorField {
    pub fn new(c1: ScalarField, c2: ScalarField) -> Result<Self> {
        if !c1.grid.same_as(&c2.grid) {
            return Err(Error::Domain("vector components on different grids".into()));
        }
        Ok(Self { c1, c2 })
    }

    pub fn zeros(grid: &Arc<Grid>) -> Self {
        Self { c1: ScalarField::zeros(grid), c2: ScalarField::zeros(grid) }
    }

    pub fn grid(&self) -> &Arc<Grid> {
        &self.c1.grid
    }

    pub fn max_abs(&self) -> f64 {
        self.c1.max_abs().max(self.c2.max_abs())
    }
}

/// One horizontal Fourier mode as a function of x₂.
#[derive(Debug, Clone, PartialEq)]
pub struct ModeProfile {
    pub xi1: f64,
    pub values: Vec<Complex64>,
}

impl ModeProfile {
    pub fn new(xi1: f64, values: Vec<Complex64>) -> Self {
        Self { xi1, values }
    }

    pub fn zeros(xi1: f64, n: usize) -> Self {
        Self { xi1, values: vec![Complex64::new(0.0, 0.0); n] }
    }

    pub fn from_real(xi1: f64, v: &[f64]) -> Self {
        Self { xi1, values: v.iter().map(|&x| Complex64::new(x, 0.0)).collect() }
    }
}

/// All horizontal modes of a field, mode-major: `data[k * N2 + j]`, k in FFT order.
#[derive(Debug, Clone)]
pub struct ModeStack {
    pub grid: Arc<Grid>,
    pub data: Vec<Complex64>,
}

impl ModeStack {
    pub fn zeros(grid: &Arc<Grid>) -> Self {
        Self { grid: grid.clone(), data: vec![Complex64::new(0.0, 0.0); grid.n1() * grid.n2()] }
    }

    pub fn mode(&self, k: usize) -> &[Complex64] {
        let n2 = self.grid.n2();
        &self.data[k * n2..(k + 1) * n2]
    }

    pub fn mode_mut(&mut self, k: usize) -> &mut [Complex64] {
        let n2 = self.grid.n2();
        &mut self.data[k * n2..(k + 1) * n2]
    }

    pub fn profile(&self, k: usize) -> ModeProfile {
        ModeProfile::new(self.grid.xi1[k], self.mode(k).to_vec())
    }

    /// Writes mode k and, for a real field, its conjugate partner −k.
    pub fn set_hermitian(&mut self, k: usize, v: &[Complex64]) {
        let n1 = self.grid.n1();
        self.mode_mut(k).copy_from_slice(v);
        let kc = (n1 - k) % n1;
        if kc != k {
            for (d, s) in self.mode_mut(kc).iter_mut().zip(v) {
                *d = s.conj();
            }
        }
    }
}

/// Horizontal transform with f̂_k(x₂) = (1/N1) Σ f(x₁,x₂) e^{−iξ₁x₁}.
pub fn fft_x1(field: &ScalarField) -> Result<ModeStack> {
    let grid = &field.grid;
    let (n1, n2) = (grid.n1(), grid.n2());
    if field.values.len() != n1 * n2 {
        return Err(Error::ShapeMismatch { expected: n1 * n2, got: field.values.len() });
    }
    let mut out = ModeStack::zeros(grid);
    let mut row = vec![Complex64::new(0.0, 0.0); n1];
    let mut scratch = vec![Complex64::new(0.0, 0.0); grid.fwd.get_inplace_scratch_len()];
    let scale = 1.0 / n1 as f64;
    for j in 0..n2 {
        for (r, v) in row.iter_mut().zip(&field.values[j * n1..(j + 1) * n1]) {
            *r = Complex64::new(*v, 0.0);
        }
        grid.fwd.process_with_scratch(&mut row, &mut scratch);
        for (k, r) in row.iter().enumerate() {
            out.data[k * n2 + j] = r * scale;
        }
    }
    Ok(out)
}

/// Inverse of [`fft_x1`]; the imaginary part is discarded.
pub fn ifft_x1(modes: &ModeStack) -> Result<ScalarField> {
    let grid = &modes.grid;
    let (n1, n2) = (grid.n1(), grid.n2());
    if modes.data.len() != n1 * n2 {
        return Err(Error::ShapeMismatch { expected: n1 * n2, got: modes.data.len() });
    }
    let mut values = vec![0.0; n1 * n2];
    let mut row = vec![Complex64::new(0.0, 0.0); n1];
    let mut scratch = vec![Complex64::new(0.0, 0.0); grid.inv.get_inplace_scratch_len()];
    for j in 0..n2 {
        for (k, r) in row.iter_mut().enumerate() {
            *r = modes.data[k * n2 + j];
        }
        grid.inv.process_with_scratch(&mut row, &mut scratch);
        for (v, r) in values[j * n1..(j + 1) * n1].iter_mut().zip(&row) {
            *v = r.re;
        }
    }
    Ok(ScalarField { grid: grid.clone(), values })
}

/// Spectral ∂₁ with the Nyquist mode zeroed.
pub fn d1_modes(m: &ModeStack) -> ModeStack {
    let grid = &m.grid;
    let mut out = m.clone();
    let nyq = grid.nyquist();
    for k in 0..grid.n1() {
        let f = if k == nyq { Complex64::new(0.0, 0.0) } else { Complex64::new(0.0, grid.xi1[k]) };
        for v in out.mode_mut(k) {
            *v *= f;
        }
    }
    out
}

/// ∂₂ of order 1 or 2 applied mode by mode.
pub fn d2_modes(m: &ModeStack, order: usize) -> Result<ModeStack> {
    let grid = &m.grid;
    let mut out = ModeStack::zeros(grid);
    for k in 0..grid.n1() {
        let d = grid.diff.derivative(m.mode(k), order)?;
        out.mode_mut(k).copy_from_slice(&d);
    }
    Ok(out)
}

/// ∂₂ of order 1 or 2 applied to a real field.
pub fn derivative_x2(f: &ScalarField, order: usize) -> Result<ScalarField> {
    let grid = &f.grid;
    let (n1, n2) = (grid.n1(), grid.n2());
    let mut out = vec![0.0; n1 * n2];
    let mut col = vec![0.0; n2];
    for i in 0..n1 {
        for j in 0..n2 {
            col[j] = f.values[j * n1 + i];
        }
        let d = grid.diff.derivative(&col, order)?;
        for j in 0..n2 {
            out[j * n1 + i] = d[j];
        }
    }
    Ok(ScalarField { grid: grid.clone(), values: out })
}

/// ∂₂ of order 1 or 2 applied to one mode profile on the grid's nodes.
pub fn derivative_x2_profile(grid: &Grid, p: &ModeProfile, order: usize) -> Result<ModeProfile> {
    Ok(ModeProfile::new(p.xi1, grid.diff.derivative(&p.values, order)?))
}

/// Spectral ∂₁ of a real field.
pub fn derivative_x1(f: &ScalarField) -> Result<ScalarField> {
    ifft_x1(&d1_modes(&fft_x1(f)?))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::GridSpec;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::PI;

    fn grid() -> Arc<Grid> {
        Grid::new(GridSpec::new(2.0 * PI, 16, 1.0, 9, 1.0)).unwrap()
    }

    #[test]
    fn constant_has_single_mode() {
        let g = grid();
        let f = ScalarField::from_fn(&g, |_, _| 1.0);
        let m = fft_x1(&f).unwrap();
        for k in 0..16 {
            for v in m.mode(k) {
                let expect = if k == 0 { 1.0 } else { 0.0 };
                assert!((v - expect).norm() < 1e-14);
            }
        }
    }

    #[test]
    fn cosine_splits_in_half() {
        let g = grid();
        let f = ScalarField::from_fn(&g, |x1, x2| x1.cos() * (1.0 + x2));
        let m = fft_x1(&f).unwrap();
        for (j, x2) in g.x2.iter().enumerate() {
            assert!((m.mode(1)[j] - 0.5 * (1.0 + x2)).norm() < 1e-13);
            assert!((m.mode(15)[j] - 0.5 * (1.0 + x2)).norm() < 1e-13);
            assert!(m.mode(2)[j].norm() < 1e-13);
        }
    }

    #[test]
    fn random_round_trip() {
        let g = grid();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let f = ScalarField::from_fn(&g, |_, _| rng.gen_range(-1.0..1.0));
        let back = ifft_x1(&fft_x1(&f).unwrap()).unwrap();
        let err = f.values.iter().zip(&back.values).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        assert!(err < 1e-12);
    }

    #[test]
    fn spectral_d1_exact_on_trig() {
        let g = grid();
        let f = ScalarField::from_fn(&g, |x1, x2| (3.0 * x1).sin() * x2);
        let d = derivative_x1(&f).unwrap();
        let e = ScalarField::from_fn(&g, |x1, x2| 3.0 * (3.0 * x1).cos() * x2);
        let err = d.values.iter().zip(&e.values).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        assert!(err < 1e-12);
    }
}
