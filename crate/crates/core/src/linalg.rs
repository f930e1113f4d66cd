//! Banded LU with partial pivoting, used for the per-mode implicit solves.

use num_complex::Complex64;

use crate::error::{Error, Result};

/// A square band matrix with `kl` sub- and `ku` super-diagonals.
///
/// Storage is row-wise with `kl` extra super-diagonals reserved for the
/// fill produced by row interchanges.
#[derive(Debug, Clone)]
pub struct BandMatrix {
    n: usize,
    kl: usize,
    ku: usize,
    width: usize,
    data: Vec<Complex64>,
}

impl BandMatrix {
    pub fn zeros(n: usize, kl: usize, ku: usize) -> Self {
        let width = 2 * kl + ku + 1;
        Self {
            n,
            kl,
            ku,
            width,
            data: vec![Complex64::new(0.0, 0.0); n * width],
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    fn idx(&self, i: usize, j: usize) -> usize {
        debug_assert!(j + self.kl >= i && j <= i + self.ku + self.kl);
        i * self.width + (j + self.kl - i)
    }

    /// Adds `v` to entry (i, j). Panics if (i, j) lies outside the band.
    pub fn add(&mut self, i: usize, j: usize, v: Complex64) {
        assert!(
            j + self.kl >= i && j <= i + self.ku,
            "entry ({i},{j}) outside band kl={} ku={}",
            self.kl,
            self.ku
        );
        let k = self.idx(i, j);
        self.data[k] += v;
    }

    pub fn get(&self, i: usize, j: usize) -> Complex64 {
        if j + self.kl < i || j > i + self.ku + self.kl {
            return Complex64::new(0.0, 0.0);
        }
        self.data[self.idx(i, j)]
    }

    /// Matrix-vector product (before factorization).
    pub fn mul_vec(&self, x: &[Complex64]) -> Vec<Complex64> {
        let mut y = vec![Complex64::new(0.0, 0.0); self.n];
        for (i, yi) in y.iter_mut().enumerate() {
            let lo = i.saturating_sub(self.kl);
            let hi = (i + self.ku).min(self.n - 1);
            for j in lo..=hi {
                *yi += self.data[self.idx(i, j)] * x[j];
            }
        }
        y
    }

    /// Factorizes in place. `mode` is only used to label errors.
    pub fn factor(mut self, mode: usize) -> Result<BandLu> {
        let n = self.n;
        let (kl, ku) = (self.kl, self.ku);
        let mut piv = vec![0usize; n];
        let scale = self
            .data
            .iter()
            .map(|z| z.norm())
            .fold(0.0f64, f64::max)
            .max(f64::MIN_POSITIVE);
        for k in 0..n {
            let last = (k + kl).min(n - 1);
            let mut p = k;
            let mut best = self.data[self.idx(k, k)].norm();
            for i in k + 1..=last {
                let v = self.data[self.idx(i, k)].norm();
                if v > best {
                    best = v;
                    p = i;
                }
            }
            if best <= 1e-300 || best < scale * 1e-15 * f64::EPSILON {
                return Err(Error::Singular {
                    mode,
                    reason: format!("zero pivot at row {k}"),
                });
            }
            piv[k] = p;
            let jmax = (k + ku + kl).min(n - 1);
            if p != k {
                for j in k..=jmax {
                    let a = self.idx(k, j);
                    let b = self.idx(p, j);
                    self.data.swap(a, b);
                }
            }
            let pivot = self.data[self.idx(k, k)];
            for i in k + 1..=last {
                let ik = self.idx(i, k);
                let l = self.data[ik] / pivot;
                self.data[ik] = l;
                if l == Complex64::new(0.0, 0.0) {
                    continue;
                }
                for j in k + 1..=jmax {
                    let kj = self.data[self.idx(k, j)];
                    let ij = self.idx(i, j);
                    self.data[ij] -= l * kj;
                }
            }
        }
        Ok(BandLu { m: self, piv })
    }
}

/// Factorized band matrix.
#[derive(Debug, Clone)]
pub struct BandLu {
    m: BandMatrix,
    piv: Vec<usize>,
}

impl BandLu {
    pub fn n(&self) -> usize {
        self.m.n
    }

    pub fn solve_in_place(&self, b: &mut [Complex64]) {
        let m = &self.m;
        let n = m.n;
        assert_eq!(b.len(), n);
        for k in 0..n {
            let p = self.piv[k];
            if p != k {
                b.swap(k, p);
            }
            let bk = b[k];
            let last = (k + m.kl).min(n - 1);
            for i in k + 1..=last {
                b[i] -= m.data[m.idx(i, k)] * bk;
            }
        }
        for i in (0..n).rev() {
            let jmax = (i + m.ku + m.kl).min(n - 1);
            let mut s = b[i];
            for j in i + 1..=jmax {
                s -= m.data[m.idx(i, j)] * b[j];
            }
            b[i] = s / m.data[m.idx(i, i)];
        }
    }
}
