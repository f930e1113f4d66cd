use std::ops::{Add, Mul};

use crate::error::{Error, Result};

/// One row of a finite-difference operator.
#[derive(Debug, Clone)]
pub struct StencilRow {
    pub start: usize,
    pub w: Vec<f64>,
}

/// Second-order x₂ difference operators on a (possibly stretched) node set.
///
/// Interior rows use three-point stencils; boundary rows are one-sided
/// (three points for the first derivative, four for the second).
#[derive(Debug, Clone)]
pub struct Diff2 {
    pub d1: Vec<StencilRow>,
    pub d2: Vec<StencilRow>,
}

/// Fornberg weights for the `m`-th derivative at `z` on the given nodes.
pub fn fornberg_weights(z: f64, x: &[f64], m: usize) -> Vec<f64> {
    let n = x.len();
    let mut c = vec![vec![0.0; m + 1]; n];
    let mut c1 = 1.0;
    let mut c4 = x[0] - z;
    c[0][0] = 1.0;
    for i in 1..n {
        let mn = i.min(m);
        let mut c2 = 1.0;
        let c5 = c4;
        c4 = x[i] - z;
        for j in 0..i {
            let c3 = x[i] - x[j];
            c2 *= c3;
            if j == i - 1 {
                for k in (1..=mn).rev() {
                    c[i][k] = c1 * (k as f64 * c[i - 1][k - 1] - c5 * c[i - 1][k]) / c2;
                }
                c[i][0] = -c1 * c5 * c[i - 1][0] / c2;
            }
            for k in (1..=mn).rev() {
                c[j][k] = (c4 * c[j][k] - k as f64 * c[j][k - 1]) / c3;
            }
            c[j][0] = c4 * c[j][0] / c3;
        }
        c1 = c2;
    }
    c.into_iter().map(|row| row[m]).collect()
}

impl Diff2 {
    pub fn new(x: &[f64]) -> Self {
        let n = x.len();
        assert!(n >= 4);
        let mut d1 = Vec::with_capacity(n);
        let mut d2 = Vec::with_capacity(n);
        for i in 0..n {
            let (s1, s2) = if i == 0 {
                (0, 0)
            } else if i == n - 1 {
                (n - 3, n - 4)
            } else {
                (i - 1, i - 1)
            };
            let l1 = 3;
            let l2 = if i == 0 || i == n - 1 { 4 } else { 3 };
            d1.push(StencilRow { start: s1, w: fornberg_weights(x[i], &x[s1..s1 + l1], 1) });
            d2.push(StencilRow { start: s2, w: fornberg_weights(x[i], &x[s2..s2 + l2], 2) });
        }
        Self { d1, d2 }
    }

    pub fn n(&self) -> usize {
        self.d1.len()
    }

    fn apply<T>(rows: &[StencilRow], f: &[T], out: &mut [T])
    where
        T: Copy + Default + Add<Output = T> + Mul<f64, Output = T>,
    {
        for (o, r) in out.iter_mut().zip(rows) {
            let mut s = T::default();
            for (k, w) in r.w.iter().enumerate() {
                s = s + f[r.start + k] * *w;
            }
            *o = s;
        }
    }

    /// Applies ∂₂ (order 1) or ∂₂² (order 2).
    pub fn derivative<T>(&self, f: &[T], order: usize) -> Result<Vec<T>>
    where
        T: Copy + Default + Add<Output = T> + Mul<f64, Output = T>,
    {
        if f.len() != self.n() {
            return Err(Error::ShapeMismatch { expected: self.n(), got: f.len() });
        }
        let mut out = vec![T::default(); f.len()];
        match order {
            1 => Self::apply(&self.d1, f, &mut out),
            2 => Self::apply(&self.d2, f, &mut out),
            _ => return Err(Error::Domain(format!("derivative order {order} not in {{1,2}}"))),
        }
        Ok(out)
    }

    pub fn d1_into<T>(&self, f: &[T], out: &mut [T])
    where
        T: Copy + Default + Add<Output = T> + Mul<f64, Output = T>,
    {
        Self::apply(&self.d1, f, out)
    }

    pub fn d2_into<T>(&self, f: &[T], out: &mut [T])
    where
        T: Copy + Default + Add<Output = T> + Mul<f64, Output = T>,
    {
        Self::apply(&self.d2, f, out)
    }
}
