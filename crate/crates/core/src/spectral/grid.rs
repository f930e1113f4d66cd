use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::spectral::deriv::Diff2;

/// Grid parameters: x₁ periodic on [0, L1), x₂ on [0, L2].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct GridSpec {
    #[serde(rename = "L1")]
    pub l1: f64,
    #[serde(rename = "N1")]
    pub n1: usize,
    #[serde(rename = "L2")]
    pub l2: f64,
    #[serde(rename = "N2")]
    pub n2: usize,
    pub stretch: f64,
}

/// The reference grid.
impl Default for GridSpec {
    fn default() -> Self {
        Self::new(100.0, 256, 20.0, 256, 2.0)
    }
}

impl GridSpec {
    pub fn new(l1: f64, n1: usize, l2: f64, n2: usize, stretch: f64) -> Self {
        Self { l1, n1, l2, n2, stretch }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |k: &str, m: &str| Err(Error::config(format!("grid.{k}"), m));
        if !(self.l1.is_finite() && self.l1 > 0.0) {
            return bad("L1", "must be positive");
        }
        if !(self.l2.is_finite() && self.l2 > 0.0) {
            return bad("L2", "must be positive");
        }
        if self.n1 < 4 || !self.n1.is_power_of_two() {
            return bad("N1", "must be a power of two and at least 4");
        }
        if self.n2 < 4 {
            return bad("N2", "must be at least 4");
        }
        if !(self.stretch.is_finite() && self.stretch >= 0.0) {
            return bad("stretch", "must be nonnegative");
        }
        Ok(())
    }

    /// x₂ nodes from the algebraic map x = L2 ζ / (1 + s (1 − ζ)).
    pub fn x2_nodes(&self) -> Vec<f64> {
        let m = (self.n2 - 1) as f64;
        let s = self.stretch;
        let mut x: Vec<f64> = (0..self.n2)
            .map(|j| {
                let z = j as f64 / m;
                self.l2 * z / (1.0 + s * (1.0 - z))
            })
            .collect();
        x[0] = 0.0;
        x[self.n2 - 1] = self.l2;
        x
    }
}

/// A realized grid: nodes, quadrature weights, frequencies, FFT plans and
/// x₂ difference operators.
pub struct Grid {
    pub spec: GridSpec,
    pub x1: Vec<f64>,
    pub x2: Vec<f64>,
    /// Trapezoid weights in x₂.
    pub w2: Vec<f64>,
    /// ξ₁ for each FFT index (standard FFT ordering).
    pub xi1: Vec<f64>,
    pub diff: Diff2,
    pub(crate) fwd: Arc<dyn Fft<f64>>,
    pub(crate) inv: Arc<dyn Fft<f64>>,
}

impl fmt::Debug for Grid {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Grid").field("spec", &self.spec).finish()
    }
}

impl Grid {
    pub fn new(spec: GridSpec) -> Result<Arc<Grid>> {
        spec.validate().map_err(|e| match e {
            Error::Config { key, msg } => Error::InvalidGrid(format!("{key}: {msg}")),
            e => e,
        })?;
        let x2 = spec.x2_nodes();
        if x2.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::InvalidGrid("x2 nodes not strictly increasing".into()));
        }
        let n1 = spec.n1;
        let dx1 = spec.l1 / n1 as f64;
        let x1 = (0..n1).map(|i| i as f64 * dx1).collect();
        let mut w2 = vec![0.0; spec.n2];
        for j in 0..spec.n2 - 1 {
            let h = x2[j + 1] - x2[j];
            w2[j] += 0.5 * h;
            w2[j + 1] += 0.5 * h;
        }
        let xi1 = (0..n1)
            .map(|k| {
                let kk = if k < n1 / 2 { k as f64 } else { k as f64 - n1 as f64 };
                2.0 * std::f64::consts::PI * kk / spec.l1
            })
            .collect();
        let mut planner = FftPlanner::new();
        let fwd = planner.plan_fft_forward(n1);
        let inv = planner.plan_fft_inverse(n1);
        let diff = Diff2::new(&x2);
        Ok(Arc::new(Grid { spec, x1, x2, w2, xi1, diff, fwd, inv }))
    }

    pub fn n1(&self) -> usize {
        self.spec.n1
    }

    pub fn n2(&self) -> usize {
        self.spec.n2
    }

    pub fn dx1(&self) -> f64 {
        self.spec.l1 / self.spec.n1 as f64
    }

    /// Smallest x₂ spacing.
    pub fn min_dx2(&self) -> f64 {
        self.x2.windows(2).map(|w| w[1] - w[0]).fold(f64::INFINITY, f64::min)
    }

    /// Index of the Nyquist mode, which all solvers keep at zero.
    pub fn nyquist(&self) -> usize {
        self.spec.n1 / 2
    }

    /// x₂ trapezoid integral of |f|².
    pub fn profile_norm2(&self, f: &[Complex64]) -> f64 {
        crate::quadrature::compensated_sum(f.iter().zip(&self.w2).map(|(z, w)| z.norm_sqr() * w))
    }

    pub fn same_as(&self, other: &Grid) -> bool {
        std::ptr::eq(self, other) || self.spec == other.spec
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn nodes_span_interval() {
        for s in [0.0, 1.0, 4.0] {
            let g = Grid::new(GridSpec::new(10.0, 8, 3.0, 17, s)).unwrap();
            assert_eq!(g.x2[0], 0.0);
            assert_eq!(*g.x2.last().unwrap(), 3.0);
            assert!(g.x2.windows(2).all(|w| w[1] > w[0]));
            let total: f64 = g.w2.iter().sum();
            assert!((total - 3.0).abs() < 1e-14);
        }
    }

    #[test]
    fn stretching_clusters_at_wall() {
        let g = Grid::new(GridSpec::new(10.0, 8, 3.0, 17, 3.0)).unwrap();
        let first = g.x2[1] - g.x2[0];
        let last = g.x2[16] - g.x2[15];
        assert!(first < last / 5.0);
    }

    #[test]
    fn invalid_specs_rejected() {
        assert!(Grid::new(GridSpec::new(10.0, 6, 3.0, 17, 0.0)).is_err());
        assert!(Grid::new(GridSpec::new(10.0, 8, 3.0, 3, 0.0)).is_err());
        assert!(Grid::new(GridSpec::new(-1.0, 8, 3.0, 8, 0.0)).is_err());
        assert!(Grid::new(GridSpec::new(1.0, 8, 3.0, 8, -0.5)).is_err());
    }

    #[test]
    fn frequencies_in_fft_order() {
        let g = Grid::new(GridSpec::new(2.0 * std::f64::consts::PI, 8, 1.0, 5, 0.0)).unwrap();
        assert_eq!(g.xi1, vec![0.0, 1.0, 2.0, 3.0, -4.0, -3.0, -2.0, -1.0]);
    }
}
