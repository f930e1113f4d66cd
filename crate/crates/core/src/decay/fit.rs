use serde::Serialize;

use super::series::{Monitor, NormSeries};
use crate::error::{Error, Result};

/// Values below FLOOR_REL times the first value count as round-off and are skipped.
pub const FLOOR_REL: f64 = 1e-13;

pub fn japanese_bracket(t: f64) -> f64 {
    (1.0 + t * t).sqrt()
}

/// Least-squares fit value ≈ C⟨t⟩^α on a time window.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExponentFit {
    pub monitor: Monitor,
    pub alpha: f64,
    /// ln C.
    pub intercept: f64,
    pub r2: f64,
    /// Standard error of alpha.
    pub stderr: f64,
    pub window: [f64; 2],
    pub samples: usize,
}

pub fn fit_exponent(series: &NormSeries, monitor: &Monitor, window: [f64; 2]) -> Result<ExponentFit> {
    let col = series.column(monitor).ok_or_else(|| Error::Fit(format!("monitor {monitor} not in series")))?;
    let [lo, hi] = window;
    if !(lo <= hi) {
        return Err(Error::Fit(format!("empty window [{lo}, {hi}]")));
    }
    let floor = col.first().copied().unwrap_or(0.0) * FLOOR_REL;
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    for (t, v) in series.times.iter().zip(col) {
        if *t < lo || *t > hi {
            continue;
        }
        if *v <= 0.0 && floor <= 0.0 {
            return Err(Error::Fit(format!(
                "{monitor}: nonpositive value {v} at t = {t}; widen the floor tolerance or the window"
            )));
        }
        if *v < floor || *v <= 0.0 {
            continue;
        }
        xs.push(japanese_bracket(*t).ln());
        ys.push(v.ln());
    }
    let n = xs.len();
    if n < 8 {
        return Err(Error::Fit(format!("{monitor}: {n} usable samples in [{lo}, {hi}], need at least 8")));
    }
    let nf = n as f64;
    let mx = xs.iter().sum::<f64>() / nf;
    let my = ys.iter().sum::<f64>() / nf;
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let syy: f64 = ys.iter().map(|y| (y - my).powi(2)).sum();
    if sxx <= 0.0 {
        return Err(Error::Fit(format!("{monitor}: window has no spread in t")));
    }
    let alpha = sxy / sxx;
    let intercept = my - alpha * mx;
    let sse: f64 = xs.iter().zip(&ys).map(|(x, y)| (y - intercept - alpha * x).powi(2)).sum();
    let r2 = if syy <= 1e-300 { 1.0 } else { (1.0 - sse / syy).clamp(0.0, 1.0) };
    let stderr = if n > 2 { (sse / (nf - 2.0) / sxx).sqrt() } else { 0.0 };
    Ok(ExponentFit { monitor: *monitor, alpha, intercept, r2, stderr, window, samples: n })
}

/// Exponents on [T/4, T/2] and [T/2, T] and their difference in units of the larger standard error.
pub fn window_robustness(series: &NormSeries, monitor: &Monitor, t_end: f64) -> Result<(ExponentFit, ExponentFit, f64)> {
    let a = fit_exponent(series, monitor, [0.25 * t_end, 0.5 * t_end])?;
    let b = fit_exponent(series, monitor, [0.5 * t_end, t_end])?;
    let se = a.stderr.max(b.stderr);
    let z = if se > 0.0 { (a.alpha - b.alpha).abs() / se } else { 0.0 };
    Ok((a, b, z))
}
