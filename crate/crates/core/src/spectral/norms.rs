use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::quadrature::compensated_sum;
use crate::spectral::field::{d1_modes, fft_x1, ifft_x1, ModeStack, ScalarField};

/// Norm kinds used by the decay estimates.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum NormSpec {
    L2,
    Linf,
    L1,
    L1x1L2x2,
    /// Sobolev norm of integer order 1..=3.
    H(u8),
    D1L2,
    D1H1,
    GradH1,
    D1Linf,
    /// ‖∂₂·‖ in H¹.
    D2H1,
}

impl NormSpec {
    pub fn hs(s: u8) -> Result<Self> {
        if (1..=3).contains(&s) {
            Ok(NormSpec::H(s))
        } else {
            Err(Error::Domain(format!("Sobolev order {s} not in 1..=3")))
        }
    }

    pub const ALL: [NormSpec; 12] = [
        NormSpec::L2,
        NormSpec::Linf,
        NormSpec::L1,
        NormSpec::L1x1L2x2,
        NormSpec::H(1),
        NormSpec::H(2),
        NormSpec::H(3),
        NormSpec::D1L2,
        NormSpec::D1H1,
        NormSpec::GradH1,
        NormSpec::D1Linf,
        NormSpec::D2H1,
    ];
}

impl fmt::Display for NormSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            NormSpec::L2 => write!(f, "L2"),
            NormSpec::Linf => write!(f, "Linf"),
            NormSpec::L1 => write!(f, "L1"),
            NormSpec::L1x1L2x2 => write!(f, "L1x1_L2x2"),
            NormSpec::H(s) => write!(f, "H{s}"),
            NormSpec::D1L2 => write!(f, "D1_L2"),
            NormSpec::D1H1 => write!(f, "D1_H1"),
            NormSpec::GradH1 => write!(f, "Grad_H1"),
            NormSpec::D1Linf => write!(f, "D1_Linf"),
            NormSpec::D2H1 => write!(f, "D2_H1"),
        }
    }
}

impl FromStr for NormSpec {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "L2" => NormSpec::L2,
            "Linf" => NormSpec::Linf,
            "L1" => NormSpec::L1,
            "L1x1_L2x2" => NormSpec::L1x1L2x2,
            "H1" => NormSpec::H(1),
            "H2" => NormSpec::H(2),
            "H3" => NormSpec::H(3),
            "D1_L2" => NormSpec::D1L2,
            "D1_H1" => NormSpec::D1H1,
            "Grad_H1" => NormSpec::GradH1,
            "D1_Linf" => NormSpec::D1Linf,
            "D2_H1" => NormSpec::D2H1,
            _ => return Err(Error::Domain(format!("unknown norm `{s}`"))),
        })
    }
}

impl Serialize for NormSpec {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for NormSpec {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

fn l2sq(f: &ScalarField) -> f64 {
    let g = &f.grid;
    let n1 = g.n1();
    let dx1 = g.dx1();
    compensated_sum((0..g.n2()).map(|j| {
        let row = &f.values[j * n1..(j + 1) * n1];
        g.w2[j] * dx1 * compensated_sum(row.iter().map(|v| v * v))
    }))
}

/// ∂₁^a ∂₂^b with spectral ∂₁ and finite-difference ∂₂.
pub fn mixed_derivative(f: &ScalarField, a: usize, b: usize) -> Result<ScalarField> {
    if a == 0 && b == 0 {
        return Ok(f.clone());
    }
    let mut m = fft_x1(f)?;
    for _ in 0..a {
        m = d1_modes(&m);
    }
    m = d2_power(&m, b)?;
    ifft_x1(&m)
}

fn d2_power(m: &ModeStack, b: usize) -> Result<ModeStack> {
    let g = &m.grid;
    let mut out = m.clone();
    let mut rem = b;
    while rem > 0 {
        let order = if rem >= 2 { 2 } else { 1 };
        for k in 0..g.n1() {
            let d = g.diff.derivative(out.mode(k), order)?;
            out.mode_mut(k).copy_from_slice(&d);
        }
        rem -= order;
    }
    Ok(out)
}

fn hs_sq(f: &ScalarField, s: usize) -> Result<f64> {
    let mut total = 0.0;
    for order in 0..=s {
        for a in 0..=order {
            total += l2sq(&mixed_derivative(f, a, order - a)?);
        }
    }
    Ok(total)
}

fn check_grids(fields: &[&ScalarField]) -> Result<()> {
    if fields.is_empty() {
        return Err(Error::Domain("norm of empty field list".into()));
    }
    let g = &fields[0].grid;
    for f in fields {
        if !f.grid.same_as(g) {
            return Err(Error::Domain("norm of fields on different grids".into()));
        }
    }
    Ok(())
}

/// Norm of the vector (f_1, …, f_m) built from scalar components.
///
/// L²-type norms add component squares; L∞ and L¹ use the pointwise
/// Euclidean magnitude.
pub fn norm(fields: &[&ScalarField], spec: NormSpec) -> Result<f64> {
    check_grids(fields)?;
    let g = &fields[0].grid;
    let (n1, n2) = (g.n1(), g.n2());
    let pointwise = |fs: &[ScalarField]| -> Vec<f64> {
        (0..n1 * n2)
            .map(|idx| fs.iter().map(|f| f.values[idx] * f.values[idx]).sum::<f64>().sqrt())
            .collect()
    };
    let owned = |fs: &[&ScalarField]| fs.iter().map(|f| (*f).clone()).collect::<Vec<_>>();
    let v = match spec {
        NormSpec::L2 => fields.iter().map(|f| l2sq(f)).sum::<f64>().sqrt(),
        NormSpec::Linf => pointwise(&owned(fields)).into_iter().fold(0.0, f64::max),
        NormSpec::L1 => {
            let mag = pointwise(&owned(fields));
            let dx1 = g.dx1();
            compensated_sum((0..n2).map(|j| {
                g.w2[j] * dx1 * mag[j * n1..(j + 1) * n1].iter().sum::<f64>()
            }))
        }
        NormSpec::L1x1L2x2 => {
            let dx1 = g.dx1();
            compensated_sum((0..n1).map(|i| {
                let s: f64 = fields
                    .iter()
                    .map(|f| {
                        compensated_sum((0..n2).map(|j| {
                            let v = f.values[j * n1 + i];
                            g.w2[j] * v * v
                        }))
                    })
                    .sum();
                dx1 * s.sqrt()
            }))
        }
        NormSpec::H(s) => {
            if !(1..=3).contains(&s) {
                return Err(Error::Domain(format!("Sobolev order {s} not in 1..=3")));
            }
            let mut t = 0.0;
            for f in fields {
                t += hs_sq(f, s as usize)?;
            }
            t.sqrt()
        }
        NormSpec::D1L2 => {
            let mut t = 0.0;
            for f in fields {
                t += l2sq(&mixed_derivative(f, 1, 0)?);
            }
            t.sqrt()
        }
        NormSpec::D1H1 | NormSpec::D2H1 => {
            let mut t = 0.0;
            for f in fields {
                let d = if spec == NormSpec::D1H1 {
                    mixed_derivative(f, 1, 0)?
                } else {
                    mixed_derivative(f, 0, 1)?
                };
                t += hs_sq(&d, 1)?;
            }
            t.sqrt()
        }
        NormSpec::GradH1 => {
            let mut t = 0.0;
            for f in fields {
                t += hs_sq(&mixed_derivative(f, 1, 0)?, 1)?;
                t += hs_sq(&mixed_derivative(f, 0, 1)?, 1)?;
            }
            t.sqrt()
        }
        NormSpec::D1Linf => {
            let mut ds = Vec::with_capacity(fields.len());
            for f in fields {
                ds.push(mixed_derivative(f, 1, 0)?);
            }
            pointwise(&ds).into_iter().fold(0.0, f64::max)
        }
    };
    Ok(v)
}
