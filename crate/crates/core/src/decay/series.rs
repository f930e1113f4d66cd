use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::ibvp::State;
use crate::spectral::{norm, NormSpec, ScalarField};

/// Which components a monitored norm is taken over.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Target {
    U,
    B,
    U1,
    U2,
    B1,
    B2,
    /// (u₁, u₂, b₂).
    Ub2,
}

impl Target {
    fn name(self) -> &'static str {
        match self {
            Target::U => "u",
            Target::B => "b",
            Target::U1 => "u1",
            Target::U2 => "u2",
            Target::B1 => "b1",
            Target::B2 => "b2",
            Target::Ub2 => "ub2",
        }
    }

    fn fields(self, s: &State) -> Vec<&ScalarField> {
        match self {
            Target::U => vec![&s.u.c1, &s.u.c2],
            Target::B => vec![&s.b.c1, &s.b.c2],
            Target::U1 => vec![&s.u.c1],
            Target::U2 => vec![&s.u.c2],
            Target::B1 => vec![&s.b.c1],
            Target::B2 => vec![&s.b.c2],
            Target::Ub2 => vec![&s.u.c1, &s.u.c2, &s.b.c2],
        }
    }
}

/// A norm of a group of components, written `target:norm`, e.g. `ub2:Linf`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Monitor {
    pub target: Target,
    pub norm: NormSpec,
}

impl Monitor {
    pub const fn new(target: Target, norm: NormSpec) -> Self {
        Self { target, norm }
    }

    pub fn evaluate(&self, s: &State) -> Result<f64> {
        norm(&self.target.fields(s), self.norm)
    }

    /// Default list: the quantities with stated decay rates.
    pub fn defaults() -> Vec<Monitor> {
        use NormSpec::*;
        use Target::*;
        vec![
            Monitor::new(U, L2),
            Monitor::new(B1, L2),
            Monitor::new(B2, L2),
            Monitor::new(Ub2, L2),
            Monitor::new(U, Linf),
            Monitor::new(Ub2, Linf),
            Monitor::new(B1, Linf),
            Monitor::new(U, GradH1),
            Monitor::new(U, D1H1),
            Monitor::new(U, D2H1),
            Monitor::new(B, D1L2),
            Monitor::new(U, D1Linf),
        ]
    }
}

impl fmt::Display for Monitor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.target.name(), self.norm)
    }
}

impl FromStr for Monitor {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        let (t, n) = s.split_once(':').ok_or_else(|| Error::Domain(format!("monitor `{s}` is not target:norm")))?;
        let target = match t {
            "u" => Target::U,
            "b" => Target::B,
            "u1" => Target::U1,
            "u2" => Target::U2,
            "b1" => Target::B1,
            "b2" => Target::B2,
            "ub2" => Target::Ub2,
            _ => return Err(Error::Domain(format!("unknown monitor target `{t}`"))),
        };
        Ok(Monitor { target, norm: n.parse()? })
    }
}

impl Serialize for Monitor {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for Monitor {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        String::deserialize(d)?.parse().map_err(serde::de::Error::custom)
    }
}

/// `%.12e` as in C: mantissa with 12 decimals, signed exponent of at least two digits.
pub fn format_e12(v: f64) -> String {
    if !v.is_finite() {
        return format!("{v}");
    }
    let s = format!("{v:.12e}");
    let (m, e) = s.split_once('e').expect("exponent present");
    let (sign, digits) = match e.strip_prefix('-') {
        Some(d) => ('-', d),
        None => ('+', e),
    };
    format!("{m}e{sign}{digits:0>2}")
}

/// Monitored norms on a common time axis.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct NormSeries {
    pub monitors: Vec<Monitor>,
    pub times: Vec<f64>,
    /// values[i][k]: monitor i at times[k].
    pub values: Vec<Vec<f64>>,
}

impl NormSeries {
    pub fn new(monitors: Vec<Monitor>) -> Self {
        let values = vec![Vec::new(); monitors.len()];
        Self { monitors, times: Vec::new(), values }
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn push(&mut self, t: f64, row: &[f64]) -> Result<()> {
        if row.len() != self.monitors.len() {
            return Err(Error::ShapeMismatch { expected: self.monitors.len(), got: row.len() });
        }
        if let Some(&last) = self.times.last() {
            if !(t > last) {
                return Err(Error::Domain(format!("time {t} not after {last}")));
            }
        }
        if let Some(v) = row.iter().find(|v| !(**v >= 0.0)) {
            return Err(Error::Domain(format!("norm value {v} is negative or NaN")));
        }
        self.times.push(t);
        for (col, v) in self.values.iter_mut().zip(row) {
            col.push(*v);
        }
        Ok(())
    }

    pub fn push_state(&mut self, s: &State) -> Result<()> {
        let row = self.monitors.iter().map(|m| m.evaluate(s)).collect::<Result<Vec<_>>>()?;
        self.push(s.t, &row)
    }

    pub fn column(&self, m: &Monitor) -> Option<&[f64]> {
        self.monitors.iter().position(|x| x == m).map(|i| self.values[i].as_slice())
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("t");
        for m in &self.monitors {
            out.push(',');
            out.push_str(&m.to_string());
        }
        out.push('\n');
        for (k, t) in self.times.iter().enumerate() {
            out.push_str(&format_e12(*t));
            for col in &self.values {
                out.push(',');
                out.push_str(&format_e12(col[k]));
            }
            out.push('\n');
        }
        out
    }

    pub fn from_csv(text: &str) -> Result<Self> {
        let mut lines = text.lines().filter(|l| !l.trim().is_empty());
        let header = lines.next().ok_or_else(|| Error::Domain("empty CSV".into()))?;
        let mut cols = header.split(',').map(str::trim);
        if cols.next() != Some("t") {
            return Err(Error::Domain("first CSV column must be `t`".into()));
        }
        let monitors = cols.map(str::parse).collect::<Result<Vec<Monitor>>>()?;
        let mut s = NormSeries::new(monitors);
        for (ln, line) in lines.enumerate() {
            let nums = line
                .split(',')
                .map(|x| x.trim().parse::<f64>().map_err(|e| Error::Domain(format!("CSV row {}: {e}", ln + 2))))
                .collect::<Result<Vec<_>>>()?;
            if nums.is_empty() {
                continue;
            }
            s.push(nums[0], &nums[1..])?;
        }
        Ok(s)
    }
}

/// Energy bookkeeping along a trajectory.
#[derive(Debug, Clone, PartialEq, Default, Serialize)]
pub struct EnergyLedger {
    pub times: Vec<f64>,
    /// ½(‖u‖² + ‖b‖²).
    pub energy: Vec<f64>,
    /// ∫₀ᵗ ‖∇u‖².
    pub dissipation: Vec<f64>,
    /// 𝓔²(t) and 𝓕²(t) when requested; NaN where not available.
    pub high_energy: Vec<f64>,
    pub high_dissipation: Vec<f64>,
}

impl EnergyLedger {
    pub fn push(&mut self, t: f64, energy: f64, dissipation: f64, high: Option<(f64, f64)>) {
        self.times.push(t);
        self.energy.push(energy);
        self.dissipation.push(dissipation);
        let (a, b) = high.unwrap_or((f64::NAN, f64::NAN));
        self.high_energy.push(a);
        self.high_dissipation.push(b);
    }

    /// max_t |E(t) + ∫₀ᵗ‖∇u‖² − E(0)| / E(0); zero for an empty or zero-energy ledger.
    pub fn audit_residual(&self) -> f64 {
        let Some(&e0) = self.energy.first() else { return 0.0 };
        if e0 == 0.0 {
            return 0.0;
        }
        let d0 = self.dissipation[0];
        self.energy
            .iter()
            .zip(&self.dissipation)
            .map(|(e, d)| (e + (d - d0) - e0).abs() / e0)
            .fold(0.0, f64::max)
    }
}

/// Evaluates the monitors and energies over a sequence of snapshots. The
/// dissipation integral is accumulated by the trapezoid rule between snapshots.
pub fn record(trajectory: &[State], monitors: &[Monitor]) -> Result<(NormSeries, EnergyLedger)> {
    if trajectory.is_empty() {
        return Err(Error::Domain("empty trajectory".into()));
    }
    let mut series = NormSeries::new(monitors.to_vec());
    let mut ledger = EnergyLedger::default();
    let grad = Monitor::new(Target::U, NormSpec::H(1));
    let l2u = Monitor::new(Target::U, NormSpec::L2);
    let l2b = Monitor::new(Target::B, NormSpec::L2);
    let mut diss = 0.0;
    let mut prev: Option<(f64, f64)> = None;
    for s in trajectory {
        series.push_state(s)?;
        let (u, b) = (l2u.evaluate(s)?, l2b.evaluate(s)?);
        // ‖∇u‖² = ‖u‖²_{H¹} − ‖u‖².
        let g = (grad.evaluate(s)?.powi(2) - u * u).max(0.0);
        if let Some((t0, g0)) = prev {
            diss += 0.5 * (s.t - t0) * (g + g0);
        }
        prev = Some((s.t, g));
        ledger.push(s.t, 0.5 * (u * u + b * b), diss, None);
    }
    Ok((series, ledger))
}
