//! Norm monitoring along trajectories, power-law fits in ⟨t⟩ and the
//! comparison against the expected decay exponents.

mod fit;
mod series;
mod theory;

pub use fit::{fit_exponent, japanese_bracket, window_robustness, ExponentFit, FLOOR_REL};
pub use series::{format_e12, record, EnergyLedger, Monitor, NormSeries, Target};
pub use theory::{compare_with_theory, default_window, ReportRow, TheoryEntry, TheoryReport, TheoryTable, Verdict};
