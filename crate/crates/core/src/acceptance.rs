//! Acceptance suite: one function per criterion, each returning a verdict
//! with the measured quantities.

use std::fmt::Write as _;
use std::time::Instant;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::decay::{compare_with_theory, fit_exponent, Monitor, TheoryReport, TheoryTable};
use crate::dispersion::{
    build_deformed_contours, eta_pm, lambda_pm, omega, omega_sq, ContourOpts, PieceLabel,
};
use crate::dispersion::contour::large_arc_radius;
use crate::error::Result;
use crate::ibvp::{make_initial_data, run, InitSpec, RunOptions, RunOutput, Scheme, Solver, SolverConfig};
use crate::inverse_laplace::{contour_integrate, linear_evolve, linear_evolve_mode, ContourChoice, EvolveOpts, ModeState};
use crate::resolvent::{
    assemble_mode, diagnose, e_kernel_apply, e_kernel_apply_d2, e_kernel_exp, e_kernel_trace, kernel_ratio,
    ModeAssembler, ModeRhs,
};
use crate::spectral::{norm, Grid, GridSpec, ModeProfile, NormSpec, VectorField};

const I: Complex64 = Complex64::new(0.0, 1.0);

#[derive(Debug, Clone, Serialize)]
pub struct CriterionResult {
    pub id: &'static str,
    pub title: &'static str,
    pub passed: bool,
    pub detail: String,
    pub seconds: f64,
    pub budget_seconds: f64,
}

impl CriterionResult {
    pub fn line(&self) -> String {
        format!(
            "{} [{}] {}: {} ({:.1} s of {:.0} s)",
            if self.passed { "PASS" } else { "FAIL" },
            self.id,
            self.title,
            self.detail,
            self.seconds,
            self.budget_seconds
        )
    }
}

struct Checks {
    ok: bool,
    text: String,
}

impl Checks {
    fn new() -> Self {
        Self { ok: true, text: String::new() }
    }

    fn check(&mut self, ok: bool, what: impl AsRef<str>) {
        self.ok &= ok;
        if !self.text.is_empty() {
            self.text.push_str("; ");
        }
        self.text.push_str(what.as_ref());
        if !ok {
            self.text.push_str(" [x]");
        }
    }
}

fn finish(id: &'static str, title: &'static str, budget: f64, start: Instant, c: Checks) -> CriterionResult {
    let seconds = start.elapsed().as_secs_f64();
    let mut c = c;
    if seconds > budget {
        c.check(false, "over the runtime budget");
    }
    CriterionResult { id, title, passed: c.ok, detail: c.text, seconds, budget_seconds: budget }
}

fn rel(a: Complex64, b: Complex64, scale: f64) -> f64 {
    (a - b).norm() / scale.max(f64::MIN_POSITIVE)
}

/// Root residuals and product identities of the dispersion objects.
pub fn criterion_1() -> CriterionResult {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let (mut root, mut prod, mut eta, mut om) = (0.0f64, 0.0f64, 0.0f64, 0.0f64);
    let mut n_eta = 0usize;
    for _ in 0..10_000 {
        let x1 = rng.gen_range(-10.0..10.0);
        let x2 = rng.gen_range(-10.0..10.0);
        let s = x1 * x1 + x2 * x2;
        let k2 = x1 * x1;
        let (lp, lm) = lambda_pm(x1, x2);
        for l in [lp, lm] {
            let r = l * l + s * l + k2;
            root = root.max(r.norm() / (l.norm_sqr() + s * l.norm() + k2));
            if l.norm() > 0.0 {
                if let Ok(w) = omega(l, x1) {
                    let w2 = l + k2 + k2 / l;
                    om = om.max(rel(w * w, w2, l.norm() + k2 + k2 / l.norm()));
                    om = om.max(rel(omega_sq(l, x1), w2, l.norm() + k2 + k2 / l.norm()));
                }
            }
        }
        prod = prod.max(rel(lp * lm, Complex64::new(k2, 0.0), k2.max(1e-300)));
        if let Ok((ep, em)) = eta_pm(x1, x2) {
            n_eta += 1;
            eta = eta.max((ep * em - k2).abs() / k2.max(1e-300));
        }
    }
    let mut c = Checks::new();
    c.check(root < 1e-12, format!("root residual {root:.2e}"));
    c.check(prod < 1e-12, format!("lambda+ lambda- {prod:.2e}"));
    c.check(eta < 1e-12, format!("eta+ eta- {eta:.2e} over {n_eta} real-regime samples"));
    c.check(om < 1e-12, format!("omega^2 {om:.2e}"));
    finish("1", "Dispersion identity suite", 1.0, start, c)
}

/// E kernel closed form, wall trace identity and kernel ratio.
pub fn criterion_2() -> CriterionResult {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let mut closed = 0.0f64;
    let mut fine_cache: Option<(f64, Vec<f64>)> = None;
    for _ in 0..100 {
        let xi1: f64 = rng.gen_range(0.3..3.0);
        let w = Complex64::new(rng.gen_range(0.3..3.0), rng.gen_range(-3.0..3.0));
        // Node spacing fine enough for the O(h²) moment quadrature to sit below 1e-8.
        let x = match &fine_cache {
            Some((k, x)) if (*k - xi1).abs() < 1e-15 => x.clone(),
            _ => GridSpec::new(1.0, 4, 40.0 / xi1, (1 << 17) + 1, 0.0).x2_nodes(),
        };
        let f = ModeProfile::new(xi1, x.iter().map(|t| Complex64::new((-xi1 * t).exp(), 0.0)).collect());
        let e = match e_kernel_apply(w, &f, &x) {
            Ok(e) => e,
            Err(_) => {
                closed = f64::INFINITY;
                continue;
            }
        };
        let exact: Vec<Complex64> = x.iter().step_by(997).map(|t| e_kernel_exp(w, xi1, *t)).collect();
        let scale = exact.iter().fold(0.0f64, |m, v| m.max(v.norm()));
        for (i, ex) in exact.iter().enumerate() {
            closed = closed.max(rel(e.values[i * 997], *ex, scale));
        }
        fine_cache = Some((xi1, x));
    }
    let x = GridSpec::new(1.0, 4, 8.0, 2001, 0.0).x2_nodes();
    let h = x[1] - x[0];
    let (mut tr_fd, mut tr_exact) = (0.0f64, 0.0f64);
    for _ in 0..100 {
        let k = Complex64::new(rng.gen_range(0.2..3.0), rng.gen_range(-3.0..3.0));
        let a: Vec<f64> = (0..4).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let f = ModeProfile::new(
            0.0,
            x.iter().map(|t| Complex64::new(a[0] + a[1] * t, a[2] + a[3] * t.cos()) * (-t * t / 4.0).exp()).collect(),
        );
        let (Ok(e), Ok(de), Ok(tr)) = (e_kernel_apply(k, &f, &x), e_kernel_apply_d2(k, &f, &x), e_kernel_trace(k, &f, &x))
        else {
            tr_fd = f64::INFINITY;
            continue;
        };
        let v = &e.values;
        let fd = (-25.0 * v[0] + 48.0 * v[1] - 36.0 * v[2] + 16.0 * v[3] - 3.0 * v[4]) / (12.0 * h);
        let s = (k * tr).norm().max(1e-3);
        tr_fd = tr_fd.max(rel(fd, k * tr, s));
        tr_exact = tr_exact.max(rel(de.values[0], k * tr, s));
    }
    let mut ratio = 0.0f64;
    for _ in 0..1000 {
        let lam = Complex64::new(rng.gen_range(0.1..4.0), rng.gen_range(-4.0..4.0));
        let xi1 = rng.gen_range(0.1..3.0);
        let xv = rng.gen_range(0.0..5.0);
        let (Ok(r), Ok(w)) = (kernel_ratio(lam, xi1, xv), omega(lam, xi1)) else {
            ratio = f64::INFINITY;
            continue;
        };
        let q = e_kernel_exp(w, xi1, xv) / e_kernel_exp(w, xi1, 0.0);
        ratio = ratio.max(rel(r.ratio, q, q.norm()));
    }
    let mut c = Checks::new();
    c.check(closed < 1e-8, format!("closed form vs quadrature {closed:.2e}"));
    c.check(tr_fd < 1e-6, format!("trace identity vs wall difference {tr_fd:.2e} (moments {tr_exact:.2e})"));
    c.check(ratio < 1e-10, format!("kernel ratio vs quotient {ratio:.2e}"));
    finish("2", "Kernel suite", 10.0, start, c)
}

fn stream_pair(g: &Grid, xi1: f64, a: Complex64, s: f64) -> [ModeProfile; 2] {
    let psi = |t: f64| a * t * t * (-s * t).exp();
    let dpsi = |t: f64| a * (2.0 * t - s * t * t) * (-s * t).exp();
    [
        ModeProfile::new(xi1, g.x2.iter().map(|&t| dpsi(t)).collect()),
        ModeProfile::new(xi1, g.x2.iter().map(|&t| -I * xi1 * psi(t)).collect()),
    ]
}

fn gaussian_pair(g: &Grid, xi1: f64, a: Complex64, s: f64) -> [ModeProfile; 2] {
    let psi = |t: f64| a * t * t * (-s * t * t).exp();
    let dpsi = |t: f64| a * (2.0 * t - 2.0 * s * t * t * t) * (-s * t * t).exp();
    [
        ModeProfile::new(xi1, g.x2.iter().map(|&t| dpsi(t)).collect()),
        ModeProfile::new(xi1, g.x2.iter().map(|&t| -I * xi1 * psi(t)).collect()),
    ]
}

fn gaussian_rhs(g: &Grid, xi1: f64) -> ModeRhs {
    ModeRhs::initial(
        gaussian_pair(g, xi1, Complex64::new(1.0, 0.3), 1.0),
        gaussian_pair(g, xi1, Complex64::new(0.5, -0.2), 0.7),
    )
}

fn random_rhs(g: &Grid, xi1: f64, p: &[f64; 6]) -> ModeRhs {
    ModeRhs::initial(
        stream_pair(g, xi1, Complex64::new(p[0], p[1]), p[2]),
        stream_pair(g, xi1, Complex64::new(p[3], p[4]), p[5]),
    )
}

/// Wall conditions, divergence and ODE residual of assembled modes.
pub fn criterion_3() -> CriterionResult {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let g = Grid::new(GridSpec::new(10.0, 4, 16.0, 512, 1.0)).expect("grid");
    let coarse = Grid::new(GridSpec::new(10.0, 4, 16.0, 256, 1.0)).expect("grid");
    let pairs: Vec<(Complex64, f64)> = (0..20)
        .map(|_| {
            let s: f64 = if rng.gen_bool(0.5) { 1.0 } else { -1.0 };
            (Complex64::new(rng.gen_range(0.1..3.0), rng.gen_range(-3.0..3.0)), s * rng.gen_range(0.2..3.0))
        })
        .collect();
    let data: Vec<[f64; 6]> = (0..50)
        .map(|_| {
            [
                rng.gen_range(-1.0..1.0),
                rng.gen_range(-1.0..1.0),
                rng.gen_range(0.8..2.0),
                rng.gen_range(-1.0..1.0),
                rng.gen_range(-1.0..1.0),
                rng.gen_range(0.8..2.0),
            ]
        })
        .collect();
    let (mut wall, mut div, mut ode, mut worst_ratio) = (0.0f64, 0.0f64, 0.0f64, f64::INFINITY);
    let mut failures = 0usize;
    for (k, p) in data.iter().enumerate() {
        for (j, &(lam, xi1)) in pairs.iter().enumerate() {
            let r = random_rhs(&g, xi1, p);
            let d = match assemble_mode(&g, lam, xi1, &r).and_then(|m| diagnose(&g, &m, &r)) {
                Ok(d) => d,
                Err(_) => {
                    failures += 1;
                    continue;
                }
            };
            wall = wall.max(d.wall_u1).max(d.wall_u2);
            div = div.max(d.divergence);
            ode = ode.max(d.ode_residual);
            // Refinement check on a subset.
            if (k + j) % 10 == 0 {
                let rc = random_rhs(&coarse, xi1, p);
                if let Ok(dc) = assemble_mode(&coarse, lam, xi1, &rc).and_then(|m| diagnose(&coarse, &m, &rc)) {
                    worst_ratio = worst_ratio.min(dc.ode_residual / d.ode_residual);
                }
            }
        }
    }
    let mut c = Checks::new();
    c.check(failures == 0, format!("{failures} assembly errors"));
    c.check(wall < 1e-8, format!("wall traces {wall:.2e}"));
    c.check(div < 1e-8, format!("divergence {div:.2e}"));
    c.check(ode < 5e-3, format!("ODE residual {ode:.2e} at N2=512"));
    c.check(worst_ratio > 3.0, format!("residual ratio N2 256->512 >= {worst_ratio:.2}"));
    finish("3", "Resolvent structural suite", 60.0, start, c)
}

fn max_state_diff(a: &ModeState, b: &ModeState) -> (f64, f64) {
    let mut d = 0.0f64;
    let mut m = 0.0f64;
    for (x, y) in a.u.iter().zip(&b.u).chain(a.b.iter().zip(&b.b)) {
        for (p, q) in x.iter().zip(y) {
            d = d.max((p - q).norm());
            m = m.max(p.norm());
        }
    }
    (d, m)
}

/// Sector against deformed contours, and the small-circle pieces as eps → 0.
pub fn criterion_4() -> CriterionResult {
    let start = Instant::now();
    let g = Grid::new(GridSpec::new(10.0, 4, 12.0, 257, 0.0)).expect("grid");
    let mut c = Checks::new();
    let mut worst = 0.0f64;
    let mut errors = 0;
    for &xi1 in &[0.5, 1.0, 3.0] {
        let r = gaussian_rhs(&g, xi1);
        for &t in &[0.5, 2.0] {
            let s = linear_evolve_mode(&g, xi1, &r.u0, &r.b0, t, &EvolveOpts::default());
            let dopts = EvolveOpts { choice: ContourChoice::Deformed, ..EvolveOpts::default() };
            let d = linear_evolve_mode(&g, xi1, &r.u0, &r.b0, t, &dopts);
            match (s, d) {
                (Ok(s), Ok(d)) if s.converged && d.converged => {
                    let (diff, m) = max_state_diff(&s, &d);
                    worst = worst.max(diff / m.max(1e-300));
                }
                _ => errors += 1,
            }
        }
    }
    c.check(errors == 0, format!("{errors} unconverged evaluations"));
    c.check(worst < 1e-6, format!("sector vs deformed {worst:.2e} (|xi1| in 0.5, 1, 3; t in 0.5, 2)"));
    // Γ₅ + Γ₆ for the velocity components; b carries the b₀/λ pole.
    let xi1 = 1.0;
    let r = gaussian_rhs(&g, xi1);
    let mut small = Vec::new();
    if let Ok(asm) = ModeAssembler::new(&g, &r) {
        for &eps in &[1e-2, 1e-3, 1e-4] {
            let v = build_deformed_contours(xi1, eps, large_arc_radius(1.0), 4.0, ContourOpts { t: 1.0, x_scale: 12.0 })
                .and_then(|ct| {
                    contour_integrate(&ct, xi1, 1.0, |l, w| {
                        let f = asm.fields(l, w)?;
                        Ok([f.u1, f.u2].concat())
                    })
                })
                .map(|res| {
                    res.pieces
                        .iter()
                        .filter(|(l, _)| matches!(l, PieceLabel::Gamma5 | PieceLabel::Gamma6))
                        .map(|p| p.1)
                        .sum::<f64>()
                });
            small.push(v.unwrap_or(f64::NAN));
        }
    }
    let decreasing = small.len() == 3
        && small.windows(2).all(|w| w[1] < w[0])
        && small.iter().zip([1e-2f64, 1e-3, 1e-4]).all(|(v, e)| *v < 10.0 * e.powf(0.75));
    let text: Vec<String> = small.iter().map(|v| format!("{v:.2e}")).collect();
    c.check(decreasing, format!("small-circle pieces at eps 1e-2, 1e-3, 1e-4: {}", text.join(", ")));
    finish("4", "Contour-deformation invariance", 120.0, start, c)
}

fn pair_diff(a: (&VectorField, &VectorField), b: (&VectorField, &VectorField)) -> f64 {
    let d = |x: &crate::spectral::ScalarField, y: &crate::spectral::ScalarField| {
        let mut z = x.clone();
        z.axpy(-1.0, y);
        z
    };
    let parts = [d(&a.0.c1, &b.0.c1), d(&a.0.c2, &b.0.c2), d(&a.1.c1, &b.1.c1), d(&a.1.c2, &b.1.c2)];
    let num = norm(&parts.iter().collect::<Vec<_>>(), NormSpec::L2).unwrap_or(f64::NAN);
    let den = norm(&[&b.0.c1, &b.0.c2, &b.1.c1, &b.1.c2], NormSpec::L2).unwrap_or(f64::NAN);
    num / den
}

/// Reference grid of the cross-solver comparison; the stretch clusters nodes at the wall.
pub fn cross_solver_grid(l2: f64, n2: usize) -> GridSpec {
    GridSpec::new(100.0, 256, l2, n2, 2.0)
}

fn cross_solver_errors(spec: GridSpec, dts: &[f64]) -> Result<Vec<Vec<f64>>> {
    let g = Grid::new(spec)?;
    let (u0, b0) = make_initial_data(&g, &InitSpec::default())?;
    let times = [0.5, 1.0, 2.0];
    let reference = linear_evolve(&u0, &b0, &times, &EvolveOpts::default())?;
    let mut out = Vec::new();
    for &dt in dts {
        let mut s = Solver::new(SolverConfig { dt, ..SolverConfig::default() }, &u0, &b0)?;
        let mut row = Vec::new();
        for r in &reference {
            s.advance_to(r.t)?;
            let st = s.state()?;
            row.push(pair_diff((&st.u, &st.b), (&r.u, &r.b)));
        }
        out.push(row);
    }
    Ok(out)
}

/// Inverse-Laplace evolution against the time stepper on the reference grid.
pub fn criterion_5() -> CriterionResult {
    let start = Instant::now();
    let mut c = Checks::new();
    let dts = [0.1, 0.05, 0.0125];
    match cross_solver_errors(cross_solver_grid(20.0, 256), &dts) {
        Ok(e) => {
            let fine = &e[2];
            for (t, v) in [0.5, 1.0, 2.0].iter().zip(fine) {
                c.check(*v < 1e-3, format!("t={t}: {v:.2e}"));
            }
            let order = (e[0][0] / e[1][0]).log2();
            c.check(order > 1.7, format!("observed dt order {order:.2} at t=0.5 (dt 0.1 -> 0.05)"));
        }
        Err(e) => c.check(false, format!("error: {e}")),
    }
    finish("5", "Cross-solver oracle", 300.0, start, c)
}

/// Same comparison with the top moved to L2 = 80 at equal spacing near the wall.
pub fn criterion_5_deep_domain() -> Result<Vec<f64>> {
    Ok(cross_solver_errors(GridSpec::new(100.0, 256, 80.0, 1024, 2.0), &[0.0125])?.remove(0))
}

/// Grid of the energy audit at two resolutions.
pub fn energy_grids() -> [GridSpec; 2] {
    [GridSpec::new(40.0, 128, 20.0, 257, 2.0), GridSpec::new(40.0, 256, 20.0, 513, 2.0)]
}

fn energy_audit(spec: GridSpec, horizon: f64) -> Result<f64> {
    let g = Grid::new(spec)?;
    let init = InitSpec { amplitude: 0.05, radius: 3.0, center: [0.0, 4.0], ..InitSpec::default() };
    let (u0, b0) = make_initial_data(&g, &init)?;
    let cfg = SolverConfig { dt: 0.02, scheme: Scheme::Nonlinear, monitor_stride: 50, ..SolverConfig::default() };
    let out = run(&cfg, &u0, &b0, &RunOptions { horizon, ..RunOptions::default() })?;
    Ok(out.ledger.audit_residual())
}

/// Nonlinear energy identity audit.
pub fn criterion_6() -> CriterionResult {
    let start = Instant::now();
    let mut c = Checks::new();
    let [a, b] = energy_grids();
    match (energy_audit(a, 20.0), energy_audit(b, 20.0)) {
        (Ok(ra), Ok(rb)) => {
            c.check(rb < 1e-3, format!("audit residual {rb:.2e} (N1={}, N2={})", b.n1, b.n2));
            c.check(rb < ra, format!("coarse {ra:.2e} (N1={}, N2={})", a.n1, a.n2));
        }
        (r1, r2) => c.check(false, format!("error: {:?} {:?}", r1.err(), r2.err())),
    }
    finish("6", "Energy identity", 600.0, start, c)
}

/// Grid and data of the decay runs.
pub fn decay_setup() -> (GridSpec, InitSpec) {
    (
        GridSpec::new(400.0, 1024, 40.0, 384, 3.0),
        InitSpec { amplitude: 0.05, radius: 3.0, center: [0.0, 4.0], ..InitSpec::default() },
    )
}

pub const DECAY_WINDOW: [f64; 2] = [5.0, 80.0];

pub fn decay_run(scheme: Scheme, spec: GridSpec, init: &InitSpec, horizon: f64) -> Result<RunOutput> {
    let g = Grid::new(spec)?;
    let (u0, b0) = make_initial_data(&g, init)?;
    let cfg = SolverConfig { dt: 0.05, scheme, monitor_stride: 10, ..SolverConfig::default() };
    let opts = RunOptions { horizon, monitors: Monitor::defaults(), ..RunOptions::default() };
    run(&cfg, &u0, &b0, &opts)
}

fn fit_report(out: &RunOutput, table: &TheoryTable) -> TheoryReport {
    let fits: Vec<_> =
        table.entries.iter().filter_map(|e| fit_exponent(&out.series, &e.monitor, DECAY_WINDOW).ok()).collect();
    compare_with_theory(&fits, table)
}

/// Largest energy fraction above 0.75·L2; reported, not asserted.
fn tail_note(c: &mut Checks, out: &RunOutput) {
    let tail = out.wall.iter().map(|w| w.tail).fold(0.0, f64::max);
    c.check(true, format!("top-quarter energy fraction <= {tail:.1e}"));
}

fn report_checks(c: &mut Checks, r: &TheoryReport) {
    for row in &r.rows {
        let tag = if row.asserted { "" } else { " (reported)" };
        let text = format!("{} alpha {:.3} <= {:.2}+{:.2}, r2 {:.3}{tag}", row.norm, row.alpha, row.expected, row.tol, row.r2);
        if row.asserted {
            c.check(row.verdict == crate::decay::Verdict::Pass, text);
        } else {
            c.check(true, text);
        }
    }
    for m in &r.missing {
        c.check(false, format!("{m}: no fit"));
    }
}

/// Decay exponents of the linearized flow.
pub fn criterion_7() -> CriterionResult {
    let start = Instant::now();
    let mut c = Checks::new();
    let (spec, init) = decay_setup();
    match decay_run(Scheme::Linear, spec, &init, DECAY_WINDOW[1]) {
        Ok(out) => {
            report_checks(&mut c, &fit_report(&out, &TheoryTable::linear(0.15, 0.2)));
            tail_note(&mut c, &out);
        }
        Err(e) => c.check(false, format!("error: {e}")),
    }
    finish("7", "Linear decay exponents", 1800.0, start, c)
}

/// Decay exponents of the nonlinear flow and the wall traces of b₁ and ∂₂b₁ (criteria 8 and 9).
pub fn criteria_8_9() -> Vec<CriterionResult> {
    let start = Instant::now();
    let (spec, init) = decay_setup();
    let main = decay_run(Scheme::Nonlinear, spec, &init, DECAY_WINDOW[1]);
    let mut c8 = Checks::new();
    let mut c9a = Checks::new();
    let mut c9b = Checks::new();
    match &main {
        Ok(out) => {
            report_checks(&mut c8, &fit_report(out, &TheoryTable::nonlinear(0.2, TheoryTable::DEFAULT_DELTA)));
            tail_note(&mut c8, out);
        }
        Err(e) => c8.check(false, format!("error: {e}")),
    }
    let r8 = finish("8", "Nonlinear decay exponents", 3600.0, start, c8);
    let start9 = Instant::now();
    // Refinement: the first quarter of the horizon at half the vertical resolution.
    let coarse_spec = GridSpec { n2: spec.n2 / 2, ..spec };
    let t_cmp = DECAY_WINDOW[1] / 4.0;
    let coarse = decay_run(Scheme::Nonlinear, coarse_spec, &init, t_cmp);
    match (&main, &coarse) {
        (Ok(m), Ok(cr)) => {
            let ratio = |out: &RunOutput, t_end: f64, f: fn(&crate::ibvp::WallSample) -> (f64, f64)| {
                let wall = out.wall.iter().filter(|w| w.t <= t_end + 1e-9).map(|w| f(w).0).fold(0.0, f64::max);
                let inner = out.wall.iter().filter(|w| w.t <= t_end + 1e-9).map(|w| f(w).1).fold(0.0, f64::max);
                wall / inner.max(f64::MIN_POSITIVE)
            };
            let b1 = |w: &crate::ibvp::WallSample| (w.b1_wall, w.b1_max);
            let d2 = |w: &crate::ibvp::WallSample| (w.d2b1_wall, w.d2b1_max);
            let (rb, rbq, rbc) = (ratio(m, f64::INFINITY, b1), ratio(m, t_cmp, b1), ratio(cr, t_cmp, b1));
            let (rd, rdq, rdc) = (ratio(m, f64::INFINITY, d2), ratio(m, t_cmp, d2), ratio(cr, t_cmp, d2));
            c9a.check(rb < 1e-3, format!("max wall |b1| / max |b1| = {rb:.2e}"));
            c9a.check(rbq < rbc, format!("t<={t_cmp}: {rbq:.2e} at N2={} vs {rbc:.2e} at N2={}", spec.n2, coarse_spec.n2));
            c9b.check(rd < 1e-3, format!("max wall |d2 b1| / max |d2 b1| = {rd:.2e}"));
            c9b.check(rdq < rdc, format!("t<={t_cmp}: {rdq:.2e} at N2={} vs {rdc:.2e} at N2={}", spec.n2, coarse_spec.n2));
        }
        _ => {
            let msg = format!("error: {:?} {:?}", main.as_ref().err(), coarse.as_ref().err());
            c9a.check(false, &msg);
            c9b.check(false, &msg);
        }
    }
    let r9a = finish("9a", "Boundary propagation of b1", 3600.0, start9, c9a);
    let r9b = finish("9b", "Boundary propagation of d2 b1", 3600.0, start9, c9b);
    vec![r8, r9a, r9b]
}

/// Criteria that cannot pass as stated; see the project notes for the analysis.
pub const EXPECTED_FAILURES: &[&str] = &["9b"];

pub const ALL_IDS: &[&str] = &["1", "2", "3", "4", "5", "6", "7", "8", "9a", "9b"];

/// Runs the selected criteria (all when `ids` is empty); `on_result` sees each verdict as soon as it is known.
pub fn run_selected(ids: &[String], mut on_result: impl FnMut(&CriterionResult)) -> Vec<CriterionResult> {
    let want = |id: &str| ids.is_empty() || ids.iter().any(|s| s == id || (id.starts_with('9') && s == "9"));
    let mut all = Vec::new();
    let mut push = |r: CriterionResult| {
        on_result(&r);
        all.push(r);
    };
    let single: [(&str, fn() -> CriterionResult); 7] = [
        ("1", criterion_1),
        ("2", criterion_2),
        ("3", criterion_3),
        ("4", criterion_4),
        ("5", criterion_5),
        ("6", criterion_6),
        ("7", criterion_7),
    ];
    for (id, f) in single {
        if want(id) {
            push(f());
        }
    }
    if want("8") || want("9a") || want("9b") {
        for r in criteria_8_9() {
            if want(r.id) {
                push(r);
            }
        }
    }
    all
}

pub fn run_all(on_result: impl FnMut(&CriterionResult)) -> Vec<CriterionResult> {
    run_selected(&[], on_result)
}

pub fn summary(results: &[CriterionResult]) -> String {
    let mut s = String::new();
    for r in results {
        let _ = writeln!(s, "{}", r.line());
    }
    s
}
