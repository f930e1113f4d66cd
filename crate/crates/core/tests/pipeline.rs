//! Library-level runs across modules.

use mhdlab::decay::{fit_exponent, record, Monitor};
use mhdlab::ibvp::{make_initial_data, read_checkpoint, run, InitSpec, RunOptions, Scheme, Solver, SolverConfig};
use mhdlab::inverse_laplace::{linear_evolve, EvolveOpts};
use mhdlab::spectral::{norm, Grid, GridSpec, NormSpec};

fn small() -> (std::sync::Arc<Grid>, InitSpec) {
    let g = Grid::new(GridSpec::new(20.0, 32, 16.0, 257, 1.0)).unwrap();
    (g, InitSpec { radius: 3.0, center: [0.0, 5.0], amplitude: 0.05, ..InitSpec::default() })
}

#[test]
fn stepper_tracks_inverse_laplace() {
    let (g, init) = small();
    let (u0, b0) = make_initial_data(&g, &init).unwrap();
    let exact = linear_evolve(&u0, &b0, &[1.0], &EvolveOpts::default()).unwrap();
    let mut s = Solver::new(SolverConfig { dt: 0.0125, ..SolverConfig::default() }, &u0, &b0).unwrap();
    s.advance_to(1.0).unwrap();
    let st = s.state().unwrap();
    let mut du = st.u.c1.clone();
    du.axpy(-1.0, &exact[0].u.c1);
    let rel = norm(&[&du], NormSpec::L2).unwrap() / norm(&[&exact[0].u.c1], NormSpec::L2).unwrap();
    assert!(rel < 5e-3, "{rel:.3e}");
}

#[test]
fn run_record_and_fit() {
    let (g, init) = small();
    let (u0, b0) = make_initial_data(&g, &init).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let cfg = SolverConfig { dt: 0.05, scheme: Scheme::Nonlinear, monitor_stride: 2, ..SolverConfig::default() };
    let opts = RunOptions {
        horizon: 4.0,
        monitors: Monitor::defaults(),
        checkpoint_times: vec![2.0],
        checkpoint_dir: Some(dir.path().to_path_buf()),
        high_order: false,
    };
    let out = run(&cfg, &u0, &b0, &opts).unwrap();
    assert!(out.ledger.audit_residual() < 5e-3);
    let state = read_checkpoint(&out.checkpoints[0]).unwrap();
    assert!((state.t - 2.0).abs() < 1e-12);
    assert!(state.p.is_some());
    let (series, _) = record(&[out.state.clone()], &Monitor::defaults()).unwrap();
    assert_eq!(series.len(), 1);
    // values are stored one column per monitor
    for (fresh, col) in series.values.iter().zip(&out.series.values) {
        let (a, b) = (fresh[0], *col.last().unwrap());
        assert!((a - b).abs() <= 1e-12 * b.abs().max(1e-300), "{a} vs {b}");
    }
    let m: Monitor = "u:L2".parse().unwrap();
    let fit = fit_exponent(&out.series, &m, [1.0, 4.0]).unwrap();
    assert!(fit.alpha < 0.0);
}
