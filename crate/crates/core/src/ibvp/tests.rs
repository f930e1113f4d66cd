use std::sync::Arc;

use super::*;
use crate::inverse_laplace::{linear_evolve, EvolveOpts};
use crate::spectral::{derivative_x1, derivative_x2, norm, Grid, GridSpec, NormSpec};

fn grid(l1: f64, n1: usize, l2: f64, n2: usize) -> Arc<Grid> {
    Grid::new(GridSpec::new(l1, n1, l2, n2, 0.0)).unwrap()
}

fn pair_norm(u: &VectorField, b: &VectorField) -> f64 {
    norm(&[&u.c1, &u.c2, &b.c1, &b.c2], NormSpec::L2).unwrap()
}

fn sub(a: &VectorField, b: &VectorField) -> VectorField {
    let mut c1 = a.c1.clone();
    c1.axpy(-1.0, &b.c1);
    let mut c2 = a.c2.clone();
    c2.axpy(-1.0, &b.c2);
    VectorField::new(c1, c2).unwrap()
}

fn rel_diff(s: &State, u: &VectorField, b: &VectorField) -> f64 {
    pair_norm(&sub(&s.u, u), &sub(&s.b, b)) / pair_norm(u, b)
}

fn data(g: &Arc<Grid>, amplitude: f64, relation: FieldRelation) -> (VectorField, VectorField) {
    let spec = InitSpec { amplitude, radius: 2.5, center: [0.0, 3.5], relation, ..InitSpec::default() };
    make_initial_data(g, &spec).unwrap()
}

fn linear(dt: f64) -> SolverConfig {
    SolverConfig { dt, ..SolverConfig::default() }
}

#[test]
fn agrees_with_contour_solution_on_deep_domain() {
    let g = grid(20.0, 16, 32.0, 1025);
    let (u0, b0) = data(&g, 0.1, FieldRelation::Independent);
    let reference = linear_evolve(&u0, &b0, &[0.5, 1.0], &EvolveOpts::default()).unwrap();
    let mut s = Solver::new(linear(0.01), &u0, &b0).unwrap();
    for r in &reference {
        s.advance_to(r.t).unwrap();
        let d = rel_diff(&s.state().unwrap(), &r.u, &r.b);
        assert!(d < 1e-3, "t {}: {d:.3e}", r.t);
    }
}

#[test]
fn time_error_is_second_order() {
    let g = grid(20.0, 16, 32.0, 1025);
    let (u0, b0) = data(&g, 0.1, FieldRelation::Independent);
    let r = &linear_evolve(&u0, &b0, &[0.8], &EvolveOpts::default()).unwrap()[0];
    let err = |dt: f64| {
        let mut s = Solver::new(linear(dt), &u0, &b0).unwrap();
        s.advance_to(0.8).unwrap();
        rel_diff(&s.state().unwrap(), &r.u, &r.b)
    };
    let (e1, e2) = (err(0.1), err(0.05));
    assert!(e1 / e2 > 3.3, "{e1:.3e} {e2:.3e}");
}

#[test]
fn mean_flow_follows_heat_equation() {
    let l2 = std::f64::consts::PI;
    let g = grid(8.0, 8, l2, 1025);
    let u1 = ScalarField::from_fn(&g, |_, y| y.sin());
    let u0 = VectorField::new(u1, ScalarField::zeros(&g)).unwrap();
    let b0 = VectorField::zeros(&g);
    let mut s = Solver::new(linear(0.002), &u0, &b0).unwrap();
    s.advance_to(1.0).unwrap();
    let st = s.state().unwrap();
    let decay = (-1.0f64).exp();
    let err = st
        .u
        .c1
        .values
        .iter()
        .zip(&u0.c1.values)
        .fold(0.0f64, |m, (a, b)| m.max((a - decay * b).abs()));
    assert!(err < 1e-6, "{err:.3e}");
    assert_eq!(st.u.c2.max_abs(), 0.0);
    assert_eq!(st.b.max_abs(), 0.0);
}

#[test]
fn zero_state_is_fixed() {
    let g = grid(20.0, 16, 12.0, 129);
    let z = VectorField::zeros(&g);
    for scheme in [Scheme::Linear, Scheme::Nonlinear] {
        let mut s = Solver::new(SolverConfig { scheme, ..SolverConfig::default() }, &z, &z).unwrap();
        for _ in 0..5 {
            s.step().unwrap();
        }
        let st = s.state().unwrap();
        assert_eq!(st.u.max_abs() + st.b.max_abs(), 0.0);
    }
}

#[test]
fn shear_flow_creates_no_magnetic_field() {
    let g = grid(20.0, 16, 12.0, 257);
    let u1 = ScalarField::from_fn(&g, |_, y| 0.1 * y * y * (-(y - 3.0) * (y - 3.0)).exp());
    let u0 = VectorField::new(u1, ScalarField::zeros(&g)).unwrap();
    let cfg = SolverConfig { scheme: Scheme::Nonlinear, ..SolverConfig::default() };
    let mut s = Solver::new(cfg, &u0, &VectorField::zeros(&g)).unwrap();
    s.advance_to(1.0).unwrap();
    let st = s.state().unwrap();
    assert!(st.b.max_abs() < 1e-10, "{}", st.b.max_abs());
    assert!(st.u.max_abs() > 0.01);
}

#[test]
fn linear_energy_never_increases() {
    let g = grid(20.0, 16, 16.0, 513);
    let (u0, b0) = data(&g, 0.1, FieldRelation::Independent);
    let mut s = Solver::new(linear(0.02), &u0, &b0).unwrap();
    let e0 = s.stats().energy;
    let mut prev = e0;
    for _ in 0..100 {
        s.step().unwrap();
        let e = s.stats().energy;
        assert!(e <= prev * (1.0 + 1e-13), "{e} > {prev}");
        prev = e;
    }
    let st = s.stats();
    let audit = (st.energy + st.dissipation - e0).abs() / e0;
    assert!(audit < 1e-3, "{audit:.3e}");
    assert!(st.energy < e0);
}

#[test]
fn nonlinear_energy_audit() {
    let g = grid(20.0, 64, 16.0, 513);
    let (u0, b0) = data(&g, 0.2, FieldRelation::Independent);
    let cfg = SolverConfig { scheme: Scheme::Nonlinear, dt: 0.01, ..SolverConfig::default() };
    let mut s = Solver::new(cfg, &u0, &b0).unwrap();
    let e0 = s.stats().energy;
    s.advance_to(2.0).unwrap();
    let st = s.stats();
    let audit = (st.energy + st.dissipation - e0).abs() / e0;
    assert!(audit < 1e-3, "{audit:.3e}");
    assert!(st.max_cfl > 0.0 && st.max_cfl < 0.5);
}

#[test]
fn cfl_violation_is_reported() {
    let g = grid(20.0, 32, 16.0, 257);
    let (u0, b0) = data(&g, 5.0, FieldRelation::Independent);
    let cfg = SolverConfig { scheme: Scheme::Nonlinear, dt: 0.5, ..SolverConfig::default() };
    let mut s = Solver::new(cfg, &u0, &b0).unwrap();
    match s.step() {
        Err(Error::Cfl { dt, limit }) => assert!(limit < dt),
        r => panic!("{r:?}"),
    }
}

#[test]
fn pressure_closes_the_momentum_balance() {
    let g = grid(20.0, 16, 16.0, 513);
    let (u0, b0) = data(&g, 0.1, FieldRelation::Independent);
    let dt = 1e-3;
    let mut s = Solver::new(linear(dt), &u0, &b0).unwrap();
    s.advance_to(0.2).unwrap();
    let before = s.state().unwrap();
    s.step().unwrap();
    let mid = s.state_with_pressure().unwrap();
    s.step().unwrap();
    let after = s.state().unwrap();
    let p = mid.p.as_ref().unwrap();
    let px1 = derivative_x1(p).unwrap();
    let px2 = derivative_x2(p, 1).unwrap();
    let lap = |f: &ScalarField| {
        let mut a = derivative_x2(f, 2).unwrap();
        a.axpy(1.0, &derivative_x1(&derivative_x1(f).unwrap()).unwrap());
        a
    };
    for (c, (ut, rhs)) in [
        (&after.u.c1, (&before.u.c1, (lap(&mid.u.c1), derivative_x1(&mid.b.c1).unwrap(), &px1))),
        (&after.u.c2, (&before.u.c2, (lap(&mid.u.c2), derivative_x1(&mid.b.c2).unwrap(), &px2))),
    ]
    .into_iter()
    .enumerate()
    .map(|(i, (a, (b, r)))| (i, (a, (b, r))))
    {
        let (ub, (l, d1b, dp)) = rhs;
        let n1 = g.n1();
        let mut worst = 0.0f64;
        let mut scale = 0.0f64;
        for idx in 2 * n1..(g.n2() - 2) * n1 {
            let time = (ut.values[idx] - ub.values[idx]) / (2.0 * dt);
            let bal = l.values[idx] + d1b.values[idx] - dp.values[idx];
            worst = worst.max((time - bal).abs());
            scale = scale.max(time.abs());
        }
        assert!(worst < 2e-2 * scale, "component {c}: {worst:.3e} vs {scale:.3e}");
    }
}

#[test]
fn pressure_of_zero_state_is_zero() {
    let g = grid(20.0, 16, 12.0, 129);
    let z = VectorField::zeros(&g);
    let s = Solver::new(SolverConfig::default(), &z, &z).unwrap();
    assert_eq!(s.state_with_pressure().unwrap().p.unwrap().max_abs(), 0.0);
}

#[test]
fn initial_data_is_solenoidal_and_vanishes_at_the_wall() {
    let g = grid(40.0, 64, 16.0, 257);
    for relation in [FieldRelation::Alfvenic, FieldRelation::Independent] {
        let eps = 0.05;
        let (u, b) = data(&g, eps, relation);
        if relation == FieldRelation::Independent {
            // Generic pairs leave an O(ε²) projected nonlinear acceleration at the wall.
            let r = check_compatibility(&u, &b).unwrap();
            let (u2, b2) = data(&g, 2.0 * eps, relation);
            let r2 = check_compatibility(&u2, &b2).unwrap();
            assert_eq!(r.violations(1e-8), ["accel_wall"]);
            assert!((r2.accel_wall / r.accel_wall - 4.0).abs() < 1e-6, "{} {}", r.accel_wall, r2.accel_wall);
            continue;
        }
        assert!((u.max_abs() - eps).abs() < 1e-15);
        let r = check_compatibility(&u, &b).unwrap();
        assert!(r.div_u < 1e-12 && r.div_b < 1e-12, "{r:?}");
        for (k, v) in r.entries() {
            if k.ends_with("wall") && k != "accel_wall" {
                assert!(v < 1e-10 * eps, "{k} = {v}");
            }
        }
        assert!(r.is_compatible(1e-8), "{:?} {r:?}", r.violations(1e-8));
    }
}

#[test]
fn initial_data_scales_linearly() {
    let g = grid(40.0, 64, 16.0, 129);
    let (u1, _) = data(&g, 0.01, FieldRelation::Independent);
    let (u2, _) = data(&g, 0.03, FieldRelation::Independent);
    for (a, b) in u1.c2.values.iter().zip(&u2.c2.values) {
        assert!((3.0 * a - b).abs() < 1e-15);
    }
    let (z, zb) = data(&g, 0.0, FieldRelation::Independent);
    assert_eq!(z.max_abs() + zb.max_abs(), 0.0);
    assert_eq!(check_compatibility(&z, &zb).unwrap().max_residual(), 0.0);
}

#[test]
fn initial_support_must_fit() {
    let g = grid(40.0, 64, 16.0, 129);
    for spec in [
        InitSpec { center: [0.0, 1.0], radius: 2.0, ..InitSpec::default() },
        InitSpec { center: [0.0, 15.0], radius: 2.0, ..InitSpec::default() },
        InitSpec { radius: 30.0, center: [0.0, 15.0], ..InitSpec::default() },
    ] {
        match make_initial_data(&g, &spec) {
            Err(Error::Config { key, .. }) => assert!(key.starts_with("init."), "{key}"),
            r => panic!("{r:?}"),
        }
    }
}

#[test]
fn zero_mean_option_controls_the_mean_mode() {
    let g = grid(40.0, 64, 16.0, 129);
    let n1 = g.n1();
    let mean = |f: &ScalarField| {
        f.values.chunks(n1).map(|row| row.iter().sum::<f64>().abs() / n1 as f64).fold(0.0, f64::max)
    };
    let spec = InitSpec { radius: 3.0, center: [0.0, 4.0], ..InitSpec::default() };
    let (u, _) = make_initial_data(&g, &spec).unwrap();
    assert!(mean(&u.c1) < 1e-14);
    let (u, _) = make_initial_data(&g, &InitSpec { zero_x1_mean: false, ..spec }).unwrap();
    assert!(mean(&u.c1) > 1e-6);
}

#[test]
fn violated_wall_trace_is_flagged() {
    let g = grid(40.0, 64, 16.0, 129);
    let (u, mut b) = data(&g, 0.05, FieldRelation::Independent);
    let bump = ScalarField::from_fn(&g, |x, y| 0.01 * (-(x * x)).exp() * (-y).exp());
    b.c1.axpy(1.0, &bump);
    let r = check_compatibility(&u, &b).unwrap();
    let v = r.violations(1e-8);
    assert!(v.contains(&"b1_wall"), "{v:?}");
    assert!(!v.contains(&"u1_wall"));
}

#[test]
fn checkpoint_round_trip() {
    let g = grid(20.0, 16, 12.0, 65);
    let (u, b) = data(&g, 0.1, FieldRelation::Independent);
    let s = Solver::new(SolverConfig::default(), &u, &b).unwrap().state_with_pressure().unwrap();
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("ck.bin");
    let meta = write_checkpoint(&path, &s).unwrap();
    assert_eq!(meta.fields, ["u1", "u2", "b1", "b2", "p"]);
    let back = read_checkpoint(&path).unwrap();
    assert_eq!(back.t, s.t);
    assert_eq!(back.u.c1.values, s.u.c1.values);
    assert_eq!(back.b.c2.values, s.b.c2.values);
    assert_eq!(back.p.unwrap().values, s.p.unwrap().values);
    std::fs::write(&path, [0u8; 16]).unwrap();
    assert!(read_checkpoint(&path).is_err());
}

#[test]
fn run_records_monitors_and_checkpoints() {
    use crate::decay::Monitor;
    let g = grid(20.0, 16, 12.0, 129);
    let (u, b) = data(&g, 0.1, FieldRelation::Independent);
    let monitors: Vec<Monitor> = ["u:L2", "b1:Linf"].iter().map(|s| s.parse().unwrap()).collect();
    let cfg = SolverConfig { dt: 0.03, monitor_stride: 5, ..SolverConfig::default() };
    let zero = RunOptions { horizon: 0.0, monitors: monitors.clone(), ..RunOptions::default() };
    let out = run(&cfg, &u, &b, &zero).unwrap();
    assert_eq!(out.series.times, [0.0]);
    let dir = tempfile::tempdir().unwrap();
    let opts = RunOptions {
        horizon: 1.0,
        monitors,
        checkpoint_times: vec![0.5],
        checkpoint_dir: Some(dir.path().to_path_buf()),
        high_order: true,
    };
    let out = run(&cfg, &u, &b, &opts).unwrap();
    assert_eq!(out.dt, 1.0 / 34.0);
    assert_eq!(*out.series.times.last().unwrap(), out.state.t);
    assert!((out.state.t - 1.0).abs() < 1e-12);
    assert_eq!(out.series.len(), out.ledger.times.len());
    assert_eq!(out.checkpoints.len(), 1);
    assert!(read_checkpoint(&out.checkpoints[0]).unwrap().p.is_some());
    assert!(out.ledger.energy.windows(2).all(|w| w[1] <= w[0]));
    assert!(out.ledger.high_energy[0].is_nan());
    assert!(out.ledger.high_energy[1..].iter().all(|v| v.is_finite() && *v > 0.0));
    for w in &out.wall {
        assert!(w.b2_wall == 0.0 && w.u_wall == 0.0, "{w:?}");
        assert!(w.div_u < 1e-12 && w.div_b < 1e-12, "{w:?}");
        assert!(w.b1_wall < 1e-3 * w.b1_max, "{w:?}");
    }
}

