use super::*;
use crate::dispersion::contour::sector_contour_for;
use crate::spectral::{GridSpec, ScalarField};
use std::sync::Arc;

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn grid(l2: f64, n2: usize) -> Arc<Grid> {
    Grid::new(GridSpec::new(2.0 * PI, 8, l2, n2, 0.0)).unwrap()
}

/// Compatible mode data built from a stream profile ψ with ψ(0) = ψ'(0) = 0.
fn mode_data(g: &Grid, xi1: f64) -> ([ModeProfile; 2], [ModeProfile; 2]) {
    let x = &g.x2;
    let iu = I / xi1;
    let p = |a: f64, s: f64, x: f64| {
        (
            s * x * x * (-a * x * x).exp(),
            s * (2.0 * x - 2.0 * a * x * x * x) * (-a * x * x).exp(),
        )
    };
    let u2: Vec<_> = x
        .iter()
        .map(|&x| c(p(1.0, 1.0, x).0, 0.3 * p(1.0, 1.0, x).0))
        .collect();
    let u1: Vec<_> = x
        .iter()
        .map(|&x| iu * c(p(1.0, 1.0, x).1, 0.3 * p(1.0, 1.0, x).1))
        .collect();
    let b2: Vec<_> = x.iter().map(|&x| c(p(1.5, 0.5, x).0, 0.0)).collect();
    let b1: Vec<_> = x.iter().map(|&x| iu * c(p(1.5, 0.5, x).1, 0.0)).collect();
    (
        [ModeProfile::new(xi1, u1), ModeProfile::new(xi1, u2)],
        [ModeProfile::new(xi1, b1), ModeProfile::new(xi1, b2)],
    )
}

fn state_max(s: &ModeState) -> f64 {
    s.u.iter()
        .chain(&s.b)
        .map(|v| max_abs(v))
        .fold(0.0, f64::max)
}

fn state_diff(a: &ModeState, b: &ModeState) -> f64 {
    a.u.iter()
        .zip(&b.u)
        .chain(a.b.iter().zip(&b.b))
        .map(|(x, y)| max_diff(x, y))
        .fold(0.0, f64::max)
}

#[test]
fn elementary_transforms() {
    let ct = sector_contour_for(1.0, 1.0, 4.0, 1.0).unwrap();
    let r = contour_integrate(&ct, 1.0, 1.0, |l, _| Ok(vec![1.0 / (l + 1.0)])).unwrap();
    assert!(
        (r.value[0] - (-1.0f64).exp()).norm() < 1e-8,
        "{:?}",
        r.value
    );
    assert!(r.error < 1e-6);
    let ct = sector_contour_for(1.0, 3.0, 4.0, 1.0).unwrap();
    let r = contour_integrate(&ct, 1.0, 3.0, |l, _| Ok(vec![1.0 / (l * l)])).unwrap();
    assert!((r.value[0] - 3.0).norm() < 1e-8, "{:?}", r.value);
    let r = contour_integrate(&ct, 1.0, 3.0, |_, _| Ok(vec![ZERO; 3])).unwrap();
    assert!(r.value.iter().all(|z| *z == ZERO));
}

#[test]
fn non_finite_integrand_names_node() {
    let ct = sector_contour_for(1.0, 1.0, 1.0, 1.0).unwrap();
    let err = contour_integrate(&ct, 1.0, 1.0, |_, _| Ok(vec![c(f64::NAN, 0.0)])).unwrap_err();
    assert!(matches!(err, Error::NonFinite { .. }));
}

#[test]
fn zero_mode_stays_zero() {
    let g = grid(10.0, 65);
    let z = ModeProfile::zeros(1.0, 65);
    let s = linear_evolve_mode(
        &g,
        1.0,
        &[z.clone(), z.clone()],
        &[z.clone(), z],
        1.0,
        &EvolveOpts::default(),
    )
    .unwrap();
    assert_eq!(state_max(&s), 0.0);
}

/// RK4 on the 2×2 system û' = −|ξ|²û + iξ₁b̂, b̂' = iξ₁û.
fn rk4(xi1: f64, xi2: f64, u: Complex64, b: Complex64, t: f64) -> (Complex64, Complex64) {
    let k2 = xi1 * xi1 + xi2 * xi2;
    let f = |u: Complex64, b: Complex64| (-k2 * u + I * xi1 * b, I * xi1 * u);
    let n = 20000;
    let h = t / n as f64;
    let (mut u, mut b) = (u, b);
    for _ in 0..n {
        let (a1, b1) = f(u, b);
        let (a2, b2) = f(u + 0.5 * h * a1, b + 0.5 * h * b1);
        let (a3, b3) = f(u + 0.5 * h * a2, b + 0.5 * h * b2);
        let (a4, b4) = f(u + h * a3, b + h * b3);
        u += h / 6.0 * (a1 + 2.0 * a2 + 2.0 * a3 + a4);
        b += h / 6.0 * (b1 + 2.0 * b2 + 2.0 * b3 + b4);
    }
    (u, b)
}

#[test]
fn whole_space_matches_ode() {
    for &(x1, x2, t) in &[
        (0.7, 0.3, 1.3),
        (2.0, 0.0, 0.8),
        (3.0, 1.5, 0.4),
        (0.1, 2.0, 2.0),
    ] {
        let u0 = [c(1.0, 0.2), c(-0.4, 0.5)];
        let b0 = [c(0.3, -0.1), c(0.2, 0.9)];
        let (u, b) = whole_space_mode_exp(x1, x2, u0, b0, t);
        for k in 0..2 {
            let (ue, be) = rk4(x1, x2, u0[k], b0[k], t);
            assert!((u[k] - ue).norm() < 1e-10, "{x1} {x2}: {} vs {}", u[k], ue);
            assert!((b[k] - be).norm() < 1e-10);
        }
    }
}

#[test]
fn whole_space_special_cases() {
    let u0 = [c(1.0, 0.0), c(0.5, 0.5)];
    let b0 = [c(0.2, 0.0), c(-1.0, 0.3)];
    let (u, b) = whole_space_mode_exp(0.0, 1.5, u0, b0, 0.7);
    for k in 0..2 {
        assert!((u[k] - u0[k] * (-2.25f64 * 0.7).exp()).norm() < 1e-14);
        assert!((b[k] - b0[k]).norm() < 1e-14);
    }
    let (u, b) = whole_space_mode_exp(1.2, 0.4, u0, b0, 0.0);
    for k in 0..2 {
        assert!((u[k] - u0[k]).norm() < 1e-14 && (b[k] - b0[k]).norm() < 1e-14);
    }
    // b-part driven by u₀ alone
    let (xi1, xi2, t) = (0.8, 0.6, 1.1);
    let (lp, lm) = lambda_pm(xi1, xi2);
    assert!((lp * lm - xi1 * xi1).norm() < 1e-14);
    let (_, b) = whole_space_mode_exp(xi1, xi2, [ZERO, c(1.0, 0.0)], [ZERO; 2], t);
    let expect = I * xi1 * ((lp * t).exp() - (lm * t).exp()) / (lp - lm);
    assert!((b[1] - expect).norm() < 1e-14);
    // degenerate λ₊ = λ₋ at ξ = (2, 0), approached from both sides
    let (a, _) = whole_space_mode_exp(2.0, 0.0, u0, b0, 1.0);
    let (n, _) = whole_space_mode_exp(2.0, 1e-5, u0, b0, 1.0);
    assert!((a[0] - n[0]).norm() < 1e-7);
}

/// û₁ I₁-term for ψ = x e^{−x²/2}: sine synthesis of the whole-space u-part factor.
fn odd_extension_oracle(xi1: f64, x: f64, t: f64) -> f64 {
    let (gx, gw) = &*crate::quadrature::gauss_legendre(64);
    let (a, b, panels) = (0.0, 12.0, 24);
    let h = (b - a) / panels as f64;
    let mut s = 0.0;
    for p in 0..panels {
        for (z, w) in gx.iter().zip(gw.iter()) {
            let k = a + h * (p as f64 + 0.5 * (z + 1.0));
            let f = (PI / 2.0).sqrt() * k * (-k * k / 2.0).exp();
            let (lp, lm) = lambda_pm(xi1, k);
            let (_, d1, _) = divided(lp, lm, t);
            s += 0.5 * h * w * f * d1.re * (k * x).sin();
        }
    }
    2.0 / PI * s
}

#[test]
fn dirichlet_part_matches_odd_extension() {
    let opts = EvolveOpts::default();
    let mut errs = Vec::new();
    for &n2 in &[1025usize, 2049] {
        let g = grid(12.0, n2);
        let f = ModeProfile::new(
            1.0,
            g.x2.iter()
                .map(|&x| c(x * (-x * x / 2.0).exp(), 0.0))
                .collect(),
        );
        let v = dirichlet_part_evolve(&g, 1.0, &f, 0.8, &opts).unwrap();
        let mut e = 0.0f64;
        for (j, &x) in g.x2.iter().enumerate() {
            e = e.max((v[j] - odd_extension_oracle(1.0, x, 0.8)).norm());
        }
        errs.push(e);
    }
    assert!(errs[1] < 2e-6, "{errs:?}");
    assert!(errs[0] / errs[1] > 3.0, "{errs:?}");
}

#[test]
fn sector_and_deformed_agree() {
    let g = grid(12.0, 257);
    for &xi1 in &[0.5, 1.0, 3.0] {
        let (u0, b0) = mode_data(&g, xi1);
        for &t in &[0.5, 2.0] {
            let s = linear_evolve_mode(&g, xi1, &u0, &b0, t, &EvolveOpts::default()).unwrap();
            let dopts = EvolveOpts {
                choice: ContourChoice::Deformed,
                ..EvolveOpts::default()
            };
            let d = linear_evolve_mode(&g, xi1, &u0, &b0, t, &dopts).unwrap();
            assert!(s.converged && d.converged);
            let rel = state_diff(&s, &d) / (state_max(&s) + 1e-14);
            assert!(rel < 1e-6, "xi1 {xi1} t {t}: {rel:.3e}");
        }
    }
}

#[test]
fn small_circle_contribution_vanishes() {
    let g = grid(12.0, 129);
    let xi1 = 1.0;
    let (u0, b0) = mode_data(&g, xi1);
    let rhs = ModeRhs::initial(u0, b0);
    let asm = ModeAssembler::new(&g, &rhs).unwrap();
    let mut prev = f64::INFINITY;
    for &eps in &[1e-2, 1e-3, 1e-4] {
        let ct = build_deformed_contours(
            xi1,
            eps,
            large_arc_radius(1.0),
            4.0,
            ContourOpts {
                t: 1.0,
                x_scale: 12.0,
            },
        )
        .unwrap();
        let r = integrate_nodes(&ct, xi1, 1.0, &mut |l, w| {
            let f = asm.fields(l, w)?;
            // b carries the b₀/λ pole, whose residue is b₀ itself
            Ok([f.u1, f.u2].concat())
        })
        .unwrap();
        let small: f64 = r
            .pieces
            .iter()
            .filter(|(l, _)| matches!(l, PieceLabel::Gamma5 | PieceLabel::Gamma6))
            .map(|p| p.1)
            .sum();
        assert!(small < 10.0 * eps.powf(0.75), "eps {eps}: {small:.3e}");
        assert!(small < prev);
        prev = small;
    }
}

#[test]
fn conjugate_symmetry() {
    let g = grid(12.0, 129);
    let (u0, b0) = mode_data(&g, 1.3);
    let conj =
        |p: &ModeProfile| ModeProfile::new(-p.xi1, p.values.iter().map(|z| z.conj()).collect());
    let opts = EvolveOpts::default();
    let a = linear_evolve_mode(&g, 1.3, &u0, &b0, 0.9, &opts).unwrap();
    let b = linear_evolve_mode(
        &g,
        -1.3,
        &[conj(&u0[0]), conj(&u0[1])],
        &[conj(&b0[0]), conj(&b0[1])],
        0.9,
        &opts,
    )
    .unwrap();
    let mut d = 0.0f64;
    for (x, y) in a.u.iter().zip(&b.u).chain(a.b.iter().zip(&b.b)) {
        for (p, q) in x.iter().zip(y) {
            d = d.max((p - q.conj()).norm());
        }
    }
    assert!(d < 1e-12 * state_max(&a), "{d:.3e}");
}

#[test]
fn short_time_limit() {
    let g = grid(12.0, 257);
    let (u0, b0) = mode_data(&g, 1.0);
    let mut errs = Vec::new();
    for &t in &[1e-2, 1e-3] {
        let s = linear_evolve_mode(&g, 1.0, &u0, &b0, t, &EvolveOpts::default()).unwrap();
        let mut e = 0.0f64;
        for k in 0..2 {
            e = e
                .max(max_diff(&s.u[k], &u0[k].values))
                .max(max_diff(&s.b[k], &b0[k].values));
        }
        errs.push(e);
    }
    assert!(errs[1] < 2e-2, "{errs:?}");
    assert!(errs[0] / errs[1] > 5.0, "{errs:?}");
}

#[test]
fn semigroup_property() {
    // the intermediate state is re-interpolated, so the defect is O(h²) in space
    let mut defects = Vec::new();
    for n2 in [1025usize, 2049] {
        let g = grid(30.0, n2);
        let xi1 = 0.8;
        let (u0, b0) = mode_data(&g, xi1);
        let opts = EvolveOpts::default();
        let whole = linear_evolve_mode(&g, xi1, &u0, &b0, 1.2, &opts).unwrap();
        let half = linear_evolve_mode(&g, xi1, &u0, &b0, 0.5, &opts).unwrap();
        let p = |v: &Vec<Complex64>| ModeProfile::new(xi1, v.clone());
        let two = linear_evolve_mode(
            &g,
            xi1,
            &[p(&half.u[0]), p(&half.u[1])],
            &[p(&half.b[0]), p(&half.b[1])],
            0.7,
            &opts,
        )
        .unwrap();
        let rel = state_diff(&whole, &two) / state_max(&whole);
        assert!(whole.error + half.error + two.error < 2.0 * opts.rel_tol);
        defects.push(rel);
    }
    assert!(defects[1] < 5e-6, "{defects:?}");
    assert!(defects[0] / defects[1] > 3.5, "{defects:?}");
}

#[test]
fn heat_mode_at_zero_frequency() {
    let g = grid(12.0, 513);
    let u = ModeProfile::new(
        0.0,
        g.x2.iter()
            .map(|&x| c(x * (-x * x / 2.0).exp(), 0.0))
            .collect(),
    );
    let z = ModeProfile::zeros(0.0, 513);
    let b = ModeProfile::new(
        0.0,
        g.x2.iter().map(|&x| c(x * x * (-x).exp(), 0.0)).collect(),
    );
    let s = linear_evolve_mode(
        &g,
        0.0,
        &[u, z.clone()],
        &[b.clone(), z],
        0.6,
        &EvolveOpts::default(),
    )
    .unwrap();
    // odd extension of x e^{−x²/2} under the heat flow
    let t: f64 = 0.6;
    for (j, &x) in g.x2.iter().enumerate().step_by(16) {
        let e = x * (1.0 + 2.0 * t).powf(-1.5) * (-x * x / (2.0 * (1.0 + 2.0 * t))).exp();
        assert!((s.u[0][j].re - e).abs() < 5e-5, "{x}: {} vs {e}", s.u[0][j]);
    }
    assert_eq!(s.b[0], b.values);
}

fn bump(g: &Arc<Grid>) -> (VectorField, VectorField) {
    // ψ = sin(x₁) x₂² e^{−x₂²}; u = (∂₂ψ, −∂₁ψ)
    let u1 = ScalarField::from_fn(g, |a, y| {
        a.sin() * (2.0 * y - 2.0 * y * y * y) * (-y * y).exp()
    });
    let u2 = ScalarField::from_fn(g, |a, y| -a.cos() * y * y * (-y * y).exp());
    (VectorField::new(u1, u2).unwrap(), VectorField::zeros(g))
}

#[test]
fn physical_evolution_dissipates_energy() {
    let g = Grid::new(GridSpec::new(2.0 * PI, 16, 10.0, 257, 0.0)).unwrap();
    let (u0, b0) = bump(&g);
    let out = linear_evolve(&u0, &b0, &[0.0, 0.25, 0.5, 1.0], &EvolveOpts::default()).unwrap();
    assert_eq!(out[0].u.c1.values, u0.c1.values);
    let mut prev = f64::INFINITY;
    for s in &out {
        let e = norm(&[&s.u.c1, &s.u.c2], NormSpec::L2).unwrap();
        assert!(e <= prev * (1.0 + 1e-9), "t {}: {e} > {prev}", s.t);
        prev = e;
    }
}

#[test]
fn incompatible_data_is_rejected() {
    let g = Grid::new(GridSpec::new(2.0 * PI, 16, 10.0, 129, 0.0)).unwrap();
    let bad = ScalarField::from_fn(&g, |a, y| a.sin() * (-y).exp());
    let u = VectorField::new(bad.clone(), ScalarField::zeros(&g)).unwrap();
    let err =
        linear_evolve(&u, &VectorField::zeros(&g), &[1.0], &EvolveOpts::default()).unwrap_err();
    match err {
        Error::Incompatible(m) => assert!(m.contains("u1") && m.contains("wall"), "{m}"),
        e => panic!("{e}"),
    }
}
