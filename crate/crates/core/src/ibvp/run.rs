use std::path::PathBuf;

use serde::Serialize;

use super::checkpoint::write_checkpoint;
use super::solver::{Solver, SolverStats};
use super::{SolverConfig, State};
use crate::decay::{EnergyLedger, Monitor, NormSeries};
use crate::error::{Error, Result};
use crate::spectral::{derivative_x2, divergence, norm, NormSpec, ScalarField, VectorField};

#[derive(Debug, Clone, Default)]
pub struct RunOptions {
    pub horizon: f64,
    pub monitors: Vec<Monitor>,
    /// Times at which fields are written; rounded to the nearest step.
    pub checkpoint_times: Vec<f64>,
    pub checkpoint_dir: Option<PathBuf>,
    /// Also record 𝓔² and 𝓕² (time derivatives by backward differences).
    pub high_order: bool,
}

/// Wall and constraint diagnostics at one sample time.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct WallSample {
    pub t: f64,
    pub b1_wall: f64,
    pub b1_max: f64,
    pub d2b1_wall: f64,
    pub d2b1_max: f64,
    pub u_wall: f64,
    pub b2_wall: f64,
    /// Max discrete divergence over interior x₂ rows.
    pub div_u: f64,
    pub div_b: f64,
    /// Fraction of the energy above 0.75·L2.
    pub tail: f64,
}

#[derive(Debug, Clone)]
pub struct RunOutput {
    pub series: NormSeries,
    pub ledger: EnergyLedger,
    pub wall: Vec<WallSample>,
    pub state: State,
    pub stats: SolverStats,
    pub checkpoints: Vec<PathBuf>,
    /// The step actually used (the horizon is a whole number of steps).
    pub dt: f64,
}

fn row_max(f: &ScalarField, j: usize) -> f64 {
    let n1 = f.grid.n1();
    f.values[j * n1..(j + 1) * n1].iter().fold(0.0, |m, v| m.max(v.abs()))
}

fn wall_sample(s: &State) -> Result<WallSample> {
    let g = s.u.grid();
    let d2b1 = derivative_x2(&s.b.c1, 1)?;
    let n1 = g.n1();
    let lim = 0.75 * g.spec.l2;
    let mut tot = 0.0;
    let mut tail = 0.0;
    for (j, x) in g.x2.iter().enumerate() {
        let e: f64 = [&s.u.c1, &s.u.c2, &s.b.c1, &s.b.c2]
            .iter()
            .map(|f| f.values[j * n1..(j + 1) * n1].iter().map(|v| v * v).sum::<f64>())
            .sum::<f64>()
            * g.w2[j];
        tot += e;
        if *x > lim {
            tail += e;
        }
    }
    let dmax = |f: &VectorField| -> Result<f64> {
        let d = divergence(f)?;
        Ok((1..g.n2() - 1).map(|j| row_max(&d, j)).fold(0.0, f64::max))
    };
    Ok(WallSample {
        t: s.t,
        b1_wall: row_max(&s.b.c1, 0),
        b1_max: s.b.c1.max_abs(),
        d2b1_wall: row_max(&d2b1, 0),
        d2b1_max: d2b1.max_abs(),
        u_wall: row_max(&s.u.c1, 0).max(row_max(&s.u.c2, 0)),
        b2_wall: row_max(&s.b.c2, 0),
        div_u: dmax(&s.u)?,
        div_b: dmax(&s.b)?,
        tail: if tot > 0.0 { tail / tot } else { 0.0 },
    })
}

fn diff(a: &VectorField, b: &VectorField, c: Option<&VectorField>, w: [f64; 3]) -> Result<VectorField> {
    let comb = |x: &ScalarField, y: &ScalarField, z: Option<&ScalarField>| {
        let mut r = x.scaled(w[0]);
        r.axpy(w[1], y);
        if let Some(z) = z {
            r.axpy(w[2], z);
        }
        r
    };
    VectorField::new(comb(&a.c1, &b.c1, c.map(|c| &c.c1)), comb(&a.c2, &b.c2, c.map(|c| &c.c2)))
}

/// 𝓔² and 𝓕² from three consecutive states s0, s1, s2 with step dt.
fn high_order(s0: &State, s1: &State, s2: &State, dt: f64) -> Result<(f64, f64)> {
    let w1 = [1.5 / dt, -2.0 / dt, 0.5 / dt];
    let w2 = [1.0 / (dt * dt), -2.0 / (dt * dt), 1.0 / (dt * dt)];
    let ut = diff(&s2.u, &s1.u, Some(&s0.u), w1)?;
    let bt = diff(&s2.b, &s1.b, Some(&s0.b), w1)?;
    let utt = diff(&s2.u, &s1.u, Some(&s0.u), w2)?;
    let sq = |fs: &[&ScalarField], n: NormSpec| -> Result<f64> { Ok(norm(fs, n)?.powi(2)) };
    let u = [&s2.u.c1, &s2.u.c2];
    let b = [&s2.b.c1, &s2.b.c2];
    let e2 = sq(&u, NormSpec::H(3))? + sq(&b, NormSpec::H(3))? + sq(&[&ut.c1, &ut.c2], NormSpec::H(1))?;
    // ‖∇u‖²_{H³} = ‖u‖²_{H⁴} − ‖u‖², approximated by the H³ norms of the two first derivatives.
    let mut grad = 0.0;
    let mut d1b = 0.0;
    for c in u {
        grad += sq(&[&crate::spectral::derivative_x1(c)?], NormSpec::H(3))?;
        grad += sq(&[&derivative_x2(c, 1)?], NormSpec::H(3))?;
    }
    for c in b {
        d1b += sq(&[&crate::spectral::derivative_x1(c)?], NormSpec::H(2))?;
    }
    let f2 = grad
        + d1b
        + sq(&[&ut.c1, &ut.c2], NormSpec::H(1))?
        + sq(&[&bt.c1, &bt.c2], NormSpec::H(1))?
        + sq(&[&utt.c1, &utt.c2], NormSpec::L2)?;
    Ok((e2, f2))
}

/// Evolves (u₀, b₀) to `opts.horizon`, sampling the monitors every
/// `cfg.monitor_stride` steps and at the end. The step is shrunk so that the
/// horizon is reached exactly.
pub fn run(cfg: &SolverConfig, u0: &VectorField, b0: &VectorField, opts: &RunOptions) -> Result<RunOutput> {
    cfg.validate()?;
    if !(opts.horizon.is_finite() && opts.horizon >= 0.0) {
        return Err(Error::config("horizon", "must be finite and >= 0"));
    }
    let steps = (opts.horizon / cfg.dt).ceil() as u64;
    let mut cfg = cfg.clone();
    if steps > 0 {
        cfg.dt = opts.horizon / steps as f64;
    }
    let dt = cfg.dt;
    let stride = cfg.monitor_stride.max(1) as u64;
    let mut solver = Solver::new(cfg, u0, b0)?;
    let mut series = NormSeries::new(opts.monitors.clone());
    let mut ledger = EnergyLedger::default();
    let mut wall = Vec::new();
    let mut checkpoints = Vec::new();
    let ck_steps: Vec<u64> = opts.checkpoint_times.iter().map(|t| (t / dt).round() as u64).collect();
    if let Some(dir) = &opts.checkpoint_dir {
        std::fs::create_dir_all(dir)?;
    }
    let mut history: Vec<(u64, State)> = Vec::new();
    let mut k = 0u64;
    loop {
        let sample = k % stride == 0 || k == steps;
        let ckpt = ck_steps.contains(&k);
        let pre = opts.high_order && [k + 1, k + 2].iter().any(|m| m % stride == 0 || *m == steps);
        if sample || ckpt || pre {
            let s = solver.state()?;
            if sample {
                series.push_state(&s)?;
                let st = solver.stats();
                let high = match history.as_slice() {
                    [(k0, s0), (k1, s1)] if *k0 + 2 == k && *k1 + 1 == k => Some(high_order(s0, s1, &s, dt)?),
                    _ => None,
                };
                ledger.push(s.t, st.energy, st.dissipation, high);
                wall.push(wall_sample(&s)?);
            }
            if ckpt {
                if let Some(dir) = &opts.checkpoint_dir {
                    let path = dir.join(format!("state_{k:08}.bin"));
                    write_checkpoint(&path, &solver.state_with_pressure()?)?;
                    checkpoints.push(path);
                }
            }
            if opts.high_order {
                history.push((k, s));
                if history.len() > 2 {
                    history.remove(0);
                }
            }
        }
        if k == steps {
            break;
        }
        solver.step()?;
        k += 1;
    }
    Ok(RunOutput { series, ledger, wall, state: solver.state()?, stats: solver.stats(), checkpoints, dt })
}
