//! Inversion contours: the sector contour and the branch-cut wraps.

use std::f64::consts::PI;
use std::fmt;

use num_complex::Complex64;
use serde::Serialize;

use crate::dispersion::{lambda_prime_pm, omega_principal, omega_side};
use crate::error::{Error, Result};
use crate::quadrature::gauss_legendre;

const I: Complex64 = Complex64::new(0.0, 1.0);
const MIN_NODES: usize = 8;
const MAX_PANEL_NODES: usize = 32;
/// |e^{λt}| < e^{-TAIL} ≈ 1e-16 beyond truncation.
pub const TAIL: f64 = 36.85;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum PieceLabel {
    Gamma1,
    Gamma2,
    Gamma3,
    Gamma4,
    Gamma5,
    Gamma6,
    Gamma7,
    GammaTilde1,
    GammaTilde2,
    Sector,
}

impl fmt::Display for PieceLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Debug::fmt(self, f)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum PieceKind {
    Ray,
    CutWrap,
    SmallCircle,
    LargeArc,
}

/// Which side of a cut a wrap runs along.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Side {
    Upper,
    Lower,
    Inner,
    Outer,
    None,
}

/// How ω is evaluated at the nodes of a piece.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Branch {
    /// Principal value, Re ω ≥ 0, off the cuts.
    Principal,
    /// Cut boundary value from a fixed side.
    FixedNormal(Complex64),
    /// Cut boundary value on a circle about the origin, outward (+1) or inward (−1).
    Radial(f64),
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum Path {
    Line { start: Complex64, dir: Complex64 },
    Circle { center: Complex64, radius: f64 },
}

impl Path {
    fn point(&self, s: f64) -> Complex64 {
        match *self {
            Path::Line { start, dir } => start + dir * s,
            Path::Circle { center, radius } => center + radius * Complex64::from_polar(1.0, s),
        }
    }

    fn deriv(&self, s: f64) -> Complex64 {
        match *self {
            Path::Line { dir, .. } => dir,
            Path::Circle { radius, .. } => I * radius * Complex64::from_polar(1.0, s),
        }
    }
}

/// Scales used to size panels: e^{λt} phase and e^{−ωx} phase over x ≤ x_scale.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ContourOpts {
    pub t: f64,
    pub x_scale: f64,
}

impl Default for ContourOpts {
    fn default() -> Self {
        Self { t: 1.0, x_scale: 1.0 }
    }
}

/// One labelled piece with its quadrature nodes and weights (dλ included).
#[derive(Debug, Clone)]
pub struct ContourPiece {
    pub label: PieceLabel,
    pub kind: PieceKind,
    pub side: Side,
    pub branch: Branch,
    pub nodes: Vec<Complex64>,
    pub weights: Vec<Complex64>,
    path: Path,
}

impl ContourPiece {
    /// ω at node `i` for frequency ξ₁ under this piece's branch rule.
    pub fn omega(&self, i: usize, xi1: f64) -> Complex64 {
        omega_with(self.branch, self.path, self.nodes[i], xi1)
    }
}

fn omega_with(branch: Branch, path: Path, lam: Complex64, xi1: f64) -> Complex64 {
    match branch {
        Branch::Principal => omega_principal(lam, xi1),
        Branch::FixedNormal(n) => omega_side(lam, xi1, n),
        Branch::Radial(sign) => {
            let c = match path {
                Path::Circle { center, .. } => center,
                Path::Line { .. } => Complex64::new(0.0, 0.0),
            };
            let n = (lam - c) / (lam - c).norm() * sign;
            omega_side(lam, xi1, n)
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum Recipe {
    Sector { r: f64, theta0: f64, eta_max: f64 },
    Deformed { xi1: f64, eps: f64, r7: f64 },
}

/// Ordered list of contour pieces.
#[derive(Debug, Clone)]
pub struct Contour {
    pub pieces: Vec<ContourPiece>,
    pub n_per_unit: f64,
    pub opts: ContourOpts,
    recipe: Recipe,
}

struct PieceSpec {
    label: PieceLabel,
    kind: PieceKind,
    side: Side,
    branch: Branch,
    path: Path,
    a: f64,
    b: f64,
    /// Grade toward `a`: reference point and first distance.
    grade_a: Option<(f64, f64)>,
    grade_b: Option<(f64, f64)>,
    /// Square-root endpoint (0 = none, 1 = at a, 2 = at b): s = end ± u².
    sqrt_end: u8,
}

/// Breakpoints between `a` and `b` (either order), graded geometrically
/// toward the requested ends. Grading toward end `a` with (p, d) places
/// points at distances p + d·2^m from `a`'s reference... measured from p.
fn breakpoints(a: f64, b: f64, ga: Option<(f64, f64)>, gb: Option<(f64, f64)>) -> Vec<f64> {
    let sgn = if b >= a { 1.0 } else { -1.0 };
    let len = (b - a).abs();
    let mut pts = vec![a, b];
    let split = match (ga, gb) {
        (Some(_), Some(_)) => 0.5 * len,
        _ => len,
    };
    if let Some((p, d)) = ga {
        // distances measured from reference p located at or behind a
        let off = (a - p).abs();
        let mut dist = d.max(off * 1e-300).max(len * 1e-14);
        while dist - off < split {
            let u = dist - off;
            if u > 0.0 {
                pts.push(a + sgn * u);
            }
            dist *= 2.0;
        }
    }
    if let Some((p, d)) = gb {
        let off = (b - p).abs();
        let mut dist = d.max(len * 1e-14);
        while dist - off < split {
            let u = dist - off;
            if u > 0.0 {
                pts.push(b - sgn * u);
            }
            dist *= 2.0;
        }
    }
    if ga.is_some() && gb.is_some() {
        pts.push(a + sgn * split);
    }
    pts.sort_by(|x, y| (sgn * x).partial_cmp(&(sgn * y)).unwrap());
    pts.dedup_by(|x, y| (*x - *y).abs() <= 1e-15 * len.max(1e-300));
    pts
}

fn effective_length(spec: &PieceSpec, s0: f64, s1: f64, xi1: Option<f64>, opts: &ContourOpts) -> f64 {
    let sm = 0.5 * (s0 + s1);
    let (l0, lm, l1) = (spec.path.point(s0), spec.path.point(sm), spec.path.point(s1));
    let arclen = (lm - l0).norm() + (l1 - lm).norm();
    let om = |l: Complex64| match xi1 {
        Some(x) => omega_with(spec.branch, spec.path, l, x),
        None => omega_principal(l, 0.0),
    };
    let (w0, wm, w1) = (om(l0), om(lm), om(l1));
    let dw = (wm - w0).norm() + (w1 - wm).norm();
    let re_min = w0.re.min(wm.re).min(w1.re);
    let x_eff = if re_min > 0.0 { opts.x_scale.min(TAIL / re_min) } else { opts.x_scale };
    arclen * opts.t + dw * x_eff + 1.0
}

fn realize(spec: PieceSpec, n_per_unit: f64, xi1: Option<f64>, opts: &ContourOpts) -> ContourPiece {
    let (a, b) = (spec.a, spec.b);
    let sbps = breakpoints(a, b, spec.grade_a, spec.grade_b);
    // u-space breakpoints and the map u → (s, ds/du).
    let (ubps, map): (Vec<f64>, Box<dyn Fn(f64) -> (f64, f64)>) = match spec.sqrt_end {
        1 => {
            let mut u: Vec<f64> = sbps.iter().map(|s| ((s - a) / (b - a)).clamp(0.0, 1.0).sqrt()).collect();
            u.extend((1..8).map(|j| j as f64 / 8.0));
            u.sort_by(|x, y| x.partial_cmp(y).unwrap());
            u.dedup_by(|x, y| (*x - *y).abs() < 1e-13);
            (u, Box::new(move |u: f64| (a + (b - a) * u * u, 2.0 * (b - a) * u)))
        }
        2 => {
            let mut u: Vec<f64> = sbps.iter().map(|s| ((b - s) / (b - a)).clamp(0.0, 1.0).sqrt()).collect();
            u.extend((1..8).map(|j| j as f64 / 8.0));
            u.sort_by(|x, y| y.partial_cmp(x).unwrap());
            u.dedup_by(|x, y| (*x - *y).abs() < 1e-13);
            (u, Box::new(move |u: f64| (b - (b - a) * u * u, -2.0 * (b - a) * u)))
        }
        _ => (sbps, Box::new(|s: f64| (s, 1.0))),
    };
    let mut nodes = Vec::new();
    let mut weights = Vec::new();
    for w in ubps.windows(2) {
        let (u0, u1) = (w[0], w[1]);
        let eff = effective_length(&spec, map(u0).0, map(u1).0, xi1, opts);
        let n = ((n_per_unit * eff).ceil() as usize).max(MIN_NODES);
        let m = n.div_ceil(MAX_PANEL_NODES);
        let per = n.div_ceil(m).max(MIN_NODES);
        let rule = gauss_legendre(per);
        for j in 0..m {
            let pa = u0 + (u1 - u0) * j as f64 / m as f64;
            let pb = u0 + (u1 - u0) * (j + 1) as f64 / m as f64;
            let half = 0.5 * (pb - pa);
            let mid = 0.5 * (pa + pb);
            for (x, wt) in rule.0.iter().zip(&rule.1) {
                let (s, ds) = map(mid + half * x);
                nodes.push(spec.path.point(s));
                weights.push(spec.path.deriv(s) * (ds * half * wt));
            }
        }
    }
    ContourPiece {
        label: spec.label,
        kind: spec.kind,
        side: spec.side,
        branch: spec.branch,
        nodes,
        weights,
        path: spec.path,
    }
}

impl Contour {
    pub fn node_count(&self) -> usize {
        self.pieces.iter().map(|p| p.nodes.len()).sum()
    }

    pub fn labels(&self) -> Vec<PieceLabel> {
        let mut v: Vec<PieceLabel> = Vec::new();
        for p in &self.pieces {
            if !v.contains(&p.label) {
                v.push(p.label);
            }
        }
        v
    }

    /// Same geometry with the node density scaled by `factor`.
    pub fn rescaled(&self, factor: f64) -> Result<Contour> {
        let n = self.n_per_unit * factor;
        match self.recipe {
            Recipe::Sector { r, theta0, eta_max } => build_sector_contour(r, theta0, eta_max, n, self.opts),
            Recipe::Deformed { xi1, eps, r7 } => build_deformed_contours(xi1, eps, r7, n, self.opts),
        }
    }

    /// Checks Re ω > 0 at every node and that no cut of ω is crossed
    /// between consecutive nodes of a piece (for the sector contour).
    pub fn validate(&self, xi1: f64) -> Result<()> {
        let mut idx = 0;
        for p in &self.pieces {
            let mut prev: Option<Complex64> = None;
            for i in 0..p.nodes.len() {
                let w = p.omega(i, xi1);
                let w2 = crate::dispersion::omega_sq(p.nodes[i], xi1);
                let crossed = prev.is_some_and(|q| q.im * w2.im < 0.0 && q.re < 0.0 && w2.re < 0.0);
                if !(w.re > 0.0) || crossed {
                    return Err(Error::BranchViolation { index: idx, lambda: p.nodes[i] });
                }
                prev = Some(w2);
                idx += 1;
            }
        }
        Ok(())
    }

    /// Σ w_k f(λ_k) over all nodes.
    pub fn integrate_scalar(&self, mut f: impl FnMut(Complex64) -> Complex64) -> Complex64 {
        let mut s = Complex64::new(0.0, 0.0);
        for p in &self.pieces {
            for (l, w) in p.nodes.iter().zip(&p.weights) {
                s += w * f(*l);
            }
        }
        s
    }
}

/// Sector contour λ = R + η e^{±iθ₀}, η ∈ [0, eta_max], bottom ray first.
pub fn build_sector_contour(
    r: f64,
    theta0: f64,
    eta_max: f64,
    n_per_unit: f64,
    opts: ContourOpts,
) -> Result<Contour> {
    if !(r > 0.0 && eta_max > 0.0 && n_per_unit > 0.0 && theta0 > PI / 2.0 && theta0 < PI) {
        return Err(Error::Domain(format!(
            "invalid sector parameters R={r}, theta0={theta0}, eta_max={eta_max}, n={n_per_unit}"
        )));
    }
    let d0 = 0.25 * r.min(eta_max);
    let lower = PieceSpec {
        label: PieceLabel::Sector,
        kind: PieceKind::Ray,
        side: Side::Lower,
        branch: Branch::Principal,
        path: Path::Line { start: Complex64::new(r, 0.0), dir: Complex64::from_polar(1.0, -theta0) },
        a: eta_max,
        b: 0.0,
        grade_a: None,
        grade_b: Some((0.0, d0)),
        sqrt_end: 0,
    };
    let upper = PieceSpec {
        label: PieceLabel::Sector,
        kind: PieceKind::Ray,
        side: Side::Upper,
        branch: Branch::Principal,
        path: Path::Line { start: Complex64::new(r, 0.0), dir: Complex64::from_polar(1.0, theta0) },
        a: 0.0,
        b: eta_max,
        grade_a: Some((0.0, d0)),
        grade_b: None,
        sqrt_end: 0,
    };
    Ok(Contour {
        pieces: vec![realize(lower, n_per_unit, None, &opts), realize(upper, n_per_unit, None, &opts)],
        n_per_unit,
        opts,
        recipe: Recipe::Sector { r, theta0, eta_max },
    })
}

/// Sector vertex so that the whole singular set for |ξ₁| lies to its left.
pub fn sector_vertex(xi1: f64, t: f64) -> f64 {
    let k = xi1.abs();
    let geo = if k <= 2.0 { 1.1 * 2.0 * k / 3f64.sqrt() } else { 0.0 };
    geo.max(1.0 / t)
}

/// Sector contour sized for frequency ξ₁ and time t.
pub fn sector_contour_for(xi1: f64, t: f64, n_per_unit: f64, x_scale: f64) -> Result<Contour> {
    if !(t > 0.0) {
        return Err(Error::Domain(format!("time must be positive, got {t}")));
    }
    let r = sector_vertex(xi1, t);
    let eta_max = 2.0 * (r + TAIL / t);
    let c = build_sector_contour(r, 2.0 * PI / 3.0, eta_max, n_per_unit, ContourOpts { t, x_scale })?;
    c.validate(xi1)?;
    Ok(c)
}

/// Angle of the large arcs; |π − θ₀| < π/3.
pub const THETA_LARGE: f64 = 0.7 * PI;

/// Radius R₇ of the large arcs so that |e^{λt}| < 1e-16 on them.
pub fn large_arc_radius(t: f64) -> f64 {
    TAIL / (t * THETA_LARGE.cos().abs())
}

/// Default small-circle radius.
pub fn default_eps(xi1: f64) -> f64 {
    (1e-4f64).min(xi1.abs() / 100.0)
}

/// Branch-cut wraps for ξ₁ ≠ 0, traversed in the Bromwich orientation.
///
/// For |ξ₁| ≤ 2 the pieces are Γ₁…Γ₇; for |ξ₁| > 2 they are Γ̃₁ (which also
/// carries the small circle at the origin) and Γ̃₂. `lambda_max` is the
/// radius R₇ at which the long cut and the large arcs are truncated.
pub fn build_deformed_contours(
    xi1: f64,
    eps: f64,
    lambda_max: f64,
    n_per_unit: f64,
    opts: ContourOpts,
) -> Result<Contour> {
    let k = xi1.abs();
    if k == 0.0 {
        return Err(Error::Domain("deformed contours need xi1 != 0".into()));
    }
    if !(eps > 0.0) || eps >= k {
        return Err(Error::Domain(format!("eps = {eps} must lie in (0, |xi1| = {k})")));
    }
    if !(lambda_max > 2.0 * k + 1.0) {
        return Err(Error::Domain(format!("lambda_max = {lambda_max} too small for |xi1| = {k}")));
    }
    let r7 = lambda_max;
    let neg = Path::Line { start: Complex64::new(0.0, 0.0), dir: Complex64::new(-1.0, 0.0) };
    let up = Branch::FixedNormal(I);
    let down = Branch::FixedNormal(-I);
    let small = Path::Circle { center: Complex64::new(0.0, 0.0), radius: eps };
    let mut specs = Vec::new();
    // A grading distance of TIP marks a square-root endpoint instead.
    const TIP: f64 = -1.0;
    let spec = |label, kind, side, branch, path, a, b, ga: Option<(f64, f64)>, gb: Option<(f64, f64)>| {
        let ta = ga.is_some_and(|g| g.1 == TIP);
        let tb = gb.is_some_and(|g| g.1 == TIP);
        PieceSpec {
            label,
            kind,
            side,
            branch,
            path,
            a,
            b,
            grade_a: if ta { None } else { ga },
            grade_b: if tb { None } else { gb },
            sqrt_end: if ta { 1 } else if tb { 2 } else { 0 },
        }
    };
    let tip_d = TIP;
    if k <= 2.0 {
        let big = Path::Circle { center: Complex64::new(0.0, 0.0), radius: r7 };
        let pi_c = Path::Circle { center: Complex64::new(0.0, 0.0), radius: k };
        let junc = Path::Circle { center: Complex64::new(-k, 0.0), radius: eps };
        let (lp, _) = lambda_prime_pm(k);
        let th = lp.arg();
        let delta = 2.0 * (eps / (2.0 * k)).asin();
        let gj = PI / 2.0 - delta / 2.0;
        let arcs = PI - delta - th > 2.0 * delta;
        use PieceKind::*;
        use PieceLabel::*;
        specs.push(spec(Gamma7, LargeArc, Side::Lower, Branch::Principal, big, -THETA_LARGE, -PI, None, None));
        specs.push(spec(Gamma4, CutWrap, Side::Lower, down, neg, r7, k + eps, None, Some((k, eps))));
        if arcs {
            specs.push(spec(Gamma6, SmallCircle, Side::Lower, Branch::Principal, junc, -PI, -gj, None, None));
            specs.push(spec(Gamma3, CutWrap, Side::Outer, Branch::Radial(1.0), pi_c, -(PI - delta), -th, None, Some((-th, tip_d))));
            specs.push(spec(Gamma3, CutWrap, Side::Inner, Branch::Radial(-1.0), pi_c, -th, -(PI - delta), Some((-th, tip_d)), None));
            specs.push(spec(Gamma6, SmallCircle, Side::Lower, Branch::Principal, junc, -gj, 0.0, None, None));
        } else {
            specs.push(spec(Gamma6, SmallCircle, Side::Lower, Branch::Principal, junc, -PI, 0.0, None, None));
        }
        specs.push(spec(Gamma1, CutWrap, Side::Lower, down, neg, k - eps, eps, None, Some((0.0, eps))));
        specs.push(spec(Gamma5, SmallCircle, Side::None, Branch::Principal, small, -PI, PI, None, None));
        specs.push(spec(Gamma1, CutWrap, Side::Upper, up, neg, eps, k - eps, Some((0.0, eps)), None));
        if arcs {
            specs.push(spec(Gamma6, SmallCircle, Side::Upper, Branch::Principal, junc, 0.0, gj, None, None));
            specs.push(spec(Gamma2, CutWrap, Side::Inner, Branch::Radial(-1.0), pi_c, PI - delta, th, None, Some((th, tip_d))));
            specs.push(spec(Gamma2, CutWrap, Side::Outer, Branch::Radial(1.0), pi_c, th, PI - delta, Some((th, tip_d)), None));
            specs.push(spec(Gamma6, SmallCircle, Side::Upper, Branch::Principal, junc, gj, PI, None, None));
        } else {
            specs.push(spec(Gamma6, SmallCircle, Side::Upper, Branch::Principal, junc, 0.0, PI, None, None));
        }
        specs.push(spec(Gamma4, CutWrap, Side::Upper, up, neg, k + eps, r7, Some((k, eps)), None));
        specs.push(spec(Gamma7, LargeArc, Side::Upper, Branch::Principal, big, PI, THETA_LARGE, None, None));
    } else {
        let (lp, lm) = lambda_prime_pm(k);
        let (ap, am) = (-lp.re, -lm.re);
        if eps >= ap {
            return Err(Error::Domain(format!("eps = {eps} reaches the cut endpoint at {}", lp.re)));
        }
        use PieceKind::*;
        use PieceLabel::*;
        specs.push(spec(GammaTilde2, CutWrap, Side::Lower, down, neg, r7, am, None, Some((am, tip_d))));
        specs.push(spec(GammaTilde2, CutWrap, Side::Upper, up, neg, am, r7, Some((am, tip_d)), None));
        specs.push(spec(GammaTilde1, CutWrap, Side::Lower, down, neg, ap, eps, Some((ap, tip_d)), Some((0.0, eps))));
        specs.push(spec(GammaTilde1, SmallCircle, Side::None, Branch::Principal, small, -PI, PI, None, None));
        specs.push(spec(GammaTilde1, CutWrap, Side::Upper, up, neg, eps, ap, Some((0.0, eps)), Some((ap, tip_d))));
    }
    let pieces = specs.into_iter().map(|s| realize(s, n_per_unit, Some(xi1), &opts)).collect();
    Ok(Contour {
        pieces,
        n_per_unit,
        opts,
        recipe: Recipe::Deformed { xi1, eps, r7 },
    })
}
