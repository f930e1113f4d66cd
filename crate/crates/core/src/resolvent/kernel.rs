//! Exponential kernels on the half line, integrated exactly against the
//! piecewise-linear interpolant of the data.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::spectral::ModeProfile;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);

/// φ₀(z) = (1 − e^{−z})/z and φ₁(z) = (1 − e^{−z} − z e^{−z})/z², given e^{−z}.
#[inline]
pub(crate) fn phi01(z: Complex64, emz: Complex64) -> (Complex64, Complex64) {
    if z.norm() < 0.1 {
        // Σ (−z)^n/(n+1)! and Σ (−z)^n/(n!(n+2))
        let mut term = ONE; // (−z)^n / n!
        let mut p0 = ZERO;
        let mut p1 = ZERO;
        for n in 0..14 {
            let nf = n as f64;
            p0 += term / (nf + 1.0);
            p1 += term / (nf + 2.0);
            term *= -z / (nf + 1.0);
        }
        (p0, p1)
    } else {
        let p0 = (ONE - emz) / z;
        let p1 = (ONE - emz - z * emz) / (z * z);
        (p0, p1)
    }
}

/// φ₀ alone, stable for all z.
#[inline]
pub(crate) fn phi0(z: Complex64) -> Complex64 {
    if z.norm() < 0.1 {
        let mut term = ONE;
        let mut p0 = ZERO;
        for n in 0..14 {
            let nf = n as f64;
            p0 += term / (nf + 1.0);
            term *= -z / (nf + 1.0);
        }
        p0
    } else {
        (ONE - (-z).exp()) / z
    }
}

/// Left and right exponential moments at every node,
/// L_i = ∫₀^{x_i} e^{−κ(x_i−y)} f dy and R_i = ∫_{x_i}^{L} e^{−κ(y−x_i)} f dy,
/// for several profiles at once. Also returns e^{−κ x_i}.
///
/// Requires Re κ ≥ 0 (boundary values on the cuts are allowed).
pub(crate) struct Moments {
    pub left: Vec<Vec<Complex64>>,
    pub right: Vec<Vec<Complex64>>,
    pub decay: Vec<Complex64>,
}

pub(crate) fn moments(kappa: Complex64, x: &[f64], fs: &[&[Complex64]]) -> Moments {
    let n = x.len();
    let m = fs.len();
    let mut left = vec![vec![ZERO; n]; m];
    let mut right = vec![vec![ZERO; n]; m];
    let mut decay = vec![ZERO; n];
    let mut em = vec![ZERO; n - 1];
    let mut c0 = vec![ZERO; n - 1]; // weight of the near endpoint
    let mut c1 = vec![ZERO; n - 1]; // weight of the far endpoint
    decay[0] = ONE;
    for j in 0..n - 1 {
        let h = x[j + 1] - x[j];
        let z = kappa * h;
        let e = (-z).exp();
        let (p0, p1) = phi01(z, e);
        em[j] = e;
        c0[j] = (p0 - p1) * h;
        c1[j] = p1 * h;
        decay[j + 1] = decay[j] * e;
    }
    for (k, f) in fs.iter().enumerate() {
        let l = &mut left[k];
        for j in 0..n - 1 {
            // near endpoint for the left integral is x_{j+1}
            l[j + 1] = em[j] * l[j] + f[j] * c1[j] + f[j + 1] * c0[j];
        }
        let r = &mut right[k];
        for j in (0..n - 1).rev() {
            r[j] = em[j] * r[j + 1] + f[j] * c0[j] + f[j + 1] * c1[j];
        }
    }
    Moments { left, right, decay }
}

fn check_kappa(kappa: Complex64) -> Result<()> {
    if !(kappa.re > 0.0) || !kappa.is_finite() {
        return Err(Error::Domain(format!("kernel needs Re kappa > 0, got {kappa}")));
    }
    Ok(())
}

fn check_len(f: &ModeProfile, x2: &[f64]) -> Result<()> {
    if f.values.len() != x2.len() {
        return Err(Error::ShapeMismatch { expected: x2.len(), got: f.values.len() });
    }
    if x2.len() < 2 {
        return Err(Error::Domain("kernel needs at least two nodes".into()));
    }
    Ok(())
}

/// E_κ[f](x) = (1/2κ) ∫₀^∞ e^{−κ|x−y|} f(y) dy on the nodes `x2`.
pub fn e_kernel_apply(kappa: Complex64, f: &ModeProfile, x2: &[f64]) -> Result<ModeProfile> {
    check_kappa(kappa)?;
    check_len(f, x2)?;
    let m = moments(kappa, x2, &[&f.values]);
    let inv = 1.0 / (2.0 * kappa);
    let v = m.left[0].iter().zip(&m.right[0]).map(|(l, r)| (l + r) * inv).collect();
    Ok(ModeProfile::new(f.xi1, v))
}

/// ∂₂E_κ[f] evaluated exactly from the same moments.
pub fn e_kernel_apply_d2(kappa: Complex64, f: &ModeProfile, x2: &[f64]) -> Result<ModeProfile> {
    check_kappa(kappa)?;
    check_len(f, x2)?;
    let m = moments(kappa, x2, &[&f.values]);
    let v = m.left[0].iter().zip(&m.right[0]).map(|(l, r)| (r - l) * 0.5).collect();
    Ok(ModeProfile::new(f.xi1, v))
}

/// E_κ[f]₀ = (1/2κ) ∫₀^∞ e^{−κy} f dy.
pub fn e_kernel_trace(kappa: Complex64, f: &ModeProfile, x2: &[f64]) -> Result<Complex64> {
    check_kappa(kappa)?;
    check_len(f, x2)?;
    let m = moments(kappa, x2, &[&f.values]);
    Ok(m.right[0][0] / (2.0 * kappa))
}

/// K(x) = (e^{−|ξ₁|x} − e^{−ωx})/(ω − |ξ₁|), with the series limit near ω = |ξ₁|.
#[inline]
pub fn k_profile(omega: Complex64, xi1: f64, x: f64, e_k: f64, e_w: Complex64) -> Complex64 {
    let d = omega - xi1.abs();
    let z = d * x;
    if z.norm() < 0.1 {
        e_k * x * phi0(z)
    } else {
        (e_k - e_w) / d
    }
}

/// Closed form of E_ω[e^{−|ξ₁|·}](x₂).
pub fn e_kernel_exp(omega: Complex64, xi1: f64, x2: f64) -> Complex64 {
    let k = xi1.abs();
    let ek = (-k * x2).exp();
    let ew = (-omega * x2).exp();
    (k_profile(omega, xi1, x2, ek, ew) + ek / (omega + k)) / (2.0 * omega)
}

/// Ratio E_ω[e^{−|ξ₁|·}](x₂)/E_ω[e^{−|ξ₁|·}]₀ and the combination
/// ratio − e^{−ωx₂} = 2ω(ω+|ξ₁|)/(… ) form, both on the principal branch.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KernelRatio {
    pub ratio: Complex64,
    pub combination: Complex64,
}

pub fn kernel_ratio(lambda: Complex64, xi1: f64, x2: f64) -> Result<KernelRatio> {
    let omega = crate::dispersion::omega(lambda, xi1)?;
    Ok(kernel_ratio_with_omega(omega, xi1, x2))
}

/// As [`kernel_ratio`] with an explicitly chosen branch value ω.
pub fn kernel_ratio_with_omega(omega: Complex64, xi1: f64, x2: f64) -> KernelRatio {
    let k = xi1.abs();
    let ek = (-k * x2).exp();
    let ew = (-omega * x2).exp();
    let kk = k_profile(omega, xi1, x2, ek, ew);
    let ratio = (omega + k) * kk + ek;
    KernelRatio { ratio, combination: 2.0 * omega * kk }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::{Diff2, GridSpec};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn phi_series_and_closed_form_agree() {
        for z in [c(0.099, 0.0), c(0.05, 0.08), c(0.0, 0.0999)] {
            let (a0, a1) = phi01(z, (-z).exp());
            let zz = z * 1.0000001;
            let e = (-zz).exp();
            let (b0, b1) = ((ONE - e) / zz, (ONE - e - zz * e) / (zz * zz));
            assert!((a0 - b0).norm() < 1e-6 && (a1 - b1).norm() < 1e-6);
        }
        let (p0, p1) = phi01(ZERO, ONE);
        assert_eq!((p0, p1), (ONE, c(0.5, 0.0)));
    }

    #[test]
    fn exponential_data_matches_closed_form() {
        let xi1 = 0.8;
        let spec = GridSpec::new(1.0, 4, 40.0 / xi1, (1 << 17) + 1, 0.0);
        let x = spec.x2_nodes();
        let f = ModeProfile::new(xi1, x.iter().map(|t| c((-xi1 * t).exp(), 0.0)).collect());
        for w in [c(1.3, 0.4), c(0.8, 0.0), c(0.81, -0.2), c(3.0, 2.0)] {
            let e = e_kernel_apply(w, &f, &x).unwrap();
            for (i, xv) in x.iter().enumerate().step_by(997) {
                let exact = e_kernel_exp(w, xi1, *xv);
                assert!((e.values[i] - exact).norm() < 1e-8, "w {w} x {xv}");
            }
        }
    }

    #[test]
    fn trace_and_zero_examples() {
        let x = GridSpec::new(1.0, 4, 60.0, 60001, 0.0).x2_nodes();
        let f = ModeProfile::new(1.0, x.iter().map(|t| c((-t).exp(), 0.0)).collect());
        let t = e_kernel_trace(ONE, &f, &x).unwrap();
        assert!((t - 0.25).norm() < 1e-7);
        let z = ModeProfile::zeros(1.0, x.len());
        assert_eq!(e_kernel_trace(ONE, &z, &x).unwrap(), ZERO);
        assert!(e_kernel_apply(c(0.0, 1.0), &f, &x).is_err());
        assert!(e_kernel_apply(c(-1.0, 0.0), &f, &x).is_err());
    }

    fn ode_residual(n: usize) -> f64 {
        let x = GridSpec::new(1.0, 4, 10.0, n, 1.0).x2_nodes();
        let d = Diff2::new(&x);
        let f = ModeProfile::new(1.0, x.iter().map(|t| c(t * (-t).exp() * (1.0 + t.sin()), 0.3 * (-t * t).exp())).collect());
        let k = c(1.2, 0.7);
        let e = e_kernel_apply(k, &f, &x).unwrap();
        let dd = d.derivative(&e.values, 2).unwrap();
        let mut num = 0.0;
        let mut den = 0.0;
        for i in 1..n - 1 {
            num += (k * k * e.values[i] - dd[i] - f.values[i]).norm_sqr();
            den += f.values[i].norm_sqr();
        }
        (num / den).sqrt()
    }

    #[test]
    fn ode_residual_converges() {
        let (a, b) = (ode_residual(257), ode_residual(513));
        assert!(b < 5e-3 && b < a / 3.0, "{a} {b}");
    }

    #[test]
    fn trace_identity_on_random_data() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let x = GridSpec::new(1.0, 4, 8.0, 2001, 0.0).x2_nodes();
        for _ in 0..20 {
            let k = c(rng.gen_range(0.2..3.0), rng.gen_range(-3.0..3.0));
            for _ in 0..5 {
                let a: Vec<f64> = (0..4).map(|_| rng.gen_range(-1.0..1.0)).collect();
                let f = ModeProfile::new(
                    0.0,
                    x.iter()
                        .map(|t| c(a[0] + a[1] * t, a[2] + a[3] * t.cos()) * (-t * t / 4.0).exp())
                        .collect(),
                );
                let e = e_kernel_apply(k, &f, &x).unwrap();
                let de = e_kernel_apply_d2(k, &f, &x).unwrap();
                let tr = e_kernel_trace(k, &f, &x).unwrap();
                // one-sided fourth-order difference at the wall as the oracle
                let h = x[1] - x[0];
                let fd = (-25.0 * e.values[0] + 48.0 * e.values[1] - 36.0 * e.values[2]
                    + 16.0 * e.values[3]
                    - 3.0 * e.values[4])
                    / (12.0 * h);
                assert!((de.values[0] - k * tr).norm() < 1e-12 * (1.0 + tr.norm()));
                assert!((fd - k * tr).norm() < 1e-6 * (k * tr).norm().max(1e-3), "{fd} {}", k * tr);
            }
        }
    }

    #[test]
    fn closed_form_examples() {
        let w = c(1.7, 0.3);
        assert!((e_kernel_exp(w, 1.0, 0.0) - 1.0 / (2.0 * w * (w + 1.0))).norm() < 1e-15);
        let k = 1.3f64;
        let x = 0.7f64;
        let lim = (x * (-k * x).exp() + (-k * x).exp() / (2.0 * k)) / (2.0 * k);
        assert!((e_kernel_exp(c(k, 0.0), k, x) - lim).norm() < 1e-15);
        assert!((e_kernel_exp(c(k + 1e-9, 1e-9), k, x) - lim).norm() < 1e-8);
    }

    #[test]
    fn ratio_matches_quotient_and_cancels_residues() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..200 {
            let lam = c(rng.gen_range(0.1..4.0), rng.gen_range(-4.0..4.0));
            let xi1 = rng.gen_range(0.1..3.0);
            let x = rng.gen_range(0.0..5.0);
            let r = kernel_ratio(lam, xi1, x).unwrap();
            let w = crate::dispersion::omega(lam, xi1).unwrap();
            let q = e_kernel_exp(w, xi1, x) / e_kernel_exp(w, xi1, 0.0);
            assert!((r.ratio - q).norm() < 1e-10 * q.norm().max(1e-300));
            let k2 = xi1 * xi1;
            let closed = 2.0 * w * lam * (w + xi1) / (lam * lam + k2) * ((-xi1 * x).exp() - (-w * x).exp());
            assert!((r.combination - closed).norm() < 1e-9 * (1.0 + closed.norm()));
            assert!((r.combination - (r.ratio - (-w * x).exp())).norm() < 1e-12 * (1.0 + r.ratio.norm()));
        }
        assert!((kernel_ratio(c(0.5, 0.5), 1.0, 0.0).unwrap().ratio - 1.0).norm() < 1e-15);
        // λ = ±i|ξ₁|: under Re ω ≥ 0 ω = |ξ₁| and the exponential difference vanishes;
        // with the alternative assignment ω = −|ξ₁| at −i|ξ₁| the prefactor ω+|ξ₁| vanishes.
        for xi1 in [0.5, 1.0, 3.0] {
            for s in [1.0, -1.0] {
                let lam = c(0.0, s * xi1);
                let w = crate::dispersion::omega(lam, xi1).unwrap();
                assert!((w - xi1).norm() < 1e-14);
                for x in [0.0, 0.3, 1.0, 5.0] {
                    let diff = (-xi1 * x).exp() - (-w * x).exp();
                    assert!(diff.norm() < 1e-10);
                    let rr = kernel_ratio(lam, xi1, x).unwrap();
                    assert!(rr.combination.is_finite());
                }
            }
            let w_alt = c(-xi1, 0.0);
            for x in [0.0, 0.3, 1.0, 5.0f64] {
                let factor = (w_alt + xi1) * ((-xi1 * x).exp() - (-w_alt * x).exp());
                assert!(factor.norm() < 1e-10);
            }
        }
    }
}
