//! Closed-form integral identities used in deriving the density and the
//! distribution function of the sum, each paired with a quadrature route
//! in the tests.

use crate::error::{Error, Result};
use crate::specfun::hyp3f2_general;

use super::quadrature::{arc_kernel_scaled, try_integrate};

/// `sinh(a√s)/√s`, continued to `sin(a√-s)/√-s` for `s < 0`; `scale2`
/// sets the size of the window around `s = 0` handled by Taylor series.
fn sinhc(a: f64, s: f64, scale2: f64) -> f64 {
    if s.abs() < 1e-8 * scale2 {
        let u = s * a * a;
        return a * (1.0 + u / 6.0 + u * u / 120.0 + u * u * u / 5040.0);
    }
    if s > 0.0 {
        let r = s.sqrt();
        (a * r).sinh() / r
    } else {
        let r = (-s).sqrt();
        (a * r).sin() / r
    }
}

/// `∫_{-a}^{a} I₀(b √(a² − x²)) dx = (2/b) sinh(ab)`.
pub fn lemma_a1(a: f64, b: f64) -> f64 {
    2.0 * (a * b).sinh() / b
}

/// Fourier transform `∫_{-a}^{a} e^{iξx} I₀(b √(a² − x²)) dx`.
pub fn lemma_a2_transform(a: f64, b: f64, xi: f64) -> f64 {
    2.0 * sinhc(a, b * b - xi * xi, b * b)
}

/// Both sides of the transform identity for the arc kernel:
/// `lhs = [sinh(q√(p²−ξ²))/√(p²−ξ²)]²` and
/// `rhs = ∫_{-2q}^{2q} e^{iξx} · ¼ ∫_{|x|}^{2q} I₀(p √(τ² − x²)) dτ dx`
/// by nested quadrature.
pub fn lemma_a3_check(p: f64, q: f64, xi: f64) -> Result<(f64, f64)> {
    if !(p > 0.0 && q > 0.0) {
        return Err(Error::Domain(format!("need p, q > 0, got p={p}, q={q}")));
    }
    let lhs = sinhc(q, p * p - xi * xi, p * p).powi(2);
    let half = try_integrate(
        |x| Ok((xi * x).cos() * 0.25 * arc_kernel_scaled(p, x, 2.0 * q, 0.0)?),
        0.0,
        2.0 * q,
        1e-11 * (1.0 + lhs),
    )?;
    Ok((lhs, 2.0 * half.value))
}

/// Antiderivative in `z` of `zⁿ ₂F₁(−k, ½; 3/2; x²/z²)`:
/// `z^{n+1}/(n+1) · ₃F₂(−k, −n/2−½, ½; −n/2+½, 3/2; x²/z²)`.
pub fn lemma_a4_antiderivative(n: u32, k: u32, x: f64, z: f64) -> Result<f64> {
    if n < 2 * k {
        return Err(Error::Domain(format!("need n >= 2k, got n={n}, k={k}")));
    }
    if z == 0.0 || !z.is_finite() {
        return Err(Error::Domain(format!("need finite z != 0, got {z}")));
    }
    let nf = f64::from(n);
    let w = (x / z) * (x / z);
    let f = hyp3f2_general(k, -nf / 2.0 - 0.5, 0.5, -nf / 2.0 + 0.5, 1.5, w)?;
    Ok(z.powi(n as i32 + 1) / (nf + 1.0) * f)
}
