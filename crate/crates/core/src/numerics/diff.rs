//! Seven-point centered finite differences and the time-domain residuals
//! of the Fourier-side equations satisfied by the sum.

use crate::error::{Error, Result};
use crate::sumdist::{sum_charfn, w_hat};
use crate::telegraph::TelegraphParams;

const D1: [f64; 7] = [
    -1.0 / 60.0,
    3.0 / 20.0,
    -3.0 / 4.0,
    0.0,
    3.0 / 4.0,
    -3.0 / 20.0,
    1.0 / 60.0,
];
const D2: [f64; 7] = [
    1.0 / 90.0,
    -3.0 / 20.0,
    3.0 / 2.0,
    -49.0 / 18.0,
    3.0 / 2.0,
    -3.0 / 20.0,
    1.0 / 90.0,
];
const D3: [f64; 7] = [
    1.0 / 8.0,
    -1.0,
    13.0 / 8.0,
    0.0,
    -13.0 / 8.0,
    1.0,
    -1.0 / 8.0,
];

/// Derivative of order 1, 2 or 3 of `f` at `x` from the stencil
/// `x + jh`, `j = -3..=3`.
///
/// Samples are combined in symmetric pairs, `f(x+jh) ∓ f(x−jh)`, and the
/// even stencil is applied to differences from `f(x)`, so a constant `f`
/// gives exactly zero.
pub fn central_diff<F: Fn(f64) -> f64>(f: F, x: f64, h: f64, order: u32) -> Result<f64> {
    if !(h > 0.0 && h.is_finite()) {
        return Err(Error::InvalidParameter(format!(
            "step must be > 0, got {h}"
        )));
    }
    let w = match order {
        1 => &D1,
        2 => &D2,
        3 => &D3,
        _ => {
            return Err(Error::InvalidParameter(format!(
                "derivative order {order} not in 1..=3"
            )))
        }
    };
    let f0 = f(x);
    let s: f64 = (1..=3)
        .map(|j| {
            let (fp, fm) = (f(x + j as f64 * h), f(x - j as f64 * h));
            if order == 2 {
                w[3 + j] * ((fp - f0) + (fm - f0))
            } else {
                w[3 + j] * (fp - fm)
            }
        })
        .sum();
    Ok(s / h.powi(order as i32))
}

fn check_step(t: f64, h: f64) -> Result<()> {
    if !(h > 0.0) || !(t > 3.0 * h) || !t.is_finite() {
        return Err(Error::Domain(format!(
            "need t > 3h > 0 for the 7-point stencil, got t={t}, h={h}"
        )));
    }
    Ok(())
}

/// `|(∂_t + 2λ)(∂_t² + 4λ∂_t + 4c²ξ²)Ψ|` at `t`, divided by
/// `max(1, |Ψ|λ³)`. Zero up to differencing error when `Ψ` is the
/// characteristic function of the sum.
pub fn pde_residual_order3(p: &TelegraphParams, xi: f64, t: f64, h: f64) -> Result<f64> {
    check_step(t, h)?;
    let (c, l) = (p.c(), p.lambda());
    let psi = |s: f64| sum_charfn(p, xi, s);
    let d1 = central_diff(psi, t, h, 1)?;
    let d2 = central_diff(psi, t, h, 2)?;
    let d3 = central_diff(psi, t, h, 3)?;
    let v = psi(t);
    let k2 = 4.0 * c * c * xi * xi;
    let r = d3 + 6.0 * l * d2 + (k2 + 8.0 * l * l) * d1 + 2.0 * l * k2 * v;
    Ok(r.abs() / (v.abs() * l.powi(3)).max(1.0))
}

/// `|∂_t² ŵ − 4(λ² − c²ξ²) ŵ|` at `t`, divided by `max(1, |ŵ|λ²)`.
pub fn theorem2_residual(p: &TelegraphParams, xi: f64, t: f64, h: f64) -> Result<f64> {
    check_step(t, h)?;
    let (c, l) = (p.c(), p.lambda());
    let w = |s: f64| w_hat(p, xi, s);
    let d2 = central_diff(w, t, h, 2)?;
    let v = w(t);
    let r = d2 - 4.0 * (l * l - c * c * xi * xi) * v;
    Ok(r.abs() / (v.abs() * l * l).max(1.0))
}
