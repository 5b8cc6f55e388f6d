//! Globally adaptive 21-point Gauss–Kronrod quadrature.

use std::cmp::Ordering;
use std::collections::BinaryHeap;
use std::ops::{Add, Mul};

use crate::error::{check_time, Error, Result};
use crate::par::compensated_sum;
use crate::specfun::i0_scaled;
use crate::telegraph::TelegraphParams;

// Kronrod abscissae on [0, 1]; the odd entries are the 10-point Gauss nodes.
const XGK: [f64; 11] = [
    0.995_657_163_025_808_080_735_527_280_689_003,
    0.973_906_528_517_171_720_077_964_012_084_452,
    0.930_157_491_355_708_226_001_207_180_059_508,
    0.865_063_366_688_984_510_732_096_688_423_493,
    0.780_817_726_586_416_897_063_717_578_345_042,
    0.679_409_568_299_024_406_234_327_365_114_874,
    0.562_757_134_668_604_683_339_000_099_272_694,
    0.433_395_394_129_247_190_799_265_943_165_784,
    0.294_392_862_701_460_198_131_126_603_103_866,
    0.148_874_338_981_631_210_884_826_001_129_720,
    0.0,
];

const WGK: [f64; 11] = [
    0.011_694_638_867_371_874_278_064_396_062_192,
    0.032_558_162_307_964_727_478_818_972_459_390,
    0.054_755_896_574_351_996_031_381_300_244_580,
    0.075_039_674_810_919_952_767_043_140_916_190,
    0.093_125_454_583_697_605_535_065_465_083_366,
    0.109_387_158_802_297_641_899_210_590_325_805,
    0.123_491_976_262_065_851_077_958_109_831_074,
    0.134_709_217_311_473_325_928_054_001_771_707,
    0.142_775_938_577_060_080_797_094_273_138_717,
    0.147_739_104_901_338_491_374_841_515_972_068,
    0.149_445_554_002_916_905_664_936_468_389_821,
];

const WG: [f64; 5] = [
    0.066_671_344_308_688_137_593_568_809_893_332,
    0.149_451_349_150_580_593_145_776_339_657_697,
    0.219_086_362_515_982_043_995_534_934_228_163,
    0.269_266_719_309_996_355_091_226_921_569_469,
    0.295_524_224_714_752_870_173_892_994_651_338,
];

const DEFAULT_MAX_PANELS: usize = 4000;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadratureResult {
    pub value: f64,
    pub abs_error_estimate: f64,
    pub panels_used: usize,
}

struct Panel {
    a: f64,
    b: f64,
    value: f64,
    err: f64,
}

impl PartialEq for Panel {
    fn eq(&self, other: &Self) -> bool {
        self.err == other.err
    }
}
impl Eq for Panel {}
impl PartialOrd for Panel {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Panel {
    fn cmp(&self, other: &Self) -> Ordering {
        self.err.total_cmp(&other.err)
    }
}

/// One GK21 panel with the QUADPACK error heuristic.
fn gk21<F>(f: &F, a: f64, b: f64) -> Result<Panel>
where
    F: Fn(f64) -> Result<f64>,
{
    let centre = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(centre)?;
    let mut resk = fc * WGK[10];
    let mut resg = 0.0;
    let mut resabs = (fc * WGK[10]).abs();
    let mut fv = [(0.0, 0.0); 10];
    for j in 0..10 {
        let dx = half * XGK[j];
        let f1 = f(centre - dx)?;
        let f2 = f(centre + dx)?;
        fv[j] = (f1, f2);
        resk += WGK[j] * (f1 + f2);
        resabs += WGK[j] * (f1.abs() + f2.abs());
        if j % 2 == 1 {
            resg += WG[j / 2] * (f1 + f2);
        }
    }
    let mean = 0.5 * resk;
    let mut resasc = WGK[10] * (fc - mean).abs();
    for j in 0..10 {
        resasc += WGK[j] * ((fv[j].0 - mean).abs() + (fv[j].1 - mean).abs());
    }
    let (resk, resabs, resasc) = (resk * half, resabs * half.abs(), resasc * half.abs());
    let mut err = (resk - resg * half).abs();
    if resasc != 0.0 && err != 0.0 {
        err = resasc * (200.0 * err / resasc).powf(1.5).min(1.0);
    }
    if resabs > f64::MIN_POSITIVE / (50.0 * f64::EPSILON) {
        err = err.max(50.0 * f64::EPSILON * resabs);
    }
    if !resk.is_finite() {
        return Err(Error::Domain(format!("integrand not finite on [{a}, {b}]")));
    }
    Ok(Panel {
        a,
        b,
        value: resk,
        err,
    })
}

/// Fixed 21-point Kronrod rule on `[a, b]` for any vector-like integrand.
pub(crate) fn kronrod21<T, F>(f: &F, a: f64, b: f64) -> T
where
    T: Copy + Add<Output = T> + Mul<f64, Output = T>,
    F: Fn(f64) -> T,
{
    let centre = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let mut acc = f(centre) * WGK[10];
    for j in 0..10 {
        let dx = half * XGK[j];
        acc = acc + (f(centre - dx) + f(centre + dx)) * WGK[j];
    }
    acc * half
}

/// Adaptive integration of a fallible integrand to absolute tolerance
/// `abs_tol`, bisecting the panel with the largest error estimate.
pub fn try_integrate<F>(f: F, a: f64, b: f64, abs_tol: f64) -> Result<QuadratureResult>
where
    F: Fn(f64) -> Result<f64>,
{
    try_integrate_capped(f, a, b, abs_tol, DEFAULT_MAX_PANELS)
}

pub(crate) fn try_integrate_capped<F>(
    f: F,
    a: f64,
    b: f64,
    abs_tol: f64,
    max_panels: usize,
) -> Result<QuadratureResult>
where
    F: Fn(f64) -> Result<f64>,
{
    if !(a <= b) || !a.is_finite() || !b.is_finite() {
        return Err(Error::Domain(format!(
            "integration limits must satisfy a <= b, got [{a}, {b}]"
        )));
    }
    if !(abs_tol > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "abs_tol must be > 0, got {abs_tol}"
        )));
    }
    if a == b {
        return Ok(QuadratureResult {
            value: 0.0,
            abs_error_estimate: 0.0,
            panels_used: 0,
        });
    }
    let mut heap = BinaryHeap::new();
    let first = gk21(&f, a, b)?;
    let mut total_err = first.err;
    heap.push(first);
    loop {
        if total_err <= abs_tol {
            break;
        }
        if heap.len() >= max_panels {
            return Err(Error::Quadrature {
                achieved: total_err,
                requested: abs_tol,
                panels: heap.len(),
            });
        }
        let worst = heap.pop().expect("heap is never empty");
        let mid = 0.5 * (worst.a + worst.b);
        if !(worst.a < mid && mid < worst.b) {
            // interval exhausted at machine resolution
            heap.push(worst);
            return Err(Error::Quadrature {
                achieved: total_err,
                requested: abs_tol,
                panels: heap.len(),
            });
        }
        let left = gk21(&f, worst.a, mid)?;
        let right = gk21(&f, mid, worst.b)?;
        total_err += left.err + right.err - worst.err;
        heap.push(left);
        heap.push(right);
        if heap.len() % 64 == 0 {
            // resum to keep the running total from drifting
            total_err = heap.iter().map(|p| p.err).sum();
        }
    }
    let mut panels = heap.into_vec();
    panels.sort_by(|p, q| p.a.total_cmp(&q.a));
    let err = panels.iter().map(|p| p.err).sum();
    Ok(QuadratureResult {
        value: compensated_sum(panels.iter().map(|p| p.value)),
        abs_error_estimate: err,
        panels_used: panels.len(),
    })
}

/// Adaptive integration of an infallible integrand.
pub fn integrate<F>(f: F, a: f64, b: f64, abs_tol: f64) -> Result<QuadratureResult>
where
    F: Fn(f64) -> f64,
{
    try_integrate(|x| Ok(f(x)), a, b, abs_tol)
}

/// `e^{-shift} ∫_{|x|}^{upper} I₀(p √(τ² − x²)) dτ` with relative accuracy
/// about `1e-12`.
pub(crate) fn arc_kernel_scaled(p: f64, x: f64, upper: f64, shift: f64) -> Result<f64> {
    let ax = x.abs();
    if ax > upper {
        return Err(Error::Domain(format!(
            "|x| = {ax} exceeds the upper limit {upper}"
        )));
    }
    if ax == upper {
        return Ok(0.0);
    }
    let integrand = |tau: f64| {
        let z = p * ((tau - ax) * (tau + ax)).max(0.0).sqrt();
        Ok((z - shift).exp() * i0_scaled(z))
    };
    let rough = gk21(&integrand, ax, upper)?.value.abs();
    let r = try_integrate(integrand, ax, upper, 1e-12 * (1.0 + rough))?;
    Ok(r.value)
}

/// `∫_{|x|}^{2ct} I₀((λ/c) √(τ² − x²)) dτ`, the arc integral in the density of the sum.
pub fn arc_integral(p: &TelegraphParams, x: f64, t: f64) -> Result<f64> {
    check_time(t)?;
    arc_kernel_scaled(p.lambda() / p.c(), x, 2.0 * p.c() * t, 0.0)
}

/// `e^{-2λt}` times [`arc_integral`]; stays finite for large `λt`.
pub fn arc_integral_scaled(p: &TelegraphParams, x: f64, t: f64) -> Result<f64> {
    check_time(t)?;
    arc_kernel_scaled(p.lambda() / p.c(), x, 2.0 * p.c() * t, 2.0 * p.lambda() * t)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::specfun::bessel_i0;
    use std::f64::consts::PI;

    #[test]
    fn gauss_weights_sum_to_two() {
        assert!((2.0 * WG.iter().sum::<f64>() - 2.0).abs() < 1e-15);
        let k: f64 = 2.0 * WGK[..10].iter().sum::<f64>() + WGK[10];
        assert!((k - 2.0).abs() < 1e-15);
    }

    #[test]
    fn simple_integrals() {
        let r = integrate(|_| 1.0, 0.0, 1.0, 1e-13).unwrap();
        assert!((r.value - 1.0).abs() < 1e-15);
        let r = integrate(f64::sin, 0.0, PI, 1e-12).unwrap();
        assert!((r.value - 2.0).abs() < 1e-12);
        assert!(r.abs_error_estimate >= 0.0);
        assert_eq!(integrate(f64::sin, 1.0, 1.0, 1e-12).unwrap().value, 0.0);
    }

    #[test]
    fn kink_and_peak_need_bisection() {
        let r = integrate(|x: f64| x.abs().sqrt(), -1.0, 1.0, 1e-10).unwrap();
        assert!((r.value - 4.0 / 3.0).abs() < 1e-10);
        assert!(r.panels_used > 1);
    }

    #[test]
    fn failure_is_reported() {
        let e = try_integrate_capped(|x: f64| Ok(x.abs().sqrt()), -1.0, 1.0, 1e-15, 4).unwrap_err();
        assert!(matches!(e, Error::Quadrature { panels: 4, .. }));
        assert!(integrate(|x| x, 1.0, 0.0, 1e-8).is_err());
        assert!(integrate(|x| x, 0.0, 1.0, 0.0).is_err());
        assert!(integrate(|x| 1.0 / x, 0.0, 1.0, 1e-8).is_err());
    }

    #[test]
    fn lemma_a1_by_quadrature() {
        let (a, b) = (1.0f64, 1.0f64);
        let r = integrate(
            |x| bessel_i0(b * (a * a - x * x).max(0.0).sqrt()).unwrap(),
            -a,
            a,
            1e-13,
        )
        .unwrap();
        assert!((r.value - 2.0 * (1.0f64).sinh()).abs() < 1e-12);
    }

    #[test]
    fn arc_at_endpoint_and_origin() {
        let p = TelegraphParams::new(1.0, 1.0).unwrap();
        assert_eq!(arc_integral(&p, 2.0, 1.0).unwrap(), 0.0);
        assert_eq!(arc_integral(&p, -2.0, 1.0).unwrap(), 0.0);
        assert!(arc_integral(&p, 2.5, 1.0).is_err());
        // x = 0: (c/λ) ∫₀^{2λt} I₀(u) du, integrated term by term:
        // ∫₀^U I₀ = Σ U^{2k+1} / (4^k (k!)² (2k+1))
        let u: f64 = 2.0;
        let mut term = u;
        let mut s = 0.0;
        for k in 0..40 {
            s += term / (2 * k + 1) as f64;
            term *= u * u / (4.0 * ((k + 1) * (k + 1)) as f64);
        }
        assert!((arc_integral(&p, 0.0, 1.0).unwrap() - s).abs() < 1e-12 * s);
        let p2 = TelegraphParams::new(2.0, 0.5).unwrap();
        let v = arc_integral(&p2, 0.0, 2.0).unwrap();
        assert!((v - 4.0 * s).abs() < 1e-11 * v);
    }

    #[test]
    fn arc_double_integral_identity() {
        let p = TelegraphParams::new(1.0, 1.0).unwrap();
        let t = 1.0;
        let inner = |x: f64| arc_integral(&p, x, t);
        let left = try_integrate(inner, -2.0, 0.0, 1e-12).unwrap().value;
        let right = try_integrate(inner, 0.0, 2.0, 1e-12).unwrap().value;
        let expect = 2.0 * ((2.0f64).cosh() - 1.0);
        assert!(((left + right) - expect).abs() < 1e-9 * expect);
    }

    #[test]
    fn arc_scaled_matches_plain() {
        let p = TelegraphParams::new(1.5, 0.9).unwrap();
        let t = 1.2;
        for x in [0.0, 0.7, -2.1, 3.5] {
            let a = arc_integral(&p, x, t).unwrap();
            let s = arc_integral_scaled(&p, x, t).unwrap();
            assert!((s - (-2.0 * 0.9 * t).exp() * a).abs() < 1e-13 * (1.0 + a));
        }
        let big = TelegraphParams::new(1.0, 500.0).unwrap();
        assert!(arc_integral_scaled(&big, 0.3, 1.0).unwrap().is_finite());
    }
}
