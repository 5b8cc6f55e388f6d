//! Special functions: modified Bessel `I₀`, `I₁` (plain and exponentially
//! scaled), Pochhammer symbols, double factorials, and the terminating
//! hypergeometric sums that appear in the distribution functions.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::par::CompensatedSum;

/// Truncation policy shared by every infinite series in the crate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SeriesControl {
    rel_tol: f64,
    max_terms: usize,
}

impl Default for SeriesControl {
    fn default() -> Self {
        SeriesControl {
            rel_tol: 1e-14,
            max_terms: 500,
        }
    }
}

impl SeriesControl {
    pub fn new(rel_tol: f64, max_terms: usize) -> Result<Self> {
        if !(rel_tol > 0.0 && rel_tol.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "rel_tol must be > 0, got {rel_tol}"
            )));
        }
        if max_terms == 0 {
            return Err(Error::InvalidParameter("max_terms must be >= 1".into()));
        }
        Ok(SeriesControl { rel_tol, max_terms })
    }

    pub fn rel_tol(&self) -> f64 {
        self.rel_tol
    }

    pub fn max_terms(&self) -> usize {
        self.max_terms
    }

    pub fn with_max_terms(self, max_terms: usize) -> Result<Self> {
        Self::new(self.rel_tol, max_terms)
    }
}

// Power series below this argument, scaled asymptotic expansion above.
const BESSEL_SERIES_LIMIT: f64 = 30.0;

fn check_bessel_arg(z: f64) -> Result<()> {
    if z.is_finite() && z >= 0.0 {
        Ok(())
    } else {
        Err(Error::Domain(format!(
            "Bessel argument must be finite and >= 0, got {z}"
        )))
    }
}

/// `Σ (z/2)^{2k+ν} / (k! (k+ν)!)` for ν ∈ {0, 1}.
fn bessel_series(nu: u32, z: f64) -> f64 {
    let q = 0.25 * z * z;
    let mut term = if nu == 0 { 1.0 } else { 0.5 * z };
    let mut acc = CompensatedSum::default();
    for k in 0..500u32 {
        acc.add(term);
        let kf = f64::from(k + 1);
        term *= q / (kf * (kf + f64::from(nu)));
        if term <= 1e-17 * acc.value() {
            break;
        }
    }
    acc.value()
}

/// Hankel expansion of `e^{-z} I_ν(z)`, valid for large `z`.
fn bessel_asymptotic_scaled(nu: u32, z: f64) -> f64 {
    let mu = 4.0 * f64::from(nu * nu);
    let mut term = 1.0;
    let mut acc = CompensatedSum::default();
    acc.add(term);
    for k in 1..200u32 {
        let odd = f64::from(2 * k - 1);
        let next = term * (odd * odd - mu) / (8.0 * f64::from(k) * z);
        if next.abs() >= term.abs() {
            break;
        }
        term = next;
        acc.add(term);
        if term.abs() <= 1e-17 * acc.value().abs() {
            break;
        }
    }
    acc.value() / (2.0 * PI * z).sqrt()
}

pub(crate) fn i0_scaled(z: f64) -> f64 {
    if z <= BESSEL_SERIES_LIMIT {
        (-z).exp() * bessel_series(0, z)
    } else {
        bessel_asymptotic_scaled(0, z)
    }
}

pub(crate) fn i1_scaled(z: f64) -> f64 {
    if z <= BESSEL_SERIES_LIMIT {
        (-z).exp() * bessel_series(1, z)
    } else {
        bessel_asymptotic_scaled(1, z)
    }
}

pub(crate) fn i0(z: f64) -> f64 {
    if z <= BESSEL_SERIES_LIMIT {
        bessel_series(0, z)
    } else {
        z.exp() * bessel_asymptotic_scaled(0, z)
    }
}

pub(crate) fn i1(z: f64) -> f64 {
    if z <= BESSEL_SERIES_LIMIT {
        bessel_series(1, z)
    } else {
        z.exp() * bessel_asymptotic_scaled(1, z)
    }
}

/// `e^{-z} I₁(z) / z`, finite at `z = 0` where it equals `1/2`.
pub(crate) fn i1_over_z_scaled(z: f64) -> f64 {
    if z <= BESSEL_SERIES_LIMIT {
        // series of I₁(z)/z has no leading z factor
        let q = 0.25 * z * z;
        let mut term = 0.5;
        let mut acc = CompensatedSum::default();
        for k in 0..500u32 {
            acc.add(term);
            let kf = f64::from(k + 1);
            term *= q / (kf * (kf + 1.0));
            if term <= 1e-17 * acc.value() {
                break;
            }
        }
        (-z).exp() * acc.value()
    } else {
        bessel_asymptotic_scaled(1, z) / z
    }
}

fn finite_or_overflow(v: f64, what: &str, z: f64) -> Result<f64> {
    if v.is_finite() {
        Ok(v)
    } else {
        Err(Error::Domain(format!(
            "{what}({z}) overflows f64; use the scaled form"
        )))
    }
}

/// Modified Bessel function of the first kind, order zero.
pub fn bessel_i0(z: f64) -> Result<f64> {
    check_bessel_arg(z)?;
    finite_or_overflow(i0(z), "I0", z)
}

/// Modified Bessel function of the first kind, order one.
pub fn bessel_i1(z: f64) -> Result<f64> {
    check_bessel_arg(z)?;
    finite_or_overflow(i1(z), "I1", z)
}

/// `e^{-z} I₀(z)`; finite for every finite `z >= 0`.
pub fn bessel_i0_scaled(z: f64) -> Result<f64> {
    check_bessel_arg(z)?;
    Ok(i0_scaled(z))
}

/// `e^{-z} I₁(z)`; finite for every finite `z >= 0`.
pub fn bessel_i1_scaled(z: f64) -> Result<f64> {
    check_bessel_arg(z)?;
    Ok(i1_scaled(z))
}

/// Rising factorial `(a)_s = a (a+1) … (a+s-1)`, with `(a)_0 = 1`.
pub fn pochhammer(a: f64, s: u32) -> f64 {
    (0..s).map(|j| a + f64::from(j)).product()
}

/// `n!!` for `n >= -1`, with `(-1)!! = 0!! = 1`.
pub fn double_factorial(n: i64) -> Result<f64> {
    if n < -1 {
        return Err(Error::Domain(format!(
            "double factorial needs n >= -1, got {n}"
        )));
    }
    let mut acc = 1.0;
    let mut m = n;
    while m > 1 {
        acc *= m as f64;
        m -= 2;
    }
    Ok(acc)
}

fn nonpositive_integer(x: f64) -> Option<u32> {
    if x <= 0.0 && x.fract() == 0.0 && x > -(u32::MAX as f64) {
        Some((-x) as u32)
    } else {
        None
    }
}

/// Sum of a terminating series whose term ratio is `ratio(s)` for the step
/// `s -> s+1`, starting from the term value 1.
fn terminating_sum(k: u32, ratio: impl Fn(f64) -> f64) -> f64 {
    let mut acc = CompensatedSum::default();
    let mut term = 1.0;
    acc.add(term);
    for s in 0..k {
        term *= ratio(f64::from(s));
        acc.add(term);
    }
    acc.value()
}

/// Terminating Gauss function `₂F₁(-k, b; c; z)`.
///
/// The pattern `b = 1/2, c = 3/2` on `0 <= z <= 1` is evaluated through
/// `∫₀¹ (1 - z u²)^k du` by a positive recurrence in `k`; everything else is
/// the finite term-ratio sum.
pub fn hyp2f1_term(k: u32, b: f64, c: f64, z: f64) -> Result<f64> {
    if b == 0.5 && c == 1.5 && (0.0..=1.0).contains(&z) {
        let mut rec = HalfPatternRecurrence::new(z);
        for _ in 0..k {
            rec.advance();
        }
        return Ok(rec.f2());
    }
    hyp2f1_series(k, b, c, z)
}

/// Direct term-ratio summation of `₂F₁(-k, b; c; z)` for every parameter
/// pattern, without the recurrence shortcut of [`hyp2f1_term`].
pub fn hyp2f1_series(k: u32, b: f64, c: f64, z: f64) -> Result<f64> {
    if let Some(m) = nonpositive_integer(c) {
        if m < k {
            return Err(Error::Domain(format!(
                "2F1(-{k}, {b}; {c}; z): denominator Pochhammer vanishes at s = {}",
                m + 1
            )));
        }
    }
    let kf = f64::from(k);
    Ok(terminating_sum(k, |s| {
        (s - kf) * (b + s) / ((c + s) * (s + 1.0)) * z
    }))
}

/// `₃F₂(-k, -k-1/2, 1/2; -k+1/2, 3/2; z)`, the pattern in the distribution
/// function of the sum. Uses the stable integral recurrence for
/// `0 <= z <= 1` and the direct sum elsewhere.
pub fn hyp3f2_term(k: u32, z: f64) -> f64 {
    if (0.0..=1.0).contains(&z) {
        let mut rec = HalfPatternRecurrence::new(z);
        for _ in 0..k {
            rec.advance();
        }
        rec.f3()
    } else {
        hyp3f2_series(k, z)
    }
}

/// Direct term-ratio summation of the same `₃F₂` as [`hyp3f2_term`].
/// Loses roughly `2^k` ulps near `z = 1`; kept as an independent route.
pub fn hyp3f2_series(k: u32, z: f64) -> f64 {
    let kf = f64::from(k);
    terminating_sum(k, |s| {
        (s - kf) * (-kf - 0.5 + s) * (0.5 + s) / ((-kf + 0.5 + s) * (1.5 + s) * (s + 1.0)) * z
    })
}

/// General terminating `₃F₂(-k, a2, a3; b1, b2; z)`.
pub fn hyp3f2_general(k: u32, a2: f64, a3: f64, b1: f64, b2: f64, z: f64) -> Result<f64> {
    for b in [b1, b2] {
        if let Some(m) = nonpositive_integer(b) {
            if m < k {
                return Err(Error::Domain(format!(
                    "3F2 denominator parameter {b} vanishes within {k} terms"
                )));
            }
        }
    }
    let kf = f64::from(k);
    Ok(terminating_sum(k, |s| {
        (s - kf) * (a2 + s) * (a3 + s) / ((b1 + s) * (b2 + s) * (s + 1.0)) * z
    }))
}

/// `₂F₁(-k, 1/2; 3/2; 1) = (2k)!! / (2k+1)!!`.
pub fn hyp2f1_at_one(k: u32) -> f64 {
    (1..=k)
        .map(|j| {
            let j = f64::from(j);
            2.0 * j / (2.0 * j + 1.0)
        })
        .product()
}

/// `₃F₂(-k, -k-1/2, 1/2; -k+1/2, 3/2; 1)`: `2^k k! / ((k+1)(2k-1)!!)` for
/// even `k`, zero for odd `k`.
pub fn hyp3f2_at_one(k: u32) -> f64 {
    if k % 2 == 1 {
        return 0.0;
    }
    let p: f64 = (1..=k)
        .map(|j| {
            let j = f64::from(j);
            2.0 * j / (2.0 * j - 1.0)
        })
        .product();
    p / (f64::from(k) + 1.0)
}

/// Walks `k = 0, 1, 2, …` for fixed `z ∈ [0, 1]`, carrying
///
/// * `F_k = ∫₀¹ (1 - z u²)^k du = ₂F₁(-k, 1/2; 3/2; z)`
/// * `J_k = ∫₀¹ (v² - z)^k dv`
///
/// Integration by parts gives `(2k+1) F_k = (1-z)^k + 2k F_{k-1}` and
/// `(2k+1) J_k = (1-z)^k - 2kz J_{k-1}`; both contract rounding errors.
/// The `₃F₂` pattern is `(2k+1)/(2k+2) · (F_k + J_k)`.
#[derive(Debug, Clone)]
pub(crate) struct HalfPatternRecurrence {
    z: f64,
    k: u32,
    pow: f64,
    f: f64,
    j: f64,
}

impl HalfPatternRecurrence {
    pub(crate) fn new(z: f64) -> Self {
        HalfPatternRecurrence {
            z,
            k: 0,
            pow: 1.0,
            f: 1.0,
            j: 1.0,
        }
    }

    pub(crate) fn advance(&mut self) {
        self.k += 1;
        let k = f64::from(self.k);
        self.pow *= 1.0 - self.z;
        self.f = (self.pow + 2.0 * k * self.f) / (2.0 * k + 1.0);
        self.j = (self.pow - 2.0 * k * self.z * self.j) / (2.0 * k + 1.0);
    }

    pub(crate) fn f2(&self) -> f64 {
        self.f
    }

    pub(crate) fn f3(&self) -> f64 {
        let k = f64::from(self.k);
        (2.0 * k + 1.0) / (2.0 * k + 2.0) * (self.f + self.j)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rel(a: f64, b: f64) -> f64 {
        (a - b).abs() / b.abs().max(f64::MIN_POSITIVE)
    }

    // 30-digit reference values (mpmath besseli)
    const I0_1: f64 = 1.266_065_877_752_008_335_598_244_625_21;
    const I0_2: f64 = 2.279_585_302_336_067_267_437_204_440_81;
    const I1_2: f64 = 1.590_636_854_637_329_063_382_254_425;
    const I0_30: f64 = 781_672_297_823.977_489_717_389_816_705;
    const I0_700_SCALED: f64 = 0.015_081_295_651_531_357_586_986_174_529_8;
    const I1_50_SCALED: f64 = 0.055_993_123_892_895_399_643_878_707_557_4;

    fn brute_i(nu: u32, z: f64, terms: u32) -> f64 {
        // plain partial sum with factorials rebuilt every term
        (0..terms)
            .map(|k| {
                let fk: f64 = (1..=k).map(f64::from).product();
                let fkn: f64 = (1..=k + nu).map(f64::from).product();
                (z / 2.0).powi((2 * k + nu) as i32) / (fk * fkn)
            })
            .sum()
    }

    #[test]
    fn i0_values() {
        assert_eq!(bessel_i0(0.0).unwrap(), 1.0);
        assert!(rel(bessel_i0(1.0).unwrap(), I0_1) < 1e-15);
        assert!(rel(bessel_i0(2.0).unwrap(), I0_2) < 1e-15);
        assert!(rel(bessel_i0(2.0).unwrap(), brute_i(0, 2.0, 30)) < 1e-14);
        assert!(rel(bessel_i0(30.0).unwrap(), I0_30) < 1e-14);
    }

    #[test]
    fn i1_values() {
        assert_eq!(bessel_i1(0.0).unwrap(), 0.0);
        let z = 1e-6;
        assert!((bessel_i1(z).unwrap() - z / 2.0).abs() < 1e-18);
        assert!(rel(bessel_i1(2.0).unwrap(), brute_i(1, 2.0, 30)) < 1e-14);
        assert!(rel(bessel_i1(2.0).unwrap(), I1_2) < 1e-15);
    }

    #[test]
    fn scaled_forms() {
        assert_eq!(bessel_i0_scaled(0.0).unwrap(), 1.0);
        // 8-term Hankel expansion as an independent oracle at z = 700
        let z = 700.0;
        let mut a = 1.0;
        let mut s = 1.0;
        for k in 1..8 {
            let o = (2 * k - 1) as f64;
            a *= o * o / (8.0 * k as f64 * z);
            s += a;
        }
        let oracle = s / (2.0 * PI * z).sqrt();
        assert!(rel(bessel_i0_scaled(z).unwrap(), oracle) < 1e-14);
        assert!(rel(bessel_i0_scaled(z).unwrap(), I0_700_SCALED) < 1e-14);
        assert!(rel(bessel_i1_scaled(50.0).unwrap(), I1_50_SCALED) < 1e-14);
        assert!(bessel_i1_scaled(1e6).unwrap().is_finite());
        for i in 0..=60 {
            let z = 0.5 * i as f64;
            assert!(
                rel(
                    bessel_i0_scaled(z).unwrap() * z.exp(),
                    bessel_i0(z).unwrap()
                ) < 1e-12
            );
            assert!(
                rel(
                    bessel_i1_scaled(z).unwrap() * z.exp(),
                    bessel_i1(z).unwrap()
                ) < 1e-12
                    || z == 0.0
            );
        }
    }

    #[test]
    fn branches_agree_at_crossover() {
        for nu in [0, 1] {
            let s = (-30.0f64).exp() * bessel_series(nu, 30.0);
            let a = bessel_asymptotic_scaled(nu, 30.0);
            assert!(rel(s, a) < 1e-12, "nu={nu}: {s} vs {a}");
        }
    }

    #[test]
    fn i1_over_z_limits() {
        assert_eq!(i1_over_z_scaled(0.0), 0.5);
        for z in [1e-3, 0.5, 3.0, 29.0, 31.0, 100.0] {
            assert!(rel(i1_over_z_scaled(z), i1_scaled(z) / z) < 1e-13);
        }
    }

    #[test]
    fn bessel_domain_errors() {
        assert!(matches!(bessel_i0(f64::NAN), Err(Error::Domain(_))));
        assert!(matches!(bessel_i1(f64::INFINITY), Err(Error::Domain(_))));
        assert!(bessel_i0(-1.0).is_err());
        assert!(bessel_i0(800.0).is_err());
        assert!(bessel_i0_scaled(800.0).is_ok());
    }

    #[test]
    fn i0_increasing_and_at_least_one() {
        let mut prev = 0.0;
        for i in 0..=3000 {
            let v = bessel_i0(i as f64 * 0.01).unwrap();
            assert!(v >= 1.0);
            assert!(v > prev);
            prev = v;
        }
    }

    #[test]
    fn pochhammer_values() {
        assert_eq!(pochhammer(3.0, 0), 1.0);
        assert_eq!(pochhammer(-4.0, 2), 12.0);
        assert_eq!(pochhammer(-4.0, 5), 0.0);
        for k in 0..=20u32 {
            for s in k + 1..=k + 5 {
                assert_eq!(pochhammer(-f64::from(k), s), 0.0);
            }
            for s in 0..=k {
                let kf: f64 = (1..=k).map(f64::from).product();
                let ksf: f64 = (1..=k - s).map(f64::from).product();
                let expect = if s % 2 == 0 { 1.0 } else { -1.0 } * kf / ksf;
                assert!(rel(pochhammer(-f64::from(k), s), expect) < 1e-14);
            }
        }
    }

    #[test]
    fn double_factorials() {
        assert_eq!(double_factorial(-1).unwrap(), 1.0);
        assert_eq!(double_factorial(0).unwrap(), 1.0);
        assert_eq!(double_factorial(7).unwrap(), 105.0);
        assert_eq!(double_factorial(8).unwrap(), 384.0);
        assert!(double_factorial(-3).is_err());
    }

    #[test]
    fn hyp2f1_examples() {
        assert_eq!(hyp2f1_term(0, 0.3, 2.2, 0.7).unwrap(), 1.0);
        assert!((hyp2f1_term(1, 0.5, 1.5, 1.0).unwrap() - 2.0 / 3.0).abs() < 1e-15);
        assert!((hyp2f1_term(3, 0.5, 1.5, 1.0).unwrap() - 48.0 / 105.0).abs() < 1e-15);
        assert!((hyp2f1_at_one(2) - 8.0 / 15.0).abs() < 1e-16);
        assert_eq!(hyp2f1_at_one(0), 1.0);
        // general branch: 2F1(-2, 1; 1; z) = (1-z)^2
        assert!((hyp2f1_term(2, 1.0, 1.0, 0.3).unwrap() - 0.49).abs() < 1e-15);
        assert!(hyp2f1_term(3, 0.5, -1.0, 0.2).is_err());
        assert!(hyp2f1_term(1, 0.5, -1.0, 0.2).is_ok());
    }

    #[test]
    fn hyp2f1_recurrence_matches_direct_sum() {
        for k in 0..12 {
            for z in [0.0, 0.1, 0.5, 0.9, 1.0] {
                let kf = f64::from(k);
                let direct =
                    terminating_sum(k, |s| (s - kf) * (0.5 + s) / ((1.5 + s) * (s + 1.0)) * z);
                assert!((hyp2f1_term(k, 0.5, 1.5, z).unwrap() - direct).abs() < 1e-13);
            }
        }
    }

    #[test]
    fn hyp2f1_closed_form_at_one() {
        for k in 0..=40 {
            assert!(rel(hyp2f1_term(k, 0.5, 1.5, 1.0).unwrap(), hyp2f1_at_one(k)) < 1e-12);
        }
    }

    #[test]
    fn hyp3f2_examples() {
        assert_eq!(hyp3f2_term(0, 0.4), 1.0);
        assert!(hyp3f2_term(1, 1.0).abs() < 1e-15);
        assert!((hyp3f2_term(2, 1.0) - 8.0 / 9.0).abs() < 1e-15);
        assert!((hyp3f2_at_one(4) - 384.0 / 525.0).abs() < 1e-15);
        assert!((hyp3f2_at_one(2) - 8.0 / 9.0).abs() < 1e-15);
    }

    #[test]
    fn hyp3f2_closed_form_at_one() {
        for k in 0..=40 {
            let v = hyp3f2_term(k, 1.0);
            assert!((v - hyp3f2_at_one(k)).abs() < 1e-10, "k={k}");
            if k % 2 == 1 {
                assert!(v.abs() < 1e-12);
            }
        }
    }

    #[test]
    fn hyp3f2_routes_agree_for_moderate_k() {
        for k in 0..=12 {
            for z in [0.0, 0.2, 0.55, 0.8, 1.0] {
                assert!((hyp3f2_term(k, z) - hyp3f2_series(k, z)).abs() < 1e-12);
                let g = hyp3f2_general(k, -f64::from(k) - 0.5, 0.5, -f64::from(k) + 0.5, 1.5, z)
                    .unwrap();
                assert!((g - hyp3f2_series(k, z)).abs() < 1e-13);
            }
        }
    }

    #[test]
    fn hyp3f2_reduction_identity() {
        // 3F2 = F(-k-1/2,-k;-k+1/2;z)/(2k+2) + (2k+1)/(2k+2) F(-k,1/2;3/2;z)
        for k in 0..=15u32 {
            let kf = f64::from(k);
            for z in [0.1, 0.6, 1.0] {
                let a = hyp2f1_term(k, -kf - 0.5, -kf + 0.5, z).unwrap();
                let b = hyp2f1_term(k, 0.5, 1.5, z).unwrap();
                let rhs = a / (2.0 * kf + 2.0) + (2.0 * kf + 1.0) / (2.0 * kf + 2.0) * b;
                assert!((hyp3f2_term(k, z) - rhs).abs() < 1e-11, "k={k} z={z}");
            }
        }
    }

    #[test]
    fn series_control_validation() {
        assert!(SeriesControl::new(0.0, 10).is_err());
        assert!(SeriesControl::new(1e-10, 0).is_err());
        let c = SeriesControl::default();
        assert_eq!(c.rel_tol(), 1e-14);
        assert_eq!(c.max_terms(), 500);
    }
}
