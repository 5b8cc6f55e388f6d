//! Law of `S(t) = X₁(t) + X₂(t)` for two independent telegraph processes.
//!
//! With equal parameters and both processes started at the origin the law
//! is known in closed form: three atoms at `{-2ct, 0, 2ct}`, a Bessel-type
//! density on `(-2ct, 2ct)` and a hypergeometric series for the
//! distribution function. Unequal parameters or shifted starts are handled
//! by numeric inversion of the characteristic function.

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{check_time, Error, Result};
use crate::numerics::fourier::{invert_charfn, invert_interval_mass, InversionConfig};
use crate::numerics::quadrature::arc_integral_scaled;
use crate::par::Execution;
use crate::specfun::{
    hyp2f1_series, i0_scaled, i1_over_z_scaled, i1_scaled, HalfPatternRecurrence, SeriesControl,
};
use crate::telegraph::{
    damped_cs, scaled_series, tele_charfn, tele_charfn_shifted, Atom, MixedDistribution,
    TelegraphParams,
};

/// Atoms `(-2ct, e^{-2λt}/4)`, `(0, e^{-2λt}/2)`, `(2ct, e^{-2λt}/4)`.
pub fn sum_atoms(p: &TelegraphParams, t: f64) -> Result<Vec<Atom>> {
    check_time(t)?;
    let e = (-2.0 * p.lambda() * t).exp();
    let r = 2.0 * p.c() * t;
    Ok(vec![
        Atom {
            location: -r,
            mass: 0.25 * e,
        },
        Atom {
            location: 0.0,
            mass: 0.5 * e,
        },
        Atom {
            location: r,
            mass: 0.25 * e,
        },
    ])
}

/// `(z, e^{z-2λt})` for `z = (λ/c)√(4c²t² − x²)`, `|x| < 2ct`.
fn bessel_arg(p: &TelegraphParams, ax: f64, t: f64) -> (f64, f64) {
    let r2 = 2.0 * p.c() * t;
    let z = p.lambda() / p.c() * ((r2 - ax) * (r2 + ax)).sqrt();
    (z, (z - 2.0 * p.lambda() * t).exp())
}

/// Density of the absolutely continuous part, zero for `|x| >= 2ct`.
///
/// The time derivative of `I₀` in the density is replaced by its closed
/// `I₁` expression: `¼ ∂_t I₀(z) = λ²t · I₁(z)/z`.
pub fn sum_pdf_ac(p: &TelegraphParams, x: f64, t: f64) -> Result<f64> {
    check_time(t)?;
    let ax = x.abs();
    let (c, l) = (p.c(), p.lambda());
    if !(ax < 2.0 * c * t) {
        return Ok(0.0);
    }
    let (z, e) = bessel_arg(p, ax, t);
    let arc = arc_integral_scaled(p, ax, t)?;
    let bracket =
        l * e * i0_scaled(z) + l * l * t * e * i1_over_z_scaled(z) + l * l / (2.0 * c) * arc;
    Ok(bracket / (2.0 * c))
}

/// Same density through `(λ/2c)[I₀ + ct I₁/√(4c²t²−x²) + (λ/2c) arc]`.
pub fn sum_pdf_ac_alt(p: &TelegraphParams, x: f64, t: f64) -> Result<f64> {
    check_time(t)?;
    let ax = x.abs();
    let (c, l) = (p.c(), p.lambda());
    let ct = c * t;
    if !(ax < 2.0 * ct) {
        return Ok(0.0);
    }
    let (z, e) = bessel_arg(p, ax, t);
    let root = ((2.0 * ct - ax) * (2.0 * ct + ax)).sqrt();
    // near the support edge ct/√· is large and I₁(z) small; use I₁(z)/(z/2)
    let middle = if z < 1e-3 {
        0.5 * l * t * (2.0 * i1_over_z_scaled(z))
    } else {
        ct / root * i1_scaled(z)
    };
    let arc = arc_integral_scaled(p, ax, t)?;
    Ok(l / (2.0 * c) * (e * i0_scaled(z) + e * middle + l / (2.0 * c) * arc))
}

fn outer_cdf(p: &TelegraphParams, x: f64, t: f64) -> Option<f64> {
    let r = 2.0 * p.c() * t;
    if x <= -r {
        Some(0.0)
    } else if x > r {
        Some(1.0)
    } else {
        None
    }
}

fn cosine_part(p: &TelegraphParams, x: f64, t: f64) -> f64 {
    let sign = if x > 0.0 { 1.0 } else { -1.0 };
    0.5 + sign * 0.25 * (-2.0 * p.lambda() * t).exp() * (p.lambda() * x / p.c()).cos()
}

/// Left-continuous distribution function `Pr{S(t) < x}`.
///
/// On `(-2ct, 0]` and `(0, 2ct]` this is `½ ∓ (e^{-2λt}/4) cos(λx/c)` plus
/// `(λx e^{-2λt}/2c)` times a series in `(λt)^{2k}/(k!)²` whose coefficients
/// are `₂F₁(−k, ½; 3/2; w)` and `₃F₂(−k, −k−½, ½; −k+½, 3/2; w)`,
/// `w = x²/4c²t²`. Both are evaluated by the stable recurrence.
pub fn sum_cdf(p: &TelegraphParams, x: f64, t: f64, ctrl: &SeriesControl) -> Result<f64> {
    check_time(t)?;
    if let Some(v) = outer_cdf(p, x, t) {
        return Ok(v);
    }
    let (c, l) = (p.c(), p.lambda());
    let lt = l * t;
    let w = (x / (2.0 * c * t)).powi(2).min(1.0);
    let mut rec = HalfPatternRecurrence::new(w);
    let series = scaled_series(
        ctrl,
        -2.0 * lt,
        |k| lt * lt / f64::from((k + 1) * (k + 1)),
        |k| {
            if k > 0 {
                rec.advance();
            }
            let kf = f64::from(k);
            let c1 = 1.0 + lt / (2.0 * kf + 2.0);
            let c2 = lt / (2.0 * kf + 1.0);
            (c1 * rec.f2() + c2 * rec.f3(), c1 + 2.0 * c2)
        },
    )?;
    Ok(cosine_part(p, x, t) + l * x / (2.0 * c) * series)
}

/// [`sum_cdf`] through Gauss functions only, `₂F₁(−k, ½; 3/2; w)` and
/// `₂F₁(−k, −k−½; −k+½; w)`, each summed term by term.
///
/// The direct sums lose about `k` bits to cancellation at `w` near 1; the
/// series weights keep this harmless while `λt` stays below about 20.
pub fn sum_cdf_alt(p: &TelegraphParams, x: f64, t: f64, ctrl: &SeriesControl) -> Result<f64> {
    check_time(t)?;
    if let Some(v) = outer_cdf(p, x, t) {
        return Ok(v);
    }
    let (c, l) = (p.c(), p.lambda());
    let lt = l * t;
    let w = (x / (2.0 * c * t)).powi(2);
    let mut failure = None;
    let series = scaled_series(
        ctrl,
        -2.0 * lt,
        |k| lt * lt / f64::from((k + 1) * (k + 1)),
        |k| {
            let kf = f64::from(k);
            let f1 = hyp2f1_series(k, 0.5, 1.5, w);
            let f2 = hyp2f1_series(k, -kf - 0.5, -kf + 0.5, w);
            match (f1, f2) {
                (Ok(f1), Ok(f2)) => {
                    let c1 = 1.0 + lt / (kf + 1.0);
                    let c2 = lt / ((2.0 * kf + 1.0) * (2.0 * kf + 2.0));
                    // |F(−k,−k−½;−k+½;w)| = (2k+1)|∫₀¹(v²−w)^k dv| <= 2k+1
                    (c1 * f1 + c2 * f2, c1 + c2 * (2.0 * kf + 1.0))
                }
                (Err(e), _) | (_, Err(e)) => {
                    failure.get_or_insert(e);
                    (0.0, 0.0)
                }
            }
        },
    )?;
    if let Some(e) = failure {
        return Err(e);
    }
    Ok(cosine_part(p, x, t) + l * x / (2.0 * c) * series)
}

/// `Ψ(ξ, t) = H(ξ, t)²`, the characteristic function of `S(t)`.
pub fn sum_charfn(p: &TelegraphParams, xi: f64, t: f64) -> f64 {
    tele_charfn(p, xi, t).powi(2)
}

/// `∂_t [e^{2λt} Ψ(ξ, t)]` in closed form:
/// `(s + λ²) S(2t) + 2λ C(2t)` with `s = λ² − c²ξ²`,
/// `C(τ) = cosh(τ√s)`, `S(τ) = sinh(τ√s)/√s`.
pub fn w_hat(p: &TelegraphParams, xi: f64, t: f64) -> f64 {
    let l = p.lambda();
    let s = l * l - p.c() * p.c() * xi * xi;
    let (dc, ds) = damped_cs(l, 2.0 * t, s);
    (2.0 * l * t).exp() * ((s + l * l) * ds + 2.0 * l * dc)
}

/// Full closed-form law of `S(t)`.
pub fn sum_law(p: &TelegraphParams, t: f64, ctrl: SeriesControl) -> Result<MixedDistribution> {
    let atoms = sum_atoms(p, t)?;
    let r = 2.0 * p.c() * t;
    let (pd, pc) = (*p, *p);
    MixedDistribution::new(
        atoms,
        (-r, r),
        move |x| sum_pdf_ac(&pd, x, t),
        move |x| sum_cdf(&pc, x, t, &ctrl),
    )
}

/// Two processes with their own parameters and start points.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SumParams {
    p1: TelegraphParams,
    p2: TelegraphParams,
    x01: f64,
    x02: f64,
}

impl SumParams {
    pub fn new(p1: TelegraphParams, p2: TelegraphParams, x01: f64, x02: f64) -> Result<Self> {
        if !x01.is_finite() || !x02.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "start points must be finite, got {x01}, {x02}"
            )));
        }
        Ok(SumParams { p1, p2, x01, x02 })
    }

    /// Identical processes started at the origin.
    pub fn symmetric(p: TelegraphParams) -> Self {
        SumParams {
            p1: p,
            p2: p,
            x01: 0.0,
            x02: 0.0,
        }
    }

    pub fn p1(&self) -> TelegraphParams {
        self.p1
    }

    pub fn p2(&self) -> TelegraphParams {
        self.p2
    }

    pub fn x01(&self) -> f64 {
        self.x01
    }

    pub fn x02(&self) -> f64 {
        self.x02
    }

    pub fn start(&self) -> f64 {
        self.x01 + self.x02
    }

    /// True when the closed-form law applies.
    pub fn is_closed_form(&self) -> bool {
        self.p1 == self.p2 && self.x01 == 0.0 && self.x02 == 0.0
    }

    /// `[x₀ − (c₁+c₂)t, x₀ + (c₁+c₂)t]`.
    pub fn support(&self, t: f64) -> (f64, f64) {
        let x0 = self.start();
        let ct = self.p1.c() * t + self.p2.c() * t;
        (x0 - ct, x0 + ct)
    }
}

/// `e^{iξ(x₁⁰+x₂⁰)} H₁(ξ, t) H₂(ξ, t)`.
pub fn general_charfn(sp: &SumParams, xi: f64, t: f64) -> Complex64 {
    tele_charfn_shifted(&sp.p1, sp.x01, xi, t) * tele_charfn_shifted(&sp.p2, sp.x02, xi, t)
}

/// Location of `S(t)` when neither process switches, for initial
/// directions `d1, d2 ∈ {−1, +1}`. Shared with the simulator so that atom
/// hits compare equal without a tolerance.
pub(crate) fn no_switch_location(sp: &SumParams, d1: f64, d2: f64, t: f64) -> f64 {
    sp.start() + (d1 * sp.p1.c() * t + d2 * sp.p2.c() * t)
}

/// Atoms of `S(t)`: one per pair of initial directions, each of mass
/// `e^{-(λ₁+λ₂)t}/4`, merged where locations coincide. Four atoms when
/// `c₁ ≠ c₂`, three when `c₁ = c₂`.
pub fn general_atoms(sp: &SumParams, t: f64) -> Result<Vec<Atom>> {
    check_time(t)?;
    let m = 0.25 * (-(sp.p1.lambda() + sp.p2.lambda()) * t).exp();
    let mut atoms: Vec<Atom> = Vec::with_capacity(4);
    for (d1, d2) in [(-1.0, -1.0), (-1.0, 1.0), (1.0, -1.0), (1.0, 1.0)] {
        let location = no_switch_location(sp, d1, d2, t);
        match atoms.iter_mut().find(|a| a.location == location) {
            Some(a) => a.mass += m,
            None => atoms.push(Atom { location, mass: m }),
        }
    }
    atoms.sort_by(|a, b| a.location.total_cmp(&b.location));
    Ok(atoms)
}

/// Options for the numeric general-case law.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GeneralOptions {
    /// Minimum distance from atoms and support ends; `None` means
    /// `1e-3·(c₁+c₂)t`.
    pub exclusion: Option<f64>,
    /// Target for the inversion truncation bound.
    pub tol: f64,
    pub execution: Execution,
}

impl Default for GeneralOptions {
    fn default() -> Self {
        GeneralOptions {
            exclusion: None,
            tol: 1e-6,
            execution: Execution::Parallel,
        }
    }
}

fn inversion_config(sp: &SumParams, t: f64, opts: &GeneralOptions) -> Result<InversionConfig> {
    let atoms = general_atoms(sp, t)?;
    let (lo, hi) = sp.support(t);
    Ok(InversionConfig::default()
        .with_atoms(&atoms)
        .with_singular_points(&[lo, hi])
        .with_tol(opts.tol)
        .with_execution(opts.execution))
}

/// Density of the absolutely continuous part by numeric inversion.
/// `x` must lie inside the support and keep the exclusion distance from
/// every atom and from the support ends.
pub fn general_pdf_ac(sp: &SumParams, x: f64, t: f64, opts: &GeneralOptions) -> Result<f64> {
    let cfg = inversion_config(sp, t, opts)?;
    let (lo, hi) = sp.support(t);
    let delta = opts.exclusion.unwrap_or(1e-3 * (sp.p1.c() + sp.p2.c()) * t);
    let near = cfg
        .atoms
        .iter()
        .map(|a| a.location)
        .chain([lo, hi])
        .map(|a| (x - a).abs())
        .fold(f64::INFINITY, f64::min);
    if !(x > lo && x < hi) || near <= delta {
        return Err(Error::Domain(format!(
            "x = {x} must lie in ({lo}, {hi}) at distance > {delta} from atoms and endpoints"
        )));
    }
    let r = invert_charfn(|xi| general_charfn(sp, xi, t), &cfg, x)?;
    Ok(r.value.re.max(0.0))
}

/// Mass of the absolutely continuous part on `[a, b]` by numeric inversion.
pub fn general_ac_mass(
    sp: &SumParams,
    a: f64,
    b: f64,
    t: f64,
    opts: &GeneralOptions,
) -> Result<f64> {
    let cfg = inversion_config(sp, t, opts)?;
    let (lo, hi) = sp.support(t);
    let (a, b) = (a.max(lo), b.min(hi));
    if a >= b {
        return Ok(0.0);
    }
    Ok(
        invert_interval_mass(|xi| general_charfn(sp, xi, t), &cfg, a, b)?
            .value
            .re,
    )
}

/// `Pr{S(t) < x}` for the general case.
pub fn general_cdf(sp: &SumParams, x: f64, t: f64, opts: &GeneralOptions) -> Result<f64> {
    let (lo, hi) = sp.support(t);
    if x <= lo {
        return Ok(0.0);
    }
    if x > hi {
        return Ok(1.0);
    }
    let atoms: f64 = general_atoms(sp, t)?
        .iter()
        .filter(|a| a.location < x)
        .map(|a| a.mass)
        .sum();
    Ok((atoms + general_ac_mass(sp, lo, x, t, opts)?).clamp(0.0, 1.0))
}

/// General-case law; density and distribution function are evaluated by
/// inversion on demand, so each call costs one numeric integral.
pub fn general_law(sp: &SumParams, t: f64, opts: GeneralOptions) -> Result<MixedDistribution> {
    let atoms = general_atoms(sp, t)?;
    let support = sp.support(t);
    let (s1, s2) = (*sp, *sp);
    MixedDistribution::new(
        atoms,
        support,
        move |x| general_pdf_ac(&s1, x, t, &opts),
        move |x| general_cdf(&s2, x, t, &opts),
    )
}
