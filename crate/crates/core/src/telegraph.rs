//! Law of a single telegraph process `X(t)` started at the origin: two
//! atoms at `±ct`, a Bessel density on `(-ct, ct)`, the distribution
//! function and the characteristic function.

use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{check_time, Error, Result};
use crate::par::CompensatedSum;
use crate::specfun::{i0_scaled, i1_over_z_scaled, HalfPatternRecurrence, SeriesControl};

/// Speed `c` and switching rate `λ` of one telegraph process.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TelegraphParams {
    c: f64,
    lambda: f64,
}

impl TelegraphParams {
    pub fn new(c: f64, lambda: f64) -> Result<Self> {
        if !(c > 0.0 && c.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "speed c must be positive and finite, got {c}"
            )));
        }
        if !(lambda > 0.0 && lambda.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "rate lambda must be positive and finite, got {lambda}"
            )));
        }
        Ok(TelegraphParams { c, lambda })
    }

    pub fn c(&self) -> f64 {
        self.c
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }
}

/// A point mass.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Atom {
    pub location: f64,
    pub mass: f64,
}

type ScalarFn = Arc<dyn Fn(f64) -> Result<f64> + Send + Sync>;

/// Law made of finitely many atoms plus an absolutely continuous part.
///
/// `cdf` is left-continuous, `Pr{S < x}`; [`MixedDistribution::cdf_right`]
/// adds the atom sitting at `x`, if any.
#[derive(Clone)]
pub struct MixedDistribution {
    atoms: Vec<Atom>,
    support: (f64, f64),
    density: ScalarFn,
    cdf: ScalarFn,
}

impl fmt::Debug for MixedDistribution {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("MixedDistribution")
            .field("atoms", &self.atoms)
            .field("support", &self.support)
            .finish_non_exhaustive()
    }
}

impl MixedDistribution {
    pub fn new(
        mut atoms: Vec<Atom>,
        support: (f64, f64),
        density: impl Fn(f64) -> Result<f64> + Send + Sync + 'static,
        cdf: impl Fn(f64) -> Result<f64> + Send + Sync + 'static,
    ) -> Result<Self> {
        if !(support.0 <= support.1) {
            return Err(Error::InvalidParameter(format!("bad support {support:?}")));
        }
        let mut total = 0.0;
        for a in &atoms {
            if !(a.mass > 0.0 && a.mass <= 1.0) {
                return Err(Error::InvalidParameter(format!(
                    "atom mass {} not in (0, 1]",
                    a.mass
                )));
            }
            if a.location < support.0 || a.location > support.1 {
                return Err(Error::InvalidParameter(format!(
                    "atom at {} outside support",
                    a.location
                )));
            }
            total += a.mass;
        }
        if total > 1.0 + 1e-12 {
            return Err(Error::InvalidParameter(format!(
                "atom masses sum to {total} > 1"
            )));
        }
        atoms.sort_by(|a, b| a.location.total_cmp(&b.location));
        Ok(MixedDistribution {
            atoms,
            support,
            density: Arc::new(density),
            cdf: Arc::new(cdf),
        })
    }

    /// Unit mass at `location`.
    pub fn point_mass(location: f64) -> Self {
        MixedDistribution {
            atoms: vec![Atom {
                location,
                mass: 1.0,
            }],
            support: (location, location),
            density: Arc::new(|_| Ok(0.0)),
            cdf: Arc::new(move |x| Ok(if x <= location { 0.0 } else { 1.0 })),
        }
    }

    pub fn atoms(&self) -> &[Atom] {
        &self.atoms
    }

    pub fn support(&self) -> (f64, f64) {
        self.support
    }

    pub fn total_atom_mass(&self) -> f64 {
        self.atoms.iter().map(|a| a.mass).sum()
    }

    /// Mass of the atom located exactly at `x` (0 if none).
    pub fn atom_mass_at(&self, x: f64) -> f64 {
        self.atoms
            .iter()
            .filter(|a| a.location == x)
            .map(|a| a.mass)
            .sum()
    }

    pub fn pdf_ac(&self, x: f64) -> Result<f64> {
        (self.density)(x)
    }

    /// `Pr{S < x}`.
    pub fn cdf(&self, x: f64) -> Result<f64> {
        (self.cdf)(x)
    }

    /// `Pr{S <= x}`.
    pub fn cdf_right(&self, x: f64) -> Result<f64> {
        Ok((self.cdf)(x)? + self.atom_mass_at(x))
    }
}

/// Atoms at `±ct`, each with mass `e^{-λt}/2`.
pub fn tele_atoms(p: &TelegraphParams, t: f64) -> Result<Vec<Atom>> {
    check_time(t)?;
    let m = 0.5 * (-p.lambda * t).exp();
    let ct = p.c * t;
    Ok(vec![
        Atom {
            location: -ct,
            mass: m,
        },
        Atom {
            location: ct,
            mass: m,
        },
    ])
}

/// Density of the absolutely continuous part; zero for `|x| >= ct`.
pub fn tele_pdf_ac(p: &TelegraphParams, x: f64, t: f64) -> Result<f64> {
    check_time(t)?;
    let (c, l) = (p.c, p.lambda);
    let ct = c * t;
    if !(x.abs() < ct) {
        return Ok(0.0);
    }
    let z = (l / c) * ((ct - x) * (ct + x)).sqrt();
    // ct·I₁(z)/√(c²t²−x²) = λt·I₁(z)/z; both Bessels carry e^{-z}
    let bracket = i0_scaled(z) + l * t * i1_over_z_scaled(z);
    Ok(l / (2.0 * c) * (z - l * t).exp() * bracket)
}

/// Density of the absolutely continuous part of `x0 + X(t)`.
pub fn tele_pdf_ac_shifted(p: &TelegraphParams, x0: f64, x: f64, t: f64) -> Result<f64> {
    tele_pdf_ac(p, x - x0, t)
}

/// `e^{log_prefactor} Σ_k w_k a_k` where `w_0 = 1`, `w_{k+1} = w_k · next_ratio(k)`
/// and `inner(k)` returns `(a_k, b_k)` with `|a_k| <= b_k`. The weights are
/// rescaled on the fly so that neither they nor the prefactor overflow.
/// Stops once the weights decrease and `w_k b_k <= rel_tol · |partial sum|`.
pub(crate) fn scaled_series(
    ctrl: &SeriesControl,
    log_prefactor: f64,
    mut next_ratio: impl FnMut(u32) -> f64,
    mut inner: impl FnMut(u32) -> (f64, f64),
) -> Result<f64> {
    const RESCALE: f64 = 1e250;
    let mut weight = 1.0;
    let mut log_scale = 0.0;
    let mut acc = CompensatedSum::default();
    let mut last_ratio = f64::INFINITY;
    for k in 0..ctrl.max_terms() as u32 {
        let (a, b) = inner(k);
        acc.add(weight * a);
        let ratio = next_ratio(k);
        last_ratio = weight * b / acc.value().abs();
        if ratio < 1.0 && weight * b <= ctrl.rel_tol() * acc.value().abs() {
            return Ok(acc.value() * (log_scale + log_prefactor).exp());
        }
        weight *= ratio;
        if weight > RESCALE {
            weight /= RESCALE;
            let v = acc.value() / RESCALE;
            acc = CompensatedSum::default();
            acc.add(v);
            log_scale += RESCALE.ln();
        }
    }
    Err(Error::Truncation {
        terms: ctrl.max_terms(),
        ratio: last_ratio,
    })
}

/// Left-continuous distribution function `Pr{X(t) < x}`.
pub fn tele_cdf(p: &TelegraphParams, x: f64, t: f64, ctrl: &SeriesControl) -> Result<f64> {
    check_time(t)?;
    let (c, l) = (p.c, p.lambda);
    let ct = c * t;
    if x <= -ct {
        return Ok(0.0);
    }
    if x > ct {
        return Ok(1.0);
    }
    let lt = l * t;
    let q = 0.25 * lt * lt;
    let w = (x / ct) * (x / ct);
    let mut rec = HalfPatternRecurrence::new(w.min(1.0));
    let series = scaled_series(
        ctrl,
        -lt,
        |k| {
            let k1 = f64::from(k + 1);
            q / (k1 * k1)
        },
        |k| {
            if k > 0 {
                rec.advance();
            }
            let a = (1.0 + lt / (2.0 * f64::from(k) + 2.0)) * rec.f2();
            (a, a)
        },
    )?;
    Ok(0.5 + l * x / (2.0 * c) * series)
}

/// `(e^{-λt}C, e^{-λt}S)` where `C = cosh(t√s)`, `S = sinh(t√s)/√s` and
/// their trigonometric continuations for `s < 0`. Near `s = 0` a Taylor
/// expansion in `s` replaces the removable `0/0`.
pub(crate) fn damped_cs(lambda: f64, t: f64, s: f64) -> (f64, f64) {
    let decay = (-lambda * t).exp();
    if s.abs() < 1e-8 * lambda * lambda {
        let u = s * t * t;
        let c = 1.0 + u / 2.0 + u * u / 24.0 + u * u * u / 720.0;
        let sh = t * (1.0 + u / 6.0 + u * u / 120.0 + u * u * u / 5040.0);
        return (decay * c, decay * sh);
    }
    if s > 0.0 {
        let r = s.sqrt();
        let a = ((r - lambda) * t).exp();
        let b = (-(r + lambda) * t).exp();
        (0.5 * (a + b), 0.5 * (a - b) / r)
    } else {
        let r = (-s).sqrt();
        (decay * (r * t).cos(), decay * (r * t).sin() / r)
    }
}

/// Characteristic function `E e^{iξX(t)}` (real, since the law is symmetric).
pub fn tele_charfn(p: &TelegraphParams, xi: f64, t: f64) -> f64 {
    if xi == 0.0 {
        return 1.0;
    }
    let s = p.lambda * p.lambda - p.c * p.c * xi * xi;
    let (c, sh) = damped_cs(p.lambda, t, s);
    c + p.lambda * sh
}

/// Characteristic function of `x0 + X(t)`.
pub fn tele_charfn_shifted(p: &TelegraphParams, x0: f64, xi: f64, t: f64) -> Complex64 {
    Complex64::from_polar(1.0, xi * x0) * tele_charfn(p, xi, t)
}

/// Full law of `X(t)` as a [`MixedDistribution`].
pub fn tele_law(p: &TelegraphParams, t: f64, ctrl: SeriesControl) -> Result<MixedDistribution> {
    let atoms = tele_atoms(p, t)?;
    let ct = p.c * t;
    let (pd, pc) = (*p, *p);
    MixedDistribution::new(
        atoms,
        (-ct, ct),
        move |x| tele_pdf_ac(&pd, x, t),
        move |x| tele_cdf(&pc, x, t, &ctrl),
    )
}
