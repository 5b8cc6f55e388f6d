//! Self-check suite: each closed form against an independent numerical
//! route, for one parameter set.

use serde::Serialize;

use crate::error::Result;
use crate::numerics::diff::{central_diff, pde_residual_order3, theorem2_residual};
use crate::numerics::lemmas::{
    lemma_a1, lemma_a2_transform, lemma_a3_check, lemma_a4_antiderivative,
};
use crate::numerics::quadrature::{integrate, try_integrate};
use crate::specfun::{bessel_i0, hyp2f1_term, SeriesControl};
use crate::sumdist::{sum_atoms, sum_cdf, sum_cdf_alt, sum_charfn, sum_pdf_ac, sum_pdf_ac_alt};
use crate::telegraph::TelegraphParams;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CheckResult {
    pub name: String,
    pub passed: bool,
    pub measured: f64,
    pub tolerance: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VerifyReport {
    pub checks: Vec<CheckResult>,
}

impl VerifyReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    fn push(&mut self, name: &str, measured: f64, tolerance: f64) {
        self.checks.push(CheckResult {
            name: name.to_string(),
            passed: measured <= tolerance,
            measured,
            tolerance,
        });
    }

    pub fn to_text(&self) -> String {
        let mut s = String::new();
        for c in &self.checks {
            s.push_str(&format!(
                "{:<6} {:<28} measured {:.3e}  tolerance {:.1e}\n",
                if c.passed { "PASS" } else { "FAIL" },
                c.name,
                c.measured,
                c.tolerance
            ));
        }
        s.push_str(if self.passed() {
            "all checks passed\n"
        } else {
            "some checks FAILED\n"
        });
        s
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct VerifyOptions {
    /// Evaluate the density with `λ` raised by 1% while keeping the atoms
    /// exact, so that the normalization check must fail.
    pub inject_fault: bool,
}

fn max_over<I: IntoIterator<Item = Result<f64>>>(it: I) -> Result<f64> {
    let mut m: f64 = 0.0;
    for v in it {
        m = m.max(v?);
    }
    Ok(m)
}

/// Runs every check for `(c, λ, t)`. Failing checks are recorded in the
/// report; numerical errors abort the run.
pub fn run_verify(
    p: &TelegraphParams,
    t: f64,
    ctrl: &SeriesControl,
    opts: VerifyOptions,
) -> Result<VerifyReport> {
    let mut report = VerifyReport { checks: Vec::new() };
    let (c, l) = (p.c(), p.lambda());
    let r = 2.0 * c * t;
    let dens_p = if opts.inject_fault {
        TelegraphParams::new(c, 1.01 * l)?
    } else {
        *p
    };

    let atoms: f64 = sum_atoms(p, t)?.iter().map(|a| a.mass).sum();
    let ac = 2.0 * try_integrate(|x| sum_pdf_ac(&dens_p, x, t), 0.0, r, 1e-12)?.value;
    report.push("normalization", (atoms + ac - 1.0).abs(), 1e-9);

    let e = (-2.0 * l * t).exp();
    let edge = (sum_cdf(p, r, t, ctrl)? - (1.0 - e / 4.0)).abs();
    let jump = (sum_cdf(p, 1e-12 * r, t, ctrl)? - sum_cdf(p, 0.0, t, ctrl)? - e / 2.0).abs();
    report.push("cdf_boundary_limits", edge.max(jump), 1e-9);

    let xs: Vec<f64> = (1..=10)
        .map(|i| r * (-0.95 + 1.9 * (i as f64 - 0.5) / 10.0))
        .collect();
    let fd = max_over(xs.iter().map(|&x| {
        let h = 1e-4 * r;
        let d = central_diff(|y| sum_cdf(p, y, t, ctrl).unwrap_or(f64::NAN), x, h, 1)?;
        let f = sum_pdf_ac(p, x, t)?;
        Ok((d - f).abs() / f)
    }))?;
    report.push("cdf_derivative_vs_pdf", fd, 1e-6);

    let alt = max_over((0..50).map(|i| {
        let x = -r + 2.0 * r * (i as f64 + 0.5) / 50.0;
        Ok((sum_cdf(p, x, t, ctrl)? - sum_cdf_alt(p, x, t, ctrl)?).abs())
    }))?;
    report.push("cdf_alt_form", alt, 1e-10);

    let palt = max_over(xs.iter().map(|&x| {
        let a = sum_pdf_ac(p, x, t)?;
        Ok((a - sum_pdf_ac_alt(p, x, t)?).abs() / a)
    }))?;
    report.push("pdf_alt_form", palt, 1e-12);

    let fourier = max_over([0.1, 0.5, 0.9, 1.1, 2.0].iter().map(|&u| {
        let xi = u * l / c;
        let half =
            try_integrate(|x| Ok((xi * x).cos() * sum_pdf_ac(p, x, t)?), 0.0, r, 1e-12)?.value;
        let atoms: f64 = sum_atoms(p, t)?
            .iter()
            .map(|a| a.mass * (xi * a.location).cos())
            .sum();
        Ok((2.0 * half + atoms - sum_charfn(p, xi, t)).abs())
    }))?;
    report.push("fourier_consistency", fourier, 1e-7);

    let (a, b) = (c * t, l / c);
    let a1 = integrate(
        |x| bessel_i0(b * ((a - x) * (a + x)).max(0.0).sqrt()).unwrap_or(f64::NAN),
        -a,
        a,
        1e-12,
    )?;
    report.push(
        "lemma_a1",
        (a1.value - lemma_a1(a, b)).abs() / lemma_a1(a, b),
        1e-10,
    );

    let a2 = max_over([0.3 * b, b, 2.0 * b].iter().map(|&xi| {
        let q = integrate(
            |x| {
                (xi * x).cos()
                    * bessel_i0(b * ((a - x) * (a + x)).max(0.0).sqrt()).unwrap_or(f64::NAN)
            },
            -a,
            a,
            1e-12,
        )?;
        Ok((q.value - lemma_a2_transform(a, b, xi)).abs())
    }))?;
    report.push("lemma_a2", a2, 1e-8);

    let a3 = max_over([0.5 * b, 3.0 * b].iter().map(|&xi| {
        let (lhs, rhs) = lemma_a3_check(b, t, xi)?;
        Ok((lhs - rhs).abs())
    }))?;
    report.push("lemma_a3", a3, 1e-7);

    let a4 = {
        let (n, k, x) = (4u32, 2u32, 0.3);
        let q = integrate(
            |z: f64| z.powi(4) * hyp2f1_term(k, 0.5, 1.5, x * x / (z * z)).unwrap_or(f64::NAN),
            1.0,
            2.0,
            1e-13,
        )?;
        let d = lemma_a4_antiderivative(n, k, x, 2.0)? - lemma_a4_antiderivative(n, k, x, 1.0)?;
        (d - q.value).abs() / q.value.abs()
    };
    report.push("lemma_a4", a4, 1e-8);

    let h = 1e-3 * t.min(1.0 / l);
    let pde = max_over(
        [0.7, 3.0]
            .iter()
            .map(|&u| pde_residual_order3(p, u * l / c, t, h)),
    )?;
    report.push("pde_residual_order3", pde, 1e-5);
    let th2 = max_over(
        [0.5, 2.0]
            .iter()
            .map(|&u| theorem2_residual(p, u * l / c, t, h)),
    )?;
    report.push("theorem2_residual", th2, 1e-6);

    Ok(report)
}
