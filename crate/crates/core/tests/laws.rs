use num_complex::Complex64;
use telesum::mc::{atom_frequencies, simulate_sum, simulate_telegraph, SimConfig};
use telesum::numerics::{
    central_diff, integrate, invert_charfn, lemma_a1, lemma_a4_antiderivative, pde_residual_order3,
    try_integrate, InversionConfig,
};
use telesum::specfun::hyp2f1_term;
use telesum::sumdist::{
    general_ac_mass, general_atoms, general_pdf_ac, sum_atoms, sum_cdf, sum_charfn, sum_pdf_ac,
    GeneralOptions,
};
use telesum::telegraph::{tele_atoms, tele_cdf, tele_charfn, tele_pdf_ac};
use telesum::{Execution, SeriesControl, SumParams, TelegraphParams};

fn tp(c: f64, l: f64) -> TelegraphParams {
    TelegraphParams::new(c, l).unwrap()
}

#[test]
fn normalization_grid() {
    for l in [2.0, 0.5, 1.0] {
        for t in [0.5, 1.0, 3.0] {
            let p = tp(1.0, l);
            let atoms: f64 = sum_atoms(&p, t).unwrap().iter().map(|a| a.mass).sum();
            let ac = 2.0
                * try_integrate(|x| sum_pdf_ac(&p, x, t), 0.0, 2.0 * t, 1e-12)
                    .unwrap()
                    .value;
            assert!(
                (atoms + ac - 1.0).abs() < 1e-9,
                "λ={l} t={t}: {}",
                atoms + ac
            );
        }
    }
}

#[test]
fn tele_fourier_consistency() {
    let (p, t) = (tp(1.5, 0.8), 1.2);
    let ct = p.c() * t;
    let b = p.lambda() / p.c();
    for xi in [0.1, 1.0, 5.0, b - 0.3, b + 0.3] {
        let half = try_integrate(
            |x| Ok((xi * x).cos() * tele_pdf_ac(&p, x, t)?),
            0.0,
            ct,
            1e-13,
        )
        .unwrap();
        let atoms: f64 = tele_atoms(&p, t)
            .unwrap()
            .iter()
            .map(|a| a.mass * (xi * a.location).cos())
            .sum();
        let lhs = 2.0 * half.value + atoms;
        assert!((lhs - tele_charfn(&p, xi, t)).abs() < 1e-8, "ξ={xi}");
    }
}

#[test]
fn sum_fourier_consistency() {
    let (p, t) = (tp(2.0, 0.8), 1.5);
    let r = 2.0 * p.c() * t;
    let b = p.lambda() / p.c();
    for u in [0.05, 0.2, 0.5, 0.8, 0.99, 1.01, 1.5, 2.0, 4.0, 8.0] {
        let xi = u * b;
        let half = try_integrate(
            |x| Ok((xi * x).cos() * sum_pdf_ac(&p, x, t)?),
            0.0,
            r,
            1e-12,
        )
        .unwrap();
        let atoms: f64 = sum_atoms(&p, t)
            .unwrap()
            .iter()
            .map(|a| a.mass * (xi * a.location).cos())
            .sum();
        assert!(
            (2.0 * half.value + atoms - sum_charfn(&p, xi, t)).abs() < 1e-7,
            "ξ={xi}"
        );
    }
}

#[test]
fn tele_inversion_round_trip() {
    let (p, t) = (tp(1.0, 1.0), 1.0);
    let cfg = InversionConfig::default()
        .with_atoms(&tele_atoms(&p, t).unwrap())
        .with_singular_points(&[-1.0, 1.0])
        .with_tol(1e-6);
    for i in 0..10 {
        let x = -0.45 + 0.1 * i as f64;
        let r = invert_charfn(|xi| Complex64::new(tele_charfn(&p, xi, t), 0.0), &cfg, x).unwrap();
        assert!(
            (r.value.re - tele_pdf_ac(&p, x, t).unwrap()).abs() < 1e-6,
            "x={x}"
        );
        assert!(r.value.im.abs() < 1e-12);
    }
}

#[test]
fn sum_cdf_monotone_dense_grid() {
    let ctrl = SeriesControl::default();
    for (c, l, t) in [(1.0, 1.0, 2.0), (2.0, 0.8, 1.5), (1.0, 4.0, 1.0)] {
        let p = tp(c, l);
        let r = 2.0 * c * t;
        let mut prev = 0.0;
        for i in 0..10_000 {
            let x = -1.01 * r + 2.02 * r * i as f64 / 9_999.0;
            let v = sum_cdf(&p, x, t, &ctrl).unwrap();
            assert!(v >= prev - 1e-13, "x={x}: {v} < {prev}");
            prev = v;
        }
    }
}

#[test]
fn tele_cdf_monotone_and_jump() {
    let ctrl = SeriesControl::default();
    let (p, t) = (tp(1.0, 1.3), 1.7);
    let ct = p.c() * t;
    let mut prev = 0.0;
    for i in 0..1000 {
        let x = -ct - 1.0 + (2.0 * ct + 2.0) * i as f64 / 999.0;
        let v = tele_cdf(&p, x, t, &ctrl).unwrap();
        assert!(v >= prev - 1e-13);
        prev = v;
    }
    let eps = 1e-8 * ct;
    let jump =
        tele_cdf(&p, ct + eps, t, &ctrl).unwrap() - tele_cdf(&p, ct - eps, t, &ctrl).unwrap();
    assert!((jump - (-p.lambda() * t).exp() / 2.0).abs() < 1e-6);
}

#[test]
fn pde_residual_converges_under_halving() {
    let p = tp(1.0, 1.0);
    for xi in [0.7, 3.0] {
        let r: Vec<f64> = [0.1, 0.05, 0.025]
            .iter()
            .map(|&h| pde_residual_order3(&p, xi, 1.0, h).unwrap())
            .collect();
        for w in r.windows(2) {
            let order = (w[0] / w[1]).log2();
            assert!(order >= 1.8, "ξ={xi}: {r:?}");
        }
    }
}

#[test]
fn lemma_a4_derivative_identity() {
    let x = 0.4;
    for (n, k) in [(2u32, 1u32), (4, 2), (6, 3)] {
        for z in [0.5, 1.0, 2.5] {
            let d = central_diff(
                |s| lemma_a4_antiderivative(n, k, x, s).unwrap(),
                z,
                1e-6 * z,
                1,
            )
            .unwrap();
            let f = z.powi(n as i32) * hyp2f1_term(k, 0.5, 1.5, x * x / (z * z)).unwrap();
            assert!(
                (d - f).abs() <= 1e-6 * f.abs(),
                "n={n} k={k} z={z}: {d} vs {f}"
            );
        }
    }
}

#[test]
fn quadrature_error_estimates_are_honest() {
    for n in 0..10 {
        let q = integrate(|x: f64| x.powi(n), 0.0, 1.0, 1e-12).unwrap();
        assert!(
            (q.value - 1.0 / (n + 1) as f64).abs() <= 3.0 * q.abs_error_estimate,
            "n={n}"
        );
    }
    for (a, b) in [
        (0.5, 0.5),
        (1.0, 1.0),
        (1.0, 3.0),
        (2.0, 0.7),
        (3.0, 2.0),
        (0.2, 5.0),
        (4.0, 1.5),
        (1.5, 4.0),
        (2.5, 2.5),
        (5.0, 1.0),
    ] {
        let q = integrate(
            |x: f64| telesum::specfun::bessel_i0(b * ((a - x) * (a + x)).max(0.0).sqrt()).unwrap(),
            -a,
            a,
            1e-10,
        )
        .unwrap();
        assert!(
            (q.value - lemma_a1(a, b)).abs() <= 3.0 * q.abs_error_estimate,
            "a={a} b={b}"
        );
    }
}

#[test]
fn mc_support_and_switched_mass() {
    let (p, t) = (tp(1.0, 0.7), 1.0);
    let cfg = SimConfig::new(17, 100_000, t).unwrap();
    let s = simulate_sum(&SumParams::symmetric(p), &cfg, Execution::Parallel);
    assert!(s.iter().all(|v| v.position.abs() <= 2.0 * p.c() * t));
    let n = s.len() as f64;
    let m = 1.0 - (-2.0 * p.lambda() * t).exp();
    let switched = s.iter().filter(|v| v.event_count > 0).count() as f64;
    assert!(((switched - n * m) / (n * m * (1.0 - m)).sqrt()).abs() < 4.0);
}

#[test]
fn mc_deterministic_across_thread_counts() {
    let sp = SumParams::symmetric(tp(1.0, 1.0));
    let cfg = SimConfig::new(42, 20_000, 2.0).unwrap();
    let reference = simulate_sum(&sp, &cfg, Execution::Sequential);
    for threads in [1, 2, 8] {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .unwrap();
        let got = pool.install(|| simulate_sum(&sp, &cfg, Execution::Parallel));
        assert_eq!(got, reference, "{threads} threads");
        let tele = pool.install(|| simulate_telegraph(&sp.p1(), &cfg, Execution::Parallel));
        assert_eq!(
            tele,
            simulate_telegraph(&sp.p1(), &cfg, Execution::Sequential)
        );
    }
}

#[test]
fn inversion_deterministic_across_thread_counts() {
    let (p, t) = (tp(1.0, 1.0), 2.0);
    let cfg = InversionConfig::default()
        .with_atoms(&sum_atoms(&p, t).unwrap())
        .with_singular_points(&[-4.0, 4.0])
        .with_tol(1e-6);
    let phi = |xi: f64| Complex64::new(sum_charfn(&p, xi, t), 0.0);
    let seq = invert_charfn(phi, &cfg.clone().with_execution(Execution::Sequential), 0.5).unwrap();
    for threads in [1, 2, 8] {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .unwrap();
        let par = pool.install(|| invert_charfn(phi, &cfg, 0.5).unwrap());
        assert_eq!(par.value, seq.value, "{threads} threads");
    }
}

#[test]
fn general_total_mass() {
    let sp = SumParams::new(tp(1.0, 1.0), tp(2.0, 0.5), 0.3, -0.1).unwrap();
    let t = 1.0;
    let (lo, hi) = sp.support(t);
    let atoms: f64 = general_atoms(&sp, t).unwrap().iter().map(|a| a.mass).sum();
    let ac = general_ac_mass(&sp, lo, hi, t, &GeneralOptions::default()).unwrap();
    assert!((atoms + ac - 1.0).abs() < 1e-4, "{}", atoms + ac);
}

#[test]
fn general_symmetric_starts_give_even_density() {
    let sp = SumParams::new(tp(1.0, 1.0), tp(2.0, 1.5), 1.0, -1.0).unwrap();
    let opts = GeneralOptions::default();
    for x in [0.4, 1.3, 2.2] {
        let a = general_pdf_ac(&sp, x, 1.0, &opts).unwrap();
        let b = general_pdf_ac(&sp, -x, 1.0, &opts).unwrap();
        assert!((a - b).abs() < 1e-5, "x={x}: {a} vs {b}");
    }
}

#[test]
fn general_atoms_match_simulation() {
    let sp = SumParams::new(tp(1.0, 1.0), tp(2.0, 0.6), 0.5, 0.0).unwrap();
    let t = 0.8;
    let atoms = general_atoms(&sp, t).unwrap();
    let cfg = SimConfig::new(7, 200_000, t).unwrap();
    let s = simulate_sum(&sp, &cfg, Execution::Parallel);
    for chk in atom_frequencies(&s, &atoms) {
        assert!(chk.z_score.abs() < 4.0, "{chk:?}");
        assert!(chk.observed > 0.0);
    }
}
