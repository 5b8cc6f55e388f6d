use std::fmt::Write as _;
use std::io::Write as _;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::json;
use telesum::mc::{atom_frequencies, ks_distance, ks_distance_at, simulate_sum, SimConfig};
use telesum::sumdist::{general_law, sum_charfn, sum_law, w_hat, GeneralOptions};
use telesum::table::{default_grid, grid, Column, DistributionTable};
use telesum::telegraph::tele_charfn;
use telesum::verify::{run_verify, VerifyOptions};
use telesum::{Error, Execution, SeriesControl, SumParams, TelegraphParams};

#[derive(Parser)]
#[command(
    name = "telesum",
    version,
    about = "Law of the sum of two telegraph processes"
)]
struct Cli {
    /// Term budget for the series in the distribution function.
    #[arg(long, global = true, env = "TELEGRAPH_MAX_TERMS", value_parser = clap::value_parser!(u64).range(1..))]
    max_terms: Option<u64>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Tabulate the density of the absolutely continuous part (and the CDF).
    Pdf(TableArgs),
    /// Tabulate the distribution function Pr{S < x} (and the density).
    Cdf(TableArgs),
    /// Tabulate the characteristic functions on a frequency grid.
    Charfn(CharfnArgs),
    /// Run the self-check suite.
    Verify(VerifyArgs),
    /// Monte Carlo simulation, optionally compared with the exact law.
    Simulate(SimulateArgs),
    /// Tabulate the law for unequal parameters or shifted starts by
    /// numeric Fourier inversion.
    General(GeneralArgs),
}

#[derive(Args, Clone, Copy)]
struct Params {
    /// Speed of both processes.
    #[arg(long, default_value_t = 1.0, value_parser = positive)]
    c: f64,
    /// Switching rate of both processes.
    #[arg(long, default_value_t = 1.0, value_parser = positive)]
    lambda: f64,
    /// Time.
    #[arg(long, default_value_t = 2.0, value_parser = positive)]
    t: f64,
}

#[derive(Args, Clone, Copy)]
struct GeneralParams {
    #[arg(long, default_value_t = 1.0, value_parser = positive)]
    c1: f64,
    #[arg(long, default_value_t = 1.0, value_parser = positive)]
    lambda1: f64,
    #[arg(long, default_value_t = 1.0, value_parser = positive)]
    c2: f64,
    #[arg(long, default_value_t = 1.0, value_parser = positive)]
    lambda2: f64,
    /// Start point of the first process.
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true, value_parser = finite)]
    x01: f64,
    /// Start point of the second process.
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true, value_parser = finite)]
    x02: f64,
    #[arg(long, default_value_t = 2.0, value_parser = positive)]
    t: f64,
}

#[derive(Args, Clone, Copy)]
struct GridArgs {
    #[arg(long, allow_negative_numbers = true, value_parser = finite)]
    grid_min: Option<f64>,
    #[arg(long, allow_negative_numbers = true, value_parser = finite)]
    grid_max: Option<f64>,
    #[arg(long, value_parser = clap::value_parser!(u64).range(2..=10_000_000))]
    grid_n: Option<u64>,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Csv,
    Json,
    Svg,
}

#[derive(Args)]
struct TableArgs {
    #[command(flatten)]
    params: Params,
    #[command(flatten)]
    grid: GridArgs,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    format: Format,
    /// Relative truncation tolerance of the series.
    #[arg(long, default_value_t = 1e-14, value_parser = positive)]
    tol: f64,
}

#[derive(Args)]
struct CharfnArgs {
    #[command(flatten)]
    params: Params,
    /// Frequency grid; defaults to 201 points on [0, 5λ/c].
    #[command(flatten)]
    grid: GridArgs,
    /// csv or json.
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    format: Format,
}

#[derive(Args)]
struct VerifyArgs {
    #[command(flatten)]
    params: Params,
    #[arg(long, default_value_t = 1e-14, value_parser = positive)]
    tol: f64,
    /// Machine-readable report.
    #[arg(long)]
    json: bool,
    #[arg(long, hide = true)]
    inject_fault: bool,
}

#[derive(Args)]
struct SimulateArgs {
    #[arg(long, default_value_t = 1.0, value_parser = positive)]
    c: f64,
    #[arg(long, default_value_t = 1.0, value_parser = positive)]
    lambda: f64,
    /// Speed of the first process (defaults to --c).
    #[arg(long, value_parser = positive)]
    c1: Option<f64>,
    #[arg(long, value_parser = positive)]
    lambda1: Option<f64>,
    #[arg(long, value_parser = positive)]
    c2: Option<f64>,
    #[arg(long, value_parser = positive)]
    lambda2: Option<f64>,
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true, value_parser = finite)]
    x01: f64,
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true, value_parser = finite)]
    x02: f64,
    #[arg(long, default_value_t = 2.0, value_parser = positive)]
    t: f64,
    #[arg(long, default_value_t = 1_000_000, value_parser = clap::value_parser!(u64).range(1..))]
    paths: u64,
    #[arg(long, default_value_t = 42)]
    seed: u64,
    /// Report the KS distance to the exact law and the atom z-scores.
    #[arg(long)]
    compare: bool,
    /// Exit with status 1 when the KS distance exceeds this value.
    #[arg(long, default_value_t = 0.005, value_parser = positive)]
    ks_threshold: f64,
    /// Inversion tolerance of the model CDF in the general case.
    #[arg(long, default_value_t = 1e-4, value_parser = positive)]
    tol: f64,
    /// Machine-readable report.
    #[arg(long)]
    json: bool,
}

#[derive(Args)]
struct GeneralArgs {
    #[command(flatten)]
    params: GeneralParams,
    /// Defaults to 101 points across the support.
    #[command(flatten)]
    grid: GridArgs,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    format: Format,
    /// Inversion tolerance.
    #[arg(long, default_value_t = 1e-5, value_parser = positive)]
    tol: f64,
    /// Grid points closer than this to an atom or a support end are
    /// skipped; defaults to 1% of the support half-width.
    #[arg(long, value_parser = positive)]
    exclusion: Option<f64>,
}

fn positive(s: &str) -> Result<f64, String> {
    match s.parse::<f64>() {
        Ok(v) if v > 0.0 && v.is_finite() => Ok(v),
        _ => Err(format!("expected a positive number, got `{s}`")),
    }
}

fn finite(s: &str) -> Result<f64, String> {
    match s.parse::<f64>() {
        Ok(v) if v.is_finite() => Ok(v),
        _ => Err(format!("expected a finite number, got `{s}`")),
    }
}

enum Failure {
    Usage(String),
    Numeric(String),
    Check(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::InvalidParameter(_) => Failure::Usage(e.to_string()),
            _ => Failure::Numeric(e.to_string()),
        }
    }
}

fn series_control(tol: f64, max_terms: Option<u64>) -> Result<SeriesControl, Failure> {
    let base = SeriesControl::new(tol, SeriesControl::default().max_terms())?;
    Ok(match max_terms {
        Some(n) => base.with_max_terms(n as usize)?,
        None => base,
    })
}

fn resolve_grid(g: &GridArgs, default: Vec<f64>) -> Result<Vec<f64>, Failure> {
    if g.grid_min.is_none() && g.grid_max.is_none() && g.grid_n.is_none() {
        return Ok(default);
    }
    let lo = g.grid_min.unwrap_or(default[0]);
    let hi = g.grid_max.unwrap_or(default[default.len() - 1]);
    let n = g.grid_n.map_or(default.len(), |n| n as usize);
    Ok(grid(lo, hi, n)?)
}

/// Writes to stdout; a closed pipe (e.g. `| head`) is not an error.
fn emit(text: &str) -> Result<(), Failure> {
    match std::io::stdout().lock().write_all(text.as_bytes()) {
        Err(e) if e.kind() != std::io::ErrorKind::BrokenPipe => {
            Err(Failure::Numeric(format!("writing output: {e}")))
        }
        _ => Ok(()),
    }
}

fn emit_json(doc: &serde_json::Value) -> Result<(), Failure> {
    emit(&(serde_json::to_string_pretty(doc).expect("json value serializes") + "\n"))
}

fn emit_table(table: &DistributionTable, format: Format, column: Column) -> Result<(), Failure> {
    match format {
        Format::Csv => emit(&table.to_csv()),
        Format::Json => emit(&(table.to_json() + "\n")),
        Format::Svg => emit(&table.to_svg(column)),
    }
}

fn cmd_table(a: &TableArgs, column: Column, max_terms: Option<u64>) -> Result<(), Failure> {
    let p = TelegraphParams::new(a.params.c, a.params.lambda)?;
    let xs = resolve_grid(&a.grid, default_grid(&p, a.params.t))?;
    let ctrl = series_control(a.tol, max_terms)?;
    let table = DistributionTable::closed_form(&p, a.params.t, &xs, &ctrl, Execution::Parallel)?;
    emit_table(&table, a.format, column)
}

fn cmd_charfn(a: &CharfnArgs) -> Result<(), Failure> {
    let (c, l, t) = (a.params.c, a.params.lambda, a.params.t);
    let p = TelegraphParams::new(c, l)?;
    let xs = resolve_grid(&a.grid, grid(0.0, 5.0 * l / c, 201)?)?;
    let rows: Vec<[f64; 4]> = xs
        .iter()
        .map(|&xi| {
            [
                xi,
                tele_charfn(&p, xi, t),
                sum_charfn(&p, xi, t),
                w_hat(&p, xi, t),
            ]
        })
        .collect();
    match a.format {
        Format::Csv => {
            let mut out =
                format!("# c,{c:.16e}\n# lambda,{l:.16e}\n# t,{t:.16e}\nxi,h,psi,w_hat\n");
            for r in &rows {
                let _ = writeln!(
                    out,
                    "{:.16e},{:.16e},{:.16e},{:.16e}",
                    r[0], r[1], r[2], r[3]
                );
            }
            emit(&out)
        }
        Format::Json => {
            let rows: Vec<_> = rows
                .iter()
                .map(|r| json!({"xi": r[0], "h": r[1], "psi": r[2], "w_hat": r[3]}))
                .collect();
            emit_json(&json!({"c": c, "lambda": l, "t": t, "rows": rows}))
        }
        Format::Svg => Err(Failure::Usage(
            "charfn supports --format csv or json".into(),
        )),
    }
}

fn cmd_verify(a: &VerifyArgs, max_terms: Option<u64>) -> Result<(), Failure> {
    let p = TelegraphParams::new(a.params.c, a.params.lambda)?;
    let ctrl = series_control(a.tol, max_terms)?;
    let report = run_verify(
        &p,
        a.params.t,
        &ctrl,
        VerifyOptions {
            inject_fault: a.inject_fault,
        },
    )?;
    if a.json {
        emit_json(&json!({"passed": report.passed(), "checks": report.checks}))?;
    } else {
        emit(&report.to_text())?;
    }
    if report.passed() {
        Ok(())
    } else {
        Err(Failure::Check("verification failed".into()))
    }
}

fn cmd_simulate(a: &SimulateArgs, max_terms: Option<u64>) -> Result<(), Failure> {
    let p1 = TelegraphParams::new(a.c1.unwrap_or(a.c), a.lambda1.unwrap_or(a.lambda))?;
    let p2 = TelegraphParams::new(a.c2.unwrap_or(a.c), a.lambda2.unwrap_or(a.lambda))?;
    let sp = SumParams::new(p1, p2, a.x01, a.x02)?;
    let cfg = SimConfig::new(a.seed, a.paths as usize, a.t)?;

    let start = Instant::now();
    let samples = simulate_sum(&sp, &cfg, Execution::Parallel);
    eprintln!(
        "simulated {} paths in {:.2}s",
        a.paths,
        start.elapsed().as_secs_f64()
    );

    let n = samples.len() as f64;
    let switched = samples.iter().filter(|s| s.event_count > 0).count() as f64 / n;
    let mean = samples.iter().map(|s| s.position).sum::<f64>() / n;
    let mut doc = json!({
        "paths": a.paths,
        "seed": a.seed,
        "t": a.t,
        "params": {"c1": p1.c(), "lambda1": p1.lambda(), "c2": p2.c(), "lambda2": p2.lambda(), "x01": a.x01, "x02": a.x02},
        "mean": mean,
        "switched_fraction": switched,
    });
    let mut ks_fail = None;
    if a.compare {
        let start = Instant::now();
        let (law, ks) = if sp.is_closed_form() {
            let ctrl = series_control(1e-14, max_terms)?;
            let law = sum_law(&p1, a.t, ctrl)?;
            let ks = ks_distance(&samples, &law, Execution::Parallel)?;
            (law, ks)
        } else {
            let opts = GeneralOptions {
                tol: a.tol,
                ..GeneralOptions::default()
            };
            let law = general_law(&sp, a.t, opts)?;
            let (lo, hi) = law.support();
            let pts = grid(lo, hi, 101)?;
            let ks = ks_distance_at(&samples, &pts, &law, Execution::Parallel)?;
            (law, ks)
        };
        eprintln!("comparison took {:.2}s", start.elapsed().as_secs_f64());
        let atoms: Vec<_> = atom_frequencies(&samples, law.atoms())
            .iter()
            .map(|c| json!({"location": c.location, "expected": c.expected, "observed": c.observed, "z_score": c.z_score}))
            .collect();
        doc["atoms"] = json!(atoms);
        doc["ks_distance"] = json!(ks);
        doc["ks_threshold"] = json!(a.ks_threshold);
        doc["ks_method"] = json!(if sp.is_closed_form() {
            "closed form"
        } else {
            "inversion, 101 points"
        });
        if ks > a.ks_threshold {
            ks_fail = Some(format!(
                "KS distance {ks:.3e} exceeds threshold {:.3e}",
                a.ks_threshold
            ));
        }
    }

    if a.json {
        emit_json(&doc)?;
    } else {
        emit(&simulate_text(&doc))?;
    }
    match ks_fail {
        Some(m) => Err(Failure::Check(m)),
        None => Ok(()),
    }
}

fn simulate_text(doc: &serde_json::Value) -> String {
    let mut out = String::new();
    let f = |k: &str| doc[k].as_f64().unwrap_or(f64::NAN);
    let p = &doc["params"];
    let g = |k: &str| p[k].as_f64().unwrap_or(f64::NAN);
    let _ = writeln!(out, "paths              {}", doc["paths"]);
    let _ = writeln!(out, "seed               {}", doc["seed"]);
    let _ = writeln!(
        out,
        "params             c1={} lambda1={} c2={} lambda2={} x01={} x02={} t={}",
        g("c1"),
        g("lambda1"),
        g("c2"),
        g("lambda2"),
        g("x01"),
        g("x02"),
        f("t")
    );
    let _ = writeln!(out, "mean               {:.6e}", f("mean"));
    let _ = writeln!(out, "switched fraction  {:.6}", f("switched_fraction"));
    if let Some(atoms) = doc["atoms"].as_array() {
        for a in atoms {
            let v = |k: &str| a[k].as_f64().unwrap_or(f64::NAN);
            let _ = writeln!(
                out,
                "atom {:>+12.6}  expected {:.6}  observed {:.6}  z {:>+.2}",
                v("location"),
                v("expected"),
                v("observed"),
                v("z_score")
            );
        }
        let ks = f("ks_distance");
        let th = f("ks_threshold");
        let _ = writeln!(
            out,
            "ks distance        {:.4e} ({})  threshold {:.1e}  {}",
            ks,
            doc["ks_method"].as_str().unwrap_or(""),
            th,
            if ks <= th { "PASS" } else { "FAIL" }
        );
    }
    out
}

fn cmd_general(a: &GeneralArgs) -> Result<(), Failure> {
    let g = &a.params;
    let sp = SumParams::new(
        TelegraphParams::new(g.c1, g.lambda1)?,
        TelegraphParams::new(g.c2, g.lambda2)?,
        g.x01,
        g.x02,
    )?;
    let (lo, hi) = sp.support(g.t);
    let half = 0.5 * (hi - lo);
    let nudge = 1e-9 * half;
    let xs = resolve_grid(&a.grid, grid(lo + nudge, hi - nudge, 101)?)?;
    let opts = GeneralOptions {
        exclusion: Some(a.exclusion.unwrap_or(0.01 * half)),
        tol: a.tol,
        execution: Execution::Parallel,
    };
    let start = Instant::now();
    let table = DistributionTable::general(&sp, g.t, &xs, &opts)?;
    eprintln!(
        "{} of {} grid points evaluated in {:.2}s",
        table.rows.len(),
        xs.len(),
        start.elapsed().as_secs_f64()
    );
    emit_table(&table, a.format, Column::Pdf)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(2)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    let result = match &cli.command {
        Command::Pdf(a) => cmd_table(a, Column::Pdf, cli.max_terms),
        Command::Cdf(a) => cmd_table(a, Column::Cdf, cli.max_terms),
        Command::Charfn(a) => cmd_charfn(a),
        Command::Verify(a) => cmd_verify(a, cli.max_terms),
        Command::Simulate(a) => cmd_simulate(a, cli.max_terms),
        Command::General(a) => cmd_general(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Usage(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(2)
        }
        Err(Failure::Numeric(m)) | Err(Failure::Check(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(1)
        }
    }
}
