//! Tabulated density and distribution function on a grid, with CSV, JSON
//! and SVG output.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::par::Execution;
use crate::specfun::SeriesControl;
use crate::sumdist::{
    general_atoms, general_cdf, general_pdf_ac, sum_atoms, sum_cdf, sum_pdf_ac, GeneralOptions,
    SumParams,
};
use crate::telegraph::{Atom, TelegraphParams};

pub const TOOL: &str = concat!("telesum ", env!("CARGO_PKG_VERSION"));

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Row {
    pub x: f64,
    pub pdf_ac: f64,
    pub cdf: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DistributionTable {
    pub tool: String,
    /// Model parameters in output order, e.g. `("c", 1.0)`.
    pub params: Vec<(String, f64)>,
    pub t: f64,
    pub atoms: Vec<Atom>,
    pub rows: Vec<Row>,
}

/// `n` equally spaced points on `[lo, hi]`, laid out from the midpoint so
/// that a grid symmetric about 0 is mirrored exactly.
pub fn grid(lo: f64, hi: f64, n: usize) -> Result<Vec<f64>> {
    if n < 2 || !(lo < hi) || !lo.is_finite() || !hi.is_finite() {
        return Err(Error::InvalidParameter(format!(
            "grid needs lo < hi and n >= 2, got [{lo}, {hi}], n={n}"
        )));
    }
    let mid = 0.5 * lo + 0.5 * hi;
    let step = (0.5 * hi - 0.5 * lo) / (n - 1) as f64;
    Ok((0..n)
        .map(|i| match i {
            0 => lo,
            _ if i == n - 1 => hi,
            _ => mid + (2.0 * i as f64 - (n - 1) as f64) * step,
        })
        .collect())
}

/// Default grid: 1001 points on `[-2ct, 2ct]`, endpoints moved inward by
/// `1e-9·ct` so they fall inside the open support.
pub fn default_grid(p: &TelegraphParams, t: f64) -> Vec<f64> {
    let ct = p.c() * t;
    let r = 2.0 * ct - 1e-9 * ct;
    grid(-r, r, 1001).expect("valid default grid")
}

impl DistributionTable {
    /// Closed-form table for two identical processes started at the origin.
    pub fn closed_form(
        p: &TelegraphParams,
        t: f64,
        xs: &[f64],
        ctrl: &SeriesControl,
        exec: Execution,
    ) -> Result<Self> {
        check_grid(xs)?;
        let atoms = sum_atoms(p, t)?;
        let rows = exec.map_slice(xs, |&x| -> Result<Row> {
            Ok(Row {
                x,
                pdf_ac: sum_pdf_ac(p, x, t)?,
                cdf: sum_cdf(p, x, t, ctrl)?,
            })
        });
        Ok(DistributionTable {
            tool: TOOL.to_string(),
            params: vec![("c".into(), p.c()), ("lambda".into(), p.lambda())],
            t,
            atoms,
            rows: rows.into_iter().collect::<Result<_>>()?,
        })
    }

    /// Numerically inverted table for the general case. Grid points closer
    /// to an atom or a support end than the exclusion radius are skipped.
    pub fn general(sp: &SumParams, t: f64, xs: &[f64], opts: &GeneralOptions) -> Result<Self> {
        check_grid(xs)?;
        let atoms = general_atoms(sp, t)?;
        let rows = opts.execution.map_slice(xs, |&x| -> Result<Option<Row>> {
            let inner = GeneralOptions {
                execution: Execution::Sequential,
                ..*opts
            };
            match general_pdf_ac(sp, x, t, &inner) {
                Ok(pdf_ac) => Ok(Some(Row {
                    x,
                    pdf_ac,
                    cdf: general_cdf(sp, x, t, &inner)?,
                })),
                Err(Error::Domain(_)) => Ok(None),
                Err(e) => Err(e),
            }
        });
        let (p1, p2) = (sp.p1(), sp.p2());
        Ok(DistributionTable {
            tool: TOOL.to_string(),
            params: vec![
                ("c1".into(), p1.c()),
                ("lambda1".into(), p1.lambda()),
                ("c2".into(), p2.c()),
                ("lambda2".into(), p2.lambda()),
                ("x01".into(), sp.x01()),
                ("x02".into(), sp.x02()),
            ],
            t,
            atoms,
            rows: rows
                .into_iter()
                .filter_map(|r| r.transpose())
                .collect::<Result<_>>()?,
        })
    }

    pub fn to_csv(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "# tool,{}", self.tool);
        for (k, v) in &self.params {
            let _ = writeln!(s, "# {k},{v:.16e}");
        }
        let _ = writeln!(s, "# t,{:.16e}", self.t);
        for a in &self.atoms {
            let _ = writeln!(s, "# atom,{:.16e},{:.16e}", a.location, a.mass);
        }
        s.push_str("x,pdf_ac,cdf\n");
        for r in &self.rows {
            let _ = writeln!(s, "{:.16e},{:.16e},{:.16e}", r.x, r.pdf_ac, r.cdf);
        }
        s
    }

    pub fn from_csv(text: &str) -> Result<Self> {
        let bad = |line: &str| Error::InvalidParameter(format!("malformed CSV line: {line}"));
        let num = |s: &str, line: &str| s.trim().parse::<f64>().map_err(|_| bad(line));
        let mut table = DistributionTable {
            tool: String::new(),
            params: Vec::new(),
            t: f64::NAN,
            atoms: Vec::new(),
            rows: Vec::new(),
        };
        let mut header_seen = false;
        for line in text.lines().filter(|l| !l.trim().is_empty()) {
            if let Some(meta) = line.strip_prefix("# ") {
                let fields: Vec<&str> = meta.split(',').collect();
                match fields.as_slice() {
                    ["tool", name] => table.tool = name.to_string(),
                    ["t", v] => table.t = num(v, line)?,
                    ["atom", loc, mass] => table.atoms.push(Atom {
                        location: num(loc, line)?,
                        mass: num(mass, line)?,
                    }),
                    [k, v] => table.params.push((k.to_string(), num(v, line)?)),
                    _ => return Err(bad(line)),
                }
            } else if line == "x,pdf_ac,cdf" {
                header_seen = true;
            } else {
                let f: Vec<&str> = line.split(',').collect();
                if !header_seen || f.len() != 3 {
                    return Err(bad(line));
                }
                table.rows.push(Row {
                    x: num(f[0], line)?,
                    pdf_ac: num(f[1], line)?,
                    cdf: num(f[2], line)?,
                });
            }
        }
        if !header_seen {
            return Err(Error::InvalidParameter(
                "CSV header `x,pdf_ac,cdf` missing".into(),
            ));
        }
        Ok(table)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("table serializes")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text)
            .map_err(|e| Error::InvalidParameter(format!("bad JSON table: {e}")))
    }

    /// Minimal standalone SVG chart of one column; atoms are marked as
    /// dots on the x axis.
    pub fn to_svg(&self, column: Column) -> String {
        const W: f64 = 640.0;
        const H: f64 = 400.0;
        const M: f64 = 40.0;
        let ys: Vec<f64> = self.rows.iter().map(|r| column.pick(r)).collect();
        let (x0, x1) = match (self.rows.first(), self.rows.last()) {
            (Some(a), Some(b)) if a.x < b.x => (a.x, b.x),
            _ => (-1.0, 1.0),
        };
        let ymax = ys.iter().copied().fold(0.0, f64::max).max(1e-300);
        let sx = |x: f64| M + (x - x0) / (x1 - x0) * (W - 2.0 * M);
        let sy = |y: f64| H - M - y / ymax * (H - 2.0 * M);
        let mut s = String::new();
        let _ = writeln!(
            s,
            r#"<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" viewBox="0 0 {W} {H}">"#
        );
        let _ = writeln!(s, r#"<rect width="100%" height="100%" fill="white"/>"#);
        let _ = writeln!(
            s,
            r#"<line x1="{M}" y1="{b}" x2="{r}" y2="{b}" stroke="black"/>"#,
            b = H - M,
            r = W - M
        );
        let _ = writeln!(
            s,
            r#"<text x="{M}" y="{ty}" font-size="12">{} (t = {}), max {:.4}</text>"#,
            column.name(),
            self.t,
            ymax,
            ty = M / 2.0
        );
        let pts: Vec<String> = self
            .rows
            .iter()
            .zip(&ys)
            .map(|(r, &y)| format!("{:.2},{:.2}", sx(r.x), sy(y)))
            .collect();
        let _ = writeln!(
            s,
            r#"<polyline fill="none" stroke="steelblue" stroke-width="1.5" points="{}"/>"#,
            pts.join(" ")
        );
        for a in &self.atoms {
            let _ = writeln!(
                s,
                r#"<circle cx="{:.2}" cy="{}" r="3" fill="crimson"/>"#,
                sx(a.location),
                H - M
            );
        }
        s.push_str("</svg>\n");
        s
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Column {
    Pdf,
    Cdf,
}

impl Column {
    fn pick(self, r: &Row) -> f64 {
        match self {
            Column::Pdf => r.pdf_ac,
            Column::Cdf => r.cdf,
        }
    }

    fn name(self) -> &'static str {
        match self {
            Column::Pdf => "pdf_ac",
            Column::Cdf => "cdf",
        }
    }
}

fn check_grid(xs: &[f64]) -> Result<()> {
    if xs.is_empty() || xs.iter().any(|x| !x.is_finite()) || xs.windows(2).any(|w| !(w[0] < w[1])) {
        return Err(Error::InvalidParameter(
            "grid must be finite and strictly increasing".into(),
        ));
    }
    Ok(())
}
