//! Monte Carlo simulation of telegraph processes and their sums, and a
//! Kolmogorov–Smirnov distance that respects atoms.
//!
//! Every path owns a ChaCha8 stream selected by its index (`2i` and `2i+1`
//! for the two processes of a sum), so results do not depend on how paths
//! are scheduled across threads. Exponential holding times are drawn by
//! inversion, `-ln(1 − U)/λ`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{check_time, Error, Result};
use crate::par::Execution;
use crate::sumdist::{no_switch_location, SumParams};
use crate::telegraph::{Atom, MixedDistribution, TelegraphParams};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub struct SimConfig {
    seed: u64,
    n_paths: usize,
    t_bits: u64,
}

impl SimConfig {
    pub fn new(seed: u64, n_paths: usize, t: f64) -> Result<Self> {
        if n_paths == 0 {
            return Err(Error::InvalidParameter("n_paths must be >= 1".into()));
        }
        check_time(t)?;
        Ok(SimConfig {
            seed,
            n_paths,
            t_bits: t.to_bits(),
        })
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn n_paths(&self) -> usize {
        self.n_paths
    }

    pub fn t(&self) -> f64 {
        f64::from_bits(self.t_bits)
    }
}

/// Terminal position of one path and the number of direction switches.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PathSample {
    pub position: f64,
    pub event_count: u32,
}

fn stream(seed: u64, id: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(id);
    rng
}

/// One path from the origin: `(displacement, initial direction, events)`.
/// The displacement of a path without switches is not computed here.
fn run_path(rng: &mut ChaCha8Rng, c: f64, lambda: f64, t: f64) -> (f64, f64, u32) {
    let d0 = if rng.random_bool(0.5) { 1.0 } else { -1.0 };
    let mut d = d0;
    let mut left = t;
    let mut pos = 0.0;
    let mut events = 0u32;
    loop {
        let u: f64 = rng.random();
        let hold = -(1.0 - u).ln() / lambda;
        if hold >= left {
            pos += d * c * left;
            break;
        }
        pos += d * c * hold;
        left -= hold;
        d = -d;
        events += 1;
    }
    (pos, d0, events)
}

/// Pull a switched path strictly inside `(centre − r, centre + r)`.
fn keep_inside(pos: f64, centre: f64, r: f64) -> f64 {
    let (lo, hi) = (centre - r, centre + r);
    if pos >= hi {
        hi.next_down()
    } else if pos <= lo {
        lo.next_up()
    } else {
        pos
    }
}

/// Terminal positions of `n_paths` independent telegraph paths.
/// Paths without switches sit exactly at `±ct`.
pub fn simulate_telegraph(
    p: &TelegraphParams,
    cfg: &SimConfig,
    exec: Execution,
) -> Vec<PathSample> {
    let (c, l, t) = (p.c(), p.lambda(), cfg.t());
    let ct = c * t;
    exec.map_range(cfg.n_paths, |i| {
        let mut rng = stream(cfg.seed, i as u64);
        let (pos, d0, events) = run_path(&mut rng, c, l, t);
        let position = if events == 0 {
            d0 * ct
        } else {
            keep_inside(pos, 0.0, ct)
        };
        PathSample {
            position,
            event_count: events,
        }
    })
}

/// Terminal positions of `x₁⁰ + X₁(t) + x₂⁰ + X₂(t)`. `event_count` is the
/// total number of switches; when it is zero the position equals the
/// corresponding atom location bit for bit.
pub fn simulate_sum(sp: &SumParams, cfg: &SimConfig, exec: Execution) -> Vec<PathSample> {
    let (p1, p2, t) = (sp.p1(), sp.p2(), cfg.t());
    let x0 = sp.start();
    let reach = p1.c() * t + p2.c() * t;
    exec.map_range(cfg.n_paths, |i| {
        let mut r1 = stream(cfg.seed, 2 * i as u64);
        let mut r2 = stream(cfg.seed, 2 * i as u64 + 1);
        let (s1, d1, n1) = run_path(&mut r1, p1.c(), p1.lambda(), t);
        let (s2, d2, n2) = run_path(&mut r2, p2.c(), p2.lambda(), t);
        let position = if n1 + n2 == 0 {
            no_switch_location(sp, d1, d2, t)
        } else {
            keep_inside(x0 + (s1 + s2), x0, reach)
        };
        PathSample {
            position,
            event_count: n1 + n2,
        }
    })
}

/// Observed versus expected frequency of one atom.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AtomCheck {
    pub location: f64,
    pub expected: f64,
    pub observed: f64,
    /// `(count − N m) / √(N m (1 − m))`.
    pub z_score: f64,
}

/// Compares the frequency of switch-free paths at each atom with its mass.
pub fn atom_frequencies(samples: &[PathSample], atoms: &[Atom]) -> Vec<AtomCheck> {
    let n = samples.len() as f64;
    atoms
        .iter()
        .map(|a| {
            let count = samples
                .iter()
                .filter(|s| s.event_count == 0 && s.position == a.location)
                .count() as f64;
            let var = n * a.mass * (1.0 - a.mass);
            AtomCheck {
                location: a.location,
                expected: a.mass,
                observed: count / n,
                z_score: if var > 0.0 {
                    (count - n * a.mass) / var.sqrt()
                } else {
                    0.0
                },
            }
        })
        .collect()
}

fn sorted_positions(samples: &[PathSample], exec: Execution) -> Vec<f64> {
    let mut v: Vec<f64> = samples.iter().map(|s| s.position).collect();
    exec.sort_f64(&mut v);
    v
}

/// `sup_x |F_N(x) − F(x)|` including both one-sided limits at every jump.
///
/// The supremum is attained at sample points or atoms, where the left
/// limits (`#{< x}/N` against `Pr{S < x}`) and right limits (`#{<= x}/N`
/// against `Pr{S <= x}`) are compared.
pub fn ks_distance(
    samples: &[PathSample],
    law: &MixedDistribution,
    exec: Execution,
) -> Result<f64> {
    if samples.is_empty() {
        return Err(Error::InvalidParameter("no samples".into()));
    }
    let sorted = sorted_positions(samples, exec);
    let mut points: Vec<f64> = sorted.clone();
    points.extend(law.atoms().iter().map(|a| a.location));
    exec.sort_f64(&mut points);
    points.dedup();
    ks_at_points(&sorted, &points, law, exec)
}

/// Like [`ks_distance`] but only at the given points (plus the atoms);
/// used when the model distribution function is expensive.
pub fn ks_distance_at(
    samples: &[PathSample],
    points: &[f64],
    law: &MixedDistribution,
    exec: Execution,
) -> Result<f64> {
    if samples.is_empty() {
        return Err(Error::InvalidParameter("no samples".into()));
    }
    let sorted = sorted_positions(samples, exec);
    let mut pts: Vec<f64> = points.to_vec();
    pts.extend(law.atoms().iter().map(|a| a.location));
    exec.sort_f64(&mut pts);
    pts.dedup();
    ks_at_points(&sorted, &pts, law, exec)
}

fn ks_at_points(
    sorted: &[f64],
    points: &[f64],
    law: &MixedDistribution,
    exec: Execution,
) -> Result<f64> {
    let n = sorted.len() as f64;
    let gaps = exec.map_slice(points, |&x| -> Result<f64> {
        let below = sorted.partition_point(|&v| v < x) as f64;
        let upto = sorted.partition_point(|&v| v <= x) as f64;
        let left = law.cdf(x)?;
        let right = left + law.atom_mass_at(x);
        Ok((below / n - left).abs().max((upto / n - right).abs()))
    });
    let mut d: f64 = 0.0;
    for g in gaps {
        d = d.max(g?);
    }
    Ok(d)
}
