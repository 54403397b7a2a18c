//! Width of the energy windows where all four probabilities stay near 1/4.

use super::{check_open_band, evaluate, linspace, Engine};
use crate::error::{Error, Result};
use crate::model::{active_poles, RouterConfig};

/// Step used to walk outward from a pole before bisecting an edge.
pub const SEED_STEP: f64 = 1e-3;
/// Energy resolution of the bisected edges.
const EDGE_RESOLUTION: f64 = 1e-6;
/// Samples used to bracket the degeneracy point inside a plateau.
const CENTER_SAMPLES: usize = 2001;
/// Deviations this close to the minimum are treated as equal.
const NOISE_FLOOR: f64 = 1e-15;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FlatBandReport {
    /// Pole of the atomic potential the plateau grew from.
    pub pole: f64,
    /// Degeneracy point: where the four probabilities come closest to 1/4.
    pub center: f64,
    pub lo: f64,
    pub hi: f64,
    pub tol: f64,
    /// Largest deviation from 1/4 among the accepted energies.
    pub max_dev: f64,
}

impl FlatBandReport {
    pub fn width(&self) -> f64 {
        self.hi - self.lo
    }

    pub fn midpoint(&self) -> f64 {
        0.5 * (self.lo + self.hi)
    }
}

struct Probe<'a> {
    cfg: &'a RouterConfig,
    engine: Engine,
    tol: f64,
}

impl Probe<'_> {
    /// Max deviation from 1/4, or `None` if the point cannot be evaluated.
    fn deviation(&self, energy: f64) -> Option<f64> {
        evaluate(energy, self.cfg, self.engine)
            .ok()
            .map(|p| p.max_quarter_deviation())
    }

    fn accepts(&self, energy: f64) -> Option<f64> {
        self.deviation(energy).filter(|&d| d <= self.tol)
    }

    /// Walks from `start` towards `limit` in steps of `SEED_STEP`, then
    /// bisects the first rejected step. Returns the edge and the largest
    /// accepted deviation.
    fn expand(&self, start: f64, limit: f64) -> (f64, f64) {
        let dir = (limit - start).signum();
        let mut good = start;
        let mut worst = 0.0f64;
        let mut bad = None;
        loop {
            if good == limit {
                break;
            }
            let next = if (limit - good).abs() <= SEED_STEP {
                limit
            } else {
                good + dir * SEED_STEP
            };
            match self.accepts(next) {
                Some(d) => {
                    worst = worst.max(d);
                    good = next;
                }
                None => {
                    bad = Some(next);
                    break;
                }
            }
        }
        if let Some(mut bad) = bad {
            while (bad - good).abs() > EDGE_RESOLUTION {
                let mid = 0.5 * (good + bad);
                match self.accepts(mid) {
                    Some(d) => {
                        worst = worst.max(d);
                        good = mid;
                    }
                    None => bad = mid,
                }
            }
        }
        (good, worst)
    }

    fn offset(&self, energy: f64) -> f64 {
        self.deviation(energy).unwrap_or(f64::INFINITY)
    }

    /// Locates the minimum of the deviation from 1/4 over `[lo, hi]`. Near a
    /// pole the deviation is flat down to rounding noise, so the result is the
    /// midpoint of the interval on which it stays within `NOISE_FLOOR` of the
    /// sampled minimum, with both ends bisected.
    fn degeneracy_point(&self, lo: f64, hi: f64) -> f64 {
        if hi <= lo {
            return lo;
        }
        let grid = linspace(lo, hi, CENTER_SAMPLES);
        let values: Vec<f64> = grid.iter().map(|&e| self.offset(e)).collect();
        let best = values
            .iter()
            .enumerate()
            .fold(0, |b, (i, &v)| if v < values[b] { i } else { b });
        let floor = values[best] + NOISE_FLOOR;
        let inside = |e: f64| self.offset(e) <= floor;
        let mut i0 = best;
        while i0 > 0 && values[i0 - 1] <= floor {
            i0 -= 1;
        }
        let mut i1 = best;
        while i1 + 1 < grid.len() && values[i1 + 1] <= floor {
            i1 += 1;
        }
        let edge = |mut good: f64, outside: Option<f64>| {
            let Some(mut bad) = outside else { return good };
            for _ in 0..60 {
                let mid = 0.5 * (good + bad);
                if inside(mid) {
                    good = mid;
                } else {
                    bad = mid;
                }
            }
            good
        };
        let left = edge(grid[i0], i0.checked_sub(1).map(|i| grid[i]));
        let right = edge(grid[i1], grid.get(i1 + 1).copied());
        0.5 * (left + right)
    }
}

/// For each pole of the atomic potential inside `window`, the widest
/// interval around it on which every probability is within `tol` of 1/4.
pub fn flat_band_width(
    cfg: &RouterConfig,
    tol: f64,
    window: (f64, f64),
    engine: Engine,
) -> Result<Vec<FlatBandReport>> {
    cfg.validate()?;
    if !(tol > 0.0 && tol < 0.25) {
        return Err(Error::InvalidParameter("tol must lie in (0, 0.25)".into()));
    }
    check_open_band(cfg, window.0, window.1)?;
    let probe = Probe { cfg, engine, tol };

    let mut poles = active_poles(cfg);
    poles.retain(|&p| p > window.0 && p < window.1);
    poles.sort_by(|a, b| a.total_cmp(b));

    poles
        .into_iter()
        .map(|pole| {
            let at_pole = evaluate(pole, cfg, engine).map_err(|e| e.at_energy(pole))?;
            let deviation = at_pole.max_quarter_deviation();
            if deviation > tol {
                return Err(Error::NoPlateau {
                    pole,
                    deviation,
                    tol,
                });
            }
            let (lo, worst_lo) = probe.expand(pole, window.0);
            let (hi, worst_hi) = probe.expand(pole, window.1);
            Ok(FlatBandReport {
                pole,
                center: probe.degeneracy_point(lo, hi),
                lo,
                hi,
                tol,
                max_dev: deviation.max(worst_lo).max(worst_hi),
            })
        })
        .collect()
}
