//! Randomized agreement check between the closed form and the direct solver.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::closed_form;
use crate::error::Result;
use crate::model::{poles, RouterConfig};
use crate::oracle;

pub const DEFAULT_SEED: u64 = 0x5eed_2019;
/// Minimum distance of sampled energies from band edges and poles.
pub const EXCLUSION: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ValidationTolerances {
    /// Max absolute difference between closed-form and direct probabilities.
    pub equivalence: f64,
    /// Flow conservation of the closed form.
    pub closed_sum: f64,
    /// Flow conservation of the direct solver.
    pub oracle_sum: f64,
}

impl Default for ValidationTolerances {
    fn default() -> Self {
        Self {
            equivalence: 1e-9,
            closed_sum: 1e-12,
            oracle_sum: 1e-10,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Sample {
    pub energy: f64,
    pub cfg: RouterConfig,
}

/// Random equal-parameter devices: `N` in `1..=20`, `g` in `[0.1, 2]`,
/// `rabi` in `[0, 1.5]`, `omega_e, omega_s` in `[-1, 1]`, and an incident
/// energy drawn uniformly from the open band away from edges and poles.
pub fn random_samples(count: usize, seed: u64) -> Vec<Sample> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| {
            let n = rng.gen_range(1..=20);
            let g = rng.gen_range(0.1..=2.0);
            let rabi = rng.gen_range(0.0..=1.5);
            let we = rng.gen_range(-1.0..=1.0);
            let ws = rng.gen_range(-1.0..=1.0);
            let cfg = RouterConfig::symmetric(0.0, g, n)
                .with_rabi(rabi)
                .with_levels(we, ws);
            let (p_hi, p_lo) = poles(&cfg);
            let (lo, hi) = cfg.band_a();
            let energy = loop {
                let e: f64 = rng.gen_range(lo..hi);
                let clear = [lo, hi, p_hi, p_lo]
                    .iter()
                    .all(|x| (e - x).abs() > EXCLUSION);
                if clear {
                    break e;
                }
            };
            Sample { energy, cfg }
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct ValidationReport {
    pub samples: usize,
    pub max_equivalence: f64,
    /// Sample with the largest closed-form vs. direct difference.
    pub worst: Option<Sample>,
    pub max_closed_sum: f64,
    pub max_oracle_sum: f64,
    /// Largest solver residual relative to the system norm.
    pub max_relative_residual: f64,
    pub max_antisymmetric_dev: f64,
    pub max_symmetric_residual: f64,
    pub violations: usize,
    pub tolerances: ValidationTolerances,
}

impl ValidationReport {
    pub fn passed(&self) -> bool {
        self.violations == 0
    }
}

struct Outcome {
    equivalence: f64,
    closed_sum: f64,
    oracle_sum: f64,
    relative_residual: f64,
    minus_dev: f64,
    plus_res: f64,
}

fn check(sample: &Sample) -> Result<Outcome> {
    let closed = closed_form::scatter(sample.energy, &sample.cfg)?;
    let sol = oracle::oracle_solve(sample.energy, &sample.cfg)?;
    let direct = sol.probabilities(&sample.cfg);
    let (minus_dev, plus_res) = oracle::oracle_sa_check(sample.energy, &sample.cfg)?;
    Ok(Outcome {
        equivalence: closed.max_abs_diff(&direct),
        closed_sum: (closed.sum() - 1.0).abs(),
        oracle_sum: (direct.sum() - 1.0).abs(),
        relative_residual: sol.residual / sol.system_norm,
        minus_dev,
        plus_res,
    })
}

/// Runs every sample through both engines. A sample that fails to evaluate
/// counts as a violation.
pub fn validate(samples: &[Sample], tol: ValidationTolerances) -> ValidationReport {
    let outcomes: Vec<Option<Outcome>> = samples.par_iter().map(|s| check(s).ok()).collect();
    let mut report = ValidationReport {
        samples: samples.len(),
        max_equivalence: 0.0,
        worst: None,
        max_closed_sum: 0.0,
        max_oracle_sum: 0.0,
        max_relative_residual: 0.0,
        max_antisymmetric_dev: 0.0,
        max_symmetric_residual: 0.0,
        violations: 0,
        tolerances: tol,
    };
    for (sample, outcome) in samples.iter().zip(outcomes) {
        let Some(o) = outcome else {
            report.violations += 1;
            continue;
        };
        if o.equivalence > report.max_equivalence || report.worst.is_none() {
            report.max_equivalence = report.max_equivalence.max(o.equivalence);
            report.worst = Some(sample.clone());
        }
        report.max_closed_sum = report.max_closed_sum.max(o.closed_sum);
        report.max_oracle_sum = report.max_oracle_sum.max(o.oracle_sum);
        report.max_relative_residual = report.max_relative_residual.max(o.relative_residual);
        report.max_antisymmetric_dev = report.max_antisymmetric_dev.max(o.minus_dev);
        report.max_symmetric_residual = report.max_symmetric_residual.max(o.plus_res);
        if o.equivalence > tol.equivalence
            || o.closed_sum > tol.closed_sum
            || o.oracle_sum > tol.oracle_sum
        {
            report.violations += 1;
        }
    }
    report
}
