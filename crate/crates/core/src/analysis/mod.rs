//! Sweeps and derived diagnostics built on the two scattering engines.
//!
//! Every grid cell is evaluated independently and in parallel; results are
//! gathered by index so output order never depends on scheduling.

mod flatband;
mod map;
mod spectrum;
mod switch;

pub use flatband::{flat_band_width, FlatBandReport, SEED_STEP};
pub use map::{map2d, MapGrid, ParamAxis};
pub use spectrum::{spectrum, SpectrumRow};
pub use switch::{find_switch, Orientation, SwitchReport, SwitchSearch};

use rayon::prelude::*;
use std::fmt;
use std::str::FromStr;

use crate::closed_form::{self, ScatteringProbabilities};
use crate::error::{Error, Result};
use crate::model::{effective_site_energy, Branch, PoleValue, RouterConfig};
use crate::oracle;

/// Which solver evaluates a point.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Engine {
    /// Closed form when the parameters allow it, direct solve otherwise.
    #[default]
    Auto,
    ClosedForm,
    Oracle,
}

impl Engine {
    pub fn as_str(self) -> &'static str {
        match self {
            Engine::Auto => "auto",
            Engine::ClosedForm => "closed",
            Engine::Oracle => "oracle",
        }
    }
}

impl fmt::Display for Engine {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Engine {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "auto" => Ok(Engine::Auto),
            "closed" | "closed-form" => Ok(Engine::ClosedForm),
            "oracle" => Ok(Engine::Oracle),
            other => Err(format!(
                "unknown engine '{other}' (expected auto, closed or oracle)"
            )),
        }
    }
}

/// Probability selected for 2D maps.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Observable {
    TBFwd,
    TA,
    RA,
    TBBack,
}

impl Observable {
    pub fn pick(self, p: &ScatteringProbabilities) -> f64 {
        match self {
            Observable::TBFwd => p.t_b_fwd,
            Observable::TA => p.t_a,
            Observable::RA => p.r_a,
            Observable::TBBack => p.t_b_back,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Observable::TBFwd => "T_bfwd",
            Observable::TA => "T_a",
            Observable::RA => "R_a",
            Observable::TBBack => "T_bback",
        }
    }
}

impl fmt::Display for Observable {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Observable {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "T_bfwd" => Ok(Observable::TBFwd),
            "T_a" => Ok(Observable::TA),
            "R_a" => Ok(Observable::RA),
            "T_bback" => Ok(Observable::TBBack),
            other => Err(format!(
                "unknown observable '{other}' (expected T_bfwd, T_a, R_a or T_bback)"
            )),
        }
    }
}

/// Scattering probabilities at one energy with the chosen engine.
pub fn evaluate(
    energy: f64,
    cfg: &RouterConfig,
    engine: Engine,
) -> Result<ScatteringProbabilities> {
    match engine {
        Engine::ClosedForm => closed_form::scatter(energy, cfg),
        Engine::Oracle => oracle::oracle_scatter(energy, cfg),
        Engine::Auto if cfg.is_symmetric() => closed_form::scatter(energy, cfg),
        Engine::Auto => oracle::oracle_scatter(energy, cfg),
    }
}

/// Whether the symmetric channel propagates through the region at `E`.
/// `None` outside the equal-parameter regime, where the channel is undefined.
pub fn s_channel_character(energy: f64, cfg: &RouterConfig) -> Option<Branch> {
    match effective_site_energy(energy, cfg).ok()? {
        PoleValue::Pole => Some(Branch::Evanescent),
        PoleValue::Finite(eps) => {
            let cos_kp = (eps - energy) / (2.0 * cfg.xi_a);
            Some(if cos_kp.abs() < 1.0 {
                Branch::Propagating
            } else {
                Branch::Evanescent
            })
        }
    }
}

/// `n` evenly spaced points from `lo` to `hi` inclusive. A grid symmetric
/// about zero is exactly antisymmetric in floating point.
pub fn linspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    match n {
        0 => Vec::new(),
        1 => vec![lo],
        _ => {
            let m = (n - 1) as f64;
            let mid = 0.5 * (lo + hi);
            let half = 0.5 * (hi - lo);
            (0..n)
                .map(|i| match i {
                    0 => lo,
                    i if i == n - 1 => hi,
                    i => mid + half * ((2 * i) as f64 - m) / m,
                })
                .collect()
        }
    }
}

/// Evaluates `f` on every item in parallel and returns the results in input
/// order. The first failing item (by index) decides the error.
pub(crate) fn par_eval<T, U, F>(items: &[T], f: F) -> Result<Vec<U>>
where
    T: Sync,
    U: Send,
    F: Fn(&T) -> Result<U> + Sync + Send,
{
    let results: Vec<Result<U>> = items.par_iter().map(f).collect();
    results.into_iter().collect()
}

pub(crate) fn check_open_band(cfg: &RouterConfig, lo: f64, hi: f64) -> Result<()> {
    let (band_lo, band_hi) = cfg.band_a();
    if !(lo.is_finite() && hi.is_finite()) || lo > hi {
        return Err(Error::InvalidParameter(format!(
            "energy window [{lo}, {hi}] is not ordered"
        )));
    }
    if lo <= band_lo || hi >= band_hi {
        return Err(Error::InvalidParameter(format!(
            "energy window [{lo}, {hi}] must lie inside the open band ({band_lo}, {band_hi})"
        )));
    }
    Ok(())
}

pub(crate) fn check_monotone(name: &str, grid: &[f64]) -> Result<()> {
    if grid.is_empty() {
        return Err(Error::InvalidParameter(format!("{name} grid is empty")));
    }
    if grid.iter().any(|x| !x.is_finite()) || grid.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::InvalidParameter(format!(
            "{name} grid must be strictly increasing"
        )));
    }
    Ok(())
}
