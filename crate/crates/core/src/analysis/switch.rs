//! Search for an incident energy at which the drive toggles the output
//! waveguide.

use std::fmt;
use std::str::FromStr;

use super::{check_open_band, evaluate, linspace, par_eval, Engine};
use crate::closed_form::ScatteringProbabilities;
use crate::error::{Error, Result};
use crate::model::RouterConfig;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Orientation {
    /// Transmit in `a` with the drive off, transfer forward into `b` with it on.
    #[default]
    Forward,
    /// Transfer into `b` with the drive off, transmit in `a` with it on.
    Reverse,
}

impl Orientation {
    pub fn as_str(self) -> &'static str {
        match self {
            Orientation::Forward => "forward",
            Orientation::Reverse => "reverse",
        }
    }

    fn contrast(self, off: &ScatteringProbabilities, on: &ScatteringProbabilities) -> f64 {
        match self {
            Orientation::Forward => off.t_a.min(on.t_b_fwd),
            Orientation::Reverse => off.t_b_fwd.min(on.t_a),
        }
    }
}

impl fmt::Display for Orientation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Orientation {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "forward" => Ok(Orientation::Forward),
            "reverse" => Ok(Orientation::Reverse),
            other => Err(format!(
                "unknown orientation '{other}' (expected forward or reverse)"
            )),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SwitchSearch {
    pub e_window: (f64, f64),
    pub omega_on_window: (f64, f64),
    pub omega_off: f64,
    pub orientation: Orientation,
    pub target: f64,
    pub grid_e: usize,
    pub grid_omega: usize,
    /// Refinement stops once both coordinate steps fall below this.
    pub min_step: f64,
}

impl Default for SwitchSearch {
    fn default() -> Self {
        Self {
            e_window: (-1.99, 1.99),
            omega_on_window: (0.0, 2.0),
            omega_off: 0.0,
            orientation: Orientation::Forward,
            target: 0.9,
            grid_e: 101,
            grid_omega: 101,
            min_step: 1e-4,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SwitchReport {
    pub orientation: Orientation,
    pub e_star: f64,
    pub omega_off: f64,
    pub omega_on: f64,
    pub t_a_off: f64,
    pub t_bfwd_off: f64,
    pub t_a_on: f64,
    pub t_bfwd_on: f64,
    pub contrast: f64,
    /// Whether `contrast` reached the requested target.
    pub target_reached: bool,
}

struct Objective<'a> {
    cfg: &'a RouterConfig,
    search: &'a SwitchSearch,
    engine: Engine,
}

impl Objective<'_> {
    fn probs(&self, energy: f64, rabi: f64) -> Option<ScatteringProbabilities> {
        evaluate(energy, &self.cfg.clone().with_rabi(rabi), self.engine).ok()
    }

    fn eval(&self, energy: f64, omega_on: f64) -> f64 {
        match (
            self.probs(energy, self.search.omega_off),
            self.probs(energy, omega_on),
        ) {
            (Some(off), Some(on)) => self.search.orientation.contrast(&off, &on),
            _ => f64::NEG_INFINITY,
        }
    }
}

fn clamp(x: f64, window: (f64, f64)) -> f64 {
    x.max(window.0).min(window.1)
}

/// Coarse grid search over `(E, omega_on)` followed by coordinate descent
/// with step halving. Deterministic: ties keep the earliest grid point and
/// the refinement visits neighbours in a fixed order.
///
/// An unreached target is reported through `target_reached`, not as an error.
pub fn find_switch(
    cfg: &RouterConfig,
    search: &SwitchSearch,
    engine: Engine,
) -> Result<SwitchReport> {
    cfg.validate()?;
    check_open_band(cfg, search.e_window.0, search.e_window.1)?;
    let (w_lo, w_hi) = search.omega_on_window;
    let max_rabi = 2.0 * cfg.xi_a;
    if !(0.0 <= w_lo && w_lo <= w_hi && w_hi <= max_rabi) {
        return Err(Error::InvalidParameter(format!(
            "omega_on window [{w_lo}, {w_hi}] must lie within [0, {max_rabi}]"
        )));
    }
    if !(0.0..=max_rabi).contains(&search.omega_off) {
        return Err(Error::InvalidParameter(format!(
            "omega_off must lie within [0, {max_rabi}]"
        )));
    }
    if search.grid_e == 0 || search.grid_omega == 0 || search.min_step <= 0.0 {
        return Err(Error::InvalidParameter(
            "grid sizes ≥ 1 and min_step > 0".into(),
        ));
    }

    let objective = Objective {
        cfg,
        search,
        engine,
    };
    let points = |window: (f64, f64), n: usize| {
        if window.0 == window.1 {
            vec![window.0]
        } else {
            linspace(window.0, window.1, n.max(2))
        }
    };
    let es = points(search.e_window, search.grid_e);
    let ws = points(search.omega_on_window, search.grid_omega);

    let rows = par_eval(&es, |&e| {
        let off = objective.probs(e, search.omega_off);
        Ok(ws
            .iter()
            .map(|&w| match (&off, objective.probs(e, w)) {
                (Some(off), Some(on)) => search.orientation.contrast(off, &on),
                _ => f64::NEG_INFINITY,
            })
            .collect::<Vec<f64>>())
    })?;

    let mut best = (f64::NEG_INFINITY, es[0], ws[0]);
    for (i, row) in rows.iter().enumerate() {
        for (j, &v) in row.iter().enumerate() {
            if v > best.0 {
                best = (v, es[i], ws[j]);
            }
        }
    }
    if best.0 == f64::NEG_INFINITY {
        return Err(Error::InvalidParameter(
            "no grid point could be evaluated".into(),
        ));
    }

    let spacing = |grid: &[f64]| {
        if grid.len() > 1 {
            grid[1] - grid[0]
        } else {
            0.0
        }
    };
    let (mut step_e, mut step_w) = (spacing(&es), spacing(&ws));
    let (mut value, mut e, mut w) = best;
    while step_e.max(step_w) >= search.min_step {
        let candidates = [
            (clamp(e + step_e, search.e_window), w),
            (clamp(e - step_e, search.e_window), w),
            (e, clamp(w + step_w, search.omega_on_window)),
            (e, clamp(w - step_w, search.omega_on_window)),
        ];
        let mut moved = false;
        for (ce, cw) in candidates {
            let v = objective.eval(ce, cw);
            if v > value {
                (value, e, w) = (v, ce, cw);
                moved = true;
            }
        }
        if !moved {
            step_e *= 0.5;
            step_w *= 0.5;
        }
    }

    let off = evaluate(e, &cfg.clone().with_rabi(search.omega_off), engine)?;
    let on = evaluate(e, &cfg.clone().with_rabi(w), engine)?;
    let contrast = search.orientation.contrast(&off, &on);
    Ok(SwitchReport {
        orientation: search.orientation,
        e_star: e,
        omega_off: search.omega_off,
        omega_on: w,
        t_a_off: off.t_a,
        t_bfwd_off: off.t_b_fwd,
        t_a_on: on.t_a,
        t_bfwd_on: on.t_b_fwd,
        contrast,
        target_reached: contrast >= search.target,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fig6_device(omega_s: f64) -> RouterConfig {
        RouterConfig::symmetric(0.0, 0.5, 12).with_levels(0.0, omega_s)
    }

    #[test]
    fn forward_switch_with_strong_drive() {
        let search = SwitchSearch {
            omega_on_window: (0.85, 0.85),
            ..SwitchSearch::default()
        };
        let r = find_switch(&fig6_device(0.0), &search, Engine::ClosedForm).unwrap();
        assert!(r.target_reached, "{r:?}");
        assert!(r.t_a_off >= 0.9 && r.t_bfwd_on >= 0.9);
        assert_eq!(r.omega_on, 0.85);
        assert_eq!(r.contrast, r.t_a_off.min(r.t_bfwd_on));
    }

    #[test]
    fn free_drive_search_finds_a_switch() {
        let r = find_switch(
            &fig6_device(0.0),
            &SwitchSearch::default(),
            Engine::ClosedForm,
        )
        .unwrap();
        assert!(r.contrast >= 0.9, "{r:?}");
        assert!(r.omega_on > 0.0 && r.omega_on <= 2.0);
    }

    #[test]
    fn reverse_switch() {
        let search = SwitchSearch {
            omega_on_window: (1.35, 1.35),
            orientation: Orientation::Reverse,
            ..SwitchSearch::default()
        };
        let r = find_switch(&fig6_device(-0.6), &search, Engine::ClosedForm).unwrap();
        assert!(r.t_bfwd_off >= 0.9 && r.t_a_on >= 0.9, "{r:?}");
        assert_eq!(r.contrast, r.t_bfwd_off.min(r.t_a_on));
    }

    #[test]
    fn no_switching_without_coupling() {
        let cfg = RouterConfig::symmetric(0.0, 0.0, 12);
        let search = SwitchSearch {
            grid_e: 21,
            grid_omega: 21,
            ..SwitchSearch::default()
        };
        let r = find_switch(&cfg, &search, Engine::ClosedForm).unwrap();
        assert!(r.contrast <= 0.5);
        assert!(!r.target_reached);
        assert!(r.t_bfwd_on.abs() < 1e-12);
    }

    #[test]
    fn reproducible() {
        let search = SwitchSearch {
            grid_e: 41,
            grid_omega: 41,
            ..SwitchSearch::default()
        };
        let a = find_switch(&fig6_device(-0.6), &search, Engine::ClosedForm).unwrap();
        let b = find_switch(&fig6_device(-0.6), &search, Engine::ClosedForm).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.e_star.to_bits(), b.e_star.to_bits());
    }

    #[test]
    fn rejects_bad_windows() {
        let cfg = fig6_device(0.0);
        let search = SwitchSearch {
            omega_on_window: (0.0, 2.5),
            ..SwitchSearch::default()
        };
        assert!(find_switch(&cfg, &search, Engine::Auto).is_err());
        let search = SwitchSearch {
            e_window: (-2.0, 0.0),
            ..SwitchSearch::default()
        };
        assert!(find_switch(&cfg, &search, Engine::Auto).is_err());
    }
}
