use super::{check_open_band, evaluate, linspace, par_eval, s_channel_character, Engine};
use crate::closed_form::ScatteringProbabilities;
use crate::error::{Error, Result};
use crate::model::{Branch, RouterConfig};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpectrumRow {
    pub energy: f64,
    pub probs: ScatteringProbabilities,
    /// Symmetric-channel character inside the region; `None` for unequal waveguides.
    pub channel: Option<Branch>,
}

/// Probabilities on `n_points` evenly spaced energies in `[e_lo, e_hi]`.
///
/// Energies on a pole are evaluated through the analytic limit. A failing
/// row aborts the sweep and the error carries its energy.
pub fn spectrum(
    cfg: &RouterConfig,
    e_lo: f64,
    e_hi: f64,
    n_points: usize,
    engine: Engine,
) -> Result<Vec<SpectrumRow>> {
    cfg.validate()?;
    if n_points < 2 {
        return Err(Error::InvalidParameter("n_points ≥ 2".into()));
    }
    if e_lo >= e_hi {
        return Err(Error::InvalidParameter("e_min < e_max".into()));
    }
    check_open_band(cfg, e_lo, e_hi)?;
    let grid = linspace(e_lo, e_hi, n_points);
    par_eval(&grid, |&energy| {
        let probs = evaluate(energy, cfg, engine).map_err(|e| e.at_energy(energy))?;
        Ok(SpectrumRow {
            energy,
            probs,
            channel: s_channel_character(energy, cfg),
        })
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::active_poles;

    #[test]
    fn flat_plateau_around_band_center() {
        let cfg = RouterConfig::symmetric(0.0, 0.5, 5);
        let rows = spectrum(&cfg, -1.9, 1.9, 381, Engine::ClosedForm).unwrap();
        let center = rows.iter().find(|r| r.energy == 0.0).unwrap();
        for p in center.probs.as_array() {
            assert!((p - 0.25).abs() < 1e-12);
        }
        assert_eq!(center.channel, Some(Branch::Evanescent));
        for r in rows.iter().filter(|r| r.energy.abs() <= 0.1) {
            assert!(r.probs.max_quarter_deviation() < 0.05, "{r:?}");
        }
        for r in &rows {
            assert!((r.probs.sum() - 1.0).abs() < 1e-10);
        }
    }

    #[test]
    fn uncoupled_rows_transmit() {
        let cfg = RouterConfig::symmetric(0.0, 0.0, 5).with_rabi(0.4);
        for r in spectrum(&cfg, -1.5, 1.5, 31, Engine::Auto).unwrap() {
            assert!((r.probs.t_a - 1.0).abs() < 1e-12);
            assert_eq!(r.channel, Some(Branch::Propagating));
        }
    }

    #[test]
    fn engines_agree_row_by_row() {
        let cfg = RouterConfig::symmetric(0.0, 0.5, 12).with_levels(0.0, -0.6);
        let a = spectrum(&cfg, -1.95, 1.95, 157, Engine::ClosedForm).unwrap();
        let b = spectrum(&cfg, -1.95, 1.95, 157, Engine::Oracle).unwrap();
        for (x, y) in a.iter().zip(&b) {
            assert_eq!(x.energy, y.energy);
            assert!(
                x.probs.max_abs_diff(&y.probs) < 1e-10,
                "{} {:?} {:?}",
                x.energy,
                x.probs,
                y.probs
            );
        }
    }

    #[test]
    fn pole_rows_are_kept() {
        let cfg = RouterConfig::symmetric(0.0, 0.5, 5).with_rabi(0.2);
        let rows = spectrum(&cfg, -0.4, 0.4, 5, Engine::ClosedForm).unwrap();
        assert_eq!(rows.len(), 5);
        for p in active_poles(&cfg) {
            let r = rows.iter().find(|r| (r.energy - p).abs() < 1e-15).unwrap();
            assert!(r.probs.max_quarter_deviation() < 1e-12);
        }
    }

    #[test]
    fn rejects_bad_windows() {
        let cfg = RouterConfig::default();
        assert!(spectrum(&cfg, -2.0, 1.0, 10, Engine::Auto).is_err());
        assert!(spectrum(&cfg, -1.0, 1.0, 1, Engine::Auto).is_err());
        assert!(spectrum(&cfg, 1.0, -1.0, 10, Engine::Auto).is_err());
    }

    #[test]
    fn row_error_reports_energy() {
        // waveguide b has its band edges at +-0.5, both on the grid
        let mut cfg = RouterConfig::symmetric(0.0, 0.5, 3);
        cfg.xi_b = 0.25;
        let err = spectrum(&cfg, -1.0, 1.0, 5, Engine::Oracle).unwrap_err();
        assert!(
            matches!(err, Error::AtEnergy { energy, .. } if energy == -0.5),
            "{err}"
        );
    }
}
