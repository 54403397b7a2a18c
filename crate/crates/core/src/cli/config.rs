//! Flat `key = value` run configuration.
//!
//! Lines are `key = value`; blank lines and lines starting with `#` or `;`
//! are ignored. Unknown keys are rejected. `--set key=value` overrides are
//! applied after the file, in order, so later assignments win. The aliases
//! `omega0`, `xi` and `g` set the corresponding parameter of both waveguides.

use std::path::PathBuf;

use thiserror::Error;

use crate::analysis::{Engine, Observable, SwitchSearch};
use crate::error::Error;
use crate::model::RouterConfig;
use crate::validation::{ValidationTolerances, DEFAULT_SEED};

#[derive(Debug, Error, PartialEq)]
pub enum ConfigError {
    #[error("parse error on line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("invalid override '{assignment}': {message}")]
    Override { assignment: String, message: String },
    #[error("validation error: {0}")]
    Validation(String),
    #[error("cannot read config {path}: {message}")]
    Io { path: String, message: String },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum MapParam {
    #[default]
    Rabi,
    NAtoms,
}

impl MapParam {
    pub fn as_str(self) -> &'static str {
        match self {
            MapParam::Rabi => "rabi",
            MapParam::NAtoms => "n_atoms",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub router: RouterConfig,
    pub engine: Engine,
    pub e_min: f64,
    pub e_max: f64,
    pub n_points: usize,
    pub param: MapParam,
    pub param_min: f64,
    pub param_max: f64,
    pub param_points: usize,
    pub observable: Observable,
    /// Flat-band tolerance on the deviation from 1/4.
    pub tol: f64,
    pub switch: SwitchSearch,
    pub samples: usize,
    pub seed: u64,
    pub validation: ValidationTolerances,
    pub threads: usize,
    pub out: Option<PathBuf>,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            router: RouterConfig::default(),
            engine: Engine::Auto,
            e_min: -1.99,
            e_max: 1.99,
            n_points: 401,
            param: MapParam::Rabi,
            param_min: 0.0,
            param_max: 2.0,
            param_points: 101,
            observable: Observable::TBFwd,
            tol: 0.05,
            switch: SwitchSearch::default(),
            samples: 1000,
            seed: DEFAULT_SEED,
            validation: ValidationTolerances::default(),
            threads: 0,
            out: None,
        }
    }
}

fn num(value: &str) -> Result<f64, String> {
    let v: f64 = value
        .parse()
        .map_err(|_| format!("'{value}' is not a number"))?;
    if v.is_finite() {
        Ok(v)
    } else {
        Err(format!("'{value}' is not finite"))
    }
}

fn count(value: &str) -> Result<usize, String> {
    value
        .parse()
        .map_err(|_| format!("'{value}' is not a non-negative integer"))
}

fn flag(value: &str) -> Result<bool, String> {
    match value {
        "true" | "1" | "yes" => Ok(true),
        "false" | "0" | "no" => Ok(false),
        _ => Err(format!("'{value}' is not a boolean")),
    }
}

impl RunConfig {
    /// Applies one assignment.
    pub fn set(&mut self, key: &str, value: &str) -> Result<(), String> {
        let r = &mut self.router;
        match key {
            "omega0" => {
                let v = num(value)?;
                r.omega_a = v;
                r.omega_b = v;
            }
            "omega_a" => r.omega_a = num(value)?,
            "omega_b" => r.omega_b = num(value)?,
            "xi" => {
                let v = num(value)?;
                r.xi_a = v;
                r.xi_b = v;
            }
            "xi_a" => r.xi_a = num(value)?,
            "xi_b" => r.xi_b = num(value)?,
            "g" => {
                let v = num(value)?;
                r.g_a = v;
                r.g_b = v;
            }
            "g_a" => r.g_a = num(value)?,
            "g_b" => r.g_b = num(value)?,
            "omega_e" => r.omega_e = num(value)?,
            "omega_s" => r.omega_s = num(value)?,
            "nu" => r.nu = num(value)?,
            "apply_nu" => r.apply_nu = flag(value)?,
            "rabi" => r.rabi = num(value)?,
            "n_atoms" => r.n_atoms = count(value)?,
            "eps_pole" => r.tolerances.eps_pole = num(value)?,
            "eps_edge" => r.tolerances.eps_edge = num(value)?,
            "engine" => self.engine = value.parse()?,
            "e_min" => self.e_min = num(value)?,
            "e_max" => self.e_max = num(value)?,
            "n_points" => self.n_points = count(value)?,
            "param" => {
                self.param = match value {
                    "rabi" => MapParam::Rabi,
                    "n_atoms" => MapParam::NAtoms,
                    other => {
                        return Err(format!(
                            "unknown map parameter '{other}' (expected rabi or n_atoms)"
                        ))
                    }
                }
            }
            "param_min" => self.param_min = num(value)?,
            "param_max" => self.param_max = num(value)?,
            "param_points" => self.param_points = count(value)?,
            "observable" => self.observable = value.parse()?,
            "tol" => self.tol = num(value)?,
            "omega_off" => self.switch.omega_off = num(value)?,
            "omega_on_min" => self.switch.omega_on_window.0 = num(value)?,
            "omega_on_max" => self.switch.omega_on_window.1 = num(value)?,
            "orientation" => self.switch.orientation = value.parse()?,
            "contrast_target" => self.switch.target = num(value)?,
            "switch_grid_e" => self.switch.grid_e = count(value)?,
            "switch_grid_omega" => self.switch.grid_omega = count(value)?,
            "switch_min_step" => self.switch.min_step = num(value)?,
            "samples" => self.samples = count(value)?,
            "seed" => {
                self.seed = value
                    .parse()
                    .map_err(|_| format!("'{value}' is not a seed"))?
            }
            "validate_tol" => self.validation.equivalence = num(value)?,
            "threads" => self.threads = count(value)?,
            "out" => self.out = Some(PathBuf::from(value)),
            other => return Err(format!("unknown key '{other}'")),
        }
        Ok(())
    }

    /// Resolved values of every result-affecting key, in a fixed order. Fed
    /// back through [`RunConfig::set`] they reproduce this configuration.
    pub fn entries(&self) -> Vec<(&'static str, String)> {
        let f = |x: f64| format!("{x:.16e}");
        let r = &self.router;
        let s = &self.switch;
        vec![
            ("omega_a", f(r.omega_a)),
            ("omega_b", f(r.omega_b)),
            ("xi_a", f(r.xi_a)),
            ("xi_b", f(r.xi_b)),
            ("g_a", f(r.g_a)),
            ("g_b", f(r.g_b)),
            ("omega_e", f(r.omega_e)),
            ("omega_s", f(r.omega_s)),
            ("nu", f(r.nu)),
            ("apply_nu", r.apply_nu.to_string()),
            ("rabi", f(r.rabi)),
            ("n_atoms", r.n_atoms.to_string()),
            ("eps_pole", f(r.tolerances.eps_pole)),
            ("eps_edge", f(r.tolerances.eps_edge)),
            ("engine", self.engine.to_string()),
            ("e_min", f(self.e_min)),
            ("e_max", f(self.e_max)),
            ("n_points", self.n_points.to_string()),
            ("param", self.param.as_str().to_string()),
            ("param_min", f(self.param_min)),
            ("param_max", f(self.param_max)),
            ("param_points", self.param_points.to_string()),
            ("observable", self.observable.to_string()),
            ("tol", f(self.tol)),
            ("omega_off", f(s.omega_off)),
            ("omega_on_min", f(s.omega_on_window.0)),
            ("omega_on_max", f(s.omega_on_window.1)),
            ("orientation", s.orientation.to_string()),
            ("contrast_target", f(s.target)),
            ("switch_grid_e", s.grid_e.to_string()),
            ("switch_grid_omega", s.grid_omega.to_string()),
            ("switch_min_step", f(s.min_step)),
            ("samples", self.samples.to_string()),
            ("seed", self.seed.to_string()),
            ("validate_tol", f(self.validation.equivalence)),
        ]
    }

    /// Subcommand-independent constraints.
    pub fn validate(&self) -> Result<(), ConfigError> {
        self.router.validate().map_err(|e| match e {
            Error::InvalidParameter(constraint) => ConfigError::Validation(constraint),
            other => ConfigError::Validation(other.to_string()),
        })?;
        let s = &self.switch;
        let checks = [
            (self.e_min < self.e_max, "e_min < e_max"),
            (self.n_points >= 2, "n_points ≥ 2"),
            (self.param_min <= self.param_max, "param_min ≤ param_max"),
            (self.param_points >= 1, "param_points ≥ 1"),
            (self.tol > 0.0 && self.tol < 0.25, "0 < tol < 0.25"),
            (
                s.omega_on_window.0 <= s.omega_on_window.1,
                "omega_on_min ≤ omega_on_max",
            ),
            (s.omega_off >= 0.0, "omega_off ≥ 0"),
            (s.grid_e >= 1 && s.grid_omega >= 1, "switch grids ≥ 1"),
            (s.min_step > 0.0, "switch_min_step > 0"),
            (self.samples >= 1, "samples ≥ 1"),
            (self.validation.equivalence > 0.0, "validate_tol > 0"),
        ];
        for (ok, constraint) in checks {
            if !ok {
                return Err(ConfigError::Validation(constraint.to_string()));
            }
        }
        if self.param == MapParam::NAtoms {
            let integral = |x: f64| x.fract() == 0.0 && x >= 1.0;
            if !(integral(self.param_min) && integral(self.param_max)) {
                return Err(ConfigError::Validation(
                    "n_atoms map bounds must be integers ≥ 1".into(),
                ));
            }
        }
        Ok(())
    }
}

fn split_assignment(text: &str) -> Result<(&str, &str), String> {
    let (key, value) = text
        .split_once('=')
        .ok_or_else(|| "expected key = value".to_string())?;
    let (key, value) = (key.trim(), value.trim());
    if key.is_empty() {
        return Err("empty key".into());
    }
    Ok((key, value))
}

/// Builds a run configuration from config-file text and `key=value`
/// overrides, then validates it.
pub fn parse_config(text: &str, overrides: &[String]) -> Result<RunConfig, ConfigError> {
    let mut cfg = RunConfig::default();
    for (idx, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') || line.starts_with(';') {
            continue;
        }
        let parse_err = |message: String| ConfigError::Parse {
            line: idx + 1,
            message,
        };
        let (key, value) = split_assignment(line).map_err(parse_err)?;
        cfg.set(key, value).map_err(parse_err)?;
    }
    for assignment in overrides {
        let override_err = |message: String| ConfigError::Override {
            assignment: assignment.clone(),
            message,
        };
        let (key, value) = split_assignment(assignment).map_err(override_err)?;
        cfg.set(key, value).map_err(override_err)?;
    }
    cfg.validate()?;
    Ok(cfg)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_file_gives_defaults() {
        let cfg = parse_config("", &[]).unwrap();
        assert_eq!(cfg, RunConfig::default());
        let r = &cfg.router;
        assert_eq!((r.xi_a, r.xi_b), (1.0, 1.0));
        assert_eq!(
            (r.omega_a, r.omega_b, r.omega_e, r.omega_s),
            (0.0, 0.0, 0.0, 0.0)
        );
        assert_eq!(r.rabi, 0.0);
        assert_eq!((r.g_a, r.g_b), (0.5, 0.5));
        assert_eq!(r.n_atoms, 5);
    }

    #[test]
    fn overrides_merge_with_file() {
        let cfg = parse_config(
            "# device\nn_atoms = 12\nrabi = 0.3\n",
            &["rabi=0.85".into()],
        )
        .unwrap();
        assert_eq!(cfg.router.n_atoms, 12);
        assert_eq!(cfg.router.rabi, 0.85);
    }

    #[test]
    fn aliases_set_both_waveguides() {
        let cfg = parse_config("g = 1.5\nomega0 = 0.2\nxi = 2\ng_b = 1.0\n", &[]).unwrap();
        assert_eq!((cfg.router.g_a, cfg.router.g_b), (1.5, 1.0));
        assert_eq!((cfg.router.omega_a, cfg.router.omega_b), (0.2, 0.2));
        assert_eq!((cfg.router.xi_a, cfg.router.xi_b), (2.0, 2.0));
    }

    #[test]
    fn zero_atoms_is_rejected() {
        let err = parse_config("n_atoms = 0\n", &[]).unwrap_err();
        assert_eq!(err, ConfigError::Validation("n_atoms ≥ 1".into()));
    }

    #[test]
    fn errors_carry_line_numbers() {
        let err = parse_config("rabi = 0.2\n\nbogus = 1\n", &[]).unwrap_err();
        assert!(matches!(err, ConfigError::Parse { line: 3, .. }), "{err}");
        let err = parse_config("rabi 0.2\n", &[]).unwrap_err();
        assert!(matches!(err, ConfigError::Parse { line: 1, .. }));
        let err = parse_config("rabi = x\n", &[]).unwrap_err();
        assert!(matches!(err, ConfigError::Parse { line: 1, .. }));
        let err = parse_config("", &["engine=fast".into()]).unwrap_err();
        assert!(matches!(err, ConfigError::Override { .. }));
    }

    #[test]
    fn sections_are_not_flat() {
        assert!(parse_config("[device]\n", &[]).is_err());
    }

    #[test]
    fn entries_replay_the_configuration() {
        let cfg = parse_config(
            "g = 0.7\nrabi = 0.1\nparam = n_atoms\nparam_min = 1\nparam_max = 20\n",
            &["seed=42".into()],
        )
        .unwrap();
        let replay: Vec<String> = cfg
            .entries()
            .iter()
            .map(|(k, v)| format!("{k}={v}"))
            .collect();
        let again = parse_config("", &replay).unwrap();
        assert_eq!(again, cfg);
    }

    #[test]
    fn subcommand_independent_checks() {
        assert_eq!(
            parse_config("tol = 0.3\n", &[]).unwrap_err(),
            ConfigError::Validation("0 < tol < 0.25".into())
        );
        assert!(parse_config("param = n_atoms\nparam_min = 1.5\n", &[]).is_err());
        assert!(parse_config("e_min = 1\ne_max = 0\n", &[]).is_err());
    }
}
