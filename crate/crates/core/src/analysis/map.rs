use super::{check_monotone, check_open_band, evaluate, par_eval, Engine, Observable};
use crate::error::{Error, Result};
use crate::model::RouterConfig;

/// Parameter varied along the second map axis.
#[derive(Debug, Clone, PartialEq)]
pub enum ParamAxis {
    Rabi(Vec<f64>),
    NAtoms(Vec<usize>),
}

impl ParamAxis {
    pub fn name(&self) -> &'static str {
        match self {
            ParamAxis::Rabi(_) => "rabi",
            ParamAxis::NAtoms(_) => "n_atoms",
        }
    }

    pub fn values(&self) -> Vec<f64> {
        match self {
            ParamAxis::Rabi(v) => v.clone(),
            ParamAxis::NAtoms(v) => v.iter().map(|&n| n as f64).collect(),
        }
    }

    fn len(&self) -> usize {
        match self {
            ParamAxis::Rabi(v) => v.len(),
            ParamAxis::NAtoms(v) => v.len(),
        }
    }

    fn apply(&self, cfg: &RouterConfig, idx: usize) -> RouterConfig {
        match self {
            ParamAxis::Rabi(v) => cfg.clone().with_rabi(v[idx]),
            ParamAxis::NAtoms(v) => cfg.clone().with_n_atoms(v[idx]),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MapGrid {
    pub e_axis: Vec<f64>,
    pub param: &'static str,
    pub param_axis: Vec<f64>,
    pub observable: Observable,
    /// `values[i][j]` at `e_axis[i]`, `param_axis[j]`.
    pub values: Vec<Vec<f64>>,
}

/// Dense evaluation of one observable over an energy × parameter grid.
pub fn map2d(
    cfg: &RouterConfig,
    e_grid: &[f64],
    axis: &ParamAxis,
    observable: Observable,
    engine: Engine,
) -> Result<MapGrid> {
    cfg.validate()?;
    check_monotone("energy", e_grid)?;
    check_open_band(cfg, e_grid[0], e_grid[e_grid.len() - 1])?;
    let param_axis = axis.values();
    check_monotone(axis.name(), &param_axis)?;
    match axis {
        ParamAxis::Rabi(v) if v[0] < 0.0 => return Err(Error::InvalidParameter("rabi ≥ 0".into())),
        ParamAxis::NAtoms(v) if v[0] < 1 => {
            return Err(Error::InvalidParameter("n_atoms ≥ 1".into()))
        }
        _ => {}
    }

    let configs: Vec<RouterConfig> = (0..axis.len()).map(|j| axis.apply(cfg, j)).collect();
    let np = configs.len();
    let cells: Vec<(usize, usize)> = (0..e_grid.len())
        .flat_map(|i| (0..np).map(move |j| (i, j)))
        .collect();
    let flat = par_eval(&cells, |&(i, j)| {
        let energy = e_grid[i];
        evaluate(energy, &configs[j], engine)
            .map(|p| observable.pick(&p))
            .map_err(|e| e.at_energy(energy))
    })?;
    let values = flat.chunks(np).map(|row| row.to_vec()).collect();
    Ok(MapGrid {
        e_axis: e_grid.to_vec(),
        param: axis.name(),
        param_axis,
        observable,
        values,
    })
}
