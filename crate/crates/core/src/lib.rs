//! Single-photon transport through two coupled-resonator waveguides joined
//! by `N` cavities with embedded, externally driven three-level atoms.
//!
//! * [`model`]: parameters, dispersion, atomic potential and its poles.
//! * [`closed_form`]: exact amplitudes via the symmetric/antisymmetric channels.
//! * [`oracle`]: direct dense solve of the stationary equations, any parameters.
//! * [`analysis`]: spectra, maps, flat-band widths and switching search.
//! * [`validation`]: randomized closed-form vs. direct-solve comparison.
//! * [`cli`]: configuration files and the `router` command.

pub mod analysis;
pub mod cli;
pub mod closed_form;
pub mod error;
pub mod model;
pub mod oracle;
pub mod validation;

pub use closed_form::{
    physical_amplitudes, probabilities, sa_amplitudes, scatter, ChannelAmplitudes,
    ScatteringAmplitudes, ScatteringProbabilities,
};
pub use error::{Error, Result};
pub use model::{
    active_poles, dispersion_energy, effective_site_energy, poles, potential,
    wavevector_from_energy, Branch, PoleValue, RouterConfig, Tolerances, WaveVector,
};
pub use oracle::{oracle_sa_check, oracle_scatter, oracle_solve, OracleSolution};
