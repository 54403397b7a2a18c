use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("energy {energy} is within {eps:e} of a band edge (cos k = {cos_k})")]
    BandEdge { energy: f64, cos_k: f64, eps: f64 },

    #[error("energy {energy} lies outside the band [{lo}, {hi}] of the incident waveguide")]
    OutsideBand { energy: f64, lo: f64, hi: f64 },

    #[error("closed form requires equal waveguide parameters and couplings: {0}")]
    ClosedFormUnavailable(&'static str),

    #[error("scattering system is singular at E = {energy} (pivot {pivot:e} in column {column})")]
    SingularSystem {
        energy: f64,
        column: usize,
        pivot: f64,
    },

    #[error("no flat band around pole {pole}: deviation {deviation} exceeds tolerance {tol}")]
    NoPlateau { pole: f64, deviation: f64, tol: f64 },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("at E = {energy}: {source}")]
    AtEnergy {
        energy: f64,
        #[source]
        source: Box<Error>,
    },
}

impl Error {
    pub(crate) fn at_energy(self, energy: f64) -> Self {
        match self {
            e @ Error::AtEnergy { .. } => e,
            e => Error::AtEnergy {
                energy,
                source: Box::new(e),
            },
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
