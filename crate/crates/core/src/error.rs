use alloc::string::String;

use crate::scattering::Regime;

pub type Result<T> = core::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("mass {0} out of (0,1]")]
    MassOutOfRange(f64),

    #[error("{0} is undefined for a massless automaton")]
    MassRequired(&'static str),

    #[error("ring size {0} must be even and positive")]
    InvalidRing(usize),

    #[error("ring size mismatch: {expected} sites vs {found}")]
    ShapeMismatch { expected: usize, found: usize },

    #[error("site index {index} outside ring of {sites} sites")]
    SiteOutOfRange { index: usize, sites: usize },

    #[error("degenerate walk spectrum at k = {k}")]
    DegenerateSpectrum { k: f64 },

    #[error("the spectral backend only supports the zero potential")]
    UnsupportedPotential,

    #[error("edge leakage {mass:e} exceeds guard threshold {threshold:e} at step {step}")]
    Leakage {
        step: usize,
        mass: f64,
        threshold: f64,
    },

    #[error("momentum width {sigma} too narrow for a ring of {sites} sites (minimum {min})")]
    Resolution { sigma: f64, sites: usize, min: f64 },

    #[error("branch coefficients have squared norm {0}, expected 1")]
    Unnormalized(f64),

    #[error("incident momentum {k} sits on a band edge (zero group velocity)")]
    DegenerateIncidence { k: f64 },

    #[error("no propagating transmitted wave in the {0:?} regime")]
    WrongRegime(Regime),

    #[error("no detectable oscillation: amplitude {amplitude:e} below floor {floor:e}")]
    InsufficientSignal { amplitude: f64, floor: f64 },

    #[error("reflected and transmitted lobes not separated by step {0}")]
    Inconclusive(usize),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}
