//! Numerical core for the one-dimensional Dirac quantum cellular automaton.
//!
//! The automaton acts on a two-component field living on a periodic ring of
//! `N` sites. One step couples the right/left modes at each site with the
//! mass `m` and hops them to the neighbouring sites with amplitude
//! `n = sqrt(1 - m^2)`:
//!
//! ```text
//! psi_r'(x) = n psi_r(x+1) - i m psi_l(x)
//! psi_l'(x) = -i m psi_r(x) + n psi_l(x-1)
//! ```
//!
//! The crate provides
//!
//! * closed-form momentum-space objects (walk matrix, dispersion, group
//!   velocity, eigenspinors, effective Hamiltonian) in [`spectral`];
//! * two independent evolution backends, a position-space stencil and a
//!   momentum-space multiply, in [`evolution`];
//! * Gaussian particle/antiparticle wavepackets in [`wavepacket`];
//! * position/momentum expectations and the Zitterbewegung analysis in
//!   [`observables`];
//! * analytic and dynamic step-potential scattering in [`scattering`].
//!
//! The crate is `no_std` (it needs `alloc`). The `std` feature, enabled by
//! default, adds an FFT backed by `rustfft`; without it callers supply their
//! own [`fourier::FourierTransform`] or fall back to [`fourier::DirectDft`].
//!
//! A mode of momentum `k` has spatial profile `e^{ikx}`; with this convention
//! the stencil above acts on it as the matrix
//! `[[n e^{ik}, -i m], [-i m, n e^{-ik}]]`.

#![no_std]
// `!(a > b)` is used on purpose so that NaN takes the failing branch
#![allow(clippy::neg_cmp_op_on_partial_ord)]

extern crate alloc;
#[cfg(feature = "std")]
extern crate std;

pub mod error;
pub mod evolution;
pub mod fourier;
pub mod lattice;
pub mod observables;
pub mod scattering;
pub mod spectral;
pub mod wavepacket;

pub use error::{Error, Result};
pub use evolution::{
    evolve, step_spectral, step_stencil, Backend, EvolveOptions, PotentialProfile,
};
#[cfg(feature = "std")]
pub use fourier::RustFft;
pub use fourier::{DirectDft, FourierTransform, ModeBasis};
pub use lattice::{AutomatonParams, FieldState, LeakageGuard, Spinor};
pub use spectral::{Mat2, ModeData, MomentumGrid};
pub use wavepacket::{Branch, WavepacketSpec};

pub use num_complex::Complex64;

/// Crate version, recorded in run manifests.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
