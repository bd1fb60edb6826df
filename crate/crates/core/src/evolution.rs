//! Single steps and repeated evolution of the automaton.
//!
//! Two backends are provided. The stencil works site by site in position
//! space and supports an arbitrary phase potential; the spectral backend
//! multiplies every momentum mode by `U(k)` and only handles free evolution.
//! On the free walk both compute the same unitary and serve as cross-checks
//! of each other.

use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;

use num_complex::Complex64;
#[cfg(not(feature = "std"))]
use num_traits::Float;

use crate::error::{Error, Result};
use crate::fourier::{FourierTransform, ModeBasis};
use crate::lattice::{AutomatonParams, FieldState, Spinor};

/// Position-dependent phase `phi(x)` applied as `diag(e^{-i phi(x)})` before
/// the free step.
#[derive(Debug, Clone, PartialEq)]
pub struct PotentialProfile {
    phases: Vec<f64>,
    factors: Vec<Complex64>,
    free: bool,
}

impl PotentialProfile {
    pub fn zero(sites: usize) -> Self {
        Self::from_phases(vec![0.0; sites])
    }

    /// Per-site phases, reduced into `[0, 2 pi)`.
    pub fn from_phases(phases: Vec<f64>) -> Self {
        let phases: Vec<f64> = phases
            .into_iter()
            .map(|p| p - 2.0 * PI * (p / (2.0 * PI)).floor())
            .collect();
        let factors = phases
            .iter()
            .map(|&p| Complex64::from_polar(1.0, -p))
            .collect();
        let free = phases.iter().all(|&p| p == 0.0);
        Self {
            phases,
            factors,
            free,
        }
    }

    /// `phi` on every site with index `>= barrier`, zero elsewhere.
    pub fn step(sites: usize, phi: f64, barrier: usize) -> Result<Self> {
        if !(0.0..=2.0 * PI).contains(&phi) {
            return Err(Error::InvalidArgument(alloc::format!(
                "step height {phi} outside [0, 2pi]"
            )));
        }
        if barrier >= sites {
            return Err(Error::SiteOutOfRange {
                index: barrier,
                sites,
            });
        }
        Ok(Self::from_phases(
            (0..sites)
                .map(|x| if x >= barrier { phi } else { 0.0 })
                .collect(),
        ))
    }

    pub fn uniform(sites: usize, phi: f64) -> Self {
        Self::from_phases(vec![phi; sites])
    }

    pub fn sites(&self) -> usize {
        self.phases.len()
    }

    pub fn phases(&self) -> &[f64] {
        &self.phases
    }

    pub fn is_zero(&self) -> bool {
        self.free
    }

    fn factors(&self) -> Option<&[Complex64]> {
        if self.free {
            None
        } else {
            Some(&self.factors)
        }
    }
}

/// Writes `U D src` into `dst`, with `D = diag(factors)` when present.
fn stencil_into(
    src: &[Spinor],
    dst: &mut [Spinor],
    p: &AutomatonParams,
    factors: Option<&[Complex64]>,
) {
    let n = p.hopping();
    let mi = Complex64::new(0.0, -p.mass());
    let len = src.len();
    match factors {
        None => {
            for x in 0..len {
                let right = src[(x + 1) % len][0];
                let left = src[(x + len - 1) % len][1];
                let here = src[x];
                dst[x] = [right * n + mi * here[1], mi * here[0] + left * n];
            }
        }
        Some(f) => {
            for x in 0..len {
                let xp = (x + 1) % len;
                let xm = (x + len - 1) % len;
                let here = src[x];
                dst[x] = [
                    f[xp] * src[xp][0] * n + mi * f[x] * here[1],
                    mi * f[x] * here[0] + f[xm] * src[xm][1] * n,
                ];
            }
        }
    }
}

/// One step in position space, with the potential's phase applied first.
pub fn step_stencil(
    state: &FieldState,
    p: &AutomatonParams,
    pot: &PotentialProfile,
) -> Result<FieldState> {
    if pot.sites() != state.sites() {
        return Err(Error::ShapeMismatch {
            expected: state.sites(),
            found: pot.sites(),
        });
    }
    let mut out = state.clone();
    stencil_into(state.amplitudes(), out.amplitudes_mut(), p, pot.factors());
    Ok(out)
}

/// One free step in momentum space: DFT, multiply by `U(k_j)`, inverse DFT.
pub fn step_spectral<F: FourierTransform>(
    state: &FieldState,
    basis: &ModeBasis<F>,
) -> Result<FieldState> {
    let mut out = state.clone();
    spectral_in_place(&mut out, basis)?;
    Ok(out)
}

fn spectral_in_place<F: FourierTransform>(
    state: &mut FieldState,
    basis: &ModeBasis<F>,
) -> Result<()> {
    let mut modes = basis.to_momentum(state)?;
    for (a, u) in modes.iter_mut().zip(basis.walk_matrices()) {
        *a = u.apply(a);
    }
    basis.from_momentum_into(&modes, state)
}

/// Free stepping through a cached momentum basis, object-safe so that
/// [`Backend`] does not carry the transform type.
pub trait SpectralStepper {
    fn params(&self) -> &AutomatonParams;
    fn sites(&self) -> usize;
    fn step_free(&self, state: &mut FieldState) -> Result<()>;
}

impl<F: FourierTransform> SpectralStepper for ModeBasis<F> {
    fn params(&self) -> &AutomatonParams {
        ModeBasis::params(self)
    }
    fn sites(&self) -> usize {
        ModeBasis::sites(self)
    }
    fn step_free(&self, state: &mut FieldState) -> Result<()> {
        spectral_in_place(state, self)
    }
}

#[derive(Clone, Copy)]
pub enum Backend<'a> {
    Stencil,
    Spectral(&'a dyn SpectralStepper),
}

impl core::fmt::Debug for Backend<'_> {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        match self {
            Backend::Stencil => f.write_str("Stencil"),
            Backend::Spectral(_) => f.write_str("Spectral"),
        }
    }
}

#[derive(Debug, Clone, Copy)]
pub struct EvolveOptions<'a> {
    pub backend: Backend<'a>,
    /// Observers and the leakage guard run every `stride` steps and at the end.
    pub stride: usize,
}

impl Default for EvolveOptions<'_> {
    fn default() -> Self {
        Self {
            backend: Backend::Stencil,
            stride: 1,
        }
    }
}

/// Callback receiving `(step, state)`.
pub type Observer<'o> = &'o mut dyn FnMut(usize, &FieldState);

/// Applies `steps` automaton steps.
///
/// Observers see the state at step 0, every `stride` steps, and after the
/// last step. At each of those points a guarded state is checked against its
/// leakage threshold, and the first violation aborts the run.
pub fn evolve(
    mut state: FieldState,
    p: &AutomatonParams,
    pot: &PotentialProfile,
    steps: usize,
    options: &EvolveOptions<'_>,
    observers: &mut [Observer<'_>],
) -> Result<FieldState> {
    if pot.sites() != state.sites() {
        return Err(Error::ShapeMismatch {
            expected: state.sites(),
            found: pot.sites(),
        });
    }
    if let Backend::Spectral(stepper) = options.backend {
        if !pot.is_zero() {
            return Err(Error::UnsupportedPotential);
        }
        if stepper.sites() != state.sites() {
            return Err(Error::ShapeMismatch {
                expected: state.sites(),
                found: stepper.sites(),
            });
        }
        if stepper.params() != p {
            return Err(Error::InvalidArgument(
                "spectral basis built for a different mass".into(),
            ));
        }
    }
    let stride = options.stride.max(1);
    let mut scratch = state.amplitudes().to_vec();

    let visit = |step: usize, state: &FieldState, observers: &mut [Observer<'_>]| -> Result<()> {
        state.check_guard(step)?;
        for obs in observers.iter_mut() {
            obs(step, state);
        }
        Ok(())
    };

    visit(0, &state, observers)?;
    for step in 1..=steps {
        match options.backend {
            Backend::Stencil => {
                stencil_into(state.amplitudes(), &mut scratch, p, pot.factors());
                core::mem::swap(state.amps_vec_mut(), &mut scratch);
            }
            Backend::Spectral(stepper) => stepper.step_free(&mut state)?,
        }
        if step % stride == 0 || step == steps {
            visit(step, &state, observers)?;
        }
    }
    Ok(state)
}
