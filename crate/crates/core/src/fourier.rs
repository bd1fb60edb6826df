//! Discrete Fourier transforms on the ring and the cached momentum basis.

use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::lattice::{check_ring, AutomatonParams, FieldState, Spinor};
use crate::spectral::{walk_matrix, Mat2, ModeData, MomentumGrid};

/// Unnormalized DFT pair on `len()` points.
///
/// `forward` computes `X_j = sum_x x_x e^{-2 pi i j x / N}` and `inverse`
/// computes `x_x = sum_j X_j e^{+2 pi i j x / N}`, so `inverse(forward(x)) = N x`.
pub trait FourierTransform {
    fn len(&self) -> usize;
    fn is_empty(&self) -> bool {
        self.len() == 0
    }
    fn forward(&self, buf: &mut [Complex64]);
    fn inverse(&self, buf: &mut [Complex64]);
}

impl<T: FourierTransform + ?Sized> FourierTransform for &T {
    fn len(&self) -> usize {
        (**self).len()
    }
    fn forward(&self, buf: &mut [Complex64]) {
        (**self).forward(buf)
    }
    fn inverse(&self, buf: &mut [Complex64]) {
        (**self).inverse(buf)
    }
}

/// Quadratic-time DFT from a twiddle table. Available without `std`.
#[derive(Debug, Clone)]
pub struct DirectDft {
    twiddles: Vec<Complex64>,
}

impl DirectDft {
    pub fn new(len: usize) -> Self {
        let twiddles = (0..len)
            .map(|j| Complex64::from_polar(1.0, -2.0 * PI * j as f64 / len as f64))
            .collect();
        Self { twiddles }
    }

    fn transform(&self, buf: &mut [Complex64], conjugate: bool) {
        let n = self.twiddles.len();
        assert_eq!(buf.len(), n, "DFT length mismatch");
        let input = buf.to_vec();
        for (j, out) in buf.iter_mut().enumerate() {
            let mut acc = Complex64::new(0.0, 0.0);
            for (x, &v) in input.iter().enumerate() {
                let w = self.twiddles[(j * x) % n];
                acc += v * if conjugate { w.conj() } else { w };
            }
            *out = acc;
        }
    }
}

impl FourierTransform for DirectDft {
    fn len(&self) -> usize {
        self.twiddles.len()
    }
    fn forward(&self, buf: &mut [Complex64]) {
        self.transform(buf, false)
    }
    fn inverse(&self, buf: &mut [Complex64]) {
        self.transform(buf, true)
    }
}

#[cfg(feature = "std")]
mod planned {
    use std::sync::Arc;

    use num_complex::Complex64;
    use rustfft::{Fft, FftPlanner};

    use super::FourierTransform;

    /// FFT plan pair from `rustfft`.
    #[derive(Clone)]
    pub struct RustFft {
        forward: Arc<dyn Fft<f64>>,
        inverse: Arc<dyn Fft<f64>>,
    }

    impl RustFft {
        pub fn new(len: usize) -> Self {
            let mut planner = FftPlanner::new();
            Self {
                forward: planner.plan_fft_forward(len),
                inverse: planner.plan_fft_inverse(len),
            }
        }
    }

    impl core::fmt::Debug for RustFft {
        fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
            f.debug_struct("RustFft")
                .field("len", &self.forward.len())
                .finish()
        }
    }

    impl FourierTransform for RustFft {
        fn len(&self) -> usize {
            self.forward.len()
        }
        fn forward(&self, buf: &mut [Complex64]) {
            self.forward.process(buf)
        }
        fn inverse(&self, buf: &mut [Complex64]) {
            self.inverse.process(buf)
        }
    }
}

#[cfg(feature = "std")]
pub use planned::RustFft;

/// Per-momentum data for one ring size and mass, plus the transform used to
/// move between position and momentum space.
///
/// Momentum amplitudes follow the forward DFT: `a_j = sum_x psi(x) e^{-i k_j x}`,
/// so `psi(x) = (1/N) sum_j a_j e^{i k_j x}`.
#[derive(Debug, Clone)]
pub struct ModeBasis<F> {
    params: AutomatonParams,
    grid: MomentumGrid,
    walk: Vec<Mat2>,
    modes: core::result::Result<Vec<ModeData>, Error>,
    fft: F,
}

#[cfg(feature = "std")]
impl ModeBasis<RustFft> {
    /// Basis backed by a `rustfft` plan.
    pub fn planned(params: AutomatonParams, sites: usize) -> Result<Self> {
        check_ring(sites)?;
        Self::new(params, sites, RustFft::new(sites))
    }
}

impl<F: FourierTransform> ModeBasis<F> {
    pub fn new(params: AutomatonParams, sites: usize, fft: F) -> Result<Self> {
        check_ring(sites)?;
        if fft.len() != sites {
            return Err(Error::ShapeMismatch {
                expected: sites,
                found: fft.len(),
            });
        }
        let grid = MomentumGrid::new(sites)?;
        let walk = grid
            .points()
            .iter()
            .map(|&k| walk_matrix(k, &params))
            .collect();
        let modes = grid
            .points()
            .iter()
            .map(|&k| ModeData::new(k, &params))
            .collect();
        Ok(Self {
            params,
            grid,
            walk,
            modes,
            fft,
        })
    }

    pub fn params(&self) -> &AutomatonParams {
        &self.params
    }

    pub fn sites(&self) -> usize {
        self.grid.len()
    }

    pub fn grid(&self) -> &MomentumGrid {
        &self.grid
    }

    pub fn walk_matrices(&self) -> &[Mat2] {
        &self.walk
    }

    /// Closed-form data on every grid momentum. Fails for the massless walk,
    /// whose spectrum is degenerate at `k = 0`.
    pub fn modes(&self) -> Result<&[ModeData]> {
        self.modes.as_deref().map_err(Clone::clone)
    }

    pub fn transform(&self) -> &F {
        &self.fft
    }

    pub(crate) fn check(&self, state: &FieldState) -> Result<()> {
        if state.sites() != self.sites() {
            return Err(Error::ShapeMismatch {
                expected: self.sites(),
                found: state.sites(),
            });
        }
        Ok(())
    }

    /// Forward DFT of both components.
    pub fn to_momentum(&self, state: &FieldState) -> Result<Vec<Spinor>> {
        self.check(state)?;
        let (mut r, mut l) = state.components();
        self.fft.forward(&mut r);
        self.fft.forward(&mut l);
        Ok(r.into_iter().zip(l).map(|(a, b)| [a, b]).collect())
    }

    /// Inverse of [`ModeBasis::to_momentum`], written into `state`.
    pub fn from_momentum_into(&self, modes: &[Spinor], state: &mut FieldState) -> Result<()> {
        self.check(state)?;
        let n = self.sites();
        let mut r: Vec<Complex64> = modes.iter().map(|s| s[0]).collect();
        let mut l: Vec<Complex64> = modes.iter().map(|s| s[1]).collect();
        self.fft.inverse(&mut r);
        self.fft.inverse(&mut l);
        let scale = 1.0 / n as f64;
        for ((dst, a), b) in state.amplitudes_mut().iter_mut().zip(r).zip(l) {
            *dst = [a * scale, b * scale];
        }
        Ok(())
    }

    /// Fresh state from momentum amplitudes; origin and guard are unset.
    pub fn from_momentum(&self, modes: &[Spinor]) -> Result<FieldState> {
        let mut state =
            FieldState::from_amplitudes(vec![[Complex64::new(0.0, 0.0); 2]; self.sites()])?;
        self.from_momentum_into(modes, &mut state)?;
        Ok(state)
    }

    /// `|a_j|^2 / N`, the probability carried by each grid momentum.
    pub fn spectral_weights(&self, state: &FieldState) -> Result<Vec<f64>> {
        let n = self.sites() as f64;
        Ok(self
            .to_momentum(state)?
            .iter()
            .map(|s| (s[0].norm_sqr() + s[1].norm_sqr()) / n)
            .collect())
    }
}

/// Modes of a scalar sequence under a transform, used by tests and by
/// callers that only need a single component.
pub fn forward_copy<F: FourierTransform>(fft: &F, data: &[Complex64]) -> Vec<Complex64> {
    let mut buf = data.to_vec();
    fft.forward(&mut buf);
    buf
}
