//! Smooth one-particle states: Gaussian momentum profiles on the positive
//! and negative frequency branches.

use alloc::vec::Vec;
use core::f64::consts::PI;

use num_complex::Complex64;
#[cfg(not(feature = "std"))]
use num_traits::Float;

use crate::error::{Error, Result};
use crate::fourier::{FourierTransform, ModeBasis};
use crate::lattice::{FieldState, LeakageGuard, Spinor};
use crate::spectral::wrap_angle;

/// Minimum number of grid spacings per momentum width.
pub const MIN_MODES_PER_SIGMA: f64 = 8.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Branch {
    /// Eigenvalue `e^{-i w(k)}`, particle.
    Positive,
    /// Eigenvalue `e^{+i w(k)}`, antiparticle.
    Negative,
}

/// `c_+ |psi_+> + c_- |psi_->` with `|psi_s> ~ sum_k g(k) |s>_k |k>`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WavepacketSpec {
    /// Central momentum.
    pub k0: f64,
    /// Momentum-space width: `g(k) = exp(-(k - k0)^2 / (2 sigma^2))`.
    pub sigma: f64,
    pub c_plus: Complex64,
    pub c_minus: Complex64,
    /// Central site index; `None` puts the packet in the middle of the ring.
    pub x0: Option<f64>,
}

impl WavepacketSpec {
    pub fn new(k0: f64, sigma: f64, c_plus: Complex64, c_minus: Complex64) -> Self {
        Self {
            k0,
            sigma,
            c_plus,
            c_minus,
            x0: None,
        }
    }

    /// Pure positive-frequency packet.
    pub fn particle(k0: f64, sigma: f64) -> Self {
        Self::new(
            k0,
            sigma,
            Complex64::new(1.0, 0.0),
            Complex64::new(0.0, 0.0),
        )
    }

    pub fn at(mut self, x0: f64) -> Self {
        self.x0 = Some(x0);
        self
    }

    pub fn center(&self, sites: usize) -> f64 {
        self.x0.unwrap_or((sites / 2) as f64)
    }

    pub fn validate(&self) -> Result<()> {
        let weight = self.c_plus.norm_sqr() + self.c_minus.norm_sqr();
        if !((weight - 1.0).abs() <= 1e-12) {
            return Err(Error::Unnormalized(weight));
        }
        if !(self.sigma > 0.0 && self.sigma.is_finite()) {
            return Err(Error::InvalidArgument(alloc::format!(
                "momentum width {} must be positive",
                self.sigma
            )));
        }
        if !(-PI..=PI).contains(&self.k0) {
            return Err(Error::InvalidArgument(alloc::format!(
                "k0 = {} outside [-pi, pi]",
                self.k0
            )));
        }
        Ok(())
    }

    /// Smallest width the grid of a ring resolves.
    pub fn min_sigma(sites: usize) -> f64 {
        MIN_MODES_PER_SIGMA * 2.0 * PI / sites as f64
    }

    /// The Gaussian profile `g(k)` with periodic distance to `k0`.
    pub fn gaussian(&self, k: f64) -> f64 {
        let d = wrap_angle(k - self.k0);
        (-d * d / (2.0 * self.sigma * self.sigma)).exp()
    }
}

/// Builds the Gaussian packet of `spec`, normalized on the grid, with the
/// default leakage guard attached.
pub fn build_packet<F: FourierTransform>(
    spec: &WavepacketSpec,
    basis: &ModeBasis<F>,
) -> Result<FieldState> {
    build_packet_with_profile(spec, basis, LeakageGuard::default(), |k| {
        Complex64::new(spec.gaussian(k), 0.0)
    })
}

/// Like [`build_packet`] with an arbitrary momentum profile in place of the
/// Gaussian. `spec.sigma` still drives the resolution check.
pub fn build_packet_with_profile<F, P>(
    spec: &WavepacketSpec,
    basis: &ModeBasis<F>,
    guard: LeakageGuard,
    profile: P,
) -> Result<FieldState>
where
    F: FourierTransform,
    P: Fn(f64) -> Complex64,
{
    spec.validate()?;
    let sites = basis.sites();
    let min = WavepacketSpec::min_sigma(sites);
    if spec.sigma < min {
        return Err(Error::Resolution {
            sigma: spec.sigma,
            sites,
            min,
        });
    }
    let x0 = spec.center(sites);
    let modes: Vec<Spinor> = basis
        .modes()?
        .iter()
        .map(|mode| {
            let g = profile(mode.k) * Complex64::from_polar(1.0, -mode.k * x0);
            let a = g * spec.c_plus;
            let b = g * spec.c_minus;
            [
                a * mode.spinor_plus[0] + b * mode.spinor_minus[0],
                a * mode.spinor_plus[1] + b * mode.spinor_minus[1],
            ]
        })
        .collect();
    let mut state = basis.from_momentum(&modes)?.with_guard(guard);
    state.normalize();
    state.check_guard(0)?;
    Ok(state)
}

/// Momentum amplitudes projected on one branch, `<s,k|a_k> |s>_k`.
pub(crate) fn project_modes<F: FourierTransform>(
    modes: &mut [Spinor],
    basis: &ModeBasis<F>,
    branch: Branch,
) -> Result<()> {
    for (a, mode) in modes.iter_mut().zip(basis.modes()?) {
        let chi = match branch {
            Branch::Positive => mode.spinor_plus,
            Branch::Negative => mode.spinor_minus,
        };
        let overlap = chi[0].conj() * a[0] + chi[1].conj() * a[1];
        *a = [chi[0] * overlap, chi[1] * overlap];
    }
    Ok(())
}

/// Projection onto one frequency branch. Origin and guard are carried over.
pub fn branch_project<F: FourierTransform>(
    state: &FieldState,
    basis: &ModeBasis<F>,
    branch: Branch,
) -> Result<FieldState> {
    let mut modes = basis.to_momentum(state)?;
    project_modes(&mut modes, basis, branch)?;
    let mut out = state.clone();
    basis.from_momentum_into(&modes, &mut out)?;
    Ok(out)
}

/// `(||P_+ psi||^2, ||P_- psi||^2)`.
pub fn branch_populations<F: FourierTransform>(
    state: &FieldState,
    basis: &ModeBasis<F>,
) -> Result<(f64, f64)> {
    let modes = basis.to_momentum(state)?;
    let n = basis.sites() as f64;
    let mut plus = 0.0;
    let mut minus = 0.0;
    for (a, mode) in modes.iter().zip(basis.modes()?) {
        let p = mode.spinor_plus[0].conj() * a[0] + mode.spinor_plus[1].conj() * a[1];
        let m = mode.spinor_minus[0].conj() * a[0] + mode.spinor_minus[1].conj() * a[1];
        plus += p.norm_sqr();
        minus += m.norm_sqr();
    }
    Ok((plus / n, minus / n))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fourier::DirectDft;
    use crate::lattice::AutomatonParams;

    fn basis(m: f64, n: usize) -> ModeBasis<DirectDft> {
        ModeBasis::new(AutomatonParams::new(m).unwrap(), n, DirectDft::new(n)).unwrap()
    }

    #[test]
    fn rejects_unnormalized_coefficients() {
        let spec =
            WavepacketSpec::new(0.0, 0.5, Complex64::new(0.7, 0.0), Complex64::new(0.7, 0.0));
        assert!(matches!(
            build_packet(&spec, &basis(0.3, 64)),
            Err(Error::Unnormalized(_))
        ));
    }

    #[test]
    fn rejects_unresolved_width() {
        let spec = WavepacketSpec::particle(0.5, 0.1);
        assert!(matches!(
            build_packet(&spec, &basis(0.3, 64)),
            Err(Error::Resolution { .. })
        ));
    }

    #[test]
    fn rejects_packet_wider_than_ring() {
        // centred next to the seam the packet's tail lands in the guard band
        let spec = WavepacketSpec::particle(0.5, WavepacketSpec::min_sigma(64)).at(1.0);
        assert!(matches!(
            build_packet(&spec, &basis(0.3, 64)),
            Err(Error::Leakage { step: 0, .. })
        ));
    }

    #[test]
    fn packet_is_normalized_and_centred() {
        let spec = WavepacketSpec::particle(0.0, 0.9);
        let s = build_packet(&spec, &basis(0.3, 64)).unwrap();
        assert!((s.norm() - 1.0).abs() < 1e-14);
        assert!(s.guard.is_some());
        let mean: f64 = s
            .density()
            .iter()
            .enumerate()
            .map(|(i, w)| i as f64 * w)
            .sum();
        assert!((mean - 32.0).abs() < 1e-8, "{mean}");
    }

    #[test]
    fn projections_split_the_state() {
        let b = basis(0.4, 64);
        let h = 0.5_f64.sqrt();
        let spec = WavepacketSpec::new(0.3, 0.9, Complex64::new(h, 0.0), Complex64::new(0.0, h));
        let s = build_packet(&spec, &b).unwrap();
        let plus = branch_project(&s, &b, Branch::Positive).unwrap();
        let minus = branch_project(&s, &b, Branch::Negative).unwrap();
        let mut sum = plus.clone();
        for (dst, m) in sum.amplitudes_mut().iter_mut().zip(minus.amplitudes()) {
            dst[0] += m[0];
            dst[1] += m[1];
        }
        assert!(sum.distance(&s).unwrap() < 1e-13);
        let twice = branch_project(&plus, &b, Branch::Positive).unwrap();
        assert!(twice.distance(&plus).unwrap() < 1e-13);
        let (pp, pm) = branch_populations(&s, &b).unwrap();
        assert!((pp - 0.5).abs() < 1e-12 && (pm - 0.5).abs() < 1e-12);
    }
}
