//! Parameters of the automaton and the one-particle field on a periodic ring.

use alloc::vec;
use alloc::vec::Vec;

use num_complex::Complex64;
#[cfg(not(feature = "std"))]
use num_traits::Float;

use crate::error::{Error, Result};

/// Amplitudes `(psi_r, psi_l)` at one site.
pub type Spinor = [Complex64; 2];

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// Mass `m` and hopping amplitude `n = sqrt(1 - m^2)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AutomatonParams {
    m: f64,
    n: f64,
}

impl AutomatonParams {
    pub fn new(m: f64) -> Result<Self> {
        if !(m > 0.0 && m <= 1.0) {
            return Err(Error::MassOutOfRange(m));
        }
        Ok(Self {
            m,
            n: (1.0 - m * m).sqrt(),
        })
    }

    /// The degenerate `m = 0` walk (a pure shift). Only meaningful for
    /// exercising the evolution backends; every mass-dependent analysis
    /// rejects it.
    pub fn massless() -> Self {
        Self { m: 0.0, n: 1.0 }
    }

    #[inline]
    pub fn mass(&self) -> f64 {
        self.m
    }

    #[inline]
    pub fn hopping(&self) -> f64 {
        self.n
    }

    /// Half-width of the gap around zero frequency, `arccos(n)`.
    pub fn gap(&self) -> f64 {
        self.n.acos()
    }

    pub(crate) fn require_mass(&self, what: &'static str) -> Result<()> {
        if self.m > 0.0 {
            Ok(())
        } else {
            Err(Error::MassRequired(what))
        }
    }
}

/// Edge-leakage guard for states that stand in for an infinite lattice.
///
/// The band is the outer `band_fraction` of the ring, split evenly on both
/// sides of the wrap seam between site `N-1` and site `0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LeakageGuard {
    pub band_fraction: f64,
    pub threshold: f64,
}

impl Default for LeakageGuard {
    fn default() -> Self {
        Self {
            band_fraction: 0.05,
            threshold: 1e-8,
        }
    }
}

impl LeakageGuard {
    /// Number of guarded sites at each end of the ring.
    pub fn band_sites(&self, sites: usize) -> usize {
        let total = (self.band_fraction * sites as f64).ceil() as usize;
        (total.div_ceil(2)).min(sites / 2)
    }
}

/// Two complex amplitudes per site of a periodic ring, stored interleaved.
#[derive(Debug, Clone, PartialEq)]
pub struct FieldState {
    amps: Vec<Spinor>,
    /// Lattice coordinate of site index 0.
    pub origin: i64,
    /// Set when the state represents a packet on the infinite lattice.
    pub guard: Option<LeakageGuard>,
}

pub(crate) fn check_ring(sites: usize) -> Result<()> {
    if sites == 0 || !sites.is_multiple_of(2) {
        Err(Error::InvalidRing(sites))
    } else {
        Ok(())
    }
}

impl FieldState {
    pub fn zeros(sites: usize) -> Result<Self> {
        check_ring(sites)?;
        Ok(Self {
            amps: vec![[ZERO; 2]; sites],
            origin: 0,
            guard: None,
        })
    }

    pub fn from_amplitudes(amps: Vec<Spinor>) -> Result<Self> {
        check_ring(amps.len())?;
        Ok(Self {
            amps,
            origin: 0,
            guard: None,
        })
    }

    /// All weight on one site.
    pub fn localized(sites: usize, index: usize, spinor: Spinor) -> Result<Self> {
        let mut state = Self::zeros(sites)?;
        if index >= sites {
            return Err(Error::SiteOutOfRange { index, sites });
        }
        state.amps[index] = spinor;
        Ok(state)
    }

    /// Builds a state from separate right/left component arrays.
    pub fn from_components(right: &[Complex64], left: &[Complex64]) -> Result<Self> {
        if right.len() != left.len() {
            return Err(Error::ShapeMismatch {
                expected: right.len(),
                found: left.len(),
            });
        }
        let amps = right.iter().zip(left).map(|(&r, &l)| [r, l]).collect();
        Self::from_amplitudes(amps)
    }

    pub fn with_origin(mut self, origin: i64) -> Self {
        self.origin = origin;
        self
    }

    pub fn with_guard(mut self, guard: LeakageGuard) -> Self {
        self.guard = Some(guard);
        self
    }

    #[inline]
    pub fn sites(&self) -> usize {
        self.amps.len()
    }

    #[inline]
    pub fn amplitudes(&self) -> &[Spinor] {
        &self.amps
    }

    #[inline]
    pub fn amplitudes_mut(&mut self) -> &mut [Spinor] {
        &mut self.amps
    }

    pub(crate) fn amps_vec_mut(&mut self) -> &mut Vec<Spinor> {
        &mut self.amps
    }

    /// Lattice coordinate of a site index.
    #[inline]
    pub fn position(&self, index: usize) -> i64 {
        self.origin + index as i64
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amps
            .iter()
            .map(|[r, l]| r.norm_sqr() + l.norm_sqr())
            .sum()
    }

    pub fn norm(&self) -> f64 {
        self.norm_sqr().sqrt()
    }

    /// Rescales to unit norm. A zero state is left untouched.
    pub fn normalize(&mut self) {
        let norm = self.norm();
        if norm > 0.0 {
            let inv = 1.0 / norm;
            for s in &mut self.amps {
                s[0] *= inv;
                s[1] *= inv;
            }
        }
    }

    /// `<self|other>`, conjugate-linear in `self`.
    pub fn inner_product(&self, other: &FieldState) -> Result<Complex64> {
        if self.sites() != other.sites() {
            return Err(Error::ShapeMismatch {
                expected: self.sites(),
                found: other.sites(),
            });
        }
        Ok(self
            .amps
            .iter()
            .zip(&other.amps)
            .map(|(a, b)| a[0].conj() * b[0] + a[1].conj() * b[1])
            .sum())
    }

    /// `|psi_r(x)|^2 + |psi_l(x)|^2` per site.
    pub fn density(&self) -> Vec<f64> {
        self.amps
            .iter()
            .map(|[r, l]| r.norm_sqr() + l.norm_sqr())
            .collect()
    }

    /// Probability carried by the sites inside the guard band.
    pub fn edge_mass(&self, guard: &LeakageGuard) -> f64 {
        let band = guard.band_sites(self.sites());
        let n = self.sites();
        let weight = |s: &Spinor| s[0].norm_sqr() + s[1].norm_sqr();
        self.amps[..band].iter().map(weight).sum::<f64>()
            + self.amps[n - band..].iter().map(weight).sum::<f64>()
    }

    /// Fails with [`Error::Leakage`] when a guarded state has reached the seam.
    pub fn check_guard(&self, step: usize) -> Result<()> {
        if let Some(guard) = &self.guard {
            let mass = self.edge_mass(guard);
            if mass > guard.threshold {
                return Err(Error::Leakage {
                    step,
                    mass,
                    threshold: guard.threshold,
                });
            }
        }
        Ok(())
    }

    /// Cyclic translation: site `i` moves to site `i + by`.
    pub fn shifted(&self, by: isize) -> FieldState {
        let n = self.sites() as isize;
        let mut out = self.clone();
        for (i, s) in self.amps.iter().enumerate() {
            let j = (i as isize + by).rem_euclid(n) as usize;
            out.amps[j] = *s;
        }
        out
    }

    /// l2 distance to another state on the same ring.
    pub fn distance(&self, other: &FieldState) -> Result<f64> {
        if self.sites() != other.sites() {
            return Err(Error::ShapeMismatch {
                expected: self.sites(),
                found: other.sites(),
            });
        }
        Ok(self
            .amps
            .iter()
            .zip(&other.amps)
            .map(|(a, b)| (a[0] - b[0]).norm_sqr() + (a[1] - b[1]).norm_sqr())
            .sum::<f64>()
            .sqrt())
    }

    /// Splits into separate right/left component arrays.
    pub fn components(&self) -> (Vec<Complex64>, Vec<Complex64>) {
        self.amps.iter().map(|s| (s[0], s[1])).unzip()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn params_hopping() {
        assert_eq!(AutomatonParams::new(1.0).unwrap().hopping(), 0.0);
        let p = AutomatonParams::new(0.8).unwrap();
        assert!((p.hopping() - 0.6).abs() < 1e-15);
        // sqrt(0.96) to 20 digits: 0.97979589711327123928
        let p = AutomatonParams::new(0.2).unwrap();
        assert!((p.hopping() - 0.979_795_897_113_271_2).abs() < 1e-15);
        for m in [0.01, 0.13, 0.15, 0.4, 0.999] {
            let p = AutomatonParams::new(m).unwrap();
            assert!((p.hopping().powi(2) + p.mass().powi(2) - 1.0).abs() < 1e-15);
        }
    }

    #[test]
    fn params_reject_out_of_range() {
        for m in [0.0, -0.1, 1.5, f64::NAN] {
            assert!(matches!(
                AutomatonParams::new(m),
                Err(Error::MassOutOfRange(_))
            ));
        }
    }

    #[test]
    fn odd_or_empty_ring_rejected() {
        assert_eq!(FieldState::zeros(7), Err(Error::InvalidRing(7)));
        assert_eq!(FieldState::zeros(0), Err(Error::InvalidRing(0)));
    }

    #[test]
    fn norms() {
        let s = FieldState::localized(8, 3, [c(1.0, 0.0), c(0.0, 0.0)]).unwrap();
        assert_eq!(s.norm(), 1.0);
        assert_eq!(FieldState::zeros(8).unwrap().norm(), 0.0);
        let w = 1.0 / (2.0 * 16.0_f64).sqrt();
        let s = FieldState::from_amplitudes(vec![[c(w, 0.0), c(0.0, w)]; 16]).unwrap();
        assert!((s.norm() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn inner_products() {
        let a = FieldState::localized(8, 1, [c(0.6, 0.0), c(0.0, 0.8)]).unwrap();
        assert!((a.inner_product(&a).unwrap() - 1.0).norm() < 1e-15);
        let b = FieldState::localized(8, 2, [c(1.0, 0.0), c(0.0, 0.0)]).unwrap();
        assert_eq!(a.inner_product(&b).unwrap(), c(0.0, 0.0));
        let d = FieldState::zeros(10).unwrap();
        assert_eq!(
            a.inner_product(&d),
            Err(Error::ShapeMismatch {
                expected: 8,
                found: 10
            })
        );
    }

    #[test]
    fn guard_band_mass() {
        let guard = LeakageGuard::default();
        assert_eq!(guard.band_sites(100), 3);
        let s = FieldState::localized(100, 99, [c(1.0, 0.0), c(0.0, 0.0)])
            .unwrap()
            .with_guard(guard);
        assert_eq!(s.edge_mass(&guard), 1.0);
        assert!(matches!(
            s.check_guard(12),
            Err(Error::Leakage { step: 12, .. })
        ));
        let s = FieldState::localized(100, 50, [c(1.0, 0.0), c(0.0, 0.0)])
            .unwrap()
            .with_guard(guard);
        assert!(s.check_guard(0).is_ok());
    }

    #[test]
    fn shift_wraps() {
        let s = FieldState::localized(6, 5, [c(1.0, 0.0), c(0.0, 2.0)]).unwrap();
        let t = s.shifted(2);
        assert_eq!(t.amplitudes()[1], [c(1.0, 0.0), c(0.0, 2.0)]);
        assert_eq!(t.shifted(-2), s);
    }
}
