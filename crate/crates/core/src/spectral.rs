//! Closed-form momentum-space description of the automaton.
//!
//! For each momentum `k` the step acts as the 2x2 unitary
//! `U(k) = [[n e^{ik}, -i m], [-i m, n e^{-ik}]]` whose eigenvalues are
//! `e^{-i s w(k)}` with `w(k) = arccos(n cos k)` and `s = +1` (positive
//! frequency, particle) or `s = -1` (negative frequency, antiparticle).

use alloc::vec::Vec;
use core::f64::consts::PI;
use core::ops::{Add, Mul, Sub};

use num_complex::Complex64;
#[cfg(not(feature = "std"))]
use num_traits::Float;

use crate::error::{Error, Result};
use crate::lattice::{check_ring, AutomatonParams, Spinor};

/// Dense 2x2 complex matrix, row major.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Mat2(pub [[Complex64; 2]; 2]);

impl Mat2 {
    pub fn identity() -> Self {
        let one = Complex64::new(1.0, 0.0);
        let zero = Complex64::new(0.0, 0.0);
        Mat2([[one, zero], [zero, one]])
    }

    pub fn pauli_x() -> Self {
        let one = Complex64::new(1.0, 0.0);
        let zero = Complex64::new(0.0, 0.0);
        Mat2([[zero, one], [one, zero]])
    }

    pub fn pauli_z() -> Self {
        let one = Complex64::new(1.0, 0.0);
        let zero = Complex64::new(0.0, 0.0);
        Mat2([[one, zero], [zero, -one]])
    }

    pub fn adjoint(&self) -> Self {
        let a = &self.0;
        Mat2([
            [a[0][0].conj(), a[1][0].conj()],
            [a[0][1].conj(), a[1][1].conj()],
        ])
    }

    pub fn scale(&self, s: Complex64) -> Self {
        let a = &self.0;
        Mat2([[a[0][0] * s, a[0][1] * s], [a[1][0] * s, a[1][1] * s]])
    }

    pub fn apply(&self, v: &Spinor) -> Spinor {
        let a = &self.0;
        [
            a[0][0] * v[0] + a[0][1] * v[1],
            a[1][0] * v[0] + a[1][1] * v[1],
        ]
    }

    pub fn trace(&self) -> Complex64 {
        self.0[0][0] + self.0[1][1]
    }

    /// Largest absolute entry.
    pub fn max_abs(&self) -> f64 {
        self.0
            .iter()
            .flatten()
            .map(|z| z.norm())
            .fold(0.0, f64::max)
    }
}

impl Mul for Mat2 {
    type Output = Mat2;
    fn mul(self, b: Mat2) -> Mat2 {
        let a = &self.0;
        let b = &b.0;
        let mut out = [[Complex64::new(0.0, 0.0); 2]; 2];
        for (i, row) in out.iter_mut().enumerate() {
            for (j, entry) in row.iter_mut().enumerate() {
                *entry = a[i][0] * b[0][j] + a[i][1] * b[1][j];
            }
        }
        Mat2(out)
    }
}

impl Add for Mat2 {
    type Output = Mat2;
    fn add(self, b: Mat2) -> Mat2 {
        let (a, b) = (&self.0, &b.0);
        Mat2([
            [a[0][0] + b[0][0], a[0][1] + b[0][1]],
            [a[1][0] + b[1][0], a[1][1] + b[1][1]],
        ])
    }
}

impl Sub for Mat2 {
    type Output = Mat2;
    fn sub(self, b: Mat2) -> Mat2 {
        let (a, b) = (&self.0, &b.0);
        Mat2([
            [a[0][0] - b[0][0], a[0][1] - b[0][1]],
            [a[1][0] - b[1][0], a[1][1] - b[1][1]],
        ])
    }
}

/// `U(k)`, the single-step matrix acting on the `e^{ikx}` mode.
pub fn walk_matrix(k: f64, p: &AutomatonParams) -> Mat2 {
    let n = p.hopping();
    let off = Complex64::new(0.0, -p.mass());
    Mat2([
        [Complex64::from_polar(n, k), off],
        [off, Complex64::from_polar(n, -k)],
    ])
}

/// `w(k) = arccos(n cos k)`, the phase advance per step of the positive branch.
pub fn dispersion(k: f64, p: &AutomatonParams) -> f64 {
    (p.hopping() * k.cos()).clamp(-1.0, 1.0).acos()
}

/// `v(k) = dw/dk = n sin k / sqrt(1 - n^2 cos^2 k)`.
pub fn group_velocity(k: f64, p: &AutomatonParams) -> f64 {
    let n = p.hopping();
    let c = n * k.cos();
    n * k.sin() / (1.0 - c * c).sqrt()
}

/// Normalized eigenvectors of [`walk_matrix`] for eigenvalues `e^{-iw}`
/// (`.0`) and `e^{+iw}` (`.1`).
///
/// Gauge: the upper (`r`) component is real and non-negative; when it
/// vanishes the lower component is real and positive.
pub fn eigenspinors(k: f64, p: &AutomatonParams) -> Result<(Spinor, Spinor)> {
    let u = walk_matrix(k, p);
    let w = dispersion(k, p);
    let plus =
        eigenvector(&u, Complex64::from_polar(1.0, -w)).ok_or(Error::DegenerateSpectrum { k })?;
    let minus =
        eigenvector(&u, Complex64::from_polar(1.0, w)).ok_or(Error::DegenerateSpectrum { k })?;
    if (plus[0].conj() * minus[0] + plus[1].conj() * minus[1]).norm() > 1e-8 {
        return Err(Error::DegenerateSpectrum { k });
    }
    Ok((plus, minus))
}

pub(crate) fn eigenvector(u: &Mat2, lambda: Complex64) -> Option<Spinor> {
    let a = &u.0;
    // Each row of (U - lambda) gives a null vector candidate; keep the better conditioned one.
    let from_top = [a[0][1], lambda - a[0][0]];
    let from_bottom = [lambda - a[1][1], a[1][0]];
    let size = |v: &Spinor| (v[0].norm_sqr() + v[1].norm_sqr()).sqrt();
    let (v, norm) = if size(&from_top) >= size(&from_bottom) {
        (from_top, size(&from_top))
    } else {
        (from_bottom, size(&from_bottom))
    };
    if norm < 1e-12 {
        return None;
    }
    let v = [v[0] / norm, v[1] / norm];
    let gauge = if v[0].norm() > 1e-14 { v[0] } else { v[1] };
    let phase = gauge.conj() / gauge.norm();
    Some([v[0] * phase, v[1] * phase])
}

/// `H(k) = (w / sin w) (-n sin k sigma_z + m sigma_x)`, the generator with
/// `exp(-i H(k)) = U(k)`. Analysis only.
pub fn effective_hamiltonian(k: f64, p: &AutomatonParams) -> Result<Mat2> {
    p.require_mass("effective Hamiltonian")?;
    let w = dispersion(k, p);
    let factor = w / w.sin();
    let z = Mat2::pauli_z().scale(Complex64::new(-p.hopping() * k.sin(), 0.0));
    let x = Mat2::pauli_x().scale(Complex64::new(p.mass(), 0.0));
    Ok((z + x).scale(Complex64::new(factor, 0.0)))
}

/// Everything the closed forms say about one momentum.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModeData {
    pub k: f64,
    pub omega: f64,
    pub v: f64,
    pub spinor_plus: Spinor,
    pub spinor_minus: Spinor,
}

impl ModeData {
    pub fn new(k: f64, p: &AutomatonParams) -> Result<Self> {
        let (spinor_plus, spinor_minus) = eigenspinors(k, p)?;
        Ok(Self {
            k,
            omega: dispersion(k, p),
            v: group_velocity(k, p),
            spinor_plus,
            spinor_minus,
        })
    }
}

/// DFT frequencies of a ring of `N` sites, in FFT order and mapped into `[-pi, pi)`.
#[derive(Debug, Clone, PartialEq)]
pub struct MomentumGrid {
    points: Vec<f64>,
}

impl MomentumGrid {
    pub fn new(sites: usize) -> Result<Self> {
        check_ring(sites)?;
        let points = (0..sites).map(|j| grid_momentum(j, sites)).collect();
        Ok(Self { points })
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn points(&self) -> &[f64] {
        &self.points
    }

    pub fn spacing(&self) -> f64 {
        2.0 * PI / self.points.len() as f64
    }
}

/// `k_j = 2 pi j / N`, wrapped into `[-pi, pi)`.
pub fn grid_momentum(j: usize, sites: usize) -> f64 {
    let j = if 2 * j >= sites {
        j as f64 - sites as f64
    } else {
        j as f64
    };
    2.0 * PI * j / sites as f64
}

/// Wraps an angle into `[-pi, pi)`.
pub fn wrap_angle(a: f64) -> f64 {
    let turn = 2.0 * PI;
    let r = a - turn * ((a + PI) / turn).floor();
    if r >= PI {
        r - 2.0 * PI
    } else {
        r
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn params(m: f64) -> AutomatonParams {
        AutomatonParams::new(m).unwrap()
    }

    fn unitarity_defect(u: &Mat2) -> f64 {
        (u.adjoint() * *u - Mat2::identity()).max_abs()
    }

    #[test]
    fn walk_matrix_limits() {
        let u = walk_matrix(0.7, &params(1.0));
        let expect = Mat2([
            [Complex64::new(0.0, 0.0), Complex64::new(0.0, -1.0)],
            [Complex64::new(0.0, -1.0), Complex64::new(0.0, 0.0)],
        ]);
        assert!((u - expect).max_abs() < 1e-16);
        let k = 0.9;
        let u = walk_matrix(k, &AutomatonParams::massless());
        assert!((u.0[0][0] - Complex64::from_polar(1.0, k)).norm() < 1e-16);
        assert!((u.0[1][1] - Complex64::from_polar(1.0, -k)).norm() < 1e-16);
        assert_eq!(u.0[0][1], Complex64::new(0.0, 0.0));
        assert!(unitarity_defect(&walk_matrix(PI / 3.0, &params(0.6))) < 1e-15);
    }

    #[test]
    fn dispersion_values() {
        let p = params(0.15);
        assert!((dispersion(0.0, &p) - p.hopping().acos()).abs() < 1e-16);
        // w(0) for m = 0.15 is arcsin(0.15) = 0.15056827277668602
        assert!((dispersion(0.0, &p) - 0.150_568_272_776_686).abs() < 1e-14);
        assert!((dispersion(0.0, &p) / PI - 0.05).abs() < 0.0025);
        // arccos(sqrt(0.96) cos 2) = 1.9907727914084365
        assert!((dispersion(2.0, &params(0.2)) - 1.990_772_791_408_436_5).abs() < 1e-14);
        for k in [0.1, 1.0, 2.5] {
            assert_eq!(dispersion(k, &p), dispersion(-k, &p));
        }
    }

    #[test]
    fn group_velocity_values() {
        let p = params(0.13);
        assert_eq!(group_velocity(0.0, &p), 0.0);
        let v = group_velocity(0.01 * PI, &p);
        assert!((v - 0.233).abs() < 0.001, "{v}");
        assert!(((v / 3.0) - 0.08).abs() < 0.004);
        let p = params(0.4);
        assert!((group_velocity(2.0, &p) - 0.90).abs() < 0.002);
    }

    #[test]
    fn spinors_at_zero_momentum() {
        let p = params(0.3);
        let (plus, minus) = eigenspinors(0.0, &p).unwrap();
        let h = 0.5_f64.sqrt();
        assert!((plus[0] - h).norm() < 1e-15 && (plus[1] - h).norm() < 1e-15);
        assert!((minus[0] - h).norm() < 1e-15 && (minus[1] + h).norm() < 1e-15);
    }

    #[test]
    fn massless_zero_momentum_is_degenerate() {
        let p = AutomatonParams::massless();
        assert!(matches!(
            eigenspinors(0.0, &p),
            Err(Error::DegenerateSpectrum { .. })
        ));
        // away from the degeneracy the massless spinors are the canonical basis
        let (plus, minus) = eigenspinors(0.5, &p).unwrap();
        assert!((plus[1].norm() - 1.0).abs() < 1e-15 && plus[0].norm() < 1e-15);
        assert!((minus[0].norm() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn hamiltonian_at_zero_momentum() {
        let p = params(0.25);
        let h = effective_hamiltonian(0.0, &p).unwrap();
        let w = p.hopping().acos();
        let expect = Mat2::pauli_x().scale(Complex64::new(w / w.sin() * p.mass(), 0.0));
        assert!((h - expect).max_abs() < 1e-15);
        assert!(effective_hamiltonian(0.0, &AutomatonParams::massless()).is_err());
    }

    #[test]
    fn grid_layout() {
        let g = MomentumGrid::new(8).unwrap();
        assert_eq!(g.points()[0], 0.0);
        assert_eq!(g.points()[4], -PI);
        assert!((g.points()[1] - PI / 4.0).abs() < 1e-16);
        assert!((g.points()[7] + PI / 4.0).abs() < 1e-16);
        assert!(MomentumGrid::new(9).is_err());
    }

    #[test]
    fn angle_wrapping() {
        assert_eq!(wrap_angle(0.0), 0.0);
        assert!((wrap_angle(3.0 * PI / 2.0) + PI / 2.0).abs() < 1e-15);
        assert_eq!(wrap_angle(PI), -PI);
    }
}
