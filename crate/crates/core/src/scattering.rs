//! Scattering from a potential step `phi` on the sites `x >= 0`.
//!
//! A right-moving positive-frequency wave `|+>_k e^{ikx}` meets the step at
//! quasi-energy `w(k)`. Past the step it propagates with `w' = w(k) - phi`
//! reduced into `[-pi, pi)`:
//!
//! * `|w'|` inside `(arccos n, pi - arccos n)` and `w' > 0`: ordinary
//!   transmission on the positive branch.
//! * the same with `w' < 0`: Klein transmission on the negative branch.
//! * otherwise `w'` sits in a gap, the transmitted wave is evanescent and the
//!   step reflects everything.
//!
//! Amplitudes come from matching the two plane-wave solutions across the
//! step, so they hold in every regime.

use alloc::vec::Vec;
use core::f64::consts::PI;

use num_complex::Complex64;
#[cfg(not(feature = "std"))]
use num_traits::Float;

use crate::error::{Error, Result};
use crate::evolution::{evolve, step_stencil, EvolveOptions, Observer, PotentialProfile};
use crate::fourier::{FourierTransform, ModeBasis};
use crate::lattice::{AutomatonParams, FieldState, LeakageGuard, Spinor};
use crate::spectral::{dispersion, eigenspinors, eigenvector, group_velocity, wrap_angle, Mat2};
use crate::wavepacket::{build_packet_with_profile, WavepacketSpec};

/// Distance to a regime edge below which the classifier answers evanescent.
pub const EDGE_TOLERANCE: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Regime {
    Propagating,
    /// No real transmitted momentum: total reflection.
    Evanescent,
    /// Transmission through the negative-frequency branch.
    Klein,
}

impl Regime {
    pub fn as_str(&self) -> &'static str {
        match self {
            Regime::Propagating => "propagating",
            Regime::Evanescent => "evanescent",
            Regime::Klein => "klein",
        }
    }
}

impl core::fmt::Display for Regime {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Outcome of solving `cos w' = n cos k'`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Transmission {
    pub regime: Regime,
    /// Real transmitted momentum, or the decay rate `kappa` when evanescent.
    pub k_prime: f64,
    /// `w(k) - phi` reduced into `[-pi, pi)`.
    pub omega_prime: f64,
}

impl Transmission {
    /// Transmitted momentum as a complex number; `Im > 0` decays into the step.
    pub fn complex_momentum(&self) -> Complex64 {
        match self.regime {
            Regime::Evanescent if self.omega_prime.cos() < 0.0 => Complex64::new(PI, self.k_prime),
            Regime::Evanescent => Complex64::new(0.0, self.k_prime),
            _ => Complex64::new(self.k_prime, 0.0),
        }
    }
}

fn check_incidence(k: f64, phi: f64, p: &AutomatonParams) -> Result<()> {
    if !(k.is_finite() && phi.is_finite()) {
        return Err(Error::InvalidArgument(
            "non-finite momentum or step height".into(),
        ));
    }
    if !(0.0..=2.0 * PI).contains(&phi) {
        return Err(Error::InvalidArgument(alloc::format!(
            "step height {phi} outside [0, 2pi]"
        )));
    }
    if !(0.0..=PI).contains(&k) {
        return Err(Error::InvalidArgument(alloc::format!(
            "incident momentum {k} outside (0, pi)"
        )));
    }
    if k == 0.0 || k == PI || !(group_velocity(k, p) > 0.0) {
        return Err(Error::DegenerateIncidence { k });
    }
    Ok(())
}

/// Classifies the step and finds the outgoing transmitted momentum.
///
/// Propagating waves take `k' in (0, pi)`, Klein waves `k' in (-pi, 0)`, so
/// that the transmitted group velocity points away from the step in both.
pub fn transmitted_momentum(k: f64, phi: f64, p: &AutomatonParams) -> Result<Transmission> {
    check_incidence(k, phi, p)?;
    let n = p.hopping();
    let gap = p.gap();
    let omega_prime = wrap_angle(dispersion(k, p) - phi);
    let a = omega_prime.abs();
    if a <= gap + EDGE_TOLERANCE || a >= PI - gap - EDGE_TOLERANCE {
        let c = (omega_prime.cos().abs() / n).max(1.0);
        return Ok(Transmission {
            regime: Regime::Evanescent,
            k_prime: c.acosh(),
            omega_prime,
        });
    }
    let root = (omega_prime.cos() / n).clamp(-1.0, 1.0).acos();
    Ok(if omega_prime > 0.0 {
        Transmission {
            regime: Regime::Propagating,
            k_prime: root,
            omega_prime,
        }
    } else {
        Transmission {
            regime: Regime::Klein,
            k_prime: -root,
            omega_prime,
        }
    })
}

fn complex_walk_matrix(k: Complex64, p: &AutomatonParams) -> Mat2 {
    let n = p.hopping();
    let i = Complex64::new(0.0, 1.0);
    let off = Complex64::new(0.0, -p.mass());
    Mat2([[(i * k).exp() * n, off], [off, (-i * k).exp() * n]])
}

/// Spinor of the wave beyond the step: eigenvector of `U(k')` for `e^{-i w'}`.
fn transmitted_spinor(t: &Transmission, p: &AutomatonParams) -> Result<Spinor> {
    let lambda = Complex64::from_polar(1.0, -t.omega_prime);
    let k = t.complex_momentum();
    eigenvector(&complex_walk_matrix(k, p), lambda).ok_or(Error::DegenerateSpectrum { k: k.re })
}

/// Continuity across the step, in step-relative coordinates:
///
/// ```text
/// chi_r(k)          + beta chi_r(-k)         = e^{-i phi} gamma chi'_r
/// chi_l(k) e^{-ik}  + beta chi_l(-k) e^{ik}  = e^{-i phi} gamma chi'_l e^{-ik'}
/// ```
fn solve_interface(
    k: f64,
    phi: f64,
    t: &Transmission,
    p: &AutomatonParams,
) -> Result<(Complex64, Complex64)> {
    let (incident, _) = eigenspinors(k, p)?;
    let (reflected, _) = eigenspinors(-k, p)?;
    let out = transmitted_spinor(t, p)?;
    let i = Complex64::new(0.0, 1.0);
    let kp = t.complex_momentum();
    let step = Complex64::from_polar(1.0, -phi);
    let ek = Complex64::from_polar(1.0, k);

    let a11 = reflected[0];
    let a12 = -step * out[0];
    let a21 = reflected[1] * ek;
    let a22 = -step * out[1] * (-i * kp).exp();
    let b1 = -incident[0];
    let b2 = -incident[1] * ek.conj();
    let det = a11 * a22 - a12 * a21;
    if !(det.norm() > 1e-14) {
        return Err(Error::DegenerateIncidence { k });
    }
    Ok(((b1 * a22 - a12 * b2) / det, (a11 * b2 - b1 * a21) / det))
}

/// Reflected and transmitted amplitudes `(beta, gamma)` of the stationary
/// scattering state.
pub fn matching_amplitudes(
    k: f64,
    phi: f64,
    p: &AutomatonParams,
) -> Result<(Complex64, Complex64)> {
    let t = transmitted_momentum(k, phi, p)?;
    if t.regime == Regime::Evanescent {
        return Err(Error::WrongRegime(Regime::Evanescent));
    }
    solve_interface(k, phi, &t, p)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScatteringSolution {
    pub k: f64,
    pub phi: f64,
    pub regime: Regime,
    /// Real transmitted momentum, or the decay rate when evanescent.
    pub k_prime: f64,
    pub omega_prime: f64,
    pub v_in: f64,
    /// Speed of the transmitted wave away from the step; zero when evanescent.
    pub v_out: f64,
    pub beta: Complex64,
    pub gamma: Complex64,
    pub r: f64,
    pub t: f64,
}

impl ScatteringSolution {
    pub fn transmission(&self) -> Transmission {
        Transmission {
            regime: self.regime,
            k_prime: self.k_prime,
            omega_prime: self.omega_prime,
        }
    }
}

/// Full analytic record for one incident momentum and step height.
///
/// `R = |beta|^2` and `T = |gamma|^2 v_out / v_in`. Evanescent steps report
/// `R = 1, T = 0` exactly; their `beta` still comes from the matching and has
/// unit modulus.
pub fn coefficients(k: f64, phi: f64, p: &AutomatonParams) -> Result<ScatteringSolution> {
    let t = transmitted_momentum(k, phi, p)?;
    let (beta, gamma) = solve_interface(k, phi, &t, p)?;
    let v_in = group_velocity(k, p);
    let (v_out, r, tr) = match t.regime {
        Regime::Evanescent => (0.0, 1.0, 0.0),
        Regime::Propagating | Regime::Klein => {
            let v_out = group_velocity(t.k_prime.abs(), p);
            (v_out, beta.norm_sqr(), gamma.norm_sqr() * v_out / v_in)
        }
    };
    Ok(ScatteringSolution {
        k,
        phi,
        regime: t.regime,
        k_prime: t.k_prime,
        omega_prime: t.omega_prime,
        v_in,
        v_out,
        beta,
        gamma,
        r,
        t: tr,
    })
}

/// The stationary state of `sol` on a ring of `2 half_width` sites with the
/// step at index `half_width`, and the matching step profile.
pub fn stationary_state(
    sol: &ScatteringSolution,
    p: &AutomatonParams,
    half_width: usize,
) -> Result<(FieldState, PotentialProfile)> {
    if half_width < 2 {
        return Err(Error::InvalidArgument(
            "stationary window needs at least 2 sites per side".into(),
        ));
    }
    let sites = 2 * half_width;
    let (incident, _) = eigenspinors(sol.k, p)?;
    let (reflected, _) = eigenspinors(-sol.k, p)?;
    let t = sol.transmission();
    let out = transmitted_spinor(&t, p)?;
    let kp = t.complex_momentum();
    let i = Complex64::new(0.0, 1.0);
    let amps = (0..sites)
        .map(|idx| {
            let x = idx as f64 - half_width as f64;
            if x < 0.0 {
                let a = Complex64::from_polar(1.0, sol.k * x);
                let b = sol.beta * a.conj();
                [
                    incident[0] * a + reflected[0] * b,
                    incident[1] * a + reflected[1] * b,
                ]
            } else {
                let c = sol.gamma * (i * kp * x).exp();
                [out[0] * c, out[1] * c]
            }
        })
        .collect();
    let state = FieldState::from_amplitudes(amps)?.with_origin(-(half_width as i64));
    let pot = PotentialProfile::step(sites, sol.phi, half_width)?;
    Ok((state, pot))
}

/// `max |U_phi Phi - e^{-i w(k)} Phi|` over the interior of the window used
/// by [`stationary_state`]. Sites next to the ring seam are excluded.
pub fn eigen_residual(
    sol: &ScatteringSolution,
    p: &AutomatonParams,
    half_width: usize,
) -> Result<f64> {
    let (state, pot) = stationary_state(sol, p, half_width)?;
    let next = step_stencil(&state, p, &pot)?;
    let lambda = Complex64::from_polar(1.0, -dispersion(sol.k, p));
    let sites = state.sites();
    Ok((1..sites - 1)
        .map(|i| {
            let a = next.amplitudes()[i];
            let b = state.amplitudes()[i];
            (a[0] - lambda * b[0])
                .norm()
                .max((a[1] - lambda * b[1]).norm())
        })
        .fold(0.0, f64::max))
}

/// Axes of an `R(phi, k)` scan, one table per mass.
#[derive(Debug, Clone, PartialEq)]
pub struct ScanGrid {
    masses: Vec<f64>,
    k: Vec<f64>,
    phi: Vec<f64>,
}

fn strictly_increasing(values: &[f64]) -> bool {
    values.windows(2).all(|w| w[0] < w[1])
}

impl ScanGrid {
    pub fn new(masses: Vec<f64>, k: Vec<f64>, phi: Vec<f64>) -> Result<Self> {
        for &m in &masses {
            AutomatonParams::new(m)?;
        }
        if k.is_empty() || phi.is_empty() || masses.is_empty() {
            return Err(Error::InvalidArgument("empty scan axis".into()));
        }
        if !strictly_increasing(&k) || !strictly_increasing(&phi) {
            return Err(Error::InvalidArgument(
                "scan axes must be strictly increasing".into(),
            ));
        }
        if !(k[0] > 0.0 && k[k.len() - 1] < PI) {
            return Err(Error::InvalidArgument(
                "scan momenta must lie inside (0, pi)".into(),
            ));
        }
        if !(phi[0] >= 0.0 && phi[phi.len() - 1] <= 2.0 * PI) {
            return Err(Error::InvalidArgument(
                "scan step heights must lie in [0, 2pi]".into(),
            ));
        }
        Ok(Self { masses, k, phi })
    }

    /// `k_count` interior points of `(0, pi)` and `phi_count` points spanning
    /// `[0, 2 pi]`.
    pub fn uniform(masses: Vec<f64>, k_count: usize, phi_count: usize) -> Result<Self> {
        if phi_count < 2 {
            return Err(Error::InvalidArgument(
                "need at least two step heights".into(),
            ));
        }
        let k = (1..=k_count)
            .map(|i| PI * i as f64 / (k_count + 1) as f64)
            .collect();
        let phi = (0..phi_count)
            .map(|j| 2.0 * PI * j as f64 / (phi_count - 1) as f64)
            .collect();
        Self::new(masses, k, phi)
    }

    pub fn masses(&self) -> &[f64] {
        &self.masses
    }

    pub fn k(&self) -> &[f64] {
        &self.k
    }

    pub fn phi(&self) -> &[f64] {
        &self.phi
    }
}

/// Solutions along the step-height axis for one mass and momentum.
pub fn scan_row(p: &AutomatonParams, k: f64, phis: &[f64]) -> Result<Vec<ScatteringSolution>> {
    phis.iter().map(|&phi| coefficients(k, phi, p)).collect()
}

/// Run of total reflection along one row.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Plateau {
    pub first: usize,
    pub last: usize,
    /// Distance between the cell boundaries enclosing the run.
    pub width: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScanResult {
    grid: ScanGrid,
    /// Row-major `[mass][k][phi]`.
    cells: Vec<ScatteringSolution>,
}

/// Reflection at or above this counts as total.
pub const TOTAL_REFLECTION: f64 = 1.0 - 1e-9;

impl ScanResult {
    /// Puts rows computed elsewhere (for example in parallel) back together.
    /// `rows` are ordered mass-major, then by momentum.
    pub fn assemble(grid: ScanGrid, rows: Vec<Vec<ScatteringSolution>>) -> Result<Self> {
        let expected = grid.masses.len() * grid.k.len();
        if rows.len() != expected || rows.iter().any(|r| r.len() != grid.phi.len()) {
            return Err(Error::ShapeMismatch {
                expected,
                found: rows.len(),
            });
        }
        Ok(Self {
            grid,
            cells: rows.into_iter().flatten().collect(),
        })
    }

    pub fn grid(&self) -> &ScanGrid {
        &self.grid
    }

    pub fn cells(&self) -> &[ScatteringSolution] {
        &self.cells
    }

    pub fn row(&self, mass: usize, k: usize) -> &[ScatteringSolution] {
        let len = self.grid.phi.len();
        let start = (mass * self.grid.k.len() + k) * len;
        &self.cells[start..start + len]
    }

    /// The total-reflection run containing the step height closest to
    /// `w(k)`, which is the centre of the primary gap window.
    pub fn plateau(&self, mass: usize, k: usize) -> Option<Plateau> {
        let p = AutomatonParams::new(self.grid.masses[mass]).ok()?;
        let centre = dispersion(self.grid.k[k], &p);
        let phi = &self.grid.phi;
        let row = self.row(mass, k);
        let start = (0..phi.len())
            .min_by(|&a, &b| (phi[a] - centre).abs().total_cmp(&(phi[b] - centre).abs()))?;
        if row[start].r < TOTAL_REFLECTION {
            return None;
        }
        let mut first = start;
        while first > 0 && row[first - 1].r >= TOTAL_REFLECTION {
            first -= 1;
        }
        let mut last = start;
        while last + 1 < row.len() && row[last + 1].r >= TOTAL_REFLECTION {
            last += 1;
        }
        let lower = if first == 0 {
            phi[0]
        } else {
            0.5 * (phi[first - 1] + phi[first])
        };
        let upper = if last + 1 == phi.len() {
            phi[last]
        } else {
            0.5 * (phi[last] + phi[last + 1])
        };
        Some(Plateau {
            first,
            last,
            width: upper - lower,
        })
    }

    /// Whether the cell right after the plateau transmits through the
    /// negative branch. Near `k = pi` the dip below 1 can be narrower than a
    /// cell; [`reflection_above_window`] resolves it.
    pub fn drops_after_plateau(&self, mass: usize, k: usize) -> Option<bool> {
        let plateau = self.plateau(mass, k)?;
        let next = self.row(mass, k).get(plateau.last + 1)?;
        Some(next.r < TOTAL_REFLECTION && next.regime == Regime::Klein)
    }
}

/// `R` at step heights `w(k) + arccos n + offset`, just past the upper edge
/// of the total-reflection window.
pub fn reflection_above_window(k: f64, p: &AutomatonParams, offsets: &[f64]) -> Result<Vec<f64>> {
    let edge = dispersion(k, p) + p.gap();
    offsets
        .iter()
        .map(|&d| coefficients(k, edge + d, p).map(|s| s.r))
        .collect()
}

/// Solves every cell of `grid` in order.
pub fn scan(grid: ScanGrid) -> Result<ScanResult> {
    let mut rows = Vec::with_capacity(grid.masses.len() * grid.k.len());
    for &m in &grid.masses {
        let p = AutomatonParams::new(m)?;
        for &k in &grid.k {
            rows.push(scan_row(&p, k, &grid.phi)?);
        }
    }
    ScanResult::assemble(grid, rows)
}

/// Wavepacket experiment against a step at site index `barrier`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DynamicSetup {
    /// Incident packet; must be a pure positive-frequency packet left of the step.
    pub spec: WavepacketSpec,
    pub phi: f64,
    pub barrier: usize,
    pub steps: usize,
    /// Observation stride for lobe tracking and external observers.
    pub stride: usize,
    pub guard: LeakageGuard,
}

/// Weight below which a lobe is ignored.
pub const LOBE_FLOOR: f64 = 1e-4;
/// Required centroid separation in units of the summed lobe widths.
pub const SEPARATION_WIDTHS: f64 = 3.0;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DynamicScatter {
    pub r_measured: f64,
    pub v_out_measured: f64,
    /// Step at which the lobes were first seen separated.
    pub stop_step: usize,
    pub analytic: ScatteringSolution,
}

#[derive(Debug, Clone, Copy, Default)]
struct Lobe {
    weight: f64,
    centroid: f64,
    width: f64,
}

fn lobes(state: &FieldState, barrier: usize) -> (Lobe, Lobe) {
    let mut acc = [[0.0f64; 3]; 2];
    for (i, [r, l]) in state.amplitudes().iter().enumerate() {
        let w = r.norm_sqr() + l.norm_sqr();
        let x = i as f64;
        let side = &mut acc[usize::from(i >= barrier)];
        side[0] += w;
        side[1] += w * x;
        side[2] += w * x * x;
    }
    let finish = |a: [f64; 3]| {
        if a[0] <= 0.0 {
            return Lobe::default();
        }
        let c = a[1] / a[0];
        Lobe {
            weight: a[0],
            centroid: c,
            width: (a[2] / a[0] - c * c).max(0.0).sqrt(),
        }
    };
    (finish(acc[0]), finish(acc[1]))
}

fn separated(left: &Lobe, right: &Lobe, barrier: usize) -> bool {
    let edge = barrier as f64 - 0.5;
    match (left.weight >= LOBE_FLOOR, right.weight >= LOBE_FLOOR) {
        (true, true) => {
            right.centroid - left.centroid > SEPARATION_WIDTHS * (left.width + right.width)
        }
        (true, false) => edge - left.centroid > SEPARATION_WIDTHS * left.width,
        (false, true) => right.centroid - edge > SEPARATION_WIDTHS * right.width,
        (false, false) => false,
    }
}

/// Sends a packet at the step with the stencil backend.
///
/// The run must see the reflected and transmitted lobes separate after the
/// expected arrival time, otherwise it is inconclusive. `R` is the weight on
/// the sites left of the step after the last step, when the lobes are
/// furthest apart. The transmitted speed is the least-squares slope of the
/// right lobe's centroid from separation onwards.
pub fn dynamic_scatter<F: FourierTransform>(
    setup: &DynamicSetup,
    basis: &ModeBasis<F>,
    observers: &mut [Observer<'_>],
) -> Result<DynamicScatter> {
    let spec = &setup.spec;
    if spec.c_minus.norm_sqr() != 0.0 {
        return Err(Error::InvalidArgument(
            "incident packet must lie on the positive branch".into(),
        ));
    }
    let p = *basis.params();
    let sites = basis.sites();
    let analytic = coefficients(spec.k0, setup.phi, &p)?;
    let x0 = spec.center(sites);
    if !(x0 < setup.barrier as f64) {
        return Err(Error::InvalidArgument(alloc::format!(
            "packet centre {x0} is not left of the step at {}",
            setup.barrier
        )));
    }
    let arrival = (setup.barrier as f64 - x0) / analytic.v_in;
    let state = build_packet_with_profile(spec, basis, setup.guard, |k| {
        Complex64::new(spec.gaussian(k), 0.0)
    })?;
    let pot = PotentialProfile::step(sites, setup.phi, setup.barrier)?;

    let mut stop: Option<usize> = None;
    let mut last_left = 0.0;
    let mut track: Vec<(f64, f64)> = Vec::new();
    let barrier = setup.barrier;
    let mut tracker = |t: usize, s: &FieldState| {
        let (left, right) = lobes(s, barrier);
        if stop.is_none() && t as f64 >= arrival && separated(&left, &right, barrier) {
            stop = Some(t);
        }
        if stop.is_some() && right.weight >= LOBE_FLOOR {
            track.push((t as f64, right.centroid));
        }
        last_left = left.weight;
    };
    let options = EvolveOptions {
        stride: setup.stride.max(1),
        ..EvolveOptions::default()
    };
    {
        let mut all: Vec<Observer<'_>> = Vec::with_capacity(observers.len() + 1);
        all.push(&mut tracker);
        for obs in observers.iter_mut() {
            all.push(&mut **obs);
        }
        evolve(state, &p, &pot, setup.steps, &options, &mut all)?;
    }
    let stop_step = stop.ok_or(Error::Inconclusive(setup.steps))?;
    let r_measured = last_left;
    let v_out_measured = if track.len() >= 2 {
        let (t, x): (Vec<f64>, Vec<f64>) = track.into_iter().unzip();
        crate::observables::least_squares_slope(&t, &x)
    } else {
        0.0
    };
    Ok(DynamicScatter {
        r_measured,
        v_out_measured,
        stop_step,
        analytic,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fourier::DirectDft;

    fn params(m: f64) -> AutomatonParams {
        AutomatonParams::new(m).unwrap()
    }

    // Closed forms for beta and |gamma| sqrt(v'/v), valid on the positive branch.
    fn printed(k: f64, kp: f64, p: &AutomatonParams) -> (Complex64, f64) {
        let v = group_velocity(k, p);
        let w = group_velocity(kp, p);
        let e = |a: f64| Complex64::from_polar(1.0, a);
        let den = -e(k) * ((1.0 - v) * (1.0 - w)).sqrt() + e(-kp) * ((1.0 + v) * (1.0 + w)).sqrt();
        let beta = (e(-k) * ((1.0 + v) * (1.0 - w)).sqrt()
            - e(-kp) * ((1.0 - v) * (1.0 + w)).sqrt())
            / den;
        let gamma = Complex64::new(2.0 * v * k.cos(), -2.0 * k.sin()) / den;
        (beta, gamma.norm() * (w / v).sqrt())
    }

    #[test]
    fn no_step_no_reflection() {
        let p = params(0.3);
        let t = transmitted_momentum(1.1, 0.0, &p).unwrap();
        assert_eq!(t.regime, Regime::Propagating);
        assert!((t.k_prime - 1.1).abs() < 1e-12);
        assert!((t.omega_prime - dispersion(1.1, &p)).abs() < 1e-15);
        let s = coefficients(1.1, 0.0, &p).unwrap();
        assert!(s.r < 1e-24 && (s.t - 1.0).abs() < 1e-12);
        assert!(s.beta.norm() < 1e-12);
        assert!((s.gamma.norm() * (s.v_out / s.v_in).sqrt() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn band_edge_is_degenerate() {
        let p = params(0.3);
        assert!(matches!(
            transmitted_momentum(0.0, 1.0, &p),
            Err(Error::DegenerateIncidence { .. })
        ));
        assert!(matches!(
            transmitted_momentum(PI, 1.0, &p),
            Err(Error::DegenerateIncidence { .. })
        ));
        assert!(matches!(
            transmitted_momentum(-0.5, 1.0, &p),
            Err(Error::InvalidArgument(_))
        ));
        assert!(matches!(
            transmitted_momentum(1.0, 7.0, &p),
            Err(Error::InvalidArgument(_))
        ));
    }

    #[test]
    fn evanescent_window_width() {
        let p = params(0.4);
        let w = dispersion(2.0, &p);
        let gap = p.gap();
        assert!((2.0 * gap - 0.8230336921349761).abs() < 1e-12);
        for phi in [w - gap + 1e-4, w, w + gap - 1e-4] {
            assert_eq!(
                transmitted_momentum(2.0, phi, &p).unwrap().regime,
                Regime::Evanescent
            );
        }
        assert_eq!(
            transmitted_momentum(2.0, w - gap - 1e-4, &p)
                .unwrap()
                .regime,
            Regime::Propagating
        );
        let above = transmitted_momentum(2.0, w + gap + 1e-4, &p).unwrap();
        assert_eq!(above.regime, Regime::Klein);
        assert!(above.k_prime < 0.0);
        // inside the edge tolerance the label is evanescent
        assert_eq!(
            transmitted_momentum(2.0, w + gap - 5e-7, &p)
                .unwrap()
                .regime,
            Regime::Evanescent
        );
        assert_eq!(
            transmitted_momentum(2.0, w + gap + 5e-7, &p)
                .unwrap()
                .regime,
            Regime::Evanescent
        );
    }

    #[test]
    fn matching_refuses_evanescent() {
        let p = params(0.4);
        let w = dispersion(2.0, &p);
        assert!(matches!(
            matching_amplitudes(2.0, w, &p),
            Err(Error::WrongRegime(Regime::Evanescent))
        ));
        let s = coefficients(2.0, w, &p).unwrap();
        assert_eq!((s.r, s.t, s.v_out), (1.0, 0.0, 0.0));
        assert!((s.beta.norm() - 1.0).abs() < 1e-10);
    }

    #[test]
    fn agrees_with_closed_form_when_propagating() {
        for (m, k, phi) in [
            (0.2, 2.0, 1.42),
            (0.2, 2.0, 0.3),
            (0.4, 1.0, 0.2),
            (0.7, 2.5, 0.9),
            (0.1, 0.4, 0.05),
        ] {
            let p = params(m);
            let s = coefficients(k, phi, &p).unwrap();
            assert_eq!(s.regime, Regime::Propagating, "{m} {k} {phi}");
            let (beta, gamma) = printed(k, s.k_prime, &p);
            assert!((s.beta.norm() - beta.norm()).abs() < 1e-10, "{m} {k} {phi}");
            assert!((s.t.sqrt() - gamma).abs() < 1e-10);
        }
    }

    #[test]
    fn reflection_values_at_k_two() {
        // independent linear solve of the matching conditions
        let s = coefficients(2.0, 1.42, &params(0.4)).unwrap();
        assert!((s.r - 0.25027313654511724).abs() < 1e-10, "{}", s.r);
        assert!((s.v_out - 0.6316243707132515).abs() < 1e-10);
        assert!((s.v_in - 0.9015334943976256).abs() < 1e-12);
        let s = coefficients(2.0, 2.4, &params(0.4)).unwrap();
        assert_eq!(s.regime, Regime::Klein);
        assert!((s.r - 0.4005679053478691).abs() < 1e-10);
        let s = coefficients(2.0, 1.42, &params(0.2)).unwrap();
        assert!((s.r - 0.04298120615009348).abs() < 1e-10);
    }

    #[test]
    fn flux_is_conserved_in_every_regime() {
        for m in [0.1, 0.4, 0.8] {
            let p = params(m);
            for i in 1..20 {
                for j in 0..=40 {
                    let k = PI * i as f64 / 20.0;
                    let phi = 2.0 * PI * j as f64 / 40.0;
                    let s = coefficients(k, phi, &p).unwrap();
                    assert!((0.0..=1.0 + 1e-12).contains(&s.r) && s.t >= 0.0);
                    assert!((s.r + s.t - 1.0).abs() < 1e-10, "{m} {k} {phi} {:?}", s);
                    assert!(s.v_out >= 0.0);
                }
            }
        }
    }

    #[test]
    fn stationary_state_is_an_eigenvector() {
        let p = params(0.4);
        let w = dispersion(2.0, &p);
        for phi in [0.0, 0.5, w, w + p.gap() + 0.2, 5.5] {
            let s = coefficients(2.0, phi, &p).unwrap();
            let res = eigen_residual(&s, &p, 40).unwrap();
            assert!(res < 1e-10, "phi {phi}: {res}");
        }
    }

    #[test]
    fn mirrored_state_scatters_from_the_left() {
        // x -> -x with r <-> l maps U(k) to U(-k); the mirror image of a
        // stationary state is stationary for the mirrored step.
        let p = params(0.3);
        let s = coefficients(1.3, 2.3, &p).unwrap();
        let (state, pot) = stationary_state(&s, &p, 30).unwrap();
        let n = state.sites();
        let mirror = |i: usize| (n - i) % n;
        let amps: Vec<Spinor> = (0..n)
            .map(|i| {
                let a = state.amplitudes()[mirror(i)];
                [a[1], a[0]]
            })
            .collect();
        let phases: Vec<f64> = (0..n).map(|i| pot.phases()[mirror(i)]).collect();
        let state = FieldState::from_amplitudes(amps).unwrap();
        let next = step_stencil(&state, &p, &PotentialProfile::from_phases(phases)).unwrap();
        let lambda = Complex64::from_polar(1.0, -dispersion(1.3, &p));
        for i in 2..n - 1 {
            let (a, b) = (next.amplitudes()[i], state.amplitudes()[i]);
            assert!(
                (a[0] - lambda * b[0]).norm() < 1e-10 && (a[1] - lambda * b[1]).norm() < 1e-10,
                "{i}"
            );
        }
    }

    #[test]
    fn plateau_and_klein_drop() {
        let grid = ScanGrid::uniform(alloc::vec![0.4], 9, 400).unwrap();
        let d = grid.phi()[1] - grid.phi()[0];
        let result = scan(grid).unwrap();
        let exact = 2.0 * params(0.4).gap();
        for ki in 0..9 {
            let plateau = result.plateau(0, ki).unwrap();
            assert!(
                (plateau.width - exact).abs() <= d + 1e-5,
                "{ki}: {}",
                plateau.width
            );
            assert_eq!(result.drops_after_plateau(0, ki), Some(true));
            let above =
                reflection_above_window(result.grid().k()[ki], &params(0.4), &[1e-5, 2e-5, 4e-5])
                    .unwrap();
            assert!(
                above[0] < 1.0 && above[1] < above[0] && above[2] < above[1],
                "{above:?}"
            );
            let row = result.row(0, ki);
            assert!(row[0].r < 1e-20);
            assert!(row[..plateau.first]
                .windows(2)
                .all(|w| w[1].r >= w[0].r - 1e-12));
        }
    }

    #[test]
    fn scan_grid_validation() {
        assert!(ScanGrid::new(alloc::vec![0.4], alloc::vec![0.0, 1.0], alloc::vec![0.0]).is_err());
        assert!(ScanGrid::new(alloc::vec![0.4], alloc::vec![1.0, 0.5], alloc::vec![0.0]).is_err());
        assert!(ScanGrid::new(alloc::vec![1.4], alloc::vec![1.0], alloc::vec![0.0]).is_err());
        assert!(ScanGrid::new(alloc::vec![0.4], alloc::vec![1.0], alloc::vec![0.0, 7.0]).is_err());
    }

    #[test]
    fn small_dynamic_run() {
        let p = params(0.4);
        let basis = ModeBasis::new(p, 256, DirectDft::new(256)).unwrap();
        let spec = WavepacketSpec::particle(1.5, 0.25).at(80.0);
        let run = |phi| {
            let setup = DynamicSetup {
                spec,
                phi,
                barrier: 128,
                steps: 160,
                stride: 1,
                guard: LeakageGuard::default(),
            };
            dynamic_scatter(&setup, &basis, &mut []).unwrap()
        };
        let free = run(0.0);
        assert!(free.r_measured < 1e-6, "{}", free.r_measured);
        assert!((free.v_out_measured - free.analytic.v_in).abs() < 0.02);
        let wall = run(dispersion(1.5, &p));
        assert!(wall.r_measured > 0.99);
        let setup = DynamicSetup {
            spec,
            phi: 0.4,
            barrier: 128,
            steps: 10,
            stride: 1,
            guard: LeakageGuard::default(),
        };
        assert!(matches!(
            dynamic_scatter(&setup, &basis, &mut []),
            Err(Error::Inconclusive(10))
        ));
    }
}
