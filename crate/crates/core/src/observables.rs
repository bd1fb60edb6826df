//! Position and momentum expectations, trajectory recording and the
//! Zitterbewegung analysis.
//!
//! For a state mixing both frequency branches the mean position splits into
//! a classical part (initial centroid plus drift) and an interference term
//! between the branches. The interference term oscillates at frequency
//! `w(k0)/pi` cycles per step, its envelope decays like `t^{-1/2}`, and it
//! settles on a constant shift. It never exceeds `2/m + 2/m^2` in magnitude.

use alloc::vec::Vec;
use core::f64::consts::PI;

use num_complex::Complex64;
#[cfg(not(feature = "std"))]
use num_traits::Float;

use crate::error::{Error, Result};
use crate::evolution::{evolve, Backend, EvolveOptions, PotentialProfile};
use crate::fourier::{FourierTransform, ModeBasis};
use crate::lattice::{AutomatonParams, FieldState};
use crate::spectral::{dispersion, group_velocity, MomentumGrid};
use crate::wavepacket::{branch_project, Branch, WavepacketSpec};

/// `<X> = sum_x x (|psi_r(x)|^2 + |psi_l(x)|^2)` with `x` measured from the
/// ring origin. Guarded states must be clear of the seam.
pub fn position_mean(state: &FieldState) -> Result<f64> {
    state.check_guard(0)?;
    Ok(raw_position_mean(state))
}

fn raw_position_mean(state: &FieldState) -> f64 {
    state
        .amplitudes()
        .iter()
        .enumerate()
        .map(|(i, [r, l])| state.position(i) as f64 * (r.norm_sqr() + l.norm_sqr()))
        .sum()
}

/// `<P> = sum_j k_j w_j / sum_j w_j` over the spectral weights `w_j`, with
/// `k_j` in `[-pi, pi)`.
pub fn momentum_mean<F: FourierTransform>(state: &FieldState, fft: &F) -> Result<f64> {
    if fft.len() != state.sites() {
        return Err(Error::ShapeMismatch {
            expected: state.sites(),
            found: fft.len(),
        });
    }
    let grid = MomentumGrid::new(state.sites())?;
    Ok(raw_momentum_mean(state, fft, &grid))
}

fn raw_momentum_mean<F: FourierTransform>(state: &FieldState, fft: &F, grid: &MomentumGrid) -> f64 {
    let (mut r, mut l) = state.components();
    fft.forward(&mut r);
    fft.forward(&mut l);
    let mut total = 0.0;
    let mut moment = 0.0;
    for ((a, b), k) in r.iter().zip(&l).zip(grid.points()) {
        let w = a.norm_sqr() + b.norm_sqr();
        total += w;
        moment += k * w;
    }
    if total > 0.0 {
        moment / total
    } else {
        0.0
    }
}

/// `z(k) = m cos w(k) / sin^2 w(k)`, the momentum-resolved shift kernel.
pub fn zitter_z(k: f64, p: &AutomatonParams) -> Result<f64> {
    p.require_mass("z(k)")?;
    let w = dispersion(k, p);
    let s = w.sin();
    Ok(p.mass() * w.cos() / (s * s))
}

/// `2/m + 2/m^2`, the bound on the interference term.
pub fn amplitude_bound(p: &AutomatonParams) -> Result<f64> {
    p.require_mass("Zitterbewegung bound")?;
    let m = p.mass();
    Ok(2.0 / m + 2.0 / (m * m))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ZitterPrediction {
    /// Displacement of the oscillation centre from the initial position.
    pub shift: f64,
    /// Cycles per step.
    pub frequency: f64,
    pub drift: f64,
    pub amplitude_bound: f64,
}

/// Analytic Zitterbewegung quantities for a packet on a ring of `sites` sites.
///
/// The shift is `Im(conj(c_+) c_-)` times the `|g|^2`-weighted grid average
/// of [`zitter_z`].
pub fn zitter_predict(
    spec: &WavepacketSpec,
    p: &AutomatonParams,
    sites: usize,
) -> Result<ZitterPrediction> {
    p.require_mass("Zitterbewegung prediction")?;
    spec.validate()?;
    let grid = MomentumGrid::new(sites)?;
    let mut weight = 0.0;
    let mut weighted = 0.0;
    for &k in grid.points() {
        let g = spec.gaussian(k);
        let w = g * g;
        weight += w;
        weighted += w * zitter_z(k, p)?;
    }
    let mixing = (spec.c_plus.conj() * spec.c_minus).im;
    Ok(ZitterPrediction {
        shift: mixing * weighted / weight,
        frequency: dispersion(spec.k0, p) / PI,
        drift: (spec.c_plus.norm_sqr() - spec.c_minus.norm_sqr()) * group_velocity(spec.k0, p),
        amplitude_bound: amplitude_bound(p)?,
    })
}

/// Mean position and momentum per step of a free trajectory.
#[derive(Debug, Clone, PartialEq)]
pub struct TrajectoryTrace {
    pub steps: Vec<usize>,
    pub x_mean: Vec<f64>,
    pub p_mean: Vec<f64>,
    /// `(||P_+ psi||^2, ||P_- psi||^2)` per step, when recorded.
    pub populations: Option<Vec<(f64, f64)>>,
    /// `sum_s <P_s psi|X|P_s psi>` at step 0: the centroid without the
    /// interference term.
    pub classical_origin: Option<f64>,
    /// Exact mean velocity `sum_k v(k) (|a_+(k)|^2 - |a_-(k)|^2)`.
    pub mean_velocity: Option<f64>,
}

impl TrajectoryTrace {
    pub fn len(&self) -> usize {
        self.steps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }

    /// `x(t) - x(0) - drift t`.
    pub fn detrended(&self, drift: f64) -> Vec<f64> {
        let x0 = self.x_mean.first().copied().unwrap_or(0.0);
        self.steps
            .iter()
            .zip(&self.x_mean)
            .map(|(&t, &x)| x - x0 - drift * t as f64)
            .collect()
    }

    /// `x(t) - x_classical(0) - drift t`, the interference term alone when
    /// the classical origin and exact drift are known.
    pub fn interference(&self, fallback_drift: f64) -> Vec<f64> {
        let origin = self
            .classical_origin
            .unwrap_or_else(|| self.x_mean.first().copied().unwrap_or(0.0));
        let drift = self.mean_velocity.unwrap_or(fallback_drift);
        self.steps
            .iter()
            .zip(&self.x_mean)
            .map(|(&t, &x)| x - origin - drift * t as f64)
            .collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct TraceOptions {
    pub populations: bool,
    /// Step with the momentum-space backend instead of the stencil.
    pub spectral: bool,
}

/// Evolves `state` freely for `steps` steps, recording `<X>` and `<P>`
/// after every step.
pub fn record_trace<F: FourierTransform>(
    state: FieldState,
    basis: &ModeBasis<F>,
    steps: usize,
    options: TraceOptions,
) -> Result<(TrajectoryTrace, FieldState)> {
    basis.check(&state)?;
    let params = *basis.params();
    let modes = basis.modes()?;

    let plus = branch_project(&state, basis, Branch::Positive)?;
    let minus = branch_project(&state, basis, Branch::Negative)?;
    let norm = state.norm_sqr();
    let classical_origin = (raw_position_mean(&plus) + raw_position_mean(&minus)) / norm;

    let amps = basis.to_momentum(&state)?;
    let n = basis.sites() as f64;
    let mut velocity = 0.0;
    for (a, mode) in amps.iter().zip(modes) {
        let p = mode.spinor_plus[0].conj() * a[0] + mode.spinor_plus[1].conj() * a[1];
        let m = mode.spinor_minus[0].conj() * a[0] + mode.spinor_minus[1].conj() * a[1];
        velocity += mode.v * (p.norm_sqr() - m.norm_sqr());
    }
    let mean_velocity = velocity / n / norm;

    let mut trace = TrajectoryTrace {
        steps: Vec::with_capacity(steps + 1),
        x_mean: Vec::with_capacity(steps + 1),
        p_mean: Vec::with_capacity(steps + 1),
        populations: options.populations.then(Vec::new),
        classical_origin: Some(classical_origin),
        mean_velocity: Some(mean_velocity),
    };
    let mut population_error = None;
    let mut observer = |t: usize, s: &FieldState| {
        trace.steps.push(t);
        trace.x_mean.push(raw_position_mean(s));
        trace
            .p_mean
            .push(raw_momentum_mean(s, basis.transform(), basis.grid()));
        if let Some(pops) = trace.populations.as_mut() {
            match crate::wavepacket::branch_populations(s, basis) {
                Ok(v) => pops.push(v),
                Err(e) => population_error = Some(e),
            }
        }
    };
    let last = evolve(
        state,
        &params,
        &PotentialProfile::zero(basis.sites()),
        steps,
        &EvolveOptions {
            backend: if options.spectral {
                Backend::Spectral(basis)
            } else {
                Backend::Stencil
            },
            stride: 1,
        },
        &mut [&mut observer],
    )?;
    if let Some(e) = population_error {
        return Err(e);
    }
    Ok((trace, last))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ZitterMeasurement {
    /// Largest excursion of the detrended trace around its asymptotic mean.
    pub amplitude: f64,
    /// Dominant frequency, cycles per step.
    pub frequency: f64,
    /// Asymptotic mean of `x(t) - x(0) - drift t`.
    pub shift: f64,
    /// Slope of `log |extremum|` against `log t`.
    pub decay_exponent: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MeasureOptions {
    /// Steps `[from, to]` used for the envelope fit; `to` is clamped to the trace.
    pub fit_window: (usize, usize),
    /// Detrended amplitudes below this count as no oscillation.
    pub noise_floor: f64,
}

impl Default for MeasureOptions {
    fn default() -> Self {
        Self {
            fit_window: (100, usize::MAX),
            noise_floor: 1e-6,
        }
    }
}

/// Minimum trace length accepted by [`zitter_measure`].
pub const MIN_TRACE_STEPS: usize = 200;

/// Measures the oscillation of a trace after removing `drift`.
pub fn zitter_measure(
    trace: &TrajectoryTrace,
    drift: f64,
    options: &MeasureOptions,
) -> Result<ZitterMeasurement> {
    if trace.len() <= MIN_TRACE_STEPS {
        return Err(Error::InvalidArgument(alloc::format!(
            "trace of {} samples is shorter than {MIN_TRACE_STEPS} steps",
            trace.len()
        )));
    }
    let residual = trace.detrended(drift);
    let len = residual.len();
    let tail = &residual[len / 2..];
    let rough_mean = tail.iter().sum::<f64>() / tail.len() as f64;
    let centred: Vec<f64> = residual.iter().map(|r| r - rough_mean).collect();
    let amplitude = centred.iter().fold(0.0_f64, |a, v| a.max(v.abs()));
    if !(amplitude >= options.noise_floor) {
        return Err(Error::InsufficientSignal {
            amplitude,
            floor: options.noise_floor,
        });
    }

    let frequency = periodogram_peak(&centred);

    // average the tail over a whole number of periods
    let periods = (tail.len() as f64 * frequency).floor();
    let shift = if periods >= 1.0 {
        let span = ((periods / frequency).round() as usize).clamp(1, tail.len());
        residual[len - span..].iter().sum::<f64>() / span as f64
    } else {
        rough_mean
    };

    let (lo, hi) = options.fit_window;
    let mut log_t = Vec::new();
    let mut log_a = Vec::new();
    for i in 1..len - 1 {
        let t = trace.steps[i];
        if t < lo || t > hi {
            continue;
        }
        let here = (residual[i] - shift).abs();
        let before = (residual[i - 1] - shift).abs();
        let after = (residual[i + 1] - shift).abs();
        if here >= before && here > after && here > 0.0 && t > 0 {
            log_t.push((t as f64).ln());
            log_a.push(here.ln());
        }
    }
    if log_t.len() < 4 {
        return Err(Error::InsufficientSignal {
            amplitude,
            floor: options.noise_floor,
        });
    }
    let decay_exponent = least_squares_slope(&log_t, &log_a);
    Ok(ZitterMeasurement {
        amplitude,
        frequency,
        shift,
        decay_exponent,
    })
}

/// True iff the interference residual stays within `pred.amplitude_bound`.
pub fn zitter_bound_check(trace: &TrajectoryTrace, pred: &ZitterPrediction) -> bool {
    trace
        .interference(pred.drift)
        .iter()
        .all(|r| r.abs() <= pred.amplitude_bound)
}

/// Peak of `|sum_t x_t e^{-2 pi i f t}|^2` over `f = j/L`, refined by a
/// parabola through the peak and its neighbours. Ties go to the lower
/// frequency.
pub fn periodogram_peak(x: &[f64]) -> f64 {
    let len = x.len();
    let power = |j: usize| -> f64 {
        let f = j as f64 / len as f64;
        let mut acc = Complex64::new(0.0, 0.0);
        for (t, &v) in x.iter().enumerate() {
            acc += Complex64::from_polar(v, -2.0 * PI * f * t as f64);
        }
        acc.norm_sqr()
    };
    let top = len / 2;
    if top < 1 {
        return 0.0;
    }
    let spectrum: Vec<f64> = (0..=top).map(power).collect();
    let mut best = 1;
    for j in 2..=top {
        if spectrum[j] > spectrum[best] * (1.0 + 1e-9) {
            best = j;
        }
    }
    let mut offset = 0.0;
    if best < top {
        let (a, b, c) = (spectrum[best - 1], spectrum[best], spectrum[best + 1]);
        let denom = a - 2.0 * b + c;
        if denom != 0.0 {
            offset = (0.5 * (a - c) / denom).clamp(-0.5, 0.5);
        }
    }
    (best as f64 + offset) / len as f64
}

pub(crate) fn least_squares_slope(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let mut sxy = 0.0;
    let mut sxx = 0.0;
    for (a, b) in x.iter().zip(y) {
        sxy += (a - mx) * (b - my);
        sxx += (a - mx) * (a - mx);
    }
    sxy / sxx
}
