//! The five experiments. Each one computes all of its tables in memory; the
//! caller decides whether and where to write them.

use dirac_qca_core::evolution::{evolve, Backend, EvolveOptions, PotentialProfile};
use dirac_qca_core::observables::{
    record_trace, zitter_bound_check, zitter_measure, zitter_predict, MeasureOptions, TraceOptions,
};
use dirac_qca_core::scattering::{
    dynamic_scatter, scan_row, DynamicSetup, ScanGrid, ScanResult, ScatteringSolution,
};
use dirac_qca_core::spectral::{dispersion, group_velocity, MomentumGrid};
use dirac_qca_core::wavepacket::build_packet_with_profile;
use dirac_qca_core::{AutomatonParams, Complex64, FieldState, ModeBasis, RustFft};
use rayon::prelude::*;

use crate::config::{BackendChoice, Experiment, RunConfig};
use crate::error::CliError;
use crate::output::{Cell, Table};

/// Runs the configured experiment. The configuration must already have
/// passed validation.
pub fn run(config: &RunConfig) -> Result<Vec<Table>, CliError> {
    match config.experiment {
        Experiment::DispersionTable => dispersion_table(config),
        Experiment::FreeEvolve => free_evolve(config),
        Experiment::Zitter => zitter(config),
        Experiment::ScatterScan => scatter_scan(config),
        Experiment::ScatterDynamic => scatter_dynamic(config),
    }
}

fn basis(config: &RunConfig) -> Result<ModeBasis<RustFft>, CliError> {
    let p = AutomatonParams::new(config.physics.mass)?;
    Ok(ModeBasis::planned(p, config.numerics.sites)?)
}

fn packet(config: &RunConfig, basis: &ModeBasis<RustFft>) -> Result<FieldState, CliError> {
    let spec = config.spec();
    Ok(build_packet_with_profile(
        &spec,
        basis,
        config.guard(),
        |k| Complex64::new(spec.gaussian(k), 0.0),
    )?)
}

fn dispersion_table(config: &RunConfig) -> Result<Vec<Table>, CliError> {
    let mut k = MomentumGrid::new(config.numerics.sites)?.points().to_vec();
    k.sort_by(f64::total_cmp);
    config
        .physics
        .masses
        .iter()
        .map(|&m| {
            let p = AutomatonParams::new(m)?;
            let mut t =
                Table::new(format!("dispersion_m{m}"), &["k", "omega", "v"]).with_meta("m", m);
            for &k in &k {
                t.push(vec![
                    k.into(),
                    dispersion(k, &p).into(),
                    group_velocity(k, &p).into(),
                ]);
            }
            Ok(t)
        })
        .collect()
}

fn density_rows(table: &mut Table, step: usize, state: &FieldState) {
    for (i, w) in state.density().into_iter().enumerate() {
        table.push(vec![step.into(), Cell::Int(state.position(i)), w.into()]);
    }
}

fn snapshot(config: &RunConfig, step: usize, state: &FieldState) -> Table {
    let mut t = Table::new(
        "snapshot",
        &["x", "re_psi_r", "im_psi_r", "re_psi_l", "im_psi_l"],
    )
    .with_meta("N", state.sites())
    .with_meta("m", config.physics.mass)
    .with_meta("step", step);
    for (i, [r, l]) in state.amplitudes().iter().enumerate() {
        t.push(vec![
            Cell::Int(state.position(i)),
            r.re.into(),
            r.im.into(),
            l.re.into(),
            l.im.into(),
        ]);
    }
    t
}

fn free_evolve(config: &RunConfig) -> Result<Vec<Table>, CliError> {
    let basis = basis(config)?;
    let state = packet(config, &basis)?;
    let n = &config.numerics;
    let mut density = Table::new("density", &["step", "x", "density"])
        .with_meta("N", n.sites)
        .with_meta("m", config.physics.mass);
    let mut record = |t: usize, s: &FieldState| density_rows(&mut density, t, s);
    let backend = match n.backend {
        BackendChoice::Stencil => Backend::Stencil,
        BackendChoice::Spectral => Backend::Spectral(&basis),
    };
    let last = evolve(
        state,
        basis.params(),
        &PotentialProfile::zero(n.sites),
        n.steps,
        &EvolveOptions {
            backend,
            stride: n.stride,
        },
        &mut [&mut record],
    )?;
    let snap = snapshot(config, n.steps, &last);
    Ok(vec![density, snap])
}

fn zitter(config: &RunConfig) -> Result<Vec<Table>, CliError> {
    let basis = basis(config)?;
    let spec = config.spec();
    let state = packet(config, &basis)?;
    let n = &config.numerics;
    let pred = zitter_predict(&spec, basis.params(), n.sites)?;
    let options = TraceOptions {
        spectral: n.backend == BackendChoice::Spectral,
        ..TraceOptions::default()
    };
    let (trace, _) = record_trace(state, &basis, n.steps, options)?;
    let measured = zitter_measure(&trace, pred.drift, &MeasureOptions::default())?;

    let mut table = Table::new("trace", &["t", "x_mean", "p_mean", "x_detrended"])
        .with_meta("N", n.sites)
        .with_meta("m", config.physics.mass);
    let detrended = trace.detrended(pred.drift);
    for (i, d) in detrended.into_iter().enumerate() {
        table.push(vec![
            trace.steps[i].into(),
            trace.x_mean[i].into(),
            trace.p_mean[i].into(),
            d.into(),
        ]);
    }

    let peak = trace
        .interference(pred.drift)
        .iter()
        .fold(0.0f64, |a, r| a.max(r.abs()));
    let mut report = Table::new("zitter_report", &["quantity", "predicted", "measured"]);
    let mut row = |q: &str, a: f64, b: f64| report.push(vec![q.into(), a.into(), b.into()]);
    row("shift", pred.shift, measured.shift);
    row("frequency", pred.frequency, measured.frequency);
    row("drift", pred.drift, trace.mean_velocity.unwrap_or(f64::NAN));
    row("amplitude_bound", pred.amplitude_bound, peak);
    row("decay_exponent", -0.5, measured.decay_exponent);
    report.push(vec![
        "within_bound".into(),
        Cell::Int(1),
        Cell::Int(i64::from(zitter_bound_check(&trace, &pred))),
    ]);
    Ok(vec![table, report])
}

fn scan_cells(table: &mut Table, m: f64, row: &[ScatteringSolution]) {
    for s in row {
        table.push(vec![
            m.into(),
            s.k.into(),
            s.phi.into(),
            s.regime.as_str().into(),
            s.k_prime.into(),
            s.r.into(),
            s.t.into(),
            s.v_in.into(),
            s.v_out.into(),
        ]);
    }
}

fn scatter_scan(config: &RunConfig) -> Result<Vec<Table>, CliError> {
    let n = &config.numerics;
    let grid = ScanGrid::uniform(config.physics.masses.clone(), n.k_points, n.phi_points)?;
    let jobs: Vec<(f64, f64)> = grid
        .masses()
        .iter()
        .flat_map(|&m| grid.k().iter().map(move |&k| (m, k)))
        .collect();
    // rows come back in job order, so the output does not depend on scheduling
    let rows = jobs
        .par_iter()
        .map(|&(m, k)| scan_row(&AutomatonParams::new(m)?, k, grid.phi()))
        .collect::<Result<Vec<_>, _>>()?;
    let result = ScanResult::assemble(grid, rows)?;
    let grid = result.grid();

    let mut cells = Table::new(
        "scan",
        &[
            "m", "k", "phi", "regime", "k_prime", "R", "T", "v_in", "v_out",
        ],
    );
    let mut plateaus = Table::new(
        "plateau",
        &[
            "m",
            "k",
            "omega",
            "phi_first",
            "phi_last",
            "width",
            "klein_drop",
        ],
    );
    for (mi, &m) in grid.masses().iter().enumerate() {
        let p = AutomatonParams::new(m)?;
        for (ki, &k) in grid.k().iter().enumerate() {
            scan_cells(&mut cells, m, result.row(mi, ki));
            if let Some(pl) = result.plateau(mi, ki) {
                let drop = result.drops_after_plateau(mi, ki).map_or(-1, i64::from);
                plateaus.push(vec![
                    m.into(),
                    k.into(),
                    dispersion(k, &p).into(),
                    grid.phi()[pl.first].into(),
                    grid.phi()[pl.last].into(),
                    pl.width.into(),
                    Cell::Int(drop),
                ]);
            }
        }
    }
    Ok(vec![cells, plateaus])
}

fn scatter_dynamic(config: &RunConfig) -> Result<Vec<Table>, CliError> {
    let basis = basis(config)?;
    let n = &config.numerics;
    let setup = DynamicSetup {
        spec: config.spec(),
        phi: config.potential.phi,
        barrier: config.potential.barrier,
        steps: n.steps,
        stride: n.stride,
        guard: config.guard(),
    };
    let mut density = Table::new("density", &["step", "x", "density"])
        .with_meta("N", n.sites)
        .with_meta("m", config.physics.mass)
        .with_meta("phi", config.potential.phi);
    let mut record = |t: usize, s: &FieldState| density_rows(&mut density, t, s);
    let out = dynamic_scatter(&setup, &basis, &mut [&mut record])?;

    let mut summary = Table::new(
        "summary",
        &[
            "regime",
            "stop_step",
            "R_measured",
            "R_analytic",
            "v_out_measured",
            "v_out_analytic",
        ],
    );
    summary.push(vec![
        out.analytic.regime.as_str().into(),
        out.stop_step.into(),
        out.r_measured.into(),
        out.analytic.r.into(),
        out.v_out_measured.into(),
        out.analytic.v_out.into(),
    ]);
    Ok(vec![density, summary])
}
