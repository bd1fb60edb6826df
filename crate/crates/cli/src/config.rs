//! Run configuration: TOML file, `--set` overrides and validation.

// negated comparisons below reject NaN along with out-of-range values
#![allow(clippy::neg_cmp_op_on_partial_ord)]

use std::f64::consts::PI;
use std::fmt;

use dirac_qca_core::lattice::LeakageGuard;
use dirac_qca_core::observables::MIN_TRACE_STEPS;
use dirac_qca_core::{Complex64, WavepacketSpec};
use serde::{Deserialize, Serialize};

use crate::error::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Experiment {
    DispersionTable,
    FreeEvolve,
    Zitter,
    ScatterScan,
    ScatterDynamic,
}

impl Experiment {
    pub fn name(&self) -> &'static str {
        match self {
            Experiment::DispersionTable => "dispersion-table",
            Experiment::FreeEvolve => "free-evolve",
            Experiment::Zitter => "zitter",
            Experiment::ScatterScan => "scatter-scan",
            Experiment::ScatterDynamic => "scatter-dynamic",
        }
    }

    fn uses_packet(&self) -> bool {
        matches!(
            self,
            Experiment::FreeEvolve | Experiment::Zitter | Experiment::ScatterDynamic
        )
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
}

impl Format {
    pub fn extension(&self) -> &'static str {
        match self {
            Format::Csv => "csv",
            Format::Json => "json",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BackendChoice {
    Stencil,
    Spectral,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Physics {
    /// Mass for single-mass experiments.
    pub mass: f64,
    /// Masses for the dispersion table and scattering scan.
    pub masses: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Packet {
    pub k0: f64,
    pub sigma: f64,
    /// `[re, im]`
    pub c_plus: [f64; 2],
    pub c_minus: [f64; 2],
    /// Centre site; the middle of the ring when absent.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub x0: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Potential {
    pub phi: f64,
    /// First site of the step.
    pub barrier: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Numerics {
    pub sites: usize,
    pub steps: usize,
    pub backend: BackendChoice,
    pub stride: usize,
    pub guard_threshold: f64,
    pub k_points: usize,
    pub phi_points: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Output {
    pub dir: String,
    pub format: Format,
    /// Reserved for randomized runs; no experiment draws random numbers yet.
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub experiment: Experiment,
    pub physics: Physics,
    pub packet: Packet,
    pub potential: Potential,
    pub numerics: Numerics,
    pub output: Output,
}

impl Default for Physics {
    fn default() -> Self {
        Self {
            mass: 0.15,
            masses: vec![0.1, 0.2, 0.4, 0.8],
        }
    }
}

impl Default for Packet {
    fn default() -> Self {
        let h = 0.5f64.sqrt();
        Self {
            k0: 0.0,
            sigma: 1.0 / 40.0,
            c_plus: [h, 0.0],
            c_minus: [0.0, h],
            x0: None,
        }
    }
}

impl Default for Potential {
    fn default() -> Self {
        Self {
            phi: 0.0,
            barrier: 2048,
        }
    }
}

impl Default for Numerics {
    fn default() -> Self {
        Self {
            sites: 4096,
            steps: 800,
            backend: BackendChoice::Stencil,
            stride: 20,
            guard_threshold: LeakageGuard::default().threshold,
            k_points: 200,
            phi_points: 200,
        }
    }
}

impl Default for Output {
    fn default() -> Self {
        Self {
            dir: "out".into(),
            format: Format::Csv,
            seed: 0,
        }
    }
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            experiment: Experiment::FreeEvolve,
            physics: Physics::default(),
            packet: Packet::default(),
            potential: Potential::default(),
            numerics: Numerics::default(),
            output: Output::default(),
        }
    }
}

/// Every settable key as `(section, field)`; the top-level section is empty.
pub const KEYS: &[(&str, &str)] = &[
    ("", "experiment"),
    ("physics", "mass"),
    ("physics", "masses"),
    ("packet", "k0"),
    ("packet", "sigma"),
    ("packet", "c_plus"),
    ("packet", "c_minus"),
    ("packet", "x0"),
    ("potential", "phi"),
    ("potential", "barrier"),
    ("numerics", "sites"),
    ("numerics", "steps"),
    ("numerics", "backend"),
    ("numerics", "stride"),
    ("numerics", "guard_threshold"),
    ("numerics", "k_points"),
    ("numerics", "phi_points"),
    ("output", "dir"),
    ("output", "format"),
    ("output", "seed"),
];

fn resolve_key(key: &str) -> Result<(&'static str, &'static str), CliError> {
    if let Some((section, field)) = key.split_once('.') {
        return KEYS
            .iter()
            .find(|(s, f)| *s == section && *f == field)
            .copied()
            .ok_or_else(|| CliError::Usage(format!("unknown setting `{key}`")));
    }
    let matches: Vec<_> = KEYS.iter().filter(|(_, f)| *f == key).collect();
    match matches.as_slice() {
        [one] => Ok(**one),
        [] => Err(CliError::Usage(format!("unknown setting `{key}`"))),
        _ => Err(CliError::Usage(format!(
            "setting `{key}` is ambiguous; qualify it with its section"
        ))),
    }
}

// TOML literal, then a bare comma list as an array, then a plain string.
fn parse_value(raw: &str) -> toml::Value {
    let literal = |text: &str| {
        toml::from_str::<toml::Table>(&format!("v = {text}"))
            .ok()
            .and_then(|mut t| t.remove("v"))
    };
    literal(raw)
        .or_else(|| {
            raw.contains(',')
                .then(|| literal(&format!("[{raw}]")))
                .flatten()
        })
        .unwrap_or_else(|| toml::Value::String(raw.to_string()))
}

impl RunConfig {
    pub fn from_toml_str(text: &str) -> Result<Self, CliError> {
        toml::from_str(text)
            .map_err(|e| CliError::Usage(format!("invalid configuration: {}", e.message())))
    }

    pub fn to_toml_string(&self) -> String {
        toml::to_string(self).expect("configuration always serializes")
    }

    /// Applies `key=value`. `key` is `section.field`, or a bare field name
    /// when it is unique across sections.
    pub fn apply_override(&mut self, assignment: &str) -> Result<(), CliError> {
        let (key, raw) = assignment.split_once('=').ok_or_else(|| {
            CliError::Usage(format!(
                "override `{assignment}` is not of the form key=value"
            ))
        })?;
        let (section, field) = resolve_key(key.trim())?;
        let value = parse_value(raw.trim());
        // integers are welcome where floats are expected
        let widened = value.as_integer().map(|i| toml::Value::Float(i as f64));
        let mut result = self.with_value(section, field, value);
        if let (Err(_), Some(float)) = (&result, widened) {
            result = self.with_value(section, field, float);
        }
        *self = result.map_err(|e| {
            let name = if section.is_empty() {
                field.to_string()
            } else {
                format!("{section}.{field}")
            };
            CliError::Usage(format!("invalid value for {name}: {}", e.message()))
        })?;
        Ok(())
    }

    fn with_value(
        &self,
        section: &str,
        field: &str,
        value: toml::Value,
    ) -> Result<Self, toml::de::Error> {
        let mut doc = toml::Table::try_from(self).expect("configuration always serializes");
        let table = if section.is_empty() {
            &mut doc
        } else {
            doc.get_mut(section)
                .and_then(toml::Value::as_table_mut)
                .expect("sections are always present")
        };
        table.insert(field.to_string(), value);
        toml::Value::Table(doc).try_into()
    }

    pub fn spec(&self) -> WavepacketSpec {
        let p = &self.packet;
        WavepacketSpec {
            k0: p.k0,
            sigma: p.sigma,
            c_plus: Complex64::new(p.c_plus[0], p.c_plus[1]),
            c_minus: Complex64::new(p.c_minus[0], p.c_minus[1]),
            x0: p.x0,
        }
    }

    pub fn guard(&self) -> LeakageGuard {
        LeakageGuard {
            threshold: self.numerics.guard_threshold,
            ..LeakageGuard::default()
        }
    }

    /// Every problem with the settings the chosen experiment reads.
    pub fn validate(&self) -> Vec<Diagnostic> {
        let mut out = Vec::new();
        let mut error = |field: &str, message: String| out.push(Diagnostic::error(field, message));
        let n = &self.numerics;
        let exp = self.experiment;

        let mass_ok = |m: f64| m > 0.0 && m <= 1.0;
        match exp {
            Experiment::DispersionTable | Experiment::ScatterScan => {
                if self.physics.masses.is_empty() {
                    error("physics.masses", "no masses given".into());
                }
                for &m in &self.physics.masses {
                    if !mass_ok(m) {
                        error("physics.masses", format!("mass {m} out of (0,1]"));
                    }
                }
            }
            _ => {
                if !mass_ok(self.physics.mass) {
                    error(
                        "physics.mass",
                        format!("mass {} out of (0,1]", self.physics.mass),
                    );
                }
            }
        }

        if (matches!(exp, Experiment::DispersionTable) || exp.uses_packet())
            && (n.sites < 2 || !n.sites.is_multiple_of(2))
        {
            error(
                "numerics.sites",
                format!("ring size {} must be even and at least 2", n.sites),
            );
        }
        if exp.uses_packet() {
            if n.steps == 0 {
                error("numerics.steps", "need at least one step".into());
            }
            if n.stride == 0 {
                error("numerics.stride", "observer stride must be positive".into());
            }
            if !(n.guard_threshold > 0.0) {
                error(
                    "numerics.guard_threshold",
                    format!("threshold {} must be positive", n.guard_threshold),
                );
            }
        }
        if exp == Experiment::Zitter && n.steps <= MIN_TRACE_STEPS {
            error(
                "numerics.steps",
                format!("a Zitterbewegung trace needs more than {MIN_TRACE_STEPS} steps"),
            );
        }
        if exp == Experiment::ScatterScan {
            if n.k_points == 0 {
                error("numerics.k_points", "need at least one momentum".into());
            }
            if n.phi_points < 2 {
                error(
                    "numerics.phi_points",
                    "need at least two step heights".into(),
                );
            }
        }

        if exp.uses_packet() {
            self.validate_packet(&mut out);
        }
        if exp == Experiment::ScatterDynamic {
            self.validate_step(&mut out);
        }
        out
    }

    fn validate_packet(&self, out: &mut Vec<Diagnostic>) {
        let p = &self.packet;
        let sites = self.numerics.sites;
        let weight =
            p.c_plus[0].powi(2) + p.c_plus[1].powi(2) + p.c_minus[0].powi(2) + p.c_minus[1].powi(2);
        if !((weight - 1.0).abs() <= 1e-12) {
            out.push(Diagnostic::error(
                "packet.c_plus",
                format!("|c_+|^2 + |c_-|^2 = {weight}, expected 1"),
            ));
        }
        if !(-PI..=PI).contains(&p.k0) {
            out.push(Diagnostic::error(
                "packet.k0",
                format!("k0 = {} outside the Brillouin zone [-pi, pi]", p.k0),
            ));
        }
        if !(p.sigma > 0.0) {
            out.push(Diagnostic::error(
                "packet.sigma",
                format!("width {} must be positive", p.sigma),
            ));
            return;
        }
        if sites >= 2 && sites.is_multiple_of(2) {
            let min = WavepacketSpec::min_sigma(sites);
            if p.sigma < min {
                out.push(Diagnostic::error(
                    "packet.sigma",
                    format!(
                        "width {} is not resolved on {sites} sites (needs at least {min:.4})",
                        p.sigma
                    ),
                ));
            }
            let centre = p.x0.unwrap_or((sites / 2) as f64);
            if !(0.0..sites as f64).contains(&centre) {
                out.push(Diagnostic::error(
                    "packet.x0",
                    format!("centre {centre} is not on the ring"),
                ));
            } else {
                // density tails fall as exp(-(sigma d)^2)
                let band = self.guard().band_sites(sites) as f64;
                let room = (centre - band).min(sites as f64 - band - centre);
                let reach = 4.5 / p.sigma;
                if room < reach {
                    out.push(Diagnostic::error(
                        "packet.sigma",
                        format!("packet reaches {reach:.0} sites from its centre but only {room:.0} fit on the ring"),
                    ));
                }
            }
        }
        if p.k0.sin().abs() < 1e-12 && weight_difference(p).abs() > 1e-12 {
            out.push(Diagnostic::warning(
                "packet.k0",
                format!(
                    "k0 = {} is on the band edge: v(k0) = 0, the unbalanced packet will not drift",
                    p.k0
                ),
            ));
        }
    }

    fn validate_step(&self, out: &mut Vec<Diagnostic>) {
        let p = &self.packet;
        let sites = self.numerics.sites;
        if self.numerics.backend != BackendChoice::Stencil {
            out.push(Diagnostic::error(
                "numerics.backend",
                "scattering runs need the stencil backend".into(),
            ));
        }
        if p.c_minus != [0.0, 0.0] {
            out.push(Diagnostic::error(
                "packet.c_minus",
                "the incident packet must be a pure particle (c_minus = 0)".into(),
            ));
        }
        if !(p.k0 > 0.0 && p.k0 < PI) {
            out.push(Diagnostic::error(
                "packet.k0",
                format!("incident momentum {} must lie in (0, pi)", p.k0),
            ));
        }
        if !(0.0..=2.0 * PI).contains(&self.potential.phi) {
            out.push(Diagnostic::error(
                "potential.phi",
                format!("step height {} outside [0, 2pi]", self.potential.phi),
            ));
        }
        if self.potential.barrier >= sites {
            out.push(Diagnostic::error(
                "potential.barrier",
                format!(
                    "barrier site {} is not on a ring of {sites}",
                    self.potential.barrier
                ),
            ));
        } else if p.x0.unwrap_or((sites / 2) as f64) >= self.potential.barrier as f64 {
            out.push(Diagnostic::error(
                "packet.x0",
                "the packet must start left of the barrier".into(),
            ));
        }
    }
}

fn weight_difference(p: &Packet) -> f64 {
    p.c_plus[0].powi(2) + p.c_plus[1].powi(2) - p.c_minus[0].powi(2) - p.c_minus[1].powi(2)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Severity {
    Error,
    Warning,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Diagnostic {
    pub severity: Severity,
    /// `section.field` the problem was found in.
    pub field: String,
    pub message: String,
}

impl Diagnostic {
    fn error(field: &str, message: String) -> Self {
        Self {
            severity: Severity::Error,
            field: field.into(),
            message,
        }
    }

    fn warning(field: &str, message: String) -> Self {
        Self {
            severity: Severity::Warning,
            field: field.into(),
            message,
        }
    }
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let level = match self.severity {
            Severity::Error => "error",
            Severity::Warning => "warning",
        };
        write!(f, "{level}: {}: {}", self.field, self.message)
    }
}

/// True when no diagnostic is an error.
pub fn runnable(diagnostics: &[Diagnostic]) -> bool {
    diagnostics.iter().all(|d| d.severity == Severity::Warning)
}
