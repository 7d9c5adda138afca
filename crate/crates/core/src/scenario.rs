//! Declarative scenarios: TOML configuration, validation, the built-in
//! presets and the runner that turns a configuration into a CSV table plus a
//! JSON run manifest.
//!
//! Rates are in units of κ and times in units of 1/κ throughout. CSV files
//! carry no timestamps, so identical configurations produce byte-identical
//! tables; run metadata goes to the manifest written next to each table.

use serde::{Deserialize, Serialize};
use std::fmt;
use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::time::Instant;

use crate::error::Error;
use crate::exec::Execution;
use crate::lindblad::{
    evolve_adaptive, CutoffPolicy, InitialState, IntegratorOptions, StateChecks,
};
use crate::model::{ModelParams, PulseEnvelope};
use crate::protocols::{
    absorption_scan, coupling_sweep, leakage_of, rotation_fidelity, weak_probe_strength,
    RotationSpec,
};

/// Largest cutoff the runner will escalate to.
pub const CUTOFF_CAP: usize = 40;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScenarioKind {
    /// Time evolution from vacuum compared against the analytic rotation.
    Rotation,
    /// Time evolution under a drive pulse, tracking filter leakage.
    FilterPulse,
    /// Steady states over a grid of couplings `g`.
    FilterSteadySweep,
    /// Normalized steady-state absorption over a grid of probe detunings.
    AbsorptionScan,
    /// Time evolution from an arbitrary basis state.
    Custom,
}

impl ScenarioKind {
    fn is_time_evolution(self) -> bool {
        matches!(
            self,
            ScenarioKind::Rotation | ScenarioKind::FilterPulse | ScenarioKind::Custom
        )
    }

    /// Name of the first CSV column.
    pub fn sweep_variable(self) -> &'static str {
        match self {
            ScenarioKind::FilterSteadySweep => "g",
            ScenarioKind::AbsorptionScan => "delta_p",
            _ => "t",
        }
    }
}

/// Sample points of the swept variable.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum GridSpec {
    /// `points` evenly spaced values from `start` to `stop` inclusive.
    Linear {
        start: f64,
        stop: f64,
        points: usize,
    },
    /// `points` logarithmically spaced values from `start` to `stop` inclusive.
    Log {
        start: f64,
        stop: f64,
        points: usize,
    },
    Values {
        values: Vec<f64>,
    },
}

impl GridSpec {
    pub fn len(&self) -> usize {
        match self {
            GridSpec::Linear { points, .. } | GridSpec::Log { points, .. } => *points,
            GridSpec::Values { values } => values.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn values(&self) -> Vec<f64> {
        let spaced = |start: f64, stop: f64, points: usize| -> Vec<f64> {
            match points {
                0 => Vec::new(),
                1 => vec![start],
                _ => (0..points)
                    .map(|i| {
                        if i + 1 == points {
                            stop
                        } else {
                            start + (stop - start) * i as f64 / (points - 1) as f64
                        }
                    })
                    .collect(),
            }
        };
        match *self {
            GridSpec::Linear {
                start,
                stop,
                points,
            } => spaced(start, stop, points),
            GridSpec::Log {
                start,
                stop,
                points,
            } => spaced(start.log10(), stop.log10(), points)
                .into_iter()
                .enumerate()
                .map(|(i, x)| match i {
                    0 => start,
                    _ if i + 1 == points => stop,
                    _ => 10f64.powf(x),
                })
                .collect(),
            GridSpec::Values { ref values } => values.clone(),
        }
    }

    fn problems(&self) -> Vec<String> {
        let mut out = Vec::new();
        match *self {
            GridSpec::Linear { start, stop, .. } | GridSpec::Log { start, stop, .. } => {
                if !(start.is_finite() && stop.is_finite()) {
                    out.push("grid bounds must be finite".into());
                }
                if self.len() > 1 && !(stop > start) {
                    out.push("grid must be strictly increasing (stop > start)".into());
                }
                if matches!(self, GridSpec::Log { .. }) && !(start > 0.0) {
                    out.push("log grid needs start > 0".into());
                }
            }
            GridSpec::Values { ref values } => {
                if values.iter().any(|v| !v.is_finite()) {
                    out.push("grid values must be finite".into());
                }
                if values.windows(2).any(|w| !(w[1] > w[0])) {
                    out.push("grid values must be strictly increasing".into());
                }
            }
        }
        if self.is_empty() {
            out.push("grid is empty".into());
        }
        out
    }
}

/// One scenario, as read from a TOML file.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    pub name: String,
    pub kind: ScenarioKind,
    pub params: ModelParams,
    pub pulse: PulseEnvelope,
    pub grid: GridSpec,
    /// CSV file name, relative to the output directory.
    pub output: PathBuf,
    /// Starting Fock cutoff; escalation on the tail rule still applies.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fock_cutoff: Option<usize>,
    /// Number of `P_k` columns written.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fock_columns: Option<usize>,
    /// Initial state of time-evolution scenarios (ground state by default).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub initial: Option<InitialState>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Severity {
    Error,
    Warning,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Diagnostic {
    pub severity: Severity,
    pub message: String,
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let tag = match self.severity {
            Severity::Error => "error",
            Severity::Warning => "warning",
        };
        write!(f, "{tag}: {}", self.message)
    }
}

impl ScenarioConfig {
    pub fn from_toml_str(text: &str) -> Result<Self, ScenarioError> {
        toml::from_str(text).map_err(|e| ScenarioError::Config(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self, ScenarioError> {
        let text = fs::read_to_string(path)
            .map_err(|e| ScenarioError::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::from_toml_str(&text)
    }

    pub fn to_toml_string(&self) -> String {
        toml::to_string(self).expect("scenario configs always serialize")
    }

    /// Cutoff the first attempt runs at.
    pub fn starting_cutoff(&self) -> usize {
        let n = self.params.jc_order as usize;
        let m = self.params.drive_order as usize;
        self.fock_cutoff.unwrap_or(match self.kind {
            ScenarioKind::Rotation => n.max(m) + 6,
            ScenarioKind::AbsorptionScan => n + 6,
            _ => (n + 8).max(12),
        })
    }

    pub fn cutoff_policy(&self) -> CutoffPolicy {
        CutoffPolicy {
            cap: CUTOFF_CAP,
            ..CutoffPolicy::starting_at(self.starting_cutoff())
        }
    }

    pub fn fock_columns(&self) -> usize {
        let n = self.params.jc_order as usize;
        self.fock_columns.unwrap_or(match self.kind {
            ScenarioKind::Rotation => n + 1,
            _ => (n + 2).max(5),
        })
    }

    /// Checks the configuration without running anything.
    pub fn validate(&self) -> Vec<Diagnostic> {
        let mut out = Vec::new();
        let mut error = |m: String| {
            out.push(Diagnostic {
                severity: Severity::Error,
                message: m,
            })
        };
        let (n, m) = (self.params.jc_order, self.params.drive_order);

        if self.name.trim().is_empty() {
            error("name must not be empty".into());
        }
        if self.output.file_name().is_none() {
            error("output must name a file".into());
        }
        if let Err(e) = self.params.validate() {
            error(e.to_string());
        }
        if let Err(e) = self.pulse.validate() {
            error(e.to_string());
        }
        for p in self.grid.problems() {
            error(p);
        }
        let grid = self.grid.values();
        if self.kind.is_time_evolution() && grid.first().is_some_and(|&t| t != 0.0) {
            error("time grid must start at t = 0".into());
        }

        match self.kind {
            ScenarioKind::Rotation => {
                if m >= n {
                    error(format!(
                        "rotation scenario requires M < N (got N = {n}, M = {m})"
                    ));
                } else if 2 * m < n {
                    error(format!(
                        "rotation scenario requires M ≥ N/2 (got N = {n}, M = {m})"
                    ));
                }
            }
            ScenarioKind::AbsorptionScan => {
                if m != n {
                    error(format!(
                        "absorption scan requires M = N (got N = {n}, M = {m})"
                    ));
                }
            }
            ScenarioKind::FilterSteadySweep => {
                if grid.iter().any(|&g| g < 0.0) {
                    error("coupling grid must be non-negative".into());
                }
            }
            ScenarioKind::FilterPulse | ScenarioKind::Custom => {}
        }
        if matches!(
            self.kind,
            ScenarioKind::AbsorptionScan | ScenarioKind::FilterSteadySweep
        ) {
            if !matches!(self.pulse, PulseEnvelope::Constant { .. }) {
                error("steady-state scenarios need a constant drive".into());
            }
            if !(self.params.kappa > 0.0) {
                error("steady-state scenarios need κ > 0".into());
            }
        }

        let start = self.starting_cutoff();
        let floor = n as usize + 2;
        if start < floor {
            error(format!("Fock cutoff {start} is below N + 2 = {floor}"));
        }
        if start < self.params.min_cutoff() {
            error(format!(
                "Fock cutoff {start} cannot represent a^{}",
                n.max(m)
            ));
        }
        if start > CUTOFF_CAP {
            error(format!("Fock cutoff {start} exceeds the cap {CUTOFF_CAP}"));
        }
        if !(1..=CUTOFF_CAP).contains(&self.fock_columns()) {
            error(format!("fock_columns must be between 1 and {CUTOFF_CAP}"));
        }
        if let Some(InitialState::Basis { n: k, .. }) = self.initial {
            if !self.kind.is_time_evolution() {
                error("initial state only applies to time-evolution scenarios".into());
            } else if k >= start {
                error(format!(
                    "initial Fock state |{k}⟩ does not fit below cutoff {start}"
                ));
            }
        }

        if let PulseEnvelope::Gaussian { width, center, .. } = self.pulse {
            if width > 0.0 && center < 6.0 * width {
                out.push(Diagnostic {
                    severity: Severity::Warning,
                    message: format!(
                        "pulse center {center} is earlier than 6η = {}; the pulse is cut off at t = 0",
                        6.0 * width
                    ),
                });
            }
        }
        out
    }

    fn check(&self) -> Result<(), ScenarioError> {
        let errors: Vec<String> = self
            .validate()
            .into_iter()
            .filter(|d| d.severity == Severity::Error)
            .map(|d| d.message)
            .collect();
        if errors.is_empty() {
            Ok(())
        } else {
            Err(ScenarioError::Config(errors.join("; ")))
        }
    }
}

#[derive(Debug, thiserror::Error)]
pub enum ScenarioError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error(transparent)]
    Model(#[from] Error),
    #[error("I/O error on {path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("physicality checks failed: {}", .0.join("; "))]
    Invariant(Vec<String>),
}

impl ScenarioError {
    /// Machine-readable category.
    pub fn category(&self) -> &'static str {
        match self {
            ScenarioError::Config(_) => "config",
            ScenarioError::Model(e) => match e {
                Error::InvalidParameter(_)
                | Error::Inapplicable(_)
                | Error::CutoffTooSmall { .. } => "config",
                Error::CutoffCapReached { .. } => "cutoff_limit",
                Error::NonFinite { .. } => "integration_blowup",
                Error::NotConverged { .. } => "integration_not_converged",
                Error::SteadyState(_) | Error::Linalg(_) => "steady_state",
                Error::DimensionMismatch { .. } => "internal",
            },
            ScenarioError::Io { .. } => "io",
            ScenarioError::Invariant(_) => "invariant",
        }
    }

    /// 1 for configuration problems, 2 for runtime failures.
    pub fn exit_code(&self) -> i32 {
        if self.category() == "config" {
            1
        } else {
            2
        }
    }
}

/// Column-major numeric table with named columns.
#[derive(Clone, Debug, PartialEq)]
pub struct Table {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

impl Table {
    pub fn column(&self, name: &str) -> Option<Vec<f64>> {
        let j = self.columns.iter().position(|c| c == name)?;
        Some(self.rows.iter().map(|r| r[j]).collect())
    }

    /// CSV text with every value in 12 significant digits.
    pub fn to_csv(&self) -> String {
        let mut s = self.columns.join(",");
        s.push('\n');
        for row in &self.rows {
            let cells: Vec<String> = row.iter().map(|v| format!("{:.11e}", v)).collect();
            s.push_str(&cells.join(","));
            s.push('\n');
        }
        s
    }
}

/// Numerical facts about a finished run.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunSummary {
    /// Largest cutoff actually used.
    pub fock_cutoff: usize,
    /// Accepted RK4 substep (time-evolution scenarios).
    pub integrator_step: Option<f64>,
    /// Relative change at the last step halving.
    pub halving_change: Option<f64>,
    pub checks: StateChecks,
    pub tail_tolerance: f64,
    /// Absorption normalization `⟨a†a⟩_max` (absorption scans).
    #[serde(skip_serializing_if = "Option::is_none")]
    pub normalization: Option<f64>,
    /// `ε_m / (g √(2 (N−M)!))` (rotations).
    #[serde(skip_serializing_if = "Option::is_none")]
    pub validity_ratio: Option<f64>,
}

impl RunSummary {
    pub fn violations(&self) -> Vec<String> {
        self.checks.violations(self.tail_tolerance)
    }
}

/// Reproducibility record written next to each CSV.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct RunManifest {
    pub config: ScenarioConfig,
    pub csv: PathBuf,
    pub columns: Vec<String>,
    pub rows: usize,
    pub summary: RunSummary,
    pub violations: Vec<String>,
    pub execution: Execution,
    pub workers: usize,
    pub wall_clock_seconds: f64,
    pub started_at: String,
    pub version: String,
}

#[derive(Clone, Debug)]
pub struct RunOutcome {
    pub csv_path: PathBuf,
    pub manifest_path: PathBuf,
    pub table: Table,
    pub manifest: RunManifest,
}

fn population_headers(columns: usize) -> impl Iterator<Item = String> {
    (0..columns).map(|k| format!("P_{k}"))
}

fn padded(populations: &[f64], columns: usize) -> impl Iterator<Item = f64> + '_ {
    (0..columns).map(move |k| populations.get(k).copied().unwrap_or(0.0))
}

/// Runs `config` in memory.
pub fn execute(
    config: &ScenarioConfig,
    exec: Execution,
) -> Result<(Table, RunSummary), ScenarioError> {
    config.check()?;
    let params = &config.params;
    let grid = config.grid.values();
    let policy = config.cutoff_policy();
    let cols = config.fock_columns();
    let big_n = params.jc_order;

    match config.kind {
        ScenarioKind::Rotation | ScenarioKind::FilterPulse | ScenarioKind::Custom => {
            let initial = config.initial.unwrap_or(InitialState::Ground);
            let opts = IntegratorOptions::default();
            let traj = evolve_adaptive(params, &config.pulse, initial, &grid, &policy, &opts)?;
            let checks = StateChecks::over(&traj.states)?;
            let mut columns = vec!["t".to_string()];
            let mut validity_ratio = None;
            let fidelity = if config.kind == ScenarioKind::Rotation {
                let spec = RotationSpec::from_params(params, config.pulse.clone());
                validity_ratio = Some(spec.validity_ratio());
                Some(rotation_fidelity(&traj, &spec)?)
            } else {
                columns.push("eps".into());
                None
            };
            columns.extend(population_headers(cols));
            match config.kind {
                ScenarioKind::Rotation => columns.push("F_rotation".into()),
                ScenarioKind::FilterPulse => columns.extend(["n_mean".into(), "leakage".into()]),
                _ => columns.extend(["n_mean".into(), "P_e".into(), "leakage".into()]),
            }
            let rows = traj
                .times
                .iter()
                .enumerate()
                .map(|(i, &t)| {
                    let pops = &traj.populations[i];
                    let mut row = vec![t];
                    if fidelity.is_none() {
                        row.push(config.pulse.value(t));
                    }
                    row.extend(padded(pops, cols));
                    match config.kind {
                        ScenarioKind::Rotation => row.push(fidelity.as_ref().unwrap()[i]),
                        ScenarioKind::FilterPulse => {
                            row.extend([traj.photon_number[i], leakage_of(pops, big_n)])
                        }
                        _ => row.extend([
                            traj.photon_number[i],
                            traj.excited_population[i],
                            leakage_of(pops, big_n),
                        ]),
                    }
                    row
                })
                .collect();
            let summary = RunSummary {
                fock_cutoff: traj.dims.fock_cutoff(),
                integrator_step: Some(traj.step),
                halving_change: traj.halving_change,
                checks,
                tail_tolerance: policy.tail_tol,
                normalization: None,
                validity_ratio,
            };
            Ok((Table { columns, rows }, summary))
        }
        ScenarioKind::FilterSteadySweep => {
            let sweep = coupling_sweep(params, &grid, config.pulse.peak(), &policy, exec)?;
            let mut columns = vec!["g".to_string()];
            columns.extend(population_headers(cols));
            columns.extend(["n_mean".into(), "leakage".into()]);
            let rows = (0..grid.len())
                .map(|i| {
                    let mut row = vec![sweep.g[i]];
                    row.extend(padded(&sweep.populations[i], cols));
                    row.extend([sweep.photon_number[i], sweep.leakage[i]]);
                    row
                })
                .collect();
            let summary = RunSummary {
                fock_cutoff: sweep.max_cutoff,
                integrator_step: None,
                halving_change: None,
                checks: sweep.checks,
                tail_tolerance: policy.tail_tol,
                normalization: None,
                validity_ratio: None,
            };
            Ok((Table { columns, rows }, summary))
        }
        ScenarioKind::AbsorptionScan => {
            let eps0 = config.pulse.peak();
            let scan = absorption_scan(params, &grid, eps0, &policy, exec)?;
            let mut empty = params.clone();
            empty.g = 0.0;
            let reference = absorption_scan(&empty, &grid, eps0, &policy, exec)?;
            let columns = ["delta_p", "absorption", "n_mean", "absorption_g0"]
                .map(String::from)
                .to_vec();
            let rows = (0..grid.len())
                .map(|i| {
                    vec![
                        scan.delta_p[i],
                        scan.absorption[i],
                        scan.photon_number[i],
                        reference.absorption[i],
                    ]
                })
                .collect();
            let summary = RunSummary {
                fock_cutoff: scan.max_cutoff.max(reference.max_cutoff),
                integrator_step: None,
                halving_change: None,
                checks: scan.checks.merge(&reference.checks),
                tail_tolerance: policy.tail_tol,
                normalization: Some(scan.normalization),
                validity_ratio: None,
            };
            Ok((Table { columns, rows }, summary))
        }
    }
}

/// Writes `contents` to `path` through a temporary file and a rename.
fn write_atomic(path: &Path, contents: &[u8]) -> Result<(), ScenarioError> {
    let io = |source| ScenarioError::Io {
        path: path.to_path_buf(),
        source,
    };
    let mut tmp_name = path.file_name().unwrap_or_default().to_os_string();
    tmp_name.push(".tmp");
    let tmp = path.with_file_name(tmp_name);
    let mut file = fs::File::create(&tmp).map_err(io)?;
    file.write_all(contents).map_err(io)?;
    file.sync_all().map_err(io)?;
    drop(file);
    fs::rename(&tmp, path).map_err(io)
}

/// Path of the manifest belonging to a CSV file.
pub fn manifest_path(csv: &Path) -> PathBuf {
    csv.with_extension("manifest.json")
}

/// Runs `config`, writing the CSV and its manifest under `out_dir`.
///
/// Files are written even when the physicality checks fail, so the run can
/// be inspected; the failure is then reported as [`ScenarioError::Invariant`].
pub fn run(
    config: &ScenarioConfig,
    out_dir: &Path,
    exec: Execution,
    workers: usize,
) -> Result<RunOutcome, ScenarioError> {
    config.check()?;
    let started_at = chrono::Utc::now().to_rfc3339_opts(chrono::SecondsFormat::Secs, true);
    let clock = Instant::now();
    let (table, summary) = execute(config, exec)?;
    let wall_clock_seconds = clock.elapsed().as_secs_f64();

    fs::create_dir_all(out_dir).map_err(|source| ScenarioError::Io {
        path: out_dir.to_path_buf(),
        source,
    })?;
    let csv_path = out_dir.join(&config.output);
    write_atomic(&csv_path, table.to_csv().as_bytes())?;

    let violations = summary.violations();
    let manifest = RunManifest {
        config: config.clone(),
        csv: config.output.clone(),
        columns: table.columns.clone(),
        rows: table.rows.len(),
        summary,
        violations: violations.clone(),
        execution: exec,
        workers,
        wall_clock_seconds,
        started_at,
        version: env!("CARGO_PKG_VERSION").to_string(),
    };
    let manifest_path = manifest_path(&csv_path);
    let json = serde_json::to_vec_pretty(&manifest).expect("manifest always serializes");
    write_atomic(&manifest_path, &json)?;

    if !violations.is_empty() {
        return Err(ScenarioError::Invariant(violations));
    }
    Ok(RunOutcome {
        csv_path,
        manifest_path,
        table,
        manifest,
    })
}

/// Names accepted by [`preset`].
pub const PRESET_NAMES: &[&str] = &[
    "fig2a",
    "fig2b",
    "fig2c",
    "fig2d",
    "fig2",
    "fig3-pulse",
    "fig3-right",
    "fig3",
    "fig4",
    "all",
];

fn config(
    name: &str,
    kind: ScenarioKind,
    params: ModelParams,
    pulse: PulseEnvelope,
    grid: GridSpec,
) -> ScenarioConfig {
    ScenarioConfig {
        name: name.to_string(),
        kind,
        params,
        pulse,
        grid,
        output: PathBuf::from(format!("{name}.csv")),
        fock_cutoff: None,
        fock_columns: None,
        initial: None,
    }
}

fn rotation_preset(panel: char) -> ScenarioConfig {
    let (n, m) = if matches!(panel, 'a' | 'b') {
        (2, 1)
    } else {
        (3, 2)
    };
    let (g, eps0, t_end) = if matches!(panel, 'a' | 'c') {
        (1000.0, 100.0, 0.1)
    } else {
        (100.0, 10.0, 1.0)
    };
    config(
        &format!("fig2{panel}"),
        ScenarioKind::Rotation,
        ModelParams::new(n, m, g).with_rates(1.0, 0.5, 0.5),
        PulseEnvelope::constant(eps0),
        GridSpec::Linear {
            start: 0.0,
            stop: t_end,
            points: 501,
        },
    )
}

fn filter_pulse_presets() -> Vec<ScenarioConfig> {
    let width = std::f64::consts::SQRT_2;
    let pulse = PulseEnvelope::gaussian(4.0, width, 6.0 * width);
    let grid = GridSpec::Linear {
        start: 0.0,
        stop: 20.0,
        points: 201,
    };
    [("fig3a", 2, 0.0), ("fig3b", 2, 20.0), ("fig3c", 3, 20.0)]
        .into_iter()
        .map(|(name, n, g)| {
            config(
                name,
                ScenarioKind::FilterPulse,
                ModelParams::new(n, 1, g).with_rates(1.0, 0.5, 0.5),
                pulse.clone(),
                grid.clone(),
            )
        })
        .collect()
}

fn filter_sweep_presets() -> Vec<ScenarioConfig> {
    [("fig3d", 2), ("fig3e", 3), ("fig3f", 4)]
        .into_iter()
        .map(|(name, n)| {
            config(
                name,
                ScenarioKind::FilterSteadySweep,
                ModelParams::new(n, 1, 0.0).with_rates(1.0, 0.5, 0.5),
                PulseEnvelope::constant(2.0),
                GridSpec::Log {
                    start: 0.1,
                    stop: 100.0,
                    points: 31,
                },
            )
        })
        .collect()
}

fn absorption_presets() -> Vec<ScenarioConfig> {
    let g = 0.25;
    let mut out = Vec::new();
    for (panel, n) in [('a', 1u32), ('b', 2), ('c', 3), ('d', 4)] {
        for (label, rate) in [("low", 1e-4), ("high", 0.1)] {
            out.push(config(
                &format!("fig4{panel}-{label}"),
                ScenarioKind::AbsorptionScan,
                ModelParams::new(n, n, g).with_rates(1.0, rate, rate),
                PulseEnvelope::constant(weak_probe_strength(g, n)),
                GridSpec::Linear {
                    start: -0.8,
                    stop: 0.8,
                    points: 321,
                },
            ));
        }
    }
    out
}

/// Built-in scenarios reproducing the rotation, filter and absorption studies.
pub fn preset(name: &str) -> Option<Vec<ScenarioConfig>> {
    let configs = match name {
        "fig2a" | "fig2b" | "fig2c" | "fig2d" => vec![rotation_preset(name.chars().last()?)],
        "fig2" => "abcd".chars().map(rotation_preset).collect(),
        "fig3-pulse" => filter_pulse_presets(),
        "fig3-right" => filter_sweep_presets(),
        "fig3" => [filter_pulse_presets(), filter_sweep_presets()].concat(),
        "fig4" => absorption_presets(),
        "all" => ["fig2", "fig3", "fig4"]
            .iter()
            .flat_map(|p| preset(p).unwrap_or_default())
            .collect(),
        _ => return None,
    };
    Some(configs)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grids_hit_their_endpoints() {
        let lin = GridSpec::Linear {
            start: -0.8,
            stop: 0.8,
            points: 321,
        }
        .values();
        assert_eq!(lin.len(), 321);
        assert_eq!((lin[0], lin[320]), (-0.8, 0.8));
        assert!((lin[160]).abs() < 1e-15);
        let log = GridSpec::Log {
            start: 0.1,
            stop: 100.0,
            points: 31,
        }
        .values();
        assert_eq!((log[0], log[30]), (0.1, 100.0));
        assert!((log[20] - 10.0).abs() < 1e-12);
    }

    #[test]
    fn every_preset_is_clean() {
        for name in PRESET_NAMES {
            for cfg in preset(name).unwrap() {
                assert!(
                    cfg.validate().is_empty(),
                    "{}: {:?}",
                    cfg.name,
                    cfg.validate()
                );
                let back = ScenarioConfig::from_toml_str(&cfg.to_toml_string()).unwrap();
                assert_eq!(back, cfg);
            }
        }
        assert!(preset("fig5").is_none());
        assert_eq!(preset("all").unwrap().len(), 4 + 6 + 8);
    }

    #[test]
    fn rotation_needs_m_below_n() {
        let mut cfg = rotation_preset('a');
        cfg.params.drive_order = 2;
        let d = cfg.validate();
        assert_eq!(d.len(), 1);
        assert!(d[0].message.contains("requires M < N"));
    }

    #[test]
    fn default_cutoffs() {
        assert_eq!(rotation_preset('a').starting_cutoff(), 8);
        assert_eq!(rotation_preset('c').starting_cutoff(), 9);
        assert_eq!(filter_pulse_presets()[2].starting_cutoff(), 12);
        assert_eq!(absorption_presets()[7].starting_cutoff(), 10);
        let mut cfg = rotation_preset('a');
        cfg.fock_cutoff = Some(3);
        assert!(cfg
            .validate()
            .iter()
            .any(|d| d.message.contains("below N + 2")));
    }

    #[test]
    fn error_categories() {
        let e = ScenarioError::from(Error::CutoffCapReached {
            cap: 40,
            tail: 1e-3,
        });
        assert_eq!((e.category(), e.exit_code()), ("cutoff_limit", 2));
        let e = ScenarioError::from(Error::NonFinite { t: 1.0 });
        assert_eq!((e.category(), e.exit_code()), ("integration_blowup", 2));
        let e = ScenarioError::Config("bad".into());
        assert_eq!((e.category(), e.exit_code()), ("config", 1));
    }

    #[test]
    fn csv_uses_twelve_significant_digits() {
        let t = Table {
            columns: vec!["t".into(), "P_0".into()],
            rows: vec![vec![0.0, 1.0 / 3.0]],
        };
        assert_eq!(t.to_csv(), "t,P_0\n0.00000000000e0,3.33333333333e-1\n");
    }
}
