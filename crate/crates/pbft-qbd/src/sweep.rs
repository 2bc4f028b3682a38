//! Parameter sweeps: grid evaluation, presets, row schema, CSV/JSON output.
//!
//! A sweep fixes some of `lambda`, `mu`, `f`, `c` and sweeps one or two of
//! them over ranges or explicit lists. Every grid point yields one
//! [`SweepRow`], rows appear in deterministic outer-to-inner grid order
//! (first swept parameter outermost), and per-point failures are captured
//! in the row rather than aborting the sweep. Repeated runs of the same
//! config — including simulation seeds — produce byte-identical output.
//!
//! The shipped presets `fig3`–`fig6` cover two canonical parameter
//! groups: group one sweeps `mu` over [3, 9] (13 points) at `lambda = 1`,
//! group two sweeps `lambda` over [1, 3] (11 points) at `mu = 9`, both for
//! `f` in {50, 100, 320} and reward `c = 12.5`.

use std::collections::BTreeMap;
use std::fmt;
use std::io::Write;
use std::path::PathBuf;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::metrics;
use crate::model::ModelParams;
use crate::oracle;
use crate::sim::{self, SimConfig};
use crate::solver;
use crate::{Error, Result};

/// Compare mode runs the truncated-chain oracle only up to this `f`;
/// larger points fall back to simulation when [`SweepConfig::with_sim`]
/// is set, and run analytic-only otherwise.
pub const ORACLE_MAX_F: u32 = 10;

/// Which engine(s) a point runs through.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    #[default]
    Analytic,
    Simulate,
    Oracle,
    Compare,
}

impl FromStr for Mode {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "analytic" => Ok(Mode::Analytic),
            "simulate" => Ok(Mode::Simulate),
            "oracle" => Ok(Mode::Oracle),
            "compare" => Ok(Mode::Compare),
            other => Err(Error::InvalidSweepConfig(format!(
                "unknown mode `{other}` (expected analytic|simulate|oracle|compare)"
            ))),
        }
    }
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Mode::Analytic => "analytic",
            Mode::Simulate => "simulate",
            Mode::Oracle => "oracle",
            Mode::Compare => "compare",
        };
        f.write_str(s)
    }
}

/// Output serialization format.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    #[default]
    Csv,
    Json,
}

impl FromStr for OutputFormat {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "csv" => Ok(OutputFormat::Csv),
            "json" => Ok(OutputFormat::Json),
            other => Err(Error::InvalidSweepConfig(format!(
                "unknown format `{other}` (expected csv|json)"
            ))),
        }
    }
}

/// Metric selector for plot panels.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MetricKind {
    EK,
    EM,
    Gamma,
    Upsilon,
}

impl MetricKind {
    pub fn label(&self) -> &'static str {
        match self {
            MetricKind::EK => "E[K] (packages)",
            MetricKind::EM => "E[M] (nodes)",
            MetricKind::Gamma => "gamma (blocks/unit time)",
            MetricKind::Upsilon => "Upsilon (reward/unit time)",
        }
    }
}

/// Values of one swept parameter: an inclusive evenly spaced range or an
/// explicit list.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(untagged)]
pub enum SweptValues {
    Range { start: f64, stop: f64, steps: usize },
    List { list: Vec<f64> },
}

impl SweptValues {
    pub fn values(&self) -> Result<Vec<f64>> {
        match self {
            SweptValues::Range { start, stop, steps } => {
                if *steps == 0 {
                    return Err(Error::InvalidSweepConfig(
                        "range needs at least one step".into(),
                    ));
                }
                if !start.is_finite() || !stop.is_finite() {
                    return Err(Error::InvalidSweepConfig(
                        "range bounds must be finite".into(),
                    ));
                }
                if *steps == 1 {
                    return Ok(vec![*start]);
                }
                let mut v: Vec<f64> = (0..*steps)
                    .map(|i| start + i as f64 * (stop - start) / (*steps as f64 - 1.0))
                    .collect();
                v[*steps - 1] = *stop; // endpoints exact
                Ok(v)
            }
            SweptValues::List { list } => {
                if list.is_empty() {
                    return Err(Error::InvalidSweepConfig("empty sweep list".into()));
                }
                Ok(list.clone())
            }
        }
    }
}

/// One swept parameter: its name plus the values it takes.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SweptParam {
    pub param: String,
    #[serde(flatten)]
    pub values: SweptValues,
}

const MODEL_PARAM_NAMES: [&str; 4] = ["lambda", "mu", "f", "c"];

fn default_tol() -> f64 {
    solver::DEFAULT_TOL
}
fn default_max_iter() -> usize {
    solver::DEFAULT_MAX_ITER
}
fn default_tail() -> f64 {
    oracle::DEFAULT_TAIL_THRESHOLD
}
fn default_jobs() -> usize {
    1
}
fn default_plot_metrics() -> Vec<MetricKind> {
    vec![MetricKind::EK, MetricKind::EM]
}

/// Full description of a sweep. Deserializable from a TOML file; every
/// field except `sweep` has a default so the file stays short.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SweepConfig {
    /// Fixed model parameters by name.
    #[serde(default)]
    pub fixed: BTreeMap<String, f64>,
    /// One or two swept parameters, outer first.
    pub sweep: Vec<SweptParam>,
    #[serde(default)]
    pub mode: Mode,
    #[serde(default)]
    pub format: OutputFormat,
    /// Optional SVG destination.
    #[serde(default)]
    pub plot: Option<PathBuf>,
    /// Metrics rendered as plot panels.
    #[serde(default = "default_plot_metrics")]
    pub plot_metrics: Vec<MetricKind>,
    /// Simulation settings for simulate/compare modes. The per-point seed
    /// is `sim.seed + grid index` so rows stay independent yet
    /// reproducible.
    #[serde(default)]
    pub sim: Option<SimConfig>,
    #[serde(default = "default_tol")]
    pub tol: f64,
    #[serde(default = "default_max_iter")]
    pub max_iter: usize,
    /// Oracle truncation level; adaptive when absent.
    #[serde(default)]
    pub level_cap: Option<usize>,
    #[serde(default = "default_tail")]
    pub tail_threshold: f64,
    /// In compare mode, simulate points with `f > ORACLE_MAX_F` instead of
    /// skipping the cross-check.
    #[serde(default)]
    pub with_sim: bool,
    /// Worker threads for grid evaluation; rows are emitted in grid order
    /// regardless.
    #[serde(default = "default_jobs")]
    pub jobs: usize,
}

impl SweepConfig {
    pub fn validate(&self) -> Result<()> {
        if self.sweep.is_empty() || self.sweep.len() > 2 {
            return Err(Error::InvalidSweepConfig(format!(
                "need one or two swept parameters, got {}",
                self.sweep.len()
            )));
        }
        let mut seen: Vec<&str> = Vec::new();
        for sp in &self.sweep {
            if !MODEL_PARAM_NAMES.contains(&sp.param.as_str()) {
                return Err(Error::InvalidSweepConfig(format!(
                    "unknown swept parameter `{}`",
                    sp.param
                )));
            }
            if seen.contains(&sp.param.as_str()) {
                return Err(Error::InvalidSweepConfig(format!(
                    "parameter `{}` swept twice",
                    sp.param
                )));
            }
            if self.fixed.contains_key(&sp.param) {
                return Err(Error::InvalidSweepConfig(format!(
                    "parameter `{}` is both fixed and swept",
                    sp.param
                )));
            }
            let values = sp.values.values()?;
            if sp.param == "f" {
                for &v in &values {
                    if v.fract() != 0.0 || v < 1.0 || v > f64::from(u32::MAX) {
                        return Err(Error::InvalidSweepConfig(format!(
                            "swept f value {v} is not a positive integer"
                        )));
                    }
                }
            }
            seen.push(&sp.param);
        }
        for name in self.fixed.keys() {
            if !MODEL_PARAM_NAMES.contains(&name.as_str()) {
                return Err(Error::InvalidSweepConfig(format!(
                    "unknown fixed parameter `{name}`"
                )));
            }
        }
        for name in MODEL_PARAM_NAMES {
            let covered = self.fixed.contains_key(name) || seen.contains(&name);
            if !covered {
                return Err(Error::InvalidSweepConfig(format!(
                    "model parameter `{name}` appears in neither fixed nor swept sets"
                )));
            }
        }
        if self.jobs == 0 {
            return Err(Error::InvalidSweepConfig("jobs must be at least 1".into()));
        }
        if let Some(sim) = &self.sim {
            sim.validate()?;
        }
        Ok(())
    }

    /// The cartesian grid in emission order (outer parameter first).
    pub fn grid(&self) -> Result<Vec<BTreeMap<String, f64>>> {
        self.validate()?;
        let outer = self.sweep[0].values.values()?;
        let inner = match self.sweep.get(1) {
            Some(sp) => Some(sp.values.values()?),
            None => None,
        };
        let mut points = Vec::new();
        for &v0 in &outer {
            match &inner {
                Some(values1) => {
                    for &v1 in values1 {
                        let mut point = self.fixed.clone();
                        point.insert(self.sweep[0].param.clone(), v0);
                        point.insert(self.sweep[1].param.clone(), v1);
                        points.push(point);
                    }
                }
                None => {
                    let mut point = self.fixed.clone();
                    point.insert(self.sweep[0].param.clone(), v0);
                    points.push(point);
                }
            }
        }
        Ok(points)
    }

    fn eval_options(&self, point_index: usize) -> EvalOptions {
        let sim = match self.mode {
            Mode::Simulate | Mode::Compare => {
                let base = self.sim.unwrap_or_else(|| SimConfig::new(1_000_000.0, 0));
                Some(SimConfig {
                    seed: base.seed.wrapping_add(point_index as u64),
                    ..base
                })
            }
            _ => None,
        };
        EvalOptions {
            mode: self.mode,
            tol: self.tol,
            max_iter: self.max_iter,
            sim,
            level_cap: self.level_cap,
            tail_threshold: self.tail_threshold,
            with_sim: self.with_sim,
        }
    }

    /// Column groups present in this config's output.
    pub fn columns(&self) -> ColumnSet {
        ColumnSet {
            oracle: self.mode == Mode::Compare,
            sim: self.mode == Mode::Simulate || (self.mode == Mode::Compare && self.with_sim),
        }
    }
}

/// Per-point evaluation options; [`run_point`] consumes these.
#[derive(Debug, Clone)]
pub struct EvalOptions {
    pub mode: Mode,
    pub tol: f64,
    pub max_iter: usize,
    pub sim: Option<SimConfig>,
    pub level_cap: Option<usize>,
    pub tail_threshold: f64,
    pub with_sim: bool,
}

impl Default for EvalOptions {
    fn default() -> Self {
        EvalOptions {
            mode: Mode::Analytic,
            tol: solver::DEFAULT_TOL,
            max_iter: solver::DEFAULT_MAX_ITER,
            sim: None,
            level_cap: None,
            tail_threshold: oracle::DEFAULT_TAIL_THRESHOLD,
            with_sim: false,
        }
    }
}

/// One output row. Optional fields are empty (CSV) or null (JSON) when the
/// mode does not produce them or the point failed.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub lambda: f64,
    pub mu: f64,
    pub f: u32,
    pub n: u32,
    pub c: f64,
    pub rho: Option<f64>,
    pub stable: Option<bool>,
    pub e_k: Option<f64>,
    pub e_m: Option<f64>,
    pub gamma: Option<f64>,
    pub upsilon: Option<f64>,
    pub gamma_minus_lambda: Option<f64>,
    pub error_code: Option<String>,
    pub oracle_e_k: Option<f64>,
    pub oracle_e_m: Option<f64>,
    pub oracle_gamma: Option<f64>,
    pub oracle_upsilon: Option<f64>,
    pub sim_e_k: Option<f64>,
    pub sim_e_k_hw: Option<f64>,
    pub sim_e_m: Option<f64>,
    pub sim_e_m_hw: Option<f64>,
    pub sim_gamma: Option<f64>,
    pub sim_gamma_hw: Option<f64>,
}

impl SweepRow {
    fn empty(params: &ModelParams) -> Self {
        SweepRow {
            lambda: params.lambda(),
            mu: params.mu(),
            f: params.f(),
            n: params.n(),
            c: params.c(),
            rho: None,
            stable: None,
            e_k: None,
            e_m: None,
            gamma: None,
            upsilon: None,
            gamma_minus_lambda: None,
            error_code: None,
            oracle_e_k: None,
            oracle_e_m: None,
            oracle_gamma: None,
            oracle_upsilon: None,
            sim_e_k: None,
            sim_e_k_hw: None,
            sim_e_m: None,
            sim_e_m_hw: None,
            sim_gamma: None,
            sim_gamma_hw: None,
        }
    }

    /// Row for a grid point whose raw values never formed valid params.
    fn invalid(values: &BTreeMap<String, f64>, err: &Error) -> Self {
        let f_raw = values.get("f").copied().unwrap_or(0.0);
        let f = if f_raw.fract() == 0.0 && (1.0..=f64::from(u32::MAX)).contains(&f_raw) {
            f_raw as u32
        } else {
            0
        };
        SweepRow {
            lambda: values.get("lambda").copied().unwrap_or(f64::NAN),
            mu: values.get("mu").copied().unwrap_or(f64::NAN),
            f,
            n: if f > 0 { 3 * f + 1 } else { 0 },
            c: values.get("c").copied().unwrap_or(f64::NAN),
            error_code: Some(err.code().to_string()),
            ..SweepRow::empty(&ModelParams::new(1.0, 1.0, 1, 0.0).expect("valid placeholder"))
        }
    }

    fn set_error(&mut self, err: &Error) {
        if self.error_code.is_none() {
            self.error_code = Some(err.code().to_string());
        }
    }

    /// Metric value used for plotting: base columns first, then the sim
    /// estimates for simulate-only rows.
    pub fn metric(&self, kind: MetricKind) -> Option<f64> {
        match kind {
            MetricKind::EK => self.e_k.or(self.sim_e_k),
            MetricKind::EM => self.e_m.or(self.sim_e_m),
            MetricKind::Gamma => self.gamma.or(self.sim_gamma),
            MetricKind::Upsilon => self.upsilon,
        }
    }
}

/// Which optional column groups appear in the output.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ColumnSet {
    pub oracle: bool,
    pub sim: bool,
}

/// Evaluates a single parameter point under the requested mode. Errors are
/// captured in the row, never propagated.
pub fn run_point(params: &ModelParams, opts: &EvalOptions) -> SweepRow {
    let mut row = SweepRow::empty(params);
    let report = solver::check_stability(params);
    row.rho = Some(report.rho);
    row.stable = Some(report.stable);

    match opts.mode {
        Mode::Analytic => {
            fill_analytic(&mut row, params, opts);
        }
        Mode::Oracle => {
            fill_oracle_into_base(&mut row, params, opts);
        }
        Mode::Simulate => {
            fill_sim(&mut row, params, opts);
        }
        Mode::Compare => {
            fill_analytic(&mut row, params, opts);
            if params.f() <= ORACLE_MAX_F {
                match run_oracle(params, opts) {
                    Ok(m) => {
                        row.oracle_e_k = Some(m.e_k);
                        row.oracle_e_m = Some(m.e_m);
                        row.oracle_gamma = Some(m.gamma);
                        row.oracle_upsilon = Some(m.upsilon);
                    }
                    Err(e) => row.set_error(&e),
                }
            } else if opts.with_sim {
                fill_sim(&mut row, params, opts);
            }
        }
    }
    row
}

fn fill_analytic(row: &mut SweepRow, params: &ModelParams, opts: &EvalOptions) {
    match metrics::evaluate_all_with(params, opts.tol, opts.max_iter) {
        Ok(m) => {
            row.e_k = Some(m.e_k);
            row.e_m = Some(m.e_m);
            row.gamma = Some(m.gamma);
            row.upsilon = Some(m.upsilon);
            row.gamma_minus_lambda = Some(m.gamma_minus_lambda);
        }
        Err(e) => row.set_error(&e),
    }
}

fn run_oracle(params: &ModelParams, opts: &EvalOptions) -> Result<metrics::PerformanceMetrics> {
    let cap = opts
        .level_cap
        .unwrap_or_else(|| oracle::adaptive_level_cap(params, opts.tail_threshold));
    let solution = oracle::truncated_stationary(params, cap, opts.tail_threshold)?;
    Ok(oracle::oracle_metrics(&solution, params))
}

fn fill_oracle_into_base(row: &mut SweepRow, params: &ModelParams, opts: &EvalOptions) {
    match run_oracle(params, opts) {
        Ok(m) => {
            row.e_k = Some(m.e_k);
            row.e_m = Some(m.e_m);
            row.gamma = Some(m.gamma);
            row.upsilon = Some(m.upsilon);
            row.gamma_minus_lambda = Some(m.gamma_minus_lambda);
        }
        Err(e) => row.set_error(&e),
    }
}

fn fill_sim(row: &mut SweepRow, params: &ModelParams, opts: &EvalOptions) {
    let config = opts.sim.unwrap_or_else(|| SimConfig::new(1_000_000.0, 0));
    match sim::simulate(params, &config) {
        Ok(est) => {
            row.sim_e_k = Some(est.e_k_mean);
            row.sim_e_k_hw = Some(est.half_widths.e_k);
            row.sim_e_m = Some(est.e_m_mean);
            row.sim_e_m_hw = Some(est.half_widths.e_m);
            row.sim_gamma = Some(est.gamma_mean);
            row.sim_gamma_hw = Some(est.half_widths.gamma);
        }
        Err(e) => row.set_error(&e),
    }
}

fn evaluate_grid_point(values: &BTreeMap<String, f64>, opts: &EvalOptions) -> SweepRow {
    let lambda = values["lambda"];
    let mu = values["mu"];
    let f_raw = values["f"];
    let c = values["c"];
    if f_raw.fract() != 0.0 || f_raw < 1.0 || f_raw > f64::from(u32::MAX) {
        return SweepRow::invalid(
            values,
            &Error::InvalidParameter {
                name: "f",
                value: f_raw,
                reason: "Byzantine node count must be a positive integer",
            },
        );
    }
    match ModelParams::new(lambda, mu, f_raw as u32, c) {
        Ok(params) => run_point(&params, opts),
        Err(e) => SweepRow::invalid(values, &e),
    }
}

/// Evaluates the whole grid in deterministic order. With `jobs > 1` the
/// points run on a rayon pool; rows are still returned in grid order.
pub fn run_sweep(config: &SweepConfig) -> Result<Vec<SweepRow>> {
    let grid = config.grid()?;
    if config.jobs <= 1 {
        return Ok(grid
            .iter()
            .enumerate()
            .map(|(i, point)| evaluate_grid_point(point, &config.eval_options(i)))
            .collect());
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(config.jobs)
        .build()
        .map_err(|e| Error::InvalidSweepConfig(format!("thread pool: {e}")))?;
    use rayon::prelude::*;
    Ok(pool.install(|| {
        grid.par_iter()
            .enumerate()
            .map(|(i, point)| evaluate_grid_point(point, &config.eval_options(i)))
            .collect()
    }))
}

/// The shipped preset catalog: `fig3`, `fig4`, `fig5`, `fig6`.
pub fn presets() -> Vec<(&'static str, SweepConfig)> {
    let group_one_sweep = vec![
        SweptParam {
            param: "mu".into(),
            values: SweptValues::Range {
                start: 3.0,
                stop: 9.0,
                steps: 13,
            },
        },
        SweptParam {
            param: "f".into(),
            values: SweptValues::List {
                list: vec![50.0, 100.0, 320.0],
            },
        },
    ];
    let group_two_sweep = vec![
        SweptParam {
            param: "lambda".into(),
            values: SweptValues::Range {
                start: 1.0,
                stop: 3.0,
                steps: 11,
            },
        },
        SweptParam {
            param: "f".into(),
            values: SweptValues::List {
                list: vec![50.0, 100.0, 320.0],
            },
        },
    ];
    let base =
        |fixed: &[(&str, f64)], sweep: Vec<SweptParam>, panels: Vec<MetricKind>| SweepConfig {
            fixed: fixed.iter().map(|(k, v)| (k.to_string(), *v)).collect(),
            sweep,
            mode: Mode::Analytic,
            format: OutputFormat::Csv,
            plot: None,
            plot_metrics: panels,
            sim: None,
            tol: solver::DEFAULT_TOL,
            max_iter: solver::DEFAULT_MAX_ITER,
            level_cap: None,
            tail_threshold: oracle::DEFAULT_TAIL_THRESHOLD,
            with_sim: false,
            jobs: 1,
        };
    vec![
        (
            "fig3",
            base(
                &[("lambda", 1.0), ("c", 12.5)],
                group_one_sweep.clone(),
                vec![MetricKind::EK, MetricKind::EM],
            ),
        ),
        (
            "fig4",
            base(
                &[("lambda", 1.0), ("c", 12.5)],
                group_one_sweep,
                vec![MetricKind::Gamma, MetricKind::Upsilon],
            ),
        ),
        (
            "fig5",
            base(
                &[("mu", 9.0), ("c", 12.5)],
                group_two_sweep.clone(),
                vec![MetricKind::EK, MetricKind::EM],
            ),
        ),
        (
            "fig6",
            base(
                &[("mu", 9.0), ("c", 12.5)],
                group_two_sweep,
                vec![MetricKind::Gamma, MetricKind::Upsilon],
            ),
        ),
    ]
}

/// Looks up a preset by name.
pub fn preset(name: &str) -> Option<SweepConfig> {
    presets()
        .into_iter()
        .find(|(n, _)| *n == name)
        .map(|(_, c)| c)
}

/// Full double precision (17 significant digits) so cross-engine diffs
/// stay meaningful.
fn fmt_float(v: f64) -> String {
    format!("{v:.16e}")
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map(fmt_float).unwrap_or_default()
}

const BASE_COLUMNS: [&str; 13] = [
    "lambda",
    "mu",
    "f",
    "n",
    "c",
    "rho",
    "stable",
    "e_k",
    "e_m",
    "gamma",
    "upsilon",
    "gamma_minus_lambda",
    "error_code",
];
const ORACLE_COLUMNS: [&str; 4] = ["oracle_e_k", "oracle_e_m", "oracle_gamma", "oracle_upsilon"];
const SIM_COLUMNS: [&str; 6] = [
    "sim_e_k",
    "sim_e_k_hw",
    "sim_e_m",
    "sim_e_m_hw",
    "sim_gamma",
    "sim_gamma_hw",
];

/// Column names for a given set, in emission order.
pub fn column_names(columns: ColumnSet) -> Vec<&'static str> {
    let mut names: Vec<&'static str> = BASE_COLUMNS.to_vec();
    if columns.oracle {
        names.extend(ORACLE_COLUMNS);
    }
    if columns.sim {
        names.extend(SIM_COLUMNS);
    }
    names
}

fn row_cells(row: &SweepRow, columns: ColumnSet) -> Vec<String> {
    let mut cells = vec![
        fmt_float(row.lambda),
        fmt_float(row.mu),
        row.f.to_string(),
        row.n.to_string(),
        fmt_float(row.c),
        fmt_opt(row.rho),
        row.stable.map(|s| s.to_string()).unwrap_or_default(),
        fmt_opt(row.e_k),
        fmt_opt(row.e_m),
        fmt_opt(row.gamma),
        fmt_opt(row.upsilon),
        fmt_opt(row.gamma_minus_lambda),
        row.error_code.clone().unwrap_or_default(),
    ];
    if columns.oracle {
        cells.extend([
            fmt_opt(row.oracle_e_k),
            fmt_opt(row.oracle_e_m),
            fmt_opt(row.oracle_gamma),
            fmt_opt(row.oracle_upsilon),
        ]);
    }
    if columns.sim {
        cells.extend([
            fmt_opt(row.sim_e_k),
            fmt_opt(row.sim_e_k_hw),
            fmt_opt(row.sim_e_m),
            fmt_opt(row.sim_e_m_hw),
            fmt_opt(row.sim_gamma),
            fmt_opt(row.sim_gamma_hw),
        ]);
    }
    cells
}

/// Writes rows as CSV with a fixed documented column order.
pub fn write_csv<W: Write>(
    out: &mut W,
    rows: &[SweepRow],
    columns: ColumnSet,
) -> std::io::Result<()> {
    writeln!(out, "{}", column_names(columns).join(","))?;
    for row in rows {
        writeln!(out, "{}", row_cells(row, columns).join(","))?;
    }
    Ok(())
}

/// Writes rows as a JSON array mirroring the CSV schema (null for empty
/// cells).
pub fn write_json<W: Write>(
    out: &mut W,
    rows: &[SweepRow],
    columns: ColumnSet,
) -> std::io::Result<()> {
    use serde_json::{json, Map, Value};
    let mut array = Vec::with_capacity(rows.len());
    for row in rows {
        let mut object = Map::new();
        object.insert("lambda".into(), json!(row.lambda));
        object.insert("mu".into(), json!(row.mu));
        object.insert("f".into(), json!(row.f));
        object.insert("n".into(), json!(row.n));
        object.insert("c".into(), json!(row.c));
        object.insert("rho".into(), json!(row.rho));
        object.insert("stable".into(), json!(row.stable));
        object.insert("e_k".into(), json!(row.e_k));
        object.insert("e_m".into(), json!(row.e_m));
        object.insert("gamma".into(), json!(row.gamma));
        object.insert("upsilon".into(), json!(row.upsilon));
        object.insert("gamma_minus_lambda".into(), json!(row.gamma_minus_lambda));
        object.insert("error_code".into(), json!(row.error_code));
        if columns.oracle {
            object.insert("oracle_e_k".into(), json!(row.oracle_e_k));
            object.insert("oracle_e_m".into(), json!(row.oracle_e_m));
            object.insert("oracle_gamma".into(), json!(row.oracle_gamma));
            object.insert("oracle_upsilon".into(), json!(row.oracle_upsilon));
        }
        if columns.sim {
            object.insert("sim_e_k".into(), json!(row.sim_e_k));
            object.insert("sim_e_k_hw".into(), json!(row.sim_e_k_hw));
            object.insert("sim_e_m".into(), json!(row.sim_e_m));
            object.insert("sim_e_m_hw".into(), json!(row.sim_e_m_hw));
            object.insert("sim_gamma".into(), json!(row.sim_gamma));
            object.insert("sim_gamma_hw".into(), json!(row.sim_gamma_hw));
        }
        array.push(Value::Object(object));
    }
    let rendered = serde_json::to_string_pretty(&Value::Array(array))?;
    writeln!(out, "{rendered}")
}
