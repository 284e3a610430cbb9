//! Parameter sweeps of the QSL time over `γ` for one initial-state family.
//!
//! # Config format
//!
//! A flat TOML document; every key is a top-level scalar or a flat array and
//! unknown keys are rejected.
//!
//! | key                | type            | default                              |
//! |--------------------|-----------------|--------------------------------------|
//! | `state_family`     | string          | required (`werner-psi0`, `werner-psi1`, `werner-psi1-swapped`, `horodecki`) |
//! | `state_params`     | array of number | `[0.3, 0.5, 0.7, 1.0]` (Werner), `[0.0, 0.5, 0.9, 1.5]` (Horodecki) |
//! | `gamma_grid`       | array of number | 100 log-spaced points on `[0.01, 5]` |
//! | `lambda`           | number          | required                             |
//! | `theta`            | number          | required                             |
//! | `tau`              | number          | `1.0`                                |
//! | `quadrature_steps` | integer         | `256`                                |
//! | `blp`              | bool            | `false`; implied by any `blp_*` key  |
//! | `blp_t_max`        | number          | channel dependent                    |
//! | `blp_dt`           | number          | `0.005`                              |
//! | `blp_seed`         | integer         | fixed                                |
//! | `output_path`      | string          | `"sweep.csv"`                        |
//! | `emit_svg`         | bool            | `false`                              |
//!
//! Both atoms always share one reservoir, so there is a single `(γ, λ, θ)`.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use toml::{Table, Value};

use crate::error::{Error, Result};
use crate::metrics::{blp_measure, default_t_max, qsl_time, PairFamily, DEFAULT_BLP_DT};
use crate::states::{classify_region, negativity, StateFamily};
use crate::tol;
use crate::vchannel::ChannelParams;

pub const DEFAULT_TAU: f64 = 1.0;
pub const DEFAULT_QUADRATURE_STEPS: usize = 256;
pub const DEFAULT_OUTPUT: &str = "sweep.csv";
pub const DEFAULT_LAMBDAS: [f64; 3] = [0.1, 1.0, 10.0];
pub const DEFAULT_WERNER_PARAMS: [f64; 4] = [0.3, 0.5, 0.7, 1.0];
pub const DEFAULT_HORODECKI_PARAMS: [f64; 4] = [0.0, 0.5, 0.9, 1.5];

pub const CSV_HEADER: &str =
    "state_family,state_param,gamma,lambda,theta,tau,fidelity,x_of_tau,tau_qsl,negativity,region,n_measure";

/// `n` points log-spaced on `[lo, hi]`, endpoints exact.
pub fn log_grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    match n {
        0 => Vec::new(),
        1 => vec![lo],
        _ => {
            let ratio = (hi / lo).ln();
            let mut g: Vec<f64> = (0..n)
                .map(|i| lo * (ratio * i as f64 / (n - 1) as f64).exp())
                .collect();
            g[n - 1] = hi;
            g
        }
    }
}

pub fn default_gamma_grid() -> Vec<f64> {
    log_grid(0.01, 5.0, 100)
}

pub fn default_state_params(family: StateFamily) -> Vec<f64> {
    match family {
        StateFamily::Werner(_) => DEFAULT_WERNER_PARAMS.to_vec(),
        StateFamily::Horodecki => DEFAULT_HORODECKI_PARAMS.to_vec(),
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BlpSettings {
    /// `None` picks [`default_t_max`] per grid point.
    pub t_max: Option<f64>,
    pub dt: f64,
    pub seed: u64,
}

impl Default for BlpSettings {
    fn default() -> Self {
        Self {
            t_max: None,
            dt: DEFAULT_BLP_DT,
            seed: PairFamily::default().seed,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepConfig {
    pub state_family: StateFamily,
    pub state_params: Vec<f64>,
    pub gamma_grid: Vec<f64>,
    pub lambda: f64,
    pub theta: f64,
    pub tau: f64,
    pub quadrature_steps: usize,
    pub blp: Option<BlpSettings>,
    pub output_path: PathBuf,
    pub emit_svg: bool,
}

impl SweepConfig {
    /// The default grid for one family at one spectral width.
    pub fn default_for(family: StateFamily, lambda: f64) -> Self {
        Self {
            state_family: family,
            state_params: default_state_params(family),
            gamma_grid: default_gamma_grid(),
            lambda,
            theta: 1.0,
            tau: DEFAULT_TAU,
            quadrature_steps: DEFAULT_QUADRATURE_STEPS,
            blp: None,
            output_path: PathBuf::from(format!("{}_lambda{}.csv", family.label(), lambda)),
            emit_svg: false,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let invalid = |field: &str, message: String| Error::Validation {
            field: field.to_string(),
            message,
        };
        if self.state_params.is_empty() {
            return Err(invalid("state_params", "must not be empty".into()));
        }
        for &x in &self.state_params {
            if self.state_family.check_param(x).is_err() {
                let (lo, hi) = self.state_family.domain();
                return Err(invalid(
                    "state_params",
                    format!("{} out of [{lo},{hi}]: {x}", self.state_family.param_name()),
                ));
            }
        }
        ascending("state_params", &self.state_params)?;
        if self.gamma_grid.is_empty() {
            return Err(invalid("gamma_grid", "must not be empty".into()));
        }
        if let Some(g) = self.gamma_grid.iter().find(|g| !(g.is_finite() && **g > 0.0)) {
            return Err(invalid("gamma_grid", format!("{g} is not a positive rate")));
        }
        ascending("gamma_grid", &self.gamma_grid)?;
        if !(self.lambda.is_finite() && self.lambda > 0.0) {
            return Err(invalid("lambda", format!("{} is not positive", self.lambda)));
        }
        if !(self.theta.is_finite() && self.theta.abs() <= 1.0) {
            return Err(invalid("theta", format!("|{}| > 1", self.theta)));
        }
        if !(self.tau.is_finite() && self.tau > 0.0) {
            return Err(invalid("tau", format!("{} is not positive", self.tau)));
        }
        let n = self.quadrature_steps;
        if !n.is_multiple_of(2) || !(tol::QUADRATURE_MIN_INTERVALS..=tol::QUADRATURE_MAX_INTERVALS / 2).contains(&n) {
            return Err(invalid(
                "quadrature_steps",
                format!(
                    "{n} must be even and between {} and {}",
                    tol::QUADRATURE_MIN_INTERVALS,
                    tol::QUADRATURE_MAX_INTERVALS / 2
                ),
            ));
        }
        if let Some(blp) = &self.blp {
            if !(blp.dt > 0.0 && blp.dt <= 1e-2) {
                return Err(invalid("blp_dt", format!("{} must lie in (0, 0.01]", blp.dt)));
            }
            if let Some(t) = blp.t_max {
                if !(t.is_finite() && t >= blp.dt) {
                    return Err(invalid("blp_t_max", format!("{t} must be at least blp_dt")));
                }
            }
        }
        Ok(())
    }

    pub fn svg_path(&self) -> PathBuf {
        self.output_path.with_extension("svg")
    }
}

fn ascending(field: &str, xs: &[f64]) -> Result<()> {
    if let Some(w) = xs.windows(2).find(|w| !(w[1] > w[0])) {
        return Err(Error::Validation {
            field: field.to_string(),
            message: format!("not strictly ascending at {} -> {}", w[0], w[1]),
        });
    }
    Ok(())
}

/// The twelve default sweeps: every family at every default `λ`.
pub fn default_sweep_configs() -> Vec<SweepConfig> {
    StateFamily::ALL
        .into_iter()
        .flat_map(|f| DEFAULT_LAMBDAS.into_iter().map(move |l| SweepConfig::default_for(f, l)))
        .collect()
}

const KNOWN_KEYS: [&str; 13] = [
    "state_family",
    "state_params",
    "gamma_grid",
    "lambda",
    "theta",
    "tau",
    "quadrature_steps",
    "blp",
    "blp_t_max",
    "blp_dt",
    "blp_seed",
    "output_path",
    "emit_svg",
];

struct Fields<'a> {
    table: &'a Table,
}

impl Fields<'_> {
    fn wrong_type(key: &str, expected: &str, got: &Value) -> Error {
        Error::Validation {
            field: key.to_string(),
            message: format!("expected {expected}, found {}", got.type_str()),
        }
    }

    fn missing(key: &str) -> Error {
        Error::Validation {
            field: key.to_string(),
            message: "required key is missing".into(),
        }
    }

    fn number(&self, key: &str) -> Result<Option<f64>> {
        match self.table.get(key) {
            None => Ok(None),
            Some(Value::Float(x)) => Ok(Some(*x)),
            Some(Value::Integer(i)) => Ok(Some(*i as f64)),
            Some(v) => Err(Self::wrong_type(key, "a number", v)),
        }
    }

    fn integer(&self, key: &str) -> Result<Option<i64>> {
        match self.table.get(key) {
            None => Ok(None),
            Some(Value::Integer(i)) => Ok(Some(*i)),
            Some(v) => Err(Self::wrong_type(key, "an integer", v)),
        }
    }

    fn boolean(&self, key: &str) -> Result<Option<bool>> {
        match self.table.get(key) {
            None => Ok(None),
            Some(Value::Boolean(b)) => Ok(Some(*b)),
            Some(v) => Err(Self::wrong_type(key, "a boolean", v)),
        }
    }

    fn string(&self, key: &str) -> Result<Option<&str>> {
        match self.table.get(key) {
            None => Ok(None),
            Some(Value::String(s)) => Ok(Some(s)),
            Some(v) => Err(Self::wrong_type(key, "a string", v)),
        }
    }

    fn numbers(&self, key: &str) -> Result<Option<Vec<f64>>> {
        match self.table.get(key) {
            None => Ok(None),
            Some(Value::Array(items)) => items
                .iter()
                .map(|v| match v {
                    Value::Float(x) => Ok(*x),
                    Value::Integer(i) => Ok(*i as f64),
                    other => Err(Self::wrong_type(key, "an array of numbers", other)),
                })
                .collect::<Result<Vec<_>>>()
                .map(Some),
            Some(v) => Err(Self::wrong_type(key, "an array of numbers", v)),
        }
    }
}

/// Parses and validates a config document. `origin` names the source in
/// diagnostics.
pub fn parse_config_from(text: &str, origin: &str) -> Result<SweepConfig> {
    let table: Table = text.parse().map_err(|e: toml::de::Error| Error::Parse {
        path: origin.to_string(),
        message: describe_toml_error(text, &e),
    })?;
    if let Some(key) = table.keys().find(|k| !KNOWN_KEYS.contains(&k.as_str())) {
        return Err(Error::Validation {
            field: key.clone(),
            message: format!("unknown key (expected one of: {})", KNOWN_KEYS.join(", ")),
        });
    }
    let fields = Fields { table: &table };

    let family_name = fields.string("state_family")?.ok_or_else(|| Fields::missing("state_family"))?;
    let state_family: StateFamily = family_name.parse().map_err(|message| Error::Validation {
        field: "state_family".into(),
        message,
    })?;

    let quadrature_steps = match fields.integer("quadrature_steps")? {
        None => DEFAULT_QUADRATURE_STEPS,
        Some(n) if n > 0 => n as usize,
        Some(n) => {
            return Err(Error::Validation {
                field: "quadrature_steps".into(),
                message: format!("{n} is not a positive integer"),
            })
        }
    };

    let blp_keys_present = ["blp_t_max", "blp_dt", "blp_seed"]
        .iter()
        .any(|k| table.contains_key(*k));
    let blp_enabled = fields.boolean("blp")?.unwrap_or(blp_keys_present);
    let blp = if blp_enabled {
        let defaults = BlpSettings::default();
        let seed = match fields.integer("blp_seed")? {
            None => defaults.seed,
            Some(s) if s >= 0 => s as u64,
            Some(s) => {
                return Err(Error::Validation {
                    field: "blp_seed".into(),
                    message: format!("{s} is negative"),
                })
            }
        };
        Some(BlpSettings {
            t_max: fields.number("blp_t_max")?,
            dt: fields.number("blp_dt")?.unwrap_or(defaults.dt),
            seed,
        })
    } else {
        None
    };

    let cfg = SweepConfig {
        state_family,
        state_params: fields
            .numbers("state_params")?
            .unwrap_or_else(|| default_state_params(state_family)),
        gamma_grid: fields.numbers("gamma_grid")?.unwrap_or_else(default_gamma_grid),
        lambda: fields.number("lambda")?.ok_or_else(|| Fields::missing("lambda"))?,
        theta: fields.number("theta")?.ok_or_else(|| Fields::missing("theta"))?,
        tau: fields.number("tau")?.unwrap_or(DEFAULT_TAU),
        quadrature_steps,
        blp,
        output_path: PathBuf::from(fields.string("output_path")?.unwrap_or(DEFAULT_OUTPUT)),
        emit_svg: fields.boolean("emit_svg")?.unwrap_or(false),
    };
    cfg.validate()?;
    Ok(cfg)
}

pub fn parse_config(text: &str) -> Result<SweepConfig> {
    parse_config_from(text, "<config>")
}

pub fn load_config(path: &Path) -> Result<SweepConfig> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_config_from(&text, &path.display().to_string())
}

fn describe_toml_error(text: &str, e: &toml::de::Error) -> String {
    let msg = e.message().trim().to_string();
    match e.span() {
        Some(span) => {
            let line = text[..span.start.min(text.len())].matches('\n').count() + 1;
            format!("line {line}: {msg}")
        }
        None => msg,
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub state_family: StateFamily,
    pub state_param: f64,
    pub gamma: f64,
    pub lambda: f64,
    pub theta: f64,
    pub tau: f64,
    pub fidelity: f64,
    pub x_of_tau: f64,
    pub tau_qsl: f64,
    pub negativity: f64,
    pub region: crate::states::RegionLabel,
    pub n_measure: Option<f64>,
}

impl SweepRow {
    pub fn check(&self) -> Result<()> {
        let bad = |what: String| Error::AtGridPoint {
            context: self.coordinates(),
            source: Box::new(Error::InvalidState(what)),
        };
        if !(self.tau_qsl <= self.tau + tol::QSL_BOUND_SLACK) {
            return Err(bad(format!("tau_qsl {} exceeds tau {}", self.tau_qsl, self.tau)));
        }
        if !(self.negativity >= 0.0) {
            return Err(bad(format!("negativity {} is negative", self.negativity)));
        }
        Ok(())
    }

    fn coordinates(&self) -> String {
        format!(
            "{} {}={}, gamma={}",
            self.state_family,
            self.state_family.param_name(),
            self.state_param,
            self.gamma
        )
    }
}

/// Evaluates every `(state_param, γ)` grid point. Rows come back ordered by
/// state parameter, then `γ`, regardless of how the work was scheduled.
pub fn run_sweep(cfg: &SweepConfig) -> Result<Vec<SweepRow>> {
    cfg.validate()?;
    let family = cfg.state_family;

    let states: Vec<_> = cfg
        .state_params
        .iter()
        .map(|&x| {
            let rho = family.state(x)?;
            let neg = negativity(&rho)?;
            let region = classify_region(family, x)?.label;
            Ok((x, rho, neg, region))
        })
        .collect::<Result<_>>()?;

    let n_measures: Vec<Option<f64>> = match &cfg.blp {
        None => vec![None; cfg.gamma_grid.len()],
        Some(blp) => cfg
            .gamma_grid
            .par_iter()
            .map(|&gamma| {
                let p = ChannelParams::symmetric(gamma, cfg.theta, cfg.lambda)?;
                let fam = PairFamily {
                    seed: blp.seed,
                    ..PairFamily::default()
                };
                let t_max = blp.t_max.unwrap_or_else(|| default_t_max(&p));
                let r = blp_measure(&p, t_max, blp.dt, &fam).map_err(|e| Error::AtGridPoint {
                    context: format!("BLP gamma={gamma}"),
                    source: Box::new(e),
                })?;
                Ok(Some(r.n_measure))
            })
            .collect::<Result<_>>()?,
    };

    let points: Vec<(usize, usize)> = (0..states.len())
        .flat_map(|s| (0..cfg.gamma_grid.len()).map(move |g| (s, g)))
        .collect();

    let rows: Vec<SweepRow> = points
        .par_iter()
        .map(|&(s, g)| {
            let (param, rho, neg, region) = &states[s];
            let gamma = cfg.gamma_grid[g];
            let annotate = |e: Error| Error::AtGridPoint {
                context: format!("{family} {}={param}, gamma={gamma}", family.param_name()),
                source: Box::new(e),
            };
            let p = ChannelParams::symmetric(gamma, cfg.theta, cfg.lambda).map_err(annotate)?;
            let q = qsl_time(rho, &p, cfg.tau, cfg.quadrature_steps).map_err(annotate)?;
            let row = SweepRow {
                state_family: family,
                state_param: *param,
                gamma,
                lambda: cfg.lambda,
                theta: cfg.theta,
                tau: cfg.tau,
                fidelity: q.fidelity,
                x_of_tau: q.x_of_tau,
                tau_qsl: q.tau_qsl,
                negativity: *neg,
                region: *region,
                n_measure: n_measures[g],
            };
            row.check()?;
            Ok(row)
        })
        .collect::<Result<_>>()?;
    Ok(rows)
}

/// `%.12g`-style rendering: 12 significant digits, trailing zeros removed,
/// scientific notation outside `[1e-5, 1e12)`.
pub fn format_number(x: f64) -> String {
    if x == 0.0 {
        return "0".into();
    }
    if !x.is_finite() {
        return if x.is_nan() { "nan".into() } else if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    let sci = format!("{x:.11e}");
    let (mantissa, exp) = sci.split_once('e').expect("exponent present");
    let exp: i32 = exp.parse().expect("integer exponent");
    if (-5..12).contains(&exp) {
        let decimals = (11 - exp) as usize;
        trim_zeros(format!("{x:.decimals$}"))
    } else {
        format!("{}e{exp}", trim_zeros(mantissa.to_string()))
    }
}

fn trim_zeros(s: String) -> String {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.').to_string()
    } else {
        s
    }
}

pub fn csv_string(rows: &[SweepRow]) -> Result<String> {
    let mut out = String::with_capacity(64 * (rows.len() + 1));
    out.push_str(CSV_HEADER);
    out.push('\n');
    for row in rows {
        row.check()?;
        let nums = [
            row.state_param,
            row.gamma,
            row.lambda,
            row.theta,
            row.tau,
            row.fidelity,
            row.x_of_tau,
            row.tau_qsl,
            row.negativity,
        ]
        .map(format_number);
        let n = row.n_measure.map(format_number).unwrap_or_default();
        writeln!(out, "{},{},{},{}", row.state_family, nums.join(","), row.region, n)
            .expect("writing to a String cannot fail");
    }
    Ok(out)
}

pub fn write_csv(rows: &[SweepRow], path: &Path) -> Result<()> {
    let text = csv_string(rows)?;
    fs::write(path, text).map_err(|e| Error::io(path, e))
}

const SVG_WIDTH: f64 = 800.0;
const SVG_HEIGHT: f64 = 600.0;
const PLOT_LEFT: f64 = 90.0;
const PLOT_RIGHT: f64 = 620.0;
const PLOT_TOP: f64 = 60.0;
const PLOT_BOTTOM: f64 = 520.0;
const PALETTE: [&str; 8] = [
    "#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b", "#e377c2", "#17becf",
];

struct Axis {
    lo: f64,
    hi: f64,
    from: f64,
    to: f64,
}

impl Axis {
    fn new(lo: f64, hi: f64, from: f64, to: f64) -> Self {
        let (lo, hi) = if hi > lo {
            (lo, hi)
        } else {
            let pad = if lo == 0.0 { 1.0 } else { lo.abs() * 0.5 };
            (lo - pad, hi + pad)
        };
        Self { lo, hi, from, to }
    }

    fn map(&self, v: f64) -> f64 {
        self.from + (v - self.lo) / (self.hi - self.lo) * (self.to - self.from)
    }

    fn ticks(&self, n: usize) -> Vec<f64> {
        (0..=n).map(|i| self.lo + (self.hi - self.lo) * i as f64 / n as f64).collect()
    }
}

fn tick_label(v: f64) -> String {
    let s = format!("{v:.4}");
    trim_zeros(s)
}

/// One polyline of `τ_QSL` against `γ` per state parameter.
pub fn svg_document(rows: &[SweepRow]) -> Result<String> {
    let first = rows.first().ok_or(Error::EmptyInput("no sweep rows to plot"))?;

    let mut params: Vec<f64> = Vec::new();
    for r in rows {
        if !params.contains(&r.state_param) {
            params.push(r.state_param);
        }
    }

    let gmin = rows.iter().map(|r| r.gamma).fold(f64::INFINITY, f64::min);
    let gmax = rows.iter().map(|r| r.gamma).fold(f64::NEG_INFINITY, f64::max);
    let ymax = rows.iter().map(|r| r.tau_qsl).fold(0.0, f64::max);
    let x_axis = Axis::new(gmin, gmax, PLOT_LEFT, PLOT_RIGHT);
    let y_axis = Axis::new(0.0, if ymax > 0.0 { ymax * 1.05 } else { 0.0 }, PLOT_BOTTOM, PLOT_TOP);

    let mut s = String::new();
    let w = &mut s;
    let _ = writeln!(w, r#"<?xml version="1.0" encoding="UTF-8" standalone="yes"?>"#);
    let _ = writeln!(
        w,
        r#"<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{SVG_WIDTH}" height="{SVG_HEIGHT}" viewBox="0 0 {SVG_WIDTH} {SVG_HEIGHT}">"#
    );
    let _ = writeln!(w, r#"<rect x="0" y="0" width="{SVG_WIDTH}" height="{SVG_HEIGHT}" fill="white"/>"#);
    let _ = writeln!(
        w,
        r#"<text x="{:.2}" y="32" font-family="sans-serif" font-size="18" text-anchor="middle">QSL time vs gamma: {} (lambda={}, theta={}, tau={})</text>"#,
        (PLOT_LEFT + PLOT_RIGHT) / 2.0,
        first.state_family,
        format_number(first.lambda),
        format_number(first.theta),
        format_number(first.tau)
    );

    // Axes, ticks and grid.
    let _ = writeln!(
        w,
        r#"<g stroke="black" stroke-width="1"><line x1="{PLOT_LEFT}" y1="{PLOT_BOTTOM}" x2="{PLOT_RIGHT}" y2="{PLOT_BOTTOM}"/><line x1="{PLOT_LEFT}" y1="{PLOT_BOTTOM}" x2="{PLOT_LEFT}" y2="{PLOT_TOP}"/></g>"#
    );
    let _ = writeln!(w, r#"<g font-family="sans-serif" font-size="12">"#);
    for v in x_axis.ticks(5) {
        let x = x_axis.map(v);
        let _ = writeln!(
            w,
            r##"<line x1="{x:.2}" y1="{PLOT_BOTTOM}" x2="{x:.2}" y2="{:.2}" stroke="black"/><text x="{x:.2}" y="{:.2}" text-anchor="middle">{}</text>"##,
            PLOT_BOTTOM + 6.0,
            PLOT_BOTTOM + 22.0,
            tick_label(v)
        );
    }
    for v in y_axis.ticks(5) {
        let y = y_axis.map(v);
        let _ = writeln!(
            w,
            r##"<line x1="{:.2}" y1="{y:.2}" x2="{PLOT_LEFT}" y2="{y:.2}" stroke="black"/><line x1="{PLOT_LEFT}" y1="{y:.2}" x2="{PLOT_RIGHT}" y2="{y:.2}" stroke="#dddddd"/><text x="{:.2}" y="{:.2}" text-anchor="end">{}</text>"##,
            PLOT_LEFT - 6.0,
            PLOT_LEFT - 10.0,
            y + 4.0,
            tick_label(v)
        );
    }
    let _ = writeln!(w, "</g>");
    let _ = writeln!(
        w,
        r#"<text x="{:.2}" y="{:.2}" font-family="sans-serif" font-size="14" text-anchor="middle">gamma</text>"#,
        (PLOT_LEFT + PLOT_RIGHT) / 2.0,
        PLOT_BOTTOM + 50.0
    );
    let _ = writeln!(
        w,
        r#"<text x="30" y="{:.2}" font-family="sans-serif" font-size="14" text-anchor="middle" transform="rotate(-90 30 {:.2})">tau_QSL</text>"#,
        (PLOT_TOP + PLOT_BOTTOM) / 2.0,
        (PLOT_TOP + PLOT_BOTTOM) / 2.0
    );

    // Series and legend.
    let param_name = first.state_family.param_name();
    for (k, &param) in params.iter().enumerate() {
        let colour = PALETTE[k % PALETTE.len()];
        let points: Vec<String> = rows
            .iter()
            .filter(|r| r.state_param == param)
            .map(|r| format!("{:.2},{:.2}", x_axis.map(r.gamma), y_axis.map(r.tau_qsl)))
            .collect();
        let _ = writeln!(
            w,
            r#"<polyline fill="none" stroke="{colour}" stroke-width="2" points="{}"/>"#,
            points.join(" ")
        );
        let ly = PLOT_TOP + 20.0 + 22.0 * k as f64;
        let _ = writeln!(
            w,
            r#"<line x1="640" y1="{ly:.2}" x2="670" y2="{ly:.2}" stroke="{colour}" stroke-width="2"/><text x="678" y="{:.2}" font-family="sans-serif" font-size="13">{param_name} = {}</text>"#,
            ly + 4.0,
            format_number(param)
        );
    }
    let _ = writeln!(w, "</svg>");
    Ok(s)
}

pub fn render_svg(rows: &[SweepRow], path: &Path) -> Result<()> {
    let doc = svg_document(rows)?;
    fs::write(path, doc).map_err(|e| Error::io(path, e))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::states::{RegionLabel, WernerVariant};

    const MINIMAL: &str = r#"
state_family = "werner-psi0"
state_params = [0.5]
gamma_grid = [1.0]
lambda = 0.1
theta = 1
"#;

    fn validation_field(err: Error) -> String {
        match err {
            Error::Validation { field, .. } => field,
            other => panic!("expected a validation error, got {other:?}"),
        }
    }

    #[test]
    fn minimal_document_gets_defaults() {
        let cfg = parse_config(MINIMAL).unwrap();
        assert_eq!(cfg.state_family, StateFamily::Werner(WernerVariant::Psi0));
        assert_eq!(cfg.state_params, vec![0.5]);
        assert_eq!(cfg.gamma_grid, vec![1.0]);
        assert_eq!(cfg.theta, 1.0);
        assert_eq!(cfg.tau, 1.0);
        assert_eq!(cfg.quadrature_steps, 256);
        assert_eq!(cfg.blp, None);
        assert_eq!(cfg.output_path, PathBuf::from("sweep.csv"));
        assert!(!cfg.emit_svg);
    }

    #[test]
    fn omitted_grids_use_family_defaults() {
        let cfg = parse_config("state_family = \"horodecki\"\nlambda = 1\ntheta = 1\n").unwrap();
        assert_eq!(cfg.state_params, DEFAULT_HORODECKI_PARAMS.to_vec());
        assert_eq!(cfg.gamma_grid.len(), 100);
        assert_eq!(cfg.gamma_grid[0], 0.01);
        assert_eq!(cfg.gamma_grid[99], 5.0);
    }

    #[test]
    fn domain_and_range_errors() {
        let doc = MINIMAL.replace("[0.5]", "[1.5]");
        let err = parse_config(&doc).unwrap_err();
        assert!(err.to_string().contains("p out of [0,1]"), "{err}");
        assert_eq!(validation_field(err), "state_params");

        let doc = MINIMAL.replace("theta = 1", "theta = 1.2");
        assert_eq!(validation_field(parse_config(&doc).unwrap_err()), "theta");

        let doc = MINIMAL.replace("[1.0]", "[1.0, 0.5]");
        assert_eq!(validation_field(parse_config(&doc).unwrap_err()), "gamma_grid");

        let doc = format!("{MINIMAL}quadrature_steps = 33\n");
        assert_eq!(validation_field(parse_config(&doc).unwrap_err()), "quadrature_steps");

        let doc = MINIMAL.replace("lambda = 0.1", "");
        assert_eq!(validation_field(parse_config(&doc).unwrap_err()), "lambda");
    }

    #[test]
    fn unknown_and_mistyped_keys_are_rejected() {
        let doc = format!("{MINIMAL}gamma1 = 0.5\n");
        assert_eq!(validation_field(parse_config(&doc).unwrap_err()), "gamma1");
        let doc = MINIMAL.replace("lambda = 0.1", "lambda = \"fast\"");
        assert_eq!(validation_field(parse_config(&doc).unwrap_err()), "lambda");
        let doc = MINIMAL.replace("werner-psi0", "ghz");
        assert_eq!(validation_field(parse_config(&doc).unwrap_err()), "state_family");
    }

    #[test]
    fn syntax_errors_report_line() {
        let err = parse_config_from("state_family = \"horodecki\"\nlambda = = 1\n", "cfg.toml").unwrap_err();
        match err {
            Error::Parse { path, message } => {
                assert_eq!(path, "cfg.toml");
                assert!(message.starts_with("line 2"), "{message}");
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn blp_keys_enable_blp() {
        let cfg = parse_config(&format!("{MINIMAL}blp_seed = 4\n")).unwrap();
        let blp = cfg.blp.unwrap();
        assert_eq!(blp.seed, 4);
        assert_eq!(blp.dt, DEFAULT_BLP_DT);
        assert_eq!(blp.t_max, None);
        let cfg = parse_config(&format!("{MINIMAL}blp = true\nblp_dt = 0.05\n"));
        assert_eq!(validation_field(cfg.unwrap_err()), "blp_dt");
    }

    #[test]
    fn format_number_matches_percent_g() {
        let cases = [
            (1.0, "1"),
            (0.1, "0.1"),
            (0.5, "0.5"),
            (-2.25, "-2.25"),
            (1.0 / 3.0, "0.333333333333"),
            (123456.789, "123456.789"),
            (1e-7, "1e-7"),
            (2.5e-12, "2.5e-12"),
            (1e15, "1e15"),
            (0.0001234, "0.0001234"),
            (999999999999.9, "1e12"),
        ];
        for (x, s) in cases {
            assert_eq!(format_number(x), s, "{x}");
        }
    }

    fn row(param: f64, gamma: f64, tau_qsl: f64) -> SweepRow {
        SweepRow {
            state_family: StateFamily::Werner(WernerVariant::Psi1),
            state_param: param,
            gamma,
            lambda: 0.1,
            theta: 1.0,
            tau: 1.0,
            fidelity: 0.987654321098765,
            x_of_tau: 0.123,
            tau_qsl,
            negativity: 0.25,
            region: RegionLabel::FreeEntangled,
            n_measure: None,
        }
    }

    #[test]
    fn csv_header_only_for_no_rows() {
        assert_eq!(csv_string(&[]).unwrap(), format!("{CSV_HEADER}\n"));
    }

    #[test]
    fn csv_rows_have_twelve_fields() {
        let mut rows = vec![row(0.5, 0.1, 0.01), row(0.5, 1.0, 0.02)];
        rows[1].n_measure = Some(0.75);
        let text = csv_string(&rows).unwrap();
        for line in text.lines() {
            assert_eq!(line.split(',').count(), 12, "{line}");
        }
        assert!(text.lines().nth(1).unwrap().ends_with("FreeEntangled,"));
        assert!(text.lines().nth(2).unwrap().ends_with("FreeEntangled,0.75"));
        assert!(text.ends_with('\n') && !text.contains('\r'));
    }

    #[test]
    fn csv_refuses_rows_violating_the_bound() {
        assert!(csv_string(&[row(0.5, 1.0, 1.5)]).is_err());
    }

    #[test]
    fn svg_needs_rows() {
        assert!(matches!(svg_document(&[]), Err(Error::EmptyInput(_))));
    }

    #[test]
    fn svg_single_series() {
        let doc = svg_document(&[row(0.5, 0.1, 0.01), row(0.5, 1.0, 0.02)]).unwrap();
        let xml = roxmltree::Document::parse(&doc).unwrap();
        let lines: Vec<_> = xml.descendants().filter(|n| n.has_tag_name("polyline")).collect();
        assert_eq!(lines.len(), 1);
        assert_eq!(lines[0].attribute("points").unwrap().split(' ').count(), 2);
        assert!(xml.descendants().any(|n| n.text() == Some("gamma")));
        assert!(xml.descendants().any(|n| n.text() == Some("p = 0.5")));
        assert_eq!(doc, svg_document(&[row(0.5, 0.1, 0.01), row(0.5, 1.0, 0.02)]).unwrap());
    }

    #[test]
    fn concurrent_rows_match_serial_evaluation() {
        let cfg = parse_config(
            "state_family = \"werner-psi1\"\nstate_params = [0.3, 1.0]\ngamma_grid = [0.2, 1.0, 3.0]\nlambda = 1\ntheta = 0.8\n",
        )
        .unwrap();
        let pool = rayon::ThreadPoolBuilder::new().num_threads(3).build().unwrap();
        let rows = pool.install(|| run_sweep(&cfg)).unwrap();
        let mut k = 0;
        for &x in &cfg.state_params {
            let rho = cfg.state_family.state(x).unwrap();
            for &g in &cfg.gamma_grid {
                let p = ChannelParams::symmetric(g, cfg.theta, cfg.lambda).unwrap();
                let q = qsl_time(&rho, &p, 1.0, 256).unwrap();
                assert_eq!((rows[k].state_param, rows[k].gamma), (x, g));
                assert_eq!(rows[k].tau_qsl, q.tau_qsl);
                assert_eq!(rows[k].fidelity, q.fidelity);
                k += 1;
            }
        }
        assert_eq!(k, rows.len());
    }

    proptest::proptest! {
        #[test]
        fn formatted_numbers_round_trip(m in -1.0f64..1.0, e in -30i32..30) {
            let x = m * 10f64.powi(e);
            let back: f64 = format_number(x).parse().unwrap();
            proptest::prop_assert!((back - x).abs() <= 5e-12 * x.abs());
        }
    }

    #[test]
    fn log_grid_endpoints() {
        let g = log_grid(0.01, 5.0, 100);
        assert_eq!(g.len(), 100);
        assert!(g.windows(2).all(|w| w[1] > w[0]));
        assert!((g[1] / g[0] - g[99] / g[98]).abs() < 1e-12);
        assert_eq!(log_grid(2.0, 3.0, 1), vec![2.0]);
    }

    #[test]
    fn shipped_examples_parse() {
        for text in [
            include_str!("../../../configs/werner-psi0.toml"),
            include_str!("../../../configs/horodecki-blp.toml"),
        ] {
            parse_config(text).unwrap();
        }
    }

    #[test]
    fn default_configs_cover_families_and_widths() {
        let cfgs = default_sweep_configs();
        assert_eq!(cfgs.len(), 12);
        for c in &cfgs {
            c.validate().unwrap();
        }
    }
}
