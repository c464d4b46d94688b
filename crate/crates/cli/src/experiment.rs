//! Resolution of `run` and `spectrum` settings and their execution.

use std::fmt;
use std::fs::{self, File};
use std::io::BufWriter;
use std::path::{Path, PathBuf};
use std::sync::Arc;
use std::time::Instant;

use dgsuper::error_lab::{
    asymptotic_error, convergence_csv_rows, convergence_study, prediction_deviation, profile_csv_rows,
    transient_csv_rows, transient_decay, transient_profile, ComponentSel, ErrorKind, Problem, CONVERGENCE_HEADER,
    PROFILE_HEADER, TRANSIENT_HEADER,
};
use dgsuper::field::{AbsSinPower, FieldRef, PolyBump, TrigSeries};
use dgsuper::presets::{self, Preset, PresetParams};
use dgsuper::report::{sig17, write_csv};
use dgsuper::symbol::{
    c_k, chi, pade_check, ratio_to, spectral_gap, spectrum_csv_rows, spectrum_header, spectrum_rows,
    verify_lambda0_expansion,
};
use dgsuper::{AdvectionSystem, ButcherTableau, DoubleDouble, FluxSpec, Grid, InitKind};

use crate::config::{parse_bool, parse_list, render, ConfigError, Sources};

pub const RUN_KEYS: [&str; 17] = [
    "preset",
    "k",
    "N",
    "t_final",
    "cfl",
    "init",
    "flux",
    "M",
    "a",
    "rho0",
    "u0",
    "c",
    "scheme",
    "data",
    "profile",
    "transient_samples",
    "out",
];
pub const SPECTRUM_KEYS: [&str; 6] = ["k", "flux", "M", "a", "N", "out"];

/// Failure of a subcommand, mapped to the process exit code.
#[derive(Debug)]
pub enum AppError {
    Config(ConfigError),
    Runtime(String),
}

impl AppError {
    pub fn exit_code(&self) -> i32 {
        match self {
            AppError::Config(_) => 2,
            AppError::Runtime(_) => 3,
        }
    }
}

impl fmt::Display for AppError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            AppError::Config(e) => write!(f, "config error: {e}"),
            AppError::Runtime(m) => write!(f, "runtime failure: {m}"),
        }
    }
}

impl From<ConfigError> for AppError {
    fn from(e: ConfigError) -> Self {
        AppError::Config(e)
    }
}

impl From<std::io::Error> for AppError {
    fn from(e: std::io::Error) -> Self {
        AppError::Runtime(e.to_string())
    }
}

/// Library errors caused by the inputs are configuration errors.
fn lib_error(e: dgsuper::Error) -> AppError {
    match e {
        dgsuper::Error::Config(_) | dgsuper::Error::DerivativeOrderUnavailable { .. } => {
            AppError::Config(ConfigError::new(e.to_string()))
        }
        other => AppError::Runtime(other.to_string()),
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PresetChoice {
    Builtin(Preset),
    Custom,
}

impl PresetChoice {
    fn name(self) -> &'static str {
        match self {
            PresetChoice::Builtin(p) => p.name(),
            PresetChoice::Custom => "custom",
        }
    }
}

/// Initial data of the `custom` preset, always advected as a scalar.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CustomData {
    SinPower(usize),
    AbsSinPower(usize),
    /// `(x (2π - x) / 2π)^p`.
    Bump(usize),
}

impl CustomData {
    fn parse(v: &str) -> Result<Self, String> {
        let (kind, p) = v.split_once(':').ok_or_else(|| format!("expected `family:power`, got `{v}`"))?;
        let p: usize = p.trim().parse().map_err(|e| format!("bad power `{p}`: {e}"))?;
        match kind.trim() {
            "sin_power" => Ok(CustomData::SinPower(p)),
            "abs_sin_power" => Ok(CustomData::AbsSinPower(p)),
            "bump" => Ok(CustomData::Bump(p)),
            other => Err(format!("unknown data family `{other}` (sin_power, abs_sin_power, bump)")),
        }
    }

    fn field(self) -> FieldRef<f64> {
        match self {
            CustomData::SinPower(p) => Arc::new(TrigSeries::<f64>::sin_power(p)),
            CustomData::AbsSinPower(p) => Arc::new(AbsSinPower::<f64>::new(p)),
            CustomData::Bump(p) => Arc::new(PolyBump::new(std::f64::consts::TAU, p)),
        }
    }
}

impl fmt::Display for CustomData {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CustomData::SinPower(p) => write!(f, "sin_power:{p}"),
            CustomData::AbsSinPower(p) => write!(f, "abs_sin_power:{p}"),
            CustomData::Bump(p) => write!(f, "bump:{p}"),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum FluxKind {
    Upwind,
    LaxFriedrichs,
}

/// `upwind`, `lf`, `lax_friedrichs`, optionally with `(M)` attached.
fn parse_flux(v: &str) -> Result<(FluxKind, Option<f64>), String> {
    let t = v.to_ascii_lowercase();
    let (name, m) = match t.split_once('(') {
        Some((n, rest)) => {
            let inner = rest.strip_suffix(')').ok_or_else(|| format!("unbalanced parenthesis in `{v}`"))?;
            (n.to_string(), Some(inner.trim().parse::<f64>().map_err(|e| format!("bad M in `{v}`: {e}"))?))
        }
        None => (t.clone(), None),
    };
    match name.trim() {
        "upwind" if m.is_none() => Ok((FluxKind::Upwind, None)),
        "lf" | "lax_friedrichs" | "lax-friedrichs" => Ok((FluxKind::LaxFriedrichs, m)),
        _ => Err(format!("unknown flux `{v}` (upwind or lax_friedrichs)")),
    }
}

fn fmt_flux(f: &FluxSpec<f64>) -> (&'static str, Option<f64>) {
    match *f {
        FluxSpec::Upwind => ("upwind", None),
        FluxSpec::LaxFriedrichs { m } => ("lax_friedrichs", Some(m)),
    }
}

/// Resolves `flux` and `M` against a default.
fn resolve_flux(src: &Sources, default: FluxSpec<f64>) -> Result<FluxSpec<f64>, ConfigError> {
    let parsed = src.get_with("flux", parse_flux)?;
    let m_key: Option<f64> = src.get("M")?;
    let flux = match parsed {
        None => match (default, m_key) {
            (FluxSpec::LaxFriedrichs { .. }, Some(m)) => FluxSpec::LaxFriedrichs { m },
            (FluxSpec::Upwind, Some(_)) => return Err(src.error_at("M", "M applies only to the lax_friedrichs flux")),
            (d, None) => d,
        },
        Some((FluxKind::Upwind, _)) => {
            if m_key.is_some() {
                return Err(src.error_at("M", "M applies only to the lax_friedrichs flux"));
            }
            FluxSpec::Upwind
        }
        Some((FluxKind::LaxFriedrichs, inline)) => {
            let m = match (inline, m_key) {
                (Some(a), Some(b)) if a != b => {
                    return Err(src.error_at("M", format!("M = {b} contradicts flux = lax_friedrichs({a})")))
                }
                (Some(m), _) | (None, Some(m)) => m,
                (None, None) => match default {
                    FluxSpec::LaxFriedrichs { m } => m,
                    FluxSpec::Upwind => return Err(src.error_at("flux", "lax_friedrichs requires M")),
                },
            };
            FluxSpec::LaxFriedrichs { m }
        }
    };
    if let FluxSpec::LaxFriedrichs { m } = flux {
        if !(m > 0.0 && m.is_finite()) {
            let key = if src.contains("M") { "M" } else { "flux" };
            return Err(src.error_at(key, format!("M must be positive, got {m}")));
        }
    }
    Ok(flux)
}

fn positive(src: &Sources, key: &str, default: f64) -> Result<f64, ConfigError> {
    let v = src.get::<f64>(key)?.unwrap_or(default);
    if !(v > 0.0 && v.is_finite()) {
        return Err(src.error_at(key, format!("{key} must be positive and finite, got {v}")));
    }
    Ok(v)
}

fn reject_unless(src: &Sources, key: &str, allowed: bool, why: &str) -> Result<(), ConfigError> {
    if src.contains(key) && !allowed {
        return Err(src.error_at(key, format!("{key} {why}")));
    }
    Ok(())
}

fn check_k(src: &Sources) -> Result<usize, ConfigError> {
    let k = src.get::<usize>("k")?.ok_or_else(|| ConfigError::new("k is required"))?;
    if k > 4 {
        return Err(src.error_at("k", format!("k must lie in [0, 4], got {k}")));
    }
    Ok(k)
}

/// Fully validated `run` settings.
#[derive(Clone, Debug, PartialEq)]
pub struct RunConfig {
    pub preset: PresetChoice,
    pub k: usize,
    pub ns: Vec<usize>,
    pub t_final: f64,
    pub cfl: f64,
    pub init: InitKind,
    pub flux: FluxSpec<f64>,
    pub a: f64,
    pub rho0: f64,
    pub u0: f64,
    pub c: f64,
    pub scheme: ButcherTableau,
    pub data: Option<CustomData>,
    pub profile: bool,
    pub transient_samples: usize,
}

impl RunConfig {
    pub fn resolve(src: &Sources) -> Result<Self, ConfigError> {
        let preset = match src.raw("preset") {
            None => return Err(ConfigError::new("preset is required (ex1, ex2, ex3, ex4 or custom)")),
            Some("custom") => PresetChoice::Custom,
            Some(_) => PresetChoice::Builtin(src.get::<Preset>("preset")?.expect("present")),
        };
        let k = check_k(src)?;
        let builtin = match preset {
            PresetChoice::Builtin(p) => Some(p),
            PresetChoice::Custom => None,
        };
        let ns = match src.get_with("N", parse_list)? {
            Some(ns) => ns,
            None => builtin.map(|p| p.default_ns(k)).ok_or_else(|| ConfigError::new("custom preset requires N"))?,
        };
        let min_n = 4 * (k + 1);
        if ns.is_empty() || ns.windows(2).any(|w| w[1] <= w[0]) {
            return Err(src.error_at("N", "N list must be non-empty and strictly increasing"));
        }
        if let Some(&bad) = ns.iter().find(|&&n| n < min_n) {
            return Err(src.error_at("N", format!("N = {bad} is below 4(k+1) = {min_n}")));
        }
        if let Some(p) = builtin {
            for &n in &ns {
                p.validate_n(n).map_err(|e| src.error_at("N", e.to_string()))?;
            }
        }
        let t_final = positive(src, "t_final", 1.0)?;
        let cfl = positive(src, "cfl", 0.1)?;
        let init = src.get::<InitKind>("init")?.unwrap_or(InitKind::L2);
        if let InitKind::Special(l) = init {
            if l > k {
                return Err(src.error_at("init", format!("special({l}) requires 0 <= l <= k = {k}")));
            }
        }
        let is_euler = builtin == Some(Preset::Ex4);
        let default_flux = if is_euler { FluxSpec::LaxFriedrichs { m: 6.0 } } else { FluxSpec::Upwind };
        let flux = resolve_flux(src, default_flux)?;
        if is_euler && flux == FluxSpec::Upwind {
            return Err(src.error_at("flux", "ex4 is a system and needs the lax_friedrichs flux"));
        }
        reject_unless(src, "a", builtin.is_none(), "is only configurable for the custom preset")?;
        let a = src.get::<f64>("a")?.unwrap_or(1.0);
        if a == 0.0 || !a.is_finite() {
            return Err(src.error_at("a", "advection speed must be nonzero and finite"));
        }
        for key in ["rho0", "u0", "c"] {
            reject_unless(src, key, is_euler, "is only configurable for ex4")?;
        }
        let rho0 = positive(src, "rho0", 1.0)?;
        let u0 = src.get::<f64>("u0")?.unwrap_or(1.0);
        let c = positive(src, "c", 5.0)?;
        let scheme = match src.raw("scheme") {
            None => ButcherTableau::fehlberg5(),
            Some(name) => ButcherTableau::by_name(name).map_err(|e| src.error_at("scheme", e.to_string()))?,
        };
        reject_unless(src, "data", builtin.is_none(), "is only configurable for the custom preset")?;
        let data = src.get_with("data", CustomData::parse)?;
        if builtin.is_none() && data.is_none() {
            return Err(ConfigError::new("custom preset requires data (sin_power:P, abs_sin_power:P or bump:P)"));
        }
        let profile = src.get_with("profile", parse_bool)?.unwrap_or(false);
        if profile && is_euler {
            return Err(src.error_at("profile", "profile output is defined for scalar presets only"));
        }
        let transient_samples = src.get::<usize>("transient_samples")?.unwrap_or(200);
        if transient_samples < 4 {
            return Err(src.error_at("transient_samples", "transient_samples must be at least 4"));
        }
        Ok(Self { preset, k, ns, t_final, cfl, init, flux, a, rho0, u0, c, scheme, data, profile, transient_samples })
    }

    pub fn problem(&self) -> Result<Problem<f64>, AppError> {
        match self.preset {
            PresetChoice::Builtin(p) => {
                let params = PresetParams {
                    k: self.k,
                    init: Some(self.init),
                    flux: Some(self.flux),
                    t_final: self.t_final,
                    cfl: self.cfl,
                    scheme: self.scheme.clone(),
                    rho0: self.rho0,
                    u0: self.u0,
                    c: self.c,
                };
                presets::build(p, &params).map_err(lib_error)
            }
            PresetChoice::Custom => {
                let system = AdvectionSystem::scalar(self.a);
                self.flux.validate(&system).map_err(lib_error)?;
                Ok(Problem {
                    name: "custom".into(),
                    initial: vec![self.data.expect("validated").field()],
                    system,
                    flux: self.flux,
                    init: self.init,
                    t_final: self.t_final,
                    cfl: self.cfl,
                    scheme: self.scheme.clone(),
                })
            }
        }
    }

    /// Every input in canonical form; parses back to the same config.
    pub fn manifest_pairs(&self) -> Vec<(&'static str, String)> {
        let mut pairs = vec![
            ("preset", self.preset.name().to_string()),
            ("k", self.k.to_string()),
            ("N", self.ns.iter().map(|n| n.to_string()).collect::<Vec<_>>().join(",")),
            ("t_final", self.t_final.to_string()),
            ("cfl", self.cfl.to_string()),
            ("init", self.init.label()),
        ];
        let (flux, m) = fmt_flux(&self.flux);
        pairs.push(("flux", flux.to_string()));
        if let Some(m) = m {
            pairs.push(("M", m.to_string()));
        }
        match self.preset {
            PresetChoice::Custom => {
                pairs.push(("a", self.a.to_string()));
                pairs.push(("data", self.data.expect("validated").to_string()));
            }
            PresetChoice::Builtin(Preset::Ex4) => {
                pairs.push(("rho0", self.rho0.to_string()));
                pairs.push(("u0", self.u0.to_string()));
                pairs.push(("c", self.c.to_string()));
            }
            PresetChoice::Builtin(_) => {}
        }
        pairs.push(("scheme", self.scheme.name.to_string()));
        pairs.push(("profile", self.profile.to_string()));
        pairs.push(("transient_samples", self.transient_samples.to_string()));
        pairs
    }

    fn transient_inits(&self) -> Vec<InitKind> {
        let extra = match self.preset {
            PresetChoice::Builtin(p) => p.transient_inits(self.k),
            PresetChoice::Custom => vec![InitKind::GaussRadau, InitKind::L2],
        };
        let mut inits = vec![self.init];
        for i in extra {
            if !inits.contains(&i) {
                inits.push(i);
            }
        }
        inits
    }
}

fn write_csv_file(path: &Path, header: &[&str], rows: &[Vec<String>]) -> Result<(), AppError> {
    let file = File::create(path).map_err(|e| AppError::Runtime(format!("cannot create {}: {e}", path.display())))?;
    write_csv(BufWriter::new(file), header, rows)?;
    Ok(())
}

fn write_manifest(out: &Path, command: &str, pairs: &[(&str, String)], started: Instant) -> Result<(), AppError> {
    let mut all: Vec<(&str, String)> = vec![("command", command.to_string())];
    all.extend(pairs.iter().cloned());
    all.push(("out", out.display().to_string()));
    all.push(("tool_version", env!("CARGO_PKG_VERSION").to_string()));
    all.push(("wall_time_s", format!("{:.3}", started.elapsed().as_secs_f64())));
    fs::write(out.join("manifest.txt"), render("dgsuper run manifest; rerun with --config", &all))?;
    Ok(())
}

fn prepare_dir(out: &Path) -> Result<(), AppError> {
    fs::create_dir_all(out).map_err(|e| AppError::Runtime(format!("cannot create {}: {e}", out.display())))
}

fn fmt_order(o: Option<f64>) -> String {
    o.map_or_else(|| "-".to_string(), |v| format!("{v:.2}"))
}

/// Executes `run`, writing artifacts under `out`; returns a human-readable summary.
pub fn run(cfg: &RunConfig, out: &Path) -> Result<String, AppError> {
    let started = Instant::now();
    let problem = cfg.problem()?;
    prepare_dir(out)?;
    let table = convergence_study(&problem, &cfg.ns, cfg.k).map_err(lib_error)?;
    write_csv_file(&out.join("convergence.csv"), &CONVERGENCE_HEADER, &convergence_csv_rows(&table))?;
    let mut summary = String::new();
    let components = problem.system.components();
    let sel = if components > 1 { ComponentSel::Combined } else { ComponentSel::Single(0) };
    summary.push_str(&format!(
        "cell-average error, component {sel}\n   N           l1  order           l2  order         linf  order\n"
    ));
    for r in table.series(sel, ErrorKind::Mode(0)) {
        summary.push_str(&format!(
            "{:>4} {:>12.4e} {:>6} {:>12.4e} {:>6} {:>12.4e} {:>6}\n",
            r.n,
            r.l1,
            fmt_order(r.order1),
            r.l2,
            fmt_order(r.order2),
            r.linf,
            fmt_order(r.orderinf)
        ));
    }
    if cfg.profile {
        let g = problem.initial[0].clone();
        let a = problem.system.speeds()[0];
        let inits = cfg.transient_inits();
        let times: Vec<f64> =
            (0..=cfg.transient_samples).map(|i| cfg.t_final * i as f64 / cfg.transient_samples as f64).collect();
        for &n in &cfg.ns {
            let grid = Grid::<f64>::new(n).map_err(lib_error)?;
            let (_, dec) = problem.solve(n, cfg.k).map_err(lib_error)?;
            let pred = asymptotic_error(g.as_ref(), &grid, cfg.t_final, cfg.k, cfg.init, a, &problem.flux)
                .map_err(lib_error)?;
            write_csv_file(&out.join(format!("profile_N{n}.csv")), &PROFILE_HEADER, &profile_csv_rows(&dec, &pred, 0))?;
            summary.push_str(&format!(
                "N = {n}: max |e_0/h^(2k+1) - prediction| = {:.4e}\n",
                prediction_deviation(&dec, &pred)
            ));
            let series = transient_profile(&problem, n, cfg.k, &inits, &times).map_err(lib_error)?;
            write_csv_file(&out.join(format!("transient_N{n}.csv")), &TRANSIENT_HEADER, &transient_csv_rows(&series))?;
            if cfg.init != InitKind::GaussRadau && inits.contains(&InitKind::GaussRadau) {
                match transient_decay(&problem, n, cfg.k, cfg.init, InitKind::GaussRadau, &times) {
                    Ok(d) => summary.push_str(&format!(
                        "N = {n}: {} transient decay rate {:.4} over t in [{:.4}, {:.4}]\n",
                        cfg.init, d.fit.rate, d.fit.window.0, d.fit.window.1
                    )),
                    Err(e) => summary.push_str(&format!("N = {n}: transient decay not resolved ({e})\n")),
                }
            }
        }
    }
    write_manifest(out, "run", &cfg.manifest_pairs(), started)?;
    if !table.is_complete() {
        let msg: Vec<String> = table.failures.iter().map(|(n, e)| format!("N = {n}: {e}")).collect();
        return Err(AppError::Runtime(msg.join("; ")));
    }
    Ok(summary)
}

/// Validated `spectrum` settings.
#[derive(Clone, Debug, PartialEq)]
pub struct SpectrumConfig {
    pub k: usize,
    pub flux: FluxSpec<f64>,
    pub a: f64,
    pub modes: usize,
}

impl SpectrumConfig {
    pub fn resolve(src: &Sources) -> Result<Self, ConfigError> {
        let k = check_k(src)?;
        let flux = resolve_flux(src, FluxSpec::Upwind)?;
        let a = src.get::<f64>("a")?.unwrap_or(1.0);
        if a == 0.0 || !a.is_finite() {
            return Err(src.error_at("a", "advection speed must be nonzero and finite"));
        }
        let modes = src.get::<usize>("N")?.unwrap_or(128);
        if modes < 4 * (k + 1) {
            return Err(src.error_at("N", format!("N = {modes} is below 4(k+1) = {}", 4 * (k + 1))));
        }
        Ok(Self { k, flux, a, modes })
    }

    pub fn manifest_pairs(&self) -> Vec<(&'static str, String)> {
        let (flux, m) = fmt_flux(&self.flux);
        let mut pairs = vec![("k", self.k.to_string()), ("flux", flux.to_string())];
        if let Some(m) = m {
            pairs.push(("M", m.to_string()));
        }
        pairs.push(("a", self.a.to_string()));
        pairs.push(("N", self.modes.to_string()));
        pairs
    }
}

fn dd_flux(f: &FluxSpec<f64>) -> FluxSpec<DoubleDouble> {
    match *f {
        FluxSpec::Upwind => FluxSpec::Upwind,
        FluxSpec::LaxFriedrichs { m } => FluxSpec::LaxFriedrichs { m: DoubleDouble::from(m) },
    }
}

/// Executes `spectrum`: per-mode eigenvalues plus a key-value summary.
///
/// The expansion fit and the stability sweep run in double-double, which
/// resolves `|λ_0 + i a mh|` down to 1e-30.
pub fn spectrum(cfg: &SpectrumConfig, out: &Path) -> Result<String, AppError> {
    let started = Instant::now();
    prepare_dir(out)?;
    let grid = Grid::<f64>::new(cfg.modes).map_err(lib_error)?;
    let rows = spectrum_rows(&grid, cfg.k, &cfg.flux, cfg.a).map_err(lib_error)?;
    let header = spectrum_header(cfg.k);
    let header: Vec<&str> = header.iter().map(String::as_str).collect();
    write_csv_file(&out.join("spectrum.csv"), &header, &spectrum_csv_rows(&rows))?;

    let flux_dd = dd_flux(&cfg.flux);
    let a_dd = DoubleDouble::from(cfg.a);
    let mut pairs: Vec<(String, String)> = Vec::new();
    let ck: f64 = ratio_to(&c_k(cfg.k));
    pairs.push(("c_k".into(), sig17(ck)));
    pairs.push(("chi".into(), sig17(chi(cfg.k, &cfg.flux, cfg.a))));
    match verify_lambda0_expansion(cfg.k, &flux_dd, a_dd) {
        Ok(fit) => {
            pairs.push(("fit_order".into(), sig17(fit.order)));
            pairs.push(("fit_constant".into(), sig17(fit.constant)));
            pairs.push(("expected_order".into(), sig17(fit.expected_order)));
            pairs.push(("expected_constant".into(), sig17(fit.expected_constant)));
            pairs.push(("constant_ratio".into(), sig17(fit.constant_ratio())));
        }
        Err(e) => pairs.push(("fit_error".into(), e.to_string())),
    }
    match spectral_gap(cfg.k, &flux_dd, a_dd) {
        Ok(gap) => {
            pairs.push(("alpha".into(), sig17(gap.alpha)));
            pairs.push(("max_nonphysical_re".into(), sig17(gap.max_nonphysical_re.0)));
            pairs.push(("max_nonphysical_re_mh".into(), sig17(gap.max_nonphysical_re.1)));
            pairs.push(("stable".into(), "true".into()));
        }
        Err(e) => {
            pairs.push(("stable".into(), "false".into()));
            pairs.push(("stability_error".into(), e.to_string()));
        }
    }
    for mh in [0.1, 0.2] {
        let r = pade_check::<f64>(cfg.k, mh).map_err(lib_error)?;
        pairs.push((format!("pade_residual_mh_{mh}"), sig17(r)));
    }
    let coincides = matches!(cfg.flux, FluxSpec::LaxFriedrichs { m } if m == cfg.a.abs());
    pairs.push(("lf_equals_upwind".into(), coincides.to_string()));

    let text: String = pairs.iter().map(|(k, v)| format!("{k} = {v}\n")).collect();
    fs::write(out.join("spectrum_summary.txt"), &text)?;
    write_manifest(out, "spectrum", &cfg.manifest_pairs(), started)?;
    Ok(text)
}

/// Text listing of the built-in presets.
pub fn presets_listing() -> String {
    let mut s = String::new();
    for p in Preset::ALL {
        s.push_str(&format!("{:<6} {}\n", p.name(), p.description()));
        let ns: Vec<String> = (0..=3).map(|k| format!("k={k}: {:?}", p.default_ns(k))).collect();
        s.push_str(&format!("       default N  {}\n", ns.join("  ")));
    }
    s.push_str("custom scalar advection with speed a of data = sin_power:P | abs_sin_power:P | bump:P\n");
    s
}

/// Output directory from `out`, defaulting to `./out`.
pub fn out_dir(src: &Sources) -> PathBuf {
    src.raw("out").map_or_else(|| PathBuf::from("out"), PathBuf::from)
}
