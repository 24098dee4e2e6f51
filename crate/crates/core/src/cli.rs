//! Command-line front end: argument and config-file parsing, preset
//! layering, and one runner per subcommand.
//!
//! ```text
//! bzwave <subcommand> [--config FILE] [--key value ...] --out DIR
//! ```
//!
//! Values are resolved in the order default < preset < file < flag, and the
//! source of every value that was read is written to `provenance.json`.

use std::collections::BTreeMap;
use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::Serialize;
use serde_json::{json, Value};

use crate::acceptance::{run_all, run_criterion, summary_table, CRITERIA};
use crate::dde::{classify_equilibria, integrate_dde, nullclines, nullclines_csv, stability_box_experiment, vector_field, HistorySegment, PhaseGrid};
use crate::error::{Error, Result};
use crate::manifold::{envelope_check, manifold_constants, solve_and_report};
use crate::model::ModelParams;
use crate::numerics::smoothstep3;
use crate::profile::{continue_in_epsilon, solve_from_scratch, verify_front, ProfileOptions};
use crate::rdsim::{estimate_speed, run, FieldState, GridSpec, RunOptions, SpreadingKind, Tracked};
use crate::subsuper::{certify, Kind};

pub const SUBCOMMANDS: [&str; 8] = ["simulate", "profile", "continue", "speeds", "subsuper", "manifold", "phase", "acceptance"];

pub const USAGE: &str = "usage: bzwave <simulate|profile|continue|speeds|subsuper|manifold|phase|acceptance> \
[--config FILE] [--key value ...] --out DIR";

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Ty {
    Num,
    Int,
    Bool,
    Str,
}

/// Every recognised key with its type.
const KEYS: &[(&str, Ty)] = &[
    ("preset", Ty::Str),
    ("format", Ty::Str),
    ("seed", Ty::Int),
    ("r", Ty::Num),
    ("b", Ty::Num),
    ("h", Ty::Num),
    ("eps", Ty::Num),
    // grids
    ("x_min", Ty::Num),
    ("x_max", Ty::Num),
    ("dx", Ty::Num),
    ("dt", Ty::Num),
    ("t_end", Ty::Num),
    ("window_start", Ty::Num),
    ("window_end", Ty::Num),
    ("level", Ty::Num),
    ("track", Ty::Str),
    ("snapshot_every", Ty::Num),
    ("step_at", Ty::Num),
    // profile / continuation
    ("tol", Ty::Num),
    ("max_iter", Ty::Int),
    ("max_l", Ty::Num),
    ("auto_extend", Ty::Bool),
    ("eps_from", Ty::Num),
    ("eps_to", Ty::Num),
    ("factor", Ty::Num),
    // experiments
    ("experiment", Ty::Str),
    ("kind", Ty::Str),
    ("c", Ty::Num),
    ("c_ref", Ty::Num),
    ("alpha_frac", Ty::Num),
    ("beta_frac", Ty::Num),
    ("n_pairs", Ty::Int),
    ("delta", Ty::Num),
    ("nu", Ty::Int),
    ("nv", Ty::Int),
    ("criterion", Ty::Int),
];

fn key_type(key: &str) -> Option<Ty> {
    KEYS.iter().find(|k| k.0 == key).map(|k| k.1)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(untagged)]
pub enum ConfigValue {
    Num(f64),
    Int(u64),
    Bool(bool),
    Str(String),
}

impl fmt::Display for ConfigValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ConfigValue::Num(x) => write!(f, "{x}"),
            ConfigValue::Int(x) => write!(f, "{x}"),
            ConfigValue::Bool(x) => write!(f, "{x}"),
            ConfigValue::Str(x) => write!(f, "{x}"),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Source {
    Default,
    Preset,
    File,
    Flag,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Entry {
    pub value: ConfigValue,
    pub source: Source,
}

fn parse_value(key: &str, raw: &str) -> std::result::Result<ConfigValue, String> {
    let ty = key_type(key).ok_or_else(|| format!("unknown key `{key}`"))?;
    let bad = |what: &str| format!("malformed {what} for `{key}`: `{raw}`");
    Ok(match ty {
        Ty::Num => {
            let x: f64 = raw.parse().map_err(|_| bad("number"))?;
            if !x.is_finite() {
                return Err(bad("number"));
            }
            ConfigValue::Num(x)
        }
        Ty::Int => ConfigValue::Int(raw.parse().map_err(|_| bad("integer"))?),
        Ty::Bool => match raw {
            "true" => ConfigValue::Bool(true),
            "false" => ConfigValue::Bool(false),
            _ => return Err(bad("boolean")),
        },
        Ty::Str => ConfigValue::Str(raw.to_string()),
    })
}

fn normalise_key(k: &str) -> String {
    k.trim().replace('-', "_")
}

/// Resolved configuration of one run.
#[derive(Clone, Debug, Default)]
pub struct RunConfig {
    pub subcommand: Option<String>,
    pub out: Option<PathBuf>,
    pub config_file: Option<PathBuf>,
    pub values: BTreeMap<String, Entry>,
}

impl RunConfig {
    fn set(&mut self, key: &str, value: ConfigValue, source: Source) {
        self.values.insert(key.to_string(), Entry { value, source });
    }

    /// Overlays `other`; its entries win.
    fn overlay(&mut self, other: &RunConfig) {
        for (k, e) in &other.values {
            self.values.insert(k.clone(), e.clone());
        }
    }

    fn raw(&mut self, key: &str, default: ConfigValue) -> ConfigValue {
        debug_assert!(key_type(key).is_some(), "unregistered key {key}");
        self.values.entry(key.to_string()).or_insert(Entry { value: default, source: Source::Default }).value.clone()
    }

    /// Numeric value, recording `default` when absent.
    pub fn num(&mut self, key: &str, default: f64) -> f64 {
        match self.raw(key, ConfigValue::Num(default)) {
            ConfigValue::Num(x) => x,
            ConfigValue::Int(n) => n as f64,
            _ => default,
        }
    }

    pub fn int(&mut self, key: &str, default: u64) -> u64 {
        match self.raw(key, ConfigValue::Int(default)) {
            ConfigValue::Int(n) => n,
            _ => default,
        }
    }

    pub fn boolean(&mut self, key: &str, default: bool) -> bool {
        match self.raw(key, ConfigValue::Bool(default)) {
            ConfigValue::Bool(b) => b,
            _ => default,
        }
    }

    pub fn string(&mut self, key: &str, default: &str) -> String {
        match self.raw(key, ConfigValue::Str(default.into())) {
            ConfigValue::Str(s) => s,
            other => other.to_string(),
        }
    }

    pub fn get(&self, key: &str) -> Option<&ConfigValue> {
        self.values.get(key).map(|e| &e.value)
    }

    pub fn model_params(&mut self) -> Result<ModelParams> {
        let r = self.num("r", 2.0);
        let b = self.num("b", 2.0);
        let h = self.num("h", 0.5);
        let eps = self.num("eps", 0.05);
        ModelParams::new(r, b, h, eps)
    }

    pub fn provenance(&self) -> Value {
        json!({
            "subcommand": self.subcommand,
            "out": self.out,
            "config_file": self.config_file,
            "config": self.values,
        })
    }
}

/// Parses `key = value` lines; `#` starts a comment.
pub fn parse_config(text: &str) -> Result<RunConfig> {
    let mut cfg = RunConfig::default();
    for (i, line) in text.lines().enumerate() {
        let line_no = i + 1;
        let line = line.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let err = |message: String| Error::Parse { line: line_no, message };
        let (k, v) = line.split_once('=').ok_or_else(|| err(format!("expected `key = value`, got `{line}`")))?;
        let key = normalise_key(k);
        let raw = v.trim();
        if raw.is_empty() {
            return Err(err(format!("missing value for `{key}`")));
        }
        let value = parse_value(&key, raw).map_err(err)?;
        cfg.set(&key, value, Source::File);
    }
    Ok(cfg)
}

/// Named parameter sets.
pub fn preset(name: &str) -> Option<Vec<(&'static str, ConfigValue)>> {
    use ConfigValue::{Num, Str};
    let params = |r: f64, b: f64, h: f64, eps: f64| vec![("r", Num(r)), ("b", Num(b)), ("h", Num(h)), ("eps", Num(eps))];
    let mut v = match name {
        "fig1a" => params(0.5, 2.0, 0.0, 0.0),
        "fig1b" => params(2.0, 2.0, 0.0, 0.0),
        "fig2" => params(2.0, 2.0, 0.0, 1.0),
        "claim3" => params(2.0, 2.0, 0.5, 0.25),
        "claim4" => params(2.0, 2.0, 0.5, 0.25),
        "appendixA" => params(2.0, 2.0, 0.5, 0.0),
        "r2b2h0" => params(2.0, 2.0, 0.0, 0.05),
        _ => return None,
    };
    match name {
        "claim3" => v.push(("experiment", Str("kpp_beta".into()))),
        "claim4" => v.push(("experiment", Str("sub_alpha2".into()))),
        "appendixA" => {
            v.push(("delta", Num(0.01)));
            v.push(("t_end", Num(40.0)));
        }
        _ => {}
    }
    Some(v)
}

pub const PRESETS: [&str; 7] = ["fig1a", "fig1b", "fig2", "claim3", "claim4", "appendixA", "r2b2h0"];

/// Parses `argv` (without the program name) into a resolved configuration.
pub fn parse_args(args: &[String]) -> Result<RunConfig> {
    let cfgerr = |m: String| Error::Configuration(m);
    let mut it = args.iter();
    let sub = it.next().ok_or_else(|| cfgerr(USAGE.into()))?;
    if !SUBCOMMANDS.contains(&sub.as_str()) {
        return Err(cfgerr(format!("unknown subcommand `{sub}`; {USAGE}")));
    }
    let mut flags = RunConfig::default();
    let mut out = None;
    let mut config_file = None;
    while let Some(arg) = it.next() {
        let body = arg.strip_prefix("--").ok_or_else(|| cfgerr(format!("expected `--key`, got `{arg}`")))?;
        let (key, value) = match body.split_once('=') {
            Some((k, v)) => (normalise_key(k), v.to_string()),
            None => {
                let v = it.next().ok_or_else(|| cfgerr(format!("flag `--{body}` needs a value")))?;
                (normalise_key(body), v.clone())
            }
        };
        match key.as_str() {
            "out" => out = Some(PathBuf::from(value)),
            "config" => config_file = Some(PathBuf::from(value)),
            _ => {
                let v = parse_value(&key, &value).map_err(|m| cfgerr(format!("flag --{key}: {m}")))?;
                flags.set(&key, v, Source::Flag);
            }
        }
    }
    let file = match &config_file {
        Some(path) => {
            let text = fs::read_to_string(path)
                .map_err(|e| cfgerr(format!("cannot read config file {}: {e}", path.display())))?;
            parse_config(&text)?
        }
        None => RunConfig::default(),
    };

    let mut cfg = RunConfig { subcommand: Some(sub.clone()), out, config_file, values: BTreeMap::new() };
    let preset_name = flags.get("preset").or_else(|| file.get("preset")).map(|v| v.to_string());
    if let Some(name) = preset_name {
        let values = preset(&name)
            .ok_or_else(|| cfgerr(format!("unknown preset `{name}`; known presets: {}", PRESETS.join(", "))))?;
        for (k, v) in values {
            cfg.set(k, v, Source::Preset);
        }
    }
    cfg.overlay(&file);
    cfg.overlay(&flags);
    Ok(cfg)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Format {
    Csv,
    Json,
    Both,
}

struct Output {
    dir: PathBuf,
    format: Format,
    written: Vec<String>,
}

impl Output {
    fn new(cfg: &mut RunConfig) -> Result<Self> {
        let format = match cfg.string("format", "both").as_str() {
            "csv" => Format::Csv,
            "json" => Format::Json,
            "both" => Format::Both,
            other => return Err(Error::Configuration(format!("format must be csv, json or both, got `{other}`"))),
        };
        let dir = cfg.out.clone().ok_or_else(|| Error::Configuration(format!("missing --out DIR; {USAGE}")))?;
        fs::create_dir_all(&dir)
            .map_err(|e| Error::Configuration(format!("output directory {} is not writable: {e}", dir.display())))?;
        Ok(Self { dir, format, written: Vec::new() })
    }

    fn write(&mut self, name: &str, contents: &str) -> Result<()> {
        fs::write(self.dir.join(name), contents)?;
        self.written.push(name.to_string());
        Ok(())
    }

    fn csv(&mut self, name: &str, contents: &str) -> Result<()> {
        if self.format != Format::Json {
            self.write(name, contents)?;
        }
        Ok(())
    }

    fn json(&mut self, name: &str, value: &Value) -> Result<()> {
        if self.format != Format::Csv {
            let mut s = serde_json::to_string_pretty(value)?;
            s.push('\n');
            self.write(name, &s)?;
        }
        Ok(())
    }
}

/// What a subcommand reports back: whether its checks held, and a short
/// human-readable summary for stdout or stderr.
struct Verdict {
    verified: bool,
    summary: String,
}

fn grid_from(cfg: &mut RunConfig, defaults: GridSpec) -> Result<GridSpec> {
    let g = GridSpec::with_dx(
        cfg.num("x_min", defaults.x_min),
        cfg.num("x_max", defaults.x_max),
        cfg.num("dx", defaults.dx()),
        cfg.num("dt", defaults.dt),
        cfg.num("t_end", defaults.t_end),
    );
    g.validate()?;
    Ok(g)
}

fn simulate(cfg: &mut RunConfig, out: &mut Output) -> Result<Verdict> {
    let p = cfg.model_params()?;
    let g = grid_from(cfg, GridSpec::with_dx(-100.0, 60.0, 0.1, 0.01, 80.0))?;
    let at = cfg.num("step_at", -0.5);
    let level = cfg.num("level", 0.5);
    let tracked = match cfg.string("track", "u").as_str() {
        "u" => Tracked::U,
        "v" => Tracked::V,
        other => return Err(Error::Configuration(format!("track must be u or v, got `{other}`"))),
    };
    let every = cfg.num("snapshot_every", 0.0);
    let window = [cfg.num("window_start", 0.5 * g.t_end), cfg.num("window_end", g.t_end)];
    // O on the left, beta on the right, joined by a cubic smoothstep.
    let init = FieldState::from_profile(&g, p.h, |x| {
        let s = smoothstep3(x - at);
        (s, s)
    });
    let opts = RunOptions { level, tracked, snapshot_every: (every > 0.0).then_some(every) };
    let res = run(&p, &g, init, &opts)?;
    let est = estimate_speed(&res.track, window)?;
    out.csv("front_track.csv", &res.track.to_csv())?;
    let last = crate::rdsim::Snapshot { t: res.last.t, u: res.last.u.clone(), v: res.last.v.clone() };
    out.csv("final_state.csv", &last.to_csv(&g))?;
    for (k, s) in res.snapshots.iter().enumerate() {
        out.csv(&format!("snapshot_{k:04}.csv"), &s.to_csv(&g))?;
    }
    let speed = -est.c;
    out.json(
        "simulate.json",
        &json!({"params": p, "grid": g, "theta": res.theta, "slope": est.c, "leftward_speed": speed,
                "r2": est.r2, "samples": est.samples, "window": window, "misses": res.track.misses,
                "initial_data": "cubic smoothstep from O (left) to beta (right)"}),
    )?;
    Ok(Verdict { verified: true, summary: format!("front slope {:.5} (leftward speed {speed:.5}), r2 {:.6}", est.c, est.r2) })
}

fn profile_options(cfg: &mut RunConfig) -> ProfileOptions {
    let d = ProfileOptions::default();
    ProfileOptions {
        tol: cfg.num("tol", d.tol),
        max_iter: cfg.int("max_iter", d.max_iter as u64) as usize,
        max_halvings: d.max_halvings,
        auto_extend: cfg.boolean("auto_extend", d.auto_extend),
        max_l: cfg.num("max_l", d.max_l),
    }
}

fn profile(cfg: &mut RunConfig, out: &mut Output) -> Result<Verdict> {
    let p = cfg.model_params()?;
    let opts = profile_options(cfg);
    let w = solve_from_scratch(&p, &opts)?;
    let rep = verify_front(&w, &p)?;
    out.csv("profile.csv", &w.to_csv())?;
    out.json(
        "profile.json",
        &json!({"params": p, "c": w.c, "l": w.l, "d_xi": w.d_xi, "residual": w.residual,
                "iterations": w.iterations, "options": {"tol": opts.tol, "max_iter": opts.max_iter,
                "max_halvings": opts.max_halvings, "auto_extend": opts.auto_extend, "max_l": opts.max_l},
                "verification": rep}),
    )?;
    let mut summary = format!("c = {:.8}, residual {:.2e}, L = {}", w.c, w.residual, w.l);
    if !rep.passed() {
        summary.push_str(&format!("; verification failed: {}", rep.failures.join("; ")));
    }
    Ok(Verdict { verified: rep.passed(), summary })
}

fn continuation(cfg: &mut RunConfig, out: &mut Output) -> Result<Verdict> {
    let eps_from = cfg.num("eps_from", 0.2);
    let eps_to = cfg.num("eps_to", 0.00625);
    let factor = cfg.num("factor", 0.5);
    let r = cfg.num("r", 2.0);
    let b = cfg.num("b", 2.0);
    let h = cfg.num("h", 0.5);
    let p = ModelParams::new(r, b, h, eps_from)?;
    let run = continue_in_epsilon(&p, eps_from, eps_to, factor)?;
    let mut csv = String::from("epsilon,c,residual,iterations,l\n");
    for s in &run.steps {
        csv.push_str(&format!("{},{},{},{},{}\n", s.epsilon, s.c, s.residual, s.iterations, s.l));
    }
    out.csv("continuation.csv", &csv)?;
    if let Some(w) = &run.last_profile {
        out.csv("last_profile.csv", &w.to_csv())?;
    }
    out.json("continuation.json", &json!(run))?;
    let verified = run.aborted.is_none() && run.differences_decreasing;
    let mut summary = format!(
        "{} steps, c* extrapolated {}, differences decreasing: {}",
        run.steps.len(),
        run.c_star_extrapolated.map_or("-".into(), |c| format!("{c:.6}")),
        run.differences_decreasing
    );
    if let Some(why) = &run.aborted {
        summary.push_str(&format!("; aborted: {why}"));
    }
    Ok(Verdict { verified, summary })
}

/// Tolerance each spreading experiment is judged against.
fn speed_ok(kind: SpreadingKind, speed: f64, expected: Option<f64>) -> bool {
    match (kind, expected) {
        (SpreadingKind::KppBeta, Some(e)) => (speed - e).abs() <= 0.05 * e,
        (SpreadingKind::EpsKpp, Some(e)) => (speed - e).abs() <= 0.07 * e,
        (SpreadingKind::SubAlpha2, _) => speed > 0.0,
        (SpreadingKind::SuperAlpha2, _) => speed >= -0.02,
        _ => true,
    }
}

fn speeds(cfg: &mut RunConfig, out: &mut Output) -> Result<Verdict> {
    use rayon::prelude::*;
    let p = cfg.model_params()?;
    let which = cfg.string("experiment", "kpp_beta");
    let kinds: Vec<SpreadingKind> =
        if which == "all" { SpreadingKind::ALL.to_vec() } else { vec![SpreadingKind::parse(&which)?] };
    let reports: Vec<_> = kinds.par_iter().map(|&k| crate::rdsim::spreading_speed_experiment(k, &p, None)).collect();
    let mut verified = true;
    let mut lines = Vec::new();
    let mut all = Vec::new();
    for (k, rep) in kinds.iter().zip(reports) {
        let rep = rep?;
        let ok = speed_ok(*k, rep.speed, rep.expected);
        verified &= ok;
        lines.push(format!(
            "{} {} speed {:.4}{}{}",
            k.name(),
            rep.direction,
            rep.speed,
            rep.expected.map_or(String::new(), |e| format!(" (expected {e:.4})")),
            if ok { "" } else { " OUT OF TOLERANCE" }
        ));
        all.push(json!({"report": rep, "within_tolerance": ok}));
    }
    let body = if all.len() == 1 { all.pop().unwrap() } else { Value::Array(all) };
    out.json("speeds.json", &body)?;
    Ok(Verdict { verified, summary: lines.join("\n") })
}

fn subsuper(cfg: &mut RunConfig, out: &mut Output) -> Result<Verdict> {
    let p = cfg.model_params()?;
    let kind = Kind::parse(&cfg.string("kind", "sub"))?;
    let cert = certify(&p, kind)?;
    out.json("subsuper.json", &json!({"report": cert.report, "halvings": cert.halvings}))?;
    let r = &cert.report;
    Ok(Verdict {
        verified: r.passed,
        summary: format!(
            "{} solution certified after {} halvings: margin {:.3e}, splice mismatch {:.1e}, {} points",
            kind.name(),
            cert.halvings,
            r.margin,
            r.splice_mismatch,
            r.points
        ),
    })
}

fn manifold(cfg: &mut RunConfig, out: &mut Output) -> Result<Verdict> {
    let p = cfg.model_params()?;
    let c_ref = cfg.num("c_ref", 1.0);
    let c = cfg.num("c", c_ref);
    let n_pairs = cfg.int("n_pairs", 30) as usize;
    let mut mc = manifold_constants(&p, c_ref)?;
    if let Some(ConfigValue::Num(step)) = cfg.get("dt").cloned() {
        mc = mc.with_step(step)?;
    }
    let alpha = cfg.num("alpha_frac", 0.6) * mc.disk_radius;
    let beta = cfg.num("beta_frac", 0.3) * mc.disk_radius;
    let (fp, rep) = solve_and_report(alpha, beta, &mc, &p, c, n_pairs)?;
    let env = envelope_check(&fp.iterate, &mc);
    out.csv("manifold.csv", &fp.iterate.to_csv(&mc))?;
    out.json("manifold.json", &json!({"params": p, "config": mc, "report": rep, "envelope": env}))?;
    let verified = rep.contraction_ratio <= 0.55 && env.holds();
    Ok(Verdict {
        verified,
        summary: format!(
            "fixed point in {} iterations, contraction ratio {:.3e}, ODE defect {:.2e}, envelope ratios {:.3} / {:.3}",
            rep.iterations, rep.contraction_ratio, rep.ode_defect, env.phi_ratio, env.psi_ratio
        ),
    })
}

fn phase(cfg: &mut RunConfig, out: &mut Output) -> Result<Verdict> {
    let p = cfg.model_params()?;
    let d = PhaseGrid::default();
    let grid = PhaseGrid { nu: cfg.int("nu", d.nu as u64) as usize, nv: cfg.int("nv", d.nv as u64) as usize, ..d };
    if grid.nu < 2 || grid.nv < 2 {
        return Err(Error::Configuration("phase grid needs nu, nv >= 2".into()));
    }
    let lines = nullclines(&p, &grid);
    out.csv("nullclines.csv", &nullclines_csv(&lines))?;
    let mut vf = String::from("u,v,du,dv\n");
    for [u, v, du, dv] in vector_field(&p, &grid) {
        vf.push_str(&format!("{u},{v},{du},{dv}\n"));
    }
    out.csv("vector_field.csv", &vf)?;
    let class = classify_equilibria(&p)?;
    let mut report = json!({"params": p, "grid": grid, "equilibria": class});
    let mut verified = true;
    let mut summary = format!("{} equilibria, bistable: {}", class.equilibria.len(), class.bistable);
    if let Some(ConfigValue::Num(delta)) = cfg.get("delta").cloned() {
        let t_end = cfg.num("t_end", 40.0);
        let dt = cfg.num("dt", 0.01);
        let traj = integrate_dde(&p, &HistorySegment::constant(p.h, delta, delta), t_end, dt)?;
        out.csv("trajectory.csv", &traj.to_csv())?;
        let boxr = stability_box_experiment(&p, delta, t_end)?;
        verified = boxr.passed();
        summary.push_str(&format!(
            "; box from delta = {delta}: psi_max {:.4e} (bound {}), phi envelope ratio {:.3} (decay {})",
            boxr.psi_max,
            if boxr.bound_ok { "holds" } else { "violated" },
            boxr.max_phi_ratio,
            if boxr.phi_decay_ok { "holds" } else { "violated" }
        ));
        report["stability_box"] = json!(boxr);
    }
    out.json("phase.json", &report)?;
    Ok(Verdict { verified, summary })
}

fn acceptance(cfg: &mut RunConfig, out: &mut Output) -> Result<Verdict> {
    let rows = match cfg.get("criterion").cloned() {
        Some(ConfigValue::Int(id)) => {
            let id = u8::try_from(id).ok().filter(|id| CRITERIA.iter().any(|c| c.0 == *id));
            let id = id.ok_or_else(|| Error::Configuration("criterion must be between 1 and 10".into()))?;
            vec![run_criterion(id)]
        }
        _ => run_all(),
    };
    for r in &rows {
        out.json(&format!("criterion_{:02}_{}.json", r.id, r.name), &json!(r))?;
    }
    let table = summary_table(&rows);
    out.csv("acceptance.txt", &table)?;
    out.json(
        "acceptance.json",
        &json!(rows.iter().map(|r| json!({"id": r.id, "name": r.name, "passed": r.passed, "measured": r.measured,
            "tolerance": r.tolerance, "runtime_s": r.runtime_s})).collect::<Vec<_>>()),
    )?;
    Ok(Verdict { verified: rows.iter().all(|r| r.passed), summary: table.trim_end().to_string() })
}

fn dispatch(cfg: &mut RunConfig, out: &mut Output) -> Result<Verdict> {
    match cfg.subcommand.clone().as_deref() {
        Some("simulate") => simulate(cfg, out),
        Some("profile") => profile(cfg, out),
        Some("continue") => continuation(cfg, out),
        Some("speeds") => speeds(cfg, out),
        Some("subsuper") => subsuper(cfg, out),
        Some("manifold") => manifold(cfg, out),
        Some("phase") => phase(cfg, out),
        Some("acceptance") => acceptance(cfg, out),
        other => Err(Error::Configuration(format!("unknown subcommand {other:?}; {USAGE}"))),
    }
}

fn exit_code(e: &Error) -> i32 {
    if e.is_configuration() {
        2
    } else {
        1
    }
}

fn report_error(e: &Error) {
    match e {
        Error::Infeasible(items) => {
            eprintln!("error: parameters violate the construction's constraints:");
            for item in items {
                eprintln!("  - {item}");
            }
        }
        _ => eprintln!("error: {e}"),
    }
}

/// Runs one subcommand and returns the process exit code: 0 on success, 1
/// when a verification fails or the computation breaks down, 2 on a
/// configuration error.
pub fn run_command(args: &[String]) -> i32 {
    if args.is_empty() || matches!(args[0].as_str(), "-h" | "--help" | "help") {
        println!("{USAGE}");
        println!("presets: {}", PRESETS.join(", "));
        return if args.is_empty() { 2 } else { 0 };
    }
    let start = Instant::now();
    let mut cfg = match parse_args(args) {
        Ok(c) => c,
        Err(e) => {
            report_error(&e);
            return 2;
        }
    };
    let mut out = match Output::new(&mut cfg) {
        Ok(o) => o,
        Err(e) => {
            report_error(&e);
            return exit_code(&e);
        }
    };
    let result = dispatch(&mut cfg, &mut out);
    let (code, status, summary) = match &result {
        Ok(v) if v.verified => (0, "ok", v.summary.clone()),
        Ok(v) => (1, "verification_failed", v.summary.clone()),
        Err(e) => (exit_code(e), if e.is_configuration() { "configuration_error" } else { "failed" }, e.to_string()),
    };
    match &result {
        Ok(v) if v.verified => println!("{summary}"),
        Ok(_) => eprintln!("{summary}"),
        Err(e) => report_error(e),
    }
    let mut prov = cfg.provenance();
    prov["status"] = json!(status);
    prov["exit_code"] = json!(code);
    prov["summary"] = json!(summary);
    prov["outputs"] = json!(out.written);
    prov["version"] = json!(env!("CARGO_PKG_VERSION"));
    prov["package"] = json!(env!("CARGO_PKG_NAME"));
    prov["wall_time_s"] = json!(start.elapsed().as_secs_f64());
    let path: &Path = &out.dir.join("provenance.json");
    let text = serde_json::to_string_pretty(&prov).unwrap_or_default() + "\n";
    if let Err(e) = fs::write(path, text) {
        eprintln!("error: cannot write {}: {e}", path.display());
        return code.max(1);
    }
    code
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn config_file_round_trip() {
        let mut cfg = parse_config("r = 2.0\nb = 2.0\nh = 0.5\neps = 0.05").unwrap();
        let p = cfg.model_params().unwrap();
        assert_eq!((p.r, p.b, p.h, p.epsilon), (2.0, 2.0, 0.5, 0.05));
    }

    #[test]
    fn malformed_number_reports_line() {
        match parse_config("r = banana") {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 1),
            other => panic!("expected parse error, got {other:?}"),
        }
        match parse_config("# comment\nr = 2\nzeta = 3") {
            Err(Error::Parse { line, message }) => {
                assert_eq!(line, 3);
                assert!(message.contains("unknown key"));
            }
            other => panic!("expected parse error, got {other:?}"),
        }
        assert!(matches!(parse_config("\n\neps =\n"), Err(Error::Parse { line: 3, .. })));
    }

    #[test]
    fn layering_order() {
        let dir = tempfile::tempdir().unwrap();
        let file = dir.path().join("run.cfg");
        fs::write(&file, "preset = r2b2h0\nh = 0.25\neps = 0.1\n").unwrap();
        let args: Vec<String> =
            ["profile", "--config", file.to_str().unwrap(), "--eps", "0.05"].iter().map(|s| s.to_string()).collect();
        let cfg = parse_args(&args).unwrap();
        let e = |k: &str| cfg.values[k].clone();
        assert_eq!(e("r"), Entry { value: ConfigValue::Num(2.0), source: Source::Preset });
        assert_eq!(e("h"), Entry { value: ConfigValue::Num(0.25), source: Source::File });
        assert_eq!(e("eps"), Entry { value: ConfigValue::Num(0.05), source: Source::Flag });
    }

    #[test]
    fn unknown_preset_is_configuration_error() {
        let args: Vec<String> = ["phase", "--preset", "fig9"].iter().map(|s| s.to_string()).collect();
        assert!(parse_args(&args).unwrap_err().is_configuration());
    }
}
