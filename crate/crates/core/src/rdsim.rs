//! One-dimensional simulation of the delayed system on a truncated line,
//! with front tracking and the spreading-speed experiments.
//!
//! A step is Strang-split: half a reaction step (two-stage SSP Runge–Kutta,
//! delayed field interpolated linearly from the history ring), a full
//! theta-weighted implicit diffusion step with no-flux ends, and another
//! half reaction step. `theta` is the smallest value `>= 1/2` that keeps the
//! diffusion step monotone, so the discrete solution operator is
//! order-preserving and leaves `[0, 1]^2` invariant.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::model::{equilibria, ModelParams};
use crate::numerics::{linear_fit, smoothstep3, solve_tridiagonal, LinearFit};

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct GridSpec {
    pub x_min: f64,
    pub x_max: f64,
    pub n: usize,
    pub dt: f64,
    pub t_end: f64,
}

impl Default for GridSpec {
    fn default() -> Self {
        Self::with_dx(-100.0, 200.0, 0.1, 0.02, 80.0)
    }
}

impl GridSpec {
    pub fn with_dx(x_min: f64, x_max: f64, dx: f64, dt: f64, t_end: f64) -> Self {
        let n = ((x_max - x_min) / dx).round() as usize + 1;
        Self { x_min, x_max, n, dt, t_end }
    }

    pub fn dx(&self) -> f64 {
        (self.x_max - self.x_min) / (self.n - 1) as f64
    }

    pub fn x(&self, i: usize) -> f64 {
        self.x_min + i as f64 * self.dx()
    }

    pub fn xs(&self) -> Vec<f64> {
        (0..self.n).map(|i| self.x(i)).collect()
    }

    pub fn steps(&self) -> usize {
        (self.t_end / self.dt).round() as usize
    }

    pub fn validate(&self) -> Result<()> {
        if self.n < 3 {
            return Err(Error::Configuration(format!("grid needs n >= 3, got {}", self.n)));
        }
        let dx = self.dx();
        if !(dx > 0.0 && dx.is_finite()) {
            return Err(Error::Configuration(format!("grid spacing must be positive, got {dx}")));
        }
        if !(self.dt > 0.0) || self.dt > dx {
            return Err(Error::Configuration(format!("need 0 < dt <= dx, got dt = {}, dx = {dx}", self.dt)));
        }
        if !(self.t_end >= 0.0) {
            return Err(Error::Configuration(format!("t_end must be >= 0, got {}", self.t_end)));
        }
        Ok(())
    }
}

/// Fields at the current time plus a ring of past `v` arrays.
#[derive(Clone, Debug)]
pub struct FieldState {
    pub u: Vec<f64>,
    pub v: Vec<f64>,
    pub t: f64,
    ring: Vec<Vec<f64>>,
    head: usize,
}

impl FieldState {
    fn depth(h: f64, dt: f64) -> usize {
        if h > 0.0 {
            (h / dt).ceil() as usize + 2
        } else {
            1
        }
    }

    /// Initial data whose history on `[-h, 0]` is given by `f(s, x)`.
    pub fn from_history(g: &GridSpec, h: f64, f: impl Fn(f64, f64) -> (f64, f64)) -> Self {
        let depth = Self::depth(h, g.dt);
        let xs = g.xs();
        // Slot `depth - 1 - k` holds age `k`, so the newest sits at `head = depth - 1`.
        let ring: Vec<Vec<f64>> = (0..depth)
            .map(|slot| {
                let age = (depth - 1 - slot) as f64 * g.dt;
                let s = (-age).max(-h);
                xs.iter().map(|&x| f(s, x).1).collect()
            })
            .collect();
        let (u, v): (Vec<f64>, Vec<f64>) = xs.iter().map(|&x| f(0.0, x)).unzip();
        Self { u, v, t: 0.0, ring, head: depth - 1 }
    }

    /// Initial data constant in time on `[-h, 0]`.
    pub fn from_profile(g: &GridSpec, h: f64, f: impl Fn(f64) -> (f64, f64)) -> Self {
        Self::from_history(g, h, |_, x| f(x))
    }

    pub fn constant(g: &GridSpec, h: f64, u: f64, v: f64) -> Self {
        Self::from_history(g, h, |_, _| (u, v))
    }

    pub fn history_depth(&self) -> usize {
        self.ring.len()
    }

    fn aged(&self, k: usize) -> &[f64] {
        let d = self.ring.len();
        &self.ring[(self.head + d - k.min(d - 1)) % d]
    }

    /// `v` at `age` time units before `t`, linear in time between stored
    /// levels; ages below zero are clamped to the current level.
    fn delayed_into(&self, age: f64, dt: f64, out: &mut Vec<f64>) {
        out.clear();
        let a = (age / dt).max(0.0);
        let k0 = a.floor() as usize;
        let frac = a - k0 as f64;
        let lo = self.aged(k0);
        if frac < 1e-12 {
            out.extend_from_slice(lo);
        } else {
            let hi = self.aged(k0 + 1);
            out.extend(lo.iter().zip(hi).map(|(x, y)| (1.0 - frac) * x + frac * y));
        }
    }

    fn push_history(&mut self) {
        let d = self.ring.len();
        self.head = (self.head + 1) % d;
        self.ring[self.head].copy_from_slice(&self.v);
    }

    /// Shifts every stored field by `k` nodes toward larger `x`, padding
    /// with the left boundary value.
    pub fn shifted(&self, k: usize) -> Self {
        let sh = |a: &[f64]| -> Vec<f64> {
            let n = a.len();
            (0..n).map(|i| if i >= k { a[i - k] } else { a[0] }).collect()
        };
        Self {
            u: sh(&self.u),
            v: sh(&self.v),
            t: self.t,
            ring: self.ring.iter().map(|r| sh(r)).collect(),
            head: self.head,
        }
    }
}

/// Reusable workspace for stepping one simulation.
#[derive(Clone, Debug)]
pub struct Stepper {
    p: ModelParams,
    g: GridSpec,
    pub theta: f64,
    lower: Vec<f64>,
    diag: Vec<f64>,
    upper: Vec<f64>,
    scratch: Vec<f64>,
    rhs: Vec<f64>,
    vd0: Vec<f64>,
    vd1: Vec<f64>,
    vd2: Vec<f64>,
}

impl Stepper {
    pub fn new(p: &ModelParams, g: &GridSpec) -> Result<Self> {
        p.validate()?;
        g.validate()?;
        let dx = g.dx();
        let lam = g.dt / (dx * dx);
        if 0.5 * g.dt * p.kinetic_lipschitz() > 1.0 {
            return Err(Error::Configuration(format!(
                "dt = {} too large for the explicit reaction (Lipschitz bound {})",
                g.dt,
                p.kinetic_lipschitz()
            )));
        }
        let theta = (1.0 - 1.0 / (2.0 * lam)).max(0.5);
        let n = g.n;
        let mut lower = vec![-theta * lam; n];
        let mut upper = vec![-theta * lam; n];
        lower[0] = 0.0;
        upper[n - 1] = 0.0;
        upper[0] = -2.0 * theta * lam;
        lower[n - 1] = -2.0 * theta * lam;
        Ok(Self {
            p: *p,
            g: *g,
            theta,
            lower,
            diag: vec![1.0 + 2.0 * theta * lam; n],
            upper,
            scratch: Vec::with_capacity(n),
            rhs: Vec::with_capacity(n),
            vd0: Vec::with_capacity(n),
            vd1: Vec::with_capacity(n),
            vd2: Vec::with_capacity(n),
        })
    }

    fn react_half(&self, s: &mut FieldState, vd_a: &[f64], vd_b: &[f64]) {
        let tau = 0.5 * self.g.dt;
        let p = &self.p;
        for i in 0..s.u.len() {
            let (u0, v0) = (s.u[i], s.v[i]);
            let (da, db) = p.reaction(u0, if p.h == 0.0 { v0 } else { vd_a[i] }, v0);
            let (u1, v1) = (u0 + tau * da, v0 + tau * db);
            let (ea, eb) = p.reaction(u1, if p.h == 0.0 { v1 } else { vd_b[i] }, v1);
            s.u[i] = 0.5 * (u0 + u1 + tau * ea);
            s.v[i] = 0.5 * (v0 + v1 + tau * eb);
        }
    }

    fn diffuse(&mut self, w: &mut [f64]) -> Result<()> {
        let dx = self.g.dx();
        let k = (1.0 - self.theta) * self.g.dt / (dx * dx);
        let n = w.len();
        self.rhs.clear();
        self.rhs.push(w[0] + 2.0 * k * (w[1] - w[0]));
        for i in 1..n - 1 {
            self.rhs.push(w[i] + k * (w[i - 1] - 2.0 * w[i] + w[i + 1]));
        }
        self.rhs.push(w[n - 1] + 2.0 * k * (w[n - 2] - w[n - 1]));
        solve_tridiagonal(&self.lower, &self.diag, &self.upper, &mut self.rhs, &mut self.scratch)?;
        w.copy_from_slice(&self.rhs);
        Ok(())
    }

    pub fn step(&mut self, s: &mut FieldState) -> Result<()> {
        let (h, dt) = (self.p.h, self.g.dt);
        let mut vd0 = std::mem::take(&mut self.vd0);
        let mut vd1 = std::mem::take(&mut self.vd1);
        let mut vd2 = std::mem::take(&mut self.vd2);
        if h > 0.0 {
            s.delayed_into(h, dt, &mut vd0);
            s.delayed_into(h - 0.5 * dt, dt, &mut vd1);
            s.delayed_into(h - dt, dt, &mut vd2);
        }
        self.react_half(s, &vd0, &vd1);
        let mut u = std::mem::take(&mut s.u);
        let mut v = std::mem::take(&mut s.v);
        let res = self.diffuse(&mut u).and_then(|_| self.diffuse(&mut v));
        s.u = u;
        s.v = v;
        res?;
        self.react_half(s, &vd1, &vd2);
        self.vd0 = vd0;
        self.vd1 = vd1;
        self.vd2 = vd2;
        s.t += dt;
        if let Some(i) = s.u.iter().zip(&s.v).position(|(a, b)| !(a.is_finite() && b.is_finite())) {
            return Err(Error::Divergence {
                t: s.t,
                what: format!("non-finite field at x = {}", self.g.x(i)),
            });
        }
        s.push_history();
        Ok(())
    }
}

/// One step on a copy of `s`.
pub fn step_imex(s: &FieldState, p: &ModelParams, g: &GridSpec) -> Result<FieldState> {
    let mut next = s.clone();
    Stepper::new(p, g)?.step(&mut next)?;
    Ok(next)
}

/// Abscissa where `field` crosses `level`, by linear interpolation.
pub fn front_position(field: &[f64], g: &GridSpec, level: f64) -> Result<f64> {
    let crossings = crossings(field, g, level);
    match crossings.len() {
        0 => Err(Error::NotBracketed { level }),
        1 => Ok(crossings[0]),
        _ => Err(Error::Ambiguous { level, crossings }),
    }
}

fn crossings(field: &[f64], g: &GridSpec, level: f64) -> Vec<f64> {
    let sign = |y: f64| {
        let d = y - level;
        if d > 0.0 {
            1i8
        } else if d < 0.0 {
            -1
        } else {
            0
        }
    };
    let mut out = Vec::new();
    let mut last: Option<(usize, i8)> = None;
    let mut i = 0;
    while i < field.len() {
        let s = sign(field[i]);
        if s == 0 {
            let start = i;
            while i + 1 < field.len() && sign(field[i + 1]) == 0 {
                i += 1;
            }
            let after = field.get(i + 1).map(|&y| sign(y));
            if let (Some((_, a)), Some(b)) = (last, after) {
                if a != b {
                    out.push(0.5 * (g.x(start) + g.x(i)));
                }
            }
            i += 1;
            continue;
        }
        if let Some((j, a)) = last {
            if a != s && j + 1 == i {
                let (y0, y1) = (field[j], field[i]);
                out.push(g.x(j) + g.dx() * (level - y0) / (y1 - y0));
            }
        }
        last = Some((i, s));
        i += 1;
    }
    out
}

#[derive(Clone, Debug, Default, Serialize)]
pub struct FrontTrack {
    pub level: f64,
    pub t: Vec<f64>,
    pub x: Vec<f64>,
    /// Steps at which the level was not crossed exactly once.
    pub misses: usize,
}

impl FrontTrack {
    pub fn new(level: f64) -> Self {
        Self { level, ..Default::default() }
    }

    pub fn push(&mut self, t: f64, x: f64) {
        self.t.push(t);
        self.x.push(x);
    }

    pub fn to_csv(&self) -> String {
        let mut s = String::from("t,x_front\n");
        for (t, x) in self.t.iter().zip(&self.x) {
            s.push_str(&format!("{t},{x}\n"));
        }
        s
    }
}

#[derive(Clone, Copy, Debug, Serialize)]
pub struct SpeedEstimate {
    /// Slope of the tracked abscissa against time.
    pub c: f64,
    pub r2: f64,
    pub samples: usize,
    pub window: [f64; 2],
}

pub fn estimate_speed(track: &FrontTrack, window: [f64; 2]) -> Result<SpeedEstimate> {
    let (ts, xs): (Vec<f64>, Vec<f64>) = track
        .t
        .iter()
        .zip(&track.x)
        .filter(|(t, _)| **t >= window[0] - 1e-9 && **t <= window[1] + 1e-9)
        .map(|(t, x)| (*t, *x))
        .unzip();
    if ts.len() < 10 {
        return Err(Error::InsufficientData(format!(
            "{} front samples in [{}, {}], need >= 10",
            ts.len(),
            window[0],
            window[1]
        )));
    }
    let LinearFit { slope, r2, samples, .. } = linear_fit(&ts, &xs)?;
    Ok(SpeedEstimate { c: slope, r2, samples, window })
}

#[derive(Clone, Copy, Debug, Serialize)]
pub enum Tracked {
    U,
    V,
}

#[derive(Clone, Debug)]
pub struct RunOptions {
    pub level: f64,
    pub tracked: Tracked,
    /// Snapshot spacing in time; `None` keeps only the final state.
    pub snapshot_every: Option<f64>,
}

impl Default for RunOptions {
    fn default() -> Self {
        Self { level: 0.5, tracked: Tracked::U, snapshot_every: None }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct Snapshot {
    pub t: f64,
    pub u: Vec<f64>,
    pub v: Vec<f64>,
}

impl Snapshot {
    pub fn to_csv(&self, g: &GridSpec) -> String {
        let mut s = String::from("x,u,v\n");
        for i in 0..self.u.len() {
            s.push_str(&format!("{},{},{}\n", g.x(i), self.u[i], self.v[i]));
        }
        s
    }
}

#[derive(Clone, Debug)]
pub struct SimResult {
    pub snapshots: Vec<Snapshot>,
    pub track: FrontTrack,
    pub last: FieldState,
    pub theta: f64,
}

pub fn run(p: &ModelParams, g: &GridSpec, init: FieldState, opts: &RunOptions) -> Result<SimResult> {
    if !(opts.level > 0.0 && opts.level < 1.0) {
        return Err(Error::Configuration(format!("tracking level must lie in (0, 1), got {}", opts.level)));
    }
    if init.u.len() != g.n || init.v.len() != g.n {
        return Err(Error::Configuration("initial state does not match the grid".into()));
    }
    let mut stepper = Stepper::new(p, g)?;
    let mut s = init;
    let mut track = FrontTrack::new(opts.level);
    let mut snapshots = Vec::new();
    let stride = opts.snapshot_every.map(|e| ((e / g.dt).round() as usize).max(1));
    let record = |s: &FieldState, k: usize, track: &mut FrontTrack, snaps: &mut Vec<Snapshot>| {
        let field = match opts.tracked {
            Tracked::U => &s.u,
            Tracked::V => &s.v,
        };
        match front_position(field, g, opts.level) {
            Ok(x) => track.push(s.t, x),
            Err(_) => track.misses += 1,
        }
        if stride.is_some_and(|m| k.is_multiple_of(m)) {
            snaps.push(Snapshot { t: s.t, u: s.u.clone(), v: s.v.clone() });
        }
    };
    record(&s, 0, &mut track, &mut snapshots);
    for k in 1..=g.steps() {
        stepper.step(&mut s)?;
        record(&s, k, &mut track, &mut snapshots);
    }
    Ok(SimResult { snapshots, track, last: s, theta: stepper.theta })
}

/// Constants of the small exponential super-solutions near `O` and `beta`
/// that shape the experiment initial data.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct ClaimConstants {
    /// Amplitude bound near `O`; requires `0 < eps < r - 1`.
    pub m0: Option<f64>,
    /// Decay rate near `beta`, half of its admissible bound.
    pub delta: f64,
    /// Amplitude bound near `beta` for that rate.
    pub m1: f64,
}

pub fn claim_constants(p: &ModelParams) -> Result<ClaimConstants> {
    let (r, b, h, e) = (p.r, p.b, p.h, p.epsilon);
    if r <= 1.0 || e >= b {
        return Err(Error::Parameter(format!("need r > 1 and eps < b, got r = {r}, eps = {e}")));
    }
    let m0 = (e > 0.0 && e < r - 1.0)
        .then(|| (-0.5 * e * h).exp() * (0.25f64).min(1.0 - 1.0 / r - e / (2.0 * r)));
    let delta_bound = (b - e).min((r - 1.0) * r.ln() / (r * r.ln() + (r - 1.0) * h));
    let delta = 0.5 * delta_bound;
    let m1 = (1.0 - (delta + e) / b).min(1.0 - r * delta / (r - (delta * h).exp())) / (r * r);
    if !(m1 > 0.0) {
        return Err(Error::Parameter(format!("no admissible amplitude near beta (m1 = {m1})")));
    }
    Ok(ClaimConstants { m0, delta, m1 })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SpreadingKind {
    KppBeta,
    EpsKpp,
    SubAlpha2,
    SuperAlpha2,
}

impl SpreadingKind {
    pub const ALL: [SpreadingKind; 4] = [Self::KppBeta, Self::EpsKpp, Self::SubAlpha2, Self::SuperAlpha2];

    pub fn name(self) -> &'static str {
        match self {
            Self::KppBeta => "kpp_beta",
            Self::EpsKpp => "eps_kpp",
            Self::SubAlpha2 => "sub_alpha2",
            Self::SuperAlpha2 => "super_alpha2",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| Error::Configuration(format!("unknown experiment '{s}'")))
    }

    /// Grid and fit window used when none is supplied.
    pub fn default_grid(self, p: &ModelParams) -> (GridSpec, [f64; 2]) {
        match self {
            Self::KppBeta => (GridSpec::with_dx(-200.0, 40.0, 0.1, 0.01, 80.0), [40.0, 80.0]),
            Self::EpsKpp => {
                let reach = 2.0 * p.epsilon.sqrt() * 400.0;
                (GridSpec::with_dx(-40.0, (reach + 80.0).ceil(), 0.1, 0.01, 400.0), [200.0, 400.0])
            }
            Self::SubAlpha2 => (GridSpec::with_dx(-200.0, 40.0, 0.1, 0.01, 80.0), [40.0, 80.0]),
            Self::SuperAlpha2 => (GridSpec::with_dx(-120.0, 120.0, 0.1, 0.01, 80.0), [40.0, 80.0]),
        }
    }
}

/// Cubic smoothstep from `left` (at `x <= a`) to `right` (at `x >= a + 1`).
fn blend(x: f64, a: f64, left: f64, right: f64) -> f64 {
    let s = smoothstep3(x - a);
    left + (right - left) * s
}

#[derive(Clone, Debug, Serialize)]
pub struct SpreadingReport {
    pub kind: SpreadingKind,
    pub params: ModelParams,
    /// `leftward` or `rightward`.
    pub direction: &'static str,
    /// Propagation speed in `direction` (the negated slope for leftward spread).
    pub speed: f64,
    pub slope: f64,
    pub r2: f64,
    pub window: [f64; 2],
    pub level: f64,
    pub tracked: Tracked,
    pub expected: Option<f64>,
    pub constants: ClaimConstants,
    pub grid: GridSpec,
    pub theta: f64,
    pub mollifier: &'static str,
    pub note: &'static str,
}

pub fn spreading_initial_state(kind: SpreadingKind, p: &ModelParams, g: &GridSpec) -> Result<(FieldState, f64, Tracked)> {
    let k = claim_constants(p)?;
    let eq = equilibria(p)?;
    let (a21, a22) = (eq.alpha2.u, eq.alpha2.v);
    let (r, e) = (p.r, p.epsilon);
    Ok(match kind {
        SpreadingKind::KppBeta => {
            let (m1, d) = (k.m1, k.delta);
            let st = FieldState::from_history(g, p.h, |s, x| {
                (blend(x, -1.0, 0.0, 1.0 - m1 * r * r * (-d * s).exp()), 1.0)
            });
            (st, 0.5, Tracked::U)
        }
        SpreadingKind::EpsKpp => {
            let m0 = k.m0.ok_or_else(|| {
                Error::Configuration(format!("eps_kpp needs 0 < eps < r - 1, got eps = {e}"))
            })?;
            let st = FieldState::from_history(g, p.h, |s, x| (0.0, blend(x, 0.0, m0 * (-0.5 * e * s).exp(), 1.0)));
            (st, 0.5, Tracked::V)
        }
        SpreadingKind::SubAlpha2 => {
            if e <= 0.0 {
                return Err(Error::Configuration("sub_alpha2 needs eps > 0".into()));
            }
            let (m, d) = (0.5 * k.m1, k.delta);
            let st = FieldState::from_history(g, p.h, |s, x| {
                let q = (-d * s).exp();
                (blend(x, -1.0, a21, 1.0 - m * r * r * q), blend(x, -1.0, a22, 1.0 - m * q))
            });
            (st, 0.5 * (a21 + 1.0), Tracked::U)
        }
        SpreadingKind::SuperAlpha2 => {
            let m0 = k.m0.ok_or_else(|| {
                Error::Configuration(format!("super_alpha2 needs 0 < eps < r - 1, got eps = {e}"))
            })?;
            let m = 0.5 * m0;
            let st = FieldState::from_history(g, p.h, |s, x| {
                let q = (-0.5 * e * s).exp();
                (blend(x, -1.0, e * m / (3.0 * p.b) * q, a21), blend(x, -1.0, m * q, a22))
            });
            (st, 0.5 * a21, Tracked::U)
        }
    })
}

/// Runs one of the monostable spreading experiments and measures the
/// speed of the invading state.
pub fn spreading_speed_experiment(
    kind: SpreadingKind,
    p: &ModelParams,
    grid: Option<(GridSpec, [f64; 2])>,
) -> Result<SpreadingReport> {
    if !p.is_bistable() {
        return Err(Error::Configuration(format!("spreading experiments need r > 1, got r = {}", p.r)));
    }
    let (g, window) = grid.unwrap_or_else(|| kind.default_grid(p));
    let (init, level, tracked) = spreading_initial_state(kind, p, &g)?;
    let res = run(p, &g, init, &RunOptions { level, tracked, snapshot_every: None })?;
    let est = estimate_speed(&res.track, window)?;
    let (direction, speed, expected, note) = match kind {
        SpreadingKind::KppBeta => ("leftward", -est.c, Some(2.0), "scalar KPP for u with v = 1"),
        SpreadingKind::EpsKpp => (
            "rightward",
            est.c,
            Some(2.0 * p.epsilon.sqrt()),
            "scalar equation v_t = v_xx - eps v (1 - v) with u = 0",
        ),
        SpreadingKind::SubAlpha2 => ("leftward", -est.c, None, "beta invading alpha2; expected sign > 0"),
        SpreadingKind::SuperAlpha2 => ("rightward", est.c, None, "O against alpha2; expected sign >= 0"),
    };
    Ok(SpreadingReport {
        kind,
        params: *p,
        direction,
        speed,
        slope: est.c,
        r2: est.r2,
        window,
        level,
        tracked,
        expected,
        constants: claim_constants(p)?,
        grid: g,
        theta: res.theta,
        mollifier: "cubic smoothstep over one length unit",
        note: "fit window is late in the run; the logarithmic delay of pulled fronts is not corrected",
    })
    .map(|mut r| {
        if r.expected.is_none() {
            r.note = note;
        }
        r
    })
}

/// Leftward speed of the bistable front started from a smoothed step
/// between `O` and `beta`.
pub fn bistable_front_speed(p: &ModelParams, g: &GridSpec, window: [f64; 2]) -> Result<SpeedEstimate> {
    let init = FieldState::from_profile(g, p.h, |x| {
        let s = blend(x, -0.5, 0.0, 1.0);
        (s, s)
    });
    let res = run(p, g, init, &RunOptions::default())?;
    let mut est = estimate_speed(&res.track, window)?;
    est.c = -est.c;
    Ok(est)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn small() -> GridSpec {
        GridSpec::with_dx(-20.0, 20.0, 0.1, 0.02, 4.0)
    }

    #[test]
    fn equilibria_are_fixed_points() {
        let p = ModelParams::new(2.0, 2.0, 0.5, 0.25).unwrap();
        let g = small();
        for q in equilibria(&p).unwrap().as_array() {
            let mut s = FieldState::constant(&g, p.h, q.u, q.v);
            let mut st = Stepper::new(&p, &g).unwrap();
            for _ in 0..50 {
                st.step(&mut s).unwrap();
            }
            for i in 0..g.n {
                assert!((s.u[i] - q.u).abs() < 1e-13 && (s.v[i] - q.v).abs() < 1e-13);
            }
        }
    }

    #[test]
    fn front_position_examples() {
        let g = GridSpec::with_dx(-10.0, 10.0, 0.05, 0.01, 1.0);
        let step: Vec<f64> = g
            .xs()
            .iter()
            .map(|&x| if x < -1e-12 { 0.0 } else if x > 1e-12 { 1.0 } else { 0.5 })
            .collect();
        assert_abs_diff_eq!(front_position(&step, &g, 0.5).unwrap(), 0.0, epsilon = 1e-12);
        let shifted: Vec<f64> = (0..g.n).map(|i| if i >= 60 { step[i - 60] } else { 0.0 }).collect();
        assert_abs_diff_eq!(front_position(&shifted, &g, 0.5).unwrap(), 3.0, epsilon = 1e-9);
        let logistic: Vec<f64> = g.xs().iter().map(|&x| 1.0 / (1.0 + (-x).exp())).collect();
        assert!(front_position(&logistic, &g, 0.5).unwrap().abs() < 1e-3);
        assert!(matches!(front_position(&logistic, &g, 1.5), Err(Error::NotBracketed { .. })));
        let bump: Vec<f64> = g.xs().iter().map(|&x| (-x * x).exp()).collect();
        match front_position(&bump, &g, 0.5) {
            Err(Error::Ambiguous { crossings, .. }) => assert_eq!(crossings.len(), 2),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn synthetic_track_speed() {
        let mut tr = FrontTrack::new(0.5);
        for k in 0..50 {
            let t = k as f64 * 0.1;
            tr.push(t, 1.3 * t);
        }
        let e = estimate_speed(&tr, [0.0, 5.0]).unwrap();
        assert_abs_diff_eq!(e.c, 1.3, epsilon = 1e-12);
        assert_abs_diff_eq!(e.r2, 1.0, epsilon = 1e-12);
        assert!(matches!(estimate_speed(&tr, [0.0, 0.5]), Err(Error::InsufficientData(_))));
    }

    #[test]
    fn theta_is_crank_nicolson_when_monotone() {
        let p = ModelParams::new(2.0, 2.0, 0.0, 0.0).unwrap();
        let st = Stepper::new(&p, &GridSpec::with_dx(-1.0, 1.0, 0.1, 0.005, 1.0)).unwrap();
        assert_eq!(st.theta, 0.5);
        let st = Stepper::new(&p, &GridSpec::with_dx(-1.0, 1.0, 0.1, 0.02, 1.0)).unwrap();
        assert_abs_diff_eq!(st.theta, 0.75, epsilon = 1e-12);
    }

    #[test]
    fn history_ring_has_required_depth() {
        let g = GridSpec::with_dx(-1.0, 1.0, 0.1, 0.02, 1.0);
        let s = FieldState::constant(&g, 0.5, 0.0, 0.0);
        assert!(s.history_depth() > (0.5f64 / 0.02).ceil() as usize);
    }

    #[test]
    fn claim_constants_are_admissible() {
        let p = ModelParams::new(2.0, 2.0, 0.5, 0.25).unwrap();
        let k = claim_constants(&p).unwrap();
        assert!(k.m0.unwrap() > 0.0 && k.m1 > 0.0 && k.delta > 0.0);
        assert!(k.delta < (p.b - p.epsilon));
    }
}
