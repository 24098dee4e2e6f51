//! The spatially homogeneous delay system
//!
//! ```text
//! phi' = phi (1 - r - phi + r psi(t - h))
//! psi' = (b phi - eps psi)(1 - psi)
//! ```
//!
//! integrated by classical RK4 with cubic interpolation of the stored
//! history, plus phase-plane data and the small-box stability experiment.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::model::{equilibria, EquilibriaSet, ModelParams, Point};
use crate::numerics::cubic_sample;

/// Initial data on `[-h, 0]`, uniformly sampled.
#[derive(Clone, Debug, PartialEq)]
pub struct HistorySegment {
    pub h: f64,
    pub phi: Vec<f64>,
    pub psi: Vec<f64>,
}

impl HistorySegment {
    const SAMPLES: usize = 65;

    pub fn constant(h: f64, phi: f64, psi: f64) -> Self {
        let n = if h > 0.0 { Self::SAMPLES } else { 1 };
        Self {
            h,
            phi: vec![phi; n],
            psi: vec![psi; n],
        }
    }

    pub fn from_fn(h: f64, f: impl Fn(f64) -> (f64, f64)) -> Self {
        let n = if h > 0.0 { Self::SAMPLES } else { 1 };
        let (phi, psi) = (0..n)
            .map(|j| f(if n == 1 { 0.0 } else { -h + h * j as f64 / (n - 1) as f64 }))
            .unzip();
        Self { h, phi, psi }
    }

    pub fn validate(&self) -> Result<()> {
        if self.phi.is_empty() || self.phi.len() != self.psi.len() {
            return Err(Error::Configuration("history needs matching, non-empty samples".into()));
        }
        if self.h > 0.0 && self.phi.len() < 4 {
            return Err(Error::Configuration("a delayed history needs at least 4 samples".into()));
        }
        if !self.phi.iter().chain(&self.psi).all(|x| x.is_finite()) {
            return Err(Error::Domain("non-finite history sample".into()));
        }
        Ok(())
    }

    /// Value at `s` in `[-h, 0]` (clamped).
    pub fn at(&self, s: f64) -> (f64, f64) {
        let n = self.phi.len();
        if n == 1 {
            return (self.phi[0], self.psi[0]);
        }
        let pos = ((s + self.h) / self.h * (n - 1) as f64).clamp(0.0, (n - 1) as f64);
        (cubic_sample(&self.phi, pos), cubic_sample(&self.psi, pos))
    }

    fn in_unit_box(&self) -> bool {
        self.phi.iter().chain(&self.psi).all(|x| (0.0..=1.0).contains(x))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "event", rename_all = "snake_case")]
pub enum TrajectoryEvent {
    /// First sample outside `[0, 1]^2` (beyond `1e-9`) for data starting inside.
    BoxExit { t: f64, phi: f64, psi: f64 },
    /// State stayed in a `1e-6` ball for five consecutive windows.
    Converged { t: f64, state: Point, equilibrium: Option<&'static str> },
    /// `|value| > 10`; the trajectory stops here.
    Divergence { t: f64 },
}

#[derive(Clone, Debug, Default, Serialize)]
pub struct Trajectory {
    pub t: Vec<f64>,
    pub phi: Vec<f64>,
    pub psi: Vec<f64>,
    pub events: Vec<TrajectoryEvent>,
}

impl Trajectory {
    pub fn last(&self) -> Point {
        Point::new(*self.phi.last().unwrap(), *self.psi.last().unwrap())
    }

    pub fn converged_to(&self) -> Option<&'static str> {
        self.events.iter().find_map(|e| match e {
            TrajectoryEvent::Converged { equilibrium, .. } => *equilibrium,
            _ => None,
        })
    }

    pub fn diverged(&self) -> bool {
        self.events.iter().any(|e| matches!(e, TrajectoryEvent::Divergence { .. }))
    }

    pub fn to_csv(&self) -> String {
        let mut s = String::from("t,phi,psi\n");
        for i in 0..self.t.len() {
            s.push_str(&format!("{},{},{}\n", self.t[i], self.phi[i], self.psi[i]));
        }
        s
    }
}

const BOX_TOL: f64 = 1e-9;
const CONVERGENCE_BALL: f64 = 1e-6;
const CONVERGENCE_WINDOWS: usize = 5;
const BLOW_UP: f64 = 10.0;

pub fn integrate_dde(p: &ModelParams, init: &HistorySegment, t_end: f64, dt: f64) -> Result<Trajectory> {
    p.validate()?;
    init.validate()?;
    if !(dt > 0.0 && t_end > 0.0) {
        return Err(Error::Configuration(format!("need dt > 0 and t_end > 0, got {dt}, {t_end}")));
    }
    let h = p.h;
    if h > 0.0 && dt > h / 4.0 * (1.0 + 1e-12) {
        return Err(Error::Configuration(format!(
            "dt = {dt} exceeds h/4 = {}; history would be under-resolved",
            h / 4.0
        )));
    }
    if (init.h - h).abs() > 1e-12 {
        return Err(Error::Configuration(format!("history covers [-{}, 0], delay is {h}", init.h)));
    }

    // Index k of `ys` holds time (k - back) * dt.
    let back = if h > 0.0 { (h / dt).ceil() as usize + 3 } else { 0 };
    let steps = (t_end / dt).round() as usize;
    let mut phis = Vec::with_capacity(back + steps + 1);
    let mut psis = Vec::with_capacity(back + steps + 1);
    for k in 0..=back {
        let s = (k as f64 - back as f64) * dt;
        let (a, b) = init.at(s.max(-h));
        phis.push(a);
        psis.push(b);
    }

    let mut traj = Trajectory::default();
    traj.t.push(0.0);
    traj.phi.push(phis[back]);
    traj.psi.push(psis[back]);
    let watch_box = init.in_unit_box();
    let eq = equilibria(p).ok();

    let window = (h.max(1.0) / dt).round().max(1.0) as usize;
    let mut calm_windows = 0usize;
    let mut converged = false;

    let per_delay = (h > 0.0 && ((h / dt).round() - h / dt).abs() < 1e-9).then(|| (h / dt).round() as usize);
    // The solution's derivative jumps at t = 0, so delayed values before
    // that node come from the history itself and stencils after it never
    // reach back across it; a straddling stencil costs an order.
    let delayed = |psis: &[f64], tau: f64, current: f64| -> f64 {
        if h == 0.0 {
            return current;
        }
        let pos = (tau - h) / dt + back as f64;
        if pos <= back as f64 {
            return init.at(tau - h).1;
        }
        // Later breakpoints sit at multiples of h; honour them when they
        // fall on nodes.
        let (lo, hi) = match per_delay {
            Some(m) => {
                let lo = back + ((pos - back as f64) / m as f64).floor() as usize * m;
                (lo, (lo + m).min(psis.len() - 1))
            }
            None => (back, psis.len() - 1),
        };
        cubic_sample(&psis[lo..=hi], pos - lo as f64)
    };

    for n in 0..steps {
        let t = n as f64 * dt;
        let k0 = back + n;
        let (y1, z1) = (phis[k0], psis[k0]);
        let f = |y: f64, z: f64, zd: f64| p.reaction(y, zd, z);
        let (a1, b1) = f(y1, z1, delayed(&psis, t, z1));
        let (y2, z2) = (y1 + 0.5 * dt * a1, z1 + 0.5 * dt * b1);
        let (a2, b2) = f(y2, z2, delayed(&psis, t + 0.5 * dt, z2));
        let (y3, z3) = (y1 + 0.5 * dt * a2, z1 + 0.5 * dt * b2);
        let (a3, b3) = f(y3, z3, delayed(&psis, t + 0.5 * dt, z3));
        let (y4, z4) = (y1 + dt * a3, z1 + dt * b3);
        let (a4, b4) = f(y4, z4, delayed(&psis, t + dt, z4));
        let y = y1 + dt / 6.0 * (a1 + 2.0 * a2 + 2.0 * a3 + a4);
        let z = z1 + dt / 6.0 * (b1 + 2.0 * b2 + 2.0 * b3 + b4);
        let tn = (n + 1) as f64 * dt;

        if !(y.is_finite() && z.is_finite()) || y.abs() > BLOW_UP || z.abs() > BLOW_UP {
            traj.events.push(TrajectoryEvent::Divergence { t: tn });
            return Ok(traj);
        }
        phis.push(y);
        psis.push(z);
        traj.t.push(tn);
        traj.phi.push(y);
        traj.psi.push(z);

        if watch_box
            && !traj.events.iter().any(|e| matches!(e, TrajectoryEvent::BoxExit { .. }))
            && (!(-BOX_TOL..=1.0 + BOX_TOL).contains(&y) || !(-BOX_TOL..=1.0 + BOX_TOL).contains(&z))
        {
            traj.events.push(TrajectoryEvent::BoxExit { t: tn, phi: y, psi: z });
        }

        if !converged && (n + 1) % window == 0 {
            let lo = traj.t.len() - window - 1;
            let end = Point::new(y, z);
            let spread = (lo..traj.t.len())
                .map(|i| Point::new(traj.phi[i], traj.psi[i]).dist(&end))
                .fold(0.0, f64::max);
            calm_windows = if spread < CONVERGENCE_BALL { calm_windows + 1 } else { 0 };
            if calm_windows >= CONVERGENCE_WINDOWS {
                converged = true;
                let label = eq.as_ref().and_then(|e| {
                    EquilibriaSet::NAMES
                        .iter()
                        .zip(e.as_array())
                        .find(|(_, q)| q.dist(&end) < CONVERGENCE_BALL)
                        .map(|(n, _)| *n)
                });
                traj.events.push(TrajectoryEvent::Converged { t: tn, state: end, equilibrium: label });
            }
        }
    }
    Ok(traj)
}

/// Outcome of the small-box experiment started from the constant history
/// `(delta, delta)`.
#[derive(Clone, Debug, Serialize)]
pub struct BoxReport {
    pub delta: f64,
    pub m: f64,
    pub psi_max: f64,
    /// `psi <= M delta` at every sample.
    pub bound_ok: bool,
    /// `phi(t) <= delta exp((1 - r + r delta) t)` at every sample.
    pub phi_decay_ok: bool,
    pub max_phi_ratio: f64,
    pub first_violation: Option<f64>,
    /// Same envelope with rate `1 - r + r M delta`, which is what the
    /// invariance of `[0, M delta]` for the delayed argument supports.
    pub corrected_decay_ok: bool,
    pub max_phi_ratio_corrected: f64,
    pub phi_nonincreasing: bool,
    pub psi_nondecreasing: bool,
    pub dt: f64,
    pub t_end: f64,
}

impl BoxReport {
    pub fn passed(&self) -> bool {
        self.bound_ok && self.phi_decay_ok
    }
}

pub fn stability_box_experiment(p: &ModelParams, delta: f64, t_end: f64) -> Result<BoxReport> {
    p.validate()?;
    if p.r <= 1.0 {
        return Err(Error::Parameter(format!("stability box needs r > 1, got {}", p.r)));
    }
    let zeta0 = 1.0 - 1.0 / p.r;
    if !(0.0..zeta0).contains(&delta) {
        return Err(Error::Parameter(format!("need 0 <= delta < 1 - 1/r = {zeta0}, got {delta}")));
    }
    let m = 2.0 * (1.0 + p.b / (p.r - 1.0));
    if delta > 0.0 {
        let lhs = 1.0 - (1.0 - delta) * (-p.b * delta / (p.r - 1.0 - p.r * delta)).exp();
        if lhs >= m * delta {
            return Err(Error::Parameter(format!(
                "1 - (1 - delta) exp(-b delta / (r - 1 - r delta)) = {lhs} is not below M delta = {}",
                m * delta
            )));
        }
    }
    let dt = if p.h > 0.0 { (p.h / 8.0).min(0.01) } else { 0.01 };
    let traj = integrate_dde(p, &HistorySegment::constant(p.h, delta, delta), t_end, dt)?;

    let rate = 1.0 - p.r + p.r * delta;
    let rate_corrected = 1.0 - p.r + p.r * m * delta;
    let ratio = |phi: f64, t: f64, k: f64| if delta == 0.0 { 0.0 } else { phi / (delta * (k * t).exp()) };
    let mut max_ratio = 0.0f64;
    let mut max_ratio_c = 0.0f64;
    let mut first_violation = None;
    for (i, &t) in traj.t.iter().enumerate() {
        let q = ratio(traj.phi[i], t, rate);
        if q > 1.0 + 1e-9 && first_violation.is_none() {
            first_violation = Some(t);
        }
        max_ratio = max_ratio.max(q);
        max_ratio_c = max_ratio_c.max(ratio(traj.phi[i], t, rate_corrected));
    }
    let psi_max = traj.psi.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    Ok(BoxReport {
        delta,
        m,
        psi_max,
        bound_ok: psi_max <= m * delta,
        phi_decay_ok: first_violation.is_none(),
        max_phi_ratio: max_ratio,
        first_violation,
        corrected_decay_ok: max_ratio_c <= 1.0 + 1e-9,
        max_phi_ratio_corrected: max_ratio_c,
        phi_nonincreasing: traj.phi.windows(2).all(|w| w[1] <= w[0] + 1e-15),
        psi_nondecreasing: traj.psi.windows(2).all(|w| w[1] >= w[0] - 1e-15),
        dt,
        t_end,
    })
}

/// Rectangular sampling of the phase plane.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct PhaseGrid {
    pub u_min: f64,
    pub u_max: f64,
    pub v_min: f64,
    pub v_max: f64,
    pub nu: usize,
    pub nv: usize,
}

impl Default for PhaseGrid {
    fn default() -> Self {
        Self {
            u_min: -0.2,
            u_max: 1.2,
            v_min: -0.2,
            v_max: 1.2,
            nu: 600,
            nv: 600,
        }
    }
}

impl PhaseGrid {
    fn u(&self, i: usize) -> f64 {
        self.u_min + (self.u_max - self.u_min) * i as f64 / (self.nu - 1) as f64
    }
    fn v(&self, j: usize) -> f64 {
        self.v_min + (self.v_max - self.v_min) * j as f64 / (self.nv - 1) as f64
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum NullclineBranch {
    /// `u = 0` (first equation).
    UZero,
    /// `1 - r - u + r v = 0`.
    UKinetic,
    /// `v = 1` (second equation).
    VOne,
    /// `b u - eps v = 0`.
    VKinetic,
}

impl NullclineBranch {
    pub const ALL: [NullclineBranch; 4] = [Self::UZero, Self::UKinetic, Self::VOne, Self::VKinetic];

    pub fn name(self) -> &'static str {
        match self {
            Self::UZero => "u_zero",
            Self::UKinetic => "u_kinetic",
            Self::VOne => "v_one",
            Self::VKinetic => "v_kinetic",
        }
    }

    fn level(self, p: &ModelParams, u: f64, v: f64) -> f64 {
        match self {
            Self::UZero => u,
            Self::UKinetic => 1.0 - p.r - u + p.r * v,
            Self::VOne => 1.0 - v,
            Self::VKinetic => p.b * u - p.epsilon * v,
        }
    }
}

#[derive(Clone, Copy, Debug, Serialize)]
pub struct NullclinePoint {
    pub x: f64,
    pub y: f64,
    pub branch: NullclineBranch,
}

/// Zero sets of each kinetic factor, located by linear interpolation along
/// grid edges. Points of one branch are sorted along `(x, y)`.
pub fn nullclines(p: &ModelParams, grid: &PhaseGrid) -> Vec<NullclinePoint> {
    let mut out = Vec::new();
    for branch in NullclineBranch::ALL {
        let mut pts: Vec<(f64, f64)> = Vec::new();
        let f = |u: f64, v: f64| branch.level(p, u, v);
        for j in 0..grid.nv {
            let v = grid.v(j);
            for i in 0..grid.nu {
                let u = grid.u(i);
                let a = f(u, v);
                if a == 0.0 {
                    pts.push((u, v));
                    continue;
                }
                if i + 1 < grid.nu {
                    let u1 = grid.u(i + 1);
                    let b = f(u1, v);
                    if a * b < 0.0 {
                        pts.push((u + (u1 - u) * a / (a - b), v));
                    }
                }
                if j + 1 < grid.nv {
                    let v1 = grid.v(j + 1);
                    let b = f(u, v1);
                    if a * b < 0.0 {
                        pts.push((u, v + (v1 - v) * a / (a - b)));
                    }
                }
            }
        }
        pts.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.total_cmp(&b.1)));
        pts.dedup_by(|a, b| (a.0 - b.0).abs() < 1e-12 && (a.1 - b.1).abs() < 1e-12);
        out.extend(pts.into_iter().map(|(x, y)| NullclinePoint { x, y, branch }));
    }
    out
}

pub fn nullclines_csv(points: &[NullclinePoint]) -> String {
    let mut s = String::from("x,y,branch\n");
    for q in points {
        s.push_str(&format!("{},{},{}\n", q.x, q.y, q.branch.name()));
    }
    s
}

/// Undelayed vector field `(u, v, du, dv)` on a grid, for quiver plots.
pub fn vector_field(p: &ModelParams, grid: &PhaseGrid) -> Vec<[f64; 4]> {
    let mut out = Vec::with_capacity(grid.nu * grid.nv);
    for j in 0..grid.nv {
        for i in 0..grid.nu {
            let (u, v) = (grid.u(i), grid.v(j));
            let (du, dv) = p.reaction(u, v, v);
            out.push([u, v, du, dv]);
        }
    }
    out
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Stability {
    Stable,
    StableNonhyperbolic,
    Saddle,
    Unstable,
    UnstableNonhyperbolic,
}

impl Stability {
    pub fn is_unstable(self) -> bool {
        matches!(self, Self::Saddle | Self::Unstable | Self::UnstableNonhyperbolic)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Order {
    Equal,
    Below,
    Above,
    Unordered,
}

pub fn compare(a: &Point, b: &Point) -> Order {
    if a == b {
        Order::Equal
    } else if a.u <= b.u && a.v <= b.v {
        Order::Below
    } else if a.u >= b.u && a.v >= b.v {
        Order::Above
    } else {
        Order::Unordered
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct EquilibriumInfo {
    pub name: &'static str,
    pub point: Point,
    /// Real parts of the eigenvalues of the undelayed Jacobian.
    pub eigen_re: [f64; 2],
    pub eigen_im: f64,
    pub stability: Stability,
}

#[derive(Clone, Debug, Serialize)]
pub struct Classification {
    pub bistable: bool,
    pub equilibria: Vec<EquilibriumInfo>,
    /// `(i, j, order of i relative to j)` for all pairs `i < j`.
    pub orders: Vec<(&'static str, &'static str, Order)>,
    pub alpha1_alpha2_unordered: bool,
}

fn jacobian(p: &ModelParams, q: Point) -> [[f64; 2]; 2] {
    let (u, v) = (q.u, q.v);
    [
        [1.0 - p.r - 2.0 * u + p.r * v, p.r * u],
        [p.b * (1.0 - v), -p.epsilon * (1.0 - v) - (p.b * u - p.epsilon * v)],
    ]
}

fn eigen_2x2(j: [[f64; 2]; 2]) -> ([f64; 2], f64) {
    let tr = j[0][0] + j[1][1];
    let det = j[0][0] * j[1][1] - j[0][1] * j[1][0];
    let disc = 0.25 * tr * tr - det;
    if disc >= 0.0 {
        let s = disc.sqrt();
        ([0.5 * tr - s, 0.5 * tr + s], 0.0)
    } else {
        ([0.5 * tr, 0.5 * tr], (-disc).sqrt())
    }
}

fn label(re: [f64; 2]) -> Stability {
    const TOL: f64 = 1e-12;
    let pos = re.iter().filter(|&&x| x > TOL).count();
    let neg = re.iter().filter(|&&x| x < -TOL).count();
    match (pos, neg) {
        (0, 2) => Stability::Stable,
        (0, _) => Stability::StableNonhyperbolic,
        (1, 1) => Stability::Saddle,
        (2, _) => Stability::Unstable,
        _ => Stability::UnstableNonhyperbolic,
    }
}

/// Linear type of each rest point (undelayed Jacobian) and their mutual order.
pub fn classify_equilibria(p: &ModelParams) -> Result<Classification> {
    let eq = equilibria(p)?;
    let pts = eq.as_array();
    let equilibria = EquilibriaSet::NAMES
        .iter()
        .zip(pts)
        .map(|(name, q)| {
            let (re, im) = eigen_2x2(jacobian(p, q));
            EquilibriumInfo {
                name,
                point: q,
                eigen_re: re,
                eigen_im: im,
                stability: label(re),
            }
        })
        .collect();
    let mut orders = Vec::new();
    for i in 0..4 {
        for j in i + 1..4 {
            orders.push((EquilibriaSet::NAMES[i], EquilibriaSet::NAMES[j], compare(&pts[i], &pts[j])));
        }
    }
    Ok(Classification {
        bistable: p.is_bistable(),
        equilibria,
        orders,
        alpha1_alpha2_unordered: compare(&eq.alpha1, &eq.alpha2) == Order::Unordered,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn p(r: f64, b: f64, h: f64, e: f64) -> ModelParams {
        ModelParams::new(r, b, h, e).unwrap()
    }

    #[test]
    fn equilibrium_history_stays_put() {
        let q = p(2.0, 2.0, 1.0, 0.1);
        let tr = integrate_dde(&q, &HistorySegment::constant(1.0, 1.0, 1.0), 10.0, 0.05).unwrap();
        assert!(tr.phi.iter().chain(&tr.psi).all(|&x| x == 1.0));
        let tr = integrate_dde(&p(2.0, 2.0, 1.0, 0.0), &HistorySegment::constant(1.0, 0.0, 0.3), 10.0, 0.05).unwrap();
        assert!(tr.phi.iter().all(|&x| x == 0.0));
        assert!(tr.psi.iter().all(|&x| x == 0.3));
    }

    #[test]
    fn undelayed_flow_reaches_beta() {
        let q = p(2.0, 2.0, 0.0, 0.0);
        let tr = integrate_dde(&q, &HistorySegment::constant(0.0, 0.9, 0.9), 40.0, 0.01).unwrap();
        assert!(tr.last().dist(&Point::new(1.0, 1.0)) < 1e-4);
        assert_eq!(tr.converged_to(), Some("beta"));
    }

    #[test]
    fn step_too_large_for_delay_is_rejected() {
        let q = p(2.0, 2.0, 1.0, 0.0);
        let err = integrate_dde(&q, &HistorySegment::constant(1.0, 0.5, 0.5), 1.0, 0.3).unwrap_err();
        assert!(err.is_configuration());
    }

    #[test]
    fn blow_up_is_reported_and_truncates() {
        let q = p(2.0, 2.0, 0.0, 0.0);
        let tr = integrate_dde(&q, &HistorySegment::constant(0.0, -1.5, 1.0), 50.0, 0.01).unwrap();
        assert!(tr.diverged());
        assert!(*tr.t.last().unwrap() < 50.0);
    }

    #[test]
    fn box_experiment_bounds_psi() {
        let rep = stability_box_experiment(&p(2.0, 2.0, 0.5, 0.0), 0.01, 40.0).unwrap();
        assert_abs_diff_eq!(rep.m, 6.0);
        assert!(rep.psi_max <= 0.06);
        assert!(rep.bound_ok);
        assert!(rep.corrected_decay_ok);
        assert!(rep.phi_nonincreasing && rep.psi_nondecreasing);

        let rep = stability_box_experiment(&p(5.0, 2.5, 1.0, 0.0), 0.01, 40.0).unwrap();
        assert_abs_diff_eq!(rep.m, 3.25);
        assert!(rep.psi_max <= 0.0325);

        let rep = stability_box_experiment(&p(2.0, 2.0, 0.5, 0.0), 0.0, 10.0).unwrap();
        assert!(rep.passed() && rep.psi_max == 0.0);
    }

    #[test]
    fn box_experiment_checks_delta() {
        assert!(stability_box_experiment(&p(2.0, 2.0, 0.5, 0.0), 0.6, 10.0).is_err());
        assert!(stability_box_experiment(&p(0.5, 2.0, 0.5, 0.0), 0.01, 10.0).is_err());
    }

    #[test]
    fn nullcline_lines() {
        let g = PhaseGrid { nu: 141, nv: 141, ..Default::default() };
        let pts = nullclines(&p(2.0, 2.0, 0.0, 1.0), &g);
        for q in &pts {
            match q.branch {
                NullclineBranch::VKinetic => assert_abs_diff_eq!(q.y, 2.0 * q.x, epsilon = 1e-12),
                NullclineBranch::UKinetic => assert_abs_diff_eq!(q.x, 2.0 * q.y - 1.0, epsilon = 1e-12),
                NullclineBranch::UZero => assert_abs_diff_eq!(q.x, 0.0, epsilon = 1e-12),
                NullclineBranch::VOne => assert_abs_diff_eq!(q.y, 1.0, epsilon = 1e-12),
            }
        }
        for b in NullclineBranch::ALL {
            assert!(pts.iter().filter(|q| q.branch == b).count() > 50, "{b:?}");
        }
        // eps = 0: the second factor vanishes on u = 0.
        let pts = nullclines(&p(2.0, 2.0, 0.0, 0.0), &g);
        assert!(pts
            .iter()
            .filter(|q| q.branch == NullclineBranch::VKinetic)
            .all(|q| q.x.abs() < 1e-12));
    }

    #[test]
    fn classification_examples() {
        let c = classify_equilibria(&p(2.0, 2.0, 0.0, 1.0)).unwrap();
        assert!(c.alpha1_alpha2_unordered);
        assert_eq!(c.equilibria[0].stability, Stability::Stable);
        assert_eq!(c.equilibria[3].stability, Stability::Stable);
        assert_eq!(c.equilibria[2].stability, Stability::Saddle);
        assert!(c.equilibria[1].stability.is_unstable());

        let c = classify_equilibria(&p(2.0, 2.0, 0.0, 0.0)).unwrap();
        assert_eq!(c.equilibria[0].stability, Stability::StableNonhyperbolic);
        let mut re = c.equilibria[0].eigen_re;
        re.sort_by(f64::total_cmp);
        assert_eq!(re, [-1.0, 0.0]);

        let c = classify_equilibria(&p(0.5, 2.0, 0.0, 0.0)).unwrap();
        assert!(!c.bistable);
        assert!(c.equilibria[0].stability.is_unstable());
    }
}
