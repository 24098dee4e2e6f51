//! Explicit comparison functions attached to the intermediate equilibrium
//! `alpha2`: a sub-solution moving right with a small speed `c` and lifting
//! `alpha2` toward `beta`, and a stationary super-solution pushing `alpha2`
//! down to the origin on the left half-line.
//!
//! Sub-solution: `U` is logistic with rate `lambda` anchored at
//! `U(0) = alpha21`, `V` solves `1 - r - U + r V = theta gamma(x)` with the
//! `C^3` switch `gamma = (1 - 3U)^4 (1 - U)` beyond `U = 1/3`, and
//!
//! ```text
//! U(t, x) = U(x + ct) - mu r^2 eta(x + ct) e^{-delta t}
//! V(t, x) = V(x + ct) - mu     eta(x + ct) e^{-delta t}
//! ```
//!
//! Super-solution: `v' = lambda v (1 - v)^k` with `v(0) = alpha22`,
//! `b u - eps v = lambda gamma` with `gamma = -eps v (v - 1/k)^4` below the
//! point where `v = 1/k`, and
//!
//! ```text
//! U(t, x) = u(x) + mu (eps / 3b) eta(x) e^{-delta t}
//! V(t, x) = v(x) + mu            eta(x) e^{-delta t}
//! ```
//!
//! Residuals `D1 = U_xx + U (1 - r - U + r V(t - h)) - U_t` and
//! `D2 = V_xx + (bU - eps V)(1 - V) - V_t` use analytic derivatives and
//! are assembled from complements (`1 - U`, `v - alpha22`, `b u - eps v`)
//! so that the tiny margins far out in the tails keep their sign.

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::model::{equilibria, ModelParams, Point};
use crate::numerics::{quintic_sample, smoothstep5};

/// At most this many halvings of `(c, mu, delta)` after a failed check.
pub const MAX_HALVINGS: usize = 6;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Kind {
    Sub,
    Super,
}

impl Kind {
    pub fn name(self) -> &'static str {
        match self {
            Kind::Sub => "sub",
            Kind::Super => "super",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "sub" => Ok(Kind::Sub),
            "super" => Ok(Kind::Super),
            _ => Err(Error::Configuration(format!("unknown comparison kind '{s}' (expected sub or super)"))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct SubSolutionParams {
    pub lambda: f64,
    pub theta: f64,
    pub mu: f64,
    pub delta: f64,
    pub c: f64,
    pub x0: f64,
    pub rho1: f64,
    pub x_star: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct SuperSolutionParams {
    pub k: u32,
    pub lambda: f64,
    pub mu: f64,
    pub delta: f64,
    pub x0: f64,
    /// Where `v = 1/(k+1)`.
    pub x_star: f64,
    /// Where `v = 1/k`.
    pub x_upper: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum Proposal {
    Sub(SubSolutionParams),
    Super(SuperSolutionParams),
}

impl Proposal {
    pub fn kind(&self) -> Kind {
        match self {
            Proposal::Sub(_) => Kind::Sub,
            Proposal::Super(_) => Kind::Super,
        }
    }
}

fn alpha2(p: &ModelParams) -> Result<Point> {
    Ok(equilibria(p)?.alpha2)
}

/// Checks the standing assumptions of the construction and proposes
/// concrete parameters, each at half of its derived bound.
pub fn feasibility(p: &ModelParams, kind: Kind) -> Result<Proposal> {
    p.validate()?;
    let (r, b, e) = (p.r, p.b, p.epsilon);
    let mut bad = Vec::new();
    if r <= 1.0 {
        bad.push(format!("r = {r} must exceed 1"));
        return Err(Error::Infeasible(bad));
    }
    let a2 = alpha2(p)?;
    match kind {
        Kind::Sub => {
            if !(e > 0.0 && e < r * b / 7.0) {
                bad.push(format!("eps = {e} must lie in (0, rb/7) = (0, {})", r * b / 7.0));
            }
            if a2.u >= 1.0 / 6.0 {
                bad.push(format!("alpha21 = {} must be below 1/6", a2.u));
            }
            if e >= 0.5 * b {
                bad.push(format!("eps = {e} must be below b/2 = {} for the switch point x0 to exist", 0.5 * b));
            }
            if !bad.is_empty() {
                return Err(Error::Infeasible(bad));
            }
            Ok(Proposal::Sub(propose_sub(p, a2)?))
        }
        Kind::Super => {
            if !(e > 0.0 && e < r * b / 2.0 && e < 1.0) {
                bad.push(format!("eps = {e} must lie in (0, rb/2) = (0, {}) and in (0, 1)", r * b / 2.0));
            }
            if !bad.is_empty() {
                return Err(Error::Infeasible(bad));
            }
            Ok(Proposal::Super(propose_super(p, a2)?))
        }
    }
}

// ---------------------------------------------------------------------------
// Sub-solution

/// The time-independent sub-solution profile.
#[derive(Clone, Copy, Debug)]
struct SubProfile {
    lambda: f64,
    theta: f64,
    r: f64,
    ln_rho1: f64,
    x_star: f64,
}

#[derive(Clone, Copy, Debug, Default)]
struct SubSample {
    u: f64,
    /// `1 - U`.
    w: f64,
    /// `1 - V`.
    z: f64,
    du: [f64; 3],
    gamma: [f64; 4],
    dv: [f64; 2],
}

/// `g(U) = (1 - 3U)^4 (1 - U)` and its first three derivatives in `U`.
fn switch_poly(w: f64) -> [f64; 4] {
    // 1 - 3U = 3W - 2 keeps the value accurate as U -> 1.
    let a = 3.0 * w - 2.0;
    let m = 12.0 * w + a;
    [
        a.powi(4) * w,
        -a.powi(3) * m,
        9.0 * a * a * m + 15.0 * a.powi(3),
        -54.0 * a * m - 270.0 * a * a,
    ]
}

impl SubProfile {
    fn at(&self, x: f64) -> SubSample {
        let lam = self.lambda;
        let q = (self.ln_rho1 - lam * x).exp();
        let u = 1.0 / (1.0 + q);
        let w = q / (1.0 + q);
        let uw = u * w;
        let du = [lam * uw, lam * lam * uw * (w - u), lam.powi(3) * uw * (1.0 - 6.0 * u * w)];
        let gamma = if x > self.x_star {
            let g = switch_poly(w);
            [
                g[0],
                g[1] * du[0],
                g[2] * du[0] * du[0] + g[1] * du[1],
                g[3] * du[0].powi(3) + 3.0 * g[2] * du[0] * du[1] + g[1] * du[2],
            ]
        } else {
            [0.0; 4]
        };
        let th = self.theta;
        SubSample {
            u,
            w,
            z: (w - th * gamma[0]) / self.r,
            du,
            gamma,
            dv: [(du[0] + th * gamma[1]) / self.r, (du[1] + th * gamma[2]) / self.r],
        }
    }
}

/// Pointwise residuals with the terms that make them up.
#[derive(Clone, Copy, Debug, Default, Serialize)]
pub struct Residual {
    pub d1: f64,
    pub d2: f64,
    pub u_xx: f64,
    pub u_reaction: f64,
    pub u_t: f64,
    pub v_xx: f64,
    pub v_reaction: f64,
    pub v_t: f64,
}

impl Residual {
    fn new(terms: [f64; 6]) -> Self {
        let [u_xx, u_reaction, u_t, v_xx, v_reaction, v_t] = terms;
        Self {
            d1: u_xx + u_reaction - u_t,
            d2: v_xx + v_reaction - v_t,
            u_xx,
            u_reaction,
            u_t,
            v_xx,
            v_reaction,
            v_t,
        }
    }
}

#[derive(Clone, Debug)]
pub struct SubSolution {
    pub p: ModelParams,
    pub params: SubSolutionParams,
    pub alpha2: Point,
    profile: SubProfile,
}

impl SubSolution {
    fn eta(&self, xi: f64) -> (f64, f64, f64) {
        smoothstep5(xi - self.params.x0)
    }

    /// Profile `(U, V)` at `x`, with no time-dependent correction.
    pub fn profile(&self, x: f64) -> (f64, f64) {
        let s = self.profile.at(x);
        (s.u, 1.0 - s.z)
    }

    /// `(gamma, gamma', gamma'', gamma''')` at `x`.
    pub fn gamma(&self, x: f64) -> [f64; 4] {
        self.profile.at(x).gamma
    }

    pub fn value(&self, t: f64, x: f64) -> (f64, f64) {
        let sp = &self.params;
        let xi = x + sp.c * t;
        let s = self.profile.at(xi);
        let corr = sp.mu * self.eta(xi).0 * (-sp.delta * t).exp();
        let r2 = self.p.r * self.p.r;
        (s.u - r2 * corr, 1.0 - s.z - corr)
    }

    /// Residuals at `(t, x)`.
    pub fn residual(&self, t: f64, x: f64) -> Residual {
        let SubSolutionParams { mu, delta, c, .. } = self.params;
        let ModelParams { r, b, h, epsilon: e } = self.p;
        let r2 = r * r;
        let xi = x + c * t;
        let s = self.profile.at(xi);
        let (eta, deta, d2eta) = self.eta(xi);
        let ex = (-delta * t).exp();
        let m = mu * ex;

        let sd = self.profile.at(xi - c * h);
        let md = mu * self.eta(xi - c * h).0 * (-delta * (t - h)).exp();
        let w_t = s.w + r2 * m * eta;
        let z_t = s.z + m * eta;
        let z_d = sd.z + md;
        let u_t = 1.0 - w_t;

        let uxx = s.du[1] - r2 * m * d2eta;
        let ureact = u_t * (w_t - r * z_d);
        let ut = c * s.du[0] - r2 * m * (c * deta - delta * eta);
        let vxx = s.dv[1] - m * d2eta;
        let vreact = ((b - e) - b * w_t + e * z_t) * z_t;
        let vt = c * s.dv[0] - m * (c * deta - delta * eta);
        Residual::new([uxx, ureact, ut, vxx, vreact, vt])
    }

    /// `U'' + U (1 - r - U + r V)` and `V'' + (bU - eps V)(1 - V)` on the
    /// profile alone (`c = mu = 0`, no delay).
    pub fn profile_residual(&self, x: f64) -> (f64, f64) {
        let ModelParams { r, b, epsilon: e, .. } = self.p;
        let s = self.profile.at(x);
        (s.du[1] + s.u * (s.w - r * s.z), s.dv[1] + ((b - e) - b * s.w + e * s.z) * s.z)
    }

    /// Largest one-sided mismatch of `gamma` and its first three
    /// derivatives across `x_*`.
    pub fn splice_mismatch(&self) -> f64 {
        let right = {
            let mut pr = self.profile;
            pr.x_star = f64::NEG_INFINITY;
            pr.at(self.params.x_star).gamma
        };
        right.iter().map(|g| g.abs()).fold(0.0, f64::max)
    }
}

fn sub_profile(p: &ModelParams, lambda: f64, theta: f64) -> (SubProfile, f64, f64) {
    let (r, b, e) = (p.r, p.b, p.epsilon);
    let rho1 = r * (b - e) / (e * (r - 1.0));
    let x_star = (r * (b - e) / (2.0 * e * (r - 1.0))).ln() / lambda;
    (SubProfile { lambda, theta, r, ln_rho1: rho1.ln(), x_star }, rho1, x_star)
}

/// First point beyond which `bU - eps V >= (1 - V) b r^2 + b/2` and
/// `U > r/(2r - 1)`; both sides are monotone along the profile.
fn switch_root(p: &ModelParams, pr: &SubProfile) -> Result<f64> {
    let (r, b, e) = (p.r, p.b, p.epsilon);
    let f = |x: f64| {
        let s = pr.at(x);
        let lhs = (b - e) - b * s.w + e * s.z;
        (lhs - s.z * b * r * r - 0.5 * b).min(s.u - r / (2.0 * r - 1.0))
    };
    let (mut lo, mut hi) = (0.0, 1.0 / pr.lambda);
    while f(hi) <= 0.0 {
        lo = hi;
        hi *= 2.0;
        if hi > 1e4 / pr.lambda {
            return Err(Error::Numerical("switch point for the sub-solution not found".into()));
        }
    }
    if f(lo) > 0.0 {
        return Ok(lo);
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if f(mid) > 0.0 {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(hi)
}

fn propose_sub(p: &ModelParams, a2: Point) -> Result<SubSolutionParams> {
    let (r, b, h) = (p.r, p.b, p.h);
    let theta: f64 = 1.0 / 32.0;
    let lambda = theta.sqrt() / 8.0;
    let (pr, rho1, x_star) = sub_profile(p, lambda, theta);

    // Speed: the profile margins must absorb the drift and the delay shift.
    let mut c_bound = f64::INFINITY;
    for i in 0..=4000 {
        let u = a2.u + (1.0 - a2.u) * i as f64 / 4001.0;
        let sw = if u >= 1.0 / 3.0 { theta * (1.0 - 3.0 * u).powi(4) } else { 0.0 };
        c_bound = c_bound.min((lambda * lambda * (1.0 - 2.0 * u) + sw) / ((2.0 * h + 1.0) * lambda));
    }
    let x_far = 400.0 / lambda;
    for i in 0..=20000 {
        let x = x_far * i as f64 / 20000.0;
        let s = pr.at(x);
        let s4 = s.dv[1] + ((b - p.epsilon) - b * s.w + p.epsilon * s.z) * s.z;
        if s.dv[0] > 0.0 {
            c_bound = c_bound.min(s4 / s.dv[0]);
        }
    }
    let c = 0.5 * c_bound;

    let x0 = switch_root(p, &pr)? + 1.0 / lambda;
    let m3 = (2.0 - 1.0 / r) * pr.at(x0).u - 1.0;
    let delta = 0.5 * (m3 / (2.0 * (1.0 + 2.0 * h / r))).min(0.25 * b).min(1.0);

    let mut sub = SubSolution {
        p: *p,
        params: SubSolutionParams { lambda, theta, mu: 0.0, delta, c, x0, rho1, x_star },
        alpha2: a2,
        profile: pr,
    };
    // The switch `eta` has |eta''| <= 5.78; the plain profile must pay for it.
    let mut transition = f64::INFINITY;
    for i in 0..=200 {
        let res = sub.residual(0.0, x0 + i as f64 / 200.0);
        transition = transition.min(res.d1 / (r * r)).min(res.d2);
    }
    let mu = 0.5 * (m3 / (2.0 * r * r)).min(0.25 / (r * r)).min(transition / 6.0);
    sub.params.mu = mu;
    Ok(sub.params)
}

pub fn build_subsolution(p: &ModelParams, sp: &SubSolutionParams) -> Result<SubSolution> {
    let a2 = alpha2(p)?;
    let (profile, rho1, x_star) = sub_profile(p, sp.lambda, sp.theta);
    let sol = SubSolution { p: *p, params: SubSolutionParams { rho1, x_star, ..*sp }, alpha2: a2, profile };
    let (u0, v0) = sol.profile(0.0);
    if (u0 - a2.u).abs() > 1e-12 || (v0 - a2.v).abs() > 1e-12 {
        return Err(Error::Verification(format!(
            "sub-solution anchor ({u0}, {v0}) differs from alpha2 = ({}, {})",
            a2.u, a2.v
        )));
    }
    Ok(sol)
}

// ---------------------------------------------------------------------------
// Super-solution

/// Step in `y = lambda x` for the profile table.
pub const SUPER_DY: f64 = 1e-3;
const SUPER_Y_MIN: f64 = -402.0;
const SUPER_Y_MAX: f64 = 1.0;

/// `int dv / (v (1 - v)^k)`.
pub fn super_antiderivative(v: f64, k: u32) -> f64 {
    let w = 1.0 - v;
    let mut f = v.ln() - w.ln();
    for j in 1..k {
        f += 1.0 / (j as f64 * w.powi(j as i32));
    }
    f
}

/// `ln v` on a uniform grid in `y = lambda x`, by RK4 on
/// `d(ln v)/dy = (1 - v)^k` from the anchor at `y = 0`.
#[derive(Clone, Debug)]
struct SuperTable {
    y_min: f64,
    z: Vec<f64>,
    k: i32,
}

impl SuperTable {
    fn build(anchor: f64, k: u32) -> Self {
        let k = k as i32;
        let f = |z: f64| (1.0 - z.exp()).powi(k);
        let rk4 = |z: f64, h: f64| {
            let k1 = f(z);
            let k2 = f(z + 0.5 * h * k1);
            let k3 = f(z + 0.5 * h * k2);
            let k4 = f(z + h * k3);
            z + h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        };
        let n_neg = (-SUPER_Y_MIN / SUPER_DY).round() as usize;
        let n_pos = (SUPER_Y_MAX / SUPER_DY).round() as usize;
        let mut z = vec![0.0; n_neg + n_pos + 1];
        z[n_neg] = anchor.ln();
        for i in (0..n_neg).rev() {
            z[i] = rk4(z[i + 1], -SUPER_DY);
        }
        for i in n_neg..n_neg + n_pos {
            z[i + 1] = rk4(z[i], SUPER_DY);
        }
        Self { y_min: SUPER_Y_MIN, z, k }
    }

    fn ln_v(&self, y: f64) -> f64 {
        quintic_sample(&self.z, (y - self.y_min) / SUPER_DY)
    }

    fn y(&self, i: usize) -> f64 {
        self.y_min + i as f64 * SUPER_DY
    }
}

#[derive(Clone, Copy, Debug, Default)]
struct SuperSample {
    v: f64,
    /// `v - alpha22`.
    v_gap: f64,
    dv: [f64; 3],
    p5: [f64; 4],
    u: f64,
    du: [f64; 3],
}

#[derive(Clone, Debug)]
pub struct SuperSolution {
    pub p: ModelParams,
    pub params: SuperSolutionParams,
    pub alpha2: Point,
    table: SuperTable,
}

impl SuperSolution {
    fn sample(&self, x: f64, upper_branch: Option<bool>) -> SuperSample {
        let sp = &self.params;
        let (lam, k) = (sp.lambda, self.table.k);
        let kf = k as f64;
        let y = lam * x;
        let ln_v = self.table.ln_v(y);
        let v = ln_v.exp();
        let v_gap = self.alpha2.v * (ln_v - self.alpha2.v.ln()).exp_m1();
        let w = 1.0 - v;
        let f = v * w.powi(k);
        let f1 = w.powi(k - 1) * (1.0 - (kf + 1.0) * v);
        let f2 = -kf * w.powi(k - 2) * (2.0 - (kf + 1.0) * v);
        let dv = [lam * f, lam * lam * f * f1, lam.powi(3) * f * (f1 * f1 + f * f2)];
        let a = v - 1.0 / kf;
        let p5 = [v * a.powi(4), a.powi(3) * (a + 4.0 * v), a * a * (8.0 * a + 12.0 * v), a * (36.0 * a + 24.0 * v)];
        let lower = upper_branch.map_or(x <= sp.x_upper, |up| !up);
        let s = self.p.epsilon / self.p.b;
        let (u, du) = if lower {
            let d1 = p5[1] * dv[0];
            let d2 = p5[2] * dv[0] * dv[0] + p5[1] * dv[1];
            let d3 = p5[3] * dv[0].powi(3) + 3.0 * p5[2] * dv[0] * dv[1] + p5[1] * dv[2];
            (
                s * (v - lam * p5[0]),
                [s * (dv[0] - lam * d1), s * (dv[1] - lam * d2), s * (dv[2] - lam * d3)],
            )
        } else {
            (s * v, [s * dv[0], s * dv[1], s * dv[2]])
        };
        SuperSample { v, v_gap, dv, p5: if lower { p5 } else { [0.0; 4] }, u, du }
    }

    /// `eta = 1` below `x0 - 1`, `0` above `x0`.
    fn eta(&self, x: f64) -> (f64, f64, f64) {
        let (s, d1, d2) = smoothstep5(x - self.params.x0 + 1.0);
        (1.0 - s, -d1, -d2)
    }

    pub fn profile(&self, x: f64) -> (f64, f64) {
        let s = self.sample(x, None);
        (s.u, s.v)
    }

    pub fn value(&self, t: f64, x: f64) -> (f64, f64) {
        let s = self.sample(x, None);
        let m = self.params.mu * self.eta(x).0 * (-self.params.delta * t).exp();
        (s.u + self.p.epsilon / (3.0 * self.p.b) * m, s.v + m)
    }

    pub fn residual(&self, t: f64, x: f64) -> Residual {
        let SuperSolutionParams { mu, delta, lambda, .. } = self.params;
        let ModelParams { r, b, h, epsilon: e } = self.p;
        let s = self.sample(x, None);
        let (eta, _, d2eta) = self.eta(x);
        let q = e / (3.0 * b);
        let m = mu * eta * (-delta * t).exp();
        let md = mu * eta * (-delta * (t - h)).exp();
        let big_u = s.u + q * m;
        // 1 - r - U + r V(t - h), expanded around alpha22.
        let bracket = (r - e / b) * s.v_gap + (e / b) * lambda * s.p5[0] - q * m + r * md;
        let uxx = s.du[1] + q * mu * d2eta * (-delta * t).exp();
        let ureact = big_u * bracket;
        let ut = -delta * q * m;
        // bU - eps V = lambda gamma - (2/3) eps mu eta e^{-delta t}.
        let gamma = -e * s.p5[0];
        let vxx = s.dv[1] + mu * d2eta * (-delta * t).exp();
        let vreact = (lambda * gamma - 2.0 * e / 3.0 * m) * ((1.0 - s.v) - m);
        let vt = -delta * m;
        Residual::new([uxx, ureact, ut, vxx, vreact, vt])
    }

    /// Largest one-sided mismatch of `u` and its first three derivatives
    /// across the point where `v = 1/k`.
    pub fn splice_mismatch(&self) -> f64 {
        let x = self.params.x_upper;
        let lo = self.sample(x, Some(false));
        let hi = self.sample(x, Some(true));
        let mut worst = (lo.u - hi.u).abs();
        for j in 0..3 {
            worst = worst.max((lo.du[j] - hi.du[j]).abs());
        }
        worst
    }

    /// Largest `|F(v(y)) - F(alpha22) - y| / (1 + |y|)` over the table, `F`
    /// the closed antiderivative of the profile equation.
    pub fn implicit_defect(&self) -> f64 {
        let k = self.params.k;
        let f0 = super_antiderivative(self.alpha2.v, k);
        let mut worst = 0.0f64;
        for (i, &z) in self.table.z.iter().enumerate() {
            let v = z.exp();
            if v <= 0.0 || v >= 1.0 {
                continue;
            }
            let y = self.table.y(i);
            worst = worst.max((super_antiderivative(v, k) - f0 - y).abs() / (1.0 + y.abs()));
        }
        worst
    }

    /// Smallest `u'(x) / v'(x)` on `x <= 0`; positive means `u` increases.
    pub fn min_u_slope_ratio(&self) -> f64 {
        let n = self.table.z.len();
        let mut worst = f64::INFINITY;
        for i in 0..n {
            let y = self.table.y(i);
            if y > 0.0 {
                break;
            }
            let s = self.sample(y / self.params.lambda, None);
            if s.dv[0] > 0.0 {
                worst = worst.min(s.du[0] / s.dv[0]);
            }
        }
        worst
    }
}

fn smallest_k(p: &ModelParams, a22: f64) -> u32 {
    let mut k = 1u32;
    let lower = p.r / (p.r - 1.0);
    while !(k as f64 > lower && k as f64 * a22 > 1.0) {
        k += 2;
    }
    k
}

fn super_points(a22: f64, k: u32, lambda: f64) -> (f64, f64) {
    let f0 = super_antiderivative(a22, k);
    let kf = k as f64;
    let x_star = (super_antiderivative(1.0 / (kf + 1.0), k) - f0) / lambda;
    let x_upper = (super_antiderivative(1.0 / kf, k) - f0) / lambda;
    (x_star, x_upper)
}

fn propose_super(p: &ModelParams, a2: Point) -> Result<SuperSolutionParams> {
    let (r, e) = (p.r, p.epsilon);
    let k = smallest_k(p, a2.v);
    let kf = k as f64;
    let lambda = 0.5 * e / (kf + 1.0).powi(8);
    let (x_star, x_upper) = super_points(a2.v, k, lambda);
    let x0 = x_star - 20.0 / lambda;
    let delta = 0.5 * (2.0 / 3.0 * e * (1.0 - 1.0 / (kf + 1.0)) - e * lambda / kf.powi(5)).min(0.5 * (r - 1.0));
    let mut sol = SuperSolution {
        p: *p,
        params: SuperSolutionParams { k, lambda, mu: 0.0, delta, x0, x_star, x_upper },
        alpha2: a2,
        table: SuperTable::build(a2.v, k),
    };
    // Inside the switch the bare profile residuals must cover |eta''| <= 5.78
    // times the coefficients of mu.
    let q = e / (3.0 * p.b);
    let k1 = 6.0 * q + q * (r + 1.0 + delta) + r * (delta * p.h).exp();
    let k2 = 6.0 + e + delta;
    let mut transition = f64::INFINITY;
    for i in 0..=200 {
        let res = sol.residual(0.0, x0 - 1.0 + i as f64 / 200.0);
        transition = transition.min(-res.d1 / k1).min(-res.d2 / k2);
    }
    sol.params.mu = 0.5 * transition.min(0.1);
    Ok(sol.params)
}

pub fn build_supersolution(p: &ModelParams, sp: &SuperSolutionParams) -> Result<SuperSolution> {
    let a2 = alpha2(p)?;
    let (x_star, x_upper) = super_points(a2.v, sp.k, sp.lambda);
    let sol = SuperSolution {
        p: *p,
        params: SuperSolutionParams { x_star, x_upper, ..*sp },
        alpha2: a2,
        table: SuperTable::build(a2.v, sp.k),
    };
    let (u0, v0) = sol.profile(0.0);
    if (u0 - a2.u).abs() > 1e-12 || (v0 - a2.v).abs() > 1e-12 {
        return Err(Error::Verification(format!(
            "super-solution anchor ({u0}, {v0}) differs from alpha2 = ({}, {})",
            a2.u, a2.v
        )));
    }
    if sol.table.z.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::Verification("super-solution profile v is not increasing".into()));
    }
    Ok(sol)
}

// ---------------------------------------------------------------------------
// Both kinds

#[derive(Clone, Debug)]
pub enum ComparisonSolution {
    Sub(SubSolution),
    Super(SuperSolution),
}

impl ComparisonSolution {
    pub fn build(p: &ModelParams, proposal: &Proposal) -> Result<Self> {
        Ok(match proposal {
            Proposal::Sub(sp) => ComparisonSolution::Sub(build_subsolution(p, sp)?),
            Proposal::Super(sp) => ComparisonSolution::Super(build_supersolution(p, sp)?),
        })
    }

    pub fn kind(&self) -> Kind {
        match self {
            ComparisonSolution::Sub(_) => Kind::Sub,
            ComparisonSolution::Super(_) => Kind::Super,
        }
    }

    pub fn proposal(&self) -> Proposal {
        match self {
            ComparisonSolution::Sub(s) => Proposal::Sub(s.params),
            ComparisonSolution::Super(s) => Proposal::Super(s.params),
        }
    }

    pub fn value(&self, t: f64, x: f64) -> (f64, f64) {
        match self {
            ComparisonSolution::Sub(s) => s.value(t, x),
            ComparisonSolution::Super(s) => s.value(t, x),
        }
    }

    /// `max{(U, V), alpha2}` for the sub-solution, `min{(U, V), alpha2}` for
    /// the super-solution.
    pub fn clipped(&self, t: f64, x: f64) -> (f64, f64) {
        let (u, v) = self.value(t, x);
        match self {
            ComparisonSolution::Sub(s) => (u.max(s.alpha2.u), v.max(s.alpha2.v)),
            ComparisonSolution::Super(s) => {
                if x >= 0.0 {
                    (s.alpha2.u, s.alpha2.v)
                } else {
                    (u.min(s.alpha2.u), v.min(s.alpha2.v))
                }
            }
        }
    }

    pub fn residual(&self, t: f64, x: f64) -> Residual {
        match self {
            ComparisonSolution::Sub(s) => s.residual(t, x),
            ComparisonSolution::Super(s) => s.residual(t, x),
        }
    }

    pub fn splice_mismatch(&self) -> f64 {
        match self {
            ComparisonSolution::Sub(s) => s.splice_mismatch(),
            ComparisonSolution::Super(s) => s.splice_mismatch(),
        }
    }

    fn lambda(&self) -> f64 {
        match self {
            ComparisonSolution::Sub(s) => s.params.lambda,
            ComparisonSolution::Super(s) => s.params.lambda,
        }
    }

    fn speed(&self) -> f64 {
        match self {
            ComparisonSolution::Sub(s) => s.params.c,
            ComparisonSolution::Super(_) => 0.0,
        }
    }

    fn halved(&self) -> Result<Self> {
        match self {
            ComparisonSolution::Sub(s) => {
                let sp = SubSolutionParams { c: 0.5 * s.params.c, mu: 0.5 * s.params.mu, delta: 0.5 * s.params.delta, ..s.params };
                Ok(ComparisonSolution::Sub(build_subsolution(&s.p, &sp)?))
            }
            ComparisonSolution::Super(s) => {
                let sp = SuperSolutionParams { mu: 0.5 * s.params.mu, delta: 0.5 * s.params.delta, ..s.params };
                Ok(ComparisonSolution::Super(SuperSolution { params: sp, ..s.clone() }))
            }
        }
    }
}

/// Sampling region: a uniform grid plus refined windows, in the moving
/// coordinate `x + ct` for the sub-solution and in `x` for the super-solution.
#[derive(Clone, Debug, Serialize)]
pub struct VerifyGrid {
    pub s_min: f64,
    pub s_max: f64,
    pub n_s: usize,
    /// Extra windows `(from, to, points)`.
    pub refine: Vec<(f64, f64, usize)>,
    pub t_max: f64,
    pub n_t: usize,
}

impl VerifyGrid {
    /// `x + ct in [0, 400/lambda]` (sub) or `x in [-400/lambda, 0]` (super),
    /// `t in [0, 50]`, refined around the switch and the splice points.
    pub fn default_for(cs: &ComparisonSolution) -> Self {
        let lam = cs.lambda();
        let span = 400.0 / lam;
        let win = |a: f64, b: f64| (a, b, 2001);
        match cs {
            ComparisonSolution::Sub(s) => Self {
                s_min: 0.0,
                s_max: span,
                n_s: 40001,
                refine: vec![
                    win(0.0, 2.0),
                    win(s.params.x0 - 0.5, s.params.x0 + 1.5),
                    win(s.params.x_star - 2.0, s.params.x_star + 2.0),
                    win(s.params.x_star - 2.0 / lam, s.params.x_star + 2.0 / lam),
                ],
                t_max: 50.0,
                n_t: 51,
            },
            ComparisonSolution::Super(s) => Self {
                s_min: -span,
                s_max: 0.0,
                n_s: 40001,
                refine: vec![
                    win(-2.0, 0.0),
                    win(s.params.x0 - 1.5, s.params.x0 + 0.5),
                    win(s.params.x_upper - 2.0, s.params.x_upper + 2.0),
                    win(s.params.x_star - 2.0, s.params.x_star + 2.0),
                    win(s.params.x_star - 2.0 / lam, -2.0),
                    win(s.params.x0 - 2.0 / lam, s.params.x0 + 2.0 / lam),
                ],
                t_max: 50.0,
                n_t: 51,
            },
        }
    }

    fn points(&self) -> Vec<f64> {
        let lin = |a: f64, b: f64, n: usize| (0..n).map(move |i| a + (b - a) * i as f64 / (n - 1).max(1) as f64);
        let mut s: Vec<f64> = lin(self.s_min, self.s_max, self.n_s).collect();
        for &(a, b, n) in &self.refine {
            s.extend(lin(a.max(self.s_min), b.min(self.s_max), n));
        }
        s.sort_by(f64::total_cmp);
        s.dedup();
        s
    }

    fn times(&self) -> Vec<f64> {
        (0..self.n_t).map(|i| self.t_max * i as f64 / (self.n_t - 1).max(1) as f64).collect()
    }
}

#[derive(Clone, Copy, Debug, Serialize)]
pub struct Extreme {
    pub value: f64,
    pub t: f64,
    pub x: f64,
    pub terms: Residual,
}

#[derive(Clone, Debug, Serialize)]
pub struct MarginReport {
    pub kind: Kind,
    pub params: Proposal,
    /// Worst `D1` (smallest for the sub-solution, largest for the super-solution).
    pub d1: Extreme,
    pub d2: Extreme,
    /// Worst of the two, with the sign convention of `kind`.
    pub margin: f64,
    pub splice_mismatch: f64,
    pub grid: VerifyGrid,
    pub points: usize,
    pub passed: bool,
}

impl MarginReport {
    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }
}

/// Worst residuals over the grid; never fails, see `verify_inequalities`.
pub fn margins(cs: &ComparisonSolution, grid: &VerifyGrid) -> MarginReport {
    let kind = cs.kind();
    let sign = if kind == Kind::Sub { 1.0 } else { -1.0 };
    let c = cs.speed();
    let ss = grid.points();
    let ts = grid.times();
    let worst = |a: Extreme, b: Extreme| if sign * b.value < sign * a.value { b } else { a };
    let init = Extreme { value: sign * f64::INFINITY, t: f64::NAN, x: f64::NAN, terms: Residual::default() };
    let (d1, d2) = ts
        .par_iter()
        .map(|&t| {
            let mut acc = (init, init);
            for &s in &ss {
                let x = s - c * t;
                let res = cs.residual(t, x);
                acc.0 = worst(acc.0, Extreme { value: res.d1, t, x, terms: res });
                acc.1 = worst(acc.1, Extreme { value: res.d2, t, x, terms: res });
            }
            acc
        })
        .reduce(|| (init, init), |a, b| (worst(a.0, b.0), worst(a.1, b.1)));
    let margin = if kind == Kind::Sub { d1.value.min(d2.value) } else { d1.value.max(d2.value) };
    let splice = cs.splice_mismatch();
    MarginReport {
        kind,
        params: cs.proposal(),
        d1,
        d2,
        margin,
        splice_mismatch: splice,
        grid: grid.clone(),
        points: ss.len() * ts.len(),
        passed: sign * margin > 0.0 && margin.is_finite() && splice < 1e-9,
    }
}

/// Margins, with a wrong-sign residual reported as an error naming the
/// offending point and its terms.
pub fn verify_inequalities(cs: &ComparisonSolution, grid: &VerifyGrid) -> Result<MarginReport> {
    let rep = margins(cs, grid);
    if !rep.passed {
        let e = if (rep.kind == Kind::Sub) == (rep.d1.value <= rep.d2.value) { rep.d1 } else { rep.d2 };
        return Err(Error::Verification(format!(
            "{} solution residual {:e} has the wrong sign at t = {}, x = {} (terms {:?}); splice mismatch {:e}",
            rep.kind.name(),
            rep.margin,
            e.t,
            e.x,
            e.terms,
            rep.splice_mismatch
        )));
    }
    Ok(rep)
}

#[derive(Clone, Debug)]
pub struct Certified {
    pub solution: ComparisonSolution,
    pub report: MarginReport,
    pub halvings: usize,
}

/// Proposes parameters, verifies on the default grid and halves the small
/// parameters after each failure.
pub fn certify(p: &ModelParams, kind: Kind) -> Result<Certified> {
    let proposal = feasibility(p, kind)?;
    let mut cs = ComparisonSolution::build(p, &proposal)?;
    let mut last = None;
    for halvings in 0..=MAX_HALVINGS {
        let grid = VerifyGrid::default_for(&cs);
        let report = margins(&cs, &grid);
        if report.passed {
            return Ok(Certified { solution: cs, report, halvings });
        }
        last = Some(report);
        cs = cs.halved()?;
    }
    let rep = last.expect("at least one attempt");
    Err(Error::Verification(format!(
        "{} solution not certified after {MAX_HALVINGS} halvings: worst residual {:e} at t = {}, x = {}",
        kind.name(),
        rep.margin,
        rep.d1.t,
        rep.d1.x
    )))
}
