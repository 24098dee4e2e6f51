//! Wave profiles `(phi, psi)(x + c t)` with unknown speed `c`:
//!
//! ```text
//! phi'' - c phi' + phi (1 - r - phi + r psi(t - c h)) = 0
//! psi'' - c psi' + (b phi - eps psi)(1 - psi)        = 0
//! ```
//!
//! on `[-L, L]`, with `phi(0) = delta` pinning the translation. Each node
//! carries its own copy of `c` tied to its neighbours by linear rows, which
//! keeps the Newton matrix banded; the copies stay equal along the iteration.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::model::{KernelSpec, ModelParams};
use crate::numerics::{char_roots, cubic_stencil, exp_product_weights, linear_fit, quintic_sample, BandMatrix};

pub const DEFAULT_L: f64 = 60.0;
pub const DEFAULT_D_XI: f64 = 0.05;
const TAIL_TOL: f64 = 1e-8;

#[derive(Clone, Debug, Serialize)]
pub struct WaveProfile {
    pub l: f64,
    pub d_xi: f64,
    pub phi: Vec<f64>,
    pub psi: Vec<f64>,
    pub c: f64,
    pub epsilon: f64,
    pub delta_norm: f64,
    /// Max-norm residual when the iterate was last evaluated.
    pub residual: f64,
    pub iterations: usize,
}

impl WaveProfile {
    pub fn n(&self) -> usize {
        self.phi.len()
    }

    /// Node carrying the phase condition (`xi = 0`).
    pub fn mid(&self) -> usize {
        self.n() / 2
    }

    pub fn xi(&self, i: usize) -> f64 {
        -self.l + i as f64 * self.d_xi
    }

    pub fn nodes(l: f64, d_xi: f64) -> usize {
        (2.0 * l / d_xi).round() as usize + 1
    }

    /// Tanh fronts with `phi(0) = delta` and `psi` ahead of `phi`.
    pub fn initial_guess(l: f64, d_xi: f64, delta: f64, epsilon: f64) -> Self {
        let n = Self::nodes(l, d_xi);
        let x0 = -2.0 * (2.0 * delta - 1.0).atanh();
        let xs = (0..n).map(|i| -l + i as f64 * d_xi);
        let (phi, psi) = xs
            .map(|x| (0.5 * (1.0 + ((x - x0) / 2.0).tanh()), 0.5 * (1.0 + ((x + 3.0) / 4.0).tanh())))
            .unzip();
        Self {
            l,
            d_xi,
            phi,
            psi,
            c: 0.5,
            epsilon,
            delta_norm: delta,
            residual: f64::NAN,
            iterations: 0,
        }
    }

    pub fn default_guess(epsilon: f64) -> Self {
        Self::initial_guess(DEFAULT_L, DEFAULT_D_XI, 0.5, epsilon)
    }

    /// The same samples moved by `k` nodes (positive `k` moves the front
    /// right), padded with the end values.
    pub fn shifted(&self, k: isize) -> Self {
        let n = self.n() as isize;
        let pick = |a: &[f64]| -> Vec<f64> { (0..n).map(|i| a[(i - k).clamp(0, n - 1) as usize]).collect() };
        Self { phi: pick(&self.phi), psi: pick(&self.psi), ..self.clone() }
    }

    /// Resamples onto `[-new_l, new_l]` with step `d_xi`, by linear
    /// interpolation inside and exponential tails outside.
    pub fn resampled(&self, new_l: f64, d_xi: f64, p: &ModelParams) -> Result<Self> {
        let bc = BoundaryRates::new(self.c, p)?;
        let n = Self::nodes(new_l, d_xi);
        let last = self.n() - 1;
        let left_psi_rate = bc.lambda2.min(bc.mu2);
        let right_rate = bc.nu_p.max(bc.nu_q);
        let mut phi = Vec::with_capacity(n);
        let mut psi = Vec::with_capacity(n);
        for i in 0..n {
            let x = -new_l + i as f64 * d_xi;
            if x < -self.l {
                phi.push(self.phi[0] * (bc.lambda2 * (x + self.l)).exp());
                psi.push(self.psi[0] * (left_psi_rate * (x + self.l)).exp());
            } else if x > self.l {
                phi.push(1.0 - (1.0 - self.phi[last]) * (right_rate * (x - self.l)).exp());
                psi.push(1.0 - (1.0 - self.psi[last]) * (bc.nu_q * (x - self.l)).exp());
            } else {
                let pos = ((x + self.l) / self.d_xi).min(last as f64);
                let j = (pos.floor() as usize).min(last - 1);
                let t = pos - j as f64;
                phi.push((1.0 - t) * self.phi[j] + t * self.phi[j + 1]);
                psi.push((1.0 - t) * self.psi[j] + t * self.psi[j + 1]);
            }
        }
        Ok(Self { l: new_l, d_xi, phi, psi, ..self.clone() })
    }

    pub fn max_tail(&self) -> f64 {
        let k = self.n() - 1;
        [self.phi[0], self.psi[0], 1.0 - self.phi[k], 1.0 - self.psi[k]]
            .into_iter()
            .map(f64::abs)
            .fold(0.0, f64::max)
    }

    pub fn to_csv(&self) -> String {
        let mut s = String::from("xi,phi,psi\n");
        for i in 0..self.n() {
            s.push_str(&format!("{},{},{}\n", self.xi(i), self.phi[i], self.psi[i]));
        }
        s
    }
}

/// Exponents of the asymptotic boundary operators and their derivatives in `c`.
#[derive(Clone, Copy, Debug)]
struct BoundaryRates {
    lambda2: f64,
    dlambda2: f64,
    mu2: f64,
    dmu2: f64,
    kappa: f64,
    dkappa: f64,
    nu_p: f64,
    dnu_p: f64,
    nu_q: f64,
    dnu_q: f64,
    a: f64,
    da: f64,
}

/// `dz/dc` for a root of `z^2 - c z - q`.
fn root_slope(z: f64, c: f64) -> f64 {
    z / (2.0 * z - c)
}

impl BoundaryRates {
    fn new(c: f64, p: &ModelParams) -> Result<Self> {
        let (r, b, h, e) = (p.r, p.b, p.h, p.epsilon);
        if b <= e {
            return Err(Error::Parameter(format!("right boundary operator needs b > eps, got b = {b}, eps = {e}")));
        }
        let (_, lambda2) = char_roots(c, r - 1.0);
        let (_, mu2) = char_roots(c, e);
        let (nu_q, _) = char_roots(c, b - e);
        let (nu_p, _) = char_roots(c, 1.0);
        let (dlambda2, dmu2) = (root_slope(lambda2, c), root_slope(mu2, c));
        let (dnu_q, dnu_p) = (root_slope(nu_q, c), root_slope(nu_p, c));
        let g = lambda2 + mu2 - c;
        let kappa = b / g;
        let dkappa = -b * (dlambda2 + dmu2 - 1.0) / (g * g);
        let ee = (-nu_q * c * h).exp();
        let dee = -h * (dnu_q * c + nu_q) * ee;
        let d = nu_q + nu_p - c;
        let dd = dnu_q + dnu_p - 1.0;
        let a = r * ee / d;
        let da = r * (dee * d - ee * dd) / (d * d);
        Ok(Self { lambda2, dlambda2, mu2, dmu2, kappa, dkappa, nu_p, dnu_p, nu_q, dnu_q, a, da })
    }
}

/// `psi(xi_i - c h)`: cubic interpolation on the grid, analytic tail below `-L`.
enum Delayed {
    Same,
    Tail { factor: f64, dfactor_dc: f64 },
    Cubic { start: usize, w: [f64; 4], dw_dc: [f64; 4] },
}

impl Delayed {
    fn at(i: usize, c: f64, h: f64, d_xi: f64, n: usize, mu2: f64, dmu2: f64) -> Self {
        if h == 0.0 {
            return Delayed::Same;
        }
        let pos = i as f64 - c * h / d_xi;
        if pos < 0.0 {
            let y = pos * d_xi;
            let factor = (mu2 * y).exp();
            Delayed::Tail { factor, dfactor_dc: factor * (dmu2 * y - mu2 * h) }
        } else {
            let (start, w, dw) = cubic_stencil(pos, n);
            let s = -h / d_xi;
            Delayed::Cubic { start, w, dw_dc: dw.map(|x| x * s) }
        }
    }

    fn value(&self, psi: &[f64], i: usize) -> (f64, f64) {
        match *self {
            Delayed::Same => (psi[i], 0.0),
            Delayed::Tail { factor, dfactor_dc } => (psi[0] * factor, psi[0] * dfactor_dc),
            Delayed::Cubic { start, w, dw_dc } => {
                let s = &psi[start..start + 4];
                (
                    (0..4).map(|k| w[k] * s[k]).sum(),
                    (0..4).map(|k| dw_dc[k] * s[k]).sum(),
                )
            }
        }
    }
}

fn band_widths(c: f64, h: f64, d_xi: f64) -> (usize, usize) {
    let s = c * h / d_xi;
    (3 * s.max(0.0).ceil() as usize + 6, 3 * (-s).max(0.0).ceil() as usize + 7)
}

/// Residual of the discrete profile problem, unknowns interleaved as
/// `[phi_i, psi_i, c_i]`; optionally fills the Jacobian.
fn assemble(w: &WaveProfile, p: &ModelParams, mut jac: Option<&mut BandMatrix>) -> Result<Vec<f64>> {
    let n = w.n();
    let (r, b, h, e) = (p.r, p.b, p.h, p.epsilon);
    let (c, dx) = (w.c, w.d_xi);
    let bc = BoundaryRates::new(c, p)?;
    let (phi, psi) = (&w.phi, &w.psi);
    let m = w.mid();
    let mut f = vec![0.0; 3 * n];
    let mut put = |i: usize, j: usize, v: f64| {
        if let Some(a) = jac.as_deref_mut() {
            a.add(i, j, v);
        }
    };
    let (i2, ic) = (1.0 / (dx * dx), 1.0 / (2.0 * dx));

    for i in 1..n - 1 {
        let (rp, rq) = (3 * i, 3 * i + 1);
        let d1 = (phi[i + 1] - phi[i - 1]) * ic;
        let dl = Delayed::at(i, c, h, dx, n, bc.mu2, bc.dmu2);
        let (pd, dpd) = dl.value(psi, i);
        f[rp] = (phi[i + 1] - 2.0 * phi[i] + phi[i - 1]) * i2 - c * d1 + phi[i] * (1.0 - r - phi[i] + r * pd);
        put(rp, 3 * (i - 1), i2 + c * ic);
        put(rp, 3 * (i + 1), i2 - c * ic);
        put(rp, 3 * i, -2.0 * i2 + 1.0 - r - 2.0 * phi[i] + r * pd);
        put(rp, 3 * i + 2, -d1 + r * phi[i] * dpd);
        match dl {
            Delayed::Same => put(rp, 3 * i + 1, r * phi[i]),
            Delayed::Tail { factor, .. } => put(rp, 1, r * phi[i] * factor),
            Delayed::Cubic { start, w, .. } => {
                for (k, wk) in w.iter().enumerate() {
                    put(rp, 3 * (start + k) + 1, r * phi[i] * wk);
                }
            }
        }

        let e1 = (psi[i + 1] - psi[i - 1]) * ic;
        let kin = b * phi[i] - e * psi[i];
        f[rq] = (psi[i + 1] - 2.0 * psi[i] + psi[i - 1]) * i2 - c * e1 + kin * (1.0 - psi[i]);
        put(rq, 3 * (i - 1) + 1, i2 + c * ic);
        put(rq, 3 * (i + 1) + 1, i2 - c * ic);
        put(rq, 3 * i + 1, -2.0 * i2 - e * (1.0 - psi[i]) - kin);
        put(rq, 3 * i, b * (1.0 - psi[i]));
        put(rq, 3 * i + 2, -e1);
    }

    // Left end: decay at lambda2 for phi, and at mu2 for psi forced by phi.
    let (sp, sq) = (phi[0] + phi[1], psi[0] + psi[1]);
    f[0] = (phi[1] - phi[0]) / dx - 0.5 * bc.lambda2 * sp;
    put(0, 3, 1.0 / dx - 0.5 * bc.lambda2);
    put(0, 0, -1.0 / dx - 0.5 * bc.lambda2);
    put(0, 2, -0.5 * bc.dlambda2 * sp);
    f[1] = (psi[1] - psi[0]) / dx - 0.5 * bc.mu2 * sq + 0.5 * bc.kappa * sp;
    put(1, 4, 1.0 / dx - 0.5 * bc.mu2);
    put(1, 1, -1.0 / dx - 0.5 * bc.mu2);
    put(1, 0, 0.5 * bc.kappa);
    put(1, 3, 0.5 * bc.kappa);
    put(1, 2, -0.5 * bc.dmu2 * sq + 0.5 * bc.dkappa * sp);

    // Right end, in the complements p = 1 - phi, q = 1 - psi.
    let (k, j) = (n - 1, n - 2);
    let (rp, rq) = (3 * k, 3 * k + 1);
    let (pk, pj, qk, qj) = (1.0 - phi[k], 1.0 - phi[j], 1.0 - psi[k], 1.0 - psi[j]);
    f[rq] = (qk - qj) / dx - 0.5 * bc.nu_q * (qk + qj);
    put(rq, 3 * k + 1, -1.0 / dx + 0.5 * bc.nu_q);
    put(rq, 3 * j + 1, 1.0 / dx + 0.5 * bc.nu_q);
    put(rq, 3 * k + 2, -0.5 * bc.dnu_q * (qk + qj));
    f[rp] = (pk - pj) / dx - 0.5 * bc.nu_p * (pk + pj) + 0.5 * bc.a * (qk + qj);
    put(rp, 3 * k, -1.0 / dx + 0.5 * bc.nu_p);
    put(rp, 3 * j, 1.0 / dx + 0.5 * bc.nu_p);
    put(rp, 3 * k + 1, -0.5 * bc.a);
    put(rp, 3 * j + 1, -0.5 * bc.a);
    put(rp, 3 * k + 2, -0.5 * bc.dnu_p * (pk + pj) + 0.5 * bc.da * (qk + qj));

    // Speed copies and the phase row.
    for i in 0..n {
        let row = 3 * i + 2;
        if i < m {
            put(row, 3 * i + 5, 1.0);
            put(row, row, -1.0);
        } else if i == m {
            f[row] = phi[m] - w.delta_norm;
            put(row, 3 * m, 1.0);
        } else {
            put(row, row, 1.0);
            put(row, row - 3, -1.0);
        }
    }
    Ok(f)
}

/// Full residual vector of the discrete problem (rows interleaved per node).
pub fn assemble_residual(w: &WaveProfile, p: &ModelParams) -> Result<Vec<f64>> {
    check_layout(w, p)?;
    assemble(w, p, None)
}

/// Largest `phi`/`psi` residual over interior nodes.
pub fn interior_residual(w: &WaveProfile, p: &ModelParams) -> Result<f64> {
    let f = assemble_residual(w, p)?;
    Ok((1..w.n() - 1).map(|i| f[3 * i].abs().max(f[3 * i + 1].abs())).fold(0.0, f64::max))
}

/// Dense copy of the analytic Jacobian, for checking against differences.
pub fn jacobian_dense(w: &WaveProfile, p: &ModelParams) -> Result<Vec<Vec<f64>>> {
    check_layout(w, p)?;
    let n = 3 * w.n();
    let (kl, ku) = band_widths(w.c, p.h, w.d_xi);
    let mut a = BandMatrix::zeros(n, kl, ku);
    assemble(w, p, Some(&mut a))?;
    Ok((0..n).map(|i| (0..n).map(|j| a.get(i, j)).collect()).collect())
}

fn check_layout(w: &WaveProfile, p: &ModelParams) -> Result<()> {
    p.validate()?;
    if p.r <= 1.0 {
        return Err(Error::Parameter(format!("profile problem needs r > 1, got r = {}", p.r)));
    }
    if w.n() < 9 || w.psi.len() != w.n() || w.n() != WaveProfile::nodes(w.l, w.d_xi) {
        return Err(Error::Configuration("profile arrays do not match the grid".into()));
    }
    if w.l <= w.c.abs() * p.h {
        return Err(Error::Configuration(format!("need L > c h, got L = {}, c h = {}", w.l, w.c * p.h)));
    }
    if !(w.delta_norm > 0.0 && w.delta_norm < 1.0) {
        return Err(Error::Configuration(format!("phase value must lie in (0, 1), got {}", w.delta_norm)));
    }
    Ok(())
}

#[derive(Clone, Copy, Debug, Serialize)]
pub struct ProfileOptions {
    pub tol: f64,
    pub max_iter: usize,
    pub max_halvings: usize,
    /// Double `L` while a tail exceeds `1e-8`, up to `max_l`.
    pub auto_extend: bool,
    pub max_l: f64,
}

impl Default for ProfileOptions {
    fn default() -> Self {
        Self { tol: 1e-10, max_iter: 50, max_halvings: 8, auto_extend: true, max_l: 480.0 }
    }
}

fn max_abs(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |a, x| a.max(x.abs()))
}

fn apply_step(w: &WaveProfile, dz: &[f64], t: f64) -> WaveProfile {
    let mut out = w.clone();
    for i in 0..w.n() {
        out.phi[i] += t * dz[3 * i];
        out.psi[i] += t * dz[3 * i + 1];
    }
    out.c += t * dz[3 * w.mid() + 2];
    out
}

fn newton(mut w: WaveProfile, p: &ModelParams, opts: &ProfileOptions) -> Result<WaveProfile> {
    check_layout(&w, p)?;
    w.epsilon = p.epsilon;
    let mut f = assemble(&w, p, None)?;
    let mut res = max_abs(&f);
    let mut it = 0;
    let mut polished = false;
    loop {
        if !res.is_finite() {
            return Err(Error::ProfileNonConvergence { iterations: it, residual: res, last: Box::new(w) });
        }
        if res < opts.tol && polished {
            break;
        }
        if it >= opts.max_iter {
            w.residual = res;
            w.iterations = it;
            return Err(Error::ProfileNonConvergence { iterations: it, residual: res, last: Box::new(w) });
        }
        let (kl, ku) = band_widths(w.c, p.h, w.d_xi);
        let mut a = BandMatrix::zeros(3 * w.n(), kl, ku);
        assemble(&w, p, Some(&mut a))?;
        a.factor()?;
        let mut dz: Vec<f64> = f.iter().map(|x| -x).collect();
        a.solve_in_place(&mut dz);
        it += 1;

        if res < opts.tol {
            // One extra full step once inside tolerance, kept only if it helps.
            polished = true;
            let trial = apply_step(&w, &dz, 1.0);
            if let Ok(ft) = assemble(&trial, p, None) {
                let rt = max_abs(&ft);
                if rt <= res {
                    (w, f, res) = (trial, ft, rt);
                }
            }
            continue;
        }

        let mut t = 1.0;
        let mut accepted = None;
        for _ in 0..=opts.max_halvings {
            let trial = apply_step(&w, &dz, t);
            if trial.c.is_finite() && trial.l > trial.c.abs() * p.h {
                if let Ok(ft) = assemble(&trial, p, None) {
                    let rt = max_abs(&ft);
                    if rt < res {
                        accepted = Some((trial, ft, rt));
                        break;
                    }
                }
            }
            t *= 0.5;
        }
        match accepted {
            Some((nw, nf, nr)) => (w, f, res) = (nw, nf, nr),
            None => {
                w.residual = res;
                w.iterations = it;
                return Err(Error::ProfileNonConvergence { iterations: it, residual: res, last: Box::new(w) });
            }
        }
    }
    w.residual = res;
    w.iterations = it;
    Ok(w)
}

/// Damped Newton from `guess`, then the profile invariants are checked.
pub fn solve_profile(guess: WaveProfile, p: &ModelParams) -> Result<WaveProfile> {
    solve_profile_with(guess, p, &ProfileOptions::default())
}

pub fn solve_profile_with(guess: WaveProfile, p: &ModelParams, opts: &ProfileOptions) -> Result<WaveProfile> {
    let mut w = newton(guess, p, opts)?;
    while opts.auto_extend && w.max_tail() > TAIL_TOL && 2.0 * w.l <= opts.max_l {
        let wider = w.resampled(2.0 * w.l, w.d_xi, p)?;
        w = newton(wider, p, opts)?;
    }
    let rep = verify_front(&w, p)?;
    if !rep.monotone_ok || !rep.ordering_ok || !rep.bounds_ok {
        return Err(Error::Verification(format!(
            "profile at eps = {} violates its invariants: {}",
            p.epsilon,
            rep.failures.join("; ")
        )));
    }
    Ok(w)
}

#[derive(Clone, Debug, Serialize)]
pub struct TailCheck {
    pub name: &'static str,
    pub fitted: f64,
    pub expected: f64,
    pub rel_err: f64,
    pub samples: usize,
    pub ok: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct FrontReport {
    pub c: f64,
    pub epsilon: f64,
    pub residual: f64,
    pub monotone_ok: bool,
    pub min_dphi: f64,
    pub min_dpsi: f64,
    pub ordering_ok: bool,
    pub min_gap: f64,
    pub bounds_ok: bool,
    pub speed_ok: bool,
    pub tails: Vec<TailCheck>,
    pub failures: Vec<String>,
}

impl FrontReport {
    pub fn passed(&self) -> bool {
        self.failures.is_empty()
    }
}

/// Log-slope over the outer quarter of the resolved tail: samples of the
/// given half (ordered from the end inward) with values in `(1e-13, 1e-3)`.
fn tail_slope(xs: &[f64], vals: &[f64], half: impl Iterator<Item = usize>) -> Option<(f64, usize)> {
    let resolved: Vec<usize> = half.filter(|&i| vals[i] > 1e-13 && vals[i] < 1e-3).collect();
    let take = (resolved.len() / 4).max(10).min(resolved.len());
    let (x, y): (Vec<f64>, Vec<f64>) = resolved[..take].iter().map(|&i| (xs[i], vals[i].ln())).unzip();
    linear_fit(&x, &y).ok().map(|f| (f.slope, f.samples))
}

/// Itemised check of monotonicity, ordering, bounds, tail rates and the
/// speed window.
pub fn verify_front(w: &WaveProfile, p: &ModelParams) -> Result<FrontReport> {
    let n = w.n();
    let bc = BoundaryRates::new(w.c, p)?;
    let mut failures = Vec::new();

    let min_diff = |a: &[f64]| a.windows(2).map(|s| s[1] - s[0]).fold(f64::INFINITY, f64::min);
    let (min_dphi, min_dpsi) = (min_diff(&w.phi), min_diff(&w.psi));
    let monotone_ok = min_dphi > -1e-8 && min_dpsi > -1e-8;
    if !monotone_ok {
        failures.push(format!("not monotone: min differences {min_dphi:e}, {min_dpsi:e}"));
    }

    // Ordering where it is resolved: once 1 - phi reaches round-off both
    // components equal 1 to machine precision.
    let min_gap = (1..n - 1)
        .filter(|&i| 1.0 - w.phi[i] > 1e-12)
        .map(|i| w.psi[i] - w.phi[i])
        .fold(f64::INFINITY, f64::min);
    let ordering_ok = min_gap > 0.0;
    if !ordering_ok {
        failures.push(format!("ordering phi < psi fails: min(psi - phi) = {min_gap:e}"));
    }

    let bounds_ok = (1..n - 1).all(|i| w.phi[i] > -1e-12 && w.psi[i] < 1.0 + 1e-12 && w.phi[i] < 1.0 + 1e-12);
    if !bounds_ok {
        failures.push("values leave [0, 1]".into());
    }

    let speed_ok = w.c > 0.0 && w.c < 2.0;
    if !speed_ok {
        failures.push(format!("speed {} outside (0, 2)", w.c));
    }

    let xs: Vec<f64> = (0..n).map(|i| w.xi(i)).collect();
    let one_minus = |a: &[f64]| a.iter().map(|v| 1.0 - v).collect::<Vec<_>>();
    let cases = [
        ("left_phi", w.phi.clone(), bc.lambda2, true),
        ("left_psi", w.psi.clone(), bc.lambda2.min(bc.mu2), true),
        ("right_phi", one_minus(&w.phi), bc.nu_p.max(bc.nu_q), false),
        ("right_psi", one_minus(&w.psi), bc.nu_q, false),
    ];
    let mut tails = Vec::new();
    for (name, vals, expected, left) in cases {
        let fit = if left {
            tail_slope(&xs, &vals, 0..n / 2)
        } else {
            tail_slope(&xs, &vals, (n / 2..n).rev())
        };
        let (fitted, samples) = fit.unwrap_or((f64::NAN, 0));
        let rel_err = ((fitted - expected) / expected).abs();
        let ok = rel_err < 0.1;
        if !ok {
            failures.push(format!("{name} tail rate {fitted} vs {expected} ({samples} samples)"));
        }
        tails.push(TailCheck { name, fitted, expected, rel_err, samples, ok });
    }

    Ok(FrontReport {
        c: w.c,
        epsilon: w.epsilon,
        residual: w.residual,
        monotone_ok,
        min_dphi,
        min_dpsi,
        ordering_ok,
        min_gap,
        bounds_ok,
        speed_ok,
        tails,
        failures,
    })
}

fn delayed_series(w: &WaveProfile, p: &ModelParams) -> Result<Vec<f64>> {
    let bc = BoundaryRates::new(w.c, p)?;
    Ok((0..w.n())
        .map(|i| Delayed::at(i, w.c, p.h, w.d_xi, w.n(), bc.mu2, bc.dmu2).value(&w.psi, i).0)
        .collect())
}

/// Convolution of `g` with the two-sided kernel on the profile grid by
/// product trapezoid rules (exact for piecewise-linear data) in both
/// directions. Beyond the left end the data are continued by their
/// observed exponential rate, beyond the right end by a constant.
fn kernel_convolve(k: &KernelSpec, g: &[f64], dx: f64) -> Vec<f64> {
    let n = g.len();
    let (l1, l2) = (k.lambda_minus, k.lambda_plus);
    let (e1, e2) = ((l1 * dx).exp(), (-l2 * dx).exp());
    let (f0, f1) = exp_product_weights(l1, dx);
    let (b0, b1) = exp_product_weights(-l2, dx);
    let mut fwd = vec![0.0; n];
    let rate = if g[0] > 0.0 && g[1] > 0.0 { ((g[1] / g[0]).ln() / dx).max(0.0) } else { 0.0 };
    fwd[0] = g[0] / (rate - l1);
    for i in 0..n - 1 {
        fwd[i + 1] = e1 * fwd[i] + f1 * g[i] + f0 * g[i + 1];
    }
    let mut bwd = vec![0.0; n];
    bwd[n - 1] = g[n - 1] / l2;
    for i in (0..n - 1).rev() {
        bwd[i] = e2 * bwd[i + 1] + b0 * g[i] + b1 * g[i + 1];
    }
    (0..n).map(|i| k.amplitude * (fwd[i] + bwd[i])).collect()
}

/// Max defect of the two convolution identities
/// `phi = K * [phi (r psi_d - phi)]`, `psi = K * [(r - 1) psi + (b phi - eps psi)(1 - psi)]`.
pub fn integral_residual(w: &WaveProfile, p: &ModelParams) -> Result<f64> {
    let k = KernelSpec::new(w.c, p.r)?;
    let pd = delayed_series(w, p)?;
    let (r, b, e) = (p.r, p.b, p.epsilon);
    let g1: Vec<f64> = (0..w.n()).map(|i| w.phi[i] * (-w.phi[i] + r * pd[i])).collect();
    let g2: Vec<f64> = (0..w.n())
        .map(|i| (r - 1.0) * w.psi[i] + (b * w.phi[i] - e * w.psi[i]) * (1.0 - w.psi[i]))
        .collect();
    let k1 = kernel_convolve(&k, &g1, w.d_xi);
    let k2 = kernel_convolve(&k, &g2, w.d_xi);
    Ok((0..w.n())
        .map(|i| (w.phi[i] - k1[i]).abs().max((w.psi[i] - k2[i]).abs()))
        .fold(0.0, f64::max))
}

/// Residual of the continuous equations at the discrete solution, using
/// sixth-order differences and six-point interpolation of the delay.
pub fn collocation_defect(w: &WaveProfile, p: &ModelParams) -> Result<f64> {
    const D1: [f64; 3] = [3.0 / 4.0, -3.0 / 20.0, 1.0 / 60.0];
    const D2: [f64; 4] = [-49.0 / 18.0, 3.0 / 2.0, -3.0 / 20.0, 1.0 / 90.0];
    let n = w.n();
    let dx = w.d_xi;
    let bc = BoundaryRates::new(w.c, p)?;
    let (r, b, e, h, c) = (p.r, p.b, p.epsilon, p.h, w.c);
    let d = |a: &[f64], i: usize| -> (f64, f64) {
        let mut d1 = 0.0;
        let mut d2 = D2[0] * a[i];
        for k in 1..=3 {
            d1 += D1[k - 1] * (a[i + k] - a[i - k]);
            d2 += D2[k] * (a[i + k] + a[i - k]);
        }
        (d1 / dx, d2 / (dx * dx))
    };
    let mut worst: f64 = 0.0;
    for i in 3..n - 3 {
        let pos = i as f64 - c * h / dx;
        let pd = if h == 0.0 {
            w.psi[i]
        } else if pos < 0.0 {
            w.psi[0] * (bc.mu2 * pos * dx).exp()
        } else {
            quintic_sample(&w.psi, pos)
        };
        let (p1, p2) = d(&w.phi, i);
        let (q1, q2) = d(&w.psi, i);
        let r1 = p2 - c * p1 + w.phi[i] * (1.0 - r - w.phi[i] + r * pd);
        let r2 = q2 - c * q1 + (b * w.phi[i] - e * w.psi[i]) * (1.0 - w.psi[i]);
        worst = worst.max(r1.abs()).max(r2.abs());
    }
    Ok(worst)
}

#[derive(Clone, Debug, Serialize)]
pub struct ContinuationStep {
    pub epsilon: f64,
    pub c: f64,
    pub residual: f64,
    pub iterations: usize,
    pub l: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct ContinuationRun {
    pub params: ModelParams,
    pub schedule: Vec<f64>,
    pub steps: Vec<ContinuationStep>,
    /// `|c(eps_{j+1}) - c(eps_j)|` along the accepted steps.
    pub differences: Vec<f64>,
    /// Whether the last four differences strictly decrease.
    pub differences_decreasing: bool,
    /// Quadratic extrapolation of the last three speeds to `eps = 0`.
    pub c_star_extrapolated: Option<f64>,
    /// Speed of the `eps = 0` problem solved from the last profile.
    pub c_limit: Option<f64>,
    pub aborted: Option<String>,
    #[serde(skip)]
    pub last_profile: Option<WaveProfile>,
    #[serde(skip)]
    pub limit_profile: Option<WaveProfile>,
}

/// Extrapolates `c(eps)` to `eps = 0` through the last three points with a
/// quadratic in `eps`.
pub fn richardson(eps: &[f64], c: &[f64]) -> Option<f64> {
    let n = eps.len();
    if n < 3 || c.len() != n {
        return None;
    }
    let (x, y) = (&eps[n - 3..], &c[n - 3..]);
    let mut acc = 0.0;
    for k in 0..3 {
        let mut l = 1.0;
        for q in 0..3 {
            if q != k {
                l *= (0.0 - x[q]) / (x[k] - x[q]);
            }
        }
        acc += l * y[k];
    }
    Some(acc)
}

/// Geometric schedule `eps_from * factor^j` down to `eps_to`.
pub fn epsilon_schedule(eps_from: f64, eps_to: f64, factor: f64) -> Result<Vec<f64>> {
    if !(eps_from > eps_to && eps_to > 0.0) || !(factor > 0.0 && factor < 1.0) {
        return Err(Error::Configuration(format!(
            "need eps_from > eps_to > 0 and factor in (0, 1), got {eps_from}, {eps_to}, {factor}"
        )));
    }
    let mut out = vec![eps_from];
    loop {
        let next = out.last().unwrap() * factor;
        if next < eps_to * (1.0 - 1e-9) {
            break;
        }
        out.push(next);
    }
    Ok(out)
}

/// Solve from the tanh guess; on failure approach the target from `h = 0`.
pub fn solve_from_scratch(p: &ModelParams, opts: &ProfileOptions) -> Result<WaveProfile> {
    let guess = WaveProfile::default_guess(p.epsilon);
    match solve_profile_with(guess.clone(), p, opts) {
        Ok(w) => Ok(w),
        Err(first) if p.h > 0.0 => {
            let mut w = solve_profile_with(guess, &p.with_delay(0.0), opts).map_err(|_| first)?;
            for k in 1..=8 {
                w = solve_profile_with(w, &p.with_delay(p.h * k as f64 / 8.0), opts)?;
            }
            Ok(w)
        }
        Err(e) => Err(e),
    }
}

/// Continues profiles down a geometric `eps` schedule, then extrapolates
/// the speed and solves the `eps = 0` problem seeded from the last profile
/// with the extrapolated speed.
pub fn continue_in_epsilon(p: &ModelParams, eps_from: f64, eps_to: f64, factor: f64) -> Result<ContinuationRun> {
    continue_in_epsilon_with(p, eps_from, eps_to, factor, &ProfileOptions::default())
}

pub fn continue_in_epsilon_with(
    p: &ModelParams,
    eps_from: f64,
    eps_to: f64,
    factor: f64,
    opts: &ProfileOptions,
) -> Result<ContinuationRun> {
    let schedule = epsilon_schedule(eps_from, eps_to, factor)?;
    let mut run = ContinuationRun {
        params: *p,
        schedule: schedule.clone(),
        steps: Vec::new(),
        differences: Vec::new(),
        differences_decreasing: false,
        c_star_extrapolated: None,
        c_limit: None,
        aborted: None,
        last_profile: None,
        limit_profile: None,
    };
    let mut prev: Option<WaveProfile> = None;
    for &eps in &schedule {
        let q = p.with_epsilon(eps);
        let out = match prev.take() {
            Some(w) => solve_profile_with(w, &q, opts),
            None => solve_from_scratch(&q, opts),
        };
        match out {
            Ok(w) => {
                run.steps.push(ContinuationStep { epsilon: eps, c: w.c, residual: w.residual, iterations: w.iterations, l: w.l });
                prev = Some(w);
            }
            Err(e) => {
                run.aborted = Some(format!("eps = {eps}: {e}"));
                break;
            }
        }
    }
    let cs: Vec<f64> = run.steps.iter().map(|s| s.c).collect();
    let es: Vec<f64> = run.steps.iter().map(|s| s.epsilon).collect();
    run.differences = cs.windows(2).map(|w| (w[1] - w[0]).abs()).collect();
    let d = &run.differences;
    run.differences_decreasing = d.len() >= 4 && d[d.len() - 4..].windows(2).all(|w| w[1] < w[0]);
    run.c_star_extrapolated = richardson(&es, &cs);
    if run.aborted.is_none() {
        if let Some(mut w) = prev.clone() {
            if let Some(cx) = run.c_star_extrapolated {
                w.c = cx;
            }
            match solve_profile_with(w, &p.with_epsilon(0.0), opts) {
                Ok(z) => {
                    run.c_limit = Some(z.c);
                    run.limit_profile = Some(z);
                }
                Err(e) => run.aborted = Some(format!("eps = 0: {e}")),
            }
        }
    }
    run.last_profile = prev;
    Ok(run)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn p(h: f64, e: f64) -> ModelParams {
        ModelParams::new(2.0, 2.0, h, e).unwrap()
    }

    fn small_guess(c: f64) -> WaveProfile {
        let mut w = WaveProfile::initial_guess(6.0, 0.25, 0.5, 0.1);
        w.c = c;
        w
    }

    #[test]
    fn equilibria_give_zero_interior_rows() {
        for h in [0.0, 0.5] {
            let q = p(h, 0.1);
            for v in [0.0, 1.0] {
                let mut w = small_guess(0.7);
                w.phi.iter_mut().for_each(|x| *x = v);
                w.psi.iter_mut().for_each(|x| *x = v);
                let f = assemble_residual(&w, &q).unwrap();
                // Below -L the delayed value follows the decaying tail, which
                // is exact for O but not for beta.
                let first = 1 + (w.c * h / w.d_xi).ceil() as usize;
                for i in first..w.n() - 1 {
                    assert!(f[3 * i].abs() < 1e-14 && f[3 * i + 1].abs() < 1e-14);
                }
            }
        }
    }

    #[test]
    fn jacobian_matches_differences() {
        for h in [0.0, 0.5, 3.0] {
            let q = p(h, 0.1);
            let mut w = small_guess(0.6);
            for (i, x) in w.psi.iter_mut().enumerate() {
                *x += 0.01 * (i as f64).sin();
            }
            let jac = jacobian_dense(&w, &q).unwrap();
            let f0 = assemble_residual(&w, &q).unwrap();
            let n = w.n();
            let step = 1e-7;
            for col in 0..3 * n {
                let mut wp = w.clone();
                match col % 3 {
                    0 => wp.phi[col / 3] += step,
                    1 => wp.psi[col / 3] += step,
                    _ => {
                        // All speed copies move together; compare the summed column.
                        if col / 3 != 0 {
                            continue;
                        }
                        wp.c += step;
                    }
                }
                let f1 = assemble_residual(&wp, &q).unwrap();
                for row in 0..3 * n {
                    let fd = (f1[row] - f0[row]) / step;
                    let an = if col % 3 == 2 {
                        (0..n).map(|i| jac[row][3 * i + 2]).sum::<f64>()
                    } else {
                        jac[row][col]
                    };
                    // Rows of the speed copies are linear in the copies, not in c.
                    if col % 3 == 2 && row % 3 == 2 {
                        continue;
                    }
                    assert!((fd - an).abs() < 1e-4 * (1.0 + an.abs()), "h {h} row {row} col {col}: {fd} vs {an}");
                }
            }
        }
    }

    #[test]
    fn richardson_is_exact_for_quadratics() {
        let eps = [0.04, 0.02, 0.01];
        let c: Vec<f64> = eps.iter().map(|e| 0.3 + 2.0 * e - 5.0 * e * e).collect();
        assert_abs_diff_eq!(richardson(&eps, &c).unwrap(), 0.3, epsilon = 1e-12);
        let (c1, c2, c3) = (c[0], c[1], c[2]);
        assert_abs_diff_eq!((c1 - 6.0 * c2 + 8.0 * c3) / 3.0, 0.3, epsilon = 1e-12);
    }

    #[test]
    fn schedule_hits_the_end_point() {
        let s = epsilon_schedule(0.2, 0.00625, 0.5).unwrap();
        assert_eq!(s.len(), 6);
        assert_abs_diff_eq!(*s.last().unwrap(), 0.00625, epsilon = 1e-15);
        assert!(epsilon_schedule(0.1, 0.2, 0.5).unwrap_err().is_configuration());
    }

    #[test]
    fn layout_is_validated() {
        let mut w = small_guess(0.5);
        w.l = 0.5;
        assert!(assemble_residual(&w, &p(1.0, 0.1)).is_err());
    }

    #[test]
    fn kernel_convolution_of_constants() {
        let k = KernelSpec::new(0.7, 2.0).unwrap();
        let g = vec![1.0; 200];
        for v in kernel_convolve(&k, &g, 0.05) {
            assert_abs_diff_eq!(v, 1.0, epsilon = 1e-12);
        }
    }
}
