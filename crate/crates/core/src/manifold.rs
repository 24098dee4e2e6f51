//! Local unstable manifold of the origin for the profile system, as the
//! fixed point of a pair of integral operators on `(-inf, 0]`:
//!
//! ```text
//! phi(t) = int_{-inf}^t e^{l1 (t-s)} P ds + int_t^0 e^{l2 (t-s)} P ds
//!          + (alpha - int_{-inf}^0 e^{-l1 s} P ds) e^{l2 t}
//! ```
//!
//! and the same for `psi` with `(mu1, mu2, Q, beta)`. Functions live in the
//! weighted sup norm `sup_{s<=0} e^{-k s}|f(s)|`, `k = c_ref / 4`, sampled
//! on `[-T, 0]` with `T` large enough that anything below `-T` is under
//! `1e-12` in that norm.
//!
//! The integrals are product-trapezoid rules: `P` and `Q` are taken to be
//! piecewise linear and the exponential kernels are integrated exactly on
//! each cell, which gives second-order accuracy with no step restriction.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::model::{profile_char_roots, ModelParams, Spectrum};
use crate::numerics::{cubic_sample, exp_product_weights};

pub const DEFAULT_STEP: f64 = 0.01;
/// Target size of anything below the truncation point, in the weighted norm.
const TRUNCATION_TOL: f64 = 1e-12;
const MAX_PICARD: usize = 200;
const DEFAULT_SEED: u64 = 0x5eed_3a1f;

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ManifoldConfig {
    pub c_ref: f64,
    /// Weight exponent `c_ref / 4`.
    pub weight: f64,
    /// The grid covers `[-t_max, 0]`.
    pub t_max: f64,
    pub step: f64,
    pub rho: f64,
    pub c1: f64,
    pub c2: f64,
    pub c3: f64,
    pub c4: f64,
    pub lambda_star_minus: f64,
    /// Radius of the disk of admissible `(alpha, beta)`.
    pub disk_radius: f64,
}

/// Constants of the contraction argument for `c_ref`, with the ball radius
/// at 90% of its admissible maximum and the default grid.
pub fn manifold_constants(p: &ModelParams, c_ref: f64) -> Result<ManifoldConfig> {
    let r = p.r;
    if !(r > 1.0) {
        return Err(Error::Parameter(format!("unstable manifold needs r > 1, got r = {r}")));
    }
    if !(c_ref > 0.0 && c_ref.is_finite()) {
        return Err(Error::Parameter(format!("c_ref must be positive, got {c_ref}")));
    }
    let c1 = (1.0 + r) / (2.0 * (r - 1.0).sqrt());
    let lambda_star_minus = -(r - 1.0) / (1.0 + r.sqrt());
    let c2 = (2.0 / (0.5 * c_ref - lambda_star_minus) + 4.0 / c_ref) * c1;
    let c3 = 16.0 * p.b / (c_ref * c_ref);
    let c4 = 16.0 * (c2 * p.b + 1.0) / (c_ref * c_ref);
    let rho = 0.9 * 1f64.min(0.125 / c2).min(0.125 / c4);
    let mut cfg = ManifoldConfig {
        c_ref,
        weight: 0.25 * c_ref,
        t_max: 0.0,
        step: DEFAULT_STEP,
        rho,
        c1,
        c2,
        c3,
        c4,
        lambda_star_minus,
        disk_radius: 0.0,
    };
    cfg.set_rho(rho);
    Ok(cfg)
}

impl ManifoldConfig {
    /// Same constants with another ball radius; the disk and the truncation
    /// follow.
    pub fn with_rho(mut self, rho: f64) -> Result<Self> {
        let cap = 1f64.min(0.125 / self.c2).min(0.125 / self.c4);
        if !(rho > 0.0 && rho < cap) {
            return Err(Error::Parameter(format!("rho must lie in (0, {cap}), got {rho}")));
        }
        self.set_rho(rho);
        Ok(self)
    }

    pub fn with_step(mut self, step: f64) -> Result<Self> {
        if !(step > 0.0 && step.is_finite()) {
            return Err(Error::Configuration(format!("grid step must be positive, got {step}")));
        }
        self.step = step;
        self.set_rho(self.rho);
        Ok(self)
    }

    fn set_rho(&mut self, rho: f64) {
        self.rho = rho;
        // Largest disk inside |alpha| <= a and C3|alpha| + |beta| <= b.
        let a = rho - self.c2 * rho * rho;
        let b = rho - self.c4 * rho * rho;
        self.disk_radius = a.min(b / (self.c3 * self.c3 + 1.0).sqrt());
        let t = (rho / TRUNCATION_TOL).ln() / self.weight;
        self.t_max = (t / self.step).ceil() * self.step;
    }

    /// Number of grid intervals on `[-T, 0]`.
    pub fn intervals(&self) -> usize {
        (self.t_max / self.step).round() as usize
    }

    pub fn t(&self, j: usize) -> f64 {
        -self.t_max + j as f64 * self.step
    }

    pub fn in_disk(&self, alpha: f64, beta: f64) -> bool {
        alpha.hypot(beta) <= self.disk_radius * (1.0 + 1e-12)
    }

    fn check_speed(&self, c: f64) -> Result<()> {
        if !(c >= 0.75 * self.c_ref && c <= 2.0) {
            return Err(Error::Domain(format!("speed {c} outside [{}, 2]", 0.75 * self.c_ref)));
        }
        Ok(())
    }

    /// Weighted sup norm of a sampled function.
    pub fn weighted_norm(&self, f: &[f64]) -> f64 {
        f.iter()
            .enumerate()
            .map(|(j, x)| (-self.weight * self.t(j)).exp() * x.abs())
            .fold(0.0, f64::max)
    }
}

/// A function pair sampled on `[-T, 0]` with its boundary data.
#[derive(Clone, Debug, Serialize)]
pub struct ManifoldIterate {
    pub phi: Vec<f64>,
    pub psi: Vec<f64>,
    pub alpha: f64,
    pub beta: f64,
    pub norm: f64,
}

impl ManifoldIterate {
    pub fn zero(cfg: &ManifoldConfig, alpha: f64, beta: f64) -> Self {
        let n = cfg.intervals() + 1;
        Self { phi: vec![0.0; n], psi: vec![0.0; n], alpha, beta, norm: 0.0 }
    }

    pub fn from_samples(cfg: &ManifoldConfig, phi: Vec<f64>, psi: Vec<f64>, alpha: f64, beta: f64) -> Result<Self> {
        let n = cfg.intervals() + 1;
        if phi.len() != n || psi.len() != n {
            return Err(Error::Configuration(format!(
                "iterate has {} / {} samples, grid has {n}",
                phi.len(),
                psi.len()
            )));
        }
        let norm = cfg.weighted_norm(&phi).max(cfg.weighted_norm(&psi));
        Ok(Self { phi, psi, alpha, beta, norm })
    }

    /// Weighted distance between two iterates on the same grid.
    pub fn distance(&self, other: &Self, cfg: &ManifoldConfig) -> f64 {
        let d = |a: &[f64], b: &[f64]| -> Vec<f64> { a.iter().zip(b).map(|(x, y)| x - y).collect() };
        cfg.weighted_norm(&d(&self.phi, &other.phi)).max(cfg.weighted_norm(&d(&self.psi, &other.psi)))
    }

    pub fn to_csv(&self, cfg: &ManifoldConfig) -> String {
        let mut s = String::from("t,phi,psi\n");
        for j in 0..self.phi.len() {
            s.push_str(&format!("{},{},{}\n", cfg.t(j), self.phi[j], self.psi[j]));
        }
        s
    }
}

/// `int_{-inf}^t e^{low (t-s)} f ds + int_t^0 e^{high (t-s)} f ds
///  + (boundary - int_{-inf}^0 e^{-low s} f ds) e^{high t}` on the grid, with
/// `f` continued below `-T` by `f(-T) e^{tail (s + T)}`.
fn variation_of_constants(f: &[f64], low: f64, high: f64, boundary: f64, tail: f64, cfg: &ManifoldConfig) -> Vec<f64> {
    let m = f.len() - 1;
    let ds = cfg.step;
    let (a0, a1) = exp_product_weights(low, ds);
    let (b0, b1) = exp_product_weights(-high, ds);
    let (ea, eb) = ((low * ds).exp(), (-high * ds).exp());
    let mut out = vec![0.0; m + 1];
    out[0] = f[0] / (tail - low);
    for j in 0..m {
        out[j + 1] = ea * out[j] + a1 * f[j] + a0 * f[j + 1];
    }
    let correction = boundary - out[m];
    let mut g = 0.0;
    out[m] += correction;
    for j in (0..m).rev() {
        g = eb * g + b0 * f[j] + b1 * f[j + 1];
        out[j] += g + correction * (high * cfg.t(j)).exp();
    }
    out
}

/// `psi(t_j - c h)`, continued below `-T` along the exponential envelope.
fn delayed(psi: &[f64], shift: f64, j: usize, cfg: &ManifoldConfig) -> f64 {
    if shift == 0.0 {
        return psi[j];
    }
    let pos = j as f64 - shift / cfg.step;
    if pos >= 0.0 {
        cubic_sample(psi, pos)
    } else {
        psi[0] * (2.0 * cfg.weight * pos * cfg.step).exp()
    }
}

fn spectrum(p: &ModelParams, c: f64) -> Result<Spectrum> {
    profile_char_roots(c, p)
}

/// One application of the operator pair: `phi` first, then `psi` with the
/// new `phi` inside `Q`.
pub fn apply_operator(it: &ManifoldIterate, cfg: &ManifoldConfig, p: &ModelParams, c: f64) -> Result<ManifoldIterate> {
    cfg.check_speed(c)?;
    let n = cfg.intervals() + 1;
    if it.phi.len() != n || it.psi.len() != n {
        return Err(Error::Configuration(format!("iterate has {} samples, grid has {n}", it.phi.len())));
    }
    let norm = cfg.weighted_norm(&it.phi).max(cfg.weighted_norm(&it.psi));
    if norm > cfg.rho * (1.0 + 1e-9) {
        return Err(Error::Domain(format!("iterate norm {norm:e} exceeds rho = {:e}", cfg.rho)));
    }
    if !cfg.in_disk(it.alpha, it.beta) {
        return Err(Error::Domain(format!(
            "boundary data ({:e}, {:e}) outside the disk of radius {:e}",
            it.alpha, it.beta, cfg.disk_radius
        )));
    }
    let sp = spectrum(p, c)?;
    let (r, b, e) = (p.r, p.b, p.epsilon);
    let shift = c * p.h;
    let tail = 2.0 * cfg.weight;

    let sp_norm = (c * c + 4.0 * (r - 1.0)).sqrt();
    let pp: Vec<f64> = (0..n)
        .map(|j| it.phi[j] * (-it.phi[j] + r * delayed(&it.psi, shift, j, cfg)) / sp_norm)
        .collect();
    let phi = variation_of_constants(&pp, sp.lambda1, sp.lambda2, it.alpha, tail, cfg);

    let sq_norm = (c * c + 4.0 * e).sqrt();
    let qq: Vec<f64> = (0..n)
        .map(|j| (b * phi[j] * (1.0 - it.psi[j]) + e * it.psi[j] * it.psi[j]) / sq_norm)
        .collect();
    let psi = variation_of_constants(&qq, sp.mu1, sp.mu2, it.beta, tail, cfg);

    ManifoldIterate::from_samples(cfg, phi, psi, it.alpha, it.beta)
}

#[derive(Clone, Debug, Serialize)]
pub struct FixedPoint {
    pub iterate: ManifoldIterate,
    pub iterations: usize,
    /// Weighted distance between the last two iterates.
    pub last_difference: f64,
}

/// Default stopping tolerance: `1e-12 rho`.
pub fn default_tolerance(cfg: &ManifoldConfig) -> f64 {
    1e-12 * cfg.rho
}

/// Picard iteration from the zero pair until successive iterates differ
/// by less than `tol` in the weighted norm.
pub fn fixed_point(alpha: f64, beta: f64, cfg: &ManifoldConfig, p: &ModelParams, c: f64, tol: f64) -> Result<FixedPoint> {
    if !cfg.in_disk(alpha, beta) {
        return Err(Error::Domain(format!(
            "boundary data ({alpha:e}, {beta:e}) outside the disk of radius {:e}",
            cfg.disk_radius
        )));
    }
    let mut it = ManifoldIterate::zero(cfg, alpha, beta);
    let mut diff = f64::INFINITY;
    for k in 1..=MAX_PICARD {
        let next = apply_operator(&it, cfg, p, c)?;
        diff = next.distance(&it, cfg);
        it = next;
        if diff < tol {
            return Ok(FixedPoint { iterate: it, iterations: k, last_difference: diff });
        }
    }
    Err(Error::NonConvergence { method: "manifold Picard iteration", iterations: MAX_PICARD, residual: diff })
}

/// `rho w e^{k s} cos(omega s + theta)` with `k >= c_ref / 4`, so the
/// weighted norm is at most `rho w`.
fn random_function(cfg: &ManifoldConfig, rng: &mut ChaCha8Rng) -> Vec<f64> {
    let w: f64 = rng.random_range(0.0..1.0);
    let k = cfg.weight * rng.random_range(1.0..4.0);
    let omega: f64 = rng.random_range(0.0..3.0);
    let theta: f64 = rng.random_range(0.0..std::f64::consts::TAU);
    (0..=cfg.intervals())
        .map(|j| {
            let s = cfg.t(j);
            cfg.rho * w * (k * s).exp() * (omega * s + theta).cos()
        })
        .collect()
}

fn random_disk_point(cfg: &ManifoldConfig, rng: &mut ChaCha8Rng) -> (f64, f64) {
    let rad = cfg.disk_radius * rng.random_range(0.0f64..1.0).sqrt();
    let ang = rng.random_range(0.0..std::f64::consts::TAU);
    (rad * ang.cos(), rad * ang.sin())
}

/// A random element of the ball with random admissible boundary data.
pub fn random_iterate(cfg: &ManifoldConfig, seed: u64) -> ManifoldIterate {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (alpha, beta) = random_disk_point(cfg, &mut rng);
    let phi = random_function(cfg, &mut rng);
    let psi = random_function(cfg, &mut rng);
    let norm = cfg.weighted_norm(&phi).max(cfg.weighted_norm(&psi));
    ManifoldIterate { phi, psi, alpha, beta, norm }
}

/// Largest observed `|A u2 - A u1|_w / |u2 - u1|_w` over random pairs in the
/// ball sharing the same boundary data.
pub fn contraction_estimate(cfg: &ManifoldConfig, p: &ModelParams, c: f64, n_pairs: usize) -> Result<f64> {
    contraction_estimate_seeded(cfg, p, c, n_pairs, DEFAULT_SEED)
}

pub fn contraction_estimate_seeded(cfg: &ManifoldConfig, p: &ModelParams, c: f64, n_pairs: usize, seed: u64) -> Result<f64> {
    if n_pairs == 0 {
        return Err(Error::Configuration("contraction estimate needs at least one pair".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst = 0.0f64;
    for _ in 0..n_pairs {
        let (alpha, beta) = random_disk_point(cfg, &mut rng);
        let u1 = ManifoldIterate::from_samples(cfg, random_function(cfg, &mut rng), random_function(cfg, &mut rng), alpha, beta)?;
        let u2 = ManifoldIterate::from_samples(cfg, random_function(cfg, &mut rng), random_function(cfg, &mut rng), alpha, beta)?;
        worst = worst.max(pair_ratio(&u1, &u2, cfg, p, c)?.unwrap_or(0.0));
    }
    Ok(worst)
}

/// `|A u2 - A u1|_w / |u2 - u1|_w`, or `None` when the pair coincides.
pub fn pair_ratio(
    u1: &ManifoldIterate,
    u2: &ManifoldIterate,
    cfg: &ManifoldConfig,
    p: &ModelParams,
    c: f64,
) -> Result<Option<f64>> {
    let den = u2.distance(u1, cfg);
    if den == 0.0 {
        return Ok(None);
    }
    let a1 = apply_operator(u1, cfg, p, c)?;
    let a2 = apply_operator(u2, cfg, p, c)?;
    Ok(Some(a2.distance(&a1, cfg) / den))
}

/// Max-norm residual of the profile equations, by central differences on
/// the interior nodes whose delayed argument stays on the grid.
pub fn ode_defect(it: &ManifoldIterate, cfg: &ManifoldConfig, p: &ModelParams, c: f64) -> f64 {
    let m = it.phi.len() - 1;
    let ds = cfg.step;
    let shift = c * p.h;
    let first = ((shift / ds).ceil() as usize).max(1);
    let mut worst = 0.0f64;
    for j in first..m {
        let d2 = |f: &[f64]| (f[j + 1] - 2.0 * f[j] + f[j - 1]) / (ds * ds);
        let d1 = |f: &[f64]| (f[j + 1] - f[j - 1]) / (2.0 * ds);
        let (u, v) = (it.phi[j], it.psi[j]);
        let (fu, fv) = p.reaction(u, delayed(&it.psi, shift, j, cfg), v);
        let ru = d2(&it.phi) - c * d1(&it.phi) + fu;
        let rv = d2(&it.psi) - c * d1(&it.psi) + fv;
        worst = worst.max(ru.abs()).max(rv.abs());
    }
    worst
}

#[derive(Clone, Debug, Serialize)]
pub struct TranslationReport {
    pub tau: f64,
    pub skipped: bool,
    pub notice: Option<String>,
    pub shifted_alpha: f64,
    pub shifted_beta: f64,
    /// Max difference on the overlap, relative to `sup|phi| + sup|psi|`.
    pub relative_difference: f64,
    pub norm_ratio: f64,
    pub passed: bool,
}

/// Re-solves with boundary data `(phi(tau), psi(tau))` and compares the new
/// fixed point with the translate `t -> (phi, psi)(t + tau)` where both are
/// defined. `tau` is rounded to the grid.
pub fn translation_identity_check(
    it: &ManifoldIterate,
    cfg: &ManifoldConfig,
    p: &ModelParams,
    c: f64,
    tau: f64,
) -> Result<TranslationReport> {
    if tau > 0.0 {
        return Err(Error::Domain(format!("translation needs tau <= 0, got {tau}")));
    }
    let m = it.phi.len() - 1;
    let k = ((-tau / cfg.step).round() as usize).min(m);
    let tau = -(k as f64 * cfg.step) + 0.0;
    let (a, b) = (it.phi[m - k], it.psi[m - k]);
    let mut report = TranslationReport {
        tau,
        skipped: false,
        notice: None,
        shifted_alpha: a,
        shifted_beta: b,
        relative_difference: 0.0,
        norm_ratio: 1.0,
        passed: true,
    };
    if !cfg.in_disk(a, b) {
        report.skipped = true;
        report.notice = Some(format!(
            "shifted data ({a:e}, {b:e}) lies outside the disk of radius {:e}",
            cfg.disk_radius
        ));
        return Ok(report);
    }
    let moved = fixed_point(a, b, cfg, p, c, default_tolerance(cfg))?.iterate;
    let scale = it.phi.iter().chain(&it.psi).fold(0.0f64, |s, x| s.max(x.abs())) * 2.0;
    let mut diff = 0.0f64;
    for j in k..=m {
        diff = diff.max((moved.phi[j] - it.phi[j - k]).abs()).max((moved.psi[j] - it.psi[j - k]).abs());
    }
    report.relative_difference = if scale > 0.0 { diff / scale } else { 0.0 };
    report.norm_ratio = if it.norm > 0.0 { moved.norm / it.norm } else { 1.0 };
    report.passed = report.relative_difference < 1e-6;
    Ok(report)
}

#[derive(Clone, Copy, Debug, Serialize)]
pub struct EnvelopeReport {
    /// Largest `|phi(t)| / ((|alpha| + C2 rho^2) e^{c_ref t / 2})`.
    pub phi_ratio: f64,
    /// Largest `|psi(t)| / ((C3|alpha| + |beta| + C4 rho^2) e^{c_ref t / 2})`.
    pub psi_ratio: f64,
}

impl EnvelopeReport {
    pub fn holds(&self) -> bool {
        self.phi_ratio <= 1.0 && self.psi_ratio <= 1.0
    }
}

pub fn envelope_check(it: &ManifoldIterate, cfg: &ManifoldConfig) -> EnvelopeReport {
    let rho2 = cfg.rho * cfg.rho;
    let bphi = it.alpha.abs() + cfg.c2 * rho2;
    let bpsi = cfg.c3 * it.alpha.abs() + it.beta.abs() + cfg.c4 * rho2;
    let mut rep = EnvelopeReport { phi_ratio: 0.0, psi_ratio: 0.0 };
    for j in 0..it.phi.len() {
        let env = (2.0 * cfg.weight * cfg.t(j)).exp();
        rep.phi_ratio = rep.phi_ratio.max(it.phi[j].abs() / (bphi * env));
        rep.psi_ratio = rep.psi_ratio.max(it.psi[j].abs() / (bpsi * env));
    }
    rep
}

#[derive(Clone, Debug, Serialize)]
pub struct ManifoldReport {
    pub alpha: f64,
    pub beta: f64,
    pub epsilon: f64,
    pub c: f64,
    pub iterations: usize,
    pub contraction_ratio: f64,
    pub ode_defect: f64,
}

/// Fixed point plus its summary diagnostics.
pub fn solve_and_report(
    alpha: f64,
    beta: f64,
    cfg: &ManifoldConfig,
    p: &ModelParams,
    c: f64,
    n_pairs: usize,
) -> Result<(FixedPoint, ManifoldReport)> {
    let fp = fixed_point(alpha, beta, cfg, p, c, default_tolerance(cfg))?;
    let report = ManifoldReport {
        alpha,
        beta,
        epsilon: p.epsilon,
        c,
        iterations: fp.iterations,
        contraction_ratio: contraction_estimate(cfg, p, c, n_pairs)?,
        ode_defect: ode_defect(&fp.iterate, cfg, p, c),
    };
    Ok((fp, report))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn params() -> ModelParams {
        ModelParams::new(2.0, 2.0, 0.5, 0.05).unwrap()
    }

    #[test]
    fn constants_at_r2_b2() {
        let cfg = manifold_constants(&params(), 1.0).unwrap();
        assert_relative_eq!(cfg.c1, 1.5, epsilon = 1e-15);
        assert_relative_eq!(cfg.lambda_star_minus, -1.0 / (1.0 + 2f64.sqrt()), epsilon = 1e-15);
        assert_relative_eq!(cfg.c3, 32.0, epsilon = 1e-15);
        assert!(cfg.rho < 0.125 / cfg.c4 && cfg.rho < 0.125 / cfg.c2);
        let a = cfg.disk_radius;
        assert!(a <= cfg.rho - cfg.c2 * cfg.rho * cfg.rho);
        assert!(a * (cfg.c3 * cfg.c3 + 1.0).sqrt() <= cfg.rho - cfg.c4 * cfg.rho * cfg.rho + 1e-18);
        assert!(cfg.rho * (-cfg.weight * cfg.t_max).exp() <= 1e-12 * (1.0 + 1e-9));
    }

    #[test]
    fn rejects_monostable() {
        let p = ModelParams::new(0.5, 2.0, 0.0, 0.05).unwrap();
        assert!(matches!(manifold_constants(&p, 1.0), Err(Error::Parameter(_))));
    }

    #[test]
    fn zero_is_fixed() {
        let p = params();
        let cfg = manifold_constants(&p, 1.0).unwrap();
        let fp = fixed_point(0.0, 0.0, &cfg, &p, 1.0, default_tolerance(&cfg)).unwrap();
        assert_eq!(fp.iterations, 1);
        assert_eq!(fp.iterate.norm, 0.0);
        assert_eq!(ode_defect(&fp.iterate, &cfg, &p, 1.0), 0.0);
    }

    #[test]
    fn variation_of_constants_of_zero_is_homogeneous_mode() {
        let cfg = manifold_constants(&params(), 1.0).unwrap();
        let f = vec![0.0; cfg.intervals() + 1];
        let out = variation_of_constants(&f, -0.4, 1.6, 0.3, 0.5, &cfg);
        let m = out.len() - 1;
        assert_relative_eq!(out[m], 0.3, epsilon = 1e-15);
        assert_relative_eq!(out[m - 100], 0.3 * (1.6 * cfg.t(m - 100)).exp(), max_relative = 1e-12);
    }

    #[test]
    fn boundary_data_reproduced() {
        let p = params();
        let cfg = manifold_constants(&p, 1.0).unwrap();
        let it = random_iterate(&cfg, 7);
        let out = apply_operator(&it, &cfg, &p, 1.0).unwrap();
        let m = out.phi.len() - 1;
        assert_eq!(out.phi[m], it.alpha);
        assert_eq!(out.psi[m], it.beta);
    }

    #[test]
    fn preconditions() {
        let p = params();
        let cfg = manifold_constants(&p, 1.0).unwrap();
        let mut it = ManifoldIterate::zero(&cfg, 2.0 * cfg.disk_radius, 0.0);
        assert!(matches!(apply_operator(&it, &cfg, &p, 1.0), Err(Error::Domain(_))));
        it.alpha = 0.0;
        assert!(matches!(apply_operator(&it, &cfg, &p, 0.5), Err(Error::Domain(_))));
        it.phi[10] = 1.0;
        assert!(matches!(apply_operator(&it, &cfg, &p, 1.0), Err(Error::Domain(_))));
    }
}
