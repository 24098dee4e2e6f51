//! Parameters, kinetics, equilibria and the closed-form spectral data
//! shared by every solver.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::{adaptive_simpson, char_roots};

/// The quadruple `(r, b, h, eps)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ModelParams {
    pub r: f64,
    pub b: f64,
    pub h: f64,
    pub epsilon: f64,
}

impl ModelParams {
    pub fn new(r: f64, b: f64, h: f64, epsilon: f64) -> Result<Self> {
        let p = Self { r, b, h, epsilon };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        let Self { r, b, h, epsilon } = *self;
        if ![r, b, h, epsilon].iter().all(|x| x.is_finite()) {
            return Err(Error::Parameter(format!("non-finite parameter in {self:?}")));
        }
        if r <= 0.0 || b <= 0.0 {
            return Err(Error::Parameter(format!("need r > 0 and b > 0, got r = {r}, b = {b}")));
        }
        if h < 0.0 || epsilon < 0.0 {
            return Err(Error::Parameter(format!("need h >= 0 and eps >= 0, got h = {h}, eps = {epsilon}")));
        }
        if epsilon >= r * b {
            return Err(Error::Parameter(format!(
                "need eps < r*b = {}, got eps = {epsilon}",
                r * b
            )));
        }
        Ok(())
    }

    pub fn is_bistable(&self) -> bool {
        self.r > 1.0
    }

    pub fn with_epsilon(self, epsilon: f64) -> Self {
        Self { epsilon, ..self }
    }

    pub fn with_delay(self, h: f64) -> Self {
        Self { h, ..self }
    }

    /// Kinetic terms without input checks, for inner loops.
    #[inline]
    pub fn reaction(&self, u: f64, v_delayed: f64, v: f64) -> (f64, f64) {
        (
            u * (1.0 - self.r - u + self.r * v_delayed),
            (self.b * u - self.epsilon * v) * (1.0 - v),
        )
    }

    /// Largest slope of the kinetics on the unit box; bounds the explicit
    /// reaction step.
    pub fn kinetic_lipschitz(&self) -> f64 {
        (self.r + 1.0).max(self.b + self.epsilon)
    }
}

pub fn reaction_terms(p: &ModelParams, u: f64, v_delayed: f64, v: f64) -> Result<(f64, f64)> {
    if !(u.is_finite() && v_delayed.is_finite() && v.is_finite()) {
        return Err(Error::Domain(format!("non-finite state ({u}, {v_delayed}, {v})")));
    }
    Ok(p.reaction(u, v_delayed, v))
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Point {
    pub u: f64,
    pub v: f64,
}

impl Point {
    pub const fn new(u: f64, v: f64) -> Self {
        Self { u, v }
    }

    pub fn dist(&self, other: &Point) -> f64 {
        (self.u - other.u).abs().max((self.v - other.v).abs())
    }
}

/// The four homogeneous states, always in the order `O, alpha1, alpha2, beta`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct EquilibriaSet {
    pub o: Point,
    pub alpha1: Point,
    pub alpha2: Point,
    pub beta: Point,
}

impl EquilibriaSet {
    pub const NAMES: [&'static str; 4] = ["O", "alpha1", "alpha2", "beta"];

    pub fn as_array(&self) -> [Point; 4] {
        [self.o, self.alpha1, self.alpha2, self.beta]
    }
}

/// Magnitudes of the terms that cancel in each reaction component at `q`;
/// rounding in the cancellation is relative to these, not to 1.
pub fn rest_point_scales(p: &ModelParams, q: Point) -> (f64, f64) {
    let (u, v) = (q.u.abs(), q.v.abs());
    ((1.0 + u) * (1.0 + p.r + u + p.r * v), (1.0 + p.b * u + p.epsilon * v) * (1.0 + v))
}

pub fn equilibria(p: &ModelParams) -> Result<EquilibriaSet> {
    let denom = p.b * p.r - p.epsilon;
    if denom <= 0.0 || !denom.is_finite() {
        return Err(Error::Parameter(format!(
            "alpha2 undefined: eps = {} must be below r*b = {}",
            p.epsilon,
            p.r * p.b
        )));
    }
    let set = EquilibriaSet {
        o: Point::new(0.0, 0.0),
        alpha1: Point::new(0.0, 1.0),
        alpha2: Point::new(p.epsilon * (p.r - 1.0) / denom, p.b * (p.r - 1.0) / denom),
        beta: Point::new(1.0, 1.0),
    };
    for (name, q) in EquilibriaSet::NAMES.iter().zip(set.as_array()) {
        let (du, dv) = p.reaction(q.u, q.v, q.v);
        let (su, sv) = rest_point_scales(p, q);
        if du.abs() > 1e-14 * su || dv.abs() > 1e-14 * sv {
            return Err(Error::Numerical(format!("{name} is not a rest point: ({du:e}, {dv:e})")));
        }
    }
    Ok(set)
}

/// Linearisation spectra of the undelayed, unperturbed kinetics at `O` and `beta`.
pub fn homogeneous_spectra(p: &ModelParams) -> ([f64; 2], [f64; 2]) {
    ([0.0, 1.0 - p.r], [-1.0, -p.b])
}

/// Exponents of the linearised profile equations at the origin.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Spectrum {
    pub lambda1: f64,
    pub lambda2: f64,
    pub mu1: f64,
    pub mu2: f64,
}

pub fn profile_char_roots(c: f64, p: &ModelParams) -> Result<Spectrum> {
    if p.r <= 1.0 {
        return Err(Error::Parameter(format!("profile exponents need r > 1, got r = {}", p.r)));
    }
    if p.epsilon < 0.0 || !c.is_finite() {
        return Err(Error::Parameter(format!("need eps >= 0 and finite c, got eps = {}, c = {c}", p.epsilon)));
    }
    let (lambda1, lambda2) = char_roots(c, p.r - 1.0);
    let (mu1, mu2) = char_roots(c, p.epsilon);
    Ok(Spectrum { lambda1, lambda2, mu1, mu2 })
}

/// Two-sided exponential kernel inverting `z'' - c z' - (r - 1) z`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct KernelSpec {
    pub rate: f64,
    /// Exponent used for `s >= 0` (negative root).
    pub lambda_minus: f64,
    /// Exponent used for `s <= 0` (positive root).
    pub lambda_plus: f64,
    pub amplitude: f64,
}

impl KernelSpec {
    pub fn new(c: f64, r: f64) -> Result<Self> {
        if r <= 1.0 {
            return Err(Error::Parameter(format!("kernel needs r > 1, got r = {r}")));
        }
        let rate = (c * c + 4.0 * (r - 1.0)).sqrt();
        let (lambda_minus, lambda_plus) = char_roots(c, r - 1.0);
        Ok(Self {
            rate,
            lambda_minus,
            lambda_plus,
            amplitude: 1.0 / rate,
        })
    }

    pub fn eval(&self, s: f64) -> f64 {
        if s <= 0.0 {
            self.amplitude * (self.lambda_plus * s).exp()
        } else {
            self.amplitude * (self.lambda_minus * s).exp()
        }
    }

    pub fn analytic_mass(&self) -> f64 {
        self.amplitude * (1.0 / self.lambda_plus - 1.0 / self.lambda_minus)
    }

    /// Mass by adaptive quadrature on each half-line, truncated where the
    /// kernel has fallen below `1e-19` of its peak.
    pub fn quadrature_mass(&self) -> f64 {
        let right = 44.0 / -self.lambda_minus;
        let left = 44.0 / self.lambda_plus;
        let f = |s: f64| self.eval(s);
        adaptive_simpson(&f, -left, 0.0, 1e-14) + adaptive_simpson(&f, 0.0, right, 1e-14)
    }
}

/// Total mass of the kernel; analytic and quadrature values must agree.
pub fn kernel_mass(c: f64, r: f64) -> Result<f64> {
    let k = KernelSpec::new(c, r)?;
    let analytic = k.analytic_mass();
    let quad = k.quadrature_mass();
    if (analytic - quad).abs() > 1e-10 {
        return Err(Error::Numerical(format!(
            "kernel mass mismatch: analytic {analytic}, quadrature {quad}"
        )));
    }
    Ok(quad)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn p(r: f64, b: f64, h: f64, e: f64) -> ModelParams {
        ModelParams::new(r, b, h, e).unwrap()
    }

    #[test]
    fn reaction_examples() {
        assert_eq!(reaction_terms(&p(2.0, 2.0, 0.0, 0.0), 1.0, 1.0, 1.0).unwrap(), (0.0, 0.0));
        assert_eq!(reaction_terms(&p(2.0, 2.0, 0.0, 0.0), 0.0, 0.0, 0.0).unwrap(), (0.0, 0.0));
        let (du, dv) = reaction_terms(&p(2.0, 2.0, 0.0, 1.0), 0.5, 0.5, 0.5).unwrap();
        assert_abs_diff_eq!(du, -0.25, epsilon = 1e-15);
        assert_abs_diff_eq!(dv, 0.25, epsilon = 1e-15);
        assert!(matches!(
            reaction_terms(&p(2.0, 2.0, 0.0, 0.0), f64::NAN, 0.0, 0.0),
            Err(Error::Domain(_))
        ));
    }

    #[test]
    fn reaction_accepts_states_outside_the_box() {
        let (du, _) = reaction_terms(&p(2.0, 2.0, 0.0, 0.0), -0.1, 1.2, 1.1).unwrap();
        assert!(du.is_finite());
    }

    #[test]
    fn parameter_validation() {
        assert!(ModelParams::new(2.0, 2.0, 0.0, 4.0).is_err());
        assert!(ModelParams::new(2.0, 2.0, -1.0, 0.0).is_err());
        assert!(ModelParams::new(f64::INFINITY, 2.0, 0.0, 0.0).is_err());
        assert!(p(2.0, 2.0, 0.0, 0.0).is_bistable());
        assert!(!p(0.5, 2.0, 0.0, 0.0).is_bistable());
    }

    #[test]
    fn equilibria_examples() {
        let e = equilibria(&p(2.0, 2.0, 0.0, 1.0)).unwrap();
        assert_abs_diff_eq!(e.alpha2.u, 1.0 / 3.0, epsilon = 1e-15);
        assert_abs_diff_eq!(e.alpha2.v, 2.0 / 3.0, epsilon = 1e-15);
        let e0 = equilibria(&p(2.0, 2.0, 0.0, 0.0)).unwrap();
        assert_eq!(e0.alpha2, Point::new(0.0, 0.5));
        assert_eq!(e0.o, Point::new(0.0, 0.0));
        assert_eq!(e0.beta, Point::new(1.0, 1.0));
        let bad = ModelParams { r: 2.0, b: 2.0, h: 0.0, epsilon: 4.0 };
        assert!(matches!(equilibria(&bad), Err(Error::Parameter(_))));
    }

    #[test]
    fn spectra_examples() {
        assert_eq!(homogeneous_spectra(&p(2.0, 2.0, 0.0, 0.0)), ([0.0, -1.0], [-1.0, -2.0]));
        assert_eq!(homogeneous_spectra(&p(1.0, 1.0, 0.0, 0.0)), ([0.0, 0.0], [-1.0, -1.0]));
        assert_eq!(homogeneous_spectra(&p(5.0, 2.5, 0.0, 0.0)), ([0.0, -4.0], [-1.0, -2.5]));
    }

    #[test]
    fn char_root_examples() {
        let s = profile_char_roots(0.0, &p(2.0, 2.0, 0.0, 0.25)).unwrap();
        assert_abs_diff_eq!(s.lambda1, -1.0, epsilon = 1e-15);
        assert_abs_diff_eq!(s.lambda2, 1.0, epsilon = 1e-15);
        assert_abs_diff_eq!(s.mu1, -0.5, epsilon = 1e-15);
        assert_abs_diff_eq!(s.mu2, 0.5, epsilon = 1e-15);
        let s = profile_char_roots(2.0, &p(2.0, 2.0, 0.0, 0.0)).unwrap();
        assert_abs_diff_eq!(s.lambda2, 1.0 + 2f64.sqrt(), epsilon = 1e-14);
        assert_abs_diff_eq!(s.lambda1, 1.0 - 2f64.sqrt(), epsilon = 1e-14);
        let s = profile_char_roots(1.0, &p(2.0, 2.0, 0.0, 0.0)).unwrap();
        assert_eq!((s.mu1, s.mu2), (0.0, 1.0));
        assert!(profile_char_roots(1.0, &p(1.0, 2.0, 0.0, 0.0)).is_err());
    }

    #[test]
    fn kernel_mass_examples() {
        assert_abs_diff_eq!(kernel_mass(0.5, 2.0).unwrap(), 1.0, epsilon = 1e-10);
        assert_abs_diff_eq!(kernel_mass(1.0, 5.0).unwrap(), 0.25, epsilon = 1e-10);
        let k = KernelSpec::new(0.0, 2.0).unwrap();
        for s in [-3.0, -0.5, 0.0, 0.7, 2.0] {
            assert_abs_diff_eq!(k.eval(s), 0.5 * (-s.abs()).exp(), epsilon = 1e-15);
        }
        assert_abs_diff_eq!(kernel_mass(0.0, 2.0).unwrap(), 1.0, epsilon = 1e-10);
        assert!(kernel_mass(1.0, 1.0).is_err());
    }
}
