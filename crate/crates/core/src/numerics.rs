//! Small numerical kernels: tridiagonal and banded solves, Lagrange
//! interpolation weights, smooth switches, regression and quadrature.

use crate::error::{Error, Result};

/// Roots `(z1, z2)`, `z1 <= z2`, of `z^2 - c z - q = 0` for `q >= 0`,
/// evaluated without cancellation.
pub fn char_roots(c: f64, q: f64) -> (f64, f64) {
    let disc = (c * c + 4.0 * q).sqrt();
    if c >= 0.0 {
        let z2 = 0.5 * (c + disc);
        let z1 = if z2 == 0.0 { 0.0 } else { -q / z2 };
        (z1, z2)
    } else {
        let z1 = 0.5 * (c - disc);
        let z2 = if z1 == 0.0 { 0.0 } else { -q / z1 };
        (z1, z2)
    }
}

/// Solves a tridiagonal system in place of `rhs` (Thomas algorithm).
///
/// `lower[i]` multiplies `x[i-1]` in row `i` (entry 0 unused), `upper[i]`
/// multiplies `x[i+1]` (last entry unused).
pub fn solve_tridiagonal(
    lower: &[f64],
    diag: &[f64],
    upper: &[f64],
    rhs: &mut [f64],
    scratch: &mut Vec<f64>,
) -> Result<()> {
    let n = diag.len();
    scratch.clear();
    scratch.resize(n, 0.0);
    let mut beta = diag[0];
    if beta == 0.0 {
        return Err(Error::Numerical("singular tridiagonal system".into()));
    }
    rhs[0] /= beta;
    for i in 1..n {
        scratch[i] = upper[i - 1] / beta;
        beta = diag[i] - lower[i] * scratch[i];
        if beta == 0.0 {
            return Err(Error::Numerical("singular tridiagonal system".into()));
        }
        rhs[i] = (rhs[i] - lower[i] * rhs[i - 1]) / beta;
    }
    for i in (0..n - 1).rev() {
        rhs[i] -= scratch[i + 1] * rhs[i + 1];
    }
    Ok(())
}

/// Square band matrix with `kl` sub- and `ku` super-diagonals, stored with
/// room for the fill-in produced by partial pivoting.
#[derive(Clone, Debug)]
pub struct BandMatrix {
    n: usize,
    kl: usize,
    ku: usize,
    width: usize,
    data: Vec<f64>,
    pivots: Vec<usize>,
    factored: bool,
}

impl BandMatrix {
    pub fn zeros(n: usize, kl: usize, ku: usize) -> Self {
        let width = 2 * kl + ku + 1;
        Self {
            n,
            kl,
            ku,
            width,
            data: vec![0.0; n * width],
            pivots: Vec::new(),
            factored: false,
        }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn bandwidths(&self) -> (usize, usize) {
        (self.kl, self.ku)
    }

    #[inline]
    fn idx(&self, i: usize, j: usize) -> usize {
        i * self.width + (j + self.kl - i)
    }

    /// Adds `value` at `(i, j)`; panics if the entry lies outside the band.
    #[inline]
    pub fn add(&mut self, i: usize, j: usize, value: f64) {
        assert!(
            j + self.kl >= i && j <= i + self.ku,
            "entry ({i}, {j}) outside band kl={} ku={}",
            self.kl,
            self.ku
        );
        let k = self.idx(i, j);
        self.data[k] += value;
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        if j + self.kl < i || j > i + self.ku + self.kl {
            return 0.0;
        }
        self.data[self.idx(i, j)]
    }

    /// Matrix-vector product with the unfactored matrix.
    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        assert!(!self.factored);
        let mut y = vec![0.0; self.n];
        for (i, yi) in y.iter_mut().enumerate() {
            let lo = i.saturating_sub(self.kl);
            let hi = (i + self.ku).min(self.n - 1);
            *yi = (lo..=hi).map(|j| self.data[self.idx(i, j)] * x[j]).sum();
        }
        y
    }

    /// LU factorisation with partial pivoting (row interchanges).
    pub fn factor(&mut self) -> Result<()> {
        let n = self.n;
        let reach = self.kl + self.ku;
        self.pivots = vec![0; n];
        for i in 0..n {
            let last_row = (i + self.kl).min(n - 1);
            let mut p = i;
            let mut best = self.data[self.idx(i, i)].abs();
            for row in i + 1..=last_row {
                let v = self.data[self.idx(row, i)].abs();
                if v > best {
                    best = v;
                    p = row;
                }
            }
            if best == 0.0 || !best.is_finite() {
                return Err(Error::Numerical(format!("singular band matrix at column {i}")));
            }
            self.pivots[i] = p;
            let last_col = (i + reach).min(n - 1);
            if p != i {
                for j in i..=last_col {
                    let a = self.idx(i, j);
                    let b = self.idx(p, j);
                    self.data.swap(a, b);
                }
            }
            let pivot = self.data[self.idx(i, i)];
            for row in i + 1..=last_row {
                let k = self.idx(row, i);
                let factor = self.data[k] / pivot;
                self.data[k] = factor;
                if factor != 0.0 {
                    for j in i + 1..=last_col {
                        let src = self.data[self.idx(i, j)];
                        let dst = self.idx(row, j);
                        self.data[dst] -= factor * src;
                    }
                }
            }
        }
        self.factored = true;
        Ok(())
    }

    /// Solves `A x = b` in place using the stored factorisation.
    pub fn solve_in_place(&self, b: &mut [f64]) {
        assert!(self.factored, "factor() must be called first");
        let n = self.n;
        let reach = self.kl + self.ku;
        for i in 0..n {
            let p = self.pivots[i];
            if p != i {
                b.swap(i, p);
            }
            let bi = b[i];
            for (row, br) in b.iter_mut().enumerate().take((i + self.kl).min(n - 1) + 1).skip(i + 1) {
                *br -= self.data[self.idx(row, i)] * bi;
            }
        }
        for i in (0..n).rev() {
            let last_col = (i + reach).min(n - 1);
            let mut s = b[i];
            for (j, bj) in b.iter().enumerate().take(last_col + 1).skip(i + 1) {
                s -= self.data[self.idx(i, j)] * bj;
            }
            b[i] = s / self.data[self.idx(i, i)];
        }
    }
}

/// Cubic Lagrange weights on nodes `0, 1, 2, 3` at fractional position
/// `t`, together with the weights of the derivative with respect to `t`.
pub fn cubic_weights(t: f64) -> ([f64; 4], [f64; 4]) {
    let d = [t, t - 1.0, t - 2.0, t - 3.0];
    let w = [
        -d[1] * d[2] * d[3] / 6.0,
        d[0] * d[2] * d[3] / 2.0,
        -d[0] * d[1] * d[3] / 2.0,
        d[0] * d[1] * d[2] / 6.0,
    ];
    let dw = [
        -(d[2] * d[3] + d[1] * d[3] + d[1] * d[2]) / 6.0,
        (d[2] * d[3] + d[0] * d[3] + d[0] * d[2]) / 2.0,
        -(d[1] * d[3] + d[0] * d[3] + d[0] * d[1]) / 2.0,
        (d[1] * d[2] + d[0] * d[2] + d[0] * d[1]) / 6.0,
    ];
    (w, dw)
}

/// Stencil start and cubic weights for sampling a uniform series of `len`
/// values at fractional index `pos`, keeping the stencil inside the data.
pub fn cubic_stencil(pos: f64, len: usize) -> (usize, [f64; 4], [f64; 4]) {
    debug_assert!(len >= 4);
    let base = pos.floor() as isize - 1;
    let start = base.clamp(0, len as isize - 4) as usize;
    let (w, dw) = cubic_weights(pos - start as f64);
    (start, w, dw)
}

/// Cubic interpolation of a uniform series at fractional index `pos`.
pub fn cubic_sample(values: &[f64], pos: f64) -> f64 {
    let (s, w, _) = cubic_stencil(pos, values.len());
    w[0] * values[s] + w[1] * values[s + 1] + w[2] * values[s + 2] + w[3] * values[s + 3]
}

/// Six-point Lagrange interpolation at fractional index `pos`.
pub fn quintic_sample(values: &[f64], pos: f64) -> f64 {
    let len = values.len();
    let start = (pos.floor() as isize - 2).clamp(0, len as isize - 6) as usize;
    let t = pos - start as f64;
    let mut acc = 0.0;
    for k in 0..6 {
        let mut w = 1.0;
        for q in 0..6 {
            if q != k {
                w *= (t - q as f64) / (k as f64 - q as f64);
            }
        }
        acc += w * values[start + k];
    }
    acc
}

/// Cubic smoothstep `3s^2 - 2s^3`, clamped to `[0, 1]`.
pub fn smoothstep3(s: f64) -> f64 {
    let s = s.clamp(0.0, 1.0);
    s * s * (3.0 - 2.0 * s)
}

/// Quintic smoothstep `6s^5 - 15s^4 + 10s^3` and its first two derivatives.
pub fn smoothstep5(s: f64) -> (f64, f64, f64) {
    if s <= 0.0 {
        return (0.0, 0.0, 0.0);
    }
    if s >= 1.0 {
        return (1.0, 0.0, 0.0);
    }
    let s2 = s * s;
    let v = s2 * s * (10.0 + s * (-15.0 + 6.0 * s));
    let d1 = 30.0 * s2 * (1.0 - s) * (1.0 - s);
    let d2 = 60.0 * s * (1.0 - s) * (1.0 - 2.0 * s);
    (v, d1, d2)
}

/// Ordinary least squares fit `y = slope * x + intercept`.
#[derive(Clone, Copy, Debug, PartialEq, serde::Serialize)]
pub struct LinearFit {
    pub slope: f64,
    pub intercept: f64,
    pub r2: f64,
    pub samples: usize,
}

pub fn linear_fit(xs: &[f64], ys: &[f64]) -> Result<LinearFit> {
    let n = xs.len();
    if n < 2 || n != ys.len() {
        return Err(Error::InsufficientData(format!("linear fit needs >= 2 paired samples, got {n}")));
    }
    let nf = n as f64;
    let mx = xs.iter().sum::<f64>() / nf;
    let my = ys.iter().sum::<f64>() / nf;
    let (mut sxx, mut sxy, mut syy) = (0.0, 0.0, 0.0);
    for (x, y) in xs.iter().zip(ys) {
        let dx = x - mx;
        let dy = y - my;
        sxx += dx * dx;
        sxy += dx * dy;
        syy += dy * dy;
    }
    if sxx == 0.0 {
        return Err(Error::InsufficientData("degenerate abscissae in linear fit".into()));
    }
    let slope = sxy / sxx;
    let ss_res: f64 = xs
        .iter()
        .zip(ys)
        .map(|(x, y)| {
            let e = y - (my + slope * (x - mx));
            e * e
        })
        .sum();
    let r2 = if syy == 0.0 { 1.0 } else { 1.0 - ss_res / syy };
    Ok(LinearFit {
        slope,
        intercept: my - slope * mx,
        r2,
        samples: n,
    })
}

/// `int_0^dx e^(mu s) (1 - s/dx) ds` and `int_0^dx e^(mu s) s/dx ds`.
pub fn exp_product_weights(mu: f64, dx: f64) -> (f64, f64) {
    let z = mu * dx;
    if z.abs() < 1e-4 {
        return (dx * (0.5 + z / 6.0 + z * z / 24.0), dx * (0.5 + z / 3.0 + z * z / 8.0));
    }
    let em1 = z.exp_m1();
    ((em1 - z) / (mu * z), (z * em1 - em1 + z) / (mu * z))
}

/// Adaptive Simpson quadrature of `f` on `[a, b]` to absolute tolerance `tol`.
pub fn adaptive_simpson<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, tol: f64) -> f64 {
    let fa = f(a);
    let fb = f(b);
    let m = 0.5 * (a + b);
    let fm = f(m);
    let whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    simpson_step(f, a, b, fa, fm, fb, whole, tol, 50)
}

#[allow(clippy::too_many_arguments)]
fn simpson_step<F: Fn(f64) -> f64>(
    f: &F,
    a: f64,
    b: f64,
    fa: f64,
    fm: f64,
    fb: f64,
    whole: f64,
    tol: f64,
    depth: u32,
) -> f64 {
    let m = 0.5 * (a + b);
    let lm = 0.5 * (a + m);
    let rm = 0.5 * (m + b);
    let flm = f(lm);
    let frm = f(rm);
    let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    let delta = left + right - whole;
    if depth == 0 || delta.abs() <= 15.0 * tol {
        return left + right + delta / 15.0;
    }
    simpson_step(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1)
        + simpson_step(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn char_roots_satisfy_vieta() {
        for &(c, q) in &[(0.0, 1.0), (1.3, 0.2), (-0.7, 3.0), (2.0, 0.0), (0.0, 0.0)] {
            let (z1, z2) = char_roots(c, q);
            assert!(z1 <= z2);
            assert_abs_diff_eq!(z1 + z2, c, epsilon = 1e-14);
            assert_abs_diff_eq!(z1 * z2, -q, epsilon = 1e-14);
        }
    }

    #[test]
    fn tridiagonal_matches_dense() {
        let n = 6;
        let lower: Vec<f64> = (0..n).map(|i| -1.0 - 0.1 * i as f64).collect();
        let upper: Vec<f64> = (0..n).map(|i| -0.5 + 0.05 * i as f64).collect();
        let diag = vec![4.0; n];
        let x: Vec<f64> = (0..n).map(|i| (i as f64).sin()).collect();
        let mut b = vec![0.0; n];
        for i in 0..n {
            b[i] = diag[i] * x[i];
            if i > 0 {
                b[i] += lower[i] * x[i - 1];
            }
            if i + 1 < n {
                b[i] += upper[i] * x[i + 1];
            }
        }
        let mut scratch = Vec::new();
        solve_tridiagonal(&lower, &diag, &upper, &mut b, &mut scratch).unwrap();
        for i in 0..n {
            assert_abs_diff_eq!(b[i], x[i], epsilon = 1e-13);
        }
    }

    #[test]
    fn band_lu_needs_pivoting_and_solves() {
        // Zero on the diagonal forces row interchanges.
        let n = 40;
        let (kl, ku) = (3, 2);
        let mut a = BandMatrix::zeros(n, kl, ku);
        for i in 0..n {
            for j in i.saturating_sub(kl)..=(i + ku).min(n - 1) {
                let v = if i == j && i % 3 == 0 {
                    0.0
                } else {
                    ((i * 7 + j * 3) % 11) as f64 - 5.0 + if i == j { 0.5 } else { 0.0 }
                };
                a.add(i, j, v);
            }
        }
        let x: Vec<f64> = (0..n).map(|i| 1.0 + (i as f64 * 0.37).cos()).collect();
        let mut b = a.mul_vec(&x);
        a.factor().unwrap();
        a.solve_in_place(&mut b);
        for i in 0..n {
            assert_abs_diff_eq!(b[i], x[i], epsilon = 1e-9);
        }
    }

    #[test]
    fn cubic_weights_reproduce_cubics() {
        let f = |x: f64| 1.0 - 2.0 * x + 0.5 * x * x - 0.25 * x * x * x;
        let df = |x: f64| -2.0 + x - 0.75 * x * x;
        for &t in &[0.0, 0.3, 1.0, 1.7, 2.9, 3.0] {
            let (w, dw) = cubic_weights(t);
            let v: f64 = (0..4).map(|k| w[k] * f(k as f64)).sum();
            let dv: f64 = (0..4).map(|k| dw[k] * f(k as f64)).sum();
            assert_abs_diff_eq!(v, f(t), epsilon = 1e-13);
            assert_abs_diff_eq!(dv, df(t), epsilon = 1e-13);
        }
    }

    #[test]
    fn quintic_sample_is_exact_on_quintics() {
        let vals: Vec<f64> = (0..10).map(|i| (i as f64).powi(5) - 3.0 * i as f64).collect();
        let x = 4.37_f64;
        assert_abs_diff_eq!(quintic_sample(&vals, x), x.powi(5) - 3.0 * x, epsilon = 1e-8);
    }

    #[test]
    fn smoothstep5_derivatives_match_differences() {
        let h = 1e-6;
        for &s in &[0.1, 0.5, 0.83] {
            let (_, d1, d2) = smoothstep5(s);
            let fd1 = (smoothstep5(s + h).0 - smoothstep5(s - h).0) / (2.0 * h);
            let fd2 = (smoothstep5(s + h).1 - smoothstep5(s - h).1) / (2.0 * h);
            assert_abs_diff_eq!(d1, fd1, epsilon = 1e-7);
            assert_abs_diff_eq!(d2, fd2, epsilon = 1e-6);
        }
    }

    #[test]
    fn linear_fit_recovers_line() {
        let xs: Vec<f64> = (0..20).map(f64::from).collect();
        let ys: Vec<f64> = xs.iter().map(|x| 1.3 * x - 2.0).collect();
        let fit = linear_fit(&xs, &ys).unwrap();
        assert_abs_diff_eq!(fit.slope, 1.3, epsilon = 1e-12);
        assert_abs_diff_eq!(fit.r2, 1.0, epsilon = 1e-12);
    }

    #[test]
    fn simpson_integrates_exponential() {
        let v = adaptive_simpson(&|x: f64| (-x).exp(), 0.0, 40.0, 1e-13);
        assert_abs_diff_eq!(v, 1.0 - (-40.0_f64).exp(), epsilon = 1e-11);
    }
}
