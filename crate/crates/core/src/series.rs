//! Coefficient-level quantities of the flattened Cauchy problem.
//!
//! With `a_n` the Taylor coefficients of `gamma_1' + i gamma_2'` at `t0`, the
//! coefficient function of the flattened system is
//! `Lambda(x) = i a_0 / (gamma_1'(x) + i gamma_2'(x)) = sum b_n (x - t0)^n`
//! and `c_n` are the coefficients of `Lambda Theta'`. The local extension
//! distance is governed by `r0 = min{1 / sup_n |b_n|^{1/n}, R2}` where `R2`
//! is the radius of convergence of the `c` series.

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::jet::{LocalJet, MIN_PIVOT};

/// Minimum number of usable coefficients for a Cauchy-Hadamard fit.
pub const MIN_FIT_COEFFS: usize = 8;

/// Taylor coefficients of `Lambda` from those of `gamma'`.
///
/// `b_0 = i` and `b_n = -(1/a_0) sum_{k=1}^{n} a_k b_{n-k}`.
pub fn lambda_jet(a: &LocalJet) -> Result<LocalJet> {
    let a0 = a.coeff(0);
    if a0.norm() <= MIN_PIVOT {
        return Err(Error::DegenerateCurve { t: a.base(), speed: a0.norm() });
    }
    let inv = 1.0 / a0;
    let mut b = Vec::with_capacity(a.order() + 1);
    b.push(Complex64::new(0.0, 1.0));
    for n in 1..=a.order() {
        let s: Complex64 = (1..=n).map(|k| a.coeff(k) * b[n - k]).sum();
        b.push(-s * inv);
    }
    Ok(LocalJet::new(a.base(), b))
}

/// `b_n = i det(A_n) / a_0^n`, with `A_n` the `(n+1) x (n+1)` matrix whose
/// first row is `(0, a_1, ..., a_n)`, whose first column is `e_{n+1}`, and
/// whose remaining block is the upper triangular Toeplitz band of the `a_i`.
///
/// This is an independent route to the coefficients of [`lambda_jet`].
pub fn lambda_coeff_det(a: &LocalJet, n: usize) -> Complex64 {
    assert!(n >= 1 && n <= a.order(), "index out of range");
    let m = DMatrix::<Complex64>::from_fn(n + 1, n + 1, |i, j| {
        if j == 0 {
            if i == n { Complex64::new(1.0, 0.0) } else { Complex64::new(0.0, 0.0) }
        } else if i == 0 {
            a.coeff(j)
        } else if j >= i {
            a.coeff(j - i)
        } else {
            Complex64::new(0.0, 0.0)
        }
    });
    Complex64::new(0.0, 1.0) * m.determinant() / a.coeff(0).powu(n as u32)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RadiusMethod {
    ExactRoots,
    CauchyHadamardFit,
    DeclaredEntire,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RadiusEstimate {
    #[serde(with = "crate::serde_ext::extended")]
    pub value: f64,
    pub method: RadiusMethod,
    pub note: String,
}

impl RadiusEstimate {
    pub fn entire(note: impl Into<String>) -> Self {
        Self { value: f64::INFINITY, method: RadiusMethod::DeclaredEntire, note: note.into() }
    }

    pub fn exact(value: f64, note: impl Into<String>) -> Self {
        Self { value, method: RadiusMethod::ExactRoots, note: note.into() }
    }

    /// The smaller of two estimates; ties keep `self`.
    pub fn min(self, other: Self) -> Self {
        if other.value < self.value { other } else { self }
    }
}

/// What is known about the function whose Taylor series is being assessed.
#[derive(Debug, Clone, PartialEq)]
pub enum Provenance {
    /// All singularities are known; `period` wraps real parts on closed curves.
    Singularities { points: Vec<Complex64>, period: Option<f64> },
    /// The function continues to an entire function.
    Entire,
    /// Only the coefficients are trusted.
    CoefficientsOnly,
}

/// Radius of convergence of `jet` using the best method its provenance allows.
pub fn radius_estimate(jet: &LocalJet, meta: &Provenance) -> Result<RadiusEstimate> {
    match meta {
        Provenance::Entire => Ok(RadiusEstimate::entire("entire continuation")),
        Provenance::Singularities { points, period } => {
            let t0 = jet.base();
            let d = points
                .iter()
                .map(|z| {
                    let mut dx = t0 - z.re;
                    if let Some(p) = period {
                        dx = dx - p * (dx / p).round();
                    }
                    dx.hypot(z.im)
                })
                .fold(f64::INFINITY, f64::min);
            if d.is_infinite() {
                Ok(RadiusEstimate::exact(d, "no singular points"))
            } else {
                Ok(RadiusEstimate::exact(d, format!("{} singular points", points.len())))
            }
        }
        Provenance::CoefficientsOnly => fit_radius(jet),
    }
}

/// Largest order of the linear recurrence fitted by [`fit_radius`].
pub const MAX_PREDICTION_ORDER: usize = 4;

/// Coefficient-based estimate of the radius of convergence from the upper
/// half of the available orders.
///
/// A first estimate `R` comes from a least-squares fit of
/// `log|c_n| ~ alpha + beta n + p log n` over the upper concave envelope of
/// the points. The rescaled coefficients `c_n R^n` are then fitted by a
/// linear recurrence of order at most four (minimum-norm least squares), and
/// the largest root `lambda` of its characteristic polynomial gives
/// `R / |lambda|`. The recurrence absorbs the oscillation produced by
/// singularities of equal distance, where a plain log-slope fit is biased;
/// the rescaling keeps the extraneous roots of an overdetermined order
/// inside the unit circle. The refinement is applied twice.
pub fn fit_radius(jet: &LocalJet) -> Result<RadiusEstimate> {
    let k = jet.order();
    let lo = (k / 2).max(1);
    let scale = jet.coeffs().iter().map(|c| c.norm()).fold(0.0, f64::max);
    let pts: Vec<(f64, f64)> = (lo..=k)
        .filter_map(|n| {
            let m = jet.coeff(n).norm();
            (m > 1e-14 * scale && m > 0.0).then(|| (n as f64, m.ln()))
        })
        .collect();
    if pts.len() < MIN_FIT_COEFFS {
        // A jet with (numerically) finitely many nonzero coefficients is a polynomial.
        let tail_zero = jet.coeffs()[lo..].iter().all(|c| c.norm() <= 1e-14 * scale);
        if tail_zero && k >= 2 * MIN_FIT_COEFFS {
            return Ok(RadiusEstimate::entire("coefficients vanish beyond the lower half"));
        }
        return Err(Error::InsufficientOrder { needed: MIN_FIT_COEFFS, found: pts.len() });
    }
    let hull = upper_hull(&pts);
    let beta = lsq_slope(&hull, hull.len() >= 6);
    let mut value = (-beta).exp();
    let mut note = format!("envelope slope over orders {lo}..{k}");
    for _ in 0..2 {
        match prediction_root(jet, lo, value) {
            Some(lambda) => {
                value /= lambda;
                note = format!("linear-prediction fit over orders {lo}..{k}");
            }
            None => break,
        }
    }
    Ok(RadiusEstimate { value, method: RadiusMethod::CauchyHadamardFit, note })
}

/// Largest characteristic root of the recurrence fitted to `c_n r^n`, `n >= lo`.
fn prediction_root(jet: &LocalJet, lo: usize, r: f64) -> Option<f64> {
    let k = jet.order();
    let len = k + 1 - lo;
    let m = MAX_PREDICTION_ORDER.min(len / 3);
    if m == 0 || !r.is_finite() || r <= 0.0 {
        return None;
    }
    // Normalise to the largest rescaled coefficient to keep the system well scaled.
    let x: Vec<Complex64> = (lo..=k).map(|n| jet.coeff(n) * r.powi((n - lo) as i32)).collect();
    let norm = x.iter().map(|c| c.norm()).fold(0.0, f64::max);
    if !(norm > 0.0 && norm.is_finite()) {
        return None;
    }
    let x: Vec<Complex64> = x.iter().map(|c| c / norm).collect();
    let rows = len - m;
    let a = DMatrix::<Complex64>::from_fn(rows, m, |i, j| x[i + m - 1 - j]);
    let y = nalgebra::DVector::<Complex64>::from_iterator(rows, (0..rows).map(|i| x[i + m]));
    let svd = a.svd(true, true);
    let tol = 1e-10 * svd.singular_values.max();
    let alpha = svd.solve(&y, tol).ok()?;
    // z^m - alpha_1 z^{m-1} - ... - alpha_m, lowest degree first.
    let mut p: Vec<Complex64> = (0..m).map(|j| -alpha[m - 1 - j]).collect();
    p.push(Complex64::new(1.0, 0.0));
    let lambda = crate::poly::roots(&p).iter().map(|z| z.norm()).fold(0.0, f64::max);
    (lambda > 0.0 && lambda.is_finite()).then_some(lambda)
}

fn upper_hull(pts: &[(f64, f64)]) -> Vec<(f64, f64)> {
    let mut hull: Vec<(f64, f64)> = Vec::new();
    for &p in pts {
        while hull.len() >= 2 {
            let (a, b) = (hull[hull.len() - 2], hull[hull.len() - 1]);
            let cross = (b.0 - a.0) * (p.1 - a.1) - (b.1 - a.1) * (p.0 - a.0);
            if cross >= 0.0 {
                hull.pop();
            } else {
                break;
            }
        }
        hull.push(p);
    }
    hull
}

/// Least-squares coefficient of `n` in `y ~ alpha + beta n (+ p log n)`.
fn lsq_slope(pts: &[(f64, f64)], with_log: bool) -> f64 {
    let cols = if with_log { 3 } else { 2 };
    let a = DMatrix::<f64>::from_fn(pts.len(), cols, |i, j| match j {
        0 => 1.0,
        1 => pts[i].0,
        _ => pts[i].0.ln(),
    });
    let y = nalgebra::DVector::<f64>::from_iterator(pts.len(), pts.iter().map(|p| p.1));
    let svd = a.svd(true, true);
    let x = svd.solve(&y, 1e-14).expect("svd solve with u and v computed");
    x[1]
}

/// `sup_{1<=n<=K} |b_n|^{1/n}` with bookkeeping about truncation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SupRoot {
    /// Truncated supremum.
    pub estimate: f64,
    /// Order at which the truncated supremum is attained (0 if all `b_n` vanish).
    pub attained_at: usize,
    /// The running maximum was still growing in the top quarter of orders.
    pub rising: bool,
    /// Certified upper bound for the untruncated supremum, when one is known.
    #[serde(with = "crate::serde_ext::extended_opt")]
    pub certified: Option<f64>,
}

impl SupRoot {
    /// The value to use when a guaranteed (never overstated) distance is needed.
    pub fn guaranteed(&self) -> f64 {
        match (self.rising, self.certified) {
            (true, Some(c)) => c.max(self.estimate),
            _ => self.estimate,
        }
    }
}

pub fn sup_root(b: &LocalJet, fallback_bound: Option<f64>) -> SupRoot {
    let k = b.order();
    let roots: Vec<f64> = (1..=k).map(|n| b.coeff(n).norm().powf(1.0 / n as f64)).collect();
    let mut best = (0.0, 0usize);
    for (i, &v) in roots.iter().enumerate() {
        if v > best.0 {
            best = (v, i + 1);
        }
    }
    let head = (3 * k) / 4;
    let head_max = roots[..head.max(1).min(roots.len())].iter().copied().fold(0.0, f64::max);
    let rising = k >= 4 && best.1 > head && best.0 > head_max * (1.0 + 1e-9);
    SupRoot {
        estimate: best.0,
        attained_at: best.1,
        rising,
        certified: fallback_bound.filter(|v| v.is_finite()),
    }
}

/// `min{1/sup, R2}` with `1/0 = +inf`.
pub fn r0(sup_root_value: f64, r2: &RadiusEstimate) -> f64 {
    let inv = if sup_root_value > 0.0 { 1.0 / sup_root_value } else { f64::INFINITY };
    inv.min(r2.value)
}

/// `M_1(r) = sup{1, |b_1| r, |b_2| r^2, ...}` over the available orders.
pub fn m1(b: &LocalJet, r: f64) -> f64 {
    (1..=b.order())
        .map(|n| b.coeff(n).norm() * r.powi(n as i32))
        .fold(1.0, f64::max)
}

/// `M_2(r) = sup{|c_0|, |c_1| r, ...}` over the available orders.
pub fn m2(c: &LocalJet, r: f64) -> f64 {
    (0..=c.order())
        .map(|n| c.coeff(n).norm() * r.powi(n as i32))
        .fold(0.0, f64::max)
}

/// Parameters of the majorant `(M2/M1) V(x - t0, y)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MajorantParams {
    pub r: f64,
    pub m1: f64,
    pub m2: f64,
    #[serde(with = "crate::serde_ext::extended")]
    pub r0: f64,
}

impl MajorantParams {
    /// Picks the majorant radius.
    ///
    /// `r = r0` when that lies strictly below `r_limit = min{R1, R2}`;
    /// otherwise `r` sits just below `r_limit`. An infinite choice is replaced
    /// by `r_cap`.
    pub fn choose(b: &LocalJet, c: &LocalJet, r0: f64, r_limit: f64, r_cap: f64) -> Self {
        let mut r = if r0 < r_limit { r0 } else { r_limit * (1.0 - 1e-3) };
        if !r.is_finite() || r > r_cap {
            r = r_cap;
        }
        Self::at(b, c, r, r0)
    }

    pub fn at(b: &LocalJet, c: &LocalJet, r: f64, r0: f64) -> Self {
        Self { r, m1: m1(b, r), m2: m2(c, r), r0 }
    }

    /// Membership of `(X, Y) = (x - t0, y)` in the convergence region
    /// `|X| < r, |Y| < (r - |X|)^2 / (2 M1 r)`.
    pub fn contains(&self, x: f64, y: f64) -> bool {
        let ax = x.abs();
        ax < self.r && y.abs() < (self.r - ax).powi(2) / (2.0 * self.m1 * self.r)
    }

    /// `(M2/M1) V(X, Y)` for real arguments inside the region.
    pub fn value(&self, x: f64, y: f64) -> f64 {
        let r = self.r;
        let disc = (r - x).powi(2) - 2.0 * self.m1 * r * y;
        self.m2 / self.m1 * (r - x - disc.max(0.0).sqrt())
    }

    /// Taylor coefficients `v[l][k]` of `(M2/M1) V` for `l <= ky`, `k <= kx + ky - l`.
    ///
    /// Expanding the square root in `y` and `(r - x)^{1-2l}` in `x`:
    /// `v_{k,l} = (M2/M1) beta_l (2 M1 r)^l r^{1-2l-k} C(2l-2+k, k)` for `l >= 1`,
    /// with `beta_l = |binom(1/2, l)|`, and `v_{k,0} = 0`.
    pub fn coefficient_table(&self, kx: usize, ky: usize) -> Vec<Vec<f64>> {
        let (r, m1) = (self.r, self.m1);
        let ratio = self.m2 / m1;
        let mut table = vec![vec![0.0; kx + ky + 1]];
        let mut beta = 0.5;
        for l in 1..=ky {
            if l > 1 {
                beta *= (2 * l - 3) as f64 / (2 * l) as f64;
            }
            let width = kx + ky - l;
            let mut row = Vec::with_capacity(width + 1);
            // k = 0 term, then C(2l-2+k, k) r^{-k} by recurrence.
            let mut term = ratio * beta * (2.0 * m1 / r).powi(l as i32) * r;
            for k in 0..=width {
                if k > 0 {
                    term *= (2 * l - 2 + k) as f64 / (k as f64 * r);
                }
                row.push(term);
            }
            table.push(row);
        }
        table
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "verdict", rename_all = "snake_case")]
pub enum MajorantVerdict {
    Pass,
    Violation { k: usize, l: usize, coefficient: f64, bound: f64 },
}

impl MajorantVerdict {
    pub fn passed(&self) -> bool {
        matches!(self, Self::Pass)
    }
}

/// Checks `|phi_{k,l}| <= v_{k,l}` entrywise (Taylor coefficients, equivalently
/// derivatives scaled by `k! l!`), scanning `l` outermost.
///
/// `phi[l][k]` follows the layout of [`MajorantParams::coefficient_table`].
pub fn majorant_check(params: &MajorantParams, phi: &[Vec<Complex64>]) -> MajorantVerdict {
    let ky = phi.len().saturating_sub(1);
    let kx = phi.first().map_or(0, |row| row.len().saturating_sub(1 + ky));
    let table = params.coefficient_table(kx, ky);
    for (l, row) in phi.iter().enumerate() {
        for (k, p) in row.iter().enumerate() {
            let bound = table[l].get(k).copied().unwrap_or(0.0);
            let coefficient = p.norm();
            if coefficient > bound * (1.0 + 1e-10) + 1e-300 {
                return MajorantVerdict::Violation { k, l, coefficient, bound };
            }
        }
    }
    MajorantVerdict::Pass
}

/// Grid search for `sup_{0 < r < min{R1, R2}} r / (2 M1(r))` with both radii
/// capped at `1e3`.
///
/// 5000 log-spaced samples locate the maximiser, then 5000 uniform samples
/// within 1% of it refine the value. This is the direct evaluation of the
/// supremum that [`r0`] expresses in closed form.
pub fn brute_r0_oracle(b: &LocalJet, r1: f64, r2: f64) -> f64 {
    let top = r1.min(r2).min(1e3);
    let f = |r: f64| r / (2.0 * m1(b, r));
    let n = 5000;
    let lo = top * 1e-9;
    let mut best = (0.0, lo);
    for i in 0..n {
        let r = lo * (top / lo).powf(i as f64 / n as f64);
        let v = f(r);
        if v > best.0 {
            best = (v, r);
        }
    }
    let (a, z) = (best.1 / 1.01, (best.1 * 1.01).min(top * (1.0 - 1e-12)));
    for i in 0..n {
        let r = a + (z - a) * i as f64 / (n - 1) as f64;
        let v = f(r);
        if v > best.0 {
            best = (v, r);
        }
    }
    best.0
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::curve::CurveModel;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn circle_lambda_has_factorial_moduli() {
        let a = CurveModel::circle(1.0).unwrap().curve_jet(0.4, 12);
        let b = lambda_jet(&a).unwrap();
        assert_eq!(b.coeff(0), c(0.0, 1.0));
        let mut fact = 1.0;
        for n in 0..=12 {
            if n > 0 {
                fact *= n as f64;
            }
            assert!((b.coeff(n).norm() - 1.0 / fact).abs() < 1e-15, "n = {n}");
        }
    }

    #[test]
    fn flat_line_lambda_is_constant() {
        let b = lambda_jet(&CurveModel::flat_line(1.0).unwrap().curve_jet(0.2, 6)).unwrap();
        assert_eq!(b.coeff(0), c(0.0, 1.0));
        assert!(b.coeffs()[1..].iter().all(|x| x.norm() == 0.0));
    }

    #[test]
    fn parabola_lambda_is_geometric() {
        for &t0 in &[0.0, 0.3, -1.2] {
            let b = lambda_jet(&CurveModel::parabola(2.0).unwrap().curve_jet(t0, 10)).unwrap();
            let q = c(0.0, -2.0) / c(1.0, 2.0 * t0);
            for n in 0..=10 {
                let expect = c(0.0, 1.0) * q.powu(n as u32);
                assert!((b.coeff(n) - expect).norm() < 1e-13 * expect.norm().max(1.0));
            }
        }
    }

    #[test]
    fn determinant_route_for_first_coefficient() {
        let a = LocalJet::new(0.0, vec![c(1.5, -0.5), c(0.2, 0.7), c(-0.3, 0.1)]);
        let by_det = lambda_coeff_det(&a, 1);
        let by_hand = c(0.0, -1.0) * a.coeff(1) / a.coeff(0);
        assert!((by_det - by_hand).norm() < 1e-15);
        let b = lambda_jet(&a).unwrap();
        assert!((lambda_coeff_det(&a, 2) - b.coeff(2)).norm() < 1e-14);
    }

    #[test]
    fn circle_second_coefficient_by_determinant() {
        let a = CurveModel::circle(1.0).unwrap().curve_jet(0.0, 4);
        assert!((lambda_coeff_det(&a, 2).norm() - 0.5).abs() < 1e-15);
    }

    #[test]
    fn sup_root_model_values() {
        let circle = lambda_jet(&CurveModel::circle(1.0).unwrap().curve_jet(0.0, 32)).unwrap();
        let s = sup_root(&circle, None);
        assert!((s.estimate - 1.0).abs() < 1e-15 && s.attained_at == 1 && !s.rising);
        let flat = lambda_jet(&CurveModel::flat_line(1.0).unwrap().curve_jet(0.0, 32)).unwrap();
        assert_eq!(sup_root(&flat, None).estimate, 0.0);
        let par = lambda_jet(&CurveModel::parabola(1.0).unwrap().curve_jet(0.0, 32)).unwrap();
        let s = sup_root(&par, None);
        assert!((s.estimate - 2.0).abs() < 1e-13 && !s.rising);
    }

    #[test]
    fn r0_model_values() {
        assert_eq!(r0(1.0, &RadiusEstimate::entire("")), 1.0);
        assert_eq!(r0(0.0, &RadiusEstimate::exact(0.7, "")), 0.7);
        assert_eq!(r0(2.0, &RadiusEstimate::exact(0.5, "")), 0.5);
        assert_eq!(r0(0.0, &RadiusEstimate::entire("")), f64::INFINITY);
    }

    #[test]
    fn fit_recovers_pole_distance() {
        // 1/(1 - x/a)^2 has coefficients (n+1) a^{-n}.
        let a: f64 = 0.8;
        let jet = LocalJet::new(0.0, (0..=32).map(|n| c((n + 1) as f64 * a.powi(-(n as i32)), 0.0)).collect());
        let est = fit_radius(&jet).unwrap();
        assert_eq!(est.method, RadiusMethod::CauchyHadamardFit);
        assert!((est.value - a).abs() < 0.02 * a, "{}", est.value);
    }

    #[test]
    fn fit_needs_enough_coefficients() {
        let jet = LocalJet::new(0.0, (0..=10).map(|n| c(0.5f64.powi(n), 0.0)).collect());
        assert!(matches!(fit_radius(&jet), Err(Error::InsufficientOrder { .. })));
    }

    #[test]
    fn majorant_table_matches_closed_form() {
        let p = MajorantParams { r: 0.9, m1: 1.7, m2: 0.6, r0: 0.9 };
        let t = p.coefficient_table(30, 30);
        let (x, y) = (0.12, 0.03);
        assert!(p.contains(x, y));
        let series: f64 = t
            .iter()
            .enumerate()
            .map(|(l, row)| row.iter().enumerate().map(|(k, v)| v * x.powi(k as i32) * y.powi(l as i32)).sum::<f64>())
            .sum();
        assert!((series - p.value(x, y)).abs() < 1e-12, "{series} vs {}", p.value(x, y));
    }

    #[test]
    fn majorant_check_flags_first_violation() {
        let p = MajorantParams { r: 1.0, m1: 1.0, m2: 2.0, r0: 1.0 };
        let t = p.coefficient_table(4, 4);
        let doubled: Vec<Vec<Complex64>> = t.iter().map(|row| row.iter().map(|v| c(2.0 * v, 0.0)).collect()).collect();
        assert_eq!(
            majorant_check(&p, &doubled),
            MajorantVerdict::Violation { k: 0, l: 1, coefficient: 2.0 * t[1][0], bound: t[1][0] }
        );
        let zero: Vec<Vec<Complex64>> = t.iter().map(|row| vec![c(0.0, 0.0); row.len()]).collect();
        assert!(majorant_check(&p, &zero).passed());
    }

    #[test]
    fn oracle_on_geometric_coefficients() {
        let q: f64 = 1.3;
        let b = LocalJet::new(0.0, (0..=32).map(|n| c(q.powi(n), 0.0)).collect());
        let got = brute_r0_oracle(&b, 1.0 / q, 2.0);
        assert!((got - 0.5 / q).abs() < 1e-4);
    }
}
