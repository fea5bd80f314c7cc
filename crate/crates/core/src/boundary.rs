//! Boundary data, the complexified trace `Theta`, the curve Hilbert transform,
//! the compatibility diagnostic and the graph-mode potentials.
//!
//! Data are the tangential and normal components `f = B.t`, `h = B.n` as
//! functions of the curve parameter. With `z(t)` the curve and `B = B1 - i B2`
//! the complex field, `Theta(t) = conj(z'(t)) (f - i h) / |z'(t)|` is the value
//! of `B` on the curve.

use std::f64::consts::{PI, TAU};
use std::sync::Arc;

use num_complex::Complex64;
use rayon::prelude::*;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use crate::curve::{CurveModel, MIN_SPEED};
use crate::error::{Error, Result};
use crate::jet::LocalJet;
use crate::poly;
use crate::quad;

const I: Complex64 = Complex64::new(0.0, 1.0);

/// A real function of the curve parameter in closed form.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum DataFunction {
    /// `sum c_k e^{ikt}` with `c_{-k} = conj(c_k)`.
    Trig { modes: Vec<(i64, Complex64)> },
    /// Real polynomial, lowest degree first.
    Poly { coeffs: Vec<f64> },
    /// Quotient of real polynomials.
    Rational { num: Vec<f64>, den: Vec<f64> },
}

impl DataFunction {
    pub fn zero() -> Self {
        Self::Poly { coeffs: vec![0.0] }
    }

    pub fn constant(v: f64) -> Self {
        Self::Poly { coeffs: vec![v] }
    }

    /// Validated trigonometric polynomial; duplicate modes are merged.
    pub fn trig(modes: Vec<(i64, Complex64)>) -> Result<Self> {
        let mut merged: Vec<(i64, Complex64)> = Vec::new();
        for (k, c) in modes {
            match merged.iter_mut().find(|m| m.0 == k) {
                Some(m) => m.1 += c,
                None => merged.push((k, c)),
            }
        }
        merged.sort_by_key(|m| m.0);
        let scale = merged.iter().map(|m| m.1.norm()).fold(0.0, f64::max);
        for &(k, c) in &merged {
            let partner = merged.iter().find(|m| m.0 == -k).map_or(Complex64::new(0.0, 0.0), |m| m.1);
            if (c - partner.conj()).norm() > 1e-12 * scale.max(1.0) {
                return Err(Error::InvalidData(format!("trigonometric data is not real: mode {k} lacks its conjugate")));
            }
        }
        Ok(Self::Trig { modes: merged })
    }

    /// `cos(k t)`.
    pub fn cos(k: i64) -> Self {
        Self::Trig { modes: vec![(-k, Complex64::new(0.5, 0.0)), (k, Complex64::new(0.5, 0.0))] }
    }

    /// `sin(k t)`.
    pub fn sin(k: i64) -> Self {
        Self::Trig { modes: vec![(-k, Complex64::new(0.0, 0.5)), (k, Complex64::new(0.0, -0.5))] }
    }

    /// Trigonometric interpolant of equispaced samples on `[0, 2pi)`.
    ///
    /// The Nyquist mode is split evenly between `+M/2` and `-M/2`. Modes at
    /// the transform's roundoff level (`32 eps max|sample|`) are dropped, since
    /// high-order jets would amplify them by `|k|^n / n!`.
    pub fn from_periodic_samples(samples: &[f64]) -> Self {
        let m = samples.len();
        let floor = 32.0 * f64::EPSILON * samples.iter().fold(0.0f64, |a, v| a.max(v.abs()));
        let spec = forward_fft(samples);
        let half = m / 2;
        let mut modes = Vec::with_capacity(m + 1);
        for (k, c) in spec.iter().enumerate() {
            let c = c / m as f64;
            if k < half || (m % 2 == 1 && k == half) {
                modes.push((k as i64, c));
            } else if k == half {
                modes.push((half as i64, c * 0.5));
                modes.push((-(half as i64), c * 0.5));
            } else {
                modes.push((k as i64 - m as i64, c));
            }
        }
        modes.retain(|m| m.1.norm() > floor);
        modes.sort_by_key(|m| m.0);
        if modes.is_empty() {
            return Self::zero();
        }
        Self::Trig { modes }
    }

    /// `factor` times this function.
    pub fn with_scale(self, factor: f64) -> Self {
        match self {
            Self::Trig { modes } => Self::Trig { modes: modes.into_iter().map(|(k, c)| (k, c * factor)).collect() },
            Self::Poly { coeffs } => Self::Poly { coeffs: coeffs.into_iter().map(|c| c * factor).collect() },
            Self::Rational { num, den } => Self::Rational { num: num.into_iter().map(|c| c * factor).collect(), den },
        }
    }

    /// The function `t -> self(-t)`.
    pub fn reflected(&self) -> Self {
        let flip = |p: &[f64]| p.iter().enumerate().map(|(k, &c)| if k % 2 == 1 { -c } else { c }).collect();
        match self {
            Self::Trig { modes } => Self::Trig { modes: modes.iter().map(|&(k, c)| (k, c.conj())).collect() },
            Self::Poly { coeffs } => Self::Poly { coeffs: flip(coeffs) },
            Self::Rational { num, den } => Self::Rational { num: flip(num), den: flip(den) },
        }
    }

    pub fn eval(&self, t: f64) -> f64 {
        match self {
            Self::Trig { modes } => modes
                .iter()
                .map(|&(k, c)| (c * Complex64::from_polar(1.0, k as f64 * t)).re)
                .sum(),
            Self::Poly { coeffs } => poly::eval_real(coeffs, t),
            Self::Rational { num, den } => poly::eval_real(num, t) / poly::eval_real(den, t),
        }
    }

    /// Taylor coefficients about `t0` up to `order`.
    pub fn jet(&self, t0: f64, order: usize) -> Result<LocalJet> {
        let zero = Complex64::new(0.0, 0.0);
        let shifted = |p: &[f64]| {
            let pc: Vec<Complex64> = p.iter().map(|&c| Complex64::new(c, 0.0)).collect();
            let mut q = poly::taylor_shift(&pc, t0);
            q.resize(order + 1, zero);
            LocalJet::new(t0, q)
        };
        match self {
            Self::Trig { modes } => {
                let mut terms: Vec<Complex64> = modes.iter().map(|&(k, c)| c * Complex64::from_polar(1.0, k as f64 * t0)).collect();
                let mut out = Vec::with_capacity(order + 1);
                for n in 0..=order {
                    if n > 0 {
                        for (term, &(k, _)) in terms.iter_mut().zip(modes) {
                            *term *= I * k as f64 / n as f64;
                        }
                    }
                    out.push(terms.iter().sum());
                }
                Ok(LocalJet::new(t0, out))
            }
            Self::Poly { coeffs } => Ok(shifted(coeffs)),
            Self::Rational { num, den } => shifted(num).mul(&shifted(den).reciprocal()?),
        }
    }

    /// True for representations that continue to entire functions.
    pub fn is_entire(&self) -> bool {
        match self {
            Self::Trig { .. } | Self::Poly { .. } => true,
            Self::Rational { den, .. } => den.iter().skip(1).all(|&c| c == 0.0),
        }
    }

    /// Candidate singular points in the complex parameter plane.
    pub fn singularities(&self) -> Vec<Complex64> {
        match self {
            Self::Rational { den, .. } => {
                let pc: Vec<Complex64> = den.iter().map(|&c| Complex64::new(c, 0.0)).collect();
                poly::roots(&pc)
            }
            _ => Vec::new(),
        }
    }
}

/// Boundary data sampled on the parameter grid, optionally with closed forms.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoundaryData {
    forms: Option<(DataFunction, DataFunction)>,
    params: Vec<f64>,
    f: Vec<f64>,
    h: Vec<f64>,
    entire: bool,
    interpolated: bool,
}

impl BoundaryData {
    /// Samples closed-form data on `m` grid nodes of `curve`.
    pub fn from_functions(curve: &CurveModel, f: DataFunction, h: DataFunction, m: usize, entire: bool) -> Result<Self> {
        check_grid_len(m)?;
        let params = curve.grid(m);
        let fs = params.iter().map(|&t| f.eval(t)).collect();
        let hs = params.iter().map(|&t| h.eval(t)).collect();
        let data = Self { forms: Some((f, h)), params, f: fs, h: hs, entire, interpolated: false };
        data.check_finite()?;
        Ok(data)
    }

    /// Closed forms together with independently supplied samples, which must agree.
    pub fn with_samples(
        curve: &CurveModel,
        f: DataFunction,
        h: DataFunction,
        f_grid: Vec<f64>,
        h_grid: Vec<f64>,
        entire: bool,
    ) -> Result<Self> {
        let mut data = Self::from_samples(curve, f_grid, h_grid, entire)?;
        let scale = data.f.iter().chain(&data.h).fold(1.0f64, |a, v| a.max(v.abs()));
        for (i, &t) in data.params.iter().enumerate() {
            let (df, dh) = ((f.eval(t) - data.f[i]).abs(), (h.eval(t) - data.h[i]).abs());
            if df.max(dh) > 1e-10 * scale {
                return Err(Error::InvalidData(format!("coefficients and grid disagree at t = {t} by {:e}", df.max(dh))));
            }
        }
        data.forms = Some((f, h));
        Ok(data)
    }

    /// Grid-only data on the `M = f_grid.len()` nodes of `curve`.
    pub fn from_samples(curve: &CurveModel, f_grid: Vec<f64>, h_grid: Vec<f64>, entire: bool) -> Result<Self> {
        if f_grid.len() != h_grid.len() {
            return Err(Error::InvalidData(format!("f has {} samples, h has {}", f_grid.len(), h_grid.len())));
        }
        check_grid_len(f_grid.len())?;
        let data = Self { forms: None, params: curve.grid(f_grid.len()), f: f_grid, h: h_grid, entire, interpolated: false };
        data.check_finite()?;
        Ok(data)
    }

    /// Traces of a complex field `B = B1 - i B2` on `m` nodes (grid only).
    pub fn from_field<F: Fn(Complex64) -> Complex64>(curve: &CurveModel, field: F, m: usize) -> Result<Self> {
        check_grid_len(m)?;
        let params = curve.grid(m);
        let (mut fs, mut hs) = (Vec::with_capacity(m), Vec::with_capacity(m));
        for &t in &params {
            let d1 = curve.dz(t, 1);
            let bt = field(curve.point(t)) * d1 / d1.norm();
            fs.push(bt.re);
            hs.push(-bt.im);
        }
        Self::from_samples(curve, fs, hs, false)
    }

    pub fn zero(curve: &CurveModel, m: usize) -> Result<Self> {
        Self::from_functions(curve, DataFunction::zero(), DataFunction::zero(), m, true)
    }

    /// Attaches trigonometric interpolants to grid-only data on a closed curve.
    pub fn interpolate(mut self) -> Result<Self> {
        if self.forms.is_some() {
            return Ok(self);
        }
        if self.params.last().map_or(true, |&t| t >= TAU) || self.params.first() != Some(&0.0) {
            return Err(Error::GridOnlyData);
        }
        let f = DataFunction::from_periodic_samples(&self.f);
        let h = DataFunction::from_periodic_samples(&self.h);
        self.forms = Some((f, h));
        self.interpolated = true;
        Ok(self)
    }

    fn check_finite(&self) -> Result<()> {
        if self.f.iter().chain(&self.h).all(|v| v.is_finite()) {
            Ok(())
        } else {
            Err(Error::InvalidData("non-finite sample".into()))
        }
    }

    pub fn forms(&self) -> Option<(&DataFunction, &DataFunction)> {
        self.forms.as_ref().map(|(f, h)| (f, h))
    }

    pub fn params(&self) -> &[f64] {
        &self.params
    }

    pub fn f_samples(&self) -> &[f64] {
        &self.f
    }

    pub fn h_samples(&self) -> &[f64] {
        &self.h
    }

    pub fn len(&self) -> usize {
        self.params.len()
    }

    pub fn is_empty(&self) -> bool {
        self.params.is_empty()
    }

    /// The data were declared to continue to entire functions.
    pub fn declared_entire(&self) -> bool {
        self.entire
    }

    /// Closed forms were produced by interpolating samples.
    pub fn is_interpolated(&self) -> bool {
        self.interpolated
    }

    fn require_forms(&self) -> Result<(&DataFunction, &DataFunction)> {
        self.forms().ok_or(Error::GridOnlyData)
    }
}

fn check_grid_len(m: usize) -> Result<()> {
    if m < 4 || m % 2 == 1 {
        return Err(Error::InvalidData(format!("grid length must be even and at least 4, got {m}")));
    }
    Ok(())
}

/// `Theta(t) = conj(z'(t)) (f - i h) / |z'(t)|`.
pub fn theta(curve: &CurveModel, data: &BoundaryData, t: f64) -> Result<Complex64> {
    let (f, h) = data.require_forms()?;
    let d1 = curve.dz(t, 1);
    let speed = d1.norm();
    if speed < MIN_SPEED {
        return Err(Error::DegenerateCurve { t, speed });
    }
    Ok(d1.conj() * Complex64::new(f.eval(t), -h.eval(t)) / speed)
}

/// Jet of `Theta` about `t0`.
pub fn theta_jet(curve: &CurveModel, data: &BoundaryData, t0: f64, order: usize) -> Result<LocalJet> {
    let (f, h) = data.require_forms()?;
    let a = curve.curve_jet(t0, order);
    if a.coeff(0).norm() < MIN_SPEED {
        return Err(Error::DegenerateCurve { t: t0, speed: a.coeff(0).norm() });
    }
    let ac = a.conj();
    let inv_speed = a.mul(&ac)?.powf(-0.5)?;
    let fh = f.jet(t0, order)?.sub(&h.jet(t0, order)?.scale(I))?;
    ac.mul(&fh)?.mul(&inv_speed)
}

/// Jet of `Theta'` about `t0`, of the requested order.
pub fn theta_prime_jet(curve: &CurveModel, data: &BoundaryData, t0: f64, order: usize) -> Result<LocalJet> {
    Ok(theta_jet(curve, data, t0, order + 1)?.differentiate())
}

/// Jet of `c = Lambda Theta'` about `t0`.
pub fn c_jet(curve: &CurveModel, data: &BoundaryData, t0: f64, order: usize) -> Result<LocalJet> {
    let lambda = crate::series::lambda_jet(&curve.curve_jet(t0, order))?;
    lambda.mul(&theta_prime_jet(curve, data, t0, order)?)
}

/// Kernel pieces of the curve Hilbert transform on the grid `t_j = 2 pi j / M`.
struct Nodes {
    t: Vec<f64>,
    z: Vec<Complex64>,
    d1: Vec<Complex64>,
    diag: Vec<f64>,
}

impl Nodes {
    fn new(curve: &CurveModel, m: usize) -> Self {
        let t = curve.grid(m);
        let z = t.iter().map(|&s| curve.point(s)).collect();
        let d1: Vec<Complex64> = t.iter().map(|&s| curve.dz(s, 1)).collect();
        let diag = t
            .iter()
            .zip(&d1)
            .map(|(&s, v)| -(v.conj() * curve.dz(s, 2)).re / (2.0 * v.norm_sqr()))
            .collect();
        Self { t, z, d1, diag }
    }

    /// `K(t_i, t_j) - cot((t_i - t_j)/2)/2`, with its limit on the diagonal.
    fn smooth(&self, i: usize, j: usize) -> f64 {
        if i == j {
            return self.diag[i];
        }
        let tau = self.d1[i] / self.d1[i].norm();
        let dz = self.z[i] - self.z[j];
        let k = (tau.conj() * dz).re * self.d1[j].norm() / dz.norm_sqr();
        k - 0.5 / (0.5 * (self.t[i] - self.t[j])).tan()
    }
}

/// `(1/pi) p.v. int K(t, s) h(s) ds` with
/// `K(t, s) = tau(t).(z(t) - z(s)) |z'(s)| / |z(t) - z(s)|^2`, at every node.
///
/// The cotangent part uses the alternating-parity rule; the remainder is
/// smooth and uses the trapezoidal rule.
pub fn hilbert_transform(curve: &CurveModel, h: &[f64]) -> Result<Vec<f64>> {
    if !curve.is_closed() {
        return Err(Error::OpenCurveUnsupported);
    }
    let m = h.len();
    check_grid_len(m)?;
    let nodes = Nodes::new(curve, m);
    let cot: Vec<f64> = (0..m)
        .map(|d| if d % 2 == 1 { 1.0 / (PI * d as f64 / m as f64).tan() } else { 0.0 })
        .collect();
    let w = 2.0 / m as f64;
    Ok((0..m)
        .into_par_iter()
        .map(|i| {
            let mut acc = 0.0;
            for j in 0..m {
                let d = (i + m - j) % m;
                acc += (cot[d] + nodes.smooth(i, j)) * h[j];
            }
            w * acc
        })
        .collect())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    AnalyticLikely,
    NotAnalytic,
    Inconclusive,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CompatibilityReport {
    /// `f - H h` on the grid.
    pub residual: Vec<f64>,
    /// `|g_k|` for `k = 0..=M/2`.
    pub spectrum: Vec<f64>,
    /// Fitted geometric decay rate of `|g_k|`.
    pub rho: f64,
    /// Coefficient of determination of the exponential fit.
    pub fit_r2: f64,
    /// Coefficient of determination of the algebraic fit.
    pub algebraic_r2: f64,
    pub usable_modes: usize,
    pub verdict: Verdict,
    /// `-log rho`.
    #[serde(with = "crate::serde_ext::extended")]
    pub strip_width: f64,
}

/// Minimum coefficient of determination for an exponential-decay verdict.
pub const FIT_R2_THRESHOLD: f64 = 0.98;
/// Maximum slope of `log|g_k|` against `k` for an exponential-decay verdict.
pub const FIT_SLOPE_THRESHOLD: f64 = -0.05;

/// Spectral decay diagnostic of `f - H h`.
///
/// Both fits use the decreasing envelope of `|g_k|`, `1 <= k < M/2`, over
/// the modes above `100 eps` times the data scale.
pub fn compatibility(curve: &CurveModel, data: &BoundaryData) -> Result<CompatibilityReport> {
    let hh = hilbert_transform(curve, data.h_samples())?;
    let residual: Vec<f64> = data.f_samples().iter().zip(&hh).map(|(f, g)| f - g).collect();
    let m = residual.len();
    let spectrum: Vec<f64> = forward_fft(&residual)[..=m / 2].iter().map(|c| c.norm() / m as f64).collect();
    let scale = data
        .f_samples()
        .iter()
        .chain(data.h_samples())
        .chain(&residual)
        .fold(0.0f64, |a, v| a.max(v.abs()));
    let floor = 100.0 * f64::EPSILON * scale;
    // Decreasing envelope max_{j >= k} |g_j|.
    let mut envelope = spectrum[1..m / 2].to_vec();
    for k in (0..envelope.len().saturating_sub(1)).rev() {
        envelope[k] = envelope[k].max(envelope[k + 1]);
    }
    let usable: Vec<(f64, f64)> = envelope
        .iter()
        .enumerate()
        .filter(|(_, &v)| v > floor)
        .map(|(k, &v)| ((k + 1) as f64, v.ln()))
        .collect();
    let (verdict, rho, fit_r2, algebraic_r2) = if usable.len() < 3 {
        (Verdict::AnalyticLikely, f64::EPSILON, 1.0, 0.0)
    } else {
        let (slope, r2e) = linear_fit(usable.iter().copied());
        let (_, r2a) = linear_fit(usable.iter().map(|&(k, v)| (k.ln(), v)));
        let rho = slope.exp().min(1.0);
        let verdict = if r2a > r2e {
            Verdict::NotAnalytic
        } else if r2e >= FIT_R2_THRESHOLD && slope <= FIT_SLOPE_THRESHOLD {
            Verdict::AnalyticLikely
        } else {
            Verdict::Inconclusive
        };
        (verdict, rho, r2e, r2a)
    };
    Ok(CompatibilityReport {
        residual,
        spectrum,
        rho,
        fit_r2,
        algebraic_r2,
        usable_modes: usable.len(),
        verdict,
        strip_width: -rho.ln(),
    })
}

/// Least-squares slope and `R^2` of `y` against `x`.
fn linear_fit(pts: impl Iterator<Item = (f64, f64)> + Clone) -> (f64, f64) {
    let n = pts.clone().count() as f64;
    let (sx, sy) = pts.clone().fold((0.0, 0.0), |a, p| (a.0 + p.0, a.1 + p.1));
    let (mx, my) = (sx / n, sy / n);
    let (mut sxx, mut sxy, mut syy) = (0.0, 0.0, 0.0);
    for (x, y) in pts {
        sxx += (x - mx) * (x - mx);
        sxy += (x - mx) * (y - my);
        syy += (y - my) * (y - my);
    }
    let slope = sxy / sxx;
    let r2 = if syy == 0.0 { 1.0 } else { sxy * sxy / (sxx * syy) };
    (slope, r2)
}

fn forward_fft(x: &[f64]) -> Vec<Complex64> {
    let mut buf: Vec<Complex64> = x.iter().map(|&v| Complex64::new(v, 0.0)).collect();
    let fft: Arc<dyn rustfft::Fft<f64>> = FftPlanner::new().plan_fft_forward(buf.len());
    fft.process(&mut buf);
    buf
}

/// Cauchy data on the graph `y = Psi(x)`, `x in [-1, 1]`, as functions of `x`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GraphCauchyData {
    psi: Vec<f64>,
    dpsi: Vec<f64>,
    f: DataFunction,
    h: DataFunction,
    tol: f64,
}

/// Default absolute tolerance of the graph-mode quadratures.
pub const GRAPH_TOL: f64 = 1e-9;

impl GraphCauchyData {
    pub fn new(psi: Vec<f64>, f: DataFunction, h: DataFunction) -> Result<Self> {
        if psi.is_empty() || psi.iter().any(|c| !c.is_finite()) {
            return Err(Error::InvalidCurve("graph polynomial must have finite coefficients".into()));
        }
        let dpsi = poly::derivative(&psi);
        Ok(Self { psi, dpsi, f, h, tol: GRAPH_TOL })
    }

    pub fn with_tolerance(mut self, tol: f64) -> Self {
        self.tol = tol;
        self
    }

    pub fn psi(&self, x: f64) -> f64 {
        poly::eval_real(&self.psi, x)
    }

    fn arc(&self, x: f64) -> f64 {
        poly::eval_real(&self.dpsi, x).hypot(1.0)
    }

    /// `g(x) = int_0^x f(t) sqrt(1 + Psi'(t)^2) dt`.
    pub fn g(&self, x: f64) -> Result<f64> {
        let integrand = |t: f64| self.f.eval(t) * self.arc(t);
        let (a, b, sign) = if x >= 0.0 { (0.0, x, 1.0) } else { (x, 0.0, -1.0) };
        Ok(sign * quad::smooth(&integrand, a, b, a, self.tol)?)
    }
}

/// `H(x) = g(x) - (1/pi) int_{-1}^{1} h(t) sqrt(1 + Psi'(t)^2) log dist((x, Psi(x)), (t, Psi(t))) dt`.
pub fn graph_h(gcd: &GraphCauchyData, x: f64) -> Result<f64> {
    check_open_unit(x)?;
    let q = poly::divided_difference(&gcd.psi, x);
    let w = |t: f64| gcd.h.eval(t) * gcd.arc(t);
    let s = |t: f64| w(t) * 0.5 * poly::eval_real(&q, t).powi(2).ln_1p();
    let integral = quad::log_singular(&w, &s, -1.0, 1.0, x, gcd.tol)?;
    Ok(gcd.g(x)? - integral / PI)
}

/// `F(x) = (1 / (pi sqrt(1 + Psi'(x)^2))) int_{-1}^{1} h(t) sqrt(1 + Psi'(t)^2) k(x, t) dt`
/// with the bounded kernel
/// `k = (Psi(x) - Psi(t) - Psi'(x)(x - t)) / ((x - t)^2 + (Psi(x) - Psi(t))^2)`.
pub fn graph_f(gcd: &GraphCauchyData, x: f64) -> Result<f64> {
    check_open_unit(x)?;
    let q1 = poly::divided_difference(&gcd.psi, x);
    let q2 = poly::divided_difference(&q1, x);
    let integrand = |t: f64| {
        let q = poly::eval_real(&q1, t);
        -gcd.h.eval(t) * gcd.arc(t) * poly::eval_real(&q2, t) / (1.0 + q * q)
    };
    Ok(quad::smooth(&integrand, -1.0, 1.0, x, gcd.tol)? / (PI * gcd.arc(x)))
}

/// `G(x, y) = (1/pi) int_{-1}^{1} h(t) sqrt(1 + Psi'(t)^2) log dist((x, y), (t, Psi(t))) dt`.
///
/// On the graph this equals `g - H`.
pub fn graph_g(gcd: &GraphCauchyData, x: f64, y: f64) -> Result<f64> {
    if (y - gcd.psi(x)).abs() == 0.0 && x.abs() < 1.0 {
        return Ok(gcd.g(x)? - graph_h(gcd, x)?);
    }
    let integrand = |t: f64| gcd.h.eval(t) * gcd.arc(t) * 0.5 * ((x - t).powi(2) + (y - gcd.psi(t)).powi(2)).ln();
    let zero = |_: f64| 0.0;
    Ok(quad::log_singular(&zero, &integrand, -1.0, 1.0, x.clamp(-1.0, 1.0), gcd.tol)? / PI)
}

fn check_open_unit(x: f64) -> Result<()> {
    if x.abs() < 1.0 {
        Ok(())
    } else {
        Err(Error::InvalidData(format!("graph point {x} outside (-1, 1)")))
    }
}
