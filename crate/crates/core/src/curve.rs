//! Analytic boundary curves and their differential geometry.
//!
//! Points of the plane are handled as complex numbers `x + iy`. A curve is
//! stored as the complex function `z(t) = gamma_1(t) + i gamma_2(t)`, either
//! as a finite Fourier series on the circle (closed boundaries) or as a pair
//! of real polynomials on a parameter interval (open boundary pieces).
//!
//! Every stored parameterisation has `(-gamma_2', gamma_1')` pointing into
//! the exterior. Closed curves must therefore be traversed clockwise; open
//! curves whose exterior lies on the right are reparameterised by `t -> -t`
//! at construction.

use std::f64::consts::{PI, TAU};

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::jet::LocalJet;
use crate::optimize::golden_min;
use crate::poly;

pub const DEFAULT_CLOSED_NODES: usize = 2048;
pub const DEFAULT_OPEN_NODES: usize = 4096;
/// Collar widths beyond this multiple of the curve diameter are reported as infinite.
pub const DEFAULT_COLLAR_CAP: f64 = 1e3;
pub const MIN_SPEED: f64 = 1e-12;

/// Which side of an open curve is the exterior, relative to its direction of travel.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum ExteriorSide {
    #[default]
    Left,
    Right,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Shape {
    /// `z(t) = sum_k c_k e^{ikt}`, `t` in `[0, 2pi)`.
    Fourier(Vec<(i64, Complex64)>),
    /// `z(t) = x(t) + i y(t)` on `[lo, hi]`.
    Polynomial { x: Vec<f64>, y: Vec<f64>, lo: f64, hi: f64 },
}

#[derive(Debug, Clone)]
pub struct CurveModel {
    shape: Shape,
    /// `z(t)` as one complex polynomial (open curves only).
    zpoly: Vec<Complex64>,
    nodes: usize,
    reversed: bool,
}

/// Local frame of the curve at one parameter value.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FrameAt {
    pub point: [f64; 2],
    pub tangent: [f64; 2],
    /// Outward unit normal.
    pub normal: [f64; 2],
    pub speed: f64,
    /// Unsigned curvature.
    pub curvature: f64,
}

fn cis(x: f64) -> Complex64 {
    Complex64::from_polar(1.0, x)
}

/// Wraps an angle difference into `(-pi, pi]`.
pub fn wrap_angle(x: f64) -> f64 {
    let mut y = x.rem_euclid(TAU);
    if y > PI {
        y -= TAU;
    }
    y
}

impl CurveModel {
    /// Closed curve `sum_k c_k e^{ikt}` with the default construction grid.
    pub fn closed_fourier(modes: Vec<(i64, Complex64)>) -> Result<Self> {
        Self::closed_fourier_with_nodes(modes, DEFAULT_CLOSED_NODES)
    }

    pub fn closed_fourier_with_nodes(modes: Vec<(i64, Complex64)>, nodes: usize) -> Result<Self> {
        if nodes < 16 {
            return Err(Error::InvalidCurve("construction grid needs at least 16 nodes".into()));
        }
        let mut merged: Vec<(i64, Complex64)> = Vec::new();
        for (k, c) in modes {
            if !(c.re.is_finite() && c.im.is_finite()) {
                return Err(Error::InvalidCurve(format!("non-finite coefficient for mode {k}")));
            }
            match merged.iter_mut().find(|(j, _)| *j == k) {
                Some((_, acc)) => *acc += c,
                None => merged.push((k, c)),
            }
        }
        merged.sort_by_key(|(k, _)| *k);
        let curve = Self {
            shape: Shape::Fourier(merged),
            zpoly: Vec::new(),
            nodes,
            reversed: false,
        };
        curve.validate()?;
        Ok(curve)
    }

    /// Clockwise circle of radius `r` centred at the origin: `z(t) = r e^{-it}`.
    pub fn circle(r: f64) -> Result<Self> {
        Self::closed_fourier(vec![(-1, Complex64::new(r, 0.0))])
    }

    /// Open curve `(x(t), y(t))` on `[lo, hi]`.
    pub fn open_polynomial(x: Vec<f64>, y: Vec<f64>, interval: (f64, f64), side: ExteriorSide) -> Result<Self> {
        Self::open_polynomial_with_nodes(x, y, interval, side, DEFAULT_OPEN_NODES)
    }

    pub fn open_polynomial_with_nodes(
        mut x: Vec<f64>,
        mut y: Vec<f64>,
        interval: (f64, f64),
        side: ExteriorSide,
        nodes: usize,
    ) -> Result<Self> {
        let (mut lo, mut hi) = interval;
        if !(lo.is_finite() && hi.is_finite() && lo < hi) {
            return Err(Error::InvalidCurve(format!("bad parameter interval [{lo}, {hi}]")));
        }
        if nodes < 16 {
            return Err(Error::InvalidCurve("construction grid needs at least 16 nodes".into()));
        }
        if x.iter().chain(&y).any(|c| !c.is_finite()) {
            return Err(Error::InvalidCurve("non-finite polynomial coefficient".into()));
        }
        if x.is_empty() {
            x.push(0.0);
        }
        if y.is_empty() {
            y.push(0.0);
        }
        let reversed = side == ExteriorSide::Right;
        if reversed {
            for (k, c) in x.iter_mut().enumerate() {
                if k % 2 == 1 {
                    *c = -*c;
                }
            }
            for (k, c) in y.iter_mut().enumerate() {
                if k % 2 == 1 {
                    *c = -*c;
                }
            }
            (lo, hi) = (-hi, -lo);
        }
        let n = x.len().max(y.len());
        let zpoly = (0..n)
            .map(|k| Complex64::new(*x.get(k).unwrap_or(&0.0), *y.get(k).unwrap_or(&0.0)))
            .collect();
        let curve = Self {
            shape: Shape::Polynomial { x, y, lo, hi },
            zpoly,
            nodes,
            reversed,
        };
        curve.validate()?;
        Ok(curve)
    }

    /// The parabola `(t, t^2)` on `[-half_width, half_width]`, exterior above the graph.
    pub fn parabola(half_width: f64) -> Result<Self> {
        Self::open_polynomial(vec![0.0, 1.0], vec![0.0, 0.0, 1.0], (-half_width, half_width), ExteriorSide::Left)
    }

    /// The straight line `(t, 0)` on `[-half_width, half_width]`, exterior above.
    pub fn flat_line(half_width: f64) -> Result<Self> {
        Self::open_polynomial(vec![0.0, 1.0], vec![0.0], (-half_width, half_width), ExteriorSide::Left)
    }

    pub fn shape(&self) -> &Shape {
        &self.shape
    }

    pub fn is_closed(&self) -> bool {
        matches!(self.shape, Shape::Fourier(_))
    }

    /// True when an open curve was reparameterised by `t -> -t`.
    pub fn is_reversed(&self) -> bool {
        self.reversed
    }

    pub fn construction_nodes(&self) -> usize {
        self.nodes
    }

    /// Parameter domain of the stored parameterisation.
    pub fn domain(&self) -> (f64, f64) {
        match &self.shape {
            Shape::Fourier(_) => (0.0, TAU),
            Shape::Polynomial { lo, hi, .. } => (*lo, *hi),
        }
    }

    /// Fourier modes, if closed.
    pub fn fourier_modes(&self) -> Option<&[(i64, Complex64)]> {
        match &self.shape {
            Shape::Fourier(m) => Some(m),
            Shape::Polynomial { .. } => None,
        }
    }

    /// `n` parameter nodes: equispaced on the circle, or end point inclusive on an interval.
    pub fn grid(&self, n: usize) -> Vec<f64> {
        let (lo, hi) = self.domain();
        if self.is_closed() {
            (0..n).map(|j| TAU * j as f64 / n as f64).collect()
        } else {
            (0..n).map(|j| lo + (hi - lo) * j as f64 / (n - 1) as f64).collect()
        }
    }

    /// The `m`-th derivative of `z` at a complex parameter.
    pub fn dz_at(&self, t: Complex64, m: u32) -> Complex64 {
        match &self.shape {
            Shape::Fourier(modes) => modes
                .iter()
                .map(|&(k, c)| {
                    let ik = Complex64::new(0.0, k as f64);
                    c * ik.powu(m) * (ik * t).exp()
                })
                .sum(),
            Shape::Polynomial { .. } => {
                let mut p = self.zpoly.clone();
                for _ in 0..m {
                    p = poly::derivative(&p);
                }
                poly::eval_complex(&p, t)
            }
        }
    }

    /// The `m`-th derivative of `z` at a real parameter.
    pub fn dz(&self, t: f64, m: u32) -> Complex64 {
        match &self.shape {
            Shape::Fourier(modes) => modes
                .iter()
                .map(|&(k, c)| c * Complex64::new(0.0, k as f64).powu(m) * cis(k as f64 * t))
                .sum(),
            Shape::Polynomial { .. } => self.dz_at(Complex64::new(t, 0.0), m),
        }
    }

    pub fn point(&self, t: f64) -> Complex64 {
        self.dz(t, 0)
    }

    pub fn speed(&self, t: f64) -> f64 {
        self.dz(t, 1).norm()
    }

    /// Curvature signed so that it is positive where the centre of curvature
    /// lies on the exterior side.
    pub fn signed_curvature(&self, t: f64) -> f64 {
        let d1 = self.dz(t, 1);
        let d2 = self.dz(t, 2);
        (d1.conj() * d2).im / d1.norm().powi(3)
    }

    pub fn frame_at(&self, t: f64) -> Result<FrameAt> {
        let p = self.point(t);
        let d1 = self.dz(t, 1);
        let speed = d1.norm();
        if speed < MIN_SPEED || !speed.is_finite() {
            return Err(Error::DegenerateCurve { t, speed });
        }
        let tan = d1 / speed;
        let nor = Complex64::new(-tan.im, tan.re);
        Ok(FrameAt {
            point: [p.re, p.im],
            tangent: [tan.re, tan.im],
            normal: [nor.re, nor.im],
            speed,
            curvature: self.signed_curvature(t).abs(),
        })
    }

    /// Taylor coefficients `a_0..a_K` of `gamma_1' + i gamma_2'` about `t0`.
    pub fn curve_jet(&self, t0: f64, order: usize) -> LocalJet {
        let coeffs = match &self.shape {
            Shape::Fourier(modes) => {
                // a_n = sum_k c_k (ik)^{n+1} e^{ikt0} / n!
                let mut terms: Vec<Complex64> = modes
                    .iter()
                    .map(|&(k, c)| c * Complex64::new(0.0, k as f64) * cis(k as f64 * t0))
                    .collect();
                let mut out = Vec::with_capacity(order + 1);
                for n in 0..=order {
                    if n > 0 {
                        for (term, &(k, _)) in terms.iter_mut().zip(modes) {
                            *term *= Complex64::new(0.0, k as f64) / n as f64;
                        }
                    }
                    out.push(terms.iter().sum());
                }
                out
            }
            Shape::Polynomial { .. } => {
                let d = poly::derivative(&self.zpoly);
                let mut shifted = poly::taylor_shift(&d, t0);
                shifted.resize(order + 1, Complex64::new(0.0, 0.0));
                shifted
            }
        };
        LocalJet::new(t0, coeffs)
    }

    /// Zeros of `z'` in the complex parameter plane.
    ///
    /// For closed curves one representative per root is returned with real
    /// part in `[0, 2pi)`; the others differ by multiples of `2pi`.
    pub fn derivative_zeros(&self) -> Vec<Complex64> {
        match &self.shape {
            Shape::Fourier(modes) => {
                // z'(tau) = sum ik c_k w^k with w = e^{i tau}; clear negative powers.
                let kmin = modes.iter().map(|m| m.0).min().unwrap_or(0);
                let kmax = modes.iter().map(|m| m.0).max().unwrap_or(0);
                let mut p = vec![Complex64::new(0.0, 0.0); (kmax - kmin + 1) as usize];
                for &(k, c) in modes {
                    p[(k - kmin) as usize] += Complex64::new(0.0, k as f64) * c;
                }
                poly::roots(&p)
                    .into_iter()
                    .filter(|w| w.norm() > 0.0 && w.norm().is_finite())
                    .map(|w| Complex64::new(w.arg().rem_euclid(TAU), -w.norm().ln()))
                    .collect()
            }
            Shape::Polynomial { .. } => poly::roots(&poly::derivative(&self.zpoly)),
        }
    }

    /// Distance from the real parameter `t0` to the nearest of `points`,
    /// accounting for periodicity on closed curves.
    pub fn parameter_distance(&self, t0: f64, points: &[Complex64]) -> f64 {
        points
            .iter()
            .map(|z| {
                let dx = if self.is_closed() { wrap_angle(t0 - z.re) } else { t0 - z.re };
                dx.hypot(z.im)
            })
            .fold(f64::INFINITY, f64::min)
    }

    /// Side length of the bounding box diagonal on the construction grid.
    pub fn diameter(&self) -> f64 {
        let pts: Vec<Complex64> = self.grid(self.nodes).iter().map(|&t| self.point(t)).collect();
        let (mut x0, mut x1, mut y0, mut y1) = (f64::MAX, f64::MIN, f64::MAX, f64::MIN);
        for p in &pts {
            x0 = x0.min(p.re);
            x1 = x1.max(p.re);
            y0 = y0.min(p.im);
            y1 = y1.max(p.im);
        }
        (x1 - x0).hypot(y1 - y0)
    }

    /// Signed area enclosed by a closed curve (negative for clockwise).
    pub fn signed_area(&self) -> Option<f64> {
        match &self.shape {
            Shape::Fourier(modes) => Some(PI * modes.iter().map(|&(k, c)| k as f64 * c.norm_sqr()).sum::<f64>()),
            Shape::Polynomial { .. } => None,
        }
    }

    fn validate(&self) -> Result<()> {
        let ts = self.grid(self.nodes);
        let scale = self.diameter().max(f64::MIN_POSITIVE);
        for &t in &ts {
            let s = self.speed(t);
            if !(s >= MIN_SPEED * scale.max(1.0)) {
                return Err(Error::DegenerateCurve { t, speed: s });
            }
        }
        if let Some(area) = self.signed_area() {
            if area >= 0.0 {
                return Err(Error::WrongOrientation { area });
            }
        }
        let pts: Vec<Complex64> = ts.iter().map(|&t| self.point(t)).collect();
        if let Some((i, j)) = find_polyline_crossing(&pts, self.is_closed()) {
            return Err(Error::SelfIntersectingCurve { s: ts[i], t: ts[j] });
        }
        Ok(())
    }

    /// Nearest curve parameter to `p`; returns `(t, distance)`.
    pub fn project(&self, p: Complex64) -> (f64, f64) {
        let n = 512usize;
        let ts = self.grid(n);
        let (mut best, mut bd) = (0usize, f64::INFINITY);
        for (i, &t) in ts.iter().enumerate() {
            let d = (self.point(t) - p).norm_sqr();
            if d < bd {
                bd = d;
                best = i;
            }
        }
        let h = if self.is_closed() { TAU / n as f64 } else { ts[1] - ts[0] };
        let (lo, hi) = self.domain();
        let (mut a, mut b) = (ts[best] - h, ts[best] + h);
        if !self.is_closed() {
            a = a.max(lo);
            b = b.min(hi);
        }
        let (t, d2) = golden_min(|t| (self.point(t) - p).norm_sqr(), a, b, 1e-13);
        let t = if self.is_closed() { t.rem_euclid(TAU) } else { t };
        (t, d2.sqrt())
    }

    /// `inf_t 1/kappa(t)`, `+inf` for a straight line.
    pub fn min_radius_of_curvature(&self) -> f64 {
        self.max_curvature().1.recip()
    }

    /// `(t, kappa_max)` of the unsigned curvature, refined by golden section.
    pub fn max_curvature(&self) -> (f64, f64) {
        let ts = self.grid(self.nodes);
        let kap: Vec<f64> = ts.par_iter().map(|&t| self.signed_curvature(t).abs()).collect();
        let i = kap
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.total_cmp(b.1))
            .map(|(i, _)| i)
            .unwrap_or(0);
        if kap[i] == 0.0 {
            return (ts[i], 0.0);
        }
        let (a, b) = self.bracket(&ts, i);
        let (t, negk) = golden_min(|t| -self.signed_curvature(t).abs(), a, b, 1e-12);
        (t, (-negk).max(kap[i]))
    }

    fn bracket(&self, ts: &[f64], i: usize) -> (f64, f64) {
        let h = if self.is_closed() { TAU / ts.len() as f64 } else { ts[1] - ts[0] };
        let (lo, hi) = self.domain();
        if self.is_closed() {
            (ts[i] - h, ts[i] + h)
        } else {
            ((ts[i] - h).max(lo), (ts[i] + h).min(hi))
        }
    }

    /// Largest constant width of an injective exterior collar, `+inf` when unbounded.
    ///
    /// A point `gamma(s) + e n(s)` keeps `gamma(s)` as a nearest curve point
    /// exactly while `e <= |gamma(t) - gamma(s)|^2 / (2 n(s).(gamma(t) - gamma(s)))`
    /// for every `t` with a positive denominator, and `e <= 1/kappa(s)` where
    /// the curve bends towards the exterior. The width is the infimum of these
    /// cut distances over all fibres. Grid minima are refined to relative
    /// tolerance `tol`.
    pub fn collar_width(&self, tol: f64) -> Result<f64> {
        self.collar_width_capped(tol, DEFAULT_COLLAR_CAP)
    }

    pub fn collar_width_capped(&self, tol: f64, cap_factor: f64) -> Result<f64> {
        let ts = self.grid(self.nodes);
        let n = ts.len();
        let pts: Vec<Complex64> = ts.iter().map(|&t| self.point(t)).collect();
        let nrm: Vec<Complex64> = ts
            .iter()
            .map(|&t| {
                let d = self.dz(t, 1);
                Complex64::new(0.0, 1.0) * d / d.norm()
            })
            .collect();
        let diam = self.diameter();
        let cap = cap_factor * diam;

        // Focal term.
        let focal: Vec<f64> = ts
            .par_iter()
            .map(|&t| {
                let k = self.signed_curvature(t);
                if k > 0.0 { 1.0 / k } else { f64::INFINITY }
            })
            .collect();
        let mut local = f64::INFINITY;
        if let Some(i) = crate::optimize::argmin(&focal).filter(|&i| focal[i].is_finite()) {
            let (a, b) = self.bracket(&ts, i);
            let (_, v) = golden_min(
                |t| {
                    let k = self.signed_curvature(t);
                    if k > 0.0 { 1.0 / k } else { f64::INFINITY }
                },
                a,
                b,
                tol * (b - a),
            );
            local = v.min(focal[i]);
        }

        // Pair term.
        let cut = |p: Complex64, nv: Complex64, q: Complex64| {
            let d = q - p;
            let den = 2.0 * (nv.conj() * d).re;
            if den > 0.0 { d.norm_sqr() / den } else { f64::INFINITY }
        };
        let rows: Vec<(f64, usize)> = (0..n)
            .into_par_iter()
            .map(|i| {
                let mut best = (f64::INFINITY, i);
                for j in 0..n {
                    if j == i {
                        continue;
                    }
                    let e = cut(pts[i], nrm[i], pts[j]);
                    if e < best.0 {
                        best = (e, j);
                    }
                }
                best
            })
            .collect();
        let (i, &(mut pair, j)) = rows
            .iter()
            .enumerate()
            .min_by(|a, b| a.1 .0.total_cmp(&b.1 .0))
            .expect("non-empty grid");
        if pair < 1e-9 * diam {
            return Err(Error::SelfIntersectingCurve { s: ts[i], t: ts[j] });
        }
        let sep = if self.is_closed() {
            let d = i.abs_diff(j);
            d.min(n - d)
        } else {
            i.abs_diff(j)
        };
        if pair.is_finite() && sep > 2 {
            let (sa, sb) = self.bracket(&ts, i);
            let (ta, tb) = self.bracket(&ts, j);
            let fibre = |s: f64| {
                let p = self.point(s);
                let d = self.dz(s, 1);
                let nv = Complex64::new(0.0, 1.0) * d / d.norm();
                golden_min(|t| cut(p, nv, self.point(t)), ta, tb, tol * (tb - ta)).1
            };
            let (_, refined) = golden_min(fibre, sa, sb, tol * (sb - sa));
            pair = pair.min(refined);
        }
        let width = local.min(pair);
        Ok(if width > cap { f64::INFINITY } else { width })
    }
}

/// First pair of non-adjacent polyline segments that cross, as vertex indices.
fn find_polyline_crossing(pts: &[Complex64], closed: bool) -> Option<(usize, usize)> {
    let n = pts.len();
    let nseg = if closed { n } else { n - 1 };
    let seg = |i: usize| (pts[i], pts[(i + 1) % n]);
    let mut order: Vec<usize> = (0..nseg).collect();
    let minx = |i: usize| {
        let (a, b) = seg(i);
        a.re.min(b.re)
    };
    order.sort_by(|&a, &b| minx(a).total_cmp(&minx(b)));
    for (oi, &i) in order.iter().enumerate() {
        let (a, b) = seg(i);
        let maxx = a.re.max(b.re);
        for &j in &order[oi + 1..] {
            if minx(j) > maxx {
                break;
            }
            let adjacent = i.abs_diff(j) <= 1 || (closed && i.abs_diff(j) == nseg - 1);
            if adjacent {
                continue;
            }
            let (c, d) = seg(j);
            if segments_cross(a, b, c, d) {
                return Some((i.min(j), i.max(j)));
            }
        }
    }
    None
}

fn cross(u: Complex64, v: Complex64) -> f64 {
    u.re * v.im - u.im * v.re
}

fn segments_cross(a: Complex64, b: Complex64, c: Complex64, d: Complex64) -> bool {
    let d1 = cross(b - a, c - a);
    let d2 = cross(b - a, d - a);
    let d3 = cross(d - c, a - c);
    let d4 = cross(d - c, b - c);
    if ((d1 > 0.0 && d2 < 0.0) || (d1 < 0.0 && d2 > 0.0)) && ((d3 > 0.0 && d4 < 0.0) || (d3 < 0.0 && d4 > 0.0)) {
        return true;
    }
    // Touching or collinear overlap.
    let on = |p: Complex64, q: Complex64, r: Complex64| {
        cross(q - p, r - p) == 0.0
            && r.re >= p.re.min(q.re)
            && r.re <= p.re.max(q.re)
            && r.im >= p.im.min(q.im)
            && r.im <= p.im.max(q.im)
    };
    on(a, b, c) || on(a, b, d) || on(c, d, a) || on(c, d, b)
}
