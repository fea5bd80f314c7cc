//! Power-series construction of the exterior field.
//!
//! Near a base point `t0` the plane is flattened by
//! `z = gamma(x~) + y~ i gamma'(t0)`. Writing the field as
//! `B(z) = Theta(x~) + phi(x~, y~)`, holomorphy becomes
//! `phi_y = Lambda (phi_x + Theta')` with `phi(x~, 0) = 0`, which is solved
//! order by order in `X = x~ - t0` and `Y = y~`.

use std::sync::OnceLock;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::boundary::{c_jet, theta, BoundaryData};
use crate::curve::{CurveModel, FrameAt};
use crate::distance::{dstar, node_record, DistanceConfig};
use crate::error::{Error, Result};
use crate::series::{lambda_jet, majorant_check, MajorantParams, MajorantVerdict};

const I: Complex64 = Complex64::new(0.0, 1.0);

/// Cap on the majorant radius when every radius limit is infinite.
pub const MAJORANT_RADIUS_CAP: f64 = 16.0;

/// Newton iteration limit for the inverse flattening map.
pub const NEWTON_MAX_ITER: usize = 50;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ExtensionConfig {
    /// Order in `X`; rows of the table reach total degree `kx + ky`.
    pub kx: usize,
    /// Order in `Y`.
    pub ky: usize,
    /// Number of base points in the patch lattice.
    pub lattice: usize,
}

impl Default for ExtensionConfig {
    fn default() -> Self {
        Self { kx: 32, ky: 32, lattice: 128 }
    }
}

/// Local power-series solution about one base point.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LocalSolution {
    pub t0: f64,
    pub kx: usize,
    pub ky: usize,
    /// `phi[l][k]` is the coefficient of `X^k Y^l`, for `k <= kx + ky - l`.
    pub phi: Vec<Vec<Complex64>>,
    pub majorant: MajorantParams,
    pub majorant_verdict: MajorantVerdict,
    pub frame: FrameAt,
    /// `gamma(t0)` as a complex number.
    pub origin: Complex64,
    /// `gamma'(t0)` rotated to the exterior, unnormalised.
    pub normal_axis: Complex64,
}

impl LocalSolution {
    /// Total degree of the table.
    pub fn degree(&self) -> usize {
        self.kx + self.ky
    }

    /// `sum phi_{k,l} X^k Y^l`.
    pub fn series(&self, x: f64, y: f64) -> Complex64 {
        self.phi.iter().rev().fold(Complex64::new(0.0, 0.0), |acc, row| {
            acc * y + row.iter().rev().fold(Complex64::new(0.0, 0.0), |s, &p| s * x + p)
        })
    }

    /// Majorant tail `(M2/M1)(V - V_trunc)` at `(|X|, |Y|)`, or `None` outside the region.
    pub fn certificate(&self, x: f64, y: f64) -> Option<f64> {
        let (ax, ay) = (x.abs(), y.abs());
        if !self.majorant.contains(ax, ay) {
            return None;
        }
        let full = self.majorant.value(ax, ay);
        let table = self.majorant.coefficient_table(self.kx, self.ky);
        let partial: f64 = table
            .iter()
            .rev()
            .fold(0.0, |acc, row| acc * ay + row.iter().rev().fold(0.0, |s, &v| s * ax + v));
        Some((full - partial).max(0.0) + 4.0 * f64::EPSILON * full)
    }

    /// Size of the highest-degree shell, used as a heuristic error outside the region.
    pub fn last_shell(&self, x: f64, y: f64) -> f64 {
        let n = self.degree();
        self.phi
            .iter()
            .enumerate()
            .filter_map(|(l, row)| row.get(n - l).map(|p| p.norm() * x.abs().powi((n - l) as i32) * y.abs().powi(l as i32)))
            .sum()
    }
}

/// Fills the coefficient table by matching powers in
/// `phi_Y = Lambda phi_X + c`:
/// `(l+1) phi_{k,l+1} = sum_j b_j (k-j+1) phi_{k-j+1,l} + [l=0] c_k`.
pub fn local_series(curve: &CurveModel, data: &BoundaryData, t0: f64, kx: usize, ky: usize) -> Result<LocalSolution> {
    let n = kx + ky;
    // Radii and majorant constants use at least the default order even for short tables.
    let order = n.max(DistanceConfig::default().order);
    let frame = curve.frame_at(t0)?;
    let a = curve.curve_jet(t0, order);
    let b = lambda_jet(&a)?;
    let c = c_jet(curve, data, t0, order)?;
    let node = node_record(curve, data, t0, order)?;
    let r_limit = node.r1.min(node.r2.value);
    let majorant = MajorantParams::choose(&b, &c, node.r0, r_limit, MAJORANT_RADIUS_CAP);

    let zero = Complex64::new(0.0, 0.0);
    let mut phi: Vec<Vec<Complex64>> = vec![vec![zero; n + 1]];
    for l in 0..ky {
        let prev = &phi[l];
        let width = n - l - 1;
        let row: Vec<Complex64> = (0..=width)
            .map(|k| {
                let mut s = (0..=k)
                    .map(|j| b.coeff(j) * (k - j + 1) as f64 * prev[k - j + 1])
                    .sum::<Complex64>();
                if l == 0 {
                    s += c.coeff(k);
                }
                s / (l + 1) as f64
            })
            .collect();
        phi.push(row);
    }
    if phi.iter().flatten().any(|p| !p.is_finite()) {
        return Err(Error::InvariantViolated(format!("non-finite series coefficient at t0 = {t0}")));
    }
    let majorant_verdict = majorant_check(&majorant, &phi);
    Ok(LocalSolution {
        t0,
        kx,
        ky,
        phi,
        majorant,
        majorant_verdict,
        frame,
        origin: curve.point(t0),
        normal_axis: I * a.coeff(0),
    })
}

/// A field value at one physical point.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FieldSample {
    pub point: [f64; 2],
    /// `B1 - i B2`.
    pub value: Complex64,
    pub t0: f64,
    /// Flattened coordinates `(x~, y~)`.
    pub flat: [f64; 2],
    /// Majorant certificate inside the region, heuristic shell estimate outside.
    pub error_bound: f64,
    pub inside_certified: bool,
    /// Distance to the curve exceeds the supplied collar width.
    pub beyond_bound: bool,
    /// Point lies on the exterior side of the curve.
    pub exterior: bool,
}

impl FieldSample {
    /// `(B1, B2)`.
    pub fn components(&self) -> (f64, f64) {
        (self.value.re, -self.value.im)
    }
}

/// Solves `gamma(x~) + y~ i gamma'(t0) = p` by damped Newton from `(t0, 0)`.
pub fn invert_flattening(curve: &CurveModel, sol: &LocalSolution, p: Complex64) -> Result<(f64, f64)> {
    let axis = sol.normal_axis;
    let residual = |x: f64, y: f64| curve.point(x) + axis * y - p;
    let scale = p.norm().max(sol.origin.norm()).max(1.0);
    let (mut x, mut y) = (sol.t0, 0.0);
    let mut r = residual(x, y);
    for _ in 0..NEWTON_MAX_ITER {
        if r.norm() <= 1e-14 * scale {
            return Ok((x, y));
        }
        let d = curve.dz(x, 1);
        // Columns d and axis; solve d dx + axis dy = -r over the reals.
        let det = d.re * axis.im - d.im * axis.re;
        if det.abs() < 1e-300 {
            break;
        }
        let dx = (-r.re * axis.im + r.im * axis.re) / det;
        let dy = (-d.re * r.im + d.im * r.re) / det;
        let mut step = 1.0;
        loop {
            let (nx, ny) = (x + step * dx, y + step * dy);
            let nr = residual(nx, ny);
            if nr.norm() < r.norm() || step < 1e-6 {
                x = nx;
                y = ny;
                r = nr;
                break;
            }
            step *= 0.5;
        }
    }
    if r.norm() <= 1e-12 * scale {
        return Ok((x, y));
    }
    Err(Error::InversionFailure { x: p.re, y: p.im })
}

/// Evaluates `B = Theta(x~) + phi(X, Y)` at `p` with the given local solution.
pub fn eval_field(curve: &CurveModel, data: &BoundaryData, sol: &LocalSolution, p: Complex64) -> Result<FieldSample> {
    let (xt, yt) = invert_flattening(curve, sol, p)?;
    let (x, y) = (xt - sol.t0, yt);
    let value = theta(curve, data, xt)? + sol.series(x, y);
    let cert = sol.certificate(x, y);
    let (tp, _) = curve.project(p);
    let n = curve.frame_at(tp)?.normal;
    let q = curve.point(tp);
    let exterior = (p.re - q.re) * n[0] + (p.im - q.im) * n[1] >= 0.0;
    Ok(FieldSample {
        point: [p.re, p.im],
        value,
        t0: sol.t0,
        flat: [xt, yt],
        error_bound: cert.unwrap_or_else(|| sol.last_shell(x, y)),
        inside_certified: cert.is_some(),
        beyond_bound: false,
        exterior,
    })
}

/// Patchwork of local solutions on a lattice of base points, built lazily.
pub struct Extender<'a> {
    curve: &'a CurveModel,
    data: &'a BoundaryData,
    cfg: ExtensionConfig,
    bases: Vec<f64>,
    cache: Vec<OnceLock<std::result::Result<LocalSolution, Error>>>,
    collar: f64,
}

impl<'a> Extender<'a> {
    /// `collar` is the width beyond which samples are flagged (usually `d*`).
    pub fn new(curve: &'a CurveModel, data: &'a BoundaryData, cfg: ExtensionConfig, collar: f64) -> Result<Self> {
        if cfg.lattice < 2 || cfg.kx == 0 || cfg.ky == 0 {
            return Err(Error::InvalidData("lattice must have at least 2 points and orders must be positive".into()));
        }
        data.forms().ok_or(Error::GridOnlyData)?;
        let bases = curve.grid(cfg.lattice);
        let cache = (0..bases.len()).map(|_| OnceLock::new()).collect();
        Ok(Self { curve, data, cfg, bases, cache, collar })
    }

    pub fn bases(&self) -> &[f64] {
        &self.bases
    }

    pub fn config(&self) -> ExtensionConfig {
        self.cfg
    }

    /// The local solution at lattice index `i`.
    pub fn solution(&self, i: usize) -> Result<&LocalSolution> {
        self.cache[i]
            .get_or_init(|| local_series(self.curve, self.data, self.bases[i], self.cfg.kx, self.cfg.ky))
            .as_ref()
            .map_err(Clone::clone)
    }

    /// Lattice index nearest to parameter `t`.
    pub fn nearest_base(&self, t: f64) -> usize {
        let n = self.bases.len();
        let (lo, hi) = self.curve.domain();
        if self.curve.is_closed() {
            let step = (hi - lo) / n as f64;
            ((t - lo) / step).round().rem_euclid(n as f64) as usize % n
        } else {
            let step = (hi - lo) / (n - 1) as f64;
            (((t - lo) / step).round().max(0.0) as usize).min(n - 1)
        }
    }

    /// Neighbouring lattice index on either side, if any.
    pub fn neighbour(&self, i: usize, forward: bool) -> Option<usize> {
        let n = self.bases.len();
        match (self.curve.is_closed(), forward) {
            (true, true) => Some((i + 1) % n),
            (true, false) => Some((i + n - 1) % n),
            (false, true) => (i + 1 < n).then_some(i + 1),
            (false, false) => i.checked_sub(1),
        }
    }

    /// Evaluates with the base point at lattice index `i`.
    pub fn eval_with(&self, i: usize, p: Complex64) -> Result<FieldSample> {
        let sol = self.solution(i)?;
        let mut s = eval_field(self.curve, self.data, sol, p)?;
        let (_, dist) = self.curve.project(p);
        s.beyond_bound = dist > self.collar;
        Ok(s)
    }

    /// Evaluates with the base point nearest to the projection of `p`.
    pub fn eval(&self, p: Complex64) -> Result<FieldSample> {
        let (t, _) = self.curve.project(p);
        self.eval_with(self.nearest_base(t), p)
    }

    pub fn eval_all(&self, points: &[Complex64]) -> Vec<Result<FieldSample>> {
        points.par_iter().map(|&p| self.eval(p)).collect()
    }
}

/// Evaluates the extension at every point, flagging points farther than `d*`.
pub fn extend_on_grid(
    curve: &CurveModel,
    data: &BoundaryData,
    points: &[Complex64],
    cfg: ExtensionConfig,
) -> Result<Vec<Result<FieldSample>>> {
    let profile = dstar(curve, data, DistanceConfig::default().grid)?;
    let ext = Extender::new(curve, data, cfg, profile.d_star)?;
    Ok(ext.eval_all(points))
}
