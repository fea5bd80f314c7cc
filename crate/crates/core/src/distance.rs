//! Guaranteed extension distances.
//!
//! At each base parameter `d(t0) = |gamma'(t0)| r0(t0) / 2`. The collar width
//! is `d* = min{inf_t d(t), l*}` with `l*` the widest injective exterior
//! collar.

use std::f64::consts::TAU;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use crate::boundary::{c_jet, BoundaryData};
use crate::curve::{CurveModel, DEFAULT_COLLAR_CAP};
use crate::error::{Error, Result};
use crate::jet::LocalJet;
use crate::optimize::golden_min;
use crate::series::{fit_radius, lambda_jet, r0, radius_estimate, sup_root, Provenance, RadiusEstimate, SupRoot};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DistanceConfig {
    /// Truncation order of the coefficient series.
    pub order: usize,
    /// Number of base parameters in the sweep.
    pub grid: usize,
    /// Fraction of an open parameter interval excluded at each end.
    pub open_margin: f64,
    /// Relative tolerance of the collar-width refinement.
    pub collar_tol: f64,
    /// Collar widths above this multiple of the diameter count as unbounded.
    pub collar_cap: f64,
}

impl Default for DistanceConfig {
    fn default() -> Self {
        Self { order: 32, grid: 256, open_margin: 0.01, collar_tol: 1e-10, collar_cap: DEFAULT_COLLAR_CAP }
    }
}

/// Everything computed at one base parameter.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NodeRecord {
    pub t: f64,
    /// `|gamma'| r0 / 2` from the truncated supremum.
    #[serde(with = "crate::serde_ext::extended")]
    pub d: f64,
    /// As `d`, with the certified supremum when the truncated one was still rising.
    #[serde(with = "crate::serde_ext::extended")]
    pub d_guaranteed: f64,
    #[serde(with = "crate::serde_ext::extended")]
    pub r0: f64,
    pub sup_root: SupRoot,
    /// Distance to the nearest zero of `z'`.
    #[serde(with = "crate::serde_ext::extended")]
    pub r1: f64,
    pub r2: RadiusEstimate,
    pub kappa: f64,
    pub speed: f64,
}

impl NodeRecord {
    /// `d` is only an upper estimate of the true local distance.
    pub fn upper_estimate(&self) -> bool {
        self.sup_root.rising
    }
}

/// Singular points of `Lambda` and `|z'|` in the complex parameter plane.
pub fn geometric_singularities(curve: &CurveModel) -> Vec<Complex64> {
    let zeros = curve.derivative_zeros();
    let mut out = zeros.clone();
    out.extend(zeros.iter().map(|z| z.conj()));
    out
}

/// Radius of convergence of the `c` series at its base point.
///
/// Declared-entire data give `+inf`. Entire closed forms give the exact
/// distance to the geometric singularities. Otherwise the coefficients are
/// fitted and the result capped by the geometric distance.
pub fn r2_estimate(curve: &CurveModel, data: &BoundaryData, c: &LocalJet) -> Result<RadiusEstimate> {
    if data.declared_entire() {
        return Ok(RadiusEstimate::entire("data declared entire"));
    }
    let (f, h) = data.forms().ok_or(Error::GridOnlyData)?;
    let meta = Provenance::Singularities {
        points: geometric_singularities(curve),
        period: curve.is_closed().then_some(TAU),
    };
    let exact = radius_estimate(c, &meta)?;
    if f.is_entire() && h.is_entire() && !data.is_interpolated() {
        Ok(exact)
    } else {
        Ok(fit_radius(c)?.min(exact))
    }
}

/// Upper bound for `sup_n |b_n|^{1/n}` on a Fourier curve:
/// `(1/|gamma'|) sum_n |a_n|`, with the terms beyond `a.order()` bounded by
/// `sum_k |c_k| |k|^{n+1} / n!`.
pub fn certified_sup_root(curve: &CurveModel, a: &LocalJet) -> Option<f64> {
    let modes = curve.fourier_modes()?;
    let head: f64 = a.coeffs().iter().map(|c| c.norm()).sum();
    let k_order = a.order();
    let tail: f64 = modes
        .iter()
        .map(|&(k, c)| {
            let ak = k.unsigned_abs() as f64;
            // sum_{n > K} |k|^n / n!
            let mut term = 1.0;
            for n in 1..=k_order {
                term *= ak / n as f64;
            }
            let mut rem = 0.0;
            let mut n = k_order + 1;
            loop {
                term *= ak / n as f64;
                rem += term;
                if term <= 1e-18 * rem || term == 0.0 {
                    break;
                }
                n += 1;
            }
            c.norm() * ak * rem
        })
        .sum();
    Some((head + tail) / a.coeff(0).norm())
}

/// The full record at `t0`.
pub fn node_record(curve: &CurveModel, data: &BoundaryData, t0: f64, order: usize) -> Result<NodeRecord> {
    let a = curve.curve_jet(t0, order);
    let speed = a.coeff(0).norm();
    let b = lambda_jet(&a)?;
    let c = c_jet(curve, data, t0, order)?;
    let sup = sup_root(&b, certified_sup_root(curve, &a));
    let r2 = r2_estimate(curve, data, &c)?;
    let r0v = r0(sup.estimate, &r2);
    let d_guaranteed = 0.5 * speed * r0(sup.guaranteed(), &r2);
    Ok(NodeRecord {
        t: t0,
        d: 0.5 * speed * r0v,
        d_guaranteed,
        r0: r0v,
        r1: curve.parameter_distance(t0, &curve.derivative_zeros()),
        r2,
        sup_root: sup,
        kappa: curve.signed_curvature(t0),
        speed,
    })
}

/// `d(t0) = (|gamma'(t0)|/2) min{1/sup_n |b_n|^{1/n}, R2(t0)}` at the default order.
pub fn local_distance(curve: &CurveModel, data: &BoundaryData, t0: f64) -> Result<f64> {
    Ok(node_record(curve, data, t0, DistanceConfig::default().order)?.d)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DistanceProfile {
    pub nodes: Vec<NodeRecord>,
    /// Extra evaluations: the refined minimiser and the point of maximal curvature.
    pub refined: Vec<NodeRecord>,
    /// `inf_t d(t)` over nodes and refinements, using guaranteed values.
    pub d_inf: f64,
    pub argmin_t: f64,
    pub d_star: f64,
    #[serde(with = "crate::serde_ext::extended")]
    pub l_star: f64,
    #[serde(with = "crate::serde_ext::extended")]
    pub curvature_bound: f64,
    #[serde(with = "crate::serde_ext::extended_opt")]
    pub fourier_lower_bound: Option<f64>,
    pub grid_size: usize,
    pub warnings: Vec<String>,
}

/// `d*` with the default settings and `grid_size` sweep nodes.
pub fn dstar(curve: &CurveModel, data: &BoundaryData, grid_size: usize) -> Result<DistanceProfile> {
    dstar_with(curve, data, &DistanceConfig { grid: grid_size, ..DistanceConfig::default() })
}

pub fn dstar_with(curve: &CurveModel, data: &BoundaryData, cfg: &DistanceConfig) -> Result<DistanceProfile> {
    let ts = sweep_grid(curve, cfg);
    let nodes = ts
        .par_iter()
        .map(|&t| node_record(curve, data, t, cfg.order))
        .collect::<Result<Vec<_>>>()?;
    let i = nodes
        .iter()
        .enumerate()
        .min_by(|a, b| a.1.d_guaranteed.total_cmp(&b.1.d_guaranteed))
        .map(|(i, _)| i)
        .ok_or_else(|| Error::InvalidData("empty sweep grid".into()))?;

    let mut refined = Vec::new();
    let (a, b) = neighbours(curve, &ts, i);
    let guaranteed = |t: f64| node_record(curve, data, t, cfg.order).map_or(f64::INFINITY, |r| r.d_guaranteed);
    let (tr, _) = golden_min(guaranteed, a, b, 1e-9 * (b - a).max(1e-300));
    refined.push(node_record(curve, data, wrap(curve, tr), cfg.order)?);
    let (tk, kmax) = curve.max_curvature();
    if kmax > 0.0 {
        refined.push(node_record(curve, data, wrap(curve, tk), cfg.order)?);
    }

    let best = nodes
        .iter()
        .chain(&refined)
        .min_by(|a, b| a.d_guaranteed.total_cmp(&b.d_guaranteed))
        .expect("non-empty");
    let (d_inf, argmin_t) = (best.d_guaranteed, best.t);
    let l_star = curve.collar_width_capped(cfg.collar_tol, cfg.collar_cap)?;
    let d_star = d_inf.min(l_star);
    let curvature_bound = curvature_upper_bound(curve);
    let fourier = if curve.is_closed() && data.declared_entire() {
        Some(fourier_lower_bound(curve, data, l_star)?)
    } else {
        None
    };

    let mut warnings = Vec::new();
    let rising = nodes.iter().filter(|n| n.upper_estimate()).count();
    if rising > 0 {
        let how = if curve.is_closed() { "certified bound used for d_star" } else { "no certified bound available" };
        warnings.push(format!(
            "sup |b_n|^(1/n) still rising at order {} on {rising} of {} nodes; d is an upper estimate there ({how})",
            cfg.order,
            nodes.len()
        ));
    }
    if nodes.iter().any(|n| n.r2.method == crate::series::RadiusMethod::CauchyHadamardFit) {
        warnings.push("R2 obtained by coefficient fit; d_star is an estimate, not a certificate".into());
    }

    if d_star > curvature_bound * (1.0 + 1e-9) {
        return Err(Error::InvariantViolated(format!("d_star {d_star} exceeds half the minimal radius of curvature {curvature_bound}")));
    }
    if let Some(lb) = fourier {
        if lb > d_star + 1e-9 {
            return Err(Error::InvariantViolated(format!("Fourier lower bound {lb} exceeds d_star {d_star}")));
        }
    }
    Ok(DistanceProfile {
        nodes,
        refined,
        d_inf,
        argmin_t,
        d_star,
        l_star,
        curvature_bound,
        fourier_lower_bound: fourier,
        grid_size: ts.len(),
        warnings,
    })
}

fn sweep_grid(curve: &CurveModel, cfg: &DistanceConfig) -> Vec<f64> {
    if curve.is_closed() {
        return curve.grid(cfg.grid);
    }
    let (lo, hi) = curve.domain();
    let m = cfg.open_margin * (hi - lo);
    let n = cfg.grid.max(2);
    (0..n).map(|j| lo + m + (hi - lo - 2.0 * m) * j as f64 / (n - 1) as f64).collect()
}

fn neighbours(curve: &CurveModel, ts: &[f64], i: usize) -> (f64, f64) {
    if curve.is_closed() {
        let h = TAU / ts.len() as f64;
        (ts[i] - h, ts[i] + h)
    } else {
        (ts[i.saturating_sub(1)], ts[(i + 1).min(ts.len() - 1)])
    }
}

fn wrap(curve: &CurveModel, t: f64) -> f64 {
    if curve.is_closed() { t.rem_euclid(TAU) } else { t }
}

/// `(1/2) inf_t 1/kappa(t)`.
pub fn curvature_upper_bound(curve: &CurveModel) -> f64 {
    0.5 * curve.min_radius_of_curvature()
}

/// `min{inf |gamma'|^2 / (2 sum_k |c_k| |k| e^{|k|}), l*}` for a Fourier curve
/// whose data were declared entire.
pub fn fourier_lower_bound(curve: &CurveModel, data: &BoundaryData, l_star: f64) -> Result<f64> {
    if !data.declared_entire() {
        return Err(Error::HypothesisNotDeclared);
    }
    let modes = curve.fourier_modes().ok_or(Error::OpenCurveUnsupported)?;
    let sum: f64 = modes.iter().map(|&(k, c)| c.norm() * (k.abs() as f64) * (k.abs() as f64).exp()).sum();
    let ts = curve.grid(curve.construction_nodes());
    let speeds: Vec<f64> = ts.iter().map(|&t| curve.speed(t)).collect();
    let i = crate::optimize::argmin(&speeds).expect("non-empty grid");
    let (a, b) = neighbours(curve, &ts, i);
    let (_, smin) = golden_min(|t| curve.speed(t), a, b, 1e-12);
    let smin = smin.min(speeds[i]);
    Ok((smin * smin / (2.0 * sum)).min(l_star))
}
