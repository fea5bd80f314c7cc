//! Gauss-Legendre panel quadrature, including integrands with a logarithmic
//! point singularity.

use std::num::NonZeroUsize;
use std::sync::OnceLock;

use gauss_quad::GaussLegendre;

use crate::error::{Error, Result};

const LOW: usize = 20;
const HIGH: usize = 30;

fn rule(n: usize) -> &'static GaussLegendre {
    static LO: OnceLock<GaussLegendre> = OnceLock::new();
    static HI: OnceLock<GaussLegendre> = OnceLock::new();
    let cell = if n == LOW { &LO } else { &HI };
    cell.get_or_init(|| GaussLegendre::new(NonZeroUsize::new(n).expect("nonzero order")))
}

/// Composite Gauss-Legendre on `panels` equal panels of `[a, b]` at the
/// low and high orders; returns `(high, |high - low|)`.
pub fn panels<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, panels: usize) -> (f64, f64) {
    let w = (b - a) / panels as f64;
    let (mut lo, mut hi) = (0.0, 0.0);
    for p in 0..panels {
        let (x0, x1) = (a + w * p as f64, a + w * (p + 1) as f64);
        lo += rule(LOW).integrate(x0, x1, f);
        hi += rule(HIGH).integrate(x0, x1, f);
    }
    (hi, (hi - lo).abs())
}

/// Panels on `[x, x + len]` (or `[x + len, x]` for negative `len`) graded
/// geometrically towards `x`, stopping once the panel is shorter than `floor`.
///
/// Returns the panel list ordered away from `x` and the length of the
/// untouched innermost interval.
fn graded(len: f64, floor: f64) -> (Vec<(f64, f64)>, f64) {
    let mut out = Vec::new();
    let mut outer = len.abs();
    while outer > floor {
        out.push((outer / 2.0, outer));
        outer /= 2.0;
    }
    (out, outer)
}

/// `int_a^b w(t) log|x - t| dt + int_a^b s(t) dt` for `a <= x <= b`, where `w`
/// and `s` are smooth.
///
/// Both sides of `x` are covered by geometrically graded panels; the
/// innermost interval of length `delta` uses the exact moment
/// `int_0^delta log u du = delta (log delta - 1)` with `w` frozen at `x`.
pub fn log_singular<W, S>(w: &W, s: &S, a: f64, b: f64, x: f64, tol: f64) -> Result<f64>
where
    W: Fn(f64) -> f64,
    S: Fn(f64) -> f64,
{
    let floor = 1e-15 * (b - a).max(1.0);
    let wx = w(x);
    let mut total = 0.0;
    let mut err = 0.0;
    for (dir, len) in [(-1.0, x - a), (1.0, b - x)] {
        if len <= 0.0 {
            continue;
        }
        let (pieces, delta) = graded(len, floor);
        let g = |u: f64| {
            let t = x + dir * u;
            w(t) * u.ln() + s(t)
        };
        for (u0, u1) in pieces {
            let (v, e) = panels(&g, u0, u1, 1);
            total += v;
            err += e;
        }
        if delta > 0.0 {
            total += wx * delta * (delta.ln() - 1.0) + s(x) * delta;
        }
    }
    if err > tol {
        return Err(Error::QuadratureFailure { tol, estimate: err });
    }
    Ok(total)
}

/// Smooth integral on `[a, b]` with panels split at `x` and refined until the
/// two orders agree within `tol`.
pub fn smooth(f: &dyn Fn(f64) -> f64, a: f64, b: f64, x: f64, tol: f64) -> Result<f64> {
    let mut n = 2;
    let mut last = f64::INFINITY;
    while n <= 256 {
        let (l, el) = if x > a { panels(&f, a, x, n) } else { (0.0, 0.0) };
        let (r, er) = if x < b { panels(&f, x, b, n) } else { (0.0, 0.0) };
        last = el + er;
        if last <= tol {
            return Ok(l + r);
        }
        n *= 2;
    }
    Err(Error::QuadratureFailure { tol, estimate: last })
}
