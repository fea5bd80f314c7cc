//! Dense polynomial helpers. Coefficients are stored lowest degree first.

use nalgebra::DMatrix;
use num_complex::Complex64;

pub fn eval_real(p: &[f64], x: f64) -> f64 {
    p.iter().rev().fold(0.0, |acc, &c| acc * x + c)
}

pub fn eval_complex(p: &[Complex64], x: Complex64) -> Complex64 {
    p.iter()
        .rev()
        .fold(Complex64::new(0.0, 0.0), |acc, &c| acc * x + c)
}

pub fn derivative<T>(p: &[T]) -> Vec<T>
where
    T: Copy + std::ops::Mul<f64, Output = T>,
{
    p.iter()
        .enumerate()
        .skip(1)
        .map(|(k, &c)| c * k as f64)
        .collect()
}

/// Taylor coefficients of `p` about `x0`, i.e. `q` with `p(x) = sum q_n (x - x0)^n`.
pub fn taylor_shift(p: &[Complex64], x0: f64) -> Vec<Complex64> {
    taylor_shift_complex(p, Complex64::new(x0, 0.0))
}

/// [`taylor_shift`] about a complex point.
pub fn taylor_shift_complex(p: &[Complex64], x0: Complex64) -> Vec<Complex64> {
    // Repeated synthetic division.
    let mut work = p.to_vec();
    let n = work.len();
    for i in 0..n {
        for j in (i..n - 1).rev() {
            let hi = work[j + 1];
            work[j] += hi * x0;
        }
    }
    work
}

/// Divided difference `(p(x) - p(t)) / (x - t)` as a polynomial in `t`.
pub fn divided_difference(p: &[f64], x: f64) -> Vec<f64> {
    // Synthetic division of p(t) - p(x) by (t - x).
    let n = p.len();
    if n <= 1 {
        return vec![0.0];
    }
    let mut q = vec![0.0; n - 1];
    let mut carry = 0.0;
    for k in (1..n).rev() {
        carry = carry * x + p[k];
        q[k - 1] = carry;
    }
    q
}

/// Drops trailing coefficients whose magnitude is below `tol` relative to the largest one.
pub fn trim(p: &[Complex64], tol: f64) -> Vec<Complex64> {
    let scale = p.iter().map(|c| c.norm()).fold(0.0, f64::max);
    let mut end = p.len();
    while end > 0 && p[end - 1].norm() <= tol * scale {
        end -= 1;
    }
    p[..end].to_vec()
}

/// Roots of a complex polynomial from the eigenvalues of its companion matrix.
///
/// When the Schur iteration stalls (companion matrices of gapped polynomials
/// are highly symmetric) the roots are taken from a Taylor-shifted copy.
pub fn roots(p: &[Complex64]) -> Vec<Complex64> {
    let p = trim(p, 1e-14);
    // Leading zeros at the low end are roots at the origin.
    let zeros_at_origin = p.iter().take_while(|c| c.norm() == 0.0).count();
    let p = &p[zeros_at_origin..];
    let mut out = vec![Complex64::new(0.0, 0.0); zeros_at_origin];
    if p.len() <= 1 {
        return out;
    }
    let scale = p.iter().map(|c| c.norm()).fold(0.0, f64::max) / p[p.len() - 1].norm();
    for attempt in 0..4 {
        let s = Complex64::new(0.137, 0.291) * scale.max(1.0) * attempt as f64 * 0.1;
        if let Some(ev) = companion_eigenvalues(&taylor_shift_complex(p, s)) {
            out.extend(ev.into_iter().map(|w| w + s));
            return out;
        }
    }
    panic!("companion eigenvalue iteration failed for all shifts");
}

fn companion_eigenvalues(p: &[Complex64]) -> Option<Vec<Complex64>> {
    let deg = p.len() - 1;
    let lead = p[deg];
    let mut m = DMatrix::<Complex64>::zeros(deg, deg);
    for i in 1..deg {
        m[(i, i - 1)] = Complex64::new(1.0, 0.0);
    }
    for i in 0..deg {
        m[(i, deg - 1)] = -p[i] / lead;
    }
    m.try_schur(1e-15, 1000).map(|s| s.eigenvalues().expect("complex Schur form is triangular").iter().copied().collect())
}
