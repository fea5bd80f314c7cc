use std::time::Instant;

use harmext_core::boundary::{c_jet, BoundaryData, DataFunction};
use harmext_core::distance::r2_estimate;
use harmext_core::series::{brute_r0_oracle, lambda_coeff_det, lambda_jet, m1, r0, sup_root, RadiusEstimate};
use harmext_core::{CurveModel, LocalJet};
use num_complex::Complex64;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn random_curve(rng: &mut ChaCha8Rng) -> CurveModel {
    loop {
        let deg = rng.gen_range(1..=6i64);
        let mut modes = vec![(-1, c(1.0, 0.0))];
        for k in -deg..=deg {
            if k != -1 && k != 0 {
                let amp = 0.25 / (k * k) as f64;
                modes.push((k, c(rng.gen_range(-amp..amp), rng.gen_range(-amp..amp))));
            }
        }
        if let Ok(curve) = CurveModel::closed_fourier(modes) {
            return curve;
        }
    }
}

#[test]
fn recurrence_matches_determinant() {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let mut worst = 0.0f64;
    for _ in 0..1000 {
        let curve = random_curve(&mut rng);
        let t0 = rng.gen_range(0.0..std::f64::consts::TAU);
        let a = curve.curve_jet(t0, 10);
        let b = lambda_jet(&a).unwrap();
        assert_eq!(b.coeff(0), c(0.0, 1.0));
        for n in 1..=10 {
            let det = lambda_coeff_det(&a, n);
            let rel = (b.coeff(n) - det).norm() / b.coeff(n).norm().max(f64::MIN_POSITIVE);
            worst = worst.max(rel);
        }
    }
    assert!(worst < 1e-10, "worst relative disagreement {worst:e}");
    assert!(start.elapsed().as_secs_f64() < 10.0);
}

fn geometric_jet(q: f64, order: usize) -> LocalJet {
    let mut coeffs = vec![c(0.0, 1.0)];
    coeffs.extend((1..=order).map(|n| c(q.powi(n as i32), 0.0)));
    LocalJet::new(0.0, coeffs)
}

#[test]
fn r0_matches_brute_supremum() {
    let start = Instant::now();
    // Circle: R1 = R2 = inf.
    let circle = CurveModel::circle(1.0).unwrap();
    let b = lambda_jet(&circle.curve_jet(0.3, 32)).unwrap();
    let sup = sup_root(&b, None);
    let v = r0(sup.estimate, &RadiusEstimate::entire("circle"));
    assert!((v - 2.0 * brute_r0_oracle(&b, f64::INFINITY, f64::INFINITY)).abs() < 1e-4);
    assert!((brute_r0_oracle(&b, f64::INFINITY, f64::INFINITY) - 0.5).abs() < 1e-4);

    // Parabola vertex with tangential unit data.
    let parabola = CurveModel::parabola(2.0).unwrap();
    let data = BoundaryData::from_functions(&parabola, DataFunction::constant(1.0), DataFunction::zero(), 64, true).unwrap();
    let b = lambda_jet(&parabola.curve_jet(0.0, 32)).unwrap();
    let cj = c_jet(&parabola, &data, 0.0, 32).unwrap();
    let r2 = r2_estimate(&parabola, &data, &cj).unwrap();
    let r1 = parabola.parameter_distance(0.0, &parabola.derivative_zeros());
    let v = r0(sup_root(&b, None).estimate, &r2);
    let brute = brute_r0_oracle(&b, r1, r2.value);
    assert!((v - 2.0 * brute).abs() < 1e-4, "{v} vs {brute}");
    assert!((brute - 0.25).abs() < 1e-4);

    // Geometric coefficients b_n = q^n with a random R2.
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    for case in 0..100 {
        let q = rng.gen_range(0.05..2.0);
        let r2v = rng.gen_range(0.2..5.0);
        let b = geometric_jet(q, 32);
        let v = r0(sup_root(&b, None).estimate, &RadiusEstimate::exact(r2v, "test"));
        let brute = brute_r0_oracle(&b, f64::INFINITY, r2v);
        assert!((v - 2.0 * brute).abs() < 1e-4, "case {case}: q = {q}, R2 = {r2v}: {v} vs {brute}");
        assert!((brute - (1.0 / q).min(r2v) / 2.0).abs() < 1e-4);
    }
    assert!(start.elapsed().as_secs_f64() < 5.0);
}

#[test]
fn m1_is_one_below_r0() {
    let mut rng = ChaCha8Rng::seed_from_u64(31);
    for _ in 0..50 {
        let curve = random_curve(&mut rng);
        let b = lambda_jet(&curve.curve_jet(rng.gen_range(0.0..6.0), 32)).unwrap();
        let s = sup_root(&b, None).estimate;
        let rr = if s > 0.0 { 1.0 / s } else { f64::INFINITY };
        for i in 1..=20 {
            let r = rr.min(10.0) * i as f64 / 20.0;
            let m = m1(&b, r);
            assert!(m >= 1.0);
            assert!((m - 1.0).abs() < 1e-12, "r = {r}, M1 = {m}");
        }
        for i in 1..=10 {
            assert!(m1(&b, rr * (1.0 + i as f64 * 0.1)) >= 1.0);
        }
    }
}

fn jet_strategy() -> impl Strategy<Value = LocalJet> {
    prop::collection::vec((-2.0f64..2.0, -2.0f64..2.0), 9)
        .prop_map(|v| LocalJet::new(0.0, v.into_iter().map(|(a, b)| c(a, b)).collect()))
}

proptest! {
    #[test]
    fn jet_ring_laws(x in jet_strategy(), y in jet_strategy(), z in jet_strategy()) {
        let assoc_l = x.mul(&y).unwrap().mul(&z).unwrap();
        let assoc_r = x.mul(&y.mul(&z).unwrap()).unwrap();
        let scale = |j: &LocalJet| j.coeffs().iter().map(|v| v.norm()).fold(1.0, f64::max);
        prop_assert!(assoc_l.max_abs_diff(&assoc_r) < 1e-12 * scale(&assoc_l));
        let dist_l = x.mul(&y.add(&z).unwrap()).unwrap();
        let dist_r = x.mul(&y).unwrap().add(&x.mul(&z).unwrap()).unwrap();
        prop_assert!(dist_l.max_abs_diff(&dist_r) < 1e-12 * scale(&dist_l));
        let xy = x.mul(&y).unwrap();
        prop_assert!(xy.max_abs_diff(&y.mul(&x).unwrap()) < 1e-12 * scale(&xy));
    }
}
