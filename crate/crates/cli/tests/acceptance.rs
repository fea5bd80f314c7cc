//! Acceptance criteria, one line each. Exits non-zero if any criterion fails.

use std::f64::consts::{PI, TAU};
use std::process::ExitCode;
use std::time::Instant;

use harmext_cli::config::JobConfig;
use harmext_cli::run;
use harmext_core::boundary::{compatibility, graph_h, hilbert_transform, BoundaryData, DataFunction, GraphCauchyData, Verdict};
use harmext_core::distance::{curvature_upper_bound, dstar, fourier_lower_bound, r2_estimate};
use harmext_core::extension::{local_series, ExtensionConfig, Extender};
use harmext_core::series::{brute_r0_oracle, lambda_coeff_det, lambda_jet, r0, sup_root, MajorantVerdict, RadiusEstimate};
use harmext_core::{boundary::c_jet, CurveModel, LocalJet};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::json;

type Outcome = Result<String, String>;

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn check(cond: bool, msg: impl Into<String>) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg.into())
    }
}

fn analyze(job: serde_json::Value) -> Result<(harmext_cli::pipeline::DistanceSummary, f64), String> {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let cfg: JobConfig = serde_json::from_value(job).map_err(|e| e.to_string())?;
    let start = Instant::now();
    let out = run(&cfg, &cfg.outputs, dir.path()).map_err(|e| e.to_string())?;
    let secs = start.elapsed().as_secs_f64();
    Ok((out.report.distance.ok_or("no distance summary")?, secs))
}

fn unit_tangential() -> serde_json::Value {
    json!({"f": {"kind": "constant", "value": 1.0}, "h": {"kind": "constant", "value": 0.0}})
}

fn circle_exactness() -> Outcome {
    let mut parts = Vec::new();
    for r in [0.5, 1.0, 2.0] {
        let (d, secs) = analyze(json!({"curve": {"kind": "circle", "radius": r}, "data": unit_tangential(), "outputs": ["analyze"]}))?;
        let err = (d.d_star - r / 2.0).abs();
        check(err <= 1e-9, format!("R = {r}: d* = {} (error {err:e})", d.d_star))?;
        check(secs < 1.0, format!("R = {r}: {secs:.2} s"))?;
        parts.push(format!("R={r}: err {err:.1e}, {secs:.2}s"));
    }
    Ok(parts.join("; "))
}

fn parabola() -> Outcome {
    let (d, secs) = analyze(json!({"curve": {"kind": "parabola", "half_width": 2.0}, "data": unit_tangential(), "outputs": ["analyze"]}))?;
    let (e1, e2) = ((d.d_star - 0.25).abs(), (d.l_star - 0.5).abs());
    check(e1 <= 1e-6 && e2 <= 1e-6, format!("d* = {}, l* = {}", d.d_star, d.l_star))?;
    check(secs < 2.0, format!("{secs:.2} s"))?;
    Ok(format!("d* err {e1:.1e}, l* err {e2:.1e}, {secs:.2}s"))
}

fn flat_line() -> Outcome {
    let mut parts = Vec::new();
    for a in [0.5f64, 1.0] {
        let job = json!({
            "curve": {"kind": "flat_line", "half_width": 4.0},
            "data": {"f": {"kind": "constant", "value": 0.0}, "h": {"kind": "rational", "num": [a * a], "den": [a * a, 0.0, 1.0]}},
            "outputs": ["analyze"],
        });
        let (d, secs) = analyze(job)?;
        let rel = (d.d_star - a / 2.0).abs() / (a / 2.0);
        check(d.fitted_r2_nodes == d.grid_size, "R2 not obtained by coefficient fit on every node")?;
        check(rel <= 0.02, format!("a = {a}: d* = {} (relative error {rel:.3})", d.d_star))?;
        check(secs < 2.0, format!("a = {a}: {secs:.2} s"))?;
        parts.push(format!("a={a}: rel err {rel:.1e}, {secs:.2}s"));
    }
    Ok(parts.join("; "))
}

fn r0_oracle() -> Outcome {
    let start = Instant::now();
    let mut worst = 0.0f64;
    let circle = CurveModel::circle(1.0).unwrap();
    let b = lambda_jet(&circle.curve_jet(0.0, 32)).unwrap();
    let v = r0(sup_root(&b, None).estimate, &RadiusEstimate::entire("circle"));
    worst = worst.max((v - 2.0 * brute_r0_oracle(&b, f64::INFINITY, f64::INFINITY)).abs());

    let parabola = CurveModel::parabola(2.0).unwrap();
    let data = BoundaryData::from_functions(&parabola, DataFunction::constant(1.0), DataFunction::zero(), 64, true).unwrap();
    let b = lambda_jet(&parabola.curve_jet(0.0, 32)).unwrap();
    let r2 = r2_estimate(&parabola, &data, &c_jet(&parabola, &data, 0.0, 32).unwrap()).unwrap();
    let r1 = parabola.parameter_distance(0.0, &parabola.derivative_zeros());
    let v = r0(sup_root(&b, None).estimate, &r2);
    worst = worst.max((v - 2.0 * brute_r0_oracle(&b, r1, r2.value)).abs());

    let mut rng = ChaCha8Rng::seed_from_u64(404);
    for _ in 0..100 {
        let q: f64 = rng.gen_range(0.05..2.0);
        let r2v = rng.gen_range(0.2..5.0);
        let mut coeffs = vec![c(0.0, 1.0)];
        coeffs.extend((1..=32).map(|n| c(q.powi(n), 0.0)));
        let b = LocalJet::new(0.0, coeffs);
        let v = r0(sup_root(&b, None).estimate, &RadiusEstimate::exact(r2v, "geometric"));
        worst = worst.max((v - 2.0 * brute_r0_oracle(&b, f64::INFINITY, r2v)).abs());
    }
    let secs = start.elapsed().as_secs_f64();
    check(worst <= 1e-4, format!("worst |r0 - 2 oracle| = {worst:e}"))?;
    check(secs < 5.0, format!("{secs:.2} s"))?;
    Ok(format!("102 cases, worst {worst:.1e}, {secs:.2}s"))
}

fn random_fourier(rng: &mut ChaCha8Rng, max_deg: i64, amp0: f64) -> CurveModel {
    loop {
        let deg = rng.gen_range(1..=max_deg);
        let mut modes = vec![(-1, c(1.0, 0.0))];
        for k in -deg..=deg {
            if k != -1 && k != 0 {
                let amp = amp0 / (k * k) as f64;
                modes.push((k, c(rng.gen_range(-amp..amp), rng.gen_range(-amp..amp))));
            }
        }
        if let Ok(curve) = CurveModel::closed_fourier(modes) {
            return curve;
        }
    }
}

fn determinant_crosscheck() -> Outcome {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(505);
    let mut worst = 0.0f64;
    for _ in 0..1000 {
        let curve = random_fourier(&mut rng, 6, 0.25);
        let a = curve.curve_jet(rng.gen_range(0.0..TAU), 10);
        let b = lambda_jet(&a).unwrap();
        for n in 1..=10 {
            let rel = (b.coeff(n) - lambda_coeff_det(&a, n)).norm() / b.coeff(n).norm().max(f64::MIN_POSITIVE);
            worst = worst.max(rel);
        }
    }
    let secs = start.elapsed().as_secs_f64();
    check(worst <= 1e-10, format!("worst relative disagreement {worst:e}"))?;
    check(secs < 10.0, format!("{secs:.2} s"))?;
    Ok(format!("1000 curves, worst {worst:.1e}, {secs:.2}s"))
}

fn dense_pv(curve: &CurveModel, h: &dyn Fn(f64) -> f64, theta: f64, n: usize) -> f64 {
    let z0 = curve.point(theta);
    let d0 = curve.dz(theta, 1);
    let tau = d0 / d0.norm();
    let h0 = h(theta);
    let step = TAU / n as f64;
    let mut acc = 0.0;
    for j in 0..n {
        let phi = theta + (j as f64 + 0.5) * step;
        let dz = z0 - curve.point(phi);
        let k = (tau.conj() * dz).re * curve.speed(phi) / dz.norm_sqr();
        acc += h(phi) * k - h0 * 0.5 / (0.5 * (theta - phi)).tan();
    }
    acc * step / PI
}

fn hilbert() -> Outcome {
    let curve = CurveModel::circle(1.0).unwrap();
    let sign = dense_pv(&curve, &|t| t.cos(), 0.7, 8192).signum();
    let grid = curve.grid(256);
    let mut worst = 0.0f64;
    for k in 1..=10 {
        let h: Vec<f64> = grid.iter().map(|&t| (k as f64 * t).cos()).collect();
        let out = hilbert_transform(&curve, &h).unwrap();
        let err = grid.iter().zip(&out).map(|(&t, v)| (v - sign * (k as f64 * t).sin()).abs()).fold(0.0, f64::max);
        worst = worst.max(err);
    }
    check(worst <= 1e-8, format!("cos k: max error {worst:e}"))?;
    let ones = hilbert_transform(&curve, &vec![1.0; 256]).unwrap();
    let zero_err = ones.iter().fold(0.0f64, |a, v| a.max(v.abs()));
    check(zero_err <= 1e-12, format!("h = 1: max {zero_err:e}"))?;

    let curve = CurveModel::closed_fourier(vec![(-1, c(1.0, 0.0)), (2, c(0.1, 0.0))]).unwrap();
    let f = |t: f64| (t.cos() + 0.3 * (2.0 * t).sin()).exp();
    let at = |m: usize| {
        let g = curve.grid(m);
        hilbert_transform(&curve, &g.iter().map(|&t| f(t)).collect::<Vec<_>>()).unwrap()
    };
    let mut diffs = Vec::new();
    let mut m = 16;
    while m <= 256 {
        let (a, b) = (at(m), at(2 * m));
        diffs.push(a.iter().enumerate().map(|(i, v)| (v - b[2 * i]).abs()).fold(0.0, f64::max));
        m *= 2;
    }
    let mut min_factor = f64::INFINITY;
    for w in diffs.windows(2) {
        if w[0] > 1e-10 && w[1] > 1e-13 {
            min_factor = min_factor.min(w[0] / w[1]);
        }
    }
    check(min_factor >= 10.0, format!("self-convergence factor {min_factor:.1}"))?;
    Ok(format!("cos k err {worst:.1e} (sign {sign:+}), h=1 err {zero_err:.1e}, min factor {min_factor:.0}"))
}

fn compat_dichotomy() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let mut wrong = Vec::new();
    for case in 0..20 {
        let curve = CurveModel::closed_fourier(vec![
            (-1, c(1.0, 0.0)),
            (rng.gen_range(2..5), c(rng.gen_range(-0.05..0.05), rng.gen_range(-0.05..0.05))),
        ])
        .unwrap();
        let poles: Vec<(Complex64, Complex64)> = (0..rng.gen_range(1..4))
            .map(|_| {
                let zs = Complex64::from_polar(rng.gen_range(0.0..0.6), rng.gen_range(0.0..TAU));
                (zs, c(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
            })
            .collect();
        let field = |z: Complex64| poles.iter().map(|(zs, a)| a / (z - zs)).sum::<Complex64>();
        let rep = compatibility(&curve, &BoundaryData::from_field(&curve, field, 256).unwrap()).unwrap();
        if rep.verdict != Verdict::AnalyticLikely || !(rep.strip_width > 0.0) {
            wrong.push(format!("planted {case}: {:?}", rep.verdict));
        }
    }
    let curve = CurveModel::circle(1.0).unwrap();
    let grid = curve.grid(256);
    for case in 0..5 {
        let shift = 0.4 * case as f64;
        let f: Vec<f64> = grid.iter().map(|&t| (t - shift).sin().abs() * (1.0 + 0.3 * (t + shift).cos())).collect();
        let rep = compatibility(&curve, &BoundaryData::from_samples(&curve, f, vec![0.0; 256], false).unwrap()).unwrap();
        if rep.verdict != Verdict::NotAnalytic {
            wrong.push(format!("kink {case}: {:?}", rep.verdict));
        }
    }
    check(wrong.is_empty(), wrong.join(", "))?;
    Ok("20/20 planted AnalyticLikely, 5/5 kinks NotAnalytic".into())
}

/// Exact boundary forms of `1/(z - q)` on the unit circle `z = e^{-it}`:
/// `f = sum q^n sin(nt)`, `h = sum q^n cos(nt)`.
fn pole_data(curve: &CurveModel, q: f64) -> BoundaryData {
    let (mut fm, mut hm) = (Vec::new(), vec![(0, c(1.0, 0.0))]);
    for n in 1..=40i64 {
        let a = q.powi(n as i32);
        fm.extend([(-n, c(0.0, a / 2.0)), (n, c(0.0, -a / 2.0))]);
        hm.extend([(-n, c(a / 2.0, 0.0)), (n, c(a / 2.0, 0.0))]);
    }
    fm.sort_by_key(|m| m.0);
    hm.sort_by_key(|m| m.0);
    BoundaryData::from_functions(curve, DataFunction::Trig { modes: fm }, DataFunction::Trig { modes: hm }, 256, false).unwrap()
}

fn extension_fidelity() -> Outcome {
    // Circle through the full pipeline at radius 1 + d*/2.
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let job = json!({
        "curve": {"kind": "circle", "radius": 1.0},
        "data": unit_tangential(),
        "outputs": ["extend"],
        "points": {"kind": "collar", "fraction": 0.5, "count": 32},
        "knobs": {"order": 24},
    });
    let cfg: JobConfig = serde_json::from_value(job).map_err(|e| e.to_string())?;
    let out = run(&cfg, &cfg.outputs, dir.path()).map_err(|e| e.to_string())?;
    let d_star = out.report.distance.as_ref().ok_or("no d*")?.d_star;
    let mut worst_circle = 0.0f64;
    for s in out.samples.as_ref().ok_or("no samples")? {
        let s = s.as_ref().map_err(|e| e.to_string())?;
        let z = c(s.point[0], s.point[1]);
        check(((z.norm() - (1.0 + d_star / 2.0)).abs()) < 1e-12, "collar point off the ring")?;
        let err = (s.value - c(0.0, 1.0) / z).norm();
        check(err <= s.error_bound.max(1e-8), format!("circle at {z}: error {err:e}, certificate {:e}", s.error_bound))?;
        worst_circle = worst_circle.max(err);
    }

    let curve = CurveModel::circle(1.0).unwrap();
    let constant = BoundaryData::from_field(&curve, |_| c(1.0, 0.0), 256).unwrap().interpolate().unwrap();
    let ext = Extender::new(&curve, &constant, ExtensionConfig::default(), 0.5).unwrap();
    let mut worst_const = 0.0f64;
    for j in 0..64 {
        let s = ext.eval(Complex64::from_polar(1.25, TAU * j as f64 / 64.0)).map_err(|e| e.to_string())?;
        worst_const = worst_const.max((s.value - 1.0).norm());
    }
    check(worst_const <= 1e-10, format!("constant field error {worst_const:e}"))?;

    let planted = |z: Complex64| 1.0 / (z - 0.3);
    let data = pole_data(&curve, 0.3);
    let ext = Extender::new(&curve, &data, ExtensionConfig::default(), 0.5).unwrap();
    let mut ratio = 0.0f64;
    for j in 0..64 {
        let p = Complex64::from_polar(1.2, TAU * (j as f64 + 0.3) / 64.0);
        let s = ext.eval(p).map_err(|e| e.to_string())?;
        let err = (s.value - planted(p)).norm();
        check(s.inside_certified && err <= s.error_bound, format!("planted at {p}: error {err:e}, certificate {:e}", s.error_bound))?;
        ratio = ratio.max(err / s.error_bound);
    }
    Ok(format!("circle err {worst_circle:.1e}, constant err {worst_const:.1e}, planted err/certificate <= {ratio:.2}"))
}

fn majorant_dominance() -> Outcome {
    let mut configs: Vec<(String, CurveModel, BoundaryData)> = Vec::new();
    let circle = CurveModel::circle(1.0).unwrap();
    configs.push(("circle f=1".into(), circle.clone(), BoundaryData::from_functions(&circle, DataFunction::constant(1.0), DataFunction::zero(), 64, true).unwrap()));
    configs.push(("circle B=1".into(), circle.clone(), BoundaryData::from_functions(&circle, DataFunction::sin(1).with_scale(-1.0), DataFunction::cos(1), 64, true).unwrap()));
    configs.push(("circle 1/(z-0.3)".into(), circle.clone(), BoundaryData::from_field(&circle, |z| 1.0 / (z - 0.3), 256).unwrap().interpolate().unwrap()));
    let parabola = CurveModel::parabola(2.0).unwrap();
    configs.push(("parabola f=1".into(), parabola.clone(), BoundaryData::from_functions(&parabola, DataFunction::constant(1.0), DataFunction::zero(), 64, true).unwrap()));
    let line = CurveModel::flat_line(4.0).unwrap();
    for a in [0.5, 1.0] {
        let h = DataFunction::Rational { num: vec![a * a], den: vec![a * a, 0.0, 1.0] };
        configs.push((format!("line a={a}"), line.clone(), BoundaryData::from_functions(&line, DataFunction::zero(), h, 64, false).unwrap()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(606);
    for i in 0..10 {
        let curve = random_fourier(&mut rng, 8, 0.3);
        let data = BoundaryData::from_functions(&curve, DataFunction::constant(1.0), DataFunction::cos(1), 64, true).unwrap();
        configs.push((format!("random {i}"), curve, data));
    }
    let mut checked = 0;
    for (name, curve, data) in &configs {
        let (lo, hi) = curve.domain();
        for j in 0..8 {
            let t0 = if curve.is_closed() { TAU * j as f64 / 8.0 } else { lo + (hi - lo) * (j as f64 + 0.5) / 8.0 };
            let sol = local_series(curve, data, t0, 6, 6).map_err(|e| format!("{name}: {e}"))?;
            if let MajorantVerdict::Violation { k, l, coefficient, bound } = sol.majorant_verdict {
                return Err(format!("{name} at t0 = {t0}: |phi_{k},{l}| = {coefficient:e} > {bound:e}"));
            }
            checked += 1;
        }
    }
    Ok(format!("{checked} local solutions, k+l <= 12, zero violations"))
}

fn inequality_suite() -> Outcome {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(707);
    let mut tightest = f64::INFINITY;
    for case in 0..200 {
        let curve = random_fourier(&mut rng, 8, 0.3);
        let data = BoundaryData::from_functions(&curve, DataFunction::constant(1.0), DataFunction::zero(), 64, true).unwrap();
        let p = dstar(&curve, &data, 256).map_err(|e| format!("case {case}: {e}"))?;
        let kb = curvature_upper_bound(&curve);
        check(p.d_star <= kb * (1.0 + 1e-12), format!("case {case}: d* {} > curvature bound {kb}", p.d_star))?;
        let lb = fourier_lower_bound(&curve, &data, p.l_star).map_err(|e| e.to_string())?;
        check(lb <= p.d_star + 1e-9, format!("case {case}: Fourier bound {lb} > d* {}", p.d_star))?;
        tightest = tightest.min(p.d_star - lb);
    }
    let secs = start.elapsed().as_secs_f64();
    check(secs < 60.0, format!("{secs:.1} s"))?;
    Ok(format!("200 curves, min(d* - lower bound) {tightest:.2e}, {secs:.1}s"))
}

fn graph_sanity() -> Outcome {
    let flat = GraphCauchyData::new(vec![0.0], DataFunction::zero(), DataFunction::constant(1.0)).map_err(|e| e.to_string())?;
    let h0 = graph_h(&flat, 0.0).map_err(|e| e.to_string())?;
    let e1 = (h0 - 2.0 / PI).abs();
    check(e1 <= 1e-9, format!("flat H(0) = {h0}"))?;

    let curved = GraphCauchyData::new(vec![0.0, 0.0, 1.0], DataFunction::zero(), DataFunction::constant(1.0)).map_err(|e| e.to_string())?;
    let v = graph_h(&curved, 0.0).map_err(|e| e.to_string())?;
    let eps: f64 = 1e-3;
    let n = 1_000_000;
    let integrand = |t: f64| (2.0 * t).hypot(1.0) * 0.5 * (t * t + t.powi(4)).ln();
    let trap = |a: f64, b: f64, m: usize| {
        let h = (b - a) / m as f64;
        let mut s = 0.5 * (integrand(a) + integrand(b));
        for i in 1..m {
            s += integrand(a + h * i as f64);
        }
        s * h
    };
    let inner = 2.0 * eps * (eps.ln() - 1.0);
    let oracle = -(trap(-1.0, -eps, n / 2) + trap(eps, 1.0, n / 2) + inner) / PI;
    let e2 = (v - oracle).abs();
    check(e2 <= 1e-7, format!("curved H(0) = {v}, oracle {oracle}"))?;
    Ok(format!("flat err {e1:.1e}, curved err {e2:.1e}"))
}

fn main() -> ExitCode {
    let criteria: [(&str, fn() -> Outcome); 11] = [
        ("circle exactness", circle_exactness),
        ("parabola", parabola),
        ("flat-line strip data", flat_line),
        ("r0 supremum oracle", r0_oracle),
        ("b_n recurrence vs determinant", determinant_crosscheck),
        ("Hilbert transform", hilbert),
        ("compatibility dichotomy", compat_dichotomy),
        ("extension fidelity", extension_fidelity),
        ("majorant dominance", majorant_dominance),
        ("inequality suite", inequality_suite),
        ("graph_H sanity", graph_sanity),
    ];
    let mut failed = 0;
    for (i, (name, f)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let res = f();
        let secs = start.elapsed().as_secs_f64();
        match res {
            Ok(detail) => println!("PASS  {:>2}. {name} [{secs:.2}s]: {detail}", i + 1),
            Err(why) => {
                failed += 1;
                println!("FAIL  {:>2}. {name} [{secs:.2}s]: {why}", i + 1);
            }
        }
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
