//! Stage orchestration: compat, hilbert, analyze, extend.

use std::collections::BTreeSet;
use std::path::{Path, PathBuf};
use std::time::Instant;

use harmext_core::boundary::{compatibility, hilbert_transform, BoundaryData, CompatibilityReport, Verdict};
use harmext_core::distance::{dstar_with, DistanceConfig, DistanceProfile, NodeRecord};
use harmext_core::extension::{ExtensionConfig, Extender, FieldSample};
use harmext_core::series::RadiusMethod;
use serde::Serialize;

use crate::config::{JobConfig, Stage};
use crate::error::CliError;
use crate::output::{csv_bytes, num, write_atomic};

pub const EXIT_OK: i32 = 0;
pub const EXIT_NOT_ANALYTIC: i32 = 2;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Warning {
    pub stage: &'static str,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CompatSummary {
    pub verdict: Verdict,
    pub rho: f64,
    pub fit_r2: f64,
    pub algebraic_r2: f64,
    pub usable_modes: usize,
    #[serde(with = "harmext_core::serde_ext::extended")]
    pub strip_width: f64,
    pub max_abs_residual: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HilbertSummary {
    pub grid: usize,
    pub max_abs: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DistanceSummary {
    pub d_star: f64,
    pub d_inf: f64,
    pub argmin_t: f64,
    #[serde(with = "harmext_core::serde_ext::extended")]
    pub l_star: f64,
    #[serde(with = "harmext_core::serde_ext::extended")]
    pub curvature_bound: f64,
    #[serde(with = "harmext_core::serde_ext::extended_opt")]
    pub fourier_lower_bound: Option<f64>,
    pub grid_size: usize,
    pub refined_nodes: usize,
    pub upper_estimate_nodes: usize,
    pub fitted_r2_nodes: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExtensionSummary {
    pub points: usize,
    pub evaluated: usize,
    pub certified: usize,
    pub beyond_bound: usize,
    pub interior: usize,
    pub failures: usize,
    pub max_certified_error: f64,
    pub base_points_used: usize,
    pub majorant_violations: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunReport {
    pub version: &'static str,
    pub config: JobConfig,
    pub stages: Vec<Stage>,
    pub compatibility: Option<CompatSummary>,
    pub hilbert: Option<HilbertSummary>,
    pub distance: Option<DistanceSummary>,
    pub extension: Option<ExtensionSummary>,
    pub warnings: Vec<Warning>,
    pub exit_code: i32,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct Timings {
    pub compat: Option<f64>,
    pub hilbert: Option<f64>,
    pub analyze: Option<f64>,
    pub extend: Option<f64>,
    pub total: f64,
}

/// Everything a run produced, in memory as well as on disk.
#[derive(Debug)]
pub struct RunOutcome {
    pub report: RunReport,
    pub timings: Timings,
    pub profile: Option<DistanceProfile>,
    pub compat: Option<CompatibilityReport>,
    pub samples: Option<Vec<Result<FieldSample, harmext_core::Error>>>,
    pub out_dir: PathBuf,
}

fn summarize_profile(p: &DistanceProfile) -> DistanceSummary {
    DistanceSummary {
        d_star: p.d_star,
        d_inf: p.d_inf,
        argmin_t: p.argmin_t,
        l_star: p.l_star,
        curvature_bound: p.curvature_bound,
        fourier_lower_bound: p.fourier_lower_bound,
        grid_size: p.grid_size,
        refined_nodes: p.refined.len(),
        upper_estimate_nodes: p.nodes.iter().filter(|n| n.upper_estimate()).count(),
        fitted_r2_nodes: p.nodes.iter().filter(|n| n.r2.method == RadiusMethod::CauchyHadamardFit).count(),
    }
}

fn method_name(m: RadiusMethod) -> &'static str {
    match m {
        RadiusMethod::ExactRoots => "exact_roots",
        RadiusMethod::CauchyHadamardFit => "cauchy_hadamard_fit",
        RadiusMethod::DeclaredEntire => "declared_entire",
    }
}

pub const PROFILE_HEADER: [&str; 10] = ["kind", "t", "d", "d_guaranteed", "r0", "sup_root", "R2", "R2_method", "kappa", "speed"];

fn profile_row(kind: &str, n: &NodeRecord) -> Vec<String> {
    vec![
        kind.to_string(),
        num(n.t),
        num(n.d),
        num(n.d_guaranteed),
        num(n.r0),
        num(n.sup_root.estimate),
        num(n.r2.value),
        method_name(n.r2.method).to_string(),
        num(n.kappa),
        num(n.speed),
    ]
}

fn write_profile(dir: &Path, p: &DistanceProfile) -> Result<(), CliError> {
    let rows = p
        .nodes
        .iter()
        .map(|n| profile_row("grid", n))
        .chain(p.refined.iter().map(|n| profile_row("refined", n)));
    write_atomic(&dir.join("profile.csv"), &csv_bytes(&PROFILE_HEADER, rows)?)
}

fn write_spectrum(dir: &Path, r: &CompatibilityReport) -> Result<(), CliError> {
    let rows = r.spectrum.iter().enumerate().map(|(k, g)| vec![k.to_string(), num(*g)]);
    write_atomic(&dir.join("residual_spectrum.csv"), &csv_bytes(&["k", "abs_g"], rows)?)
}

fn write_hilbert(dir: &Path, data: &BoundaryData, hh: &[f64]) -> Result<(), CliError> {
    let rows = data
        .params()
        .iter()
        .zip(data.h_samples())
        .zip(hh)
        .map(|((t, h), v)| vec![num(*t), num(*h), num(*v)]);
    write_atomic(&dir.join("hilbert.csv"), &csv_bytes(&["t", "h", "Hh"], rows)?)
}

pub const FIELD_HEADER: [&str; 8] = ["x", "y", "B1", "B2", "t0", "err_bound", "certified", "beyond_bound"];

fn write_field(dir: &Path, points: &[num_complex::Complex64], samples: &[Result<FieldSample, harmext_core::Error>]) -> Result<(), CliError> {
    let rows = points.iter().zip(samples).map(|(p, s)| match s {
        Ok(s) => {
            let (b1, b2) = s.components();
            vec![
                num(p.re),
                num(p.im),
                num(b1),
                num(b2),
                num(s.t0),
                num(s.error_bound),
                s.inside_certified.to_string(),
                s.beyond_bound.to_string(),
            ]
        }
        Err(_) => {
            let nan = num(f64::NAN);
            vec![num(p.re), num(p.im), nan.clone(), nan.clone(), nan.clone(), nan, "false".into(), "true".into()]
        }
    });
    write_atomic(&dir.join("field.csv"), &csv_bytes(&FIELD_HEADER, rows)?)
}

/// Executes `requested` stages (plus their prerequisites) and writes the outputs into `out_dir`.
///
/// Extension implies analysis, and on closed curves it is gated on the
/// compatibility verdict: a `NotAnalytic` verdict skips it and yields exit code 2.
pub fn run(cfg: &JobConfig, requested: &[Stage], out_dir: &Path) -> Result<RunOutcome, CliError> {
    cfg.validate(requested)?;
    let start = Instant::now();
    let curve = cfg.curve.build()?;
    let data = cfg.build_data(&curve)?;

    let mut stages: BTreeSet<Stage> = requested.iter().copied().collect();
    if stages.contains(&Stage::Extend) {
        stages.insert(Stage::Analyze);
        if curve.is_closed() {
            stages.insert(Stage::Compat);
        }
    }
    std::fs::create_dir_all(out_dir).map_err(|source| CliError::Io { path: out_dir.to_path_buf(), source })?;

    let mut warnings = Vec::new();
    let mut timings = Timings::default();
    let mut outcome_compat = None;
    let mut compat_summary = None;
    let mut hilbert_summary = None;
    let mut profile = None;
    let mut distance = None;
    let mut extension = None;
    let mut samples = None;
    let mut exit_code = EXIT_OK;

    if stages.contains(&Stage::Compat) {
        let t = Instant::now();
        let r = compatibility(&curve, &data).map_err(CliError::stage(Stage::Compat))?;
        write_spectrum(out_dir, &r)?;
        if r.verdict == Verdict::Inconclusive {
            warnings.push(Warning { stage: "compat", message: "compatibility verdict inconclusive".into() });
        }
        if data.is_interpolated() {
            warnings.push(Warning { stage: "compat", message: "boundary data given on a grid; closed forms are trigonometric interpolants".into() });
        }
        compat_summary = Some(CompatSummary {
            verdict: r.verdict,
            rho: r.rho,
            fit_r2: r.fit_r2,
            algebraic_r2: r.algebraic_r2,
            usable_modes: r.usable_modes,
            strip_width: r.strip_width,
            max_abs_residual: r.residual.iter().fold(0.0, |a, v| a.max(v.abs())),
        });
        outcome_compat = Some(r);
        timings.compat = Some(t.elapsed().as_secs_f64());
    }

    if stages.contains(&Stage::Hilbert) {
        let t = Instant::now();
        let hh = hilbert_transform(&curve, data.h_samples()).map_err(CliError::stage(Stage::Hilbert))?;
        write_hilbert(out_dir, &data, &hh)?;
        hilbert_summary = Some(HilbertSummary { grid: hh.len(), max_abs: hh.iter().fold(0.0, |a, v| a.max(v.abs())) });
        timings.hilbert = Some(t.elapsed().as_secs_f64());
    }

    if stages.contains(&Stage::Analyze) {
        let t = Instant::now();
        let dcfg = DistanceConfig {
            order: cfg.knobs.order,
            grid: cfg.knobs.grid,
            collar_tol: cfg.knobs.collar_tol,
            ..DistanceConfig::default()
        };
        let p = dstar_with(&curve, &data, &dcfg).map_err(CliError::stage(Stage::Analyze))?;
        write_profile(out_dir, &p)?;
        warnings.extend(p.warnings.iter().map(|m| Warning { stage: "analyze", message: m.clone() }));
        distance = Some(summarize_profile(&p));
        profile = Some(p);
        timings.analyze = Some(t.elapsed().as_secs_f64());
    }

    if stages.contains(&Stage::Extend) {
        let gate = outcome_compat.as_ref().map(|r| r.verdict);
        if !curve.is_closed() {
            warnings.push(Warning { stage: "extend", message: "no compatibility diagnostic for open curves; extension not gated".into() });
        }
        if gate == Some(Verdict::NotAnalytic) {
            warnings.push(Warning { stage: "extend", message: "compatibility verdict NotAnalytic; extension skipped".into() });
            exit_code = EXIT_NOT_ANALYTIC;
        } else {
            let t = Instant::now();
            let d_star = profile.as_ref().map_or(f64::INFINITY, |p| p.d_star);
            let points = cfg.build_points(&curve, d_star)?;
            let ecfg = ExtensionConfig { kx: cfg.knobs.order, ky: cfg.knobs.order, lattice: cfg.knobs.lattice };
            let ext = Extender::new(&curve, &data, ecfg, d_star).map_err(CliError::stage(Stage::Extend))?;
            let s = ext.eval_all(&points);
            write_field(out_dir, &points, &s)?;
            extension = Some(summarize_extension(&ext, &s, &mut warnings));
            samples = Some(s);
            timings.extend = Some(t.elapsed().as_secs_f64());
        }
    }

    timings.total = start.elapsed().as_secs_f64();
    let report = RunReport {
        version: env!("CARGO_PKG_VERSION"),
        config: cfg.clone(),
        stages: stages.into_iter().collect(),
        compatibility: compat_summary,
        hilbert: hilbert_summary,
        distance,
        extension,
        warnings,
        exit_code,
    };
    let json = serde_json::to_vec_pretty(&report).expect("report serialises");
    write_atomic(&out_dir.join("report.json"), &json)?;
    let tj = serde_json::to_vec_pretty(&timings).expect("timings serialise");
    write_atomic(&out_dir.join("timings.json"), &tj)?;
    Ok(RunOutcome { report, timings, profile, compat: outcome_compat, samples, out_dir: out_dir.to_path_buf() })
}

fn summarize_extension(
    ext: &Extender<'_>,
    samples: &[Result<FieldSample, harmext_core::Error>],
    warnings: &mut Vec<Warning>,
) -> ExtensionSummary {
    let ok: Vec<&FieldSample> = samples.iter().filter_map(|s| s.as_ref().ok()).collect();
    let bases: BTreeSet<usize> = ok.iter().map(|s| ext.nearest_base(s.t0)).collect();
    let majorant_violations = bases
        .iter()
        .filter(|&&i| ext.solution(i).is_ok_and(|sol| !sol.majorant_verdict.passed()))
        .count();
    let summary = ExtensionSummary {
        points: samples.len(),
        evaluated: ok.len(),
        certified: ok.iter().filter(|s| s.inside_certified).count(),
        beyond_bound: ok.iter().filter(|s| s.beyond_bound).count(),
        interior: ok.iter().filter(|s| !s.exterior).count(),
        failures: samples.len() - ok.len(),
        max_certified_error: ok.iter().filter(|s| s.inside_certified).fold(0.0, |a, s| a.max(s.error_bound)),
        base_points_used: bases.len(),
        majorant_violations,
    };
    if summary.failures > 0 {
        warnings.push(Warning { stage: "extend", message: format!("{} points could not be mapped to flattened coordinates", summary.failures) });
    }
    if summary.beyond_bound > 0 {
        warnings.push(Warning { stage: "extend", message: format!("{} points lie farther than d* from the curve", summary.beyond_bound) });
    }
    if summary.certified < summary.evaluated {
        warnings.push(Warning {
            stage: "extend",
            message: format!("{} points outside the certified region carry heuristic error estimates", summary.evaluated - summary.certified),
        });
    }
    if summary.interior > 0 {
        warnings.push(Warning { stage: "extend", message: format!("{} points lie on the interior side of the curve", summary.interior) });
    }
    if majorant_violations > 0 {
        warnings.push(Warning { stage: "extend", message: format!("majorant domination failed at {majorant_violations} base points") });
    }
    summary
}
