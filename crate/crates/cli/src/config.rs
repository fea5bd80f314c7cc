//! Job configuration (JSON, or TOML by file extension).

use std::path::{Path, PathBuf};

use harmext_core::boundary::{BoundaryData, DataFunction};
use harmext_core::{CurveModel, ExteriorSide};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ComplexSpec {
    pub re: f64,
    #[serde(default)]
    pub im: f64,
}

impl From<ComplexSpec> for Complex64 {
    fn from(c: ComplexSpec) -> Self {
        Complex64::new(c.re, c.im)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModeSpec {
    pub k: i64,
    pub c: ComplexSpec,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum CurveSpec {
    /// `z(t) = sum_k c_k e^{ikt}`, traversed clockwise.
    ClosedFourier { modes: Vec<ModeSpec> },
    /// `(x(t), y(t))` with real polynomial coefficients, lowest degree first.
    OpenPolynomial {
        x: Vec<f64>,
        y: Vec<f64>,
        interval: [f64; 2],
        #[serde(default)]
        side: ExteriorSide,
    },
    Circle { radius: f64 },
    Parabola { half_width: f64 },
    FlatLine { half_width: f64 },
}

impl CurveSpec {
    pub fn build(&self) -> Result<CurveModel, CliError> {
        let curve = match self {
            Self::ClosedFourier { modes } => CurveModel::closed_fourier(modes.iter().map(|m| (m.k, m.c.into())).collect()),
            Self::OpenPolynomial { x, y, interval, side } => {
                CurveModel::open_polynomial(x.clone(), y.clone(), (interval[0], interval[1]), *side)
            }
            Self::Circle { radius } => CurveModel::circle(*radius),
            Self::Parabola { half_width } => CurveModel::parabola(*half_width),
            Self::FlatLine { half_width } => CurveModel::flat_line(*half_width),
        };
        curve.map_err(|e| CliError::Config(format!("curve: {e}")))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum FunctionSpec {
    Constant { value: f64 },
    Trig { modes: Vec<ModeSpec> },
    Poly { coeffs: Vec<f64> },
    Rational { num: Vec<f64>, den: Vec<f64> },
}

impl FunctionSpec {
    pub fn build(&self) -> Result<DataFunction, CliError> {
        Ok(match self {
            Self::Constant { value } => DataFunction::constant(*value),
            Self::Trig { modes } => DataFunction::trig(modes.iter().map(|m| (m.k, m.c.into())).collect())
                .map_err(|e| CliError::Config(format!("data: {e}")))?,
            Self::Poly { coeffs } => DataFunction::Poly { coeffs: coeffs.clone() },
            Self::Rational { num, den } => DataFunction::Rational { num: num.clone(), den: den.clone() },
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DataSpec {
    /// Tangential component `B.t`.
    #[serde(default)]
    pub f: Option<FunctionSpec>,
    /// Normal component `B.n`.
    #[serde(default)]
    pub h: Option<FunctionSpec>,
    /// CSV with header `t,f,h` on the equispaced grid of a closed curve.
    #[serde(default)]
    pub grid: Option<PathBuf>,
    /// The data continue to entire functions of the parameter.
    #[serde(default)]
    pub entire: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Knobs {
    /// Truncation order of the jets and of the extension series in each variable.
    pub order: usize,
    /// Sweep nodes for `d*` and grid length for sampled data.
    pub grid: usize,
    /// Base points of the extension lattice.
    pub lattice: usize,
    pub collar_tol: f64,
}

impl Default for Knobs {
    fn default() -> Self {
        Self { order: 32, grid: 256, lattice: 128, collar_tol: 1e-10 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Stage {
    Compat,
    Hilbert,
    Analyze,
    Extend,
}

impl Stage {
    pub fn name(self) -> &'static str {
        match self {
            Self::Compat => "compat",
            Self::Hilbert => "hilbert",
            Self::Analyze => "analyze",
            Self::Extend => "extend",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum PointsSpec {
    /// CSV with header `x,y`.
    Csv { path: PathBuf },
    List { points: Vec<[f64; 2]> },
    Ring { center: ComplexSpec, radius: f64, count: usize },
    /// Points at `fraction * d*` along the outward normal of `count` equispaced parameters.
    Collar { fraction: f64, count: usize },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct JobConfig {
    pub curve: CurveSpec,
    pub data: DataSpec,
    #[serde(default)]
    pub knobs: Knobs,
    #[serde(default)]
    pub outputs: Vec<Stage>,
    #[serde(default)]
    pub points: Option<PointsSpec>,
    #[serde(default)]
    pub out_dir: Option<PathBuf>,
}

impl JobConfig {
    /// Reads JSON, or TOML when the extension is `.toml`. Relative paths
    /// inside the file are resolved against its directory.
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
        let mut cfg: Self = if path.extension().is_some_and(|e| e == "toml") {
            toml::from_str(&text).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?
        } else {
            serde_json::from_str(&text).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?
        };
        if let Some(dir) = path.parent() {
            cfg.resolve_paths(dir);
        }
        Ok(cfg)
    }

    fn resolve_paths(&mut self, dir: &Path) {
        let fix = |p: &mut PathBuf| {
            if p.is_relative() {
                *p = dir.join(&*p);
            }
        };
        if let Some(g) = self.data.grid.as_mut() {
            fix(g);
        }
        if let Some(PointsSpec::Csv { path }) = self.points.as_mut() {
            fix(path);
        }
    }

    /// Checks knobs and stage requirements for the given stage selection.
    pub fn validate(&self, stages: &[Stage]) -> Result<(), CliError> {
        if stages.is_empty() {
            return Err(CliError::Config("no outputs requested".into()));
        }
        let k = &self.knobs;
        if k.order == 0 || k.grid == 0 || k.lattice < 2 || !(k.collar_tol > 0.0) {
            return Err(CliError::Config("knobs must be positive (lattice at least 2)".into()));
        }
        if k.grid < 4 || k.grid % 2 == 1 {
            return Err(CliError::Config(format!("grid must be even and at least 4, got {}", k.grid)));
        }
        if stages.contains(&Stage::Extend) && self.points.is_none() {
            return Err(CliError::Config("extend requires a point grid".into()));
        }
        let d = &self.data;
        if d.grid.is_none() && (d.f.is_none() || d.h.is_none()) {
            return Err(CliError::Config("data needs both f and h, or a grid file".into()));
        }
        if d.grid.is_some() && d.f.is_some() != d.h.is_some() {
            return Err(CliError::Config("give both f and h alongside a grid, or neither".into()));
        }
        Ok(())
    }

    /// Builds the boundary data in the curve's stored parameterisation.
    ///
    /// Right-side open curves are stored with `t -> -t`, which reverses the
    /// tangent: `f` is reflected and negated, `h` reflected. Grid-only data on
    /// closed curves are interpolated.
    pub fn build_data(&self, curve: &CurveModel) -> Result<BoundaryData, CliError> {
        let d = &self.data;
        let forms = match (&d.f, &d.h) {
            (Some(f), Some(h)) => {
                let (mut f, mut h) = (f.build()?, h.build()?);
                if curve.is_reversed() {
                    f = f.reflected().with_scale(-1.0);
                    h = h.reflected();
                }
                Some((f, h))
            }
            _ => None,
        };
        let cfg_err = |e: harmext_core::Error| CliError::Config(format!("data: {e}"));
        let data = match (&d.grid, forms) {
            (None, Some((f, h))) => BoundaryData::from_functions(curve, f, h, self.knobs.grid, d.entire).map_err(cfg_err)?,
            (Some(path), forms) => {
                if !curve.is_closed() {
                    return Err(CliError::Config("grid data require a closed curve".into()));
                }
                let (fs, hs) = read_grid(path, curve)?;
                match forms {
                    Some((f, h)) => BoundaryData::with_samples(curve, f, h, fs, hs, d.entire).map_err(cfg_err)?,
                    None => BoundaryData::from_samples(curve, fs, hs, d.entire)
                        .and_then(BoundaryData::interpolate)
                        .map_err(cfg_err)?,
                }
            }
            (None, None) => return Err(CliError::Config("no boundary data".into())),
        };
        Ok(data)
    }

    /// Evaluation points; `d_star` scales collar points.
    pub fn build_points(&self, curve: &CurveModel, d_star: f64) -> Result<Vec<Complex64>, CliError> {
        let spec = self.points.as_ref().ok_or_else(|| CliError::Config("no points".into()))?;
        Ok(match spec {
            PointsSpec::Csv { path } => read_points(path)?,
            PointsSpec::List { points } => points.iter().map(|p| Complex64::new(p[0], p[1])).collect(),
            PointsSpec::Ring { center, radius, count } => (0..*count)
                .map(|j| Complex64::from(*center) + Complex64::from_polar(*radius, std::f64::consts::TAU * j as f64 / *count as f64))
                .collect(),
            PointsSpec::Collar { fraction, count } => {
                if !d_star.is_finite() {
                    return Err(CliError::Config("collar points need a finite d*".into()));
                }
                let ts = if curve.is_closed() {
                    curve.grid(*count)
                } else {
                    let (lo, hi) = curve.domain();
                    (0..*count).map(|j| lo + (hi - lo) * (j as f64 + 0.5) / *count as f64).collect()
                };
                ts.iter()
                    .map(|&t| {
                        let fr = curve.frame_at(t).expect("validated curve is regular");
                        Complex64::new(fr.point[0] + fraction * d_star * fr.normal[0], fr.point[1] + fraction * d_star * fr.normal[1])
                    })
                    .collect()
            }
        })
    }
}

#[derive(Debug, Deserialize)]
struct GridRow {
    t: f64,
    f: f64,
    h: f64,
}

fn read_grid(path: &Path, curve: &CurveModel) -> Result<(Vec<f64>, Vec<f64>), CliError> {
    let mut rdr = csv::Reader::from_path(path).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
    let rows = rdr
        .deserialize()
        .collect::<Result<Vec<GridRow>, _>>()
        .map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
    let expect = curve.grid(rows.len());
    for (row, &t) in rows.iter().zip(&expect) {
        if (row.t - t).abs() > 1e-9 {
            return Err(CliError::Config(format!("{}: expected t = {t} on the equispaced grid, found {}", path.display(), row.t)));
        }
    }
    Ok(rows.iter().map(|r| (r.f, r.h)).unzip())
}

#[derive(Debug, Deserialize)]
struct PointRow {
    x: f64,
    y: f64,
}

pub fn read_points(path: &Path) -> Result<Vec<Complex64>, CliError> {
    let mut rdr = csv::Reader::from_path(path).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
    rdr.deserialize()
        .map(|r: Result<PointRow, _>| r.map(|p| Complex64::new(p.x, p.y)))
        .collect::<Result<_, _>>()
        .map_err(|e| CliError::Config(format!("{}: {e}", path.display())))
}
