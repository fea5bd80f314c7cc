pub mod boundary;
pub mod curve;
pub mod distance;
pub mod error;
pub mod extension;
pub mod jet;
pub mod optimize;
pub mod poly;
pub mod quad;
pub mod serde_ext;
pub mod series;

pub use boundary::{BoundaryData, CompatibilityReport, DataFunction, GraphCauchyData, Verdict};
pub use curve::{CurveModel, ExteriorSide, FrameAt};
pub use error::{Error, Result};
pub use extension::{extend_on_grid, eval_field, local_series, ExtensionConfig, Extender, FieldSample, LocalSolution};
pub use jet::LocalJet;
