//! Dualistic geometry toolkit.

pub mod error;
pub mod legendrian;
pub mod linalg;
pub mod residuals;
pub mod statistical;
pub mod suites;
pub mod tensor;
pub mod warped;
pub mod wintgen;

pub use error::{GeometryError, Result};
pub use residuals::ResidualRecord;
pub use legendrian::{LegendrianPointInstance, MeanCurvatures, ShapeOperators, Violation};
pub use statistical::{ConnectionKind, CurvatureTensor, DerivativeMode, DualisticChart};
pub use tensor::{SeedSequence, SquareMatrix};
pub use warped::{WarpedProductSpec, WarpingFunction};
pub use wintgen::{WintgenReport, SweepRow};

/// Schema tag embedded in every machine-readable report.
pub fn report_schema_version() -> &'static str {
    "statwintgen-report/1"
}
