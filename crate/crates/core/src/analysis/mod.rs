//! Simulation runs, exports and measurement comparison.

mod compare;
mod config;
mod coverage;
mod heatmap;
mod run;

use thiserror::Error;

pub use compare::{
    compare, error_statistics, read_measurements, ComparisonReport, ErrorStatistics, MeasurementPoint, MeasurementSet,
    PointComparison,
};
pub use config::{load_config, HeatmapScale, RunConfig};
pub use coverage::{coverage, CoverageMask};
pub use heatmap::{export_heatmap, ramp, render_ppm};
pub use run::{prepare, run, simulate, RunOutputs, RunSummary};

#[derive(Debug, Error)]
pub enum RunError {
    /// Bad configuration, scene or input files.
    #[error("{0}")]
    Config(String),
    #[error(transparent)]
    Scene(#[from] crate::scene::SceneError),
    /// Failures while simulating or writing results.
    #[error("{0}")]
    Runtime(String),
    #[error(transparent)]
    Grid(#[from] crate::grid::GridError),
    #[error("{context}: {source}")]
    Io { context: String, source: std::io::Error },
}

impl RunError {
    /// Process exit code: 1 for configuration problems, 2 for runtime failures.
    pub fn exit_code(&self) -> i32 {
        match self {
            RunError::Config(_) | RunError::Scene(_) => 1,
            RunError::Grid(crate::grid::GridError::HeightOutOfBounds { .. }) => 1,
            RunError::Grid(crate::grid::GridError::OutOfGrid(_)) => 1,
            _ => 2,
        }
    }

    pub(crate) fn io(context: impl Into<String>, source: std::io::Error) -> Self {
        RunError::Io { context: context.into(), source }
    }
}
