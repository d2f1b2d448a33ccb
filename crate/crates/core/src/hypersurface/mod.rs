//! Rotationally symmetric hypersurfaces and their mean curvature flow.

pub mod ambient;
pub mod curve;
pub mod flow;
pub mod resample;
pub mod shape;

pub use ambient::{AmbientFields, AmbientPoint};
pub use curve::{ProfileCurve, Topology};
pub use shape::{shape, shape_with, Orientation, PinchingParams, ShapeReport};
pub use flow::{
    classify_outcome, coupled_step, mcf_step, run_coupled, run_coupled_with, CoupledConfig, CoupledMonitor, CoupledRun,
    FlowState, Outcome, Resume, RunProgress, StepOptions, Termination, Thresholds,
};
pub use resample::resample;
