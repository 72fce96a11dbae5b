//! Hausdorff distances between finite point clouds, limits of set sequences
//! in the hyperspace of compact sets, and attractors of iterated function
//! systems.
//!
//! Sets are finite, nonempty and deduplicated. Every distance is computed
//! under one [`Metric`] chosen per call or per sequence.

pub mod cli;
pub mod error;
pub mod hausdorff;
pub mod hyperspace;
pub mod ifs;
pub mod io;
pub mod metric;

pub use error::{Error, Result};
pub use hausdorff::{directed_distance, hausdorff_distance, hausdorff_distance_oracle, DistanceBreakdown};
pub use hyperspace::{
    Agreement, CauchyReport, LemmaVerdict, LimitApprox, SetSequence, TraceRow, Truncation, WitnessChain,
};
pub use ifs::{attractor, contraction_factor, decimate, hutchinson_step, AffineMap, AttractorTrace, Ifs, StepRecord};
pub use metric::{distance, nearest_point, point_set_distance, Metric, Point, PointSet};
