//! Vector fields, Lie derivatives, trajectory germs and certified radii.

pub mod field;
pub mod radius;
pub mod trajectory;

pub use field::{FieldFile, VectorField};
pub use radius::{certify_radius, Majorant, ParametrizedTrajectory, RadiusOptions, TrajectoryEvaluator};
pub use trajectory::{multiplicity, multiplicity_cap, trajectory_series, Multiplicity, TrajectoryGerm};
