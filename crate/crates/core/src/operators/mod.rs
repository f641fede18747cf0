//! Laplacians of rough metrics, heat flow, Poincaré constants and norm
//! comparison across metrics at finite extended distance.

mod divform;
mod heat;
mod laplacian;
mod norms;
mod poincare;
mod sparse;

pub use divform::{
    divform_factor, divform_to_metric, operator_correspondence_check, CorrespondenceReport, CORRESPONDENCE_TOLERANCE,
    DET_IDENTITY_TOLERANCE, SYMMETRY_TOLERANCE,
};
pub use heat::{heat_run, varadhan_estimate, HeatRun, VaradhanEstimate, HEAT_METHOD};
pub use laplacian::{assemble_laplacian, assemble_on};
pub use norms::{lp_norm, norm_comparison_bounds, norm_preservation_bounds, pointwise_norm, TensorField};
pub use poincare::{
    ball_operator, poincare_measure, poincare_propagate, smallest_nonzero_eigenvalue, PoincareConstants,
    PoincareMeasurement, EIGEN_TOLERANCE, MIN_BALL_NODES,
};
pub use sparse::{cg, BoundaryCondition, CgOutcome, SparseOperator, CG_FAILURE, CG_TOLERANCE};
