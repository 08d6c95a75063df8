//! Higher-order mean curvatures of closed hypersurfaces: the pointwise
//! algebra of `S_r`, `H_r` and the Newton transformations `P_r`, sampling
//! of analytic, implicit and meshed hypersurfaces, the integral identities
//! they satisfy, a weak-form `L_r` operator on meshes, and classifiers for
//! spheres, self-shrinkers and λ-hypersurfaces.

pub mod classify;
pub mod error;
pub mod integral;
pub mod kernel;
pub mod linalg;
pub mod lr;
pub mod quadrature;
pub mod report;
pub mod surface;
pub mod tolerances;

pub use classify::{
    hypothesis_audit, lambda_fit, selfshrinker_residual, sphere_verdict, theorem_residuals,
    HypothesisAudit, Verdict, VerdictLabel,
};
pub use error::{Error, Result};
pub use integral::{
    integrate, lambda_identity_check, laplacian_x2_check, laplacian_x2_fem_check, lr_rho_identity_check,
    lr_rho_pointwise_check, lr_rho_rhs, minkowski_check, selfshrinker_weighted_identity,
};
pub use kernel::{
    curvature_profile, elementary_symmetric, garding_audit, newton_family, newton_inequality_gap,
    umbilicity_deviation, CurvatureProfile, GardingEntry, NewtonFamily, PrincipalCurvatures,
};
pub use linalg::Square;
pub use lr::{assemble, strong_lr_analytic, LrField, WeakOperator};
pub use report::{CheckReport, CheckStatus, MetaValue};
pub use surface::{
    sample, sample_analytic, sample_implicit, sample_mesh, support_function, tangential_component,
    tangential_gradient, Orientation, SampleSet, ScalarField, ShapeSample, SourceKind, SurfaceSource,
    TangentField, TriMesh,
};
pub use tolerances::Tolerances;
