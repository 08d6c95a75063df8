//! Hypersurface sources and their quadrature samples.

pub mod fields;
pub mod mesh;
pub mod mesh_sample;
pub mod sample;
pub mod shapes;
pub mod source;

pub use fields::{
    evaluate, support_function, tangential_component, tangential_gradient, AmbientFunction,
    ConstantFunction, LinearFunction, ScalarField, SquaredNorm, TangentField,
};
pub use mesh::{load_mesh, parse_obj, parse_off, MeshError, MeshStats, TriMesh};
pub use mesh_sample::sample_mesh;
pub use sample::{
    sample, sample_analytic, sample_implicit, CurvatureTable, ParamGrid, SampleSet, ShapeSample, MIN_RESOLUTION,
};
pub use source::{ImplicitFunction, Immersion, Jet, Orientation, SourceKind, SurfaceSource};
