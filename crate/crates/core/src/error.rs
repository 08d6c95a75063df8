use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    /// An argument lies outside the admissible range of an operation
    /// (curvature order, dimension, source kind).
    #[error("domain error: {0}")]
    Domain(String),

    /// Input data violates a structural requirement (asymmetric operator,
    /// misaligned field, non-finite value).
    #[error("data error: {0}")]
    Data(String),

    /// A quadrature node could not be turned into a valid sample.
    #[error("sampling error at node {node}: {reason}")]
    Sampling { node: usize, reason: String },

    /// User-supplied derivative callbacks disagree with finite differences.
    #[error("derivative validation failed: {0}")]
    Derivative(String),

    #[error(transparent)]
    Mesh(#[from] crate::surface::mesh::MeshError),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

pub(crate) fn domain(msg: impl Into<String>) -> Error {
    Error::Domain(msg.into())
}
