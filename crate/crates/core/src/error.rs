use thiserror::Error;

/// Failures raised by mesh construction, interpolation and assembly.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("unsupported dimension {0}, expected 2 or 3")]
    Dimension(usize),
    #[error("element {0} is degenerate or inverted")]
    DegenerateElement(usize),
    #[error("perturbation inverted elements after {0} attempts")]
    PerturbationFailed(usize),
    #[error("facet shared by {0} elements, mesh is not a manifold")]
    NonManifold(usize),
    #[error("bone {0}: incident element ring does not close")]
    OpenRing(usize),
    #[error("metric is not positive definite in element {elem}")]
    NotPositive { elem: usize },
    #[error("quadrature of exactness {0} is not available")]
    Quadrature(usize),
    #[error("singular local system while interpolating on element {0}")]
    SingularMoments(usize),
    #[error("tensor lacks the required symmetries (defect {0:e})")]
    Symmetry(f64),
    #[error("invalid input: {0}")]
    Invalid(&'static str),
}
