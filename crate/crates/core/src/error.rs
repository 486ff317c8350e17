//! Structured failure modes shared across the crate.

use thiserror::Error;

#[derive(Debug, Clone, Error, PartialEq)]
pub enum CocycleError {
    #[error("matrix determinant {det} is not 1 within tolerance")]
    NonUnimodularDeterminant { det: String },

    #[error("matrix is (numerically) special unitary at x = {x}; polar factorization undefined there")]
    NotSU2Free { x: f64 },

    #[error("coupling {lambda} outside the admissible range for this family kind")]
    BadCoupling { lambda: f64 },

    #[error("height |y| = {y} reaches or exceeds the analyticity strip half-width {delta}")]
    StripExceeded { y: f64, delta: f64 },

    #[error("custom family determinant residual {residual} exceeds 1e-8 on the check grid")]
    NonUnimodularFamily { residual: f64 },

    #[error("y-profile heights span {span} is too small for a slope estimate")]
    DegenerateProfile { span: f64 },

    #[error("theta has no nonzero Fourier mode; the exceptional-set enumeration needs a nonconstant theta")]
    ConstantTheta,

    #[error("invariant-section iteration residual {residual} still above tolerance after {iters} steps")]
    NoConvergence { residual: f64, iters: usize },

    #[error("phase increment {increment} between adjacent samples is too large to track the winding")]
    AmbiguousWinding { increment: f64 },

    #[error("mean of the cohomological right-hand side is {mean}, not zero; equation unsolvable")]
    MeanObstruction { mean: f64 },

    #[error("small divisor |e^(2 pi i n alpha) - 1| = {divisor} at n = {n}")]
    SmallDivisorBlowup { n: i64, divisor: f64 },

    #[error("epsilon {epsilon} outside (0, 1)")]
    BadEpsilon { epsilon: f64 },

    #[error("Verblunsky coefficient at index {index} has modulus {modulus}, violating the admissibility constraint")]
    BadVerblunsky { index: usize, modulus: f64 },

    #[error("eta has modulus {modulus}, expected 1")]
    BadEta { modulus: f64 },

    #[error("polynomial modulus {value} vanishes on the unit circle at node {node}")]
    ZeroOnCircle { node: usize, value: f64 },

    #[error("{what}")]
    Invalid { what: String },
}

pub type Result<T> = std::result::Result<T, CocycleError>;
