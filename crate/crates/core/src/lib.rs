//! Numerical laboratory for quasiperiodic SL(2,C) cocycles over circle
//! rotations.
//!
//! The crate computes Lyapunov exponents for Szegő and Schrödinger transfer
//! cocycles, certifies uniform hyperbolicity through invariant cone fields,
//! measures the quantized acceleration of the exponent under phase
//! complexification, and scans parameter space for spectra and candidate
//! nonuniformly hyperbolic sets. Finite truncations of Schrödinger and CMV
//! operators serve as independent spectral oracles.

pub mod error;
pub mod families;
pub mod hyperbolicity;
pub mod lyapunov;
pub mod mat2;
pub mod opuc;
pub mod spectra;

pub use error::CocycleError;
pub use families::{AnalyticCircleFunction, CocycleFamily, FamilySpec, SzegoPotential};
pub use hyperbolicity::{
    CertOutcome, ConeCertificate, ExceptionalSet, InvariantSections, MarginPolicy, ReducedCocycle,
};
pub use lyapunov::{AccelerationEstimate, ContinuedFraction, LyapunovEstimate, YProfile};
pub use mat2::{Mat2C, MobiusPoint, PolarParts};
pub use opuc::{BernsteinSzegoMeasure, PolyPair};
pub use spectra::{MeasureEstimate, ScanClass, ScanConfig, ScanResult, TruncatedOperator};

/// Golden mean (sqrt(5)-1)/2, the default test frequency.
pub const GOLDEN_MEAN: f64 = 0.618_033_988_749_894_9;

/// Fractional part mapped into [0, 1).
pub fn frac(x: f64) -> f64 {
    let f = x.fract();
    if f < 0.0 {
        f + 1.0
    } else {
        f
    }
}

/// Pairwise (tree) summation. Deterministic for a fixed input order and
/// better conditioned than a running sum on long grids.
pub fn tree_sum(xs: &[f64]) -> f64 {
    match xs.len() {
        0 => 0.0,
        1 => xs[0],
        n => {
            let (lo, hi) = xs.split_at(n / 2);
            tree_sum(lo) + tree_sum(hi)
        }
    }
}
