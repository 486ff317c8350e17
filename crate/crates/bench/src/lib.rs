//! Shared fixtures for the criterion benches.

use qpcocycle::families::{AnalyticCircleFunction, CocycleFamily, SzegoPotential};
use qpcocycle::mat2::{c64, C64};
use qpcocycle::GOLDEN_MEAN;

pub fn almost_mathieu(lambda: f64, e: f64) -> CocycleFamily {
    CocycleFamily::schrodinger(
        AnalyticCircleFunction::cosine(2.0, 1, 0.4),
        lambda,
        e,
        GOLDEN_MEAN,
        0.0,
    )
    .unwrap()
}

pub fn szego_family(lambda: f64, t: f64) -> CocycleFamily {
    let pot =
        SzegoPotential::new(0, AnalyticCircleFunction::cosine(0.3, 1, 0.4), lambda).unwrap();
    CocycleFamily::szego(pot, t, GOLDEN_MEAN, 0.0).unwrap()
}

/// Verblunsky coefficients for the CMV benches; the final one is unimodular
/// as the truncation requires.
pub fn verblunsky_chain(n: usize) -> Vec<C64> {
    let pot =
        SzegoPotential::new(0, AnalyticCircleFunction::cosine(0.3, 1, 0.4), 0.6).unwrap();
    qpcocycle::spectra::verblunsky_orbit(
        |x| pot.f(c64(x, 0.0)),
        0.0,
        GOLDEN_MEAN,
        n,
    )
}
