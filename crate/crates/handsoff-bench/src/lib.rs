//! Shared fixtures for the solver benchmarks.

use nalgebra::{DMatrix, DVector};

use handsoff::matfun::validate_assumption;
use handsoff::{LtiSystem, ValidatedSystem};

/// Scalar decaying plant with a known closed form (a = -1, b = 1, T = 5).
pub fn scalar_plant() -> ValidatedSystem {
    validate_assumption(
        LtiSystem::new(
            DMatrix::from_row_slice(1, 1, &[-1.0]),
            DVector::from_column_slice(&[1.0]),
            5.0,
        )
        .unwrap(),
    )
    .unwrap()
}

/// Undamped harmonic oscillator over one full period.
pub fn oscillator_plant() -> ValidatedSystem {
    validate_assumption(
        LtiSystem::new(
            DMatrix::from_row_slice(2, 2, &[0.0, 1.0, -1.0, 0.0]),
            DVector::from_column_slice(&[0.0, 1.0]),
            std::f64::consts::TAU,
        )
        .unwrap(),
    )
    .unwrap()
}
