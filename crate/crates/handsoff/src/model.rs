//! Core domain types: the plant, the time grid, piecewise-constant control
//! signals and their L0/L1/L∞ norms.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

/// A linear time-invariant plant `ẋ = Ax + Bu` with scalar input, to be
/// steered to the origin over the horizon `[0, T]`.
///
/// Construction checks dimensions only; controllability and nonsingularity
/// of `A` are checked by [`crate::matfun::validate_assumption`].
#[derive(Debug, Clone, PartialEq)]
pub struct LtiSystem {
    a: DMatrix<f64>,
    b: DVector<f64>,
    horizon: f64,
}

impl LtiSystem {
    pub fn new(a: DMatrix<f64>, b: DVector<f64>, horizon: f64) -> Result<Self> {
        let n = a.nrows();
        if n == 0 || a.ncols() != n {
            return Err(Error::InvalidInput(format!(
                "A must be square and nonempty, got {}x{}",
                a.nrows(),
                a.ncols()
            )));
        }
        if b.len() != n {
            return Err(Error::InvalidInput(format!(
                "B must have {} rows to match A, got {}",
                n,
                b.len()
            )));
        }
        if horizon <= 0.0 || !horizon.is_finite() {
            return Err(Error::InvalidInput(format!(
                "horizon must be positive and finite, got {horizon}"
            )));
        }
        if a.iter().any(|x| !x.is_finite()) || b.iter().any(|x| !x.is_finite()) {
            return Err(Error::InvalidInput("A and B must be finite".into()));
        }
        Ok(Self { a, b, horizon })
    }

    /// State dimension `n`.
    pub fn dim(&self) -> usize {
        self.a.nrows()
    }

    pub fn a(&self) -> &DMatrix<f64> {
        &self.a
    }

    pub fn b(&self) -> &DVector<f64> {
        &self.b
    }

    /// Final time `T`.
    pub fn horizon(&self) -> f64 {
        self.horizon
    }
}

/// Uniform partition of `[0, T]` into `N` cells of width `h = T/N`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grid {
    horizon: f64,
    cells: usize,
}

impl Grid {
    pub fn new(horizon: f64, cells: usize) -> Result<Self> {
        if horizon <= 0.0 || !horizon.is_finite() {
            return Err(Error::InvalidInput(format!(
                "grid horizon must be positive and finite, got {horizon}"
            )));
        }
        if cells == 0 {
            return Err(Error::InvalidInput("grid needs at least one cell".into()));
        }
        Ok(Self { horizon, cells })
    }

    pub fn cells(&self) -> usize {
        self.cells
    }

    pub fn horizon(&self) -> f64 {
        self.horizon
    }

    /// Cell width `h`.
    pub fn width(&self) -> f64 {
        self.horizon / self.cells as f64
    }

    /// Grid node `t_k = k·h`, for `k = 0..=N`.
    pub fn node(&self, k: usize) -> f64 {
        debug_assert!(k <= self.cells);
        k as f64 * self.width()
    }
}

/// Threshold below which a cell value counts as zero when measuring the
/// support of a control. Must separate 0 from ±1 unambiguously.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ZeroTolerance(f64);

impl ZeroTolerance {
    pub fn new(eps_zero: f64) -> Result<Self> {
        if !(eps_zero > 0.0 && eps_zero < 0.5) {
            return Err(Error::InvalidInput(format!(
                "zero tolerance must lie in (0, 0.5), got {eps_zero}"
            )));
        }
        Ok(Self(eps_zero))
    }

    pub fn value(&self) -> f64 {
        self.0
    }
}

impl Default for ZeroTolerance {
    /// One order of magnitude above the LP feasibility tolerance, so solver
    /// noise never inflates the measured support.
    fn default() -> Self {
        Self(1e-6)
    }
}

/// A piecewise-constant (zero-order-hold) control on a uniform grid:
/// `u(t) = values[k]` for `t ∈ [t_k, t_{k+1})`.
#[derive(Debug, Clone, PartialEq)]
pub struct ControlSignal {
    grid: Grid,
    values: Vec<f64>,
}

impl ControlSignal {
    pub fn new(grid: Grid, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.cells() {
            return Err(Error::InvalidInput(format!(
                "control has {} values but the grid has {} cells",
                values.len(),
                grid.cells()
            )));
        }
        Ok(Self { grid, values })
    }

    /// The zero control on `grid`.
    pub fn zero(grid: Grid) -> Self {
        let values = vec![0.0; grid.cells()];
        Self { grid, values }
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// `‖u‖1 = ∫ |u| dt = h·Σ|u_k|`; exact for piecewise-constant signals.
    pub fn l1_norm(&self) -> f64 {
        self.grid.width() * self.values.iter().map(|u| u.abs()).sum::<f64>()
    }

    /// `‖u‖∞ = max_k |u_k|`.
    pub fn linf_norm(&self) -> f64 {
        self.values.iter().fold(0.0f64, |m, u| m.max(u.abs()))
    }

    /// `‖u‖0`: the measure of the numerical support,
    /// `h·#{k : |u_k| > eps_zero}`.
    pub fn l0_norm(&self, tol: ZeroTolerance) -> f64 {
        let active = self.values.iter().filter(|u| u.abs() > tol.value()).count();
        self.grid.width() * active as f64
    }

    /// Whether the magnitude constraint `‖u‖∞ ≤ 1` holds up to `feas_tol`.
    pub fn is_admissible(&self, feas_tol: f64) -> bool {
        self.linf_norm() <= 1.0 + feas_tol
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn signal(horizon: f64, values: &[f64]) -> ControlSignal {
        let grid = Grid::new(horizon, values.len()).unwrap();
        ControlSignal::new(grid, values.to_vec()).unwrap()
    }

    #[test]
    fn l1_norm_examples() {
        assert_eq!(ControlSignal::zero(Grid::new(3.0, 7).unwrap()).l1_norm(), 0.0);
        let constant = signal(5.0, &[1.0; 10]);
        assert!((constant.l1_norm() - 5.0).abs() < 1e-12);
        let mixed = signal(4.0, &[1.0, -1.0, 0.0, 0.0]);
        assert!((mixed.l1_norm() - 2.0).abs() < 1e-12);
    }

    #[test]
    fn linf_norm_examples() {
        assert_eq!(ControlSignal::zero(Grid::new(1.0, 4).unwrap()).linf_norm(), 0.0);
        assert_eq!(signal(3.0, &[0.5, -1.0, 0.0]).linf_norm(), 1.0);
        assert_eq!(signal(2.0, &[-0.3, 0.2]).linf_norm(), 0.3);
    }

    #[test]
    fn l0_norm_examples() {
        let tol = ZeroTolerance::default();
        assert_eq!(ControlSignal::zero(Grid::new(2.0, 5).unwrap()).l0_norm(tol), 0.0);
        let two_active = signal(4.0, &[1.0, 0.0, -1.0, 0.0]);
        assert!((two_active.l0_norm(tol) - 2.0).abs() < 1e-12);
        let sub_threshold = signal(2.0, &[1e-9, 1.0]);
        assert!((sub_threshold.l0_norm(tol) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn zero_tolerance_bounds() {
        assert!(ZeroTolerance::new(0.0).is_err());
        assert!(ZeroTolerance::new(0.5).is_err());
        assert!(ZeroTolerance::new(-1e-3).is_err());
        assert!(ZeroTolerance::new(1e-6).is_ok());
        assert_eq!(ZeroTolerance::default().value(), 1e-6);
    }

    #[test]
    fn grid_partitions_horizon() {
        let grid = Grid::new(5.0, 1000).unwrap();
        assert_eq!(grid.node(0), 0.0);
        assert!((grid.node(1000) - 5.0).abs() <= f64::EPSILON * 5.0);
        assert!((grid.width() * 1000.0 - 5.0).abs() <= f64::EPSILON * 5.0);
        assert!(Grid::new(5.0, 0).is_err());
        assert!(Grid::new(0.0, 10).is_err());
        assert!(Grid::new(f64::NAN, 10).is_err());
    }

    #[test]
    fn control_length_must_match_grid() {
        let grid = Grid::new(1.0, 3).unwrap();
        assert!(ControlSignal::new(grid, vec![0.0; 2]).is_err());
        assert!(ControlSignal::new(grid, vec![0.0; 3]).is_ok());
    }

    #[test]
    fn system_construction_checks() {
        let a = DMatrix::from_row_slice(2, 2, &[0.0, 1.0, -1.0, 0.0]);
        let b = DVector::from_column_slice(&[0.0, 1.0]);
        assert!(LtiSystem::new(a.clone(), b.clone(), 1.0).is_ok());
        assert!(LtiSystem::new(a.clone(), b.clone(), 0.0).is_err());
        assert!(LtiSystem::new(a.clone(), DVector::from_column_slice(&[1.0]), 1.0).is_err());
        assert!(LtiSystem::new(DMatrix::from_row_slice(1, 2, &[0.0, 1.0]), b, 1.0).is_err());
    }

    proptest! {
        /// With `‖u‖∞ ≤ 1`, every cell satisfies `|u_k| ≤ 1{|u_k|>0}`, so
        /// the support measure dominates the L1 norm.
        #[test]
        fn l0_dominates_l1_for_admissible(values in prop::collection::vec(-1.0f64..=1.0, 1..40)) {
            let u = signal(2.5, &values);
            let tol = ZeroTolerance::default();
            prop_assert!(u.l0_norm(tol) >= u.l1_norm() - 1e-6 * 2.5 - 1e-12);
        }

        #[test]
        fn l1_bounded_by_horizon_times_linf(values in prop::collection::vec(-10.0f64..10.0, 1..40)) {
            let u = signal(3.0, &values);
            prop_assert!(u.l1_norm() <= 3.0 * u.linf_norm() + 1e-12);
        }

        #[test]
        fn norms_invariant_under_sign_flip(values in prop::collection::vec(-10.0f64..10.0, 1..40)) {
            let u = signal(1.5, &values);
            let flipped: Vec<f64> = values.iter().map(|v| -v).collect();
            let w = signal(1.5, &flipped);
            let tol = ZeroTolerance::default();
            prop_assert_eq!(u.l1_norm(), w.l1_norm());
            prop_assert_eq!(u.linf_norm(), w.linf_norm());
            prop_assert_eq!(u.l0_norm(tol), w.l0_norm(tol));
        }
    }
}
