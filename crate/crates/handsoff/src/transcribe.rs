//! Finite-dimensional image of the admissible set as bounded-variable LP
//! data.
//!
//! A zero-order-hold control turns the steering constraint
//! `∫₀ᵀ e^{-As} B u(s) ds = -ξ` into `G u = -ξ` with one column per cell,
//! `g_k = ∫_{t_k}^{t_{k+1}} e^{-As} B ds`, and the magnitude constraint into
//! box bounds `-1 ≤ u_k ≤ 1`. The L1 objective `h·Σ|u_k|` is realized by the
//! standard split `u_k = p_k - q_k` with `p_k, q_k ∈ [0, 1]` and cost
//! `h·(p_k + q_k)`.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::matfun::{input_columns, ValidatedSystem};
use crate::model::Grid;

/// The discretized steering constraint `G u = -ξ` with `‖u‖∞ ≤ 1`.
#[derive(Debug, Clone, PartialEq)]
pub struct TranscribedProblem {
    g: DMatrix<f64>,
    rhs: DVector<f64>,
    width: f64,
}

impl TranscribedProblem {
    /// Constraint matrix, one column per grid cell.
    pub fn g(&self) -> &DMatrix<f64> {
        &self.g
    }

    /// Right-hand side `-ξ`.
    pub fn rhs(&self) -> &DVector<f64> {
        &self.rhs
    }

    /// Cell width `h`.
    pub fn cell_width(&self) -> f64 {
        self.width
    }

    pub fn cells(&self) -> usize {
        self.g.ncols()
    }

    pub fn dim(&self) -> usize {
        self.g.nrows()
    }

    /// The same constraint matrix retargeted at a new initial state.
    pub fn with_target(&self, xi: &DVector<f64>) -> Result<Self> {
        check_target(xi, self.dim())?;
        Ok(Self {
            g: self.g.clone(),
            rhs: -xi,
            width: self.width,
        })
    }

    /// Split-variable LP data: variables `[p_0..p_{N-1}, q_0..q_{N-1}]`,
    /// constraint matrix `[G | -G]`, cost `h` per unit of either part.
    pub fn split_lp(&self) -> SplitLp {
        let n = self.dim();
        let cells = self.cells();
        let mut a = DMatrix::<f64>::zeros(n, 2 * cells);
        a.view_mut((0, 0), (n, cells)).copy_from(&self.g);
        a.view_mut((0, cells), (n, cells)).copy_from(&(-&self.g));
        SplitLp {
            costs: vec![self.width; 2 * cells],
            a,
            rhs: self.rhs.clone(),
            bounds: vec![(0.0, 1.0); 2 * cells],
        }
    }

    /// Split LP augmented with the L1 budget row
    /// `h·Σ(p_k + q_k) + s = α`, `s ≥ 0`, realizing membership `ξ ∈ R_α`.
    pub fn split_lp_with_budget(&self, alpha: f64) -> Result<SplitLp> {
        if alpha.is_nan() || alpha < 0.0 {
            return Err(Error::InvalidInput(format!(
                "budget must be nonnegative, got {alpha}"
            )));
        }
        let n = self.dim();
        let cells = self.cells();
        let mut a = DMatrix::<f64>::zeros(n + 1, 2 * cells + 1);
        a.view_mut((0, 0), (n, cells)).copy_from(&self.g);
        a.view_mut((0, cells), (n, cells)).copy_from(&(-&self.g));
        for j in 0..2 * cells {
            a[(n, j)] = self.width;
        }
        a[(n, 2 * cells)] = 1.0;

        let mut rhs = DVector::<f64>::zeros(n + 1);
        rhs.rows_mut(0, n).copy_from(&self.rhs);
        rhs[n] = alpha;

        let mut costs = vec![self.width; 2 * cells];
        costs.push(0.0);
        let mut bounds = vec![(0.0, 1.0); 2 * cells];
        bounds.push((0.0, f64::INFINITY));

        Ok(SplitLp { costs, a, rhs, bounds })
    }
}

/// Plain LP data in the layout consumed by [`crate::lp::solve_lp`].
#[derive(Debug, Clone)]
pub struct SplitLp {
    pub costs: Vec<f64>,
    pub a: DMatrix<f64>,
    pub rhs: DVector<f64>,
    pub bounds: Vec<(f64, f64)>,
}

fn check_target(xi: &DVector<f64>, dim: usize) -> Result<()> {
    if xi.len() != dim {
        return Err(Error::InvalidInput(format!(
            "initial state has dimension {}, plant has dimension {}",
            xi.len(),
            dim
        )));
    }
    if xi.iter().any(|x| !x.is_finite()) {
        return Err(Error::InvalidInput("initial state must be finite".into()));
    }
    Ok(())
}

/// Assemble the transcription of the steering problem for `ξ` on `cells`
/// uniform cells.
pub fn transcribe(
    sys: &ValidatedSystem,
    xi: &DVector<f64>,
    cells: usize,
) -> Result<TranscribedProblem> {
    let n = sys.dim();
    check_target(xi, n)?;
    if cells < n.max(2) {
        return Err(Error::InvalidInput(format!(
            "need at least max(n, 2) = {} cells, got {cells}",
            n.max(2)
        )));
    }
    let grid = Grid::new(sys.horizon(), cells)?;
    let columns = input_columns(sys.system(), &grid)?;
    let mut g = DMatrix::<f64>::zeros(n, cells);
    for (k, col) in columns.iter().enumerate() {
        g.set_column(k, col);
    }
    Ok(TranscribedProblem {
        g,
        rhs: -xi,
        width: grid.width(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matfun::validate_assumption;
    use crate::model::LtiSystem;
    use std::f64::consts::E;

    fn decaying_scalar() -> ValidatedSystem {
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

    fn oscillator() -> ValidatedSystem {
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

    #[test]
    fn zero_target_gives_zero_rhs() {
        let sys = decaying_scalar();
        let p = transcribe(&sys, &DVector::from_column_slice(&[0.0]), 10).unwrap();
        assert_eq!(p.rhs()[0], 0.0);
        assert_eq!(p.cells(), 10);
        assert_eq!(p.dim(), 1);
    }

    #[test]
    fn scalar_columns_match_analytic_integrals() {
        let sys = decaying_scalar();
        let p = transcribe(&sys, &DVector::from_column_slice(&[100.0]), 5).unwrap();
        assert_eq!(p.rhs()[0], -100.0);
        for k in 0..5 {
            let expected = E.powi(k as i32) * (E - 1.0);
            assert!(
                (p.g()[(0, k)] - expected).abs() < 1e-11,
                "column {k}: {} vs {expected}",
                p.g()[(0, k)]
            );
        }
    }

    #[test]
    fn oscillator_columns_are_rotations_of_the_first() {
        let sys = oscillator();
        let cells = 4;
        let p = transcribe(&sys, &DVector::from_column_slice(&[1.0, 0.0]), cells).unwrap();
        let g0 = p.g().column(0).into_owned();
        let h = sys.horizon() / cells as f64;
        for k in 1..cells {
            let t = k as f64 * h;
            // e^{-At} for the oscillator is the rotation by angle t.
            let rot = DMatrix::from_row_slice(2, 2, &[t.cos(), -t.sin(), t.sin(), t.cos()]);
            let expected = &rot * &g0;
            let actual = p.g().column(k).into_owned();
            assert!((actual - expected).norm() < 1e-12, "column {k}");
        }
    }

    #[test]
    fn negation_equivariance() {
        let sys = oscillator();
        let xi = DVector::from_column_slice(&[0.7, -0.3]);
        let plus = transcribe(&sys, &xi, 8).unwrap();
        let minus = transcribe(&sys, &(-&xi), 8).unwrap();
        assert_eq!(plus.g(), minus.g());
        assert_eq!(plus.rhs(), &-minus.rhs());
    }

    #[test]
    fn rejects_undersized_grids_and_bad_targets() {
        let sys = oscillator();
        let xi = DVector::from_column_slice(&[1.0, 0.0]);
        assert!(transcribe(&sys, &xi, 1).is_err());
        assert!(transcribe(&sys, &DVector::from_column_slice(&[1.0]), 8).is_err());
        assert!(
            transcribe(&sys, &DVector::from_column_slice(&[f64::NAN, 0.0]), 8).is_err()
        );
    }

    #[test]
    fn split_doubles_the_columns_with_opposite_signs() {
        let sys = decaying_scalar();
        let p = transcribe(&sys, &DVector::from_column_slice(&[2.0]), 5).unwrap();
        let split = p.split_lp();
        assert_eq!(split.a.ncols(), 10);
        for k in 0..5 {
            assert_eq!(split.a[(0, k)], -split.a[(0, k + 5)]);
            assert_eq!(split.costs[k], p.cell_width());
        }
        assert_eq!(split.bounds, vec![(0.0, 1.0); 10]);
    }

    #[test]
    fn budget_row_sums_both_split_parts() {
        let sys = decaying_scalar();
        let p = transcribe(&sys, &DVector::from_column_slice(&[2.0]), 4).unwrap();
        let split = p.split_lp_with_budget(1.5).unwrap();
        assert_eq!(split.a.nrows(), 2);
        assert_eq!(split.a.ncols(), 9);
        for j in 0..8 {
            assert_eq!(split.a[(1, j)], p.cell_width());
        }
        assert_eq!(split.a[(1, 8)], 1.0);
        assert_eq!(split.rhs[1], 1.5);
        assert_eq!(split.bounds[8], (0.0, f64::INFINITY));
        assert!(p.split_lp_with_budget(-0.1).is_err());
    }
}
