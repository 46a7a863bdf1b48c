//! Matrix exponentials and plant validation.
//!
//! Everything downstream rests on two primitives: `e^{At}` via
//! scaling-and-squaring with a degree-13 Padé approximant, and the
//! augmented-matrix identity
//!
//! ```text
//! exp( [S  b] t ) = [ e^{St}   ∫₀ᵗ e^{Ss} b ds ]
//!      [0  0]       [   0            1         ]
//! ```
//!
//! which yields the per-cell input integrals of the zero-order-hold
//! transcription exactly, with no quadrature error.

use nalgebra::{DMatrix, DVector};

use crate::error::{AssumptionFailure, Error, Result};
use crate::model::{Grid, LtiSystem};

/// Scaling threshold for the degree-13 Padé approximant.
const PADE13_THETA: f64 = 5.371920351148152;

/// Padé-13 numerator coefficients (denominator uses the same with
/// alternating signs).
const PADE13_B: [f64; 14] = [
    64764752532480000.0,
    32382376266240000.0,
    7771770303897600.0,
    1187353796428800.0,
    129060195264000.0,
    10559470521600.0,
    670442572800.0,
    33522128640.0,
    1323241920.0,
    40840800.0,
    960960.0,
    16380.0,
    182.0,
    1.0,
];

fn one_norm(m: &DMatrix<f64>) -> f64 {
    (0..m.ncols())
        .map(|j| m.column(j).iter().map(|x| x.abs()).sum::<f64>())
        .fold(0.0, f64::max)
}

fn inf_norm(m: &DMatrix<f64>) -> f64 {
    (0..m.nrows())
        .map(|i| m.row(i).iter().map(|x| x.abs()).sum::<f64>())
        .fold(0.0, f64::max)
}

/// Compute `e^{At}`.
///
/// Returns [`Error::Numeric`] when the data is not finite or the result
/// overflows (extreme `‖At‖`).
pub fn expm(a: &DMatrix<f64>, t: f64) -> Result<DMatrix<f64>> {
    let n = a.nrows();
    if a.ncols() != n || n == 0 {
        return Err(Error::InvalidInput(format!(
            "expm requires a nonempty square matrix, got {}x{}",
            a.nrows(),
            a.ncols()
        )));
    }
    if !t.is_finite() || a.iter().any(|x| !x.is_finite()) {
        return Err(Error::Numeric("expm input contains non-finite entries".into()));
    }

    let mut m = a * t;
    let norm = one_norm(&m);
    if !norm.is_finite() {
        return Err(Error::Numeric("overflow while scaling expm argument".into()));
    }

    let squarings = if norm > PADE13_THETA {
        (norm / PADE13_THETA).log2().ceil() as u32
    } else {
        0
    };
    if squarings > 0 {
        m /= 2f64.powi(squarings as i32);
    }

    let mut result = pade13(&m)?;
    for _ in 0..squarings {
        result = &result * &result;
    }
    if result.iter().any(|x| !x.is_finite()) {
        return Err(Error::Numeric(format!(
            "matrix exponential overflowed (‖At‖₁ = {norm:.3e})"
        )));
    }
    Ok(result)
}

/// Degree-13 Padé approximant of `e^M` for `‖M‖₁ ≤ θ₁₃`.
fn pade13(m: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    let n = m.nrows();
    let eye = DMatrix::<f64>::identity(n, n);
    let m2 = m * m;
    let m4 = &m2 * &m2;
    let m6 = &m2 * &m4;

    let w = &m6 * (&m6 * PADE13_B[13] + &m4 * PADE13_B[11] + &m2 * PADE13_B[9])
        + &m6 * PADE13_B[7]
        + &m4 * PADE13_B[5]
        + &m2 * PADE13_B[3]
        + &eye * PADE13_B[1];
    let u = m * w;
    let v = &m6 * (&m6 * PADE13_B[12] + &m4 * PADE13_B[10] + &m2 * PADE13_B[8])
        + &m6 * PADE13_B[6]
        + &m4 * PADE13_B[4]
        + &m2 * PADE13_B[2]
        + &eye * PADE13_B[0];

    let numerator = &v + &u;
    let denominator = &v - &u;
    denominator
        .lu()
        .solve(&numerator)
        .ok_or_else(|| Error::Numeric("singular Padé denominator in expm".into()))
}

/// Propagator and input integral over one step:
/// returns `(e^{S·dt}, ∫₀^{dt} e^{Ss} b ds)` via a single exponential of the
/// `(n+1)×(n+1)` augmented matrix `[[S, b], [0, 0]]`.
pub fn input_integral(
    s_mat: &DMatrix<f64>,
    b: &DVector<f64>,
    dt: f64,
) -> Result<(DMatrix<f64>, DVector<f64>)> {
    let n = s_mat.nrows();
    let mut augmented = DMatrix::<f64>::zeros(n + 1, n + 1);
    augmented.view_mut((0, 0), (n, n)).copy_from(s_mat);
    augmented.view_mut((0, n), (n, 1)).copy_from(b);
    let e = expm(&augmented, dt)?;
    let propagator = e.view((0, 0), (n, n)).into_owned();
    let integral = e.view((0, n), (n, 1)).column(0).into_owned();
    Ok((propagator, integral))
}

/// The `k`-th column of the transcribed constraint matrix:
/// `g_k = ∫_{t_k}^{t_{k+1}} e^{-As} B ds = e^{-A t_k} · ∫₀^h e^{-As} B ds`.
pub fn cell_input_column(sys: &LtiSystem, grid: &Grid, k: usize) -> Result<DVector<f64>> {
    if k >= grid.cells() {
        return Err(Error::InvalidInput(format!(
            "cell index {k} out of range for a grid with {} cells",
            grid.cells()
        )));
    }
    let minus_a = -sys.a();
    let (_, phi) = input_integral(&minus_a, sys.b(), grid.width())?;
    if k == 0 {
        return Ok(phi);
    }
    let shift = expm(&minus_a, grid.node(k))?;
    Ok(shift * phi)
}

/// All constraint columns `g_0, …, g_{N-1}`, assembled with the recurrence
/// `g_{k+1} = e^{-Ah} g_k`.
pub fn input_columns(sys: &LtiSystem, grid: &Grid) -> Result<Vec<DVector<f64>>> {
    let minus_a = -sys.a();
    let (step, phi) = input_integral(&minus_a, sys.b(), grid.width())?;
    let mut columns = Vec::with_capacity(grid.cells());
    let mut current = phi;
    for _ in 0..grid.cells() {
        columns.push(current.clone());
        current = &step * &current;
    }
    Ok(columns)
}

/// A plant that passed [`validate_assumption`]: `(A, B)` controllable and
/// `A` nonsingular. All solver entry points require this witness.
#[derive(Debug, Clone, PartialEq)]
pub struct ValidatedSystem(LtiSystem);

impl ValidatedSystem {
    pub fn system(&self) -> &LtiSystem {
        &self.0
    }
}

impl std::ops::Deref for ValidatedSystem {
    type Target = LtiSystem;

    fn deref(&self) -> &LtiSystem {
        &self.0
    }
}

/// Check the standing assumption: `rank [B, AB, …, A^{n-1}B] = n` and
/// `det A ≠ 0`.
///
/// The rank test uses column-pivoted orthogonalization with the threshold
/// `1e-10 ×` the largest column norm, so badly scaled plants do not produce
/// false controllability failures. The determinant test is relative to
/// `‖A‖∞ⁿ`.
pub fn validate_assumption(sys: LtiSystem) -> Result<ValidatedSystem> {
    let n = sys.dim();
    let mut controllability = DMatrix::<f64>::zeros(n, n);
    let mut column = sys.b().clone();
    for j in 0..n {
        controllability.set_column(j, &column);
        column = sys.a() * column;
    }

    let rank = orthogonal_rank(&controllability, 1e-10);
    if rank < n {
        return Err(Error::Assumption(AssumptionFailure::Uncontrollable {
            rank,
            dim: n,
        }));
    }

    let det = sys.a().clone().lu().determinant();
    let scale = inf_norm(sys.a());
    if det.abs() <= 1e-12 * scale.powi(n as i32) {
        return Err(Error::Assumption(AssumptionFailure::SingularDynamics { det }));
    }

    Ok(ValidatedSystem(sys))
}

/// Numerical rank via column-pivoted orthogonalization: at each step the
/// residual column of largest norm is accepted if it exceeds
/// `rel_tol ×` the largest original column norm, then the remaining columns
/// are orthogonalized against it.
fn orthogonal_rank(m: &DMatrix<f64>, rel_tol: f64) -> usize {
    let mut cols: Vec<DVector<f64>> = (0..m.ncols()).map(|j| m.column(j).into_owned()).collect();
    let max_norm = cols.iter().map(|c| c.norm()).fold(0.0, f64::max);
    if max_norm == 0.0 {
        return 0;
    }
    let threshold = rel_tol * max_norm;

    let mut rank = 0;
    for _ in 0..cols.len().min(m.nrows()) {
        let (best, best_norm) = cols
            .iter()
            .enumerate()
            .skip(rank)
            .map(|(j, c)| (j, c.norm()))
            .fold((rank, -1.0), |acc, it| if it.1 > acc.1 { it } else { acc });
        if best_norm <= threshold {
            break;
        }
        cols.swap(rank, best);
        let q = cols[rank].clone() / best_norm;
        for c in cols.iter_mut().skip(rank + 1) {
            let proj = q.dot(c);
            *c -= &q * proj;
        }
        rank += 1;
    }
    rank
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use std::f64::consts::E;

    fn max_abs_diff(a: &DMatrix<f64>, b: &DMatrix<f64>) -> f64 {
        (a - b).iter().fold(0.0f64, |m, x| m.max(x.abs()))
    }

    #[test]
    fn expm_of_zero_is_identity() {
        let a = DMatrix::<f64>::zeros(3, 3);
        let e = expm(&a, 1.0).unwrap();
        assert!(max_abs_diff(&e, &DMatrix::identity(3, 3)) < 1e-15);
    }

    #[test]
    fn expm_scalar_decay() {
        let a = DMatrix::from_row_slice(1, 1, &[-1.0]);
        let e = expm(&a, 1.0).unwrap();
        assert!((e[(0, 0)] - 0.367879441171442).abs() < 1e-14);
    }

    #[test]
    fn expm_rotation_generator() {
        let a = DMatrix::from_row_slice(2, 2, &[0.0, 1.0, -1.0, 0.0]);
        for &t in &[0.3, 1.0, 2.5, -4.0, 9.0] {
            let e = expm(&a, t).unwrap();
            let expected =
                DMatrix::from_row_slice(2, 2, &[t.cos(), t.sin(), -t.sin(), t.cos()]);
            assert!(max_abs_diff(&e, &expected) < 1e-13, "t = {t}");
        }
    }

    #[test]
    fn expm_rejects_non_finite() {
        let a = DMatrix::from_row_slice(1, 1, &[f64::NAN]);
        assert!(matches!(expm(&a, 1.0), Err(Error::Numeric(_))));
        let b = DMatrix::from_row_slice(1, 1, &[1.0]);
        assert!(matches!(expm(&b, f64::INFINITY), Err(Error::Numeric(_))));
    }

    #[test]
    fn expm_flags_overflow() {
        let a = DMatrix::from_row_slice(1, 1, &[1.0]);
        assert!(matches!(expm(&a, 1e6), Err(Error::Numeric(_))));
    }

    fn scalar_system() -> LtiSystem {
        LtiSystem::new(
            DMatrix::from_row_slice(1, 1, &[-1.0]),
            DVector::from_column_slice(&[1.0]),
            5.0,
        )
        .unwrap()
    }

    #[test]
    fn cell_columns_match_analytic_scalar_integrals() {
        // a = -1 turns the kernel into e^{s}: ∫_k^{k+1} e^s ds = e^k (e - 1).
        let sys = scalar_system();
        let grid = Grid::new(5.0, 5).unwrap();
        let g0 = cell_input_column(&sys, &grid, 0).unwrap();
        assert!((g0[0] - (E - 1.0)).abs() < 1e-12);
        assert!((g0[0] - 1.718282).abs() < 1e-6);
        let g1 = cell_input_column(&sys, &grid, 1).unwrap();
        assert!((g1[0] - E * (E - 1.0)).abs() < 1e-12);
        assert!((g1[0] - 4.670774).abs() < 1e-6);
    }

    #[test]
    fn zero_input_matrix_gives_zero_columns() {
        let sys = LtiSystem::new(
            DMatrix::from_row_slice(1, 1, &[-1.0]),
            DVector::from_column_slice(&[0.0]),
            5.0,
        )
        .unwrap();
        let grid = Grid::new(5.0, 4).unwrap();
        let g = cell_input_column(&sys, &grid, 2).unwrap();
        assert_eq!(g[0], 0.0);
    }

    #[test]
    fn bulk_columns_agree_with_per_cell_columns() {
        let sys = LtiSystem::new(
            DMatrix::from_row_slice(2, 2, &[0.0, 1.0, -1.0, 0.0]),
            DVector::from_column_slice(&[0.0, 1.0]),
            std::f64::consts::TAU,
        )
        .unwrap();
        let grid = Grid::new(sys.horizon(), 16).unwrap();
        let columns = input_columns(&sys, &grid).unwrap();
        for &k in &[0usize, 1, 7, 15] {
            let direct = cell_input_column(&sys, &grid, k).unwrap();
            assert!((&columns[k] - &direct).norm() < 1e-12, "k = {k}");
        }
    }

    #[test]
    fn column_sum_matches_whole_horizon_integral() {
        let sys = LtiSystem::new(
            DMatrix::from_row_slice(2, 2, &[0.0, 1.0, -1.0, 0.0]),
            DVector::from_column_slice(&[0.0, 1.0]),
            std::f64::consts::TAU,
        )
        .unwrap();
        let grid = Grid::new(sys.horizon(), 64).unwrap();
        let columns = input_columns(&sys, &grid).unwrap();
        let total: DVector<f64> = columns
            .iter()
            .fold(DVector::zeros(2), |acc, c| acc + c);
        let (_, whole) = input_integral(&(-sys.a()), sys.b(), sys.horizon()).unwrap();
        assert!((total - &whole).norm() <= 1e-10 * (1.0 + whole.norm()));
    }

    #[test]
    fn validation_accepts_oscillator() {
        let sys = LtiSystem::new(
            DMatrix::from_row_slice(2, 2, &[0.0, 1.0, -1.0, 0.0]),
            DVector::from_column_slice(&[0.0, 1.0]),
            1.0,
        )
        .unwrap();
        assert!(validate_assumption(sys).is_ok());
    }

    #[test]
    fn validation_rejects_singular_dynamics() {
        let sys = LtiSystem::new(
            DMatrix::from_row_slice(2, 2, &[0.0, 1.0, 0.0, 0.0]),
            DVector::from_column_slice(&[0.0, 1.0]),
            1.0,
        )
        .unwrap();
        match validate_assumption(sys) {
            Err(Error::Assumption(AssumptionFailure::SingularDynamics { .. })) => {}
            other => panic!("expected singular-dynamics failure, got {other:?}"),
        }
    }

    #[test]
    fn validation_rejects_uncontrollable_pair() {
        let sys = LtiSystem::new(
            DMatrix::from_row_slice(1, 1, &[-1.0]),
            DVector::from_column_slice(&[0.0]),
            1.0,
        )
        .unwrap();
        match validate_assumption(sys) {
            Err(Error::Assumption(AssumptionFailure::Uncontrollable { rank: 0, dim: 1 })) => {}
            other => panic!("expected uncontrollable failure, got {other:?}"),
        }
    }

    /// Random Hurwitz matrix: random entries shifted to be strictly
    /// diagonally dominant with negative diagonal.
    fn stable_matrix(n: usize, entries: &[f64]) -> DMatrix<f64> {
        let mut a = DMatrix::from_fn(n, n, |i, j| entries[i * n + j]);
        for i in 0..n {
            let row_sum: f64 = (0..n).filter(|&j| j != i).map(|j| a[(i, j)].abs()).sum();
            a[(i, i)] = -(row_sum + 0.1 + a[(i, i)].abs());
        }
        a
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn semigroup_property(
            n in 1usize..=4,
            entries in prop::collection::vec(-1.0f64..1.0, 16),
            s in -5.0f64..5.0,
            t in -5.0f64..5.0,
        ) {
            let a = stable_matrix(n, &entries);
            let whole = expm(&a, s + t).unwrap();
            let split = expm(&a, s).unwrap() * expm(&a, t).unwrap();
            let scale = one_norm(&whole).max(1.0);
            prop_assert!(max_abs_diff(&whole, &split) <= 1e-10 * scale);
        }

        #[test]
        fn inverse_property(
            n in 1usize..=4,
            entries in prop::collection::vec(-1.0f64..1.0, 16),
            t in -5.0f64..5.0,
        ) {
            let a = stable_matrix(n, &entries);
            let product = expm(&a, t).unwrap() * expm(&a, -t).unwrap();
            prop_assert!(max_abs_diff(&product, &DMatrix::identity(n, n)) <= 1e-10);
        }
    }
}
