//! The hands-off solver: sparsest admissible control, value function,
//! budget feasibility, and terminal-constraint verification.
//!
//! The L0 problem is solved through its L1 surrogate: for controllable
//! plants with nonsingular dynamics the two share their optimal controls
//! and value, and the L1 problem is a bounded-variable LP after zero-order
//! hold transcription. The reported `value` is always the LP objective (the
//! numerically stable quantity); the support measure `l0` is computed from
//! the reconstructed control for verification only.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::lp::{self, LpConfig, LpStatus};
use crate::matfun::{input_integral, ValidatedSystem};
use crate::model::{ControlSignal, Grid, ZeroTolerance};
use crate::transcribe::{transcribe, SplitLp, TranscribedProblem};

/// Tolerance band at the ±1 rails: cells with `|u_k| ≥ 1 - ONE_TOL` count
/// as saturated, mirroring the zero tolerance at the other end.
const ONE_TOL: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SolveStatus {
    Optimal,
    Infeasible,
    NumericFailure,
}

/// Classification of one control cell against the bang-off-bang pattern.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CellClass {
    NegativeRail,
    Off,
    PositiveRail,
    Fractional,
}

/// Everything the solve produced, plus enough context (`xi`, the grid) to
/// re-verify it independently.
#[derive(Debug, Clone)]
pub struct SolveReport {
    pub xi: DVector<f64>,
    pub control: ControlSignal,
    /// The value function `V(ξ)`: the LP objective.
    pub value: f64,
    pub l1: f64,
    pub l0: f64,
    pub linf: f64,
    pub terminal_residual: DVector<f64>,
    pub status: SolveStatus,
    /// Share of cells classified as −1, 0 or +1.
    pub bang_off_bang_fraction: f64,
    /// Cells strictly between off and a rail; at most `n` for a basic
    /// optimal solution.
    pub fractional_cells: usize,
    pub lp_iterations: usize,
}

/// Reusable solve state for one `(system, grid)` pair: the transcription
/// and both LP layouts are assembled once, so families of solves (sweeps,
/// bisections, property suites) only pay for the simplex itself.
pub struct SolveContext<'a> {
    sys: &'a ValidatedSystem,
    grid: Grid,
    problem: TranscribedProblem,
    plain: SplitLp,
    budget: SplitLp,
    cfg: LpConfig,
    zero_tol: ZeroTolerance,
    step_forward: DMatrix<f64>,
    step_input: DVector<f64>,
}

impl<'a> SolveContext<'a> {
    pub fn new(sys: &'a ValidatedSystem, cells: usize) -> Result<Self> {
        let zero = DVector::zeros(sys.dim());
        let problem = transcribe(sys, &zero, cells)?;
        let plain = problem.split_lp();
        let budget = problem.split_lp_with_budget(0.0)?;
        let grid = Grid::new(sys.horizon(), cells)?;
        let (step_forward, step_input) = input_integral(sys.a(), sys.b(), grid.width())?;
        Ok(Self {
            sys,
            grid,
            problem,
            plain,
            budget,
            cfg: LpConfig::default(),
            zero_tol: ZeroTolerance::default(),
            step_forward,
            step_input,
        })
    }

    pub fn grid(&self) -> Grid {
        self.grid
    }

    pub fn system(&self) -> &ValidatedSystem {
        self.sys
    }

    pub fn problem(&self) -> &TranscribedProblem {
        &self.problem
    }

    /// Solve the hands-off problem for the initial state `xi`.
    pub fn solve(&self, xi: &DVector<f64>) -> Result<SolveReport> {
        let rhs = self.target_rhs(xi)?;
        let sol = lp::solve_lp(&self.plain.costs, &self.plain.a, &rhs, &self.plain.bounds, &self.cfg);
        match sol.status {
            LpStatus::Infeasible => {
                return Err(Error::Infeasible {
                    phase1_residual: sol.phase1_residual,
                })
            }
            LpStatus::NumericFailure => {
                return Err(Error::Numeric(
                    sol.failure.unwrap_or_else(|| "LP solve failed".into()),
                ))
            }
            LpStatus::Optimal => {}
        }

        let cells = self.problem.cells();
        let values: Vec<f64> = (0..cells).map(|k| sol.x[k] - sol.x[cells + k]).collect();
        let control = ControlSignal::new(self.grid, values)?;

        let classes = classify_cells(&control, self.zero_tol);
        let fractional_cells = classes
            .iter()
            .filter(|c| matches!(c, CellClass::Fractional))
            .count();
        let bang_off_bang_fraction = 1.0 - fractional_cells as f64 / cells as f64;

        let terminal_residual = self.simulate(xi, &control);

        Ok(SolveReport {
            xi: xi.clone(),
            l1: control.l1_norm(),
            l0: control.l0_norm(self.zero_tol),
            linf: control.linf_norm(),
            control,
            value: sol.objective,
            terminal_residual,
            status: SolveStatus::Optimal,
            bang_off_bang_fraction,
            fractional_cells,
            lp_iterations: sol.iterations,
        })
    }

    /// The value function `V(ξ)`.
    pub fn value(&self, xi: &DVector<f64>) -> Result<f64> {
        self.solve(xi).map(|report| report.value)
    }

    /// Membership probe `ξ ∈ R_α`: is there an admissible control with
    /// `‖u‖1 ≤ α`? Decided by LP phase 1 on the budget-augmented problem.
    pub fn feasible_with_budget(&self, xi: &DVector<f64>, alpha: f64) -> Result<bool> {
        if alpha.is_nan() || alpha < 0.0 {
            return Err(Error::InvalidInput(format!(
                "budget must be nonnegative, got {alpha}"
            )));
        }
        let mut rhs = DVector::zeros(self.sys.dim() + 1);
        rhs.rows_mut(0, self.sys.dim()).copy_from(&self.target_rhs(xi)?);
        rhs[self.sys.dim()] = alpha;
        let (status, _) =
            lp::check_feasibility(&self.budget.a, &rhs, &self.budget.bounds, &self.cfg);
        match status {
            LpStatus::Optimal => Ok(true),
            LpStatus::Infeasible => Ok(false),
            LpStatus::NumericFailure => {
                Err(Error::Numeric("budget feasibility probe failed".into()))
            }
        }
    }

    /// Plain membership probe `ξ ∈ R` (no budget).
    pub fn feasible(&self, xi: &DVector<f64>) -> Result<bool> {
        let rhs = self.target_rhs(xi)?;
        let (status, _) =
            lp::check_feasibility(&self.plain.a, &rhs, &self.plain.bounds, &self.cfg);
        match status {
            LpStatus::Optimal => Ok(true),
            LpStatus::Infeasible => Ok(false),
            LpStatus::NumericFailure => {
                Err(Error::Numeric("reachability probe failed".into()))
            }
        }
    }

    /// Exact zero-order-hold propagation of `ẋ = Ax + Bu` from `xi`;
    /// returns `x(T)`.
    pub fn simulate(&self, xi: &DVector<f64>, control: &ControlSignal) -> DVector<f64> {
        let mut x = xi.clone();
        for &u in control.values() {
            x = &self.step_forward * x + &self.step_input * u;
        }
        x
    }

    fn target_rhs(&self, xi: &DVector<f64>) -> Result<DVector<f64>> {
        if xi.len() != self.sys.dim() {
            return Err(Error::InvalidInput(format!(
                "initial state has dimension {}, plant has dimension {}",
                xi.len(),
                self.sys.dim()
            )));
        }
        if xi.iter().any(|x| !x.is_finite()) {
            return Err(Error::InvalidInput("initial state must be finite".into()));
        }
        Ok(-xi)
    }
}

fn classify_cells(control: &ControlSignal, zero_tol: ZeroTolerance) -> Vec<CellClass> {
    control
        .values()
        .iter()
        .map(|&u| {
            if u.abs() <= zero_tol.value() {
                CellClass::Off
            } else if u >= 1.0 - ONE_TOL {
                CellClass::PositiveRail
            } else if u <= -1.0 + ONE_TOL {
                CellClass::NegativeRail
            } else {
                CellClass::Fractional
            }
        })
        .collect()
}

/// Solve the hands-off problem: transcribe, minimize the L1 objective,
/// reconstruct the control and all norms, and verify the terminal state.
pub fn solve_hands_off(
    sys: &ValidatedSystem,
    xi: &DVector<f64>,
    cells: usize,
) -> Result<SolveReport> {
    SolveContext::new(sys, cells)?.solve(xi)
}

/// The value function `V(ξ)` on the discretized problem.
pub fn value(sys: &ValidatedSystem, xi: &DVector<f64>, cells: usize) -> Result<f64> {
    SolveContext::new(sys, cells)?.value(xi)
}

/// Membership probe `ξ ∈ R_α` (admissible control with `‖u‖1 ≤ α`).
pub fn feasible_with_budget(
    sys: &ValidatedSystem,
    xi: &DVector<f64>,
    cells: usize,
    alpha: f64,
) -> Result<bool> {
    SolveContext::new(sys, cells)?.feasible_with_budget(xi, alpha)
}

/// Re-simulate a report's control from its initial state with exact
/// zero-order-hold propagation and return the terminal state, which should
/// vanish for a valid solution.
pub fn verify_terminal(sys: &ValidatedSystem, report: &SolveReport) -> Result<DVector<f64>> {
    let grid = report.control.grid();
    let (step_forward, step_input) = input_integral(sys.a(), sys.b(), grid.width())?;
    let mut x = report.xi.clone();
    for &u in report.control.values() {
        x = &step_forward * x + &step_input * u;
    }
    Ok(x)
}
