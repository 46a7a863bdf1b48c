//! Self-contained bounded-variable primal simplex.
//!
//! Solves `min c·x` subject to `A x = b` and `lo ≤ x ≤ hi` with a dense
//! two-phase method: phase 1 minimizes the total artificial infeasibility,
//! phase 2 minimizes the original cost. Nonbasic variables rest at one of
//! their bounds, so an optimal solution is basic: at most `m` (row count)
//! variables sit strictly between their bounds. Pricing is Dantzig's rule;
//! Bland's anti-cycling rule takes over after a budget of degenerate pivots
//! is exhausted. The basis inverse is maintained by product-form updates and
//! rebuilt from scratch at a fixed pivot interval.
//!
//! The problems of this crate are small and dense (`m ≤ 7`, a few thousand
//! columns), which keeps the dense representation both fast and easy to
//! audit.

use nalgebra::{DMatrix, DVector};

/// All solver tolerances in one place.
#[derive(Debug, Clone)]
pub struct LpConfig {
    /// Phase-1 optimum above `feas_tol·(1 + ‖b‖∞)` means infeasible; an
    /// optimal solution satisfies `‖Ax - b‖∞` within the same bound.
    pub feas_tol: f64,
    /// Bounds are honored to within this absolute tolerance.
    pub bound_tol: f64,
    /// Reduced costs within `opt_tol` of zero do not qualify for entering.
    pub opt_tol: f64,
    /// Pivot elements smaller than this are rejected; if no alternative row
    /// qualifies the solve reports a numeric failure.
    pub pivot_tol: f64,
    /// A step below this counts as a degenerate pivot.
    pub degen_step_tol: f64,
    /// Degenerate-pivot budget factor: Bland's rule engages after
    /// `degen_factor·(rows + cols)` degenerate pivots.
    pub degen_factor: usize,
    /// Basis inverse is recomputed from scratch every this many pivots.
    pub refactor_interval: usize,
    /// Hard iteration cap; 0 means automatic (`200·(rows + cols) + 10_000`).
    pub max_iterations: usize,
}

impl Default for LpConfig {
    fn default() -> Self {
        Self {
            feas_tol: 1e-8,
            bound_tol: 1e-9,
            opt_tol: 1e-9,
            pivot_tol: 1e-11,
            degen_step_tol: 1e-12,
            degen_factor: 5,
            refactor_interval: 100,
            max_iterations: 0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LpStatus {
    Optimal,
    Infeasible,
    NumericFailure,
}

/// Outcome of a solve. `x` holds the structural variables only.
#[derive(Debug, Clone)]
pub struct LpSolution {
    pub status: LpStatus,
    pub x: Vec<f64>,
    pub objective: f64,
    pub iterations: usize,
    /// Residual infeasibility left by phase 1 (0 for feasible problems).
    pub phase1_residual: f64,
    /// Diagnostic attached to a `NumericFailure` status.
    pub failure: Option<String>,
}

/// Minimize `costs·x` subject to `a x = rhs`, `bounds.0 ≤ x ≤ bounds.1`.
///
/// Requirements on the data (checked): finite costs and matrix entries,
/// finite lower bounds, `lo ≤ hi` per variable. Upper bounds may be `+∞`.
pub fn solve_lp(
    costs: &[f64],
    a: &DMatrix<f64>,
    rhs: &DVector<f64>,
    bounds: &[(f64, f64)],
    cfg: &LpConfig,
) -> LpSolution {
    let mut worker = match Simplex::new(costs, a, rhs, bounds, cfg) {
        Ok(w) => w,
        Err(msg) => {
            return LpSolution {
                status: LpStatus::NumericFailure,
                x: vec![0.0; costs.len()],
                objective: f64::NAN,
                iterations: 0,
                phase1_residual: f64::NAN,
                failure: Some(msg),
            }
        }
    };
    worker.run(false)
}

/// Phase-1 feasibility probe: does any `x` satisfy `a x = rhs` within
/// bounds? Returns the verdict status (`Optimal` = feasible) and the
/// residual infeasibility.
pub fn check_feasibility(
    a: &DMatrix<f64>,
    rhs: &DVector<f64>,
    bounds: &[(f64, f64)],
    cfg: &LpConfig,
) -> (LpStatus, f64) {
    let costs = vec![0.0; bounds.len()];
    let mut worker = match Simplex::new(&costs, a, rhs, bounds, cfg) {
        Ok(w) => w,
        Err(_) => return (LpStatus::NumericFailure, f64::NAN),
    };
    let solution = worker.run(true);
    (solution.status, solution.phase1_residual)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum VarState {
    Basic(usize),
    AtLower,
    AtUpper,
}

struct Simplex<'a> {
    a: &'a DMatrix<f64>,
    rhs: &'a DVector<f64>,
    cfg: &'a LpConfig,
    rows: usize,
    n_struct: usize,
    n_total: usize,
    costs: Vec<f64>,
    lower: Vec<f64>,
    upper: Vec<f64>,
    art_sign: Vec<f64>,
    x: Vec<f64>,
    state: Vec<VarState>,
    basis: Vec<usize>,
    binv: DMatrix<f64>,
    duals: DVector<f64>,
    work_col: DVector<f64>,
    iterations: usize,
    pivots_since_refactor: usize,
    degenerate_pivots: usize,
    bland: bool,
    max_iterations: usize,
}

enum StepOutcome {
    PhaseOptimal,
    Continue,
    Failure(String),
}

impl<'a> Simplex<'a> {
    fn new(
        costs: &[f64],
        a: &'a DMatrix<f64>,
        rhs: &'a DVector<f64>,
        bounds: &[(f64, f64)],
        cfg: &'a LpConfig,
    ) -> Result<Self, String> {
        let rows = a.nrows();
        let n_struct = a.ncols();
        if costs.len() != n_struct || bounds.len() != n_struct {
            return Err("cost/bound length must match the column count".into());
        }
        if rhs.len() != rows {
            return Err("rhs length must match the row count".into());
        }
        if costs.iter().any(|c| !c.is_finite())
            || a.iter().any(|v| !v.is_finite())
            || rhs.iter().any(|v| !v.is_finite())
        {
            return Err("LP data must be finite".into());
        }
        for &(lo, hi) in bounds {
            if !lo.is_finite() || hi.is_nan() || lo > hi {
                return Err(format!("invalid variable bounds [{lo}, {hi}]"));
            }
        }

        let n_total = n_struct + rows;
        let mut lower = Vec::with_capacity(n_total);
        let mut upper = Vec::with_capacity(n_total);
        for &(lo, hi) in bounds {
            lower.push(lo);
            upper.push(hi);
        }
        lower.extend(std::iter::repeat_n(0.0, rows));
        upper.extend(std::iter::repeat_n(f64::INFINITY, rows));

        // Structural variables start at their lower bound; artificials pick
        // up the signed residual so the initial basis is diagonal.
        let mut x = vec![0.0; n_total];
        let mut state = vec![VarState::AtLower; n_total];
        x[..n_struct].copy_from_slice(&lower[..n_struct]);
        let mut residual = rhs.clone();
        for (j, &xj) in x.iter().enumerate().take(n_struct) {
            if xj != 0.0 {
                residual -= a.column(j) * xj;
            }
        }
        let mut art_sign = vec![1.0; rows];
        let mut basis = Vec::with_capacity(rows);
        let mut binv = DMatrix::<f64>::zeros(rows, rows);
        for i in 0..rows {
            let sign = if residual[i] >= 0.0 { 1.0 } else { -1.0 };
            art_sign[i] = sign;
            let var = n_struct + i;
            x[var] = residual[i].abs();
            state[var] = VarState::Basic(i);
            basis.push(var);
            binv[(i, i)] = sign;
        }

        let max_iterations = if cfg.max_iterations == 0 {
            200 * (rows + n_total) + 10_000
        } else {
            cfg.max_iterations
        };

        Ok(Self {
            a,
            rhs,
            cfg,
            rows,
            n_struct,
            n_total,
            costs: costs.to_vec(),
            lower,
            upper,
            art_sign,
            x,
            state,
            basis,
            binv,
            duals: DVector::zeros(rows),
            work_col: DVector::zeros(rows),
            iterations: 0,
            pivots_since_refactor: 0,
            degenerate_pivots: 0,
            bland: false,
            max_iterations,
        })
    }

    fn run(&mut self, feasibility_only: bool) -> LpSolution {
        let feas_scale = 1.0 + self.rhs.iter().fold(0.0f64, |m, v| m.max(v.abs()));

        // Phase 1: minimize the artificial infeasibility.
        let original_costs = std::mem::replace(&mut self.costs, vec![0.0; self.n_total]);
        for j in self.n_struct..self.n_total {
            self.costs[j] = 1.0;
        }
        if let Err(msg) = self.optimize() {
            return self.failure(msg);
        }
        let phase1 = (self.n_struct..self.n_total).map(|j| self.x[j]).sum::<f64>();
        if phase1 > self.cfg.feas_tol * feas_scale {
            return LpSolution {
                status: LpStatus::Infeasible,
                x: self.x[..self.n_struct].to_vec(),
                objective: f64::NAN,
                iterations: self.iterations,
                phase1_residual: phase1,
                failure: None,
            };
        }
        if feasibility_only {
            return LpSolution {
                status: LpStatus::Optimal,
                x: self.x[..self.n_struct].to_vec(),
                objective: 0.0,
                iterations: self.iterations,
                phase1_residual: phase1,
                failure: None,
            };
        }

        if let Err(msg) = self.evict_artificials() {
            return self.failure(msg);
        }

        // Phase 2: original costs, artificials pinned at zero.
        self.costs = original_costs;
        self.costs.extend(std::iter::repeat_n(0.0, self.rows));
        for j in self.n_struct..self.n_total {
            self.upper[j] = 0.0;
            self.x[j] = 0.0;
        }
        self.degenerate_pivots = 0;
        self.bland = false;
        if let Err(msg) = self.optimize() {
            return self.failure(msg);
        }

        // Guard the advertised optimality contract: recompute the residual
        // and bound slack from scratch and retry once through a
        // refactorization if either drifted.
        if self.solution_residual() > self.cfg.feas_tol * feas_scale
            || self.bound_violation() > self.cfg.bound_tol
        {
            if let Err(msg) = self.refactor() {
                return self.failure(msg);
            }
            if self.solution_residual() > self.cfg.feas_tol * feas_scale {
                return self.failure("residual drift exceeds the feasibility tolerance".into());
            }
            if self.bound_violation() > self.cfg.bound_tol {
                return self.failure("bound drift exceeds the bound tolerance".into());
            }
        }

        let objective = (0..self.n_struct).map(|j| self.costs[j] * self.x[j]).sum();
        LpSolution {
            status: LpStatus::Optimal,
            x: self.x[..self.n_struct].to_vec(),
            objective,
            iterations: self.iterations,
            phase1_residual: phase1,
            failure: None,
        }
    }

    fn failure(&self, msg: String) -> LpSolution {
        LpSolution {
            status: LpStatus::NumericFailure,
            x: self.x[..self.n_struct].to_vec(),
            objective: f64::NAN,
            iterations: self.iterations,
            phase1_residual: f64::NAN,
            failure: Some(msg),
        }
    }

    fn column_dot(&self, j: usize, v: &DVector<f64>) -> f64 {
        if j < self.n_struct {
            self.a.column(j).dot(v)
        } else {
            self.art_sign[j - self.n_struct] * v[j - self.n_struct]
        }
    }

    /// `work_col ← B⁻¹ A_j`.
    fn ftran(&mut self, j: usize) {
        if j < self.n_struct {
            self.work_col.gemv(1.0, &self.binv, &self.a.column(j), 0.0);
        } else {
            let i = j - self.n_struct;
            let sign = self.art_sign[i];
            for r in 0..self.rows {
                self.work_col[r] = sign * self.binv[(r, i)];
            }
        }
    }

    fn optimize(&mut self) -> Result<(), String> {
        loop {
            if self.iterations > self.max_iterations {
                return Err("iteration limit exceeded".into());
            }
            match self.step()? {
                StepOutcome::PhaseOptimal => return Ok(()),
                StepOutcome::Continue => {}
                StepOutcome::Failure(msg) => return Err(msg),
            }
        }
    }

    fn step(&mut self) -> Result<StepOutcome, String> {
        // Duals y = c_B B⁻¹.
        for i in 0..self.rows {
            let mut acc = 0.0;
            for r in 0..self.rows {
                acc += self.costs[self.basis[r]] * self.binv[(r, i)];
            }
            self.duals[i] = acc;
        }

        // Pricing: Dantzig by default, Bland once the degeneracy budget is
        // spent. Ties break toward the lower index for determinism.
        let mut entering: Option<(usize, f64, bool)> = None;
        for j in 0..self.n_total {
            match self.state[j] {
                VarState::Basic(_) => continue,
                VarState::AtLower | VarState::AtUpper => {}
            }
            if self.lower[j] == self.upper[j] {
                continue;
            }
            let reduced = self.costs[j] - self.column_dot(j, &self.duals);
            let (eligible, increasing) = match self.state[j] {
                VarState::AtLower => (reduced < -self.cfg.opt_tol, true),
                VarState::AtUpper => (reduced > self.cfg.opt_tol, false),
                VarState::Basic(_) => unreachable!(),
            };
            if !eligible {
                continue;
            }
            if self.bland {
                entering = Some((j, reduced.abs(), increasing));
                break;
            }
            match entering {
                Some((_, best, _)) if reduced.abs() <= best => {}
                _ => entering = Some((j, reduced.abs(), increasing)),
            }
        }

        let Some((j, _, increasing)) = entering else {
            return Ok(StepOutcome::PhaseOptimal);
        };
        let sigma = if increasing { 1.0 } else { -1.0 };

        self.ftran(j);

        // Ratio test. The entering variable itself is limited by its
        // opposite bound; each basic variable by whichever of its bounds it
        // moves toward.
        let mut best_step = self.upper[j] - self.lower[j];
        let mut leaving: Option<(usize, f64, bool)> = None; // (slot, |pivot|, hits_upper)
        for i in 0..self.rows {
            let coeff = -sigma * self.work_col[i];
            if coeff.abs() <= self.cfg.pivot_tol {
                continue;
            }
            let var = self.basis[i];
            let (room, hits_upper) = if coeff > 0.0 {
                if self.upper[var].is_infinite() {
                    continue;
                }
                ((self.upper[var] - self.x[var]) / coeff, true)
            } else {
                ((self.x[var] - self.lower[var]) / (-coeff), false)
            };
            let room = room.max(0.0);
            let replace = match leaving {
                None => room < best_step,
                Some((_, best_pivot, _)) => {
                    room < best_step
                        || (room == best_step && self.work_col[i].abs() > best_pivot)
                }
            };
            if replace {
                best_step = room;
                leaving = Some((i, self.work_col[i].abs(), hits_upper));
            }
        }

        if best_step.is_infinite() {
            return Ok(StepOutcome::Failure(
                "objective unbounded below (no blocking bound)".into(),
            ));
        }

        self.iterations += 1;

        match leaving {
            None => {
                // Bound flip: the entering variable crosses to its opposite
                // bound without a basis change.
                let delta = best_step;
                for i in 0..self.rows {
                    let var = self.basis[i];
                    self.x[var] += -sigma * self.work_col[i] * delta;
                }
                if increasing {
                    self.x[j] = self.upper[j];
                    self.state[j] = VarState::AtUpper;
                } else {
                    self.x[j] = self.lower[j];
                    self.state[j] = VarState::AtLower;
                }
            }
            Some((slot, pivot_abs, hits_upper)) => {
                if pivot_abs < self.cfg.pivot_tol {
                    return Ok(StepOutcome::Failure(format!(
                        "pivot magnitude {pivot_abs:.3e} below tolerance"
                    )));
                }
                let delta = best_step;
                for i in 0..self.rows {
                    let var = self.basis[i];
                    self.x[var] += -sigma * self.work_col[i] * delta;
                }
                self.x[j] = if increasing {
                    self.lower[j] + delta
                } else {
                    self.upper[j] - delta
                };

                let outgoing = self.basis[slot];
                // Snap the leaving variable exactly onto the bound it hit.
                if hits_upper {
                    self.x[outgoing] = self.upper[outgoing];
                    self.state[outgoing] = VarState::AtUpper;
                } else {
                    self.x[outgoing] = self.lower[outgoing];
                    self.state[outgoing] = VarState::AtLower;
                }
                self.basis[slot] = j;
                self.state[j] = VarState::Basic(slot);

                self.update_binv(slot);
                self.pivots_since_refactor += 1;
                if self.pivots_since_refactor >= self.cfg.refactor_interval {
                    self.refactor()?;
                }

                if delta <= self.cfg.degen_step_tol {
                    self.degenerate_pivots += 1;
                    if !self.bland
                        && self.degenerate_pivots
                            > self.cfg.degen_factor * (self.rows + self.n_total)
                    {
                        self.bland = true;
                    }
                }
            }
        }
        Ok(StepOutcome::Continue)
    }

    /// Product-form update after replacing the basis column in `slot`:
    /// `B⁻¹ ← E B⁻¹` with the eta column derived from `work_col = B⁻¹ A_j`.
    fn update_binv(&mut self, slot: usize) {
        let pivot = self.work_col[slot];
        for c in 0..self.rows {
            self.binv[(slot, c)] /= pivot;
        }
        for r in 0..self.rows {
            if r == slot {
                continue;
            }
            let factor = self.work_col[r];
            if factor == 0.0 {
                continue;
            }
            for c in 0..self.rows {
                self.binv[(r, c)] -= factor * self.binv[(slot, c)];
            }
        }
    }

    /// Rebuild the basis inverse from scratch and recompute the basic values
    /// from the nonbasic ones, clearing accumulated drift.
    fn refactor(&mut self) -> Result<(), String> {
        let mut basis_matrix = DMatrix::<f64>::zeros(self.rows, self.rows);
        for (slot, &var) in self.basis.iter().enumerate() {
            if var < self.n_struct {
                basis_matrix.set_column(slot, &self.a.column(var));
            } else {
                basis_matrix[(var - self.n_struct, slot)] = self.art_sign[var - self.n_struct];
            }
        }
        self.binv = basis_matrix
            .lu()
            .try_inverse()
            .ok_or_else(|| "basis matrix became singular".to_string())?;

        let mut residual = self.rhs.clone();
        for j in 0..self.n_total {
            if matches!(self.state[j], VarState::Basic(_)) || self.x[j] == 0.0 {
                continue;
            }
            if j < self.n_struct {
                residual -= self.a.column(j) * self.x[j];
            } else {
                residual[j - self.n_struct] -= self.art_sign[j - self.n_struct] * self.x[j];
            }
        }
        let basic_values = &self.binv * residual;
        for (slot, &var) in self.basis.iter().enumerate() {
            self.x[var] = basic_values[slot];
        }
        self.pivots_since_refactor = 0;
        Ok(())
    }

    /// Pivot basic artificials out of the basis where a structural column
    /// can replace them (degenerate exchanges). Rows with no eligible
    /// replacement keep their artificial pinned at zero.
    fn evict_artificials(&mut self) -> Result<(), String> {
        for slot in 0..self.rows {
            if self.basis[slot] < self.n_struct {
                continue;
            }
            let mut replacement = None;
            for j in 0..self.n_struct {
                if matches!(self.state[j], VarState::Basic(_)) {
                    continue;
                }
                self.ftran(j);
                if self.work_col[slot].abs() > self.cfg.pivot_tol {
                    replacement = Some(j);
                    break;
                }
            }
            let Some(j) = replacement else { continue };
            self.ftran(j);
            let outgoing = self.basis[slot];
            self.x[outgoing] = 0.0;
            self.state[outgoing] = VarState::AtLower;
            // The incoming variable keeps its current (bound) value: the
            // exchange is degenerate because the artificial sits at zero.
            self.basis[slot] = j;
            self.state[j] = VarState::Basic(slot);
            self.update_binv(slot);
            self.pivots_since_refactor += 1;
            if self.pivots_since_refactor >= self.cfg.refactor_interval {
                self.refactor()?;
            }
        }
        Ok(())
    }

    fn bound_violation(&self) -> f64 {
        (0..self.n_total)
            .map(|j| (self.lower[j] - self.x[j]).max(self.x[j] - self.upper[j]).max(0.0))
            .fold(0.0, f64::max)
    }

    fn solution_residual(&self) -> f64 {
        let mut residual = self.rhs.clone();
        for j in 0..self.n_total {
            if self.x[j] == 0.0 {
                continue;
            }
            if j < self.n_struct {
                residual -= self.a.column(j) * self.x[j];
            } else {
                residual[j - self.n_struct] -= self.art_sign[j - self.n_struct] * self.x[j];
            }
        }
        residual.iter().fold(0.0f64, |m, v| m.max(v.abs()))
    }
}
