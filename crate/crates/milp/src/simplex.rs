//! Dense-tableau two-phase primal simplex.
//!
//! The model is rewritten into `min c'x, A x (<=|=|>=) b, x >= 0` by shifting or mirroring
//! each variable onto its finite bound and turning finite upper bounds into explicit rows.
//! After phase 2 the basic solution is recomputed from the original matrix with a fresh
//! factorization of the final basis, so accumulated pivot round-off does not leak out.

use crate::model::{MilpModel, MilpSolution, Relation, Sense, SolveStatus, SolverOptions};
use crate::MilpError;

const PIVOT_TOL: f64 = 1e-9;
const COST_TOL: f64 = 1e-9;

/// Solves the continuous relaxation of `model` (binaries relaxed to their bounds).
pub fn solve_lp(model: &MilpModel) -> Result<MilpSolution, MilpError> {
    solve_lp_with(model, &SolverOptions::default())
}

pub fn solve_lp_with(model: &MilpModel, opts: &SolverOptions) -> Result<MilpSolution, MilpError> {
    model.validate()?;
    let lower: Vec<f64> = model.variables.iter().map(|v| v.lower).collect();
    let upper: Vec<f64> = model.variables.iter().map(|v| v.upper).collect();
    let out = solve_bounded(model, &lower, &upper, opts)?;
    Ok(match out {
        LpOutcome::Optimal { values, objective } => MilpSolution {
            status: SolveStatus::Optimal,
            values,
            objective_value: objective,
            nodes_explored: 0,
        },
        LpOutcome::Infeasible => MilpSolution {
            status: SolveStatus::Infeasible,
            values: vec![f64::NAN; model.variables.len()],
            objective_value: f64::NAN,
            nodes_explored: 0,
        },
    })
}

pub(crate) enum LpOutcome {
    Optimal { values: Vec<f64>, objective: f64 },
    Infeasible,
}

#[derive(Clone, Copy, Debug)]
enum VarMap {
    Fixed(f64),
    /// `x = offset + x'`
    Shift { col: usize, offset: f64 },
    /// `x = offset - x'`
    Mirror { col: usize, offset: f64 },
    /// `x = x+ - x-`
    Free { pos: usize, neg: usize },
}

struct Row {
    coeffs: Vec<(usize, f64)>,
    relation: Relation,
    rhs: f64,
}

/// Solves the relaxation of `model` with the given variable bounds (these override the
/// bounds stored in the model, which lets branch-and-bound fix binaries cheaply).
pub(crate) fn solve_bounded(
    model: &MilpModel,
    lower: &[f64],
    upper: &[f64],
    opts: &SolverOptions,
) -> Result<LpOutcome, MilpError> {
    let nvar = model.variables.len();
    let mut maps = Vec::with_capacity(nvar);
    let mut ncols = 0usize;
    let mut rows: Vec<Row> = Vec::new();
    for j in 0..nvar {
        let (l, u) = (lower[j], upper[j]);
        if l > u + opts.feasibility_tol {
            return Ok(LpOutcome::Infeasible);
        }
        let map = if l.is_finite() && u.is_finite() && (u - l).abs() <= 0.0 {
            VarMap::Fixed(l)
        } else if l.is_finite() {
            let col = ncols;
            ncols += 1;
            if u.is_finite() {
                rows.push(Row {
                    coeffs: vec![(col, 1.0)],
                    relation: Relation::Le,
                    rhs: u - l,
                });
            }
            VarMap::Shift { col, offset: l }
        } else if u.is_finite() {
            let col = ncols;
            ncols += 1;
            VarMap::Mirror { col, offset: u }
        } else {
            ncols += 2;
            VarMap::Free {
                pos: ncols - 2,
                neg: ncols - 1,
            }
        };
        maps.push(map);
    }

    // Objective in minimisation form over the transformed columns.
    let sign = match model.objective.sense {
        Sense::Minimize => 1.0,
        Sense::Maximize => -1.0,
    };
    let mut cost = vec![0.0; ncols];
    for &(j, c) in &model.objective.coefficients {
        let c = sign * c;
        match maps[j] {
            VarMap::Fixed(_) => {}
            VarMap::Shift { col, .. } => cost[col] += c,
            VarMap::Mirror { col, .. } => cost[col] -= c,
            VarMap::Free { pos, neg } => {
                cost[pos] += c;
                cost[neg] -= c;
            }
        }
    }

    for con in &model.constraints {
        let mut rhs = con.rhs;
        let mut coeffs: Vec<(usize, f64)> = Vec::with_capacity(con.coefficients.len());
        for &(j, a) in &con.coefficients {
            match maps[j] {
                VarMap::Fixed(v) => rhs -= a * v,
                VarMap::Shift { col, offset } => {
                    rhs -= a * offset;
                    coeffs.push((col, a));
                }
                VarMap::Mirror { col, offset } => {
                    rhs -= a * offset;
                    coeffs.push((col, -a));
                }
                VarMap::Free { pos, neg } => {
                    coeffs.push((pos, a));
                    coeffs.push((neg, -a));
                }
            }
        }
        if coeffs.is_empty() {
            let ok = match con.relation {
                Relation::Le => rhs >= -opts.feasibility_tol,
                Relation::Ge => rhs <= opts.feasibility_tol,
                Relation::Eq => rhs.abs() <= opts.feasibility_tol,
            };
            if !ok {
                return Ok(LpOutcome::Infeasible);
            }
            continue;
        }
        rows.push(Row {
            coeffs,
            relation: con.relation,
            rhs,
        });
    }

    let std = match StandardForm::build(ncols, rows, cost) {
        Some(s) => s,
        None => return Ok(LpOutcome::Infeasible),
    };
    let xs = match std.solve(opts)? {
        Some(x) => x,
        None => return Ok(LpOutcome::Infeasible),
    };

    let values: Vec<f64> = maps
        .iter()
        .map(|m| match *m {
            VarMap::Fixed(v) => v,
            VarMap::Shift { col, offset } => offset + xs[col],
            VarMap::Mirror { col, offset } => offset - xs[col],
            VarMap::Free { pos, neg } => xs[pos] - xs[neg],
        })
        .collect();
    let objective = model.objective_value(&values);
    Ok(LpOutcome::Optimal { values, objective })
}

/// `min c'x` subject to rows with non-negative right-hand sides, `x >= 0`.
struct StandardForm {
    n: usize,
    m: usize,
    /// Total columns: structural, then slack/surplus, then artificial.
    width: usize,
    first_art: usize,
    /// Row-major `m x (width + 1)`; the last column is the right-hand side.
    a: Vec<f64>,
    cost: Vec<f64>,
    basis: Vec<usize>,
}

impl StandardForm {
    fn build(n: usize, mut rows: Vec<Row>, cost: Vec<f64>) -> Option<StandardForm> {
        for r in &mut rows {
            if r.rhs < 0.0 {
                r.rhs = -r.rhs;
                for t in &mut r.coeffs {
                    t.1 = -t.1;
                }
                r.relation = match r.relation {
                    Relation::Le => Relation::Ge,
                    Relation::Ge => Relation::Le,
                    Relation::Eq => Relation::Eq,
                };
            }
        }
        let m = rows.len();
        let n_slack = rows.iter().filter(|r| r.relation != Relation::Eq).count();
        let n_art = rows.iter().filter(|r| r.relation != Relation::Le).count();
        let first_art = n + n_slack;
        let width = first_art + n_art;
        let stride = width + 1;
        let mut a = vec![0.0; m * stride];
        let mut basis = vec![0; m];
        let (mut s, mut art) = (n, first_art);
        for (i, r) in rows.iter().enumerate() {
            let row = &mut a[i * stride..(i + 1) * stride];
            for &(j, v) in &r.coeffs {
                row[j] += v;
            }
            row[width] = r.rhs;
            match r.relation {
                Relation::Le => {
                    row[s] = 1.0;
                    basis[i] = s;
                    s += 1;
                }
                Relation::Ge => {
                    row[s] = -1.0;
                    s += 1;
                    row[art] = 1.0;
                    basis[i] = art;
                    art += 1;
                }
                Relation::Eq => {
                    row[art] = 1.0;
                    basis[i] = art;
                    art += 1;
                }
            }
        }
        let mut full_cost = cost;
        full_cost.resize(width, 0.0);
        Some(StandardForm {
            n,
            m,
            width,
            first_art,
            a,
            cost: full_cost,
            basis,
        })
    }

    /// Returns the optimal structural values, `None` when infeasible.
    fn solve(self, opts: &SolverOptions) -> Result<Option<Vec<f64>>, MilpError> {
        let original = self.a.clone();
        let mut tab = Tableau {
            m: self.m,
            width: self.width,
            t: self.a,
            basis: self.basis,
            rows_alive: (0..self.m).collect(),
            pivots: 0,
        };
        let stride = self.width + 1;
        let bmax = (0..self.m)
            .map(|i| original[i * stride + self.width].abs())
            .fold(1.0, f64::max);

        // Phase 1.
        let allowed_all = vec![true; self.width];
        if self.first_art < self.width {
            let mut obj = vec![0.0; stride];
            for o in obj.iter_mut().take(self.width).skip(self.first_art) {
                *o = 1.0;
            }
            for i in 0..tab.m {
                if tab.basis[i] >= self.first_art {
                    for k in 0..stride {
                        obj[k] -= tab.t[i * stride + k];
                    }
                }
            }
            match tab.optimize(&mut obj, &allowed_all, opts) {
                Ok(()) => {}
                Err(Stop::IterationLimit) => return Err(MilpError::IterationLimit),
                // Phase 1 is bounded below by zero.
                Err(Stop::Unbounded) => unreachable!("phase 1 objective is bounded"),
            }
            let infeas = -obj[self.width];
            if infeas > opts.feasibility_tol * bmax {
                return Ok(None);
            }
            tab.drive_out_artificials(self.first_art);
        }

        // Phase 2.
        let allowed: Vec<bool> = (0..self.width).map(|j| j < self.first_art).collect();
        let mut obj = vec![0.0; stride];
        obj[..self.width].copy_from_slice(&self.cost);
        for i in 0..tab.m {
            let cb = self.cost[tab.basis[i]];
            if cb != 0.0 {
                for k in 0..stride {
                    obj[k] -= cb * tab.t[i * stride + k];
                }
            }
        }
        match tab.optimize(&mut obj, &allowed, opts) {
            Ok(()) => {}
            Err(Stop::IterationLimit) => return Err(MilpError::IterationLimit),
            Err(Stop::Unbounded) => return Err(MilpError::Unbounded),
        }

        let mut x = vec![0.0; self.width];
        for i in 0..tab.m {
            x[tab.basis[i]] = tab.t[i * stride + self.width].max(0.0);
        }
        if let Some(refined) = refactorize(&original, stride, &tab.rows_alive, &tab.basis) {
            for (i, &b) in tab.basis.iter().enumerate() {
                x[b] = refined[i].max(0.0);
            }
        }
        debug_assert!(
            duality_gap_ok(&original, stride, &tab.rows_alive, &tab.basis, &self.cost, &x, self.first_art),
            "weak duality spot-check failed"
        );
        x.truncate(self.n);
        Ok(Some(x))
    }
}

enum Stop {
    Unbounded,
    IterationLimit,
}

struct Tableau {
    m: usize,
    width: usize,
    t: Vec<f64>,
    basis: Vec<usize>,
    /// Original row index for every surviving tableau row.
    rows_alive: Vec<usize>,
    pivots: usize,
}

impl Tableau {
    fn stride(&self) -> usize {
        self.width + 1
    }

    fn pivot(&mut self, r: usize, c: usize, obj: &mut [f64]) {
        let stride = self.stride();
        let p = self.t[r * stride + c];
        let prow: Vec<f64> = self.t[r * stride..(r + 1) * stride]
            .iter()
            .map(|v| v / p)
            .collect();
        let nz: Vec<usize> = (0..stride).filter(|&k| prow[k] != 0.0).collect();
        for i in 0..self.m {
            let row = &mut self.t[i * stride..(i + 1) * stride];
            if i == r {
                row.copy_from_slice(&prow);
                continue;
            }
            let f = row[c];
            if f != 0.0 {
                for &k in &nz {
                    row[k] -= f * prow[k];
                }
                row[c] = 0.0;
            }
        }
        let f = obj[c];
        if f != 0.0 {
            for &k in &nz {
                obj[k] -= f * prow[k];
            }
            obj[c] = 0.0;
        }
        self.basis[r] = c;
        self.pivots += 1;
    }

    fn optimize(&mut self, obj: &mut [f64], allowed: &[bool], opts: &SolverOptions) -> Result<(), Stop> {
        let stride = self.stride();
        let mut bland = false;
        let mut degenerate_run = 0usize;
        loop {
            if self.pivots >= opts.max_pivots {
                return Err(Stop::IterationLimit);
            }
            let mut enter = None;
            let mut best = -COST_TOL;
            for j in 0..self.width {
                if !allowed[j] || obj[j] >= -COST_TOL {
                    continue;
                }
                if bland {
                    enter = Some(j);
                    break;
                }
                if obj[j] < best {
                    best = obj[j];
                    enter = Some(j);
                }
            }
            let Some(c) = enter else { return Ok(()) };

            let mut leave: Option<(usize, f64, f64)> = None;
            for i in 0..self.m {
                let a = self.t[i * stride + c];
                if a <= PIVOT_TOL {
                    continue;
                }
                let ratio = self.t[i * stride + self.width].max(0.0) / a;
                leave = match leave {
                    None => Some((i, ratio, a)),
                    Some((bi, br, ba)) => {
                        if ratio < br - 1e-12 {
                            Some((i, ratio, a))
                        } else if ratio <= br + 1e-12 {
                            let better = if bland {
                                self.basis[i] < self.basis[bi]
                            } else {
                                a > ba || (a == ba && self.basis[i] < self.basis[bi])
                            };
                            if better {
                                Some((i, ratio, a))
                            } else {
                                Some((bi, br, ba))
                            }
                        } else {
                            Some((bi, br, ba))
                        }
                    }
                };
            }
            let Some((r, ratio, _)) = leave else {
                return Err(Stop::Unbounded);
            };
            if ratio <= 1e-12 {
                degenerate_run += 1;
                if degenerate_run > self.bland_threshold(opts) {
                    bland = true;
                }
            } else {
                degenerate_run = 0;
            }
            self.pivot(r, c, obj);
        }
    }

    fn bland_threshold(&self, opts: &SolverOptions) -> usize {
        opts.bland_after
    }

    fn drive_out_artificials(&mut self, first_art: usize) {
        let stride = self.stride();
        let mut dummy = vec![0.0; stride];
        let mut i = 0;
        while i < self.m {
            if self.basis[i] < first_art {
                i += 1;
                continue;
            }
            let mut best: Option<(usize, f64)> = None;
            for j in 0..first_art {
                let a = self.t[i * stride + j].abs();
                if a > PIVOT_TOL && best.is_none_or(|(_, b)| a > b) {
                    best = Some((j, a));
                }
            }
            match best {
                Some((j, _)) => {
                    self.pivot(i, j, &mut dummy);
                    i += 1;
                }
                None => {
                    // Redundant row.
                    self.t.drain(i * stride..(i + 1) * stride);
                    self.basis.remove(i);
                    self.rows_alive.remove(i);
                    self.m -= 1;
                }
            }
        }
    }
}

/// Solves `B x_B = b` for the final basis against the untouched constraint matrix.
fn refactorize(original: &[f64], stride: usize, rows: &[usize], basis: &[usize]) -> Option<Vec<f64>> {
    let m = rows.len();
    let width = stride - 1;
    let mut mat = vec![0.0; m * (m + 1)];
    for (r, &orow) in rows.iter().enumerate() {
        for (k, &col) in basis.iter().enumerate() {
            mat[r * (m + 1) + k] = original[orow * stride + col];
        }
        mat[r * (m + 1) + m] = original[orow * stride + width];
    }
    gauss_solve(&mut mat, m)
}

/// In-place Gaussian elimination with partial pivoting on an augmented `m x (m+1)` matrix.
fn gauss_solve(mat: &mut [f64], m: usize) -> Option<Vec<f64>> {
    let s = m + 1;
    for col in 0..m {
        let piv = (col..m).max_by(|&a, &b| {
            mat[a * s + col]
                .abs()
                .partial_cmp(&mat[b * s + col].abs())
                .unwrap()
        })?;
        if mat[piv * s + col].abs() < 1e-13 {
            return None;
        }
        if piv != col {
            for k in 0..s {
                mat.swap(piv * s + k, col * s + k);
            }
        }
        let p = mat[col * s + col];
        for r in col + 1..m {
            let f = mat[r * s + col] / p;
            if f != 0.0 {
                for k in col..s {
                    mat[r * s + k] -= f * mat[col * s + k];
                }
            }
        }
    }
    let mut x = vec![0.0; m];
    for r in (0..m).rev() {
        let mut acc = mat[r * s + m];
        for k in r + 1..m {
            acc -= mat[r * s + k] * x[k];
        }
        x[r] = acc / mat[r * s + r];
    }
    Some(x)
}

/// Weak duality: with duals `y` from `B'y = c_B`, the dual objective `b'y` equals the
/// primal objective and every reduced cost is non-negative.
fn duality_gap_ok(
    original: &[f64],
    stride: usize,
    rows: &[usize],
    basis: &[usize],
    cost: &[f64],
    x: &[f64],
    first_art: usize,
) -> bool {
    let m = rows.len();
    if m == 0 {
        return true;
    }
    let width = stride - 1;
    // Transposed system B' y = c_B.
    let mut mat = vec![0.0; m * (m + 1)];
    for (k, &col) in basis.iter().enumerate() {
        for (r, &orow) in rows.iter().enumerate() {
            mat[k * (m + 1) + r] = original[orow * stride + col];
        }
        mat[k * (m + 1) + m] = cost[col];
    }
    let Some(y) = gauss_solve(&mut mat, m) else {
        return true;
    };
    let primal: f64 = cost.iter().zip(x).map(|(c, v)| c * v).sum();
    let dual: f64 = rows
        .iter()
        .zip(&y)
        .map(|(&orow, yi)| original[orow * stride + width] * yi)
        .sum();
    let scale = 1.0 + primal.abs() + dual.abs();
    if dual > primal + 1e-6 * scale {
        return false;
    }
    let ymax = y.iter().fold(1.0, |a: f64, b| a.max(b.abs()));
    (0..first_art).all(|j| {
        let red: f64 = cost[j]
            - rows
                .iter()
                .zip(&y)
                .map(|(&orow, yi)| original[orow * stride + j] * yi)
                .sum::<f64>();
        red >= -1e-6 * ymax
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{Relation, Sense};

    #[test]
    fn maximize_single_bound() {
        let mut m = MilpModel::new(Sense::Maximize);
        let x = m.add_continuous("x", 0.0, f64::INFINITY);
        m.add_constraint("c", &[(x, 1.0)], Relation::Le, 3.0);
        m.set_objective(&[(x, 1.0)]);
        let s = solve_lp(&m).unwrap();
        assert_eq!(s.status, SolveStatus::Optimal);
        assert!((s.objective_value - 3.0).abs() < 1e-12);
    }

    #[test]
    fn contradictory_equalities_are_infeasible() {
        let mut m = MilpModel::new(Sense::Minimize);
        let x = m.add_continuous("x", 0.0, f64::INFINITY);
        m.add_constraint("a", &[(x, 1.0)], Relation::Eq, 1.0);
        m.add_constraint("b", &[(x, 1.0)], Relation::Eq, 2.0);
        let s = solve_lp(&m).unwrap();
        assert_eq!(s.status, SolveStatus::Infeasible);
    }

    #[test]
    fn unbounded_is_an_error() {
        let mut m = MilpModel::new(Sense::Maximize);
        let x = m.add_continuous("x", 0.0, f64::INFINITY);
        m.set_objective(&[(x, 1.0)]);
        assert!(matches!(solve_lp(&m), Err(MilpError::Unbounded)));
    }

    #[test]
    fn free_and_mirrored_variables() {
        // min x - y, x free with x >= -2 via row, y <= 4 (no lower bound), x + y = 1
        let mut m = MilpModel::new(Sense::Minimize);
        let x = m.add_continuous("x", f64::NEG_INFINITY, f64::INFINITY);
        let y = m.add_continuous("y", f64::NEG_INFINITY, 4.0);
        m.add_constraint("lo", &[(x, 1.0)], Relation::Ge, -2.0);
        m.add_constraint("sum", &[(x, 1.0), (y, 1.0)], Relation::Eq, 1.0);
        m.set_objective(&[(x, 1.0), (y, -1.0)]);
        let s = solve_lp(&m).unwrap();
        assert!((s.values[0] + 2.0).abs() < 1e-9);
        assert!((s.values[1] - 3.0).abs() < 1e-9);
        assert!((s.objective_value + 5.0).abs() < 1e-9);
    }

    #[test]
    fn redundant_equalities_are_dropped() {
        let mut m = MilpModel::new(Sense::Minimize);
        let x = m.add_continuous("x", 0.0, 10.0);
        let y = m.add_continuous("y", 0.0, 10.0);
        m.add_constraint("a", &[(x, 1.0), (y, 1.0)], Relation::Eq, 4.0);
        m.add_constraint("b", &[(x, 2.0), (y, 2.0)], Relation::Eq, 8.0);
        m.set_objective(&[(x, 1.0), (y, 3.0)]);
        let s = solve_lp(&m).unwrap();
        assert!((s.objective_value - 4.0).abs() < 1e-9);
    }

    #[test]
    fn iteration_limit_is_reported() {
        let mut m = MilpModel::new(Sense::Maximize);
        let x = m.add_continuous("x", 0.0, 5.0);
        let y = m.add_continuous("y", 0.0, 5.0);
        m.set_objective(&[(x, 1.0), (y, 1.0)]);
        let opts = SolverOptions {
            max_pivots: 1,
            ..Default::default()
        };
        assert!(matches!(solve_lp_with(&m, &opts), Err(MilpError::IterationLimit)));
    }
}
