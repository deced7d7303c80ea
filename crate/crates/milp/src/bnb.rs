//! Best-first branch-and-bound over the binary variables of a [`MilpModel`].

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use crate::model::{MilpModel, MilpSolution, Sense, SolveStatus, SolverOptions, VarKind};
use crate::simplex::{solve_bounded, LpOutcome};
use crate::MilpError;

pub fn solve_milp(model: &MilpModel) -> Result<MilpSolution, MilpError> {
    solve_milp_with(model, &SolverOptions::default())
}

struct Node {
    /// LP bound in minimisation form.
    bound: f64,
    seq: usize,
    lower: Vec<f64>,
    upper: Vec<f64>,
    values: Vec<f64>,
}

impl PartialEq for Node {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}
impl Eq for Node {}
impl PartialOrd for Node {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Node {
    // BinaryHeap is a max-heap: the "greatest" node is the one with the smallest bound,
    // and among equal bounds the most recently inserted one, so ties dive instead of
    // sweeping level by level.
    fn cmp(&self, other: &Self) -> Ordering {
        other
            .bound
            .total_cmp(&self.bound)
            .then(self.seq.cmp(&other.seq))
    }
}

struct Incumbent {
    objective: f64,
    values: Vec<f64>,
    key: Vec<u8>,
}

struct Search<'a> {
    model: &'a MilpModel,
    opts: &'a SolverOptions,
    binaries: Vec<usize>,
    sign: f64,
    integral_objective: bool,
    evaluated: usize,
    seq: usize,
}

impl Search<'_> {
    fn evaluate(&mut self, lower: Vec<f64>, upper: Vec<f64>) -> Result<Option<Node>, MilpError> {
        if self.evaluated >= self.opts.max_nodes {
            return Err(MilpError::NodeLimit(self.opts.max_nodes));
        }
        self.evaluated += 1;
        match solve_bounded(self.model, &lower, &upper, self.opts)? {
            LpOutcome::Infeasible => Ok(None),
            LpOutcome::Optimal { values, objective } => {
                self.seq += 1;
                Ok(Some(Node {
                    bound: self.sign * objective,
                    seq: self.seq,
                    lower,
                    upper,
                    values,
                }))
            }
        }
    }

    fn prunable(&self, bound: f64, incumbent: &Option<Incumbent>) -> bool {
        let Some(inc) = incumbent else { return false };
        let best = self.sign * inc.objective;
        if self.integral_objective {
            (bound - 1e-6).ceil() >= best - 0.5
        } else {
            bound >= best - self.opts.gap_tol * (1.0 + best.abs())
        }
    }

    fn most_fractional(&self, values: &[f64]) -> Option<usize> {
        let mut pick: Option<(usize, f64)> = None;
        for &j in &self.binaries {
            let v = values[j];
            let frac = v.min(1.0 - v);
            if frac > self.opts.integrality_tol && pick.is_none_or(|(_, f)| frac > f) {
                pick = Some((j, frac));
            }
        }
        pick.map(|(j, _)| j)
    }
}

pub fn solve_milp_with(model: &MilpModel, opts: &SolverOptions) -> Result<MilpSolution, MilpError> {
    model.validate()?;
    let binaries = model.binary_indices();
    let sign = match model.objective.sense {
        Sense::Minimize => 1.0,
        Sense::Maximize => -1.0,
    };
    let integral_objective = model.objective.coefficients.iter().all(|&(j, c)| {
        model.variables[j].kind == VarKind::Binary && c.fract() == 0.0
    });
    let mut search = Search {
        model,
        opts,
        binaries,
        sign,
        integral_objective,
        evaluated: 0,
        seq: 0,
    };

    let lower: Vec<f64> = model.variables.iter().map(|v| v.lower).collect();
    let upper: Vec<f64> = model.variables.iter().map(|v| v.upper).collect();
    let mut heap = BinaryHeap::new();
    if let Some(root) = search.evaluate(lower, upper)? {
        heap.push(root);
    }
    let mut incumbent: Option<Incumbent> = None;

    while let Some(node) = heap.pop() {
        if search.prunable(node.bound, &incumbent) {
            continue;
        }
        match search.most_fractional(&node.values) {
            None => {
                // Integral in the binaries: fix them exactly and re-solve the continuous part.
                let mut lo = node.lower.clone();
                let mut hi = node.upper.clone();
                let mut key = Vec::with_capacity(search.binaries.len());
                for &j in &search.binaries {
                    let r = node.values[j].round();
                    lo[j] = r;
                    hi[j] = r;
                    key.push(r as u8);
                }
                let Some(fixed) = search.evaluate(lo, hi)? else {
                    continue;
                };
                let objective = model.objective_value(&fixed.values);
                let better = match &incumbent {
                    None => true,
                    Some(inc) => {
                        let (a, b) = (sign * objective, sign * inc.objective);
                        a < b - opts.gap_tol * (1.0 + b.abs())
                            || (a <= b + opts.gap_tol * (1.0 + b.abs()) && key < inc.key)
                    }
                };
                if better {
                    incumbent = Some(Incumbent {
                        objective,
                        values: fixed.values,
                        key,
                    });
                }
            }
            Some(j) => {
                for side in [1.0, 0.0] {
                    let mut lo = node.lower.clone();
                    let mut hi = node.upper.clone();
                    lo[j] = side;
                    hi[j] = side;
                    if let Some(child) = search.evaluate(lo, hi)? {
                        if !search.prunable(child.bound, &incumbent) {
                            heap.push(child);
                        }
                    }
                }
            }
        }
    }

    match incumbent {
        Some(inc) => Ok(MilpSolution {
            status: SolveStatus::Optimal,
            values: inc.values,
            objective_value: inc.objective,
            nodes_explored: search.evaluated,
        }),
        None => Err(MilpError::Infeasible),
    }
}
