//! Linearly conjugate realizations of complex factorizable systems.
//!
//! A target Kirchhoff matrix `A_b` over the source complexes and a positive species scaling
//! `c` must satisfy `Y A_b = diag(c)^-1 Y A_k`. Writing `w = 1/c` makes this linear in
//! `(A_b, w)`; binary indicators select the arcs of the target graph.

use std::time::Instant;

use crnlc_milp::{solve_lp, solve_milp, MilpModel, Relation, Sense, SolveStatus, VarId};
use nalgebra::DMatrix;
use serde::Serialize;

use crate::error::{CrnError, Result};
use crate::kinetics::{sample_points, KineticSystem, Kinetics, RateLaw};
use crate::network::{ReactionNetwork, ReactionSpec};
use crate::ode::{compare_trajectories, integrate, IntegrateOptions};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    /// Fewest reactions.
    Sparse,
    /// Most reactions.
    Dense,
}

/// Upper bounds on the off-diagonal entries of `A_b`.
#[derive(Clone, Debug, PartialEq)]
pub enum ArcBounds {
    Uniform(f64),
    /// Entry `(i, j)` bounds the arc from complex `j` to complex `i`.
    PerArc(DMatrix<f64>),
}

impl ArcBounds {
    fn get(&self, i: usize, j: usize) -> f64 {
        match self {
            ArcBounds::Uniform(u) => *u,
            ArcBounds::PerArc(m) => m[(i, j)],
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct MilpConfig {
    /// Smallest nonzero arc weight; the conjugacy constants lie in `[epsilon, 1/epsilon]`.
    pub epsilon: f64,
    pub upper: ArcBounds,
    pub mode: Mode,
    pub require_weak_reversibility: bool,
    /// Add per-column minimum/maximum support inequalities found by enumeration. Off by
    /// default: they are valid but have not reduced the search on any model tried.
    pub support_cuts: bool,
}

impl Default for MilpConfig {
    fn default() -> Self {
        MilpConfig {
            epsilon: 0.001,
            upper: ArcBounds::Uniform(20.0),
            mode: Mode::Sparse,
            require_weak_reversibility: false,
            support_cuts: false,
        }
    }
}

impl MilpConfig {
    fn validate(&self, n: usize) -> Result<()> {
        let eps = self.epsilon;
        if !(eps > 0.0 && eps <= 1.0) {
            return Err(CrnError::Config(format!("epsilon must lie in (0, 1], got {eps}")));
        }
        if let ArcBounds::PerArc(m) = &self.upper {
            if m.shape() != (n, n) {
                return Err(CrnError::Config(format!(
                    "arc bound matrix is {}x{}, expected {n}x{n}",
                    m.nrows(),
                    m.ncols()
                )));
            }
        }
        for j in 0..n {
            for i in (0..n).filter(|&i| i != j) {
                let u = self.upper.get(i, j);
                if !(u.is_finite() && u > eps) {
                    return Err(CrnError::Config(format!(
                        "epsilon {eps} must be below every arc bound (found {u})"
                    )));
                }
            }
        }
        if n == 0 {
            return Err(CrnError::Config("empty network".into()));
        }
        Ok(())
    }
}

/// Model variables of the arc from complex `from` to complex `to`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ArcVars {
    pub from: usize,
    pub to: usize,
    pub weight: VarId,
    pub active: VarId,
    pub circulation: Option<VarId>,
    /// Ruled out before solving (bounds fixed to zero).
    pub eliminated: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SupportBound {
    pub complex: usize,
    pub min: usize,
    pub max: usize,
}

#[derive(Clone, Debug)]
pub struct ConjugacyModel {
    pub model: MilpModel,
    pub arcs: Vec<ArcVars>,
    /// `w_s = 1 / c_s` per species.
    pub inverse_scaling: Vec<VarId>,
    pub support_bounds: Vec<SupportBound>,
    num_complexes: usize,
}

impl ConjugacyModel {
    pub fn num_eliminated(&self) -> usize {
        self.arcs.iter().filter(|a| a.eliminated).count()
    }

    /// Assignment of the model variables encoding a given `A_b` and `c`; useful to check a
    /// known realization against the model.
    pub fn assignment(&self, a_b: &DMatrix<f64>, c: &[f64]) -> Vec<f64> {
        let mut values = vec![0.0; self.model.variables.len()];
        for arc in &self.arcs {
            let a = a_b[(arc.to, arc.from)];
            values[arc.weight.0] = a;
            values[arc.active.0] = if a > 0.0 { 1.0 } else { 0.0 };
        }
        for (w, ci) in self.inverse_scaling.iter().zip(c) {
            values[w.0] = 1.0 / ci;
        }
        values
    }

    /// Largest constraint or bound violation of an assignment.
    pub fn violation(&self, values: &[f64]) -> f64 {
        self.model.max_violation(values)
    }
}

/// Exponent row (kinetic orders or Hill exponents) of each reactant complex.
fn complex_exponents(sys: &KineticSystem) -> Result<Vec<Option<Vec<f64>>>> {
    let mut rows = vec![None; sys.network.num_complexes()];
    for (y, _) in sys.complex_parameter_rows()? {
        let j = sys.network.reactions_from(y)[0];
        rows[y] = Some(sys.kinetics.law.exponents(j).to_vec());
    }
    Ok(rows)
}

/// Arcs that cannot appear: those leaving non-reactant complexes, and those whose
/// displacement in some species cannot be balanced within their column.
fn eliminate_arcs(y: &DMatrix<f64>, m_img: &DMatrix<f64>, reactant: &[bool]) -> Vec<Vec<bool>> {
    let (m, n) = y.shape();
    let mut allowed: Vec<Vec<bool>> = (0..n)
        .map(|j| (0..n).map(|i| i != j && reactant[j]).collect())
        .collect();
    let scale = m_img.iter().fold(0.0_f64, |a, v| a.max(v.abs()));
    let zero_tol = 1e-12 * scale.max(1.0);
    loop {
        let mut changed = false;
        for j in 0..n {
            for s in 0..m {
                if m_img[(s, j)].abs() > zero_tol {
                    continue;
                }
                let d = |i: usize| y[(s, i)] - y[(s, j)];
                let pos = (0..n).any(|i| allowed[j][i] && d(i) > 0.0);
                let neg = (0..n).any(|i| allowed[j][i] && d(i) < 0.0);
                if pos != neg {
                    for i in 0..n {
                        if allowed[j][i] && d(i) != 0.0 {
                            allowed[j][i] = false;
                            changed = true;
                        }
                    }
                }
            }
        }
        if !changed {
            return allowed;
        }
    }
}

/// Column `j` alone can be realized with exactly the arcs in `support`, with its own free
/// scaling vector.
fn column_feasible(
    y: &DMatrix<f64>,
    m_img: &DMatrix<f64>,
    j: usize,
    support: &[usize],
    cfg: &MilpConfig,
) -> bool {
    let m = y.nrows();
    let eps = cfg.epsilon;
    let mut lp = MilpModel::new(Sense::Minimize);
    let arcs: Vec<VarId> = support
        .iter()
        .map(|&i| lp.add_continuous(format!("a{i}"), eps, cfg.upper.get(i, j)))
        .collect();
    let ws: Vec<VarId> = (0..m)
        .map(|s| lp.add_continuous(format!("w{s}"), eps, 1.0 / eps))
        .collect();
    for s in 0..m {
        let mut terms: Vec<(VarId, f64)> = support
            .iter()
            .zip(&arcs)
            .map(|(&i, &v)| (v, y[(s, i)] - y[(s, j)]))
            .filter(|(_, c)| *c != 0.0)
            .collect();
        if m_img[(s, j)] != 0.0 {
            terms.push((ws[s], -m_img[(s, j)]));
        }
        if !terms.is_empty() {
            lp.add_constraint(format!("lc{s}"), &terms, Relation::Eq, 0.0);
        }
    }
    matches!(solve_lp(&lp), Ok(sol) if sol.status == SolveStatus::Optimal)
}

/// Enumerates supports of a single column to bound its arc count from both sides.
/// Columns with more candidate arcs than `FULL_ENUMERATION` only get a lower bound, found
/// by trying supports of increasing size up to `MIN_SEARCH_DEPTH`.
fn column_support_bounds(
    y: &DMatrix<f64>,
    m_img: &DMatrix<f64>,
    j: usize,
    candidates: &[usize],
    cfg: &MilpConfig,
) -> (usize, usize) {
    const FULL_ENUMERATION: usize = 10;
    const MIN_SEARCH_DEPTH: usize = 3;
    let k = candidates.len();
    if k <= FULL_ENUMERATION {
        let mut min = usize::MAX;
        let mut max = 0;
        for mask in 1u32..(1 << k) {
            let size = mask.count_ones() as usize;
            if size >= min && size <= max {
                continue;
            }
            let support: Vec<usize> = (0..k).filter(|b| mask >> b & 1 == 1).map(|b| candidates[b]).collect();
            if column_feasible(y, m_img, j, &support, cfg) {
                min = min.min(size);
                max = max.max(size);
            }
        }
        // No feasible support at all: the model is infeasible; leave that to the solver.
        if min == usize::MAX {
            return (1, k);
        }
        return (min, max);
    }
    for size in 1..=MIN_SEARCH_DEPTH {
        if subsets_of(candidates, size)
            .into_iter()
            .any(|s| column_feasible(y, m_img, j, &s, cfg))
        {
            return (size, k);
        }
    }
    (MIN_SEARCH_DEPTH + 1, k)
}

fn subsets_of(items: &[usize], size: usize) -> Vec<Vec<usize>> {
    if size == 0 {
        return vec![Vec::new()];
    }
    let mut out = Vec::new();
    for (p, &first) in items.iter().enumerate() {
        for mut rest in subsets_of(&items[p + 1..], size - 1) {
            rest.insert(0, first);
            out.push(rest);
        }
    }
    out
}

pub fn build_milp(sys: &KineticSystem, cfg: &MilpConfig) -> Result<ConjugacyModel> {
    let net = &sys.network;
    let (m, n) = (net.num_species(), net.num_complexes());
    cfg.validate(n)?;
    let exps = complex_exponents(sys)?;
    let reactant: Vec<bool> = exps.iter().map(Option::is_some).collect();
    let y = net.complex_matrix();
    let m_img = &y * sys.laplacian();
    let allowed = eliminate_arcs(&y, &m_img, &reactant);
    let eps = cfg.epsilon;

    let mut model = MilpModel::new(match cfg.mode {
        Mode::Sparse => Sense::Minimize,
        Mode::Dense => Sense::Maximize,
    });
    let pairs: Vec<(usize, usize)> = (0..n)
        .flat_map(|j| (0..n).filter(move |&i| i != j).map(move |i| (j, i)))
        .collect();
    let weights: Vec<VarId> = pairs
        .iter()
        .map(|&(j, i)| {
            let hi = if allowed[j][i] { f64::INFINITY } else { 0.0 };
            model.add_continuous(format!("a_{}_{}", i + 1, j + 1), 0.0, hi)
        })
        .collect();
    let actives: Vec<VarId> = pairs
        .iter()
        .map(|&(j, i)| {
            let v = model.add_binary(format!("d_{}_{}", i + 1, j + 1));
            if !allowed[j][i] {
                model.variables[v.0].upper = 0.0;
            }
            v
        })
        .collect();
    let inverse_scaling: Vec<VarId> = net
        .species()
        .iter()
        .map(|s| model.add_continuous(format!("w_{s}"), eps, 1.0 / eps))
        .collect();
    let circulation: Vec<Option<VarId>> = pairs
        .iter()
        .map(|&(j, i)| {
            cfg.require_weak_reversibility.then(|| {
                let hi = if allowed[j][i] { f64::INFINITY } else { 0.0 };
                model.add_continuous(format!("t_{}_{}", i + 1, j + 1), 0.0, hi)
            })
        })
        .collect();

    let pairs_ref = &pairs;
    let column_arcs = |j: usize| (0..pairs_ref.len()).filter(move |&p| pairs_ref[p].0 == j);

    // Y A_b = diag(w) Y A_k, column by column.
    for j in 0..n {
        for s in 0..m {
            let mut terms: Vec<(VarId, f64)> = column_arcs(j)
                .map(|p| (weights[p], y[(s, pairs[p].1)] - y[(s, j)]))
                .filter(|(_, c)| *c != 0.0)
                .collect();
            if m_img[(s, j)] != 0.0 {
                terms.push((inverse_scaling[s], -m_img[(s, j)]));
            }
            if !terms.is_empty() {
                let name = format!("lc_{}_{}", net.species()[s], j + 1);
                model.add_constraint(name, &terms, Relation::Eq, 0.0);
            }
        }
    }
    for (p, &(j, i)) in pairs.iter().enumerate() {
        if !allowed[j][i] {
            continue;
        }
        let u = cfg.upper.get(i, j);
        let tag = format!("{}_{}", i + 1, j + 1);
        model.add_constraint(format!("ub_{tag}"), &[(weights[p], 1.0), (actives[p], -u)], Relation::Le, 0.0);
        model.add_constraint(format!("lb_{tag}"), &[(weights[p], 1.0), (actives[p], -eps)], Relation::Ge, 0.0);
        if let Some(t) = circulation[p] {
            model.add_constraint(format!("cub_{tag}"), &[(t, 1.0), (actives[p], -u)], Relation::Le, 0.0);
            model.add_constraint(format!("clb_{tag}"), &[(t, 1.0), (actives[p], -eps)], Relation::Ge, 0.0);
        }
    }
    for j in (0..n).filter(|&j| reactant[j]) {
        let terms: Vec<(VarId, f64)> = column_arcs(j).map(|p| (weights[p], 1.0)).collect();
        model.add_constraint(format!("out_{}", j + 1), &terms, Relation::Ge, eps);
    }
    if cfg.require_weak_reversibility {
        for k in 0..n {
            let mut terms: Vec<(VarId, f64)> = Vec::new();
            for (p, &(j, i)) in pairs.iter().enumerate() {
                let Some(t) = circulation[p] else { continue };
                if !allowed[j][i] {
                    continue;
                }
                if j == k {
                    terms.push((t, 1.0));
                } else if i == k {
                    terms.push((t, -1.0));
                }
            }
            if !terms.is_empty() {
                model.add_constraint(format!("bal_{}", k + 1), &terms, Relation::Eq, 0.0);
            }
        }
    }

    let mut support_bounds = Vec::new();
    if cfg.support_cuts {
        for j in (0..n).filter(|&j| reactant[j]) {
            let candidates: Vec<usize> = (0..n).filter(|&i| allowed[j][i]).collect();
            if candidates.is_empty() {
                continue;
            }
            let (min, max) = column_support_bounds(&y, &m_img, j, &candidates, cfg);
            let terms: Vec<(VarId, f64)> = column_arcs(j)
                .filter(|&p| allowed[j][pairs[p].1])
                .map(|p| (actives[p], 1.0))
                .collect();
            if min > 1 {
                model.add_constraint(format!("smin_{}", j + 1), &terms, Relation::Ge, min as f64);
            }
            if max < candidates.len() {
                model.add_constraint(format!("smax_{}", j + 1), &terms, Relation::Le, max as f64);
            }
            support_bounds.push(SupportBound { complex: j, min, max });
        }
    }

    let objective: Vec<(VarId, f64)> = actives.iter().map(|&d| (d, 1.0)).collect();
    model.set_objective(&objective);

    let arcs = pairs
        .iter()
        .enumerate()
        .map(|(p, &(j, i))| ArcVars {
            from: j,
            to: i,
            weight: weights[p],
            active: actives[p],
            circulation: circulation[p],
            eliminated: !allowed[j][i],
        })
        .collect();
    Ok(ConjugacyModel {
        model,
        arcs,
        inverse_scaling,
        support_bounds,
        num_complexes: n,
    })
}

/// `A_k' = A_b diag(e)` with `e_j = prod_i c_i^{v_ji}` over the exponent row of reactant
/// complex `j` (kinetic orders or Hill exponents) and `e_j = 1` elsewhere.
///
/// For Hill kinetics this is the rate matrix of the form `k x^v / (D + (c x)^v)`; the
/// target file instead uses the standard form with rate `A_b` entries and dissociation
/// constants `D c^-v`, which is the same function.
pub fn reconstruct_laplacian(a_b: &DMatrix<f64>, c: &[f64], sys: &KineticSystem) -> Result<DMatrix<f64>> {
    let n = sys.network.num_complexes();
    if a_b.shape() != (n, n) || c.len() != sys.network.num_species() {
        return Err(CrnError::Dimension(format!(
            "expected a {n}x{n} matrix and {} scaling constants",
            sys.network.num_species()
        )));
    }
    let e = column_scaling(sys, c)?;
    Ok(a_b * DMatrix::from_diagonal(&nalgebra::DVector::from_vec(e)))
}

fn column_scaling(sys: &KineticSystem, c: &[f64]) -> Result<Vec<f64>> {
    if let Some(index) = c.iter().position(|v| !(*v > 0.0 && v.is_finite())) {
        return Err(CrnError::NonPositiveState { index, value: c[index] });
    }
    Ok(complex_exponents(sys)?
        .iter()
        .map(|row| match row {
            Some(v) => v.iter().zip(c).map(|(p, ci)| ci.powf(*p)).product(),
            None => 1.0,
        })
        .collect())
}

/// Target system whose arcs are the nonzero off-diagonal entries of `a_b`, carrying the
/// source kinetics of their reactant complexes.
pub fn realization_system(sys: &KineticSystem, a_b: &DMatrix<f64>, c: &[f64]) -> Result<KineticSystem> {
    let net = &sys.network;
    let n = net.num_complexes();
    let e = column_scaling(sys, c)?;
    let mut law_rows: Vec<Option<usize>> = vec![None; n];
    for y in net.reactant_complexes() {
        law_rows[y] = Some(net.reactions_from(y)[0]);
    }
    let mut specs = Vec::new();
    let mut rates = Vec::new();
    let mut exponents = Vec::new();
    let mut dissociation = Vec::new();
    for j in 0..n {
        for i in (0..n).filter(|&i| i != j && a_b[(i, j)] > 0.0) {
            let src = law_rows[j].ok_or_else(|| {
                CrnError::InvalidNetwork(format!("arc out of non-reactant complex {}", net.complex_label(j)))
            })?;
            specs.push(ReactionSpec::new(
                format!("R{}", specs.len() + 1),
                net.complexes()[j].clone(),
                net.complexes()[i].clone(),
            ));
            exponents.push(sys.kinetics.law.exponents(src).to_vec());
            match &sys.kinetics.law {
                RateLaw::PowerLaw { .. } => rates.push(a_b[(i, j)] * e[j]),
                RateLaw::Hill { exponents: v, dissociation: d } => {
                    rates.push(a_b[(i, j)]);
                    dissociation.push(
                        d[src]
                            .iter()
                            .zip(&v[src])
                            .zip(c)
                            .map(|((dk, vk), ck)| dk * ck.powf(-vk))
                            .collect(),
                    );
                }
            }
        }
    }
    let law = match sys.kinetics.law {
        RateLaw::PowerLaw { .. } => RateLaw::PowerLaw { orders: exponents },
        RateLaw::Hill { .. } => RateLaw::Hill { exponents, dissociation },
    };
    let target = ReactionNetwork::new(net.species().to_vec(), specs)?;
    KineticSystem::new(
        target,
        Kinetics {
            rate_constants: rates,
            law,
        },
    )
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SolveStats {
    pub variables: usize,
    pub binaries: usize,
    pub constraints: usize,
    pub eliminated_arcs: usize,
    pub support_bounds: Vec<SupportBound>,
    pub nodes: usize,
    pub seconds: f64,
}

#[derive(Clone, Debug)]
pub struct Realization {
    pub a_b: DMatrix<f64>,
    pub c: Vec<f64>,
    pub a_k: DMatrix<f64>,
    pub target: KineticSystem,
    /// Number of target reactions.
    pub objective: usize,
    /// `max |Y A_b - diag(c)^-1 Y A_k|` relative to the largest entry of `Y A_k`.
    pub constraint_residual: f64,
    /// Largest absolute column sum of `A_b`.
    pub kirchhoff_residual: f64,
    pub stats: SolveStats,
}

/// Builds and solves the realization program, then reconstructs the target system.
pub fn solve_conjugacy(sys: &KineticSystem, cfg: &MilpConfig) -> Result<Realization> {
    let start = Instant::now();
    let cm = build_milp(sys, cfg)?;
    let sol = match solve_milp(&cm.model) {
        Ok(sol) => sol,
        Err(crnlc_milp::MilpError::Infeasible) => return Err(CrnError::NoRealization),
        Err(e) => return Err(e.into()),
    };
    let n = cm.num_complexes;
    let mut a_b = DMatrix::zeros(n, n);
    for arc in &cm.arcs {
        if sol.value(arc.active) > 0.5 {
            a_b[(arc.to, arc.from)] = sol.value(arc.weight);
        }
    }
    for j in 0..n {
        let out: f64 = (0..n).filter(|&i| i != j).map(|i| a_b[(i, j)]).sum();
        a_b[(j, j)] = -out;
    }
    let c: Vec<f64> = cm.inverse_scaling.iter().map(|w| 1.0 / sol.value(*w)).collect();
    let a_k = reconstruct_laplacian(&a_b, &c, sys)?;
    let target = realization_system(sys, &a_b, &c)?;

    let y = sys.network.complex_matrix();
    let m_img = &y * sys.laplacian();
    let lhs = &y * &a_b;
    let scale = m_img.iter().fold(0.0_f64, |a, v| a.max(v.abs())).max(f64::MIN_POSITIVE);
    let mut constraint_residual = 0.0_f64;
    for s in 0..y.nrows() {
        for j in 0..n {
            constraint_residual = constraint_residual.max((lhs[(s, j)] - m_img[(s, j)] / c[s]).abs() / scale);
        }
    }
    let kirchhoff_residual = a_b.column_iter().map(|col| col.sum().abs()).fold(0.0, f64::max);

    Ok(Realization {
        objective: target.network.num_reactions(),
        a_b,
        c,
        a_k,
        target,
        constraint_residual,
        kirchhoff_residual,
        stats: SolveStats {
            variables: cm.model.variables.len(),
            binaries: cm.model.num_binaries(),
            constraints: cm.model.constraints.len(),
            eliminated_arcs: cm.num_eliminated(),
            support_bounds: cm.support_bounds.clone(),
            nodes: sol.nodes_explored,
            seconds: start.elapsed().as_secs_f64(),
        },
    })
}

#[derive(Clone, Debug, PartialEq)]
pub struct VerifyOptions {
    pub samples: usize,
    pub seed: u64,
    /// Start of the source trajectory; all ones when absent.
    pub x0: Option<Vec<f64>>,
    /// Skip the trajectory comparison when zero.
    pub t_end: f64,
    pub integrate: IntegrateOptions,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        VerifyOptions {
            samples: 100,
            seed: crate::kinetics::DEFAULT_SEED,
            x0: None,
            t_end: 50.0,
            integrate: IntegrateOptions::default(),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ConjugacyResiduals {
    /// `max_x ||f_a(x) - C f_b(C^-1 x)|| / max(1, ||f_a(x)||)` on sampled states.
    pub algebraic: f64,
    /// `max_t ||x_a(t) - C x_b(t)||` with `x_b(0) = C^-1 x_a(0)`, if integrated.
    pub trajectory: Option<f64>,
}

pub fn verify_linear_conjugacy(
    a: &KineticSystem,
    b: &KineticSystem,
    c: &[f64],
    opts: &VerifyOptions,
) -> Result<ConjugacyResiduals> {
    if a.species() != b.species() {
        return Err(CrnError::SpeciesMismatch);
    }
    let m = a.network.num_species();
    if c.len() != m {
        return Err(CrnError::Dimension(format!("{} conjugacy constants for {m} species", c.len())));
    }
    if let Some(index) = c.iter().position(|v| !(*v > 0.0 && v.is_finite())) {
        return Err(CrnError::NonPositiveState { index, value: c[index] });
    }
    let scale_down = |x: &[f64]| x.iter().zip(c).map(|(v, ci)| v / ci).collect::<Vec<f64>>();
    let mut algebraic = 0.0_f64;
    for x in sample_points(m, opts.samples, opts.seed) {
        let fa = a.species_formation_rate(&x)?;
        let fb = b.species_formation_rate(&scale_down(&x))?;
        let diff = (0..m).fold(0.0_f64, |acc, i| acc.max((fa[i] - c[i] * fb[i]).abs()));
        let norm = fa.iter().fold(1.0_f64, |acc, v| acc.max(v.abs()));
        algebraic = algebraic.max(diff / norm);
    }
    let trajectory = if opts.t_end > 0.0 {
        let x0 = opts.x0.clone().unwrap_or_else(|| vec![1.0; m]);
        let ta = integrate(a, &x0, opts.t_end, &opts.integrate)?;
        let tb = integrate(b, &scale_down(&x0), opts.t_end, &opts.integrate)?;
        Some(compare_trajectories(&ta, &tb, c)?)
    } else {
        None
    };
    Ok(ConjugacyResiduals { algebraic, trajectory })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::format::parse_system;

    fn reversible() -> KineticSystem {
        parse_system(
            "@species A B\n@kinetics powerlaw\n\
             @reaction R1: A -> B | k=2 | F: A=1\n\
             @reaction R2: B -> A | k=1 | F: B=1\n",
        )
        .unwrap()
    }

    #[test]
    fn rejects_bad_configuration() {
        let sys = reversible();
        let cfg = MilpConfig {
            epsilon: 25.0,
            ..MilpConfig::default()
        };
        assert!(matches!(build_milp(&sys, &cfg), Err(CrnError::Config(_))));
        let cfg = MilpConfig {
            epsilon: 0.5,
            upper: ArcBounds::Uniform(0.4),
            ..MilpConfig::default()
        };
        assert!(matches!(build_milp(&sys, &cfg), Err(CrnError::Config(_))));
    }

    #[test]
    fn rejects_nf_input() {
        let sys = parse_system(
            "@species A B C\n@kinetics powerlaw\n\
             @reaction R1: A -> B | k=1 | F: A=1\n\
             @reaction R2: A -> C | k=1 | F: A=2\n",
        )
        .unwrap();
        assert!(matches!(
            build_milp(&sys, &MilpConfig::default()),
            Err(CrnError::NotComplexFactorizable { .. })
        ));
    }

    #[test]
    fn model_dimensions() {
        let cm = build_milp(&reversible(), &MilpConfig::default()).unwrap();
        assert_eq!(cm.arcs.len(), 2);
        assert_eq!(cm.model.num_binaries(), 2);
        assert_eq!(cm.inverse_scaling.len(), 2);
    }

    #[test]
    fn reversible_pair_is_its_own_sparse_realization() {
        let sys = reversible();
        let r = solve_conjugacy(&sys, &MilpConfig::default()).unwrap();
        assert_eq!(r.objective, 2);
        assert!(r.constraint_residual < 1e-9);
        assert!(r.kirchhoff_residual < 1e-9);
        let res = verify_linear_conjugacy(&sys, &r.target, &r.c, &VerifyOptions { t_end: 5.0, ..Default::default() }).unwrap();
        assert!(res.algebraic < 1e-9, "{res:?}");
        assert!(res.trajectory.unwrap() < 1e-6);
    }

    #[test]
    fn unit_scaling_leaves_laplacian() {
        let sys = reversible();
        let a = sys.laplacian();
        assert_eq!(reconstruct_laplacian(&a, &[1.0, 1.0], &sys).unwrap(), a);
        let sq = parse_system("@species A B\n@kinetics powerlaw\n@reaction R1: 2*A -> B | k=1 | F: A=2\n").unwrap();
        let a = sq.laplacian();
        let ak = reconstruct_laplacian(&a, &[3.0, 5.0], &sq).unwrap();
        assert_eq!(ak[(1, 0)], 9.0);
    }

    #[test]
    fn identity_assignment_is_feasible() {
        let sys = reversible();
        let cm = build_milp(&sys, &MilpConfig::default()).unwrap();
        let values = cm.assignment(&sys.laplacian(), &[1.0, 1.0]);
        assert!(cm.violation(&values) < 1e-12);
    }
}
