//! Rate-constant/interaction decomposable kinetics: power-law and Hill-type.

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{CrnError, Result};
use crate::linalg::{from_columns, rank, rank_rows_normalized};
use crate::network::ReactionNetwork;

/// Default seed for the sampling oracles.
pub const DEFAULT_SEED: u64 = 42;

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum RateLaw {
    /// Kinetic orders, one row per reaction.
    PowerLaw { orders: Vec<Vec<f64>> },
    /// Hill exponents and dissociation constants, one row per reaction. Dissociation
    /// entries of species with a zero exponent are stored as 0.
    Hill {
        exponents: Vec<Vec<f64>>,
        dissociation: Vec<Vec<f64>>,
    },
}

impl RateLaw {
    pub fn is_hill(&self) -> bool {
        matches!(self, RateLaw::Hill { .. })
    }

    /// Exponent row: kinetic orders for power law, Hill exponents otherwise.
    pub fn exponents(&self, j: usize) -> &[f64] {
        match self {
            RateLaw::PowerLaw { orders } => &orders[j],
            RateLaw::Hill { exponents, .. } => &exponents[j],
        }
    }

    /// Interaction parameter row of reaction `j`.
    pub fn parameter_row(&self, j: usize) -> Vec<f64> {
        match self {
            RateLaw::PowerLaw { orders } => orders[j].clone(),
            RateLaw::Hill {
                exponents,
                dissociation,
            } => exponents[j]
                .iter()
                .chain(&dissociation[j])
                .copied()
                .collect(),
        }
    }

    fn num_rows(&self) -> usize {
        match self {
            RateLaw::PowerLaw { orders } => orders.len(),
            RateLaw::Hill { exponents, .. } => exponents.len(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Kinetics {
    pub rate_constants: Vec<f64>,
    pub law: RateLaw,
}

/// A network together with its kinetics.
#[derive(Clone, Debug, PartialEq)]
pub struct KineticSystem {
    pub network: ReactionNetwork,
    pub kinetics: Kinetics,
}

/// Tolerance for grouping interaction parameter rows; `exact()` compares bitwise.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct ParamTolerance(pub f64);

impl ParamTolerance {
    pub fn exact() -> Self {
        ParamTolerance(0.0)
    }

    fn rows_match(self, a: &[f64], b: &[f64]) -> bool {
        if self.0 == 0.0 {
            a == b
        } else {
            a.iter().zip(b).all(|(x, y)| (x - y).abs() <= self.0)
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum NodeClass {
    Cf,
    Nf,
    MaximallyNf,
}

/// CF-subsets of one reactant complex.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct NodePartition {
    pub complex: usize,
    /// Ordered by decreasing size, ties by smallest reaction index.
    pub subsets: Vec<Vec<usize>>,
}

impl NodePartition {
    pub fn class(&self) -> NodeClass {
        let total: usize = self.subsets.iter().map(Vec::len).sum();
        match self.subsets.len() {
            1 => NodeClass::Cf,
            k if k == total => NodeClass::MaximallyNf,
            _ => NodeClass::Nf,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CfPartition {
    pub nodes: Vec<NodePartition>,
}

impl CfPartition {
    /// Total number of CF-subsets.
    pub fn num_subsets(&self) -> usize {
        self.nodes.iter().map(|n| n.subsets.len()).sum()
    }

    pub fn nf_nodes(&self) -> Vec<&NodePartition> {
        self.nodes
            .iter()
            .filter(|n| n.class() != NodeClass::Cf)
            .collect()
    }

    pub fn is_complex_factorizable(&self) -> bool {
        self.num_subsets() == self.nodes.len()
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct TMatrices {
    /// Reactant complexes labelling the columns, in complex order.
    pub columns: Vec<usize>,
    pub t: DMatrix<f64>,
    pub t_hat: DMatrix<f64>,
    pub t_hat_rank: usize,
}

impl KineticSystem {
    pub fn new(network: ReactionNetwork, kinetics: Kinetics) -> Result<Self> {
        let r = network.num_reactions();
        let m = network.num_species();
        if kinetics.rate_constants.len() != r || kinetics.law.num_rows() != r {
            return Err(CrnError::Dimension(format!(
                "kinetics rows do not match the {r} reactions"
            )));
        }
        if let Some(k) = kinetics
            .rate_constants
            .iter()
            .find(|k| !(k.is_finite() && **k > 0.0))
        {
            return Err(CrnError::InvalidKinetics(format!(
                "rate constant {k} is not positive"
            )));
        }
        let mut kinetics = kinetics;
        match &mut kinetics.law {
            RateLaw::PowerLaw { orders } => {
                if orders.iter().any(|row| row.len() != m || row.iter().any(|v| !v.is_finite())) {
                    return Err(CrnError::InvalidKinetics("malformed kinetic order row".into()));
                }
            }
            RateLaw::Hill {
                exponents,
                dissociation,
            } => {
                if dissociation.len() != r {
                    return Err(CrnError::Dimension("dissociation rows".into()));
                }
                for (j, (v, d)) in exponents.iter().zip(dissociation.iter_mut()).enumerate() {
                    if v.len() != m || d.len() != m {
                        return Err(CrnError::Dimension(format!("Hill row {j}")));
                    }
                    for i in 0..m {
                        if !v[i].is_finite() {
                            return Err(CrnError::InvalidKinetics("non-finite Hill exponent".into()));
                        }
                        if v[i] == 0.0 {
                            d[i] = 0.0;
                        } else if !(d[i].is_finite() && d[i] > 0.0) {
                            return Err(CrnError::InvalidKinetics(format!(
                                "reaction {} needs a positive dissociation constant for {}",
                                network.reactions()[j].label,
                                network.species()[i]
                            )));
                        }
                    }
                }
            }
        }
        Ok(KineticSystem { network, kinetics })
    }

    pub fn species(&self) -> &[String] {
        self.network.species()
    }

    /// Interaction function of reaction `j` at a state assumed positive.
    pub(crate) fn interaction_at(&self, j: usize, x: &[f64]) -> f64 {
        match &self.kinetics.law {
            RateLaw::PowerLaw { orders } => orders[j]
                .iter()
                .zip(x)
                .filter(|(f, _)| **f != 0.0)
                .map(|(f, v)| v.powf(*f))
                .product(),
            RateLaw::Hill {
                exponents,
                dissociation,
            } => exponents[j]
                .iter()
                .zip(&dissociation[j])
                .zip(x)
                .filter(|((v, _), _)| **v != 0.0)
                .map(|((v, d), xi)| {
                    let p = xi.powf(*v);
                    p / (d + p)
                })
                .product(),
        }
    }

    pub fn interaction(&self, j: usize, x: &[f64]) -> Result<f64> {
        check_positive(x, self.network.num_species())?;
        Ok(self.interaction_at(j, x))
    }

    pub fn rate(&self, j: usize, x: &[f64]) -> Result<f64> {
        Ok(self.kinetics.rate_constants[j] * self.interaction(j, x)?)
    }

    /// Reaction-wise species formation rate at a state assumed positive.
    pub(crate) fn formation_rate_at(&self, x: &[f64]) -> Vec<f64> {
        let m = self.network.num_species();
        let mut f = vec![0.0; m];
        let complexes = self.network.complexes();
        for (j, r) in self.network.reactions().iter().enumerate() {
            let rate = self.kinetics.rate_constants[j] * self.interaction_at(j, x);
            let (y, z) = (complexes[r.reactant].coefficients(), complexes[r.product].coefficients());
            for i in 0..m {
                f[i] += rate * (z[i] - y[i]);
            }
        }
        f
    }

    /// `f(x) = sum_j rate_j(x) (y'_j - y_j)`.
    pub fn species_formation_rate(&self, x: &[f64]) -> Result<Vec<f64>> {
        check_positive(x, self.network.num_species())?;
        Ok(self.formation_rate_at(x))
    }

    pub fn parameter_row(&self, j: usize) -> Vec<f64> {
        self.kinetics.law.parameter_row(j)
    }

    pub fn cf_partition(&self) -> CfPartition {
        self.cf_partition_with(ParamTolerance::exact())
    }

    /// Groups each reactant complex's reactions by matching parameter rows. With a
    /// positive tolerance a reaction joins the first subset whose first member matches.
    pub fn cf_partition_with(&self, tol: ParamTolerance) -> CfPartition {
        let nodes = self
            .network
            .reactant_complexes()
            .into_iter()
            .map(|y| {
                let mut subsets: Vec<Vec<usize>> = Vec::new();
                for j in self.network.reactions_from(y) {
                    let row = self.parameter_row(j);
                    match subsets
                        .iter_mut()
                        .find(|s| tol.rows_match(&self.parameter_row(s[0]), &row))
                    {
                        Some(s) => s.push(j),
                        None => subsets.push(vec![j]),
                    }
                }
                subsets.sort_by(|a, b| b.len().cmp(&a.len()).then(a[0].cmp(&b[0])));
                NodePartition {
                    complex: y,
                    subsets,
                }
            })
            .collect();
        CfPartition { nodes }
    }

    pub fn is_complex_factorizable(&self) -> bool {
        self.cf_partition().is_complex_factorizable()
    }

    fn require_cf(&self) -> Result<CfPartition> {
        let p = self.cf_partition();
        if p.is_complex_factorizable() {
            Ok(p)
        } else {
            Err(CrnError::NotComplexFactorizable {
                cf_subsets: p.num_subsets(),
                reactants: p.nodes.len(),
            })
        }
    }

    /// Parameter row of each reactant complex (requires CF kinetics).
    pub fn complex_parameter_rows(&self) -> Result<Vec<(usize, Vec<f64>)>> {
        let p = self.require_cf()?;
        Ok(p.nodes
            .iter()
            .map(|n| (n.complex, self.parameter_row(n.subsets[0][0])))
            .collect())
    }

    pub fn t_matrices(&self) -> Result<TMatrices> {
        let rows = self.complex_parameter_rows()?;
        let p = rows.first().map_or(0, |(_, r)| r.len());
        let cols: Vec<Vec<f64>> = rows.iter().map(|(_, r)| r.clone()).collect();
        let t = from_columns(p, &cols);
        let linkage = self.network.graph_partitions().linkage_classes;
        let l = linkage.len();
        let mut t_hat = DMatrix::zeros(p + l, rows.len());
        t_hat.view_mut((0, 0), (p, rows.len())).copy_from(&t);
        for (k, class) in linkage.iter().enumerate() {
            for (c, (y, _)) in rows.iter().enumerate() {
                if class.contains(y) {
                    t_hat[(p + k, c)] = 1.0;
                }
            }
        }
        let t_hat_rank = rank(&t_hat);
        Ok(TMatrices {
            columns: rows.iter().map(|(y, _)| *y).collect(),
            t,
            t_hat,
            t_hat_rank,
        })
    }

    /// T-hat rank maximality: per linkage class the non-inflow T columns are independent
    /// and T-hat has full column rank.
    pub fn is_pl_tik(&self) -> Result<bool> {
        let tm = self.t_matrices()?;
        if tm.t_hat_rank != tm.columns.len() {
            return Ok(false);
        }
        let complexes = self.network.complexes();
        for class in self.network.graph_partitions().linkage_classes {
            let idx: Vec<usize> = tm
                .columns
                .iter()
                .enumerate()
                .filter(|(_, y)| class.contains(y) && !complexes[**y].is_zero())
                .map(|(c, _)| c)
                .collect();
            if idx.is_empty() {
                continue;
            }
            let sub = tm.t.select_columns(idx.iter());
            if rank(&sub) != idx.len() {
                return Ok(false);
            }
        }
        Ok(true)
    }

    /// Matrix of interaction values: one row per listed reaction representative, one
    /// column per sampled point.
    fn sampled_matrix(&self, representatives: &[usize], seed: u64) -> DMatrix<f64> {
        let points = sample_points(self.network.num_species(), representatives.len() + 8, seed);
        DMatrix::from_fn(representatives.len(), points.len(), |i, k| {
            self.interaction_at(representatives[i], &points[k])
        })
    }

    /// Power law: reactant complexes have pairwise distinct T columns. Hill: additionally
    /// the sampled factor map has full rank.
    pub fn is_factor_span_surjective(&self, seed: u64) -> Result<bool> {
        let rows = self.complex_parameter_rows()?;
        for a in 0..rows.len() {
            for b in a + 1..rows.len() {
                if rows[a].1 == rows[b].1 {
                    return Ok(false);
                }
            }
        }
        if !self.kinetics.law.is_hill() {
            return Ok(true);
        }
        let reps: Vec<usize> = rows
            .iter()
            .map(|(y, _)| self.network.reactions_from(*y)[0])
            .collect();
        Ok(rank_rows_normalized(&self.sampled_matrix(&reps, seed)) == reps.len())
    }

    /// The CF-subset interaction maps are linearly independent on sampled points.
    pub fn is_interaction_span_surjective(&self, seed: u64) -> bool {
        let reps: Vec<usize> = self
            .cf_partition()
            .nodes
            .iter()
            .flat_map(|n| n.subsets.iter().map(|s| s[0]))
            .collect();
        rank_rows_normalized(&self.sampled_matrix(&reps, seed)) == reps.len()
    }

    /// Laplacian `A_k`: entry (i, j) is the rate constant of reaction j -> i; columns sum to 0.
    /// Only meaningful for CF kinetics.
    pub fn laplacian(&self) -> DMatrix<f64> {
        let n = self.network.num_complexes();
        let mut a = DMatrix::zeros(n, n);
        for (j, r) in self.network.reactions().iter().enumerate() {
            let k = self.kinetics.rate_constants[j];
            a[(r.product, r.reactant)] += k;
            a[(r.reactant, r.reactant)] -= k;
        }
        a
    }

    /// Factor map: interaction of each complex's reactions, 1 at non-reactant complexes.
    pub fn factor_map(&self, x: &[f64]) -> Result<Vec<f64>> {
        check_positive(x, self.network.num_species())?;
        let rows = self.complex_parameter_rows()?;
        let mut psi = vec![1.0; self.network.num_complexes()];
        for (y, _) in rows {
            let j = self.network.reactions_from(y)[0];
            psi[y] = self.interaction_at(j, x);
        }
        Ok(psi)
    }

    /// `Y * A_k * psi(x)` for CF kinetics.
    pub fn formation_rate_factored(&self, x: &[f64]) -> Result<Vec<f64>> {
        let psi = nalgebra::DVector::from_vec(self.factor_map(x)?);
        let f = self.network.complex_matrix() * self.laplacian() * psi;
        Ok(f.iter().copied().collect())
    }
}

fn check_positive(x: &[f64], m: usize) -> Result<()> {
    if x.len() != m {
        return Err(CrnError::Dimension(format!(
            "state has {} entries, expected {m}",
            x.len()
        )));
    }
    match x.iter().position(|v| !(*v > 0.0) || !v.is_finite()) {
        Some(index) => Err(CrnError::NonPositiveState {
            index,
            value: x[index],
        }),
        None => Ok(()),
    }
}

/// Points drawn log-uniformly per coordinate from [0.1, 10].
pub fn sample_points(dim: usize, count: usize, seed: u64) -> Vec<Vec<f64>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| {
            (0..dim)
                .map(|_| 10f64.powf(rng.gen_range(-1.0..=1.0)))
                .collect()
        })
        .collect()
}
