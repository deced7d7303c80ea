//! Reaction network data model, structural matrices and graph analyses.

use std::fmt;

use nalgebra::DMatrix;
use petgraph::algo::tarjan_scc;
use petgraph::graph::{DiGraph, NodeIndex};
use petgraph::unionfind::UnionFind;
use serde::Serialize;

use crate::error::{CrnError, Result};
use crate::linalg::{from_columns, rank};

/// Stoichiometric coefficient vector over the species of a network.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Complex(Vec<f64>);

impl Complex {
    pub fn new(coefficients: Vec<f64>) -> Result<Self> {
        if let Some(v) = coefficients.iter().find(|v| !v.is_finite() || **v < 0.0) {
            return Err(CrnError::InvalidNetwork(format!(
                "complex coefficient {v} is not a non-negative real"
            )));
        }
        // Normalise -0.0 so that printing is stable.
        Ok(Complex(coefficients.into_iter().map(|v| v + 0.0).collect()))
    }

    pub fn zero(species: usize) -> Self {
        Complex(vec![0.0; species])
    }

    pub fn unit(species: usize, index: usize, coefficient: f64) -> Self {
        let mut v = vec![0.0; species];
        v[index] = coefficient;
        Complex(v)
    }

    pub fn coefficients(&self) -> &[f64] {
        &self.0
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(|v| *v == 0.0)
    }

    pub fn is_integral(&self) -> bool {
        self.0.iter().all(|v| v.fract() == 0.0)
    }

    pub fn scaled(&self, k: f64) -> Complex {
        Complex(self.0.iter().map(|v| v * k).collect())
    }

    pub fn plus(&self, other: &Complex) -> Complex {
        Complex(self.0.iter().zip(&other.0).map(|(a, b)| a + b).collect())
    }

    /// `Some(k)` when `self = k * base` for a positive integer `k`.
    pub fn multiple_of(&self, base: &Complex) -> Option<u32> {
        if base.is_zero() {
            return None;
        }
        let i = base.0.iter().position(|v| *v != 0.0)?;
        let k = self.0[i] / base.0[i];
        if k < 1.0 || k.fract() != 0.0 {
            return None;
        }
        (*self == base.scaled(k)).then_some(k as u32)
    }

    /// `0`, or `+`-separated `coeff*species` terms with unit coefficients omitted.
    pub fn display(&self, species: &[String]) -> String {
        if self.is_zero() {
            return "0".to_string();
        }
        self.0
            .iter()
            .zip(species)
            .filter(|(v, _)| **v != 0.0)
            .map(|(v, s)| {
                if *v == 1.0 {
                    s.clone()
                } else {
                    format!("{v}*{s}")
                }
            })
            .collect::<Vec<_>>()
            .join(" + ")
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Reaction {
    pub label: String,
    pub reactant: usize,
    pub product: usize,
}

/// A reaction given by its complexes, before complexes are pooled into a network.
#[derive(Clone, Debug, PartialEq)]
pub struct ReactionSpec {
    pub label: String,
    pub reactant: Complex,
    pub product: Complex,
}

impl ReactionSpec {
    pub fn new(label: impl Into<String>, reactant: Complex, product: Complex) -> Self {
        ReactionSpec {
            label: label.into(),
            reactant,
            product,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ReactionNetwork {
    species: Vec<String>,
    complexes: Vec<Complex>,
    reactions: Vec<Reaction>,
}

impl ReactionNetwork {
    /// Builds a network; complexes are numbered by first appearance (reactant before product).
    pub fn new(species: Vec<String>, specs: Vec<ReactionSpec>) -> Result<Self> {
        let m = species.len();
        if m == 0 {
            return Err(CrnError::InvalidNetwork("no species declared".into()));
        }
        for (i, s) in species.iter().enumerate() {
            if species[..i].contains(s) {
                return Err(CrnError::InvalidNetwork(format!("species {s} declared twice")));
            }
        }
        if specs.is_empty() {
            return Err(CrnError::InvalidNetwork("no reactions".into()));
        }
        let mut complexes: Vec<Complex> = Vec::new();
        let mut intern = |c: Complex| -> usize {
            match complexes.iter().position(|x| *x == c) {
                Some(i) => i,
                None => {
                    complexes.push(c);
                    complexes.len() - 1
                }
            }
        };
        let mut reactions: Vec<Reaction> = Vec::with_capacity(specs.len());
        for spec in specs {
            if spec.reactant.0.len() != m || spec.product.0.len() != m {
                return Err(CrnError::Dimension(format!(
                    "reaction {} has complexes of the wrong length",
                    spec.label
                )));
            }
            if spec.reactant == spec.product {
                return Err(CrnError::InvalidNetwork(format!(
                    "reaction {} is a self-loop",
                    spec.label
                )));
            }
            let reactant = intern(spec.reactant);
            let product = intern(spec.product);
            if let Some(prev) = reactions
                .iter()
                .find(|r| r.reactant == reactant && r.product == product)
            {
                return Err(CrnError::InvalidNetwork(format!(
                    "reactions {} and {} connect the same complexes",
                    prev.label, spec.label
                )));
            }
            if reactions.iter().any(|r| r.label == spec.label) {
                return Err(CrnError::InvalidNetwork(format!(
                    "reaction label {} used twice",
                    spec.label
                )));
            }
            reactions.push(Reaction {
                label: spec.label,
                reactant,
                product,
            });
        }
        for (s, name) in species.iter().enumerate() {
            if complexes.iter().all(|c| c.0[s] == 0.0) {
                return Err(CrnError::InvalidNetwork(format!(
                    "species {name} does not occur in any complex"
                )));
            }
        }
        Ok(ReactionNetwork {
            species,
            complexes,
            reactions,
        })
    }

    pub fn species(&self) -> &[String] {
        &self.species
    }

    pub fn complexes(&self) -> &[Complex] {
        &self.complexes
    }

    pub fn reactions(&self) -> &[Reaction] {
        &self.reactions
    }

    pub fn num_species(&self) -> usize {
        self.species.len()
    }

    pub fn num_complexes(&self) -> usize {
        self.complexes.len()
    }

    pub fn num_reactions(&self) -> usize {
        self.reactions.len()
    }

    pub fn complex_label(&self, i: usize) -> String {
        self.complexes[i].display(&self.species)
    }

    pub fn reaction_label(&self, j: usize) -> String {
        let r = &self.reactions[j];
        format!(
            "{} -> {}",
            self.complex_label(r.reactant),
            self.complex_label(r.product)
        )
    }

    /// The reactions as complex-level specs, in order.
    pub fn specs(&self) -> Vec<ReactionSpec> {
        self.reactions
            .iter()
            .map(|r| {
                ReactionSpec::new(
                    r.label.clone(),
                    self.complexes[r.reactant].clone(),
                    self.complexes[r.product].clone(),
                )
            })
            .collect()
    }

    /// Distinct reactant complexes in complex order.
    pub fn reactant_complexes(&self) -> Vec<usize> {
        let mut is_reactant = vec![false; self.complexes.len()];
        for r in &self.reactions {
            is_reactant[r.reactant] = true;
        }
        (0..self.complexes.len()).filter(|&i| is_reactant[i]).collect()
    }

    /// Reaction indices leaving complex `i`, in reaction order.
    pub fn reactions_from(&self, i: usize) -> Vec<usize> {
        (0..self.reactions.len())
            .filter(|&j| self.reactions[j].reactant == i)
            .collect()
    }

    pub fn reaction_vector(&self, j: usize) -> Vec<f64> {
        let r = &self.reactions[j];
        self.complexes[r.product]
            .0
            .iter()
            .zip(&self.complexes[r.reactant].0)
            .map(|(p, q)| p - q)
            .collect()
    }

    /// `Y`: species by complexes.
    pub fn complex_matrix(&self) -> DMatrix<f64> {
        let cols: Vec<Vec<f64>> = self.complexes.iter().map(|c| c.0.clone()).collect();
        from_columns(self.num_species(), &cols)
    }

    /// `Ia`: complexes by reactions, -1 at the reactant and +1 at the product.
    pub fn incidence_matrix(&self) -> DMatrix<f64> {
        let mut ia = DMatrix::zeros(self.num_complexes(), self.num_reactions());
        for (j, r) in self.reactions.iter().enumerate() {
            ia[(r.reactant, j)] = -1.0;
            ia[(r.product, j)] = 1.0;
        }
        ia
    }

    /// `N`: species by reactions, column `j` is the reaction vector.
    pub fn stoichiometric_matrix(&self) -> DMatrix<f64> {
        let cols: Vec<Vec<f64>> = (0..self.num_reactions())
            .map(|j| self.reaction_vector(j))
            .collect();
        from_columns(self.num_species(), &cols)
    }

    fn digraph(&self) -> DiGraph<(), ()> {
        let mut g = DiGraph::with_capacity(self.num_complexes(), self.num_reactions());
        for _ in 0..self.num_complexes() {
            g.add_node(());
        }
        for r in &self.reactions {
            g.add_edge(NodeIndex::new(r.reactant), NodeIndex::new(r.product), ());
        }
        g
    }

    pub fn graph_partitions(&self) -> GraphPartitions {
        let n = self.num_complexes();
        let mut uf = UnionFind::<usize>::new(n);
        for r in &self.reactions {
            uf.union(r.reactant, r.product);
        }
        let labels = uf.into_labeling();
        let mut linkage: Vec<Vec<usize>> = Vec::new();
        let mut root_slot: Vec<Option<usize>> = vec![None; n];
        for i in 0..n {
            let root = labels[i];
            match root_slot[root] {
                Some(k) => linkage[k].push(i),
                None => {
                    root_slot[root] = Some(linkage.len());
                    linkage.push(vec![i]);
                }
            }
        }

        let mut strong: Vec<Vec<usize>> = tarjan_scc(&self.digraph())
            .into_iter()
            .map(|c| {
                let mut v: Vec<usize> = c.into_iter().map(|x| x.index()).collect();
                v.sort_unstable();
                v
            })
            .collect();
        strong.sort_by_key(|c| c[0]);

        let mut class_of = vec![0; n];
        for (k, c) in strong.iter().enumerate() {
            for &i in c {
                class_of[i] = k;
            }
        }
        let mut leaves = vec![false; strong.len()];
        for r in &self.reactions {
            if class_of[r.reactant] != class_of[r.product] {
                leaves[class_of[r.reactant]] = true;
            }
        }
        let terminal: Vec<Vec<usize>> = strong
            .iter()
            .enumerate()
            .filter(|(k, _)| !leaves[*k])
            .map(|(_, c)| c.clone())
            .collect();
        GraphPartitions {
            linkage_classes: linkage,
            strong_linkage_classes: strong,
            terminal_classes: terminal,
        }
    }

    pub fn numbers(&self) -> NetworkNumbers {
        let parts = self.graph_partitions();
        let reactants = self.reactant_complexes();
        let n = self.num_complexes();
        let terminal_points = parts
            .terminal_classes
            .iter()
            .filter(|c| c.len() == 1)
            .count();
        let t = parts.terminal_classes.len();
        let s = rank(&self.stoichiometric_matrix());
        let reactant_cols: Vec<Vec<f64>> = reactants
            .iter()
            .map(|&i| self.complexes[i].0.clone())
            .collect();
        let q = rank(&from_columns(self.num_species(), &reactant_cols));
        let l = parts.linkage_classes.len();
        NetworkNumbers {
            species: self.num_species(),
            complexes: n,
            reactions: self.num_reactions(),
            reactant_complexes: reactants.len(),
            linkage_classes: l,
            strong_linkage_classes: parts.strong_linkage_classes.len(),
            terminal_classes: t,
            terminal_points,
            terminal_cycles: t - terminal_points,
            rank: s,
            reactant_rank: q,
            deficiency: n as i64 - l as i64 - s as i64,
            reactant_deficiency: reactants.len() as i64 - q as i64,
        }
    }

    pub fn structure_flags(&self) -> StructureFlags {
        let parts = self.graph_partitions();
        let nums = self.numbers();
        StructureFlags {
            weakly_reversible: parts.linkage_classes.len() == parts.strong_linkage_classes.len(),
            t_minimal: nums.terminal_classes == nums.linkage_classes,
            point_terminal: nums.terminal_cycles == 0,
            sufficient_reactant_diversity: nums.reactant_complexes >= nums.rank,
            deficiency_bounded_terminality: (nums.terminal_classes as i64
                - nums.linkage_classes as i64)
                <= nums.deficiency,
        }
    }

    /// True when every complex coefficient is an integer.
    pub fn has_integral_complexes(&self) -> bool {
        self.complexes.iter().all(Complex::is_integral)
    }
}

impl fmt::Display for ReactionNetwork {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (j, r) in self.reactions.iter().enumerate() {
            writeln!(f, "{}: {}", r.label, self.reaction_label(j))?;
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct GraphPartitions {
    pub linkage_classes: Vec<Vec<usize>>,
    pub strong_linkage_classes: Vec<Vec<usize>>,
    pub terminal_classes: Vec<Vec<usize>>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct NetworkNumbers {
    pub species: usize,
    pub complexes: usize,
    pub reactions: usize,
    pub reactant_complexes: usize,
    pub linkage_classes: usize,
    pub strong_linkage_classes: usize,
    pub terminal_classes: usize,
    pub terminal_points: usize,
    pub terminal_cycles: usize,
    pub rank: usize,
    pub reactant_rank: usize,
    pub deficiency: i64,
    pub reactant_deficiency: i64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct StructureFlags {
    pub weakly_reversible: bool,
    pub t_minimal: bool,
    pub point_terminal: bool,
    pub sufficient_reactant_diversity: bool,
    pub deficiency_bounded_terminality: bool,
}
