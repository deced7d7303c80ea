//! Complex factorization by reactant multiples (CF-RM) and related analyses.
//!
//! An NF node `y` keeps its largest CF-subset. Every other subset is moved onto a fresh
//! multiple of `y`: `y -> z` becomes `(m+1) y -> z + m y`, which leaves the reaction vector
//! and the kinetics untouched, so the transformed system has the same vector field.

use petgraph::unionfind::UnionFind;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{CrnError, Result};
use crate::kinetics::{sample_points, KineticSystem, Kinetics, RateLaw};
use crate::network::{Complex, NetworkNumbers, ReactionNetwork, ReactionSpec};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Variant {
    /// New reactants avoid the current reactant complexes.
    Generic,
    /// New reactants and their products avoid every current complex.
    Plus,
}

/// Reactions kept in place (`mcf`) and the CF-subsets that get moved.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CfmDecomposition {
    pub mcf: Vec<usize>,
    pub moved: Vec<Vec<usize>>,
}

impl CfmDecomposition {
    pub fn r_mcf(&self) -> usize {
        self.mcf.len()
    }
}

pub fn cfm_decomposition(sys: &KineticSystem) -> CfmDecomposition {
    let mut mcf = Vec::new();
    let mut moved = Vec::new();
    for node in sys.cf_partition().nodes {
        let mut subsets = node.subsets.into_iter();
        if let Some(first) = subsets.next() {
            mcf.extend(first);
        }
        moved.extend(subsets);
    }
    mcf.sort_unstable();
    CfmDecomposition { mcf, moved }
}

/// A fresh reactant complex created for one moved CF-subset.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct NewReactant {
    /// Complex index of the NF node in the source network.
    pub node: usize,
    pub multiplier: u32,
    pub complex: String,
    pub reactions: Vec<String>,
    /// The node is the zero complex, so a multiple of it cannot work; the subset was
    /// moved onto `multiplier` units of the first species instead.
    pub zero_complex_fallback: bool,
}

#[derive(Clone, Debug)]
pub struct TransformResult {
    pub target: KineticSystem,
    pub variant: Variant,
    /// Indices of rewritten reactions; positions and labels are shared by source and target.
    pub changed: Vec<usize>,
    /// Source label to target label (identity on labels).
    pub reaction_map: Vec<(String, String)>,
    pub new_reactants: Vec<NewReactant>,
}

impl TransformResult {
    pub fn is_identity(&self) -> bool {
        self.changed.is_empty()
    }
}

pub fn cf_rm(sys: &KineticSystem, variant: Variant) -> TransformResult {
    let net = &sys.network;
    let m = net.num_species();
    let mut specs = net.specs();
    let mut complexes: Vec<Complex> = net.complexes().to_vec();
    let mut reactants: Vec<Complex> = net
        .reactant_complexes()
        .into_iter()
        .map(|i| complexes[i].clone())
        .collect();
    let mut changed = Vec::new();
    let mut new_reactants = Vec::new();

    for node in sys.cf_partition().nodes {
        if node.subsets.len() < 2 {
            continue;
        }
        let y = net.complexes()[node.complex].clone();
        let zero = y.is_zero();
        let base = if zero { Complex::unit(m, 0, 1.0) } else { y.clone() };
        // Largest multiple of the node already used as a reactant.
        let existing = if zero {
            0
        } else {
            reactants
                .iter()
                .filter_map(|c| c.multiple_of(&y))
                .max()
                .unwrap_or(1)
        };
        let mut prev: Option<u32> = None;
        for (i, subset) in node.subsets.iter().enumerate().skip(1) {
            let start = if zero { i as u32 } else { existing + i as u32 - 1 };
            let mut mult = prev.map_or(start, |p| start.max(p + 1));
            loop {
                let reactant = if zero {
                    base.scaled(mult as f64)
                } else {
                    base.scaled((mult + 1) as f64)
                };
                let shift = base.scaled(mult as f64);
                let free = match variant {
                    Variant::Generic => !reactants.contains(&reactant),
                    Variant::Plus => {
                        !complexes.contains(&reactant)
                            && subset.iter().all(|&j| {
                                !complexes.contains(&specs[j].product.plus(&shift))
                            })
                    }
                };
                if free {
                    break;
                }
                mult += 1;
            }
            prev = Some(mult);
            let shift = base.scaled(mult as f64);
            let reactant = if zero {
                shift.clone()
            } else {
                base.scaled((mult + 1) as f64)
            };
            for &j in subset {
                let product = specs[j].product.plus(&shift);
                if !complexes.contains(&product) {
                    complexes.push(product.clone());
                }
                specs[j].reactant = reactant.clone();
                specs[j].product = product;
                changed.push(j);
            }
            if !complexes.contains(&reactant) {
                complexes.push(reactant.clone());
            }
            reactants.push(reactant.clone());
            new_reactants.push(NewReactant {
                node: node.complex,
                multiplier: mult,
                complex: reactant.display(net.species()),
                reactions: subset.iter().map(|&j| net.reaction_label(j)).collect(),
                zero_complex_fallback: zero,
            });
        }
    }
    changed.sort_unstable();

    let target_net = ReactionNetwork::new(net.species().to_vec(), specs)
        .expect("reactant multiples preserve network validity");
    let target = KineticSystem::new(target_net, sys.kinetics.clone())
        .expect("kinetics carried over unchanged");
    let reaction_map = net
        .reactions()
        .iter()
        .map(|r| (r.label.clone(), r.label.clone()))
        .collect();
    TransformResult {
        target,
        variant,
        changed,
        reaction_map,
        new_reactants,
    }
}

/// Source complexes that no longer occur in the target (a product reached only through
/// moved reactions disappears).
pub fn lost_complexes(source: &KineticSystem, result: &TransformResult) -> usize {
    let target = result.target.network.complexes();
    source
        .network
        .complexes()
        .iter()
        .filter(|c| !target.contains(c))
        .count()
}

/// Linkage classes created by link breaking: components of the source graph without the
/// moved reactions, over the source complexes still present, in excess of `l`.
pub fn link_breaks(source: &KineticSystem, result: &TransformResult) -> i64 {
    let net = &source.network;
    let target = result.target.network.complexes();
    let present: Vec<bool> = net.complexes().iter().map(|c| target.contains(c)).collect();
    let mut uf = UnionFind::<usize>::new(net.num_complexes());
    for (j, r) in net.reactions().iter().enumerate() {
        if result.changed.binary_search(&j).is_err() {
            uf.union(r.reactant, r.product);
        }
    }
    let mut roots: Vec<usize> = (0..net.num_complexes())
        .filter(|&i| present[i])
        .map(|i| uf.find(i))
        .collect();
    roots.sort_unstable();
    roots.dedup();
    roots.len() as i64 - net.graph_partitions().linkage_classes.len() as i64
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Predicted {
    Exact(i64),
    AtLeast(i64),
    AtMost(i64),
    Undetermined,
}

impl Predicted {
    /// `None` when nothing is predicted.
    pub fn admits(self, v: i64) -> Option<bool> {
        match self {
            Predicted::Exact(p) => Some(v == p),
            Predicted::AtLeast(p) => Some(v >= p),
            Predicted::AtMost(p) => Some(v <= p),
            Predicted::Undetermined => None,
        }
    }
}

/// Network numbers of a CF-RM transform as far as they follow from the source.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PredictedNumbers {
    pub variant: Variant,
    pub species: Predicted,
    pub complexes: Predicted,
    pub reactant_complexes: Predicted,
    pub cf_subsets: Predicted,
    pub reactions: Predicted,
    /// `l* - l*_b`, the linkage classes not due to link breaking.
    pub unbroken_linkage_classes: Predicted,
    pub terminal_classes: Predicted,
    pub terminal_points: Predicted,
    pub terminal_cycles: Predicted,
    pub rank: Predicted,
    pub reactant_rank: Predicted,
    pub deficiency: Predicted,
    pub reactant_deficiency: Predicted,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RelationCheck {
    pub quantity: &'static str,
    pub predicted: Predicted,
    pub actual: i64,
    pub holds: Option<bool>,
}

impl PredictedNumbers {
    pub fn check(&self, actual: &NetworkNumbers, cf_subsets: usize, link_breaks: i64) -> Vec<RelationCheck> {
        let rows: [(&'static str, Predicted, i64); 13] = [
            ("species", self.species, actual.species as i64),
            ("complexes", self.complexes, actual.complexes as i64),
            ("reactant_complexes", self.reactant_complexes, actual.reactant_complexes as i64),
            ("cf_subsets", self.cf_subsets, cf_subsets as i64),
            ("reactions", self.reactions, actual.reactions as i64),
            (
                "unbroken_linkage_classes",
                self.unbroken_linkage_classes,
                actual.linkage_classes as i64 - link_breaks,
            ),
            ("terminal_classes", self.terminal_classes, actual.terminal_classes as i64),
            ("terminal_points", self.terminal_points, actual.terminal_points as i64),
            ("terminal_cycles", self.terminal_cycles, actual.terminal_cycles as i64),
            ("rank", self.rank, actual.rank as i64),
            ("reactant_rank", self.reactant_rank, actual.reactant_rank as i64),
            ("deficiency", self.deficiency, actual.deficiency),
            ("reactant_deficiency", self.reactant_deficiency, actual.reactant_deficiency),
        ];
        rows.into_iter()
            .map(|(quantity, predicted, actual)| RelationCheck {
                quantity,
                predicted,
                actual,
                holds: predicted.admits(actual),
            })
            .collect()
    }
}

pub fn predict_numbers(sys: &KineticSystem, variant: Variant) -> PredictedNumbers {
    let nn = sys.network.numbers();
    let cf_subsets = sys.cf_partition().num_subsets() as i64;
    let n_r = nn.reactant_complexes as i64;
    let extra_reactants = cf_subsets - n_r;
    let moved = (nn.reactions - cfm_decomposition(sys).r_mcf()) as i64;
    let i = |v: usize| v as i64;
    let plus = variant == Variant::Plus;
    let when_plus = |p: Predicted| if plus { p } else { Predicted::Undetermined };
    PredictedNumbers {
        variant,
        species: Predicted::Exact(i(nn.species)),
        complexes: when_plus(Predicted::Exact(i(nn.complexes) + extra_reactants + moved)),
        reactant_complexes: Predicted::Exact(cf_subsets),
        cf_subsets: Predicted::Exact(cf_subsets),
        reactions: Predicted::Exact(i(nn.reactions)),
        unbroken_linkage_classes: Predicted::AtMost(extra_reactants + i(nn.linkage_classes)),
        terminal_classes: when_plus(Predicted::AtMost(i(nn.terminal_classes) + moved)),
        terminal_points: when_plus(Predicted::Exact(i(nn.terminal_points) + moved)),
        terminal_cycles: when_plus(Predicted::AtMost(i(nn.terminal_cycles))),
        rank: Predicted::Exact(i(nn.rank)),
        reactant_rank: Predicted::Exact(i(nn.reactant_rank)),
        deficiency: when_plus(Predicted::AtLeast(nn.deficiency)),
        reactant_deficiency: Predicted::Exact(nn.reactant_deficiency + extra_reactants),
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct EquivalenceCheck {
    pub max_residual: f64,
    pub pass: bool,
}

/// Relative residual accepted as dynamic equivalence.
pub const EQUIVALENCE_TOL: f64 = 1e-10;

/// Compares the species formation rates of two systems on sampled positive states.
pub fn verify_dynamic_equivalence(
    a: &KineticSystem,
    b: &KineticSystem,
    samples: usize,
    seed: u64,
) -> Result<EquivalenceCheck> {
    if a.species() != b.species() {
        return Err(CrnError::SpeciesMismatch);
    }
    let mut worst = 0.0_f64;
    for x in sample_points(a.network.num_species(), samples, seed) {
        let fa = a.species_formation_rate(&x)?;
        let fb = b.species_formation_rate(&x)?;
        let diff = fa.iter().zip(&fb).fold(0.0_f64, |m, (p, q)| m.max((p - q).abs()));
        let scale = fa.iter().fold(1.0_f64, |m, v| m.max(v.abs()));
        worst = worst.max(diff / scale);
    }
    Ok(EquivalenceCheck {
        max_residual: worst,
        pass: worst < EQUIVALENCE_TOL,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SubspaceClaim {
    /// Kinetic and stoichiometric subspaces differ.
    Differ,
    Coincide,
    RateConstantDependent,
    Inconclusive,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct KsscConditions {
    pub complex_factorizable: bool,
    pub cf_subsets: usize,
    pub reactant_complexes: usize,
    pub rank: usize,
    pub reactions: usize,
    pub r_mcf: usize,
    pub interaction_span_surjective: bool,
    pub t_minimal: bool,
    pub deficiency_bounded_terminality: bool,
    pub point_terminal: bool,
    pub terminality_excess: i64,
    pub deficiency: i64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct KsscReport {
    /// Case number of the applicable subspace coincidence criterion, if any.
    pub case: Option<u8>,
    pub claim: SubspaceClaim,
    pub conditions: KsscConditions,
}

/// Classifies whether the kinetic subspace coincides with the stoichiometric subspace.
///
/// CF systems use `t - l` against the deficiency; NF systems use the CF-subset count and
/// interaction span surjectivity.
pub fn kssc_classify(sys: &KineticSystem, seed: u64) -> KsscReport {
    let nn = sys.network.numbers();
    let flags = sys.network.structure_flags();
    let partition = sys.cf_partition();
    let conditions = KsscConditions {
        complex_factorizable: partition.is_complex_factorizable(),
        cf_subsets: partition.num_subsets(),
        reactant_complexes: nn.reactant_complexes,
        rank: nn.rank,
        reactions: nn.reactions,
        r_mcf: cfm_decomposition(sys).r_mcf(),
        interaction_span_surjective: sys.is_interaction_span_surjective(seed),
        t_minimal: flags.t_minimal,
        deficiency_bounded_terminality: flags.deficiency_bounded_terminality,
        point_terminal: flags.point_terminal,
        terminality_excess: nn.terminal_classes as i64 - nn.linkage_classes as i64,
        deficiency: nn.deficiency,
    };
    let c = &conditions;
    let (case, claim) = if c.complex_factorizable {
        let excess = c.terminality_excess;
        if excess > c.deficiency {
            (Some(1), SubspaceClaim::Differ)
        } else if excess == 0 {
            (Some(2), SubspaceClaim::Coincide)
        } else if excess < c.deficiency {
            (Some(3), SubspaceClaim::RateConstantDependent)
        } else {
            // t - l = deficiency: the answer hinges on positive steady states.
            (None, SubspaceClaim::Inconclusive)
        }
    } else if c.cf_subsets < c.rank {
        (Some(1), SubspaceClaim::Differ)
    } else if c.interaction_span_surjective
        && c.t_minimal
        && c.reactions - c.r_mcf == c.cf_subsets - c.reactant_complexes
    {
        (Some(2), SubspaceClaim::Coincide)
    } else if c.interaction_span_surjective && c.deficiency_bounded_terminality && c.point_terminal {
        (Some(3), SubspaceClaim::RateConstantDependent)
    } else {
        (None, SubspaceClaim::Inconclusive)
    };
    KsscReport {
        case,
        claim,
        conditions,
    }
}

fn monomial(m: usize, terms: &[(usize, f64)]) -> Complex {
    let mut v = vec![0.0; m];
    for &(i, c) in terms {
        v[i] += c;
    }
    Complex::new(v).expect("non-negative coefficients")
}

/// Two-species family in which the generic transform lowers the deficiency by `d - 1`.
///
/// `X1` is an NF node with subsets `{R1..Rd}` (order 1) and `{R(d+1)..R(2d-1)}` (order 2);
/// moving the second subset onto `2 X1` breaks the chains `(2i-1) X1 + X2 -> X1 + (2i-1) X2`
/// off into their own linkage classes.
pub fn generate_nd_family(d: usize) -> Result<KineticSystem> {
    if d < 2 {
        return Err(CrnError::Config(format!("family parameter must be at least 2, got {d}")));
    }
    let x = |a: f64, b: f64| monomial(2, &[(0, a), (1, b)]);
    let mut specs = vec![ReactionSpec::new("R1", x(1.0, 0.0), x(2.0, 0.0))];
    let mut orders = vec![vec![1.0, 0.0]];
    for i in 2..=d {
        specs.push(ReactionSpec::new(format!("R{i}"), x(1.0, 0.0), x(2.0 * i as f64, 1.0)));
        orders.push(vec![1.0, 0.0]);
    }
    for i in 2..=d {
        let k = (2 * i - 1) as f64;
        specs.push(ReactionSpec::new(format!("R{}", d + i - 1), x(1.0, 0.0), x(k, 1.0)));
        orders.push(vec![2.0, 0.0]);
    }
    for i in 2..=d {
        let k = (2 * i - 1) as f64;
        specs.push(ReactionSpec::new(format!("R{}", 2 * d + i - 2), x(k, 1.0), x(1.0, k)));
        orders.push(vec![k, 1.0]);
    }
    let r = specs.len();
    let net = ReactionNetwork::new(vec!["X1".into(), "X2".into()], specs)?;
    KineticSystem::new(
        net,
        Kinetics {
            rate_constants: vec![1.0; r],
            law: RateLaw::PowerLaw { orders },
        },
    )
}

const ORDER_VALUES: [f64; 5] = [0.36, 0.5, 1.0, 2.0, 9.4];

/// Random power-law system with at least one NF node: 2 to 6 species, at most 12
/// reactions between mono- and bimolecular complexes.
pub fn random_nf_system(seed: u64) -> KineticSystem {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    loop {
        if let Some(sys) = try_random_nf_system(&mut rng) {
            return sys;
        }
    }
}

fn try_random_nf_system(rng: &mut ChaCha8Rng) -> Option<KineticSystem> {
    let m = rng.gen_range(2..=6);
    let mut pool = Vec::new();
    for i in 0..m {
        pool.push(monomial(m, &[(i, 1.0)]));
        pool.push(monomial(m, &[(i, 2.0)]));
        for j in i + 1..m {
            pool.push(monomial(m, &[(i, 1.0), (j, 1.0)]));
        }
    }
    let r_target = rng.gen_range(3..=12);
    let nodes = rng.gen_range(1..=r_target.min(5));
    let node_complexes: Vec<Complex> = pool.choose_multiple(rng, nodes).cloned().collect();
    // Each node draws its kinetic order rows from a small palette so that subsets repeat.
    let palettes: Vec<Vec<Vec<f64>>> = (0..nodes)
        .map(|_| {
            let size = rng.gen_range(1..=3);
            (0..size)
                .map(|_| {
                    let mut row = vec![0.0; m];
                    for _ in 0..rng.gen_range(1..=2) {
                        row[rng.gen_range(0..m)] = *ORDER_VALUES.choose(rng).unwrap();
                    }
                    row
                })
                .collect()
        })
        .collect();

    let mut specs: Vec<ReactionSpec> = Vec::new();
    let mut orders = Vec::new();
    let mut rates = Vec::new();
    for _ in 0..r_target * 3 {
        if specs.len() == r_target {
            break;
        }
        let k = rng.gen_range(0..nodes);
        let reactant = node_complexes[k].clone();
        let product = pool.choose(rng).unwrap().clone();
        if product == reactant
            || specs
                .iter()
                .any(|s| s.reactant == reactant && s.product == product)
        {
            continue;
        }
        specs.push(ReactionSpec::new(format!("R{}", specs.len() + 1), reactant, product));
        orders.push(palettes[k].choose(rng).unwrap().clone());
        rates.push(rng.gen_range(0.1..10.0));
    }

    // Drop species that no complex uses.
    let used: Vec<usize> = (0..m)
        .filter(|&i| {
            specs
                .iter()
                .any(|s| s.reactant.coefficients()[i] > 0.0 || s.product.coefficients()[i] > 0.0)
        })
        .collect();
    let project = |v: &[f64]| used.iter().map(|&i| v[i]).collect::<Vec<f64>>();
    let specs: Vec<ReactionSpec> = specs
        .into_iter()
        .map(|s| {
            ReactionSpec::new(
                s.label,
                Complex::new(project(s.reactant.coefficients())).unwrap(),
                Complex::new(project(s.product.coefficients())).unwrap(),
            )
        })
        .collect();
    let orders = orders.iter().map(|row| project(row)).collect();
    let species = used.iter().map(|i| format!("X{}", i + 1)).collect();
    let net = ReactionNetwork::new(species, specs).ok()?;
    let sys = KineticSystem::new(
        net,
        Kinetics {
            rate_constants: rates,
            law: RateLaw::PowerLaw { orders },
        },
    )
    .ok()?;
    (!sys.is_complex_factorizable()).then_some(sys)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::format::parse_system;

    fn sys(text: &str) -> KineticSystem {
        parse_system(text).unwrap()
    }

    const BRANCH: &str = "@species A B C\n@kinetics powerlaw\n\
        @reaction R1: A -> B | k=1 | F: A=1\n\
        @reaction R2: A -> C | k=2 | F: A=2\n\
        @reaction R3: B -> A | k=1 | F: B=1\n";

    #[test]
    fn moves_the_smaller_subset_to_a_multiple() {
        let s = sys(BRANCH);
        let res = cf_rm(&s, Variant::Generic);
        assert_eq!(res.changed, vec![1]);
        let t = &res.target;
        let r2 = &t.network.reactions()[1];
        assert_eq!(t.network.complex_label(r2.reactant), "2*A");
        assert_eq!(t.network.complex_label(r2.product), "A + C");
        assert!(t.is_complex_factorizable());
        assert!(verify_dynamic_equivalence(&s, t, 50, 1).unwrap().pass);
    }

    #[test]
    fn cf_input_is_left_alone() {
        let s = sys("@species A B\n@kinetics powerlaw\n@reaction R1: A -> B | k=1 | F: A=1\n");
        let res = cf_rm(&s, Variant::Plus);
        assert!(res.is_identity());
        assert_eq!(res.target, s);
        let p = predict_numbers(&s, Variant::Plus);
        assert_eq!(p.complexes, Predicted::Exact(2));
    }

    #[test]
    fn generic_reuses_larger_multiples() {
        // 2A is already a reactant, so the new reactant must be 3A.
        let s = sys("@species A B C\n@kinetics powerlaw\n\
            @reaction R1: A -> B | k=1 | F: A=1\n\
            @reaction R2: A -> C | k=2 | F: A=2\n\
            @reaction R3: 2*A -> B | k=1 | F: A=1\n");
        let res = cf_rm(&s, Variant::Generic);
        assert_eq!(res.new_reactants[0].multiplier, 2);
        assert_eq!(res.new_reactants[0].complex, "3*A");
        assert!(res.target.is_complex_factorizable());
    }

    #[test]
    fn plus_avoids_every_existing_complex() {
        // Generic would pick 2A -> A + C, but A + C already exists.
        let s = sys("@species A B C\n@kinetics powerlaw\n\
            @reaction R1: A -> B | k=1 | F: A=1\n\
            @reaction R2: A -> C | k=2 | F: A=2\n\
            @reaction R3: B -> A + C | k=1 | F: B=1\n");
        let g = cf_rm(&s, Variant::Generic);
        assert_eq!(g.new_reactants[0].multiplier, 1);
        let p = cf_rm(&s, Variant::Plus);
        assert_eq!(p.new_reactants[0].multiplier, 2);
        assert_eq!(p.new_reactants[0].complex, "3*A");
        assert!(verify_dynamic_equivalence(&s, &p.target, 20, 3).unwrap().pass);
    }

    #[test]
    fn zero_complex_node_uses_first_species() {
        let s = sys("@species A B\n@kinetics powerlaw\n\
            @reaction R1: 0 -> A | k=1 | F:\n\
            @reaction R2: 0 -> B | k=2 | F: B=1\n\
            @reaction R3: A -> B | k=1 | F: A=1\n");
        let res = cf_rm(&s, Variant::Plus);
        assert!(res.new_reactants[0].zero_complex_fallback);
        assert!(res.target.is_complex_factorizable());
        assert!(verify_dynamic_equivalence(&s, &res.target, 20, 3).unwrap().pass);
    }

    #[test]
    fn terminal_cycles_can_grow_under_plus() {
        // Moving A -> C off A turns the cycle A <-> B terminal.
        let s = sys("@species A B C D\n@kinetics powerlaw\n\
            @reaction R1: A -> B | k=1 | F: A=1\n\
            @reaction R2: B -> A | k=1 | F: B=1\n\
            @reaction R3: A -> C | k=1 | F: A=2\n\
            @reaction R4: C -> D | k=1 | F: C=1\n\
            @reaction R5: D -> C | k=1 | F: D=1\n");
        let res = cf_rm(&s, Variant::Plus);
        let before = s.network.numbers().terminal_cycles;
        let after = res.target.network.numbers().terminal_cycles;
        assert_eq!((before, after), (1, 2));
    }

    #[test]
    fn nd_family_numbers() {
        for d in 2..=4 {
            let s = generate_nd_family(d).unwrap();
            let nn = s.network.numbers();
            assert_eq!(nn.complexes, 3 * d - 1);
            assert_eq!(nn.deficiency, 3 * d as i64 - 4);
            let t = cf_rm(&s, Variant::Generic).target;
            let tn = t.network.numbers();
            assert_eq!(tn.linkage_classes, d);
            assert_eq!(nn.deficiency - tn.deficiency, d as i64 - 1);
        }
        assert!(generate_nd_family(1).is_err());
    }

    #[test]
    fn cf_systems_use_terminality_excess() {
        let s = sys("@species A B\n@kinetics powerlaw\n@reaction R1: A -> B | k=1 | F: A=1\n");
        let rep = kssc_classify(&s, 42);
        assert_eq!(rep.case, Some(2));
        assert_eq!(rep.claim, SubspaceClaim::Coincide);
    }

    #[test]
    fn random_generator_gives_nf_systems() {
        for seed in 0..20 {
            let s = random_nf_system(seed);
            assert!(!s.is_complex_factorizable());
            assert!(s.network.num_reactions() <= 12);
            assert!(s.network.num_species() <= 6);
        }
        assert_eq!(random_nf_system(7), random_nf_system(7));
    }
}
