//! Structured analysis reports (JSON via serde, plus a plain-text table).

use std::fmt::Write as _;

use nalgebra::DMatrix;
use serde::Serialize;

use crate::cfrm::{kssc_classify, KsscReport};
use crate::kinetics::{KineticSystem, NodeClass, ParamTolerance};
use crate::network::{NetworkNumbers, StructureFlags};

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LabeledMatrix {
    pub rows: Vec<String>,
    pub columns: Vec<String>,
    pub values: Vec<Vec<f64>>,
}

impl LabeledMatrix {
    pub fn new(m: &DMatrix<f64>, rows: Vec<String>, columns: Vec<String>) -> Self {
        let values = m.row_iter().map(|r| r.iter().copied().collect()).collect();
        LabeledMatrix { rows, columns, values }
    }

    /// Header row of column labels; each line starts with its row label.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("row");
        for c in &self.columns {
            let _ = write!(out, ",{c}");
        }
        out.push('\n');
        for (label, row) in self.rows.iter().zip(&self.values) {
            out.push_str(label);
            for v in row {
                let _ = write!(out, ",{v}");
            }
            out.push('\n');
        }
        out
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct NodeReport {
    pub complex: String,
    pub class: NodeClass,
    pub subsets: Vec<Vec<String>>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct AnalysisReport {
    pub species: Vec<String>,
    pub kinetics: &'static str,
    pub numbers: NetworkNumbers,
    pub flags: StructureFlags,
    pub integral_complexes: bool,
    pub cf_subsets: usize,
    pub nf_nodes: usize,
    pub complex_factorizable: bool,
    pub nodes: Vec<NodeReport>,
    pub interaction_span_surjective: bool,
    /// Only defined for complex factorizable kinetics.
    pub factor_span_surjective: Option<bool>,
    /// Only defined for complex factorizable power-law kinetics.
    pub pl_tik: Option<bool>,
    pub t_matrix: Option<LabeledMatrix>,
    pub t_hat: Option<LabeledMatrix>,
    pub t_hat_rank: Option<usize>,
    pub subspace_coincidence: KsscReport,
}

pub fn analyze(sys: &KineticSystem, seed: u64, tol: ParamTolerance) -> AnalysisReport {
    let net = &sys.network;
    let partition = sys.cf_partition_with(tol);
    let cf = partition.is_complex_factorizable();
    let nodes: Vec<NodeReport> = partition
        .nodes
        .iter()
        .map(|node| NodeReport {
            complex: net.complex_label(node.complex),
            class: node.class(),
            subsets: node
                .subsets
                .iter()
                .map(|s| s.iter().map(|&j| net.reactions()[j].label.clone()).collect())
                .collect(),
        })
        .collect();
    let power_law = !sys.kinetics.law.is_hill();
    // Matrix-level checks need exact row equality within each node.
    let exact_cf = sys.is_complex_factorizable();
    let tm = if exact_cf { sys.t_matrices().ok() } else { None };
    let (t_matrix, t_hat, t_hat_rank) = match &tm {
        Some(tm) => {
            let cols: Vec<String> = tm.columns.iter().map(|&y| net.complex_label(y)).collect();
            let mut rows: Vec<String> = Vec::new();
            if power_law {
                rows.extend(net.species().iter().cloned());
            } else {
                rows.extend(net.species().iter().map(|s| format!("v:{s}")));
                rows.extend(net.species().iter().map(|s| format!("d:{s}")));
            }
            let t = LabeledMatrix::new(&tm.t, rows.clone(), cols.clone());
            let l = tm.t_hat.nrows() - tm.t.nrows();
            rows.extend((1..=l).map(|k| format!("L{k}")));
            let t_hat = LabeledMatrix::new(&tm.t_hat, rows, cols);
            (Some(t), Some(t_hat), Some(tm.t_hat_rank))
        }
        None => (None, None, None),
    };
    AnalysisReport {
        species: net.species().to_vec(),
        kinetics: if power_law { "powerlaw" } else { "hill" },
        numbers: net.numbers(),
        flags: net.structure_flags(),
        integral_complexes: net.has_integral_complexes(),
        cf_subsets: partition.num_subsets(),
        nf_nodes: partition.nf_nodes().len(),
        complex_factorizable: cf,
        nodes,
        interaction_span_surjective: sys.is_interaction_span_surjective(seed),
        factor_span_surjective: if exact_cf { sys.is_factor_span_surjective(seed).ok() } else { None },
        pl_tik: if exact_cf && power_law { sys.is_pl_tik().ok() } else { None },
        t_matrix,
        t_hat,
        t_hat_rank,
        subspace_coincidence: kssc_classify(sys, seed),
    }
}

/// Network numbers under their conventional names, one per line.
pub fn numbers_table(nn: &NetworkNumbers) -> String {
    let rows: [(&str, String); 13] = [
        ("Number of species", nn.species.to_string()),
        ("Number of complexes", nn.complexes.to_string()),
        ("Number of reactant complexes", nn.reactant_complexes.to_string()),
        ("Number of reactions", nn.reactions.to_string()),
        ("Number of linkage classes", nn.linkage_classes.to_string()),
        ("Number of strong linkage classes", nn.strong_linkage_classes.to_string()),
        ("Number of terminal strong linkage classes", nn.terminal_classes.to_string()),
        ("Number of terminal points", nn.terminal_points.to_string()),
        ("Number of terminal cycles", nn.terminal_cycles.to_string()),
        ("Rank of network", nn.rank.to_string()),
        ("Reactant rank of network", nn.reactant_rank.to_string()),
        ("Deficiency of network", nn.deficiency.to_string()),
        ("Reactant deficiency of network", nn.reactant_deficiency.to_string()),
    ];
    let width = rows.iter().map(|(k, _)| k.len()).max().unwrap_or(0);
    let mut out = String::new();
    for (k, v) in rows {
        let _ = writeln!(out, "{k:<width$}  {v}");
    }
    out
}

fn yes_no(b: bool) -> &'static str {
    if b {
        "yes"
    } else {
        "no"
    }
}

impl AnalysisReport {
    pub fn to_text(&self) -> String {
        let mut out = numbers_table(&self.numbers);
        let f = &self.flags;
        let _ = writeln!(out);
        let _ = writeln!(out, "weakly reversible: {}", yes_no(f.weakly_reversible));
        let _ = writeln!(out, "t-minimal: {}", yes_no(f.t_minimal));
        let _ = writeln!(out, "point terminal: {}", yes_no(f.point_terminal));
        let _ = writeln!(out, "sufficient reactant diversity: {}", yes_no(f.sufficient_reactant_diversity));
        let _ = writeln!(out, "deficiency-bounded terminality: {}", yes_no(f.deficiency_bounded_terminality));
        if !self.integral_complexes {
            let _ = writeln!(out, "note: some complexes have non-integer coefficients");
        }
        let _ = writeln!(out);
        let _ = writeln!(
            out,
            "kinetics: {}, {} CF-subsets, {} NF nodes, complex factorizable: {}",
            self.kinetics,
            self.cf_subsets,
            self.nf_nodes,
            yes_no(self.complex_factorizable)
        );
        for node in &self.nodes {
            let subsets: Vec<String> = node.subsets.iter().map(|s| format!("{{{}}}", s.join(", "))).collect();
            let _ = writeln!(out, "  {:<12} {:?}: {}", node.complex, node.class, subsets.join(" "));
        }
        let _ = writeln!(out, "interaction span surjective: {}", yes_no(self.interaction_span_surjective));
        if let Some(v) = self.factor_span_surjective {
            let _ = writeln!(out, "factor span surjective: {}", yes_no(v));
        }
        if let Some(v) = self.pl_tik {
            let _ = writeln!(out, "PL-TIK: {}", yes_no(v));
        }
        if let Some(r) = self.t_hat_rank {
            let _ = writeln!(out, "T-hat rank: {r}");
        }
        let k = &self.subspace_coincidence;
        let case = k.case.map_or("none".to_string(), |c| c.to_string());
        let _ = writeln!(out, "subspace coincidence: case {case}, {:?}", k.claim);
        out
    }
}
