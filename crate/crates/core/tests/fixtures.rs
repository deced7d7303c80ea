mod common;

use common::{fixture, labels};
use crnlc::kinetics::NodeClass;
use crnlc::report::analyze;
use crnlc::{ParamTolerance, DEFAULT_SEED};

#[test]
fn schmitz_structure() {
    let sys = fixture("schmitz.net");
    let nn = sys.network.numbers();
    assert_eq!((nn.species, nn.complexes, nn.reactions), (6, 6, 13));
    assert_eq!(nn.linkage_classes, 1);
    assert_eq!(nn.rank, 5);
    assert_eq!(nn.deficiency, 0);
    assert!(sys.network.structure_flags().weakly_reversible);

    let partition = sys.cf_partition();
    assert_eq!(partition.num_subsets(), 9);
    assert_eq!(partition.nf_nodes().len(), 3);
    assert!(!partition.is_complex_factorizable());
    let m1 = &partition.nodes[0];
    assert_eq!(m1.class(), NodeClass::Nf);
    let m1_subsets: Vec<Vec<String>> = m1.subsets.iter().map(|s| labels(&sys, s)).collect();
    assert_eq!(m1_subsets, vec![vec!["R1", "R2"], vec!["R3"]]);

    // Every complex is a single species, so total carbon is conserved.
    let x = [1.3, 0.7, 2.1, 0.4, 1.9, 0.6];
    let f = sys.species_formation_rate(&x).unwrap();
    assert!(f.iter().sum::<f64>().abs() < 1e-12);
    let r3 = sys.network.reactions().iter().position(|r| r.label == "R3").unwrap();
    assert!((sys.rate(r3, &[1.0; 6]).unwrap() - 10.08896).abs() < 1e-12);
}

#[test]
fn schmitz_cf_structure() {
    let sys = fixture("schmitz_cf.net");
    let nn = sys.network.numbers();
    assert_eq!(
        (nn.complexes, nn.reactant_complexes, nn.reactions, nn.linkage_classes, nn.terminal_classes),
        (12, 9, 13, 4, 4)
    );
    assert_eq!(nn.deficiency, 3);
    // Terminal classes: the cycle through M2, M3, M4 and the three new product complexes.
    assert_eq!((nn.terminal_points, nn.terminal_cycles), (3, 1));
    let flags = sys.network.structure_flags();
    assert!(flags.t_minimal);
    assert!(!flags.weakly_reversible);
    assert!(!flags.point_terminal);

    let y = sys.network.complex_matrix();
    let two_m1 = sys.network.complex_label(3);
    assert_eq!(two_m1, "2*M1");
    assert_eq!(y.column(3).iter().copied().collect::<Vec<_>>(), vec![2.0, 0.0, 0.0, 0.0, 0.0, 0.0]);

    assert!(sys.is_complex_factorizable());
    let tm = sys.t_matrices().unwrap();
    let col = tm.columns.iter().position(|&c| c == 3).unwrap();
    assert_eq!(tm.t.column(col).iter().copied().collect::<Vec<_>>(), vec![0.36, 0.0, 0.0, 0.0, 0.0, 0.0]);
    assert!(sys.is_factor_span_surjective(DEFAULT_SEED).unwrap());
}

#[test]
fn sparse_realization_structure() {
    let sys = fixture("sparse.net");
    let nn = sys.network.numbers();
    assert_eq!((nn.complexes, nn.reactions, nn.linkage_classes, nn.rank, nn.deficiency), (9, 13, 3, 5, 1));
    let tm = sys.t_matrices().unwrap();
    assert_eq!(tm.t_hat_rank, 9);
    assert!(sys.is_pl_tik().unwrap());
}

#[test]
fn sparse_vector_field_matches_printed_equations() {
    let sys = fixture("sparse.net");
    let x = [1.2_f64, 0.95, 1.05, 0.8, 1.3, 0.7];
    let f = sys.species_formation_rate(&x).unwrap();
    // Printed coefficients carry three significant digits.
    let dm2 = 0.186 * x[0] - 0.095 * x[1] - 2.104 * x[1].powf(9.4) + 0.002 * x[3];
    let dm4 = 0.016 * x[1] + 0.714 * x[2] - 0.003 * x[3];
    let dm6 = 0.0862 * x[4] - 0.0333 * x[5];
    assert!((f[1] - dm2).abs() < 5e-3, "{} vs {dm2}", f[1]);
    assert!((f[3] - dm4).abs() < 5e-3, "{} vs {dm4}", f[3]);
    assert!((f[5] - dm6).abs() < 1e-12);
}

#[test]
fn hill_fixture_is_complex_factorizable() {
    let sys = fixture("htk.net");
    let nn = sys.network.numbers();
    assert_eq!((nn.species, nn.complexes, nn.reactions), (4, 9, 6));
    assert!(sys.is_complex_factorizable());
    let tm = sys.t_matrices().unwrap();
    assert_eq!(tm.t.nrows(), 8);
    assert_eq!(tm.t.ncols(), nn.reactant_complexes);
}

#[test]
fn report_round_trips_to_json_and_text() {
    let sys = fixture("schmitz.net");
    let report = analyze(&sys, DEFAULT_SEED, ParamTolerance::exact());
    assert_eq!(report.cf_subsets, 9);
    assert_eq!(report.nf_nodes, 3);
    assert!(report.t_hat.is_none());
    let json = serde_json::to_value(&report).unwrap();
    assert_eq!(json["numbers"]["deficiency"], 0);
    assert_eq!(json["flags"]["weakly_reversible"], true);
    let text = report.to_text();
    assert!(text.contains("Number of reactant complexes"));
    assert!(text.lines().any(|l| l.starts_with("Deficiency of network") && l.ends_with(" 0")));

    let cf = analyze(&fixture("schmitz_cf.net"), DEFAULT_SEED, ParamTolerance::exact());
    let t = cf.t_matrix.unwrap();
    let csv = t.to_csv();
    assert!(csv.starts_with("row,M1,M2,M3,"));
    assert_eq!(csv.lines().count(), 7);
}
