mod common;

use common::fixture;
use crnlc::conjugacy::{
    build_milp, solve_conjugacy, verify_linear_conjugacy, ArcBounds, MilpConfig, Mode, VerifyOptions,
};
use crnlc::{parse_system, CrnError, DEFAULT_SEED};
use nalgebra::DMatrix;

/// Laplacian of the printed sparse realization (columns are source complexes).
#[rustfmt::skip]
const PRINTED_SPARSE: [[f64; 12]; 12] = [
    [-0.12, 0.0, 0.0, 0.0, 0.0, 1.05, 0.0, 0.0, 0.33, 0.0, 0.0, 0.0],
    [0.0, -0.10, 0.0, 0.0, 0.0, 0.0, 0.0, 0.002, 0.0, 0.0, 0.0, 0.0],
    [0.0, 0.08, -0.71, 0.0, 0.0, 0.0, 0.0, 0.001, 0.0, 0.0, 0.0, 0.0],
    [0.0, 0.0, 0.0, -2.98, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.09, 0.03],
    [0.0; 12],
    [0.09, 0.0, 0.0, 0.0, 0.0, -1.05, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [0.0; 12],
    [0.0, 0.02, 0.71, 0.0, 0.0, 0.0, 0.0, -0.003, 0.0, 0.0, 0.0, 0.0],
    [0.03, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, -0.33, 0.0, 0.0, 0.0],
    [0.0; 12],
    [0.0, 0.0, 0.0, 2.98, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, -0.17, 0.0],
    [0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.09, -0.03],
];
const PRINTED_C: [f64; 6] = [2.28, 1.14, 1.14, 1.14, 4.56, 4.56];

fn hill_config(mode: Mode) -> MilpConfig {
    MilpConfig {
        epsilon: 0.1,
        upper: ArcBounds::Uniform(20.0),
        mode,
        ..MilpConfig::default()
    }
}

#[test]
fn printed_sparse_realization_is_feasible() {
    let sys = fixture("schmitz_cf.net");
    let cm = build_milp(&sys, &MilpConfig::default()).unwrap();
    let n = sys.network.num_complexes();
    assert_eq!(cm.model.num_binaries(), n * (n - 1));

    // A_k' = A_b diag(e) with e_j = prod c^F over the kinetic orders of column j.
    let orders: Vec<Option<Vec<f64>>> = (0..n)
        .map(|y| {
            let from = sys.network.reactions_from(y);
            from.first().map(|&j| sys.parameter_row(j))
        })
        .collect();
    let a_k = DMatrix::from_fn(n, n, |i, j| PRINTED_SPARSE[i][j]);
    let a_b = DMatrix::from_fn(n, n, |i, j| {
        let e: f64 = orders[j]
            .as_ref()
            .map_or(1.0, |f| f.iter().zip(&PRINTED_C).map(|(p, c)| c.powf(*p)).product());
        a_k[(i, j)] / e
    });
    let values = cm.assignment(&a_b, &PRINTED_C);
    let violation = cm.violation(&values);
    assert!(violation <= 1e-2, "violation {violation}");
    let active = (0..n).flat_map(|j| (0..n).map(move |i| (i, j))).filter(|&(i, j)| i != j && a_b[(i, j)] > 0.0);
    assert_eq!(active.count(), 13);

    // The source itself with unit constants is an exact solution of the same model.
    let identity = cm.assignment(&sys.laplacian(), &[1.0; 6]);
    assert!(cm.violation(&identity) < 1e-9);
}

#[test]
fn hill_realizations() {
    let sys = fixture("htk.net");
    let sparse = solve_conjugacy(&sys, &hill_config(Mode::Sparse)).unwrap();
    let dense = solve_conjugacy(&sys, &hill_config(Mode::Dense)).unwrap();
    assert_eq!(sparse.objective, 6);
    assert_eq!(dense.objective, 10);
    for r in [&sparse, &dense] {
        assert!(r.constraint_residual < 1e-7);
        assert!(r.kirchhoff_residual < 1e-9);
        let res = verify_linear_conjugacy(&sys, &r.target, &r.c, &VerifyOptions::default()).unwrap();
        assert!(res.algebraic < 1e-7, "{res:?}");
        assert!(res.trajectory.unwrap() < 1e-4, "{res:?}");
    }
}

#[test]
fn weak_reversibility_is_enforced() {
    let sys = parse_system(
        "@species A B C\n@kinetics powerlaw\n\
         @reaction R1: A -> B | k=2 | F: A=1\n\
         @reaction R2: B -> A | k=1 | F: B=1\n\
         @reaction R3: B -> C | k=1 | F: B=1\n\
         @reaction R4: C -> A | k=3 | F: C=1\n",
    )
    .unwrap();
    for mode in [Mode::Sparse, Mode::Dense] {
        let cfg = MilpConfig {
            mode,
            require_weak_reversibility: true,
            ..MilpConfig::default()
        };
        let r = solve_conjugacy(&sys, &cfg).unwrap();
        assert!(r.target.network.structure_flags().weakly_reversible);
        let res = verify_linear_conjugacy(&sys, &r.target, &r.c, &VerifyOptions::default()).unwrap();
        assert!(res.algebraic < 1e-7);
    }
}

#[test]
fn unrealizable_source_reports_no_realization() {
    // B is not a reactant, so no arc can return to A.
    let sys = parse_system("@species A B\n@kinetics powerlaw\n@reaction R1: A -> B | k=1 | F: A=1\n").unwrap();
    let cfg = MilpConfig {
        require_weak_reversibility: true,
        ..MilpConfig::default()
    };
    assert!(matches!(solve_conjugacy(&sys, &cfg), Err(CrnError::NoRealization)));
    assert_eq!(solve_conjugacy(&sys, &MilpConfig::default()).unwrap().objective, 1);
}

#[test]
fn unit_constants_do_not_relate_source_and_sparse() {
    let a = fixture("schmitz_cf.net");
    let b = fixture("sparse.net");
    let opts = VerifyOptions {
        t_end: 0.0,
        ..VerifyOptions::default()
    };
    let ok = verify_linear_conjugacy(&a, &b, &PRINTED_C, &opts).unwrap();
    assert!(ok.algebraic < 1e-9, "{ok:?}");
    let bad = verify_linear_conjugacy(&a, &b, &[1.0; 6], &opts).unwrap();
    assert!(bad.algebraic > 1e-2);
    assert_eq!(DEFAULT_SEED, opts.seed);
}

#[test]
fn support_cuts_leave_the_optimum_unchanged() {
    let sys = fixture("htk.net");
    for (mode, expected) in [(Mode::Sparse, 6), (Mode::Dense, 10)] {
        let cfg = MilpConfig {
            support_cuts: true,
            ..hill_config(mode)
        };
        let r = solve_conjugacy(&sys, &cfg).unwrap();
        assert_eq!(r.objective, expected);
        assert!(!r.stats.support_bounds.is_empty());
        for b in &r.stats.support_bounds {
            let used = (0..r.a_b.nrows()).filter(|&i| i != b.complex && r.a_b[(i, b.complex)] > 0.0).count();
            assert!(b.min <= used && used <= b.max, "{b:?} vs {used}");
        }
    }
}
