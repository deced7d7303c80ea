use crnlc_milp::{
    export_lp, parse_lp, solve_lp, solve_milp, MilpError, MilpModel, Relation, Sense,
    SolveStatus, VarId,
};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Random box-bounded LP with `A x <= b`, `b >= 0` (so the origin is feasible).
fn random_box_lp(seed: u64) -> (MilpModel, Vec<f64>, Vec<Vec<f64>>, Vec<f64>, Vec<f64>) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = rng.gen_range(2..=3);
    let rows = rng.gen_range(1..=4);
    let mut m = MilpModel::new(if rng.gen_bool(0.5) {
        Sense::Maximize
    } else {
        Sense::Minimize
    });
    let ub: Vec<f64> = (0..n).map(|_| rng.gen_range(1..=10) as f64).collect();
    let vars: Vec<VarId> = (0..n)
        .map(|j| m.add_continuous(format!("x{j}"), 0.0, ub[j]))
        .collect();
    let mut a = Vec::new();
    let mut b = Vec::new();
    for i in 0..rows {
        let row: Vec<f64> = (0..n).map(|_| rng.gen_range(-5..=5) as f64).collect();
        let rhs = rng.gen_range(0..=12) as f64;
        let terms: Vec<(VarId, f64)> = vars.iter().copied().zip(row.iter().copied()).collect();
        m.add_constraint(format!("r{i}"), &terms, Relation::Le, rhs);
        a.push(row);
        b.push(rhs);
    }
    let c: Vec<f64> = (0..n).map(|_| rng.gen_range(-6..=6) as f64).collect();
    let terms: Vec<(VarId, f64)> = vars.iter().copied().zip(c.iter().copied()).collect();
    m.set_objective(&terms);
    (m, c, a, b, ub)
}

fn solve_square(mut a: Vec<Vec<f64>>, mut b: Vec<f64>) -> Option<Vec<f64>> {
    let n = b.len();
    for col in 0..n {
        let p = (col..n).max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs()))?;
        if a[p][col].abs() < 1e-12 {
            return None;
        }
        a.swap(p, col);
        b.swap(p, col);
        for r in 0..n {
            if r != col {
                let f = a[r][col] / a[col][col];
                for k in 0..n {
                    a[r][k] -= f * a[col][k];
                }
                b[r] -= f * b[col];
            }
        }
    }
    Some((0..n).map(|i| b[i] / a[i][i]).collect())
}

/// Optimum by enumerating every basic solution of the hyperplane arrangement.
fn vertex_oracle(sense: Sense, c: &[f64], a: &[Vec<f64>], b: &[f64], ub: &[f64]) -> f64 {
    let n = c.len();
    let mut planes: Vec<(Vec<f64>, f64)> = a.iter().cloned().zip(b.iter().copied()).collect();
    for j in 0..n {
        let mut e = vec![0.0; n];
        e[j] = 1.0;
        planes.push((e.clone(), 0.0));
        planes.push((e, ub[j]));
    }
    let mut best: Option<f64> = None;
    let k = planes.len();
    let mut idx: Vec<usize> = (0..n).collect();
    loop {
        let mat: Vec<Vec<f64>> = idx.iter().map(|&i| planes[i].0.clone()).collect();
        let rhs: Vec<f64> = idx.iter().map(|&i| planes[i].1).collect();
        if let Some(x) = solve_square(mat, rhs) {
            let feasible = x.iter().zip(ub).all(|(v, u)| *v >= -1e-9 && *v <= u + 1e-9)
                && a.iter().zip(b).all(|(row, bi)| {
                    row.iter().zip(&x).map(|(p, q)| p * q).sum::<f64>() <= bi + 1e-9
                });
            if feasible {
                let z: f64 = c.iter().zip(&x).map(|(p, q)| p * q).sum();
                best = Some(match (best, sense) {
                    (None, _) => z,
                    (Some(v), Sense::Maximize) => v.max(z),
                    (Some(v), Sense::Minimize) => v.min(z),
                });
            }
        }
        // next combination
        let mut i = n;
        loop {
            if i == 0 {
                return best.expect("origin is always a vertex candidate");
            }
            i -= 1;
            if idx[i] < k - n + i {
                idx[i] += 1;
                for t in i + 1..n {
                    idx[t] = idx[t - 1] + 1;
                }
                break;
            }
        }
    }
}

/// Pure-binary program, sometimes infeasible.
fn random_binary_program(seed: u64) -> MilpModel {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let k = rng.gen_range(1..=12);
    let mut m = MilpModel::new(if rng.gen_bool(0.5) {
        Sense::Maximize
    } else {
        Sense::Minimize
    });
    let vars: Vec<VarId> = (0..k).map(|j| m.add_binary(format!("d{j}"))).collect();
    let x0: Vec<f64> = (0..k).map(|_| rng.gen_range(0..=1) as f64).collect();
    let rows = rng.gen_range(1..=4);
    for i in 0..rows {
        let coeffs: Vec<f64> = (0..k).map(|_| rng.gen_range(-5..=9) as f64).collect();
        let act: f64 = coeffs.iter().zip(&x0).map(|(a, x)| a * x).sum();
        let (rel, rhs) = match rng.gen_range(0..10) {
            0 => (Relation::Eq, act),
            1..=5 => (Relation::Le, act + rng.gen_range(-1..=4) as f64),
            _ => (Relation::Ge, act - rng.gen_range(-1..=4) as f64),
        };
        let terms: Vec<(VarId, f64)> = vars.iter().copied().zip(coeffs).collect();
        m.add_constraint(format!("r{i}"), &terms, rel, rhs);
    }
    let obj: Vec<(VarId, f64)> = vars
        .iter()
        .map(|&v| (v, rng.gen_range(-10..=10) as f64))
        .collect();
    m.set_objective(&obj);
    m
}

fn exhaustive(m: &MilpModel) -> Option<f64> {
    let k = m.variables.len();
    let mut best: Option<f64> = None;
    for mask in 0u32..(1 << k) {
        let x: Vec<f64> = (0..k).map(|j| ((mask >> j) & 1) as f64).collect();
        if m.constraints.iter().all(|c| c.violation(&x) <= 1e-9) {
            let z = m.objective_value(&x);
            best = Some(match (best, m.objective.sense) {
                (None, _) => z,
                (Some(v), Sense::Maximize) => v.max(z),
                (Some(v), Sense::Minimize) => v.min(z),
            });
        }
    }
    best
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn simplex_matches_vertex_enumeration(seed in any::<u64>()) {
        let (m, c, a, b, ub) = random_box_lp(seed);
        let s = solve_lp(&m).unwrap();
        prop_assert_eq!(s.status, SolveStatus::Optimal);
        let want = vertex_oracle(m.objective.sense, &c, &a, &b, &ub);
        prop_assert!((s.objective_value - want).abs() < 1e-7, "{} vs {}", s.objective_value, want);
        prop_assert!(m.max_violation(&s.values) < 1e-9);
    }

    #[test]
    fn branch_and_bound_matches_exhaustive_enumeration(seed in any::<u64>()) {
        let m = random_binary_program(seed);
        match (solve_milp(&m), exhaustive(&m)) {
            (Ok(s), Some(want)) => {
                prop_assert!((s.objective_value - want).abs() < 1e-6, "{} vs {}", s.objective_value, want);
                prop_assert!(m.max_violation(&s.values) < 1e-7);
                prop_assert!(s.values.iter().all(|v| *v == 0.0 || *v == 1.0));
            }
            (Err(MilpError::Infeasible), None) => {}
            (got, want) => prop_assert!(false, "solver {:?}, enumeration {:?}", got, want),
        }
    }

    #[test]
    fn lp_files_round_trip(seed in any::<u64>()) {
        let m = random_binary_program(seed);
        let back = parse_lp(&export_lp(&m)).unwrap();
        prop_assert_eq!(&back, &m);
        let (lp, ..) = random_box_lp(seed);
        prop_assert_eq!(parse_lp(&export_lp(&lp)).unwrap(), lp);
    }
}

#[test]
fn solutions_are_deterministic() {
    for seed in 0..20 {
        let m = random_binary_program(seed);
        let a = solve_milp(&m);
        let b = solve_milp(&m.clone());
        assert_eq!(a, b);
    }
}

#[test]
fn mixed_program_with_linking_rows() {
    // Facility-style: open at most two sites, demand 7 covered by capacity 4 per open site.
    let mut m = MilpModel::new(Sense::Minimize);
    let open: Vec<VarId> = (0..3).map(|i| m.add_binary(format!("o{i}"))).collect();
    let flow: Vec<VarId> = (0..3)
        .map(|i| m.add_continuous(format!("f{i}"), 0.0, 4.0))
        .collect();
    for i in 0..3 {
        m.add_constraint(format!("cap{i}"), &[(flow[i], 1.0), (open[i], -4.0)], Relation::Le, 0.0);
    }
    m.add_constraint(
        "demand",
        &[(flow[0], 1.0), (flow[1], 1.0), (flow[2], 1.0)],
        Relation::Ge,
        7.0,
    );
    let fixed = [10.0, 6.0, 7.0];
    let unit = [1.0, 2.0, 1.5];
    let mut obj = Vec::new();
    for i in 0..3 {
        obj.push((open[i], fixed[i]));
        obj.push((flow[i], unit[i]));
    }
    m.set_objective(&obj);
    let s = solve_milp(&m).unwrap();
    // sites 1 and 2: 6 + 7 + 2*3 + 1.5*4 = 25, or 1+2 with f2=4,f1=3: 13+6+6 = 25; sites 0+2: 17+4+4.5=25.5
    assert!((s.objective_value - 25.0).abs() < 1e-9, "{}", s.objective_value);
    assert!(m.max_violation(&s.values) < 1e-9);
}
