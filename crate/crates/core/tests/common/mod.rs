#![allow(dead_code)]

use std::path::PathBuf;

use crnlc::{parse_system, KineticSystem};

pub fn fixture_path(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("fixtures").join(name)
}

pub fn fixture(name: &str) -> KineticSystem {
    let text = std::fs::read_to_string(fixture_path(name)).unwrap();
    parse_system(&text).unwrap()
}

pub fn labels(sys: &KineticSystem, set: &[usize]) -> Vec<String> {
    set.iter().map(|&j| sys.network.reactions()[j].label.clone()).collect()
}

/// Rank by Gram-Schmidt with re-orthogonalization, independent of the library routine.
pub fn gram_schmidt_rank(columns: &[Vec<f64>]) -> usize {
    let scale = columns.iter().flatten().fold(0.0_f64, |a, v| a.max(v.abs()));
    if scale == 0.0 {
        return 0;
    }
    let mut basis: Vec<Vec<f64>> = Vec::new();
    for col in columns {
        let mut v: Vec<f64> = col.iter().map(|x| x / scale).collect();
        for _ in 0..2 {
            for b in &basis {
                let dot: f64 = v.iter().zip(b).map(|(x, y)| x * y).sum();
                for (x, y) in v.iter_mut().zip(b) {
                    *x -= dot * y;
                }
            }
        }
        let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm > 1e-8 {
            basis.push(v.iter().map(|x| x / norm).collect());
        }
    }
    basis.len()
}
