#![allow(dead_code)]

use std::collections::HashMap;
use std::path::PathBuf;
use std::sync::Arc;

use copycup::groups::FiniteGroup;
use copycup::search::Manifest;

pub fn manifest(name: &str) -> Manifest {
    let path = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../manifests").join(name);
    let text = std::fs::read_to_string(&path).unwrap_or_else(|e| panic!("{}: {e}", path.display()));
    Manifest::from_json(&text).expect("manifest parses")
}

/// Group generated by permutations, as a Cayley table with the identity first.
pub fn permutation_group(gens: &[Vec<usize>]) -> Arc<FiniteGroup> {
    let deg = gens[0].len();
    let id: Vec<usize> = (0..deg).collect();
    let compose = |a: &[usize], b: &[usize]| -> Vec<usize> { b.iter().map(|&i| a[i]).collect() };
    let mut elems = vec![id.clone()];
    let mut index: HashMap<Vec<usize>, usize> = HashMap::from([(id, 0)]);
    let mut i = 0;
    while i < elems.len() {
        for g in gens {
            let p = compose(&elems[i], g);
            if !index.contains_key(&p) {
                index.insert(p.clone(), elems.len());
                elems.push(p);
            }
        }
        i += 1;
    }
    let table: Vec<Vec<usize>> =
        elems.iter().map(|a| elems.iter().map(|b| index[&compose(a, b)]).collect()).collect();
    FiniteGroup::from_cayley(&table).expect("closed under composition")
}

pub fn symmetric3() -> Arc<FiniteGroup> {
    permutation_group(&[vec![1, 0, 2], vec![1, 2, 0]])
}

pub fn dihedral(n: usize) -> Arc<FiniteGroup> {
    let rot: Vec<usize> = (0..n).map(|i| (i + 1) % n).collect();
    let refl: Vec<usize> = (0..n).map(|i| (n - i) % n).collect();
    permutation_group(&[rot, refl])
}

pub fn alternating4() -> Arc<FiniteGroup> {
    permutation_group(&[vec![1, 2, 0, 3], vec![1, 0, 3, 2]])
}

/// Quaternion group: index 4s + u for sign s and unit u in (1, i, j, k).
pub fn quaternion() -> Arc<FiniteGroup> {
    // unit products as (sign, unit)
    const T: [[(usize, usize); 4]; 4] = [
        [(0, 0), (0, 1), (0, 2), (0, 3)],
        [(0, 1), (1, 0), (0, 3), (1, 2)],
        [(0, 2), (1, 3), (1, 0), (0, 1)],
        [(0, 3), (0, 2), (1, 1), (1, 0)],
    ];
    let table: Vec<Vec<usize>> = (0..8)
        .map(|a| {
            (0..8)
                .map(|b| {
                    let (s, u) = T[a % 4][b % 4];
                    4 * ((s + a / 4 + b / 4) % 2) + u
                })
                .collect()
        })
        .collect();
    FiniteGroup::from_cayley(&table).expect("quaternion table")
}

pub fn nonabelian_small() -> Vec<(&'static str, Arc<FiniteGroup>)> {
    vec![
        ("S3", symmetric3()),
        ("D4", dihedral(4)),
        ("Q8", quaternion()),
        ("D6", dihedral(6)),
        ("A4", alternating4()),
    ]
}
