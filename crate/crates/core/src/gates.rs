//! Copy-cup CZ / CCZ circuits: synthesis, codespace preservation, logical action.
//!
//! Copy c of the code holds a basis 1-cochain per qubit. A Λ-tuple of qubits,
//! one per copy, gets a gate when the integral of their cup product is odd.
//! The product only reaches top degree when the qubits' sectors form a
//! permutation; each slot then sees one 1-cochain and Λ-1 zero-cochains,
//! combined by the variant's bracketing.
//!
//! For balanced products each qubit is a class of elementary tensors. Copy 1
//! is fixed at its canonical representative (its sector slot holds the element,
//! other slots the identity) and the remaining copies run over all
//! representatives of their classes.

use std::collections::HashMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::complexes::{cohomology_basis, CssCode, ProductKind};
use crate::error::{Error, Result};
use crate::gf2::BitMatrix;
use crate::orientation::{verify_preorientation, CupVariant, Label, PreOrientation};

#[derive(Clone, Debug)]
pub struct GateCircuit {
    pub arity: usize,
    /// Sorted, duplicate-free; entry c is the qubit index on copy c.
    pub gates: Vec<Vec<usize>>,
    pub code: CssCode,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CircuitJson {
    pub arity: usize,
    pub gates: Vec<Vec<usize>>,
}

impl GateCircuit {
    pub fn new(code: &CssCode, arity: usize, gates: Vec<Vec<usize>>) -> Result<Self> {
        if !(2..=3).contains(&arity) {
            return Err(Error::InvalidParameter(format!("gate arity {arity}")));
        }
        if let Some(g) = gates.iter().find(|g| g.len() != arity || g.iter().any(|&q| q >= code.n)) {
            return Err(Error::Shape(format!("gate {g:?} does not fit arity {arity} on n = {}", code.n)));
        }
        // mod-2 cancellation
        let mut counts: HashMap<Vec<usize>, bool> = HashMap::new();
        for g in gates {
            *counts.entry(g).or_default() ^= true;
        }
        let mut gates: Vec<Vec<usize>> = counts.into_iter().filter(|(_, odd)| *odd).map(|(g, _)| g).collect();
        gates.sort_unstable();
        Ok(GateCircuit { arity, gates, code: code.clone() })
    }

    pub fn len(&self) -> usize {
        self.gates.len()
    }

    pub fn is_empty(&self) -> bool {
        self.gates.is_empty()
    }

    pub fn to_json(&self) -> CircuitJson {
        CircuitJson { arity: self.arity, gates: self.gates.clone() }
    }

    pub fn from_json(code: &CssCode, json: &CircuitJson) -> Result<Self> {
        GateCircuit::new(code, json.arity, json.gates.clone())
    }
}

fn check_orientations(code: &CssCode, orientations: &[PreOrientation]) -> Result<()> {
    if orientations.len() != code.lambda() {
        return Err(Error::Shape(format!(
            "{} orientations for a {}-fold product",
            orientations.len(),
            code.lambda()
        )));
    }
    for (s, (po, input)) in orientations.iter().zip(&code.inputs).enumerate() {
        if po.element() != input.coboundary() {
            return Err(Error::InvalidLabeling(format!(
                "orientation {s} labels {}, but the slot coboundary is {}",
                po.element(),
                input.coboundary()
            )));
        }
    }
    Ok(())
}

/// Cup product of one slot is nonzero: `values[j]` is the 1-cochain, the rest zero-cochains.
fn slot_rule(po: &PreOrientation, variant: CupVariant, values: &[usize], j: usize) -> bool {
    let g = po.group();
    let x = values[j];
    let rel = |y: usize, want: Label| po.label_of(g.mul(x, g.inv(y))) == Some(want);
    let pre = &values[..j];
    let post = &values[j + 1..];
    let lambda = values.len();
    // with two copies all bracketings agree
    let variant = if lambda == 2 { CupVariant::Symmetric } else { variant };
    match variant {
        CupVariant::Symmetric => {
            pre.iter().all(|&y| rel(y, Label::Out)) && post.iter().all(|&y| rel(y, Label::In))
        }
        CupVariant::NonAssociative => {
            pre.iter().all(|&y| y == values[0])
                && pre.first().is_none_or(|&y| rel(y, Label::Out))
                && post.iter().all(|&y| rel(y, Label::In))
        }
        CupVariant::OutsideIn => {
            pre.iter().all(|&y| y == values[0])
                && post.iter().all(|&y| y == post[0])
                && pre.first().is_none_or(|&y| rel(y, Label::Out))
                && post.first().is_none_or(|&y| rel(y, Label::In))
        }
    }
}

/// Sector of each copy's qubit forms a permutation; returns slot -> copy.
fn sector_permutation(sectors: &[usize]) -> Option<Vec<usize>> {
    let mut owner = vec![usize::MAX; sectors.len()];
    for (c, &s) in sectors.iter().enumerate() {
        if s >= sectors.len() || owner[s] != usize::MAX {
            return None;
        }
        owner[s] = c;
    }
    Some(owner)
}

fn check_variant(lambda: usize, variant: CupVariant) -> Result<()> {
    if lambda == 3 && variant == CupVariant::OutsideIn {
        return Err(Error::Unsupported("gate synthesis for the outside-in cup product".into()));
    }
    Ok(())
}

/// ∫ x_1 ∪ … ∪ x_Λ for basis 1-cochains (one qubit per copy), by expanding every
/// class over all its representatives. Slow; used as the reference.
pub fn cup_integral_direct(
    code: &CssCode,
    qubits: &[usize],
    orientations: &[PreOrientation],
    variant: CupVariant,
) -> Result<bool> {
    check_orientations(code, orientations)?;
    let lambda = code.lambda();
    check_variant(lambda, variant)?;
    if qubits.len() != lambda {
        return Err(Error::Shape(format!("{} qubits for {lambda} copies", qubits.len())));
    }
    if let Some(&q) = qubits.iter().find(|&&q| q >= code.n) {
        return Err(Error::InvalidParameter(format!("qubit {q} out of range")));
    }
    let labels: Vec<_> = qubits.iter().map(|&q| code.qubit(q)).collect();
    let sectors: Vec<usize> = labels.iter().map(|l| l.sector).collect();
    let Some(owner) = sector_permutation(&sectors) else {
        return Ok(false);
    };
    let g = code.group();
    let evaluate = |entries: &[Vec<usize>]| -> bool {
        // entries[c][s]: value copy c puts in slot s
        (0..lambda).all(|s| {
            let vals: Vec<usize> = (0..lambda).map(|c| entries[c][s]).collect();
            slot_rule(&orientations[s], variant, &vals, owner[s])
        })
    };
    match code.product {
        ProductKind::Hypergraph => {
            let entries: Vec<Vec<usize>> = labels.iter().map(|l| code.coordinates(l.element)).collect();
            Ok(evaluate(&entries))
        }
        ProductKind::Balanced => {
            if !g.is_abelian() {
                return Err(Error::Unsupported("balanced cup integral over a non-abelian group".into()));
            }
            let n = g.order();
            let mut first = vec![0usize; lambda];
            first[sectors[0]] = labels[0].element;
            // free choices: the first Λ-1 slots of every other copy
            let free = (lambda - 1) * (lambda - 1);
            let total = n.pow(free as u32);
            let mut parity = false;
            let mut digits = vec![0usize; free];
            for code_idx in 0..total {
                let mut t = code_idx;
                for d in digits.iter_mut() {
                    *d = t % n;
                    t /= n;
                }
                let mut entries = vec![first.clone()];
                for c in 1..lambda {
                    let chosen = &digits[(c - 1) * (lambda - 1)..c * (lambda - 1)];
                    let prod = chosen.iter().fold(0, |acc, &x| g.mul(acc, x));
                    let last = g.mul(g.inv(prod), labels[c].element);
                    let mut row = chosen.to_vec();
                    row.push(last);
                    entries.push(row);
                }
                if evaluate(&entries) {
                    parity ^= true;
                }
            }
            Ok(parity)
        }
    }
}

/// Value tuples (one per copy) making a slot nonzero; with `pin_first` copy 0 holds the identity.
fn slot_tuples(po: &PreOrientation, variant: CupVariant, lambda: usize, j: usize, pin_first: bool) -> Vec<Vec<usize>> {
    let g = po.group();
    let n = g.order();
    let near: Vec<usize> = po.in_set().iter().chain(po.out_set()).copied().collect();
    let mut out = Vec::new();
    let xs: Vec<usize> = if pin_first && j == 0 { vec![0] } else { (0..n).collect() };
    for x in xs {
        // zero-cochain values y with x·y^-1 labeled: y = s^-1 x
        let cands: Vec<usize> = near.iter().map(|&s| g.mul(g.inv(s), x)).collect();
        let mut vals = vec![0usize; lambda];
        vals[j] = x;
        let others: Vec<usize> = (0..lambda).filter(|&k| k != j).collect();
        let mut idx = vec![0usize; others.len()];
        'outer: loop {
            let mut ok = true;
            for (t, &k) in others.iter().enumerate() {
                vals[k] = cands[idx[t]];
                if pin_first && k == 0 && vals[k] != 0 {
                    ok = false;
                }
            }
            if ok && slot_rule(po, variant, &vals, j) {
                out.push(vals.clone());
            }
            for t in 0..idx.len() {
                idx[t] += 1;
                if idx[t] < cands.len() {
                    continue 'outer;
                }
                idx[t] = 0;
            }
            break;
        }
    }
    out.sort_unstable();
    out.dedup();
    out
}

fn permutations(n: usize) -> Vec<Vec<usize>> {
    if n == 0 {
        return vec![vec![]];
    }
    let mut out = Vec::new();
    for p in permutations(n - 1) {
        for i in 0..=p.len() {
            let mut q = p.clone();
            q.insert(i, n - 1);
            out.push(q);
        }
    }
    out.sort();
    out
}

/// Gates for all qubit tuples, without checking the orientations.
pub fn synthesize_circuit(
    code: &CssCode,
    orientations: &[PreOrientation],
    variant: CupVariant,
) -> Result<GateCircuit> {
    check_orientations(code, orientations)?;
    let lambda = code.lambda();
    check_variant(lambda, variant)?;
    let g = code.group().clone();
    let gates: Vec<Vec<usize>> = permutations(lambda)
        .into_par_iter()
        .flat_map_iter(|sectors| {
            // slot s carries the 1-cochain of copy owner[s]
            let owner = sector_permutation(&sectors).expect("permutation");
            let pinned = code.product == ProductKind::Balanced;
            let lists: Vec<Vec<Vec<usize>>> = (0..lambda)
                .map(|s| slot_tuples(&orientations[s], variant, lambda, owner[s], pinned))
                .collect();
            let mut counts: HashMap<Vec<usize>, bool> = HashMap::new();
            let mut pick = vec![0usize; lambda];
            if lists.iter().all(|l| !l.is_empty()) {
                'outer: loop {
                    let key: Vec<usize> = match code.product {
                        ProductKind::Balanced => (1..lambda)
                            .map(|c| (0..lambda).fold(0, |acc, s| g.mul(acc, lists[s][pick[s]][c])))
                            .collect(),
                        ProductKind::Hypergraph => (0..lambda)
                            .map(|c| {
                                let coords: Vec<usize> = (0..lambda).map(|s| lists[s][pick[s]][c]).collect();
                                code.element_from_coordinates(&coords)
                            })
                            .collect(),
                    };
                    *counts.entry(key).or_default() ^= true;
                    for s in 0..lambda {
                        pick[s] += 1;
                        if pick[s] < lists[s].len() {
                            continue 'outer;
                        }
                        pick[s] = 0;
                    }
                    break;
                }
            }
            let mut gates = Vec::new();
            for (key, odd) in counts {
                if !odd {
                    continue;
                }
                match code.product {
                    ProductKind::Hypergraph => gates.push(
                        (0..lambda)
                            .map(|c| code.qubit_index(crate::complexes::QubitLabel { sector: sectors[c], element: key[c] }))
                            .collect(),
                    ),
                    ProductKind::Balanced => {
                        // translate the pinned copy over the whole group
                        for e1 in 0..g.order() {
                            let mut gate = vec![code.qubit_index(crate::complexes::QubitLabel {
                                sector: sectors[0],
                                element: e1,
                            })];
                            for c in 1..lambda {
                                gate.push(code.qubit_index(crate::complexes::QubitLabel {
                                    sector: sectors[c],
                                    element: g.mul(key[c - 1], e1),
                                }));
                            }
                            gates.push(gate);
                        }
                    }
                }
            }
            gates
        })
        .collect();
    GateCircuit::new(code, lambda, gates)
}

fn require_valid(orientations: &[PreOrientation], lambda: usize, variant: CupVariant) -> Result<()> {
    for (s, po) in orientations.iter().enumerate() {
        if !verify_preorientation(po, lambda, variant)? {
            return Err(Error::InvalidLabeling(format!(
                "orientation {s} ({po:?}) fails the master equations for {lambda} copies, {variant}"
            )));
        }
    }
    Ok(())
}

pub fn synth_cz_circuit(code: &CssCode, orientations: &[PreOrientation]) -> Result<GateCircuit> {
    if code.lambda() != 2 {
        return Err(Error::InvalidParameter("CZ synthesis needs a square-product code".into()));
    }
    check_orientations(code, orientations)?;
    require_valid(orientations, 2, CupVariant::Symmetric)?;
    synthesize_circuit(code, orientations, CupVariant::Symmetric)
}

pub fn synth_ccz_circuit(
    code: &CssCode,
    orientations: &[PreOrientation],
    variant: CupVariant,
) -> Result<GateCircuit> {
    if code.lambda() != 3 {
        return Err(Error::InvalidParameter("CCZ synthesis needs a cube-product code".into()));
    }
    check_variant(3, variant)?;
    check_orientations(code, orientations)?;
    require_valid(orientations, 3, variant)?;
    synthesize_circuit(code, orientations, variant)
}

/// Two-copy closed form: number of in/out coincidences between the qubits' elements.
pub fn cz_closed_form_count(code: &CssCode, q1: usize, q2: usize, orientations: &[PreOrientation]) -> Result<usize> {
    check_orientations(code, orientations)?;
    if code.lambda() != 2 || code.product != ProductKind::Balanced {
        return Err(Error::InvalidParameter("closed form covers balanced square codes".into()));
    }
    let (a, b) = (code.qubit(q1), code.qubit(q2));
    if a.sector == b.sector {
        return Ok(0);
    }
    let g = code.group();
    let (e1, e2) = (a.element, b.element);
    Ok(if a.sector == 0 {
        // #{s ∈ in_0 : s e1^-1 e2 ∈ out_1}
        let shift = g.mul(g.inv(e1), e2);
        orientations[0]
            .in_set()
            .iter()
            .filter(|&&s| orientations[1].label_of(g.mul(s, shift)) == Some(Label::Out))
            .count()
    } else {
        // #{u ∈ out_0 : e1 e2^-1 u ∈ in_1}
        let shift = g.mul(e1, g.inv(e2));
        orientations[0]
            .out_set()
            .iter()
            .filter(|&&u| orientations[1].label_of(g.mul(shift, u)) == Some(Label::In))
            .count()
    })
}

/// Z-type stabilizer test on ker(H_Z) bases.
pub fn preserves_codespace(circuit: &GateCircuit) -> bool {
    let code = &circuit.code;
    let n = code.n;
    let kernel = code.hz.kernel_basis();
    let krows = kernel.row_vecs();
    match circuit.arity {
        2 => {
            // C[i][j] = 1 for gate (i, j)
            let mut c = BitMatrix::zeros(n, n);
            for gte in &circuit.gates {
                c.set(gte[0], gte[1], true);
            }
            let kt = kernel.transpose();
            let left = code.hx.mul(&c).and_then(|m| m.mul(&kt));
            let right = kernel.mul(&c).and_then(|m| m.mul(&code.hx.transpose()));
            matches!((left, right), (Ok(l), Ok(r)) if l.is_zero() && r.is_zero())
        }
        3 => {
            // for each copy c and X-check s: bilinear form on the other two copies
            (0..3).all(|c| {
                let (o1, o2) = ((c + 1) % 3, (c + 2) % 3);
                let mut by_qubit: HashMap<usize, Vec<(usize, usize)>> = HashMap::new();
                for gte in &circuit.gates {
                    by_qubit.entry(gte[c]).or_default().push((gte[o1], gte[o2]));
                }
                (0..code.hx.rows()).into_par_iter().all(|s| {
                    let mut b = BitMatrix::zeros(n, n);
                    for q in code.hx.row_support(s) {
                        if let Some(list) = by_qubit.get(&q) {
                            for &(i, j) in list {
                                b.flip(i, j);
                            }
                        }
                    }
                    if b.is_zero() {
                        return true;
                    }
                    krows.iter().all(|u| {
                        let ub = b.vec_mul(u).expect("shape");
                        krows.iter().all(|v| !ub.dot(v))
                    })
                })
            })
        }
        _ => false,
    }
}

/// Some pair of X-logical representatives sees an odd number of gates.
pub fn logical_action_cz(circuit: &GateCircuit) -> bool {
    let basis = cohomology_basis(&circuit.code);
    logical_action_with_bases(circuit, &[&basis, &basis])
}

/// Some triple of X-logical representatives sees an odd number of gates.
pub fn logical_action_ccz(circuit: &GateCircuit) -> bool {
    let basis = cohomology_basis(&circuit.code);
    logical_action_with_bases(circuit, &[&basis, &basis, &basis])
}

/// The loop over basis tuples, accumulating gate overlaps mod 2.
pub fn logical_action_with_bases(circuit: &GateCircuit, bases: &[&BitMatrix]) -> bool {
    if bases.len() != circuit.arity || circuit.gates.is_empty() {
        return false;
    }
    let reps: Vec<Vec<crate::gf2::BitVec>> = bases.iter().map(|b| b.row_vecs()).collect();
    let mut idx = vec![0usize; bases.len()];
    if reps.iter().any(Vec::is_empty) {
        return false;
    }
    loop {
        let mut parity = false;
        for gte in &circuit.gates {
            if gte.iter().zip(&idx).enumerate().all(|(c, (&q, &r))| reps[c][r].get(q)) {
                parity ^= true;
            }
        }
        if parity {
            return true;
        }
        let mut c = 0;
        loop {
            if c == idx.len() {
                return false;
            }
            idx[c] += 1;
            if idx[c] < reps[c].len() {
                break;
            }
            idx[c] = 0;
            c += 1;
        }
    }
}

/// Per-tuple integrals of a logical action: the full cubic / bilinear form on basis tuples.
pub fn logical_form(circuit: &GateCircuit, bases: &[&BitMatrix]) -> Vec<(Vec<usize>, bool)> {
    let reps: Vec<Vec<crate::gf2::BitVec>> = bases.iter().map(|b| b.row_vecs()).collect();
    let mut out = Vec::new();
    let mut idx = vec![0usize; bases.len()];
    if reps.iter().any(Vec::is_empty) {
        return out;
    }
    loop {
        let parity = circuit
            .gates
            .iter()
            .filter(|gte| gte.iter().zip(&idx).enumerate().all(|(c, (&q, &r))| reps[c][r].get(q)))
            .count()
            % 2
            == 1;
        out.push((idx.clone(), parity));
        let mut c = 0;
        loop {
            if c == idx.len() {
                return out;
            }
            idx[c] += 1;
            if idx[c] < reps[c].len() {
                break;
            }
            idx[c] = 0;
            c += 1;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::complexes::{build_product_code, TwoTermComplex};
    use crate::groups::{FiniteGroup, GroupAlgebraElement};

    fn complex(orders: &[usize], check: &str) -> TwoTermComplex {
        let g = FiniteGroup::abelian(orders).unwrap();
        TwoTermComplex::from_check(GroupAlgebraElement::parse(&g, check).unwrap())
    }

    /// First nontrivial labeling of the coboundary valid for Λ copies.
    fn orient(c: &TwoTermComplex, lambda: usize, v: CupVariant) -> PreOrientation {
        crate::orientation::enumerate_preorientations(c.coboundary(), lambda, v, crate::orientation::Mode::Oracle)
            .unwrap()
            .into_iter()
            .next()
            .expect("valid labeling")
    }

    #[test]
    fn c2_square_matches_closed_form_and_oracle() {
        let a = complex(&[2], "1+x");
        let code = build_product_code(&[a.clone(), a.clone()], ProductKind::Balanced).unwrap();
        let g = code.group().clone();
        let po = PreOrientation::new(a.coboundary(), &[0], &[g.parse_monomial("x").unwrap()], &[]).unwrap();
        let ors = [po.clone(), po];
        let circuit = synth_cz_circuit(&code, &ors).unwrap();
        for q1 in 0..code.n {
            for q2 in 0..code.n {
                let direct = cup_integral_direct(&code, &[q1, q2], &ors, CupVariant::Symmetric).unwrap();
                let closed = cz_closed_form_count(&code, q1, q2, &ors).unwrap() % 2 == 1;
                assert_eq!(direct, closed);
                assert_eq!(direct, circuit.gates.contains(&vec![q1, q2]));
            }
        }
        assert!(preserves_codespace(&circuit));
    }

    #[test]
    fn cube_oracle_agreement_c3() {
        let a = complex(&[3], "1+x");
        let code = build_product_code(&[a.clone(), a.clone(), a.clone()], ProductKind::Balanced).unwrap();
        for v in [CupVariant::NonAssociative, CupVariant::Symmetric] {
            let po = orient(&a, 3, v);
            let ors = [po.clone(), po.clone(), po];
            let circuit = synth_ccz_circuit(&code, &ors, v).unwrap();
            for q1 in 0..code.n {
                for q2 in 0..code.n {
                    for q3 in 0..code.n {
                        let d = cup_integral_direct(&code, &[q1, q2, q3], &ors, v).unwrap();
                        assert_eq!(d, circuit.gates.contains(&vec![q1, q2, q3]), "{v} {q1} {q2} {q3}");
                    }
                }
            }
            assert!(preserves_codespace(&circuit));
        }
    }

    #[test]
    fn errors_and_trivial_cases() {
        let a = complex(&[3], "1+x");
        let sq = build_product_code(&[a.clone(), a.clone()], ProductKind::Balanced).unwrap();
        let cube = build_product_code(&[a.clone(), a.clone(), a.clone()], ProductKind::Balanced).unwrap();
        let po = orient(&a, 3, CupVariant::Symmetric);
        assert!(synth_cz_circuit(&cube, &[po.clone(), po.clone()]).is_err());
        assert!(synth_ccz_circuit(&sq, &[po.clone(), po.clone(), po.clone()], CupVariant::Symmetric).is_err());
        assert!(matches!(
            synth_ccz_circuit(&cube, &[po.clone(), po.clone(), po.clone()], CupVariant::OutsideIn),
            Err(Error::Unsupported(_))
        ));
        let empty = GateCircuit::new(&sq, 2, vec![]).unwrap();
        assert!(preserves_codespace(&empty));
        assert!(!logical_action_cz(&empty));
        let doubled = GateCircuit::new(&sq, 2, vec![vec![0, 1], vec![0, 1]]).unwrap();
        assert!(doubled.is_empty());
        assert!(GateCircuit::new(&sq, 2, vec![vec![0, 99]]).is_err());
    }
}
