//! Square and cube product complexes, the CSS codes they define, and distances.

use std::collections::HashMap;
use std::sync::atomic::{AtomicBool, Ordering};
use std::sync::Arc;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gf2::{ones, xor_words, BitMatrix, BitVec, RowSpace};
use crate::groups::{regular_representation, same_group, FiniteGroup, GroupAlgebraElement};

/// Default ceiling on enumerated candidates for exhaustive distance search.
pub const DEFAULT_DISTANCE_CEILING: u128 = 200_000_000;

/// The complex R -> R with coboundary δ = antipode(α).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TwoTermComplex {
    check: GroupAlgebraElement,
    coboundary: GroupAlgebraElement,
}

impl TwoTermComplex {
    pub fn from_check(check: GroupAlgebraElement) -> Self {
        let coboundary = check.antipode();
        TwoTermComplex { check, coboundary }
    }

    pub fn from_coboundary(coboundary: GroupAlgebraElement) -> Self {
        let check = coboundary.antipode();
        TwoTermComplex { check, coboundary }
    }

    pub fn check(&self) -> &GroupAlgebraElement {
        &self.check
    }

    pub fn coboundary(&self) -> &GroupAlgebraElement {
        &self.coboundary
    }

    pub fn group(&self) -> &Arc<FiniteGroup> {
        self.check.group()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ProductKind {
    Balanced,
    Hypergraph,
}

impl std::str::FromStr for ProductKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "balanced" => Ok(ProductKind::Balanced),
            "hypergraph" | "hgp" => Ok(ProductKind::Hypergraph),
            _ => Err(Error::Parse(format!("unknown product kind {s:?}"))),
        }
    }
}

/// Which sector a qubit lives in and its element within the sector.
///
/// Sector `s` is the summand whose slot `s` carries the 1-cochain. For balanced
/// products `element` is a group element index; for hypergraph products it is the
/// row-major index of the per-slot coordinate tuple.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct QubitLabel {
    pub sector: usize,
    pub element: usize,
}

#[derive(Clone, Debug)]
pub struct CssCode {
    pub hx: BitMatrix,
    pub hz: BitMatrix,
    pub n: usize,
    pub k: usize,
    pub product: ProductKind,
    pub inputs: Vec<TwoTermComplex>,
    group: Arc<FiniteGroup>,
    sector_size: usize,
}

impl CssCode {
    /// Number of tensor factors (2 = square, 3 = cube).
    pub fn lambda(&self) -> usize {
        self.inputs.len()
    }

    pub fn group(&self) -> &Arc<FiniteGroup> {
        &self.group
    }

    pub fn sector_size(&self) -> usize {
        self.sector_size
    }

    pub fn qubit(&self, q: usize) -> QubitLabel {
        QubitLabel { sector: q / self.sector_size, element: q % self.sector_size }
    }

    pub fn qubit_index(&self, label: QubitLabel) -> usize {
        label.sector * self.sector_size + label.element
    }

    pub fn sectors(&self) -> Vec<QubitLabel> {
        (0..self.n).map(|q| self.qubit(q)).collect()
    }

    /// Per-slot coordinates of a hypergraph-product sector element.
    pub fn coordinates(&self, element: usize) -> Vec<usize> {
        let g = self.group.order();
        let mut c = vec![0; self.lambda()];
        let mut e = element;
        for k in (0..self.lambda()).rev() {
            c[k] = e % g;
            e /= g;
        }
        c
    }

    pub fn element_from_coordinates(&self, coords: &[usize]) -> usize {
        coords.iter().fold(0, |acc, &c| acc * self.group.order() + c)
    }

    /// Qubits representing each translation orbit.
    fn orbit_representatives(&self) -> Vec<usize> {
        (0..self.lambda()).map(|s| s * self.sector_size).collect()
    }

    pub fn parameters(&self) -> (usize, usize) {
        (self.n, self.k)
    }
}

/// Slot map: δ acting on slot `slot` of a sector of size `sector_size`.
fn slot_map(input: &TwoTermComplex, slot: usize, lambda: usize, product: ProductKind) -> BitMatrix {
    let m = regular_representation(input.coboundary());
    match product {
        ProductKind::Balanced => m,
        ProductKind::Hypergraph => {
            let id = BitMatrix::identity(input.group().order());
            let mut acc: Option<BitMatrix> = None;
            for s in 0..lambda {
                let f = if s == slot { &m } else { &id };
                acc = Some(match acc {
                    None => f.clone(),
                    Some(a) => a.kron(f),
                });
            }
            acc.expect("lambda >= 1")
        }
    }
}

pub fn build_product_code(inputs: &[TwoTermComplex], product: ProductKind) -> Result<CssCode> {
    let lambda = inputs.len();
    if !(2..=3).contains(&lambda) {
        return Err(Error::InvalidParameter(format!(
            "products need 2 or 3 inputs, got {lambda}"
        )));
    }
    let group = inputs[0].group().clone();
    if inputs.iter().any(|c| !same_group(c.group(), &group)) {
        return Err(Error::GroupMismatch("inputs are over different groups".into()));
    }
    if product == ProductKind::Balanced && !group.is_abelian() {
        return Err(Error::Unsupported("balanced products over non-abelian groups".into()));
    }
    let maps: Vec<BitMatrix> =
        (0..lambda).map(|s| slot_map(&inputs[s], s, lambda, product)).collect();
    let sector_size = maps[0].rows();
    let transposed: Vec<BitMatrix> = maps.iter().map(BitMatrix::transpose).collect();
    let hx = BitMatrix::hstack(&transposed.iter().collect::<Vec<_>>())?;
    let zero = BitMatrix::zeros(sector_size, sector_size);
    let mut blocks = Vec::new();
    for s in 0..lambda {
        for t in (s + 1)..lambda {
            let row: Vec<&BitMatrix> = (0..lambda)
                .map(|c| if c == s { &maps[t] } else if c == t { &maps[s] } else { &zero })
                .collect();
            blocks.push(BitMatrix::hstack(&row)?);
        }
    }
    let hz = BitMatrix::vstack(&blocks.iter().collect::<Vec<_>>())?;
    if !hx.mul(&hz.transpose())?.is_zero() {
        return Err(Error::Invariant("H_X H_Z^T != 0".into()));
    }
    let n = hx.cols();
    let k = n - hx.rank() - hz.rank();
    Ok(CssCode { hx, hz, n, k, product, inputs: inputs.to_vec(), group, sector_size })
}

/// Representatives of ker(a) modulo rowspace(b), one per row.
fn quotient_basis(a: &BitMatrix, b: &BitMatrix) -> BitMatrix {
    let kernel = a.kernel_basis();
    let stab = b.row_space();
    let mut span = (*stab).clone();
    let mut reps = Vec::new();
    for v in kernel.row_vecs() {
        if span.insert(&v) {
            reps.push(stab.reduce(&v));
        }
    }
    BitMatrix::from_rows(a.cols(), &reps).expect("rows share column count")
}

/// X-logical representatives: ker H_Z modulo rowspace H_X.
pub fn cohomology_basis(code: &CssCode) -> BitMatrix {
    quotient_basis(&code.hz, &code.hx)
}

/// Z-logical representatives: ker H_X modulo rowspace H_Z.
pub fn homology_basis(code: &CssCode) -> BitMatrix {
    quotient_basis(&code.hx, &code.hz)
}

#[derive(Clone, Copy, Debug)]
pub struct DistanceOptions {
    pub ceiling: u128,
    /// Fix one support element to a translation-orbit representative.
    pub use_symmetry: bool,
}

impl Default for DistanceOptions {
    fn default() -> Self {
        DistanceOptions { ceiling: DEFAULT_DISTANCE_CEILING, use_symmetry: true }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SideDistances {
    /// Minimum weight of an X-type logical (ker H_Z \ rowspace H_X).
    pub x: Option<usize>,
    /// Minimum weight of a Z-type logical (ker H_X \ rowspace H_Z).
    pub z: Option<usize>,
}

impl SideDistances {
    pub fn min(&self) -> Option<usize> {
        match (self.x, self.z) {
            (Some(a), Some(b)) => Some(a.min(b)),
            (a, b) => a.or(b),
        }
    }
}

fn binomial(n: u128, k: u128) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut r: u128 = 1;
    for i in 0..k {
        r = r.saturating_mul(n - i) / (i + 1);
    }
    r
}

/// Number of enumerated prefixes an exhaustive search up to `w_max` visits.
pub fn exhaustive_cost(code: &CssCode, w_max: usize, opts: &DistanceOptions) -> u128 {
    let n = code.n as u128;
    let (anchors, pool) = if opts.use_symmetry {
        (code.orbit_representatives().len() as u128, n.saturating_sub(1))
    } else {
        (1, n)
    };
    (1..=w_max as u128)
        .map(|w| {
            if opts.use_symmetry {
                if w == 1 {
                    anchors
                } else {
                    anchors.saturating_mul(binomial(pool, w - 2))
                }
            } else {
                binomial(pool, w.saturating_sub(1))
            }
        })
        .fold(0u128, u128::saturating_add)
}

struct SideSearch<'a> {
    n: usize,
    stride: usize,
    columns: Vec<u64>,
    lookup: HashMap<Vec<u64>, Vec<usize>>,
    stabilizers: &'a RowSpace,
}

impl<'a> SideSearch<'a> {
    fn new(h: &BitMatrix, stabilizers: &'a RowSpace) -> Self {
        let ht = h.transpose();
        let n = h.cols();
        let stride = h.rows().div_ceil(64);
        let mut columns = vec![0u64; n * stride];
        let mut lookup: HashMap<Vec<u64>, Vec<usize>> = HashMap::new();
        for q in 0..n {
            let w = ht.row_words(q);
            columns[q * stride..(q + 1) * stride].copy_from_slice(w);
            lookup.entry(w.to_vec()).or_default().push(q);
        }
        SideSearch { n, stride, columns, lookup, stabilizers }
    }

    fn column(&self, q: usize) -> &[u64] {
        &self.columns[q * self.stride..(q + 1) * self.stride]
    }

    fn is_logical(&self, support: &[usize]) -> bool {
        let v = BitVec::from_support(self.n, support);
        !self.stabilizers.contains(&v)
    }

    /// Does a logical of weight exactly `w` contain `anchor` (if given)?
    fn exists_with(&self, anchor: Option<usize>, first: usize, w: usize, stop: &AtomicBool) -> bool {
        let mut chosen: Vec<usize> = Vec::with_capacity(w);
        let mut syn = vec![0u64; self.stride];
        if let Some(a) = anchor {
            chosen.push(a);
            xor_words(&mut syn, self.column(a));
        }
        if chosen.len() == w {
            return syn.iter().all(|&x| x == 0) && self.is_logical(&chosen);
        }
        if first == anchor.unwrap_or(usize::MAX) {
            return false;
        }
        chosen.push(first);
        xor_words(&mut syn, self.column(first));
        self.dfs(anchor, &mut chosen, &mut syn, first, w, stop)
    }

    fn dfs(
        &self,
        anchor: Option<usize>,
        chosen: &mut Vec<usize>,
        syn: &mut [u64],
        last: usize,
        w: usize,
        stop: &AtomicBool,
    ) -> bool {
        if chosen.len() == w {
            return syn.iter().all(|&x| x == 0) && self.is_logical(chosen);
        }
        if stop.load(Ordering::Relaxed) {
            return false;
        }
        if chosen.len() + 1 == w {
            let Some(cands) = self.lookup.get(&*syn) else {
                return false;
            };
            for &c in cands {
                if c > last && Some(c) != anchor {
                    chosen.push(c);
                    let ok = self.is_logical(chosen);
                    chosen.pop();
                    if ok {
                        return true;
                    }
                }
            }
            return false;
        }
        for next in (last + 1)..self.n {
            if Some(next) == anchor {
                continue;
            }
            xor_words(syn, self.column(next));
            chosen.push(next);
            let found = self.dfs(anchor, chosen, syn, next, w, stop);
            chosen.pop();
            xor_words(syn, self.column(next));
            if found {
                return true;
            }
        }
        false
    }
}

/// Smallest weight ≤ w_max of a vector in ker(h) outside rowspace(stab).
fn min_logical_weight(
    h: &BitMatrix,
    stab: &BitMatrix,
    anchors: Option<&[usize]>,
    w_max: usize,
) -> Option<usize> {
    let rs = stab.row_space();
    let search = SideSearch::new(h, &rs);
    let n = h.cols();
    for w in 1..=w_max.min(n) {
        let stop = AtomicBool::new(false);
        let found = match anchors {
            Some(anchors) => {
                if w == 1 {
                    anchors.iter().any(|&a| search.exists_with(Some(a), 0, 1, &stop))
                } else {
                    let jobs: Vec<(usize, usize)> = anchors
                        .iter()
                        .flat_map(|&a| (0..n).map(move |f| (a, f)))
                        .filter(|&(a, f)| a != f)
                        .collect();
                    jobs.par_iter().any(|&(a, f)| {
                        let hit = search.exists_with(Some(a), f, w, &stop);
                        if hit {
                            stop.store(true, Ordering::Relaxed);
                        }
                        hit
                    })
                }
            }
            None => (0..n).into_par_iter().any(|f| {
                let mut chosen = vec![f];
                let mut syn = search.column(f).to_vec();
                let hit = search.dfs(None, &mut chosen, &mut syn, f, w, &stop);
                if hit {
                    stop.store(true, Ordering::Relaxed);
                }
                hit
            }),
        };
        if found {
            return Some(w);
        }
    }
    None
}

/// Exact minimum logical weight on each side, searching weights up to `w_max`.
pub fn distance_sides_exact(
    code: &CssCode,
    w_max: usize,
    opts: &DistanceOptions,
) -> Result<SideDistances> {
    if w_max == 0 {
        return Err(Error::InvalidParameter("w_max must be at least 1".into()));
    }
    let needed = exhaustive_cost(code, w_max, opts);
    if needed > opts.ceiling {
        return Err(Error::BudgetExceeded { needed, ceiling: opts.ceiling });
    }
    if code.k == 0 {
        return Ok(SideDistances { x: None, z: None });
    }
    let reps = code.orbit_representatives();
    let anchors = opts.use_symmetry.then_some(reps.as_slice());
    let x = min_logical_weight(&code.hz, &code.hx, anchors, w_max);
    let z = min_logical_weight(&code.hx, &code.hz, anchors, w_max);
    Ok(SideDistances { x, z })
}

/// Minimum weight of a nontrivial logical if it is at most `w_max`, else `None`.
pub fn distance_exact_by_weight(code: &CssCode, w_max: usize) -> Result<Option<usize>> {
    Ok(distance_sides_exact(code, w_max, &DistanceOptions::default())?.min())
}

fn random_side(h: &BitMatrix, stab: &BitMatrix, trials: usize, seed: u64, salt: u64) -> Option<usize> {
    let kernel = h.kernel_basis();
    let n = h.cols();
    let rs = stab.row_space();
    if kernel.rows() == 0 {
        return None;
    }
    // Rows of the kernel that are already logical give an initial bound.
    let initial = kernel
        .row_vecs()
        .iter()
        .filter(|v| !rs.contains(v))
        .map(BitVec::weight)
        .min()?;
    let best = (0..trials)
        .into_par_iter()
        .map(|t| {
            let mut rng = ChaCha8Rng::seed_from_u64(
                seed ^ salt.wrapping_mul(0x9e37_79b9_7f4a_7c15) ^ (t as u64).wrapping_mul(0xd1b5_4a32_d192_ed03),
            );
            let mut perm: Vec<usize> = (0..n).collect();
            perm.shuffle(&mut rng);
            probe(&kernel, &perm, &rs, initial)
        })
        .min()
        .unwrap_or(initial);
    Some(best.min(initial))
}

/// One information-set probe: echelonize the kernel in permuted column order and
/// scan single rows and pairs of rows for light logicals.
fn probe(kernel: &BitMatrix, perm: &[usize], stabilizers: &RowSpace, bound: usize) -> usize {
    let n = kernel.cols();
    let mut permuted = BitMatrix::zeros(kernel.rows(), n);
    for r in 0..kernel.rows() {
        for c in ones(kernel.row_words(r)) {
            permuted.set(r, perm[c], true);
        }
    }
    let ech = permuted.row_space();
    let rows: Vec<BitVec> = ech.basis().row_vecs();
    let mut inv = vec![0; n];
    for (c, &p) in perm.iter().enumerate() {
        inv[p] = c;
    }
    let unpermute = |v: &BitVec| {
        let support: Vec<usize> = v.support().iter().map(|&p| inv[p]).collect();
        BitVec::from_support(n, &support)
    };
    let mut best = bound;
    let consider = |v: &BitVec, best: &mut usize| {
        let w = v.weight();
        if w < *best && w > 0 && !stabilizers.contains(&unpermute(v)) {
            *best = w;
        }
    };
    for v in &rows {
        consider(v, &mut best);
    }
    let mut tmp = BitVec::zeros(n);
    for i in 0..rows.len() {
        for j in (i + 1)..rows.len() {
            let w: usize = rows[i]
                .words()
                .iter()
                .zip(rows[j].words())
                .map(|(a, b)| (a ^ b).count_ones() as usize)
                .sum();
            if w < best {
                tmp.clone_from(&rows[i]);
                tmp.xor_assign(&rows[j]);
                consider(&tmp, &mut best);
            }
        }
    }
    best
}

/// Randomized upper bound on each side's minimum logical weight.
pub fn distance_sides_randomized(code: &CssCode, trials: usize, seed: u64) -> SideDistances {
    let trials = trials.max(1);
    SideDistances {
        x: random_side(&code.hz, &code.hx, trials, seed, 1),
        z: random_side(&code.hx, &code.hz, trials, seed, 2),
    }
}

/// Lightest logical found by randomized probing; `None` when k = 0.
pub fn distance_upper_randomized(code: &CssCode, trials: usize, seed: u64) -> Option<usize> {
    distance_sides_randomized(code, trials, seed).min()
}

/// How a reported distance was obtained.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "method", rename_all = "snake_case")]
pub enum DistanceReport {
    /// Exhaustive search found the minimum.
    Exact { d: usize, x: Option<usize>, z: Option<usize> },
    /// Randomized upper bound matched the exhaustive lower bound.
    Certified { d: usize, trials: usize, seed: u64 },
    /// Only bounds are known: no logical of weight < `lower`, one of weight `upper` exists.
    Bounds { lower: usize, upper: usize, trials: usize, seed: u64 },
    NoLogicals,
}

impl DistanceReport {
    pub fn exact(&self) -> Option<usize> {
        match self {
            DistanceReport::Exact { d, .. } | DistanceReport::Certified { d, .. } => Some(*d),
            _ => None,
        }
    }

    pub fn upper(&self) -> Option<usize> {
        match self {
            DistanceReport::Exact { d, .. } | DistanceReport::Certified { d, .. } => Some(*d),
            DistanceReport::Bounds { upper, .. } => Some(*upper),
            DistanceReport::NoLogicals => None,
        }
    }

    /// Every logical has weight at least this.
    pub fn lower(&self) -> Option<usize> {
        match self {
            DistanceReport::Exact { d, .. } | DistanceReport::Certified { d, .. } => Some(*d),
            DistanceReport::Bounds { lower, .. } => Some(*lower),
            DistanceReport::NoLogicals => None,
        }
    }
}

/// Largest exhaustive weight whose cost fits under the ceiling.
pub fn affordable_weight(code: &CssCode, opts: &DistanceOptions, cap: usize) -> usize {
    let mut w = 0;
    while w < cap && exhaustive_cost(code, w + 1, opts) <= opts.ceiling {
        w += 1;
    }
    w
}

/// Exhaustive search where affordable, otherwise randomized upper bound combined
/// with the exhaustive lower bound.
pub fn distance_auto(
    code: &CssCode,
    w_cap: usize,
    trials: usize,
    seed: u64,
    opts: &DistanceOptions,
) -> Result<DistanceReport> {
    if code.k == 0 {
        return Ok(DistanceReport::NoLogicals);
    }
    let upper = distance_upper_randomized(code, trials, seed).expect("k > 0");
    let reach = affordable_weight(code, opts, w_cap.min(upper));
    if reach == 0 {
        return Ok(DistanceReport::Bounds { lower: 1, upper, trials, seed });
    }
    let sides = distance_sides_exact(code, reach, opts)?;
    if let Some(d) = sides.min() {
        return Ok(DistanceReport::Exact { d, x: sides.x, z: sides.z });
    }
    if reach + 1 >= upper {
        return Ok(DistanceReport::Certified { d: upper, trials, seed });
    }
    Ok(DistanceReport::Bounds { lower: reach + 1, upper, trials, seed })
}

/// Summary of a code for reports.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct CodeReport {
    pub n: usize,
    pub k: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub d_exact: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub d_upper: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub distance: Option<DistanceReport>,
    pub check_weights: CheckWeights,
    pub sectors: Vec<QubitLabel>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CheckWeights {
    pub x: Vec<usize>,
    pub z: Vec<usize>,
    pub qubit_x: Vec<usize>,
    pub qubit_z: Vec<usize>,
}

fn distinct(mut v: Vec<usize>) -> Vec<usize> {
    v.sort_unstable();
    v.dedup();
    v
}

impl CheckWeights {
    /// Distinct row weights of H_X, H_Z and distinct column weights.
    pub fn of(code: &CssCode) -> Self {
        CheckWeights {
            x: distinct(code.hx.row_weights()),
            z: distinct(code.hz.row_weights()),
            qubit_x: distinct(code.hx.col_weights()),
            qubit_z: distinct(code.hz.col_weights()),
        }
    }
}

impl CodeReport {
    pub fn new(code: &CssCode, distance: Option<DistanceReport>) -> Self {
        CodeReport {
            n: code.n,
            k: code.k,
            d_exact: distance.as_ref().and_then(DistanceReport::exact),
            d_upper: distance.as_ref().and_then(DistanceReport::upper),
            distance,
            check_weights: CheckWeights::of(code),
            sectors: code.sectors(),
        }
    }
}
