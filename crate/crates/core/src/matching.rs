//! Symbolic reduction of the master equations and the term-matching search.
//!
//! For each equality pattern of the points a_1..a_Λ the master equation
//! becomes a sum of label terms (one label per distinct point). Expanding a
//! term over the named support elements g_1..g_w gives index tuples; an
//! equation vanishes in a group exactly when its tuples can be paired so that
//! paired tuples satisfy g_{t_u}^-1 g_{t_v} = g_{t'_u}^-1 g_{t'_v} on
//! consecutive positions.

use std::collections::BTreeSet;
use std::fmt;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::orientation::{ConditionSet, CupVariant, Label, PreOrientation, Relation, Signature};

pub const MAX_MATCHING_WEIGHT: usize = 8;

/// One label per distinct point, in order of first appearance.
pub type LabelTerm = Vec<Label>;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct EquationSpec {
    /// Restricted-growth string: which points coincide.
    pub patterns: Vec<Vec<usize>>,
    pub terms: Vec<LabelTerm>,
}

impl EquationSpec {
    pub fn arity(&self) -> usize {
        self.terms.first().map_or(0, Vec::len)
    }

    pub fn term_string(&self) -> String {
        if self.terms.is_empty() {
            return "0".into();
        }
        self.terms
            .iter()
            .map(|t| t.iter().map(|l| l.letter()).collect::<String>())
            .collect::<Vec<_>>()
            .join("+")
    }
}

impl fmt::Display for EquationSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.term_string())
    }
}

fn check_lambda(lambda: usize) -> Result<()> {
    if lambda == 2 || lambda == 3 {
        Ok(())
    } else {
        Err(Error::Unsupported(format!("matching for lambda = {lambda}")))
    }
}

fn restricted_growth(len: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    fn rec(cur: &mut Vec<usize>, len: usize, max: usize, out: &mut Vec<Vec<usize>>) {
        if cur.len() == len {
            out.push(cur.clone());
            return;
        }
        for v in 0..=max {
            cur.push(v);
            rec(cur, len, max.max(v + 1), out);
            cur.pop();
        }
    }
    if len > 0 {
        rec(&mut vec![0], len, 1, &mut out);
    }
    out
}

const ALL_LABELS: u8 = 0b111;

fn bit(l: Label) -> u8 {
    match l {
        Label::In => 1,
        Label::Out => 2,
        Label::Free => 4,
    }
}

/// Label terms of one pattern, mod 2, before any reduction.
pub fn pattern_terms(pattern: &[usize], variant: CupVariant) -> Vec<LabelTerm> {
    let lambda = pattern.len();
    let vars = pattern.iter().max().map_or(0, |m| m + 1);
    let mut acc: BTreeSet<LabelTerm> = BTreeSet::new();
    for j in 0..lambda {
        let pre_collapsed = matches!(variant, CupVariant::NonAssociative | CupVariant::OutsideIn);
        let post_collapsed = variant == CupVariant::OutsideIn;
        if pre_collapsed && pattern[..j].iter().any(|&v| v != pattern[0]) {
            continue;
        }
        if post_collapsed && pattern[j + 1..].iter().any(|&v| v != pattern[j + 1]) {
            continue;
        }
        let mut allowed = vec![ALL_LABELS; vars];
        for k in 0..j {
            allowed[pattern[k]] &= bit(Label::Out);
        }
        for k in j + 1..lambda {
            allowed[pattern[k]] &= bit(Label::In);
        }
        let mut terms: Vec<LabelTerm> = vec![vec![]];
        for &mask in &allowed {
            let mut next = Vec::new();
            for t in &terms {
                for l in Label::ALL {
                    if mask & bit(l) != 0 {
                        let mut t2 = t.clone();
                        t2.push(l);
                        next.push(t2);
                    }
                }
            }
            terms = next;
        }
        for t in terms {
            if !acc.remove(&t) {
                acc.insert(t);
            }
        }
    }
    acc.into_iter().collect()
}

/// Reduced symbolic system for Λ copies, excluding the all-equal (parity) pattern.
pub fn build_equations(lambda: usize, variant: CupVariant) -> Result<Vec<EquationSpec>> {
    check_lambda(lambda)?;
    let mut eqs: Vec<EquationSpec> = restricted_growth(lambda)
        .into_iter()
        .filter(|p| p.iter().any(|&v| v != 0))
        .map(|p| {
            let terms = pattern_terms(&p, variant);
            EquationSpec { patterns: vec![p], terms }
        })
        .collect();

    // subtract two-point equations contained in one another until stable
    loop {
        let mut changed = false;
        for a in 0..eqs.len() {
            for b in 0..eqs.len() {
                if a == b || eqs[a].arity() != 2 || eqs[b].arity() != 2 || eqs[a].terms.is_empty() {
                    continue;
                }
                let small: BTreeSet<_> = eqs[a].terms.iter().cloned().collect();
                let big: BTreeSet<_> = eqs[b].terms.iter().cloned().collect();
                if small.len() < big.len() && small.is_subset(&big) {
                    eqs[b].terms = big.difference(&small).cloned().collect();
                    changed = true;
                }
            }
        }
        if !changed {
            break;
        }
    }
    let mut out: Vec<EquationSpec> = Vec::new();
    for e in eqs {
        if e.terms.is_empty() {
            continue;
        }
        if let Some(existing) = out.iter_mut().find(|x| x.terms == e.terms) {
            existing.patterns.extend(e.patterns);
        } else {
            out.push(e);
        }
    }
    Ok(out)
}

/// Indices 0.. assigned in-first, then out, then free.
fn part_indices(sig: Signature, label: Label) -> std::ops::Range<usize> {
    let (i, o, f) = sig;
    match label {
        Label::In => 0..i,
        Label::Out => i..i + o,
        Label::Free => i + o..i + o + f,
    }
}

pub fn part_size(sig: Signature, label: Label) -> usize {
    part_indices(sig, label).len()
}

/// Index tuples of a label term, entries pairwise distinct.
pub fn expand_term(term: &[Label], sig: Signature) -> Vec<Vec<usize>> {
    let mut out: Vec<Vec<usize>> = vec![vec![]];
    for &l in term {
        let mut next = Vec::new();
        for t in &out {
            for idx in part_indices(sig, l) {
                if !t.contains(&idx) {
                    let mut t2 = t.clone();
                    t2.push(idx);
                    next.push(t2);
                }
            }
        }
        out = next;
    }
    out
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum ScreenResult {
    Viable { tuples: usize },
    RejectedOdd { tuples: usize },
    RejectedSingular { label: Label },
}

impl ScreenResult {
    pub fn is_viable(&self) -> bool {
        matches!(self, ScreenResult::Viable { .. })
    }
}

/// Cheap necessary conditions on one equation for a signature.
pub fn screen(eq: &EquationSpec, sig: Signature) -> ScreenResult {
    let surviving: Vec<&LabelTerm> =
        eq.terms.iter().filter(|t| !expand_term(t, sig).is_empty()).collect();
    let tuples: usize = surviving.iter().map(|t| expand_term(t, sig).len()).sum();
    if tuples == 0 {
        return ScreenResult::Viable { tuples };
    }
    let repeated_single = surviving.len() == 1 && {
        let t = surviving[0];
        (1..t.len()).any(|k| t[..k].contains(&t[k]))
    };
    if !repeated_single {
        for pos in [0, surviving[0].len() - 1] {
            let l = surviving[0][pos];
            if surviving.iter().all(|t| t[pos] == l) && part_size(sig, l) == 1 {
                return ScreenResult::RejectedSingular { label: l };
            }
        }
    }
    if tuples % 2 == 1 {
        return ScreenResult::RejectedOdd { tuples };
    }
    ScreenResult::Viable { tuples }
}

/// A joint pairing of every equation's tuples.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Configuration {
    /// Per equation, the paired tuples (1-based indices when displayed).
    pub pairs: Vec<Vec<(Vec<usize>, Vec<usize>)>>,
    pub conditions: ConditionSet,
}

impl Configuration {
    pub fn human(&self) -> String {
        let fmt_t = |t: &[usize]| t.iter().map(|i| (i + 1).to_string()).collect::<String>();
        self.pairs
            .iter()
            .map(|eq| {
                eq.iter()
                    .map(|(a, b)| format!("({},{})", fmt_t(a), fmt_t(b)))
                    .collect::<Vec<_>>()
                    .join(" ")
            })
            .collect::<Vec<_>>()
            .join(" | ")
    }
}

fn tuple_relations(a: &[usize], b: &[usize]) -> Vec<Relation> {
    (0..a.len().saturating_sub(1))
        .map(|k| Relation::pair(a[k], a[k + 1], b[k], b[k + 1]))
        .collect()
}

/// Union-find over pair symbols (i,j) with bitmasks of first and second indices per class.
#[derive(Clone)]
struct PairUf {
    w: usize,
    parent: Vec<usize>,
    firsts: Vec<u16>,
    seconds: Vec<u16>,
    undo: Vec<(usize, usize, u16, u16)>,
}

impl PairUf {
    fn new(w: usize) -> Self {
        let n = w * w;
        PairUf {
            w,
            parent: (0..n).collect(),
            firsts: (0..n).map(|s| 1u16 << (s / w)).collect(),
            seconds: (0..n).map(|s| 1u16 << (s % w)).collect(),
            undo: Vec::new(),
        }
    }

    fn find(&self, mut x: usize) -> usize {
        while self.parent[x] != x {
            x = self.parent[x];
        }
        x
    }

    /// false on contradiction (nothing recorded then)
    fn union(&mut self, a: (usize, usize), b: (usize, usize)) -> bool {
        let (ra, rb) = (self.find(a.0 * self.w + a.1), self.find(b.0 * self.w + b.1));
        if ra == rb {
            return true;
        }
        if self.firsts[ra] & self.firsts[rb] != 0 || self.seconds[ra] & self.seconds[rb] != 0 {
            return false;
        }
        let (root, child) = if ra < rb { (ra, rb) } else { (rb, ra) };
        self.undo.push((child, root, self.firsts[root], self.seconds[root]));
        self.parent[child] = root;
        self.firsts[root] |= self.firsts[child];
        self.seconds[root] |= self.seconds[child];
        true
    }

    fn mark(&self) -> usize {
        self.undo.len()
    }

    fn rollback(&mut self, mark: usize) {
        while self.undo.len() > mark {
            let (child, root, f, s) = self.undo.pop().unwrap();
            self.parent[child] = child;
            self.firsts[root] = f;
            self.seconds[root] = s;
        }
    }

    /// Every position pair, not only consecutive ones: g_a^-1 g_c = (g_a^-1 g_b)(g_b^-1 g_c)
    /// holds in any group, and the plain index rules cannot see it otherwise.
    fn pair(&mut self, a: &[usize], b: &[usize]) -> bool {
        let m = self.mark();
        for k in 0..a.len() {
            for l in k + 1..a.len() {
                if !self.union((a[k], a[l]), (b[k], b[l])) {
                    self.rollback(m);
                    return false;
                }
            }
        }
        true
    }
}

/// Expanded equations for a signature, or the first screening failure.
pub fn expanded_system(
    lambda: usize,
    variant: CupVariant,
    sig: Signature,
) -> Result<std::result::Result<Vec<Vec<Vec<usize>>>, (EquationSpec, ScreenResult)>> {
    let (i, o, f) = sig;
    if i + o + f > MAX_MATCHING_WEIGHT {
        return Err(Error::Unsupported(format!(
            "matching search above weight {MAX_MATCHING_WEIGHT}"
        )));
    }
    let eqs = build_equations(lambda, variant)?;
    let mut systems = Vec::new();
    for eq in eqs {
        let s = screen(&eq, sig);
        if !s.is_viable() {
            return Ok(Err((eq, s)));
        }
        let tuples: Vec<Vec<usize>> = eq.terms.iter().flat_map(|t| expand_term(t, sig)).collect();
        if !tuples.is_empty() {
            systems.push(tuples);
        }
    }
    systems.sort_by_key(Vec::len);
    Ok(Ok(systems))
}

fn double_factorial_odd(n: usize) -> u128 {
    // (n-1)!! for even n
    (1..n).step_by(2).map(|x| x as u128).product::<u128>().max(1)
}

/// Number of joint pairings ignoring consistency.
pub fn raw_matching_count(lambda: usize, variant: CupVariant, sig: Signature) -> Result<u128> {
    Ok(match expanded_system(lambda, variant, sig)? {
        Ok(systems) => systems.iter().map(|s| double_factorial_odd(s.len())).product(),
        Err(_) => 0,
    })
}

struct Search<'a> {
    systems: &'a [Vec<Vec<usize>>],
    uf: PairUf,
    used: Vec<Vec<bool>>,
    current: Vec<Vec<(usize, usize)>>,
}

impl Search<'_> {
    fn run(&mut self, eq: usize, out: &mut Vec<Vec<Vec<(usize, usize)>>>, limit: usize) {
        if out.len() >= limit {
            return;
        }
        if eq == self.systems.len() {
            out.push(self.current.clone());
            return;
        }
        let Some(first) = self.used[eq].iter().position(|u| !u) else {
            return self.run(eq + 1, out, limit);
        };
        let tuples = &self.systems[eq];
        self.used[eq][first] = true;
        for second in first + 1..tuples.len() {
            if self.used[eq][second] {
                continue;
            }
            let m = self.uf.mark();
            if !self.uf.pair(&tuples[first], &tuples[second]) {
                continue;
            }
            self.used[eq][second] = true;
            self.current[eq].push((first, second));
            self.run(eq, out, limit);
            self.current[eq].pop();
            self.used[eq][second] = false;
            self.uf.rollback(m);
        }
        self.used[eq][first] = false;
    }
}

/// All consistent joint pairings for a signature (up to `limit`).
pub fn enumerate_configurations(
    lambda: usize,
    variant: CupVariant,
    sig: Signature,
    limit: usize,
) -> Result<Vec<Configuration>> {
    let systems = match expanded_system(lambda, variant, sig)? {
        Ok(s) => s,
        Err(_) => return Ok(vec![]),
    };
    let w = sig.0 + sig.1 + sig.2;
    let fresh = || Search {
        systems: &systems,
        uf: PairUf::new(w),
        used: systems.iter().map(|s| vec![false; s.len()]).collect(),
        current: vec![vec![]; systems.len()],
    };
    let raw: Vec<Vec<Vec<(usize, usize)>>> = if systems.is_empty() {
        vec![vec![]]
    } else {
        // split on the partner of tuple 0 in the first equation
        (1..systems[0].len())
            .into_par_iter()
            .map(|second| {
                let mut s = fresh();
                let mut out = Vec::new();
                if s.uf.pair(&systems[0][0], &systems[0][second]) {
                    s.used[0][0] = true;
                    s.used[0][second] = true;
                    s.current[0].push((0, second));
                    s.run(0, &mut out, limit);
                }
                out
            })
            .flatten()
            .collect()
    };
    Ok(raw
        .into_iter()
        .take(limit)
        .map(|cfg| {
            let pairs: Vec<Vec<(Vec<usize>, Vec<usize>)>> = cfg
                .iter()
                .enumerate()
                .map(|(e, ps)| {
                    ps.iter().map(|&(a, b)| (systems[e][a].clone(), systems[e][b].clone())).collect()
                })
                .collect();
            let relations = pairs
                .iter()
                .flatten()
                .flat_map(|(a, b)| tuple_relations(a, b))
                .map(Relation::normalized)
                .collect::<BTreeSet<_>>()
                .into_iter()
                .collect();
            Configuration { pairs, conditions: ConditionSet::new(relations, "matching") }
        })
        .collect())
}

/// Labeling passes the all-equal pattern: |in| + |out| even.
pub fn parity_ok(sig: Signature) -> bool {
    (sig.0 + sig.1) % 2 == 0
}

/// Some configuration's relations hold for the named elements (in, out, free order).
pub fn conditions_consistent(po: &PreOrientation, configs: &[Configuration]) -> bool {
    let elems = po.ordered_elements();
    let g = po.group();
    configs.iter().any(|c| c.conditions.holds(g, &elems))
}

/// Decide a labeling through the matching route.
pub fn matching_decide(po: &PreOrientation, lambda: usize, variant: CupVariant) -> Result<bool> {
    let sig = po.signature();
    if !parity_ok(sig) {
        return Ok(false);
    }
    let configs = enumerate_configurations(lambda, variant, sig, usize::MAX)?;
    Ok(conditions_consistent(po, &configs))
}

/// Canonical, deduplicated condition classes of all configurations.
pub fn canonical_condition_sets(configs: &[Configuration], weight: usize) -> BTreeSet<Vec<Vec<(usize, usize)>>> {
    configs.iter().filter_map(|c| c.conditions.canonical(weight)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn norm(e: &str) -> Vec<String> {
        let mut v: Vec<String> = e.split('+').map(str::to_string).collect();
        v.sort();
        v
    }

    fn strings(lambda: usize, v: CupVariant) -> BTreeSet<Vec<String>> {
        build_equations(lambda, v).unwrap().iter().map(|e| norm(&e.term_string())).collect()
    }

    fn set(xs: &[&str]) -> BTreeSet<Vec<String>> {
        xs.iter().map(|s| norm(s)).collect()
    }

    #[test]
    fn reduced_systems() {
        assert_eq!(strings(2, CupVariant::NonAssociative), set(&["ii+fi+oo+of"]));
        assert_eq!(
            strings(3, CupVariant::NonAssociative),
            set(&["oo+of", "fi", "ii", "iii+fii+ooi+ofi"])
        );
        assert_eq!(strings(3, CupVariant::Symmetric), set(&["ii+oo", "of", "fi", "iii+fii+ooo+oof+ofi"]));
        assert_eq!(strings(3, CupVariant::OutsideIn), set(&["oo+of", "ii+fi", "oii+ooi+ofi"]));
        assert!(build_equations(4, CupVariant::Symmetric).is_err());
    }

    #[test]
    fn two_copy_counts() {
        let na = CupVariant::NonAssociative;
        assert_eq!(raw_matching_count(2, na, (1, 1, 2)).unwrap(), 3);
        assert_eq!(enumerate_configurations(2, na, (1, 1, 2), usize::MAX).unwrap().len(), 2);
        assert_eq!(enumerate_configurations(2, na, (1, 3, 0), usize::MAX).unwrap().len(), 4);
    }

    #[test]
    fn screening() {
        let eqs = build_equations(3, CupVariant::NonAssociative).unwrap();
        let of = eqs.iter().find(|e| e.term_string() == "oo+of").unwrap();
        assert!(matches!(screen(of, (1, 1, 1)), ScreenResult::RejectedSingular { label: Label::Out }));
        assert!(screen(of, (2, 2, 0)).is_viable());
        assert!(enumerate_configurations(3, CupVariant::Symmetric, (1, 1, 1), 10).unwrap().is_empty());
        assert!(enumerate_configurations(2, CupVariant::Symmetric, (5, 5, 0), 1).is_err());
    }
}
