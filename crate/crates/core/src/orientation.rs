//! Pre-orientations, the master equations, and stored closed-form conditions.

use std::collections::BTreeSet;
use std::fmt;
use std::sync::Arc;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::groups::{FiniteGroup, GroupAlgebraElement};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CupVariant {
    NonAssociative,
    Symmetric,
    OutsideIn,
}

impl CupVariant {
    pub const ALL: [CupVariant; 3] =
        [CupVariant::NonAssociative, CupVariant::Symmetric, CupVariant::OutsideIn];
}

impl std::str::FromStr for CupVariant {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.replace('-', "_").as_str() {
            "non_associative" | "nonassociative" | "na" => Ok(CupVariant::NonAssociative),
            "symmetric" | "sym" => Ok(CupVariant::Symmetric),
            "outside_in" | "oi" => Ok(CupVariant::OutsideIn),
            _ => Err(Error::Parse(format!("unknown cup variant {s:?}"))),
        }
    }
}

impl fmt::Display for CupVariant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            CupVariant::NonAssociative => "non_associative",
            CupVariant::Symmetric => "symmetric",
            CupVariant::OutsideIn => "outside_in",
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Label {
    In,
    Out,
    Free,
}

impl Label {
    pub const ALL: [Label; 3] = [Label::In, Label::Out, Label::Free];

    pub fn letter(self) -> char {
        match self {
            Label::In => 'i',
            Label::Out => 'o',
            Label::Free => 'f',
        }
    }
}

/// (|in|, |out|, |free|)
pub type Signature = (usize, usize, usize);

/// A labeling of a coboundary's support into in/out/free parts.
#[derive(Clone, PartialEq, Eq)]
pub struct PreOrientation {
    element: GroupAlgebraElement,
    in_set: Vec<usize>,
    out_set: Vec<usize>,
    free_set: Vec<usize>,
    labels: Vec<Option<Label>>,
}

impl fmt::Debug for PreOrientation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let g = self.element.group();
        let names = |s: &[usize]| s.iter().map(|&x| g.element_name(x)).collect::<Vec<_>>().join("+");
        write!(
            f,
            "in={{{}}} out={{{}}} free={{{}}}",
            names(&self.in_set),
            names(&self.out_set),
            names(&self.free_set)
        )
    }
}

impl PreOrientation {
    pub fn new(
        element: &GroupAlgebraElement,
        in_set: &[usize],
        out_set: &[usize],
        free_set: &[usize],
    ) -> Result<Self> {
        let n = element.group().order();
        let mut labels = vec![None; n];
        for (set, label) in [(in_set, Label::In), (out_set, Label::Out), (free_set, Label::Free)] {
            for &g in set {
                if !element.contains(g) {
                    return Err(Error::InvalidLabeling(format!(
                        "{} is not in the support",
                        element.group().element_name(g)
                    )));
                }
                if labels[g].replace(label).is_some() {
                    return Err(Error::InvalidLabeling(format!(
                        "{} is labeled twice",
                        element.group().element_name(g)
                    )));
                }
            }
        }
        if in_set.len() + out_set.len() + free_set.len() != element.weight() {
            return Err(Error::InvalidLabeling("labeling does not cover the support".into()));
        }
        let sorted = |s: &[usize]| {
            let mut v = s.to_vec();
            v.sort_unstable();
            v
        };
        Ok(PreOrientation {
            element: element.clone(),
            in_set: sorted(in_set),
            out_set: sorted(out_set),
            free_set: sorted(free_set),
            labels,
        })
    }

    /// `labels[i]` labels the i-th support element.
    pub fn from_labels(element: &GroupAlgebraElement, labels: &[Label]) -> Result<Self> {
        if labels.len() != element.weight() {
            return Err(Error::InvalidLabeling(format!(
                "{} labels for a weight-{} element",
                labels.len(),
                element.weight()
            )));
        }
        let pick = |want: Label| -> Vec<usize> {
            element
                .support()
                .iter()
                .zip(labels)
                .filter(|(_, &l)| l == want)
                .map(|(&g, _)| g)
                .collect()
        };
        PreOrientation::new(element, &pick(Label::In), &pick(Label::Out), &pick(Label::Free))
    }

    pub fn element(&self) -> &GroupAlgebraElement {
        &self.element
    }

    pub fn group(&self) -> &Arc<FiniteGroup> {
        self.element.group()
    }

    pub fn in_set(&self) -> &[usize] {
        &self.in_set
    }

    pub fn out_set(&self) -> &[usize] {
        &self.out_set
    }

    pub fn free_set(&self) -> &[usize] {
        &self.free_set
    }

    pub fn set(&self, label: Label) -> &[usize] {
        match label {
            Label::In => &self.in_set,
            Label::Out => &self.out_set,
            Label::Free => &self.free_set,
        }
    }

    pub fn signature(&self) -> Signature {
        (self.in_set.len(), self.out_set.len(), self.free_set.len())
    }

    #[inline]
    pub fn label_of(&self, g: usize) -> Option<Label> {
        self.labels[g]
    }

    pub fn is_nontrivial(&self) -> bool {
        !self.in_set.is_empty() && !self.out_set.is_empty()
    }

    /// Support listed as in-elements, then out, then free (the g_1..g_w naming).
    pub fn ordered_elements(&self) -> Vec<usize> {
        self.in_set.iter().chain(&self.out_set).chain(&self.free_set).copied().collect()
    }

    /// The same labeling transported along x ↦ h·x·k.
    pub fn translated(&self, left: usize, right: usize) -> Self {
        let g = self.group();
        let t = |s: &[usize]| -> Vec<usize> { s.iter().map(|&x| g.mul(g.mul(left, x), right)).collect() };
        let all: Vec<usize> = self.element.support().iter().map(|&x| g.mul(g.mul(left, x), right)).collect();
        let element = GroupAlgebraElement::from_support(g, &all).expect("translation is a bijection");
        PreOrientation::new(&element, &t(&self.in_set), &t(&self.out_set), &t(&self.free_set))
            .expect("translation preserves the partition")
    }

    pub fn to_json(&self) -> LabelingJson {
        let g = self.group();
        let names = |s: &[usize]| s.iter().map(|&x| g.element_name(x)).collect();
        LabelingJson {
            r#in: names(&self.in_set),
            out: names(&self.out_set),
            free: names(&self.free_set),
            signature: self.signature(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct LabelingJson {
    pub r#in: Vec<String>,
    pub out: Vec<String>,
    pub free: Vec<String>,
    pub signature: Signature,
}

fn check_lambda(lambda: usize) -> Result<()> {
    if lambda == 2 || lambda == 3 {
        Ok(())
    } else {
        Err(Error::Unsupported(format!("master equations for lambda = {lambda}")))
    }
}

/// Is x in S·a, where S is the part labeled `label`?
#[inline]
fn in_part(po: &PreOrientation, label: Label, x: usize, a: usize) -> bool {
    let g = po.group();
    po.label_of(g.mul(x, g.inv(a))) == Some(label)
}

/// Left side of the master equation at (a_1, ..., a_Λ), mod 2.
pub fn master_eval(
    po: &PreOrientation,
    lambda: usize,
    variant: CupVariant,
    points: &[usize],
) -> Result<bool> {
    check_lambda(lambda)?;
    if points.len() != lambda {
        return Err(Error::InvalidParameter(format!(
            "{} points given for lambda = {lambda}",
            points.len()
        )));
    }
    let g = po.group();
    if let Some(&p) = points.iter().find(|&&p| p >= g.order()) {
        return Err(Error::InvalidElement(format!("point {p} outside group")));
    }
    Ok(master_eval_unchecked(po, variant, points))
}

fn master_eval_unchecked(po: &PreOrientation, variant: CupVariant, a: &[usize]) -> bool {
    let g = po.group();
    let lambda = a.len();
    let mut parity = false;
    for j in 0..lambda {
        // bracketed intersections collapse unless the intersected points coincide
        let pre_collapsed = matches!(variant, CupVariant::NonAssociative | CupVariant::OutsideIn);
        let post_collapsed = variant == CupVariant::OutsideIn;
        if pre_collapsed && a[..j].iter().any(|&x| x != a[0]) {
            continue;
        }
        if post_collapsed && j + 1 < lambda && a[j + 1..].iter().any(|&x| x != a[j + 1]) {
            continue;
        }
        for &s in po.element.support() {
            let x = g.mul(s, a[j]);
            let pre_ok = a[..j].iter().all(|&ai| in_part(po, Label::Out, x, ai));
            if !pre_ok {
                continue;
            }
            let post_ok = a[j + 1..].iter().all(|&ak| in_part(po, Label::In, x, ak));
            if post_ok {
                parity ^= true;
            }
        }
    }
    parity
}

/// Brute force over every point tuple in G^Λ.
pub fn verify_preorientation(po: &PreOrientation, lambda: usize, variant: CupVariant) -> Result<bool> {
    check_lambda(lambda)?;
    let n = po.group().order();
    let mut pts = vec![0usize; lambda];
    loop {
        if master_eval_unchecked(po, variant, &pts) {
            return Ok(false);
        }
        let mut i = lambda;
        loop {
            if i == 0 {
                return Ok(true);
            }
            i -= 1;
            pts[i] += 1;
            if pts[i] < n {
                break;
            }
            pts[i] = 0;
        }
    }
}

/// A side of a relation between named support elements (0-based).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Quotient {
    /// g_i^{-1} g_j
    Left(usize, usize),
    /// g_i g_j^{-1}
    Right(usize, usize),
}

impl Quotient {
    pub fn eval(self, g: &FiniteGroup, elems: &[usize]) -> usize {
        match self {
            Quotient::Left(i, j) => g.mul(g.inv(elems[i]), elems[j]),
            Quotient::Right(i, j) => g.mul(elems[i], g.inv(elems[j])),
        }
    }

    fn indices(self) -> (usize, usize) {
        match self {
            Quotient::Left(i, j) | Quotient::Right(i, j) => (i, j),
        }
    }
}

impl fmt::Display for Quotient {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            Quotient::Left(i, j) => write!(f, "g_{}^-1 g_{}", i + 1, j + 1),
            Quotient::Right(i, j) => write!(f, "g_{} g_{}^-1", i + 1, j + 1),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Relation {
    pub lhs: Quotient,
    pub rhs: Quotient,
}

impl Relation {
    /// g_i^{-1} g_j = g_k^{-1} g_l, 0-based.
    pub fn pair(i: usize, j: usize, k: usize, l: usize) -> Self {
        Relation { lhs: Quotient::Left(i, j), rhs: Quotient::Left(k, l) }
    }

    pub fn holds(&self, g: &FiniteGroup, elems: &[usize]) -> bool {
        self.lhs.eval(g, elems) == self.rhs.eval(g, elems)
    }

    /// Orientation-free form: ((i,j),(k,l)) and ((k,l),(i,j)) coincide.
    pub fn normalized(self) -> Self {
        if self.rhs < self.lhs {
            Relation { lhs: self.rhs, rhs: self.lhs }
        } else {
            self
        }
    }
}

impl fmt::Display for Relation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} = {}", self.lhs, self.rhs)
    }
}

/// A conjunction of relations on g_1..g_w.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConditionSet {
    pub relations: Vec<Relation>,
    pub source: String,
}

impl ConditionSet {
    pub fn new(relations: Vec<Relation>, source: impl Into<String>) -> Self {
        ConditionSet { relations, source: source.into() }
    }

    pub fn holds(&self, g: &FiniteGroup, elems: &[usize]) -> bool {
        self.relations.iter().all(|r| r.holds(g, elems))
    }

    pub fn max_index(&self) -> Option<usize> {
        self.relations
            .iter()
            .flat_map(|r| {
                let (a, b) = r.lhs.indices();
                let (c, d) = r.rhs.indices();
                [a, b, c, d]
            })
            .max()
    }

    pub fn human(&self) -> Vec<String> {
        self.relations.iter().map(ToString::to_string).collect()
    }

    /// Canonical form of the left-quotient relations under inversion and composition
    /// closure: the sorted non-singleton classes, or `None` if the closure is contradictory.
    pub fn canonical(&self, weight: usize) -> Option<Vec<Vec<(usize, usize)>>> {
        canonical_closure(&self.relations, weight)
    }
}

impl fmt::Display for ConditionSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.human().join(", "))
    }
}

fn canonical_closure(relations: &[Relation], w: usize) -> Option<Vec<Vec<(usize, usize)>>> {
    let idx = |i: usize, j: usize| i * w + j;
    let mut parent: Vec<usize> = (0..w * w).collect();
    fn find(p: &mut [usize], x: usize) -> usize {
        let mut r = x;
        while p[r] != r {
            r = p[r];
        }
        let mut y = x;
        while p[y] != r {
            let next = p[y];
            p[y] = r;
            y = next;
        }
        r
    }
    let union = |p: &mut Vec<usize>, a: usize, b: usize| -> bool {
        let (ra, rb) = (find(p, a), find(p, b));
        if ra != rb {
            p[ra.max(rb)] = ra.min(rb);
            true
        } else {
            false
        }
    };
    for r in relations {
        if let (Quotient::Left(i, j), Quotient::Left(k, l)) = (r.lhs, r.rhs) {
            union(&mut parent, idx(i, j), idx(k, l));
        }
    }
    loop {
        let mut changed = false;
        for a in 0..w * w {
            for b in 0..w * w {
                if a == b || find(&mut parent, a) != find(&mut parent, b) {
                    continue;
                }
                let (i, j, k, l) = (a / w, a % w, b / w, b % w);
                changed |= union(&mut parent, idx(j, i), idx(l, k));
                for m in 0..w {
                    for n in 0..w {
                        if find(&mut parent, idx(j, m)) == find(&mut parent, idx(l, n)) {
                            changed |= union(&mut parent, idx(i, m), idx(k, n));
                        }
                    }
                }
            }
        }
        if !changed {
            break;
        }
    }
    // diagonal symbols are the identity; they must not meet off-diagonal ones
    let diag = find(&mut parent, 0);
    for i in 0..w {
        union(&mut parent, idx(i, i), diag);
    }
    let diag = find(&mut parent, 0);
    for i in 0..w {
        for j in 0..w {
            if i != j && find(&mut parent, idx(i, j)) == diag {
                return None;
            }
        }
    }
    let mut classes: std::collections::BTreeMap<usize, Vec<(usize, usize)>> = Default::default();
    for i in 0..w {
        for j in 0..w {
            if i != j {
                let r = find(&mut parent, idx(i, j));
                classes.entry(r).or_default().push((i, j));
            }
        }
    }
    let mut out: Vec<Vec<(usize, usize)>> =
        classes.into_values().filter(|c| c.len() > 1).collect();
    out.sort();
    Some(out)
}

/// Stored closed-form results.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TheoremId {
    /// Weight 3, two copies: (1,1,1) with g3^-1 g2 = g1^-1 g3.
    Weight3TwoCopy,
    /// Weight 4, two copies: (1,1,2), (2,2,0), (1,3,0), (3,1,0) lists.
    Weight4TwoCopy,
    /// Weight 4, three copies, non-associative: (2,2,0) with two involutions.
    Weight4NonAssociative,
    /// Weight 4, three copies, symmetric: (2,2,0) alternatives.
    Weight4Symmetric,
    /// Weight 6, three copies, non-associative, assignment (2,2,2).
    Weight6Assignment222,
}

/// A theorem: for each listed signature a disjunction of condition sets.
/// Signatures not listed admit no valid labeling.
#[derive(Clone, Debug)]
pub struct Theorem {
    pub id: TheoremId,
    pub weight: usize,
    pub cases: Vec<(Signature, Vec<ConditionSet>)>,
}

fn p1(i: usize, j: usize, k: usize, l: usize) -> Relation {
    Relation::pair(i - 1, j - 1, k - 1, l - 1)
}

impl Theorem {
    pub fn get(id: TheoremId) -> Theorem {
        let src = format!("{id:?}");
        let cs = |rels: Vec<Relation>| ConditionSet::new(rels, src.clone());
        let list_220 = vec![
            cs(vec![p1(1, 2, 3, 4)]),
            cs(vec![p1(1, 2, 4, 3)]),
            cs(vec![p1(1, 2, 2, 1), p1(3, 4, 4, 3)]),
        ];
        let cases = match id {
            TheoremId::Weight3TwoCopy => vec![((1, 1, 1), vec![cs(vec![p1(3, 2, 1, 3)])])],
            TheoremId::Weight4TwoCopy => vec![
                (
                    (1, 1, 2),
                    vec![
                        cs(vec![p1(3, 1, 2, 3), p1(4, 1, 2, 4)]),
                        cs(vec![p1(3, 1, 2, 4), p1(4, 1, 2, 3)]),
                    ],
                ),
                ((2, 2, 0), list_220.clone()),
                (
                    (1, 3, 0),
                    vec![
                        cs(vec![p1(2, 3, 3, 2), p1(2, 4, 4, 2), p1(4, 3, 3, 4)]),
                        cs(vec![p1(2, 3, 3, 2), p1(2, 4, 4, 3), p1(3, 4, 4, 2)]),
                        cs(vec![p1(2, 3, 3, 4), p1(2, 4, 4, 2), p1(3, 2, 4, 3)]),
                        cs(vec![p1(2, 3, 4, 2), p1(2, 4, 3, 2), p1(4, 3, 3, 4)]),
                    ],
                ),
                (
                    (3, 1, 0),
                    vec![
                        cs(vec![p1(1, 2, 2, 1), p1(1, 3, 3, 1), p1(2, 3, 3, 2)]),
                        cs(vec![p1(1, 2, 2, 1), p1(1, 3, 3, 2), p1(2, 3, 3, 1)]),
                        cs(vec![p1(1, 2, 2, 3), p1(1, 3, 3, 1), p1(2, 1, 3, 2)]),
                        cs(vec![p1(1, 2, 3, 1), p1(1, 3, 2, 1), p1(2, 3, 3, 2)]),
                    ],
                ),
            ],
            TheoremId::Weight4NonAssociative => vec![(
                (2, 2, 0),
                vec![cs(vec![p1(1, 2, 2, 1), p1(3, 4, 4, 3), p1(4, 2, 3, 1)])],
            )],
            TheoremId::Weight4Symmetric => vec![((2, 2, 0), list_220)],
            TheoremId::Weight6Assignment222 => {
                let r = |i: usize, j: usize| Quotient::Right(i - 1, j - 1);
                vec![(
                    (2, 2, 2),
                    vec![cs(vec![
                        p1(1, 2, 2, 1),
                        p1(3, 4, 4, 3),
                        p1(5, 6, 6, 5),
                        Relation { lhs: r(1, 2), rhs: r(3, 4) },
                        Relation { lhs: r(3, 4), rhs: r(5, 6) },
                    ])],
                )]
            }
        };
        let weight = match id {
            TheoremId::Weight3TwoCopy => 3,
            TheoremId::Weight6Assignment222 => 6,
            _ => 4,
        };
        Theorem { id, weight, cases }
    }

    pub fn conditions_for(&self, sig: Signature) -> Option<&[ConditionSet]> {
        self.cases.iter().find(|(s, _)| *s == sig).map(|(_, c)| c.as_slice())
    }

    /// Some naming of the elements within each part satisfies some listed disjunct.
    pub fn accepts(&self, po: &PreOrientation) -> bool {
        let Some(options) = self.conditions_for(po.signature()) else {
            return false;
        };
        let g = po.group();
        let mut found = false;
        for_each_naming(po, &mut |elems| {
            if options.iter().any(|c| c.holds(g, elems)) {
                found = true;
            }
            found
        });
        found
    }
}

/// Calls `f` with every ordering (in..., out..., free...) obtained by permuting
/// within parts; stops early when `f` returns true.
fn for_each_naming(po: &PreOrientation, f: &mut dyn FnMut(&[usize]) -> bool) {
    fn perms(v: &[usize]) -> Vec<Vec<usize>> {
        if v.len() <= 1 {
            return vec![v.to_vec()];
        }
        let mut out = Vec::new();
        for i in 0..v.len() {
            let mut rest = v.to_vec();
            let x = rest.remove(i);
            for mut p in perms(&rest) {
                p.insert(0, x);
                out.push(p);
            }
        }
        out
    }
    let (pi, po_, pf) = (perms(po.in_set()), perms(po.out_set()), perms(po.free_set()));
    for a in &pi {
        for b in &po_ {
            for c in &pf {
                let elems: Vec<usize> = a.iter().chain(b).chain(c).copied().collect();
                if f(&elems) {
                    return;
                }
            }
        }
    }
}

pub fn theorem_condition_check(
    element: &GroupAlgebraElement,
    labeling: &PreOrientation,
    theorem: TheoremId,
) -> Result<bool> {
    let t = Theorem::get(theorem);
    if element.weight() != t.weight {
        return Err(Error::InvalidParameter(format!(
            "theorem {theorem:?} is about weight {}, element has weight {}",
            t.weight,
            element.weight()
        )));
    }
    if labeling.element() != element {
        return Err(Error::InvalidLabeling("labeling belongs to a different element".into()));
    }
    Ok(t.accepts(labeling))
}

/// Closed form available for this (weight, Λ, variant)?
pub fn closed_form_theorem(weight: usize, lambda: usize, variant: CupVariant) -> Result<ClosedForm> {
    check_lambda(lambda)?;
    let unsupported = || {
        Err(Error::Unsupported(format!(
            "no stored closed form for weight {weight}, lambda {lambda}, {variant}"
        )))
    };
    match (weight, lambda, variant) {
        (2, _, _) => Ok(ClosedForm::AlwaysValid((1, 1, 0))),
        (3, 2, _) => Ok(ClosedForm::Theorem(TheoremId::Weight3TwoCopy)),
        (4, 2, _) => Ok(ClosedForm::Theorem(TheoremId::Weight4TwoCopy)),
        (4, 3, CupVariant::NonAssociative) => Ok(ClosedForm::Theorem(TheoremId::Weight4NonAssociative)),
        (4, 3, CupVariant::Symmetric) => Ok(ClosedForm::Theorem(TheoremId::Weight4Symmetric)),
        (3 | 5, 3, CupVariant::NonAssociative | CupVariant::Symmetric) => Ok(ClosedForm::NeverValid),
        _ => unsupported(),
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ClosedForm {
    /// Exactly the labelings with this signature are valid.
    AlwaysValid(Signature),
    NeverValid,
    Theorem(TheoremId),
}

impl ClosedForm {
    pub fn accepts(&self, po: &PreOrientation) -> bool {
        match self {
            ClosedForm::AlwaysValid(sig) => po.signature() == *sig,
            ClosedForm::NeverValid => false,
            ClosedForm::Theorem(id) => Theorem::get(*id).accepts(po),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    Oracle,
    ClosedForm,
}

/// All nontrivial labelings passing the parity filter, in a fixed order.
pub fn candidate_labelings(element: &GroupAlgebraElement) -> Vec<PreOrientation> {
    let w = element.weight();
    let total = 3usize.pow(w as u32);
    let mut out = Vec::new();
    let mut labels = vec![Label::In; w];
    for code in 0..total {
        let mut c = code;
        for l in labels.iter_mut() {
            *l = Label::ALL[c % 3];
            c /= 3;
        }
        let ni = labels.iter().filter(|&&l| l == Label::In).count();
        let no = labels.iter().filter(|&&l| l == Label::Out).count();
        if ni == 0 || no == 0 || (ni + no) % 2 == 1 {
            continue;
        }
        out.push(PreOrientation::from_labels(element, &labels).expect("labels cover support"));
    }
    out
}

pub fn enumerate_preorientations(
    element: &GroupAlgebraElement,
    lambda: usize,
    variant: CupVariant,
    mode: Mode,
) -> Result<Vec<PreOrientation>> {
    check_lambda(lambda)?;
    let candidates = candidate_labelings(element);
    match mode {
        Mode::Oracle => {
            let keep: Vec<bool> = candidates
                .par_iter()
                .map(|po| verify_preorientation(po, lambda, variant).expect("lambda checked"))
                .collect();
            Ok(candidates.into_iter().zip(keep).filter(|(_, k)| *k).map(|(p, _)| p).collect())
        }
        Mode::ClosedForm => {
            let cf = closed_form_theorem(element.weight(), lambda, variant)?;
            Ok(candidates.into_iter().filter(|po| cf.accepts(po)).collect())
        }
    }
}

/// Does any nontrivial labeling pass? Uses the closed form when one is stored.
pub fn has_preorientation(element: &GroupAlgebraElement, lambda: usize, variant: CupVariant) -> Result<bool> {
    check_lambda(lambda)?;
    let candidates = candidate_labelings(element);
    if let Ok(cf) = closed_form_theorem(element.weight(), lambda, variant) {
        return Ok(candidates.iter().any(|po| cf.accepts(po)));
    }
    Ok(candidates
        .par_iter()
        .any(|po| verify_preorientation(po, lambda, variant).expect("lambda checked")))
}

/// Distinct signatures among a list of labelings.
pub fn signatures(labelings: &[PreOrientation]) -> BTreeSet<Signature> {
    labelings.iter().map(PreOrientation::signature).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn elem(orders: &[usize], s: &str) -> GroupAlgebraElement {
        let g = FiniteGroup::abelian(orders).unwrap();
        GroupAlgebraElement::parse(&g, s).unwrap()
    }

    fn labeled(e: &GroupAlgebraElement, i: &str, o: &str, f: &str) -> PreOrientation {
        let g = e.group();
        let parse = |s: &str| -> Vec<usize> {
            if s.is_empty() {
                vec![]
            } else {
                s.split('+').map(|m| g.parse_monomial(m).unwrap()).collect()
            }
        };
        PreOrientation::new(e, &parse(i), &parse(o), &parse(f)).unwrap()
    }

    #[test]
    fn master_eval_examples() {
        let e = elem(&[2], "1+x");
        let po = labeled(&e, "1", "x", "");
        assert!(!master_eval(&po, 2, CupVariant::NonAssociative, &[0, 0]).unwrap());

        let e3 = elem(&[7], "1+x+x^3");
        let free = labeled(&e3, "", "", "1+x+x^3");
        for a in 0..7 {
            for b in 0..7 {
                assert!(!master_eval(&free, 2, CupVariant::Symmetric, &[a, b]).unwrap());
            }
        }

        let bb = elem(&[9, 4], "1+x^4+x^8");
        let po = labeled(&bb, "1", "x^8", "x^4");
        assert!(verify_preorientation(&po, 2, CupVariant::NonAssociative).unwrap());
        assert!(matches!(
            master_eval(&po, 4, CupVariant::Symmetric, &[0, 0, 0, 0]),
            Err(Error::Unsupported(_))
        ));
        assert!(master_eval(&po, 2, CupVariant::Symmetric, &[0]).is_err());
    }

    #[test]
    fn verify_examples() {
        let e = elem(&[5], "x+x^3");
        assert!(verify_preorientation(&labeled(&e, "x", "x^3", ""), 2, CupVariant::Symmetric).unwrap());
        let c9 = elem(&[9], "1+x+x^3+x^4");
        let po = labeled(&c9, "1+x", "x^3+x^4", "");
        assert!(verify_preorientation(&po, 3, CupVariant::Symmetric).unwrap());
        assert!(theorem_condition_check(&c9, &po, TheoremId::Weight4Symmetric).unwrap());
        for po in candidate_labelings(&elem(&[9], "1+x+x^3")) {
            for v in [CupVariant::NonAssociative, CupVariant::Symmetric] {
                assert!(!verify_preorientation(&po, 3, v).unwrap());
            }
        }
    }

    #[test]
    fn theorem_check_examples() {
        let bb = elem(&[9, 4], "1+x^4+x^8");
        let po = labeled(&bb, "1", "x^8", "x^4");
        assert!(theorem_condition_check(&bb, &po, TheoremId::Weight3TwoCopy).unwrap());
        let bad = labeled(&bb, "1", "x^4", "x^8");
        // f^2 = x^16 = x^7, i*o = x^4
        assert!(!theorem_condition_check(&bb, &bad, TheoremId::Weight3TwoCopy).unwrap());
        assert!(!verify_preorientation(&bad, 2, CupVariant::NonAssociative).unwrap());
        assert!(matches!(
            theorem_condition_check(&bb, &po, TheoremId::Weight4TwoCopy),
            Err(Error::InvalidParameter(_))
        ));
    }

    #[test]
    fn closed_form_coverage() {
        assert!(closed_form_theorem(6, 3, CupVariant::NonAssociative).is_err());
        assert!(closed_form_theorem(4, 3, CupVariant::OutsideIn).is_err());
        let e = elem(&[8], "1+x+x^2+x^3");
        let found = enumerate_preorientations(&e, 2, CupVariant::Symmetric, Mode::Oracle).unwrap();
        assert!(signatures(&found).contains(&(2, 2, 0)));
        let e5 = elem(&[8], "1+x+x^2+x^3+x^5");
        assert!(enumerate_preorientations(&e5, 3, CupVariant::Symmetric, Mode::ClosedForm)
            .unwrap()
            .is_empty());
    }

    #[test]
    fn labeling_validation() {
        let e = elem(&[5], "1+x");
        let g = e.group().clone();
        assert!(PreOrientation::new(&e, &[0], &[0], &[]).is_err());
        assert!(PreOrientation::new(&e, &[0], &[2], &[]).is_err());
        assert!(PreOrientation::new(&e, &[0], &[], &[]).is_err());
        let po = PreOrientation::new(&e, &[0], &[1], &[]).unwrap();
        assert_eq!(po.signature(), (1, 1, 0));
        assert_eq!(po.label_of(g.parse_monomial("x").unwrap()), Some(Label::Out));
    }

    #[test]
    fn canonical_closure_examples() {
        let a = ConditionSet::new(vec![Relation::pair(0, 1, 2, 3)], "a");
        let b = ConditionSet::new(vec![Relation::pair(0, 1, 2, 3), Relation::pair(1, 0, 3, 2)], "b");
        assert_eq!(a.canonical(4), b.canonical(4));
        let bad = ConditionSet::new(vec![Relation::pair(0, 1, 3, 4), Relation::pair(0, 1, 3, 5)], "c");
        assert_eq!(bad.canonical(6), None);
    }
}
