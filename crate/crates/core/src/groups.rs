//! Finite groups, group-algebra check elements and their regular representations.

use std::fmt;
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gf2::{BitMatrix, BitVec};

/// Largest group the multiplication table is built for.
pub const MAX_GROUP_ORDER: usize = 2048;

const GENERATOR_NAMES: [char; 4] = ['x', 'y', 'z', 'w'];

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum GroupKind {
    /// C_{n1} x ... x C_{nr}; elements are mixed-radix exponent vectors, first factor most significant.
    AbelianProduct { orders: Vec<usize> },
    CayleyTable,
}

/// A finite group with a precomputed multiplication table. Identity is index 0.
#[derive(Clone, PartialEq, Eq)]
pub struct FiniteGroup {
    kind: GroupKind,
    size: usize,
    mul: Vec<u32>,
    inv: Vec<u32>,
    abelian: bool,
}

impl fmt::Debug for FiniteGroup {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "FiniteGroup({})", self.name())
    }
}

impl FiniteGroup {
    pub fn abelian(orders: &[usize]) -> Result<Arc<Self>> {
        if orders.is_empty() {
            return Err(Error::InvalidGroup("no cyclic factors given".into()));
        }
        if orders.contains(&0) {
            return Err(Error::InvalidGroup("factor orders must be positive".into()));
        }
        let size = orders
            .iter()
            .try_fold(1usize, |acc, &o| acc.checked_mul(o))
            .filter(|&s| s <= MAX_GROUP_ORDER)
            .ok_or_else(|| {
                Error::InvalidGroup(format!("group order exceeds {MAX_GROUP_ORDER}"))
            })?;
        let mut g = FiniteGroup {
            kind: GroupKind::AbelianProduct { orders: orders.to_vec() },
            size,
            mul: Vec::new(),
            inv: Vec::new(),
            abelian: true,
        };
        let exps: Vec<Vec<usize>> = (0..size).map(|i| g.decode(i)).collect();
        let mut mul = vec![0u32; size * size];
        let mut sum = vec![0usize; orders.len()];
        for a in 0..size {
            for b in 0..size {
                for (k, &o) in orders.iter().enumerate() {
                    sum[k] = (exps[a][k] + exps[b][k]) % o;
                }
                mul[a * size + b] = g.encode(&sum) as u32;
            }
        }
        let inv = (0..size)
            .map(|a| {
                let neg: Vec<usize> =
                    orders.iter().zip(&exps[a]).map(|(&o, &e)| (o - e) % o).collect();
                g.encode(&neg) as u32
            })
            .collect();
        g.mul = mul;
        g.inv = inv;
        Ok(Arc::new(g))
    }

    pub fn cyclic(n: usize) -> Result<Arc<Self>> {
        FiniteGroup::abelian(&[n])
    }

    /// Build from a Cayley table. Index 0 must be the identity.
    pub fn from_cayley(table: &[Vec<usize>]) -> Result<Arc<Self>> {
        let size = table.len();
        if size == 0 || size > MAX_GROUP_ORDER {
            return Err(Error::InvalidGroup(format!("table size {size} out of range")));
        }
        for (r, row) in table.iter().enumerate() {
            if row.len() != size {
                return Err(Error::InvalidGroup(format!("row {r} has length {}", row.len())));
            }
            let mut seen = vec![false; size];
            for &v in row {
                if v >= size || std::mem::replace(&mut seen[v], true) {
                    return Err(Error::InvalidGroup(format!("row {r} is not a permutation")));
                }
            }
        }
        for c in 0..size {
            let mut seen = vec![false; size];
            for row in table {
                if std::mem::replace(&mut seen[row[c]], true) {
                    return Err(Error::InvalidGroup(format!("column {c} is not a permutation")));
                }
            }
        }
        for g in 0..size {
            if table[0][g] != g || table[g][0] != g {
                return Err(Error::InvalidGroup("index 0 is not the identity".into()));
            }
        }
        let mul: Vec<u32> = table.iter().flatten().map(|&v| v as u32).collect();
        let m = |a: usize, b: usize| mul[a * size + b] as usize;
        let assoc_fail = |(a, b, c): (usize, usize, usize)| m(m(a, b), c) != m(a, m(b, c));
        if size <= 64 {
            for a in 0..size {
                for b in 0..size {
                    for c in 0..size {
                        if assoc_fail((a, b, c)) {
                            return Err(Error::InvalidGroup(format!(
                                "not associative at ({a},{b},{c})"
                            )));
                        }
                    }
                }
            }
        } else {
            let mut rng = ChaCha8Rng::seed_from_u64(0x6772_6f75_70);
            for _ in 0..200_000 {
                let t = (rng.gen_range(0..size), rng.gen_range(0..size), rng.gen_range(0..size));
                if assoc_fail(t) {
                    return Err(Error::InvalidGroup(format!("not associative at {t:?}")));
                }
            }
        }
        let inv: Vec<u32> = (0..size)
            .map(|a| (0..size).find(|&b| m(a, b) == 0).expect("latin square row has identity") as u32)
            .collect();
        let abelian = (0..size).all(|a| (0..a).all(|b| m(a, b) == m(b, a)));
        Ok(Arc::new(FiniteGroup { kind: GroupKind::CayleyTable, size, mul, inv, abelian }))
    }

    pub fn kind(&self) -> &GroupKind {
        &self.kind
    }

    pub fn order(&self) -> usize {
        self.size
    }

    pub fn identity(&self) -> usize {
        0
    }

    pub fn is_abelian(&self) -> bool {
        self.abelian
    }

    /// Cyclic factor orders for abelian products.
    pub fn factor_orders(&self) -> Option<&[usize]> {
        match &self.kind {
            GroupKind::AbelianProduct { orders } => Some(orders),
            GroupKind::CayleyTable => None,
        }
    }

    #[inline]
    pub fn mul(&self, a: usize, b: usize) -> usize {
        self.mul[a * self.size + b] as usize
    }

    #[inline]
    pub fn inv(&self, a: usize) -> usize {
        self.inv[a] as usize
    }

    /// a^{-1} b
    #[inline]
    pub fn left_quotient(&self, a: usize, b: usize) -> usize {
        self.mul(self.inv(a), b)
    }

    pub fn element_order(&self, a: usize) -> usize {
        let mut x = a;
        let mut k = 1;
        while x != 0 {
            x = self.mul(x, a);
            k += 1;
        }
        k
    }

    fn decode(&self, mut idx: usize) -> Vec<usize> {
        let orders = self.factor_orders().expect("abelian product");
        let mut e = vec![0; orders.len()];
        for k in (0..orders.len()).rev() {
            e[k] = idx % orders[k];
            idx /= orders[k];
        }
        e
    }

    fn encode(&self, exps: &[usize]) -> usize {
        let orders = self.factor_orders().expect("abelian product");
        exps.iter().zip(orders).fold(0, |acc, (&e, &o)| acc * o + e)
    }

    /// Exponent vector of an element of an abelian product.
    pub fn exponents(&self, idx: usize) -> Option<Vec<usize>> {
        self.factor_orders()?;
        (idx < self.size).then(|| self.decode(idx))
    }

    /// Element index from an exponent vector; exponents are reduced mod the factor orders.
    pub fn from_exponents(&self, exps: &[i64]) -> Result<usize> {
        let orders = self
            .factor_orders()
            .ok_or_else(|| Error::InvalidElement("exponent vectors need an abelian product".into()))?;
        if exps.len() != orders.len() {
            return Err(Error::InvalidElement(format!(
                "exponent vector has {} entries, group has {} factors",
                exps.len(),
                orders.len()
            )));
        }
        let reduced: Vec<usize> =
            exps.iter().zip(orders).map(|(&e, &o)| e.rem_euclid(o as i64) as usize).collect();
        Ok(self.encode(&reduced))
    }

    pub fn element_name(&self, idx: usize) -> String {
        match &self.kind {
            GroupKind::AbelianProduct { orders } => {
                if idx == 0 {
                    return "1".into();
                }
                let exps = self.decode(idx);
                let mut s = String::new();
                for (k, &e) in exps.iter().enumerate() {
                    if e == 0 {
                        continue;
                    }
                    let name = if orders.len() <= GENERATOR_NAMES.len() {
                        GENERATOR_NAMES[k].to_string()
                    } else {
                        format!("x{}", k + 1)
                    };
                    s.push_str(&name);
                    if e > 1 {
                        s.push_str(&format!("^{e}"));
                    }
                }
                s
            }
            GroupKind::CayleyTable => {
                if idx == 0 {
                    "1".into()
                } else {
                    format!("g{idx}")
                }
            }
        }
    }

    pub fn name(&self) -> String {
        match &self.kind {
            GroupKind::AbelianProduct { orders } => {
                orders.iter().map(|o| format!("C{o}")).collect::<Vec<_>>().join("x")
            }
            GroupKind::CayleyTable => format!("G{}", self.size),
        }
    }

    pub fn spec(&self) -> GroupSpec {
        match &self.kind {
            GroupKind::AbelianProduct { orders } => GroupSpec::Orders { orders: orders.clone() },
            GroupKind::CayleyTable => GroupSpec::Cayley {
                cayley: (0..self.size)
                    .map(|a| (0..self.size).map(|b| self.mul(a, b)).collect())
                    .collect(),
            },
        }
    }

    /// Parse one monomial such as `x^3y`, `x^-1`, `1` or `g5`.
    pub fn parse_monomial(&self, text: &str) -> Result<usize> {
        let t: String = text.chars().filter(|c| !c.is_whitespace() && *c != '*').collect();
        if t.is_empty() {
            return Err(Error::Parse("empty monomial".into()));
        }
        if t == "1" || t == "e" {
            return Ok(0);
        }
        match &self.kind {
            GroupKind::CayleyTable => {
                let idx: usize = t
                    .strip_prefix('g')
                    .and_then(|d| d.parse().ok())
                    .ok_or_else(|| Error::Parse(format!("expected g<index>, got {t:?}")))?;
                if idx >= self.size {
                    return Err(Error::InvalidElement(format!("g{idx} outside group")));
                }
                Ok(idx)
            }
            GroupKind::AbelianProduct { orders } => {
                let mut exps = vec![0i64; orders.len()];
                let chars: Vec<char> = t.chars().collect();
                let mut i = 0;
                while i < chars.len() {
                    let c = chars[i];
                    let k = GENERATOR_NAMES
                        .iter()
                        .position(|&g| g == c)
                        .filter(|&k| k < orders.len())
                        .ok_or_else(|| {
                            Error::Parse(format!("unknown generator {c:?} in {t:?}"))
                        })?;
                    i += 1;
                    let mut e = 1i64;
                    if i < chars.len() && chars[i] == '^' {
                        i += 1;
                        let start = i;
                        if i < chars.len() && chars[i] == '-' {
                            i += 1;
                        }
                        while i < chars.len() && chars[i].is_ascii_digit() {
                            i += 1;
                        }
                        let num: String = chars[start..i].iter().collect();
                        e = num
                            .parse()
                            .map_err(|_| Error::Parse(format!("bad exponent in {t:?}")))?;
                    }
                    exps[k] += e;
                }
                self.from_exponents(&exps)
            }
        }
    }
}

/// JSON group description.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum GroupSpec {
    Orders { orders: Vec<usize> },
    Cayley { cayley: Vec<Vec<usize>> },
}

impl GroupSpec {
    pub fn build(&self) -> Result<Arc<FiniteGroup>> {
        match self {
            GroupSpec::Orders { orders } => FiniteGroup::abelian(orders),
            GroupSpec::Cayley { cayley } => FiniteGroup::from_cayley(cayley),
        }
    }

    /// Accepts `9x4`, `C9xC4`, `9,4` or a JSON object.
    pub fn parse(text: &str) -> Result<GroupSpec> {
        let t = text.trim();
        if t.starts_with('{') {
            return Ok(serde_json::from_str(t)?);
        }
        let orders = t
            .split(|c| c == 'x' || c == ',' || c == '*' || c == '×')
            .map(|p| p.trim().trim_start_matches(['C', 'c']))
            .filter(|p| !p.is_empty())
            .map(|p| p.parse::<usize>().map_err(|_| Error::Parse(format!("bad group {t:?}"))))
            .collect::<Result<Vec<_>>>()?;
        if orders.is_empty() {
            return Err(Error::Parse(format!("bad group {t:?}")));
        }
        Ok(GroupSpec::Orders { orders })
    }
}

/// A single group element bound to its group.
#[derive(Clone, Debug)]
pub struct GroupElem {
    pub group: Arc<FiniteGroup>,
    pub index: usize,
}

impl PartialEq for GroupElem {
    fn eq(&self, other: &Self) -> bool {
        (Arc::ptr_eq(&self.group, &other.group) || self.group == other.group)
            && self.index == other.index
    }
}

impl GroupElem {
    pub fn new(group: &Arc<FiniteGroup>, index: usize) -> Result<Self> {
        if index >= group.order() {
            return Err(Error::InvalidElement(format!("index {index} outside {}", group.name())));
        }
        Ok(GroupElem { group: group.clone(), index })
    }
}

impl fmt::Display for GroupElem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.group.element_name(self.index))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ElementOp {
    Mul,
    Inv,
}

pub fn element_op(g: &GroupElem, h: &GroupElem, mode: ElementOp) -> Result<GroupElem> {
    if !same_group(&g.group, &h.group) {
        return Err(Error::GroupMismatch("elements come from different groups".into()));
    }
    let index = match mode {
        ElementOp::Mul => g.group.mul(g.index, h.index),
        ElementOp::Inv => g.group.inv(g.index),
    };
    Ok(GroupElem { group: g.group.clone(), index })
}

pub(crate) fn same_group(a: &Arc<FiniteGroup>, b: &Arc<FiniteGroup>) -> bool {
    Arc::ptr_eq(a, b) || a == b
}

/// A check element: a nonempty set of group elements.
#[derive(Clone)]
pub struct GroupAlgebraElement {
    group: Arc<FiniteGroup>,
    support: Vec<usize>,
}

impl PartialEq for GroupAlgebraElement {
    fn eq(&self, other: &Self) -> bool {
        self.support == other.support && same_group(&self.group, &other.group)
    }
}

impl Eq for GroupAlgebraElement {}

impl fmt::Debug for GroupAlgebraElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} over {}", self, self.group.name())
    }
}

impl fmt::Display for GroupAlgebraElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let terms: Vec<String> = self.support.iter().map(|&g| self.group.element_name(g)).collect();
        f.write_str(&terms.join("+"))
    }
}

impl GroupAlgebraElement {
    /// Terms are summed over F2, so repeated indices cancel in pairs.
    pub fn from_terms(group: &Arc<FiniteGroup>, terms: &[usize]) -> Result<Self> {
        let mut parity = vec![false; group.order()];
        for &t in terms {
            if t >= group.order() {
                return Err(Error::InvalidElement(format!(
                    "index {t} outside group of order {}",
                    group.order()
                )));
            }
            parity[t] ^= true;
        }
        let support: Vec<usize> = (0..group.order()).filter(|&g| parity[g]).collect();
        if support.is_empty() {
            return Err(Error::InvalidElement("element reduces to zero".into()));
        }
        Ok(GroupAlgebraElement { group: group.clone(), support })
    }

    /// Exact set constructor; duplicates are an error.
    pub fn from_support(group: &Arc<FiniteGroup>, support: &[usize]) -> Result<Self> {
        let mut s = support.to_vec();
        s.sort_unstable();
        if s.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::InvalidElement("support has repeated elements".into()));
        }
        GroupAlgebraElement::from_terms(group, &s)
    }

    pub fn from_exponents(group: &Arc<FiniteGroup>, exps: &[Vec<i64>]) -> Result<Self> {
        let terms = exps.iter().map(|e| group.from_exponents(e)).collect::<Result<Vec<_>>>()?;
        GroupAlgebraElement::from_terms(group, &terms)
    }

    /// Parse `1+x^4+x^8`, `1+x^2+xy^2`, `g0+g3`; reduces modulo the group relations.
    pub fn parse(group: &Arc<FiniteGroup>, text: &str) -> Result<Self> {
        let terms = text
            .split('+')
            .map(|t| group.parse_monomial(t))
            .collect::<Result<Vec<_>>>()?;
        GroupAlgebraElement::from_terms(group, &terms)
    }

    pub fn group(&self) -> &Arc<FiniteGroup> {
        &self.group
    }

    pub fn support(&self) -> &[usize] {
        &self.support
    }

    pub fn weight(&self) -> usize {
        self.support.len()
    }

    pub fn contains(&self, g: usize) -> bool {
        self.support.binary_search(&g).is_ok()
    }

    pub fn indicator(&self) -> BitVec {
        BitVec::from_support(self.group.order(), &self.support)
    }

    pub fn exponent_vectors(&self) -> Option<Vec<Vec<usize>>> {
        self.support.iter().map(|&g| self.group.exponents(g)).collect()
    }

    pub fn antipode(&self) -> Self {
        let terms: Vec<usize> = self.support.iter().map(|&g| self.group.inv(g)).collect();
        GroupAlgebraElement::from_support(&self.group, &terms).expect("inversion is a bijection")
    }

    /// g·α
    pub fn left_translate(&self, g: usize) -> Self {
        let terms: Vec<usize> = self.support.iter().map(|&a| self.group.mul(g, a)).collect();
        GroupAlgebraElement::from_support(&self.group, &terms).expect("translation is a bijection")
    }

    /// α·g
    pub fn right_translate(&self, g: usize) -> Self {
        let terms: Vec<usize> = self.support.iter().map(|&a| self.group.mul(a, g)).collect();
        GroupAlgebraElement::from_support(&self.group, &terms).expect("translation is a bijection")
    }

    /// Support of α·β over F2 (possibly empty).
    pub fn product_support(&self, other: &Self) -> Result<Vec<usize>> {
        if !same_group(&self.group, &other.group) {
            return Err(Error::GroupMismatch("product of elements from different groups".into()));
        }
        let mut parity = vec![false; self.group.order()];
        for &a in &self.support {
            for &b in &other.support {
                parity[self.group.mul(a, b)] ^= true;
            }
        }
        Ok((0..self.group.order()).filter(|&g| parity[g]).collect())
    }

    /// α·β, or `None` when the product vanishes.
    pub fn product(&self, other: &Self) -> Result<Option<Self>> {
        let s = self.product_support(other)?;
        if s.is_empty() {
            Ok(None)
        } else {
            Ok(Some(GroupAlgebraElement { group: self.group.clone(), support: s }))
        }
    }

    /// Kernel dimension of the regular representation.
    pub fn classical_k(&self) -> usize {
        self.group.order() - regular_representation(self).rank()
    }
}

/// Left regular representation: column h has ones at rows g·h, g in the support.
pub fn regular_representation(alpha: &GroupAlgebraElement) -> BitMatrix {
    let g = &alpha.group;
    let n = g.order();
    let mut m = BitMatrix::zeros(n, n);
    for h in 0..n {
        for &a in &alpha.support {
            m.flip(g.mul(a, h), h);
        }
    }
    m
}

pub fn antipode(alpha: &GroupAlgebraElement) -> GroupAlgebraElement {
    alpha.antipode()
}

/// Isomorphism of a coprime abelian product onto a cyclic group.
#[derive(Clone, Debug)]
pub struct CyclicCollapse {
    pub source: Arc<FiniteGroup>,
    pub target: Arc<FiniteGroup>,
    /// `map[g]` is the image of element index `g`.
    pub map: Vec<usize>,
    /// Image of each generator as a power of the cyclic generator.
    pub generator_powers: Vec<usize>,
}

impl CyclicCollapse {
    pub fn map_element(&self, alpha: &GroupAlgebraElement) -> Result<GroupAlgebraElement> {
        if !same_group(&alpha.group, &self.source) {
            return Err(Error::GroupMismatch("element is not over the collapsed group".into()));
        }
        let terms: Vec<usize> = alpha.support.iter().map(|&g| self.map[g]).collect();
        GroupAlgebraElement::from_support(&self.target, &terms)
    }
}

fn gcd(a: usize, b: usize) -> usize {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

pub fn coprime_collapse(group: &Arc<FiniteGroup>) -> Result<Option<CyclicCollapse>> {
    let orders = group
        .factor_orders()
        .ok_or_else(|| Error::InvalidGroup("coprime collapse needs an abelian product".into()))?;
    for i in 0..orders.len() {
        for j in (i + 1)..orders.len() {
            if gcd(orders[i], orders[j]) != 1 {
                return Ok(None);
            }
        }
    }
    let n = group.order();
    let target = FiniteGroup::cyclic(n)?;
    let generator_powers: Vec<usize> = orders.iter().map(|&o| n / o).collect();
    let map = (0..n)
        .map(|g| {
            let exps = group.exponents(g).expect("abelian product");
            exps.iter().zip(&generator_powers).map(|(&e, &p)| e * p).sum::<usize>() % n
        })
        .collect();
    Ok(Some(CyclicCollapse { source: group.clone(), target, map, generator_powers }))
}

/// Lexicographic stream of all check elements of a given weight.
pub struct CheckElements {
    group: Arc<FiniteGroup>,
    fix_identity: bool,
    combo: Vec<usize>,
    pool: usize,
    done: bool,
}

impl Iterator for CheckElements {
    type Item = GroupAlgebraElement;

    fn next(&mut self) -> Option<Self::Item> {
        if self.done {
            return None;
        }
        let offset = usize::from(self.fix_identity);
        let mut support: Vec<usize> = Vec::with_capacity(self.combo.len() + offset);
        if self.fix_identity {
            support.push(0);
        }
        support.extend(self.combo.iter().map(|&c| c + offset));
        let item = GroupAlgebraElement { group: self.group.clone(), support };
        // advance
        let k = self.combo.len();
        let mut i = k;
        loop {
            if i == 0 {
                self.done = true;
                break;
            }
            i -= 1;
            if self.combo[i] < self.pool - (k - i) {
                self.combo[i] += 1;
                for j in (i + 1)..k {
                    self.combo[j] = self.combo[j - 1] + 1;
                }
                break;
            }
        }
        Some(item)
    }
}

pub fn enumerate_check_elements(
    group: &Arc<FiniteGroup>,
    weight: usize,
    fix_identity: bool,
) -> Result<CheckElements> {
    if weight == 0 || weight > group.order() {
        return Err(Error::InvalidParameter(format!(
            "weight {weight} outside 1..={}",
            group.order()
        )));
    }
    let offset = usize::from(fix_identity);
    let k = weight - offset;
    let pool = group.order() - offset;
    Ok(CheckElements { group: group.clone(), fix_identity, combo: (0..k).collect(), pool, done: false })
}

/// Automorphisms of an abelian product group as index maps, identity first.
/// Errors when the candidate generator images exceed `limit` combinations.
pub fn abelian_automorphisms(group: &Arc<FiniteGroup>, limit: usize) -> Result<Vec<Vec<usize>>> {
    let orders = group
        .factor_orders()
        .ok_or_else(|| Error::Unsupported("automorphisms of Cayley-table groups".into()))?
        .to_vec();
    let n = group.order();
    // image of generator i must have order dividing orders[i]
    let cands: Vec<Vec<usize>> = orders
        .iter()
        .map(|&o| (0..n).filter(|&g| o % group.element_order(g) == 0).collect())
        .collect();
    let combos = cands.iter().try_fold(1usize, |acc, c| acc.checked_mul(c.len()));
    match combos {
        Some(c) if c <= limit => {}
        _ => {
            return Err(Error::BudgetExceeded {
                needed: cands.iter().map(|c| c.len() as u128).product(),
                ceiling: limit as u128,
            })
        }
    }
    let exps: Vec<Vec<usize>> = (0..n).map(|g| group.exponents(g).expect("abelian product")).collect();
    let pow = |g: usize, e: usize| (0..e).fold(0, |acc, _| group.mul(acc, g));
    let mut out = Vec::new();
    let mut pick = vec![0usize; orders.len()];
    'outer: loop {
        let images: Vec<usize> = pick.iter().zip(&cands).map(|(&i, c)| c[i]).collect();
        let map: Vec<usize> = exps
            .iter()
            .map(|e| e.iter().zip(&images).fold(0, |acc, (&k, &img)| group.mul(acc, pow(img, k))))
            .collect();
        let mut seen = vec![false; n];
        if map.iter().all(|&x| !std::mem::replace(&mut seen[x], true)) {
            out.push(map);
        }
        for i in 0..pick.len() {
            pick[i] += 1;
            if pick[i] < cands[i].len() {
                continue 'outer;
            }
            pick[i] = 0;
        }
        break;
    }
    out.sort();
    let id: Vec<usize> = (0..n).collect();
    if let Some(pos) = out.iter().position(|m| *m == id) {
        let m = out.remove(pos);
        out.insert(0, m);
    }
    Ok(out)
}

/// All abelian groups of order `n` in invariant-factor form (largest factor first).
pub fn abelian_groups_of_order(n: usize) -> Vec<Vec<usize>> {
    if n == 1 {
        return vec![vec![1]];
    }
    // prime factorization
    let mut primes = Vec::new();
    let mut m = n;
    let mut p = 2;
    while p * p <= m {
        if m % p == 0 {
            let mut e = 0;
            while m % p == 0 {
                m /= p;
                e += 1;
            }
            primes.push((p, e));
        }
        p += 1;
    }
    if m > 1 {
        primes.push((m, 1));
    }
    fn partitions(n: usize, max: usize) -> Vec<Vec<usize>> {
        if n == 0 {
            return vec![vec![]];
        }
        let mut out = Vec::new();
        for first in (1..=n.min(max)).rev() {
            for mut rest in partitions(n - first, first) {
                rest.insert(0, first);
                out.push(rest);
            }
        }
        out
    }
    let mut groups: Vec<Vec<usize>> = vec![vec![]];
    for &(p, e) in &primes {
        let mut next = Vec::new();
        for g in &groups {
            for part in partitions(e, e) {
                let mut f = g.clone();
                let len = f.len().max(part.len());
                f.resize(len, 1);
                for (i, &k) in part.iter().enumerate() {
                    f[i] *= p.pow(k as u32);
                }
                next.push(f);
            }
        }
        groups = next;
    }
    groups
}

#[cfg(test)]
mod tests {
    use super::*;

    fn poly(g: &Arc<FiniteGroup>, s: &str) -> GroupAlgebraElement {
        GroupAlgebraElement::parse(g, s).unwrap()
    }

    #[test]
    fn element_ops() {
        let c4 = FiniteGroup::cyclic(4).unwrap();
        let x = GroupElem::new(&c4, 1).unwrap();
        let x3 = GroupElem::new(&c4, 3).unwrap();
        assert_eq!(element_op(&x, &x3, ElementOp::Mul).unwrap().index, 0);
        let e = GroupElem::new(&c4, 0).unwrap();
        assert_eq!(element_op(&e, &e, ElementOp::Inv).unwrap().index, 0);

        let g = FiniteGroup::abelian(&[9, 4]).unwrap();
        let a = GroupElem::new(&g, g.parse_monomial("x^4y^3").unwrap()).unwrap();
        let inv = element_op(&a, &a, ElementOp::Inv).unwrap();
        assert_eq!(inv.to_string(), "x^5y");
        for i in 0..g.order() {
            assert_eq!(g.mul(i, g.inv(i)), 0);
        }

        let other = FiniteGroup::cyclic(5).unwrap();
        let y = GroupElem::new(&other, 1).unwrap();
        assert!(matches!(element_op(&x, &y, ElementOp::Mul), Err(Error::GroupMismatch(_))));
    }

    #[test]
    fn regular_representation_examples() {
        let c5 = FiniteGroup::cyclic(5).unwrap();
        let shift = regular_representation(&poly(&c5, "x"));
        for h in 0..5 {
            assert!(shift.get((h + 1) % 5, h));
            assert_eq!(shift.col_weights()[h], 1);
        }
        assert_eq!(regular_representation(&poly(&c5, "1")), BitMatrix::identity(5));
        let c2 = FiniteGroup::cyclic(2).unwrap();
        let m = regular_representation(&poly(&c2, "1+x"));
        assert_eq!(m.row_weights(), vec![2, 2]);
        assert_eq!(m.rank(), 1);
        let c3 = FiniteGroup::cyclic(3).unwrap();
        assert_eq!(regular_representation(&poly(&c3, "1+x")).rank(), 2);
    }

    #[test]
    fn antipode_examples() {
        let c4 = FiniteGroup::cyclic(4).unwrap();
        assert_eq!(poly(&c4, "1").antipode(), poly(&c4, "1"));
        assert_eq!(poly(&c4, "1+x").antipode(), poly(&c4, "1+x^3"));
        let a = poly(&c4, "x+x^2");
        assert_eq!(a.antipode().antipode(), a);
        assert_eq!(
            regular_representation(&a.antipode()),
            regular_representation(&a).transpose()
        );
    }

    #[test]
    fn parsing_reduces_mod_relations() {
        let c4 = FiniteGroup::cyclic(4).unwrap();
        assert_eq!(poly(&c4, "1+x+x^2+x^4"), poly(&c4, "x+x^2"));
        assert!(GroupAlgebraElement::parse(&c4, "1+x^4").is_err());
        let g = FiniteGroup::abelian(&[9, 4]).unwrap();
        let p = poly(&g, "1+x^2+xy^2");
        assert_eq!(p.weight(), 3);
        assert!(p.contains(g.from_exponents(&[1, 2]).unwrap()));
        assert_eq!(poly(&g, "x^-1"), poly(&g, "x^8"));
        assert!(g.parse_monomial("q").is_err());
    }

    #[test]
    fn coprime_collapse_examples() {
        let g = FiniteGroup::abelian(&[5, 3, 2]).unwrap();
        let c = coprime_collapse(&g).unwrap().unwrap();
        assert_eq!(c.generator_powers, vec![6, 10, 15]);
        assert_eq!(c.target.order(), 30);
        for a in 0..30 {
            for b in 0..30 {
                assert_eq!(c.map[g.mul(a, b)], c.target.mul(c.map[a], c.map[b]));
            }
        }
        let g94 = FiniteGroup::abelian(&[9, 4]).unwrap();
        assert_eq!(coprime_collapse(&g94).unwrap().unwrap().target.order(), 36);
        let g22 = FiniteGroup::abelian(&[2, 2]).unwrap();
        assert!(coprime_collapse(&g22).unwrap().is_none());
    }

    #[test]
    fn check_element_enumeration() {
        let c2 = FiniteGroup::cyclic(2).unwrap();
        let all: Vec<_> = enumerate_check_elements(&c2, 2, true).unwrap().collect();
        assert_eq!(all, vec![poly(&c2, "1+x")]);
        let c4 = FiniteGroup::cyclic(4).unwrap();
        assert_eq!(enumerate_check_elements(&c4, 3, true).unwrap().count(), 3);
        let c9 = FiniteGroup::cyclic(9).unwrap();
        assert_eq!(enumerate_check_elements(&c9, 4, true).unwrap().count(), 56);
        assert_eq!(enumerate_check_elements(&c9, 4, false).unwrap().count(), 126);
        assert!(enumerate_check_elements(&c4, 5, false).is_err());
        let first = enumerate_check_elements(&c9, 3, true).unwrap().next().unwrap();
        assert_eq!(first.to_string(), "1+x+x^2");
    }

    #[test]
    fn cayley_validation() {
        let z3 = vec![vec![0, 1, 2], vec![1, 2, 0], vec![2, 0, 1]];
        let g = FiniteGroup::from_cayley(&z3).unwrap();
        assert!(g.is_abelian());
        assert_eq!(g.inv(1), 2);
        let bad = vec![vec![0, 1, 2], vec![1, 1, 0], vec![2, 0, 1]];
        assert!(FiniteGroup::from_cayley(&bad).is_err());
        let no_identity = vec![vec![1, 0], vec![0, 1]];
        assert!(FiniteGroup::from_cayley(&no_identity).is_err());
    }

    #[test]
    fn automorphism_counts() {
        let count = |o: &[usize]| abelian_automorphisms(&FiniteGroup::abelian(o).unwrap(), 1 << 20).unwrap().len();
        assert_eq!(count(&[9]), 6);
        assert_eq!(count(&[2, 2]), 6);
        assert_eq!(count(&[4, 2]), 8);
        assert_eq!(count(&[7]), 6);
    }

    #[test]
    fn abelian_group_classification() {
        assert_eq!(abelian_groups_of_order(16).len(), 5);
        assert_eq!(abelian_groups_of_order(12), vec![vec![12], vec![6, 2]]);
        assert_eq!(abelian_groups_of_order(7), vec![vec![7]]);
        for n in 2..=36 {
            for g in abelian_groups_of_order(n) {
                assert_eq!(g.iter().product::<usize>(), n);
            }
        }
    }

    #[test]
    fn group_spec_parsing() {
        assert_eq!(GroupSpec::parse("9x4").unwrap(), GroupSpec::Orders { orders: vec![9, 4] });
        assert_eq!(GroupSpec::parse("C9xC4").unwrap(), GroupSpec::Orders { orders: vec![9, 4] });
        assert_eq!(
            GroupSpec::parse(r#"{"orders":[7]}"#).unwrap(),
            GroupSpec::Orders { orders: vec![7] }
        );
        assert!(GroupSpec::parse("x").is_err());
    }
}
