//! Parameter sweeps over groups and check elements, and table manifests.

use std::collections::BTreeSet;
use std::sync::Arc;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::complexes::{
    build_product_code, distance_auto, distance_exact_by_weight, distance_upper_randomized, CheckWeights,
    CssCode, DistanceOptions, DistanceReport, ProductKind, TwoTermComplex, DEFAULT_DISTANCE_CEILING,
};
use crate::error::{Error, Result};
use crate::gates::{logical_action_ccz, logical_action_cz, preserves_codespace, synthesize_circuit};
use crate::groups::{
    abelian_automorphisms, abelian_groups_of_order, enumerate_check_elements, FiniteGroup, GroupAlgebraElement,
    GroupSpec,
};
use crate::orientation::{
    closed_form_theorem, enumerate_preorientations, CupVariant, LabelingJson, Mode, PreOrientation, Signature,
};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct DistanceConfig {
    /// Largest weight searched exhaustively.
    pub w_cap: usize,
    pub trials: usize,
    pub seed: u64,
    pub ceiling: u128,
}

impl Default for DistanceConfig {
    fn default() -> Self {
        DistanceConfig { w_cap: 8, trials: 2000, seed: 1, ceiling: DEFAULT_DISTANCE_CEILING }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Dedup {
    /// Every ordered factor choice is reported.
    None,
    /// Factor tuples are multisets.
    FactorSwap,
    /// Also identify tuples related by translations and group automorphisms.
    Equivalence,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SearchConfig {
    pub groups: Vec<GroupSpec>,
    /// Adds every abelian group with order in this inclusive range.
    pub abelian_orders: Option<(usize, usize)>,
    pub weight: usize,
    pub lambda: usize,
    pub variant: CupVariant,
    pub product: ProductKind,
    pub fix_identity: bool,
    /// Classical filter on dim ker of each check element.
    pub max_classical_k: Option<usize>,
    pub min_k: usize,
    pub min_d: Option<usize>,
    pub require_nontrivial: bool,
    pub distance: Option<DistanceConfig>,
    pub dedup: Dedup,
    /// Cap on labeling combinations tried per code.
    pub max_labeling_combinations: usize,
}

impl Default for SearchConfig {
    fn default() -> Self {
        SearchConfig {
            groups: vec![],
            abelian_orders: None,
            weight: 2,
            lambda: 3,
            variant: CupVariant::Symmetric,
            product: ProductKind::Balanced,
            fix_identity: true,
            max_classical_k: None,
            min_k: 1,
            min_d: None,
            require_nontrivial: true,
            distance: None,
            dedup: Dedup::Equivalence,
            max_labeling_combinations: 4096,
        }
    }
}

impl SearchConfig {
    pub fn validate(&self) -> Result<()> {
        if self.groups.is_empty() && self.abelian_orders.is_none() {
            return Err(Error::InvalidParameter("search needs at least one group".into()));
        }
        if self.weight < 2 {
            return Err(Error::InvalidParameter("check weight must be at least 2".into()));
        }
        if !(2..=3).contains(&self.lambda) {
            return Err(Error::InvalidParameter(format!("lambda {} not in 2..=3", self.lambda)));
        }
        if self.lambda == 3 && self.variant == CupVariant::OutsideIn && self.require_nontrivial {
            return Err(Error::Unsupported("gate synthesis for the outside-in cup product".into()));
        }
        Ok(())
    }

    pub fn resolved_groups(&self) -> Result<Vec<Arc<FiniteGroup>>> {
        let mut out = Vec::new();
        for spec in &self.groups {
            out.push(spec.build()?);
        }
        if let Some((lo, hi)) = self.abelian_orders {
            for n in lo.max(1)..=hi {
                for orders in abelian_groups_of_order(n) {
                    out.push(FiniteGroup::abelian(&orders)?);
                }
            }
        }
        Ok(out)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SearchResult {
    pub group: String,
    pub group_spec: GroupSpec,
    pub polynomials: Vec<String>,
    /// Labelings (of the coboundaries) of the first combination with nontrivial action,
    /// or of the first combination tried.
    pub labelings: Vec<LabelingJson>,
    pub signatures: Vec<Signature>,
    pub n: usize,
    pub k: usize,
    pub check_weights: CheckWeights,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub distance: Option<DistanceReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub distance_error: Option<String>,
    pub preorientation: bool,
    pub preserved: bool,
    pub nontrivial: bool,
    pub labeling_combinations: usize,
}

impl SearchResult {
    pub fn d(&self) -> Option<usize> {
        self.distance.as_ref().and_then(|d| d.exact().or(d.upper()))
    }
}

/// Outcome of trying labeling combinations on one code.
#[derive(Clone, Debug)]
pub struct GateScan {
    pub tried: usize,
    pub preserved: bool,
    pub nontrivial: Option<Vec<PreOrientation>>,
    pub first: Option<Vec<PreOrientation>>,
}

/// Try labeling combinations (cartesian product, in order) until one acts nontrivially.
pub fn scan_labelings(
    code: &CssCode,
    per_factor: &[Vec<PreOrientation>],
    variant: CupVariant,
    max_combinations: usize,
) -> Result<GateScan> {
    let lambda = code.lambda();
    let mut scan = GateScan { tried: 0, preserved: true, nontrivial: None, first: None };
    if per_factor.iter().any(Vec::is_empty) {
        return Ok(scan);
    }
    let mut pick = vec![0usize; lambda];
    'outer: loop {
        if scan.tried >= max_combinations {
            break;
        }
        let combo: Vec<PreOrientation> = pick.iter().zip(per_factor).map(|(&i, l)| l[i].clone()).collect();
        let circuit = synthesize_circuit(code, &combo, variant)?;
        scan.tried += 1;
        if scan.first.is_none() {
            scan.first = Some(combo.clone());
        }
        if !preserves_codespace(&circuit) {
            scan.preserved = false;
        }
        let nontrivial = if lambda == 2 { logical_action_cz(&circuit) } else { logical_action_ccz(&circuit) };
        if nontrivial {
            scan.nontrivial = Some(combo);
            break;
        }
        for s in 0..lambda {
            pick[s] += 1;
            if pick[s] < per_factor[s].len() {
                continue 'outer;
            }
            pick[s] = 0;
        }
        break;
    }
    Ok(scan)
}

fn valid_labelings(element: &GroupAlgebraElement, lambda: usize, variant: CupVariant) -> Result<Vec<PreOrientation>> {
    let mode = if closed_form_theorem(element.weight(), lambda, variant).is_ok() {
        Mode::ClosedForm
    } else {
        Mode::Oracle
    };
    enumerate_preorientations(element, lambda, variant, mode)
}

/// Canonical key of a factor tuple up to translations, factor order and automorphisms.
pub fn equivalence_key(elements: &[GroupAlgebraElement], automorphisms: &[Vec<usize>]) -> Vec<Vec<usize>> {
    let g = elements[0].group();
    let canon = |support: &[usize]| -> Vec<usize> {
        (0..g.order())
            .map(|h| {
                let mut s: Vec<usize> = support.iter().map(|&x| g.mul(x, h)).collect();
                s.sort_unstable();
                s
            })
            .min()
            .expect("nonempty group")
    };
    automorphisms
        .iter()
        .map(|phi| {
            let mut key: Vec<Vec<usize>> = elements
                .iter()
                .map(|e| canon(&e.support().iter().map(|&x| phi[x]).collect::<Vec<_>>()))
                .collect();
            key.sort();
            key
        })
        .min()
        .unwrap_or_default()
}

fn multisets(m: usize, len: usize, ordered: bool) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut cur = Vec::with_capacity(len);
    fn rec(m: usize, len: usize, start: usize, ordered: bool, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == len {
            out.push(cur.clone());
            return;
        }
        for i in (if ordered { 0 } else { start })..m {
            cur.push(i);
            rec(m, len, i, ordered, cur, out);
            cur.pop();
        }
    }
    rec(m, len, 0, ordered, &mut cur, &mut out);
    out
}

struct Candidate {
    check: GroupAlgebraElement,
    labelings: Vec<PreOrientation>,
}

fn group_candidates(group: &Arc<FiniteGroup>, cfg: &SearchConfig) -> Result<Vec<Candidate>> {
    if cfg.weight > group.order() {
        return Ok(vec![]);
    }
    let checks: Vec<GroupAlgebraElement> = enumerate_check_elements(group, cfg.weight, cfg.fix_identity)?
        .filter(|a| cfg.max_classical_k.is_none_or(|m| a.classical_k() <= m))
        .collect();
    let found: Vec<Result<Option<Candidate>>> = checks
        .into_par_iter()
        .map(|check| {
            let cx = TwoTermComplex::from_check(check.clone());
            let labelings = valid_labelings(cx.coboundary(), cfg.lambda, cfg.variant)?;
            Ok((!labelings.is_empty()).then_some(Candidate { check, labelings }))
        })
        .collect();
    let mut out = Vec::new();
    for f in found {
        if let Some(c) = f? {
            out.push(c);
        }
    }
    Ok(out)
}

fn evaluate_tuple(
    group: &Arc<FiniteGroup>,
    cands: &[&Candidate],
    cfg: &SearchConfig,
) -> Result<Option<SearchResult>> {
    let complexes: Vec<TwoTermComplex> = cands.iter().map(|c| TwoTermComplex::from_check(c.check.clone())).collect();
    let code = build_product_code(&complexes, cfg.product)?;
    if code.k < cfg.min_k {
        return Ok(None);
    }
    let per_factor: Vec<Vec<PreOrientation>> = cands.iter().map(|c| c.labelings.clone()).collect();
    let scan = scan_labelings(&code, &per_factor, cfg.variant, cfg.max_labeling_combinations)?;
    if cfg.require_nontrivial && scan.nontrivial.is_none() {
        return Ok(None);
    }
    let shown = scan.nontrivial.clone().or(scan.first.clone()).unwrap_or_default();
    let (distance, distance_error) = match &cfg.distance {
        None => (None, None),
        Some(dc) => {
            let opts = DistanceOptions { ceiling: dc.ceiling, use_symmetry: true };
            match distance_auto(&code, dc.w_cap, dc.trials, dc.seed, &opts) {
                Ok(r) => (Some(r), None),
                Err(e) => (None, Some(e.to_string())),
            }
        }
    };
    let result = SearchResult {
        group: group.name(),
        group_spec: group.spec(),
        polynomials: cands.iter().map(|c| c.check.to_string()).collect(),
        labelings: shown.iter().map(PreOrientation::to_json).collect(),
        signatures: shown.iter().map(PreOrientation::signature).collect(),
        n: code.n,
        k: code.k,
        check_weights: CheckWeights::of(&code),
        distance,
        distance_error,
        preorientation: true,
        preserved: scan.preserved,
        nontrivial: scan.nontrivial.is_some(),
        labeling_combinations: scan.tried,
    };
    if let (Some(min_d), Some(d)) = (cfg.min_d, result.d()) {
        if d < min_d {
            return Ok(None);
        }
    }
    Ok(Some(result))
}

/// Full pipeline; results sorted by (n, -k, -d) then group and polynomials.
pub fn run_search(cfg: &SearchConfig) -> Result<Vec<SearchResult>> {
    cfg.validate()?;
    let mut results = Vec::new();
    for group in cfg.resolved_groups()? {
        let cands = group_candidates(&group, cfg)?;
        if cands.is_empty() {
            continue;
        }
        let mut tuples = multisets(cands.len(), cfg.lambda, cfg.dedup == Dedup::None);
        if cfg.dedup == Dedup::Equivalence && group.is_abelian() {
            if let Ok(auts) = abelian_automorphisms(&group, 1 << 22) {
                let mut seen = BTreeSet::new();
                tuples.retain(|t| {
                    let elems: Vec<GroupAlgebraElement> = t.iter().map(|&i| cands[i].check.clone()).collect();
                    seen.insert(equivalence_key(&elems, &auts))
                });
            }
        }
        let rows: Vec<Result<Option<SearchResult>>> = tuples
            .par_iter()
            .map(|t| {
                let picked: Vec<&Candidate> = t.iter().map(|&i| &cands[i]).collect();
                evaluate_tuple(&group, &picked, cfg)
            })
            .collect();
        for r in rows {
            if let Some(row) = r? {
                results.push(row);
            }
        }
    }
    results.sort_by(|a, b| {
        let key = |r: &SearchResult| (r.n, std::cmp::Reverse(r.k), std::cmp::Reverse(r.d()));
        key(a).cmp(&key(b)).then_with(|| a.group.cmp(&b.group)).then_with(|| a.polynomials.cmp(&b.polynomials))
    });
    Ok(results)
}

pub fn results_to_csv(results: &[SearchResult]) -> String {
    let mut out = String::from("group,n,k,d,distance_method,polynomials,signatures,preserved,nontrivial\n");
    for r in results {
        let (d, method) = match &r.distance {
            Some(DistanceReport::Exact { d, .. }) => (d.to_string(), "exact"),
            Some(DistanceReport::Certified { d, .. }) => (d.to_string(), "certified"),
            Some(DistanceReport::Bounds { lower, upper, .. }) => (format!("{lower}..{upper}"), "bounds"),
            Some(DistanceReport::NoLogicals) => (String::new(), "no_logicals"),
            None => (String::new(), ""),
        };
        let sigs: Vec<String> = r.signatures.iter().map(|(a, b, c)| format!("({a} {b} {c})")).collect();
        out.push_str(&format!(
            "{},{},{},{},{},{},{},{},{}\n",
            r.group,
            r.n,
            r.k,
            d,
            method,
            r.polynomials.join(" ; "),
            sigs.join(" "),
            r.preserved,
            r.nontrivial
        ));
    }
    out
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GateCheck {
    Cz,
    Ccz,
    Skip,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DistanceCheck {
    #[default]
    Exact,
    /// Randomized upper bound must equal d; no logical below min(lower_cap, d).
    Upper,
    Skip,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub table: String,
    #[serde(default)]
    pub description: String,
    #[serde(default = "default_product")]
    pub product: ProductKind,
    pub lambda: usize,
    pub variant: CupVariant,
    pub gate: GateCheck,
    /// Also require a valid two-copy labeling on every factor.
    #[serde(default)]
    pub also_two_copy: bool,
    #[serde(default)]
    pub skip_reason: Option<String>,
    pub rows: Vec<ManifestRow>,
}

fn default_product() -> ProductKind {
    ProductKind::Balanced
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ManifestRow {
    pub group: GroupSpec,
    pub polynomials: Vec<String>,
    pub n: usize,
    pub k: usize,
    #[serde(default)]
    pub d: Option<usize>,
    #[serde(default)]
    pub distance: DistanceCheck,
    /// (X check weight, Z check weight)
    #[serde(default)]
    pub check_weights: Option<(usize, usize)>,
    /// Signatures of the labeling combination expected to act nontrivially.
    #[serde(default)]
    pub assignments: Option<Vec<Signature>>,
    #[serde(default)]
    pub nontrivial: Option<bool>,
    #[serde(default)]
    pub note: Option<String>,
}

impl Manifest {
    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ManifestOptions {
    pub trials: usize,
    pub seed: u64,
    /// Exhaustive lower-bound reach for upper-bound rows is min(lower_cap, d) - 1.
    pub lower_cap: usize,
    pub ceiling: u128,
    pub max_labeling_combinations: usize,
    /// Skip all distance checks.
    pub skip_distance: bool,
}

impl Default for ManifestOptions {
    fn default() -> Self {
        ManifestOptions {
            trials: 10_000,
            seed: 1,
            lower_cap: 6,
            ceiling: DEFAULT_DISTANCE_CEILING,
            max_labeling_combinations: 4096,
            skip_distance: false,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RowStatus {
    Pass,
    Fail,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CheckOutcome {
    pub name: String,
    pub expected: String,
    pub actual: String,
    pub ok: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RowReport {
    pub label: String,
    pub status: RowStatus,
    pub checks: Vec<CheckOutcome>,
    pub skipped: Vec<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ManifestReport {
    pub table: String,
    pub rows: Vec<RowReport>,
}

impl ManifestReport {
    pub fn all_passed(&self) -> bool {
        self.rows.iter().all(|r| r.status == RowStatus::Pass)
    }
}

fn outcome(name: &str, expected: impl ToString, actual: impl ToString) -> CheckOutcome {
    let (expected, actual) = (expected.to_string(), actual.to_string());
    CheckOutcome { name: name.into(), ok: expected == actual, expected, actual }
}

fn verify_row(m: &Manifest, row: &ManifestRow, opts: &ManifestOptions) -> Result<RowReport> {
    let group = row.group.build()?;
    let label = format!(
        "[[{},{},{}]] {} {}",
        row.n,
        row.k,
        row.d.map_or("?".into(), |d| d.to_string()),
        group.name(),
        row.polynomials.join(", ")
    );
    let mut checks = Vec::new();
    let mut skipped = Vec::new();
    let checks_el: Vec<GroupAlgebraElement> = row
        .polynomials
        .iter()
        .map(|p| GroupAlgebraElement::parse(&group, p))
        .collect::<Result<_>>()?;
    let complexes: Vec<TwoTermComplex> = checks_el.iter().cloned().map(TwoTermComplex::from_check).collect();
    let code = build_product_code(&complexes, m.product)?;
    checks.push(outcome("n", row.n, code.n));
    checks.push(outcome("k", row.k, code.k));
    if let Some((wx, wz)) = row.check_weights {
        let cw = CheckWeights::of(&code);
        checks.push(outcome("x check weight", format!("[{wx}]"), format!("{:?}", cw.x)));
        checks.push(outcome("z check weight", format!("[{wz}]"), format!("{:?}", cw.z)));
    }

    let mut per_factor = Vec::new();
    for (i, cx) in complexes.iter().enumerate() {
        let mut valid = valid_labelings(cx.coboundary(), m.lambda, m.variant)?;
        checks.push(outcome(&format!("factor {} pre-orientation", i + 1), true, !valid.is_empty()));
        if m.also_two_copy {
            let two = valid_labelings(cx.coboundary(), 2, m.variant)?;
            checks.push(outcome(&format!("factor {} two-copy pre-orientation", i + 1), true, !two.is_empty()));
        }
        if let Some(sigs) = &row.assignments {
            valid.retain(|po| po.signature() == sigs[i]);
            checks.push(outcome(
                &format!("factor {} has assignment {:?}", i + 1, sigs[i]),
                true,
                !valid.is_empty(),
            ));
        }
        per_factor.push(valid);
    }

    match m.gate {
        GateCheck::Skip => skipped.push(format!(
            "gate: {}",
            m.skip_reason.clone().unwrap_or_else(|| "out of scope".into())
        )),
        GateCheck::Cz | GateCheck::Ccz => {
            let want_lambda = if m.gate == GateCheck::Cz { 2 } else { 3 };
            if code.lambda() != want_lambda {
                return Err(Error::InvalidParameter(format!("{label}: gate/product arity mismatch")));
            }
            let scan = scan_labelings(&code, &per_factor, m.variant, opts.max_labeling_combinations)?;
            checks.push(outcome("codespace preserved", true, scan.preserved));
            if let Some(expect) = row.nontrivial {
                checks.push(outcome("nontrivial logical action", expect, scan.nontrivial.is_some()));
                if !expect {
                    let total: usize = per_factor.iter().map(Vec::len).product();
                    checks.push(outcome("all labeling combinations tried", total, scan.tried));
                }
            }
        }
    }

    match (row.d, row.distance) {
        (_, _) if opts.skip_distance => skipped.push("distance: disabled".into()),
        (None, _) | (_, DistanceCheck::Skip) => skipped.push("distance: not checked".into()),
        (Some(d), DistanceCheck::Exact) => {
            let found = distance_exact_by_weight(&code, d)?;
            checks.push(outcome("d (exhaustive)", d, found.map_or("none".into(), |x| x.to_string())));
        }
        (Some(d), DistanceCheck::Upper) => {
            let upper = distance_upper_randomized(&code, opts.trials, opts.seed);
            checks.push(outcome("d (randomized upper bound)", d, upper.map_or("none".into(), |x| x.to_string())));
            let reach = opts.lower_cap.min(d) - 1;
            let low = distance_exact_by_weight(&code, reach)?;
            checks.push(outcome(
                &format!("no logical of weight <= {reach}"),
                "none",
                low.map_or("none".into(), |x| x.to_string()),
            ));
        }
    }
    let status = if checks.iter().all(|c| c.ok) { RowStatus::Pass } else { RowStatus::Fail };
    Ok(RowReport { label, status, checks, skipped })
}

/// Rebuild and check every row; rows are independent and checked in parallel.
pub fn verify_manifest(m: &Manifest, opts: &ManifestOptions) -> Result<ManifestReport> {
    let rows: Vec<Result<RowReport>> = m.rows.par_iter().map(|r| verify_row(m, r, opts)).collect();
    Ok(ManifestReport { table: m.table.clone(), rows: rows.into_iter().collect::<Result<_>>()? })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn multiset_counts() {
        assert_eq!(multisets(4, 3, false).len(), 20);
        assert_eq!(multisets(4, 2, true).len(), 16);
    }

    #[test]
    fn small_search_c7() {
        let cfg = SearchConfig {
            groups: vec![GroupSpec::parse("7").unwrap()],
            weight: 2,
            lambda: 3,
            distance: Some(DistanceConfig { w_cap: 4, ..Default::default() }),
            ..Default::default()
        };
        let res = run_search(&cfg).unwrap();
        assert!(res.iter().any(|r| r.n == 21 && r.k == 3 && r.d() == Some(3) && r.nontrivial));
        assert!(res.iter().all(|r| r.preserved));
        let again = run_search(&cfg).unwrap();
        assert_eq!(serde_json::to_string(&res).unwrap(), serde_json::to_string(&again).unwrap());
    }

    #[test]
    fn config_validation() {
        assert!(SearchConfig::default().validate().is_err());
        let cfg = SearchConfig { groups: vec![GroupSpec::parse("5").unwrap()], weight: 1, ..Default::default() };
        assert!(cfg.validate().is_err());
    }

    #[test]
    fn equivalence_identifies_translates() {
        let g = FiniteGroup::cyclic(9).unwrap();
        let auts = abelian_automorphisms(&g, 1 << 20).unwrap();
        let a = GroupAlgebraElement::parse(&g, "1+x+x^3+x^4").unwrap();
        let b = GroupAlgebraElement::parse(&g, "x^2+x^3+x^5+x^6").unwrap();
        let c = GroupAlgebraElement::parse(&g, "1+x^2+x^6+x^8").unwrap(); // x -> x^2 image of a
        let k = |v: &[&GroupAlgebraElement]| {
            equivalence_key(&v.iter().map(|e| (*e).clone()).collect::<Vec<_>>(), &auts)
        };
        assert_eq!(k(&[&a]), k(&[&b]));
        assert_eq!(k(&[&a]), k(&[&c]));
    }
}
