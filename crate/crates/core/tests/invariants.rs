mod common;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use copycup::complexes::{build_product_code, cohomology_basis, CssCode, ProductKind, TwoTermComplex};
use copycup::gates::{
    logical_action_with_bases, preserves_codespace, synth_ccz_circuit, synth_cz_circuit, synthesize_circuit,
};
use copycup::gf2::{BitMatrix, BitVec};
use copycup::groups::{enumerate_check_elements, FiniteGroup, GroupAlgebraElement};
use copycup::orientation::{
    enumerate_preorientations, verify_preorientation, CupVariant, Label, Mode, PreOrientation, Theorem, TheoremId,
};
use copycup::search::{run_search, Dedup, SearchConfig};

fn labelings(el: &GroupAlgebraElement) -> Vec<PreOrientation> {
    let w = el.weight();
    (0..3usize.pow(w as u32))
        .filter_map(|code| {
            let mut c = code;
            let labels: Vec<Label> = (0..w)
                .map(|_| {
                    let l = Label::ALL[c % 3];
                    c /= 3;
                    l
                })
                .collect();
            (labels.contains(&Label::In) && labels.contains(&Label::Out))
                .then(|| PreOrientation::from_labels(el, &labels).unwrap())
        })
        .collect()
}

fn code(orders: &[usize], polys: &[&str]) -> CssCode {
    let g = FiniteGroup::abelian(orders).unwrap();
    let cx: Vec<TwoTermComplex> =
        polys.iter().map(|p| TwoTermComplex::from_check(GroupAlgebraElement::parse(&g, p).unwrap())).collect();
    build_product_code(&cx, ProductKind::Balanced).unwrap()
}

#[test]
fn two_copy_variants_agree() {
    for g in [FiniteGroup::cyclic(6).unwrap(), FiniteGroup::abelian(&[2, 4]).unwrap()] {
        for w in [3, 4] {
            for el in enumerate_check_elements(&g, w, true).unwrap() {
                for po in labelings(&el) {
                    let r: Vec<bool> =
                        CupVariant::ALL.iter().map(|&v| verify_preorientation(&po, 2, v).unwrap()).collect();
                    assert!(r.iter().all(|&x| x == r[0]), "{po:?}: {r:?}");
                }
            }
        }
    }
}

#[test]
fn singleton_parts_make_variants_agree() {
    for g in [FiniteGroup::cyclic(7).unwrap(), FiniteGroup::abelian(&[3, 3]).unwrap(), common::symmetric3()] {
        for w in [2, 3] {
            for el in enumerate_check_elements(&g, w, false).unwrap() {
                for po in labelings(&el) {
                    let (i, o, f) = po.signature();
                    if i > 1 || o > 1 || f > 1 {
                        continue;
                    }
                    let r: Vec<bool> =
                        CupVariant::ALL.iter().map(|&v| verify_preorientation(&po, 3, v).unwrap()).collect();
                    assert!(r.iter().all(|&x| x == r[0]), "{po:?}: {r:?}");
                }
            }
        }
    }
}

#[test]
fn non_associative_weight4_has_involution_codeword() {
    let mut accepted = 0;
    for orders in [vec![8], vec![4, 2], vec![2, 2, 2], vec![6, 2]] {
        let g = FiniteGroup::abelian(&orders).unwrap();
        for el in enumerate_check_elements(&g, 4, false).unwrap() {
            for po in labelings(&el) {
                if !verify_preorientation(&po, 3, CupVariant::NonAssociative).unwrap() {
                    continue;
                }
                accepted += 1;
                let [g1, g2] = po.in_set() else { panic!("(2,2,0) expected, got {po:?}") };
                let t = g.left_quotient(*g1, *g2);
                assert_eq!(g.element_order(t), 2);
                let one_plus_t = GroupAlgebraElement::from_support(&g, &[0, t]).unwrap();
                assert!(el.product(&one_plus_t).unwrap().is_none(), "{po:?}");
            }
        }
    }
    assert!(accepted > 0);
}

#[test]
fn weight6_theorem_is_a_sufficient_condition() {
    // labelings satisfying the stored (2,2,2) conditions pass the oracle
    let g = FiniteGroup::abelian(&[2, 2, 2]).unwrap();
    let th = Theorem::get(TheoremId::Weight6Assignment222);
    let mut hits = 0;
    for el in enumerate_check_elements(&g, 6, false).unwrap() {
        for po in labelings(&el).into_iter().filter(|p| p.signature() == (2, 2, 2)) {
            if th.accepts(&po) {
                hits += 1;
                assert!(verify_preorientation(&po, 3, CupVariant::NonAssociative).unwrap(), "{po:?}");
            }
        }
    }
    assert!(hits > 0);
}

#[test]
fn synthesized_circuits_preserve_codespace() {
    let squares = [
        code(&[8], &["1+x+x^2+x^3", "1+x+x^3+x^6"]),
        code(&[9, 4], &["1+x^4+x^8", "1+x^2+xy^2"]),
        code(&[5, 4], &["1+y^2+y^3+x^4y", "1+y^2+y^3+x^3y"]),
    ];
    for c in &squares {
        let per: Vec<Vec<PreOrientation>> = c
            .inputs
            .iter()
            .map(|x| enumerate_preorientations(x.coboundary(), 2, CupVariant::Symmetric, Mode::ClosedForm).unwrap())
            .collect();
        for a in &per[0] {
            for b in per[1].iter().take(4) {
                let circuit = synth_cz_circuit(c, &[a.clone(), b.clone()]).unwrap();
                assert!(preserves_codespace(&circuit));
            }
        }
    }
    let cubes = [
        (code(&[7], &["1+x", "1+x^2", "1+x^3"]), CupVariant::Symmetric),
        (code(&[7], &["1+x+x^2+x^3", "1+x+x^3+x^4", "1+x^2+x^3+x^5"]), CupVariant::Symmetric),
        (code(&[4], &["1+x+x^2+x^3"; 3]), CupVariant::NonAssociative),
        (code(&[5], &["1+x", "1+x^2", "1+x"]), CupVariant::NonAssociative),
    ];
    for (c, v) in &cubes {
        let per: Vec<Vec<PreOrientation>> = c
            .inputs
            .iter()
            .map(|x| enumerate_preorientations(x.coboundary(), 3, *v, Mode::Oracle).unwrap())
            .collect();
        let ors: Vec<PreOrientation> = per.iter().map(|l| l[l.len() - 1].clone()).collect();
        let circuit = synth_ccz_circuit(c, &ors, *v).unwrap();
        assert!(preserves_codespace(&circuit));
    }
}

fn shifted(basis: &BitMatrix, hx: &BitMatrix, rng: &mut ChaCha8Rng) -> BitMatrix {
    let rows: Vec<BitVec> = (0..basis.rows())
        .map(|r| {
            let mut v = basis.row(r);
            for s in 0..hx.rows() {
                if rng.gen_bool(0.5) {
                    v.xor_assign(&hx.row(s));
                }
            }
            v
        })
        .collect();
    BitMatrix::from_rows(basis.cols(), &rows).unwrap()
}

#[test]
fn logical_action_ignores_representatives() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let cases = [
        code(&[9], &["1+x+x^3+x^4", "1+x+x^6+x^7", "1+x^2+x^3+x^5"]),
        code(&[7], &["1+x+x^2+x^3", "1+x+x^3+x^4", "1+x^2+x^3+x^5"]),
        code(&[8], &["1+x+x^2+x^3", "1+x+x^3+x^6"]),
    ];
    for c in &cases {
        let lambda = c.lambda();
        let per: Vec<PreOrientation> = c
            .inputs
            .iter()
            .map(|x| enumerate_preorientations(x.coboundary(), lambda, CupVariant::Symmetric, Mode::ClosedForm).unwrap()[0].clone())
            .collect();
        let circuit = synthesize_circuit(c, &per, CupVariant::Symmetric).unwrap();
        assert!(preserves_codespace(&circuit));
        let basis = cohomology_basis(c);
        let reference = logical_action_with_bases(&circuit, &vec![&basis; lambda]);
        for _ in 0..3 {
            let others: Vec<BitMatrix> = (0..lambda).map(|_| shifted(&basis, &c.hx, &mut rng)).collect();
            let refs: Vec<&BitMatrix> = others.iter().collect();
            assert_eq!(logical_action_with_bases(&circuit, &refs), reference);
        }
    }
}

#[test]
fn synthesis_is_deterministic() {
    let c = code(&[9], &["1+x+x^3+x^4", "1+x+x^6+x^7", "1+x^2+x^3+x^5"]);
    let ors: Vec<PreOrientation> = c
        .inputs
        .iter()
        .map(|x| enumerate_preorientations(x.coboundary(), 3, CupVariant::Symmetric, Mode::ClosedForm).unwrap()[0].clone())
        .collect();
    let a = synthesize_circuit(&c, &ors, CupVariant::Symmetric).unwrap();
    let b = synthesize_circuit(&c, &ors, CupVariant::Symmetric).unwrap();
    assert_eq!(a.gates, b.gates);
    let mut sorted = a.gates.clone();
    sorted.sort();
    assert_eq!(a.gates, sorted);
}

#[test]
fn search_is_deterministic_and_sound() {
    let cfg = SearchConfig {
        groups: vec![copycup::groups::GroupSpec::parse("7").unwrap()],
        weight: 2,
        lambda: 3,
        ..SearchConfig::default()
    };
    let a = run_search(&cfg).unwrap();
    let b = run_search(&cfg).unwrap();
    assert_eq!(serde_json::to_string(&a).unwrap(), serde_json::to_string(&b).unwrap());
    for r in &a {
        assert!(r.preserved && r.nontrivial);
        let g = r.group_spec.build().unwrap();
        let cx: Vec<TwoTermComplex> = r
            .polynomials
            .iter()
            .map(|p| TwoTermComplex::from_check(GroupAlgebraElement::parse(&g, p).unwrap()))
            .collect();
        let c = build_product_code(&cx, ProductKind::Balanced).unwrap();
        assert!(c.hx.mul(&c.hz.transpose()).unwrap().is_zero());
    }
    // results are sorted by (n, -k, -d)
    let keys: Vec<_> = a.iter().map(|r| (r.n, std::cmp::Reverse(r.k), std::cmp::Reverse(r.d()))).collect();
    let mut sorted = keys.clone();
    sorted.sort();
    assert_eq!(keys, sorted);
}

#[test]
fn factor_swap_dedup_collapses_orderings() {
    let base = SearchConfig {
        groups: vec![copycup::groups::GroupSpec::parse("5").unwrap()],
        weight: 2,
        lambda: 2,
        require_nontrivial: false,
        ..SearchConfig::default()
    };
    let none = run_search(&SearchConfig { dedup: Dedup::None, ..base.clone() }).unwrap();
    let swap = run_search(&SearchConfig { dedup: Dedup::FactorSwap, ..base.clone() }).unwrap();
    // 4 weight-2 elements with the identity fixed: 16 ordered pairs, 10 unordered
    assert_eq!(none.len(), 16);
    assert_eq!(swap.len(), 10);
    let equiv = run_search(&SearchConfig { dedup: Dedup::Equivalence, ..base }).unwrap();
    assert!(equiv.len() < swap.len());
}
