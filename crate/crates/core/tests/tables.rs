mod common;

use copycup::search::{verify_manifest, ManifestOptions, RowStatus};

const ALL: [&str; 6] = [
    "ccz_weight2.json",
    "ccz_weight4_trivial.json",
    "ccz_weight4_nontrivial.json",
    "cz_weight3.json",
    "cz_weight4.json",
    "tricycle_cz.json",
];

#[test]
fn manifests_parse() {
    for name in ALL {
        let m = common::manifest(name);
        assert!(!m.rows.is_empty(), "{name}");
        for row in &m.rows {
            assert!(row.group.build().is_ok(), "{name}");
        }
    }
}

#[test]
fn nontrivial_weight4_cube() {
    let report = verify_manifest(&common::manifest("ccz_weight4_nontrivial.json"), &ManifestOptions::default()).unwrap();
    assert!(report.all_passed(), "{report:?}");
}

#[test]
fn tricycle_factors_have_both_labelings() {
    let report = verify_manifest(&common::manifest("tricycle_cz.json"), &ManifestOptions::default()).unwrap();
    assert!(report.all_passed(), "{report:?}");
    // the gate check is reported as skipped rather than passed
    assert!(report.rows.iter().all(|r| r.skipped.iter().any(|s| s.starts_with("gate:"))));
}

#[test]
fn trivial_table_c4_row_reduces_to_weight_two() {
    // 1+x+x^2+x^4 collapses to x+x^2 in C4, a translate of 1+x, whose cube carries a
    // nontrivial CCZ like the C2 row of the weight-2 table. The other rows act trivially.
    let report =
        verify_manifest(&common::manifest("ccz_weight4_trivial.json"), &ManifestOptions::default()).unwrap();
    for row in &report.rows {
        if row.label.contains(" C4 ") {
            assert_eq!(row.status, RowStatus::Fail);
            let bad: Vec<&str> = row.checks.iter().filter(|c| !c.ok).map(|c| c.name.as_str()).collect();
            assert!(bad.contains(&"nontrivial logical action"), "{bad:?}");
            assert!(row.checks.iter().any(|c| c.name == "n" && c.ok));
            assert!(row.checks.iter().any(|c| c.name == "k" && c.ok));
        } else {
            assert_eq!(row.status, RowStatus::Pass, "{row:?}");
        }
    }
}
