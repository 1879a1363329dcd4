use fermitree_wasm::{bound_table_csv, tree_census, verify_suite};

#[test]
fn census_of_four_vertices() {
    let v: serde_json::Value = serde_json::from_str(&tree_census(4)).unwrap();
    assert_eq!(v["trees"], 16);
    assert_eq!(v["expected"], 16);
    assert_eq!(v["by_branch_excess"][0], serde_json::json!([0, 12]));
    assert!(tree_census(9).contains("error"));
}

#[test]
fn bound_table_as_csv() {
    let csv = bound_table_csv(2, false, "2,4", 4, 1);
    assert!(csv.starts_with("schema_version,"), "{csv}");
    assert!(csv.lines().count() > 2);
    assert!(bound_table_csv(2, false, "x", 4, 1).contains("error"));
}

#[test]
fn small_verification_runs() {
    let out = verify_suite("pfaffian", 3, 12);
    assert!(out.starts_with("suite,instances,failures,max_error\npfaffian,12,0,"), "{out}");
    assert!(verify_suite("nope", 0, 1).contains("error"));
}
