//! Browser bindings: tree census, bound tables and small verification runs.
//!
//! Every export returns a string (JSON or CSV); failures come back as
//! `{"error": "..."}` so the page needs no exception handling.

use serde::Serialize;
use wasm_bindgen::prelude::*;

use fermitree::bounds::{bound_table, BoundTableConfig};
use fermitree::trees::{enumerate_trees, Tree};
use fermitree::verify::{case_specs, run_case, KernelPool, Suite, VerifyConfig};

#[derive(Serialize)]
struct Census {
    m: usize,
    trees: usize,
    expected: u64,
    /// `(branch excess, count)`.
    by_branch_excess: Vec<(usize, usize)>,
    degree_factorial_sum: u128,
    degree_factorial_cap: u128,
}

fn error_json(msg: impl std::fmt::Display) -> String {
    serde_json::json!({ "error": msg.to_string() }).to_string()
}

fn census(m: usize) -> fermitree::Result<Census> {
    let trees = if m == 1 { vec![Tree::single()] } else { enumerate_trees(m)? };
    let mut by = std::collections::BTreeMap::new();
    let mut sum = 0u128;
    for t in &trees {
        *by.entry(t.branch_excess()).or_insert(0) += 1;
        sum += t.degrees().iter().map(|&d| (1..=d as u128).product::<u128>()).product::<u128>();
    }
    Ok(Census {
        m,
        trees: trees.len(),
        expected: (m as u64).pow(m.saturating_sub(2) as u32),
        by_branch_excess: by.into_iter().collect(),
        degree_factorial_sum: sum,
        degree_factorial_cap: (1..=m as u128).product::<u128>() * 8u128.pow(m as u32),
    })
}

/// Labeled trees on `m ≤ 8` vertices, grouped by branch excess, as JSON.
#[wasm_bindgen]
pub fn tree_census(m: usize) -> String {
    if !(1..=8).contains(&m) {
        return error_json(format!("m must lie in 1..=8, got {m}"));
    }
    match census(m) {
        Ok(c) => serde_json::to_string(&c).unwrap_or_else(error_json),
        Err(e) => error_json(e),
    }
}

/// Bound table as CSV; `legs` is a comma-separated list such as `"2,4"`.
#[wasm_bindgen]
pub fn bound_table_csv(m: usize, caterpillar: bool, legs: &str, lattice: usize, seed: u32) -> String {
    let legs: Result<Vec<usize>, _> = legs.split(',').map(|s| s.trim().parse::<usize>()).collect();
    let Ok(legs) = legs else {
        return error_json("legs must be a comma-separated list of integers");
    };
    let config = BoundTableConfig { m, caterpillar, legs, lattice, seed: seed as u64, ..BoundTableConfig::default() };
    match bound_table(&config).and_then(|r| r.to_csv()) {
        Ok(csv) => csv,
        Err(e) => error_json(e),
    }
}

/// First `limit` instances of one suite, run on the calling thread; returns
/// the summary CSV followed by any failed rows.
#[wasm_bindgen]
pub fn verify_suite(suite: &str, seed: u32, limit: usize) -> String {
    let suite: Suite = match suite.parse() {
        Ok(s) => s,
        Err(e) => return error_json(e),
    };
    let config = VerifyConfig {
        suites: vec![suite],
        seed: seed as u64,
        m_max: 3,
        configs: 2,
        limit: Some(limit),
        ..VerifyConfig::default()
    };
    let pool = match KernelPool::for_suite(suite, &config) {
        Ok(p) => p,
        Err(e) => return error_json(e),
    };
    let tol = config.tol_for(suite);
    let rows: Vec<_> = case_specs(suite, &config)
        .iter()
        .take(limit)
        .enumerate()
        .map(|(i, spec)| run_case(suite, config.seed, i, spec, tol, &pool))
        .collect();
    let report = fermitree::verify::VerifyReport { rows };
    let mut out = match report.summary_csv() {
        Ok(s) => s,
        Err(e) => return error_json(e),
    };
    for row in report.failures() {
        out.push_str(&serde_json::to_string(row).unwrap_or_else(error_json));
        out.push('\n');
    }
    out
}
