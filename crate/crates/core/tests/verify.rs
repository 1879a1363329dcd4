use fermitree::error::Error;
use fermitree::verify::{case_specs, replay, run, CaseRow, Suite, VerifyConfig};

fn small(suites: Vec<Suite>) -> VerifyConfig {
    VerifyConfig { suites, seed: 7, m_max: 3, n_max: 4, configs: 2, lattice: 5, limit: Some(40), ..VerifyConfig::default() }
}

#[test]
fn suites_pass_on_small_instances() {
    let report = run(&small(Suite::ALL.to_vec()), 2).unwrap();
    for suite in Suite::ALL {
        assert!(report.rows.iter().any(|r| r.suite == suite), "{suite} produced no rows");
    }
    let failures: Vec<&CaseRow> = report.failures().collect();
    assert!(failures.is_empty(), "{failures:?}");
}

#[test]
fn reports_do_not_depend_on_thread_count() {
    let config = VerifyConfig { limit: None, ..small(vec![Suite::Recursion, Suite::Gram, Suite::Submult]) };
    let one = run(&config, 1).unwrap().to_jsonl().unwrap();
    let three = run(&config, 3).unwrap().to_jsonl().unwrap();
    assert_eq!(one, three);
    let other_seed = run(&VerifyConfig { seed: 8, ..config }, 1).unwrap().to_jsonl().unwrap();
    assert_ne!(one, other_seed);
}

#[test]
fn rows_replay_exactly() {
    let report = run(&small(Suite::ALL.to_vec()), 1).unwrap();
    for row in report.rows.iter().step_by(7) {
        assert_eq!(&replay(row), row);
    }
}

#[test]
fn jsonl_rows_roundtrip() {
    let report = run(&small(vec![Suite::Pfaffian, Suite::Ibp]), 1).unwrap();
    let text = report.to_jsonl().unwrap();
    assert_eq!(text.lines().count(), report.rows.len());
    for (line, row) in text.lines().zip(&report.rows) {
        let back: CaseRow = serde_json::from_str(line).unwrap();
        assert_eq!(&back, row);
    }
    let csv = report.summary_csv().unwrap();
    assert!(csv.starts_with("suite,instances,failures,max_error\npfaffian,40,0,"));
}

#[test]
fn recursion_sweep_covers_every_shape() {
    let config = VerifyConfig { configs: 1, ..VerifyConfig::default() };
    let specs = case_specs(Suite::Recursion, &config);
    // trees × admissible 𝐧 × spin counts, one configuration each
    let mut combos = std::collections::BTreeSet::new();
    for s in &specs {
        if let fermitree::verify::CaseSpec::Recursion { edges, n, nspin, .. } = s {
            combos.insert((edges.clone(), n.clone(), *nspin));
        }
    }
    assert_eq!(combos.len(), specs.len());
    assert!(specs.len() > 1000);
}

#[test]
fn invalid_configuration_is_rejected() {
    let empty = VerifyConfig { suites: Vec::new(), ..VerifyConfig::default() };
    assert!(matches!(run(&empty, 1), Err(Error::InvalidParameter(_))));
    let bad_tol = VerifyConfig { tol: Some(0.0), ..VerifyConfig::default() };
    assert!(bad_tol.validate().is_err());
    assert!("nope".parse::<Suite>().is_err());
    assert_eq!("free-energy".parse::<Suite>().unwrap(), Suite::FreeEnergy);
}

#[test]
fn failed_rows_keep_their_infinite_error() {
    let spec = fermitree::verify::CaseSpec::Recursion {
        edges: vec![(1, 2)],
        m: 2,
        root: 1,
        n: vec![2, 7],
        nspin: 1,
        lattice: 4,
        config: 0,
    };
    let pool = fermitree::verify::KernelPool::recursion(1, 4);
    let row = fermitree::verify::run_case(Suite::Recursion, 1, 0, &spec, 1e-10, &pool);
    assert!(!row.passed && row.error.is_infinite() && row.detail.is_some());
    let back: CaseRow = serde_json::from_str(&serde_json::to_string(&row).unwrap()).unwrap();
    assert_eq!(back, row);
}
