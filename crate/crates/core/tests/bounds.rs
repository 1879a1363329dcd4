use std::sync::Arc;

use fermitree::amplitude::{tree_amplitude_value, AmplitudeProblem, ContractionMethod};
use fermitree::bounds::*;
use fermitree::grassmann::{Covariance, MomentumKernel};
use fermitree::lattice::Lattice;
use fermitree::random;
use fermitree::trees::{caterpillar, enumerate_trees, root_tree, Tree};
use fermitree::{Complex64, Error};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn path(m: usize) -> Tree {
    let edges: Vec<(usize, usize)> = (1..m).map(|l| (l, l + 1)).collect();
    Tree::new(m, &edges).unwrap()
}

fn factorial(n: usize) -> f64 {
    (1..=n).map(|k| k as f64).product()
}

#[test]
fn delta_toy_norms_by_hand() {
    // C_{01}(x) = δ_{x,0}, C_{10}(x) = −δ_{x,0} on L = 4 with spacing 1/2.
    let lat = Lattice::with_spacing(vec![4], vec![0.5]).unwrap();
    let mut pos = vec![Complex64::new(0.0, 0.0); 16];
    pos[4] = Complex64::new(1.0, 0.0);
    pos[8] = Complex64::new(-1.0, 0.0);
    let cov = Covariance::from_position(lat, 2, pos).unwrap();
    let n = covariance_norms(&cov);
    // Ĉ = ±cell = ±1/2 everywhere on the off-diagonal blocks.
    assert!((n.sup_hat - 0.5).abs() < 1e-14);
    // |𝕋|⁻¹ Σ over 2 blocks × 4 momenta of 1/2, with |𝕋| = 2.
    assert!((n.l1_hat - 2.0).abs() < 1e-14);
    assert!((n.l1_pos - 0.5).abs() < 1e-14);
    // Constant blocks: only the two boundary steps, each of size 1/2.
    let h = std::f64::consts::PI;
    assert!((n.grad_sup - 0.5 / h).abs() < 1e-14);
    assert!((n.grad_l1 - 0.5 * (2.0 * 2.0 * 0.5) / h).abs() < 1e-14);
    assert!(n.l1_hat <= 4.0 / 2.0 * 4.0 * n.sup_hat + 1e-14);
}

#[test]
fn interior_support_has_no_boundary_steps() {
    let lat = Lattice::one_dim(8);
    // support at centred momenta {-1, 0, 1}, values 1, 2, 1
    let cov = Covariance::from_fn(lat.clone(), 1, |_, _, p| {
        let k = lat.centered(p)[0];
        Complex64::new(match k {
            -1 | 1 => 1.0,
            0 => 2.0,
            _ => 0.0,
        }, 0.0)
    });
    let n = covariance_norms(&cov);
    let h = 2.0 * std::f64::consts::PI / 8.0;
    // differences 1, 1, -1, -1
    assert!((n.grad_sup - 1.0 / h).abs() < 1e-14);
    assert!((n.grad_l1 - 4.0 / 8.0 / h).abs() < 1e-14);
    let c = n.l1_hat * n.grad_sup + n.grad_l1 * n.sup_hat;
    assert!((n.frak_c() - c).abs() < 1e-14);
}

#[test]
fn standard_and_theorem_arithmetic() {
    let u = CovarianceNorms::unit();
    // m = 2, n = (4, 4): six external legs, prefactor 6³/6! = 0.3
    let s = standard_bound(&u, &path(2), &[4, 4], &[1.0, 1.0]).unwrap();
    assert!((s - 0.3 * 256.0).abs() < 1e-10);
    let s0 = standard_bound(&u, &path(2), &[1, 1], &[1.0, 1.0]).unwrap();
    assert!((s0 - 4.0).abs() < 1e-12);

    let norms = CovarianceNorms { sup_hat: 1.5, l1_hat: 0.7, l1_pos: 2.0, grad_sup: 3.0, grad_l1: 0.25 };
    let t1 = theorem1_bound(&norms, &Tree::single(), &[4], &[0.9], 2, 8.0).unwrap();
    let hand = 8.0 * (4.0 / 2.0) * 0.7f64.powi(2) * 16.0 * 16.0 * 0.9;
    assert!((t1 - hand).abs() < 1e-10 * hand);
    assert!(matches!(theorem1_bound(&norms, &path(2), &[3, 4], &[1.0; 2], 1, 1.0), Err(Error::LoopCount(_))));
    assert!(theorem1_bound(&norms, &path(2), &[1, 1], &[1.0; 2], 1, 1.0).is_err());

    // caterpillar m = 1, n = (2,4,2,4): three loops, degrees (1,3,1,1)
    let t2 = theorem2_bound(&u, 1, &[2, 4, 2, 4], &[1.0; 4], 2, 5.0).unwrap();
    let spins = 2f64.powi(2 + 4 + 2);
    let hand = 5.0 * 4.5 * 2.0 * 6.0 * 2f64.powi(12) * spins;
    assert!((t2 - hand).abs() < 1e-9 * hand);
    assert!(matches!(theorem2_bound(&u, 1, &[2, 4, 2], &[1.0; 3], 1, 1.0), Err(Error::ArityMismatch { .. })));
}

#[test]
fn theorem1_reduces_to_perturbative_shape_on_paths() {
    let norms = CovarianceNorms { sup_hat: 1.3, l1_hat: 0.4, l1_pos: 1.0, grad_sup: 1.0, grad_l1: 1.0 };
    for m in 1..=4 {
        let t = path(m);
        for n in [vec![4; m], vec![2; m], vec![3; m]] {
            let Ok(loops) = loop_count(&n, m - 1) else { continue };
            let w: Vec<f64> = (0..m).map(|l| 0.5 + l as f64).collect();
            let nspin = 2;
            let t1 = theorem1_bound(&norms, &t, &n, &w, nspin, 3.0).unwrap();
            let stripped =
                t1 / 3.0 / (nspin as f64).powi(n.iter().sum::<usize>() as i32) / norms.l1_hat.powi(loops as i32);
            let next = t.external_count(&n).unwrap();
            let p = perturbative_bound(&norms, &t, &n, &w, 1.0, next).unwrap();
            let expect = p * loop_prefactor(loops);
            assert!((stripped - expect).abs() < 1e-10 * expect, "m={m} n={n:?}");
        }
    }
}

#[test]
fn homogeneity() {
    let norms = CovarianceNorms { sup_hat: 1.1, l1_hat: 0.6, l1_pos: 0.8, grad_sup: 2.0, grad_l1: 0.3 };
    let c = 1.7;
    let sc = norms.scaled(c);
    let tree = &enumerate_trees(3).unwrap()[1];
    let n = [4, 2, 4];
    let w = [0.3, 0.5, 0.7];
    let loops = loop_count(&n, 2).unwrap();
    let a = theorem1_bound(&norms, tree, &n, &w, 2, 1.0).unwrap();
    let b = theorem1_bound(&sc, tree, &n, &w, 2, 1.0).unwrap();
    assert!((b / a - c.powi(2 + loops as i32)).abs() < 1e-10);
    let a = standard_bound(&norms, tree, &n, &w).unwrap();
    let b = standard_bound(&sc, tree, &n, &w).unwrap();
    assert!((b / a - c.powi(2)).abs() < 1e-10);
    let a = theorem2_bound(&norms, 1, &[2, 4, 2, 4], &[1.0; 4], 1, 1.0).unwrap();
    let b = theorem2_bound(&sc, 1, &[2, 4, 2, 4], &[1.0; 4], 1, 1.0).unwrap();
    // ‖Ĉ‖_∞ · 𝔠 · ‖Ĉ‖₁³, with 𝔠 quadratic
    assert!((b / a - c.powi(6)).abs() < 1e-9);
    let wa = theorem1_bound(&norms, tree, &n, &w, 2, 1.0).unwrap();
    let w2: Vec<f64> = w.iter().map(|v| v * c).collect();
    let wb = theorem1_bound(&norms, tree, &n, &w2, 2, 1.0).unwrap();
    assert!((wb / wa - c.powi(3)).abs() < 1e-10);
}

#[test]
fn single_scale_model_tabulation() {
    let model = ScaleModel::new(2.0, 3, 1).unwrap();
    let cov = build_single_scale(&model).unwrap();
    assert!(cov.antisymmetry_defect() < 1e-14);
    let lat = cov.lattice().clone();
    for p in 0..lat.len() {
        let v = lat.momentum_value(p);
        let p2 = v[1] * v[1];
        if model.cutoff(v[0], p2) == 0.0 {
            for s in 0..4 {
                for t in 0..4 {
                    assert_eq!(cov.hat(s, t, p), Complex64::new(0.0, 0.0));
                }
            }
        }
    }
    let norms = covariance_norms(&cov);
    let mj = 8.0;
    // ½|ĉ| with |ĉ| up to M^j·√2
    assert!(norms.sup_hat >= 0.5 * mj / 2.0 && norms.sup_hat <= 2.0 * mj, "{}", norms.sup_hat);
    let raw = (0..lat.len())
        .map(|p| {
            let v = lat.momentum_value(p);
            model.propagator(v[0], v[1] * v[1]).norm()
        })
        .fold(0.0f64, f64::max);
    assert!(raw >= 0.5 * mj && raw <= 2.0 * mj, "{raw}");

    let mut coarse = model.clone();
    coarse.lattice[0] = 4;
    match build_single_scale(&coarse) {
        Err(Error::Resolution { axis: 0, need, .. }) => assert_eq!(need, model.lattice[0]),
        other => panic!("{other:?}"),
    }
}

#[test]
fn synthetic_family_has_exact_slopes() {
    let samples: Vec<ScaleSample> =
        (1..=4).map(|j| ScaleSample::from_covariance(j, &synthetic_scale_covariant(2.0, j).unwrap())).collect();
    let fit = power_counting_fit(&samples, 2.0, 1).unwrap();
    let exact = [("sup_hat", 1.0), ("l1_hat", -1.0), ("l1_pos", 1.0), ("frak_c", 2.0)];
    for (q, s) in exact {
        let e = fit.get(q).unwrap();
        assert!((e.slope - s).abs() < 1e-9, "{q}: {}", e.slope);
    }
    assert!(matches!(power_counting_fit(&samples[..2], 2.0, 1), Err(Error::DegenerateFit(_))));
}

#[test]
fn single_scale_power_counting() {
    let samples: Vec<ScaleSample> = (2..=5)
        .map(|j| {
            let cov = build_single_scale(&ScaleModel::new(2.0, j, 1).unwrap()).unwrap();
            ScaleSample::from_covariance(j, &cov)
        })
        .collect();
    let fit = power_counting_fit(&samples, 2.0, 1).unwrap();
    let s = |q: &str| fit.get(q).unwrap().slope;
    assert!((s("sup_hat") - 1.0).abs() <= 0.2, "{}", s("sup_hat"));
    assert!((s("l1_hat") + 1.0).abs() <= 0.2, "{}", s("l1_hat"));
    assert!((s("frak_c") - 2.0).abs() <= 0.4, "{}", s("frak_c"));
    assert!(s("l1_pos") <= 1.0 + 0.2, "{}", s("l1_pos"));
}

fn problem(tree: &Tree, n: &[usize], lat: &Lattice, ns: usize, seed: u64) -> (AmplitudeProblem, Vec<Arc<fermitree::grassmann::DenseKernel>>) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let cov = Arc::new(random::covariance(lat, ns, &mut rng));
    let dense: Vec<_> = n.iter().map(|&k| Arc::new(random::momentum_kernel(lat, ns, k, &mut rng).unwrap())).collect();
    let kernels: Vec<Arc<dyn MomentumKernel>> = dense.iter().map(|k| k.clone() as Arc<dyn MomentumKernel>).collect();
    let next = tree.external_count(n).unwrap();
    let (p, s) = random::external(lat, ns, next, &mut rng);
    let prob = AmplitudeProblem::new(root_tree(tree, 1).unwrap(), n.to_vec(), kernels, cov, p, s).unwrap();
    (prob, dense)
}

#[test]
fn theorem1_and_loop_bound_dominate() {
    let lat = Lattice::one_dim(4);
    let cases: Vec<(Tree, Vec<usize>, usize)> = vec![
        (Tree::single(), vec![4], 2),
        (path(2), vec![4, 2], 1),
        (path(2), vec![3, 3], 2),
        (path(2), vec![4, 4], 1),
        (path(3), vec![2, 4, 2], 2),
        (enumerate_trees(3).unwrap()[0].clone(), vec![4, 3, 3], 1),
    ];
    for (k, (tree, n, ns)) in cases.iter().enumerate() {
        for seed in 0..3 {
            let (prob, dense) = problem(tree, n, &lat, *ns, 100 * k as u64 + seed);
            let a = tree_amplitude_value(&prob, ContractionMethod::Matchings).unwrap().norm();
            let norms = covariance_norms(prob.covariance());
            let w: Vec<f64> = dense.iter().map(|d| d.sup_norm()).collect();
            let t1 = theorem1_bound(&norms, tree, n, &w, *ns, lat.volume()).unwrap();
            assert!(a <= t1, "thm1 {a} > {t1} for {n:?}");
            let table = fermitree::amplitude::kernel_table(&prob, fermitree::amplitude::KernelKind::Antisymmetric).unwrap();
            let a_sup = table.kernel.sup_norm();
            let lb = loop_bound(&norms, a_sup, prob.n_external() / 2, lat.volume());
            assert!(a <= lb * (1.0 + 1e-12), "loop {a} > {lb} for {n:?}");
        }
    }
}

#[test]
fn theorem2_dominates_on_caterpillar() {
    let lat = Lattice::one_dim(4);
    let tree = caterpillar(1).unwrap();
    for (k, n) in [vec![2, 4, 2, 4], vec![2, 3, 2, 3], vec![3, 3, 2, 2]].iter().enumerate() {
        for seed in 0..3 {
            let (prob, dense) = problem(&tree, n, &lat, 1, 500 + 10 * k as u64 + seed);
            let a = tree_amplitude_value(&prob, ContractionMethod::Matchings).unwrap().norm();
            let norms = covariance_norms(prob.covariance());
            let mut w: Vec<f64> = dense[..3].iter().map(|d| d.sup_norm()).collect();
            w.push(dense[3].position_l1_norm().unwrap());
            let t2 = theorem2_bound(&norms, 1, n, &w, 1, lat.volume()).unwrap();
            assert!(a <= t2, "thm2 {a} > {t2} for {n:?}");
        }
    }
}

#[test]
fn report_roundtrip() {
    let row = BoundRow {
        tree: tree_id(&path(2)),
        n: vec![4, 4],
        n_external: 6,
        perturbative: Some(1.0),
        standard: None,
        theorem1: Some(10.0),
        theorem2: None,
        loop_bound: Some(3.0),
        amplitude: Some(2.0),
        alpha_coupling: None,
        branches: Some(0),
        frak_c: None,
        volume: 4.0,
    };
    assert!(row.violations(0.0).is_empty());
    let bad = BoundRow { amplitude: Some(5.0), ..row.clone() };
    assert_eq!(bad.violations(0.0), vec!["loop"]);
    let rep = BoundReport::new(vec![row, BoundRow { amplitude: None, ..bad }]);
    let back = BoundReport::from_json(&rep.to_json().unwrap()).unwrap();
    assert_eq!(back, rep);
    let csv = rep.to_csv().unwrap();
    assert!(csv.lines().next().unwrap().starts_with("schema_version,tree,n,"));
    assert!(csv.contains("1-2,") || csv.contains("\"1-2\""));
    assert!(csv.contains("bound-only") && csv.contains("validated"));
    assert_eq!(factorial(3), 6.0);
}

#[test]
fn bound_table_paths_with_quartic_vertices() {
    let config = BoundTableConfig { m: 3, branches: Some(0), legs: vec![4], n_max: 8, ..BoundTableConfig::default() };
    let report = bound_table(&config).unwrap();
    // single vertex, one path on 2 vertices, three on 3
    assert_eq!(report.rows.len(), 5);
    for row in &report.rows {
        assert!(row.violations(0.0).is_empty(), "{row:?}");
        if let Some(a) = row.amplitude {
            assert!(a <= row.theorem1.unwrap());
        }
    }
    assert!(report.rows.iter().any(|r| r.amplitude.is_some()));
    assert!(report.rows.iter().all(|r| r.theorem2.is_none()));
}

#[test]
fn bound_table_caterpillar_has_theorem2_column() {
    let config = BoundTableConfig { m: 1, caterpillar: true, ..BoundTableConfig::default() };
    let report = bound_table(&config).unwrap();
    assert!(!report.rows.is_empty());
    for row in &report.rows {
        assert_eq!(row.theorem2.is_some(), row.n_external % 2 == 0, "{row:?}");
        assert!(row.violations(0.0).is_empty(), "{row:?}");
    }
}

#[test]
fn bound_table_branch_filter_and_bound_only_rows() {
    let config = BoundTableConfig { m: 4, branches: Some(0), legs: vec![2], n_max: 8, ..BoundTableConfig::default() };
    let report = bound_table(&config).unwrap();
    let four: Vec<_> = report.rows.iter().filter(|r| r.n.len() == 4).collect();
    assert_eq!(four.len(), 12);
    let big = BoundTableConfig { m: 2, legs: vec![4], n_max: 8, lattice: 8, nspin: 2, ..BoundTableConfig::default() };
    let report = bound_table(&big).unwrap();
    assert!(report.rows.iter().any(|r| r.bound_only()));
    assert!(report.to_csv().unwrap().contains("bound-only"));
    let again = bound_table(&big).unwrap();
    assert_eq!(report, again);
}
