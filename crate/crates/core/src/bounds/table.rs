use std::sync::Arc;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::formulas::{
    corollary_effective_norm, loop_bound, perturbative_bound, standard_bound, theorem1_bound, theorem2_bound,
};
use super::norms::covariance_norms;
use super::report::{tree_id, BoundReport, BoundRow};
use crate::amplitude::{kernel_table, tree_amplitude_value, AmplitudeProblem, ContractionMethod, KernelKind};
use crate::error::{Error, Result};
use crate::grassmann::{DenseKernel, MomentumKernel};
use crate::lattice::Lattice;
use crate::random;
use crate::trees::{caterpillar, enumerate_trees, root_tree, Tree};

/// Stream family of table rows, disjoint from the verification suites.
const TABLE_STREAM: u64 = 15 << 40;
/// Largest number of `Â′` evaluations spent on one contracted amplitude.
pub const AMPLITUDE_BUDGET: f64 = 2.0e5;
/// Largest `Â` table tabulated for the loop bound.
pub const LOOP_TABLE_BUDGET: usize = 8192;

/// Tree class and random instance data of a bound table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundTableConfig {
    /// Tree sizes `1..=m`, or caterpillars `T_1..T_m` when `caterpillar` is set.
    pub m: usize,
    pub caterpillar: bool,
    /// Keep only trees with this branch excess.
    pub branches: Option<usize>,
    /// Allowed leg counts per vertex.
    pub legs: Vec<usize>,
    /// Largest external leg count `n(𝐧,m)`.
    pub n_max: usize,
    pub lattice: usize,
    pub nspin: usize,
    pub seed: u64,
    /// Constant of the perturbative bound.
    pub const_param: f64,
}

impl Default for BoundTableConfig {
    fn default() -> Self {
        BoundTableConfig {
            m: 3,
            caterpillar: false,
            branches: None,
            legs: vec![2, 3, 4],
            n_max: 6,
            lattice: 4,
            nspin: 1,
            seed: 0,
            const_param: 1.0,
        }
    }
}

impl BoundTableConfig {
    fn validate(&self) -> Result<()> {
        if self.m == 0 || self.lattice == 0 || self.nspin == 0 {
            return Err(Error::InvalidParameter("m, lattice and spin count must be positive".into()));
        }
        if self.legs.is_empty() || self.legs.iter().any(|&k| !(1..=8).contains(&k)) {
            return Err(Error::InvalidParameter(format!("leg counts must lie in 1..=8, got {:?}", self.legs)));
        }
        let vertices = if self.caterpillar { 2 * self.m + 2 } else { self.m };
        if vertices > 8 {
            return Err(Error::InvalidParameter(format!("trees on {vertices} vertices are too large for a table")));
        }
        Ok(())
    }

    /// `(caterpillar index, tree)` pairs of the class, in order.
    fn trees(&self) -> Result<Vec<(Option<usize>, Tree)>> {
        let mut out = Vec::new();
        for k in 1..=self.m {
            if self.caterpillar {
                out.push((Some(k), caterpillar(k)?));
            } else if k == 1 {
                out.push((None, Tree::single()));
            } else {
                out.extend(enumerate_trees(k)?.into_iter().map(|t| (None, t)));
            }
        }
        if let Some(b) = self.branches {
            out.retain(|(_, t)| t.branch_excess() == b);
        }
        Ok(out)
    }
}

fn leg_vectors(m: usize, legs: &[usize]) -> Vec<Vec<usize>> {
    let mut out = vec![Vec::new()];
    for _ in 0..m {
        out = out
            .into_iter()
            .flat_map(|v| {
                legs.iter().map(move |&k| {
                    let mut w = v.clone();
                    w.push(k);
                    w
                })
            })
            .collect();
    }
    out
}

/// One row per `(T, 𝐧)` of the class with `n_l ≥ d^T(l)` and
/// `n(𝐧,m) ≤ n_max`. The amplitude is computed when it fits the budget;
/// other rows are bound-only.
pub fn bound_table(config: &BoundTableConfig) -> Result<BoundReport> {
    config.validate()?;
    let mut jobs = Vec::new();
    for (cat, tree) in config.trees()? {
        let degrees = tree.degrees();
        for n in leg_vectors(tree.m(), &config.legs) {
            if n.iter().zip(&degrees).any(|(a, b)| a < b) {
                continue;
            }
            if tree.external_count(&n).map_or(true, |k| k > config.n_max) {
                continue;
            }
            jobs.push((cat, tree.clone(), n));
        }
    }
    let rows = jobs
        .par_iter()
        .enumerate()
        .map(|(i, (cat, tree, n))| bound_row(config, i, *cat, tree, n))
        .collect::<Result<Vec<_>>>()?;
    Ok(BoundReport::new(rows))
}

fn bound_row(config: &BoundTableConfig, index: usize, cat: Option<usize>, tree: &Tree, n: &[usize]) -> Result<BoundRow> {
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    rng.set_stream(TABLE_STREAM | index as u64);
    let lat = Lattice::one_dim(config.lattice);
    let ns = config.nspin;
    let cov = Arc::new(random::covariance(&lat, ns, &mut rng));
    let dense: Vec<Arc<DenseKernel>> =
        n.iter().map(|&k| random::momentum_kernel(&lat, ns, k, &mut rng).map(Arc::new)).collect::<Result<_>>()?;
    let w_sup: Vec<f64> = dense.iter().map(|k| k.sup_norm()).collect();
    let w_l1: Vec<f64> = dense.iter().map(|k| k.position_l1_norm()).collect::<Result<_>>()?;
    let norms = covariance_norms(&cov);
    let volume = lat.volume();
    let next = tree.external_count(n).expect("filtered by the caller");
    let even = next % 2 == 0;

    let theorem1 = if even { Some(theorem1_bound(&norms, tree, n, &w_sup, ns, volume)?) } else { None };
    let theorem2 = match cat {
        Some(k) if even => {
            let w: Vec<f64> = (0..n.len()).map(|l| if l < k + 2 { w_sup[l] } else { w_l1[l] }).collect();
            Some(theorem2_bound(&norms, k, n, &w, ns, volume)?)
        }
        _ => None,
    };
    let alpha_coupling = if n.iter().all(|&k| k % 2 == 0) {
        let per: Vec<(usize, f64)> = n.iter().copied().zip(w_sup.iter().copied()).collect();
        Some(corollary_effective_norm(&norms, &per, tree.branch_excess() as f64)?.total)
    } else {
        None
    };

    let kernels: Vec<Arc<dyn MomentumKernel>> = dense.iter().map(|k| k.clone() as Arc<dyn MomentumKernel>).collect();
    let (p, s) = random::external(&lat, ns, next, &mut rng);
    let problem = AmplitudeProblem::new(root_tree(tree, 1)?, n.to_vec(), kernels, cov, p, s)?;
    let matchings: f64 = (1..=next / 2).map(|k| (2 * k - 1) as f64).product();
    let labels = ((config.lattice * ns * ns) as f64).powi(next as i32 / 2);
    let amplitude = if !even {
        Some(0.0)
    } else if matchings * labels <= AMPLITUDE_BUDGET {
        Some(tree_amplitude_value(&problem, ContractionMethod::Matchings)?.norm())
    } else {
        None
    };
    let entries = config.lattice.pow(next.saturating_sub(1) as u32) * ns.pow(next as u32);
    let loop_value = if even && entries <= LOOP_TABLE_BUDGET {
        let table = kernel_table(&problem, KernelKind::Antisymmetric)?;
        Some(loop_bound(&norms, table.kernel.sup_norm(), next / 2, volume))
    } else {
        None
    };

    Ok(BoundRow {
        tree: tree_id(tree),
        n: n.to_vec(),
        n_external: next,
        perturbative: Some(perturbative_bound(&norms, tree, n, &w_sup, config.const_param, next)?),
        standard: Some(standard_bound(&norms, tree, n, &w_l1)?),
        theorem1,
        theorem2,
        loop_bound: loop_value,
        amplitude,
        alpha_coupling,
        branches: Some(tree.branch_excess()),
        frak_c: Some(norms.frak_c()),
        volume,
    })
}
