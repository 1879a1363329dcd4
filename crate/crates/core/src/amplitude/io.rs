//! JSON description of an amplitude problem with file references for the
//! covariance and the vertex kernels.

use std::path::{Path, PathBuf};
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::{leg_universe, AmplitudeProblem};
use crate::exterior::LegIndex;
use crate::error::{Error, Result};
use crate::grassmann::{fourier_kernel, Covariance, CovarianceFile, DenseKernel, Domain, KernelFile, MomentumKernel};
use crate::trees::{root_tree, Tree};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExternalLeg {
    pub vertex: usize,
    pub slot: usize,
    /// Integer momentum components mod `L_c`.
    pub momentum: Vec<usize>,
    pub spin: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProblemFile {
    pub tree: Tree,
    pub root: usize,
    pub n_per_vertex: Vec<usize>,
    pub external_legs: Vec<ExternalLeg>,
    /// Path of a covariance JSON file, relative to the problem file.
    pub covariance_ref: String,
    /// One kernel JSON file per vertex; position kernels are transformed.
    pub kernels_ref: Vec<String>,
}

fn read_json<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::Format(format!("{}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| Error::Format(format!("{}: {e}", path.display())))
}

fn resolve(base: &Path, reference: &str) -> PathBuf {
    let p = Path::new(reference);
    if p.is_absolute() {
        p.to_path_buf()
    } else {
        base.join(p)
    }
}

impl ProblemFile {
    /// Build the problem, reading referenced files relative to `base`.
    pub fn resolve(&self, base: &Path) -> Result<AmplitudeProblem> {
        let cov_file: CovarianceFile = read_json(&resolve(base, &self.covariance_ref))?;
        let cov = Covariance::from_file(&cov_file)?;
        let mut kernels: Vec<Arc<dyn MomentumKernel>> = Vec::with_capacity(self.kernels_ref.len());
        for r in &self.kernels_ref {
            let file: KernelFile = read_json(&resolve(base, r))?;
            let mut k = DenseKernel::from_file(&file)?;
            if k.domain == Domain::Position {
                k = fourier_kernel(&k)?;
            }
            if k.lattice.dims != cov.lattice().dims || k.nspin != cov.nspin() {
                return Err(Error::LatticeMismatch(format!("kernel {r} does not match the covariance")));
            }
            kernels.push(Arc::new(k));
        }
        let rooted = root_tree(&self.tree, self.root)?;
        let universe = leg_universe(&rooted, &self.n_per_vertex)?;
        let lat = cov.lattice().clone();
        let mut momenta = vec![None; universe.len()];
        let mut spins = vec![0usize; universe.len()];
        for leg in &self.external_legs {
            let pos = universe
                .binary_search(&LegIndex::new(leg.vertex, leg.slot))
                .map_err(|_| Error::Problem(format!("({}, {}) is not an external leg", leg.vertex, leg.slot)))?;
            if leg.momentum.len() != lat.ndim() || leg.momentum.iter().zip(&lat.dims).any(|(k, l)| k >= l) {
                return Err(Error::Problem(format!("bad momentum {:?}", leg.momentum)));
            }
            momenta[pos] = Some(lat.index(&leg.momentum));
            spins[pos] = leg.spin;
        }
        let momenta: Vec<usize> = momenta
            .into_iter()
            .enumerate()
            .map(|(i, p)| p.ok_or_else(|| Error::Problem(format!("leg {:?} has no data", universe[i]))))
            .collect::<Result<_>>()?;
        AmplitudeProblem::new(rooted, self.n_per_vertex.clone(), kernels, Arc::new(cov), momenta, spins)
    }
}

pub fn load_problem(path: &Path) -> Result<AmplitudeProblem> {
    let file: ProblemFile = read_json(path)?;
    let base = path.parent().unwrap_or(Path::new("."));
    file.resolve(base)
}
