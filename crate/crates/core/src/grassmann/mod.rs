//! Finite Grassmann algebras, Pfaffians, Gaussian integrals, kernels and the
//! exact free-energy oracle.
//!
//! Generators of a [`GeneratorSet`] are enumerated as `site * |Σ| + σ`.
//! Polynomials reuse the exterior-algebra storage: a Grassmann monomial in
//! canonical generator order is the basis form with the same bitmask.

mod covariance;
mod free_energy;
mod gaussian;
mod kernel;
mod pfaffian;

pub use covariance::{Covariance, CovarianceFile};
pub use free_energy::{free_energy_oracle, log_series, FreeEnergySeries};
pub use gaussian::{gaussian_integral, gaussian_integral_matrix, generator_matrix};
pub use kernel::{
    antisymmetrize, build_interaction, fourier_kernel, inverse_fourier_kernel, ConstantKernel,
    DenseKernel, Domain, KernelFile, MomentumKernel,
};
pub(crate) use kernel::permutations_with_sign;
pub use pfaffian::{pfaffian, pfaffian_elimination, pfaffian_matching, PfaffianMethod};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exterior::{interior_product, Form};
use crate::lattice::Lattice;

/// Default cap on `|𝕃|` for exact Grassmann oracles.
pub const DEFAULT_GENERATOR_CAP: usize = 14;

/// `𝕃 = 𝕋 × Σ`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GeneratorSet {
    pub lattice: Lattice,
    pub spins: Vec<String>,
}

impl GeneratorSet {
    pub fn new(lattice: Lattice, spins: Vec<String>) -> Self {
        GeneratorSet { lattice, spins }
    }

    /// Spin labels `0, 1, …, n-1`.
    pub fn with_spin_count(lattice: Lattice, nspin: usize) -> Self {
        Self::new(lattice, (0..nspin).map(|s| s.to_string()).collect())
    }

    pub fn nspin(&self) -> usize {
        self.spins.len()
    }

    pub fn len(&self) -> usize {
        self.lattice.len() * self.nspin()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn index(&self, site: usize, spin: usize) -> usize {
        site * self.nspin() + spin
    }

    /// `(site, spin)` of a generator index.
    pub fn split(&self, generator: usize) -> (usize, usize) {
        (generator / self.nspin(), generator % self.nspin())
    }

    pub fn check_cap(&self, cap: usize) -> Result<()> {
        if self.len() > cap {
            return Err(Error::TooLarge { what: "generator set", dim: self.len(), limit: cap });
        }
        Ok(())
    }
}

/// Element of the Grassmann algebra over `ngen` generators.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GrassmannPoly {
    form: Form,
}

impl GrassmannPoly {
    pub fn zero(ngen: usize) -> Self {
        GrassmannPoly { form: Form::zero(ngen) }
    }

    pub fn scalar(ngen: usize, value: Complex64) -> Self {
        GrassmannPoly { form: Form::scalar(ngen, value) }
    }

    /// The generator `ψ(index)`.
    pub fn generator(ngen: usize, index: usize) -> Result<Self> {
        Ok(GrassmannPoly { form: Form::basis(ngen, index)? })
    }

    /// `coeff · ψ(i_1) ∧ … ∧ ψ(i_k)` in the given (not necessarily sorted) order.
    pub fn monomial(ngen: usize, indices: &[usize], coeff: Complex64) -> Result<Self> {
        Ok(GrassmannPoly { form: Form::from_tuple(ngen, indices, coeff)? })
    }

    pub fn from_terms<I: IntoIterator<Item = (u64, Complex64)>>(ngen: usize, terms: I) -> Self {
        GrassmannPoly { form: Form::from_terms(ngen, terms) }
    }

    pub fn from_form(form: Form) -> Self {
        GrassmannPoly { form }
    }

    pub fn as_form(&self) -> &Form {
        &self.form
    }

    pub fn ngen(&self) -> usize {
        self.form.universe()
    }

    pub fn terms(&self) -> &[(u64, Complex64)] {
        self.form.terms()
    }

    pub fn is_zero(&self) -> bool {
        self.form.is_zero()
    }

    pub fn constant(&self) -> Complex64 {
        self.form.coefficient(0)
    }

    fn same(&self, other: &GrassmannPoly) -> Result<()> {
        if self.ngen() != other.ngen() {
            return Err(Error::GeneratorMismatch);
        }
        Ok(())
    }

    pub fn add(&self, other: &GrassmannPoly) -> Result<Self> {
        self.same(other)?;
        Ok(GrassmannPoly { form: self.form.add(&other.form)? })
    }

    pub fn scale(&self, factor: Complex64) -> Self {
        GrassmannPoly { form: self.form.scale(factor) }
    }

    /// The algebra product `W·W′`.
    pub fn mul(&self, other: &GrassmannPoly) -> Result<Self> {
        self.same(other)?;
        Ok(GrassmannPoly { form: self.form.wedge(&other.form)? })
    }

    /// Homogeneous part of degree `n`.
    pub fn degree_part(&self, n: usize) -> Self {
        Self::from_terms(
            self.ngen(),
            self.terms().iter().copied().filter(|t| t.0.count_ones() as usize == n),
        )
    }

    pub fn is_even(&self) -> bool {
        self.terms().iter().all(|t| t.0.count_ones() % 2 == 0)
    }

    /// Left derivative `∂/∂ψ(index)`.
    pub fn derivative(&self, index: usize) -> Result<Self> {
        let e = Form::basis(self.ngen(), index)?;
        Ok(GrassmannPoly { form: interior_product(&e, &self.form)? })
    }

    /// Relabel generators: generator `i` becomes `perm[i]`.
    pub fn relabel(&self, perm: &[usize]) -> Result<Self> {
        let n = self.ngen();
        if perm.len() != n {
            return Err(Error::GeneratorMismatch);
        }
        let mut acc = Vec::with_capacity(self.terms().len());
        for &(mask, c) in self.terms() {
            let indices: Vec<usize> = (0..n).filter(|i| mask >> i & 1 == 1).map(|i| perm[i]).collect();
            let m = Form::from_tuple(n, &indices, c)?;
            acc.extend(m.terms().iter().copied());
        }
        Ok(Self::from_terms(n, acc))
    }

    /// Embed into a larger algebra, generator `i` going to `offset + i`.
    pub fn embed(&self, ngen: usize, offset: usize) -> Result<Self> {
        if offset + self.ngen() > ngen {
            return Err(Error::GeneratorMismatch);
        }
        Ok(Self::from_terms(ngen, self.terms().iter().map(|&(m, c)| (m << offset, c))))
    }
}
