//! Seeded random instances shared by the test suites and the verifier.

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::Rng;

use crate::error::Result;
use crate::exterior::Form;
use crate::grassmann::{antisymmetrize, Covariance, DenseKernel, Domain, GrassmannPoly};
use crate::lattice::Lattice;

pub fn complex<R: Rng>(rng: &mut R) -> Complex64 {
    Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))
}

/// Antisymmetric covariance `C(ξ, ξ′) = −C(ξ′, ξ)` with uniform random
/// position-space entries.
pub fn covariance<R: Rng>(lattice: &Lattice, nspin: usize, rng: &mut R) -> Covariance {
    let l = lattice.len();
    let raw: Vec<Complex64> = (0..nspin * nspin * l).map(|_| complex(rng)).collect();
    let mut pos = vec![Complex64::new(0.0, 0.0); raw.len()];
    for s in 0..nspin {
        for t in 0..nspin {
            for x in 0..l {
                pos[(s * nspin + t) * l + x] =
                    0.5 * (raw[(s * nspin + t) * l + x] - raw[(t * nspin + s) * l + lattice.neg(x)]);
            }
        }
    }
    Covariance::from_position(lattice.clone(), nspin, pos).expect("table has the right length")
}

/// Antisymmetric momentum kernel with random values on every tuple.
pub fn momentum_kernel<R: Rng>(lattice: &Lattice, nspin: usize, arity: usize, rng: &mut R) -> Result<DenseKernel> {
    let raw = DenseKernel::from_fn(lattice.clone(), nspin, arity, Domain::Momentum, |_| complex(rng))?;
    antisymmetrize(&raw)
}

/// Antisymmetric position kernel with random values.
pub fn position_kernel<R: Rng>(lattice: &Lattice, nspin: usize, arity: usize, rng: &mut R) -> Result<DenseKernel> {
    let raw = DenseKernel::from_fn(lattice.clone(), nspin, arity, Domain::Position, |_| complex(rng))?;
    antisymmetrize(&raw)
}

/// `n` momenta summing to zero and `n` spins.
pub fn external<R: Rng>(lattice: &Lattice, nspin: usize, n: usize, rng: &mut R) -> (Vec<usize>, Vec<usize>) {
    let mut momenta: Vec<usize> = (0..n).map(|_| rng.gen_range(0..lattice.len())).collect();
    if let Some(last) = n.checked_sub(1) {
        let rest = lattice.sum(momenta[..last].iter().copied());
        momenta[last] = lattice.neg(rest);
    }
    let spins = (0..n).map(|_| rng.gen_range(0..nspin)).collect();
    (momenta, spins)
}

/// Sparse random form with about `density` of the basis present.
pub fn form<R: Rng>(universe: usize, density: f64, rng: &mut R) -> Form {
    let mut terms = Vec::new();
    for mask in 0..1u64 << universe {
        if rng.gen_bool(density) {
            terms.push((mask, complex(rng)));
        }
    }
    Form::from_terms(universe, terms)
}

/// Random form of a single degree.
pub fn homogeneous_form<R: Rng>(universe: usize, degree: usize, rng: &mut R) -> Form {
    let terms: Vec<(u64, Complex64)> = (0..1u64 << universe)
        .filter(|m| m.count_ones() as usize == degree)
        .map(|mask| (mask, complex(rng)))
        .collect();
    Form::from_terms(universe, terms)
}

/// Random one-form.
pub fn one_form<R: Rng>(universe: usize, rng: &mut R) -> Form {
    homogeneous_form(universe, 1, rng)
}

/// Random complex skew-symmetric matrix.
pub fn skew_matrix<R: Rng>(n: usize, rng: &mut R) -> DMatrix<Complex64> {
    let mut a = DMatrix::zeros(n, n);
    for i in 0..n {
        for j in i + 1..n {
            let v = complex(rng);
            a[(i, j)] = v;
            a[(j, i)] = -v;
        }
    }
    a
}

/// Random homogeneous Grassmann polynomial of the given degree.
pub fn homogeneous_poly<R: Rng>(ngen: usize, degree: usize, rng: &mut R) -> GrassmannPoly {
    GrassmannPoly::from_form(homogeneous_form(ngen, degree, rng))
}
