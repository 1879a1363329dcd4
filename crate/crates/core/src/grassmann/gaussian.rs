use nalgebra::DMatrix;
use num_complex::Complex64;

use super::pfaffian::pfaffian_in_place;
use super::{Covariance, GeneratorSet, GrassmannPoly};
use crate::error::{Error, Result};

/// The skew matrix `C(ξ, ξ′)` over all generators of `gens`.
pub fn generator_matrix(cov: &Covariance, gens: &GeneratorSet) -> Result<DMatrix<Complex64>> {
    if cov.lattice() != &gens.lattice || cov.nspin() != gens.nspin() {
        return Err(Error::GeneratorMismatch);
    }
    let pos = cov.position();
    let n = gens.len();
    Ok(DMatrix::from_fn(n, n, |a, b| cov.entry(&pos, gens, a, b)))
}

/// `∫ P dμ_C` for a covariance given on the generators of `gens`.
pub fn gaussian_integral(p: &GrassmannPoly, cov: &Covariance, gens: &GeneratorSet) -> Result<Complex64> {
    let g = generator_matrix(cov, gens)?;
    gaussian_integral_matrix(p, &g)
}

/// `∫ P dμ_G`: each monomial `ψ_{i_1}…ψ_{i_k}` (increasing) maps to
/// `Pf(G[i, i])`; the degree-0 coefficient passes through.
pub fn gaussian_integral_matrix(p: &GrassmannPoly, g: &DMatrix<Complex64>) -> Result<Complex64> {
    if g.nrows() != p.ngen() || g.ncols() != p.ngen() {
        return Err(Error::GeneratorMismatch);
    }
    let mut total = Complex64::new(0.0, 0.0);
    let mut idx = Vec::with_capacity(64);
    let mut buf = Vec::with_capacity(64 * 64);
    for &(mask, c) in p.terms() {
        let k = mask.count_ones() as usize;
        if k % 2 == 1 {
            continue;
        }
        if k == 0 {
            total += c;
            continue;
        }
        idx.clear();
        let mut rest = mask;
        while rest != 0 {
            idx.push(rest.trailing_zeros() as usize);
            rest &= rest - 1;
        }
        buf.clear();
        for &i in &idx {
            for &j in &idx {
                buf.push(g[(i, j)]);
            }
        }
        total += c * pfaffian_in_place(&mut buf, k);
    }
    Ok(total)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::Lattice;
    use rand::SeedableRng;

    fn random_cov(lat: &Lattice, ns: usize, seed: u64) -> Covariance {
        crate::random::covariance(lat, ns, &mut rand_chacha::ChaCha8Rng::seed_from_u64(seed))
    }

    #[test]
    fn defining_relations() {
        let lat = Lattice::one_dim(3);
        let gens = GeneratorSet::with_spin_count(lat.clone(), 2);
        let cov = random_cov(&lat, 2, 4);
        assert!(cov.antisymmetry_defect() < 1e-12);
        let g = generator_matrix(&cov, &gens).unwrap();
        let n = gens.len();
        let one = Complex64::new(1.0, 0.0);
        for (a, b) in [(0, 3), (4, 1), (2, 5)] {
            let mono = GrassmannPoly::monomial(n, &[a, b], one).unwrap();
            let v = gaussian_integral_matrix(&mono, &g).unwrap();
            assert!((v - g[(a, b)]).norm() < 1e-13);
        }
        let odd = GrassmannPoly::monomial(n, &[0, 2, 5], one).unwrap();
        assert_eq!(gaussian_integral_matrix(&odd, &g).unwrap(), Complex64::new(0.0, 0.0));
        let four = GrassmannPoly::monomial(n, &[0, 1, 2, 3], one).unwrap();
        let expected = g[(0, 1)] * g[(2, 3)] - g[(0, 2)] * g[(1, 3)] + g[(0, 3)] * g[(1, 2)];
        assert!((gaussian_integral_matrix(&four, &g).unwrap() - expected).norm() < 1e-13);
    }
}
