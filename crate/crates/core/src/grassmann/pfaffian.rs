use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};

/// Largest dimension accepted by the perfect-matching expansion.
pub const MATCHING_LIMIT: usize = 10;
/// Tolerance on `‖A + Aᵀ‖_max` for accepting a matrix as skew.
pub const SKEW_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PfaffianMethod {
    MatchingOracle,
    Elimination,
}

pub fn pfaffian(a: &DMatrix<Complex64>, method: PfaffianMethod) -> Result<Complex64> {
    match method {
        PfaffianMethod::MatchingOracle => pfaffian_matching(a),
        PfaffianMethod::Elimination => pfaffian_elimination(a),
    }
}

fn check_skew(a: &DMatrix<Complex64>) -> Result<usize> {
    if a.nrows() != a.ncols() {
        return Err(Error::NotSquare(a.nrows(), a.ncols()));
    }
    let n = a.nrows();
    let mut dev = 0.0f64;
    for i in 0..n {
        for j in i..n {
            dev = dev.max((a[(i, j)] + a[(j, i)]).norm());
        }
    }
    if dev > SKEW_TOL {
        return Err(Error::NotSkew(dev));
    }
    Ok(n)
}

/// Sum over perfect matchings, expanding along the first row.
pub fn pfaffian_matching(a: &DMatrix<Complex64>) -> Result<Complex64> {
    let n = check_skew(a)?;
    if n > MATCHING_LIMIT {
        return Err(Error::TooLarge { what: "matching Pfaffian", dim: n, limit: MATCHING_LIMIT });
    }
    if n % 2 == 1 {
        return Ok(Complex64::new(0.0, 0.0));
    }
    let idx: Vec<usize> = (0..n).collect();
    Ok(matching_rec(a, &idx))
}

fn matching_rec(a: &DMatrix<Complex64>, idx: &[usize]) -> Complex64 {
    if idx.is_empty() {
        return Complex64::new(1.0, 0.0);
    }
    let first = idx[0];
    let mut total = Complex64::new(0.0, 0.0);
    for j in 1..idx.len() {
        let rest: Vec<usize> = idx[1..].iter().copied().filter(|&k| k != idx[j]).collect();
        let sign = if j % 2 == 1 { 1.0 } else { -1.0 };
        total += a[(first, idx[j])] * matching_rec(a, &rest) * sign;
    }
    total
}

/// Skew-symmetric Gaussian elimination with pivoting.
pub fn pfaffian_elimination(a: &DMatrix<Complex64>) -> Result<Complex64> {
    let n = check_skew(a)?;
    let mut m: Vec<Complex64> = (0..n * n).map(|k| a[(k / n, k % n)]).collect();
    Ok(pfaffian_in_place(&mut m, n))
}

/// Pfaffian of a row-major skew matrix, destroying the buffer. No skewness check.
pub(crate) fn pfaffian_in_place(m: &mut [Complex64], n: usize) -> Complex64 {
    let zero = Complex64::new(0.0, 0.0);
    if n % 2 == 1 {
        return zero;
    }
    let mut pf = Complex64::new(1.0, 0.0);
    let mut k = 0;
    while k + 1 < n {
        // pivot: largest |m[k][j]|, j > k, moved into column k+1
        let mut piv = k + 1;
        let mut best = m[k * n + k + 1].norm();
        for j in k + 2..n {
            let v = m[k * n + j].norm();
            if v > best {
                best = v;
                piv = j;
            }
        }
        if best == 0.0 {
            return zero;
        }
        if piv != k + 1 {
            swap_index(m, n, k + 1, piv);
            pf = -pf;
        }
        let akk1 = m[k * n + k + 1];
        pf *= akk1;
        // eliminate rows/columns k, k+1 from the trailing block
        for i in k + 2..n {
            let aik = m[i * n + k];
            let aik1 = m[i * n + k + 1];
            if aik == zero && aik1 == zero {
                continue;
            }
            for j in k + 2..n {
                let upd = (aik1 * m[k * n + j] - aik * m[(k + 1) * n + j]) / akk1;
                m[i * n + j] -= upd;
            }
        }
        k += 2;
    }
    pf
}

fn swap_index(m: &mut [Complex64], n: usize, a: usize, b: usize) {
    for j in 0..n {
        m.swap(a * n + j, b * n + j);
    }
    for i in 0..n {
        m.swap(i * n + a, i * n + b);
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};

    fn random_skew(n: usize, seed: u64) -> DMatrix<Complex64> {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let mut a = DMatrix::from_element(n, n, Complex64::new(0.0, 0.0));
        for i in 0..n {
            for j in i + 1..n {
                let v = Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
                a[(i, j)] = v;
                a[(j, i)] = -v;
            }
        }
        a
    }

    #[test]
    fn small_cases() {
        let empty = DMatrix::<Complex64>::zeros(0, 0);
        assert_eq!(pfaffian_matching(&empty).unwrap(), Complex64::new(1.0, 0.0));
        assert_eq!(pfaffian_elimination(&empty).unwrap(), Complex64::new(1.0, 0.0));
        let c = Complex64::new(2.0, -1.0);
        let two = DMatrix::from_row_slice(2, 2, &[Complex64::new(0.0, 0.0), c, -c, Complex64::new(0.0, 0.0)]);
        assert_eq!(pfaffian_elimination(&two).unwrap(), c);
        let odd = random_skew(3, 1);
        assert_eq!(pfaffian_elimination(&odd).unwrap(), Complex64::new(0.0, 0.0));
    }

    #[test]
    fn four_by_four_closed_form() {
        let a = random_skew(4, 9);
        let expected = a[(0, 1)] * a[(2, 3)] - a[(0, 2)] * a[(1, 3)] + a[(0, 3)] * a[(1, 2)];
        for method in [PfaffianMethod::MatchingOracle, PfaffianMethod::Elimination] {
            assert!((pfaffian(&a, method).unwrap() - expected).norm() < 1e-14);
        }
    }

    #[test]
    fn square_is_determinant() {
        for n in [2, 4, 6, 8, 10, 12] {
            let a = random_skew(n, n as u64);
            let pf = pfaffian_elimination(&a).unwrap();
            let det = a.clone().determinant();
            assert!((pf * pf - det).norm() <= 1e-9 * det.norm().max(1e-300));
        }
    }

    #[test]
    fn rejects_bad_input() {
        let mut a = random_skew(4, 2);
        a[(0, 1)] += Complex64::new(1e-6, 0.0);
        assert!(matches!(pfaffian_elimination(&a), Err(Error::NotSkew(_))));
        let big = random_skew(12, 1);
        assert!(matches!(pfaffian_matching(&big), Err(Error::TooLarge { .. })));
        let rect = DMatrix::<Complex64>::zeros(2, 3);
        assert_eq!(pfaffian_elimination(&rect), Err(Error::NotSquare(2, 3)));
    }
}
