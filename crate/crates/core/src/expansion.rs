//! Tree expansion of the free energy on a finite generator set.
//!
//! Vertex `l` of a tree on `{1..m}` gets its own copy `ψ^l` of the `n`
//! generators, stored at offset `(l−1)·n`. The line operator of `{l, l′}` is
//! `Σ_{ξ,ξ′} C(ξ,ξ′) ∂_{ψ^{l′}(ξ′)} ∂_{ψ^l(ξ)}` with left derivatives (the
//! one produced by differentiating `∫ · dμ_{C⊗s}` in `s_{ll′}`); it is even
//! and symmetric in `l ↔ l′`, so the order of lines is irrelevant.

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::grassmann::{gaussian_integral_matrix, GrassmannPoly};
use crate::trees::{enumerate_trees, s_matrix, Tree};

/// Gauss–Legendre nodes and weights on `[0, 1]` (Golub–Welsch).
pub fn gauss_legendre(points: usize) -> (Vec<f64>, Vec<f64>) {
    if points == 0 {
        return (Vec::new(), Vec::new());
    }
    let jacobi = DMatrix::from_fn(points, points, |i, j| {
        if i + 1 == j || j + 1 == i {
            let k = i.max(j) as f64;
            k / (4.0 * k * k - 1.0).sqrt()
        } else {
            0.0
        }
    });
    let eig = jacobi.symmetric_eigen();
    let mut pairs: Vec<(f64, f64)> = (0..points)
        .map(|i| {
            let v = eig.eigenvectors[(0, i)];
            ((eig.eigenvalues[i] + 1.0) / 2.0, v * v)
        })
        .collect();
    pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
    pairs.into_iter().unzip()
}

fn permutations(k: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut cur: Vec<usize> = (0..k).collect();
    fn rec(i: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if i == cur.len() {
            out.push(cur.clone());
            return;
        }
        for j in i..cur.len() {
            cur.swap(i, j);
            rec(i + 1, cur, out);
            cur.swap(i, j);
        }
    }
    rec(0, &mut cur, &mut out);
    out
}

fn below(mask: u64, k: usize) -> u32 {
    (mask & ((1u64 << k) - 1)).count_ones()
}

/// `Σ_{i,j} C_{ij} ∂_{b·n+j} ∂_{a·n+i} P`, with `a, b` 0-based copies.
fn apply_line(p: &GrassmannPoly, g: &DMatrix<Complex64>, n: usize, a: usize, b: usize) -> GrassmannPoly {
    let mut acc = Vec::new();
    let range = |c: usize| ((1u64 << n) - 1) << (c * n);
    for &(mask, coef) in p.terms() {
        let mut ra = mask & range(a);
        while ra != 0 {
            let ka = ra.trailing_zeros() as usize;
            ra &= ra - 1;
            let m1 = mask & !(1u64 << ka);
            let s1 = below(mask, ka);
            let mut rb = m1 & range(b);
            while rb != 0 {
                let kb = rb.trailing_zeros() as usize;
                rb &= rb - 1;
                let c = g[(ka - a * n, kb - b * n)];
                if c == Complex64::new(0.0, 0.0) {
                    continue;
                }
                let sign = if (s1 + below(m1, kb)) % 2 == 0 { 1.0 } else { -1.0 };
                acc.push((m1 & !(1u64 << kb), coef * c * sign));
            }
        }
    }
    GrassmannPoly::from_terms(p.ngen(), acc)
}

/// `Δ^T (W(ψ^1) ∧ … ∧ W(ψ^m))` on `m·n` generators.
pub fn tree_polynomial(w: &GrassmannPoly, g: &DMatrix<Complex64>, tree: &Tree) -> Result<GrassmannPoly> {
    let n = w.ngen();
    let m = tree.m();
    if g.nrows() != n || g.ncols() != n {
        return Err(Error::GeneratorMismatch);
    }
    let total = m * n;
    if total > 64 {
        return Err(Error::UniverseTooLarge(total));
    }
    let mut p = GrassmannPoly::scalar(total, Complex64::new(1.0, 0.0));
    for l in 0..m {
        p = p.mul(&w.embed(total, l * n)?)?;
    }
    for &(a, b) in tree.edges() {
        p = apply_line(&p, g, n, a - 1, b - 1);
    }
    Ok(p)
}

/// `C ⊗ s`: block `(l, l′)` is `s_{ll′} C`.
pub fn interpolated_covariance(g: &DMatrix<Complex64>, s: &DMatrix<f64>) -> DMatrix<Complex64> {
    let n = g.nrows();
    let m = s.nrows();
    DMatrix::from_fn(m * n, m * n, |i, j| g[(i % n, j % n)] * s[(i / n, j / n)])
}

/// `∫_{[0,1]^{T}} ds ∫ Δ^T ∧_l W(ψ^l) dμ_{C⊗s^T}`.
///
/// On each ordering simplex of the `s_ℓ` the integrand is a polynomial, so
/// the integral is computed exactly with a collapsed Gauss–Legendre product
/// rule on every simplex.
pub fn tree_term(w: &GrassmannPoly, g: &DMatrix<Complex64>, tree: &Tree) -> Result<Complex64> {
    let p = tree_polynomial(w, g, tree)?;
    if p.is_zero() {
        return Ok(Complex64::new(0.0, 0.0));
    }
    let k = tree.edges().len();
    if k == 0 {
        return gaussian_integral_matrix(&p, g);
    }
    let max_deg = p.terms().iter().map(|t| t.0.count_ones() as usize).max().unwrap_or(0);
    // degree ≤ max_deg/2 in the s-values, plus k−1 from the Jacobian
    let points = (max_deg / 2 + k) / 2 + 1;
    let (x, wt) = gauss_legendre(points);
    let mut total = Complex64::new(0.0, 0.0);
    let mut idx = vec![0usize; k];
    for order in permutations(k) {
        idx.iter_mut().for_each(|v| *v = 0);
        loop {
            // u_i = ∏_{j≥i} t_j is increasing in i; Jacobian ∏ t_j^{j}
            let mut weight = 1.0;
            let mut s = vec![0.0; k];
            let mut u = 1.0;
            for i in (0..k).rev() {
                let t = x[idx[i]];
                weight *= wt[idx[i]] * t.powi(i as i32);
                u *= t;
                s[order[i]] = u;
            }
            let st = s_matrix(tree, &s)?;
            total += gaussian_integral_matrix(&p, &interpolated_covariance(g, &st.matrix))? * weight;
            let mut d = 0;
            loop {
                if d == k {
                    break;
                }
                idx[d] += 1;
                if idx[d] < points {
                    break;
                }
                idx[d] = 0;
                d += 1;
            }
            if d == k {
                break;
            }
        }
    }
    Ok(total)
}

/// Coefficient of `g^m` in the tree expansion of `log ∫ e^{gW} dμ_C`:
/// `(1/m!) Σ_{T on m vertices} tree_term(T)`.
pub fn tree_expansion_order(w: &GrassmannPoly, g: &DMatrix<Complex64>, m: usize) -> Result<Complex64> {
    let factorial: f64 = (1..=m).map(|v| v as f64).product();
    let mut total = Complex64::new(0.0, 0.0);
    let trees = if m == 1 { vec![Tree::single()] } else { enumerate_trees(m)? };
    for tree in trees {
        total += tree_term(w, g, &tree)?;
    }
    Ok(total / factorial)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn quadrature_is_exact() {
        let (x, w) = gauss_legendre(4);
        for deg in 0..8 {
            let q: f64 = x.iter().zip(&w).map(|(x, w)| w * x.powi(deg)).sum();
            assert!((q - 1.0 / (deg as f64 + 1.0)).abs() < 1e-14, "degree {deg}");
        }
    }

    #[test]
    fn simplex_orderings() {
        assert_eq!(permutations(3).len(), 6);
        assert_eq!(permutations(0), vec![Vec::<usize>::new()]);
    }
}
