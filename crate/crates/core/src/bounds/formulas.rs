use serde::{Deserialize, Serialize};

use super::CovarianceNorms;
use crate::error::{Error, Result};
use crate::trees::{caterpillar, Tree};

fn factorial(n: usize) -> f64 {
    (1..=n).map(|k| k as f64).product()
}

/// `nⁿ / n!` with `0⁰ = 1`.
pub fn loop_prefactor(n: usize) -> f64 {
    (1..=n).map(|k| n as f64 / k as f64).product()
}

/// `n^{n/2} / n!` with `0⁰ = 1`.
pub fn gram_prefactor(n: usize) -> f64 {
    let r = (n as f64).sqrt();
    (1..=n).map(|k| r / k as f64).product()
}

fn check_arity(expected: usize, found: usize) -> Result<()> {
    if expected != found {
        return Err(Error::ArityMismatch { expected, found });
    }
    Ok(())
}

/// `∏_l d^T(l)!·2^{n_l}·w_l`.
fn vertex_product(tree: &Tree, n: &[usize], w: &[f64]) -> Result<f64> {
    check_arity(tree.m(), n.len())?;
    check_arity(tree.m(), w.len())?;
    Ok(tree
        .degrees()
        .iter()
        .zip(n)
        .zip(w)
        .map(|((&d, &nl), &wl)| factorial(d) * 2f64.powi(nl as i32) * wl)
        .product())
}

/// Number of loop lines `Σ n_l/2 − lines`, erroring unless it is a
/// nonnegative integer.
pub fn loop_count(n: &[usize], lines: usize) -> Result<usize> {
    let total: usize = n.iter().sum();
    if total % 2 != 0 {
        return Err(Error::LoopCount(format!("odd total leg count {total}")));
    }
    (total / 2)
        .checked_sub(lines)
        .ok_or_else(|| Error::LoopCount(format!("{} legs cannot close {lines} tree lines", total)))
}

/// Perturbative bound on `‖Â_{n_out}(T;𝐧)‖_∞`; zero unless
/// `n_out = n(𝐧,m)`. `w_sup[l-1] = ‖ŵ_{n_l}‖_∞`.
pub fn perturbative_bound(
    norms: &CovarianceNorms,
    tree: &Tree,
    n: &[usize],
    w_sup: &[f64],
    const_param: f64,
    n_out: usize,
) -> Result<f64> {
    if !(const_param > 0.0) {
        return Err(Error::InvalidParameter(format!("const must be positive, got {const_param}")));
    }
    let prod = vertex_product(tree, n, w_sup)?;
    if tree.external_count(n) != Some(n_out) {
        return Ok(0.0);
    }
    Ok((const_param * norms.sup_hat).powi(tree.m() as i32 - 1) * prod)
}

/// `(n^{n/2}/n!)·‖C‖₁^{m−1}·∏ d!·2^{n_l}·‖w_{n_l}‖₁` with `n = n(𝐧,m)`.
pub fn standard_bound(norms: &CovarianceNorms, tree: &Tree, n: &[usize], w_l1: &[f64]) -> Result<f64> {
    let prod = vertex_product(tree, n, w_l1)?;
    let next = tree
        .external_count(n)
        .ok_or_else(|| Error::LoopCount("fewer legs than tree lines".into()))?;
    Ok(gram_prefactor(next) * norms.l1_pos.powi(tree.m() as i32 - 1) * prod)
}

/// Loop-line bound on `|A(T;𝐧)|` with `‖ŵ‖_∞` kernels.
pub fn theorem1_bound(
    norms: &CovarianceNorms,
    tree: &Tree,
    n: &[usize],
    w_sup: &[f64],
    nspin: usize,
    volume: f64,
) -> Result<f64> {
    if let Some(&bad) = n.iter().find(|&&nl| nl < 2) {
        return Err(Error::InvalidParameter(format!("vertex with {bad} legs")));
    }
    let m = tree.m();
    let loops = loop_count(n, m - 1)?;
    check_arity(m, w_sup.len())?;
    let mut prod = 1.0;
    for (l, &d) in tree.degrees().iter().enumerate() {
        let branch = (d.saturating_sub(1)).max(1) as f64;
        prod *= factorial(d)
            * 2f64.powi(n[l] as i32)
            * branch.powi(loops as i32)
            * (nspin as f64).powi(n[l] as i32)
            * w_sup[l];
    }
    Ok(volume
        * loop_prefactor(loops)
        * norms.sup_hat.powi(m as i32 - 1)
        * norms.l1_hat.powi(loops as i32)
        * prod)
}

/// Bound for the caterpillar on `2m+2` vertices. `w[l-1]` is `‖ŵ_{n_l}‖_∞`
/// for `l ≤ m+2` and the position norm `‖w_{n_l}‖₁` for `l ≥ m+3`.
pub fn theorem2_bound(
    norms: &CovarianceNorms,
    m: usize,
    n: &[usize],
    w: &[f64],
    nspin: usize,
    volume: f64,
) -> Result<f64> {
    let tree = caterpillar(m)?;
    check_arity(2 * m + 2, n.len())?;
    check_arity(2 * m + 2, w.len())?;
    let loops = loop_count(n, 2 * m + 1)?;
    let mut prod = vertex_product(&tree, n, w)?;
    for &nl in &n[..m + 2] {
        prod *= (nspin as f64).powi(nl as i32);
    }
    Ok(volume
        * loop_prefactor(loops)
        * norms.sup_hat
        * norms.frak_c().powi(m as i32)
        * norms.l1_hat.powi(loops as i32)
        * prod)
}

/// `|𝕋|·((2n)!/(2ⁿn!))·‖Ĉ‖₁ⁿ·‖Â_{2n}‖_∞`.
pub fn loop_bound(norms: &CovarianceNorms, a_sup: f64, n: usize, volume: f64) -> f64 {
    let pairings: f64 = (1..=n).map(|k| (2 * k - 1) as f64).product();
    volume * pairings * norms.l1_hat.powi(n as i32) * a_sup
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EffectiveNorms {
    /// `(n, ‖w_n‖)`.
    pub per_n: Vec<(usize, f64)>,
    pub total: f64,
    pub branches: f64,
}

impl EffectiveNorms {
    /// `8(4e^𝔟)^k·‖W‖/(1−‖W‖)`.
    pub fn output_bound(&self, k: usize) -> Result<f64> {
        if self.total >= 1.0 {
            return Err(Error::NormTooLarge(self.total));
        }
        Ok(8.0 * (4.0 * self.branches.exp()).powi(k as i32) * self.total / (1.0 - self.total))
    }
}

/// `‖w_n‖ = ‖Ĉ‖_∞‖Ĉ‖₁^{n/2−1}·8e⁻¹(4e^{𝔟+½})ⁿ‖ŵ_n‖_∞` for each `(n, ‖ŵ_n‖_∞)`.
pub fn corollary_effective_norm(norms: &CovarianceNorms, w_sup: &[(usize, f64)], branches: f64) -> Result<EffectiveNorms> {
    let mut per_n = Vec::with_capacity(w_sup.len());
    for &(n, w) in w_sup {
        if n < 2 || n % 2 != 0 {
            return Err(Error::InvalidParameter(format!("kernel degree {n} must be even and at least 2")));
        }
        let v = norms.sup_hat
            * norms.l1_hat.powi(n as i32 / 2 - 1)
            * 8.0
            * (-1.0f64).exp()
            * (4.0 * (branches + 0.5).exp()).powi(n as i32)
            * w;
        per_n.push((n, v));
    }
    let total = per_n.iter().map(|&(_, v)| v).sum();
    Ok(EffectiveNorms { per_n, total, branches })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::trees::Tree;

    fn path(m: usize) -> Tree {
        let edges: Vec<_> = (1..m).map(|l| (l, l + 1)).collect();
        Tree::new(m, &edges).unwrap()
    }

    #[test]
    fn prefactors() {
        assert_eq!(loop_prefactor(0), 1.0);
        assert!((loop_prefactor(3) - 4.5).abs() < 1e-14);
        assert_eq!(gram_prefactor(0), 1.0);
        assert!((gram_prefactor(6) - 0.3).abs() < 1e-14);
    }

    #[test]
    fn perturbative_arithmetic() {
        let u = CovarianceNorms::unit();
        let t = path(3);
        let v = perturbative_bound(&u, &t, &[4, 4, 4], &[1.0; 3], 1.0, 8).unwrap();
        assert_eq!(v, 8192.0);
        assert_eq!(perturbative_bound(&u, &t, &[4, 4, 4], &[1.0; 3], 1.0, 6).unwrap(), 0.0);
        let single = perturbative_bound(&u.scaled(5.0), &Tree::single(), &[4], &[1.0], 1.0, 4).unwrap();
        assert_eq!(single, 16.0);
        let twice = perturbative_bound(&u.scaled(2.0), &t, &[4, 4, 4], &[1.0; 3], 1.0, 8).unwrap();
        assert_eq!(twice, 4.0 * v);
    }

    #[test]
    fn loop_and_corollary_arithmetic() {
        let u = CovarianceNorms::unit();
        assert_eq!(loop_bound(&u, 2.0, 0, 3.0), 6.0);
        assert_eq!(loop_bound(&u, 1.0, 2, 1.0), 3.0);
        let e = corollary_effective_norm(&u, &[(2, 1.0)], 0.0).unwrap();
        assert!((e.total - 128.0).abs() < 1e-10);
        assert!(matches!(e.output_bound(1), Err(Error::NormTooLarge(_))));
        let z = corollary_effective_norm(&u, &[(2, 0.0), (4, 0.0)], 0.0).unwrap();
        assert_eq!(z.output_bound(2).unwrap(), 0.0);
        assert!(corollary_effective_norm(&u, &[(3, 1.0)], 0.0).is_err());
    }
}
