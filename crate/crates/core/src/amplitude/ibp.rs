//! Discrete summation by parts for a pair of propagator maps.
//!
//! For one-dimensional momenta and the centred fundamental domain
//! `t_min ≤ t ≤ t_max`, with `Δf(t) = f(t+1) − f(t)` and `S = P + P′`,
//!
//! `Ĉ_ℓ(P) Ĉ_ℓ′(P′) = Σ_{t < P′} [ΔĈ_ℓ′(t) Ĉ_ℓ(S−1−t) − Ĉ_ℓ′(t) ΔĈ_ℓ(S−1−t)]`
//!
//! provided `Ĉ_ℓ′(t_min) = 0`. Applied termwise to `e_A ∧ e_B` this gives
//! `𝒞_ℓ[a] ∧ 𝒞_ℓ′[a′] = Σ_t ΔĈ_ℓ′(t) 𝒞_ℓ(t)[a ∧ 𝒳(t)a′] − Σ_t Ĉ_ℓ′(t) 𝒞′_ℓ(t)[a ∧ 𝒳(t)a′]`
//! with `𝒞_ℓ(t)[e_M] = Ĉ_ℓ(P_M − 1 − t) e_M`, `𝒞′_ℓ(t)` the same with `ΔĈ_ℓ`,
//! and `𝒳(t)[e_B] = 𝟙(t < P_B) e_B`.

use num_complex::Complex64;

use super::recursion::apply_c;
use super::{AmplitudeProblem, SpinAssignment};
use crate::error::{Error, Result};
use crate::exterior::Form;
use crate::grassmann::Covariance;

#[derive(Debug, Clone, PartialEq)]
pub struct IbpResult {
    pub lhs: Form,
    pub rhs: Form,
    /// `max |lhs − rhs|` over coefficients.
    pub residual: f64,
    /// `Σ_t |ΔĈ_ℓ′(t)| ‖𝒞_ℓ(t)[…]‖₂ + Σ_t |Ĉ_ℓ′(t)| ‖𝒞′_ℓ(t)[…]‖₂`.
    pub bound_value: f64,
    /// `Σ_t |ΔĈ_ℓ′| · sup |Ĉ_ℓ| + Σ_t |Ĉ_ℓ′| · sup |ΔĈ_ℓ|`.
    pub constant: f64,
}

fn one_dim_len(cov: &Covariance) -> Result<usize> {
    let lat = cov.lattice();
    if lat.ndim() != 1 {
        return Err(Error::LatticeMismatch(format!(
            "summation by parts needs a one-dimensional momentum lattice, got {} axes",
            lat.ndim()
        )));
    }
    Ok(lat.dims[0])
}

/// Momentum indices in increasing centred order.
fn centred_order(len: usize) -> Vec<usize> {
    let half = len / 2;
    (0..len).map(|k| (k + len - half) % len).collect()
}

fn check_support(cov: &Covariance, s: usize, t: usize) -> Result<()> {
    let len = one_dim_len(cov)?;
    let order = centred_order(len);
    for &edge in [order[0], order[len - 1]].iter() {
        if cov.hat(s, t, edge) != Complex64::new(0.0, 0.0) {
            return Err(Error::SupportAtBoundary(edge));
        }
    }
    Ok(())
}

fn delta(cov: &Covariance, s: usize, t: usize, k: usize) -> Complex64 {
    let len = cov.lattice().dims[0];
    cov.hat(s, t, (k + 1) % len) - cov.hat(s, t, k)
}

/// Discrete constant `𝔠` for the spin pairs of the two lines.
pub fn ibp_constant(cov: &Covariance, first: (usize, usize), second: (usize, usize)) -> Result<f64> {
    let len = one_dim_len(cov)?;
    let sup_c = (0..len).map(|k| cov.hat(first.0, first.1, k).norm()).fold(0.0, f64::max);
    let sup_dc = (0..len).map(|k| delta(cov, first.0, first.1, k).norm()).fold(0.0, f64::max);
    let sum_dc2: f64 = (0..len).map(|k| delta(cov, second.0, second.1, k).norm()).sum();
    let sum_c2: f64 = (0..len).map(|k| cov.hat(second.0, second.1, k).norm()).sum();
    Ok(sum_dc2 * sup_c + sum_c2 * sup_dc)
}

/// Both sides of the summation-by-parts identity for the lines `{l, Π(l)}`
/// and `{l′, Π(l′)}` acting on `a` and `a′`.
pub fn ibp_apply(
    problem: &AmplitudeProblem,
    spins: &SpinAssignment,
    l: usize,
    l2: usize,
    a: &Form,
    a2: &Form,
) -> Result<IbpResult> {
    let cov = problem.covariance();
    let len = one_dim_len(cov)?;
    let first = spins.line[l - 1];
    let second = spins.line[l2 - 1];
    check_support(cov, second.0, second.1)?;
    check_support(cov, first.0, first.1)?;
    let lhs = apply_c(problem, spins, l, a).wedge(&apply_c(problem, spins, l2, a2))?;
    let order = centred_order(len);
    // rank[k] = position of momentum index k in centred order.
    let mut rank = vec![0usize; len];
    for (r, &k) in order.iter().enumerate() {
        rank[k] = r;
    }
    let mut acc = Vec::new();
    let mut bound_value = 0.0;
    for (r, &t) in order.iter().enumerate() {
        let c2 = cov.hat(second.0, second.1, t);
        let dc2 = delta(cov, second.0, second.1, t);
        if c2 == Complex64::new(0.0, 0.0) && dc2 == Complex64::new(0.0, 0.0) {
            continue;
        }
        let cut = a2.map_diagonal(|mask| {
            if rank[problem.mask_momentum(mask)] > r {
                Complex64::new(1.0, 0.0)
            } else {
                Complex64::new(0.0, 0.0)
            }
        });
        let x = a.wedge(&cut)?;
        let shift = |mask: u64| (problem.mask_momentum(mask) + 2 * len - 1 - t) % len;
        let plain = x.map_diagonal(|mask| cov.hat(first.0, first.1, shift(mask)));
        let diff = x.map_diagonal(|mask| delta(cov, first.0, first.1, shift(mask)));
        bound_value += dc2.norm() * plain.lp_norm(2.0)? + c2.norm() * diff.lp_norm(2.0)?;
        acc.extend(plain.terms().iter().map(|&(m, v)| (m, v * dc2)));
        acc.extend(diff.terms().iter().map(|&(m, v)| (m, -v * c2)));
    }
    let rhs = Form::from_terms(problem.n_external(), acc);
    let residual = lhs.sub(&rhs)?.lp_norm(f64::INFINITY)?;
    let constant = ibp_constant(cov, first, second)?;
    Ok(IbpResult { lhs, rhs, residual, bound_value, constant })
}
