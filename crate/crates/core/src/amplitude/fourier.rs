//! Position-space superpositions of rank-one wedges for `𝒞_ℓ` and `𝒲_l`.

use num_complex::Complex64;

use super::recursion::{apply_c, apply_w};
use super::{AmplitudeProblem, SpinAssignment};
use crate::error::{Error, Result};
use crate::exterior::{Form, PRUNE_REL};
use crate::grassmann::{inverse_fourier_kernel, DenseKernel, Domain, MomentumKernel};

/// A wedge `α^{(1)} ∧ … ∧ α^{(k)}` of one-forms, kept factorized.
#[derive(Debug, Clone, PartialEq)]
pub struct RankOne {
    universe: usize,
    factors: Vec<Form>,
}

impl RankOne {
    pub fn new(universe: usize, factors: Vec<Form>) -> Result<Self> {
        for f in &factors {
            if f.universe() != universe {
                return Err(Error::UniverseMismatch(universe, f.universe()));
            }
            if let Some(&(mask, _)) = f.terms().iter().find(|t| t.0.count_ones() != 1) {
                return Err(Error::NotRankOne(format!("factor has a term of degree {}", mask.count_ones())));
            }
        }
        Ok(RankOne { universe, factors })
    }

    pub fn factors(&self) -> &[Form] {
        &self.factors
    }

    pub fn wedge(&self) -> Result<Form> {
        Form::wedge_all(self.universe, &self.factors)
    }

    /// `∏ ‖α^{(j)}‖₂`.
    pub fn l2_product(&self) -> f64 {
        self.factors.iter().map(|f| f.lp_norm(2.0).unwrap_or(0.0)).product()
    }

    /// `ℰ(x; 𝛌)` applied to every factor: `e_ι ↦ e^{i x·p_ι} e_ι`.
    pub fn shifted(&self, problem: &AmplitudeProblem, x: usize) -> RankOne {
        let lat = problem.lattice();
        let factors = self
            .factors
            .iter()
            .map(|f| f.map_diagonal(|mask| lat.phase(problem.momenta()[mask.trailing_zeros() as usize], x)))
            .collect();
        RankOne { universe: self.universe, factors }
    }
}

/// `Σ_j c_j · (rank-one wedge)_j`.
#[derive(Debug, Clone, PartialEq)]
pub struct Superposition {
    pub universe: usize,
    pub terms: Vec<(Complex64, RankOne)>,
}

impl Superposition {
    pub fn sum(&self) -> Result<Form> {
        let mut acc = Vec::new();
        for (c, r) in &self.terms {
            acc.extend(r.wedge()?.terms().iter().map(|&(m, v)| (m, v * c)));
        }
        Ok(Form::from_terms(self.universe, acc))
    }

    /// `Σ_j |c_j| ∏ ‖α_j^{(i)}‖₂`, an upper bound for the ℓ² norm of the sum.
    pub fn norm_bound(&self) -> f64 {
        self.terms.iter().map(|(c, r)| c.norm() * r.l2_product()).sum()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }
}

/// `𝒞_ℓ[α] = Σ_x C_{σ_ℓσ′_ℓ}(x) ℰ(x)[α^{(1)}] ∧ … ∧ ℰ(x)[α^{(k)}]`, the
/// site sum weighted by the cell.
pub fn fourier_decompose_c(
    problem: &AmplitudeProblem,
    spins: &SpinAssignment,
    l: usize,
    input: &RankOne,
) -> Result<Superposition> {
    let (s, t) = spins.line[l - 1];
    let cov = problem.covariance();
    let lat = problem.lattice();
    let position = cov.position();
    let nsites = lat.len();
    let block = (s * cov.nspin() + t) * nsites;
    let cell = lat.cell();
    let terms = (0..nsites)
        .filter(|&x| position[block + x] != Complex64::new(0.0, 0.0))
        .map(|x| (position[block + x] * cell, input.shifted(problem, x)))
        .collect();
    Ok(Superposition { universe: problem.n_external(), terms })
}

/// Position-space kernel whose transform reproduces `ŵ` on every argument
/// tuple.
fn position_kernel(problem: &AmplitudeProblem, kernel: &dyn MomentumKernel) -> Result<DenseKernel> {
    let hat = DenseKernel::from_fn(
        problem.lattice().clone(),
        problem.nspin(),
        kernel.arity(),
        Domain::Momentum,
        |args| kernel.eval(args),
    )?;
    inverse_fourier_kernel(&hat)
}

/// `𝒲_l` on rank-one child wedges and one-form legs as the superposition
/// over `x_0` (parent slot), `x^{l′}` (children) and `x_k` (legs) of
/// `w_{n_l}(…) ⋀ ℰ(x^{l′} − x_0)[α_{l,l′}^{(j)}] ∧ ℰ(x_k − x_0)[α_{(l,k)}]`.
/// The root has no `x_0`.
pub fn fourier_decompose_w(
    problem: &AmplitudeProblem,
    spins: &SpinAssignment,
    l: usize,
    children: &[RankOne],
    legs: &[Form],
) -> Result<Superposition> {
    let rt = problem.rooted();
    let kids = rt.children(l);
    let nlegs = problem.legs_of(l).len();
    if children.len() != kids.len() || legs.len() != nlegs {
        return Err(Error::ArityMismatch { expected: kids.len() + nlegs, found: children.len() + legs.len() });
    }
    let legs: Vec<RankOne> =
        legs.iter().map(|f| RankOne::new(problem.n_external(), vec![f.clone()])).collect::<Result<_>>()?;
    let w = position_kernel(problem, problem.kernel(l))?;
    let lat = problem.lattice();
    let has_parent = rt.parent(l).is_some();
    let offset = usize::from(has_parent);
    let slots: Vec<&RankOne> = children.iter().chain(&legs).collect();
    let slot_spins: Vec<usize> = kids
        .iter()
        .map(|&c| spins.line[c - 1].0)
        .chain(problem.legs_of(l).map(|i| spins.leg[i]))
        .collect();
    let parent_spin = if has_parent { spins.line[l - 1].1 } else { 0 };
    let cell_n = lat.cell().powi(w.arity as i32);
    let mut terms = Vec::new();
    let mut args = vec![(0usize, 0usize); w.arity];
    // Entries at round-off level of the inverse transform are dropped.
    let cut = w.values.iter().fold(0.0f64, |m, v| m.max(v.norm())) * PRUNE_REL;
    for flat in 0..w.values.len() {
        let v = w.values[flat];
        if v.norm() <= cut {
            continue;
        }
        w.decode(flat, &mut args);
        if has_parent && args[0].1 != parent_spin {
            continue;
        }
        if args[offset..].iter().zip(&slot_spins).any(|(a, &s)| a.1 != s) {
            continue;
        }
        let x0 = if has_parent { args[0].0 } else { 0 };
        let mut factors = Vec::new();
        for (slot, input) in slots.iter().enumerate() {
            let shift = lat.sub(args[offset + slot].0, x0);
            factors.extend(input.shifted(problem, shift).factors);
        }
        terms.push((v * cell_n, RankOne { universe: problem.n_external(), factors }));
    }
    Ok(Superposition { universe: problem.n_external(), terms })
}

/// `apply_c` on the wedge of a rank-one input, for comparison with the
/// superposition.
pub fn apply_rank_one_c(problem: &AmplitudeProblem, spins: &SpinAssignment, l: usize, input: &RankOne) -> Result<Form> {
    Ok(apply_c(problem, spins, l, &input.wedge()?))
}

/// `apply_w` on wedges of rank-one inputs.
pub fn apply_rank_one_w(
    problem: &AmplitudeProblem,
    spins: &SpinAssignment,
    l: usize,
    children: &[RankOne],
    legs: &[Form],
) -> Result<Form> {
    let wedges: Vec<Form> = children.iter().map(|c| c.wedge()).collect::<Result<_>>()?;
    apply_w(problem, spins, l, &wedges, legs)
}
