//! Kernel tables and the loop contraction `∫ 𝒜(T; 𝐧; ψ) dμ_C`.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::kernel::{kernel_hat_a, kernel_prime};
use super::AmplitudeProblem;
use crate::error::{Error, Result};
use crate::exterior::sort_sign;
use crate::grassmann::{
    gaussian_integral, inverse_fourier_kernel, DenseKernel, Domain, GeneratorSet, GrassmannPoly,
    DEFAULT_GENERATOR_CAP,
};
use crate::trees::Tree;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum KernelKind {
    /// `Â_n`, antisymmetric.
    Antisymmetric,
    /// `Â′_n` in the root-free convention.
    Prime,
}

/// `Â_n` or `Â′_n` tabulated over every external momentum–spin tuple.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KernelTable {
    pub tree: Tree,
    pub root: usize,
    pub n_per_vertex: Vec<usize>,
    pub kind: KernelKind,
    pub kernel: DenseKernel,
}

pub fn kernel_table(problem: &AmplitudeProblem, kind: KernelKind) -> Result<KernelTable> {
    let n = problem.n_external();
    let lattice = problem.lattice().clone();
    let mut kernel = DenseKernel::zeros(lattice.clone(), problem.nspin(), n, Domain::Momentum)?;
    let mut args = vec![(0, 0); n];
    for flat in 0..kernel.values.len() {
        kernel.decode(flat, &mut args);
        if lattice.sum(args.iter().map(|a| a.0)) != 0 {
            continue;
        }
        kernel.values[flat] = match kind {
            KernelKind::Antisymmetric => {
                let (p, s): (Vec<usize>, Vec<usize>) = args.iter().copied().unzip();
                kernel_hat_a(&problem.with_external(p, s)?)?
            }
            KernelKind::Prime => kernel_prime(problem, &args)?,
        };
    }
    Ok(KernelTable {
        tree: problem.tree().clone(),
        root: problem.rooted().root(),
        n_per_vertex: problem.n_legs().to_vec(),
        kind,
        kernel,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ContractionMethod {
    /// `|𝕋| (2N)!/(2^N N!) ∫ dλ_1…dλ_N Â(λ_1, −λ_1, …) ∏ Ĉ(λ_i)` with `Â`
    /// from the recursion.
    Pairing,
    /// Signed sum over all perfect matchings with the unsymmetrized `Â′`.
    Matchings,
    /// Tabulate `Â`, transform to position space and take the Grassmann
    /// Gaussian integral of the resulting polynomial.
    Grassmann,
}

/// `A(T; 𝐧) = ∫ 𝒜(T; 𝐧; ψ) dμ_C`. The problem's own external data are
/// ignored; only the leg count matters.
pub fn tree_amplitude_value(problem: &AmplitudeProblem, method: ContractionMethod) -> Result<Complex64> {
    let n = problem.n_external();
    if n % 2 == 1 {
        return Ok(ZERO);
    }
    match method {
        ContractionMethod::Pairing => pairing_value(problem),
        ContractionMethod::Matchings => matchings_value(problem),
        ContractionMethod::Grassmann => grassmann_value(problem),
    }
}

fn for_each_loop<F: FnMut(&[(usize, usize)], Complex64) -> Result<()>>(
    problem: &AmplitudeProblem,
    pairs: &[(usize, usize)],
    mut f: F,
) -> Result<()> {
    let n = problem.n_external();
    let npairs = pairs.len();
    let lat = problem.lattice();
    let (lsize, ns) = (lat.len(), problem.nspin());
    let cov = problem.covariance();
    // Per pair: momentum, spin of first member, spin of second member.
    let radix = [lsize, ns, ns];
    let mut digits = vec![0usize; 3 * npairs];
    let mut lambda = vec![(0usize, 0usize); n];
    loop {
        let mut weight = Complex64::new(1.0, 0.0);
        for (k, &(i, j)) in pairs.iter().enumerate() {
            let (p, s, t) = (digits[3 * k], digits[3 * k + 1], digits[3 * k + 2]);
            lambda[i] = (p, s);
            lambda[j] = (lat.neg(p), t);
            weight *= cov.hat(s, t, p);
        }
        if weight != ZERO {
            f(&lambda, weight)?;
        }
        let mut carry = true;
        for (d, digit) in digits.iter_mut().enumerate().rev() {
            *digit += 1;
            if *digit < radix[d % 3] {
                carry = false;
                break;
            }
            *digit = 0;
        }
        if carry {
            return Ok(());
        }
    }
}

fn double_factorial_pairings(npairs: usize) -> f64 {
    (1..=npairs).map(|k| (2 * k - 1) as f64).product()
}

fn pairing_value(problem: &AmplitudeProblem) -> Result<Complex64> {
    let npairs = problem.n_external() / 2;
    let pairs: Vec<(usize, usize)> = (0..npairs).map(|k| (2 * k, 2 * k + 1)).collect();
    let mut total = ZERO;
    for_each_loop(problem, &pairs, |lambda, weight| {
        let (p, s): (Vec<usize>, Vec<usize>) = lambda.iter().copied().unzip();
        total += kernel_hat_a(&problem.with_external(p, s)?)? * weight;
        Ok(())
    })?;
    let vol = problem.lattice().volume();
    Ok(total * vol.powi(1 - npairs as i32) * double_factorial_pairings(npairs))
}

/// Perfect matchings of `0..n` with the signs of their Pfaffian terms.
pub(crate) fn perfect_matchings(n: usize) -> Vec<(Vec<(usize, usize)>, f64)> {
    fn rec(rest: &[usize]) -> Vec<(Vec<(usize, usize)>, f64)> {
        if rest.is_empty() {
            return vec![(Vec::new(), 1.0)];
        }
        let first = rest[0];
        let mut out = Vec::new();
        for j in 1..rest.len() {
            let sign = if j % 2 == 1 { 1.0 } else { -1.0 };
            let remaining: Vec<usize> = rest[1..].iter().enumerate().filter(|&(k, _)| k + 1 != j).map(|(_, &x)| x).collect();
            for (mut m, s) in rec(&remaining) {
                m.insert(0, (first, rest[j]));
                out.push((m, s * sign));
            }
        }
        out
    }
    let all: Vec<usize> = (0..n).collect();
    rec(&all)
}

fn matchings_value(problem: &AmplitudeProblem) -> Result<Complex64> {
    let n = problem.n_external();
    let npairs = n / 2;
    let mut total = ZERO;
    for (pairs, sign) in perfect_matchings(n) {
        let mut partial = ZERO;
        for_each_loop(problem, &pairs, |lambda, weight| {
            partial += kernel_prime(problem, lambda)? * weight;
            Ok(())
        })?;
        total += partial * sign;
    }
    let vol = problem.lattice().volume();
    Ok(total * vol.powi(1 - npairs as i32))
}

fn grassmann_value(problem: &AmplitudeProblem) -> Result<Complex64> {
    let gens = GeneratorSet::with_spin_count(problem.lattice().clone(), problem.nspin());
    gens.check_cap(DEFAULT_GENERATOR_CAP)?;
    let poly = amplitude_polynomial(problem, &gens)?;
    gaussian_integral(&poly, problem.covariance(), &gens)
}

/// `𝒜(T; 𝐧; ψ)` as a Grassmann polynomial on the generators `(x, σ)`.
pub fn amplitude_polynomial(problem: &AmplitudeProblem, gens: &GeneratorSet) -> Result<GrassmannPoly> {
    let n = problem.n_external();
    let lattice = problem.lattice();
    if gens.lattice != *lattice || gens.nspin() != problem.nspin() {
        return Err(Error::GeneratorMismatch);
    }
    let table = kernel_table(problem, KernelKind::Antisymmetric)?;
    let position = inverse_fourier_kernel(&table.kernel)?;
    // The inverse transform of the shell kernel is the coefficient density over |𝕋|.
    let scale = lattice.volume() * lattice.cell().powi(n as i32);
    let ngen = gens.len();
    let mut args = vec![(0, 0); n];
    let mut idx = vec![0usize; n];
    let mut terms = Vec::new();
    for (flat, v) in position.values.iter().enumerate() {
        if *v == ZERO {
            continue;
        }
        position.decode(flat, &mut args);
        for (k, a) in args.iter().enumerate() {
            idx[k] = gens.index(a.0, a.1);
        }
        let sign = sort_sign(&idx);
        if sign == 0 {
            continue;
        }
        let mask = idx.iter().fold(0u64, |acc, &g| acc | (1u64 << g));
        terms.push((mask, *v * (scale * sign as f64)));
    }
    Ok(GrassmannPoly::from_terms(ngen, terms))
}
