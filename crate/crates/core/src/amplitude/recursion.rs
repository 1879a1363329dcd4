//! The leaf-to-root recursion for `α′` and its direct-sum oracle.

use nalgebra::DMatrix;
use num_complex::Complex64;

use super::{AmplitudeProblem, SpinAssignment};
use crate::error::{Error, Result};
use crate::exterior::{sort_sign, wedge_sign, Form, LegIndex};

/// Cap on the number of slot assignments the direct oracle will visit.
pub const ORACLE_CAP: u64 = 1 << 24;

/// `α_ι(𝛔) = Σ_{ι′ : σ_{ι′} = σ′_ι} e_{ι′}`.
pub fn fundamental_form(problem: &AmplitudeProblem, spins: &SpinAssignment, iota: usize) -> Form {
    spin_filtered(problem, spins.leg[iota])
}

pub(crate) fn spin_filtered(problem: &AmplitudeProblem, spin: usize) -> Form {
    let one = Complex64::new(1.0, 0.0);
    Form::from_terms(
        problem.n_external(),
        problem
            .spins()
            .iter()
            .enumerate()
            .filter(|&(_, &s)| s == spin)
            .map(|(i, _)| (1u64 << i, one)),
    )
}

/// `α_ι(𝛔, 𝐤)` for interpolation parameters `s^T = a*a`.
///
/// Leg `ι` at position `q` of `𝓘` uses the row `k_{⌊q/2⌋}` of `a`, conjugated
/// when `q` is even; the coefficient of `e_{ι′}` is that row's entry at the
/// vertex of `ι′`. Vertices and `𝐤` entries are 1-based.
pub fn fundamental_form_interpolated(
    problem: &AmplitudeProblem,
    spins: &SpinAssignment,
    iota: usize,
    a: &DMatrix<Complex64>,
    k: &[usize],
) -> Result<Form> {
    let m = problem.m();
    if a.nrows() != m || a.ncols() != m {
        return Err(Error::Problem(format!("interpolation matrix must be {m}x{m}")));
    }
    let n = problem.n_external();
    if k.len() != n.div_ceil(2) || k.iter().any(|&x| x == 0 || x > m) {
        return Err(Error::Problem(format!("need {} row labels in 1..={m}", n.div_ceil(2))));
    }
    if iota >= n {
        return Err(Error::IndexOutOfRange { index: iota, size: n });
    }
    let row = k[iota / 2] - 1;
    let target = spins.leg[iota];
    let terms = problem.legs().iter().enumerate().filter_map(|(j, leg)| {
        if problem.spins()[j] != target {
            return None;
        }
        let entry = a[(row, leg.vertex - 1)];
        let c = if iota % 2 == 0 { entry.conj() } else { entry };
        Some((1u64 << j, c))
    });
    Ok(Form::from_terms(n, terms))
}

/// `𝒞_ℓ(𝛌, 𝛔)` for the line `ℓ = {l, Π(l)}`: every term `e_S` is multiplied by
/// `Ĉ_{σ_ℓ σ′_ℓ}(Σ_{ι∈S} p_ι)`.
pub fn apply_c(problem: &AmplitudeProblem, spins: &SpinAssignment, l: usize, a: &Form) -> Form {
    let (s, t) = spins.line[l - 1];
    c_core(problem, s, t, a)
}

pub(crate) fn c_core(problem: &AmplitudeProblem, s: usize, t: usize, a: &Form) -> Form {
    let cov = problem.covariance();
    a.map_diagonal(|mask| cov.hat(s, t, problem.mask_momentum(mask)))
}

/// `𝒲_l(𝛌, 𝛔)` applied to the child forms (children of `l` in increasing
/// label) and the leg forms `α_{(l,1)}, …`.
///
/// On basis terms the result is `ŵ_{n_l}` at the arguments
/// `(−P, σ′_{l,Π(l)})`, `(P_c, σ_{l,c})` for each child, `(p_ι, σ′_{(l,k)})` for
/// each leg, times the wedge of all inputs in that order; `P` is the total
/// momentum of the wedge. The root has no parent argument.
pub fn apply_w(
    problem: &AmplitudeProblem,
    spins: &SpinAssignment,
    l: usize,
    children: &[Form],
    legs: &[Form],
) -> Result<Form> {
    let rt = problem.rooted();
    let kids = rt.children(l);
    let nlegs = problem.legs_of(l).len();
    if children.len() != kids.len() || legs.len() != nlegs {
        return Err(Error::ArityMismatch {
            expected: kids.len() + nlegs,
            found: children.len() + legs.len(),
        });
    }
    let parent = rt.parent(l).map(|_| spins.line[l - 1].1);
    let child_spins: Vec<usize> = kids.iter().map(|&c| spins.line[c - 1].0).collect();
    let leg_spins: Vec<usize> = problem.legs_of(l).map(|i| spins.leg[i]).collect();
    let forms: Vec<&Form> = children.iter().chain(legs).collect();
    w_core(problem, l, parent, &child_spins, &leg_spins, &forms)
}

/// Multilinear expansion shared by [`apply_w`] and the spin-summed kernel.
pub(crate) fn w_core(
    problem: &AmplitudeProblem,
    l: usize,
    parent_spin: Option<usize>,
    child_spins: &[usize],
    leg_spins: &[usize],
    forms: &[&Form],
) -> Result<Form> {
    let universe = problem.n_external();
    if let Some(f) = forms.iter().find(|f| f.universe() != universe) {
        return Err(Error::UniverseMismatch(universe, f.universe()));
    }
    let kernel = problem.kernel(l);
    let offset = usize::from(parent_spin.is_some());
    let spins_of_slot: Vec<usize> = child_spins.iter().chain(leg_spins).copied().collect();
    let mut args = vec![(0usize, 0usize); offset + forms.len()];
    if let Some(s) = parent_spin {
        args[0].1 = s;
    }
    let mut out = Vec::new();
    let mut walk = Walk { problem, kernel, forms, spins: &spins_of_slot, offset, args: &mut args, out: &mut out };
    walk.run(0, 0, Complex64::new(1.0, 0.0));
    Ok(Form::from_terms(universe, out))
}

struct Walk<'a> {
    problem: &'a AmplitudeProblem,
    kernel: &'a dyn crate::grassmann::MomentumKernel,
    forms: &'a [&'a Form],
    spins: &'a [usize],
    offset: usize,
    args: &'a mut Vec<(usize, usize)>,
    out: &'a mut Vec<(u64, Complex64)>,
}

impl Walk<'_> {
    fn run(&mut self, slot: usize, mask: u64, coeff: Complex64) {
        if slot == self.forms.len() {
            if self.offset == 1 {
                let lat = self.problem.lattice();
                self.args[0].0 = lat.neg(self.problem.mask_momentum(mask));
            }
            let w = self.kernel.eval(self.args);
            if w != Complex64::new(0.0, 0.0) {
                self.out.push((mask, coeff * w));
            }
            return;
        }
        let form = self.forms[slot];
        for &(term, c) in form.terms() {
            let sign = wedge_sign(mask, term);
            if sign == 0 {
                continue;
            }
            self.args[self.offset + slot] = (self.problem.mask_momentum(term), self.spins[slot]);
            self.run(slot + 1, mask | term, coeff * c * sign as f64);
        }
    }
}

/// Leg slots in the order the recursion wedges them: for each vertex, the
/// slots of its children's subtrees (children in increasing label), then its
/// own legs.
pub fn traversal_order(problem: &AmplitudeProblem) -> Vec<LegIndex> {
    fn visit(problem: &AmplitudeProblem, l: usize, out: &mut Vec<LegIndex>) {
        for &c in problem.rooted().children(l) {
            visit(problem, c, out);
        }
        out.extend(problem.legs_of(l).map(|i| problem.legs()[i]));
    }
    let mut out = Vec::with_capacity(problem.n_external());
    visit(problem, problem.rooted().root(), &mut out);
    out
}

/// Sign of the permutation taking traversal order to lexicographic order.
pub fn traversal_sign(problem: &AmplitudeProblem) -> f64 {
    let positions: Vec<usize> = traversal_order(problem)
        .iter()
        .map(|leg| problem.position(*leg).expect("traversal visits every leg"))
        .collect();
    sort_sign(&positions) as f64
}

/// The recursion in its native (traversal) wedge order.
pub fn recurse_alpha_raw(problem: &AmplitudeProblem, spins: &SpinAssignment) -> Result<Form> {
    spins.check(problem)?;
    let rt = problem.rooted();
    let mut done: Vec<Option<Form>> = vec![None; problem.m()];
    for &l in rt.postorder() {
        let children: Vec<Form> =
            rt.children(l).iter().map(|&c| done[c - 1].take().expect("postorder")).collect();
        let legs: Vec<Form> = problem.legs_of(l).map(|i| fundamental_form(problem, spins, i)).collect();
        let w = apply_w(problem, spins, l, &children, &legs)?;
        done[l - 1] = Some(if rt.parent(l).is_some() { apply_c(problem, spins, l, &w) } else { w });
    }
    Ok(done[rt.root() - 1].take().expect("root evaluated"))
}

/// `α′(r; 𝐧; 𝛌; 𝛔)`, reported with the legs wedged in lexicographic order.
pub fn recurse_alpha(problem: &AmplitudeProblem, spins: &SpinAssignment) -> Result<Form> {
    let raw = recurse_alpha_raw(problem, spins)?;
    Ok(raw.scale(Complex64::new(traversal_sign(problem), 0.0)))
}

/// Direct sum over index assignments `𝛊 : 𝓘 → 𝓘` with `σ_{ι(s)} = σ′_s`:
/// `∏_ℓ Ĉ(λ_ℓ) ∏_l ŵ_{n_l}(…) e_{ι(1,1)} ∧ … ∧ e_{ι(m, ·)}` with line momenta
/// read off the subtree sums.
pub fn oracle_direct_alpha(problem: &AmplitudeProblem, spins: &SpinAssignment) -> Result<Form> {
    spins.check(problem)?;
    let n = problem.n_external();
    let candidates: Vec<Vec<usize>> = (0..n)
        .map(|s| (0..n).filter(|&j| problem.spins()[j] == spins.leg[s]).collect())
        .collect();
    let count = candidates.iter().fold(1u64, |acc, c| acc.saturating_mul(c.len().max(1) as u64));
    if count > ORACLE_CAP {
        return Err(Error::EnumerationCap(format!("{count} index assignments")));
    }
    let rt = problem.rooted();
    let lat = problem.lattice();
    let cov = problem.covariance();
    let m = problem.m();
    let mut assignment = vec![0usize; n];
    let mut out = Vec::new();
    let mut line_p = vec![0usize; m];
    let mut args: Vec<(usize, usize)> = Vec::new();
    let mut stack = vec![0usize; n];
    let mut depth = 0usize;
    // Odometer over injective assignments.
    loop {
        if depth == n {
            let idx: Vec<usize> = assignment.clone();
            let mut value = Complex64::new(sort_sign(&idx) as f64, 0.0);
            // Line momentum of {l, Π(l)}: legs assigned to slots in the subtree of l.
            for &l in rt.postorder() {
                let own = lat.sum(problem.legs_of(l).map(|s| problem.momenta()[idx[s]]));
                line_p[l - 1] = lat.sum(rt.children(l).iter().map(|&c| line_p[c - 1]).chain([own]));
            }
            for l in 1..=m {
                if rt.parent(l).is_some() {
                    let (s, t) = spins.line[l - 1];
                    value *= cov.hat(s, t, line_p[l - 1]);
                }
                args.clear();
                if rt.parent(l).is_some() {
                    args.push((lat.neg(line_p[l - 1]), spins.line[l - 1].1));
                }
                for &c in rt.children(l) {
                    args.push((line_p[c - 1], spins.line[c - 1].0));
                }
                for s in problem.legs_of(l) {
                    args.push((problem.momenta()[idx[s]], spins.leg[s]));
                }
                value *= problem.kernel(l).eval(&args);
                if value == Complex64::new(0.0, 0.0) {
                    break;
                }
            }
            let mask = idx.iter().fold(0u64, |acc, &j| acc | (1u64 << j));
            out.push((mask, value));
            if n == 0 {
                break;
            }
            depth -= 1;
            stack[depth] += 1;
            continue;
        }
        let options = &candidates[depth];
        // Advance to the next candidate not already used.
        while stack[depth] < options.len() && assignment[..depth].contains(&options[stack[depth]]) {
            stack[depth] += 1;
        }
        if stack[depth] < options.len() {
            assignment[depth] = options[stack[depth]];
            depth += 1;
            if depth < n {
                stack[depth] = 0;
            }
        } else {
            if depth == 0 {
                break;
            }
            depth -= 1;
            stack[depth] += 1;
        }
    }
    Ok(Form::from_terms(n, out))
}
