//! Assembly of `Â′_n` and `Â_n` at a fixed external tuple `𝛌`.

use num_complex::Complex64;

use super::recursion::{c_core, spin_filtered, traversal_sign, w_core};
use super::AmplitudeProblem;
use crate::error::Result;
use crate::exterior::Form;
use crate::grassmann::permutations_with_sign;
use crate::trees::momentum_assignment;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

fn factorial(n: usize) -> f64 {
    (1..=n).map(|k| k as f64).product()
}

/// `∏_l n_l! / (n_l − d^T(l))!`.
pub fn prefactor(problem: &AmplitudeProblem) -> f64 {
    let degrees = problem.rooted().degrees();
    problem
        .n_legs()
        .iter()
        .zip(&degrees)
        .map(|(&n, &d)| factorial(n) / factorial(n - d))
        .product()
}

/// Sign relating the kernel of the recursion rooted at `r` to the root-free
/// convention: one factor `−1` per line whose child has the smaller label,
/// and `(−1)^{j_l}` per non-root vertex, `j_l` being the number of neighbours
/// of `l` with label below `Π(l)`.
pub fn root_sign(problem: &AmplitudeProblem) -> f64 {
    let rt = problem.rooted();
    let tree = rt.tree();
    let mut flips = 0usize;
    for l in 1..=rt.m() {
        if let Some(p) = rt.parent(l) {
            if l < p {
                flips += 1;
            }
            flips += tree.neighbors(l).iter().filter(|&&u| u < p).count();
        }
    }
    if flips % 2 == 0 {
        1.0
    } else {
        -1.0
    }
}

/// `Â_n(T; 𝐧; 𝛌)` at the problem's external tuple, via the exterior-algebra
/// recursion with all spin sums carried out vertex by vertex.
///
/// Every vertex hands its parent one form per value of the spin `σ_ℓ` seen
/// by the parent; the sums over `σ′_ℓ` and over leg spins are folded in
/// before that, which is legitimate because `𝒲_l` is multilinear.
pub fn kernel_hat_a(problem: &AmplitudeProblem) -> Result<Complex64> {
    if !problem.conserves_momentum() {
        return Ok(ZERO);
    }
    let ns = problem.nspin();
    let n = problem.n_external();
    let rt = problem.rooted();
    let leg_forms: Vec<Form> = (0..ns).map(|s| spin_filtered(problem, s)).collect();
    let mut messages: Vec<Vec<Form>> = vec![Vec::new(); problem.m()];
    let mut root_form = Form::zero(n);
    for &l in rt.postorder() {
        let kids = rt.children(l).to_vec();
        let nlegs = problem.legs_of(l).len();
        let parent_spins: Vec<Option<usize>> =
            if rt.parent(l).is_some() { (0..ns).map(Some).collect() } else { vec![None] };
        let slots = kids.len() + nlegs;
        let mut per_t: Vec<Form> = Vec::with_capacity(parent_spins.len());
        for &t in &parent_spins {
            let mut acc: Vec<(u64, Complex64)> = Vec::new();
            let mut choice = vec![0usize; slots];
            loop {
                let child_spins = &choice[..kids.len()];
                let leg_spins = &choice[kids.len()..];
                let mut forms: Vec<&Form> = Vec::with_capacity(slots);
                for (i, &c) in kids.iter().enumerate() {
                    forms.push(&messages[c - 1][child_spins[i]]);
                }
                for &s in leg_spins {
                    forms.push(&leg_forms[s]);
                }
                if forms.iter().all(|f| !f.is_zero()) {
                    let w = w_core(problem, l, t, child_spins, leg_spins, &forms)?;
                    acc.extend_from_slice(w.terms());
                }
                if !odometer(&mut choice, ns) {
                    break;
                }
            }
            per_t.push(Form::from_terms(n, acc));
        }
        if rt.parent(l).is_some() {
            let msg: Vec<Form> = (0..ns)
                .map(|s| {
                    let terms: Vec<(u64, Complex64)> = per_t
                        .iter()
                        .enumerate()
                        .flat_map(|(t, f)| c_core(problem, s, t, f).terms().to_vec())
                        .collect();
                    Form::from_terms(n, terms)
                })
                .collect();
            messages[l - 1] = msg;
        } else {
            root_form = per_t.pop().expect("root form");
        }
        for &c in &kids {
            messages[c - 1].clear();
        }
    }
    let sign = traversal_sign(problem) * root_sign(problem);
    Ok(root_form.top_integral() * (sign * prefactor(problem) / factorial(n)))
}

/// Increment a base-`base` counter; `false` once it wraps to all zeros.
fn odometer(digits: &mut [usize], base: usize) -> bool {
    for d in digits.iter_mut().rev() {
        *d += 1;
        if *d < base {
            return true;
        }
        *d = 0;
    }
    false
}

/// Momentum entering vertex `v` through each neighbour `u`: the total
/// external momentum on `u`'s side of the line.
fn inflow(problem: &AmplitudeProblem, lambda: &[(usize, usize)]) -> Result<Vec<Vec<(usize, usize)>>> {
    let rt = problem.rooted();
    let lat = problem.lattice();
    let legs: Vec<Vec<usize>> =
        (1..=problem.m()).map(|l| problem.legs_of(l).map(|i| lambda[i].0).collect()).collect();
    let lines = momentum_assignment(rt, &legs, lat)?;
    let mut out = vec![Vec::new(); problem.m()];
    for (l, parent, p) in lines {
        out[parent - 1].push((l, p));
        out[l - 1].push((parent, lat.neg(p)));
    }
    for v in &mut out {
        v.sort_unstable();
    }
    Ok(out)
}

/// `Â′_n(T; 𝐧; 𝛌)` in the root-free convention, by direct enumeration of all
/// line spins. `lambda` lists `(p, σ)` per leg of `𝓘` in lexicographic order.
pub fn oracle_direct_kernel(problem: &AmplitudeProblem, lambda: &[(usize, usize)]) -> Result<Complex64> {
    let lat = problem.lattice();
    if lat.sum(lambda.iter().map(|x| x.0)) != 0 {
        return Ok(ZERO);
    }
    let flows = inflow(problem, lambda)?;
    let edges = problem.tree().edges().to_vec();
    let ns = problem.nspin();
    let cov = problem.covariance();
    let mut spins = vec![0usize; 2 * edges.len()];
    let mut total = ZERO;
    let mut args = Vec::new();
    loop {
        let mut value = Complex64::new(1.0, 0.0);
        for (e, &(_, b)) in edges.iter().enumerate() {
            // Momentum flowing out of b's side.
            let a = edges[e].0;
            let q = flows[a - 1].iter().find(|x| x.0 == b).expect("edge").1;
            value *= cov.hat(spins[2 * e], spins[2 * e + 1], q);
        }
        for v in 1..=problem.m() {
            if value == ZERO {
                break;
            }
            args.clear();
            for &(u, q) in &flows[v - 1] {
                let e = problem.tree().edge_index(v, u).expect("edge");
                let end = if v < u { 2 * e } else { 2 * e + 1 };
                args.push((q, spins[end]));
            }
            args.extend(problem.legs_of(v).map(|i| lambda[i]));
            value *= problem.kernel(v).eval(&args);
        }
        total += value;
        if !odometer(&mut spins, ns) {
            break;
        }
    }
    Ok(total * prefactor(problem))
}

/// Same quantity as [`oracle_direct_kernel`], with the line-spin sum done by
/// passing messages toward the root.
pub fn kernel_prime(problem: &AmplitudeProblem, lambda: &[(usize, usize)]) -> Result<Complex64> {
    let lat = problem.lattice();
    if lat.sum(lambda.iter().map(|x| x.0)) != 0 {
        return Ok(ZERO);
    }
    let flows = inflow(problem, lambda)?;
    let rt = problem.rooted();
    let ns = problem.nspin();
    let cov = problem.covariance();
    // message[c][u]: sum over the subtree of c with spin u at the parent's end.
    let mut message = vec![vec![ZERO; ns]; problem.m()];
    let mut root_value = ZERO;
    let mut args: Vec<(usize, usize)> = Vec::new();
    for &v in rt.postorder() {
        let nbrs = &flows[v - 1];
        let parent = rt.parent(v);
        let kids: Vec<usize> = nbrs.iter().map(|x| x.0).filter(|&u| Some(u) != parent).collect();
        // Φ_v(own-end spin of the parent line).
        let own_range = if parent.is_some() { ns } else { 1 };
        let mut phi = vec![ZERO; own_range];
        let mut choice = vec![0usize; kids.len()];
        loop {
            let weight: Complex64 =
                kids.iter().zip(&choice).map(|(&c, &u)| message[c - 1][u]).product();
            if weight != ZERO {
                for (own, slot) in phi.iter_mut().enumerate() {
                    args.clear();
                    let mut k = 0;
                    for &(u, q) in nbrs {
                        if Some(u) == parent {
                            args.push((q, own));
                        } else {
                            args.push((q, choice[k]));
                            k += 1;
                        }
                    }
                    args.extend(problem.legs_of(v).map(|i| lambda[i]));
                    *slot += weight * problem.kernel(v).eval(&args);
                }
            }
            if !odometer(&mut choice, ns) {
                break;
            }
        }
        match parent {
            Some(p) => {
                let q_out = nbrs.iter().find(|x| x.0 == p).expect("parent").1;
                let q_in = lat.neg(q_out);
                for u in 0..ns {
                    message[v - 1][u] = (0..ns)
                        .map(|own| {
                            // Ĉ_{σσ′}(q) with σ at the smaller label and q out of the larger label's side.
                            let c = if p < v { cov.hat(u, own, q_in) } else { cov.hat(own, u, q_out) };
                            c * phi[own]
                        })
                        .sum();
                }
            }
            None => root_value = phi[0],
        }
    }
    Ok(root_value * prefactor(problem))
}

/// `(1/n!) Σ_π sgn π · Â′(π𝛌)`.
pub fn antisymmetrized_oracle(problem: &AmplitudeProblem, lambda: &[(usize, usize)]) -> Result<Complex64> {
    let n = lambda.len();
    let mut total = ZERO;
    let mut permuted = vec![(0, 0); n];
    for (perm, sign) in permutations_with_sign(n) {
        for (i, &j) in perm.iter().enumerate() {
            permuted[i] = lambda[j];
        }
        total += oracle_direct_kernel(problem, &permuted)? * sign;
    }
    Ok(total / factorial(n))
}
