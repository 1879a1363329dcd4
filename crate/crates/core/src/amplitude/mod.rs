//! Amplitude kernels of the tree expansion.
//!
//! The universe `𝓘` of an [`AmplitudeProblem`] is the list of external legs
//! `(l, k)`, `k = 1..=n_l − d^T(l)`, in lexicographic order; leg `ι` carries the
//! fixed momentum–spin pair `λ_ι = (p_ι, σ_ι)`.
//!
//! Sign conventions. The recursion wedges child forms (children in increasing
//! label) before the vertex's own legs, so it produces the legs in traversal
//! order; [`recurse_alpha`] multiplies by the sign of the permutation taking
//! traversal order to lexicographic order, after which it agrees term by term
//! with the direct sum [`oracle_direct_alpha`]. Kernels `Â′` and `Â` are
//! reported in a root-free convention: every line `{a, b}`, `a < b`, carries the
//! momentum `q` flowing out of the component of `b`, `Ĉ_{σσ′}(q)`, vertex `a`
//! receives the argument `(q, σ)` and vertex `b` receives `(−q, σ′)`; every
//! vertex lists its line arguments by increasing neighbour label, then its
//! legs. For a root `r` this differs from the rooted recursion by the sign
//! [`root_sign`].

mod io;
mod kernel;
mod recursion;
mod value;
mod fourier;
mod ibp;

pub use fourier::{
    apply_rank_one_c, apply_rank_one_w, fourier_decompose_c, fourier_decompose_w, RankOne, Superposition,
};
pub use ibp::{ibp_apply, ibp_constant, IbpResult};
pub use io::{load_problem, ExternalLeg, ProblemFile};
pub use kernel::{
    antisymmetrized_oracle, kernel_hat_a, kernel_prime, oracle_direct_kernel, prefactor, root_sign,
};
pub use recursion::{
    apply_c, apply_w, fundamental_form, fundamental_form_interpolated, oracle_direct_alpha, recurse_alpha,
    recurse_alpha_raw, traversal_order, traversal_sign,
};
pub use value::{amplitude_polynomial, kernel_table, tree_amplitude_value, ContractionMethod, KernelKind, KernelTable};

use std::sync::Arc;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exterior::{LegIndex, MAX_UNIVERSE};
use crate::grassmann::{Covariance, MomentumKernel};
use crate::lattice::Lattice;
use crate::trees::{root_tree, RootedTree, Tree};


#[derive(Clone)]
pub struct AmplitudeProblem {
    rooted: RootedTree,
    n: Vec<usize>,
    kernels: Vec<Arc<dyn MomentumKernel>>,
    covariance: Arc<Covariance>,
    momenta: Vec<usize>,
    spins: Vec<usize>,
    legs: Vec<LegIndex>,
    /// `slot_start[l-1]` is the position in `𝓘` of leg `(l, 1)`.
    slot_start: Vec<usize>,
}

impl std::fmt::Debug for AmplitudeProblem {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("AmplitudeProblem")
            .field("tree", self.rooted.tree())
            .field("root", &self.rooted.root())
            .field("n", &self.n)
            .field("momenta", &self.momenta)
            .field("spins", &self.spins)
            .finish()
    }
}

impl AmplitudeProblem {
    pub fn new(
        rooted: RootedTree,
        n: Vec<usize>,
        kernels: Vec<Arc<dyn MomentumKernel>>,
        covariance: Arc<Covariance>,
        momenta: Vec<usize>,
        spins: Vec<usize>,
    ) -> Result<Self> {
        let m = rooted.m();
        if n.len() != m || kernels.len() != m {
            return Err(Error::Problem(format!(
                "{} vertices but {} leg counts and {} kernels",
                m,
                n.len(),
                kernels.len()
            )));
        }
        let legs = leg_universe(&rooted, &n)?;
        let mut slot_start = Vec::with_capacity(m);
        for l in 1..=m {
            if kernels[l - 1].arity() != n[l - 1] {
                return Err(Error::ArityMismatch { expected: n[l - 1], found: kernels[l - 1].arity() });
            }
            slot_start.push(legs.partition_point(|leg| leg.vertex < l));
        }
        let p = AmplitudeProblem { rooted, n, kernels, covariance, momenta: Vec::new(), spins: Vec::new(), legs, slot_start };
        p.with_external(momenta, spins)
    }

    /// Same tree, kernels and covariance with new external data.
    pub fn with_external(&self, momenta: Vec<usize>, spins: Vec<usize>) -> Result<Self> {
        let len = self.legs.len();
        if momenta.len() != len || spins.len() != len {
            return Err(Error::Problem(format!(
                "{} external legs but {} momenta and {} spins",
                len,
                momenta.len(),
                spins.len()
            )));
        }
        let lsize = self.lattice().len();
        if let Some(&p) = momenta.iter().find(|&&p| p >= lsize) {
            return Err(Error::Problem(format!("momentum index {p} outside lattice of size {lsize}")));
        }
        if let Some(&s) = spins.iter().find(|&&s| s >= self.nspin()) {
            return Err(Error::Problem(format!("spin {s} outside spin set of size {}", self.nspin())));
        }
        let mut out = self.clone();
        out.momenta = momenta;
        out.spins = spins;
        Ok(out)
    }

    /// Same data rooted at `r`.
    pub fn with_root(&self, r: usize) -> Result<Self> {
        let mut out = self.clone();
        out.rooted = root_tree(self.rooted.tree(), r)?;
        Ok(out)
    }

    pub fn rooted(&self) -> &RootedTree {
        &self.rooted
    }

    pub fn tree(&self) -> &Tree {
        self.rooted.tree()
    }

    pub fn m(&self) -> usize {
        self.rooted.m()
    }

    pub fn n_legs(&self) -> &[usize] {
        &self.n
    }

    pub fn kernel(&self, l: usize) -> &dyn MomentumKernel {
        self.kernels[l - 1].as_ref()
    }

    pub fn kernels(&self) -> &[Arc<dyn MomentumKernel>] {
        &self.kernels
    }

    pub fn covariance(&self) -> &Covariance {
        &self.covariance
    }

    pub fn covariance_arc(&self) -> &Arc<Covariance> {
        &self.covariance
    }

    pub fn lattice(&self) -> &Lattice {
        self.covariance.lattice()
    }

    pub fn nspin(&self) -> usize {
        self.covariance.nspin()
    }

    /// `n(𝐧, m) = |𝓘|`.
    pub fn n_external(&self) -> usize {
        self.legs.len()
    }

    pub fn legs(&self) -> &[LegIndex] {
        &self.legs
    }

    pub fn momenta(&self) -> &[usize] {
        &self.momenta
    }

    pub fn spins(&self) -> &[usize] {
        &self.spins
    }

    /// Positions in `𝓘` of vertex `l`'s legs.
    pub fn legs_of(&self, l: usize) -> std::ops::Range<usize> {
        let start = self.slot_start[l - 1];
        let end = if l == self.m() { self.legs.len() } else { self.slot_start[l] };
        start..end
    }

    /// Position in `𝓘` of a leg index.
    pub fn position(&self, leg: LegIndex) -> Option<usize> {
        self.legs.binary_search(&leg).ok()
    }

    /// Total momentum of the legs in a bitmask over `𝓘`.
    #[inline]
    pub fn mask_momentum(&self, mask: u64) -> usize {
        let lat = self.lattice();
        let mut acc = 0;
        let mut rest = mask;
        while rest != 0 {
            acc = lat.add(acc, self.momenta[rest.trailing_zeros() as usize]);
            rest &= rest - 1;
        }
        acc
    }

    /// `true` if the external momenta sum to zero.
    pub fn conserves_momentum(&self) -> bool {
        self.lattice().sum(self.momenta.iter().copied()) == 0
    }
}

/// The leg universe `𝓘` in lexicographic order.
pub fn leg_universe(rooted: &RootedTree, n: &[usize]) -> Result<Vec<LegIndex>> {
    let degrees = rooted.degrees();
    if n.len() != degrees.len() {
        return Err(Error::Problem(format!("{} leg counts for {} vertices", n.len(), degrees.len())));
    }
    let mut legs = Vec::new();
    for (l, (&nl, &d)) in n.iter().zip(&degrees).enumerate() {
        if nl < d {
            return Err(Error::Problem(format!("vertex {} has {nl} legs but degree {d}", l + 1)));
        }
        legs.extend((1..=nl - d).map(|k| LegIndex::new(l + 1, k)));
    }
    if legs.len() > MAX_UNIVERSE {
        return Err(Error::UniverseTooLarge(legs.len()));
    }
    Ok(legs)
}

/// Line spins `(σ_ℓ, σ′_ℓ)` indexed by the child vertex of the rooted tree,
/// and leg spins `σ′_ι` indexed by position in `𝓘`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SpinAssignment {
    /// Entry `l − 1` belongs to the line `{l, Π(l)}`; the root entry is unused.
    pub line: Vec<(usize, usize)>,
    pub leg: Vec<usize>,
}

impl SpinAssignment {
    pub fn uniform(problem: &AmplitudeProblem, s: usize) -> Self {
        SpinAssignment { line: vec![(s, s); problem.m()], leg: vec![s; problem.n_external()] }
    }

    pub fn random<R: Rng>(problem: &AmplitudeProblem, rng: &mut R) -> Self {
        let ns = problem.nspin();
        SpinAssignment {
            line: (0..problem.m()).map(|_| (rng.gen_range(0..ns), rng.gen_range(0..ns))).collect(),
            leg: (0..problem.n_external()).map(|_| rng.gen_range(0..ns)).collect(),
        }
    }

    /// Leg spins copied from a permutation of the external spins, so that every
    /// fundamental form is nonzero.
    pub fn matched<R: Rng>(problem: &AmplitudeProblem, rng: &mut R) -> Self {
        use rand::seq::SliceRandom;
        let mut s = Self::random(problem, rng);
        let mut leg = problem.spins().to_vec();
        leg.shuffle(rng);
        s.leg = leg;
        s
    }

    pub fn check(&self, problem: &AmplitudeProblem) -> Result<()> {
        let ns = problem.nspin();
        if self.line.len() != problem.m() || self.leg.len() != problem.n_external() {
            return Err(Error::Problem("spin assignment has the wrong shape".into()));
        }
        let bad = self.line.iter().any(|&(a, b)| a >= ns || b >= ns) || self.leg.iter().any(|&s| s >= ns);
        if bad {
            return Err(Error::Problem("spin outside the spin set".into()));
        }
        Ok(())
    }
}
