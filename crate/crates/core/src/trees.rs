//! Labeled trees on `{1, …, m}`: enumeration, rooting, momentum
//! conservation, BKAR interpolation matrices and tree classes.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lattice::Lattice;

pub const MAX_ENUMERATE: usize = 8;

/// Unrooted labeled tree. Edges are stored as `(a, b)` with `a < b`, sorted.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Tree {
    m: usize,
    edges: Vec<(usize, usize)>,
}

impl Tree {
    pub fn new(m: usize, edges: &[(usize, usize)]) -> Result<Self> {
        if m == 0 {
            return Err(Error::InvalidTree("no vertices".into()));
        }
        if edges.len() != m - 1 {
            return Err(Error::InvalidTree(format!("{} edges on {} vertices", edges.len(), m)));
        }
        let mut norm: Vec<(usize, usize)> = Vec::with_capacity(edges.len());
        for &(a, b) in edges {
            if a == b || a == 0 || b == 0 || a > m || b > m {
                return Err(Error::InvalidTree(format!("bad edge {{{a},{b}}}")));
            }
            norm.push((a.min(b), a.max(b)));
        }
        norm.sort_unstable();
        norm.dedup();
        if norm.len() != m - 1 {
            return Err(Error::InvalidTree("repeated edge".into()));
        }
        // connectivity via union-find
        let mut parent: Vec<usize> = (0..=m).collect();
        fn find(p: &mut [usize], x: usize) -> usize {
            let mut r = x;
            while p[r] != r {
                r = p[r];
            }
            let mut y = x;
            while p[y] != r {
                let next = p[y];
                p[y] = r;
                y = next;
            }
            r
        }
        for &(a, b) in &norm {
            let (ra, rb) = (find(&mut parent, a), find(&mut parent, b));
            if ra == rb {
                return Err(Error::InvalidTree("cycle".into()));
            }
            parent[ra] = rb;
        }
        Ok(Tree { m, edges: norm })
    }

    /// The tree with one vertex and no edges.
    pub fn single() -> Self {
        Tree { m: 1, edges: Vec::new() }
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    /// `d^T(l)` for `l = 1..=m`, returned at index `l - 1`.
    pub fn degrees(&self) -> Vec<usize> {
        let mut d = vec![0; self.m];
        for &(a, b) in &self.edges {
            d[a - 1] += 1;
            d[b - 1] += 1;
        }
        d
    }

    /// Neighbours of `l` in increasing order.
    pub fn neighbors(&self, l: usize) -> Vec<usize> {
        let mut out: Vec<usize> = self
            .edges
            .iter()
            .filter_map(|&(a, b)| if a == l { Some(b) } else if b == l { Some(a) } else { None })
            .collect();
        out.sort_unstable();
        out
    }

    pub fn has_edge(&self, a: usize, b: usize) -> bool {
        self.edges.binary_search(&(a.min(b), a.max(b))).is_ok()
    }

    /// Index of edge `{a, b}` in [`Tree::edges`].
    pub fn edge_index(&self, a: usize, b: usize) -> Option<usize> {
        self.edges.binary_search(&(a.min(b), a.max(b))).ok()
    }

    /// Edge indices along the tree path from `a` to `b`.
    pub fn path_edges(&self, a: usize, b: usize) -> Result<Vec<usize>> {
        let rt = root_tree(self, b)?;
        let mut out = Vec::new();
        let mut v = a;
        while let Some(p) = rt.parent(v) {
            out.push(self.edge_index(v, p).expect("parent edge exists"));
            v = p;
        }
        Ok(out)
    }

    /// `Σ_l [d^T(l) − 2] ∨ 0`.
    pub fn branch_excess(&self) -> usize {
        self.degrees().into_iter().map(|d| d.saturating_sub(2)).sum()
    }

    pub fn is_path(&self) -> bool {
        self.degrees().into_iter().all(|d| d <= 2)
    }

    /// `n(𝐧, m) = Σ n_l − 2(m − 1)`, or `None` if negative.
    pub fn external_count(&self, n: &[usize]) -> Option<usize> {
        n.iter().sum::<usize>().checked_sub(2 * (self.m - 1))
    }
}

/// All labeled trees on `m` vertices, each once, by Prüfer decoding.
pub fn enumerate_trees(m: usize) -> Result<Vec<Tree>> {
    if !(2..=MAX_ENUMERATE).contains(&m) {
        return Err(Error::VertexCountOutOfRange(m, 2, MAX_ENUMERATE));
    }
    let len = m - 2;
    let count = m.pow(len as u32);
    let mut out = Vec::with_capacity(count);
    let mut seq = vec![1usize; len];
    for code in 0..count {
        let mut c = code;
        for s in seq.iter_mut().rev() {
            *s = c % m + 1;
            c /= m;
        }
        out.push(prufer_decode(m, &seq));
    }
    Ok(out)
}

/// Trees on `m` vertices including the single-vertex tree for `m = 1`.
pub fn trees_with_single(m: usize) -> Result<Vec<Tree>> {
    if m == 1 {
        Ok(vec![Tree::single()])
    } else {
        enumerate_trees(m)
    }
}

fn prufer_decode(m: usize, seq: &[usize]) -> Tree {
    let mut degree = vec![1usize; m + 1];
    for &s in seq {
        degree[s] += 1;
    }
    let mut edges = Vec::with_capacity(m - 1);
    for &s in seq {
        let leaf = (1..=m).find(|&v| degree[v] == 1).expect("a leaf exists");
        edges.push((leaf.min(s), leaf.max(s)));
        degree[leaf] -= 1;
        degree[s] -= 1;
    }
    let rest: Vec<usize> = (1..=m).filter(|&v| degree[v] == 1).collect();
    edges.push((rest[0], rest[1]));
    edges.sort_unstable();
    Tree { m, edges }
}

/// Caterpillar on `{1..2m+2}`: edges `{l, l+1}` for `l = 1..=m+1` and
/// `{l, l+m+1}` for `l = 2..=m+1`.
pub fn caterpillar(m: usize) -> Result<Tree> {
    if m < 1 {
        return Err(Error::CaterpillarSize);
    }
    let mut edges: Vec<(usize, usize)> = (1..=m + 1).map(|l| (l, l + 1)).collect();
    edges.extend((2..=m + 1).map(|l| (l, l + m + 1)));
    Tree::new(2 * m + 2, &edges)
}

/// A tree with a root: predecessor map `Π`, children lists and subtrees.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RootedTree {
    tree: Tree,
    root: usize,
    parent: Vec<Option<usize>>,
    children: Vec<Vec<usize>>,
    subtree: Vec<Vec<usize>>,
    /// Vertices with every child before its parent; children in increasing label.
    postorder: Vec<usize>,
}

pub fn root_tree(tree: &Tree, root: usize) -> Result<RootedTree> {
    let m = tree.m();
    if root == 0 || root > m {
        return Err(Error::InvalidVertex(root));
    }
    let mut parent = vec![None; m];
    let mut children = vec![Vec::new(); m];
    let mut seen = vec![false; m];
    let mut stack = vec![root];
    seen[root - 1] = true;
    while let Some(v) = stack.pop() {
        for u in tree.neighbors(v) {
            if !seen[u - 1] {
                seen[u - 1] = true;
                parent[u - 1] = Some(v);
                children[v - 1].push(u);
                stack.push(u);
            }
        }
    }
    children.iter_mut().for_each(|c| c.sort_unstable());
    let mut postorder = Vec::with_capacity(m);
    fn visit(v: usize, children: &[Vec<usize>], out: &mut Vec<usize>) {
        for &c in &children[v - 1] {
            visit(c, children, out);
        }
        out.push(v);
    }
    visit(root, &children, &mut postorder);
    let mut subtree = vec![Vec::new(); m];
    for &v in &postorder {
        let mut s = vec![v];
        for &c in &children[v - 1] {
            s.extend(subtree[c - 1].iter().copied());
        }
        s.sort_unstable();
        subtree[v - 1] = s;
    }
    Ok(RootedTree { tree: tree.clone(), root, parent, children, subtree, postorder })
}

impl RootedTree {
    pub fn tree(&self) -> &Tree {
        &self.tree
    }

    pub fn root(&self) -> usize {
        self.root
    }

    pub fn m(&self) -> usize {
        self.tree.m()
    }

    /// `Π(l)`, `None` for the root.
    pub fn parent(&self, l: usize) -> Option<usize> {
        self.parent[l - 1]
    }

    /// `Π⁻¹(l)` in increasing order.
    pub fn children(&self, l: usize) -> &[usize] {
        &self.children[l - 1]
    }

    /// Vertices of the subtree hanging from `l`, i.e. `𝔬({l, Π(l)})` for `l ≠ r`.
    pub fn subtree(&self, l: usize) -> &[usize] {
        &self.subtree[l - 1]
    }

    /// `𝔬(ℓ)` for an edge given by its endpoints.
    pub fn edge_subtree(&self, a: usize, b: usize) -> Result<&[usize]> {
        if self.parent(a) == Some(b) {
            Ok(self.subtree(a))
        } else if self.parent(b) == Some(a) {
            Ok(self.subtree(b))
        } else {
            Err(Error::InvalidTree(format!("{{{a},{b}}} is not an edge")))
        }
    }

    pub fn postorder(&self) -> &[usize] {
        &self.postorder
    }

    pub fn degrees(&self) -> Vec<usize> {
        self.tree.degrees()
    }
}

/// Line momenta `p_ℓ = Σ_{l ∈ 𝔬(ℓ)} Σ_k p^l_k` for `ℓ = {l, Π(l)}`, returned as
/// `(l, Π(l), p_ℓ)` in increasing `l`. `legs[l-1]` holds vertex `l`'s external
/// momenta.
pub fn momentum_assignment(rt: &RootedTree, legs: &[Vec<usize>], lattice: &Lattice) -> Result<Vec<(usize, usize, usize)>> {
    if legs.len() != rt.m() {
        return Err(Error::Problem(format!("{} leg lists for {} vertices", legs.len(), rt.m())));
    }
    let total = lattice.sum(legs.iter().flatten().copied());
    if total != 0 {
        return Err(Error::NoMomentumSolution);
    }
    let vertex_sum: Vec<usize> = legs.iter().map(|v| lattice.sum(v.iter().copied())).collect();
    let mut out = Vec::with_capacity(rt.m().saturating_sub(1));
    for l in 1..=rt.m() {
        if let Some(p) = rt.parent(l) {
            let q = lattice.sum(rt.subtree(l).iter().map(|&v| vertex_sum[v - 1]));
            out.push((l, p, q));
        }
    }
    Ok(out)
}

/// BKAR interpolation data: edge values and `s^T(l,l′) = min_{ℓ on path} s_ℓ`.
#[derive(Debug, Clone, PartialEq)]
pub struct STMatrix {
    pub s_values: Vec<f64>,
    pub matrix: DMatrix<f64>,
}

pub const PSD_TOL: f64 = 1e-10;

/// `s^T` for edge values listed in the order of [`Tree::edges`].
pub fn s_matrix(tree: &Tree, s: &[f64]) -> Result<STMatrix> {
    if s.len() != tree.edges().len() {
        return Err(Error::Problem(format!("{} s-values for {} edges", s.len(), tree.edges().len())));
    }
    if let Some(&bad) = s.iter().find(|&&v| !(0.0..=1.0).contains(&v)) {
        return Err(Error::InterpolationOutOfRange(bad));
    }
    let m = tree.m();
    let mut mat = DMatrix::from_element(m, m, 1.0);
    for a in 1..=m {
        let rt = root_tree(tree, a)?;
        for b in 1..=m {
            if a == b {
                continue;
            }
            let mut v = b;
            let mut min = 1.0f64;
            while let Some(p) = rt.parent(v) {
                min = min.min(s[tree.edge_index(v, p).expect("edge")]);
                v = p;
            }
            mat[(a - 1, b - 1)] = min;
        }
    }
    let min_eig = mat.clone().symmetric_eigenvalues().iter().copied().fold(f64::INFINITY, f64::min);
    if min_eig < -PSD_TOL {
        return Err(Error::NotPsd(min_eig));
    }
    Ok(STMatrix { s_values: s.to_vec(), matrix: mat })
}

/// Symmetric PSD square root `a` with `a·a = s^T`.
pub fn factor_a(s: &STMatrix) -> Result<DMatrix<f64>> {
    let eig = s.matrix.clone().symmetric_eigen();
    let min = eig.eigenvalues.iter().copied().fold(f64::INFINITY, f64::min);
    if min < -PSD_TOL {
        return Err(Error::NotPsd(min));
    }
    let sqrt = eig.eigenvalues.map(|v| v.max(0.0).sqrt());
    let q = &eig.eigenvectors;
    let a = q * DMatrix::from_diagonal(&sqrt) * q.transpose();
    Ok((&a + a.transpose()) * 0.5)
}
