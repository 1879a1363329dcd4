use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lattice::Lattice;

/// Largest arity accepted by the permutation sum in [`antisymmetrize`].
pub const ANTISYMMETRIZE_LIMIT: usize = 8;
/// Largest dense table, in entries.
pub const DENSE_LIMIT: usize = 1 << 24;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Domain {
    Position,
    Momentum,
}

/// Momentum-space kernel evaluated on `(momentum index, spin)` arguments.
pub trait MomentumKernel: Send + Sync {
    fn arity(&self) -> usize;
    fn eval(&self, args: &[(usize, usize)]) -> Complex64;
    /// `‖ŵ‖_∞` over argument tuples with vanishing total momentum.
    fn sup_norm(&self) -> f64;
}

/// `ŵ ≡ value`, not antisymmetric; used for structural checks.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConstantKernel {
    pub arity: usize,
    pub value: Complex64,
}

impl MomentumKernel for ConstantKernel {
    fn arity(&self) -> usize {
        self.arity
    }
    fn eval(&self, _args: &[(usize, usize)]) -> Complex64 {
        self.value
    }
    fn sup_norm(&self) -> f64 {
        self.value.norm()
    }
}

/// Dense kernel over `n` arguments `ξ_i = (x_i, σ_i)` or `λ_i = (p_i, σ_i)`.
///
/// Argument `i` contributes the generator index `g_i = site·|Σ| + σ`; the flat
/// index is `Σ_i g_i |𝕃|^{n-1-i}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DenseKernel {
    pub lattice: Lattice,
    pub nspin: usize,
    pub arity: usize,
    pub domain: Domain,
    pub values: Vec<Complex64>,
}

/// JSON form of a kernel: rows `[x_1, σ_1, …, x_n, σ_n, re, im]` with flat
/// site (or momentum) indices; absent rows are zero.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KernelFile {
    pub torus_dims: Vec<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub spacing: Option<Vec<f64>>,
    pub spins: Vec<String>,
    pub arity: usize,
    pub domain: Domain,
    pub entries: Vec<Vec<f64>>,
}

impl DenseKernel {
    pub fn zeros(lattice: Lattice, nspin: usize, arity: usize, domain: Domain) -> Result<Self> {
        let n = lattice.len() * nspin;
        let len = checked_len(n, arity)?;
        Ok(DenseKernel { lattice, nspin, arity, domain, values: vec![Complex64::new(0.0, 0.0); len] })
    }

    pub fn from_fn<F: FnMut(&[(usize, usize)]) -> Complex64>(
        lattice: Lattice,
        nspin: usize,
        arity: usize,
        domain: Domain,
        mut f: F,
    ) -> Result<Self> {
        let mut k = Self::zeros(lattice, nspin, arity, domain)?;
        let mut args = vec![(0, 0); arity];
        for flat in 0..k.values.len() {
            k.decode(flat, &mut args);
            k.values[flat] = f(&args);
        }
        Ok(k)
    }

    /// `|𝕃|`
    pub fn width(&self) -> usize {
        self.lattice.len() * self.nspin
    }

    #[inline]
    pub fn flat(&self, args: &[(usize, usize)]) -> usize {
        let ns = self.nspin;
        let w = self.width();
        args.iter().fold(0, |acc, &(x, s)| acc * w + x * ns + s)
    }

    pub fn decode(&self, mut flat: usize, args: &mut [(usize, usize)]) {
        let w = self.width();
        for a in args.iter_mut().rev() {
            let g = flat % w;
            flat /= w;
            *a = (g / self.nspin, g % self.nspin);
        }
    }

    pub fn get(&self, args: &[(usize, usize)]) -> Complex64 {
        self.values[self.flat(args)]
    }

    /// `max |f(π·ξ) − sgn π · f(ξ)|` over transpositions of neighbours.
    pub fn antisymmetry_defect(&self) -> f64 {
        let mut args = vec![(0, 0); self.arity];
        let mut dev = 0.0f64;
        for flat in 0..self.values.len() {
            self.decode(flat, &mut args);
            for i in 0..self.arity.saturating_sub(1) {
                args.swap(i, i + 1);
                dev = dev.max((self.get(&args) + self.values[flat]).norm());
                args.swap(i, i + 1);
            }
        }
        dev
    }

    /// Sum of momenta of a decoded argument tuple.
    fn total_momentum(&self, args: &[(usize, usize)]) -> usize {
        self.lattice.sum(args.iter().map(|a| a.0))
    }

    /// Copy with all entries off the `Σ p = 0` shell set to zero.
    pub fn on_shell(&self) -> Result<Self> {
        if self.domain != Domain::Momentum {
            return Err(Error::LatticeMismatch("on-shell projection needs a momentum kernel".into()));
        }
        let mut out = self.clone();
        let mut args = vec![(0, 0); self.arity];
        for flat in 0..out.values.len() {
            self.decode(flat, &mut args);
            if self.total_momentum(&args) != 0 {
                out.values[flat] = Complex64::new(0.0, 0.0);
            }
        }
        Ok(out)
    }

    /// Translation-reduced position norm `max_σ Σ_{x_2..x_n} |K((0,σ_1),(x_2,σ_2),…)|`
    /// where `K(ξ) = Σ_y w(ξ − y)` is the coefficient of `ψ(ξ_1)…ψ(ξ_n)` in
    /// `W_n`. Accepts either domain.
    pub fn position_l1_norm(&self) -> Result<f64> {
        let shell = match self.domain {
            Domain::Momentum => self.on_shell()?,
            Domain::Position => fourier_kernel(self)?.on_shell()?,
        };
        let pos = inverse_fourier_kernel(&shell)?;
        // the inverse of the shell-projected kernel is K / |𝕋|
        let scale = self.lattice.volume() * self.lattice.cell().powi(self.arity as i32 - 1);
        let ns = self.nspin;
        let mut per_spin = vec![0.0f64; ns.pow(self.arity as u32)];
        let mut args = vec![(0, 0); self.arity];
        for (flat, v) in pos.values.iter().enumerate() {
            pos.decode(flat, &mut args);
            if args.first().map_or(false, |a| a.0 != 0) {
                continue;
            }
            let key = args.iter().fold(0, |acc, a| acc * ns + a.1);
            per_spin[key] += v.norm() * scale;
        }
        Ok(per_spin.into_iter().fold(0.0, f64::max))
    }

    pub fn to_file(&self, spins: &[String]) -> Result<KernelFile> {
        if spins.len() != self.nspin {
            return Err(Error::Format(format!("{} spin labels for {} spins", spins.len(), self.nspin)));
        }
        let mut entries = Vec::new();
        let mut args = vec![(0, 0); self.arity];
        for (flat, v) in self.values.iter().enumerate() {
            if v.norm() == 0.0 {
                continue;
            }
            self.decode(flat, &mut args);
            let mut row: Vec<f64> = args.iter().flat_map(|&(x, s)| [x as f64, s as f64]).collect();
            row.push(v.re);
            row.push(v.im);
            entries.push(row);
        }
        Ok(KernelFile {
            torus_dims: self.lattice.dims.clone(),
            spacing: Some(self.lattice.spacing.clone()),
            spins: spins.to_vec(),
            arity: self.arity,
            domain: self.domain,
            entries,
        })
    }

    pub fn from_file(file: &KernelFile) -> Result<Self> {
        let lattice = match &file.spacing {
            Some(sp) => Lattice::with_spacing(file.torus_dims.clone(), sp.clone())?,
            None => Lattice::new(file.torus_dims.clone()),
        };
        let nspin = file.spins.len();
        let mut k = DenseKernel::zeros(lattice, nspin, file.arity, file.domain)?;
        let n = file.arity;
        for row in &file.entries {
            if row.len() != 2 * n + 2 {
                return Err(Error::Format(format!("kernel row has {} fields, expected {}", row.len(), 2 * n + 2)));
            }
            let mut args = Vec::with_capacity(n);
            for i in 0..n {
                let (x, s) = (row[2 * i], row[2 * i + 1]);
                if x.fract() != 0.0 || s.fract() != 0.0 || x < 0.0 || s < 0.0 {
                    return Err(Error::Format(format!("bad index in row {row:?}")));
                }
                let (x, s) = (x as usize, s as usize);
                if x >= k.lattice.len() || s >= nspin {
                    return Err(Error::Format(format!("index out of range in row {row:?}")));
                }
                args.push((x, s));
            }
            let flat = k.flat(&args);
            k.values[flat] = Complex64::new(row[2 * n], row[2 * n + 1]);
        }
        Ok(k)
    }
}

impl MomentumKernel for DenseKernel {
    fn arity(&self) -> usize {
        self.arity
    }

    #[inline]
    fn eval(&self, args: &[(usize, usize)]) -> Complex64 {
        self.values[self.flat(args)]
    }

    fn sup_norm(&self) -> f64 {
        let mut args = vec![(0, 0); self.arity];
        let mut best = 0.0f64;
        for (flat, v) in self.values.iter().enumerate() {
            let a = v.norm();
            if a <= best {
                continue;
            }
            self.decode(flat, &mut args);
            if self.domain == Domain::Position || self.total_momentum(&args) == 0 {
                best = a;
            }
        }
        best
    }
}

fn checked_len(width: usize, arity: usize) -> Result<usize> {
    let mut len = 1usize;
    for _ in 0..arity {
        len = len.checked_mul(width).filter(|&l| l <= DENSE_LIMIT).ok_or(Error::TooLarge {
            what: "dense kernel table",
            dim: width.saturating_pow(arity as u32),
            limit: DENSE_LIMIT,
        })?;
    }
    Ok(len)
}

/// All permutations of `0..n` with their signs (Heap's algorithm).
pub(crate) fn permutations_with_sign(n: usize) -> Vec<(Vec<usize>, f64)> {
    let mut out = Vec::new();
    let mut a: Vec<usize> = (0..n).collect();
    let mut c = vec![0usize; n];
    let mut sign = 1.0;
    out.push((a.clone(), sign));
    let mut i = 0;
    while i < n {
        if c[i] < i {
            if i % 2 == 0 {
                a.swap(0, i);
            } else {
                a.swap(c[i], i);
            }
            sign = -sign;
            out.push((a.clone(), sign));
            c[i] += 1;
            i = 0;
        } else {
            c[i] = 0;
            i += 1;
        }
    }
    out
}

/// `(1/n!) Σ_π sgn π · f(ξ_{π(1)}, …, ξ_{π(n)})`.
pub fn antisymmetrize(f: &DenseKernel) -> Result<DenseKernel> {
    let n = f.arity;
    if n > ANTISYMMETRIZE_LIMIT {
        return Err(Error::TooLarge { what: "antisymmetrization arity", dim: n, limit: ANTISYMMETRIZE_LIMIT });
    }
    let perms = permutations_with_sign(n);
    let norm = 1.0 / perms.len() as f64;
    let w = f.width();
    let mut out = f.clone();
    let mut digits = vec![0usize; n];
    for flat in 0..f.values.len() {
        let mut rem = flat;
        for d in digits.iter_mut().rev() {
            *d = rem % w;
            rem /= w;
        }
        let mut acc = Complex64::new(0.0, 0.0);
        for (perm, sign) in &perms {
            let idx = perm.iter().fold(0, |a, &k| a * w + digits[k]);
            acc += f.values[idx] * *sign;
        }
        out.values[flat] = acc * norm;
    }
    Ok(out)
}

/// `ŵ(λ_1..λ_n) = Σ_{x} w(ξ_1..ξ_n) e^{i Σ p_k x_k}` (site sums weighted by the cell).
pub fn fourier_kernel(w: &DenseKernel) -> Result<DenseKernel> {
    if w.domain != Domain::Position {
        return Err(Error::LatticeMismatch("forward transform needs a position kernel".into()));
    }
    Ok(transform(w, 1.0, w.lattice.cell(), Domain::Momentum))
}

/// `w(ξ_1..ξ_n) = |𝕋|^{-n} Σ_p ŵ(λ_1..λ_n) e^{-i Σ p_k x_k}`.
pub fn inverse_fourier_kernel(w: &DenseKernel) -> Result<DenseKernel> {
    if w.domain != Domain::Momentum {
        return Err(Error::LatticeMismatch("inverse transform needs a momentum kernel".into()));
    }
    Ok(transform(w, -1.0, w.lattice.momentum_weight(), Domain::Position))
}

fn transform(w: &DenseKernel, sign: f64, weight: f64, domain: Domain) -> DenseKernel {
    let n = w.arity;
    let width = w.width();
    let mut out = w.clone();
    out.domain = domain;
    for a in 0..n {
        let outer = width.pow(a as u32);
        let inner = w.nspin * width.pow((n - 1 - a) as u32);
        w.lattice.dft_in_place(&mut out.values, outer, inner, sign);
    }
    let scale = weight.powi(n as i32);
    out.values.iter_mut().for_each(|v| *v *= scale);
    out
}

/// Antisymmetrized quartic kernel of
/// `W = -½ Σ_{σσ′} Σ_{x,x′} v(x−x′) ψ(x,σ,1)ψ(x′,σ′,1)ψ(x,σ,0)ψ(x′,σ′,0)`
/// written as `Σ_y Σ_ξ w(ξ) ψ(y+ξ_1)…ψ(y+ξ_4)`. The spin index is
/// `2·σ + κ` with `σ ∈ {↑,↓}` and `κ ∈ {0,1}`, so `|Σ| = 4`.
pub fn build_interaction(v: &[f64], lattice: &Lattice) -> Result<DenseKernel> {
    if v.len() != lattice.len() {
        return Err(Error::LatticeMismatch(format!("potential has {} values for {} sites", v.len(), lattice.len())));
    }
    for x in 0..lattice.len() {
        if (v[x] - v[lattice.neg(x)]).abs() > 1e-14 * (1.0 + v[x].abs()) {
            return Err(Error::OddPotential { site: x });
        }
    }
    let mut raw = DenseKernel::zeros(lattice.clone(), 4, 4, Domain::Position)?;
    let cell = lattice.cell();
    for s in 0..2 {
        for t in 0..2 {
            for d in 0..lattice.len() {
                let args = [(0, 2 * s + 1), (d, 2 * t + 1), (0, 2 * s), (d, 2 * t)];
                let flat = raw.flat(&args);
                // v(x - x') with x = y, x' = y + d; weights turn Σ_{x'} into ∫dx'
                raw.values[flat] += Complex64::new(-0.5 * v[lattice.neg(d)] / cell.powi(3), 0.0);
            }
        }
    }
    antisymmetrize(&raw)
}
