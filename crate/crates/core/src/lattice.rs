//! Discrete torus `T` and its dual lattice `T*`.
//!
//! Sites and momenta share one flattened index space (row-major, last axis
//! fastest). Momenta are integer vectors mod `L_c`, so conservation checks are
//! exact; physical values `2π k / (ε L)` are produced only on request.

use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use crate::error::{Error, Result};
use num_complex::Complex64;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Lattice {
    pub dims: Vec<usize>,
    /// Lattice spacing per axis; defaults to 1.
    #[serde(default)]
    pub spacing: Vec<f64>,
}

impl Lattice {
    pub fn new(dims: Vec<usize>) -> Self {
        let spacing = vec![1.0; dims.len()];
        Lattice { dims, spacing }
    }

    pub fn with_spacing(dims: Vec<usize>, spacing: Vec<f64>) -> Result<Self> {
        if dims.len() != spacing.len() {
            return Err(Error::LatticeMismatch(format!(
                "{} axes but {} spacings",
                dims.len(),
                spacing.len()
            )));
        }
        if dims.iter().any(|&d| d == 0) || spacing.iter().any(|&e| !(e > 0.0)) {
            return Err(Error::LatticeMismatch("empty axis or nonpositive spacing".into()));
        }
        Ok(Lattice { dims, spacing })
    }

    pub fn one_dim(len: usize) -> Self {
        Self::new(vec![len])
    }

    pub fn ndim(&self) -> usize {
        self.dims.len()
    }

    fn spacing_at(&self, axis: usize) -> f64 {
        self.spacing.get(axis).copied().unwrap_or(1.0)
    }

    /// Number of sites, which equals the number of momenta.
    pub fn len(&self) -> usize {
        self.dims.iter().product()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Physical volume `|T| = ∏ ε_c L_c`.
    pub fn volume(&self) -> f64 {
        (0..self.ndim()).map(|c| self.spacing_at(c) * self.dims[c] as f64).product()
    }

    /// Weight of a single site in `Σ_x`, i.e. `∏ ε_c`.
    pub fn cell(&self) -> f64 {
        (0..self.ndim()).map(|c| self.spacing_at(c)).product()
    }

    /// Weight of a single momentum in `∫_{T*} dp = |T|⁻¹ Σ_p`.
    pub fn momentum_weight(&self) -> f64 {
        1.0 / self.volume()
    }

    /// Momentum step `2π / (ε_c L_c)` along an axis.
    pub fn momentum_step(&self, axis: usize) -> f64 {
        2.0 * PI / (self.spacing_at(axis) * self.dims[axis] as f64)
    }

    pub fn coords(&self, mut index: usize) -> Vec<usize> {
        let mut out = vec![0; self.ndim()];
        for c in (0..self.ndim()).rev() {
            out[c] = index % self.dims[c];
            index /= self.dims[c];
        }
        out
    }

    pub fn index(&self, coords: &[usize]) -> usize {
        coords
            .iter()
            .zip(&self.dims)
            .fold(0, |acc, (&k, &l)| acc * l + k % l)
    }

    /// Index of an integer vector, reduced mod `L_c` per axis.
    pub fn index_of_signed(&self, coords: &[i64]) -> usize {
        coords.iter().zip(&self.dims).fold(0, |acc, (&k, &l)| {
            acc * l + k.rem_euclid(l as i64) as usize
        })
    }

    pub fn add(&self, a: usize, b: usize) -> usize {
        if self.ndim() == 1 {
            return (a + b) % self.dims[0];
        }
        let (ca, cb) = (self.coords(a), self.coords(b));
        let sum: Vec<usize> = ca
            .iter()
            .zip(&cb)
            .zip(&self.dims)
            .map(|((x, y), l)| (x + y) % l)
            .collect();
        self.index(&sum)
    }

    pub fn neg(&self, a: usize) -> usize {
        if self.ndim() == 1 {
            return (self.dims[0] - a) % self.dims[0];
        }
        let ca = self.coords(a);
        let n: Vec<usize> = ca.iter().zip(&self.dims).map(|(x, l)| (l - x) % l).collect();
        self.index(&n)
    }

    pub fn sub(&self, a: usize, b: usize) -> usize {
        self.add(a, self.neg(b))
    }

    pub fn sum<I: IntoIterator<Item = usize>>(&self, items: I) -> usize {
        items.into_iter().fold(0, |acc, p| self.add(acc, p))
    }

    /// Centered integer representative `k ∈ [-L/2, L/2)` per axis.
    pub fn centered(&self, index: usize) -> Vec<i64> {
        self.coords(index)
            .into_iter()
            .zip(&self.dims)
            .map(|(k, &l)| {
                let (k, l) = (k as i64, l as i64);
                if k >= (l + 1) / 2 {
                    k - l
                } else {
                    k
                }
            })
            .collect()
    }

    /// Physical momentum vector of a dual-lattice index.
    pub fn momentum_value(&self, index: usize) -> Vec<f64> {
        self.centered(index)
            .into_iter()
            .enumerate()
            .map(|(c, k)| k as f64 * self.momentum_step(c))
            .collect()
    }

    /// `e^{i p·x}` for momentum index `p` and site index `x`, computed from
    /// the exact integer product `k·n mod L`.
    pub fn phase(&self, p: usize, x: usize) -> Complex64 {
        let (cp, cx) = (self.coords(p), self.coords(x));
        let mut turns = 0.0;
        for c in 0..self.ndim() {
            let l = self.dims[c];
            turns += ((cp[c] * cx[c]) % l) as f64 / l as f64;
        }
        Complex64::from_polar(1.0, 2.0 * PI * turns)
    }
}

/// Separable unnormalized DFT over the site block of `data`.
///
/// `data` is laid out as `[outer][site][inner]` with sites in this lattice's
/// row-major order. Each entry becomes `Σ_x f(x) e^{sign·i p·x}`.
impl Lattice {
    pub fn dft_in_place(&self, data: &mut [Complex64], outer: usize, inner: usize, sign: f64) {
        let nsites = self.len();
        debug_assert_eq!(data.len(), outer * nsites * inner);
        let mut buf = Vec::new();
        for c in 0..self.ndim() {
            let l = self.dims[c];
            if l == 1 {
                continue;
            }
            let stride: usize = self.dims[c + 1..].iter().product::<usize>() * inner;
            let block = l * stride;
            let twiddle: Vec<Complex64> = (0..l)
                .map(|k| Complex64::from_polar(1.0, sign * 2.0 * PI * k as f64 / l as f64))
                .collect();
            buf.resize(l, Complex64::new(0.0, 0.0));
            let nblocks = data.len() / block;
            for b in 0..nblocks {
                let base = b * block;
                for s in 0..stride {
                    for (k, out) in buf.iter_mut().enumerate() {
                        let mut acc = Complex64::new(0.0, 0.0);
                        for n in 0..l {
                            acc += data[base + n * stride + s] * twiddle[(k * n) % l];
                        }
                        *out = acc;
                    }
                    for (k, v) in buf.iter().enumerate() {
                        data[base + k * stride + s] = *v;
                    }
                }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn arithmetic_is_modular() {
        let lat = Lattice::new(vec![4, 3]);
        let a = lat.index(&[3, 2]);
        let b = lat.index(&[2, 2]);
        assert_eq!(lat.coords(lat.add(a, b)), vec![1, 1]);
        assert_eq!(lat.add(a, lat.neg(a)), 0);
        assert_eq!(lat.index_of_signed(&[-1, -1]), lat.index(&[3, 2]));
    }

    #[test]
    fn measures() {
        let lat = Lattice::with_spacing(vec![8], vec![0.5]).unwrap();
        assert!((lat.volume() - 4.0).abs() < 1e-15);
        assert!((lat.momentum_weight() * 8.0 - 2.0).abs() < 1e-15);
        assert_eq!(lat.centered(5), vec![-3]);
        assert!((lat.phase(2, 2) - Complex64::new(-1.0, 0.0)).norm() < 1e-14);
    }

    #[test]
    fn separable_dft_matches_direct_sum() {
        let lat = Lattice::new(vec![3, 4]);
        let f: Vec<Complex64> = (0..12).map(|k| Complex64::new(k as f64, (k * k) as f64 * 0.1)).collect();
        let mut g = f.clone();
        lat.dft_in_place(&mut g, 1, 1, 1.0);
        for p in 0..12 {
            let direct: Complex64 = (0..12).map(|x| f[x] * lat.phase(p, x)).sum();
            assert!((direct - g[p]).norm() < 1e-10);
        }
    }
}
