use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::GeneratorSet;
use crate::error::{Error, Result};
use crate::lattice::Lattice;

/// Translation-invariant covariance given by its momentum table
/// `Ĉ_{σσ′}(p) = Σ_x C_{σσ′}(x) e^{ipx}` with `C_{σσ′}(x) = C((0,σ),(x,σ′))`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Covariance {
    lattice: Lattice,
    nspin: usize,
    /// Indexed `[(σ·|Σ| + σ′)·|𝕋| + p]`.
    table: Vec<Complex64>,
}

/// JSON form: `{"torus_dims": [..], "spacing": [..], "spins": [..],
/// "table": [[σ, σ′, p_1, …, p_D, re, im], …]}`. Rows absent from `table`
/// are zero; momentum components are integers mod `L_c`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CovarianceFile {
    pub torus_dims: Vec<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub spacing: Option<Vec<f64>>,
    pub spins: Vec<String>,
    pub table: Vec<Vec<f64>>,
}

impl Covariance {
    pub fn new(lattice: Lattice, nspin: usize, table: Vec<Complex64>) -> Result<Self> {
        if table.len() != nspin * nspin * lattice.len() {
            return Err(Error::LatticeMismatch(format!(
                "covariance table has {} entries, expected {}",
                table.len(),
                nspin * nspin * lattice.len()
            )));
        }
        Ok(Covariance { lattice, nspin, table })
    }

    pub fn zero(lattice: Lattice, nspin: usize) -> Self {
        let len = nspin * nspin * lattice.len();
        Covariance { lattice, nspin, table: vec![Complex64::new(0.0, 0.0); len] }
    }

    pub fn from_fn<F: FnMut(usize, usize, usize) -> Complex64>(lattice: Lattice, nspin: usize, mut f: F) -> Self {
        let l = lattice.len();
        let mut table = Vec::with_capacity(nspin * nspin * l);
        for s in 0..nspin {
            for t in 0..nspin {
                for p in 0..l {
                    table.push(f(s, t, p));
                }
            }
        }
        Covariance { lattice, nspin, table }
    }

    /// Build from the position kernel `C_{σσ′}(x)` laid out like the table.
    pub fn from_position(lattice: Lattice, nspin: usize, mut position: Vec<Complex64>) -> Result<Self> {
        if position.len() != nspin * nspin * lattice.len() {
            return Err(Error::LatticeMismatch("position table has the wrong length".into()));
        }
        lattice.dft_in_place(&mut position, nspin * nspin, 1, 1.0);
        let cell = lattice.cell();
        position.iter_mut().for_each(|v| *v *= cell);
        Covariance::new(lattice, nspin, position)
    }

    pub fn lattice(&self) -> &Lattice {
        &self.lattice
    }

    pub fn nspin(&self) -> usize {
        self.nspin
    }

    pub fn table(&self) -> &[Complex64] {
        &self.table
    }

    #[inline]
    pub fn hat(&self, s: usize, t: usize, p: usize) -> Complex64 {
        self.table[(s * self.nspin + t) * self.lattice.len() + p]
    }

    /// `C_{σσ′}(x) = |𝕋|⁻¹ Σ_p Ĉ_{σσ′}(p) e^{-ipx}` for all `(σ,σ′,x)`.
    pub fn position(&self) -> Vec<Complex64> {
        let mut out = self.table.clone();
        self.lattice.dft_in_place(&mut out, self.nspin * self.nspin, 1, -1.0);
        let w = self.lattice.momentum_weight();
        out.iter_mut().for_each(|v| *v *= w);
        out
    }

    /// `C(ξ, ξ′) = C_{σσ′}(x′ − x)` from a precomputed position table.
    pub fn entry(&self, position: &[Complex64], gens: &GeneratorSet, a: usize, b: usize) -> Complex64 {
        let (x, s) = gens.split(a);
        let (y, t) = gens.split(b);
        let d = self.lattice.sub(y, x);
        position[(s * self.nspin + t) * self.lattice.len() + d]
    }

    /// `max |Ĉ_{σσ′}(p) + Ĉ_{σ′σ}(−p)|`.
    pub fn antisymmetry_defect(&self) -> f64 {
        let mut dev = 0.0f64;
        for s in 0..self.nspin {
            for t in 0..self.nspin {
                for p in 0..self.lattice.len() {
                    let q = self.lattice.neg(p);
                    dev = dev.max((self.hat(s, t, p) + self.hat(t, s, q)).norm());
                }
            }
        }
        dev
    }

    pub fn scale(&self, factor: Complex64) -> Self {
        Covariance {
            lattice: self.lattice.clone(),
            nspin: self.nspin,
            table: self.table.iter().map(|v| v * factor).collect(),
        }
    }

    pub fn to_file(&self, spins: &[String]) -> Result<CovarianceFile> {
        if spins.len() != self.nspin {
            return Err(Error::Format(format!("{} spin labels for {} spins", spins.len(), self.nspin)));
        }
        let mut table = Vec::new();
        for s in 0..self.nspin {
            for t in 0..self.nspin {
                for p in 0..self.lattice.len() {
                    let v = self.hat(s, t, p);
                    if v.norm() == 0.0 {
                        continue;
                    }
                    let mut row = vec![s as f64, t as f64];
                    row.extend(self.lattice.coords(p).into_iter().map(|k| k as f64));
                    row.push(v.re);
                    row.push(v.im);
                    table.push(row);
                }
            }
        }
        Ok(CovarianceFile {
            torus_dims: self.lattice.dims.clone(),
            spacing: Some(self.lattice.spacing.clone()),
            spins: spins.to_vec(),
            table,
        })
    }

    pub fn from_file(file: &CovarianceFile) -> Result<Self> {
        let lattice = match &file.spacing {
            Some(sp) => Lattice::with_spacing(file.torus_dims.clone(), sp.clone())?,
            None => Lattice::new(file.torus_dims.clone()),
        };
        let nspin = file.spins.len();
        let d = lattice.ndim();
        let mut cov = Covariance::zero(lattice, nspin);
        for row in &file.table {
            if row.len() != d + 4 {
                return Err(Error::Format(format!("covariance row has {} fields, expected {}", row.len(), d + 4)));
            }
            let int = |v: f64| -> Result<i64> {
                if v.fract() != 0.0 {
                    return Err(Error::Format(format!("non-integer index {v}")));
                }
                Ok(v as i64)
            };
            let (s, t) = (int(row[0])?, int(row[1])?);
            if s < 0 || t < 0 || s as usize >= nspin || t as usize >= nspin {
                return Err(Error::Format(format!("spin index out of range in row {row:?}")));
            }
            let coords: Vec<i64> = row[2..2 + d].iter().map(|&v| int(v)).collect::<Result<_>>()?;
            let p = cov.lattice.index_of_signed(&coords);
            let l = cov.lattice.len();
            cov.table[(s as usize * nspin + t as usize) * l + p] = Complex64::new(row[d + 2], row[d + 3]);
        }
        Ok(cov)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn delta_kernel_has_flat_transform() {
        let lat = Lattice::one_dim(5);
        let mut pos = vec![Complex64::new(0.0, 0.0); 5];
        pos[0] = Complex64::new(1.0, 0.0);
        let cov = Covariance::from_position(lat, 1, pos).unwrap();
        assert!(cov.table().iter().all(|v| (v - Complex64::new(1.0, 0.0)).norm() < 1e-14));
    }

    #[test]
    fn position_roundtrip_and_json() {
        let lat = Lattice::with_spacing(vec![4, 3], vec![0.5, 2.0]).unwrap();
        let cov = Covariance::from_fn(lat.clone(), 2, |s, t, p| {
            Complex64::new((s + 2 * t) as f64 + p as f64 * 0.3, p as f64 - 1.0)
        });
        let back = Covariance::from_position(lat, 2, cov.position()).unwrap();
        for (a, b) in cov.table().iter().zip(back.table()) {
            assert!((a - b).norm() < 1e-12);
        }
        let spins = vec!["up".to_string(), "down".to_string()];
        let file = cov.to_file(&spins).unwrap();
        let json = serde_json::to_string(&file).unwrap();
        let parsed: CovarianceFile = serde_json::from_str(&json).unwrap();
        assert_eq!(Covariance::from_file(&parsed).unwrap(), cov);
    }
}
