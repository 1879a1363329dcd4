use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::{gaussian_integral_matrix, GrassmannPoly, DEFAULT_GENERATOR_CAP};
use crate::error::{Error, Result};

pub const MAX_ORDER: usize = 4;

/// Coefficients `Ω_k` of `Ω_C(gW) = Σ_k Ω_k g^k`, `k = 1..=order`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FreeEnergySeries {
    pub coefficients: Vec<Complex64>,
}

impl FreeEnergySeries {
    /// Coefficient of `g^k` (`k ≥ 1`).
    pub fn order(&self, k: usize) -> Complex64 {
        self.coefficients.get(k.wrapping_sub(1)).copied().unwrap_or_default()
    }
}

/// `log(1 + Σ_k z_k g^k)` truncated at the length of `z` (`z[k-1] = z_k`).
pub fn log_series(z: &[Complex64]) -> Vec<Complex64> {
    let mut l: Vec<Complex64> = Vec::with_capacity(z.len());
    for k in 1..=z.len() {
        let mut acc = z[k - 1] * k as f64;
        for j in 1..k {
            acc -= l[j - 1] * z[k - j - 1] * j as f64;
        }
        l.push(acc / k as f64);
    }
    l
}

/// Exact `log ∫ e^{gW} dμ_G` to order `order` in the formal coupling `g`.
pub fn free_energy_oracle(w: &GrassmannPoly, g: &DMatrix<Complex64>, order: usize) -> Result<FreeEnergySeries> {
    if order > MAX_ORDER {
        return Err(Error::TooLarge { what: "free-energy order", dim: order, limit: MAX_ORDER });
    }
    if w.ngen() > DEFAULT_GENERATOR_CAP {
        return Err(Error::TooLarge { what: "generator set", dim: w.ngen(), limit: DEFAULT_GENERATOR_CAP });
    }
    if w.constant().norm() != 0.0 {
        return Err(Error::ConstantPart);
    }
    let mut z = Vec::with_capacity(order);
    let mut power = GrassmannPoly::scalar(w.ngen(), Complex64::new(1.0, 0.0));
    let mut factorial = 1.0;
    for k in 1..=order {
        power = power.mul(w)?;
        factorial *= k as f64;
        z.push(gaussian_integral_matrix(&power, g)? / factorial);
    }
    Ok(FreeEnergySeries { coefficients: log_series(&z) })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn log_of_exponential_series() {
        // 1 + Z = e^{2g}: z_k = 2^k / k!
        let z: Vec<Complex64> = [2.0, 2.0, 4.0 / 3.0, 2.0 / 3.0].iter().map(|&v| Complex64::new(v, 0.0)).collect();
        let l = log_series(&z);
        assert!((l[0] - Complex64::new(2.0, 0.0)).norm() < 1e-14);
        for v in &l[1..] {
            assert!(v.norm() < 1e-14);
        }
    }

    #[test]
    fn zero_covariance_gives_zero() {
        let n = 6;
        let w = GrassmannPoly::monomial(n, &[0, 1, 2, 3], Complex64::new(1.0, 0.5)).unwrap();
        let g = DMatrix::zeros(n, n);
        let f = free_energy_oracle(&w, &g, 3).unwrap();
        assert!(f.coefficients.iter().all(|v| v.norm() == 0.0));
        let bad = GrassmannPoly::scalar(n, Complex64::new(1.0, 0.0));
        assert_eq!(free_energy_oracle(&bad, &g, 2), Err(Error::ConstantPart));
    }
}
