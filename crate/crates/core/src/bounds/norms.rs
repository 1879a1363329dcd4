use serde::{Deserialize, Serialize};

use crate::grassmann::Covariance;

/// Norms of a covariance entering the bounds.
///
/// Momentum sums carry the weight `|𝕋|⁻¹` and run over both spin indices.
/// The gradient norms use the mixed forward difference `Δ_1…Δ_D Ĉ` divided by
/// the product of momentum steps, with `Ĉ` extended by zero outside the
/// centred fundamental domain, so no wraparound difference ever appears.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CovarianceNorms {
    pub sup_hat: f64,
    pub l1_hat: f64,
    /// `max_σ Σ_σ′ Σ_x cell·|C_{σσ′}(x)|`.
    pub l1_pos: f64,
    pub grad_sup: f64,
    pub grad_l1: f64,
}

impl CovarianceNorms {
    /// All five norms equal to one.
    pub fn unit() -> Self {
        CovarianceNorms { sup_hat: 1.0, l1_hat: 1.0, l1_pos: 1.0, grad_sup: 1.0, grad_l1: 1.0 }
    }

    /// `𝔠 = ‖Ĉ‖₁‖∇Ĉ‖_∞ + ‖∇Ĉ‖₁‖Ĉ‖_∞`.
    pub fn frak_c(&self) -> f64 {
        self.l1_hat * self.grad_sup + self.grad_l1 * self.sup_hat
    }

    pub fn scaled(&self, c: f64) -> Self {
        let c = c.abs();
        CovarianceNorms {
            sup_hat: c * self.sup_hat,
            l1_hat: c * self.l1_hat,
            l1_pos: c * self.l1_pos,
            grad_sup: c * self.grad_sup,
            grad_l1: c * self.grad_l1,
        }
    }
}

pub fn covariance_norms(cov: &Covariance) -> CovarianceNorms {
    let lat = cov.lattice();
    let ns = cov.nspin();
    let len = lat.len();
    let weight = lat.momentum_weight();

    let mut sup_hat = 0.0f64;
    let mut sum_hat = 0.0;
    for v in cov.table() {
        let a = v.norm();
        sup_hat = sup_hat.max(a);
        sum_hat += a;
    }

    let pos = cov.position();
    let cell = lat.cell();
    let mut l1_pos = 0.0f64;
    for s in 0..ns {
        let row: f64 = pos[s * ns * len..(s + 1) * ns * len].iter().map(|v| v.norm()).sum();
        l1_pos = l1_pos.max(cell * row);
    }

    let (grad_sup, grad_sum) = mixed_differences(cov);
    let step: f64 = (0..lat.ndim()).map(|c| lat.momentum_step(c)).product();

    CovarianceNorms {
        sup_hat,
        l1_hat: weight * sum_hat,
        l1_pos,
        grad_sup: grad_sup / step,
        grad_l1: weight * grad_sum / step,
    }
}

/// Max and sum of `|Δ_1…Δ_D Ĉ_{σσ′}(t)|` over spins and over the extended
/// grid `t_c ∈ [t_min − 1, t_max]` of the zero-extended centred domain.
fn mixed_differences(cov: &Covariance) -> (f64, f64) {
    let lat = cov.lattice();
    let ns = cov.nspin();
    let dims = &lat.dims;
    let ndim = dims.len();
    let lo: Vec<i64> = dims.iter().map(|&l| -((l / 2) as i64)).collect();
    let hi: Vec<i64> = dims.iter().map(|&l| ((l + 1) / 2) as i64 - 1).collect();
    let ext: Vec<usize> = dims.iter().map(|&l| l + 1).collect();
    let npoints: usize = ext.iter().product();

    let mut max = 0.0f64;
    let mut sum = 0.0;
    let mut t = vec![0i64; ndim];
    let mut corner = vec![0i64; ndim];
    for s in 0..ns {
        for u in 0..ns {
            for e in 0..npoints {
                let mut rem = e;
                for c in (0..ndim).rev() {
                    t[c] = lo[c] - 1 + (rem % ext[c]) as i64;
                    rem /= ext[c];
                }
                let mut acc = num_complex::Complex64::new(0.0, 0.0);
                for mask in 0..(1usize << ndim) {
                    let mut inside = true;
                    for c in 0..ndim {
                        corner[c] = t[c] + ((mask >> c) & 1) as i64;
                        inside &= corner[c] >= lo[c] && corner[c] <= hi[c];
                    }
                    if !inside {
                        continue;
                    }
                    let v = cov.hat(s, u, lat.index_of_signed(&corner));
                    if (ndim - mask.count_ones() as usize) % 2 == 0 {
                        acc += v;
                    } else {
                        acc -= v;
                    }
                }
                let a = acc.norm();
                max = max.max(a);
                sum += a;
            }
        }
    }
    (max, sum)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::Lattice;
    use num_complex::Complex64;

    #[test]
    fn constant_table() {
        let lat = Lattice::one_dim(6);
        let cov = Covariance::from_fn(lat, 2, |_, _, _| Complex64::new(1.0, 0.0));
        let n = covariance_norms(&cov);
        assert!((n.sup_hat - 1.0).abs() < 1e-14);
        // |Σ|² · |𝕋*| / |𝕋| with unit spacing
        assert!((n.l1_hat - 4.0).abs() < 1e-14);
        // only the two boundary steps survive
        let h = lat_step(6);
        assert!((n.grad_sup - 1.0 / h).abs() < 1e-12);
        assert!((n.grad_l1 - 4.0 * 2.0 / 6.0 / h).abs() < 1e-12);
    }

    fn lat_step(l: usize) -> f64 {
        2.0 * std::f64::consts::PI / l as f64
    }
}
