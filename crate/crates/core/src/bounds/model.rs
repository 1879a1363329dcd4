//! Single-scale Fermi propagator on a `(d+1)`-dimensional momentum lattice.
//!
//! Spins are `(σ, κ)` with `σ ∈ {↑,↓}` and `κ ∈ {0,1}` marking `ψ̄`/`ψ`,
//! flattened as `2σ + κ`. The only nonzero blocks are
//! `Ĉ_{(σ,1),(σ,0)}(q) = ½ĉ(q)` and `Ĉ_{(σ,0),(σ,1)}(q) = −½ĉ(−q)` with
//! `ĉ(p⁰,p) = χ_j(p⁰,p)/(ip⁰ − p² + 1)` and
//! `χ_j = φ(M^{2j}((p⁰)² + (p² − 1)²))`.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grassmann::Covariance;
use crate::lattice::Lattice;

/// Width of the smooth steps of the bump.
pub const BUMP_EPS: f64 = 0.25;

fn smooth_unit(t: f64) -> f64 {
    if t > 0.0 {
        (-1.0 / t).exp()
    } else {
        0.0
    }
}

/// `s(t) = f(t)/(f(t) + f(1−t))`, `f(t) = e^{−1/t}` for `t > 0`: 0 below 0, 1 above 1.
pub fn smooth_step(t: f64) -> f64 {
    let (a, b) = (smooth_unit(t), smooth_unit(1.0 - t));
    a / (a + b)
}

/// `φ(u) = s((2−u)/ε)·s((u−½)/ε)`: supported in `(½, 2)`, equal to 1 on `[¾, 7/4]`.
pub fn bump(u: f64) -> f64 {
    smooth_step((2.0 - u) / BUMP_EPS) * smooth_step((u - 0.5) / BUMP_EPS)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScaleModel {
    /// Scale ratio `M > 1`.
    pub m_scale: f64,
    pub j: i32,
    /// Spatial dimension; the lattice has `d + 1` axes, `p⁰` first.
    pub d: usize,
    /// Momentum points per axis.
    pub lattice: Vec<usize>,
}

impl ScaleModel {
    /// Model at the smallest lattice that passes the resolution check.
    pub fn new(m_scale: f64, j: i32, d: usize) -> Result<Self> {
        let mut model = ScaleModel { m_scale, j, d, lattice: Vec::new() };
        model.validate_params()?;
        model.lattice = (0..=d).map(|c| model.required(c)).collect();
        Ok(model)
    }

    /// Same model with every axis refined by `factor`.
    pub fn refined(&self, factor: usize) -> Self {
        ScaleModel { lattice: self.lattice.iter().map(|l| l * factor.max(1)).collect(), ..self.clone() }
    }

    fn validate_params(&self) -> Result<()> {
        if !(self.m_scale > 1.0) || !self.m_scale.is_finite() {
            return Err(Error::ScaleModel(format!("M = {} must exceed 1", self.m_scale)));
        }
        if self.j <= 0 {
            return Err(Error::ScaleModel(format!("scale j = {} must be positive", self.j)));
        }
        if self.d == 0 {
            return Err(Error::ScaleModel("need at least one spatial dimension".into()));
        }
        Ok(())
    }

    /// `M^{−j}`.
    pub fn shell(&self) -> f64 {
        self.m_scale.powi(-self.j)
    }

    /// Half-width of the tabulated box on an axis: the support of `χ_j`
    /// plus two steps of the coarsest admissible resolution.
    pub fn half_width(&self, axis: usize) -> f64 {
        let s = self.shell();
        let support = if axis == 0 {
            2f64.sqrt() * s
        } else {
            (1.0 + 2f64.sqrt() * s).sqrt()
        };
        support + 0.5 * s
    }

    /// Smallest even point count with momentum step `≤ M^{−j}/4`.
    pub fn required(&self, axis: usize) -> usize {
        let need = (8.0 * self.half_width(axis) / self.shell() - 1e-9).ceil() as usize;
        need + need % 2
    }

    pub fn momentum_step(&self, axis: usize) -> f64 {
        2.0 * self.half_width(axis) / self.lattice[axis] as f64
    }

    pub fn check_resolution(&self) -> Result<()> {
        self.validate_params()?;
        if self.lattice.len() != self.d + 1 {
            return Err(Error::ScaleModel(format!(
                "{} lattice axes for d = {}",
                self.lattice.len(),
                self.d
            )));
        }
        for (axis, &have) in self.lattice.iter().enumerate() {
            let need = self.required(axis);
            if have < need || have % 2 != 0 {
                return Err(Error::Resolution { axis, have, need });
            }
        }
        Ok(())
    }

    /// Position lattice whose dual has the model's momentum steps.
    pub fn position_lattice(&self) -> Result<Lattice> {
        let spacing = (0..=self.d).map(|c| std::f64::consts::PI / self.half_width(c)).collect();
        Lattice::with_spacing(self.lattice.clone(), spacing)
    }

    /// `χ_j(p⁰, p)`.
    pub fn cutoff(&self, p0: f64, p2: f64) -> f64 {
        let m2j = self.m_scale.powi(2 * self.j);
        bump(m2j * (p0 * p0 + (p2 - 1.0) * (p2 - 1.0)))
    }

    /// `ĉ(p⁰, p)`.
    pub fn propagator(&self, p0: f64, p2: f64) -> Complex64 {
        let chi = self.cutoff(p0, p2);
        if chi == 0.0 {
            return Complex64::new(0.0, 0.0);
        }
        chi / Complex64::new(1.0 - p2, p0)
    }
}

pub const MODEL_SPINS: usize = 4;

pub fn build_single_scale(model: &ScaleModel) -> Result<Covariance> {
    model.check_resolution()?;
    let lat = model.position_lattice()?;
    let len = lat.len();
    let scalar: Vec<Complex64> = (0..len)
        .into_par_iter()
        .map(|p| {
            let v = lat.momentum_value(p);
            let p2: f64 = v[1..].iter().map(|x| x * x).sum();
            model.propagator(v[0], p2)
        })
        .collect();
    for (p, v) in scalar.iter().enumerate() {
        let on_edge = lat
            .centered(p)
            .iter()
            .zip(&lat.dims)
            .any(|(&k, &l)| k == -((l / 2) as i64) || k == ((l + 1) / 2) as i64 - 1);
        if on_edge && v.norm() != 0.0 {
            return Err(Error::SupportAtBoundary(p));
        }
    }
    let neg: Vec<usize> = (0..len).map(|p| lat.neg(p)).collect();
    Ok(Covariance::from_fn(lat, MODEL_SPINS, |s, t, p| {
        let (sig_s, k_s) = (s / 2, s % 2);
        let (sig_t, k_t) = (t / 2, t % 2);
        if sig_s != sig_t {
            return Complex64::new(0.0, 0.0);
        }
        match (k_s, k_t) {
            (1, 0) => 0.5 * scalar[p],
            (0, 1) => -0.5 * scalar[neg[p]],
            _ => Complex64::new(0.0, 0.0),
        }
    }))
}

/// Exactly scale-covariant covariance: `Ĉ = M^j` on a box of `4×4` momentum
/// cells of side `M^{−j}/4` (two spins, antisymmetric partner on the mirrored
/// box), tabulated on a `16×16` lattice.
pub fn synthetic_scale_covariant(m_scale: f64, j: i32) -> Result<Covariance> {
    if !(m_scale > 1.0) {
        return Err(Error::ScaleModel(format!("M = {m_scale} must exceed 1")));
    }
    let step = m_scale.powi(-j) / 4.0;
    let l = 16usize;
    let spacing = 2.0 * std::f64::consts::PI / (l as f64 * step);
    let lat = Lattice::with_spacing(vec![l, l], vec![spacing, spacing])?;
    let height = m_scale.powi(j);
    let inside = |k: &[i64]| k.iter().all(|&v| (-2..=1).contains(&v));
    let centred: Vec<Vec<i64>> = (0..lat.len()).map(|p| lat.centered(p)).collect();
    Ok(Covariance::from_fn(lat, 2, |s, t, p| {
        let k = &centred[p];
        let mirrored: Vec<i64> = k.iter().map(|v| -v).collect();
        match (s, t) {
            (1, 0) if inside(k) => Complex64::new(height, 0.0),
            (0, 1) if inside(&mirrored) => Complex64::new(-height, 0.0),
            _ => Complex64::new(0.0, 0.0),
        }
    }))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bump_shape() {
        assert_eq!(bump(0.5), 0.0);
        assert_eq!(bump(2.0), 0.0);
        assert_eq!(bump(0.4), 0.0);
        assert_eq!(bump(1.0), 1.0);
        assert_eq!(bump(0.75), 1.0);
        assert_eq!(bump(1.75), 1.0);
        assert!(bump(0.6) > 0.0 && bump(0.6) < 1.0);
    }

    #[test]
    fn resolution_and_parameters() {
        let m = ScaleModel::new(2.0, 3, 1).unwrap();
        assert!(m.check_resolution().is_ok());
        let mut coarse = m.clone();
        coarse.lattice[1] -= 2;
        match coarse.check_resolution() {
            Err(Error::Resolution { axis: 1, need, .. }) => assert_eq!(need, m.lattice[1]),
            other => panic!("{other:?}"),
        }
        assert!(ScaleModel::new(2.0, 0, 1).is_err());
        assert!(ScaleModel::new(1.0, 2, 1).is_err());
    }
}
