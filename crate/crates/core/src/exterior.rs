//! Sparse exterior algebra over a finite ordered index set.
//!
//! A [`Form`] stores coefficients on the standard basis
//! `e_{ι_1} ∧ … ∧ e_{ι_k}` with `ι_1 < … < ι_k`. Basis elements are encoded as
//! bitmasks over the flattened index enumeration, so the universe holds at
//! most 64 indices. Wedge signs are computed by inversion counting.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Coefficients with modulus at most this fraction of the largest coefficient
/// of a form are dropped after every arithmetic pass.
pub const PRUNE_REL: f64 = 1e-14;

pub const MAX_UNIVERSE: usize = 64;

/// Position of a leg in the universe: `(vertex, slot)`, both 1-based.
///
/// The derived ordering is lexicographic, which is the enumeration order of the
/// universe `(1,1) < (1,2) < … < (m, n_m - d(m))`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct LegIndex {
    pub vertex: usize,
    pub slot: usize,
}

impl LegIndex {
    pub fn new(vertex: usize, slot: usize) -> Self {
        LegIndex { vertex, slot }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Form {
    universe: usize,
    /// Sorted by mask, no duplicate masks, no pruned coefficients.
    terms: Vec<(u64, Complex64)>,
}

#[inline]
fn full_mask(universe: usize) -> u64 {
    if universe == 64 {
        u64::MAX
    } else {
        (1u64 << universe) - 1
    }
}

/// Sign of `e_a ∧ e_b` relative to the increasing basis element of `a | b`,
/// or 0 if the supports overlap.
#[inline]
pub fn wedge_sign(a: u64, b: u64) -> i32 {
    if a & b != 0 {
        return 0;
    }
    let mut inversions = 0u32;
    let mut rest = b;
    while rest != 0 {
        let j = rest.trailing_zeros();
        // bits of `a` strictly above j
        let above = if j >= 63 { 0 } else { a >> (j + 1) };
        inversions += above.count_ones();
        rest &= rest - 1;
    }
    if inversions % 2 == 0 {
        1
    } else {
        -1
    }
}

/// Sign of the permutation that sorts `indices`, or 0 if an index repeats.
pub fn sort_sign(indices: &[usize]) -> i32 {
    let mut sign = 1;
    for i in 0..indices.len() {
        for j in i + 1..indices.len() {
            if indices[i] == indices[j] {
                return 0;
            }
            if indices[i] > indices[j] {
                sign = -sign;
            }
        }
    }
    sign
}

impl Form {
    pub fn zero(universe: usize) -> Self {
        Form { universe, terms: Vec::new() }
    }

    pub fn scalar(universe: usize, value: Complex64) -> Self {
        Self::from_terms(universe, [(0u64, value)])
    }

    pub fn one(universe: usize) -> Self {
        Self::scalar(universe, Complex64::new(1.0, 0.0))
    }

    /// The basis one-form `e_index`.
    pub fn basis(universe: usize, index: usize) -> Result<Self> {
        check_universe(universe)?;
        if index >= universe {
            return Err(Error::IndexOutOfRange { index, size: universe });
        }
        Ok(Self::from_terms(universe, [(1u64 << index, Complex64::new(1.0, 0.0))]))
    }

    /// `coeff · e_{i_1} ∧ … ∧ e_{i_k}` for an arbitrary (unsorted) tuple.
    pub fn from_tuple(universe: usize, indices: &[usize], coeff: Complex64) -> Result<Self> {
        check_universe(universe)?;
        let mut mask = 0u64;
        for &i in indices {
            if i >= universe {
                return Err(Error::IndexOutOfRange { index: i, size: universe });
            }
            mask |= 1u64 << i;
        }
        let sign = sort_sign(indices);
        if sign == 0 {
            return Ok(Self::zero(universe));
        }
        Ok(Self::from_terms(universe, [(mask, coeff * sign as f64)]))
    }

    /// The one-form `Σ_i coeffs[i] e_i`.
    pub fn one_form(universe: usize, coeffs: &[Complex64]) -> Result<Self> {
        check_universe(universe)?;
        if coeffs.len() != universe {
            return Err(Error::UniverseMismatch(universe, coeffs.len()));
        }
        Ok(Self::from_terms(
            universe,
            coeffs.iter().enumerate().map(|(i, &c)| (1u64 << i, c)),
        ))
    }

    /// Build from arbitrary `(mask, coefficient)` pairs; duplicates are summed.
    pub fn from_terms<I: IntoIterator<Item = (u64, Complex64)>>(universe: usize, terms: I) -> Self {
        let mut terms: Vec<(u64, Complex64)> = terms.into_iter().collect();
        terms.sort_unstable_by_key(|t| t.0);
        let mut merged: Vec<(u64, Complex64)> = Vec::with_capacity(terms.len());
        for (mask, c) in terms {
            match merged.last_mut() {
                Some(last) if last.0 == mask => last.1 += c,
                _ => merged.push((mask, c)),
            }
        }
        let mut form = Form { universe, terms: merged };
        form.prune();
        form
    }

    pub fn prune(&mut self) {
        let max = self.terms.iter().fold(0.0f64, |m, t| m.max(t.1.norm()));
        let cut = max * PRUNE_REL;
        self.terms.retain(|t| t.1.norm() > cut);
    }

    pub fn universe(&self) -> usize {
        self.universe
    }

    pub fn terms(&self) -> &[(u64, Complex64)] {
        &self.terms
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn coefficient(&self, mask: u64) -> Complex64 {
        match self.terms.binary_search_by_key(&mask, |t| t.0) {
            Ok(pos) => self.terms[pos].1,
            Err(_) => Complex64::new(0.0, 0.0),
        }
    }

    /// Coefficient of the increasing basis element built from `indices`.
    pub fn coefficient_of(&self, indices: &[usize]) -> Complex64 {
        let mask = indices.iter().fold(0u64, |m, &i| m | (1u64 << i));
        self.coefficient(mask)
    }

    /// Degree of a homogeneous form; `None` for zero or mixed-degree forms.
    pub fn degree(&self) -> Option<usize> {
        let mut degs = self.terms.iter().map(|t| t.0.count_ones() as usize);
        let first = degs.next()?;
        degs.all(|d| d == first).then_some(first)
    }

    pub fn max_degree(&self) -> usize {
        self.terms.iter().map(|t| t.0.count_ones() as usize).max().unwrap_or(0)
    }

    fn check_same(&self, other: &Form) -> Result<()> {
        if self.universe != other.universe {
            return Err(Error::UniverseMismatch(self.universe, other.universe));
        }
        Ok(())
    }

    pub fn add(&self, other: &Form) -> Result<Form> {
        self.check_same(other)?;
        Ok(Form::from_terms(
            self.universe,
            self.terms.iter().chain(other.terms.iter()).copied(),
        ))
    }

    pub fn sub(&self, other: &Form) -> Result<Form> {
        self.check_same(other)?;
        Ok(Form::from_terms(
            self.universe,
            self.terms
                .iter()
                .copied()
                .chain(other.terms.iter().map(|&(m, c)| (m, -c))),
        ))
    }

    pub fn scale(&self, factor: Complex64) -> Form {
        Form::from_terms(self.universe, self.terms.iter().map(|&(m, c)| (m, c * factor)))
    }

    /// Diagonal multiplication operator: each basis term `e_S` is multiplied by
    /// `f(S)`.
    pub fn map_diagonal<F: FnMut(u64) -> Complex64>(&self, mut f: F) -> Form {
        Form::from_terms(self.universe, self.terms.iter().map(|&(m, c)| (m, c * f(m))))
    }

    /// Linear map acting on each basis term separately.
    pub fn map_linear<F: FnMut(u64) -> Form>(&self, mut f: F) -> Result<Form> {
        let mut acc = Vec::new();
        for &(m, c) in &self.terms {
            let image = f(m);
            self.check_same(&image)?;
            acc.extend(image.terms.iter().map(|&(mm, cc)| (mm, cc * c)));
        }
        Ok(Form::from_terms(self.universe, acc))
    }

    pub fn wedge(&self, other: &Form) -> Result<Form> {
        self.check_same(other)?;
        let mut acc = Vec::with_capacity(self.terms.len() * other.terms.len());
        for &(a, ca) in &self.terms {
            for &(b, cb) in &other.terms {
                let s = wedge_sign(a, b);
                if s != 0 {
                    acc.push((a | b, ca * cb * s as f64));
                }
            }
        }
        Ok(Form::from_terms(self.universe, acc))
    }

    /// `forms[0] ∧ forms[1] ∧ …`; the empty product is the unit scalar.
    pub fn wedge_all<'a, I: IntoIterator<Item = &'a Form>>(universe: usize, forms: I) -> Result<Form> {
        let mut acc = Form::one(universe);
        for f in forms {
            acc = acc.wedge(f)?;
            if acc.is_zero() {
                break;
            }
        }
        Ok(acc)
    }

    /// ℓᵖ norm of the coefficient vector; `p = f64::INFINITY` gives the sup norm.
    pub fn lp_norm(&self, p: f64) -> Result<f64> {
        lp_norm(self.terms.iter().map(|t| t.1.norm()), p)
    }

    /// The top-degree functional: coefficient of `e_1 ∧ … ∧ e_N` with `N` the
    /// universe size, zero on every lower degree.
    pub fn top_integral(&self) -> Complex64 {
        self.coefficient(full_mask(self.universe))
    }

    /// ℓ² inner product `⟨self, other⟩`, antilinear in `self`.
    pub fn inner(&self, other: &Form) -> Result<Complex64> {
        self.check_same(other)?;
        Ok(self
            .terms
            .iter()
            .map(|&(m, c)| c.conj() * other.coefficient(m))
            .sum())
    }
}

fn check_universe(universe: usize) -> Result<()> {
    if universe > MAX_UNIVERSE {
        return Err(Error::UniverseTooLarge(universe));
    }
    Ok(())
}

pub(crate) fn lp_norm<I: IntoIterator<Item = f64>>(abs_values: I, p: f64) -> Result<f64> {
    if !(p >= 1.0) {
        return Err(Error::InvalidExponent(p));
    }
    if p.is_infinite() {
        return Ok(abs_values.into_iter().fold(0.0, f64::max));
    }
    let sum: f64 = abs_values.into_iter().map(|a| a.powf(p)).sum();
    Ok(sum.powf(1.0 / p))
}

fn one_form_coeffs(v: &Form) -> Result<Vec<(usize, Complex64)>> {
    v.terms
        .iter()
        .map(|&(m, c)| {
            if m.count_ones() != 1 {
                Err(Error::NotOneForm(m.count_ones() as usize))
            } else {
                Ok((m.trailing_zeros() as usize, c))
            }
        })
        .collect()
}

/// `δ_v(a) = v ∧ a` for a one-form `v`.
pub fn exterior_product(v: &Form, a: &Form) -> Result<Form> {
    one_form_coeffs(v)?;
    v.wedge(a)
}

/// `δ*_v`, the ℓ²-adjoint of `a ↦ v ∧ a` for a one-form `v`.
pub fn interior_product(v: &Form, a: &Form) -> Result<Form> {
    if v.universe != a.universe {
        return Err(Error::UniverseMismatch(v.universe, a.universe));
    }
    let coeffs = one_form_coeffs(v)?;
    let mut acc = Vec::new();
    for &(s, c) in &a.terms {
        for &(i, vi) in &coeffs {
            let bit = 1u64 << i;
            if s & bit == 0 {
                continue;
            }
            let below = (s & (bit - 1)).count_ones();
            let sign = if below % 2 == 0 { 1.0 } else { -1.0 };
            acc.push((s & !bit, vi.conj() * c * sign));
        }
    }
    Ok(Form::from_terms(a.universe, acc))
}

/// Upper bound `multinomial(k; k_1,…,k_n)^{(p-1)/p}` on the ℓᵖ wedge
/// submultiplicativity constant, obtained by ignoring all sign cancellations
/// in the shuffle sum.
pub fn shuffle_bound(degrees: &[usize], p: f64) -> Result<f64> {
    if degrees.is_empty() {
        return Err(Error::EmptyDegrees);
    }
    if !(p >= 1.0) {
        return Err(Error::InvalidExponent(p));
    }
    let exponent = if p.is_infinite() { 1.0 } else { (p - 1.0) / p };
    Ok(multinomial(degrees).powf(exponent))
}

/// Multinomial coefficient as a float, built from a product of binomials.
pub fn multinomial(parts: &[usize]) -> f64 {
    let mut total = 0usize;
    let mut value = 1.0f64;
    for &k in parts {
        for j in 1..=k {
            total += 1;
            value *= total as f64 / j as f64;
        }
    }
    value
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    fn e(n: usize, i: usize) -> Form {
        Form::basis(n, i).unwrap()
    }

    #[test]
    fn wedge_examples() {
        let n = 4;
        assert!(e(n, 0).wedge(&e(n, 0)).unwrap().is_zero());
        let ba = e(n, 1).wedge(&e(n, 0)).unwrap();
        assert_eq!(ba.coefficient(0b11), c(-1.0));
        let a = Form::from_tuple(n, &[0, 1], c(2.0)).unwrap();
        let b = Form::from_tuple(n, &[2], c(3.0)).unwrap();
        let w = a.wedge(&b).unwrap();
        assert_eq!(w.terms(), &[(0b111, c(6.0))]);
    }

    #[test]
    fn universe_mismatch_is_an_error() {
        assert_eq!(e(3, 0).wedge(&e(4, 0)), Err(Error::UniverseMismatch(3, 4)));
    }

    #[test]
    fn norm_examples() {
        let f = e(3, 0).add(&e(3, 1)).unwrap();
        assert!((f.lp_norm(2.0).unwrap() - 2f64.sqrt()).abs() < 1e-15);
        let g = Form::from_tuple(3, &[0, 1], c(2.0)).unwrap();
        assert_eq!(g.lp_norm(1.0).unwrap(), 2.0);
        let h = Form::from_terms(3, [(1, c(-5.0)), (6, c(2.0)), (7, Complex64::new(0.0, 3.0))]);
        assert_eq!(h.lp_norm(f64::INFINITY).unwrap(), 5.0);
        assert_eq!(h.lp_norm(0.5), Err(Error::InvalidExponent(0.5)));
    }

    #[test]
    fn top_integral_examples() {
        let n = 4;
        let full = Form::from_tuple(n, &[0, 1, 2, 3], c(1.0)).unwrap();
        assert_eq!(full.top_integral(), c(1.0));
        let low = Form::from_tuple(n, &[0, 1, 3], c(1.0)).unwrap();
        assert_eq!(low.top_integral(), c(0.0));
        let swapped = Form::from_tuple(n, &[0, 2, 1, 3], c(1.0)).unwrap();
        assert_eq!(swapped.top_integral(), c(-1.0));
    }

    #[test]
    fn interior_examples() {
        let n = 3;
        let a = Form::from_tuple(n, &[0, 1], c(1.0)).unwrap();
        assert_eq!(interior_product(&e(n, 0), &a).unwrap(), e(n, 1));
        assert!(interior_product(&e(n, 2), &a).unwrap().is_zero());
        assert_eq!(interior_product(&a, &a), Err(Error::NotOneForm(2)));

        // v = e1 + e2 on e1: δ_v δ*_v e1 = v, δ*_v δ_v e1 = δ*_v(e2∧e1) = e1 - e2
        let v = e(n, 0).add(&e(n, 1)).unwrap();
        let x = e(n, 0);
        let left = exterior_product(&v, &interior_product(&v, &x).unwrap()).unwrap();
        let right = interior_product(&v, &exterior_product(&v, &x).unwrap()).unwrap();
        assert_eq!(left, v);
        assert_eq!(right, e(n, 0).sub(&e(n, 1)).unwrap());
        assert_eq!(left.add(&right).unwrap(), x.scale(c(2.0)));
    }

    #[test]
    fn shuffle_bound_examples() {
        assert!((shuffle_bound(&[1, 1], 2.0).unwrap() - 2f64.sqrt()).abs() < 1e-15);
        assert!((shuffle_bound(&[2, 1], 2.0).unwrap() - 3f64.sqrt()).abs() < 1e-15);
        assert_eq!(shuffle_bound(&[1, 1], 1.0).unwrap(), 1.0);
        assert_eq!(shuffle_bound(&[], 2.0), Err(Error::EmptyDegrees));
        assert_eq!(multinomial(&[2, 2, 1]), 30.0);
    }

    #[test]
    fn sort_sign_matches_transposition_count() {
        assert_eq!(sort_sign(&[2, 0, 1]), 1);
        assert_eq!(sort_sign(&[1, 0, 2]), -1);
        assert_eq!(sort_sign(&[1, 1]), 0);
    }

    fn arb_form(n: usize, deg: usize) -> impl Strategy<Value = Form> {
        proptest::collection::vec((0u64..(1u64 << n), -1.0f64..1.0, -1.0f64..1.0), 1..6).prop_map(
            move |raw| {
                Form::from_terms(
                    n,
                    raw.into_iter()
                        .filter(|(m, _, _)| m.count_ones() as usize == deg)
                        .map(|(m, re, im)| (m, Complex64::new(re, im))),
                )
            },
        )
    }

    proptest! {
        #[test]
        fn graded_antisymmetry(
            (a, b, da, db) in (0usize..4, 0usize..4).prop_flat_map(|(da, db)| {
                (arb_form(7, da), arb_form(7, db), Just(da), Just(db))
            })
        ) {
            let ab = a.wedge(&b).unwrap();
            let ba = b.wedge(&a).unwrap().scale(c(if (da * db) % 2 == 0 { 1.0 } else { -1.0 }));
            let diff = ab.sub(&ba).unwrap();
            prop_assert!(diff.lp_norm(f64::INFINITY).unwrap() < 1e-12);
        }

        #[test]
        fn wedge_is_associative(a in arb_form(6, 1), b in arb_form(6, 2), x in arb_form(6, 1)) {
            let left = a.wedge(&b).unwrap().wedge(&x).unwrap();
            let right = a.wedge(&b.wedge(&x).unwrap()).unwrap();
            prop_assert!(left.sub(&right).unwrap().lp_norm(f64::INFINITY).unwrap() < 1e-12);
        }

        #[test]
        fn top_integral_is_permutation_sign(perm in Just((0..6usize).collect::<Vec<_>>()).prop_shuffle()) {
            let f = Form::from_tuple(6, &perm, c(1.0)).unwrap();
            // independent parity: count cycles
            let mut seen = [false; 6];
            let mut transpositions = 0;
            for start in 0..6 {
                let mut len = 0;
                let mut i = start;
                while !seen[i] {
                    seen[i] = true;
                    i = perm[i];
                    len += 1;
                }
                if len > 0 {
                    transpositions += len - 1;
                }
            }
            let expected = if transpositions % 2 == 0 { 1.0 } else { -1.0 };
            prop_assert_eq!(f.top_integral(), c(expected));
        }
    }
}
