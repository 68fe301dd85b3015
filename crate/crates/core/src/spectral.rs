//! Finitely supported functions on the free group under convolution, used
//! for the norm and spectrum statements about `X = sum c_i u_i`.
//!
//! The k-th convolution power of a generator combination is supported on
//! the positive words of length `k`, so its l2 norm is
//! `(sum c_i^2)^(k/2)` exactly, and the operator norm on l2 of the group
//! is bracketed by `|X^k|_2 <= |op| <= (k+1) |X^k|_2`.
//!
//! For `d_0` dominating `d` in the l2 sense the element
//! `d_0 + sum d_i u_i` has the explicit inverse with coefficients
//! `(-1)^m d_(i_1) .. d_(i_m) / d_0^(m+1)` on the positive word
//! `u_(i_1) .. u_(i_m)`; truncating at depth `m` leaves a residual of l2
//! norm exactly `(|d|_2 / |d_0|)^(m+1)`.

use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::words::{enumerate_positive, Letter, ReducedWord};

/// Convolutions refuse to produce supports larger than this.
pub const SUPPORT_CAP: usize = 1_000_000;

/// A finitely supported real function on the free group; exact zeros are
/// never stored.
#[derive(Debug, Clone, PartialEq)]
pub struct GroupFunction {
    rank: usize,
    terms: BTreeMap<ReducedWord, f64>,
}

impl GroupFunction {
    pub fn zero(rank: usize) -> Result<Self> {
        if rank == 0 {
            return Err(Error::ZeroRank);
        }
        Ok(GroupFunction { rank, terms: BTreeMap::new() })
    }

    /// The indicator of a single word.
    pub fn delta(w: ReducedWord) -> Self {
        let rank = w.rank();
        let mut terms = BTreeMap::new();
        terms.insert(w, 1.0);
        GroupFunction { rank, terms }
    }

    /// Sums the given terms, dropping exact zeros.
    pub fn from_terms(rank: usize, entries: impl IntoIterator<Item = (ReducedWord, f64)>) -> Result<Self> {
        let mut f = GroupFunction::zero(rank)?;
        for (w, v) in entries {
            if w.rank() != rank {
                return Err(Error::RankMismatch { left: rank, right: w.rank() });
            }
            let slot = f.terms.entry(w.clone()).or_insert(0.0);
            *slot += v;
            if *slot == 0.0 {
                f.terms.remove(&w);
            }
        }
        Ok(f)
    }

    /// The element `sum_i c_i u_i`.
    pub fn generator_combination(c: &[f64]) -> Result<Self> {
        let rank = c.len();
        if rank == 0 {
            return Err(Error::ZeroRank);
        }
        let mut f = GroupFunction::zero(rank)?;
        for (i, &ci) in c.iter().enumerate() {
            if ci != 0.0 {
                let w = ReducedWord::from_letters(rank, [Letter::positive(i + 1)])?;
                f.terms.insert(w, ci);
            }
        }
        Ok(f)
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn support_len(&self) -> usize {
        self.terms.len()
    }

    /// Coefficient at a word, zero when absent.
    pub fn coefficient(&self, w: &ReducedWord) -> f64 {
        self.terms.get(w).copied().unwrap_or(0.0)
    }

    /// Terms in deterministic (word-ordered) sequence.
    pub fn terms(&self) -> impl Iterator<Item = (&ReducedWord, f64)> {
        self.terms.iter().map(|(w, v)| (w, *v))
    }

    pub fn scale(&self, factor: f64) -> Self {
        if factor == 0.0 {
            return GroupFunction { rank: self.rank, terms: BTreeMap::new() };
        }
        GroupFunction {
            rank: self.rank,
            terms: self.terms.iter().map(|(w, v)| (w.clone(), v * factor)).collect(),
        }
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.combine(other, 1.0)
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.combine(other, -1.0)
    }

    fn combine(&self, other: &Self, sign: f64) -> Result<Self> {
        if self.rank != other.rank {
            return Err(Error::RankMismatch { left: self.rank, right: other.rank });
        }
        let mut terms = self.terms.clone();
        for (w, v) in &other.terms {
            let slot = terms.entry(w.clone()).or_insert(0.0);
            *slot += sign * v;
            if *slot == 0.0 {
                terms.remove(w);
            }
        }
        Ok(GroupFunction { rank: self.rank, terms })
    }

    /// Convolution `(f * g)(s) = sum_t f(t) g(t^-1 s)`, accumulated as
    /// `result(t v) += f(t) g(v)` over the support pairs. Exact zeros
    /// produced by cancellation are dropped; nothing else is pruned.
    pub fn convolve(&self, other: &Self) -> Result<Self> {
        if self.rank != other.rank {
            return Err(Error::RankMismatch { left: self.rank, right: other.rank });
        }
        let mut terms: BTreeMap<ReducedWord, f64> = BTreeMap::new();
        for (t, ft) in &self.terms {
            for (v, gv) in &other.terms {
                let w = t.concat(v)?;
                *terms.entry(w).or_insert(0.0) += ft * gv;
                if terms.len() > SUPPORT_CAP {
                    return Err(Error::SupportCap { cap: SUPPORT_CAP });
                }
            }
        }
        terms.retain(|_, v| *v != 0.0);
        Ok(GroupFunction { rank: self.rank, terms })
    }

    /// k-fold convolution power; the 0-th power is the identity.
    pub fn power(&self, k: usize) -> Result<Self> {
        let mut out = GroupFunction::delta(ReducedWord::identity(self.rank)?);
        for _ in 0..k {
            out = out.convolve(self)?;
        }
        Ok(out)
    }

    pub fn l2_norm(&self) -> f64 {
        self.terms.values().map(|v| v * v).sum::<f64>().sqrt()
    }
}

/// Closed-form bracket for the operator norm of the k-th power of
/// `sum c_i u_i` acting by convolution: lower bound `(sum c_i^2)^(k/2)`
/// (the l2 norm of the function), upper bound `(k+1)` times that.
pub fn power_norm_bounds(c: &[f64], k: usize) -> Result<(f64, f64)> {
    if c.is_empty() {
        return Err(Error::ZeroRank);
    }
    if !c.iter().all(|v| v.is_finite()) || c.iter().all(|v| *v == 0.0) {
        return Err(Error::ZeroCoefficients);
    }
    let l2 = c.iter().map(|v| v * v).sum::<f64>().powf(k as f64 / 2.0);
    Ok((l2, (k as f64 + 1.0) * l2))
}

fn check_dominates(d0: f64, d: &[f64]) -> Result<f64> {
    if d.is_empty() {
        return Err(Error::ZeroRank);
    }
    if !d0.is_finite() || d0 == 0.0 || !d.iter().all(|v| v.is_finite()) {
        return Err(Error::ZeroCoefficients);
    }
    let norm = d.iter().map(|v| v * v).sum::<f64>().sqrt();
    if norm >= d0.abs() {
        return Err(Error::DivergentSeries);
    }
    Ok(norm)
}

/// Truncation of the inverse of `d_0 + sum d_i u_i`: the sum over positive
/// words of length `m <= depth` of `(-1)^m prod d / d_0^(m+1)`. Requires
/// `|d|_2 < |d_0|`.
pub fn geometric_inverse(d0: f64, d: &[f64], depth: usize) -> Result<GroupFunction> {
    check_dominates(d0, d)?;
    let rank = d.len();
    let mut f = GroupFunction::zero(rank)?;
    let mut scale = 1.0 / d0;
    for m in 0..=depth {
        if m > 0 {
            scale *= -1.0 / d0;
        }
        for w in enumerate_positive(rank, m)? {
            let mut coeff = scale;
            for l in w.letters() {
                coeff *= d[l.index - 1];
            }
            if coeff != 0.0 {
                f.terms.insert(w, coeff);
            }
        }
    }
    Ok(f)
}

/// The exact l2 norm of the truncation residual, `(|d|_2 / |d_0|)^(depth+1)`.
pub fn geometric_tail(d0: f64, d: &[f64], depth: usize) -> Result<f64> {
    let norm = check_dominates(d0, d)?;
    Ok((norm / d0.abs()).powi(depth as i32 + 1))
}

/// l2 norm of `(d_0 + sum d_i u_i) * f - delta_e` for the depth-truncated
/// inverse `f`, computed by actual convolution; up to rounding this equals
/// [`geometric_tail`].
pub fn geometric_inverse_residual(d0: f64, d: &[f64], depth: usize) -> Result<f64> {
    let rank = d.len();
    let f = geometric_inverse(d0, d, depth)?;
    let a = GroupFunction::delta(ReducedWord::identity(rank)?)
        .scale(d0)
        .add(&GroupFunction::generator_combination(d)?)?;
    let residual = a.convolve(&f)?.sub(&GroupFunction::delta(ReducedWord::identity(rank)?))?;
    Ok(residual.l2_norm())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn word(text: &str, rank: usize) -> ReducedWord {
        ReducedWord::parse(text, rank).unwrap()
    }

    #[test]
    fn convolution_multiplies_group_elements() {
        let f = GroupFunction::delta(word("1 -2", 2));
        let g = GroupFunction::delta(word("2 1", 2));
        let h = f.convolve(&g).unwrap();
        assert_eq!(h.support_len(), 1);
        assert_eq!(h.coefficient(&word("1 1", 2)), 1.0);
    }

    #[test]
    fn convolution_is_bilinear_over_small_supports() {
        let f = GroupFunction::from_terms(
            2,
            [(word("1", 2), 2.0), (word("-2", 2), -1.0)],
        )
        .unwrap();
        let g = GroupFunction::from_terms(
            2,
            [(word("2", 2), 0.5), (word("", 2), 3.0)],
        )
        .unwrap();
        let h = f.convolve(&g).unwrap();
        // 2 d_1 * (0.5 d_2 + 3 d_e) - d_{-2} * (0.5 d_2 + 3 d_e)
        assert_eq!(h.coefficient(&word("1 2", 2)), 1.0);
        assert_eq!(h.coefficient(&word("1", 2)), 6.0);
        assert_eq!(h.coefficient(&word("", 2)), -0.5);
        assert_eq!(h.coefficient(&word("-2", 2)), -3.0);
        assert_eq!(h.support_len(), 4);
    }

    #[test]
    fn power_norms_match_closed_form() {
        let c = [2.0, 1.0];
        let x = GroupFunction::generator_combination(&c).unwrap();
        let x2 = x.power(2).unwrap();
        assert_eq!(x2.support_len(), 4);
        assert!((x2.l2_norm() - 5.0).abs() < 1e-12);
        let (lo, hi) = power_norm_bounds(&c, 2).unwrap();
        assert_eq!((lo, hi), (5.0, 15.0));
        let c = [1.5, 0.7, 0.4];
        for k in 0..=5 {
            let norm = GroupFunction::generator_combination(&c).unwrap().power(k).unwrap().l2_norm();
            let (lo, _) = power_norm_bounds(&c, k).unwrap();
            assert!((norm - lo).abs() <= 1e-12 * lo.max(1.0), "k = {k}");
        }
    }

    #[test]
    fn geometric_inverse_example() {
        // d_0 = 2, d = (1, 0): inverse supported on powers of u_1 alone
        let f = geometric_inverse(2.0, &[1.0, 0.0], 4).unwrap();
        assert_eq!(f.support_len(), 5);
        assert_eq!(f.coefficient(&word("1 1", 2)), 0.125);
        assert_eq!(f.coefficient(&word("2", 2)), 0.0);
        let tail = geometric_tail(2.0, &[1.0, 0.0], 4).unwrap();
        assert!((tail - 1.0 / 32.0).abs() < 1e-16);
        let residual = geometric_inverse_residual(2.0, &[1.0, 0.0], 4).unwrap();
        assert!((residual - tail).abs() < 1e-15);
    }

    #[test]
    fn truncation_junk_stays_below_rounding() {
        let d0 = 1.9;
        let d = [0.9, 0.6];
        let depth = 5;
        let f = geometric_inverse(d0, &d, depth).unwrap();
        let a = GroupFunction::delta(word("", 2))
            .scale(d0)
            .add(&GroupFunction::generator_combination(&d).unwrap())
            .unwrap();
        let residual = a
            .convolve(&f)
            .unwrap()
            .sub(&GroupFunction::delta(word("", 2)))
            .unwrap();
        // everything of length <= depth should have cancelled exactly up to
        // rounding; the true residual lives on length depth+1
        for (w, v) in residual.terms() {
            if w.len() <= depth {
                assert!(v.abs() <= 1e-15, "junk {v} at {w}");
            }
        }
        let tail = geometric_tail(d0, &d, depth).unwrap();
        assert!((residual.l2_norm() - tail).abs() <= 1e-12 * tail);
    }

    #[test]
    fn divergent_series_is_rejected() {
        assert!(matches!(geometric_inverse(1.0, &[1.0, 1.0], 3), Err(Error::DivergentSeries)));
        assert!(matches!(geometric_tail(0.5, &[0.4, 0.3], 3), Err(Error::DivergentSeries)));
    }

    #[test]
    fn support_cap_is_enforced() {
        let words = enumerate_positive(4, 5).unwrap();
        let f = GroupFunction::from_terms(4, words.into_iter().map(|w| (w, 1.0))).unwrap();
        assert_eq!(f.support_len(), 1024);
        assert!(matches!(f.convolve(&f), Err(Error::SupportCap { .. })));
    }

    #[test]
    fn zero_handling() {
        let f = GroupFunction::from_terms(2, [(word("1", 2), 1.0), (word("1", 2), -1.0)]).unwrap();
        assert_eq!(f.support_len(), 0);
        assert_eq!(f.l2_norm(), 0.0);
        let x = GroupFunction::generator_combination(&[1.0, 0.0]).unwrap();
        assert_eq!(x.support_len(), 1);
        let id = x.power(0).unwrap();
        assert_eq!(id.coefficient(&word("", 2)), 1.0);
    }
}
