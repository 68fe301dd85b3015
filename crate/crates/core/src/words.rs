//! Reduced words over a free group of rank `n`, together with the letter
//! statistics the state formulas consume.
//!
//! A word is stored fully reduced: no letter is adjacent to its inverse.
//! The text form is a whitespace-separated list of signed indices, so
//! `"1 -2 1"` is `u_1 u_2^-1 u_1` and the empty string is the identity.
//!
//! Letters are ordered by index with the plain generator before its inverse
//! (`u_1 < u_1^-1 < u_2 < ...`); enumeration is breadth-first by length and
//! lexicographic within a length, which fixes the row order of every matrix
//! indexed by words.

use std::fmt;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Sign {
    Positive,
    Negative,
}

/// One generator or inverse generator, `u_index` or `u_index^-1`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Letter {
    pub index: usize,
    pub sign: Sign,
}

impl Letter {
    pub fn positive(index: usize) -> Self {
        Letter { index, sign: Sign::Positive }
    }

    pub fn negative(index: usize) -> Self {
        Letter { index, sign: Sign::Negative }
    }

    pub fn inverse(self) -> Self {
        let sign = match self.sign {
            Sign::Positive => Sign::Negative,
            Sign::Negative => Sign::Positive,
        };
        Letter { index: self.index, sign }
    }

    pub fn is_positive(self) -> bool {
        self.sign == Sign::Positive
    }

    /// Signed-index form: `u_k` is `k`, `u_k^-1` is `-k`.
    pub fn token(self) -> i64 {
        match self.sign {
            Sign::Positive => self.index as i64,
            Sign::Negative => -(self.index as i64),
        }
    }

    pub fn from_token(token: i64, rank: usize) -> Result<Self> {
        if token == 0 {
            return Err(Error::BadToken { token: "0".into() });
        }
        let index = token.unsigned_abs() as usize;
        if index == 0 || index > rank {
            return Err(Error::IndexOutOfRange { index: token, rank });
        }
        Ok(if token > 0 { Letter::positive(index) } else { Letter::negative(index) })
    }

    /// Dense code in `0..2n` following the letter order; used to index the
    /// boundary measure tables.
    pub(crate) fn code(self) -> usize {
        2 * (self.index - 1) + usize::from(self.sign == Sign::Negative)
    }
}

/// All `2n` letters in their fixed order.
pub fn alphabet(rank: usize) -> Vec<Letter> {
    (1..=rank)
        .flat_map(|i| [Letter::positive(i), Letter::negative(i)])
        .collect()
}

/// A reduced word in the free group of the given rank.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ReducedWord {
    rank: usize,
    letters: Vec<Letter>,
}

impl ReducedWord {
    pub fn identity(rank: usize) -> Result<Self> {
        if rank == 0 {
            return Err(Error::ZeroRank);
        }
        Ok(ReducedWord { rank, letters: Vec::new() })
    }

    /// Builds a word from arbitrary letters, cancelling adjacent inverse
    /// pairs until the result is reduced.
    pub fn from_letters(rank: usize, letters: impl IntoIterator<Item = Letter>) -> Result<Self> {
        if rank == 0 {
            return Err(Error::ZeroRank);
        }
        let mut out: Vec<Letter> = Vec::new();
        for l in letters {
            if l.index == 0 || l.index > rank {
                return Err(Error::IndexOutOfRange { index: l.token(), rank });
            }
            if out.last() == Some(&l.inverse()) {
                out.pop();
            } else {
                out.push(l);
            }
        }
        Ok(ReducedWord { rank, letters: out })
    }

    /// Parses the signed-index text form; the empty string is the identity.
    pub fn parse(text: &str, rank: usize) -> Result<Self> {
        let mut letters = Vec::new();
        for tok in text.split_whitespace() {
            let v: i64 = tok.parse().map_err(|_| Error::BadToken { token: tok.to_string() })?;
            letters.push(Letter::from_token(v, rank)?);
        }
        Self::from_letters(rank, letters)
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn len(&self) -> usize {
        self.letters.len()
    }

    pub fn is_identity(&self) -> bool {
        self.letters.is_empty()
    }

    pub fn letters(&self) -> &[Letter] {
        &self.letters
    }

    pub fn first(&self) -> Option<Letter> {
        self.letters.first().copied()
    }

    pub fn last(&self) -> Option<Letter> {
        self.letters.last().copied()
    }

    pub fn inverse(&self) -> Self {
        let letters = self.letters.iter().rev().map(|l| l.inverse()).collect();
        ReducedWord { rank: self.rank, letters }
    }

    /// Group product with reduction at the seam.
    pub fn concat(&self, other: &Self) -> Result<Self> {
        if self.rank != other.rank {
            return Err(Error::RankMismatch { left: self.rank, right: other.rank });
        }
        let mut letters = self.letters.clone();
        for &l in &other.letters {
            if letters.last() == Some(&l.inverse()) {
                letters.pop();
            } else {
                letters.push(l);
            }
        }
        Ok(ReducedWord { rank: self.rank, letters })
    }

    /// Appends one letter, cancelling if it inverts the last one.
    pub fn push(&self, l: Letter) -> Result<Self> {
        if l.index == 0 || l.index > self.rank {
            return Err(Error::IndexOutOfRange { index: l.token(), rank: self.rank });
        }
        let mut letters = self.letters.clone();
        if letters.last() == Some(&l.inverse()) {
            letters.pop();
        } else {
            letters.push(l);
        }
        Ok(ReducedWord { rank: self.rank, letters })
    }

    /// Inverts every letter in place (`u_i <-> u_i^-1`) without reversing.
    /// The result is reduced whenever the input is.
    pub fn invert_letters(&self) -> Self {
        let letters = self.letters.iter().map(|l| l.inverse()).collect();
        ReducedWord { rank: self.rank, letters }
    }

    /// Number of occurrences of `u_index` or `u_index^-1`.
    pub fn letter_count(&self, index: usize) -> usize {
        self.letters.iter().filter(|l| l.index == index).count()
    }

    /// Number of adjacent pairs `u_i^-1 u_j` or `u_j^-1 u_i`.
    ///
    /// The counted pattern is an inverse letter immediately followed by a
    /// plain letter; inside a reduced word the two indices always differ.
    pub fn gamma_pair(&self, i: usize, j: usize) -> usize {
        self.letters
            .windows(2)
            .filter(|p| {
                p[0].sign == Sign::Negative
                    && p[1].sign == Sign::Positive
                    && ((p[0].index == i && p[1].index == j)
                        || (p[0].index == j && p[1].index == i))
            })
            .count()
    }

    /// Total number of inverse-then-plain junctions, `sum_{i>j} gamma_ij`.
    pub fn gamma_total(&self) -> usize {
        self.letters
            .windows(2)
            .filter(|p| p[0].sign == Sign::Negative && p[1].sign == Sign::Positive)
            .count()
    }

    /// Signed-index text form; the identity prints as the empty string.
    pub fn tokens(&self) -> String {
        self.letters
            .iter()
            .map(|l| l.token().to_string())
            .collect::<Vec<_>>()
            .join(" ")
    }

    /// Human form such as `u1 u2^-1`; the identity prints as `e`.
    pub fn pretty(&self) -> String {
        if self.letters.is_empty() {
            return "e".into();
        }
        self.letters
            .iter()
            .map(|l| match l.sign {
                Sign::Positive => format!("u{}", l.index),
                Sign::Negative => format!("u{}^-1", l.index),
            })
            .collect::<Vec<_>>()
            .join(" ")
    }
}

impl fmt::Display for ReducedWord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.tokens())
    }
}

/// All reduced words of length at most `max_len`, breadth-first by length
/// and lexicographic within each length. There are
/// `1 + sum_{m=1..L} 2n (2n-1)^(m-1)` of them.
pub fn enumerate_words(rank: usize, max_len: usize) -> Result<Vec<ReducedWord>> {
    let e = ReducedWord::identity(rank)?;
    let mut all = vec![e.clone()];
    let mut frontier = vec![e];
    let letters = alphabet(rank);
    for _ in 0..max_len {
        let mut next = Vec::with_capacity(frontier.len() * (2 * rank));
        for w in &frontier {
            for &l in &letters {
                if w.last() != Some(l.inverse()) {
                    let mut ls = w.letters.clone();
                    ls.push(l);
                    next.push(ReducedWord { rank, letters: ls });
                }
            }
        }
        all.extend(next.iter().cloned());
        frontier = next;
    }
    Ok(all)
}

/// All reduced words of exactly the given length, in lexicographic order.
pub fn enumerate_words_of_length(rank: usize, len: usize) -> Result<Vec<ReducedWord>> {
    let mut frontier = vec![ReducedWord::identity(rank)?];
    let letters = alphabet(rank);
    for _ in 0..len {
        let mut next = Vec::with_capacity(frontier.len() * (2 * rank));
        for w in &frontier {
            for &l in &letters {
                if w.last() != Some(l.inverse()) {
                    let mut ls = w.letters.clone();
                    ls.push(l);
                    next.push(ReducedWord { rank, letters: ls });
                }
            }
        }
        frontier = next;
    }
    Ok(frontier)
}

/// All `n^len` positive words (no inverse letters) of exactly the given
/// length, in lexicographic index order. This order makes the first letter
/// the major index: `u_i w` sits at position `(i-1) n^(len-1) + position(w)`,
/// which is what the Gram block recursion expects.
pub fn enumerate_positive(rank: usize, len: usize) -> Result<Vec<ReducedWord>> {
    if rank == 0 {
        return Err(Error::ZeroRank);
    }
    let mut out = vec![ReducedWord::identity(rank)?];
    for _ in 0..len {
        let mut next = Vec::with_capacity(out.len() * rank);
        for w in &out {
            for i in 1..=rank {
                let mut ls = w.letters.clone();
                ls.push(Letter::positive(i));
                next.push(ReducedWord { rank, letters: ls });
            }
        }
        out = next;
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn w(text: &str, rank: usize) -> ReducedWord {
        ReducedWord::parse(text, rank).unwrap()
    }

    #[test]
    fn parse_reduces() {
        assert_eq!(w("1 -1", 2), ReducedWord::identity(2).unwrap());
        assert_eq!(w("1 2 -2 -1 1", 2), w("1", 2));
        assert_eq!(w("", 3).len(), 0);
        assert_eq!(w("1 -2 1", 2).tokens(), "1 -2 1");
    }

    #[test]
    fn parse_rejects_bad_tokens() {
        assert!(matches!(ReducedWord::parse("x", 2), Err(Error::BadToken { .. })));
        assert!(matches!(ReducedWord::parse("0", 2), Err(Error::BadToken { .. })));
        assert!(matches!(ReducedWord::parse("3", 2), Err(Error::IndexOutOfRange { .. })));
        assert!(matches!(ReducedWord::parse("-3", 2), Err(Error::IndexOutOfRange { .. })));
    }

    #[test]
    fn concat_checks_rank() {
        let a = w("1", 2);
        let b = w("1", 3);
        assert!(matches!(a.concat(&b), Err(Error::RankMismatch { .. })));
    }

    #[test]
    fn group_laws_on_small_words() {
        let ws = enumerate_words(2, 3).unwrap();
        for a in &ws {
            assert!(a.concat(&a.inverse()).unwrap().is_identity());
            assert_eq!(&a.inverse().inverse(), a);
            for b in ws.iter().step_by(7) {
                for c in ws.iter().step_by(11) {
                    let left = a.concat(b).unwrap().concat(c).unwrap();
                    let right = a.concat(&b.concat(c).unwrap()).unwrap();
                    assert_eq!(left, right);
                }
            }
        }
    }

    #[test]
    fn statistics() {
        let s = w("-1 2 -3 1 1", 3);
        assert_eq!(s.letter_count(1), 3);
        assert_eq!(s.letter_count(2), 1);
        assert_eq!(s.gamma_pair(1, 2), 1);
        assert_eq!(s.gamma_pair(1, 3), 1);
        assert_eq!(s.gamma_pair(2, 3), 0);
        assert_eq!(s.gamma_total(), 2);
        // statistics are inversion invariant
        let si = s.inverse();
        for i in 1..=3 {
            assert_eq!(s.letter_count(i), si.letter_count(i));
            for j in 1..=3 {
                if i != j {
                    assert_eq!(s.gamma_pair(i, j), si.gamma_pair(i, j));
                }
            }
        }
        assert_eq!(s.gamma_total(), si.gamma_total());
    }

    #[test]
    fn enumeration_counts_and_order() {
        let ws = enumerate_words(2, 2).unwrap();
        assert_eq!(ws.len(), 17);
        // breadth-first by length
        for p in ws.windows(2) {
            assert!(p[0].len() <= p[1].len());
        }
        // lexicographic within a length
        for p in ws.windows(2) {
            if p[0].len() == p[1].len() {
                assert!(p[0].letters() < p[1].letters());
            }
        }
        let pos = enumerate_positive(2, 2).unwrap();
        let toks: Vec<String> = pos.iter().map(|w| w.tokens()).collect();
        assert_eq!(toks, ["1 1", "1 2", "2 1", "2 2"]);
        assert_eq!(enumerate_positive(3, 4).unwrap().len(), 81);
        assert_eq!(enumerate_words_of_length(3, 2).unwrap().len(), 30);
    }

    #[test]
    fn letter_order_is_plain_before_inverse() {
        let a = alphabet(2);
        assert_eq!(
            a,
            vec![
                Letter::positive(1),
                Letter::negative(1),
                Letter::positive(2),
                Letter::negative(2)
            ]
        );
        assert!(Letter::positive(1) < Letter::negative(1));
        assert!(Letter::negative(1) < Letter::positive(2));
    }

    #[test]
    fn gamma_counts_only_inverse_then_plain() {
        // plain-then-inverse junctions do not count
        assert_eq!(w("1 -2", 2).gamma_total(), 0);
        assert_eq!(w("-1 2", 2).gamma_total(), 1);
        assert_eq!(w("-1 -1 2", 2).gamma_total(), 1);
    }
}
