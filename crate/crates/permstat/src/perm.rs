//! One-line permutations of `[n]`, parsing, inversion and lexicographic enumeration.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Largest `n` accepted by [`enumerate`] and everything built on it.
pub const MAX_N: usize = 12;

/// A permutation stored as its one-line word; positions and values are 1-based.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "Vec<usize>", into = "Vec<usize>")]
pub struct Permutation {
    word: Vec<usize>,
}

impl Permutation {
    /// Validates `word` as a rearrangement of `1..=n`.
    pub fn new(word: Vec<usize>) -> Result<Self> {
        let n = word.len();
        if n == 0 {
            return Err(Error::Validation("empty word".into()));
        }
        let mut seen = vec![false; n + 1];
        for &v in &word {
            if v == 0 || v > n {
                return Err(Error::Validation(format!("value {v} out of range 1..={n}")));
            }
            if seen[v] {
                return Err(Error::Validation(format!("value {v} repeated")));
            }
            seen[v] = true;
        }
        Ok(Permutation { word })
    }

    pub fn identity(n: usize) -> Self {
        Permutation { word: (1..=n).collect() }
    }

    pub fn len(&self) -> usize {
        self.word.len()
    }

    pub fn is_empty(&self) -> bool {
        self.word.is_empty()
    }

    /// `σ(i)` for `1 ≤ i ≤ n`.
    #[inline]
    pub fn at(&self, i: usize) -> usize {
        self.word[i - 1]
    }

    pub fn word(&self) -> &[usize] {
        &self.word
    }

    pub fn into_word(self) -> Vec<usize> {
        self.word
    }

    pub fn is_identity(&self) -> bool {
        self.word.iter().enumerate().all(|(i, &v)| v == i + 1)
    }

    /// The permutation `q` with `q(p(i)) = i`.
    pub fn inverse(&self) -> Permutation {
        let mut inv = vec![0; self.len()];
        for (i, &v) in self.word.iter().enumerate() {
            inv[v - 1] = i + 1;
        }
        Permutation { word: inv }
    }

    /// `(self ∘ other)(i) = self(other(i))`.
    pub fn compose(&self, other: &Permutation) -> Result<Permutation> {
        if self.len() != other.len() {
            return Err(Error::Validation(format!(
                "cannot compose sizes {} and {}",
                self.len(),
                other.len()
            )));
        }
        Ok(Permutation {
            word: other.word.iter().map(|&j| self.at(j)).collect(),
        })
    }

    /// Swaps the values at positions `a` and `b` (1-based).
    pub fn swapped(&self, a: usize, b: usize) -> Permutation {
        let mut word = self.word.clone();
        word.swap(a - 1, b - 1);
        Permutation { word }
    }

    /// Digit form without separators; only defined for `n ≤ 9`.
    pub fn to_digits(&self) -> Option<String> {
        (self.len() <= 9).then(|| self.word.iter().map(|v| v.to_string()).collect())
    }
}

impl fmt::Display for Permutation {
    /// Canonical comma-separated form.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, v) in self.word.iter().enumerate() {
            if i > 0 {
                f.write_str(",")?;
            }
            write!(f, "{v}")?;
        }
        Ok(())
    }
}

impl FromStr for Permutation {
    type Err = Error;

    fn from_str(text: &str) -> Result<Self> {
        parse_permutation(text)
    }
}

impl TryFrom<Vec<usize>> for Permutation {
    type Error = Error;

    fn try_from(word: Vec<usize>) -> Result<Self> {
        Permutation::new(word)
    }
}

impl From<Permutation> for Vec<usize> {
    fn from(p: Permutation) -> Vec<usize> {
        p.word
    }
}

/// Parses either a digit string (`n ≤ 9`) or comma-separated values.
pub fn parse_permutation(text: &str) -> Result<Permutation> {
    let text = text.trim();
    if text.is_empty() {
        return Err(Error::Validation("empty input".into()));
    }
    let word: Vec<usize> = if text.contains(',') {
        text.split(',')
            .map(|tok| {
                let tok = tok.trim();
                tok.parse::<usize>()
                    .map_err(|_| Error::Validation(format!("value {tok:?} is not a positive integer")))
            })
            .collect::<Result<_>>()?
    } else {
        if !text.bytes().all(|b| b.is_ascii_digit()) {
            return Err(Error::Validation(format!("{text:?} is neither digits nor comma-separated")));
        }
        if text.len() > 9 {
            return Err(Error::Validation(format!(
                "digit form is ambiguous for n = {}; use commas",
                text.len()
            )));
        }
        text.bytes().map(|b| (b - b'0') as usize).collect()
    };
    Permutation::new(word)
}

fn check_cap(n: usize) -> Result<()> {
    if n == 0 || n > MAX_N {
        return Err(Error::Capacity { n, cap: MAX_N });
    }
    Ok(())
}

/// `n!` as `u64` (exact for `n ≤ 20`).
pub fn factorial(n: usize) -> u64 {
    (1..=n as u64).product()
}

/// Lexicographic rank of `p` among the permutations of its size.
pub fn rank(p: &Permutation) -> u64 {
    let n = p.len();
    let mut used = vec![false; n + 1];
    let mut r = 0u64;
    for (i, &v) in p.word().iter().enumerate() {
        let smaller = (1..v).filter(|&x| !used[x]).count() as u64;
        r += smaller * factorial(n - 1 - i);
        used[v] = true;
    }
    r
}

/// The permutation of size `n` with lexicographic rank `r`.
pub fn unrank(n: usize, mut r: u64) -> Result<Permutation> {
    check_cap(n)?;
    if r >= factorial(n) {
        return Err(Error::Validation(format!("rank {r} out of range for n = {n}")));
    }
    let mut pool: Vec<usize> = (1..=n).collect();
    let mut word = Vec::with_capacity(n);
    for i in 0..n {
        let f = factorial(n - 1 - i);
        let idx = (r / f) as usize;
        r %= f;
        word.push(pool.remove(idx));
    }
    Ok(Permutation { word })
}

/// Advances `a` to its lexicographic successor; false on the last word.
pub fn next_permutation(a: &mut [usize]) -> bool {
    if a.len() < 2 {
        return false;
    }
    let Some(i) = (0..a.len() - 1).rfind(|&i| a[i] < a[i + 1]) else {
        return false;
    };
    let j = a.iter().rposition(|x| *x > a[i]).unwrap();
    a.swap(i, j);
    a[i + 1..].reverse();
    true
}

/// Lexicographic stream over a contiguous rank range of `S_n`.
#[derive(Debug, Clone)]
pub struct Enumeration {
    current: Option<Vec<usize>>,
    remaining: u64,
}

impl Iterator for Enumeration {
    type Item = Permutation;

    fn next(&mut self) -> Option<Permutation> {
        if self.remaining == 0 {
            return None;
        }
        let word = self.current.as_mut()?;
        let out = Permutation { word: word.clone() };
        self.remaining -= 1;
        if self.remaining > 0 && !next_permutation(word) {
            self.remaining = 0;
        }
        Some(out)
    }

    fn size_hint(&self) -> (usize, Option<usize>) {
        let r = self.remaining as usize;
        (r, Some(r))
    }
}

impl ExactSizeIterator for Enumeration {}

/// All of `S_n` in lexicographic order.
pub fn enumerate(n: usize) -> Result<Enumeration> {
    enumerate_range(n, 0, factorial(n.min(MAX_N)))
}

/// Permutations with lexicographic rank in `start..end`.
pub fn enumerate_range(n: usize, start: u64, end: u64) -> Result<Enumeration> {
    check_cap(n)?;
    let end = end.min(factorial(n));
    if start >= end {
        return Ok(Enumeration { current: None, remaining: 0 });
    }
    Ok(Enumeration {
        current: Some(unrank(n, start)?.word),
        remaining: end - start,
    })
}

/// Splits `0..n!` into `parts` contiguous rank ranges of near-equal size.
pub fn rank_partitions(n: usize, parts: usize) -> Vec<(u64, u64)> {
    let total = factorial(n);
    let parts = (parts.max(1) as u64).min(total.max(1));
    (0..parts)
        .map(|k| (total * k / parts, total * (k + 1) / parts))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(w: &[usize]) -> Permutation {
        Permutation::new(w.to_vec()).unwrap()
    }

    #[test]
    fn parses_digit_and_comma_forms() {
        assert_eq!(parse_permutation("425736981").unwrap().word(), &[4, 2, 5, 7, 3, 6, 9, 8, 1]);
        assert_eq!(parse_permutation("1").unwrap().word(), &[1]);
        assert_eq!(parse_permutation("3,1,2").unwrap().word(), &[3, 1, 2]);
        assert_eq!(parse_permutation("10,1,2,3,4,5,6,7,8,9").unwrap().len(), 10);
    }

    #[test]
    fn rejects_non_permutations() {
        let e = parse_permutation("1,2,2").unwrap_err();
        assert!(e.to_string().contains("value 2"), "{e}");
        let e = parse_permutation("1,4,2").unwrap_err();
        assert!(e.to_string().contains("value 4"), "{e}");
        assert!(parse_permutation("0,1").is_err());
        assert!(parse_permutation("1234567891").is_err());
        assert!(parse_permutation("12a").is_err());
        assert!(parse_permutation("").is_err());
    }

    #[test]
    fn inverse_examples() {
        assert_eq!(p(&[3, 4, 2, 5, 1]).inverse(), p(&[5, 3, 1, 2, 4]));
        assert_eq!(Permutation::identity(4).inverse(), Permutation::identity(4));
        assert_eq!(p(&[2, 1]).inverse(), p(&[2, 1]));
    }

    #[test]
    fn enumeration_order_and_counts() {
        let all: Vec<_> = enumerate(3).unwrap().collect();
        assert_eq!(all.len(), 6);
        assert_eq!(all[0], p(&[1, 2, 3]));
        assert_eq!(all[5], p(&[3, 2, 1]));
        assert_eq!(enumerate(1).unwrap().collect::<Vec<_>>(), vec![p(&[1])]);
        assert_eq!(enumerate(8).unwrap().count(), 40320);
        assert!(matches!(enumerate(MAX_N + 1), Err(Error::Capacity { .. })));
        assert!(matches!(enumerate(0), Err(Error::Capacity { .. })));
    }

    #[test]
    fn partitions_concatenate_to_full_order() {
        let full: Vec<_> = enumerate(5).unwrap().collect();
        let mut joined = Vec::new();
        for (a, b) in rank_partitions(5, 7) {
            joined.extend(enumerate_range(5, a, b).unwrap());
        }
        assert_eq!(full, joined);
    }

    #[test]
    fn rank_unrank_round_trip() {
        for (r, q) in enumerate(5).unwrap().enumerate() {
            assert_eq!(rank(&q), r as u64);
            assert_eq!(unrank(5, r as u64).unwrap(), q);
        }
    }

    #[test]
    fn compose_with_inverse_is_identity() {
        for q in enumerate(6).unwrap() {
            assert!(q.compose(&q.inverse()).unwrap().is_identity());
            assert_eq!(parse_permutation(&q.to_string()).unwrap(), q);
        }
    }
}
