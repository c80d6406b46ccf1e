//! Classical and two-step permutation statistics.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::perm::Permutation;

/// `{i ∈ [n−1] : p(i) > p(i+1)}`.
pub fn descent_set(p: &Permutation) -> Vec<usize> {
    (1..p.len()).filter(|&i| p.at(i) > p.at(i + 1)).collect()
}

pub fn des(p: &Permutation) -> usize {
    descent_set(p).len()
}

pub fn maj(p: &Permutation) -> usize {
    descent_set(p).iter().sum()
}

/// `{i : p(i) > i}`.
pub fn exceedance_set(p: &Permutation) -> Vec<usize> {
    (1..=p.len()).filter(|&i| p.at(i) > i).collect()
}

pub fn exc(p: &Permutation) -> usize {
    exceedance_set(p).len()
}

/// `p(EXC(p))`, sorted ascending.
pub fn exceedance_values(p: &Permutation) -> Vec<usize> {
    let mut v: Vec<usize> = exceedance_set(p).into_iter().map(|i| p.at(i)).collect();
    v.sort_unstable();
    v
}

pub fn inv(p: &Permutation) -> usize {
    let w = p.word();
    let mut count = 0;
    for i in 0..w.len() {
        for j in i + 1..w.len() {
            if w[i] > w[j] {
                count += 1;
            }
        }
    }
    count
}

/// Descent number of the inverse.
pub fn ides(p: &Permutation) -> usize {
    des(&p.inverse())
}

/// `{i ∈ [n−1] : p(i) > p(i+1) + 1}`.
pub fn two_descent_set(p: &Permutation) -> Vec<usize> {
    (1..p.len()).filter(|&i| p.at(i) > p.at(i + 1) + 1).collect()
}

pub fn des2(p: &Permutation) -> usize {
    two_descent_set(p).len()
}

pub fn maj2(p: &Permutation) -> usize {
    two_descent_set(p).iter().sum()
}

/// The pairs `(i, j)`, `i < j`, with `p(i) = p(j) + 1`, sorted by `i`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TwoInversionSet {
    pub pairs: Vec<(usize, usize)>,
}

impl TwoInversionSet {
    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    /// Beginnings `i_1 < i_2 < …`.
    pub fn beginnings(&self) -> Vec<usize> {
        self.pairs.iter().map(|&(i, _)| i).collect()
    }

    /// Ends `j_1, j_2, …` in the order of their beginnings.
    pub fn ends(&self) -> Vec<usize> {
        self.pairs.iter().map(|&(_, j)| j).collect()
    }

    /// `next[i] = Some(j)` when `(i, j)` is a pair; indexed by position.
    pub fn successor_table(&self, n: usize) -> Vec<Option<usize>> {
        let mut next = vec![None; n + 1];
        for &(i, j) in &self.pairs {
            next[i] = Some(j);
        }
        next
    }
}

pub fn two_inversion_set(p: &Permutation) -> TwoInversionSet {
    let pos = p.inverse();
    let pairs = (1..=p.len())
        .filter_map(|i| {
            let v = p.at(i);
            (v > 1 && pos.at(v - 1) > i).then(|| (i, pos.at(v - 1)))
        })
        .collect();
    TwoInversionSet { pairs }
}

pub fn inv2(p: &Permutation) -> usize {
    two_inversion_set(p).len()
}

/// Property 𝒫 behind the twisted two-descent number.
///
/// Walks the chain `d < d′ < d″ < …` of 2-descents starting at the first one
/// preceded only by fixed points (else at 0 with `p(0) = n+1`), ending at `n`.
/// On each window `]d, d′[` every 2-inversion beginning `i` must satisfy
/// `p(d) < p(i)`, except beginnings reached by a chain of 2-inversions from a
/// beginning in `[d, d′[`. The walk stops successfully when `d′` begins no
/// 2-inversion, when `p(d) < p(d′)`, or when `d′` itself is such a chained
/// beginning; otherwise it moves on to `d′`.
pub fn property_p(p: &Permutation) -> bool {
    let n = p.len();
    let d2 = two_descent_set(p);
    let next = two_inversion_set(p).successor_table(n);
    let val = |i: usize| if i == 0 { n + 1 } else { p.at(i) };

    let mut start = 0;
    if let Some(&first) = d2.first() {
        if (1..first).all(|i| p.at(i) == i) {
            start = first;
        }
    }
    let mut chain = vec![start];
    chain.extend(d2.iter().copied().filter(|&x| x > start));
    chain.push(n);

    for w in chain.windows(2) {
        let (d, dp) = (w[0], w[1]);
        let mut chained = vec![false; n + 1];
        for x in d.max(1)..dp {
            let mut a = x;
            while let Some(b) = next[a] {
                chained[b] = true;
                a = b;
            }
        }
        let violated =
            (d + 1..dp).any(|i| next[i].is_some() && !chained[i] && val(d) >= val(i));
        if violated {
            return false;
        }
        if next[dp].is_none() || val(d) < val(dp) || chained[dp] {
            return true;
        }
    }
    // The last link ends at n, which begins no 2-inversion.
    true
}

/// `des₂` if 𝒫 holds, else `des₂ + 1`.
pub fn des2_tilde(p: &Permutation) -> usize {
    des2(p) + usize::from(!property_p(p))
}

/// `{i ∈ [n−1] : p(i) + 1 < p(i+1)}`, the ascent analogue of 2-descents.
pub fn two_ascent_set(p: &Permutation) -> Vec<usize> {
    (1..p.len()).filter(|&i| p.at(i) + 1 < p.at(i + 1)).collect()
}

pub fn asc2(p: &Permutation) -> usize {
    two_ascent_set(p).len()
}

pub fn amaj2(p: &Permutation) -> usize {
    two_ascent_set(p).iter().sum()
}

/// `asc₂ + [p(1) ≠ 1]`.
pub fn asc2_tilde(p: &Permutation) -> usize {
    asc2(p) + usize::from(p.at(1) != 1)
}

/// Named statistic vectors.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum StatVector {
    /// `(maj₂, d̃es₂, inv₂)`.
    Lhs,
    /// `(maj − exc, des, exc)`.
    Rhs,
    /// `(amaj₂, ãsc₂, ides)`.
    Hl,
}

impl StatVector {
    pub const ALL: [StatVector; 3] = [StatVector::Lhs, StatVector::Rhs, StatVector::Hl];

    pub fn name(self) -> &'static str {
        match self {
            StatVector::Lhs => "lhs",
            StatVector::Rhs => "rhs",
            StatVector::Hl => "hl",
        }
    }
}

impl fmt::Display for StatVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for StatVector {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "lhs" => Ok(StatVector::Lhs),
            "rhs" => Ok(StatVector::Rhs),
            "hl" => Ok(StatVector::Hl),
            _ => Err(Error::UnknownToken { what: "statistic vector", token: s.into() }),
        }
    }
}

/// Exponent triple of one permutation under a named vector.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct StatTriple {
    pub x: usize,
    pub y: usize,
    pub z: usize,
    pub vector: StatVector,
}

impl StatTriple {
    pub fn as_tuple(&self) -> (usize, usize, usize) {
        (self.x, self.y, self.z)
    }
}

pub fn stat_vector(p: &Permutation, vector: StatVector) -> StatTriple {
    let (x, y, z) = match vector {
        StatVector::Lhs => (maj2(p), des2_tilde(p), inv2(p)),
        StatVector::Rhs => (maj(p) - exc(p), des(p), exc(p)),
        StatVector::Hl => (amaj2(p), asc2_tilde(p), ides(p)),
    };
    StatTriple { x, y, z, vector }
}

/// Single statistics addressable by name.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Stat {
    Des,
    Exc,
    Maj,
    Inv,
    Ides,
    Des2,
    Inv2,
    Maj2,
    Asc2,
    Amaj2,
    Asc2Tilde,
    Des2Tilde,
}

impl Stat {
    pub const ALL: [Stat; 12] = [
        Stat::Des,
        Stat::Exc,
        Stat::Maj,
        Stat::Inv,
        Stat::Ides,
        Stat::Des2,
        Stat::Inv2,
        Stat::Maj2,
        Stat::Asc2,
        Stat::Amaj2,
        Stat::Asc2Tilde,
        Stat::Des2Tilde,
    ];

    pub fn token(self) -> &'static str {
        match self {
            Stat::Des => "des",
            Stat::Exc => "exc",
            Stat::Maj => "maj",
            Stat::Inv => "inv",
            Stat::Ides => "ides",
            Stat::Des2 => "des2",
            Stat::Inv2 => "inv2",
            Stat::Maj2 => "maj2",
            Stat::Asc2 => "asc2",
            Stat::Amaj2 => "amaj2",
            Stat::Asc2Tilde => "asc2t",
            Stat::Des2Tilde => "des2t",
        }
    }

    pub fn eval(self, p: &Permutation) -> usize {
        match self {
            Stat::Des => des(p),
            Stat::Exc => exc(p),
            Stat::Maj => maj(p),
            Stat::Inv => inv(p),
            Stat::Ides => ides(p),
            Stat::Des2 => des2(p),
            Stat::Inv2 => inv2(p),
            Stat::Maj2 => maj2(p),
            Stat::Asc2 => asc2(p),
            Stat::Amaj2 => amaj2(p),
            Stat::Asc2Tilde => asc2_tilde(p),
            Stat::Des2Tilde => des2_tilde(p),
        }
    }
}

impl FromStr for Stat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Stat::ALL
            .into_iter()
            .find(|st| st.token() == s)
            .ok_or_else(|| Error::UnknownToken { what: "statistic", token: s.into() })
    }
}

/// Parses a comma-separated list of statistic tokens.
pub fn parse_stat_list(s: &str) -> Result<Vec<Stat>> {
    s.split(',').map(|t| t.trim().parse()).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::perm::enumerate;

    fn p(s: &str) -> Permutation {
        s.parse().unwrap()
    }

    #[test]
    fn descents() {
        let q = p("32541");
        assert_eq!(descent_set(&q), vec![1, 3, 4]);
        assert_eq!((des(&q), maj(&q)), (3, 8));
        assert_eq!((descent_set(&p("12345")), maj(&p("12345"))), (vec![], 0));
        assert_eq!((descent_set(&p("21")), des(&p("21")), maj(&p("21"))), (vec![1], 1, 1));
    }

    #[test]
    fn exceedances() {
        let t = p("956382471");
        assert_eq!(exceedance_set(&t), vec![1, 2, 3, 5]);
        assert_eq!(exc(&t), 4);
        assert_eq!(exceedance_values(&t), vec![5, 6, 8, 9]);
        assert_eq!(exceedance_set(&p("123")), Vec::<usize>::new());
        assert_eq!(exceedance_set(&p("32541")), vec![1, 3]);
    }

    #[test]
    fn inversions() {
        assert_eq!(ides(&p("34251")), 2);
        assert_eq!((inv(&p("1234")), ides(&p("1234"))), (0, 0));
        assert_eq!(inv(&p("4321")), 6);
    }

    #[test]
    fn two_descents() {
        let s0 = p("425736981");
        assert_eq!(two_descent_set(&s0), vec![1, 4, 8]);
        assert_eq!(maj2(&s0), 13);
        assert_eq!((two_descent_set(&p("34251")), maj2(&p("34251"))), (vec![2, 4], 6));
        assert!(two_descent_set(&p("1234")).is_empty());
    }

    #[test]
    fn two_inversions() {
        assert_eq!(
            two_inversion_set(&p("425736981")).pairs,
            vec![(1, 5), (2, 9), (4, 6), (7, 8)]
        );
        assert_eq!(
            two_inversion_set(&p("549321867")).pairs,
            vec![(1, 2), (2, 4), (3, 7), (4, 5), (5, 6), (7, 9)]
        );
        assert_eq!(inv2(&p("549321867")), 6);
        assert_eq!(inv2(&p("123")), 0);
    }

    #[test]
    fn twisted_two_descents() {
        assert_eq!(des2_tilde(&p("34251")), 3);
        assert_eq!(des2_tilde(&p("12345")), 0);
        assert_eq!(des2_tilde(&p("21")), 1);
        assert_eq!(des2_tilde(&p("1")), 0);
    }

    #[test]
    fn two_ascents() {
        let id = p("12345");
        assert_eq!((two_ascent_set(&id), amaj2(&id), asc2_tilde(&id)), (vec![], 0, 0));
        let q = p("21");
        assert_eq!((two_ascent_set(&q), amaj2(&q), asc2_tilde(&q)), (vec![], 0, 1));
        let q = p("132");
        assert_eq!((two_ascent_set(&q), amaj2(&q), asc2_tilde(&q)), (vec![1], 1, 1));
    }

    #[test]
    fn vectors() {
        assert_eq!(stat_vector(&p("34251"), StatVector::Lhs).as_tuple(), (6, 3, 2));
        assert_eq!(stat_vector(&p("32541"), StatVector::Rhs).as_tuple(), (6, 3, 2));
        assert_eq!(stat_vector(&p("1234"), StatVector::Lhs).as_tuple(), (0, 0, 0));
        assert_eq!(stat_vector(&p("1234"), StatVector::Rhs).as_tuple(), (0, 0, 0));
        assert_eq!("HL".parse::<StatVector>().unwrap(), StatVector::Hl);
        assert!("xyz".parse::<StatVector>().is_err());
    }

    #[test]
    fn tokens_round_trip() {
        for st in Stat::ALL {
            assert_eq!(st.token().parse::<Stat>().unwrap(), st);
        }
        assert_eq!(
            parse_stat_list("maj2,des2t,inv2").unwrap(),
            vec![Stat::Maj2, Stat::Des2Tilde, Stat::Inv2]
        );
        assert!(parse_stat_list("maj,foo").is_err());
    }

    #[test]
    fn exhaustive_relations_small_n() {
        for n in 1..=7 {
            for q in enumerate(n).unwrap() {
                assert_eq!(inv2(&q), ides(&q), "{q}");
                let (d2, d2t) = (des2(&q), des2_tilde(&q));
                assert!(d2t == d2 || d2t == d2 + 1);
                let big: Vec<_> = descent_set(&q);
                assert!(two_descent_set(&q).iter().all(|i| big.contains(i)));
                assert!(maj2(&q) <= maj(&q));
                let ends = two_inversion_set(&q).beginnings();
                assert!(ends.windows(2).all(|w| w[0] < w[1]));
            }
        }
    }
}
