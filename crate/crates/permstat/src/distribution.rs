//! Joint distributions of statistic vectors over `S_n`, identity checks,
//! reference q-series and the enumeration oracle for the inverse map.

use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::hash::{Hash, Hasher};
use std::path::{Path, PathBuf};
use std::str::FromStr;

use num_bigint::BigUint;
use num_traits::{One, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::forward::phi;
use crate::perm::{enumerate, enumerate_range, rank_partitions, Permutation, MAX_N};
use crate::stats::{stat_vector, Stat, StatVector};

/// Exponent triple `(a, b, c)` of `x^a y^b z^c`.
pub type Exponents = (usize, usize, usize);

/// Sparse trivariate polynomial with positive integer coefficients.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Polynomial3 {
    terms: BTreeMap<Exponents, BigUint>,
}

impl Polynomial3 {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add_term(&mut self, e: Exponents, coeff: impl Into<BigUint>) {
        let coeff = coeff.into();
        if coeff.is_zero() {
            return;
        }
        *self.terms.entry(e).or_default() += coeff;
    }

    /// Coefficient-wise sum.
    pub fn merge(&mut self, other: Polynomial3) {
        for (e, c) in other.terms {
            self.add_term(e, c);
        }
    }

    pub fn coeff(&self, e: Exponents) -> BigUint {
        self.terms.get(&e).cloned().unwrap_or_default()
    }

    /// Terms in lexicographic order of exponents.
    pub fn terms(&self) -> impl Iterator<Item = (&Exponents, &BigUint)> {
        self.terms.iter()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    /// Sum of all coefficients (`n!` for a full distribution).
    pub fn total(&self) -> BigUint {
        self.terms.values().sum()
    }

    /// `y := 1`: the bivariate polynomial in `x` and `z`.
    pub fn specialize_y(&self) -> BTreeMap<(usize, usize), BigUint> {
        let mut out: BTreeMap<(usize, usize), BigUint> = BTreeMap::new();
        for (&(a, _, c), k) in &self.terms {
            *out.entry((a, c)).or_default() += k;
        }
        out
    }

    /// Univariate marginal in variable `axis` (0 = x, 1 = y, 2 = z).
    pub fn marginal(&self, axis: usize) -> Polynomial1 {
        let mut p = Polynomial1::default();
        for (&(a, b, c), k) in &self.terms {
            let e = [a, b, c][axis];
            p.add_term(e, k.clone());
        }
        p
    }

    pub fn to_table(&self, n: usize, vector: StatVector) -> Result<DistributionTable> {
        let terms = self
            .terms
            .iter()
            .map(|(&(a, b, c), k)| {
                let k = k.to_u64().ok_or_else(|| {
                    Error::Io(format!("coefficient {k} does not fit the export format"))
                })?;
                Ok([a as u64, b as u64, c as u64, k])
            })
            .collect::<Result<_>>()?;
        Ok(DistributionTable { n, vector, terms })
    }

    /// CSV with header `a,b,c,coeff`, rows sorted by exponents.
    pub fn to_csv(&self) -> String {
        let mut s = String::from("a,b,c,coeff\n");
        for (&(a, b, c), k) in &self.terms {
            s.push_str(&format!("{a},{b},{c},{k}\n"));
        }
        s
    }
}

/// JSON export form: `{"n", "vector", "terms": [[a, b, c, coeff], …]}`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DistributionTable {
    pub n: usize,
    pub vector: StatVector,
    pub terms: Vec<[u64; 4]>,
}

impl DistributionTable {
    pub fn to_polynomial(&self) -> Polynomial3 {
        let mut p = Polynomial3::new();
        for &[a, b, c, k] in &self.terms {
            p.add_term((a as usize, b as usize, c as usize), k);
        }
        p
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("table serializes")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Io(format!("bad distribution table: {e}")))
    }
}

/// Dense univariate polynomial; `coeffs[i]` multiplies `q^i`.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Polynomial1 {
    pub coeffs: Vec<BigUint>,
}

impl Polynomial1 {
    pub fn from_coeffs<I: IntoIterator<Item = u64>>(c: I) -> Self {
        let mut p = Polynomial1 { coeffs: c.into_iter().map(BigUint::from).collect() };
        p.trim();
        p
    }

    pub fn add_term(&mut self, e: usize, k: BigUint) {
        if self.coeffs.len() <= e {
            self.coeffs.resize(e + 1, BigUint::zero());
        }
        self.coeffs[e] += k;
        self.trim();
    }

    pub fn mul(&self, other: &Polynomial1) -> Polynomial1 {
        if self.coeffs.is_empty() || other.coeffs.is_empty() {
            return Polynomial1::default();
        }
        let mut out = vec![BigUint::zero(); self.coeffs.len() + other.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            for (j, b) in other.coeffs.iter().enumerate() {
                out[i + j] += a * b;
            }
        }
        let mut p = Polynomial1 { coeffs: out };
        p.trim();
        p
    }

    fn trim(&mut self) {
        while self.coeffs.last().is_some_and(Zero::is_zero) {
            self.coeffs.pop();
        }
    }
}

impl fmt::Display for Polynomial1 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for (i, k) in self.coeffs.iter().enumerate().filter(|(_, k)| !k.is_zero()) {
            if !first {
                f.write_str("+")?;
            }
            first = false;
            let coeff = if k.is_one() && i > 0 { String::new() } else { k.to_string() };
            match i {
                0 => write!(f, "{k}")?,
                1 => write!(f, "{coeff}q")?,
                _ => write!(f, "{coeff}q^{i}")?,
            }
        }
        if first {
            f.write_str("0")?;
        }
        Ok(())
    }
}

fn check_n(n: usize) -> Result<()> {
    if n == 0 || n > MAX_N {
        return Err(Error::Capacity { n, cap: MAX_N });
    }
    Ok(())
}

/// Runs `f` over `jobs` contiguous rank ranges of `S_n` on scoped threads
/// and returns the partial results in rank order.
pub(crate) fn fan_out<T: Send>(
    n: usize,
    jobs: usize,
    f: impl Fn(crate::perm::Enumeration) -> Result<T> + Sync,
) -> Result<Vec<T>> {
    check_n(n)?;
    let parts = rank_partitions(n, jobs);
    if parts.len() == 1 {
        return Ok(vec![f(enumerate(n)?)?]);
    }
    std::thread::scope(|s| {
        let handles: Vec<_> = parts
            .iter()
            .map(|&(a, b)| {
                let f = &f;
                s.spawn(move || f(enumerate_range(n, a, b)?))
            })
            .collect();
        handles.into_iter().map(|h| h.join().expect("worker panicked")).collect()
    })
}

/// `Σ_{p ∈ S_n} x^a y^b z^c` over `stat_vector(p, vector)`.
pub fn joint_distribution(n: usize, vector: StatVector) -> Result<Polynomial3> {
    joint_distribution_jobs(n, vector, 1)
}

/// [`joint_distribution`] split over `jobs` worker threads; the result does
/// not depend on `jobs`.
pub fn joint_distribution_jobs(n: usize, vector: StatVector, jobs: usize) -> Result<Polynomial3> {
    let partials = fan_out(n, jobs, |perms| {
        let mut counts: HashMap<Exponents, u64> = HashMap::new();
        for p in perms {
            *counts.entry(stat_vector(&p, vector).as_tuple()).or_default() += 1;
        }
        Ok(counts)
    })?;
    let mut poly = Polynomial3::new();
    for counts in partials {
        for (e, k) in counts {
            poly.add_term(e, k);
        }
    }
    Ok(poly)
}

/// `Σ_{p ∈ S_n} q^{stat(p)}`.
pub fn stat_distribution(n: usize, stat: Stat) -> Result<Polynomial1> {
    check_n(n)?;
    let mut counts = vec![0u64; n * n + 1];
    for p in enumerate(n)? {
        counts[stat.eval(&p)] += 1;
    }
    Ok(Polynomial1::from_coeffs(counts))
}

/// First exponent triple where two distributions differ.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Discrepancy {
    pub exponents: Exponents,
    pub lhs: String,
    pub rhs: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct IdentityReport {
    pub n: usize,
    pub lhs: StatVector,
    pub rhs: StatVector,
    pub equal: bool,
    pub first_discrepancy: Option<Discrepancy>,
}

/// Term-by-term comparison, smallest differing exponent first.
pub fn first_discrepancy(a: &Polynomial3, b: &Polynomial3) -> Option<Discrepancy> {
    let keys: std::collections::BTreeSet<&Exponents> = a.terms.keys().chain(b.terms.keys()).collect();
    keys.into_iter().find_map(|&e| {
        let (x, y) = (a.coeff(e), b.coeff(e));
        (x != y).then(|| Discrepancy { exponents: e, lhs: x.to_string(), rhs: y.to_string() })
    })
}

pub fn verify_identity(n: usize, lhs: StatVector, rhs: StatVector) -> Result<IdentityReport> {
    verify_identity_jobs(n, lhs, rhs, 1)
}

pub fn verify_identity_jobs(
    n: usize,
    lhs: StatVector,
    rhs: StatVector,
    jobs: usize,
) -> Result<IdentityReport> {
    let a = joint_distribution_jobs(n, lhs, jobs)?;
    let b = joint_distribution_jobs(n, rhs, jobs)?;
    let first_discrepancy = first_discrepancy(&a, &b);
    Ok(IdentityReport { n, lhs, rhs, equal: first_discrepancy.is_none(), first_discrepancy })
}

/// `{phi(p) ↦ p}` over `S_n`; a shared image is reported as a collision
/// naming both preimages.
pub fn oracle_inverse_table(n: usize) -> Result<BTreeMap<Permutation, Permutation>> {
    check_n(n)?;
    let mut table = BTreeMap::new();
    for p in enumerate(n)? {
        let image = phi(&p)?;
        if let Some(first) = table.get(&image) {
            return Err(Error::Collision {
                image: image.to_string(),
                first: Permutation::to_string(first),
                second: p.to_string(),
            });
        }
        table.insert(image, p);
    }
    Ok(table)
}

/// Reference univariate series.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum QKind {
    /// `[n]_q! = Π_{i=1}^n (1 + q + … + q^{i−1})`.
    QFactorial,
    /// `Σ_{p ∈ S_n} t^{des(p)}`.
    Eulerian,
}

impl FromStr for QKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "q_factorial" => Ok(QKind::QFactorial),
            "eulerian" => Ok(QKind::Eulerian),
            _ => Err(Error::UnknownToken { what: "reference series", token: s.into() }),
        }
    }
}

pub fn q_reference(n: usize, kind: QKind) -> Polynomial1 {
    match kind {
        QKind::QFactorial => (1..=n).fold(Polynomial1::from_coeffs([1]), |acc, i| {
            acc.mul(&Polynomial1::from_coeffs(std::iter::repeat_n(1, i)))
        }),
        QKind::Eulerian => eulerian(n),
    }
}

/// Eulerian numbers by the recurrence `A(n, k) = (k+1) A(n−1, k) + (n−k) A(n−1, k−1)`.
fn eulerian(n: usize) -> Polynomial1 {
    let mut row: Vec<BigUint> = vec![BigUint::one()];
    for m in 2..=n {
        let mut next = vec![BigUint::zero(); m];
        for k in 0..m {
            if k < row.len() {
                next[k] += &row[k] * BigUint::from(k + 1);
            }
            if k > 0 {
                next[k] += &row[k - 1] * BigUint::from(m - k);
            }
        }
        row = next;
    }
    let mut p = Polynomial1 { coeffs: row };
    p.trim();
    p
}

/// Environment variable naming the distribution cache directory.
pub const CACHE_ENV: &str = "PERMSTAT_CACHE_DIR";

/// Hash of the statistic and enumeration code, so edits invalidate caches.
pub fn code_version() -> u64 {
    let mut h = std::collections::hash_map::DefaultHasher::new();
    env!("CARGO_PKG_VERSION").hash(&mut h);
    include_str!("stats.rs").hash(&mut h);
    include_str!("perm.rs").hash(&mut h);
    h.finish()
}

/// Advisory on-disk cache of distribution tables keyed by
/// `(n, vector, code version)`.
#[derive(Debug, Clone)]
pub struct DistributionCache {
    pub dir: PathBuf,
}

impl DistributionCache {
    pub fn new(dir: impl Into<PathBuf>) -> Self {
        DistributionCache { dir: dir.into() }
    }

    /// `$PERMSTAT_CACHE_DIR`, else `permstat-cache` under the temp directory.
    pub fn from_env() -> Self {
        let dir = std::env::var_os(CACHE_ENV)
            .map(PathBuf::from)
            .unwrap_or_else(|| std::env::temp_dir().join("permstat-cache"));
        Self::new(dir)
    }

    pub fn path_for(&self, n: usize, vector: StatVector) -> PathBuf {
        self.dir.join(format!("{vector}-n{n}-{:016x}.json", code_version()))
    }

    pub fn load(&self, n: usize, vector: StatVector) -> Option<Polynomial3> {
        let text = std::fs::read_to_string(self.path_for(n, vector)).ok()?;
        let table = DistributionTable::from_json(&text).ok()?;
        (table.n == n && table.vector == vector).then(|| table.to_polynomial())
    }

    pub fn store(&self, n: usize, vector: StatVector, poly: &Polynomial3) -> Result<PathBuf> {
        std::fs::create_dir_all(&self.dir)?;
        let path = self.path_for(n, vector);
        write_atomic(&path, &poly.to_table(n, vector)?.to_json())?;
        Ok(path)
    }

    /// Cached table if present, else computed and stored; the flag tells
    /// whether the cache was hit. Store failures are ignored.
    pub fn get_or_compute(&self, n: usize, vector: StatVector, jobs: usize) -> Result<(Polynomial3, bool)> {
        if let Some(p) = self.load(n, vector) {
            return Ok((p, true));
        }
        let p = joint_distribution_jobs(n, vector, jobs)?;
        let _ = self.store(n, vector, &p);
        Ok((p, false))
    }
}

fn write_atomic(path: &Path, text: &str) -> Result<()> {
    let tmp = path.with_extension(format!("tmp{}", std::process::id()));
    std::fs::write(&tmp, text)?;
    std::fs::rename(&tmp, path)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_distributions() {
        let one = joint_distribution(1, StatVector::Lhs).unwrap();
        assert_eq!(one.terms().collect::<Vec<_>>(), vec![(&(0, 0, 0), &BigUint::one())]);
        for v in [StatVector::Lhs, StatVector::Rhs] {
            let d = joint_distribution(2, v).unwrap();
            assert_eq!(d.len(), 2);
            assert_eq!(d.coeff((0, 0, 0)), BigUint::one());
            assert_eq!(d.coeff((0, 1, 1)), BigUint::one());
        }
    }

    #[test]
    fn identities_at_six() {
        assert!(verify_identity(2, StatVector::Lhs, StatVector::Rhs).unwrap().equal);
        assert!(verify_identity(6, StatVector::Lhs, StatVector::Rhs).unwrap().equal);
        assert!(verify_identity(6, StatVector::Hl, StatVector::Rhs).unwrap().equal);
    }

    #[test]
    fn jobs_do_not_change_result() {
        let a = joint_distribution_jobs(6, StatVector::Hl, 1).unwrap();
        let b = joint_distribution_jobs(6, StatVector::Hl, 5).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.total(), BigUint::from(720u32));
    }

    #[test]
    fn discrepancy_is_reported() {
        let mut a = Polynomial3::new();
        a.add_term((0, 0, 0), 1u32);
        let mut b = a.clone();
        b.add_term((1, 0, 0), 2u32);
        let d = first_discrepancy(&a, &b).unwrap();
        assert_eq!((d.exponents, d.lhs.as_str(), d.rhs.as_str()), ((1, 0, 0), "0", "2"));
    }

    #[test]
    fn reference_series() {
        assert_eq!(q_reference(3, QKind::QFactorial), Polynomial1::from_coeffs([1, 2, 2, 1]));
        assert_eq!(q_reference(3, QKind::Eulerian), Polynomial1::from_coeffs([1, 4, 1]));
        assert_eq!(q_reference(1, QKind::QFactorial), Polynomial1::from_coeffs([1]));
        assert_eq!(q_reference(1, QKind::Eulerian), Polynomial1::from_coeffs([1]));
        assert_eq!(q_reference(3, QKind::QFactorial).to_string(), "1+2q+2q^2+q^3");
        assert_eq!(stat_distribution(6, Stat::Maj).unwrap(), q_reference(6, QKind::QFactorial));
        assert_eq!(stat_distribution(6, Stat::Des).unwrap(), q_reference(6, QKind::Eulerian));
    }

    #[test]
    fn oracle_small() {
        let t = oracle_inverse_table(1).unwrap();
        assert_eq!(t.len(), 1);
        assert_eq!(oracle_inverse_table(5).unwrap().len(), 120);
        assert!(matches!(oracle_inverse_table(6), Err(Error::Collision { .. })));
    }

    #[test]
    fn json_and_csv_round_trip() {
        let d = joint_distribution(4, StatVector::Rhs).unwrap();
        let table = d.to_table(4, StatVector::Rhs).unwrap();
        let back = DistributionTable::from_json(&table.to_json()).unwrap();
        assert_eq!(back.to_polynomial(), d);
        assert!(table.to_json().starts_with(r#"{"n":4,"vector":"rhs","terms":[[0,0,0,1]"#));
        let csv = d.to_csv();
        assert!(csv.starts_with("a,b,c,coeff\n0,0,0,1\n"));
        assert_eq!(csv.lines().count(), d.len() + 1);
    }

    #[test]
    fn cache_hits_after_store() {
        let dir = std::env::temp_dir().join(format!("permstat-test-{}", std::process::id()));
        let cache = DistributionCache::new(&dir);
        let (a, hit) = cache.get_or_compute(5, StatVector::Lhs, 2).unwrap();
        assert!(!hit);
        let (b, hit) = cache.get_or_compute(5, StatVector::Lhs, 1).unwrap();
        assert!(hit);
        assert_eq!(a, b);
        std::fs::remove_dir_all(dir).unwrap();
    }
}
