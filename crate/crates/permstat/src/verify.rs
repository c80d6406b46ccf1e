//! Exhaustive checks over `S_n`, each reporting pass/fail with the first
//! counterexample in lexicographic order.

use std::fmt;
use std::str::FromStr;

use serde::Serialize;

use crate::distribution::{
    fan_out, joint_distribution_jobs, q_reference, stat_distribution, verify_identity_jobs, QKind,
};
use crate::error::{Error, Result};
use crate::forward::phi;
use crate::stats::{stat_vector, Stat, StatVector};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Check {
    /// `phi` is injective (hence bijective) on `S_n`.
    Bijection,
    /// `phi` carries `(maj₂, d̃es₂, inv₂)` to `(maj − exc, des, exc)`.
    Triple,
    /// `(maj₂, inv₂)` and `(maj − exc, exc)` are equidistributed.
    Eq1,
    /// `(amaj₂, ãsc₂, ides)` and `(maj − exc, des, exc)` are equidistributed.
    Eq2,
    /// `(maj₂, d̃es₂, inv₂)` and `(maj − exc, des, exc)` are equidistributed.
    Eq3,
    /// `maj` is Mahonian; `des` and `exc` are Eulerian.
    Mahonian,
}

impl Check {
    pub const ALL: [Check; 6] =
        [Check::Bijection, Check::Triple, Check::Eq1, Check::Eq2, Check::Eq3, Check::Mahonian];

    pub fn token(self) -> &'static str {
        match self {
            Check::Bijection => "bijection",
            Check::Triple => "triple",
            Check::Eq1 => "eq1",
            Check::Eq2 => "eq2",
            Check::Eq3 => "eq3",
            Check::Mahonian => "mahonian",
        }
    }
}

impl fmt::Display for Check {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.token())
    }
}

impl FromStr for Check {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Check::ALL
            .into_iter()
            .find(|c| c.token() == s)
            .ok_or_else(|| Error::UnknownToken { what: "check", token: s.into() })
    }
}

pub fn parse_check_list(s: &str) -> Result<Vec<Check>> {
    s.split(',').map(|t| t.trim().parse()).collect()
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CheckReport {
    pub check: Check,
    pub n: usize,
    pub pass: bool,
    pub detail: String,
    /// Offending permutation(s) in canonical text form.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub counterexample: Option<String>,
}

impl CheckReport {
    fn pass(check: Check, n: usize, detail: impl Into<String>) -> Self {
        CheckReport { check, n, pass: true, detail: detail.into(), counterexample: None }
    }

    fn fail(check: Check, n: usize, detail: impl Into<String>, cx: Option<String>) -> Self {
        CheckReport { check, n, pass: false, detail: detail.into(), counterexample: cx }
    }
}

pub fn run_check(n: usize, check: Check, jobs: usize) -> Result<CheckReport> {
    match check {
        Check::Bijection => bijection(n, jobs),
        Check::Triple => triple(n, jobs),
        Check::Eq1 => eq1(n, jobs),
        Check::Eq2 | Check::Eq3 => {
            let lhs = if check == Check::Eq2 { StatVector::Hl } else { StatVector::Lhs };
            let r = verify_identity_jobs(n, lhs, StatVector::Rhs, jobs)?;
            Ok(match r.first_discrepancy {
                None => CheckReport::pass(check, n, format!("{lhs} and rhs distributions agree")),
                Some(d) => CheckReport::fail(
                    check,
                    n,
                    format!("coefficient of {:?}: {lhs} {} vs rhs {}", d.exponents, d.lhs, d.rhs),
                    None,
                ),
            })
        }
        Check::Mahonian => mahonian(n),
    }
}

pub fn run_checks(n: usize, checks: &[Check], jobs: usize) -> Result<Vec<CheckReport>> {
    checks.iter().map(|&c| run_check(n, c, jobs)).collect()
}

fn bijection(n: usize, jobs: usize) -> Result<CheckReport> {
    let parts = fan_out(n, jobs, |perms| {
        perms.map(|p| Ok((phi(&p)?, p))).collect::<Result<Vec<_>>>()
    })?;
    let mut pairs: Vec<_> = parts.into_iter().flatten().collect();
    let total = pairs.len();
    pairs.sort();
    let collisions = pairs.windows(2).filter(|w| w[0].0 == w[1].0).count();
    if let Some(w) = pairs.windows(2).find(|w| w[0].0 == w[1].0) {
        return Ok(CheckReport::fail(
            Check::Bijection,
            n,
            format!("{collisions} shared images among {total} permutations; phi({}) = phi({}) = {}", w[0].1, w[1].1, w[0].0),
            Some(format!("{};{}", w[0].1, w[1].1)),
        ));
    }
    Ok(CheckReport::pass(Check::Bijection, n, format!("{total} distinct images")))
}

fn triple(n: usize, jobs: usize) -> Result<CheckReport> {
    let firsts = fan_out(n, jobs, |mut perms| {
        Ok(perms.find_map(|p| match phi(&p) {
            Ok(t) if stat_vector(&t, StatVector::Rhs).as_tuple()
                == stat_vector(&p, StatVector::Lhs).as_tuple() => None,
            Ok(t) => Some(format!("{p} -> {t}")),
            Err(e) => Some(format!("{p}: {e}")),
        }))
    })?;
    Ok(match firsts.into_iter().flatten().next() {
        None => CheckReport::pass(Check::Triple, n, "triple preserved for every permutation"),
        Some(msg) => {
            let cx = msg.split([' ', ':']).next().map(str::to_owned);
            CheckReport::fail(Check::Triple, n, msg, cx)
        }
    })
}

fn eq1(n: usize, jobs: usize) -> Result<CheckReport> {
    let a = joint_distribution_jobs(n, StatVector::Lhs, jobs)?.specialize_y();
    let b = joint_distribution_jobs(n, StatVector::Rhs, jobs)?.specialize_y();
    if a == b {
        return Ok(CheckReport::pass(Check::Eq1, n, "(maj2, inv2) and (maj-exc, exc) agree"));
    }
    let key = a.keys().chain(b.keys()).filter(|k| a.get(k) != b.get(k)).min().copied();
    Ok(CheckReport::fail(Check::Eq1, n, format!("distributions differ at {key:?}"), None))
}

fn mahonian(n: usize) -> Result<CheckReport> {
    let maj = stat_distribution(n, Stat::Maj)?;
    let qf = q_reference(n, QKind::QFactorial);
    if maj != qf {
        return Ok(CheckReport::fail(Check::Mahonian, n, format!("maj gives {maj}, [n]_q! is {qf}"), None));
    }
    let eul = q_reference(n, QKind::Eulerian);
    for stat in [Stat::Des, Stat::Exc] {
        let d = stat_distribution(n, stat)?;
        if d != eul {
            return Ok(CheckReport::fail(
                Check::Mahonian,
                n,
                format!("{} gives {d}, Eulerian is {eul}", stat.token()),
                None,
            ));
        }
    }
    Ok(CheckReport::pass(Check::Mahonian, n, "maj is Mahonian; des and exc are Eulerian"))
}
