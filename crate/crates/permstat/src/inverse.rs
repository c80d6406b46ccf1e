//! The inverse construction: rebuild the linear graph of a preimage from `τ`.
//!
//! The skeleton of the linear graph (boxed 2-descents, ends of 2-inversion
//! arcs, orientation arrows) is read off `τ`. What is "known" about the
//! preimage is what holds for every permutation compatible with that skeleton
//! and with the ordering facts the forward map guarantees; vertices are then
//! labelled `1, 2, …` by repeatedly choosing a minimal unlabelled vertex.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::forward::{adjust_capacities, compute_c0, phi, tops_of};
use crate::perm::Permutation;
use crate::stats::{descent_set, exceedance_set, two_inversion_set};

/// Block structure of `τ`: descents `dᵏ`, per-block exceedance counts `cₖ`,
/// the would-be 2-descents `d₂ᵏ = dᵏ − cₖ` of the preimage and their tops.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct TauDecomposition {
    pub r: usize,
    /// `d⁰ < d¹ < … < dʳ`, with `d⁰ = 0` iff `τ(1) = 1`.
    pub d_tau: Vec<usize>,
    pub c_tau: Vec<usize>,
    pub d2_tau: Vec<usize>,
    /// `t_k` for `k = 0..=r`, `t_0 = 0`.
    pub t_tau: Vec<usize>,
}

impl TauDecomposition {
    /// Block `k` with `l ∈ ]d₂ᵏ, dᵏ]`, for an exceedance position `l`.
    pub fn block_of(&self, l: usize) -> Option<usize> {
        (0..=self.r).find(|&k| self.d2_tau[k] < l && l <= self.d_tau[k])
    }
}

pub fn decompose(t: &Permutation) -> TauDecomposition {
    let mut d_tau = Vec::new();
    if t.at(1) == 1 {
        d_tau.push(0);
    }
    d_tau.extend(descent_set(t));
    let exc = exceedance_set(t);
    let mut prev = 0;
    let c_tau: Vec<usize> = d_tau
        .iter()
        .map(|&d| {
            let c = exc.iter().filter(|&&i| prev < i && i <= d).count();
            prev = d;
            c
        })
        .collect();
    let d2_tau: Vec<usize> = d_tau.iter().zip(&c_tau).map(|(d, c)| d - c).collect();
    let t_tau = tops_of(&d2_tau[1..]);
    TauDecomposition { r: d_tau.len() - 1, d_tau, c_tau, d2_tau, t_tau }
}

fn check_decomposition(t: &Permutation, dec: &TauDecomposition) -> Result<()> {
    let n = t.len();
    let ok = dec.d2_tau[0] == 0
        && dec.d2_tau.windows(2).all(|w| w[0] < w[1])
        && dec.d2_tau.last().is_some_and(|&d| d < n || dec.r == 0);
    if !ok {
        return Err(Error::Inconsistent(format!(
            "{t}: block starts {:?} are not strictly increasing below n",
            dec.d2_tau
        )));
    }
    Ok(())
}

/// Where the 2-inversion arc ending at a vertex starts.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum ArcSource {
    Known(usize),
    /// Still undetermined; the admissible starting vertices.
    Window(Vec<usize>),
}

impl ArcSource {
    pub fn candidates(&self) -> Vec<usize> {
        match self {
            ArcSource::Known(i) => vec![*i],
            ArcSource::Window(w) => w.clone(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Arc {
    /// End vertex: an exceedance value of `τ`.
    pub target: usize,
    /// Exceedance position of `τ` holding `target`.
    pub tau_position: usize,
    pub block: usize,
    pub source: ArcSource,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Arrow {
    Ascending,
    Descending,
    Unknown,
}

/// Partially known linear graph of a preimage.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SkeletonGraph {
    pub n: usize,
    pub boxed: Vec<usize>,
    /// Sorted by target.
    pub arcs: Vec<Arc>,
    /// `arrows[i − 1]` orients vertices `i` and `i + 1`.
    pub arrows: Vec<Arrow>,
    pub labels: Vec<Option<usize>>,
    /// Pairs `(a, b)` with `v_a ≻ v_b`, from arrows and complete arcs.
    pub order: Vec<(usize, usize)>,
}

impl SkeletonGraph {
    pub fn is_boxed(&self, i: usize) -> bool {
        self.boxed.contains(&i)
    }

    pub fn arc_into(&self, j: usize) -> Option<&Arc> {
        self.arcs.iter().find(|a| a.target == j)
    }

    /// Each vertex ends at most one arc and starts at most one complete arc;
    /// arcs run left to right.
    pub fn check_invariants(&self) -> Result<()> {
        let mut starts = vec![false; self.n + 1];
        for (x, a) in self.arcs.iter().enumerate() {
            if x > 0 && self.arcs[x - 1].target >= a.target {
                return Err(Error::Inconsistent("arc ends repeated or unsorted".into()));
            }
            for i in a.source.candidates() {
                if i >= a.target || i == 0 {
                    return Err(Error::Inconsistent(format!(
                        "arc into {} cannot start at {i}",
                        a.target
                    )));
                }
            }
            if let ArcSource::Known(i) = a.source {
                if starts[i] {
                    return Err(Error::Inconsistent(format!("vertex {i} starts two arcs")));
                }
                starts[i] = true;
            }
        }
        Ok(())
    }

    fn derive_arrows_and_order(&mut self) {
        let n = self.n;
        self.arrows = (1..n)
            .map(|i| {
                if self.is_boxed(i) {
                    return Arrow::Descending;
                }
                match self.arc_into(i + 1).map(|a| &a.source) {
                    None => Arrow::Ascending,
                    Some(ArcSource::Known(s)) if *s == i => Arrow::Descending,
                    Some(ArcSource::Known(_)) => Arrow::Ascending,
                    Some(ArcSource::Window(w)) if !w.contains(&i) => Arrow::Ascending,
                    Some(ArcSource::Window(_)) => Arrow::Unknown,
                }
            })
            .collect();
        let mut order = Vec::new();
        for i in 1..n {
            match self.arrows[i - 1] {
                Arrow::Ascending => order.push((i + 1, i)),
                Arrow::Descending => order.push((i, i + 1)),
                Arrow::Unknown => {}
            }
        }
        for a in &self.arcs {
            if let ArcSource::Known(i) = a.source {
                if !order.contains(&(i, a.target)) {
                    order.push((i, a.target));
                }
            }
        }
        order.sort_unstable();
        self.order = order;
    }
}

/// Whether swapping the values at positions `a` and `b` keeps both the
/// descent set and the exceedance set of `t`.
pub fn exchangeable(t: &Permutation, a: usize, b: usize) -> bool {
    let s = t.swapped(a, b);
    descent_set(&s) == descent_set(t) && exceedance_set(&s) == exceedance_set(t)
}

/// Boxes at `d₂ᵏ` (`k ≥ 1`), arc ends at `τ(EXC(τ))` with every earlier vertex
/// as a candidate start, arrows from the boxes and arc ends alone.
pub fn build_skeleton(t: &Permutation) -> Result<SkeletonGraph> {
    let n = t.len();
    let dec = decompose(t);
    check_decomposition(t, &dec)?;
    let mut arcs: Vec<Arc> = exceedance_set(t)
        .into_iter()
        .map(|l| {
            let target = t.at(l);
            Ok(Arc {
                target,
                tau_position: l,
                block: dec.block_of(l).ok_or_else(|| {
                    Error::Inconsistent(format!("exceedance {l} lies in no block"))
                })?,
                source: ArcSource::Window((1..target).collect()),
            })
        })
        .collect::<Result<_>>()?;
    arcs.sort_by_key(|a| a.target);
    let mut sk = SkeletonGraph {
        n,
        boxed: dec.d2_tau[1..].to_vec(),
        arcs,
        arrows: Vec::new(),
        labels: vec![None; n],
        order: Vec::new(),
    };
    sk.derive_arrows_and_order();
    Ok(sk)
}

/// Pairs of arc ends `(j, j′)` whose starts must satisfy `i < i′`: their
/// exceedance positions are exchangeable in `τ` and in that order.
fn ordered_arc_pairs(t: &Permutation, sk: &SkeletonGraph) -> Vec<(usize, usize)> {
    let mut out = Vec::new();
    for a in &sk.arcs {
        for b in &sk.arcs {
            if a.tau_position < b.tau_position && exchangeable(t, a.tau_position, b.tau_position) {
                out.push((a.target, b.target));
            }
        }
    }
    out
}

/// Propagates the skeleton to what every compatible preimage agrees on:
/// window rules first (see [`propagate_windows`]), then arc starts and
/// arrows are narrowed to those realised by [`compatible_preimages`].
pub fn propagate(sk: &SkeletonGraph, t: &Permutation) -> Result<SkeletonGraph> {
    Ok(close(sk, t)?.0)
}

fn close(sk: &SkeletonGraph, t: &Permutation) -> Result<(SkeletonGraph, Vec<Permutation>)> {
    let mut sk = propagate_windows(sk, t)?;
    let known = compatible_preimages(t, &sk)?;
    if known.is_empty() {
        return Err(Error::Inconsistent(format!("{t}: no permutation fits the skeleton")));
    }
    for a in &mut sk.arcs {
        let mut w: Vec<usize> =
            known.iter().map(|s| s.inverse().at(s.at(a.target) + 1)).collect();
        w.sort_unstable();
        w.dedup();
        a.source = if w.len() == 1 { ArcSource::Known(w[0]) } else { ArcSource::Window(w) };
    }
    sk.derive_arrows_and_order();
    for i in 1..sk.n {
        if sk.arrows[i - 1] == Arrow::Unknown {
            if known.iter().all(|s| s.at(i) < s.at(i + 1)) {
                sk.arrows[i - 1] = Arrow::Ascending;
                sk.order.push((i + 1, i));
            } else if known.iter().all(|s| s.at(i) > s.at(i + 1)) {
                sk.arrows[i - 1] = Arrow::Descending;
                sk.order.push((i, i + 1));
            }
        }
    }
    sk.order.sort_unstable();
    sk.order.dedup();
    sk.check_invariants()?;
    Ok((sk, known))
}

/// Unit propagation over arc windows, to a fixpoint: starts lie in
/// `[t_k, j[`, never on a boxed vertex right before the end, respect the
/// start order of exchangeable exceedances, and are pairwise distinct;
/// singleton windows become complete arcs. Arrows and the order relation
/// are then rederived.
pub fn propagate_windows(sk: &SkeletonGraph, t: &Permutation) -> Result<SkeletonGraph> {
    let dec = decompose(t);
    let mut sk = sk.clone();
    let pairs = ordered_arc_pairs(t, &sk);
    let boxed = sk.boxed.clone();
    let mut windows: Vec<Vec<usize>> = sk.arcs.iter().map(|a| a.source.candidates()).collect();
    for (x, a) in sk.arcs.iter().enumerate() {
        let lo = dec.t_tau[a.block].max(1);
        windows[x].retain(|&i| i >= lo && i < a.target && !(i + 1 == a.target && boxed.contains(&i)));
    }
    let index = |j: usize, arcs: &[Arc]| arcs.iter().position(|a| a.target == j).unwrap();
    loop {
        let mut changed = false;
        for &(j, jp) in &pairs {
            let (x, y) = (index(j, &sk.arcs), index(jp, &sk.arcs));
            if let (Some(&hi), Some(&lo)) = (windows[y].iter().max(), windows[x].iter().min()) {
                let bx = windows[x].len();
                windows[x].retain(|&i| i < hi);
                let by = windows[y].len();
                windows[y].retain(|&i| i > lo);
                changed |= windows[x].len() != bx || windows[y].len() != by;
            }
        }
        for x in 0..windows.len() {
            if windows[x].len() == 1 {
                let i = windows[x][0];
                for (y, w) in windows.iter_mut().enumerate() {
                    if y != x && w.contains(&i) {
                        w.retain(|&v| v != i);
                        changed = true;
                    }
                }
            }
        }
        if let Some(x) = windows.iter().position(|w| w.is_empty()) {
            return Err(Error::Inconsistent(format!(
                "{t}: no vertex can start the arc into {}",
                sk.arcs[x].target
            )));
        }
        if !changed {
            break;
        }
    }
    for (a, w) in sk.arcs.iter_mut().zip(windows) {
        a.source = if w.len() == 1 { ArcSource::Known(w[0]) } else { ArcSource::Window(w) };
    }
    sk.derive_arrows_and_order();
    sk.check_invariants()?;
    Ok(sk)
}

/// Every permutation compatible with the propagated skeleton of `t`: same
/// 2-descents, 2-inversion ends `τ(EXC(τ))` with starts inside the windows,
/// same capacity sequence, the start order of exchangeable exceedances, and
/// the dot order of exchangeable non-exceedances.
pub fn compatible_preimages(t: &Permutation, sk: &SkeletonGraph) -> Result<Vec<Permutation>> {
    let n = t.len();
    let dec = decompose(t);
    let mut window: Vec<Option<Vec<usize>>> = vec![None; n + 1];
    for a in &sk.arcs {
        window[a.target] = Some(a.source.candidates());
    }
    let mut boxed = vec![false; n + 1];
    for &b in &sk.boxed {
        boxed[b] = true;
    }
    let pairs = ordered_arc_pairs(t, sk);
    let dots: Vec<usize> = (1..=n).filter(|&l| t.at(l) <= l).collect();
    let mut dot_pairs = Vec::new();
    for x in 0..dots.len() {
        for y in x + 1..dots.len() {
            if exchangeable(t, dots[x], dots[y]) {
                dot_pairs.push((x, y, t.at(dots[x]) < t.at(dots[y])));
            }
        }
    }

    let mut out = Vec::new();
    let mut word = Vec::with_capacity(n);
    let mut pos = vec![0usize; n + 2];
    let mut leaf = |word: &[usize]| -> Result<()> {
        let s = Permutation::new(word.to_vec())?;
        let src = {
            let mut src = vec![0; n + 1];
            for (i, j) in two_inversion_set(&s).pairs {
                src[j] = i;
            }
            src
        };
        if pairs.iter().any(|&(j, jp)| src[j] >= src[jp]) {
            return Ok(());
        }
        let u: Vec<usize> = (1..=n).filter(|&i| s.at(i) == 1 || src.iter().all(|&x| x != i)).collect();
        if u.len() != dots.len() {
            return Ok(());
        }
        if dot_pairs.iter().any(|&(x, y, lt)| (s.at(u[x]) < s.at(u[y])) != lt) {
            return Ok(());
        }
        let Ok(c0) = compute_c0(&s) else { return Ok(()) };
        let Ok(c) = adjust_capacities(&s, &c0) else { return Ok(()) };
        if c.values == dec.c_tau {
            out.push(s);
        }
        Ok(())
    };
    fn go(
        j: usize,
        n: usize,
        word: &mut Vec<usize>,
        pos: &mut Vec<usize>,
        window: &[Option<Vec<usize>>],
        boxed: &[bool],
        leaf: &mut dyn FnMut(&[usize]) -> Result<()>,
    ) -> Result<()> {
        if j > n {
            return leaf(word);
        }
        for x in 1..=n {
            if pos[x] != 0 {
                continue;
            }
            let above_placed = pos[x + 1] != 0;
            match &window[j] {
                Some(w) => {
                    if !above_placed || !w.contains(&pos[x + 1]) {
                        continue;
                    }
                }
                None => {
                    if above_placed {
                        continue;
                    }
                }
            }
            if j > 1 && (word[j - 2] > x + 1) != boxed[j - 1] {
                continue;
            }
            word.push(x);
            pos[x] = j;
            go(j + 1, n, word, pos, window, boxed, leaf)?;
            pos[x] = 0;
            word.pop();
        }
        Ok(())
    }
    go(1, n, &mut word, &mut pos, &window, &boxed, &mut leaf)?;
    Ok(out)
}

/// How a vertex got its label.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum LabelRule {
    /// The only minimal unlabelled vertex.
    UniqueMinimal,
    /// Chosen among several minimal vertices by the exchangeable-dot index.
    DotIndex,
    /// Start of an arc whose start was already determined.
    KnownArc,
    /// Rightmost minimal admissible start of an incomplete arc.
    RightmostStart,
}

/// Known state of the skeleton between labelling steps.
#[derive(Debug, Clone, Serialize)]
pub struct SkeletonSnapshot {
    pub arcs: Vec<Arc>,
    pub arrows: Vec<Arrow>,
    pub labels: Vec<Option<usize>>,
    pub minimal: Vec<usize>,
    pub compatible: usize,
}

#[derive(Debug, Clone, Serialize)]
pub struct InverseStep {
    pub vertex: usize,
    pub label: usize,
    pub rule: LabelRule,
    /// Minimal unlabelled vertices when the choice was made.
    pub minimal: Vec<usize>,
    /// For dot-index choices: the exchangeable non-exceedance positions.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub exchangeable_positions: Option<Vec<usize>>,
    pub after: SkeletonSnapshot,
}

#[derive(Debug, Clone, Serialize)]
pub struct InverseTrace {
    pub input: String,
    pub decomposition: TauDecomposition,
    pub skeleton: SkeletonGraph,
    pub propagated: SkeletonGraph,
    pub compatible: usize,
    pub steps: Vec<InverseStep>,
    pub output: String,
}

struct Labelling<'a> {
    t: &'a Permutation,
    sk: &'a SkeletonGraph,
    known: Vec<Permutation>,
    labels: Vec<Option<usize>>,
    next: usize,
    steps: Vec<InverseStep>,
}

impl Labelling<'_> {
    fn unlabelled(&self) -> Vec<usize> {
        (1..=self.t.len()).filter(|&v| self.labels[v - 1].is_none()).collect()
    }

    /// `v ≻ w` holds in every compatible permutation.
    fn above(&self, v: usize, w: usize) -> bool {
        self.known.iter().all(|s| s.at(v) > s.at(w))
    }

    fn minimal_on(&self, xs: &[usize]) -> Vec<usize> {
        xs.iter()
            .copied()
            .filter(|&v| !xs.iter().any(|&w| w != v && self.above(v, w)))
            .collect()
    }

    fn arc_starts(&self, j: usize) -> Vec<usize> {
        let mut starts: Vec<usize> = self
            .known
            .iter()
            .map(|s| s.inverse().at(s.at(j) + 1))
            .collect();
        starts.sort_unstable();
        starts.dedup();
        starts
    }

    fn snapshot(&self) -> SkeletonSnapshot {
        let n = self.t.len();
        let arcs = self
            .sk
            .arcs
            .iter()
            .map(|a| {
                let w = self.arc_starts(a.target);
                Arc {
                    source: if w.len() == 1 { ArcSource::Known(w[0]) } else { ArcSource::Window(w) },
                    ..a.clone()
                }
            })
            .collect();
        let arrows = (1..n)
            .map(|i| {
                if self.known.iter().all(|s| s.at(i) < s.at(i + 1)) {
                    Arrow::Ascending
                } else if self.known.iter().all(|s| s.at(i) > s.at(i + 1)) {
                    Arrow::Descending
                } else {
                    Arrow::Unknown
                }
            })
            .collect();
        SkeletonSnapshot {
            arcs,
            arrows,
            labels: self.labels.clone(),
            minimal: self.minimal_on(&self.unlabelled()),
            compatible: self.known.len(),
        }
    }

    fn give(
        &mut self,
        v: usize,
        rule: LabelRule,
        minimal: Vec<usize>,
        exchangeable_positions: Option<Vec<usize>>,
    ) -> Result<()> {
        let l = self.next;
        self.labels[v - 1] = Some(l);
        self.known.retain(|s| s.at(v) == l);
        if self.known.is_empty() {
            return Err(Error::Inconsistent(format!(
                "{}: labelling vertex {v} with {l} leaves no compatible preimage",
                self.t
            )));
        }
        self.next += 1;
        let after = self.snapshot();
        self.steps.push(InverseStep { vertex: v, label: l, rule, minimal, exchangeable_positions, after });
        Ok(())
    }

    /// Labels the starts of the chain of arcs ending at `v`.
    fn follow_arcs(&mut self, mut v: usize) -> Result<()> {
        while self.sk.arc_into(v).is_some() {
            let starts = self.arc_starts(v);
            let (i, rule, minimal) = if let [i] = starts.as_slice() {
                (*i, LabelRule::KnownArc, vec![*i])
            } else {
                let free: Vec<usize> =
                    starts.into_iter().filter(|&i| self.labels[i - 1].is_none()).collect();
                let minimal = self.minimal_on(&free);
                let &i = minimal.last().ok_or_else(|| {
                    Error::Inconsistent(format!("{}: no admissible start for the arc into {v}", self.t))
                })?;
                (i, LabelRule::RightmostStart, minimal)
            };
            if self.labels[i - 1].is_some() {
                return Err(Error::Inconsistent(format!(
                    "{}: start {i} of the arc into {v} is already labelled",
                    self.t
                )));
            }
            self.give(i, rule, minimal, None)?;
            v = i;
        }
        Ok(())
    }

    fn run(&mut self) -> Result<()> {
        let t = self.t;
        let n = t.len();
        let dots: Vec<usize> = (1..=n).filter(|&l| t.at(l) <= l).collect();
        let mut evalues: Vec<usize> = dots.iter().map(|&l| t.at(l)).collect();
        evalues.sort_unstable();
        let mut k = 0;
        loop {
            let free = self.unlabelled();
            if free.is_empty() {
                return Ok(());
            }
            let minimal = self.minimal_on(&free);
            let (v, rule, ex) = match minimal.as_slice() {
                [] => return Err(Error::Inconsistent(format!("{t}: no minimal vertex"))),
                [v] => (*v, LabelRule::UniqueMinimal, None),
                _ => {
                    let e = *evalues.get(k).ok_or_else(|| {
                        Error::Inconsistent(format!("{t}: more dot labellings than dots"))
                    })?;
                    let le = t.inverse().at(e);
                    let ls: Vec<usize> = dots
                        .iter()
                        .copied()
                        .filter(|&l| t.at(l) >= e && (l == le || exchangeable(t, l, le)))
                        .collect();
                    let idx = ls.iter().position(|&l| l == le).expect("le is listed");
                    let &v = minimal.get(idx).ok_or_else(|| {
                        Error::Inconsistent(format!(
                            "{t}: dot index {} exceeds {} minimal vertices",
                            idx + 1,
                            minimal.len()
                        ))
                    })?;
                    (v, LabelRule::DotIndex, Some(ls))
                }
            };
            self.give(v, rule, minimal, ex)?;
            k += 1;
            self.follow_arcs(v)?;
        }
    }
}

pub fn phi_inverse_trace(t: &Permutation) -> Result<InverseTrace> {
    let skeleton = build_skeleton(t)?;
    let (propagated, known) = close(&skeleton, t)?;
    let compatible = known.len();
    let mut lab = Labelling {
        t,
        sk: &propagated,
        known,
        labels: vec![None; t.len()],
        next: 1,
        steps: Vec::new(),
    };
    lab.run()?;
    let steps = lab.steps;
    let word: Vec<usize> = lab.labels.iter().map(|l| l.expect("all labelled")).collect();
    let sigma = Permutation::new(word)?;
    let image = phi(&sigma)?;
    if &image != t {
        return Err(Error::RoundTrip {
            target: t.to_string(),
            preimage: sigma.to_string(),
            image: image.to_string(),
        });
    }
    Ok(InverseTrace {
        input: t.to_string(),
        decomposition: decompose(t),
        skeleton,
        propagated,
        compatible,
        steps,
        output: sigma.to_string(),
    })
}

/// `phi⁻¹(τ)`, self-checked by `phi(phi⁻¹(τ)) = τ`.
pub fn phi_inverse(t: &Permutation) -> Result<Permutation> {
    let trace = phi_inverse_trace(t)?;
    trace.output.parse()
}
