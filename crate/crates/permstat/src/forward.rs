//! The forward map `phi`: capacity sequences, the slope graph and its labelling.
//!
//! `phi(σ)` is read off a graph with `n` vertices. Exceedance positions of the
//! image ("circles") sit in blocks `]d₂ᵏ, d₂ᵏ + cₖ]` right after each 2-descent
//! `d₂ᵏ` of `σ`; the remaining vertices are "dots". Circles receive the ends of
//! the 2-inversions of `σ`, dots receive the other values.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::perm::Permutation;
use crate::stats::{two_descent_set, two_inversion_set};

/// `t_k` for `k = 0..=r`: start of the maximal run of consecutive entries of
/// `d2` ending at the k-th one; `t_0 = 0`.
pub fn tops_of(d2: &[usize]) -> Vec<usize> {
    let mut t = vec![0; d2.len() + 1];
    for (k, tk) in t.iter_mut().enumerate().skip(1) {
        let mut l = k;
        while l > 1 && d2[l - 2] + 1 == d2[l - 1] {
            l -= 1;
        }
        *tk = d2[l - 1];
    }
    t
}

/// Tops of the 2-descent set of `p`, indexed `0..=des₂(p)`.
pub fn tops(p: &Permutation) -> Vec<usize> {
    tops_of(&two_descent_set(p))
}

/// Per-block exceedance counts `(c_k)` together with the block bounds `d₂ᵏ`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CapacitySequence {
    pub values: Vec<usize>,
    /// `d₂⁰ = 0 < d₂¹ < … < d₂ʳ`.
    pub bounds: Vec<usize>,
    pub n: usize,
}

impl CapacitySequence {
    pub fn r(&self) -> usize {
        self.values.len() - 1
    }

    /// `d₂^{k+1}`, with `d₂^{r+1} = n`.
    pub fn upper(&self, k: usize) -> usize {
        self.bounds.get(k + 1).copied().unwrap_or(self.n)
    }

    pub fn total(&self) -> usize {
        self.values.iter().sum()
    }

    /// `dᵏ = d₂ᵏ + cₖ` for every block.
    pub fn block_ends(&self) -> Vec<usize> {
        self.bounds.iter().zip(&self.values).map(|(d, c)| d + c).collect()
    }

    /// The descent set of the image: the positive block ends.
    pub fn descents(&self) -> Vec<usize> {
        self.block_ends().into_iter().filter(|&d| d > 0).collect()
    }

    /// `c_k ≤ d₂^{k+1} − d₂^k`, with equality only if `c_{k+1} > 0`.
    pub fn check_bounds(&self) -> Result<()> {
        for k in 0..self.values.len() {
            let room = self.upper(k) - self.bounds[k];
            let next = self.values.get(k + 1).copied().unwrap_or(0);
            if self.values[k] > room || (self.values[k] == room && next == 0) {
                return Err(Error::Invariant(format!(
                    "capacity c_{k} = {} does not fit block ]{}, {}] (c_{} = {next})",
                    self.values[k],
                    self.bounds[k],
                    self.upper(k),
                    k + 1
                )));
            }
        }
        Ok(())
    }
}

fn bounds_of(p: &Permutation) -> Vec<usize> {
    let mut b = vec![0];
    b.extend(two_descent_set(p));
    b
}

/// Initial capacity sequence `(c⁰_k)`.
///
/// For `k = r` down to `0`, among increasing subsequences (in position and in
/// value) of the remaining 2-inversion beginnings `i ≥ t_k`, pick one of
/// maximal weight, the weight being the total length of the chains of
/// remaining 2-inversions `(i, j), (j, j′), …` seeded at its elements; ties
/// go to the lexicographically greatest position tuple. `c⁰_k` is that
/// weight and the chains leave the pool.
pub fn compute_c0(p: &Permutation) -> Result<CapacitySequence> {
    let n = p.len();
    let bounds = bounds_of(p);
    let r = bounds.len() - 1;
    let t = tops_of(&bounds[1..]);
    let mut next = two_inversion_set(p).successor_table(n);
    let mut values = vec![0; r + 1];

    for k in (0..=r).rev() {
        let cand: Vec<usize> = (t[k].max(1)..=n).filter(|&i| next[i].is_some()).collect();
        if cand.is_empty() {
            continue;
        }
        let chain_len = |i: usize, next: &[Option<usize>]| {
            let (mut a, mut len) = (i, 0);
            while let Some(b) = next[a] {
                len += 1;
                a = b;
            }
            len
        };
        let weights: Vec<usize> = cand.iter().map(|&i| chain_len(i, &next)).collect();
        let mut best: Option<(usize, Vec<usize>)> = None;
        let mut stack = Vec::new();
        best_sequence(p, &cand, &weights, 0, 0, &mut stack, &mut best);
        let (w, seq) = best.expect("non-empty candidate list has a best sequence");
        values[k] = w;
        for i in seq {
            let mut a = i;
            while let Some(b) = next[a].take() {
                a = b;
            }
        }
    }
    if let Some(i) = (1..=n).find(|&i| next[i].is_some()) {
        return Err(Error::Invariant(format!(
            "2-inversion beginning at {i} was never assigned to a block"
        )));
    }
    Ok(CapacitySequence { values, bounds, n })
}

fn best_sequence(
    p: &Permutation,
    cand: &[usize],
    weights: &[usize],
    from: usize,
    weight: usize,
    stack: &mut Vec<usize>,
    best: &mut Option<(usize, Vec<usize>)>,
) {
    if !stack.is_empty() {
        let better = match best {
            None => true,
            Some((bw, bs)) => (weight, &*stack) > (*bw, &*bs),
        };
        if better {
            *best = Some((weight, stack.clone()));
        }
    }
    for x in from..cand.len() {
        let i = cand[x];
        if stack.last().is_some_and(|&last| p.at(last) >= p.at(i)) {
            continue;
        }
        stack.push(i);
        best_sequence(p, cand, weights, x + 1, weight + weights[x], stack, best);
        stack.pop();
    }
}

/// `σ` restricted to the positions that begin no 2-inversion.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct OmegaWord {
    pub letters: Vec<usize>,
    pub positions: Vec<usize>,
}

pub fn omega_word(p: &Permutation) -> OmegaWord {
    let next = two_inversion_set(p).successor_table(p.len());
    let positions: Vec<usize> = (1..=p.len()).filter(|&i| next[i].is_none()).collect();
    OmegaWord {
        letters: positions.iter().map(|&i| p.at(i)).collect(),
        positions,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum VertexKind {
    Circle,
    Dot,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Relation {
    Ascent,
    Descent,
}

/// Vertices on slopes: kinds, neighbour relations and (possibly partial) labels.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SlopeGraph {
    pub kinds: Vec<VertexKind>,
    /// `relations[i − 1]` relates vertices `i` and `i + 1`.
    pub relations: Vec<Relation>,
    pub labels: Vec<Option<usize>>,
}

impl SlopeGraph {
    pub fn n(&self) -> usize {
        self.kinds.len()
    }

    pub fn kind(&self, i: usize) -> VertexKind {
        self.kinds[i - 1]
    }

    /// Relation between vertices `i` and `i + 1`.
    pub fn relation(&self, i: usize) -> Relation {
        self.relations[i - 1]
    }

    pub fn positions_of(&self, kind: VertexKind) -> Vec<usize> {
        (1..=self.n()).filter(|&i| self.kind(i) == kind).collect()
    }

    pub fn descents(&self) -> Vec<usize> {
        (1..self.n()).filter(|&i| self.relation(i) == Relation::Descent).collect()
    }

    /// The labelled word, if every vertex carries a label.
    pub fn word(&self) -> Option<Vec<usize>> {
        self.labels.iter().copied().collect()
    }

    /// Vertices forced above `v`: earlier ones on its maximal descending
    /// chain and later ones on its maximal ascending chain.
    fn above(&self, v: usize) -> Vec<usize> {
        let mut out = Vec::new();
        let mut x = v;
        while x > 1 && self.relation(x - 1) == Relation::Descent {
            x -= 1;
            out.push(x);
        }
        let mut x = v;
        while x < self.n() && self.relation(x) == Relation::Ascent {
            x += 1;
            out.push(x);
        }
        out
    }

    fn vertex_records(&self) -> Vec<VertexRecord> {
        (1..=self.n())
            .map(|i| VertexRecord {
                position: i,
                kind: self.kind(i),
                relation_to_next: (i < self.n()).then(|| self.relation(i)),
                label: self.labels[i - 1],
            })
            .collect()
    }
}

/// Whether a value may go to a vertex given the labels placed so far.
type Fits<'f> = dyn Fn(&[Option<usize>], usize, usize) -> bool + 'f;

fn circle_layout(c: &CapacitySequence) -> Vec<Option<usize>> {
    let mut block = vec![None; c.n + 1];
    for k in 0..=c.r() {
        block[c.bounds[k] + 1..=c.bounds[k] + c.values[k]].fill(Some(k));
    }
    block
}

/// Neighbour relations copied from `ω` for dot pairs, by kind otherwise.
pub fn omega_relations(p: &Permutation, c: &CapacitySequence) -> Vec<Relation> {
    let n = p.len();
    let block = circle_layout(c);
    let omega = omega_word(p);
    let mut dot_index = vec![usize::MAX; n + 1];
    let mut m = 0;
    for x in 1..=n {
        if block[x].is_none() {
            dot_index[x] = m;
            m += 1;
        }
    }
    (1..n)
        .map(|i| match (block[i], block[i + 1]) {
            (Some(a), Some(b)) if a == b => Relation::Ascent,
            (Some(_), _) => Relation::Descent,
            (None, Some(_)) => Relation::Ascent,
            (None, None) => {
                let m = dot_index[i];
                if omega.letters.get(m) > omega.letters.get(m + 1) {
                    Relation::Descent
                } else {
                    Relation::Ascent
                }
            }
        })
        .collect()
}

/// Capacity adjustment.
///
/// Sweeps `i = 1..n−1` over the graph induced by the current sequence; when
/// `i` and `i + 1` are dots forming a descent of `ω` while `i` is not a
/// 2-descent, block `k` with `d₂ᵏ + cₖ < i < d₂^{k+1}` gains one circle,
/// taken from the next non-empty block after `k`.
pub fn adjust_capacities(p: &Permutation, c0: &CapacitySequence) -> Result<CapacitySequence> {
    Ok(adjust_with_log(p, c0)?.0)
}

/// One adjustment event: at position `i`, block `to` gained and `from` lost.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Adjustment {
    pub position: usize,
    pub to: usize,
    pub from: usize,
}

fn adjust_with_log(
    p: &Permutation,
    c0: &CapacitySequence,
) -> Result<(CapacitySequence, Vec<Adjustment>)> {
    let n = p.len();
    let mut is_d2 = vec![false; n + 1];
    for &d in &c0.bounds[1..] {
        is_d2[d] = true;
    }
    let mut c = c0.clone();
    let mut log = Vec::new();
    for i in 1..n {
        let block = circle_layout(&c);
        if block[i].is_some() || block[i + 1].is_some() || is_d2[i] {
            continue;
        }
        if omega_relations(p, &c)[i - 1] != Relation::Descent {
            continue;
        }
        let ks: Vec<usize> = (0..=c.r())
            .filter(|&k| c.bounds[k] + c.values[k] < i && i < c.upper(k))
            .collect();
        let &[k] = ks.as_slice() else {
            return Err(Error::Invariant(format!("position {i} lies in no unique block gap")));
        };
        let Some(from) = (k + 1..=c.r()).find(|&m| c.values[m] > 0) else {
            return Err(Error::Invariant(format!(
                "no circle after block {k} can move to position {i}"
            )));
        };
        c.values[k] += 1;
        c.values[from] -= 1;
        log.push(Adjustment { position: i, to: k, from });
    }
    Ok((c, log))
}

/// Unlabelled graph for capacities `c`: circles at `]d₂ᵏ, d₂ᵏ + cₖ]`,
/// descents exactly at the positive block ends `d₂ᵏ + cₖ`.
pub fn build_graph(p: &Permutation, c: &CapacitySequence) -> Result<SlopeGraph> {
    let n = p.len();
    if c.n != n || c.total() != two_inversion_set(p).len() {
        return Err(Error::Invariant(format!(
            "capacities {:?} do not match {} 2-inversions",
            c.values,
            two_inversion_set(p).len()
        )));
    }
    let block = circle_layout(c);
    let mut is_desc = vec![false; n + 1];
    for d in c.descents() {
        if d < n {
            is_desc[d] = true;
        }
    }
    Ok(SlopeGraph {
        kinds: (1..=n)
            .map(|i| if block[i].is_some() { VertexKind::Circle } else { VertexKind::Dot })
            .collect(),
        relations: (1..n)
            .map(|i| if is_desc[i] { Relation::Descent } else { Relation::Ascent })
            .collect(),
        labels: vec![None; n],
    })
}

/// Candidate sets of one vertex kind at one stage of the labelling.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CandidatePass {
    pub stage: &'static str,
    pub sets: Vec<CandidateSet>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CandidateSet {
    pub position: usize,
    pub candidates: Vec<usize>,
}

struct Labeller<'a> {
    g: &'a SlopeGraph,
    verts: Vec<usize>,
    /// `sets[x]` are the candidates of `verts[x]`, sorted.
    sets: Vec<Vec<usize>>,
    passes: Vec<CandidatePass>,
}

impl<'a> Labeller<'a> {
    fn new(g: &'a SlopeGraph, verts: Vec<usize>, sets: Vec<Vec<usize>>) -> Self {
        let mut me = Labeller { g, verts, sets, passes: Vec::new() };
        me.record("initial");
        me
    }

    fn record(&mut self, stage: &'static str) {
        let sets = self
            .verts
            .iter()
            .zip(&self.sets)
            .map(|(&position, s)| CandidateSet { position, candidates: s.clone() })
            .collect();
        self.passes.push(CandidatePass { stage, sets });
    }

    fn index(&self, v: usize) -> Option<usize> {
        self.verts.binary_search(&v).ok()
    }

    fn retain(&mut self, x: usize, keep: impl Fn(usize) -> bool) -> Result<bool> {
        let before = self.sets[x].len();
        self.sets[x].retain(|&y| keep(y));
        if self.sets[x].is_empty() {
            return Err(Error::Invariant(format!(
                "candidate set of vertex {} became empty",
                self.verts[x]
            )));
        }
        Ok(self.sets[x].len() != before)
    }

    /// Sound slope rule, iterated to a fixpoint.
    fn prune_slopes(&mut self) -> Result<bool> {
        let above: Vec<Vec<usize>> = self
            .verts
            .iter()
            .map(|&v| self.g.above(v).into_iter().filter_map(|a| self.index(a)).collect())
            .collect();
        let mut any = false;
        loop {
            let mut changed = false;
            for (x, a) in above.iter().enumerate() {
                if a.is_empty() {
                    continue;
                }
                let mut pool: Vec<usize> = a.iter().flat_map(|&y| self.sets[y].clone()).collect();
                pool.sort_unstable();
                pool.dedup();
                let need = a.len();
                changed |= self.retain(x, |v| pool.iter().filter(|&&w| w > v).count() >= need)?;
                let floor = self.sets[x][0];
                for &y in a {
                    changed |= self.retain(y, |w| w > floor)?;
                }
            }
            if !changed {
                return Ok(any);
            }
            any = true;
        }
    }

    /// Naked and hidden singles, to a fixpoint.
    fn propagate_singles(&mut self) -> Result<bool> {
        let mut any = false;
        loop {
            let mut changed = false;
            for x in 0..self.verts.len() {
                if self.sets[x].len() == 1 {
                    let v = self.sets[x][0];
                    for y in 0..self.verts.len() {
                        if y != x && self.sets[y].contains(&v) {
                            self.retain(y, |w| w != v)?;
                            changed = true;
                        }
                    }
                }
            }
            let mut values: Vec<usize> = self.sets.iter().flatten().copied().collect();
            values.sort_unstable();
            values.dedup();
            if values.len() < self.verts.len() {
                return Err(Error::Invariant("fewer candidate values than vertices".into()));
            }
            for v in values {
                let holders: Vec<usize> =
                    (0..self.verts.len()).filter(|&x| self.sets[x].contains(&v)).collect();
                if let &[x] = holders.as_slice() {
                    if self.sets[x].len() > 1 {
                        self.sets[x] = vec![v];
                        changed = true;
                    }
                }
            }
            if !changed {
                return Ok(any);
            }
            any = true;
        }
    }

    fn reduce(&mut self) -> Result<()> {
        self.prune_slopes()?;
        self.record("slopes");
        loop {
            let a = self.propagate_singles()?;
            let b = self.prune_slopes()?;
            if !a && !b {
                break;
            }
        }
        self.record("propagated");
        Ok(())
    }

    /// Whether the partial assignment extends to a labelling of all vertices.
    fn feasible(&self, fixed: &[Option<usize>]) -> bool {
        let m = self.verts.len();
        let mut lab = fixed.to_vec();
        let mut used: Vec<usize> = fixed.iter().flatten().copied().collect();
        let fits = |lab: &[Option<usize>], x: usize, v: usize| -> bool {
            let pos = self.verts[x];
            if x > 0 && self.verts[x - 1] + 1 == pos {
                if let Some(l) = lab[x - 1] {
                    let ok = match self.g.relation(pos - 1) {
                        Relation::Ascent => l < v,
                        Relation::Descent => l > v,
                    };
                    if !ok {
                        return false;
                    }
                }
            }
            if x + 1 < m && self.verts[x + 1] == pos + 1 {
                if let Some(r) = lab[x + 1] {
                    let ok = match self.g.relation(pos) {
                        Relation::Ascent => v < r,
                        Relation::Descent => v > r,
                    };
                    if !ok {
                        return false;
                    }
                }
            }
            true
        };
        for x in 0..m {
            if let Some(v) = fixed[x] {
                lab[x] = None;
                if !self.sets[x].contains(&v) || !fits(&lab, x, v) {
                    return false;
                }
                lab[x] = Some(v);
            }
        }
        let free: Vec<usize> = (0..m).filter(|&x| fixed[x].is_none()).collect();
        fn go(
            me: &Labeller,
            free: &[usize],
            lab: &mut Vec<Option<usize>>,
            used: &mut Vec<usize>,
            fits: &Fits<'_>,
        ) -> bool {
            let Some((&x, rest)) = free.split_first() else {
                return true;
            };
            for &v in &me.sets[x] {
                if used.contains(&v) || !fits(lab, x, v) {
                    continue;
                }
                lab[x] = Some(v);
                used.push(v);
                if go(me, rest, lab, used, fits) {
                    return true;
                }
                used.pop();
                lab[x] = None;
            }
            false
        }
        go(self, &free, &mut lab, &mut used, &fits)
    }

    fn finish(mut self, assignment: Vec<Option<usize>>) -> Result<(Vec<usize>, Vec<CandidatePass>)> {
        let labels: Vec<usize> = assignment
            .into_iter()
            .enumerate()
            .map(|(x, v)| {
                v.ok_or_else(|| {
                    Error::Invariant(format!("vertex {} left unlabelled", self.verts[x]))
                })
            })
            .collect::<Result<_>>()?;
        self.sets = labels.iter().map(|&v| vec![v]).collect();
        self.record("final");
        Ok((labels, self.passes))
    }
}

/// Circle labelling: candidates `[i+1, n] ∩ {j_l}`, slope pruning and single
/// propagation, then circles left to right take the first value of the
/// sequence `(j_1, …, j_s)` that still admits a complete labelling.
pub fn label_circles(g: &SlopeGraph, p: &Permutation) -> Result<(SlopeGraph, Vec<CandidatePass>)> {
    let n = p.len();
    let js = two_inversion_set(p).ends();
    let verts = g.positions_of(VertexKind::Circle);
    if verts.len() != js.len() {
        return Err(Error::Invariant(format!(
            "{} circles for {} 2-inversions",
            verts.len(),
            js.len()
        )));
    }
    let mut out = g.clone();
    if verts.is_empty() {
        return Ok((out, Vec::new()));
    }
    let sets = verts
        .iter()
        .map(|&i| {
            let mut s: Vec<usize> = js.iter().copied().filter(|&j| j > i && j <= n).collect();
            s.sort_unstable();
            s
        })
        .collect();
    let mut lab = Labeller::new(g, verts.clone(), sets);
    lab.reduce()?;
    let mut assign = vec![None; verts.len()];
    for x in 0..verts.len() {
        let mut placed = false;
        for &j in &js {
            if assign.contains(&Some(j)) || !lab.sets[x].contains(&j) {
                continue;
            }
            assign[x] = Some(j);
            if lab.feasible(&assign) {
                placed = true;
                break;
            }
            assign[x] = None;
        }
        if !placed {
            return Err(Error::Invariant(format!("no admissible label for circle {}", verts[x])));
        }
    }
    let (labels, passes) = lab.finish(assign)?;
    for (&v, l) in verts.iter().zip(labels) {
        out.labels[v - 1] = Some(l);
    }
    Ok((out, passes))
}

/// Dot labelling: dot `p_k` starts with `[min(p_k, u_k)]` minus the circle
/// values; after pruning, `e_1 < e_2 < …` go in turn to the carrier dot
/// minimizing `σ(u_k)` among those keeping a complete labelling possible.
pub fn label_dots(g: &SlopeGraph, p: &Permutation) -> Result<(SlopeGraph, Vec<CandidatePass>)> {
    let n = p.len();
    let js = two_inversion_set(p).ends();
    let mut is_j = vec![false; n + 1];
    for &j in &js {
        is_j[j] = true;
    }
    let es: Vec<usize> = (1..=n).filter(|&v| !is_j[v]).collect();
    let verts = g.positions_of(VertexKind::Dot);
    let u = omega_word(p).positions;
    if verts.len() != u.len() {
        return Err(Error::Invariant(format!(
            "{} dots for {} non-beginning positions",
            verts.len(),
            u.len()
        )));
    }
    let sets = verts
        .iter()
        .zip(&u)
        .map(|(&pk, &uk)| es.iter().copied().filter(|&e| e <= pk.min(uk)).collect())
        .collect();
    let mut lab = Labeller::new(g, verts.clone(), sets);
    lab.reduce()?;
    let mut assign: Vec<Option<usize>> = vec![None; verts.len()];
    for &e in &es {
        let mut carriers: Vec<usize> = (0..verts.len())
            .filter(|&x| assign[x].is_none() && lab.sets[x].contains(&e))
            .collect();
        carriers.sort_by_key(|&x| p.at(u[x]));
        let mut placed = false;
        for x in carriers {
            assign[x] = Some(e);
            if lab.feasible(&assign) {
                placed = true;
                break;
            }
            assign[x] = None;
        }
        if !placed {
            return Err(Error::Invariant(format!("no admissible dot for value {e}")));
        }
    }
    let (labels, passes) = lab.finish(assign)?;
    let mut out = g.clone();
    for (&v, l) in verts.iter().zip(labels) {
        out.labels[v - 1] = Some(l);
    }
    Ok((out, passes))
}

/// Per-vertex view of a graph for traces.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct VertexRecord {
    pub position: usize,
    pub kind: VertexKind,
    pub relation_to_next: Option<Relation>,
    pub label: Option<usize>,
}

/// Every intermediate artefact of one evaluation of `phi`.
#[derive(Debug, Clone, Serialize)]
pub struct ForwardTrace {
    pub input: String,
    pub des2_set: Vec<usize>,
    pub inv2_pairs: Vec<(usize, usize)>,
    pub tops: Vec<usize>,
    pub c0: Vec<usize>,
    pub c: Vec<usize>,
    pub adjustments: Vec<Adjustment>,
    pub omega: OmegaWord,
    /// Whether the dot relations of `ω` agree with the capacity skeleton.
    pub omega_consistent: bool,
    pub graph: Vec<VertexRecord>,
    pub circle_passes: Vec<CandidatePass>,
    pub dot_passes: Vec<CandidatePass>,
    pub output: String,
}

pub fn phi_trace(p: &Permutation) -> Result<ForwardTrace> {
    let c0 = compute_c0(p)?;
    c0.check_bounds()?;
    let (c, adjustments) = adjust_with_log(p, &c0)?;
    c.check_bounds()?;
    let g = build_graph(p, &c)?;
    let omega_consistent = omega_relations(p, &c) == g.relations;
    let (g, circle_passes) = label_circles(&g, p)?;
    let (g, dot_passes) = label_dots(&g, p)?;
    let word = g
        .word()
        .ok_or_else(|| Error::Invariant("graph left partially labelled".into()))?;
    let tau = Permutation::new(word).map_err(|e| Error::Invariant(e.to_string()))?;
    if g.descents() != crate::stats::descent_set(&tau) {
        return Err(Error::Invariant(format!("labels of {tau} break the slope relations")));
    }
    Ok(ForwardTrace {
        input: p.to_string(),
        des2_set: c.bounds[1..].to_vec(),
        inv2_pairs: two_inversion_set(p).pairs,
        tops: tops(p),
        c0: c0.values,
        c: c.values,
        adjustments,
        omega: omega_word(p),
        omega_consistent,
        graph: g.vertex_records(),
        circle_passes,
        dot_passes,
        output: tau.to_string(),
    })
}

/// `phi(σ)`.
pub fn phi(p: &Permutation) -> Result<Permutation> {
    let c0 = compute_c0(p)?;
    let c = adjust_capacities(p, &c0)?;
    let g = build_graph(p, &c)?;
    let (g, _) = label_circles(&g, p)?;
    let (g, _) = label_dots(&g, p)?;
    let word = g
        .word()
        .ok_or_else(|| Error::Invariant("graph left partially labelled".into()))?;
    Permutation::new(word).map_err(|e| Error::Invariant(e.to_string()))
}

/// The final capacity sequence `(c_k)`.
pub fn capacities(p: &Permutation) -> Result<CapacitySequence> {
    adjust_capacities(p, &compute_c0(p)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::perm::enumerate;
    use crate::stats::{descent_set, exceedance_values, inv2, stat_vector, StatVector};

    fn p(s: &str) -> Permutation {
        s.parse().unwrap()
    }

    #[test]
    fn tops_examples() {
        assert_eq!(tops(&p("549321867")), vec![0, 3, 7]);
        assert_eq!(tops_of(&[1, 2, 3]), vec![0, 1, 1, 1]);
        assert_eq!(tops(&p("425736981")), vec![0, 1, 4, 8]);
    }

    #[test]
    fn initial_capacities() {
        assert_eq!(compute_c0(&p("549321867")).unwrap().values, vec![3, 2, 1]);
        assert_eq!(compute_c0(&p("425736981")).unwrap().values, vec![1, 1, 2, 0]);
        assert_eq!(compute_c0(&p("12345")).unwrap().values, vec![0]);
    }

    #[test]
    fn omega_examples() {
        let w = omega_word(&p("425736981"));
        assert_eq!((w.letters, w.positions), (vec![5, 3, 6, 8, 1], vec![3, 5, 6, 8, 9]));
        assert_eq!(omega_word(&p("123")).letters, vec![1, 2, 3]);
        let w = omega_word(&p("21"));
        assert_eq!((w.letters, w.positions), (vec![1], vec![2]));
    }

    #[test]
    fn adjusted_capacities() {
        let s0 = p("425736981");
        let c = adjust_capacities(&s0, &compute_c0(&s0).unwrap()).unwrap();
        assert_eq!(c.values, vec![1, 2, 1, 0]);
        assert_eq!(capacities(&p("12345")).unwrap().values, vec![0]);
        assert_eq!(capacities(&p("549321867")).unwrap().values, vec![3, 2, 1]);
    }

    #[test]
    fn graphs_of_worked_example() {
        let s0 = p("425736981");
        let c0 = compute_c0(&s0).unwrap();
        let g0 = build_graph(&s0, &c0).unwrap();
        assert_eq!(g0.positions_of(VertexKind::Circle), vec![1, 2, 5, 6]);
        let c = adjust_capacities(&s0, &c0).unwrap();
        let g = build_graph(&s0, &c).unwrap();
        assert_eq!(g.positions_of(VertexKind::Circle), vec![1, 2, 3, 5]);
        assert_eq!(g.descents(), vec![1, 3, 5, 8]);
        assert_eq!(omega_relations(&s0, &c), g.relations);
        let id = build_graph(&p("1234"), &capacities(&p("1234")).unwrap()).unwrap();
        assert!(id.descents().is_empty());
        assert!(id.kinds.iter().all(|&k| k == VertexKind::Dot));
    }

    #[test]
    fn labels_of_worked_example() {
        let s0 = p("425736981");
        let g = build_graph(&s0, &capacities(&s0).unwrap()).unwrap();
        let (g, _) = label_circles(&g, &s0).unwrap();
        let circ: Vec<_> = g.positions_of(VertexKind::Circle).iter().map(|&i| g.labels[i - 1]).collect();
        assert_eq!(circ, vec![Some(9), Some(5), Some(6), Some(8)]);
        let (g, _) = label_dots(&g, &s0).unwrap();
        let dots: Vec<_> = g.positions_of(VertexKind::Dot).iter().map(|&i| g.labels[i - 1]).collect();
        assert_eq!(dots, vec![Some(3), Some(2), Some(4), Some(7), Some(1)]);
    }

    #[test]
    fn small_labellings() {
        let q = p("21");
        let g = build_graph(&q, &capacities(&q).unwrap()).unwrap();
        let (g, _) = label_circles(&g, &q).unwrap();
        assert_eq!(g.labels, vec![Some(2), None]);
        let (g, _) = label_dots(&g, &q).unwrap();
        assert_eq!(g.labels, vec![Some(2), Some(1)]);
        let id = p("123");
        let g = build_graph(&id, &capacities(&id).unwrap()).unwrap();
        let (g2, passes) = label_circles(&g, &id).unwrap();
        assert_eq!(g2, g);
        assert!(passes.is_empty());
    }

    #[test]
    fn phi_examples() {
        assert_eq!(phi(&p("425736981")).unwrap(), p("956382471"));
        assert_eq!(phi(&p("12345")).unwrap(), p("12345"));
        assert_eq!(phi(&p("21")).unwrap(), p("21"));
    }

    #[test]
    fn trace_is_complete() {
        let t = phi_trace(&p("425736981")).unwrap();
        assert_eq!(t.output, "9,5,6,3,8,2,4,7,1");
        assert_eq!(t.c0, vec![1, 1, 2, 0]);
        assert_eq!(t.c, vec![1, 2, 1, 0]);
        assert_eq!(t.graph.len(), 9);
        assert_eq!(t.circle_passes.first().unwrap().stage, "initial");
        assert_eq!(t.dot_passes.last().unwrap().stage, "final");
        assert!(t.omega_consistent);
    }

    #[test]
    fn image_properties_up_to_six() {
        for n in 1..=6 {
            for q in enumerate(n).unwrap() {
                let c = capacities(&q).unwrap();
                let t = phi(&q).unwrap();
                assert_eq!(stat_vector(&t, StatVector::Rhs).as_tuple(), stat_vector(&q, StatVector::Lhs).as_tuple(), "{q}");
                assert_eq!(exceedance_values(&t), {
                    let mut e = two_inversion_set(&q).ends();
                    e.sort_unstable();
                    e
                });
                assert_eq!(descent_set(&t), c.descents());
                assert_eq!(c.total(), inv2(&q));
                assert_eq!(c.values[0] > 0, crate::stats::des2_tilde(&q) > crate::stats::des2(&q));
            }
        }
    }
}
