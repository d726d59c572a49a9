//! Exact search over small planes: domination number, minimal dominating
//! sets, minimum blocking sets and blocking-set completion.
//!
//! Vertices of the incidence graph are numbered points first (`0..n`), then
//! lines (`n..2n`), and held in `u128` masks, which caps the solver at
//! planes with `2n ≤ 128`.

use crate::constructions::family_i;
use crate::plane::{LineId, Plane, PointId};
use crate::sets::{size_lower_bound, Candidate, PointSet};
use serde::Serialize;
use std::sync::atomic::{AtomicBool, AtomicU64, AtomicUsize, Ordering};
use std::sync::Mutex;
use std::time::{Duration, Instant};
use thiserror::Error;

type Mask = u128;

/// Largest order accepted by [`min_dominating`].
pub const MAX_GAMMA_ORDER: u32 = 5;
/// Largest order accepted by [`min_blocking`].
pub const MAX_BLOCKING_ORDER: u32 = 5;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SolverError {
    #[error("plane fails the projective plane axioms")]
    InvalidPlane,
    #[error("order {order} is too large for {what}")]
    TooLarge { order: u32, what: &'static str },
    #[error("bad parameter: {0}")]
    BadParameter(String),
    #[error("budget exhausted with optimum in [{}, {}]", .0.lower, .0.upper)]
    BudgetExhausted(Box<PartialResult>),
}

/// What is known when the time budget runs out.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct PartialResult {
    /// Lower bound proven by the search itself.
    pub lower: usize,
    /// Counting bound `2q` valid for every projective plane.
    pub analytic_lower: usize,
    pub upper: usize,
    pub witness: Candidate,
    pub nodes_expanded: u64,
}

impl PartialResult {
    /// The incumbent already matches the counting bound.
    pub fn bound_met(&self) -> bool {
        self.lower.max(self.analytic_lower) >= self.upper
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Proof {
    /// Every smaller size was refuted by search.
    Exhausted,
    /// The incumbent equals the counting bound; no refutation search ran.
    BoundMet,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SearchResult {
    pub optimum: usize,
    pub witness: Candidate,
    pub nodes_expanded: u64,
    pub proof: Proof,
}

#[derive(Debug, Clone)]
pub struct SearchOptions {
    pub budget: Option<Duration>,
    pub threads: usize,
    /// Accept the incumbent as soon as it meets the counting bound.
    pub analytic_pruning: bool,
}

impl Default for SearchOptions {
    fn default() -> Self {
        SearchOptions {
            budget: None,
            threads: default_threads(),
            analytic_pruning: false,
        }
    }
}

/// `PLANEDOM_THREADS` if set, else the machine's parallelism.
pub fn default_threads() -> usize {
    std::env::var("PLANEDOM_THREADS")
        .ok()
        .and_then(|s| s.parse::<usize>().ok())
        .filter(|&t| t > 0)
        .unwrap_or_else(|| {
            std::thread::available_parallelism()
                .map(|n| n.get())
                .unwrap_or(1)
        })
}

fn bit(i: usize) -> Mask {
    1 << i
}

fn low_bits(len: usize) -> Mask {
    if len >= 128 {
        Mask::MAX
    } else {
        bit(len) - 1
    }
}

/// Bits `i..len`.
fn bits_from(i: usize, len: usize) -> Mask {
    low_bits(len) & !low_bits(i)
}

fn ones(mut m: Mask) -> impl Iterator<Item = usize> {
    std::iter::from_fn(move || {
        if m == 0 {
            None
        } else {
            let i = m.trailing_zeros() as usize;
            m &= m - 1;
            Some(i)
        }
    })
}

fn pop(m: Mask) -> usize {
    m.count_ones() as usize
}

/// Sum of the `t` largest values, for every `t`.
fn prefix_of_largest(mut gains: Vec<usize>) -> Vec<usize> {
    gains.sort_unstable_by(|a, b| b.cmp(a));
    let mut pre = Vec::with_capacity(gains.len() + 1);
    pre.push(0);
    for g in gains {
        pre.push(pre.last().unwrap() + g);
    }
    pre
}

const INFEASIBLE: usize = usize::MAX / 4;

struct Deadline {
    at: Option<Instant>,
}

impl Deadline {
    fn new(budget: Option<Duration>) -> Self {
        Deadline {
            at: budget.map(|b| Instant::now() + b),
        }
    }

    fn passed(&self) -> bool {
        self.at.is_some_and(|t| Instant::now() >= t)
    }
}

/// A covering problem: choose elements `0..len` so that the union of their
/// cover masks contains `all`.
trait CoverModel: Sync {
    fn len(&self) -> usize;
    fn cover(&self, v: usize) -> Mask;
    fn all(&self) -> Mask;
    /// Fewest further choices from `avail` that could finish the cover.
    fn lower_bound(&self, covered: Mask, avail: Mask) -> usize;
    /// Elements that cover `u`.
    fn coverers(&self, u: usize) -> Mask;
    /// Whether adding `v` to `chosen` is disallowed outright.
    fn forbidden(&self, _chosen: Mask, _v: usize) -> bool {
        false
    }
}

/// Closed neighbourhoods of the incidence graph.
struct Domination {
    n: usize,
    neigh: Vec<Mask>,
    points: Mask,
    lines: Mask,
}

impl Domination {
    fn new(plane: &Plane) -> Self {
        let n = plane.size();
        assert!(2 * n <= 128, "incidence graph too large for the solver");
        let mut neigh = vec![0; 2 * n];
        for p in plane.points() {
            neigh[p.index()] |= bit(p.index());
            for l in plane.pencil(p) {
                neigh[p.index()] |= bit(n + l.index());
                neigh[n + l.index()] |= bit(p.index());
            }
        }
        for l in plane.lines() {
            neigh[n + l.index()] |= bit(n + l.index());
        }
        Domination {
            n,
            neigh,
            points: low_bits(n),
            lines: bits_from(n, 2 * n),
        }
    }

    fn to_candidate(&self, vs: &[usize]) -> Candidate {
        Candidate::new(
            vs.iter().filter(|&&v| v < self.n).map(|&v| PointId(v as u32)),
            vs.iter()
                .filter(|&&v| v >= self.n)
                .map(|&v| LineId((v - self.n) as u32)),
        )
    }

    fn vertices_of(&self, c: &Candidate) -> Vec<usize> {
        c.points
            .iter()
            .map(|p| p.index())
            .chain(c.lines.iter().map(|l| l.index() + self.n))
            .collect()
    }
}

impl CoverModel for Domination {
    fn len(&self) -> usize {
        2 * self.n
    }

    fn cover(&self, v: usize) -> Mask {
        self.neigh[v]
    }

    fn all(&self) -> Mask {
        self.points | self.lines
    }

    fn coverers(&self, u: usize) -> Mask {
        self.neigh[u]
    }

    /// With `x` new points and `y` new lines, the undominated lines number at
    /// most the `x` best point gains plus `y`, and dually. The bound is the
    /// least `x + y` meeting both.
    fn lower_bound(&self, covered: Mask, avail: Mask) -> usize {
        let und = self.all() & !covered;
        if und == 0 {
            return 0;
        }
        let ul = und & self.lines;
        let up = und & self.points;
        let (nl, np) = (pop(ul), pop(up));
        let pre_p = prefix_of_largest(
            ones(avail & self.points)
                .map(|p| pop(self.neigh[p] & ul))
                .collect(),
        );
        let pre_l = prefix_of_largest(
            ones(avail & self.lines)
                .map(|l| pop(self.neigh[l] & up))
                .collect(),
        );
        let (xs, ys) = (pre_p.len() - 1, pre_l.len() - 1);
        for t in 0..=xs + ys {
            for x in t.saturating_sub(ys)..=t.min(xs) {
                let y = t - x;
                if nl <= pre_p[x] + y && np <= pre_l[y] + x {
                    return t;
                }
            }
        }
        INFEASIBLE
    }
}

enum Decision {
    Found(Vec<usize>),
    Refuted,
    TimedOut,
}

struct Worker<'a, M: CoverModel> {
    model: &'a M,
    bound: usize,
    nodes: u64,
    deadline: &'a Deadline,
    stop: &'a AtomicBool,
    timed_out: bool,
}

impl<M: CoverModel> Worker<'_, M> {
    fn tick(&mut self) -> bool {
        self.nodes += 1;
        if self.nodes & 1023 == 1 && self.deadline.passed() {
            self.timed_out = true;
            self.stop.store(true, Ordering::Relaxed);
        }
        self.timed_out || self.stop.load(Ordering::Relaxed)
    }

    /// The undominated element with the fewest available coverers.
    fn branch_target(&self, covered: Mask, avail: Mask) -> Option<(usize, Mask)> {
        ones(self.model.all() & !covered)
            .map(|u| (u, self.model.coverers(u) & avail))
            .min_by_key(|&(u, c)| (pop(c), u))
    }

    /// Minimum-remaining-values branch and bound for a cover of size at
    /// most `bound`.
    fn mrv(&mut self, chosen: &mut Vec<usize>, covered: Mask, avail: Mask) -> bool {
        if self.tick() {
            return false;
        }
        if covered & self.model.all() == self.model.all() {
            return true;
        }
        if chosen.len() >= self.bound
            || chosen.len() + self.model.lower_bound(covered, avail) > self.bound
        {
            return false;
        }
        let Some((_, cands)) = self.branch_target(covered, avail) else {
            return false;
        };
        let mut avail = avail;
        for v in ones(cands) {
            avail &= !bit(v);
            chosen.push(v);
            if self.mrv(chosen, covered | self.model.cover(v), avail) {
                return true;
            }
            chosen.pop();
        }
        false
    }

    /// Include-first search in id order. The first cover found is the
    /// lexicographically least one of size at most `bound`. With `tight`,
    /// no smaller cover exists, so elements adding nothing are skipped.
    fn lex(
        &mut self,
        i: usize,
        chosen: &mut Vec<usize>,
        chosen_mask: Mask,
        covered: Mask,
        tight: bool,
    ) -> bool {
        if self.tick() {
            return false;
        }
        let all = self.model.all();
        if covered & all == all {
            return true;
        }
        let len = self.model.len();
        if chosen.len() >= self.bound || i >= len {
            return false;
        }
        let avail = bits_from(i, len);
        if ones(all & !covered).any(|u| self.model.coverers(u) & avail == 0) {
            return false;
        }
        if chosen.len() + self.model.lower_bound(covered, avail) > self.bound {
            return false;
        }
        let gain = self.model.cover(i) & !covered;
        if !(tight && gain == 0) && !self.model.forbidden(chosen_mask, i) {
            chosen.push(i);
            if self.lex(i + 1, chosen, chosen_mask | bit(i), covered | self.model.cover(i), tight) {
                return true;
            }
            chosen.pop();
        }
        self.lex(i + 1, chosen, chosen_mask, covered, tight)
    }
}

/// Is there a cover of size at most `bound`? Root children are shared among
/// worker threads; a refutation explores the same tree on any schedule.
fn decide<M: CoverModel>(
    model: &M,
    bound: usize,
    threads: usize,
    deadline: &Deadline,
    nodes: &AtomicU64,
) -> Decision {
    let stop = AtomicBool::new(false);
    let root = Worker {
        model,
        bound,
        nodes: 0,
        deadline,
        stop: &stop,
        timed_out: false,
    };
    let all_avail = low_bits(model.len());
    if bound == 0 {
        return if model.all() == 0 {
            Decision::Found(vec![])
        } else {
            Decision::Refuted
        };
    }
    if model.lower_bound(0, all_avail) > bound {
        nodes.fetch_add(1, Ordering::Relaxed);
        return Decision::Refuted;
    }
    let Some((_, cands)) = root.branch_target(0, all_avail) else {
        return Decision::Found(vec![]);
    };
    let children: Vec<(usize, Mask)> = {
        let mut avail = all_avail;
        ones(cands)
            .map(|v| {
                avail &= !bit(v);
                (v, avail)
            })
            .collect()
    };
    nodes.fetch_add(1, Ordering::Relaxed);
    let next = AtomicUsize::new(0);
    let found: Mutex<Option<Vec<usize>>> = Mutex::new(None);
    let timed_out = AtomicBool::new(false);
    let work = || {
        let mut w = Worker {
            model,
            bound,
            nodes: 0,
            deadline,
            stop: &stop,
            timed_out: false,
        };
        loop {
            let i = next.fetch_add(1, Ordering::Relaxed);
            if i >= children.len() || stop.load(Ordering::Relaxed) {
                break;
            }
            let (v, avail) = children[i];
            let mut chosen = vec![v];
            if w.mrv(&mut chosen, model.cover(v), avail) {
                let mut slot = found.lock().expect("no worker panics");
                if slot.is_none() {
                    *slot = Some(chosen);
                }
                stop.store(true, Ordering::Relaxed);
                break;
            }
        }
        nodes.fetch_add(w.nodes, Ordering::Relaxed);
        if w.timed_out {
            timed_out.store(true, Ordering::Relaxed);
        }
    };
    let threads = threads.clamp(1, children.len().max(1));
    if threads == 1 {
        work();
    } else {
        std::thread::scope(|s| {
            for _ in 0..threads {
                s.spawn(work);
            }
        });
    }
    match found.into_inner().expect("no worker panics") {
        Some(vs) => Decision::Found(vs),
        None if timed_out.load(Ordering::Relaxed) => Decision::TimedOut,
        None => Decision::Refuted,
    }
}

fn lex_least<M: CoverModel>(
    model: &M,
    bound: usize,
    tight: bool,
    deadline: &Deadline,
    nodes: &AtomicU64,
) -> Decision {
    let stop = AtomicBool::new(false);
    let mut w = Worker {
        model,
        bound,
        nodes: 0,
        deadline,
        stop: &stop,
        timed_out: false,
    };
    let mut chosen = vec![];
    let hit = w.lex(0, &mut chosen, 0, 0, tight);
    nodes.fetch_add(w.nodes, Ordering::Relaxed);
    if hit {
        Decision::Found(chosen)
    } else if w.timed_out {
        Decision::TimedOut
    } else {
        Decision::Refuted
    }
}

fn check_plane(plane: &Plane) -> Result<(), SolverError> {
    if plane.validate_axioms().is_valid() {
        Ok(())
    } else {
        Err(SolverError::InvalidPlane)
    }
}

/// Domination number with the lexicographically least minimum witness.
pub fn min_dominating(plane: &Plane) -> Result<SearchResult, SolverError> {
    min_dominating_with(plane, &SearchOptions::default())
}

pub fn min_dominating_with(
    plane: &Plane,
    opts: &SearchOptions,
) -> Result<SearchResult, SolverError> {
    let q = plane.order();
    if q > MAX_GAMMA_ORDER {
        return Err(SolverError::TooLarge {
            order: q,
            what: "domination number search",
        });
    }
    check_plane(plane)?;
    let model = Domination::new(plane);
    let deadline = Deadline::new(opts.budget);
    let nodes = AtomicU64::new(0);

    let l0 = LineId(0);
    let p0 = plane.points_on(l0).next().expect("lines are nonempty");
    let seed = family_i(plane, l0, p0).expect("point lies on its line");
    let mut incumbent = model.vertices_of(&seed.candidate);
    let analytic = size_lower_bound(q, 0, 0).domination_number as usize;
    let mut lower = model.lower_bound(0, low_bits(model.len()));

    let exhausted = |lower: usize, upper: usize, witness: &[usize], nodes: &AtomicU64| {
        SolverError::BudgetExhausted(Box::new(PartialResult {
            lower,
            analytic_lower: analytic,
            upper,
            witness: model.to_candidate(witness),
            nodes_expanded: nodes.load(Ordering::Relaxed),
        }))
    };

    let proof = if opts.analytic_pruning && lower.max(analytic) >= incumbent.len() {
        Proof::BoundMet
    } else {
        while incumbent.len() > lower {
            match decide(&model, incumbent.len() - 1, opts.threads, &deadline, &nodes) {
                Decision::Found(vs) => incumbent = vs,
                Decision::Refuted => lower = incumbent.len(),
                Decision::TimedOut => {
                    return Err(exhausted(lower, incumbent.len(), &incumbent, &nodes))
                }
            }
        }
        Proof::Exhausted
    };
    let optimum = incumbent.len();
    let witness = match lex_least(&model, optimum, true, &deadline, &nodes) {
        Decision::Found(vs) => vs,
        Decision::TimedOut => {
            let lower = if proof == Proof::Exhausted { optimum } else { lower };
            return Err(exhausted(lower, optimum, &incumbent, &nodes));
        }
        Decision::Refuted => unreachable!("a cover of this size is known"),
    };
    Ok(SearchResult {
        optimum,
        witness: model.to_candidate(&witness),
        nodes_expanded: nodes.load(Ordering::Relaxed),
        proof,
    })
}

fn minimal_guard(q: u32, max_size: usize) -> Result<(), SolverError> {
    let ok = q <= 3 || (q == 4 && max_size <= 2 * q as usize + 2);
    if ok {
        Ok(())
    } else {
        Err(SolverError::TooLarge {
            order: q,
            what: "minimal dominating set enumeration at this size bound",
        })
    }
}

struct Enumerator<'a> {
    model: &'a Domination,
    max_size: usize,
    out: Vec<Vec<usize>>,
}

impl Enumerator<'_> {
    fn rec(&mut self, i: usize, chosen: &mut Vec<usize>, covered: Mask, multi: Mask) {
        let m = self.model;
        let all = m.all();
        let once = covered & !multi;
        if chosen.iter().any(|&x| m.neigh[x] & once == 0) {
            return;
        }
        if covered == all {
            self.out.push(chosen.clone());
            return;
        }
        let len = m.len();
        if chosen.len() >= self.max_size || i >= len {
            return;
        }
        let avail = bits_from(i, len);
        if ones(all & !covered).any(|u| m.neigh[u] & avail == 0) {
            return;
        }
        if chosen.len() + m.lower_bound(covered, avail) > self.max_size {
            return;
        }
        let nv = m.neigh[i];
        if nv & !covered != 0 {
            chosen.push(i);
            self.rec(i + 1, chosen, covered | nv, multi | (covered & nv));
            chosen.pop();
        }
        self.rec(i + 1, chosen, covered, multi);
    }
}

/// All minimal dominating sets with at most `max_size` vertices, in
/// lexicographic order of their vertex lists.
pub fn enumerate_minimal_dominating(
    plane: &Plane,
    max_size: usize,
) -> Result<Vec<Candidate>, SolverError> {
    minimal_guard(plane.order(), max_size)?;
    check_plane(plane)?;
    let model = Domination::new(plane);
    let mut e = Enumerator {
        model: &model,
        max_size,
        out: vec![],
    };
    e.rec(0, &mut vec![], 0, 0);
    Ok(e.out.iter().map(|vs| model.to_candidate(vs)).collect())
}

/// Points covering lines; optionally no chosen set may contain a full line.
struct Blocking {
    n: usize,
    pencils: Vec<Mask>,
    line_points: Vec<Mask>,
    nontrivial: bool,
}

impl Blocking {
    fn new(plane: &Plane, nontrivial: bool) -> Self {
        let n = plane.size();
        assert!(n <= 128, "plane too large for the solver");
        let mut pencils = vec![0; n];
        let mut line_points = vec![0; n];
        for p in plane.points() {
            for l in plane.pencil(p) {
                pencils[p.index()] |= bit(l.index());
                line_points[l.index()] |= bit(p.index());
            }
        }
        Blocking {
            n,
            pencils,
            line_points,
            nontrivial,
        }
    }
}

impl CoverModel for Blocking {
    fn len(&self) -> usize {
        self.n
    }

    fn cover(&self, v: usize) -> Mask {
        self.pencils[v]
    }

    fn all(&self) -> Mask {
        low_bits(self.n)
    }

    fn coverers(&self, u: usize) -> Mask {
        self.line_points[u]
    }

    fn lower_bound(&self, covered: Mask, avail: Mask) -> usize {
        let und = self.all() & !covered;
        let need = pop(und);
        if need == 0 {
            return 0;
        }
        let pre = prefix_of_largest(ones(avail).map(|p| pop(self.pencils[p] & und)).collect());
        pre.iter().position(|&s| s >= need).unwrap_or(INFEASIBLE)
    }

    fn forbidden(&self, chosen: Mask, v: usize) -> bool {
        let with = chosen | bit(v);
        self.nontrivial
            && ones(self.pencils[v]).any(|l| self.line_points[l] & !with == 0)
    }
}

/// Smallest blocking set, or with `nontrivial` the smallest one containing
/// no full line. `None` when no such set exists.
pub fn min_blocking(plane: &Plane, nontrivial: bool) -> Result<Option<SearchResult>, SolverError> {
    let q = plane.order();
    if q > MAX_BLOCKING_ORDER {
        return Err(SolverError::TooLarge {
            order: q,
            what: "blocking set search",
        });
    }
    check_plane(plane)?;
    let model = Blocking::new(plane, nontrivial);
    let deadline = Deadline::new(None);
    let nodes = AtomicU64::new(0);
    for size in 1..=model.n {
        match lex_least(&model, size, false, &deadline, &nodes) {
            Decision::Found(vs) => {
                return Ok(Some(SearchResult {
                    optimum: vs.len(),
                    witness: Candidate::new(vs.into_iter().map(|p| PointId(p as u32)), []),
                    nodes_expanded: nodes.load(Ordering::Relaxed),
                    proof: Proof::Exhausted,
                }))
            }
            Decision::Refuted => {}
            Decision::TimedOut => unreachable!("no deadline"),
        }
    }
    Ok(None)
}

/// Largest `t` accepted by [`extend_to_blocking`].
pub const MAX_EXTENSION: usize = 4;

/// Fewest points, at most `t`, whose addition makes `s` blocking. Among
/// extensions of that size the lexicographically least is returned.
pub fn extend_to_blocking(
    plane: &Plane,
    s: &PointSet,
    t: usize,
) -> Result<Option<PointSet>, SolverError> {
    if t > MAX_EXTENSION {
        return Err(SolverError::BadParameter(format!(
            "at most {MAX_EXTENSION} added points, got {t}"
        )));
    }
    let n = plane.size();
    if n > 128 {
        return Err(SolverError::TooLarge {
            order: plane.order(),
            what: "blocking set completion",
        });
    }
    let model = Blocking::new(plane, false);
    let mut covered: Mask = 0;
    for p in s {
        covered |= model.pencils[p.index()];
    }
    let skew = model.all() & !covered;
    let cands: Vec<usize> = (0..n)
        .filter(|&p| !s.contains(&PointId(p as u32)) && model.pencils[p] & skew != 0)
        .collect();

    fn search(
        model: &Blocking,
        cands: &[usize],
        start: usize,
        left: usize,
        need: Mask,
        picked: &mut Vec<usize>,
    ) -> bool {
        if need == 0 {
            return true;
        }
        if left == 0 {
            return false;
        }
        for i in start..cands.len() {
            let p = cands[i];
            picked.push(p);
            if search(model, cands, i + 1, left - 1, need & !model.pencils[p], picked) {
                return true;
            }
            picked.pop();
        }
        false
    }

    for size in 0..=t {
        let mut picked = vec![];
        if search(&model, &cands, 0, size, skew, &mut picked) {
            return Ok(Some(picked.into_iter().map(|p| PointId(p as u32)).collect()));
        }
    }
    Ok(None)
}
