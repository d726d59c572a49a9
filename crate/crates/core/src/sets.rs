//! Predicates and counting formulas on a candidate `D = P_D ∪ L_D`.
//!
//! Vertices of the incidence graph are points and lines. A candidate is
//! dominating when every line outside `L_D` meets `P_D` and every point
//! outside `P_D` lies on a line of `L_D`.

use crate::bits::BitSet;
use crate::plane::{LineId, Plane, PointId};
use serde::{Deserialize, Serialize};
use std::collections::{BTreeMap, BTreeSet, HashSet};
use thiserror::Error;

pub type PointSet = BTreeSet<PointId>;
pub type LineSet = BTreeSet<LineId>;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SetsError {
    #[error("candidate is not dominating")]
    NotDominating,
    #[error("candidate is not a minimal dominating set")]
    NotMinimal,
    #[error("point set is not blocking")]
    NotBlocking,
    #[error("point {0} is not essential for the blocking set")]
    NotEssential(PointId),
    #[error("{kind} id {id} out of range for a plane with {n} {kind}s")]
    OutOfRange { kind: &'static str, id: u32, n: usize },
    #[error("duplicate {kind} id {id}")]
    Duplicate { kind: &'static str, id: u32 },
    #[error("invalid candidate document: {0}")]
    Parse(String),
}

#[derive(Deserialize)]
struct RawCandidate {
    #[serde(default)]
    points: Vec<u32>,
    #[serde(default)]
    lines: Vec<u32>,
}

impl TryFrom<RawCandidate> for Candidate {
    type Error = SetsError;

    fn try_from(raw: RawCandidate) -> Result<Self, SetsError> {
        let mut points = PointSet::new();
        for id in raw.points {
            if !points.insert(PointId(id)) {
                return Err(SetsError::Duplicate { kind: "point", id });
            }
        }
        let mut lines = LineSet::new();
        for id in raw.lines {
            if !lines.insert(LineId(id)) {
                return Err(SetsError::Duplicate { kind: "line", id });
            }
        }
        Ok(Candidate { points, lines })
    }
}

/// A point set together with a line set on one plane.
#[derive(Debug, Clone, Default, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(try_from = "RawCandidate")]
pub struct Candidate {
    pub points: PointSet,
    pub lines: LineSet,
}

impl Candidate {
    pub fn new(
        points: impl IntoIterator<Item = PointId>,
        lines: impl IntoIterator<Item = LineId>,
    ) -> Self {
        Candidate {
            points: points.into_iter().collect(),
            lines: lines.into_iter().collect(),
        }
    }

    pub fn size(&self) -> usize {
        self.points.len() + self.lines.len()
    }

    /// The same ids with the roles of points and lines exchanged, which is
    /// the candidate's image on the dual plane.
    pub fn swapped(&self) -> Candidate {
        Candidate {
            points: self.lines.iter().map(|l| PointId(l.0)).collect(),
            lines: self.points.iter().map(|p| LineId(p.0)).collect(),
        }
    }

    pub fn from_json(bytes: &[u8]) -> Result<Candidate, SetsError> {
        let raw: RawCandidate =
            serde_json::from_slice(bytes).map_err(|e| SetsError::Parse(e.to_string()))?;
        Candidate::try_from(raw)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("candidate serializes")
    }

    /// Checks that every id exists on `plane`.
    pub fn check(&self, plane: &Plane) -> Result<(), SetsError> {
        let n = plane.size();
        if let Some(p) = self.points.iter().find(|p| p.index() >= n) {
            return Err(SetsError::OutOfRange { kind: "point", id: p.0, n });
        }
        if let Some(l) = self.lines.iter().find(|l| l.index() >= n) {
            return Err(SetsError::OutOfRange { kind: "line", id: l.0, n });
        }
        Ok(())
    }

    pub(crate) fn point_bits(&self, n: usize) -> BitSet {
        BitSet::from_indices(n, self.points.iter().map(|p| p.index()))
    }

    pub(crate) fn line_bits(&self, n: usize) -> BitSet {
        BitSet::from_indices(n, self.lines.iter().map(|l| l.index()))
    }
}

pub(crate) fn point_bits(plane: &Plane, s: &PointSet) -> BitSet {
    BitSet::from_indices(plane.size(), s.iter().map(|p| p.index()))
}

pub(crate) fn line_bits(plane: &Plane, l: &LineSet) -> BitSet {
    BitSet::from_indices(plane.size(), l.iter().map(|l| l.index()))
}

pub(crate) fn blocks_all(plane: &Plane, pts: &BitSet) -> bool {
    plane.lines().all(|l| plane.line_row(l).intersects(pts))
}

pub(crate) fn dominating_bits(plane: &Plane, pts: &BitSet, lns: &BitSet) -> bool {
    plane
        .lines()
        .all(|l| lns.contains(l.index()) || plane.line_row(l).intersects(pts))
        && plane
            .points()
            .all(|p| pts.contains(p.index()) || plane.point_row(p).intersects(lns))
}

pub fn is_blocking(plane: &Plane, s: &PointSet) -> bool {
    blocks_all(plane, &point_bits(plane, s))
}

pub fn is_covering(plane: &Plane, l: &LineSet) -> bool {
    let lns = line_bits(plane, l);
    plane.points().all(|p| plane.point_row(p).intersects(&lns))
}

/// Number of lines meeting `s`.
pub fn blocked_line_count(plane: &Plane, s: &PointSet) -> usize {
    let pts = point_bits(plane, s);
    plane
        .lines()
        .filter(|&l| plane.line_row(l).intersects(&pts))
        .count()
}

/// Number of points on at least one line of `l`.
pub fn covered_point_count(plane: &Plane, l: &LineSet) -> usize {
    let lns = line_bits(plane, l);
    plane
        .points()
        .filter(|&p| plane.point_row(p).intersects(&lns))
        .count()
}

pub fn is_dominating(plane: &Plane, d: &Candidate) -> bool {
    let n = plane.size();
    dominating_bits(plane, &d.point_bits(n), &d.line_bits(n))
}

/// Dominator counts `|N[v] ∩ D|` for every vertex; points first, then lines.
struct Coverage<'a> {
    plane: &'a Plane,
    n: usize,
    cnt: Vec<u32>,
}

/// Vertex ids `0..n` are points, `n..2n` are lines.
fn closed_neighbourhood(plane: &Plane, v: usize) -> impl Iterator<Item = usize> + '_ {
    let n = plane.size();
    let (own, other): (usize, Box<dyn Iterator<Item = usize>>) = if v < n {
        (
            v,
            Box::new(plane.point_row(PointId(v as u32)).iter().map(move |l| l + n)),
        )
    } else {
        (v, Box::new(plane.line_row(LineId((v - n) as u32)).iter()))
    };
    std::iter::once(own).chain(other)
}

impl<'a> Coverage<'a> {
    fn new(plane: &'a Plane, members: &[usize]) -> Self {
        let n = plane.size();
        let mut c = Coverage {
            plane,
            n,
            cnt: vec![0; 2 * n],
        };
        for &v in members {
            c.add(v);
        }
        c
    }

    fn add(&mut self, v: usize) {
        for u in closed_neighbourhood(self.plane, v) {
            self.cnt[u] += 1;
        }
    }

    fn has_private(&self, v: usize) -> bool {
        closed_neighbourhood(self.plane, v).any(|u| self.cnt[u] == 1)
    }

    fn dominators<'s>(&'s self, u: usize, members: &'s HashSet<usize>) -> Vec<usize> {
        closed_neighbourhood(self.plane, u)
            .filter(|v| members.contains(v))
            .collect()
    }

    fn all_dominated(&self) -> bool {
        self.cnt.iter().all(|&c| c > 0)
    }
}

fn vertices(plane: &Plane, d: &Candidate) -> Vec<usize> {
    let n = plane.size();
    d.points
        .iter()
        .map(|p| p.index())
        .chain(d.lines.iter().map(|l| l.index() + n))
        .collect()
}

/// True iff removing any single vertex breaks domination.
pub fn is_minimal(plane: &Plane, d: &Candidate) -> Result<bool, SetsError> {
    let vs = vertices(plane, d);
    let cov = Coverage::new(plane, &vs);
    if !cov.all_dominated() {
        return Err(SetsError::NotDominating);
    }
    Ok(vs.iter().all(|&v| cov.has_private(v)))
}

/// Minimal, and no one-vertex augmentation `D ∪ {v}` contains a dominating
/// set smaller than `D`.
///
/// Dominating sets are closed upwards, so `D ∪ {v}` contains a dominating set
/// of size `< |D|` iff removing some pair from it stays dominating. A pair
/// `{x, y}` is removable iff neither has a private vertex and no vertex is
/// dominated by exactly `x` and `y`.
pub fn is_stable(plane: &Plane, d: &Candidate) -> Result<bool, SetsError> {
    if !is_minimal(plane, d)? {
        return Ok(false);
    }
    let n = plane.size();
    let vs = vertices(plane, d);
    let base = Coverage::new(plane, &vs);
    let member: HashSet<usize> = vs.iter().copied().collect();
    for v in (0..2 * n).filter(|v| !member.contains(v)) {
        let mut cov = Coverage {
            plane,
            n: base.n,
            cnt: base.cnt.clone(),
        };
        cov.add(v);
        let mut ext = member.clone();
        ext.insert(v);
        let removable: Vec<usize> = vs
            .iter()
            .copied()
            .chain(std::iter::once(v))
            .filter(|&x| !cov.has_private(x))
            .collect();
        if removable.len() < 2 {
            continue;
        }
        let forbidden: HashSet<(usize, usize)> = (0..2 * n)
            .filter(|&u| cov.cnt[u] == 2)
            .map(|u| {
                let ds = cov.dominators(u, &ext);
                (ds[0].min(ds[1]), ds[0].max(ds[1]))
            })
            .collect();
        for (i, &x) in removable.iter().enumerate() {
            for &y in &removable[i + 1..] {
                if !forbidden.contains(&(x.min(y), x.max(y))) {
                    return Ok(false);
                }
            }
        }
    }
    Ok(true)
}

/// Contains `q` collinear points or `q` concurrent lines.
pub fn is_primal(plane: &Plane, d: &Candidate) -> bool {
    let q = plane.order() as usize;
    let n = plane.size();
    let pts = d.point_bits(n);
    let lns = d.line_bits(n);
    plane
        .lines()
        .any(|l| plane.line_row(l).intersection_count(&pts) >= q)
        || plane
            .points()
            .any(|p| plane.point_row(p).intersection_count(&lns) >= q)
}

/// Histogram of intersection sizes of a point set with every line (or,
/// dually, of a line set with every pencil).
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SecantSpectrum {
    pub histogram: BTreeMap<usize, usize>,
    pub k_max: usize,
    pub skew_count: usize,
}

impl SecantSpectrum {
    fn from_sizes(sizes: impl Iterator<Item = usize>) -> Self {
        let mut histogram = BTreeMap::new();
        for m in sizes {
            *histogram.entry(m).or_insert(0) += 1;
        }
        let k_max = histogram.keys().next_back().copied().unwrap_or(0);
        let skew_count = histogram.get(&0).copied().unwrap_or(0);
        SecantSpectrum {
            histogram,
            k_max,
            skew_count,
        }
    }

    /// The two double-counting identities for a set of `size` elements on a
    /// plane of order `q`.
    pub fn standard_equations_hold(&self, size: usize, q: u32) -> bool {
        let total: usize = self.histogram.values().sum();
        let first: usize = self.histogram.iter().map(|(m, c)| m * c).sum();
        let second: usize = self
            .histogram
            .iter()
            .map(|(m, c)| m * m.saturating_sub(1) * c)
            .sum();
        total == crate::plane::plane_size(q)
            && first == size * (q as usize + 1)
            && second == size * size.saturating_sub(1)
    }

    /// Sizes that actually occur.
    pub fn support(&self) -> std::iter::Copied<std::collections::btree_map::Keys<'_, usize, usize>> {
        self.histogram.keys().copied()
    }
}

pub fn secant_spectrum(plane: &Plane, s: &PointSet) -> SecantSpectrum {
    let pts = point_bits(plane, s);
    let spec =
        SecantSpectrum::from_sizes(plane.lines().map(|l| plane.line_row(l).intersection_count(&pts)));
    debug_assert!(spec.standard_equations_hold(s.len(), plane.order()));
    spec
}

pub fn concurrency_spectrum(plane: &Plane, l: &LineSet) -> SecantSpectrum {
    let lns = line_bits(plane, l);
    let spec = SecantSpectrum::from_sizes(
        plane
            .points()
            .map(|p| plane.point_row(p).intersection_count(&lns)),
    );
    debug_assert!(spec.standard_equations_hold(l.len(), plane.order()));
    spec
}

fn line_weight(m: usize, k: usize) -> i64 {
    if m == 0 {
        0
    } else {
        (m as i64 - 1) * (m as i64 - k as i64)
    }
}

/// `Σ (m_i - 1)(m_i - k)` over lines meeting `s`, where `m_i = |ℓ_i ∩ s|`.
///
/// Non-positive whenever no line meets `s` in more than `k` points.
pub fn weight(plane: &Plane, s: &PointSet, k: usize) -> i64 {
    assert!(k >= 1, "weight needs k >= 1");
    let pts = point_bits(plane, s);
    plane
        .lines()
        .map(|l| line_weight(plane.line_row(l).intersection_count(&pts), k))
        .sum()
}

/// Per-line weights of a point set.
#[derive(Debug, Clone)]
pub struct LineWeights<'a> {
    plane: &'a Plane,
    pub k: usize,
    pub per_line: Vec<i64>,
    pub total: i64,
}

impl LineWeights<'_> {
    pub fn of(&self, l: LineId) -> i64 {
        self.per_line[l.index()]
    }

    /// Lines of negative weight: secants that are neither tangents nor
    /// `k`-secants.
    pub fn heavy(&self) -> Vec<LineId> {
        self.plane.lines().filter(|&l| self.of(l) < 0).collect()
    }

    /// Sum of the weights of the lines through `p` other than `line`.
    pub fn through(&self, line: LineId, p: PointId) -> i64 {
        self.plane
            .pencil(p)
            .into_iter()
            .filter(|&m| m != line)
            .map(|m| self.of(m))
            .sum()
    }

    /// The total equals the line's own weight plus the pencil weights of its
    /// points, because every other line meets it exactly once.
    pub fn decomposes_along(&self, line: LineId) -> bool {
        let along: i64 = self
            .plane
            .points_on(line)
            .map(|p| self.through(line, p))
            .sum();
        self.total == self.of(line) + along
    }
}

pub fn line_weights<'a>(plane: &'a Plane, s: &PointSet, k: usize) -> LineWeights<'a> {
    assert!(k >= 1, "weight needs k >= 1");
    let pts = point_bits(plane, s);
    let per_line: Vec<i64> = plane
        .lines()
        .map(|l| line_weight(plane.line_row(l).intersection_count(&pts), k))
        .collect();
    let total = per_line.iter().sum();
    LineWeights {
        plane,
        k,
        per_line,
        total,
    }
}

/// A set of `k` points blocks at most `kq + 1` lines.
pub fn bound_blocked_lines(k_pts: u64, q: u64) -> u64 {
    k_pts * q + 1
}

/// Most points a set of `nlines` lines with maximum concurrency `c` can cover:
/// `c² − (nlines + 1)c + nlines(q + 1) + 1`.
pub fn bound_cover(c: u64, nlines: u64, q: u64) -> i64 {
    let (c, l, q) = (c as i64, nlines as i64, q as i64);
    c * c - (l + 1) * c + l * (q + 1) + 1
}

/// Lower bounds on the size of a dominating set from how many lines its
/// points can block (and dually).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct SizeLowerBound {
    pub from_points: i64,
    pub from_lines: i64,
    pub best: i64,
    /// Adding both bounds gives `|D| ≥ 2(q² + q)/(q + 1) = 2q` for any `D`.
    pub domination_number: i64,
}

pub fn size_lower_bound(q: u32, point_count: usize, line_count: usize) -> SizeLowerBound {
    let q = q as i64;
    let from_points = q * q + q - (q - 1) * point_count as i64;
    let from_lines = q * q + q - (q - 1) * line_count as i64;
    SizeLowerBound {
        from_points,
        from_lines,
        best: from_points.max(from_lines),
        domination_number: (2 * (q * q + q) + q) / (q + 1),
    }
}

/// Right-hand side of the weight lower bound
/// `w ≥ |P|² − (kq + 1)|P| + k(q² + q + 1 − |D|)`, valid for the points of any
/// dominating set whose longest secant has `k` points.
pub fn weight_lower_bound(size_p: u64, k: u64, size_d: u64, q: u64) -> i64 {
    let (p, k, d, q) = (size_p as i64, k as i64, size_d as i64, q as i64);
    p * p - (k * q + 1) * p + k * (q * q + q + 1 - d)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ImplicationStatus {
    Satisfied,
    Vacuous,
    Violated,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Implication {
    pub name: &'static str,
    pub hypothesis: bool,
    pub conclusion: bool,
    pub status: ImplicationStatus,
}

impl Implication {
    fn new(name: &'static str, hypothesis: bool, conclusion: bool) -> Self {
        let status = match (hypothesis, conclusion) {
            (false, _) => ImplicationStatus::Vacuous,
            (true, true) => ImplicationStatus::Satisfied,
            (true, false) => ImplicationStatus::Violated,
        };
        Implication {
            name,
            hypothesis,
            conclusion,
            status,
        }
    }
}

/// Short-secant implications evaluated on one dominating set. A violated
/// entry means a bug, not a counterexample.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ShortSecantReport {
    pub k: usize,
    pub c: usize,
    pub implications: Vec<Implication>,
}

impl ShortSecantReport {
    pub fn get(&self, name: &str) -> Option<&Implication> {
        self.implications.iter().find(|i| i.name == name)
    }

    pub fn any_violated(&self) -> bool {
        self.implications
            .iter()
            .any(|i| i.status == ImplicationStatus::Violated)
    }
}

pub fn check_short_secants(plane: &Plane, d: &Candidate) -> Result<ShortSecantReport, SetsError> {
    if !is_dominating(plane, d) {
        return Err(SetsError::NotDominating);
    }
    let q = plane.order() as i64;
    let k = secant_spectrum(plane, &d.points).k_max;
    let c = concurrency_spectrum(plane, &d.lines).k_max;
    let (p, l, sz) = (d.points.len() as i64, d.lines.len() as i64, d.size() as i64);
    let (ki, ci) = (k as i64, c as i64);
    let nonprimal = !is_primal(plane, d);
    let points_short = ki <= p - q + 1;
    let lines_short = ci <= l - q + 1;
    let implications = vec![
        Implication::new("point_secants_short", nonprimal && sz + p <= 4 * q - 3, points_short),
        Implication::new("line_pencils_short", nonprimal && sz + l <= 4 * q - 3, lines_short),
        Implication::new(
            "small_set_both_short",
            nonprimal && 2 * sz <= 5 * q - 3,
            points_short && lines_short,
        ),
        Implication::new(
            "many_lines",
            l + 2 - q <= ci && ci < q,
            l >= 4 * q - 2 - sz,
        ),
        Implication::new(
            "many_points",
            p + 2 - q <= ki && ki < q,
            p >= 4 * q - 2 - sz,
        ),
        Implication::new("both_sides_large", sz < 3 * q - 1, p >= q && l >= q),
    ];
    Ok(ShortSecantReport { k, c, implications })
}

/// Every line meets `P_D` in `0`, `1`, `k − 1` or `k` points, `k` the longest
/// secant.
pub fn secants_in_extremal_sizes(plane: &Plane, d: &Candidate) -> bool {
    let spec = secant_spectrum(plane, &d.points);
    let k = spec.k_max;
    spec.support()
        .all(|m| m <= 1 || m == k || m + 1 == k)
}

/// Number of tangents to `b` through the essential point `p`.
pub fn tangent_count(plane: &Plane, b: &PointSet, p: PointId) -> Result<usize, SetsError> {
    let bits = point_bits(plane, b);
    if !blocks_all(plane, &bits) {
        return Err(SetsError::NotBlocking);
    }
    if !bits.contains(p.index()) {
        return Err(SetsError::NotEssential(p));
    }
    let mut without = bits.clone();
    without.remove(p.index());
    if blocks_all(plane, &without) {
        return Err(SetsError::NotEssential(p));
    }
    Ok(plane
        .pencil(p)
        .into_iter()
        .filter(|&l| plane.line_row(l).intersection_count(&bits) == 1)
        .count())
}

pub(crate) fn exact_sqrt(q: u32) -> Option<u32> {
    let r = (q as f64).sqrt().round() as u32;
    (r * r == q).then_some(r)
}

/// `q + √q + 1` points meeting every line in `1` or `√q + 1` points.
pub fn is_baer_subplane(plane: &Plane, s: &PointSet) -> bool {
    let q = plane.order();
    let Some(r) = exact_sqrt(q) else { return false };
    if s.len() != (q + r + 1) as usize {
        return false;
    }
    let spec = secant_spectrum(plane, s);
    let sizes: Vec<usize> = spec.support().collect();
    sizes == [1, r as usize + 1]
}

/// The long secants of a Baer subplane: `q + √q + 1` lines with every pencil
/// containing `1` or `√q + 1` of them.
pub fn is_dual_baer_subplane(plane: &Plane, l: &LineSet) -> bool {
    let q = plane.order();
    let Some(r) = exact_sqrt(q) else { return false };
    if l.len() != (q + r + 1) as usize {
        return false;
    }
    let spec = concurrency_spectrum(plane, l);
    let sizes: Vec<usize> = spec.support().collect();
    sizes == [1, r as usize + 1]
}

/// Structural type of a minimal dominating set.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Classification {
    /// `q` points of a line `ℓ` and `q` lines through `P ∈ ℓ`, `P, ℓ ∉ D`.
    CaseI,
    /// A full line and a full pencil whose centre is off the line.
    CaseII,
    /// A full pencil `[P]` and a Baer subplane minus `P`.
    CaseIIIA,
    /// Dual of [`Classification::CaseIIIA`].
    CaseIIIB,
    /// A full pencil and all but possibly one point of a nontrivial minimal
    /// blocking set.
    CaseIVA,
    /// A full pencil plus one line, and all but possibly one point of a
    /// minimal blocking set of the affine plane off that line.
    CaseIVB,
    /// Dual of [`Classification::CaseIVA`] or [`Classification::CaseIVB`].
    CaseIVC,
    /// Primal with at least `3q − 1` elements.
    CaseV,
    /// Not primal: a Baer subplane together with a dual Baer subplane.
    NonprimalVi,
    Unclassified,
}

impl Classification {
    pub fn label(self) -> &'static str {
        match self {
            Classification::CaseI => "case_i",
            Classification::CaseII => "case_ii",
            Classification::CaseIIIA => "case_iii_a",
            Classification::CaseIIIB => "case_iii_b",
            Classification::CaseIVA => "case_iv_a",
            Classification::CaseIVB => "case_iv_b",
            Classification::CaseIVC => "case_iv_c",
            Classification::CaseV => "case_v",
            Classification::NonprimalVi => "nonprimal_vi",
            Classification::Unclassified => "unclassified",
        }
    }
}

/// The point whose full pencil is exactly `lines`, if any.
fn pencil_centre(plane: &Plane, lines: &LineSet) -> Option<PointId> {
    if lines.len() != plane.order() as usize + 1 {
        return None;
    }
    let first = *lines.iter().next()?;
    plane
        .points_on(first)
        .find(|&p| plane.pencil(p).iter().all(|l| lines.contains(l)))
}

/// The line whose point set is exactly `points`, if any.
fn full_line(plane: &Plane, points: &PointSet) -> Option<LineId> {
    let bits = point_bits(plane, points);
    plane.lines().find(|&l| plane.line_row(l) == &bits)
}

fn contains_full_line(plane: &Plane, pts: &BitSet) -> bool {
    plane.lines().any(|l| plane.line_row(l).is_subset(pts))
}

/// `x` has a tangent through it, other than `except`, w.r.t. `pts`.
fn has_tangent(plane: &Plane, pts: &BitSet, x: PointId, except: Option<LineId>) -> bool {
    plane
        .pencil(x)
        .into_iter()
        .filter(|&l| Some(l) != except)
        .any(|l| plane.line_row(l).intersection_count(pts) == 1)
}

fn size_above_baer_pencil(q: u32, size: usize) -> bool {
    // |D| > 2q + √q + 1, compared in integers
    let excess = size as i64 - 2 * q as i64 - 1;
    excess > 0 && excess * excess > q as i64
}

/// The point-side patterns: `L_D` is (almost) a pencil.
fn pencil_side_pattern(plane: &Plane, d: &Candidate) -> Option<Classification> {
    let q = plane.order() as usize;
    let n = plane.size();
    let size = d.size();
    let pts = d.point_bits(n);

    if size == 2 * q && d.lines.len() == q && d.points.len() == q {
        // L_D = [P] \ {ℓ} and P_D = [ℓ] \ {P}
        for p in plane.points() {
            let missing: Vec<LineId> = plane
                .pencil(p)
                .into_iter()
                .filter(|l| !d.lines.contains(l))
                .collect();
            if missing.len() != 1 {
                continue;
            }
            let ell = missing[0];
            let expect: PointSet = plane.points_on(ell).filter(|&x| x != p).collect();
            if expect == d.points {
                return Some(Classification::CaseI);
            }
        }
    }

    if let Some(p) = pencil_centre(plane, &d.lines) {
        if d.points.contains(&p) {
            return None;
        }
        if let Some(ell) = full_line(plane, &d.points) {
            if !plane.incident(p, ell) {
                return Some(Classification::CaseII);
            }
        }
        let mut with_p = d.points.clone();
        with_p.insert(p);
        if is_baer_subplane(plane, &with_p) {
            return Some(Classification::CaseIIIA);
        }
        if size_above_baer_pencil(plane.order(), size) && size + 1 < 3 * q {
            let mut b = pts.clone();
            b.insert(p.index());
            let essential = d.points.iter().all(|&x| has_tangent(plane, &b, x, None));
            if blocks_all(plane, &b) && essential {
                let minimal = if blocks_all(plane, &pts) { &pts } else { &b };
                if !contains_full_line(plane, minimal) {
                    return Some(Classification::CaseIVA);
                }
            }
        }
        return None;
    }

    // L_D = [P] ∪ {ℓ} with P ∉ ℓ
    if d.lines.len() == q + 2 && size_above_baer_pencil(plane.order(), size) && size + 1 < 3 * q
    {
        for &ell in &d.lines {
            let mut rest = d.lines.clone();
            rest.remove(&ell);
            let Some(p) = pencil_centre(plane, &rest) else { continue };
            if plane.incident(p, ell) || d.points.contains(&p) {
                continue;
            }
            if d.points.iter().any(|&x| plane.incident(x, ell)) {
                continue;
            }
            let mut b = pts.clone();
            b.insert(p.index());
            let affine_blocking = plane
                .lines()
                .filter(|&l| l != ell)
                .all(|l| plane.line_row(l).intersects(&b));
            let essential = d
                .points
                .iter()
                .all(|&x| has_tangent(plane, &b, x, Some(ell)));
            if affine_blocking && essential {
                return Some(Classification::CaseIVB);
            }
        }
    }
    None
}

/// Structural classification of a minimal dominating set. Returns
/// [`Classification::Unclassified`] unless a pattern matches exactly.
pub fn classify(plane: &Plane, d: &Candidate) -> Result<Classification, SetsError> {
    if !is_minimal(plane, d)? {
        return Err(SetsError::NotMinimal);
    }
    let q = plane.order() as usize;
    if let Some(c) = pencil_side_pattern(plane, d) {
        return Ok(c);
    }
    let dual = plane.dual();
    match pencil_side_pattern(&dual, &d.swapped()) {
        Some(Classification::CaseIIIA) => return Ok(Classification::CaseIIIB),
        Some(Classification::CaseIVA | Classification::CaseIVB) => {
            return Ok(Classification::CaseIVC)
        }
        Some(c @ (Classification::CaseI | Classification::CaseII)) => return Ok(c),
        _ => {}
    }
    let primal = is_primal(plane, d);
    if primal && d.size() + 1 > 3 * q {
        return Ok(Classification::CaseV);
    }
    if !primal && is_baer_subplane(plane, &d.points) && is_dual_baer_subplane(plane, &d.lines) {
        return Ok(Classification::NonprimalVi);
    }
    Ok(Classification::Unclassified)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct Flags {
    pub dominating: bool,
    /// `P_D` is a blocking set.
    pub blocking: bool,
    /// `L_D` is a covering set.
    pub covering: bool,
    pub minimal: bool,
    pub stable: bool,
    pub primal: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Bounds {
    pub blocked_lines: usize,
    pub blocked_lines_max: u64,
    pub covered_points: usize,
    /// `None` when `L_D` is empty.
    pub covered_points_max: Option<i64>,
    pub size_lower: SizeLowerBound,
    pub weight_lower: i64,
}

/// Everything the library can say about one candidate.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct AnalysisReport {
    pub order: u32,
    pub point_count: usize,
    pub line_count: usize,
    pub size: usize,
    pub flags: Flags,
    pub k: usize,
    pub c: usize,
    pub spectrum: SecantSpectrum,
    pub concurrency: SecantSpectrum,
    /// Weight of `P_D` taken with `k` = its longest secant (at least 1).
    pub weight: i64,
    pub bounds: Bounds,
    pub extremal_secants_only: bool,
    pub classification: Classification,
}

impl AnalysisReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}

pub fn analyze(plane: &Plane, d: &Candidate) -> AnalysisReport {
    let q = plane.order();
    let dominating = is_dominating(plane, d);
    let minimal = dominating && is_minimal(plane, d).unwrap_or(false);
    let stable = minimal && is_stable(plane, d).unwrap_or(false);
    let spectrum = secant_spectrum(plane, &d.points);
    let concurrency = concurrency_spectrum(plane, &d.lines);
    let k = spectrum.k_max;
    let c = concurrency.k_max;
    let flags = Flags {
        dominating,
        blocking: is_blocking(plane, &d.points),
        covering: is_covering(plane, &d.lines),
        minimal,
        stable,
        primal: is_primal(plane, d),
    };
    let bounds = Bounds {
        blocked_lines: blocked_line_count(plane, &d.points),
        blocked_lines_max: if d.points.is_empty() {
            0
        } else {
            bound_blocked_lines(d.points.len() as u64, q as u64)
        },
        covered_points: covered_point_count(plane, &d.lines),
        covered_points_max: (!d.lines.is_empty())
            .then(|| bound_cover(c as u64, d.lines.len() as u64, q as u64)),
        size_lower: size_lower_bound(q, d.points.len(), d.lines.len()),
        weight_lower: weight_lower_bound(d.points.len() as u64, k as u64, d.size() as u64, q as u64),
    };
    let classification = if minimal {
        classify(plane, d).unwrap_or(Classification::Unclassified)
    } else {
        Classification::Unclassified
    };
    AnalysisReport {
        order: q,
        point_count: d.points.len(),
        line_count: d.lines.len(),
        size: d.size(),
        flags,
        k,
        c,
        weight: weight(plane, &d.points, k.max(1)),
        spectrum,
        concurrency,
        bounds,
        extremal_secants_only: secants_in_extremal_sizes(plane, d),
        classification,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gf::FieldSpec;
    use crate::plane::build_pg2q;

    fn pg(q: u64) -> Plane {
        build_pg2q(&FieldSpec::of_order(q).unwrap()).unwrap()
    }

    fn line_points(plane: &Plane, l: LineId) -> PointSet {
        plane.points_on(l).collect()
    }

    /// `[ℓ] \ {P}` together with `[P] \ {ℓ}`.
    fn flag_set(plane: &Plane, l: LineId, p: PointId) -> Candidate {
        Candidate::new(
            plane.points_on(l).filter(|&x| x != p),
            plane.pencil(p).into_iter().filter(|&m| m != l),
        )
    }

    #[test]
    fn lines_block_and_q_points_do_not() {
        let p = pg(5);
        for l in p.lines() {
            assert!(is_blocking(&p, &line_points(&p, l)));
        }
        let mut five: PointSet = line_points(&p, LineId(0));
        let last = *five.iter().next_back().unwrap();
        five.remove(&last);
        assert!(!is_blocking(&p, &five));
        let arbitrary: PointSet = (0..5).map(PointId).collect();
        assert!(!is_blocking(&p, &arbitrary));
    }

    #[test]
    fn flag_set_dominates() {
        let p = pg(5);
        let l = LineId(0);
        let pt = p.points_on(l).next().unwrap();
        let d = flag_set(&p, l, pt);
        assert_eq!(d.size(), 10);
        assert!(is_dominating(&p, &d));
        assert!(is_minimal(&p, &d).unwrap());
        assert!(is_stable(&p, &d).unwrap());
        assert!(is_primal(&p, &d));
        assert_eq!(classify(&p, &d).unwrap(), Classification::CaseI);
    }

    #[test]
    fn empty_candidate_is_not_dominating() {
        let p = pg(2);
        let d = Candidate::default();
        assert!(!is_dominating(&p, &d));
        assert_eq!(is_minimal(&p, &d), Err(SetsError::NotDominating));
        assert_eq!(is_stable(&p, &d), Err(SetsError::NotDominating));
        assert_eq!(classify(&p, &d), Err(SetsError::NotDominating));
    }

    #[test]
    fn superset_is_not_minimal() {
        let p = pg(5);
        let l = LineId(0);
        let pt = p.points_on(l).next().unwrap();
        let mut d = flag_set(&p, l, pt);
        let extra = p.points().find(|x| !p.incident(*x, l)).unwrap();
        d.points.insert(extra);
        assert!(is_dominating(&p, &d));
        assert!(!is_minimal(&p, &d).unwrap());
        assert!(!is_stable(&p, &d).unwrap());
        assert_eq!(classify(&p, &d), Err(SetsError::NotMinimal));
    }

    #[test]
    fn spectra_of_simple_sets() {
        let p = pg(3);
        let s = secant_spectrum(&p, &line_points(&p, LineId(2)));
        assert_eq!(s.histogram, BTreeMap::from([(1, 12), (4, 1)]));
        assert_eq!(s.k_max, 4);
        let e = secant_spectrum(&p, &PointSet::new());
        assert_eq!(e.histogram, BTreeMap::from([(0, 13)]));
        assert_eq!(e.skew_count, 13);
        let pencil: LineSet = p.pencil(PointId(4)).into_iter().collect();
        let c = concurrency_spectrum(&p, &pencil);
        assert_eq!(c.histogram, BTreeMap::from([(1, 12), (4, 1)]));
    }

    #[test]
    fn weights_by_hand() {
        let p = pg(3);
        let single: PointSet = [PointId(7)].into();
        for k in 1..5 {
            assert_eq!(weight(&p, &single, k), 0);
        }
        // two points: one 2-secant contributes (2-1)(2-3) = -1, tangents 0
        let two: PointSet = [PointId(0), PointId(5)].into();
        assert_eq!(weight(&p, &two, 3), -1);
        let lw = line_weights(&p, &two, 3);
        assert_eq!(lw.heavy().len(), 1);
        for l in p.lines() {
            assert!(lw.decomposes_along(l));
        }
    }

    #[test]
    fn line_weight_formula() {
        assert_eq!(line_weight(0, 4), 0);
        assert_eq!(line_weight(1, 4), 0);
        assert_eq!(line_weight(4, 4), 0);
        assert_eq!(line_weight(2, 4), -2);
    }

    #[test]
    fn blocked_lines_bound_equality_iff_collinear() {
        let p = pg(3);
        assert_eq!(bound_blocked_lines(1, 5), 6);
        let line = line_points(&p, LineId(0));
        assert_eq!(blocked_line_count(&p, &line), 13);
        assert_eq!(bound_blocked_lines(4, 3), 13);
        // exhaustive over non-collinear triples
        for a in p.points() {
            for b in p.points().filter(|&b| b > a) {
                let ab = p.line_through(a, b).unwrap();
                for c in p.points().filter(|&c| c > b && !p.incident(c, ab)) {
                    let s: PointSet = [a, b, c].into();
                    assert!(blocked_line_count(&p, &s) <= 9);
                }
            }
        }
    }

    #[test]
    fn cover_bound_formula() {
        // c = nlines: concurrent lines cover 1 + cq points
        for c in 1..=5u64 {
            assert_eq!(bound_cover(c, c, 4), 1 + 4 * c as i64);
        }
        assert_eq!(bound_cover(1, 21, 4), 1 - 22 + 21 * 5 + 1);
    }

    #[test]
    fn size_bound_arithmetic() {
        assert_eq!(size_lower_bound(3, 3, 3).from_points, 6);
        assert_eq!(size_lower_bound(5, 5, 5).best, 10);
        for q in 2..20 {
            assert_eq!(size_lower_bound(q, 0, 0).domination_number, 2 * q as i64);
        }
    }

    #[test]
    fn weight_lower_bound_formula() {
        assert_eq!(weight_lower_bound(0, 4, 24, 9), 4 * (91 - 24));
        assert_eq!(
            weight_lower_bound(12, 4, 24, 9),
            144 - 37 * 12 + 4 * (91 - 24)
        );
    }

    #[test]
    fn extremal_secant_sizes() {
        let p = pg(3);
        let l = p.line_through(PointId(0), PointId(1)).unwrap();
        let c = p.points().find(|&x| !p.incident(x, l)).unwrap();
        let tri = Candidate::new([PointId(0), PointId(1), c], []);
        assert!(secants_in_extremal_sizes(&p, &tri));
    }

    #[test]
    fn tangents_through_points_of_a_line() {
        let p = pg(5);
        let l = LineId(3);
        let b = line_points(&p, l);
        let x = *b.iter().next().unwrap();
        assert_eq!(tangent_count(&p, &b, x).unwrap(), 5);
        let off = p.points().find(|y| !b.contains(y)).unwrap();
        assert_eq!(tangent_count(&p, &b, off), Err(SetsError::NotEssential(off)));
        let mut fat = b.clone();
        fat.insert(off);
        assert_eq!(tangent_count(&p, &fat, off), Err(SetsError::NotEssential(off)));
        assert_eq!(
            tangent_count(&p, &PointSet::new(), x),
            Err(SetsError::NotBlocking)
        );
    }

    #[test]
    fn candidate_json_rejects_duplicates() {
        let ok = Candidate::from_json(br#"{"points":[3,1],"lines":[2]}"#).unwrap();
        assert_eq!(ok.to_json(), r#"{"points":[1,3],"lines":[2]}"#);
        assert_eq!(
            Candidate::from_json(br#"{"points":[1,1],"lines":[]}"#),
            Err(SetsError::Duplicate { kind: "point", id: 1 })
        );
        assert!(matches!(
            Candidate::from_json(b"[1,2]"),
            Err(SetsError::Parse(_))
        ));
        let p = pg(2);
        assert!(Candidate::new([PointId(7)], []).check(&p).is_err());
    }

    #[test]
    fn full_line_and_pencil_off_it() {
        let p = pg(4);
        let l = LineId(0);
        let c = p.points().find(|&x| !p.incident(x, l)).unwrap();
        let d = Candidate::new(p.points_on(l), p.pencil(c));
        assert_eq!(d.size(), 10);
        assert!(is_minimal(&p, &d).unwrap());
        assert!(is_primal(&p, &d));
        assert_eq!(classify(&p, &d).unwrap(), Classification::CaseII);
    }

    #[test]
    fn short_secant_report_on_flag_set_is_vacuous_for_primal() {
        let p = pg(5);
        let l = LineId(0);
        let pt = p.points_on(l).next().unwrap();
        let r = check_short_secants(&p, &flag_set(&p, l, pt)).unwrap();
        assert!(!r.any_violated());
        assert_eq!(
            r.get("point_secants_short").unwrap().status,
            ImplicationStatus::Vacuous
        );
        assert_eq!(
            r.get("both_sides_large").unwrap().status,
            ImplicationStatus::Satisfied
        );
    }
}
