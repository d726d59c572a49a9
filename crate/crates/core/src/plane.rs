//! Projective planes as incidence structures.
//!
//! A [`Plane`] stores incidence twice, once per line (which points it holds)
//! and once per point (which lines pass through it), so both directions of a
//! domination check are a row scan.

use crate::bits::BitSet;
use crate::gf::{FieldElement, FieldError, FieldSpec};
use serde::{Deserialize, Serialize};
use std::collections::BTreeSet;
use std::fmt;
use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct PointId(pub u32);

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct LineId(pub u32);

impl PointId {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

impl LineId {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

impl fmt::Display for PointId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "P{}", self.0)
    }
}

impl fmt::Display for LineId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "L{}", self.0)
    }
}

#[derive(Debug, Error)]
pub enum PlaneError {
    #[error(transparent)]
    Field(#[from] FieldError),
    #[error("parse error: {0}")]
    Parse(String),
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("the two points are equal")]
    SamePoint,
    #[error("the two lines are equal")]
    SameLine,
    #[error("no common element (incidence structure is not a projective plane)")]
    NoIntersection,
    #[error("order {0} is too large to build")]
    TooLarge(u32),
}

/// Where a plane came from.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum PlaneTag {
    /// PG(2,q) over the given field; ids follow normalized coordinates.
    Desarguesian(FieldSpec),
    /// Read from a file or built from raw incidence data.
    Loaded(String),
}

#[derive(Clone)]
pub struct Plane {
    order: u32,
    n: usize,
    line_points: Vec<BitSet>,
    point_lines: Vec<BitSet>,
    tag: PlaneTag,
}

impl fmt::Debug for Plane {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Plane")
            .field("order", &self.order)
            .field("n", &self.n)
            .field("tag", &self.tag)
            .finish()
    }
}

/// `q^2 + q + 1`.
pub fn plane_size(q: u32) -> usize {
    let q = q as usize;
    q * q + q + 1
}

/// Largest order [`build_pg2q`] accepts.
pub const MAX_BUILD_ORDER: u32 = 169;

/// Id of a normalized homogeneous triple in lexicographic order of encodings.
fn triple_id(q: u32, t: [FieldElement; 3]) -> u32 {
    let [a, b, c] = t.map(FieldElement::rep);
    if a == 1 {
        1 + q + b * q + c
    } else if b == 1 {
        debug_assert_eq!(a, 0);
        1 + c
    } else {
        debug_assert!(a == 0 && b == 0 && c == 1);
        0
    }
}

/// Normalized coordinates (leftmost nonzero entry 1) of point or line `id`
/// of PG(2,q).
pub fn pg_coordinates(f: &FieldSpec, id: u32) -> [FieldElement; 3] {
    let q = f.order();
    let e = |r: u32| f.element(r).expect("coordinate in range");
    if id == 0 {
        [e(0), e(0), e(1)]
    } else if id <= q {
        [e(0), e(1), e(id - 1)]
    } else {
        let r = id - 1 - q;
        [e(1), e(r / q), e(r % q)]
    }
}

fn normalize(f: &FieldSpec, t: [FieldElement; 3]) -> [FieldElement; 3] {
    let lead = *t.iter().find(|x| !x.is_zero()).expect("nonzero triple");
    let inv = f.inv(lead).expect("nonzero lead");
    t.map(|x| f.mul(x, inv))
}

/// Id of the normalized form of a nonzero triple.
pub fn pg_id(f: &FieldSpec, t: [FieldElement; 3]) -> u32 {
    triple_id(f.order(), normalize(f, t))
}

/// PG(2,q) over `spec`. Points and lines are both normalized triples with the
/// same id scheme and incidence is a zero dot product, so the incidence
/// matrix is symmetric.
pub fn build_pg2q(spec: &FieldSpec) -> Result<Plane, PlaneError> {
    let q = spec.order();
    if q > MAX_BUILD_ORDER {
        return Err(PlaneError::TooLarge(q));
    }
    let n = plane_size(q);
    let elems = spec.elements();
    let mut lines = Vec::with_capacity(n);
    for lid in 0..n as u32 {
        let u = pg_coordinates(spec, lid);
        // u is normalized, so its leading nonzero coordinate is 1.
        let j = u.iter().position(|x| !x.is_zero()).unwrap();
        let others: Vec<usize> = (0..3).filter(|&i| i != j).collect();
        let (i1, i2) = (others[0], others[1]);
        let pairs = elems
            .iter()
            .map(|&t| (FieldElement::ONE, t))
            .chain(std::iter::once((FieldElement::ZERO, FieldElement::ONE)));
        let mut pts = Vec::with_capacity(q as usize + 1);
        for (x1, x2) in pairs {
            let s = spec.add(spec.mul(u[i1], x1), spec.mul(u[i2], x2));
            let mut x = [FieldElement::ZERO; 3];
            x[i1] = x1;
            x[i2] = x2;
            x[j] = spec.neg(s);
            pts.push(pg_id(spec, x));
        }
        pts.sort_unstable();
        lines.push(pts);
    }
    Plane::from_line_lists(q, &lines, PlaneTag::Desarguesian(spec.clone()))
}

/// Violated plane axiom, with a witness.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Violation {
    LineSize { line: LineId, size: usize },
    PointDegree { point: PointId, degree: usize },
    PointPair { points: [PointId; 2], common_lines: usize },
    LinePair { lines: [LineId; 2], common_points: usize },
    NotTranspose { point: PointId, line: LineId },
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.violations.is_empty()
    }
}

/// JSON plane document: `{"order": q, "points": n, "lines": [[...], ...]}`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PlaneDocument {
    pub order: u32,
    pub points: usize,
    pub lines: Vec<Vec<u32>>,
}

impl Plane {
    /// Builds a plane from per-line point lists. Each line must have exactly
    /// `order + 1` distinct points in range and there must be `n` lines.
    pub fn from_line_lists(
        order: u32,
        lines: &[Vec<u32>],
        tag: PlaneTag,
    ) -> Result<Plane, PlaneError> {
        if order < 2 {
            return Err(PlaneError::DimensionMismatch(format!(
                "order must be at least 2, got {order}"
            )));
        }
        let n = plane_size(order);
        if lines.len() != n {
            return Err(PlaneError::DimensionMismatch(format!(
                "expected {n} lines for order {order}, found {}",
                lines.len()
            )));
        }
        let mut rows = Vec::with_capacity(n);
        for (i, pts) in lines.iter().enumerate() {
            if pts.len() != order as usize + 1 {
                return Err(PlaneError::DimensionMismatch(format!(
                    "line {i} has {} points, expected {}",
                    pts.len(),
                    order + 1
                )));
            }
            let mut row = BitSet::new(n);
            for &p in pts {
                if p as usize >= n {
                    return Err(PlaneError::Parse(format!(
                        "line {i} references point {p}, but there are only {n} points"
                    )));
                }
                if row.contains(p as usize) {
                    return Err(PlaneError::Parse(format!(
                        "line {i} lists point {p} twice"
                    )));
                }
                row.insert(p as usize);
            }
            rows.push(row);
        }
        Ok(Plane::from_incidence(order, rows, tag))
    }

    /// Builds a plane from raw line rows without checking line sizes. Use
    /// [`Plane::validate_axioms`] before trusting the result.
    ///
    /// Panics if there are not `q^2+q+1` rows of that width.
    pub fn from_incidence(order: u32, line_points: Vec<BitSet>, tag: PlaneTag) -> Plane {
        let n = plane_size(order);
        assert_eq!(line_points.len(), n);
        assert!(line_points.iter().all(|r| r.capacity() == n));
        let mut point_lines = vec![BitSet::new(n); n];
        for (l, row) in line_points.iter().enumerate() {
            for p in row.iter() {
                point_lines[p].insert(l);
            }
        }
        Plane {
            order,
            n,
            line_points,
            point_lines,
            tag,
        }
    }

    pub fn order(&self) -> u32 {
        self.order
    }

    /// Number of points, which is also the number of lines.
    pub fn size(&self) -> usize {
        self.n
    }

    pub fn tag(&self) -> &PlaneTag {
        &self.tag
    }

    pub fn field(&self) -> Option<&FieldSpec> {
        match &self.tag {
            PlaneTag::Desarguesian(f) => Some(f),
            PlaneTag::Loaded(_) => None,
        }
    }

    pub fn points(&self) -> impl Iterator<Item = PointId> {
        (0..self.n as u32).map(PointId)
    }

    pub fn lines(&self) -> impl Iterator<Item = LineId> {
        (0..self.n as u32).map(LineId)
    }

    /// Point row of a line, `[l]`.
    pub fn line_row(&self, l: LineId) -> &BitSet {
        &self.line_points[l.index()]
    }

    /// Line row of a point, `[P]`.
    pub fn point_row(&self, p: PointId) -> &BitSet {
        &self.point_lines[p.index()]
    }

    pub fn points_on(&self, l: LineId) -> impl Iterator<Item = PointId> + '_ {
        self.line_points[l.index()].iter().map(|i| PointId(i as u32))
    }

    pub fn incident(&self, p: PointId, l: LineId) -> bool {
        self.line_points[l.index()].contains(p.index())
    }

    /// The full pencil `[P]`.
    pub fn pencil(&self, p: PointId) -> Vec<LineId> {
        self.point_lines[p.index()]
            .iter()
            .map(|i| LineId(i as u32))
            .collect()
    }

    pub fn line_through(&self, p: PointId, r: PointId) -> Result<LineId, PlaneError> {
        if p == r {
            return Err(PlaneError::SamePoint);
        }
        let mut common = self.point_lines[p.index()].clone();
        common.intersect_with(&self.point_lines[r.index()]);
        common
            .first()
            .map(|i| LineId(i as u32))
            .ok_or(PlaneError::NoIntersection)
    }

    pub fn meet(&self, l: LineId, m: LineId) -> Result<PointId, PlaneError> {
        if l == m {
            return Err(PlaneError::SameLine);
        }
        let mut common = self.line_points[l.index()].clone();
        common.intersect_with(&self.line_points[m.index()]);
        common
            .first()
            .map(|i| PointId(i as u32))
            .ok_or(PlaneError::NoIntersection)
    }

    /// The dual plane: lines become points and points become lines.
    pub fn dual(&self) -> Plane {
        let tag = match &self.tag {
            // PG(2,q) is self-dual with identical ids (symmetric incidence).
            PlaneTag::Desarguesian(f) => PlaneTag::Desarguesian(f.clone()),
            PlaneTag::Loaded(name) => PlaneTag::Loaded(format!("dual of {name}")),
        };
        Plane {
            order: self.order,
            n: self.n,
            line_points: self.point_lines.clone(),
            point_lines: self.line_points.clone(),
            tag,
        }
    }

    /// Same incidence bits (tags are ignored).
    pub fn same_incidence(&self, other: &Plane) -> bool {
        self.order == other.order
            && self.line_points == other.line_points
            && self.point_lines == other.point_lines
    }

    /// Checks every projective-plane axiom exhaustively and lists violations.
    pub fn validate_axioms(&self) -> ValidationReport {
        let q1 = self.order as usize + 1;
        let mut violations = Vec::new();
        for (l, row) in self.line_points.iter().enumerate() {
            if row.count() != q1 {
                violations.push(Violation::LineSize {
                    line: LineId(l as u32),
                    size: row.count(),
                });
            }
            for p in row.iter() {
                if !self.point_lines[p].contains(l) {
                    violations.push(Violation::NotTranspose {
                        point: PointId(p as u32),
                        line: LineId(l as u32),
                    });
                }
            }
        }
        for (p, row) in self.point_lines.iter().enumerate() {
            if row.count() != q1 {
                violations.push(Violation::PointDegree {
                    point: PointId(p as u32),
                    degree: row.count(),
                });
            }
            for l in row.iter() {
                if !self.line_points[l].contains(p) {
                    violations.push(Violation::NotTranspose {
                        point: PointId(p as u32),
                        line: LineId(l as u32),
                    });
                }
            }
        }
        for a in 0..self.n {
            for b in a + 1..self.n {
                let common = self.point_lines[a].intersection_count(&self.point_lines[b]);
                if common != 1 {
                    violations.push(Violation::PointPair {
                        points: [PointId(a as u32), PointId(b as u32)],
                        common_lines: common,
                    });
                }
                let common = self.line_points[a].intersection_count(&self.line_points[b]);
                if common != 1 {
                    violations.push(Violation::LinePair {
                        lines: [LineId(a as u32), LineId(b as u32)],
                        common_points: common,
                    });
                }
            }
        }
        ValidationReport { violations }
    }

    pub fn to_document(&self) -> PlaneDocument {
        PlaneDocument {
            order: self.order,
            points: self.n,
            lines: self
                .line_points
                .iter()
                .map(|r| r.iter().map(|i| i as u32).collect())
                .collect(),
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(&self.to_document()).expect("plane serializes")
    }

    pub fn from_document(doc: &PlaneDocument, source: &str) -> Result<Plane, PlaneError> {
        let n = plane_size(doc.order);
        if doc.points != n {
            return Err(PlaneError::DimensionMismatch(format!(
                "order {} needs {n} points, document declares {}",
                doc.order, doc.points
            )));
        }
        Plane::from_line_lists(doc.order, &doc.lines, PlaneTag::Loaded(source.to_string()))
    }
}

/// Parses a JSON plane document. The result is tagged as loaded and has not
/// been checked against the plane axioms.
pub fn load_plane(bytes: &[u8], source: &str) -> Result<Plane, PlaneError> {
    let doc: PlaneDocument =
        serde_json::from_slice(bytes).map_err(|e| PlaneError::Parse(e.to_string()))?;
    Plane::from_document(&doc, source)
}

/// Incidence rows of a plane as sorted id sets; handy for comparisons.
pub fn line_sets(plane: &Plane) -> Vec<BTreeSet<u32>> {
    plane
        .lines()
        .map(|l| plane.points_on(l).map(|p| p.0).collect())
        .collect()
}
