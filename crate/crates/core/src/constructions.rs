//! Deterministic builders for the standard dominating-set families.

use crate::gf::FieldElement;
use crate::plane::{pg_coordinates, pg_id, LineId, Plane, PointId};
use crate::sets::{exact_sqrt, is_blocking, secant_spectrum, Candidate, LineSet, PointSet};
use serde::Serialize;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ConstructionError {
    #[error("point {0} is not on line {1}")]
    NotIncident(PointId, LineId),
    #[error("point {0} lies on line {1}")]
    Incident(PointId, LineId),
    #[error("order {0} is not a square")]
    NotSquareOrder(u32),
    #[error("point set is not a Baer subplane")]
    NotBaer,
    #[error("point set is not blocking")]
    NotBlocking,
    #[error("construction needs a coordinatized plane")]
    NotDesarguesian,
    #[error("points must be distinct")]
    SamePoint,
    #[error("id {0} out of range")]
    OutOfRange(u32),
    #[error("bad parameter: {0}")]
    BadParameter(String),
}

type Result<T> = std::result::Result<T, ConstructionError>;

/// Flags a builder promises. `None` means the builder makes no claim.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub struct ExpectedFlags {
    pub dominating: Option<bool>,
    pub minimal: Option<bool>,
    pub stable: Option<bool>,
    pub primal: Option<bool>,
    pub blocking: Option<bool>,
    pub covering: Option<bool>,
}

impl ExpectedFlags {
    /// Pairs of (flag name, expected, actual) that disagree.
    pub fn mismatches(&self, actual: &crate::sets::Flags) -> Vec<(&'static str, bool, bool)> {
        [
            ("dominating", self.dominating, actual.dominating),
            ("minimal", self.minimal, actual.minimal),
            ("stable", self.stable, actual.stable),
            ("primal", self.primal, actual.primal),
            ("blocking", self.blocking, actual.blocking),
            ("covering", self.covering, actual.covering),
        ]
        .into_iter()
        .filter_map(|(name, want, got)| match want {
            Some(w) if w != got => Some((name, w, got)),
            _ => None,
        })
        .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Construction {
    pub name: &'static str,
    pub candidate: Candidate,
    pub expected_size: usize,
    pub expected: ExpectedFlags,
}

fn check_point(plane: &Plane, p: PointId) -> Result<()> {
    if p.index() < plane.size() {
        Ok(())
    } else {
        Err(ConstructionError::OutOfRange(p.0))
    }
}

fn check_line(plane: &Plane, l: LineId) -> Result<()> {
    if l.index() < plane.size() {
        Ok(())
    } else {
        Err(ConstructionError::OutOfRange(l.0))
    }
}

fn on(plane: &Plane, p: PointId, l: LineId) -> Result<()> {
    check_point(plane, p)?;
    check_line(plane, l)?;
    if plane.incident(p, l) {
        Ok(())
    } else {
        Err(ConstructionError::NotIncident(p, l))
    }
}

fn square_root(plane: &Plane) -> Result<u32> {
    exact_sqrt(plane.order()).ok_or(ConstructionError::NotSquareOrder(plane.order()))
}

/// `q` points of `ℓ` and `q` lines through `P`, leaving out `P` and `ℓ`.
pub fn family_i(plane: &Plane, l: LineId, p: PointId) -> Result<Construction> {
    on(plane, p, l)?;
    let q = plane.order() as usize;
    let candidate = Candidate::new(
        plane.points_on(l).filter(|&x| x != p),
        plane.pencil(p).into_iter().filter(|&m| m != l),
    );
    Ok(Construction {
        name: "i",
        candidate,
        expected_size: 2 * q,
        expected: ExpectedFlags {
            dominating: Some(true),
            minimal: Some(true),
            stable: Some(true),
            primal: Some(true),
            blocking: Some(false),
            covering: Some(false),
        },
    })
}

/// A full line and the full pencil of a point off it.
pub fn family_ii(plane: &Plane, l: LineId, p: PointId) -> Result<Construction> {
    check_point(plane, p)?;
    check_line(plane, l)?;
    if plane.incident(p, l) {
        return Err(ConstructionError::Incident(p, l));
    }
    let q = plane.order() as usize;
    Ok(Construction {
        name: "ii",
        candidate: Candidate::new(plane.points_on(l), plane.pencil(p)),
        expected_size: 2 * q + 2,
        expected: ExpectedFlags {
            dominating: Some(true),
            minimal: Some(true),
            primal: Some(true),
            blocking: Some(true),
            covering: Some(true),
            ..Default::default()
        },
    })
}

/// A Baer subplane without one of its points, plus the full pencil of that
/// point.
pub fn family_iii(plane: &Plane, baer: &PointSet, p: PointId) -> Result<Construction> {
    let r = square_root(plane)? as usize;
    if !crate::sets::is_baer_subplane(plane, baer) {
        return Err(ConstructionError::NotBaer);
    }
    if !baer.contains(&p) {
        return Err(ConstructionError::BadParameter(format!(
            "point {p} is not in the subplane"
        )));
    }
    let q = plane.order() as usize;
    Ok(Construction {
        name: "iii",
        candidate: Candidate::new(baer.iter().copied().filter(|&x| x != p), plane.pencil(p)),
        expected_size: 2 * q + r + 1,
        expected: ExpectedFlags {
            dominating: Some(true),
            minimal: Some(true),
            stable: Some(true),
            primal: Some(true),
            blocking: Some(false),
            covering: Some(true),
        },
    })
}

/// `(B ∖ {P}) ∪ [P]` for a blocking set `B`.
pub fn blocking_plus_pencil(plane: &Plane, b: &PointSet, p: PointId) -> Result<Construction> {
    check_point(plane, p)?;
    if !is_blocking(plane, b) {
        return Err(ConstructionError::NotBlocking);
    }
    let q = plane.order() as usize;
    let inside = b.contains(&p);
    Ok(Construction {
        name: "blocking-pencil",
        candidate: Candidate::new(b.iter().copied().filter(|&x| x != p), plane.pencil(p)),
        expected_size: b.len() + q + usize::from(!inside),
        expected: ExpectedFlags {
            dominating: Some(true),
            primal: Some(true),
            covering: Some(true),
            ..Default::default()
        },
    })
}

/// Points whose normalized coordinates all lie in the subfield of order √q.
pub fn baer_subplane(plane: &Plane) -> Result<PointSet> {
    let r = square_root(plane)?;
    let f = plane.field().ok_or(ConstructionError::NotDesarguesian)?;
    let sub = f
        .subfield(r)
        .ok_or(ConstructionError::NotSquareOrder(plane.order()))?;
    let in_sub = |x: FieldElement| sub.contains(&x);
    Ok(plane
        .points()
        .filter(|p| pg_coordinates(f, p.0).into_iter().all(in_sub))
        .collect())
}

/// The `(√q + 1)`-secants of a Baer subplane.
pub fn dual_baer(plane: &Plane, baer: &PointSet) -> Result<LineSet> {
    let r = square_root(plane)? as usize;
    if !crate::sets::is_baer_subplane(plane, baer) {
        return Err(ConstructionError::NotBaer);
    }
    let bits = crate::sets::point_bits(plane, baer);
    Ok(plane
        .lines()
        .filter(|&l| plane.line_row(l).intersection_count(&bits) == r + 1)
        .collect())
}

/// The subfield subplane as a point-only candidate.
pub fn baer(plane: &Plane) -> Result<Construction> {
    let r = square_root(plane)? as usize;
    let q = plane.order() as usize;
    Ok(Construction {
        name: "baer",
        candidate: Candidate::new(baer_subplane(plane)?, []),
        expected_size: q + r + 1,
        expected: ExpectedFlags {
            dominating: Some(false),
            blocking: Some(true),
            covering: Some(false),
            ..Default::default()
        },
    })
}

/// A Baer subplane together with its own long secants.
pub fn baer_union(plane: &Plane) -> Result<Construction> {
    let r = square_root(plane)? as usize;
    let q = plane.order() as usize;
    let pts = baer_subplane(plane)?;
    let lines = dual_baer(plane, &pts)?;
    Ok(Construction {
        name: "baer-union",
        candidate: Candidate::new(pts, lines),
        expected_size: 2 * q + 2 * r + 2,
        expected: ExpectedFlags {
            dominating: Some(true),
            primal: Some(false),
            blocking: Some(true),
            covering: Some(true),
            ..Default::default()
        },
    })
}

/// Points of `y² = xz`.
pub fn conic(plane: &Plane) -> Result<PointSet> {
    let f = plane.field().ok_or(ConstructionError::NotDesarguesian)?;
    Ok(plane
        .points()
        .filter(|p| {
            let [x, y, z] = pg_coordinates(f, p.0);
            f.mul(y, y) == f.mul(x, z)
        })
        .collect())
}

/// The point on every tangent of the conic; exists only in even order.
pub fn nucleus(plane: &Plane, oval: &PointSet) -> Option<PointId> {
    let bits = crate::sets::point_bits(plane, oval);
    let tangents: Vec<LineId> = plane
        .lines()
        .filter(|&l| plane.line_row(l).intersection_count(&bits) == 1)
        .collect();
    let mut common = plane.line_row(*tangents.first()?).clone();
    for &t in &tangents[1..] {
        common.intersect_with(plane.line_row(t));
    }
    common.first().map(|i| PointId(i as u32))
}

/// A conic (odd order) or a conic plus its nucleus (even order), and every
/// line skew to it.
pub fn oval_plus_skew(plane: &Plane) -> Result<Construction> {
    let q = plane.order() as usize;
    let mut arc = conic(plane)?;
    if q.is_multiple_of(2) {
        let n = nucleus(plane, &arc).ok_or(ConstructionError::NotDesarguesian)?;
        arc.insert(n);
    }
    let bits = crate::sets::point_bits(plane, &arc);
    let skew: LineSet = plane
        .lines()
        .filter(|&l| !plane.line_row(l).intersects(&bits))
        .collect();
    let arc_size = if q.is_multiple_of(2) { q + 2 } else { q + 1 };
    Ok(Construction {
        name: "oval-skew",
        candidate: Candidate::new(arc, skew),
        expected_size: arc_size + q * (q - 1) / 2,
        expected: ExpectedFlags {
            dominating: Some(true),
            primal: Some(q == 2),
            blocking: Some(false),
            ..Default::default()
        },
    })
}

/// `([ℓ] ∖ {P, Q}) ∪ (([P] ∪ [Q]) ∖ {ℓ})`.
pub fn nonstable_3q_minus_1(plane: &Plane, l: LineId, p: PointId, r: PointId) -> Result<Construction> {
    on(plane, p, l)?;
    on(plane, r, l)?;
    if p == r {
        return Err(ConstructionError::SamePoint);
    }
    let q = plane.order() as usize;
    let lines = plane
        .pencil(p)
        .into_iter()
        .chain(plane.pencil(r))
        .filter(|&m| m != l);
    Ok(Construction {
        name: "nonstable",
        candidate: Candidate::new(plane.points_on(l).filter(|&x| x != p && x != r), lines),
        expected_size: 3 * q - 1,
        expected: ExpectedFlags {
            dominating: Some(true),
            stable: Some(false),
            primal: Some(true),
            blocking: Some(false),
            covering: Some(false),
            ..Default::default()
        },
    })
}

/// A dominating set of size `3q − 2` whose points do not block and whose
/// lines do not cover.
///
/// With `ℓ₀ = {P₀, P₁, …, P_q}` the lowest line through point 0,
/// `[P₀] = {ℓ₀, ℓ₁, …, ℓ_q}` and `ℓ₁ = {P₀, Q₁, …, Q_q}`, all in ascending id
/// order: points `P₂, …, P_q, Q₁, …, Q_t` and lines `ℓ₂, …, ℓ_q` plus
/// `P₁Q_{t+1}, …, P₁Q_q`.
pub fn pg_3q_minus_2(plane: &Plane, t: u32) -> Result<Construction> {
    let q = plane.order();
    if plane.field().is_none() {
        return Err(ConstructionError::NotDesarguesian);
    }
    if t < 1 || t >= q {
        return Err(ConstructionError::BadParameter(format!(
            "t must satisfy 1 <= t <= {}, got {t}",
            q - 1
        )));
    }
    let t = t as usize;
    let p0 = PointId(0);
    let pencil = plane.pencil(p0);
    let (l0, l1) = (pencil[0], pencil[1]);
    let ps: Vec<PointId> = plane.points_on(l0).filter(|&x| x != p0).collect();
    let qs: Vec<PointId> = plane.points_on(l1).filter(|&x| x != p0).collect();
    let p1 = ps[0];
    let points = ps[1..].iter().chain(&qs[..t]).copied();
    let joins: Vec<LineId> = qs[t..]
        .iter()
        .map(|&x| plane.line_through(p1, x).expect("distinct points"))
        .collect();
    let lines = pencil[2..].iter().copied().chain(joins);
    let q = q as usize;
    Ok(Construction {
        name: "pg3qm2",
        candidate: Candidate::new(points, lines),
        expected_size: 3 * q - 2,
        expected: ExpectedFlags {
            dominating: Some(true),
            primal: Some(q == 2),
            blocking: Some(false),
            covering: Some(false),
            ..Default::default()
        },
    })
}

/// Family names accepted by [`build_family`].
pub const FAMILIES: [&str; 9] = [
    "i",
    "ii",
    "iii",
    "blocking-pencil",
    "baer",
    "baer-union",
    "oval-skew",
    "nonstable",
    "pg3qm2",
];

/// Builds a family with default parameters: `ℓ` is line 0, `P` its first
/// point, and the pencil of `blocking-pencil` is centred off the subplane.
pub fn build_family(plane: &Plane, name: &str, t: Option<u32>) -> Result<Construction> {
    let l0 = LineId(0);
    let first_on = |l: LineId| plane.points_on(l).next().expect("lines are nonempty");
    match name {
        "i" => family_i(plane, l0, first_on(l0)),
        "ii" => {
            let p = plane
                .points()
                .find(|&p| !plane.incident(p, l0))
                .expect("some point is off a line");
            family_ii(plane, l0, p)
        }
        "iii" => {
            let b = baer_subplane(plane)?;
            let p = *b.iter().next().ok_or(ConstructionError::NotBaer)?;
            family_iii(plane, &b, p)
        }
        "blocking-pencil" => {
            let b = baer_subplane(plane)?;
            let p = plane
                .points()
                .find(|p| !b.contains(p))
                .ok_or(ConstructionError::NotBaer)?;
            blocking_plus_pencil(plane, &b, p)
        }
        "baer" => baer(plane),
        "baer-union" => baer_union(plane),
        "oval-skew" => oval_plus_skew(plane),
        "nonstable" => {
            let mut on_l0 = plane.points_on(l0);
            let p = on_l0.next().expect("line has q+1 points");
            let r = on_l0.next().expect("line has q+1 points");
            nonstable_3q_minus_1(plane, l0, p, r)
        }
        "pg3qm2" => {
            let t = t.ok_or_else(|| ConstructionError::BadParameter("pg3qm2 needs t".into()))?;
            pg_3q_minus_2(plane, t)
        }
        other => Err(ConstructionError::BadParameter(format!(
            "unknown family {other:?}"
        ))),
    }
}

/// Coordinates of the conic point with parameter `s`, `(1, s, s²)`.
pub fn conic_point(plane: &Plane, s: FieldElement) -> Option<PointId> {
    let f = plane.field()?;
    Some(PointId(pg_id(f, [FieldElement::ONE, s, f.mul(s, s)])))
}

/// True iff no three points of `s` are collinear.
pub fn is_arc(plane: &Plane, s: &PointSet) -> bool {
    secant_spectrum(plane, s).k_max <= 2
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gf::FieldSpec;
    use crate::plane::build_pg2q;
    use crate::sets::{analyze, is_covering, is_dominating, is_stable, Classification};

    fn pg(q: u64) -> Plane {
        build_pg2q(&FieldSpec::of_order(q).unwrap()).unwrap()
    }

    fn assert_contract(plane: &Plane, c: &Construction) {
        assert_eq!(c.candidate.size(), c.expected_size, "{} size", c.name);
        let report = analyze(plane, &c.candidate);
        assert!(
            c.expected.mismatches(&report.flags).is_empty(),
            "{} at q={}: {:?}",
            c.name,
            plane.order(),
            c.expected.mismatches(&report.flags)
        );
    }

    #[test]
    fn every_family_meets_its_contract() {
        for q in [2, 3, 4, 5, 7, 8, 9] {
            let p = pg(q);
            for name in FAMILIES {
                let square = exact_sqrt(q as u32).is_some();
                let needs_square = matches!(name, "iii" | "blocking-pencil" | "baer" | "baer-union");
                if needs_square && !square {
                    assert_eq!(
                        build_family(&p, name, None).unwrap_err(),
                        ConstructionError::NotSquareOrder(q as u32)
                    );
                    continue;
                }
                if name == "pg3qm2" {
                    for t in 1..q as u32 {
                        assert_contract(&p, &build_family(&p, name, Some(t)).unwrap());
                    }
                    continue;
                }
                assert_contract(&p, &build_family(&p, name, None).unwrap());
            }
        }
    }

    #[test]
    fn family_sizes_by_hand() {
        let p4 = pg(4);
        assert_eq!(build_family(&p4, "iii", None).unwrap().candidate.size(), 11);
        assert_eq!(build_family(&p4, "baer-union", None).unwrap().candidate.size(), 14);
        assert_eq!(build_family(&p4, "oval-skew", None).unwrap().candidate.size(), 12);
        assert_eq!(build_family(&p4, "nonstable", None).unwrap().candidate.size(), 11);
        let p3 = pg(3);
        assert_eq!(build_family(&p3, "oval-skew", None).unwrap().candidate.size(), 7);
        assert_eq!(build_family(&p3, "ii", None).unwrap().candidate.size(), 8);
        let p5 = pg(5);
        assert_eq!(build_family(&p5, "oval-skew", None).unwrap().candidate.size(), 16);
        assert_eq!(build_family(&p5, "pg3qm2", Some(2)).unwrap().candidate.size(), 13);
        let p9 = pg(9);
        assert_eq!(build_family(&p9, "i", None).unwrap().candidate.size(), 18);
        assert_eq!(build_family(&p9, "iii", None).unwrap().candidate.size(), 22);
        assert_eq!(build_family(&p9, "blocking-pencil", None).unwrap().candidate.size(), 23);
        assert_eq!(build_family(&p9, "baer-union", None).unwrap().candidate.size(), 26);
    }

    #[test]
    fn baer_subplanes() {
        let p4 = pg(4);
        let b4 = baer_subplane(&p4).unwrap();
        assert_eq!(b4.len(), 7);
        let p9 = pg(9);
        let b9 = baer_subplane(&p9).unwrap();
        assert_eq!(b9.len(), 13);
        let d9 = dual_baer(&p9, &b9).unwrap();
        assert_eq!(d9.len(), 13);
        assert!(is_covering(&p9, &d9));
        assert_eq!(
            baer_subplane(&pg(5)),
            Err(ConstructionError::NotSquareOrder(5))
        );
    }

    #[test]
    fn conic_is_an_oval() {
        for q in [3, 4, 5, 7, 8, 9] {
            let p = pg(q);
            let c = conic(&p).unwrap();
            assert_eq!(c.len(), q as usize + 1);
            assert!(is_arc(&p, &c));
            let f = p.field().unwrap();
            for s in f.elements() {
                assert!(c.contains(&conic_point(&p, s).unwrap()));
            }
            let n = nucleus(&p, &c);
            if q % 2 == 0 {
                let mut h = c.clone();
                h.insert(n.unwrap());
                assert!(is_arc(&p, &h));
            } else {
                assert_eq!(n, None);
            }
        }
    }

    #[test]
    fn classifications_of_families() {
        let p5 = pg(5);
        let i5 = build_family(&p5, "i", None).unwrap();
        assert!(is_stable(&p5, &i5.candidate).unwrap());
        let p9 = pg(9);
        let i9 = build_family(&p9, "i", None).unwrap();
        assert_eq!(
            crate::sets::classify(&p9, &i9.candidate).unwrap(),
            Classification::CaseI
        );
        let iii = build_family(&p9, "iii", None).unwrap();
        assert_eq!(
            crate::sets::classify(&p9, &iii.candidate).unwrap(),
            Classification::CaseIIIA
        );
        let bu = build_family(&p9, "baer-union", None).unwrap();
        let r = analyze(&p9, &bu.candidate);
        if r.flags.minimal {
            assert_eq!(r.classification, Classification::NonprimalVi);
        }
    }

    #[test]
    fn plus_one_vertex_is_not_minimal() {
        let p = pg(4);
        let mut c = build_family(&p, "ii", None).unwrap().candidate;
        let extra = p.points().find(|x| !c.points.contains(x)).unwrap();
        c.points.insert(extra);
        assert!(!crate::sets::is_minimal(&p, &c).unwrap());
    }

    #[test]
    fn bad_parameters() {
        let p = pg(3);
        let l = LineId(0);
        let off = p.points().find(|&x| !p.incident(x, l)).unwrap();
        let onl = p.points_on(l).next().unwrap();
        assert!(matches!(family_i(&p, l, off), Err(ConstructionError::NotIncident(..))));
        assert!(matches!(family_ii(&p, l, onl), Err(ConstructionError::Incident(..))));
        assert_eq!(
            nonstable_3q_minus_1(&p, l, onl, onl),
            Err(ConstructionError::SamePoint)
        );
        assert!(matches!(pg_3q_minus_2(&p, 0), Err(ConstructionError::BadParameter(_))));
        assert!(matches!(pg_3q_minus_2(&p, 3), Err(ConstructionError::BadParameter(_))));
        assert!(matches!(build_family(&p, "pg3qm2", None), Err(ConstructionError::BadParameter(_))));
        let not_blocking: PointSet = [PointId(0)].into();
        assert_eq!(
            blocking_plus_pencil(&p, &not_blocking, PointId(0)),
            Err(ConstructionError::NotBlocking)
        );
    }

    #[test]
    fn joins_through_second_point_of_the_line_leave_gaps() {
        // same recipe with the extra lines through P₂ instead of P₁
        let p = pg(5);
        let p0 = PointId(0);
        let pencil = p.pencil(p0);
        let ps: Vec<PointId> = p.points_on(pencil[0]).filter(|&x| x != p0).collect();
        let qs: Vec<PointId> = p.points_on(pencil[1]).filter(|&x| x != p0).collect();
        let t = 2;
        let lines = pencil[2..]
            .iter()
            .copied()
            .chain(qs[t..].iter().map(|&x| p.line_through(ps[1], x).unwrap()));
        let c = Candidate::new(ps[1..].iter().chain(&qs[..t]).copied(), lines);
        assert_eq!(c.size(), 13);
        assert!(!is_dominating(&p, &c));
        assert!(is_dominating(&p, &pg_3q_minus_2(&p, 2).unwrap().candidate));
    }

    #[test]
    fn blocking_pencil_size_depends_on_membership() {
        let p = pg(9);
        let b = baer_subplane(&p).unwrap();
        let inside = *b.iter().next().unwrap();
        let outside = p.points().find(|x| !b.contains(x)).unwrap();
        assert_eq!(blocking_plus_pencil(&p, &b, inside).unwrap().expected_size, 22);
        assert_eq!(blocking_plus_pencil(&p, &b, outside).unwrap().expected_size, 23);
        let line: PointSet = p.points_on(LineId(0)).collect();
        let on_line = *line.iter().next().unwrap();
        let c = blocking_plus_pencil(&p, &line, on_line).unwrap();
        assert_eq!(c.candidate.size(), 19);
        assert!(!crate::sets::is_minimal(&p, &c.candidate).unwrap());
    }
}
