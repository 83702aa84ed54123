//! Exact PL geometry on the plane and the torus.
//!
//! Points live in the universal cover of the central torus, with both
//! coordinates measured in turns (period 1). All predicates are exact over
//! rationals; every degenerate configuration is reported as an error, never
//! silently perturbed.

use crate::rat::{self, Q};
use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};
use std::fmt;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum GeomError {
    /// Collinear overlap, endpoint incidence or tangency between segments.
    #[error("degenerate intersection: {0}")]
    DegenerateIntersection(String),
    /// Two of the direction vectors handed to a cyclic-order query are collinear.
    #[error("degenerate directions: {0}")]
    DegenerateDirections(String),
}

/// A point in the universal cover of the torus (coordinates in turns,
/// unbounded). Reduction mod 1 of each coordinate gives the torus position.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct CoverPoint {
    pub x: Q,
    pub y: Q,
}

impl CoverPoint {
    pub fn new(x: Q, y: Q) -> Self {
        CoverPoint { x, y }
    }

    /// Reduce both coordinates mod 1 into `[0, 1)`.
    pub fn reduced(&self) -> CoverPoint {
        CoverPoint::new(rat::fract(&self.x), rat::fract(&self.y))
    }

    pub fn translate(&self, dx: &Q, dy: &Q) -> CoverPoint {
        CoverPoint::new(&self.x + dx, &self.y + dy)
    }

    /// Integer lattice translate.
    pub fn shift(&self, m: i64, n: i64) -> CoverPoint {
        CoverPoint::new(&self.x + rat::qi(m), &self.y + rat::qi(n))
    }
}

impl fmt::Debug for CoverPoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {})", self.x, self.y)
    }
}

/// A displacement vector with rational entries.
#[derive(Clone, PartialEq, Eq)]
pub struct Vec2Q {
    pub x: Q,
    pub y: Q,
}

impl Vec2Q {
    pub fn new(x: Q, y: Q) -> Self {
        Vec2Q { x, y }
    }

    pub fn between(from: &CoverPoint, to: &CoverPoint) -> Self {
        Vec2Q::new(&to.x - &from.x, &to.y - &from.y)
    }

    pub fn is_zero(&self) -> bool {
        self.x.is_zero() && self.y.is_zero()
    }

    pub fn neg(&self) -> Vec2Q {
        Vec2Q::new(-&self.x, -&self.y)
    }
}

impl fmt::Debug for Vec2Q {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "<{}, {}>", self.x, self.y)
    }
}

/// Oriented PL segment between two cover points.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Segment {
    pub start: CoverPoint,
    pub end: CoverPoint,
}

impl Segment {
    pub fn new(start: CoverPoint, end: CoverPoint) -> Self {
        Segment { start, end }
    }

    pub fn direction(&self) -> Vec2Q {
        Vec2Q::between(&self.start, &self.end)
    }

    pub fn shift(&self, m: i64, n: i64) -> Segment {
        Segment::new(self.start.shift(m, n), self.end.shift(m, n))
    }

    /// Point at parameter `t` in `[0, 1]`.
    pub fn at(&self, t: &Q) -> CoverPoint {
        let d = self.direction();
        CoverPoint::new(&self.start.x + &d.x * t, &self.start.y + &d.y * t)
    }
}

/// Exact 2x2 determinant `u.x * v.y - u.y * v.x`.
pub fn orientation_det(u: &Vec2Q, v: &Vec2Q) -> Q {
    &u.x * &v.y - &u.y * &v.x
}

/// First homology class of the torus, written in the `([alpha], [beta])`
/// basis: `[alpha] = (1, 0)`, `[beta] = (0, 1)` and `[gamma] = (-1, -1)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct HomologyClass {
    pub a: i64,
    pub b: i64,
}

impl HomologyClass {
    pub const fn new(a: i64, b: i64) -> Self {
        HomologyClass { a, b }
    }

    pub const ALPHA: HomologyClass = HomologyClass::new(1, 0);
    pub const BETA: HomologyClass = HomologyClass::new(0, 1);
    pub const GAMMA: HomologyClass = HomologyClass::new(-1, -1);

    /// `alpha_1 = alpha`, `alpha_2 = beta`, `alpha_3 = gamma` (index mod 3).
    pub fn alpha(lambda: usize) -> HomologyClass {
        match (lambda + 2) % 3 {
            0 => Self::ALPHA,
            1 => Self::BETA,
            _ => Self::GAMMA,
        }
    }
}

/// Algebraic intersection pairing on first homology of the torus;
/// `<alpha, beta> = 1`.
pub fn intersection_pairing(h1: HomologyClass, h2: HomologyClass) -> i64 {
    h1.a * h2.b - h1.b * h2.a
}

/// A transverse intersection between two segments (possibly after an
/// integer lattice translation of the second one).
#[derive(Clone, Debug)]
pub struct SegCrossing {
    /// Intersection point reduced to the fundamental domain `[0,1)^2`.
    pub point: CoverPoint,
    /// Sign of `orientation_det(dir(s1), dir(s2))`.
    pub sign: i8,
    /// Lattice translation applied to the second segment.
    pub offset: (i64, i64),
    /// Parameter along the first segment, strictly inside `(0, 1)`.
    pub t1: Q,
    /// Parameter along the second segment, strictly inside `(0, 1)`.
    pub t2: Q,
}

/// Exact planar proper-intersection test.
///
/// Returns `Ok(Some(..))` for a transverse intersection interior to both
/// segments, `Ok(None)` when disjoint, and an error for every non-generic
/// configuration (collinear overlap, tangency at an endpoint, shared
/// endpoints). Endpoint contacts are the caller's job to pre-filter when
/// they are structural (consecutive segments of one arc, bridge points).
pub fn planar_intersection(s1: &Segment, s2: &Segment) -> Result<Option<(CoverPoint, Q, Q, i8)>, GeomError> {
    let u = s1.direction();
    let v = s2.direction();
    if u.is_zero() || v.is_zero() {
        return Err(GeomError::DegenerateIntersection("zero-length segment".into()));
    }
    let det = orientation_det(&u, &v);
    let w = Vec2Q::between(&s1.start, &s2.start);
    if det.is_zero() {
        // Parallel. Degenerate only when collinear and the ranges touch.
        if !orientation_det(&u, &w).is_zero() {
            return Ok(None);
        }
        // Collinear: project onto the dominant axis of u.
        let key = |p: &CoverPoint| -> Q {
            if u.x.is_zero() {
                p.y.clone()
            } else {
                p.x.clone()
            }
        };
        let (a0, a1) = (key(&s1.start), key(&s1.end));
        let (b0, b1) = (key(&s2.start), key(&s2.end));
        let (alo, ahi) = if a0 <= a1 { (a0, a1) } else { (a1, a0) };
        let (blo, bhi) = if b0 <= b1 { (b0, b1) } else { (b1, b0) };
        if alo <= bhi && blo <= ahi {
            return Err(GeomError::DegenerateIntersection(
                "collinear overlapping segments".into(),
            ));
        }
        return Ok(None);
    }
    let t1 = orientation_det(&w, &v) / det.clone();
    let t2 = orientation_det(&w, &u) / det.clone();
    let zero = Q::zero();
    let one = Q::one();
    if t1 < zero || t1 > one || t2 < zero || t2 > one {
        return Ok(None);
    }
    let interior1 = t1 > zero && t1 < one;
    let interior2 = t2 > zero && t2 < one;
    if interior1 && interior2 {
        let p = s1.at(&t1);
        let sign = if det.is_positive() { 1 } else { -1 };
        return Ok(Some((p, t1, t2, sign)));
    }
    Err(GeomError::DegenerateIntersection(format!(
        "endpoint incidence at t1={t1}, t2={t2}"
    )))
}

fn bbox(seg: &Segment) -> (Q, Q, Q, Q) {
    let (xlo, xhi) = if seg.start.x <= seg.end.x {
        (seg.start.x.clone(), seg.end.x.clone())
    } else {
        (seg.end.x.clone(), seg.start.x.clone())
    };
    let (ylo, yhi) = if seg.start.y <= seg.end.y {
        (seg.start.y.clone(), seg.end.y.clone())
    } else {
        (seg.end.y.clone(), seg.start.y.clone())
    };
    (xlo, xhi, ylo, yhi)
}

/// Integer lattice offsets `(m, n)` such that `s2 + (m, n)` could meet `s1`.
pub fn candidate_offsets(s1: &Segment, s2: &Segment) -> Vec<(i64, i64)> {
    let (ax0, ax1, ay0, ay1) = bbox(s1);
    let (bx0, bx1, by0, by1) = bbox(s2);
    // m ranges over integers with bx0 + m <= ax1 and bx1 + m >= ax0.
    let mlo = rat::ceil_int(&(&ax0 - &bx1));
    let mhi = rat::floor_int(&(&ax1 - &bx0));
    let nlo = rat::ceil_int(&(&ay0 - &by1));
    let nhi = rat::floor_int(&(&ay1 - &by0));
    let mut out = Vec::new();
    let mut m = mlo;
    while m <= mhi {
        let mut n = nlo.clone();
        while n <= nhi {
            out.push((
                int_to_i64(&m).expect("offset fits i64"),
                int_to_i64(&n).expect("offset fits i64"),
            ));
            n += 1;
        }
        m += 1;
    }
    out
}

fn int_to_i64(x: &BigInt) -> Option<i64> {
    use num_traits::ToPrimitive;
    x.to_i64()
}

/// All transverse intersections of two segments interpreted on the torus:
/// every integer translate of `s2` within range of `s1` is considered.
/// Endpoint incidences and overlaps are hard errors.
pub fn segment_crossings(s1: &Segment, s2: &Segment) -> Result<Vec<SegCrossing>, GeomError> {
    let mut out = Vec::new();
    for (m, n) in candidate_offsets(s1, s2) {
        let shifted = s2.shift(m, n);
        if let Some((p, t1, t2, sign)) = planar_intersection(s1, &shifted)? {
            out.push(SegCrossing {
                point: p.reduced(),
                sign,
                offset: (m, n),
                t1,
                t2,
            });
        }
    }
    Ok(out)
}

/// Variant of [`segment_crossings`] that ignores (rather than errors on)
/// endpoint contacts lying in the caller-supplied structural set. Used by
/// the diagram layer, where arcs legitimately share bridge endpoints.
pub fn segment_crossings_filtered(
    s1: &Segment,
    s2: &Segment,
    allow_contact_at: impl Fn(&CoverPoint) -> bool,
) -> Result<Vec<SegCrossing>, GeomError> {
    let mut out = Vec::new();
    for (m, n) in candidate_offsets(s1, s2) {
        let shifted = s2.shift(m, n);
        match planar_intersection(s1, &shifted) {
            Ok(Some((p, t1, t2, sign))) => out.push(SegCrossing {
                point: p.reduced(),
                sign,
                offset: (m, n),
                t1,
                t2,
            }),
            Ok(None) => {}
            Err(GeomError::DegenerateIntersection(msg)) => {
                // Tolerate pure endpoint-to-endpoint contact at structural points.
                let mut structural = false;
                for p in [&s1.start, &s1.end] {
                    for q in [&shifted.start, &shifted.end] {
                        if p == q && allow_contact_at(&p.reduced()) {
                            structural = true;
                        }
                    }
                }
                if !structural {
                    return Err(GeomError::DegenerateIntersection(msg));
                }
            }
            Err(e) => return Err(e),
        }
    }
    Ok(out)
}

/// Strict sign of a rational: -1, 0, +1.
pub fn sign_of(x: &Q) -> i8 {
    if x.is_zero() {
        0
    } else if x.is_positive() {
        1
    } else {
        -1
    }
}

/// True iff direction `c` lies strictly inside the counterclockwise sector
/// swept from `a` to `b` (all nonzero, `a` and `b` of distinct directions).
fn strictly_inside_ccw_sector(a: &Vec2Q, b: &Vec2Q, c: &Vec2Q) -> bool {
    let ab = orientation_det(a, b);
    let ac = orientation_det(a, c);
    let cb = orientation_det(c, b);
    if ab.is_positive() {
        ac.is_positive() && cb.is_positive()
    } else if ab.is_negative() {
        // Reflex sector.
        ac.is_positive() || cb.is_positive()
    } else {
        // b antiparallel to a: the sector is the open left half-plane of a.
        ac.is_positive()
    }
}

/// True iff `(u, v, w)` occur in counterclockwise cyclic order in the
/// oriented plane. Antiparallel pairs have distinct angles and are fine;
/// two directions that are positively parallel make the order ambiguous
/// and are an error.
pub fn cyclic_order_positive(u: &Vec2Q, v: &Vec2Q, w: &Vec2Q) -> Result<bool, GeomError> {
    for (a, b, name) in [(u, v, "u,v"), (v, w, "v,w"), (u, w, "u,w")] {
        if a.is_zero() || b.is_zero() {
            return Err(GeomError::DegenerateDirections("zero direction".into()));
        }
        if orientation_det(a, b).is_zero() {
            let dot = &a.x * &b.x + &a.y * &b.y;
            if dot.is_positive() {
                return Err(GeomError::DegenerateDirections(format!(
                    "equal directions in pair {name}"
                )));
            }
        }
    }
    Ok(strictly_inside_ccw_sector(u, w, v))
}
