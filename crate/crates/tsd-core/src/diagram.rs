//! The torus diagram data model: three families of PL tangle arcs in
//! solid-torus coordinates, bridge points, validation, signs, link tracing
//! and crossing enumeration.
//!
//! Arc vertices are stored in the universal cover; only bridge points are
//! stored reduced mod 1. Each vertex carries the radial depth `r` of the
//! tangle in its solid torus (`r = 1` on the central torus, `r -> 0` at the
//! core), which resolves over/under data at same-family crossings.

use crate::kernel::{
    cyclic_order_positive, orientation_det, planar_intersection,
    CoverPoint, GeomError, HomologyClass, Segment, Vec2Q,
};
use crate::rat::{self, Q};
use num_traits::{One, Signed, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::fmt;
use thiserror::Error;

/// Tangle family. `A`, `B`, `C` live in the solid tori `H_1`, `H_2`, `H_3`;
/// diagrams draw them red, blue and green respectively.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Family {
    A,
    B,
    C,
}

impl Family {
    pub const ALL: [Family; 3] = [Family::A, Family::B, Family::C];

    /// One-based index: `A -> 1`, `B -> 2`, `C -> 3`.
    pub fn lambda(self) -> usize {
        match self {
            Family::A => 1,
            Family::B => 2,
            Family::C => 3,
        }
    }

    pub fn from_lambda(lambda: usize) -> Family {
        match (lambda + 2) % 3 {
            0 => Family::A,
            1 => Family::B,
            _ => Family::C,
        }
    }

    pub fn next(self) -> Family {
        Family::from_lambda(self.lambda() + 1)
    }

    pub fn prev(self) -> Family {
        Family::from_lambda(self.lambda() + 2)
    }

    pub fn letter(self) -> char {
        match self {
            Family::A => 'A',
            Family::B => 'B',
            Family::C => 'C',
        }
    }

    /// Local solid-torus chart applied to an absolute displacement:
    /// returns `(du, dv)` where `u` is the open-book page coordinate
    /// (braiding form) and `v` the holomorphic-disk coordinate
    /// (transversality form) of this family's solid torus.
    pub fn local_displacement(self, d: &Vec2Q) -> (Q, Q) {
        match self {
            Family::A => (d.x.clone(), d.y.clone()),
            Family::B => (&d.y - &d.x, -&d.x),
            Family::C => (-&d.y, &d.x - &d.y),
        }
    }

    /// Same linear chart applied to a cover point.
    pub fn local_point(self, p: &CoverPoint) -> (Q, Q) {
        let v = Vec2Q::new(p.x.clone(), p.y.clone());
        self.local_displacement(&v)
    }

    /// Inverse of [`Family::local_point`]: absolute cover coordinates from
    /// this family's local chart coordinates.
    pub fn absolute_from_local(self, u: &Q, v: &Q) -> CoverPoint {
        match self {
            Family::A => CoverPoint::new(u.clone(), v.clone()),
            Family::B => CoverPoint::new(-v, u - v),
            Family::C => CoverPoint::new(v - u, -u),
        }
    }

    /// Absolute direction of the curve `alpha_lambda` bounding a disk in
    /// this family's solid torus.
    pub fn alpha_vec(self) -> Vec2Q {
        match self {
            Family::A => Vec2Q::new(rat::qi(1), rat::qi(0)),
            Family::B => Vec2Q::new(rat::qi(0), rat::qi(1)),
            Family::C => Vec2Q::new(rat::qi(-1), rat::qi(-1)),
        }
    }

    pub fn alpha_class(self) -> HomologyClass {
        HomologyClass::alpha(self.lambda())
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.letter())
    }
}

/// A bridge point: an intersection of the surface with the central torus.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BridgePoint {
    pub id: String,
    /// Position reduced mod 1 into `[0,1)^2`.
    pub position: CoverPoint,
    /// Orientation sign: `+1` iff this point is the terminal endpoint of
    /// all three incident arcs.
    pub sigma: i8,
}

/// One PL vertex of a tangle arc: shadow position in the cover plus the
/// radial depth of the strand at that vertex.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ArcVertex {
    pub point: CoverPoint,
    pub depth: Q,
}

impl ArcVertex {
    pub fn new(point: CoverPoint, depth: Q) -> Self {
        ArcVertex { point, depth }
    }
}

/// An oriented PL arc of one tangle family.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TangleArc {
    pub family: Family,
    pub vertices: Vec<ArcVertex>,
}

impl TangleArc {
    pub fn new(family: Family, vertices: Vec<ArcVertex>) -> Self {
        TangleArc { family, vertices }
    }

    pub fn first(&self) -> &ArcVertex {
        self.vertices.first().expect("nonempty arc")
    }

    pub fn last(&self) -> &ArcVertex {
        self.vertices.last().expect("nonempty arc")
    }

    pub fn segment_count(&self) -> usize {
        self.vertices.len().saturating_sub(1)
    }

    pub fn segment(&self, i: usize) -> Segment {
        Segment::new(self.vertices[i].point.clone(), self.vertices[i + 1].point.clone())
    }

    pub fn segments(&self) -> impl Iterator<Item = Segment> + '_ {
        (0..self.segment_count()).map(|i| self.segment(i))
    }

    /// Total displacement in the cover from first to last vertex.
    pub fn displacement(&self) -> Vec2Q {
        Vec2Q::between(&self.first().point, &self.last().point)
    }

    /// Depth at parameter `t` along segment `i` (linear interpolation).
    pub fn depth_at(&self, i: usize, t: &Q) -> Q {
        let r0 = &self.vertices[i].depth;
        let r1 = &self.vertices[i + 1].depth;
        r0 + (r1 - r0) * t
    }

    /// Orientation-reversed copy.
    pub fn reversed(&self) -> TangleArc {
        let mut vs = self.vertices.clone();
        vs.reverse();
        TangleArc::new(self.family, vs)
    }
}

/// Reference to one PL segment of one arc (family-local arc index).
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub struct StrandRef {
    pub family: Family,
    pub arc: usize,
    pub seg: usize,
}

/// One transverse double point of the shadow diagram, before any chain
/// interpretation: `det_sign` is the sign of the determinant of the two
/// stored arc orientations `(dir_a, dir_b)`.
#[derive(Clone, Debug)]
pub struct RawCrossing {
    pub a: StrandRef,
    pub b: StrandRef,
    /// Reduced intersection point.
    pub point: CoverPoint,
    pub t_a: Q,
    pub t_b: Q,
    pub det_sign: i8,
    pub offset: (i64, i64),
}

/// Crossing kind within a shadow chain `S(K_lambda)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CrossingKind {
    /// Crossing between the two families of the chain.
    Mixed { lambda: usize },
    /// Crossing within one family `mu` (same or different arcs).
    SelfFamily { mu: usize },
}

/// A crossing of the shadow chain `S(K_lambda)`, with over/under resolved.
#[derive(Clone, Debug)]
pub struct Crossing {
    pub point: CoverPoint,
    pub over: StrandRef,
    pub under: StrandRef,
    /// Writhe contribution: sign of `det(t_over, t_under)` with tangents
    /// oriented as they appear in the chain.
    pub sign: i8,
    pub kind: CrossingKind,
}

/// One violated invariant found by [`TorusDiagram::validate`].
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Violation {
    BridgeCountOdd { count: usize },
    ArcFamilyCount { family: Family, count: usize, expected: usize },
    DuplicateBridgePosition { a: String, b: String },
    DuplicateBridgeX { a: String, b: String },
    DuplicateBridgeY { a: String, b: String },
    BridgePositionNotReduced { id: String },
    SigmaValueInvalid { id: String },
    SigmaSumNonzero { sum: i64 },
    ArcTooShort { family: Family, arc: usize },
    EndpointDepthNotOne { family: Family, arc: usize, terminal: bool },
    DepthOutOfRange { family: Family, arc: usize, vertex: usize },
    RepeatedVertex { family: Family, arc: usize, vertex: usize },
    BacktrackingAt { family: Family, arc: usize, vertex: usize },
    EndpointNotOnBridge { family: Family, arc: usize, terminal: bool },
    /// The signed 0-chain boundaries of the three families disagree at a
    /// bridge point: `count` endpoints of `family` instead of exactly one.
    BoundaryMismatch { bridge: String, family: Family, count: usize },
    SigmaInconsistent { bridge: String, family: Family },
    InteriorVertexOnBridge { family: Family, arc: usize, vertex: usize },
    DegenerateIntersection { a: StrandRef, b: StrandRef, detail: String },
    CrossingAtBridgePoint { bridge: String, a: StrandRef, b: StrandRef },
    TriplePoint { x: String, y: String },
    EqualDepthAtCrossing { a: StrandRef, b: StrandRef },
    NonIntegralClass { lambda: usize },
    GermsCollinear { bridge: String },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::BridgeCountOdd { count } => write!(f, "odd number of bridge points: {count}"),
            Violation::ArcFamilyCount { family, count, expected } => {
                write!(f, "family {family} has {count} arcs, expected {expected}")
            }
            Violation::DuplicateBridgePosition { a, b } => {
                write!(f, "bridge points {a} and {b} share a position")
            }
            Violation::DuplicateBridgeX { a, b } => {
                write!(f, "bridge points {a} and {b} share an x-coordinate")
            }
            Violation::DuplicateBridgeY { a, b } => {
                write!(f, "bridge points {a} and {b} share a y-coordinate")
            }
            Violation::BridgePositionNotReduced { id } => {
                write!(f, "bridge point {id} position not reduced mod 1")
            }
            Violation::SigmaValueInvalid { id } => write!(f, "bridge point {id} sigma not +1/-1"),
            Violation::SigmaSumNonzero { sum } => write!(f, "sigma signs sum to {sum}, not 0"),
            Violation::ArcTooShort { family, arc } => {
                write!(f, "arc {family}{arc} has fewer than 2 vertices")
            }
            Violation::EndpointDepthNotOne { family, arc, terminal } => write!(
                f,
                "arc {family}{arc} {} endpoint depth is not 1",
                if *terminal { "terminal" } else { "initial" }
            ),
            Violation::DepthOutOfRange { family, arc, vertex } => {
                write!(f, "arc {family}{arc} vertex {vertex} depth outside (0,1]")
            }
            Violation::RepeatedVertex { family, arc, vertex } => {
                write!(f, "arc {family}{arc} repeats vertex {vertex}")
            }
            Violation::BacktrackingAt { family, arc, vertex } => {
                write!(f, "arc {family}{arc} backtracks over itself at vertex {vertex}")
            }
            Violation::EndpointNotOnBridge { family, arc, terminal } => write!(
                f,
                "arc {family}{arc} {} endpoint is not at a bridge point",
                if *terminal { "terminal" } else { "initial" }
            ),
            Violation::BoundaryMismatch { bridge, family, count } => write!(
                f,
                "boundary mismatch at bridge {bridge}: {count} endpoints of family {family} (expected 1)"
            ),
            Violation::SigmaInconsistent { bridge, family } => write!(
                f,
                "sigma of bridge {bridge} inconsistent with the orientation of its {family} arc"
            ),
            Violation::InteriorVertexOnBridge { family, arc, vertex } => write!(
                f,
                "arc {family}{arc} interior vertex {vertex} lies on a bridge point"
            ),
            Violation::DegenerateIntersection { a, b, detail } => write!(
                f,
                "degenerate intersection between {}{}#{} and {}{}#{}: {detail}",
                a.family, a.arc, a.seg, b.family, b.arc, b.seg
            ),
            Violation::CrossingAtBridgePoint { bridge, a, b } => write!(
                f,
                "crossing of {}{}#{} and {}{}#{} at bridge point {bridge}",
                a.family, a.arc, a.seg, b.family, b.arc, b.seg
            ),
            Violation::TriplePoint { x, y } => write!(f, "triple point at ({x}, {y})"),
            Violation::EqualDepthAtCrossing { a, b } => write!(
                f,
                "equal depths at same-family crossing of {}{}#{} and {}{}#{}",
                a.family, a.arc, a.seg, b.family, b.arc, b.seg
            ),
            Violation::NonIntegralClass { lambda } => {
                write!(f, "shadow chain S(K_{lambda}) has non-integral winding")
            }
            Violation::GermsCollinear { bridge } => {
                write!(f, "collinear arc germs at bridge point {bridge}")
            }
        }
    }
}

/// Result of validating a diagram; the diagram is valid iff `is_empty`.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn is_empty(&self) -> bool {
        self.violations.is_empty()
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.violations.is_empty() {
            write!(f, "valid")
        } else {
            for v in &self.violations {
                writeln!(f, "- {v}")?;
            }
            Ok(())
        }
    }
}

#[derive(Debug, Error, Clone)]
pub enum DiagramError {
    #[error("invalid diagram:\n{0}")]
    Invalid(ValidationReport),
    #[error(transparent)]
    Geom(#[from] GeomError),
    #[error("perturbation failed after {attempts} attempts")]
    PerturbationFailed { attempts: u32 },
}

const SCALE_BITS: u32 = 16;

/// One segment with its conservative integer bounding box (coordinates
/// scaled by `2^SCALE_BITS`, rounded outward).
struct SegEntry {
    sref: StrandRef,
    arc_idx: usize,
    seg_idx: usize,
    seg: Segment,
    bx: (i64, i64),
    by: (i64, i64),
}

/// Per-bridge incidence: for each family, the family-local arc index and
/// whether the bridge is that arc's head (terminal endpoint).
#[derive(Clone, Debug)]
pub struct Incidences {
    /// `per_bridge[b][f] = (family-local arc index, is_head)`
    pub per_bridge: Vec<[(usize, bool); 3]>,
}

/// The central immutable value: three families of arcs plus bridge points.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TorusDiagram {
    pub bridge_points: Vec<BridgePoint>,
    pub arcs: Vec<TangleArc>,
    /// User assertion that all tangles and disk systems are trivial.
    /// Necessary conditions are checked; triviality itself is never certified.
    pub asserted_bridge_position: bool,
}

impl TorusDiagram {
    pub fn new(
        bridge_points: Vec<BridgePoint>,
        arcs: Vec<TangleArc>,
        asserted_bridge_position: bool,
    ) -> Self {
        TorusDiagram {
            bridge_points,
            arcs,
            asserted_bridge_position,
        }
    }

    pub fn empty() -> Self {
        TorusDiagram::new(Vec::new(), Vec::new(), true)
    }

    /// Bridge index b (half the number of bridge points).
    pub fn bridge_index(&self) -> usize {
        self.bridge_points.len() / 2
    }

    /// Global indices of this family's arcs, in storage order.
    pub fn family_arcs(&self, family: Family) -> Vec<usize> {
        self.arcs
            .iter()
            .enumerate()
            .filter(|(_, a)| a.family == family)
            .map(|(i, _)| i)
            .collect()
    }

    /// Family-local arc lookup.
    pub fn arc(&self, family: Family, index: usize) -> Option<&TangleArc> {
        self.family_arcs(family).get(index).map(|&g| &self.arcs[g])
    }

    pub fn bridge_at(&self, reduced: &CoverPoint) -> Option<usize> {
        self.bridge_points.iter().position(|b| &b.position == reduced)
    }

    /// Build the bridge/arc incidence table; errors if the structure is not
    /// exactly one arc endpoint per family per bridge.
    pub fn incidences(&self) -> Result<Incidences, DiagramError> {
        let n = self.bridge_points.len();
        let mut table: Vec<[Option<(usize, bool)>; 3]> = vec![[None, None, None]; n];
        for family in Family::ALL {
            for (local, &g) in self.family_arcs(family).iter().enumerate() {
                let arc = &self.arcs[g];
                if arc.vertices.len() < 2 {
                    return Err(self.invalid());
                }
                for (vtx, is_head) in [(arc.first(), false), (arc.last(), true)] {
                    let red = vtx.point.reduced();
                    let Some(b) = self.bridge_at(&red) else {
                        return Err(self.invalid());
                    };
                    let slot = &mut table[b][family.lambda() - 1];
                    if slot.is_some() {
                        return Err(self.invalid());
                    }
                    *slot = Some((local, is_head));
                }
            }
        }
        let mut per_bridge = Vec::with_capacity(n);
        for row in table {
            let mut out = [(0usize, false); 3];
            for (i, slot) in row.into_iter().enumerate() {
                match slot {
                    Some(v) => out[i] = v,
                    None => return Err(self.invalid()),
                }
            }
            per_bridge.push(out);
        }
        Ok(Incidences { per_bridge })
    }

    fn invalid(&self) -> DiagramError {
        DiagramError::Invalid(self.validate())
    }

    /// Outward germ directions (pointing away from the bridge into each
    /// arc) of the three incident arcs, in family order `(A, B, C)`.
    /// Independent of arc orientation.
    pub fn germs(&self, bridge: usize) -> Result<[Vec2Q; 3], DiagramError> {
        let inc = self.incidences()?;
        Ok(self.germs_with(&inc, bridge))
    }

    /// [`TorusDiagram::germs`] with a prebuilt incidence table.
    pub fn germs_with(&self, inc: &Incidences, bridge: usize) -> [Vec2Q; 3] {
        let mut out: Vec<Vec2Q> = Vec::with_capacity(3);
        for family in Family::ALL {
            let (local, is_head) = inc.per_bridge[bridge][family.lambda() - 1];
            let arc = self.arc(family, local).expect("incidence arc exists");
            let dir = if is_head {
                let k = arc.vertices.len();
                Vec2Q::between(&arc.vertices[k - 1].point, &arc.vertices[k - 2].point)
            } else {
                Vec2Q::between(&arc.vertices[0].point, &arc.vertices[1].point)
            };
            out.push(dir);
        }
        [out[0].clone(), out[1].clone(), out[2].clone()]
    }

    /// Cyclic-order sign of a bridge point: `+1` iff the outward germs of
    /// the `A`, `B`, `C` arcs are positively cyclically ordered.
    pub fn epsilon_sign(&self, bridge: usize) -> Result<i8, DiagramError> {
        let inc = self.incidences()?;
        self.epsilon_sign_with(&inc, bridge)
    }

    /// [`TorusDiagram::epsilon_sign`] with a prebuilt incidence table.
    pub fn epsilon_sign_with(&self, inc: &Incidences, bridge: usize) -> Result<i8, DiagramError> {
        let [a, b, c] = self.germs_with(inc, bridge);
        let pos = cyclic_order_positive(&a, &b, &c).map_err(DiagramError::Geom)?;
        Ok(if pos { 1 } else { -1 })
    }

    /// All shadow double points of the full diagram (all family pairs),
    /// plus any genericity violations encountered.
    ///
    /// Exact arithmetic decides every outcome; a conservative integer
    /// bounding-box prefilter (coordinates scaled by 2^16, rounded
    /// outward) only skips segment pairs that provably cannot meet.
    pub fn raw_crossings(&self) -> (Vec<RawCrossing>, Vec<Violation>) {
        let entries = self.seg_entries();
        let mut crossings = Vec::new();
        let mut violations = Vec::new();
        for i in 0..entries.len() {
            for j in i..entries.len() {
                self.cross_pair(&entries[i], &entries[j], &mut crossings, &mut violations);
            }
        }
        self.geometry_post_passes(&crossings, &mut violations);
        (crossings, violations)
    }

    /// Crossing table of a diagram obtained from a valid one by modifying
    /// only the arcs whose global indices are listed in `changed` (plus any
    /// arcs appended beyond the old arc count). Crossings between two
    /// untouched arcs are reused from `old_raw`; everything else is
    /// recomputed, and the global passes (triple points, bridge contacts,
    /// depth ties) run over the combined table.
    pub fn raw_crossings_after_change(
        &self,
        old_arc_count: usize,
        old_raw: &[RawCrossing],
        changed: &[usize],
    ) -> (Vec<RawCrossing>, Vec<Violation>) {
        let mut is_changed = vec![false; self.arcs.len()];
        for &g in changed {
            is_changed[g] = true;
        }
        for g in old_arc_count..self.arcs.len() {
            is_changed[g] = true;
        }
        // Family-local labels of changed arcs; unchanged arcs keep their
        // family-local indices, so old strand references remain valid.
        let index = self.family_index();
        let mut changed_refs: Vec<(Family, usize)> = Vec::new();
        for (g, flag) in is_changed.iter().enumerate() {
            if *flag {
                let arc = &self.arcs[g];
                let local = index[arc.family.lambda() - 1]
                    .iter()
                    .position(|&x| x == g)
                    .unwrap();
                changed_refs.push((arc.family, local));
            }
        }
        let touched = |r: &StrandRef| {
            changed_refs
                .iter()
                .any(|&(f, l)| f == r.family && l == r.arc)
        };
        let mut crossings: Vec<RawCrossing> = old_raw
            .iter()
            .filter(|c| !touched(&c.a) && !touched(&c.b))
            .cloned()
            .collect();
        let mut violations = Vec::new();
        let entries = self.seg_entries();
        for i in 0..entries.len() {
            if !is_changed[entries[i].arc_idx] {
                continue;
            }
            for (j, ej) in entries.iter().enumerate() {
                if is_changed[ej.arc_idx] && j < i {
                    continue; // changed-changed pairs once
                }
                let (ea, eb) = if i <= j {
                    (&entries[i], ej)
                } else {
                    (ej, &entries[i])
                };
                self.cross_pair(ea, eb, &mut crossings, &mut violations);
            }
        }
        self.geometry_post_passes(&crossings, &mut violations);
        (crossings, violations)
    }

    /// Global arc indices per family, in storage order.
    pub fn family_index(&self) -> [Vec<usize>; 3] {
        let mut out: [Vec<usize>; 3] = [Vec::new(), Vec::new(), Vec::new()];
        for (g, arc) in self.arcs.iter().enumerate() {
            out[arc.family.lambda() - 1].push(g);
        }
        out
    }

    fn seg_entries(&self) -> Vec<SegEntry> {
        let scaled_floor = |x: &Q| -> i64 {
            use num_integer::Integer;
            use num_traits::ToPrimitive;
            let (q, _r) = (x.numer() << SCALE_BITS).div_mod_floor(x.denom());
            q.to_i64().expect("coordinate within range") - 1
        };
        let index = self.family_index();
        let mut entries: Vec<SegEntry> = Vec::new();
        for (g, arc) in self.arcs.iter().enumerate() {
            let local = index[arc.family.lambda() - 1]
                .iter()
                .position(|&x| x == g)
                .unwrap();
            for si in 0..arc.segment_count() {
                let seg = arc.segment(si);
                let (x0, x1) = if seg.start.x <= seg.end.x {
                    (&seg.start.x, &seg.end.x)
                } else {
                    (&seg.end.x, &seg.start.x)
                };
                let (y0, y1) = if seg.start.y <= seg.end.y {
                    (&seg.start.y, &seg.end.y)
                } else {
                    (&seg.end.y, &seg.start.y)
                };
                let bx = (scaled_floor(x0), scaled_floor(x1) + 2);
                let by = (scaled_floor(y0), scaled_floor(y1) + 2);
                entries.push(SegEntry {
                    sref: StrandRef {
                        family: arc.family,
                        arc: local,
                        seg: si,
                    },
                    arc_idx: g,
                    seg_idx: si,
                    seg,
                    bx,
                    by,
                });
            }
        }
        entries
    }

    /// Exact crossing enumeration for one segment pair over all relevant
    /// lattice offsets of the second segment.
    fn cross_pair(
        &self,
        ea: &SegEntry,
        eb: &SegEntry,
        crossings: &mut Vec<RawCrossing>,
        violations: &mut Vec<Violation>,
    ) {
        const SCALE: i64 = 1 << SCALE_BITS;
        let same_arc = ea.arc_idx == eb.arc_idx;
        let same_seg = same_arc && ea.seg_idx == eb.seg_idx;
        let adjacent = same_arc && (ea.seg_idx + 1 == eb.seg_idx || eb.seg_idx + 1 == ea.seg_idx);
        let m_lo = (ea.bx.0 - eb.bx.1).div_euclid(SCALE);
        let m_hi = (ea.bx.1 - eb.bx.0 + SCALE - 1).div_euclid(SCALE);
        if m_lo > m_hi {
            return;
        }
        let n_lo = (ea.by.0 - eb.by.1).div_euclid(SCALE);
        let n_hi = (ea.by.1 - eb.by.0 + SCALE - 1).div_euclid(SCALE);
        if n_lo > n_hi {
            return;
        }
        for m in m_lo..=m_hi {
            if eb.bx.1 + m * SCALE < ea.bx.0 || eb.bx.0 + m * SCALE > ea.bx.1 {
                continue;
            }
            for n in n_lo..=n_hi {
                if eb.by.1 + n * SCALE < ea.by.0 || eb.by.0 + n * SCALE > ea.by.1 {
                    continue;
                }
                if (same_seg || adjacent) && m == 0 && n == 0 {
                    continue;
                }
                let shifted = eb.seg.shift(m, n);
                match planar_intersection(&ea.seg, &shifted) {
                    Ok(Some((p, t_a, t_b, det_sign))) => {
                        crossings.push(RawCrossing {
                            a: ea.sref,
                            b: eb.sref,
                            point: p.reduced(),
                            t_a,
                            t_b,
                            det_sign,
                            offset: (m, n),
                        });
                    }
                    Ok(None) => {}
                    Err(GeomError::DegenerateIntersection(detail)) => {
                        // Arc endpoints meeting at a bridge point are
                        // structural, not degeneracies.
                        let mut structural = false;
                        for p in [&ea.seg.start, &ea.seg.end] {
                            for q in [&shifted.start, &shifted.end] {
                                if p == q && self.bridge_at(&p.reduced()).is_some() {
                                    structural = true;
                                }
                            }
                        }
                        if !structural {
                            violations.push(Violation::DegenerateIntersection {
                                a: ea.sref,
                                b: eb.sref,
                                detail,
                            });
                        }
                    }
                    Err(e) => violations.push(Violation::DegenerateIntersection {
                        a: ea.sref,
                        b: eb.sref,
                        detail: e.to_string(),
                    }),
                }
            }
        }
    }

    /// Passes over the full crossing table: triple points, crossings at
    /// bridge points, and equal depths at same-family crossings.
    fn geometry_post_passes(&self, crossings: &[RawCrossing], violations: &mut Vec<Violation>) {
        // Triple points: bucket by a scaled integer key first, then compare
        // exactly within buckets.
        let scaled_key = |p: &CoverPoint| -> (i64, i64) {
            use num_integer::Integer;
            use num_traits::ToPrimitive;
            let f = |x: &Q| -> i64 {
                let shifted: num_bigint::BigInt = x.numer() << 24;
                let (q, _r) = shifted.div_mod_floor(x.denom());
                q.to_i64().unwrap_or(0)
            };
            (f(&p.x), f(&p.y))
        };
        let mut keyed: Vec<((i64, i64), usize)> = crossings
            .iter()
            .enumerate()
            .map(|(i, c)| (scaled_key(&c.point), i))
            .collect();
        keyed.sort_unstable();
        let mut run = 0;
        while run < keyed.len() {
            let mut end = run + 1;
            while end < keyed.len() && keyed[end].0 == keyed[run].0 {
                end += 1;
            }
            if end - run > 1 {
                for a in run..end {
                    for b in (a + 1)..end {
                        let ca = &crossings[keyed[a].1];
                        let cb = &crossings[keyed[b].1];
                        if ca.point == cb.point {
                            violations.push(Violation::TriplePoint {
                                x: ca.point.x.to_string(),
                                y: ca.point.y.to_string(),
                            });
                        }
                    }
                }
            }
            run = end;
        }

        // Bridge-coincidence and depth ties.
        let bridge_keys: Vec<((i64, i64), usize)> = self
            .bridge_points
            .iter()
            .enumerate()
            .map(|(i, b)| (scaled_key(&b.position), i))
            .collect();
        let fam_arcs = self.family_index();
        for c in crossings {
            let ck = scaled_key(&c.point);
            for (bk, bi) in &bridge_keys {
                if *bk == ck && self.bridge_points[*bi].position == c.point {
                    violations.push(Violation::CrossingAtBridgePoint {
                        bridge: self.bridge_points[*bi].id.clone(),
                        a: c.a,
                        b: c.b,
                    });
                }
            }
            if c.a.family == c.b.family {
                let ga = fam_arcs[c.a.family.lambda() - 1][c.a.arc];
                let gb = fam_arcs[c.b.family.lambda() - 1][c.b.arc];
                let arc_a = &self.arcs[ga];
                let arc_b = &self.arcs[gb];
                if arc_a.depth_at(c.a.seg, &c.t_a) == arc_b.depth_at(c.b.seg, &c.t_b) {
                    violations.push(Violation::EqualDepthAtCrossing { a: c.a, b: c.b });
                }
            }
        }
    }

    /// Check every structural invariant; the diagram is valid iff the
    /// returned report is empty.
    pub fn validate(&self) -> ValidationReport {
        let (_, violations) = self.violations_with_raw();
        ValidationReport { violations }
    }

    /// Full validation pipeline, returning the raw crossing table alongside
    /// the violations so callers can reuse it.
    pub fn violations_with_raw(&self) -> (Vec<RawCrossing>, Vec<Violation>) {
        let mut v = Vec::new();

        if self.bridge_points.len() % 2 != 0 {
            v.push(Violation::BridgeCountOdd {
                count: self.bridge_points.len(),
            });
        }
        let b = self.bridge_index();
        for family in Family::ALL {
            let count = self.family_arcs(family).len();
            if count != b {
                v.push(Violation::ArcFamilyCount {
                    family,
                    count,
                    expected: b,
                });
            }
        }

        // Bridge point coordinates.
        let mut sigma_sum: i64 = 0;
        for (i, bp) in self.bridge_points.iter().enumerate() {
            if bp.position.reduced() != bp.position {
                v.push(Violation::BridgePositionNotReduced { id: bp.id.clone() });
            }
            if bp.sigma != 1 && bp.sigma != -1 {
                v.push(Violation::SigmaValueInvalid { id: bp.id.clone() });
            }
            sigma_sum += bp.sigma as i64;
            for other in &self.bridge_points[i + 1..] {
                if bp.position == other.position {
                    v.push(Violation::DuplicateBridgePosition {
                        a: bp.id.clone(),
                        b: other.id.clone(),
                    });
                } else {
                    if bp.position.x == other.position.x {
                        v.push(Violation::DuplicateBridgeX {
                            a: bp.id.clone(),
                            b: other.id.clone(),
                        });
                    }
                    if bp.position.y == other.position.y {
                        v.push(Violation::DuplicateBridgeY {
                            a: bp.id.clone(),
                            b: other.id.clone(),
                        });
                    }
                }
            }
        }
        if sigma_sum != 0 {
            v.push(Violation::SigmaSumNonzero { sum: sigma_sum });
        }

        // Arc-local invariants.
        for family in Family::ALL {
            for (local, &g) in self.family_arcs(family).iter().enumerate() {
                let arc = &self.arcs[g];
                if arc.vertices.len() < 2 {
                    v.push(Violation::ArcTooShort { family, arc: local });
                    continue;
                }
                let last = arc.vertices.len() - 1;
                for (k, vert) in arc.vertices.iter().enumerate() {
                    let terminal = k == 0 || k == last;
                    if terminal {
                        if !vert.depth.is_one() {
                            v.push(Violation::EndpointDepthNotOne {
                                family,
                                arc: local,
                                terminal: k == last,
                            });
                        }
                    } else {
                        if vert.depth >= Q::one() || vert.depth <= Q::zero() {
                            v.push(Violation::DepthOutOfRange {
                                family,
                                arc: local,
                                vertex: k,
                            });
                        }
                        if self.bridge_at(&vert.point.reduced()).is_some() {
                            v.push(Violation::InteriorVertexOnBridge {
                                family,
                                arc: local,
                                vertex: k,
                            });
                        }
                    }
                    if k > 0 && vert.point == arc.vertices[k - 1].point {
                        v.push(Violation::RepeatedVertex {
                            family,
                            arc: local,
                            vertex: k,
                        });
                    }
                }
                // Collinear reversals make the shadow non-immersed.
                for k in 1..last {
                    let d0 = Vec2Q::between(&arc.vertices[k - 1].point, &arc.vertices[k].point);
                    let d1 = Vec2Q::between(&arc.vertices[k].point, &arc.vertices[k + 1].point);
                    if orientation_det(&d0, &d1).is_zero() {
                        let dot = &d0.x * &d1.x + &d0.y * &d1.y;
                        if dot.is_negative() {
                            v.push(Violation::BacktrackingAt {
                                family,
                                arc: local,
                                vertex: k,
                            });
                        }
                    }
                }
                for (vert, terminal) in [(arc.first(), false), (arc.last(), true)] {
                    if self.bridge_at(&vert.point.reduced()).is_none() {
                        v.push(Violation::EndpointNotOnBridge {
                            family,
                            arc: local,
                            terminal,
                        });
                    }
                }
            }
        }

        // Incidence and sigma consistency (boundary matching of the three
        // families as signed 0-chains).
        let mut counts: Vec<[Vec<(usize, bool)>; 3]> =
            vec![[Vec::new(), Vec::new(), Vec::new()]; self.bridge_points.len()];
        for family in Family::ALL {
            for (local, &g) in self.family_arcs(family).iter().enumerate() {
                let arc = &self.arcs[g];
                if arc.vertices.len() < 2 {
                    continue;
                }
                for (vtx, is_head) in [(arc.first(), false), (arc.last(), true)] {
                    if let Some(bi) = self.bridge_at(&vtx.point.reduced()) {
                        counts[bi][family.lambda() - 1].push((local, is_head));
                    }
                }
            }
        }
        for (bi, row) in counts.iter().enumerate() {
            let bp = &self.bridge_points[bi];
            for family in Family::ALL {
                let ends = &row[family.lambda() - 1];
                if ends.len() != 1 {
                    v.push(Violation::BoundaryMismatch {
                        bridge: bp.id.clone(),
                        family,
                        count: ends.len(),
                    });
                    continue;
                }
                let (_, is_head) = ends[0];
                let expected = if bp.sigma == 1 { true } else { false };
                if is_head != expected {
                    v.push(Violation::SigmaInconsistent {
                        bridge: bp.id.clone(),
                        family,
                    });
                }
            }
        }

        // Shadow genericity.
        let (raw, mut geom) = self.raw_crossings();
        v.append(&mut geom);

        // Integral windings of the three shadow chains.
        if v.iter().all(|x| !matches!(x, Violation::BoundaryMismatch { .. })) {
            for lambda in 1..=3 {
                if self.chain_class(lambda).is_none() {
                    v.push(Violation::NonIntegralClass { lambda });
                }
            }
        }

        // Epsilon must be computable at every bridge point.
        if v.is_empty() {
            for bi in 0..self.bridge_points.len() {
                if self.epsilon_sign(bi).is_err() {
                    v.push(Violation::GermsCollinear {
                        bridge: self.bridge_points[bi].id.clone(),
                    });
                }
            }
        }

        (raw, v)
    }

    pub fn require_valid(&self) -> Result<(), DiagramError> {
        let report = self.validate();
        if report.is_empty() {
            Ok(())
        } else {
            Err(DiagramError::Invalid(report))
        }
    }

    /// Total cover winding of the closed chain `S(K_lambda)` as a homology
    /// class, or `None` when the winding is not integral.
    pub fn chain_class(&self, lambda: usize) -> Option<HomologyClass> {
        let fam = Family::from_lambda(lambda);
        let mut dx = Q::zero();
        let mut dy = Q::zero();
        for &g in &self.family_arcs(fam) {
            let d = self.arcs[g].displacement();
            dx += d.x;
            dy += d.y;
        }
        for &g in &self.family_arcs(fam.next()) {
            let d = self.arcs[g].displacement();
            dx -= d.x;
            dy -= d.y;
        }
        Some(HomologyClass::new(rat::to_i64(&dx)?, rat::to_i64(&dy)?))
    }

    /// The oriented shadow 1-chain `S(K_lambda)`: this family's arcs as
    /// stored and the next family's arcs orientation-reversed.
    pub fn shadow_chain(&self, lambda: usize) -> Result<ShadowChain, DiagramError> {
        self.require_valid()?;
        let fam = Family::from_lambda(lambda);
        let mut strands = Vec::new();
        for (local, _) in self.family_arcs(fam).iter().enumerate() {
            strands.push(ChainStrand {
                family: fam,
                arc: local,
                reversed: false,
            });
        }
        for (local, _) in self.family_arcs(fam.next()).iter().enumerate() {
            strands.push(ChainStrand {
                family: fam.next(),
                arc: local,
                reversed: true,
            });
        }
        Ok(ShadowChain { lambda, strands })
    }

    /// All crossings of the chain `S(K_lambda)`, over/under resolved.
    ///
    /// Mixed crossings: the next family's strand passes over. Same-family
    /// crossings of family `lambda`: the strand closer to the central torus
    /// (larger depth) passes over; for family `lambda + 1` the opposite.
    pub fn enumerate_crossings(&self, lambda: usize) -> Result<Vec<Crossing>, DiagramError> {
        let (raw, violations) = self.raw_crossings();
        if !violations.is_empty() {
            return Err(DiagramError::Invalid(ValidationReport { violations }));
        }
        self.chain_crossings(lambda, &raw)
    }

    /// Chain crossings assembled from a precomputed raw table.
    pub fn chain_crossings(
        &self,
        lambda: usize,
        raw: &[RawCrossing],
    ) -> Result<Vec<Crossing>, DiagramError> {
        let fam = Family::from_lambda(lambda);
        let over_fam = fam.next();
        let mut out = Vec::new();
        for c in raw {
            let fams = (c.a.family, c.b.family);
            let in_chain = |f: Family| f == fam || f == over_fam;
            if !in_chain(fams.0) || !in_chain(fams.1) {
                continue;
            }
            let crossing = if fams.0 != fams.1 {
                // Mixed: over strand is the lambda+1 family, reversed in the chain.
                let (over, under, det_lambda_first) = if fams.0 == fam {
                    (c.b, c.a, c.det_sign)
                } else {
                    (c.a, c.b, -c.det_sign)
                };
                // sign = det(-dir_over, dir_under) = det(dir_lambda, dir_over).
                Crossing {
                    point: c.point.clone(),
                    over,
                    under,
                    sign: det_lambda_first,
                    kind: CrossingKind::Mixed { lambda },
                }
            } else {
                let mu = fams.0;
                let arc_a = self.arc(mu, c.a.arc).unwrap();
                let arc_b = self.arc(mu, c.b.arc).unwrap();
                let depth_a = arc_a.depth_at(c.a.seg, &c.t_a);
                let depth_b = arc_b.depth_at(c.b.seg, &c.t_b);
                if depth_a == depth_b {
                    return Err(DiagramError::Geom(GeomError::DegenerateIntersection(
                        "equal depths at same-family crossing".into(),
                    )));
                }
                // In the ambient where mu is the first family of the chain,
                // larger depth (closer to the torus) passes over; when mu
                // plays the second role the convention flips.
                let a_over_when_first = depth_a > depth_b;
                let a_over = if mu == fam {
                    a_over_when_first
                } else {
                    !a_over_when_first
                };
                // Tangent orientations: both as stored (mu == fam) or both
                // reversed (mu == fam.next()); the determinant is unchanged
                // by reversing both.
                let (over, under, sign) = if a_over {
                    (c.a, c.b, c.det_sign)
                } else {
                    (c.b, c.a, -c.det_sign)
                };
                Crossing {
                    point: c.point.clone(),
                    over,
                    under,
                    sign,
                    kind: CrossingKind::SelfFamily { mu: mu.lambda() },
                }
            };
            out.push(crossing);
        }
        Ok(out)
    }

    /// Number of components of the link `K_lambda` (cycles of the 2-regular
    /// graph on bridge points with family `lambda` and `lambda+1` arcs as
    /// edges), plus the component id of each bridge point.
    pub fn component_count(&self, lambda: usize) -> Result<(usize, Vec<usize>), DiagramError> {
        let inc = self.incidences()?;
        Ok(self.component_count_with(&inc, lambda))
    }

    /// [`TorusDiagram::component_count`] with a prebuilt incidence table.
    pub fn component_count_with(&self, inc: &Incidences, lambda: usize) -> (usize, Vec<usize>) {
        let fam = Family::from_lambda(lambda);
        let n = self.bridge_points.len();
        if n == 0 {
            return (0, Vec::new());
        }
        // Edges: for each arc of the two families, its two bridge endpoints.
        let mut adj: Vec<Vec<usize>> = vec![Vec::new(); n];
        for f in [fam, fam.next()] {
            let locals = self.family_arcs(f).len();
            let mut ends: Vec<Vec<usize>> = vec![Vec::new(); locals];
            for (bi, row) in inc.per_bridge.iter().enumerate() {
                let (local, _) = row[f.lambda() - 1];
                ends[local].push(bi);
            }
            for e in ends {
                if e.len() == 2 {
                    adj[e[0]].push(e[1]);
                    adj[e[1]].push(e[0]);
                }
            }
        }
        let mut comp = vec![usize::MAX; n];
        let mut count = 0;
        for start in 0..n {
            if comp[start] != usize::MAX {
                continue;
            }
            let mut stack = vec![start];
            while let Some(x) = stack.pop() {
                if comp[x] != usize::MAX {
                    continue;
                }
                comp[x] = count;
                for &y in &adj[x] {
                    if comp[y] == usize::MAX {
                        stack.push(y);
                    }
                }
            }
            count += 1;
        }
        (count, comp)
    }

    /// True iff the bridge-point incidence graph of all arcs is connected.
    pub fn is_connected(&self) -> Result<bool, DiagramError> {
        let inc = self.incidences()?;
        Ok(self.is_connected_with(&inc))
    }

    /// [`TorusDiagram::is_connected`] with a prebuilt incidence table.
    pub fn is_connected_with(&self, inc: &Incidences) -> bool {
        let n = self.bridge_points.len();
        if n == 0 {
            return true;
        }
        let mut adj: Vec<Vec<usize>> = vec![Vec::new(); n];
        for f in Family::ALL {
            let locals = self.family_arcs(f).len();
            let mut ends: Vec<Vec<usize>> = vec![Vec::new(); locals];
            for (bi, row) in inc.per_bridge.iter().enumerate() {
                let (local, _) = row[f.lambda() - 1];
                ends[local].push(bi);
            }
            for e in ends {
                if e.len() == 2 {
                    adj[e[0]].push(e[1]);
                    adj[e[1]].push(e[0]);
                }
            }
        }
        let mut seen = vec![false; n];
        let mut stack = vec![0usize];
        let mut visited = 0;
        while let Some(x) = stack.pop() {
            if seen[x] {
                continue;
            }
            seen[x] = true;
            visited += 1;
            for &y in &adj[x] {
                if !seen[y] {
                    stack.push(y);
                }
            }
        }
        visited == n
    }

    /// Deterministic seeded perturbation: moves bridge points (together
    /// with their incident arc endpoints), interior shadow vertices and
    /// interior depths by rational offsets bounded by `radius` until the
    /// diagram validates. A valid diagram is returned unchanged.
    pub fn perturb(&self, seed: u64, radius: &Q) -> Result<TorusDiagram, DiagramError> {
        if self.validate().is_empty() {
            return Ok(self.clone());
        }
        const ATTEMPTS: u32 = 48;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for _attempt in 0..ATTEMPTS {
            let mut cand = self.clone();
            let grid: i64 = 64;
            let offset = |rng: &mut ChaCha8Rng| -> Q {
                let k: i64 = rng.gen_range(-grid..=grid);
                radius * rat::q(k, grid)
            };
            // Move each bridge point and splice its incident arc endpoints.
            let old_positions: Vec<CoverPoint> =
                cand.bridge_points.iter().map(|b| b.position.clone()).collect();
            let mut deltas = Vec::new();
            for bp in cand.bridge_points.iter_mut() {
                let dx = offset(&mut rng);
                let dy = offset(&mut rng);
                bp.position = bp.position.translate(&dx, &dy).reduced();
                deltas.push((dx, dy));
            }
            for arc in cand.arcs.iter_mut() {
                let len = arc.vertices.len();
                for (k, vert) in arc.vertices.iter_mut().enumerate() {
                    if k == 0 || k + 1 == len {
                        let red = vert.point.reduced();
                        if let Some(bi) = old_positions.iter().position(|p| p == &red) {
                            let (dx, dy) = &deltas[bi];
                            vert.point = vert.point.translate(dx, dy);
                        }
                    } else {
                        let dx = offset(&mut rng);
                        let dy = offset(&mut rng);
                        vert.point = vert.point.translate(&dx, &dy);
                        // Depth jitter, clamped inside (0, 1).
                        let dr = offset(&mut rng) * rat::q(1, 4);
                        let nd = &vert.depth + dr;
                        if nd > Q::zero() && nd < Q::one() {
                            vert.depth = nd;
                        }
                    }
                }
            }
            if cand.validate().is_empty() {
                return Ok(cand);
            }
        }
        Err(DiagramError::PerturbationFailed { attempts: ATTEMPTS })
    }

    /// Flip every arc orientation and every sigma sign (global orientation
    /// reversal of the surface).
    pub fn orientation_reversed(&self) -> TorusDiagram {
        let mut d = self.clone();
        for arc in d.arcs.iter_mut() {
            arc.vertices.reverse();
        }
        for bp in d.bridge_points.iter_mut() {
            bp.sigma = -bp.sigma;
        }
        d
    }
}

/// One strand of a shadow chain.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ChainStrand {
    pub family: Family,
    pub arc: usize,
    pub reversed: bool,
}

/// The oriented 1-chain `S(K_lambda)`.
#[derive(Clone, Debug)]
pub struct ShadowChain {
    pub lambda: usize,
    pub strands: Vec<ChainStrand>,
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rat::{q, qi};

    fn pt(xn: i64, xd: i64, yn: i64, yd: i64) -> CoverPoint {
        CoverPoint::new(q(xn, xd), q(yn, yd))
    }

    #[test]
    fn family_cycle() {
        assert_eq!(Family::A.next(), Family::B);
        assert_eq!(Family::C.next(), Family::A);
        assert_eq!(Family::A.prev(), Family::C);
        assert_eq!(Family::from_lambda(4), Family::A);
    }

    #[test]
    fn local_charts_send_alpha_to_unit_u() {
        for f in Family::ALL {
            let (u, v) = f.local_displacement(&f.alpha_vec());
            assert_eq!(u, qi(1), "{f}");
            assert_eq!(v, qi(0), "{f}");
        }
    }

    #[test]
    fn local_charts_compose_cyclically() {
        // The chart of B applied after the inverse chart of A equals the
        // fixed SL(2,Z) transition; applying it three times is the identity.
        let d = Vec2Q::new(qi(5), qi(-3));
        let (u1, v1) = Family::B.local_displacement(&d);
        let step = |x: &Q, y: &Q| (y - x, -x.clone());
        let (u1b, v1b) = step(&d.x, &d.y);
        assert_eq!((u1.clone(), v1.clone()), (u1b, v1b));
        let (u2, v2) = step(&u1, &v1);
        assert_eq!((u2.clone(), v2.clone()), Family::C.local_displacement(&d));
        let (u3, v3) = step(&u2, &v2);
        assert_eq!((u3, v3), (d.x.clone(), d.y.clone()));
    }

    #[test]
    fn empty_diagram_is_valid() {
        let d = TorusDiagram::empty();
        assert!(d.validate().is_empty());
        assert_eq!(d.chain_class(1), Some(HomologyClass::new(0, 0)));
    }

    #[test]
    fn duplicate_bridge_x_is_reported() {
        let d = TorusDiagram::new(
            vec![
                BridgePoint {
                    id: "v0".into(),
                    position: pt(1, 3, 2, 3),
                    sigma: 1,
                },
                BridgePoint {
                    id: "v1".into(),
                    position: pt(1, 3, 1, 3),
                    sigma: -1,
                },
            ],
            Vec::new(),
            false,
        );
        let report = d.validate();
        assert!(report
            .violations
            .iter()
            .any(|v| matches!(v, Violation::DuplicateBridgeX { .. })));
    }
}
