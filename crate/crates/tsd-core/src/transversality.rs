//! Positivity predicates for tangles, the deficit-vector normalizer and
//! the pull-tight simple-clasp classifier.
//!
//! Each solid torus carries two distinguished 1-forms on shadow
//! displacements, both realized by [`Family::local_displacement`]: the
//! foliation form (`dv`, kernel tangent to the holomorphic disks) and the
//! braiding form (`du`, pages of the relative open book around the core).
//! A tangle is geometrically transverse when every PL segment has `dv > 0`,
//! braided when every segment has `du > 0`, and algebraically transverse
//! when each arc's total `dv` displacement is positive.

use crate::diagram::{DiagramError, Family, StrandRef, TangleArc, TorusDiagram};
use crate::kernel::{orientation_det, CoverPoint, Segment, Vec2Q};
use crate::moves::{apply_move, Move, MoveError};
use crate::rat::{self, qi, Q};
use num_traits::{Signed, Zero};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum TransversalityError {
    #[error("diagram is not standardized: {0}")]
    NotStandardized(String),
    #[error("total deficit is not positive: {0}")]
    NonPositiveGamma(String),
    #[error("spine graph on C-arcs is disconnected")]
    DisconnectedSpine,
    #[error("family {0} is not braided")]
    NotBraided(usize),
    #[error("family {0} is not algebraically transverse")]
    NotAlgebraicallyTransverse(usize),
    #[error("degenerate strip crossing: {0}")]
    DegenerateCrossing(String),
    #[error("normalizer failed after {0} attempts")]
    NormalizationFailed(u32),
    #[error(transparent)]
    Move(#[from] MoveError),
    #[error(transparent)]
    Diagram(#[from] DiagramError),
}

/// The two fixed integer linear functionals per family, as values on an
/// absolute displacement.
pub struct FoliationForms;

impl FoliationForms {
    /// Foliation form of family `lambda` (the local `dv`).
    pub fn foliation(family: Family, d: &Vec2Q) -> Q {
        family.local_displacement(d).1
    }

    /// Braiding form of family `lambda` (the local `du`).
    pub fn braiding(family: Family, d: &Vec2Q) -> Q {
        family.local_displacement(d).0
    }
}

/// Outcome of a pointwise predicate, with the offending segments.
#[derive(Clone, Debug)]
pub struct SegmentPredicate {
    pub lambda: usize,
    pub holds: bool,
    pub violations: Vec<StrandRef>,
}

/// Geometric transversality: the foliation form is positive on every
/// segment of every arc of the family.
pub fn is_geometrically_transverse(
    diagram: &TorusDiagram,
    lambda: usize,
) -> Result<SegmentPredicate, DiagramError> {
    segment_predicate(diagram, lambda, false)
}

/// Braiding: the open-book form is positive on every segment.
pub fn is_braided(diagram: &TorusDiagram, lambda: usize) -> Result<SegmentPredicate, DiagramError> {
    segment_predicate(diagram, lambda, true)
}

fn segment_predicate(
    diagram: &TorusDiagram,
    lambda: usize,
    braiding: bool,
) -> Result<SegmentPredicate, DiagramError> {
    let family = Family::from_lambda(lambda);
    let mut violations = Vec::new();
    for (local, &g) in diagram.family_arcs(family).iter().enumerate() {
        let arc = &diagram.arcs[g];
        for (si, seg) in arc.segments().enumerate() {
            let (du, dv) = family.local_displacement(&seg.direction());
            let value = if braiding { du } else { dv };
            if !value.is_positive() {
                violations.push(StrandRef {
                    family,
                    arc: local,
                    seg: si,
                });
            }
        }
    }
    Ok(SegmentPredicate {
        lambda,
        holds: violations.is_empty(),
        violations,
    })
}

/// Per-arc foliation integrals of one family.
#[derive(Clone, Debug)]
pub struct ArcIntegrals {
    pub lambda: usize,
    pub holds: bool,
    pub integrals: Vec<Q>,
}

/// Algebraic transversality: each arc's total foliation displacement is
/// positive. Rigid translations of an arc do not change its own integral.
pub fn is_algebraically_transverse(
    diagram: &TorusDiagram,
    lambda: usize,
) -> Result<ArcIntegrals, DiagramError> {
    let family = Family::from_lambda(lambda);
    let mut integrals = Vec::new();
    for &g in &diagram.family_arcs(family) {
        let arc = &diagram.arcs[g];
        let (_, dv) = family.local_displacement(&arc.displacement());
        integrals.push(dv);
    }
    Ok(ArcIntegrals {
        lambda,
        holds: integrals.iter().all(|x| x.is_positive()),
        integrals,
    })
}

/// The deficit vector: per-`C`-arc integrals of `dx - dy` (the `C` family's
/// foliation form) in family-local arc order, plus their sum `Gamma`.
#[derive(Clone, Debug)]
pub struct DeficitVector {
    pub entries: Vec<Q>,
    pub gamma: Q,
}

pub fn deficit_vector(diagram: &TorusDiagram) -> Result<DeficitVector, DiagramError> {
    let ints = is_algebraically_transverse(diagram, 3)?;
    let gamma = ints.integrals.iter().fold(Q::zero(), |acc, x| acc + x);
    Ok(DeficitVector {
        entries: ints.integrals,
        gamma,
    })
}

/// Standardization checks for the normalizer's precondition: `S(K_1)`
/// embedded as parallel copies of `alpha` in disjoint thin annuli, `B` arcs
/// of slope -1 with nested projections.
fn check_standardized(diagram: &TorusDiagram) -> Result<(), TransversalityError> {
    // S(K_1) embedded: no crossings among A and B arcs.
    let (raw, violations) = diagram.violations_with_raw();
    if !violations.is_empty() {
        return Err(TransversalityError::Diagram(DiagramError::Invalid(
            crate::diagram::ValidationReport { violations },
        )));
    }
    for c in &raw {
        let in_k1 = |f: Family| f == Family::A || f == Family::B;
        if in_k1(c.a.family) && in_k1(c.b.family) {
            return Err(TransversalityError::NotStandardized(
                "S(K_1) is not embedded".into(),
            ));
        }
    }
    // Each K_1 component must have class [alpha] = (1, 0).
    let inc = diagram.incidences()?;
    let (count, comp) = diagram.component_count(1)?;
    let mut comp_dx = vec![Q::zero(); count];
    let mut comp_dy = vec![Q::zero(); count];
    let mut comp_ys: Vec<Option<(Q, Q)>> = vec![None; count];
    for f in [Family::A, Family::B] {
        for (_local, &g) in diagram.family_arcs(f).iter().enumerate() {
            let arc = &diagram.arcs[g];
            let start_bridge = diagram
                .bridge_at(&arc.first().point.reduced())
                .expect("valid diagram");
            let cid = comp[start_bridge];
            let d = arc.displacement();
            if f == Family::A {
                comp_dx[cid] += d.x;
                comp_dy[cid] += d.y;
            } else {
                comp_dx[cid] -= d.x;
                comp_dy[cid] -= d.y;
            }
            for v in &arc.vertices {
                let y = rat::fract(&v.point.y);
                let entry = comp_ys[cid].get_or_insert((y.clone(), y.clone()));
                if y < entry.0 {
                    entry.0 = y.clone();
                }
                if y > entry.1 {
                    entry.1 = y;
                }
            }
        }
    }
    let _ = inc;
    for cid in 0..count {
        if comp_dx[cid] != qi(1) || !comp_dy[cid].is_zero() {
            return Err(TransversalityError::NotStandardized(format!(
                "K_1 component {cid} is not a parallel copy of alpha"
            )));
        }
    }
    // Disjoint annuli.
    for i in 0..count {
        for j in (i + 1)..count {
            if let (Some((alo, ahi)), Some((blo, bhi))) = (&comp_ys[i], &comp_ys[j]) {
                if alo <= bhi && blo <= ahi {
                    return Err(TransversalityError::NotStandardized(format!(
                        "annuli of K_1 components {i} and {j} overlap"
                    )));
                }
            }
        }
    }
    // B arcs: every segment of slope exactly -1; projections to the y-axis
    // pairwise nested or disjoint.
    let mut b_intervals: Vec<(Q, Q)> = Vec::new();
    for &g in &diagram.family_arcs(Family::B) {
        let arc = &diagram.arcs[g];
        for seg in arc.segments() {
            let d = seg.direction();
            if &d.x + &d.y != Q::zero() || d.x.is_zero() {
                return Err(TransversalityError::NotStandardized(
                    "B arc segment does not have slope -1".into(),
                ));
            }
        }
        let mut lo = rat::fract(&arc.first().point.y);
        let mut hi = lo.clone();
        for v in &arc.vertices {
            let y = rat::fract(&v.point.y);
            if y < lo {
                lo = y.clone();
            }
            if y > hi {
                hi = y;
            }
        }
        b_intervals.push((lo, hi));
    }
    for i in 0..b_intervals.len() {
        for j in (i + 1)..b_intervals.len() {
            let (alo, ahi) = &b_intervals[i];
            let (blo, bhi) = &b_intervals[j];
            let disjoint = ahi < blo || bhi < alo;
            let a_in_b = blo <= alo && ahi <= bhi;
            let b_in_a = alo <= blo && bhi <= ahi;
            if !(disjoint || a_in_b || b_in_a) {
                return Err(TransversalityError::NotStandardized(format!(
                    "B arcs {i} and {j} have interleaved projections"
                )));
            }
        }
    }
    Ok(())
}

/// Incidence of the `C` family at each bridge point: which C arc starts or
/// ends there. Used to express translation moves as flows on C arcs.
struct CIncidence {
    /// Per bridge: (family-local C arc index, is_head).
    at: Vec<(usize, bool)>,
}

fn c_incidence(diagram: &TorusDiagram) -> Result<CIncidence, DiagramError> {
    let inc = diagram.incidences()?;
    let at = inc
        .per_bridge
        .iter()
        .map(|row| row[Family::C.lambda() - 1])
        .collect();
    Ok(CIncidence { at })
}

/// Make the `C` family algebraically transverse by rigid translations of
/// `A` arcs (vertical) and `B` arcs (horizontal), routed as a flow along a
/// spanning tree of the arc-incidence graph. Returns the new diagram and
/// the move script realizing it; replaying the script on the input
/// reproduces the output exactly.
pub fn make_algebraically_transverse(
    diagram: &TorusDiagram,
) -> Result<(TorusDiagram, Vec<Move>), TransversalityError> {
    diagram.require_valid()?;
    check_standardized(diagram)?;
    let deficit = deficit_vector(diagram)?;
    if !deficit.gamma.is_positive() {
        return Err(TransversalityError::NonPositiveGamma(
            deficit.gamma.to_string(),
        ));
    }
    if deficit.entries.iter().all(|x| x.is_positive()) {
        return Ok((diagram.clone(), Vec::new()));
    }
    let b = deficit.entries.len();
    let cinc = c_incidence(diagram)?;
    let inc = diagram.incidences()?;

    // Graph on C arcs; edges carry the move template and its gain/lose ends.
    struct Edge {
        gain: usize,
        lose: usize,
        family: Family,
        arc: usize,
    }
    let mut edges = Vec::new();
    for f in [Family::A, Family::B] {
        for local in 0..diagram.family_arcs(f).len() {
            // Locate this arc's tail and head bridges.
            let mut tail_bridge = None;
            let mut head_bridge = None;
            for (bi, row) in inc.per_bridge.iter().enumerate() {
                let (l, is_head) = row[f.lambda() - 1];
                if l == local {
                    if is_head {
                        head_bridge = Some(bi);
                    } else {
                        tail_bridge = Some(bi);
                    }
                }
            }
            let (tb, hb) = (tail_bridge.unwrap(), head_bridge.unwrap());
            let c_tail = cinc.at[tb].0; // C arc starting at the tail
            let c_head = cinc.at[hb].0; // C arc ending at the head
            let (gain, lose) = match f {
                // Moving an A arc up by M raises the start of the C arc at
                // its tail (integral += M) and the end of the C arc at its
                // head (integral -= M).
                Family::A => (c_tail, c_head),
                // Moving a B arc right by M shifts the C start at its tail
                // right (integral -= M) and the C end at its head right
                // (integral += M).
                _ => (c_head, c_tail),
            };
            edges.push(Edge {
                gain,
                lose,
                family: f,
                arc: local,
            });
        }
    }

    // BFS spanning tree.
    let mut parent: Vec<Option<(usize, usize)>> = vec![None; b]; // (parent vertex, edge idx)
    let mut order = vec![0usize];
    let mut seen = vec![false; b];
    seen[0] = true;
    let mut qi_ = 0;
    while qi_ < order.len() {
        let v = order[qi_];
        qi_ += 1;
        for (ei, e) in edges.iter().enumerate() {
            for (x, y) in [(e.gain, e.lose), (e.lose, e.gain)] {
                if x == v && !seen[y] {
                    seen[y] = true;
                    parent[y] = Some((v, ei));
                    order.push(y);
                }
            }
        }
    }
    if seen.iter().any(|&s| !s) {
        return Err(TransversalityError::DisconnectedSpine);
    }

    const ATTEMPTS: u32 = 24;
    for attempt in 0..ATTEMPTS {
        // Positive targets in the hyperplane sum = Gamma, with a small
        // deterministic jitter to dodge coordinate collisions.
        let mut targets: Vec<Q> = Vec::with_capacity(b);
        let jitter_scale = &deficit.gamma / qi(64 * b as i64 * (attempt as i64 + 1) * 8);
        let mut jitter_sum = Q::zero();
        for i in 0..b {
            let j = if i + 1 == b {
                -jitter_sum.clone()
            } else {
                let j = &jitter_scale * qi((i as i64 % 5) - 2 + attempt as i64 % 3);
                jitter_sum += &j;
                j
            };
            targets.push(&deficit.gamma / qi(b as i64) + j);
        }
        if targets.iter().any(|t| !t.is_positive()) {
            continue;
        }

        // Route flow leaves-to-root.
        let mut current = deficit.entries.clone();
        let mut script: Vec<Move> = Vec::new();
        for &v in order.iter().rev() {
            let Some((pv, ei)) = parent[v] else { continue };
            let need = &targets[v] - &current[v];
            if need.is_zero() {
                continue;
            }
            let e = &edges[ei];
            let m = if e.gain == v { need.clone() } else { -need.clone() };
            current[v] = targets[v].clone();
            let delta_parent = if e.gain == pv { m.clone() } else { -m.clone() };
            current[pv] = &current[pv] + delta_parent;
            script.push(match e.family {
                Family::A => Move::TranslateA {
                    arc: e.arc,
                    dy: m,
                },
                _ => Move::TranslateB {
                    arc: e.arc,
                    dx: m,
                },
            });
        }

        // Apply and verify.
        let mut out = diagram.clone();
        let mut ok = true;
        for mv in &script {
            match apply_move(&out, mv) {
                Ok(next) => out = next,
                Err(_) => {
                    ok = false;
                    break;
                }
            }
        }
        if !ok {
            continue;
        }
        if out.validate().is_empty() {
            let after = deficit_vector(&out)?;
            let all_pos = after.entries.iter().all(|x| x.is_positive());
            if all_pos && after.gamma == deficit.gamma {
                let alg1 = is_algebraically_transverse(&out, 1)?.holds;
                let alg2 = is_algebraically_transverse(&out, 2)?.holds;
                if alg1 && alg2 {
                    return Ok((out, script));
                }
            }
        }
    }
    Err(TransversalityError::NormalizationFailed(ATTEMPTS))
}

/// One classified crossing of the strip projection (depth, page coordinate)
/// of a family's tangle.
#[derive(Clone, Debug)]
pub struct ClaspRecord {
    pub family: Family,
    pub arc_i: usize,
    pub arc_j: usize,
    /// 1: no obstruction; 2: arc `i` must pass through arc `j`;
    /// 3: arc `j` must pass through arc `i`.
    pub case: u8,
    /// Clasp multiplicity (0 in case 1).
    pub k: u64,
    pub r_i: Q,
    pub s_j: Q,
    pub delta: Q,
    pub delta_prime: Q,
    /// Strip location `(u mod 1, depth)` of the crossing.
    pub location: (Q, Q),
}

/// Local data of one arc in its family chart: cover path `(u, v, depth)`.
struct LocalArc {
    pts: Vec<(Q, Q, Q)>,
    u_start: Q,
    v_start: Q,
    slope: Q,
}

impl LocalArc {
    fn from_arc(family: Family, arc: &TangleArc) -> LocalArc {
        let pts: Vec<(Q, Q, Q)> = arc
            .vertices
            .iter()
            .map(|v| {
                let (u, w) = family.local_point(&v.point);
                (u, w, v.depth.clone())
            })
            .collect();
        let (u0, v0, _) = pts.first().unwrap().clone();
        let (u1, v1, _) = pts.last().unwrap().clone();
        let slope = (&v1 - &v0) / (&u1 - &u0);
        LocalArc {
            pts,
            u_start: u0,
            v_start: v0,
            slope,
        }
    }

    /// Straight-line target value at page coordinate `u` (cover).
    fn line_at(&self, u: &Q) -> Q {
        &self.v_start + &self.slope * (u - &self.u_start)
    }

    /// Interpolated `v` at parameter `t` of segment `i`.
    fn v_at(&self, i: usize, t: &Q) -> Q {
        let v0 = &self.pts[i].1;
        let v1 = &self.pts[i + 1].1;
        v0 + (v1 - v0) * t
    }

    fn u_at(&self, i: usize, t: &Q) -> Q {
        let u0 = &self.pts[i].0;
        let u1 = &self.pts[i + 1].0;
        u0 + (u1 - u0) * t
    }

    /// Strip segment `i` in the `(u, depth)` plane.
    fn strip_segment(&self, i: usize) -> Segment {
        Segment::new(
            CoverPoint::new(self.pts[i].0.clone(), self.pts[i].2.clone()),
            CoverPoint::new(self.pts[i + 1].0.clone(), self.pts[i + 1].2.clone()),
        )
    }
}

/// Pull-tight classification of one family's tangle: for every crossing of
/// the strip projection, the drop heights `R_i`, `S_j` against the
/// straight-line targets, the page gap `Delta` and the case/multiplicity.
///
/// Both `R_i` and `S_j` are independent of the chosen cover lifts; `Delta`
/// is the fractional gap in the positive foliation direction from the point
/// on arc `j` to the point on arc `i`.
pub fn pull_tight_classify(
    diagram: &TorusDiagram,
    lambda: usize,
) -> Result<Vec<ClaspRecord>, TransversalityError> {
    diagram.require_valid()?;
    if !is_braided(diagram, lambda)?.holds {
        return Err(TransversalityError::NotBraided(lambda));
    }
    if !is_algebraically_transverse(diagram, lambda)?.holds {
        return Err(TransversalityError::NotAlgebraicallyTransverse(lambda));
    }
    let family = Family::from_lambda(lambda);
    let locals: Vec<LocalArc> = diagram
        .family_arcs(family)
        .iter()
        .map(|&g| LocalArc::from_arc(family, &diagram.arcs[g]))
        .collect();

    let mut records = Vec::new();
    for i in 0..locals.len() {
        for j in (i + 1)..locals.len() {
            for si in 0..locals[i].pts.len() - 1 {
                for sj in 0..locals[j].pts.len() - 1 {
                    let seg_i = locals[i].strip_segment(si);
                    let seg_j = locals[j].strip_segment(sj);
                    // Strip crossings: the page coordinate u is periodic,
                    // depth is not, so only u-offsets apply.
                    for (m, n) in crate::kernel::candidate_offsets(&seg_i, &seg_j) {
                        if n != 0 {
                            continue;
                        }
                        let shifted = seg_j.shift(m, 0);
                        match crate::kernel::planar_intersection(&seg_i, &shifted) {
                            Ok(Some((p, t_i, t_j, _sign))) => {
                                let u_i = locals[i].u_at(si, &t_i);
                                let u_j = locals[j].u_at(sj, &t_j);
                                let v_i = locals[i].v_at(si, &t_i);
                                let v_j = locals[j].v_at(sj, &t_j);
                                let r_i = &v_i - locals[i].line_at(&u_i);
                                let s_j = &v_j - locals[j].line_at(&u_j);
                                let gap = &v_i - &v_j;
                                if rat::is_integer(&gap) {
                                    return Err(TransversalityError::DegenerateCrossing(
                                        "strands at integer foliation gap".into(),
                                    ));
                                }
                                let delta = rat::fract(&gap);
                                let delta_prime = qi(1) - &delta;
                                let case2 = &r_i - &s_j - &delta;
                                let case3 = &s_j - &r_i - &delta_prime;
                                let (case, k) = if case2.is_positive() {
                                    (2u8, rat::ceil_int(&case2))
                                } else if case3.is_positive() {
                                    (3u8, rat::ceil_int(&case3))
                                } else if case2.is_zero() || case3.is_zero() {
                                    return Err(TransversalityError::DegenerateCrossing(
                                        "pull-tight case boundary".into(),
                                    ));
                                } else {
                                    (1u8, 0.into())
                                };
                                use num_traits::ToPrimitive;
                                records.push(ClaspRecord {
                                    family,
                                    arc_i: i,
                                    arc_j: j,
                                    case,
                                    k: k.to_u64().unwrap_or(0),
                                    r_i,
                                    s_j,
                                    delta,
                                    delta_prime,
                                    location: (rat::fract(&p.x), p.y.clone()),
                                });
                            }
                            Ok(None) => {}
                            Err(e) => {
                                return Err(TransversalityError::DegenerateCrossing(e.to_string()))
                            }
                        }
                    }
                }
            }
        }
    }
    Ok(records)
}

/// Total clasp count over all three families; requires every family to be
/// braided and algebraically transverse.
pub fn clasp_count(diagram: &TorusDiagram) -> Result<u64, TransversalityError> {
    let mut n = 0;
    for lambda in 1..=3 {
        let records = pull_tight_classify(diagram, lambda)?;
        n += records.iter().map(|r| r.k).sum::<u64>();
    }
    Ok(n)
}

/// Sanity helper used in tests: the determinant of the two local form
/// directions is +1 for every family (the local charts are orientation
/// preserving).
pub fn chart_orientation_check(family: Family) -> bool {
    let ex = Vec2Q::new(qi(1), qi(0));
    let ey = Vec2Q::new(qi(0), qi(1));
    let (a, c) = family.local_displacement(&ex);
    let (b, d) = family.local_displacement(&ey);
    orientation_det(&Vec2Q::new(a, c), &Vec2Q::new(b, d)) == qi(1)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::builders::{complex_line, generic_lines, standardized_fixture};

    #[test]
    fn charts_preserve_orientation() {
        for f in Family::ALL {
            assert!(chart_orientation_check(f), "{f}");
        }
    }

    #[test]
    fn line_is_transverse_braided_algebraic() {
        let d = complex_line();
        for lambda in 1..=3 {
            assert!(is_geometrically_transverse(&d, lambda).unwrap().holds);
            assert!(is_braided(&d, lambda).unwrap().holds);
            let ints = is_algebraically_transverse(&d, lambda).unwrap();
            assert!(ints.holds);
            assert!(ints.integrals.iter().all(|x| x.is_positive()));
        }
    }

    #[test]
    fn line_clasp_count_zero() {
        let d = complex_line();
        assert_eq!(clasp_count(&d).unwrap(), 0);
    }

    #[test]
    fn lines_clasp_count_zero() {
        for d in 2..=3 {
            let diag = generic_lines(d).unwrap();
            assert_eq!(clasp_count(&diag).unwrap(), 0, "d={d}");
        }
    }

    #[test]
    fn fixtures_have_negative_entries_and_normalize() {
        let diag = standardized_fixture(0).unwrap();
        let before = deficit_vector(&diag).unwrap();
        assert!(
            before.entries.iter().any(|x| !x.is_positive()),
            "fixture should start with a non-positive entry: {:?}",
            before.entries
        );
        assert!(before.gamma.is_positive());
        let (out, script) = make_algebraically_transverse(&diag).unwrap();
        assert!(!script.is_empty());
        let after = deficit_vector(&out).unwrap();
        assert!(after.entries.iter().all(|x| x.is_positive()));
        assert_eq!(after.gamma, before.gamma);
        for lambda in 1..=3 {
            assert!(is_algebraically_transverse(&out, lambda).unwrap().holds);
        }
    }
}
