//! Diagram moves: braid stabilization, mini bridge stabilization, rigid
//! arc translations, and a seeded move-sequence engine.
//!
//! Every move is a pure diagram-to-diagram function; gadget parameters
//! (loop clearances, connector depths) are retried deterministically until
//! the result validates, so a move either fails or produces a valid
//! diagram.

use crate::diagram::{
    ArcVertex, BridgePoint, DiagramError, Family, TangleArc, TorusDiagram,
};
use crate::invariants::{decompose, Analysis};
use crate::kernel::{CoverPoint, Vec2Q};
use crate::rat::{self, q, qi, Q};
use num_traits::{One, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::fmt;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum MoveError {
    #[error("invalid anchor: {0}")]
    InvalidAnchor(String),
    #[error("collision unresolvable: {0}")]
    CollisionUnresolvable(String),
    #[error("conservation failure at step {step} ({detail}); failing prefix has {prefix_len} moves")]
    Conservation {
        step: usize,
        detail: String,
        prefix_len: usize,
    },
    #[error("step {step}: {source}")]
    Step {
        step: usize,
        #[source]
        source: Box<MoveError>,
    },
    #[error("move parse error: {0}")]
    Parse(String),
    #[error(transparent)]
    Diagram(#[from] DiagramError),
}

/// One diagram move. Arc indices are family-local.
#[derive(Clone, Debug, PartialEq)]
pub enum Move {
    /// Rewrite an arc with a loop through its solid torus's core, shifting
    /// the family's shadow class by `j * [alpha_lambda]` (`j = +1/-1`).
    /// The anchor is an interior point of segment `seg` at parameter `t`.
    BraidStab {
        family: Family,
        arc: usize,
        j: i8,
        seg: usize,
        t: Q,
    },
    /// Split an arc at an interior crossing-free point, creating two new
    /// bridge points and one new arc in each of the other two families.
    MiniStab {
        family: Family,
        arc: usize,
        seg: usize,
        t: Q,
        mirrored: bool,
    },
    /// Rigid vertical translation of an `A` arc; incident `B`/`C` arcs are
    /// extended by vertical connectors at fresh depths.
    TranslateA { arc: usize, dy: Q },
    /// Rigid horizontal translation of a `B` arc; incident `A`/`C` arcs are
    /// extended by horizontal connectors.
    TranslateB { arc: usize, dx: Q },
}

impl fmt::Display for Move {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Move::BraidStab {
                family,
                arc,
                j,
                seg,
                t,
            } => write!(
                f,
                "braid {family} {arc} {} {seg}:{}",
                if *j > 0 { "+1" } else { "-1" },
                rat::to_frac_string(t)
            ),
            Move::MiniStab {
                family,
                arc,
                seg,
                t,
                mirrored,
            } => write!(
                f,
                "mini {family} {arc} {seg}:{} {}",
                rat::to_frac_string(t),
                if *mirrored { "right" } else { "left" }
            ),
            Move::TranslateA { arc, dy } => {
                write!(f, "translate-a {arc} {}", rat::to_frac_string(dy))
            }
            Move::TranslateB { arc, dx } => {
                write!(f, "translate-b {arc} {}", rat::to_frac_string(dx))
            }
        }
    }
}

/// Parse one move line (the inverse of `Display`).
pub fn parse_move(line: &str) -> Result<Move, MoveError> {
    let toks: Vec<&str> = line.split_whitespace().collect();
    let bad = |msg: &str| MoveError::Parse(format!("{msg} in {line:?}"));
    let parse_family = |s: &str| match s {
        "A" => Ok(Family::A),
        "B" => Ok(Family::B),
        "C" => Ok(Family::C),
        _ => Err(bad("unknown family")),
    };
    let parse_anchor = |s: &str| -> Result<(usize, Q), MoveError> {
        let (seg, t) = s.split_once(':').ok_or_else(|| bad("expected seg:t"))?;
        let seg = seg.parse::<usize>().map_err(|_| bad("bad segment index"))?;
        let t = rat::parse_frac(t).map_err(|e| bad(&e))?;
        Ok((seg, t))
    };
    match toks.as_slice() {
        ["braid", fam, arc, j, anchor] => {
            let j = match *j {
                "+1" | "+" => 1,
                "-1" | "-" => -1,
                _ => return Err(bad("sign must be +1 or -1")),
            };
            let (seg, t) = parse_anchor(anchor)?;
            Ok(Move::BraidStab {
                family: parse_family(fam)?,
                arc: arc.parse().map_err(|_| bad("bad arc index"))?,
                j,
                seg,
                t,
            })
        }
        ["mini", fam, arc, anchor, hand] => {
            let mirrored = match *hand {
                "left" => false,
                "right" => true,
                _ => return Err(bad("handedness must be left or right")),
            };
            let (seg, t) = parse_anchor(anchor)?;
            Ok(Move::MiniStab {
                family: parse_family(fam)?,
                arc: arc.parse().map_err(|_| bad("bad arc index"))?,
                seg,
                t,
                mirrored,
            })
        }
        ["translate-a", arc, dy] => Ok(Move::TranslateA {
            arc: arc.parse().map_err(|_| bad("bad arc index"))?,
            dy: rat::parse_frac(dy).map_err(|e| bad(&e))?,
        }),
        ["translate-b", arc, dx] => Ok(Move::TranslateB {
            arc: arc.parse().map_err(|_| bad("bad arc index"))?,
            dx: rat::parse_frac(dx).map_err(|e| bad(&e))?,
        }),
        _ => Err(bad("unknown move")),
    }
}

/// Parse a whole script: one move per line, `#` comments and blanks allowed.
pub fn parse_script(text: &str) -> Result<Vec<Move>, MoveError> {
    let mut out = Vec::new();
    for line in text.lines() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        out.push(parse_move(line)?);
    }
    Ok(out)
}

pub fn format_script(moves: &[Move]) -> String {
    let mut s = String::new();
    for m in moves {
        s.push_str(&m.to_string());
        s.push('\n');
    }
    s
}

fn global_arc(diagram: &TorusDiagram, family: Family, local: usize) -> Result<usize, MoveError> {
    diagram
        .family_arcs(family)
        .get(local)
        .copied()
        .ok_or_else(|| MoveError::InvalidAnchor(format!("no arc {family}{local}")))
}

fn next_bridge_id(diagram: &TorusDiagram) -> usize {
    diagram
        .bridge_points
        .iter()
        .filter_map(|b| b.id.strip_prefix('v').and_then(|s| s.parse::<usize>().ok()))
        .max()
        .map(|m| m + 1)
        .unwrap_or(0)
}

/// Braid stabilization: splice a loop running once around the core of the
/// family's solid torus into the arc, shifting `[A_family]` by
/// `j * [alpha_family]`. The loop is a straight line in the family's local
/// chart from the exit anchor to the re-entry anchor plus `j` pages, with a
/// depth excursion toward the core.
pub fn braid_stabilize(
    diagram: &TorusDiagram,
    family: Family,
    arc: usize,
    j: i8,
    seg: usize,
    t: &Q,
) -> Result<TorusDiagram, MoveError> {
    let before = Analysis::new(diagram)
        .map_err(|e| MoveError::InvalidAnchor(format!("start diagram: {e}")))?;
    braid_stabilize_analyzed(diagram, &before, family, arc, j, seg, t).map(|(d, _)| d)
}

/// [`braid_stabilize`] reusing a precomputed analysis of the input and
/// returning the analysis of the result.
pub fn braid_stabilize_analyzed(
    diagram: &TorusDiagram,
    before: &Analysis,
    family: Family,
    arc: usize,
    j: i8,
    seg: usize,
    t: &Q,
) -> Result<(TorusDiagram, Analysis), MoveError> {
    if j != 1 && j != -1 {
        return Err(MoveError::InvalidAnchor("j must be +1 or -1".into()));
    }
    let g = global_arc(diagram, family, arc)?;
    let the_arc = &diagram.arcs[g];
    if seg >= the_arc.segment_count() {
        return Err(MoveError::InvalidAnchor(format!(
            "segment {seg} out of range"
        )));
    }
    if !(t > &Q::zero() && t < &Q::one()) {
        return Err(MoveError::InvalidAnchor("t must be interior".into()));
    }
    let segment = the_arc.segment(seg);
    let lambda = family.lambda();
    let framing_before =
        before.writhes[lambda - 1] + before.decomp[lambda - 1].p * before.decomp[lambda - 1].q;

    const ATTEMPTS: i64 = 16;
    for attempt in 0..ATTEMPTS {
        let room = if t < &q(1, 2) { t.clone() } else { qi(1) - t };
        let gap = room / qi(3 + attempt);
        let t1 = t - &gap;
        let t2 = t + &gap;
        let exit = segment.at(&t1);
        let entry = segment.at(&t2);
        let r_exit = the_arc.depth_at(seg, &t1);
        let r_entry = the_arc.depth_at(seg, &t2);
        let (u0, v0) = family.local_point(&exit);
        let (mut u1, v1) = family.local_point(&entry);
        u1 += qi(j as i64);
        // Depth excursion toward the core along the loop.
        let r_min = if r_exit < r_entry {
            r_exit.clone()
        } else {
            r_entry.clone()
        };
        let dips = [
            &r_min * q(2, 5 + attempt),
            &r_min * q(1, 7 + attempt),
            &r_min * q(2, 7 + attempt),
        ];

        // The loop placement fixes the class shift but not the surface
        // framing: the canonical stabilization keeps w + pq for this
        // family's chain unchanged. Build the plain loop first, measure
        // the framing defect, and absorb it with compensating kinks in
        // the loop (the two affected chains always carry opposite
        // defects, so one kink per unit corrects both).
        let mut kinks: i64 = 0;
        let mut kink_over_first = false;
        for _round in 0..2 {
            let mut verts: Vec<ArcVertex> = the_arc.vertices[..=seg].to_vec();
            verts.push(ArcVertex::new(exit.clone(), r_exit.clone()));
            let local_at = |frac: &Q| -> (Q, Q) {
                (&u0 + (&u1 - &u0) * frac, &v0 + (&v1 - &v0) * frac)
            };
            let push_local = |verts: &mut Vec<ArcVertex>, u: &Q, v: &Q, depth: Q| {
                verts.push(ArcVertex::new(family.absolute_from_local(u, v), depth));
            };
            let (ua, va) = local_at(&q(1, 4));
            push_local(&mut verts, &ua, &va, dips[0].clone());
            if kinks > 0 {
                // Kink template in the frame (D, n) of the loop's middle
                // segment: offsets (4,1), (2,3), (3,-1), (8,0) scaled by h;
                // exactly one transverse self-crossing between the first
                // and third template segments, whose over/under is set by
                // the two depth levels.
                let (ub, vb) = local_at(&q(1, 2));
                let du = (&ub - &ua) / qi(10 * kinks + 10);
                let dv = (&vb - &va) / qi(10 * kinks + 10);
                let (nu, nv) = (-dv.clone(), du.clone());
                let (da, db) = if kink_over_first {
                    (&r_min * q(3, 8 + attempt), &r_min * q(1, 4 + attempt))
                } else {
                    (&r_min * q(1, 4 + attempt), &r_min * q(3, 8 + attempt))
                };
                for kk in 0..kinks {
                    let base_u = &ua + &du * qi(10 * kk + 1);
                    let base_v = &va + &dv * qi(10 * kk + 1);
                    let offs: [(i64, i64, &Q); 4] =
                        [(4, 1, &da), (2, 3, &db), (3, -1, &db), (8, 0, &da)];
                    for (cd, cn, depth) in offs {
                        let u = &base_u + &du * qi(cd) + &nu * qi(cn);
                        let v = &base_v + &dv * qi(cd) + &nv * qi(cn);
                        push_local(&mut verts, &u, &v, (*depth).clone());
                    }
                }
            }
            let (ub, vb) = local_at(&q(1, 2));
            push_local(&mut verts, &ub, &vb, dips[1].clone());
            let (uc, vc) = local_at(&q(3, 4));
            push_local(&mut verts, &uc, &vc, dips[2].clone());
            let shift = family.alpha_vec();
            let shift = Vec2Q::new(&shift.x * qi(j as i64), &shift.y * qi(j as i64));
            verts.push(ArcVertex::new(
                entry.translate(&shift.x, &shift.y),
                r_entry.clone(),
            ));
            for v in &the_arc.vertices[seg + 1..] {
                verts.push(ArcVertex::new(
                    v.point.translate(&shift.x, &shift.y),
                    v.depth.clone(),
                ));
            }
            let mut cand = diagram.clone();
            cand.arcs[g] = TangleArc::new(family, verts);
            let Ok(after) = Analysis::new(&cand) else {
                break; // invalid; retry with a different clearance
            };
            let framing_after = after.writhes[lambda - 1]
                + after.decomp[lambda - 1].p * after.decomp[lambda - 1].q;
            let defect = framing_after - framing_before;
            if defect == 0 {
                return Ok((cand, after));
            }
            if kinks > 0 {
                break; // correction was mis-sized; retry geometry
            }
            // One kink contributes its crossing sign to this chain's
            // writhe; choose the sign opposite to the defect.
            kinks = defect.abs();
            // Crossing sign with the first template strand over is -1
            // (the template determinant is negative), so a positive
            // defect needs first-over kinks.
            kink_over_first = defect > 0;
        }
    }
    Err(MoveError::InvalidAnchor(format!(
        "no clear braid anchor on {family}{arc} segment {seg}"
    )))
}

/// Mini bridge stabilization: split an arc of the family at an interior
/// crossing-free point, adding two bridge points of opposite sign and one
/// short new arc to each of the other two families. Increases `b` by one
/// and the component count of `K_{lambda+1}` by one; all shadow classes,
/// the degree and the Euler characteristic are unchanged.
pub fn mini_stabilize(
    diagram: &TorusDiagram,
    family: Family,
    arc: usize,
    seg: usize,
    t: &Q,
    mirrored: bool,
) -> Result<TorusDiagram, MoveError> {
    mini_stabilize_analyzed(diagram, family, arc, seg, t, mirrored).map(|(d, _)| d)
}

/// [`mini_stabilize`] also returning the analysis of the result.
pub fn mini_stabilize_analyzed(
    diagram: &TorusDiagram,
    family: Family,
    arc: usize,
    seg: usize,
    t: &Q,
    mirrored: bool,
) -> Result<(TorusDiagram, Analysis), MoveError> {
    let g = global_arc(diagram, family, arc)?;
    let the_arc = &diagram.arcs[g];
    if seg >= the_arc.segment_count() {
        return Err(MoveError::InvalidAnchor(format!(
            "segment {seg} out of range"
        )));
    }
    if !(t > &Q::zero() && t < &Q::one()) {
        return Err(MoveError::InvalidAnchor("t must be interior".into()));
    }
    let segment = the_arc.segment(seg);
    const ATTEMPTS: i64 = 16;
    for attempt in 0..ATTEMPTS {
        let room = if t < &q(1, 2) { t.clone() } else { qi(1) - t };
        let gap = room / qi(5 + 2 * attempt);
        let (tq1, tp, tm, tq2) = (t - &gap - &gap, t - &gap, t + &gap, t + &gap + &gap);
        let w_plus = segment.at(&tp);
        let w_minus = segment.at(&tm);
        let guard1 = ArcVertex::new(segment.at(&tq1), the_arc.depth_at(seg, &tq1));
        let guard2 = ArcVertex::new(segment.at(&tq2), the_arc.depth_at(seg, &tq2));

        let mut piece1: Vec<ArcVertex> = the_arc.vertices[..=seg].to_vec();
        piece1.push(guard1);
        piece1.push(ArcVertex::new(w_plus.clone(), qi(1)));
        let mut piece2: Vec<ArcVertex> = vec![ArcVertex::new(w_minus.clone(), qi(1)), guard2];
        piece2.extend_from_slice(&the_arc.vertices[seg + 1..]);

        // Bows for the two new arcs, on opposite sides of the removed
        // piece. The perpendicular is taken in the split family's local
        // chart; offsets below 1/4 resp. 1/6 of the gap keep the new arcs
        // geometrically transverse when the split segment has local slope
        // above 1.
        let dir = Vec2Q::between(&w_minus, &w_plus);
        let (du, dv) = family.local_displacement(&dir);
        let perp_abs = family.absolute_from_local(&-&dv, &du);
        let mut perp = Vec2Q::new(perp_abs.x, perp_abs.y);
        if mirrored {
            perp = perp.neg();
        }
        let eta_next = q(1, 5 + attempt);
        let eta_prev = q(1, 7 + attempt);
        let mid = CoverPoint::new(
            (&w_minus.x + &w_plus.x) / qi(2),
            (&w_minus.y + &w_plus.y) / qi(2),
        );
        let bow_next = CoverPoint::new(&mid.x + &perp.x * &eta_next, &mid.y + &perp.y * &eta_next);
        let bow_prev = CoverPoint::new(&mid.x - &perp.x * &eta_prev, &mid.y - &perp.y * &eta_prev);
        let arc_next = TangleArc::new(
            family.next(),
            vec![
                ArcVertex::new(w_minus.clone(), qi(1)),
                ArcVertex::new(bow_next, q(1, 2) + q(1, 9 + attempt)),
                ArcVertex::new(w_plus.clone(), qi(1)),
            ],
        );
        let arc_prev = TangleArc::new(
            family.prev(),
            vec![
                ArcVertex::new(w_minus.clone(), qi(1)),
                ArcVertex::new(bow_prev, q(1, 2) - q(1, 9 + attempt)),
                ArcVertex::new(w_plus.clone(), qi(1)),
            ],
        );

        let mut cand = diagram.clone();
        let id0 = next_bridge_id(&cand);
        cand.bridge_points.push(BridgePoint {
            id: format!("v{id0}"),
            position: w_plus.reduced(),
            sigma: 1,
        });
        cand.bridge_points.push(BridgePoint {
            id: format!("v{}", id0 + 1),
            position: w_minus.reduced(),
            sigma: -1,
        });
        cand.arcs[g] = TangleArc::new(family, piece1);
        cand.arcs.push(TangleArc::new(family, piece2));
        cand.arcs.push(arc_next);
        cand.arcs.push(arc_prev);
        if let Ok(after) = Analysis::new(&cand) {
            return Ok((cand, after));
        }
    }
    Err(MoveError::InvalidAnchor(format!(
        "no clear mini-stabilization anchor on {family}{arc} segment {seg}"
    )))
}

/// Rigid translation of one arc; `family` must be `A` (vertical moves) or
/// `B` (horizontal moves). Each other arc incident to a moved bridge point
/// is extended by a connector at a fresh depth: a single axis-parallel
/// segment for short moves, a shallow two-segment tent for longer ones
/// (the tent keeps the shadow immersed when the move wraps the torus).
fn translate_arc_impl(
    diagram: &TorusDiagram,
    family: Family,
    arc: usize,
    amount: &Q,
) -> Result<(TorusDiagram, Analysis), MoveError> {
    let g = global_arc(diagram, family, arc)?;
    if amount.is_zero() {
        let a = Analysis::new(diagram)
            .map_err(|e| MoveError::InvalidAnchor(format!("start diagram: {e}")))?;
        return Ok((diagram.clone(), a));
    }
    let delta = match family {
        Family::A => Vec2Q::new(Q::zero(), amount.clone()),
        Family::B => Vec2Q::new(amount.clone(), Q::zero()),
        Family::C => {
            return Err(MoveError::InvalidAnchor(
                "translations apply to A (vertical) and B (horizontal) arcs".into(),
            ))
        }
    };
    let inc = diagram.incidences()?;
    let moved_arc = &diagram.arcs[g];
    let tail_bridge = diagram
        .bridge_at(&moved_arc.first().point.reduced())
        .ok_or_else(|| MoveError::InvalidAnchor("arc endpoint off bridge".into()))?;
    let head_bridge = diagram
        .bridge_at(&moved_arc.last().point.reduced())
        .ok_or_else(|| MoveError::InvalidAnchor("arc endpoint off bridge".into()))?;

    const ATTEMPTS: i64 = 16;
    let mut last_report = String::new();
    for attempt in 0..ATTEMPTS {
        let mut cand = diagram.clone();
        // Move the arc and its two bridge points.
        for v in cand.arcs[g].vertices.iter_mut() {
            v.point = v.point.translate(&delta.x, &delta.y);
        }
        for bi in [tail_bridge, head_bridge] {
            let p = &cand.bridge_points[bi].position;
            cand.bridge_points[bi].position = p.translate(&delta.x, &delta.y).reduced();
        }
        // Extend every other incident arc by a connector. The demoted old
        // endpoint is nudged off the old bridge position (per-family
        // offsets, so the two connectors at a bridge stay disjoint); the
        // nudge is interior, so no arc integral changes.
        let mut fresh = 0i64;
        for bi in [tail_bridge, head_bridge] {
            for f in Family::ALL {
                if f == family {
                    continue;
                }
                let (local, is_head) = inc.per_bridge[bi][f.lambda() - 1];
                let g2 = diagram.family_arcs(f)[local];
                let depth = qi(1) - q(1, 5 + fresh * 2 + attempt);
                let kappa = q(1, 97 + 13 * attempt) / qi(fresh + 1);
                let nudge = Vec2Q::new(
                    &kappa * qi(f.lambda() as i64),
                    &kappa * q(f.lambda() as i64 + 2, 3),
                );
                fresh += 1;
                let arcv = &mut cand.arcs[g2].vertices;
                if is_head {
                    let old = arcv.last().unwrap().point.clone();
                    let last = arcv.last_mut().unwrap();
                    last.depth = depth;
                    last.point = old.translate(&nudge.x, &nudge.y);
                    arcv.push(ArcVertex::new(old.translate(&delta.x, &delta.y), qi(1)));
                } else {
                    let old = arcv.first().unwrap().point.clone();
                    let first = arcv.first_mut().unwrap();
                    first.depth = depth;
                    first.point = old.translate(&nudge.x, &nudge.y);
                    let mut pre = vec![ArcVertex::new(old.translate(&delta.x, &delta.y), qi(1))];
                    pre.extend(arcv.iter().cloned());
                    *arcv = pre;
                }
            }
        }
        match Analysis::new(&cand) {
            Ok(after) => return Ok((cand, after)),
            Err(e) => last_report = e.to_string(),
        }
    }
    Err(MoveError::CollisionUnresolvable(format!(
        "translation of {family}{arc} by {amount} cannot be routed; last attempt:\n{last_report}"
    )))
}

pub fn translate_a(diagram: &TorusDiagram, arc: usize, dy: &Q) -> Result<TorusDiagram, MoveError> {
    translate_arc_impl(diagram, Family::A, arc, dy).map(|(d, _)| d)
}

pub fn translate_b(diagram: &TorusDiagram, arc: usize, dx: &Q) -> Result<TorusDiagram, MoveError> {
    translate_arc_impl(diagram, Family::B, arc, dx).map(|(d, _)| d)
}

/// Apply one move.
pub fn apply_move(diagram: &TorusDiagram, mv: &Move) -> Result<TorusDiagram, MoveError> {
    apply_move_analyzed(diagram, None, mv).map(|(d, _)| d)
}

/// Apply one move, reusing a precomputed analysis of the input when given,
/// and returning the analysis of the result (every move computes it anyway
/// while validating its candidate geometry).
pub fn apply_move_analyzed(
    diagram: &TorusDiagram,
    before: Option<&Analysis>,
    mv: &Move,
) -> Result<(TorusDiagram, Analysis), MoveError> {
    match mv {
        Move::BraidStab {
            family,
            arc,
            j,
            seg,
            t,
        } => match before {
            Some(a) => braid_stabilize_analyzed(diagram, a, *family, *arc, *j, *seg, t),
            None => {
                let a = Analysis::new(diagram)
                    .map_err(|e| MoveError::InvalidAnchor(format!("start diagram: {e}")))?;
                braid_stabilize_analyzed(diagram, &a, *family, *arc, *j, *seg, t)
            }
        },
        Move::MiniStab {
            family,
            arc,
            seg,
            t,
            mirrored,
        } => mini_stabilize_analyzed(diagram, *family, *arc, *seg, t, *mirrored),
        Move::TranslateA { arc, dy } => translate_arc_impl(diagram, Family::A, *arc, dy),
        Move::TranslateB { arc, dx } => translate_arc_impl(diagram, Family::B, *arc, dx),
    }
}

/// Invariants recorded after each step of a move sequence.
#[derive(Clone, Debug)]
pub struct StepReport {
    pub step: usize,
    pub degree: i64,
    pub b: usize,
    pub c: [usize; 3],
    pub chi: i64,
    pub framing_residual: i64,
    pub pqr: (i64, i64, i64),
}

/// Apply moves in order, re-validating and re-checking the conserved
/// quantities (degree, framing residual, sigma balance) after every step.
/// On a conservation failure the error reports the minimal failing prefix.
pub fn apply_sequence(
    diagram: &TorusDiagram,
    moves: &[Move],
) -> Result<(TorusDiagram, Vec<StepReport>), MoveError> {
    let start = Analysis::new(diagram)
        .map_err(|e| MoveError::InvalidAnchor(format!("start diagram: {e}")))?;
    let mut current = diagram.clone();
    let mut analysis = start.clone();
    let mut reports = Vec::with_capacity(moves.len());
    for (step, mv) in moves.iter().enumerate() {
        let (next, a) =
            apply_move_analyzed(&current, Some(&analysis), mv).map_err(|e| MoveError::Step {
                step,
                source: Box::new(e),
            })?;
        current = next;
        if a.degree != start.degree {
            return Err(MoveError::Conservation {
                step,
                detail: format!("degree changed {} -> {}", start.degree, a.degree),
                prefix_len: step + 1,
            });
        }
        if a.framing_residual() != 0 {
            return Err(MoveError::Conservation {
                step,
                detail: format!("framing residual {}", a.framing_residual()),
                prefix_len: step + 1,
            });
        }
        if a.sigma_sum != 0 {
            return Err(MoveError::Conservation {
                step,
                detail: format!("sigma sum {}", a.sigma_sum),
                prefix_len: step + 1,
            });
        }
        reports.push(StepReport {
            step,
            degree: a.degree,
            b: a.b,
            c: a.c,
            chi: a.chi,
            framing_residual: a.framing_residual(),
            pqr: a.pqr,
        });
        analysis = a;
    }
    Ok((current, reports))
}

fn letters(diagram: &TorusDiagram) -> Result<(i64, i64, i64), MoveError> {
    let mut p = [0i64; 3];
    for lambda in 1..=3 {
        let class = diagram
            .chain_class(lambda)
            .ok_or_else(|| MoveError::InvalidAnchor("non-integral class".into()))?;
        p[lambda - 1] = decompose(lambda, class).p;
    }
    Ok((p[0], p[1], p[2]))
}

/// Braid-stabilize until the degree-freedom letters equal `(p, q, r)`.
/// Returns the stabilized diagram and the move script used.
pub fn stabilize_to_classes(
    diagram: &TorusDiagram,
    target: (i64, i64, i64),
) -> Result<(TorusDiagram, Vec<Move>), MoveError> {
    diagram.require_valid()?;
    let mut current = diagram.clone();
    let mut script = Vec::new();
    let (p0, q0, r0) = letters(&current)?;
    let deltas = [target.0 - p0, target.1 - q0, target.2 - r0];
    for (fi, family) in Family::ALL.into_iter().enumerate() {
        let delta = deltas[fi];
        let j: i8 = if delta >= 0 { 1 } else { -1 };
        for _ in 0..delta.abs() {
            let mv = find_braid_anchor(&current, family, j)?;
            current = apply_move(&current, &mv)?;
            script.push(mv);
        }
    }
    debug_assert_eq!(letters(&current)?, target);
    Ok((current, script))
}

/// First braid anchor on the family that produces a valid diagram.
fn find_braid_anchor(
    diagram: &TorusDiagram,
    family: Family,
    j: i8,
) -> Result<Move, MoveError> {
    let n_arcs = diagram.family_arcs(family).len();
    for arc in 0..n_arcs {
        let the_arc = diagram.arc(family, arc).unwrap();
        for seg in 0..the_arc.segment_count() {
            for t in [q(1, 2), q(3, 8), q(5, 8), q(1, 4), q(3, 4)] {
                let mv = Move::BraidStab {
                    family,
                    arc,
                    j,
                    seg,
                    t: t.clone(),
                };
                if apply_move(diagram, &mv).is_ok() {
                    return Ok(mv);
                }
            }
        }
    }
    Err(MoveError::InvalidAnchor(format!(
        "no braid anchor available in family {family}"
    )))
}

/// Generate a deterministic random move script of at most `max_len` moves
/// that applies cleanly to `diagram`, returning the script and the final
/// diagram. Candidate moves that fail to apply are skipped.
pub fn random_script(
    diagram: &TorusDiagram,
    seed: u64,
    max_len: usize,
) -> Result<(Vec<Move>, TorusDiagram), MoveError> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut current = diagram.clone();
    let mut script = Vec::new();
    let mut budget = max_len * 6;
    while script.len() < max_len && budget > 0 {
        budget -= 1;
        let family = Family::ALL[rng.gen_range(0..3)];
        let n_arcs = current.family_arcs(family).len();
        if n_arcs == 0 {
            continue;
        }
        let arc = rng.gen_range(0..n_arcs);
        let kind = rng.gen_range(0..10);
        let mv = if kind < 5 {
            let the_arc = current.arc(family, arc).unwrap();
            let seg = rng.gen_range(0..the_arc.segment_count());
            let t = q(rng.gen_range(2..=6), 8);
            Move::BraidStab {
                family,
                arc,
                j: if rng.gen_bool(0.5) { 1 } else { -1 },
                seg,
                t,
            }
        } else if kind < 8 {
            let the_arc = current.arc(family, arc).unwrap();
            let seg = rng.gen_range(0..the_arc.segment_count());
            let t = q(rng.gen_range(2..=6), 8);
            Move::MiniStab {
                family,
                arc,
                seg,
                t,
                mirrored: rng.gen_bool(0.5),
            }
        } else {
            let amount = q(rng.gen_range(-12..=12), 8);
            if amount.is_zero() {
                continue;
            }
            match family {
                Family::A => Move::TranslateA { arc, dy: amount },
                Family::B => Move::TranslateB { arc, dx: amount },
                Family::C => continue,
            }
        };
        if let Ok((next, _)) = apply_move_analyzed(&current, None, &mv) {
            current = next;
            script.push(mv);
        }
    }
    Ok((script, current))
}
