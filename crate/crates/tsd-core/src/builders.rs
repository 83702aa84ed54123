//! Constructors for reference diagrams.
//!
//! The complex-line diagram is exact: in turn coordinates the shadow of the
//! line `z1 + z2 + z3 = 0` is piecewise linear (two slope-1/2 shoulders in
//! each solid torus's local chart joined by a fast sweep past the core), so
//! no numerical approximation is involved beyond choosing the sweep width.

use crate::diagram::{ArcVertex, BridgePoint, DiagramError, Family, TangleArc, TorusDiagram};
use crate::kernel::CoverPoint;
use crate::rat::{q, qi, Q};
use thiserror::Error;

#[derive(Debug, Error, Clone)]
pub enum BuilderError {
    #[error("invalid builder parameters: {0}")]
    InvalidParameters(String),
    #[error("payload incompatible with homology constraints: {0}")]
    IncompatiblePayload(String),
    #[error(transparent)]
    Diagram(#[from] DiagramError),
}

/// What to build, plus the PL resolution (vertices per arc, at least 3).
#[derive(Clone, Debug)]
pub struct BuilderSpec {
    pub kind: BuilderKind,
    pub resolution: usize,
}

#[derive(Clone, Debug)]
pub enum BuilderKind {
    ComplexLine,
    GenericLines(usize),
    Standardized(usize, usize, StandardizedPayload),
}

impl BuilderSpec {
    pub fn build(&self) -> Result<TorusDiagram, BuilderError> {
        if self.resolution < 3 {
            return Err(BuilderError::InvalidParameters(
                "resolution must be at least 3".into(),
            ));
        }
        match &self.kind {
            BuilderKind::ComplexLine => Ok(complex_line_with_resolution(self.resolution)),
            BuilderKind::GenericLines(d) => generic_lines(*d),
            BuilderKind::Standardized(c1, d, payload) => standardized(*c1, *d, payload.clone()),
        }
    }
}

/// Half-height (in turns) of the sweep window where an arc passes the core.
fn sweep_delta() -> Q {
    q(1, 24)
}

/// The tangle of one solid torus in its local chart `(u, v)`:
/// shoulders of slope 1/2 through the bridge points at local `(2/3, 1/3)`
/// and `(4/3, 2/3)`, and a sweep segment carrying the strand past the core
/// (depth dips to its minimum there). `extra` subdivides each shoulder.
fn line_local_vertices(extra: usize) -> Vec<(Q, Q, Q)> {
    let delta = sweep_delta();
    let third = q(1, 3);
    let half = q(1, 2);
    // Depth on the shoulders: linear in |v - 1/2|, 1 at the bridge, 1/4 at
    // the sweep boundary.
    let shoulder_depth = |v: &Q| -> Q {
        let dist = if *v < half { &half - v } else { v - &half };
        q(1, 4) + qi(6) * (dist - q(1, 24))
    };
    let lower_u = |v: &Q| q(3, 4) + (v - &half) / qi(2);
    let upper_u = |v: &Q| q(5, 4) + (v - &half) / qi(2);

    let mut verts: Vec<(Q, Q, Q)> = Vec::new();
    // Lower shoulder: v from 1/3 to 1/2 - delta.
    let v_lo_end = &half - &delta;
    let steps = extra + 1;
    for k in 0..=steps {
        let t = q(k as i64, steps as i64);
        let v = &third + (&v_lo_end - &third) * &t;
        let u = lower_u(&v);
        let depth = if k == 0 { qi(1) } else { shoulder_depth(&v) };
        verts.push((u, v, depth));
    }
    // Sweep midpoint at (1, 1/2), deepest point.
    verts.push((qi(1), half.clone(), q(1, 8)));
    // Upper shoulder: v from 1/2 + delta to 2/3.
    let v_hi_start = &half + &delta;
    let two_thirds = q(2, 3);
    for k in 0..=steps {
        let t = q(k as i64, steps as i64);
        let v = &v_hi_start + (&two_thirds - &v_hi_start) * &t;
        let u = upper_u(&v);
        let depth = if k == steps { qi(1) } else { shoulder_depth(&v) };
        verts.push((u, v, depth));
    }
    verts
}

/// PL diagram of the projective line `z1 + z2 + z3 = 0`: one arc per
/// family, bridge points at `(1/3, 2/3)` (positive) and `(2/3, 1/3)`
/// (negative), degree 1, no crossings, and all transversality predicates
/// satisfied.
pub fn complex_line() -> TorusDiagram {
    complex_line_with_resolution(5)
}

/// Same with `resolution >= 3` vertices per arc (extra vertices subdivide
/// the shoulders; the exact slopes keep every predicate intact).
pub fn complex_line_with_resolution(resolution: usize) -> TorusDiagram {
    assert!(resolution >= 3, "resolution must be at least 3");
    let extra = resolution.saturating_sub(5) / 2;
    let local = line_local_vertices(extra);
    let bridge_points = vec![
        BridgePoint {
            id: "v0".into(),
            position: CoverPoint::new(q(1, 3), q(2, 3)),
            sigma: 1,
        },
        BridgePoint {
            id: "v1".into(),
            position: CoverPoint::new(q(2, 3), q(1, 3)),
            sigma: -1,
        },
    ];
    let arcs = Family::ALL
        .iter()
        .map(|&fam| {
            let vertices = local
                .iter()
                .map(|(u, v, depth)| ArcVertex::new(fam.absolute_from_local(u, v), depth.clone()))
                .collect();
            TangleArc::new(fam, vertices)
        })
        .collect();
    TorusDiagram::new(bridge_points, arcs, true)
}

/// Translate a whole diagram rigidly by `(dx, dy)`, relabelling bridge ids
/// with the given offset.
fn translated(d: &TorusDiagram, dx: &Q, dy: &Q, id_offset: usize) -> TorusDiagram {
    let bridge_points = d
        .bridge_points
        .iter()
        .enumerate()
        .map(|(i, b)| BridgePoint {
            id: format!("v{}", id_offset + i),
            position: b.position.translate(dx, dy).reduced(),
            sigma: b.sigma,
        })
        .collect();
    let arcs = d
        .arcs
        .iter()
        .map(|a| {
            TangleArc::new(
                a.family,
                a.vertices
                    .iter()
                    .map(|v| ArcVertex::new(v.point.translate(dx, dy), v.depth.clone()))
                    .collect(),
            )
        })
        .collect();
    TorusDiagram::new(bridge_points, arcs, d.asserted_bridge_position)
}

/// `d` rotated copies of the line as one immersed diagram: degree `d`,
/// `b = d`, `c_lambda = d`, Euler characteristic `2d`. Copy offsets are
/// chosen so that the shadows stay mutually transverse and the pull-tight
/// classifier sees no clasp at any copy-pair strip crossing.
pub fn generic_lines(d: usize) -> Result<TorusDiagram, BuilderError> {
    if d == 0 {
        return Err(BuilderError::InvalidParameters("d must be at least 1".into()));
    }
    let base = complex_line();
    if d == 1 {
        return Ok(base);
    }
    // Offset direction: x-step strictly between nu*W and nu*W/(1-nu) where
    // nu = 2/13 is the sweep slope; 24/143 sits in the middle. This keeps
    // translated strip crossings inside the no-obstruction window in all
    // three local charts.
    for halving in 0..6 {
        let w_step = q(1, (16 * d as i64) << halving);
        let dx = q(24, 143) * &w_step;
        let dy = -&w_step;
        let mut out = TorusDiagram::empty();
        out.asserted_bridge_position = true;
        for k in 0..d {
            let kx = &dx * qi(k as i64);
            let ky = &dy * qi(k as i64);
            let copy = translated(&base, &kx, &ky, 2 * k);
            out.bridge_points.extend(copy.bridge_points);
            out.arcs.extend(copy.arcs);
        }
        // Keep families grouped for stable family-local indexing.
        out.arcs.sort_by_key(|a| a.family);
        if out.validate().is_empty() {
            return Ok(out);
        }
    }
    Err(BuilderError::Diagram(DiagramError::PerturbationFailed {
        attempts: 6,
    }))
}

/// Per-arc data for the standardized builder's `C` family.
#[derive(Clone, Debug)]
pub struct StandardizedPayload {
    /// Number of bridge arcs in each of the `c1` annuli; sum is `b`.
    pub annulus_sizes: Vec<usize>,
    /// Integer x-windings of the `C` arcs (must sum to `-c1`).
    pub x_windings: Vec<i64>,
    /// Integer y-windings of the `C` arcs (must sum to `-d`).
    pub y_windings: Vec<i64>,
}

impl StandardizedPayload {
    /// Default payload with `b = max(c1, d)` arcs: one `-1` x-winding per
    /// annulus, y-windings spreading `-d` over the first arcs.
    pub fn default_for(c1: usize, d: usize) -> Self {
        let b = c1.max(d).max(1);
        let mut annulus_sizes = vec![b / c1; c1];
        for i in 0..(b % c1) {
            annulus_sizes[i] += 1;
        }
        let mut x_windings = vec![0i64; b];
        let mut idx = 0;
        for &m in &annulus_sizes {
            x_windings[idx] = -1;
            idx += m;
        }
        let mut y_windings = vec![0i64; b];
        for k in 0..d {
            y_windings[k % b] -= 1;
        }
        StandardizedPayload {
            annulus_sizes,
            x_windings,
            y_windings,
        }
    }
}

/// A diagram standardized with respect to `K_1`: the chain `S(K_1)` is
/// embedded as `c1` parallel circles of class `[alpha]` in disjoint thin
/// annuli, the `B` arcs have slope -1 and nested projections, and the `C`
/// arcs realize the class constraints
/// `[S(K_1)] = c1 [alpha]`, `[S(K_2)] = d [beta]`,
/// `[S(K_3)] = d [gamma] + (d - c1) [alpha]`
/// with per-arc windings taken from the payload.
pub fn standardized(
    c1: usize,
    d: usize,
    payload: StandardizedPayload,
) -> Result<TorusDiagram, BuilderError> {
    if c1 == 0 || d == 0 {
        return Err(BuilderError::InvalidParameters(
            "need c1 >= 1 and d >= 1".into(),
        ));
    }
    if payload.annulus_sizes.len() != c1 {
        return Err(BuilderError::IncompatiblePayload(format!(
            "expected {c1} annulus sizes, got {}",
            payload.annulus_sizes.len()
        )));
    }
    if payload.annulus_sizes.iter().any(|&m| m == 0) {
        return Err(BuilderError::IncompatiblePayload("empty annulus".into()));
    }
    let b: usize = payload.annulus_sizes.iter().sum();
    if payload.x_windings.len() != b || payload.y_windings.len() != b {
        return Err(BuilderError::IncompatiblePayload(format!(
            "expected {b} windings per axis"
        )));
    }
    if payload.x_windings.iter().sum::<i64>() != -(c1 as i64) {
        return Err(BuilderError::IncompatiblePayload(
            "x-windings must sum to -c1".into(),
        ));
    }
    if payload.y_windings.iter().sum::<i64>() != -(d as i64) {
        return Err(BuilderError::IncompatiblePayload(
            "y-windings must sum to -d".into(),
        ));
    }

    let m_max = *payload.annulus_sizes.iter().max().unwrap() as i64;
    let mut last_report = None;
    for attempt in 0..8i64 {
        // B width u: small against the circle spacing; Gamma = d - (5/2) b u
        // stays well above 0.
        let u = {
            let geom = q(1, 8 * m_max * (3 * m_max + 2));
            let gamma_bound = q(d as i64, 10 * b as i64);
            let base = if geom < gamma_bound { geom } else { gamma_bound };
            base / qi(1 + attempt)
        };
        let s = q(3, 2) * &u; // tail stagger
        let x_jit = q(1, 4 * b as i64 + 3) / qi(attempt + 1);
        let c_gam = &u / qi(3) + q(attempt + 1, 997);

        match build_standardized(c1, d, &payload, &u, &s, &x_jit, &c_gam) {
            Ok(diag) => {
                let report = diag.validate();
                if report.is_empty() {
                    return Ok(diag);
                }
                last_report = Some(report);
            }
            Err(_) => continue,
        }
    }
    Err(match last_report {
        Some(report) => BuilderError::Diagram(DiagramError::Invalid(report)),
        None => BuilderError::Diagram(DiagramError::PerturbationFailed { attempts: 8 }),
    })
}

#[allow(clippy::too_many_arguments)]
fn build_standardized(
    c1: usize,
    d: usize,
    payload: &StandardizedPayload,
    u: &Q,
    s: &Q,
    x_jit: &Q,
    c_gam: &Q,
) -> Result<TorusDiagram, BuilderError> {
    let _ = d;
    let mut bridge_points = Vec::new();
    let mut a_arcs = Vec::new();
    let mut b_arcs = Vec::new();
    let mut c_arcs = Vec::new();
    // Global C-arc order: annulus by annulus, arc by arc.
    let mut tails: Vec<CoverPoint> = Vec::new();
    let mut heads: Vec<CoverPoint> = Vec::new();
    let mut arc_counter = 0usize;
    let total_b: usize = payload.annulus_sizes.iter().sum();

    for (ai, &m) in payload.annulus_sizes.iter().enumerate() {
        let mi = m as i64;
        let y0 = q(ai as i64, c1 as i64);
        let x0 = x_jit * qi(ai as i64);
        let u_wrap = qi(mi) * s + u; // wrap B width keeps slope -1 exact
        for j in 0..m {
            let ji = j as i64;
            let tail = CoverPoint::new(&x0 + q(ji, mi), &y0 + s * qi(ji));
            let head = if j + 1 < m {
                CoverPoint::new(&x0 + q(ji + 1, mi) - u, &y0 + s * qi(ji + 1) + u)
            } else {
                CoverPoint::new(&x0 + qi(1) - &u_wrap, &y0 + &u_wrap)
            };
            let rise_mid = (&head.y - &tail.y) / qi(2);
            let run_mid = (&head.x - &tail.x) / qi(2);
            // A arc: tail -> head with a mid-depth vertex.
            let depth_a = q(1, 2) + q((arc_counter as i64 % 7) + 1, 64);
            a_arcs.push(TangleArc::new(
                Family::A,
                vec![
                    ArcVertex::new(tail.clone(), qi(1)),
                    ArcVertex::new(
                        CoverPoint::new(&tail.x + &run_mid, &tail.y + &rise_mid),
                        depth_a,
                    ),
                    ArcVertex::new(head.clone(), qi(1)),
                ],
            ));
            // B arc: from the next tail to this head; slope exactly -1.
            let next_tail = if j + 1 < m {
                CoverPoint::new(&x0 + q(ji + 1, mi), &y0 + s * qi(ji + 1))
            } else {
                CoverPoint::new(&x0 + qi(1), y0.clone())
            };
            let width = if j + 1 < m { u.clone() } else { u_wrap.clone() };
            debug_assert_eq!(&next_tail.x - &head.x, width.clone());
            debug_assert_eq!(&head.y - &next_tail.y, width.clone());
            let depth_b = q(1, 2) - q((arc_counter as i64 % 5) + 1, 64);
            // Interior vertex off the exact midpoint (still on the slope -1
            // line) so no other arc's symmetric midline can hit it.
            let bmid = CoverPoint::new(
                &next_tail.x - &width * q(3, 7),
                &next_tail.y + &width * q(3, 7),
            );
            b_arcs.push(TangleArc::new(
                Family::B,
                vec![
                    ArcVertex::new(next_tail, qi(1)),
                    ArcVertex::new(bmid, depth_b),
                    ArcVertex::new(head.clone(), qi(1)),
                ],
            ));
            bridge_points.push(BridgePoint {
                id: format!("v{}", 2 * arc_counter),
                position: tail.reduced(),
                sigma: -1,
            });
            bridge_points.push(BridgePoint {
                id: format!("v{}", 2 * arc_counter + 1),
                position: head.reduced(),
                sigma: 1,
            });
            tails.push(tail);
            heads.push(head);
            arc_counter += 1;
        }
    }

    // C arcs: tail_j to a shifted head plus integer windings, routed
    // through two waypoints with per-arc depths. The shifted matching
    // keeps the arc-incidence graph (the spine) connected even when the
    // circles live in several annuli.
    for j in 0..total_b {
        let mate = (j + 1) % total_b;
        let target = heads[mate].shift(payload.x_windings[j], payload.y_windings[j]);
        let gam = c_gam + q(j as i64, 1024 * total_b as i64);
        // Asymmetric waypoint offsets keep the long middle segment's
        // midpoint away from lattice translates of other vertices.
        let gam2 = &gam * q(5, 7);
        let w1 = CoverPoint::new(&tails[j].x + &gam, &tails[j].y - qi(2) * &gam);
        let w2 = CoverPoint::new(&target.x - &gam2, &target.y + qi(2) * &gam2);
        let depth = q((2 * j as i64 + 3) % (4 * total_b as i64 + 5) + 1, 4 * total_b as i64 + 8);
        let depth2 = &depth + q(1, 16 * total_b as i64 + 17);
        c_arcs.push(TangleArc::new(
            Family::C,
            vec![
                ArcVertex::new(tails[j].clone(), qi(1)),
                ArcVertex::new(w1, depth),
                ArcVertex::new(w2, depth2),
                ArcVertex::new(target, qi(1)),
            ],
        ));
    }

    let mut arcs = a_arcs;
    arcs.extend(b_arcs);
    arcs.extend(c_arcs);
    Ok(TorusDiagram::new(bridge_points, arcs, true))
}

/// A two-bridge diagram whose `A` family is a clasp: one straight
/// geometrically transverse arc, and one braided, algebraically transverse
/// arc that winds `winding` extra turns in the foliation direction before
/// descending, so it cannot be pulled straight without passing through the
/// first arc. The `B` and `C` arcs are straight connectors, so every strip
/// crossing outside the clasp is obstruction-free.
fn clasp_diagram(winding: i64) -> Result<TorusDiagram, BuilderError> {
    assert!(winding >= 1);
    let bridge_points = vec![
        BridgePoint {
            id: "v0".into(),
            position: CoverPoint::new(qi(0), qi(0)),
            sigma: -1,
        },
        BridgePoint {
            id: "v1".into(),
            position: CoverPoint::new(q(1, 2), q(1, 2)),
            sigma: 1,
        },
        BridgePoint {
            id: "v2".into(),
            position: CoverPoint::new(q(9, 32), q(5, 8)),
            sigma: -1,
        },
        BridgePoint {
            id: "v3".into(),
            position: CoverPoint::new(q(17, 32), q(1, 8)),
            sigma: 1,
        },
    ];
    let pt = |xn: i64, xd: i64, yn: i64, yd: i64| CoverPoint::new(q(xn, xd), q(yn, yd));
    // Straight transverse arc with a depth dip.
    let a1 = TangleArc::new(
        Family::A,
        vec![
            ArcVertex::new(pt(0, 1, 0, 1), qi(1)),
            ArcVertex::new(pt(1, 8, 1, 8), q(3, 4)),
            ArcVertex::new(pt(11, 32, 11, 32), q(1, 4)),
            ArcVertex::new(pt(1, 2, 1, 2), qi(1)),
        ],
    );
    // The clasping arc: up `winding` turns while diving, then back down.
    let a2 = TangleArc::new(
        Family::A,
        vec![
            ArcVertex::new(pt(9, 32, 5, 8), qi(1)),
            ArcVertex::new(
                CoverPoint::new(q(13, 32), q(5, 8) + qi(winding)),
                q(1, 4),
            ),
            ArcVertex::new(pt(17, 32, 9, 8), qi(1)),
        ],
    );
    // Straight connectors; midpoints carry interior depths.
    let straight = |fam: Family, from: CoverPoint, to: CoverPoint, depth: Q| {
        let mid = CoverPoint::new((&from.x + &to.x) / qi(2), (&from.y + &to.y) / qi(2));
        TangleArc::new(
            fam,
            vec![
                ArcVertex::new(from, qi(1)),
                ArcVertex::new(mid, depth),
                ArcVertex::new(to, qi(1)),
            ],
        )
    };
    let b1 = straight(Family::B, pt(0, 1, 0, 1), pt(-1, 2, 1, 2), q(2, 5));
    let b2 = straight(Family::B, pt(9, 32, 5, 8), pt(-15, 32, 9, 8), q(3, 7));
    let c1 = straight(Family::C, pt(0, 1, 0, 1), pt(1, 2, -1, 2), q(4, 9));
    let c2 = straight(Family::C, pt(9, 32, 5, 8), pt(17, 32, 1, 8), q(5, 11));
    let diagram = TorusDiagram::new(bridge_points, vec![a1, a2, b1, b2, c1, c2], false);
    let report = diagram.validate();
    if !report.is_empty() {
        return Err(BuilderError::Diagram(DiagramError::Invalid(report)));
    }
    Ok(diagram)
}

/// The prototype clasp: pulling the winding arc tight requires exactly one
/// passage through the straight arc.
pub fn simple_clasp_gadget() -> Result<TorusDiagram, BuilderError> {
    clasp_diagram(1)
}

/// A compound clasp whose straightening disk meets the straight strand
/// three times (`k = 3`).
pub fn compound_clasp_gadget() -> Result<TorusDiagram, BuilderError> {
    clasp_diagram(4)
}

/// Standardized fixtures with at least one negative deficit entry, used by
/// the normalizer tests and the CLI examples. All shapes have `b >= 2`.
pub fn standardized_fixture(index: usize) -> Result<TorusDiagram, BuilderError> {
    let shapes: [(usize, usize); 7] = [
        (1, 2),
        (2, 2),
        (1, 3),
        (2, 3),
        (3, 3),
        (2, 4),
        (3, 4),
    ];
    let (c1, d) = shapes[index % shapes.len()];
    let variant = index / shapes.len();
    let mut payload = StandardizedPayload::default_for(c1, d);
    let b = payload.x_windings.len();
    // Force a negative deficit entry: push one arc's y-winding up and
    // compensate on another so the totals stay (-c1, -d).
    let hot = variant % b;
    let cold = (variant + 1) % b;
    payload.y_windings[hot] += 2 + (variant / b) as i64;
    payload.y_windings[cold] -= 2 + (variant / b) as i64;
    standardized(c1, d, payload)
}
