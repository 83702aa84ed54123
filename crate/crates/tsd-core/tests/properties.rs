//! Property tests for the kernel predicates and the structural invariants
//! of diagrams under moves.

use num_traits::Signed;
use proptest::prelude::*;
use tsd_core::builders::{
    complex_line, compound_clasp_gadget, generic_lines, simple_clasp_gadget,
};
use tsd_core::diagram::{Family, TorusDiagram};
use tsd_core::invariants::{decompose, Analysis};
use tsd_core::kernel::{
    cyclic_order_positive, intersection_pairing, segment_crossings, CoverPoint,
    HomologyClass, Segment, Vec2Q,
};
use tsd_core::moves::{apply_move, Move};
use tsd_core::rat::{q, qi, Q};
use tsd_core::transversality::pull_tight_classify;

fn rational(num: i64, den: u8) -> Q {
    q(num, den as i64 + 1)
}

fn point_strategy() -> impl Strategy<Value = CoverPoint> {
    ((-24i64..=24, 0u8..8), (-24i64..=24, 0u8..8))
        .prop_map(|((xn, xd), (yn, yd))| CoverPoint::new(rational(xn, xd), rational(yn, yd)))
}

fn segment_strategy() -> impl Strategy<Value = Segment> {
    (point_strategy(), point_strategy())
        .prop_filter("nondegenerate", |(a, b)| a != b)
        .prop_map(|(a, b)| Segment::new(a, b))
}

proptest! {
    #[test]
    fn pairing_is_antisymmetric_and_bilinear(a1 in -5i64..=5, b1 in -5i64..=5,
                                             a2 in -5i64..=5, b2 in -5i64..=5,
                                             a3 in -5i64..=5, b3 in -5i64..=5) {
        let h1 = HomologyClass::new(a1, b1);
        let h2 = HomologyClass::new(a2, b2);
        let h3 = HomologyClass::new(a3, b3);
        prop_assert_eq!(intersection_pairing(h1, h2), -intersection_pairing(h2, h1));
        let sum = HomologyClass::new(a1 + a2, b1 + b2);
        prop_assert_eq!(
            intersection_pairing(sum, h3),
            intersection_pairing(h1, h3) + intersection_pairing(h2, h3)
        );
    }

    #[test]
    fn crossing_sign_flips_with_orientation(s1 in segment_strategy(), s2 in segment_strategy()) {
        let fwd = segment_crossings(&s1, &s2);
        let rev2 = Segment::new(s2.end.clone(), s2.start.clone());
        let bwd = segment_crossings(&s1, &rev2);
        let both = segment_crossings(
            &Segment::new(s1.end.clone(), s1.start.clone()),
            &rev2,
        );
        if let (Ok(fwd), Ok(bwd), Ok(both)) = (fwd, bwd, both) {
            let mut f: Vec<_> = fwd.iter().map(|c| (c.point.clone(), c.sign)).collect();
            let mut b: Vec<_> = bwd.iter().map(|c| (c.point.clone(), -c.sign)).collect();
            let mut t: Vec<_> = both.iter().map(|c| (c.point.clone(), c.sign)).collect();
            f.sort();
            b.sort();
            t.sort();
            prop_assert_eq!(f.clone(), b, "reversing one segment flips every sign");
            prop_assert_eq!(f, t, "reversing both preserves every sign");
        }
    }

    #[test]
    fn cyclic_order_rotation_and_transposition(
        ux in -9i64..=9, uy in -9i64..=9,
        vx in -9i64..=9, vy in -9i64..=9,
        wx in -9i64..=9, wy in -9i64..=9,
    ) {
        let u = Vec2Q::new(qi(ux), qi(uy));
        let v = Vec2Q::new(qi(vx), qi(vy));
        let w = Vec2Q::new(qi(wx), qi(wy));
        if let Ok(order) = cyclic_order_positive(&u, &v, &w) {
            prop_assert_eq!(cyclic_order_positive(&v, &w, &u).unwrap(), order);
            prop_assert_eq!(cyclic_order_positive(&w, &u, &v).unwrap(), order);
            prop_assert_eq!(cyclic_order_positive(&v, &u, &w).unwrap(), !order);
            prop_assert_eq!(cyclic_order_positive(&u, &w, &v).unwrap(), !order);
        }
    }
}

fn corpus() -> Vec<(&'static str, TorusDiagram)> {
    vec![
        ("line", complex_line()),
        ("lines2", generic_lines(2).unwrap()),
        ("clasp1", simple_clasp_gadget().unwrap()),
        ("clasp3", compound_clasp_gadget().unwrap()),
    ]
}

#[test]
fn orientation_reversal_preserves_validity_and_epsilon() {
    for (name, d) in corpus() {
        let rev = d.orientation_reversed();
        let report = rev.validate();
        assert!(report.is_empty(), "{name}: {report}");
        for bi in 0..d.bridge_points.len() {
            // Germs are orientation independent, so epsilon is unchanged.
            assert_eq!(
                rev.epsilon_sign(bi).unwrap(),
                d.epsilon_sign(bi).unwrap(),
                "{name} bridge {bi}"
            );
            assert_eq!(rev.bridge_points[bi].sigma, -d.bridge_points[bi].sigma);
        }
    }
}

#[test]
fn self_crossings_cancel_between_adjacent_chains() {
    // Stabilizing one copy of a two-line diagram makes its loop cross the
    // other copy's arc of the same family; each same-family crossing must
    // appear in the two chains containing that family with opposite signs.
    for seed_family in Family::ALL {
        let base = generic_lines(2).unwrap();
        let mv = Move::BraidStab {
            family: seed_family,
            arc: 0,
            j: 1,
            seg: 1,
            t: q(1, 2),
        };
        let d = apply_move(&base, &mv).unwrap_or_else(|e| panic!("{seed_family}: {e}"));
        let (raw, violations) = d.raw_crossings();
        assert!(violations.is_empty());
        let mut checked = 0;
        for c in &raw {
            if c.a.family != c.b.family {
                continue;
            }
            let mu = c.a.family.lambda();
            let prev = c.a.family.prev().lambda();
            let mut signs = Vec::new();
            for lambda in [mu, prev] {
                let chain = d.chain_crossings(lambda, &raw).unwrap();
                let found = chain
                    .iter()
                    .find(|x| x.point == c.point)
                    .unwrap_or_else(|| panic!("crossing missing from chain {lambda}"));
                signs.push(found.sign as i64);
            }
            assert_eq!(signs[0] + signs[1], 0, "self-crossing must cancel");
            checked += 1;
        }
        assert!(checked > 0, "stabilized {seed_family} diagram should have self-crossings");
    }
}

#[test]
fn pull_tight_is_lift_independent() {
    // Shifting one arc's cover representative by whole turns changes no
    // classification data.
    let base = simple_clasp_gadget().unwrap();
    let records = pull_tight_classify(&base, 1).unwrap();
    for turns in [1i64, -2] {
        let mut shifted = base.clone();
        let g = shifted.family_arcs(Family::A)[1];
        for v in shifted.arcs[g].vertices.iter_mut() {
            v.point = v.point.shift(0, turns);
        }
        assert!(shifted.validate().is_empty());
        let shifted_records = pull_tight_classify(&shifted, 1).unwrap();
        assert_eq!(records.len(), shifted_records.len());
        for (a, b) in records.iter().zip(&shifted_records) {
            assert_eq!(a.case, b.case);
            assert_eq!(a.k, b.k);
            assert_eq!(a.r_i, b.r_i);
            assert_eq!(a.s_j, b.s_j);
            assert_eq!(a.delta, b.delta);
        }
    }
}

#[test]
fn chain_classes_are_consistent_with_degree_formula() {
    for (name, d) in corpus() {
        let a = Analysis::new(&d).unwrap();
        // The three degree evaluations agree (checked in Analysis), and
        // decomposing and recomposing the classes is the identity.
        for lambda in 1..=3 {
            let dec = decompose(lambda, a.classes[lambda - 1]);
            let alpha = HomologyClass::alpha(lambda);
            let beta = HomologyClass::alpha(lambda + 1);
            let recomposed = HomologyClass::new(
                dec.p * alpha.a + dec.q * beta.a,
                dec.p * alpha.b + dec.q * beta.b,
            );
            assert_eq!(recomposed, a.classes[lambda - 1], "{name} lambda={lambda}");
        }
    }
}

#[test]
fn empty_diagram_invariants() {
    let d = TorusDiagram::empty();
    let a = Analysis::new(&d).unwrap();
    assert_eq!(a.degree, 0);
    assert_eq!(a.pqr, (0, 0, 0));
    assert_eq!(a.chi, 0);
    assert_eq!(a.framing_residual(), 0);
    assert!(tsd_core::invariants::adjunction_report(&d, 0).is_err());
}

#[test]
fn shadow_chains_close_up() {
    // Every bridge point has matching in/out degree in each chain.
    for (name, d) in corpus() {
        for lambda in 1..=3 {
            let chain = d.shadow_chain(lambda).unwrap();
            let mut degree_in = vec![0i64; d.bridge_points.len()];
            let mut degree_out = vec![0i64; d.bridge_points.len()];
            for strand in &chain.strands {
                let arc = d.arc(strand.family, strand.arc).unwrap();
                let head = d.bridge_at(&arc.last().point.reduced()).unwrap();
                let tail = d.bridge_at(&arc.first().point.reduced()).unwrap();
                let (into, out_of) = if strand.reversed { (tail, head) } else { (head, tail) };
                degree_in[into] += 1;
                degree_out[out_of] += 1;
            }
            assert_eq!(degree_in, degree_out, "{name} lambda={lambda}");
        }
    }
}

#[test]
fn mini_stab_increments_next_component_count_in_every_family() {
    let line = complex_line();
    for family in Family::ALL {
        let out = apply_move(
            &line,
            &Move::MiniStab {
                family,
                arc: 0,
                seg: 0,
                t: q(1, 2),
                mirrored: false,
            },
        )
        .unwrap();
        let a = Analysis::new(&out).unwrap();
        let mut expected = [1usize, 1, 1];
        expected[family.next().lambda() - 1] += 1;
        assert_eq!(a.c, expected, "{family}");
        assert_eq!(a.b, 2);
        assert_eq!(a.chi, 2);
    }
}

#[test]
fn mini_stab_on_transverse_braided_shoulder_preserves_predicates() {
    use tsd_core::transversality::{is_braided, is_geometrically_transverse};
    let line = complex_line();
    for family in Family::ALL {
        // Segment 0 is a shoulder with local slope 2.
        let out = apply_move(
            &line,
            &Move::MiniStab {
                family,
                arc: 0,
                seg: 0,
                t: q(1, 2),
                mirrored: false,
            },
        )
        .unwrap();
        for lambda in 1..=3 {
            assert!(
                is_geometrically_transverse(&out, lambda).unwrap().holds,
                "{family} -> family {lambda} transversality"
            );
        }
        // The stabilized family itself stays braided.
        assert!(is_braided(&out, family.lambda()).unwrap().holds);
    }
}

#[test]
fn perturb_fixes_overlapping_and_vertex_on_strand_degeneracies() {
    // Collinear overlap: two line copies shifted along the sweep direction.
    let line = complex_line();
    let mut overlap = line.clone();
    let shift_x = q(13, 24 * 26);
    let shift_y = q(2, 24 * 26);
    for b in line.bridge_points.iter() {
        overlap.bridge_points.push(tsd_core::diagram::BridgePoint {
            id: format!("w{}", b.id.trim_start_matches('v')),
            position: b.position.translate(&shift_x, &shift_y).reduced(),
            sigma: b.sigma,
        });
    }
    for arc in line.arcs.iter() {
        let mut copy = arc.clone();
        for v in copy.vertices.iter_mut() {
            v.point = v.point.translate(&shift_x, &shift_y);
        }
        overlap.arcs.push(copy);
    }
    assert!(!overlap.validate().is_empty(), "fixture must be degenerate");
    let fixed = overlap.perturb(7, &q(1, 400)).unwrap();
    assert!(fixed.validate().is_empty());

    // Tangency: a C vertex moved exactly onto the A sweep segment.
    let mut tangent = line.clone();
    let gc = tangent.family_arcs(Family::C)[0];
    tangent.arcs[gc].vertices[2].point = CoverPoint::new(qi(1), q(1, 2));
    assert!(!tangent.validate().is_empty());
    let fixed = tangent.perturb(11, &q(1, 500)).unwrap();
    assert!(fixed.validate().is_empty());

    // A valid diagram is returned unchanged.
    let untouched = line.perturb(3, &q(1, 100)).unwrap();
    assert_eq!(untouched, line);
}

#[test]
fn braid_stab_writhe_change_matches_surface_framing_lemma() {
    // After one positive stabilization in family lambda the writhe drops by
    // q_lambda, so the surface framing w + pq is unchanged.
    let (diag, _) =
        tsd_core::moves::stabilize_to_classes(&complex_line(), (1, 0, 1)).unwrap();
    let before = Analysis::new(&diag).unwrap();
    for family in Family::ALL {
        let lambda = family.lambda();
        let mv = Move::BraidStab {
            family,
            arc: 0,
            j: 1,
            seg: 1,
            t: q(1, 2),
        };
        let Ok(out) = apply_move(&diag, &mv) else { continue };
        let after = Analysis::new(&out).unwrap();
        let dec_before = before.decomp[lambda - 1];
        let dec_after = after.decomp[lambda - 1];
        assert_eq!(dec_after.p, dec_before.p + 1);
        assert_eq!(dec_after.q, dec_before.q);
        assert_eq!(
            after.writhes[lambda - 1],
            before.writhes[lambda - 1] - dec_before.q,
            "family {family}"
        );
        assert_eq!(
            after.writhes[lambda - 1] + dec_after.p * dec_after.q,
            before.writhes[lambda - 1] + dec_before.p * dec_before.q
        );
    }
}

#[test]
fn gadget_arcs_have_expected_transversality_profile() {
    use tsd_core::transversality::{
        is_algebraically_transverse, is_braided, is_geometrically_transverse,
    };
    let d = simple_clasp_gadget().unwrap();
    let geo = is_geometrically_transverse(&d, 1).unwrap();
    assert!(!geo.holds, "the clasped arc is not geometrically transverse");
    assert!(geo.violations.iter().all(|s| s.arc == 1));
    assert!(is_braided(&d, 1).unwrap().holds);
    let alg = is_algebraically_transverse(&d, 1).unwrap();
    assert!(alg.holds);
    assert!(alg.integrals.iter().all(|x| x.is_positive()));
}
