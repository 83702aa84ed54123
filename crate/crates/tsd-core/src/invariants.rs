//! Numeric invariants and identities of a torus diagram: homology classes,
//! degree, writhes, surface framings, framing conservation, Euler
//! characteristic, self-linking numbers and the adjunction bookkeeping.

use crate::diagram::{DiagramError, TorusDiagram, Violation};
use crate::kernel::HomologyClass;
use crate::transversality::is_geometrically_transverse;
use thiserror::Error;

/// Global sign multiplying the half-sum of cyclic-order signs in the
/// framing-conservation identity
/// `<S(K_l), S(K_{l+1})> = w_1 + w_2 + w_3 + s * (1/2) * sum_v eps(v)`.
/// Fixed to `+1` by exact crossing and epsilon enumeration on the
/// complex-line reference diagram (see the sign-resolution test in the
/// acceptance suite).
pub const FRAMING_EPSILON_SIGN: i64 = 1;

#[derive(Debug, Error, Clone)]
pub enum InvariantError {
    #[error("degree formulas disagree: {0:?}")]
    DegreeMismatch([i64; 3]),
    #[error("inconsistent degree-freedom letters: {0}")]
    InconsistentClasses(String),
    #[error("nonzero residual: {0}")]
    NonzeroResidual(String),
    #[error("degree must be positive, got {0}")]
    NonPositiveDegree(i64),
    #[error("not geometrically transverse in family {0}")]
    NotGeometricallyTransverse(usize),
    #[error(transparent)]
    Diagram(#[from] DiagramError),
}

/// `[S(K_lambda)] = p * [alpha_lambda] + q * [alpha_{lambda+1}]`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ShadowClassDecomposition {
    pub lambda: usize,
    pub class: HomologyClass,
    pub p: i64,
    pub q: i64,
}

/// Solve the decomposition in the (oriented) basis
/// `{[alpha_lambda], [alpha_{lambda+1}]}`; always exact and unique.
pub fn decompose(lambda: usize, class: HomologyClass) -> ShadowClassDecomposition {
    let (p, q) = match (lambda + 2) % 3 {
        0 => (class.a, class.b),
        1 => (class.b - class.a, -class.a),
        _ => (-class.b, class.a - class.b),
    };
    ShadowClassDecomposition {
        lambda,
        class,
        p,
        q,
    }
}

/// Everything derived from one pass over a valid diagram. Crossings are
/// enumerated once and reused by all three chain interpretations.
#[derive(Clone, Debug)]
pub struct Analysis {
    pub b: usize,
    pub c: [usize; 3],
    pub classes: [HomologyClass; 3],
    pub decomp: [ShadowClassDecomposition; 3],
    pub degree_by_lambda: [i64; 3],
    pub degree: i64,
    /// Degree-freedom letters `(p, q, r)`.
    pub pqr: (i64, i64, i64),
    pub writhes: [i64; 3],
    pub epsilon: Vec<i8>,
    pub epsilon_sum: i64,
    pub sigma_sum: i64,
    /// Homological side of the framing identity.
    pub framing_lhs: i64,
    /// Diagrammatic side: `w_1 + w_2 + w_3 + s * (1/2) sum eps`.
    pub framing_rhs: i64,
    pub chi: i64,
    pub connected: bool,
    pub geom_transverse: [bool; 3],
    pub sl: [i64; 3],
    pub sl_formal: [bool; 3],
}

impl Analysis {
    pub fn new(diagram: &TorusDiagram) -> Result<Analysis, InvariantError> {
        let (raw, violations) = diagram.violations_with_raw();
        if !violations.is_empty() {
            return Err(InvariantError::Diagram(DiagramError::Invalid(
                crate::diagram::ValidationReport { violations },
            )));
        }
        let b = diagram.bridge_index();

        let mut classes = [HomologyClass::new(0, 0); 3];
        let mut decomp = [decompose(1, HomologyClass::new(0, 0)); 3];
        for lambda in 1..=3 {
            let class = diagram.chain_class(lambda).ok_or_else(|| {
                InvariantError::Diagram(DiagramError::Invalid(crate::diagram::ValidationReport {
                    violations: vec![Violation::NonIntegralClass { lambda }],
                }))
            })?;
            classes[lambda - 1] = class;
            decomp[lambda - 1] = decompose(lambda, class);
        }

        // Degree by the intersection-pairing formula, evaluated for each
        // lambda: d = p_lambda + q_{lambda-1}.
        let mut degree_by_lambda = [0i64; 3];
        for lambda in 1..=3 {
            let prev = (lambda + 1) % 3; // index of lambda - 1
            degree_by_lambda[lambda - 1] = decomp[lambda - 1].p + decomp[prev].q;
        }
        if degree_by_lambda[0] != degree_by_lambda[1] || degree_by_lambda[1] != degree_by_lambda[2]
        {
            return Err(InvariantError::DegreeMismatch(degree_by_lambda));
        }
        let degree = degree_by_lambda[0];

        // Degree-freedom letters with cross-consistency checks.
        let p = decomp[0].p;
        let q = decomp[1].p;
        let r = decomp[2].p;
        for (name, letter, other) in [
            ("p", p, degree - decomp[2].q),
            ("q", q, degree - decomp[0].q),
            ("r", r, degree - decomp[1].q),
        ] {
            if letter != other {
                return Err(InvariantError::InconsistentClasses(format!(
                    "{name}: {letter} vs {other}"
                )));
            }
        }

        let mut writhes = [0i64; 3];
        for lambda in 1..=3 {
            let crossings = diagram.chain_crossings(lambda, &raw)?;
            writhes[lambda - 1] = crossings.iter().map(|c| c.sign as i64).sum();
        }

        let inc = diagram.incidences()?;
        let mut epsilon = Vec::with_capacity(diagram.bridge_points.len());
        for bi in 0..diagram.bridge_points.len() {
            epsilon.push(diagram.epsilon_sign_with(&inc, bi)?);
        }
        let epsilon_sum: i64 = epsilon.iter().map(|&e| e as i64).sum();
        let sigma_sum: i64 = diagram.bridge_points.iter().map(|b| b.sigma as i64).sum();

        let framing_lhs = degree * degree - degree * (p + q + r) + p * q + q * r + r * p;
        debug_assert!(epsilon_sum % 2 == 0);
        let framing_rhs =
            writhes.iter().sum::<i64>() + FRAMING_EPSILON_SIGN * epsilon_sum / 2;

        let mut c = [0usize; 3];
        for lambda in 1..=3 {
            c[lambda - 1] = diagram.component_count_with(&inc, lambda).0;
        }
        let chi = c.iter().map(|&x| x as i64).sum::<i64>() - b as i64;
        let connected = diagram.is_connected_with(&inc);

        let mut geom_transverse = [false; 3];
        for lambda in 1..=3 {
            geom_transverse[lambda - 1] = is_geometrically_transverse(diagram, lambda)?.holds;
        }
        let mut sl = [0i64; 3];
        let mut sl_formal = [false; 3];
        for lambda in 1..=3 {
            let d = &decomp[lambda - 1];
            sl[lambda - 1] = writhes[lambda - 1] + d.p * d.q - d.p - d.q;
            // The value is honest only when both tangles of Y_lambda are
            // geometrically transverse; otherwise it is formal.
            let next = lambda % 3;
            sl_formal[lambda - 1] = !(geom_transverse[lambda - 1] && geom_transverse[next]);
        }

        Ok(Analysis {
            b,
            c,
            classes,
            decomp,
            degree_by_lambda,
            degree,
            pqr: (p, q, r),
            writhes,
            epsilon,
            epsilon_sum,
            sigma_sum,
            framing_lhs,
            framing_rhs,
            chi,
            connected,
            geom_transverse,
            sl,
            sl_formal,
        })
    }

    pub fn framing_residual(&self) -> i64 {
        self.framing_lhs - self.framing_rhs
    }

    pub fn sl_total(&self) -> i64 {
        self.sl.iter().sum()
    }

    /// Genus when the diagram is connected and `chi` has sphere parity.
    pub fn genus(&self) -> Option<i64> {
        if self.connected && (2 - self.chi) % 2 == 0 && self.chi <= 2 {
            Some((2 - self.chi) / 2)
        } else {
            None
        }
    }
}

/// Shadow homology class and its decomposition for one chain.
pub fn shadow_class(
    diagram: &TorusDiagram,
    lambda: usize,
) -> Result<ShadowClassDecomposition, InvariantError> {
    diagram.require_valid()?;
    let class = diagram
        .chain_class(lambda)
        .ok_or_else(|| InvariantError::InconsistentClasses("non-integral winding".into()))?;
    Ok(decompose(lambda, class))
}

/// Degree evaluated three ways (one per lambda); all must agree.
pub fn degree(diagram: &TorusDiagram) -> Result<(i64, [i64; 3]), InvariantError> {
    let a = Analysis::new(diagram)?;
    Ok((a.degree, a.degree_by_lambda))
}

/// The degree-freedom letters `(p, q, r)`.
pub fn deg_freedom(diagram: &TorusDiagram) -> Result<(i64, i64, i64), InvariantError> {
    Ok(Analysis::new(diagram)?.pqr)
}

/// Signed crossing count of the chain `S(K_lambda)`.
pub fn writhe(diagram: &TorusDiagram, lambda: usize) -> Result<i64, InvariantError> {
    let crossings = diagram.enumerate_crossings(lambda)?;
    Ok(crossings.iter().map(|c| c.sign as i64).sum())
}

/// Framing induced on `K_lambda` by the surface framing of its shadow:
/// `w_lambda + p_lambda * q_lambda`.
pub fn surface_framing(diagram: &TorusDiagram, lambda: usize) -> Result<i64, InvariantError> {
    let a = Analysis::new(diagram)?;
    let d = &a.decomp[lambda - 1];
    Ok(a.writhes[lambda - 1] + d.p * d.q)
}

/// Both sides of the framing-conservation identity and their difference.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct FramingCheck {
    pub lhs: i64,
    pub rhs: i64,
    pub residual: i64,
}

/// Evaluate the framing-conservation identity; a nonzero residual is an
/// error (it signals an invalid diagram or a convention fault).
pub fn framing_conservation_check(diagram: &TorusDiagram) -> Result<FramingCheck, InvariantError> {
    let a = Analysis::new(diagram)?;
    let check = FramingCheck {
        lhs: a.framing_lhs,
        rhs: a.framing_rhs,
        residual: a.framing_residual(),
    };
    if check.residual != 0 {
        return Err(InvariantError::NonzeroResidual(format!(
            "framing conservation: lhs={} rhs={}",
            check.lhs, check.rhs
        )));
    }
    Ok(check)
}

/// Euler characteristic `c1 + c2 + c3 - b`, connectivity, and the genus
/// when the diagram is connected.
pub fn euler_characteristic(
    diagram: &TorusDiagram,
) -> Result<(i64, bool, Option<i64>), InvariantError> {
    let a = Analysis::new(diagram)?;
    Ok((a.chi, a.connected, a.genus()))
}

/// Self-linking number of `K_lambda`: `w + pq - p - q`. The value is
/// `formal` when the two tangles of `Y_lambda` are not both geometrically
/// transverse.
#[derive(Clone, Copy, Debug)]
pub struct SelfLinking {
    pub lambda: usize,
    pub value: i64,
    pub formal: bool,
}

pub fn self_linking(diagram: &TorusDiagram, lambda: usize) -> Result<SelfLinking, InvariantError> {
    let a = Analysis::new(diagram)?;
    Ok(SelfLinking {
        lambda,
        value: a.sl[lambda - 1],
        formal: a.sl_formal[lambda - 1],
    })
}

/// Check `sl_1 + sl_2 + sl_3 = d^2 - 3d - b`; requires geometric
/// transversality of all tangles and errors on a nonzero residual.
pub fn total_sl_check(diagram: &TorusDiagram) -> Result<i64, InvariantError> {
    let a = Analysis::new(diagram)?;
    for lambda in 1..=3 {
        if !a.geom_transverse[lambda - 1] {
            return Err(InvariantError::NotGeometricallyTransverse(lambda));
        }
    }
    let expected = a.degree * a.degree - 3 * a.degree - a.b as i64;
    let residual = a.sl_total() - expected;
    if residual != 0 {
        return Err(InvariantError::NonzeroResidual(format!(
            "total self-linking {} vs {}",
            a.sl_total(),
            expected
        )));
    }
    Ok(residual)
}

/// Adjunction bookkeeping for a diagram with `n` simple clasps.
#[derive(Clone, Copy, Debug)]
pub struct AdjunctionReport {
    pub degree: i64,
    pub chi: i64,
    /// `3d - d^2`.
    pub bound: i64,
    pub satisfied: bool,
    pub equality: bool,
    /// `(d-1)(d-2)/2`, reported only for connected diagrams.
    pub genus_lower_bound: Option<i64>,
    pub clasps: i64,
    /// `d^2 - 3d - b + 2n`.
    pub sl_tilde: i64,
    /// `c1 + c2 + c3 - 2n`.
    pub chi_ribbon: i64,
    /// `sl_tilde <= -chi_ribbon` must coincide with `chi <= bound`.
    pub ribbon_equivalence_consistent: bool,
}

pub fn adjunction_report(
    diagram: &TorusDiagram,
    clasps: u64,
) -> Result<AdjunctionReport, InvariantError> {
    let a = Analysis::new(diagram)?;
    if a.degree <= 0 {
        return Err(InvariantError::NonPositiveDegree(a.degree));
    }
    let n = clasps as i64;
    let d = a.degree;
    let bound = 3 * d - d * d;
    let sl_tilde = d * d - 3 * d - a.b as i64 + 2 * n;
    let chi_ribbon = a.c.iter().map(|&x| x as i64).sum::<i64>() - 2 * n;
    let satisfied = a.chi <= bound;
    Ok(AdjunctionReport {
        degree: d,
        chi: a.chi,
        bound,
        satisfied,
        equality: a.chi == bound,
        genus_lower_bound: if a.connected {
            Some((d - 1) * (d - 2) / 2)
        } else {
            None
        },
        clasps: n,
        sl_tilde,
        chi_ribbon,
        ribbon_equivalence_consistent: (sl_tilde <= -chi_ribbon) == satisfied,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::builders::{complex_line, generic_lines};

    #[test]
    fn decompose_cycles() {
        // Line diagram classes.
        assert_eq!(decompose(1, HomologyClass::new(1, 0)).p, 1);
        assert_eq!(decompose(1, HomologyClass::new(1, 0)).q, 0);
        let d2 = decompose(2, HomologyClass::new(0, 1));
        assert_eq!((d2.p, d2.q), (1, 0));
        let d3 = decompose(3, HomologyClass::new(-1, -1));
        assert_eq!((d3.p, d3.q), (1, 0));
    }

    #[test]
    fn line_analysis_ground_truth() {
        let line = complex_line();
        let a = Analysis::new(&line).unwrap();
        assert_eq!(a.b, 1);
        assert_eq!(a.c, [1, 1, 1]);
        assert_eq!(a.chi, 2);
        assert_eq!(a.degree, 1);
        assert_eq!(a.degree_by_lambda, [1, 1, 1]);
        assert_eq!(a.pqr, (1, 1, 1));
        assert_eq!(a.writhes, [0, 0, 0]);
        assert_eq!(a.epsilon_sum, 2);
        assert_eq!(a.sigma_sum, 0);
        assert_eq!(a.framing_lhs, 1);
        assert_eq!(a.framing_residual(), 0);
        assert_eq!(a.sl, [-1, -1, -1]);
        assert_eq!(a.sl_formal, [false, false, false]);
        assert_eq!(a.genus(), Some(0));
        assert_eq!(total_sl_check(&line).unwrap(), 0);
    }

    #[test]
    fn line_adjunction_equality() {
        let line = complex_line();
        let rep = adjunction_report(&line, 0).unwrap();
        assert_eq!(rep.chi, 2);
        assert_eq!(rep.bound, 2);
        assert!(rep.satisfied && rep.equality);
        assert_eq!(rep.genus_lower_bound, Some(0));
        assert_eq!(rep.sl_tilde, -3);
        assert_eq!(rep.chi_ribbon, 3);
        assert!(rep.ribbon_equivalence_consistent);
    }

    #[test]
    fn lines_family_identities() {
        for d in 1..=3usize {
            let diag = generic_lines(d).unwrap();
            let a = Analysis::new(&diag).unwrap();
            let di = d as i64;
            assert_eq!(a.degree, di, "degree of {d} lines");
            assert_eq!(a.pqr, (di, di, di));
            assert_eq!(a.framing_lhs, di * di);
            assert_eq!(a.framing_residual(), 0, "residual for d={d}");
            assert_eq!(a.chi, 2 * di);
            assert_eq!(a.sl_total(), di * di - 4 * di);
            assert_eq!(total_sl_check(&diag).unwrap(), 0);
        }
    }
}
