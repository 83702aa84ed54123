//! The serializable invariant report. Field order is fixed by struct
//! order; rationals are rendered as `"num/den"` strings so the JSON output
//! is exact and byte-stable for a fixed diagram and tool version.

use crate::diagram::TorusDiagram;
use crate::invariants::{
    adjunction_report, Analysis, InvariantError, FRAMING_EPSILON_SIGN,
};
use serde::{Deserialize, Serialize};

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ReportMetadata {
    pub tool_version: String,
    /// Sign convention in the framing identity's epsilon term, resolved by
    /// exact enumeration on the complex-line reference diagram.
    pub framing_epsilon_sign: i64,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ShadowClassReport {
    pub lambda: usize,
    /// Class in the `([alpha], [beta])` basis.
    pub alpha_coeff: i64,
    pub beta_coeff: i64,
    /// Decomposition in the `([alpha_lambda], [alpha_{lambda+1}])` basis.
    pub p: i64,
    pub q: i64,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct FramingReport {
    pub lhs: i64,
    pub rhs: i64,
    pub residual: i64,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SelfLinkingReport {
    pub lambda: usize,
    pub value: i64,
    /// True when the value is only formal (the two tangles of this sector
    /// are not both geometrically transverse).
    pub formal: bool,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct AdjunctionSection {
    pub degree: i64,
    pub chi: i64,
    pub bound: i64,
    pub satisfied: bool,
    pub equality: bool,
    pub genus_lower_bound: Option<i64>,
    pub clasps: i64,
    pub sl_tilde: i64,
    pub chi_ribbon: i64,
    pub ribbon_equivalence_consistent: bool,
}

/// Full invariant report of a valid diagram.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct InvariantReport {
    pub format_version: u32,
    pub metadata: ReportMetadata,
    pub b: usize,
    pub c: [usize; 3],
    pub chi: i64,
    pub connected: bool,
    pub genus: Option<i64>,
    pub degree: i64,
    pub degree_by_lambda: [i64; 3],
    pub p: i64,
    pub q: i64,
    pub r: i64,
    pub shadow_classes: Vec<ShadowClassReport>,
    pub writhes: [i64; 3],
    pub sigma_sum: i64,
    pub epsilon_sum: i64,
    pub surface_framings: [i64; 3],
    pub framing: FramingReport,
    pub geometrically_transverse: [bool; 3],
    pub self_linking: Vec<SelfLinkingReport>,
    pub self_linking_total: i64,
    pub adjunction: Option<AdjunctionSection>,
}

impl InvariantReport {
    /// Compute the report; `clasps` supplies the clasp count for the
    /// adjunction section (skipped for non-positive degree).
    pub fn compute(diagram: &TorusDiagram, clasps: u64) -> Result<InvariantReport, InvariantError> {
        let a = Analysis::new(diagram)?;
        let adjunction = if a.degree > 0 {
            let r = adjunction_report(diagram, clasps)?;
            Some(AdjunctionSection {
                degree: r.degree,
                chi: r.chi,
                bound: r.bound,
                satisfied: r.satisfied,
                equality: r.equality,
                genus_lower_bound: r.genus_lower_bound,
                clasps: r.clasps,
                sl_tilde: r.sl_tilde,
                chi_ribbon: r.chi_ribbon,
                ribbon_equivalence_consistent: r.ribbon_equivalence_consistent,
            })
        } else {
            None
        };
        let shadow_classes = (1..=3)
            .map(|lambda| {
                let d = &a.decomp[lambda - 1];
                ShadowClassReport {
                    lambda,
                    alpha_coeff: d.class.a,
                    beta_coeff: d.class.b,
                    p: d.p,
                    q: d.q,
                }
            })
            .collect();
        let self_linking = (1..=3)
            .map(|lambda| SelfLinkingReport {
                lambda,
                value: a.sl[lambda - 1],
                formal: a.sl_formal[lambda - 1],
            })
            .collect();
        let mut surface_framings = [0i64; 3];
        for lambda in 1..=3 {
            let d = &a.decomp[lambda - 1];
            surface_framings[lambda - 1] = a.writhes[lambda - 1] + d.p * d.q;
        }
        Ok(InvariantReport {
            format_version: 1,
            metadata: ReportMetadata {
                tool_version: env!("CARGO_PKG_VERSION").to_string(),
                framing_epsilon_sign: FRAMING_EPSILON_SIGN,
            },
            b: a.b,
            c: a.c,
            chi: a.chi,
            connected: a.connected,
            genus: a.genus(),
            degree: a.degree,
            degree_by_lambda: a.degree_by_lambda,
            p: a.pqr.0,
            q: a.pqr.1,
            r: a.pqr.2,
            shadow_classes,
            writhes: a.writhes,
            sigma_sum: a.sigma_sum,
            epsilon_sum: a.epsilon_sum,
            surface_framings,
            framing: FramingReport {
                lhs: a.framing_lhs,
                rhs: a.framing_rhs,
                residual: a.framing_lhs - a.framing_rhs,
            },
            geometrically_transverse: a.geom_transverse,
            self_linking,
            self_linking_total: a.sl.iter().sum(),
            adjunction,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::builders::complex_line;

    #[test]
    fn line_report_fields() {
        let rep = InvariantReport::compute(&complex_line(), 0).unwrap();
        assert_eq!(rep.b, 1);
        assert_eq!(rep.c, [1, 1, 1]);
        assert_eq!(rep.chi, 2);
        assert_eq!(rep.degree, 1);
        assert_eq!((rep.p, rep.q, rep.r), (1, 1, 1));
        assert_eq!(rep.framing.residual, 0);
        assert_eq!(rep.self_linking_total, -3);
        assert!(rep.adjunction.unwrap().equality);
    }
}
