//! Reference term tables for the two displayed hypersurface relations, the
//! torus gauge change aligning a fitted relation with a table's leading
//! coefficients, and the term-by-term comparison report. Tables carry
//! coefficient formulas in the specialization parameters alpha and b, plus
//! named unknowns whose values are read off the fitted relation; rows whose
//! weighted degree breaks the relation's homogeneity are flagged, never
//! silently corrected.

use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use serde::Serialize;

use crate::field::{Felt, Field};
use crate::parse::parse_poly;
use crate::poly::{Mono, Poly, PolyRing};

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ReferenceError {
    /// The fitted relation has coefficient zero at a slot the gauge solve
    /// needs to be nonzero.
    MissingDesignatedSlot { slot: Mono },
    /// A zero target coefficient cannot be reached by rescaling.
    UnrealizableTarget { slot: Mono },
}

impl fmt::Display for ReferenceError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ReferenceError::MissingDesignatedSlot { slot } => {
                write!(f, "fitted relation vanishes at designated slot {slot:?}")
            }
            ReferenceError::UnrealizableTarget { slot } => {
                write!(f, "target coefficient at slot {slot:?} is zero; no rescaling reaches it")
            }
        }
    }
}

impl std::error::Error for ReferenceError {}

/// One row of a reference table: a monomial slot in the four generator
/// variables with either a closed-form coefficient (an expression in alpha
/// and b) or a named unknown to be read from the fitted relation.
#[derive(Debug, Clone)]
pub struct ReferenceTerm {
    pub slot: Mono,
    /// Formula in alpha, b — or the unknown's name when `fitted_unknown`.
    pub label: &'static str,
    pub fitted_unknown: bool,
    /// The row's weighted degree differs from the relation's.
    pub anomalous_degree: bool,
}

#[derive(Debug, Clone)]
pub struct ReferenceRelation {
    pub id: &'static str,
    pub weights: [u64; 4],
    pub weighted_degree: u64,
    pub terms: Vec<ReferenceTerm>,
}

impl ReferenceRelation {
    /// Recompute which rows break the homogeneity of the table; used to
    /// confirm the stored flags are exactly the degree outliers.
    pub fn degree_outliers(&self) -> Vec<Mono> {
        self.terms
            .iter()
            .filter(|t| {
                let w: u64 = t
                    .slot
                    .iter()
                    .zip(&self.weights)
                    .map(|(&e, &w)| e as u64 * w)
                    .sum();
                w != self.weighted_degree
            })
            .map(|t| t.slot.clone())
            .collect()
    }
}

fn term(slot: [u32; 4], label: &'static str) -> ReferenceTerm {
    ReferenceTerm { slot: slot.to_vec(), label, fitted_unknown: false, anomalous_degree: false }
}

fn anomalous(slot: [u32; 4], label: &'static str) -> ReferenceTerm {
    ReferenceTerm { slot: slot.to_vec(), label, fitted_unknown: false, anomalous_degree: true }
}

fn unknown(slot: [u32; 4], label: &'static str) -> ReferenceTerm {
    ReferenceTerm { slot: slot.to_vec(), label, fitted_unknown: true, anomalous_degree: false }
}

fn unknown_anomalous(slot: [u32; 4], label: &'static str) -> ReferenceTerm {
    ReferenceTerm { slot: slot.to_vec(), label, fitted_unknown: true, anomalous_degree: true }
}

/// Reference table for the b = 0 relation (generator degrees 1, 2, 9, 9):
/// the square-free part x2^9 - x3^2 + x1^9 x4 plus the x1^6-multiplied
/// degree-12 block. Its third block row has weighted degree 16, not 18.
pub fn case_b_zero_reference() -> ReferenceRelation {
    ReferenceRelation {
        id: "b0",
        weights: [1, 2, 9, 9],
        weighted_degree: 18,
        terms: vec![
            term([0, 9, 0, 0], "1"),
            term([0, 0, 2, 0], "-1"),
            term([9, 0, 0, 1], "1"),
            term([6, 6, 0, 0], "1+alpha^2"),
            term([8, 5, 0, 0], "-alpha^2"),
            anomalous([12, 2, 0, 0], "(1+alpha^2)^2"),
            term([14, 2, 0, 0], "alpha^2*(1+alpha^2)"),
            term([16, 1, 0, 0], "alpha^4"),
        ],
    }
}

fn cubic_f_block() -> Vec<ReferenceTerm> {
    vec![
        unknown([3, 4, 0, 0], "c1"),
        unknown([4, 2, 1, 0], "c2"),
        unknown([5, 0, 2, 0], "c3"),
        unknown([6, 3, 0, 0], "c4"),
        unknown([7, 1, 1, 0], "c5"),
        unknown_anomalous([9, 3, 0, 0], "c6"),
        unknown([10, 0, 1, 0], "c7"),
    ]
}

/// Reference tables for the b != 0 relation (generator degrees 1, 3, 5, 9),
/// weighted degree 15. Three variants circulate: both leading-coefficient
/// conventions with the mixed term x1 x2^3 x3 present, and one convention
/// omitting the mixed term altogether. The c6 row has weighted degree 18.
pub fn case_b_nonzero_references() -> Vec<ReferenceRelation> {
    let mut with_mixed_low = vec![
        term([0, 5, 0, 0], "alpha*b^2"),
        term([0, 0, 3, 0], "-b^4"),
        term([6, 0, 0, 1], "-b^10"),
        term([1, 3, 1, 0], "alpha*b^2"),
    ];
    with_mixed_low.extend(cubic_f_block());
    let mut with_mixed_high = vec![
        term([0, 5, 0, 0], "alpha^3*b^2"),
        term([0, 0, 3, 0], "-b^4"),
        term([6, 0, 0, 1], "-b^10"),
        term([1, 3, 1, 0], "alpha*b^2"),
    ];
    with_mixed_high.extend(cubic_f_block());
    let mut without_mixed = vec![
        term([0, 5, 0, 0], "alpha^3*b^2"),
        term([0, 0, 3, 0], "-b^4"),
        term([6, 0, 0, 1], "-b^10"),
    ];
    without_mixed.extend(cubic_f_block());
    vec![
        ReferenceRelation {
            id: "bne0_mixed_alpha_b2",
            weights: [1, 3, 5, 9],
            weighted_degree: 15,
            terms: with_mixed_low,
        },
        ReferenceRelation {
            id: "bne0_mixed_alpha3_b2",
            weights: [1, 3, 5, 9],
            weighted_degree: 15,
            terms: with_mixed_high,
        },
        ReferenceRelation {
            id: "bne0_unmixed_alpha3_b2",
            weights: [1, 3, 5, 9],
            weighted_degree: 15,
            terms: without_mixed,
        },
    ]
}

/// Evaluate a table formula at the specialization parameters.
pub fn eval_formula(ring: &Arc<PolyRing>, formula: &str, alpha: Felt, b: Felt) -> Felt {
    let mut consts = BTreeMap::new();
    consts.insert("alpha".to_string(), alpha);
    consts.insert("b".to_string(), b);
    let p = parse_poly(ring, formula, &consts).expect("static table formula parses");
    assert!(p.is_constant(), "table formula must be constant");
    p.terms().first().map_or(Felt::ZERO, |(_, c)| *c)
}

/// Power with a signed exponent; the base must be nonzero for negatives.
fn pow_signed(field: &Field, a: Felt, e: i64) -> Felt {
    let order = field.size() as i64 - 1;
    let e = e.rem_euclid(order) as u64;
    field.pow(a, e)
}

/// Result of rescaling generators g_i -> m_i g_i together with an overall
/// scale on the relation, written in the rescaled coordinates.
#[derive(Debug, Clone)]
pub struct GaugeRealization {
    pub lambda: Felt,
    pub scales: Vec<Felt>,
    pub transformed: Poly,
}

/// Rewrite a relation in coordinates rescaled by `scales`, with an overall
/// factor `lambda`: each coefficient picks up lambda / prod scales^exps.
pub fn rescale_relation(rel: &Poly, lambda: Felt, scales: &[Felt]) -> Poly {
    let ring = rel.ring().clone();
    let field = ring.field.clone();
    let terms: Vec<(Mono, Felt)> = rel
        .terms()
        .iter()
        .map(|(m, c)| {
            let mut v = field.mul(lambda, *c);
            for (i, &e) in m.iter().enumerate() {
                if e > 0 {
                    let inv = field.inv(scales[i]).expect("nonzero scale");
                    v = field.mul(v, field.pow(inv, e as u64));
                }
            }
            (m.clone(), v)
        })
        .collect();
    Poly::from_terms(&ring, terms)
}

/// Solve for the rescaling that gives the relation prescribed coefficients
/// at the four designated slots x2^5, x3^3, x1 x2^3 x3, x1^6 x4 (the first
/// generator's scale is pinned to 1; the slot pattern is unimodular, so the
/// solution is unique). The result is verified slot by slot.
pub fn realize_designated_gauge(
    fitted: &Poly,
    targets: &[(Mono, Felt)],
) -> Result<GaugeRealization, ReferenceError> {
    let ring = fitted.ring().clone();
    let field = ring.field.clone();
    let slot_a: Mono = vec![0, 5, 0, 0];
    let slot_b: Mono = vec![0, 0, 3, 0];
    let slot_c: Mono = vec![1, 3, 1, 0];
    let slot_d: Mono = vec![6, 0, 0, 1];
    let want = |slot: &Mono| -> Result<Felt, ReferenceError> {
        targets
            .iter()
            .find(|(m, _)| m == slot)
            .map(|(_, t)| *t)
            .ok_or_else(|| ReferenceError::UnrealizableTarget { slot: slot.clone() })
    };
    let ratio = |slot: &Mono| -> Result<Felt, ReferenceError> {
        let current = fitted.coeff(slot);
        if field.is_zero(current) {
            return Err(ReferenceError::MissingDesignatedSlot { slot: slot.clone() });
        }
        let target = want(slot)?;
        if field.is_zero(target) {
            return Err(ReferenceError::UnrealizableTarget { slot: slot.clone() });
        }
        Ok(field.div(target, current).expect("nonzero current"))
    };
    let ra = ratio(&slot_a)?;
    let rb = ratio(&slot_b)?;
    let rc = ratio(&slot_c)?;
    let rd = ratio(&slot_d)?;
    let lambda = field.mul(
        field.mul(pow_signed(&field, ra, -9), pow_signed(&field, rb, -5)),
        pow_signed(&field, rc, 15),
    );
    let m2 = field.mul(
        field.mul(pow_signed(&field, ra, -2), pow_signed(&field, rb, -1)),
        pow_signed(&field, rc, 3),
    );
    let m3 = field.mul(
        field.mul(pow_signed(&field, ra, -3), pow_signed(&field, rb, -2)),
        pow_signed(&field, rc, 5),
    );
    let m4 = field.div(lambda, rd).expect("nonzero ratio");
    let scales = vec![field.one(), m2, m3, m4];
    let transformed = rescale_relation(fitted, lambda, &scales);
    for slot in [&slot_a, &slot_b, &slot_c, &slot_d] {
        assert_eq!(
            transformed.coeff(slot),
            want(slot)?,
            "gauge solve must reproduce every designated coefficient"
        );
    }
    Ok(GaugeRealization { lambda, scales, transformed })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum TermOutcome {
    Matched,
    Mismatched,
    MissingInFitted,
    FittedUnknown,
}

#[derive(Debug, Clone, Serialize)]
pub struct TermComparison {
    pub slot: Mono,
    pub label: String,
    /// Rendered expected value (formulas only).
    pub expected: Option<String>,
    /// Rendered fitted value.
    pub found: String,
    pub outcome: TermOutcome,
    pub anomalous_degree: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct ComparisonReport {
    pub reference_id: String,
    pub terms: Vec<TermComparison>,
    /// Fitted support outside the table: (slot, rendered coefficient).
    pub extra_terms: Vec<(Mono, String)>,
    /// Values read off for the table's named unknowns.
    pub fitted_unknowns: BTreeMap<String, String>,
    pub mismatches: usize,
    pub anomalies_flagged: usize,
}

/// Term-by-term comparison of a fitted relation against a reference table
/// at a concrete specialization. Reports, never judges: anomalous rows and
/// extra terms are listed alongside exact matches.
pub fn compare_with_reference(
    fitted: &Poly,
    table: &ReferenceRelation,
    alpha: Felt,
    b: Felt,
) -> ComparisonReport {
    let ring = fitted.ring().clone();
    let field = ring.field.clone();
    let mut terms = Vec::with_capacity(table.terms.len());
    let mut fitted_unknowns = BTreeMap::new();
    let mut mismatches = 0;
    let mut anomalies_flagged = 0;
    for row in &table.terms {
        let found = fitted.coeff(&row.slot);
        if row.anomalous_degree {
            anomalies_flagged += 1;
        }
        let (expected, outcome) = if row.fitted_unknown {
            fitted_unknowns.insert(row.label.to_string(), field.render(found));
            (None, TermOutcome::FittedUnknown)
        } else {
            let want = eval_formula(&ring, row.label, alpha, b);
            let outcome = if found == want {
                TermOutcome::Matched
            } else if field.is_zero(found) {
                TermOutcome::MissingInFitted
            } else {
                TermOutcome::Mismatched
            };
            if outcome == TermOutcome::Mismatched {
                mismatches += 1;
            }
            (Some(field.render(want)), outcome)
        };
        terms.push(TermComparison {
            slot: row.slot.clone(),
            label: row.label.to_string(),
            expected,
            found: field.render(found),
            outcome,
            anomalous_degree: row.anomalous_degree,
        });
    }
    let extra_terms: Vec<(Mono, String)> = fitted
        .terms()
        .iter()
        .filter(|(m, _)| !table.terms.iter().any(|row| &row.slot == m))
        .map(|(m, c)| (m.clone(), field.render(*c)))
        .collect();
    ComparisonReport {
        reference_id: table.id.to_string(),
        terms,
        extra_terms,
        fitted_unknowns,
        mismatches,
        anomalies_flagged,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::SampleConstraint;
    use crate::group::build_group;
    use crate::invariant::{clear_relation_slots, fit_relation, minimal_generators};
    use crate::poly::MonomialOrder;

    fn fitted_case(b_zero: bool, seed: u64) -> (Field, Poly, Felt, Felt) {
        let f = Field::new(3, 4, 0).unwrap();
        let a = f
            .sample_parameter(SampleConstraint::NotInPrimeSubfield, seed * 2 + 1)
            .unwrap();
        let b = if b_zero {
            f.zero()
        } else {
            f.sample_parameter(SampleConstraint::Nonzero, seed * 2 + 2).unwrap()
        };
        let g = build_group(&f, a, b);
        let ring = PolyRing::new(f.clone(), &["x", "y", "z"], MonomialOrder::Grevlex);
        let gs = minimal_generators(&g, &ring, 12).unwrap();
        let fitted = fit_relation(&gs, 20).unwrap();
        let rel = if b_zero {
            fitted.poly
        } else {
            let extras = vec![vec![15, 0, 0, 0], vec![12, 1, 0, 0], vec![9, 2, 0, 0]];
            clear_relation_slots(&gs, &fitted, &extras).unwrap().1.poly
        };
        let alpha = f.sub(f.pow(a, 3), a);
        (f, rel, alpha, b)
    }

    #[test]
    fn stored_anomaly_flags_are_exactly_the_degree_outliers() {
        let table = case_b_zero_reference();
        let outliers = table.degree_outliers();
        assert_eq!(outliers, vec![vec![12, 2, 0, 0]]);
        for t in case_b_nonzero_references() {
            assert_eq!(t.degree_outliers(), vec![vec![9, 3, 0, 0]]);
        }
        let flagged: Vec<Mono> = table
            .terms
            .iter()
            .filter(|t| t.anomalous_degree)
            .map(|t| t.slot.clone())
            .collect();
        assert_eq!(flagged, outliers);
    }

    #[test]
    fn quadratic_case_comparison_flags_one_anomaly() {
        let (_, rel, alpha, b) = fitted_case(true, 0);
        let report = compare_with_reference(&rel, &case_b_zero_reference(), alpha, b);
        assert_eq!(report.mismatches, 0);
        assert_eq!(report.anomalies_flagged, 1);
        // Every non-anomalous formula row matches exactly.
        for t in &report.terms {
            if !t.anomalous_degree {
                assert_eq!(t.outcome, TermOutcome::Matched, "{t:?}");
            } else {
                assert_eq!(t.outcome, TermOutcome::MissingInFitted);
            }
        }
        // The anomalous row's true sibling appears as the single extra term.
        assert_eq!(report.extra_terms.len(), 1);
        assert_eq!(report.extra_terms[0].0, vec![12, 3, 0, 0]);
    }

    #[test]
    fn cubic_case_gauges_and_comparisons() {
        let (f, rel, alpha, b) = fitted_case(false, 1);
        let tables = case_b_nonzero_references();
        for table in &tables[..2] {
            let targets: Vec<(Mono, Felt)> = table
                .terms
                .iter()
                .filter(|t| !t.fitted_unknown)
                .map(|t| {
                    (t.slot.clone(), eval_formula(rel.ring(), t.label, alpha, b))
                })
                .collect();
            let gauge = realize_designated_gauge(&rel, &targets).unwrap();
            let report = compare_with_reference(&gauge.transformed, table, alpha, b);
            assert_eq!(report.mismatches, 0, "{report:?}");
            assert!(report.extra_terms.is_empty(), "{report:?}");
            assert_eq!(report.anomalies_flagged, 1);
            // The anomalous unknown c6 reads off as zero.
            assert_eq!(report.fitted_unknowns["c6"], "0");
            assert_eq!(gauge.scales[0], f.one());
        }
        // The variant omitting the mixed term cannot be realized: the
        // mixed-slot coefficient is nonzero in every rescaling, so the
        // comparison under the matching gauge shows it as an extra term.
        let unmixed = &tables[2];
        let mut targets: Vec<(Mono, Felt)> = unmixed
            .terms
            .iter()
            .filter(|t| !t.fitted_unknown)
            .map(|t| (t.slot.clone(), eval_formula(rel.ring(), t.label, alpha, b)))
            .collect();
        assert!(matches!(
            realize_designated_gauge(&rel, &targets),
            Err(ReferenceError::UnrealizableTarget { .. })
        ));
        targets.push((vec![1, 3, 1, 0], eval_formula(rel.ring(), "alpha*b^2", alpha, b)));
        let gauge = realize_designated_gauge(&rel, &targets).unwrap();
        let report = compare_with_reference(&gauge.transformed, unmixed, alpha, b);
        assert_eq!(report.extra_terms.len(), 1);
        assert_eq!(report.extra_terms[0].0, vec![1, 3, 1, 0]);
    }

    #[test]
    fn gauge_errors_on_degenerate_inputs() {
        let (_, rel, _, _) = fitted_case(false, 2);
        let f = rel.ring().field.clone();
        // Missing slot target list.
        assert!(matches!(
            realize_designated_gauge(&rel, &[]),
            Err(ReferenceError::UnrealizableTarget { .. })
        ));
        // A fitted relation without the designated support is rejected.
        let thin = Poly::var(rel.ring(), 0);
        let targets: Vec<(Mono, Felt)> = vec![
            (vec![0, 5, 0, 0], f.one()),
            (vec![0, 0, 3, 0], f.one()),
            (vec![1, 3, 1, 0], f.one()),
            (vec![6, 0, 0, 1], f.one()),
        ];
        assert!(matches!(
            realize_designated_gauge(&thin, &targets),
            Err(ReferenceError::MissingDesignatedSlot { .. })
        ));
    }
}
