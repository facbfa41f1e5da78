//! Machine-readable result structures for verification runs, with a frozen
//! schema version, deterministic field ordering (sorted maps, ordered
//! lists), and two emitters: canonical JSON for golden files and a compact
//! human-readable text summary.

use std::collections::BTreeMap;

use serde::Serialize;

use crate::reference::ComparisonReport;

pub const SCHEMA_VERSION: u32 = 1;

/// Echo of the configuration a report was produced under; part of the
/// deterministic output.
#[derive(Debug, Clone, Serialize)]
pub struct ConfigEcho {
    pub prime: u64,
    pub extension_degree: usize,
    pub seeds: Vec<u64>,
    pub generator_cap: u32,
    pub relation_cap: u64,
    pub groebner_budget: u64,
    pub fail_on_anomalies: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct ChartReport {
    pub name: String,
    pub equation: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct PullbackReport {
    pub chart: String,
    pub divisor: String,
    /// Whether the divisor's strict transform is visible in the chart.
    pub strict_visible: bool,
    /// Orders along the step's new exceptional divisors.
    pub orders: BTreeMap<String, u32>,
}

#[derive(Debug, Clone, Serialize)]
pub struct StepReport {
    pub index: usize,
    pub divisor: String,
    pub center: String,
    pub k_coefficient: i64,
    pub multiplicity: i64,
    pub charts: Vec<ChartReport>,
    pub center_in_singular_locus: bool,
    /// Two-sided radical comparison of the claimed singular locus in each
    /// verified chart, by chart name.
    pub singular_locus_verified: BTreeMap<String, bool>,
    pub pullbacks: Vec<PullbackReport>,
    /// Unit-ideal checks for dropped charts, by chart name.
    pub coverage_ok: BTreeMap<String, bool>,
    /// Transition agreement between kept charts, labelled "a~b".
    pub overlaps_ok: BTreeMap<String, bool>,
}

#[derive(Debug, Clone, Serialize, PartialEq, Eq)]
pub struct LedgerLine {
    pub k_total: i64,
    pub x_total: i64,
    pub discrepancy: i64,
}

#[derive(Debug, Clone, Serialize)]
pub struct TowerReport {
    pub steps: Vec<StepReport>,
    /// Final discrepancy coefficient per divisor, merged across final
    /// charts (consistency across charts is enforced before merging).
    pub final_ledger: BTreeMap<String, i64>,
    /// The canonical/pullback totals behind each final_ledger coefficient.
    pub ledger_detail: BTreeMap<String, LedgerLine>,
    /// Dimension of the singular locus in each final chart; None = smooth.
    pub final_singular_dimension: BTreeMap<String, Option<usize>>,
    pub min_discrepancy: i64,
}

#[derive(Debug, Clone, Serialize)]
pub struct SpecializationReport {
    pub seed: u64,
    /// Rendered specialization parameters (a, b, alpha).
    pub parameters: BTreeMap<String, String>,
    pub group_order: usize,
    pub small: bool,
    /// Stage results are absent when an earlier gate stopped the pipeline.
    pub skipped: Option<String>,
    pub generator_degrees: Vec<u32>,
    pub generators: Vec<String>,
    pub relation: Option<String>,
    pub relation_weighted_degree: Option<u64>,
    pub generic_rank: Option<usize>,
    pub comparisons: Vec<ComparisonReport>,
    /// Notes on coefficient-gauge realizations (e.g. a reference variant
    /// whose designated coefficients are unreachable by rescaling).
    pub gauge_notes: Vec<String>,
    pub designated_shift_rigid: Option<bool>,
    pub tower: Option<TowerReport>,
    pub errors: Vec<String>,
    pub not_log_canonical: Option<bool>,
}

#[derive(Debug, Clone, Serialize)]
pub struct CaseReport {
    pub case: String,
    pub specializations: Vec<SpecializationReport>,
    pub unanimous: bool,
    pub verdict: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct CentralizerSection {
    pub sl3_order: u64,
    pub centralizer_order: usize,
    pub equals_span_form: bool,
    pub abelian: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct SubgroupSection {
    pub rank: u32,
    pub order3_elements: usize,
    pub subgroups: usize,
    pub small_subgroups: usize,
    pub non_small_subgroups: usize,
    /// The literal claim: every small subgroup of this order is elementary
    /// abelian. Vacuously true when no small subgroup exists.
    pub all_small_elementary_abelian: bool,
    /// The strengthened check: every enumerated subgroup of this order is
    /// elementary abelian, small or not.
    pub all_enumerated_elementary_abelian: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct LemmaReport {
    pub field: String,
    pub centralizer: CentralizerSection,
    pub subgroup_sections: Vec<SubgroupSection>,
}

#[derive(Debug, Clone, Serialize)]
pub struct RstVectorReport {
    pub order: i64,
    pub exps: Vec<i64>,
    pub age: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct RstReport {
    pub vectors: Vec<RstVectorReport>,
    pub classification: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct InvariantsSection {
    pub case: String,
    pub generator_degrees: Vec<u32>,
    pub dimensions_by_degree: Vec<usize>,
}

#[derive(Debug, Clone, Serialize)]
pub struct VerificationReport {
    pub schema_version: u32,
    pub config: ConfigEcho,
    pub cases: Vec<CaseReport>,
    pub lemmas: Option<LemmaReport>,
    pub rst: Option<RstReport>,
    pub invariants: Vec<InvariantsSection>,
    /// Claim id -> one-line verdict.
    pub verdicts: BTreeMap<String, String>,
}

impl VerificationReport {
    pub fn new(config: ConfigEcho) -> VerificationReport {
        VerificationReport {
            schema_version: SCHEMA_VERSION,
            config,
            cases: Vec::new(),
            lemmas: None,
            rst: None,
            invariants: Vec::new(),
            verdicts: BTreeMap::new(),
        }
    }

    /// Canonical structured serialization: the golden-file target.
    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }

    /// Compact human-readable summary.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let push = |out: &mut String, line: &str| {
            out.push_str(line);
            out.push('\n');
        };
        push(&mut out, &format!("schema version {}", self.schema_version));
        for case in &self.cases {
            push(&mut out, "");
            push(
                &mut out,
                &format!("case {}: {} specializations", case.case, case.specializations.len()),
            );
            if let Some(first) = case.specializations.iter().find(|s| s.tower.is_some()) {
                let tower = first.tower.as_ref().expect("checked");
                let mults: Vec<i64> = tower.steps.iter().map(|s| s.multiplicity).collect();
                let ks: Vec<i64> = tower.steps.iter().map(|s| s.k_coefficient).collect();
                push(&mut out, &format!("  tower multiplicities: {mults:?}"));
                push(&mut out, &format!("  tower k-coefficients: {ks:?}"));
                for step in &tower.steps {
                    push(
                        &mut out,
                        &format!(
                            "  step {} ({}): center {}, multiplicity {}, k {}",
                            step.index, step.divisor, step.center, step.multiplicity, step.k_coefficient
                        ),
                    );
                }
                for (name, line) in &tower.ledger_detail {
                    push(
                        &mut out,
                        &format!(
                            "  ledger {name}: k_total {}, x_total {}, discrepancy {}",
                            line.k_total, line.x_total, line.discrepancy
                        ),
                    );
                }
            }
            push(&mut out, &format!("  unanimous: {}", case.unanimous));
            push(&mut out, &format!("  verdict: {}", case.verdict));
        }
        if let Some(lemmas) = &self.lemmas {
            push(&mut out, "");
            push(&mut out, &format!("lemmas over {}", lemmas.field));
            push(
                &mut out,
                &format!(
                    "  centralizer: order {}, span form {}, abelian {}",
                    lemmas.centralizer.centralizer_order,
                    lemmas.centralizer.equals_span_form,
                    lemmas.centralizer.abelian
                ),
            );
            for s in &lemmas.subgroup_sections {
                push(
                    &mut out,
                    &format!(
                        "  rank {}: {} subgroups ({} small, {} non-small), all small elementary abelian: {}, all elementary abelian: {}",
                        s.rank,
                        s.subgroups,
                        s.small_subgroups,
                        s.non_small_subgroups,
                        s.all_small_elementary_abelian,
                        s.all_enumerated_elementary_abelian
                    ),
                );
            }
        }
        if let Some(rst) = &self.rst {
            push(&mut out, "");
            for v in &rst.vectors {
                push(&mut out, &format!("age(order {}, exps {:?}) = {}", v.order, v.exps, v.age));
            }
            push(&mut out, &format!("classification: {}", rst.classification));
        }
        for inv in &self.invariants {
            push(&mut out, "");
            push(
                &mut out,
                &format!(
                    "invariants {}: generator degrees {:?}, dimensions {:?}",
                    inv.case, inv.generator_degrees, inv.dimensions_by_degree
                ),
            );
        }
        for (claim, verdict) in &self.verdicts {
            push(&mut out, &format!("verdict[{claim}]: {verdict}"));
        }
        out
    }
}
