//! Chart-based blow-up calculus for hypersurfaces under coordinate-subspace
//! centers: strict transforms with exact multiplicities, exceptional-divisor
//! bookkeeping through a tower of charts, singular-locus verification via
//! Groebner bases, chart-overlap transition checks on localizations, and the
//! integer discrepancy ledger folding a tower into per-divisor coefficients.

use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use crate::groebner::{
    buchberger, ideal_membership, is_unit_ideal, loci_equal, GroebnerConfig, GroebnerError,
    LociComparison,
};
use crate::poly::{Mono, Poly, PolyRing};

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum BlowupError {
    /// A hypersurface or local equation is identically zero.
    ZeroPolynomial,
    /// The requested center is not a codimension >= 2 coordinate subspace.
    NonCoordinateCenter { detail: String },
    /// A chart specification is malformed (bad pivot, renames, or names).
    InvalidChartSpec { detail: String },
    /// The tower's bookkeeping does not cohere (multiplicities, divisor
    /// names, or pullback orders disagree).
    InconsistentTower { detail: String },
    Groebner(GroebnerError),
}

impl fmt::Display for BlowupError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            BlowupError::ZeroPolynomial => write!(f, "zero polynomial has no strict transform"),
            BlowupError::NonCoordinateCenter { detail } => {
                write!(f, "unsupported blow-up center: {detail}")
            }
            BlowupError::InvalidChartSpec { detail } => {
                write!(f, "invalid chart specification: {detail}")
            }
            BlowupError::InconsistentTower { detail } => {
                write!(f, "inconsistent tower: {detail}")
            }
            BlowupError::Groebner(e) => write!(f, "{e}"),
        }
    }
}

impl std::error::Error for BlowupError {}

impl From<GroebnerError> for BlowupError {
    fn from(e: GroebnerError) -> BlowupError {
        BlowupError::Groebner(e)
    }
}

/// One affine coordinate patch of a tower stage, carrying the strict
/// transform, the visible exceptional divisors with their local equations,
/// the composed pullbacks of every divisor's birth equation, and the
/// composed morphism to the base.
#[derive(Debug, Clone)]
pub struct Chart {
    pub name: String,
    pub ring: Arc<PolyRing>,
    pub hypersurface: Poly,
    /// Divisor name -> local equation of its strict transform here
    /// (divisors whose strict transform misses the chart are absent).
    pub exceptional_here: BTreeMap<String, Poly>,
    /// Divisor name -> full pullback to this chart of the divisor's birth
    /// local equation (composed through every intermediate map).
    pub birth_pullbacks: BTreeMap<String, Poly>,
    /// Images of the base variables under the composed morphism to the base.
    pub base_images: Vec<Poly>,
    pub base_ring: Arc<PolyRing>,
    pub base_hypersurface: Poly,
}

impl Chart {
    /// The starting chart of a tower: affine space with the hypersurface.
    pub fn base(name: &str, ring: &Arc<PolyRing>, hypersurface: Poly) -> Result<Chart, BlowupError> {
        if hypersurface.is_zero() {
            return Err(BlowupError::ZeroPolynomial);
        }
        let base_images = (0..ring.num_vars()).map(|i| Poly::var(ring, i)).collect();
        Ok(Chart {
            name: name.to_string(),
            ring: ring.clone(),
            hypersurface: hypersurface.clone(),
            exceptional_here: BTreeMap::new(),
            birth_pullbacks: BTreeMap::new(),
            base_images,
            base_ring: ring.clone(),
            base_hypersurface: hypersurface,
        })
    }
}

/// Substitution data of one blow-up chart map: `images[i]` is the image of
/// source variable `i` in the new chart's ring.
#[derive(Debug, Clone)]
pub struct ChartMap {
    pub images: Vec<Poly>,
}

/// Requested output chart of a blow-up: which center variable becomes the
/// exceptional coordinate, and fresh names for the other center variables.
#[derive(Debug, Clone)]
pub struct ChartSpec {
    pub name: String,
    pub pivot: usize,
    /// (variable index, new name) for every center variable except the pivot.
    pub renames: Vec<(usize, String)>,
}

impl ChartSpec {
    pub fn new(name: &str, pivot: usize, renames: &[(usize, &str)]) -> ChartSpec {
        ChartSpec {
            name: name.to_string(),
            pivot,
            renames: renames.iter().map(|(i, n)| (*i, n.to_string())).collect(),
        }
    }
}

#[derive(Debug, Clone)]
pub struct BlownChart {
    pub chart: Chart,
    pub map: ChartMap,
    pub multiplicity: u32,
}

#[derive(Debug, Clone)]
pub struct BlowupStep {
    pub divisor: String,
    pub center: Vec<usize>,
    /// Contribution of this blow-up to the canonical class: codim - 1.
    pub k_coefficient: i64,
    /// Vanishing order of the previous hypersurface along the center
    /// (agrees across all charts of the step).
    pub multiplicity: i64,
    pub charts: Vec<BlownChart>,
}

/// Strict transform of `f` through a chart map: the pullback with the full
/// power of the exceptional coordinate removed. Exactness is verified by
/// re-multiplication.
pub fn strict_transform(f: &Poly, map: &ChartMap, pivot: usize) -> Result<(Poly, u32), BlowupError> {
    if f.is_zero() {
        return Err(BlowupError::ZeroPolynomial);
    }
    let pull = f.substitute(&map.images).expect("chart map arity matches source ring");
    let mult = match pull.vanishing_order(pivot) {
        Some(m) => m,
        None => return Err(BlowupError::ZeroPolynomial),
    };
    let strict = pull.divide_by_var_power(pivot, mult).expect("order just computed");
    assert!(
        strict.mul_var_power(pivot, mult) == pull,
        "strict transform re-multiplication must reproduce the pullback"
    );
    Ok((strict, mult))
}

/// Formal pullback of a divisor through one chart map: orders along the
/// chart's exceptional coordinates plus the strict part (absent when the
/// strict transform misses the chart).
#[derive(Debug, Clone)]
pub struct PullbackLine {
    pub divisor: String,
    pub strict_part: Option<Poly>,
    pub exceptional_orders: BTreeMap<String, u32>,
}

pub fn pullback_exceptional(
    divisor: &str,
    local_eq: &Poly,
    map: &ChartMap,
    exceptional: &[(String, usize)],
) -> Result<PullbackLine, BlowupError> {
    if local_eq.is_zero() {
        return Err(BlowupError::ZeroPolynomial);
    }
    let mut rest = local_eq.substitute(&map.images).expect("chart map arity");
    let mut orders = BTreeMap::new();
    for (name, var) in exceptional {
        let k = rest.vanishing_order(*var).ok_or(BlowupError::ZeroPolynomial)?;
        if k > 0 {
            rest = rest.divide_by_var_power(*var, k).expect("order just computed");
        }
        orders.insert(name.clone(), k);
    }
    let strict_part = if rest.is_constant() { None } else { Some(rest) };
    Ok(PullbackLine {
        divisor: divisor.to_string(),
        strict_part,
        exceptional_orders: orders,
    })
}

/// Blow up a coordinate subspace of a chart, producing the requested
/// standard charts with strict transforms and updated divisor bookkeeping.
pub fn blowup_coordinate_center(
    source: &Chart,
    center: &[usize],
    divisor: &str,
    specs: &[ChartSpec],
) -> Result<BlowupStep, BlowupError> {
    let n = source.ring.num_vars();
    let mut sorted = center.to_vec();
    sorted.sort_unstable();
    sorted.dedup();
    if sorted.len() < 2 || sorted.len() != center.len() || sorted.iter().any(|&v| v >= n) {
        return Err(BlowupError::NonCoordinateCenter {
            detail: format!(
                "center must be >= 2 distinct chart variables, got {center:?} in a ring with {n}"
            ),
        });
    }
    if source.birth_pullbacks.contains_key(divisor) {
        return Err(BlowupError::InvalidChartSpec {
            detail: format!("divisor name {divisor} already in use"),
        });
    }
    let mut charts = Vec::with_capacity(specs.len());
    let mut mults: Vec<u32> = Vec::new();
    for spec in specs {
        if !sorted.contains(&spec.pivot) {
            return Err(BlowupError::InvalidChartSpec {
                detail: format!("pivot {} is not a center variable", spec.pivot),
            });
        }
        let mut expected: Vec<usize> = sorted.iter().copied().filter(|&v| v != spec.pivot).collect();
        let mut renamed: Vec<usize> = spec.renames.iter().map(|(i, _)| *i).collect();
        renamed.sort_unstable();
        expected.sort_unstable();
        if renamed != expected {
            return Err(BlowupError::InvalidChartSpec {
                detail: format!(
                    "chart {} must rename exactly the non-pivot center variables",
                    spec.name
                ),
            });
        }
        let mut names: Vec<String> = source.ring.vars.clone();
        for (i, new_name) in &spec.renames {
            if source.ring.vars.iter().any(|v| v == new_name) {
                return Err(BlowupError::InvalidChartSpec {
                    detail: format!("new variable name {new_name} collides with an existing one"),
                });
            }
            names[*i] = new_name.clone();
        }
        let name_refs: Vec<&str> = names.iter().map(|s| s.as_str()).collect();
        let ring = PolyRing::new(source.ring.field.clone(), &name_refs, source.ring.order);
        let images: Vec<Poly> = (0..n)
            .map(|j| {
                if j == spec.pivot || !sorted.contains(&j) {
                    Poly::var(&ring, j)
                } else {
                    Poly::var(&ring, j).mul(&Poly::var(&ring, spec.pivot)).expect("same ring")
                }
            })
            .collect();
        let map = ChartMap { images };
        let (strict, mult) = strict_transform(&source.hypersurface, &map, spec.pivot)?;
        let mut exceptional_here = BTreeMap::new();
        let exc_list = vec![(divisor.to_string(), spec.pivot)];
        for (prev, eq) in &source.exceptional_here {
            let line = pullback_exceptional(prev, eq, &map, &exc_list)?;
            if let Some(strict_eq) = line.strict_part {
                exceptional_here.insert(prev.clone(), strict_eq);
            }
        }
        exceptional_here.insert(divisor.to_string(), Poly::var(&ring, spec.pivot));
        let mut birth_pullbacks = BTreeMap::new();
        for (prev, eq) in &source.birth_pullbacks {
            birth_pullbacks.insert(prev.clone(), eq.substitute(&map.images).expect("arity"));
        }
        birth_pullbacks.insert(divisor.to_string(), Poly::var(&ring, spec.pivot));
        let base_images: Vec<Poly> = source
            .base_images
            .iter()
            .map(|p| p.substitute(&map.images).expect("arity"))
            .collect();
        let chart = Chart {
            name: spec.name.clone(),
            ring,
            hypersurface: strict,
            exceptional_here,
            birth_pullbacks,
            base_images,
            base_ring: source.base_ring.clone(),
            base_hypersurface: source.base_hypersurface.clone(),
        };
        mults.push(mult);
        charts.push(BlownChart { chart, map, multiplicity: mult });
    }
    if let Some(&first) = mults.first() {
        if mults.iter().any(|&m| m != first) {
            return Err(BlowupError::InconsistentTower {
                detail: format!("charts of one blow-up disagree on multiplicity: {mults:?}"),
            });
        }
    }
    Ok(BlowupStep {
        divisor: divisor.to_string(),
        center: sorted.clone(),
        k_coefficient: sorted.len() as i64 - 1,
        multiplicity: mults.first().copied().unwrap_or(0) as i64,
        charts,
    })
}

/// Per-divisor accumulated coefficients on the final stage: `k_total` from
/// the canonical-class chain, `x_total` from the hypersurface pullbacks,
/// and the adjunction discrepancy `k_total - x_total`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LedgerEntry {
    pub k_total: i64,
    pub x_total: i64,
    pub discrepancy: i64,
}

#[derive(Debug, Clone)]
pub struct DivisorLedger {
    pub entries: BTreeMap<String, LedgerEntry>,
}

/// Summary of one tower step as needed by the ledger.
#[derive(Debug, Clone)]
pub struct StepSummary {
    pub divisor: String,
    pub k_coefficient: i64,
    pub multiplicity: i64,
}

impl StepSummary {
    pub fn of(step: &BlowupStep) -> StepSummary {
        StepSummary {
            divisor: step.divisor.clone(),
            k_coefficient: step.k_coefficient,
            multiplicity: step.multiplicity,
        }
    }
}

/// The chart variable cutting out a divisor, which must be a single monic
/// variable in this chart.
fn divisor_variable(chart: &Chart, name: &str) -> Result<usize, BlowupError> {
    let eq = chart.exceptional_here.get(name).ok_or_else(|| BlowupError::InconsistentTower {
        detail: format!("divisor {name} is not visible in chart {}", chart.name),
    })?;
    let terms = eq.terms();
    if terms.len() == 1 {
        let (m, _) = &terms[0];
        let mut nonzero = m.iter().enumerate().filter(|(_, &e)| e != 0);
        if let Some((v, &1)) = nonzero.next() {
            if nonzero.next().is_none() {
                return Ok(v);
            }
        }
    }
    Err(BlowupError::InconsistentTower {
        detail: format!("divisor {name} has a non-coordinate local equation in chart {}", chart.name),
    })
}

/// Fold a tower into per-divisor discrepancies as seen in one final chart.
///
/// For each divisor visible here, the coefficient of the canonical-class
/// chain is the order-weighted sum of the step contributions, with orders
/// read off the composed pullbacks of each divisor's birth equation; the
/// hypersurface total is cross-checked against the order of the composed
/// base-hypersurface pullback, so a wrong multiplicity cannot slip through.
pub fn fold_ledger(final_chart: &Chart, steps: &[StepSummary]) -> Result<DivisorLedger, BlowupError> {
    for s in steps {
        if !final_chart.birth_pullbacks.contains_key(&s.divisor) {
            return Err(BlowupError::InconsistentTower {
                detail: format!("step divisor {} has no recorded pullback", s.divisor),
            });
        }
    }
    let base_pull = final_chart
        .base_hypersurface
        .substitute(&final_chart.base_images)
        .expect("base arity");
    let mut entries = BTreeMap::new();
    for name in final_chart.exceptional_here.keys() {
        let v = divisor_variable(final_chart, name)?;
        let mut k_total = 0i64;
        let mut x_total = 0i64;
        for s in steps {
            let pull = &final_chart.birth_pullbacks[&s.divisor];
            let ord = pull.vanishing_order(v).ok_or(BlowupError::ZeroPolynomial)? as i64;
            k_total += s.k_coefficient * ord;
            x_total += s.multiplicity * ord;
        }
        let direct = base_pull.vanishing_order(v).ok_or(BlowupError::ZeroPolynomial)? as i64;
        if direct != x_total {
            return Err(BlowupError::InconsistentTower {
                detail: format!(
                    "hypersurface pullback order {direct} along {name} disagrees with the ledger total {x_total}"
                ),
            });
        }
        entries.insert(
            name.clone(),
            LedgerEntry { k_total, x_total, discrepancy: k_total - x_total },
        );
    }
    Ok(DivisorLedger { entries })
}

/// Generators of the singular locus of the chart hypersurface: the
/// polynomial together with its nonzero partial derivatives.
pub fn jacobian_ideal(chart: &Chart) -> Vec<Poly> {
    let mut gens = vec![chart.hypersurface.clone()];
    for v in 0..chart.ring.num_vars() {
        let d = chart.hypersurface.partial_derivative(v);
        if !d.is_zero() {
            gens.push(d);
        }
    }
    gens
}

/// Compare the chart's singular locus with a claimed ideal, both radical
/// inclusions reported separately.
pub fn verify_singular_locus(
    chart: &Chart,
    claimed: &[Poly],
    cfg: &GroebnerConfig,
) -> Result<LociComparison, BlowupError> {
    Ok(loci_equal(&jacobian_ideal(chart), claimed, cfg)?)
}

/// The chart hypersurface is smooth iff its Jacobian ideal is the unit ideal.
pub fn verify_smooth(chart: &Chart, cfg: &GroebnerConfig) -> Result<bool, BlowupError> {
    let gb = buchberger(&jacobian_ideal(chart), cfg)?;
    Ok(is_unit_ideal(&gb))
}

/// Dimension of the singular locus; `None` when it is empty (smooth chart).
/// Regularity in codimension one for a 3-fold hypersurface means <= 1.
pub fn singular_locus_dimension(
    chart: &Chart,
    cfg: &GroebnerConfig,
) -> Result<Option<usize>, BlowupError> {
    Ok(crate::groebner::ideal_dimension_or_empty(&jacobian_ideal(chart), cfg)?)
}

/// A dropped chart adds nothing when the singular locus of its strict
/// transform avoids the region invisible from the kept charts, i.e. the
/// ideal (hypersurface, excluded coordinates) is the unit ideal.
pub fn coverage_check(
    dropped: &Chart,
    excluded: &[usize],
    cfg: &GroebnerConfig,
) -> Result<bool, BlowupError> {
    let mut gens = vec![dropped.hypersurface.clone()];
    for &v in excluded {
        gens.push(Poly::var(&dropped.ring, v));
    }
    let gb = buchberger(&gens, cfg)?;
    Ok(is_unit_ideal(&gb))
}

/// Every Jacobian generator lies in the (monomial, hence radical) ideal of
/// the center variables, i.e. the center sits inside the singular locus.
pub fn center_in_singular_locus(
    chart: &Chart,
    center: &[usize],
    cfg: &GroebnerConfig,
) -> Result<bool, BlowupError> {
    let basis: Vec<Poly> = center.iter().map(|&v| Poly::var(&chart.ring, v)).collect();
    for g in jacobian_ideal(chart) {
        if !ideal_membership(&g, &basis, cfg)? {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Image of a source variable in a localized target chart: a polynomial
/// numerator over a monomial denominator in the inverted variables.
#[derive(Debug, Clone)]
pub struct LaurentImage {
    pub numerator: Poly,
    pub denominator: Mono,
}

impl LaurentImage {
    pub fn poly(p: Poly) -> LaurentImage {
        let n = p.ring().num_vars();
        LaurentImage { numerator: p, denominator: vec![0; n] }
    }

    pub fn fraction(numerator: Poly, var: usize, power: u32) -> LaurentImage {
        let mut denominator = vec![0; numerator.ring().num_vars()];
        denominator[var] = power;
        LaurentImage { numerator, denominator }
    }
}

/// Substitute through a localized transition, clearing denominators: the
/// result equals the true image times a monomial in the inverted variables.
pub fn transport_through_localization(
    f: &Poly,
    images: &[LaurentImage],
    target: &Arc<PolyRing>,
) -> Result<Poly, BlowupError> {
    if f.is_zero() {
        return Err(BlowupError::ZeroPolynomial);
    }
    assert_eq!(f.ring().num_vars(), images.len(), "one image per source variable");
    let n = target.num_vars();
    // Numerator and denominator exponent per term.
    let mut parts: Vec<(Poly, Mono)> = Vec::with_capacity(f.terms().len());
    let mut common: Mono = vec![0; n];
    for (m, c) in f.terms() {
        let mut num = Poly::constant(target, *c);
        let mut den: Mono = vec![0; n];
        for (i, &e) in m.iter().enumerate() {
            if e == 0 {
                continue;
            }
            num = num.mul(&images[i].numerator.pow(e)).expect("same ring");
            for (dj, ij) in den.iter_mut().zip(&images[i].denominator) {
                *dj += ij * e;
            }
        }
        for (cj, dj) in common.iter_mut().zip(&den) {
            *cj = (*cj).max(*dj);
        }
        parts.push((num, den));
    }
    let mut out = Poly::zero(target);
    for (num, den) in parts {
        let clear: Mono = common.iter().zip(&den).map(|(c, d)| c - d).collect();
        let scaled = num
            .mul(&Poly::monomial(target, &clear, target.field.one()))
            .expect("same ring");
        out = out.add(&scaled).expect("same ring");
    }
    Ok(out)
}

/// Divide out the full power of each invertible variable and scale monic:
/// the canonical representative modulo units of the localization.
pub fn unit_normalize(f: &Poly, invertible: &[usize]) -> Poly {
    let mut g = f.clone();
    for &v in invertible {
        if let Some(k) = g.vanishing_order(v) {
            if k > 0 {
                g = g.divide_by_var_power(v, k).expect("order just computed");
            }
        }
    }
    g.monic()
}

/// Two local equations cut out the same hypersurface on the overlap iff
/// they agree up to a unit, i.e. a constant times a monomial in the
/// inverted variables.
pub fn equal_up_to_unit_monomial(a: &Poly, b: &Poly, invertible: &[usize]) -> bool {
    unit_normalize(a, invertible) == unit_normalize(b, invertible)
}
