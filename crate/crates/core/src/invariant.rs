//! Degree-bounded invariant theory for finite matrix groups acting on a
//! polynomial ring: per-degree invariant bases by exact linear algebra,
//! minimal generator extraction with a deterministic selection rule, fitting
//! of the hypersurface relation among four generators, gauge normalization
//! of the top generator, and a generic rank check of the generator map.

use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::field::{Felt, Field};
use crate::group::{act_on_poly, orbit_product, MatrixGroup};
use crate::linalg::Matrix;
use crate::poly::{monomials_of_degree, Mono, MonomialOrder, Poly, PolyRing};

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum InvariantError {
    /// A generator pick landed exactly at the degree cap, so completeness
    /// above the cap cannot be certified; carries the number found so far.
    CapTooSmall { cap: u32, found: usize },
    /// No linear relation among generator monomials up to the weighted cap.
    NoRelationFound { cap: u64, suggested_cap: u64 },
    /// A requested relation slot cannot be absorbed by shifting the top
    /// generator inside the subalgebra of the lower ones.
    SlotNotClearable { slot: Mono },
}

impl fmt::Display for InvariantError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            InvariantError::CapTooSmall { cap, found } => {
                write!(f, "generator search hit the degree cap {cap} with {found} picks; raise the cap to certify completeness")
            }
            InvariantError::NoRelationFound { cap, suggested_cap } => {
                write!(f, "no relation up to weighted degree {cap}; try cap {suggested_cap}")
            }
            InvariantError::SlotNotClearable { slot } => {
                write!(f, "relation term {slot:?} is not absorbable by a top-generator shift")
            }
        }
    }
}

impl std::error::Error for InvariantError {}

/// Row-reduced span of coefficient vectors with canonical representatives.
struct Echelon {
    field: Field,
    rows: Vec<Vec<Felt>>,
    pivots: Vec<usize>,
}

impl Echelon {
    fn new(field: &Field) -> Echelon {
        Echelon { field: field.clone(), rows: Vec::new(), pivots: Vec::new() }
    }

    fn reduce(&self, v: &mut [Felt]) {
        for (row, &p) in self.rows.iter().zip(&self.pivots) {
            let c = v[p];
            if !self.field.is_zero(c) {
                for (vi, ri) in v.iter_mut().zip(row) {
                    *vi = self.field.sub(*vi, self.field.mul(c, *ri));
                }
            }
        }
    }

    /// Reduce and, if independent, insert; returns the canonical residue.
    fn insert(&mut self, mut v: Vec<Felt>) -> Option<Vec<Felt>> {
        self.reduce(&mut v);
        let pivot = v.iter().position(|c| !self.field.is_zero(*c))?;
        let inv = self.field.inv(v[pivot]).expect("nonzero pivot");
        for c in v.iter_mut() {
            *c = self.field.mul(*c, inv);
        }
        // Keep full reduction: clear this pivot column from existing rows.
        for row in self.rows.iter_mut() {
            let c = row[pivot];
            if !self.field.is_zero(c) {
                for (ri, vi) in row.iter_mut().zip(&v) {
                    *ri = self.field.sub(*ri, self.field.mul(c, *vi));
                }
            }
        }
        let at = self.pivots.iter().position(|&p| p > pivot).unwrap_or(self.rows.len());
        self.rows.insert(at, v.clone());
        self.pivots.insert(at, pivot);
        Some(v)
    }

    fn dim(&self) -> usize {
        self.rows.len()
    }
}

/// Monomials of total degree `d`, sorted descending in the ring's order,
/// with an index lookup; the shared coordinate system for degree-d spaces.
fn degree_frame(ring: &Arc<PolyRing>, d: u32) -> (Vec<Mono>, BTreeMap<Mono, usize>) {
    let mut monos = monomials_of_degree(ring.num_vars(), d);
    monos.sort_by(|a, b| ring.cmp_mono(b, a));
    let index: BTreeMap<Mono, usize> =
        monos.iter().enumerate().map(|(i, m)| (m.clone(), i)).collect();
    (monos, index)
}

fn poly_to_vec(f: &Poly, index: &BTreeMap<Mono, usize>, width: usize) -> Vec<Felt> {
    let mut v = vec![Felt::ZERO; width];
    for (m, c) in f.terms() {
        v[*index.get(m).expect("monomial outside degree frame")] = *c;
    }
    v
}

fn vec_to_poly(ring: &Arc<PolyRing>, monos: &[Mono], v: &[Felt]) -> Poly {
    let field = &ring.field;
    let terms: Vec<(Mono, Felt)> = monos
        .iter()
        .zip(v)
        .filter(|(_, c)| !field.is_zero(**c))
        .map(|(m, c)| (m.clone(), *c))
        .collect();
    Poly::from_terms(ring, terms)
}

/// Basis of the degree-`d` invariant subspace: the simultaneous kernel of
/// `act(g, .) - id` over the group generators, in canonical echelon form
/// (each basis element monic at its leading monomial).
pub fn invariant_basis(group: &MatrixGroup, ring: &Arc<PolyRing>, d: u32) -> Vec<Poly> {
    let field = &group.field;
    let (monos, index) = degree_frame(ring, d);
    let width = monos.len();
    let mut stacked: Vec<Vec<Felt>> = Vec::new();
    for g in &group.generators {
        // Column j holds the image of monomial j; subtract the identity.
        let mut block = vec![vec![Felt::ZERO; width]; width];
        for (j, m) in monos.iter().enumerate() {
            let image = act_on_poly(field, g, &Poly::monomial(ring, m, field.one()))
                .expect("action stays in the ring");
            for (im, ic) in image.terms() {
                block[index[im]][j] = *ic;
            }
            block[j][j] = field.sub(block[j][j], field.one());
        }
        stacked.extend(block);
    }
    if stacked.is_empty() {
        // No generators: everything is invariant.
        return monos
            .iter()
            .map(|m| Poly::monomial(ring, m, field.one()))
            .collect();
    }
    let mat = Matrix::from_fn(stacked.len(), width, |i, j| stacked[i][j]);
    let kernel = mat.kernel_basis(field);
    let mut ech = Echelon::new(field);
    let mut out = Vec::new();
    for v in kernel {
        if let Some(canon) = ech.insert(v.clone()) {
            out.push(canon);
        }
    }
    // Canonical order: by pivot, i.e. descending leading monomial.
    let mut rows: Vec<(usize, Vec<Felt>)> = out
        .into_iter()
        .map(|v| {
            let p = v.iter().position(|c| !field.is_zero(*c)).expect("nonzero row");
            (p, v)
        })
        .collect();
    rows.sort_by_key(|(p, _)| *p);
    rows.iter().map(|(_, v)| vec_to_poly(ring, &monos, v)).collect()
}

/// Per-degree invariant dimensions for degrees `1..=max_degree`.
pub fn invariant_dimensions(group: &MatrixGroup, ring: &Arc<PolyRing>, max_degree: u32) -> Vec<usize> {
    (1..=max_degree)
        .map(|d| invariant_basis(group, ring, d).len())
        .collect()
}

#[derive(Debug, Clone)]
pub struct Generator {
    pub name: String,
    pub poly: Poly,
    pub degree: u32,
}

#[derive(Debug, Clone)]
pub struct GeneratorSet {
    pub ring: Arc<PolyRing>,
    pub gens: Vec<Generator>,
}

impl GeneratorSet {
    pub fn degrees(&self) -> Vec<u32> {
        self.gens.iter().map(|g| g.degree).collect()
    }

    /// The polynomial ring whose variables are the generator names.
    pub fn relation_ring(&self) -> Arc<PolyRing> {
        let names: Vec<&str> = self.gens.iter().map(|g| g.name.as_str()).collect();
        PolyRing::new(self.ring.field.clone(), &names, MonomialOrder::Grevlex)
    }
}

/// Minimal generators of the invariant ring up to the degree cap.
///
/// Deterministic selection per degree: first the orbit products of the
/// variables in reverse order (they realize the classical norm-type
/// invariants when independent), then canonical echelon representatives of
/// the remaining invariant space modulo the subalgebra of earlier picks.
/// Errors with `CapTooSmall` when a pick lands exactly at the cap, since
/// completeness beyond the cap is then uncertified.
pub fn minimal_generators(
    group: &MatrixGroup,
    ring: &Arc<PolyRing>,
    cap: u32,
) -> Result<GeneratorSet, InvariantError> {
    let field = &group.field;
    let mut gens: Vec<Generator> = Vec::new();
    // Echelonized degree component of the subalgebra generated by the picks.
    let mut sub: Vec<Vec<Poly>> = vec![Vec::new(); cap as usize + 1];
    let mut landed_at_cap = false;

    for d in 1..=cap {
        let (monos, index) = degree_frame(ring, d);
        let width = monos.len();
        let mut ech = Echelon::new(field);
        for gen in &gens {
            let e = gen.degree;
            if e > d {
                continue;
            }
            if e == d {
                ech.insert(poly_to_vec(&gen.poly, &index, width));
                continue;
            }
            for s in &sub[(d - e) as usize] {
                let p = gen.poly.mul(s).expect("same ring");
                ech.insert(poly_to_vec(&p, &index, width));
            }
        }
        let sub_dim_before = ech.dim();
        let inv = invariant_basis(group, ring, d);
        let mut picks: Vec<Poly> = Vec::new();

        if sub_dim_before < inv.len() {
            // Try the orbit products of the variables, last variable first.
            for v in (0..ring.num_vars()).rev() {
                let n = orbit_product(group, &Poly::var(ring, v)).expect("same field");
                if n.total_degree() != Some(d as u64) {
                    continue;
                }
                let vec = poly_to_vec(&n, &index, width);
                if ech.insert(vec).is_some() {
                    picks.push(n);
                }
            }
            // Fill the remaining deficit with echelon representatives.
            for f in &inv {
                let vec = poly_to_vec(f, &index, width);
                if let Some(canon) = ech.insert(vec) {
                    picks.push(vec_to_poly(ring, &monos, &canon));
                }
            }
        }
        for p in picks {
            debug_assert!(crate::group::is_invariant(group, &p).unwrap());
            gens.push(Generator {
                name: format!("x{}", gens.len() + 1),
                poly: p,
                degree: d,
            });
            if d == cap {
                landed_at_cap = true;
            }
        }
        // Record the full degree-d subalgebra component for later degrees.
        sub[d as usize] = ech
            .rows
            .iter()
            .map(|v| vec_to_poly(ring, &monos, v))
            .collect();
    }

    if landed_at_cap {
        return Err(InvariantError::CapTooSmall { cap, found: gens.len() });
    }
    Ok(GeneratorSet { ring: ring.clone(), gens })
}

#[derive(Debug, Clone)]
pub struct FittedRelation {
    pub ring: Arc<PolyRing>,
    pub poly: Poly,
    /// Generator degrees, i.e. the weights under which the relation is
    /// homogeneous.
    pub weights: Vec<u64>,
    pub weighted_degree: u64,
}

/// Exponent vectors in `weights.len()` variables of weighted degree `w`.
fn weighted_monomials(weights: &[u64], w: u64) -> Vec<Mono> {
    fn rec(weights: &[u64], idx: usize, rest: u64, current: &mut Mono, out: &mut Vec<Mono>) {
        if idx == weights.len() {
            if rest == 0 {
                out.push(current.clone());
            }
            return;
        }
        let wi = weights[idx];
        let max = rest / wi;
        for e in 0..=max {
            current[idx] = e as u32;
            rec(weights, idx + 1, rest - e * wi, current, out);
        }
        current[idx] = 0;
    }
    let mut out = Vec::new();
    let mut current = vec![0u32; weights.len()];
    rec(weights, 0, w, &mut current, &mut out);
    out
}

/// Evaluate a monomial in the generators as a polynomial in their ring,
/// with a per-generator power cache.
fn generator_monomial(gs: &GeneratorSet, mono: &Mono, cache: &mut Vec<Vec<Poly>>) -> Poly {
    let mut acc = Poly::one(&gs.ring);
    for (i, &e) in mono.iter().enumerate() {
        if e == 0 {
            continue;
        }
        while cache[i].len() <= e as usize {
            let next = cache[i].last().unwrap().mul(&gs.gens[i].poly).expect("same ring");
            cache[i].push(next);
        }
        acc = acc.mul(&cache[i][e as usize]).expect("same ring");
    }
    acc
}

fn power_cache(gs: &GeneratorSet) -> Vec<Vec<Poly>> {
    gs.gens.iter().map(|_| vec![Poly::one(&gs.ring)]).collect()
}

/// Substitute the generators into a polynomial in the relation ring.
pub fn substitute_generators(rel: &Poly, gs: &GeneratorSet) -> Poly {
    let images: Vec<Poly> = gs.gens.iter().map(|g| g.poly.clone()).collect();
    rel.substitute(&images).expect("relation ring arity matches generator count")
}

/// Make the relation monic at the pure power of the second generator when
/// such a term exists (the designated normalization slot), otherwise at its
/// leading term.
fn normalize_relation(rel: &Poly) -> Poly {
    let field = &rel.ring().field;
    let slot = rel
        .terms()
        .iter()
        .find(|(m, _)| m.iter().enumerate().all(|(i, &e)| (e == 0) != (i == 1)));
    match slot {
        Some((_, c)) => rel.scale(field.inv(*c).expect("nonzero term")),
        None => rel.monic(),
    }
}

/// Lowest-weighted-degree linear relation among monomials in the generators.
/// The result is exact: substituting the generators yields the zero
/// polynomial, verified before returning.
pub fn fit_relation(gs: &GeneratorSet, cap: u64) -> Result<FittedRelation, InvariantError> {
    let field = &gs.ring.field;
    let weights: Vec<u64> = gs.gens.iter().map(|g| g.degree as u64).collect();
    let rel_ring = gs.relation_ring();
    let mut cache = power_cache(gs);
    for w in 1..=cap {
        let mut cands = weighted_monomials(&weights, w);
        if cands.len() < 2 {
            continue;
        }
        cands.sort_by(|a, b| rel_ring.cmp_mono(b, a));
        let (_, index) = degree_frame(&gs.ring, w as u32);
        let width = index.len();
        // Columns are candidates; kernel vectors are relations.
        let mut cols: Vec<Vec<Felt>> = Vec::with_capacity(cands.len());
        for m in &cands {
            let p = generator_monomial(gs, m, &mut cache);
            debug_assert_eq!(p.total_degree(), Some(w));
            cols.push(poly_to_vec(&p, &index, width));
        }
        let mat = Matrix::from_fn(width, cands.len(), |i, j| cols[j][i]);
        let kernel = mat.kernel_basis(field);
        if kernel.is_empty() {
            continue;
        }
        let mut ech = Echelon::new(field);
        let mut first: Option<Vec<Felt>> = None;
        for v in kernel {
            if let Some(canon) = ech.insert(v) {
                if first.is_none() {
                    first = Some(canon);
                }
            }
        }
        let lambda = first.expect("nonempty kernel");
        let terms: Vec<(Mono, Felt)> = cands
            .iter()
            .zip(&lambda)
            .filter(|(_, c)| !field.is_zero(**c))
            .map(|(m, c)| (m.clone(), *c))
            .collect();
        let rel = normalize_relation(&Poly::from_terms(&rel_ring, terms));
        let residue = substitute_generators(&rel, gs);
        assert!(
            residue.is_zero(),
            "fitted relation must substitute to exactly zero"
        );
        return Ok(FittedRelation {
            ring: rel_ring,
            poly: rel,
            weights,
            weighted_degree: w,
        });
    }
    let max_weight = weights.iter().copied().max().unwrap_or(1);
    Err(InvariantError::NoRelationFound { cap, suggested_cap: cap + max_weight })
}

/// Shift the last generator by a polynomial in the earlier ones so that the
/// designated relation slots vanish, then refit. Each slot must factor as
/// (the x4-term's cofactor in the first generator) times a monomial in the
/// lower generators; the unique linear x4 term makes the solve triangular.
pub fn clear_relation_slots(
    gs: &GeneratorSet,
    fitted: &FittedRelation,
    slots: &[Mono],
) -> Result<(GeneratorSet, FittedRelation), InvariantError> {
    let field = &gs.ring.field;
    let top = gs.gens.len() - 1;
    // Locate the unique relation term linear in the top generator.
    let mut pivot: Option<(&Mono, Felt)> = None;
    for (m, c) in fitted.poly.terms() {
        if m[top] == 1 && pivot.is_none() {
            pivot = Some((m, *c));
        } else if m[top] != 0 {
            return Err(InvariantError::SlotNotClearable { slot: m.clone() });
        }
    }
    let (pivot_mono, d_coeff) = match pivot {
        Some(p) => p,
        None => {
            return Err(InvariantError::SlotNotClearable {
                slot: vec![0; gs.gens.len()],
            })
        }
    };
    let mut cache = power_cache(gs);
    let mut shift = Poly::zero(&gs.ring);
    for slot in slots {
        let c = fitted.poly.coeff(slot);
        if field.is_zero(c) {
            continue;
        }
        // slot = pivot-cofactor * q with q a monomial in the lower generators.
        let mut q = slot.clone();
        for (i, qe) in q.iter_mut().enumerate() {
            let pe = if i == top { 0 } else { pivot_mono[i] };
            if *qe < pe || (i == top && *qe != 0) {
                return Err(InvariantError::SlotNotClearable { slot: slot.clone() });
            }
            *qe -= pe;
        }
        let gamma = field.div(c, d_coeff).expect("pivot coefficient nonzero");
        let q_poly = generator_monomial(gs, &q, &mut cache).scale(gamma);
        shift = shift.add(&q_poly).expect("same ring");
    }
    let mut new_gens = gs.gens.clone();
    new_gens[top].poly = new_gens[top].poly.add(&shift).expect("same ring");
    let new_gs = GeneratorSet { ring: gs.ring.clone(), gens: new_gens };
    let refit = fit_relation(&new_gs, fitted.weighted_degree)?;
    for slot in slots {
        assert!(
            field.is_zero(refit.poly.coeff(slot)),
            "cleared slot must vanish after the refit"
        );
    }
    Ok((new_gs, refit))
}

/// The listed relation coefficients are unchanged by every degree-preserving
/// unipotent change of generators (adding to a generator a weighted-degree-
/// matched polynomial in the strictly lower ones). Each trial applies random
/// shifts to every generator, refits, and compares the designated slots of
/// the renormalized relation; a reference display missing such a slot is
/// therefore not reachable by any allowed change of coordinates.
pub fn designated_slots_are_shift_rigid(
    gs: &GeneratorSet,
    fitted: &FittedRelation,
    slots: &[Mono],
    trials: u32,
    seed: u64,
) -> Result<bool, InvariantError> {
    let field = gs.ring.field.clone();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..trials {
        let mut shifted = gs.clone();
        for i in 1..shifted.gens.len() {
            let weights: Vec<u64> = fitted.weights[..i].to_vec();
            let degree = fitted.weights[i];
            let mut cache = power_cache(&shifted);
            let mut shift = Poly::zero(&gs.ring);
            for short in weighted_monomials(&weights, degree) {
                let mut mono = short.clone();
                mono.resize(shifted.gens.len(), 0);
                let c = Felt((rng.gen_range(0..field.size())) as u32);
                if field.is_zero(c) {
                    continue;
                }
                let p = generator_monomial(&shifted, &mono, &mut cache).scale(c);
                shift = shift.add(&p).expect("same ring");
            }
            shifted.gens[i].poly = shifted.gens[i].poly.add(&shift).expect("same ring");
        }
        let refit = fit_relation(&shifted, fitted.weighted_degree)?;
        for slot in slots {
            if refit.poly.coeff(slot) != fitted.poly.coeff(slot) {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

/// Maximum rank of the Jacobian of the generator map over sampled points.
pub fn generic_rank_check(gs: &GeneratorSet, trials: u32, seed: u64) -> usize {
    let field = &gs.ring.field;
    let n = gs.ring.num_vars();
    let jac: Vec<Vec<Poly>> = gs
        .gens
        .iter()
        .map(|g| (0..n).map(|j| g.poly.partial_derivative(j)).collect())
        .collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut best = 0;
    for _ in 0..trials {
        let point: Vec<Felt> = (0..n)
            .map(|_| Felt((rng.gen_range(0..field.size())) as u32))
            .collect();
        let m = Matrix::from_fn(gs.gens.len(), n, |i, j| {
            jac[i][j].evaluate(&point).expect("point arity")
        });
        best = best.max(m.rank(field));
    }
    best
}

/// Every generator is fixed by every group element (exact check).
pub fn verify_generators_invariant(group: &MatrixGroup, gs: &GeneratorSet) -> bool {
    gs.gens
        .iter()
        .all(|g| crate::group::is_invariant(group, &g.poly).unwrap_or(false))
}
