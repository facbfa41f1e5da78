//! Buchberger's algorithm and the ideal-theoretic predicates built on it:
//! membership, radical membership, two-sided locus comparison, and Krull
//! dimension of a zero set from the leading-term staircase.
//!
//! All computations run under an explicit step budget so a runaway basis
//! computation surfaces as an error instead of a hang. Results are exact:
//! a returned basis is always the fully reduced, monic, deterministically
//! sorted Groebner basis of its input.

use std::fmt;
use std::sync::Arc;


use crate::poly::{Mono, MonomialOrder, Poly, PolyRing};

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum GroebnerError {
    /// The step budget ran out before the computation finished.
    ResourceBudgetExceeded { budget: u64 },
    /// Inputs from different rings.
    MixedRings,
    /// The ideal is the unit ideal, so its zero set is empty.
    EmptyLocus,
}

impl fmt::Display for GroebnerError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GroebnerError::ResourceBudgetExceeded { budget } => {
                write!(f, "computation exceeded the step budget of {budget}")
            }
            GroebnerError::MixedRings => write!(f, "generators live in different rings"),
            GroebnerError::EmptyLocus => write!(f, "the ideal defines the empty locus"),
        }
    }
}

impl std::error::Error for GroebnerError {}

#[derive(Debug, Clone, Copy)]
pub struct GroebnerConfig {
    pub max_steps: u64,
}

impl Default for GroebnerConfig {
    fn default() -> Self {
        GroebnerConfig { max_steps: 5_000_000 }
    }
}

struct Budget {
    remaining: u64,
    total: u64,
}

impl Budget {
    fn new(cfg: &GroebnerConfig) -> Budget {
        Budget { remaining: cfg.max_steps, total: cfg.max_steps }
    }

    fn spend(&mut self, n: u64) -> Result<(), GroebnerError> {
        if self.remaining < n {
            return Err(GroebnerError::ResourceBudgetExceeded { budget: self.total });
        }
        self.remaining -= n;
        Ok(())
    }
}

fn mono_divides(a: &[u32], b: &[u32]) -> bool {
    a.iter().zip(b).all(|(x, y)| x <= y)
}

fn mono_lcm(a: &[u32], b: &[u32]) -> Mono {
    a.iter().zip(b).map(|(x, y)| *x.max(y)).collect()
}

fn mono_sub(a: &[u32], b: &[u32]) -> Mono {
    a.iter().zip(b).map(|(x, y)| x - y).collect()
}

fn mono_coprime(a: &[u32], b: &[u32]) -> bool {
    a.iter().zip(b).all(|(x, y)| *x == 0 || *y == 0)
}

/// Fully reduce `f` against `basis`: no term of the result is divisible by
/// any basis leading monomial. Deterministic: always rewrites the largest
/// reducible term using the first matching basis element.
fn normal_form_budgeted(
    f: &Poly,
    basis: &[Poly],
    budget: &mut Budget,
) -> Result<Poly, GroebnerError> {
    let ring = f.ring().clone();
    let field = ring.field.clone();
    let mut work = f.clone();
    let mut result = Poly::zero(&ring);
    'outer: while !work.is_zero() {
        budget.spend(1)?;
        let (lm, lc) = {
            let t = &work.terms()[0];
            (t.0.clone(), t.1)
        };
        for g in basis {
            let Some(glm) = g.leading_monomial() else { continue };
            if mono_divides(glm, &lm) {
                let shift = mono_sub(&lm, glm);
                let glc = g.leading_coeff().unwrap();
                let factor = field.div(lc, glc).expect("leading coefficient nonzero");
                let sub = g.mul_term(&shift, factor);
                work = work.sub(&sub).expect("same ring");
                continue 'outer;
            }
        }
        // Leading term irreducible: move it to the result.
        let lead = Poly::monomial(&ring, &lm, lc);
        result = result.add(&lead).expect("same ring");
        work = work.sub(&lead).expect("same ring");
    }
    Ok(result)
}

/// Normal form of `f` modulo `basis` under a fresh budget.
pub fn normal_form(f: &Poly, basis: &[Poly], cfg: &GroebnerConfig) -> Result<Poly, GroebnerError> {
    let mut budget = Budget::new(cfg);
    normal_form_budgeted(f, basis, &mut budget)
}

/// Compute the reduced Groebner basis of the ideal generated by `gens` in
/// the ring's monomial order. Pair selection follows the normal strategy
/// (smallest lcm first, ties by pair index); pairs with coprime leading
/// monomials are skipped.
pub fn buchberger(gens: &[Poly], cfg: &GroebnerConfig) -> Result<Vec<Poly>, GroebnerError> {
    let mut budget = Budget::new(cfg);
    let Some(first) = gens.first() else {
        return Ok(Vec::new());
    };
    let ring = first.ring().clone();
    if gens.iter().any(|g| g.ring() != &ring) {
        return Err(GroebnerError::MixedRings);
    }
    let mut basis: Vec<Poly> = Vec::new();
    for g in gens {
        if !g.is_zero() {
            basis.push(g.monic());
        }
    }
    if basis.is_empty() {
        return Ok(Vec::new());
    }

    let mut pairs: Vec<(usize, usize)> = Vec::new();
    for i in 0..basis.len() {
        for j in (i + 1)..basis.len() {
            pairs.push((i, j));
        }
    }

    while !pairs.is_empty() {
        budget.spend(1)?;
        // Normal selection strategy: smallest lcm in the ring order.
        let mut best = 0usize;
        let mut best_lcm = mono_lcm(
            basis[pairs[0].0].leading_monomial().unwrap(),
            basis[pairs[0].1].leading_monomial().unwrap(),
        );
        for (idx, (i, j)) in pairs.iter().enumerate().skip(1) {
            let lcm = mono_lcm(
                basis[*i].leading_monomial().unwrap(),
                basis[*j].leading_monomial().unwrap(),
            );
            if ring.cmp_mono(&lcm, &best_lcm) == std::cmp::Ordering::Less {
                best = idx;
                best_lcm = lcm;
            }
        }
        let (i, j) = pairs.swap_remove(best);
        let fi = &basis[i];
        let fj = &basis[j];
        let lmi = fi.leading_monomial().unwrap().clone();
        let lmj = fj.leading_monomial().unwrap().clone();
        if mono_coprime(&lmi, &lmj) {
            continue;
        }
        let lcm = mono_lcm(&lmi, &lmj);
        let one = ring.field.one();
        let s = fi
            .mul_term(&mono_sub(&lcm, &lmi), one)
            .sub(&fj.mul_term(&mono_sub(&lcm, &lmj), one))
            .expect("same ring");
        let reduced = normal_form_budgeted(&s, &basis, &mut budget)?;
        if reduced.is_zero() {
            continue;
        }
        let reduced = reduced.monic();
        let new_idx = basis.len();
        for k in 0..new_idx {
            pairs.push((k, new_idx));
        }
        basis.push(reduced);
    }

    reduce_basis(basis, &ring, &mut budget)
}

/// Minimalize and inter-reduce a Groebner basis into the canonical reduced
/// basis: monic elements, pairwise indivisible leading terms, every element
/// fully reduced against the others, sorted descending by leading monomial.
fn reduce_basis(
    mut basis: Vec<Poly>,
    ring: &Arc<PolyRing>,
    budget: &mut Budget,
) -> Result<Vec<Poly>, GroebnerError> {
    // Drop elements whose leading monomial is divisible by another's.
    basis.sort_by(|a, b| {
        ring.cmp_mono(
            a.leading_monomial().unwrap(),
            b.leading_monomial().unwrap(),
        )
    });
    let mut minimal: Vec<Poly> = Vec::new();
    for g in basis.into_iter() {
        let lm = g.leading_monomial().unwrap();
        if minimal
            .iter()
            .any(|h| mono_divides(h.leading_monomial().unwrap(), lm))
        {
            continue;
        }
        minimal.push(g);
    }
    // Inter-reduce tails.
    let mut reduced: Vec<Poly> = Vec::with_capacity(minimal.len());
    for i in 0..minimal.len() {
        let others: Vec<Poly> = minimal
            .iter()
            .enumerate()
            .filter(|(j, _)| *j != i)
            .map(|(_, p)| p.clone())
            .collect();
        let r = normal_form_budgeted(&minimal[i], &others, budget)?;
        reduced.push(r.monic());
    }
    reduced.sort_by(|a, b| {
        ring.cmp_mono(
            b.leading_monomial().unwrap(),
            a.leading_monomial().unwrap(),
        )
    });
    Ok(reduced)
}

/// Does the reduced basis present the unit ideal?
pub fn is_unit_ideal(gb: &[Poly]) -> bool {
    gb.iter().any(|g| g.is_constant() && !g.is_zero())
}

/// Ideal membership: `f` lies in the ideal presented by the Groebner basis.
pub fn ideal_membership(f: &Poly, gb: &[Poly], cfg: &GroebnerConfig) -> Result<bool, GroebnerError> {
    Ok(normal_form(f, gb, cfg)?.is_zero())
}

fn fresh_var_name(ring: &PolyRing) -> String {
    let mut name = "_t".to_string();
    let mut counter = 0;
    while ring.vars.iter().any(|v| *v == name) {
        counter += 1;
        name = format!("_t{counter}");
    }
    name
}

/// Radical membership via the auxiliary-variable trick: `f` vanishes on the
/// zero set of `gens` iff `1` lies in the ideal generated by `gens` and
/// `1 - t*f` in one more variable.
pub fn radical_membership(
    f: &Poly,
    gens: &[Poly],
    cfg: &GroebnerConfig,
) -> Result<bool, GroebnerError> {
    let ring = f.ring().clone();
    if f.is_zero() {
        return Ok(true);
    }
    let mut vars: Vec<&str> = ring.vars.iter().map(|s| s.as_str()).collect();
    let fresh = fresh_var_name(&ring);
    vars.push(&fresh);
    let ext = PolyRing::new(ring.field.clone(), &vars, MonomialOrder::Grevlex);
    let images: Vec<Poly> = (0..ring.num_vars()).map(|i| Poly::var(&ext, i)).collect();
    let mut lifted: Vec<Poly> = Vec::with_capacity(gens.len() + 1);
    for g in gens {
        lifted.push(g.substitute(&images).expect("embedding into extended ring"));
    }
    let t = Poly::var(&ext, ring.num_vars());
    let f_up = f.substitute(&images).expect("embedding into extended ring");
    let witness = Poly::one(&ext)
        .sub(&t.mul(&f_up).expect("same ring"))
        .expect("same ring");
    lifted.push(witness);
    let gb = buchberger(&lifted, cfg)?;
    Ok(is_unit_ideal(&gb))
}

/// Outcome of a two-sided comparison of vanishing loci.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LociComparison {
    pub equal: bool,
    /// Generators of the first ideal that do not vanish on the second locus.
    pub first_not_in_second: Vec<usize>,
    /// Generators of the second ideal that do not vanish on the first locus.
    pub second_not_in_first: Vec<usize>,
}

/// Compare `V(first)` and `V(second)` by checking every generator of each
/// ideal for radical membership in the other.
pub fn loci_equal(
    first: &[Poly],
    second: &[Poly],
    cfg: &GroebnerConfig,
) -> Result<LociComparison, GroebnerError> {
    let mut cmp = LociComparison {
        equal: true,
        first_not_in_second: Vec::new(),
        second_not_in_first: Vec::new(),
    };
    for (i, f) in first.iter().enumerate() {
        if !radical_membership(f, second, cfg)? {
            cmp.equal = false;
            cmp.first_not_in_second.push(i);
        }
    }
    for (j, g) in second.iter().enumerate() {
        if !radical_membership(g, first, cfg)? {
            cmp.equal = false;
            cmp.second_not_in_first.push(j);
        }
    }
    Ok(cmp)
}

/// Krull dimension of the zero set of `gens`, computed as the largest set of
/// variables meeting the support of no leading term of the reduced basis.
/// Errors with [`GroebnerError::EmptyLocus`] when the ideal is the unit ideal.
pub fn ideal_dimension(gens: &[Poly], cfg: &GroebnerConfig) -> Result<usize, GroebnerError> {
    match ideal_dimension_or_empty(gens, cfg)? {
        Some(d) => Ok(d),
        None => Err(GroebnerError::EmptyLocus),
    }
}

/// Like [`ideal_dimension`] but reports the empty locus as `None` instead of
/// an error (useful when emptiness is the expected, checked outcome).
pub fn ideal_dimension_or_empty(
    gens: &[Poly],
    cfg: &GroebnerConfig,
) -> Result<Option<usize>, GroebnerError> {
    let Some(first) = gens.first() else {
        // Zero ideal: the whole affine space.
        return Ok(Some(0));
    };
    let n = first.ring().num_vars();
    let gb = buchberger(gens, cfg)?;
    if is_unit_ideal(&gb) {
        return Ok(None);
    }
    if gb.is_empty() {
        return Ok(Some(n));
    }
    let leading: Vec<Mono> = gb
        .iter()
        .map(|g| g.leading_monomial().unwrap().clone())
        .collect();
    let mut best = 0usize;
    for mask in 0u32..(1 << n) {
        let size = mask.count_ones() as usize;
        if size <= best {
            continue;
        }
        // The variable set is independent when no leading monomial is
        // supported entirely inside it.
        let independent = leading.iter().all(|m| {
            m.iter()
                .enumerate()
                .any(|(v, &e)| e > 0 && mask & (1 << v) == 0)
        });
        if independent {
            best = size;
        }
    }
    Ok(Some(best))
}
