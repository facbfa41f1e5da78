//! Sparse multivariate polynomials over a finite field.
//!
//! A polynomial stores its terms sorted strictly descending in the ring's
//! monomial order, with no zero coefficients, so equality is structural,
//! the leading term is the first entry, and printing is canonical.

use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use crate::field::{Felt, Field};

pub type Mono = Vec<u32>;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MonomialOrder {
    Lex,
    Grevlex,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum PolyError {
    /// Operands belong to different rings.
    MixedRings,
    /// Wrong number of images or coordinates for this ring.
    WrongArity { expected: usize, got: usize },
    /// Division that was required to be exact left a remainder.
    NotDivisible,
}

impl fmt::Display for PolyError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PolyError::MixedRings => write!(f, "operands live in different polynomial rings"),
            PolyError::WrongArity { expected, got } => {
                write!(f, "expected {expected} entries, got {got}")
            }
            PolyError::NotDivisible => write!(f, "division is not exact"),
        }
    }
}

impl std::error::Error for PolyError {}

#[derive(Debug, PartialEq, Eq)]
pub struct PolyRing {
    pub field: Field,
    pub vars: Vec<String>,
    pub order: MonomialOrder,
}

impl PolyRing {
    pub fn new(field: Field, vars: &[&str], order: MonomialOrder) -> Arc<PolyRing> {
        Arc::new(PolyRing {
            field,
            vars: vars.iter().map(|s| s.to_string()).collect(),
            order,
        })
    }

    pub fn num_vars(&self) -> usize {
        self.vars.len()
    }

    pub fn var_index(&self, name: &str) -> Option<usize> {
        self.vars.iter().position(|v| v == name)
    }

    /// Compare monomials in this ring's order.
    pub fn cmp_mono(&self, a: &[u32], b: &[u32]) -> Ordering {
        match self.order {
            MonomialOrder::Lex => {
                for (x, y) in a.iter().zip(b) {
                    match x.cmp(y) {
                        Ordering::Equal => continue,
                        other => return other,
                    }
                }
                Ordering::Equal
            }
            MonomialOrder::Grevlex => {
                let da: u64 = a.iter().map(|&e| e as u64).sum();
                let db: u64 = b.iter().map(|&e| e as u64).sum();
                match da.cmp(&db) {
                    Ordering::Equal => {}
                    other => return other,
                }
                for (x, y) in a.iter().zip(b).rev() {
                    match x.cmp(y) {
                        Ordering::Equal => continue,
                        // Smaller trailing exponent means larger monomial.
                        other => return other.reverse(),
                    }
                }
                Ordering::Equal
            }
        }
    }
}

fn same_ring(a: &Arc<PolyRing>, b: &Arc<PolyRing>) -> bool {
    Arc::ptr_eq(a, b) || a == b
}

#[derive(Clone, PartialEq, Eq, Debug)]
pub struct Poly {
    ring: Arc<PolyRing>,
    /// Terms sorted strictly descending in the ring order; no zero coefficients.
    terms: Vec<(Mono, Felt)>,
}

impl Poly {
    pub fn zero(ring: &Arc<PolyRing>) -> Poly {
        Poly { ring: ring.clone(), terms: Vec::new() }
    }

    pub fn constant(ring: &Arc<PolyRing>, c: Felt) -> Poly {
        if ring.field.is_zero(c) {
            return Poly::zero(ring);
        }
        Poly { ring: ring.clone(), terms: vec![(vec![0; ring.num_vars()], c)] }
    }

    pub fn one(ring: &Arc<PolyRing>) -> Poly {
        Poly::constant(ring, ring.field.one())
    }

    pub fn var(ring: &Arc<PolyRing>, index: usize) -> Poly {
        assert!(index < ring.num_vars(), "variable index out of range");
        let mut mono = vec![0u32; ring.num_vars()];
        mono[index] = 1;
        Poly { ring: ring.clone(), terms: vec![(mono, ring.field.one())] }
    }

    pub fn monomial(ring: &Arc<PolyRing>, mono: &[u32], c: Felt) -> Poly {
        assert_eq!(mono.len(), ring.num_vars(), "exponent arity mismatch");
        if ring.field.is_zero(c) {
            return Poly::zero(ring);
        }
        Poly { ring: ring.clone(), terms: vec![(mono.to_vec(), c)] }
    }

    /// Build from arbitrary (monomial, coefficient) pairs: combines duplicates,
    /// drops zeros, sorts canonically.
    pub fn from_terms(ring: &Arc<PolyRing>, pairs: Vec<(Mono, Felt)>) -> Poly {
        let mut map: BTreeMap<Mono, Felt> = BTreeMap::new();
        for (m, c) in pairs {
            assert_eq!(m.len(), ring.num_vars(), "exponent arity mismatch");
            let entry = map.entry(m).or_insert(Felt::ZERO);
            *entry = ring.field.add(*entry, c);
        }
        let mut terms: Vec<(Mono, Felt)> = map
            .into_iter()
            .filter(|(_, c)| !ring.field.is_zero(*c))
            .collect();
        terms.sort_unstable_by(|(a, _), (b, _)| ring.cmp_mono(b, a));
        Poly { ring: ring.clone(), terms }
    }

    pub fn ring(&self) -> &Arc<PolyRing> {
        &self.ring
    }

    pub fn field(&self) -> &Field {
        &self.ring.field
    }

    pub fn terms(&self) -> &[(Mono, Felt)] {
        &self.terms
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_constant(&self) -> bool {
        self.terms.is_empty() || (self.terms.len() == 1 && self.terms[0].0.iter().all(|&e| e == 0))
    }

    pub fn leading_monomial(&self) -> Option<&Mono> {
        self.terms.first().map(|(m, _)| m)
    }

    pub fn leading_coeff(&self) -> Option<Felt> {
        self.terms.first().map(|&(_, c)| c)
    }

    /// Coefficient of an exact monomial (zero if absent).
    pub fn coeff(&self, mono: &[u32]) -> Felt {
        match self
            .terms
            .binary_search_by(|(m, _)| self.ring.cmp_mono(mono, m))
        {
            Ok(i) => self.terms[i].1,
            Err(_) => Felt::ZERO,
        }
    }

    pub fn total_degree(&self) -> Option<u64> {
        self.terms
            .iter()
            .map(|(m, _)| m.iter().map(|&e| e as u64).sum())
            .max()
    }

    pub fn degree_in(&self, var: usize) -> Option<u32> {
        self.terms.iter().map(|(m, _)| m[var]).max()
    }

    pub fn neg(&self) -> Poly {
        let f = &self.ring.field;
        Poly {
            ring: self.ring.clone(),
            terms: self.terms.iter().map(|(m, c)| (m.clone(), f.neg(*c))).collect(),
        }
    }

    pub fn add(&self, other: &Poly) -> Result<Poly, PolyError> {
        if !same_ring(&self.ring, &other.ring) {
            return Err(PolyError::MixedRings);
        }
        let f = &self.ring.field;
        let mut out: Vec<(Mono, Felt)> = Vec::with_capacity(self.terms.len() + other.terms.len());
        let (mut i, mut j) = (0, 0);
        while i < self.terms.len() && j < other.terms.len() {
            match self.ring.cmp_mono(&self.terms[i].0, &other.terms[j].0) {
                Ordering::Greater => {
                    out.push(self.terms[i].clone());
                    i += 1;
                }
                Ordering::Less => {
                    out.push(other.terms[j].clone());
                    j += 1;
                }
                Ordering::Equal => {
                    let c = f.add(self.terms[i].1, other.terms[j].1);
                    if !f.is_zero(c) {
                        out.push((self.terms[i].0.clone(), c));
                    }
                    i += 1;
                    j += 1;
                }
            }
        }
        out.extend_from_slice(&self.terms[i..]);
        out.extend_from_slice(&other.terms[j..]);
        Ok(Poly { ring: self.ring.clone(), terms: out })
    }

    pub fn sub(&self, other: &Poly) -> Result<Poly, PolyError> {
        self.add(&other.neg())
    }

    pub fn scale(&self, c: Felt) -> Poly {
        let f = &self.ring.field;
        if f.is_zero(c) {
            return Poly::zero(&self.ring);
        }
        Poly {
            ring: self.ring.clone(),
            terms: self
                .terms
                .iter()
                .map(|(m, a)| (m.clone(), f.mul(*a, c)))
                .collect(),
        }
    }

    /// Multiply by a single term `c * x^mono`.
    pub fn mul_term(&self, mono: &[u32], c: Felt) -> Poly {
        let f = &self.ring.field;
        if f.is_zero(c) {
            return Poly::zero(&self.ring);
        }
        Poly {
            ring: self.ring.clone(),
            terms: self
                .terms
                .iter()
                .map(|(m, a)| {
                    let mm: Mono = m.iter().zip(mono).map(|(x, y)| x + y).collect();
                    (mm, f.mul(*a, c))
                })
                .collect(),
        }
    }

    pub fn mul(&self, other: &Poly) -> Result<Poly, PolyError> {
        if !same_ring(&self.ring, &other.ring) {
            return Err(PolyError::MixedRings);
        }
        let f = &self.ring.field;
        let (small, large) = if self.terms.len() <= other.terms.len() {
            (self, other)
        } else {
            (other, self)
        };
        let mut map: BTreeMap<Mono, Felt> = BTreeMap::new();
        for (ms, cs) in &small.terms {
            for (ml, cl) in &large.terms {
                let mono: Mono = ms.iter().zip(ml).map(|(x, y)| x + y).collect();
                let prod = f.mul(*cs, *cl);
                let entry = map.entry(mono).or_insert(Felt::ZERO);
                *entry = f.add(*entry, prod);
            }
        }
        let mut terms: Vec<(Mono, Felt)> =
            map.into_iter().filter(|(_, c)| !f.is_zero(*c)).collect();
        terms.sort_unstable_by(|(a, _), (b, _)| self.ring.cmp_mono(b, a));
        Ok(Poly { ring: self.ring.clone(), terms })
    }

    pub fn pow(&self, e: u32) -> Poly {
        let mut acc = Poly::one(&self.ring);
        let mut base = self.clone();
        let mut e = e;
        while e > 0 {
            if e & 1 == 1 {
                acc = acc.mul(&base).expect("same ring");
            }
            base = base.mul(&base).expect("same ring");
            e >>= 1;
        }
        acc
    }

    /// Ring homomorphism determined by `vars[i] -> images[i]`. Images must all
    /// live in one ring (the target) over the same coefficient field.
    pub fn substitute(&self, images: &[Poly]) -> Result<Poly, PolyError> {
        if images.len() != self.ring.num_vars() {
            return Err(PolyError::WrongArity {
                expected: self.ring.num_vars(),
                got: images.len(),
            });
        }
        let target = match images.first() {
            Some(p) => p.ring.clone(),
            None => self.ring.clone(),
        };
        if images.iter().any(|p| !same_ring(&p.ring, &target)) {
            return Err(PolyError::MixedRings);
        }
        if target.field != self.ring.field {
            return Err(PolyError::MixedRings);
        }
        // Cache powers of each image up to the maximum exponent used.
        let mut pow_cache: Vec<Vec<Poly>> = images
            .iter()
            .map(|p| vec![Poly::one(&target), p.clone()])
            .collect();
        for (v, cache) in pow_cache.iter_mut().enumerate() {
            let need = self.degree_in(v).unwrap_or(0) as usize;
            while cache.len() <= need {
                let next = cache.last().unwrap().mul(&images[v])?;
                cache.push(next);
            }
        }
        let mut acc = Poly::zero(&target);
        for (mono, c) in &self.terms {
            let mut term = Poly::constant(&target, *c);
            for (v, &e) in mono.iter().enumerate() {
                if e > 0 {
                    term = term.mul(&pow_cache[v][e as usize])?;
                }
            }
            acc = acc.add(&term)?;
        }
        Ok(acc)
    }

    /// Evaluate at a point (exact field arithmetic).
    pub fn evaluate(&self, point: &[Felt]) -> Result<Felt, PolyError> {
        if point.len() != self.ring.num_vars() {
            return Err(PolyError::WrongArity {
                expected: self.ring.num_vars(),
                got: point.len(),
            });
        }
        let f = &self.ring.field;
        let mut acc = f.zero();
        for (mono, c) in &self.terms {
            let mut v = *c;
            for (x, &e) in point.iter().zip(mono.iter()) {
                if e > 0 {
                    v = f.mul(v, f.pow(*x, e as u64));
                }
            }
            acc = f.add(acc, v);
        }
        Ok(acc)
    }

    /// Formal partial derivative with respect to one variable.
    pub fn partial_derivative(&self, var: usize) -> Poly {
        assert!(var < self.ring.num_vars());
        let f = &self.ring.field;
        let mut terms = Vec::new();
        for (mono, c) in &self.terms {
            let e = mono[var];
            if e == 0 {
                continue;
            }
            let factor = f.from_int(e as i64);
            let coeff = f.mul(*c, factor);
            if f.is_zero(coeff) {
                continue;
            }
            let mut m = mono.clone();
            m[var] -= 1;
            terms.push((m, coeff));
        }
        // Lowering one fixed variable's exponent preserves relative order in
        // lex and grevlex, so the term list stays sorted.
        Poly { ring: self.ring.clone(), terms }
    }

    /// Order of vanishing along the coordinate divisor `var = 0`, i.e. the
    /// minimum exponent of `var` over all terms. `None` for the zero polynomial.
    pub fn vanishing_order(&self, var: usize) -> Option<u32> {
        self.terms.iter().map(|(m, _)| m[var]).min()
    }

    /// Exact division by `var^e`.
    pub fn divide_by_var_power(&self, var: usize, e: u32) -> Result<Poly, PolyError> {
        if e == 0 {
            return Ok(self.clone());
        }
        if self.terms.iter().any(|(m, _)| m[var] < e) {
            return Err(PolyError::NotDivisible);
        }
        let terms = self
            .terms
            .iter()
            .map(|(m, c)| {
                let mut mm = m.clone();
                mm[var] -= e;
                (mm, *c)
            })
            .collect();
        // Uniform shifts in one variable preserve relative order.
        Ok(Poly { ring: self.ring.clone(), terms })
    }

    /// Multiply every term by `var^e`.
    pub fn mul_var_power(&self, var: usize, e: u32) -> Poly {
        let mut mono = vec![0u32; self.ring.num_vars()];
        mono[var] = e;
        self.mul_term(&mono, self.ring.field.one())
    }

    pub fn monic(&self) -> Poly {
        match self.leading_coeff() {
            None => self.clone(),
            Some(c) => {
                let inv = self.ring.field.inv(c).expect("nonzero leading coefficient");
                self.scale(inv)
            }
        }
    }

    /// Weighted degrees of all terms under the given variable weights.
    pub fn weighted_degree_profile(&self, weights: &[u64]) -> Result<WeightProfile, PolyError> {
        if weights.len() != self.ring.num_vars() {
            return Err(PolyError::WrongArity {
                expected: self.ring.num_vars(),
                got: weights.len(),
            });
        }
        let mut counts: BTreeMap<u64, usize> = BTreeMap::new();
        for (mono, _) in &self.terms {
            let d: u64 = mono
                .iter()
                .zip(weights)
                .map(|(&e, &w)| e as u64 * w)
                .sum();
            *counts.entry(d).or_insert(0) += 1;
        }
        let homogeneous_degree = if counts.len() == 1 {
            counts.keys().next().copied()
        } else {
            None
        };
        Ok(WeightProfile { counts, homogeneous_degree })
    }

    /// Canonical text: terms descending in the ring order, explicit `*`,
    /// `^` for exponents of at least two, coefficients rendered by the field.
    pub fn render(&self) -> String {
        if self.terms.is_empty() {
            return "0".to_string();
        }
        let f = &self.ring.field;
        let mut parts = Vec::with_capacity(self.terms.len());
        for (mono, c) in &self.terms {
            let mut factors: Vec<String> = Vec::new();
            let coeff_str = f.render(*c);
            let is_constant_term = mono.iter().all(|&e| e == 0);
            if is_constant_term || coeff_str != "1" {
                factors.push(coeff_str);
            }
            for (v, &e) in mono.iter().enumerate() {
                match e {
                    0 => {}
                    1 => factors.push(self.ring.vars[v].clone()),
                    _ => factors.push(format!("{}^{}", self.ring.vars[v], e)),
                }
            }
            parts.push(factors.join("*"));
        }
        parts.join(" + ")
    }
}

impl fmt::Display for Poly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.render())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WeightProfile {
    /// Weighted degree -> number of terms with that degree.
    pub counts: BTreeMap<u64, usize>,
    /// Set when every term shares one weighted degree.
    pub homogeneous_degree: Option<u64>,
}

/// All exponent vectors of total degree exactly `d` in `n` variables,
/// emitted in descending grevlex order for `n <= 3` rings and in a fixed
/// deterministic order in general.
pub fn monomials_of_degree(n: usize, d: u32) -> Vec<Mono> {
    let mut out = Vec::new();
    let mut current = vec![0u32; n];
    fn rec(n: usize, left: u32, idx: usize, current: &mut Vec<u32>, out: &mut Vec<Mono>) {
        if idx == n - 1 {
            current[idx] = left;
            out.push(current.clone());
            return;
        }
        for e in (0..=left).rev() {
            current[idx] = e;
            rec(n, left - e, idx + 1, current, out);
        }
        current[idx] = 0;
    }
    if n == 0 {
        if d == 0 {
            out.push(Vec::new());
        }
        return out;
    }
    rec(n, d, 0, &mut current, &mut out);
    out
}
