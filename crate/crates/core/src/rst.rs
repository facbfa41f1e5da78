//! Exact-rational age computation and the terminal/canonical classification
//! for diagonalized cyclic group elements in characteristic zero: an element
//! of order l acting with eigenvalue exponents (a_1, ..., a_d) has age
//! (a_1 + ... + a_d)/l, and the quotient is terminal (resp. canonical) when
//! every non-identity element has age > 1 (resp. >= 1).

use std::cmp::Ordering;
use std::fmt;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum RstError {
    /// An exponent lies outside 0..=order-1.
    ExponentOutOfRange { index: usize, value: i64, order: i64 },
    /// The element order must be positive.
    NonPositiveOrder { order: i64 },
}

impl fmt::Display for RstError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RstError::ExponentOutOfRange { index, value, order } => {
                write!(f, "exponent {value} at position {index} is outside 0..{order}")
            }
            RstError::NonPositiveOrder { order } => {
                write!(f, "element order must be positive, got {order}")
            }
        }
    }
}

impl std::error::Error for RstError {}

/// Reduced fraction with positive denominator; exact integer arithmetic.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Fraction {
    numer: i64,
    denom: i64,
}

fn gcd(a: i64, b: i64) -> i64 {
    let (mut a, mut b) = (a.abs(), b.abs());
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

impl Fraction {
    pub fn new(numer: i64, denom: i64) -> Fraction {
        assert!(denom != 0, "zero denominator");
        let sign = if denom < 0 { -1 } else { 1 };
        let g = gcd(numer, denom).max(1);
        Fraction { numer: sign * numer / g, denom: sign * denom / g }
    }

    pub fn integer(n: i64) -> Fraction {
        Fraction { numer: n, denom: 1 }
    }

    pub fn numer(&self) -> i64 {
        self.numer
    }

    pub fn denom(&self) -> i64 {
        self.denom
    }

    pub fn add(&self, other: &Fraction) -> Fraction {
        Fraction::new(self.numer * other.denom + other.numer * self.denom, self.denom * other.denom)
    }

    pub fn is_integer(&self) -> bool {
        self.denom == 1
    }
}

impl PartialOrd for Fraction {
    fn partial_cmp(&self, other: &Fraction) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Fraction {
    fn cmp(&self, other: &Fraction) -> Ordering {
        let lhs = self.numer as i128 * other.denom as i128;
        let rhs = other.numer as i128 * self.denom as i128;
        lhs.cmp(&rhs)
    }
}

impl fmt::Display for Fraction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.denom == 1 {
            write!(f, "{}", self.numer)
        } else {
            write!(f, "{}/{}", self.numer, self.denom)
        }
    }
}

/// A diagonalized element of finite order l with eigenvalue exponents
/// 0 <= a_i <= l-1 (eigenvalues are the a_i-th powers of a primitive l-th
/// root of unity).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AgeVector {
    pub order: i64,
    pub exps: Vec<i64>,
}

impl AgeVector {
    pub fn new(order: i64, exps: &[i64]) -> Result<AgeVector, RstError> {
        if order < 1 {
            return Err(RstError::NonPositiveOrder { order });
        }
        for (index, &value) in exps.iter().enumerate() {
            if value < 0 || value >= order {
                return Err(RstError::ExponentOutOfRange { index, value, order });
            }
        }
        Ok(AgeVector { order, exps: exps.to_vec() })
    }

    pub fn is_identity(&self) -> bool {
        self.exps.iter().all(|&a| a == 0)
    }

    /// The inverse element: exponents (l - a_i) mod l.
    pub fn inverse(&self) -> AgeVector {
        let exps = self.exps.iter().map(|&a| (self.order - a) % self.order).collect();
        AgeVector { order: self.order, exps }
    }

    /// The k-th power, exponents reduced mod l.
    pub fn power(&self, k: i64) -> AgeVector {
        let exps = self
            .exps
            .iter()
            .map(|&a| (a * k).rem_euclid(self.order))
            .collect();
        AgeVector { order: self.order, exps }
    }

    /// All non-identity powers of this element (the cyclic subgroup it
    /// generates, minus the identity).
    pub fn nontrivial_powers(&self) -> Vec<AgeVector> {
        (1..self.order)
            .map(|k| self.power(k))
            .filter(|v| !v.is_identity())
            .collect()
    }
}

/// age(g) = (a_1 + ... + a_d) / l, exactly.
pub fn age(v: &AgeVector) -> Fraction {
    Fraction::new(v.exps.iter().sum(), v.order)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RstClass {
    Terminal,
    CanonicalNotTerminal,
    NotCanonical,
}

impl fmt::Display for RstClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RstClass::Terminal => write!(f, "terminal"),
            RstClass::CanonicalNotTerminal => write!(f, "canonical_not_terminal"),
            RstClass::NotCanonical => write!(f, "not_canonical"),
        }
    }
}

/// Classify a quotient by the ages of the listed elements. The criterion
/// quantifies over non-identity elements; identities are skipped unless
/// `include_identity` forces them in (age 0, hence not canonical) for
/// diagnostic runs.
pub fn rst_classify(elements: &[AgeVector], include_identity: bool) -> RstClass {
    let one = Fraction::integer(1);
    let mut all_above = true;
    let mut all_at_least = true;
    for v in elements {
        if v.is_identity() && !include_identity {
            continue;
        }
        let a = age(v);
        match a.cmp(&one) {
            Ordering::Greater => {}
            Ordering::Equal => all_above = false,
            Ordering::Less => {
                all_above = false;
                all_at_least = false;
            }
        }
    }
    if all_at_least {
        if all_above {
            RstClass::Terminal
        } else {
            RstClass::CanonicalNotTerminal
        }
    } else {
        RstClass::NotCanonical
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn ages_of_reference_vectors() {
        let v = AgeVector::new(3, &[1, 1, 1]).unwrap();
        assert_eq!(age(&v), Fraction::integer(1));
        let id = AgeVector::new(1, &[0, 0, 0]).unwrap();
        assert_eq!(age(&id), Fraction::integer(0));
        let w = AgeVector::new(3, &[1, 2, 0]).unwrap();
        assert_eq!(age(&w), Fraction::integer(1));
        let r = AgeVector::new(7, &[1, 2, 4]).unwrap();
        assert_eq!(age(&r), Fraction::integer(1));
        let s = AgeVector::new(5, &[1, 2, 0]).unwrap();
        assert_eq!(age(&s), Fraction::new(3, 5));
    }

    #[test]
    fn exponent_bounds_are_enforced() {
        assert!(matches!(
            AgeVector::new(3, &[0, 3, 1]),
            Err(RstError::ExponentOutOfRange { index: 1, value: 3, order: 3 })
        ));
        assert!(matches!(
            AgeVector::new(3, &[-1]),
            Err(RstError::ExponentOutOfRange { .. })
        ));
        assert!(matches!(AgeVector::new(0, &[]), Err(RstError::NonPositiveOrder { .. })));
    }

    #[test]
    fn age_of_inverse_complements_the_nonzero_count() {
        let mut rng = ChaCha8Rng::seed_from_u64(42);
        for _ in 0..500 {
            let l = rng.gen_range(1..=24i64);
            let d = rng.gen_range(1..=6usize);
            let exps: Vec<i64> = (0..d).map(|_| rng.gen_range(0..l)).collect();
            let v = AgeVector::new(l, &exps).unwrap();
            let nonzero = exps.iter().filter(|&&a| a != 0).count() as i64;
            let total = age(&v).add(&age(&v.inverse()));
            assert_eq!(total, Fraction::integer(nonzero));
        }
    }

    #[test]
    fn age_is_permutation_invariant() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..200 {
            let l = rng.gen_range(1..=12i64);
            let mut exps: Vec<i64> = (0..5).map(|_| rng.gen_range(0..l)).collect();
            let before = age(&AgeVector::new(l, &exps).unwrap());
            for i in (1..exps.len()).rev() {
                exps.swap(i, rng.gen_range(0..=i));
            }
            assert_eq!(before, age(&AgeVector::new(l, &exps).unwrap()));
        }
    }

    #[test]
    fn classifier_matches_reference_cases() {
        // Diagonal order-3 subgroup of the special linear group in
        // dimension 3: ages 1 and 2.
        let g = AgeVector::new(3, &[1, 1, 1]).unwrap();
        assert_eq!(rst_classify(&g.nontrivial_powers(), false), RstClass::CanonicalNotTerminal);
        // The order-2 surface double point: age 1.
        let h = AgeVector::new(2, &[1, 1]).unwrap();
        assert_eq!(rst_classify(&h.nontrivial_powers(), false), RstClass::CanonicalNotTerminal);
        // A pseudo-reflection-like vector has age below 1.
        let r = AgeVector::new(3, &[1, 0, 0]).unwrap();
        assert_eq!(rst_classify(&[r], false), RstClass::NotCanonical);
        // Strictly terminal data.
        let t = AgeVector::new(5, &[2, 3, 4]).unwrap();
        assert_eq!(rst_classify(&[t], false), RstClass::Terminal);
        // Identity-only input is vacuously terminal unless forced in.
        let id = AgeVector::new(4, &[0, 0, 0]).unwrap();
        assert_eq!(rst_classify(&[id.clone()], false), RstClass::Terminal);
        assert_eq!(rst_classify(&[id], true), RstClass::NotCanonical);
    }

    #[test]
    fn classifier_is_monotone_under_adding_elements() {
        let mut rng = ChaCha8Rng::seed_from_u64(99);
        fn severity(c: RstClass) -> u8 {
            match c {
                RstClass::Terminal => 0,
                RstClass::CanonicalNotTerminal => 1,
                RstClass::NotCanonical => 2,
            }
        }
        for _ in 0..200 {
            let l = rng.gen_range(1..=9i64);
            let mut elements: Vec<AgeVector> = Vec::new();
            let mut last = severity(rst_classify(&elements, false));
            for _ in 0..6 {
                let exps: Vec<i64> = (0..4).map(|_| rng.gen_range(0..l)).collect();
                elements.push(AgeVector::new(l, &exps).unwrap());
                let now = severity(rst_classify(&elements, false));
                assert!(now >= last);
                last = now;
            }
        }
    }

    #[test]
    fn fractions_reduce_and_compare_exactly() {
        assert_eq!(Fraction::new(6, 4), Fraction::new(3, 2));
        assert_eq!(Fraction::new(-6, -4), Fraction::new(3, 2));
        assert_eq!(Fraction::new(6, -4), Fraction::new(-3, 2));
        assert_eq!(Fraction::new(0, 5), Fraction::integer(0));
        assert!(Fraction::new(1, 3) < Fraction::new(1, 2));
        assert!(Fraction::new(7, 3) > Fraction::integer(2));
        assert_eq!(Fraction::new(1, 2).add(&Fraction::new(1, 3)), Fraction::new(5, 6));
        assert_eq!(format!("{}", Fraction::new(4, 3)), "4/3");
        assert_eq!(format!("{}", Fraction::new(4, 2)), "2");
    }
}
