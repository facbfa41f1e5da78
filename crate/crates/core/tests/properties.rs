//! Randomized property suites driven by fixed seeds: polynomial ring laws,
//! the substitution homomorphism, the Leibniz rule, vanishing-order
//! additivity, field and Frobenius identities, Groebner normal forms,
//! parser round-trips, exact age identities, and chart-overlap consistency
//! across both blow-up towers.

use std::collections::BTreeMap;
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use wildquot::field::{Felt, Field};
use wildquot::groebner::{buchberger, ideal_membership, normal_form, GroebnerConfig};
use wildquot::parse::parse_poly;
use wildquot::poly::{MonomialOrder, Poly, PolyRing};
use wildquot::rst::{age, rst_classify, AgeVector, Fraction, RstClass};
use wildquot::scenario::{run_case, CaseKind, RunConfig};

fn f81() -> Field {
    Field::new(3, 4, 0).expect("valid field parameters")
}

fn random_poly(
    ring: &Arc<PolyRing>,
    elements: &[Felt],
    rng: &mut ChaCha8Rng,
    max_terms: usize,
    max_exp: u32,
) -> Poly {
    let n = ring.num_vars();
    let count = rng.gen_range(0..=max_terms);
    let mut acc = Poly::zero(ring);
    for _ in 0..count {
        let mono: Vec<u32> = (0..n).map(|_| rng.gen_range(0..=max_exp)).collect();
        let c = elements[rng.gen_range(0..elements.len())];
        acc = acc.add(&Poly::monomial(ring, &mono, c)).expect("same ring");
    }
    acc
}

#[test]
fn ring_axioms_hold_on_random_triples() {
    let field = f81();
    let elements: Vec<Felt> = field.elements().collect();
    let ring = PolyRing::new(field.clone(), &["x", "y", "z"], MonomialOrder::Grevlex);
    let mut rng = ChaCha8Rng::seed_from_u64(101);
    for _ in 0..1000 {
        let f = random_poly(&ring, &elements, &mut rng, 4, 4);
        let g = random_poly(&ring, &elements, &mut rng, 4, 4);
        let h = random_poly(&ring, &elements, &mut rng, 4, 4);
        assert_eq!(f.add(&g).unwrap(), g.add(&f).unwrap());
        assert_eq!(f.mul(&g).unwrap(), g.mul(&f).unwrap());
        assert_eq!(
            f.add(&g).unwrap().add(&h).unwrap(),
            f.add(&g.add(&h).unwrap()).unwrap()
        );
        assert_eq!(
            f.mul(&g).unwrap().mul(&h).unwrap(),
            f.mul(&g.mul(&h).unwrap()).unwrap()
        );
        assert_eq!(
            f.add(&g).unwrap().mul(&h).unwrap(),
            f.mul(&h).unwrap().add(&g.mul(&h).unwrap()).unwrap()
        );
        assert_eq!(f.sub(&g).unwrap(), f.add(&g.neg()).unwrap());
        assert!(f.sub(&f).unwrap().is_zero());
    }
}

#[test]
fn substitution_is_a_ring_homomorphism() {
    let field = f81();
    let elements: Vec<Felt> = field.elements().collect();
    let source = PolyRing::new(field.clone(), &["x", "y", "z"], MonomialOrder::Grevlex);
    let target = PolyRing::new(field.clone(), &["s", "t"], MonomialOrder::Grevlex);
    let mut rng = ChaCha8Rng::seed_from_u64(202);
    for _ in 0..1000 {
        let f = random_poly(&source, &elements, &mut rng, 3, 3);
        let g = random_poly(&source, &elements, &mut rng, 3, 3);
        let images: Vec<Poly> = (0..source.num_vars())
            .map(|_| random_poly(&target, &elements, &mut rng, 2, 2))
            .collect();
        let fs = f.substitute(&images).unwrap();
        let gs = g.substitute(&images).unwrap();
        assert_eq!(f.add(&g).unwrap().substitute(&images).unwrap(), fs.add(&gs).unwrap());
        assert_eq!(f.mul(&g).unwrap().substitute(&images).unwrap(), fs.mul(&gs).unwrap());
    }
}

#[test]
fn leibniz_rule_holds() {
    let field = f81();
    let elements: Vec<Felt> = field.elements().collect();
    let ring = PolyRing::new(field.clone(), &["x", "y", "z"], MonomialOrder::Grevlex);
    let mut rng = ChaCha8Rng::seed_from_u64(303);
    for _ in 0..1000 {
        let f = random_poly(&ring, &elements, &mut rng, 4, 5);
        let g = random_poly(&ring, &elements, &mut rng, 4, 5);
        let v = rng.gen_range(0..ring.num_vars());
        let product_rule = f
            .partial_derivative(v)
            .mul(&g)
            .unwrap()
            .add(&f.mul(&g.partial_derivative(v)).unwrap())
            .unwrap();
        assert_eq!(f.mul(&g).unwrap().partial_derivative(v), product_rule);
    }
}

#[test]
fn vanishing_order_is_additive() {
    let field = f81();
    let elements: Vec<Felt> = field.elements().collect();
    let ring = PolyRing::new(field.clone(), &["x", "y", "z"], MonomialOrder::Grevlex);
    let mut rng = ChaCha8Rng::seed_from_u64(404);
    let mut checked = 0usize;
    while checked < 1000 {
        let f = random_poly(&ring, &elements, &mut rng, 3, 4);
        let g = random_poly(&ring, &elements, &mut rng, 3, 4);
        if f.is_zero() || g.is_zero() {
            continue;
        }
        let v = rng.gen_range(0..ring.num_vars());
        let sum = f.vanishing_order(v).unwrap() + g.vanishing_order(v).unwrap();
        assert_eq!(f.mul(&g).unwrap().vanishing_order(v), Some(sum));
        checked += 1;
    }
}

#[test]
fn field_and_frobenius_identities_exhaustive() {
    let field = f81();
    let elements: Vec<Felt> = field.elements().collect();
    for &x in &elements {
        assert_eq!(field.frobenius(x), field.pow(x, 3));
        if !field.is_zero(x) {
            let inv = field.inv(x).unwrap();
            assert_eq!(field.mul(x, inv), field.one());
        }
        for &y in &elements {
            // Freshman's dream in characteristic 3.
            assert_eq!(
                field.pow(field.add(x, y), 3),
                field.add(field.pow(x, 3), field.pow(y, 3))
            );
            assert_eq!(field.mul(x, y), field.mul(y, x));
        }
    }
}

#[test]
fn groebner_normal_form_is_idempotent() {
    let field = f81();
    let elements: Vec<Felt> = field.elements().collect();
    let ring = PolyRing::new(field.clone(), &["x", "y", "z"], MonomialOrder::Grevlex);
    let cfg = GroebnerConfig::default();
    let mut rng = ChaCha8Rng::seed_from_u64(505);
    for _ in 0..300 {
        let gens: Vec<Poly> = (0..rng.gen_range(1..=3))
            .map(|_| random_poly(&ring, &elements, &mut rng, 3, 2))
            .filter(|p| !p.is_zero())
            .collect();
        if gens.is_empty() {
            continue;
        }
        let gb = buchberger(&gens, &cfg).unwrap();
        let f = random_poly(&ring, &elements, &mut rng, 4, 3);
        let nf = normal_form(&f, &gb, &cfg).unwrap();
        assert_eq!(normal_form(&nf, &gb, &cfg).unwrap(), nf);
        // The reduction difference always lies in the ideal.
        let diff = f.sub(&nf).unwrap();
        assert!(ideal_membership(&diff, &gb, &cfg).unwrap());
    }
}

#[test]
fn parse_render_round_trip_on_random_polynomials() {
    let field = f81();
    let elements: Vec<Felt> = field.elements().collect();
    let ring = PolyRing::new(field.clone(), &["x1", "x2", "x3", "x4"], MonomialOrder::Grevlex);
    let consts = BTreeMap::new();
    let mut rng = ChaCha8Rng::seed_from_u64(606);
    for _ in 0..1000 {
        let f = random_poly(&ring, &elements, &mut rng, 5, 6);
        let reparsed = parse_poly(&ring, &f.render(), &consts).unwrap();
        assert_eq!(reparsed, f, "render was `{}`", f.render());
        // Idempotence: printing the reparse changes nothing further.
        assert_eq!(reparsed.render(), f.render());
    }
}

#[test]
fn parse_render_round_trip_on_displayed_equations() {
    let field = f81();
    // Fix a specialization to give the named constants concrete values.
    let a = field.gen();
    let alpha = field.sub(field.pow(a, 3), a);
    let b = field.gen();
    let mut consts = BTreeMap::new();
    consts.insert("alpha".to_string(), alpha);
    consts.insert("b".to_string(), b);
    let corpus: Vec<(Vec<&str>, &str)> = vec![
        (
            vec!["x1", "x2", "x3", "x4"],
            "x2^9 - x3^2 + x1^9*x4 + (1+alpha^2)*x1^6*x2^6 - alpha^2*x1^8*x2^5 \
             + (1+alpha^2)^2*x1^12*x2^3 + alpha^2*(1+alpha^2)*x1^14*x2^2 + alpha^4*x1^16*x2",
        ),
        (vec!["x1", "x2", "x3", "x4"], "x2^9 - x3^2 + x1^9*x4"),
        (vec!["x1", "x2", "x3", "x4"], "0"),
        (vec!["x1", "u_t", "v_t", "x4"], "x1"),
        (vec!["x1", "u_t", "v_t", "x4"], "v_t"),
        (vec!["x1", "u_t", "t4", "x4"], "u_t^9 + x4"),
        (vec!["t_u", "x2", "u4", "x4"], "1 + t_u^9*x4"),
        (vec!["x1", "u_t", "y", "x4"], "y^3 + b^6*x4"),
        (vec!["z", "u_t", "v_t", "x4"], "1 + b^6*z^3*x4"),
        (vec!["x", "y", "z"], "y^2 - x*z"),
        (vec!["x", "y"], "-x + (-y)^3 - (x - y)^2"),
    ];
    for (vars, text) in corpus {
        let ring = PolyRing::new(field.clone(), &vars, MonomialOrder::Grevlex);
        let once = parse_poly(&ring, text, &consts).unwrap();
        let twice = parse_poly(&ring, &once.render(), &consts).unwrap();
        assert_eq!(once, twice, "round trip drifted for `{text}`");
    }
    let ring = PolyRing::new(field.clone(), &["x1"], MonomialOrder::Grevlex);
    assert!(parse_poly(&ring, "x1 + ", &consts).is_err());
    assert!(parse_poly(&ring, "x9", &consts).is_err());
}

#[test]
fn age_of_inverse_complements_nonzero_exponents() {
    let mut rng = ChaCha8Rng::seed_from_u64(707);
    for _ in 0..1000 {
        let order = rng.gen_range(1..=60i64);
        let dim = rng.gen_range(1..=5usize);
        let exps: Vec<i64> = (0..dim).map(|_| rng.gen_range(0..order)).collect();
        let v = AgeVector::new(order, &exps).unwrap();
        let nonzero = exps.iter().filter(|&&e| e != 0).count() as i64;
        let total = age(&v).add(&age(&v.inverse()));
        assert_eq!(total, Fraction::integer(nonzero));
        // Age is invariant under permutation of the exponents.
        let mut rotated = exps.clone();
        rotated.rotate_left(1);
        let w = AgeVector::new(order, &rotated).unwrap();
        assert_eq!(age(&v), age(&w));
    }
}

#[test]
fn classifier_is_monotone_under_element_addition() {
    fn rank(class: RstClass) -> u8 {
        match class {
            RstClass::NotCanonical => 0,
            RstClass::CanonicalNotTerminal => 1,
            RstClass::Terminal => 2,
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(808);
    for _ in 0..1000 {
        let order = rng.gen_range(2..=12i64);
        let dim = rng.gen_range(1..=4usize);
        let sample = |rng: &mut ChaCha8Rng| {
            let exps: Vec<i64> = (0..dim).map(|_| rng.gen_range(0..order)).collect();
            AgeVector::new(order, &exps).unwrap()
        };
        let mut set: Vec<AgeVector> = (0..rng.gen_range(1..=4)).map(|_| sample(&mut rng)).collect();
        let before = rank(rst_classify(&set, false));
        set.push(sample(&mut rng));
        let after = rank(rst_classify(&set, false));
        assert!(after <= before, "adding an element improved the class");
    }
}

#[test]
fn chart_overlaps_agree_on_both_towers() {
    let cfg = RunConfig { num_specializations: 3, ..RunConfig::default() };
    for case in [CaseKind::BZero, CaseKind::BNonzero] {
        let report = run_case(&cfg, case);
        for spec in &report.specializations {
            assert!(spec.errors.is_empty(), "{case:?} seed {}: {:?}", spec.seed, spec.errors);
            let tower = spec.tower.as_ref().expect("tower present");
            for step in &tower.steps {
                for (pair, ok) in &step.overlaps_ok {
                    assert!(ok, "{case:?} seed {} step {}: overlap {pair} failed", spec.seed, step.index);
                }
                for (chart, ok) in &step.coverage_ok {
                    assert!(ok, "{case:?} seed {} step {}: coverage {chart} failed", spec.seed, step.index);
                }
            }
        }
    }
}
