use super::*;
use crate::sysparse::parse_polynomial;
use alloc::string::ToString;
use alloc::vec;
use proptest::prelude::*;

fn space(names: &[&str]) -> VariableSpace {
    VariableSpace::new(names.iter().copied()).unwrap()
}

fn p(s: &VariableSpace, text: &str) -> Polynomial {
    parse_polynomial(text, s).unwrap()
}

#[test]
fn add_cancels_and_keeps_identity() {
    let s = space(&["x1", "x2"]);
    assert_eq!(p(&s, "x1 + x2").add(&p(&s, "-x1")).unwrap(), p(&s, "x2"));
    let q = p(&s, "3*x1^2 - 1/2");
    assert_eq!(q.add(&Polynomial::zero(&s)).unwrap(), q);
}

#[test]
fn add_merges_terms_checked_by_evaluation() {
    let s = space(&["x1", "x2"]);
    let sum = p(&s, "x2^2").add(&p(&s, "-2*x1*x2")).unwrap();
    assert_eq!(sum.to_string(), "x2^2 - 2*x1*x2");
    let points = [(1, 2), (-3, 5), (7, -1), (0, 4), (2, 9)];
    for (a, b) in points {
        let (a, b) = (ratio(a, 3), ratio(b, 7));
        let expect = &b * &b - rat(2) * &a * &b;
        assert_eq!(sum.evaluate_exact(&[a, b]).unwrap(), expect);
    }
}

#[test]
fn space_mismatch_is_an_error() {
    let a = space(&["x"]);
    let b = space(&["y"]);
    assert_eq!(
        Polynomial::one(&a).add(&Polynomial::one(&b)),
        Err(PolyError::SpaceMismatch)
    );
    assert_eq!(
        Polynomial::one(&a).mul(&Polynomial::one(&b)),
        Err(PolyError::SpaceMismatch)
    );
}

#[test]
fn equal_names_mean_equal_spaces() {
    let a = space(&["x", "y"]);
    let b = space(&["x", "y"]);
    assert!(Polynomial::one(&a).add(&Polynomial::one(&b)).is_ok());
    assert!(VariableSpace::new(["x", "x"]).is_err());
}

#[test]
fn mul_examples() {
    let s = space(&["x1", "x2"]);
    assert_eq!(p(&s, "-1").mul(&p(&s, "1")).unwrap(), p(&s, "-1"));
    assert!(p(&s, "x1 + 3").mul(&Polynomial::zero(&s)).unwrap().is_zero());
    assert_eq!(p(&s, "x1").mul(&p(&s, "x2^2")).unwrap().to_string(), "x1*x2^2");
}

#[test]
fn differentiate_examples() {
    let s = space(&["x1", "x2"]);
    assert_eq!(p(&s, "x2^2").differentiate(1).unwrap(), p(&s, "2*x2"));
    assert_eq!(p(&s, "x1*x2^2").differentiate(0).unwrap(), p(&s, "x2^2"));
    assert!(p(&s, "7/3").differentiate(0).unwrap().is_zero());
    assert_eq!(
        p(&s, "x1").differentiate(2),
        Err(PolyError::VariableOutOfRange { index: 2, nvars: 2 })
    );
}

#[test]
fn substitute_examples() {
    let sw = space(&["x", "w"]);
    let sy = space(&["x", "y"]);
    let mut sigma = BTreeMap::new();
    sigma.insert(0, p(&sy, "x"));
    sigma.insert(1, p(&sy, "y^2"));
    assert_eq!(p(&sw, "-x + w").substitute(&sigma, &sy).unwrap(), p(&sy, "-x + y^2"));

    let mut id = BTreeMap::new();
    id.insert(0, p(&sw, "x"));
    id.insert(1, p(&sw, "w"));
    let q = p(&sw, "x^3*w - 5/2*w + 1");
    assert_eq!(q.substitute(&id, &sw).unwrap(), q);

    let mut kill = BTreeMap::new();
    kill.insert(0, Polynomial::zero(&sw));
    kill.insert(1, p(&sw, "w"));
    assert!(p(&sw, "x*(w^2 + 3)").substitute(&kill, &sw).unwrap().is_zero());

    let mut missing = BTreeMap::new();
    missing.insert(0, p(&sw, "x"));
    assert_eq!(
        p(&sw, "x*w").substitute(&missing, &sw),
        Err(PolyError::MissingImage { index: 1 })
    );
    // unused variables need no image
    assert_eq!(p(&sw, "x^2").substitute(&missing, &sw).unwrap(), p(&sw, "x^2"));
}

#[test]
fn evaluate_examples() {
    let s = space(&["x1", "x2"]);
    assert_eq!(p(&s, "x2^2").evaluate(&[0.0, 3.0]).unwrap(), 9.0);
    assert_eq!(Polynomial::zero(&s).evaluate(&[1.5, -2.0]).unwrap(), 0.0);
    let q = p(&s, "x1*x2^2");
    assert_eq!(q.evaluate(&[2.0, 3.0]).unwrap(), 18.0);
    assert_eq!(q.evaluate_exact(&[rat(2), rat(3)]).unwrap(), rat(18));
    assert_eq!(
        q.evaluate(&[1.0]),
        Err(PolyError::LengthMismatch { expected: 2, found: 1 })
    );
}

#[test]
fn lie_derivative_examples() {
    let s = space(&["y"]);
    assert_eq!(p(&s, "y^2").lie_derivative(&[p(&s, "-y")]).unwrap(), p(&s, "-2*y^2"));

    let s = space(&["x1", "x2"]);
    let field = [p(&s, "x2"), p(&s, "-x1")];
    assert_eq!(p(&s, "x2^2").lie_derivative(&field).unwrap(), p(&s, "-2*x1*x2"));
    assert!(p(&s, "4").lie_derivative(&field).unwrap().is_zero());
    assert!(p(&s, "x1").lie_derivative(&field[..1]).is_err());
}

#[test]
fn degree_sentinel() {
    let s = space(&["x"]);
    assert_eq!(Polynomial::zero(&s).degree(), Degree::NegInfinity);
    assert_eq!(p(&s, "5").degree(), Degree::Finite(0));
    assert_eq!(p(&s, "x^3 + x").degree(), Degree::Finite(3));
    assert!(Degree::NegInfinity < Degree::Finite(0));
    assert_eq!(Degree::NegInfinity + Degree::Finite(2), Degree::NegInfinity);
    assert!(Polynomial::zero(&s).is_constant());
}

#[test]
fn rendering() {
    let s = space(&["x1", "x2", "p4"]);
    assert_eq!(p(&s, "2*x1^3 - 7*x1*x2^2").to_string(), "-7*x1*x2^2 + 2*x1^3");
    assert_eq!(p(&s, "1485/2*p4").to_string(), "1485/2*p4");
    assert_eq!(p(&s, "-1/3 - x1").to_string(), "-1/3 - x1");
    assert_eq!(Polynomial::zero(&s).to_string(), "0");
}

#[test]
fn rational_strings() {
    assert_eq!(parse_rational("1485/2"), Some(ratio(1485, 2)));
    assert_eq!(parse_rational("-4/6"), Some(ratio(-2, 3)));
    assert_eq!(parse_rational("0"), Some(rat(0)));
    assert_eq!(parse_rational("1/0"), None);
    assert_eq!(parse_rational("1/-2"), None);
    assert_eq!(parse_rational("1.5"), None);
    assert_eq!(parse_rational(""), None);
    assert_eq!(parse_rational("-"), None);
}

// ---- properties ----

const NVARS: usize = 4;

fn arb_rational() -> impl Strategy<Value = Rational> {
    (-20i64..=20, 1i64..=6).prop_map(|(n, d)| ratio(n, d))
}

fn arb_poly(max_deg: u32) -> impl Strategy<Value = Vec<(Rational, Vec<u32>)>> {
    prop::collection::vec(
        (arb_rational(), prop::collection::vec(0..=max_deg, NVARS)),
        0..6,
    )
    .prop_map(move |terms| {
        terms
            .into_iter()
            .map(|(c, mut e)| {
                // clip total degree
                while e.iter().sum::<u32>() > max_deg {
                    let i = e.iter().position(|&x| x > 0).unwrap();
                    e[i] -= 1;
                }
                (c, e)
            })
            .collect()
    })
}

fn sp4() -> VariableSpace {
    space(&["a", "b", "c", "d"])
}

fn build(terms: Vec<(Rational, Vec<u32>)>) -> Polynomial {
    Polynomial::from_terms(&sp4(), terms).unwrap()
}

fn arb_affine_field() -> impl Strategy<Value = Vec<Polynomial>> {
    prop::collection::vec(arb_poly(1), NVARS).prop_map(|v| v.into_iter().map(build).collect())
}

proptest! {
    #[test]
    fn differentiate_is_linear(pt in arb_poly(4), qt in arb_poly(4), a in arb_rational(), b in arb_rational(), i in 0..NVARS) {
        let (pp, q) = (build(pt), build(qt));
        let lhs = pp.scale(&a).add(&q.scale(&b)).unwrap().differentiate(i).unwrap();
        let rhs = pp.differentiate(i).unwrap().scale(&a).add(&q.differentiate(i).unwrap().scale(&b)).unwrap();
        prop_assert_eq!(lhs, rhs);
    }

    #[test]
    fn leibniz(pt in arb_poly(4), qt in arb_poly(4), i in 0..NVARS) {
        let (pp, q) = (build(pt), build(qt));
        let lhs = pp.mul(&q).unwrap().differentiate(i).unwrap();
        let rhs = pp.differentiate(i).unwrap().mul(&q).unwrap()
            .add(&pp.mul(&q.differentiate(i).unwrap()).unwrap()).unwrap();
        prop_assert_eq!(lhs, rhs);
    }

    #[test]
    fn mul_degree_is_additive(pt in arb_poly(4), qt in arb_poly(4)) {
        let (pp, q) = (build(pt), build(qt));
        prop_assert_eq!(pp.mul(&q).unwrap().degree(), pp.degree() + q.degree());
    }

    #[test]
    fn lie_derivative_linear_and_additive(
        pt in arb_poly(3), qt in arb_poly(3), a in arb_rational(),
        f in arb_affine_field(), g in arb_affine_field(),
    ) {
        let (pp, q) = (build(pt), build(qt));
        let lhs = pp.scale(&a).add(&q).unwrap().lie_derivative(&f).unwrap();
        let rhs = pp.lie_derivative(&f).unwrap().scale(&a).add(&q.lie_derivative(&f).unwrap()).unwrap();
        prop_assert_eq!(lhs, rhs);

        let fg: Vec<Polynomial> = f.iter().zip(&g).map(|(x, y)| x.add(y).unwrap()).collect();
        let lhs = pp.lie_derivative(&fg).unwrap();
        let rhs = pp.lie_derivative(&f).unwrap().add(&pp.lie_derivative(&g).unwrap()).unwrap();
        prop_assert_eq!(lhs, rhs);
    }

    #[test]
    fn affine_fields_do_not_raise_degree(pt in arb_poly(4), f in arb_affine_field()) {
        let pp = build(pt);
        prop_assert!(pp.lie_derivative(&f).unwrap().degree() <= pp.degree());
    }

    #[test]
    fn substitution_composes(
        pt in arb_poly(3),
        sigma_t in prop::collection::vec(arb_poly(2), NVARS),
        tau_t in prop::collection::vec(arb_poly(2), NVARS),
    ) {
        let s = sp4();
        let pp = build(pt);
        let sigma: BTreeMap<usize, Polynomial> = sigma_t.into_iter().map(build).enumerate().collect();
        let tau: BTreeMap<usize, Polynomial> = tau_t.into_iter().map(build).enumerate().collect();
        let lhs = pp.substitute(&sigma, &s).unwrap().substitute(&tau, &s).unwrap();
        let composed: BTreeMap<usize, Polynomial> = sigma
            .iter()
            .map(|(&k, v)| (k, v.substitute(&tau, &s).unwrap()))
            .collect();
        prop_assert_eq!(lhs, pp.substitute(&composed, &s).unwrap());
    }

    #[test]
    fn float_evaluation_tracks_exact(
        terms in prop::collection::vec(
            ((-1000i64..=1000, 1i64..=8), prop::collection::vec(0u32..=3, NVARS)), 1..6),
        pt in prop::collection::vec((-1000i64..=1000, 1i64..=4), NVARS),
    ) {
        let poly = build(terms.into_iter().map(|((n, d), e)| (ratio(n, d), e)).collect());
        let exact_pt: Vec<Rational> = pt.iter().map(|&(n, d)| ratio(n, d)).collect();
        let float_pt: Vec<f64> = exact_pt.iter().map(rational_to_f64).collect();
        let exact = rational_to_f64(&poly.evaluate_exact(&exact_pt).unwrap());
        let approx = poly.evaluate(&float_pt).unwrap();
        // cancellation is measured against the size of the summands
        let scale: f64 = poly.terms()
            .map(|(m, c)| (rational_to_f64(c) * monomial_value(m.exponents(), &float_pt)).abs())
            .sum();
        prop_assert!((approx - exact).abs() <= 1e-12 * scale.max(f64::MIN_POSITIVE), "{approx} vs {exact}");
    }
}

#[test]
fn pow_matches_repeated_mul() {
    let s = space(&["x", "y"]);
    let q = p(&s, "x - 2*y + 1/2");
    let mut acc = Polynomial::one(&s);
    for e in 0..6 {
        assert_eq!(q.pow(e), acc);
        acc = acc.mul(&q).unwrap();
    }
}

#[test]
fn relabel_into_larger_space() {
    let small = space(&["y"]);
    let big = space(&["x", "y", "w"]);
    let q = p(&small, "3*y^2 - 1").relabel(&big, &[1]).unwrap();
    assert_eq!(q, p(&big, "3*y^2 - 1"));
    assert_eq!(q.variables(), vec![1]);
}
