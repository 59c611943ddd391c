//! Sparse multivariate polynomials with exact rational coefficients.
//!
//! A [`Polynomial`] lives over a [`VariableSpace`]; binary operations check that
//! both operands share the same space. Terms are kept in a `BTreeMap` keyed by
//! graded-lex [`Monomial`], so no stored coefficient is ever zero and iteration
//! order is deterministic.

mod monomial;
mod space;

pub use monomial::Monomial;
pub use space::VariableSpace;

use alloc::collections::BTreeMap;
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

use num_bigint::BigInt;
use num_traits::{One, Signed, ToPrimitive, Zero};

pub type Rational = num_rational::BigRational;

pub fn rat(n: i64) -> Rational {
    Rational::from_integer(BigInt::from(n))
}

pub fn ratio(n: i64, d: i64) -> Rational {
    Rational::new(BigInt::from(n), BigInt::from(d))
}

fn common_denominator<'a>(coeffs: impl Iterator<Item = &'a Rational>) -> BigInt {
    use num_integer::Integer;
    coeffs.fold(BigInt::one(), |acc, c| {
        if (&acc % c.denom()).is_zero() {
            acc
        } else {
            acc.lcm(c.denom())
        }
    })
}

/// `c * den` for a multiple `den` of the denominator of `c`.
fn scaled_numer(c: &Rational, den: &BigInt) -> BigInt {
    if c.denom().is_one() {
        c.numer() * den
    } else {
        c.numer() * (den / c.denom())
    }
}

/// A polynomial as integer coefficients over one positive denominator, for
/// repeated use in [`linear_combination`].
#[derive(Clone, Debug)]
pub struct ClearedPolynomial {
    space: VariableSpace,
    terms: Vec<(Monomial, BigInt)>,
    den: BigInt,
}

impl From<&Polynomial> for ClearedPolynomial {
    fn from(p: &Polynomial) -> Self {
        let den = common_denominator(p.terms.values());
        let terms = p.terms.iter().map(|(m, c)| (m.clone(), scaled_numer(c, &den))).collect();
        Self {
            space: p.space.clone(),
            terms,
            den,
        }
    }
}

/// `sum k_i * p_i` over `space`.
pub fn linear_combination<'a>(
    space: &VariableSpace,
    parts: impl IntoIterator<Item = (&'a Rational, &'a ClearedPolynomial)>,
) -> Result<Polynomial, PolyError> {
    use num_integer::Integer;
    let parts: Vec<_> = parts.into_iter().filter(|(k, p)| !k.is_zero() && !p.terms.is_empty()).collect();
    let mut den = BigInt::one();
    for (k, p) in &parts {
        if !p.space.same_as(space) {
            return Err(PolyError::SpaceMismatch);
        }
        den = den.lcm(&(k.denom() * &p.den));
    }
    let mut acc = IntAccumulator::default();
    for (k, p) in parts {
        let scale = k.numer() * (&den / (k.denom() * &p.den));
        for (m, c) in &p.terms {
            acc.add(m.clone(), &scale * c);
        }
    }
    Ok(acc.finish(space, &den))
}

/// A positive denominator split into small prime powers and the rest, for
/// reducing many fractions over it. Denominators met in practice are products
/// of small primes, where trial division is far cheaper than a gcd.
struct Denominator {
    d: BigInt,
    small: Vec<(u32, u32)>,
    rough: BigInt,
}

impl Denominator {
    const TRIAL_LIMIT: u32 = 1000;

    fn new(d: &BigInt) -> Self {
        let mut rough = d.clone();
        let mut small = Vec::new();
        let mut p = 2;
        while p < Self::TRIAL_LIMIT && !rough.is_one() {
            let mut e = 0;
            while (&rough % p).is_zero() {
                rough /= p;
                e += 1;
            }
            if e > 0 {
                small.push((p, e));
            }
            p += if p == 2 { 1 } else { 2 };
        }
        Self {
            d: d.clone(),
            small,
            rough,
        }
    }

    /// `n / d` in lowest terms.
    fn reduce(&self, n: BigInt) -> Rational {
        use num_integer::Integer;
        let mut g = BigInt::one();
        let mut n = n;
        for &(p, e) in &self.small {
            for _ in 0..e {
                if !(&n % p).is_zero() {
                    break;
                }
                n /= p;
                g *= p;
            }
        }
        if !self.rough.is_one() {
            let h = self.rough.gcd(&(&n % &self.rough));
            if !h.is_one() {
                n /= &h;
                g *= h;
            }
        }
        Rational::new_raw(n, &self.d / g)
    }
}

/// Integer sums per monomial, divided by a common denominator at the end.
#[derive(Default)]
struct IntAccumulator {
    terms: BTreeMap<Monomial, BigInt>,
}

impl IntAccumulator {
    fn add(&mut self, m: Monomial, c: BigInt) {
        match self.terms.entry(m) {
            alloc::collections::btree_map::Entry::Vacant(v) => {
                v.insert(c);
            }
            alloc::collections::btree_map::Entry::Occupied(mut o) => *o.get_mut() += c,
        }
    }

    fn finish(self, space: &VariableSpace, den: &BigInt) -> Polynomial {
        let den = Denominator::new(den);
        let terms = self
            .terms
            .into_iter()
            .filter(|(_, c)| !c.is_zero())
            .map(|(m, c)| (m, den.reduce(c)))
            .collect();
        Polynomial {
            space: space.clone(),
            terms,
        }
    }
}

/// Parses `"-3"`, `"1485/2"`. Whitespace is not allowed; the denominator must be
/// positive and nonzero. Result is normalized.
pub fn parse_rational(s: &str) -> Option<Rational> {
    fn int(s: &str) -> Option<BigInt> {
        let digits = s.strip_prefix('-').unwrap_or(s);
        if digits.is_empty() || !digits.bytes().all(|b| b.is_ascii_digit()) {
            return None;
        }
        BigInt::parse_bytes(s.as_bytes(), 10)
    }
    match s.split_once('/') {
        None => int(s).map(Rational::from_integer),
        Some((n, d)) => {
            if d.starts_with('-') {
                return None;
            }
            let d = int(d)?;
            if d.is_zero() {
                return None;
            }
            Some(Rational::new(int(n)?, d))
        }
    }
}

/// Total degree, with the zero polynomial at negative infinity.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Degree {
    NegInfinity,
    Finite(u32),
}

impl Degree {
    pub fn finite(self) -> Option<u32> {
        match self {
            Degree::NegInfinity => None,
            Degree::Finite(d) => Some(d),
        }
    }
}

/// Degree of a product.
impl core::ops::Add for Degree {
    type Output = Degree;

    fn add(self, other: Degree) -> Degree {
        match (self, other) {
            (Degree::Finite(a), Degree::Finite(b)) => Degree::Finite(a + b),
            _ => Degree::NegInfinity,
        }
    }
}

impl fmt::Display for Degree {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Degree::NegInfinity => f.write_str("-inf"),
            Degree::Finite(d) => write!(f, "{d}"),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum PolyError {
    SpaceMismatch,
    DuplicateVariable(String),
    VariableOutOfRange { index: usize, nvars: usize },
    MissingImage { index: usize },
    LengthMismatch { expected: usize, found: usize },
}

impl fmt::Display for PolyError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PolyError::SpaceMismatch => f.write_str("polynomials live over different variable spaces"),
            PolyError::DuplicateVariable(name) => write!(f, "duplicate variable `{name}`"),
            PolyError::VariableOutOfRange { index, nvars } => {
                write!(f, "variable index {index} out of range for {nvars} variables")
            }
            PolyError::MissingImage { index } => {
                write!(f, "substitution has no image for variable {index}")
            }
            PolyError::LengthMismatch { expected, found } => {
                write!(f, "expected {expected} entries, found {found}")
            }
        }
    }
}

impl core::error::Error for PolyError {}

#[derive(Clone, PartialEq, Eq)]
pub struct Polynomial {
    space: VariableSpace,
    terms: BTreeMap<Monomial, Rational>,
}

impl Polynomial {
    pub fn zero(space: &VariableSpace) -> Self {
        Self {
            space: space.clone(),
            terms: BTreeMap::new(),
        }
    }

    pub fn constant(space: &VariableSpace, c: Rational) -> Self {
        let mut p = Self::zero(space);
        p.add_term(Monomial::one(space.len()), c);
        p
    }

    pub fn one(space: &VariableSpace) -> Self {
        Self::constant(space, Rational::one())
    }

    pub fn var(space: &VariableSpace, index: usize) -> Result<Self, PolyError> {
        check_index(space, index)?;
        let mut p = Self::zero(space);
        p.add_term(Monomial::var(space.len(), index), Rational::one());
        Ok(p)
    }

    /// Builds a polynomial from `(coefficient, exponents)` pairs, merging
    /// repeated monomials.
    pub fn from_terms<I>(space: &VariableSpace, terms: I) -> Result<Self, PolyError>
    where
        I: IntoIterator<Item = (Rational, Vec<u32>)>,
    {
        let mut p = Self::zero(space);
        for (c, e) in terms {
            if e.len() != space.len() {
                return Err(PolyError::LengthMismatch {
                    expected: space.len(),
                    found: e.len(),
                });
            }
            p.add_term(Monomial::from_exponents(e), c);
        }
        Ok(p)
    }

    pub fn space(&self) -> &VariableSpace {
        &self.space
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn degree(&self) -> Degree {
        self.terms
            .keys()
            .next_back()
            .map_or(Degree::NegInfinity, |m| Degree::Finite(m.degree()))
    }

    /// Degree at most zero.
    pub fn is_constant(&self) -> bool {
        self.degree() <= Degree::Finite(0)
    }

    pub fn constant_term(&self) -> Rational {
        self.coefficient(&Monomial::one(self.space.len()))
    }

    pub fn coefficient(&self, m: &Monomial) -> Rational {
        self.terms.get(m).cloned().unwrap_or_else(Rational::zero)
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    /// Terms in ascending graded-lex order.
    pub fn terms(&self) -> impl DoubleEndedIterator<Item = (&Monomial, &Rational)> + ExactSizeIterator {
        self.terms.iter()
    }

    /// Indices of the variables that occur in some term.
    pub fn variables(&self) -> Vec<usize> {
        (0..self.space.len())
            .filter(|&i| self.terms.keys().any(|m| m.exponent(i) > 0))
            .collect()
    }

    pub fn uses_variable(&self, index: usize) -> bool {
        self.terms.keys().any(|m| m.exponent(index) > 0)
    }

    pub(crate) fn add_term(&mut self, m: Monomial, c: Rational) {
        if c.is_zero() {
            return;
        }
        match self.terms.entry(m) {
            alloc::collections::btree_map::Entry::Vacant(v) => {
                v.insert(c);
            }
            alloc::collections::btree_map::Entry::Occupied(mut o) => {
                *o.get_mut() += c;
                if o.get().is_zero() {
                    o.remove();
                }
            }
        }
    }

    fn check_space(&self, other: &Self) -> Result<(), PolyError> {
        if self.space.same_as(&other.space) {
            Ok(())
        } else {
            Err(PolyError::SpaceMismatch)
        }
    }

    pub fn add(&self, other: &Self) -> Result<Self, PolyError> {
        self.check_space(other)?;
        let mut out = self.clone();
        for (m, c) in &other.terms {
            out.add_term(m.clone(), c.clone());
        }
        Ok(out)
    }

    pub fn sub(&self, other: &Self) -> Result<Self, PolyError> {
        self.check_space(other)?;
        let mut out = self.clone();
        for (m, c) in &other.terms {
            out.add_term(m.clone(), -c.clone());
        }
        Ok(out)
    }

    pub fn neg(&self) -> Self {
        Self {
            space: self.space.clone(),
            terms: self.terms.iter().map(|(m, c)| (m.clone(), -c.clone())).collect(),
        }
    }

    pub fn scale(&self, k: &Rational) -> Self {
        if k.is_zero() {
            return Self::zero(&self.space);
        }
        Self {
            space: self.space.clone(),
            terms: self.terms.iter().map(|(m, c)| (m.clone(), c * k)).collect(),
        }
    }

    /// `self += k * other`.
    pub fn add_scaled(&mut self, k: &Rational, other: &Self) -> Result<(), PolyError> {
        self.check_space(other)?;
        if k.is_zero() {
            return Ok(());
        }
        for (m, c) in &other.terms {
            self.add_term(m.clone(), c * k);
        }
        Ok(())
    }

    pub fn mul(&self, other: &Self) -> Result<Self, PolyError> {
        self.check_space(other)?;
        let (a, da) = self.integer_terms();
        let (b, db) = other.integer_terms();
        let mut acc = IntAccumulator::default();
        for (ma, ca) in &a {
            for (mb, cb) in &b {
                acc.add(ma.mul(mb), ca * cb);
            }
        }
        Ok(acc.finish(&self.space, &(da * db)))
    }

    /// Terms scaled by the lcm of the denominators, and that lcm.
    fn integer_terms(&self) -> (Vec<(&Monomial, BigInt)>, BigInt) {
        let den = common_denominator(self.terms.values());
        let terms = self.terms.iter().map(|(m, c)| (m, scaled_numer(c, &den))).collect();
        (terms, den)
    }

    pub fn pow(&self, e: u32) -> Self {
        let mut result = Self::one(&self.space);
        let mut base = self.clone();
        let mut e = e;
        while e > 0 {
            if e & 1 == 1 {
                result = result.mul(&base).expect("same space");
            }
            e >>= 1;
            if e > 0 {
                base = base.mul(&base).expect("same space");
            }
        }
        result
    }

    /// Formal partial derivative with respect to variable `index`.
    pub fn differentiate(&self, index: usize) -> Result<Self, PolyError> {
        check_index(&self.space, index)?;
        let mut out = Self::zero(&self.space);
        for (m, c) in &self.terms {
            if let Some((e, low)) = m.lowered(index) {
                out.add_term(low, c * Rational::from_integer(BigInt::from(e)));
            }
        }
        Ok(out)
    }

    /// Lie derivative `sum_i (dp/dx_i) * field_i`.
    pub fn lie_derivative(&self, field: &[Polynomial]) -> Result<Self, PolyError> {
        if field.len() != self.space.len() {
            return Err(PolyError::LengthMismatch {
                expected: self.space.len(),
                found: field.len(),
            });
        }
        for fi in field {
            self.check_space(fi)?;
        }
        let (p, dp) = self.integer_terms();
        let df = common_denominator(field.iter().flat_map(|fi| fi.terms.values()));
        let field: Vec<Vec<(&Monomial, BigInt)>> = field
            .iter()
            .map(|fi| fi.terms.iter().map(|(m, c)| (m, scaled_numer(c, &df))).collect())
            .collect();
        let mut acc = IntAccumulator::default();
        for (m, c) in &p {
            for (i, fi) in field.iter().enumerate() {
                let Some((e, low)) = m.lowered(i) else {
                    continue;
                };
                let ce = c * BigInt::from(e);
                for (mf, cf) in fi {
                    acc.add(low.mul(mf), &ce * cf);
                }
            }
        }
        Ok(acc.finish(&self.space, &(dp * df)))
    }

    /// Composition: each variable `i` of `self` is replaced by `assignment[i]`,
    /// a polynomial over `target`. Variables that do not occur need no image.
    pub fn substitute(
        &self,
        assignment: &BTreeMap<usize, Polynomial>,
        target: &VariableSpace,
    ) -> Result<Self, PolyError> {
        for image in assignment.values() {
            if !image.space.same_as(target) {
                return Err(PolyError::SpaceMismatch);
            }
        }
        let used = self.variables();
        for &i in &used {
            if !assignment.contains_key(&i) {
                return Err(PolyError::MissingImage { index: i });
            }
        }
        // powers[i][e] = image_i^e, grown on demand
        let mut powers: BTreeMap<usize, Vec<Polynomial>> = BTreeMap::new();
        let mut out = Self::zero(target);
        for (m, c) in &self.terms {
            let mut term = Self::constant(target, c.clone());
            for &i in &used {
                let e = m.exponent(i) as usize;
                if e == 0 {
                    continue;
                }
                let cache = powers
                    .entry(i)
                    .or_insert_with(|| alloc::vec![Self::one(target)]);
                while cache.len() <= e {
                    let next = cache.last().unwrap().mul(&assignment[&i])?;
                    cache.push(next);
                }
                term = term.mul(&cache[e])?;
            }
            out.add_scaled(&Rational::one(), &term)?;
        }
        Ok(out)
    }

    /// Moves the polynomial into `target`, sending variable `i` to
    /// `index_map[i]`. A cheap special case of [`substitute`](Self::substitute)
    /// for injective variable renamings.
    pub fn relabel(&self, target: &VariableSpace, index_map: &[usize]) -> Result<Self, PolyError> {
        if index_map.len() != self.space.len() {
            return Err(PolyError::LengthMismatch {
                expected: self.space.len(),
                found: index_map.len(),
            });
        }
        let mut out = Self::zero(target);
        for (m, c) in &self.terms {
            let mut e = alloc::vec![0u32; target.len()];
            for (i, &k) in index_map.iter().enumerate() {
                let ei = m.exponent(i);
                if ei > 0 {
                    check_index(target, k)?;
                    e[k] += ei;
                }
            }
            out.add_term(Monomial::from_exponents(e), c.clone());
        }
        Ok(out)
    }

    pub fn evaluate_exact(&self, point: &[Rational]) -> Result<Rational, PolyError> {
        if point.len() != self.space.len() {
            return Err(PolyError::LengthMismatch {
                expected: self.space.len(),
                found: point.len(),
            });
        }
        let mut sum = Rational::zero();
        for (m, c) in &self.terms {
            let mut t = c.clone();
            for (x, &e) in point.iter().zip(m.exponents()) {
                for _ in 0..e {
                    t *= x;
                }
            }
            sum += t;
        }
        Ok(sum)
    }

    /// Floating-point evaluation: the plain sum of term values with each
    /// coefficient rounded to the nearest double.
    pub fn evaluate(&self, point: &[f64]) -> Result<f64, PolyError> {
        if point.len() != self.space.len() {
            return Err(PolyError::LengthMismatch {
                expected: self.space.len(),
                found: point.len(),
            });
        }
        Ok(self
            .terms
            .iter()
            .map(|(m, c)| rational_to_f64(c) * monomial_value(m.exponents(), point))
            .sum())
    }
}

pub(crate) fn monomial_value(exponents: &[u32], point: &[f64]) -> f64 {
    let mut v = 1.0;
    for (&x, &e) in point.iter().zip(exponents) {
        for _ in 0..e {
            v *= x;
        }
    }
    v
}

pub fn rational_to_f64(c: &Rational) -> f64 {
    c.to_f64().unwrap_or(f64::NAN)
}

fn check_index(space: &VariableSpace, index: usize) -> Result<(), PolyError> {
    if index < space.len() {
        Ok(())
    } else {
        Err(PolyError::VariableOutOfRange {
            index,
            nvars: space.len(),
        })
    }
}

fn write_monomial(f: &mut fmt::Formatter<'_>, space: &VariableSpace, m: &Monomial) -> fmt::Result {
    let mut first = true;
    for (i, &e) in m.exponents().iter().enumerate() {
        if e == 0 {
            continue;
        }
        if !first {
            f.write_str("*")?;
        }
        first = false;
        f.write_str(space.name(i).unwrap_or("?"))?;
        if e > 1 {
            write!(f, "^{e}")?;
        }
    }
    Ok(())
}

/// Canonical rendering: ascending graded-lex order, explicit `*` and `^`,
/// coefficients as `num/den`. The zero polynomial renders as `0`.
impl fmt::Display for Polynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return f.write_str("0");
        }
        for (k, (m, c)) in self.terms.iter().enumerate() {
            let negative = c.is_negative();
            let mag = c.abs();
            match (k == 0, negative) {
                (true, true) => f.write_str("-")?,
                (true, false) => {}
                (false, true) => f.write_str(" - ")?,
                (false, false) => f.write_str(" + ")?,
            }
            if m.is_one() {
                write!(f, "{mag}")?;
            } else {
                if !mag.is_one() {
                    write!(f, "{mag}*")?;
                }
                write_monomial(f, &self.space, m)?;
            }
        }
        Ok(())
    }
}

impl fmt::Debug for Polynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Polynomial({self})")
    }
}

#[cfg(test)]
mod tests;
