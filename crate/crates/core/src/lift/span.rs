//! Incremental span membership over exact rationals.
//!
//! Items are sparse coefficient vectors. Elimination runs modulo a few
//! word-size primes, each basis tracking how its echelon rows are built from
//! the items. Every stored item is independent modulo every prime in use, so
//! an item independent modulo one of them is independent over the rationals.
//! A dependency found modulo the primes is lifted by Chinese remaindering and
//! rational reconstruction and only accepted after an exact check; when the
//! check fails more primes are brought in.

use alloc::collections::BTreeMap;
use alloc::vec::Vec;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Zero};

use super::modular::{self, Field, Primes};
use crate::poly::{Monomial, PolyError, Polynomial, Rational};

pub type SparseVec<K> = BTreeMap<K, Rational>;

/// Sorted by id, no zero entries.
type ModVec = Vec<(u32, u64)>;

/// `num / den` entrywise, with `den > 0`.
#[derive(Clone, Debug)]
struct IntItem {
    num: Vec<(u32, BigInt)>,
    den: BigInt,
}

impl IntItem {
    /// Entries sorted by id.
    fn new(entries: Vec<(u32, &Rational)>) -> Self {
        let den = entries
            .iter()
            .fold(BigInt::one(), |acc, (_, c)| if c.denom().is_one() { acc } else { acc.lcm(c.denom()) });
        let num = entries
            .into_iter()
            .filter(|(_, c)| !c.is_zero())
            .map(|(k, c)| (k, c.numer() * (&den / c.denom())))
            .collect();
        Self { num, den }
    }
}

/// Echelon row with lead coefficient 1: `vec = sum comb[i] * item_i`.
/// Values are in Montgomery form.
#[derive(Clone, Debug)]
struct Row {
    vec: ModVec,
    comb: ModVec,
}

#[derive(Clone, Debug)]
struct ModBasis {
    field: Field,
    /// Keyed by pivot, the largest id in the row.
    rows: BTreeMap<u32, Row>,
    /// One past the largest item index seen.
    items: usize,
}

fn sparse(dense: Vec<u64>) -> ModVec {
    dense
        .into_iter()
        .enumerate()
        .filter(|&(_, c)| c != 0)
        .map(|(k, c)| (k as u32, c))
        .collect()
}

impl ModBasis {
    fn new(p: u64) -> Self {
        Self {
            field: Field::new(p),
            rows: BTreeMap::new(),
            items: 0,
        }
    }

    fn p(&self) -> u64 {
        self.field.p
    }

    /// Dense image in Montgomery form, or `None` if `p` divides the denominator.
    fn image(&self, v: &IntItem) -> Option<Vec<u64>> {
        let f = &self.field;
        let d = modular::reduce_int(&v.den, f.p);
        if d == 0 {
            return None;
        }
        let di = f.inv(f.to_mont(d));
        let width = v.num.last().map_or(0, |e| e.0 as usize + 1);
        let width = width.max(self.rows.keys().next_back().map_or(0, |&k| k as usize + 1));
        let mut out = alloc::vec![0; width];
        for (k, c) in &v.num {
            out[*k as usize] = f.mul(f.to_mont(modular::reduce_int(c, f.p)), di);
        }
        Some(out)
    }

    /// Reduces `r` in place to `v - sum comb[i] * item_i` and returns `comb`.
    fn reduce(&self, r: &mut [u64]) -> Vec<u64> {
        let f = &self.field;
        let mut comb = alloc::vec![0; self.items];
        // Each row only touches ids up to its pivot, so one descending pass
        // clears every pivot position.
        for (&pivot, row) in self.rows.iter().rev() {
            let b = r[pivot as usize];
            if b == 0 {
                continue;
            }
            let nb = f.neg(b);
            for &(k, c) in &row.vec {
                let slot = &mut r[k as usize];
                *slot = f.add(*slot, f.mul(nb, c));
            }
            for &(i, c) in &row.comb {
                let slot = &mut comb[i as usize];
                *slot = f.add(*slot, f.mul(b, c));
            }
        }
        comb
    }

    /// Coefficients, in plain form, of `v` on the items when `v` is in their
    /// span modulo `p`.
    fn express(&self, v: &IntItem) -> Option<Option<ModVec>> {
        let mut r = self.image(v)?;
        let comb = self.reduce(&mut r);
        if r.iter().any(|&c| c != 0) {
            return Some(None);
        }
        let f = &self.field;
        Some(Some(sparse(comb.into_iter().map(|c| f.value(c)).collect())))
    }

    /// Adds item `index`; `false` if it is dependent modulo this prime.
    fn add(&mut self, index: usize, v: &IntItem) -> Option<bool> {
        let f = self.field;
        let mut r = self.image(v)?;
        let comb = self.reduce(&mut r);
        let Some(pivot) = r.iter().rposition(|&c| c != 0) else {
            return Some(false);
        };
        let li = f.inv(r[pivot]);
        // residual = item - comb, scaled by 1/lead
        let vec = sparse(r.into_iter().map(|c| f.mul(c, li)).collect());
        let mut row_comb = sparse(comb.into_iter().map(|c| f.mul(f.neg(c), li)).collect());
        row_comb.push((index as u32, li));
        self.rows.insert(pivot as u32, Row { vec, comb: row_comb });
        self.items = self.items.max(index + 1);
        Some(true)
    }
}

#[derive(Clone, Debug)]
pub struct SpanBasis<K> {
    items: usize,
    ids: BTreeMap<K, u32>,
    /// Independent items with their item index, in insertion order.
    stored: Vec<(usize, IntItem)>,
    /// Every stored item is independent modulo this basis' prime.
    basis: ModBasis,
    primes: Primes,
}

impl<K: Ord + Clone> Default for SpanBasis<K> {
    fn default() -> Self {
        Self::new()
    }
}

impl<K: Ord + Clone> SpanBasis<K> {
    pub fn new() -> Self {
        let mut primes = Primes::new();
        let basis = ModBasis::new(primes.next().expect("there are primes below 2^62"));
        Self {
            items: 0,
            ids: BTreeMap::new(),
            stored: Vec::new(),
            basis,
            primes,
        }
    }

    /// Number of items pushed, dependent ones included.
    pub fn len(&self) -> usize {
        self.items
    }

    pub fn is_empty(&self) -> bool {
        self.items == 0
    }

    pub fn rank(&self) -> usize {
        self.stored.len()
    }

    /// `target` over interned ids, or `None` if it uses a key no item has.
    fn to_ids(&self, target: &SparseVec<K>) -> Option<IntItem> {
        let mut v = Vec::with_capacity(target.len());
        for (k, c) in target {
            if !c.is_zero() {
                v.push((*self.ids.get(k)?, c));
            }
        }
        v.sort_unstable_by_key(|e| e.0);
        Some(IntItem::new(v))
    }

    /// A basis holding every stored item, from the next prime for which they
    /// stay independent.
    fn fresh_basis(&mut self) -> ModBasis {
        'prime: loop {
            let p = self.primes.next().expect("primes below 2^62 do not run out");
            let mut basis = ModBasis::new(p);
            for (index, v) in &self.stored {
                if basis.add(*index, v) != Some(true) {
                    continue 'prime;
                }
            }
            return basis;
        }
    }

    /// Whether `sum coeffs[i] * item_i == target`, in integers: with
    /// `coeffs[i] = a_i / e` and `D` a common multiple of the item
    /// denominators, `sum a_i (D / d_i) num_i == e D target`.
    fn exact_check(&self, coeffs: &[Rational], target: &IntItem) -> bool {
        let used: Vec<&(usize, IntItem)> = self.stored.iter().filter(|(i, _)| !coeffs[*i].is_zero()).collect();
        let e = used.iter().fold(BigInt::one(), |acc, (i, _)| acc.lcm(coeffs[*i].denom()));
        let big_d = used.iter().fold(target.den.clone(), |acc, (_, v)| acc.lcm(&v.den));
        let mut acc: BTreeMap<u32, BigInt> = BTreeMap::new();
        for (i, v) in used {
            let c = &coeffs[*i];
            let scale = c.numer() * (&e / c.denom()) * (&big_d / &v.den);
            for (k, x) in &v.num {
                *acc.entry(*k).or_insert_with(BigInt::zero) += &scale * x;
            }
        }
        acc.retain(|_, c| !c.is_zero());
        // target = num / den, so e D target = num * (e D / den)
        let t_scale = &e * (&big_d / &target.den);
        acc.len() == target.num.len() && target.num.iter().all(|(k, c)| acc.get(k) == Some(&(c * &t_scale)))
    }

    /// Coefficients on the items from a solution `y` of `sum y_i num_i = t.num`,
    /// each `y_i` given by `value`.
    fn coefficients(
        &self,
        y: &[BigInt],
        t: &IntItem,
        value: impl Fn(&BigInt) -> Option<Rational>,
    ) -> Option<Vec<Rational>> {
        let mut c = alloc::vec![Rational::zero(); self.items];
        for (index, v) in &self.stored {
            let yi = &y[*index];
            if yi.is_zero() {
                continue;
            }
            // item_i = num_i / d_i and t = num / d
            c[*index] = value(yi)? * Rational::new(v.den.clone(), t.den.clone());
        }
        Some(c)
    }

    /// Exact coefficients on earlier items if `t` lies in their span, by
    /// p-adic lifting over the basis prime. Since the stored items are
    /// independent modulo `p`, a solution over the rationals has no `p` in
    /// its denominators, so it shows up digit by digit; a residual outside
    /// the span modulo `p` proves there is none.
    fn solve(&self, t: &IntItem) -> Option<Vec<Rational>> {
        let p = self.basis.p();
        let den_inv: BTreeMap<usize, u64> = self
            .stored
            .iter()
            .map(|(i, v)| (*i, modular::inv(modular::reduce_int(&v.den, p), p)))
            .collect();
        let columns: BTreeMap<usize, &IntItem> = self.stored.iter().map(|(i, v)| (*i, v)).collect();
        let mut residual = IntItem {
            num: t.num.clone(),
            den: BigInt::one(),
        };
        let mut y = alloc::vec![BigInt::zero(); self.items];
        let mut modulus = BigInt::one();
        let mut next_attempt = 1;
        for step in 1.. {
            if residual.num.is_empty() {
                // Finite expansion: y is an exact integer solution.
                let c = self.coefficients(&y, t, |yi| Some(Rational::from_integer(yi.clone())))?;
                debug_assert!(self.exact_check(&c, t));
                return Some(c);
            }
            let a = self.basis.express(&residual).expect("integer vectors have no denominator")?;
            let mut acc: BTreeMap<u32, BigInt> = residual.num.into_iter().collect();
            for (i, ai) in a {
                let i = i as usize;
                let x = modular::mul(ai, den_inv[&i], p);
                for (k, w) in &columns[&i].num {
                    *acc.entry(*k).or_insert_with(BigInt::zero) -= w * x;
                }
                y[i] += &modulus * x;
            }
            residual.num = acc
                .into_iter()
                .filter(|(_, c)| !c.is_zero())
                .map(|(k, c)| {
                    debug_assert!(modular::reduce_int(&c, p) == 0);
                    (k, c / p)
                })
                .collect();
            modulus *= p;
            if step == next_attempt {
                next_attempt *= 2;
                if let Some(c) = self.coefficients(&y, t, |yi| modular::reconstruct(yi, &modulus)) {
                    if self.exact_check(&c, t) {
                        return Some(c);
                    }
                }
            }
        }
        unreachable!()
    }

    /// Coefficients `c` with `target = sum c[i] * item_i`, or `None` when the
    /// target is outside the span. Coefficients on dependent items are zero.
    pub fn express(&self, target: &SparseVec<K>) -> Option<Vec<Rational>> {
        let v = self.to_ids(target)?;
        self.solve(&v)
    }

    /// Adds an item and returns its index. Returns whether it enlarged the span
    /// alongside.
    pub fn push(&mut self, item: &SparseVec<K>) -> (usize, bool) {
        match self.insert(item) {
            Ok(_) => {
                self.items += 1;
                (self.items - 1, false)
            }
            Err(index) => (index, true),
        }
    }

    /// One reduction serving both questions: `Ok(coefficients)` on earlier
    /// items when `item` is already in the span (the item is then not
    /// recorded), otherwise `Err(index)` after adding it.
    pub fn insert(&mut self, item: &SparseVec<K>) -> Result<Vec<Rational>, usize> {
        for (k, c) in item {
            if !c.is_zero() && !self.ids.contains_key(k) {
                let id = self.ids.len() as u32;
                self.ids.insert(k.clone(), id);
            }
        }
        let v = self.to_ids(item).expect("keys were just interned");
        if let Some(c) = self.solve(&v) {
            return Ok(c);
        }
        let index = self.items;
        self.items += 1;
        let added = self.basis.add(index, &v);
        self.stored.push((index, v));
        if added != Some(true) {
            // Independent over the rationals but not modulo this prime.
            self.basis = self.fresh_basis();
        }
        Err(index)
    }
}

pub fn poly_vec(p: &Polynomial) -> SparseVec<Monomial> {
    p.terms().map(|(m, c)| (m.clone(), c.clone())).collect()
}

/// Exact coefficients expressing `target` in terms of `basis`, or `None` if
/// `target` is not in their span. All polynomials must share one space.
pub fn express_in_span(target: &Polynomial, basis: &[Polynomial]) -> Result<Option<Vec<Rational>>, PolyError> {
    if basis.iter().any(|b| b.space() != target.space()) {
        return Err(PolyError::SpaceMismatch);
    }
    let mut span = SpanBasis::new();
    for b in basis {
        span.push(&poly_vec(b));
    }
    let coeffs = span.express(&poly_vec(target));
    #[cfg(debug_assertions)]
    if let Some(c) = &coeffs {
        let mut back = Polynomial::zero(target.space());
        for (k, b) in c.iter().zip(basis) {
            back.add_scaled(k, b)?;
        }
        debug_assert_eq!(&back, target, "span coefficients do not reproduce the target");
    }
    Ok(coeffs)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::poly::{rat, VariableSpace};
    use crate::sysparse::parse_polynomial;
    use alloc::vec;
    use proptest::prelude::*;

    #[test]
    fn first_chain_closure() {
        let s = VariableSpace::new(["x1", "x2"]).unwrap();
        let p = |t: &str| parse_polynomial(t, &s).unwrap();
        let basis = [
            p("1"),
            p("x1"),
            p("x2"),
            p("x2^2"),
            p("-2*x1*x2"),
            p("2*x1^2 - 2*x2^2"),
        ];
        let c = express_in_span(&p("8*x1*x2"), &basis).unwrap().unwrap();
        assert_eq!(c, [rat(0), rat(0), rat(0), rat(0), rat(-4), rat(0)]);
        let c = express_in_span(&p("x1^2"), &basis).unwrap().unwrap();
        assert_eq!(c, [rat(0), rat(0), rat(0), rat(1), rat(0), crate::poly::ratio(1, 2)]);
        assert_eq!(express_in_span(&p("x1^2*x2"), &basis).unwrap(), None);
    }

    #[test]
    fn zero_target() {
        let s = VariableSpace::new(["x"]).unwrap();
        let basis = [parse_polynomial("x^2 + 1", &s).unwrap(), parse_polynomial("x", &s).unwrap()];
        let c = express_in_span(&Polynomial::zero(&s), &basis).unwrap().unwrap();
        assert_eq!(c, [rat(0), rat(0)]);
        assert_eq!(express_in_span(&Polynomial::zero(&s), &[]).unwrap(), Some(vec![]));
    }

    #[test]
    fn dependent_basis_items_get_zero() {
        let s = VariableSpace::new(["x"]).unwrap();
        let p = |t: &str| parse_polynomial(t, &s).unwrap();
        let basis = [p("x"), p("2*x"), p("x^2")];
        let c = express_in_span(&p("3*x - x^2"), &basis).unwrap().unwrap();
        assert_eq!(c, [rat(3), rat(0), rat(-1)]);
    }

    #[test]
    fn vector_valued_items() {
        // Stacked components of f = (-x + y^2, -y) and its first Lie iterate.
        let s = VariableSpace::new(["x", "y"]).unwrap();
        let p = |t: &str| parse_polynomial(t, &s).unwrap();
        let stack = |a: &str, b: &str| -> SparseVec<(usize, Monomial)> {
            let mut v = SparseVec::new();
            for (j, comp) in [p(a), p(b)].iter().enumerate() {
                for (m, c) in comp.terms() {
                    v.insert((j, m.clone()), c.clone());
                }
            }
            v
        };
        let mut span = SpanBasis::new();
        span.push(&stack("-x + y^2", "-y"));
        span.push(&stack("x - 3*y^2", "y"));
        let c = span.express(&stack("-x + 7*y^2", "-y")).unwrap();
        assert_eq!(c, [rat(-2), rat(-3)]);
    }

    fn items(rows: &[&[i128]]) -> Vec<SparseVec<u32>> {
        rows.iter()
            .map(|r| {
                r.iter()
                    .enumerate()
                    .filter(|(_, &c)| c != 0)
                    .map(|(k, &c)| (k as u32, Rational::from_integer(BigInt::from(c))))
                    .collect()
            })
            .collect()
    }

    #[test]
    fn unlucky_prime_is_replaced() {
        // (1, 1) and (1, 1 + p) agree modulo the first prime but not over Q.
        let p = Primes::new().next().unwrap() as i128;
        let v = items(&[&[1, 1], &[1, 1 + p], &[2, 2 + p], &[0, p]]);
        let mut span = SpanBasis::new();
        assert_eq!(span.insert(&v[0]), Err(0));
        assert_eq!(span.insert(&v[1]), Err(1));
        assert_ne!(span.basis.p() as i128, p);
        assert_eq!(span.express(&v[2]), Some(vec![rat(1), rat(1)]));
        assert_eq!(span.express(&v[3]), Some(vec![rat(-1), rat(1)]));
    }

    /// Rank by plain rational elimination.
    fn rank(rows: &[Vec<Rational>]) -> usize {
        let mut m: Vec<Vec<Rational>> = rows.to_vec();
        let cols = m.first().map_or(0, Vec::len);
        let mut r = 0;
        for c in 0..cols {
            let Some(pivot) = (r..m.len()).find(|&i| !m[i][c].is_zero()) else {
                continue;
            };
            m.swap(r, pivot);
            for i in 0..m.len() {
                if i != r && !m[i][c].is_zero() {
                    let k = &m[i][c] / &m[r][c];
                    let pivot_row = m[r].clone();
                    for (x, y) in m[i].iter_mut().zip(&pivot_row) {
                        *x -= &k * y;
                    }
                }
            }
            r += 1;
        }
        r
    }

    fn big(n: i64, shift: u32, d: i64) -> Rational {
        Rational::new(BigInt::from(n) << shift as usize, BigInt::from(d))
    }

    proptest! {
        #[test]
        fn large_coefficients_agree_with_elimination(
            rows in prop::collection::vec(prop::collection::vec((-9i64..=9, 0u32..200, 1i64..=7), 5), 1..6),
            mix in prop::collection::vec((-9i64..=9, 0u32..200, 1i64..=7), 6),
            perturb in prop::option::of((0usize..5, 1i64..=9)),
        ) {
            let basis: Vec<Vec<Rational>> = rows
                .iter()
                .map(|r| r.iter().map(|&(n, s, d)| big(n, s, d)).collect())
                .collect();
            let mut target = vec![Rational::zero(); 5];
            for (row, &(n, s, d)) in basis.iter().zip(&mix) {
                let k = big(n, s, d);
                for (t, x) in target.iter_mut().zip(row) {
                    *t += &k * x;
                }
            }
            if let Some((k, c)) = perturb {
                target[k] += rat(c);
            }
            let sparse = |v: &[Rational]| -> SparseVec<u32> {
                v.iter().enumerate().filter(|(_, c)| !c.is_zero()).map(|(k, c)| (k as u32, c.clone())).collect()
            };
            let mut span = SpanBasis::new();
            for row in &basis {
                span.push(&sparse(row));
            }
            let inside = {
                let mut with = basis.clone();
                with.push(target.clone());
                rank(&with) == rank(&basis)
            };
            prop_assert_eq!(span.rank(), rank(&basis));
            match span.express(&sparse(&target)) {
                None => prop_assert!(!inside),
                Some(c) => {
                    prop_assert!(inside);
                    let mut back = vec![Rational::zero(); 5];
                    for (k, row) in c.iter().zip(&basis) {
                        for (t, x) in back.iter_mut().zip(row) {
                            *t += k * x;
                        }
                    }
                    prop_assert_eq!(back, target);
                }
            }
        }

        #[test]
        fn coefficients_reproduce_target(
            basis_t in prop::collection::vec(prop::collection::vec((-3i64..=3, 0u32..=2, 0u32..=2), 1..4), 0..6),
            mix in prop::collection::vec(-3i64..=3, 6),
            noise in prop::bool::ANY,
        ) {
            let s = VariableSpace::new(["a", "b"]).unwrap();
            let basis: Vec<Polynomial> = basis_t.iter().map(|terms| {
                Polynomial::from_terms(&s, terms.iter().map(|&(c, e0, e1)| (rat(c), vec![e0, e1]))).unwrap()
            }).collect();
            let mut target = Polynomial::zero(&s);
            for (b, &k) in basis.iter().zip(&mix) {
                target.add_scaled(&rat(k), b).unwrap();
            }
            if noise {
                target = target.add(&parse_polynomial("a^5*b", &s).unwrap()).unwrap();
            }
            let got = express_in_span(&target, &basis).unwrap();
            if noise {
                prop_assert!(got.is_none());
            } else {
                let c = got.expect("constructed inside the span");
                let mut back = Polynomial::zero(&s);
                for (k, b) in c.iter().zip(&basis) {
                    back.add_scaled(k, b).unwrap();
                }
                prop_assert_eq!(back, target);
            }
        }
    }
}
