use alloc::vec::Vec;

use super::span::{SparseVec, SpanBasis};
use crate::poly::{Monomial, Polynomial, Rational};
use crate::sysparse::PolySystem;

/// Witness of a linear recurrence `L_f^N f = sum_{k<N} alpha_k L_f^k f`
/// among the iterated Lie derivatives of `f` along itself.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct XumamaCertificate {
    pub order: usize,
    pub alpha: Vec<Rational>,
}

impl XumamaCertificate {
    /// Recomputes the iterates and checks the recurrence exactly.
    pub fn holds_for(&self, sys: &PolySystem) -> bool {
        if self.alpha.len() != self.order || self.order == 0 {
            return false;
        }
        let iterates = lie_iterates(sys, self.order);
        let n = sys.dim();
        (0..n).all(|j| {
            let mut rhs = Polynomial::zero(sys.vars());
            for (k, a) in self.alpha.iter().enumerate() {
                rhs.add_scaled(a, &iterates[k][j]).expect("same space");
            }
            rhs == iterates[self.order][j]
        })
    }
}

/// `L_f^0 f, ..., L_f^last f`, componentwise.
fn lie_iterates(sys: &PolySystem, last: usize) -> Vec<Vec<Polynomial>> {
    let f = sys.rhs();
    let mut out = Vec::with_capacity(last + 1);
    out.push(f.to_vec());
    for _ in 0..last {
        let prev: &Vec<Polynomial> = out.last().expect("nonempty");
        let next = prev
            .iter()
            .map(|p| p.lie_derivative(f).expect("system polynomials share a space"))
            .collect();
        out.push(next);
    }
    out
}

fn stacked(components: &[Polynomial]) -> SparseVec<(usize, Monomial)> {
    let mut v = SparseVec::new();
    for (j, p) in components.iter().enumerate() {
        for (m, c) in p.terms() {
            v.insert((j, m.clone()), c.clone());
        }
    }
    v
}

/// Smallest `N <= max_n` for which `L_f^N f` is a rational combination of the
/// earlier iterates, with the combination.
pub fn xumama_check(sys: &PolySystem, max_n: usize) -> Option<XumamaCertificate> {
    let f = sys.rhs();
    let mut span = SpanBasis::new();
    let mut current = f.to_vec();
    span.push(&stacked(&current));
    for order in 1..=max_n {
        current = current
            .iter()
            .map(|p| p.lie_derivative(f).expect("system polynomials share a space"))
            .collect();
        let v = stacked(&current);
        if let Ok(alpha) = span.insert(&v) {
            return Some(XumamaCertificate { order, alpha });
        }
    }
    None
}
