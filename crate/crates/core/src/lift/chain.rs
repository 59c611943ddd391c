use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use num_bigint::BigUint;
use num_traits::{One, ToPrimitive, Zero};

use super::span::{poly_vec, SpanBasis};
use super::{AffineSystem, LiftError};
use crate::poly::{Polynomial, Rational};

/// Dynamics of the layer being adjoined: `x''_j' = sum_k linear[j][k] x''_k + seeds[j]`,
/// with every seed a polynomial over the current lifted coordinates.
#[derive(Clone, Debug)]
pub struct LayerDynamics {
    pub names: Vec<String>,
    pub linear: Vec<Vec<Rational>>,
    pub seeds: Vec<Polynomial>,
}

/// A new coordinate produced by a chain. `definition` is over the input
/// stage's space.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ChainObservable {
    pub name: String,
    pub definition: Polynomial,
    /// The Lie derivative of the observable just before it, as opposed to a
    /// chain's first element.
    pub derived: bool,
}

/// What one seed's chain cost.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ChainRecord {
    pub seed: usize,
    /// Degree of the seed over the stage coordinates.
    pub degree: u32,
    pub stage_dim: usize,
    /// `C(stage_dim + degree, degree)`, saturated at `usize::MAX`.
    pub bound: usize,
    pub created: usize,
}

#[derive(Clone, Debug)]
pub struct StageLift {
    /// Over `(z', x'', p)`.
    pub system: AffineSystem,
    pub observables: Vec<ChainObservable>,
    pub chains: Vec<ChainRecord>,
}

pub(crate) fn binomial(n: usize, k: usize) -> usize {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc = BigUint::one();
    for i in 0..k {
        acc = acc * BigUint::from(n - i) / BigUint::from(i + 1);
    }
    acc.to_usize().unwrap_or(usize::MAX)
}

enum RowSlot {
    State(usize),
    Obs(usize),
}

/// Adjoins a layer to an affine stage, closing each seed under the Lie
/// derivative of the stage dynamics.
///
/// Seeds are processed in order against one shared span made of the constant
/// `1`, the stage coordinates, and every observable created so far. A chain
/// element already in that span ends the chain and becomes the previous
/// element's row; otherwise it becomes observable `p` with row `p' = next`.
/// New observables are named `{prefix}{first_index}`, `{prefix}{first_index + 1}`, ...
pub fn prop1_lift(
    affine: &AffineSystem,
    layer: &LayerDynamics,
    prefix: &str,
    first_index: usize,
) -> Result<StageLift, LiftError> {
    let zdim = affine.dim();
    let k = layer.names.len();
    if layer.seeds.len() != k || layer.linear.len() != k || layer.linear.iter().any(|r| r.len() != k) {
        return Err(LiftError::Precondition(format!(
            "layer of {k} variables needs {k} seeds and a {k}x{k} linear part"
        )));
    }
    for (j, seed) in layer.seeds.iter().enumerate() {
        if seed.space() != affine.space() {
            return Err(LiftError::Precondition(format!(
                "seed {j} is not a polynomial in the stage coordinates"
            )));
        }
    }

    let field = affine.field();
    let mut span = SpanBasis::new();
    span.push(&poly_vec(&Polynomial::one(affine.space())));
    for i in 0..zdim {
        span.push(&poly_vec(&Polynomial::var(affine.space(), i)?));
    }

    let mut observables: Vec<(Polynomial, bool)> = Vec::new();
    let mut state_rows: Vec<BTreeMap<usize, Rational>> = alloc::vec![BTreeMap::new(); k];
    let mut obs_rows: Vec<BTreeMap<usize, Rational>> = Vec::new();
    let mut chains = Vec::with_capacity(k);

    let sparse = |c: Vec<Rational>| -> BTreeMap<usize, Rational> {
        c.into_iter().enumerate().filter(|(_, v)| !v.is_zero()).collect()
    };

    for (j, seed) in layer.seeds.iter().enumerate() {
        let degree = seed.degree().finite().unwrap_or(0);
        let bound = binomial(zdim + degree as usize, degree as usize);
        let mut created = 0;
        let mut slot = RowSlot::State(j);
        let mut q = seed.clone();
        loop {
            let basis_index = match span.insert(&poly_vec(&q)) {
                Ok(c) => {
                    match slot {
                        RowSlot::State(j) => state_rows[j] = sparse(c),
                        RowSlot::Obs(t) => obs_rows[t] = sparse(c),
                    }
                    break;
                }
                Err(index) => index,
            };
            created += 1;
            if created > bound {
                return Err(LiftError::CapExceeded { seed: j, bound });
            }
            let mut unit = BTreeMap::new();
            unit.insert(basis_index, Rational::one());
            match slot {
                RowSlot::State(j) => state_rows[j] = unit,
                RowSlot::Obs(t) => obs_rows[t] = unit,
            }
            let next = q.lie_derivative(&field)?;
            debug_assert!(next.degree() <= q.degree(), "affine fields keep the degree");
            observables.push((q, created > 1));
            obs_rows.push(BTreeMap::new());
            slot = RowSlot::Obs(observables.len() - 1);
            q = next;
        }
        chains.push(ChainRecord {
            seed: j,
            degree,
            stage_dim: zdim,
            bound,
            created,
        });
    }

    // Assemble over (z', x'', p). Span index 0 is the constant, 1..=zdim the
    // stage coordinates, and zdim + 1 + t observable t.
    let m = observables.len();
    let dim = zdim + k + m;
    let column = |basis_index: usize| -> Option<usize> {
        match basis_index {
            0 => None,
            i if i <= zdim => Some(i - 1),
            i => Some(zdim + k + (i - zdim - 1)),
        }
    };
    let mut matrix = alloc::vec![alloc::vec![Rational::zero(); dim]; dim];
    let mut offset = alloc::vec![Rational::zero(); dim];
    for i in 0..zdim {
        matrix[i][..zdim].clone_from_slice(&affine.matrix()[i]);
        offset[i] = affine.offset()[i].clone();
    }
    let mut fill = |row: usize, coeffs: &BTreeMap<usize, Rational>| {
        for (&b, c) in coeffs {
            match column(b) {
                None => offset[row] += c,
                Some(col) => matrix[row][col] += c,
            }
        }
    };
    for (j, coeffs) in state_rows.iter().enumerate() {
        fill(zdim + j, coeffs);
    }
    for (t, coeffs) in obs_rows.iter().enumerate() {
        fill(zdim + k + t, coeffs);
    }
    for (j, row) in layer.linear.iter().enumerate() {
        for (l, a) in row.iter().enumerate() {
            matrix[zdim + j][zdim + l] += a;
        }
    }

    let names: Vec<String> = (0..m).map(|t| format!("{prefix}{}", first_index + t)).collect();
    let space = affine
        .space()
        .extended(layer.names.iter().cloned().chain(names.iter().cloned()))?;
    let system = AffineSystem::new(space, matrix, offset)?;
    let observables = names
        .into_iter()
        .zip(observables)
        .map(|(name, (definition, derived))| ChainObservable {
            name,
            definition,
            derived,
        })
        .collect();
    Ok(StageLift {
        system,
        observables,
        chains,
    })
}
