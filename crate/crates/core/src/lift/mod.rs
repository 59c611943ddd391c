//! Construction of super-linearizations.
//!
//! The pipeline walks the depth layers of the skeleton graph. Layer 0 is
//! affine. Each later layer has dynamics `x'' = A'' x'' + g(z')` over the
//! coordinates `z'` lifted so far; [`prop1_lift`] closes `g` under the Lie
//! derivative of the affine `z'` dynamics by growing Krylov chains, and the
//! result becomes the affine system for the next layer.

mod chain;
mod pipeline;
mod modular;
pub mod span;
mod xumama;

pub use chain::{prop1_lift, ChainObservable, ChainRecord, LayerDynamics, StageLift};
pub use pipeline::superlinearize;
pub use span::{express_in_span, SpanBasis};
pub use xumama::{xumama_check, XumamaCertificate};

use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

use num_traits::Zero;

use crate::depgraph::ConditionReport;
use crate::poly::{PolyError, Polynomial, Rational, VariableSpace};

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum LiftError {
    /// Some edge inside a strong component has a nonconstant weight; the
    /// sufficient condition does not apply and nothing is claimed.
    ConditionFailed(ConditionReport),
    /// A layer's dynamics are not of the form `A'' x'' + g(z')`.
    DecompositionViolated { variable: String, reason: String },
    /// A Krylov chain outgrew `dim P_d`.
    CapExceeded { seed: usize, bound: usize },
    Precondition(String),
    Poly(PolyError),
    Internal(String),
}

impl fmt::Display for LiftError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            LiftError::ConditionFailed(r) => {
                write!(f, "cycle condition fails on {} edge(s)", r.witnesses.len())
            }
            LiftError::DecompositionViolated { variable, reason } => {
                write!(f, "internal error: dynamics of `{variable}` {reason}")
            }
            LiftError::CapExceeded { seed, bound } => {
                write!(f, "internal error: chain for seed {seed} exceeded dim P_d = {bound}")
            }
            LiftError::Precondition(msg) => write!(f, "precondition violated: {msg}"),
            LiftError::Poly(e) => write!(f, "{e}"),
            LiftError::Internal(msg) => write!(f, "internal error: {msg}"),
        }
    }
}

impl core::error::Error for LiftError {}

impl From<PolyError> for LiftError {
    fn from(e: PolyError) -> Self {
        LiftError::Poly(e)
    }
}

/// `z' = A z + D` over a named coordinate space.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AffineSystem {
    space: VariableSpace,
    matrix: Vec<Vec<Rational>>,
    offset: Vec<Rational>,
}

impl AffineSystem {
    pub fn new(space: VariableSpace, matrix: Vec<Vec<Rational>>, offset: Vec<Rational>) -> Result<Self, LiftError> {
        let n = space.len();
        if matrix.len() != n || offset.len() != n || matrix.iter().any(|r| r.len() != n) {
            return Err(LiftError::Precondition(alloc::format!(
                "affine system over {n} coordinates needs an {n}x{n} matrix and {n} offsets"
            )));
        }
        Ok(Self { space, matrix, offset })
    }

    pub fn dim(&self) -> usize {
        self.space.len()
    }

    pub fn space(&self) -> &VariableSpace {
        &self.space
    }

    pub fn matrix(&self) -> &[Vec<Rational>] {
        &self.matrix
    }

    pub fn offset(&self) -> &[Rational] {
        &self.offset
    }

    /// Row `i` as the polynomial `sum_j A_ij z_j + D_i`.
    pub fn field(&self) -> Vec<Polynomial> {
        self.matrix
            .iter()
            .zip(&self.offset)
            .map(|(row, d)| affine_row(&self.space, row, d))
            .collect()
    }
}

pub(crate) fn affine_row(space: &VariableSpace, row: &[Rational], offset: &Rational) -> Polynomial {
    let mut p = Polynomial::constant(space, offset.clone());
    for (j, a) in row.iter().enumerate() {
        if !a.is_zero() {
            p.add_scaled(a, &Polynomial::var(space, j).expect("row fits space"))
                .expect("same space");
        }
    }
    p
}

/// An auxiliary coordinate `p_k`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Observable {
    /// 1-based position among the observables.
    pub index: usize,
    pub name: String,
    /// In terms of the lifted coordinates that existed when it was created,
    /// expressed over the full lifted space.
    pub definition: Polynomial,
    /// In terms of the original state variables.
    pub expansion: Polynomial,
}

/// `z' = A z + D` with `z = (x, p(x))`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SuperLinearization {
    state: VariableSpace,
    lifted: VariableSpace,
    matrix: Vec<Vec<Rational>>,
    offset: Vec<Rational>,
    observables: Vec<Observable>,
    chains: Vec<ChainRecord>,
}

impl SuperLinearization {
    /// Checks shapes and that every observable's expansion agrees with its
    /// definition. `lifted` must start with the state names, followed by the
    /// observable names in order.
    pub fn new(
        state: VariableSpace,
        lifted: VariableSpace,
        matrix: Vec<Vec<Rational>>,
        offset: Vec<Rational>,
        observables: Vec<Observable>,
    ) -> Result<Self, LiftError> {
        Self::build(state, lifted, matrix, offset, observables, true)
    }

    /// As [`new`](Self::new), without re-expanding the definitions. For lifts
    /// that are verified afterwards: if every row holds, each stage's
    /// coordinates follow the stage dynamics and the definitions agree.
    pub(crate) fn new_unexpanded(
        state: VariableSpace,
        lifted: VariableSpace,
        matrix: Vec<Vec<Rational>>,
        offset: Vec<Rational>,
        observables: Vec<Observable>,
    ) -> Result<Self, LiftError> {
        Self::build(state, lifted, matrix, offset, observables, false)
    }

    fn build(
        state: VariableSpace,
        lifted: VariableSpace,
        matrix: Vec<Vec<Rational>>,
        offset: Vec<Rational>,
        observables: Vec<Observable>,
        expand: bool,
    ) -> Result<Self, LiftError> {
        let n = state.len();
        let m = observables.len();
        let bad = |msg: String| Err(LiftError::Precondition(msg));
        if lifted.len() != n + m {
            return bad(alloc::format!("lifted space has {} names, expected {}", lifted.len(), n + m));
        }
        if lifted.names()[..n] != *state.names() {
            return bad("lifted coordinates must start with the state variables".into());
        }
        if matrix.len() != n + m || offset.len() != n + m || matrix.iter().any(|r| r.len() != n + m) {
            return bad(alloc::format!("A must be {0}x{0} and D of length {0}", n + m));
        }
        let mut expansions: alloc::collections::BTreeMap<usize, Polynomial> =
            (0..n).map(|i| (i, Polynomial::var(&state, i).expect("in range"))).collect();
        for (k, obs) in observables.iter().enumerate() {
            if obs.index != k + 1 || lifted.names()[n + k] != obs.name {
                return bad(alloc::format!("observable {} is out of order", obs.name));
            }
            if obs.definition.space() != &lifted || obs.expansion.space() != &state {
                return bad(alloc::format!("observable {} lives over the wrong space", obs.name));
            }
            if obs.definition.variables().iter().any(|&v| v >= n + k) {
                return bad(alloc::format!("definition of {} refers to itself or later observables", obs.name));
            }
            if !expand {
                continue;
            }
            let expanded = obs.definition.substitute(&expansions, &state)?;
            if expanded != obs.expansion {
                return bad(alloc::format!(
                    "expansion of {} is {}, but its definition expands to {}",
                    obs.name, obs.expansion, expanded
                ));
            }
            expansions.insert(n + k, obs.expansion.clone());
        }
        Ok(Self {
            state,
            lifted,
            matrix,
            offset,
            observables,
            chains: Vec::new(),
        })
    }

    pub(crate) fn with_chains(mut self, chains: Vec<ChainRecord>) -> Self {
        self.chains = chains;
        self
    }

    /// Original dimension.
    pub fn n(&self) -> usize {
        self.state.len()
    }

    /// Number of observables.
    pub fn m(&self) -> usize {
        self.observables.len()
    }

    pub fn dim(&self) -> usize {
        self.lifted.len()
    }

    pub fn state_space(&self) -> &VariableSpace {
        &self.state
    }

    pub fn lifted_space(&self) -> &VariableSpace {
        &self.lifted
    }

    pub fn matrix(&self) -> &[Vec<Rational>] {
        &self.matrix
    }

    pub fn offset(&self) -> &[Rational] {
        &self.offset
    }

    pub fn observables(&self) -> &[Observable] {
        &self.observables
    }

    /// Krylov chain statistics from construction; empty for lifts loaded
    /// from elsewhere.
    pub fn chains(&self) -> &[ChainRecord] {
        &self.chains
    }

    /// `x`-polynomial of every lifted coordinate: the state variables, then
    /// the observable expansions.
    pub fn expansions(&self) -> Vec<Polynomial> {
        (0..self.n())
            .map(|i| Polynomial::var(&self.state, i).expect("in range"))
            .chain(self.observables.iter().map(|o| o.expansion.clone()))
            .collect()
    }

    /// Row `i` of the lifted system as a polynomial in the lifted coordinates.
    pub fn row(&self, i: usize) -> Polynomial {
        affine_row(&self.lifted, &self.matrix[i], &self.offset[i])
    }

    /// The lifted system as an [`AffineSystem`].
    pub fn affine(&self) -> AffineSystem {
        AffineSystem {
            space: self.lifted.clone(),
            matrix: self.matrix.clone(),
            offset: self.offset.clone(),
        }
    }

    /// Same lift with one matrix entry replaced. Used to build corrupted
    /// variants when exercising the verifier.
    pub fn with_matrix_entry(&self, row: usize, col: usize, value: Rational) -> Self {
        let mut out = self.clone();
        out.matrix[row][col] = value;
        out
    }
}
