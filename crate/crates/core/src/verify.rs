//! Checking a super-linearization.
//!
//! The symbolic check is exact: with `q_i` the `x`-expansion of lifted
//! coordinate `i`, it asks that `L_f q_i = sum_j A_ij q_j + D_i` for every
//! row. That identity makes `t -> (x(t), p(x(t)))` a solution of the linear
//! system, which is the flow identity. The numeric check integrates both
//! systems with the same fixed-step RK4 and compares the projection.

use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use num_traits::float::FloatCore;
use num_traits::One;

use crate::lift::{AffineSystem, SuperLinearization};
use crate::poly::{linear_combination, monomial_value, rational_to_f64, ClearedPolynomial, Polynomial, Rational};
use crate::sysparse::PolySystem;

#[derive(Clone, Debug, PartialEq)]
pub enum VerifyError {
    DimensionMismatch { system: usize, lift: usize },
    StateMismatch,
    BadStep(f64),
    BadHorizon(f64),
    InitialState { expected: usize, found: usize },
    /// A non-finite state appeared; `last_finite_time` is the last sample
    /// time at which the state was finite.
    Divergence { last_finite_time: f64 },
}

impl fmt::Display for VerifyError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            VerifyError::DimensionMismatch { system, lift } => {
                write!(f, "system has dimension {system} but the lift is for dimension {lift}")
            }
            VerifyError::StateMismatch => f.write_str("lift state variables differ from the system's"),
            VerifyError::BadStep(h) => write!(f, "step must be positive and finite, got {h}"),
            VerifyError::BadHorizon(t) => write!(f, "horizon must be nonnegative and finite, got {t}"),
            VerifyError::InitialState { expected, found } => {
                write!(f, "initial state has {found} entries, expected {expected}")
            }
            VerifyError::Divergence { last_finite_time } => {
                write!(f, "integration diverged after t = {last_finite_time}")
            }
        }
    }
}

impl core::error::Error for VerifyError {}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum SymbolicVerdict {
    Pass,
    /// First row whose identity fails, with `L_f q_row - (A q + D)_row`.
    Fail {
        row: usize,
        coordinate: String,
        residual: Polynomial,
    },
}

impl SymbolicVerdict {
    pub fn is_pass(&self) -> bool {
        matches!(self, SymbolicVerdict::Pass)
    }
}

impl fmt::Display for SymbolicVerdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SymbolicVerdict::Pass => f.write_str("PASS"),
            SymbolicVerdict::Fail { row, coordinate, residual } => {
                write!(f, "FAIL at row {} ({coordinate}'): residual {residual}", row + 1)
            }
        }
    }
}

pub fn verify_symbolic(sys: &PolySystem, sl: &SuperLinearization) -> Result<SymbolicVerdict, VerifyError> {
    if sl.n() != sys.dim() {
        return Err(VerifyError::DimensionMismatch {
            system: sys.dim(),
            lift: sl.n(),
        });
    }
    if sl.state_space() != sys.vars() {
        return Err(VerifyError::StateMismatch);
    }
    let q = sl.expansions();
    let cleared: Vec<ClearedPolynomial> = q.iter().map(ClearedPolynomial::from).collect();
    let one = ClearedPolynomial::from(&Polynomial::one(sys.vars()));
    let unit = Rational::one();
    for (i, qi) in q.iter().enumerate() {
        let derivative = qi.lie_derivative(sys.rhs()).expect("expansions live over the state space");
        let derivative = ClearedPolynomial::from(&derivative);
        let negated: Vec<Rational> = sl.matrix()[i].iter().map(|a| -a).collect();
        let offset = -&sl.offset()[i];
        let parts = [(&unit, &derivative), (&offset, &one)]
            .into_iter()
            .chain(negated.iter().zip(&cleared));
        let residual = linear_combination(sys.vars(), parts).expect("same space");
        if !residual.is_zero() {
            return Ok(SymbolicVerdict::Fail {
                row: i,
                coordinate: sl.lifted_space().names()[i].clone(),
                residual,
            });
        }
    }
    Ok(SymbolicVerdict::Pass)
}

/// Something RK4 can integrate.
pub trait VectorField {
    fn dim(&self) -> usize;
    fn eval(&self, x: &[f64], out: &mut [f64]);
}

/// A polynomial vector field with coefficients rounded to doubles.
#[derive(Clone, Debug)]
pub struct PolyField {
    rows: Vec<Vec<(f64, Vec<u32>)>>,
}

impl PolyField {
    pub fn new(components: &[Polynomial]) -> Self {
        let rows = components
            .iter()
            .map(|p| {
                p.terms()
                    .map(|(m, c)| (rational_to_f64(c), m.exponents().to_vec()))
                    .collect()
            })
            .collect();
        Self { rows }
    }

    pub fn of_system(sys: &PolySystem) -> Self {
        Self::new(sys.rhs())
    }
}

impl VectorField for PolyField {
    fn dim(&self) -> usize {
        self.rows.len()
    }

    fn eval(&self, x: &[f64], out: &mut [f64]) {
        for (o, row) in out.iter_mut().zip(&self.rows) {
            *o = row.iter().map(|(c, e)| c * monomial_value(e, x)).sum();
        }
    }
}

/// `z' = A z + D` in doubles, stored sparsely by row.
#[derive(Clone, Debug)]
pub struct LinearField {
    rows: Vec<Vec<(usize, f64)>>,
    offset: Vec<f64>,
}

impl LinearField {
    pub fn new(matrix: &[Vec<Rational>], offset: &[Rational]) -> Self {
        let rows = matrix
            .iter()
            .map(|r| {
                r.iter()
                    .enumerate()
                    .map(|(j, a)| (j, rational_to_f64(a)))
                    .filter(|&(_, a)| a != 0.0)
                    .collect()
            })
            .collect();
        Self {
            rows,
            offset: offset.iter().map(rational_to_f64).collect(),
        }
    }

    pub fn of_affine(a: &AffineSystem) -> Self {
        Self::new(a.matrix(), a.offset())
    }
}

impl VectorField for LinearField {
    fn dim(&self) -> usize {
        self.rows.len()
    }

    fn eval(&self, x: &[f64], out: &mut [f64]) {
        for ((o, row), d) in out.iter_mut().zip(&self.rows).zip(&self.offset) {
            *o = d + row.iter().map(|&(j, a)| a * x[j]).sum::<f64>();
        }
    }
}

/// Samples of one solution at strictly increasing times.
#[derive(Clone, Debug, PartialEq)]
pub struct Trajectory {
    times: Vec<f64>,
    states: Vec<Vec<f64>>,
}

impl Trajectory {
    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn states(&self) -> &[Vec<f64>] {
        &self.states
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn last(&self) -> Option<(f64, &[f64])> {
        Some((*self.times.last()?, self.states.last()?.as_slice()))
    }
}

fn check_grid(t_end: f64, step: f64) -> Result<usize, VerifyError> {
    if !(step > 0.0 && step.is_finite()) {
        return Err(VerifyError::BadStep(step));
    }
    if !(t_end >= 0.0 && t_end.is_finite()) {
        return Err(VerifyError::BadHorizon(t_end));
    }
    // Horizons that are a whole number of steps up to rounding land exactly on t_end.
    let ratio = t_end / step;
    let nearest = FloatCore::round(ratio);
    let steps = if (ratio - nearest).abs() <= 1e-9 * ratio.max(1.0) {
        nearest
    } else {
        FloatCore::ceil(ratio)
    };
    Ok(steps as usize)
}

/// Classic fixed-step fourth-order Runge-Kutta, sampled at `0, h, 2h, ...,
/// t_end`. When `t_end` is not a whole number of steps the final step is
/// shortened to land on it.
pub fn simulate<F: VectorField + ?Sized>(field: &F, x0: &[f64], t_end: f64, step: f64) -> Result<Trajectory, VerifyError> {
    let n = field.dim();
    if x0.len() != n {
        return Err(VerifyError::InitialState {
            expected: n,
            found: x0.len(),
        });
    }
    let steps = check_grid(t_end, step)?;
    if x0.iter().any(|v| !v.is_finite()) {
        return Err(VerifyError::Divergence { last_finite_time: f64::NAN });
    }
    let mut times = Vec::with_capacity(steps + 1);
    let mut states = Vec::with_capacity(steps + 1);
    times.push(0.0);
    states.push(x0.to_vec());

    let mut x = x0.to_vec();
    let (mut k1, mut k2, mut k3, mut k4) = (vec![0.0; n], vec![0.0; n], vec![0.0; n], vec![0.0; n]);
    let mut tmp = vec![0.0; n];
    let mut t = 0.0;
    for s in 1..=steps {
        let t_next = if s == steps { t_end } else { s as f64 * step };
        let h = t_next - t;
        field.eval(&x, &mut k1);
        for i in 0..n {
            tmp[i] = x[i] + 0.5 * h * k1[i];
        }
        field.eval(&tmp, &mut k2);
        for i in 0..n {
            tmp[i] = x[i] + 0.5 * h * k2[i];
        }
        field.eval(&tmp, &mut k3);
        for i in 0..n {
            tmp[i] = x[i] + h * k3[i];
        }
        field.eval(&tmp, &mut k4);
        for i in 0..n {
            x[i] += h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
        }
        if x.iter().any(|v| !v.is_finite()) {
            return Err(VerifyError::Divergence { last_finite_time: t });
        }
        t = t_next;
        times.push(t);
        states.push(x.clone());
    }
    Ok(Trajectory { times, states })
}

/// Integrates `x' = f(x)` from `x0` and the lifted system from
/// `(x0, p(x0))` on the same grid; returns the largest sup-norm gap between
/// `x(t)` and the first `n` lifted coordinates over all samples.
pub fn verify_numeric(
    sys: &PolySystem,
    sl: &SuperLinearization,
    x0: &[f64],
    t_end: f64,
    step: f64,
) -> Result<f64, VerifyError> {
    Ok(compare_flows(sys, sl, x0, t_end, step)?.max_error)
}

/// Both trajectories of [`verify_numeric`] and their largest gap.
#[derive(Clone, Debug)]
pub struct FlowComparison {
    pub original: Trajectory,
    pub lifted: Trajectory,
    pub max_error: f64,
}

pub fn compare_flows(
    sys: &PolySystem,
    sl: &SuperLinearization,
    x0: &[f64],
    t_end: f64,
    step: f64,
) -> Result<FlowComparison, VerifyError> {
    if sl.n() != sys.dim() {
        return Err(VerifyError::DimensionMismatch {
            system: sys.dim(),
            lift: sl.n(),
        });
    }
    if x0.len() != sys.dim() {
        return Err(VerifyError::InitialState {
            expected: sys.dim(),
            found: x0.len(),
        });
    }
    let z0: Vec<f64> = sl
        .expansions()
        .iter()
        .map(|q| q.evaluate(x0).expect("expansions live over the state space"))
        .collect();
    let original = simulate(&PolyField::of_system(sys), x0, t_end, step)?;
    let lifted = simulate(&LinearField::new(sl.matrix(), sl.offset()), &z0, t_end, step)?;
    let n = sys.dim();
    let max_error = original
        .states()
        .iter()
        .zip(lifted.states())
        .map(|(x, z)| x.iter().zip(&z[..n]).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max))
        .fold(0.0, f64::max);
    Ok(FlowComparison {
        original,
        lifted,
        max_error,
    })
}

/// Lifted initial condition `(x0, p(x0))` in exact arithmetic.
pub fn lifted_initial_exact(sl: &SuperLinearization, x0: &[Rational]) -> Vec<Rational> {
    sl.expansions()
        .iter()
        .map(|q| q.evaluate_exact(x0).expect("expansions live over the state space"))
        .collect()
}
