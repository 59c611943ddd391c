use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use num_traits::Zero;

use super::chain::{prop1_lift, ChainRecord, LayerDynamics};
use super::{AffineSystem, LiftError, Observable, SuperLinearization};
use crate::depgraph::{build_skeleton, build_wdg, check_condition, scc_decomposition, weak_components};
use crate::poly::{Polynomial, Rational, VariableSpace};
use crate::sysparse::PolySystem;
use crate::verify::verify_symbolic;

/// Where a stage coordinate ends up in the final lifted vector.
#[derive(Clone, Copy, Debug)]
enum Coord {
    State(usize),
    Obs(usize),
}

struct PendingObservable {
    name: String,
    /// Over the stage space it was created in.
    definition: Polynomial,
    /// Final positions of that stage's coordinates.
    stage_coords: Vec<Coord>,
    expansion: Polynomial,
}

/// First of `p`, `w`, `q`, ... whose numbered names cannot clash with a
/// state variable.
fn observable_prefix(state: &VariableSpace) -> String {
    let clashes = |prefix: &str| {
        state.names().iter().any(|n| {
            n.strip_prefix(prefix)
                .is_some_and(|rest| !rest.is_empty() && rest.bytes().all(|b| b.is_ascii_digit()))
        })
    };
    let mut prefix = String::from("p");
    for candidate in ["p", "w", "q", "obs"] {
        if !clashes(candidate) {
            return candidate.to_string();
        }
    }
    while clashes(&prefix) {
        prefix.push('_');
    }
    prefix
}

fn violated(sys: &PolySystem, var: usize, reason: String) -> LiftError {
    LiftError::DecompositionViolated {
        variable: sys.vars().name(var).unwrap_or("?").to_string(),
        reason,
    }
}

/// Builds a super-linearization of `sys`, or reports why the cycle condition
/// does not hold. The result has been checked with
/// [`verify_symbolic`](crate::verify::verify_symbolic).
pub fn superlinearize(sys: &PolySystem) -> Result<SuperLinearization, LiftError> {
    let g = build_wdg(sys);
    let d = scc_decomposition(&g);
    let report = check_condition(&g, &d);
    if !report.pass {
        return Err(LiftError::ConditionFailed(report));
    }
    let skeleton = build_skeleton(&g, &d).map_err(|e| LiftError::Internal(e.to_string()))?;

    let n = sys.dim();
    let prefix = observable_prefix(sys.vars());
    let mut pending: Vec<PendingObservable> = Vec::new();
    let mut blocks: Vec<(AffineSystem, Vec<Coord>)> = Vec::new();
    let mut chains: Vec<ChainRecord> = Vec::new();

    for component in weak_components(&g) {
        // Depths are path lengths inside the skeleton, so restricting the
        // global layering to one weak component gives its own layering.
        let layers: Vec<Vec<usize>> = skeleton
            .layers()
            .iter()
            .map(|layer| {
                let mut vars: Vec<usize> = layer
                    .iter()
                    .flat_map(|&u| skeleton.members(u).iter().copied())
                    .filter(|v| component.binary_search(v).is_ok())
                    .collect();
                vars.sort_unstable();
                vars
            })
            .filter(|vars| !vars.is_empty())
            .collect();

        let (mut affine, mut coords) = base_layer(sys, &layers[0])?;
        for layer in &layers[1..] {
            let dynamics = layer_dynamics(sys, layer, &affine, &coords)?;
            let stage = prop1_lift(&affine, &dynamics, &prefix, pending.len() + 1)?;
            let stage_coords = coords.clone();
            coords.extend(layer.iter().map(|&v| Coord::State(v)));
            for obs in stage.observables {
                // Along a chain the stage lift is exact, so differentiating the
                // previous expansion along f agrees with substituting into the
                // definition, and costs far less.
                let expansion = match pending.last() {
                    Some(prev) if obs.derived => prev.expansion.lie_derivative(sys.rhs())?,
                    _ => expand(sys.vars(), &obs.definition, &stage_coords, &pending)?,
                };
                coords.push(Coord::Obs(pending.len()));
                pending.push(PendingObservable {
                    name: obs.name,
                    definition: obs.definition,
                    stage_coords: stage_coords.clone(),
                    expansion,
                });
            }
            chains.extend(stage.chains);
            affine = stage.system;
        }
        blocks.push((affine, coords));
    }

    let m = pending.len();
    let position = |c: Coord| match c {
        Coord::State(i) => i,
        Coord::Obs(k) => n + k,
    };
    let lifted = sys.vars().extended(pending.iter().map(|p| p.name.clone()))?;
    let mut matrix = alloc::vec![alloc::vec![Rational::zero(); n + m]; n + m];
    let mut offset = alloc::vec![Rational::zero(); n + m];
    for (affine, coords) in &blocks {
        for (r, &cr) in coords.iter().enumerate() {
            let row = position(cr);
            offset[row] = affine.offset()[r].clone();
            for (c, &cc) in coords.iter().enumerate() {
                matrix[row][position(cc)] = affine.matrix()[r][c].clone();
            }
        }
    }
    let observables = pending
        .into_iter()
        .enumerate()
        .map(|(k, p)| {
            let map: Vec<usize> = p.stage_coords.iter().map(|&c| position(c)).collect();
            Ok(Observable {
                index: k + 1,
                name: p.name,
                definition: p.definition.relabel(&lifted, &map)?,
                expansion: p.expansion,
            })
        })
        .collect::<Result<Vec<_>, LiftError>>()?;

    let sl = SuperLinearization::new_unexpanded(sys.vars().clone(), lifted, matrix, offset, observables)?.with_chains(chains);
    match verify_symbolic(sys, &sl) {
        Ok(v) if v.is_pass() => Ok(sl),
        Ok(v) => Err(LiftError::Internal(format!("constructed lift fails verification: {v}"))),
        Err(e) => Err(LiftError::Internal(e.to_string())),
    }
}

/// Source components: every weight inside them is constant and nothing
/// outside feeds them, so their dynamics are affine in their own variables.
fn base_layer(sys: &PolySystem, vars: &[usize]) -> Result<(AffineSystem, Vec<Coord>), LiftError> {
    let local: BTreeMap<usize, usize> = vars.iter().enumerate().map(|(k, &v)| (v, k)).collect();
    let k = vars.len();
    let mut matrix = alloc::vec![alloc::vec![Rational::zero(); k]; k];
    let mut offset = alloc::vec![Rational::zero(); k];
    for (r, &v) in vars.iter().enumerate() {
        let f = &sys.rhs()[v];
        if f.degree().finite().unwrap_or(0) > 1 {
            return Err(violated(sys, v, format!("are not affine in layer 0: {f}")));
        }
        for (mono, c) in f.terms() {
            if mono.is_one() {
                offset[r] = c.clone();
                continue;
            }
            let var = mono.exponents().iter().position(|&e| e == 1).expect("degree one");
            let Some(&col) = local.get(&var) else {
                return Err(violated(sys, v, format!("depend on `{}` outside layer 0", sys.vars().name(var).unwrap_or("?"))));
            };
            matrix[r][col] = c.clone();
        }
    }
    let names: Vec<String> = vars.iter().map(|&v| sys.vars().names()[v].clone()).collect();
    let space = VariableSpace::new(names)?;
    Ok((AffineSystem::new(space, matrix, offset)?, vars.iter().map(|&v| Coord::State(v)).collect()))
}

/// Splits the layer's right-hand sides into `A'' x'' + g(z')`, with `g` moved
/// onto the stage coordinates.
fn layer_dynamics(
    sys: &PolySystem,
    layer: &[usize],
    affine: &AffineSystem,
    coords: &[Coord],
) -> Result<LayerDynamics, LiftError> {
    let mut to_stage: BTreeMap<usize, usize> = BTreeMap::new();
    for (pos, c) in coords.iter().enumerate() {
        if let Coord::State(v) = *c {
            to_stage.insert(v, pos);
        }
    }
    let n = sys.dim();
    let mut linear = Vec::with_capacity(layer.len());
    let mut seeds = Vec::with_capacity(layer.len());
    for &j in layer {
        let f = &sys.rhs()[j];
        let mut row = Vec::with_capacity(layer.len());
        let mut rest = f.clone();
        for &i in layer {
            let w = f.differentiate(i)?;
            if !w.is_constant() {
                return Err(violated(
                    sys,
                    j,
                    format!("are not affine in their own layer (d/d{} = {w})", sys.vars().names()[i]),
                ));
            }
            let a = w.constant_term();
            rest.add_scaled(&-a.clone(), &Polynomial::var(sys.vars(), i)?)?;
            row.push(a);
        }
        let mut map = alloc::vec![0usize; n];
        for v in rest.variables() {
            match to_stage.get(&v) {
                Some(&pos) => map[v] = pos,
                None => {
                    return Err(violated(
                        sys,
                        j,
                        format!("depend on `{}`, which is not lifted yet", sys.vars().names()[v]),
                    ))
                }
            }
        }
        // relabel needs a total map; unused slots never carry exponents
        seeds.push(relabel_partial(&rest, affine.space(), &map)?);
        linear.push(row);
    }
    Ok(LayerDynamics {
        names: layer.iter().map(|&v| sys.vars().names()[v].clone()).collect(),
        linear,
        seeds,
    })
}

fn relabel_partial(p: &Polynomial, target: &VariableSpace, map: &[usize]) -> Result<Polynomial, LiftError> {
    let terms = p.terms().map(|(m, c)| {
        let mut e = alloc::vec![0u32; target.len()];
        for (v, &ev) in m.exponents().iter().enumerate() {
            if ev > 0 {
                e[map[v]] += ev;
            }
        }
        (c.clone(), e)
    });
    let out = Polynomial::from_terms(target, terms)?;
    debug_assert_eq!(out.num_terms(), p.num_terms());
    Ok(out)
}

fn expand(
    state: &VariableSpace,
    definition: &Polynomial,
    stage_coords: &[Coord],
    pending: &[PendingObservable],
) -> Result<Polynomial, LiftError> {
    let mut images = BTreeMap::new();
    for v in definition.variables() {
        let image = match stage_coords[v] {
            Coord::State(i) => Polynomial::var(state, i)?,
            Coord::Obs(k) => pending[k].expansion.clone(),
        };
        images.insert(v, image);
    }
    Ok(definition.substitute(&images, state)?)
}
