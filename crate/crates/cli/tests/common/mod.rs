#![allow(dead_code)]

use std::path::PathBuf;

use rand::seq::SliceRandom;
use rand::Rng;
use slin_core::depgraph::Wdg;
use slin_core::{parse_polynomial, parse_system, PolySystem, VariableSpace};

pub fn fixture(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("fixtures").join(name)
}

pub fn fixture_system(name: &str) -> PolySystem {
    parse_system(&std::fs::read_to_string(fixture(name)).unwrap()).unwrap()
}

fn nonzero<R: Rng>(rng: &mut R, bound: i64) -> i64 {
    loop {
        let c = rng.gen_range(-bound..=bound);
        if c != 0 {
            return c;
        }
    }
}

fn coefficient<R: Rng>(rng: &mut R) -> String {
    let c = nonzero(rng, 4);
    if rng.gen_bool(0.2) {
        format!("({c}/{})", rng.gen_range(2..=5))
    } else {
        format!("({c})")
    }
}

fn monomial<R: Rng>(rng: &mut R, vars: &[String], max_degree: u32) -> String {
    let degree = rng.gen_range(1..=max_degree);
    let factors: Vec<&str> = (0..degree).map(|_| vars.choose(rng).unwrap().as_str()).collect();
    factors.join("*")
}

/// A random system whose strong components have constant internal weights
/// and whose inter-component terms are polynomials of degree <= 3 in
/// variables of earlier components. Variables are shuffled so components are
/// not contiguous. Returns the system text.
pub fn random_layered_system<R: Rng>(rng: &mut R, max_n: usize) -> String {
    let n = rng.gen_range(1..=max_n);
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(rng);
    let names: Vec<String> = (1..=n).map(|i| format!("x{i}")).collect();

    // Split the shuffled order into consecutive components.
    let mut components: Vec<Vec<usize>> = Vec::new();
    let mut rest = &order[..];
    while !rest.is_empty() {
        let size = rng.gen_range(1..=rest.len().min(3));
        components.push(rest[..size].to_vec());
        rest = &rest[size..];
    }

    let mut rhs: Vec<Vec<String>> = vec![Vec::new(); n];
    let mut earlier: Vec<String> = Vec::new();
    for comp in &components {
        let k = comp.len();
        for (a, &j) in comp.iter().enumerate() {
            // In-component linear part: a ring for strong connectivity, a
            // random diagonal, and a few extra constant couplings.
            if k > 1 {
                let prev = comp[(a + k - 1) % k];
                rhs[j].push(format!("{}*{}", coefficient(rng), names[prev]));
            }
            if rng.gen_bool(0.6) {
                rhs[j].push(format!("{}*{}", coefficient(rng), names[j]));
            }
            for &i in comp {
                if i != j && rng.gen_bool(0.2) {
                    rhs[j].push(format!("{}*{}", coefficient(rng), names[i]));
                }
            }
            if !earlier.is_empty() {
                for _ in 0..rng.gen_range(0..=2) {
                    rhs[j].push(format!("{}*{}", coefficient(rng), monomial(rng, &earlier, 3)));
                }
            }
            if rng.gen_bool(0.2) {
                rhs[j].push(coefficient(rng));
            }
        }
        earlier.extend(comp.iter().map(|&v| names[v].clone()));
    }

    let mut text = format!("vars: {}\n", names.join(" "));
    for (name, terms) in names.iter().zip(&rhs) {
        let body = if terms.is_empty() { "0".to_string() } else { terms.join(" + ") };
        text.push_str(&format!("{name}' = {body}\n"));
    }
    text
}

/// A random weighted digraph on at most `max_n` nodes; roughly half the
/// weights are constants, the rest have degree 1 or 2.
pub fn random_wdg<R: Rng>(rng: &mut R, max_n: usize) -> Wdg {
    let n = rng.gen_range(1..=max_n);
    let names: Vec<String> = (1..=n).map(|i| format!("x{i}")).collect();
    let space = VariableSpace::new(names.iter().cloned()).unwrap();
    let density = rng.gen_range(0.1..0.6);
    let mut weights = Vec::new();
    for i in 0..n {
        for j in 0..n {
            if !rng.gen_bool(density) {
                continue;
            }
            let text = if rng.gen_bool(0.5) {
                coefficient(rng)
            } else {
                format!("{}*{} + {}", coefficient(rng), monomial(rng, &names, 2), coefficient(rng))
            };
            weights.push(((i, j), parse_polynomial(&text, &space).unwrap()));
        }
    }
    Wdg::from_weights(&space, weights).unwrap()
}
