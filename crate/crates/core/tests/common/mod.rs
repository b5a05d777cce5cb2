//! Shared generators for integration tests.
#![allow(dead_code)]

use rand::distr::{Distribution, Uniform};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use starheat::{GraphFunction, GraphPoint, Profile, StarGraph};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Weights drawn uniformly from the simplex, renormalized so the sum check passes.
pub fn random_graph(rng: &mut impl Rng, n_min: usize, n_max: usize) -> StarGraph {
    let n = rng.random_range(n_min..=n_max);
    let e: Vec<f64> = (0..n).map(|_| -(1.0 - rng.random::<f64>()).ln()).collect();
    let s: f64 = e.iter().sum();
    let mut w: Vec<f64> = e.iter().map(|v| v / s).collect();
    let rest: f64 = w[..n - 1].iter().sum();
    w[n - 1] = 1.0 - rest;
    StarGraph::new(w).expect("valid simplex draw")
}

pub fn random_point(rng: &mut impl Rng, graph: &StarGraph, max: f64) -> GraphPoint {
    GraphPoint { edge: rng.random_range(0..graph.edge_count()), coord: rng.random::<f64>() * max }
}

pub fn log_uniform(rng: &mut impl Rng, lo: f64, hi: f64) -> f64 {
    (lo.ln() + rng.random::<f64>() * (hi.ln() - lo.ln())).exp()
}

pub fn random_profile(rng: &mut impl Rng) -> Profile {
    match rng.random_range(0..4) {
        0 => {
            let a = rng.random::<f64>() * 5.0;
            Profile::Indicator { a, b: a + 0.1 + rng.random::<f64>() * 3.0, height: 0.2 + rng.random::<f64>() }
        }
        1 => Profile::Gauss {
            center: rng.random::<f64>() * 6.0,
            sigma: 0.2 + rng.random::<f64>(),
            height: 0.2 + rng.random::<f64>(),
        },
        2 => Profile::Exp { rate: 0.3 + 2.0 * rng.random::<f64>(), height: 0.2 + rng.random::<f64>() },
        _ => {
            let h = 0.1;
            let len = 10 + rng.random_range(0..40);
            let u = Uniform::new(0.0, 1.0).unwrap();
            let mut values: Vec<f64> = (0..len).map(|_| u.sample(rng)).collect();
            values[0] = 0.5;
            Profile::Grid { h, values }
        }
    }
}

/// Mixture of 1-4 components: atoms and catalog densities on random edges.
pub fn random_data(rng: &mut impl Rng, graph: &StarGraph) -> GraphFunction {
    let k = rng.random_range(1..=4);
    let mut f = GraphFunction::empty();
    for _ in 0..k {
        let edge = rng.random_range(0..graph.edge_count());
        f = if rng.random::<bool>() {
            f.with_atom(edge, rng.random::<f64>() * 6.0, 0.1 + rng.random::<f64>()).unwrap()
        } else {
            f.with_density(edge, random_profile(rng)).unwrap()
        };
    }
    f
}
