//! Continuous relaxation: brickwork circuits of parameterized two-site blocks.
//!
//! Layer `l` places blocks on pairs `(i, i+1)` with `i ≡ l (mod 2)`. Each block
//! is `(A ⊗ B) · exp(i(a XX + b YY + c ZZ)) · (C ⊗ D)` with single-site
//! `U3` factors, 15 real parameters, which covers all of SU(4) up to phase.
//! The bound is counted in blocks and is never certified.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::predicate::{frame_vector, SearchPredicate};
use super::result::Status;
use crate::lattice::circuit::{apply_one_site, apply_two_site};
use crate::lattice::{LatticeSpec, C64};

const BLOCK_PARAMS: usize = 15;
const SITE_PARAMS: usize = 3;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LayerSearchConfig {
    pub max_layers: u32,
    pub starts: usize,
    pub iterations: usize,
    pub learning_rate: f64,
    pub seed: u64,
}

impl Default for LayerSearchConfig {
    fn default() -> Self {
        Self {
            max_layers: 6,
            starts: 6,
            iterations: 300,
            learning_rate: 0.08,
            seed: 0,
        }
    }
}

/// Heuristic upper bound counted in two-site blocks.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LayerBound {
    pub blocks: u32,
    pub layers: u32,
    /// `UpperBound` when a brickwork met the predicate, else `LowerBoundCutoff`.
    pub status: Status,
    pub best_score: f64,
    pub threshold: f64,
    /// Optimized block parameters of the witness brickwork.
    pub parameters: Vec<f64>,
}

/// Block placements `(a, b)` for a brickwork of `layers` layers.
pub fn brickwork_pairs(n_sites: usize, layers: u32) -> Vec<(usize, usize)> {
    let mut out = Vec::new();
    for l in 0..layers as usize {
        if n_sites == 1 {
            out.push((0, 0));
            continue;
        }
        let mut i = l % 2;
        while i + 1 < n_sites {
            out.push((i, i + 1));
            i += 2;
        }
    }
    out
}

fn u3(theta: f64, phi: f64, lambda: f64) -> [C64; 4] {
    let (c, s) = ((theta / 2.0).cos(), (theta / 2.0).sin());
    [
        C64::new(c, 0.0),
        -C64::from_polar(s, lambda),
        C64::from_polar(s, phi),
        C64::from_polar(c, phi + lambda),
    ]
}

fn mat4_mul(a: &[C64; 16], b: &[C64; 16]) -> [C64; 16] {
    let mut out = [C64::new(0.0, 0.0); 16];
    for r in 0..4 {
        for c in 0..4 {
            out[4 * r + c] = (0..4).map(|k| a[4 * r + k] * b[4 * k + c]).sum();
        }
    }
    out
}

fn kron2(a: &[C64; 4], b: &[C64; 4]) -> [C64; 16] {
    let mut out = [C64::new(0.0, 0.0); 16];
    for r in 0..4 {
        for c in 0..4 {
            out[4 * r + c] = a[2 * (r / 2) + c / 2] * b[2 * (r % 2) + c % 2];
        }
    }
    out
}

/// `exp(i(a XX + b YY + c ZZ))`; the three terms commute.
fn canonical(a: f64, b: f64, c: f64) -> [C64; 16] {
    let z = C64::new(0.0, 0.0);
    let one = C64::new(1.0, 0.0);
    let xx = [z, z, z, one, z, z, one, z, z, one, z, z, one, z, z, z];
    let yy = [z, z, z, -one, z, z, one, z, z, one, z, z, -one, z, z, z];
    let zz = [one, z, z, z, z, -one, z, z, z, z, -one, z, z, z, z, one];
    let expo = |t: f64, p: &[C64; 16]| {
        let mut m = [C64::new(0.0, 0.0); 16];
        for k in 0..16 {
            let id = if k % 5 == 0 { t.cos() } else { 0.0 };
            m[k] = C64::new(id, 0.0) + C64::new(0.0, t.sin()) * p[k];
        }
        m
    };
    mat4_mul(&mat4_mul(&expo(a, &xx), &expo(b, &yy)), &expo(c, &zz))
}

fn block_matrix(p: &[f64]) -> [C64; 16] {
    let outer = kron2(&u3(p[0], p[1], p[2]), &u3(p[3], p[4], p[5]));
    let inner = kron2(&u3(p[9], p[10], p[11]), &u3(p[12], p[13], p[14]));
    mat4_mul(&mat4_mul(&outer, &canonical(p[6], p[7], p[8])), &inner)
}

fn params_per_block(n_sites: usize) -> usize {
    if n_sites == 1 {
        SITE_PARAMS
    } else {
        BLOCK_PARAMS
    }
}

/// Applies a parameterized brickwork to every frame state.
pub fn apply_brickwork(params: &[f64], pairs: &[(usize, usize)], n_sites: usize, images: &mut [C64]) {
    let dim = 1usize << n_sites;
    let per = params_per_block(n_sites);
    for (k, &(a, b)) in pairs.iter().enumerate() {
        let p = &params[k * per..(k + 1) * per];
        if n_sites == 1 {
            let m = u3(p[0], p[1], p[2]);
            for chunk in images.chunks_mut(dim) {
                apply_one_site(chunk, 0, &m);
            }
        } else {
            let m = block_matrix(p);
            for chunk in images.chunks_mut(dim) {
                apply_two_site(chunk, a, b, &m);
            }
        }
    }
}

fn evaluate(pred: &dyn SearchPredicate, frame: &[C64], params: &[f64], pairs: &[(usize, usize)], n: usize) -> f64 {
    let mut images = frame.to_vec();
    apply_brickwork(params, pairs, n, &mut images);
    pred.score(&images)
}

/// Adam ascent on the predicate score from one random start.
fn optimize(
    pred: &dyn SearchPredicate,
    frame: &[C64],
    pairs: &[(usize, usize)],
    n: usize,
    cfg: &LayerSearchConfig,
    stream: u64,
) -> (f64, Vec<f64>) {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    rng.set_stream(stream);
    let len = pairs.len() * params_per_block(n);
    let mut x: Vec<f64> = (0..len)
        .map(|_| rng.gen_range(-std::f64::consts::PI..std::f64::consts::PI))
        .collect();
    let (mut m, mut v) = (vec![0.0; len], vec![0.0; len]);
    let (b1, b2, h) = (0.9, 0.999, 1e-6);
    let mut best = (evaluate(pred, frame, &x, pairs, n), x.clone());
    for it in 1..=cfg.iterations {
        if best.0 >= pred.threshold() {
            break;
        }
        let mut grad = vec![0.0; len];
        for i in 0..len {
            let keep = x[i];
            x[i] = keep + h;
            let up = evaluate(pred, frame, &x, pairs, n);
            x[i] = keep - h;
            let down = evaluate(pred, frame, &x, pairs, n);
            x[i] = keep;
            grad[i] = (up - down) / (2.0 * h);
        }
        for i in 0..len {
            m[i] = b1 * m[i] + (1.0 - b1) * grad[i];
            v[i] = b2 * v[i] + (1.0 - b2) * grad[i] * grad[i];
            let mh = m[i] / (1.0 - f64::powi(b1, it as i32));
            let vh = v[i] / (1.0 - f64::powi(b2, it as i32));
            x[i] += cfg.learning_rate * mh / (vh.sqrt() + 1e-12);
        }
        let score = evaluate(pred, frame, &x, pairs, n);
        if score > best.0 {
            best = (score, x.clone());
        }
    }
    best
}

/// Smallest brickwork depth (reported in blocks) whose optimized circuit
/// meets the predicate, trying `L = 0, 1, ..., max_layers`.
pub fn heuristic_layer_complexity(
    pred: &dyn SearchPredicate,
    lattice: &LatticeSpec,
    cfg: &LayerSearchConfig,
) -> LayerBound {
    let n = lattice.n_sites();
    let frame = frame_vector(pred);
    let threshold = pred.threshold();
    let mut overall_best = pred.score(&frame);
    if pred.satisfied(&frame) {
        return LayerBound {
            blocks: 0,
            layers: 0,
            status: Status::UpperBound,
            best_score: overall_best,
            threshold,
            parameters: Vec::new(),
        };
    }
    for layers in 1..=cfg.max_layers {
        let pairs = brickwork_pairs(n, layers);
        let runs: Vec<(f64, Vec<f64>)> = (0..cfg.starts as u64)
            .into_par_iter()
            .map(|s| optimize(pred, &frame, &pairs, n, cfg, u64::from(layers) * 1000 + s))
            .collect();
        let (score, params) = runs.into_iter().fold(
            (f64::NEG_INFINITY, Vec::new()),
            |acc, r| if r.0 > acc.0 { r } else { acc },
        );
        overall_best = overall_best.max(score);
        let mut images = frame.clone();
        apply_brickwork(&params, &pairs, n, &mut images);
        if pred.satisfied(&images) {
            return LayerBound {
                blocks: pairs.len() as u32,
                layers,
                status: Status::UpperBound,
                best_score: score,
                threshold,
                parameters: params,
            };
        }
    }
    LayerBound {
        blocks: brickwork_pairs(n, cfg.max_layers).len() as u32 + 1,
        layers: cfg.max_layers,
        status: Status::LowerBoundCutoff,
        best_score: overall_best,
        threshold,
        parameters: Vec::new(),
    }
}
