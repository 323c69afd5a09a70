#![allow(dead_code)]

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use softcover::{Channel64, Distribution64, LogBase};

pub const LN2: f64 = std::f64::consts::LN_2;

/// The binary symmetric reference instance: crossover 0.05, `P(0) = 0.4`.
pub fn bsc_instance() -> (Distribution64, Channel64) {
    (
        Distribution64::binary(0.4).unwrap(),
        Channel64::bsc(0.05).unwrap(),
    )
}

pub fn bits(x: f64) -> f64 {
    LogBase::Bits.from_nats(x)
}

pub fn nats_from_bits(x: f64) -> f64 {
    LogBase::Bits.to_nats(x)
}

/// A random strictly positive channel of the given shape with a random
/// full-support input law.
pub fn random_instance(seed: u64, nx: usize, ny: usize) -> (Distribution64, Channel64) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut draw = |k: usize| -> Vec<f64> {
        let v: Vec<f64> = (0..k).map(|_| 0.05 + rng.random::<f64>()).collect();
        let s: f64 = v.iter().sum();
        v.into_iter().map(|x| x / s).collect()
    };
    let p = Distribution64::new(draw(nx)).unwrap();
    let rows = (0..nx).map(|_| draw(ny)).collect();
    (p, Channel64::new(rows).unwrap())
}

/// Direct mutual information in nats from explicit loops.
pub fn mi_oracle(p: &[f64], w: &[Vec<f64>]) -> f64 {
    let ny = w[0].len();
    let py: Vec<f64> = (0..ny)
        .map(|y| (0..p.len()).map(|x| p[x] * w[x][y]).sum())
        .collect();
    let mut s = 0.0;
    for x in 0..p.len() {
        for y in 0..ny {
            if p[x] > 0.0 && w[x][y] > 0.0 {
                s += p[x] * w[x][y] * (w[x][y] / py[y]).ln();
            }
        }
    }
    s
}
