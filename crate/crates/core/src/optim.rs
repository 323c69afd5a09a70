//! Small derivative-free optimizers shared by the exponent solvers.

use crate::error::Result;
use crate::scalar::{lit, tol, Real};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Location and value of a maximum found by [`maximize_1d`].
#[derive(Debug, Clone, Copy)]
pub struct Maximum<T> {
    pub arg: T,
    pub value: T,
    pub evaluations: usize,
}

/// Number of points in the coarse pre-grid that brackets the golden-section search.
pub const PRE_GRID: usize = 101;

/// Maximizes a unimodal function on `[lo, hi]`: a 101-point grid locates the
/// bracket, golden-section search refines it to `1e-12` in the argument.
pub fn maximize_1d<T: Real, F>(mut f: F, lo: T, hi: T) -> Result<Maximum<T>>
where
    F: FnMut(T) -> Result<T>,
{
    let n = PRE_GRID - 1;
    let step = (hi - lo) / lit(n as f64);
    let mut best = Maximum {
        arg: lo,
        value: T::neg_infinity(),
        evaluations: 0,
    };
    let mut best_i = 0;
    for i in 0..=n {
        let x = if i == n {
            hi
        } else {
            lo + step * lit(i as f64)
        };
        let v = f(x)?;
        best.evaluations += 1;
        if v > best.value {
            best.value = v;
            best.arg = x;
            best_i = i;
        }
    }
    let mut a = if best_i == 0 {
        lo
    } else {
        lo + step * lit((best_i - 1) as f64)
    };
    let mut b = if best_i == n {
        hi
    } else {
        lo + step * lit((best_i + 1) as f64)
    };
    let inv_phi: T = (lit::<T>(5.0).sqrt() - T::one()) / lit(2.0);
    let mut c = b - inv_phi * (b - a);
    let mut d = a + inv_phi * (b - a);
    let mut fc = f(c)?;
    let mut fd = f(d)?;
    best.evaluations += 2;
    let eps: T = tol(1e-12);
    while (b - a).abs() > eps {
        if fc >= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = f(c)?;
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = f(d)?;
        }
        best.evaluations += 1;
        if best.evaluations > 10_000 {
            break;
        }
    }
    for (x, v) in [(c, fc), (d, fd)] {
        if v > best.value {
            best.value = v;
            best.arg = x;
        }
    }
    Ok(best)
}

/// Pattern search over a point of the probability simplex (or a product of
/// simplices given by `blocks`): mass moves between coordinates of the same
/// block plus seeded random zero-sum directions, with step halving.
pub fn pattern_search<T: Real, F>(
    f: &mut F,
    start: Vec<T>,
    blocks: &[std::ops::Range<usize>],
    initial_step: T,
    halvings: usize,
    seed: u64,
) -> (Vec<T>, T, usize)
where
    F: FnMut(&[T]) -> T,
{
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut x = start;
    let mut fx = f(&x);
    let mut evals = 1usize;
    let mut step = initial_step;
    let mut candidate = x.clone();
    let min_step: T = T::epsilon() * lit(4.0);
    for _ in 0..halvings {
        let mut passes = 0;
        loop {
            passes += 1;
            let mut improved = false;
            for block in blocks {
                for i in block.clone() {
                    for j in block.clone() {
                        if i == j || x[i] <= T::zero() {
                            continue;
                        }
                        let amt = step.min(x[i]);
                        candidate.copy_from_slice(&x);
                        candidate[i] = candidate[i] - amt;
                        candidate[j] = candidate[j] + amt;
                        let v = f(&candidate);
                        evals += 1;
                        if v < fx {
                            fx = v;
                            x.copy_from_slice(&candidate);
                            improved = true;
                        }
                    }
                }
                let len = block.len();
                if len >= 2 {
                    for _ in 0..2 * len {
                        let mut dir: Vec<T> =
                            (0..len).map(|_| lit(rng.random::<f64>() - 0.5)).collect();
                        let mean = dir.iter().copied().sum::<T>() / lit(len as f64);
                        dir.iter_mut().for_each(|d| *d = *d - mean);
                        let norm = dir.iter().map(|d| d.abs()).fold(T::zero(), T::max);
                        if norm <= T::zero() {
                            continue;
                        }
                        candidate.copy_from_slice(&x);
                        let mut ok = true;
                        for (k, i) in block.clone().enumerate() {
                            candidate[i] = candidate[i] + step * dir[k] / norm;
                            if candidate[i] < T::zero() {
                                ok = false;
                            }
                        }
                        if !ok {
                            continue;
                        }
                        let v = f(&candidate);
                        evals += 1;
                        if v < fx {
                            fx = v;
                            x.copy_from_slice(&candidate);
                            improved = true;
                        }
                    }
                }
            }
            if !improved || passes >= 500 {
                break;
            }
        }
        step = step * lit(0.5);
        if step < min_step {
            break;
        }
    }
    (x, fx, evals)
}
