//! Method-of-types combinatorics and the finite-blocklength exponents.
//!
//! Cardinalities are kept in the log domain (via `ln k!`) because type-class
//! sizes overflow 64-bit integers for modest `n`.

use crate::error::{Error, Result};
use crate::measures::{kl, Channel, Distribution};
use crate::scalar::{lit, pos, Real};
use statrs::function::factorial::ln_factorial;

/// Compositions of `n` into `parts` nonnegative parts, in lexicographic
/// order from `(0, .., 0, n)` to `(n, 0, .., 0)`.
#[derive(Debug, Clone)]
pub struct Compositions {
    current: Option<Vec<u32>>,
}

impl Compositions {
    pub fn new(n: u32, parts: usize) -> Self {
        let current = (parts > 0).then(|| {
            let mut c = vec![0; parts];
            c[parts - 1] = n;
            c
        });
        Self { current }
    }
}

impl Iterator for Compositions {
    type Item = Vec<u32>;

    fn next(&mut self) -> Option<Vec<u32>> {
        let out = self.current.take()?;
        let k = out.len();
        let mut next = out.clone();
        let mut tail = 0u32;
        let mut i = k;
        while i > 1 {
            i -= 1;
            tail += next[i];
            if tail > 0 {
                let pivot = i - 1;
                next[pivot] += 1;
                for v in next[pivot + 1..].iter_mut() {
                    *v = 0;
                }
                next[k - 1] = tail - 1;
                self.current = Some(next);
                return Some(out);
            }
        }
        Some(out)
    }
}

/// An n-type: symbol counts summing to `n`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct TypeDescriptor {
    counts: Vec<u32>,
    n: u32,
}

impl TypeDescriptor {
    pub fn new(counts: Vec<u32>) -> Result<Self> {
        let n: u32 = counts.iter().sum();
        if counts.is_empty() || n == 0 {
            return Err(Error::Domain(
                "a type needs a nonempty alphabet and n >= 1".into(),
            ));
        }
        Ok(Self { counts, n })
    }

    /// The `m`-type equal to `p`, when `p` has denominators dividing `m`.
    pub fn from_distribution<T: Real>(p: &Distribution<T>, m: u32) -> Result<Self> {
        let counts = p
            .probs()
            .iter()
            .map(|&v| {
                let c = v * lit(m as f64);
                let r = c.round();
                if (c - r).abs() > lit(1e-9) {
                    Err(Error::Constraint(format!(
                        "distribution is not a {m}-type (entry {v})"
                    )))
                } else {
                    Ok(r.to_u32().unwrap_or(0))
                }
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(counts)
    }

    /// Smallest `m` for which `p` is an `m`-type, searched up to `max_m`.
    pub fn denominator_of<T: Real>(p: &Distribution<T>, max_m: u32) -> Result<Self> {
        (1..=max_m)
            .find_map(|m| Self::from_distribution(p, m).ok())
            .ok_or_else(|| {
                Error::Constraint(format!("distribution is not an m-type for m <= {max_m}"))
            })
    }

    pub fn counts(&self) -> &[u32] {
        &self.counts
    }

    pub fn n(&self) -> u32 {
        self.n
    }

    pub fn alphabet_size(&self) -> usize {
        self.counts.len()
    }

    pub fn to_distribution<T: Real>(&self) -> Distribution<T> {
        let n = lit::<T>(self.n as f64);
        Distribution::from_weights(
            self.counts
                .iter()
                .map(|&c| lit::<T>(c as f64) / n)
                .collect(),
        )
        .expect("type has positive mass")
    }
}

/// A joint n-type over `X x Y`, row-major counts.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct JointTypeDescriptor {
    counts: Vec<u32>,
    nx: usize,
    ny: usize,
    n: u32,
}

impl JointTypeDescriptor {
    pub fn new(rows: Vec<Vec<u32>>) -> Result<Self> {
        let nx = rows.len();
        let ny = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != ny) {
            return Err(Error::Dimension("ragged joint type".into()));
        }
        Self::from_flat(rows.into_iter().flatten().collect(), nx, ny)
    }

    pub fn from_flat(counts: Vec<u32>, nx: usize, ny: usize) -> Result<Self> {
        if counts.len() != nx * ny || nx == 0 || ny == 0 {
            return Err(Error::Dimension(format!(
                "{} counts for a {nx}x{ny} joint type",
                counts.len()
            )));
        }
        let n = counts.iter().sum();
        if n == 0 {
            return Err(Error::Domain("joint type with n = 0".into()));
        }
        Ok(Self { counts, nx, ny, n })
    }

    pub fn n(&self) -> u32 {
        self.n
    }

    pub fn count(&self, x: usize, y: usize) -> u32 {
        self.counts[x * self.ny + y]
    }

    pub fn counts(&self) -> &[u32] {
        &self.counts
    }

    pub fn input_size(&self) -> usize {
        self.nx
    }

    pub fn output_size(&self) -> usize {
        self.ny
    }

    pub fn to_rows(&self) -> Vec<Vec<u32>> {
        self.counts.chunks(self.ny).map(|r| r.to_vec()).collect()
    }

    pub fn marginal_x(&self) -> Vec<u32> {
        self.counts
            .chunks(self.ny)
            .map(|r| r.iter().sum())
            .collect()
    }

    pub fn marginal_y(&self) -> Vec<u32> {
        (0..self.ny)
            .map(|y| (0..self.nx).map(|x| self.count(x, y)).sum())
            .collect()
    }
}

/// Every n-type over an alphabet of the given size, lexicographically.
pub fn enumerate_types(n: u32, alphabet: usize) -> impl Iterator<Item = TypeDescriptor> {
    Compositions::new(n, alphabet).map(move |counts| TypeDescriptor { counts, n })
}

/// `ln C(n + k - 1, k - 1)`, the log of the number of n-types on `k` symbols.
pub fn log_type_count(n: u32, alphabet: usize) -> f64 {
    let k = alphabet as u64;
    ln_factorial(n as u64 + k - 1) - ln_factorial(n as u64) - ln_factorial(k - 1)
}

/// Exact number of n-types on `k` symbols, `None` on `u128` overflow.
pub fn type_count(n: u32, alphabet: usize) -> Option<u128> {
    let k = alphabet as u128 - 1;
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc.checked_mul(n as u128 + k - i)? / (i + 1);
    }
    Some(acc)
}

fn ln_multinomial(total: u32, parts: impl Iterator<Item = u32>) -> f64 {
    ln_factorial(total as u64) - parts.map(|c| ln_factorial(c as u64)).sum::<f64>()
}

/// `ln |T_Q| = ln (n! / prod_a n_a!)`.
pub fn log_type_class_size(t: &TypeDescriptor) -> f64 {
    ln_multinomial(t.n, t.counts.iter().copied())
}

/// `ln |T_Q|` for a joint type.
pub fn log_joint_type_class_size(q: &JointTypeDescriptor) -> f64 {
    ln_multinomial(q.n, q.counts.iter().copied())
}

/// Log size of the conditional type class `T_{Q_{X|Y}}(y^n)` for any
/// `y^n` of type `Q_Y`: `sum_y ln (n_y! / prod_x n_{xy}!)`.
pub fn log_conditional_type_class_size(q: &JointTypeDescriptor) -> f64 {
    q.marginal_y()
        .iter()
        .enumerate()
        .map(|(y, &ny)| ln_multinomial(ny, (0..q.nx).map(|x| q.count(x, y))))
        .sum()
}

/// Natural log of `P[X^n ∈ T_{Q_{X|Y}}(y^n)]` for i.i.d. `X^n ~ p`:
/// `-n E[-ln p(X)] + ln |T_{Q_{X|Y}}(y^n)|`. Returns `-inf` when the
/// `X`-marginal of the type is not supported by `p`.
pub fn log_conditional_type_probability<T: Real>(
    q: &JointTypeDescriptor,
    p: &Distribution<T>,
) -> Result<f64> {
    if p.len() != q.nx {
        return Err(Error::Dimension(
            "distribution and joint type differ in |X|".into(),
        ));
    }
    let mut log_p = 0.0;
    for (x, &c) in q.marginal_x().iter().enumerate() {
        if c > 0 {
            let px = p.get(x).to_f64().unwrap_or(0.0);
            if px <= 0.0 {
                return Ok(f64::NEG_INFINITY);
            }
            log_p += c as f64 * px.ln();
        }
    }
    Ok(log_p + log_conditional_type_class_size(q))
}

/// `P[X^n ∈ T_{Q_{X|Y}}(y^n)]` for i.i.d. `X^n ~ p`.
pub fn conditional_type_probability<T: Real>(
    q: &JointTypeDescriptor,
    p: &Distribution<T>,
) -> Result<f64> {
    Ok(log_conditional_type_probability(q, p)?.exp())
}

/// Constant-composition analogue: probability that a uniform draw from
/// `T_{P_X}` has joint type `Q` with a fixed `y^n` of type `Q_Y`,
/// `|T_{Q_XY}| / (|T_{P_X}| |T_{Q_Y}|)`.
pub fn cc_conditional_type_probability(
    q: &JointTypeDescriptor,
    p_type: &TypeDescriptor,
) -> Result<f64> {
    if q.marginal_x() != p_type.counts || q.n != p_type.n {
        return Err(Error::Constraint(
            "X-marginal of the joint type differs from the composition".into(),
        ));
    }
    let qy = TypeDescriptor {
        counts: q.marginal_y(),
        n: q.n,
    };
    Ok(
        (log_joint_type_class_size(q) - log_type_class_size(p_type) - log_type_class_size(&qy))
            .exp(),
    )
}

/// `𝔜(M, Q) = min{2 p_Q, M^{-1/2} p_Q^{1/2}}` with `p_Q` from
/// [`conditional_type_probability`].
pub fn frak_y<T: Real>(m: f64, q: &JointTypeDescriptor, p: &Distribution<T>) -> Result<f64> {
    if !(m > 0.0) {
        return Err(Error::Domain(format!(
            "codebook size must be positive, got {m}"
        )));
    }
    let pq = conditional_type_probability(q, p)?;
    Ok((2.0 * pq).min((pq / m).sqrt()))
}

/// Largest number of candidate types a finite-n minimization will visit.
pub const ENUMERATION_GUARD: f64 = 1e7;

/// Minimum of a finite-n exponent together with its minimizing type.
#[derive(Debug, Clone)]
pub struct FiniteN<T> {
    pub n: u32,
    pub value: T,
    pub minimizing_type: JointTypeDescriptor,
    pub types_examined: usize,
}

/// `D(Q||P_XY) + ½[R - D(Q||P_X Q_Y)]₊` at a joint type; the shared
/// objective of `α_n` and `ℵ_n`.
fn type_objective<T: Real>(
    counts: &[u32],
    n: u32,
    p: &Distribution<T>,
    w: &Channel<T>,
    rate: T,
    qy: &mut [T],
    q: &mut [T],
) -> T {
    let ny = w.output_size();
    let inv_n = T::one() / lit(n as f64);
    qy.iter_mut().for_each(|v| *v = T::zero());
    for (i, &c) in counts.iter().enumerate() {
        q[i] = lit::<T>(c as f64) * inv_n;
        qy[i % ny] = qy[i % ny] + q[i];
    }
    let mut d1 = T::zero();
    let mut d2 = T::zero();
    for (i, &qv) in q.iter().enumerate() {
        if qv > T::zero() {
            let (x, y) = (i / ny, i % ny);
            let pxy = p.get(x) * w.prob(x, y);
            if pxy <= T::zero() {
                return T::infinity();
            }
            d1 = d1 + qv * (qv / pxy).ln();
            d2 = d2 + qv * (qv / (p.get(x) * qy[y])).ln();
        }
    }
    pos(d1) + lit::<T>(0.5) * pos(rate - pos(d2))
}

/// `α_n = min over joint n-types Q of D(Q||P_XY) + ½[R - D(Q||P_X Q_Y)]₊`
/// (rate in nats).
pub fn alpha_finite_n<T: Real>(
    p: &Distribution<T>,
    w: &Channel<T>,
    rate: T,
    n: u32,
) -> Result<FiniteN<T>> {
    let (nx, ny) = (w.input_size(), w.output_size());
    if p.len() != nx {
        return Err(Error::Dimension(
            "input distribution does not match channel".into(),
        ));
    }
    if n == 0 {
        return Err(Error::Domain("n must be at least 1".into()));
    }
    let k = nx * ny;
    if log_type_count(n, k) > ENUMERATION_GUARD.ln() {
        return Err(Error::Size(format!(
            "joint {n}-types on {k} cells exceed {ENUMERATION_GUARD:e}"
        )));
    }
    let mut qy = vec![T::zero(); ny];
    let mut q = vec![T::zero(); k];
    let mut best: Option<(T, Vec<u32>)> = None;
    let mut examined = 0;
    for c in Compositions::new(n, k) {
        examined += 1;
        let v = type_objective(&c, n, p, w, rate, &mut qy, &mut q);
        if best.as_ref().is_none_or(|b| v < b.0) {
            best = Some((v, c));
        }
    }
    let (value, counts) = best.expect("at least one type");
    Ok(FiniteN {
        n,
        value,
        minimizing_type: JointTypeDescriptor::from_flat(counts, nx, ny)?,
        types_examined: examined,
    })
}

/// `ℵ_n`: the same minimization restricted to joint n-types whose
/// `X`-marginal is the composition `p_type` scaled to length `n`.
pub fn aleph_finite_n<T: Real>(
    p_type: &TypeDescriptor,
    w: &Channel<T>,
    rate: T,
    n: u32,
) -> Result<FiniteN<T>> {
    let (nx, ny) = (w.input_size(), w.output_size());
    if p_type.alphabet_size() != nx {
        return Err(Error::Dimension(
            "composition does not match channel".into(),
        ));
    }
    if n == 0 || !n.is_multiple_of(p_type.n) {
        return Err(Error::Constraint(format!(
            "n = {n} is not a multiple of the composition length {}",
            p_type.n
        )));
    }
    let scale = n / p_type.n;
    let row_counts: Vec<u32> = p_type.counts.iter().map(|&c| c * scale).collect();
    let log_total: f64 = row_counts.iter().map(|&c| log_type_count(c, ny)).sum();
    if log_total > ENUMERATION_GUARD.ln() {
        return Err(Error::Size(format!(
            "conditional {n}-types exceed {ENUMERATION_GUARD:e}"
        )));
    }
    let p: Distribution<T> = p_type.to_distribution();
    let per_row: Vec<Vec<Vec<u32>>> = row_counts
        .iter()
        .map(|&c| Compositions::new(c, ny).collect())
        .collect();
    let mut idx = vec![0usize; nx];
    let mut counts = vec![0u32; nx * ny];
    let mut qy = vec![T::zero(); ny];
    let mut q = vec![T::zero(); nx * ny];
    let mut best: Option<(T, Vec<u32>)> = None;
    let mut examined = 0;
    loop {
        for x in 0..nx {
            counts[x * ny..(x + 1) * ny].copy_from_slice(&per_row[x][idx[x]]);
        }
        examined += 1;
        let v = type_objective(&counts, n, &p, w, rate, &mut qy, &mut q);
        if best.as_ref().is_none_or(|b| v < b.0) {
            best = Some((v, counts.clone()));
        }
        let mut x = nx;
        loop {
            if x == 0 {
                let (value, counts) = best.expect("at least one type");
                return Ok(FiniteN {
                    n,
                    value,
                    minimizing_type: JointTypeDescriptor::from_flat(counts, nx, ny)?,
                    types_examined: examined,
                });
            }
            x -= 1;
            idx[x] += 1;
            if idx[x] < per_row[x].len() {
                break;
            }
            idx[x] = 0;
        }
    }
}

/// Which random-coding ensemble a set of finite-n constants refers to.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Ensemble {
    Iid,
    ConstantComposition,
}

/// Constants of the finite-blocklength sandwich, all in nats except `mu_n`.
///
/// For the constant-composition ensemble `kappa_n` holds the lower-bound
/// constant `η̆_n` and `rho_n`, `phi_n`, `upsilon_n` hold their `˘` twins.
#[derive(Debug, Clone, PartialEq)]
pub struct FiniteNConstants {
    pub ensemble: Ensemble,
    pub n: u32,
    pub kappa_n: f64,
    pub rho_n: f64,
    pub phi_n: f64,
    pub upsilon_n: f64,
    pub upsilon_vacuous: bool,
    pub a_eps: f64,
    pub mu_n: f64,
    pub delta: f64,
    pub r: f64,
}

/// `a_ε = e^ε / (1+ε)^{1+ε}`, strictly below one for `ε > 0`.
pub fn a_epsilon(eps: f64) -> f64 {
    (eps - (1.0 + eps) * eps.ln_1p()).exp()
}

fn upper_constants(
    n: u32,
    ny: usize,
    rate: f64,
    exponent_n: f64,
    rho: f64,
    delta: f64,
    r: f64,
) -> Result<(f64, f64, f64, f64, bool)> {
    let nf = n as f64;
    let mu = (nf * rate).exp();
    if !(delta > (-nf * rate).exp() && delta < 1.0) {
        return Err(Error::Domain(format!(
            "delta = {delta} must lie in (exp(-nR), 1) = ({:e}, 1)",
            (-nf * rate).exp()
        )));
    }
    if !(r > 0.0 && r < rate / 2.0) {
        return Err(Error::Domain(format!(
            "r = {r} must lie in (0, R/2) = (0, {})",
            rate / 2.0
        )));
    }
    let eps = delta - 1.0 / mu;
    let a = a_epsilon(eps);
    let log_a = eps - (1.0 + eps) * eps.ln_1p();
    let bracket = mu.powf(-0.5)
        + (nf * (ny as f64).ln() + mu * log_a).exp()
        + 2.0 * (1.0 + delta) * (-nf * r).exp();
    let phi = (nf * (exponent_n + rho)).exp() * bracket;
    let vacuous = !(phi < 1.0);
    let upsilon = if vacuous {
        f64::INFINITY
    } else {
        rho + phi / (1.0 - phi) / nf + delta.ln_1p() / nf
    };
    Ok((mu, a, phi, upsilon, vacuous))
}

/// `κ_n = (|X||Y|/n) ln(n+1) + ln(2)/n`, with `ln 2√2` for integer `M`.
pub fn kappa_n(n: u32, alph_x: usize, alph_y: usize, integer_m: bool) -> f64 {
    let nf = n as f64;
    let tail = if integer_m {
        (2.0 * 2f64.sqrt()).ln()
    } else {
        2f64.ln()
    };
    (alph_x * alph_y) as f64 / nf * (nf + 1.0).ln() + tail / nf
}

/// `η̆_n = |X|(2 + 3|Y|)/(2n) ln(n+1)`.
pub fn eta_n(n: u32, alph_x: usize, alph_y: usize) -> f64 {
    let nf = n as f64;
    alph_x as f64 * (2.0 + 3.0 * alph_y as f64) / (2.0 * nf) * (nf + 1.0).ln()
}

/// Finite-blocklength constants for the i.i.d. ensemble (all logs natural,
/// `rate`, `alpha_n`, `r` in nats). `integer_m` selects the variant for
/// `M = ⌈exp(nR)⌉`, which replaces `ln 2` by `ln 2√2` in `κ_n`.
#[allow(clippy::too_many_arguments)]
pub fn finite_n_constants(
    n: u32,
    alph_x: usize,
    alph_y: usize,
    rate: f64,
    alpha_n: f64,
    delta: f64,
    r: f64,
    integer_m: bool,
) -> Result<FiniteNConstants> {
    if n == 0 {
        return Err(Error::Domain("n must be at least 1".into()));
    }
    let nf = n as f64;
    let ln_n1 = (nf + 1.0).ln();
    let kappa = kappa_n(n, alph_x, alph_y, integer_m);
    let rho = ((alph_x + 1) * alph_y) as f64 / nf * ln_n1 + 4f64.ln() / nf;
    let (mu, a, phi, upsilon, vacuous) = upper_constants(n, alph_y, rate, alpha_n, rho, delta, r)?;
    Ok(FiniteNConstants {
        ensemble: Ensemble::Iid,
        n,
        kappa_n: kappa,
        rho_n: rho,
        phi_n: phi,
        upsilon_n: upsilon,
        upsilon_vacuous: vacuous,
        a_eps: a,
        mu_n: mu,
        delta,
        r,
    })
}

/// Constant-composition twins `η̆_n, ρ̆_n, φ̆_n, ῠ_n` (nats).
pub fn cc_finite_n_constants(
    n: u32,
    alph_x: usize,
    alph_y: usize,
    rate: f64,
    aleph_n: f64,
    delta: f64,
    r: f64,
) -> Result<FiniteNConstants> {
    if n == 0 {
        return Err(Error::Domain("n must be at least 1".into()));
    }
    let nf = n as f64;
    let ln_n1 = (nf + 1.0).ln();
    let (x, y) = (alph_x as f64, alph_y as f64);
    let eta = eta_n(n, alph_x, alph_y);
    let rho = (x + 2.0 * x * y + y) / (2.0 * nf) * ln_n1 + 4f64.ln() / nf;
    let (mu, a, phi, upsilon, vacuous) = upper_constants(n, alph_y, rate, aleph_n, rho, delta, r)?;
    Ok(FiniteNConstants {
        ensemble: Ensemble::ConstantComposition,
        n,
        kappa_n: eta,
        rho_n: rho,
        phi_n: phi,
        upsilon_n: upsilon,
        upsilon_vacuous: vacuous,
        a_eps: a,
        mu_n: mu,
        delta,
        r,
    })
}

/// `D(Q||P_X Q_Y)` at a joint type, exposed for sandwich checks.
pub fn type_divergence_to_product<T: Real>(q: &JointTypeDescriptor, p: &Distribution<T>) -> T {
    let n = lit::<T>(q.n as f64);
    let qv: Vec<T> = q.counts.iter().map(|&c| lit::<T>(c as f64) / n).collect();
    let qy: Vec<T> = q
        .marginal_y()
        .iter()
        .map(|&c| lit::<T>(c as f64) / n)
        .collect();
    let prod: Vec<T> = (0..q.nx)
        .flat_map(|x| qy.iter().map(move |&b| p.get(x) * b))
        .collect();
    pos(kl(&qv, &prod))
}
