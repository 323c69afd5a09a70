//! Probability objects over finite alphabets and the information measures
//! built on them.
//!
//! All quantities are computed in nats; [`LogBase`] converts at the edges.
//! Conventions: `0 ln 0 = 0`, `D(p||q) = +inf` when `p` is not absolutely
//! continuous with respect to `q`, and total variation is the unnormalized
//! l1 distance with range `[0, 2]`.

use crate::error::{Error, Result};
use crate::scalar::{lit, log_sum_exp, tol, Real};
use std::fmt;
use std::str::FromStr;

/// Threshold below which an order is treated as the Shannon limit.
const SINGULAR_ORDER: f64 = 1e-9;

/// Sup-norm threshold for declaring a channel degenerate.
pub const DEGENERACY_TOL: f64 = 1e-12;

/// Logarithm base used for rates and reported exponents.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum LogBase {
    Bits,
    Nats,
}

impl LogBase {
    /// Converts a quantity expressed in this base to nats.
    pub fn to_nats<T: Real>(self, x: T) -> T {
        match self {
            LogBase::Bits => x * T::LN_2(),
            LogBase::Nats => x,
        }
    }

    /// Converts a quantity in nats to this base.
    pub fn from_nats<T: Real>(self, x: T) -> T {
        match self {
            LogBase::Bits => x / T::LN_2(),
            LogBase::Nats => x,
        }
    }

    /// `b^x` for this base.
    pub fn pow<T: Real>(self, x: T) -> T {
        match self {
            LogBase::Bits => x.exp2(),
            LogBase::Nats => x.exp(),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            LogBase::Bits => "bits",
            LogBase::Nats => "nats",
        }
    }
}

impl fmt::Display for LogBase {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for LogBase {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "bits" | "bit" | "2" => Ok(LogBase::Bits),
            "nats" | "nat" | "e" => Ok(LogBase::Nats),
            other => Err(Error::Domain(format!(
                "unknown log base `{other}` (expected bits or nats)"
            ))),
        }
    }
}

fn check_probs<T: Real>(probs: &[T], what: &str) -> Result<T> {
    if probs.is_empty() {
        return Err(Error::InvalidDistribution(format!("{what}: empty")));
    }
    let mut sum = T::zero();
    for (i, &p) in probs.iter().enumerate() {
        if !p.is_finite() || p < T::zero() {
            return Err(Error::InvalidDistribution(format!(
                "{what}: entry {i} is {p}"
            )));
        }
        sum = sum + p;
    }
    Ok(sum)
}

/// A probability vector over a finite alphabet.
#[derive(Debug, Clone, PartialEq)]
pub struct Distribution<T> {
    probs: Vec<T>,
}

impl<T: Real> Distribution<T> {
    /// Builds a distribution whose entries already sum to one within `1e-12`.
    pub fn new(probs: Vec<T>) -> Result<Self> {
        Self::with_tolerance(probs, tol(1e-12))
    }

    /// Accepts entries summing to one within `tolerance`, then renormalizes.
    pub fn with_tolerance(probs: Vec<T>, tolerance: T) -> Result<Self> {
        let sum = check_probs(&probs, "distribution")?;
        if (sum - T::one()).abs() > tolerance {
            return Err(Error::InvalidDistribution(format!(
                "entries sum to {sum}, not 1"
            )));
        }
        Ok(Self {
            probs: probs.into_iter().map(|p| p / sum).collect(),
        })
    }

    /// Normalizes arbitrary nonnegative weights with a positive total.
    pub fn from_weights(weights: Vec<T>) -> Result<Self> {
        let sum = check_probs(&weights, "weights")?;
        if sum <= T::zero() {
            return Err(Error::InvalidDistribution("weights sum to zero".into()));
        }
        Ok(Self {
            probs: weights.into_iter().map(|p| p / sum).collect(),
        })
    }

    pub fn uniform(size: usize) -> Result<Self> {
        if size == 0 {
            return Err(Error::InvalidDistribution("empty alphabet".into()));
        }
        Ok(Self {
            probs: vec![T::one() / lit(size as f64); size],
        })
    }

    pub fn point_mass(size: usize, at: usize) -> Result<Self> {
        if at >= size {
            return Err(Error::Dimension(format!(
                "point {at} outside alphabet of size {size}"
            )));
        }
        let mut probs = vec![T::zero(); size];
        probs[at] = T::one();
        Ok(Self { probs })
    }

    /// Binary distribution `(p0, 1 - p0)`.
    pub fn binary(p0: T) -> Result<Self> {
        Self::new(vec![p0, T::one() - p0])
    }

    pub fn probs(&self) -> &[T] {
        &self.probs
    }

    pub fn len(&self) -> usize {
        self.probs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.probs.is_empty()
    }

    pub fn alphabet_size(&self) -> usize {
        self.probs.len()
    }

    pub fn get(&self, i: usize) -> T {
        self.probs[i]
    }
}

/// A stochastic matrix; entry `(x, y)` is `P(y|x)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Channel<T> {
    data: Vec<T>,
    nx: usize,
    ny: usize,
}

impl<T: Real> Channel<T> {
    /// Builds a channel whose rows each sum to one within `1e-12`.
    pub fn new(rows: Vec<Vec<T>>) -> Result<Self> {
        Self::with_tolerance(rows, tol(1e-12))
    }

    /// Accepts rows summing to one within `tolerance`, then renormalizes them.
    pub fn with_tolerance(rows: Vec<Vec<T>>, tolerance: T) -> Result<Self> {
        let nx = rows.len();
        if nx == 0 {
            return Err(Error::InvalidDistribution("channel has no rows".into()));
        }
        let ny = rows[0].len();
        let mut data = Vec::with_capacity(nx * ny);
        for (x, row) in rows.into_iter().enumerate() {
            if row.len() != ny {
                return Err(Error::Dimension(format!(
                    "channel row {x} has {} entries, expected {ny}",
                    row.len()
                )));
            }
            let d = Distribution::with_tolerance(row, tolerance)
                .map_err(|e| Error::InvalidDistribution(format!("channel row {x}: {e}")))?;
            data.extend_from_slice(d.probs());
        }
        Ok(Self { data, nx, ny })
    }

    /// Binary symmetric channel with crossover probability `eps`.
    pub fn bsc(eps: T) -> Result<Self> {
        Self::new(vec![vec![T::one() - eps, eps], vec![eps, T::one() - eps]])
    }

    /// Noiseless channel on `size` symbols.
    pub fn identity(size: usize) -> Result<Self> {
        let rows = (0..size)
            .map(|x| Distribution::point_mass(size, x).map(|d| d.probs().to_vec()))
            .collect::<Result<Vec<_>>>()?;
        Self::new(rows)
    }

    /// Channel whose every row equals `q`.
    pub fn constant(nx: usize, q: &Distribution<T>) -> Result<Self> {
        Self::new(vec![q.probs().to_vec(); nx])
    }

    pub fn input_size(&self) -> usize {
        self.nx
    }

    pub fn output_size(&self) -> usize {
        self.ny
    }

    pub fn row(&self, x: usize) -> &[T] {
        &self.data[x * self.ny..(x + 1) * self.ny]
    }

    pub fn prob(&self, x: usize, y: usize) -> T {
        self.data[x * self.ny + y]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[T]> {
        self.data.chunks(self.ny)
    }

    pub fn to_rows(&self) -> Vec<Vec<T>> {
        self.rows().map(|r| r.to_vec()).collect()
    }

    fn check_input(&self, p: &Distribution<T>) -> Result<()> {
        if p.len() != self.nx {
            return Err(Error::Dimension(format!(
                "input distribution has {} symbols, channel expects {}",
                p.len(),
                self.nx
            )));
        }
        Ok(())
    }

    /// Output distribution induced by input `p`.
    pub fn output(&self, p: &Distribution<T>) -> Result<Distribution<T>> {
        self.check_input(p)?;
        let mut out = vec![T::zero(); self.ny];
        for (x, row) in self.rows().enumerate() {
            for (o, &w) in out.iter_mut().zip(row) {
                *o = *o + p.get(x) * w;
            }
        }
        Distribution::from_weights(out)
    }

    /// Joint distribution `p(x) P(y|x)`.
    pub fn joint(&self, p: &Distribution<T>) -> Result<JointDistribution<T>> {
        self.check_input(p)?;
        let data = self
            .rows()
            .enumerate()
            .flat_map(|(x, row)| row.iter().map(move |&w| p.get(x) * w))
            .collect();
        Ok(JointDistribution {
            data,
            nx: self.nx,
            ny: self.ny,
        })
    }

    /// True when every row used by `p` equals the output distribution within
    /// [`DEGENERACY_TOL`] in sup norm, in which case the output carries no
    /// information about the input.
    pub fn is_degenerate(&self, p: &Distribution<T>) -> Result<bool> {
        let out = self.output(p)?;
        let t: T = lit(DEGENERACY_TOL);
        Ok(self.rows().enumerate().all(|(x, row)| {
            p.get(x) == T::zero()
                || row
                    .iter()
                    .zip(out.probs())
                    .all(|(&w, &q)| (w - q).abs() <= t)
        }))
    }

    /// Reverse channel `P(x|y)` together with the output distribution `P_Y`.
    /// Rows for outputs of zero probability are set to `p`.
    pub fn reverse(&self, p: &Distribution<T>) -> Result<(Distribution<T>, Channel<T>)> {
        let out = self.output(p)?;
        let rows = (0..self.ny)
            .map(|y| {
                let py = out.get(y);
                if py > T::zero() {
                    let w: Vec<T> = (0..self.nx).map(|x| p.get(x) * self.prob(x, y)).collect();
                    Distribution::from_weights(w).map(|d| d.probs().to_vec())
                } else {
                    Ok(p.probs().to_vec())
                }
            })
            .collect::<Result<Vec<_>>>()?;
        Ok((out, Channel::new(rows)?))
    }
}

/// A probability matrix over `X x Y`.
#[derive(Debug, Clone, PartialEq)]
pub struct JointDistribution<T> {
    data: Vec<T>,
    nx: usize,
    ny: usize,
}

impl<T: Real> JointDistribution<T> {
    pub fn new(rows: Vec<Vec<T>>) -> Result<Self> {
        let nx = rows.len();
        let ny = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != ny) {
            return Err(Error::Dimension("ragged joint distribution".into()));
        }
        Self::from_flat(rows.into_iter().flatten().collect(), nx, ny)
    }

    /// Row-major construction; entries must sum to one within `1e-12`.
    pub fn from_flat(data: Vec<T>, nx: usize, ny: usize) -> Result<Self> {
        if data.len() != nx * ny || nx == 0 || ny == 0 {
            return Err(Error::Dimension(format!(
                "{} entries for a {nx}x{ny} joint distribution",
                data.len()
            )));
        }
        let d = Distribution::new(data)?;
        Ok(Self {
            data: d.probs,
            nx,
            ny,
        })
    }

    /// Row-major construction from nonnegative weights with a positive total.
    pub fn from_weights(data: Vec<T>, nx: usize, ny: usize) -> Result<Self> {
        if data.len() != nx * ny || nx == 0 || ny == 0 {
            return Err(Error::Dimension(format!(
                "{} entries for a {nx}x{ny} joint distribution",
                data.len()
            )));
        }
        let d = Distribution::from_weights(data)?;
        Ok(Self {
            data: d.probs,
            nx,
            ny,
        })
    }

    /// Product distribution `px(x) py(y)`.
    pub fn product(px: &Distribution<T>, py: &Distribution<T>) -> Self {
        let data = px
            .probs()
            .iter()
            .flat_map(|&a| py.probs().iter().map(move |&b| a * b))
            .collect();
        Self {
            data,
            nx: px.len(),
            ny: py.len(),
        }
    }

    pub fn input_size(&self) -> usize {
        self.nx
    }

    pub fn output_size(&self) -> usize {
        self.ny
    }

    pub fn prob(&self, x: usize, y: usize) -> T {
        self.data[x * self.ny + y]
    }

    pub fn as_slice(&self) -> &[T] {
        &self.data
    }

    pub fn to_rows(&self) -> Vec<Vec<T>> {
        self.data.chunks(self.ny).map(|r| r.to_vec()).collect()
    }

    pub fn marginal_x(&self) -> Distribution<T> {
        let w = self
            .data
            .chunks(self.ny)
            .map(|r| r.iter().copied().sum())
            .collect();
        Distribution::from_weights(w).expect("joint distribution has positive mass")
    }

    pub fn marginal_y(&self) -> Distribution<T> {
        let mut w = vec![T::zero(); self.ny];
        for r in self.data.chunks(self.ny) {
            for (o, &v) in w.iter_mut().zip(r) {
                *o = *o + v;
            }
        }
        Distribution::from_weights(w).expect("joint distribution has positive mass")
    }

    /// Conditional `Q(y|x)`; rows with zero input mass become uniform.
    pub fn conditional(&self) -> Channel<T> {
        let rows = self
            .data
            .chunks(self.ny)
            .map(|r| {
                let s: T = r.iter().copied().sum();
                if s > T::zero() {
                    r.iter().map(|&v| v / s).collect()
                } else {
                    vec![T::one() / lit(self.ny as f64); self.ny]
                }
            })
            .collect();
        Channel::with_tolerance(rows, tol(1e-9)).expect("normalized rows")
    }
}

/// `x ln(x/y)` with the usual conventions; `+inf` when `x > 0 = y`.
#[inline]
pub(crate) fn kl_term<T: Real>(x: T, y: T) -> T {
    if x <= T::zero() {
        T::zero()
    } else if y <= T::zero() {
        T::infinity()
    } else {
        x * (x / y).ln()
    }
}

/// `D(p||q)` on raw slices.
pub(crate) fn kl<T: Real>(p: &[T], q: &[T]) -> T {
    p.iter().zip(q).map(|(&a, &b)| kl_term(a, b)).sum()
}

fn same_len<T>(a: &[T], b: &[T]) -> Result<()> {
    if a.len() != b.len() {
        return Err(Error::Dimension(format!(
            "lengths {} and {} differ",
            a.len(),
            b.len()
        )));
    }
    Ok(())
}

/// Shannon entropy `H(p)`.
pub fn entropy<T: Real>(p: &Distribution<T>) -> T {
    p.probs()
        .iter()
        .map(|&v| {
            if v > T::zero() {
                -v * v.ln()
            } else {
                T::zero()
            }
        })
        .sum()
}

/// Relative entropy `D(p||q)`, `+inf` when `p` is not dominated by `q`.
pub fn relative_entropy<T: Real>(p: &Distribution<T>, q: &Distribution<T>) -> Result<T> {
    same_len(p.probs(), q.probs())?;
    Ok(kl(p.probs(), q.probs()).max(T::zero()))
}

/// Relative entropy between two joint distributions on the same alphabets.
pub fn joint_relative_entropy<T: Real>(
    p: &JointDistribution<T>,
    q: &JointDistribution<T>,
) -> Result<T> {
    if p.nx != q.nx || p.ny != q.ny {
        return Err(Error::Dimension(
            "joint distributions differ in shape".into(),
        ));
    }
    Ok(kl(p.as_slice(), q.as_slice()).max(T::zero()))
}

/// `sum_b weights(b) D(p_cond(.|b) || q_cond(.|b))`.
pub fn conditional_relative_entropy<T: Real>(
    p_cond: &Channel<T>,
    q_cond: &Channel<T>,
    weights: &Distribution<T>,
) -> Result<T> {
    if p_cond.nx != q_cond.nx || p_cond.ny != q_cond.ny || weights.len() != p_cond.nx {
        return Err(Error::Dimension(
            "conditional relative entropy operands differ in shape".into(),
        ));
    }
    let mut total = T::zero();
    for b in 0..p_cond.nx {
        let w = weights.get(b);
        if w > T::zero() {
            total = total + w * kl(p_cond.row(b), q_cond.row(b));
        }
    }
    Ok(total.max(T::zero()))
}

/// Per-cell log terms over the support of `P_XY`: `(ln p(x), ln w(y|x), ln p_Y(y))`.
pub(crate) struct SupportTerms<T> {
    pub ln_p: T,
    pub ln_w: T,
    pub ln_py: T,
    pub y: usize,
}

pub(crate) fn support_terms<T: Real>(
    p: &Distribution<T>,
    w: &Channel<T>,
) -> Result<(Distribution<T>, Vec<SupportTerms<T>>)> {
    let py = w.output(p)?;
    let mut terms = Vec::new();
    for x in 0..w.nx {
        let px = p.get(x);
        if px <= T::zero() {
            continue;
        }
        for y in 0..w.ny {
            let wy = w.prob(x, y);
            if wy > T::zero() {
                terms.push(SupportTerms {
                    ln_p: px.ln(),
                    ln_w: wy.ln(),
                    ln_py: py.get(y).ln(),
                    y,
                });
            }
        }
    }
    Ok((py, terms))
}

/// Mutual information `I(P_X, P_{Y|X})`.
pub fn mutual_information<T: Real>(p: &Distribution<T>, w: &Channel<T>) -> Result<T> {
    let (_, terms) = support_terms(p, w)?;
    let i: T = terms
        .iter()
        .map(|t| (t.ln_p + t.ln_w).exp() * (t.ln_w - t.ln_py))
        .sum();
    Ok(i.max(T::zero()))
}

/// Table of information densities `ln(w(y|x) / p_Y(y))`.
///
/// Cells with `w(y|x) = 0 < p_Y(y)` hold `-inf`; cells with `p_Y(y) = 0`
/// are undefined and hold NaN.
pub fn information_density_table<T: Real>(
    p: &Distribution<T>,
    w: &Channel<T>,
) -> Result<Vec<Vec<T>>> {
    let py = w.output(p)?;
    Ok((0..w.nx)
        .map(|x| {
            (0..w.ny)
                .map(|y| {
                    let q = py.get(y);
                    let v = w.prob(x, y);
                    if q <= T::zero() {
                        T::nan()
                    } else if v <= T::zero() {
                        T::neg_infinity()
                    } else {
                        (v / q).ln()
                    }
                })
                .collect()
        })
        .collect())
}

/// Variance of the information density under `P_X P_{Y|X}`.
pub fn mutual_varentropy<T: Real>(p: &Distribution<T>, w: &Channel<T>) -> Result<T> {
    let (_, terms) = support_terms(p, w)?;
    let mut m1 = T::zero();
    let mut m2 = T::zero();
    for t in &terms {
        let mass = (t.ln_p + t.ln_w).exp();
        let i = t.ln_w - t.ln_py;
        m1 = m1 + mass * i;
        m2 = m2 + mass * i * i;
    }
    Ok((m2 - m1 * m1).max(T::zero()))
}

fn check_order<T: Real>(order: T, name: &str) -> Result<()> {
    if !(order > T::zero()) {
        return Err(Error::Domain(format!(
            "{name} order must be positive, got {order}"
        )));
    }
    Ok(())
}

/// Rényi divergence `D_{order}(P_XY || P_X P_Y)`.
///
/// With `order = 1 + l` this is `(1/l) ln E[exp(l i(X;Y))]`; order one is
/// mutual information.
pub fn renyi_divergence_joint<T: Real>(p: &Distribution<T>, w: &Channel<T>, order: T) -> Result<T> {
    check_order(order, "Rényi")?;
    let l = order - T::one();
    if l.abs() < lit(SINGULAR_ORDER) {
        return mutual_information(p, w);
    }
    let (_, terms) = support_terms(p, w)?;
    let lse = log_sum_exp(
        terms
            .iter()
            .map(|t| t.ln_p + t.ln_w + l * (t.ln_w - t.ln_py)),
    );
    Ok((lse / l).max(T::zero()))
}

/// The Jensen-smoothed Rényi quantity
/// `(2/l) ln E[ E^{1/2}[exp(l i(X;Y)) | Y] ]` with `l <= 1`.
///
/// At `l = 0` it equals mutual information.
pub fn tilde_renyi<T: Real>(p: &Distribution<T>, w: &Channel<T>, order_param: T) -> Result<T> {
    let l = order_param;
    if !(l <= T::one()) {
        return Err(Error::Domain(format!(
            "order parameter must be <= 1, got {l}"
        )));
    }
    if l.abs() < lit(SINGULAR_ORDER) {
        return mutual_information(p, w);
    }
    let (py, terms) = support_terms(p, w)?;
    let mut per_y: Vec<Vec<T>> = vec![Vec::new(); w.ny];
    for t in &terms {
        // ln of P(x|y) (w/p_Y)^l
        per_y[t.y].push(t.ln_p + t.ln_w - t.ln_py + l * (t.ln_w - t.ln_py));
    }
    let outer = log_sum_exp(per_y.into_iter().enumerate().filter_map(|(y, v)| {
        let q = py.get(y);
        (q > T::zero()).then(|| q.ln() + lit::<T>(0.5) * log_sum_exp(v))
    }));
    Ok((lit::<T>(2.0) * outer / l).max(T::zero()))
}

/// Sibson's α-mutual information
/// `(a/(a-1)) ln sum_y (sum_x P(x) w(y|x)^a)^{1/a}`.
pub fn sibson_mi<T: Real>(p: &Distribution<T>, w: &Channel<T>, order: T) -> Result<T> {
    check_order(order, "Sibson")?;
    let a = order;
    if (a - T::one()).abs() < lit(SINGULAR_ORDER) {
        return mutual_information(p, w);
    }
    let (_, terms) = support_terms(p, w)?;
    let mut per_y: Vec<Vec<T>> = vec![Vec::new(); w.ny];
    for t in &terms {
        per_y[t.y].push(t.ln_p + a * t.ln_w);
    }
    let inner = log_sum_exp(
        per_y
            .into_iter()
            .filter(|v| !v.is_empty())
            .map(|v| log_sum_exp(v) / a),
    );
    Ok((a / (a - T::one()) * inner).max(T::zero()))
}

/// Order-infinity limit of Sibson's measure: `ln sum_y max_{x in supp P} w(y|x)`.
pub fn sibson_mi_infinite<T: Real>(p: &Distribution<T>, w: &Channel<T>) -> Result<T> {
    w.check_input(p)?;
    let s: T = (0..w.ny)
        .map(|y| {
            (0..w.nx)
                .filter(|&x| p.get(x) > T::zero())
                .map(|x| w.prob(x, y))
                .fold(T::zero(), T::max)
        })
        .sum();
    Ok(s.ln().max(T::zero()))
}

/// Csiszár's α-mutual information together with its minimizing output law.
#[derive(Debug, Clone)]
pub struct CsiszarMi<T> {
    pub value: T,
    pub minimizer: Distribution<T>,
    pub iterations: usize,
    pub residual: T,
}

const CSISZAR_TOL: f64 = 1e-12;
const CSISZAR_MAX_ITER: usize = 10_000;

/// `min_S sum_x P(x) D_a(w(.|x) || S)`, solved by fixed-point iteration on
/// the stationarity condition
/// `S(y) ∝ (sum_x P(x) w(y|x)^a / Z_x(S))^{1/a}`,
/// `Z_x(S) = sum_y w(y|x)^a S(y)^{1-a}`.
pub fn csiszar_mi<T: Real>(p: &Distribution<T>, w: &Channel<T>, order: T) -> Result<CsiszarMi<T>> {
    check_order(order, "Csiszár")?;
    let a = order;
    let py = w.output(p)?;
    if (a - T::one()).abs() < lit(SINGULAR_ORDER) {
        return Ok(CsiszarMi {
            value: mutual_information(p, w)?,
            minimizer: py,
            iterations: 0,
            residual: T::zero(),
        });
    }
    let ys: Vec<usize> = (0..w.ny).filter(|&y| py.get(y) > T::zero()).collect();
    let xs: Vec<usize> = (0..w.nx).filter(|&x| p.get(x) > T::zero()).collect();
    let ln_w = |x: usize, y: usize| {
        let v = w.prob(x, y);
        if v > T::zero() {
            v.ln()
        } else {
            T::neg_infinity()
        }
    };
    let log_z = |ln_s: &[T]| -> Vec<T> {
        xs.iter()
            .map(|&x| {
                log_sum_exp(
                    ys.iter()
                        .enumerate()
                        .map(|(k, &y)| a * ln_w(x, y) + (T::one() - a) * ln_s[k]),
                )
            })
            .collect()
    };
    let normalize = |v: &mut Vec<T>| {
        let z = log_sum_exp(v.iter().copied());
        v.iter_mut().for_each(|e| *e = *e - z);
    };

    let objective = |ln_s: &[T]| -> T {
        xs.iter()
            .zip(log_z(ln_s))
            .map(|(&x, z)| p.get(x) * z)
            .sum::<T>()
            / (a - T::one())
    };
    let step = |ln_s: &[T]| -> Vec<T> {
        let lz = log_z(ln_s);
        let mut target: Vec<T> = ys
            .iter()
            .map(|&y| {
                log_sum_exp(
                    xs.iter()
                        .enumerate()
                        .map(|(i, &x)| p.get(x).ln() + a * ln_w(x, y) - lz[i]),
                ) / a
            })
            .collect();
        normalize(&mut target);
        target
    };
    let distance = |u: &[T], v: &[T]| -> T {
        u.iter()
            .zip(v)
            .map(|(&s, &t)| (s.exp() - t.exp()).abs())
            .fold(T::zero(), T::max)
    };

    // Plain fixed-point steps accelerated by squared extrapolation (SQUAREM),
    // accepted only when the objective does not get worse.
    let mut ln_s: Vec<T> = ys.iter().map(|&y| py.get(y).ln()).collect();
    let mut residual = T::infinity();
    let mut iterations = 0;
    let tol_s: T = tol(CSISZAR_TOL);
    while iterations < CSISZAR_MAX_ITER {
        let x1 = step(&ln_s);
        iterations += 1;
        residual = distance(&ln_s, &x1);
        if residual <= tol_s {
            ln_s = x1;
            break;
        }
        let x2 = step(&x1);
        iterations += 1;
        let r: Vec<T> = x1.iter().zip(&ln_s).map(|(&b, &a0)| b - a0).collect();
        let v: Vec<T> = x2
            .iter()
            .zip(&x1)
            .zip(&r)
            .map(|((&c, &b), &ri)| c - b - ri)
            .collect();
        let nr = r.iter().map(|e| *e * *e).sum::<T>().sqrt();
        let nv = v.iter().map(|e| *e * *e).sum::<T>().sqrt();
        let mut next = x2.clone();
        if nv > T::zero() {
            let alpha = (-(nr / nv)).min(-T::one());
            let mut ext: Vec<T> = ln_s
                .iter()
                .zip(&r)
                .zip(&v)
                .map(|((&s, &ri), &vi)| s - lit::<T>(2.0) * alpha * ri + alpha * alpha * vi)
                .collect();
            if ext.iter().all(|e| e.is_finite()) {
                normalize(&mut ext);
                let ext = step(&ext);
                iterations += 1;
                if ext.iter().all(|e| e.is_finite()) && objective(&ext) <= objective(&x2) {
                    next = ext;
                }
            }
        }
        ln_s = next;
    }
    let mut s_full = vec![T::zero(); w.ny];
    for (k, &y) in ys.iter().enumerate() {
        s_full[y] = ln_s[k].exp();
    }
    if residual > tol_s {
        return Err(Error::Convergence {
            method: "csiszar fixed point",
            iterations,
            residual: residual.to_f64().unwrap_or(f64::NAN),
            last_iterate: s_full
                .iter()
                .map(|v| v.to_f64().unwrap_or(f64::NAN))
                .collect(),
        });
    }
    let lz = log_z(&ln_s);
    let value: T = xs.iter().zip(&lz).map(|(&x, &z)| p.get(x) * z).sum::<T>() / (a - T::one());
    Ok(CsiszarMi {
        value: value.max(T::zero()),
        minimizer: Distribution::from_weights(s_full)?,
        iterations,
        residual,
    })
}

/// The Csiszár objective `sum_x P(x) D_a(w(.|x) || s)` at an arbitrary `s`.
pub fn csiszar_objective<T: Real>(
    p: &Distribution<T>,
    w: &Channel<T>,
    order: T,
    s: &Distribution<T>,
) -> Result<T> {
    check_order(order, "Csiszár")?;
    w.check_input(p)?;
    if s.len() != w.ny {
        return Err(Error::Dimension(
            "auxiliary output law has wrong size".into(),
        ));
    }
    let a = order;
    let mut total = T::zero();
    for x in 0..w.nx {
        let px = p.get(x);
        if px <= T::zero() {
            continue;
        }
        let row = w.row(x);
        let d = if (a - T::one()).abs() < lit(SINGULAR_ORDER) {
            kl(row, s.probs())
        } else {
            let z = log_sum_exp((0..w.ny).filter(|&y| row[y] > T::zero()).map(|y| {
                let sy = s.get(y);
                if sy > T::zero() {
                    a * row[y].ln() + (T::one() - a) * sy.ln()
                } else if a > T::one() {
                    T::infinity()
                } else {
                    T::neg_infinity()
                }
            }));
            z / (a - T::one())
        };
        total = total + px * d;
    }
    Ok(total)
}

/// Unnormalized total variation `sum |p - q|`, in `[0, 2]` for distributions.
pub fn total_variation<T: Real>(p: &[T], q: &[T]) -> Result<T> {
    same_len(p, q)?;
    Ok(p.iter().zip(q).map(|(&a, &b)| (a - b).abs()).sum())
}
