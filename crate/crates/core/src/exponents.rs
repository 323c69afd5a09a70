//! Soft-covering exponents of random i.i.d. and constant-composition
//! codebooks, and the weaker exponents they are compared against.
//!
//! Rates and returned values are in nats. Every solver rejects degenerate
//! channels: the true exponent is infinite there, and no finite number is a
//! faithful answer.
//!
//! | exponent | ensemble | solver |
//! |---|---|---|
//! | α | i.i.d. | dual over Sibson orders, tilted primal certificate |
//! | ℵ | constant composition | dual over Csiszár orders, tilted certificate |
//! | β, γ, ζ | i.i.d. | Rényi-divergence duals |
//! | ℶ | constant composition | outer search over `Q(y|x)`, inner I-projection |
//! | ℷ, ℸ | constant composition | Csiszár / Sibson duals |

use crate::error::{Error, Result};
use crate::measures::{
    csiszar_mi, entropy, kl, mutual_information, renyi_divergence_joint, sibson_mi, tilde_renyi,
    Channel, Distribution, JointDistribution, LogBase,
};
use crate::optim::{maximize_1d, pattern_search};
use crate::scalar::{lit, log_sum_exp, pos, tol, Real};
use crate::typespace::Compositions;
use rayon::prelude::*;
use std::fmt;
use std::str::FromStr;

/// Which exponent a result refers to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ExponentKind {
    Alpha,
    Beta,
    Gamma,
    Zeta,
    Aleph,
    Beth,
    Gimel,
    Daleth,
}

impl ExponentKind {
    pub const ALL: [ExponentKind; 8] = [
        ExponentKind::Alpha,
        ExponentKind::Beta,
        ExponentKind::Gamma,
        ExponentKind::Zeta,
        ExponentKind::Aleph,
        ExponentKind::Beth,
        ExponentKind::Gimel,
        ExponentKind::Daleth,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ExponentKind::Alpha => "alpha",
            ExponentKind::Beta => "beta",
            ExponentKind::Gamma => "gamma",
            ExponentKind::Zeta => "zeta",
            ExponentKind::Aleph => "aleph",
            ExponentKind::Beth => "beth",
            ExponentKind::Gimel => "gimel",
            ExponentKind::Daleth => "daleth",
        }
    }

    /// True for the exponents that are customarily reported halved.
    pub fn customarily_halved(self) -> bool {
        matches!(
            self,
            ExponentKind::Zeta | ExponentKind::Beth | ExponentKind::Gimel | ExponentKind::Daleth
        )
    }

    /// Evaluates this exponent at `rate` (nats).
    pub fn compute<T: Real>(
        self,
        p: &Distribution<T>,
        w: &Channel<T>,
        rate: T,
    ) -> Result<ExponentResult<T>> {
        match self {
            ExponentKind::Alpha => alpha_dual(p, w, rate),
            ExponentKind::Beta => beta_exponent(p, w, rate),
            ExponentKind::Gamma => gamma_exponent(p, w, rate),
            ExponentKind::Zeta => zeta_exponent(p, w, rate),
            ExponentKind::Aleph => aleph_dual(p, w, rate),
            ExponentKind::Beth => beth_exponent(p, w, rate),
            ExponentKind::Gimel => gimel_exponent(p, w, rate),
            ExponentKind::Daleth => daleth_exponent(p, w, rate),
        }
    }
}

impl fmt::Display for ExponentKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// An exponent together with whether it is reported halved, e.g. `half_zeta`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Selection {
    pub kind: ExponentKind,
    pub halved: bool,
}

impl Selection {
    pub fn column(&self) -> String {
        if self.halved {
            format!("half_{}", self.kind.name())
        } else {
            self.kind.name().to_string()
        }
    }

    /// Scales a raw exponent value for reporting.
    pub fn report<T: Real>(&self, value: T) -> T {
        if self.halved {
            value * lit(0.5)
        } else {
            value
        }
    }

    /// The column set of the standard sweep table.
    pub fn standard() -> Vec<Selection> {
        ExponentKind::ALL
            .iter()
            .map(|&kind| Selection {
                kind,
                halved: kind.customarily_halved(),
            })
            .collect()
    }
}

impl FromStr for Selection {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let (halved, base) = match s.strip_prefix("half_") {
            Some(rest) => (true, rest),
            None => (false, s),
        };
        let kind = ExponentKind::ALL
            .iter()
            .copied()
            .find(|k| k.name() == base)
            .ok_or_else(|| Error::Domain(format!("unknown exponent `{s}`")))?;
        Ok(Selection { kind, halved })
    }
}

/// The distribution certifying an exponent value.
#[derive(Debug, Clone, PartialEq)]
pub enum Certificate<T> {
    Joint(JointDistribution<T>),
    Conditional(Channel<T>),
    Output(Distribution<T>),
}

/// Solver bookkeeping attached to every result.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Diagnostics {
    pub method: &'static str,
    pub iterations: usize,
    pub residual: f64,
    pub warnings: Vec<String>,
}

/// An exponent value (nats) with its optimizer certificate.
#[derive(Debug, Clone)]
pub struct ExponentResult<T> {
    pub kind: ExponentKind,
    pub rate: T,
    pub value: T,
    /// `λ*` of the dual. For α and ℵ this is the Rényi order in `[1, 2]`;
    /// for the remaining duals it is the tilt parameter.
    pub optimizer_param: Option<T>,
    /// β only: the second dual parameter `λ'`.
    pub secondary_param: Option<T>,
    pub certificate: Option<Certificate<T>>,
    /// ℵ only: the minimizing auxiliary output law at order `λ*`.
    pub output_law: Option<Distribution<T>>,
    pub diagnostics: Diagnostics,
}

impl<T: Real> ExponentResult<T> {
    pub fn value_in(&self, base: LogBase) -> T {
        base.from_nats(self.value)
    }

    fn new(kind: ExponentKind, rate: T, value: T, method: &'static str) -> Self {
        Self {
            kind,
            rate,
            value: pos(value),
            optimizer_param: None,
            secondary_param: None,
            certificate: None,
            output_law: None,
            diagnostics: Diagnostics {
                method,
                ..Diagnostics::default()
            },
        }
    }
}

/// Validates inputs and returns `I(p, w)`.
fn prepare<T: Real>(p: &Distribution<T>, w: &Channel<T>, rate: T) -> Result<T> {
    if p.len() != w.input_size() {
        return Err(Error::Dimension(format!(
            "input distribution has {} symbols, channel expects {}",
            p.len(),
            w.input_size()
        )));
    }
    if !(rate > T::zero()) || !rate.is_finite() {
        return Err(Error::Domain(format!(
            "rate must be positive and finite, got {rate}"
        )));
    }
    if w.is_degenerate(p)? {
        return Err(Error::Degenerate);
    }
    mutual_information(p, w)
}

/// Largest λ used where the dual parameter ranges over `[0, 1)`.
pub const OPEN_ENDPOINT: f64 = 1.0 - 1e-6;

fn map_order<T: Real>(mu: T) -> T {
    lit::<T>(2.0) / (lit::<T>(2.0) - mu)
}

/// α via its dual `max_{λ∈[1,2]} ((λ-1)/λ)(R - I^s_λ)`, searched over
/// `μ = 2(λ-1)/λ ∈ [0,1]` where the objective `(μ/2)(R - I^s_{2/(2-μ)})` is
/// concave. The certificate is the tilted joint law of [`tilted_optimizer`].
pub fn alpha_dual<T: Real>(
    p: &Distribution<T>,
    w: &Channel<T>,
    rate: T,
) -> Result<ExponentResult<T>> {
    let mi = prepare(p, w, rate)?;
    let mut res = ExponentResult::new(
        ExponentKind::Alpha,
        rate,
        T::zero(),
        "golden-section on sibson dual",
    );
    let lambda = if rate <= mi {
        T::one()
    } else {
        let m = maximize_1d(
            |mu| Ok(mu * lit(0.5) * (rate - sibson_mi(p, w, map_order(mu))?)),
            T::zero(),
            T::one(),
        )?;
        res.value = pos(m.value);
        res.diagnostics.iterations = m.evaluations;
        if res.value > T::zero() {
            map_order(m.arg)
        } else {
            T::one()
        }
    };
    res.optimizer_param = Some(lambda);
    res.certificate = Some(Certificate::Joint(tilted_optimizer(p, w, lambda)?));
    Ok(res)
}

/// The α primal objective `D(Q||P_XY) + ½[R - D(Q||P_X Q_Y)]₊`.
pub fn alpha_primal_objective<T: Real>(
    q: &JointDistribution<T>,
    p: &Distribution<T>,
    w: &Channel<T>,
    rate: T,
) -> Result<T> {
    let (d1, excess) = alpha_primal_parts(q, p, w, rate)?;
    Ok(d1 + lit::<T>(0.5) * pos(excess))
}

/// `(D(Q||P_XY), R - D(Q||P_X Q_Y))`; the first entry is infinite off the support.
fn alpha_primal_parts<T: Real>(
    q: &JointDistribution<T>,
    p: &Distribution<T>,
    w: &Channel<T>,
    rate: T,
) -> Result<(T, T)> {
    let pxy = w.joint(p)?;
    if q.input_size() != w.input_size() || q.output_size() != w.output_size() {
        return Err(Error::Dimension(
            "joint law does not match channel shape".into(),
        ));
    }
    let d1 = kl(q.as_slice(), pxy.as_slice());
    if !d1.is_finite() {
        return Ok((T::infinity(), T::zero()));
    }
    let prod = JointDistribution::product(p, &q.marginal_y());
    let d2 = kl(q.as_slice(), prod.as_slice());
    Ok((pos(d1), rate - d2))
}

/// Exponentially tilted joint law attaining the α primal at Sibson order
/// `lambda_star`:
/// `Q(x|y) ∝ P(x) w(y|x)^λ` and `Q(y) ∝ (sum_x P(x) w(y|x)^λ)^{1/λ}`.
/// At `λ = 1` this is `P_XY`.
pub fn tilted_optimizer<T: Real>(
    p: &Distribution<T>,
    w: &Channel<T>,
    lambda_star: T,
) -> Result<JointDistribution<T>> {
    let slack: T = tol(1e-9);
    if !(lambda_star >= T::one() - slack && lambda_star <= lit::<T>(2.0) + slack) {
        return Err(Error::Domain(format!(
            "tilt order must lie in [1, 2], got {lambda_star}"
        )));
    }
    let l = lambda_star;
    let (nx, ny) = (w.input_size(), w.output_size());
    let mut log_q = vec![T::neg_infinity(); nx * ny];
    for y in 0..ny {
        let cells: Vec<(usize, T)> = (0..nx)
            .filter(|&x| p.get(x) > T::zero() && w.prob(x, y) > T::zero())
            .map(|x| (x, p.get(x).ln() + l * w.prob(x, y).ln()))
            .collect();
        if cells.is_empty() {
            continue;
        }
        let lse = log_sum_exp(cells.iter().map(|c| c.1));
        for (x, v) in cells {
            log_q[x * ny + y] = v + (T::one() / l - T::one()) * lse;
        }
    }
    let z = log_sum_exp(log_q.iter().copied());
    JointDistribution::from_weights(log_q.iter().map(|&v| (v - z).exp()).collect(), nx, ny)
}

/// Result of a brute-force simplex minimization.
#[derive(Debug, Clone)]
pub struct BruteForce<T> {
    pub value: T,
    pub argmin: JointDistribution<T>,
    /// Grid denominator actually used (may be coarser than requested).
    pub divisions: usize,
    pub evaluations: usize,
}

/// Cap on simplex grid points before the grid is coarsened.
pub const BRUTE_FORCE_BUDGET: f64 = 5e5;

fn binomial_f64(n: usize, k: usize) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

/// `[x]₊` smoothed to width `tau`: `tau ln(1 + e^{x/tau})`, which lies in
/// `[[x]₊, [x]₊ + tau ln 2]`. `tau = 0` gives `[x]₊` itself.
fn soft_plus<T: Real>(x: T, tau: T) -> T {
    if tau <= T::zero() {
        return pos(x);
    }
    pos(x) + tau * (-(x.abs() / tau)).exp().ln_1p()
}

/// Minimizes `d + c [e]₊` over joint laws on `nx x ny`, where `parts`
/// returns `(d, e)` (or `None` off the domain). A simplex grid picks the
/// starting points; refinement runs pattern search on the objective with
/// `[e]₊` smoothed at decreasing widths, since direct search stalls on the
/// kink. The reported value is the exact objective at the final point.
fn simplex_bruteforce<T: Real, F>(
    nx: usize,
    ny: usize,
    grid_step: T,
    c: T,
    mut parts: F,
) -> Result<BruteForce<T>>
where
    F: FnMut(&[T]) -> Option<(T, T)>,
{
    let k = nx * ny;
    if k > 9 {
        return Err(Error::Size(format!("|X||Y| = {k} exceeds 9")));
    }
    if !(grid_step > T::zero() && grid_step <= lit(0.1)) {
        return Err(Error::Domain(format!(
            "grid step must lie in (0, 0.1], got {grid_step}"
        )));
    }
    let mut m = (T::one() / grid_step)
        .round()
        .to_usize()
        .unwrap_or(10)
        .max(1);
    while binomial_f64(m + k - 1, k - 1) > BRUTE_FORCE_BUDGET && m > 4 {
        m -= 1;
    }
    let mut smoothed = |q: &[T], tau: T| match parts(q) {
        Some((d, e)) if d.is_finite() => d + c * soft_plus(e, tau),
        _ => T::infinity(),
    };
    let mut evaluations = 0;
    const KEEP: usize = 6;
    let mut best: Vec<(T, Vec<T>)> = Vec::with_capacity(KEEP + 1);
    let mut q = vec![T::zero(); k];
    let inv_m = T::one() / lit(m as f64);
    for comp in Compositions::new(m as u32, k) {
        for (qi, &ci) in q.iter_mut().zip(&comp) {
            *qi = lit::<T>(ci as f64) * inv_m;
        }
        let v = smoothed(&q, T::zero());
        evaluations += 1;
        if best.len() < KEEP || v < best[best.len() - 1].0 {
            let at = best.partition_point(|b| b.0 <= v);
            best.insert(at, (v, q.clone()));
            best.truncate(KEEP);
        }
    }
    let whole = 0..k;
    let blocks = std::slice::from_ref(&whole);
    let widths = [1e-3, 1e-5, 1e-7, 0.0];
    let mut winner: Option<(T, Vec<T>)> = None;
    for (i, (_, start)) in best.into_iter().enumerate() {
        let mut x = start;
        let mut step = inv_m;
        for (stage, &width) in widths.iter().enumerate() {
            let tau = lit::<T>(width);
            let mut f = |q: &[T]| smoothed(q, tau);
            let seed = 0x5eed + (i * widths.len() + stage) as u64;
            let (next, _, ev) = pattern_search(&mut f, x, blocks, step, 200, seed);
            evaluations += ev;
            x = next;
            step = (step * lit(0.1)).max(lit(1e-6));
        }
        let fx = smoothed(&x, T::zero());
        evaluations += 1;
        if winner.as_ref().is_none_or(|w| fx < w.0) {
            winner = Some((fx, x));
        }
    }
    let (value, x) = winner.expect("grid is nonempty");
    Ok(BruteForce {
        value,
        argmin: JointDistribution::from_weights(
            x.iter().map(|&v| v.max(T::zero())).collect(),
            nx,
            ny,
        )?,
        divisions: m,
        evaluations,
    })
}

fn joint_from_slice<T: Real>(q: &[T], nx: usize, ny: usize) -> Option<JointDistribution<T>> {
    if q.iter().any(|&v| v < T::zero()) {
        return None;
    }
    JointDistribution::from_weights(q.to_vec(), nx, ny).ok()
}

/// Independent oracle for α: minimizes the primal objective over a simplex
/// grid of spacing `grid_step`, then refines locally. Gated to `|X||Y| <= 9`.
/// The grid is coarsened when its size would exceed [`BRUTE_FORCE_BUDGET`].
pub fn alpha_primal_bruteforce<T: Real>(
    p: &Distribution<T>,
    w: &Channel<T>,
    rate: T,
    grid_step: T,
) -> Result<BruteForce<T>> {
    prepare(p, w, rate)?;
    let (nx, ny) = (w.input_size(), w.output_size());
    simplex_bruteforce(nx, ny, grid_step, lit(0.5), |q| {
        joint_from_slice(q, nx, ny).and_then(|j| alpha_primal_parts(&j, p, w, rate).ok())
    })
}

/// The ζ primal objective `D(Q||P_XY) + [R - E_Q[i_P(X;Y)]]₊`, where the
/// information density is that of `P_XY`.
pub fn zeta_primal_objective<T: Real>(
    q: &JointDistribution<T>,
    p: &Distribution<T>,
    w: &Channel<T>,
    rate: T,
) -> Result<T> {
    let (d1, excess) = zeta_primal_parts(q, p, w, rate)?;
    Ok(d1 + pos(excess))
}

fn zeta_primal_parts<T: Real>(
    q: &JointDistribution<T>,
    p: &Distribution<T>,
    w: &Channel<T>,
    rate: T,
) -> Result<(T, T)> {
    let pxy = w.joint(p)?;
    if q.input_size() != w.input_size() || q.output_size() != w.output_size() {
        return Err(Error::Dimension(
            "joint law does not match channel shape".into(),
        ));
    }
    let d1 = kl(q.as_slice(), pxy.as_slice());
    if !d1.is_finite() {
        return Ok((T::infinity(), T::zero()));
    }
    let py = w.output(p)?;
    let mut e = T::zero();
    for x in 0..q.input_size() {
        for y in 0..q.output_size() {
            let m = q.prob(x, y);
            if m > T::zero() {
                e = e + m * (w.prob(x, y) / py.get(y)).ln();
            }
        }
    }
    Ok((pos(d1), rate - e))
}

/// Brute-force oracle for the ζ primal, same scheme as [`alpha_primal_bruteforce`].
pub fn zeta_primal_bruteforce<T: Real>(
    p: &Distribution<T>,
    w: &Channel<T>,
    rate: T,
    grid_step: T,
) -> Result<BruteForce<T>> {
    prepare(p, w, rate)?;
    let (nx, ny) = (w.input_size(), w.output_size());
    simplex_bruteforce(nx, ny, grid_step, T::one(), |q| {
        joint_from_slice(q, nx, ny).and_then(|j| zeta_primal_parts(&j, p, w, rate).ok())
    })
}

/// ℵ via its dual `max_{λ∈[1,2]} ((λ-1)/λ)(R - I^c_λ)` over the composition
/// `p_type`. The certificate is `Q(y|x) ∝ w(y|x)^λ S(y)^{1-λ}` with `S` the
/// Csiszár minimizer at order `λ*`.
pub fn aleph_dual<T: Real>(
    p_type: &Distribution<T>,
    w: &Channel<T>,
    rate: T,
) -> Result<ExponentResult<T>> {
    let mi = prepare(p_type, w, rate)?;
    let mut res = ExponentResult::new(
        ExponentKind::Aleph,
        rate,
        T::zero(),
        "golden-section on csiszar dual",
    );
    let lambda = if rate <= mi {
        T::one()
    } else {
        let m = maximize_1d(
            |mu| Ok(mu * lit(0.5) * (rate - csiszar_mi(p_type, w, map_order(mu))?.value)),
            T::zero(),
            T::one(),
        )?;
        res.value = pos(m.value);
        res.diagnostics.iterations = m.evaluations;
        if res.value > T::zero() {
            map_order(m.arg)
        } else {
            T::one()
        }
    };
    let cm = csiszar_mi(p_type, w, lambda)?;
    res.diagnostics.residual = cm.residual.to_f64().unwrap_or(f64::NAN);
    res.optimizer_param = Some(lambda);
    res.certificate = Some(Certificate::Conditional(aleph_tilted_optimizer(
        w,
        lambda,
        &cm.minimizer,
    )?));
    res.output_law = Some(cm.minimizer);
    Ok(res)
}

/// `Q(y|x) ∝ w(y|x)^λ s(y)^{1-λ}`.
pub fn aleph_tilted_optimizer<T: Real>(
    w: &Channel<T>,
    lambda_star: T,
    s: &Distribution<T>,
) -> Result<Channel<T>> {
    if s.len() != w.output_size() {
        return Err(Error::Dimension(
            "auxiliary output law has wrong size".into(),
        ));
    }
    let l = lambda_star;
    let rows = w
        .rows()
        .map(|row| {
            let logs: Vec<T> = row
                .iter()
                .zip(s.probs())
                .map(|(&v, &sy)| {
                    if v > T::zero() && sy > T::zero() {
                        l * v.ln() + (T::one() - l) * sy.ln()
                    } else {
                        T::neg_infinity()
                    }
                })
                .collect();
            let z = log_sum_exp(logs.iter().copied());
            logs.iter().map(|&v| (v - z).exp()).collect()
        })
        .collect();
    Channel::with_tolerance(rows, tol(1e-9))
}

fn cc_divergences<T: Real>(
    q_cond: &Channel<T>,
    p_type: &Distribution<T>,
    w: &Channel<T>,
) -> Result<(T, T, JointDistribution<T>)> {
    if q_cond.input_size() != w.input_size() || q_cond.output_size() != w.output_size() {
        return Err(Error::Dimension(
            "conditional law does not match channel shape".into(),
        ));
    }
    let pq = q_cond.joint(p_type)?;
    let pw = w.joint(p_type)?;
    let d1 = pos(kl(pq.as_slice(), pw.as_slice()));
    let prod = JointDistribution::product(p_type, &pq.marginal_y());
    let d2 = pos(kl(pq.as_slice(), prod.as_slice()));
    Ok((d1, d2, pq))
}

/// The ℵ primal objective `D(P Q||P w) + ½[R - D(P Q||P Q_Y)]₊`.
pub fn aleph_primal_objective<T: Real>(
    q_cond: &Channel<T>,
    p_type: &Distribution<T>,
    w: &Channel<T>,
    rate: T,
) -> Result<T> {
    let (d1, d2, _) = cc_divergences(q_cond, p_type, w)?;
    Ok(d1 + lit::<T>(0.5) * pos(rate - d2))
}

/// The ℷ primal objective `D(P Q||P w) + [R - D(P Q||P Q_Y)]₊`.
pub fn gimel_primal_objective<T: Real>(
    q_cond: &Channel<T>,
    p_type: &Distribution<T>,
    w: &Channel<T>,
    rate: T,
) -> Result<T> {
    let (d1, d2, _) = cc_divergences(q_cond, p_type, w)?;
    Ok(d1 + pos(rate - d2))
}

/// Outcome of an I-projection onto a transportation polytope.
#[derive(Debug, Clone)]
pub struct Projection<T> {
    pub joint: JointDistribution<T>,
    pub divergence: T,
    pub iterations: usize,
    pub residual: T,
}

const IPF_TOL: f64 = 1e-12;
const IPF_MAX_SWEEPS: usize = 50_000;

/// Minimizes `D(R||reference)` over joint laws with marginals `rows` and
/// `cols` by iterative proportional fitting.
pub fn ipf_projection<T: Real>(
    reference: &JointDistribution<T>,
    rows: &Distribution<T>,
    cols: &Distribution<T>,
) -> Result<Projection<T>> {
    let (nx, ny) = (reference.input_size(), reference.output_size());
    if rows.len() != nx || cols.len() != ny {
        return Err(Error::Dimension(
            "marginals do not match reference shape".into(),
        ));
    }
    let mut r = reference.as_slice().to_vec();
    let tol_r: T = tol(IPF_TOL);
    let mut residual = T::infinity();
    let mut iterations = 0;
    while iterations < IPF_MAX_SWEEPS {
        iterations += 1;
        for x in 0..nx {
            let s: T = r[x * ny..(x + 1) * ny].iter().copied().sum();
            let target = rows.get(x);
            if s > T::zero() {
                let f = target / s;
                r[x * ny..(x + 1) * ny].iter_mut().for_each(|v| *v = *v * f);
            } else if target > T::zero() {
                return Err(Error::Constraint(format!(
                    "row {x} of the reference has no mass"
                )));
            }
        }
        for y in 0..ny {
            let s: T = (0..nx).map(|x| r[x * ny + y]).sum();
            let target = cols.get(y);
            if s > T::zero() {
                let f = target / s;
                (0..nx).for_each(|x| r[x * ny + y] = r[x * ny + y] * f);
            } else if target > T::zero() {
                return Err(Error::Constraint(format!(
                    "column {y} of the reference has no mass"
                )));
            }
        }
        residual = (0..nx)
            .map(|x| {
                let s: T = r[x * ny..(x + 1) * ny].iter().copied().sum();
                (s - rows.get(x)).abs()
            })
            .fold(T::zero(), T::max);
        if residual <= tol_r {
            break;
        }
    }
    if residual > tol_r {
        return Err(Error::Convergence {
            method: "iterative proportional fitting",
            iterations,
            residual: residual.to_f64().unwrap_or(f64::NAN),
            last_iterate: r.iter().map(|v| v.to_f64().unwrap_or(f64::NAN)).collect(),
        });
    }
    let divergence = pos(kl(&r, reference.as_slice()));
    Ok(Projection {
        joint: JointDistribution::from_weights(r, nx, ny)?,
        divergence,
        iterations,
        residual,
    })
}

/// `G(Q) = H(Q_Y) - E[ı_w(Y|X)] + min_R D(P R||P w)`, the inner minimum over
/// conditionals `R` whose output law is `Q_Y`. Here `ı_w(y|x) = -ln w(y|x)`
/// and the expectation is under `P Q`.
pub fn g_function<T: Real>(
    q_cond: &Channel<T>,
    p_type: &Distribution<T>,
    w: &Channel<T>,
) -> Result<T> {
    if q_cond.input_size() != w.input_size() || q_cond.output_size() != w.output_size() {
        return Err(Error::Dimension(
            "conditional law does not match channel shape".into(),
        ));
    }
    let pq = q_cond.joint(p_type)?;
    let qy = pq.marginal_y();
    let mut cond_info = T::zero();
    for x in 0..w.input_size() {
        for y in 0..w.output_size() {
            let m = pq.prob(x, y);
            if m > T::zero() {
                let v = w.prob(x, y);
                if v <= T::zero() {
                    return Ok(T::neg_infinity());
                }
                cond_info = cond_info - m * v.ln();
            }
        }
    }
    let inner = ipf_projection(&w.joint(p_type)?, p_type, &qy)?;
    Ok(entropy(&qy) - cond_info + inner.divergence)
}

/// The ℶ objective `D(P Q||P w) + [R - G(Q)]₊`.
pub fn beth_objective<T: Real>(
    q_cond: &Channel<T>,
    p_type: &Distribution<T>,
    w: &Channel<T>,
    rate: T,
) -> Result<T> {
    let (d1, _, _) = cc_divergences(q_cond, p_type, w)?;
    if !d1.is_finite() {
        return Ok(T::infinity());
    }
    let g = g_function(q_cond, p_type, w)?;
    Ok(d1 + pos(rate - g))
}

/// Number of deterministic starts of the general outer search.
pub const OUTER_STARTS: usize = 32;

/// Minimizes `objective(Q(y|x))` over conditional laws. Binary-by-binary
/// problems use a zooming 2-D grid; larger ones use seeded multi-start
/// pattern search. `anchors` are always included as starting points.
fn minimize_over_conditionals<T: Real, F>(
    nx: usize,
    ny: usize,
    anchors: &[Channel<T>],
    mut objective: F,
) -> Result<(Channel<T>, T, usize, Vec<String>)>
where
    F: FnMut(&Channel<T>) -> Result<T>,
{
    let mut warnings = Vec::new();
    let mut failures = 0usize;
    let mut eval = |rows: &[T]| -> T {
        let ch =
            match Channel::with_tolerance(rows.chunks(ny).map(|r| r.to_vec()).collect(), tol(1e-6))
            {
                Ok(c) => c,
                Err(_) => return T::infinity(),
            };
        match objective(&ch) {
            Ok(v) if v.is_nan() => T::infinity(),
            Ok(v) => v,
            Err(_) => {
                failures += 1;
                T::infinity()
            }
        }
    };
    let mut evaluations = 0usize;
    let mut best: Option<(T, Vec<T>)> = None;
    let consider = |v: T, x: Vec<T>, best: &mut Option<(T, Vec<T>)>| {
        if best.as_ref().is_none_or(|b| v < b.0) {
            *best = Some((v, x));
        }
    };

    if nx == 2 && ny == 2 {
        // Coordinates a_x = Q(1|x).
        let to_rows = |a0: T, a1: T| vec![T::one() - a0, a0, T::one() - a1, a1];
        let coarse = 100usize;
        let h = T::one() / lit(coarse as f64);
        let mut grid: Vec<(T, T, T)> = Vec::with_capacity((coarse + 1) * (coarse + 1));
        for i in 0..=coarse {
            for j in 0..=coarse {
                let (a0, a1) = (h * lit(i as f64), h * lit(j as f64));
                let v = eval(&to_rows(a0, a1));
                evaluations += 1;
                grid.push((v, a0, a1));
            }
        }
        for a in anchors {
            let (a0, a1) = (a.prob(0, 1), a.prob(1, 1));
            let v = eval(&to_rows(a0, a1));
            evaluations += 1;
            grid.push((v, a0, a1));
        }
        grid.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap_or(std::cmp::Ordering::Equal));
        let mut seeds: Vec<(T, T)> = Vec::new();
        for &(_, a0, a1) in &grid {
            let far = seeds
                .iter()
                .all(|&(b0, b1)| (a0 - b0).abs() > h * lit(2.5) || (a1 - b1).abs() > h * lit(2.5));
            if far {
                seeds.push((a0, a1));
            }
            if seeds.len() == 6 {
                break;
            }
        }
        let clamp = |v: T| v.max(T::zero()).min(T::one());
        for (c0, c1) in seeds {
            let (mut c0, mut c1) = (c0, c1);
            let mut half = h;
            let mut fc = eval(&to_rows(c0, c1));
            evaluations += 1;
            const SIDE: usize = 20;
            while half > lit(1e-13) {
                let spacing = half * lit(2.0 / SIDE as f64);
                let (mut n0, mut n1) = (c0, c1);
                for i in 0..=SIDE {
                    for j in 0..=SIDE {
                        let a0 = clamp(c0 - half + spacing * lit(i as f64));
                        let a1 = clamp(c1 - half + spacing * lit(j as f64));
                        let v = eval(&to_rows(a0, a1));
                        evaluations += 1;
                        if v < fc {
                            fc = v;
                            n0 = a0;
                            n1 = a1;
                        }
                    }
                }
                c0 = n0;
                c1 = n1;
                half = spacing * lit(2.0);
            }
            consider(fc, to_rows(c0, c1), &mut best);
        }
    } else {
        use rand::{Rng, SeedableRng};
        let blocks: Vec<_> = (0..nx).map(|x| x * ny..(x + 1) * ny).collect();
        let mut starts: Vec<Vec<T>> = anchors
            .iter()
            .map(|a| a.rows().flatten().copied().collect())
            .collect();
        starts.push(vec![T::one() / lit(ny as f64); nx * ny]);
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(0xbe7);
        while starts.len() < OUTER_STARTS {
            let mut s = Vec::with_capacity(nx * ny);
            for _ in 0..nx {
                let e: Vec<f64> = (0..ny).map(|_| -(1.0 - rng.random::<f64>()).ln()).collect();
                let t: f64 = e.iter().sum();
                s.extend(e.iter().map(|v| lit::<T>(v / t)));
            }
            starts.push(s);
        }
        for (i, s) in starts.into_iter().enumerate() {
            let (x, fx, ev) =
                pattern_search(&mut eval, s, &blocks, lit(0.1), 200, 0x0b7 + i as u64);
            evaluations += ev;
            consider(fx, x, &mut best);
        }
    }
    if failures > 0 {
        warnings.push(format!(
            "{failures} objective evaluations failed and were skipped"
        ));
    }
    let (value, x) = best.expect("at least one start");
    if !value.is_finite() {
        return Err(Error::Convergence {
            method: "outer conditional search",
            iterations: evaluations,
            residual: f64::INFINITY,
            last_iterate: x.iter().map(|v| v.to_f64().unwrap_or(f64::NAN)).collect(),
        });
    }
    let ch = Channel::with_tolerance(x.chunks(ny).map(|r| r.to_vec()).collect(), tol(1e-6))?;
    Ok((ch, value, evaluations, warnings))
}

/// ℶ: minimum over `Q(y|x)` of [`beth_objective`]. The search returns the
/// best point found, an upper bound on the exact minimum.
pub fn beth_exponent<T: Real>(
    p_type: &Distribution<T>,
    w: &Channel<T>,
    rate: T,
) -> Result<ExponentResult<T>> {
    prepare(p_type, w, rate)?;
    let (nx, ny) = (w.input_size(), w.output_size());
    let mut anchors = vec![w.clone()];
    if let Ok(a) = aleph_dual(p_type, w, rate) {
        if let Some(Certificate::Conditional(q)) = a.certificate {
            anchors.push(q);
        }
    }
    let (q, value, evaluations, warnings) =
        minimize_over_conditionals(nx, ny, &anchors, |q| beth_objective(q, p_type, w, rate))?;
    let method = if nx == 2 && ny == 2 {
        "zooming grid over Q(y|x) with IPF inner projection"
    } else {
        "multi-start pattern search over Q(y|x) with IPF inner projection"
    };
    let mut res = ExponentResult::new(ExponentKind::Beth, rate, value, method);
    res.diagnostics.iterations = evaluations;
    res.diagnostics.warnings = warnings;
    res.certificate = Some(Certificate::Conditional(q));
    Ok(res)
}

/// ℷ through its dual `max_{λ∈[0,1)} λ(R - I^c_{1/(1-λ)})`.
///
/// The primal objective [`gimel_primal_objective`] differs from the ℵ
/// primal only by the weight on the bracket, so the same Lagrangian argument
/// that gives the ℵ dual yields this form with the order map `1/(1-λ)`.
pub fn gimel_exponent<T: Real>(
    p_type: &Distribution<T>,
    w: &Channel<T>,
    rate: T,
) -> Result<ExponentResult<T>> {
    let mi = prepare(p_type, w, rate)?;
    let mut res = ExponentResult::new(
        ExponentKind::Gimel,
        rate,
        T::zero(),
        "golden-section on csiszar dual",
    );
    if rate <= mi {
        res.optimizer_param = Some(T::zero());
        res.certificate = Some(Certificate::Conditional(w.clone()));
        return Ok(res);
    }
    let m = maximize_1d(
        |l| Ok(l * (rate - csiszar_mi(p_type, w, T::one() / (T::one() - l))?.value)),
        T::zero(),
        lit(OPEN_ENDPOINT),
    )?;
    res.value = pos(m.value);
    res.optimizer_param = Some(m.arg);
    res.diagnostics.iterations = m.evaluations;
    if m.arg >= lit::<T>(OPEN_ENDPOINT) - tol(1e-9) {
        res.diagnostics
            .warnings
            .push("optimum at the capped endpoint".into());
    }
    let order = T::one() / (T::one() - m.arg);
    let cm = csiszar_mi(p_type, w, order)?;
    res.certificate = Some(Certificate::Conditional(aleph_tilted_optimizer(
        w,
        order,
        &cm.minimizer,
    )?));
    res.output_law = Some(cm.minimizer);
    Ok(res)
}

/// Direct outer search on the ℷ primal, used to cross-check [`gimel_exponent`].
pub fn gimel_primal_search<T: Real>(
    p_type: &Distribution<T>,
    w: &Channel<T>,
    rate: T,
) -> Result<(Channel<T>, T)> {
    prepare(p_type, w, rate)?;
    let (q, v, _, _) = minimize_over_conditionals(
        w.input_size(),
        w.output_size(),
        std::slice::from_ref(w),
        |q| gimel_primal_objective(q, p_type, w, rate),
    )?;
    Ok((q, v))
}

/// ℸ: `max_{λ∈[0,1)} λ(R - I^s_{1/(1-λ)})`, with the open endpoint capped.
pub fn daleth_exponent<T: Real>(
    p_type: &Distribution<T>,
    w: &Channel<T>,
    rate: T,
) -> Result<ExponentResult<T>> {
    let mi = prepare(p_type, w, rate)?;
    let mut res = ExponentResult::new(
        ExponentKind::Daleth,
        rate,
        T::zero(),
        "golden-section on sibson dual",
    );
    if rate <= mi {
        res.optimizer_param = Some(T::zero());
        return Ok(res);
    }
    let m = maximize_1d(
        |l| Ok(l * (rate - sibson_mi(p_type, w, T::one() / (T::one() - l))?)),
        T::zero(),
        lit(OPEN_ENDPOINT),
    )?;
    res.value = pos(m.value);
    res.optimizer_param = Some(m.arg);
    res.diagnostics.iterations = m.evaluations;
    if m.arg >= lit::<T>(OPEN_ENDPOINT) - tol(1e-9) {
        res.diagnostics
            .warnings
            .push("optimum at the capped endpoint".into());
    }
    Ok(res)
}

/// γ: `max_{λ∈[0,1]} (λ/(1+λ))(R - D_{1+λ})`, searched over
/// `ν = λ/(1+λ) ∈ [0, ½]` where the objective is concave.
pub fn gamma_exponent<T: Real>(
    p: &Distribution<T>,
    w: &Channel<T>,
    rate: T,
) -> Result<ExponentResult<T>> {
    let mi = prepare(p, w, rate)?;
    let mut res = ExponentResult::new(
        ExponentKind::Gamma,
        rate,
        T::zero(),
        "golden-section on renyi dual",
    );
    if rate <= mi {
        res.optimizer_param = Some(T::zero());
        return Ok(res);
    }
    let m = maximize_1d(
        |nu| Ok(nu * (rate - renyi_divergence_joint(p, w, T::one() / (T::one() - nu))?)),
        T::zero(),
        lit(0.5),
    )?;
    res.value = pos(m.value);
    res.optimizer_param = Some(m.arg / (T::one() - m.arg));
    res.diagnostics.iterations = m.evaluations;
    Ok(res)
}

/// ζ: `max_{λ∈[0,1]} λ(R - D_{1+λ})`. Customarily reported as `½ζ`.
pub fn zeta_exponent<T: Real>(
    p: &Distribution<T>,
    w: &Channel<T>,
    rate: T,
) -> Result<ExponentResult<T>> {
    let mi = prepare(p, w, rate)?;
    let mut res = ExponentResult::new(
        ExponentKind::Zeta,
        rate,
        T::zero(),
        "golden-section on renyi dual",
    );
    if rate <= mi {
        res.optimizer_param = Some(T::zero());
        return Ok(res);
    }
    let m = maximize_1d(
        |l| Ok(l * (rate - renyi_divergence_joint(p, w, T::one() + l)?)),
        T::zero(),
        T::one(),
    )?;
    res.value = pos(m.value);
    res.optimizer_param = Some(m.arg);
    res.diagnostics.iterations = m.evaluations;
    Ok(res)
}

/// Search box for β: `λ ∈ [0, BETA_LAMBDA_MAX]`, `λ' ∈ [BETA_LAMBDA_PRIME_MIN, 1]`.
pub const BETA_LAMBDA_MAX: f64 = 32.0;
pub const BETA_LAMBDA_PRIME_MIN: f64 = -32.0;

/// The β objective at `(λ, λ')`.
pub fn beta_objective<T: Real>(
    p: &Distribution<T>,
    w: &Channel<T>,
    rate: T,
    lambda: T,
    lambda_prime: T,
) -> Result<T> {
    let d = renyi_divergence_joint(p, w, T::one() + lambda)?;
    let dt = tilde_renyi(p, w, lambda_prime)?;
    Ok(beta_formula(rate, lambda, lambda_prime, d, dt))
}

fn beta_formula<T: Real>(rate: T, l: T, lp: T, d: T, dt: T) -> T {
    if l <= T::zero() {
        return T::zero();
    }
    l / (lit::<T>(2.0) * l + T::one() - lp) * (rate - (T::one() - lp) * d - lp * dt)
}

/// β: `max_{λ>=0, λ'<=1} λ/(2λ+1-λ') (R - (1-λ')D_{1+λ} - λ' D̃_{1+λ'})`
/// over a truncated box, by a grid followed by zooming refinement. An
/// optimum on the truncated edge is reported as a warning.
pub fn beta_exponent<T: Real>(
    p: &Distribution<T>,
    w: &Channel<T>,
    rate: T,
) -> Result<ExponentResult<T>> {
    let mi = prepare(p, w, rate)?;
    let mut res = ExponentResult::new(
        ExponentKind::Beta,
        rate,
        T::zero(),
        "grid with zooming refinement",
    );
    if rate <= mi {
        res.optimizer_param = Some(T::zero());
        res.secondary_param = Some(T::zero());
        return Ok(res);
    }
    let (l_hi, lp_lo): (T, T) = (lit(BETA_LAMBDA_MAX), lit(BETA_LAMBDA_PRIME_MIN));
    let h: T = lit(0.125);
    let nl = (l_hi / h).round().to_usize().unwrap_or(256);
    let nlp = ((T::one() - lp_lo) / h).round().to_usize().unwrap_or(264);
    let ls: Vec<T> = (0..=nl).map(|i| h * lit(i as f64)).collect();
    let lps: Vec<T> = (0..=nlp).map(|j| lp_lo + h * lit(j as f64)).collect();
    let ds = ls
        .iter()
        .map(|&l| renyi_divergence_joint(p, w, T::one() + l))
        .collect::<Result<Vec<_>>>()?;
    let dts = lps
        .iter()
        .map(|&lp| tilde_renyi(p, w, lp))
        .collect::<Result<Vec<_>>>()?;
    let mut evaluations = ls.len() + lps.len();
    let (mut bl, mut blp, mut bv) = (T::zero(), T::zero(), T::zero());
    for (&l, &d) in ls.iter().zip(&ds) {
        for (&lp, &dt) in lps.iter().zip(&dts) {
            let v = beta_formula(rate, l, lp, d, dt);
            if v > bv {
                (bl, blp, bv) = (l, lp, v);
            }
        }
    }
    const SIDE: usize = 16;
    let mut half = h;
    while half > lit(1e-11) {
        let spacing = half * lit(2.0 / SIDE as f64);
        let lgrid: Vec<T> = (0..=SIDE)
            .map(|i| {
                (bl - half + spacing * lit(i as f64))
                    .max(T::zero())
                    .min(l_hi)
            })
            .collect();
        let lpgrid: Vec<T> = (0..=SIDE)
            .map(|j| {
                (blp - half + spacing * lit(j as f64))
                    .max(lp_lo)
                    .min(T::one())
            })
            .collect();
        let ds = lgrid
            .iter()
            .map(|&l| renyi_divergence_joint(p, w, T::one() + l))
            .collect::<Result<Vec<_>>>()?;
        let dts = lpgrid
            .iter()
            .map(|&lp| tilde_renyi(p, w, lp))
            .collect::<Result<Vec<_>>>()?;
        evaluations += 2 * (SIDE + 1);
        let (mut nl, mut nlp) = (bl, blp);
        for (&l, &d) in lgrid.iter().zip(&ds) {
            for (&lp, &dt) in lpgrid.iter().zip(&dts) {
                let v = beta_formula(rate, l, lp, d, dt);
                if v > bv {
                    (nl, nlp, bv) = (l, lp, v);
                }
            }
        }
        bl = nl;
        blp = nlp;
        half = spacing * lit(2.0);
    }
    res.value = pos(bv);
    res.optimizer_param = Some(bl);
    res.secondary_param = Some(blp);
    res.diagnostics.iterations = evaluations;
    let edge: T = lit(1e-6);
    if bl >= l_hi - edge || blp <= lp_lo + edge {
        res.diagnostics.warnings.push(format!(
            "optimum on the truncated search boundary (λ={bl}, λ'={blp})"
        ));
    }
    Ok(res)
}

/// One cell of a rate sweep: the reported value or the error that prevented it.
#[derive(Debug, Clone)]
pub struct SweepCell<T> {
    pub selection: Selection,
    pub value: Option<T>,
    pub error: Option<Error>,
    pub diagnostics: Option<Diagnostics>,
}

/// One row of a rate sweep (values in nats, halved where selected).
#[derive(Debug, Clone)]
pub struct SweepRow<T> {
    pub rate: T,
    pub cells: Vec<SweepCell<T>>,
}

/// Evaluates the selected exponents at each rate. Rows run in parallel and
/// per-cell failures are recorded rather than aborting the sweep.
pub fn rate_sweep<T: Real>(
    p: &Distribution<T>,
    w: &Channel<T>,
    rates: &[T],
    which: &[Selection],
) -> Result<Vec<SweepRow<T>>> {
    if rates.windows(2).any(|r| !(r[1] > r[0])) {
        return Err(Error::Domain("rates must be strictly increasing".into()));
    }
    let mut which = which.to_vec();
    which.sort();
    which.dedup();
    Ok(rates
        .par_iter()
        .map(|&rate| SweepRow {
            rate,
            cells: which
                .iter()
                .map(|sel| match sel.kind.compute(p, w, rate) {
                    Ok(r) => SweepCell {
                        selection: *sel,
                        value: Some(sel.report(r.value)),
                        error: None,
                        diagnostics: Some(r.diagnostics),
                    },
                    Err(e) => SweepCell {
                        selection: *sel,
                        value: None,
                        error: Some(e),
                        diagnostics: None,
                    },
                })
                .collect(),
        })
        .collect())
}
