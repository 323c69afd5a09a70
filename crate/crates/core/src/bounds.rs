//! Binomial and Poisson inequalities behind the soft-covering proofs, each
//! evaluated exactly next to its bound.
//!
//! Infinite Poisson sums are truncated once a Chernoff bound on the
//! remaining mass drops below `1e-15`, so "exact" carries that tolerance.

use crate::error::{Error, Result};
use crate::typespace::a_epsilon;
use statrs::function::factorial::ln_factorial;

/// Slack allowed when deciding whether a bound holds.
pub const HOLD_TOL: f64 = 1e-12;
const TAIL_MASS: f64 = 1e-15;

/// An evaluated inequality `lhs <= rhs`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundReport {
    pub lhs: f64,
    pub rhs: f64,
    pub holds: bool,
    pub slack: f64,
}

impl BoundReport {
    pub fn new(lhs: f64, rhs: f64) -> Self {
        Self {
            lhs,
            rhs,
            holds: lhs <= rhs + HOLD_TOL,
            slack: rhs - lhs,
        }
    }
}

fn ln_poisson_pmf(mu: f64, k: u64) -> f64 {
    if mu == 0.0 {
        return if k == 0 { 0.0 } else { f64::NEG_INFINITY };
    }
    -mu + k as f64 * mu.ln() - ln_factorial(k)
}

/// Index past which the Poisson(mu) upper tail carries less than
/// [`TAIL_MASS`], from the Chernoff bound `P[N >= k] <= exp(-mu h(k/mu))`.
fn poisson_cutoff(mu: f64) -> u64 {
    let target = TAIL_MASS.ln();
    let mut k = (mu.ceil() as u64).max(1);
    loop {
        let x = k as f64;
        let chernoff = -mu + x - x * (x / mu).ln();
        // Covers both the mass and the first moment of the tail.
        if chernoff + x.ln() < target {
            return k;
        }
        k += 1 + k / 16;
    }
}

/// For `Z = (l/M) Bin(M, p)`, `E|Z - EZ| <= l min{2p, sqrt(p/M)}`.
/// The left side is summed exactly over the `M + 1` outcomes.
pub fn binomial_abs_mean_dev_bound(m: u64, p: f64, l: f64) -> Result<BoundReport> {
    if m == 0 || !(0.0..=1.0).contains(&p) || l < 0.0 {
        return Err(Error::Domain(format!(
            "need M >= 1, p in [0,1], l >= 0; got M={m}, p={p}, l={l}"
        )));
    }
    let mf = m as f64;
    let mean = mf * p;
    let lhs = if p == 0.0 || p == 1.0 {
        0.0
    } else {
        let (lp, lq) = (p.ln(), (1.0 - p).ln());
        (0..=m)
            .map(|k| {
                let ln_pmf = ln_factorial(m) - ln_factorial(k) - ln_factorial(m - k)
                    + k as f64 * lp
                    + (m - k) as f64 * lq;
                (k as f64 - mean).abs() * ln_pmf.exp()
            })
            .sum::<f64>()
            * l
            / mf
    };
    let rhs = l * (2.0 * p).min((p / mf).sqrt());
    Ok(BoundReport::new(lhs, rhs))
}

/// For Poisson `M` with mean `mu > 1` and `delta ∈ (1/mu, 1)`,
/// `E[M 1{M > (1+δ)μ}] <= μ a_{δ-1/μ}^μ`.
pub fn poisson_tail_bound(mu: f64, delta: f64) -> Result<BoundReport> {
    if !(mu > 1.0) || !(delta > 1.0 / mu && delta < 1.0) {
        return Err(Error::Domain(format!(
            "need mu > 1 and delta in (1/mu, 1); got mu={mu}, delta={delta}"
        )));
    }
    let threshold = (1.0 + delta) * mu;
    let start = threshold.floor() as u64 + 1;
    let end = poisson_cutoff(mu).max(start + 1);
    let lhs: f64 = (start..=end)
        .map(|k| k as f64 * ln_poisson_pmf(mu, k).exp())
        .sum();
    let eps = delta - 1.0 / mu;
    let rhs = mu * (mu * (eps - (1.0 + eps) * eps.ln_1p())).exp();
    debug_assert!((rhs / mu - a_epsilon(eps).powf(mu)).abs() <= 1e-12 + 1e-9 * rhs / mu);
    Ok(BoundReport::new(lhs, rhs))
}

/// Mean absolute deviation of a Poisson(ξ) variable.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PoissonMeanDeviation {
    /// Closed form `2 ξ^{⌊ξ⌋+1} e^{-ξ} / ⌊ξ⌋!`.
    pub exact: f64,
    /// `¼ min{2ξ, √ξ}`.
    pub lower: f64,
    /// Truncated direct summation of `E|N - ξ|`.
    pub summed: f64,
}

/// `E|N - ξ| >= ¼ min{2ξ, √ξ}` for Poisson `N`, with the exact
/// closed form and an independent summation.
pub fn poisson_abs_mean_dev(xi: f64) -> Result<PoissonMeanDeviation> {
    if !(xi > 0.0) {
        return Err(Error::Domain(format!("xi must be positive, got {xi}")));
    }
    let f = xi.floor() as u64;
    let exact = 2.0 * ((f + 1) as f64 * xi.ln() - xi - ln_factorial(f)).exp();
    let lower = 0.25 * (2.0 * xi).min(xi.sqrt());
    let end = poisson_cutoff(xi);
    let summed = (0..=end)
        .map(|k| (k as f64 - xi).abs() * ln_poisson_pmf(xi, k).exp())
        .sum();
    Ok(PoissonMeanDeviation {
        exact,
        lower,
        summed,
    })
}

/// For Poisson `M` with mean `mu >= 1`, `P[M = ⌈μ⌉] > 1/(8√⌈μ⌉)`.
/// Reported as `lhs = 1/(8√⌈μ⌉)` against `rhs = P[M = ⌈μ⌉]`.
pub fn poisson_mode_mass(mu: f64) -> Result<BoundReport> {
    if !(mu >= 1.0) {
        return Err(Error::Domain(format!("mu must be at least 1, got {mu}")));
    }
    let c = mu.ceil();
    let mass = ln_poisson_pmf(mu, c as u64).exp();
    let bound = 1.0 / (8.0 * c.sqrt());
    let mut report = BoundReport::new(bound, mass);
    report.holds = bound < mass;
    Ok(report)
}

/// Both forms of the Poissonized concentration bound.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PoissonizedConcentration {
    /// `2 exp(-μ(1 - e^{-t²/2}))`.
    pub tight: f64,
    /// `2 exp(-μ t² / (2 + t²))`.
    pub loose: f64,
    pub ordered: bool,
}

/// With a Poisson number of codewords, `P[|tv - E tv| >= t]` is at
/// most `2 exp(-μ(1 - e^{-t²/2}))`, which in turn is at most
/// `2 exp(-μ t²/(2 + t²))`.
pub fn poissonized_tv_concentration_bound(mu: f64, t: f64) -> Result<PoissonizedConcentration> {
    if !(mu > 0.0 && t > 0.0) {
        return Err(Error::Domain(format!(
            "need mu > 0 and t > 0; got mu={mu}, t={t}"
        )));
    }
    let tight = 2.0 * (-mu * (-(-t * t / 2.0).exp_m1())).exp();
    let loose = 2.0 * (-mu * t * t / (2.0 + t * t)).exp();
    Ok(PoissonizedConcentration {
        tight,
        loose,
        ordered: tight <= loose * (1.0 + 1e-12) + HOLD_TOL,
    })
}

/// McDiarmid bound `2 exp(-M t² / 2)` on `P[|tv - E tv| >= t]` for a
/// codebook of `M` codewords.
pub fn mcdiarmid_bound(m: f64, t: f64) -> f64 {
    2.0 * (-m * t * t / 2.0).exp()
}

/// Robbins' form of Stirling: `k! <= k^k e^{-k + 1/(12k)} √(2πk)`.
pub fn robbins_stirling(k: u64) -> Result<BoundReport> {
    if k == 0 {
        return Err(Error::Domain("k must be at least 1".into()));
    }
    let kf = k as f64;
    let exact: f64 = (1..=k).map(|i| (i as f64).ln()).sum();
    let bound =
        kf * kf.ln() - kf + 1.0 / (12.0 * kf) + 0.5 * (2.0 * std::f64::consts::PI * kf).ln();
    Ok(BoundReport::new(exact, bound))
}

/// One named entry of the bounds suite.
#[derive(Debug, Clone)]
pub struct SuiteEntry {
    pub lemma: &'static str,
    pub params: String,
    pub report: BoundReport,
}

/// Runs every bound over its test grid.
pub fn bounds_suite() -> Vec<SuiteEntry> {
    let mut out = Vec::new();
    for m in 1..=50u64 {
        for i in 0..=20 {
            let p = i as f64 * 0.05;
            for &l in &[0.5, 1.0, 2.0] {
                let report = binomial_abs_mean_dev_bound(m, p, l).expect("valid grid");
                out.push(SuiteEntry {
                    lemma: "binomial_abs_mean_dev",
                    params: format!("M={m} p={p:.2} l={l}"),
                    report,
                });
            }
        }
    }
    for &mu in &[1.5, 2.0, 5.0, 10.0, 50.0] {
        for i in 1..20 {
            let delta = i as f64 * 0.05;
            if delta <= 1.0 / mu {
                continue;
            }
            let report = poisson_tail_bound(mu, delta).expect("valid grid");
            out.push(SuiteEntry {
                lemma: "poisson_tail",
                params: format!("mu={mu} delta={delta:.2}"),
                report,
            });
        }
        let report = poisson_mode_mass(mu).expect("valid grid");
        out.push(SuiteEntry {
            lemma: "poisson_mode_mass",
            params: format!("mu={mu}"),
            report,
        });
        for &t in &[0.01, 0.1, 0.5, 1.0, 2.0] {
            let c = poissonized_tv_concentration_bound(mu, t).expect("valid grid");
            out.push(SuiteEntry {
                lemma: "poissonized_concentration",
                params: format!("mu={mu} t={t}"),
                report: BoundReport::new(c.tight, c.loose),
            });
        }
    }
    for i in 1..=200 {
        let xi = i as f64 * 0.1;
        let d = poisson_abs_mean_dev(xi).expect("valid grid");
        out.push(SuiteEntry {
            lemma: "poisson_abs_mean_dev",
            params: format!("xi={xi:.1}"),
            report: BoundReport::new(d.lower, d.exact),
        });
        out.push(SuiteEntry {
            lemma: "poisson_abs_mean_dev_closed_form",
            params: format!("xi={xi:.1}"),
            report: BoundReport::new((d.exact - d.summed).abs(), 1e-12),
        });
    }
    for k in 1..=170 {
        out.push(SuiteEntry {
            lemma: "robbins_stirling",
            params: format!("k={k}"),
            report: robbins_stirling(k).expect("k >= 1"),
        });
    }
    out
}
