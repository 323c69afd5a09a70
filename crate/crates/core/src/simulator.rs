//! Monte Carlo codebook simulator at desk scale.
//!
//! Random codebooks are drawn from a counter-based generator keyed by
//! (master seed, replica, codeword), so every replica is reproducible and
//! independent of evaluation order. The total-variation distance between
//! the induced output law and the reference output law is computed exactly
//! by summing over all `|Y|^n` output sequences.

use crate::error::{Error, Result};
use crate::measures::{Channel, Distribution, LogBase};
use crate::typespace::TypeDescriptor;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution as _, Poisson};
use rayon::prelude::*;

/// Hard ceiling on `|Y|^n` for a single exact TV evaluation.
pub const MAX_OUTPUT_SEQUENCES: usize = 1 << 24;
/// Desk-scale envelope enforced by [`estimate_exponent`].
pub const MAX_N: u32 = 14;
pub const MAX_ENVELOPE_OUTPUTS: usize = 16_384;
pub const MAX_M: u64 = 20_000;
pub const MAX_REPLICAS: usize = 500;

/// Random-coding ensemble.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum CodebookKind {
    Iid,
    ConstantComposition,
}

impl std::str::FromStr for CodebookKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "iid" => Ok(CodebookKind::Iid),
            "cc" | "constant-composition" | "constant_composition" => {
                Ok(CodebookKind::ConstantComposition)
            }
            other => Err(Error::Domain(format!(
                "unknown codebook kind `{other}` (expected iid or cc)"
            ))),
        }
    }
}

impl CodebookKind {
    pub fn name(self) -> &'static str {
        match self {
            CodebookKind::Iid => "iid",
            CodebookKind::ConstantComposition => "cc",
        }
    }
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Seed of replica `replica` under `master`.
pub fn replica_seed(master: u64, replica: u64) -> u64 {
    splitmix64(master ^ splitmix64(replica.wrapping_add(0x5151_5151)))
}

/// Generator for stream `stream` under `seed`: the key comes from `seed`,
/// the ChaCha stream id selects the codeword.
pub fn stream_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut key = [0u8; 32];
    let mut s = seed;
    for chunk in key.chunks_mut(8) {
        s = splitmix64(s);
        chunk.copy_from_slice(&s.to_le_bytes());
    }
    let mut rng = ChaCha8Rng::from_seed(key);
    rng.set_stream(stream);
    rng
}

/// `M` codewords of length `n`, stored row-major as symbol indices.
#[derive(Debug, Clone, PartialEq)]
pub struct Codebook {
    symbols: Vec<u8>,
    pub n: usize,
    pub m: usize,
    pub kind: CodebookKind,
    pub seed: u64,
}

impl Codebook {
    /// Builds a codebook from explicit codewords.
    pub fn from_codewords(codewords: Vec<Vec<u8>>, kind: CodebookKind) -> Result<Self> {
        let m = codewords.len();
        let n = codewords.first().map_or(0, Vec::len);
        if m == 0 || n == 0 || codewords.iter().any(|c| c.len() != n) {
            return Err(Error::Dimension(
                "codewords must be nonempty and of equal length".into(),
            ));
        }
        Ok(Self {
            symbols: codewords.into_iter().flatten().collect(),
            n,
            m,
            kind,
            seed: 0,
        })
    }

    pub fn codeword(&self, j: usize) -> &[u8] {
        &self.symbols[j * self.n..(j + 1) * self.n]
    }

    pub fn codewords(&self) -> impl Iterator<Item = &[u8]> {
        self.symbols.chunks(self.n)
    }
}

/// Draws a codebook. `iid`: every symbol independently from `p`.
/// `constant_composition`: every codeword a uniform permutation of the
/// multiset whose counts are `n p`, which requires `n p` to be integral.
pub fn sample_codebook(
    p: &Distribution<f64>,
    n: usize,
    m: usize,
    kind: CodebookKind,
    seed: u64,
) -> Result<Codebook> {
    if m < 1 || n < 1 {
        return Err(Error::Domain(format!(
            "need n >= 1 and M >= 1, got n={n}, M={m}"
        )));
    }
    if p.len() > u8::MAX as usize {
        return Err(Error::Size("input alphabet larger than 255".into()));
    }
    let mut symbols = Vec::with_capacity(n * m);
    match kind {
        CodebookKind::Iid => {
            let cdf: Vec<f64> = p
                .probs()
                .iter()
                .scan(0.0, |acc, &v| {
                    *acc += v;
                    Some(*acc)
                })
                .collect();
            let last = (0..p.len()).rev().find(|&x| p.get(x) > 0.0).unwrap_or(0);
            for j in 0..m {
                let mut rng = stream_rng(seed, j as u64);
                for _ in 0..n {
                    let u: f64 = rng.random();
                    let x = cdf.iter().position(|&c| u < c).unwrap_or(last);
                    symbols.push(x.min(last) as u8);
                }
            }
        }
        CodebookKind::ConstantComposition => {
            let t = TypeDescriptor::from_distribution(p, n as u32).map_err(|_| {
                Error::Constraint(format!(
                    "n = {n} is not a multiple of the composition denominator"
                ))
            })?;
            let base: Vec<u8> = t
                .counts()
                .iter()
                .enumerate()
                .flat_map(|(x, &c)| std::iter::repeat_n(x as u8, c as usize))
                .collect();
            for j in 0..m {
                let mut rng = stream_rng(seed, j as u64);
                let mut word = base.clone();
                word.shuffle(&mut rng);
                symbols.extend_from_slice(&word);
            }
        }
    }
    Ok(Codebook {
        symbols,
        n,
        m,
        kind,
        seed,
    })
}

fn output_count(ny: usize, n: usize) -> Result<usize> {
    let mut total: usize = 1;
    for _ in 0..n {
        total = total
            .checked_mul(ny)
            .filter(|&t| t <= MAX_OUTPUT_SEQUENCES)
            .ok_or_else(|| {
                Error::Size(format!("|Y|^n = {ny}^{n} exceeds {MAX_OUTPUT_SEQUENCES}"))
            })?;
    }
    Ok(total)
}

/// The law the induced output is compared against: `P_Y^n` for i.i.d.
/// codebooks, and for constant-composition codebooks the output law of a
/// uniform input on the type class.
#[derive(Debug, Clone)]
pub struct ReferenceLaw {
    pub probs: Vec<f64>,
    pub n: usize,
    pub kind: CodebookKind,
}

impl ReferenceLaw {
    pub fn new(
        p: &Distribution<f64>,
        w: &Channel<f64>,
        n: usize,
        kind: CodebookKind,
    ) -> Result<Self> {
        let ny = w.output_size();
        let total = output_count(ny, n)?;
        let probs = match kind {
            CodebookKind::Iid => {
                let py = w.output(p)?;
                (0..total)
                    .map(|mut idx| {
                        let mut v = 1.0;
                        for _ in 0..n {
                            v *= py.get(idx % ny);
                            idx /= ny;
                        }
                        v
                    })
                    .collect()
            }
            CodebookKind::ConstantComposition => {
                let t = TypeDescriptor::from_distribution(p, n as u32)?;
                let words = type_class(t.counts(), n)?;
                let cb = Codebook::from_codewords(words, kind)?;
                induced_output(&cb, w)?
            }
        };
        Ok(Self { probs, n, kind })
    }
}

/// All sequences with the given symbol counts, lexicographically.
fn type_class(counts: &[u32], n: usize) -> Result<Vec<Vec<u8>>> {
    let size = crate::typespace::log_type_class_size(&TypeDescriptor::new(counts.to_vec())?).exp();
    if size > 2e5 {
        return Err(Error::Size(format!(
            "type class of size {size:.0} is too large to enumerate"
        )));
    }
    let mut out = Vec::new();
    let mut word = Vec::with_capacity(n);
    let mut left = counts.to_vec();
    fn rec(left: &mut [u32], word: &mut Vec<u8>, n: usize, out: &mut Vec<Vec<u8>>) {
        if word.len() == n {
            out.push(word.clone());
            return;
        }
        for x in 0..left.len() {
            if left[x] > 0 {
                left[x] -= 1;
                word.push(x as u8);
                rec(left, word, n, out);
                word.pop();
                left[x] += 1;
            }
        }
    }
    rec(&mut left, &mut word, n, &mut out);
    Ok(out)
}

/// Induced output law `P_{Y^n|C}(y^n)` for every `y^n`, indexed with the
/// first symbol least significant. Likelihoods share prefix products along
/// a depth-first walk over output sequences.
pub fn induced_output(cb: &Codebook, w: &Channel<f64>) -> Result<Vec<f64>> {
    let (n, m, ny) = (cb.n, cb.m, w.output_size());
    let total = output_count(ny, n)?;
    if cb.symbols.iter().any(|&x| x as usize >= w.input_size()) {
        return Err(Error::Dimension(
            "codeword symbol outside channel input alphabet".into(),
        ));
    }
    // Column-major symbols: position i holds all M codeword symbols.
    let by_pos: Vec<Vec<usize>> = (0..n)
        .map(|i| (0..m).map(|j| cb.symbols[j * n + i] as usize).collect())
        .collect();
    let mut partial = vec![vec![1.0f64; m]; n + 1];
    let mut digits = vec![0usize; n];
    let mut out = vec![0.0; total];
    let inv_m = 1.0 / m as f64;
    // Positions 0..depth of `partial` are valid for the current digit prefix.
    let mut depth = 0usize;
    loop {
        while depth < n {
            let (lo, hi) = partial.split_at_mut(depth + 1);
            let y = digits[depth];
            for ((dst, &src), &x) in hi[0].iter_mut().zip(&lo[depth]).zip(&by_pos[depth]) {
                *dst = src * w.prob(x, y);
            }
            depth += 1;
        }
        let idx = digits.iter().rev().fold(0usize, |acc, &d| acc * ny + d);
        out[idx] = partial[n].iter().sum::<f64>() * inv_m;
        // Advance the odometer from the last position.
        let mut i = n;
        loop {
            if i == 0 {
                return Ok(out);
            }
            i -= 1;
            digits[i] += 1;
            if digits[i] < ny {
                break;
            }
            digits[i] = 0;
        }
        depth = i;
    }
}

/// One exact total-variation evaluation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TvSample {
    pub tv: f64,
    pub codebook_seed: u64,
    pub n: usize,
    pub m: usize,
}

/// `sum_{y^n} |P_{Y^n|C}(y^n) - reference(y^n)|` against a precomputed reference.
pub fn exact_tv_with(
    cb: &Codebook,
    w: &Channel<f64>,
    reference: &ReferenceLaw,
) -> Result<TvSample> {
    if reference.n != cb.n {
        return Err(Error::Dimension(
            "reference law has a different block length".into(),
        ));
    }
    let induced = induced_output(cb, w)?;
    let tv = induced
        .iter()
        .zip(&reference.probs)
        .map(|(a, b)| (a - b).abs())
        .sum::<f64>();
    Ok(TvSample {
        tv: tv.clamp(0.0, 2.0),
        codebook_seed: cb.seed,
        n: cb.n,
        m: cb.m,
    })
}

/// Exact total variation between the induced output law and the reference
/// law of the codebook's ensemble. For a degenerate channel the two laws
/// coincide and the result is exactly zero.
pub fn exact_tv(cb: &Codebook, w: &Channel<f64>, p: &Distribution<f64>) -> Result<TvSample> {
    output_count(w.output_size(), cb.n)?;
    if w.is_degenerate(p)? {
        return Ok(TvSample {
            tv: 0.0,
            codebook_seed: cb.seed,
            n: cb.n,
            m: cb.m,
        });
    }
    let reference = ReferenceLaw::new(p, w, cb.n, cb.kind)?;
    exact_tv_with(cb, w, &reference)
}

/// `L(y^n) = P_{Y^n|C}(y^n) / P_Y^n(y^n)`, or 1 where `P_Y^n(y^n) = 0`.
/// Each likelihood is evaluated from the joint symbol-pair counts of
/// `(x^n, y^n)`.
pub fn l_statistic(
    cb: &Codebook,
    w: &Channel<f64>,
    p: &Distribution<f64>,
    y: &[usize],
) -> Result<f64> {
    if y.len() != cb.n {
        return Err(Error::Dimension(
            "output sequence length differs from n".into(),
        ));
    }
    let (nx, ny) = (w.input_size(), w.output_size());
    if y.iter().any(|&b| b >= ny) {
        return Err(Error::Dimension("output symbol outside alphabet".into()));
    }
    let py = w.output(p)?;
    let denom: f64 = y.iter().map(|&b| py.get(b)).product();
    if denom <= 0.0 {
        return Ok(1.0);
    }
    let mut counts = vec![0i32; nx * ny];
    let mut sum = 0.0;
    for word in cb.codewords() {
        counts.iter_mut().for_each(|c| *c = 0);
        for (&a, &b) in word.iter().zip(y) {
            counts[a as usize * ny + b] += 1;
        }
        let lik: f64 = counts
            .iter()
            .enumerate()
            .filter(|(_, &c)| c > 0)
            .map(|(k, &c)| w.prob(k / ny, k % ny).powi(c))
            .product();
        sum += lik;
    }
    Ok(sum / cb.m as f64 / denom)
}

/// Parameters of a Monte Carlo run.
#[derive(Debug, Clone, PartialEq)]
pub struct SimConfig {
    pub n: usize,
    /// Rate in units of `base`.
    pub rate: f64,
    pub base: LogBase,
    pub replicas: usize,
    pub seed: u64,
    pub kind: CodebookKind,
    /// Draw the codebook size from a Poisson law with mean `b^{nR}`.
    pub poisson: bool,
}

impl SimConfig {
    /// `M = ⌈b^{nR}⌉`.
    pub fn codebook_size(&self) -> u64 {
        self.mean_size().ceil() as u64
    }

    /// `b^{nR}`.
    pub fn mean_size(&self) -> f64 {
        self.base.pow(self.n as f64 * self.rate)
    }
}

/// Summary of a Monte Carlo run.
#[derive(Debug, Clone, PartialEq)]
pub struct ExponentEstimate {
    pub n: usize,
    /// Codebook size (the Poisson mean, rounded up, for Poissonized runs).
    pub m: u64,
    pub replicas: usize,
    pub mean_tv: f64,
    pub std_tv: f64,
    pub std_error: f64,
    /// `-(1/n) log_b mean_tv`; infinite when `mean_tv = 0`.
    pub empirical_exponent: f64,
    pub ci95_low: f64,
    pub ci95_high: f64,
    pub base: LogBase,
}

/// Full record of a run: per-replica samples and codebook sizes plus the summary.
#[derive(Debug, Clone)]
pub struct SimulationRun {
    pub config: SimConfig,
    pub samples: Vec<TvSample>,
    pub estimate: ExponentEstimate,
}

/// Fixed-order pairwise summation.
fn pairwise_sum(v: &[f64]) -> f64 {
    if v.len() <= 8 {
        return v.iter().sum();
    }
    let (a, b) = v.split_at(v.len() / 2);
    pairwise_sum(a) + pairwise_sum(b)
}

fn check_envelope(cfg: &SimConfig, w: &Channel<f64>) -> Result<()> {
    if cfg.n == 0 || cfg.n as u32 > MAX_N {
        return Err(Error::Size(format!("n = {} outside 1..={MAX_N}", cfg.n)));
    }
    let outputs = output_count(w.output_size(), cfg.n)?;
    if outputs > MAX_ENVELOPE_OUTPUTS {
        return Err(Error::Size(format!(
            "|Y|^n = {outputs} exceeds {MAX_ENVELOPE_OUTPUTS}"
        )));
    }
    if !(cfg.rate > 0.0) {
        return Err(Error::Domain(format!(
            "rate must be positive, got {}",
            cfg.rate
        )));
    }
    let mean = cfg.mean_size();
    let cap = if cfg.poisson {
        mean + 10.0 * mean.sqrt() + 10.0
    } else {
        mean
    };
    if cap.ceil() > MAX_M as f64 {
        return Err(Error::Size(format!(
            "codebook size {:.0} exceeds {MAX_M}",
            cap.ceil()
        )));
    }
    if cfg.replicas < 2 || cfg.replicas > MAX_REPLICAS {
        return Err(Error::Size(format!(
            "replicas = {} outside 2..={MAX_REPLICAS}",
            cfg.replicas
        )));
    }
    Ok(())
}

/// Summarizes per-replica samples into an [`ExponentEstimate`].
pub fn summarize(samples: &[TvSample], n: usize, m: u64, base: LogBase) -> ExponentEstimate {
    let k = samples.len();
    let tvs: Vec<f64> = samples.iter().map(|s| s.tv).collect();
    let mean = pairwise_sum(&tvs) / k as f64;
    let dev: Vec<f64> = tvs.iter().map(|t| (t - mean) * (t - mean)).collect();
    let var = if k > 1 {
        pairwise_sum(&dev) / (k - 1) as f64
    } else {
        0.0
    };
    let std = var.sqrt();
    let se = std / (k as f64).sqrt();
    let exponent = |v: f64| {
        if v > 0.0 {
            -base.from_nats(v.ln()) / n as f64
        } else {
            f64::INFINITY
        }
    };
    ExponentEstimate {
        n,
        m,
        replicas: k,
        mean_tv: mean,
        std_tv: std,
        std_error: se,
        empirical_exponent: exponent(mean),
        ci95_low: exponent(mean + 1.96 * se),
        ci95_high: exponent(mean - 1.96 * se),
        base,
    }
}

/// Runs replicas with explicitly given codebook seeds; duplicate seeds are
/// rejected because they would silently correlate replicas.
pub fn run_with_seeds(
    p: &Distribution<f64>,
    w: &Channel<f64>,
    cfg: &SimConfig,
    seeds: &[u64],
) -> Result<SimulationRun> {
    check_envelope(cfg, w)?;
    let mut sorted = seeds.to_vec();
    sorted.sort_unstable();
    if sorted.windows(2).any(|s| s[0] == s[1]) {
        return Err(Error::Domain("replica seeds collide".into()));
    }
    if seeds.len() != cfg.replicas {
        return Err(Error::Domain("one seed per replica is required".into()));
    }
    let degenerate = w.is_degenerate(p)?;
    let reference = if degenerate {
        None
    } else {
        Some(ReferenceLaw::new(p, w, cfg.n, cfg.kind)?)
    };
    let fixed_m = cfg.codebook_size();
    let mean_m = cfg.mean_size();
    let samples = seeds
        .par_iter()
        .map(|&s| {
            let m = if cfg.poisson {
                let mut rng = stream_rng(s, u64::MAX);
                Poisson::new(mean_m)
                    .map_err(|e| Error::Domain(format!("poisson mean: {e}")))?
                    .sample(&mut rng) as u64
            } else {
                fixed_m
            };
            if m == 0 {
                // No codewords: the induced measure is zero, at distance 1 from any law.
                return Ok(TvSample {
                    tv: if degenerate { 0.0 } else { 1.0 },
                    codebook_seed: s,
                    n: cfg.n,
                    m: 0,
                });
            }
            let cb = sample_codebook(p, cfg.n, m as usize, cfg.kind, s)?;
            match &reference {
                Some(r) => exact_tv_with(&cb, w, r),
                None => Ok(TvSample {
                    tv: 0.0,
                    codebook_seed: s,
                    n: cfg.n,
                    m: m as usize,
                }),
            }
        })
        .collect::<Result<Vec<_>>>()?;
    let estimate = summarize(&samples, cfg.n, fixed_m, cfg.base);
    Ok(SimulationRun {
        config: cfg.clone(),
        samples,
        estimate,
    })
}

/// Mean exact TV over independently seeded codebooks of size `⌈b^{nR}⌉`
/// (or Poisson sized when `cfg.poisson`).
pub fn estimate_exponent(
    p: &Distribution<f64>,
    w: &Channel<f64>,
    cfg: &SimConfig,
) -> Result<SimulationRun> {
    let seeds: Vec<u64> = (0..cfg.replicas as u64)
        .map(|r| replica_seed(cfg.seed, r))
        .collect();
    run_with_seeds(p, w, cfg, &seeds)
}

/// [`estimate_exponent`] with Poisson-distributed codebook sizes.
pub fn poissonized_estimate(
    p: &Distribution<f64>,
    w: &Channel<f64>,
    cfg: &SimConfig,
) -> Result<SimulationRun> {
    let mut c = cfg.clone();
    c.poisson = true;
    estimate_exponent(p, w, &c)
}

/// One row of a concentration table.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConcentrationRow {
    pub t: f64,
    /// Fraction of replicas with `|tv - mean| >= t`.
    pub fraction: f64,
    /// `2 exp(-M t²/2)`.
    pub bound: f64,
    /// Three binomial standard errors of the bound plus one replica.
    pub sampling_slack: f64,
    pub holds: bool,
}

/// Tabulates empirical deviation frequencies against the McDiarmid bound.
pub fn concentration_table(samples: &[TvSample], m: u64, t_grid: &[f64]) -> Vec<ConcentrationRow> {
    let k = samples.len() as f64;
    let tvs: Vec<f64> = samples.iter().map(|s| s.tv).collect();
    let mean = pairwise_sum(&tvs) / k;
    t_grid
        .iter()
        .map(|&t| {
            let hits = tvs.iter().filter(|&&v| (v - mean).abs() >= t).count() as f64;
            let fraction = hits / k;
            let bound = crate::bounds::mcdiarmid_bound(m as f64, t);
            let b = bound.min(1.0);
            let sampling_slack = 3.0 * (b * (1.0 - b) / k).sqrt() + 1.0 / k;
            ConcentrationRow {
                t,
                fraction,
                bound,
                sampling_slack,
                holds: fraction <= bound + sampling_slack,
            }
        })
        .collect()
}

/// Runs a fixed-size experiment and checks the McDiarmid bound at each `t`.
pub fn concentration_check(
    p: &Distribution<f64>,
    w: &Channel<f64>,
    cfg: &SimConfig,
    t_grid: &[f64],
) -> Result<(SimulationRun, Vec<ConcentrationRow>)> {
    if cfg.replicas < 100 {
        return Err(Error::Domain(
            "concentration checks need at least 100 replicas".into(),
        ));
    }
    let mut c = cfg.clone();
    c.poisson = false;
    let run = estimate_exponent(p, w, &c)?;
    let rows = concentration_table(&run.samples, c.codebook_size(), t_grid);
    Ok((run, rows))
}
