//! Mutual information of equiprobable signalling over the AEN channel.
//!
//! Two schemes are covered. Coded modulation (CM) uses the symbol-wise
//! information
//!
//! ```text
//! I = E[ log2( M·p(y|x) / Σ_i p(y|x_i) ) ]
//! ```
//!
//! and bit-interleaved coded modulation (BICM) the sum of bit-level
//! informations under a labeling,
//!
//! ```text
//! I = m + E[ log2( Π_i Σ_{x∈S_{i,c_i}} p(y|x) / (Σ_{x∈S} p(y|x))^m ) ].
//! ```
//!
//! With `p(y|x) = γ·e^{−γ(y−x)}·u(y−x)`, every density that survives the
//! step shares the factor `e^{−γy}`. Once `y` falls between `x_k` and
//! `x_{k+1}`, the per-sample quantity only depends on `k` and on the
//! transmitted symbol. The Monte Carlo estimator exploits this with prefix
//! log-sum-exp tables, so a sample costs one binary search. The quadrature
//! oracle does not: it evaluates the log-sum-exp directly at every node.
//!
//! Monte Carlo runs are split into shards of [`SHARD_LEN`] samples. Shard
//! `s` draws from ChaCha8 stream `s` under the run seed, and shard moments
//! are merged in ascending shard order, so results do not depend on how
//! many worker threads execute the shards.

use std::f64::consts::LN_2;

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::channel::{noise_from_uniform, transition_log_density, ChannelParams};
use crate::constellation::Constellation;
use crate::error::{invalid, Result};
use crate::labeling::BitLabeling;
use crate::lse::{ln_add_exp, log_sum_exp};
use crate::quadrature::GaussLegendre;

/// Samples per shard.
pub const SHARD_LEN: u64 = 1 << 16;

/// Default Monte Carlo sample count per (constellation, SNR) point.
pub const DEFAULT_SAMPLES: u64 = 10_000_000;

/// Default Gauss–Legendre order.
pub const DEFAULT_NODES: usize = 512;

const MIN_NODES: usize = 16;

/// Tail probability below which a quadrature piece is dropped.
const NEGLIGIBLE_MASS: f64 = 1e-200;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Scheme {
    Cm,
    Bicm,
}

impl Scheme {
    pub fn as_str(self) -> &'static str {
        match self {
            Scheme::Cm => "cm",
            Scheme::Bicm => "bicm",
        }
    }
}

impl std::fmt::Display for Scheme {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    MonteCarlo,
    Quadrature,
    /// Closed-form reference values such as the capacity curve.
    ClosedForm,
}

impl Method {
    pub fn as_str(self) -> &'static str {
        match self {
            Method::MonteCarlo => "monte_carlo",
            Method::Quadrature => "quadrature",
            Method::ClosedForm => "closed_form",
        }
    }
}

/// A mutual information value in bits per channel use.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MiEstimate {
    pub value: f64,
    pub std_error: f64,
    /// Monte Carlo sample count; zero for deterministic methods.
    pub n_samples: u64,
    /// Monte Carlo seed; zero for deterministic methods.
    pub seed: u64,
    pub scheme: Scheme,
    pub method: Method,
}

/// How mutual information is evaluated.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "method")]
pub enum Estimator {
    MonteCarlo { n_samples: u64, seed: u64 },
    Quadrature { n_nodes: usize },
}

impl Estimator {
    pub fn estimate(
        &self,
        scheme: Scheme,
        cons: &Constellation,
        labeling: Option<&BitLabeling>,
        gamma: f64,
    ) -> Result<MiEstimate> {
        match (scheme, *self) {
            (Scheme::Cm, Estimator::MonteCarlo { n_samples, seed }) => {
                mi_cm_mc(cons, gamma, n_samples, seed)
            }
            (Scheme::Cm, Estimator::Quadrature { n_nodes }) => {
                mi_cm_quadrature(cons, gamma, n_nodes)
            }
            (Scheme::Bicm, est) => {
                let labeling =
                    labeling.ok_or_else(|| invalid("BICM estimation needs a bit labeling"))?;
                match est {
                    Estimator::MonteCarlo { n_samples, seed } => {
                        mi_bicm_mc(cons, labeling, gamma, n_samples, seed)
                    }
                    Estimator::Quadrature { n_nodes } => {
                        mi_bicm_quadrature(cons, labeling, gamma, n_nodes)
                    }
                }
            }
        }
    }
}

/// Running mean and centered second moment (Welford), mergeable in a fixed
/// order.
#[derive(Debug, Clone, Copy, Default)]
struct Moments {
    n: u64,
    mean: f64,
    m2: f64,
}

impl Moments {
    #[inline]
    fn push(&mut self, v: f64) {
        self.n += 1;
        let d = v - self.mean;
        self.mean += d / self.n as f64;
        self.m2 += d * (v - self.mean);
    }

    fn merge(self, other: Moments) -> Moments {
        if self.n == 0 {
            return other;
        }
        if other.n == 0 {
            return self;
        }
        let n = self.n + other.n;
        let d = other.mean - self.mean;
        let wa = self.n as f64 / n as f64;
        let wb = other.n as f64 / n as f64;
        Moments {
            n,
            mean: self.mean * wa + other.mean * wb,
            m2: self.m2 + other.m2 + d * d * (self.n as f64) * wb,
        }
    }

    fn std_error(&self) -> f64 {
        if self.n < 2 {
            return 0.0;
        }
        (self.m2 / (self.n - 1) as f64 / self.n as f64).sqrt()
    }
}

/// Uniform in `[0, 1)` from the top 53 bits.
#[inline]
fn unit_f64(r: u64) -> f64 {
    (r >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
}

/// Index in `0..m` by widening multiply; every sample consumes exactly two
/// words so equal seeds give the same noise stream for any `m`.
#[inline]
fn index_below(r: u64, m: usize) -> usize {
    ((r as u128 * m as u128) >> 64) as usize
}

/// Runs `n_samples` draws of `(symbol index, uniform variate)` through
/// `sample` and returns the merged moments.
fn run_sharded<F>(m: usize, n_samples: u64, seed: u64, sample: F) -> Moments
where
    F: Fn(usize, f64) -> f64 + Sync,
{
    let shards = n_samples.div_ceil(SHARD_LEN);
    let partial: Vec<Moments> = (0..shards)
        .into_par_iter()
        .map(|s| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(s);
            let len = SHARD_LEN.min(n_samples - s * SHARD_LEN);
            let mut acc = Moments::default();
            for _ in 0..len {
                let u = unit_f64(rng.next_u64());
                let j = index_below(rng.next_u64(), m);
                acc.push(sample(j, u));
            }
            acc
        })
        .collect();
    partial.into_iter().fold(Moments::default(), Moments::merge)
}

/// Largest `k ≥ j` with `x[k] ≤ y`.
#[inline]
fn segment_of(x: &[f64], j: usize, y: f64) -> usize {
    j + x[j + 1..].partition_point(|&v| v <= y)
}

/// `D_k = ln Σ_{i≤k} e^{−γ(x_k − x_i)}`.
fn prefix_table(x: &[f64], gamma: f64) -> Vec<f64> {
    let mut d = Vec::with_capacity(x.len());
    let mut cur = 0.0;
    d.push(cur);
    for w in x.windows(2) {
        cur = ln_add_exp(cur - gamma * (w[1] - w[0]), 0.0);
        d.push(cur);
    }
    d
}

struct CmKernel<'a> {
    x: &'a [f64],
    gamma: f64,
    noise_mean: f64,
    log2m: f64,
    prefix: Vec<f64>,
}

impl<'a> CmKernel<'a> {
    fn new(x: &'a [f64], gamma: f64) -> Self {
        CmKernel {
            x,
            gamma,
            noise_mean: 1.0 / gamma,
            log2m: (x.len() as f64).log2(),
            prefix: prefix_table(x, gamma),
        }
    }

    #[inline]
    fn sample(&self, j: usize, u: f64) -> f64 {
        let y = self.x[j] + noise_from_uniform(u, self.noise_mean);
        let k = segment_of(self.x, j, y);
        self.log2m + (-(self.gamma * (self.x[k] - self.x[j])) - self.prefix[k]) / LN_2
    }
}

struct BicmKernel<'a> {
    x: &'a [f64],
    noise_mean: f64,
    bits: usize,
    prefix: Vec<f64>,
    /// `[k][position][bit]`: `ln Σ_{l≤k, bit(l)=b} e^{−γ(x_k − x_l)}`.
    subset: Vec<f64>,
    labeling: &'a BitLabeling,
}

impl<'a> BicmKernel<'a> {
    fn new(x: &'a [f64], labeling: &'a BitLabeling, gamma: f64) -> Self {
        let m = x.len();
        let bits = labeling.bits();
        let mut subset = vec![f64::NEG_INFINITY; m * bits * 2];
        let mut cur = vec![f64::NEG_INFINITY; bits * 2];
        for k in 0..m {
            let step = if k == 0 {
                0.0
            } else {
                gamma * (x[k] - x[k - 1])
            };
            for (slot, c) in cur.iter_mut().enumerate() {
                *c -= step;
                let (pos, b) = (slot / 2, (slot % 2) as u8);
                if labeling.bit(k, pos) == b {
                    *c = ln_add_exp(*c, 0.0);
                }
            }
            subset[k * bits * 2..(k + 1) * bits * 2].copy_from_slice(&cur);
        }
        BicmKernel {
            x,
            noise_mean: 1.0 / gamma,
            bits,
            prefix: prefix_table(x, gamma),
            subset,
            labeling,
        }
    }

    #[inline]
    fn sample(&self, j: usize, u: f64) -> f64 {
        let y = self.x[j] + noise_from_uniform(u, self.noise_mean);
        let k = segment_of(self.x, j, y);
        let row = &self.subset[k * self.bits * 2..(k + 1) * self.bits * 2];
        let mut acc = 0.0;
        for pos in 0..self.bits {
            let s = row[pos * 2 + self.labeling.bit(j, pos) as usize];
            debug_assert!(s.is_finite(), "empty bit subset at k={k}, position {pos}");
            acc += s - self.prefix[k];
        }
        self.bits as f64 + acc / LN_2
    }
}

fn check_gamma(gamma: f64) -> Result<()> {
    ChannelParams::new(gamma).map(|_| ())
}

fn check_samples(n_samples: u64) -> Result<()> {
    if n_samples == 0 {
        return Err(invalid("n_samples must be at least 1"));
    }
    Ok(())
}

fn check_nodes(n_nodes: usize) -> Result<()> {
    if n_nodes < MIN_NODES {
        return Err(invalid(format!(
            "quadrature needs at least {MIN_NODES} nodes, got {n_nodes}"
        )));
    }
    Ok(())
}

fn bicm_inputs<'a>(cons: &'a Constellation, labeling: &BitLabeling) -> Result<&'a [f64]> {
    cons.validate()?;
    if cons.bits().is_none() {
        return Err(invalid(format!(
            "BICM needs M to be a power of two, got {}",
            cons.len()
        )));
    }
    labeling.check_matches(cons.len())?;
    Ok(cons.symbols())
}

/// Monte Carlo CM mutual information.
pub fn mi_cm_mc(cons: &Constellation, gamma: f64, n_samples: u64, seed: u64) -> Result<MiEstimate> {
    cons.validate()?;
    cm_mc_symbols(cons.symbols(), gamma, n_samples, seed)
}

pub(crate) fn cm_mc_symbols(
    x: &[f64],
    gamma: f64,
    n_samples: u64,
    seed: u64,
) -> Result<MiEstimate> {
    check_gamma(gamma)?;
    check_samples(n_samples)?;
    let kernel = CmKernel::new(x, gamma);
    let mom = run_sharded(x.len(), n_samples, seed, |j, u| kernel.sample(j, u));
    Ok(MiEstimate {
        value: mom.mean,
        std_error: mom.std_error(),
        n_samples,
        seed,
        scheme: Scheme::Cm,
        method: Method::MonteCarlo,
    })
}

/// Monte Carlo BICM mutual information under `labeling`.
pub fn mi_bicm_mc(
    cons: &Constellation,
    labeling: &BitLabeling,
    gamma: f64,
    n_samples: u64,
    seed: u64,
) -> Result<MiEstimate> {
    let x = bicm_inputs(cons, labeling)?;
    check_gamma(gamma)?;
    check_samples(n_samples)?;
    let kernel = BicmKernel::new(x, labeling, gamma);
    let mom = run_sharded(x.len(), n_samples, seed, |j, u| kernel.sample(j, u));
    Ok(MiEstimate {
        value: mom.mean,
        std_error: mom.std_error(),
        n_samples,
        seed,
        scheme: Scheme::Bicm,
        method: Method::MonteCarlo,
    })
}

/// The CM log2 term at output `y` for transmitted symbol `j`, evaluated
/// directly from the transition densities.
pub fn cm_term_direct(x: &[f64], gamma: f64, j: usize, y: f64) -> Result<f64> {
    let terms: Vec<f64> = x
        .iter()
        .map(|&xi| transition_log_density(y, xi, gamma))
        .collect();
    let num = transition_log_density(y, x[j], gamma);
    Ok((x.len() as f64).log2() + (num - log_sum_exp(&terms)?) / LN_2)
}

/// The BICM log2 term at output `y` for transmitted symbol `j`, evaluated
/// directly. Fails if a bit subset has no support at `y`.
pub fn bicm_term_direct(
    x: &[f64],
    labeling: &BitLabeling,
    gamma: f64,
    j: usize,
    y: f64,
) -> Result<f64> {
    let bits = labeling.bits();
    let terms: Vec<f64> = x
        .iter()
        .map(|&xi| transition_log_density(y, xi, gamma))
        .collect();
    let all = log_sum_exp(&terms)?;
    let mut acc = 0.0;
    let mut sub = Vec::with_capacity(x.len());
    for pos in 0..bits {
        let c = labeling.bit(j, pos);
        sub.clear();
        sub.extend(
            terms
                .iter()
                .enumerate()
                .filter(|(l, _)| labeling.bit(*l, pos) == c)
                .map(|(_, &t)| t),
        );
        acc += log_sum_exp(&sub)?;
    }
    Ok(bits as f64 + (acc - bits as f64 * all) / LN_2)
}

/// `(1/M) Σ_j ∫_0^1 h_j(v) dv`, with `v = e^{−γn}` the tail probability of
/// the noise. The unit interval is split where `y = x_j + n` crosses a
/// symbol, since the integrand jumps there; each piece gets an `n_nodes`
/// Gauss–Legendre rule.
fn quadrature_average<H>(x: &[f64], gamma: f64, n_nodes: usize, term: H) -> Result<f64>
where
    H: Fn(usize, f64) -> Result<f64> + Sync,
{
    let rule = GaussLegendre::new(n_nodes);
    let m = x.len();
    let per_symbol: Vec<Result<f64>> = (0..m)
        .into_par_iter()
        .map(|j| {
            let mut total = 0.0;
            for k in j..m {
                let upper = (-gamma * (x[k] - x[j])).exp();
                let lower = if k + 1 < m {
                    (-gamma * (x[k + 1] - x[j])).exp()
                } else {
                    0.0
                };
                // the integrand is O(γ·x_M), so such pieces are far below
                // double precision of the total
                if upper <= lower || upper < NEGLIGIBLE_MASS {
                    continue;
                }
                let half = 0.5 * (upper - lower);
                let mid = 0.5 * (upper + lower);
                let mut piece = 0.0;
                for (t, w) in rule.nodes().iter().zip(rule.weights()) {
                    let v = mid + half * t;
                    let y = x[j] - v.ln() / gamma;
                    piece += w * term(j, y)?;
                }
                total += piece * half;
            }
            Ok(total)
        })
        .collect();
    let mut acc = 0.0;
    for r in per_symbol {
        acc += r?;
    }
    Ok(acc / m as f64)
}

/// Deterministic CM mutual information by piecewise Gauss–Legendre.
pub fn mi_cm_quadrature(cons: &Constellation, gamma: f64, n_nodes: usize) -> Result<MiEstimate> {
    cons.validate()?;
    check_gamma(gamma)?;
    check_nodes(n_nodes)?;
    let x = cons.symbols();
    let value = quadrature_average(x, gamma, n_nodes, |j, y| cm_term_direct(x, gamma, j, y))?;
    Ok(MiEstimate {
        value,
        std_error: 0.0,
        n_samples: 0,
        seed: 0,
        scheme: Scheme::Cm,
        method: Method::Quadrature,
    })
}

/// Deterministic BICM mutual information by piecewise Gauss–Legendre.
pub fn mi_bicm_quadrature(
    cons: &Constellation,
    labeling: &BitLabeling,
    gamma: f64,
    n_nodes: usize,
) -> Result<MiEstimate> {
    let x = bicm_inputs(cons, labeling)?;
    check_gamma(gamma)?;
    check_nodes(n_nodes)?;
    let value = quadrature_average(x, gamma, n_nodes, |j, y| {
        bicm_term_direct(x, labeling, gamma, j, y)
    })?;
    Ok(MiEstimate {
        value,
        std_error: 0.0,
        n_samples: 0,
        seed: 0,
        scheme: Scheme::Bicm,
        method: Method::Quadrature,
    })
}
