//! Approximate Dirichlet process draws.
//!
//! A draw from `DP(a, H)` is approximated by the finite series
//! `P_N = Σ J_i δ_{Y_i}`: `Y_i` i.i.d. from `H`, and weights proportional to
//! gamma(a/N, 1) co-quantiles evaluated at `Γ_i / Γ_{N+1}`, where `Γ_i` are
//! partial sums of unit exponentials. The weights are monotonically
//! decreasing in `i`.

use rand::Rng;
use rand_distr::Exp1;

use crate::dist::ContinuousDistribution;
use crate::error::{Error, Result};
use crate::special::GammaCoQuantile;

/// Default truncation level of the finite series.
pub const DEFAULT_TRUNCATION: usize = 1000;

/// A finitely supported probability measure with strictly increasing atoms.
#[derive(Debug, Clone, PartialEq)]
pub struct DiscreteMeasure {
    atoms: Vec<f64>,
    weights: Vec<f64>,
}

impl DiscreteMeasure {
    /// Builds a measure from unsorted atoms and nonnegative weights.
    ///
    /// Weights are normalized, atoms sorted, and equal atoms merged by
    /// summing their weights.
    pub fn new(atoms: Vec<f64>, weights: Vec<f64>) -> Result<Self> {
        if atoms.len() != weights.len() {
            return Err(Error::domain(format!(
                "{} atoms but {} weights",
                atoms.len(),
                weights.len()
            )));
        }
        if atoms.is_empty() {
            return Err(Error::domain("a discrete measure needs at least one atom"));
        }
        if atoms.iter().any(|a| !a.is_finite()) {
            return Err(Error::domain("atoms must be finite"));
        }
        if weights.iter().any(|w| !(*w >= 0.0 && w.is_finite())) {
            return Err(Error::domain("weights must be nonnegative and finite"));
        }
        let total: f64 = weights.iter().sum();
        if total <= 0.0 {
            return Err(Error::domain("weights sum to zero"));
        }

        let mut pairs: Vec<(f64, f64)> = atoms.into_iter().zip(weights).collect();
        pairs.sort_by(|a, b| a.0.total_cmp(&b.0));

        let mut atoms = Vec::with_capacity(pairs.len());
        let mut weights: Vec<f64> = Vec::with_capacity(pairs.len());
        for (y, w) in pairs {
            match atoms.last() {
                Some(&last) if last == y => *weights.last_mut().unwrap() += w / total,
                _ => {
                    atoms.push(y);
                    weights.push(w / total);
                }
            }
        }
        Ok(Self { atoms, weights })
    }

    /// Sorted, distinct atom locations.
    pub fn atoms(&self) -> &[f64] {
        &self.atoms
    }

    /// Weights aligned with [`atoms`](Self::atoms).
    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn len(&self) -> usize {
        self.atoms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.atoms.is_empty()
    }

    /// Right-continuous cdf of the measure.
    pub fn cdf(&self, x: f64) -> f64 {
        let k = self.atoms.partition_point(|&a| a <= x);
        self.weights[..k].iter().sum::<f64>().min(1.0)
    }
}

/// The centre of a Dirichlet process.
#[derive(Debug, Clone, PartialEq)]
pub enum BaseMeasure {
    Continuous(ContinuousDistribution),
    /// `prior_weight * H + (1 - prior_weight) * F_n`, the conjugate posterior
    /// base.
    PosteriorMixture {
        prior_weight: f64,
        prior: ContinuousDistribution,
        data: Vec<f64>,
    },
}

impl BaseMeasure {
    fn validate(&self) -> Result<()> {
        if let BaseMeasure::PosteriorMixture {
            prior_weight, data, ..
        } = self
        {
            if !(0.0..=1.0).contains(prior_weight) {
                return Err(Error::domain(format!(
                    "mixture prior weight must lie in [0, 1], got {prior_weight}"
                )));
            }
            if data.is_empty() {
                return Err(Error::NoData);
            }
        }
        Ok(())
    }
}

/// One draw from the base measure.
pub fn sample_base<R: Rng + ?Sized>(base: &BaseMeasure, rng: &mut R) -> f64 {
    match base {
        BaseMeasure::Continuous(h) => h.sample(rng),
        BaseMeasure::PosteriorMixture {
            prior_weight,
            prior,
            data,
        } => {
            if rng.random::<f64>() < *prior_weight {
                prior.sample(rng)
            } else {
                data[rng.random_range(0..data.len())]
            }
        }
    }
}

/// Concentration, base and truncation level of an approximate DP.
#[derive(Debug, Clone, PartialEq)]
pub struct DpParams {
    pub concentration: f64,
    pub base: BaseMeasure,
    pub truncation: usize,
}

impl DpParams {
    pub fn new(concentration: f64, base: BaseMeasure, truncation: usize) -> Result<Self> {
        let params = Self {
            concentration,
            base,
            truncation,
        };
        params.validate()?;
        Ok(params)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.concentration > 0.0 && self.concentration.is_finite()) {
            return Err(Error::domain(format!(
                "concentration must be positive, got {}",
                self.concentration
            )));
        }
        if self.truncation == 0 {
            return Err(Error::domain("truncation level must be at least 1"));
        }
        self.base.validate()
    }
}

/// Conjugate update: `DP(a, H)` and data `x_1..x_n` give
/// `DP(a + n, a/(a+n) H + n/(a+n) F_n)`.
///
/// The prior base must be continuous.
pub fn posterior_params(prior: &DpParams, data: &[f64]) -> Result<DpParams> {
    if data.is_empty() {
        return Err(Error::NoData);
    }
    if data.iter().any(|x| !x.is_finite()) {
        return Err(Error::domain("data must be finite"));
    }
    let h = match &prior.base {
        BaseMeasure::Continuous(h) => *h,
        BaseMeasure::PosteriorMixture { .. } => {
            return Err(Error::domain(
                "posterior update needs a continuous prior base",
            ))
        }
    };
    let a = prior.concentration;
    let n = data.len() as f64;
    let mut sorted = data.to_vec();
    sorted.sort_by(f64::total_cmp);
    DpParams::new(
        a + n,
        BaseMeasure::PosteriorMixture {
            prior_weight: a / (a + n),
            prior: h,
            data: sorted,
        },
        prior.truncation,
    )
}

/// Draws one approximate realization of `DP(a, H)`.
///
/// Weights that underflow to zero are kept; if all of them vanish the draw is
/// retried once before reporting [`Error::Degenerate`].
pub fn sample_dp<R: Rng + ?Sized>(params: &DpParams, rng: &mut R) -> Result<DiscreteMeasure> {
    params.validate()?;
    for _ in 0..2 {
        if let Some(measure) = try_sample_dp(params, rng) {
            return Ok(measure);
        }
    }
    Err(Error::Degenerate {
        a: params.concentration,
        truncation: params.truncation,
    })
}

fn try_sample_dp<R: Rng + ?Sized>(params: &DpParams, rng: &mut R) -> Option<DiscreteMeasure> {
    let n = params.truncation;
    let shape = params.concentration / n as f64;

    let atoms: Vec<f64> = (0..n).map(|_| sample_base(&params.base, rng)).collect();
    let exps: Vec<f64> = (0..=n).map(|_| rng.sample::<f64, _>(Exp1)).collect();

    // Γ_i and the tail sums Γ_{N+1} - Γ_i, the latter accumulated from the end
    // so that 1 - Γ_i/Γ_{N+1} keeps full relative precision.
    let mut partial = Vec::with_capacity(n);
    let mut acc = 0.0;
    for e in &exps[..n] {
        acc += e;
        partial.push(acc);
    }
    let mut tails = vec![0.0; n];
    let mut acc = exps[n];
    for i in (0..n).rev() {
        tails[i] = acc;
        acc += exps[i];
    }
    let total = partial[n - 1] + exps[n];

    let solver = GammaCoQuantile::new(shape);
    let ln_weights: Vec<f64> = partial
        .iter()
        .zip(&tails)
        .map(|(g, t)| solver.ln_solve(g / total, t / total))
        .collect();

    let max = ln_weights.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if !max.is_finite() {
        return None;
    }
    let weights: Vec<f64> = ln_weights.iter().map(|l| (l - max).exp()).collect();
    DiscreteMeasure::new(atoms, weights).ok()
}
