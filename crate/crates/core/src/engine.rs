//! The model check itself: prior and posterior samples of the distance
//! `D(P) = d(P, F_θ(x))`, a discretization of its range by prior quantiles,
//! binned relative belief ratios, the ratio at zero and its strength.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::cvm::cvm_discrete;
use crate::dist::{ContinuousCdf, ContinuousDistribution};
use crate::dp::{posterior_params, sample_dp, BaseMeasure, DpParams, DEFAULT_TRUNCATION};
use crate::error::{Error, Result};
use crate::models::ParametricFamily;
use crate::rng::{Phase, RngStream};

/// Tuning knobs of a check.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CheckConfig {
    /// Prior concentration `a`.
    pub a: f64,
    /// Series truncation `N`.
    pub truncation: usize,
    /// Number of prior distance draws.
    pub r1: usize,
    /// Number of posterior distance draws.
    pub r2: usize,
    /// Number of prior-quantile bins `M`.
    pub bins: usize,
    /// Index of the evidence quantile, `p0 = i0 / M`.
    pub i0: usize,
    pub seed: u64,
}

impl Default for CheckConfig {
    fn default() -> Self {
        Self {
            a: 1.0,
            truncation: DEFAULT_TRUNCATION,
            r1: 1000,
            r2: 1000,
            bins: 20,
            i0: 1,
            seed: 0,
        }
    }
}

impl CheckConfig {
    pub fn with_a(self, a: f64) -> Self {
        Self { a, ..self }
    }

    pub fn with_seed(self, seed: u64) -> Self {
        Self { seed, ..self }
    }

    pub fn p0(&self) -> f64 {
        self.i0 as f64 / self.bins as f64
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.a > 0.0 && self.a.is_finite()) {
            return Err(Error::config(format!("a must be positive, got {}", self.a)));
        }
        if self.truncation < 1 {
            return Err(Error::config("N must be at least 1"));
        }
        if self.r1 < 100 || self.r2 < 100 {
            return Err(Error::config(format!(
                "r1 and r2 must be at least 100, got {} and {}",
                self.r1, self.r2
            )));
        }
        if self.bins < 2 {
            return Err(Error::config(format!(
                "M must be at least 2, got {}",
                self.bins
            )));
        }
        if self.i0 < 1 || self.i0 >= self.bins {
            return Err(Error::config(format!(
                "i0 must satisfy 1 <= i0 < M = {}, got {}",
                self.bins, self.i0
            )));
        }
        if self.r1 < self.bins {
            return Err(Error::config(format!(
                "r1 = {} is smaller than M = {}",
                self.r1, self.bins
            )));
        }
        Ok(())
    }
}

/// Estimated prior quantiles `d̂_{i/M}`, `i = 0..=M`.
#[derive(Debug, Clone, PartialEq)]
pub struct QuantileGrid {
    pub edges: Vec<f64>,
}

impl QuantileGrid {
    pub fn bins(&self) -> usize {
        self.edges.len() - 1
    }

    /// Number of bins whose two edges coincide.
    pub fn collapsed_bins(&self) -> usize {
        self.edges.windows(2).filter(|w| w[0] == w[1]).count()
    }

    pub fn is_degenerate(&self) -> bool {
        self.collapsed_bins() > 0
    }
}

/// Empirical prior quantiles: `d̂_0 = 0`, `d̂_1 = max`, and `d̂_{i/M}` the
/// `⌈i r1 / M⌉`-th order statistic in between.
pub fn prior_quantile_grid(prior: &[f64], bins: usize) -> Result<QuantileGrid> {
    if bins < 2 {
        return Err(Error::config(format!("M must be at least 2, got {bins}")));
    }
    if prior.len() < bins {
        return Err(Error::config(format!(
            "need at least M = {bins} prior draws, got {}",
            prior.len()
        )));
    }
    let mut sorted = prior.to_vec();
    sorted.sort_by(f64::total_cmp);
    let r = sorted.len();
    let mut edges = Vec::with_capacity(bins + 1);
    edges.push(0.0);
    for i in 1..bins {
        let k = (i * r).div_ceil(bins);
        edges.push(sorted[k - 1]);
    }
    edges.push(sorted[r - 1]);
    Ok(QuantileGrid { edges })
}

/// Binned relative belief estimates for one pair of samples.
#[derive(Debug, Clone, PartialEq)]
pub struct Evidence {
    pub grid: QuantileGrid,
    /// Posterior mass of each bin. Bin 0 is `[0, d̂_{1/M}]`, bin `i` is
    /// `(d̂_{i/M}, d̂_{(i+1)/M}]`, and the last bin is unbounded above.
    pub posterior_bin_mass: Vec<f64>,
    /// `M` times the posterior mass of each bin.
    pub rb_bins: Vec<f64>,
    /// Posterior over prior probability of `[0, d̂_{p0}]`.
    pub rb_at_zero: f64,
    /// Posterior probability of `[0, d̂_{p0}]`.
    pub evidence_mass: f64,
    pub strength: f64,
}

/// Builds the quantile grid from `prior`, bins `posterior` against it and
/// computes the ratios and the strength.
pub fn relative_belief(
    prior: &[f64],
    posterior: &[f64],
    bins: usize,
    i0: usize,
) -> Result<Evidence> {
    if i0 < 1 || i0 >= bins {
        return Err(Error::config(format!(
            "i0 must satisfy 1 <= i0 < M = {bins}, got {i0}"
        )));
    }
    if posterior.is_empty() {
        return Err(Error::config("empty posterior sample"));
    }
    let grid = prior_quantile_grid(prior, bins)?;
    let mut sorted = posterior.to_vec();
    sorted.sort_by(f64::total_cmp);
    let r2 = sorted.len();

    // Counts at or below each interior edge give the empirical posterior cdf.
    let at_or_below = |t: f64| sorted.partition_point(|&d| d <= t);
    let mut cumulative: Vec<usize> = grid.edges[1..bins]
        .iter()
        .map(|&e| at_or_below(e))
        .collect();
    cumulative.insert(0, 0);
    cumulative.push(r2);
    let counts: Vec<usize> = cumulative.windows(2).map(|w| w[1] - w[0]).collect();

    let m = bins as f64;
    let n = r2 as f64;
    let posterior_bin_mass: Vec<f64> = counts.iter().map(|&c| c as f64 / n).collect();
    let rb_bins: Vec<f64> = counts.iter().map(|&c| c as f64 * m / n).collect();
    let below_p0 = cumulative[i0];
    let rb_at_zero = below_p0 as f64 * m / (i0 as f64 * n);
    let evidence_mass = below_p0 as f64 / n;
    let strength = strength(&rb_bins, &posterior_bin_mass, rb_at_zero, i0, evidence_mass);

    Ok(Evidence {
        grid,
        posterior_bin_mass,
        rb_bins,
        rb_at_zero,
        evidence_mass,
        strength,
    })
}

/// Posterior probability of the bins `i >= i0` whose ratio is no larger than
/// the ratio at zero. When the ratio at zero exceeds one the posterior mass
/// of the evidence region `[0, d̂_{p0}]` itself is added, since its own ratio
/// trivially does not exceed the ratio at zero.
pub fn strength(
    rb_bins: &[f64],
    posterior_bin_mass: &[f64],
    rb_at_zero: f64,
    i0: usize,
    evidence_mass: f64,
) -> f64 {
    let outer: f64 = rb_bins
        .iter()
        .zip(posterior_bin_mass)
        .skip(i0)
        .filter(|(rb, _)| **rb <= rb_at_zero)
        .map(|(_, mass)| mass)
        .sum();
    let inner = if rb_at_zero > 1.0 { evidence_mass } else { 0.0 };
    (outer + inner).clamp(0.0, 1.0)
}

/// Draws `count` distances `d(P, reference)` with `P ~ params`, one substream
/// of `stream` per draw.
pub fn sample_distances<G>(
    params: &DpParams,
    reference: &G,
    count: usize,
    stream: RngStream,
) -> Result<Vec<f64>>
where
    G: ContinuousCdf + Sync,
{
    (0..count as u64)
        .into_par_iter()
        .map(|j| {
            let mut rng = stream.substream(j).rng();
            let p = sample_dp(params, &mut rng)?;
            Ok(cvm_discrete(&p, reference).value())
        })
        .collect()
}

/// Everything a check produces. Field names are the stable JSON schema.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RbReport {
    pub family: ParametricFamily,
    pub theta: Vec<f64>,
    pub a: f64,
    #[serde(rename = "N")]
    pub truncation: usize,
    pub r1: usize,
    pub r2: usize,
    #[serde(rename = "M")]
    pub bins: usize,
    pub p0: f64,
    pub i0: usize,
    pub seed: u64,
    pub n: usize,
    pub base_override: Option<ContinuousDistribution>,
    pub d_quantiles: Vec<f64>,
    pub posterior_bin_mass: Vec<f64>,
    pub rb_bins: Vec<f64>,
    pub rb_at_zero: f64,
    pub evidence_mass: f64,
    pub strength: f64,
    pub warnings: Vec<String>,
    pub prior_distances: Vec<f64>,
    pub posterior_distances: Vec<f64>,
}

impl RbReport {
    /// `d̂_{p0}`, the upper edge of the evidence region.
    pub fn d_p0(&self) -> f64 {
        self.d_quantiles[self.i0]
    }

    /// `RB (strength)` with two decimals, the way results tables print it.
    pub fn summary(&self) -> String {
        format!("{:.2} ({:.2})", self.rb_at_zero, self.strength)
    }
}

/// Runs the full check of `data` against `family`.
///
/// The prior is `DP(a, F_θ(x))` and distances are measured to `F_θ(x)`. With
/// `base_override = Some(H)` the prior is `DP(a, H)` and distances are
/// measured to `H`, which is how a badly placed prior is studied.
pub fn run_check(
    data: &[f64],
    family: ParametricFamily,
    base_override: Option<&ContinuousDistribution>,
    cfg: &CheckConfig,
) -> Result<RbReport> {
    cfg.validate()?;
    let fitted = family.fit(data)?;
    let base = base_override.copied().unwrap_or(fitted.distribution);

    let root = RngStream::new(cfg.seed, 0);
    let prior = DpParams::new(cfg.a, BaseMeasure::Continuous(base), cfg.truncation)?;
    let prior_distances = sample_distances(&prior, &base, cfg.r1, root.phase(Phase::Prior))?;
    let posterior = posterior_params(&prior, data)?;
    let posterior_distances =
        sample_distances(&posterior, &base, cfg.r2, root.phase(Phase::Posterior))?;

    let evidence = relative_belief(&prior_distances, &posterior_distances, cfg.bins, cfg.i0)?;

    let mut warnings = Vec::new();
    let n = data.len();
    if cfg.a > 0.25 * n as f64 {
        warnings.push(format!(
            "a = {} exceeds 0.25 n = {}; the prior may dominate the data",
            cfg.a,
            0.25 * n as f64
        ));
    }
    let collapsed = evidence.grid.collapsed_bins();
    if collapsed > 0 {
        warnings.push(format!(
            "degenerate prior quantile grid: {collapsed} of {} bins have zero width",
            cfg.bins
        ));
    }

    Ok(RbReport {
        family,
        theta: fitted.theta,
        a: cfg.a,
        truncation: cfg.truncation,
        r1: cfg.r1,
        r2: cfg.r2,
        bins: cfg.bins,
        p0: cfg.p0(),
        i0: cfg.i0,
        seed: cfg.seed,
        n,
        base_override: base_override.copied(),
        d_quantiles: evidence.grid.edges,
        posterior_bin_mass: evidence.posterior_bin_mass,
        rb_bins: evidence.rb_bins,
        rb_at_zero: evidence.rb_at_zero,
        evidence_mass: evidence.evidence_mass,
        strength: evidence.strength,
        warnings,
        prior_distances,
        posterior_distances,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn uniform_grid_sample(r: usize) -> Vec<f64> {
        (1..=r).map(|i| i as f64).collect()
    }

    #[test]
    fn grid_on_integer_sample() {
        let sample: Vec<f64> = uniform_grid_sample(100).into_iter().rev().collect();
        let grid = prior_quantile_grid(&sample, 20).unwrap();
        let expected: Vec<f64> = (0..=20).map(|i| 5.0 * i as f64).collect();
        assert_eq!(grid.edges, expected);
        assert!(!grid.is_degenerate());
    }

    #[test]
    fn grid_on_constant_sample_is_flagged() {
        let grid = prior_quantile_grid(&[0.3; 100], 20).unwrap();
        assert_eq!(grid.edges[0], 0.0);
        assert!(grid.edges[1..].iter().all(|&e| e == 0.3));
        assert_eq!(grid.collapsed_bins(), 19);
        assert!(grid.is_degenerate());
    }

    #[test]
    fn grid_needs_enough_draws() {
        assert!(matches!(
            prior_quantile_grid(&[1.0; 10], 20),
            Err(Error::Config(_))
        ));
        assert!(prior_quantile_grid(&[1.0; 10], 1).is_err());
    }

    #[test]
    fn unchanged_beliefs_give_unit_ratios() {
        let prior: Vec<f64> = (0..1000)
            .map(|i| ((i * 7919) % 1000) as f64 / 997.0)
            .collect();
        let ev = relative_belief(&prior, &prior, 20, 1).unwrap();
        assert!(ev.rb_bins.iter().all(|&rb| rb == 1.0), "{:?}", ev.rb_bins);
        assert_eq!(ev.rb_at_zero, 1.0);
        let total: f64 = ev.posterior_bin_mass.iter().sum();
        assert!((total - 1.0).abs() < 1e-12);
        // Every outer bin ties with the ratio at zero.
        assert!((ev.strength - 0.95).abs() < 1e-12);
    }

    #[test]
    fn fully_concentrated_posterior() {
        let prior = uniform_grid_sample(1000);
        let grid = prior_quantile_grid(&prior, 20).unwrap();
        let posterior: Vec<f64> = (0..500).map(|i| grid.edges[1] * i as f64 / 500.0).collect();
        let ev = relative_belief(&prior, &posterior, 20, 1).unwrap();
        assert_eq!(ev.rb_at_zero, 20.0);
        assert_eq!(ev.evidence_mass, 1.0);
        assert_eq!(ev.strength, 1.0);
        assert!(ev.rb_bins[1..].iter().all(|&rb| rb == 0.0));
    }

    #[test]
    fn posterior_beyond_prior_support_lands_in_last_bin() {
        let prior = uniform_grid_sample(200);
        let posterior = vec![1e6; 150];
        let ev = relative_belief(&prior, &posterior, 20, 1).unwrap();
        assert_eq!(ev.posterior_bin_mass[19], 1.0);
        assert_eq!(ev.rb_at_zero, 0.0);
        // Zero-mass bins tie with a zero ratio at zero and contribute nothing.
        assert_eq!(ev.strength, 0.0);
    }

    #[test]
    fn strength_excludes_bins_with_larger_ratio() {
        let rb = [0.0, 3.0, 0.0, 1.0];
        let mass = [0.0, 0.75, 0.0, 0.25];
        assert_eq!(strength(&rb, &mass, 0.0, 1, 0.0), 0.0);
        assert_eq!(strength(&rb, &mass, 1.0, 1, 0.0), 0.25);
        // Ratio at zero above every bin: everything counts.
        let rb = [8.0, 2.0, 1.0, 1.0];
        let mass = [0.4, 0.1, 0.25, 0.25];
        assert!((strength(&rb, &mass, 8.0, 1, 0.4) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn evidence_index_above_one() {
        let prior = uniform_grid_sample(1000);
        // Posterior with 30% of its mass below the 0.1 prior quantile.
        let mut posterior = vec![1.0; 300];
        posterior.extend(std::iter::repeat_n(900.5, 700));
        let ev = relative_belief(&prior, &posterior, 20, 2).unwrap();
        assert!((ev.rb_at_zero - 3.0).abs() < 1e-12);
        assert!((ev.evidence_mass - 0.3).abs() < 1e-12);
        assert!(relative_belief(&prior, &posterior, 20, 20).is_err());
        assert!(relative_belief(&prior, &posterior, 20, 0).is_err());
    }

    #[test]
    fn config_validation() {
        assert!(CheckConfig::default().validate().is_ok());
        let bad = [
            CheckConfig {
                a: 0.0,
                ..Default::default()
            },
            CheckConfig {
                truncation: 0,
                ..Default::default()
            },
            CheckConfig {
                r1: 99,
                ..Default::default()
            },
            CheckConfig {
                r2: 10,
                ..Default::default()
            },
            CheckConfig {
                bins: 1,
                ..Default::default()
            },
            CheckConfig {
                i0: 0,
                ..Default::default()
            },
            CheckConfig {
                i0: 20,
                ..Default::default()
            },
            CheckConfig {
                bins: 200,
                r1: 150,
                ..Default::default()
            },
        ];
        for cfg in bad {
            assert!(matches!(cfg.validate(), Err(Error::Config(_))), "{cfg:?}");
        }
    }
}
