//! Cramér–von Mises distance `d(F, G) = ∫ (F - G)² dG`.
//!
//! [`cvm_discrete`] is the closed form for a discrete `F` against a
//! continuous `G`; the `cvm_numeric*` functions integrate on the probability
//! scale `u = G(x)` and serve as an independent check and as the objective
//! for [`d_min`].

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::dist::{ContinuousCdf, ContinuousDistribution};
use crate::dp::DiscreteMeasure;
use crate::error::{Error, Result};
use crate::models::ParametricFamily;
use crate::optim::NelderMead;

/// Default number of Simpson subintervals for the numeric integrals.
pub const DEFAULT_GRID: usize = 4096;

/// A Cramér–von Mises distance, always in `[0, 1]`.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Distance(f64);

impl Distance {
    fn clamped(v: f64) -> Self {
        Distance(v.clamp(0.0, 1.0))
    }

    pub fn value(self) -> f64 {
        self.0
    }

    /// `sqrt(d)`, the L2 distance between the cdfs on the `G` scale. Tables of
    /// minimum distances are usually quoted on this scale.
    pub fn root(self) -> f64 {
        self.0.sqrt()
    }
}

/// Closed-form distance between a discrete measure with atoms `Y_(1) < ... <
/// Y_(m)` and jumps `J_i`, and a continuous cdf `G`:
///
/// `1/3 + Σ J_i G(Y_(i))² - Σ J_i² G(Y_(i)) - 2 Σ_{i≥2} J_i (Σ_{k<i} J_k) G(Y_(i))`.
pub fn cvm_discrete(measure: &DiscreteMeasure, g: &impl ContinuousCdf) -> Distance {
    let mut total = 1.0 / 3.0;
    let mut before = 0.0;
    for (&y, &w) in measure.atoms().iter().zip(measure.weights()) {
        let u = g.cdf(y);
        total += w * u * (u - w - 2.0 * before);
        before += w;
    }
    Distance::clamped(total)
}

fn check_grid(gridsize: usize) -> Result<usize> {
    if gridsize < 1000 {
        return Err(Error::domain(format!(
            "grid size must be at least 1000, got {gridsize}"
        )));
    }
    Ok(gridsize + gridsize % 2)
}

/// Numeric distance between a continuous `F` and `G`:
/// `∫₀¹ (F(G⁻¹(u)) - u)² du`, by composite Simpson after the substitution
/// `u = (1 - cos πt) / 2`, which clusters nodes at both ends where heavy
/// tails make the integrand least smooth.
pub fn cvm_numeric(
    f: &impl ContinuousCdf,
    g: &impl ContinuousCdf,
    gridsize: usize,
) -> Result<Distance> {
    let m = check_grid(gridsize)?;
    let h = 1.0 / m as f64;
    let integrand = |t: f64| {
        let u = 0.5 * (1.0 - (PI * t).cos());
        let jac = 0.5 * PI * (PI * t).sin();
        if jac == 0.0 {
            return 0.0;
        }
        let diff = f.cdf(g.inverse_cdf(u)) - u;
        diff * diff * jac
    };
    let mut sum = integrand(0.0) + integrand(1.0);
    for k in 1..m {
        let w = if k % 2 == 1 { 4.0 } else { 2.0 };
        sum += w * integrand(k as f64 * h);
    }
    Ok(Distance::clamped(sum * h / 3.0))
}

/// Numeric distance between a discrete measure and a continuous `G`.
///
/// On the `u` scale the measure's cdf is a step function with jumps at
/// `G(Y_(i))`; each step is integrated by composite Simpson with a share of
/// `gridsize` nodes proportional to its width, with the step height read off
/// the measure at the step midpoint.
pub fn cvm_numeric_step(
    measure: &DiscreteMeasure,
    g: &impl ContinuousCdf,
    gridsize: usize,
) -> Result<Distance> {
    let m = check_grid(gridsize)?;
    let mut edges = Vec::with_capacity(measure.len() + 2);
    edges.push(0.0);
    edges.extend(measure.atoms().iter().map(|&y| g.cdf(y)));
    edges.push(1.0);

    let mut total = 0.0;
    for pair in edges.windows(2) {
        let (lo, hi) = (pair[0], pair[1]);
        let width = hi - lo;
        if width <= 0.0 {
            continue;
        }
        let level = measure.cdf(g.inverse_cdf(0.5 * (lo + hi)));
        let pieces = (((width * m as f64).ceil() as usize).max(2) + 1) & !1;
        let h = width / pieces as f64;
        let sq = |u: f64| (level - u) * (level - u);
        let mut sum = sq(lo) + sq(hi);
        for k in 1..pieces {
            let w = if k % 2 == 1 { 4.0 } else { 2.0 };
            sum += w * sq(lo + k as f64 * h);
        }
        total += sum * h / 3.0;
    }
    Ok(Distance::clamped(total))
}

/// Result of [`d_min`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MinimumDistance {
    /// The minimized integral `inf_θ d(F, F_θ)`.
    pub distance: Distance,
    /// Minimizing natural parameter (`[μ]`, `[μ, σ²]` or `[λ]`).
    pub theta: Vec<f64>,
}

impl MinimumDistance {
    /// `sqrt` of the minimized distance.
    pub fn root(&self) -> f64 {
        self.distance.root()
    }
}

/// `inf_θ d(F, F_θ)` over a parametric family, by Nelder–Mead started from
/// quantile-matched parameters (median and interquartile range, which exist
/// for every supported `F` including Cauchy).
pub fn d_min(f: &ContinuousDistribution, family: ParametricFamily) -> Result<MinimumDistance> {
    d_min_with(f, family, DEFAULT_GRID, &NelderMead::default())
}

pub fn d_min_with(
    f: &ContinuousDistribution,
    family: ParametricFamily,
    gridsize: usize,
    optimizer: &NelderMead,
) -> Result<MinimumDistance> {
    check_grid(gridsize)?;
    let median = f.median();
    let spread = f.iqr() / 1.348_979_500_392_163_5;
    let exp_start = if median > 0.0 {
        median / std::f64::consts::LN_2
    } else {
        1.0
    };

    // Unconstrained coordinates: locations in units of `spread`, scales on
    // the log scale.
    let to_theta = |v: &[f64]| -> Vec<f64> {
        match family {
            ParametricFamily::LocationNormal => vec![median + spread * v[0]],
            ParametricFamily::LocationScaleNormal => {
                vec![median + spread * v[0], (spread * v[1].exp()).powi(2)]
            }
            ParametricFamily::ScaleExponential => vec![exp_start * v[0].exp()],
        }
    };
    let objective = |v: &[f64]| -> f64 {
        match family.member(&to_theta(v)) {
            Ok(g) => cvm_numeric(f, &g, gridsize)
                .map(Distance::value)
                .unwrap_or(f64::INFINITY),
            Err(_) => f64::INFINITY,
        }
    };
    let start = vec![0.0; family.dimension()];
    let best = optimizer.minimize(objective, &start).map_err(|e| match e {
        Error::NoConvergence {
            iterations,
            best_value,
            best_point,
        } => Error::NoConvergence {
            iterations,
            best_value,
            best_point: to_theta(&best_point),
        },
        other => other,
    })?;
    Ok(MinimumDistance {
        distance: Distance::clamped(best.value),
        theta: to_theta(&best.point),
    })
}
