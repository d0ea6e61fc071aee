//! Univariate continuous distributions: the model families and every
//! alternative used by the simulation tables.
//!
//! Parameters follow the conventions of the results tables: `normal(m, v)`
//! takes a variance, `exp(l)` takes a mean.

use std::f64::consts::{FRAC_1_SQRT_2, PI, SQRT_2};
use std::fmt;
use std::str::FromStr;

use rand::Rng;
use rand_distr::{Distribution, Exp1, StandardNormal};
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use statrs::function::beta::beta_reg;
use statrs::function::erf::{erfc, erfc_inv};

use crate::error::{Error, Result};
use crate::special::invert_monotone;

/// Anything with a continuous cdf and its inverse.
pub trait ContinuousCdf {
    fn cdf(&self, x: f64) -> f64;

    /// Inverse cdf on the closed unit interval; `0` and `1` map to the ends of
    /// the support (possibly infinite). Arguments are not validated.
    fn inverse_cdf(&self, p: f64) -> f64;
}

impl<T: ContinuousCdf + ?Sized> ContinuousCdf for &T {
    fn cdf(&self, x: f64) -> f64 {
        (**self).cdf(x)
    }

    fn inverse_cdf(&self, p: f64) -> f64 {
        (**self).inverse_cdf(p)
    }
}

/// Parameters of a [`ContinuousDistribution`]. Scale parameters are stored as
/// standard deviations.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum DistributionKind {
    Normal {
        mean: f64,
        sd: f64,
    },
    StudentT {
        df: f64,
        loc: f64,
        scale: f64,
    },
    Cauchy {
        loc: f64,
        scale: f64,
    },
    Uniform {
        lo: f64,
        hi: f64,
    },
    /// Exponential with the given mean.
    Exponential {
        mean: f64,
    },
    /// `weight * N(mean1, sd1²) + (1 - weight) * N(mean2, sd2²)`.
    NormalMixture {
        weight: f64,
        mean1: f64,
        sd1: f64,
        mean2: f64,
        sd2: f64,
    },
}

/// A validated univariate continuous distribution.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ContinuousDistribution(DistributionKind);

fn positive(name: &str, v: f64) -> Result<f64> {
    if v > 0.0 && v.is_finite() {
        Ok(v)
    } else {
        Err(Error::domain(format!(
            "{name} must be positive and finite, got {v}"
        )))
    }
}

fn finite(name: &str, v: f64) -> Result<f64> {
    if v.is_finite() {
        Ok(v)
    } else {
        Err(Error::domain(format!("{name} must be finite, got {v}")))
    }
}

impl ContinuousDistribution {
    pub fn normal(mean: f64, variance: f64) -> Result<Self> {
        Ok(Self(DistributionKind::Normal {
            mean: finite("mean", mean)?,
            sd: positive("variance", variance)?.sqrt(),
        }))
    }

    pub fn standard_normal() -> Self {
        Self(DistributionKind::Normal { mean: 0.0, sd: 1.0 })
    }

    /// Central t on `df` degrees of freedom; any `df > 0` is allowed.
    pub fn student_t(df: f64) -> Result<Self> {
        Self::student_t_scaled(df, 0.0, 1.0)
    }

    pub fn student_t_scaled(df: f64, loc: f64, scale: f64) -> Result<Self> {
        Ok(Self(DistributionKind::StudentT {
            df: positive("degrees of freedom", df)?,
            loc: finite("location", loc)?,
            scale: positive("scale", scale)?,
        }))
    }

    pub fn cauchy(loc: f64, scale: f64) -> Result<Self> {
        Ok(Self(DistributionKind::Cauchy {
            loc: finite("location", loc)?,
            scale: positive("scale", scale)?,
        }))
    }

    pub fn uniform(lo: f64, hi: f64) -> Result<Self> {
        let (lo, hi) = (finite("lower bound", lo)?, finite("upper bound", hi)?);
        if lo >= hi {
            return Err(Error::domain(format!(
                "uniform needs lo < hi, got [{lo}, {hi}]"
            )));
        }
        Ok(Self(DistributionKind::Uniform { lo, hi }))
    }

    /// Exponential parameterized by its mean.
    pub fn exponential(mean: f64) -> Result<Self> {
        Ok(Self(DistributionKind::Exponential {
            mean: positive("mean", mean)?,
        }))
    }

    pub fn normal_mixture(
        weight: f64,
        mean1: f64,
        var1: f64,
        mean2: f64,
        var2: f64,
    ) -> Result<Self> {
        if !(0.0..=1.0).contains(&weight) {
            return Err(Error::domain(format!(
                "mixture weight must lie in [0, 1], got {weight}"
            )));
        }
        Ok(Self(DistributionKind::NormalMixture {
            weight,
            mean1: finite("mean", mean1)?,
            sd1: positive("variance", var1)?.sqrt(),
            mean2: finite("mean", mean2)?,
            sd2: positive("variance", var2)?.sqrt(),
        }))
    }

    pub fn kind(&self) -> DistributionKind {
        self.0
    }

    pub fn cdf(&self, x: f64) -> f64 {
        use DistributionKind::*;
        match self.0 {
            Normal { mean, sd } => std_normal_cdf((x - mean) / sd),
            StudentT { df, loc, scale } => student_t_cdf(df, (x - loc) / scale),
            Cauchy { loc, scale } => 0.5 + ((x - loc) / scale).atan() / PI,
            Uniform { lo, hi } => ((x - lo) / (hi - lo)).clamp(0.0, 1.0),
            Exponential { mean } => {
                if x <= 0.0 {
                    0.0
                } else {
                    -(-x / mean).exp_m1()
                }
            }
            NormalMixture {
                weight,
                mean1,
                sd1,
                mean2,
                sd2,
            } => {
                weight * std_normal_cdf((x - mean1) / sd1)
                    + (1.0 - weight) * std_normal_cdf((x - mean2) / sd2)
            }
        }
    }

    /// Inverse cdf for `p` strictly inside `(0, 1)`.
    pub fn quantile(&self, p: f64) -> Result<f64> {
        if !(p > 0.0 && p < 1.0) {
            return Err(Error::domain(format!(
                "probability must lie in (0, 1), got {p}"
            )));
        }
        Ok(self.inverse_cdf(p))
    }

    /// Median, used to seed optimizers where moments may not exist.
    pub fn median(&self) -> f64 {
        self.inverse_cdf(0.5)
    }

    /// Interquartile range.
    pub fn iqr(&self) -> f64 {
        self.inverse_cdf(0.75) - self.inverse_cdf(0.25)
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        use DistributionKind::*;
        match self.0 {
            Normal { mean, sd } => mean + sd * rng.sample::<f64, _>(StandardNormal),
            StudentT { df, loc, scale } => {
                let t = rand_distr::StudentT::new(df).expect("validated degrees of freedom");
                loc + scale * t.sample(rng)
            }
            Cauchy { loc, scale } => {
                let u: f64 = rng.random();
                loc + scale * (PI * (u - 0.5)).tan()
            }
            Uniform { lo, hi } => lo + (hi - lo) * rng.random::<f64>(),
            Exponential { mean } => mean * rng.sample::<f64, _>(Exp1),
            NormalMixture {
                weight,
                mean1,
                sd1,
                mean2,
                sd2,
            } => {
                let z: f64 = rng.sample(StandardNormal);
                if rng.random::<f64>() < weight {
                    mean1 + sd1 * z
                } else {
                    mean2 + sd2 * z
                }
            }
        }
    }
}

impl ContinuousCdf for ContinuousDistribution {
    fn cdf(&self, x: f64) -> f64 {
        ContinuousDistribution::cdf(self, x)
    }

    fn inverse_cdf(&self, p: f64) -> f64 {
        use DistributionKind::*;
        if p <= 0.0 || p >= 1.0 {
            let lower = p <= 0.0;
            return match self.0 {
                Uniform { lo, hi } => {
                    if lower {
                        lo
                    } else {
                        hi
                    }
                }
                Exponential { .. } => {
                    if lower {
                        0.0
                    } else {
                        f64::INFINITY
                    }
                }
                _ => {
                    if lower {
                        f64::NEG_INFINITY
                    } else {
                        f64::INFINITY
                    }
                }
            };
        }
        match self.0 {
            Normal { mean, sd } => mean + sd * std_normal_quantile(p),
            StudentT { df, loc, scale } => loc + scale * student_t_quantile(df, p),
            Cauchy { loc, scale } => loc + scale * (PI * (p - 0.5)).tan(),
            Uniform { lo, hi } => lo + p * (hi - lo),
            Exponential { mean } => -mean * (-p).ln_1p(),
            NormalMixture {
                mean1,
                sd1,
                mean2,
                sd2,
                ..
            } => {
                let start = 0.5 * (mean1 + mean2);
                let scale = (mean1 - mean2).abs() + sd1.max(sd2);
                invert_monotone(|x| self.cdf(x), p, start, scale)
            }
        }
    }
}

pub(crate) fn std_normal_cdf(z: f64) -> f64 {
    0.5 * erfc(-z * FRAC_1_SQRT_2)
}

pub(crate) fn std_normal_quantile(p: f64) -> f64 {
    -SQRT_2 * erfc_inv(2.0 * p)
}

fn student_t_cdf(df: f64, t: f64) -> f64 {
    if t.is_infinite() {
        return if t > 0.0 { 1.0 } else { 0.0 };
    }
    let t2 = t * t;
    if t2 < df {
        // Near the center the complement of the beta argument is small.
        let half = 0.5 * beta_reg(0.5, 0.5 * df, t2 / (df + t2));
        if t >= 0.0 {
            0.5 + half
        } else {
            0.5 - half
        }
    } else {
        let tail = 0.5 * beta_reg(0.5 * df, 0.5, df / (df + t2));
        if t >= 0.0 {
            1.0 - tail
        } else {
            tail
        }
    }
}

fn student_t_quantile(df: f64, p: f64) -> f64 {
    if p == 0.5 {
        return 0.0;
    }
    // Solve in the lower tail and reflect; symmetric about zero.
    let lower = p.min(1.0 - p);
    let start = std_normal_quantile(lower).min(-1e-3);
    let x = invert_monotone(|x| student_t_cdf(df, x), lower, start, start.abs());
    if p < 0.5 {
        x
    } else {
        -x
    }
}

/// Shortest round-trip formatting of the mini-grammar, e.g. `normal(0,9)`,
/// `t(3)`, `mix(0.5,normal(-2,1),normal(2,1))`.
impl fmt::Display for ContinuousDistribution {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        use DistributionKind::*;
        match self.0 {
            Normal { mean, sd } => write!(f, "normal({mean},{})", sd * sd),
            StudentT { df, loc, scale } => {
                if loc == 0.0 && scale == 1.0 {
                    write!(f, "t({df})")
                } else {
                    write!(f, "t({df},{loc},{scale})")
                }
            }
            Cauchy { loc, scale } => write!(f, "cauchy({loc},{scale})"),
            Uniform { lo, hi } => write!(f, "uniform({lo},{hi})"),
            Exponential { mean } => write!(f, "exp({mean})"),
            NormalMixture {
                weight,
                mean1,
                sd1,
                mean2,
                sd2,
            } => write!(
                f,
                "mix({weight},normal({mean1},{}),normal({mean2},{}))",
                sd1 * sd1,
                sd2 * sd2
            ),
        }
    }
}

impl FromStr for ContinuousDistribution {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s: String = s.chars().filter(|c| !c.is_whitespace()).collect();
        let bad = || Error::domain(format!("cannot parse distribution spec {s:?}"));
        let open = s.find('(').ok_or_else(bad)?;
        if !s.ends_with(')') {
            return Err(bad());
        }
        let name = s[..open].to_ascii_lowercase();
        let inner = &s[open + 1..s.len() - 1];

        if name == "mix" {
            let args = split_top_level(inner);
            if args.len() != 3 {
                return Err(bad());
            }
            let weight: f64 = args[0].parse().map_err(|_| bad())?;
            let first: ContinuousDistribution = args[1].parse()?;
            let second: ContinuousDistribution = args[2].parse()?;
            return match (first.0, second.0) {
                (
                    DistributionKind::Normal { mean: m1, sd: s1 },
                    DistributionKind::Normal { mean: m2, sd: s2 },
                ) => Self::normal_mixture(weight, m1, s1 * s1, m2, s2 * s2),
                _ => Err(Error::domain("mixture components must be normal")),
            };
        }

        let args: Vec<f64> = if inner.is_empty() {
            Vec::new()
        } else {
            inner
                .split(',')
                .map(|a| a.parse::<f64>().map_err(|_| bad()))
                .collect::<Result<_>>()?
        };
        match (name.as_str(), args.as_slice()) {
            ("normal" | "n", [m, v]) => Self::normal(*m, *v),
            ("t" | "student-t", [df]) => Self::student_t(*df),
            ("t" | "student-t", [df, loc, scale]) => Self::student_t_scaled(*df, *loc, *scale),
            ("cauchy", [loc, scale]) => Self::cauchy(*loc, *scale),
            ("uniform" | "u", [lo, hi]) => Self::uniform(*lo, *hi),
            ("exp" | "exponential", [mean]) => Self::exponential(*mean),
            _ => Err(bad()),
        }
    }
}

fn split_top_level(s: &str) -> Vec<&str> {
    let mut parts = Vec::new();
    let mut depth = 0usize;
    let mut start = 0;
    for (i, c) in s.char_indices() {
        match c {
            '(' => depth += 1,
            ')' => depth = depth.saturating_sub(1),
            ',' if depth == 0 => {
                parts.push(&s[start..i]);
                start = i + 1;
            }
            _ => {}
        }
    }
    parts.push(&s[start..]);
    parts
}

impl Serialize for ContinuousDistribution {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for ContinuousDistribution {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}
