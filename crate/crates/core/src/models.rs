//! The parametric families under test and their maximum likelihood fits.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::dist::ContinuousDistribution;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ParametricFamily {
    /// `N(θ, 1)`, unit variance fixed.
    LocationNormal,
    /// `N(μ, σ²)`.
    LocationScaleNormal,
    /// Exponential with mean `θ`.
    ScaleExponential,
}

impl ParametricFamily {
    pub const ALL: [ParametricFamily; 3] = [
        ParametricFamily::LocationNormal,
        ParametricFamily::LocationScaleNormal,
        ParametricFamily::ScaleExponential,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ParametricFamily::LocationNormal => "location-normal",
            ParametricFamily::LocationScaleNormal => "location-scale-normal",
            ParametricFamily::ScaleExponential => "scale-exponential",
        }
    }

    pub fn dimension(self) -> usize {
        match self {
            ParametricFamily::LocationScaleNormal => 2,
            _ => 1,
        }
    }

    /// The member with natural parameter `theta` (`[μ]`, `[μ, σ²]` or `[λ]`).
    pub fn member(self, theta: &[f64]) -> Result<ContinuousDistribution> {
        if theta.len() != self.dimension() {
            return Err(Error::domain(format!(
                "{} takes {} parameter(s), got {}",
                self.name(),
                self.dimension(),
                theta.len()
            )));
        }
        match self {
            ParametricFamily::LocationNormal => ContinuousDistribution::normal(theta[0], 1.0),
            ParametricFamily::LocationScaleNormal => {
                ContinuousDistribution::normal(theta[0], theta[1])
            }
            ParametricFamily::ScaleExponential => ContinuousDistribution::exponential(theta[0]),
        }
    }

    /// Maximum likelihood fit.
    pub fn fit(self, data: &[f64]) -> Result<FittedModel> {
        if data.is_empty() {
            return Err(Error::NoData);
        }
        if data.len() < 2 {
            return Err(Error::domain(format!(
                "need at least 2 observations, got {}",
                data.len()
            )));
        }
        if let Some(x) = data.iter().find(|x| !x.is_finite()) {
            return Err(Error::domain(format!("data must be finite, found {x}")));
        }
        let n = data.len() as f64;
        let mean = data.iter().sum::<f64>() / n;
        let theta = match self {
            ParametricFamily::LocationNormal => vec![mean],
            ParametricFamily::LocationScaleNormal => {
                let var = data.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / n;
                if var <= 0.0 {
                    return Err(Error::DegenerateFit(
                        "data are constant, variance is zero".into(),
                    ));
                }
                vec![mean, var]
            }
            ParametricFamily::ScaleExponential => {
                if let Some(x) = data.iter().find(|x| **x <= 0.0) {
                    return Err(Error::domain(format!(
                        "scale-exponential needs positive data, found {x}"
                    )));
                }
                vec![mean]
            }
        };
        let distribution = self.member(&theta)?;
        Ok(FittedModel {
            family: self,
            theta,
            distribution,
        })
    }
}

impl fmt::Display for ParametricFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ParametricFamily {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        ParametricFamily::ALL
            .into_iter()
            .find(|f| f.name() == s.trim())
            .ok_or_else(|| {
                Error::domain(format!(
                    "unknown family {s:?}; expected location-normal, location-scale-normal or scale-exponential"
                ))
            })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FittedModel {
    pub family: ParametricFamily,
    pub theta: Vec<f64>,
    pub distribution: ContinuousDistribution,
}
