//! Simulation harness: generate data from a known distribution, run the
//! check for several concentrations, and summarize over replications.

use std::io::{Read, Write};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::cvm::d_min;
use crate::dist::ContinuousDistribution;
use crate::engine::{run_check, CheckConfig};
use crate::error::{Error, Result};
use crate::models::ParametricFamily;
use crate::rng::{Phase, RngStream};

/// One row of a simulation table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Scenario {
    pub id: String,
    /// The distribution the data are drawn from.
    pub distribution: ContinuousDistribution,
    pub family: ParametricFamily,
    pub n: usize,
    pub a: Vec<f64>,
    pub replications: usize,
    pub seed: u64,
    #[serde(default)]
    pub base_override: Option<ContinuousDistribution>,
    /// Also compute `inf_θ d(F, F_θ)` for the row.
    #[serde(default)]
    pub d_min: bool,
}

impl Scenario {
    pub fn validate(&self) -> Result<()> {
        if self.n < 2 {
            return Err(Error::config(format!(
                "scenario {}: n must be at least 2",
                self.id
            )));
        }
        if self.replications < 1 {
            return Err(Error::config(format!(
                "scenario {}: need at least one replication",
                self.id
            )));
        }
        if self.a.is_empty() || self.a.iter().any(|a| !(*a > 0.0 && a.is_finite())) {
            return Err(Error::config(format!(
                "scenario {}: a values must be positive",
                self.id
            )));
        }
        Ok(())
    }

    /// The data set of replication `rep`. The same sample is reused for every
    /// concentration in the row.
    pub fn generate_data(&self, rep: usize) -> Vec<f64> {
        let mut rng = self.replication_stream(rep).phase(Phase::Data).rng();
        (0..self.n)
            .map(|_| self.distribution.sample(&mut rng))
            .collect()
    }

    fn replication_stream(&self, rep: usize) -> RngStream {
        RngStream::new(self.seed, 0).substream(rep as u64)
    }
}

/// Summary of one scenario at one concentration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResultRecord {
    pub scenario: String,
    pub distribution: ContinuousDistribution,
    pub family: ParametricFamily,
    pub base_override: Option<ContinuousDistribution>,
    pub n: usize,
    pub a: f64,
    pub replications: usize,
    /// Minimum distance on the root scale, when requested.
    pub d_min: Option<f64>,
    pub d_p0_median: Option<f64>,
    pub rb_median: Option<f64>,
    pub strength_median: Option<f64>,
    /// Fraction of replications on the same side of 1 as the median ratio.
    /// Summaries are absent when every replication failed.
    pub direction_agreement: Option<f64>,
    /// Replications whose check failed (e.g. data outside the model support).
    pub failures: usize,
    pub first_error: Option<String>,
    pub d_p0: Vec<f64>,
    pub rb: Vec<f64>,
    pub strength: Vec<f64>,
}

pub fn median(values: &[f64]) -> Option<f64> {
    if values.is_empty() {
        return None;
    }
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let mid = v.len() / 2;
    Some(if v.len() % 2 == 1 {
        v[mid]
    } else {
        0.5 * (v[mid - 1] + v[mid])
    })
}

/// Runs every concentration of `scenario` with the other knobs taken from
/// `template`.
pub fn run_scenario(scenario: &Scenario, template: &CheckConfig) -> Result<Vec<ResultRecord>> {
    scenario.validate()?;
    let dmin = if scenario.d_min {
        Some(match d_min(&scenario.distribution, scenario.family) {
            Ok(m) => m.root(),
            Err(Error::NoConvergence { best_value, .. }) => best_value.max(0.0).sqrt(),
            Err(e) => return Err(e),
        })
    } else {
        None
    };

    let data: Vec<Vec<f64>> = (0..scenario.replications)
        .map(|r| scenario.generate_data(r))
        .collect();

    let mut records = Vec::with_capacity(scenario.a.len());
    for &a in &scenario.a {
        let outcomes: Vec<Result<(f64, f64, f64)>> = data
            .par_iter()
            .enumerate()
            .map(|(rep, x)| {
                let cfg = CheckConfig {
                    a,
                    seed: scenario.replication_stream(rep).derive_seed(),
                    ..*template
                };
                let report = run_check(x, scenario.family, scenario.base_override.as_ref(), &cfg)?;
                Ok((report.d_p0(), report.rb_at_zero, report.strength))
            })
            .collect();

        let mut d_p0 = Vec::new();
        let mut rb = Vec::new();
        let mut strength = Vec::new();
        let mut failures = 0;
        let mut first_error = None;
        for outcome in outcomes {
            match outcome {
                Ok((d, r, s)) => {
                    d_p0.push(d);
                    rb.push(r);
                    strength.push(s);
                }
                // Configuration problems are not per-replication.
                Err(e @ Error::Config(_)) => return Err(e),
                Err(e) => {
                    failures += 1;
                    first_error.get_or_insert_with(|| e.to_string());
                }
            }
        }
        let rb_median = median(&rb);
        let direction_agreement = rb_median.map(|m| {
            rb.iter().filter(|&&r| (r > 1.0) == (m > 1.0)).count() as f64 / rb.len() as f64
        });
        records.push(ResultRecord {
            scenario: scenario.id.clone(),
            distribution: scenario.distribution,
            family: scenario.family,
            base_override: scenario.base_override,
            n: scenario.n,
            a,
            replications: scenario.replications,
            d_min: dmin,
            d_p0_median: median(&d_p0),
            rb_median,
            strength_median: median(&strength),
            direction_agreement,
            failures,
            first_error,
            d_p0,
            rb,
            strength,
        });
    }
    Ok(records)
}

/// Runs scenarios in parallel; output order follows input order.
pub fn run_scenarios(scenarios: &[Scenario], template: &CheckConfig) -> Result<Vec<ResultRecord>> {
    let per_row: Vec<Result<Vec<ResultRecord>>> = scenarios
        .par_iter()
        .map(|s| run_scenario(s, template))
        .collect();
    let mut out = Vec::new();
    for rows in per_row {
        out.extend(rows?);
    }
    Ok(out)
}

/// Data-generating distributions of the single-family tables.
pub const TABLE_DISTRIBUTIONS: [&str; 12] = [
    "normal(0,1)",
    "normal(10,1)",
    "normal(0,4)",
    "normal(0,9)",
    "mix(0.5,normal(-2,1),normal(2,1))",
    "t(0.5)",
    "t(3)",
    "cauchy(0,1)",
    "uniform(0,1)",
    "uniform(-1,1)",
    "exp(1)",
    "exp(10)",
];

pub const TABLE_CONCENTRATIONS: [f64; 3] = [1.0, 5.0, 10.0];

/// Built-in simulation tables: 1 (location normal), 2 (location normal with
/// misplaced priors, data from N(10,1)), 3 (location-scale normal) and
/// 5 (scale exponential). All use `n = 20`.
pub fn table_scenarios(table: u8, replications: usize, seed: u64) -> Result<Vec<Scenario>> {
    let root = RngStream::new(seed, u64::from(table));
    let make =
        |i: usize, dist: &str, family, base_override: Option<&str>, d_min| -> Result<Scenario> {
            Ok(Scenario {
                id: format!("table{table}-{:02}", i + 1),
                distribution: dist.parse()?,
                family,
                n: 20,
                a: TABLE_CONCENTRATIONS.to_vec(),
                replications,
                seed: root.substream(i as u64).derive_seed(),
                base_override: base_override.map(str::parse).transpose()?,
                d_min,
            })
        };
    let family = match table {
        1 | 2 => ParametricFamily::LocationNormal,
        3 => ParametricFamily::LocationScaleNormal,
        5 => ParametricFamily::ScaleExponential,
        _ => {
            return Err(Error::config(format!(
                "unknown table {table}; expected 1, 2, 3 or 5"
            )))
        }
    };
    if table == 2 {
        // The first row centres the prior at the fitted model.
        return [None, Some("normal(0,1)"), Some("normal(9,1)")]
            .iter()
            .enumerate()
            .map(|(i, base)| make(i, "normal(10,1)", family, *base, false))
            .collect();
    }
    TABLE_DISTRIBUTIONS
        .iter()
        .enumerate()
        .map(|(i, dist)| make(i, dist, family, None, true))
        .collect()
}

pub fn read_scenarios<R: Read>(reader: R) -> Result<Vec<Scenario>> {
    let scenarios: Vec<Scenario> = serde_json::from_reader(reader)?;
    for s in &scenarios {
        s.validate()?;
    }
    Ok(scenarios)
}

// Flat CSV shape of a record; list columns are `;`-joined.
#[derive(Debug, Serialize, Deserialize)]
struct CsvRecord {
    scenario: String,
    distribution: ContinuousDistribution,
    family: ParametricFamily,
    base_override: Option<ContinuousDistribution>,
    n: usize,
    a: f64,
    replications: usize,
    d_min: Option<f64>,
    d_p0_median: Option<f64>,
    rb_median: Option<f64>,
    strength_median: Option<f64>,
    direction_agreement: Option<f64>,
    failures: usize,
    first_error: Option<String>,
    d_p0: String,
    rb: String,
    strength: String,
}

fn join(values: &[f64]) -> String {
    values
        .iter()
        .map(f64::to_string)
        .collect::<Vec<_>>()
        .join(";")
}

fn split(text: &str) -> Result<Vec<f64>> {
    if text.is_empty() {
        return Ok(Vec::new());
    }
    text.split(';')
        .map(|v| {
            v.parse::<f64>()
                .map_err(|_| Error::domain(format!("bad list value {v:?}")))
        })
        .collect()
}

pub fn write_records_csv<W: Write>(writer: W, records: &[ResultRecord]) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    for r in records {
        w.serialize(CsvRecord {
            scenario: r.scenario.clone(),
            distribution: r.distribution,
            family: r.family,
            base_override: r.base_override,
            n: r.n,
            a: r.a,
            replications: r.replications,
            d_min: r.d_min,
            d_p0_median: r.d_p0_median,
            rb_median: r.rb_median,
            strength_median: r.strength_median,
            direction_agreement: r.direction_agreement,
            failures: r.failures,
            first_error: r.first_error.clone(),
            d_p0: join(&r.d_p0),
            rb: join(&r.rb),
            strength: join(&r.strength),
        })?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_records_csv<R: Read>(reader: R) -> Result<Vec<ResultRecord>> {
    csv::Reader::from_reader(reader)
        .deserialize::<CsvRecord>()
        .map(|row| {
            let r = row?;
            Ok(ResultRecord {
                scenario: r.scenario,
                distribution: r.distribution,
                family: r.family,
                base_override: r.base_override,
                n: r.n,
                a: r.a,
                replications: r.replications,
                d_min: r.d_min,
                d_p0_median: r.d_p0_median,
                rb_median: r.rb_median,
                strength_median: r.strength_median,
                direction_agreement: r.direction_agreement,
                failures: r.failures,
                first_error: r.first_error,
                d_p0: split(&r.d_p0)?,
                rb: split(&r.rb)?,
                strength: split(&r.strength)?,
            })
        })
        .collect()
}

/// A synthetic stand-in for the 100 Kevlar stress-rupture lifetimes: skewed
/// positive data affinely matched to the published fit, mean 209.171 and
/// variance (divisor n) 37606.56.
pub fn kevlar_standin(seed: u64) -> Vec<f64> {
    const MEAN: f64 = 209.171;
    const VAR: f64 = 37606.56;
    let mut rng = RngStream::new(seed, 0).phase(Phase::Data).rng();
    let expo = ContinuousDistribution::exponential(1.0).expect("valid");
    let raw: Vec<f64> = (0..100).map(|_| expo.sample(&mut rng)).collect();
    let n = raw.len() as f64;
    let m = raw.iter().sum::<f64>() / n;
    let v = raw.iter().map(|x| (x - m).powi(2)).sum::<f64>() / n;
    let k = (VAR / v).sqrt();
    raw.iter().map(|x| MEAN + (x - m) * k).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn medians() {
        assert_eq!(median(&[3.0, 1.0, 2.0]), Some(2.0));
        assert_eq!(median(&[4.0, 1.0, 2.0, 3.0]), Some(2.5));
        assert_eq!(median(&[]), None);
    }

    #[test]
    fn table_shapes() {
        let t1 = table_scenarios(1, 20, 7).unwrap();
        assert_eq!(t1.len(), 12);
        assert!(t1
            .iter()
            .all(|s| s.family == ParametricFamily::LocationNormal && s.d_min && s.n == 20));
        let t2 = table_scenarios(2, 20, 7).unwrap();
        assert_eq!(t2.len(), 3);
        assert_eq!(t2[0].base_override, None);
        assert_eq!(
            t2[1].base_override,
            Some(ContinuousDistribution::normal(0.0, 1.0).unwrap())
        );
        assert_eq!(
            t2[2].base_override,
            Some(ContinuousDistribution::normal(9.0, 1.0).unwrap())
        );
        assert_eq!(
            table_scenarios(3, 1, 0).unwrap()[0].family,
            ParametricFamily::LocationScaleNormal
        );
        assert_eq!(
            table_scenarios(5, 1, 0).unwrap()[0].family,
            ParametricFamily::ScaleExponential
        );
        assert!(table_scenarios(4, 1, 0).is_err());
        // Distinct seeds per row.
        let seeds: std::collections::HashSet<u64> = t1.iter().map(|s| s.seed).collect();
        assert_eq!(seeds.len(), 12);
    }

    #[test]
    fn data_generation_is_reproducible() {
        let s = &table_scenarios(1, 3, 11).unwrap()[6];
        assert_eq!(s.generate_data(2), s.generate_data(2));
        assert_ne!(s.generate_data(1), s.generate_data(2));
    }

    #[test]
    fn scenario_validation() {
        let mut s = table_scenarios(1, 1, 0).unwrap().remove(0);
        s.n = 1;
        assert!(s.validate().is_err());
        s.n = 20;
        s.replications = 0;
        assert!(s.validate().is_err());
        s.replications = 1;
        s.a = vec![];
        assert!(s.validate().is_err());
    }

    #[test]
    fn kevlar_standin_matches_published_fit() {
        let x = kevlar_standin(1);
        assert_eq!(x.len(), 100);
        let fit = ParametricFamily::LocationScaleNormal.fit(&x).unwrap();
        assert!((fit.theta[0] - 209.171).abs() < 1e-9);
        assert!((fit.theta[1] - 37606.56).abs() < 1e-6);
    }

    #[test]
    fn scenario_file_parses() {
        let json = r#"[{"id":"s1","distribution":"t(3)","family":"location-scale-normal",
            "n":20,"a":[1,5],"replications":2,"seed":4,"base_override":null}]"#;
        let s = read_scenarios(json.as_bytes()).unwrap();
        assert_eq!(
            s[0].distribution,
            ContinuousDistribution::student_t(3.0).unwrap()
        );
        assert!(!s[0].d_min);
        assert!(read_scenarios(r#"[{"id":"x"}]"#.as_bytes()).is_err());
        let bad_n = r#"[{"id":"s","distribution":"t(3)","family":"location-normal","n":1,"a":[1],"replications":1,"seed":0}]"#;
        assert!(read_scenarios(bad_n.as_bytes()).is_err());
    }
}
