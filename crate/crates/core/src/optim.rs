//! Derivative-free minimization (Nelder–Mead simplex).

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy)]
pub struct NelderMead {
    pub max_iter: usize,
    /// Stop when the spread of function values over the simplex falls below
    /// this.
    pub f_tol: f64,
    /// ...and the simplex diameter falls below this.
    pub x_tol: f64,
    /// Initial simplex edge length.
    pub step: f64,
}

impl Default for NelderMead {
    fn default() -> Self {
        Self {
            max_iter: 2000,
            f_tol: 1e-13,
            x_tol: 1e-7,
            step: 0.25,
        }
    }
}

#[derive(Debug, Clone)]
pub struct Minimum {
    pub point: Vec<f64>,
    pub value: f64,
    pub iterations: usize,
}

impl NelderMead {
    pub fn minimize(&self, f: impl Fn(&[f64]) -> f64, start: &[f64]) -> Result<Minimum> {
        let dim = start.len();
        if dim == 0 {
            return Err(Error::domain("cannot minimize over zero parameters"));
        }
        let mut simplex: Vec<Vec<f64>> = vec![start.to_vec()];
        for i in 0..dim {
            let mut v = start.to_vec();
            v[i] += self.step;
            simplex.push(v);
        }
        let mut values: Vec<f64> = simplex.iter().map(|v| f(v)).collect();

        for iter in 0..self.max_iter {
            let mut order: Vec<usize> = (0..=dim).collect();
            order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
            simplex = order.iter().map(|&i| simplex[i].clone()).collect();
            values = order.iter().map(|&i| values[i]).collect();

            let spread = values[dim] - values[0];
            let diameter = simplex[1..]
                .iter()
                .map(|v| {
                    v.iter()
                        .zip(&simplex[0])
                        .map(|(a, b)| (a - b).abs())
                        .fold(0.0, f64::max)
                })
                .fold(0.0, f64::max);
            if spread.abs() <= self.f_tol && diameter <= self.x_tol {
                return Ok(Minimum {
                    point: simplex[0].clone(),
                    value: values[0],
                    iterations: iter,
                });
            }

            let centroid: Vec<f64> = (0..dim)
                .map(|j| simplex[..dim].iter().map(|v| v[j]).sum::<f64>() / dim as f64)
                .collect();
            let along = |t: f64| -> Vec<f64> {
                centroid
                    .iter()
                    .zip(&simplex[dim])
                    .map(|(c, w)| c + t * (w - c))
                    .collect()
            };

            let reflected = along(-1.0);
            let fr = f(&reflected);
            if fr < values[0] {
                let expanded = along(-2.0);
                let fe = f(&expanded);
                if fe < fr {
                    simplex[dim] = expanded;
                    values[dim] = fe;
                } else {
                    simplex[dim] = reflected;
                    values[dim] = fr;
                }
            } else if fr < values[dim - 1] {
                simplex[dim] = reflected;
                values[dim] = fr;
            } else {
                let (contracted, fc) = if fr < values[dim] {
                    let c = along(-0.5);
                    let fc = f(&c);
                    (c, fc)
                } else {
                    let c = along(0.5);
                    let fc = f(&c);
                    (c, fc)
                };
                if fc < values[dim].min(fr) {
                    simplex[dim] = contracted;
                    values[dim] = fc;
                } else {
                    // Shrink towards the best vertex.
                    let best = simplex[0].clone();
                    for k in 1..=dim {
                        for j in 0..dim {
                            simplex[k][j] = best[j] + 0.5 * (simplex[k][j] - best[j]);
                        }
                        values[k] = f(&simplex[k]);
                    }
                }
            }
        }

        let best = (0..=dim)
            .min_by(|&a, &b| values[a].total_cmp(&values[b]))
            .unwrap();
        Err(Error::NoConvergence {
            iterations: self.max_iter,
            best_value: values[best],
            best_point: simplex[best].clone(),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rosenbrock() {
        let nm = NelderMead {
            max_iter: 10_000,
            x_tol: 1e-9,
            f_tol: 1e-18,
            ..Default::default()
        };
        let m = nm
            .minimize(
                |v| (1.0 - v[0]).powi(2) + 100.0 * (v[1] - v[0] * v[0]).powi(2),
                &[-1.2, 1.0],
            )
            .unwrap();
        assert!((m.point[0] - 1.0).abs() < 1e-6 && (m.point[1] - 1.0).abs() < 1e-6);
    }

    #[test]
    fn one_dimensional_quadratic() {
        let m = NelderMead::default()
            .minimize(|v| (v[0] - 3.0).powi(2) + 2.0, &[0.0])
            .unwrap();
        assert!((m.point[0] - 3.0).abs() < 1e-6);
        assert!((m.value - 2.0).abs() < 1e-12);
    }

    #[test]
    fn reports_best_so_far_on_failure() {
        let nm = NelderMead {
            max_iter: 3,
            ..Default::default()
        };
        match nm.minimize(|v| v[0] * v[0] + v[1] * v[1], &[5.0, 5.0]) {
            Err(Error::NoConvergence {
                best_point,
                best_value,
                ..
            }) => {
                assert_eq!(best_point.len(), 2);
                assert!(best_value < 50.0);
            }
            other => panic!("expected NoConvergence, got {other:?}"),
        }
    }
}
