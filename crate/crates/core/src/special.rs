//! Special functions that the distribution layer and the Dirichlet process
//! sampler need beyond what `statrs` provides.
//!
//! The central piece is the inverse of the regularized upper incomplete gamma
//! function for very small shapes. With `shape = a / N` around `1e-3` the
//! quantiles span hundreds of orders of magnitude, so everything is solved
//! for `ln x` and the tails are evaluated in log space.

use statrs::function::gamma::ln_gamma;

use crate::error::{Error, Result};

const EPS: f64 = f64::EPSILON;
const MAX_ITER: usize = 500;

/// `ln P(shape, x)` for `x = exp(ln_x)`, the log of the regularized lower
/// incomplete gamma function.
///
/// Stays finite when `x` underflows: as `x -> 0`,
/// `ln P ~ shape * ln_x - ln Γ(shape + 1)`.
pub fn ln_lower_gamma_reg(shape: f64, ln_x: f64) -> f64 {
    Tails::new(shape).ln_lower(ln_x)
}

/// `ln Q(shape, x)` for `x = exp(ln_x)`, the log of the regularized upper
/// incomplete gamma function (the co-cdf of gamma(shape, 1)).
pub fn ln_upper_gamma_reg(shape: f64, ln_x: f64) -> f64 {
    Tails::new(shape).ln_upper(ln_x)
}

// Tail evaluations for one shape with the gamma constants computed once.
struct Tails {
    shape: f64,
    ln_gamma: f64,
    ln_gamma1: f64,
}

impl Tails {
    fn new(shape: f64) -> Self {
        let ln_gamma = ln_gamma(shape);
        Tails {
            shape,
            ln_gamma,
            ln_gamma1: ln_gamma + shape.ln(),
        }
    }

    fn ln_lower(&self, ln_x: f64) -> f64 {
        let x = ln_x.exp();
        if x < self.shape + 1.0 {
            self.ln_lower_series(ln_x, x)
        } else {
            (-self.ln_upper_fraction(ln_x, x).exp()).ln_1p()
        }
    }

    fn ln_upper(&self, ln_x: f64) -> f64 {
        let x = ln_x.exp();
        if x < self.shape + 1.0 {
            (-self.ln_lower_series(ln_x, x).exp()).ln_1p()
        } else {
            self.ln_upper_fraction(ln_x, x)
        }
    }

    // ln(x * gamma density at x).
    fn ln_density_times_x(&self, ln_x: f64) -> f64 {
        self.shape * ln_x - ln_x.exp() - self.ln_gamma
    }

    // Σ_k x^k / ((s+1)(s+2)...(s+k)) times the prefactor.
    fn ln_lower_series(&self, ln_x: f64, x: f64) -> f64 {
        let mut term = 1.0;
        let mut sum = 1.0;
        let mut denom = self.shape;
        for _ in 0..MAX_ITER {
            denom += 1.0;
            term *= x / denom;
            sum += term;
            if term < sum * EPS {
                break;
            }
        }
        self.shape * ln_x - x - self.ln_gamma1 + sum.ln()
    }

    // Modified Lentz continued fraction, valid for x >= s + 1.
    fn ln_upper_fraction(&self, ln_x: f64, x: f64) -> f64 {
        const TINY: f64 = 1e-300;
        let shape = self.shape;
        let mut b = x + 1.0 - shape;
        let mut c = 1.0 / TINY;
        let mut d = 1.0 / b;
        let mut h = d;
        for i in 1..MAX_ITER {
            let an = -(i as f64) * (i as f64 - shape);
            b += 2.0;
            d = an * d + b;
            if d.abs() < TINY {
                d = TINY;
            }
            c = b + an / c;
            if c.abs() < TINY {
                c = TINY;
            }
            d = 1.0 / d;
            let delta = d * c;
            h *= delta;
            if (delta - 1.0).abs() < EPS {
                break;
            }
        }
        shape * ln_x - x - self.ln_gamma + h.ln()
    }
}

/// The `(1 - p)`-quantile of gamma(shape, 1): the `x >= 0` whose co-cdf
/// `Q(shape, x)` equals `p`.
///
/// For tiny shapes the result may underflow to `0.0`; use
/// [`ln_gamma_co_quantile`] when the logarithm is needed.
pub fn gamma_co_quantile(shape: f64, p: f64) -> Result<f64> {
    check_co_quantile_args(shape, p)?;
    Ok(ln_gamma_co_quantile(shape, p, 1.0 - p).exp())
}

fn check_co_quantile_args(shape: f64, p: f64) -> Result<()> {
    if !(shape > 0.0 && shape.is_finite()) {
        return Err(Error::domain(format!(
            "gamma shape must be positive, got {shape}"
        )));
    }
    if !(p > 0.0 && p < 1.0) {
        return Err(Error::domain(format!(
            "probability must lie in (0, 1), got {p}"
        )));
    }
    Ok(())
}

/// `ln` of the gamma co-quantile, taking the upper-tail target `p` and its
/// complement `q = 1 - p` separately so callers that know `q` more precisely
/// than `1 - p` can pass it.
///
/// Arguments are not validated; `shape > 0`, `p, q > 0` and `p + q ≈ 1` are
/// the caller's responsibility.
pub fn ln_gamma_co_quantile(shape: f64, p: f64, q: f64) -> f64 {
    GammaCoQuantile::new(shape).ln_solve(p, q)
}

/// Repeated co-quantile solves at a fixed shape.
pub struct GammaCoQuantile(Tails);

impl GammaCoQuantile {
    pub fn new(shape: f64) -> Self {
        GammaCoQuantile(Tails::new(shape))
    }

    /// Same contract as [`ln_gamma_co_quantile`].
    pub fn ln_solve(&self, p: f64, q: f64) -> f64 {
        let tails = &self.0;
        // Small-x guess from the leading series term, ln P ≈ s t - ln Γ(s + 1),
        // and large-x guess from Q ≈ e^{-x}. Start from the smaller.
        let small_x = (q.ln() + tails.ln_gamma1) / tails.shape;
        let large_x = (-p.ln()).max(1e-3).ln();
        let guess = small_x.min(large_x);
        // Solve on whichever tail has the smaller target; its log is better
        // conditioned.
        if q <= p {
            let target = q.ln();
            solve_increasing(
                |t| {
                    let lp = tails.ln_lower(t);
                    (lp - target, tails.ln_density_times_x(t) - lp)
                },
                guess,
            )
        } else {
            let target = p.ln();
            // Q is decreasing in t, so negate both value and slope.
            solve_increasing(
                |t| {
                    let lq = tails.ln_upper(t);
                    (target - lq, tails.ln_density_times_x(t) - lq)
                },
                guess,
            )
        }
    }
}

// Safeguarded Newton for an increasing function. `f` returns the value and
// the log of the slope. Steps are capped by a doubling width until both
// bracket ends are known; after that, steps that leave it bisect.
fn solve_increasing(f: impl Fn(f64) -> (f64, f64), guess: f64) -> f64 {
    let (mut lo, mut hi) = (f64::NEG_INFINITY, f64::INFINITY);
    let mut t = guess;
    let mut width = 1.0;
    for _ in 0..MAX_ITER {
        let (ft, ln_slope) = f(t);
        if ft == 0.0 {
            return t;
        }
        if ft < 0.0 {
            lo = t;
        } else {
            hi = t;
        }
        let mut next = t - ft / ln_slope.exp();
        if !(lo.is_finite() && hi.is_finite()) {
            // A flat tail can throw Newton far past the root, so cap the step.
            if !next.is_finite() || (next - t).abs() > width {
                next = t + width.copysign(-ft);
                width *= 2.0;
            }
        } else if !(next > lo && next < hi) {
            next = 0.5 * (lo + hi);
        }
        let tol = 4.0 * EPS * t.abs().max(1.0);
        if (next - t).abs() <= tol || hi - lo <= tol {
            return next;
        }
        t = next;
    }
    t
}

/// Invert a nondecreasing function by bracketing followed by safeguarded
/// regula falsi (Illinois variant). `start` seeds the bracket search and
/// `scale` is its initial half-width.
pub(crate) fn invert_monotone(f: impl Fn(f64) -> f64, target: f64, start: f64, scale: f64) -> f64 {
    let g = |x: f64| f(x) - target;
    let mut step = scale.max(1e-300);
    let (mut lo, mut hi) = (start - step, start + step);
    let mut glo = g(lo);
    let mut ghi = g(hi);
    while glo > 0.0 {
        step *= 2.0;
        hi = lo;
        ghi = glo;
        lo = start - step;
        glo = g(lo);
        if !lo.is_finite() {
            return f64::NEG_INFINITY;
        }
    }
    while ghi < 0.0 {
        step *= 2.0;
        lo = hi;
        glo = ghi;
        hi = start + step;
        ghi = g(hi);
        if !hi.is_finite() {
            return f64::INFINITY;
        }
    }
    let mut side = 0i8;
    for _ in 0..MAX_ITER {
        if ghi == glo {
            break;
        }
        let mut x = (lo * ghi - hi * glo) / (ghi - glo);
        if !(x > lo && x < hi) {
            x = 0.5 * (lo + hi);
        }
        let gx = g(x);
        if gx == 0.0 {
            return x;
        }
        if gx < 0.0 {
            lo = x;
            glo = gx;
            if side == -1 {
                ghi *= 0.5;
            }
            side = -1;
        } else {
            hi = x;
            ghi = gx;
            if side == 1 {
                glo *= 0.5;
            }
            side = 1;
        }
        if hi - lo <= 2.0 * EPS * x.abs().max(f64::MIN_POSITIVE) {
            break;
        }
    }
    0.5 * (lo + hi)
}
