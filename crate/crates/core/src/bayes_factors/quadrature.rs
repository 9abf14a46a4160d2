use alloc::vec::Vec;

#[allow(unused_imports)]
use num_traits::Float;

use crate::{Error, Result};

const START_INTERVALS: usize = 256;
const MAX_INTERVALS: usize = 1 << 18;
const REL_TOL: f64 = 1e-6;

/// Hyperpriors on `g` without a closed-form TBF.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum NonConjugate {
    /// `g ~ IG(1/2, n/2)`.
    ZellnerSiow,
    /// `(g/n) / (g/n + 1) ~ U(0, 1)`.
    HyperGOverN,
}

/// Log integrand values on the quadrature nodes, kept for sampling `g`.
///
/// Nodes are `s ∈ [0, 1]` with `u = g / (g + n) = 1 - s²`; the table holds
/// the unnormalised log posterior density of `s`.
#[derive(Debug, Clone, PartialEq)]
pub struct LogGrid {
    pub s: Vec<f64>,
    pub log_density: Vec<f64>,
    pub n_eff: f64,
}

impl LogGrid {
    /// Map a node coordinate back to `g`.
    pub fn g_at(&self, s: f64) -> f64 {
        g_of_s(s, self.n_eff)
    }
}

/// `g` at `s`: `u = (1 - s)(1 + s)` avoids cancellation near `s = 1`.
pub(crate) fn g_of_s(s: f64, n: f64) -> f64 {
    if s <= 0.0 {
        return f64::INFINITY;
    }
    let u = (1.0 - s) * (1.0 + s);
    n * u / (s * s)
}

/// Log prior density of `s`.
///
/// Zellner-Siow: in `u` the density is `(2π)^{-1/2} u^{-3/2} (1-u)^{-1/2}
/// exp(-(1-u)/(2u))`, whose `(1-u)^{-1/2}` endpoint singularity the
/// substitution `s = √(1-u)` absorbs. Hyper-g/n: `u` is uniform, so `2s`.
pub(crate) fn ln_prior_s(prior: NonConjugate, s: f64) -> f64 {
    match prior {
        NonConjugate::ZellnerSiow => {
            let u = (1.0 - s) * (1.0 + s);
            if u <= 0.0 {
                return f64::NEG_INFINITY;
            }
            0.5 * (2.0 / core::f64::consts::PI).ln() - 1.5 * u.ln() - s * s / (2.0 * u)
        }
        NonConjugate::HyperGOverN => {
            if s <= 0.0 {
                f64::NEG_INFINITY
            } else {
                (2.0 * s).ln()
            }
        }
    }
}

/// `ln ∫ p(g) exp(log_f(g)) dg` under a non-conjugate hyperprior, by composite
/// Simpson in `s`, doubling the grid until two levels agree to 1e-6 relative.
pub fn integrate_prior(prior: NonConjugate, n_eff: f64, log_f: impl Fn(f64) -> f64) -> Result<(f64, LogGrid)> {
    if !(n_eff >= 1.0) {
        return Err(Error::domain("n_eff must be at least 1"));
    }
    let eval = |s: f64| -> f64 {
        let lp = ln_prior_s(prior, s);
        if lp == f64::NEG_INFINITY {
            return lp;
        }
        let v = lp + log_f(g_of_s(s, n_eff));
        if v.is_nan() {
            f64::NEG_INFINITY
        } else {
            v
        }
    };

    let mut intervals = START_INTERVALS;
    let mut values: Vec<f64> = (0..=intervals).map(|i| eval(i as f64 / intervals as f64)).collect();
    let mut previous = simpson_log(&values);
    while intervals < MAX_INTERVALS {
        // interleave midpoints so every level reuses the previous evaluations
        let finer = intervals * 2;
        let mut next = Vec::with_capacity(finer + 1);
        for (i, v) in values.iter().enumerate() {
            next.push(*v);
            if i < intervals {
                next.push(eval((2 * i + 1) as f64 / finer as f64));
            }
        }
        values = next;
        intervals = finer;
        let current = simpson_log(&values);
        let settled = if current == f64::NEG_INFINITY && previous == f64::NEG_INFINITY {
            true
        } else {
            (current - previous).exp_m1().abs() < REL_TOL
        };
        if settled {
            if !current.is_finite() {
                return Err(Error::Numeric("integral vanished on the quadrature grid".into()));
            }
            let s = (0..=intervals).map(|i| i as f64 / intervals as f64).collect();
            return Ok((current, LogGrid { s, log_density: values, n_eff }));
        }
        previous = current;
    }
    Err(Error::Integration { coarse: previous, fine: simpson_log(&values) })
}

/// Log of the composite Simpson sum of `exp(values)` on a uniform grid over [0, 1].
fn simpson_log(values: &[f64]) -> f64 {
    let m = values.len() - 1;
    let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if max == f64::NEG_INFINITY {
        return max;
    }
    let h = 1.0 / m as f64;
    let mut sum = 0.0;
    for (i, v) in values.iter().enumerate() {
        let w = if i == 0 || i == m {
            1.0
        } else if i % 2 == 1 {
            4.0
        } else {
            2.0
        };
        sum += w * (v - max).exp();
    }
    max + (sum * h / 3.0).ln()
}

/// Log TBF under a non-conjugate hyperprior, with the retained grid.
pub fn tbf_nonconjugate_with_grid(z: f64, d: usize, prior: NonConjugate, n_eff: f64) -> Result<(f64, LogGrid)> {
    super::check_zd(z, d)?;
    let half_d = 0.5 * d as f64;
    integrate_prior(prior, n_eff, |g| {
        if g.is_infinite() {
            return f64::NEG_INFINITY;
        }
        -half_d * g.ln_1p() + g / (g + 1.0) * 0.5 * z
    })
}

pub fn tbf_nonconjugate(z: f64, d: usize, prior: NonConjugate, n_eff: f64) -> Result<f64> {
    tbf_nonconjugate_with_grid(z, d, prior, n_eff).map(|(v, _)| v)
}
