#[allow(unused_imports)]
use num_traits::Float;

use crate::special::{inv_gamma_p_ln, ln_gamma, ln_gamma_p, ln_gamma_series};
use crate::{Error, Result};

/// `ln M(a, b)`, the log normalising constant of `IncIG(a, b)`:
/// `M(a, b) = b^a / (Γ(a) P(a, b))`, with `M(a, 0) = a`.
pub fn ln_incig_norm(a: f64, b: f64) -> f64 {
    if b == 0.0 {
        return a.ln();
    }
    if b < a + 1.0 {
        // P(a, b) = b^a e^{-b} S(a, b) / Γ(a), so the powers and Γ cancel
        b - ln_gamma_series(a, b)
    } else {
        a * b.ln() - ln_gamma(a) - ln_gamma_p(a, b)
    }
}

/// Incomplete inverse-gamma distribution on `g > 0` with density
/// `M(a, b) (g + 1)^{-(a+1)} exp(-b / (g + 1))`.
///
/// `V = b / (g + 1)` is Gamma(a, 1) truncated to `(0, b)`; every function
/// below goes through that representation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IncIg {
    pub a: f64,
    pub b: f64,
}

impl IncIg {
    pub fn new(a: f64, b: f64) -> Result<Self> {
        if !(a > 0.0) || !(b >= 0.0) || !a.is_finite() || !b.is_finite() {
            return Err(Error::domain("IncIG needs a > 0 and b >= 0"));
        }
        Ok(Self { a, b })
    }

    pub fn hyper_g() -> Self {
        Self { a: 1.0, b: 0.0 }
    }

    /// The Zellner-Siow adapted prior, IncIG(1/2, (n + 3)/2).
    pub fn zs_adapted(n: f64) -> Self {
        Self { a: 0.5, b: 0.5 * (n + 3.0) }
    }

    /// Conjugate update by a deviance `z` on `d` degrees of freedom.
    pub fn posterior(&self, z: f64, d: usize) -> Self {
        Self { a: self.a + 0.5 * d as f64, b: self.b + 0.5 * z }
    }

    pub fn ln_norm(&self) -> f64 {
        ln_incig_norm(self.a, self.b)
    }

    pub fn ln_pdf(&self, g: f64) -> f64 {
        if g < 0.0 {
            return f64::NEG_INFINITY;
        }
        self.ln_norm() - (self.a + 1.0) * g.ln_1p() - self.b / (g + 1.0)
    }

    pub fn cdf(&self, g: f64) -> f64 {
        if g <= 0.0 {
            return 0.0;
        }
        if g.is_infinite() {
            return 1.0;
        }
        if self.b == 0.0 {
            return -(-self.a * g.ln_1p()).exp_m1();
        }
        let ln_ratio = ln_gamma_p(self.a, self.b / (g + 1.0)) - ln_gamma_p(self.a, self.b);
        -ln_ratio.exp_m1()
    }

    /// Quantile function. `p = 1` is infinite and rejected.
    pub fn quantile(&self, p: f64) -> Result<f64> {
        if !(0.0..1.0).contains(&p) {
            return if p == 1.0 {
                Err(Error::InfiniteQuantile)
            } else {
                Err(Error::domain("quantile level outside [0, 1)"))
            };
        }
        if p == 0.0 {
            return Ok(0.0);
        }
        if self.b == 0.0 {
            return Ok((-(-p).ln_1p() / self.a).exp_m1());
        }
        let target = (-p).ln_1p() + ln_gamma_p(self.a, self.b);
        let v = inv_gamma_p_ln(self.a, target);
        Ok((self.b / v - 1.0).max(0.0))
    }

    /// Mode of `g`.
    pub fn mode(&self) -> f64 {
        (self.b / (self.a + 1.0) - 1.0).max(0.0)
    }

    /// Mode of the shrinkage factor `t = g / (g + 1)`.
    pub fn mode_t(&self) -> f64 {
        if self.b == 0.0 {
            return if self.a >= 1.0 { 0.0 } else { 1.0 };
        }
        (1.0 - (self.a - 1.0) / self.b).clamp(0.0, 1.0)
    }

    /// `E[1 / (g + 1)]`, i.e. `1 - E[t]`.
    pub fn mean_inv_one_plus_g(&self) -> f64 {
        let (a, b) = (self.a, self.b);
        if b < a + 1.0 {
            (ln_gamma_series(a + 1.0, b) - ln_gamma_series(a, b)).exp()
        } else {
            (a.ln() + ln_gamma_p(a + 1.0, b) - b.ln() - ln_gamma_p(a, b)).exp()
        }
    }

    /// Posterior mean of the shrinkage factor.
    pub fn mean_t(&self) -> f64 {
        1.0 - self.mean_inv_one_plus_g()
    }
}

/// Log TBF under an `IncIG(a, b)` hyperprior on `g`.
pub fn tbf_incig(z: f64, d: usize, a: f64, b: f64) -> Result<f64> {
    super::check_zd(z, d)?;
    let prior = IncIg::new(a, b)?;
    let post = prior.posterior(z, d);
    let value = prior.ln_norm() - post.ln_norm() + 0.5 * z;
    if !value.is_finite() {
        return Err(Error::Numeric(alloc::format!("IncIG log TBF not finite for z = {z}, d = {d}, a = {a}, b = {b}")));
    }
    Ok(value)
}

/// Posterior mode of `t` under `IncIG(a, b)`: `max{1 - (a + d/2 - 1)/(b + z/2), 0}`.
pub fn post_mode_shrinkage(z: f64, d: usize, a: f64, b: f64) -> Result<f64> {
    super::check_zd(z, d)?;
    IncIg::new(a, b)?;
    let num = a + d as f64 / 2.0 - 1.0;
    let den = b + z / 2.0;
    if den == 0.0 {
        return Ok(0.0);
    }
    Ok((1.0 - num / den).max(0.0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn norm_is_continuous_at_zero() {
        for &a in &[0.5, 1.0, 3.5] {
            assert_relative_eq!(ln_incig_norm(a, 1e-12), a.ln(), epsilon = 1e-10);
        }
    }

    #[test]
    fn norm_branches_agree() {
        // b just below and above the series/continued-fraction switch
        for &a in &[0.5, 2.0, 10.0] {
            let lo = ln_incig_norm(a, a + 1.0 - 1e-9);
            let hi = ln_incig_norm(a, a + 1.0 + 1e-9);
            assert_relative_eq!(lo, hi, epsilon = 1e-8);
        }
    }

    #[test]
    fn hyper_g_at_zero_deviance() {
        for d in 1..6 {
            let v = tbf_incig(0.0, d, 1.0, 0.0).unwrap();
            assert_relative_eq!(v, (2.0 / (d as f64 + 2.0)).ln(), epsilon = 1e-14);
        }
    }

    #[test]
    fn closed_form_quantiles() {
        let h = IncIg::hyper_g();
        assert_relative_eq!(h.quantile(0.5).unwrap(), 1.0, epsilon = 1e-14);
        assert_eq!(h.quantile(0.0).unwrap(), 0.0);
        assert_eq!(IncIg::new(3.0, 10.0).unwrap().quantile(0.0).unwrap(), 0.0);
        assert_eq!(h.quantile(1.0).unwrap_err(), Error::InfiniteQuantile);
    }

    #[test]
    fn mode_matches_shrinkage_mode() {
        let zs = IncIg::zs_adapted(100.0);
        assert_relative_eq!(zs.mode(), 100.0 / 3.0, epsilon = 1e-12);
        assert_relative_eq!(post_mode_shrinkage(10.0, 1, 1.0, 0.0).unwrap(), 0.9);
    }
}
