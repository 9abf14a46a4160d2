#[allow(unused_imports)]
use num_traits::Float;

use super::max_tbf;
use crate::special::{inv_gamma_q, ln_gamma_q, normal_isf};
use crate::Result;

/// Classical minimum-Bayes-factor bounds next to the reciprocal maximum TBF.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MinBfIdentities {
    /// `1 / mTBF`.
    pub inv_mtbf: f64,
    /// Upper-tail χ²(d) p-value of `z`.
    pub p_value: f64,
    /// `q e^{-q²/2} √e` with `q = Φ⁻¹(1 - p/2)`; `d = 1` only.
    pub bsb: Option<f64>,
    /// `-e p ln p`; `d = 2` only.
    pub selke: Option<f64>,
    /// `inv_mtbf / e^{-q²/2}` with the one-sided `q = Φ⁻¹(1 - p)`.
    pub edwards_ratio: f64,
}

/// Upper-tail χ²(d) p-value.
pub fn chi2_sf(z: f64, d: usize) -> f64 {
    ln_gamma_q(0.5 * d as f64, 0.5 * z).exp()
}

/// The `z` whose upper-tail χ²(d) p-value is `p`.
pub fn chi2_isf(p: f64, d: usize) -> f64 {
    2.0 * inv_gamma_q(0.5 * d as f64, p)
}

pub fn min_bf_identities(z: f64, d: usize) -> Result<MinBfIdentities> {
    super::check_zd(z, d)?;
    let inv_mtbf = (-max_tbf(z, d)?).exp();
    let p = chi2_sf(z, d);
    let bsb = (d == 1).then(|| {
        let q = normal_isf(0.5 * p);
        q * (-0.5 * q * q).exp() * 0.5f64.exp()
    });
    let selke = (d == 2).then(|| -core::f64::consts::E * p * p.ln());
    let q = normal_isf(p);
    let edwards_ratio = inv_mtbf / (-0.5 * q * q).exp();
    Ok(MinBfIdentities { inv_mtbf, p_value: p, bsb, selke, edwards_ratio })
}

/// `1 / mTBF` over the Edwards et al. bound `e^{-q²/2}` at a fixed p-value.
pub fn edwards_ratio_at_p(p: f64, d: usize) -> Result<f64> {
    let z = chi2_isf(p, d);
    Ok(min_bf_identities(z, d)?.edwards_ratio)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn one_degree_of_freedom() {
        let m = min_bf_identities(4.0, 1).unwrap();
        assert_relative_eq!(m.inv_mtbf, 2.0 * (-1.5f64).exp(), max_relative = 1e-14);
        assert_relative_eq!(m.bsb.unwrap(), m.inv_mtbf, max_relative = 1e-12);
    }

    #[test]
    fn two_degrees_of_freedom() {
        let m = min_bf_identities(6.0, 2).unwrap();
        assert_relative_eq!(m.p_value, (-3.0f64).exp(), max_relative = 1e-14);
        assert_relative_eq!(m.selke.unwrap(), 3.0 * (-2.0f64).exp(), max_relative = 1e-12);
        assert_relative_eq!(m.inv_mtbf, 3.0 * (-2.0f64).exp(), max_relative = 1e-12);
    }
}
