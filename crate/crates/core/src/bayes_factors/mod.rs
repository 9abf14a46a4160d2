//! Test-based Bayes factors on the log scale under fixed `g`, empirical Bayes
//! and hyperpriors on `g`, plus the exact linear-model Bayes factor used as an
//! oracle.

mod global_eb;
mod incig;
mod min_bf;
mod quadrature;

#[allow(unused_imports)]
use num_traits::Float;

pub use global_eb::{global_eb, global_eb_objective, GlobalEb};
pub use incig::{ln_incig_norm, post_mode_shrinkage, tbf_incig, IncIg};
pub use min_bf::{chi2_isf, chi2_sf, edwards_ratio_at_p, min_bf_identities, MinBfIdentities};
pub use quadrature::{integrate_prior, tbf_nonconjugate, tbf_nonconjugate_with_grid, LogGrid, NonConjugate};

use crate::{Error, Result};

fn check_zd_allow_null(z: f64, d: usize) -> Result<()> {
    if !z.is_finite() || z < 0.0 {
        return Err(Error::domain(alloc::format!("deviance must be finite and >= 0, got {z}")));
    }
    if d == 0 && z != 0.0 {
        return Err(Error::domain("a null model has zero deviance"));
    }
    Ok(())
}

pub(crate) fn check_zd(z: f64, d: usize) -> Result<()> {
    if d == 0 {
        return Err(Error::domain("dimension d must be at least 1"));
    }
    check_zd_allow_null(z, d)
}

pub(crate) fn tbf_fixed_g_unchecked(z: f64, d: usize, g: f64) -> f64 {
    -0.5 * d as f64 * g.ln_1p() + g / (g + 1.0) * 0.5 * z
}

/// Log TBF at a fixed `g`: `-(d/2) ln(g + 1) + (g/(g + 1)) z/2`.
pub fn tbf_fixed_g(z: f64, d: usize, g: f64) -> Result<f64> {
    check_zd(z, d)?;
    if !(g > 0.0) || !g.is_finite() {
        return Err(Error::domain(alloc::format!("g must be positive and finite, got {g}")));
    }
    Ok(tbf_fixed_g_unchecked(z, d, g))
}

/// Local empirical-Bayes estimate `max{z/d - 1, 0}`.
pub fn local_eb_g(z: f64, d: usize) -> Result<f64> {
    check_zd(z, d)?;
    Ok((z / d as f64 - 1.0).max(0.0))
}

/// Log of the maximum TBF, `max{-(d/2) ln(z/d) + (z - d)/2, 0}`.
pub fn max_tbf(z: f64, d: usize) -> Result<f64> {
    check_zd(z, d)?;
    let d = d as f64;
    if z <= d {
        return Ok(0.0);
    }
    Ok((-0.5 * d * (z / d).ln() + 0.5 * (z - d)).max(0.0))
}

/// Local EB shrinkage factor `max{1 - d/z, 0}`.
pub fn leb_shrinkage(z: f64, d: usize) -> Result<f64> {
    check_zd(z, d)?;
    if z == 0.0 {
        return Ok(0.0);
    }
    Ok((1.0 - d as f64 / z).max(0.0))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BiasCorrection {
    pub delta: f64,
    /// `z/n ≥ 1`, where the approximation is not trustworthy.
    pub warning: bool,
}

/// Approximate excess of the maximum TBF over the exact maximum DBF:
/// `max{((d + 1)/(2n))(z - d) - d z/(4n), 0}`.
pub fn tbf_bias_correction(z: f64, d: usize, n: f64) -> Result<BiasCorrection> {
    check_zd(z, d)?;
    let df = d as f64;
    if !(n > df) {
        return Err(Error::domain("bias correction needs n > d"));
    }
    let delta = ((df + 1.0) / (2.0 * n) * (z - df) - df * z / (4.0 * n)).max(0.0);
    Ok(BiasCorrection { delta, warning: z / n >= 1.0 })
}

fn check_linear(r2: f64, n: f64, d: usize) -> Result<()> {
    if r2 == 1.0 {
        return Err(Error::DegenerateFit);
    }
    if !(0.0..1.0).contains(&r2) {
        return Err(Error::domain(alloc::format!("R² must lie in [0, 1), got {r2}")));
    }
    if d == 0 || !(n > d as f64 + 1.0) {
        return Err(Error::domain("linear DBF needs d >= 1 and n > d + 1"));
    }
    Ok(())
}

/// Exact log Bayes factor of the linear model under Zellner's g-prior:
/// `((n - d - 1)/2) ln(1 + g) - ((n - 1)/2) ln(1 + g(1 - R²))`.
pub fn dbf_linear(r2: f64, n: f64, d: usize, g: f64) -> Result<f64> {
    check_linear(r2, n, d)?;
    if !(g > 0.0) || !g.is_finite() {
        return Err(Error::domain("g must be positive and finite"));
    }
    let df = d as f64;
    Ok(0.5 * (n - df - 1.0) * g.ln_1p() - 0.5 * (n - 1.0) * (g * (1.0 - r2)).ln_1p())
}

/// The `g` maximising the linear DBF: `max{F - 1, 0}`.
pub fn linear_eb_g(r2: f64, n: f64, d: usize) -> Result<f64> {
    check_linear(r2, n, d)?;
    let df = d as f64;
    let f = (r2 / df) / ((1.0 - r2) / (n - df - 1.0));
    Ok((f - 1.0).max(0.0))
}

/// Log of the maximum linear DBF.
pub fn max_dbf_linear(r2: f64, n: f64, d: usize) -> Result<f64> {
    let g = linear_eb_g(r2, n, d)?;
    if g == 0.0 {
        return Ok(0.0);
    }
    Ok(dbf_linear(r2, n, d, g)?.max(0.0))
}

/// How `g` is handled when scoring a model.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum GPrior {
    FixedG(f64),
    LocalEb {
        /// Multiply the maximum TBF by `exp(-Δ̃)`.
        bias_correction: bool,
    },
    /// Resolved to a shared fixed `g` once all model deviances are known.
    GlobalEb,
    IncIg {
        a: f64,
        b: f64,
    },
    ZellnerSiow,
    HyperGOverN,
}

impl GPrior {
    pub fn hyper_g() -> Self {
        GPrior::IncIg { a: 1.0, b: 0.0 }
    }

    pub fn zs_adapted(n_eff: f64) -> Self {
        GPrior::IncIg { a: 0.5, b: 0.5 * (n_eff + 3.0) }
    }
}

/// A g-handling scheme together with the sample size it scales with
/// (`n` for GLMs, `n_obs` for Cox).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GPriorSpec {
    pub prior: GPrior,
    pub n_eff: f64,
}

impl GPriorSpec {
    pub fn new(prior: GPrior, n_eff: f64) -> Result<Self> {
        if !(n_eff >= 1.0) {
            return Err(Error::domain("n_eff must be at least 1"));
        }
        match prior {
            GPrior::FixedG(g) if !(g > 0.0) || !g.is_finite() => return Err(Error::domain("fixed g must be positive")),
            GPrior::IncIg { a, b } => {
                IncIg::new(a, b)?;
            }
            _ => {}
        }
        Ok(Self { prior, n_eff })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BfResult {
    pub log_tbf: f64,
    /// The `g` plugged in, for fixed and empirical-Bayes schemes.
    pub g_point: Option<f64>,
    /// Posterior mode of `t = g/(g + 1)` where it has a closed form.
    pub shrinkage_mode: Option<f64>,
    /// Set when the bias correction was requested outside its validity range.
    pub warning: bool,
}

impl BfResult {
    fn null() -> Self {
        Self { log_tbf: 0.0, g_point: None, shrinkage_mode: None, warning: false }
    }
}

/// Log TBF of a model with deviance `z` on `d` degrees of freedom. The null
/// model (`d = 0`) scores 0. [`GPrior::GlobalEb`] must be resolved to a fixed
/// `g` first, see [`global_eb`].
pub fn score(z: f64, d: usize, spec: &GPriorSpec) -> Result<BfResult> {
    if d == 0 {
        check_zd_allow_null(z, d)?;
        return Ok(BfResult::null());
    }
    check_zd(z, d)?;
    Ok(match spec.prior {
        GPrior::FixedG(g) => BfResult {
            log_tbf: tbf_fixed_g(z, d, g)?,
            g_point: Some(g),
            shrinkage_mode: Some(g / (g + 1.0)),
            warning: false,
        },
        GPrior::LocalEb { bias_correction } => {
            let mut log_tbf = max_tbf(z, d)?;
            let mut warning = false;
            if bias_correction {
                let bc = tbf_bias_correction(z, d, spec.n_eff)?;
                log_tbf -= bc.delta;
                warning = bc.warning;
            }
            BfResult { log_tbf, g_point: Some(local_eb_g(z, d)?), shrinkage_mode: Some(leb_shrinkage(z, d)?), warning }
        }
        GPrior::GlobalEb => {
            return Err(Error::Unsupported(
                "global EB scores need the shared g from global_eb; score with FixedG".into(),
            ))
        }
        GPrior::IncIg { a, b } => BfResult {
            log_tbf: tbf_incig(z, d, a, b)?,
            g_point: None,
            shrinkage_mode: Some(post_mode_shrinkage(z, d, a, b)?),
            warning: false,
        },
        GPrior::ZellnerSiow => BfResult {
            log_tbf: tbf_nonconjugate(z, d, NonConjugate::ZellnerSiow, spec.n_eff)?,
            g_point: None,
            shrinkage_mode: None,
            warning: false,
        },
        GPrior::HyperGOverN => BfResult {
            log_tbf: tbf_nonconjugate(z, d, NonConjugate::HyperGOverN, spec.n_eff)?,
            g_point: None,
            shrinkage_mode: None,
            warning: false,
        },
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn fixed_g_examples() {
        assert!(tbf_fixed_g(5.0, 3, 1e-12).unwrap().abs() < 1e-10);
        assert_relative_eq!(tbf_fixed_g(0.0, 2, 3.0).unwrap(), -(4.0f64).ln(), epsilon = 1e-15);
        assert_relative_eq!(tbf_fixed_g(10.0, 2, 4.0).unwrap().exp(), 4f64.exp() / 5.0, max_relative = 1e-14);
        assert!(tbf_fixed_g(f64::NAN, 2, 1.0).is_err());
    }

    #[test]
    fn local_eb_examples() {
        assert_eq!(local_eb_g(10.0, 2).unwrap(), 4.0);
        assert_eq!(local_eb_g(2.0, 2).unwrap(), 0.0);
        assert_eq!(local_eb_g(1.0, 5).unwrap(), 0.0);
        assert_eq!(leb_shrinkage(10.0, 2).unwrap(), 0.8);
        assert_eq!(leb_shrinkage(2.0, 2).unwrap(), 0.0);
        assert!(leb_shrinkage(2.0, 0).is_err());
    }

    #[test]
    fn max_tbf_examples() {
        assert_eq!(max_tbf(1.5, 2).unwrap(), 0.0);
        assert_relative_eq!(max_tbf(10.0, 2).unwrap(), 4.0 - 5f64.ln(), epsilon = 1e-14);
        assert_relative_eq!(max_tbf(10.0, 2).unwrap(), 2.390_562_087_565_899, epsilon = 1e-12);
    }

    #[test]
    fn bias_correction_examples() {
        let bc = tbf_bias_correction(100.0, 1, 1000.0).unwrap();
        assert_relative_eq!(bc.delta, 0.074, epsilon = 1e-15);
        assert!(!bc.warning);
        assert_eq!(tbf_bias_correction(3.0, 3, 50.0).unwrap().delta, 0.0);
        assert!(tbf_bias_correction(60.0, 1, 50.0).unwrap().warning);
    }

    #[test]
    fn linear_dbf_examples() {
        let g = 7.0;
        assert_relative_eq!(dbf_linear(0.0, 50.0, 3, g).unwrap(), -1.5 * 8f64.ln(), epsilon = 1e-12);
        assert!(dbf_linear(0.4, 50.0, 3, 1e-12).unwrap().abs() < 1e-9);
        assert_eq!(dbf_linear(1.0, 50.0, 3, g).unwrap_err(), Error::DegenerateFit);
        assert_eq!(max_dbf_linear(0.0, 50.0, 3).unwrap(), 0.0);
        assert_eq!(max_dbf_linear(0.01, 50.0, 3).unwrap(), 0.0);
    }

    #[test]
    fn null_model_scores_zero() {
        let spec = GPriorSpec::new(GPrior::ZellnerSiow, 100.0).unwrap();
        assert_eq!(score(0.0, 0, &spec).unwrap().log_tbf, 0.0);
    }

    #[test]
    fn global_eb_is_not_scored_directly() {
        let spec = GPriorSpec::new(GPrior::GlobalEb, 100.0).unwrap();
        assert!(matches!(score(4.0, 1, &spec), Err(Error::Unsupported(_))));
    }
}
