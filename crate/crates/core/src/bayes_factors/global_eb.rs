use alloc::vec::Vec;

#[allow(unused_imports)]
use num_traits::Float;

use super::tbf_fixed_g_unchecked;
use crate::special::log_sum_exp;
use crate::{Error, Result};

const GOLDEN: f64 = 0.618_033_988_749_894_8;
const SCAN_POINTS: usize = 200;
const TOL: f64 = 1e-6;

/// Global empirical-Bayes estimate of `g`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GlobalEb {
    pub g: f64,
    /// Maximised `ln Σ_j TBF_j(g) p(M_j)`.
    pub objective: f64,
    /// Every model is the null model, so the objective does not depend on `g`.
    pub flat: bool,
}

/// The objective `ln Σ_j exp(log TBF_j(g) + log prior_j)` for models given as
/// `(z, d)` pairs.
pub fn global_eb_objective(models: &[(f64, usize)], log_priors: &[f64], g: f64) -> f64 {
    let terms: Vec<f64> = models
        .iter()
        .zip(log_priors)
        .map(|(&(z, d), lp)| if d == 0 { *lp } else { tbf_fixed_g_unchecked(z, d, g) + lp })
        .collect();
    log_sum_exp(&terms)
}

/// Maximise the prior-weighted TBF sum over `g` by golden-section search on
/// `x = ln(1 + g) ∈ [0, ln(1 + 10 n_eff)]`.
///
/// A coarse scan picks the bracket first so that a multimodal objective does
/// not trap the search in a minor mode.
pub fn global_eb(models: &[(f64, usize)], log_priors: &[f64], n_eff: f64) -> Result<GlobalEb> {
    if models.len() != log_priors.len() {
        return Err(Error::domain("one log prior per model is required"));
    }
    if models.is_empty() {
        return Err(Error::Empty("global EB needs at least one model".into()));
    }
    for &(z, d) in models {
        super::check_zd_allow_null(z, d)?;
    }
    if !(n_eff > 0.0) {
        return Err(Error::domain("n_eff must be positive"));
    }
    if models.iter().all(|&(_, d)| d == 0) {
        let objective = log_sum_exp(log_priors);
        return Ok(GlobalEb { g: 0.0, objective, flat: true });
    }

    let f = |x: f64| global_eb_objective(models, log_priors, x.exp_m1());
    let upper = (10.0 * n_eff).ln_1p();
    let step = upper / SCAN_POINTS as f64;
    let (mut best_i, mut best_v) = (0, f64::NEG_INFINITY);
    for i in 0..=SCAN_POINTS {
        let v = f(i as f64 * step);
        if v > best_v {
            best_v = v;
            best_i = i;
        }
    }
    let mut lo = (best_i.saturating_sub(1)) as f64 * step;
    let mut hi = ((best_i + 1).min(SCAN_POINTS)) as f64 * step;

    let mut x1 = hi - GOLDEN * (hi - lo);
    let mut x2 = lo + GOLDEN * (hi - lo);
    let (mut f1, mut f2) = (f(x1), f(x2));
    while hi - lo > TOL {
        if f1 < f2 {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + GOLDEN * (hi - lo);
            f2 = f(x2);
        } else {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - GOLDEN * (hi - lo);
            f1 = f(x1);
        }
    }
    let mut x = 0.5 * (lo + hi);
    let mut objective = f(x);
    for edge in [0.0, upper] {
        let v = f(edge);
        if v >= objective {
            x = edge;
            objective = v;
        }
    }
    if x <= TOL {
        x = 0.0;
        objective = f(0.0);
    }
    Ok(GlobalEb { g: x.exp_m1(), objective, flat: false })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bayes_factors::local_eb_g;
    use approx::assert_relative_eq;

    #[test]
    fn single_model_recovers_local_eb() {
        for &(z, d) in &[(10.0, 2usize), (30.0, 1), (55.0, 5)] {
            let geb = global_eb(&[(z, d)], &[0.0], 200.0).unwrap();
            let leb = local_eb_g(z, d).unwrap();
            assert_relative_eq!(geb.g, leb, max_relative = 1e-5);
        }
    }

    #[test]
    fn weak_evidence_snaps_to_zero() {
        let geb = global_eb(&[(0.5, 2)], &[0.0], 100.0).unwrap();
        assert_eq!(geb.g, 0.0);
        assert!(!geb.flat);
    }

    #[test]
    fn all_null_is_flat() {
        let geb = global_eb(&[(0.0, 0), (0.0, 0)], &[-1.0, -2.0], 100.0).unwrap();
        assert!(geb.flat);
        assert_eq!(geb.g, 0.0);
    }
}
