use alloc::vec::Vec;

use nalgebra::{Cholesky, DMatrix, DVector, Dyn};
#[allow(unused_imports)]
use num_traits::Float;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::linmod::{DesignTransform, Family, FitSummary};
use crate::model_space::ModelSpec;
use crate::{Error, Result};

/// Paired draws of `g` and the model parameters.
#[derive(Debug, Clone, PartialEq)]
pub struct CoefficientDraws {
    pub spec: ModelSpec,
    pub family: Family,
    /// One row per draw: the intercept (when the family has one) followed by
    /// the shrunken coefficients on the centered design.
    pub draws: DMatrix<f64>,
    pub g_draws: Vec<f64>,
    pub has_intercept: bool,
    pub transform: DesignTransform,
}

impl CoefficientDraws {
    pub fn len(&self) -> usize {
        self.draws.nrows()
    }

    pub fn is_empty(&self) -> bool {
        self.draws.nrows() == 0
    }

    pub fn dimension(&self) -> usize {
        self.draws.ncols() - usize::from(self.has_intercept)
    }

    pub fn intercept(&self, draw: usize) -> f64 {
        if self.has_intercept {
            self.draws[(draw, 0)]
        } else {
            0.0
        }
    }

    pub fn beta(&self, draw: usize) -> DVector<f64> {
        let off = usize::from(self.has_intercept);
        DVector::from_iterator(self.dimension(), (0..self.dimension()).map(|j| self.draws[(draw, off + j)]))
    }

    /// Column means of the draws.
    pub fn mean(&self) -> DVector<f64> {
        let s = self.len() as f64;
        DVector::from_iterator(self.draws.ncols(), self.draws.column_iter().map(|c| c.sum() / s))
    }
}

/// Cholesky factor of `m`, retried once with `1e-10 · trace` on the diagonal.
pub(crate) fn cholesky_jittered(m: &DMatrix<f64>) -> Result<Cholesky<f64, Dyn>> {
    if let Some(c) = Cholesky::new(m.clone()) {
        return Ok(c);
    }
    let jitter = 1e-10 * m.trace().abs();
    let mut shifted = m.clone();
    for i in 0..m.nrows() {
        shifted[(i, i)] += jitter;
    }
    Cholesky::new(shifted).ok_or(Error::NotPositiveDefinite)
}

/// Draw `(α, β)` given `g`: `β ~ N(t β̂, t I_β⁻¹)` with `t = g/(g+1)` and,
/// independently, `α ~ N(α̂, 1/I_α)`.
pub fn sample_coefficients(fit: &FitSummary, g_draws: &[f64], seed: u64) -> Result<CoefficientDraws> {
    if !fit.converged {
        return Err(Error::domain("cannot sample from a fit that did not converge"));
    }
    if g_draws.is_empty() {
        return Err(Error::domain("at least one draw of g is needed"));
    }
    if g_draws.iter().any(|g| !(*g >= 0.0) || g.is_infinite()) {
        return Err(Error::domain("g draws must be finite and non-negative"));
    }
    let d = fit.dimension;
    let has_intercept = fit.intercept.is_some();
    let off = usize::from(has_intercept);
    let chol_cov = if d > 0 {
        let info = cholesky_jittered(&fit.info_beta)?;
        Some(cholesky_jittered(&info.inverse())?.l())
    } else {
        None
    };
    let alpha_sd = match (fit.intercept, fit.info_intercept) {
        (Some(_), Some(info)) if info > 0.0 && info.is_finite() => 1.0 / info.sqrt(),
        (Some(_), _) => return Err(Error::NotPositiveDefinite),
        _ => 0.0,
    };

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut draws = DMatrix::zeros(g_draws.len(), d + off);
    let mut z = DVector::zeros(d);
    for (r, g) in g_draws.iter().enumerate() {
        let t = g / (g + 1.0);
        if let Some(alpha) = fit.intercept {
            let e: f64 = StandardNormal.sample(&mut rng);
            draws[(r, 0)] = alpha + alpha_sd * e;
        }
        if let Some(l) = &chol_cov {
            for v in z.iter_mut() {
                *v = StandardNormal.sample(&mut rng);
            }
            let noise = l * &z;
            let sd = t.sqrt();
            for j in 0..d {
                draws[(r, off + j)] = t * fit.coefficients[j] + sd * noise[j];
            }
        }
    }
    Ok(CoefficientDraws {
        spec: fit.transform.spec.clone(),
        family: fit.family,
        draws,
        g_draws: g_draws.to_vec(),
        has_intercept,
        transform: fit.transform.clone(),
    })
}
