use alloc::vec::Vec;

use nalgebra::{DMatrix, DVector};
#[allow(unused_imports)]
use num_traits::Float;

use super::data::{Dataset, Family};
use super::design::{center_design, weighted_rank, CenteredDesign, DesignTransform};
use super::{FitOptions, FitSummary};
use crate::model_space::spec::ModelSpec;
use crate::special::{expit, ln_gamma, softplus};
use crate::{Error, Result};

const LN_2PI: f64 = 1.837_877_066_409_345_5;

/// Intercept-only fit.
pub(crate) fn fit_null_glm(ds: &Dataset) -> Result<FitSummary> {
    let w = ds.weights();
    let y = ds.y();
    let wsum: f64 = w.iter().sum();
    let ybar = y.iter().zip(w).map(|(y, w)| y * w).sum::<f64>() / wsum;

    let (alpha, info_alpha, loglik, sigma2) = match ds.family() {
        Family::Gaussian => {
            let rss: f64 = y.iter().zip(w).map(|(y, w)| w * (y - ybar) * (y - ybar)).sum();
            if rss <= 0.0 {
                return Err(Error::DegenerateIntercept);
            }
            let s2 = rss / wsum;
            (ybar, wsum / s2, gaussian_loglik(rss, wsum), Some(s2))
        }
        Family::Binomial => {
            if ybar <= 0.0 || ybar >= 1.0 {
                return Err(Error::DegenerateIntercept);
            }
            let alpha = (ybar / (1.0 - ybar)).ln();
            let ll = loglik_at(Family::Binomial, y, w, &alloc::vec![alpha; y.len()]);
            (alpha, wsum * ybar * (1.0 - ybar), ll, None)
        }
        Family::Poisson => {
            if ybar <= 0.0 {
                return Err(Error::DegenerateIntercept);
            }
            let alpha = ybar.ln();
            let ll = loglik_at(Family::Poisson, y, w, &alloc::vec![alpha; y.len()]);
            (alpha, wsum * ybar, ll, None)
        }
        Family::Cox => unreachable!("Cox null fits are handled separately"),
    };

    Ok(FitSummary {
        family: ds.family(),
        deviance: 0.0,
        dimension: 0,
        intercept: Some(alpha),
        coefficients: DVector::zeros(0),
        info_intercept: Some(info_alpha),
        info_beta: DMatrix::zeros(0, 0),
        converged: true,
        iterations: 0,
        loglik,
        null_loglik: loglik,
        sigma2,
        transform: DesignTransform {
            spec: ModelSpec::null(ds.p()),
            covariates: ds.covariates().to_vec(),
            shifts: ds.fp_shifts().to_vec(),
            centers: Vec::new(),
        },
    })
}

pub(crate) fn fit_glm(ds: &Dataset, spec: &ModelSpec, opts: &FitOptions) -> Result<FitSummary> {
    let null = fit_null_glm(ds)?;
    if spec.is_null() {
        return Ok(null);
    }
    let design = center_design(ds, spec)?;
    let d = design.ncols();
    let rank = weighted_rank(&design, opts.rank_tol);
    if rank < d {
        return Err(Error::SingularDesign { rank, columns: d });
    }
    let transform = DesignTransform {
        spec: spec.clone(),
        covariates: ds.covariates().to_vec(),
        shifts: ds.fp_shifts().to_vec(),
        centers: design.centers.clone(),
    };
    let a = with_intercept(&design);
    match ds.family() {
        Family::Gaussian => fit_gaussian(ds, &a, null, transform),
        family => irls(ds, family, &a, null, transform, opts),
    }
}

fn with_intercept(design: &CenteredDesign) -> DMatrix<f64> {
    let n = design.xc.nrows();
    let d = design.ncols();
    DMatrix::from_fn(n, d + 1, |i, j| if j == 0 { 1.0 } else { design.xc[(i, j - 1)] })
}

/// `Aᵀ diag(w) A`.
fn weighted_gram(a: &DMatrix<f64>, w: &[f64]) -> DMatrix<f64> {
    let k = a.ncols();
    let mut g = DMatrix::zeros(k, k);
    for (i, wi) in w.iter().enumerate() {
        let row = a.row(i);
        for r in 0..k {
            let v = wi * row[r];
            if v == 0.0 {
                continue;
            }
            for c in r..k {
                g[(r, c)] += v * row[c];
            }
        }
    }
    for r in 0..k {
        for c in 0..r {
            g[(r, c)] = g[(c, r)];
        }
    }
    g
}

fn gaussian_loglik(rss: f64, wsum: f64) -> f64 {
    -0.5 * wsum * (LN_2PI + (rss / wsum).ln() + 1.0)
}

/// Log-likelihood at linear predictor `eta` (binomial and Poisson).
pub(crate) fn loglik_at(family: Family, y: &[f64], w: &[f64], eta: &[f64]) -> f64 {
    let mut ll = 0.0;
    for i in 0..y.len() {
        ll += w[i]
            * match family {
                Family::Binomial => y[i] * eta[i] - softplus(eta[i]),
                Family::Poisson => y[i] * eta[i] - eta[i].exp() - ln_gamma(y[i] + 1.0),
                _ => unreachable!(),
            };
    }
    ll
}

/// Variance function at `eta` for the canonical links.
fn variance_at(family: Family, eta: f64) -> f64 {
    match family {
        Family::Binomial => {
            let e = (-eta.abs()).exp();
            e / ((1.0 + e) * (1.0 + e))
        }
        Family::Poisson => eta.exp(),
        _ => unreachable!(),
    }
}

fn mean_at(family: Family, eta: f64) -> f64 {
    match family {
        Family::Binomial => expit(eta),
        Family::Poisson => eta.exp(),
        Family::Gaussian => eta,
        Family::Cox => eta.exp(),
    }
}

fn fit_gaussian(ds: &Dataset, a: &DMatrix<f64>, null: FitSummary, transform: DesignTransform) -> Result<FitSummary> {
    let w = ds.weights();
    let y = DVector::from_column_slice(ds.y());
    let gram = weighted_gram(a, w);
    let chol = gram.clone().cholesky().ok_or(Error::SingularDesign { rank: 0, columns: a.ncols() - 1 })?;
    let mut rhs = DVector::zeros(a.ncols());
    for i in 0..a.nrows() {
        for j in 0..a.ncols() {
            rhs[j] += w[i] * a[(i, j)] * y[i];
        }
    }
    let theta = chol.solve(&rhs);
    let fitted = a * &theta;
    let rss: f64 = (0..ds.n()).map(|i| w[i] * (y[i] - fitted[i]).powi(2)).sum();
    let wsum: f64 = w.iter().sum();
    let rss0: f64 = {
        let ybar = ds.y().iter().zip(w).map(|(y, w)| y * w).sum::<f64>() / wsum;
        ds.y().iter().zip(w).map(|(y, w)| w * (y - ybar) * (y - ybar)).sum()
    };
    if !(rss > 0.0) || rss <= rss0 * 1e-14 {
        return Err(Error::DegenerateFit);
    }
    let sigma2 = rss / wsum;
    let deviance = (wsum * (rss0.ln() - rss.ln())).max(0.0);
    let info = gram / sigma2;
    Ok(assemble(ds.family(), theta, info, deviance, gaussian_loglik(rss, wsum), null, 1, Some(sigma2), transform))
}

#[allow(clippy::too_many_arguments)]
fn assemble(
    family: Family,
    theta: DVector<f64>,
    info: DMatrix<f64>,
    deviance: f64,
    loglik: f64,
    null: FitSummary,
    iterations: usize,
    sigma2: Option<f64>,
    transform: DesignTransform,
) -> FitSummary {
    let d = theta.len() - 1;
    FitSummary {
        family,
        deviance,
        dimension: d,
        intercept: Some(theta[0]),
        coefficients: theta.rows(1, d).into_owned(),
        info_intercept: Some(info[(0, 0)]),
        info_beta: info.view((1, 1), (d, d)).into_owned(),
        converged: true,
        iterations,
        loglik,
        null_loglik: null.loglik,
        sigma2,
        transform,
    }
}

fn irls(
    ds: &Dataset,
    family: Family,
    a: &DMatrix<f64>,
    null: FitSummary,
    transform: DesignTransform,
    opts: &FitOptions,
) -> Result<FitSummary> {
    let y = ds.y();
    let w = ds.weights();
    let n = ds.n();
    let k = a.ncols();

    let mut eta: Vec<f64> = (0..n)
        .map(|i| match family {
            Family::Binomial => {
                let mu = (w[i] * y[i] + 0.5) / (w[i] + 1.0);
                (mu / (1.0 - mu)).ln()
            }
            _ => (y[i] + 0.1).ln(),
        })
        .collect();
    let mut theta = DVector::<f64>::zeros(k);
    let mut dev_old = f64::INFINITY;
    let mut iterations = 0;

    while iterations < opts.max_iter {
        iterations += 1;
        let var: Vec<f64> = eta.iter().map(|e| variance_at(family, *e)).collect();
        let working_w: Vec<f64> = var.iter().zip(w).map(|(v, w)| v * w).collect();
        let gram = weighted_gram(a, &working_w);
        let mut rhs = DVector::zeros(k);
        for i in 0..n {
            let mu = mean_at(family, eta[i]);
            let z = eta[i] + (y[i] - mu) / var[i];
            let wz = working_w[i] * z;
            for j in 0..k {
                rhs[j] += a[(i, j)] * wz;
            }
        }
        let Some(chol) = gram.cholesky() else {
            return Err(non_convergence(iterations, dev_old, &theta));
        };
        let mut proposal = chol.solve(&rhs);
        if proposal.iter().any(|v| !v.is_finite()) {
            return Err(non_convergence(iterations, dev_old, &theta));
        }
        let mut eta_new: Vec<f64> = (a * &proposal).iter().copied().collect();
        let mut dev_new = -2.0 * loglik_at(family, y, w, &eta_new);
        // step halving when the deviance goes up
        let mut halvings = 0;
        while (!dev_new.is_finite() || dev_new > dev_old * (1.0 + 1e-12)) && halvings < 30 {
            proposal = (&proposal + &theta) * 0.5;
            eta_new = (a * &proposal).iter().copied().collect();
            dev_new = -2.0 * loglik_at(family, y, w, &eta_new);
            halvings += 1;
        }
        let step = (&proposal - &theta).amax();
        let scale = 1.0 + proposal.amax();
        theta = proposal;
        eta = eta_new;
        let rel = (dev_new - dev_old).abs() / (dev_new.abs() + 0.1);
        let settled = rel < opts.tol && step <= 1e-7 * scale;
        dev_old = dev_new;
        if settled {
            let var: Vec<f64> = eta.iter().map(|e| variance_at(family, *e)).collect();
            let working_w: Vec<f64> = var.iter().zip(w).map(|(v, w)| v * w).collect();
            let info = weighted_gram(a, &working_w);
            let loglik = -0.5 * dev_new;
            let deviance = (2.0 * (loglik - null.loglik)).max(0.0);
            return Ok(assemble(family, theta, info, deviance, loglik, null, iterations, None, transform));
        }
    }
    Err(non_convergence(iterations, dev_old, &theta))
}

fn non_convergence(iterations: usize, dev: f64, theta: &DVector<f64>) -> Error {
    Error::NonConvergence { iterations, last_deviance: dev, last_coefficients: theta.iter().copied().collect() }
}

/// Log-likelihood of a GLM at `(alpha, beta)` on a centered design; gaussian
/// profiles σ² out. Used to check the reported information by finite differences.
pub fn glm_loglik(ds: &Dataset, xc: &DMatrix<f64>, alpha: f64, beta: &[f64]) -> f64 {
    let eta: Vec<f64> =
        (0..ds.n()).map(|i| alpha + (0..beta.len()).map(|j| xc[(i, j)] * beta[j]).sum::<f64>()).collect();
    match ds.family() {
        Family::Gaussian => {
            let w = ds.weights();
            let rss: f64 = (0..ds.n()).map(|i| w[i] * (ds.y()[i] - eta[i]).powi(2)).sum();
            gaussian_loglik(rss, w.iter().sum())
        }
        family => loglik_at(family, ds.y(), ds.weights(), &eta),
    }
}
