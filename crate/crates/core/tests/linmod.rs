use approx::assert_relative_eq;
use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use testbf_core::linmod::{
    center_design, cox_partial_loglik, fit, fit_cox, fit_cox_with, fit_glm, fit_null, glm_loglik, Dataset, Family,
    FitOptions, Ties,
};
use testbf_core::model_space::ModelSpec;
use testbf_core::Error;

fn col(x: &[f64]) -> DMatrix<f64> {
    DMatrix::from_column_slice(x.len(), 1, x)
}

fn simulate(family: Family, n: usize, p: usize, seed: u64) -> Dataset {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let x = DMatrix::from_fn(n, p, |_, _| rng.sample::<f64, _>(StandardNormal));
    let beta: Vec<f64> = (0..p).map(|j| 0.6 / (j as f64 + 1.0)).collect();
    let y = (0..n)
        .map(|i| {
            let eta: f64 = (0..p).map(|j| x[(i, j)] * beta[j]).sum();
            match family {
                Family::Gaussian => 1.0 + eta + rng.sample::<f64, _>(StandardNormal),
                Family::Binomial => f64::from(rng.random::<f64>() < 1.0 / (1.0 + (-eta).exp())),
                Family::Poisson => {
                    // inversion sampling is fine for small means
                    let mu = (0.3 + eta).exp();
                    let (mut k, mut pk, u) = (0.0, (-mu).exp(), rng.random::<f64>());
                    let mut cdf = pk;
                    while u > cdf {
                        k += 1.0;
                        pk *= mu / k;
                        cdf += pk;
                    }
                    k
                }
                Family::Cox => unreachable!(),
            }
        })
        .collect();
    Dataset::glm(family, y, x).unwrap()
}

fn simulate_cox(n: usize, p: usize, seed: u64) -> Dataset {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let x = DMatrix::from_fn(n, p, |_, _| rng.sample::<f64, _>(StandardNormal));
    let mut time = Vec::with_capacity(n);
    let mut status = Vec::with_capacity(n);
    for i in 0..n {
        let eta: f64 = (0..p).map(|j| 0.5 * x[(i, j)]).sum();
        let t = -rng.random::<f64>().ln() / eta.exp();
        let c = 2.0 * rng.random::<f64>();
        // round to create ties
        time.push((t.min(c) * 20.0).ceil() / 20.0);
        status.push(t <= c);
    }
    Dataset::cox(time, status, x).unwrap()
}

#[test]
fn null_fits() {
    let ds = Dataset::glm(Family::Gaussian, vec![1.0, 2.0, 3.0], col(&[0.0, 1.0, 0.0])).unwrap();
    let f = fit_null(&ds).unwrap();
    assert_relative_eq!(f.intercept.unwrap(), 2.0);
    assert_eq!((f.deviance, f.dimension), (0.0, 0));

    let ds = Dataset::glm(Family::Binomial, vec![0.0, 1.0], col(&[1.0, 2.0])).unwrap();
    let f = fit_null(&ds).unwrap();
    assert!(f.intercept.unwrap().abs() < 1e-15);
    assert_eq!(f.deviance, 0.0);

    let ds = Dataset::glm(Family::Binomial, vec![1.0, 1.0], col(&[1.0, 2.0])).unwrap();
    assert_eq!(fit_null(&ds).unwrap_err(), Error::DegenerateIntercept);

    let ds = Dataset::cox(vec![1.0, 2.0], vec![false, false], col(&[1.0, 2.0])).unwrap();
    assert_eq!(fit_null(&ds).unwrap_err(), Error::NoEvents);
    assert_eq!(fit_cox(&ds, &ModelSpec::from_mask(1, 1)).unwrap_err(), Error::NoEvents);
}

#[test]
fn orthogonal_gaussian_covariate_has_zero_deviance() {
    let ds = Dataset::glm(Family::Gaussian, vec![1.0, 2.0, 1.0, 2.0], col(&[1.0, 1.0, -1.0, -1.0])).unwrap();
    let f = fit_glm(&ds, &ModelSpec::from_mask(1, 1)).unwrap();
    assert!(f.coefficients[0].abs() < 1e-14);
    assert!(f.deviance.abs() < 1e-12);
}

#[test]
fn separation_is_reported_as_non_convergence() {
    let ds = Dataset::glm(Family::Binomial, vec![0.0, 0.0, 0.0, 1.0, 1.0, 1.0], col(&[0.0, 0.0, 0.0, 1.0, 1.0, 1.0]))
        .unwrap();
    match fit_glm(&ds, &ModelSpec::from_mask(1, 1)) {
        Err(Error::NonConvergence { last_coefficients, .. }) => assert_eq!(last_coefficients.len(), 2),
        other => panic!("expected non-convergence, got {other:?}"),
    }
}

#[test]
fn monotone_cox_likelihood_is_reported_as_non_convergence() {
    let ds = Dataset::cox(vec![1.0, 2.0, 3.0, 4.0], vec![true, true, true, false], col(&[4.0, 3.0, 2.0, 1.0])).unwrap();
    assert!(matches!(fit_cox(&ds, &ModelSpec::from_mask(1, 1)), Err(Error::NonConvergence { .. })));
}

#[test]
fn efron_ties_are_unsupported() {
    let ds = simulate_cox(20, 1, 3);
    let opts = FitOptions { ties: Ties::Efron, ..FitOptions::default() };
    assert!(matches!(fit_cox_with(&ds, &ModelSpec::from_mask(1, 1), &opts), Err(Error::Unsupported(_))));
}

/// Maximum of `f` over a square box by a grid refined three times around the best point.
fn grid_max_2d(f: impl Fn(f64, f64) -> f64, lo: f64, hi: f64) -> f64 {
    let centre = (lo + hi) / 2.0;
    let (mut ca, mut cb, mut half, mut best) = (centre, centre, (hi - lo) / 2.0, f64::NEG_INFINITY);
    for _ in 0..4 {
        let steps = 400;
        let h = 2.0 * half / steps as f64;
        let (a0, b0) = (ca - half, cb - half);
        let (mut ba, mut bb) = (ca, cb);
        for i in 0..=steps {
            for j in 0..=steps {
                let (a, b) = (a0 + i as f64 * h, b0 + j as f64 * h);
                let v = f(a, b);
                if v > best {
                    best = v;
                    ba = a;
                    bb = b;
                }
            }
        }
        ca = ba;
        cb = bb;
        half = 5.0 * h;
    }
    best
}

#[test]
fn logistic_deviance_matches_grid_search() {
    let x = [-1.5, -0.7, -0.2, 0.1, 0.4, 0.9, 1.3, 2.0];
    let y = [0.0, 0.0, 1.0, 0.0, 1.0, 0.0, 1.0, 1.0];
    let ds = Dataset::glm(Family::Binomial, y.to_vec(), col(&x)).unwrap();
    let f = fit_glm(&ds, &ModelSpec::from_mask(1, 1)).unwrap();

    let loglik = |a: f64, b: f64| -> f64 {
        x.iter()
            .zip(&y)
            .map(|(xi, yi)| {
                let p = 1.0 / (1.0 + (-(a + b * xi)).exp());
                yi * p.ln() + (1.0 - yi) * (1.0 - p).ln()
            })
            .sum()
    };
    let ll_full = grid_max_2d(loglik, -6.0, 6.0);
    let ll_null = 8.0 * (0.5f64).ln();
    let z_grid = 2.0 * (ll_full - ll_null);
    assert!((f.deviance - z_grid).abs() < 1e-4, "{} vs {}", f.deviance, z_grid);
}

#[test]
fn cox_deviance_matches_risk_set_enumeration() {
    let time = [1.0, 2.0, 3.0];
    let status = [true, true, true];
    let x = [1.0, 0.0, 1.0];
    let ds = Dataset::cox(time.to_vec(), status.to_vec(), col(&x)).unwrap();
    let f = fit_cox(&ds, &ModelSpec::from_mask(1, 1)).unwrap();

    // risk sets {1,2,3}, {2,3}, {3}; the last contributes nothing
    let pl = |b: f64| -> f64 {
        let r = |xi: f64| (b * xi).exp();
        b * x[0] - (r(x[0]) + r(x[1]) + r(x[2])).ln() + b * x[1] - (r(x[1]) + r(x[2])).ln()
    };
    let null = -(3.0f64).ln() - (2.0f64).ln();
    let mut best = f64::NEG_INFINITY;
    let (mut lo, mut hi) = (-10.0, 10.0);
    for _ in 0..6 {
        let steps = 2000;
        let h = (hi - lo) / steps as f64;
        let mut arg = lo;
        for i in 0..=steps {
            let b = lo + i as f64 * h;
            let v = pl(b);
            if v > best {
                best = v;
                arg = b;
            }
        }
        lo = arg - 5.0 * h;
        hi = arg + 5.0 * h;
    }
    let z_grid = 2.0 * (best - null);
    assert!((f.deviance - z_grid).abs() < 1e-4, "{} vs {}", f.deviance, z_grid);
    assert!(f.intercept.is_none());

    let empty = fit_cox(&ds, &ModelSpec::null(1)).unwrap();
    assert_eq!((empty.deviance, empty.dimension), (0.0, 0));
}

#[test]
fn deviance_is_additive_along_nested_models() {
    for family in [Family::Gaussian, Family::Binomial, Family::Poisson] {
        let ds = simulate(family, 150, 3, 11);
        let opts = FitOptions::default();
        let f1 = fit(&ds, &ModelSpec::from_mask(0b001, 3), &opts).unwrap();
        let f2 = fit(&ds, &ModelSpec::from_mask(0b011, 3), &opts).unwrap();
        let z21 = 2.0 * (f2.loglik - f1.loglik);
        assert!((f2.deviance - (z21 + f1.deviance)).abs() < 1e-8, "{family:?}");
    }
    let ds = simulate_cox(150, 3, 12);
    let f1 = fit_cox(&ds, &ModelSpec::from_mask(0b001, 3)).unwrap();
    let f2 = fit_cox(&ds, &ModelSpec::from_mask(0b011, 3)).unwrap();
    assert!((f2.deviance - (2.0 * (f2.loglik - f1.loglik) + f1.deviance)).abs() < 1e-8);
}

#[test]
fn gaussian_deviance_is_log_r_squared() {
    let ds = simulate(Family::Gaussian, 80, 3, 5);
    let f = fit_glm(&ds, &ModelSpec::from_mask(0b111, 3)).unwrap();

    // OLS via normal equations on the raw design with an explicit intercept
    let n = ds.n();
    let a = DMatrix::from_fn(n, 4, |i, j| if j == 0 { 1.0 } else { ds.x()[(i, j - 1)] });
    let y = nalgebra::DVector::from_column_slice(ds.y());
    let theta = (a.transpose() * &a).lu().solve(&(a.transpose() * &y)).unwrap();
    let resid = &y - &a * theta;
    let ybar = y.mean();
    let tss: f64 = y.iter().map(|v| (v - ybar).powi(2)).sum();
    let r2 = 1.0 - resid.norm_squared() / tss;
    assert_relative_eq!(f.deviance, -(n as f64) * (1.0 - r2).ln(), max_relative = 1e-10);
}

#[test]
fn deviance_is_invariant_to_rescaling() {
    for family in [Family::Gaussian, Family::Binomial, Family::Poisson] {
        let ds = simulate(family, 120, 2, 21);
        let base = fit_glm(&ds, &ModelSpec::from_mask(0b11, 2)).unwrap();
        let mut x = ds.x().clone();
        x.column_mut(1).scale_mut(-37.5);
        let scaled = Dataset::glm(family, ds.y().to_vec(), x).unwrap();
        let f = fit_glm(&scaled, &ModelSpec::from_mask(0b11, 2)).unwrap();
        assert!((f.deviance - base.deviance).abs() < 1e-8, "{family:?}");
    }
    let ds = simulate_cox(120, 2, 22);
    let base = fit_cox(&ds, &ModelSpec::from_mask(0b11, 2)).unwrap();
    let mut x = ds.x().clone();
    x.column_mut(0).scale_mut(0.01);
    let scaled = Dataset::cox(ds.time().to_vec(), ds.status().unwrap().to_vec(), x).unwrap();
    let f = fit_cox(&scaled, &ModelSpec::from_mask(0b11, 2)).unwrap();
    assert!((f.deviance - base.deviance).abs() < 1e-8);
}

fn finite_difference_hessian(f: impl Fn(&[f64]) -> f64, at: &[f64]) -> DMatrix<f64> {
    let k = at.len();
    let h = 1e-4;
    DMatrix::from_fn(k, k, |a, b| {
        let eval = |da: f64, db: f64| {
            let mut p = at.to_vec();
            p[a] += da;
            p[b] += db;
            f(&p)
        };
        (eval(h, h) - eval(h, -h) - eval(-h, h) + eval(-h, -h)) / (4.0 * h * h)
    })
}

#[test]
fn information_is_the_negative_hessian() {
    for family in [Family::Binomial, Family::Poisson, Family::Gaussian] {
        let ds = simulate(family, 200, 2, 31);
        let spec = ModelSpec::from_mask(0b11, 2);
        let f = fit_glm(&ds, &spec).unwrap();
        let xc = center_design(&ds, &spec).unwrap().xc;
        let alpha = f.intercept.unwrap();
        let beta: Vec<f64> = f.coefficients.iter().copied().collect();
        let hess = finite_difference_hessian(|b| glm_loglik(&ds, &xc, alpha, b), &beta);
        let rel = (&f.info_beta + &hess).norm() / f.info_beta.norm();
        assert!(rel < 1e-4, "{family:?}: {rel}");
    }
    let ds = simulate_cox(200, 2, 32);
    let spec = ModelSpec::from_mask(0b11, 2);
    let f = fit_cox(&ds, &spec).unwrap();
    let xc = center_design(&ds, &spec).unwrap().xc;
    let beta: Vec<f64> = f.coefficients.iter().copied().collect();
    let hess = finite_difference_hessian(|b| cox_partial_loglik(&ds, &xc, b), &beta);
    assert!((&f.info_beta + &hess).norm() / f.info_beta.norm() < 1e-4);
}

#[test]
fn duplicated_rows_with_halved_weights_reproduce_the_fit() {
    for family in [Family::Gaussian, Family::Binomial, Family::Poisson] {
        let ds = simulate(family, 60, 2, 41);
        let spec = ModelSpec::from_mask(0b11, 2);
        let base = fit_glm(&ds, &spec).unwrap();
        let rows: Vec<usize> = (0..ds.n()).chain(0..ds.n()).collect();
        let doubled = ds.subset(&rows).unwrap().with_weights(vec![0.5; 2 * ds.n()]).unwrap();
        let f = fit_glm(&doubled, &spec).unwrap();
        for (a, b) in f.coefficients.iter().zip(base.coefficients.iter()) {
            assert!((a - b).abs() < 1e-8, "{family:?}");
        }
        assert!((f.intercept.unwrap() - base.intercept.unwrap()).abs() < 1e-8);
        assert!((f.deviance - base.deviance).abs() < 1e-8);
    }
}

#[test]
fn rank_deficient_design_is_rejected() {
    let x = DMatrix::from_row_slice(5, 2, &[1.0, 2.0, 2.0, 4.0, 3.0, 6.0, 4.0, 8.0, 5.0, 10.1]);
    let ds = Dataset::glm(Family::Gaussian, vec![1.0, 3.0, 2.0, 5.0, 4.0], x.clone()).unwrap();
    assert!(fit_glm(&ds, &ModelSpec::from_mask(0b11, 2)).is_ok());
    let mut exact = x;
    exact[(4, 1)] = 10.0;
    let ds = Dataset::glm(Family::Gaussian, vec![1.0, 3.0, 2.0, 5.0, 4.0], exact).unwrap();
    assert!(matches!(fit_glm(&ds, &ModelSpec::from_mask(0b11, 2)), Err(Error::SingularDesign { rank: 1, columns: 2 })));
}

#[test]
fn converged_information_is_symmetric_positive_definite() {
    let ds = simulate(Family::Binomial, 300, 3, 51);
    let f = fit_glm(&ds, &ModelSpec::from_mask(0b111, 3)).unwrap();
    assert!(f.converged);
    assert_eq!(f.info_beta, f.info_beta.transpose());
    assert!(f.info_beta.clone().cholesky().is_some());
}
