use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use nalgebra::DMatrix;

use super::data::{Covariate, Dataset, Family};
use crate::model_space::spec::{fp_transform, ModelSpec, Term};
use crate::{Error, Result};

/// Design for one model, centered so that `Xcᵀ W 1 = 0`.
#[derive(Debug, Clone)]
pub struct CenteredDesign {
    pub xc: DMatrix<f64>,
    pub centers: Vec<f64>,
    /// Diagonal of the centering weight matrix `W`.
    pub weights: Vec<f64>,
}

impl CenteredDesign {
    pub fn ncols(&self) -> usize {
        self.xc.ncols()
    }
}

/// Everything needed to map raw covariate rows onto a fitted model's centered
/// design: the spec, the FP shifts, and the training centers.
#[derive(Debug, Clone, PartialEq)]
pub struct DesignTransform {
    pub spec: ModelSpec,
    pub covariates: Vec<Covariate>,
    pub shifts: Vec<f64>,
    pub centers: Vec<f64>,
}

impl DesignTransform {
    pub fn dimension(&self) -> usize {
        self.centers.len()
    }

    /// Centered design rows for new raw covariates (same column layout as training).
    pub fn apply(&self, raw: &DMatrix<f64>) -> Result<DMatrix<f64>> {
        let expected = self.covariates.iter().flat_map(|c| c.columns.iter()).max().map_or(0, |m| m + 1);
        if raw.ncols() < expected {
            return Err(Error::Schema(format!("new data has {} columns, the model needs {expected}", raw.ncols())));
        }
        let cols = raw_columns(raw, &self.covariates, &self.spec, &self.shifts)?;
        let n = raw.nrows();
        let mut out = DMatrix::zeros(n, cols.len());
        for (j, col) in cols.iter().enumerate() {
            for i in 0..n {
                out[(i, j)] = col[i] - self.centers[j];
            }
        }
        Ok(out)
    }
}

/// Uncentered design columns for `spec`, in covariate order.
pub(crate) fn raw_columns(
    x: &DMatrix<f64>,
    covariates: &[Covariate],
    spec: &ModelSpec,
    shifts: &[f64],
) -> Result<Vec<Vec<f64>>> {
    if spec.p() != covariates.len() {
        return Err(Error::Schema(format!("spec has {} terms for {} covariates", spec.p(), covariates.len())));
    }
    let mut cols = Vec::with_capacity(spec.dimension(covariates));
    for (k, (term, cov)) in spec.terms().iter().zip(covariates).enumerate() {
        match term {
            Term::Excluded => {}
            Term::Linear => {
                for &j in &cov.columns {
                    cols.push(x.column(j).iter().copied().collect());
                }
            }
            Term::Fp(powers) => {
                if !cov.fp {
                    return Err(Error::Schema(format!("covariate `{}` is not FP-eligible", cov.name)));
                }
                let shifted: Vec<f64> = x.column(cov.columns[0]).iter().map(|v| v + shifts[k]).collect();
                cols.extend(fp_transform(&shifted, powers)?);
            }
        }
    }
    Ok(cols)
}

/// Weighted-center the design for `spec`. GLM families center with the
/// observation weights, Cox with unit weights.
pub fn center_design(ds: &Dataset, spec: &ModelSpec) -> Result<CenteredDesign> {
    let weights = match ds.family() {
        Family::Cox => vec![1.0; ds.n()],
        _ => ds.weights().to_vec(),
    };
    let cols = raw_columns(ds.x(), ds.covariates(), spec, ds.fp_shifts())?;
    let n = ds.n();
    let wsum: f64 = weights.iter().sum();
    let mut xc = DMatrix::zeros(n, cols.len());
    let mut centers = Vec::with_capacity(cols.len());
    for (j, col) in cols.iter().enumerate() {
        let mean = col.iter().zip(&weights).map(|(v, w)| v * w).sum::<f64>() / wsum;
        let mut centered_ss = 0.0;
        let mut raw_ss = 0.0;
        for i in 0..n {
            let c = col[i] - mean;
            xc[(i, j)] = c;
            centered_ss += weights[i] * c * c;
            raw_ss += weights[i] * col[i] * col[i];
        }
        if centered_ss <= 1e-24 * raw_ss.max(f64::MIN_POSITIVE) || centered_ss == 0.0 {
            return Err(Error::ZeroVariance { column: j });
        }
        centers.push(mean);
    }
    Ok(CenteredDesign { xc, centers, weights })
}

/// Column rank of `sqrt(W) Xc` from a column-pivoted QR, relative tolerance `tol`.
pub(crate) fn weighted_rank(design: &CenteredDesign, tol: f64) -> usize {
    let d = design.ncols();
    if d == 0 {
        return 0;
    }
    let mut m = design.xc.clone();
    for (i, w) in design.weights.iter().enumerate() {
        let s = num_traits::Float::sqrt(*w);
        for j in 0..d {
            m[(i, j)] *= s;
        }
    }
    let qr = m.col_piv_qr();
    let r = qr.r();
    let k = r.nrows().min(r.ncols());
    let lead = r[(0, 0)].abs();
    if lead == 0.0 {
        return 0;
    }
    (0..k).filter(|&i| r[(i, i)].abs() > tol * lead).count()
}
