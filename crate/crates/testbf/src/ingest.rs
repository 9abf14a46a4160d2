//! CSV ingestion into a [`Dataset`].

use std::collections::BTreeSet;
use std::io::Read;
use std::path::Path;

use nalgebra::DMatrix;
use testbf_core::linmod::{Covariate, CovariateKind, Dataset, Family};
use testbf_core::Error as CoreError;

use crate::config::{CovariateConfig, DataConfig, KindName};
use crate::error::{AppError, AppResult};

/// Cell values read as missing.
pub const NA_TOKENS: [&str; 5] = ["", "NA", "NaN", ".", "?"];

#[derive(Debug, Clone)]
pub struct Ingested {
    pub dataset: Dataset,
    /// Label of each design column (`name` or `name=level` for dummies).
    pub column_names: Vec<String>,
    pub rows_read: usize,
    /// Rows dropped for a missing value in a used column.
    pub dropped: usize,
}

fn is_na(cell: &str) -> bool {
    NA_TOKENS.contains(&cell.trim())
}

fn schema(msg: String) -> AppError {
    AppError::Core(CoreError::Schema(msg))
}

pub fn ingest_csv(path: &Path, cfg: &DataConfig) -> AppResult<Ingested> {
    let file = std::fs::File::open(path).map_err(|e| AppError::io(path.display(), e))?;
    ingest_reader(file, cfg)
}

/// Parse CSV text with a header row. Row numbers in errors are 1-based and
/// count data rows only.
pub fn ingest_reader<R: Read>(reader: R, cfg: &DataConfig) -> AppResult<Ingested> {
    let mut rdr = csv::ReaderBuilder::new().has_headers(true).trim(csv::Trim::All).from_reader(reader);
    let header: Vec<String> = rdr.headers()?.iter().map(str::to_owned).collect();
    let locate = |name: &str| -> AppResult<usize> {
        header.iter().position(|h| h == name).ok_or_else(|| schema(format!("column `{name}` not found in header")))
    };

    let family: Family = cfg.family.into();
    let (outcome_col, status_col) = if family == Family::Cox {
        let time = cfg.time.as_deref().ok_or_else(|| schema("cox data needs a `time` column".into()))?;
        let status = cfg.status.as_deref().ok_or_else(|| schema("cox data needs a `status` column".into()))?;
        (locate(time)?, Some(locate(status)?))
    } else {
        let response = cfg.response.as_deref().ok_or_else(|| schema("a `response` column is required".into()))?;
        (locate(response)?, None)
    };
    let weight_col = cfg.weights.as_deref().map(locate).transpose()?;
    let cov_cols: Vec<usize> = cfg.covariates.iter().map(|c| locate(c.column())).collect::<AppResult<_>>()?;

    let mut used: Vec<usize> = vec![outcome_col];
    used.extend(status_col);
    used.extend(weight_col);
    used.extend(&cov_cols);

    // complete rows only, kept as raw strings until levels are known
    let mut rows: Vec<(usize, csv::StringRecord)> = Vec::new();
    let mut rows_read = 0;
    let mut dropped = 0;
    for rec in rdr.records() {
        let rec = rec?;
        rows_read += 1;
        if rec.len() != header.len() {
            return Err(schema(format!("row {rows_read} has {} fields, header has {}", rec.len(), header.len())));
        }
        if used.iter().any(|&j| is_na(&rec[j])) {
            dropped += 1;
        } else {
            rows.push((rows_read, rec));
        }
    }
    if rows.is_empty() {
        return Err(AppError::Core(CoreError::Empty("no complete rows".into())));
    }

    let numeric = |j: usize| -> AppResult<Vec<f64>> {
        rows.iter()
            .map(|(row, r)| {
                r[j].parse::<f64>().map_err(|_| {
                    AppError::Core(CoreError::InvalidData(format!(
                        "row {}, column `{}`: cannot parse `{}` as a number",
                        row, header[j], &r[j]
                    )))
                })
            })
            .collect()
    };

    let outcome = numeric(outcome_col)?;
    let status = match status_col {
        Some(j) => {
            let raw = numeric(j)?;
            let mut flags = Vec::with_capacity(raw.len());
            for (i, v) in raw.iter().enumerate() {
                flags.push(match *v {
                    0.0 => false,
                    1.0 => true,
                    _ => {
                        return Err(schema(format!(
                            "row {}, column `{}`: status must be 0 or 1, found `{}`",
                            rows[i].0, header[j], &rows[i].1[j]
                        )))
                    }
                });
            }
            Some(flags)
        }
        None => None,
    };
    let weights = weight_col.map(numeric).transpose()?;

    let mut columns: Vec<Vec<f64>> = Vec::new();
    let mut column_names = Vec::new();
    let mut covariates = Vec::new();
    for (cc, &j) in cfg.covariates.iter().zip(&cov_cols) {
        let start = columns.len();
        match cc.kind {
            KindName::Continuous => {
                columns.push(numeric(j)?);
                column_names.push(cc.name.clone());
            }
            KindName::Binary | KindName::Categorical => {
                let values: Vec<&str> = rows.iter().map(|(_, r)| &r[j]).collect();
                let (reference, levels) = levels_of(cc, &values, &header[j])?;
                if levels.is_empty() {
                    return Err(AppError::Core(CoreError::InvalidData(format!(
                        "covariate `{}` takes a single level",
                        cc.name
                    ))));
                }
                if cc.kind == KindName::Binary && levels.len() > 1 {
                    return Err(schema(format!("binary covariate `{}` has more than two levels", cc.name)));
                }
                for level in &levels {
                    columns.push(values.iter().map(|v| f64::from(u8::from(v == level))).collect());
                    column_names.push(if cc.kind == KindName::Binary && reference == "0" && level == "1" {
                        cc.name.clone()
                    } else {
                        format!("{}={}", cc.name, level)
                    });
                }
            }
        }
        covariates.push(Covariate {
            name: cc.name.clone(),
            columns: (start..columns.len()).collect(),
            kind: match cc.kind {
                KindName::Continuous => CovariateKind::Continuous,
                KindName::Binary => CovariateKind::Binary,
                KindName::Categorical => CovariateKind::Categorical,
            },
            fp: cc.fp,
        });
    }

    let n = rows.len();
    let x = DMatrix::from_fn(n, columns.len(), |i, k| columns[k][i]);
    let ds = match status {
        Some(s) => Dataset::cox(outcome, s, x)?,
        None => Dataset::glm(family, outcome, x)?,
    };
    let ds = ds.with_covariates(covariates)?;
    let dataset = match weights {
        Some(w) => ds.with_weights(w)?,
        None => ds,
    };
    Ok(Ingested { dataset, column_names, rows_read, dropped })
}

/// Reference level and the remaining levels (one dummy each). Levels sort
/// numerically when every value is a number, else lexicographically; the
/// first is the default reference.
fn levels_of(cc: &CovariateConfig, values: &[&str], column: &str) -> AppResult<(String, Vec<String>)> {
    let distinct: BTreeSet<&str> = values.iter().copied().collect();
    let mut levels: Vec<String> = distinct.into_iter().map(str::to_owned).collect();
    if levels.iter().all(|l| l.parse::<f64>().is_ok()) {
        levels.sort_by(|a, b| a.parse::<f64>().unwrap().total_cmp(&b.parse::<f64>().unwrap()));
    }
    let reference = match &cc.reference {
        Some(r) => {
            if !levels.contains(r) {
                return Err(schema(format!("reference level `{r}` does not occur in column `{column}`")));
            }
            r.clone()
        }
        None => levels[0].clone(),
    };
    levels.retain(|l| *l != reference);
    Ok((reference, levels))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::{CovariateConfig, FamilyName};

    fn cov(name: &str, kind: KindName) -> CovariateConfig {
        CovariateConfig { name: name.into(), column: None, kind, fp: false, reference: None }
    }

    #[test]
    fn categorical_levels_become_grouped_dummies() {
        let cfg = DataConfig {
            path: "unused".into(),
            family: FamilyName::Gaussian,
            response: Some("y".into()),
            time: None,
            status: None,
            weights: None,
            covariates: vec![cov("grade", KindName::Categorical), cov("sex", KindName::Binary)],
        };
        let csv = "y,grade,sex\n1,b,m\n2,a,f\n3,c,m\n4,NA,f\n5,b,f\n";
        let ing = ingest_reader(csv.as_bytes(), &cfg).unwrap();
        assert_eq!((ing.rows_read, ing.dropped, ing.dataset.n()), (5, 1, 4));
        assert_eq!(ing.column_names, ["grade=b", "grade=c", "sex=m"]);
        assert_eq!(ing.dataset.covariates()[0].columns, [0, 1]);
        assert_eq!(ing.dataset.x().column(1).as_slice(), &[0.0, 0.0, 1.0, 0.0]);
        assert_eq!(ing.dataset.x().column(2).as_slice(), &[1.0, 0.0, 1.0, 0.0]);
    }
}
