use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec;
use alloc::vec::Vec;
use core::cmp::Ordering;
use core::fmt;

#[allow(unused_imports)]
use num_traits::Float;

use crate::linmod::Covariate;
use crate::{Error, Result};

/// Default fractional-polynomial power set.
pub const DEFAULT_POWERS: [f64; 8] = [-2.0, -1.0, -0.5, 0.0, 0.5, 1.0, 2.0, 3.0];

/// An FP power. Ordered and hashed by its bit pattern so specs can key maps.
#[derive(Debug, Clone, Copy)]
pub struct Power(pub f64);

impl PartialEq for Power {
    fn eq(&self, other: &Self) -> bool {
        self.0.total_cmp(&other.0) == Ordering::Equal
    }
}

impl Eq for Power {}

impl PartialOrd for Power {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Power {
    fn cmp(&self, other: &Self) -> Ordering {
        self.0.total_cmp(&other.0)
    }
}

impl core::hash::Hash for Power {
    fn hash<H: core::hash::Hasher>(&self, state: &mut H) {
        self.0.to_bits().hash(state);
    }
}

impl fmt::Display for Power {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// A multiset of one or two FP powers, kept sorted in descending order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct FpPowers {
    first: Power,
    second: Option<Power>,
}

impl FpPowers {
    pub fn one(p: f64) -> Self {
        Self { first: Power(p), second: None }
    }

    pub fn two(p: f64, q: f64) -> Self {
        let (hi, lo) = if p >= q { (p, q) } else { (q, p) };
        Self { first: Power(hi), second: Some(Power(lo)) }
    }

    pub fn from_slice(powers: &[f64]) -> Result<Self> {
        match powers {
            [p] => Ok(Self::one(*p)),
            [p, q] => Ok(Self::two(*p, *q)),
            _ => Err(Error::domain(format!("an FP term takes 1 or 2 powers, got {}", powers.len()))),
        }
    }

    pub fn degree(&self) -> usize {
        1 + usize::from(self.second.is_some())
    }

    pub fn powers(&self) -> impl Iterator<Item = f64> + '_ {
        core::iter::once(self.first.0).chain(self.second.map(|p| p.0))
    }

    pub fn is_linear(&self) -> bool {
        self.second.is_none() && self.first.0 == 1.0
    }
}

/// How one covariate enters a model.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub enum Term {
    #[default]
    Excluded,
    /// Included as-is: all of the covariate's design columns.
    Linear,
    /// Non-linear fractional polynomial of a single positive column.
    Fp(FpPowers),
}

impl Term {
    pub fn is_included(&self) -> bool {
        !matches!(self, Term::Excluded)
    }
}

/// Per-covariate term assignment.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ModelSpec {
    terms: Vec<Term>,
}

impl ModelSpec {
    pub fn null(p: usize) -> Self {
        Self { terms: vec![Term::Excluded; p] }
    }

    pub fn from_terms(terms: Vec<Term>) -> Self {
        Self { terms }
    }

    /// Variable-selection spec from inclusion indicators.
    pub fn from_inclusion(included: &[bool]) -> Self {
        Self { terms: included.iter().map(|&i| if i { Term::Linear } else { Term::Excluded }).collect() }
    }

    /// Variable-selection spec from the low `p` bits of `mask`; bit `k` is covariate `k`.
    pub fn from_mask(mask: u64, p: usize) -> Self {
        Self { terms: (0..p).map(|k| if mask >> k & 1 == 1 { Term::Linear } else { Term::Excluded }).collect() }
    }

    pub fn terms(&self) -> &[Term] {
        &self.terms
    }

    pub fn term(&self, k: usize) -> Term {
        self.terms[k]
    }

    pub fn set_term(&mut self, k: usize, term: Term) {
        self.terms[k] = term;
    }

    pub fn p(&self) -> usize {
        self.terms.len()
    }

    pub fn includes(&self, k: usize) -> bool {
        self.terms[k].is_included()
    }

    pub fn included(&self) -> impl Iterator<Item = usize> + '_ {
        self.terms.iter().enumerate().filter(|(_, t)| t.is_included()).map(|(k, _)| k)
    }

    pub fn n_included(&self) -> usize {
        self.terms.iter().filter(|t| t.is_included()).count()
    }

    pub fn is_null(&self) -> bool {
        self.n_included() == 0
    }

    /// Number of design columns the spec produces.
    pub fn dimension(&self, covariates: &[Covariate]) -> usize {
        self.terms
            .iter()
            .zip(covariates)
            .map(|(t, c)| match t {
                Term::Excluded => 0,
                Term::Linear => c.columns.len(),
                Term::Fp(fp) => fp.degree(),
            })
            .sum()
    }

    /// Compact report form, e.g. `x2:fp(-1,-2);x8:lin`. The null model is `(null)`.
    pub fn display(&self, covariates: &[Covariate]) -> String {
        let parts: Vec<String> = self
            .terms
            .iter()
            .zip(covariates)
            .filter_map(|(t, c)| match t {
                Term::Excluded => None,
                Term::Linear => Some(format!("{}:lin", c.name)),
                Term::Fp(fp) => {
                    let ps: Vec<String> = fp.powers().map(|p| Power(p).to_string()).collect();
                    Some(format!("{}:fp({})", c.name, ps.join(",")))
                }
            })
            .collect();
        if parts.is_empty() {
            "(null)".into()
        } else {
            parts.join(";")
        }
    }

    /// Inverse of [`ModelSpec::display`].
    pub fn parse(text: &str, covariates: &[Covariate]) -> Result<Self> {
        let mut spec = Self::null(covariates.len());
        let text = text.trim();
        if text == "(null)" || text.is_empty() {
            return Ok(spec);
        }
        for part in text.split(';') {
            let (name, term) = part.split_once(':').ok_or_else(|| Error::Schema(format!("malformed term `{part}`")))?;
            let k = covariates
                .iter()
                .position(|c| c.name == name.trim())
                .ok_or_else(|| Error::Schema(format!("unknown covariate `{name}`")))?;
            let term = term.trim();
            let parsed = if term == "lin" {
                Term::Linear
            } else if let Some(inner) = term.strip_prefix("fp(").and_then(|t| t.strip_suffix(')')) {
                let powers = inner
                    .split(',')
                    .map(|s| s.trim().parse::<f64>().map_err(|_| Error::Schema(format!("bad FP power `{s}`"))))
                    .collect::<Result<Vec<_>>>()?;
                Term::Fp(FpPowers::from_slice(&powers)?)
            } else {
                return Err(Error::Schema(format!("unknown term `{term}`")));
            };
            spec.terms[k] = parsed;
        }
        Ok(spec)
    }
}

/// Box–Tidwell FP columns for a positive vector: power 0 is `ln x`, a repeated
/// power `p` contributes `x^p` and `x^p ln x`. Columns are returned uncentered.
pub fn fp_transform(x: &[f64], powers: &FpPowers) -> Result<Vec<Vec<f64>>> {
    if let Some(bad) = x.iter().find(|v| !(**v > 0.0) || !v.is_finite()) {
        return Err(Error::domain(format!("FP transform needs positive values, found {bad}")));
    }
    let single = |p: f64| -> Vec<f64> {
        if p == 0.0 {
            x.iter().map(|v| v.ln()).collect()
        } else if p == 1.0 {
            x.to_vec()
        } else {
            x.iter().map(|v| v.powf(p)).collect()
        }
    };
    let mut cols = vec![single(powers.first.0)];
    if let Some(second) = powers.second {
        if second == powers.first {
            let repeated = cols[0].iter().zip(x).map(|(c, v)| c * v.ln()).collect();
            cols.push(repeated);
        } else {
            cols.push(single(second.0));
        }
    }
    Ok(cols)
}

/// Shift making a covariate strictly positive before FP transformation: zero
/// when all values are already positive, otherwise `-min + gap` with `gap` the
/// smallest positive difference between sorted distinct values.
pub fn fp_shift(x: &[f64]) -> f64 {
    let min = x.iter().copied().fold(f64::INFINITY, f64::min);
    if min > 0.0 {
        return 0.0;
    }
    let mut sorted: Vec<f64> = x.to_vec();
    sorted.sort_by(|a, b| a.total_cmp(b));
    let gap = sorted.windows(2).map(|w| w[1] - w[0]).filter(|d| *d > 0.0).fold(f64::INFINITY, f64::min);
    let gap = if gap.is_finite() { gap } else { 1.0 };
    -min + gap
}

/// Every non-linear FP assignment over `power_set` with degree up to `max_degree`.
pub fn nonlinear_fp_terms(power_set: &[f64], max_degree: usize) -> Vec<FpPowers> {
    let mut out = Vec::new();
    for &p in power_set {
        if p != 1.0 {
            out.push(FpPowers::one(p));
        }
    }
    if max_degree >= 2 {
        for (i, &p) in power_set.iter().enumerate() {
            for &q in &power_set[i..] {
                out.push(FpPowers::two(p, q));
            }
        }
    }
    out
}
