use alloc::vec::Vec;

#[allow(unused_imports)]
use num_traits::Float;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::bayes_factors::{local_eb_g, tbf_nonconjugate_with_grid, GPrior, GPriorSpec, IncIg, LogGrid, NonConjugate};
use crate::{Error, Result};

/// `IncIG(a, b)` quantile.
pub fn incig_quantile(p: f64, a: f64, b: f64) -> Result<f64> {
    IncIg::new(a, b)?.quantile(p)
}

/// `IncIG(a, b)` distribution function.
pub fn incig_cdf(g: f64, a: f64, b: f64) -> Result<f64> {
    Ok(IncIg::new(a, b)?.cdf(g))
}

/// Posterior of `g` given a model's deviance.
#[derive(Debug, Clone, PartialEq)]
pub enum GPosterior {
    /// Fixed and empirical-Bayes schemes plug in a single value.
    PointMass(f64),
    IncIg(IncIg),
    Grid(GridPosterior),
}

impl GPosterior {
    /// Posterior for a model with deviance `z` on `d` degrees of freedom.
    /// Global EB needs the shared estimate, see [`GPosterior::global`].
    pub fn new(z: f64, d: usize, spec: &GPriorSpec) -> Result<Self> {
        if d == 0 {
            return Ok(GPosterior::PointMass(0.0));
        }
        Ok(match spec.prior {
            GPrior::FixedG(g) => GPosterior::PointMass(g),
            GPrior::LocalEb { .. } => GPosterior::PointMass(local_eb_g(z, d)?),
            GPrior::GlobalEb => {
                return Err(Error::Unsupported("global EB posterior needs the shared estimate of g".into()))
            }
            GPrior::IncIg { a, b } => GPosterior::IncIg(IncIg::new(a, b)?.posterior(z, d)),
            GPrior::ZellnerSiow => GPosterior::Grid(GridPosterior::new(
                tbf_nonconjugate_with_grid(z, d, NonConjugate::ZellnerSiow, spec.n_eff)?.1,
            )?),
            GPrior::HyperGOverN => GPosterior::Grid(GridPosterior::new(
                tbf_nonconjugate_with_grid(z, d, NonConjugate::HyperGOverN, spec.n_eff)?.1,
            )?),
        })
    }

    /// Point mass at the global EB estimate.
    pub fn global(g: f64) -> Result<Self> {
        if !(g >= 0.0) || !g.is_finite() {
            return Err(Error::domain("g must be finite and non-negative"));
        }
        Ok(GPosterior::PointMass(g))
    }

    pub fn quantile(&self, p: f64) -> Result<f64> {
        match self {
            GPosterior::PointMass(g) => {
                if !(0.0..=1.0).contains(&p) {
                    return Err(Error::domain("quantile level outside [0, 1]"));
                }
                Ok(*g)
            }
            GPosterior::IncIg(d) => d.quantile(p),
            GPosterior::Grid(grid) => grid.quantile(p),
        }
    }

    /// Inverse-CDF draws.
    pub fn sample(&self, draws: usize, seed: u64) -> Result<Vec<f64>> {
        if draws == 0 {
            return Err(Error::domain("at least one draw is needed"));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..draws).map(|_| self.quantile(rng.random::<f64>())).collect()
    }

    /// Posterior mean of `t = g / (g + 1)`.
    pub fn mean_t(&self) -> f64 {
        match self {
            GPosterior::PointMass(g) => g / (g + 1.0),
            GPosterior::IncIg(d) => d.mean_t(),
            GPosterior::Grid(grid) => grid.mean_t(),
        }
    }

    /// Posterior mode of `t` where it has a closed form.
    pub fn mode_t(&self) -> Option<f64> {
        match self {
            GPosterior::PointMass(g) => Some(g / (g + 1.0)),
            GPosterior::IncIg(d) => Some(d.mode_t()),
            GPosterior::Grid(_) => None,
        }
    }

    pub fn summary(&self, level: f64) -> Result<GSummary> {
        if !(level > 0.0 && level < 1.0) {
            return Err(Error::domain("interval level must lie in (0, 1)"));
        }
        let tail = 0.5 * (1.0 - level);
        Ok(GSummary {
            mean_t: self.mean_t(),
            mode_t: self.mode_t(),
            median_g: self.quantile(0.5)?,
            lower_g: self.quantile(tail)?,
            upper_g: self.quantile(1.0 - tail)?,
            level,
        })
    }
}

/// Draws from [`GPosterior::sample`], one per entry.
pub fn sample_g(post: &GPosterior, draws: usize, seed: u64) -> Result<Vec<f64>> {
    post.sample(draws, seed)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GSummary {
    pub mean_t: f64,
    pub mode_t: Option<f64>,
    pub median_g: f64,
    pub lower_g: f64,
    pub upper_g: f64,
    pub level: f64,
}

/// Tabulated posterior of `s` (see [`LogGrid`]) with the log density
/// interpolated linearly between nodes, so each cell is an exponential piece.
#[derive(Debug, Clone, PartialEq)]
pub struct GridPosterior {
    grid: LogGrid,
    /// Log density relative to its maximum.
    rel: Vec<f64>,
    /// Cumulative mass of the interpolated density at each node, ending at 1.
    cum: Vec<f64>,
    /// Log of the Simpson integral, the rule the marginal likelihood uses.
    ln_mass: f64,
}

/// Mass of one cell of width `h` whose log density runs from `l0` to `l1`
/// (values relative to the global maximum). A cell touching `-inf` falls back
/// to a linear density.
fn cell_mass(l0: f64, l1: f64, h: f64) -> f64 {
    match (l0.is_finite(), l1.is_finite()) {
        (false, false) => 0.0,
        (true, false) => 0.5 * h * l0.exp(),
        (false, true) => 0.5 * h * l1.exp(),
        (true, true) => {
            let k = l1 - l0;
            if k.abs() < 1e-12 {
                h * l0.exp()
            } else if k > 0.0 {
                h * l1.exp() * (-(-k).exp_m1()) / k
            } else {
                h * l0.exp() * k.exp_m1() / k
            }
        }
    }
}

/// Offset within a cell at which a fraction `q` of its mass is reached.
fn cell_inverse(l0: f64, l1: f64, h: f64, q: f64) -> f64 {
    match (l0.is_finite(), l1.is_finite()) {
        (false, false) => q * h,
        // density proportional to (h - x) or x
        (true, false) => h * (1.0 - (1.0 - q).sqrt()),
        (false, true) => h * q.sqrt(),
        (true, true) => {
            let k = l1 - l0;
            if k.abs() < 1e-12 {
                q * h
            } else if k > 0.0 {
                (h + (q + (1.0 - q) * (-k).exp()).ln() * h / k).clamp(0.0, h)
            } else {
                ((q * k.exp_m1()).ln_1p() * h / k).clamp(0.0, h)
            }
        }
    }
}

/// Composite Simpson of `f(s) exp(rel)` on uniform nodes (an even number of cells).
fn simpson_weighted(s: &[f64], rel: &[f64], f: impl Fn(f64) -> f64) -> f64 {
    let m = rel.len() - 1;
    let h = (s[m] - s[0]) / m as f64;
    let mut sum = 0.0;
    for i in 0..=m {
        let w = if i == 0 || i == m {
            1.0
        } else if i % 2 == 1 {
            4.0
        } else {
            2.0
        };
        sum += w * f(s[i]) * rel[i].exp();
    }
    sum * h / 3.0
}

impl GridPosterior {
    pub fn new(grid: LogGrid) -> Result<Self> {
        if grid.s.len() < 3 || grid.s.len().is_multiple_of(2) || grid.s.len() != grid.log_density.len() {
            return Err(Error::domain("grid needs an odd number (at least 3) of matching nodes"));
        }
        let max = grid.log_density.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        if !max.is_finite() {
            return Err(Error::Numeric("grid density vanishes everywhere".into()));
        }
        let rel: Vec<f64> = grid.log_density.iter().map(|l| l - max).collect();
        let mut cum = Vec::with_capacity(rel.len());
        cum.push(0.0);
        let mut total = 0.0;
        for i in 0..rel.len() - 1 {
            total += cell_mass(rel[i], rel[i + 1], grid.s[i + 1] - grid.s[i]);
            cum.push(total);
        }
        if !(total > 0.0) {
            return Err(Error::Numeric("grid density vanishes everywhere".into()));
        }
        for c in &mut cum {
            *c /= total;
        }
        let ln_mass = max + simpson_weighted(&grid.s, &rel, |_| 1.0).ln();
        Ok(Self { ln_mass, grid, rel, cum })
    }

    pub fn grid(&self) -> &LogGrid {
        &self.grid
    }

    /// Normalised log density of `s` at node `i`.
    pub fn ln_density_at(&self, i: usize) -> f64 {
        self.grid.log_density[i] - self.ln_mass
    }

    /// Quantile of `s` under the interpolated density.
    pub fn quantile_s(&self, p: f64) -> f64 {
        let i = match self.cum.binary_search_by(|c| c.total_cmp(&p)) {
            Ok(i) => i.min(self.cum.len() - 2),
            Err(i) => i.saturating_sub(1).min(self.cum.len() - 2),
        };
        let width = self.cum[i + 1] - self.cum[i];
        let q = if width > 0.0 { ((p - self.cum[i]) / width).clamp(0.0, 1.0) } else { 0.0 };
        let h = self.grid.s[i + 1] - self.grid.s[i];
        self.grid.s[i] + cell_inverse(self.rel[i], self.rel[i + 1], h, q)
    }

    /// Quantile of `g`; `g` decreases in `s`, so the tail flips.
    pub fn quantile(&self, p: f64) -> Result<f64> {
        if !(0.0..1.0).contains(&p) {
            return if p == 1.0 {
                Err(Error::InfiniteQuantile)
            } else {
                Err(Error::domain("quantile level outside [0, 1)"))
            };
        }
        Ok(self.grid.g_at(self.quantile_s(1.0 - p)))
    }

    /// `E[t]` by composite Simpson over the nodes.
    pub fn mean_t(&self) -> f64 {
        let n = self.grid.n_eff;
        // t = g / (g + 1) with g = n (1 - s²) / s²
        let t = |s: f64| {
            let u = (1.0 - s) * (1.0 + s);
            if s == 0.0 {
                1.0
            } else {
                n * u / (n * u + s * s)
            }
        };
        simpson_weighted(&self.grid.s, &self.rel, t) / simpson_weighted(&self.grid.s, &self.rel, |_| 1.0)
    }
}
