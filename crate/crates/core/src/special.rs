//! Special functions used throughout: log-gamma, the regularized incomplete
//! gamma functions (log space, series / continued fraction by region), their
//! inverses, and a few normal-distribution helpers.

#[allow(unused_imports)]
use num_traits::Float;

const MAX_ITER: usize = 100_000;
const EPS: f64 = 1e-16;
const FPMIN: f64 = 1e-300;

pub const LN_SQRT_2PI: f64 = 0.918_938_533_204_672_7;

/// `ln Γ(x)` for `x > 0`.
#[inline]
pub fn ln_gamma(x: f64) -> f64 {
    libm::lgamma(x)
}

/// Numerically stable `ln Σ exp(v)`. Returns `-inf` for an empty input or
/// when every term is `-inf`.
pub fn log_sum_exp(values: &[f64]) -> f64 {
    let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if max == f64::NEG_INFINITY {
        return f64::NEG_INFINITY;
    }
    if max == f64::INFINITY {
        return f64::INFINITY;
    }
    let sum: f64 = values.iter().map(|v| (v - max).exp()).sum();
    max + sum.ln()
}

/// `ln(1 + e^x)` without overflow.
#[inline]
pub fn softplus(x: f64) -> f64 {
    if x > 0.0 {
        x + (-x).exp().ln_1p()
    } else {
        x.exp().ln_1p()
    }
}

#[inline]
pub fn expit(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

#[inline]
pub fn logit(p: f64) -> f64 {
    (p / (1.0 - p)).ln()
}

/// Log of the series `S(a, x) = Σ_{n≥0} x^n / (a (a+1) ⋯ (a+n))`, so that the
/// lower incomplete gamma is `γ(a, x) = x^a e^{-x} S(a, x)`.
///
/// Converges for every `x ≥ 0` but is only efficient for `x < a + 1`.
pub fn ln_gamma_series(a: f64, x: f64) -> f64 {
    let mut term = 1.0 / a;
    let mut sum = term;
    let mut ap = a;
    for _ in 0..MAX_ITER {
        ap += 1.0;
        term *= x / ap;
        sum += term;
        if term.abs() < sum.abs() * EPS {
            break;
        }
    }
    sum.ln()
}

/// Log of the continued fraction `h` with `Γ(a, x) = x^a e^{-x} h`
/// (modified Lentz). Efficient for `x ≥ a + 1`.
fn ln_gamma_cf(a: f64, x: f64) -> f64 {
    let mut b = x + 1.0 - a;
    let mut c = 1.0 / FPMIN;
    let mut d = 1.0 / b;
    let mut h = d;
    for i in 1..MAX_ITER {
        let an = -(i as f64) * (i as f64 - a);
        b += 2.0;
        d = an * d + b;
        if d.abs() < FPMIN {
            d = FPMIN;
        }
        c = b + an / c;
        if c.abs() < FPMIN {
            c = FPMIN;
        }
        d = 1.0 / d;
        let del = d * c;
        h *= del;
        if (del - 1.0).abs() < EPS {
            break;
        }
    }
    h.ln()
}

/// `ln P(a, x)`, the log of the regularized lower incomplete gamma function.
pub fn ln_gamma_p(a: f64, x: f64) -> f64 {
    debug_assert!(a > 0.0);
    if x <= 0.0 {
        return f64::NEG_INFINITY;
    }
    if x.is_infinite() {
        return 0.0;
    }
    if x < a + 1.0 {
        a * x.ln() - x - ln_gamma(a) + ln_gamma_series(a, x)
    } else {
        let ln_q = a * x.ln() - x - ln_gamma(a) + ln_gamma_cf(a, x);
        (-ln_q.exp()).ln_1p()
    }
}

/// `ln Q(a, x)`, the log of the regularized upper incomplete gamma function.
pub fn ln_gamma_q(a: f64, x: f64) -> f64 {
    debug_assert!(a > 0.0);
    if x <= 0.0 {
        return 0.0;
    }
    if x.is_infinite() {
        return f64::NEG_INFINITY;
    }
    if x < a + 1.0 {
        let ln_p = a * x.ln() - x - ln_gamma(a) + ln_gamma_series(a, x);
        (-ln_p.exp()).ln_1p()
    } else {
        a * x.ln() - x - ln_gamma(a) + ln_gamma_cf(a, x)
    }
}

#[inline]
pub fn gamma_p(a: f64, x: f64) -> f64 {
    ln_gamma_p(a, x).exp()
}

#[inline]
pub fn gamma_q(a: f64, x: f64) -> f64 {
    ln_gamma_q(a, x).exp()
}

/// Inverse of `P(a, ·)`: the `x` with `P(a, x) = p`.
pub fn inv_gamma_p(a: f64, p: f64) -> f64 {
    if p <= 0.0 {
        return 0.0;
    }
    if p >= 1.0 {
        return f64::INFINITY;
    }
    if p <= 0.5 {
        solve_incomplete_gamma(a, p.ln(), Tail::Lower)
    } else {
        solve_incomplete_gamma(a, (-p).ln_1p(), Tail::Upper)
    }
}

/// Inverse of `Q(a, ·)`: the `x` with `Q(a, x) = q`.
pub fn inv_gamma_q(a: f64, q: f64) -> f64 {
    if q >= 1.0 {
        return 0.0;
    }
    if q <= 0.0 {
        return f64::INFINITY;
    }
    if q <= 0.5 {
        solve_incomplete_gamma(a, q.ln(), Tail::Upper)
    } else {
        solve_incomplete_gamma(a, (-q).ln_1p(), Tail::Lower)
    }
}

/// Inverse of `P(a, ·)` for a target given on the log scale. Lets callers
/// ask for probabilities far below `f64::MIN_POSITIVE`.
pub fn inv_gamma_p_ln(a: f64, ln_p: f64) -> f64 {
    if ln_p == f64::NEG_INFINITY {
        return 0.0;
    }
    if ln_p >= 0.0 {
        return f64::INFINITY;
    }
    if ln_p <= -core::f64::consts::LN_2 {
        solve_incomplete_gamma(a, ln_p, Tail::Lower)
    } else {
        solve_incomplete_gamma(a, (-ln_p.exp()).ln_1p(), Tail::Upper)
    }
}

#[derive(Clone, Copy)]
enum Tail {
    Lower,
    Upper,
}

/// Safeguarded Newton in `u = ln x` on `ln P(a, e^u) - target` (or the upper
/// tail analogue), which is monotone in `u`.
fn solve_incomplete_gamma(a: f64, target: f64, tail: Tail) -> f64 {
    let lg = ln_gamma(a);
    // increasing in u for both tails after the sign flip below
    let f = |u: f64| -> (f64, f64) {
        let x = u.exp();
        match tail {
            Tail::Lower => {
                let lp = ln_gamma_p(a, x);
                let slope = (a * u - x - lg - lp).exp();
                (lp - target, slope)
            }
            Tail::Upper => {
                let lq = ln_gamma_q(a, x);
                let slope = (a * u - x - lg - lq).exp();
                (target - lq, slope)
            }
        }
    };

    let mut u = a.max(1e-3).ln();
    let (mut fu, _) = f(u);
    let (mut lo, mut hi);
    let mut step = 1.0;
    if fu < 0.0 {
        lo = u;
        loop {
            hi = lo + step;
            let (fh, _) = f(hi);
            if fh >= 0.0 || hi > 800.0 {
                break;
            }
            lo = hi;
            step *= 2.0;
        }
    } else {
        hi = u;
        loop {
            lo = hi - step;
            let (fl, _) = f(lo);
            if fl <= 0.0 || lo < -800.0 {
                break;
            }
            hi = lo;
            step *= 2.0;
        }
    }

    u = 0.5 * (lo + hi);
    for _ in 0..300 {
        let (val, slope) = f(u);
        fu = val;
        if fu == 0.0 {
            break;
        }
        if fu < 0.0 {
            lo = u;
        } else {
            hi = u;
        }
        let mut next = u - fu / slope;
        if !next.is_finite() || next <= lo || next >= hi {
            next = 0.5 * (lo + hi);
        }
        let delta = (next - u).abs();
        u = next;
        if delta <= 1e-15 * u.abs().max(1.0) || (hi - lo) <= 1e-15 * u.abs().max(1.0) {
            break;
        }
    }
    u.exp()
}

/// Upper tail of the standard normal, `1 - Φ(x)`.
#[inline]
pub fn normal_sf(x: f64) -> f64 {
    0.5 * libm::erfc(x / core::f64::consts::SQRT_2)
}

#[inline]
pub fn normal_cdf(x: f64) -> f64 {
    0.5 * libm::erfc(-x / core::f64::consts::SQRT_2)
}

/// `Φ⁻¹(p)`: rational initial guess refined by Halley steps on `erfc`.
pub fn normal_quantile(p: f64) -> f64 {
    if p <= 0.0 {
        return f64::NEG_INFINITY;
    }
    if p >= 1.0 {
        return f64::INFINITY;
    }
    // Work in the smaller tail for precision.
    if p > 0.5 {
        return -normal_lower_tail_quantile(1.0 - p);
    }
    normal_lower_tail_quantile(p)
}

/// Upper-tail quantile `Φ⁻¹(1 - q)` computed without forming `1 - q`.
pub fn normal_isf(q: f64) -> f64 {
    -normal_quantile(q)
}

fn normal_lower_tail_quantile(p: f64) -> f64 {
    const A: [f64; 6] = [
        -3.969_683_028_665_376e1,
        2.209_460_984_245_205e2,
        -2.759_285_104_469_687e2,
        1.383_577_518_672_69e2,
        -3.066_479_806_614_716e1,
        2.506_628_277_459_239,
    ];
    const B: [f64; 5] = [
        -5.447_609_879_822_406e1,
        1.615_858_368_580_409e2,
        -1.556_989_798_598_866e2,
        6.680_131_188_771_972e1,
        -1.328_068_155_288_572e1,
    ];
    const C: [f64; 6] = [
        -7.784_894_002_430_293e-3,
        -3.223_964_580_411_365e-1,
        -2.400_758_277_161_838,
        -2.549_732_539_343_734,
        4.374_664_141_464_968,
        2.938_163_982_698_783,
    ];
    const D: [f64; 4] =
        [7.784_695_709_041_462e-3, 3.224_671_290_700_398e-1, 2.445_134_137_142_996, 3.754_408_661_907_416];
    const P_LOW: f64 = 0.024_25;

    let mut x = if p < P_LOW {
        let q = (-2.0 * p.ln()).sqrt();
        (((((C[0] * q + C[1]) * q + C[2]) * q + C[3]) * q + C[4]) * q + C[5])
            / ((((D[0] * q + D[1]) * q + D[2]) * q + D[3]) * q + 1.0)
    } else {
        let q = p - 0.5;
        let r = q * q;
        (((((A[0] * r + A[1]) * r + A[2]) * r + A[3]) * r + A[4]) * r + A[5]) * q
            / (((((B[0] * r + B[1]) * r + B[2]) * r + B[3]) * r + B[4]) * r + 1.0)
    };
    for _ in 0..3 {
        let e = normal_cdf(x) - p;
        let u = e * (2.0 * core::f64::consts::PI).sqrt() * (0.5 * x * x).exp();
        x -= u / (1.0 + 0.5 * x * u);
    }
    x
}
