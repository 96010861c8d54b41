//! Generalized zeta series ζ_r^±(α) = Σ_j (∓1)^{j−1} α^j / j^r.
//!
//! Small fugacities are summed directly with an explicit tail bound. Near
//! α = 1 the boson series converges too slowly for that, so it is expanded
//! about μ = ln α = 0 instead; the alternating fermion series is
//! accelerated with the Cohen–Villegas–Zagier weights.

use super::Statistics;
use crate::error::{DisperseError, Result};
use statrs::function::gamma::gamma;

/// Relative truncation tolerance of every series in this module.
pub const SERIES_TOL: f64 = 1e-14;

const MAX_DIRECT_TERMS: usize = 100_000;
const BOSE_EXPANSION_THRESHOLD: f64 = 0.75;
const FERMI_ACCELERATION_THRESHOLD: f64 = 0.5;
const CVZ_TERMS: usize = 24;

/// A truncated series value and the number of terms that produced it.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SeriesSum {
    pub value: f64,
    pub terms: usize,
}

/// ζ_r^±(α); upper sign (alternating) for fermions, lower for bosons.
pub fn zeta_pm(order: f64, alpha: f64, statistics: Statistics) -> Result<f64> {
    zeta_pm_series(order, alpha, statistics).map(|s| s.value)
}

/// Same as [`zeta_pm`], also reporting the truncation index.
pub fn zeta_pm_series(order: f64, alpha: f64, statistics: Statistics) -> Result<SeriesSum> {
    if !(order >= 1.0) || !order.is_finite() {
        return Err(DisperseError::InvalidArgument {
            field: "order",
            reason: format!("must be a finite real >= 1, got {order}"),
        });
    }
    if !(0.0..=1.0).contains(&alpha) {
        return Err(DisperseError::InvalidArgument {
            field: "alpha",
            reason: format!("must lie in [0, 1], got {alpha}"),
        });
    }
    if alpha == 0.0 {
        return Ok(SeriesSum { value: 0.0, terms: 0 });
    }
    match statistics {
        Statistics::Bose => {
            if alpha == 1.0 && order <= 1.0 {
                return Err(DisperseError::NonConvergent(format!(
                    "boson series of order {order} diverges at alpha = 1"
                )));
            }
            if alpha > BOSE_EXPANSION_THRESHOLD {
                Ok(polylog_near_one(order, alpha))
            } else {
                bose_direct(order, alpha)
            }
        }
        Statistics::Fermi => {
            if alpha > FERMI_ACCELERATION_THRESHOLD {
                Ok(fermi_accelerated(order, alpha))
            } else {
                Ok(fermi_direct(order, alpha))
            }
        }
    }
}

fn bose_direct(order: f64, alpha: f64) -> Result<SeriesSum> {
    let mut sum = 0.0;
    let mut power = 1.0;
    for j in 1..=MAX_DIRECT_TERMS {
        power *= alpha;
        sum += power / (j as f64).powf(order);
        let next = (j + 1) as f64;
        let tail = power * alpha / (next.powf(order) * (1.0 - alpha));
        if tail < SERIES_TOL * sum {
            return Ok(SeriesSum { value: sum, terms: j });
        }
    }
    Err(DisperseError::NonConvergent(format!(
        "boson series (order {order}, alpha {alpha}) exceeded {MAX_DIRECT_TERMS} terms"
    )))
}

fn fermi_direct(order: f64, alpha: f64) -> SeriesSum {
    let mut sum = 0.0;
    let mut power = 1.0;
    let mut sign = 1.0;
    let mut j = 1usize;
    loop {
        power *= alpha;
        sum += sign * power / (j as f64).powf(order);
        let next = power * alpha / ((j + 1) as f64).powf(order);
        // α ≤ 1/2 here, so the first neglected term reaches the tolerance
        // within a few dozen terms.
        if next < SERIES_TOL * sum.abs() || next == 0.0 {
            return SeriesSum { value: sum, terms: j };
        }
        sign = -sign;
        j += 1;
    }
}

/// Cohen–Villegas–Zagier acceleration of Σ_k (−1)^k a_k with
/// a_k = α^{k+1}/(k+1)^r, a totally monotone sequence for 0 < α ≤ 1.
fn fermi_accelerated(order: f64, alpha: f64) -> SeriesSum {
    let n = CVZ_TERMS;
    let mut d = (3.0 + 8f64.sqrt()).powi(n as i32);
    d = 0.5 * (d + 1.0 / d);
    let mut b = -1.0;
    let mut c = -d;
    let mut sum = 0.0;
    for k in 0..n {
        c = b - c;
        let a_k = alpha.powi(k as i32 + 1) / ((k + 1) as f64).powf(order);
        sum += c * a_k;
        let kf = k as f64;
        let nf = n as f64;
        b *= (kf + nf) * (kf - nf) / ((kf + 0.5) * (kf + 1.0));
    }
    SeriesSum {
        value: sum / d,
        terms: n,
    }
}

/// Li_s(e^μ) for μ = ln α near zero:
///   non-integer s: Γ(1−s)(−μ)^{s−1} + Σ_k ζ(s−k) μ^k / k!
///   integer s = n: μ^{n−1}/(n−1)! (H_{n−1} − ln(−μ)) + Σ_{k≠n−1} ζ(n−k) μ^k / k!
/// Both converge for |μ| < 2π.
fn polylog_near_one(s: f64, alpha: f64) -> SeriesSum {
    let mu = alpha.ln();
    let integer = s.fract() == 0.0;
    let n_int = s as i64;

    let mut total = 0.0;
    if integer {
        let n = n_int as i32;
        if mu != 0.0 {
            let mut factorial = 1.0;
            let mut harmonic = 0.0;
            for i in 1..n {
                factorial *= i as f64;
                harmonic += 1.0 / i as f64;
            }
            total += mu.powi(n - 1) / factorial * (harmonic - (-mu).ln());
        }
    } else if mu != 0.0 {
        total += gamma(1.0 - s) * (-mu).powf(s - 1.0);
    }

    let mut mu_power = 1.0;
    let mut factorial = 1.0;
    let mut terms = 0;
    let mut small_run = 0;
    for k in 0..80usize {
        if k > 0 {
            mu_power *= mu;
            factorial *= k as f64;
        }
        terms = k + 1;
        if integer && k as i64 == n_int - 1 {
            continue;
        }
        let term = riemann_zeta(s - k as f64) * mu_power / factorial;
        total += term;
        if (k as f64) > s + 2.0 {
            if term.abs() <= 1e-17 * total.abs() {
                small_run += 1;
                if small_run >= 2 {
                    break;
                }
            } else {
                small_run = 0;
            }
        }
        if mu == 0.0 {
            break;
        }
    }
    SeriesSum { value: total, terms }
}

const BERNOULLI_EVEN: [f64; 12] = [
    1.0 / 6.0,
    -1.0 / 30.0,
    1.0 / 42.0,
    -1.0 / 30.0,
    5.0 / 66.0,
    -691.0 / 2730.0,
    7.0 / 6.0,
    -3617.0 / 510.0,
    43867.0 / 798.0,
    -174611.0 / 330.0,
    854513.0 / 138.0,
    -236364091.0 / 2730.0,
];

/// Riemann ζ(x) for real x ≠ 1 (Euler–Maclaurin for x > 0, reflection
/// formula for x < 0).
pub fn riemann_zeta(x: f64) -> f64 {
    if x == 1.0 {
        return f64::INFINITY;
    }
    if x == 0.0 {
        return -0.5;
    }
    if x < 0.0 {
        if (x / 2.0).fract() == 0.0 {
            return 0.0;
        }
        let one_minus = 1.0 - x;
        return 2f64.powf(x)
            * std::f64::consts::PI.powf(x - 1.0)
            * (std::f64::consts::FRAC_PI_2 * x).sin()
            * gamma(one_minus)
            * riemann_zeta(one_minus);
    }
    const N: usize = 12;
    let nf = N as f64;
    let mut sum: f64 = (1..N).map(|n| (n as f64).powf(-x)).sum();
    sum += nf.powf(1.0 - x) / (x - 1.0) + 0.5 * nf.powf(-x);
    // B_{2k}/(2k)! · x(x+1)…(x+2k−2) · N^{−x−2k+1}
    let mut rising = x;
    let mut factorial = 2.0;
    let mut n_power = nf.powf(-x - 1.0);
    for (k, b) in BERNOULLI_EVEN.iter().enumerate() {
        if k > 0 {
            let m = 2.0 * k as f64;
            rising *= (x + m - 1.0) * (x + m);
            factorial *= (m + 1.0) * (m + 2.0);
            n_power /= nf * nf;
        }
        sum += b / factorial * rising * n_power;
    }
    sum
}
