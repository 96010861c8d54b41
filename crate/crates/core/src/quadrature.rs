//! Globally adaptive Gauss–Kronrod (7/15) quadrature for complex-valued
//! integrands on a finite interval with optional interior breakpoints.

use crate::error::{DisperseError, Result};
use num_complex::Complex64;
use std::cmp::Ordering;
use std::collections::BinaryHeap;

const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_18,
    0.140_653_259_715_525_92,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_83,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

/// Maximum bisection depth of any panel.
pub const MAX_DEPTH: u32 = 30;

#[derive(Debug, Clone, Copy)]
pub struct QuadratureResult {
    pub value: Complex64,
    pub error: f64,
    pub evaluations: usize,
}

struct Panel {
    a: f64,
    b: f64,
    value: Complex64,
    error: f64,
    depth: u32,
}

impl PartialEq for Panel {
    fn eq(&self, other: &Self) -> bool {
        self.error == other.error
    }
}
impl Eq for Panel {}
impl PartialOrd for Panel {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Panel {
    fn cmp(&self, other: &Self) -> Ordering {
        self.error.total_cmp(&other.error)
    }
}

fn kronrod<F: Fn(f64) -> Complex64>(f: &F, a: f64, b: f64) -> (Complex64, f64) {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(center);
    let mut kronrod = fc * WGK[7];
    let mut gauss = fc * WG[3];
    for (i, (&x, &w)) in XGK.iter().zip(WGK.iter()).take(7).enumerate() {
        let dx = half * x;
        let pair = f(center - dx) + f(center + dx);
        kronrod += pair * w;
        if i % 2 == 1 {
            gauss += pair * WG[i / 2];
        }
    }
    let value = kronrod * half;
    let error = ((kronrod - gauss) * half).norm();
    (value, error)
}

/// ∫ f over [a, b] split at `breakpoints`, to absolute tolerance `abs_tol`.
pub fn integrate<F>(f: F, a: f64, b: f64, breakpoints: &[f64], abs_tol: f64) -> Result<QuadratureResult>
where
    F: Fn(f64) -> Complex64,
{
    let mut edges: Vec<f64> = std::iter::once(a)
        .chain(breakpoints.iter().copied().filter(|&p| p > a && p < b))
        .chain(std::iter::once(b))
        .collect();
    edges.sort_by(f64::total_cmp);
    edges.dedup();

    let mut heap = BinaryHeap::new();
    let mut total = Complex64::new(0.0, 0.0);
    let mut total_error = 0.0;
    let mut evaluations = 0;
    for w in edges.windows(2) {
        let (value, error) = kronrod(&f, w[0], w[1]);
        evaluations += 15;
        total += value;
        total_error += error;
        heap.push(Panel {
            a: w[0],
            b: w[1],
            value,
            error,
            depth: 0,
        });
    }

    loop {
        if total_error <= abs_tol {
            // Running sums can lose the panels' errors to cancellation.
            total_error = heap.iter().map(|p| p.error).sum();
            total = heap.iter().map(|p| p.value).sum();
            if total_error <= abs_tol {
                break;
            }
        }
        let worst = heap.pop().expect("at least one panel");
        if worst.depth >= MAX_DEPTH {
            return Err(DisperseError::QuadratureFailure(format!(
                "depth {MAX_DEPTH} reached near [{:.6e}, {:.6e}] with error {:.3e} > {:.3e}",
                worst.a, worst.b, total_error, abs_tol
            )));
        }
        let mid = 0.5 * (worst.a + worst.b);
        let (left, left_err) = kronrod(&f, worst.a, mid);
        let (right, right_err) = kronrod(&f, mid, worst.b);
        evaluations += 30;
        total += left + right - worst.value;
        total_error += left_err + right_err - worst.error;
        for (a, b, value, error) in [(worst.a, mid, left, left_err), (mid, worst.b, right, right_err)] {
            heap.push(Panel {
                a,
                b,
                value,
                error,
                depth: worst.depth + 1,
            });
        }
    }
    Ok(QuadratureResult {
        value: total,
        error: total_error,
        evaluations,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn polynomial_is_exact() {
        let r = integrate(|x| Complex64::new(x.powi(5) - 2.0 * x, x * x), -1.0, 2.0, &[], 1e-14).unwrap();
        let expect = Complex64::new((64.0 - 1.0) / 6.0 - (4.0 - 1.0), (8.0 + 1.0) / 3.0);
        assert!((r.value - expect).norm() < 1e-13);
    }

    #[test]
    fn near_pole_with_breakpoint() {
        // ∫_{-1}^{1} dx/(x − i δ) = 2i atan(1/δ)
        let d = 1e-4;
        let r = integrate(|x| 1.0 / Complex64::new(x, -d), -1.0, 1.0, &[0.0], 1e-11).unwrap();
        let expect = Complex64::new(0.0, 2.0 * (1.0 / d).atan());
        assert!((r.value - expect).norm() < 1e-10, "{:?}", r.value);
    }

    #[test]
    fn singular_integrand_fails_at_depth_limit() {
        let r = integrate(|x| Complex64::new(1.0 / (x * x), 0.0), -1.0, 1.0, &[0.0], 1e-9);
        assert!(matches!(r, Err(DisperseError::QuadratureFailure(_))));
    }
}
