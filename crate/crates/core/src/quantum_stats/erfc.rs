//! Scaled complementary error function G(z) = √π z e^{z²} erfc(z).
//!
//! G is evaluated through the Faddeeva function, e^{z²} erfc(z) = w(iz).
//! w follows the three-region scheme of Poppe and Wijers: a Maclaurin series
//! near the origin, Gautschi's truncated Taylor/continued-fraction hybrid in
//! the intermediate ring, and the Laplace continued fraction outside the
//! ellipse (x/6.3)² + (y/4.4)² = 1. In that outer region G − 1 is taken
//! straight from the continued fraction so the leading 1 never cancels.

use num_complex::Complex64;

const TWO_OVER_SQRT_PI: f64 = std::f64::consts::FRAC_2_SQRT_PI;
const SQRT_PI: f64 = 1.772_453_850_905_516;

/// G(z) = √π z e^{z²} erfc(z) for any complex z.
pub fn scaled_erfc(z: Complex64) -> Complex64 {
    if z.re >= 0.0 {
        if let Some(gm1) = continued_fraction_gm1(z) {
            return gm1 + 1.0;
        }
        SQRT_PI * z * faddeeva_upper(Complex64::new(-z.im, z.re))
    } else {
        // erfc(−z) = 2 − erfc(z)  ⇒  G(z) = G(−z) + 2√π z e^{z²}
        scaled_erfc(-z) + 2.0 * SQRT_PI * z * (z * z).exp()
    }
}

/// G(z) − 1, accurate also where G → 1 (large |z|, Re z ≥ 0).
pub fn scaled_erfc_minus_one(z: Complex64) -> Complex64 {
    if z.re >= 0.0 {
        if let Some(gm1) = continued_fraction_gm1(z) {
            return gm1;
        }
    }
    scaled_erfc(z) - 1.0
}

/// G(−z) − 1 for Re z ≤ 0, i.e. the value without the exponential
/// term picked up by the reflection.
pub(crate) fn reflected_scaled_erfc_minus_one(z: Complex64) -> Complex64 {
    scaled_erfc_minus_one(-z)
}

fn outer_region(zeta: Complex64) -> Option<f64> {
    let x = zeta.re.abs() / 6.3;
    let y = zeta.im.abs() / 4.4;
    let q = x * x + y * y;
    (q > 1.0).then(|| q.sqrt())
}

/// Laplace continued fraction for Re z ≥ 0 outside the ellipse:
///   √π e^{z²} erfc(z) = 1/(z + t₁),  t_n = (n/2)/(z + t_{n+1}),
/// so G − 1 = −t₁/(z + t₁).
fn continued_fraction_gm1(z: Complex64) -> Option<Complex64> {
    let rho = outer_region(Complex64::new(-z.im, z.re))?;
    let nu = 3 + (1442.0 / (26.0 + 77.0 * rho)) as usize;
    let mut t = Complex64::new(0.0, 0.0);
    for n in (1..=nu).rev() {
        t = (0.5 * n as f64) / (z + t);
    }
    let mut gm1 = -t / (z + t);
    if z.re == 0.0 {
        // On the imaginary axis the fraction drops the Gaussian real part of
        // w on the real line; restore it (it only matters for moderate |z|).
        let y = z.im;
        gm1 += Complex64::new(0.0, SQRT_PI * y * (-y * y).exp());
    }
    Some(gm1)
}

/// Faddeeva w(ζ) = e^{−ζ²} erfc(−iζ) for Im ζ ≥ 0.
pub fn faddeeva_upper(zeta: Complex64) -> Complex64 {
    debug_assert!(zeta.im >= 0.0);
    let xi = zeta.re;
    let xabs = xi.abs();
    let yabs = zeta.im;
    let x = xabs / 6.3;
    let y = yabs / 4.4;
    let mut qrho = x * x + y * y;
    let xquad = xabs * xabs - yabs * yabs;
    let yquad = 2.0 * xabs * yabs;

    let (u, v) = if qrho < 0.085264 {
        qrho = (1.0 - 0.85 * y) * qrho.sqrt();
        let n = (6.0 + 72.0 * qrho).round() as usize;
        let mut j = 2 * n + 1;
        let mut xsum = 1.0 / j as f64;
        let mut ysum = 0.0;
        for i in (1..=n).rev() {
            j -= 2;
            let fi = i as f64;
            let xaux = (xsum * xquad - ysum * yquad) / fi;
            ysum = (xsum * yquad + ysum * xquad) / fi;
            xsum = xaux + 1.0 / j as f64;
        }
        let u1 = -TWO_OVER_SQRT_PI * (xsum * yabs + ysum * xabs) + 1.0;
        let v1 = TWO_OVER_SQRT_PI * (xsum * xabs - ysum * yabs);
        let daux = (-xquad).exp();
        let u2 = daux * yquad.cos();
        let v2 = -daux * yquad.sin();
        (u1 * u2 - v1 * v2, u1 * v2 + v1 * u2)
    } else {
        let (h, kapn, nu) = if qrho > 1.0 {
            let rho = qrho.sqrt();
            (0.0, 0usize, 3 + (1442.0 / (26.0 + 77.0 * rho)) as usize)
        } else {
            let q = (1.0 - y) * (1.0 - qrho).sqrt();
            (
                1.88 * q,
                (7.0 + 34.0 * q).round() as usize,
                (16.0 + 26.0 * q).round() as usize,
            )
        };
        let h2 = 2.0 * h;
        let use_taylor = h > 0.0;
        let mut qlambda = if use_taylor { h2.powi(kapn as i32) } else { 0.0 };
        let (mut rx, mut ry, mut sx, mut sy) = (0.0, 0.0, 0.0, 0.0);
        for n in (0..=nu).rev() {
            let np1 = (n + 1) as f64;
            let tx = yabs + h + np1 * rx;
            let ty = xabs - np1 * ry;
            let c = 0.5 / (tx * tx + ty * ty);
            rx = c * tx;
            ry = c * ty;
            if use_taylor && n <= kapn {
                let tx = qlambda + sx;
                sx = rx * tx - ry * sy;
                sy = ry * tx + rx * sy;
                qlambda /= h2;
            }
        }
        let (mut u, v) = if use_taylor {
            (TWO_OVER_SQRT_PI * sx, TWO_OVER_SQRT_PI * sy)
        } else {
            (TWO_OVER_SQRT_PI * rx, TWO_OVER_SQRT_PI * ry)
        };
        if yabs == 0.0 {
            u = (-xabs * xabs).exp();
        }
        (u, v)
    };
    if xi < 0.0 {
        Complex64::new(u, -v)
    } else {
        Complex64::new(u, v)
    }
}
