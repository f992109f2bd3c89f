//! Adaptive Gauss–Kronrod (7, 15) quadrature for complex integrands.

#![allow(dead_code)]

use num_complex::Complex64;

const XGK: [f64; 8] = [
    0.991455371120812639206854697526329,
    0.949107912342758524526189684047851,
    0.864864423359769072789712788640926,
    0.741531185599394439863864773280788,
    0.586087235467691130294144845693013,
    0.405845151377397166906606412076961,
    0.207784955007898467600689403773245,
    0.000000000000000000000000000000000,
];
const WGK: [f64; 8] = [
    0.022935322010529224963732008058970,
    0.063092092629978553290700663189204,
    0.104790010322250183839876322541518,
    0.140653259715525918745189590510238,
    0.169004726639267902826583426598550,
    0.190350578064785409913256402421014,
    0.204432940075298892414161999234649,
    0.209482141084727828012999174891714,
];
const WG: [f64; 4] = [
    0.129484966168869693270611432679082,
    0.279705391489276667901467771423780,
    0.381830050505118944950369775488975,
    0.417959183673469387755102040816327,
];

/// Kronrod estimate, error estimate and `∫|f|` on `[a, b]`.
fn kronrod<F: Fn(f64) -> Complex64>(f: &F, a: f64, b: f64) -> (Complex64, f64, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut k = fc * WGK[7];
    let mut g = fc * WG[3];
    let mut abs = fc.norm() * WGK[7];
    for j in 0..7 {
        let (lo, hi) = (f(c - h * XGK[j]), f(c + h * XGK[j]));
        let s = lo + hi;
        k += s * WGK[j];
        abs += (lo.norm() + hi.norm()) * WGK[j];
        if j % 2 == 1 {
            g += s * WG[j / 2];
        }
    }
    (k * h, ((k - g) * h).norm(), abs * h.abs())
}

/// `∫_a^b f` to absolute tolerance `tol` by recursive bisection.
pub fn integrate<F: Fn(f64) -> Complex64>(f: &F, a: f64, b: f64, tol: f64) -> Complex64 {
    fn rec<F: Fn(f64) -> Complex64>(f: &F, a: f64, b: f64, tol: f64, depth: u32) -> Complex64 {
        let (v, err, abs) = kronrod(f, a, b);
        // below the rounding floor further bisection cannot help
        if err <= tol || err <= 50.0 * f64::EPSILON * abs || depth == 0 {
            return v;
        }
        let m = 0.5 * (a + b);
        rec(f, a, m, 0.5 * tol, depth - 1) + rec(f, m, b, 0.5 * tol, depth - 1)
    }
    rec(f, a, b, tol, 30)
}

/// Gabor transform of a one-variable signal at `(x, y)` by direct quadrature
/// of the defining integral over `[x - 12, x + 12]`.
pub fn gabor_point<F: Fn(f64) -> Complex64>(f: &F, x: f64, y: f64, tol: f64) -> Complex64 {
    let integrand = |t: f64| {
        let w = (-std::f64::consts::PI * (t - x) * (t - x)).exp();
        f(t) * Complex64::from_polar(w, -2.0 * std::f64::consts::PI * t * y)
    };
    integrate(&integrand, x - 12.0, x + 12.0, tol)
}
