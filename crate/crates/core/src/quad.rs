//! Adaptive Simpson quadrature and the one-dimensional χ² total-variation
//! reference value built on it.

use libm::lgamma;

const MAX_DEPTH: u32 = 60;

fn simpson(fa: f64, fm: f64, fb: f64, a: f64, b: f64) -> f64 {
    (b - a) / 6.0 * (fa + 4.0 * fm + fb)
}

#[allow(clippy::too_many_arguments)]
fn recurse<F: Fn(f64) -> f64>(
    f: &F,
    a: f64,
    b: f64,
    fa: f64,
    fm: f64,
    fb: f64,
    whole: f64,
    tol: f64,
    depth: u32,
) -> f64 {
    let m = 0.5 * (a + b);
    let lm = 0.5 * (a + m);
    let rm = 0.5 * (m + b);
    let flm = f(lm);
    let frm = f(rm);
    let left = simpson(fa, flm, fm, a, m);
    let right = simpson(fm, frm, fb, m, b);
    let delta = left + right - whole;
    if depth >= MAX_DEPTH || delta.abs() <= 15.0 * tol {
        return left + right + delta / 15.0;
    }
    recurse(f, a, m, fa, flm, fm, left, 0.5 * tol, depth + 1)
        + recurse(f, m, b, fm, frm, fb, right, 0.5 * tol, depth + 1)
}

/// `∫_a^b f` to absolute tolerance `tol` (Richardson-corrected adaptive
/// Simpson). `f` must be finite on the closed interval.
pub fn adaptive_simpson<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, tol: f64) -> f64 {
    let m = 0.5 * (a + b);
    let (fa, fm, fb) = (f(a), f(m), f(b));
    let whole = simpson(fa, fm, fb, a, b);
    recurse(&f, a, b, fa, fm, fb, whole, tol, 0)
}

/// Upper integration limit that leaves negligible χ²_p mass beyond it.
fn chi_square_upper(p: usize) -> f64 {
    let p = p as f64;
    60f64.max(p + 20.0 * (2.0 * p).sqrt())
}

/// χ²_p density at `x > 0`.
pub fn chi_square_pdf(p: usize, x: f64) -> f64 {
    let h = 0.5 * p as f64;
    ((h - 1.0) * x.ln() - 0.5 * x - h * std::f64::consts::LN_2 - lgamma(h)).exp()
}

/// `TV(χ²_p, χ²_q) = ½∫|f_p − f_q|`, integrated in `u = √x` so the `x^{-1/2}`
/// singularity of χ²₁ at zero disappears.
pub fn chi_square_tv(p: usize, q: usize, tol: f64) -> f64 {
    let upper = chi_square_upper(p.max(q)).sqrt();
    let integrand = |u: f64| {
        if u == 0.0 {
            // 2u·f_p(u²) → √(2/π) for p = 1, 0 for p ≥ 2.
            let at_zero = |k: usize| {
                if k == 1 {
                    (2.0 / std::f64::consts::PI).sqrt()
                } else {
                    0.0
                }
            };
            return (at_zero(p) - at_zero(q)).abs();
        }
        let x = u * u;
        2.0 * u * (chi_square_pdf(p, x) - chi_square_pdf(q, x)).abs()
    };
    0.5 * adaptive_simpson(integrand, 0.0, upper, tol)
}
