//! Numerical quadrature used by the analytic rate expressions.
//!
//! Two independent schemes are provided on purpose: adaptive Simpson is the
//! workhorse, and composite Gauss–Legendre acts as a structurally different
//! oracle for cross-checks. A complex-valued Gauss–Legendre routine supports
//! the contour evaluation of the proportional-fair success probability.

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Adaptive Simpson on [a, b] to relative tolerance `rel_tol` (absolute floor
/// `abs_floor` guards integrals that are themselves tiny).
pub fn adaptive_simpson<F: Fn(f64) -> f64>(
    f: &F,
    a: f64,
    b: f64,
    rel_tol: f64,
    abs_floor: f64,
) -> Result<f64> {
    let fa = f(a);
    let fb = f(b);
    let m = 0.5 * (a + b);
    let fm = f(m);
    let whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    // A rough scale for relative-error decisions; refined as recursion deepens.
    let scale = whole.abs().max(abs_floor);
    let mut evals = 0usize;
    let v = simpson_rec(
        f, a, b, fa, fm, fb, whole, rel_tol * scale, 50, &mut evals,
    )?;
    Ok(v)
}

#[allow(clippy::too_many_arguments)]
fn simpson_rec<F: Fn(f64) -> f64>(
    f: &F,
    a: f64,
    b: f64,
    fa: f64,
    fm: f64,
    fb: f64,
    whole: f64,
    tol: f64,
    depth: u32,
    evals: &mut usize,
) -> Result<f64> {
    let m = 0.5 * (a + b);
    let lm = 0.5 * (a + m);
    let rm = 0.5 * (m + b);
    let flm = f(lm);
    let frm = f(rm);
    *evals += 2;
    if *evals > 4_000_000 {
        return Err(Error::Quadrature("evaluation budget exhausted".into()));
    }
    let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    let delta = left + right - whole;
    // At full depth the panel is ~(b−a)/2^50 wide; its contribution is below
    // roundoff, so the extrapolated value is accepted (this happens only near
    // integrable derivative singularities).
    if delta.abs() <= 15.0 * tol || depth == 0 {
        return Ok(left + right + delta / 15.0);
    }
    let lv = simpson_rec(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1, evals)?;
    let rv = simpson_rec(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1, evals)?;
    Ok(lv + rv)
}

/// Nodes and weights of n-point Gauss–Legendre on [-1, 1], by Newton iteration
/// on the Legendre recurrence.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    for i in 0..n.div_ceil(2) {
        // Chebyshev-based initial guess for the i-th positive root.
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            // Evaluate P_n(x) and P'_n(x) via the three-term recurrence.
            let mut p0 = 1.0;
            let mut p1 = x;
            for k in 2..=n {
                let kf = k as f64;
                let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
                p0 = p1;
                p1 = p2;
            }
            dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
            let dx = p1 / dp;
            x -= dx;
            if dx.abs() < 1e-15 {
                break;
            }
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    (nodes, weights)
}

/// Composite fixed-order Gauss–Legendre over `panels` equal subintervals of
/// [a, b]. Deterministic, non-adaptive: the independent oracle scheme.
pub fn composite_gl<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, order: usize, panels: usize) -> f64 {
    let (nodes, weights) = gauss_legendre(order);
    let h = (b - a) / panels as f64;
    let mut total = 0.0;
    for p in 0..panels {
        let lo = a + p as f64 * h;
        let c = lo + 0.5 * h;
        let mut s = 0.0;
        for (x, w) in nodes.iter().zip(&weights) {
            s += w * f(c + 0.5 * h * x);
        }
        total += 0.5 * h * s;
    }
    total
}

/// Complex-valued composite Gauss–Legendre over a real parameter interval.
pub fn composite_gl_complex<F: Fn(f64) -> Complex64>(
    f: &F,
    a: f64,
    b: f64,
    order: usize,
    panels: usize,
) -> Complex64 {
    let (nodes, weights) = gauss_legendre(order);
    let h = (b - a) / panels as f64;
    let mut total = Complex64::new(0.0, 0.0);
    for p in 0..panels {
        let lo = a + p as f64 * h;
        let c = lo + 0.5 * h;
        let mut s = Complex64::new(0.0, 0.0);
        for (x, w) in nodes.iter().zip(&weights) {
            s += f(c + 0.5 * h * x) * *w;
        }
        total += s * (0.5 * h);
    }
    total
}
