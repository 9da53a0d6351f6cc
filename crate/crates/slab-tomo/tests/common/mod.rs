//! Oracles and generators shared by the integration suites. Everything here
//! is deliberately written from scratch (no calls into the code paths under
//! test) so the suites compare independent computations.

// not every suite uses every oracle
#![allow(dead_code)]

use num_complex::Complex64;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use slab_tomo::{FourierTensorField, HomogeneousPoly, IntervalField};
use std::f64::consts::{PI, TAU};

/// Gauss–Legendre nodes/weights on [-1, 1], Newton iteration on the
/// recurrence. Test-local duplicate of the library's rule on purpose.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut xs = vec![0.0; n];
    let mut ws = vec![0.0; n];
    for i in 0..n.div_ceil(2) {
        let mut x = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
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
        xs[i] = -x;
        xs[n - 1 - i] = x;
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        ws[i] = w;
        ws[n - 1 - i] = w;
    }
    (xs, ws)
}

/// Numerical integral of f over Sⁿ ⊂ R^{n+1} by product quadrature in
/// spherical coordinates, n ≤ 3. Node counts are sized for polynomial
/// integrands up to degree ~12 at machine precision.
pub fn sphere_quadrature<F: Fn(&[f64]) -> Complex64>(n: usize, f: F) -> Complex64 {
    let mut acc = Complex64::new(0.0, 0.0);
    match n {
        1 => {
            let nn = 256;
            for i in 0..nn {
                let th = TAU * i as f64 / nn as f64;
                acc += f(&[th.cos(), th.sin()]);
            }
            acc * (TAU / nn as f64)
        }
        2 => {
            let (xs, ws) = gauss_legendre(64);
            let nth = 128;
            for (&x, &w) in xs.iter().zip(&ws) {
                let phi = PI * (x + 1.0) / 2.0;
                let (sp, cp) = (phi.sin(), phi.cos());
                let mut ring = Complex64::new(0.0, 0.0);
                for j in 0..nth {
                    let th = TAU * j as f64 / nth as f64;
                    ring += f(&[cp, sp * th.cos(), sp * th.sin()]);
                }
                acc += ring * (w * sp * (PI / 2.0) * (TAU / nth as f64));
            }
            acc
        }
        3 => {
            let (xs, ws) = gauss_legendre(48);
            let nth = 96;
            for (&x1, &w1) in xs.iter().zip(&ws) {
                let p1 = PI * (x1 + 1.0) / 2.0;
                let (s1, c1) = (p1.sin(), p1.cos());
                for (&x2, &w2) in xs.iter().zip(&ws) {
                    let p2 = PI * (x2 + 1.0) / 2.0;
                    let (s2, c2) = (p2.sin(), p2.cos());
                    let mut ring = Complex64::new(0.0, 0.0);
                    for j in 0..nth {
                        let th = TAU * j as f64 / nth as f64;
                        ring += f(&[c1, s1 * c2, s1 * s2 * th.cos(), s1 * s2 * th.sin()]);
                    }
                    acc += ring
                        * (w1 * w2 * s1 * s1 * s2 * (PI / 2.0) * (PI / 2.0)
                            * (TAU / nth as f64));
                }
            }
            acc
        }
        _ => panic!("sphere quadrature implemented for n <= 3"),
    }
}

/// Field evaluation written independently of the library's evaluator:
/// plain powi monomials and a direct complex exponential.
pub fn naive_field_eval(f: &FourierTensorField, x: f64, y: &[f64], u: &[f64]) -> Complex64 {
    let mut acc = Complex64::new(0.0, 0.0);
    for (mode, p) in f.iter() {
        let mut theta = TAU * mode.j as f64 * x;
        for (kc, yc) in mode.k.iter().zip(y) {
            theta += TAU * *kc as f64 * yc;
        }
        let e = Complex64::new(theta.cos(), theta.sin());
        let mut pv = Complex64::new(0.0, 0.0);
        for (alpha, c) in p.terms() {
            let mut mono = 1.0;
            for (&a, &x) in alpha.exponents().iter().zip(u) {
                mono *= x.powi(a as i32);
            }
            pv += c * mono;
        }
        acc += pv * e;
    }
    acc
}

/// Random slope vector with components uniform on [-range, range].
pub fn random_b(rng: &mut ChaCha8Rng, n: usize, range: f64) -> Vec<f64> {
    (0..n).map(|_| rng.gen_range(-range..range)).collect()
}

/// Random potential with ĝ(j, 0) = 0 and zero boundary trace: a generic
/// band-limited g is restricted to k ≠ 0 modes and its per-k trace is folded
/// into the (0, k) mode. For degree -1 the field is empty.
pub fn random_zero_trace_potential(
    rng: &mut ChaCha8Rng,
    n: usize,
    degree: i32,
    j_band: i64,
    k_band: i64,
) -> FourierTensorField {
    if degree < 0 {
        return FourierTensorField::new(n, degree);
    }
    let raw = FourierTensorField::random_from(rng, n, degree, j_band, k_band);
    let mut g = FourierTensorField::new(n, degree);
    for (mode, p) in raw.iter() {
        if !mode.is_k_zero() {
            g.set_mode(mode.j, &mode.k, p.clone()).unwrap();
        }
    }
    for (k, trace) in g.boundary_trace(0.0) {
        g.add_mode(0, &k, trace.scaled(Complex64::new(-1.0, 0.0)))
            .unwrap();
    }
    g
}

/// A generic element of the kernel: zero-mean interval part plus the
/// derivative of a zero-trace potential. Returns (h, g, f = π*h + dg).
pub fn random_kernel_element(
    rng: &mut ChaCha8Rng,
    n: usize,
    m: i32,
    j_band: i64,
    k_band: i64,
) -> (IntervalField, FourierTensorField, FourierTensorField) {
    let h = IntervalField::random_from(rng, n, m, j_band);
    let g = random_zero_trace_potential(rng, n, m - 1, j_band, k_band);
    let f = &h.pullback() + &g.sym_derivative();
    (h, g, f)
}

/// A unit-norm polynomial orthogonal to the range of multiplication by the
/// linear form of ξ: adding any multiple of it to a mode makes that mode
/// indivisible by exactly that amount.
pub fn indivisible_unit(
    rng: &mut ChaCha8Rng,
    dim: usize,
    m: i32,
    xi: &[f64],
) -> HomogeneousPoly {
    loop {
        let mut p = HomogeneousPoly::zero(dim, m);
        for alpha in slab_tomo::monomials(dim, m) {
            let re: f64 = rng.gen_range(-1.0..1.0);
            let im: f64 = rng.gen_range(-1.0..1.0);
            p.add_term(alpha, Complex64::new(re, im)).unwrap();
        }
        let (_, rem) = p.split_by_linear(xi).unwrap();
        let norm = rem.l2_norm();
        if norm > 1e-6 {
            return rem.scaled(Complex64::new(1.0 / norm, 0.0));
        }
    }
}
