//! Kernel of the transform: the constructive decomposition f = π*h + dg.
//!
//! A band-limited field is in the kernel of the X-ray transform exactly when
//! it splits as an interval part π*h (zero-mean, depending only on x) plus a
//! potential dg whose g vanishes on the boundary. The splitting is computed
//! mode by mode:
//!
//! * modes (j, 0), j ≠ 0, feed the interval part ĥ(j) — the transform
//!   carries no information about them;
//! * the (0, 0) mode must vanish outright and is reported as residual
//!   otherwise;
//! * each mode with k ≠ 0 must be divisible by the linear form of (j, k) in
//!   the polynomial variables; the quotient over 2πi is ĝ(j, k), and an
//!   indivisible mode lands in the residual.
//!
//! Divisibility alone yields some g with dg = f - π*h; membership in the
//! kernel additionally needs the boundary trace of g to vanish (dense
//! orbits of irrational rotations force trace invariance to mean trace
//! zero). Failures are therefore reported as two numbers: the residual norm
//! and the boundary defect, never as exceptions.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::field::{FourierTensorField, IntervalField};
use crate::poly::{mu_min_singular, sphere_inner};
use crate::util::cis_mod1;

/// Result of the kernel decomposition of a field of order m.
///
/// By construction `h.pullback() + g.sym_derivative() + residual` equals the
/// input field coefficientwise, ĥ(0) = 0, and ĝ(j, 0) = 0 for all j (the
/// normalization that makes the pair (h, g) unique).
#[derive(Debug, Clone)]
pub struct Decomposition {
    /// Zero-mean interval part (order m).
    pub h: IntervalField,
    /// Potential part (order m - 1), supported on k ≠ 0 modes.
    pub g: FourierTensorField,
    /// Whatever the construction could not absorb: the (0,0) mode plus
    /// every indivisible k ≠ 0 mode, kept whole.
    pub residual: FourierTensorField,
    /// L² norm of `residual`.
    pub residual_norm: f64,
    /// L² norm of the boundary trace of g over {0} × Tⁿ: the distance of g
    /// from having the zero boundary values the kernel requires.
    pub boundary_defect: f64,
}

/// Membership verdict together with the decomposition that certifies it.
#[derive(Debug, Clone)]
pub struct KernelCertificate {
    pub in_kernel: bool,
    pub f_norm: f64,
    pub decomposition: Decomposition,
}

/// L² norm of the boundary trace at x = 0, summed in squares over k.
pub(crate) fn boundary_defect(g: &FourierTensorField) -> f64 {
    g.boundary_trace(0.0)
        .values()
        .map(|p| sphere_inner(p, p).expect("same dims").re.max(0.0))
        .fold(0.0, |acc, v| acc + v)
        .sqrt()
}

/// Decompose a field of order m ≥ 0 into interval part, potential part and
/// residual. `tol` is the relative divisibility tolerance passed to the
/// per-mode polynomial division.
pub fn decompose(f: &FourierTensorField, tol: f64) -> Result<Decomposition> {
    if f.m() < 0 {
        return Err(Error::invalid("cannot decompose a field of order below 0"));
    }
    let n = f.n();
    let m = f.m();
    let mut h = IntervalField::new(n, m);
    let mut g = FourierTensorField::new(n, m - 1);
    let mut residual = FourierTensorField::new(n, m);
    let minus_i_over_2pi = Complex64::new(0.0, -1.0 / std::f64::consts::TAU);

    for (mode, p) in f.iter() {
        if mode.is_k_zero() {
            if mode.j == 0 {
                residual.set_mode(0, &mode.k, p.clone())?;
            } else {
                h.set_mode(mode.j, p.clone())?;
            }
            continue;
        }
        let xi = mode.as_linear_form();
        match p.factor_linear(&xi, tol) {
            Ok(quotient) => {
                // f̂ = 2πi (u·l) ĝ, so ĝ = quotient / (2πi)
                g.set_mode(mode.j, &mode.k, quotient.scaled(minus_i_over_2pi))?;
            }
            Err(Error::NotDivisible { .. }) => {
                residual.set_mode(mode.j, &mode.k, p.clone())?;
            }
            Err(other) => return Err(other),
        }
    }

    let residual_norm = residual.l2_norm();
    let defect = boundary_defect(&g);
    Ok(Decomposition {
        h,
        g,
        residual,
        residual_norm,
        boundary_defect: defect,
    })
}

/// Decide kernel membership: the residual and the boundary defect of the
/// decomposition must both stay below `tol · ‖f‖`. The decomposition itself
/// is returned as the certificate.
pub fn is_in_kernel(f: &FourierTensorField, tol: f64) -> Result<KernelCertificate> {
    let decomposition = decompose(f, tol)?;
    let f_norm = f.l2_norm();
    let in_kernel = decomposition.residual_norm <= tol * f_norm
        && decomposition.boundary_defect <= tol * f_norm;
    Ok(KernelCertificate {
        in_kernel,
        f_norm,
        decomposition,
    })
}

/// The explicit constant C_g with ‖g‖_{H¹} ≤ C_g ‖f - π*h‖_{L²} for the
/// decomposition of an order-m kernel element: √2 / (2π σ_min), where σ_min
/// is the smallest singular value of multiplication by a unit linear form.
/// For m = 0 there is no potential part and the constant is 0.
///
/// The other half of the stability estimate, ‖h‖_{L²} ≤ ‖f‖_{L²}, is a
/// Parseval identity and needs no constant.
pub fn stability_constant(n: usize, m: i32) -> f64 {
    if m < 1 {
        return 0.0;
    }
    let sigma = mu_min_singular(n, m).expect("m >= 1");
    2.0_f64.sqrt() / (std::f64::consts::TAU * sigma)
}

/// Ergodic average (1/N) Σ_{l=1..N} e^{2πi k·(lb)} of the rotation by b
/// sampled against the character of k.
///
/// Equidistribution makes this tend to zero exactly when k·b is not an
/// integer; the decay rate 1/(N |sin(π k·b)|) follows from the geometric
/// series. It is the diagnostic behind the dense-orbit argument.
pub fn weyl_sum(k: &[i64], b: &[f64], n_terms: usize) -> Complex64 {
    assert_eq!(k.len(), b.len(), "frequency/rotation dimension mismatch");
    assert!(n_terms >= 1, "the average needs at least one term");
    let theta: f64 = k.iter().zip(b).map(|(&kc, &bc)| kc as f64 * bc).sum();
    let mut acc = Complex64::new(0.0, 0.0);
    for l in 1..=n_terms {
        acc += cis_mod1(theta * l as f64);
    }
    acc / n_terms as f64
}

/// Search for an integer relation q₀ + q·b = 0 with |q_i| ≤ bound.
///
/// Returns `true` (dense orbit) when no relation is found: a semi-decision
/// at finite precision, not a proof of rational independence. Dimensions
/// one and two are searched exhaustively; higher dimensions go through
/// lattice reduction on a scaled relation lattice.
pub fn is_dense_orbit(b: &[f64], denominator_bound: i64) -> bool {
    assert!(denominator_bound >= 1, "bound must be positive");
    let n = b.len();
    // |q·b - round(q·b)| below this counts as a relation
    let near = |x: f64| (x - x.round()).abs() < 1e-9 * (1.0 + x.abs());
    match n {
        0 => true,
        1 => {
            for q in 1..=denominator_bound {
                if near(q as f64 * b[0]) {
                    return false;
                }
            }
            true
        }
        2 => {
            for q1 in -denominator_bound..=denominator_bound {
                for q2 in 0..=denominator_bound {
                    if q1 == 0 && q2 == 0 {
                        continue;
                    }
                    if near(q1 as f64 * b[0] + q2 as f64 * b[1]) {
                        return false;
                    }
                }
            }
            true
        }
        _ => !lll_relation_exists(b, denominator_bound),
    }
}

/// Lattice-reduction search for small integer relations of (1, b_1, .., b_n):
/// reduce the rows of [I | γ·(1, b)] and inspect the short vectors.
fn lll_relation_exists(b: &[f64], bound: i64) -> bool {
    let n = b.len();
    let dim = n + 1; // coefficients (q0, q1, .., qn)
    let gamma = 1e12;
    // basis rows: q-part is the identity, last column is γ·(q0 + q·b)
    let mut rows: Vec<Vec<f64>> = Vec::with_capacity(dim);
    for i in 0..dim {
        let mut r = vec![0.0; dim + 1];
        r[i] = 1.0;
        r[dim] = gamma * if i == 0 { 1.0 } else { b[i - 1] };
        rows.push(r);
    }
    lll_reduce(&mut rows);
    for r in &rows {
        let q: Vec<i64> = r[..dim].iter().map(|&x| x.round() as i64).collect();
        if q.iter().all(|&x| x == 0) {
            continue;
        }
        if q.iter().any(|&x| x.abs() > bound) {
            continue;
        }
        let value = q[0] as f64 + q[1..].iter().zip(b).map(|(&qi, &bi)| qi as f64 * bi).sum::<f64>();
        if value.abs() < 1e-9 * (1.0 + q.iter().map(|&x| x.abs()).max().unwrap_or(0) as f64) {
            return true;
        }
    }
    false
}

/// Textbook LLL (δ = 0.75) in floating point; the lattices here are tiny.
fn lll_reduce(basis: &mut [Vec<f64>]) {
    let n = basis.len();
    let dot = |a: &[f64], b: &[f64]| a.iter().zip(b).map(|(x, y)| x * y).sum::<f64>();
    let mut k = 1;
    let mut steps = 0;
    while k < n && steps < 10_000 {
        steps += 1;
        // Gram-Schmidt up to k against current basis
        let (mut gs, mut mu) = gram_schmidt(basis);
        // size reduction
        for j in (0..k).rev() {
            let m = mu[k][j];
            if m.abs() > 0.5 {
                let r = m.round();
                for idx in 0..basis[k].len() {
                    basis[k][idx] -= r * basis[j][idx];
                }
                let res = gram_schmidt(basis);
                gs = res.0;
                mu = res.1;
            }
        }
        let lovasz =
            dot(&gs[k], &gs[k]) >= (0.75 - mu[k][k - 1] * mu[k][k - 1]) * dot(&gs[k - 1], &gs[k - 1]);
        if lovasz {
            k += 1;
        } else {
            basis.swap(k, k - 1);
            k = k.max(2) - 1;
        }
    }
}

fn gram_schmidt(basis: &[Vec<f64>]) -> (Vec<Vec<f64>>, Vec<Vec<f64>>) {
    let n = basis.len();
    let dot = |a: &[f64], b: &[f64]| a.iter().zip(b).map(|(x, y)| x * y).sum::<f64>();
    let mut gs: Vec<Vec<f64>> = Vec::with_capacity(n);
    let mut mu = vec![vec![0.0; n]; n];
    for i in 0..n {
        let mut v = basis[i].clone();
        for j in 0..i {
            let denom = dot(&gs[j], &gs[j]);
            let m = if denom > 0.0 {
                dot(&basis[i], &gs[j]) / denom
            } else {
                0.0
            };
            mu[i][j] = m;
            for idx in 0..v.len() {
                v[idx] -= m * gs[j][idx];
            }
        }
        gs.push(v);
    }
    (gs, mu)
}

/// Whether the interval field is itself a potential: true exactly when every
/// coefficient polynomial is a multiple of the first velocity variable v,
/// i.e. h(x; 0, w) = 0 identically. Nonzero scalar interval fields (m = 0)
/// never qualify — they witness the failure of solenoidal injectivity.
pub fn interval_field_is_potential(h: &IntervalField) -> bool {
    for (_, p) in h.iter() {
        for (alpha, c) in p.terms() {
            if alpha.exponents()[0] == 0 && (c.re != 0.0 || c.im != 0.0) {
                return false;
            }
        }
    }
    true
}

/// Reassemble π*h + dg + residual; the decomposition invariant says this
/// returns the original field.
pub fn reassemble(d: &Decomposition) -> FourierTensorField {
    &(&d.h.pullback() + &d.g.sym_derivative()) + &d.residual
}
