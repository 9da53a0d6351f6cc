//! Homogeneous polynomials on R^d with the L²(S^{d-1}) inner product.
//!
//! A symmetric tensor of order m on a flat manifold is identified with a
//! homogeneous polynomial of degree m in the velocity variables, so this
//! module is the fiber algebra for everything else in the crate: evaluation,
//! multiplication by a linear form u ↦ (u·ξ)p(u), exact division by a linear
//! form (least squares in coefficient space, with the residual measured in
//! L²(S^{d-1})), analytic sphere moments, and the smallest singular value of
//! the multiplication operator, which controls the stability constant of the
//! kernel decomposition.
//!
//! Degrees are allowed to be -1: that degree denotes the zero space, which
//! keeps the scalar (m = 0) decomposition free of special cases.

use num_complex::Complex64;
use std::collections::{BTreeMap, HashMap};
use std::f64::consts::PI;
use std::sync::{Arc, LazyLock, Mutex};

use crate::error::{Error, Result};
use crate::linalg;

/// Exponent vector of a monomial: `u^α = u_0^{α_0} ··· u_{d-1}^{α_{d-1}}`.
///
/// The derived ordering is lexicographic on the exponents; since all
/// multi-indices stored in one polynomial share the same total degree, this
/// is the graded-lexicographic order.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct MultiIndex(Vec<u32>);

impl MultiIndex {
    pub fn new(exponents: Vec<u32>) -> Self {
        Self(exponents)
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    /// Total degree |α|.
    pub fn degree(&self) -> u32 {
        self.0.iter().sum()
    }

    pub fn exponents(&self) -> &[u32] {
        &self.0
    }

    /// The multi-index with the exponent of variable `var` raised by one.
    pub fn raised(&self, var: usize) -> Self {
        let mut e = self.0.clone();
        e[var] += 1;
        Self(e)
    }

    /// u^α at a real point.
    fn eval(&self, u: &[f64]) -> f64 {
        self.0
            .iter()
            .zip(u)
            .map(|(&e, &x)| x.powi(e as i32))
            .product()
    }
}

impl std::fmt::Display for MultiIndex {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "(")?;
        for (i, e) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{e}")?;
        }
        write!(f, ")")
    }
}

/// All multi-indices of the given total degree in `dim` variables, in
/// graded-lexicographic order (first variable most significant, descending).
/// A negative degree yields the empty basis of the zero space.
pub fn monomials(dim: usize, degree: i32) -> Vec<MultiIndex> {
    basis(dim, degree).list.clone()
}

pub(crate) struct Basis {
    pub list: Vec<MultiIndex>,
    pub position: BTreeMap<MultiIndex, usize>,
}

fn enumerate_monomials(dim: usize, degree: u32) -> Vec<MultiIndex> {
    fn rec(out: &mut Vec<MultiIndex>, cur: &mut Vec<u32>, pos: usize, remaining: u32) {
        if pos + 1 == cur.len() {
            cur[pos] = remaining;
            out.push(MultiIndex::new(cur.clone()));
            return;
        }
        for e in (0..=remaining).rev() {
            cur[pos] = e;
            rec(out, cur, pos + 1, remaining - e);
        }
    }
    let mut out = Vec::new();
    let mut cur = vec![0u32; dim];
    rec(&mut out, &mut cur, 0, degree);
    out
}

/// Caches keyed by (dimension, degree).
type SpaceCache<T> = LazyLock<Mutex<HashMap<(usize, i32), Arc<T>>>>;

static BASIS_CACHE: SpaceCache<Basis> = LazyLock::new(|| Mutex::new(HashMap::new()));

pub(crate) fn basis(dim: usize, degree: i32) -> Arc<Basis> {
    assert!(dim >= 1, "polynomials need at least one variable");
    let mut cache = BASIS_CACHE.lock().unwrap();
    cache
        .entry((dim, degree))
        .or_insert_with(|| {
            let list = if degree < 0 {
                Vec::new()
            } else {
                enumerate_monomials(dim, degree as u32)
            };
            let position = list
                .iter()
                .enumerate()
                .map(|(i, a)| (a.clone(), i))
                .collect();
            Arc::new(Basis { list, position })
        })
        .clone()
}

/// Γ(k/2) for integer k ≥ 1, via Γ(x+1) = xΓ(x) down to Γ(1) or Γ(1/2).
fn gamma_half(k: u32) -> f64 {
    debug_assert!(k >= 1);
    let mut x = k;
    let mut acc = 1.0;
    while x > 2 {
        x -= 2;
        acc *= x as f64 / 2.0;
    }
    if x == 1 {
        acc * PI.sqrt()
    } else {
        acc
    }
}

/// The moment ∫_{S^{d-1}} u^α dS of a monomial over the unit sphere.
///
/// Vanishes whenever some exponent is odd; otherwise equals
/// 2 Γ((α_0+1)/2) ··· Γ((α_{d-1}+1)/2) / Γ((|α|+d)/2).
pub fn sphere_moment(alpha: &MultiIndex) -> f64 {
    if alpha.0.iter().any(|&e| e % 2 == 1) {
        return 0.0;
    }
    let d = alpha.dim() as u32;
    let total = alpha.degree();
    let mut num = 2.0;
    for &e in &alpha.0 {
        num *= gamma_half(e + 1);
    }
    num / gamma_half(total + d)
}

static GRAM_CACHE: SpaceCache<Vec<f64>> = LazyLock::new(|| Mutex::new(HashMap::new()));

/// Gram matrix of the monomial basis of degree-`degree` polynomials under
/// the L²(S^{d-1}) inner product, row-major.
pub(crate) fn gram(dim: usize, degree: i32) -> Arc<Vec<f64>> {
    let mut cache = GRAM_CACHE.lock().unwrap();
    cache
        .entry((dim, degree))
        .or_insert_with(|| {
            let b = basis(dim, degree);
            let n = b.list.len();
            let mut g = vec![0.0; n * n];
            for i in 0..n {
                for j in 0..=i {
                    let mut sum = b.list[i].0.clone();
                    for (s, e) in sum.iter_mut().zip(&b.list[j].0) {
                        *s += e;
                    }
                    let v = sphere_moment(&MultiIndex::new(sum));
                    g[i * n + j] = v;
                    g[j * n + i] = v;
                }
            }
            Arc::new(g)
        })
        .clone()
}

/// A homogeneous polynomial with complex coefficients in the monomial basis.
///
/// `degree == -1` is the zero space (no representable terms); coefficients
/// that cancel to exactly zero are pruned, so `is_zero` and equality work
/// structurally.
#[derive(Debug, Clone, PartialEq)]
pub struct HomogeneousPoly {
    dim: usize,
    degree: i32,
    coeffs: BTreeMap<MultiIndex, Complex64>,
}

impl HomogeneousPoly {
    /// The zero polynomial of the given space.
    pub fn zero(dim: usize, degree: i32) -> Self {
        assert!(dim >= 1, "polynomials need at least one variable");
        assert!(degree >= -1, "degree must be at least -1");
        Self {
            dim,
            degree,
            coeffs: BTreeMap::new(),
        }
    }

    /// A degree-zero polynomial holding a single scalar.
    pub fn constant(dim: usize, value: Complex64) -> Self {
        let mut p = Self::zero(dim, 0);
        p.add_term(MultiIndex::new(vec![0; dim]), value)
            .expect("constant multi-index is valid");
        p
    }

    /// The monomial c·u^α.
    pub fn monomial(alpha: MultiIndex, coeff: Complex64) -> Self {
        let mut p = Self::zero(alpha.dim(), alpha.degree() as i32);
        p.add_term(alpha, coeff).expect("own multi-index is valid");
        p
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn degree(&self) -> i32 {
        self.degree
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn num_terms(&self) -> usize {
        self.coeffs.len()
    }

    /// Add `c·u^α` to the polynomial. The multi-index must match the
    /// polynomial's dimension and degree; the zero space accepts no terms.
    pub fn add_term(&mut self, alpha: MultiIndex, c: Complex64) -> Result<()> {
        if alpha.dim() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                found: alpha.dim(),
            });
        }
        if self.degree < 0 {
            return Err(Error::invalid("the zero space P_{-1} has no terms"));
        }
        if alpha.degree() as i32 != self.degree {
            return Err(Error::invalid(format!(
                "multi-index {alpha} has degree {}, polynomial has degree {}",
                alpha.degree(),
                self.degree
            )));
        }
        match self.coeffs.entry(alpha) {
            std::collections::btree_map::Entry::Vacant(v) => {
                if c.re != 0.0 || c.im != 0.0 {
                    v.insert(c);
                }
            }
            std::collections::btree_map::Entry::Occupied(mut o) => {
                let sum = *o.get() + c;
                if sum.re == 0.0 && sum.im == 0.0 {
                    o.remove();
                } else {
                    *o.get_mut() = sum;
                }
            }
        }
        Ok(())
    }

    /// Coefficient of u^α (zero when absent).
    pub fn coeff(&self, alpha: &MultiIndex) -> Complex64 {
        self.coeffs
            .get(alpha)
            .copied()
            .unwrap_or(Complex64::new(0.0, 0.0))
    }

    pub fn terms(&self) -> impl Iterator<Item = (&MultiIndex, &Complex64)> {
        self.coeffs.iter()
    }

    /// Evaluate at a real point: Σ_α c_α u^α. Homogeneity gives
    /// p(λu) = λ^degree p(u).
    pub fn eval(&self, u: &[f64]) -> Result<Complex64> {
        if u.len() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                found: u.len(),
            });
        }
        let mut acc = Complex64::new(0.0, 0.0);
        for (alpha, c) in &self.coeffs {
            acc += c * alpha.eval(u);
        }
        Ok(acc)
    }

    /// Multiplication by the linear form of ξ: returns q(u) = (u·ξ)·p(u),
    /// one degree up. This is the operator whose injectivity (for ξ ≠ 0)
    /// drives the whole kernel decomposition.
    pub fn mul_linear(&self, xi: &[f64]) -> Result<Self> {
        if xi.len() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                found: xi.len(),
            });
        }
        let mut q = Self::zero(self.dim, self.degree + 1);
        for (alpha, c) in &self.coeffs {
            for (var, &x) in xi.iter().enumerate() {
                if x != 0.0 {
                    q.add_term(alpha.raised(var), c * x)?;
                }
            }
        }
        Ok(q)
    }

    /// Conjugate the coefficients.
    pub fn conj(&self) -> Self {
        Self {
            dim: self.dim,
            degree: self.degree,
            coeffs: self.coeffs.iter().map(|(a, c)| (a.clone(), c.conj())).collect(),
        }
    }

    /// Scale every coefficient.
    pub fn scaled(&self, z: Complex64) -> Self {
        if z.re == 0.0 && z.im == 0.0 {
            return Self::zero(self.dim, self.degree);
        }
        Self {
            dim: self.dim,
            degree: self.degree,
            coeffs: self.coeffs.iter().map(|(a, c)| (a.clone(), c * z)).collect(),
        }
    }

    /// L²(S^{d-1}) norm.
    pub fn l2_norm(&self) -> f64 {
        sphere_inner(self, self)
            .expect("dimensions agree")
            .re
            .max(0.0)
            .sqrt()
    }

    /// Split F into μ_ξ G + R with R orthogonal to the range of μ_ξ in
    /// L²(S^{d-1}): the least-squares division by the linear form of ξ.
    ///
    /// Returns the quotient G (degree m-1) and the remainder R (degree m).
    /// F is divisible by u·ξ exactly when R vanishes, which is the
    /// quantitative form of "F vanishes on the hyperplane ξ^⊥".
    pub fn split_by_linear(&self, xi: &[f64]) -> Result<(Self, Self)> {
        if xi.len() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                found: xi.len(),
            });
        }
        if xi.iter().all(|&x| x == 0.0) {
            return Err(Error::invalid("cannot divide by the zero linear form"));
        }
        let m = self.degree;
        if m < 0 {
            return Err(Error::invalid(
                "cannot divide a polynomial of the zero space",
            ));
        }
        let bm = basis(self.dim, m);
        let bq = basis(self.dim, m - 1);
        let rows = bm.list.len();
        let cols = bq.list.len();

        // matrix of μ_ξ in the monomial bases
        let mut a = vec![0.0; rows * cols];
        for (c, alpha) in bq.list.iter().enumerate() {
            for (var, &x) in xi.iter().enumerate() {
                if x != 0.0 {
                    let r = bm.position[&alpha.raised(var)];
                    a[r * cols + c] += x;
                }
            }
        }

        let g = gram(self.dim, m);
        let f_vec: Vec<Complex64> = bm.list.iter().map(|al| self.coeff(al)).collect();

        // normal equations (Aᵀ G A) q = Aᵀ G f; Aᵀ G A is SPD because μ_ξ
        // is injective for ξ ≠ 0
        let mut gf = vec![Complex64::new(0.0, 0.0); rows];
        for r in 0..rows {
            let mut s = Complex64::new(0.0, 0.0);
            for r2 in 0..rows {
                s += g[r * rows + r2] * f_vec[r2];
            }
            gf[r] = s;
        }
        let mut rhs = vec![Complex64::new(0.0, 0.0); cols];
        for c in 0..cols {
            let mut s = Complex64::new(0.0, 0.0);
            for r in 0..rows {
                s += a[r * cols + c] * gf[r];
            }
            rhs[c] = s;
        }
        let mut nmat = vec![0.0; cols * cols];
        for c1 in 0..cols {
            for c2 in 0..cols {
                let mut s = 0.0;
                for r1 in 0..rows {
                    let ar1 = a[r1 * cols + c1];
                    if ar1 == 0.0 {
                        continue;
                    }
                    for r2 in 0..rows {
                        s += ar1 * g[r1 * rows + r2] * a[r2 * cols + c2];
                    }
                }
                nmat[c1 * cols + c2] = s;
            }
        }
        let l = linalg::cholesky(cols, &nmat).ok_or_else(|| {
            Error::invalid("Gram system for linear-form division is not positive definite")
        })?;
        linalg::cholesky_solve(cols, &l, &mut rhs);

        let mut quotient = Self::zero(self.dim, m - 1);
        for (c, alpha) in bq.list.iter().enumerate() {
            if rhs[c].re != 0.0 || rhs[c].im != 0.0 {
                quotient.add_term(alpha.clone(), rhs[c])?;
            }
        }
        let remainder = {
            let mut r = self.clone();
            let back = quotient.mul_linear(xi)?;
            for (alpha, c) in &back.coeffs {
                r.add_term(alpha.clone(), -c)?;
            }
            r
        };
        Ok((quotient, remainder))
    }

    /// Divide by the linear form of ξ if the residual permits.
    ///
    /// Succeeds when the least-squares remainder has L²(S^{d-1}) norm at most
    /// `tol · ‖F‖` and returns the unique quotient G with μ_ξ G = F. For a
    /// degree-zero F the quotient space is the zero space, so only F = 0
    /// divides. Failure reports the residual norm and the threshold it missed.
    pub fn factor_linear(&self, xi: &[f64], tol: f64) -> Result<Self> {
        let (quotient, remainder) = self.split_by_linear(xi)?;
        let residual = remainder.l2_norm();
        let threshold = tol * self.l2_norm();
        if residual <= threshold {
            Ok(quotient)
        } else {
            Err(Error::NotDivisible {
                residual,
                threshold,
            })
        }
    }
}

impl std::ops::Add<&HomogeneousPoly> for &HomogeneousPoly {
    type Output = HomogeneousPoly;

    fn add(self, rhs: &HomogeneousPoly) -> HomogeneousPoly {
        assert_eq!(self.dim, rhs.dim, "polynomial dimensions differ");
        assert_eq!(self.degree, rhs.degree, "polynomial degrees differ");
        let mut out = self.clone();
        for (alpha, c) in &rhs.coeffs {
            out.add_term(alpha.clone(), *c).expect("validated terms");
        }
        out
    }
}

impl std::ops::Sub<&HomogeneousPoly> for &HomogeneousPoly {
    type Output = HomogeneousPoly;

    fn sub(self, rhs: &HomogeneousPoly) -> HomogeneousPoly {
        assert_eq!(self.dim, rhs.dim, "polynomial dimensions differ");
        assert_eq!(self.degree, rhs.degree, "polynomial degrees differ");
        let mut out = self.clone();
        for (alpha, c) in &rhs.coeffs {
            out.add_term(alpha.clone(), -c).expect("validated terms");
        }
        out
    }
}

/// L²(S^{d-1}) inner product ∫ p(u) conj(q(u)) dS(u), expanded exactly via
/// [`sphere_moment`]. The degrees may differ; odd total degree integrates
/// to zero monomial by monomial.
pub fn sphere_inner(p: &HomogeneousPoly, q: &HomogeneousPoly) -> Result<Complex64> {
    if p.dim != q.dim {
        return Err(Error::DimensionMismatch {
            expected: p.dim,
            found: q.dim,
        });
    }
    let mut acc = Complex64::new(0.0, 0.0);
    for (alpha, ca) in &p.coeffs {
        for (beta, cb) in &q.coeffs {
            let mut sum = alpha.0.clone();
            for (s, e) in sum.iter_mut().zip(&beta.0) {
                *s += e;
            }
            let m = sphere_moment(&MultiIndex::new(sum));
            if m != 0.0 {
                acc += ca * cb.conj() * m;
            }
        }
    }
    Ok(acc)
}

/// Smallest singular value of μ_{e_1}: P_{m-1}(R^{n+1}) → P_m(R^{n+1}) with
/// both spaces normed by the embedding into L²(Sⁿ).
///
/// Rotation invariance of the norms makes the direction of ξ irrelevant, and
/// linearity of ξ ↦ μ_ξ gives ‖μ_ξ p‖ ≥ σ_min·|ξ|·‖p‖ for every ξ ≠ 0: this
/// is the quantitative injectivity of multiplication by a linear form, and
/// the reciprocal enters the stability constant of the kernel decomposition.
pub fn mu_min_singular(n: usize, m: i32) -> Result<f64> {
    if m < 1 {
        return Err(Error::invalid(
            "mu_min_singular needs m >= 1; the domain is the zero space otherwise",
        ));
    }
    let dim = n + 1;
    let bm = basis(dim, m);
    let bq = basis(dim, m - 1);
    let rows = bm.list.len();
    let cols = bq.list.len();

    let mut a = vec![0.0; rows * cols];
    for (c, alpha) in bq.list.iter().enumerate() {
        let r = bm.position[&alpha.raised(0)];
        a[r * cols + c] += 1.0;
    }
    let gm = gram(dim, m);
    let gq = gram(dim, m - 1);

    // N = Aᵀ G_m A
    let mut nmat = vec![0.0; cols * cols];
    for c1 in 0..cols {
        for c2 in 0..cols {
            let mut s = 0.0;
            for r1 in 0..rows {
                let ar1 = a[r1 * cols + c1];
                if ar1 == 0.0 {
                    continue;
                }
                for r2 in 0..rows {
                    s += ar1 * gm[r1 * rows + r2] * a[r2 * cols + c2];
                }
            }
            nmat[c1 * cols + c2] = s;
        }
    }

    // generalized problem N x = σ² G_{m-1} x reduced by Cholesky to the
    // ordinary symmetric problem L⁻¹ N L⁻ᵀ
    let l = linalg::cholesky(cols, &gq)
        .ok_or_else(|| Error::invalid("Gram matrix is not positive definite"))?;
    let mut y = nmat;
    linalg::lower_solve_matrix(cols, &l, &mut y, cols);
    // transpose, solve again
    let mut yt = vec![0.0; cols * cols];
    for i in 0..cols {
        for j in 0..cols {
            yt[j * cols + i] = y[i * cols + j];
        }
    }
    linalg::lower_solve_matrix(cols, &l, &mut yt, cols);

    let eigs = linalg::symmetric_eigenvalues(cols, &yt);
    let min = eigs.into_iter().fold(f64::INFINITY, f64::min);
    if min.is_nan() || min <= 0.0 {
        return Err(Error::invalid(
            "singular-value computation produced a non-positive eigenvalue",
        ));
    }
    Ok(min.sqrt())
}
