//! Twisted slabs: quotients of the periodic slab by finite free groups of
//! isometries, represented through their deck transformations.
//!
//! A deck transform in normal form acts on points by
//! (x, y) ↦ (flip(x), Ay + c) with flip(x) ∈ {x, 1-x}, A a signed
//! permutation of the torus coordinates and c a shift; the differential
//! (v, w) ↦ (±v, Aw) transports the polynomial fiber. These are exactly the
//! metric-preserving covering automorphisms of the unit-lattice slab.
//! Fields on the quotient N = M/G are represented as G-invariant fields on
//! M; the pushforward is the deck average, which is a left inverse of the
//! pullback. The Möbius strip is the order-two example
//! σ(x, y) = (1-x, y + 1/2).

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::field::FourierTensorField;
use crate::kernel::{boundary_defect, decompose, Decomposition};
use crate::poly::{HomogeneousPoly, MultiIndex};
use crate::util::{cis_mod1, mod1};
use crate::xray::Geodesic;
use crate::field::SlabPoint;

/// Why a purported covering group is not one.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum CoveringViolation {
    #[error("element {index} acts on T^{found}, the covering is over T^{expected}")]
    Dimension {
        index: usize,
        expected: usize,
        found: usize,
    },
    #[error("the identity transform is missing")]
    MissingIdentity,
    #[error("elements {first} and {second} coincide")]
    Duplicate { first: usize, second: usize },
    #[error("not closed: the product of elements {left} and {right} is not listed")]
    NotClosed { left: usize, right: usize },
    #[error("element {index} has no inverse in the list")]
    MissingInverse { index: usize },
    #[error("element {index} is not free: it fixes the point x = {x}, y = {y:?}")]
    NotFree { index: usize, x: f64, y: Vec<f64> },
    #[error("the generators do not close into a finite group of at most {limit} elements")]
    NotFinite { limit: usize },
}

/// A slab isometry commuting with a covering projection, in normal form.
#[derive(Debug, Clone)]
pub struct DeckTransform {
    flip: bool,
    a: Vec<Vec<i64>>,
    c: Vec<f64>,
}

impl DeckTransform {
    /// Build a transform, validating that `a` is a signed permutation
    /// matrix (rows and columns each carry exactly one entry ±1) and
    /// reducing the shift modulo 1.
    pub fn new(flip: bool, a: Vec<Vec<i64>>, c: Vec<f64>) -> Result<Self> {
        let n = c.len();
        if a.len() != n || a.iter().any(|row| row.len() != n) {
            return Err(Error::DimensionMismatch {
                expected: n,
                found: a.len(),
            });
        }
        for (i, row) in a.iter().enumerate() {
            let nonzero: Vec<&i64> = row.iter().filter(|&&x| x != 0).collect();
            if nonzero.len() != 1 || nonzero[0].abs() != 1 {
                return Err(Error::invalid(format!(
                    "row {i} of the torus action is not a signed unit vector"
                )));
            }
        }
        for col in 0..n {
            let nonzero = a.iter().filter(|row| row[col] != 0).count();
            if nonzero != 1 {
                return Err(Error::invalid(format!(
                    "column {col} of the torus action is not a signed unit vector"
                )));
            }
        }
        Ok(Self {
            flip,
            a,
            c: c.into_iter().map(mod1).collect(),
        })
    }

    pub fn identity(n: usize) -> Self {
        let mut a = vec![vec![0i64; n]; n];
        for (i, row) in a.iter_mut().enumerate() {
            row[i] = 1;
        }
        Self {
            flip: false,
            a,
            c: vec![0.0; n],
        }
    }

    pub fn n(&self) -> usize {
        self.c.len()
    }

    pub fn flip(&self) -> bool {
        self.flip
    }

    pub fn torus_matrix(&self) -> &[Vec<i64>] {
        &self.a
    }

    pub fn shift(&self) -> &[f64] {
        &self.c
    }

    pub fn is_identity(&self, tol: f64) -> bool {
        self.approx_eq(&Self::identity(self.n()), tol)
    }

    pub fn approx_eq(&self, other: &Self, tol: f64) -> bool {
        if self.flip != other.flip || self.a != other.a || self.n() != other.n() {
            return false;
        }
        self.c.iter().zip(&other.c).all(|(&x, &y)| {
            let d = (x - y).rem_euclid(1.0);
            d.min(1.0 - d) <= tol
        })
    }

    /// self ∘ other as maps of the slab.
    pub fn compose(&self, other: &Self) -> Self {
        assert_eq!(self.n(), other.n(), "deck transform dimensions differ");
        let n = self.n();
        let mut a = vec![vec![0i64; n]; n];
        for (i, row) in a.iter_mut().enumerate() {
            for (j, entry) in row.iter_mut().enumerate() {
                *entry = (0..n).map(|k| self.a[i][k] * other.a[k][j]).sum();
            }
        }
        let c: Vec<f64> = (0..n)
            .map(|i| {
                let rotated: f64 = (0..n).map(|k| self.a[i][k] as f64 * other.c[k]).sum();
                mod1(rotated + self.c[i])
            })
            .collect();
        Self {
            flip: self.flip ^ other.flip,
            a,
            c,
        }
    }

    pub fn inverse(&self) -> Self {
        let n = self.n();
        // A⁻¹ = Aᵀ for signed permutations
        let mut at = vec![vec![0i64; n]; n];
        for (i, row) in at.iter_mut().enumerate() {
            for (j, entry) in row.iter_mut().enumerate() {
                *entry = self.a[j][i];
            }
        }
        let c: Vec<f64> = (0..n)
            .map(|i| {
                let rotated: f64 = (0..n).map(|k| at[i][k] as f64 * self.c[k]).sum();
                mod1(-rotated)
            })
            .collect();
        Self {
            flip: self.flip,
            a: at,
            c,
        }
    }

    /// Action on points: (x, y) ↦ (flip(x), Ay + c).
    pub fn apply_point(&self, pt: &SlabPoint) -> Result<SlabPoint> {
        if pt.y().len() != self.n() {
            return Err(Error::DimensionMismatch {
                expected: self.n(),
                found: pt.y().len(),
            });
        }
        let x = if self.flip { 1.0 - pt.x() } else { pt.x() };
        let y: Vec<f64> = (0..self.n())
            .map(|i| {
                let rotated: f64 = (0..self.n())
                    .map(|k| self.a[i][k] as f64 * pt.y()[k])
                    .sum();
                rotated + self.c[i]
            })
            .collect();
        SlabPoint::new(x, y)
    }

    /// Pullback of a field: (t·f)(p; u) = f(t(p); dt(u)).
    ///
    /// Fourier modes are permuted, never spread: mode (j, k) of f lands at
    /// (±j, Aᵀk) with the phase e^{2πi k·c}, and the polynomial undergoes
    /// the exact substitution (v, w) ↦ (±v, Aw). Composition is therefore
    /// contravariant: apply(s∘t, f) = apply(t, apply(s, f)).
    pub fn apply_field(&self, f: &FourierTensorField) -> Result<FourierTensorField> {
        if f.n() != self.n() {
            return Err(Error::DimensionMismatch {
                expected: self.n(),
                found: f.n(),
            });
        }
        let n = self.n();
        // row i of A has its nonzero entry s_i at column col(i):
        // (Aw)_i = s_i w_{col(i)}, so exponent β_i moves to slot col(i)
        // and frequency k_i moves there as well.
        let mut col = vec![0usize; n];
        let mut sign = vec![0i64; n];
        for (i, row) in self.a.iter().enumerate() {
            for (j, &entry) in row.iter().enumerate() {
                if entry != 0 {
                    col[i] = j;
                    sign[i] = entry;
                }
            }
        }
        let eps: i64 = if self.flip { -1 } else { 1 };

        let mut out = FourierTensorField::new(n, f.m());
        for (mode, p) in f.iter() {
            let j_new = eps * mode.j;
            let mut k_new = vec![0i64; n];
            for i in 0..n {
                k_new[col[i]] = sign[i] * mode.k[i];
            }
            let kc: f64 = mode
                .k
                .iter()
                .zip(&self.c)
                .map(|(&kc, &cc)| kc as f64 * cc)
                .sum();
            let phase = cis_mod1(kc);

            let mut q = HomogeneousPoly::zero(n + 1, f.m());
            for (alpha, coeff) in p.terms() {
                let e = alpha.exponents();
                let mut new_exp = vec![0u32; n + 1];
                new_exp[0] = e[0];
                let mut s = if self.flip && e[0] % 2 == 1 { -1.0 } else { 1.0 };
                for i in 0..n {
                    new_exp[col[i] + 1] = e[i + 1];
                    if sign[i] < 0 && e[i + 1] % 2 == 1 {
                        s = -s;
                    }
                }
                q.add_term(MultiIndex::new(new_exp), coeff * s * phase)?;
            }
            out.add_mode(j_new, &k_new, q)?;
        }
        Ok(out)
    }

    /// The slab parametrization of the image of a geodesic, and whether the
    /// parametrization had to be reversed to keep the x-velocity positive.
    ///
    /// Without a flip the image of (a, b) is (Aa + c, Ab) and
    /// I(t·f)(geo) = I f(t·geo). A flip reverses the traversal: the image is
    /// (A(a+b) + c, -Ab), and the velocity reversal contributes the factor
    /// (-1)^m for fields of order m, so
    /// I(t·f)(geo) = (-1)^m I f(t·geo).
    pub fn transport_geodesic(&self, geo: &Geodesic) -> Result<(Geodesic, bool)> {
        if geo.b().len() != self.n() {
            return Err(Error::DimensionMismatch {
                expected: self.n(),
                found: geo.b().len(),
            });
        }
        let n = self.n();
        let rotate = |v: &[f64]| -> Vec<f64> {
            (0..n)
                .map(|i| (0..n).map(|k| self.a[i][k] as f64 * v[k]).sum())
                .collect()
        };
        if self.flip {
            let shifted: Vec<f64> = geo.a().iter().zip(geo.b()).map(|(x, y)| x + y).collect();
            let mut a = rotate(&shifted);
            for (ai, ci) in a.iter_mut().zip(&self.c) {
                *ai += ci;
            }
            let b: Vec<f64> = rotate(geo.b()).into_iter().map(|x| -x).collect();
            Ok((Geodesic::new(a, b)?, true))
        } else {
            let mut a = rotate(geo.a());
            for (ai, ci) in a.iter_mut().zip(&self.c) {
                *ai += ci;
            }
            Ok((Geodesic::new(a, rotate(geo.b()))?, false))
        }
    }

    /// A fixed point of the action, if one exists. The x-coordinate can
    /// always be fixed (x = 1/2 under a flip), so freeness reduces to the
    /// torus equation Ay + c = y mod 1, solved exactly by Smith reduction
    /// of A - I.
    fn fixed_point(&self) -> Option<(f64, Vec<f64>)> {
        let n = self.n();
        let x = if self.flip { 0.5 } else { 0.0 };
        if n == 0 {
            return Some((x, Vec::new()));
        }
        // M = A - I
        let mut m = vec![vec![0i64; n]; n];
        for (i, row) in m.iter_mut().enumerate() {
            for (j, entry) in row.iter_mut().enumerate() {
                *entry = self.a[i][j] - i64::from(i == j);
            }
        }
        let snf = diagonalize(m);
        // Ay + c = y mod 1 ⟺ (A - I)y = z - c for some z ∈ Zⁿ.
        // With UMV = D and y = V y'', solvability needs (Uc)_i ∈ Z on the
        // zero rows of D; a witness is y''_i = -(Uc)_i / d_i on the rest.
        let uc: Vec<f64> = (0..n)
            .map(|i| (0..n).map(|k| snf.u[i][k] as f64 * self.c[k]).sum())
            .collect();
        let mut y2 = vec![0.0; n];
        for i in 0..n {
            if snf.d[i] != 0 {
                y2[i] = -uc[i] / snf.d[i] as f64;
            } else if (uc[i] - uc[i].round()).abs() > 1e-9 {
                return None;
            }
        }
        let y: Vec<f64> = (0..n)
            .map(|i| mod1((0..n).map(|k| snf.v[i][k] as f64 * y2[k]).sum()))
            .collect();
        Some((x, y))
    }
}

struct DiagonalForm {
    u: Vec<Vec<i64>>,
    v: Vec<Vec<i64>>,
    d: Vec<i64>,
}

/// Diagonalize an integer matrix by unimodular row and column operations:
/// U M V = diag(d). Plain integer Gaussian elimination with pivoting on the
/// smallest nonzero entry; entries here stay tiny (A is a signed
/// permutation), so i64 never strains.
fn diagonalize(mut m: Vec<Vec<i64>>) -> DiagonalForm {
    let n = m.len();
    let mut u = identity_matrix(n);
    let mut v = identity_matrix(n);
    for t in 0..n {
        loop {
            // smallest nonzero pivot in the trailing block
            let mut pivot: Option<(usize, usize)> = None;
            for i in t..n {
                for j in t..n {
                    if m[i][j] != 0
                        && pivot.is_none_or(|(pi, pj)| m[i][j].abs() < m[pi][pj].abs())
                    {
                        pivot = Some((i, j));
                    }
                }
            }
            let Some((pi, pj)) = pivot else {
                return DiagonalForm {
                    u,
                    v,
                    d: (0..n).map(|i| m[i][i]).collect(),
                };
            };
            m.swap(t, pi);
            u.swap(t, pi);
            for row in m.iter_mut() {
                row.swap(t, pj);
            }
            for row in v.iter_mut() {
                row.swap(t, pj);
            }
            let mut clean = true;
            for i in t + 1..n {
                let q = m[i][t].div_euclid(m[t][t]);
                if q != 0 {
                    for j in 0..n {
                        m[i][j] -= q * m[t][j];
                        u[i][j] -= q * u[t][j];
                    }
                }
                if m[i][t] != 0 {
                    clean = false;
                }
            }
            for j in t + 1..n {
                let q = m[t][j].div_euclid(m[t][t]);
                if q != 0 {
                    for i in 0..n {
                        m[i][j] -= q * m[i][t];
                        v[i][j] -= q * v[i][t];
                    }
                }
                if m[t][j] != 0 {
                    clean = false;
                }
            }
            if clean {
                break;
            }
        }
    }
    DiagonalForm {
        u,
        v,
        d: (0..n).map(|i| m[i][i]).collect(),
    }
}

fn identity_matrix(n: usize) -> Vec<Vec<i64>> {
    let mut m = vec![vec![0i64; n]; n];
    for (i, row) in m.iter_mut().enumerate() {
        row[i] = 1;
    }
    m
}

const GROUP_SIZE_LIMIT: usize = 1024;
const ELEMENT_TOL: f64 = 1e-9;

/// A finite free group of slab isometries presenting a twisted slab as a
/// quotient of M. Construction always validates the group axioms and
/// freeness, so a value of this type is a genuine covering.
#[derive(Debug, Clone)]
pub struct CoveringSpec {
    n: usize,
    elements: Vec<DeckTransform>,
}

impl CoveringSpec {
    /// The trivial covering: N = M itself.
    pub fn trivial(n: usize) -> Self {
        Self {
            n,
            elements: vec![DeckTransform::identity(n)],
        }
    }

    /// The Möbius covering of the strip: n = 1 and σ(x, y) = (1-x, y+1/2).
    /// The quotient has a single boundary circle.
    pub fn mobius() -> Self {
        let sigma = DeckTransform::new(true, vec![vec![1]], vec![0.5]).expect("valid normal form");
        Self::from_generators(1, vec![sigma]).expect("the Möbius group is a valid covering")
    }

    /// Close the generators into a group and validate. Fails if the closure
    /// exceeds a size limit (shifts by irrational amounts never close).
    pub fn from_generators(n: usize, generators: Vec<DeckTransform>) -> Result<Self> {
        let mut elements = vec![DeckTransform::identity(n)];
        let mut queue: Vec<DeckTransform> = generators;
        while let Some(g) = queue.pop() {
            if g.n() != n {
                return Err(Error::DimensionMismatch {
                    expected: n,
                    found: g.n(),
                });
            }
            if elements.iter().any(|e| e.approx_eq(&g, ELEMENT_TOL)) {
                continue;
            }
            elements.push(g.clone());
            if elements.len() > GROUP_SIZE_LIMIT {
                return Err(CoveringViolation::NotFinite {
                    limit: GROUP_SIZE_LIMIT,
                }
                .into());
            }
            // close under products with everything seen so far
            let snapshot = elements.clone();
            for e in &snapshot {
                queue.push(e.compose(&g));
                queue.push(g.compose(e));
            }
            queue.push(g.inverse());
        }
        let spec = Self { n, elements };
        spec.validate()?;
        Ok(spec)
    }

    /// Assemble from an explicit element list, validating the axioms.
    pub fn from_elements(n: usize, elements: Vec<DeckTransform>) -> Result<Self> {
        let spec = Self { n, elements };
        spec.validate()?;
        Ok(spec)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn order(&self) -> usize {
        self.elements.len()
    }

    pub fn elements(&self) -> &[DeckTransform] {
        &self.elements
    }

    /// Number of boundary circles of the quotient: the two faces of the
    /// slab are identified exactly when some deck transform flips x.
    pub fn boundary_components(&self) -> usize {
        if self.elements.iter().any(|e| e.flip) {
            1
        } else {
            2
        }
    }

    /// Check the covering-group axioms: dimensions, identity, no
    /// duplicates, closure, inverses, and freeness of every non-identity
    /// element. Reports the first violated axiom with witnesses.
    pub fn validate(&self) -> std::result::Result<(), CoveringViolation> {
        for (i, e) in self.elements.iter().enumerate() {
            if e.n() != self.n {
                return Err(CoveringViolation::Dimension {
                    index: i,
                    expected: self.n,
                    found: e.n(),
                });
            }
        }
        if !self
            .elements
            .iter()
            .any(|e| e.is_identity(ELEMENT_TOL))
        {
            return Err(CoveringViolation::MissingIdentity);
        }
        for i in 0..self.elements.len() {
            for j in i + 1..self.elements.len() {
                if self.elements[i].approx_eq(&self.elements[j], ELEMENT_TOL) {
                    return Err(CoveringViolation::Duplicate { first: i, second: j });
                }
            }
        }
        for (i, a) in self.elements.iter().enumerate() {
            for (j, b) in self.elements.iter().enumerate() {
                let prod = a.compose(b);
                if !self
                    .elements
                    .iter()
                    .any(|e| e.approx_eq(&prod, ELEMENT_TOL))
                {
                    return Err(CoveringViolation::NotClosed { left: i, right: j });
                }
            }
            let inv = a.inverse();
            if !self.elements.iter().any(|e| e.approx_eq(&inv, ELEMENT_TOL)) {
                return Err(CoveringViolation::MissingInverse { index: i });
            }
        }
        for (i, e) in self.elements.iter().enumerate() {
            if e.is_identity(ELEMENT_TOL) {
                continue;
            }
            if let Some((x, y)) = e.fixed_point() {
                return Err(CoveringViolation::NotFree { index: i, x, y });
            }
        }
        Ok(())
    }
}

/// Pushforward-followed-by-pullback of a field: the average of the deck
/// orbit, (1/|G|) Σ_t t·f. The output is G-invariant, the map is idempotent,
/// and it fixes fields that are already invariant.
pub fn deck_average(f: &FourierTensorField, spec: &CoveringSpec) -> Result<FourierTensorField> {
    let mut acc = FourierTensorField::new(f.n(), f.m());
    for t in spec.elements() {
        acc = &acc + &t.apply_field(f)?;
    }
    Ok(acc.scaled(Complex64::new(1.0 / spec.order() as f64, 0.0)))
}

/// Whether f descends to the quotient: ‖t·f - f‖ ≤ tol·‖f‖ for every deck
/// transform t.
pub fn is_invariant(f: &FourierTensorField, spec: &CoveringSpec, tol: f64) -> Result<bool> {
    let norm = f.l2_norm();
    for t in spec.elements() {
        let moved = t.apply_field(f)?;
        if (&moved - f).l2_norm() > tol * norm {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Kernel decomposition on a twisted slab: decompose the invariant field on
/// the covering slab, then replace the potential by its deck average so
/// that it also descends to the quotient. The interval part inherits the
/// symmetry forced by the group (for the Möbius cover, h(x) = h(1-x) up to
/// the sign action on v).
pub fn decompose_twisted(
    f: &FourierTensorField,
    spec: &CoveringSpec,
    tol: f64,
) -> Result<Decomposition> {
    let norm = f.l2_norm();
    for (i, t) in spec.elements().iter().enumerate() {
        let moved = t.apply_field(f)?;
        if (&moved - f).l2_norm() > tol * norm {
            return Err(Error::invalid(format!(
                "field is not invariant under deck transform {i} \
                 (flip = {}, shift = {:?})",
                t.flip, t.c
            )));
        }
    }
    let base = decompose(f, tol)?;
    let g = deck_average(&base.g, spec)?;
    let residual = &(f - &base.h.pullback()) - &g.sym_derivative();
    let residual_norm = residual.l2_norm();
    let defect = boundary_defect(&g);
    Ok(Decomposition {
        h: base.h,
        g,
        residual,
        residual_norm,
        boundary_defect: defect,
    })
}
