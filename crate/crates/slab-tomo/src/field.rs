//! Band-limited symmetric tensor fields on the periodic slab \[0,1\] × Tⁿ.
//!
//! A field of order m is stored through its Fourier coefficients: a finite
//! map from frequencies (j, k) ∈ Z × Zⁿ to homogeneous polynomials of degree
//! m in the velocity variables (v, w) ∈ R × Rⁿ, representing
//!
//!   f(x, y; v, w) = Σ f̂(j, k; v, w) e^{2πi jx} e^{2πi k·y},
//!
//! with \[0,1\] identified with T¹. Absent modes are zero; modes whose
//! polynomial cancels to zero are pruned. Every identity this crate relies
//! on acts mode by mode, so truncation to a finite band commutes with every
//! operation here.

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::poly::{monomials, sphere_inner, HomogeneousPoly};
use crate::util::{cis_mod1, mod1};

/// A point of the slab: x ∈ \[0,1\], y ∈ Tⁿ (components stored in [0,1)).
#[derive(Debug, Clone, PartialEq)]
pub struct SlabPoint {
    x: f64,
    y: Vec<f64>,
}

impl SlabPoint {
    pub fn new(x: f64, y: Vec<f64>) -> Result<Self> {
        if !(0.0..=1.0).contains(&x) {
            return Err(Error::invalid(format!(
                "slab coordinate x = {x} lies outside [0, 1]"
            )));
        }
        Ok(Self {
            x,
            y: y.into_iter().map(mod1).collect(),
        })
    }

    pub fn x(&self) -> f64 {
        self.x
    }

    pub fn y(&self) -> &[f64] {
        &self.y
    }
}

/// A Fourier frequency (j, k) of the slab.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct Mode {
    pub j: i64,
    pub k: Vec<i64>,
}

impl Mode {
    pub fn new(j: i64, k: Vec<i64>) -> Self {
        Self { j, k }
    }

    /// The frequency as a real vector (j, k) ∈ R^{n+1}; this is the ξ that
    /// multiplies the polynomial fiber under the symmetrized derivative.
    pub fn as_linear_form(&self) -> Vec<f64> {
        let mut xi = Vec::with_capacity(1 + self.k.len());
        xi.push(self.j as f64);
        xi.extend(self.k.iter().map(|&c| c as f64));
        xi
    }

    pub fn is_k_zero(&self) -> bool {
        self.k.iter().all(|&c| c == 0)
    }
}

/// Band-limited tensor field of order `m` on \[0,1\] × Tⁿ in Fourier
/// representation. `m == -1` denotes a field with values in the zero space.
#[derive(Debug, Clone, PartialEq)]
pub struct FourierTensorField {
    n: usize,
    m: i32,
    modes: BTreeMap<Mode, HomogeneousPoly>,
}

impl FourierTensorField {
    pub fn new(n: usize, m: i32) -> Self {
        assert!(m >= -1, "tensor order must be at least -1");
        Self {
            n,
            m,
            modes: BTreeMap::new(),
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn m(&self) -> i32 {
        self.m
    }

    pub fn num_modes(&self) -> usize {
        self.modes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.modes.is_empty()
    }

    fn check_mode(&self, k: &[i64], p: &HomogeneousPoly) -> Result<()> {
        if k.len() != self.n {
            return Err(Error::DimensionMismatch {
                expected: self.n,
                found: k.len(),
            });
        }
        if p.dim() != self.n + 1 {
            return Err(Error::DimensionMismatch {
                expected: self.n + 1,
                found: p.dim(),
            });
        }
        if p.degree() != self.m {
            return Err(Error::invalid(format!(
                "mode polynomial has degree {}, field has order {}",
                p.degree(),
                self.m
            )));
        }
        Ok(())
    }

    /// Replace the coefficient polynomial of mode (j, k).
    pub fn set_mode(&mut self, j: i64, k: &[i64], p: HomogeneousPoly) -> Result<()> {
        self.check_mode(k, &p)?;
        let mode = Mode::new(j, k.to_vec());
        if p.is_zero() {
            self.modes.remove(&mode);
        } else {
            self.modes.insert(mode, p);
        }
        Ok(())
    }

    /// Add a polynomial into the coefficient of mode (j, k).
    pub fn add_mode(&mut self, j: i64, k: &[i64], p: HomogeneousPoly) -> Result<()> {
        self.check_mode(k, &p)?;
        let mode = Mode::new(j, k.to_vec());
        match self.modes.remove(&mode) {
            None => {
                if !p.is_zero() {
                    self.modes.insert(mode, p);
                }
            }
            Some(old) => {
                let sum = &old + &p;
                if !sum.is_zero() {
                    self.modes.insert(mode, sum);
                }
            }
        }
        Ok(())
    }

    pub fn mode(&self, j: i64, k: &[i64]) -> Option<&HomogeneousPoly> {
        self.modes.get(&Mode::new(j, k.to_vec()))
    }

    pub fn iter(&self) -> impl Iterator<Item = (&Mode, &HomogeneousPoly)> {
        self.modes.iter()
    }

    /// Largest |j| over stored modes.
    pub fn j_band(&self) -> i64 {
        self.modes.keys().map(|m| m.j.abs()).max().unwrap_or(0)
    }

    /// Largest |k|_∞ over stored modes.
    pub fn k_band(&self) -> i64 {
        self.modes
            .keys()
            .flat_map(|m| m.k.iter().map(|c| c.abs()))
            .max()
            .unwrap_or(0)
    }

    /// Evaluate the field at a slab point and a velocity u ∈ R^{n+1}.
    pub fn eval(&self, pt: &SlabPoint, u: &[f64]) -> Result<Complex64> {
        if pt.y.len() != self.n {
            return Err(Error::DimensionMismatch {
                expected: self.n,
                found: pt.y.len(),
            });
        }
        if u.len() != self.n + 1 {
            return Err(Error::DimensionMismatch {
                expected: self.n + 1,
                found: u.len(),
            });
        }
        let mut acc = Complex64::new(0.0, 0.0);
        for (mode, p) in &self.modes {
            let mut theta = mode.j as f64 * pt.x;
            for (kc, yc) in mode.k.iter().zip(&pt.y) {
                theta += *kc as f64 * yc;
            }
            acc += p.eval(u)? * cis_mod1(theta);
        }
        Ok(acc)
    }

    /// Symmetrized derivative: the order-(m+1) field d g with Fourier
    /// coefficients 2πi (jv + k·w) ĝ(j, k; v, w). The (0, 0) mode is
    /// annihilated, so constants never contribute.
    pub fn sym_derivative(&self) -> FourierTensorField {
        let mut out = FourierTensorField::new(self.n, self.m + 1);
        let two_pi_i = Complex64::new(0.0, std::f64::consts::TAU);
        for (mode, p) in &self.modes {
            let xi = mode.as_linear_form();
            let q = p
                .mul_linear(&xi)
                .expect("mode linear form matches polynomial dimension")
                .scaled(two_pi_i);
            out.add_mode(mode.j, &mode.k, q)
                .expect("derived mode is valid");
        }
        out
    }

    /// Sobolev norm of the torus scale s: the square root of
    /// Σ (1 + j² + |k|²)^s ‖f̂(j,k)‖²_{L²(Sⁿ)}. At s = 0 this is the L² norm
    /// used throughout.
    pub fn sobolev_norm(&self, s: f64) -> f64 {
        let mut acc = 0.0;
        for (mode, p) in &self.modes {
            let l2 = mode.j as f64 * mode.j as f64
                + mode
                    .k
                    .iter()
                    .map(|&c| (c as f64) * (c as f64))
                    .sum::<f64>();
            let weight = (1.0 + l2).powf(s);
            acc += weight
                * sphere_inner(p, p)
                    .expect("matching dimensions")
                    .re
                    .max(0.0);
        }
        acc.sqrt()
    }

    pub fn l2_norm(&self) -> f64 {
        self.sobolev_norm(0.0)
    }

    /// Trace on the subtorus {x0} × Tⁿ: the map k ↦ Σ_j f̂(j,k) e^{2πi j x0}.
    /// The trace at x0 = 0 vanishing for every k is the zero-boundary-trace
    /// condition on potentials; periodicity makes x0 = 0 and x0 = 1 coincide.
    pub fn boundary_trace(&self, x0: f64) -> BTreeMap<Vec<i64>, HomogeneousPoly> {
        let mut out: BTreeMap<Vec<i64>, HomogeneousPoly> = BTreeMap::new();
        for (mode, p) in &self.modes {
            let phase = cis_mod1(mode.j as f64 * x0);
            let term = p.scaled(phase);
            match out.remove(&mode.k) {
                None => {
                    out.insert(mode.k.clone(), term);
                }
                Some(prev) => {
                    out.insert(mode.k.clone(), &prev + &term);
                }
            }
        }
        out.retain(|_, p| !p.is_zero());
        out
    }

    /// Deterministic pseudo-random field supported on |j| ≤ j_band,
    /// |k|_∞ ≤ k_band with standard-normal real and imaginary parts on every
    /// monomial coefficient.
    pub fn random(n: usize, m: i32, j_band: i64, k_band: i64, seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        Self::random_from(&mut rng, n, m, j_band, k_band)
    }

    /// Like [`FourierTensorField::random`], drawing from a caller-owned
    /// generator so several objects can share one seed stream.
    pub fn random_from(rng: &mut ChaCha8Rng, n: usize, m: i32, j_band: i64, k_band: i64) -> Self {
        let mut field = FourierTensorField::new(n, m);
        if m < 0 {
            return field;
        }
        let basis = monomials(n + 1, m);
        let normal = StandardNormal;
        let mut k = vec![-k_band; n];
        loop {
            for j in -j_band..=j_band {
                let mut p = HomogeneousPoly::zero(n + 1, m);
                for alpha in &basis {
                    let re: f64 = normal.sample(rng);
                    let im: f64 = normal.sample(rng);
                    p.add_term(alpha.clone(), Complex64::new(re, im))
                        .expect("basis indices are valid");
                }
                field.set_mode(j, &k, p).expect("band mode is valid");
            }
            // odometer over the k-box, last axis fastest
            let mut axis = n;
            loop {
                if axis == 0 {
                    return field;
                }
                axis -= 1;
                if k[axis] < k_band {
                    k[axis] += 1;
                    break;
                }
                k[axis] = -k_band;
            }
        }
    }

    /// Whether the field takes real values: f̂(-j,-k) = conj(f̂(j,k)) up to
    /// `tol` in L² (coefficients are stored complex; realness is a testable
    /// predicate, not an enforced invariant).
    pub fn is_real(&self, tol: f64) -> bool {
        let mut defect2 = 0.0;
        for (mode, p) in &self.modes {
            let neg_k: Vec<i64> = mode.k.iter().map(|&c| -c).collect();
            let partner = self.mode(-mode.j, &neg_k);
            let diff = match partner {
                Some(q) => p - &q.conj(),
                None => p.clone(),
            };
            defect2 += sphere_inner(&diff, &diff).expect("same dims").re.max(0.0);
        }
        defect2.sqrt() <= tol * self.l2_norm().max(1e-300)
    }

    pub fn scaled(&self, z: Complex64) -> Self {
        let mut out = FourierTensorField::new(self.n, self.m);
        for (mode, p) in &self.modes {
            let q = p.scaled(z);
            if !q.is_zero() {
                out.modes.insert(mode.clone(), q);
            }
        }
        out
    }
}

impl std::ops::Add<&FourierTensorField> for &FourierTensorField {
    type Output = FourierTensorField;

    fn add(self, rhs: &FourierTensorField) -> FourierTensorField {
        assert_eq!(self.n, rhs.n, "field dimensions differ");
        assert_eq!(self.m, rhs.m, "field orders differ");
        let mut out = self.clone();
        for (mode, p) in &rhs.modes {
            out.add_mode(mode.j, &mode.k, p.clone())
                .expect("validated modes");
        }
        out
    }
}

impl std::ops::Sub<&FourierTensorField> for &FourierTensorField {
    type Output = FourierTensorField;

    fn sub(self, rhs: &FourierTensorField) -> FourierTensorField {
        assert_eq!(self.n, rhs.n, "field dimensions differ");
        assert_eq!(self.m, rhs.m, "field orders differ");
        let mut out = self.clone();
        for (mode, p) in &rhs.modes {
            out.add_mode(mode.j, &mode.k, p.scaled(Complex64::new(-1.0, 0.0)))
                .expect("validated modes");
        }
        out
    }
}

/// A field on the interval \[0,1\] with polynomial values: the h-part of the
/// kernel decomposition. Mode j = 0 must be absent (the zero-mean
/// normalization that makes h unique and invisible to the transform).
#[derive(Debug, Clone, PartialEq)]
pub struct IntervalField {
    n: usize,
    m: i32,
    modes: BTreeMap<i64, HomogeneousPoly>,
}

impl IntervalField {
    /// `n` is the dimension of the ambient torus: the polynomial fibers
    /// live on R^{n+1} even though the base is one-dimensional.
    pub fn new(n: usize, m: i32) -> Self {
        assert!(m >= -1, "tensor order must be at least -1");
        Self {
            n,
            m,
            modes: BTreeMap::new(),
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn m(&self) -> i32 {
        self.m
    }

    pub fn is_empty(&self) -> bool {
        self.modes.is_empty()
    }

    pub fn set_mode(&mut self, j: i64, p: HomogeneousPoly) -> Result<()> {
        if p.dim() != self.n + 1 {
            return Err(Error::DimensionMismatch {
                expected: self.n + 1,
                found: p.dim(),
            });
        }
        if p.degree() != self.m {
            return Err(Error::invalid(format!(
                "mode polynomial has degree {}, interval field has order {}",
                p.degree(),
                self.m
            )));
        }
        if j == 0 && !p.is_zero() {
            return Err(Error::invalid(
                "interval fields are zero-mean: mode j = 0 must vanish",
            ));
        }
        if p.is_zero() {
            self.modes.remove(&j);
        } else {
            self.modes.insert(j, p);
        }
        Ok(())
    }

    pub fn mode(&self, j: i64) -> Option<&HomogeneousPoly> {
        self.modes.get(&j)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&i64, &HomogeneousPoly)> {
        self.modes.iter()
    }

    pub fn j_band(&self) -> i64 {
        self.modes.keys().map(|j| j.abs()).max().unwrap_or(0)
    }

    /// Pull back along the projection π: M → \[0,1\]: the slab field whose
    /// (j, 0) mode is ĥ(j) and whose k ≠ 0 modes vanish.
    pub fn pullback(&self) -> FourierTensorField {
        let mut out = FourierTensorField::new(self.n, self.m);
        let k0 = vec![0i64; self.n];
        for (&j, p) in &self.modes {
            out.set_mode(j, &k0, p.clone()).expect("valid mode");
        }
        out
    }

    /// The k = 0 slice of a slab field, dropping the (0,0) mode, as an
    /// interval field. Inverse of [`IntervalField::pullback`] on its image.
    pub fn from_k_zero_slice(f: &FourierTensorField) -> Self {
        let mut out = IntervalField::new(f.n(), f.m());
        for (mode, p) in f.iter() {
            if mode.is_k_zero() && mode.j != 0 {
                out.set_mode(mode.j, p.clone()).expect("valid slice mode");
            }
        }
        out
    }

    pub fn l2_norm(&self) -> f64 {
        self.modes
            .values()
            .map(|p| sphere_inner(p, p).expect("same dims").re.max(0.0))
            .fold(0.0, |acc, v| acc + v)
            .sqrt()
    }

    /// Deterministic random zero-mean interval field on 1 ≤ |j| ≤ j_band.
    pub fn random(n: usize, m: i32, j_band: i64, seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        Self::random_from(&mut rng, n, m, j_band)
    }

    pub fn random_from(rng: &mut ChaCha8Rng, n: usize, m: i32, j_band: i64) -> Self {
        let mut out = IntervalField::new(n, m);
        if m < 0 {
            return out;
        }
        let basis = monomials(n + 1, m);
        let normal = StandardNormal;
        for j in -j_band..=j_band {
            if j == 0 {
                continue;
            }
            let mut p = HomogeneousPoly::zero(n + 1, m);
            for alpha in &basis {
                let re: f64 = normal.sample(rng);
                let im: f64 = normal.sample(rng);
                p.add_term(alpha.clone(), Complex64::new(re, im))
                    .expect("basis indices are valid");
            }
            out.set_mode(j, p).expect("nonzero j");
        }
        out
    }
}
