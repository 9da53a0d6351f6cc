//! Geodesic X-ray tomography of symmetric tensor fields on the periodic
//! slab \[0,1\] × Tⁿ and on its twisted quotients such as the Möbius strip.
//!
//! The transform integrates an order-m tensor field — represented fiberwise
//! as a homogeneous polynomial of degree m in the velocity variables — over
//! every geodesic running from one boundary face to the other. On the slab
//! the transform has a nontrivial kernel with two sources: zero-mean fields
//! depending only on the interval coordinate are invisible by symmetry, and
//! potentials dg with boundary-vanishing g are invisible by the fundamental
//! theorem of calculus. This crate makes that characterization executable
//! for band-limited fields:
//!
//! * [`poly`] — homogeneous polynomial algebra with the L²(Sⁿ) inner
//!   product, exact sphere moments, and division by linear forms;
//! * [`field`] — Fourier-space tensor fields on the slab, symmetrized
//!   derivative, interval pullback, traces and Sobolev norms;
//! * [`xray`] — the transform by direct quadrature and by the Fourier-side
//!   φ-formula, two deliberately independent routes;
//! * [`kernel`] — the constructive decomposition f = π*h + dg + residual,
//!   kernel membership with certificates, the explicit stability constant,
//!   and orbit/equidistribution diagnostics;
//! * [`twisted`] — deck transformation groups, deck averages, and the
//!   decomposition on quotient slabs;
//! * [`io`] — JSON and CSV formats with deterministic output.
//!
//! Every type is an immutable value and every operation is a pure function,
//! so the whole API is safe to drive from multiple threads.

pub mod error;
pub mod field;
pub mod io;
pub mod kernel;
mod linalg;
pub mod poly;
pub mod twisted;
mod util;
pub mod xray;

pub use error::{Error, Result};
pub use field::{FourierTensorField, IntervalField, Mode, SlabPoint};
pub use kernel::{
    decompose, interval_field_is_potential, is_dense_orbit, is_in_kernel, stability_constant,
    weyl_sum, Decomposition, KernelCertificate,
};
pub use poly::{monomials, mu_min_singular, sphere_inner, sphere_moment, HomogeneousPoly, MultiIndex};
pub use twisted::{
    deck_average, decompose_twisted, is_invariant, CoveringSpec, CoveringViolation, DeckTransform,
};
pub use xray::{
    default_quad_nodes, phi, potential_trace, xray_fourier_coeff, xray_quadrature, xray_sinogram,
    Geodesic, Sinogram,
};
