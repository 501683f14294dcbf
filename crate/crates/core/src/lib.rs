//! Numerical certificates for minimal Lagrangian submanifolds of Kähler
//! manifolds.
//!
//! The crate evaluates the integral obstruction `∫_L div(V)` over holomorphic
//! vector fields `V` on immersed tori `L`, and runs the converse probe built
//! from the dual of the canonical-bundle connection form along `L`. It is
//! `no_std` (with `alloc`); IO, configuration and the command line live in the
//! `holocert` crate.
//!
//! Modules, bottom-up:
//!
//! - [`spectral`]: radix-2 FFT, spectral derivatives and quadrature on
//!   uniform torus grids.
//! - [`kahler`]: chart-based Kähler models (flat space, projective space),
//!   metric jets, Christoffel symbols, the Ricci form and the Einstein fit.
//! - [`poly`]: complex polynomials in chart coordinates.
//! - [`fields`]: holomorphic vector fields, their divergence, and moment maps.
//! - [`submanifold`]: immersed tori, frames, mean curvature and the canonical
//!   section along `L`.
//! - [`extend`]: Fourier continuation of torus data into a complex tube.
//! - [`certify`]: divergence certificates, the pointwise Stokes check and the
//!   converse probe.
//! - [`optimize`]: descent over the moment polytope of orbit tori.
//!
//! # Conventions
//!
//! See [`CONVENTIONS`]. Every identity checked by this crate depends on them.
#![no_std]
#![cfg_attr(test, allow(unused_imports))]

extern crate alloc;

#[cfg(test)]
extern crate std;

pub mod certify;
pub mod error;
pub mod extend;
pub mod fields;
pub mod kahler;
pub mod linalg;
pub mod optimize;
pub mod poly;
pub mod sampling;
pub mod spectral;
pub mod submanifold;

pub use error::{Error, Result};

/// Complex scalar used throughout.
pub type C64 = num_complex::Complex64;

/// The imaginary unit.
pub const I: C64 = C64::new(0.0, 1.0);

/// Sign, scale and normalization conventions, embedded verbatim in reports.
pub const CONVENTIONS: &str = "\
Chart coordinates z^a = x^a + i y^a; J acts on (1,0)-components by multiplication with i. \
A real tangent vector X is stored through its (1,0)-components dz^a(X). \
Metric coefficients g_{a b~} = d_a d_b~ K of the chart potential K. \
Hermitian product h(X,Y) = sum g_{a b~} X^a conj(Y^b), complex-linear in the first slot. \
Riemannian metric g(X,Y) = 2 Re h(X,Y). \
Kahler form omega(X,Y) = g(X,JY) = 2 Im h(X,Y), i.e. omega = -i g_{a b~} dz^a ^ dz~^b. \
Ricci coefficients Ric_{a b~} = -d_a d_b~ log det g; the Ricci form uses the same map as omega. \
Einstein constant t: Ric = t omega. Projective space CPn-t1 uses K = (n+1) log(1+|w|^2) per affine chart (t = 1); \
CPn-unit uses K = log(1+|w|^2) (t = n+1). \
Canonical bundle frame dz^1^...^dz^n has |frame|^2 = det(g)^-1 2^-n; nabla_u frame = -(d_b log det g) u^b frame. \
Connection form xi: nabla_u kappa = xi(u) kappa. Mean-curvature form sigma = i_h omega. \
Torus generator (j,k) on CPn generates (e^{i s/(n+1)} z_j, e^{-i s/(n+1)} z_k) on homogeneous coordinates. \
Moment map mu = i t^-1 div(V) with d mu = i_V omega.";
