//! Joint spectral decomposition of the spherical Grushin operators
//! `L_{d,k} = Δ_d − Δ_k` on the unit sphere `S^d`, together with the numerical
//! machinery used to probe their weighted spectral cluster, Riesz-type and
//! weighted Plancherel bounds at desk scale.
//!
//! The crate is organised bottom-up:
//!
//! * [`special`]: Jacobi polynomials, the normalized ultraspherical profiles
//!   `X^d_{ℓ,m}` / `X̃^d_{ℓ,m}`, and calibrated pointwise envelopes.
//! * [`spectrum`]: half-integer index lattices, eigenvalues, eigenspace
//!   dimensions and enumeration of index chains in spectral windows.
//! * [`geometry`]: cylindrical coordinates, the spherical measure, the
//!   distance surrogate, Monte-Carlo ball volumes and the weights.
//! * [`kernels`]: zonal kernels, tensor eigenfunctions and integral kernels of
//!   `F(√L_{d,k})`.
//! * [`bounds`]: cluster sums and the empirical checks built on them.
//! * [`verify`]: the acceptance harness shared by the test suite and the CLI.

pub mod bounds;
pub mod config;
pub mod error;
pub mod geometry;
pub mod kernels;
pub mod numeric;
pub mod quadrature;
pub mod special;
pub mod spectrum;
pub mod verify;

pub use error::{Error, Result};
pub use spectrum::{ChainIndex, HalfInt, Regime, SpectralWindow};
