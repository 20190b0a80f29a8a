//! Core mathematics for toric-degeneration potential computations.
//!
//! Everything in this crate is `no_std`-compatible (with `alloc`); IO, file
//! formats, and the command-line front end live in the companion `toricpot`
//! crate. The modules are layered bottom-up:
//!
//! - [`linalg`]: exact rational elimination and small dense complex
//!   numerics (LU, Hermitian eigensolver, singular values).
//! - [`novikov`]: formal power series in one variable T with rational
//!   exponents and Gaussian-rational coefficients, truncated at an explicit
//!   level.
//! - [`polytope`]: rational H-representation polytopes, vertex enumeration,
//!   and the interlacing-pattern polytopes of the orthogonal groups.
//! - [`potential`]: Laurent-type potential functions attached to a facet
//!   system, their critical points, and certificates.
//! - [`quadric`]: moment-map values and torus-fibration coordinates on
//!   quadric hypersurfaces, with the doubly-ruled quadric surface picture.
//! - [`ghflow`]: the gradient–Hamiltonian vector field of the quadric
//!   degeneration and its flow.
//! - [`disklift`]: intersection arithmetic for lifting holomorphic disks
//!   through small resolutions of surface degenerations.

#![cfg_attr(not(feature = "std"), no_std)]

extern crate alloc;

pub mod disklift;
pub mod ghflow;
pub mod linalg;
pub mod novikov;
pub mod polytope;
pub mod potential;
pub mod quadric;
