//! Spectral toolkit for quantum graphs: resonance pole location, embedded
//! eigenvalues protected by rationally related edge lengths, and the
//! trajectories poles trace when those lengths are perturbed.
//!
//! The crate models a metric graph with a Schroedinger operator acting as
//! -d^2/dx^2 on every edge and a unitary coupling condition
//! `(U - I) psi + i (U + I) psi' = 0` at each vertex. Everything downstream
//! (secular determinants, scattering matrices, multiplicity bounds, pole
//! tracking) is phrased in terms of that normal form.

pub mod embedded;
pub mod graph;
pub mod linalg;
pub mod numerics;
pub mod resonator;
pub mod spectral;

pub use num_complex::Complex64;
