//! Certified checks of Watkins' conjecture (`rank E(Q) <= v2(m_E)`) for
//! quadratic twists of elliptic curves over Q with a rational 2-torsion point.
//!
//! The crate is organised bottom-up:
//!
//! * [`arith`]: factorization, ω, v₂ and fundamental discriminants;
//! * [`ecq`]: Weierstrass models, minimal models, Tate's algorithm,
//!   quadratic twists, rational 2-torsion and traces of Frobenius;
//! * [`watkins`]: the 2-adic bounds on modular degrees of twists, rank
//!   bounds, the ω(D) threshold and per-twist certificates;
//! * [`data`]: ingestion of modular degrees and Manin constants from the
//!   LMFDB, fixture files and a local cache.

pub mod arith;
pub mod data;
pub mod ecq;
pub mod watkins;
