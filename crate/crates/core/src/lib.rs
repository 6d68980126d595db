//! Finite-level models of the K1 machinery of Iwasawa algebras for groups
//! G = H ⋊ Γ (H a finite abelian p-group, Γ ≅ ℤ_p), together with exact
//! verification of Deligne-Ribet style congruences between abelian p-adic
//! zeta approximations.
//!
//! Everything is computed at a finite level: coefficients live in ℤ/p^N and
//! the group is cut down to G/Γ^(j) where Γ^(j) = Γ^{p^j}. All arithmetic is
//! exact; precision is tracked explicitly on every element so that maps which
//! divide by p (τ, the integral logarithm L) consume precision visibly
//! instead of silently.

pub mod exactnum;
pub mod groupmodel;
pub mod groupring;
pub mod k1maps;
pub mod linalg;
pub mod logk1;
pub mod phipsi;
pub mod zeta;

pub use exactnum::{CycloRational, Residue, Valuation};
pub use groupmodel::{GroupElement, GroupModel, GroupSpec};
pub use groupring::{RingElement, TraceElement};
