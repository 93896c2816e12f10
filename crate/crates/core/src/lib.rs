//! Numerical construction and verification of holomorphic isometries of the
//! Poincaré disk.
//!
//! Every unitary matrix `U ∈ U(n+1)` determines a holomorphic isometry
//! `f = (f₁, f₂,₁, …, f₂,ₙ)` from the unit disk into Δ×𝔹ⁿ through the system
//!
//! ```text
//! U (f₁(w), f₂,₁(w), …, f₂,ₙ(w))ᵀ = (w, f₁(w)f₂,₁(w), …, f₁(w)f₂,ₙ(w))ᵀ.
//! ```
//!
//! The first component is pinned down by a rational function `R` with
//! `R(f₁(w)) = w`; the remaining components are rational in `f₁`. This crate
//! builds the rational data from the matrix, evaluates the isometry anywhere
//! on the disk by analytic continuation, and checks the identities the
//! construction promises: the functional equation, the Blaschke product shape
//! of `R`, ramification closed forms for the one-parameter family, congruence
//! invariants, boundary extension, and the generic-norm identities of the
//! classical-domain embeddings.
//!
//! Module map:
//!
//! - [`poly`], [`rational`]: complex polynomials, rational maps on the
//!   Riemann sphere, Blaschke-product structure.
//! - [`schur`]: dense complex Hessenberg/QR eigensolver and Schur form.
//! - [`unitary`]: structured unitary frames and their normalization.
//! - [`germ`]: solving the germ at 0 and evaluating it on the whole disk.
//! - [`branch`]: ramification data, congruence invariants, degree reduction,
//!   parameter peeling.
//! - [`family`]: the explicit one-parameter family with its closed forms and
//!   boundary-extension report.
//! - [`domains`]: classical bounded symmetric domains and the block
//!   embeddings into them.
//! - [`rigidity`]: audit of rational candidate isometries into products of
//!   balls.

#![forbid(unsafe_code)]

pub mod branch;
pub mod domains;
pub mod family;
pub mod germ;
pub mod poly;
pub mod rational;
pub mod rigidity;
pub mod sampling;
pub mod schur;
pub mod series;
pub mod unitary;

mod jsonio;

pub use branch::{
    incongruence_certificate, reduction_classify, BranchData, CongruenceInvariant,
    IncongruenceVerdict, ReductionVerdict,
};
pub use domains::{DomainKind, DomainPoint, DomainSpec};
pub use family::{FamilyError, RamificationProfile, Regime};
pub use germ::{DiskIsometry, ResidueReport, TargetPoint};
pub use poly::Poly;
pub use rational::{BlaschkeForm, RationalMap, SpherePoint};
pub use rigidity::{RigidityReport, WeightedCandidate};
pub use unitary::UnitaryFrame;

/// Complex scalar used throughout the crate.
pub type C64 = num_complex::Complex<f64>;

/// Shorthand constructor for a complex number.
#[inline]
pub fn c64(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}
