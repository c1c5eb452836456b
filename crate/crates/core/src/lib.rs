//! Exact and multiprecision tools for power moments of the coefficient sums
//! `A(x) = Σ_{n≤x} a(n)` of level-one cusp forms.
//!
//! * [`series`]: exact q-expansion arithmetic (Eisenstein series, Δ).
//! * [`cuspform`]: the one-dimensional cusp forms, coefficient tables and validators.
//! * [`voronoi`]: the truncated Voronoi sum for `A(x)` and the four-term
//!   decomposition of its fourth power.
//! * [`resonance`]: exact solutions of `√n₁ + … = … + √n_k` and the singular
//!   series `s_{k;ℓ}` behind the moment constants.
//! * [`counting`]: near-solution counts for four-term square-root inequalities.
//! * [`moments`]: exact moments `∫₁ᵀ A(x)^k dx` against their main terms.

pub mod arith;
pub mod counting;
pub mod cuspform;
pub mod error;
pub mod fit;
pub mod moments;
pub mod radical;
pub mod real;
pub mod resonance;
pub mod series;
pub mod voronoi;

pub use error::{Error, Result};
pub use real::BigReal;
