//! Exact arithmetic for absolute q-calculus over `W[[q-1]]` with `W = Z_p`.
//!
//! The crate is layered:
//!
//! - [`poly`]: exact polynomials in `q`, generic over the coefficient ring
//!   ([`IntQPoly`], [`RatQPoly`]);
//! - [`qcomb`]: twisted integers, Gaussian binomials, twisted Stirling numbers;
//! - [`padic`]: the truncated working ring `(Z/p^M)[t]/(t^N)`, `t = q - 1`;
//! - [`omega`]: the divided-power algebra `R<omega>` with its quantum
//!   multiplication rule, Taylor map, flip and related operators, generic over
//!   the coefficient layer (exact integer, exact rational, truncated,
//!   cyclotomic);
//! - [`coalg`]: the two-sided algebra, comultiplication and the little
//!   Poincare solver;
//! - [`conn`]: finite free modules with a Delta-connection presented by
//!   matrices, weak nilpotency, frobenius structures, the hyperstratification
//!   solver and rank-1 cohomology;
//! - [`cyclo`]: exact cyclotomic arithmetic in `Z[zeta]` and the Sen-operator
//!   specialization;
//! - [`report`]/[`suites`]: the machine-checkable identity suites behind the
//!   CLI.

pub mod bipoly;
pub mod coalg;
pub mod conn;
pub mod cyclo;
pub mod error;
pub mod omega;
pub mod padic;
pub mod poly;
pub mod qcomb;
pub mod report;
pub mod snf;
pub mod suites;

pub use error::{Error, Result};
pub use poly::{IntQPoly, QPoly, RatQPoly};

pub use omega::OmegaElt;
/// Divided-power elements over exact big-integer polynomials.
pub type OmegaInt = OmegaElt<IntQPoly>;
/// Divided-power elements over exact big-rational polynomials.
pub type OmegaRat = OmegaElt<RatQPoly>;
/// Divided-power elements over the truncated p-adic working ring.
pub type OmegaTrunc = OmegaElt<padic::TruncSeries>;
/// Divided-power elements over the exact cyclotomic field `Q(zeta)`.
pub type OmegaCyclo = OmegaElt<cyclo::CycloRat>;

pub use coalg::TensorElt;
pub use conn::{FrobStructure, NablaModule};
pub use cyclo::{CycloRat, OKElt, OKExact, SenModule};
pub use padic::{Precision, TruncSeries};
