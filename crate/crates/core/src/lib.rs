//! Analysis toolkit for infinite products of positive reals.
//!
//! The multiplicative absolute value `|x| = max(x, 1/x)` plays the role for
//! products that the ordinary absolute value plays for series. On top of it
//! this crate builds:
//!
//! - [`modulus`]: the modulus itself and its positive/negative parts
//! - [`seq`]: lazily evaluable positive sequences (parsed expressions,
//!   explicit lists, transform views)
//! - [`accum`]: compensated log-domain partial products, convergence
//!   estimation, m-absolute convergence, weighted geometric means, and the
//!   double-double series oracle
//! - [`rearrange`]: constructive rearrangements with prescribed
//!   liminf/limsup, rearrangement invariance, uniform tail bounds
//! - [`unordered`]: products over abstract index sets as nets over finite
//!   subsets
//! - [`convtests`]: root-type, condensation, alternating, Cesaro-mean, and
//!   bounded-partial-sum tests
//! - [`matprod`]: the exponentiation action of real matrices on positive
//!   vectors and regular product-summability transforms
//! - [`powerprod`]: power products and Cauchy-product geometric means

pub mod accum;
pub mod convtests;
pub mod error;
pub mod matprod;
pub mod modulus;
pub mod numerics;
pub mod powerprod;
pub mod rearrange;
pub mod seq;
pub mod unordered;
pub mod verdict;

pub use accum::AnalysisParams;
pub use error::{Error, Result};
pub use modulus::{mmod, mparts, PositiveReal};
pub use numerics::Precision;
pub use seq::{parse_seq, PosSeq, RealSeq, SeqExpr};
pub use verdict::{Verdict, VerdictKind};
