//! Precision-tracked p-adic computation engine: truncated series over Z/p^N,
//! finite-dimensional Frobenius modules and their Newton slopes, Monsky-
//! Washnitzer style cohomology of explicit affine models, syntomic complexes
//! with fractional Nygaard levels, and truncated de Rham-Witt operators.

pub mod fp;
pub mod models;
pub mod oracle;
pub mod padic;
pub mod polygons;
pub mod syntomic;
pub mod witt;
pub mod semilinear;
pub mod series;

pub use padic::{OnExhaustion, PadicApprox, PadicError, PrecisionPolicy, ScaledPadic, Valuation};
pub use polygons::{ConvexPolygon, HodgeVector};
pub use semilinear::{FrobeniusMatrix, SlopeMultiset, TwistParams};
pub use series::{FormBasis, GrowthCertificate, Rat, TruncatedSeries};
