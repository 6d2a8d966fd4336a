//! Minimal non-invertible fiber-preserving maps on the 2-torus and the
//! Klein bottle.
//!
//! The library builds, evaluates, and property-checks a chain of explicit
//! constructions:
//!
//! 1. [`circle`] — exact fixed-point arithmetic on `R/Z`: points, closed
//!    oriented arcs, lengths and overlaps, the shift-invariant metric.
//! 2. [`skewbase`] — an irrational rotation from a continued-fraction recipe,
//!    an odd trigonometric cocycle `r`, Birkhoff sums, the skew product
//!    `S(x,y) = (x + alpha, y + r(x))`, and the free involution
//!    `P(x,y) = (x + 1/2, 1 - y)` commuting with `S`.
//! 3. [`blowup`] — blow-up data over two star points: `P`-invariant
//!    piecewise-linear profiles, per-fiber measures mixing Lebesgue, interval
//!    and Dirac components, and the fiber CDF with a rigorous truncation
//!    bound.
//! 4. [`transport`] — the quantile map `tau_x` (generalized inverse of the
//!    fiber CDF), the fiber-monotone map `T(x,y) = (x, tau_x(y))`, and the
//!    blown-up map `S_hat = T^{-1} . S . T`, evaluated by its closed formula
//!    everywhere; plus orbit generation.
//! 5. [`klein`] — the quotient by `P` (a standard Klein-bottle model), the
//!    projection, a quotient metric, and the induced map `S_tilde`.
//! 6. [`verify`] — the property battery: symmetry and commutation identities,
//!    quantile round trips, the collapse of a fiber interval to a point
//!    (non-invertibility), an independent Riemann-sum oracle for the CDF,
//!    continuity probes, and orbit density statistics.

pub mod blowup;
pub mod circle;
pub mod klein;
pub mod skewbase;
pub mod transport;
pub mod verify;

pub use blowup::{CdfValue, FiberKernel, ProfileSpec, StarScanReport};
pub use circle::{Arc, ArcKind, CirclePoint, Lift};
pub use klein::KleinPoint;
pub use skewbase::{involution_p, CocycleSpec, Harmonic, TorusPoint};
pub use transport::{MapKind, TransportEngine};
pub use verify::{DensityReport, VerificationReport, VerifyOptions};
