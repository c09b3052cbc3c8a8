//! Numerical toolkit for resolvent-based similarity diagnostics of complex
//! matrices whose spectrum lies on a smooth Jordan curve.
//!
//! The pieces fit together in one pipeline:
//!
//! * [`linalg`] supplies dense complex kernels: eigendecomposition, singular
//!   values, resolvent norms, numerical radius, PSD square roots.
//! * [`curves`] represents trigonometric-polynomial Jordan curves with
//!   nearest-point projection, the radial diffeomorphism onto the unit
//!   circle, and one-sided families of curves shrinking to the boundary.
//! * [`pseudoanalytic`] extends boundary data into the plane by a first-order
//!   jet with a smooth cutoff and measures the dbar defect of the extension.
//! * [`dynkin`] evaluates f(T) by a Cauchy-Green quadrature (contour term
//!   minus area term), transplants T to an operator with unit-circle
//!   spectrum, and measures resolvent comparability constants.
//! * [`criteria`] turns pointwise and mean-square resolvent estimates,
//!   characteristic-function bounds, rho-contraction tests, and power
//!   boundedness into measured certificates.
//! * [`zoo`] constructs the concrete operators used throughout: normal
//!   matrices on a curve, conditioned similarities, Jordan blocks, and the
//!   two-bump bilateral weighted shift with its analytic apparatus.
//! * [`cli`] wires everything into subcommands with JSON/CSV reports.
//!
//! Every report is deterministic for a fixed seed; see `examples/` for one
//! runnable walk-through per capability.

pub mod cli;
pub mod criteria;
pub mod curves;
pub mod dynkin;
pub mod io;
pub mod linalg;
pub mod par;
pub mod pseudoanalytic;
pub mod zoo;
