//! Numerical laboratory for products of positive random matrices.
//!
//! A step of the walk multiplies a positive `d × d` matrix drawn i.i.d. from a
//! finite ensemble, scaled by a heavy-tailed radial factor, onto the current
//! state. The library tracks the pair `(S_n, X_n)` — the log-norm of the
//! product along a starting direction, and the direction itself — and provides
//! everything needed to compare that pair against its stable limit law:
//!
//! * [`cone`] — operator norms induced by the `L¹` norm on the positive cone,
//!   the projective action on the simplex, the norm cocycle, and a bounded
//!   projective metric under which positive matrices contract.
//! * [`heavy_tail`] — a two-term Pareto family with exactly known first- and
//!   second-order tail behaviour, plus the norming sequences `a_n`, `b_n`.
//! * [`stable`] — stable characteristic functions, densities and distribution
//!   functions by Fourier inversion, the correction constants `d_a`, `z_a`,
//!   `c_a`, the first-order correction profiles `M(s)`, `N(s)`, and a numeric
//!   smoothing inequality for distribution-function gaps.
//! * [`ensemble`] — radially scaled matrix ensembles with uniformly comparable
//!   entries, walk simulation, and validity diagnostics.
//! * [`operator`] — Fourier-twisted transfer operators discretized on a
//!   simplex grid: stationary measure, dominant eigenvalue, spectral
//!   projector, remainder decay, and the large-jump direction operator.
//! * [`verify`] — end-to-end experiments: joint characteristic-function gaps,
//!   Kolmogorov–Smirnov convergence tables, local-limit scans, and exact
//!   convergence-rate profiles.
//!
//! Randomness is fully reproducible: every stream is derived from one master
//! seed via [`rng::split`].

pub mod cone;
pub mod heavy_tail;
pub mod quad;
pub mod rng;
pub mod stable;
pub mod stats;

pub use cone::{DirectionVector, PositiveMatrix};
pub use heavy_tail::SecondOrderTail;
pub use stable::{StableCdf, StableLawParams};
