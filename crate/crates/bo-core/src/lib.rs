//! Numerical laboratory for the Benjamin–Ono equation
//!
//!   ∂_t u − ∂_x|D|u + ∂_x(u²) = 0,   u real-valued on ℝ,
//!
//! built around the spectral theory of its Lax operator L_u = D − T_u on the
//! Hardy space L²₊ and the explicit resolvent representation of the flow,
//!
//!   Πu(t,z) = (1/2iπ) I₊((X* − 2t L_{u₀} − z)⁻¹ Πu₀),   Im z > 0.
//!
//! The line is truncated to a periodic torus [−L, L) and all operators are
//! realized on the discrete Hardy space of nonnegative-frequency Fourier
//! coefficients. The crate provides
//!
//! * [`grid`] — the spatial/frequency grid, real and Hardy-space fields, and
//!   the Fourier multiplier calculus (Szegő projector, Hilbert transform,
//!   |D|, free dispersive evolution);
//! * [`hardy`] — Toeplitz operators, the Lax operator, the operator X* and
//!   the boundary functional I₊;
//! * [`spectrum`] — discrete spectrum of the Lax operator and soliton
//!   parameters p_j = −⟨X*φ_j, φ_j⟩ with their consistency residuals;
//! * [`scattering`] — generalized eigenfunctions m_±(x,λ), the distorted
//!   Fourier transform, radiation profiles and the distorted Plancherel
//!   identity;
//! * [`evolution`] — the explicit formula as a frequency-side collocation
//!   solve, boundary traces, and the long-time soliton/radiation probes;
//! * [`stepper`] — an independent integrating-factor RK4 pseudospectral
//!   solver used as a cross-validation oracle;
//! * [`resolution`] — assembly of the soliton-plus-radiation decomposition
//!   and remainder reports;
//! * [`scenario`] — reproducible end-to-end experiment runner.

pub mod error;
pub mod evolution;
pub mod grid;
pub mod hardy;
pub mod io;
pub(crate) mod linalg;
pub mod resolution;
pub mod scattering;
pub mod scenario;
pub mod spectrum;
pub mod stepper;

pub use error::{Error, Result};
pub use grid::{ComplexField, HardyField, RealField, SpatialGrid};

/// Complex scalar used throughout.
pub type C64 = num_complex::Complex64;
