//! Hermite-representation numerics for generalized Gelfand-Shilov and
//! Pilipović spaces.
//!
//! The crate is organised around the coefficient picture: a function or an
//! ultradistribution is identified with its sequence of Fourier-Hermite
//! coefficients, and every space-membership question becomes a growth or
//! decay question about that sequence measured against the associated
//! function `M(ρ)` of a weight sequence `{M_p}`.
//!
//! * [`weights`]: weight sequences, condition certificates, `M(ρ)`.
//! * [`hermite`]: Hermite functions, derivatives, Gauss-Hermite rules.
//! * [`coeff`]: analysis/synthesis, `‖·‖_θ`, Fourier and ladder actions.
//! * [`classify`]: falloff/growth certificates and Gevrey index estimation.
//! * [`opcalc`]: the `(L⁻L⁺)ᴺ` expansion and its coefficient bounds.
//! * [`kernel`]: coefficient-matrix kernels of bilinear forms.
//! * [`io`]: CSV/JSON file formats shared with the command line tool.

pub mod classify;
pub mod coeff;
mod error;
pub mod hermite;
pub mod io;
pub mod kernel;
pub mod opcalc;
pub mod weights;

pub use error::{Error, Result};
pub use num_complex::Complex64;
