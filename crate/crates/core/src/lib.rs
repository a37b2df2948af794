//! Gaussian-based pulse shapes for communications and the digital filters
//! that realize them.
//!
//! The crate evaluates the ISI-free interpolating kernel `Φ_int`, its
//! spectral-factorization root `φ_ortho` (whose `λ`-shifts are orthonormal),
//! and four recursive/FIR filter families whose coefficients and poles are
//! all explicit in the nome `q = e^{−(λβ)²/4}`. An [`oracles`] module checks
//! each closed form against an independent numerical route.
//!
//! ```
//! use gausspulse::{pulse, PulseParams};
//!
//! let p = PulseParams::new(1.0, 1.0)?;
//! assert_eq!(pulse::phi_int_time(0.0, &p)?, 1.0);
//! assert!(pulse::phi_int_time(3.0, &p)?.abs() < 1e-15);
//! # Ok::<(), gausspulse::Error>(())
//! ```

pub mod error;
pub mod export;
pub mod filter;
pub mod oracles;
pub mod params;
pub mod pulse;
pub mod quadrature;
pub mod sampling;
pub mod signal;
pub mod special;

pub use error::{Error, Result};
pub use params::PulseParams;
pub use signal::{Domain, Grid, SampledSignal};
pub use special::{Nome, Tau, TruncationPolicy};

#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../README.md")]
    mod readme {}
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/getting-started.md")]
    mod getting_started {}
    #[doc = include_str!("../../../book/src/special-functions.md")]
    mod special_functions {}
    #[doc = include_str!("../../../book/src/pulses.md")]
    mod pulses {}
    #[doc = include_str!("../../../book/src/filters.md")]
    mod filters {}
    #[doc = include_str!("../../../book/src/sampling.md")]
    mod sampling {}
    #[doc = include_str!("../../../book/src/verification.md")]
    mod verification {}
    #[doc = include_str!("../../../book/src/cli.md")]
    mod cli {}
}
