//! Completeness and frame diagnostics for Gabor systems `G(g, α, β)` over
//! rational lattices `αβ = p/q`.
//!
//! The crate is organised bottom-up:
//!
//! * [`window`] and [`lattice`]: window functions with decay envelopes and
//!   lattice arithmetic.
//! * [`zak`]: truncated Zak transforms with certified tail bounds.
//! * [`zibulski`]: the `p × q` Zibulski–Zeevi matrices, grid scans, frame
//!   bound estimates, verdicts and Zak-domain reconstruction.
//! * [`theta`]: the coefficient functions `Θ(x, N)` of the column-minor
//!   Fourier series and completeness witnesses built on them.
//! * [`oracle`]: an independent least-squares completeness check on finite
//!   sections of the Gabor system.

pub mod error;
pub mod lattice;
pub mod oracle;
mod poly;
pub mod signal;
pub mod theta;
pub mod window;
pub mod zak;
pub mod zibulski;

pub use error::{Error, Result};
pub use lattice::RationalLattice;
pub use signal::SampledSignal;
pub use window::{DecayEnvelope, ExpTerm, ShiftTerm, Window, WindowSpec};
pub use zak::{vector_zak, zak, ZakSeries, ZakValue, DEFAULT_EPS};
pub use theta::{completeness_certificate, Certificate, CertificateSearch, ColumnSet, ThetaWitness};
pub use zibulski::{assemble, frame_bounds, grid_scan, reconstruct, verdict, Decision, Verdict, ZZField};
