//! nonlocal-amp: a numerical laboratory for nonlinear Schrödinger-type
//! evolution, measure-then-evolve signaling functionals, and the Gaussian
//! localization asymptotics behind the Doebner–Goldin amplification law.
//!
//! The pieces fit together like this:
//!
//! * [`field`] — wave functions on periodic grids with spectral calculus;
//! * [`generator`] — the evolution generator `F` (kinetic + DG/BBM/Kostin);
//! * [`evolve`] — norm-preserving time integration of `iħ ∂_t ψ = Fψ`;
//! * [`measure`] — projective measurements, mixtures, and the first-order
//!   signaling rates `E₁` and `Δ₁`;
//! * [`asymptotics`] — the Gaussian delta family `δ^(r)` and quadrature
//!   verification of its moment and expansion identities;
//! * [`experiments`] — the amplification law sweep (idealized and concrete)
//!   with its negative controls;
//! * [`scales`] — Planck-scale order-of-magnitude arithmetic;
//! * [`config`] / [`runner`] — reproducible batch driver behind the CLI.
//!
//! The `book/` directory of the repository walks through the same material
//! chapter by chapter; its code snippets compile and run as doctests of this
//! crate, so the guide cannot drift from the library.

pub mod asymptotics;
pub mod config;
pub mod error;
pub mod evolve;
pub mod experiments;
pub mod field;
mod fft;
pub mod fit;
pub mod generator;
pub mod measure;
pub mod output;
pub mod quad;
pub mod runner;
pub mod scales;

pub use error::{Error, Result};
pub use evolve::{evolve, evolve_two_particle, IntegratorConfig, Scheme};
pub use field::{ComplexField, Envelope, GridSpec, TwoParticleField};
pub use generator::{apply_generator, apply_n, norm_hermiticity_defect, GeneratorSpec, Nonlinearity};
pub use measure::{Basis, Mixture, Observable};

/// Book chapters double as doctests; see `book/src/`.
#[cfg(doctest)]
mod book {
    macro_rules! chapter {
        ($name:ident, $path:literal) => {
            #[doc = include_str!(concat!("../../../book/src/", $path))]
            mod $name {}
        };
    }

    chapter!(introduction, "introduction.md");
    chapter!(fields, "fields.md");
    chapter!(generators, "generators.md");
    chapter!(evolution, "evolution.md");
    chapter!(measurement, "measurement.md");
    chapter!(asymptotics, "asymptotics.md");
    chapter!(amplification, "amplification.md");
    chapter!(scales, "scales.md");
    chapter!(cli, "cli.md");
}
