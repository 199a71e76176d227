//! Two-photon statistics of the dissipative finite-size Dicke model.
//!
//! The pipeline for one parameter point:
//!
//! 1. [`ecs::EcsEigensystem::solve`] diagonalizes the rotated Hamiltonian in
//!    a displaced-Fock basis.
//! 2. [`operators::TransitionTables`] holds the photon quadrature and qubit
//!    coupling elements between the lowest eigenstates.
//! 3. [`dissipation`] turns them into Ohmic transition rates and solves for
//!    the steady-state populations.
//! 4. [`correlators::g2_generalized`] evaluates `G²_N(0)`.
//!
//! [`pipeline::run_point`] does all four; [`experiments`] sweeps it.
//!
//! ```
//! use dicke_core::{BathParams, DickeParams, SolverSettings, run_point};
//!
//! let params = DickeParams::new(4, 1.0, 1.0, 0.3).unwrap();
//! let settings = SolverSettings { n_tr: 20, ..SolverSettings::default() };
//! let r = run_point(&params, &BathParams::default(), &settings).unwrap();
//! assert!(r.correlation.g2 > 0.0);
//! ```

pub mod cache;
pub mod config;
pub mod correlators;
pub mod dissipation;
pub mod ecs;
pub mod error;
pub mod experiments;
pub mod io;
pub mod linalg;
pub mod model;
pub mod operators;
pub mod oracle;
pub mod pipeline;
pub mod validate;

pub use cache::SpectrumCache;
pub use config::{parse_config, with_overrides, SimulationConfig};
pub use correlators::{g2_generalized, g2_standard, CorrelationResult};
pub use dissipation::{BathParams, SteadyState};
pub use ecs::EcsEigensystem;
pub use error::{Error, Result};
pub use experiments::{critical_coupling, LambdaCVariant};
pub use model::DickeParams;
pub use operators::{TransitionTables, XPlusMatrix};
pub use pipeline::{evaluate, run_point, LevelPolicy, SolverSettings};

#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/overview.md")]
    mod overview {}
    #[doc = include_str!("../../../book/src/model.md")]
    mod model {}
    #[doc = include_str!("../../../book/src/ecs.md")]
    mod ecs {}
    #[doc = include_str!("../../../book/src/dissipation.md")]
    mod dissipation {}
    #[doc = include_str!("../../../book/src/correlators.md")]
    mod correlators {}
    #[doc = include_str!("../../../book/src/experiments.md")]
    mod experiments {}
    #[doc = include_str!("../../../book/src/validation.md")]
    mod validation {}
    #[doc = include_str!("../../../book/src/cli.md")]
    mod cli {}
}
