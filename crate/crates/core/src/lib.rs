//! Two-body bound states solved directly in momentum space with a
//! Gauss-Laguerre Lagrange mesh.
//!
//! The radial wavefunction `p P(p)` is expanded on regularized Laguerre
//! Lagrange functions scaled by `h`. With the associated Gauss quadrature
//! the kinetic energy is diagonal and the potential enters only through its
//! partial-wave kernel `V_l(p, p')` at mesh points, so nonrelativistic and
//! spinless-Salpeter kinematics are handled the same way.
//!
//! ```
//! use lagmesh::{Kinetics, Potential, Problem, solve};
//!
//! // q² - 15 exp(-x²), s wave
//! let problem = Problem::new(Kinetics::dimensionless(), Potential::gaussian(15.0, 1.0)?, 0, 20, 0.5)?;
//! let states = solve(&problem)?;
//! assert!((states[0].energy + 5.3775999).abs() < 1e-6);
//! # Ok::<(), lagmesh::Error>(())
//! ```

// `!(x > 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod config_oracle;
pub mod error;
pub mod kinetics;
pub mod mesh;
pub mod observables;
pub mod potentials;
pub mod solver;
pub mod specfun;
pub mod tables;

pub use config_oracle::{config_observables, solve_config, ConfigProblem, ConfigState};
pub use error::{Error, Result};
pub use kinetics::Kinetics;
pub use mesh::{build_mesh, LaguerreMesh};
pub use observables::{
    build_position_calculus, expval_momentum, expval_radial, hamiltonian_consistency,
    wavefunction_momentum, wavefunction_position, RadialOperatorCalculus,
};
pub use potentials::{PartialWaveKernel, Potential};
pub use solver::{assemble_hamiltonian, scale_energy, solve, solve_spectrum, BoundState, Problem};
