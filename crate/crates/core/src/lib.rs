//! Collapse and revival dynamics of an anharmonic oscillator with Markovian
//! damping, simulated in a truncated Fock basis.
//!
//! The numerical core is generic over [`Real`] (`f32` or `f64`). The aliases
//! below fix it to `f64`, which is what the analysis layer and the CLI use.
//!
//! ```
//! use revivals::{build_hamiltonian, build_liouvillian, coherent_state, density_from_pure,
//!                rk4_evolve, DampingSpec, EvolveOptions, FockSpace, DEFAULT_OMEGA0};
//! use num_complex::Complex64;
//!
//! let space = FockSpace::new(30)?;
//! let h = build_hamiltonian(space, DEFAULT_OMEGA0, 0.005, 2)?;
//! let l = build_liouvillian(&h, DampingSpec::decay(1e-3)?);
//! let rho0 = density_from_pure(&coherent_state(space, Complex64::new(-1.9, 0.0))?);
//! let traj = rk4_evolve(&l, &rho0, 10.0, EvolveOptions::default(), &mut [])?;
//! assert!((traj.records[0].a.re + 1.9).abs() < 1e-10);
//! # Ok::<(), revivals::Error>(())
//! ```

// `!(x > 0)` deliberately rejects NaN
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod analysis;
pub mod bath;
pub mod error;
pub mod fock;
pub mod hamiltonian;
pub mod linalg;
pub mod lindblad;
pub mod observables;
pub mod reference;
pub mod scalar;

pub use analysis::{
    detect_revivals, detect_super_revival, detect_with_scales, envelope_from_series, extract_envelope,
    first_revival_amplitude_vs_n, locate_first_revival, scan_nonlinearity, Classification, DetectionOptions, Envelope,
    FirstRevival, FirstRevivalOptions, RevivalReport, ScanParams, ScanPoint, ScanResult, SuperRevival, Thresholds,
};
pub use error::{Error, Result};
pub use fock::{
    annihilation_op, coherent_state, creation_op, density_from_pure, displaced_number_state, displacement_op,
    fock_state, number_op, FockSpace, OperatorKind, STATE_TOLERANCE, TRUNCATION_TOLERANCE,
};
pub use hamiltonian::{
    build_hamiltonian, default_n0, timescales_closed_form, timescales_finite_difference, DEFAULT_OMEGA0,
};
pub use lindblad::{build_liouvillian, expm_propagate, phase_evolve, rk4_evolve, EvolveOptions, Observer};
pub use observables::{expect_operator, purity};
pub use scalar::Real;

pub type Complex = num_complex::Complex64;
pub type Matrix = linalg::CMatrix<f64>;
pub type Operator = fock::Operator<f64>;
pub type PureState = fock::PureState<f64>;
pub type DensityMatrix = fock::DensityMatrix<f64>;
pub type DiagonalHamiltonian = hamiltonian::DiagonalHamiltonian<f64>;
pub type Timescales = hamiltonian::Timescales<f64>;
pub type DampingSpec = lindblad::DampingSpec<f64>;
pub type Liouvillian = lindblad::Liouvillian<f64>;
pub type Trajectory = lindblad::Trajectory<f64>;
pub type Snapshot = lindblad::Snapshot<f64>;
pub type ObservableRecord = observables::ObservableRecord<f64>;
pub type BathSpec = bath::BathSpec<f64>;
