//! Gaussian optical states, single-photon subtraction and addition, and the
//! resulting change in Rényi-2 entanglement.
//!
//! The crate is organised bottom-up:
//!
//! * [`symplectic`]: phase-space linear algebra and circuit elements,
//! * [`gaussian`]: Gaussian states, marginals, purity, Williamson decomposition,
//! * [`moments`]: Gaussian moments by Wick pairing,
//! * [`photon`]: photon-subtracted Wigner functions and relative purities,
//! * [`networks`]: the squeezer chain and CZ graph-state constructors,
//! * [`fock`]: a truncated Fock-space simulator used as an independent oracle,
//! * [`cli`]: the experiment runner behind the `cvdistill` binary.

pub mod cli;
pub mod error;
pub mod fock;
pub mod gaussian;
pub mod moments;
pub mod networks;
pub mod photon;
pub mod symplectic;

pub use error::{Error, Result};
pub use gaussian::{
    bogoliubov_row, bogoliubov_row_from_symplectic, renyi2_entanglement_pure, BogoliubovRow,
    GaussianState, StateSnapshot, Subsystem, WilliamsonDecomposition,
};
pub use photon::{
    entanglement_increase, relative_purity_closed_form, subtract_reduced_wigner, thermal_traces,
    EntanglementChange, PhotonOp, SubtractedReducedState, ThermalTraceSet,
};
pub use symplectic::{compose, element_to_symplectic, random_symplectic, CircuitElement, SymplecticMatrix};
