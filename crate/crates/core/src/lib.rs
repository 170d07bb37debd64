//! Entanglement between two weakly coupled outer spins mediated by a
//! disordered XY spin-1/2 chain.
//!
//! The crate works entirely in the single-excitation sector, where the chain
//! Hamiltonian is a real symmetric tridiagonal matrix. Channel disorder is a
//! long-range-correlated series with power-law spectrum `S(k) ~ k^-alpha`,
//! applied either to the local fields or to the exchange couplings.
//!
//! The main pieces:
//!
//! * [`disorder`]: correlated random series with fixed spectral exponent.
//! * [`lattice`]: channel and full sender/channel/receiver matrices.
//! * [`eigensolve`]: implicit-shift QL eigensolver for tridiagonal matrices.
//! * [`effective`]: second-order effective two-level and resonant
//!   three-level couplings between sender and receiver.
//! * [`entanglement`]: single-excitation concurrence.
//! * [`dynamics`]: exact spectral time evolution of the full system.
//! * [`ensemble`]: seeded, thread-count independent disorder averages.
//! * [`analysis`]: wavefunction profiles and participation ratios.

pub mod analysis;
pub mod disorder;
pub mod dynamics;
pub mod effective;
pub mod eigensolve;
pub mod ensemble;
pub mod entanglement;
mod error;
pub mod lattice;
pub mod validation;

pub use analysis::{participation_ratio, wavefunction_profile, WavefunctionProfile};
pub use disorder::{generate_sequence, DisorderKind, DisorderParams, DisorderSequence};
pub use dynamics::{evolve, max_transfer, DynamicsTrace, TransferPeak};
pub use effective::{three_level, two_level, ThreeLevelEffective, TwoLevelEffective};
pub use eigensolve::{diagonalize, particle_hole_check, select_mode, Spectrum, SymTridiagonal};
pub use ensemble::{EnsembleStats, GridPoint, NonPositivePolicy, PointStats, Regime, SweepConfig};
pub use entanglement::{
    concurrence_pair, concurrence_three_level, concurrence_two_level, PureState,
    TwoLevelConcurrence,
};
pub use error::{Error, Result};
pub use lattice::{ChannelSpec, SystemSpec};
