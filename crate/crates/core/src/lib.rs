//! Simulation and analysis toolkit for the contact process with mutations.
//!
//! Pathogens on a graph give birth onto vacant neighbors at rate `lambda`;
//! each newborn is a fresh type with probability `r`, otherwise it inherits
//! its parent's type. Every type dies as a block at rate 1.
//!
//! * [`graph`]: vertex addressing, lazy neighbor generation, tree levels and
//!   occupied-set statistics.
//! * [`dynamics`]: exact continuous-time engines for the mutation process,
//!   the individual-death comparison process, the single-birth restricted
//!   process and the non-spatial model, plus the shared-randomness coupling.
//! * [`analysis`]: closed-form thresholds, offspring means and drift
//!   feasibility.
//! * [`montecarlo`]: replication harness and estimators.
//! * [`exact`]: lumped-state enumeration and uniformization on small graphs.

pub mod analysis;
pub mod dynamics;
pub mod exact;
pub mod graph;
pub mod montecarlo;
