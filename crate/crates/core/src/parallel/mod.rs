//! Simulated ranks, halo exchange and gather/scatter.

mod comm;
mod gather;
mod halo;

pub use comm::{Comm, SimComm, COLLECTIVE_TAG_BASE};
pub use gather::GatherScatterPlan;
pub use halo::{halo_exchange, HaloExchangePlan};
