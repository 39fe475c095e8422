//! Compact square-law circuit model of the 6T and 9T cells.
//!
//! Node names follow the behavioral model: `Vx`/`Vy` storage nodes, dynamic
//! node `N`, and the `M7`/`M8` stack to `BLR`. See [`params::Transistor`] for
//! the device table.

pub mod dc;
pub mod device;
pub mod margins;
pub mod montecarlo;
pub mod netlist;
pub mod params;
pub mod transient;

pub use dc::{solve_vtc, SweptNode, Vtc};
pub use device::{mosfet_current, MosKind, MosModel};
pub use margins::{compute_snm, compute_wnm, SnmMode};
pub use montecarlo::{monte_carlo, McExperiment, McSummary};
pub use netlist::{Bias, CellNetlist, NodeVoltages, Topology};
pub use params::{DeviceParams, Transistor};
pub use transient::{
    simulate_step1_transient, simulate_step2_transient, TransientConfig, TransientResult,
};
