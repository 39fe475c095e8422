//! Simulator for a 9T SRAM bitcell and array supporting in-place XOR with a
//! column operand, whole-array data toggling and erase.
//!
//! Two levels are provided: a behavioral cell/array model ([`bitcell`],
//! [`sequencer`], [`array`]) and a compact transistor-level model
//! ([`analog`]) for noise margins and the XOR-step transients.

pub mod aging;
pub mod analog;
pub mod array;
pub mod bitcell;
pub mod bits;
pub mod error;
pub mod sequencer;
pub mod trace;
pub mod workloads;

pub use array::{ArrayState, ExecStats, HazardReport, RowMask};
pub use bitcell::{CellState, Logic, PhaseKind, PhaseLines};
pub use bits::BitMatrix;
