pub mod adversary;
pub mod error;
pub mod harness;
pub mod offline;
pub mod online;
pub mod problem;
pub mod ratio;
