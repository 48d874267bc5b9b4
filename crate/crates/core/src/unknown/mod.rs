//! The strategy for an unknown number of arrivals on the line.

pub mod budget;
pub mod stage1;
pub mod stage2;
