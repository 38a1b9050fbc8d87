//! Partition-based optimization (placeholder).

use super::SynthesisReport;
use crate::circuit::ParamCircuit;
use crate::error::{DcError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PartitionMode {
    Dc,
    Unitary,
    Mixed,
}

pub fn partition_optimize(
    _circuit: &ParamCircuit,
    _block_size: usize,
    _mode: PartitionMode,
) -> Result<SynthesisReport> {
    Err(DcError::TemplateMismatch("not yet implemented".into()))
}
