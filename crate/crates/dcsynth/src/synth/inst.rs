//! DC-Inst: prescribed template growth (placeholder).

use super::SynthesisReport;
use crate::error::{DcError, Result};

#[derive(Debug, Clone)]
pub enum InstFamily {
    Ghz,
}

pub fn dc_inst(_family: InstFamily, _n: usize, _a: usize) -> Result<SynthesisReport> {
    Err(DcError::TemplateMismatch("not yet implemented".into()))
}
