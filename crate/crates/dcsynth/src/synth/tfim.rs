//! Lattice Trotter-step generation (placeholder).

use super::SynthesisReport;
use crate::error::{DcError, Result};

#[derive(Debug, Clone)]
pub struct Lattice {
    pub vertices: usize,
    pub edges: Vec<(usize, usize)>,
    pub coupling: f64,
    pub field: f64,
    pub dt: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TfimMethod {
    DcRzz,
    Bqskit0Rzz,
}

pub fn tfim_trotter(_lattice: &Lattice, _method: TfimMethod) -> Result<SynthesisReport> {
    Err(DcError::TemplateMismatch("not yet implemented".into()))
}
