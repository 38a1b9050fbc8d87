//! Undirected coupling graphs constraining 2-qubit gate placement.

use serde::{Deserialize, Serialize};

use crate::error::{DcError, Result};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Topology {
    pub n_qubits: usize,
    /// Undirected edges, stored with the smaller index first.
    pub edges: Vec<(usize, usize)>,
}

impl Topology {
    pub fn new(n_qubits: usize, edges: Vec<(usize, usize)>) -> Result<Self> {
        let mut normed = Vec::with_capacity(edges.len());
        for (a, b) in edges {
            if a == b || a >= n_qubits || b >= n_qubits {
                return Err(DcError::InvalidTarget(format!(
                    "bad edge ({a},{b}) for {n_qubits} qubits"
                )));
            }
            let e = (a.min(b), a.max(b));
            if !normed.contains(&e) {
                normed.push(e);
            }
        }
        Ok(Topology { n_qubits, edges: normed })
    }

    /// Chain topology with edges (k, k+1).
    pub fn linear(n: usize) -> Self {
        Topology { n_qubits: n, edges: (0..n.saturating_sub(1)).map(|k| (k, k + 1)).collect() }
    }

    /// Fully connected topology.
    pub fn all_to_all(n: usize) -> Self {
        let mut edges = Vec::new();
        for a in 0..n {
            for b in a + 1..n {
                edges.push((a, b));
            }
        }
        Topology { n_qubits: n, edges }
    }

    pub fn has_edge(&self, a: usize, b: usize) -> bool {
        self.edges.contains(&(a.min(b), a.max(b)))
    }

    /// Parses `linear:n` | `all:n` | `edges:0-1,1-2,...`.
    pub fn parse(spec: &str) -> Result<Self> {
        let (kind, rest) = spec
            .split_once(':')
            .ok_or_else(|| DcError::Parse(format!("topology spec '{spec}' missing ':'")))?;
        match kind {
            "linear" => {
                let n: usize =
                    rest.parse().map_err(|_| DcError::Parse(format!("bad qubit count '{rest}'")))?;
                Ok(Topology::linear(n))
            }
            "all" => {
                let n: usize =
                    rest.parse().map_err(|_| DcError::Parse(format!("bad qubit count '{rest}'")))?;
                Ok(Topology::all_to_all(n))
            }
            "edges" => {
                let mut edges = Vec::new();
                let mut n = 0usize;
                for part in rest.split(',') {
                    let (a, b) = part
                        .split_once('-')
                        .ok_or_else(|| DcError::Parse(format!("bad edge '{part}'")))?;
                    let a: usize =
                        a.parse().map_err(|_| DcError::Parse(format!("bad edge '{part}'")))?;
                    let b: usize =
                        b.parse().map_err(|_| DcError::Parse(format!("bad edge '{part}'")))?;
                    n = n.max(a + 1).max(b + 1);
                    edges.push((a, b));
                }
                Topology::new(n, edges)
            }
            _ => Err(DcError::Parse(format!("unknown topology kind '{kind}'"))),
        }
    }
}
