//! Canonical JSON interchange for dynamic circuits.
//!
//! Shape:
//! `{"s":int,"a":int,"structure":str,"root":{"segment":{"nQubits":int,
//! "placements":[{"kind":str,"qubits":[int],"paramSlots":[int]}],
//! "params":[float]},"measured":[int],"children":[...]}}`
//!
//! Each segment's `params` array holds the values of the slots it
//! references, in order of first reference; shared slots appear in every
//! segment that uses them with identical values.

use serde::{Deserialize, Serialize};

use super::dynamic::{DynamicCircuit, SegmentNode, Structure};
use super::gates::GateKind;
use super::param::ParamCircuit;
use crate::error::{DcError, Result};
use crate::linalg::CMatrix;

#[derive(Serialize, Deserialize)]
struct PlacementWire {
    kind: String,
    qubits: Vec<usize>,
    #[serde(rename = "paramSlots")]
    param_slots: Vec<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    matrix: Option<CMatrix>,
}

#[derive(Serialize, Deserialize)]
struct SegmentWire {
    #[serde(rename = "nQubits")]
    n_qubits: usize,
    placements: Vec<PlacementWire>,
    params: Vec<f64>,
}

#[derive(Serialize, Deserialize)]
struct NodeWire {
    segment: SegmentWire,
    measured: Vec<usize>,
    children: Vec<NodeWire>,
}

#[derive(Serialize, Deserialize)]
struct CircuitWire {
    s: usize,
    a: usize,
    structure: Structure,
    root: NodeWire,
}

/// Slots referenced by a segment, in order of first reference.
fn referenced_slots(seg: &ParamCircuit) -> Vec<usize> {
    let mut slots = Vec::new();
    for p in &seg.placements {
        for &s in &p.param_slots {
            if !slots.contains(&s) {
                slots.push(s);
            }
        }
    }
    slots
}

fn segment_to_wire(seg: &ParamCircuit, params: &[f64]) -> SegmentWire {
    SegmentWire {
        n_qubits: seg.n_qubits,
        placements: seg
            .placements
            .iter()
            .map(|p| PlacementWire {
                kind: p.kind.name().to_string(),
                qubits: p.qubits.clone(),
                param_slots: p.param_slots.clone(),
                matrix: match &p.kind {
                    GateKind::Custom(m) => Some(m.clone()),
                    _ => None,
                },
            })
            .collect(),
        params: referenced_slots(seg).iter().map(|&s| params[s]).collect(),
    }
}

fn node_to_wire(node: &SegmentNode, params: &[f64]) -> NodeWire {
    NodeWire {
        segment: segment_to_wire(&node.segment, params),
        measured: node.measured.clone(),
        children: node.children.iter().map(|ch| node_to_wire(ch, params)).collect(),
    }
}

fn segment_from_wire(w: SegmentWire, params: &mut Vec<f64>) -> Result<ParamCircuit> {
    let mut seg = ParamCircuit::new(w.n_qubits);
    for p in w.placements {
        let kind = GateKind::from_name(&p.kind, p.matrix)?;
        if p.param_slots.len() != kind.param_count() {
            return Err(DcError::Parse(format!(
                "{} expects {} slots, found {}",
                p.kind,
                kind.param_count(),
                p.param_slots.len()
            )));
        }
        seg.push_with_slots(kind, p.qubits, p.param_slots);
    }
    let slots = referenced_slots(&seg);
    if slots.len() != w.params.len() {
        return Err(DcError::Parse(format!(
            "segment references {} slots but carries {} params",
            slots.len(),
            w.params.len()
        )));
    }
    for (&slot, &val) in slots.iter().zip(&w.params) {
        if params.len() <= slot {
            params.resize(slot + 1, f64::NAN);
        }
        if params[slot].is_nan() {
            params[slot] = val;
        } else if params[slot] != val {
            return Err(DcError::Parse(format!(
                "shared slot {slot} carries conflicting values"
            )));
        }
    }
    Ok(seg)
}

fn node_from_wire(w: NodeWire, params: &mut Vec<f64>) -> Result<SegmentNode> {
    let segment = segment_from_wire(w.segment, params)?;
    let children = w
        .children
        .into_iter()
        .map(|ch| node_from_wire(ch, params))
        .collect::<Result<Vec<_>>>()?;
    Ok(SegmentNode { segment, measured: w.measured, children })
}

/// Serializes a circuit with its parameter values.
pub fn to_json(dc: &DynamicCircuit, params: &[f64]) -> serde_json::Value {
    let wire = CircuitWire {
        s: dc.s_qubits(),
        a: dc.a_qubits(),
        structure: dc.structure,
        root: node_to_wire(&dc.root, params),
    };
    serde_json::to_value(wire).expect("circuit serialization cannot fail")
}

/// Parses a circuit and its parameter values, re-validating all invariants.
pub fn from_json(v: &serde_json::Value) -> Result<(DynamicCircuit, Vec<f64>)> {
    let wire: CircuitWire =
        serde_json::from_value(v.clone()).map_err(|e| DcError::Parse(e.to_string()))?;
    let mut params = Vec::new();
    let root = node_from_wire(wire.root, &mut params)?;
    let n_qubits = root.segment.n_qubits;
    let dc = DynamicCircuit::new(wire.structure, n_qubits, root)?;
    if dc.s_qubits() != wire.s || dc.a_qubits() != wire.a {
        return Err(DcError::Parse(format!(
            "declared (s={}, a={}) but tree implies (s={}, a={})",
            wire.s,
            wire.a,
            dc.s_qubits(),
            dc.a_qubits()
        )));
    }
    for p in &mut params {
        if p.is_nan() {
            *p = 0.0; // unreferenced slot
        }
    }
    Ok((dc, params))
}
