//! Circuit IR: gate library, parameterized circuits, coupling topologies,
//! dynamic-circuit trees, metrics, and interchange formats.

pub mod dynamic;
pub mod gates;
pub mod json;
pub mod metrics;
pub mod param;
pub mod qasm;
pub mod topology;

pub use dynamic::{build, DynamicCircuit, SegmentNode, Structure};
pub use gates::{u3_matrix, GateKind};
pub use metrics::{depth_2q, metrics, metrics_unitary, CircuitMetrics, GateTimes};
pub use param::{apply_unitary, project_qubit, GatePlacement, ParamCircuit};
pub use topology::Topology;
