//! Lowering of logical circuits to the trapped-ion native gate set.
//!
//! Rotations follow `R_P(θ) = exp(-iθP/2)` and `MS(θ) = exp(-iθ X⊗X / 2)`.

use std::f64::consts::{FRAC_PI_2, PI};

use serde::{Deserialize, Serialize};

use crate::codes::{LogicalCircuit, LogicalGate, QubitId};
use crate::error::Result;

/// Rotations with |angle| below this are treated as identity.
pub const ANGLE_EPS: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Axis {
    X,
    Y,
    Z,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum NativeGate {
    Ms { a: QubitId, b: QubitId, angle: f64 },
    Rotation { q: QubitId, axis: Axis, angle: f64 },
    Measure { q: QubitId },
    Reset { q: QubitId },
}

impl NativeGate {
    pub fn qubits(&self) -> Vec<QubitId> {
        match *self {
            NativeGate::Ms { a, b, .. } => vec![a, b],
            NativeGate::Rotation { q, .. } | NativeGate::Measure { q } | NativeGate::Reset { q } => vec![q],
        }
    }

    pub fn is_two_qubit(&self) -> bool {
        matches!(self, NativeGate::Ms { .. })
    }

    fn rot(q: QubitId, axis: Axis, angle: f64) -> Self {
        NativeGate::Rotation { q, axis, angle }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NativeOp {
    pub gate: NativeGate,
    /// Index of the logical gate this op was lowered from.
    pub origin: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NativeCircuit {
    pub num_qubits: usize,
    pub ops: Vec<NativeOp>,
}

impl NativeCircuit {
    pub fn ms_count(&self) -> usize {
        self.ops.iter().filter(|o| o.gate.is_two_qubit()).count()
    }

    pub fn rotation_count(&self) -> usize {
        self.ops
            .iter()
            .filter(|o| matches!(o.gate, NativeGate::Rotation { .. }))
            .count()
    }
}

/// Map an angle into `(-π, π]`.
pub fn normalize_angle(theta: f64) -> f64 {
    let mut t = theta.rem_euclid(2.0 * PI);
    if t > PI {
        t -= 2.0 * PI;
    }
    t
}

fn lower_gate(gate: &LogicalGate, origin: usize, out: &mut Vec<NativeOp>) {
    let mut push = |gate| out.push(NativeOp { gate, origin });
    match *gate {
        LogicalGate::Reset { q } => push(NativeGate::Reset { q }),
        LogicalGate::Measure { q } => push(NativeGate::Measure { q }),
        LogicalGate::H { q } => {
            push(NativeGate::rot(q, Axis::Y, FRAC_PI_2));
            push(NativeGate::rot(q, Axis::X, PI));
        }
        LogicalGate::Cnot { control, target } => {
            push(NativeGate::rot(control, Axis::Y, FRAC_PI_2));
            push(NativeGate::Ms {
                a: control,
                b: target,
                angle: FRAC_PI_2,
            });
            push(NativeGate::rot(control, Axis::X, -FRAC_PI_2));
            push(NativeGate::rot(target, Axis::X, -FRAC_PI_2));
            push(NativeGate::rot(control, Axis::Y, -FRAC_PI_2));
        }
    }
}

/// Gate-by-gate lowering without any simplification.
pub fn decompose(circuit: &LogicalCircuit) -> Result<NativeCircuit> {
    let mut ops = Vec::with_capacity(circuit.gates.len() * 3);
    for (i, g) in circuit.gates.iter().enumerate() {
        lower_gate(g, i, &mut ops);
    }
    Ok(NativeCircuit {
        num_qubits: circuit.num_qubits,
        ops,
    })
}

/// Fuse consecutive same-axis rotations on each qubit and drop identities,
/// repeating until nothing changes.
pub fn peephole_merge(native: &NativeCircuit) -> NativeCircuit {
    let mut cur = merge_once(native);
    loop {
        let next = merge_once(&cur);
        if next.ops.len() == cur.ops.len() {
            return next;
        }
        cur = next;
    }
}

fn merge_once(native: &NativeCircuit) -> NativeCircuit {
    let mut out: Vec<NativeOp> = Vec::with_capacity(native.ops.len());
    // Per qubit: output index of a trailing rotation still open for fusion.
    let mut open: Vec<Option<usize>> = vec![None; native.num_qubits];
    for op in &native.ops {
        match op.gate {
            NativeGate::Rotation { q, axis, angle } => {
                if let Some(i) = open[q.index()] {
                    if let NativeGate::Rotation {
                        axis: prev_axis,
                        angle: ref mut prev,
                        ..
                    } = out[i].gate
                    {
                        if prev_axis == axis {
                            *prev = normalize_angle(*prev + angle);
                            continue;
                        }
                    }
                }
                open[q.index()] = Some(out.len());
                out.push(NativeOp {
                    gate: NativeGate::rot(q, axis, normalize_angle(angle)),
                    origin: op.origin,
                });
            }
            _ => {
                for q in op.gate.qubits() {
                    open[q.index()] = None;
                }
                out.push(*op);
            }
        }
    }
    out.retain(|op| !matches!(op.gate, NativeGate::Rotation { angle, .. } if angle.abs() < ANGLE_EPS));
    NativeCircuit {
        num_qubits: native.num_qubits,
        ops: out,
    }
}

/// Decompose and merge.
pub fn lower(circuit: &LogicalCircuit) -> Result<NativeCircuit> {
    Ok(peephole_merge(&decompose(circuit)?))
}
