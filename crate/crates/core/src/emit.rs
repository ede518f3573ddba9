//! Serialization of compiled artifacts: Stim circuits, traces and reports.

use std::fmt::Write as _;
use std::io::Write as _;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::codes::{CodeLayout, LogicalCircuit, LogicalGate, QubitId, Role};
use crate::error::{Error, Result};
use crate::noise::{Channel, NoisyCircuit, Slot};
use crate::route::{Op, OpStream};
use crate::schedule::Schedule;
use crate::translate::NativeCircuit;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct StimOptions {
    /// Emit detectors and the logical observable.
    pub detectors: bool,
    pub coords: bool,
}

impl Default for StimOptions {
    fn default() -> Self {
        StimOptions {
            detectors: true,
            coords: true,
        }
    }
}

/// Stim text with per-kind line counts.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StimDocument {
    pub text: String,
    pub n_channels: usize,
    pub n_detectors: usize,
    pub n_observables: usize,
    pub n_measurements: usize,
}

// Ordering inside one instant: noise of ops that just ended, noise of ops
// about to start, gates, then gates whose native ops were all merged away.
const CLASS_AFTER: u8 = 0;
const CLASS_BEFORE: u8 = 1;
const CLASS_GATE: u8 = 2;
const CLASS_LATE: u8 = 3;

type Key = (u64, u8, usize);

enum Item {
    Gate(usize),
    Noise(usize),
}

/// Sort key for each logical gate, consistent with per-qubit program order.
fn gate_keys(
    circuit: &LogicalCircuit,
    native: &NativeCircuit,
    stream: &OpStream,
    schedule: &Schedule,
) -> Vec<Key> {
    let mut op_of_native = vec![None; native.ops.len()];
    for op in &stream.ops {
        if let Some(j) = op.native {
            op_of_native[j] = Some(op.id);
        }
    }
    let mut first_native: Vec<Option<usize>> = vec![None; circuit.gates.len()];
    let mut last_end: Vec<Option<u64>> = vec![None; circuit.gates.len()];
    for (j, nop) in native.ops.iter().enumerate() {
        let Some(op) = op_of_native[j] else { continue };
        let g = nop.origin;
        let is_anchor = match circuit.gates[g] {
            LogicalGate::Cnot { .. } => nop.gate.is_two_qubit(),
            _ => true,
        };
        if is_anchor && first_native[g].is_none() {
            first_native[g] = Some(op);
        }
        let end = schedule.entries[op].end;
        last_end[g] = Some(last_end[g].map_or(end, |e| e.max(end)));
    }
    let mut last_key: Vec<Option<Key>> = vec![None; circuit.num_qubits];
    let mut last_gate_end: Vec<u64> = vec![0; circuit.num_qubits];
    let mut keys = Vec::with_capacity(circuit.gates.len());
    for (g, gate) in circuit.gates.iter().enumerate() {
        let qs = gate.qubits();
        let mut key = match first_native[g] {
            Some(op) => (schedule.entries[op].start, CLASS_GATE, g),
            None => {
                let t = qs.iter().map(|q| last_gate_end[q.index()]).max().unwrap_or(0);
                (t, CLASS_LATE, g)
            }
        };
        for q in &qs {
            if let Some(prev) = last_key[q.index()] {
                if key <= prev {
                    key = (prev.0, prev.1, g);
                }
            }
        }
        for q in &qs {
            last_key[q.index()] = Some(key);
            if let Some(e) = last_end[g] {
                last_gate_end[q.index()] = last_gate_end[q.index()].max(e);
            }
        }
        keys.push(key);
    }
    keys
}

fn fmt_prob(p: f64) -> String {
    format!("{p}")
}

fn channel_line(out: &mut String, c: &Channel) {
    let _ = match *c {
        Channel::ZError { q, p } => writeln!(out, "Z_ERROR({}) {}", fmt_prob(p), q.0),
        Channel::XError { q, p } => writeln!(out, "X_ERROR({}) {}", fmt_prob(p), q.0),
        Channel::Depolarize1 { q, p } => writeln!(out, "DEPOLARIZE1({}) {}", fmt_prob(p), q.0),
        Channel::Depolarize2 { a, b, p } => writeln!(out, "DEPOLARIZE2({}) {} {}", fmt_prob(p), a.0, b.0),
    };
}

/// Time-ordered Stim circuit for a scheduled, noise-annotated memory experiment.
pub fn to_stim(
    layout: &CodeLayout,
    circuit: &LogicalCircuit,
    native: &NativeCircuit,
    stream: &OpStream,
    schedule: &Schedule,
    noisy: &NoisyCircuit,
    opts: StimOptions,
) -> Result<StimDocument> {
    if opts.detectors && !circuit.memory {
        return Err(Error::NotMemoryExperiment(
            "detectors need data reset, syndrome rounds and data readout".into(),
        ));
    }
    let keys = gate_keys(circuit, native, stream, schedule);
    let mut items: Vec<(Key, Item)> = keys.iter().enumerate().map(|(g, &k)| (k, Item::Gate(g))).collect();
    for (i, ev) in noisy.events.iter().enumerate() {
        let class = match ev.slot {
            Slot::After => CLASS_AFTER,
            Slot::Before => CLASS_BEFORE,
        };
        items.push(((ev.time, class, i), Item::Noise(i)));
    }
    items.sort_by_key(|(k, item)| (*k, matches!(item, Item::Gate(_))));

    let mut out = String::new();
    if opts.coords {
        for q in &layout.qubits {
            let _ = writeln!(out, "QUBIT_COORDS({}, {}) {}", q.pos.x, q.pos.y, q.id.0);
        }
    }
    let mut meas_index: Vec<Option<usize>> = vec![None; circuit.gates.len()];
    let mut n_meas = 0;
    for (_, item) in &items {
        match *item {
            Item::Gate(g) => {
                let _ = match circuit.gates[g] {
                    LogicalGate::Reset { q } => writeln!(out, "R {}", q.0),
                    LogicalGate::H { q } => writeln!(out, "H {}", q.0),
                    LogicalGate::Cnot { control, target } => writeln!(out, "CX {} {}", control.0, target.0),
                    LogicalGate::Measure { q } => {
                        meas_index[g] = Some(n_meas);
                        n_meas += 1;
                        writeln!(out, "M {}", q.0)
                    }
                };
            }
            Item::Noise(i) => channel_line(&mut out, &noisy.events[i].channel),
        }
    }
    let mut n_detectors = 0;
    let mut n_observables = 0;
    if opts.detectors {
        let rec = |g: usize| -> String { format!("rec[-{}]", n_meas - meas_index[g].expect("measured")) };
        // Measurement gate of each qubit per round.
        let rounds = circuit.rounds;
        let mut round_meas: Vec<Vec<Option<usize>>> = vec![vec![None; circuit.num_qubits]; rounds];
        for r in 0..rounds {
            for g in circuit.round_boundaries[r]..circuit.round_boundaries[r + 1] {
                if let LogicalGate::Measure { q } = circuit.gates[g] {
                    round_meas[r][q.index()] = Some(g);
                }
            }
        }
        let mut final_meas: Vec<Option<usize>> = vec![None; circuit.num_qubits];
        for g in circuit.round_boundaries[rounds]..circuit.gates.len() {
            if let LogicalGate::Measure { q } = circuit.gates[g] {
                final_meas[q.index()] = Some(g);
            }
        }
        let mut ancillas: Vec<(QubitId, Role)> = layout.ancillas().map(|q| (q.id, q.role)).collect();
        ancillas.sort_by_key(|a| a.0);
        for r in 0..rounds {
            for &(a, role) in &ancillas {
                let pos = layout.qubit(a).pos;
                let Some(g) = round_meas[r][a.index()] else { continue };
                if r == 0 {
                    if role == Role::AncillaZ {
                        let _ = writeln!(out, "DETECTOR({}, {}, 0) {}", pos.x, pos.y, rec(g));
                        n_detectors += 1;
                    }
                } else if let Some(prev) = round_meas[r - 1][a.index()] {
                    let _ = writeln!(out, "DETECTOR({}, {}, {}) {} {}", pos.x, pos.y, r, rec(g), rec(prev));
                    n_detectors += 1;
                }
            }
        }
        for cell in layout.cells_of(Role::AncillaZ) {
            let a = cell.ancilla;
            let pos = layout.qubit(a).pos;
            let mut terms: Vec<String> = Vec::new();
            for d in &cell.data {
                if let Some(g) = final_meas[d.index()] {
                    terms.push(rec(g));
                }
            }
            if let Some(g) = round_meas[rounds - 1][a.index()] {
                terms.push(rec(g));
            }
            let _ = writeln!(out, "DETECTOR({}, {}, {}) {}", pos.x, pos.y, rounds, terms.join(" "));
            n_detectors += 1;
        }
        let obs: Vec<String> = layout
            .logical_z()
            .iter()
            .filter_map(|d| final_meas[d.index()].map(rec))
            .collect();
        let _ = writeln!(out, "OBSERVABLE_INCLUDE(0) {}", obs.join(" "));
        n_observables = 1;
    }
    Ok(StimDocument {
        text: out,
        n_channels: noisy.events.len(),
        n_detectors,
        n_observables,
        n_measurements: n_meas,
    })
}

/// One line of the JSON-lines schedule trace.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceLine {
    #[serde(flatten)]
    pub op: Op,
    pub start: u64,
    pub end: u64,
}

pub fn trace_jsonl(stream: &OpStream, schedule: &Schedule) -> String {
    let mut s = String::new();
    for (op, e) in stream.ops.iter().zip(&schedule.entries) {
        let line = TraceLine {
            op: op.clone(),
            start: e.start,
            end: e.end,
        };
        s.push_str(&serde_json::to_string(&line).expect("trace line serializes"));
        s.push('\n');
    }
    s
}

/// Parse a trace written by [`trace_jsonl`].
pub fn parse_trace(text: &str) -> Result<Vec<TraceLine>> {
    text.lines()
        .filter(|l| !l.trim().is_empty())
        .enumerate()
        .map(|(i, l)| serde_json::from_str(l).map_err(|e| Error::Config(format!("trace line {}: {e}", i + 1))))
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GanttRow {
    pub op: usize,
    pub kind: String,
    pub start: u64,
    pub end: u64,
    pub component: String,
    pub ions: String,
}

pub fn gantt_csv(stream: &OpStream, schedule: &Schedule) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for (op, e) in stream.ops.iter().zip(&schedule.entries) {
        w.serialize(GanttRow {
            op: op.id,
            kind: op.label().to_string(),
            start: e.start,
            end: e.end,
            component: op.components().iter().map(|c| c.to_string()).collect::<Vec<_>>().join(";"),
            ions: op.ions().iter().map(|q| q.to_string()).collect::<Vec<_>>().join(";"),
        })
        .map_err(|e| Error::Io(e.to_string()))?;
    }
    csv_finish(w)
}

/// One row of the metrics report.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
pub struct MetricsRow {
    pub code: String,
    pub distance: usize,
    pub capacity: usize,
    pub topology: String,
    pub wiring: String,
    pub improvement: f64,
    pub rounds: usize,
    pub elapsed_per_round: Option<f64>,
    pub movement_time: Option<u64>,
    pub n_movement_ops: Option<usize>,
    pub n_gate_swaps: Option<usize>,
    pub makespan: Option<u64>,
    pub n_traps: Option<usize>,
    pub n_junctions: Option<usize>,
    pub n_electrodes: Option<u64>,
    pub n_dacs: Option<u64>,
    pub data_rate_mbps: Option<u64>,
    pub power_mw: Option<u64>,
    pub n_detectors: Option<usize>,
    pub stim_path: String,
    pub error: String,
}

pub const METRICS_HEADER: &str = "code,distance,capacity,topology,wiring,improvement,rounds,elapsed_per_round,movement_time,n_movement_ops,n_gate_swaps,makespan,n_traps,n_junctions,n_electrodes,n_dacs,data_rate_mbps,power_mw,n_detectors,stim_path,error";

pub fn metrics_csv(rows: &[MetricsRow]) -> Result<String> {
    if rows.is_empty() {
        return Ok(format!("{METRICS_HEADER}\n"));
    }
    let mut w = csv::Writer::from_writer(Vec::new());
    for r in rows {
        w.serialize(r).map_err(|e| Error::Io(e.to_string()))?;
    }
    csv_finish(w)
}

pub fn parse_metrics_csv(text: &str) -> Result<Vec<MetricsRow>> {
    let mut r = csv::Reader::from_reader(text.as_bytes());
    r.deserialize()
        .map(|row| row.map_err(|e| Error::Config(e.to_string())))
        .collect()
}

fn csv_finish(w: csv::Writer<Vec<u8>>) -> Result<String> {
    let bytes = w.into_inner().map_err(|e| Error::Io(e.to_string()))?;
    String::from_utf8(bytes).map_err(|e| Error::Io(e.to_string()))
}

/// Write via a temporary file in the same directory, then rename.
pub fn write_atomic(path: &Path, contents: &str) -> Result<()> {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    std::fs::create_dir_all(dir)?;
    let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
    tmp.write_all(contents.as_bytes())?;
    tmp.persist(path).map_err(|e| Error::Io(e.to_string()))?;
    Ok(())
}
