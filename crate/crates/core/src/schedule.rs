//! Timed list scheduling of routed op streams.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::device::Wiring;
use crate::error::{Error, Result};
use crate::route::{count_movement, MoveKind, Op, OpKind, OpStream};
use crate::translate::NativeGate;

/// Operation durations in microseconds.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct TimingTable {
    pub ms_gate: u64,
    pub rotation: u64,
    pub measure: u64,
    pub reset: u64,
    pub shuttle: u64,
    pub split: u64,
    pub merge: u64,
    pub junction_entry: u64,
    pub junction_exit: u64,
    pub cooling_extra_2q: u64,
    /// Add `cooling_extra_2q` to every two-qubit gate.
    pub cooling: bool,
}

impl Default for TimingTable {
    fn default() -> Self {
        TimingTable {
            ms_gate: 40,
            rotation: 5,
            measure: 400,
            reset: 50,
            shuttle: 5,
            split: 80,
            merge: 80,
            junction_entry: 100,
            junction_exit: 100,
            cooling_extra_2q: 850,
            cooling: false,
        }
    }
}

impl TimingTable {
    pub fn ms(&self) -> u64 {
        self.ms_gate + if self.cooling { self.cooling_extra_2q } else { 0 }
    }

    pub fn gate(&self, g: &NativeGate) -> u64 {
        match g {
            NativeGate::Ms { .. } => self.ms(),
            NativeGate::Rotation { .. } => self.rotation,
            NativeGate::Measure { .. } => self.measure,
            NativeGate::Reset { .. } => self.reset,
        }
    }

    pub fn movement(&self, k: MoveKind) -> u64 {
        match k {
            MoveKind::Shuttle => self.shuttle,
            MoveKind::Split => self.split,
            MoveKind::Merge => self.merge,
            MoveKind::JunctionEntry => self.junction_entry,
            MoveKind::JunctionExit => self.junction_exit,
            MoveKind::GateSwap => 3 * self.ms(),
        }
    }

    pub fn duration(&self, op: &Op) -> u64 {
        match &op.kind {
            OpKind::Gate { gate, .. } => self.gate(gate),
            _ => self.movement(op.move_kind().expect("movement op")),
        }
    }

    pub fn validate(&self) -> Result<()> {
        let all = [
            self.ms_gate,
            self.rotation,
            self.measure,
            self.reset,
            self.shuttle,
            self.split,
            self.merge,
            self.junction_entry,
            self.junction_exit,
        ];
        if all.contains(&0) {
            return Err(Error::Config("all operation durations must be positive".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Entry {
    pub op: usize,
    pub start: u64,
    pub end: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Schedule {
    pub wiring: Wiring,
    /// Indexed by op id.
    pub entries: Vec<Entry>,
}

impl Schedule {
    pub fn makespan(&self) -> u64 {
        self.entries.iter().map(|e| e.end).max().unwrap_or(0)
    }
}

/// Merged busy intervals per transport kind; intervals of different kinds
/// never overlap.
#[derive(Default)]
struct Phases {
    blocks: BTreeMap<u64, (u64, MoveKind)>,
}

impl Phases {
    /// Earliest start at or after `t` where `[start, start+dur)` meets no
    /// interval of another kind.
    fn earliest(&self, mut t: u64, dur: u64, kind: MoveKind) -> u64 {
        loop {
            let mut moved = false;
            let from = self.blocks.range(..=t).next_back().map(|(&s, _)| s).unwrap_or(0);
            for (&s, &(e, k)) in self.blocks.range(from..) {
                if s >= t + dur.max(1) {
                    break;
                }
                if e > t && k != kind {
                    t = e;
                    moved = true;
                    break;
                }
            }
            if !moved {
                return t;
            }
        }
    }

    fn insert(&mut self, mut s: u64, mut e: u64, kind: MoveKind) {
        let from = self.blocks.range(..=s).next_back().map(|(&k, _)| k).unwrap_or(0);
        let overlapping: Vec<u64> = self
            .blocks
            .range(from..=e)
            .filter(|(&bs, &(be, bk))| bk == kind && be >= s && bs <= e)
            .map(|(&bs, _)| bs)
            .collect();
        for bs in overlapping {
            let (be, _) = self.blocks.remove(&bs).unwrap();
            s = s.min(bs);
            e = e.max(be);
        }
        self.blocks.insert(s, (e, kind));
    }
}

/// ASAP list schedule in op order. Under WISE wiring transport primitives
/// of different kinds are additionally kept from overlapping.
pub fn build_schedule(stream: &OpStream, wiring: Wiring, timing: &TimingTable) -> Result<Schedule> {
    let mut entries: Vec<Entry> = Vec::with_capacity(stream.ops.len());
    let mut phases = Phases::default();
    for (i, op) in stream.ops.iter().enumerate() {
        if op.id != i {
            return Err(Error::Config(format!("op {} stored at index {i}", op.id)));
        }
        let mut t = 0;
        for &d in &op.deps {
            if d >= i {
                return Err(Error::DependencyCycle(i));
            }
            t = t.max(entries[d].end);
        }
        let dur = timing.duration(op);
        if wiring == Wiring::Wise {
            if let Some(k) = op.move_kind().filter(|k| k.is_transport()) {
                t = phases.earliest(t, dur, k);
                phases.insert(t, t + dur, k);
            }
        }
        entries.push(Entry {
            op: i,
            start: t,
            end: t + dur,
        });
    }
    Ok(Schedule { wiring, entries })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Metrics {
    pub makespan: u64,
    pub elapsed_per_round: f64,
    pub movement_time: u64,
    pub n_movement_ops: usize,
    pub n_gate_swaps: usize,
}

/// Total length of the union of intervals.
pub fn union_length(mut iv: Vec<(u64, u64)>) -> u64 {
    iv.sort_unstable();
    let mut total = 0;
    let mut cur: Option<(u64, u64)> = None;
    for (s, e) in iv {
        match cur {
            Some((cs, ce)) if s <= ce => cur = Some((cs, ce.max(e))),
            Some((cs, ce)) => {
                total += ce - cs;
                cur = Some((s, e));
            }
            None => cur = Some((s, e)),
        }
    }
    if let Some((cs, ce)) = cur {
        total += ce - cs;
    }
    total
}

pub fn metrics(stream: &OpStream, schedule: &Schedule, rounds: usize) -> Metrics {
    let makespan = schedule.makespan();
    let moves: Vec<(u64, u64)> = stream
        .ops
        .iter()
        .zip(&schedule.entries)
        .filter(|(op, _)| op.is_movement())
        .map(|(_, e)| (e.start, e.end))
        .collect();
    let c = count_movement(stream);
    Metrics {
        makespan,
        elapsed_per_round: makespan as f64 / rounds.max(1) as f64,
        movement_time: union_length(moves),
        n_movement_ops: c.n_movement_ops,
        n_gate_swaps: c.n_gate_swaps,
    }
}

/// Longest path through the dependency DAG using op durations alone.
pub fn critical_path(stream: &OpStream, timing: &TimingTable) -> u64 {
    let mut finish = vec![0u64; stream.ops.len()];
    for (i, op) in stream.ops.iter().enumerate() {
        let start = op.deps.iter().map(|&d| finish[d]).max().unwrap_or(0);
        finish[i] = start + timing.duration(op);
    }
    finish.into_iter().max().unwrap_or(0)
}
