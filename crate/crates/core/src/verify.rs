//! Independent replay checker for routed op streams and their schedules.

use std::collections::HashMap;
use std::fmt;

use crate::codes::QubitId;
use crate::device::{ChainEnd, Component, ComponentId, QccdDevice, Wiring};
use crate::emit::TraceLine;
use crate::route::{MoveKind, Op, OpKind, OpStream, Resource};
use crate::schedule::Entry;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Violation {
    /// Op refers to a component of the wrong kind or one that does not exist.
    BadComponent { op: usize, component: ComponentId },
    UnknownIon { op: usize, ion: QubitId },
    /// Ion is not where the op expects it.
    Misplaced { op: usize, ion: QubitId },
    Capacity { op: usize, trap: ComponentId, occupancy: usize, capacity: usize },
    SegmentBusy { op: usize, segment: ComponentId },
    LaneBusy { op: usize, junction: ComponentId, lane: u32 },
    NotAtChainEnd { op: usize, ion: QubitId },
    NotAdjacent { op: usize, a: QubitId, b: QubitId },
    NotColocated { op: usize },
    /// After a pass an ion sits outside a trap or a trap has no free slot.
    DirtyBoundary { pass: usize, component: ComponentId },
    DepOrder { op: usize, dep: usize },
    Overlap { a: usize, b: usize, resource: Resource },
    PhaseOverlap { a: usize, b: usize, kinds: (MoveKind, MoveKind) },
    Malformed { op: usize, reason: String },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        use Violation::*;
        match self {
            BadComponent { op, component } => write!(f, "op {op}: bad component {component}"),
            UnknownIon { op, ion } => write!(f, "op {op}: unknown ion {ion}"),
            Misplaced { op, ion } => write!(f, "op {op}: ion {ion} is not where the op expects it"),
            Capacity { op, trap, occupancy, capacity } => {
                write!(f, "op {op}: capacity violation in {trap} ({occupancy} ions, capacity {capacity})")
            }
            SegmentBusy { op, segment } => write!(f, "op {op}: segment {segment} already occupied"),
            LaneBusy { op, junction, lane } => write!(f, "op {op}: junction {junction} lane {lane} already occupied"),
            NotAtChainEnd { op, ion } => write!(f, "op {op}: ion {ion} split from the middle of a chain"),
            NotAdjacent { op, a, b } => write!(f, "op {op}: swapped ions {a} and {b} are not neighbours"),
            NotColocated { op } => write!(f, "op {op}: gate qubits are not in the gate's trap"),
            DirtyBoundary { pass, component } => write!(f, "pass {pass}: {component} not at rest at the boundary"),
            DepOrder { op, dep } => write!(f, "op {op}: starts before dependency {dep} ends"),
            Overlap { a, b, resource } => write!(f, "ops {a} and {b} overlap on {resource:?}"),
            PhaseOverlap { a, b, kinds } => write!(
                f,
                "ops {a} and {b}: same-type-phase violation ({} overlaps {})",
                kinds.0.name(),
                kinds.1.name()
            ),
            Malformed { op, reason } => write!(f, "op {op}: {reason}"),
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Report {
    pub violations: Vec<Violation>,
    pub n_ops: usize,
}

impl Report {
    pub fn is_clean(&self) -> bool {
        self.violations.is_empty()
    }

    pub fn first(&self) -> Option<&Violation> {
        self.violations.first()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Loc {
    Trap(ComponentId),
    /// In a segment, sitting at the given endpoint.
    Segment(ComponentId, ComponentId),
    Junction(ComponentId, u32),
}

struct Replay<'a> {
    dev: &'a QccdDevice,
    loc: Vec<Option<Loc>>,
    chains: Vec<Vec<QubitId>>,
    seg: Vec<Option<QubitId>>,
    lanes: HashMap<(ComponentId, u32), QubitId>,
    out: Vec<Violation>,
}

impl<'a> Replay<'a> {
    fn kind(&self, c: ComponentId) -> Option<&'a Component> {
        self.dev.components.get(c.index())
    }

    fn want_trap(&mut self, op: usize, c: ComponentId) -> bool {
        let ok = matches!(self.kind(c), Some(Component::Trap { .. }));
        if !ok {
            self.out.push(Violation::BadComponent { op, component: c });
        }
        ok
    }

    fn want_segment(&mut self, op: usize, s: ComponentId, end: ComponentId) -> bool {
        let ok = match self.kind(s) {
            Some(Component::Segment { a, b, .. }) => *a == end || *b == end,
            _ => false,
        };
        if !ok {
            self.out.push(Violation::BadComponent { op, component: s });
        }
        ok
    }

    fn want_junction(&mut self, op: usize, j: ComponentId, lane: u32) -> bool {
        let ok = match self.kind(j) {
            Some(Component::Junction { capacity, .. }) => (lane as usize) < *capacity,
            _ => false,
        };
        if !ok {
            self.out.push(Violation::BadComponent { op, component: j });
        }
        ok
    }

    fn at(&mut self, op: usize, ion: QubitId, want: Loc) -> bool {
        match self.loc.get(ion.index()) {
            None => {
                self.out.push(Violation::UnknownIon { op, ion });
                false
            }
            Some(&l) if l == Some(want) => true,
            Some(_) => {
                self.out.push(Violation::Misplaced { op, ion });
                false
            }
        }
    }

    fn end_of(&self, s: ComponentId, t: ComponentId) -> ChainEnd {
        self.dev.segment_end(s, t).unwrap_or(ChainEnd::Right)
    }

    fn step(&mut self, op: &Op) {
        let id = op.id;
        match op.kind {
            OpKind::Gate { gate, trap } => {
                if !self.want_trap(id, trap) {
                    return;
                }
                let qs = gate.qubits();
                if qs.iter().any(|q| q.index() >= self.loc.len()) {
                    self.out.push(Violation::UnknownIon { op: id, ion: qs[0] });
                } else if qs.iter().any(|q| self.loc[q.index()] != Some(Loc::Trap(trap))) {
                    self.out.push(Violation::NotColocated { op: id });
                }
            }
            OpKind::GateSwap { trap, a, b } => {
                if !self.want_trap(id, trap) || !self.at(id, a, Loc::Trap(trap)) || !self.at(id, b, Loc::Trap(trap)) {
                    return;
                }
                let chain = &mut self.chains[trap.index()];
                let pa = chain.iter().position(|&q| q == a);
                let pb = chain.iter().position(|&q| q == b);
                match (pa, pb) {
                    (Some(x), Some(y)) if x.abs_diff(y) == 1 => chain.swap(x, y),
                    _ => self.out.push(Violation::NotAdjacent { op: id, a, b }),
                }
            }
            OpKind::Split { ion, trap, segment } => {
                if !self.want_trap(id, trap) || !self.want_segment(id, segment, trap) || !self.at(id, ion, Loc::Trap(trap)) {
                    return;
                }
                let end = self.end_of(segment, trap);
                let chain = &self.chains[trap.index()];
                let at_end = match end {
                    ChainEnd::Left => chain.first() == Some(&ion),
                    ChainEnd::Right => chain.last() == Some(&ion),
                };
                if !at_end {
                    self.out.push(Violation::NotAtChainEnd { op: id, ion });
                }
                if self.seg[segment.index()].is_some() {
                    self.out.push(Violation::SegmentBusy { op: id, segment });
                }
                self.chains[trap.index()].retain(|&q| q != ion);
                self.seg[segment.index()] = Some(ion);
                self.loc[ion.index()] = Some(Loc::Segment(segment, trap));
            }
            OpKind::Shuttle { ion, segment, from, to } => {
                if !self.want_segment(id, segment, from) || !self.want_segment(id, segment, to) || from == to {
                    return;
                }
                if self.at(id, ion, Loc::Segment(segment, from)) {
                    self.loc[ion.index()] = Some(Loc::Segment(segment, to));
                }
            }
            OpKind::Merge { ion, segment, trap } => {
                if !self.want_trap(id, trap) || !self.want_segment(id, segment, trap) || !self.at(id, ion, Loc::Segment(segment, trap)) {
                    return;
                }
                self.seg[segment.index()] = None;
                match self.end_of(segment, trap) {
                    ChainEnd::Left => self.chains[trap.index()].insert(0, ion),
                    ChainEnd::Right => self.chains[trap.index()].push(ion),
                }
                self.loc[ion.index()] = Some(Loc::Trap(trap));
                let (occupancy, capacity) = (self.chains[trap.index()].len(), self.dev.capacity_of(trap));
                if occupancy > capacity {
                    self.out.push(Violation::Capacity { op: id, trap, occupancy, capacity });
                }
            }
            OpKind::JunctionEntry { ion, segment, junction, lane } => {
                if !self.want_junction(id, junction, lane)
                    || !self.want_segment(id, segment, junction)
                    || !self.at(id, ion, Loc::Segment(segment, junction))
                {
                    return;
                }
                if self.lanes.contains_key(&(junction, lane)) {
                    self.out.push(Violation::LaneBusy { op: id, junction, lane });
                }
                self.seg[segment.index()] = None;
                self.lanes.insert((junction, lane), ion);
                self.loc[ion.index()] = Some(Loc::Junction(junction, lane));
            }
            OpKind::JunctionExit { ion, junction, segment, lane } => {
                if !self.want_junction(id, junction, lane)
                    || !self.want_segment(id, segment, junction)
                    || !self.at(id, ion, Loc::Junction(junction, lane))
                {
                    return;
                }
                if self.seg[segment.index()].is_some() {
                    self.out.push(Violation::SegmentBusy { op: id, segment });
                }
                self.lanes.remove(&(junction, lane));
                self.seg[segment.index()] = Some(ion);
                self.loc[ion.index()] = Some(Loc::Segment(segment, junction));
            }
        }
    }

    fn check_boundary(&mut self, pass: usize) {
        for (i, s) in self.seg.iter().enumerate() {
            if s.is_some() {
                self.out.push(Violation::DirtyBoundary { pass, component: ComponentId(i as u32) });
            }
        }
        let mut busy: Vec<ComponentId> = self.lanes.keys().map(|k| k.0).collect();
        busy.sort();
        busy.dedup();
        for j in busy {
            self.out.push(Violation::DirtyBoundary { pass, component: j });
        }
        for t in self.dev.traps() {
            if self.chains[t.index()].len() + 1 > self.dev.capacity_of(t) {
                self.out.push(Violation::DirtyBoundary { pass, component: t });
            }
        }
    }
}

/// Replay `ops` from `initial_chains` in id order and check the physical
/// rules of the device. `pass_boundaries` are op counts after which every
/// ion must be at rest with a free slot in each trap.
pub fn check_ops(
    device: &QccdDevice,
    num_qubits: usize,
    initial_chains: &[(ComponentId, Vec<QubitId>)],
    ops: &[Op],
    pass_boundaries: &[usize],
) -> Vec<Violation> {
    let mut r = Replay {
        dev: device,
        loc: vec![None; num_qubits],
        chains: vec![Vec::new(); device.components.len()],
        seg: vec![None; device.components.len()],
        lanes: HashMap::new(),
        out: Vec::new(),
    };
    for (t, chain) in initial_chains {
        if !device.is_trap(*t) {
            r.out.push(Violation::BadComponent { op: 0, component: *t });
            continue;
        }
        for &q in chain {
            match r.loc.get_mut(q.index()) {
                Some(l) => *l = Some(Loc::Trap(*t)),
                None => r.out.push(Violation::UnknownIon { op: 0, ion: q }),
            }
        }
        r.chains[t.index()] = chain.clone();
    }
    let mut bounds = pass_boundaries.iter().enumerate().peekable();
    for (i, op) in ops.iter().enumerate() {
        if op.id != i {
            r.out.push(Violation::Malformed { op: i, reason: format!("id {} out of sequence", op.id) });
        }
        r.step(op);
        while let Some(&(p, &b)) = bounds.peek() {
            if b != i + 1 {
                break;
            }
            r.check_boundary(p);
            bounds.next();
        }
    }
    r.out
}

/// Check a timed schedule: dependencies are respected, exclusive resources
/// never overlap and, under WISE wiring, transport primitives of different
/// kinds never run at the same time.
pub fn check_timing(ops: &[Op], entries: &[Entry], wiring: Wiring) -> Vec<Violation> {
    let mut out = Vec::new();
    if ops.len() != entries.len() {
        out.push(Violation::Malformed {
            op: ops.len().min(entries.len()),
            reason: format!("{} ops but {} schedule entries", ops.len(), entries.len()),
        });
        return out;
    }
    for (op, e) in ops.iter().zip(entries) {
        if e.end < e.start {
            out.push(Violation::Malformed { op: op.id, reason: "ends before it starts".into() });
        }
        for &d in &op.deps {
            match entries.get(d) {
                Some(de) if d < op.id && de.end <= e.start => {}
                _ => out.push(Violation::DepOrder { op: op.id, dep: d }),
            }
        }
    }

    let mut by_res: HashMap<Resource, Vec<usize>> = HashMap::new();
    for op in ops {
        for r in op.resources() {
            by_res.entry(r).or_default().push(op.id);
        }
    }
    let mut keys: Vec<&Resource> = by_res.keys().collect();
    keys.sort();
    for r in keys {
        let mut ids = by_res[r].clone();
        ids.sort_by_key(|&i| (entries[i].start, i));
        for w in ids.windows(2) {
            if entries[w[1]].start < entries[w[0]].end {
                out.push(Violation::Overlap { a: w[0], b: w[1], resource: *r });
            }
        }
    }

    if wiring == Wiring::Wise {
        let mut moves: Vec<(u64, u64, usize, MoveKind)> = ops
            .iter()
            .filter_map(|op| op.move_kind().filter(|k| k.is_transport()).map(|k| (op.id, k)))
            .map(|(i, k)| (entries[i].start, entries[i].end, i, k))
            .filter(|m| m.1 > m.0)
            .collect();
        moves.sort();
        // Sweep keeping the latest-ending interval of each kind seen so far.
        let mut open: HashMap<MoveKind, (u64, usize)> = HashMap::new();
        for &(s, e, i, k) in &moves {
            let mut clash: Vec<(usize, MoveKind)> = open
                .iter()
                .filter(|(&ok, &(oe, _))| ok != k && oe > s)
                .map(|(&ok, &(_, oi))| (oi, ok))
                .collect();
            clash.sort();
            if let Some(&(oi, ok)) = clash.first() {
                out.push(Violation::PhaseOverlap { a: oi, b: i, kinds: (ok, k) });
            }
            let slot = open.entry(k).or_insert((e, i));
            if e >= slot.0 {
                *slot = (e, i);
            }
        }
    }
    out
}

/// Full check of a routed stream and its schedule.
pub fn verify_stream(device: &QccdDevice, stream: &OpStream, entries: &[Entry], wiring: Wiring) -> Report {
    let mut violations = check_ops(device, stream.num_qubits, &stream.initial_chains, &stream.ops, &stream.pass_boundaries);
    violations.extend(check_timing(&stream.ops, entries, wiring));
    Report { violations, n_ops: stream.ops.len() }
}

/// Check a parsed trace against the device and starting chains it was
/// compiled for. Pass boundaries are recovered from the `pass` field.
pub fn verify_trace(
    device: &QccdDevice,
    num_qubits: usize,
    initial_chains: &[(ComponentId, Vec<QubitId>)],
    trace: &[TraceLine],
    wiring: Wiring,
) -> Report {
    let ops: Vec<Op> = trace.iter().map(|l| l.op.clone()).collect();
    let entries: Vec<Entry> = trace
        .iter()
        .map(|l| Entry { op: l.op.id, start: l.start, end: l.end })
        .collect();
    let mut bounds = Vec::new();
    for (i, w) in ops.windows(2).enumerate() {
        if w[1].pass != w[0].pass {
            bounds.push(i + 1);
        }
    }
    if !ops.is_empty() {
        bounds.push(ops.len());
    }
    let mut violations = check_ops(device, num_qubits, initial_chains, &ops, &bounds);
    if ops.iter().enumerate().all(|(i, o)| o.id == i) {
        violations.extend(check_timing(&ops, &entries, wiring));
    }
    Report { violations, n_ops: ops.len() }
}
