//! Multi-pass ion routing.
//!
//! Each pass runs every gate whose ions already share a trap, routes as many
//! waiting ancillas as the device allows toward their partners, runs the
//! newly enabled gates and finally moves ions out of over-full traps so the
//! next pass starts with one free slot in every trap.

use std::cmp::Reverse;
use std::collections::{BTreeMap, BinaryHeap, HashMap, VecDeque};

use serde::{Deserialize, Serialize};

use crate::codes::QubitId;
use crate::device::{ChainEnd, ComponentId, QccdDevice};
use crate::error::{Error, Result};
use crate::place::Mapping;
use crate::translate::{NativeCircuit, NativeGate};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MoveKind {
    Shuttle,
    Split,
    Merge,
    JunctionEntry,
    JunctionExit,
    GateSwap,
}

impl MoveKind {
    pub fn name(self) -> &'static str {
        match self {
            MoveKind::Shuttle => "shuttle",
            MoveKind::Split => "split",
            MoveKind::Merge => "merge",
            MoveKind::JunctionEntry => "junction_entry",
            MoveKind::JunctionExit => "junction_exit",
            MoveKind::GateSwap => "gate_swap",
        }
    }

    /// Transport primitives proper (everything but in-trap swaps).
    pub fn is_transport(self) -> bool {
        self != MoveKind::GateSwap
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum OpKind {
    Gate {
        gate: NativeGate,
        trap: ComponentId,
    },
    /// Exchange two neighbouring ions in a chain (three MS gates).
    GateSwap {
        trap: ComponentId,
        a: QubitId,
        b: QubitId,
    },
    Split {
        ion: QubitId,
        trap: ComponentId,
        segment: ComponentId,
    },
    Shuttle {
        ion: QubitId,
        segment: ComponentId,
        from: ComponentId,
        to: ComponentId,
    },
    JunctionEntry {
        ion: QubitId,
        segment: ComponentId,
        junction: ComponentId,
        lane: u32,
    },
    JunctionExit {
        ion: QubitId,
        junction: ComponentId,
        segment: ComponentId,
        lane: u32,
    },
    Merge {
        ion: QubitId,
        segment: ComponentId,
        trap: ComponentId,
    },
}

/// Exclusive resource keys used to derive ordering constraints.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Resource {
    Ion(QubitId),
    Component(ComponentId),
    Lane(ComponentId, u32),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Op {
    pub id: usize,
    #[serde(flatten)]
    pub kind: OpKind,
    /// Ops that must finish before this one starts.
    pub deps: Vec<usize>,
    pub pass: usize,
    /// Index into the native circuit for gate ops.
    pub native: Option<usize>,
}

impl Op {
    pub fn ions(&self) -> Vec<QubitId> {
        match self.kind {
            OpKind::Gate { gate, .. } => gate.qubits(),
            OpKind::GateSwap { a, b, .. } => vec![a, b],
            OpKind::Split { ion, .. }
            | OpKind::Shuttle { ion, .. }
            | OpKind::JunctionEntry { ion, .. }
            | OpKind::JunctionExit { ion, .. }
            | OpKind::Merge { ion, .. } => vec![ion],
        }
    }

    pub fn components(&self) -> Vec<ComponentId> {
        match self.kind {
            OpKind::Gate { trap, .. } | OpKind::GateSwap { trap, .. } => vec![trap],
            OpKind::Split { trap, segment, .. } | OpKind::Merge { segment, trap, .. } => vec![trap, segment],
            OpKind::Shuttle { segment, .. } => vec![segment],
            OpKind::JunctionEntry { segment, junction, .. } | OpKind::JunctionExit { junction, segment, .. } => {
                vec![segment, junction]
            }
        }
    }

    pub fn resources(&self) -> Vec<Resource> {
        let mut r: Vec<Resource> = self.ions().into_iter().map(Resource::Ion).collect();
        match self.kind {
            OpKind::JunctionEntry { segment, junction, lane, .. }
            | OpKind::JunctionExit { junction, segment, lane, .. } => {
                r.push(Resource::Component(segment));
                r.push(Resource::Lane(junction, lane));
            }
            _ => r.extend(self.components().into_iter().map(Resource::Component)),
        }
        r
    }

    pub fn move_kind(&self) -> Option<MoveKind> {
        match self.kind {
            OpKind::Gate { .. } => None,
            OpKind::GateSwap { .. } => Some(MoveKind::GateSwap),
            OpKind::Split { .. } => Some(MoveKind::Split),
            OpKind::Shuttle { .. } => Some(MoveKind::Shuttle),
            OpKind::JunctionEntry { .. } => Some(MoveKind::JunctionEntry),
            OpKind::JunctionExit { .. } => Some(MoveKind::JunctionExit),
            OpKind::Merge { .. } => Some(MoveKind::Merge),
        }
    }

    pub fn is_movement(&self) -> bool {
        self.move_kind().is_some()
    }

    pub fn label(&self) -> &'static str {
        match self.kind {
            OpKind::Gate { gate, .. } => match gate {
                NativeGate::Ms { .. } => "ms",
                NativeGate::Rotation { .. } => "rotation",
                NativeGate::Measure { .. } => "measure",
                NativeGate::Reset { .. } => "reset",
            },
            _ => self.move_kind().map(MoveKind::name).unwrap_or("?"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OpStream {
    pub num_qubits: usize,
    pub ops: Vec<Op>,
    /// Op index at which each pass ends.
    pub pass_boundaries: Vec<usize>,
    /// Chains at the start, as `(trap, ions left to right)`.
    pub initial_chains: Vec<(ComponentId, Vec<QubitId>)>,
}

impl OpStream {
    /// One JSON object per line.
    pub fn to_json_lines(&self) -> String {
        let mut s = String::new();
        for op in &self.ops {
            s.push_str(&serde_json::to_string(op).expect("op serializes"));
            s.push('\n');
        }
        s
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct MovementCount {
    pub n_movement_ops: usize,
    pub n_gate_swaps: usize,
}

pub fn count_movement(stream: &OpStream) -> MovementCount {
    let mut c = MovementCount::default();
    for op in &stream.ops {
        match op.move_kind() {
            Some(MoveKind::GateSwap) => {
                c.n_movement_ops += 1;
                c.n_gate_swaps += 1;
            }
            Some(_) => c.n_movement_ops += 1,
            None => {}
        }
    }
    c
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct RouteOptions {
    /// Extra hops over the unobstructed shortest path a route may take
    /// before it is deferred to the next pass.
    pub detour_slack: usize,
}

/// A route as alternating nodes and segments: `[trap, seg, node, seg, ..., trap]`.
pub type Path = Vec<ComponentId>;

fn seg_end_of(dev: &QccdDevice, seg: ComponentId, trap: ComponentId) -> ChainEnd {
    dev.segment_end(seg, trap).unwrap_or(ChainEnd::Right)
}

/// Minimum-hop path from `from` to `to`, ties broken by fewest in-trap swaps
/// then by the component id sequence. `usable(node, is_dest)` filters nodes,
/// `seg_ok` filters segments and `swaps(trap, entry, exit)` prices passing
/// through a trap.
pub fn shortest_path(
    dev: &QccdDevice,
    from: ComponentId,
    to: ComponentId,
    usable: impl Fn(ComponentId, bool) -> bool,
    seg_ok: impl Fn(ComponentId) -> bool,
    swaps: impl Fn(ComponentId, Option<ComponentId>, ComponentId) -> usize,
) -> Option<Path> {
    if from == to {
        return Some(vec![from]);
    }
    type Key = (usize, usize, Vec<u32>);
    let mut heap: BinaryHeap<Reverse<(Key, Path)>> = BinaryHeap::new();
    let mut settled = vec![false; dev.components.len()];
    heap.push(Reverse(((0, 0, vec![from.0]), vec![from])));
    while let Some(Reverse(((hops, sw, ids), path))) = heap.pop() {
        let node = *path.last().unwrap();
        if settled[node.index()] {
            continue;
        }
        settled[node.index()] = true;
        if node == to {
            return Some(path);
        }
        let entry = if path.len() >= 2 { Some(path[path.len() - 2]) } else { None };
        for &(next, seg) in dev.neighbours(node) {
            if settled[next.index()] || !seg_ok(seg) || !usable(next, next == to) {
                continue;
            }
            let extra = if dev.is_trap(node) { swaps(node, entry, seg) } else { 0 };
            let mut p = path.clone();
            p.push(seg);
            p.push(next);
            let mut k = ids.clone();
            k.push(seg.0);
            k.push(next.0);
            heap.push(Reverse(((hops + 1, sw + extra, k), p)));
        }
    }
    None
}

/// Hop counts of paths, for reporting.
pub fn path_hops(path: &Path) -> usize {
    path.len() / 2
}

struct Router<'a> {
    dev: &'a QccdDevice,
    native: &'a NativeCircuit,
    movable: &'a [bool],
    home: Vec<ComponentId>,
    at: Vec<ComponentId>,
    chains: Vec<Vec<QubitId>>,
    queues: Vec<VecDeque<usize>>,
    ops: Vec<Op>,
    last: HashMap<Resource, usize>,
    crossings: Vec<u32>,
    pass: usize,
    opts: RouteOptions,
}

impl<'a> Router<'a> {
    fn occ(&self, t: ComponentId) -> usize {
        self.chains[t.index()].len()
    }

    fn cap(&self, c: ComponentId) -> usize {
        self.dev.capacity_of(c)
    }

    fn push(&mut self, kind: OpKind, native: Option<usize>) {
        let id = self.ops.len();
        let mut op = Op {
            id,
            kind,
            deps: Vec::new(),
            pass: self.pass,
            native,
        };
        let mut deps: Vec<usize> = Vec::new();
        for r in op.resources() {
            if let Some(&d) = self.last.get(&r) {
                deps.push(d);
            }
            self.last.insert(r, id);
        }
        deps.sort_unstable();
        deps.dedup();
        op.deps = deps;
        self.ops.push(op);
    }

    fn is_ready(&self, i: usize) -> bool {
        self.native.ops[i]
            .gate
            .qubits()
            .iter()
            .all(|q| self.queues[q.index()].front() == Some(&i))
    }

    fn colocated(&self, i: usize) -> bool {
        let qs = self.native.ops[i].gate.qubits();
        qs.iter().all(|q| self.at[q.index()] == self.at[qs[0].index()])
    }

    fn frontier(&self) -> Vec<usize> {
        let mut f: Vec<usize> = self
            .queues
            .iter()
            .filter_map(|q| q.front().copied())
            .filter(|&i| self.is_ready(i))
            .collect();
        f.sort_unstable();
        f.dedup();
        f
    }

    fn emit_gate(&mut self, i: usize) {
        let gate = self.native.ops[i].gate;
        let trap = self.at[gate.qubits()[0].index()];
        self.push(OpKind::Gate { gate, trap }, Some(i));
        for q in gate.qubits() {
            self.queues[q.index()].pop_front();
        }
    }

    /// Steps 1 and 8: run everything already co-located.
    fn run_local(&mut self) -> usize {
        let mut n = 0;
        loop {
            let ready: Vec<usize> = self.frontier().into_iter().filter(|&i| self.colocated(i)).collect();
            if ready.is_empty() {
                return n;
            }
            for i in ready {
                self.emit_gate(i);
                n += 1;
            }
        }
    }

    fn mover_of(&self, i: usize) -> Result<(QubitId, QubitId)> {
        match self.native.ops[i].gate {
            NativeGate::Ms { a, b, .. } => {
                if self.movable[a.index()] {
                    Ok((a, b))
                } else if self.movable[b.index()] {
                    Ok((b, a))
                } else {
                    Err(Error::UnsupportedGate(format!(
                        "two-qubit gate between stationary qubits {a} and {b} in different traps"
                    )))
                }
            }
            g => Err(Error::UnsupportedGate(format!("{g:?} needs no routing"))),
        }
    }

    /// Swaps needed to bring `ion` to the `end` of its chain.
    fn swaps_to_end(&self, trap: ComponentId, ion: QubitId, end: ChainEnd) -> usize {
        let chain = &self.chains[trap.index()];
        let pos = chain.iter().position(|&q| q == ion).unwrap_or(0);
        match end {
            ChainEnd::Left => pos,
            ChainEnd::Right => chain.len() - 1 - pos,
        }
    }

    fn through_swaps(&self, trap: ComponentId, entry: Option<ComponentId>, exit: ComponentId, ion: QubitId) -> usize {
        let out_end = seg_end_of(self.dev, exit, trap);
        match entry {
            None => self.swaps_to_end(trap, ion, out_end),
            Some(seg) => {
                if seg_end_of(self.dev, seg, trap) == out_end {
                    0
                } else {
                    self.occ(trap)
                }
            }
        }
    }

    /// Step 7: expand a path into primitives and update the state.
    fn emit_path(&mut self, ion: QubitId, path: &Path) {
        let mut k = 0;
        while k + 2 < path.len() {
            let (u, s, v) = (path[k], path[k + 1], path[k + 2]);
            if self.dev.is_trap(u) {
                let end = seg_end_of(self.dev, s, u);
                loop {
                    let chain = &self.chains[u.index()];
                    let pos = chain.iter().position(|&q| q == ion).expect("ion in trap");
                    let nb = match end {
                        ChainEnd::Left if pos > 0 => pos - 1,
                        ChainEnd::Right if pos + 1 < chain.len() => pos + 1,
                        _ => break,
                    };
                    let other = chain[nb];
                    self.chains[u.index()].swap(pos, nb);
                    self.push(
                        OpKind::GateSwap {
                            trap: u,
                            a: ion,
                            b: other,
                        },
                        None,
                    );
                }
                self.chains[u.index()].retain(|&q| q != ion);
                self.push(
                    OpKind::Split {
                        ion,
                        trap: u,
                        segment: s,
                    },
                    None,
                );
            } else {
                let lane = self.crossings[u.index()].wrapping_sub(1) % self.cap(u) as u32;
                self.push(
                    OpKind::JunctionExit {
                        ion,
                        junction: u,
                        segment: s,
                        lane,
                    },
                    None,
                );
            }
            self.push(
                OpKind::Shuttle {
                    ion,
                    segment: s,
                    from: u,
                    to: v,
                },
                None,
            );
            if self.dev.is_trap(v) {
                match seg_end_of(self.dev, s, v) {
                    ChainEnd::Left => self.chains[v.index()].insert(0, ion),
                    ChainEnd::Right => self.chains[v.index()].push(ion),
                }
                self.push(
                    OpKind::Merge {
                        ion,
                        segment: s,
                        trap: v,
                    },
                    None,
                );
            } else {
                let lane = self.crossings[v.index()] % self.cap(v) as u32;
                self.crossings[v.index()] += 1;
                self.push(
                    OpKind::JunctionEntry {
                        ion,
                        segment: s,
                        junction: v,
                        lane,
                    },
                    None,
                );
            }
            k += 2;
        }
        if let Some(&dest) = path.last() {
            self.at[ion.index()] = dest;
        }
    }

    fn unobstructed_hops(&self, from: ComponentId, to: ComponentId) -> Option<usize> {
        self.dev.bfs_hops(from)[to.index()]
    }

    /// Steps 2-7. Returns the number of ancillas moved and the first deferred one.
    fn route_ready(&mut self) -> Result<(usize, Option<(QubitId, ComponentId)>)> {
        let waiting: Vec<usize> = self
            .frontier()
            .into_iter()
            .filter(|&i| self.native.ops[i].gate.is_two_qubit() && !self.colocated(i))
            .collect();
        let mut reserved: BTreeMap<ComponentId, usize> = BTreeMap::new();
        let mut planned: Vec<(QubitId, Path)> = Vec::new();
        let mut deferred = None;
        for i in waiting {
            let (mover, partner) = self.mover_of(i)?;
            let src = self.at[mover.index()];
            let dest = self.at[partner.index()];
            let res = |c: ComponentId| reserved.get(&c).copied().unwrap_or(0);
            let path = shortest_path(
                self.dev,
                src,
                dest,
                |n, _| {
                    if self.dev.is_trap(n) {
                        n != src && self.occ(n) + res(n) < self.cap(n)
                    } else {
                        res(n) < self.cap(n)
                    }
                },
                |s| res(s) < 1,
                |t, entry, exit| self.through_swaps(t, entry, exit, mover),
            );
            let limit = self.unobstructed_hops(src, dest).map(|h| h + self.opts.detour_slack);
            match (path, limit) {
                (Some(p), Some(limit)) if path_hops(&p) <= limit => {
                    for &c in &p[1..] {
                        *reserved.entry(c).or_insert(0) += 1;
                    }
                    planned.push((mover, p));
                }
                _ => {
                    if deferred.is_none() {
                        deferred = Some((mover, dest));
                    }
                }
            }
        }
        let moved = planned.len();
        for (ion, path) in planned {
            self.emit_path(ion, &path);
        }
        Ok((moved, deferred))
    }

    fn next_partner_trap(&self, ion: QubitId) -> Option<ComponentId> {
        self.queues[ion.index()].iter().find_map(|&i| match self.native.ops[i].gate {
            NativeGate::Ms { a, b, .. } => {
                let p = if a == ion { b } else { a };
                Some(self.at[p.index()])
            }
            _ => None,
        })
    }

    fn rest_room(&self, t: ComponentId) -> bool {
        self.occ(t) + 1 < self.cap(t)
    }

    /// Destinations for an ion leaving `from`, best first: its next partner's
    /// trap, its home, then every other trap with a free resting slot by
    /// distance. With `park` set, traps that merely have room come last.
    fn eviction_targets(&self, ion: QubitId, from: ComponentId, park: bool) -> Vec<ComponentId> {
        let mut out = Vec::new();
        if let Some(p) = self.next_partner_trap(ion) {
            if p != from && self.rest_room(p) {
                out.push(p);
            }
        }
        let home = self.home[ion.index()];
        if home != from && self.rest_room(home) && !out.contains(&home) {
            out.push(home);
        }
        let hops = self.dev.bfs_hops(from);
        let by_dist = |ok: &dyn Fn(ComponentId) -> bool, out: &mut Vec<ComponentId>| {
            let mut ts: Vec<(usize, ComponentId)> = self
                .dev
                .traps()
                .into_iter()
                .filter(|&t| t != from && ok(t) && !out.contains(&t))
                .filter_map(|t| hops[t.index()].map(|h| (h, t)))
                .collect();
            ts.sort();
            out.extend(ts.into_iter().map(|(_, t)| t));
        };
        by_dist(&|t| self.rest_room(t), &mut out);
        if park {
            by_dist(&|t| self.occ(t) < self.cap(t), &mut out);
        }
        out
    }

    /// Move one movable ion out of `t`; false if none can leave.
    fn evict_one(&mut self, t: ComponentId, park: bool) -> bool {
        let mut cands: Vec<(bool, bool, QubitId)> = self.chains[t.index()]
            .iter()
            .filter(|q| self.movable[q.index()])
            .map(|&q| (self.home[q.index()] == t, self.next_partner_trap(q) == Some(t), q))
            .collect();
        cands.sort();
        for &(_, _, q) in &cands {
            for target in self.eviction_targets(q, t, park) {
                let parking = !self.rest_room(target);
                let path = shortest_path(
                    self.dev,
                    t,
                    target,
                    |n, is_dest| {
                        if !self.dev.is_trap(n) {
                            true
                        } else if is_dest {
                            if parking {
                                self.occ(n) < self.cap(n)
                            } else {
                                self.rest_room(n)
                            }
                        } else {
                            n != t && self.occ(n) < self.cap(n)
                        }
                    },
                    |_| true,
                    |tr, entry, exit| self.through_swaps(tr, entry, exit, q),
                );
                if let Some(p) = path {
                    self.emit_path(q, &p);
                    return true;
                }
            }
        }
        false
    }

    /// Step 9: restore one free slot in every trap. When over-full traps block
    /// each other, an ion is parked in any trap with room and the loop retries.
    fn evict(&mut self) -> Result<()> {
        let mut parks = 0;
        let park_limit = 4 * self.movable.len() + self.dev.components.len();
        loop {
            let over: Vec<ComponentId> = self
                .dev
                .traps()
                .into_iter()
                .filter(|&t| self.occ(t) + 1 > self.cap(t))
                .collect();
            let Some(&first) = over.first() else {
                return Ok(());
            };
            let mut progressed = false;
            for &t in &over {
                while self.occ(t) + 1 > self.cap(t) && self.evict_one(t, false) {
                    progressed = true;
                }
            }
            if progressed {
                continue;
            }
            if parks < park_limit && over.iter().any(|&t| self.evict_one(t, true)) {
                parks += 1;
                continue;
            }
            let q = self.chains[first.index()]
                .iter()
                .copied()
                .find(|q| self.movable[q.index()])
                .unwrap_or(QubitId(u32::MAX));
            return Err(Error::Unroutable {
                qubit: q,
                trap: first.0,
                reason: "no trap with a free slot is reachable for eviction".into(),
            });
        }
    }
}

/// Route a native circuit on a device. `movable[q]` marks ions that may be
/// shuttled (ancillas); all others stay in their home traps.
pub fn route_circuit(
    native: &NativeCircuit,
    mapping: &Mapping,
    device: &QccdDevice,
    movable: &[bool],
    opts: RouteOptions,
) -> Result<OpStream> {
    let n = native.num_qubits;
    if mapping.qubit_trap.len() != n || movable.len() != n {
        return Err(Error::Config(format!(
            "mapping covers {} qubits, movable flags {}, circuit {n}",
            mapping.qubit_trap.len(),
            movable.len()
        )));
    }
    let mut chains = vec![Vec::new(); device.components.len()];
    for t in device.traps() {
        chains[t.index()] = mapping.residents(t);
        if chains[t.index()].len() > device.capacity_of(t) {
            return Err(Error::InvalidDevice(format!("initial mapping overfills trap {t}")));
        }
    }
    let mut queues = vec![VecDeque::new(); n];
    for (i, op) in native.ops.iter().enumerate() {
        for q in op.gate.qubits() {
            queues[q.index()].push_back(i);
        }
    }
    let initial_chains = device
        .traps()
        .into_iter()
        .map(|t| (t, chains[t.index()].clone()))
        .collect();
    let mut r = Router {
        dev: device,
        native,
        movable,
        home: mapping.qubit_trap.clone(),
        at: mapping.qubit_trap.clone(),
        chains,
        queues,
        ops: Vec::with_capacity(native.ops.len() * 2),
        last: HashMap::new(),
        crossings: vec![0; device.components.len()],
        pass: 0,
        opts,
    };
    let mut pass_boundaries = Vec::new();
    while r.queues.iter().any(|q| !q.is_empty()) {
        let before = r.ops.len();
        r.run_local();
        let (_, deferred) = r.route_ready()?;
        r.run_local();
        r.evict()?;
        if r.ops.len() == before {
            let (q, t) = deferred.unwrap_or((QubitId(u32::MAX), ComponentId(u32::MAX)));
            return Err(Error::Unroutable {
                qubit: q,
                trap: t.0,
                reason: "no progress over a full pass".into(),
            });
        }
        pass_boundaries.push(r.ops.len());
        r.pass += 1;
    }
    Ok(OpStream {
        num_qubits: n,
        ops: r.ops,
        pass_boundaries,
        initial_chains,
    })
}
