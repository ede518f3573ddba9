//! QEC code layouts, syndrome-extraction circuits and the weighted interaction
//! graph used by placement.
//!
//! Coordinates use the doubled lattice: rotated-surface data qubits sit at
//! even/even sites and ancillas at odd/odd sites, so every ancilla is within
//! Chebyshev distance one of the data qubits it checks.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct QubitId(pub u32);

impl QubitId {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

impl fmt::Display for QubitId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "q{}", self.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CodeKind {
    Repetition,
    RotatedSurface,
    UnrotatedSurface,
}

impl CodeKind {
    /// Single-letter tag used by the `CODE,d,capacity,TOPO` shorthand.
    pub fn short(self) -> &'static str {
        match self {
            CodeKind::Repetition => "R",
            CodeKind::RotatedSurface => "S",
            CodeKind::UnrotatedSurface => "U",
        }
    }
}

impl fmt::Display for CodeKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            CodeKind::Repetition => "repetition",
            CodeKind::RotatedSurface => "rotated_surface",
            CodeKind::UnrotatedSurface => "unrotated_surface",
        };
        f.write_str(s)
    }
}

impl FromStr for CodeKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "r" | "rep" | "repetition" => Ok(CodeKind::Repetition),
            "s" | "rotated" | "rotated_surface" | "surface" => Ok(CodeKind::RotatedSurface),
            "u" | "unrotated" | "unrotated_surface" => Ok(CodeKind::UnrotatedSurface),
            other => Err(Error::UnknownCode(other.to_string())),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Role {
    Data,
    AncillaX,
    AncillaZ,
}

impl Role {
    pub fn is_ancilla(self) -> bool {
        !matches!(self, Role::Data)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Coord {
    pub x: i32,
    pub y: i32,
}

impl Coord {
    pub fn new(x: i32, y: i32) -> Self {
        Coord { x, y }
    }

    pub fn chebyshev(self, other: Coord) -> i32 {
        (self.x - other.x).abs().max((self.y - other.y).abs())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Qubit {
    pub id: QubitId,
    pub role: Role,
    pub pos: Coord,
}

/// One stabilizer: its ancilla and the data qubits it touches, in CNOT order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Cell {
    pub ancilla: QubitId,
    pub data: Vec<QubitId>,
}

/// Direction from an ancilla to a data neighbour, in doubled coordinates.
pub type Offset = (i32, i32);

/// Neighbour visiting order for X- and Z-type checks. Entry `i` is the
/// direction visited in CNOT layer `i`; absent neighbours leave the layer idle.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckSchedule {
    pub x_order: Vec<Offset>,
    pub z_order: Vec<Offset>,
}

const NW: Offset = (-1, -1);
const NE: Offset = (1, -1);
const SW: Offset = (-1, 1);
const SE: Offset = (1, 1);
const N: Offset = (0, -1);
const S: Offset = (0, 1);
const W: Offset = (-1, 0);
const E: Offset = (1, 0);

impl CheckSchedule {
    /// Hook-safe N/Z ordering for the rotated code, N-W-E-S for the unrotated
    /// code and west-then-east for the repetition chain.
    pub fn standard(kind: CodeKind) -> Self {
        match kind {
            CodeKind::RotatedSurface => CheckSchedule {
                z_order: vec![NW, NE, SW, SE],
                x_order: vec![NW, SW, NE, SE],
            },
            CodeKind::UnrotatedSurface => CheckSchedule {
                z_order: vec![N, W, E, S],
                x_order: vec![N, W, E, S],
            },
            CodeKind::Repetition => CheckSchedule {
                z_order: vec![W, E],
                x_order: vec![W, E],
            },
        }
    }

    fn order(&self, role: Role) -> &[Offset] {
        match role {
            Role::AncillaX => &self.x_order,
            _ => &self.z_order,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CodeLayout {
    pub kind: CodeKind,
    pub distance: usize,
    pub qubits: Vec<Qubit>,
    pub cells: Vec<Cell>,
    pub schedule: CheckSchedule,
}

impl CodeLayout {
    pub fn num_qubits(&self) -> usize {
        self.qubits.len()
    }

    pub fn qubit(&self, id: QubitId) -> &Qubit {
        &self.qubits[id.index()]
    }

    pub fn data_qubits(&self) -> impl Iterator<Item = &Qubit> {
        self.qubits.iter().filter(|q| q.role == Role::Data)
    }

    pub fn ancillas(&self) -> impl Iterator<Item = &Qubit> {
        self.qubits.iter().filter(|q| q.role.is_ancilla())
    }

    pub fn is_data(&self, id: QubitId) -> bool {
        self.qubit(id).role == Role::Data
    }

    /// CNOT layer of each (ancilla, data) pair of a cell, following the schedule.
    fn layered_cell(&self, cell: &Cell) -> Vec<(usize, QubitId)> {
        let anc = self.qubit(cell.ancilla);
        let order = self.schedule.order(anc.role);
        let mut out: Vec<(usize, QubitId)> = cell
            .data
            .iter()
            .map(|&d| {
                let p = self.qubit(d).pos;
                let off = (p.x - anc.pos.x, p.y - anc.pos.y);
                let layer = order.iter().position(|&o| o == off).unwrap_or(usize::MAX);
                (layer, d)
            })
            .collect();
        out.sort();
        out
    }

    /// Number of CNOT layers in one round.
    pub fn layers(&self) -> usize {
        self.schedule.x_order.len().max(self.schedule.z_order.len())
    }

    /// Cells whose ancilla has the given role.
    pub fn cells_of(&self, role: Role) -> impl Iterator<Item = &Cell> {
        self.cells
            .iter()
            .filter(move |c| self.qubit(c.ancilla).role == role)
    }

    /// Support of a logical Z operator: the smallest data row or column that
    /// overlaps every X check an even number of times.
    pub fn logical_z(&self) -> Vec<QubitId> {
        let mut lines: BTreeMap<(bool, i32), Vec<QubitId>> = BTreeMap::new();
        for q in self.data_qubits() {
            lines.entry((false, q.pos.y)).or_default().push(q.id);
            lines.entry((true, q.pos.x)).or_default().push(q.id);
        }
        lines
            .into_values()
            .filter(|line| {
                self.cells_of(Role::AncillaX)
                    .all(|c| c.data.iter().filter(|d| line.contains(d)).count() % 2 == 0)
            })
            .min_by_key(|line| (line.len(), line.clone()))
            .map(|mut line| {
                line.sort();
                line
            })
            .unwrap_or_default()
    }
}

/// Build the layout of a code of the given kind and distance.
pub fn build_layout(kind: CodeKind, distance: usize) -> Result<CodeLayout> {
    build_layout_with(kind, distance, CheckSchedule::standard(kind))
}

pub fn build_layout_with(
    kind: CodeKind,
    distance: usize,
    schedule: CheckSchedule,
) -> Result<CodeLayout> {
    if distance < 2 {
        return Err(Error::InvalidDistance(distance));
    }
    let d = distance as i32;
    // (role, position) of every qubit; ids are assigned after sorting so
    // data qubits come first, each group in row-major order.
    let mut sites: Vec<(Role, Coord)> = Vec::new();
    match kind {
        CodeKind::Repetition => {
            for i in 0..d {
                sites.push((Role::Data, Coord::new(2 * i, 0)));
            }
            for i in 0..d - 1 {
                sites.push((Role::AncillaZ, Coord::new(2 * i + 1, 0)));
            }
        }
        CodeKind::RotatedSurface => {
            for r in 0..d {
                for c in 0..d {
                    sites.push((Role::Data, Coord::new(2 * c, 2 * r)));
                }
            }
            for r in -1..d {
                for c in -1..d {
                    let x_type = (c + r).rem_euclid(2) == 0;
                    let interior = (0..d - 1).contains(&c) && (0..d - 1).contains(&r);
                    let top_bottom = (r == -1 || r == d - 1) && (0..d - 1).contains(&c);
                    let left_right = (c == -1 || c == d - 1) && (0..d - 1).contains(&r);
                    let keep = interior || (top_bottom && x_type) || (left_right && !x_type);
                    if keep {
                        let role = if x_type { Role::AncillaX } else { Role::AncillaZ };
                        sites.push((role, Coord::new(2 * c + 1, 2 * r + 1)));
                    }
                }
            }
        }
        CodeKind::UnrotatedSurface => {
            let n = 2 * d - 1;
            for y in 0..n {
                for x in 0..n {
                    let role = match (x % 2, y % 2) {
                        (0, 0) | (1, 1) => Role::Data,
                        (1, 0) => Role::AncillaX,
                        _ => Role::AncillaZ,
                    };
                    sites.push((role, Coord::new(x, y)));
                }
            }
        }
    }
    sites.sort_by_key(|&(role, pos)| (role.is_ancilla(), pos.y, pos.x));
    let qubits: Vec<Qubit> = sites
        .into_iter()
        .enumerate()
        .map(|(i, (role, pos))| Qubit {
            id: QubitId(i as u32),
            role,
            pos,
        })
        .collect();

    let by_pos: BTreeMap<Coord, QubitId> = qubits.iter().map(|q| (q.pos, q.id)).collect();
    let mut layout = CodeLayout {
        kind,
        distance,
        qubits,
        cells: Vec::new(),
        schedule,
    };
    let neighbourhood: &[Offset] = match kind {
        CodeKind::RotatedSurface => &[NW, NE, SW, SE],
        _ => &[N, W, E, S],
    };
    let mut cells = Vec::new();
    for anc in layout.ancillas() {
        let data = neighbourhood
            .iter()
            .filter_map(|&(dx, dy)| by_pos.get(&Coord::new(anc.pos.x + dx, anc.pos.y + dy)))
            .copied()
            .filter(|&q| layout.qubits[q.index()].role == Role::Data)
            .collect();
        cells.push(Cell {
            ancilla: anc.id,
            data,
        });
    }
    layout.cells = cells;
    let ordered: Vec<Cell> = layout
        .cells
        .iter()
        .map(|c| Cell {
            ancilla: c.ancilla,
            data: layout.layered_cell(c).into_iter().map(|(_, d)| d).collect(),
        })
        .collect();
    layout.cells = ordered;
    Ok(layout)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "gate", rename_all = "snake_case")]
pub enum LogicalGate {
    Reset { q: QubitId },
    H { q: QubitId },
    Cnot { control: QubitId, target: QubitId },
    Measure { q: QubitId },
}

impl LogicalGate {
    pub fn qubits(&self) -> Vec<QubitId> {
        match *self {
            LogicalGate::Reset { q } | LogicalGate::H { q } | LogicalGate::Measure { q } => vec![q],
            LogicalGate::Cnot { control, target } => vec![control, target],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LogicalCircuit {
    pub num_qubits: usize,
    pub gates: Vec<LogicalGate>,
    /// Gate index at which each round starts, followed by the index one past
    /// the end of the last round (`rounds + 1` entries).
    pub round_boundaries: Vec<usize>,
    pub rounds: usize,
    /// True when the circuit is a memory experiment: data reset, rounds, data
    /// readout.
    pub memory: bool,
}

impl LogicalCircuit {
    pub fn cnot_count(&self) -> usize {
        self.gates
            .iter()
            .filter(|g| matches!(g, LogicalGate::Cnot { .. }))
            .count()
    }
}

fn push_round(layout: &CodeLayout, gates: &mut Vec<LogicalGate>) {
    let mut ancillas: Vec<&Qubit> = layout.ancillas().collect();
    ancillas.sort_by_key(|q| q.id);
    for a in &ancillas {
        gates.push(LogicalGate::Reset { q: a.id });
    }
    for a in ancillas.iter().filter(|a| a.role == Role::AncillaX) {
        gates.push(LogicalGate::H { q: a.id });
    }
    let layered: Vec<(Role, QubitId, Vec<(usize, QubitId)>)> = layout
        .cells
        .iter()
        .map(|c| (layout.qubit(c.ancilla).role, c.ancilla, layout.layered_cell(c)))
        .collect();
    for layer in 0..layout.layers() {
        for (role, anc, pairs) in &layered {
            for &(l, data) in pairs {
                if l != layer {
                    continue;
                }
                let gate = match role {
                    Role::AncillaX => LogicalGate::Cnot {
                        control: *anc,
                        target: data,
                    },
                    _ => LogicalGate::Cnot {
                        control: data,
                        target: *anc,
                    },
                };
                gates.push(gate);
            }
        }
    }
    for a in ancillas.iter().filter(|a| a.role == Role::AncillaX) {
        gates.push(LogicalGate::H { q: a.id });
    }
    for a in &ancillas {
        gates.push(LogicalGate::Measure { q: a.id });
    }
}

/// One syndrome-extraction round over every cell of the layout.
pub fn generate_round(layout: &CodeLayout) -> LogicalCircuit {
    let mut gates = Vec::new();
    push_round(layout, &mut gates);
    let n = gates.len();
    LogicalCircuit {
        num_qubits: layout.num_qubits(),
        gates,
        round_boundaries: vec![0, n],
        rounds: 1,
        memory: false,
    }
}

/// Z-basis memory experiment: data reset, `rounds` syndrome rounds, data readout.
pub fn generate_memory_experiment(layout: &CodeLayout, rounds: usize) -> Result<LogicalCircuit> {
    if rounds < 1 {
        return Err(Error::InvalidRounds);
    }
    let mut gates = Vec::new();
    for q in layout.data_qubits() {
        gates.push(LogicalGate::Reset { q: q.id });
    }
    let mut round_boundaries = Vec::with_capacity(rounds + 1);
    for _ in 0..rounds {
        round_boundaries.push(gates.len());
        push_round(layout, &mut gates);
    }
    round_boundaries.push(gates.len());
    for q in layout.data_qubits() {
        gates.push(LogicalGate::Measure { q: q.id });
    }
    Ok(LogicalCircuit {
        num_qubits: layout.num_qubits(),
        gates,
        round_boundaries,
        rounds,
        memory: true,
    })
}

/// Weighted graph of qubit pairs sharing an entangling gate. Pairs entangled
/// earlier in the circuit carry higher weight.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InteractionGraph {
    pub nodes: Vec<QubitId>,
    /// Keyed by `(lo, hi)` with `lo < hi`.
    pub edges: BTreeMap<(QubitId, QubitId), u64>,
}

impl InteractionGraph {
    pub fn weight(&self, a: QubitId, b: QubitId) -> Option<u64> {
        let key = if a < b { (a, b) } else { (b, a) };
        self.edges.get(&key).copied()
    }

    pub fn degree(&self, q: QubitId) -> usize {
        self.edges.keys().filter(|(a, b)| *a == q || *b == q).count()
    }
}

/// Edge weight is `total_gates - index_of_first_shared_gate`.
pub fn interaction_graph(circuit: &LogicalCircuit) -> InteractionGraph {
    let total = circuit.gates.len() as u64;
    let mut edges = BTreeMap::new();
    for (i, g) in circuit.gates.iter().enumerate() {
        if let LogicalGate::Cnot { control, target } = *g {
            let key = if control < target {
                (control, target)
            } else {
                (target, control)
            };
            edges.entry(key).or_insert(total - i as u64);
        }
    }
    InteractionGraph {
        nodes: (0..circuit.num_qubits as u32).map(QubitId).collect(),
        edges,
    }
}

/// JSON document bundling a layout and a circuit (`qubits[]`, `cells[]`, `gates[]`).
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CodeDocument {
    pub kind: CodeKind,
    pub distance: usize,
    pub qubits: Vec<Qubit>,
    pub cells: Vec<Cell>,
    pub gates: Vec<LogicalGate>,
    pub round_boundaries: Vec<usize>,
}

impl CodeDocument {
    pub fn new(layout: &CodeLayout, circuit: &LogicalCircuit) -> Self {
        CodeDocument {
            kind: layout.kind,
            distance: layout.distance,
            qubits: layout.qubits.clone(),
            cells: layout.cells.clone(),
            gates: circuit.gates.clone(),
            round_boundaries: circuit.round_boundaries.clone(),
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("code document serializes")
    }
}
