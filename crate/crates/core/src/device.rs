//! QCCD hardware model: traps, junctions and the segments joining them.

use std::collections::{BTreeMap, VecDeque};
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::codes::{CodeKind, CodeLayout};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ComponentId(pub u32);

impl ComponentId {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

impl fmt::Display for ComponentId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "c{}", self.0)
    }
}

/// Which end of a trap's linear ion chain a segment attaches to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ChainEnd {
    Left,
    Right,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum Component {
    Trap {
        capacity: usize,
        position: (f64, f64),
    },
    Junction {
        position: (f64, f64),
        /// Ions the junction may hold at once.
        capacity: usize,
    },
    Segment {
        a: ComponentId,
        b: ComponentId,
        /// Chain end used when an endpoint is a trap.
        end_a: Option<ChainEnd>,
        end_b: Option<ChainEnd>,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Topology {
    Grid,
    Linear,
    Switch,
    SingleChain,
}

impl Topology {
    pub fn short(self) -> &'static str {
        match self {
            Topology::Grid => "G",
            Topology::Linear => "L",
            Topology::Switch => "X",
            Topology::SingleChain => "C",
        }
    }
}

impl fmt::Display for Topology {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Topology::Grid => "grid",
            Topology::Linear => "linear",
            Topology::Switch => "switch",
            Topology::SingleChain => "single_chain",
        })
    }
}

impl FromStr for Topology {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "g" | "grid" => Ok(Topology::Grid),
            "l" | "linear" => Ok(Topology::Linear),
            "x" | "sw" | "switch" => Ok(Topology::Switch),
            "c" | "chain" | "single" | "single_chain" => Ok(Topology::SingleChain),
            other => Err(Error::UnknownTopology(other.to_string())),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Wiring {
    Standard,
    Wise,
}

impl fmt::Display for Wiring {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Wiring::Standard => "standard",
            Wiring::Wise => "wise",
        })
    }
}

impl FromStr for Wiring {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "standard" | "std" => Ok(Wiring::Standard),
            "wise" => Ok(Wiring::Wise),
            other => Err(Error::UnknownWiring(other.to_string())),
        }
    }
}

/// Requested trap arrangement for [`build_device`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DeviceShape {
    /// `rows x cols` trap lattice (grid only).
    Dims { rows: usize, cols: usize },
    /// Number of traps; grids use the smallest near-square arrangement.
    Traps(usize),
    /// Explicit trap lattice sites `(col, row)`.
    Sites(Vec<(i32, i32)>),
}

/// Declarative device description, e.g. from a TOML or JSON file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DeviceSpec {
    pub topology: Topology,
    pub shape: DeviceShape,
    pub capacity: usize,
    #[serde(default = "standard_wiring")]
    pub wiring: Wiring,
}

fn standard_wiring() -> Wiring {
    Wiring::Standard
}

impl DeviceSpec {
    pub fn build(&self) -> Result<QccdDevice> {
        build_device(self.topology, self.shape.clone(), self.capacity, self.wiring)
    }
}

/// Summary counts used by resource estimation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct DeviceCounts {
    pub n_traps: usize,
    pub n_junctions: usize,
    pub n_segments: usize,
    pub capacity: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QccdDevice {
    pub topology: Topology,
    pub wiring: Wiring,
    pub capacity: usize,
    pub components: Vec<Component>,
    /// For each trap or junction: `(neighbour, segment)` pairs sorted by neighbour id.
    #[serde(skip)]
    adjacency: Vec<Vec<(ComponentId, ComponentId)>>,
}

impl QccdDevice {
    fn new(topology: Topology, wiring: Wiring, capacity: usize, components: Vec<Component>) -> Self {
        let mut dev = QccdDevice {
            topology,
            wiring,
            capacity,
            components,
            adjacency: Vec::new(),
        };
        dev.rebuild_adjacency();
        dev
    }

    /// Recompute adjacency lists, e.g. after deserialization.
    pub fn rebuild_adjacency(&mut self) {
        let mut adj = vec![Vec::new(); self.components.len()];
        for (i, c) in self.components.iter().enumerate() {
            if let Component::Segment { a, b, .. } = *c {
                let s = ComponentId(i as u32);
                adj[a.index()].push((b, s));
                adj[b.index()].push((a, s));
            }
        }
        for list in &mut adj {
            list.sort();
        }
        self.adjacency = adj;
    }

    pub fn component(&self, id: ComponentId) -> &Component {
        &self.components[id.index()]
    }

    pub fn neighbours(&self, id: ComponentId) -> &[(ComponentId, ComponentId)] {
        &self.adjacency[id.index()]
    }

    pub fn is_trap(&self, id: ComponentId) -> bool {
        matches!(self.component(id), Component::Trap { .. })
    }

    pub fn is_junction(&self, id: ComponentId) -> bool {
        matches!(self.component(id), Component::Junction { .. })
    }

    pub fn traps(&self) -> Vec<ComponentId> {
        self.ids_where(|c| matches!(c, Component::Trap { .. }))
    }

    pub fn junctions(&self) -> Vec<ComponentId> {
        self.ids_where(|c| matches!(c, Component::Junction { .. }))
    }

    pub fn segments(&self) -> Vec<ComponentId> {
        self.ids_where(|c| matches!(c, Component::Segment { .. }))
    }

    fn ids_where(&self, f: impl Fn(&Component) -> bool) -> Vec<ComponentId> {
        self.components
            .iter()
            .enumerate()
            .filter(|(_, c)| f(c))
            .map(|(i, _)| ComponentId(i as u32))
            .collect()
    }

    /// Ion limit of a trap, junction or segment.
    pub fn capacity_of(&self, id: ComponentId) -> usize {
        match *self.component(id) {
            Component::Trap { capacity, .. } => capacity,
            Component::Junction { capacity, .. } => capacity,
            Component::Segment { .. } => 1,
        }
    }

    pub fn position(&self, id: ComponentId) -> Option<(f64, f64)> {
        match *self.component(id) {
            Component::Trap { position, .. } | Component::Junction { position, .. } => Some(position),
            Component::Segment { .. } => None,
        }
    }

    /// Chain end of `trap` that `segment` attaches to.
    pub fn segment_end(&self, segment: ComponentId, trap: ComponentId) -> Option<ChainEnd> {
        match *self.component(segment) {
            Component::Segment { a, b, end_a, end_b } => {
                if a == trap {
                    end_a
                } else if b == trap {
                    end_b
                } else {
                    None
                }
            }
            _ => None,
        }
    }

    /// Segment joining two nodes, if any (the lowest id when several exist).
    pub fn segment_between(&self, a: ComponentId, b: ComponentId) -> Option<ComponentId> {
        self.neighbours(a)
            .iter()
            .find(|(n, _)| *n == b)
            .map(|&(_, s)| s)
    }

    pub fn counts(&self) -> DeviceCounts {
        DeviceCounts {
            n_traps: self.traps().len(),
            n_junctions: self.junctions().len(),
            n_segments: self.segments().len(),
            capacity: self.capacity,
        }
    }

    pub fn degree(&self, id: ComponentId) -> usize {
        self.neighbours(id).len()
    }

    /// Hop distances (number of segments) from `from` to every node.
    pub fn bfs_hops(&self, from: ComponentId) -> Vec<Option<usize>> {
        let mut dist = vec![None; self.components.len()];
        dist[from.index()] = Some(0);
        let mut queue = VecDeque::from([from]);
        while let Some(n) = queue.pop_front() {
            let dn = dist[n.index()].unwrap();
            for &(m, _) in self.neighbours(n) {
                if dist[m.index()].is_none() {
                    dist[m.index()] = Some(dn + 1);
                    queue.push_back(m);
                }
            }
        }
        dist
    }

    pub fn is_connected(&self) -> bool {
        let nodes: Vec<ComponentId> = self.ids_where(|c| !matches!(c, Component::Segment { .. }));
        match nodes.first() {
            None => false,
            Some(&first) => {
                let dist = self.bfs_hops(first);
                nodes.iter().all(|n| dist[n.index()].is_some())
            }
        }
    }

    /// Check structural invariants; returns a description of the first violation.
    pub fn validate(&self) -> Result<()> {
        if self.traps().is_empty() {
            return Err(Error::InvalidDevice("device has no traps".into()));
        }
        for (i, c) in self.components.iter().enumerate() {
            match *c {
                Component::Trap { capacity, .. } if capacity < 1 => {
                    return Err(Error::InvalidDevice(format!("trap c{i} has zero capacity")));
                }
                Component::Segment { a, b, .. } => {
                    let bad = |x: ComponentId| matches!(self.component(x), Component::Segment { .. });
                    if a == b || bad(a) || bad(b) {
                        return Err(Error::InvalidDevice(format!("segment c{i} has invalid endpoints")));
                    }
                }
                _ => {}
            }
        }
        if !self.is_connected() {
            return Err(Error::InvalidDevice("component graph is disconnected".into()));
        }
        Ok(())
    }
}

fn near_square(n: usize) -> (usize, usize) {
    let cols = (n as f64).sqrt().ceil() as usize;
    let rows = n.div_ceil(cols);
    (rows, cols)
}

/// Row-major sites for `n` traps on the smallest near-square lattice.
fn near_square_sites(n: usize) -> Vec<(i32, i32)> {
    let (_, cols) = near_square(n);
    (0..n).map(|i| ((i % cols) as i32, (i / cols) as i32)).collect()
}

struct Builder {
    components: Vec<Component>,
}

impl Builder {
    fn push(&mut self, c: Component) -> ComponentId {
        self.components.push(c);
        ComponentId(self.components.len() as u32 - 1)
    }

    fn segment(&mut self, a: ComponentId, end_a: Option<ChainEnd>, b: ComponentId, end_b: Option<ChainEnd>) {
        self.push(Component::Segment { a, b, end_a, end_b });
    }
}

fn grid_components(sites: &[(i32, i32)], capacity: usize) -> Vec<Component> {
    let mut b = Builder {
        components: Vec::new(),
    };
    let mut trap_at: BTreeMap<(i32, i32), ComponentId> = BTreeMap::new();
    let mut ordered: Vec<(i32, i32)> = sites.to_vec();
    ordered.sort_by_key(|&(c, r)| (r, c));
    ordered.dedup();
    for &(c, r) in &ordered {
        let id = b.push(Component::Trap {
            capacity,
            position: (c as f64, r as f64),
        });
        trap_at.insert((c, r), id);
    }
    let min_c = ordered.iter().map(|s| s.0).min().unwrap_or(0);
    let max_c = ordered.iter().map(|s| s.0).max().unwrap_or(0);
    let min_r = ordered.iter().map(|s| s.1).min().unwrap_or(0);
    let max_r = ordered.iter().map(|s| s.1).max().unwrap_or(0);
    // A single row or column has no interior vertices; use its edge vertices.
    let thin = min_c == max_c || min_r == max_r;
    let (vc0, vc1, vr0, vr1) = if thin {
        (min_c - 1, max_c, min_r - 1, max_r)
    } else {
        (min_c, max_c - 1, min_r, max_r - 1)
    };
    let mut junctions: Vec<(ComponentId, (i32, i32))> = Vec::new();
    for vr in vr0..=vr1 {
        for vc in vc0..=vc1 {
            // Vertex between cols vc, vc+1 and rows vr, vr+1.
            let corners = [
                ((vc, vr), ChainEnd::Right),
                ((vc + 1, vr), ChainEnd::Left),
                ((vc, vr + 1), ChainEnd::Right),
                ((vc + 1, vr + 1), ChainEnd::Left),
            ];
            let present: Vec<(ComponentId, ChainEnd)> = corners
                .iter()
                .filter_map(|(site, end)| trap_at.get(site).map(|&t| (t, *end)))
                .collect();
            if present.len() >= 2 {
                let j = b.push(Component::Junction {
                    position: (vc as f64 + 0.5, vr as f64 + 0.5),
                    capacity: 1,
                });
                junctions.push((j, (vc, vr)));
                for (t, end) in present {
                    b.segment(t, Some(end), j, None);
                }
            }
        }
    }
    b.components
}

/// Build a device of the given topology.
pub fn build_device(
    topology: Topology,
    shape: DeviceShape,
    capacity: usize,
    wiring: Wiring,
) -> Result<QccdDevice> {
    if capacity < 1 {
        return Err(Error::InvalidDevice("trap capacity must be at least 1".into()));
    }
    let sites: Vec<(i32, i32)> = match (&shape, topology) {
        (DeviceShape::Dims { rows, cols }, Topology::Grid) => {
            if *rows == 0 || *cols == 0 {
                return Err(Error::InvalidDevice(format!("grid dims {rows}x{cols}")));
            }
            (0..*rows as i32)
                .flat_map(|r| (0..*cols as i32).map(move |c| (c, r)))
                .collect()
        }
        (DeviceShape::Dims { rows, cols }, _) => {
            if *rows == 0 || *cols == 0 {
                return Err(Error::InvalidDevice(format!("dims {rows}x{cols}")));
            }
            near_square_sites(rows * cols)
        }
        (DeviceShape::Traps(n), _) => {
            if *n == 0 {
                return Err(Error::InvalidDevice("zero traps requested".into()));
            }
            if topology == Topology::Linear {
                (0..*n as i32).map(|i| (i, 0)).collect()
            } else {
                near_square_sites(*n)
            }
        }
        (DeviceShape::Sites(s), _) => {
            if s.is_empty() {
                return Err(Error::InvalidDevice("zero traps requested".into()));
            }
            s.clone()
        }
    };
    let n = sites.len();
    let components = match topology {
        Topology::Grid => grid_components(&sites, capacity),
        Topology::Linear => {
            let mut b = Builder {
                components: Vec::new(),
            };
            let mut ordered = sites.clone();
            ordered.sort_by_key(|&(c, r)| (r, c));
            let traps: Vec<ComponentId> = ordered
                .iter()
                .enumerate()
                .map(|(i, _)| {
                    b.push(Component::Trap {
                        capacity,
                        position: (i as f64, 0.0),
                    })
                })
                .collect();
            for w in traps.windows(2) {
                b.segment(w[0], Some(ChainEnd::Right), w[1], Some(ChainEnd::Left));
            }
            b.components
        }
        Topology::Switch => {
            let mut b = Builder {
                components: Vec::new(),
            };
            let mut ordered = sites.clone();
            ordered.sort_by_key(|&(c, r)| (r, c));
            let traps: Vec<ComponentId> = ordered
                .iter()
                .map(|&(c, r)| {
                    b.push(Component::Trap {
                        capacity,
                        position: (c as f64, r as f64),
                    })
                })
                .collect();
            let (cx, cy) = centroid(ordered.iter().map(|&(c, r)| (c as f64, r as f64)));
            if traps.len() > 1 {
                let hub = b.push(Component::Junction {
                    position: (cx, cy),
                    capacity: switch_ports(traps.len()),
                });
                for t in traps {
                    b.segment(t, Some(ChainEnd::Right), hub, None);
                }
            }
            b.components
        }
        Topology::SingleChain => {
            if n != 1 {
                return Err(Error::InvalidDevice("single_chain devices hold exactly one trap".into()));
            }
            vec![Component::Trap {
                capacity,
                position: (0.0, 0.0),
            }]
        }
    };
    let dev = QccdDevice::new(topology, wiring, capacity, components);
    dev.validate()?;
    Ok(dev)
}

/// Concurrent transits through an n-way switch: one per disjoint port pair.
pub fn switch_ports(n_traps: usize) -> usize {
    (n_traps / 2).max(1)
}

fn centroid(points: impl Iterator<Item = (f64, f64)>) -> (f64, f64) {
    let (mut sx, mut sy, mut n) = (0.0, 0.0, 0usize);
    for (x, y) in points {
        sx += x;
        sy += y;
        n += 1;
    }
    if n == 0 {
        (0.0, 0.0)
    } else {
        (sx / n as f64, sy / n as f64)
    }
}

/// Ions per trap at rest for a given capacity.
pub fn cluster_size(capacity: usize) -> usize {
    capacity.saturating_sub(1).max(1)
}

/// One trap lattice site per qubit, arranged so every ancilla lands in a trap
/// sharing a junction with each data qubit it checks.
pub fn code_trap_sites(layout: &CodeLayout) -> Vec<(i32, i32)> {
    let ymin = layout.qubits.iter().map(|q| q.pos.y).min().unwrap_or(0);
    match layout.kind {
        CodeKind::Repetition | CodeKind::UnrotatedSurface => {
            let xmin = layout.qubits.iter().map(|q| q.pos.x).min().unwrap_or(0);
            layout
                .qubits
                .iter()
                .map(|q| (q.pos.x - xmin, q.pos.y - ymin))
                .collect()
        }
        CodeKind::RotatedSurface => {
            // Data rows keep x/2; ancilla rows are shifted by one column when
            // they carry a left-boundary check so every row spans d columns.
            let mut shift: BTreeMap<i32, i32> = BTreeMap::new();
            for q in &layout.qubits {
                let col = q.pos.x.div_euclid(2);
                let e = shift.entry(q.pos.y).or_insert(0);
                if col < 0 {
                    *e = 1;
                }
            }
            layout
                .qubits
                .iter()
                .map(|q| (q.pos.x.div_euclid(2) + shift[&q.pos.y], q.pos.y - ymin))
                .collect()
        }
    }
}

/// Device sized for a code: `ceil(N / (capacity - 1))` traps (one trap per
/// qubit at capacity 2), or a single chain holding every qubit.
pub fn device_for_code(
    layout: &CodeLayout,
    capacity: usize,
    topology: Topology,
    wiring: Wiring,
) -> Result<QccdDevice> {
    let n = layout.num_qubits();
    if topology == Topology::SingleChain {
        return build_device(topology, DeviceShape::Traps(1), n.max(capacity).max(2) + 1, wiring);
    }
    if capacity < 2 {
        return Err(Error::InvalidCapacity(capacity));
    }
    let per_trap = cluster_size(capacity);
    let traps = n.div_ceil(per_trap);
    let shape = match topology {
        Topology::Linear => DeviceShape::Traps(traps),
        _ if per_trap == 1 => DeviceShape::Sites(code_trap_sites(layout)),
        _ => DeviceShape::Traps(traps),
    };
    build_device(topology, shape, capacity, wiring)
}
