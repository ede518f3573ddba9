//! Qubit placement: balanced geometric clustering, then cluster-to-trap matching.

pub mod hungarian;

use serde::{Deserialize, Serialize};

use crate::codes::{CodeLayout, QubitId};
use crate::device::{cluster_size, code_trap_sites, ComponentId, QccdDevice};
use crate::error::{Error, Result};
use crate::par;

/// Upper bound on candidate trap subsets scored per placement.
pub const MAX_SUBSETS: usize = 10_000;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Clustering {
    pub clusters: Vec<Vec<QubitId>>,
    pub target_size: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Mapping {
    /// Home trap of each qubit, indexed by qubit id.
    pub qubit_trap: Vec<ComponentId>,
    /// Position of each qubit within its trap's chain.
    pub slot: Vec<usize>,
    pub cluster_trap: Vec<ComponentId>,
    pub cost: f64,
}

impl Mapping {
    pub fn trap_of(&self, q: QubitId) -> ComponentId {
        self.qubit_trap[q.index()]
    }

    /// Ions resident in `trap`, in slot order.
    pub fn residents(&self, trap: ComponentId) -> Vec<QubitId> {
        let mut qs: Vec<(usize, QubitId)> = self
            .qubit_trap
            .iter()
            .enumerate()
            .filter(|(_, &t)| t == trap)
            .map(|(i, _)| (self.slot[i], QubitId(i as u32)))
            .collect();
        qs.sort();
        qs.into_iter().map(|(_, q)| q).collect()
    }
}

/// Sizes of `k` near-equal parts of `n`, larger parts first.
fn even_parts(n: usize, k: usize) -> Vec<usize> {
    (0..k).map(|i| n / k + usize::from(i < n % k)).collect()
}

type Point = (QubitId, f64, f64);

fn bisect(mut pts: Vec<Point>, k: usize, x_axis: bool, out: &mut Vec<Vec<QubitId>>) {
    if k <= 1 || pts.len() <= 1 {
        let mut ids: Vec<QubitId> = pts.into_iter().map(|p| p.0).collect();
        ids.sort();
        out.push(ids);
        return;
    }
    let parts = even_parts(pts.len(), k);
    let k1 = k.div_ceil(2);
    let n1: usize = parts[..k1].iter().sum();
    pts.sort_by(|a, b| {
        let ka = if x_axis { (a.1, a.2) } else { (a.2, a.1) };
        let kb = if x_axis { (b.1, b.2) } else { (b.2, b.1) };
        ka.partial_cmp(&kb).unwrap().then(a.0.cmp(&b.0))
    });
    let rest = pts.split_off(n1);
    bisect(pts, k1, !x_axis, out);
    bisect(rest, k - k1, !x_axis, out);
}

/// Recursive median bisection of the code layout into clusters of at most
/// `capacity - 1` qubits.
pub fn cluster_qubits(layout: &CodeLayout, capacity: usize) -> Result<Clustering> {
    if capacity < 2 {
        return Err(Error::InvalidCapacity(capacity));
    }
    let target = cluster_size(capacity);
    let n = layout.num_qubits();
    let k = n.div_ceil(target);
    let pts: Vec<Point> = layout
        .qubits
        .iter()
        .map(|q| (q.id, q.pos.x as f64, q.pos.y as f64))
        .collect();
    let mut clusters = Vec::with_capacity(k);
    // Split the longer side first.
    let xs = layout.qubits.iter().map(|q| q.pos.x);
    let ys = layout.qubits.iter().map(|q| q.pos.y);
    let span = |it: &mut dyn Iterator<Item = i32>| {
        let v: Vec<i32> = it.collect();
        v.iter().max().unwrap_or(&0) - v.iter().min().unwrap_or(&0)
    };
    let x_first = span(&mut xs.into_iter()) >= span(&mut ys.into_iter());
    bisect(pts, k, x_first, &mut clusters);
    Ok(Clustering {
        clusters,
        target_size: target,
    })
}

#[derive(Debug, Clone)]
struct Subset {
    traps: Vec<ComponentId>,
}

fn trap_positions(device: &QccdDevice) -> Vec<(ComponentId, (f64, f64))> {
    device
        .traps()
        .into_iter()
        .map(|t| (t, device.position(t).unwrap_or((0.0, 0.0))))
        .collect()
}

/// Axis-aligned rectangles of traps containing the device centroid and
/// holding between `k` and `2k` traps.
fn candidate_subsets(device: &QccdDevice, k: usize) -> Vec<Subset> {
    let traps = trap_positions(device);
    if traps.len() == k {
        return vec![Subset {
            traps: traps.iter().map(|t| t.0).collect(),
        }];
    }
    let n = traps.len() as f64;
    let cx = traps.iter().map(|t| t.1 .0).sum::<f64>() / n;
    let cy = traps.iter().map(|t| t.1 .1).sum::<f64>() / n;
    let mut xs: Vec<f64> = traps.iter().map(|t| t.1 .0).collect();
    let mut ys: Vec<f64> = traps.iter().map(|t| t.1 .1).collect();
    for v in [&mut xs, &mut ys] {
        v.sort_by(|a, b| a.partial_cmp(b).unwrap());
        v.dedup();
    }
    let mut out = Vec::new();
    'search: for (i0, &x0) in xs.iter().enumerate() {
        if x0 > cx {
            break;
        }
        for &x1 in &xs[i0..] {
            if x1 < cx {
                continue;
            }
            for (j0, &y0) in ys.iter().enumerate() {
                if y0 > cy {
                    break;
                }
                for &y1 in &ys[j0..] {
                    if y1 < cy {
                        continue;
                    }
                    let inside: Vec<ComponentId> = traps
                        .iter()
                        .filter(|(_, (x, y))| *x >= x0 && *x <= x1 && *y >= y0 && *y <= y1)
                        .map(|t| t.0)
                        .collect();
                    if inside.len() >= k && inside.len() <= 2 * k {
                        out.push(Subset { traps: inside });
                        if out.len() >= MAX_SUBSETS {
                            break 'search;
                        }
                    }
                }
            }
        }
    }
    if out.is_empty() {
        out.push(Subset {
            traps: traps.iter().map(|t| t.0).collect(),
        });
    }
    out
}

fn bbox(points: impl Iterator<Item = (f64, f64)>) -> (f64, f64, f64, f64) {
    let mut b = (f64::INFINITY, f64::INFINITY, f64::NEG_INFINITY, f64::NEG_INFINITY);
    for (x, y) in points {
        b.0 = b.0.min(x);
        b.1 = b.1.min(y);
        b.2 = b.2.max(x);
        b.3 = b.3.max(y);
    }
    b
}

fn rescale(v: f64, lo: f64, hi: f64, tlo: f64, thi: f64) -> f64 {
    if hi - lo < 1e-12 {
        (tlo + thi) / 2.0
    } else {
        tlo + (v - lo) / (hi - lo) * (thi - tlo)
    }
}

fn score(
    device: &QccdDevice,
    centroids: &[(f64, f64)],
    subset: &Subset,
) -> (f64, Vec<usize>) {
    let pos: Vec<(f64, f64)> = subset
        .traps
        .iter()
        .map(|&t| device.position(t).unwrap_or((0.0, 0.0)))
        .collect();
    let (sx0, sy0, sx1, sy1) = bbox(centroids.iter().copied());
    let (tx0, ty0, tx1, ty1) = bbox(pos.iter().copied());
    let cost: Vec<Vec<f64>> = centroids
        .iter()
        .map(|&(x, y)| {
            let fx = rescale(x, sx0, sx1, tx0, tx1);
            let fy = rescale(y, sy0, sy1, ty0, ty1);
            pos.iter().map(|&(px, py)| ((fx - px).powi(2) + (fy - py).powi(2)).sqrt()).collect()
        })
        .collect();
    let (assign, total) = hungarian::solve(&cost);
    (total, assign)
}

/// Match clusters to traps, minimising total centroid-to-trap distance over
/// candidate trap subsets.
pub fn map_clusters(layout: &CodeLayout, clustering: &Clustering, device: &QccdDevice) -> Result<Mapping> {
    let k = clustering.clusters.len();
    let n_traps = device.traps().len();
    if n_traps < k {
        return Err(Error::InsufficientTraps {
            traps: n_traps,
            clusters: k,
        });
    }
    // Cluster centroids in trap-lattice units.
    let sites = code_trap_sites(layout);
    let centroids: Vec<(f64, f64)> = clustering
        .clusters
        .iter()
        .map(|c| {
            let n = c.len().max(1) as f64;
            let sx: f64 = c.iter().map(|q| sites[q.index()].0 as f64).sum();
            let sy: f64 = c.iter().map(|q| sites[q.index()].1 as f64).sum();
            (sx / n, sy / n)
        })
        .collect();
    let subsets = candidate_subsets(device, k);
    let scored = par::map(&subsets, |s| score(device, &centroids, s));
    let (best, (cost, assign)) = scored
        .into_iter()
        .enumerate()
        .min_by(|(ia, a), (ib, b)| a.0.partial_cmp(&b.0).unwrap().then(ia.cmp(ib)))
        .expect("at least one subset");
    let subset = &subsets[best];
    let cluster_trap: Vec<ComponentId> = assign.iter().map(|&j| subset.traps[j]).collect();
    let mut qubit_trap = vec![ComponentId(0); layout.num_qubits()];
    let mut slot = vec![0; layout.num_qubits()];
    for (ci, cluster) in clustering.clusters.iter().enumerate() {
        let mut members = cluster.clone();
        members.sort();
        for (s, q) in members.into_iter().enumerate() {
            qubit_trap[q.index()] = cluster_trap[ci];
            slot[q.index()] = s;
        }
    }
    Ok(Mapping {
        qubit_trap,
        slot,
        cluster_trap,
        cost,
    })
}

/// Cluster and map in one step using the device's trap capacity.
pub fn place(layout: &CodeLayout, device: &QccdDevice) -> Result<Mapping> {
    let clustering = cluster_qubits(layout, device.capacity)?;
    map_clusters(layout, &clustering, device)
}
