use proptest::prelude::*;
use qccd::codes::{build_layout, CodeKind};
use qccd::device::{build_device, code_trap_sites, device_for_code, DeviceShape, Topology, Wiring};
use qccd::place::{cluster_qubits, hungarian, map_clusters, place};

fn permutations(k: usize) -> Vec<Vec<usize>> {
    if k == 0 {
        return vec![vec![]];
    }
    let mut out = Vec::new();
    for p in permutations(k - 1) {
        for i in 0..=p.len() {
            let mut q = p.clone();
            q.insert(i, k - 1);
            out.push(q);
        }
    }
    out
}

fn brute_force(cost: &[Vec<f64>]) -> f64 {
    permutations(cost.len())
        .iter()
        .map(|p| p.iter().enumerate().map(|(i, &j)| cost[i][j]).sum::<f64>())
        .fold(f64::INFINITY, f64::min)
}

proptest! {
    #[test]
    fn hungarian_equals_factorial_search(k in 1usize..=6, seed in proptest::collection::vec(0u32..1000, 36)) {
        let cost: Vec<Vec<f64>> = (0..k)
            .map(|i| (0..k).map(|j| seed[i * 6 + j] as f64 / 7.0).collect())
            .collect();
        let (assign, total) = hungarian::solve(&cost);
        let mut seen = assign.clone();
        seen.sort();
        seen.dedup();
        prop_assert_eq!(seen.len(), k);
        prop_assert!((total - brute_force(&cost)).abs() < 1e-9);
    }
}

#[test]
fn cluster_mapping_is_exact_for_small_k() {
    // Clusters onto exactly k traps: the chosen cost must be the permutation optimum.
    for (kind, d, cap) in [
        (CodeKind::RotatedSurface, 3, 5),
        (CodeKind::RotatedSurface, 4, 9),
        (CodeKind::RotatedSurface, 3, 4),
        (CodeKind::Repetition, 4, 3),
        (CodeKind::UnrotatedSurface, 2, 4),
    ] {
        let l = build_layout(kind, d).unwrap();
        let c = cluster_qubits(&l, cap).unwrap();
        let k = c.clusters.len();
        assert!(k <= 6);
        let dev = build_device(Topology::Grid, DeviceShape::Traps(k), cap, Wiring::Standard).unwrap();
        let m = map_clusters(&l, &c, &dev).unwrap();
        // Rebuild the same cost matrix independently.
        let sites = code_trap_sites(&l);
        let cents: Vec<(f64, f64)> = c
            .clusters
            .iter()
            .map(|cl| {
                let n = cl.len() as f64;
                (
                    cl.iter().map(|q| sites[q.index()].0 as f64).sum::<f64>() / n,
                    cl.iter().map(|q| sites[q.index()].1 as f64).sum::<f64>() / n,
                )
            })
            .collect();
        let traps = dev.traps();
        let pos: Vec<(f64, f64)> = traps.iter().map(|&t| dev.position(t).unwrap()).collect();
        let fit = |v: f64, lo: f64, hi: f64, a: f64, b: f64| if hi - lo < 1e-12 { (a + b) / 2.0 } else { a + (v - lo) / (hi - lo) * (b - a) };
        let minmax = |v: Vec<f64>| (v.iter().cloned().fold(f64::INFINITY, f64::min), v.iter().cloned().fold(f64::NEG_INFINITY, f64::max));
        let (sx0, sx1) = minmax(cents.iter().map(|c| c.0).collect());
        let (sy0, sy1) = minmax(cents.iter().map(|c| c.1).collect());
        let (tx0, tx1) = minmax(pos.iter().map(|c| c.0).collect());
        let (ty0, ty1) = minmax(pos.iter().map(|c| c.1).collect());
        let cost: Vec<Vec<f64>> = cents
            .iter()
            .map(|&(x, y)| {
                let (fx, fy) = (fit(x, sx0, sx1, tx0, tx1), fit(y, sy0, sy1, ty0, ty1));
                pos.iter().map(|&(px, py)| ((fx - px).powi(2) + (fy - py).powi(2)).sqrt()).collect()
            })
            .collect();
        assert!((m.cost - brute_force(&cost)).abs() < 1e-9, "{kind} d={d} cap={cap}");
    }
}

#[test]
fn placement_is_deterministic_and_respects_rest_occupancy() {
    for kind in [CodeKind::Repetition, CodeKind::RotatedSurface, CodeKind::UnrotatedSurface] {
        for d in [2, 3, 5] {
            for cap in [2, 3, 5, 12] {
                for topo in [Topology::Grid, Topology::Linear, Topology::Switch] {
                    let l = build_layout(kind, d).unwrap();
                    let dev = device_for_code(&l, cap, topo, Wiring::Standard).unwrap();
                    let a = place(&l, &dev).unwrap();
                    let b = place(&l, &dev).unwrap();
                    assert_eq!(a, b);
                    for t in dev.traps() {
                        assert!(a.residents(t).len() <= cap - 1);
                    }
                }
            }
        }
    }
}
