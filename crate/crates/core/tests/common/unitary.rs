//! Dense-matrix reference semantics for small circuits.

use num_complex::Complex64 as C;
use qccd::codes::LogicalGate;
use qccd::translate::{Axis, NativeGate};

pub type Mat = Vec<Vec<C>>;

pub fn identity(dim: usize) -> Mat {
    (0..dim)
        .map(|i| (0..dim).map(|j| if i == j { C::new(1.0, 0.0) } else { C::new(0.0, 0.0) }).collect())
        .collect()
}

pub fn matmul(a: &Mat, b: &Mat) -> Mat {
    let n = a.len();
    let mut out = vec![vec![C::new(0.0, 0.0); n]; n];
    for i in 0..n {
        for k in 0..n {
            if a[i][k] == C::new(0.0, 0.0) {
                continue;
            }
            for j in 0..n {
                out[i][j] += a[i][k] * b[k][j];
            }
        }
    }
    out
}

/// Embed a gate given as a function on basis states of its qubits.
/// Qubit 0 is the most significant bit.
fn embed(n: usize, qubits: &[usize], local: &Mat) -> Mat {
    let dim = 1 << n;
    let k = qubits.len();
    let mut out = vec![vec![C::new(0.0, 0.0); dim]; dim];
    let bit = |state: usize, q: usize| (state >> (n - 1 - q)) & 1;
    for col in 0..dim {
        let mut lc = 0;
        for &q in qubits {
            lc = (lc << 1) | bit(col, q);
        }
        for lr in 0..(1 << k) {
            let amp = local[lr][lc];
            if amp == C::new(0.0, 0.0) {
                continue;
            }
            let mut row = col;
            for (i, &q) in qubits.iter().enumerate() {
                let b = (lr >> (k - 1 - i)) & 1;
                let mask = 1 << (n - 1 - q);
                row = if b == 1 { row | mask } else { row & !mask };
            }
            out[row][col] += amp;
        }
    }
    out
}

fn rotation(axis: Axis, theta: f64) -> Mat {
    let c = C::new((theta / 2.0).cos(), 0.0);
    let s = (theta / 2.0).sin();
    let z = C::new(0.0, 0.0);
    match axis {
        Axis::X => vec![vec![c, C::new(0.0, -s)], vec![C::new(0.0, -s), c]],
        Axis::Y => vec![vec![c, C::new(-s, 0.0)], vec![C::new(s, 0.0), c]],
        Axis::Z => vec![
            vec![C::new((theta / 2.0).cos(), -(theta / 2.0).sin()), z],
            vec![z, C::new((theta / 2.0).cos(), (theta / 2.0).sin())],
        ],
    }
}

fn ms(theta: f64) -> Mat {
    let c = C::new((theta / 2.0).cos(), 0.0);
    let s = C::new(0.0, -(theta / 2.0).sin());
    let z = C::new(0.0, 0.0);
    vec![
        vec![c, z, z, s],
        vec![z, c, s, z],
        vec![z, s, c, z],
        vec![s, z, z, c],
    ]
}

pub fn logical_unitary(n: usize, gates: &[LogicalGate]) -> Mat {
    let h = std::f64::consts::FRAC_1_SQRT_2;
    let one = C::new(1.0, 0.0);
    let z = C::new(0.0, 0.0);
    let hm = vec![vec![C::new(h, 0.0), C::new(h, 0.0)], vec![C::new(h, 0.0), C::new(-h, 0.0)]];
    let cx = vec![
        vec![one, z, z, z],
        vec![z, one, z, z],
        vec![z, z, z, one],
        vec![z, z, one, z],
    ];
    let mut u = identity(1 << n);
    for g in gates {
        let step = match *g {
            LogicalGate::H { q } => embed(n, &[q.index()], &hm),
            LogicalGate::Cnot { control, target } => embed(n, &[control.index(), target.index()], &cx),
            _ => panic!("non-unitary gate in oracle"),
        };
        u = matmul(&step, &u);
    }
    u
}

pub fn native_unitary(n: usize, gates: &[NativeGate]) -> Mat {
    let mut u = identity(1 << n);
    for g in gates {
        let step = match *g {
            NativeGate::Rotation { q, axis, angle } => embed(n, &[q.index()], &rotation(axis, angle)),
            NativeGate::Ms { a, b, angle } => embed(n, &[a.index(), b.index()], &ms(angle)),
            _ => panic!("non-unitary gate in oracle"),
        };
        u = matmul(&step, &u);
    }
    u
}

/// Max entrywise deviation after removing the best global phase.
pub fn phase_distance(a: &Mat, b: &Mat) -> f64 {
    let n = a.len();
    let mut phase = None;
    'outer: for i in 0..n {
        for j in 0..n {
            if b[i][j].norm() > 1e-6 {
                phase = Some(a[i][j] / b[i][j]);
                break 'outer;
            }
        }
    }
    let Some(p) = phase else { return f64::INFINITY };
    let mut worst: f64 = (p.norm() - 1.0).abs();
    for i in 0..n {
        for j in 0..n {
            worst = worst.max((a[i][j] - p * b[i][j]).norm());
        }
    }
    worst
}
