//! Aaronson–Gottesman tableau simulator for the subset of Stim text the
//! emitter produces. Noise lines are ignored unless a sampler is supplied.

use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

pub struct Tableau {
    n: usize,
    x: Vec<Vec<bool>>,
    z: Vec<Vec<bool>>,
    r: Vec<bool>,
}

fn g(x1: bool, z1: bool, x2: bool, z2: bool) -> i32 {
    match (x1, z1) {
        (false, false) => 0,
        (true, true) => z2 as i32 - x2 as i32,
        (true, false) => z2 as i32 * (2 * x2 as i32 - 1),
        (false, true) => x2 as i32 * (1 - 2 * z2 as i32),
    }
}

impl Tableau {
    pub fn new(n: usize) -> Self {
        let rows = 2 * n + 1;
        let mut x = vec![vec![false; n]; rows];
        let mut z = vec![vec![false; n]; rows];
        for i in 0..n {
            x[i][i] = true;
            z[i + n][i] = true;
        }
        Tableau { n, x, z, r: vec![false; rows] }
    }

    pub fn h(&mut self, a: usize) {
        for i in 0..2 * self.n {
            self.r[i] ^= self.x[i][a] && self.z[i][a];
            let (x, z) = (self.x[i][a], self.z[i][a]);
            self.x[i][a] = z;
            self.z[i][a] = x;
        }
    }

    pub fn cx(&mut self, a: usize, b: usize) {
        for i in 0..2 * self.n {
            self.r[i] ^= self.x[i][a] && self.z[i][b] && (self.x[i][b] ^ self.z[i][a] ^ true);
            self.x[i][b] ^= self.x[i][a];
            self.z[i][a] ^= self.z[i][b];
        }
    }

    pub fn x_gate(&mut self, a: usize) {
        for i in 0..2 * self.n {
            self.r[i] ^= self.z[i][a];
        }
    }

    pub fn z_gate(&mut self, a: usize) {
        for i in 0..2 * self.n {
            self.r[i] ^= self.x[i][a];
        }
    }

    fn rowsum(&mut self, h: usize, i: usize) {
        let mut sum = 2 * self.r[h] as i32 + 2 * self.r[i] as i32;
        for j in 0..self.n {
            sum += g(self.x[i][j], self.z[i][j], self.x[h][j], self.z[h][j]);
        }
        self.r[h] = sum.rem_euclid(4) == 2;
        for j in 0..self.n {
            self.x[h][j] ^= self.x[i][j];
            self.z[h][j] ^= self.z[i][j];
        }
    }

    /// Z-basis measurement; returns (outcome, was_random).
    pub fn measure(&mut self, a: usize, rng: &mut StdRng) -> (bool, bool) {
        let n = self.n;
        if let Some(p) = (n..2 * n).find(|&p| self.x[p][a]) {
            for i in 0..2 * n {
                if i != p && self.x[i][a] {
                    self.rowsum(i, p);
                }
            }
            self.x[p - n] = self.x[p].clone();
            self.z[p - n] = self.z[p].clone();
            self.r[p - n] = self.r[p];
            self.x[p] = vec![false; n];
            self.z[p] = vec![false; n];
            self.z[p][a] = true;
            let out = rng.random_bool(0.5);
            self.r[p] = out;
            (out, true)
        } else {
            let s = 2 * n;
            self.x[s] = vec![false; n];
            self.z[s] = vec![false; n];
            self.r[s] = false;
            for i in 0..n {
                if self.x[i][a] {
                    self.rowsum(s, i + n);
                }
            }
            (self.r[s], false)
        }
    }

    pub fn reset(&mut self, a: usize, rng: &mut StdRng) {
        if self.measure(a, rng).0 {
            self.x_gate(a);
        }
    }
}

#[derive(Debug, Default)]
pub struct Shot {
    pub detectors: Vec<bool>,
    pub observables: Vec<bool>,
    pub measurements: usize,
    /// Measurements whose outcome was random.
    pub random: usize,
}

fn args(l: &str) -> (&str, Option<f64>, Vec<&str>) {
    let l = l.trim();
    let name_end = l.find(|c: char| c == '(' || c.is_whitespace()).unwrap_or(l.len());
    let name = &l[..name_end];
    let (p, rest) = if l[name_end..].starts_with('(') {
        let close = l.find(')').expect("closing paren");
        let first = l[name_end + 1..close].split(',').next().and_then(|v| v.trim().parse().ok());
        (first, &l[close + 1..])
    } else {
        (None, &l[name_end..])
    };
    (name, p, rest.split_whitespace().collect())
}

fn rec(t: &str, recs: &[bool]) -> bool {
    let k: usize = t.trim_start_matches("rec[-").trim_end_matches(']').parse().expect("rec target");
    recs[recs.len() - k]
}

/// Run one shot. With `noisy`, Pauli channels fire at their probabilities.
pub fn run(text: &str, seed: u64, noisy: bool) -> Shot {
    let mut rng = StdRng::seed_from_u64(seed);
    let n = text
        .lines()
        .filter(|l| !l.starts_with("DETECTOR") && !l.starts_with("OBSERVABLE") && !l.starts_with("QUBIT_COORDS"))
        .flat_map(|l| args(l).2.into_iter().filter_map(|t| t.parse::<usize>().ok()))
        .max()
        .map_or(0, |m| m + 1);
    let mut t = Tableau::new(n);
    let mut recs = Vec::new();
    let mut shot = Shot::default();
    for line in text.lines() {
        let (name, p, targets) = args(line);
        let qs: Vec<usize> = targets.iter().filter_map(|s| s.parse().ok()).collect();
        match name {
            "R" => qs.iter().for_each(|&q| t.reset(q, &mut rng)),
            "H" => qs.iter().for_each(|&q| t.h(q)),
            "CX" => qs.chunks(2).for_each(|c| t.cx(c[0], c[1])),
            "M" => {
                for &q in &qs {
                    let (m, random) = t.measure(q, &mut rng);
                    shot.random += random as usize;
                    recs.push(m);
                }
            }
            "DETECTOR" => shot.detectors.push(targets.iter().fold(false, |acc, s| acc ^ rec(s, &recs))),
            "OBSERVABLE_INCLUDE" => shot.observables.push(targets.iter().fold(false, |acc, s| acc ^ rec(s, &recs))),
            "X_ERROR" | "Z_ERROR" | "DEPOLARIZE1" | "DEPOLARIZE2" => {
                let p = p.expect("channel probability");
                if !noisy || !rng.random_bool(p.clamp(0.0, 1.0)) {
                    continue;
                }
                match name {
                    "X_ERROR" => t.x_gate(qs[0]),
                    "Z_ERROR" => t.z_gate(qs[0]),
                    _ => {
                        let k = if name == "DEPOLARIZE1" { 3 } else { 15 };
                        let pick = rng.random_range(1..=k);
                        for (i, &q) in qs.iter().enumerate() {
                            match (pick >> (2 * i)) & 3 {
                                1 => t.x_gate(q),
                                2 => t.z_gate(q),
                                3 => {
                                    t.x_gate(q);
                                    t.z_gate(q);
                                }
                                _ => {}
                            }
                        }
                    }
                }
            }
            "QUBIT_COORDS" | "TICK" | "" => {}
            other => panic!("unsupported instruction {other}"),
        }
    }
    shot.measurements = recs.len();
    shot
}
