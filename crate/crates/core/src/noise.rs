//! Stochastic Pauli noise attached to a timed schedule.

use serde::{Deserialize, Serialize};

use crate::codes::QubitId;
use crate::error::{Error, Result};
use crate::route::{MoveKind, OpKind, OpStream};
use crate::schedule::{Schedule, TimingTable};
use crate::translate::NativeGate;

/// Motional quanta gained per transport primitive by the moving ion.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct HeatingIncrements {
    pub shuttle: f64,
    pub split: f64,
    pub merge: f64,
    pub junction_entry: f64,
    pub junction_exit: f64,
}

impl Default for HeatingIncrements {
    fn default() -> Self {
        HeatingIncrements {
            shuttle: 0.1,
            split: 6.0,
            merge: 6.0,
            junction_entry: 3.0,
            junction_exit: 3.0,
        }
    }
}

impl HeatingIncrements {
    pub fn of(&self, k: MoveKind) -> f64 {
        match k {
            MoveKind::Shuttle => self.shuttle,
            MoveKind::Split => self.split,
            MoveKind::Merge => self.merge,
            MoveKind::JunctionEntry => self.junction_entry,
            MoveKind::JunctionExit => self.junction_exit,
            MoveKind::GateSwap => 0.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct NoiseParams {
    /// Dephasing time in seconds.
    pub t2: f64,
    pub p_reset: f64,
    pub p_meas: f64,
    /// Background heating rate in 1/s.
    pub gamma: f64,
    /// Thermal error scale for two-qubit gates, `A = a0 ln(N)/N`.
    pub a0_2q: f64,
    pub a0_1q: f64,
    /// Gate improvement factor; every probability is divided by it.
    pub improvement: f64,
    pub cooling: bool,
    pub cooled_p2q: f64,
    pub cooled_p1q: f64,
    pub heating: HeatingIncrements,
}

/// Motional quanta gained by an ion crossing one junction between traps:
/// split, shuttle, entry, exit, shuttle, merge.
pub const GRID_HOP_NBAR: f64 = 6.0 + 0.1 + 3.0 + 3.0 + 0.1 + 6.0;

/// Mean n̄ an ancilla carries into its four gates of a capacity-2 grid round
/// (one hop in before the first gate, two more before each later one).
pub const CALIBRATION_NBAR: f64 = 4.0 * GRID_HOP_NBAR;

/// Gate error at unit improvement in a two-ion chain at [`CALIBRATION_NBAR`].
pub const CALIBRATION_P2Q: f64 = 5e-3;
pub const CALIBRATION_P1Q: f64 = 5e-4;
const CALIBRATION_GAMMA: f64 = 12.5;

/// Thermal scale such that a two-ion chain at the calibration n̄ reaches
/// `p_target` for a gate of `tau_us`.
pub fn calibrated_a0(p_target: f64, tau_us: f64) -> f64 {
    let thermal = p_target - CALIBRATION_GAMMA * tau_us * 1e-6;
    thermal / (std::f64::consts::LN_2 / 2.0 * (2.0 * CALIBRATION_NBAR + 1.0))
}

impl Default for NoiseParams {
    fn default() -> Self {
        NoiseParams {
            t2: 2.2,
            p_reset: 5e-3,
            p_meas: 1e-3,
            gamma: CALIBRATION_GAMMA,
            a0_2q: calibrated_a0(CALIBRATION_P2Q, 40.0),
            a0_1q: calibrated_a0(CALIBRATION_P1Q, 5.0),
            improvement: 1.0,
            cooling: false,
            cooled_p2q: 2e-3,
            cooled_p1q: 3e-3,
            heating: HeatingIncrements::default(),
        }
    }
}

impl NoiseParams {
    pub fn with_improvement(f: f64) -> Self {
        NoiseParams {
            improvement: f,
            ..Default::default()
        }
    }

    /// All channels at zero probability.
    pub fn noiseless() -> Self {
        NoiseParams {
            p_reset: 0.0,
            p_meas: 0.0,
            gamma: 0.0,
            a0_2q: 0.0,
            a0_1q: 0.0,
            t2: f64::INFINITY,
            cooled_p1q: 0.0,
            cooled_p2q: 0.0,
            ..Default::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.improvement >= 1.0) {
            return Err(Error::InvalidImprovement(self.improvement));
        }
        if !(self.t2 > 0.0) {
            return Err(Error::Config("T2 must be positive".into()));
        }
        let probs = [self.p_reset, self.p_meas, self.cooled_p1q, self.cooled_p2q];
        if probs.iter().any(|p| !(0.0..=1.0).contains(p)) || self.gamma < 0.0 || self.a0_1q < 0.0 || self.a0_2q < 0.0 {
            return Err(Error::Config("noise parameters out of range".into()));
        }
        Ok(())
    }

    /// Probability of a Z flip after idling `t_us` microseconds.
    pub fn dephasing_prob(&self, t_us: u64) -> f64 {
        let t = t_us as f64 * 1e-6;
        (-(-t / self.t2).exp_m1()) / 2.0 / self.improvement
    }

    /// Depolarizing probability of a gate lasting `tau_us` in a chain of
    /// `n` ions carrying `nbar` total motional quanta.
    pub fn gate_error_prob(&self, two_qubit: bool, tau_us: u64, nbar: f64, n: usize) -> f64 {
        if self.cooling {
            let p = if two_qubit { self.cooled_p2q } else { self.cooled_p1q };
            return (p / self.improvement).clamp(0.0, 1.0);
        }
        let a0 = if two_qubit { self.a0_2q } else { self.a0_1q };
        let n = n.max(1) as f64;
        let thermal = a0 * n.ln() / n * (2.0 * nbar + 1.0);
        let p = (self.gamma * tau_us as f64 * 1e-6 + thermal) / self.improvement;
        p.clamp(0.0, 1.0)
    }

    pub fn reset_prob(&self) -> f64 {
        self.p_reset / self.improvement
    }

    pub fn measure_prob(&self) -> f64 {
        self.p_meas / self.improvement
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "channel", rename_all = "snake_case")]
pub enum Channel {
    ZError { q: QubitId, p: f64 },
    XError { q: QubitId, p: f64 },
    Depolarize1 { q: QubitId, p: f64 },
    Depolarize2 { a: QubitId, b: QubitId, p: f64 },
}

impl Channel {
    pub fn prob(&self) -> f64 {
        match *self {
            Channel::ZError { p, .. }
            | Channel::XError { p, .. }
            | Channel::Depolarize1 { p, .. }
            | Channel::Depolarize2 { p, .. } => p,
        }
    }
}

/// When a channel acts relative to the gates at the same instant.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Slot {
    Before,
    After,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NoiseEvent {
    pub time: u64,
    pub slot: Slot,
    /// Op the channel belongs to.
    pub op: usize,
    #[serde(flatten)]
    pub channel: Channel,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NoisyCircuit {
    pub events: Vec<NoiseEvent>,
    /// Summed chain n̄ seen by each gate op (0 for movement ops).
    pub chain_nbar: Vec<f64>,
}

impl NoisyCircuit {
    pub fn count(&self) -> usize {
        self.events.len()
    }
}

/// Attach error channels to every op of a scheduled stream.
pub fn annotate(
    stream: &OpStream,
    schedule: &Schedule,
    timing: &TimingTable,
    params: &NoiseParams,
) -> NoisyCircuit {
    let n = stream.num_qubits;
    let mut order: Vec<usize> = (0..stream.ops.len()).collect();
    order.sort_by_key(|&i| (schedule.entries[i].start, i));

    let n_components = stream
        .initial_chains
        .iter()
        .map(|(t, _)| t.index() + 1)
        .chain(stream.ops.iter().flat_map(|o| o.components()).map(|c| c.index() + 1))
        .max()
        .unwrap_or(0);
    let mut chains: Vec<Vec<QubitId>> = vec![Vec::new(); n_components];
    for (t, ions) in &stream.initial_chains {
        chains[t.index()] = ions.clone();
    }
    let mut nbar = vec![0.0f64; n];
    let mut last_gate_end: Vec<Option<u64>> = vec![None; n];
    let mut chain_nbar = vec![0.0; stream.ops.len()];
    let mut events = Vec::new();
    let heat = !params.cooling;

    for &i in &order {
        let op = &stream.ops[i];
        let e = schedule.entries[i];
        match op.kind {
            OpKind::Gate { gate, trap } => {
                let chain = &chains[trap.index()];
                let len = chain.len();
                let nb: f64 = chain.iter().map(|q| nbar[q.index()]).sum();
                chain_nbar[i] = nb;
                let is_reset = matches!(gate, NativeGate::Reset { .. });
                for q in gate.qubits() {
                    if let Some(prev) = last_gate_end[q.index()] {
                        if e.start > prev && !is_reset {
                            events.push(NoiseEvent {
                                time: e.start,
                                slot: Slot::Before,
                                op: i,
                                channel: Channel::ZError {
                                    q,
                                    p: params.dephasing_prob(e.start - prev),
                                },
                            });
                        }
                    }
                    last_gate_end[q.index()] = Some(e.end);
                }
                let dur = e.end - e.start;
                let ch = match gate {
                    NativeGate::Ms { a, b, .. } => Some((
                        Slot::After,
                        Channel::Depolarize2 {
                            a,
                            b,
                            p: params.gate_error_prob(true, dur, nb, len).min(15.0 / 16.0),
                        },
                    )),
                    NativeGate::Rotation { q, .. } => Some((
                        Slot::After,
                        Channel::Depolarize1 {
                            q,
                            p: params.gate_error_prob(false, dur, nb, len).min(0.75),
                        },
                    )),
                    NativeGate::Reset { q } => {
                        if heat {
                            nbar[q.index()] = 0.0;
                        }
                        Some((Slot::After, Channel::XError { q, p: params.reset_prob() }))
                    }
                    NativeGate::Measure { q } => {
                        Some((Slot::Before, Channel::XError { q, p: params.measure_prob() }))
                    }
                };
                if let Some((slot, channel)) = ch {
                    let time = if slot == Slot::Before { e.start } else { e.end };
                    events.push(NoiseEvent { time, slot, op: i, channel });
                }
            }
            OpKind::GateSwap { trap, a, b } => {
                let chain = &chains[trap.index()];
                let nb: f64 = chain.iter().map(|q| nbar[q.index()]).sum();
                chain_nbar[i] = nb;
                let p = params.gate_error_prob(true, timing.ms(), nb, chain.len()).min(15.0 / 16.0);
                for _ in 0..3 {
                    events.push(NoiseEvent {
                        time: e.end,
                        slot: Slot::After,
                        op: i,
                        channel: Channel::Depolarize2 { a, b, p },
                    });
                }
                let c = &mut chains[trap.index()];
                if let (Some(pa), Some(pb)) = (c.iter().position(|&q| q == a), c.iter().position(|&q| q == b)) {
                    c.swap(pa, pb);
                }
            }
            OpKind::Split { ion, trap, .. } => {
                chains[trap.index()].retain(|&q| q != ion);
                if heat {
                    nbar[ion.index()] += params.heating.split;
                }
            }
            OpKind::Merge { ion, trap, .. } => {
                chains[trap.index()].push(ion);
                if heat {
                    nbar[ion.index()] += params.heating.merge;
                }
            }
            OpKind::Shuttle { ion, .. } | OpKind::JunctionEntry { ion, .. } | OpKind::JunctionExit { ion, .. } => {
                if heat {
                    nbar[ion.index()] += params.heating.of(op.move_kind().unwrap());
                }
            }
        }
    }
    NoisyCircuit { events, chain_nbar }
}
