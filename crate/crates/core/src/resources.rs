//! Electrode, DAC, bandwidth and power estimates.

use serde::{Deserialize, Serialize};

use crate::device::{DeviceCounts, Wiring};

/// Dynamic electrodes per linear zone.
pub const DE_PER_LZ: u64 = 10;
/// Dynamic electrodes per junction zone.
pub const DE_PER_JZ: u64 = 20;
/// Shim electrodes per zone of either kind.
pub const SE_PER_ZONE: u64 = 10;
/// Fixed DAC count of the switch-based scheme.
pub const WISE_BASE_DACS: u64 = 100;
/// Shim electrodes served by one WISE DAC.
pub const WISE_SHIMS_PER_DAC: u64 = 100;
pub const MBIT_PER_DAC: u64 = 50;
pub const MW_PER_DAC: u64 = 30;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct ResourceEstimate {
    pub n_linear_zones: u64,
    pub n_junction_zones: u64,
    pub n_dynamic_electrodes: u64,
    pub n_shim_electrodes: u64,
    pub n_electrodes: u64,
    pub n_dacs: u64,
    /// Mbit/s.
    pub data_rate: u64,
    /// mW.
    pub power: u64,
}

impl ResourceEstimate {
    pub fn data_rate_gbps(&self) -> f64 {
        self.data_rate as f64 / 1000.0
    }

    pub fn power_w(&self) -> f64 {
        self.power as f64 / 1000.0
    }
}

pub fn estimate(counts: &DeviceCounts, wiring: Wiring) -> ResourceEstimate {
    estimate_raw(counts.n_traps as u64, counts.capacity as u64, counts.n_junctions as u64, wiring)
}

/// Estimate from trap count, trap capacity and junction count.
pub fn estimate_raw(n_traps: u64, capacity: u64, n_junctions: u64, wiring: Wiring) -> ResourceEstimate {
    let lz = n_traps * capacity;
    let jz = n_junctions;
    let de = DE_PER_LZ * lz + DE_PER_JZ * jz;
    let se = SE_PER_ZONE * (lz + jz);
    let ne = de + se;
    let dacs = match wiring {
        Wiring::Standard => ne,
        Wiring::Wise => {
            if ne == 0 {
                0
            } else {
                WISE_BASE_DACS + se.div_ceil(WISE_SHIMS_PER_DAC)
            }
        }
    };
    ResourceEstimate {
        n_linear_zones: lz,
        n_junction_zones: jz,
        n_dynamic_electrodes: de,
        n_shim_electrodes: se,
        n_electrodes: ne,
        n_dacs: dacs,
        data_rate: MBIT_PER_DAC * dacs,
        power: MW_PER_DAC * dacs,
    }
}

/// Standard-wiring figures for a given electrode count.
pub fn standard_for_electrodes(n_electrodes: u64) -> ResourceEstimate {
    ResourceEstimate {
        n_electrodes,
        n_dacs: n_electrodes,
        data_rate: MBIT_PER_DAC * n_electrodes,
        power: MW_PER_DAC * n_electrodes,
        ..Default::default()
    }
}

/// One sweep outcome considered by [`electrodes_for_target`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TargetRow {
    pub distance: usize,
    pub capacity: usize,
    pub logical_error_rate: f64,
    pub n_electrodes: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum TargetResult {
    Reached {
        distance: usize,
        capacity: usize,
        n_electrodes: u64,
    },
    Unreached,
}

/// Fewest electrodes among rows meeting `target`; ties go to the smaller
/// distance, then capacity.
pub fn electrodes_for_target(rows: &[TargetRow], target: f64) -> TargetResult {
    rows.iter()
        .filter(|r| r.logical_error_rate <= target)
        .min_by_key(|r| (r.n_electrodes, r.distance, r.capacity))
        .map(|r| TargetResult::Reached {
            distance: r.distance,
            capacity: r.capacity,
            n_electrodes: r.n_electrodes,
        })
        .unwrap_or(TargetResult::Unreached)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hand_example() {
        let e = estimate_raw(4, 2, 4, Wiring::Standard);
        assert_eq!(e.n_electrodes, 280);
        assert_eq!(e.data_rate, 14_000);
        assert_eq!(e.power, 8_400);
    }

    #[test]
    fn empty_device() {
        assert_eq!(estimate_raw(0, 0, 0, Wiring::Standard), ResourceEstimate::default());
        assert_eq!(estimate_raw(0, 0, 0, Wiring::Wise), ResourceEstimate::default());
    }

    #[test]
    fn wise_rounds_dacs_up() {
        let e = estimate_raw(1, 2, 0, Wiring::Wise);
        assert_eq!(e.n_shim_electrodes, 20);
        assert_eq!(e.n_dacs, 101);
    }

    #[test]
    fn target_lookup() {
        assert_eq!(electrodes_for_target(&[], 1e-6), TargetResult::Unreached);
        let rows = vec![
            TargetRow { distance: 5, capacity: 2, logical_error_rate: 1e-7, n_electrodes: 900 },
            TargetRow { distance: 5, capacity: 12, logical_error_rate: 1e-7, n_electrodes: 1500 },
            TargetRow { distance: 3, capacity: 2, logical_error_rate: 1e-4, n_electrodes: 300 },
        ];
        assert_eq!(
            electrodes_for_target(&rows, 1e-6),
            TargetResult::Reached { distance: 5, capacity: 2, n_electrodes: 900 }
        );
    }
}
