//! End-to-end compilation of one configuration.

use std::fmt;
use std::path::Path;
use std::str::FromStr;

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::codes::{build_layout, generate_memory_experiment, CodeKind, CodeLayout, LogicalCircuit, QubitId};
use crate::device::{device_for_code, QccdDevice, Topology, Wiring};
use crate::emit::{to_stim, MetricsRow, StimDocument, StimOptions};
use crate::error::{Error, Result};
use crate::noise::{annotate, NoiseParams, NoisyCircuit};
use crate::place::{place, Mapping};
use crate::resources::{estimate, ResourceEstimate};
use crate::route::{route_circuit, OpStream, RouteOptions};
use crate::schedule::{build_schedule, metrics, Metrics, Schedule, TimingTable};
use crate::translate::{lower, NativeCircuit};

/// Read a `.json` or `.toml` (any other extension) config file.
pub fn load_file<T: DeserializeOwned>(path: &Path) -> Result<T> {
    let text = std::fs::read_to_string(path)?;
    if path.extension().is_some_and(|e| e.eq_ignore_ascii_case("json")) {
        serde_json::from_str(&text).map_err(|e| Error::Config(format!("{}: {e}", path.display())))
    } else {
        toml::from_str(&text).map_err(|e| Error::Config(format!("{}: {e}", path.display())))
    }
}

/// Default number of syndrome rounds; per-round figures average over them.
pub const DEFAULT_ROUNDS: usize = 5;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct CompileConfig {
    pub code: CodeKind,
    pub distance: usize,
    pub capacity: usize,
    pub topology: Topology,
    pub wiring: Wiring,
    pub improvement: f64,
    pub rounds: usize,
    /// Concurrent transits through a switch hub; `None` keeps the device default.
    pub switch_ports: Option<usize>,
    pub timing: TimingTable,
    pub noise: NoiseParams,
    pub route: RouteOptions,
}

impl Default for CompileConfig {
    fn default() -> Self {
        CompileConfig {
            code: CodeKind::RotatedSurface,
            distance: 3,
            capacity: 2,
            topology: Topology::Grid,
            wiring: Wiring::Standard,
            improvement: 1.0,
            rounds: DEFAULT_ROUNDS,
            switch_ports: None,
            timing: TimingTable::default(),
            noise: NoiseParams::default(),
            route: RouteOptions::default(),
        }
    }
}

impl CompileConfig {
    pub fn new(code: CodeKind, distance: usize, capacity: usize, topology: Topology) -> Self {
        CompileConfig {
            code,
            distance,
            capacity,
            topology,
            ..Default::default()
        }
    }

    /// Noise parameters with the configured improvement factor and cooling.
    pub fn effective_noise(&self) -> NoiseParams {
        NoiseParams {
            improvement: self.improvement,
            cooling: self.timing.cooling || self.noise.cooling,
            ..self.noise
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.distance < 2 {
            return Err(Error::InvalidDistance(self.distance));
        }
        if self.topology != Topology::SingleChain && self.capacity < 2 {
            return Err(Error::InvalidCapacity(self.capacity));
        }
        if self.rounds < 1 {
            return Err(Error::InvalidRounds);
        }
        if !(self.improvement >= 1.0) {
            return Err(Error::InvalidImprovement(self.improvement));
        }
        self.timing.validate()?;
        self.effective_noise().validate()
    }

    /// File-name stem such as `S_3_2_G_standard_f1`.
    pub fn stem(&self) -> String {
        format!(
            "{}_{}_{}_{}_{}_f{}",
            self.code.short(),
            self.distance,
            self.capacity,
            self.topology.short(),
            self.wiring,
            self.improvement
        )
    }
}

/// The four-field shorthand `CODE,d,capacity,TOPOLOGY`, e.g. `S,3,2,G`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ConfigTuple {
    pub code: CodeKind,
    pub distance: usize,
    pub capacity: usize,
    pub topology: Topology,
}

impl FromStr for ConfigTuple {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let parts: Vec<&str> = s.split(',').map(str::trim).collect();
        if parts.len() != 4 {
            return Err(Error::Config(format!("expected CODE,d,capacity,TOPOLOGY, got `{s}`")));
        }
        let num = |p: &str| {
            p.parse::<usize>()
                .map_err(|_| Error::Config(format!("`{p}` is not a positive integer")))
        };
        Ok(ConfigTuple {
            code: parts[0].parse()?,
            distance: num(parts[1])?,
            capacity: num(parts[2])?,
            topology: parts[3].parse()?,
        })
    }
}

impl fmt::Display for ConfigTuple {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{},{},{},{}",
            self.code.short(),
            self.distance,
            self.capacity,
            self.topology.short()
        )
    }
}

impl From<ConfigTuple> for CompileConfig {
    fn from(t: ConfigTuple) -> Self {
        CompileConfig::new(t.code, t.distance, t.capacity, t.topology)
    }
}

#[derive(Debug, Clone)]
pub struct Compiled {
    pub config: CompileConfig,
    pub layout: CodeLayout,
    pub circuit: LogicalCircuit,
    pub native: NativeCircuit,
    pub device: QccdDevice,
    pub mapping: Mapping,
    pub stream: OpStream,
    pub schedule: Schedule,
    pub metrics: Metrics,
    pub resources: ResourceEstimate,
}

impl Compiled {
    pub fn noisy(&self) -> NoisyCircuit {
        annotate(
            &self.stream,
            &self.schedule,
            &self.config.timing,
            &self.config.effective_noise(),
        )
    }

    pub fn stim(&self) -> Result<StimDocument> {
        self.stim_with(&self.noisy())
    }

    pub fn stim_with(&self, noisy: &NoisyCircuit) -> Result<StimDocument> {
        to_stim(
            &self.layout,
            &self.circuit,
            &self.native,
            &self.stream,
            &self.schedule,
            noisy,
            StimOptions::default(),
        )
    }

    pub fn row(&self) -> MetricsRow {
        let c = self.device.counts();
        let mut row = base_row(&self.config);
        row.elapsed_per_round = Some(self.metrics.elapsed_per_round);
        row.movement_time = Some(self.metrics.movement_time);
        row.n_movement_ops = Some(self.metrics.n_movement_ops);
        row.n_gate_swaps = Some(self.metrics.n_gate_swaps);
        row.makespan = Some(self.metrics.makespan);
        row.n_traps = Some(c.n_traps);
        row.n_junctions = Some(c.n_junctions);
        row.n_electrodes = Some(self.resources.n_electrodes);
        row.n_dacs = Some(self.resources.n_dacs);
        row.data_rate_mbps = Some(self.resources.data_rate);
        row.power_mw = Some(self.resources.power);
        row
    }
}

/// Row with only the configuration columns filled.
pub fn base_row(cfg: &CompileConfig) -> MetricsRow {
    MetricsRow {
        code: cfg.code.short().to_string(),
        distance: cfg.distance,
        capacity: cfg.capacity,
        topology: cfg.topology.to_string(),
        wiring: cfg.wiring.to_string(),
        improvement: cfg.improvement,
        rounds: cfg.rounds,
        ..Default::default()
    }
}

pub fn build_device_for(cfg: &CompileConfig, layout: &CodeLayout) -> Result<QccdDevice> {
    let mut device = device_for_code(layout, cfg.capacity, cfg.topology, cfg.wiring)?;
    if let Some(ports) = cfg.switch_ports {
        if cfg.topology == Topology::Switch {
            if ports == 0 {
                return Err(Error::Config("switch_ports must be at least 1".into()));
            }
            for j in device.junctions() {
                if let crate::device::Component::Junction { capacity, .. } = &mut device.components[j.index()] {
                    *capacity = ports;
                }
            }
        }
    }
    Ok(device)
}

/// Ancillas move; data qubits stay put.
pub fn movable_flags(layout: &CodeLayout) -> Vec<bool> {
    (0..layout.num_qubits())
        .map(|i| !layout.is_data(QubitId(i as u32)))
        .collect()
}

pub fn compile(cfg: &CompileConfig) -> Result<Compiled> {
    cfg.validate()?;
    let layout = build_layout(cfg.code, cfg.distance)?;
    let circuit = generate_memory_experiment(&layout, cfg.rounds)?;
    let native = lower(&circuit)?;
    let device = build_device_for(cfg, &layout)?;
    let mapping = place(&layout, &device)?;
    let stream = route_circuit(&native, &mapping, &device, &movable_flags(&layout), cfg.route)?;
    let schedule = build_schedule(&stream, cfg.wiring, &cfg.timing)?;
    let metrics = metrics(&stream, &schedule, cfg.rounds);
    let resources = estimate(&device.counts(), cfg.wiring);
    Ok(Compiled {
        config: cfg.clone(),
        layout,
        circuit,
        native,
        device,
        mapping,
        stream,
        schedule,
        metrics,
        resources,
    })
}
