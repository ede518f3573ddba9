//! Grid sweeps over configurations with per-point artifacts.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::codes::CodeKind;
use crate::device::{Topology, Wiring};
use crate::emit::{gantt_csv, metrics_csv, trace_jsonl, write_atomic, MetricsRow};
use crate::error::{Error, Result};
use crate::noise::NoiseParams;
use crate::par;
use crate::pipeline::{base_row, compile, load_file, CompileConfig, Compiled, DEFAULT_ROUNDS};
use crate::schedule::TimingTable;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SweepConfig {
    pub codes: Vec<CodeKind>,
    pub distances: Vec<usize>,
    pub capacities: Vec<usize>,
    pub topologies: Vec<Topology>,
    pub wirings: Vec<Wiring>,
    pub improvements: Vec<f64>,
    pub rounds: usize,
    pub out: PathBuf,
    /// Worker threads; 0 uses every core.
    pub jobs: usize,
    /// Write a Stim document per point.
    pub stim: bool,
    /// Also write trace and Gantt files per point.
    pub traces: bool,
    pub timing: TimingTable,
    pub noise: NoiseParams,
}

impl Default for SweepConfig {
    fn default() -> Self {
        SweepConfig {
            codes: vec![CodeKind::RotatedSurface],
            distances: vec![3],
            capacities: vec![2],
            topologies: vec![Topology::Grid],
            wirings: vec![Wiring::Standard],
            improvements: vec![1.0],
            rounds: DEFAULT_ROUNDS,
            out: PathBuf::from("out"),
            jobs: 0,
            stim: true,
            traces: false,
            timing: TimingTable::default(),
            noise: NoiseParams::default(),
        }
    }
}

impl SweepConfig {
    /// Load from a `.toml` or `.json` file.
    pub fn load(path: &Path) -> Result<Self> {
        load_file(path)
    }

    pub fn validate(&self) -> Result<()> {
        let empty = [
            ("codes", self.codes.is_empty()),
            ("distances", self.distances.is_empty()),
            ("capacities", self.capacities.is_empty()),
            ("topologies", self.topologies.is_empty()),
            ("wirings", self.wirings.is_empty()),
            ("improvements", self.improvements.is_empty()),
        ];
        if let Some((name, _)) = empty.iter().find(|(_, e)| *e) {
            return Err(Error::Config(format!("`{name}` must not be empty")));
        }
        if let Some(&d) = self.distances.iter().find(|&&d| d < 2) {
            return Err(Error::InvalidDistance(d));
        }
        if self.rounds < 1 {
            return Err(Error::InvalidRounds);
        }
        Ok(())
    }

    /// Every point of the grid, in a fixed order.
    pub fn points(&self) -> Vec<CompileConfig> {
        let mut out = Vec::new();
        for &code in &self.codes {
            for &distance in &self.distances {
                for &capacity in &self.capacities {
                    for &topology in &self.topologies {
                        for &wiring in &self.wirings {
                            for &improvement in &self.improvements {
                                out.push(CompileConfig {
                                    code,
                                    distance,
                                    capacity,
                                    topology,
                                    wiring,
                                    improvement,
                                    rounds: self.rounds,
                                    timing: self.timing,
                                    noise: self.noise,
                                    ..Default::default()
                                });
                            }
                        }
                    }
                }
            }
        }
        out
    }
}

/// Which per-point files to write.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Artifacts {
    pub stim: bool,
    pub traces: bool,
}

/// Write the requested files for a compiled point and return its row.
/// Paths in the row are relative to `dir`.
pub fn write_artifacts(c: &Compiled, dir: &Path, what: Artifacts) -> Result<MetricsRow> {
    let stem = c.config.stem();
    let mut row = c.row();
    if what.stim {
        let doc = c.stim()?;
        let name = format!("{stem}.stim");
        write_atomic(&dir.join(&name), &doc.text)?;
        row.n_detectors = Some(doc.n_detectors);
        row.stim_path = name;
    }
    if what.traces {
        write_atomic(&dir.join(format!("{stem}.trace.jsonl")), &trace_jsonl(&c.stream, &c.schedule))?;
        write_atomic(&dir.join(format!("{stem}.gantt.csv")), &gantt_csv(&c.stream, &c.schedule)?)?;
    }
    Ok(row)
}

/// Compile one point; failures become a row with the `error` column set.
pub fn run_point(cfg: &CompileConfig, dir: &Path, what: Artifacts) -> MetricsRow {
    match compile(cfg).and_then(|c| write_artifacts(&c, dir, what)) {
        Ok(row) => row,
        Err(e) => MetricsRow {
            error: e.to_string(),
            ..base_row(cfg)
        },
    }
}

fn sort_key(r: &MetricsRow) -> (String, usize, usize, String, String, u64) {
    (
        r.code.clone(),
        r.distance,
        r.capacity,
        r.topology.clone(),
        r.wiring.clone(),
        r.improvement.to_bits(),
    )
}

/// Rows for every grid point, sorted. Artifacts go to `cfg.out`.
pub fn sweep_rows(cfg: &SweepConfig, parallel: bool) -> Result<Vec<MetricsRow>> {
    cfg.validate()?;
    std::fs::create_dir_all(&cfg.out)?;
    let points = cfg.points();
    let what = Artifacts {
        stim: cfg.stim,
        traces: cfg.traces,
    };
    let run = |p: &CompileConfig| run_point(p, &cfg.out, what);
    let mut rows = if parallel {
        par::with_jobs(cfg.jobs, || par::map(&points, run))
    } else {
        par::map_sequential(&points, run)
    };
    rows.sort_by_key(sort_key);
    Ok(rows)
}

/// Run the sweep and write `metrics.csv` into the output directory.
pub fn run_sweep(cfg: &SweepConfig) -> Result<Vec<MetricsRow>> {
    let rows = sweep_rows(cfg, true)?;
    write_atomic(&cfg.out.join("metrics.csv"), &metrics_csv(&rows)?)?;
    Ok(rows)
}
