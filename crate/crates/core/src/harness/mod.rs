//! Drivers behind the `submod-auction` binary: experiment matrices,
//! property-suite verification, benchmarks, the lower-bound demonstration,
//! instance generation and dataset download.

pub mod bench;
pub mod dataset;
pub mod experiment;
pub mod lowerbound;
pub mod stats;
pub mod verify;

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::instances::{parse_edge_list, synthetic_graph, BipartiteGraph};

/// Version written in the leading `schema` column of every CSV.
pub const CSV_SCHEMA: u32 = 1;

/// Parameters of the synthetic stand-in graph.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SyntheticSpec {
    pub sources: usize,
    pub targets: usize,
    pub mean_out_degree: f64,
    pub seed: u64,
}

impl Default for SyntheticSpec {
    fn default() -> Self {
        SyntheticSpec { sources: 7000, targets: 2800, mean_out_degree: 15.0, seed: 0 }
    }
}

/// Where instances come from: a SNAP edge list on disk, or a synthetic graph.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum GraphSource {
    Dataset(PathBuf),
    Synthetic(SyntheticSpec),
}

impl GraphSource {
    pub fn load(&self) -> Result<BipartiteGraph> {
        match self {
            GraphSource::Dataset(path) => load_edge_list(path),
            GraphSource::Synthetic(s) => synthetic_graph(s.sources, s.targets, s.mean_out_degree, s.seed),
        }
    }

    pub fn label(&self) -> String {
        match self {
            GraphSource::Dataset(p) => p.display().to_string(),
            GraphSource::Synthetic(s) => format!("synthetic:{}x{}:{}", s.sources, s.targets, s.seed),
        }
    }
}

pub fn load_edge_list(path: &Path) -> Result<BipartiteGraph> {
    if path.extension().is_some_and(|e| e == "gz") {
        return Err(Error::Input(format!("{} is compressed; decompress it first", path.display())));
    }
    let file = std::fs::File::open(path)
        .map_err(|e| Error::Input(format!("cannot open dataset {}: {}", path.display(), e)))?;
    parse_edge_list(std::io::BufReader::new(file))
}

/// Process exit status for a harness error: 2 for bad input, 1 otherwise.
pub fn exit_code(err: &Error) -> i32 {
    match err {
        Error::Input(_) | Error::Parse { .. } | Error::UnsupportedRule { .. } | Error::Capacity(_) | Error::Json(_) => 2,
        Error::Io(_) | Error::Csv(_) => 2,
        Error::Misuse(_) | Error::Internal(_) => 1,
    }
}
