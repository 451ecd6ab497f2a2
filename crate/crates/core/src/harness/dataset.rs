//! Instance files and the SNAP vote-network download.

use std::path::{Path, PathBuf};
use std::process::Command;

use serde::{Deserialize, Serialize};

use super::GraphSource;
use crate::error::{input, Error, Result};
use crate::instances::{build_instance, random_instance, ExperimentConfig};
use crate::valuation::{CoverageInstance, CoverageSpec, Valuation};

pub const WIKI_VOTE_URL: &str = "https://snap.stanford.edu/data/wiki-Vote.txt.gz";

/// Environment variable naming a decompressed wiki-Vote edge list.
pub const WIKI_VOTE_ENV: &str = "WIKI_VOTE_PATH";

/// A coverage instance with one cost per seller, as written by
/// `gen-instance`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InstanceFile {
    pub instance: CoverageSpec,
    pub costs: Vec<f64>,
}

impl InstanceFile {
    pub fn new(inst: &CoverageInstance, costs: Vec<f64>) -> Self {
        InstanceFile { instance: inst.to_spec(), costs }
    }

    pub fn into_parts(self) -> Result<(CoverageInstance, Vec<f64>)> {
        let inst = CoverageInstance::try_from(self.instance)?;
        if self.costs.len() != inst.num_sellers() {
            return input(format!("{} costs for {} sellers", self.costs.len(), inst.num_sellers()));
        }
        Ok((inst, self.costs))
    }

    pub fn read(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Input(format!("cannot read instance {}: {}", path.display(), e)))?;
        Ok(serde_json::from_str(&text)?)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }
}

/// Where `gen-instance` draws from.
#[derive(Clone, Debug)]
pub enum InstanceOrigin {
    /// The small random coverage family used by the property suites.
    Random { n: usize },
    /// A sample of `n` set nodes from a graph, costs scaled by `s`.
    Graph { source: GraphSource, n: usize, s: f64, index: u64 },
}

pub fn gen_instance(origin: &InstanceOrigin, seed: u64) -> Result<InstanceFile> {
    let (inst, costs) = match origin {
        InstanceOrigin::Random { n } => random_instance(*n, seed)?,
        InstanceOrigin::Graph { source, n, s, index } => {
            let g = source.load()?;
            build_instance(&g, &ExperimentConfig::new(*n, *s, 1, seed), *index)?
        }
    };
    Ok(InstanceFile::new(&inst, costs))
}

/// Downloads and decompresses the vote network into `dir` using `curl` and
/// `gunzip`. Returns the path of the edge list.
pub fn fetch_dataset(dir: &Path) -> Result<PathBuf> {
    std::fs::create_dir_all(dir)?;
    let gz = dir.join("wiki-Vote.txt.gz");
    let txt = dir.join("wiki-Vote.txt");
    run(Command::new("curl").args(["-fsSL", "-o"]).arg(&gz).arg(WIKI_VOTE_URL))?;
    run(Command::new("gunzip").arg("-f").arg(&gz))?;
    if !txt.exists() {
        return Err(Error::Internal(format!("{} missing after decompression", txt.display())));
    }
    Ok(txt)
}

fn run(cmd: &mut Command) -> Result<()> {
    let status = cmd.status().map_err(|e| Error::Input(format!("cannot run {:?}: {}", cmd.get_program(), e)))?;
    if !status.success() {
        return Err(Error::Input(format!("{:?} failed with {}", cmd.get_program(), status)));
    }
    Ok(())
}
