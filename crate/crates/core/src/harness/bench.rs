//! Oracle-query and wall-time comparison of naive, cached and lazy greedy.

use std::path::PathBuf;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use super::{GraphSource, SyntheticSpec, CSV_SCHEMA};
use crate::error::{Error, Result};
use crate::exact::ExactOptimizerConfig;
use crate::instances::{build_instance, instance_seed, ExperimentConfig};
use crate::scoring::{RandomSeed, RuleKind, ScoringRule};
use crate::sealed_bid::{run_sealed_bid, run_sealed_bid_lazy, run_vcg};
use crate::selection::{run_meta, run_meta_lazy, run_meta_observed, MetaOptions};

fn default_n() -> Vec<usize> {
    vec![100, 500, 1000, 2000]
}
fn default_rules() -> Vec<RuleKind> {
    vec![RuleKind::GreedyMargin]
}
fn default_naive_payments() -> usize {
    500
}
fn default_s() -> f64 {
    1.0
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BenchConfig {
    #[serde(default)]
    pub dataset: Option<PathBuf>,
    #[serde(default)]
    pub synthetic: Option<SyntheticSpec>,
    #[serde(default = "default_n")]
    pub n: Vec<usize>,
    #[serde(default = "default_s")]
    pub s: f64,
    #[serde(default = "default_rules")]
    pub rules: Vec<RuleKind>,
    #[serde(default)]
    pub seed: u64,
    /// Naive payments re-run the full greedy per winner; they are skipped
    /// above this size.
    #[serde(default = "default_naive_payments")]
    pub naive_payments_max_n: usize,
    #[serde(default)]
    pub include_vcg: bool,
    #[serde(default)]
    pub exact: ExactOptimizerConfig,
}

impl Default for BenchConfig {
    fn default() -> Self {
        BenchConfig {
            dataset: None,
            synthetic: Some(SyntheticSpec::default()),
            n: default_n(),
            s: default_s(),
            rules: default_rules(),
            seed: 0,
            naive_payments_max_n: default_naive_payments(),
            include_vcg: false,
            exact: ExactOptimizerConfig::default(),
        }
    }
}

impl BenchConfig {
    pub fn graph_source(&self) -> GraphSource {
        match &self.dataset {
            Some(p) => GraphSource::Dataset(p.clone()),
            None => GraphSource::Synthetic(self.synthetic.clone().unwrap_or_default()),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BenchRecord {
    pub schema: u32,
    pub n: usize,
    pub rule: String,
    pub variant: String,
    pub winners: Option<usize>,
    pub queries: Option<u64>,
    pub wall_time_ms: Option<f64>,
    pub skipped: String,
}

fn timed<T>(f: impl FnOnce() -> Result<T>) -> Result<(T, f64)> {
    let t = Instant::now();
    let v = f()?;
    Ok((v, t.elapsed().as_secs_f64() * 1e3))
}

pub fn run_bench(cfg: &BenchConfig) -> Result<Vec<BenchRecord>> {
    let graph = cfg.graph_source().load()?;
    let mut rows = Vec::new();
    for &n in &cfg.n {
        let (inst, costs) = build_instance(&graph, &ExperimentConfig::new(n, cfg.s, 1, cfg.seed), 0)?;
        let seed = RandomSeed(instance_seed(cfg.seed, n as u64));
        for &kind in &cfg.rules {
            let rule = ScoringRule::new(kind);
            let row = |variant: &str, winners, queries, ms| BenchRecord {
                schema: CSV_SCHEMA,
                n,
                rule: kind.name().into(),
                variant: variant.into(),
                winners: Some(winners),
                queries: Some(queries),
                wall_time_ms: Some(ms),
                skipped: String::new(),
            };
            let skip = |variant: &str, why: String| BenchRecord {
                schema: CSV_SCHEMA,
                n,
                rule: kind.name().into(),
                variant: variant.into(),
                winners: None,
                queries: None,
                wall_time_ms: None,
                skipped: why,
            };
            let full = MetaOptions { excluded: None, full_rescore: true };
            let (t, ms) = timed(|| run_meta_observed(&rule, &inst, &costs, seed, &full, &mut |_| {}))?;
            rows.push(row("allocation-naive", t.admissions.len(), t.queries, ms));
            let (t, ms) = timed(|| run_meta(&rule, &inst, &costs, seed))?;
            rows.push(row("allocation-cached", t.admissions.len(), t.queries, ms));
            if kind.diminishing_return() {
                let (t, ms) = timed(|| run_meta_lazy(&rule, &inst, &costs, seed))?;
                rows.push(row("allocation-lazy", t.admissions.len(), t.queries, ms));
            } else {
                rows.push(skip("allocation-lazy", format!("{} lacks diminishing returns", kind.name())));
            }
            if n <= cfg.naive_payments_max_n {
                let (o, ms) = timed(|| run_sealed_bid(&rule, &inst, &costs, seed))?;
                rows.push(row("payments-naive", o.winners.len(), o.queries, ms));
            } else {
                rows.push(skip("payments-naive", format!("n = {} above naive_payments_max_n", n)));
            }
            if kind.diminishing_return() {
                let (o, ms) = timed(|| run_sealed_bid_lazy(&rule, &inst, &costs, seed))?;
                rows.push(row("payments-lazy", o.winners.len(), o.queries, ms));
            } else {
                rows.push(skip("payments-lazy", format!("{} lacks diminishing returns", kind.name())));
            }
        }
        if cfg.include_vcg {
            let mut r = BenchRecord {
                schema: CSV_SCHEMA,
                n,
                rule: "none".into(),
                variant: "vcg".into(),
                winners: None,
                queries: None,
                wall_time_ms: None,
                skipped: String::new(),
            };
            match timed(|| run_vcg(&inst, &costs, &cfg.exact)) {
                Ok((o, ms)) => {
                    r.winners = Some(o.winners.len());
                    r.wall_time_ms = Some(ms);
                }
                Err(Error::Capacity(why)) => r.skipped = why,
                Err(e) => return Err(e),
            }
            rows.push(r);
        }
    }
    Ok(rows)
}
