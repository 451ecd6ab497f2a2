//! Mechanism × rule × instance matrices over sampled coverage instances.

use std::collections::BTreeMap;
use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::stats::{mean_std, spearman};
use super::{GraphSource, SyntheticSpec, CSV_SCHEMA};
use crate::error::{Error, Result};
use crate::exact::{welfare, ExactOptimizerConfig};
use crate::instances::{active_fraction, build_instance, instance_seed, BipartiteGraph, ExperimentConfig, KappaMode};
use crate::mechanism::AuctionOutcome;
use crate::online::{run_posted_price, ArrivalOrder};
use crate::scoring::{RandomSeed, RuleKind, ScoringRule};
use crate::sealed_bid::{run_sealed_bid, run_sealed_bid_lazy, run_vcg};
use crate::valuation::{CoverageInstance, NoisyOracle, Valuation};
use crate::TOLERANCE;

#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum MechanismKind {
    /// Critical-bid payments; the lazy implementation when the rule allows.
    #[serde(rename = "sealed-bid")]
    SealedBid,
    #[serde(rename = "sealed-bid-naive")]
    SealedBidNaive,
    #[serde(rename = "sealed-bid-lazy")]
    SealedBidLazy,
    /// Posted prices over a seeded random arrival order.
    #[serde(rename = "posted-price")]
    PostedPrice,
    #[serde(rename = "vcg")]
    Vcg,
}

impl MechanismKind {
    pub const ALL: [MechanismKind; 5] = [
        MechanismKind::SealedBid,
        MechanismKind::SealedBidNaive,
        MechanismKind::SealedBidLazy,
        MechanismKind::PostedPrice,
        MechanismKind::Vcg,
    ];

    pub fn name(self) -> &'static str {
        match self {
            MechanismKind::SealedBid => "sealed-bid",
            MechanismKind::SealedBidNaive => "sealed-bid-naive",
            MechanismKind::SealedBidLazy => "sealed-bid-lazy",
            MechanismKind::PostedPrice => "posted-price",
            MechanismKind::Vcg => "vcg",
        }
    }

    fn uses_rule(self) -> bool {
        self != MechanismKind::Vcg
    }
}

impl fmt::Display for MechanismKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for MechanismKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        MechanismKind::ALL
            .into_iter()
            .find(|m| m.name() == s)
            .ok_or_else(|| Error::Input(format!("unknown mechanism `{}`", s)))
    }
}

fn default_instances() -> usize {
    100
}
fn default_mechanisms() -> Vec<MechanismKind> {
    vec![MechanismKind::SealedBid]
}
fn default_rules() -> Vec<RuleKind> {
    vec![RuleKind::GreedyMargin, RuleKind::GreedyRate, RuleKind::CostScaled, RuleKind::DistortedGreedy]
}
fn default_noise() -> f64 {
    0.05
}

/// JSON experiment configuration.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentFile {
    /// SNAP edge list. Takes precedence over `synthetic`.
    #[serde(default)]
    pub dataset: Option<PathBuf>,
    #[serde(default)]
    pub synthetic: Option<SyntheticSpec>,
    pub n: Vec<usize>,
    pub s: Vec<f64>,
    #[serde(default = "default_instances")]
    pub instances: usize,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_mechanisms")]
    pub mechanisms: Vec<MechanismKind>,
    #[serde(default = "default_rules")]
    pub rules: Vec<RuleKind>,
    #[serde(default)]
    pub output: Option<PathBuf>,
    /// Adds wall-clock times to the CSV, which makes it non-reproducible.
    #[serde(default)]
    pub record_timing: bool,
    #[serde(default)]
    pub kappa: KappaMode,
    /// Noise level for the noisy rule's oracle.
    #[serde(default = "default_noise")]
    pub noise_epsilon: f64,
    #[serde(default)]
    pub exact: ExactOptimizerConfig,
}

impl ExperimentFile {
    pub fn from_path(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Input(format!("cannot read config {}: {}", path.display(), e)))?;
        Ok(serde_json::from_str(&text)?)
    }

    pub fn graph_source(&self) -> Result<GraphSource> {
        match (&self.dataset, &self.synthetic) {
            (Some(p), _) => Ok(GraphSource::Dataset(p.clone())),
            (None, Some(s)) => Ok(GraphSource::Synthetic(s.clone())),
            (None, None) => Err(Error::Input("config needs `dataset` or `synthetic`".into())),
        }
    }

    fn validate(&self) -> Result<()> {
        if self.n.is_empty() || self.s.is_empty() {
            return Err(Error::Input("config needs nonempty `n` and `s` lists".into()));
        }
        if let Some(s) = self.s.iter().find(|s| !(**s >= 1.0)) {
            return Err(Error::Input(format!("cost scale {} is below 1", s)));
        }
        if !(0.0..1.0).contains(&self.noise_epsilon) {
            return Err(Error::Input("noise_epsilon must lie in [0, 1)".into()));
        }
        Ok(())
    }
}

/// One row of the experiment CSV.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub schema: u32,
    pub instance_id: String,
    pub n: usize,
    pub s: f64,
    pub index: u64,
    pub active_fraction: f64,
    pub mechanism: String,
    pub rule: String,
    pub welfare: Option<f64>,
    pub surplus: Option<f64>,
    pub total_payment: Option<f64>,
    pub winners: Option<usize>,
    pub wall_time_ms: Option<f64>,
    pub queries: Option<u64>,
    pub seed: u64,
    pub skipped: String,
}

/// Mean welfare of one (n, mechanism, rule) group within an active-fraction
/// bucket `[bucket/10, (bucket+1)/10)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SummaryRow {
    pub schema: u32,
    pub n: usize,
    pub mechanism: String,
    pub rule: String,
    pub bucket_lo: f64,
    pub bucket_hi: f64,
    pub count: usize,
    pub mean_welfare: f64,
    pub std_welfare: f64,
}

/// Whether mean welfare follows greedy-margin ≥ greedy-rate ≥ cost-scaled ≥
/// distorted within each bucket where all four were run.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct OrderingCheck {
    pub n: usize,
    pub mechanism: String,
    pub buckets_compared: usize,
    pub buckets_ordered: usize,
}

#[derive(Clone, Debug, Serialize)]
pub struct ExperimentReport {
    pub graph: String,
    pub records: Vec<RunRecord>,
    pub summary: Vec<SummaryRow>,
    pub ordering: Vec<OrderingCheck>,
    /// Spearman correlation between `s` and active fraction, per `n`.
    pub spearman_s_active: Vec<(usize, f64)>,
}

impl ExperimentReport {
    pub fn records_csv(&self) -> Result<String> {
        to_csv(&self.records)
    }

    pub fn summary_csv(&self) -> Result<String> {
        to_csv(&self.summary)
    }
}

pub fn to_csv<T: Serialize>(rows: &[T]) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for r in rows {
        w.serialize(r)?;
    }
    let bytes = w.into_inner().map_err(|e| Error::Internal(e.to_string()))?;
    String::from_utf8(bytes).map_err(|e| Error::Internal(e.to_string()))
}

struct Job {
    n: usize,
    s: f64,
    index: u64,
}

/// Runs the full matrix. Output order and content are independent of the
/// number of worker threads.
pub fn run_experiment(cfg: &ExperimentFile) -> Result<ExperimentReport> {
    cfg.validate()?;
    let source = cfg.graph_source()?;
    let graph = source.load()?;
    run_experiment_on(cfg, &graph, source.label())
}

pub fn run_experiment_on(cfg: &ExperimentFile, graph: &BipartiteGraph, label: String) -> Result<ExperimentReport> {
    cfg.validate()?;
    let mut jobs = Vec::new();
    for &n in &cfg.n {
        for &s in &cfg.s {
            for index in 0..cfg.instances as u64 {
                jobs.push(Job { n, s, index });
            }
        }
    }
    let per_job: Vec<Vec<RunRecord>> = jobs.par_iter().map(|job| run_job(cfg, graph, job)).collect::<Result<_>>()?;
    let records: Vec<RunRecord> = per_job.into_iter().flatten().collect();
    let summary = summarize(&records);
    let ordering = ordering_checks(&summary);
    let spearman_s_active = cfg
        .n
        .iter()
        .map(|&n| {
            let mut seen = BTreeMap::new();
            for r in records.iter().filter(|r| r.n == n) {
                seen.entry((r.s.to_bits(), r.index)).or_insert((r.s, r.active_fraction));
            }
            let (s, a): (Vec<f64>, Vec<f64>) = seen.into_values().unzip();
            (n, spearman(&s, &a))
        })
        .collect();
    Ok(ExperimentReport { graph: label, records, summary, ordering, spearman_s_active })
}

fn run_job(cfg: &ExperimentFile, graph: &BipartiteGraph, job: &Job) -> Result<Vec<RunRecord>> {
    // Instances are shared across s values; only κ changes with s.
    let base_seed = instance_seed(cfg.seed, job.n as u64);
    let ecfg = ExperimentConfig { n: job.n, s: job.s, instances: cfg.instances, seed: base_seed, kappa: cfg.kappa };
    let (inst, costs) = build_instance(graph, &ecfg, job.index)?;
    let af = active_fraction(&inst, &costs);
    let seed = instance_seed(base_seed, job.index);
    let id = format!("n{}-s{}-i{}", job.n, job.s, job.index);
    let mut out = Vec::new();
    for &mech in &cfg.mechanisms {
        let rules: Vec<Option<RuleKind>> =
            if mech.uses_rule() { cfg.rules.iter().copied().map(Some).collect() } else { vec![None] };
        for rule in rules {
            let started = Instant::now();
            let result = run_cell(cfg, mech, rule, &inst, &costs, seed);
            let elapsed = started.elapsed().as_secs_f64() * 1e3;
            let mut rec = RunRecord {
                schema: CSV_SCHEMA,
                instance_id: id.clone(),
                n: job.n,
                s: job.s,
                index: job.index,
                active_fraction: af,
                mechanism: mech.name().into(),
                rule: rule.map_or("none", |r| r.name()).into(),
                welfare: None,
                surplus: None,
                total_payment: None,
                winners: None,
                wall_time_ms: None,
                queries: None,
                seed,
                skipped: String::new(),
            };
            match result {
                Ok(o) => {
                    let w = welfare(&inst, &o.winners, &costs)?;
                    if (w - o.welfare(&costs)).abs() > TOLERANCE {
                        return Err(Error::Internal(format!(
                            "{} {} on {}: reported welfare {} but recomputed {}",
                            rec.mechanism,
                            rec.rule,
                            id,
                            o.welfare(&costs),
                            w
                        )));
                    }
                    rec.welfare = Some(w);
                    rec.surplus = Some(o.surplus);
                    rec.total_payment = Some(o.total_payment());
                    rec.winners = Some(o.winners.len());
                    rec.queries = Some(o.queries);
                    rec.wall_time_ms = cfg.record_timing.then_some(elapsed);
                }
                Err(Error::Capacity(why)) => rec.skipped = why,
                Err(e @ Error::UnsupportedRule { .. }) => rec.skipped = e.to_string(),
                Err(e) => return Err(e),
            }
            out.push(rec);
        }
    }
    Ok(out)
}

fn rule_for(kind: RuleKind, noise: f64) -> ScoringRule {
    match kind {
        RuleKind::NoisyDistortedGreedy => ScoringRule::noisy_distorted(noise),
        k => ScoringRule::new(k),
    }
}

/// Runs one mechanism; the outcome's value is always measured on the
/// noiseless instance.
fn run_cell(
    cfg: &ExperimentFile,
    mech: MechanismKind,
    rule: Option<RuleKind>,
    inst: &CoverageInstance,
    costs: &[f64],
    seed: u64,
) -> Result<AuctionOutcome> {
    let Some(kind) = rule else {
        if inst.num_sellers() > cfg.exact.max_exhaustive_n {
            return Err(Error::Capacity(format!(
                "n = {} exceeds the exhaustive limit {}",
                inst.num_sellers(),
                cfg.exact.max_exhaustive_n
            )));
        }
        return run_vcg(inst, costs, &cfg.exact);
    };
    let rule = rule_for(kind, cfg.noise_epsilon);
    let noisy;
    let oracle: &dyn Valuation = if kind == RuleKind::NoisyDistortedGreedy {
        noisy = NoisyOracle::new(inst, cfg.noise_epsilon, seed)?;
        &noisy
    } else {
        inst
    };
    let rs = RandomSeed(seed);
    let out = match mech {
        MechanismKind::SealedBid if rule.diminishing_return() => run_sealed_bid_lazy(&rule, oracle, costs, rs)?,
        MechanismKind::SealedBid | MechanismKind::SealedBidNaive => run_sealed_bid(&rule, oracle, costs, rs)?,
        MechanismKind::SealedBidLazy => run_sealed_bid_lazy(&rule, oracle, costs, rs)?,
        MechanismKind::PostedPrice => {
            let order = ArrivalOrder::random(inst.num_sellers(), seed);
            run_posted_price(&rule, oracle, costs, &order, rs)?.into_auction_outcome(oracle)?
        }
        MechanismKind::Vcg => unreachable!("VCG takes no rule"),
    };
    // Re-evaluate on the true valuation.
    let q = out.queries;
    let trace = out.trace;
    AuctionOutcome::new(inst, out.winners, out.payments, trace, q)
}

fn bucket(af: f64) -> usize {
    ((af * 10.0).floor() as usize).min(9)
}

pub fn summarize(records: &[RunRecord]) -> Vec<SummaryRow> {
    let mut groups: BTreeMap<(usize, String, String, usize), Vec<f64>> = BTreeMap::new();
    for r in records {
        if let Some(w) = r.welfare {
            groups.entry((r.n, r.mechanism.clone(), r.rule.clone(), bucket(r.active_fraction))).or_default().push(w);
        }
    }
    groups
        .into_iter()
        .map(|((n, mechanism, rule, b), ws)| {
            let (mean, std) = mean_std(&ws);
            SummaryRow {
                schema: CSV_SCHEMA,
                n,
                mechanism,
                rule,
                bucket_lo: b as f64 / 10.0,
                bucket_hi: (b + 1) as f64 / 10.0,
                count: ws.len(),
                mean_welfare: mean,
                std_welfare: std,
            }
        })
        .collect()
}

const ORDER: [RuleKind; 4] =
    [RuleKind::GreedyMargin, RuleKind::GreedyRate, RuleKind::CostScaled, RuleKind::DistortedGreedy];

pub fn ordering_checks(summary: &[SummaryRow]) -> Vec<OrderingCheck> {
    let mut by: BTreeMap<(usize, String), BTreeMap<u64, BTreeMap<String, f64>>> = BTreeMap::new();
    for r in summary {
        by.entry((r.n, r.mechanism.clone()))
            .or_default()
            .entry(r.bucket_lo.to_bits())
            .or_default()
            .insert(r.rule.clone(), r.mean_welfare);
    }
    by.into_iter()
        .filter_map(|((n, mechanism), buckets)| {
            let mut compared = 0;
            let mut ordered = 0;
            for means in buckets.values() {
                let vals: Option<Vec<f64>> = ORDER.iter().map(|k| means.get(k.name()).copied()).collect();
                if let Some(v) = vals {
                    compared += 1;
                    if v.windows(2).all(|w| w[0] >= w[1] - TOLERANCE) {
                        ordered += 1;
                    }
                }
            }
            (compared > 0).then_some(OrderingCheck { n, mechanism, buckets_compared: compared, buckets_ordered: ordered })
        })
        .collect()
}

/// Writes the record CSV to `path` and the bucket summary next to it.
pub fn write_report(report: &ExperimentReport, path: &Path) -> Result<PathBuf> {
    std::fs::write(path, report.records_csv()?)?;
    let summary = path.with_extension("summary.csv");
    std::fs::write(&summary, report.summary_csv()?)?;
    Ok(summary)
}
