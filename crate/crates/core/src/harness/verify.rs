//! Named property suites over random coverage instances.

use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::Serialize;

use crate::descending::{
    run_descending, run_descending_from_online, CostScaledDemand, Descent, Lexicographic, RandomSchedule, RoundRobin,
    Schedule,
};
use crate::error::{Error, Result};
use crate::exact::{exact_opt, welfare, ExactOptimizerConfig};
use crate::instances::{instance_seed, random_instance};
use crate::mechanism::{FirstPrice, Mechanism};
use crate::online::{run_online_meta, run_posted_price, ArrivalOrder};
use crate::scoring::{RandomSeed, RuleKind, ScoringRule};
use crate::sealed_bid::{run_sealed_bid, run_sealed_bid_lazy, verify_ic, verify_ir, verify_nas, SealedBid};
use crate::valuation::{value, CoverageInstance, NoisyOracle, Valuation};
use crate::TOLERANCE;

#[derive(Copy, Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Suite {
    Ic,
    Ir,
    Nas,
    Guarantees,
    LazyEquivalence,
    OnlineEquivalence,
    Descending,
    /// First-price payments; expected to fail the IC check.
    ControlFirstPrice,
}

impl Suite {
    pub const ALL: [Suite; 8] = [
        Suite::Ic,
        Suite::Ir,
        Suite::Nas,
        Suite::Guarantees,
        Suite::LazyEquivalence,
        Suite::OnlineEquivalence,
        Suite::Descending,
        Suite::ControlFirstPrice,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Suite::Ic => "ic",
            Suite::Ir => "ir",
            Suite::Nas => "nas",
            Suite::Guarantees => "guarantees",
            Suite::LazyEquivalence => "lazy-equivalence",
            Suite::OnlineEquivalence => "online-equivalence",
            Suite::Descending => "descending",
            Suite::ControlFirstPrice => "control-first-price",
        }
    }
}

impl fmt::Display for Suite {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Suite {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Suite::ALL.into_iter().find(|x| x.name() == s).ok_or_else(|| {
            let names: Vec<_> = Suite::ALL.iter().map(|x| x.name()).collect();
            Error::Input(format!("unknown suite `{}` (expected one of {})", s, names.join(", ")))
        })
    }
}

/// Shape of the random instances a suite draws.
#[derive(Clone, Debug, Serialize)]
pub struct VerifyConfig {
    pub trials: usize,
    pub seed: u64,
    /// Instances have `1..=max_n` sellers.
    pub max_n: usize,
    pub grid: usize,
    pub exact: ExactOptimizerConfig,
}

impl VerifyConfig {
    /// Per-suite instance sizes: n ≤ 10 for the feasibility checks, n ≤ 30
    /// for lazy equivalence and n ≤ 12 otherwise.
    pub fn for_suite(suite: Suite, trials: usize, seed: u64) -> Self {
        let max_n = match suite {
            Suite::Ic | Suite::Ir | Suite::Nas | Suite::ControlFirstPrice => 10,
            Suite::LazyEquivalence => 30,
            _ => 12,
        };
        VerifyConfig { trials, seed, max_n, grid: 20, exact: ExactOptimizerConfig::default() }
    }

    pub fn instance(&self, t: usize) -> Result<(CoverageInstance, Vec<f64>, u64)> {
        let s = instance_seed(self.seed, t as u64);
        let n = 1 + (s % self.max_n as u64) as usize;
        let (inst, costs) = random_instance(n, s)?;
        Ok((inst, costs, s))
    }
}

/// Worst margin of one bound family at one β over all instances.
#[derive(Clone, Debug, Serialize)]
pub struct BetaMargin {
    pub beta: f64,
    pub min_margin: f64,
    pub failures: usize,
}

/// One instance's welfare against a bi-criteria bound family.
#[derive(Clone, Debug, Serialize)]
pub struct GuaranteeReport {
    pub rule: String,
    pub instance_id: usize,
    pub f_opt: f64,
    pub c_opt: f64,
    pub welfare: f64,
    /// `(β, welfare − bound(β))`.
    pub margins: Vec<(f64, f64)>,
    pub passed: bool,
}

impl GuaranteeReport {
    fn new(rule: &str, instance_id: usize, f_opt: f64, c_opt: f64, welfare: f64, margins: Vec<(f64, f64)>, tol: f64) -> Self {
        let passed = margins.iter().all(|(_, m)| *m >= -tol);
        GuaranteeReport { rule: rule.into(), instance_id, f_opt, c_opt, welfare, margins, passed }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct SuiteReport {
    pub suite: Suite,
    pub trials: usize,
    pub seed: u64,
    pub checks: usize,
    pub failures: usize,
    /// First few failing cases, human-readable.
    pub counterexamples: Vec<String>,
    /// Per-family β tables; empty except for the guarantees suite.
    pub beta_tables: Vec<(String, Vec<BetaMargin>)>,
    pub notes: Vec<String>,
}

impl SuiteReport {
    fn new(suite: Suite, cfg: &VerifyConfig) -> Self {
        SuiteReport {
            suite,
            trials: cfg.trials,
            seed: cfg.seed,
            checks: 0,
            failures: 0,
            counterexamples: Vec::new(),
            beta_tables: Vec::new(),
            notes: Vec::new(),
        }
    }

    pub fn passed(&self) -> bool {
        self.failures == 0
    }

    fn absorb(&mut self, part: Part) {
        self.checks += part.checks;
        self.failures += part.failures.len();
        for f in part.failures {
            if self.counterexamples.len() < 10 {
                self.counterexamples.push(f);
            }
        }
    }
}

#[derive(Default)]
struct Part {
    checks: usize,
    failures: Vec<String>,
}

impl Part {
    fn check(&mut self, ok: bool, what: impl FnOnce() -> String) {
        self.checks += 1;
        if !ok {
            self.failures.push(what());
        }
    }

    fn merge(mut self, other: Part) -> Part {
        self.checks += other.checks;
        self.failures.extend(other.failures);
        self
    }
}

pub const BETA_GRID_STEPS: usize = 20;

/// `0, 0.05, …, 1`.
pub fn beta_grid() -> Vec<f64> {
    (0..=BETA_GRID_STEPS).map(|j| j as f64 / BETA_GRID_STEPS as f64).collect()
}

/// The six rules with deterministic allocations plus the stochastic rule
/// under a fixed seed.
pub fn feasibility_rules() -> Vec<ScoringRule> {
    RuleKind::ALL
        .into_iter()
        .map(|k| match k {
            RuleKind::NoisyDistortedGreedy => ScoringRule::noisy_distorted(0.05),
            k => ScoringRule::new(k),
        })
        .collect()
}

fn par_trials<F>(cfg: &VerifyConfig, f: F) -> Result<Part>
where
    F: Fn(usize, &CoverageInstance, &[f64], u64) -> Result<Part> + Sync,
{
    let parts: Vec<Part> = (0..cfg.trials)
        .into_par_iter()
        .map(|t| {
            let (inst, costs, s) = cfg.instance(t)?;
            f(t, &inst, &costs, s)
        })
        .collect::<Result<_>>()?;
    Ok(parts.into_iter().fold(Part::default(), Part::merge))
}

fn mechanism_for<'a>(rule: &ScoringRule, inst: &'a CoverageInstance, s: u64) -> Result<(SealedBid, Box<dyn Valuation + 'a>)> {
    let mut mech = SealedBid::new(rule.clone());
    mech.seed = RandomSeed(s);
    let oracle: Box<dyn Valuation + 'a> = if rule.kind == RuleKind::NoisyDistortedGreedy {
        Box::new(NoisyOracle::new(inst, rule.noise_epsilon, s)?)
    } else {
        Box::new(inst)
    };
    Ok((mech, oracle))
}

pub fn run_suite(suite: Suite, cfg: &VerifyConfig) -> Result<SuiteReport> {
    let mut report = SuiteReport::new(suite, cfg);
    match suite {
        Suite::Ic => {
            for rule in feasibility_rules() {
                let part = par_trials(cfg, |t, inst, costs, s| {
                    let (mech, oracle) = mechanism_for(&rule, inst, s)?;
                    let rep = verify_ic(&mech, oracle.as_ref(), costs, cfg.grid)?;
                    let mut p = Part { checks: rep.checks, failures: Vec::new() };
                    if let Some(v) = rep.violations.first() {
                        p.failures.push(format!(
                            "{} instance {}: seller {} gains {} -> {} by bidding {}",
                            rule.name(),
                            t,
                            v.seller,
                            v.truthful_utility,
                            v.deviant_utility,
                            v.deviation
                        ));
                    }
                    Ok(p)
                })?;
                report.absorb(part);
            }
        }
        Suite::Ir | Suite::Nas => {
            for rule in feasibility_rules() {
                let part = par_trials(cfg, |t, inst, costs, s| {
                    let (mech, oracle) = mechanism_for(&rule, inst, s)?;
                    let out = mech.run(oracle.as_ref(), costs)?;
                    let mut p = Part::default();
                    if suite == Suite::Ir {
                        p.check(verify_ir(&out, costs), || {
                            format!("{} instance {}: payments {:?} bids {:?}", rule.name(), t, out.payments, costs)
                        });
                    } else {
                        p.check(verify_nas(&out, inst)?, || {
                            format!("{} instance {}: value {} < payments {}", rule.name(), t, out.value, out.total_payment())
                        });
                    }
                    Ok(p)
                })?;
                report.absorb(part);
            }
        }
        Suite::ControlFirstPrice => {
            let rule = ScoringRule::greedy_margin();
            let part = par_trials(cfg, |t, inst, costs, _| {
                let rep = verify_ic(&FirstPrice { rule: rule.clone(), seed: RandomSeed(0) }, inst, costs, cfg.grid)?;
                let mut p = Part { checks: rep.checks, failures: Vec::new() };
                if let Some(v) = rep.violations.first() {
                    p.failures.push(format!("first-price instance {}: seller {} profits by bidding {}", t, v.seller, v.deviation));
                }
                Ok(p)
            })?;
            report.notes.push("control: first-price payments are not truthful, so this suite should fail".into());
            report.absorb(part);
        }
        Suite::Guarantees => guarantees(cfg, &mut report)?,
        Suite::LazyEquivalence => {
            for kind in RuleKind::ALL.into_iter().filter(|k| k.diminishing_return()) {
                let rule = ScoringRule::new(kind);
                let part = par_trials(cfg, |t, inst, costs, s| {
                    let a = run_sealed_bid(&rule, inst, costs, RandomSeed(s))?;
                    let b = run_sealed_bid_lazy(&rule, inst, costs, RandomSeed(s))?;
                    let same = a.winners == b.winners
                        && a.payments.iter().zip(&b.payments).all(|(x, y)| x.to_bits() == y.to_bits());
                    let mut p = Part::default();
                    p.check(same, || {
                        format!("{} instance {}: naive {:?} lazy {:?}", kind.name(), t, a.payments, b.payments)
                    });
                    Ok(p)
                })?;
                report.absorb(part);
            }
        }
        Suite::OnlineEquivalence => online(cfg, &mut report)?,
        Suite::Descending => descending(cfg, &mut report)?,
    }
    Ok(report)
}

fn opt_of(inst: &CoverageInstance, costs: &[f64], cfg: &VerifyConfig) -> Result<(f64, f64)> {
    let (opt, _) = exact_opt(inst, costs, &cfg.exact)?;
    Ok((value(inst, &opt)?, opt.total(costs)))
}

fn beta_table(reports: &[GuaranteeReport], tol: f64) -> Vec<BetaMargin> {
    let Some(first) = reports.first() else { return Vec::new() };
    (0..first.margins.len())
        .map(|j| BetaMargin {
            beta: first.margins[j].0,
            min_margin: reports.iter().map(|r| r.margins[j].1).fold(f64::INFINITY, f64::min),
            failures: reports.iter().filter(|r| r.margins[j].1 < -tol).count(),
        })
        .collect()
}

/// Welfare of each guarantee-carrying rule against its bound, per instance.
pub fn guarantee_reports(cfg: &VerifyConfig) -> Result<Vec<(String, f64, Vec<GuaranteeReport>)>> {
    let betas = beta_grid();
    let per: Vec<Vec<(usize, GuaranteeReport)>> = (0..cfg.trials)
        .into_par_iter()
        .map(|t| -> Result<Vec<(usize, GuaranteeReport)>> {
            let (inst, costs, s) = cfg.instance(t)?;
            let n = costs.len() as f64;
            let (fo, co) = opt_of(&inst, &costs, cfg)?;
            let run = |rule: &ScoringRule, oracle: &dyn Valuation| -> Result<f64> {
                let out = run_sealed_bid(rule, oracle, &costs, RandomSeed(s))?;
                welfare(&inst, &out.winners, &costs)
            };
            let mut out = Vec::new();

            let w = run(&ScoringRule::distorted(), &inst)?;
            let m = betas.iter().map(|&b| (b, w - ((1.0 - (-b).exp()) * fo - (b + 1.0 / n) * co))).collect();
            out.push((0, GuaranteeReport::new("distorted", t, fo, co, w, m, TOLERANCE)));

            let w = run(&ScoringRule::cost_scaled(), &inst)?;
            out.push((1, GuaranteeReport::new("cost-scaled", t, fo, co, w, vec![(1.0, w - (0.5 * fo - co))], TOLERANCE)));

            if fo >= co && co > 0.0 {
                let w = run(&ScoringRule::roi(), &inst)?;
                let bound = fo - (1.0 + (fo / co).ln()) * co;
                out.push((2, GuaranteeReport::new("roi", t, fo, co, w, vec![(1.0, w - bound)], TOLERANCE)));
            }

            for (slot, eps) in [(3, 0.01), (4, 0.05)] {
                let rule = ScoringRule::noisy_distorted(eps);
                let noisy = NoisyOracle::new(&inst, eps, s)?;
                let w = run(&rule, &noisy)?;
                let x = rule.cost_weight(rule.horizon(costs.len()));
                let a = (1.0 - eps) / x * (1.0 - (-1.0f64).exp());
                let label = if slot == 3 { "noisy-distorted/0.01" } else { "noisy-distorted/0.05" };
                out.push((slot, GuaranteeReport::new(label, t, fo, co, w, vec![(1.0, w - (a * fo - co))], 1e-7)));
            }
            Ok(out)
        })
        .collect::<Result<_>>()?;
    let mut groups: Vec<(String, f64, Vec<GuaranteeReport>)> = vec![
        ("distorted".into(), TOLERANCE, Vec::new()),
        ("cost-scaled".into(), TOLERANCE, Vec::new()),
        ("roi".into(), TOLERANCE, Vec::new()),
        ("noisy-distorted/0.01".into(), 1e-7, Vec::new()),
        ("noisy-distorted/0.05".into(), 1e-7, Vec::new()),
    ];
    for (slot, r) in per.into_iter().flatten() {
        groups[slot].2.push(r);
    }
    Ok(groups)
}

fn guarantees(cfg: &VerifyConfig, report: &mut SuiteReport) -> Result<()> {
    for (label, tol, reps) in guarantee_reports(cfg)? {
        let mut part = Part::default();
        for r in &reps {
            part.check(r.passed, || {
                let worst = r.margins.iter().map(|m| m.1).fold(f64::INFINITY, f64::min);
                format!("{} instance {}: worst margin {}", label, r.instance_id, worst)
            });
        }
        report.beta_tables.push((label.clone(), beta_table(&reps, tol)));
        if label == "roi" {
            report.notes.push(format!("roi bound applies to {} of {} instances (f(OPT) ≥ c(OPT) > 0)", reps.len(), cfg.trials));
        }
        report.absorb(part);
    }
    Ok(())
}

/// Summary of the sampling-based guarantee over one batch of instances.
#[derive(Clone, Debug, Serialize)]
pub struct StochasticCheck {
    pub instances: usize,
    pub seeds: usize,
    pub failures: usize,
    pub worst_margin: f64,
}

/// Mean welfare of the sampling rule over `seeds` seeds against
/// `(1 − ε_s)(1 − e^{−β}) f(OPT) − (β + 1/n) c(OPT)`, less two standard
/// errors, on every β of the grid.
pub fn stochastic_check(cfg: &VerifyConfig, seeds: usize) -> Result<StochasticCheck> {
    let rule = ScoringRule::stochastic_distorted(0.1);
    let betas = beta_grid();
    let margins: Vec<f64> = (0..cfg.trials)
        .into_par_iter()
        .map(|t| -> Result<f64> {
            let (inst, costs, s) = cfg.instance(t)?;
            let n = costs.len() as f64;
            let (fo, co) = opt_of(&inst, &costs, cfg)?;
            let ws: Vec<f64> = (0..seeds as u64)
                .map(|k| {
                    let out = run_sealed_bid(&rule, &inst, &costs, RandomSeed(instance_seed(s, k)))?;
                    welfare(&inst, &out.winners, &costs)
                })
                .collect::<Result<_>>()?;
            let (mean, std) = super::stats::mean_std(&ws);
            let band = 2.0 * std / (seeds as f64).sqrt();
            Ok(betas
                .iter()
                .map(|&b| {
                    mean - ((1.0 - rule.sample_error) * (1.0 - (-b).exp()) * fo - (b + 1.0 / n) * co - band)
                })
                .fold(f64::INFINITY, f64::min))
        })
        .collect::<Result<_>>()?;
    Ok(StochasticCheck {
        instances: cfg.trials,
        seeds,
        failures: margins.iter().filter(|m| **m < -TOLERANCE).count(),
        worst_margin: margins.iter().copied().fold(f64::INFINITY, f64::min),
    })
}

/// Orders used for the online guarantee: identity, reverse, the worst of
/// 200 random orders, then random orders up to `count` in total.
pub fn adversarial_orders(
    rule: &ScoringRule,
    inst: &CoverageInstance,
    costs: &[f64],
    count: usize,
    seed: u64,
) -> Result<Vec<ArrivalOrder>> {
    let n = costs.len();
    let mut orders = vec![ArrivalOrder::identity(n), ArrivalOrder::reversed(n), ArrivalOrder::worst_of(rule, inst, costs, 200, seed)?];
    let mut k = 0;
    while orders.len() < count {
        orders.push(ArrivalOrder::random(n, instance_seed(seed, k)));
        k += 1;
    }
    orders.truncate(count);
    Ok(orders)
}

fn online(cfg: &VerifyConfig, report: &mut SuiteReport) -> Result<()> {
    let online_rules: Vec<ScoringRule> =
        RuleKind::ALL.into_iter().filter(|k| k.online_capable()).map(ScoringRule::new).collect();
    let part = par_trials(cfg, |t, inst, costs, s| {
        let mut p = Part::default();
        let order = ArrivalOrder::random(costs.len(), s);
        for rule in &online_rules {
            let pp = run_posted_price(rule, inst, costs, &order, RandomSeed(s))?;
            let meta = run_online_meta(rule, inst, costs, &order, RandomSeed(s))?;
            p.check(pp.winners == meta, || {
                format!("{} instance {}: posted {} vs online {}", rule.name(), t, pp.winners, meta)
            });
            let pp_outcome = pp.into_auction_outcome(inst)?;
            for descent in [Descent::Direct, Descent::Stepped(0.05)] {
                let d = run_descending_from_online(rule, inst, costs, &order, descent)?;
                let same = d.outcome.winners == pp_outcome.winners
                    && d.outcome.payments.iter().zip(&pp_outcome.payments).all(|(a, b)| (a - b).abs() <= TOLERANCE);
                p.check(same, || format!("{} instance {}: descending conversion ({:?}) differs", rule.name(), t, descent));
            }
        }
        let rule = ScoringRule::cost_scaled();
        let (fo, co) = opt_of(inst, costs, cfg)?;
        for (k, order) in adversarial_orders(&rule, inst, costs, 50, s)?.iter().enumerate() {
            let w = welfare(inst, &run_online_meta(&rule, inst, costs, order, RandomSeed(s))?, costs)?;
            p.check(w >= 0.5 * fo - co - TOLERANCE, || {
                format!("cost-scaled online instance {} order {}: welfare {} < {}", t, k, w, 0.5 * fo - co)
            });
        }
        Ok(p)
    })?;
    report.absorb(part);
    Ok(())
}

/// Step size of the descending-auction guarantee check.
pub const DESCENDING_EPSILON: f64 = 0.05;

/// Lexicographic, round-robin and `random` seeded random schedules.
pub fn schedules(random: usize, seed: u64) -> Vec<Box<dyn Schedule>> {
    let mut v: Vec<Box<dyn Schedule>> = vec![Box::new(Lexicographic), Box::new(RoundRobin::default())];
    for r in 0..random as u64 {
        v.push(Box::new(RandomSchedule::new(instance_seed(seed, r))));
    }
    v
}

fn descending(cfg: &VerifyConfig, report: &mut SuiteReport) -> Result<()> {
    let part = par_trials(cfg, |t, inst, costs, s| {
        let mut p = Part::default();
        let (fo, co) = opt_of(inst, costs, cfg)?;
        let bound = 0.5 * fo - co - costs.len() as f64 * DESCENDING_EPSILON;
        for mut sched in schedules(100, s) {
            let r = run_descending(inst, costs, &mut CostScaledDemand::default(), sched.as_mut(), DESCENDING_EPSILON)?;
            let w = welfare(inst, &r.outcome.winners, costs)?;
            p.check(w >= bound - TOLERANCE, || {
                format!("instance {} schedule {}: welfare {} < {}", t, sched.name(), w, bound)
            });
        }
        Ok(p)
    })?;
    report.absorb(part);
    Ok(())
}
