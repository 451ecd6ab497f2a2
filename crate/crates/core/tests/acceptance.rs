//! Acceptance checks. Prints one PASS/FAIL line per criterion and exits
//! nonzero if any criterion fails.

use std::time::{Duration, Instant};

use rayon::prelude::*;

use submod_auction::descending::{
    run_descending, CostScaledDemand, Lexicographic, RandomSchedule, RoundRobin, Schedule,
};
use submod_auction::exact::{exact_opt, ExactOptimizerConfig};
use submod_auction::harness::dataset::WIKI_VOTE_ENV;
use submod_auction::harness::experiment::{run_experiment, ExperimentFile, MechanismKind};
use submod_auction::harness::lowerbound::lower_bound;
use submod_auction::harness::SyntheticSpec;
use submod_auction::instances::{build_instance, random_instance, synthetic_graph, ExperimentConfig, KappaMode};
use submod_auction::mechanism::Mechanism;
use submod_auction::online::{run_online_meta, run_posted_price, ArrivalOrder};
use submod_auction::scoring::RandomSeed;
use submod_auction::sealed_bid::{critical_bid, run_sealed_bid, run_sealed_bid_lazy, run_vcg, verify_ic, SealedBid};
use submod_auction::selection::{run_meta_lazy, run_meta_observed, MetaOptions};
use submod_auction::valuation::{CoverageInstance, NoisyOracle};
use submod_auction::{RuleKind, ScoringRule, SellerId, SellerSet, Valuation};

const TOL: f64 = 1e-9;

/// Instance `t` of a batch: `1 + t mod max_n` sellers.
fn instance(batch: u64, t: usize, max_n: usize) -> (CoverageInstance, Vec<f64>) {
    random_instance(1 + t % max_n, batch * 1_000_003 + t as u64).unwrap()
}

fn f_of(inst: &CoverageInstance, set: &SellerSet) -> f64 {
    inst.eval(set.as_slice())
}

/// Brute-force optimum `(f(OPT), c(OPT), welfare)` by enumerating subsets.
fn brute_opt(inst: &CoverageInstance, costs: &[f64]) -> (f64, f64, f64) {
    let n = costs.len();
    assert!(n <= 16);
    let mut best = (0.0, 0.0, 0.0);
    for mask in 1u32..(1 << n) {
        let set = SellerSet::from_indices((0..n).filter(|i| mask >> i & 1 == 1));
        let f = f_of(inst, &set);
        let c = set.total(costs);
        if f - c > best.2 {
            best = (f, c, f - c);
        }
    }
    best
}

fn welfare(inst: &CoverageInstance, set: &SellerSet, costs: &[f64]) -> f64 {
    f_of(inst, set) - set.total(costs)
}

fn betas() -> Vec<f64> {
    (0..=20).map(|j| j as f64 * 0.05).collect()
}

struct Outcome {
    pass: bool,
    detail: String,
    /// Informational lines printed after the verdict.
    notes: Vec<String>,
}

fn ok(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome { pass, detail: detail.into(), notes: Vec::new() }
}

fn deterministic_rules() -> Vec<ScoringRule> {
    vec![
        ScoringRule::greedy_margin(),
        ScoringRule::greedy_rate(),
        ScoringRule::distorted(),
        ScoringRule::roi(),
        ScoringRule::cost_scaled(),
        ScoringRule::noisy_distorted(0.05),
    ]
}

fn c1_feasibility() -> Outcome {
    let mut rules = deterministic_rules();
    rules.push(ScoringRule::stochastic_distorted(0.1));
    let mut lines = Vec::new();
    let mut pass = true;
    for rule in rules {
        let (checks, ic, ir, nas) = (0..500)
            .into_par_iter()
            .map(|t| {
                let (inst, costs) = instance(1, t, 10);
                let noisy = NoisyOracle::new(&inst, rule.noise_epsilon, t as u64).unwrap();
                let oracle: &dyn Valuation = if rule.kind == RuleKind::NoisyDistortedGreedy { &noisy } else { &inst };
                let mut mech = SealedBid::new(rule.clone());
                mech.seed = RandomSeed(t as u64);
                let rep = verify_ic(&mech, oracle, &costs, 20).unwrap();
                let out = mech.run(oracle, &costs).unwrap();
                let ir_bad = (0..costs.len()).any(|i| {
                    if out.winners.contains(SellerId(i)) {
                        out.payments[i] < costs[i] - TOL
                    } else {
                        out.payments[i] != 0.0
                    }
                });
                let paid: f64 = out.payments.iter().sum();
                let nas_bad = f_of(&inst, &out.winners) < paid - TOL;
                (rep.checks, rep.violations.len(), ir_bad as usize, nas_bad as usize)
            })
            .reduce(|| (0, 0, 0, 0), |a, b| (a.0 + b.0, a.1 + b.1, a.2 + b.2, a.3 + b.3));
        let label = if rule.kind == RuleKind::StochasticDistortedGreedy { " (fixed seed, extra)" } else { "" };
        lines.push(format!("{}{}: {} IC/{} IR/{} NAS violations over {} deviations", rule.name(), label, ic, ir, nas, checks));
        pass &= ic == 0 && ir == 0 && nas == 0;
    }
    ok(pass, lines.join("; "))
}

fn c2_critical_bids() -> Outcome {
    let mut worst = 0.0f64;
    let mut compared = 0;
    for rule in deterministic_rules() {
        let (w, c) = (0..200)
            .into_par_iter()
            .map(|t| {
                let (inst, costs) = instance(2, t, 10);
                let noisy = NoisyOracle::new(&inst, rule.noise_epsilon, t as u64).unwrap();
                let oracle: &dyn Valuation = if rule.kind == RuleKind::NoisyDistortedGreedy { &noisy } else { &inst };
                let mech = SealedBid::new(rule.clone());
                let out = mech.run(oracle, &costs).unwrap();
                let mut worst = 0.0f64;
                let mut compared = 0;
                for i in out.winners.iter() {
                    let hi = 4.0 * oracle.eval(&[i]) + 1.0;
                    let cb = critical_bid(&mech, oracle, &costs, i, hi, 1e-10).unwrap();
                    worst = worst.max((cb - out.payments[i.0]).abs());
                    compared += 1;
                }
                (worst, compared)
            })
            .reduce(|| (0.0, 0), |a, b| (a.0.max(b.0), a.1 + b.1));
        worst = worst.max(w);
        compared += c;
    }
    ok(worst <= 1e-6, format!("{} winners across 6 rules, max |payment − bisection| = {:.2e}", compared, worst))
}

fn c3_distorted() -> Outcome {
    let fails: Vec<(usize, f64)> = (0..200)
        .into_par_iter()
        .map(|t| {
            let (inst, costs) = instance(3, t, 12);
            let n = costs.len() as f64;
            let (_, c_opt_ref, _) = brute_opt(&inst, &costs);
            let (opt, _) = exact_opt(&inst, &costs, &ExactOptimizerConfig::default()).unwrap();
            let (fo, co) = (f_of(&inst, &opt), opt.total(&costs));
            debug_assert!(co.is_finite() && c_opt_ref.is_finite());
            let out = run_sealed_bid(&ScoringRule::distorted(), &inst, &costs, RandomSeed(0)).unwrap();
            let w = welfare(&inst, &out.winners, &costs);
            let worst = betas()
                .into_iter()
                .map(|b| w - ((1.0 - (-b).exp()) * fo - (b + 1.0 / n) * co))
                .fold(f64::INFINITY, f64::min);
            (t, worst)
        })
        .collect();
    let bad = fails.iter().filter(|(_, m)| *m < -TOL).count();
    let worst = fails.iter().map(|x| x.1).fold(f64::INFINITY, f64::min);
    ok(bad == 0, format!("200 instances × 21 β values, {} failures, worst margin {:.4}", bad, worst))
}

fn c4_table_guarantees() -> Outcome {
    let rows: Vec<[Option<f64>; 6]> = (0..200)
        .into_par_iter()
        .map(|t| {
            let (inst, costs) = instance(4, t, 12);
            let (fo, co, _) = brute_opt(&inst, &costs);
            let w_of = |rule: &ScoringRule, oracle: &dyn Valuation| {
                let out = run_sealed_bid(rule, oracle, &costs, RandomSeed(t as u64)).unwrap();
                welfare(&inst, &out.winners, &costs)
            };
            let cs = w_of(&ScoringRule::cost_scaled(), &inst) - (0.5 * fo - co);
            let roi = (fo >= co && co > 0.0)
                .then(|| w_of(&ScoringRule::roi(), &inst) - (fo - (1.0 + (fo / co).ln()) * co));
            let mut r = [Some(cs), roi, None, None, None, None];
            for (k, eps) in [0.01, 0.05].into_iter().enumerate() {
                let rule = ScoringRule::noisy_distorted(eps);
                let noisy = NoisyOracle::new(&inst, eps, t as u64).unwrap();
                let out = run_sealed_bid(&rule, &noisy, &costs, RandomSeed(0)).unwrap();
                let f_s = f_of(&inst, &out.winners);
                let c_s = out.winners.total(&costs);
                let x = 1.0 + 2.0 * eps * costs.len() as f64 + eps;
                let a = (1.0 - eps) / x * (1.0 - (-1.0f64).exp());
                // Form obtained at the end of the proof.
                r[2 + k] = Some(f_s - c_s - (a * fo - co));
                // Form as printed in the theorem statement.
                r[4 + k] = Some(f_s - c_s - (a * fo - c_s));
            }
            r
        })
        .collect();
    let count = |j: usize, tol: f64| {
        let vals: Vec<f64> = rows.iter().filter_map(|r| r[j]).collect();
        let bad = vals.iter().filter(|m| **m < -tol).count();
        let worst = vals.iter().copied().fold(f64::INFINITY, f64::min);
        (vals.len(), bad, worst)
    };
    let cs = count(0, TOL);
    let roi = count(1, TOL);
    let n1 = count(2, 1e-7);
    let n5 = count(3, 1e-7);
    let l1 = count(4, 1e-7);
    let l5 = count(5, 1e-7);
    let pass = cs.1 == 0 && roi.1 == 0 && n1.1 == 0 && n5.1 == 0;
    let detail = format!(
        "cost-scaled {}/{} fail (worst {:.3}); roi {}/{} fail on instances with f(OPT) ≥ c(OPT) > 0 (worst {:.3}); \
         noisy ε=0.01 {}/{} fail, ε=0.05 {}/{} fail against f(S)−c(S) ≥ ((1−ε)/x)(1−1/e)f(OPT) − c(OPT)",
        cs.1, cs.0, cs.2, roi.1, roi.0, roi.2, n1.1, n1.0, n5.1, n5.0
    );
    let info = format!(
        "INFO 4   literal noisy statement f(S) ≥ ((1−ε)/x)(1−1/e)f(OPT): ε=0.01 fails {}/{}, ε=0.05 fails {}/{} (worst gap {:.3})",
        l1.1,
        l1.0,
        l5.1,
        l5.0,
        l1.2.min(l5.2)
    );
    Outcome { pass, detail, notes: vec![info] }
}

fn c5_stochastic() -> Outcome {
    let eps_s = 0.1;
    let rule = ScoringRule::stochastic_distorted(eps_s);
    let margins: Vec<f64> = (0..50)
        .into_par_iter()
        .map(|t| {
            let (inst, costs) = instance(5, t, 12);
            let n = costs.len() as f64;
            let (fo, co, _) = brute_opt(&inst, &costs);
            let ws: Vec<f64> = (0..200u64)
                .map(|k| {
                    let out = run_sealed_bid(&rule, &inst, &costs, RandomSeed(k * 7919 + t as u64)).unwrap();
                    welfare(&inst, &out.winners, &costs)
                })
                .collect();
            let mean = ws.iter().sum::<f64>() / 200.0;
            let std = (ws.iter().map(|w| (w - mean).powi(2)).sum::<f64>() / 199.0).sqrt();
            let band = 2.0 * std / 200f64.sqrt();
            betas()
                .into_iter()
                .map(|b| mean - ((1.0 - eps_s) * (1.0 - (-b).exp()) * fo - (b + 1.0 / n) * co - band))
                .fold(f64::INFINITY, f64::min)
        })
        .collect();
    let bad = margins.iter().filter(|m| **m < -TOL).count();
    let worst = margins.iter().copied().fold(f64::INFINITY, f64::min);
    ok(bad as f64 <= 0.05 * 50.0, format!("{}/50 instances below the 2σ band (≤ 2 tolerated), worst margin {:.4}", bad, worst))
}

fn orders_for(rule: &ScoringRule, inst: &CoverageInstance, costs: &[f64], seed: u64) -> Vec<ArrivalOrder> {
    let n = costs.len();
    let mut v = vec![ArrivalOrder::identity(n), ArrivalOrder::reversed(n), ArrivalOrder::worst_of(rule, inst, costs, 200, seed).unwrap()];
    for k in 0..47 {
        v.push(ArrivalOrder::random(n, seed * 131 + k));
    }
    v
}

fn c6_online() -> Outcome {
    let online: Vec<ScoringRule> =
        RuleKind::ALL.into_iter().filter(|k| k.online_capable()).map(ScoringRule::new).collect();
    let mismatches: usize = (0..500)
        .into_par_iter()
        .map(|t| {
            let (inst, costs) = instance(6, t, 12);
            let order = ArrivalOrder::random(costs.len(), t as u64);
            online
                .iter()
                .filter(|rule| {
                    let pp = run_posted_price(rule, &inst, &costs, &order, RandomSeed(0)).unwrap();
                    let meta = run_online_meta(rule, &inst, &costs, &order, RandomSeed(0)).unwrap();
                    pp.winners != meta
                })
                .count()
        })
        .sum();
    let rule = ScoringRule::cost_scaled();
    let (violations, runs) = (0..200)
        .into_par_iter()
        .map(|t| {
            let (inst, costs) = instance(7, t, 12);
            let (fo, co, _) = brute_opt(&inst, &costs);
            let orders = orders_for(&rule, &inst, &costs, t as u64);
            let bad = orders
                .iter()
                .filter(|o| {
                    let s = run_online_meta(&rule, &inst, &costs, o, RandomSeed(0)).unwrap();
                    welfare(&inst, &s, &costs) < 0.5 * fo - co - TOL
                })
                .count();
            (bad, orders.len())
        })
        .reduce(|| (0, 0), |a, b| (a.0 + b.0, a.1 + b.1));
    ok(
        mismatches == 0 && violations == 0,
        format!(
            "{} winner mismatches over 500 pairs × {} rules; cost-scaled below ½f(OPT)−c(OPT) in {}/{} (instance, order) runs",
            mismatches,
            online.len(),
            violations,
            runs
        ),
    )
}

fn c7_lower_bound() -> Outcome {
    let t = Instant::now();
    let mut pass = true;
    let mut parts = Vec::new();
    for l in [10usize, 50, 100] {
        let r = lower_bound(l, 1.0 / (2.0 * l as f64)).unwrap();
        let good = r.exact.welfare <= 2.0 + TOL
            && r.cost_scaled.welfare >= l as f64 / 2.0 - 1.0 - TOL
            && r.opt_welfare == (l - 1) as f64;
        pass &= good;
        parts.push(format!("L={}: OPT {}, exact {}, cost-scaled {}", l, r.opt_welfare, r.exact.welfare, r.cost_scaled.welfare));
    }
    let dt = t.elapsed();
    ok(pass && dt < Duration::from_secs(30), format!("{} ({:.1?})", parts.join("; "), dt))
}

fn c8_descending() -> Outcome {
    let eps = 0.05;
    let (bad, runs, worst) = (0..200)
        .into_par_iter()
        .map(|t| {
            let (inst, costs) = instance(8, t, 12);
            let (fo, co, _) = brute_opt(&inst, &costs);
            let bound = 0.5 * fo - co - costs.len() as f64 * eps;
            let mut scheds: Vec<Box<dyn Schedule>> = vec![Box::new(Lexicographic), Box::new(RoundRobin::default())];
            for r in 0..100u64 {
                scheds.push(Box::new(RandomSchedule::new(t as u64 * 1000 + r)));
            }
            let mut bad = 0;
            let mut worst = f64::INFINITY;
            for s in scheds.iter_mut() {
                let r = run_descending(&inst, &costs, &mut CostScaledDemand::default(), s.as_mut(), eps).unwrap();
                let m = welfare(&inst, &r.outcome.winners, &costs) - bound;
                worst = worst.min(m);
                bad += (m < -TOL) as usize;
            }
            (bad, scheds.len(), worst)
        })
        .reduce(|| (0, 0, f64::INFINITY), |a, b| (a.0 + b.0, a.1 + b.1, a.2.min(b.2)));
    ok(bad == 0, format!("{}/{} schedule runs below the bound, worst margin {:.4}", bad, runs, worst))
}

fn c9_vcg() -> Outcome {
    let cfg = ExactOptimizerConfig::default();
    let (mismatch, deficit) = (0..500)
        .into_par_iter()
        .map(|t| {
            let (inst, costs) = instance(9, t, 12);
            let out = run_vcg(&inst, &costs, &cfg).unwrap();
            let (_, opt_w) = exact_opt(&inst, &costs, &cfg).unwrap();
            let (_, _, brute_w) = brute_opt(&inst, &costs);
            let w = welfare(&inst, &out.winners, &costs);
            let m = w != opt_w || (w - brute_w).abs() > TOL;
            let d = out.payments.iter().sum::<f64>() > f_of(&inst, &out.winners) + TOL;
            (m as usize, d as usize)
        })
        .reduce(|| (0, 0), |a, b| (a.0 + b.0, a.1 + b.1));
    ok(mismatch == 0 && deficit == 0, format!("{} welfare mismatches, {} budget deficits over 500 instances", mismatch, deficit))
}

fn c10_lazy() -> Outcome {
    let rules: Vec<RuleKind> = RuleKind::ALL.into_iter().filter(|k| k.diminishing_return()).collect();
    let diffs: usize = (0..500)
        .into_par_iter()
        .map(|t| {
            let (inst, costs) = instance(10, t, 30);
            rules
                .iter()
                .filter(|k| {
                    let rule = ScoringRule::new(**k);
                    let a = run_sealed_bid(&rule, &inst, &costs, RandomSeed(0)).unwrap();
                    let b = run_sealed_bid_lazy(&rule, &inst, &costs, RandomSeed(0)).unwrap();
                    let bits = |v: &[f64]| v.iter().map(|x| x.to_bits()).collect::<Vec<_>>();
                    a.winners != b.winners || bits(&a.payments) != bits(&b.payments)
                })
                .count()
        })
        .sum();
    let graph = synthetic_graph(7000, 2800, 15.0, 3).unwrap();
    let (inst, costs) = build_instance(&graph, &ExperimentConfig::new(2000, 1.0, 1, 1), 0).unwrap();
    let rule = ScoringRule::greedy_margin();
    let naive = run_meta_observed(&rule, &inst, &costs, RandomSeed(0), &MetaOptions { excluded: None, full_rescore: true }, &mut |_| {})
        .unwrap();
    let lazy = run_meta_lazy(&rule, &inst, &costs, RandomSeed(0)).unwrap();
    let names: Vec<&str> = rules.iter().map(|k| k.name()).collect();
    ok(
        diffs == 0 && lazy.queries < naive.queries && lazy.same_selection(&naive),
        format!(
            "{} differing (instance, rule) pairs over 500 instances for {}; n=2000 queries lazy {} vs naive {}",
            diffs,
            names.join(", "),
            lazy.queries,
            naive.queries
        ),
    )
}

fn experiment_cfg(dataset: Option<std::path::PathBuf>) -> ExperimentFile {
    ExperimentFile {
        synthetic: dataset.is_none().then(SyntheticSpec::default),
        dataset,
        n: vec![100, 200, 500],
        s: vec![1.0, 2.0, 4.0],
        instances: 100,
        seed: 2024,
        mechanisms: vec![MechanismKind::SealedBid],
        rules: vec![RuleKind::GreedyMargin, RuleKind::GreedyRate, RuleKind::CostScaled, RuleKind::DistortedGreedy],
        output: None,
        record_timing: false,
        kappa: KappaMode::PerInstance,
        noise_epsilon: 0.05,
        exact: ExactOptimizerConfig::default(),
    }
}

/// Soft-check misses become WARN notes.
fn c11_experiment(cfg: &ExperimentFile, tag: &str) -> Outcome {
    let t = Instant::now();
    let a = run_experiment(cfg).unwrap();
    let single = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
    let b = single.install(|| run_experiment(cfg)).unwrap();
    let dt = t.elapsed();
    let same = a.records_csv().unwrap() == b.records_csv().unwrap();
    let rho_ok = a.spearman_s_active.iter().all(|(_, r)| *r < 0.0);
    let rhos: Vec<String> = a.spearman_s_active.iter().map(|(n, r)| format!("n={} ρ={:.3}", n, r)).collect();
    let mut warnings = Vec::new();
    for o in &a.ordering {
        let needed = 2.min(o.buckets_compared);
        if o.buckets_ordered < needed {
            warnings.push(format!(
                "WARN {:<4}ordering GM ≥ GR ≥ CS ≥ DG holds in {}/{} active-fraction buckets at n={}",
                tag, o.buckets_ordered, o.buckets_compared, o.n
            ));
        }
    }
    let pass = same && rho_ok && dt < Duration::from_secs(600);
    Outcome {
        pass,
        detail: format!("{} records; spearman(s, active) {}; CSV identical on rerun with 1 thread: {}", a.records.len(), rhos.join(", "), same),
        notes: warnings,
    }
}

fn main() {
    let mut failed = 0;
    let mut report = |id: &str, name: &str, f: &dyn Fn() -> Outcome| {
        let t = Instant::now();
        let o = f();
        println!("{} {:<3} {:<28} {} [{:.1?}]", if o.pass { "PASS" } else { "FAIL" }, id, name, o.detail, t.elapsed());
        for line in &o.notes {
            println!("{}", line);
        }
        failed += !o.pass as usize;
    };
    report("1", "feasibility IC/IR/NAS", &c1_feasibility);
    report("2", "critical-bid cross-check", &c2_critical_bids);
    report("3", "distorted bi-criteria", &c3_distorted);
    report("4", "rule guarantees", &c4_table_guarantees);
    report("5", "stochastic distorted", &c5_stochastic);
    report("6", "online equivalence+bound", &c6_online);
    report("7", "descending lower bound", &c7_lower_bound);
    report("8", "descending guarantee", &c8_descending);
    report("9", "VCG optimality + NAS", &c9_vcg);
    report("10", "lazy equivalence", &c10_lazy);
    match std::env::var_os(WIKI_VOTE_ENV) {
        Some(path) => {
            let cfg = experiment_cfg(Some(path.into()));
            report("11", "experiment (wiki-Vote)", &|| c11_experiment(&cfg, "11"));
        }
        None => {
            println!("BLOCKED 11  experiment (wiki-Vote): set {} to a decompressed wiki-Vote edge list", WIKI_VOTE_ENV);
            let cfg = experiment_cfg(None);
            report("11s", "experiment (synthetic graph)", &|| c11_experiment(&cfg, "11s"));
        }
    }
    if failed > 0 {
        println!("{} criteria failed", failed);
        std::process::exit(1);
    }
}
