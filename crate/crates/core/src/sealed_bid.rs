//! Sealed-bid mechanisms: greedy allocation with critical-bid payments
//! (naive and lazy), VCG, and the IC / IR / NAS checkers.

use rayon::prelude::*;
use serde::Serialize;

use crate::error::Result;
use crate::exact::{exact_opt, exact_opt_over, ExactOptimizerConfig, TieRule};
use crate::mechanism::{AuctionOutcome, Mechanism};
use crate::scoring::{RandomSeed, ScoringRule};
use crate::selection::{
    run_meta, run_meta_lazy_snapshots, run_meta_observed, LazyQueue, MetaOptions, Pop, SelectionTrace,
};
use crate::valuation::{marginal, SellerId, SellerSet, Valuation};
use crate::TOLERANCE;

/// How per-round thresholds combine into a payment.
#[derive(Copy, Clone, Debug, Default, PartialEq, Eq)]
pub enum PaymentRule {
    /// `p_i = max_k min(positive_k, argmax_k)`.
    #[default]
    Conjunction,
    /// `p_i = max_k max(positive_k, argmax_k)`, read literally off the
    /// payment pseudocode. Overpays; for study only.
    SeparateMaxima,
}

/// Greedy allocation with critical-bid payments.
pub fn run_sealed_bid(rule: &ScoringRule, oracle: &dyn Valuation, bids: &[f64], seed: RandomSeed) -> Result<AuctionOutcome> {
    run_sealed_bid_with(rule, oracle, bids, seed, PaymentRule::Conjunction)
}

pub fn run_sealed_bid_with(
    rule: &ScoringRule,
    oracle: &dyn Valuation,
    bids: &[f64],
    seed: RandomSeed,
    payment_rule: PaymentRule,
) -> Result<AuctionOutcome> {
    let trace = run_meta(rule, oracle, bids, seed)?;
    let winners = trace.winners();
    let per_winner: Vec<(SellerId, f64, u64)> = winners
        .as_slice()
        .par_iter()
        .map(|&i| {
            let (p, q) = excluded_rerun_payment(rule, oracle, bids, seed, i, payment_rule)?;
            Ok((i, p, q))
        })
        .collect::<Result<_>>()?;
    let mut payments = vec![0.0; bids.len()];
    let mut queries = trace.queries;
    for (i, p, q) in per_winner {
        payments[i.0] = p;
        queries += q;
    }
    AuctionOutcome::new(oracle, winners, payments, Some(trace), queries)
}

/// Re-runs the selection with `i` excluded and takes the largest per-round
/// threshold.
fn excluded_rerun_payment(
    rule: &ScoringRule,
    oracle: &dyn Valuation,
    bids: &[f64],
    seed: RandomSeed,
    i: SellerId,
    payment_rule: PaymentRule,
) -> Result<(f64, u64)> {
    let opts = MetaOptions { excluded: Some(i), full_rescore: false };
    let mut p: f64 = 0.0;
    let rerun = run_meta_observed(rule, oracle, bids, seed, &opts, &mut |view| {
        let inp = view.shadow.expect("excluded seller has a shadow input");
        let pos = rule.positive_threshold(&inp);
        let arg = rule.argmax_threshold(&inp, i, view.best);
        let z = match payment_rule {
            PaymentRule::Conjunction => pos.min(arg),
            PaymentRule::SeparateMaxima => pos.max(arg),
        };
        p = p.max(z);
    })?;
    Ok((p, rerun.queries))
}

/// Lazy payments for diminishing-return rules. For a winner admitted in round
/// `k`, the excluded re-run coincides with the allocation up to `S_{k−1}`, so
/// the computation resumes from the allocation's queue at round `k`, continues
/// the greedy without `i`, and adds the threshold at the set where it stops.
pub fn run_sealed_bid_lazy(rule: &ScoringRule, oracle: &dyn Valuation, bids: &[f64], seed: RandomSeed) -> Result<AuctionOutcome> {
    let (trace, snapshots) = run_meta_lazy_snapshots(rule, oracle, bids, seed, true)?;
    let per_winner: Vec<(SellerId, f64, u64)> = trace
        .admissions
        .par_iter()
        .zip(snapshots.into_par_iter())
        .enumerate()
        .map(|(k, (adm, snap))| {
            let (p, q) = lazy_payment(rule, oracle, bids, &trace, k, adm.seller, snap);
            (adm.seller, p, q)
        })
        .collect();
    let mut payments = vec![0.0; bids.len()];
    let mut queries = trace.queries;
    for (i, p, q) in per_winner {
        payments[i.0] = p;
        queries += q;
    }
    let winners = trace.winners();
    AuctionOutcome::new(oracle, winners, payments, Some(trace), queries)
}

/// `k` is the number of admissions before `i`'s, so the queue snapshot is
/// fresh at stamp `k`.
fn lazy_payment(
    rule: &ScoringRule,
    oracle: &dyn Valuation,
    bids: &[f64],
    trace: &SelectionTrace,
    k: usize,
    i: SellerId,
    mut queue: LazyQueue,
) -> (f64, u64) {
    let mut eval = oracle.evaluator();
    for a in &trace.admissions[..k] {
        eval.insert(a.seller);
    }
    let params = rule.round_params(1, bids.len());
    let mut stamp = k;
    let mut queries = 0;
    let mut p: f64 = 0.0;
    loop {
        let gain = eval.gain(i);
        queries += 1;
        let inp = rule.input(params, gain, true);
        let pos = rule.positive_threshold(&inp);
        match queue.pop_best(rule, eval.as_mut(), bids, stamp, Some(i), &mut queries) {
            Pop::Winner(e) => {
                p = p.max(pos.min(rule.argmax_threshold(&inp, i, Some((e.score, e.id)))));
                eval.insert(e.id);
                stamp += 1;
            }
            Pop::Exhausted => {
                // Every competitor scores ≤ 0 here, so the argmax threshold
                // is at least the positive one.
                p = p.max(pos);
                break;
            }
        }
    }
    (p, queries)
}

/// VCG over the exact optimizer.
pub fn run_vcg(oracle: &dyn Valuation, bids: &[f64], cfg: &ExactOptimizerConfig) -> Result<AuctionOutcome> {
    crate::selection::check_bids(bids, oracle.num_sellers())?;
    let (opt, w) = exact_opt(oracle, bids, cfg)?;
    let n = oracle.num_sellers();
    let mut payments = vec![0.0; n];
    for i in opt.iter() {
        let mut others = SellerSet::full(n);
        others.remove(i);
        let (_, w_minus) = exact_opt_over(oracle, &others, bids, cfg, TieRule::Lexicographic)?;
        // f(OPT) − Σ_{OPT∖i} b = w + b_i.
        payments[i.0] = w + bids[i.0] - w_minus;
    }
    AuctionOutcome::new(oracle, opt, payments, None, 0)
}

/// Greedy sealed-bid mechanism as a [`Mechanism`].
#[derive(Clone, Debug)]
pub struct SealedBid {
    pub rule: ScoringRule,
    pub seed: RandomSeed,
    pub lazy: bool,
}

impl SealedBid {
    pub fn new(rule: ScoringRule) -> Self {
        SealedBid { rule, seed: RandomSeed(0), lazy: false }
    }
}

impl Mechanism for SealedBid {
    fn name(&self) -> String {
        if self.lazy {
            format!("sealed-bid-lazy/{}", self.rule.name())
        } else {
            format!("sealed-bid/{}", self.rule.name())
        }
    }

    fn run(&self, oracle: &dyn Valuation, bids: &[f64]) -> Result<AuctionOutcome> {
        if self.lazy {
            run_sealed_bid_lazy(&self.rule, oracle, bids, self.seed)
        } else {
            run_sealed_bid(&self.rule, oracle, bids, self.seed)
        }
    }
}

#[derive(Clone, Debug)]
pub struct Vcg {
    pub cfg: ExactOptimizerConfig,
}

impl Mechanism for Vcg {
    fn name(&self) -> String {
        "vcg".into()
    }

    fn run(&self, oracle: &dyn Valuation, bids: &[f64]) -> Result<AuctionOutcome> {
        run_vcg(oracle, bids, &self.cfg)
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct IcViolation {
    pub seller: SellerId,
    pub deviation: f64,
    pub truthful_utility: f64,
    pub deviant_utility: f64,
}

#[derive(Clone, Debug, Default, Serialize)]
pub struct IcReport {
    pub checks: usize,
    pub violations: Vec<IcViolation>,
}

impl IcReport {
    pub fn passed(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Deviation bids `0, …, 2·f(i|∅)` on an evenly spaced grid of `grid` points.
pub fn deviation_grid(f_single: f64, grid: usize) -> Vec<f64> {
    match grid {
        0 => Vec::new(),
        1 => vec![0.0],
        _ => (0..grid).map(|j| 2.0 * f_single * j as f64 / (grid - 1) as f64).collect(),
    }
}

/// Unilateral-deviation check at true costs `costs`.
pub fn verify_ic(mech: &dyn Mechanism, oracle: &dyn Valuation, costs: &[f64], grid: usize) -> Result<IcReport> {
    let truthful = mech.run(oracle, costs)?;
    let mut report = IcReport::default();
    for i in 0..costs.len() {
        let u = truthful.utility(i, costs[i]);
        let single = marginal(oracle, SellerId(i), &SellerSet::new())?;
        for z in deviation_grid(single, grid) {
            let mut bids = costs.to_vec();
            bids[i] = z;
            let dev = mech.run(oracle, &bids)?.utility(i, costs[i]);
            report.checks += 1;
            if u < dev - TOLERANCE {
                report.violations.push(IcViolation {
                    seller: SellerId(i),
                    deviation: z,
                    truthful_utility: u,
                    deviant_utility: dev,
                });
            }
        }
    }
    Ok(report)
}

/// Winners are paid at least their bid; losers are paid nothing.
pub fn verify_ir(outcome: &AuctionOutcome, bids: &[f64]) -> bool {
    (0..bids.len()).all(|i| {
        if outcome.winners.contains(SellerId(i)) {
            outcome.payments[i] >= bids[i] - TOLERANCE
        } else {
            outcome.payments[i] == 0.0
        }
    })
}

/// `f(winners) ≥ Σ payments`.
pub fn verify_nas(outcome: &AuctionOutcome, oracle: &dyn Valuation) -> Result<bool> {
    let v = crate::valuation::value(oracle, &outcome.winners)?;
    Ok(v >= outcome.total_payment() - TOLERANCE)
}

/// Supremum bid at which `i` still wins under `mech`, by bisection on
/// `[0, hi]` down to width `tol`. Returns `+∞` if `i` wins at `hi`.
pub fn critical_bid(
    mech: &dyn Mechanism,
    oracle: &dyn Valuation,
    bids: &[f64],
    i: SellerId,
    hi: f64,
    tol: f64,
) -> Result<f64> {
    let wins = |z: f64| -> Result<bool> {
        let mut b = bids.to_vec();
        b[i.0] = z;
        Ok(mech.run(oracle, &b)?.winners.contains(i))
    };
    if wins(hi)? {
        return Ok(f64::INFINITY);
    }
    if !wins(0.0)? {
        return Ok(0.0);
    }
    let (mut lo, mut hi) = (0.0, hi);
    while hi - lo > tol {
        let mid = 0.5 * (lo + hi);
        if wins(mid)? {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}
