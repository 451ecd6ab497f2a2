//! The greedy meta selection loop and its lazy priority-queue variant.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use serde::{Deserialize, Serialize};

use crate::error::{input, Error, Result};
use crate::scoring::{RandomSeed, RuleKind, ScoreInput, ScoringRule};
use crate::valuation::{Evaluator, SellerId, SellerSet, Valuation};

/// One admission: seller `seller` joined in round `round` with score `score`
/// and marginal `gain` against the previous tentative set.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Admission {
    pub round: usize,
    pub seller: SellerId,
    pub score: f64,
    pub gain: f64,
}

/// Full record of a selection run. `S_k` is the set of sellers admitted in
/// rounds `1..=k`; rounds with no admission are padding.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SelectionTrace {
    pub n: usize,
    pub rounds: usize,
    pub admissions: Vec<Admission>,
    /// Marginal-gain queries issued by this run.
    pub queries: u64,
}

impl SelectionTrace {
    pub fn winners(&self) -> SellerSet {
        self.admissions.iter().map(|a| a.seller).collect()
    }

    /// `S_k`.
    pub fn tentative_set(&self, k: usize) -> SellerSet {
        self.admissions.iter().take_while(|a| a.round <= k).map(|a| a.seller).collect()
    }

    /// `S_0, …, S_rounds`.
    pub fn tentative_sets(&self) -> Vec<SellerSet> {
        (0..=self.rounds).map(|k| self.tentative_set(k)).collect()
    }

    pub fn chosen_at(&self, i: SellerId) -> Option<usize> {
        self.admissions.iter().find(|a| a.seller == i).map(|a| a.round)
    }

    pub fn admission(&self, i: SellerId) -> Option<&Admission> {
        self.admissions.iter().find(|a| a.seller == i)
    }

    /// Same winners, in the same rounds.
    pub fn same_selection(&self, other: &SelectionTrace) -> bool {
        self.rounds == other.rounds
            && self.admissions.len() == other.admissions.len()
            && self.admissions.iter().zip(&other.admissions).all(|(a, b)| a.round == b.round && a.seller == b.seller)
    }

    /// JSON with the expanded tentative-set chain.
    pub fn to_json(&self) -> Result<serde_json::Value> {
        let chosen: Vec<Option<usize>> = (0..self.n).map(|i| self.chosen_at(SellerId(i))).collect();
        Ok(serde_json::json!({
            "tentative_sets": self.tentative_sets(),
            "chosen_at": chosen,
            "admissions": self.admissions,
            "queries": self.queries,
        }))
    }
}

pub(crate) fn check_bids(bids: &[f64], n: usize) -> Result<()> {
    if bids.len() != n {
        return input(format!("expected {} bids, got {}", n, bids.len()));
    }
    if let Some((i, b)) = bids.iter().enumerate().find(|(_, b)| !(b.is_finite() && **b >= 0.0)) {
        return input(format!("bid {} of seller {} is not a nonnegative real", b, i));
    }
    Ok(())
}

/// Knobs for [`run_meta_observed`].
#[derive(Clone, Debug, Default)]
pub struct MetaOptions {
    /// Seller treated as bidding `+∞`: never admitted, but its score input is
    /// still computed every round and reported to the observer.
    pub excluded: Option<SellerId>,
    /// Re-query every candidate's marginal every round instead of only those
    /// whose marginal may have changed. Outputs are identical; only the query
    /// count differs.
    pub full_rescore: bool,
}

/// What the observer sees at the start of each round, before admission.
pub struct RoundView<'a> {
    pub round: usize,
    pub tentative: &'a SellerSet,
    /// Score input of the excluded seller, if any.
    pub shadow: Option<ScoreInput>,
    /// Best eligible score and its owner.
    pub best: Option<(f64, SellerId)>,
}

/// Per-run marginal cache. A cached gain is reused until an insertion
/// touches the seller; for the noisy rule it also tracks the running minimum
/// over the trajectory.
struct GainCache {
    gain: Vec<f64>,
    stale: Vec<bool>,
    trail_min: Option<Vec<f64>>,
    queries: u64,
}

impl GainCache {
    fn new(n: usize, track_min: bool) -> Self {
        GainCache {
            gain: vec![0.0; n],
            stale: vec![true; n],
            trail_min: track_min.then(|| vec![f64::INFINITY; n]),
            queries: 0,
        }
    }

    fn get(&mut self, eval: &mut dyn Evaluator, i: SellerId) -> f64 {
        if self.stale[i.0] {
            let g = eval.gain(i);
            self.queries += 1;
            self.gain[i.0] = g;
            self.stale[i.0] = false;
            if let Some(m) = self.trail_min.as_mut() {
                m[i.0] = m[i.0].min(g);
            }
        }
        match &self.trail_min {
            Some(m) => m[i.0],
            None => self.gain[i.0],
        }
    }

    fn invalidate(&mut self, eval: &dyn Evaluator) {
        match eval.touched() {
            Some(list) => list.iter().for_each(|i| self.stale[i.0] = true),
            None => self.invalidate_all(),
        }
    }

    fn invalidate_all(&mut self) {
        self.stale.iter_mut().for_each(|s| *s = true);
    }
}

/// Algorithm 1: `n` rounds (or the cardinality horizon), each admitting the
/// lexicographically first argmax iff its score is positive.
pub fn run_meta(rule: &ScoringRule, oracle: &dyn Valuation, bids: &[f64], seed: RandomSeed) -> Result<SelectionTrace> {
    run_meta_observed(rule, oracle, bids, seed, &MetaOptions::default(), &mut |_| {})
}

pub fn run_meta_observed(
    rule: &ScoringRule,
    oracle: &dyn Valuation,
    bids: &[f64],
    seed: RandomSeed,
    opts: &MetaOptions,
    observer: &mut dyn FnMut(&RoundView),
) -> Result<SelectionTrace> {
    let n = oracle.num_sellers();
    check_bids(bids, n)?;
    if let Some(x) = opts.excluded {
        if x.0 >= n {
            return input(format!("excluded seller {} out of range", x));
        }
    }
    let horizon = rule.horizon(n);
    let stochastic = rule.kind == RuleKind::StochasticDistortedGreedy;
    let batch = rule.batch_size(n, horizon);
    let mut eval = oracle.evaluator();
    let mut cache = GainCache::new(n, rule.kind == RuleKind::NoisyDistortedGreedy);
    let mut tentative = SellerSet::new();
    let mut admissions = Vec::new();
    let mut sampled = vec![true; n];
    // Sorted candidates: not yet admitted and not excluded.
    let mut remaining: Vec<usize> = (0..n).filter(|&i| opts.excluded != Some(SellerId(i))).collect();

    for round in 1..=horizon {
        let params = rule.round_params(round, n);
        if stochastic {
            sampled.iter_mut().for_each(|s| *s = false);
            for i in seed.batch(round, n, batch) {
                sampled[i.0] = true;
            }
        }
        if opts.full_rescore {
            cache.invalidate_all();
        }
        let mut best: Option<(f64, SellerId, f64)> = None;
        for &idx in &remaining {
            let i = SellerId(idx);
            let (score, g) = if sampled[idx] {
                let g = cache.get(eval.as_mut(), i);
                (rule.score(&rule.input(params, g, true), bids[idx]), g)
            } else {
                (f64::NEG_INFINITY, f64::NAN)
            };
            if best.map_or(true, |(s, _, _)| score > s) {
                best = Some((score, i, g));
            }
        }
        let shadow = opts.excluded.map(|x| {
            let g = cache.get(eval.as_mut(), x);
            rule.input(params, g, sampled[x.0])
        });
        observer(&RoundView { round, tentative: &tentative, shadow, best: best.map(|(s, i, _)| (s, i)) });
        if let Some((score, i, gain)) = best {
            if score > 0.0 {
                admissions.push(Admission { round, seller: i, score, gain });
                tentative.insert(i);
                if let Ok(pos) = remaining.binary_search(&i.0) {
                    remaining.remove(pos);
                }
                eval.insert(i);
                cache.invalidate(eval.as_ref());
            }
        }
    }
    Ok(SelectionTrace { n, rounds: horizon, admissions, queries: cache.queries })
}

/// Max-heap entry ordered by score, then by smaller id. `stamp` is the number
/// of admissions at the time the score was computed.
#[derive(Copy, Clone, Debug)]
pub(crate) struct Entry {
    pub score: f64,
    pub gain: f64,
    pub id: SellerId,
    pub stamp: usize,
}

impl PartialEq for Entry {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for Entry {}

impl PartialOrd for Entry {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Entry {
    fn cmp(&self, other: &Self) -> Ordering {
        self.score
            .partial_cmp(&other.score)
            .unwrap_or(Ordering::Equal)
            .then_with(|| other.id.cmp(&self.id))
    }
}

/// Lazy queue over a diminishing-return rule. Stale scores upper-bound fresh
/// ones, so a popped entry that is already fresh is the exact argmax.
#[derive(Clone)]
pub(crate) struct LazyQueue {
    pub heap: BinaryHeap<Entry>,
}

pub(crate) enum Pop {
    /// Fresh argmax, removed from the queue.
    Winner(Entry),
    /// Every remaining score is `≤ 0`.
    Exhausted,
}

impl LazyQueue {
    pub fn build(
        rule: &ScoringRule,
        eval: &mut dyn Evaluator,
        bids: &[f64],
        skip: Option<SellerId>,
        queries: &mut u64,
    ) -> Self {
        let params = rule.round_params(1, bids.len());
        let heap = (0..bids.len())
            .map(SellerId)
            .filter(|&i| Some(i) != skip)
            .map(|i| {
                let gain = eval.gain(i);
                *queries += 1;
                Entry { score: rule.score(&rule.input(params, gain, true), bids[i.0]), gain, id: i, stamp: 0 }
            })
            .collect();
        LazyQueue { heap }
    }

    /// Finds the argmax at the evaluator's current set (version `stamp`),
    /// skipping `skip`. Stops early once no remaining score can be positive.
    pub fn pop_best(
        &mut self,
        rule: &ScoringRule,
        eval: &mut dyn Evaluator,
        bids: &[f64],
        stamp: usize,
        skip: Option<SellerId>,
        queries: &mut u64,
    ) -> Pop {
        let params = rule.round_params(1, bids.len());
        while let Some(top) = self.heap.pop() {
            if Some(top.id) == skip {
                continue;
            }
            if top.stamp == stamp {
                if top.score > 0.0 {
                    return Pop::Winner(top);
                }
                self.heap.push(top);
                return Pop::Exhausted;
            }
            let gain = eval.gain(top.id);
            *queries += 1;
            let fresh = Entry { score: rule.score(&rule.input(params, gain, true), bids[top.id.0]), gain, id: top.id, stamp };
            let next_bound = self.heap.peek().map_or(f64::NEG_INFINITY, |e| e.score);
            self.heap.push(fresh);
            if fresh.score <= 0.0 && next_bound <= 0.0 {
                return Pop::Exhausted;
            }
        }
        Pop::Exhausted
    }
}

pub(crate) fn require_diminishing(rule: &ScoringRule, what: &'static str) -> Result<()> {
    if rule.diminishing_return() {
        Ok(())
    } else {
        Err(Error::UnsupportedRule { rule: rule.name(), what })
    }
}

/// Algorithm 8. Same selection as [`run_meta`] for diminishing-return rules,
/// with fewer marginal queries.
pub fn run_meta_lazy(rule: &ScoringRule, oracle: &dyn Valuation, bids: &[f64], seed: RandomSeed) -> Result<SelectionTrace> {
    run_meta_lazy_snapshots(rule, oracle, bids, seed, false).map(|(t, _)| t)
}

/// Also returns the queue as it stood at the start of each admission round,
/// which the lazy payment rule resumes from.
pub(crate) fn run_meta_lazy_snapshots(
    rule: &ScoringRule,
    oracle: &dyn Valuation,
    bids: &[f64],
    _seed: RandomSeed,
    keep_snapshots: bool,
) -> Result<(SelectionTrace, Vec<LazyQueue>)> {
    require_diminishing(rule, "lazy selection")?;
    let n = oracle.num_sellers();
    check_bids(bids, n)?;
    let horizon = rule.horizon(n);
    let mut queries = 0;
    let mut eval = oracle.evaluator();
    let mut queue = LazyQueue::build(rule, eval.as_mut(), bids, None, &mut queries);
    let mut admissions = Vec::new();
    let mut snapshots = Vec::new();
    for round in 1..=horizon {
        let snap = keep_snapshots.then(|| queue.clone());
        match queue.pop_best(rule, eval.as_mut(), bids, admissions.len(), None, &mut queries) {
            Pop::Winner(e) => {
                admissions.push(Admission { round, seller: e.id, score: e.score, gain: e.gain });
                eval.insert(e.id);
                snapshots.extend(snap);
            }
            Pop::Exhausted => break,
        }
    }
    Ok((SelectionTrace { n, rounds: horizon, admissions, queries }, snapshots))
}
