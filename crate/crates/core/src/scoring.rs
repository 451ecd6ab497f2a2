//! Scoring rules `G(i, S, b, k, r)` for the greedy meta algorithm.
//!
//! Each rule scores a candidate from a small [`ScoreInput`]: the candidate's
//! marginal gain (or, for the noisy rule, the minimum noisy marginal along the
//! trajectory), the round's distortion multiplier, the rule's cost weight and
//! whether the candidate was sampled this round. Every rule is affine or a
//! simple ratio in the candidate's own bid, so payment thresholds and posted
//! prices are obtained by closed-form inversion rather than root finding.

use std::fmt;
use std::hash::Hash;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{input, Error, Result};
use crate::valuation::{marginal, SellerId, SellerSet, Valuation};

#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum RuleKind {
    #[serde(rename = "greedy-margin")]
    GreedyMargin,
    #[serde(rename = "greedy-rate")]
    GreedyRate,
    #[serde(rename = "distorted")]
    DistortedGreedy,
    #[serde(rename = "stochastic-distorted")]
    StochasticDistortedGreedy,
    #[serde(rename = "roi")]
    RoiGreedy,
    #[serde(rename = "cost-scaled")]
    CostScaled,
    #[serde(rename = "noisy-distorted")]
    NoisyDistortedGreedy,
}

impl RuleKind {
    pub const ALL: [RuleKind; 7] = [
        RuleKind::GreedyMargin,
        RuleKind::GreedyRate,
        RuleKind::DistortedGreedy,
        RuleKind::StochasticDistortedGreedy,
        RuleKind::RoiGreedy,
        RuleKind::CostScaled,
        RuleKind::NoisyDistortedGreedy,
    ];

    /// Canonical CLI name.
    pub fn name(self) -> &'static str {
        match self {
            RuleKind::GreedyMargin => "greedy-margin",
            RuleKind::GreedyRate => "greedy-rate",
            RuleKind::DistortedGreedy => "distorted",
            RuleKind::StochasticDistortedGreedy => "stochastic-distorted",
            RuleKind::RoiGreedy => "roi",
            RuleKind::CostScaled => "cost-scaled",
            RuleKind::NoisyDistortedGreedy => "noisy-distorted",
        }
    }

    /// `G(i, S, b, j) ≥ G(i, T, b, k)` whenever `S ⊆ T` and `j ≤ k`.
    pub fn diminishing_return(self) -> bool {
        matches!(self, RuleKind::GreedyMargin | RuleKind::GreedyRate | RuleKind::RoiGreedy | RuleKind::CostScaled)
    }

    /// The score ignores the round index and horizon, so the rule can run on
    /// sellers arriving one at a time.
    pub fn online_capable(self) -> bool {
        self.diminishing_return()
    }

    pub fn randomized(self) -> bool {
        self == RuleKind::StochasticDistortedGreedy
    }

    fn distorted(self) -> bool {
        matches!(
            self,
            RuleKind::DistortedGreedy | RuleKind::StochasticDistortedGreedy | RuleKind::NoisyDistortedGreedy
        )
    }
}

impl fmt::Display for RuleKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for RuleKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        RuleKind::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| Error::Input(format!("unknown rule `{}`", s)))
    }
}

/// A scoring rule plus its parameters.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScoringRule {
    pub kind: RuleKind,
    /// Cardinality bound `k` for the distorted variants; the horizon defaults
    /// to `n` (unconstrained problem).
    pub cardinality: Option<usize>,
    /// Sampling error `ε_s` of the stochastic rule.
    pub sample_error: f64,
    /// Noise level `ε` the noisy rule is tuned for.
    pub noise_epsilon: f64,
    /// Cost multiplier `x` of the noisy rule; defaults to `1 + 2εk + ε`.
    pub cost_multiplier: Option<f64>,
}

impl ScoringRule {
    pub fn new(kind: RuleKind) -> Self {
        ScoringRule { kind, cardinality: None, sample_error: 0.1, noise_epsilon: 0.0, cost_multiplier: None }
    }

    pub fn greedy_margin() -> Self {
        Self::new(RuleKind::GreedyMargin)
    }
    pub fn greedy_rate() -> Self {
        Self::new(RuleKind::GreedyRate)
    }
    pub fn distorted() -> Self {
        Self::new(RuleKind::DistortedGreedy)
    }
    pub fn stochastic_distorted(sample_error: f64) -> Self {
        ScoringRule { sample_error, ..Self::new(RuleKind::StochasticDistortedGreedy) }
    }
    pub fn roi() -> Self {
        Self::new(RuleKind::RoiGreedy)
    }
    pub fn cost_scaled() -> Self {
        Self::new(RuleKind::CostScaled)
    }
    pub fn noisy_distorted(noise_epsilon: f64) -> Self {
        ScoringRule { noise_epsilon, ..Self::new(RuleKind::NoisyDistortedGreedy) }
    }

    pub fn with_cardinality(mut self, k: usize) -> Self {
        self.cardinality = Some(k);
        self
    }

    pub fn name(&self) -> &'static str {
        self.kind.name()
    }

    pub fn diminishing_return(&self) -> bool {
        self.kind.diminishing_return()
    }

    pub fn online_capable(&self) -> bool {
        self.kind.online_capable()
    }

    /// Number of rounds the meta algorithm runs on `n` sellers.
    pub fn horizon(&self, n: usize) -> usize {
        match self.cardinality {
            Some(k) if self.kind.distorted() => k.min(n),
            _ => n,
        }
    }

    /// `(1 − 1/k)^(k − round)` for the distorted rules, 1 otherwise.
    pub fn multiplier(&self, round: usize, horizon: usize) -> f64 {
        if !self.kind.distorted() || horizon == 0 {
            return 1.0;
        }
        let exp = horizon.saturating_sub(round) as i32;
        (1.0 - 1.0 / horizon as f64).powi(exp)
    }

    /// Weight on the candidate's own bid in affine rules.
    pub fn cost_weight(&self, horizon: usize) -> f64 {
        match self.kind {
            RuleKind::CostScaled => 2.0,
            RuleKind::NoisyDistortedGreedy => self
                .cost_multiplier
                .unwrap_or(1.0 + 2.0 * self.noise_epsilon * horizon as f64 + self.noise_epsilon),
            _ => 1.0,
        }
    }

    /// Per-round sample size `⌈(n/k) ln(1/ε_s)⌉` of the stochastic rule.
    pub fn batch_size(&self, n: usize, horizon: usize) -> usize {
        if horizon == 0 {
            return 0;
        }
        let s = (n as f64 / horizon as f64) * (1.0 / self.sample_error).ln();
        (s.ceil() as usize).max(1)
    }

    /// Round-level parameters shared by every candidate in round `round`.
    pub fn round_params(&self, round: usize, n: usize) -> RoundParams {
        let horizon = self.horizon(n);
        RoundParams { multiplier: self.multiplier(round, horizon), cost_weight: self.cost_weight(horizon) }
    }

    pub fn input(&self, params: RoundParams, gain: f64, sampled: bool) -> ScoreInput {
        ScoreInput { gain, multiplier: params.multiplier, cost_weight: params.cost_weight, sampled }
    }

    fn constant_in_bid(&self, input: &ScoreInput) -> bool {
        match self.kind {
            RuleKind::StochasticDistortedGreedy => !input.sampled,
            RuleKind::GreedyRate => input.gain <= 0.0,
            _ => false,
        }
    }

    /// `G(i, S, b, k, r)`.
    pub fn score(&self, input: &ScoreInput, bid: f64) -> f64 {
        let g = input.gain;
        match self.kind {
            RuleKind::GreedyRate => {
                if g <= 0.0 {
                    f64::NEG_INFINITY
                } else {
                    (g - bid) / g
                }
            }
            RuleKind::RoiGreedy => {
                if bid == 0.0 {
                    if g > 0.0 {
                        f64::INFINITY
                    } else {
                        0.0
                    }
                } else {
                    (g - bid) / bid
                }
            }
            RuleKind::StochasticDistortedGreedy if !input.sampled => f64::NEG_INFINITY,
            _ => input.multiplier * g - input.cost_weight * bid,
        }
    }

    /// `sup { b ≥ 0 : G(i, S, b) > 0 }`, or 0 when the set is empty.
    pub fn positive_threshold(&self, input: &ScoreInput) -> f64 {
        match self.kind {
            RuleKind::GreedyRate | RuleKind::RoiGreedy => input.gain.max(0.0),
            RuleKind::StochasticDistortedGreedy if !input.sampled => 0.0,
            _ => (input.multiplier * input.gain / input.cost_weight).max(0.0),
        }
    }

    /// `sup { b ≥ 0 : i = argmax_ℓ G(ℓ, S, b) }` given the best competing
    /// score and its owner. Ties go to the smaller seller index. Returns
    /// `+∞` when there is no competitor.
    pub fn argmax_threshold(&self, input: &ScoreInput, me: SellerId, competitor: Option<(f64, SellerId)>) -> f64 {
        let Some((s, other)) = competitor else {
            return f64::INFINITY;
        };
        let wins_ties = me < other;
        if self.constant_in_bid(input) {
            let c = self.score(input, 0.0);
            return if c > s || (c == s && wins_ties) { f64::INFINITY } else { 0.0 };
        }
        if s == f64::NEG_INFINITY {
            return f64::INFINITY;
        }
        if s == f64::INFINITY {
            // Only a free ROI seller reaches +∞, and only at bid 0.
            return 0.0;
        }
        let g = input.gain;
        match self.kind {
            RuleKind::GreedyRate => (g * (1.0 - s)).max(0.0),
            RuleKind::RoiGreedy => {
                if g > 0.0 {
                    if s <= -1.0 {
                        f64::INFINITY
                    } else {
                        g / (1.0 + s)
                    }
                } else if s < -1.0 || (s == -1.0 && wins_ties) {
                    f64::INFINITY
                } else {
                    0.0
                }
            }
            _ => ((input.multiplier * g - s) / input.cost_weight).max(0.0),
        }
    }

    /// The unique root in `z` of `G(k, S, z) = 0` for online-capable rules.
    pub fn online_price(&self, gain: f64) -> Result<f64> {
        match self.kind {
            RuleKind::GreedyMargin | RuleKind::GreedyRate | RuleKind::RoiGreedy => Ok(gain.max(0.0)),
            RuleKind::CostScaled => Ok((gain / 2.0).max(0.0)),
            _ => Err(Error::UnsupportedRule { rule: self.name(), what: "online pricing" }),
        }
    }

    /// Builds the score input for candidate `i` in `ctx` by querying the
    /// oracle directly (the trajectory minimum for the noisy rule, the
    /// sampled batch for the stochastic rule).
    pub fn input_in_context(
        &self,
        oracle: &dyn Valuation,
        ctx: &ScoreContext,
        i: SellerId,
        seed: RandomSeed,
    ) -> Result<ScoreInput> {
        let n = oracle.num_sellers();
        if ctx.tentative.contains(i) {
            return input(format!("seller {} is already in the tentative set", i));
        }
        let gain = if self.kind == RuleKind::NoisyDistortedGreedy && !ctx.trajectory.is_empty() {
            let mut m = f64::INFINITY;
            for s in &ctx.trajectory {
                m = m.min(marginal(oracle, i, s)?);
            }
            m
        } else {
            marginal(oracle, i, &ctx.tentative)?
        };
        let sampled = if self.kind.randomized() {
            seed.batch(ctx.round, n, self.batch_size(n, self.horizon(n))).contains(&i)
        } else {
            true
        };
        Ok(self.input(self.round_params(ctx.round, n), gain, sampled))
    }

    /// `G(i, S, b, k, r)` evaluated against the oracle.
    pub fn score_in_context(
        &self,
        oracle: &dyn Valuation,
        ctx: &ScoreContext,
        i: SellerId,
        bid: f64,
        seed: RandomSeed,
    ) -> Result<f64> {
        Ok(self.score(&self.input_in_context(oracle, ctx, i, seed)?, bid))
    }
}

impl FromStr for ScoringRule {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(ScoringRule::new(s.parse()?))
    }
}

/// Per-round quantities shared by all candidates.
#[derive(Copy, Clone, Debug, PartialEq)]
pub struct RoundParams {
    pub multiplier: f64,
    pub cost_weight: f64,
}

/// Everything a rule needs to score one candidate, apart from its bid.
#[derive(Copy, Clone, Debug, PartialEq)]
pub struct ScoreInput {
    pub gain: f64,
    pub multiplier: f64,
    pub cost_weight: f64,
    pub sampled: bool,
}

/// Tentative set, the chain of tentative sets so far, and the round index.
#[derive(Clone, Debug, Default)]
pub struct ScoreContext {
    pub tentative: SellerSet,
    /// `S_0 ⊆ S_1 ⊆ … ⊆ tentative`; only the noisy rule reads it.
    pub trajectory: Vec<SellerSet>,
    pub round: usize,
}

impl ScoreContext {
    pub fn new(tentative: SellerSet, round: usize) -> Self {
        ScoreContext { trajectory: vec![tentative.clone()], tentative, round }
    }
}

/// Seed for randomized rules. Round `k`'s draws depend only on `(seed, k)`.
#[derive(Copy, Clone, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct RandomSeed(pub u64);

impl RandomSeed {
    fn round_rng(self, round: usize) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(crate::splitmix64(crate::splitmix64(self.0) ^ round as u64))
    }

    /// `size` sellers drawn uniformly and independently for round `round`.
    pub fn batch(self, round: usize, n: usize, size: usize) -> Vec<SellerId> {
        if n == 0 {
            return Vec::new();
        }
        let mut rng = self.round_rng(round);
        (0..size).map(|_| SellerId(rng.gen_range(0..n))).collect()
    }

    /// The single-draw form `r(k)`.
    pub fn draw(self, round: usize, n: usize) -> Option<SellerId> {
        self.batch(round, n, 1).into_iter().next()
    }
}

// ---------------------------------------------------------------------------
// Assumption checks

/// A score as a function of the full bid vector; lets the validator probe
/// dependence on other sellers' bids and accept hand-built fixtures.
pub trait BidScore {
    fn label(&self) -> String;
    fn score_bids(
        &self,
        oracle: &dyn Valuation,
        ctx: &ScoreContext,
        i: SellerId,
        bids: &[f64],
        seed: RandomSeed,
    ) -> Result<f64>;
}

impl BidScore for ScoringRule {
    fn label(&self) -> String {
        self.name().to_string()
    }

    fn score_bids(
        &self,
        oracle: &dyn Valuation,
        ctx: &ScoreContext,
        i: SellerId,
        bids: &[f64],
        seed: RandomSeed,
    ) -> Result<f64> {
        self.score_in_context(oracle, ctx, i, bids[i.0], seed)
    }
}

/// A sampled `(i, S, b)` that breaks an assumption.
#[derive(Clone, Debug, Serialize)]
pub struct Counterexample {
    pub seller: SellerId,
    pub tentative: SellerSet,
    pub round: usize,
    pub bid: f64,
    pub detail: String,
}

#[derive(Clone, Debug, Default, Serialize)]
pub struct AssumptionReport {
    pub rule: String,
    pub trials: usize,
    /// (1) non-increasing in the candidate's own bid.
    pub monotone: Option<Counterexample>,
    /// (2) negative whenever the bid exceeds the marginal.
    pub negative_above_marginal: Option<Counterexample>,
    /// (3) independent of other sellers' bids.
    pub independent_of_others: Option<Counterexample>,
}

impl AssumptionReport {
    pub fn passed(&self) -> bool {
        self.monotone.is_none() && self.negative_above_marginal.is_none() && self.independent_of_others.is_none()
    }
}

const BID_GRID: usize = 20;

/// Randomized check of the three scoring assumptions over `trials` samples.
pub fn validate_assumptions(
    rule: &dyn BidScore,
    oracle: &dyn Valuation,
    trials: usize,
    seed: u64,
) -> Result<AssumptionReport> {
    let n = oracle.num_sellers();
    let mut report = AssumptionReport { rule: rule.label(), trials, ..Default::default() };
    if n == 0 {
        return Ok(report);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..trials {
        let i = SellerId(rng.gen_range(0..n));
        let tentative: SellerSet = (0..n).filter(|&j| j != i.0 && rng.gen_bool(0.5)).map(SellerId).collect();
        let round = rng.gen_range(1..=n);
        let ctx = ScoreContext::new(tentative.clone(), round);
        let draw_seed = RandomSeed(rng.gen());
        let gain = marginal(oracle, i, &tentative)?;
        let scale = 2.0 * gain.max(0.0) + 1.0;
        let mut bids: Vec<f64> = (0..n).map(|_| rng.gen_range(0.0..scale)).collect();
        let cex = |bid: f64, detail: String| Counterexample {
            seller: i,
            tentative: tentative.clone(),
            round,
            bid,
            detail,
        };

        if report.monotone.is_none() {
            let mut prev = f64::INFINITY;
            for step in 0..=BID_GRID {
                let z = scale * step as f64 / BID_GRID as f64;
                bids[i.0] = z;
                let s = rule.score_bids(oracle, &ctx, i, &bids, draw_seed)?;
                if s.is_nan() || s > prev {
                    report.monotone = Some(cex(z, format!("score rose from {} to {}", prev, s)));
                    break;
                }
                prev = s;
            }
        }

        if report.negative_above_marginal.is_none() {
            // Bids are nonnegative, so a negative marginal is probed from 0.
            let floor = gain.max(0.0);
            for delta in [1e-6 * (1.0 + floor), 0.1, rng.gen_range(0.0..scale) + 1e-9] {
                let z = floor + delta;
                bids[i.0] = z;
                let s = rule.score_bids(oracle, &ctx, i, &bids, draw_seed)?;
                if !(s < 0.0) {
                    report.negative_above_marginal =
                        Some(cex(z, format!("score {} is not negative with marginal {}", s, gain)));
                    break;
                }
            }
        }

        if report.independent_of_others.is_none() {
            bids[i.0] = rng.gen_range(0.0..scale);
            let before = rule.score_bids(oracle, &ctx, i, &bids, draw_seed)?;
            let mut perturbed = bids.clone();
            for (j, b) in perturbed.iter_mut().enumerate() {
                if j != i.0 {
                    *b = rng.gen_range(0.0..scale);
                }
            }
            let after = rule.score_bids(oracle, &ctx, i, &perturbed, draw_seed)?;
            if before.to_bits() != after.to_bits() {
                report.independent_of_others = Some(cex(
                    bids[i.0],
                    format!("score changed from {} to {} when other bids moved", before, after),
                ));
            }
        }
        if !report.passed() && report.monotone.is_some() && report.negative_above_marginal.is_some() {
            break;
        }
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::valuation::{Additive, CoverageInstance};

    fn plain(gain: f64) -> ScoreInput {
        ScoreInput { gain, multiplier: 1.0, cost_weight: 1.0, sampled: true }
    }

    fn input_for(rule: &ScoringRule, gain: f64, round: usize, n: usize) -> ScoreInput {
        rule.input(rule.round_params(round, n), gain, true)
    }

    #[test]
    fn names_round_trip() {
        for k in RuleKind::ALL {
            assert_eq!(k.name().parse::<RuleKind>().unwrap(), k);
        }
        assert!("greedy".parse::<RuleKind>().is_err());
    }

    #[test]
    fn flags() {
        let flagged: Vec<_> = RuleKind::ALL.into_iter().filter(|k| k.diminishing_return()).collect();
        assert_eq!(
            flagged,
            vec![RuleKind::GreedyMargin, RuleKind::GreedyRate, RuleKind::RoiGreedy, RuleKind::CostScaled]
        );
        for k in RuleKind::ALL {
            assert_eq!(k.online_capable(), k.diminishing_return());
        }
    }

    #[test]
    fn score_examples() {
        let cs = ScoringRule::cost_scaled();
        assert_eq!(cs.score(&input_for(&cs, 3.0, 1, 5), 1.0), 1.0);
        let dg = ScoringRule::distorted();
        assert_eq!(dg.score(&input_for(&dg, 5.0, 1, 2), 1.0), 1.5);
        let gm = ScoringRule::greedy_margin();
        assert_eq!(gm.score(&plain(4.0), 4.0), 0.0);
    }

    #[test]
    fn degenerate_ratio_rules() {
        let gr = ScoringRule::greedy_rate();
        assert_eq!(gr.score(&plain(0.0), 0.0), f64::NEG_INFINITY);
        assert_eq!(gr.score(&plain(4.0), 1.0), 0.75);
        let roi = ScoringRule::roi();
        assert_eq!(roi.score(&plain(4.0), 0.0), f64::INFINITY);
        assert_eq!(roi.score(&plain(0.0), 0.0), 0.0);
        assert_eq!(roi.score(&plain(4.0), 2.0), 1.0);
    }

    #[test]
    fn positive_threshold_examples() {
        let cs = ScoringRule::cost_scaled();
        assert_eq!(cs.positive_threshold(&input_for(&cs, 10.0, 1, 3)), 5.0);
        let gm = ScoringRule::greedy_margin();
        assert_eq!(gm.positive_threshold(&plain(0.0)), 0.0);
        let dg = ScoringRule::distorted();
        assert_eq!(dg.positive_threshold(&input_for(&dg, 1.0, 2, 2)), 1.0);
        assert_eq!(dg.positive_threshold(&input_for(&dg, 1.0, 1, 2)), 0.5);
    }

    #[test]
    fn argmax_threshold_examples() {
        let gm = ScoringRule::greedy_margin();
        assert_eq!(gm.argmax_threshold(&plain(5.0), SellerId(0), Some((2.0, SellerId(1)))), 3.0);
        assert_eq!(gm.argmax_threshold(&plain(5.0), SellerId(0), None), f64::INFINITY);
        let cs = ScoringRule::cost_scaled();
        let inp = input_for(&cs, 10.0, 1, 2);
        assert_eq!(cs.argmax_threshold(&inp, SellerId(3), Some((4.0, SellerId(1)))), 3.0);
        let gr = ScoringRule::greedy_rate();
        assert_eq!(gr.argmax_threshold(&plain(8.0), SellerId(0), Some((0.5, SellerId(1)))), 4.0);
        let roi = ScoringRule::roi();
        assert_eq!(roi.argmax_threshold(&plain(6.0), SellerId(0), Some((2.0, SellerId(1)))), 2.0);
        assert_eq!(roi.argmax_threshold(&plain(6.0), SellerId(0), Some((-1.0, SellerId(1)))), f64::INFINITY);
    }

    #[test]
    fn unsampled_stochastic_candidate_never_wins() {
        let sd = ScoringRule::stochastic_distorted(0.1);
        let inp = ScoreInput { gain: 10.0, multiplier: 1.0, cost_weight: 1.0, sampled: false };
        assert_eq!(sd.score(&inp, 0.0), f64::NEG_INFINITY);
        assert_eq!(sd.positive_threshold(&inp), 0.0);
        assert_eq!(sd.argmax_threshold(&inp, SellerId(0), Some((1.0, SellerId(1)))), 0.0);
    }

    #[test]
    fn online_prices() {
        assert_eq!(ScoringRule::cost_scaled().online_price(10.0).unwrap(), 5.0);
        assert_eq!(ScoringRule::greedy_margin().online_price(0.0).unwrap(), 0.0);
        assert_eq!(ScoringRule::greedy_margin().online_price(7.0).unwrap(), 7.0);
        assert!(matches!(
            ScoringRule::distorted().online_price(1.0),
            Err(Error::UnsupportedRule { .. })
        ));
    }

    #[test]
    fn noisy_default_cost_multiplier() {
        let r = ScoringRule::noisy_distorted(0.05);
        assert!((r.cost_weight(10) - (1.0 + 2.0 * 0.05 * 10.0 + 0.05)).abs() < 1e-15);
    }

    #[test]
    fn batch_size_defaults_to_three() {
        let r = ScoringRule::stochastic_distorted(0.1);
        assert_eq!(r.batch_size(10, 10), 3);
        assert_eq!(ScoringRule::stochastic_distorted(0.5).batch_size(10, 10), 1);
    }

    #[test]
    fn seed_draws_are_reproducible() {
        let s = RandomSeed(42);
        assert_eq!(s.batch(3, 10, 5), s.batch(3, 10, 5));
        assert!(s.batch(3, 10, 5).iter().all(|i| i.0 < 10));
        assert_eq!(s.draw(1, 10), s.batch(1, 10, 1).first().copied());
    }

    #[test]
    fn validation_accepts_cost_scaled() {
        let c = CoverageInstance::new(vec![vec![0, 1], vec![1, 2], vec![2, 3]], vec![1.0, 2.0, 3.0, 4.0]).unwrap();
        let rep = validate_assumptions(&ScoringRule::cost_scaled(), &c, 100, 3).unwrap();
        assert!(rep.passed(), "{:?}", rep);
    }

    struct Increasing;

    impl BidScore for Increasing {
        fn label(&self) -> String {
            "f(i|S) + b_i".into()
        }
        fn score_bids(
            &self,
            oracle: &dyn Valuation,
            ctx: &ScoreContext,
            i: SellerId,
            bids: &[f64],
            _seed: RandomSeed,
        ) -> Result<f64> {
            Ok(marginal(oracle, i, &ctx.tentative)? + bids[i.0])
        }
    }

    #[test]
    fn validation_flags_increasing_fixture() {
        let a = Additive::new(vec![1.0, 2.0, 3.0]).unwrap();
        let rep = validate_assumptions(&Increasing, &a, 20, 1).unwrap();
        assert!(rep.monotone.is_some());
        assert!(rep.negative_above_marginal.is_some());
    }

    #[test]
    fn margin_just_above_marginal_is_negative() {
        let gm = ScoringRule::greedy_margin();
        let s = gm.score(&plain(2.0), 2.1);
        assert!((s + 0.1).abs() < 1e-12 && s < 0.0);
    }
}
