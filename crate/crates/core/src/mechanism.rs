//! Auction outcomes and the common interface for mechanisms.

use serde::{Deserialize, Serialize};

use crate::error::{input, Result};
use crate::selection::{run_meta, SelectionTrace};
use crate::scoring::{RandomSeed, ScoringRule};
use crate::valuation::{value, SellerSet, Valuation};

/// Winners, payments and (for greedy mechanisms) the selection trace.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AuctionOutcome {
    pub winners: SellerSet,
    /// One entry per seller; 0 for losers.
    pub payments: Vec<f64>,
    /// `f(winners)`.
    pub value: f64,
    /// `f(winners) − Σ payments`.
    pub surplus: f64,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub trace: Option<SelectionTrace>,
    /// Marginal queries spent on allocation and payments.
    pub queries: u64,
}

impl AuctionOutcome {
    pub fn new(
        oracle: &dyn Valuation,
        winners: SellerSet,
        payments: Vec<f64>,
        trace: Option<SelectionTrace>,
        queries: u64,
    ) -> Result<Self> {
        let n = oracle.num_sellers();
        if payments.len() != n {
            return input(format!("expected {} payments, got {}", n, payments.len()));
        }
        let value = value(oracle, &winners)?;
        let surplus = value - payments.iter().sum::<f64>();
        Ok(AuctionOutcome { winners, payments, value, surplus, trace, queries })
    }

    pub fn total_payment(&self) -> f64 {
        self.payments.iter().sum()
    }

    /// `f(winners) − Σ_{i∈winners} c_i`.
    pub fn welfare(&self, costs: &[f64]) -> f64 {
        self.value - self.winners.total(costs)
    }

    /// Seller `i`'s utility at true cost `cost`.
    pub fn utility(&self, i: usize, cost: f64) -> f64 {
        if self.winners.contains(crate::SellerId(i)) {
            self.payments[i] - cost
        } else {
            0.0
        }
    }
}

/// A direct-revelation mechanism: bids in, outcome out.
pub trait Mechanism: Send + Sync {
    fn name(&self) -> String;
    fn run(&self, oracle: &dyn Valuation, bids: &[f64]) -> Result<AuctionOutcome>;
}

/// Greedy allocation with pay-your-bid payments. Not incentive compatible;
/// kept as a control for the IC checker.
#[derive(Clone, Debug)]
pub struct FirstPrice {
    pub rule: ScoringRule,
    pub seed: RandomSeed,
}

impl Mechanism for FirstPrice {
    fn name(&self) -> String {
        format!("first-price/{}", self.rule.name())
    }

    fn run(&self, oracle: &dyn Valuation, bids: &[f64]) -> Result<AuctionOutcome> {
        let trace = run_meta(&self.rule, oracle, bids, self.seed)?;
        let winners = trace.winners();
        let payments = (0..bids.len())
            .map(|i| if winners.contains(crate::SellerId(i)) { bids[i] } else { 0.0 })
            .collect();
        let q = trace.queries;
        AuctionOutcome::new(oracle, winners, payments, Some(trace), q)
    }
}

/// Pays every winner `f(winners) + extra`, split evenly. A control that
/// breaks NAS whenever `extra > 0` and someone wins.
#[derive(Clone, Debug)]
pub struct Overpay {
    pub rule: ScoringRule,
    pub extra: f64,
}

impl Mechanism for Overpay {
    fn name(&self) -> String {
        format!("overpay/{}", self.rule.name())
    }

    fn run(&self, oracle: &dyn Valuation, bids: &[f64]) -> Result<AuctionOutcome> {
        let trace = run_meta(&self.rule, oracle, bids, RandomSeed(0))?;
        let winners = trace.winners();
        let total = value(oracle, &winners)? + self.extra;
        let share = if winners.is_empty() { 0.0 } else { total / winners.len() as f64 };
        let payments = (0..bids.len())
            .map(|i| if winners.contains(crate::SellerId(i)) { share } else { 0.0 })
            .collect();
        AuctionOutcome::new(oracle, winners, payments, Some(trace), 0)
    }
}
