//! Online selection over an arrival order and the posted-price mechanism.

use std::path::PathBuf;
use std::str::FromStr;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{input, Error, Result};
use crate::mechanism::{AuctionOutcome, Mechanism};
use crate::scoring::{RandomSeed, ScoringRule};
use crate::selection::check_bids;
use crate::valuation::{SellerId, SellerSet, Valuation};

/// A permutation of `0..n`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "Vec<SellerId>", into = "Vec<SellerId>")]
pub struct ArrivalOrder(Vec<SellerId>);

impl ArrivalOrder {
    pub fn new(order: Vec<SellerId>) -> Result<Self> {
        let n = order.len();
        let mut seen = vec![false; n];
        for i in &order {
            if i.0 >= n || std::mem::replace(&mut seen[i.0], true) {
                return input(format!("arrival order is not a permutation of 0..{}", n));
            }
        }
        Ok(ArrivalOrder(order))
    }

    pub fn identity(n: usize) -> Self {
        ArrivalOrder((0..n).map(SellerId).collect())
    }

    pub fn reversed(n: usize) -> Self {
        ArrivalOrder((0..n).rev().map(SellerId).collect())
    }

    pub fn random(n: usize, seed: u64) -> Self {
        let mut v: Vec<SellerId> = (0..n).map(SellerId).collect();
        v.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
        ArrivalOrder(v)
    }

    /// The lowest-welfare order among `m` random ones (first on ties).
    pub fn worst_of(
        rule: &ScoringRule,
        oracle: &dyn Valuation,
        costs: &[f64],
        m: usize,
        seed: u64,
    ) -> Result<Self> {
        let n = oracle.num_sellers();
        let mut worst: Option<(f64, ArrivalOrder)> = None;
        for j in 0..m.max(1) {
            let order = ArrivalOrder::random(n, seed.wrapping_add(j as u64));
            let s = run_online_meta(rule, oracle, costs, &order, RandomSeed(seed))?;
            let w = crate::exact::welfare(oracle, &s, costs)?;
            if worst.as_ref().map_or(true, |(bw, _)| w < *bw) {
                worst = Some((w, order));
            }
        }
        Ok(worst.expect("at least one order").1)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn as_slice(&self) -> &[SellerId] {
        &self.0
    }
}

impl TryFrom<Vec<SellerId>> for ArrivalOrder {
    type Error = Error;

    fn try_from(v: Vec<SellerId>) -> Result<Self> {
        ArrivalOrder::new(v)
    }
}

impl From<ArrivalOrder> for Vec<SellerId> {
    fn from(o: ArrivalOrder) -> Self {
        o.0
    }
}

/// Named arrival-order generators: `identity`, `reverse`, `random:<seed>`,
/// `worst-of:<m>`, or a path to a whitespace-separated permutation file.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum OrderSpec {
    Identity,
    Reverse,
    Random(u64),
    WorstOf(usize),
    File(PathBuf),
}

impl FromStr for OrderSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::Input(format!("bad arrival order `{}`", s));
        Ok(match s.split_once(':') {
            None if s == "identity" => OrderSpec::Identity,
            None if s == "reverse" => OrderSpec::Reverse,
            Some(("random", seed)) => OrderSpec::Random(seed.parse().map_err(|_| bad())?),
            Some(("worst-of", m)) => OrderSpec::WorstOf(m.parse().map_err(|_| bad())?),
            Some(("file", path)) => OrderSpec::File(path.into()),
            _ => return Err(bad()),
        })
    }
}

impl OrderSpec {
    pub fn resolve(&self, rule: &ScoringRule, oracle: &dyn Valuation, costs: &[f64], seed: u64) -> Result<ArrivalOrder> {
        let n = oracle.num_sellers();
        let order = match self {
            OrderSpec::Identity => ArrivalOrder::identity(n),
            OrderSpec::Reverse => ArrivalOrder::reversed(n),
            OrderSpec::Random(s) => ArrivalOrder::random(n, *s),
            OrderSpec::WorstOf(m) => ArrivalOrder::worst_of(rule, oracle, costs, *m, seed)?,
            OrderSpec::File(path) => {
                let text = std::fs::read_to_string(path)?;
                let ids = text
                    .split_whitespace()
                    .map(|t| t.parse::<usize>().map(SellerId).map_err(|_| Error::Input(format!("bad seller id `{}`", t))))
                    .collect::<Result<Vec<_>>>()?;
                ArrivalOrder::new(ids)?
            }
        };
        if order.len() != n {
            return input(format!("arrival order has {} sellers, instance has {}", order.len(), n));
        }
        Ok(order)
    }
}

fn require_online(rule: &ScoringRule, what: &'static str) -> Result<()> {
    if rule.online_capable() {
        Ok(())
    } else {
        Err(Error::UnsupportedRule { rule: rule.name(), what })
    }
}

fn check_order(order: &ArrivalOrder, n: usize) -> Result<()> {
    if order.len() != n {
        return input(format!("arrival order has {} sellers, instance has {}", order.len(), n));
    }
    Ok(())
}

/// Admits each arriving seller iff its score against the current set is
/// positive. Decisions are irrevocable.
pub fn run_online_meta(
    rule: &ScoringRule,
    oracle: &dyn Valuation,
    costs: &[f64],
    order: &ArrivalOrder,
    _seed: RandomSeed,
) -> Result<SellerSet> {
    require_online(rule, "online selection")?;
    let n = oracle.num_sellers();
    check_bids(costs, n)?;
    check_order(order, n)?;
    let params = rule.round_params(1, n);
    let mut eval = oracle.evaluator();
    for &k in order.as_slice() {
        let g = eval.gain(k);
        if rule.score(&rule.input(params, g, true), costs[k.0]) > 0.0 {
            eval.insert(k);
        }
    }
    Ok(eval.members().clone())
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PostedPriceOutcome {
    pub winners: SellerSet,
    pub posted_prices: Vec<f64>,
    pub payments: Vec<f64>,
    pub acceptance: Vec<bool>,
    /// Marginal of each seller against the set it faced on arrival.
    pub marginals: Vec<f64>,
}

impl PostedPriceOutcome {
    pub fn into_auction_outcome(self, oracle: &dyn Valuation) -> Result<AuctionOutcome> {
        AuctionOutcome::new(oracle, self.winners, self.payments, None, 0)
    }
}

/// Posts `online_price` to each arriving seller; a seller accepts iff its
/// cost is strictly below the price.
pub fn run_posted_price(
    rule: &ScoringRule,
    oracle: &dyn Valuation,
    costs: &[f64],
    order: &ArrivalOrder,
    _seed: RandomSeed,
) -> Result<PostedPriceOutcome> {
    require_online(rule, "posted prices")?;
    let n = oracle.num_sellers();
    check_bids(costs, n)?;
    check_order(order, n)?;
    let mut eval = oracle.evaluator();
    let mut out = PostedPriceOutcome {
        winners: SellerSet::new(),
        posted_prices: vec![0.0; n],
        payments: vec![0.0; n],
        acceptance: vec![false; n],
        marginals: vec![0.0; n],
    };
    for &k in order.as_slice() {
        let g = eval.gain(k);
        let price = rule.online_price(g)?;
        out.marginals[k.0] = g;
        out.posted_prices[k.0] = price;
        if costs[k.0] < price {
            out.acceptance[k.0] = true;
            out.payments[k.0] = price;
            eval.insert(k);
        }
    }
    out.winners = eval.members().clone();
    Ok(out)
}

/// Posted-price mechanism over a fixed order, as a [`Mechanism`].
#[derive(Clone, Debug)]
pub struct PostedPrice {
    pub rule: ScoringRule,
    pub order: ArrivalOrder,
}

impl Mechanism for PostedPrice {
    fn name(&self) -> String {
        format!("posted-price/{}", self.rule.name())
    }

    fn run(&self, oracle: &dyn Valuation, bids: &[f64]) -> Result<AuctionOutcome> {
        run_posted_price(&self.rule, oracle, bids, &self.order, RandomSeed(0))?.into_auction_outcome(oracle)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::valuation::Additive;

    #[test]
    fn cost_scaled_trace() {
        let a = Additive::new(vec![10.0, 4.0]).unwrap();
        let s = run_online_meta(&ScoringRule::cost_scaled(), &a, &[3.0, 3.0], &ArrivalOrder::identity(2), RandomSeed(0))
            .unwrap();
        assert_eq!(s, SellerSet::from_indices([0]));
    }

    #[test]
    fn zero_costs_admit_positive_marginals() {
        let a = Additive::new(vec![1.0, 0.0, 2.0]).unwrap();
        let s = run_online_meta(&ScoringRule::greedy_margin(), &a, &[0.0; 3], &ArrivalOrder::reversed(3), RandomSeed(0))
            .unwrap();
        assert_eq!(s, SellerSet::from_indices([0, 2]));
    }

    #[test]
    fn modular_order_independence() {
        let a = Additive::new(vec![2.0, 2.0, 2.0]).unwrap();
        let r = ScoringRule::greedy_rate();
        let c = [1.0, 3.0, 0.5];
        let x = run_online_meta(&r, &a, &c, &ArrivalOrder::identity(3), RandomSeed(0)).unwrap();
        let y = run_online_meta(&r, &a, &c, &ArrivalOrder::reversed(3), RandomSeed(0)).unwrap();
        assert_eq!(x, y);
    }

    #[test]
    fn posted_price_examples() {
        let a = Additive::new(vec![10.0]).unwrap();
        let o = ArrivalOrder::identity(1);
        let out = run_posted_price(&ScoringRule::cost_scaled(), &a, &[3.0], &o, RandomSeed(0)).unwrap();
        assert_eq!((out.posted_prices[0], out.payments[0], out.acceptance[0]), (5.0, 5.0, true));
        let out = run_posted_price(&ScoringRule::cost_scaled(), &a, &[5.0], &o, RandomSeed(0)).unwrap();
        assert_eq!((out.payments[0], out.acceptance[0]), (0.0, false));
        let out = run_posted_price(&ScoringRule::greedy_margin(), &a, &[11.0], &o, RandomSeed(0)).unwrap();
        assert!(out.winners.is_empty());
    }

    #[test]
    fn rejects_offline_rules() {
        let a = Additive::new(vec![10.0]).unwrap();
        let o = ArrivalOrder::identity(1);
        assert!(matches!(
            run_posted_price(&ScoringRule::distorted(), &a, &[3.0], &o, RandomSeed(0)),
            Err(Error::UnsupportedRule { .. })
        ));
    }

    #[test]
    fn order_specs() {
        assert_eq!("identity".parse::<OrderSpec>().unwrap(), OrderSpec::Identity);
        assert_eq!("random:7".parse::<OrderSpec>().unwrap(), OrderSpec::Random(7));
        assert_eq!("worst-of:5".parse::<OrderSpec>().unwrap(), OrderSpec::WorstOf(5));
        assert!("random:x".parse::<OrderSpec>().is_err());
        assert!(ArrivalOrder::new(vec![SellerId(0), SellerId(0)]).is_err());
        let r = ArrivalOrder::random(10, 3);
        assert!(ArrivalOrder::new(r.as_slice().to_vec()).is_ok());
    }
}
