//! Descending-price auctions driven by a demand oracle and a schedule, and
//! the conversion of posted-price mechanisms into descending auctions.

use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{input, Error, Result};
use crate::exact::{exact_opt_over, ExactOptimizerConfig, TieRule};
use crate::mechanism::AuctionOutcome;
use crate::online::ArrivalOrder;
use crate::scoring::ScoringRule;
use crate::selection::check_bids;
use crate::valuation::{marginal, singleton_values, SellerId, SellerSet, Valuation};

/// Welfare-maximizing subset of `active` at `prices`, preferring the
/// lexicographically least among minimum-cardinality maximizers. Uses the
/// oracle's structured demand when it has one.
pub fn exact_demand(
    oracle: &dyn Valuation,
    active: &SellerSet,
    prices: &[f64],
    cfg: &ExactOptimizerConfig,
) -> Result<SellerSet> {
    if let Some(d) = oracle.structured_demand(active, prices) {
        return Ok(d);
    }
    exact_opt_over(oracle, active, prices, cfg, TieRule::MinCardinality).map(|(s, _)| s)
}

/// State of the cost-scaled demand oracle: a tentative set that only grows.
#[derive(Clone, Debug, Default)]
pub struct CostScaledState {
    tentative: SellerSet,
    started: bool,
}

impl CostScaledState {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn tentative(&self) -> &SellerSet {
        &self.tentative
    }
}

/// Adds the previously decremented seller to the tentative set if it is
/// still active and `f(i | T) > 2 p_i`; returns the tentative set.
pub fn cost_scaled_demand(
    state: &mut CostScaledState,
    previous: Option<SellerId>,
    active: &SellerSet,
    prices: &[f64],
    oracle: &dyn Valuation,
) -> Result<SellerSet> {
    if let Some(i) = previous {
        if active.contains(i) && !state.tentative.contains(i) && marginal(oracle, i, &state.tentative)? > 2.0 * prices[i.0]
        {
            state.tentative.insert(i);
        }
    }
    Ok(state.tentative.clone())
}

/// `𝒟(S, p)`. `previous` is the seller whose price moved last.
pub trait DemandOracle {
    fn name(&self) -> &'static str;
    /// Called once before the first query of a run.
    fn start(&mut self) -> Result<()> {
        Ok(())
    }
    fn demand(
        &mut self,
        oracle: &dyn Valuation,
        active: &SellerSet,
        prices: &[f64],
        previous: Option<SellerId>,
    ) -> Result<SellerSet>;
}

#[derive(Clone, Debug, Default)]
pub struct ExactDemand {
    pub cfg: ExactOptimizerConfig,
}

impl DemandOracle for ExactDemand {
    fn name(&self) -> &'static str {
        "exact"
    }

    fn demand(
        &mut self,
        oracle: &dyn Valuation,
        active: &SellerSet,
        prices: &[f64],
        _previous: Option<SellerId>,
    ) -> Result<SellerSet> {
        exact_demand(oracle, active, prices, &self.cfg)
    }
}

/// Stateful cost-scaled oracle. One instance per auction run.
#[derive(Clone, Debug, Default)]
pub struct CostScaledDemand {
    pub state: CostScaledState,
}

impl DemandOracle for CostScaledDemand {
    fn name(&self) -> &'static str {
        "cost-scaled"
    }

    fn start(&mut self) -> Result<()> {
        if std::mem::replace(&mut self.state.started, true) {
            return Err(Error::Misuse("cost-scaled demand state reused across auction runs".into()));
        }
        Ok(())
    }

    fn demand(
        &mut self,
        oracle: &dyn Valuation,
        active: &SellerSet,
        prices: &[f64],
        previous: Option<SellerId>,
    ) -> Result<SellerSet> {
        cost_scaled_demand(&mut self.state, previous, active, prices, oracle)
    }
}

/// Picks which undemanded seller's price falls next.
pub trait Schedule {
    fn name(&self) -> String;
    /// `undemanded` is `S ∖ 𝒟(S, p)`, sorted and nonempty.
    fn pick(&mut self, undemanded: &[SellerId], active: &SellerSet, prices: &[f64]) -> SellerId;
}

/// First undemanded seller by index.
#[derive(Clone, Debug, Default)]
pub struct Lexicographic;

impl Schedule for Lexicographic {
    fn name(&self) -> String {
        "lex".into()
    }

    fn pick(&mut self, undemanded: &[SellerId], _: &SellerSet, _: &[f64]) -> SellerId {
        undemanded[0]
    }
}

/// Cycles through seller indices, taking the next undemanded one.
#[derive(Clone, Debug, Default)]
pub struct RoundRobin {
    cursor: usize,
}

impl Schedule for RoundRobin {
    fn name(&self) -> String {
        "rr".into()
    }

    fn pick(&mut self, undemanded: &[SellerId], _: &SellerSet, _: &[f64]) -> SellerId {
        let i = undemanded.iter().copied().find(|i| i.0 >= self.cursor).unwrap_or(undemanded[0]);
        self.cursor = i.0 + 1;
        i
    }
}

/// Uniform choice among undemanded sellers.
#[derive(Clone, Debug)]
pub struct RandomSchedule {
    rng: ChaCha8Rng,
    seed: u64,
}

impl RandomSchedule {
    pub fn new(seed: u64) -> Self {
        RandomSchedule { rng: ChaCha8Rng::seed_from_u64(seed), seed }
    }
}

impl Schedule for RandomSchedule {
    fn name(&self) -> String {
        format!("random:{}", self.seed)
    }

    fn pick(&mut self, undemanded: &[SellerId], _: &SellerSet, _: &[f64]) -> SellerId {
        undemanded[self.rng.gen_range(0..undemanded.len())]
    }
}

/// Follows a fixed script, skipping entries that are not currently
/// undemanded; lexicographic once the script runs out.
#[derive(Clone, Debug)]
pub struct Scripted {
    script: Vec<SellerId>,
    pos: usize,
}

impl Scripted {
    pub fn new(script: Vec<SellerId>) -> Self {
        Scripted { script, pos: 0 }
    }

    /// Whitespace-separated seller indices.
    pub fn parse(text: &str) -> Result<Self> {
        let script = text
            .split_whitespace()
            .map(|t| t.parse::<usize>().map(SellerId).map_err(|_| Error::Input(format!("bad seller id `{}`", t))))
            .collect::<Result<_>>()?;
        Ok(Scripted::new(script))
    }
}

impl Schedule for Scripted {
    fn name(&self) -> String {
        "scripted".into()
    }

    fn pick(&mut self, undemanded: &[SellerId], _: &SellerSet, _: &[f64]) -> SellerId {
        while let Some(&i) = self.script.get(self.pos) {
            self.pos += 1;
            if undemanded.binary_search(&i).is_ok() {
                return i;
            }
        }
        undemanded[0]
    }
}

/// The adversary of the lower-bound family with regular sellers `0..L` and
/// specials `L`, `L+1`. Phase 1 lowers whichever special is undemanded until
/// some special's price is below `L − 1`. Phase 2 lowers regulars one at a
/// time, each until it leaves or becomes demanded. Afterwards it falls back
/// to the lexicographic choice.
#[derive(Clone, Debug)]
pub struct AdversarialFamilySchedule {
    l: usize,
    target: usize,
}

impl AdversarialFamilySchedule {
    pub fn new(l: usize) -> Self {
        AdversarialFamilySchedule { l, target: 0 }
    }
}

impl Schedule for AdversarialFamilySchedule {
    fn name(&self) -> String {
        "adversarial-family".into()
    }

    fn pick(&mut self, undemanded: &[SellerId], active: &SellerSet, prices: &[f64]) -> SellerId {
        let l = self.l;
        let specials = [SellerId(l), SellerId(l + 1)];
        let undemanded_has = |i: SellerId| undemanded.binary_search(&i).is_ok();
        let phase_one_done = specials.iter().any(|s| active.contains(*s) && prices[s.0] < (l as f64) - 1.0);
        if !phase_one_done {
            if let Some(&s) = specials.iter().find(|s| undemanded_has(**s)) {
                return s;
            }
        }
        while self.target < l {
            let t = SellerId(self.target);
            if undemanded_has(t) {
                return t;
            }
            self.target += 1;
        }
        undemanded[0]
    }
}

/// Named schedules: `lex`, `rr`, `adversarial-family`, `random:<seed>`,
/// `scripted:<file>`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ScheduleSpec {
    Lexicographic,
    RoundRobin,
    AdversarialFamily,
    Random(u64),
    Scripted(std::path::PathBuf),
}

impl FromStr for ScheduleSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::Input(format!("bad schedule `{}`", s));
        Ok(match s.split_once(':') {
            None if s == "lex" => ScheduleSpec::Lexicographic,
            None if s == "rr" => ScheduleSpec::RoundRobin,
            None if s == "adversarial-family" => ScheduleSpec::AdversarialFamily,
            Some(("random", seed)) => ScheduleSpec::Random(seed.parse().map_err(|_| bad())?),
            Some(("scripted", path)) => ScheduleSpec::Scripted(path.into()),
            _ => return Err(bad()),
        })
    }
}

impl ScheduleSpec {
    /// `family_l` is the family parameter when running on the lower-bound
    /// family; the adversarial schedule requires it.
    pub fn build(&self, family_l: Option<usize>) -> Result<Box<dyn Schedule>> {
        Ok(match self {
            ScheduleSpec::Lexicographic => Box::new(Lexicographic),
            ScheduleSpec::RoundRobin => Box::new(RoundRobin::default()),
            ScheduleSpec::Random(seed) => Box::new(RandomSchedule::new(*seed)),
            ScheduleSpec::AdversarialFamily => match family_l {
                Some(l) => Box::new(AdversarialFamilySchedule::new(l)),
                None => return input("the adversarial-family schedule needs the lower-bound family instance"),
            },
            ScheduleSpec::Scripted(path) => Box::new(Scripted::parse(&std::fs::read_to_string(path)?)?),
        })
    }
}

/// Outcome of a descending auction plus the number of price decrements.
#[derive(Clone, Debug)]
pub struct DescendingResult {
    pub outcome: AuctionOutcome,
    pub steps: usize,
}

/// Prices start at `f(i | ∅)`. While the demanded set is a strict subset of
/// the active sellers, the schedule picks an undemanded seller and its price
/// drops by `epsilon`; a seller whose price falls below its bid leaves with
/// price 0. Winners are the final active set, paid their final prices.
pub fn run_descending(
    oracle: &dyn Valuation,
    bids: &[f64],
    demand: &mut dyn DemandOracle,
    schedule: &mut dyn Schedule,
    epsilon: f64,
) -> Result<DescendingResult> {
    let n = oracle.num_sellers();
    check_bids(bids, n)?;
    if !(epsilon > 0.0 && epsilon.is_finite()) {
        return input(format!("step size must be positive, got {}", epsilon));
    }
    demand.start()?;
    let mut prices = singleton_values(oracle);
    let cap: usize = prices.iter().map(|f| (f / epsilon).ceil() as usize + 1).sum::<usize>() + n;
    let mut active = SellerSet::full(n);
    let mut previous = None;
    let mut steps = 0;
    loop {
        let d = demand.demand(oracle, &active, &prices, previous)?;
        if !d.is_subset(&active) {
            return Err(Error::Internal(format!("demand {} is not a subset of the active set {}", d, active)));
        }
        if d.len() == active.len() {
            break;
        }
        let undemanded: Vec<SellerId> = active.iter().filter(|i| !d.contains(*i)).collect();
        let i = schedule.pick(&undemanded, &active, &prices);
        if undemanded.binary_search(&i).is_err() {
            return Err(Error::Internal(format!("schedule {} picked demanded or inactive seller {}", schedule.name(), i)));
        }
        prices[i.0] -= epsilon;
        if prices[i.0] < bids[i.0] {
            active.remove(i);
            prices[i.0] = 0.0;
        }
        previous = Some(i);
        steps += 1;
        if steps > cap {
            return Err(Error::Internal(format!("descending auction exceeded {} price steps", cap)));
        }
    }
    let payments = (0..n).map(|i| if active.contains(SellerId(i)) { prices[i] } else { 0.0 }).collect();
    let outcome = AuctionOutcome::new(oracle, active, payments, None, 0)?;
    Ok(DescendingResult { outcome, steps })
}

/// How a converted posted-price auction moves each price.
#[derive(Copy, Clone, Debug, PartialEq)]
pub enum Descent {
    /// One assignment from `f(k | ∅)` to the posted price.
    Direct,
    /// Steps of `epsilon`, with a final partial step landing on the price.
    Stepped(f64),
}

/// Runs the posted-price mechanism of an online rule as a descending auction:
/// sellers are visited in arrival order and each price descends to the
/// posted price `p̂_k`. A seller stays (paid `p̂_k`) iff its bid is below
/// `p̂_k`.
pub fn run_descending_from_online(
    rule: &ScoringRule,
    oracle: &dyn Valuation,
    bids: &[f64],
    order: &ArrivalOrder,
    descent: Descent,
) -> Result<DescendingResult> {
    if !rule.online_capable() {
        return Err(Error::UnsupportedRule { rule: rule.name(), what: "descending conversion" });
    }
    let n = oracle.num_sellers();
    check_bids(bids, n)?;
    if order.len() != n {
        return input(format!("arrival order has {} sellers, instance has {}", order.len(), n));
    }
    let start = singleton_values(oracle);
    let mut eval = oracle.evaluator();
    let mut payments = vec![0.0; n];
    let mut steps = 0;
    for &k in order.as_slice() {
        let target = rule.online_price(eval.gain(k))?;
        let mut price = start[k.0];
        let mut dropped = false;
        if let Descent::Stepped(eps) = descent {
            if !(eps > 0.0) {
                return input(format!("step size must be positive, got {}", eps));
            }
            while price > target {
                price = (price - eps).max(target);
                steps += 1;
                if price < bids[k.0] {
                    dropped = true;
                    break;
                }
            }
        } else {
            price = target;
            steps += 1;
        }
        if !dropped && bids[k.0] < price {
            payments[k.0] = price;
            eval.insert(k);
        }
    }
    let winners = eval.members().clone();
    Ok(DescendingResult { outcome: AuctionOutcome::new(oracle, winners, payments, None, 0)?, steps })
}
