//! The adversarial family under the exact and cost-scaled demand oracles.

use serde::Serialize;

use crate::descending::{run_descending, AdversarialFamilySchedule, CostScaledDemand, DemandOracle, ExactDemand};
use crate::error::{input, Result};
use crate::exact::{exact_opt_over, welfare, ExactOptimizerConfig, TieRule};
use crate::valuation::{AdversarialFamily, SellerSet, Valuation};

#[derive(Clone, Debug, Serialize)]
pub struct OracleRun {
    pub oracle: String,
    pub winners: Vec<usize>,
    pub welfare: f64,
    pub steps: usize,
}

#[derive(Clone, Debug, Serialize)]
pub struct LowerBoundReport {
    pub l: usize,
    pub epsilon: f64,
    pub opt_welfare: f64,
    pub exact: OracleRun,
    pub cost_scaled: OracleRun,
}

impl LowerBoundReport {
    /// Exact-oracle welfare at most 2 and cost-scaled welfare at least
    /// `L/2 − 1`.
    pub fn separation_holds(&self) -> bool {
        self.exact.welfare <= 2.0 + crate::TOLERANCE && self.cost_scaled.welfare >= self.l as f64 / 2.0 - 1.0 - crate::TOLERANCE
    }
}

fn run_with(fam: &AdversarialFamily, demand: &mut dyn DemandOracle, epsilon: f64) -> Result<OracleRun> {
    let bids = fam.bids();
    let mut sched = AdversarialFamilySchedule::new(fam.l());
    let r = run_descending(fam, &bids, demand, &mut sched, epsilon)?;
    Ok(OracleRun {
        oracle: demand.name().into(),
        winners: r.outcome.winners.indices(),
        welfare: welfare(fam, &r.outcome.winners, &bids)?,
        steps: r.steps,
    })
}

/// Runs the family of size `L + 2` with bids equal to true costs. Requires
/// `0 < ε < 1/L`.
pub fn lower_bound(l: usize, epsilon: f64) -> Result<LowerBoundReport> {
    if l < 3 {
        return input(format!("family parameter L must be at least 3, got {}", l));
    }
    if !(epsilon > 0.0 && epsilon < 1.0 / l as f64) {
        return input(format!("step size must lie in (0, 1/L) = (0, {}), got {}", 1.0 / l as f64, epsilon));
    }
    let fam = AdversarialFamily::new(l)?;
    let bids = fam.bids();
    let cfg = ExactOptimizerConfig { max_exhaustive_n: fam.num_sellers(), use_bound_pruning: true };
    let (_, opt_welfare) = exact_opt_over(&fam, &SellerSet::full(fam.num_sellers()), &bids, &cfg, TieRule::Lexicographic)?;
    Ok(LowerBoundReport {
        l,
        epsilon,
        opt_welfare,
        exact: run_with(&fam, &mut ExactDemand::default(), epsilon)?,
        cost_scaled: run_with(&fam, &mut CostScaledDemand::default(), epsilon)?,
    })
}
