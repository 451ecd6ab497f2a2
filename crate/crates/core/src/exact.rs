//! Exact welfare maximization `max_S f(S) − Σ_{i∈S} c_i` by branch and bound.

use serde::{Deserialize, Serialize};

use crate::error::{input, Error, Result};
use crate::valuation::{Evaluator, SellerId, SellerSet, Valuation};
use crate::TOLERANCE;

#[derive(Copy, Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct ExactOptimizerConfig {
    pub max_exhaustive_n: usize,
    pub use_bound_pruning: bool,
}

impl Default for ExactOptimizerConfig {
    fn default() -> Self {
        ExactOptimizerConfig { max_exhaustive_n: 24, use_bound_pruning: true }
    }
}

/// Which maximizer to return when several attain the optimum (welfares
/// within [`TOLERANCE`] count as equal).
#[derive(Copy, Clone, Debug, PartialEq, Eq)]
pub enum TieRule {
    /// Lexicographically least sorted member list.
    Lexicographic,
    /// Fewest members, then lexicographically least.
    MinCardinality,
}

impl TieRule {
    fn prefers(self, a: &[SellerId], b: &[SellerId]) -> bool {
        match self {
            TieRule::Lexicographic => a < b,
            TieRule::MinCardinality => (a.len(), a) < (b.len(), b),
        }
    }
}

/// `f(S) − Σ_{i∈S} c_i`.
pub fn welfare(oracle: &dyn Valuation, set: &SellerSet, costs: &[f64]) -> Result<f64> {
    Ok(crate::valuation::value(oracle, set)? - set.total(costs))
}

/// Exact optimum over all sellers, lexicographic tie-breaking.
pub fn exact_opt(oracle: &dyn Valuation, costs: &[f64], cfg: &ExactOptimizerConfig) -> Result<(SellerSet, f64)> {
    let all = SellerSet::full(oracle.num_sellers());
    exact_opt_over(oracle, &all, costs, cfg, TieRule::Lexicographic)
}

/// Exact optimum over subsets of `candidates`. `costs` is indexed by seller.
pub fn exact_opt_over(
    oracle: &dyn Valuation,
    candidates: &SellerSet,
    costs: &[f64],
    cfg: &ExactOptimizerConfig,
    tie: TieRule,
) -> Result<(SellerSet, f64)> {
    let n = oracle.num_sellers();
    if costs.len() != n {
        return input(format!("expected {} costs, got {}", n, costs.len()));
    }
    candidates.check_bounds(n)?;
    if candidates.len() > cfg.max_exhaustive_n {
        return Err(Error::Capacity(format!(
            "{} candidates exceed the exhaustive limit of {}",
            candidates.len(),
            cfg.max_exhaustive_n
        )));
    }
    let mut eval = oracle.evaluator();
    let mut order: Vec<(f64, SellerId)> =
        candidates.iter().map(|i| (eval.gain(i) - costs[i.0], i)).collect();
    order.sort_by(|a, b| b.0.total_cmp(&a.0).then(a.1.cmp(&b.1)));
    let mut search = Search {
        order: order.into_iter().map(|(_, i)| i).collect(),
        costs,
        pruning: cfg.use_bound_pruning,
        tie,
        best: Vec::new(),
        best_welfare: 0.0,
        current: Vec::new(),
        cost_sum: 0.0,
    };
    search.dfs(eval.as_mut(), 0);
    let best = SellerSet::from(search.best);
    let w = welfare(oracle, &best, costs)?;
    Ok((best, w))
}

struct Search<'a> {
    order: Vec<SellerId>,
    costs: &'a [f64],
    pruning: bool,
    tie: TieRule,
    best: Vec<SellerId>,
    best_welfare: f64,
    current: Vec<SellerId>,
    cost_sum: f64,
}

impl Search<'_> {
    fn consider(&mut self, w: f64) {
        let mut sorted = self.current.clone();
        sorted.sort();
        let better = w > self.best_welfare + TOLERANCE
            || ((w - self.best_welfare).abs() <= TOLERANCE && self.tie.prefers(&sorted, &self.best));
        if better {
            self.best = sorted;
            self.best_welfare = w;
        }
    }

    /// Explores every completion of `current` with sellers `order[depth..]`.
    /// `current` itself has already been considered.
    fn dfs(&mut self, eval: &mut dyn Evaluator, depth: usize) {
        if depth == self.order.len() {
            return;
        }
        let w = eval.value() - self.cost_sum;
        let rest = &self.order[depth..];
        let mut net = Vec::with_capacity(rest.len());
        if self.pruning {
            let mut bound = w;
            for &j in rest {
                let d = eval.gain(j) - self.costs[j.0];
                net.push(d);
                bound += d.max(0.0);
            }
            if bound < self.best_welfare - TOLERANCE {
                return;
            }
        }
        let j = self.order[depth];
        // A seller whose net marginal is already negative can only lower
        // welfare of any superset, by submodularity.
        let include = !self.pruning || net[0] >= -TOLERANCE;
        if include {
            eval.insert(j);
            self.current.push(j);
            self.cost_sum += self.costs[j.0];
            let wj = eval.value() - self.cost_sum;
            self.consider(wj);
            self.dfs(eval, depth + 1);
            self.cost_sum -= self.costs[j.0];
            self.current.pop();
            eval.remove(j);
        }
        self.dfs(eval, depth + 1);
    }
}
