//! Every scoring rule on one random instance: winners, welfare, payments and
//! a randomized check of the three scoring assumptions.

use submod_auction::exact::{exact_opt, welfare, ExactOptimizerConfig};
use submod_auction::instances::random_instance;
use submod_auction::scoring::{validate_assumptions, RandomSeed};
use submod_auction::sealed_bid::run_sealed_bid;
use submod_auction::valuation::NoisyOracle;
use submod_auction::{Result, RuleKind, ScoringRule, Valuation};

fn main() -> Result<()> {
    let (inst, costs) = random_instance(10, 42)?;
    let (opt, best) = exact_opt(&inst, &costs, &ExactOptimizerConfig::default())?;
    println!("optimum {} with welfare {:.3}", opt, best);
    println!("{:<22} {:>10} {:>10} {:>10}  assumptions", "rule", "welfare", "payments", "queries");
    for kind in RuleKind::ALL {
        let rule = match kind {
            RuleKind::NoisyDistortedGreedy => ScoringRule::noisy_distorted(0.05),
            k => ScoringRule::new(k),
        };
        let noisy = NoisyOracle::new(&inst, 0.05, 42)?;
        let oracle: &dyn Valuation = if kind == RuleKind::NoisyDistortedGreedy { &noisy } else { &inst };
        let out = run_sealed_bid(&rule, oracle, &costs, RandomSeed(7))?;
        let report = validate_assumptions(&rule, oracle, 300, 1)?;
        println!(
            "{:<22} {:>10.3} {:>10.3} {:>10}  {}",
            kind.name(),
            welfare(&inst, &out.winners, &costs)?,
            out.total_payment(),
            out.queries,
            if report.passed() { "hold" } else { "violated" }
        );
    }
    Ok(())
}
