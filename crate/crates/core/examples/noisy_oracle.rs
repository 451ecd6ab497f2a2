//! Noisy distorted greedy: the mechanism sees a multiplicatively perturbed
//! coverage function and welfare is measured on the true one.

use submod_auction::exact::{exact_opt, welfare, ExactOptimizerConfig};
use submod_auction::instances::random_instance;
use submod_auction::scoring::RandomSeed;
use submod_auction::sealed_bid::{run_sealed_bid, verify_nas};
use submod_auction::valuation::NoisyOracle;
use submod_auction::{Result, ScoringRule, Valuation};

fn main() -> Result<()> {
    let (inst, costs) = random_instance(12, 8)?;
    let (opt, best) = exact_opt(&inst, &costs, &ExactOptimizerConfig::default())?;
    let (f_opt, c_opt) = (inst.eval(opt.as_slice()), opt.total(&costs));
    println!("optimum welfare {:.3}", best);
    for eps in [0.0, 0.01, 0.05, 0.1] {
        let rule = ScoringRule::noisy_distorted(eps);
        let noisy = NoisyOracle::new(&inst, eps, 99)?;
        let out = run_sealed_bid(&rule, &noisy, &costs, RandomSeed(0))?;
        let x = rule.cost_weight(rule.horizon(costs.len()));
        let floor = (1.0 - eps) / x * (1.0 - (-1.0f64).exp()) * f_opt - c_opt;
        println!(
            "eps {:<5} welfare {:>8.3} floor {:>8.3} paid {:>8.3} NAS {}",
            eps,
            welfare(&inst, &out.winners, &costs)?,
            floor,
            out.total_payment(),
            verify_nas(&out, &inst)?
        );
    }
    Ok(())
}
