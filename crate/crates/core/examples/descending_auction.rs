//! Descending-price auction with the cost-scaled demand oracle under several
//! schedules, compared with the welfare floor for its step size.

use submod_auction::descending::{run_descending, CostScaledDemand, ExactDemand, Lexicographic, RandomSchedule, RoundRobin, Schedule};
use submod_auction::exact::{exact_opt, ExactOptimizerConfig};
use submod_auction::instances::random_instance;
use submod_auction::{Result, Valuation};

fn main() -> Result<()> {
    let eps = 0.05;
    let (inst, costs) = random_instance(10, 11)?;
    let (opt, best) = exact_opt(&inst, &costs, &ExactOptimizerConfig::default())?;
    let floor = 0.5 * inst.eval(opt.as_slice()) - opt.total(&costs) - costs.len() as f64 * eps;
    println!("optimum {:.3}, floor for cost-scaled demand {:.3}", best, floor);

    let mut schedules: Vec<Box<dyn Schedule>> =
        vec![Box::new(Lexicographic), Box::new(RoundRobin::default()), Box::new(RandomSchedule::new(3))];
    for s in schedules.iter_mut() {
        let r = run_descending(&inst, &costs, &mut CostScaledDemand::default(), s.as_mut(), eps)?;
        println!(
            "{:<12} cost-scaled: winners {} welfare {:.3} paid {:.3} in {} steps",
            s.name(),
            r.outcome.winners,
            r.outcome.welfare(&costs),
            r.outcome.total_payment(),
            r.steps
        );
    }
    let r = run_descending(&inst, &costs, &mut ExactDemand::default(), &mut Lexicographic, eps)?;
    println!("lex exact demand: welfare {:.3} in {} steps", r.outcome.welfare(&costs), r.steps);
    Ok(())
}
