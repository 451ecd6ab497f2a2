//! Posted-price mechanisms for the online-capable rules, the worst arrival
//! order found by sampling, and the same mechanism run as a descending
//! auction.

use submod_auction::descending::{run_descending_from_online, Descent};
use submod_auction::exact::{exact_opt, ExactOptimizerConfig};
use submod_auction::instances::random_instance;
use submod_auction::online::{run_online_meta, run_posted_price, ArrivalOrder};
use submod_auction::scoring::RandomSeed;
use submod_auction::{Result, RuleKind, ScoringRule, Valuation};

fn main() -> Result<()> {
    let (inst, costs) = random_instance(10, 5)?;
    let (opt, best) = exact_opt(&inst, &costs, &ExactOptimizerConfig::default())?;
    let f_opt = inst.eval(opt.as_slice());
    let c_opt = opt.total(&costs);
    println!("optimum welfare {:.3}; half-approximation floor {:.3}", best, 0.5 * f_opt - c_opt);

    for kind in RuleKind::ALL.into_iter().filter(|k| k.online_capable()) {
        let rule = ScoringRule::new(kind);
        let order = ArrivalOrder::worst_of(&rule, &inst, &costs, 200, 1)?;
        let pp = run_posted_price(&rule, &inst, &costs, &order, RandomSeed(0))?;
        let meta = run_online_meta(&rule, &inst, &costs, &order, RandomSeed(0))?;
        let desc = run_descending_from_online(&rule, &inst, &costs, &order, Descent::Stepped(0.1))?;
        let out = pp.clone().into_auction_outcome(&inst)?;
        println!(
            "{:<14} worst-order welfare {:>8.3}  paid {:>8.3}  matches online selection: {}  descending steps {}",
            kind.name(),
            out.welfare(&costs),
            out.total_payment(),
            pp.winners == meta,
            desc.steps
        );
    }
    Ok(())
}
