//! VCG against greedy-margin on small random instances: VCG reaches the
//! optimum but runs exhaustive search per winner.

use std::time::Instant;

use submod_auction::exact::ExactOptimizerConfig;
use submod_auction::instances::random_instance;
use submod_auction::scoring::RandomSeed;
use submod_auction::sealed_bid::{run_sealed_bid, run_vcg, verify_nas};
use submod_auction::{Result, ScoringRule};

fn main() -> Result<()> {
    let cfg = ExactOptimizerConfig::default();
    println!("{:>3} {:>10} {:>10} {:>10} {:>10} {:>9}", "n", "vcg", "greedy", "vcg pay", "greedy pay", "vcg time");
    for (k, n) in [4usize, 8, 12, 16, 20].into_iter().enumerate() {
        let (inst, costs) = random_instance(n, k as u64)?;
        let t = Instant::now();
        let v = run_vcg(&inst, &costs, &cfg)?;
        let dt = t.elapsed();
        let g = run_sealed_bid(&ScoringRule::greedy_margin(), &inst, &costs, RandomSeed(0))?;
        assert!(verify_nas(&v, &inst)?);
        println!(
            "{:>3} {:>10.3} {:>10.3} {:>10.3} {:>10.3} {:>9.1?}",
            n,
            v.welfare(&costs),
            g.welfare(&costs),
            v.total_payment(),
            g.total_payment(),
            dt
        );
    }
    let (inst, costs) = random_instance(30, 9)?;
    match run_vcg(&inst, &costs, &cfg) {
        Err(e) => println!("n = 30: {}", e),
        Ok(_) => println!("n = 30 ran"),
    }
    Ok(())
}
