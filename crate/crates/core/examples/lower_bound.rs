//! The adversarial family: an exact demand oracle under an adversarial
//! schedule ends with one special seller, while the cost-scaled oracle
//! keeps the regular sellers.

use submod_auction::harness::lowerbound::lower_bound;
use submod_auction::Result;

fn main() -> Result<()> {
    println!("{:>4} {:>8} {:>8} {:>12} {:>8}", "L", "OPT", "exact", "cost-scaled", "steps");
    for l in [10usize, 50, 100] {
        let r = lower_bound(l, 1.0 / (2.0 * l as f64))?;
        println!(
            "{:>4} {:>8.2} {:>8.2} {:>12.2} {:>8}",
            l, r.opt_welfare, r.exact.welfare, r.cost_scaled.welfare, r.exact.steps
        );
    }
    Ok(())
}
