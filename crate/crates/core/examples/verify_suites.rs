//! Runs the named property suites at a small trial count and prints the
//! guarantee margin table.

use submod_auction::harness::verify::{run_suite, Suite, VerifyConfig};
use submod_auction::Result;

fn main() -> Result<()> {
    let trials = std::env::args().nth(1).and_then(|a| a.parse().ok()).unwrap_or(30);
    for suite in Suite::ALL {
        let r = run_suite(suite, &VerifyConfig::for_suite(suite, trials, 7))?;
        println!("{:<20} {:<4} {:>7} checks {:>4} failures", suite, if r.passed() { "pass" } else { "FAIL" }, r.checks, r.failures);
        for (label, table) in &r.beta_tables {
            let worst = table.iter().map(|b| b.min_margin).fold(f64::INFINITY, f64::min);
            println!("    {:<22} worst margin {:.4}", label, worst);
        }
    }
    Ok(())
}
