//! Lazy greedy with heap-snapshot payments against the naive per-winner
//! re-runs, on a 2000-seller coverage instance from a synthetic vote graph.

use std::time::Instant;

use submod_auction::instances::{build_instance, synthetic_graph, ExperimentConfig};
use submod_auction::scoring::RandomSeed;
use submod_auction::sealed_bid::{run_sealed_bid, run_sealed_bid_lazy};
use submod_auction::selection::{run_meta, run_meta_lazy, run_meta_observed, MetaOptions};
use submod_auction::{Result, ScoringRule};

fn main() -> Result<()> {
    let n: usize = std::env::args().nth(1).and_then(|a| a.parse().ok()).unwrap_or(2000);
    let graph = synthetic_graph(7000, 2800, 15.0, 3)?;
    let (inst, costs) = build_instance(&graph, &ExperimentConfig::new(n, 1.0, 1, 1), 0)?;
    let rule = ScoringRule::greedy_margin();
    let seed = RandomSeed(0);

    let t = Instant::now();
    let full = run_meta_observed(&rule, &inst, &costs, seed, &MetaOptions { excluded: None, full_rescore: true }, &mut |_| {})?;
    println!("allocation, full rescore: {:>9} queries {:>8.1?}", full.queries, t.elapsed());
    let t = Instant::now();
    let cached = run_meta(&rule, &inst, &costs, seed)?;
    println!("allocation, cached gains: {:>9} queries {:>8.1?}", cached.queries, t.elapsed());
    let t = Instant::now();
    let lazy = run_meta_lazy(&rule, &inst, &costs, seed)?;
    println!("allocation, lazy heap:    {:>9} queries {:>8.1?}", lazy.queries, t.elapsed());
    println!("same selection: {}", full.same_selection(&lazy) && cached.same_selection(&lazy));

    let t = Instant::now();
    let lp = run_sealed_bid_lazy(&rule, &inst, &costs, seed)?;
    println!("payments, lazy:  {:>9} queries {:>8.1?}", lp.queries, t.elapsed());
    if n <= 500 || std::env::var_os("NAIVE").is_some() {
        let t = Instant::now();
        let np = run_sealed_bid(&rule, &inst, &costs, seed)?;
        println!("payments, naive: {:>9} queries {:>8.1?}", np.queries, t.elapsed());
        println!("identical payments: {}", np.payments == lp.payments);
    } else {
        println!("naive payments skipped at n = {}; set NAIVE=1 to run them", n);
    }
    println!("{} winners, total payment {:.1}", lp.winners.len(), lp.total_payment());
    Ok(())
}
