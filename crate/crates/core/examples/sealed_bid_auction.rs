//! Greedy sealed-bid auction on a two-seller coverage instance, with
//! critical-bid payments checked against bisection and a deviation scan.

use submod_auction::mechanism::Mechanism;
use submod_auction::scoring::RandomSeed;
use submod_auction::sealed_bid::{critical_bid, run_sealed_bid, verify_ic, verify_ir, verify_nas, SealedBid};
use submod_auction::valuation::CoverageInstance;
use submod_auction::{Result, ScoringRule, SellerId};

fn main() -> Result<()> {
    // Seller 0 covers vertices {0, 1}, seller 1 covers {1, 2}.
    let inst = CoverageInstance::new(vec![vec![0, 1], vec![1, 2]], vec![1.0, 2.0, 3.0])?;
    let bids = [1.0, 1.0];
    let rule = ScoringRule::greedy_margin();

    let out = run_sealed_bid(&rule, &inst, &bids, RandomSeed(0))?;
    println!("winners {}  payments {:?}  value {}  surplus {}", out.winners, out.payments, out.value, out.surplus);
    if let Some(trace) = &out.trace {
        for a in &trace.admissions {
            println!("  round {}: admit {} (score {}, gain {})", a.round, a.seller, a.score, a.gain);
        }
    }

    let mech = SealedBid::new(rule);
    for i in out.winners.iter() {
        let cb = critical_bid(&mech, &inst, &bids, i, 10.0, 1e-9)?;
        println!("seller {}: payment {} vs bisected critical bid {:.6}", i, out.payments[i.0], cb);
    }

    let ic = verify_ic(&mech, &inst, &bids, 20)?;
    println!("IC: {} deviations tried, {} profitable", ic.checks, ic.violations.len());
    println!("IR: {}  NAS: {}", verify_ir(&out, &bids), verify_nas(&out, &inst)?);

    let shaded = mech.run(&inst, &[1.0, 0.2])?;
    println!("seller 1 shading to 0.2 keeps utility {} (truthful {})", shaded.utility(1, 1.0), out.utility(SellerId(1).0, 1.0));
    Ok(())
}
