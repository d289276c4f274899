//! Runs the reference audit market for a few seeds and prints the statistics
//! used to choose the calibration constant.

use std::time::Instant;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use regretlab::audit::{audit_swap_regret, AuditParams};
use regretlab::market::{competitive_benchmark, simulate_market, FixedPriceSeller, LearningSeller, MarketConfig};

fn main() {
    let args: Vec<String> = std::env::args().collect();
    let seeds: u64 = args.get(1).and_then(|s| s.parse().ok()).unwrap_or(3);
    let lr: f64 = args.get(2).and_then(|s| s.parse().ok()).unwrap_or(1.0);
    let constant: f64 = args.get(3).and_then(|s| s.parse().ok()).unwrap_or(regretlab::audit::CALIBRATION_CONSTANT);
    let params = AuditParams { calibration_constant: constant, ..AuditParams::new(1.0, 0.01, 0.05, 0.1) };
    let n = params.required_rounds(11);
    let config = MarketConfig::uniform_grid([0.1, 0.2], 1.0, 11, n).unwrap();
    let bench = competitive_benchmark(&config).unwrap();
    println!("n = {n}; benchmark {bench:?}");
    for seed in 0..seeds {
        let t = Instant::now();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut a = LearningSeller::bandit_sda(&config, 0, 0.11, lr).unwrap();
        let mut b = LearningSeller::bandit_sda(&config, 1, 0.11, lr).unwrap();
        let log = simulate_market(&config, [&mut a, &mut b], &mut rng).unwrap();
        let r0 = audit_swap_regret(&log, 0, &params).unwrap();
        let r1 = audit_swap_regret(&log, 1, &params).unwrap();
        let known = audit_swap_regret(&log, 0, &params.clone().with_known_cost(0.1)).unwrap();
        println!(
            "sda seed {seed}: prices ({:.3}, {:.3}) r0 {:.4} c0 {:.2} known {:.4} rad {:.4} | r1 {:.4} c1 {:.2} [{:.1}s]",
            log.average_price(0),
            log.average_price(1),
            r0.swap_regret,
            r0.inferred_cost,
            known.swap_regret,
            r0.radius,
            r1.swap_regret,
            r1.inferred_cost,
            t.elapsed().as_secs_f64()
        );
        let t = Instant::now();
        let mut rng = ChaCha8Rng::seed_from_u64(1000 + seed);
        let mut f = FixedPriceSeller::new(11, 9, 0.11).unwrap();
        let mut b = LearningSeller::bandit_sda(&config, 1, 0.11, lr).unwrap();
        let log = simulate_market(&config, [&mut f, &mut b], &mut rng).unwrap();
        let r = audit_swap_regret(&log, 0, &params).unwrap();
        let known = audit_swap_regret(&log, 0, &params.clone().with_known_cost(0.1)).unwrap();
        println!(
            "fixed seed {seed}: prices ({:.3}, {:.3}) r {:.4} c {:.2} known {:.4} [{:.1}s]",
            log.average_price(0),
            log.average_price(1),
            r.swap_regret,
            r.inferred_cost,
            known.swap_regret,
            t.elapsed().as_secs_f64()
        );
    }
}
