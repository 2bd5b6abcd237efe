//! Truncated Neumann evaluation with certified tails.
//!
//! The resolvent series has ratio q = ||D' d'(x)|| < 1, so the truncation
//! error after m terms is at most ||B|| ||d'(x)|| q^m / (1 - q). The table
//! shows the measured error never exceeds the certificate.
//!
//! Run with: cargo run --example neumann_truncation

use freeholo::domain::{sample_point, PolyMatrix};
use freeholo::matcore::opnorm;
use freeholo::realization::{Colligation, RealizedFunction};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn main() {
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    let col = Colligation::random(2, 2, 2, &mut rng).unwrap();
    let f = RealizedFunction::new(col, PolyMatrix::ball_max(2)).unwrap();
    let x = sample_point(f.delta(), 4, &mut rng, 0.85)
        .unwrap()
        .into_point();

    let exact = f.eval_exact(&x).unwrap();
    let reports = f.eval_neumann_sweep(&x, 24).unwrap();
    println!("q = {:.6}", reports[0].q);
    println!("{:>4} {:>14} {:>14}", "m", "error", "tail bound");
    for rep in reports.iter().step_by(3) {
        let err = opnorm(&rep.value.sub(&exact).unwrap());
        println!(
            "{:>4} {:>14.3e} {:>14.3e}",
            rep.terms_used, err, rep.tail_bound
        );
        assert!(err <= rep.tail_bound + 1e-12);
    }

    let auto = f.eval_neumann_auto(&x).unwrap();
    println!(
        "auto truncation used {} terms for tail {:.3e}",
        auto.terms_used, auto.tail_bound
    );
}
