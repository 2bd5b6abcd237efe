//! Run the randomized property suites against three evaluators: a realized
//! function (passes everything), a free polynomial (passes everything), and
//! the transpose map (graded but not intertwining-preserving — the negative
//! control that shows the suites have teeth).
//!
//! Run with: cargo run --example property_suites

use freeholo::domain::PolyMatrix;
use freeholo::ncharness::{
    check_direct_sums, check_intertwining, check_projection_lemma, HarnessConfig, PropertyReport,
    TransposeEvaluator,
};
use freeholo::polyparse::parse_poly;
use freeholo::realization::{Colligation, Evaluator, PolyEvaluator, RealizedFunction};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn show(report: &PropertyReport) {
    println!(
        "  {:<18} trials {:>4}  max residual {:>10.2e}  verdict: {}",
        report.suite,
        report.trials,
        report.max_residual,
        if report.passed() { "pass" } else { "FAIL" }
    );
    for f in report.failures.iter().take(3) {
        println!(
            "    failure seed {} digest {} residual {:.2e}",
            f.seed, f.digest, f.residual
        );
    }
}

fn main() {
    let cfg = HarnessConfig {
        seed: 2024,
        trials: 60,
        ..HarnessConfig::default()
    };

    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let realized = RealizedFunction::new(
        Colligation::random(2, 2, 2, &mut rng).unwrap(),
        PolyMatrix::ball_max(2),
    )
    .unwrap();
    let poly = PolyEvaluator::new(
        parse_poly("0.2 + 0.4x1 + x1x2 - x2x1", 2).unwrap(),
        PolyMatrix::ball_max(2),
    )
    .unwrap();
    let transpose = TransposeEvaluator::new(2);

    println!("realized function ({}):", realized.name());
    show(&check_intertwining(&realized, &cfg).unwrap());
    show(&check_direct_sums(&realized, &cfg).unwrap());
    show(&check_projection_lemma(&realized, &cfg).unwrap());

    println!("free polynomial ({}):", poly.name());
    show(&check_intertwining(&poly, &cfg).unwrap());
    show(&check_direct_sums(&poly, &cfg).unwrap());

    println!("transpose map (not intertwining-preserving):");
    show(&check_intertwining(&transpose, &cfg).unwrap());
}
