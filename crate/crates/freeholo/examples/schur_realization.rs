//! Isometric colligations realize functions bounded by 1, and the defect
//! identity certifies the bound: I - F(x)*F(x) factors as G*(I - d'*d')G,
//! which is visibly positive semidefinite.
//!
//! Run with: cargo run --example schur_realization

use freeholo::domain::{sample_point, PolyMatrix};
use freeholo::matcore::opnorm;
use freeholo::realization::{Colligation, RealizedFunction};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn main() {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let delta = PolyMatrix::ball_row(2);
    let col = Colligation::random(1, 2, 3, &mut rng).unwrap();
    println!(
        "random colligation on the row-ball: ell = 3, isometry defect {:.2e}",
        col.isometry_defect()
    );
    let f = RealizedFunction::new(col, delta).unwrap();

    println!(
        "{:>4} {:>12} {:>14} {:>14}",
        "n", "||F(x)||", "min eig", "residual"
    );
    for n in [2usize, 4, 8, 16] {
        let x = sample_point(f.delta(), n, &mut rng, 0.85)
            .unwrap()
            .into_point();
        let value = f.eval_exact(&x).unwrap();
        let defect = f.defect_check(&x).unwrap();
        println!(
            "{n:>4} {:>12.8} {:>14.3e} {:>14.3e}",
            opnorm(&value),
            defect.min_eig,
            defect.residual
        );
    }
    println!("norms stay at or below 1; the defect eigenvalues stay nonnegative");
}
