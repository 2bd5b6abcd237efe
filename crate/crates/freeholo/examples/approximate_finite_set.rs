//! Certified polynomial approximation on a finite set of points: the Cauchy
//! certificate at each point picks the truncation degree, and the reported
//! maximum error honors the requested accuracy.
//!
//! Run with: cargo run --example approximate_finite_set

use freeholo::domain::{sample_point, PolyMatrix};
use freeholo::expand::approximate_on_finite_set;
use freeholo::matcore::{opnorm, MatrixTuple};
use freeholo::realization::{Colligation, RealizedFunction};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn main() {
    let mut rng = ChaCha8Rng::seed_from_u64(44);
    let col = Colligation::random(2, 2, 2, &mut rng).unwrap();
    let f = RealizedFunction::new(col, PolyMatrix::ball_max(2)).unwrap();

    let points: Vec<MatrixTuple> = (0..5)
        .map(|_| {
            sample_point(f.delta(), 2, &mut rng, 0.4)
                .unwrap()
                .into_point()
        })
        .collect();

    for eps in [1e-3, 1e-6] {
        let approx = approximate_on_finite_set(&f, &points, eps, false).unwrap();
        println!(
            "eps = {eps:.0e}: degree {} polynomial with {} terms, max error {:.3e} (certified: {})",
            approx.degree,
            approx.poly.num_terms(),
            approx.max_error,
            approx.certified
        );
        for (i, x) in points.iter().enumerate() {
            let err = opnorm(
                &f.eval_exact(x)
                    .unwrap()
                    .sub(&approx.poly.eval(x).unwrap())
                    .unwrap(),
            );
            println!("  point {i}: error {err:.3e}");
        }
    }
}
