//! Derivatives without limits: evaluating F on the doubled tuple
//! [[a, eps h], [0, a]] puts eps * DF(a)[h] in the upper-right corner,
//! exactly. Finite differences only serve as a cross-check here.
//!
//! Run with: cargo run --example block_derivative

use freeholo::domain::{gaussian_tuple, sample_point, PolyMatrix};
use freeholo::matcore::{opnorm, MatrixTuple};
use freeholo::realization::{block_derivative_auto, Colligation, RealizedFunction};
use num_complex::Complex;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn main() {
    let mut rng = ChaCha8Rng::seed_from_u64(33);
    let col = Colligation::random(2, 2, 2, &mut rng).unwrap();
    let f = RealizedFunction::new(col, PolyMatrix::ball_max(2)).unwrap();

    let a = sample_point(f.delta(), 3, &mut rng, 0.5)
        .unwrap()
        .into_point();
    let h = gaussian_tuple(&mut rng, 2, 3);
    let h = h.scale(Complex::new(
        0.1 / h.parts().iter().map(opnorm).fold(0.0, f64::max),
        0.0,
    ));

    let exact = block_derivative_auto(&f, &a, &h).unwrap();

    // central finite differences for comparison
    let fd = |s: f64| {
        let shift = |sign: f64| {
            MatrixTuple::new(
                a.parts()
                    .iter()
                    .zip(h.parts())
                    .map(|(ar, hr)| ar.add(&hr.scale(Complex::new(sign * s, 0.0))).unwrap())
                    .collect(),
            )
            .unwrap()
        };
        f.eval_exact(&shift(1.0))
            .unwrap()
            .sub(&f.eval_exact(&shift(-1.0)).unwrap())
            .unwrap()
            .scale(Complex::new(0.5 / s, 0.0))
    };
    println!("{:>10} {:>16}", "fd step", "gap to block derivative");
    for s in [1e-2, 1e-3, 1e-4] {
        let gap = opnorm(&fd(s).sub(&exact).unwrap());
        println!("{s:>10.0e} {gap:>16.3e}");
    }

    // linearity in the direction
    let lambda = Complex::new(0.4, -1.1);
    let scaled = block_derivative_auto(&f, &a, &h.scale(lambda)).unwrap();
    println!(
        "complex homogeneity residual: {:.3e}",
        opnorm(&scaled.sub(&exact.scale(lambda)).unwrap())
    );
}
