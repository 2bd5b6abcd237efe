//! Domains cut out by a matrix of free polynomials, and their samplers.
//!
//! Three stock domains: the max-ball (every coordinate a strict contraction),
//! the row-ball (x1 x1* + ... + xd xd* < I), and a shifted commutator whose
//! matrix-level points do not exist at all.
//!
//! Run with: cargo run --example domain_membership

use freeholo::domain::{delta_norm, is_member, sample_point, PolyMatrix};
use freeholo::matcore::MatrixTuple;
use num_complex::Complex;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn main() {
    let max_ball = PolyMatrix::ball_max(2);
    let row_ball = PolyMatrix::ball_row(2);

    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let point = sample_point(&max_ball, 4, &mut rng, 0.7).unwrap();
    println!(
        "sampled 4x4 point with ||delta(x)|| = {:.6} (target 0.7)",
        point.delta_norm()
    );

    // the same tuple measured in the row-ball
    let (member, norm) = is_member(&row_ball, point.point(), 0.0).unwrap();
    println!("row-ball norm of that point: {norm:.6} (member: {member})");

    // scaling by the closed disk stays inside the max-ball (it is balanced)
    for lam in [0.5, 0.9, 1.0] {
        let scaled = point.point().scale(Complex::new(lam, 0.0));
        let (m, n) = is_member(&max_ball, &scaled, 0.0).unwrap();
        println!("  scale {lam:>4}: norm {n:.6}, member {m}");
    }

    // the shifted commutator: ||delta(0)|| = 1, and no matrix point works
    let comm = PolyMatrix::commutator_shift();
    let zero = MatrixTuple::zeros(2, 3);
    let (member, norm) = is_member(&comm, &zero, 0.0).unwrap();
    println!("commutator domain at x = 0: norm {norm}, member {member}");
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    match sample_point(&comm, 2, &mut rng, 0.5) {
        Err(e) => println!("sampling the commutator domain fails as expected:\n  {e}"),
        Ok(p) => println!("unexpected member with norm {}", p.delta_norm()),
    }

    // membership behaves monotonically under domain scaling
    let tight = max_ball.scale_domain(2.0);
    let (m1, n1) = is_member(&tight, point.point(), 0.0).unwrap();
    println!("2x-scaled max-ball: norm {n1:.4}, member {m1}");
    let _ = delta_norm(&tight, point.point()).unwrap();
}
