//! Evaluate free polynomials on tuples of matrices.
//!
//! Words evaluate to ordered products, so x1*x2 and x2*x1 differ; evaluation
//! is multiplicative and splits across direct sums.
//!
//! Run with: cargo run --example evaluate_polynomial

use freeholo::matcore::{blkdiag, matmul, opnorm, CMatrix, MatrixTuple};
use freeholo::polyparse::parse_poly;
use num_complex::Complex;

fn main() {
    // the commutator at the 2x2 matrix units E12, E21
    let p = parse_poly("x1*x2 - x2*x1", 2).unwrap();
    let x = MatrixTuple::new(vec![CMatrix::unit(2, 0, 1), CMatrix::unit(2, 1, 0)]).unwrap();
    let value = p.eval(&x).unwrap();
    println!("commutator at (E12, E21):");
    for r in 0..2 {
        let row: Vec<String> = (0..2)
            .map(|c| format!("{:+.1}", value.get(r, c).re))
            .collect();
        println!("  [{}]", row.join(", "));
    }

    // multiplicativity: eval(p*q) = eval(p) eval(q)
    let q = parse_poly("1 + x1 - 0.5x2x1", 2).unwrap();
    let y = MatrixTuple::new(vec![
        CMatrix::from_rows_re(&[&[0.1, 0.2], &[0.0, -0.3]]),
        CMatrix::from_rows_re(&[&[0.0, 0.4], &[0.1, 0.2]]),
    ])
    .unwrap();
    let lhs = p.mul(&q).eval(&y).unwrap();
    let rhs = matmul(&p.eval(&y).unwrap(), &q.eval(&y).unwrap()).unwrap();
    println!(
        "multiplicativity residual: {:.2e}",
        opnorm(&lhs.sub(&rhs).unwrap())
    );

    // direct sums: eval(p, x (+) y) = eval(p, x) (+) eval(p, y)
    let sum = MatrixTuple::direct_sum(&[&x, &y]).unwrap();
    let whole = p.eval(&sum).unwrap();
    let blocks = blkdiag(&[&p.eval(&x).unwrap(), &p.eval(&y).unwrap()]);
    println!(
        "direct-sum residual:       {:.2e}",
        opnorm(&whole.sub(&blocks).unwrap())
    );

    // homogeneous components scale like their degree
    let r = parse_poly("1 + 2x1 + 3x1x2", 2).unwrap();
    let lambda = Complex::new(0.5, 0.5);
    for (k, comp) in r.homogeneous_split().iter().enumerate() {
        let left = comp.eval(&y.scale(lambda)).unwrap();
        let right = comp.eval(&y).unwrap().scale(lambda.powu(k as u32));
        println!(
            "degree {k}: || P_k(l x) - l^k P_k(x) || = {:.2e}",
            opnorm(&left.sub(&right).unwrap())
        );
    }
}
