//! Homogeneous components three ways: symbolic expansion of the realization,
//! DFT extraction on a circle of points, and the Cauchy growth certificate
//! that bounds them both.
//!
//! Run with: cargo run --example homogeneous_components

use freeholo::domain::{sample_point, PolyMatrix};
use freeholo::expand::{
    cauchy_certificate, check_component_bounds, dft_components, symbolic_expand,
};
use freeholo::matcore::opnorm;
use freeholo::polyparse::print_poly;
use freeholo::realization::{Colligation, RealizedFunction};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn main() {
    let mut rng = ChaCha8Rng::seed_from_u64(21);
    let col = Colligation::random(2, 2, 1, &mut rng).unwrap();
    let f = RealizedFunction::new(col, PolyMatrix::ball_max(2)).unwrap();

    let expansion = symbolic_expand(&f, 6).unwrap();
    println!("first components of the expansion:");
    for k in 0..=2 {
        println!("  P_{k} = {}", print_poly(expansion.component(k)));
    }

    let point = sample_point(f.delta(), 3, &mut rng, 0.5).unwrap();
    let x = point.point();
    let r = 0.999 / point.delta_norm();
    let cert = cauchy_certificate(&f, x, r, 32).unwrap();
    println!(
        "growth certificate at this point: ||P_k(x)|| <= {:.4} / {:.4}^k",
        cert.sup, cert.radius
    );

    let dft = dft_components(&f, x, 6, 64, 1.0, Some(cert)).unwrap();
    println!(
        "{:>3} {:>14} {:>14} {:>14}",
        "k", "||A_k||", "sym vs DFT", "cauchy bound"
    );
    for k in 0..=6 {
        let sym = expansion.component(k).eval(x).unwrap();
        let gap = opnorm(&dft.components[k].sub(&sym).unwrap());
        println!(
            "{k:>3} {:>14.6e} {:>14.3e} {:>14.6e}",
            opnorm(&dft.components[k]),
            gap,
            cert.component_bound(k)
        );
    }
    let checks = check_component_bounds(&cert, &dft.components, 1e-8);
    println!(
        "all components inside the certified envelope: {}",
        checks.iter().all(|&b| b)
    );
    if let Some(bounds) = &dft.alias_bounds {
        println!(
            "worst DFT aliasing bound: {:.3e}",
            bounds.iter().cloned().fold(0.0, f64::max)
        );
    }
}
