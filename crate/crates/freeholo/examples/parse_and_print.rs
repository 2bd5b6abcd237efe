//! Tour of the expression grammar and the canonical printer.
//!
//! Run with: cargo run --example parse_and_print

use freeholo::polyparse::{parse_poly, parse_poly_infer, print_poly};

fn main() {
    let inputs = [
        "x1*x2 - x2*x1",
        "x1x2 - x2x1", // juxtaposition multiplies
        "1 - (x1x2 - x2x1)",
        "x1^3 + 0.5i*x2",
        "(1+2i)*x1x1 - i",
        "-x1 + 2x2 - 3",
    ];
    for text in inputs {
        let poly = parse_poly_infer(text).expect("parses");
        println!("{text:26} -> {}", print_poly(&poly));
    }

    // diagnostics carry line and column
    for bad in ["x1 + x9", "x1 + (x2", "x1^2.5"] {
        match parse_poly(bad, 2) {
            Err(e) => println!("{bad:26} -> {e}"),
            Ok(_) => unreachable!(),
        }
    }

    // canonical printing is stable: print . parse . print = print
    let p = parse_poly("x2x1 + x1 - x1 + 2x2x1", 2).unwrap();
    let once = print_poly(&p);
    let twice = print_poly(&parse_poly(&once, 2).unwrap());
    assert_eq!(once, twice);
    println!("canonical form is idempotent: {once}");
}
