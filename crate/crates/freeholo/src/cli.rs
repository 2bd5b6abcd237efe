//! Command-line front end.
//!
//! Five subcommands: `eval`, `expand`, `proptest`, `parse`, `sample`.
//! Standard output carries JSON only; diagnostics go to standard error
//! (controlled by the `FREEHOLO_LOG` environment variable). Exit codes:
//! 0 success, 1 usage or fixture problem, 2 domain violation, 3 numerical
//! failure (singular or divergent), 4 property-suite failure.
//!
//! All randomness is seeded explicitly — there is no wall-clock seeding, so
//! reports are byte-identical across runs with the same flags.

use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde_json::json;

use crate::domain::{is_member, sample_point, PolyMatrix};
use crate::error::{Error, Result};
use crate::matcore::MatrixTuple;
use crate::ncharness::{
    check_direct_sums, check_intertwining, check_projection_lemma, check_series_equivalence,
    HarnessConfig, PropertyReport,
};
use crate::polyparse::{parse_delta, parse_poly, parse_poly_infer, print_poly};
use crate::realization::{Colligation, RealizedFunction};

#[derive(Parser)]
#[command(
    name = "freeholo",
    about = "Evaluate and verify functions of non-commuting matrix tuples",
    version
)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Args, Debug, Clone)]
struct SharedOpts {
    /// Polynomial-matrix fixture defining the domain.
    #[arg(long, global = true)]
    delta: Option<PathBuf>,

    /// Colligation fixture.
    #[arg(long, global = true)]
    colligation: Option<PathBuf>,

    /// Seed for every random draw. Required by randomized subcommands.
    #[arg(long, global = true)]
    seed: Option<u64>,

    /// Trials per property suite.
    #[arg(long, global = true)]
    trials: Option<usize>,

    /// Residual tolerance for verdicts.
    #[arg(long, global = true)]
    tol: Option<f64>,

    /// Also write the JSON output to this file.
    #[arg(long, global = true)]
    output: Option<PathBuf>,

    /// Cap on worker threads for parallel suites.
    #[arg(long, global = true)]
    threads: Option<usize>,

    /// Target norm of sampled points, in (0, 1).
    #[arg(long, global = true)]
    shrink: Option<f64>,

    /// Condition-number cap for sampled similarities.
    #[arg(long, global = true)]
    cond_cap: Option<f64>,

    /// Truncation degree K for series expansion.
    #[arg(long, global = true)]
    degree: Option<usize>,

    /// DFT node count.
    #[arg(long, global = true)]
    nodes: Option<usize>,

    /// Caller certifies the domain is balanced (enables the series leg
    /// of the property suites).
    #[arg(long, global = true)]
    balanced_certified: bool,

    /// Write plot data (CSV curves) to --output instead of JSON. Standard
    /// output still carries the JSON report. Supported by eval --neumann
    /// (error and tail vs terms), expand (coefficient mass vs degree), and
    /// proptest (residual per suite).
    #[arg(long, global = true)]
    csv: bool,
}

#[derive(Subcommand)]
enum Cmd {
    /// Evaluate a realized function at a point fixture.
    Eval {
        #[command(flatten)]
        shared: SharedOpts,
        /// Matrix-tuple fixture for the evaluation point.
        #[arg(long)]
        point: PathBuf,
        /// Also report a truncated Neumann evaluation with this many terms.
        #[arg(long)]
        neumann: Option<usize>,
    },
    /// Expand a realized function into homogeneous components.
    Expand {
        #[command(flatten)]
        shared: SharedOpts,
        /// Optional point fixture: attaches a growth certificate (the M and
        /// r fields) and cross-checks the symbolic components against DFT
        /// extraction at this point, using --nodes circle nodes.
        #[arg(long)]
        point: Option<PathBuf>,
    },
    /// Run the property suites against a realized function.
    Proptest {
        #[command(flatten)]
        shared: SharedOpts,
    },
    /// Parse a polynomial expression and print its canonical form.
    Parse {
        #[command(flatten)]
        shared: SharedOpts,
        /// Expression in the x1..xd grammar.
        expr: String,
        /// Variable count; inferred from the expression when omitted.
        #[arg(long)]
        nvars: Option<usize>,
    },
    /// Sample matrix tuples from a domain.
    Sample {
        #[command(flatten)]
        shared: SharedOpts,
        /// Matrix size n of the sampled tuples.
        #[arg(long, default_value_t = 4)]
        dim: usize,
        /// Number of tuples to emit.
        #[arg(long, default_value_t = 1)]
        count: usize,
    },
}

/// Entry point; returns the process exit code.
pub fn run() -> i32 {
    let _ = env_logger::Builder::from_env(env_logger::Env::new().filter("FREEHOLO_LOG")).try_init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                let _ = e.print();
                return 0;
            }
            eprintln!("{e}");
            return 1;
        }
    };
    match dispatch(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

fn dispatch(cli: Cli) -> Result<i32> {
    match cli.cmd {
        Cmd::Eval {
            shared,
            point,
            neumann,
        } => cmd_eval(&shared, &point, neumann),
        Cmd::Expand { shared, point } => cmd_expand(&shared, point.as_deref()),
        Cmd::Proptest { shared } => cmd_proptest(&shared),
        Cmd::Parse {
            shared,
            expr,
            nvars,
        } => cmd_parse(&shared, &expr, nvars),
        Cmd::Sample { shared, dim, count } => cmd_sample(&shared, dim, count),
    }
}

fn read_file(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| Error::Fixture(format!("{}: {e}", path.display())))
}

fn load_delta(shared: &SharedOpts) -> Result<PolyMatrix> {
    let path = shared
        .delta
        .as_ref()
        .ok_or_else(|| Error::Usage("--delta is required".into()))?;
    parse_delta(&read_file(path)?)
}

fn load_colligation(shared: &SharedOpts) -> Result<Colligation> {
    let path = shared
        .colligation
        .as_ref()
        .ok_or_else(|| Error::Usage("--colligation is required".into()))?;
    serde_json::from_str(&read_file(path)?)
        .map_err(|e| Error::Fixture(format!("{}: {e}", path.display())))
}

fn load_point(path: &Path) -> Result<MatrixTuple> {
    let text = read_file(path)?;
    if let Ok(single) = serde_json::from_str::<MatrixTuple>(&text) {
        return Ok(single);
    }
    let many: Vec<MatrixTuple> = serde_json::from_str(&text)
        .map_err(|e| Error::Fixture(format!("{}: {e}", path.display())))?;
    match many.len() {
        1 => Ok(many.into_iter().next().unwrap()),
        n => Err(Error::Fixture(format!(
            "{}: expected one tuple, found {n}",
            path.display()
        ))),
    }
}

fn require_seed(shared: &SharedOpts) -> Result<u64> {
    shared
        .seed
        .ok_or_else(|| Error::Usage("--seed is required for randomized subcommands".into()))
}

fn configure_threads(shared: &SharedOpts) {
    if let Some(t) = shared.threads {
        let _ = rayon::ThreadPoolBuilder::new()
            .num_threads(t.max(1))
            .build_global();
    }
}

fn emit(shared: &SharedOpts, value: &serde_json::Value) -> Result<()> {
    let text = format!(
        "{}\n",
        serde_json::to_string_pretty(value).expect("serializable")
    );
    if !shared.csv {
        if let Some(path) = &shared.output {
            fs::write(path, &text)
                .map_err(|e| Error::Fixture(format!("{}: {e}", path.display())))?;
        }
    }
    print!("{text}");
    Ok(())
}

fn emit_csv(shared: &SharedOpts, rows: &str) -> Result<()> {
    let path = shared
        .output
        .as_ref()
        .ok_or_else(|| Error::Usage("--csv needs --output to receive the plot data".into()))?;
    fs::write(path, rows).map_err(|e| Error::Fixture(format!("{}: {e}", path.display())))
}

fn cmd_eval(shared: &SharedOpts, point: &Path, neumann: Option<usize>) -> Result<i32> {
    let delta = load_delta(shared)?;
    let colligation = load_colligation(shared)?;
    let x = load_point(point)?;
    let f = RealizedFunction::new(colligation, delta)?;

    let (member, norm) = is_member(f.delta(), &x, 0.0)?;
    if !member {
        let payload = json!({ "membership": false, "norm": norm });
        emit(shared, &payload)?;
        eprintln!("point outside domain: norm of delta(x) is {norm}");
        return Ok(2);
    }
    if norm > 1.0 - crate::tol::MEMBERSHIP_MARGIN {
        log::warn!(
            "point is within {} of the boundary (norm {norm:.6}); resolvent conditioning and truncation bounds degrade",
            crate::tol::MEMBERSHIP_MARGIN
        );
    }
    let value = f.eval_exact(&x)?;
    let mut payload = json!({
        "membership": true,
        "norm": norm,
        "value": value,
    });
    if let Some(m) = neumann {
        let report = f.eval_neumann(&x, m)?;
        payload["neumann"] = serde_json::to_value(&report).expect("serializable");
        if shared.csv {
            // truncation curve: error and certified tail per term count
            let mut rows = String::from("m,error,tail_bound\n");
            for rep in f.eval_neumann_sweep(&x, m)? {
                let err = crate::matcore::opnorm(&rep.value.sub(&value)?);
                rows.push_str(&format!(
                    "{},{:e},{:e}\n",
                    rep.terms_used, err, rep.tail_bound
                ));
            }
            emit_csv(shared, &rows)?;
        }
    } else if shared.csv {
        return Err(Error::Usage("--csv on eval needs --neumann".into()));
    }
    emit(shared, &payload)?;
    Ok(0)
}

fn cmd_expand(shared: &SharedOpts, point: Option<&Path>) -> Result<i32> {
    let delta = load_delta(shared)?;
    let colligation = load_colligation(shared)?;
    let f = RealizedFunction::new(colligation, delta)?;
    let k = shared.degree.unwrap_or(8);
    let mut expansion = crate::expand::symbolic_expand(&f, k)?;
    if let Some(path) = point {
        let x = load_point(path)?;
        let (member, norm) = is_member(f.delta(), &x, 0.0)?;
        if !member {
            eprintln!("point outside domain: norm of delta(x) is {norm}");
            return Ok(2);
        }
        let r = (0.999 / norm.max(1e-6)).clamp(1.01, 1e6);
        let cert = crate::expand::cauchy_certificate(&f, &x, r, 16)?;
        expansion = expansion.with_growth_cert(cert);
        let nodes = shared.nodes.unwrap_or(crate::expand::default_nodes(k));
        let dft = crate::expand::dft_components(&f, &x, k, nodes, 1.0, Some(cert))?;
        let mut worst = 0.0f64;
        for (deg, numeric) in dft.components.iter().enumerate() {
            let symbolic = expansion.component(deg).eval(&x)?;
            let gap = crate::matcore::opnorm(&numeric.sub(&symbolic)?)
                / (1.0 + crate::matcore::opnorm(numeric));
            worst = worst.max(gap);
        }
        log::info!("symbolic vs DFT cross-check at {nodes} nodes: worst relative gap {worst:.3e}");
        if worst > 1e-9 {
            eprintln!("warning: symbolic and DFT components disagree (relative gap {worst:.3e})");
        }
    }
    if shared.csv {
        // coefficient mass per homogeneous degree
        let mut rows = String::from("k,terms,coeff_mass\n");
        for (deg, comp) in expansion.components().iter().enumerate() {
            let mass: f64 = comp.terms().map(|(_, c)| c.norm()).sum();
            rows.push_str(&format!("{deg},{},{mass:e}\n", comp.num_terms()));
        }
        emit_csv(shared, &rows)?;
    }
    emit(
        shared,
        &serde_json::to_value(&expansion).expect("serializable"),
    )?;
    Ok(0)
}

fn cmd_proptest(shared: &SharedOpts) -> Result<i32> {
    configure_threads(shared);
    let delta = load_delta(shared)?;
    let colligation = load_colligation(shared)?;
    let f = RealizedFunction::new(colligation, delta)?;

    let mut cfg = HarnessConfig {
        seed: require_seed(shared)?,
        ..HarnessConfig::default()
    };
    if let Some(t) = shared.trials {
        cfg.trials = t;
    }
    if let Some(t) = shared.tol {
        if t <= 0.0 {
            return Err(Error::Usage("--tol must be positive".into()));
        }
        cfg.tolerance = t;
    }
    if let Some(c) = shared.cond_cap {
        cfg.cond_cap = c;
    }
    if let Some(s) = shared.shrink {
        cfg.shrink = s;
    }

    let mut reports: Vec<PropertyReport> =
        vec![check_intertwining(&f, &cfg)?, check_direct_sums(&f, &cfg)?];
    if f.delta().norm_at_zero() < 1.0 {
        reports.push(check_projection_lemma(&f, &cfg)?);
    } else {
        log::warn!("skipping projection lemma: 0 is not in the domain");
    }
    if shared.balanced_certified {
        reports.push(check_series_equivalence(&f, &cfg)?);
    }

    let all_pass = reports.iter().all(|r| r.passed());
    if shared.csv {
        let mut rows = String::from("suite,trials,max_residual,tolerance,verdict\n");
        for r in &reports {
            rows.push_str(&format!(
                "{},{},{:e},{:e},{}\n",
                r.suite,
                r.trials,
                r.max_residual,
                r.tolerance,
                if r.passed() { "pass" } else { "fail" }
            ));
        }
        emit_csv(shared, &rows)?;
    }
    emit(
        shared,
        &serde_json::to_value(&reports).expect("serializable"),
    )?;
    Ok(if all_pass { 0 } else { 4 })
}

fn cmd_parse(shared: &SharedOpts, expr: &str, nvars: Option<usize>) -> Result<i32> {
    let poly = match nvars {
        Some(d) => parse_poly(expr, d)?,
        None => parse_poly_infer(expr)?,
    };
    let payload = json!({
        "canonical": print_poly(&poly),
        "nvars": poly.nvars(),
        "poly": poly,
    });
    emit(shared, &payload)?;
    Ok(0)
}

fn cmd_sample(shared: &SharedOpts, dim: usize, count: usize) -> Result<i32> {
    let delta = load_delta(shared)?;
    let seed = require_seed(shared)?;
    let shrink = shared.shrink.unwrap_or(0.5);
    let mut rng = <rand_chacha::ChaCha8Rng as rand::SeedableRng>::seed_from_u64(seed);
    let tuples: Vec<MatrixTuple> = (0..count)
        .map(|_| Ok(sample_point(&delta, dim, &mut rng, shrink)?.into_point()))
        .collect::<Result<Vec<_>>>()?;
    emit(
        shared,
        &serde_json::to_value(&tuples).expect("serializable"),
    )?;
    Ok(0)
}
