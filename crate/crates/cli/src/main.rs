//! `helmholtz` — decide whether a system of second-order ODEs comes from a
//! Lagrangian, construct one when it does, and find Jacobi last multipliers
//! for 1-D dissipative systems.
//!
//! Exit codes: 0 = conditions pass / Lagrangian constructed, 2 = conditions
//! fail or the construction is invalid (a report is still emitted),
//! 1 = usage, parse or schema error.

mod report;

use clap::error::ErrorKind;
use clap::{Args, Parser, Subcommand};
use helmholtz_core::construct::construct;
use helmholtz_core::expr::{euler_lagrange, ZeroSettings};
use helmholtz_core::helmholtz::{check, OdeSystem, Overall};
use helmholtz_core::multiplier::{multiplier_then_construct, MultiplierError};
use helmholtz_core::parser::{load_system, SystemDocument};
use report::{render_check, render_construct, render_multiplier, render_roundtrip, Format};
use std::path::PathBuf;

#[derive(Parser)]
#[command(
    name = "helmholtz",
    about = "Helmholtz-condition checker and Lagrangian constructor",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Check the Helmholtz conditions H1-H3 for a system file.
    Check(CommonArgs),
    /// Check, then construct a validated Lagrangian.
    Construct(CommonArgs),
    /// Find a Jacobi last multiplier for a 1-D system, then construct.
    Multiplier(CommonArgs),
    /// Compute Euler-Lagrange equations of a `lagrangian` file and re-check.
    Roundtrip(CommonArgs),
}

#[derive(Args)]
struct CommonArgs {
    /// Input system file (UTF-8 JSON).
    input: PathBuf,
    /// Seed of the numeric zero test.
    #[arg(long, default_value_t = 42)]
    seed: u64,
    /// Sample count of the numeric zero test.
    #[arg(long, default_value_t = 100)]
    samples: u32,
    /// Relative tolerance of the numeric zero test.
    #[arg(long, default_value_t = 1e-9)]
    tol: f64,
    /// Report format.
    #[arg(long, value_enum, default_value_t = Format::Text)]
    format: Format,
    /// Write the report to a file instead of standard output.
    #[arg(long)]
    output: Option<PathBuf>,
}

fn main() {
    std::process::exit(run());
}

fn run() -> i32 {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(err) => {
            let code = match err.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 1,
            };
            let _ = err.print();
            return code;
        }
    };
    let (cmd_name, args) = match &cli.command {
        Cmd::Check(a) => ("check", a),
        Cmd::Construct(a) => ("construct", a),
        Cmd::Multiplier(a) => ("multiplier", a),
        Cmd::Roundtrip(a) => ("roundtrip", a),
    };
    if args.samples < 1 {
        eprintln!("error: --samples must be at least 1");
        return 1;
    }
    if args.tol.is_nan() || args.tol <= 0.0 {
        eprintln!("error: --tol must be positive");
        return 1;
    }
    let settings = ZeroSettings::new(args.seed, args.samples, args.tol);
    let input_name = args.input.display().to_string();
    let text = match std::fs::read_to_string(&args.input) {
        Ok(t) => t,
        Err(err) => {
            eprintln!("error: cannot read `{input_name}`: {err}");
            return 1;
        }
    };
    let document = match load_system(&text) {
        Ok(d) => d,
        Err(err) => {
            eprintln!("error: {err}");
            return 1;
        }
    };

    let (rendered, code) = match (cmd_name, document) {
        ("roundtrip", SystemDocument::Lagrangian { context, lagrangian }) => {
            let n = context.coordinates().len() as u32;
            let equations = match euler_lagrange(&lagrangian, n) {
                Ok(eqs) => eqs,
                Err(err) => {
                    eprintln!("error: {err}");
                    return 1;
                }
            };
            let sys = match OdeSystem::new(
                context.coordinates().to_vec(),
                context.parameters().to_vec(),
                equations,
            ) {
                Ok(s) => s,
                Err(err) => {
                    eprintln!("error: {err}");
                    return 1;
                }
            };
            let report = match check(&sys, &settings) {
                Ok(r) => r,
                Err(err) => {
                    eprintln!("error: {err}");
                    return 1;
                }
            };
            let code = exit_for(report.overall);
            (
                render_roundtrip(&lagrangian, &sys, &report, &input_name, args.format),
                code,
            )
        }
        ("roundtrip", SystemDocument::Equations(_)) => {
            eprintln!("error: `roundtrip` requires a file with a `lagrangian` field");
            return 1;
        }
        (_, SystemDocument::Lagrangian { .. }) => {
            eprintln!("error: `{cmd_name}` requires a file with an `equations` field");
            return 1;
        }
        ("check", SystemDocument::Equations(sys)) => {
            let report = match check(&sys, &settings) {
                Ok(r) => r,
                Err(err) => {
                    eprintln!("error: {err}");
                    return 1;
                }
            };
            let code = exit_for(report.overall);
            (render_check(&report, &sys, &input_name, args.format), code)
        }
        ("construct", SystemDocument::Equations(sys)) => {
            let report = match check(&sys, &settings) {
                Ok(r) => r,
                Err(err) => {
                    eprintln!("error: {err}");
                    return 1;
                }
            };
            if !report.passed() {
                let rendered = render_construct(
                    &report,
                    Err("Helmholtz conditions fail; no Lagrangian exists"),
                    &sys,
                    &input_name,
                    args.format,
                );
                (rendered, 2)
            } else {
                match construct(&sys, &settings) {
                    Ok(result) => {
                        let rendered = render_construct(
                            &report,
                            Ok(&result),
                            &sys,
                            &input_name,
                            args.format,
                        );
                        (rendered, 0)
                    }
                    Err(err) => {
                        let message = err.to_string();
                        let rendered = render_construct(
                            &report,
                            Err(message.as_str()),
                            &sys,
                            &input_name,
                            args.format,
                        );
                        (rendered, 2)
                    }
                }
            }
        }
        ("multiplier", SystemDocument::Equations(sys)) => {
            match multiplier_then_construct(&sys, &settings) {
                Ok(result) => {
                    let rendered = render_multiplier(
                        Ok(&result),
                        &sys,
                        &input_name,
                        &settings,
                        args.format,
                    );
                    (rendered, 0)
                }
                Err(MultiplierError::NotOneDimensional(n)) => {
                    eprintln!(
                        "error: multiplier search requires a one-dimensional system, got n = {n}"
                    );
                    return 1;
                }
                Err(err) => {
                    let message = err.to_string();
                    let rendered = render_multiplier(
                        Err(message.as_str()),
                        &sys,
                        &input_name,
                        &settings,
                        args.format,
                    );
                    (rendered, 2)
                }
            }
        }
        _ => unreachable!("command/document combinations are exhaustive"),
    };

    if let Some(path) = &args.output {
        if let Err(err) = std::fs::write(path, rendered.as_bytes()) {
            eprintln!("error: cannot write `{}`: {err}", path.display());
            return 1;
        }
    } else {
        print!("{rendered}");
    }
    code
}

fn exit_for(overall: Overall) -> i32 {
    match overall {
        Overall::Pass | Overall::PassWithCaveat => 0,
        Overall::Fail => 2,
    }
}
