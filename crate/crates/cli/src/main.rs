//! `hypegbms` command-line tool.
//!
//! Exit codes: 0 success, 1 usage or configuration error, 2 numeric
//! failure, 3 failed validation check.

mod args;
mod cluster;
mod report;
mod sweep;

use std::fmt;
use std::process::ExitCode;

use clap::Parser;
use hypegbms::data::{make_hierarchical, write_csv, HierarchySpec};
use hypegbms::validate::{run_all, ValidateOptions};

use args::{Cli, Command, GenArgs, ValidateArgs};

/// An error together with the exit code it maps to.
#[derive(Debug)]
pub struct Failure {
    pub code: u8,
    pub error: anyhow::Error,
}

impl Failure {
    pub fn usage(error: impl Into<anyhow::Error>) -> Self {
        Failure {
            code: 1,
            error: error.into(),
        }
    }
}

impl fmt::Display for Failure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:#}", self.error)
    }
}

impl From<hypegbms::Error> for Failure {
    fn from(e: hypegbms::Error) -> Self {
        Failure {
            code: if e.is_numeric() { 2 } else { 1 },
            // The library's messages already include their causes.
            error: anyhow::anyhow!("{e}"),
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let outcome = match cli.command {
        Command::Cluster(a) => cluster::run(&a),
        Command::Sweep(a) => sweep::run(&a),
        Command::Validate(a) => validate(&a),
        Command::Gen(a) => generate(&a),
    };
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {f}");
            ExitCode::from(f.code)
        }
    }
}

fn validate(args: &ValidateArgs) -> Result<(), Failure> {
    let opts = ValidateOptions {
        seed: args.seed,
        only: args.only.clone(),
        inject_fault: args.inject_fault,
    };
    let outcomes = run_all(&opts)?;
    println!(
        "{:<24} {:>12} {:>14} {:>10}  result",
        "check", "measured", "threshold", "time"
    );
    for o in &outcomes {
        println!(
            "{:<24} {:>12.4e} {:>14} {:>9.3}s  {}{}",
            o.name,
            o.measured,
            o.threshold.to_string(),
            o.elapsed.as_secs_f64(),
            if o.passed { "PASS" } else { "FAIL" },
            if o.detail.is_empty() {
                String::new()
            } else {
                format!("  ({})", o.detail)
            },
        );
    }
    let failed = outcomes.iter().filter(|o| !o.passed).count();
    if failed > 0 {
        return Err(Failure {
            code: 3,
            error: anyhow::anyhow!("{failed} of {} checks failed", outcomes.len()),
        });
    }
    Ok(())
}

fn generate(args: &GenArgs) -> Result<(), Failure> {
    let ds = make_hierarchical(&HierarchySpec {
        num_roots: args.roots,
        children_per_root: args.children,
        points_per_leaf: args.points_per_leaf,
        leaf_spread: args.leaf_spread,
        level_gap: args.level_gap,
        dim: args.dim,
        seed: args.seed,
    })?;
    write_csv(&ds, &args.output)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn library_errors_map_to_exit_codes() {
        let numeric = Failure::from(hypegbms::Error::NumericDegenerate("boundary".into()));
        assert_eq!(numeric.code, 2);
        let usage = Failure::from(hypegbms::Error::InvalidArgument("sigma".into()));
        assert_eq!(usage.code, 1);
        assert_eq!(usage.to_string(), "invalid argument: sigma");
    }

    #[test]
    fn parse_errors_are_usage_errors() {
        let e = Cli::try_parse_from(["hypegbms", "cluster", "--sigma", "x"]).unwrap_err();
        assert!(e.use_stderr());
        let help = Cli::try_parse_from(["hypegbms", "--help"]).unwrap_err();
        assert!(!help.use_stderr());
    }

    #[test]
    fn negative_values_parse() {
        let cli = Cli::try_parse_from([
            "hypegbms",
            "sweep",
            "--input",
            "a.csv",
            "--output",
            "b.csv",
            "--curvatures",
            "-0.5,-1",
        ])
        .unwrap();
        let Command::Sweep(s) = cli.command else {
            panic!("expected sweep")
        };
        assert_eq!(s.curvatures, [-0.5, -1.0]);
        assert_eq!(s.sigmas.len(), 10);
    }
}
