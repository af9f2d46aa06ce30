use std::fmt::Write as _;

use anyhow::anyhow;
use rayon::prelude::*;
use serde::Serialize;

use crate::args::{Algorithm, SweepArgs};
use crate::cluster::{config, execute, load, scores};
use crate::report::write_json;
use crate::Failure;

/// One grid cell. Metrics are `None` when the run failed numerically.
#[derive(Debug, Serialize)]
struct Cell {
    sigma: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    curvature: Option<f64>,
    ari: Option<f64>,
    nmi: Option<f64>,
    num_clusters: Option<usize>,
    iterations: Option<usize>,
    best: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    error: Option<String>,
}

#[derive(Debug, Serialize)]
struct SweepReport<'a> {
    algorithm: &'static str,
    input: String,
    seed: u64,
    cells: &'a [Cell],
}

pub fn run(args: &SweepArgs) -> Result<(), Failure> {
    let common = &args.common;
    if common.label_column.is_none() {
        return Err(Failure::usage(anyhow!(
            "sweep needs ground-truth labels; pass --label-column"
        )));
    }
    if args.sigmas.is_empty() {
        return Err(Failure::usage(anyhow!("--sigmas is empty")));
    }
    let grid: Vec<(f64, Option<f64>)> = match common.algorithm {
        Algorithm::Hypegbms => args
            .sigmas
            .iter()
            .flat_map(|&s| args.curvatures.iter().map(move |&c| (s, Some(c))))
            .collect(),
        Algorithm::Gbms => args.sigmas.iter().map(|&s| (s, None)).collect(),
    };
    if grid.is_empty() {
        return Err(Failure::usage(anyhow!("--curvatures is empty")));
    }
    // Reject bad grid values before doing any work.
    let configs = grid
        .iter()
        .map(|&(s, c)| config(common, s, c))
        .collect::<Result<Vec<_>, _>>()?;
    let ds = load(common)?;

    let mut cells: Vec<Cell> = grid
        .par_iter()
        .zip(configs.par_iter())
        .map(|(&(sigma, curvature), cfg)| {
            let mut cell = Cell {
                sigma,
                curvature,
                ari: None,
                nmi: None,
                num_clusters: None,
                iterations: None,
                best: false,
                error: None,
            };
            match execute(common.algorithm, &ds, cfg).and_then(|r| Ok((scores(&ds, &r.labels)?, r))) {
                Ok((m, r)) => {
                    cell.ari = m.map(|m| m.0);
                    cell.nmi = m.map(|m| m.1);
                    cell.num_clusters = Some(r.num_clusters);
                    cell.iterations = Some(r.iterations());
                }
                Err(f) => cell.error = Some(f.to_string()),
            }
            cell
        })
        .collect();

    let best = cells
        .iter()
        .enumerate()
        .filter_map(|(i, c)| c.ari.map(|a| (i, a)))
        .fold(None, |acc: Option<(usize, f64)>, (i, a)| match acc {
            Some((_, b)) if b >= a => acc,
            _ => Some((i, a)),
        });
    let Some((best_idx, _)) = best else {
        return Err(Failure {
            code: 2,
            error: anyhow!("every grid cell failed: {}", cells[0].error.as_deref().unwrap_or("")),
        });
    };
    cells[best_idx].best = true;

    let fmt = |v: Option<f64>| v.map_or(String::new(), |x| x.to_string());
    let mut text = String::from("sigma,c,ari,nmi,k,iterations,best\n");
    for c in &cells {
        let _ = writeln!(
            text,
            "{},{},{},{},{},{},{}",
            c.sigma,
            fmt(c.curvature),
            fmt(c.ari),
            fmt(c.nmi),
            c.num_clusters.map_or(String::new(), |k| k.to_string()),
            c.iterations.map_or(String::new(), |k| k.to_string()),
            u8::from(c.best)
        );
        if let Some(e) = &c.error {
            eprintln!("warning: sigma {} c {}: {e}", c.sigma, fmt(c.curvature));
        }
    }
    std::fs::write(&args.output, text)
        .map_err(|e| Failure::usage(anyhow::Error::new(e).context(format!("writing {}", args.output.display()))))?;

    let b = &cells[best_idx];
    eprintln!(
        "best: sigma {}{} ARI {:.4} NMI {:.4} K {}",
        b.sigma,
        b.curvature.map_or(String::new(), |c| format!(" c {c}")),
        b.ari.unwrap_or(f64::NAN),
        b.nmi.unwrap_or(f64::NAN),
        b.num_clusters.unwrap_or(0)
    );
    if let Some(path) = &common.report {
        write_json(
            &SweepReport {
                algorithm: common.algorithm.name(),
                input: common.input.display().to_string(),
                seed: common.seed,
                cells: &cells,
            },
            path,
        )?;
    }
    Ok(())
}
