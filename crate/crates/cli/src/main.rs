mod config;
mod ranges;

use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::Arc;

use anyhow::{Context, Result};
use clap::{Parser, Subcommand, ValueEnum};
use hpdg::manufactured::{ManufacturedSolution, SolutionCatalog};
use hpdg::study::StudyConfig;
use hpdg::{
    assemble, build_mesh, compute_error, run_study, run_verification_suite, solve, BoxDomain, FieldCatalog,
    Refinement, VerifyOptions,
};
use serde_json::json;

use crate::config::PartialStudy;
use crate::ranges::{parse_list_arg, UsizeList};

#[derive(Parser)]
#[command(name = "hpdg", version, about = "Upwind dG solver and hp-convergence studies")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve one manufactured problem and export the discrete solution.
    Solve(SolveArgs),
    /// Run an h- or p-convergence study.
    Study(StudyArgs),
    /// Run the verification suite; exits nonzero if any check fails.
    Verify(VerifyArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Json,
    Csv,
}

#[derive(clap::Args)]
struct SolveArgs {
    #[arg(long, default_value_t = 2)]
    dim: usize,
    #[arg(long, default_value = "constant")]
    field: FieldCatalog,
    #[arg(long, default_value = "smooth-sine")]
    solution: SolutionCatalog,
    #[arg(long, default_value_t = 2.5)]
    gamma: f64,
    #[arg(long, default_value_t = 0.5)]
    singular_point: f64,
    #[arg(long, default_value_t = 1.0)]
    frequency: f64,
    #[arg(long, short, default_value_t = 2)]
    degree: usize,
    /// Cells per axis.
    #[arg(long, default_value_t = 4)]
    cells: usize,
    #[arg(long, default_value_t = hpdg::dg::DEFAULT_QUAD_OFFSET)]
    quad_offset: usize,
    /// Use the downwind sweep instead of the sparse direct solver.
    #[arg(long)]
    sweep: bool,
    /// Coefficient export; format taken from --format or the extension.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum)]
    format: Option<Format>,
    /// Point samples on a uniform grid with this many points per axis.
    #[arg(long)]
    samples: Option<usize>,
    #[arg(long, requires = "samples")]
    samples_out: Option<PathBuf>,
}

#[derive(clap::Args)]
struct StudyArgs {
    /// TOML or JSON file with study settings; flags override it.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    dim: Option<usize>,
    #[arg(long)]
    refine: Option<Refinement>,
    #[arg(long)]
    field: Option<FieldCatalog>,
    #[arg(long)]
    solution: Option<SolutionCatalog>,
    #[arg(long)]
    gamma: Option<f64>,
    #[arg(long)]
    singular_point: Option<f64>,
    #[arg(long)]
    frequency: Option<f64>,
    /// `a..b`, `a,b,c` or a single degree.
    #[arg(long, value_parser = parse_list_arg)]
    degrees: Option<UsizeList>,
    /// Cells per axis, e.g. `4,8,16`.
    #[arg(long, value_parser = parse_list_arg)]
    meshes: Option<UsizeList>,
    #[arg(long)]
    quad_offset: Option<usize>,
    /// CSV table path; the JSON summary goes next to it with a .json extension.
    #[arg(long)]
    out: Option<String>,
}

#[derive(clap::Args)]
struct VerifyArgs {
    #[arg(long, default_value_t = hpdg::dg::DEFAULT_QUAD_OFFSET)]
    quad_offset: usize,
    /// Convection fields to check (repeatable).
    #[arg(long = "field")]
    fields: Vec<FieldCatalog>,
    #[arg(long, value_parser = parse_list_arg)]
    degrees: Option<UsizeList>,
    #[arg(long, value_parser = parse_list_arg)]
    dims: Option<UsizeList>,
    #[arg(long)]
    cells: Option<usize>,
    /// Write the JSON summary here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
}

fn write_output(path: &Path, contents: &str) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    }
    std::fs::write(path, contents).with_context(|| format!("writing {}", path.display()))
}

fn run_solve(args: SolveArgs) -> Result<()> {
    let (b, c) = args.field.build(args.dim)?;
    let solution = match args.solution {
        SolutionCatalog::SmoothSine => ManufacturedSolution::smooth_sine(args.dim, args.frequency),
        SolutionCatalog::PolyExact => ManufacturedSolution::poly_exact(args.dim, args.degree),
        SolutionCatalog::SingularGamma => ManufacturedSolution::singular(args.dim, args.gamma, args.singular_point)?,
    };
    let data = solution.reaction_data(&b, c, 1.0)?;
    let mesh = Arc::new(build_mesh(&BoxDomain::unit(args.dim)?, &vec![args.cells; args.dim])?);
    let system = assemble(&b, &data, &mesh, args.degree, args.quad_offset)?;
    let uh = if args.sweep {
        hpdg::downwind_sweep_solve(&system)?
    } else {
        solve(&system)?
    };
    let err = compute_error(solution.field(), &uh, &b, &data)?;

    if let Some(path) = &args.out {
        let format = args.format.unwrap_or(match path.extension().and_then(|e| e.to_str()) {
            Some("csv") => Format::Csv,
            _ => Format::Json,
        });
        let export = uh.export();
        let text = match format {
            Format::Json => serde_json::to_string_pretty(&export)?,
            Format::Csv => export.to_csv(),
        };
        write_output(path, &text)?;
    }
    if let Some(n) = args.samples {
        let mut csv = String::new();
        let axes: Vec<String> = (0..args.dim).map(|a| format!("x{a}")).collect();
        csv.push_str(&axes.join(","));
        csv.push_str(",value\n");
        for (x, v) in uh.sample_grid(n) {
            let coords: Vec<String> = x.iter().map(|t| t.to_string()).collect();
            csv.push_str(&format!("{},{v:e}\n", coords.join(",")));
        }
        match &args.samples_out {
            Some(path) => write_output(path, &csv)?,
            None => print!("{csv}"),
        }
    }
    let summary = json!({
        "dim": args.dim,
        "field": args.field.name(),
        "solution": args.solution.name(),
        "degree": args.degree,
        "cells": args.cells,
        "unknowns": system.rhs.len(),
        "l2_error": err.l2,
        "dg_error": err.dg.total,
        "dg_parts": err.dg,
    });
    if args.samples.is_none() || args.samples_out.is_some() {
        println!("{}", serde_json::to_string_pretty(&summary)?);
    }
    Ok(())
}

fn study_config(args: StudyArgs) -> Result<StudyConfig> {
    let file = match &args.config {
        Some(path) => PartialStudy::load(path)?,
        None => PartialStudy::default(),
    };
    let flags = PartialStudy {
        dim: args.dim,
        refine: args.refine,
        field: args.field,
        solution: args.solution,
        gamma: args.gamma,
        singular_point: args.singular_point,
        frequency: args.frequency,
        degrees: args.degrees.map(|l| l.0),
        meshes: args.meshes.map(|l| l.0),
        quad_offset: args.quad_offset,
        out: args.out,
    };
    file.overlay(flags).resolve()
}

fn run_study_command(args: StudyArgs) -> Result<()> {
    let config = study_config(args)?;
    let report = run_study(&config)?;
    match &config.out {
        Some(out) => {
            let csv_path = PathBuf::from(out);
            write_output(&csv_path, &report.to_csv())?;
            write_output(&csv_path.with_extension("json"), &report.to_json())?;
            let rate = match config.refine {
                Refinement::H => report.last_rate().map(|r| format!("last EOC {r:.3}")),
                Refinement::P => report.fitted_slope.map(|s| format!("fitted slope {s:.3}")),
            };
            let rate = if report.exact {
                "exact".to_string()
            } else {
                rate.unwrap_or_default()
            };
            println!("{} rows written to {} ({rate})", report.rows.len(), csv_path.display());
        }
        None => print!("{}", report.to_csv()),
    }
    Ok(())
}

fn run_verify(args: VerifyArgs) -> Result<bool> {
    let defaults = VerifyOptions::default();
    let options = VerifyOptions {
        quad_offset: args.quad_offset,
        fields: if args.fields.is_empty() { defaults.fields } else { args.fields },
        degrees: args.degrees.map_or(defaults.degrees, |l| l.0),
        dims: args.dims.map_or(defaults.dims, |l| l.0),
        cells: args.cells.unwrap_or(defaults.cells),
        random_vectors: defaults.random_vectors,
    };
    let report = run_verification_suite(&options)?;
    for check in &report.checks {
        eprintln!(
            "{} {}: {:.3e} (tol {:.1e})",
            if check.pass { "ok  " } else { "FAIL" },
            check.name,
            check.value,
            check.tolerance
        );
    }
    match &args.out {
        Some(path) => write_output(path, &report.to_json())?,
        None => println!("{}", report.to_json()),
    }
    Ok(report.pass)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Solve(args) => run_solve(args).map(|_| true),
        Command::Study(args) => run_study_command(args).map(|_| true),
        Command::Verify(args) => run_verify(args),
    };
    match result {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
