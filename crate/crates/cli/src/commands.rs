//! Subcommand implementations. Each prints a machine-readable JSON summary
//! to stdout; failures surface as errors that `main` turns into a JSON error
//! line on stderr and a nonzero exit code.

use std::path::Path;
use std::time::Instant;

use anyhow::{bail, Context, Result};
use nalgebra::DVector;
use serde_json::json;

use btsched_core::bt::{map_fit, FitOptions};
use btsched_core::covgen::{
    correlation_normalize, default_invwishart_dof, erdos_renyi, expm_covariance,
    inverse_wishart_covariance, laplacian_covariance, toeplitz_covariance, AdjacencyMatrix,
};
use btsched_core::rbd::{BasisInit, RbdConfig};
use btsched_core::scheduler::{approx_schedule_with_info, kl_divergence, sample_pairs};
use btsched_core::{
    closed_form_schedule, exact_schedule_with_cap, validate_prior, PriorSpec,
    SchedulingDistribution, DEFAULT_DENSE_CAP,
};

use crate::args::{
    BenchmarkArgs, BtFitArgs, Command, CompareArgs, CovStructure, DesignArgs, DesignMethod,
    GenCovArgs, PipelineArgs, PriorArgs, SampleArgs, ScheduleFormat,
};
use crate::harness::{run_benchmark, BenchmarkConfig};
use crate::io;

pub fn run(command: Command) -> Result<()> {
    match command {
        Command::GenCov(args) => gen_cov(&args),
        Command::Design(args) => design(&args),
        Command::Compare(args) => compare(&args),
        Command::Benchmark(args) => benchmark(&args),
        Command::Sample(args) => sample(&args),
        Command::BtFit(args) => bt_fit(&args),
        Command::Pipeline(args) => pipeline(&args),
    }
}

fn load_adjacency(path: &Path) -> Result<AdjacencyMatrix> {
    Ok(AdjacencyMatrix::new(io::read_matrix(path)?)?)
}

fn gen_cov(args: &GenCovArgs) -> Result<()> {
    let graph = |seed: u64| -> Result<AdjacencyMatrix> {
        match (&args.adjacency, args.p) {
            (Some(path), None) => load_adjacency(path),
            (None, Some(p)) => Ok(erdos_renyi(args.n, p, seed)?),
            (None, None) => bail!(
                "structure {:?} needs --p (simulated graph) or --adjacency <file>",
                args.structure
            ),
            (Some(_), Some(_)) => unreachable!("clap rejects --p with --adjacency"),
        }
    };

    let covariance = match args.structure {
        CovStructure::Laplacian => {
            let adjacency = graph(args.seed)?;
            check_size(&adjacency, args.n)?;
            laplacian_covariance(&adjacency)
        }
        CovStructure::Expm => {
            let adjacency = graph(args.seed)?;
            check_size(&adjacency, args.n)?;
            // already normalized to unit diagonal by construction
            expm_covariance(&adjacency)
        }
        CovStructure::Toeplitz => toeplitz_covariance(args.n, args.rho)?,
        CovStructure::Invwishart => {
            let dof = args.dof.unwrap_or_else(|| default_invwishart_dof(args.n));
            inverse_wishart_covariance(args.n, dof, args.seed)?
        }
    };
    let covariance = if args.normalize && args.structure != CovStructure::Expm {
        correlation_normalize(&covariance)?
    } else {
        covariance
    };

    io::write_matrix_csv(&args.out, &covariance)?;

    let report = validate_prior(&DVector::zeros(covariance.nrows()), &covariance);
    println!(
        "{}",
        json!({
            "structure": format!("{:?}", args.structure).to_lowercase(),
            "n": covariance.nrows(),
            "out": args.out.display().to_string(),
            "symmetry_violation": report.symmetry_violation,
            "min_eigenvalue": report.min_eigenvalue,
            "passed": report.passed(),
        })
    );
    Ok(())
}

fn check_size(adjacency: &AdjacencyMatrix, n: usize) -> Result<()> {
    if adjacency.n_nodes() != n {
        bail!(
            "adjacency has {} nodes but --n is {n}",
            adjacency.n_nodes()
        );
    }
    Ok(())
}

struct DesignOutcome {
    schedule: SchedulingDistribution,
    seconds: f64,
    rbd_dim: Option<usize>,
    residual: Option<f64>,
    tol: Option<f64>,
    warning: bool,
}

fn run_design(args: &DesignArgs, spec: &PriorSpec) -> Result<DesignOutcome> {
    match args.method {
        DesignMethod::Exact => {
            let cap = if args.force_dense {
                spec.n_objects()
            } else {
                DEFAULT_DENSE_CAP
            };
            let start = Instant::now();
            let schedule = exact_schedule_with_cap(spec, cap)?;
            Ok(DesignOutcome {
                schedule,
                seconds: start.elapsed().as_secs_f64(),
                rbd_dim: None,
                residual: None,
                tol: None,
                warning: false,
            })
        }
        DesignMethod::Closed => {
            let start = Instant::now();
            let schedule = closed_form_schedule(spec)?;
            Ok(DesignOutcome {
                schedule,
                seconds: start.elapsed().as_secs_f64(),
                rbd_dim: None,
                residual: None,
                tol: None,
                warning: false,
            })
        }
        DesignMethod::Rbd => {
            let cfg = RbdConfig {
                tolerance: args.tol,
                d_max: args.dmax,
                init: args
                    .seed
                    .map_or(BasisInit::FirstColumn, BasisInit::SeededRandom),
            };
            let start = Instant::now();
            let design = approx_schedule_with_info(spec, &cfg)?;
            Ok(DesignOutcome {
                schedule: design.schedule,
                seconds: start.elapsed().as_secs_f64(),
                rbd_dim: Some(design.rbd_dim),
                residual: Some(design.final_residual),
                tol: Some(args.tol),
                warning: design.tolerance_warning,
            })
        }
    }
}

fn method_label(method: DesignMethod) -> &'static str {
    match method {
        DesignMethod::Exact => "exact",
        DesignMethod::Rbd => "rbd",
        DesignMethod::Closed => "closed",
    }
}

fn write_schedule(
    path: &Path,
    format: ScheduleFormat,
    schedule: &SchedulingDistribution,
    method: &str,
    meta: io::ScheduleMeta,
) -> Result<()> {
    let file = io::ScheduleFile::from_distribution(schedule, method, meta);
    match format {
        ScheduleFormat::Json => io::write_schedule_json(path, &file),
        ScheduleFormat::Csv => io::write_schedule_csv(path, &file),
    }
}

fn design(args: &DesignArgs) -> Result<()> {
    let covariance = io::read_matrix(&args.cov)?;
    let spec = PriorSpec::from_covariance(covariance)
        .with_context(|| format!("covariance in {}", args.cov.display()))?;

    let outcome = run_design(args, &spec)?;
    if outcome.warning {
        eprintln!(
            "warning: tolerance {:e} lies below {:e}; greedy residuals at that level are \
             roundoff noise and the run stops at the dimension cap instead",
            args.tol,
            btsched_core::rbd::TOLERANCE_WARNING_FLOOR
        );
    }

    let meta = io::ScheduleMeta {
        tol: outcome.tol,
        d: outcome.rbd_dim,
        residual: outcome.residual,
        seconds: outcome.seconds,
    };
    write_schedule(
        &args.out,
        args.format,
        &outcome.schedule,
        method_label(args.method),
        meta,
    )?;

    println!(
        "{}",
        json!({
            "method": method_label(args.method),
            "n": outcome.schedule.n_objects(),
            "pairs": outcome.schedule.n_pairs(),
            "d": outcome.rbd_dim,
            "residual": outcome.residual,
            "seconds": outcome.seconds,
            "out": args.out.display().to_string(),
        })
    );
    Ok(())
}

/// JSON value for a possibly-infinite divergence.
fn divergence_value(kl: f64) -> serde_json::Value {
    if kl.is_finite() {
        json!(kl)
    } else {
        json!("infinity")
    }
}

fn compare(args: &CompareArgs) -> Result<()> {
    let a = io::read_schedule(&args.a)?;
    let b = io::read_schedule(&args.b)?;
    let forward = kl_divergence(&a, &b)?;
    let reverse = kl_divergence(&b, &a)?;
    let gap = a.max_abs_diff(&b)?;
    println!(
        "{}",
        json!({
            "kl_forward": divergence_value(forward),
            "kl_reverse": divergence_value(reverse),
            "max_abs_diff": gap,
        })
    );
    Ok(())
}

fn benchmark(args: &BenchmarkArgs) -> Result<()> {
    let config = BenchmarkConfig {
        structures: args.structures.clone(),
        n_list: args.n_list.clone(),
        p_list: args.p_list.clone(),
        rho: args.rho,
        reps: args.reps,
        seed: args.seed,
        skip_exact_above: args.skip_exact_above,
        rbd_tolerance: args.tol,
        verbose: true,
    };
    let report = run_benchmark(&config);

    let csv_path = args.out.with_extension("csv");
    let json_path = args.out.with_extension("json");
    report.write_csv(&csv_path)?;
    let summary = report.summary_json(&config);
    std::fs::write(&json_path, serde_json::to_string_pretty(&summary)?)?;

    println!(
        "{}",
        json!({
            "rows": report.rows.len(),
            "csv": csv_path.display().to_string(),
            "summary": json_path.display().to_string(),
            "slope_exact": report.slope_exact,
            "slope_rbd": report.slope_rbd,
            "max_kl": report.max_kl(),
        })
    );
    Ok(())
}

fn sample(args: &SampleArgs) -> Result<()> {
    use std::io::Write as _;
    let schedule = io::read_schedule(&args.schedule)?;
    let draws = sample_pairs(&schedule, args.n, args.seed);
    let mut writer = std::io::BufWriter::new(std::fs::File::create(&args.out)?);
    writeln!(writer, "index,i,j")?;
    for (idx, pair) in draws.iter().enumerate() {
        writeln!(writer, "{},{},{}", idx + 1, pair.i, pair.j)?;
    }
    println!(
        "{}",
        json!({
            "n_draws": draws.len(),
            "seed": args.seed,
            "out": args.out.display().to_string(),
        })
    );
    Ok(())
}

fn build_prior(prior: &PriorArgs, n_objects: usize) -> Result<PriorSpec> {
    let mean = match &prior.prior_mean {
        Some(path) => io::read_vector(path)?,
        None => DVector::zeros(n_objects),
    };
    match (&prior.prior_cov, prior.prior_sd) {
        (Some(path), None) => {
            let covariance = io::read_matrix(path)?;
            Ok(PriorSpec::new(mean, covariance)?)
        }
        (None, Some(sd)) => {
            if !(sd.is_finite() && sd > 0.0) {
                bail!("--prior-sd must be positive, got {sd}");
            }
            let covariance =
                nalgebra::DMatrix::identity(n_objects, n_objects) * (sd * sd);
            Ok(PriorSpec::new(mean, covariance)?)
        }
        (None, None) => bail!("provide either --prior-cov <file> or --prior-sd <sd>"),
        (Some(_), Some(_)) => unreachable!("clap rejects --prior-cov with --prior-sd"),
    }
}

fn bt_fit(args: &BtFitArgs) -> Result<()> {
    let data = io::read_comparisons(&args.comparisons, args.n_objects)?;
    let prior = build_prior(&args.prior, data.n_objects())?;
    let options = FitOptions {
        gradient_tolerance: args.tol_fit,
        max_iterations: args.max_iter,
    };
    let start = Instant::now();
    let fit = map_fit(&data, &prior, &options)?;
    let seconds = start.elapsed().as_secs_f64();

    let n = fit.map_estimate().len();
    let covariance: Vec<Vec<f64>> = (0..n)
        .map(|i| (0..n).map(|j| fit.covariance()[(i, j)]).collect())
        .collect();
    let output = json!({
        "n": n,
        "converged": fit.converged(),
        "iterations": fit.iterations(),
        "map": fit.map_estimate().iter().cloned().collect::<Vec<f64>>(),
        "covariance": covariance,
    });
    std::fs::write(&args.out, serde_json::to_string_pretty(&output)?)?;

    println!(
        "{}",
        json!({
            "n": n,
            "comparisons": data.total_comparisons(),
            "converged": fit.converged(),
            "iterations": fit.iterations(),
            "seconds": seconds,
            "out": args.out.display().to_string(),
        })
    );
    Ok(())
}

fn pipeline(args: &PipelineArgs) -> Result<()> {
    let total_start = Instant::now();
    let data = io::read_comparisons(&args.comparisons, args.n_objects)?;
    let prior = build_prior(&args.prior, data.n_objects())?;
    let options = FitOptions {
        gradient_tolerance: args.tol_fit,
        max_iterations: args.max_iter,
    };

    let fit_start = Instant::now();
    let fit = map_fit(&data, &prior, &options)?;
    let fit_seconds = fit_start.elapsed().as_secs_f64();

    // phase 2: zero-mean prior with the Laplace posterior covariance
    let phase2_spec = PriorSpec::new(
        DVector::zeros(prior.n_objects()),
        fit.covariance().clone(),
    )?;
    let cfg = RbdConfig {
        tolerance: args.tol,
        d_max: args.dmax,
        init: args
            .seed
            .map_or(BasisInit::FirstColumn, BasisInit::SeededRandom),
    };
    let design_start = Instant::now();
    let design = approx_schedule_with_info(&phase2_spec, &cfg)?;
    let design_seconds = design_start.elapsed().as_secs_f64();

    let meta = io::ScheduleMeta {
        tol: Some(args.tol),
        d: Some(design.rbd_dim),
        residual: Some(design.final_residual),
        seconds: design_seconds,
    };
    write_schedule(
        &args.out_schedule,
        args.format,
        &design.schedule,
        "rbd",
        meta,
    )?;

    println!(
        "{}",
        json!({
            "n": prior.n_objects(),
            "comparisons": data.total_comparisons(),
            "fit_iterations": fit.iterations(),
            "fit_seconds": fit_seconds,
            "design_seconds": design_seconds,
            "total_seconds": total_start.elapsed().as_secs_f64(),
            "d": design.rbd_dim,
            "out_schedule": args.out_schedule.display().to_string(),
        })
    );
    Ok(())
}
