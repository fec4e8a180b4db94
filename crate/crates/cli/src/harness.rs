//! Benchmark harness: time the exact and reduced-basis design constructions
//! over a grid of covariance structures and study sizes, and fit log-log
//! scaling slopes.
//!
//! Timing wraps the design computation only; covariance generation and file
//! IO sit outside the clock. Repetitions run strictly sequentially.

use std::collections::BTreeMap;
use std::io::Write;
use std::path::Path;
use std::time::Instant;

use anyhow::{Context, Result};
use clap::ValueEnum;
use serde_json::json;

use btsched_core::covgen::{
    correlation_normalize, default_invwishart_dof, erdos_renyi, inverse_wishart_covariance,
    laplacian_covariance, toeplitz_covariance,
};
use btsched_core::rbd::RbdConfig;
use btsched_core::scheduler::{approx_schedule_with_info, kl_divergence};
use btsched_core::{exact_schedule_with_cap, PriorSpec};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Structure {
    Laplacian,
    Toeplitz,
    Invwishart,
}

impl Structure {
    pub fn label(self) -> &'static str {
        match self {
            Structure::Laplacian => "laplacian",
            Structure::Toeplitz => "toeplitz",
            Structure::Invwishart => "invwishart",
        }
    }
}

#[derive(Debug, Clone)]
pub struct BenchmarkConfig {
    pub structures: Vec<Structure>,
    pub n_list: Vec<usize>,
    pub p_list: Vec<f64>,
    pub rho: f64,
    pub reps: usize,
    pub seed: u64,
    pub skip_exact_above: usize,
    pub rbd_tolerance: f64,
    pub verbose: bool,
}

impl Default for BenchmarkConfig {
    fn default() -> Self {
        Self {
            structures: vec![
                Structure::Laplacian,
                Structure::Toeplitz,
                Structure::Invwishart,
            ],
            n_list: vec![8, 16, 32, 64],
            p_list: vec![0.5],
            rho: btsched_core::covgen::DEFAULT_TOEPLITZ_RHO,
            reps: 20,
            seed: 0,
            skip_exact_above: 150,
            rbd_tolerance: btsched_core::rbd::DEFAULT_TOLERANCE,
            verbose: false,
        }
    }
}

#[derive(Debug, Clone)]
pub struct BenchRow {
    pub structure: &'static str,
    pub n: usize,
    pub param: f64,
    pub method: &'static str,
    pub seed: u64,
    pub rep: usize,
    pub seconds: Option<f64>,
    pub kl_vs_exact: Option<f64>,
    pub rbd_dim: Option<usize>,
    pub status: String,
}

#[derive(Debug, Clone)]
pub struct CellSummary {
    pub structure: &'static str,
    pub n: usize,
    pub param: f64,
    pub method: &'static str,
    pub median_seconds: f64,
    pub max_kl: Option<f64>,
}

#[derive(Debug, Clone)]
pub struct BenchmarkReport {
    pub rows: Vec<BenchRow>,
    pub cells: Vec<CellSummary>,
    pub slope_exact: Option<f64>,
    pub slope_rbd: Option<f64>,
}

impl BenchmarkReport {
    /// Median time over all reps and structures for one (method, n) point.
    pub fn pooled_median(&self, method: &str, n: usize) -> Option<f64> {
        let times: Vec<f64> = self
            .rows
            .iter()
            .filter(|row| row.method == method && row.n == n)
            .filter_map(|row| row.seconds)
            .collect();
        median(&times)
    }

    pub fn max_kl(&self) -> Option<f64> {
        self.rows
            .iter()
            .filter_map(|row| row.kl_vs_exact)
            .fold(None, |acc, kl| Some(acc.map_or(kl, |a: f64| a.max(kl))))
    }

    pub fn write_csv(&self, path: &Path) -> Result<()> {
        let file = std::fs::File::create(path)
            .with_context(|| format!("creating {}", path.display()))?;
        let mut w = std::io::BufWriter::new(file);
        writeln!(
            w,
            "structure,n,param,method,seed,rep,wall_time_seconds,kl_vs_exact,rbd_dim,status"
        )?;
        for row in &self.rows {
            writeln!(
                w,
                "{},{},{},{},{},{},{},{},{},{}",
                row.structure,
                row.n,
                row.param,
                row.method,
                row.seed,
                row.rep,
                row.seconds.map_or(String::new(), |s| format!("{s}")),
                row.kl_vs_exact.map_or(String::new(), |k| format!("{k}")),
                row.rbd_dim.map_or(String::new(), |d| d.to_string()),
                row.status
            )?;
        }
        Ok(())
    }

    pub fn summary_json(&self, config: &BenchmarkConfig) -> serde_json::Value {
        json!({
            "config": {
                "structures": config.structures.iter().map(|s| s.label()).collect::<Vec<_>>(),
                "n_list": config.n_list,
                "p_list": config.p_list,
                "rho": config.rho,
                "reps": config.reps,
                "seed": config.seed,
                "skip_exact_above": config.skip_exact_above,
                "rbd_tolerance": config.rbd_tolerance,
            },
            "slopes": {
                "exact": self.slope_exact,
                "rbd": self.slope_rbd,
            },
            "max_kl": self.max_kl(),
            "cells": self.cells.iter().map(|c| json!({
                "structure": c.structure,
                "n": c.n,
                "param": c.param,
                "method": c.method,
                "median_seconds": c.median_seconds,
                "max_kl": c.max_kl,
            })).collect::<Vec<_>>(),
        })
    }
}

/// Slope of the least-squares line through `(ln x, ln y)`.
pub fn fit_loglog_slope(points: &[(f64, f64)]) -> Option<f64> {
    if points.len() < 2 || points.iter().any(|&(x, y)| x <= 0.0 || y <= 0.0) {
        return None;
    }
    let logs: Vec<(f64, f64)> = points.iter().map(|&(x, y)| (x.ln(), y.ln())).collect();
    let n = logs.len() as f64;
    let mean_x = logs.iter().map(|p| p.0).sum::<f64>() / n;
    let mean_y = logs.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = logs.iter().map(|p| (p.0 - mean_x).powi(2)).sum();
    if sxx == 0.0 {
        return None;
    }
    let sxy: f64 = logs
        .iter()
        .map(|p| (p.0 - mean_x) * (p.1 - mean_y))
        .sum();
    Some(sxy / sxx)
}

fn median(values: &[f64]) -> Option<f64> {
    if values.is_empty() {
        return None;
    }
    let mut sorted = values.to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let mid = sorted.len() / 2;
    Some(if sorted.len().is_multiple_of(2) {
        0.5 * (sorted[mid - 1] + sorted[mid])
    } else {
        sorted[mid]
    })
}

/// Deterministic per-rep seed from the cell coordinates (SplitMix64 over the
/// mixed-in fields), so identical configurations reproduce identical draws.
fn rep_seed(base: u64, structure: Structure, n: usize, param: f64, rep: usize) -> u64 {
    let mut state = base;
    for word in [
        structure as u64 + 1,
        n as u64,
        param.to_bits(),
        rep as u64 + 1,
    ] {
        state = splitmix64(state ^ splitmix64(word));
    }
    state
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e3779b97f4a7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58476d1ce4e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d049bb133111eb);
    z ^ (z >> 31)
}

fn generate_prior(structure: Structure, n: usize, param: f64, seed: u64) -> Result<PriorSpec> {
    let covariance = match structure {
        Structure::Laplacian => {
            let graph = erdos_renyi(n, param, seed)?;
            laplacian_covariance(&graph)
        }
        Structure::Toeplitz => toeplitz_covariance(n, param)?,
        Structure::Invwishart => {
            let draw = inverse_wishart_covariance(n, param, seed)?;
            correlation_normalize(&draw)?
        }
    };
    Ok(PriorSpec::from_covariance(covariance)?)
}

pub fn run_benchmark(config: &BenchmarkConfig) -> BenchmarkReport {
    let mut rows = Vec::new();
    let mut cells = Vec::new();

    for &structure in &config.structures {
        for &n in &config.n_list {
            let params: Vec<f64> = match structure {
                Structure::Laplacian => config.p_list.clone(),
                Structure::Toeplitz => vec![config.rho],
                Structure::Invwishart => vec![default_invwishart_dof(n)],
            };
            for &param in &params {
                let mut exact_times = Vec::new();
                let mut rbd_times = Vec::new();
                let mut kls = Vec::new();

                for rep in 0..config.reps {
                    let seed = rep_seed(config.seed, structure, n, param, rep);
                    let spec = match generate_prior(structure, n, param, seed) {
                        Ok(spec) => spec,
                        Err(err) => {
                            rows.push(BenchRow {
                                structure: structure.label(),
                                n,
                                param,
                                method: "generate",
                                seed,
                                rep,
                                seconds: None,
                                kl_vs_exact: None,
                                rbd_dim: None,
                                status: format!("error: {err}"),
                            });
                            continue;
                        }
                    };

                    let exact = if n <= config.skip_exact_above {
                        let start = Instant::now();
                        let result = exact_schedule_with_cap(&spec, n);
                        let elapsed = start.elapsed().as_secs_f64();
                        match result {
                            Ok(schedule) => {
                                exact_times.push(elapsed);
                                rows.push(BenchRow {
                                    structure: structure.label(),
                                    n,
                                    param,
                                    method: "exact",
                                    seed,
                                    rep,
                                    seconds: Some(elapsed),
                                    kl_vs_exact: None,
                                    rbd_dim: None,
                                    status: "ok".into(),
                                });
                                Some(schedule)
                            }
                            Err(err) => {
                                rows.push(BenchRow {
                                    structure: structure.label(),
                                    n,
                                    param,
                                    method: "exact",
                                    seed,
                                    rep,
                                    seconds: None,
                                    kl_vs_exact: None,
                                    rbd_dim: None,
                                    status: format!("error: {err}"),
                                });
                                None
                            }
                        }
                    } else {
                        rows.push(BenchRow {
                            structure: structure.label(),
                            n,
                            param,
                            method: "exact",
                            seed,
                            rep,
                            seconds: None,
                            kl_vs_exact: None,
                            rbd_dim: None,
                            status: "skipped".into(),
                        });
                        None
                    };

                    let cfg = RbdConfig {
                        tolerance: config.rbd_tolerance,
                        ..Default::default()
                    };
                    let start = Instant::now();
                    let result = approx_schedule_with_info(&spec, &cfg);
                    let elapsed = start.elapsed().as_secs_f64();
                    match result {
                        Ok(design) => {
                            rbd_times.push(elapsed);
                            let kl = exact.as_ref().and_then(|exact_schedule| {
                                kl_divergence(exact_schedule, &design.schedule).ok()
                            });
                            if let Some(kl) = kl {
                                kls.push(kl);
                            }
                            rows.push(BenchRow {
                                structure: structure.label(),
                                n,
                                param,
                                method: "rbd",
                                seed,
                                rep,
                                seconds: Some(elapsed),
                                kl_vs_exact: kl,
                                rbd_dim: Some(design.rbd_dim),
                                status: "ok".into(),
                            });
                        }
                        Err(err) => {
                            rows.push(BenchRow {
                                structure: structure.label(),
                                n,
                                param,
                                method: "rbd",
                                seed,
                                rep,
                                seconds: None,
                                kl_vs_exact: None,
                                rbd_dim: None,
                                status: format!("error: {err}"),
                            });
                        }
                    }
                }

                if let Some(med) = median(&exact_times) {
                    cells.push(CellSummary {
                        structure: structure.label(),
                        n,
                        param,
                        method: "exact",
                        median_seconds: med,
                        max_kl: None,
                    });
                }
                if let Some(med) = median(&rbd_times) {
                    cells.push(CellSummary {
                        structure: structure.label(),
                        n,
                        param,
                        method: "rbd",
                        median_seconds: med,
                        max_kl: kls.iter().cloned().fold(None, |acc: Option<f64>, kl| {
                            Some(acc.map_or(kl, |a| a.max(kl)))
                        }),
                    });
                }
                if config.verbose {
                    eprintln!(
                        "benchmark: {} n={} param={} done",
                        structure.label(),
                        n,
                        param
                    );
                }
            }
        }
    }

    let mut report = BenchmarkReport {
        rows,
        cells,
        slope_exact: None,
        slope_rbd: None,
    };
    report.slope_exact = slope_for(&report, "exact", &config.n_list);
    report.slope_rbd = slope_for(&report, "rbd", &config.n_list);
    report
}

fn slope_for(report: &BenchmarkReport, method: &str, n_list: &[usize]) -> Option<f64> {
    let mut points = Vec::new();
    let mut seen = BTreeMap::new();
    for &n in n_list {
        seen.entry(n).or_insert(());
    }
    for (&n, ()) in &seen {
        if let Some(med) = report.pooled_median(method, n) {
            points.push((n as f64, med));
        }
    }
    fit_loglog_slope(&points)
}
