use std::fmt;
use std::io::Write as _;
use std::path::Path;

use anyhow::{Context, Result};
use serde_json::json;

use tsph_core::classical::{compare_tables, DiscrepancyReport};
use tsph_core::complex::SimplexMask;
use tsph_core::embedding::{delay_embed, EmbeddingParams};
use tsph_core::ingest::{load_csv, periodic_profile, TimeSeries};
use tsph_core::oracles::{ComparatorNoise, QramModel};
use tsph_core::persistence::{
    compute_tables, diagram_from_tables, BettiTable, Method, QuantumConfig, ScaleGrid, TableSet,
};

use crate::{Command, InputArgs, Mode, PipelineArgs, Profile};

pub const EXIT_OK: u8 = 0;
pub const EXIT_MISMATCH: u8 = 1;
pub const EXIT_USAGE: u8 = 2;
pub const EXIT_DATA: u8 = 3;

const PERIODIC_SCALES: &str = "0:2.4:0.1";
const EEG_SCALES: &str = "0:15:1";
const SHOWN_WARNINGS: usize = 10;

/// A flag combination or value the pipeline refuses.
#[derive(Debug)]
pub struct UsageError(String);

impl fmt::Display for UsageError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for UsageError {}

fn usage(msg: impl Into<String>) -> anyhow::Error {
    UsageError(msg.into()).into()
}

pub fn exit_code(e: &anyhow::Error) -> u8 {
    use tsph_core::Error as E;
    if e.downcast_ref::<UsageError>().is_some() {
        return EXIT_USAGE;
    }
    match e.downcast_ref::<E>() {
        Some(
            E::InvalidParams(_)
            | E::InvalidGrid(_)
            | E::ZeroXi
            | E::InvalidTolerance(_)
            | E::ScaleOrder { .. },
        ) => EXIT_USAGE,
        _ => EXIT_DATA,
    }
}

struct Input {
    series: TimeSeries,
    params: EmbeddingParams,
    default_scales: &'static str,
}

fn load_input(a: &InputArgs) -> Result<Input> {
    let (series, dim, tau, default_scales) = match a.profile {
        Some(Profile::Periodic) => {
            if a.input.is_some() {
                return Err(usage("--input cannot be combined with --profile periodic"));
            }
            (periodic_profile(), 2, 1, PERIODIC_SCALES)
        }
        Some(Profile::Eeg) => {
            let path = a
                .input
                .as_ref()
                .ok_or_else(|| usage("--profile eeg needs --input <file>"))?;
            (load_csv(path, a.column.as_ref())?, 2, 8, EEG_SCALES)
        }
        None => {
            let path = a
                .input
                .as_ref()
                .ok_or_else(|| usage("--input is required unless --profile periodic is given"))?;
            (load_csv(path, a.column.as_ref())?, 2, 1, PERIODIC_SCALES)
        }
    };
    let (dim, tau) = (a.dim.unwrap_or(dim), a.tau.unwrap_or(tau));
    let params = EmbeddingParams::new(dim, tau)
        .map_err(|e| usage(format!("--dim {dim} --tau {tau}: {e}")))?;
    if params.point_count(series.len()).is_none() {
        anyhow::bail!(tsph_core::Error::EmptyEmbedding {
            len: series.len(),
            dim,
            delay: tau,
        });
    }
    Ok(Input {
        series,
        params,
        default_scales,
    })
}

fn scale_grid(p: &PipelineArgs, input: &Input) -> Result<ScaleGrid> {
    let spec = p.scales.as_deref().unwrap_or(input.default_scales);
    ScaleGrid::parse(spec).map_err(|e| usage(format!("--scales {spec:?}: {e}")))
}

fn quantum_config(p: &PipelineArgs) -> Result<QuantumConfig> {
    if p.xi == 0 {
        return Err(usage("--xi must be a nonzero integer"));
    }
    if !(p.tolerance > 0.0 && p.tolerance.is_finite()) {
        return Err(usage(format!("--tolerance must be positive, got {}", p.tolerance)));
    }
    if !(p.delta > 0.0 && p.delta.is_finite()) {
        return Err(usage(format!("--delta must be positive, got {}", p.delta)));
    }
    let noise = match p.oracle_noise {
        Some(a) if !(a >= 0.0 && a.is_finite()) => {
            return Err(usage(format!("--oracle-noise must be non-negative, got {a}")))
        }
        Some(amplitude) => Some(ComparatorNoise {
            amplitude,
            seed: p.seed,
        }),
        None => None,
    };
    Ok(QuantumConfig {
        xi: p.xi,
        tolerance: p.tolerance,
        mode: p.construction,
        readout: p.readout,
        register: p.phase_register,
        noise,
        accuracy: p.delta,
    })
}

fn write_output(path: Option<&Path>, text: &str) -> Result<()> {
    match path {
        Some(p) => std::fs::write(p, text).with_context(|| format!("cannot write {}", p.display())),
        None => {
            let mut out = std::io::stdout().lock();
            out.write_all(text.as_bytes())?;
            Ok(())
        }
    }
}

fn report_warnings(set: &TableSet) {
    let all: Vec<_> = set.warnings().collect();
    for (cell, w) in all.iter().take(SHOWN_WARNINGS) {
        eprintln!(
            "warning: k={} at ({}, {}): {w}",
            cell.k, cell.eps, cell.eps_prime
        );
    }
    if all.len() > SHOWN_WARNINGS {
        eprintln!("warning: {} more cells with warnings", all.len() - SHOWN_WARNINGS);
    }
}

fn report_discrepancies(report: &DiscrepancyReport) {
    for d in &report.discrepancies {
        eprintln!(
            "mismatch: k={} eps={} eps'={} classical={} quantum-sim={}",
            d.k, d.eps, d.eps_prime, d.expected, d.actual
        );
    }
}

fn both_tables(
    input: &Input,
    grid: &ScaleGrid,
    p: &PipelineArgs,
) -> Result<(TableSet, TableSet)> {
    let config = quantum_config(p)?;
    let q = compute_tables(&input.series, input.params, grid, &p.dims, &Method::QuantumSim(config))?;
    let c = compute_tables(&input.series, input.params, grid, &p.dims, &Method::Classical)?;
    Ok((q, c))
}

fn pretty(value: &impl serde::Serialize) -> Result<String> {
    Ok(serde_json::to_string_pretty(value)? + "\n")
}

pub fn run(command: Command) -> Result<u8> {
    match command {
        Command::Embed { input, output } => {
            let input = load_input(&input)?;
            let cloud = delay_embed(&input.series, input.params)?;
            let mut text = String::new();
            for p in cloud.points() {
                let row: Vec<String> = p.iter().map(f64::to_string).collect();
                text.push_str(&row.join(","));
                text.push('\n');
            }
            write_output(output.as_deref(), &text)?;
            Ok(EXIT_OK)
        }
        Command::Diagram {
            input,
            pipeline,
            mode,
            output,
            svg,
            table,
        } => {
            let input = load_input(&input)?;
            let grid = scale_grid(&pipeline, &input)?;
            let set = match mode {
                Mode::QuantumSim => compute_tables(
                    &input.series,
                    input.params,
                    &grid,
                    &pipeline.dims,
                    &Method::QuantumSim(quantum_config(&pipeline)?),
                )?,
                Mode::Classical => compute_tables(
                    &input.series,
                    input.params,
                    &grid,
                    &pipeline.dims,
                    &Method::Classical,
                )?,
                Mode::Both => {
                    let (q, c) = both_tables(&input, &grid, &pipeline)?;
                    let report = compare_tables(&c.tables, &q.tables)?;
                    if !report.is_clean() {
                        report_discrepancies(&report);
                        return Ok(EXIT_MISMATCH);
                    }
                    q
                }
            };
            report_warnings(&set);
            let diagram = diagram_from_tables(&set.tables)?;
            // render everything before touching the file system
            let diagram_json = pretty(&diagram)?;
            let svg_text = svg.as_ref().map(|_| diagram.to_svg(&grid));
            let table_json = table.as_ref().map(|_| pretty(&set.tables)).transpose()?;
            if let (Some(path), Some(text)) = (svg.as_deref(), svg_text) {
                write_output(Some(path), &text)?;
            }
            if let (Some(path), Some(text)) = (table.as_deref(), table_json) {
                write_output(Some(path), &text)?;
            }
            write_output(output.as_deref(), &diagram_json)?;
            Ok(EXIT_OK)
        }
        Command::Verify {
            input,
            pipeline,
            mode,
            report,
            inject_fault,
        } => {
            if mode != Mode::Both {
                return Err(usage("verify compares both pipelines; use --mode both"));
            }
            let fault = inject_fault.as_deref().map(parse_fault).transpose()?;
            let input = load_input(&input)?;
            let grid = scale_grid(&pipeline, &input)?;
            let (q, c) = both_tables(&input, &grid, &pipeline)?;
            report_warnings(&q);
            let mut simulated = q.tables;
            if let Some((k, i, j)) = fault {
                simulated = inject(simulated, &grid, k, i, j)?;
            }
            let result = compare_tables(&c.tables, &simulated)?;
            if let Some(path) = report.as_deref() {
                write_output(Some(path), &pretty(&result)?)?;
            }
            if result.is_clean() {
                println!(
                    "ok: {} cells agree for k = {:?}",
                    result.cells_compared, pipeline.dims
                );
                Ok(EXIT_OK)
            } else {
                report_discrepancies(&result);
                Ok(EXIT_MISMATCH)
            }
        }
        Command::Resources {
            input,
            pipeline,
            query,
            epsilon,
            output,
        } => {
            let input = load_input(&input)?;
            let config = quantum_config(&pipeline)?;
            let value = match query {
                Some(vertices) => {
                    let eps = epsilon.ok_or_else(|| usage("--query needs --epsilon"))?;
                    let simplex = SimplexMask::from_vertices(&vertices)
                        .map_err(|e| usage(format!("--query: {e}")))?;
                    let mut q = QramModel::new(&input.series).with_accuracy(config.accuracy)?;
                    if let Some(noise) = config.noise {
                        q = q.with_noise(noise);
                    }
                    let member = q.membership(simplex, eps, input.params)?;
                    json!({
                        "query": { "vertices": vertices, "epsilon": eps, "member": member },
                        "resources": q.call_report(),
                    })
                }
                None => {
                    let grid = scale_grid(&pipeline, &input)?;
                    let set = compute_tables(
                        &input.series,
                        input.params,
                        &grid,
                        &pipeline.dims,
                        &Method::QuantumSim(config),
                    )?;
                    json!({ "resources": set.resources })
                }
            };
            write_output(output.as_deref(), &pretty(&value)?)?;
            Ok(EXIT_OK)
        }
    }
}

fn parse_fault(s: &str) -> Result<(usize, usize, usize)> {
    let parts: Vec<usize> = s
        .split(',')
        .map(|p| p.trim().parse::<usize>())
        .collect::<std::result::Result<_, _>>()
        .map_err(|_| usage(format!("--inject-fault expects K,I,J, got {s:?}")))?;
    match parts[..] {
        [k, i, j] if i <= j => Ok((k, i, j)),
        _ => Err(usage(format!("--inject-fault expects K,I,J with I <= J, got {s:?}"))),
    }
}

fn inject(
    tables: Vec<BettiTable>,
    grid: &ScaleGrid,
    k: usize,
    i: usize,
    j: usize,
) -> Result<Vec<BettiTable>> {
    if j >= grid.len() || !tables.iter().any(|t| t.k() == k) {
        return Err(usage(format!("--inject-fault {k},{i},{j} is outside the computed tables")));
    }
    tables
        .into_iter()
        .map(|t| {
            if t.k() != k {
                return Ok(t);
            }
            let bumped = BettiTable::from_fn(k, grid, |a, b| {
                let v = t.get(a, b).unwrap_or(0);
                Ok(if (a, b) == (i, j) { v + 1 } else { v })
            })?;
            Ok(bumped)
        })
        .collect()
}
