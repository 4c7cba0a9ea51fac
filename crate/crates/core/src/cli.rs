//! The `dyadic` command-line interface.
//!
//! Exit codes: 0 success, 1 input or validation error, 2 the MLE does not
//! exist, 3 the parameters are not identifiable, 4 a check failed.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};

use crate::equivariance::{
    builtin_probe, check_additivity, check_equivariance, verify_reduction, ParametrizationProbe, ProbeKind,
    BUILTIN_NAMES, DEFAULT_ADDITIVITY_TOLERANCE,
};
use crate::error::Error;
use crate::estimation::{self, FitOptions};
use crate::io::{parse_blocks, parse_edge_list, parse_tabulated_probe, write_edge_list, ParamsFile};
use crate::models::{Family, ModelSpec};
use crate::oracle;
use crate::sampling::{self, SampleConfig};

pub const EXIT_OK: i32 = 0;
pub const EXIT_INPUT: i32 = 1;
pub const EXIT_NONEXISTENT: i32 = 2;
pub const EXIT_UNIDENTIFIABLE: i32 = 3;
pub const EXIT_CHECK_FAILED: i32 = 4;

/// Blocks used for block probes in `verify`.
const PROBE_BLOCKS: usize = 3;

#[derive(Debug, Parser)]
#[command(name = "dyadic", version, about = "Dyadic-independent ERGMs: fit, sample, evaluate and verify")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Fit a model to an edge list by maximum likelihood.
    Fit {
        #[arg(long)]
        model: Family,
        #[arg(long)]
        graph: PathBuf,
        #[arg(long)]
        blocks: Option<PathBuf>,
        #[arg(long, default_value_t = 1e-10)]
        tol: f64,
        #[arg(long, default_value_t = 5000)]
        max_iter: usize,
        #[arg(long)]
        out: PathBuf,
    },
    /// Draw independent graphs from a parameter file.
    Sample {
        #[arg(long)]
        params: PathBuf,
        #[arg(long)]
        n: Option<usize>,
        #[arg(long)]
        count: usize,
        #[arg(long)]
        seed: u64,
        #[arg(long)]
        out_dir: PathBuf,
    },
    /// Print the log-likelihood of a graph.
    Loglik {
        #[arg(long)]
        params: PathBuf,
        #[arg(long)]
        graph: PathBuf,
    },
    /// Run the equivariance, additivity or reduction check on a probe.
    Verify {
        /// Built-in probe name or path to a tabulated probe file.
        #[arg(long)]
        probe: String,
        #[arg(long, value_enum)]
        check: VerifyCheck,
        #[arg(long, default_value_t = 4)]
        n: usize,
        #[arg(long, default_value_t = 8)]
        grid: usize,
        #[arg(long)]
        tol: Option<f64>,
    },
    /// Compare closed forms with brute-force enumeration.
    Oracle {
        #[arg(long)]
        params: PathBuf,
        #[arg(long)]
        n: Option<usize>,
        #[arg(long, value_enum)]
        check: OracleCheck,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum VerifyCheck {
    Equivariance,
    Additivity,
    Reduction,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum OracleCheck {
    Normalization,
    Partition,
    Moments,
}

/// Outcome of a command that ran to completion.
struct Outcome {
    code: i32,
}

type Io<'a> = (&'a mut dyn Write, &'a mut dyn Write);

pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::NonexistentMle { .. } => EXIT_NONEXISTENT,
        Error::UnidentifiableParameters { .. } => EXIT_UNIDENTIFIABLE,
        _ => EXIT_INPUT,
    }
}

/// Parses `args` (program name first) and runs the command.
pub fn run<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_INPUT } else { EXIT_OK };
            let text = e.render().to_string();
            let _ = if e.use_stderr() { stderr.write_all(text.as_bytes()) } else { stdout.write_all(text.as_bytes()) };
            return code;
        }
    };
    match dispatch(cli.command, (stdout, &mut *stderr)) {
        Ok(o) => o.code,
        Err(e) => {
            report_error(&e, stderr);
            exit_code(&e)
        }
    }
}

fn report_error(e: &Error, stderr: &mut dyn Write) {
    let _ = writeln!(stderr, "error: {e}");
    match e {
        Error::NonexistentMle { violations, diverging, .. } => {
            for v in violations {
                let _ = writeln!(stderr, "  boundary: {v}");
            }
            if !diverging.is_empty() {
                let _ = writeln!(stderr, "  diverging parameters: {diverging:?}");
            }
        }
        Error::UnidentifiableParameters { names, direction } => {
            let _ = writeln!(stderr, "  null direction:");
            for (n, d) in names.iter().zip(direction) {
                let _ = writeln!(stderr, "    {n}: {d}");
            }
        }
        _ => {}
    }
}

fn read(path: &Path) -> Result<String, Error> {
    fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))
}

fn write_file(path: &Path, text: &str) -> Result<(), Error> {
    fs::write(path, text).map_err(|e| Error::Io(format!("{}: {e}", path.display())))
}

fn load_params(path: &Path) -> Result<ParamsFile, Error> {
    ParamsFile::from_json(&read(path)?)
}

fn dispatch(cmd: Command, io: Io<'_>) -> Result<Outcome, Error> {
    match cmd {
        Command::Fit {
            model,
            graph,
            blocks,
            tol,
            max_iter,
            out,
        } => cmd_fit(model, &graph, blocks.as_deref(), tol, max_iter, &out, io),
        Command::Sample {
            params,
            n,
            count,
            seed,
            out_dir,
        } => cmd_sample(&params, n, count, seed, &out_dir, io),
        Command::Loglik { params, graph } => cmd_loglik(&params, &graph, io),
        Command::Verify {
            probe,
            check,
            n,
            grid,
            tol,
        } => cmd_verify(&probe, check, n, grid, tol, io),
        Command::Oracle { params, n, check } => cmd_oracle(&params, n, check, io),
    }
}

fn cmd_fit(
    model: Family,
    graph: &Path,
    blocks: Option<&Path>,
    tol: f64,
    max_iter: usize,
    out: &Path,
    (stdout, stderr): Io<'_>,
) -> Result<Outcome, Error> {
    let edges = parse_edge_list(&read(graph)?)?;
    let blocks = blocks.map(|p| parse_blocks(&read(p)?, &edges)).transpose()?;
    let opts = FitOptions {
        tol,
        max_iter,
        ..FitOptions::default()
    };
    let fit = estimation::fit(model, &edges.graph, blocks.as_ref(), &opts)?;
    write_file(out, &ParamsFile::from_model(&fit.params, edges.labels.clone()).to_json())?;
    let _ = writeln!(stdout, "model: {model}");
    let _ = writeln!(stdout, "nodes: {}", edges.graph.n());
    let _ = writeln!(stdout, "iterations: {}", fit.iterations);
    let _ = writeln!(stdout, "converged: {}", fit.converged);
    let _ = writeln!(stdout, "max moment gap: {:e}", fit.max_moment_gap);
    let _ = writeln!(stdout, "log-likelihood: {:.15}", fit.params.log_likelihood(&edges.graph)?);
    for d in &fit.diagnostics {
        let _ = writeln!(stdout, "note: {d}");
    }
    if fit.converged {
        Ok(Outcome { code: EXIT_OK })
    } else {
        let _ = writeln!(stderr, "error: the fit did not converge to tolerance {tol:e}");
        Ok(Outcome { code: EXIT_INPUT })
    }
}

fn cmd_sample(
    params: &Path,
    n: Option<usize>,
    count: usize,
    seed: u64,
    out_dir: &Path,
    (stdout, _): Io<'_>,
) -> Result<Outcome, Error> {
    let file = load_params(params)?;
    let m = file.to_model()?;
    let n = m.resolve_n(n)?;
    let cfg = SampleConfig::new(seed, count)?;
    let labels = file.node_labels.as_deref().filter(|l| l.len() == n);
    fs::create_dir_all(out_dir).map_err(|e| Error::Io(format!("{}: {e}", out_dir.display())))?;
    for (k, g) in sampling::sample(&m, n, &cfg)?.iter().enumerate() {
        write_file(&out_dir.join(format!("sample_{k:06}.txt")), &write_edge_list(g, labels))?;
    }
    if let Some(labels) = labels {
        let table: String = labels.iter().enumerate().map(|(i, l)| format!("{i}\t{l}\n")).collect();
        write_file(&out_dir.join("nodes.tsv"), &table)?;
    }
    let _ = writeln!(stdout, "wrote {count} graphs on {n} nodes to {}", out_dir.display());
    Ok(Outcome { code: EXIT_OK })
}

fn cmd_loglik(params: &Path, graph: &Path, (stdout, _): Io<'_>) -> Result<Outcome, Error> {
    let m = load_params(params)?.to_model()?;
    let edges = parse_edge_list(&read(graph)?)?;
    let _ = writeln!(stdout, "{:.15}", m.log_likelihood(&edges.graph)?);
    Ok(Outcome { code: EXIT_OK })
}

fn resolve_probe(name: &str, n: usize) -> Result<ParametrizationProbe, Error> {
    if BUILTIN_NAMES.contains(&name) {
        let probe = builtin_probe(name, n)?.probe;
        if probe.kind == ProbeKind::Block {
            return Ok(builtin_probe(name, PROBE_BLOCKS)?.probe);
        }
        return Ok(probe);
    }
    let path = Path::new(name);
    if path.exists() {
        return parse_tabulated_probe(name, &read(path)?);
    }
    Err(Error::Precondition(format!(
        "unknown probe {name:?}; expected a file or one of {}",
        BUILTIN_NAMES.join(", ")
    )))
}

fn cmd_verify(
    probe: &str,
    check: VerifyCheck,
    n: usize,
    grid: usize,
    tol: Option<f64>,
    (stdout, _): Io<'_>,
) -> Result<Outcome, Error> {
    let p = resolve_probe(probe, n)?;
    let _ = writeln!(
        stdout,
        "probe: {} ({} {}, size {}, box [{}, {}])",
        p.name,
        if p.directed { "directed" } else { "undirected" },
        if p.kind == ProbeKind::Block { "block" } else { "nodal" },
        p.size,
        p.lo,
        p.hi
    );
    let eq = check_equivariance(&p, 1000, 0)?;
    let _ = writeln!(stdout, "equivariant: {} (max discrepancy {:e})", eq.equivariant, eq.max_discrepancy);
    if let Some(w) = &eq.witness {
        let _ = writeln!(stdout, "witness: {w}");
    }
    if check == VerifyCheck::Equivariance || !eq.equivariant {
        return Ok(Outcome {
            code: if eq.equivariant { EXIT_OK } else { EXIT_CHECK_FAILED },
        });
    }

    let add = check_additivity(&p, grid, tol.filter(|_| check == VerifyCheck::Additivity).unwrap_or(DEFAULT_ADDITIVITY_TOLERANCE))?;
    let _ = writeln!(
        stdout,
        "additive: {} (max mixed partial {:e}, threshold {:e}, residual {:e})",
        add.additive, add.max_mixed_partial, add.threshold, add.residual
    );
    if add.additive {
        let _ = writeln!(stdout, "symmetric additive: {}", add.symmetric_additive);
    }
    if check == VerifyCheck::Additivity || !add.additive {
        return Ok(Outcome {
            code: if add.additive { EXIT_OK } else { EXIT_CHECK_FAILED },
        });
    }

    let nodes = if p.kind == ProbeKind::Block { n.max(p.size) } else { p.size };
    let red = verify_reduction(&p, nodes, tol.unwrap_or(1e-9), 0)?;
    let _ = writeln!(
        stdout,
        "reduces to {} on {nodes} nodes: {} (max log-likelihood gap {:e})",
        red.reduced.family(),
        red.matches,
        red.max_gap
    );
    Ok(Outcome {
        code: if red.matches { EXIT_OK } else { EXIT_CHECK_FAILED },
    })
}

fn cmd_oracle(params: &Path, n: Option<usize>, check: OracleCheck, (stdout, _): Io<'_>) -> Result<Outcome, Error> {
    let m: ModelSpec = load_params(params)?.to_model()?;
    let n = m.resolve_n(n)?;
    oracle::EnumerationLimit::default().check(n, m.is_directed())?;
    let (passed, first, second) = match check {
        OracleCheck::Normalization => {
            let total = oracle::total_probability(&m, n)?;
            ((total - 1.0).abs() <= 1e-10, 1.0, total)
        }
        OracleCheck::Partition => {
            let closed = m.log_partition(n)?;
            let brute = oracle::brute_log_partition(&m, n)?;
            ((closed - brute).abs() <= 1e-10, closed, brute)
        }
        OracleCheck::Moments => {
            let closed = m.expected_stats(n)?;
            let brute = oracle::brute_expected_stats(&m, n)?;
            let gap = closed.max_abs_diff(&brute)?;
            let _ = writeln!(stdout, "closed form: {:?}", closed.to_vec());
            let _ = writeln!(stdout, "enumeration: {:?}", brute.to_vec());
            (gap <= 1e-10, 0.0, gap)
        }
    };
    match check {
        OracleCheck::Moments => {
            let _ = writeln!(stdout, "max difference: {second:e}");
        }
        _ => {
            let _ = writeln!(stdout, "{first:.15}");
            let _ = writeln!(stdout, "{second:.15}");
        }
    }
    Ok(Outcome {
        code: if passed { EXIT_OK } else { EXIT_CHECK_FAILED },
    })
}
