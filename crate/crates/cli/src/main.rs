use std::io::Write;
use std::net::SocketAddr;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::Arc;
use std::time::Duration;

use anyhow::Context;
use clap::{Args, Parser, Subcommand};

use stratcheck_core::bench::{generate_benchmark, BenchmarkParams};
use stratcheck_core::model::{export_graph, ExportFormat};
use stratcheck_core::verify::Method;

use stratcheck_cli::ops::{self, OpError, ReduceOptions, VerifyOptions, EXIT_INPUT, EXIT_UNAVAILABLE};
use stratcheck_cli::server::{self, AppState};
use stratcheck_cli::store::SessionStore;

/// Model checker for coalition abilities in asynchronous multi-agent systems.
#[derive(Debug, Parser)]
#[command(name = "stratcheck", version)]
struct Cli {
    /// Wall-clock limit for verification in seconds; 0 disables it.
    #[arg(long, global = true, default_value_t = 60.0)]
    timeout: f64,
    /// Add `elapsed_ms` to verification and reduction records.
    #[arg(long, global = true)]
    timings: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Verify the formula of a model file.
    Verify {
        spec: PathBuf,
        #[command(flatten)]
        run: VerifyArgs,
    },
    /// Print full and reduced model sizes.
    Reduce {
        spec: PathBuf,
        #[command(flatten)]
        reduce: ReduceArgs,
        /// Also print the full graph with the reduced part flagged.
        #[arg(long, value_parser = ["dot", "json"])]
        format: Option<String>,
    },
    /// Check a candidate A-bisimulation between two models.
    Bisim {
        left: PathBuf,
        right: PathBuf,
        relation: PathBuf,
        /// Overrides the relation file's COALITION line.
        #[arg(long)]
        coalition: Option<String>,
        /// Require one uniform response per coalition choice.
        #[arg(long = "strict-bisim")]
        strict: bool,
    },
    /// Export the global model as DOT or JSON.
    Export {
        spec: PathBuf,
        #[arg(long, default_value = "dot", value_parser = ["dot", "json"])]
        format: String,
        /// Flag the reduced part of the model.
        #[arg(long)]
        por: bool,
        #[command(flatten)]
        reduce: ReduceArgs,
    },
    /// Print TGC(n), or verify it with --verify.
    Bench {
        n: usize,
        #[arg(long)]
        verify: bool,
        #[command(flatten)]
        run: VerifyArgs,
    },
    /// Run the HTTP service.
    Serve {
        #[arg(long, default_value = "127.0.0.1:8080")]
        addr: SocketAddr,
        /// Directory of static assets served under `/`.
        #[arg(long)]
        assets: Option<PathBuf>,
    },
}

#[derive(Debug, Args)]
struct VerifyArgs {
    #[arg(long, default_value = "bruteforce", value_parser = ["bruteforce", "approx", "fixpoint", "dfs"])]
    method: String,
    /// Verify the reduced model.
    #[arg(long)]
    por: bool,
    #[arg(long, default_value = "safe", value_parser = ["safe", "aggressive"])]
    c3: String,
    /// Formula to use instead of the file's FORMULA line.
    #[arg(long)]
    formula: Option<String>,
}

#[derive(Debug, Args)]
struct ReduceArgs {
    /// Agents whose actions are never reduced; defaults to the file's coalition.
    #[arg(long)]
    coalition: Option<String>,
    /// Visible propositions; defaults to those of the formula.
    #[arg(long)]
    props: Option<String>,
    #[arg(long, default_value = "aggressive", value_parser = ["safe", "aggressive"])]
    c3: String,
}

impl Cli {
    fn deadline(&self) -> Result<Option<Duration>, OpError> {
        if self.timeout == 0.0 {
            return Ok(None);
        }
        Duration::try_from_secs_f64(self.timeout)
            .map(Some)
            .map_err(|_| OpError::Input(format!("invalid timeout {}", self.timeout)))
    }
}

impl ReduceArgs {
    fn options(&self) -> Result<ReduceOptions, OpError> {
        Ok(ReduceOptions {
            coalition: self.coalition.as_deref().map(ops::split_list),
            props: self.props.as_deref().map(ops::split_list),
            c3: Some(ops::parse_c3(&self.c3)?),
        })
    }
}

impl VerifyArgs {
    fn options(&self, cli: &Cli) -> Result<VerifyOptions, OpError> {
        Ok(VerifyOptions {
            method: self.method.parse::<Method>().map_err(OpError::Input)?,
            por: self.por,
            c3: ops::parse_c3(&self.c3)?,
            formula: self.formula.clone(),
            timeout: cli.deadline()?,
            timings: cli.timings,
        })
    }
}

fn read(path: &Path) -> Result<String, OpError> {
    std::fs::read_to_string(path).map_err(|e| OpError::Input(format!("{}: {e}", path.display())))
}

fn load(path: &Path) -> Result<ops::Loaded, OpError> {
    ops::load(&path.display().to_string(), &read(path)?)
}

/// Output bytes and exit code of one command.
fn run(cli: &Cli) -> Result<(Vec<u8>, i32), OpError> {
    match &cli.command {
        Command::Verify { spec, run } => {
            let out = ops::run_verify(&load(spec)?, &run.options(cli)?)?;
            Ok((out.to_bytes(), out.exit_code()))
        }
        Command::Reduce { spec, reduce, format } => {
            let r = ops::run_reduce(&load(spec)?, &reduce.options()?)?;
            let out = match format.as_deref() {
                None => format!("{}\n", r.summary_line()).into_bytes(),
                Some("json") => r.to_bytes(cli.timings),
                Some(_) => {
                    let mut out = format!("// {}\n", r.summary_line()).into_bytes();
                    out.extend(r.export(ExportFormat::Dot));
                    out
                }
            };
            Ok((out, 0))
        }
        Command::Bisim {
            left,
            right,
            relation,
            coalition,
            strict,
        } => {
            let (l, r, rel) = (read(left)?, read(right)?, read(relation)?);
            let coalition = coalition.as_deref().map(ops::split_list);
            let out = ops::run_bisim(
                (&left.display().to_string(), &l),
                (&right.display().to_string(), &r),
                (&relation.display().to_string(), &rel),
                coalition.as_deref(),
                *strict,
            )?;
            Ok((out.to_bytes(), out.exit_code()))
        }
        Command::Export {
            spec,
            format,
            por,
            reduce,
        } => {
            let loaded = load(spec)?;
            let format = ops::parse_format(format)?;
            let out = if *por {
                ops::run_reduce(&loaded, &reduce.options()?)?.export(format)
            } else {
                export_graph(&loaded.model, format, false)
            };
            Ok((out, 0))
        }
        Command::Bench { n, verify, run } => {
            let text = generate_benchmark(BenchmarkParams { n: *n })
                .ok_or_else(|| OpError::Input("the number of trains must be at least 1".into()))?;
            if !*verify {
                return Ok((text.into_bytes(), 0));
            }
            let loaded = ops::load(&format!("tgc({n})"), &text)?;
            let out = ops::run_verify(&loaded, &run.options(cli)?)?;
            Ok((out.to_bytes(), out.exit_code()))
        }
        Command::Serve { .. } => unreachable!("handled in main"),
    }
}

fn serve(timeout: Option<Duration>, addr: SocketAddr, assets: Option<PathBuf>) -> anyhow::Result<i32> {
    let rt = tokio::runtime::Runtime::new().context("starting the runtime")?;
    rt.block_on(async {
        let listener = match tokio::net::TcpListener::bind(addr).await {
            Ok(l) => l,
            Err(e) => {
                eprintln!("error: cannot bind {addr}: {e}");
                return Ok(EXIT_UNAVAILABLE);
            }
        };
        eprintln!("listening on http://{}", listener.local_addr()?);
        let state = AppState {
            store: Arc::new(SessionStore::new()),
            timeout,
        };
        server::serve(listener, state, assets).await?;
        Ok(0)
    })
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { EXIT_INPUT as u8 } else { 0 });
        }
    };
    if let Command::Serve { addr, assets } = &cli.command {
        let timeout = match cli.deadline() {
            Ok(t) => t,
            Err(e) => {
                eprintln!("error: {e}");
                return ExitCode::from(e.exit_code() as u8);
            }
        };
        return match serve(timeout, *addr, assets.clone()) {
            Ok(code) => ExitCode::from(code as u8),
            Err(e) => {
                eprintln!("error: {e:#}");
                ExitCode::from(EXIT_UNAVAILABLE as u8)
            }
        };
    }
    match run(&cli) {
        Ok((out, code)) => {
            let mut stdout = std::io::stdout().lock();
            if stdout.write_all(&out).and_then(|_| stdout.flush()).is_err() {
                return ExitCode::from(74);
            }
            ExitCode::from(code as u8)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
