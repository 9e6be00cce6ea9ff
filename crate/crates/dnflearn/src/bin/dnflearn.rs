//! Thin CLI over the library's harness: `transform`, `learn`,
//! `verify-bounds`, `gen`, `eval`. A `--config` TOML file, when given,
//! overrides the corresponding flags. Exit codes: 0 success, 2 contract
//! violation, 3 budget exhaustion, 1 other errors.

use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use dnflearn::harness::{
    self, exit_code, load_spec, out_dir, ExperimentSpec, InstanceSpec,
};

#[derive(Parser)]
#[command(name = "dnflearn", about = "DNF and PTF learning from heavy Fourier coefficients")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Exact spectrum of a DNF file, in the spectrum wire format.
    Transform {
        /// DNF text file ("n=4; 1 | 2 & -3").
        input: PathBuf,
        /// Comma-separated means for the product basis; uniform if absent.
        #[arg(long)]
        mu: Option<String>,
        #[arg(long)]
        degree_cap: Option<u32>,
        /// Output file; stdout if absent.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run a learner; writes hypothesis files and a JSON manifest.
    Learn {
        /// TOML experiment spec; overrides the flags below.
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long, default_value = "dnf-mq-prod")]
        learner: String,
        #[arg(long, default_value_t = 10)]
        n: u32,
        #[arg(long, default_value_t = 3)]
        s: u32,
        #[arg(long, default_value_t = 3)]
        max_len: u32,
        #[arg(long, default_value_t = false)]
        monotone: bool,
        #[arg(long, default_value_t = 1)]
        count: u32,
        #[arg(long, default_value_t = 0.2)]
        epsilon: f64,
        #[arg(long, default_value_t = 0.25)]
        delta: f64,
        #[arg(long, default_value_t = 1.0)]
        c: f64,
        #[arg(long, default_value = "exact")]
        backend: String,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Distribution mode: uniform | explicit | smoothed.
        #[arg(long, default_value = "uniform")]
        dist: String,
        /// Comma-separated means for explicit mode.
        #[arg(long)]
        mu: Option<String>,
        /// Target DNF file instead of generated instances.
        #[arg(long)]
        function: Option<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Sweep the error-vs-spectrum-gap bounds; writes CSV.
    VerifyBounds {
        #[arg(long, default_value_t = 100)]
        count: u32,
        #[arg(long, default_value_t = 10)]
        n: u32,
        #[arg(long, default_value_t = 3)]
        s: u32,
        #[arg(long, default_value_t = 0.1)]
        epsilon: f64,
        /// Comma-separated boundedness constants to cycle through.
        #[arg(long, default_value = "1,0.5,0.25")]
        c_values: String,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Generate random DNF instance files.
    Gen {
        #[arg(long, default_value_t = 10)]
        n: u32,
        #[arg(long, default_value_t = 3)]
        s: u32,
        #[arg(long, default_value_t = 3)]
        max_len: u32,
        #[arg(long, default_value_t = false)]
        monotone: bool,
        #[arg(long, default_value_t = 1)]
        count: u32,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Evaluate a DNF at a point, or its exact error against a hypothesis.
    Eval {
        function: PathBuf,
        #[arg(long)]
        hypothesis: Option<PathBuf>,
        #[arg(long)]
        mu: Option<String>,
        /// Point as hex bits (bit i set = x_i = +1).
        #[arg(long)]
        point: Option<String>,
    },
}

fn parse_c_values(text: &str) -> dnflearn::Result<Vec<f64>> {
    text.split(',')
        .map(|t| {
            t.trim().parse::<f64>().map_err(|_| {
                dnflearn::Error::Parse(format!("bad c value {t:?}"))
            })
        })
        .collect()
}

fn run(cmd: Cmd) -> dnflearn::Result<bool> {
    match cmd {
        Cmd::Transform {
            input,
            mu,
            degree_cap,
            out,
        } => {
            let mut buf = Vec::new();
            harness::run_transform(&input, mu.as_deref(), degree_cap, &mut buf)?;
            match out {
                Some(p) => fs::write(p, buf)?,
                None => print!("{}", String::from_utf8_lossy(&buf)),
            }
            Ok(true)
        }
        Cmd::Learn {
            config,
            learner,
            n,
            s,
            max_len,
            monotone,
            count,
            epsilon,
            delta,
            c,
            backend,
            seed,
            dist,
            mu,
            function,
            out,
        } => {
            let spec = match config {
                Some(path) => load_spec(&path)?,
                None => ExperimentSpec {
                    learner,
                    instance: InstanceSpec {
                        n,
                        s,
                        max_len,
                        monotone,
                        count,
                    },
                    dist: harness::DistSpec {
                        mode: dist,
                        mu: mu.map(|list| {
                            list.split(',')
                                .filter_map(|t| t.trim().parse().ok())
                                .collect()
                        }),
                        mu_bar: None,
                    },
                    epsilon,
                    delta,
                    c,
                    backend,
                    seed,
                    function,
                    out,
                },
            };
            let manifest = harness::run_learn(&spec)?;
            println!("{}", serde_json::to_string_pretty(&manifest).expect("manifest"));
            Ok(true)
        }
        Cmd::VerifyBounds {
            count,
            n,
            s,
            epsilon,
            c_values,
            seed,
            out,
        } => {
            let cs = parse_c_values(&c_values)?;
            let mut buf = Vec::new();
            let ok = harness::run_verify_bounds(count, n, s, epsilon, &cs, seed, &mut buf)?;
            match out {
                Some(p) => fs::write(p, buf)?,
                None => print!("{}", String::from_utf8_lossy(&buf)),
            }
            if !ok {
                return Err(dnflearn::Error::ContractViolation(
                    "bound sweep produced a failing tuple".to_string(),
                ));
            }
            Ok(true)
        }
        Cmd::Gen {
            n,
            s,
            max_len,
            monotone,
            count,
            seed,
            out,
        } => {
            let inst = InstanceSpec {
                n,
                s,
                max_len,
                monotone,
                count,
            };
            let dir = out_dir(out.as_deref());
            for p in harness::run_gen(&inst, seed, &dir)? {
                println!("{}", p.display());
            }
            Ok(true)
        }
        Cmd::Eval {
            function,
            hypothesis,
            mu,
            point,
        } => {
            let mut buf = Vec::new();
            harness::run_eval(
                &function,
                hypothesis.as_deref(),
                mu.as_deref(),
                point.as_deref(),
                &mut buf,
            )?;
            print!("{}", String::from_utf8_lossy(&buf));
            Ok(true)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.cmd) {
        Ok(_) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e) as u8)
        }
    }
}
