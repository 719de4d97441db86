use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use mixsyn::cli::{self, ChannelArg, GlobalFlags, Method, SweepSpec};
use mixsyn::linalg::Matrix;
use mixsyn::optim::SolveOptions;

#[derive(Parser)]
#[command(name = "mixsyn", version, about = "Mixed H2/H-infinity state-feedback synthesis")]
struct Cli {
    #[command(flatten)]
    global: Global,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Global {
    /// Override the robustness level of the instance (`inf` for LQR).
    #[arg(long, global = true)]
    beta: Option<f64>,
    /// Solver or bisection tolerance.
    #[arg(long, global = true)]
    tol: Option<f64>,
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Machine-readable output.
    #[arg(long, global = true)]
    json: bool,
    /// Also require beta > beta*.
    #[arg(long, global = true)]
    check_assumptions: bool,
}

#[derive(Clone, Copy, ValueEnum)]
enum MethodArg {
    Are,
    Pi,
    Gd,
}

#[derive(Clone, Copy, ValueEnum)]
enum Chan {
    One,
    Two,
}

impl From<Chan> for ChannelArg {
    fn from(c: Chan) -> Self {
        match c {
            Chan::One => ChannelArg::One,
            Chan::Two => ChannelArg::Two,
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Solve one instance and report sqrt(J), H2 and Hinf norms.
    Solve {
        instance: PathBuf,
        #[arg(long, value_enum, default_value = "are")]
        method: MethodArg,
        #[arg(long, value_enum, conflicts_with_all = ["single_channel", "two_channel"])]
        channel: Option<Chan>,
        #[arg(long)]
        single_channel: bool,
        #[arg(long)]
        two_channel: bool,
        #[arg(long, default_value_t = 500)]
        max_iters: usize,
    },
    /// Evaluate feasibility and cost on a 2-D slice K = base + t1 D1 + t2 D2.
    Sweep {
        instance: PathBuf,
        /// Row-major base policy (defaults to zero).
        #[arg(long, allow_hyphen_values = true)]
        base: Option<String>,
        /// Row-major first direction.
        #[arg(long, allow_hyphen_values = true)]
        d1: String,
        /// Row-major second direction.
        #[arg(long, allow_hyphen_values = true)]
        d2: String,
        /// Range of t1 as lo:hi:count.
        #[arg(long, default_value = "-1:1:21", allow_hyphen_values = true)]
        t1: String,
        #[arg(long, default_value = "-1:1:21", allow_hyphen_values = true)]
        t2: String,
        #[arg(long, value_enum, default_value = "two")]
        channel: Chan,
        /// Report the LQR cost (beta = infinity).
        #[arg(long)]
        lqr: bool,
        #[arg(long, short)]
        out: Option<PathBuf>,
    },
    /// Optimal robustness level beta*.
    Betastar { instance: PathBuf },
    /// Run the invariant suite.
    Verify {
        instance: PathBuf,
        #[arg(long, hide = true)]
        corrupt_gradient: bool,
    },
    /// Generate a random stabilizable instance.
    Gen {
        n: usize,
        m: usize,
        #[arg(long, short)]
        out: Option<PathBuf>,
    },
    /// Test K for membership in the feasible set.
    Feasible {
        instance: PathBuf,
        /// Row-major policy.
        #[arg(long, short, allow_hyphen_values = true)]
        k: String,
    },
    /// Closed-loop H-infinity norm of K.
    HinfNorm {
        instance: PathBuf,
        #[arg(long, short, allow_hyphen_values = true)]
        k: String,
    },
}

fn parse_range(field: &str, s: &str) -> mixsyn::Result<(f64, f64, usize)> {
    let bad = || mixsyn::Error::Parse {
        field: field.into(),
        detail: format!("expected lo:hi:count, got {s}"),
    };
    let parts: Vec<&str> = s.split(':').collect();
    if parts.len() != 3 {
        return Err(bad());
    }
    Ok((
        parts[0].parse().map_err(|_| bad())?,
        parts[1].parse().map_err(|_| bad())?,
        parts[2].parse().map_err(|_| bad())?,
    ))
}

fn run(cli: Cli) -> mixsyn::Result<cli::CmdOutput> {
    let g = cli.global;
    let flags = GlobalFlags {
        beta: g.beta,
        tol: g.tol,
        seed: g.seed,
        json: g.json,
        check_assumptions: g.check_assumptions,
    };
    match cli.command {
        Command::Solve {
            instance,
            method,
            channel,
            single_channel,
            two_channel,
            max_iters,
        } => {
            let channel = channel.map(ChannelArg::from).or(if single_channel {
                Some(ChannelArg::One)
            } else if two_channel {
                Some(ChannelArg::Two)
            } else {
                None
            });
            let method = match method {
                MethodArg::Are => Method::Are,
                MethodArg::Pi => Method::Pi,
                MethodArg::Gd => Method::Gd,
            };
            let opts = SolveOptions {
                max_iters,
                ..SolveOptions::default()
            };
            cli::cmd_solve(&instance, method, channel, &opts, &flags)
        }
        Command::Sweep {
            instance,
            base,
            d1,
            d2,
            t1,
            t2,
            channel,
            lqr,
            out,
        } => {
            let file = cli::read_instance(&instance)?;
            let (m, n) = (file.m, file.n);
            let base = match base {
                Some(b) => cli::parse_policy(&b, m, n)?.k,
                None => Matrix::zeros(m, n),
            };
            let spec = SweepSpec {
                base,
                d1: cli::parse_policy(&d1, m, n)?.k,
                d2: cli::parse_policy(&d2, m, n)?.k,
                t1: parse_range("--t1", &t1)?,
                t2: parse_range("--t2", &t2)?,
                channel: channel.into(),
                lqr,
            };
            cli::with_thread_pool(|| cli::cmd_sweep(&instance, &spec, out.as_deref(), &flags))
        }
        Command::Betastar { instance } => cli::cmd_betastar(&instance, &flags),
        Command::Verify {
            instance,
            corrupt_gradient,
        } => cli::with_thread_pool(|| cli::cmd_verify(&instance, &flags, corrupt_gradient)),
        Command::Gen { n, m, out } => cli::cmd_gen(n, m, flags.seed, out.as_deref()),
        Command::Feasible { instance, k } => cli::cmd_feasible(&instance, &k, &flags),
        Command::HinfNorm { instance, k } => cli::cmd_hinf_norm(&instance, &k, &flags),
    }
}

fn main() -> ExitCode {
    let parsed = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { cli::EXIT_IO as u8 } else { 0 });
        }
    };
    match run(parsed) {
        Ok(out) => {
            if !out.text.is_empty() {
                // A closed pipe (e.g. `| head`) is not an error worth a panic.
                let _ = writeln!(std::io::stdout(), "{}", out.text);
            }
            ExitCode::from(out.exit as u8)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(cli::exit_code(&e) as u8)
        }
    }
}
