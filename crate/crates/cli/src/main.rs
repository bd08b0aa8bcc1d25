//! `pltwirl` command-line interface.
//!
//! Exit codes: 0 success (or CSM for `classify`), 1 non-CSM, 2 inconclusive
//! or ill-defined, 64 malformed input or usage. Errors are written to stderr
//! as one JSON line `{"exit_code", "message", "field"}`.

use std::f64::consts::FRAC_PI_2;
use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use pltwirl::io;
use pltwirl::lindblad::{channel_log_generator, classify_channel, propagate_constant};
use pltwirl::plmodel::{fit_sparse_lambda, pl_channel, DEFAULT_CSM_TOL};
use pltwirl::qem::mitigation_estimate;
use pltwirl::scenarios::{demo_hadamard, demo_rx, sweep_phase_diagram, GridSpec, Region};
use pltwirl::{twirl, Error, ReprKind};

const EXIT_NON_CSM: u8 = 1;
const EXIT_INCONCLUSIVE: u8 = 2;
const EXIT_USAGE: u8 = 64;

#[derive(Parser)]
#[command(name = "pltwirl", version, about = "Pauli twirling, Pauli-Lindblad channels and CSM classification")]
struct Cli {
    /// Worker threads for `sweep` and `sample` (default: all cores).
    #[arg(long, global = true, env = "PLTWIRL_WORKERS")]
    workers: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Classify a channel as CSM or not (exit 0 / 1 / 2).
    Classify {
        #[command(flatten)]
        io: InOut,
        #[arg(long, default_value_t = DEFAULT_CSM_TOL)]
        tol: f64,
    },
    /// Pauli-twirl a channel.
    Twirl {
        #[command(flatten)]
        io: InOut,
        /// Output representation.
        #[arg(long, value_enum, default_value_t = Repr::Transfer)]
        repr: Repr,
        /// Write the Pauli eigenvalues `{"n", "values"}` instead of a channel.
        #[arg(long)]
        eigenvalues: bool,
    },
    /// Convert between channel representations and generators.
    Convert {
        #[command(flatten)]
        io: InOut,
        #[arg(long, value_enum)]
        to: Target,
        /// Evolution time when the input is a generator.
        #[arg(long, default_value_t = 1.0)]
        time: f64,
    },
    /// Worked single-qubit examples.
    Demo {
        #[command(subcommand)]
        which: Demo,
    },
    /// Phase diagram of the rotation gate as CSV.
    Sweep {
        /// Resolution `<n_gamma>x<n_gammaphi>`.
        #[arg(long, default_value = "60x60", value_parser = parse_grid)]
        grid: (usize, usize),
        #[arg(long, default_value_t = 3.0)]
        gmax: f64,
        #[arg(long, default_value_t = 3.0)]
        gpmax: f64,
        #[arg(long, default_value_t = FRAC_PI_2)]
        theta: f64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Least-squares fit of PL parameters to measured Pauli eigenvalues.
    Fit {
        #[command(flatten)]
        io: InOut,
        #[arg(long, conflicts_with = "no_negative")]
        allow_negative: bool,
        #[arg(long)]
        no_negative: bool,
    },
    /// Monte-Carlo estimate of `tr[O (e^L)^β(C(ρ))]`.
    Sample {
        /// PL parameters of the noise model.
        #[arg(long)]
        pl: PathBuf,
        /// Channel acting on the state (default: the PL channel itself).
        #[arg(long)]
        channel: Option<PathBuf>,
        #[arg(long, allow_negative_numbers = true)]
        beta: f64,
        #[arg(long, default_value_t = 100_000)]
        shots: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Pauli label.
        #[arg(long)]
        observable: String,
        /// State name or one of `01+-rl` per qubit.
        #[arg(long, default_value = "zero")]
        state: String,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Subcommand)]
enum Demo {
    /// Hadamard dephasing, optionally with relaxation.
    Hadamard {
        #[arg(long)]
        gphit: f64,
        #[arg(long, default_value_t = 0.0)]
        gt: f64,
    },
    /// Noisy `√X` gate (or `R_x(ϑ)` with `--theta`).
    Sqrtx {
        #[arg(long)]
        gamma_tg: f64,
        #[arg(long)]
        gammaphi_tg: f64,
        #[arg(long, default_value_t = FRAC_PI_2)]
        theta: f64,
    },
}

#[derive(Args)]
struct InOut {
    /// Input JSON file, `-` for stdin.
    #[arg(long, default_value = "-")]
    input: PathBuf,
    /// Output file (default: stdout).
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum Repr {
    Transfer,
    Kraus,
    Choi,
    PauliBasis,
}

impl From<Repr> for ReprKind {
    fn from(r: Repr) -> Self {
        match r {
            Repr::Transfer => ReprKind::Transfer,
            Repr::Kraus => ReprKind::Kraus,
            Repr::Choi => ReprKind::Choi,
            Repr::PauliBasis => ReprKind::PauliBasis,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum Target {
    Transfer,
    Kraus,
    Choi,
    PauliBasis,
    Generator,
}

fn parse_grid(s: &str) -> Result<(usize, usize), String> {
    let (a, b) = s.split_once(['x', 'X']).ok_or_else(|| format!("expected <n>x<m>, got {s:?}"))?;
    let parse = |t: &str| t.trim().parse::<usize>().map_err(|e| format!("{t:?}: {e}"));
    Ok((parse(a)?, parse(b)?))
}

/// Error carrying its exit code.
struct Failure {
    code: u8,
    message: String,
    field: Option<String>,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::IllDefinedLambda { .. }
            | Error::PrincipalBranchUnavailable(_)
            | Error::InconsistentGenerator { .. } => EXIT_INCONCLUSIVE,
            _ => EXIT_USAGE,
        };
        Failure { code, message: e.to_string(), field: e.field() }
    }
}

type CliResult = Result<u8, Failure>;

fn read_json(path: &Path) -> Result<Value, Failure> {
    let reader: Box<dyn Read> = if path == Path::new("-") {
        Box::new(std::io::stdin().lock())
    } else {
        let file = File::open(path).map_err(|e| Failure {
            code: EXIT_USAGE,
            message: format!("cannot open {}: {e}", path.display()),
            field: Some("input".into()),
        })?;
        Box::new(BufReader::new(file))
    };
    Ok(io::read_value(reader)?)
}

fn output(path: Option<&Path>) -> Result<Box<dyn Write>, Failure> {
    match path {
        None => Ok(Box::new(std::io::stdout().lock())),
        Some(p) => {
            let file = File::create(p).map_err(|e| Failure {
                code: EXIT_USAGE,
                message: format!("cannot create {}: {e}", p.display()),
                field: Some("out".into()),
            })?;
            Ok(Box::new(BufWriter::new(file)))
        }
    }
}

fn write_json(path: Option<&Path>, v: &Value) -> Result<(), Failure> {
    let mut w = output(path)?;
    io::write_value(&mut w, v)?;
    w.flush().map_err(Error::from)?;
    Ok(())
}

fn pool(workers: Option<usize>) -> Result<rayon::ThreadPool, Failure> {
    if workers == Some(0) {
        return Err(Failure { code: EXIT_USAGE, message: "worker count must be positive".into(), field: Some("workers".into()) });
    }
    rayon::ThreadPoolBuilder::new().num_threads(workers.unwrap_or(0)).build().map_err(|e| Failure {
        code: EXIT_USAGE,
        message: e.to_string(),
        field: Some("workers".into()),
    })
}

fn run(cli: Cli) -> CliResult {
    match cli.command {
        Command::Classify { io: f, tol } => {
            let ch = io::channel_from_json(&read_json(&f.input)?)?;
            let verdict = classify_channel(&ch, tol)?;
            write_json(f.out.as_deref(), &io::verdict_to_json(&verdict))?;
            Ok(if verdict.is_csm { 0 } else { EXIT_NON_CSM })
        }
        Command::Twirl { io: f, repr, eigenvalues } => {
            let twirled = twirl(&io::channel_from_json(&read_json(&f.input)?)?)?;
            let v = if eigenvalues {
                io::pauli_vector_to_json(twirled.eigenvalues())
            } else {
                io::channel_to_json(&twirled.to_channel()?, repr.into())
            };
            write_json(f.out.as_deref(), &v)?;
            Ok(0)
        }
        Command::Convert { io: f, to, time } => {
            let input = read_json(&f.input)?;
            let ch = if input.get("Gamma").is_some() {
                propagate_constant(&io::generator_from_json(&input)?, time)?
            } else {
                io::channel_from_json(&input)?
            };
            let v = match to {
                Target::Generator => io::generator_to_json(&channel_log_generator(&ch)?),
                Target::Transfer => io::channel_to_json(&ch, ReprKind::Transfer),
                Target::Kraus => io::channel_to_json(&ch, ReprKind::Kraus),
                Target::Choi => io::channel_to_json(&ch, ReprKind::Choi),
                Target::PauliBasis => io::channel_to_json(&ch, ReprKind::PauliBasis),
            };
            write_json(f.out.as_deref(), &v)?;
            Ok(0)
        }
        Command::Demo { which } => {
            let report = match which {
                Demo::Hadamard { gphit, gt } => demo_hadamard(gphit, gt)?,
                Demo::Sqrtx { gamma_tg, gammaphi_tg, theta } => demo_rx(gamma_tg, gammaphi_tg, theta)?,
            };
            let v = serde_json::to_value(&report).map_err(Error::from)?;
            write_json(None, &v)?;
            Ok(0)
        }
        Command::Sweep { grid, gmax, gpmax, theta, out } => {
            let spec = GridSpec { n_gamma: grid.0, n_gammaphi: grid.1, gamma_max: gmax, gammaphi_max: gpmax, theta };
            let sweep = pool(cli.workers)?.install(|| sweep_phase_diagram(spec))?;
            let counts: serde_json::Map<String, Value> = [
                Region::Csmb,
                Region::Csmc,
                Region::Csmi,
                Region::Ncsmc,
                Region::Inconclusive,
                Region::Error,
            ]
            .iter()
            .map(|r| (r.label().to_string(), json!(sweep.count(*r))))
            .collect();
            let errors: Vec<Value> = sweep
                .points
                .iter()
                .filter_map(|p| {
                    p.error.as_ref().map(|m| json!({ "gamma_tg": p.gamma_tg, "gammaphi_tg": p.gammaphi_tg, "message": m }))
                })
                .collect();
            let mut meta = json!({ "clifford": sweep.clifford, "regions": counts, "errors": errors });
            if !sweep.clifford {
                meta["warning"] =
                    json!("rotation angle is not a multiple of pi/2; the gate is not Clifford and cannot be Pauli-twirled in practice");
            }
            eprintln!("{meta}");
            let mut w = output(out.as_deref())?;
            io::write_sweep_csv(&mut w, &sweep)?;
            w.flush().map_err(Error::from)?;
            Ok(0)
        }
        Command::Fit { io: f, allow_negative, no_negative } => {
            let input = io::fit_input_from_json(&read_json(&f.input)?)?;
            let allow = if allow_negative || no_negative { allow_negative } else { input.allow_negative };
            let fit = fit_sparse_lambda(&input.f, &input.support, allow)?;
            write_json(f.out.as_deref(), &io::fit_result_to_json(&fit, allow))?;
            Ok(0)
        }
        Command::Sample { pl, channel, beta, shots, seed, observable, state, out } => {
            let params = io::pl_from_json(&read_json(&pl)?)?;
            let ch = match channel {
                Some(p) => io::channel_from_json(&read_json(&p)?)?,
                None => pl_channel(&params)?.to_channel()?,
            };
            let rho = io::state_from_spec(&state, params.n())?;
            let obs = io::observable_from_spec(&observable, params.n())?;
            let est = pool(cli.workers)?.install(|| mitigation_estimate(&ch, &params, beta, &rho, &obs, shots, seed))?;
            write_json(out.as_deref(), &serde_json::to_value(est).map_err(Error::from)?)?;
            Ok(0)
        }
    }
}

fn report(f: &Failure) {
    eprintln!("{}", json!({ "exit_code": f.code, "message": f.message, "field": f.field }));
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if !e.use_stderr() => {
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            let message = e.render().to_string();
            report(&Failure { code: EXIT_USAGE, message: message.trim_end().to_string(), field: None });
            return ExitCode::from(EXIT_USAGE);
        }
    };
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(f) => {
            report(&f);
            ExitCode::from(f.code)
        }
    }
}
