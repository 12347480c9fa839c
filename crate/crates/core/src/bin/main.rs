use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use greedy_degrade::experiments::{
    bound_violations, format_sci, run_oracle, run_sweep, sweep_csv, verify_channel, CheckStatus,
    ExperimentConfig, OracleMethod,
};
use greedy_degrade::io::{channel_to_json, parse_channel, ReportFile};
use greedy_degrade::{greedy_merge, to_posterior_form, Channel, Error, GeneratorSpec, InputDistribution};

const EXIT_FAIL: u8 = 1;
const EXIT_INPUT: u8 = 2;
const EXIT_GUARD: u8 = 3;

#[derive(Parser)]
#[command(
    name = "greedy-degrade",
    version,
    about = "Degrade a discrete memoryless channel by greedy merging and check the loss bounds"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Source {
    /// Channel file (JSON with `input_dist` and `channel`)
    #[arg(conflicts_with = "random", required_unless_present = "random")]
    channel: Option<PathBuf>,

    /// Generate the channel instead, e.g. `X=3,Y=256,seed=42`
    #[arg(long, value_name = "SPEC")]
    random: Option<GeneratorSpec>,

    /// Rescale input and channel rows that do not sum to 1
    #[arg(long)]
    renormalize: bool,
}

#[derive(Subcommand)]
enum Command {
    /// Merge output letters down to the target alphabet size
    Degrade {
        #[command(flatten)]
        source: Source,
        /// Target output alphabet size
        #[arg(short = 'L', long)]
        target: usize,
        /// Write the report here instead of stdout
        #[arg(short, long)]
        out: Option<PathBuf>,
        /// Attach the per-merge bound to each step
        #[arg(long)]
        trace: bool,
        /// Also show the summary in bits
        #[arg(long)]
        bits: bool,
    },
    /// Check the per-merge, cumulative and pair bounds on a channel
    Verify {
        #[command(flatten)]
        source: Source,
        /// Target sizes for the cumulative check (default 2|X|, 4|X|, 8|X|)
        #[arg(long, value_delimiter = ',')]
        targets: Vec<usize>,
        /// With --random: check this many channels, seeds seed, seed+1, ...
        #[arg(long, default_value_t = 1)]
        count: u64,
        #[arg(long, default_value_t = 1.0, hide = true)]
        bound_scale: f64,
    },
    /// Greedy losses against the cumulative bound over seeded random channels, as CSV
    Sweep {
        #[arg(short = 'X', long)]
        inputs: usize,
        #[arg(short = 'Y', long)]
        outputs: usize,
        #[arg(short = 'L', long, value_delimiter = ',', required = true)]
        targets: Vec<usize>,
        #[arg(long, default_value_t = 10)]
        trials: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(short, long)]
        out: PathBuf,
    },
    /// Optimal degrading loss on a small channel and the greedy gap
    Oracle {
        #[command(flatten)]
        source: Source,
        #[arg(short = 'L', long)]
        target: usize,
        /// `brute` (any |X|, |Y| <= 12) or `dp` (binary input)
        #[arg(long, default_value = "brute")]
        method: OracleMethod,
    },
    /// Write a seeded random channel file
    Gen {
        #[arg(long, value_name = "SPEC")]
        random: GeneratorSpec,
        #[arg(short, long)]
        out: Option<PathBuf>,
    },
}

#[derive(Debug)]
struct Failure {
    code: u8,
    message: String,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = if matches!(e, Error::Guard(_)) { EXIT_GUARD } else { EXIT_INPUT };
        Failure {
            code,
            message: e.to_string(),
        }
    }
}

fn io_failure(path: &Path, e: std::io::Error) -> Failure {
    Failure {
        code: EXIT_INPUT,
        message: format!("{}: {e}", path.display()),
    }
}

impl Source {
    fn load(&self) -> Result<(Channel, InputDistribution), Failure> {
        match (&self.channel, self.random) {
            (_, Some(spec)) => Ok(spec.generate()?),
            (Some(path), None) => {
                let text = fs::read_to_string(path).map_err(|e| io_failure(path, e))?;
                parse_channel(&text, self.renormalize).map_err(|e| Failure {
                    code: EXIT_INPUT,
                    message: format!("{}: {e}", path.display()),
                })
            }
            (None, None) => unreachable!("clap requires a source"),
        }
    }
}

fn write_output(path: Option<&Path>, text: &str) -> Result<(), Failure> {
    match path {
        Some(path) => fs::write(path, text).map_err(|e| io_failure(path, e)),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn degrade(source: &Source, target: usize, out: Option<&Path>, trace: bool, bits: bool) -> Result<u8, Failure> {
    let (channel, input) = source.load()?;
    let pc = to_posterior_form(&channel, &input)?;
    let report = greedy_merge(&pc, target)?;
    let file = ReportFile::new(&report, &channel, &input, trace)?;
    let mut json = file.to_json();
    json.push('\n');
    write_output(out, &json)?;
    if out.is_some() {
        let before = pc.mutual_information();
        let after = report.result.mutual_information();
        println!("output letters: {} -> {}", pc.len(), report.result.len());
        println!("I(W) = {} nats, I(Q) = {} nats", format_sci(before), format_sci(after));
        println!("total_delta = {} nats", format_sci(report.total_delta));
        if bits {
            println!("total_delta = {} bits", format_sci(report.total_delta / std::f64::consts::LN_2));
        }
    }
    Ok(0)
}

fn verify(source: &Source, targets: &[usize], count: u64, bound_scale: f64) -> Result<u8, Failure> {
    let mut instances = Vec::new();
    match source.random {
        Some(spec) => {
            for i in 0..count {
                let spec = spec.with_seed(spec.seed.wrapping_add(i));
                instances.push((spec.to_string(), spec.generate()?));
            }
        }
        None => instances.push((
            source.channel.as_ref().expect("source").display().to_string(),
            source.load()?,
        )),
    }
    let mut failed = false;
    for (label, (channel, input)) in instances {
        let pc = to_posterior_form(&channel, &input)?;
        let k = pc.num_inputs();
        let targets: Vec<usize> = if targets.is_empty() {
            vec![2 * k, 4 * k, 8 * k]
        } else {
            targets.to_vec()
        };
        println!("# {label}: |X| = {k}, |Y| = {}", pc.len());
        for c in verify_channel(&pc, &targets, bound_scale)? {
            failed |= c.status == CheckStatus::Fail;
            println!("{c}");
        }
    }
    Ok(if failed { EXIT_FAIL } else { 0 })
}

fn sweep(config: ExperimentConfig) -> Result<u8, Failure> {
    let rows = run_sweep(&config)?;
    let violations = bound_violations(&rows);
    if let Some(row) = violations.first() {
        return Err(Failure {
            code: EXIT_FAIL,
            message: format!(
                "greedy loss exceeds the cumulative bound ({} rows); first: trial {} seed {} L {} ratio {}",
                violations.len(),
                row.trial,
                row.seed,
                row.target,
                row.ratio.map(format_sci).unwrap_or_default()
            ),
        });
    }
    write_output(Some(&config.output_path), &sweep_csv(&rows))?;
    Ok(0)
}

fn oracle(source: &Source, target: usize, method: OracleMethod) -> Result<u8, Failure> {
    let (channel, input) = source.load()?;
    let pc = to_posterior_form(&channel, &input)?;
    let outcome = run_oracle(&pc, target, method)?;
    println!("optimal_delta_nats = {}", format_sci(outcome.optimal_delta));
    println!("greedy_delta_nats = {}", format_sci(outcome.greedy_delta));
    println!("gap_nats = {}", format_sci(outcome.gap()));
    let blocks: Vec<String> = outcome
        .blocks
        .iter()
        .map(|b| format!("{{{}}}", b.iter().map(usize::to_string).collect::<Vec<_>>().join(",")))
        .collect();
    println!("partition = {}", blocks.join(" "));
    if !pc.dropped_outputs().is_empty() {
        println!("zero-mass outputs (unassigned) = {:?}", pc.dropped_outputs());
    }
    Ok(0)
}

fn gen(spec: GeneratorSpec, out: Option<&Path>) -> Result<u8, Failure> {
    let (channel, input) = spec.generate()?;
    let mut json = channel_to_json(&channel, &input);
    json.push('\n');
    write_output(out, &json)?;
    Ok(0)
}

fn run(cli: Cli) -> Result<u8, Failure> {
    match cli.command {
        Command::Degrade {
            source,
            target,
            out,
            trace,
            bits,
        } => degrade(&source, target, out.as_deref(), trace, bits),
        Command::Verify {
            source,
            targets,
            count,
            bound_scale,
        } => verify(&source, &targets, count, bound_scale),
        Command::Sweep {
            inputs,
            outputs,
            targets,
            trials,
            seed,
            out,
        } => sweep(ExperimentConfig {
            num_inputs: inputs,
            num_outputs: outputs,
            l_values: targets,
            num_trials: trials,
            seed,
            output_path: out,
        }),
        Command::Oracle { source, target, method } => oracle(&source, target, method),
        Command::Gen { random, out } => gen(random, out.as_deref()),
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(code) => ExitCode::from(code),
        Err(failure) => {
            eprintln!("error: {}", failure.message);
            ExitCode::from(failure.code)
        }
    }
}
