//! `fermi` command line: generate states, apply channels, analyze spectra and
//! run verification suites.
//!
//! Exit codes: 0 success, 1 verification failure, 2 usage or input error.

use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};
use serde_json::json;

use crate::entropy::{self, EntropyFunction};
use crate::error::{Error, Result};
use crate::flo::FreeOp;
use crate::fock::{ghz_like_state, random_pure_state, random_slater_determinant, PureState};
use crate::majorization::DEFAULT_SLACK;
use crate::schmidt;
use crate::spdm;
use crate::verify::{self, MonotoneEntropy, Suite, SuiteConfig, SuiteRun};

pub const EXIT_OK: i32 = 0;
pub const EXIT_VERIFY_FAILED: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum StateKind {
    Random,
    Sd,
    Ghz,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum EntropyName {
    Vn,
    Linear,
    S1,
}

#[derive(Debug, Parser)]
#[command(name = "fermi", version, about = "One-body entanglement of fermionic states")]
pub struct RunConfig {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Write a state as JSON.
    Gen {
        kind: StateKind,
        #[arg(long)]
        n: usize,
        #[arg(long = "N")]
        big_n: usize,
        #[arg(long, env = "FERMI_SEED", default_value_t = 0)]
        seed: u64,
        /// Output file; stdout when omitted.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Apply a channel to a state: one JSON file per branch plus
    /// `probabilities.csv`.
    Apply {
        state: PathBuf,
        /// Channel as inline JSON or a path to a JSON file.
        #[arg(long)]
        op: String,
        #[arg(long)]
        out: PathBuf,
    },
    /// Spectra, entropies and Slater data of a state.
    Analyze {
        state: PathBuf,
        #[arg(long, value_enum, default_value_t = EntropyName::Vn)]
        entropy: EntropyName,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run a verification suite (or `all`).
    Verify {
        suite: String,
        #[arg(long, default_value_t = 100)]
        trials: usize,
        #[arg(long, env = "FERMI_SEED", default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = DEFAULT_SLACK)]
        slack: f64,
        /// Entropy for the monotone suite; vn and linear when omitted.
        #[arg(long, value_enum)]
        entropy: Option<EntropyName>,
        /// Directory for `<suite>.jsonl` reports and `summary.csv`.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

impl RunConfig {
    pub fn validate(&self) -> Result<()> {
        if let Command::Verify { trials, slack, .. } = &self.command {
            if *trials == 0 {
                return Err(Error::InvalidParameters("--trials must be positive".into()));
            }
            if !(*slack > 0.0 && slack.is_finite()) {
                return Err(Error::InvalidParameters("--slack must be positive".into()));
            }
        }
        Ok(())
    }
}

/// Parses `args` (including the program name) and runs the command, writing
/// results to `out`. Returns the process exit code.
pub fn run<I, T>(args: I, out: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cfg = match RunConfig::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
        }
    };
    match cfg.validate().and_then(|_| execute(&cfg, out)) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            EXIT_USAGE
        }
    }
}

fn execute(cfg: &RunConfig, out: &mut dyn Write) -> Result<i32> {
    match &cfg.command {
        Command::Gen { kind, n, big_n, seed, out: path } => {
            let state = match kind {
                StateKind::Random => random_pure_state(*n, *big_n, *seed)?,
                StateKind::Sd => random_slater_determinant(*n, *big_n, *seed)?,
                StateKind::Ghz => ghz_like_state(*n, *big_n)?,
            };
            emit(&serde_json::to_string_pretty(&state)?, path.as_deref(), out)?;
            Ok(EXIT_OK)
        }
        Command::Apply { state, op, out: dir } => {
            let state = read_state(state)?;
            let op: FreeOp = serde_json::from_str(&read_inline_or_file(op)?)?;
            cmd_apply(&state, &op, dir, out)?;
            Ok(EXIT_OK)
        }
        Command::Analyze { state, entropy, out: path } => {
            let report = analyze(&read_state(state)?, *entropy)?;
            emit(&serde_json::to_string_pretty(&report)?, path.as_deref(), out)?;
            Ok(EXIT_OK)
        }
        Command::Verify { suite, trials, seed, slack, entropy, out: dir } => {
            let suites: Vec<Suite> = if suite == "all" {
                Suite::ALL.to_vec()
            } else {
                vec![suite.parse()?]
            };
            let mut sc = SuiteConfig { trials: *trials, base_seed: *seed, slack: *slack, ..Default::default() };
            if let Some(e) = entropy {
                sc.entropies = vec![match e {
                    EntropyName::Vn => MonotoneEntropy::TraceForm(EntropyFunction::von_neumann()),
                    EntropyName::Linear => MonotoneEntropy::TraceForm(EntropyFunction::linear()),
                    EntropyName::S1 => MonotoneEntropy::S1,
                }];
            }
            let runs = suites
                .iter()
                .map(|s| verify::run_suite(*s, &sc))
                .collect::<Result<Vec<SuiteRun>>>()?;
            if let Some(dir) = dir {
                fs::create_dir_all(dir)?;
                for r in &runs {
                    r.write_jsonl(fs::File::create(dir.join(format!("{}.jsonl", r.suite)))?)?;
                }
                verify::write_summary_csv(&runs, fs::File::create(dir.join("summary.csv"))?)?;
            }
            verify::write_summary_csv(&runs, &mut *out)?;
            Ok(if runs.iter().all(SuiteRun::passed) { EXIT_OK } else { EXIT_VERIFY_FAILED })
        }
    }
}

fn emit(text: &str, path: Option<&Path>, out: &mut dyn Write) -> Result<()> {
    match path {
        Some(p) => fs::write(p, format!("{text}\n"))?,
        None => writeln!(out, "{text}")?,
    }
    Ok(())
}

fn read_state(path: &Path) -> Result<PureState> {
    Ok(serde_json::from_str(&fs::read_to_string(path)?)?)
}

fn read_inline_or_file(arg: &str) -> Result<String> {
    if arg.trim_start().starts_with('{') {
        Ok(arg.to_string())
    } else {
        Ok(fs::read_to_string(arg)?)
    }
}

fn cmd_apply(state: &PureState, op: &FreeOp, dir: &Path, out: &mut dyn Write) -> Result<()> {
    let outcomes = op.apply(state)?;
    fs::create_dir_all(dir)?;
    let mut csv = String::from("branch,label,probability,file\n");
    for (j, o) in outcomes.iter().enumerate() {
        let file = match o.pure() {
            Some(s) => {
                let label: String = o.label.chars().map(|ch| if ch.is_ascii_alphanumeric() { ch } else { '_' }).collect();
                let name = format!("branch_{j}_{label}.json");
                fs::write(dir.join(&name), serde_json::to_string_pretty(s)? + "\n")?;
                name
            }
            None => String::new(),
        };
        csv.push_str(&format!("{j},{},{:.17e},{file}\n", o.label, o.probability));
    }
    fs::write(dir.join("probabilities.csv"), &csv)?;
    write!(out, "{csv}")?;
    Ok(())
}

/// Summary of a state: SPDM and `(N-1)` spectra, entropies, Slater data.
pub fn analyze(state: &PureState, selected: EntropyName) -> Result<serde_json::Value> {
    let rho = spdm::compute_spdm(state)?;
    let spec = rho.spectrum()?;
    let vn = entropy::trace_form_entropy(&spec, &EntropyFunction::von_neumann());
    let linear = entropy::trace_form_entropy(&spec, &EntropyFunction::linear());
    let s1 = entropy::one_body_entropy_s1(&rho)?;
    let big_n = state.particle_number();
    let lambda_spectrum = match big_n {
        Some(m) if m > 0 => Some(spdm::rho_n_minus_1_spectrum(state)?),
        _ => None,
    };
    let slater_rank = match big_n {
        Some(2) => Some(schmidt::slater_rank_two_fermion(state)?),
        _ => None,
    };
    let (name, value) = match selected {
        EntropyName::Vn => ("vn", vn),
        EntropyName::Linear => ("linear", linear),
        EntropyName::S1 => ("s1", s1),
    };
    Ok(json!({
        "n": state.n_modes(),
        "N": big_n,
        "spectrum": spec,
        "lambda_spectrum": lambda_spectrum,
        "entropies": { "vn": vn, "linear": linear, "s1": s1 },
        "entropy": { "name": name, "value": value },
        "slater_rank": slater_rank,
        "is_sd": spdm::is_idempotent(&rho, 1e-9),
    }))
}
