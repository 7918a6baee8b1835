//! `ptree` command-line front end.
//!
//! Every subcommand is a thin composition of library operations; output is
//! line-oriented and prints exact rationals before their decimal rendering.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use causal_tree::dsl::{export_dot, export_json, serialize, DslError, TreeDocument};
use causal_tree::rational::{format_decimal, format_rational};
use causal_tree::simulator::realizations_csv;
use causal_tree::{
    posterior, run_experiment, sample, ConditionalQuery, Error, Event, ExperimentPlan,
    InterventionSpec, Posterior, ProbabilityTree, Rational, TrialRecord, VariableId,
};
use clap::{Parser, Subcommand, ValueEnum};

#[derive(Parser, Debug)]
#[command(
    name = "ptree",
    version,
    about = "Exact queries, interventions and causal induction on probability trees"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Check a tree document; prints `ok` or one line per violation
    Validate { file: PathBuf },
    /// Probability of an event, e.g. `-e X=x,Y=~y` (empty for the sure event)
    Prob {
        file: PathBuf,
        #[arg(short = 'e', long = "event", allow_hyphen_values = true)]
        event: String,
    },
    /// Conditional probability P(target | given)
    Cond {
        file: PathBuf,
        #[arg(short = 't', long = "target")]
        target: String,
        #[arg(short = 'g', long = "given")]
        given: String,
    },
    /// Force variables to values and print the resulting tree
    Do {
        file: PathBuf,
        #[arg(short = 'i', long = "intervene", required = true)]
        interventions: Vec<String>,
        /// Write the tree here instead of stdout
        #[arg(short = 'o', long = "output")]
        output: Option<PathBuf>,
    },
    /// Posterior over a hypothesis variable after one trial
    Posterior {
        file: PathBuf,
        #[arg(long = "hyp")]
        hypothesis: String,
        #[arg(short = 'i', long = "intervene")]
        interventions: Vec<String>,
        #[arg(short = 'e', long = "event")]
        observation: String,
    },
    /// Draw seeded realizations
    Sample {
        file: PathBuf,
        #[arg(short = 'n')]
        count: usize,
        #[arg(long)]
        seed: u64,
        /// Write the CSV here instead of stdout
        #[arg(long = "csv")]
        csv: Option<PathBuf>,
    },
    /// Run a simulated experiment campaign described by a plan file
    Experiment {
        plan: PathBuf,
        /// Write the trial log here; the final posterior goes to stdout
        #[arg(long = "csv")]
        csv: Option<PathBuf>,
    },
    /// Render a tree as DOT or JSON
    Export {
        file: PathBuf,
        #[arg(long, value_enum)]
        format: Format,
    },
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Format {
    Dot,
    Json,
}

/// A failure that ends the command with exit status 1.
struct Failure(String);

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure(e.to_string())
    }
}

fn io_failure(path: &Path, e: std::io::Error) -> Failure {
    Failure(format!("{}: {e}", path.display()))
}

/// `file:line:col: message` for located errors, `file: message` otherwise.
fn dsl_failure(path: &Path, e: &DslError) -> Failure {
    match e {
        DslError::Syntax { .. } | DslError::Probability { .. } => {
            Failure(format!("{}:{e}", path.display()))
        }
        DslError::Validation(_) => Failure(format!("{}: {e}", path.display())),
    }
}

fn load(path: &Path) -> Result<ProbabilityTree, Failure> {
    let text = fs::read_to_string(path).map_err(|e| io_failure(path, e))?;
    TreeDocument::parse(&text)
        .map(|d| d.tree)
        .map_err(|e| dsl_failure(path, &e))
}

fn write_file(path: &Path, contents: &str) -> Result<(), Failure> {
    fs::write(path, contents).map_err(|e| io_failure(path, e))
}

fn with_newline(mut s: String) -> String {
    if !s.ends_with('\n') {
        s.push('\n');
    }
    s
}

fn number(r: &Rational) -> String {
    format!("{} ({})", format_rational(r), format_decimal(r))
}

/// One `value num/den (decimal)` line per hypothesis value.
fn table(post: &Posterior) -> String {
    post.weights()
        .iter()
        .map(|(v, w)| format!("{v} {}\n", number(w)))
        .collect()
}

/// Runs the command line `args` (including the program name), writing
/// results to `out` and diagnostics to `err`. Returns the exit status.
pub fn run<I, S>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = S>,
    S: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = e.exit_code();
            let sink: &mut dyn Write = if e.use_stderr() { err } else { out };
            let _ = write!(sink, "{}", e.render());
            return code;
        }
    };
    match execute(cli.command, out) {
        Ok(()) => 0,
        Err(Failure(msg)) => {
            let line = msg.lines().next().unwrap_or_default();
            let _ = writeln!(err, "error: {line}");
            1
        }
    }
}

/// Event and intervention literals are parsed here rather than by clap so
/// that malformed ones report as ordinary errors (status 1).
fn parse_event(text: &str) -> Result<Event, Failure> {
    Ok(text.parse()?)
}

fn parse_interventions(texts: &[String]) -> Result<Vec<InterventionSpec>, Failure> {
    texts.iter().map(|t| Ok(t.parse()?)).collect()
}

fn emit(out: &mut dyn Write, text: &str) -> Result<(), Failure> {
    out.write_all(text.as_bytes())
        .map_err(|e| Failure(format!("writing output: {e}")))
}

fn execute(command: Command, out: &mut dyn Write) -> Result<(), Failure> {
    match command {
        Command::Validate { file } => {
            let text = fs::read_to_string(&file).map_err(|e| io_failure(&file, e))?;
            match TreeDocument::parse(&text) {
                Ok(_) => emit(out, "ok\n")?,
                Err(DslError::Validation(issues)) => {
                    let listing: String = issues
                        .iter()
                        .map(|i| format!("{}:{i}\n", file.display()))
                        .collect();
                    emit(out, &listing)?;
                    return Err(Failure(format!(
                        "{}: {} violation(s)",
                        file.display(),
                        issues.len()
                    )));
                }
                Err(e) => return Err(dsl_failure(&file, &e)),
            }
        }
        Command::Prob { file, event } => {
            let p = load(&file)?.event_probability(&parse_event(&event)?)?;
            emit(out, &format!("{}\n", number(&p)))?;
        }
        Command::Cond {
            file,
            target,
            given,
        } => {
            let q = ConditionalQuery::new(parse_event(&target)?, parse_event(&given)?)?;
            let p = load(&file)?.conditional_probability(&q)?;
            emit(out, &format!("{}\n", number(&p)))?;
        }
        Command::Do {
            file,
            interventions,
            output,
        } => {
            let forced = load(&file)?.intervene_many(&parse_interventions(&interventions)?)?;
            let text = with_newline(serialize(&forced));
            match output {
                Some(path) => write_file(&path, &text)?,
                None => emit(out, &text)?,
            }
        }
        Command::Posterior {
            file,
            hypothesis,
            interventions,
            observation,
        } => {
            let trial = TrialRecord::new(
                parse_interventions(&interventions)?,
                parse_event(&observation)?,
            );
            let post = posterior(&load(&file)?, &VariableId::new(hypothesis), &trial)?;
            emit(out, &table(&post))?;
        }
        Command::Sample {
            file,
            count,
            seed,
            csv,
        } => {
            let tree = load(&file)?;
            let text = realizations_csv(&tree, &sample(&tree, seed, count)?)?;
            match csv {
                Some(path) => write_file(&path, &text)?,
                None => emit(out, &text)?,
            }
        }
        Command::Experiment { plan, csv } => {
            let outcome = run_experiment(&ExperimentPlan::load(&plan)?)?;
            let log = outcome.to_csv()?;
            match csv {
                Some(path) => {
                    write_file(&path, &log)?;
                    emit(out, &table(outcome.final_posterior()))?;
                }
                None => emit(out, &log)?,
            }
        }
        Command::Export { file, format } => {
            let tree = load(&file)?;
            let text = match format {
                Format::Dot => export_dot(&tree),
                Format::Json => export_json(&tree),
            };
            emit(out, &with_newline(text))?;
        }
    }
    Ok(())
}
