use clap::{Args, Parser, Subcommand, ValueEnum};
use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;
use symverif::cli::{self, CliError, Flags, Report};

/// Verify and synthesize symmetry properties of imperative programs.
///
/// Exit status: 0 Valid, 1 Invalid, 2 Unknown, 3 usage, I/O or parse error.
#[derive(Parser)]
#[command(name = "symverif", version)]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
    #[command(flatten)]
    opts: Opts,
}

#[derive(Args)]
struct Opts {
    /// SMT solver binary (default: $SYMVERIF_SOLVER, then z3 on PATH).
    #[arg(long, global = true)]
    solver: Option<PathBuf>,
    /// Seconds per solver query.
    #[arg(long, global = true, default_value_t = 30.0)]
    smt_timeout: f64,
    /// Bound on group enumeration.
    #[arg(long, global = true, default_value_t = symverif::group::DEFAULT_MAX_ELEMS)]
    max_elems: usize,
    /// Add sin/cos range and Pythagorean axioms to solver queries.
    #[arg(long, global = true)]
    trig_axioms: bool,
    /// Keep every emitted SMT-LIB script in this directory.
    #[arg(long, global = true)]
    keep_smt: Option<PathBuf>,
    /// Print the report as JSON.
    #[arg(long, global = true)]
    json: bool,
    /// Fuzz each Valid result with this many trials.
    #[arg(long, global = true)]
    fuzz: Option<usize>,
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Synthesis grammar depth.
    #[arg(long, global = true, default_value_t = 3)]
    depth: usize,
    /// Synthesis budget in seconds per post-condition generator.
    #[arg(long, global = true, default_value_t = 120.0)]
    synth_timeout: f64,
}

#[derive(Subcommand)]
enum Cmd {
    /// Verify the triple declared in a .sym file.
    Verify { file: PathBuf },
    /// Synthesize pre-conditions for the file's synth targets.
    Synth { file: PathBuf },
    /// Check that a declared action respects its group's relations.
    CheckAction { file: PathBuf, action: String },
    /// Enumerate the elements of a declared group.
    Enumerate {
        file: PathBuf,
        group: String,
        #[arg(long)]
        bound: Option<usize>,
    },
    /// Randomized soundness check of the file's triple.
    Fuzz {
        file: PathBuf,
        #[arg(short = 'n', long, default_value_t = 1000)]
        trials: usize,
    },
    /// Print a generated corpus file.
    Template {
        #[arg(value_enum)]
        kind: Template,
        n: usize,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Template {
    Voting,
    DihedralCar,
}

fn flags(o: &Opts) -> Flags {
    Flags {
        solver: o.solver.clone(),
        smt_timeout: o.smt_timeout,
        max_elems: o.max_elems,
        trig_axioms: o.trig_axioms,
        keep_smt: o.keep_smt.clone(),
        fuzz: o.fuzz,
        seed: o.seed,
        depth: o.depth,
        synth_timeout: o.synth_timeout,
    }
}

fn run(c: &Cli) -> Result<Option<Report>, CliError> {
    let f = flags(&c.opts);
    Ok(Some(match &c.command {
        Cmd::Verify { file } => cli::cmd_verify(file, &f)?,
        Cmd::Synth { file } => cli::cmd_synth(file, &f)?,
        Cmd::CheckAction { file, action } => cli::cmd_check_action(file, action, &f)?,
        Cmd::Enumerate { file, group, bound } => cli::cmd_enumerate(file, group, bound.unwrap_or(f.max_elems), &f)?,
        Cmd::Fuzz { file, trials } => cli::cmd_fuzz(file, *trials, f.seed, &f)?,
        Cmd::Template { kind, n } => {
            let text = match (kind, *n) {
                (Template::Voting, n) if n >= 2 => cli::voting(n),
                (Template::DihedralCar, n) if n >= 3 => cli::dihedral_car(n),
                _ => return Err(CliError::Usage("n is too small for this template".into())),
            };
            let _ = write!(std::io::stdout(), "{}", text);
            return Ok(None);
        }
    }))
}

fn main() -> ExitCode {
    let c = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 3 } else { 0 });
        }
    };
    match run(&c) {
        Ok(None) => ExitCode::SUCCESS,
        Ok(Some(r)) => {
            let text = if c.opts.json { r.to_json() } else { r.to_string() };
            let _ = writeln!(std::io::stdout(), "{}", text);
            ExitCode::from(r.exit_code() as u8)
        }
        Err(e) => {
            eprintln!("symverif: {}", e);
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
