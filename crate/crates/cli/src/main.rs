//! `easpec`: runs each stage of the partial evaluator from the command line.
//!
//! Exit codes: 0 success, 1 usage or parse error, 2 semantic or validation
//! error, 3 budget exceeded, 4 equivalence failure.

use std::collections::BTreeSet;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use easpec_core::gen::Gen;
use easpec_core::opt::{RewriteSet, DEFAULT_MAX_ITER};
use easpec_core::preprocess::DEFAULT_MAX_SIZE;
use easpec_core::specialize::DEFAULT_MAX_KAPPAS;
use easpec_core::state::fmt_location;
use easpec_core::{
    analyze, check_equivalence, emit_program, optimize_with, parse_kmap, parse_program,
    parse_residual, parse_state, preprocess, run, run_pipeline, specialize, Dialect, HaltReason,
    Mode, OptConfig, Pass, PipelineConfig, PipelineError, Program, ResidualProgram, SpecError,
    State, Value, CONTROL,
};

const DEFAULT_SEED: u64 = 0x5eed;

// Writes to stdout, ignoring a closed pipe.
macro_rules! out {
    ($($arg:tt)*) => {{
        use std::io::Write as _;
        let _ = write!(std::io::stdout(), $($arg)*);
    }};
}

macro_rules! outln {
    ($($arg:tt)*) => {{
        use std::io::Write as _;
        let _ = writeln!(std::io::stdout(), $($arg)*);
    }};
}

#[derive(Parser)]
#[command(
    name = "easpec",
    version,
    about = "Offline partial evaluator for evolving algebras"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Text,
    Tsv,
}

#[derive(Subcommand)]
enum Command {
    /// Run a program and print the locations changed at each step.
    Run {
        program: PathBuf,
        state: PathBuf,
        #[arg(long, default_value_t = 1000)]
        max_steps: usize,
    },
    /// Normalize a program into nested two-way conditionals over update blocks.
    Preprocess {
        input: PathBuf,
        #[arg(short, long)]
        output: Option<PathBuf>,
        #[arg(long, default_value_t = DEFAULT_MAX_SIZE)]
        max_size: usize,
    },
    /// Print the binding-time classification of every function.
    Bta {
        input: PathBuf,
        #[arg(long, value_delimiter = ',')]
        positive: Option<Vec<String>>,
        #[arg(long, value_enum, default_value = "text")]
        format: Format,
    },
    /// Specialize a program with respect to the positive part of a state.
    Specialize {
        input: PathBuf,
        init: PathBuf,
        #[arg(long, value_delimiter = ',')]
        positive: Option<Vec<String>>,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        kmap: Option<PathBuf>,
        #[arg(long, default_value_t = DEFAULT_MAX_KAPPAS)]
        max_kappas: usize,
        #[arg(long, default_value_t = DEFAULT_MAX_SIZE)]
        max_size: usize,
    },
    /// Optimize a residual program.
    Optimize {
        input: PathBuf,
        #[arg(long)]
        kmap: Option<PathBuf>,
        #[arg(short, long)]
        output: Option<PathBuf>,
        #[arg(long, value_delimiter = ',')]
        passes: Option<Vec<String>>,
        #[arg(long, value_delimiter = ',')]
        rewrites: Option<Vec<String>>,
        #[arg(long, default_value_t = DEFAULT_MAX_ITER)]
        max_iter: usize,
    },
    /// Preprocess, classify, specialize and optimize in one go.
    Pipeline {
        input: PathBuf,
        init: PathBuf,
        #[arg(long, value_delimiter = ',')]
        positive: Option<Vec<String>>,
        /// Directory for the intermediate and final programs.
        #[arg(long)]
        out_dir: Option<PathBuf>,
        #[arg(long, default_value_t = DEFAULT_MAX_SIZE)]
        max_size: usize,
        #[arg(long, default_value_t = DEFAULT_MAX_KAPPAS)]
        max_kappas: usize,
        #[arg(long, value_delimiter = ',')]
        passes: Option<Vec<String>>,
        #[arg(long, default_value_t = DEFAULT_MAX_ITER)]
        max_iter: usize,
    },
    /// Run two programs from the same states and compare observed functions.
    CheckEquiv {
        reference: PathBuf,
        candidate: PathBuf,
        /// State files, parsed against the reference program.
        #[arg(long = "state", required = true)]
        states: Vec<PathBuf>,
        #[arg(long, default_value_t = 1000)]
        max_steps: usize,
        /// Functions to compare; defaults to every name the two programs share.
        #[arg(long, value_delimiter = ',')]
        observed: Option<Vec<String>>,
        #[arg(long, default_value = "lockstep")]
        mode: Mode,
        /// Extra states per file with the observed integer locations redrawn.
        #[arg(long, default_value_t = 0)]
        random: usize,
        /// Seed for --random; EASPEC_SEED takes precedence.
        #[arg(long)]
        seed: Option<u64>,
    },
}

struct Failure {
    code: u8,
    message: String,
}

impl Failure {
    fn usage(message: impl Into<String>) -> Self {
        Failure {
            code: 1,
            message: message.into(),
        }
    }

    fn semantic(message: impl Into<String>) -> Self {
        Failure {
            code: 2,
            message: message.into(),
        }
    }

    fn budget(message: impl Into<String>) -> Self {
        Failure {
            code: 3,
            message: message.into(),
        }
    }
}

impl From<PipelineError> for Failure {
    fn from(e: PipelineError) -> Self {
        if e.is_budget() {
            Failure::budget(e.to_string())
        } else {
            Failure::semantic(e.to_string())
        }
    }
}

type Outcome = Result<u8, Failure>;

fn read(path: &Path) -> Result<String, Failure> {
    fs::read_to_string(path).map_err(|e| Failure::usage(format!("{}: {e}", path.display())))
}

fn write(path: &Path, text: &str) -> Result<(), Failure> {
    fs::write(path, text).map_err(|e| Failure::usage(format!("{}: {e}", path.display())))
}

/// Parses a source program, or a residual one if it mentions `K`.
fn load_program(path: &Path) -> Result<Program, Failure> {
    let text = read(path)?;
    match parse_program(&text) {
        Ok(p) => Ok(p),
        Err(e) => {
            parse_residual(&text).map_err(|_| Failure::usage(format!("{}:{e}", path.display())))
        }
    }
}

fn load_state(path: &Path, p: &Program) -> Result<State, Failure> {
    parse_state(&read(path)?, p.vocab())
        .map_err(|e| Failure::usage(format!("{}:{e}", path.display())))
}

fn load_residual(path: &Path, kmap: Option<&Path>) -> Result<ResidualProgram, Failure> {
    let p = parse_residual(&read(path)?)
        .map_err(|e| Failure::usage(format!("{}:{e}", path.display())))?;
    let entries = match kmap {
        Some(k) => {
            parse_kmap(&read(k)?).map_err(|e| Failure::usage(format!("{}:{e}", k.display())))?
        }
        None => Vec::new(),
    };
    let rp = ResidualProgram::from_program(&p, &entries)
        .map_err(|e| Failure::semantic(format!("{}: {e}", path.display())))?;
    rp.check_closure()
        .map_err(|e| Failure::semantic(format!("{}: {e}", path.display())))?;
    Ok(rp)
}

/// A start state for `p`: residual programs begin at their initial label
/// unless the state already sets `K`.
fn start_state(p: &Program, s: &State) -> Result<State, Failure> {
    let mut s = s.restrict(|n| p.vocab().contains(n));
    if p.dialect() == Dialect::Residual && s.get(CONTROL, &[]).is_undef() {
        let rp =
            ResidualProgram::from_program(p, &[]).map_err(|e| Failure::semantic(e.to_string()))?;
        s.set(CONTROL, vec![], Value::str(rp.initial));
    }
    Ok(s)
}

fn opt_config(passes: Option<Vec<String>>, max_iter: usize) -> Result<OptConfig, Failure> {
    let mut config = OptConfig {
        max_iter,
        ..OptConfig::default()
    };
    if let Some(names) = passes {
        config.passes = names
            .iter()
            .map(|n| n.parse::<Pass>())
            .collect::<Result<_, _>>()
            .map_err(Failure::usage)?;
    }
    Ok(config)
}

fn show_location(name: &str, args: &[Value]) -> String {
    let mut s = String::new();
    let _ = fmt_location(&mut s, name, args);
    s
}

fn cmd_run(program: &Path, state: &Path, max_steps: usize) -> Outcome {
    let p = load_program(program)?;
    let s0 = start_state(&p, &load_state(state, &p)?)?;
    let trace = run(&p, &s0, max_steps);
    for (i, pair) in trace.states.windows(2).enumerate() {
        let changes: Vec<String> = pair[0]
            .diff(&pair[1])
            .into_iter()
            .map(|(n, args, v)| format!("{} := {v}", show_location(&n, &args)))
            .collect();
        outln!("{}: {}", i + 1, changes.join(", "));
    }
    outln!("halt: {} after {} step(s)", trace.halt, trace.steps());
    Ok(match trace.halt {
        HaltReason::Error(_) => 2,
        _ => 0,
    })
}

fn cmd_bta(input: &Path, positive: Option<Vec<String>>, format: Format) -> Outcome {
    let mut p = load_program(input)?;
    if let Some(pos) = positive {
        p = p
            .with_positive_inputs(&pos)
            .map_err(|e| Failure::semantic(e.to_string()))?;
    }
    let cls = analyze(&p);
    for n in cls.names() {
        let arity = p.vocab().arity(n).unwrap_or(0);
        let polarity = cls.get(n).expect("classified");
        let reason = cls.reason(n).expect("classified");
        match format {
            Format::Text => outln!("{n}/{arity}: {polarity} ({reason})"),
            Format::Tsv => outln!("{n}\t{arity}\t{polarity}\t{reason}"),
        }
    }
    for w in &cls.warnings {
        eprintln!("warning: {w}");
    }
    Ok(0)
}

#[allow(clippy::too_many_arguments)]
fn cmd_specialize(
    input: &Path,
    init: &Path,
    positive: Option<Vec<String>>,
    out: Option<PathBuf>,
    kmap: Option<PathBuf>,
    max_kappas: usize,
    max_size: usize,
) -> Outcome {
    let mut p = load_program(input)?;
    if let Some(pos) = positive {
        p = p
            .with_positive_inputs(&pos)
            .map_err(|e| Failure::semantic(e.to_string()))?;
    }
    let s0 = load_state(init, &p)?;
    let pre = preprocess(&p, max_size).map_err(|e| Failure::budget(format!("preprocess: {e}")))?;
    let cls = analyze(&pre);
    let rp = specialize(&pre, &s0, &cls, max_kappas).map_err(|e| match e {
        SpecError::Budget { .. } => Failure::budget(format!("specialize: {e}")),
        e => Failure::semantic(format!("specialize: {e}")),
    })?;
    let text = emit_program(&rp.to_program());
    match out {
        Some(path) => write(&path, &text)?,
        None => out!("{text}"),
    }
    if let Some(path) = kmap {
        write(&path, &rp.kmap_text())?;
    }
    eprintln!("kappas: {}", rp.krules.len());
    Ok(0)
}

fn cmd_optimize(
    input: &Path,
    kmap: Option<PathBuf>,
    output: Option<PathBuf>,
    passes: Option<Vec<String>>,
    rewrites: Option<Vec<String>>,
    max_iter: usize,
) -> Outcome {
    let rp = load_residual(input, kmap.as_deref())?;
    let mut config = opt_config(passes, max_iter)?;
    if let Some(names) = rewrites {
        config.rewrites = RewriteSet::named(&names)
            .map_err(|n| Failure::usage(format!("unknown rewrite `{n}`")))?;
    }
    let (opt, report) = optimize_with(&rp, &config);
    let text = emit_program(&opt.to_program());
    match output {
        Some(path) => write(&path, &text)?,
        None => out!("{text}"),
    }
    eprintln!(
        "kappas: {} -> {}, size: {} -> {}, iterations: {}, merges: {}",
        rp.krules.len(),
        opt.krules.len(),
        report.size_before,
        report.size_after,
        report.iterations,
        report.merges()
    );
    Ok(0)
}

#[allow(clippy::too_many_arguments)]
fn cmd_pipeline(
    input: &Path,
    init: &Path,
    positive: Option<Vec<String>>,
    out_dir: Option<PathBuf>,
    max_size: usize,
    max_kappas: usize,
    passes: Option<Vec<String>>,
    max_iter: usize,
) -> Outcome {
    let p = load_program(input)?;
    let s0 = load_state(init, &p)?;
    let config = PipelineConfig {
        positive,
        max_size,
        max_kappas,
        opt: opt_config(passes, max_iter)?,
    };
    let out = run_pipeline(&p, &s0, &config)?;
    let summary = out.summary();
    if let Some(dir) = out_dir {
        fs::create_dir_all(&dir).map_err(|e| Failure::usage(format!("{}: {e}", dir.display())))?;
        write(
            &dir.join("preprocessed.ea"),
            &emit_program(&out.preprocessed),
        )?;
        write(
            &dir.join("residual.ea"),
            &emit_program(&out.residual.to_program()),
        )?;
        write(&dir.join("residual.kmap"), &out.residual.kmap_text())?;
        write(
            &dir.join("optimized.ea"),
            &emit_program(&out.optimized.to_program()),
        )?;
        write(&dir.join("report.txt"), &summary)?;
    }
    out!("{summary}");
    Ok(0)
}

fn seed(flag: Option<u64>) -> Result<u64, Failure> {
    match std::env::var("EASPEC_SEED") {
        Ok(v) => v
            .trim()
            .parse()
            .map_err(|_| Failure::usage(format!("EASPEC_SEED `{v}` is not an integer"))),
        Err(_) => Ok(flag.unwrap_or(DEFAULT_SEED)),
    }
}

/// `s` with every integer location of an observed function redrawn.
fn perturb(g: &mut Gen, s: &State, observed: &BTreeSet<String>) -> State {
    let mut out = s.clone();
    for (n, args, v) in s.entries() {
        if observed.contains(n) && matches!(v, Value::Int(_)) {
            out.set(n, args.to_vec(), Value::Int(g.below(21) as i64 - 10));
        }
    }
    out
}

#[allow(clippy::too_many_arguments)]
fn cmd_check_equiv(
    reference: &Path,
    candidate: &Path,
    states: &[PathBuf],
    max_steps: usize,
    observed: Option<Vec<String>>,
    mode: Mode,
    random: usize,
    seed_flag: Option<u64>,
) -> Outcome {
    let a = load_program(reference)?;
    let b = load_program(candidate)?;
    let observed: BTreeSet<String> = match observed {
        Some(names) => {
            for n in &names {
                if !a.vocab().contains(n) || !b.vocab().contains(n) {
                    return Err(Failure::usage(format!(
                        "`{n}` is not a function of both programs"
                    )));
                }
            }
            names.into_iter().collect()
        }
        None => a
            .vocab()
            .names()
            .filter(|n| *n != CONTROL && b.vocab().contains(n))
            .map(String::from)
            .collect(),
    };
    let seed = seed(seed_flag)?;
    outln!("seed: {seed}");
    let mut g = Gen::new(seed);
    let mut failures = 0;
    for path in states {
        let base = load_state(path, &a)?;
        let mut runs = vec![(path.display().to_string(), base.clone())];
        for i in 0..random {
            runs.push((
                format!("{}#{}", path.display(), i + 1),
                perturb(&mut g, &base, &observed),
            ));
        }
        for (name, s) in runs {
            let sa = start_state(&a, &s)?;
            let sb = start_state(&b, &s)?;
            match check_equivalence(&a, &sa, &b, &sb, &observed, max_steps, mode) {
                Ok(r) => outln!(
                    "{name}: agree ({} vs {} steps, {} / {})",
                    r.reference_steps,
                    r.candidate_steps,
                    r.reference_halt,
                    r.candidate_halt
                ),
                Err(d) => {
                    failures += 1;
                    outln!("{name}: DIVERGE {d}");
                }
            }
        }
    }
    Ok(if failures == 0 { 0 } else { 4 })
}

fn dispatch(cli: Cli) -> Outcome {
    match cli.command {
        Command::Run {
            program,
            state,
            max_steps,
        } => cmd_run(&program, &state, max_steps),
        Command::Preprocess {
            input,
            output,
            max_size,
        } => {
            let p = load_program(&input)?;
            let q = preprocess(&p, max_size).map_err(|e| Failure::budget(e.to_string()))?;
            let text = emit_program(&q);
            match output {
                Some(path) => write(&path, &text)?,
                None => out!("{text}"),
            }
            Ok(0)
        }
        Command::Bta {
            input,
            positive,
            format,
        } => cmd_bta(&input, positive, format),
        Command::Specialize {
            input,
            init,
            positive,
            out,
            kmap,
            max_kappas,
            max_size,
        } => cmd_specialize(&input, &init, positive, out, kmap, max_kappas, max_size),
        Command::Optimize {
            input,
            kmap,
            output,
            passes,
            rewrites,
            max_iter,
        } => cmd_optimize(&input, kmap, output, passes, rewrites, max_iter),
        Command::Pipeline {
            input,
            init,
            positive,
            out_dir,
            max_size,
            max_kappas,
            passes,
            max_iter,
        } => cmd_pipeline(
            &input, &init, positive, out_dir, max_size, max_kappas, passes, max_iter,
        ),
        Command::CheckEquiv {
            reference,
            candidate,
            states,
            max_steps,
            observed,
            mode,
            random,
            seed,
        } => cmd_check_equiv(
            &reference, &candidate, &states, max_steps, observed, mode, random, seed,
        ),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    match dispatch(cli) {
        Ok(code) => ExitCode::from(code),
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}
