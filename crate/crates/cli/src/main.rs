use std::collections::BTreeSet;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use kifsim::fragments::shipped_kb;
use kifsim::lexicon::{entry_to_rule, Lexicon, LexiconError};
use kifsim::rules::{detect_conflicts, ClosureOptions};
use kifsim::scenarios::{run_engine, run_ignition, EngineScenario, IgnitionScenario};
use kifsim::transition::{HaltReason, Trace};
use kifsim::{infer_closure, parse, print_term, KbError, KnowledgeBase, LoadError, Probe, SkolemRegistry, ValidationPolicy};

const EXIT_OK: u8 = 0;
const EXIT_FINDINGS: u8 = 1;
const EXIT_USAGE: u8 = 2;

#[derive(Parser)]
#[command(name = "kifsim", version, about = "SUO-KIF parser, ontology checker and microworld simulator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Print every top-level form of a KIF file canonically, one per line.
    Parse { file: PathBuf },
    /// Load KIF files, build the inferred closure and report conflicts.
    Validate {
        #[arg(required = true)]
        files: Vec<PathBuf>,
    },
    /// Run a built-in scenario and write its trace.
    Run {
        #[command(subcommand)]
        scenario: Scenario,
    },
    /// Validate lexicon entries against the shipped ontology.
    Lex {
        file: PathBuf,
        /// Also print the rule generated from each entry.
        #[arg(long)]
        emit_rules: bool,
        /// Extra ontology files loaded after the shipped fragments.
        #[arg(long, num_args = 1..)]
        kb: Vec<PathBuf>,
    },
}

#[derive(Subcommand)]
enum Scenario {
    /// Toggle an engine's ignition on and off.
    Ignition {
        #[arg(long)]
        toggles: u64,
        /// Connect the opposite engine state after the last toggle.
        #[arg(long)]
        sabotage: bool,
        #[command(flatten)]
        common: CommonRun,
    },
    /// Run the four-stroke engine until its fuel or switch stops it.
    Engine {
        #[arg(long)]
        fuel: u64,
        #[arg(long)]
        switch_off_at: Option<u64>,
        #[arg(long, default_value_t = 10_000, value_parser = clap::value_parser!(u64).range(1..))]
        max_steps: u64,
        #[command(flatten)]
        common: CommonRun,
    },
}

#[derive(Args)]
struct CommonRun {
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Trace file; standard output when omitted.
    #[arg(long)]
    trace: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = PolicyArg::Always)]
    policy: PolicyArg,
}

#[derive(Clone, Copy, ValueEnum)]
enum PolicyArg {
    Always,
    Skip,
}

impl From<PolicyArg> for ValidationPolicy {
    fn from(p: PolicyArg) -> Self {
        match p {
            PolicyArg::Always => ValidationPolicy::Always,
            PolicyArg::Skip => ValidationPolicy::SkipIfRepeatUnchanged,
        }
    }
}

/// A failure that ends the command with exit status 2.
struct Fatal(String);

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Parse { file } => cmd_parse(&file),
        Command::Validate { files } => cmd_validate(&files),
        Command::Run { scenario } => cmd_run(scenario),
        Command::Lex { file, emit_rules, kb } => cmd_lex(&file, emit_rules, &kb),
    };
    match result {
        Ok(code) => ExitCode::from(code),
        Err(Fatal(message)) => {
            eprintln!("{message}");
            ExitCode::from(EXIT_USAGE)
        }
    }
}

fn read(path: &Path) -> Result<String, Fatal> {
    fs::read_to_string(path).map_err(|e| Fatal(format!("{}: {e}", path.display())))
}

fn load_error(path: &Path, e: &LoadError) -> Fatal {
    match e {
        LoadError::SubclassCycle { .. } | LoadError::DuplicatePartition { .. } => {
            Fatal(format!("{}: {e}", path.display()))
        }
        _ => Fatal(format!("{}:{e}", path.display())),
    }
}

fn load_file(kb: &mut KnowledgeBase, path: &Path) -> Result<(), Fatal> {
    let text = read(path)?;
    let forms = parse(&text).map_err(|e| Fatal(format!("{}:{}: {e}", path.display(), e.span())))?;
    kb.load(&forms).map_err(|e| load_error(path, &e))
}

fn kb_error(e: KbError) -> Fatal {
    Fatal(e.to_string())
}

fn cmd_parse(path: &Path) -> Result<u8, Fatal> {
    let text = read(path)?;
    let forms = parse(&text).map_err(|e| Fatal(format!("{}:{}: {e}", path.display(), e.span())))?;
    let mut out = String::new();
    for f in &forms {
        out.push_str(&print_term(f));
        out.push('\n');
    }
    emit_stdout(&out)?;
    Ok(EXIT_OK)
}

fn cmd_validate(files: &[PathBuf]) -> Result<u8, Fatal> {
    let mut kb = KnowledgeBase::new();
    for f in files {
        load_file(&mut kb, f)?;
    }
    for w in kb.warnings() {
        eprintln!("warning: {w}");
    }
    let mut probes = Vec::new();
    let partitions: BTreeSet<String> = kb.partitions().map(|p| p.parent.to_string()).collect();
    for class in &partitions {
        probes.push(Probe::partition(&kb, class, None).map_err(kb_error)?);
    }
    probes.push(Probe::DomainConformance);

    let closure = infer_closure(
        &kb.ground_facts(),
        kb.rules(),
        &kb,
        &mut SkolemRegistry::new(),
        &ClosureOptions::default(),
    )
    .map_err(|e| Fatal(e.to_string()))?;
    let reports = detect_conflicts(&closure.store(), &probes, &kb, 0);
    let mut out = String::new();
    for r in &reports {
        out.push_str(&format!("{r}\n"));
    }
    emit_stdout(&out)?;
    Ok(if reports.is_empty() { EXIT_OK } else { EXIT_FINDINGS })
}

fn cmd_run(scenario: Scenario) -> Result<u8, Fatal> {
    let kb = shipped_kb().map_err(kb_error)?;
    let (trace, summary, common) = match scenario {
        Scenario::Ignition {
            toggles,
            sabotage,
            common,
        } => {
            let mut s = IgnitionScenario::toggles(toggles);
            s.sabotage = sabotage;
            let run = run_ignition(&kb, &s, common.seed, common.policy.into()).map_err(|e| Fatal(e.to_string()))?;
            (run.trace.clone(), run.summary(), common)
        }
        Scenario::Engine {
            fuel,
            switch_off_at,
            max_steps,
            common,
        } => {
            let mut s = EngineScenario::new(fuel, common.seed).policy(common.policy.into());
            s.max_steps = max_steps;
            s.switch_off_at_step = switch_off_at;
            let run = run_engine(&kb, &s).map_err(|e| Fatal(e.to_string()))?;
            (run.trace.clone(), run.summary(), common)
        }
    };
    write_trace(&trace, common.trace.as_deref())?;
    emit_stdout(&format!("{summary}\n"))?;
    Ok(if trace.halt == HaltReason::ConflictDetected {
        EXIT_FINDINGS
    } else {
        EXIT_OK
    })
}

fn write_trace(trace: &Trace, path: Option<&Path>) -> Result<(), Fatal> {
    let text = trace.render();
    match path {
        Some(p) => fs::write(p, text).map_err(|e| Fatal(format!("{}: {e}", p.display()))),
        None => emit_stdout(&text),
    }
}

fn lexicon_error(path: &Path, e: &LexiconError) -> Fatal {
    match e {
        LexiconError::Parse(p) => Fatal(format!("{}:{}: {p}", path.display(), p.span())),
        LexiconError::Malformed { .. } => Fatal(format!("{}:{e}", path.display())),
        _ => Fatal(format!("{}: {e}", path.display())),
    }
}

fn cmd_lex(path: &Path, emit_rules: bool, extra: &[PathBuf]) -> Result<u8, Fatal> {
    let text = read(path)?;
    let lexicon = Lexicon::parse(&text).map_err(|e| lexicon_error(path, &e))?;
    let mut kb = shipped_kb().map_err(kb_error)?;
    for f in extra {
        load_file(&mut kb, f)?;
    }
    let violations = lexicon.validate(&kb);
    let mut out = String::new();
    for (head, vs) in &violations {
        for v in vs {
            out.push_str(&format!("violation entry={head} {v}\n"));
        }
    }
    if emit_rules {
        for e in lexicon.entries() {
            let rule = entry_to_rule(e).map_err(|err| lexicon_error(path, &err))?;
            out.push_str(&print_term(&rule.to_term()));
            out.push('\n');
        }
    }
    emit_stdout(&out)?;
    Ok(if violations.is_empty() { EXIT_OK } else { EXIT_FINDINGS })
}

fn emit_stdout(text: &str) -> Result<(), Fatal> {
    let mut stdout = std::io::stdout().lock();
    stdout
        .write_all(text.as_bytes())
        .and_then(|_| stdout.flush())
        .map_err(|e| Fatal(format!("stdout: {e}")))
}
