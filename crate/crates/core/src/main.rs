use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use handlecalc::corpus::corpus_run;
use handlecalc::render::{diagram_dot, finger_graph_dot, tree_dot};
use handlecalc::script::{asserted_homology, run_script};
use handlecalc::simplifier::{stabilization_plan, verify_plan, Outcome};
use handlecalc::textio::{parse_diagram, parse_document, parse_middle, parse_script, parse_tree, serialize_diagram, Document};
use handlecalc::{KirbyDiagram, RibbonDescriptor, Side};

#[derive(Parser)]
#[command(name = "handlecalc", version, about = "Kirby-diagram moves, Casson trees and stabilization plans")]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Parse a file of any kind and validate it.
    Check { file: PathBuf },
    /// Run a move script on a diagram.
    Apply {
        diagram: PathBuf,
        script: PathBuf,
        /// Print Euler characteristic, signature and H1 after every step.
        #[arg(long)]
        trace_invariants: bool,
    },
    /// First homology of a boundary component.
    Homology {
        diagram: PathBuf,
        #[arg(long, default_value = "plus")]
        side: Side,
    },
    /// Print the dual handle decomposition.
    Dualize { diagram: PathBuf },
    /// Query a signed tree.
    Tree(TreeArgs),
    /// Ribbon descriptors: positivity and stabilization plans.
    Ribbon {
        #[command(subcommand)]
        command: RibbonCmd,
    },
    /// Bundled example files.
    Corpus {
        #[command(subcommand)]
        command: CorpusCmd,
    },
    /// Emit a graph description.
    Render {
        file: PathBuf,
        #[arg(long, required = true)]
        dot: bool,
    },
}

#[derive(Args)]
#[group(required = true, multiple = false)]
struct TreeQuery {
    #[arg(long)]
    positive: bool,
    #[arg(long)]
    strict: bool,
    #[arg(long)]
    prune_depth: bool,
    #[arg(long)]
    cost: bool,
    #[arg(long, value_name = "N")]
    truncate: Option<u32>,
}

#[derive(Args)]
struct TreeArgs {
    file: PathBuf,
    #[command(flatten)]
    query: TreeQuery,
}

#[derive(Subcommand)]
enum RibbonCmd {
    Positivity { file: PathBuf },
    Plan {
        file: PathBuf,
        /// Replay the plan and report the first failing step.
        #[arg(long)]
        verify: bool,
    },
}

#[derive(Subcommand)]
enum CorpusCmd {
    Run,
}

/// Exit status of a command that did not crash.
enum Fail {
    /// Validation or assertion failure.
    Check(String),
    /// Unreadable or unparsable input.
    Parse(String),
}

type CmdResult = Result<(), Fail>;

fn read(path: &Path) -> Result<String, Fail> {
    fs::read_to_string(path).map_err(|e| Fail::Parse(format!("{}: {e}", path.display())))
}

fn parse_err(path: &Path) -> impl Fn(handlecalc::textio::ParseError) -> Fail + '_ {
    move |e| Fail::Parse(format!("{}: {e}", path.display()))
}

fn load_diagram(path: &Path) -> Result<KirbyDiagram, Fail> {
    let d = parse_diagram(&read(path)?).map_err(parse_err(path))?;
    let v = d.validate();
    if let Some(first) = v.first() {
        return Err(Fail::Check(format!("{}: invalid diagram: {first}", path.display())));
    }
    Ok(d)
}

fn load_ribbon(path: &Path) -> Result<RibbonDescriptor, Fail> {
    let r = parse_middle(&read(path)?).map_err(parse_err(path))?;
    let v = r.validate();
    if !v.is_empty() {
        return Err(Fail::Check(format!("{}: invalid descriptor: {}", path.display(), v.join("; "))));
    }
    Ok(r)
}

fn check(path: &Path) -> CmdResult {
    let doc = parse_document(&read(path)?).map_err(parse_err(path))?;
    let (kind, name, problems): (&str, String, Vec<String>) = match &doc {
        Document::Diagram(d) => ("diagram", d.name.clone(), d.validate().iter().map(|v| v.to_string()).collect()),
        Document::Tree(t) => ("tree", t.name.clone(), t.validate()),
        Document::Middle(r) => ("middle", r.middle.name.clone(), r.validate()),
        Document::Script(s) => ("script", s.name.clone().unwrap_or_default(), Vec::new()),
    };
    println!("kind={kind}");
    println!("name={name}");
    for p in &problems {
        println!("violation={p:?}");
    }
    println!("valid={}", problems.is_empty());
    if problems.is_empty() {
        Ok(())
    } else {
        Err(Fail::Check(format!("{} violation(s)", problems.len())))
    }
}

fn apply(diagram: &Path, script: &Path, trace: bool) -> CmdResult {
    let d = load_diagram(diagram)?;
    let s = parse_script(&read(script)?).map_err(parse_err(script))?;
    let run = run_script(&d, &s, trace).map_err(|e| Fail::Check(e.to_string()))?;
    for r in &run.trace {
        println!("{r}");
    }
    println!("steps={}", s.commands.len());
    print!("{}", serialize_diagram(&run.diagram));
    Ok(())
}

fn homology(path: &Path, side: Side) -> CmdResult {
    let d = load_diagram(path)?;
    let h = d.boundary_homology(side).map_err(|e| Fail::Check(e.to_string()))?;
    println!("side={side}");
    println!("h1={}", asserted_homology(&d, side).expect("computed above"));
    println!("before_3handles={}", h.group);
    println!("three_handles={}", h.three_handles);
    println!("caveat={}", h.caveat);
    Ok(())
}

fn tree(args: &TreeArgs) -> CmdResult {
    let path = &args.file;
    let t = parse_tree(&read(path)?).map_err(parse_err(path))?;
    let v = t.validate();
    if !v.is_empty() {
        return Err(Fail::Check(format!("{}: invalid tree: {}", path.display(), v.join("; "))));
    }
    let q = &args.query;
    let err = |e: handlecalc::tree::TreeError| Fail::Check(e.to_string());
    if q.positive {
        let b = t.positive_branch().map_err(err)?;
        println!("positive={}", b.is_some());
        if let Some(b) = b {
            println!("branch={:?}", b.describe(&t));
        }
    } else if q.strict {
        println!("strictly_positive={}", t.is_strictly_positive());
    } else if q.prune_depth {
        println!("prune_depth={}", t.prune_depth());
    } else if q.cost {
        println!("blowups={}", t.kuga_blowup_cost().map_err(err)?);
    } else if let Some(n) = q.truncate {
        print!("{}", handlecalc::textio::serialize_tree(&t.truncate(n).map_err(err)?));
    }
    Ok(())
}

fn positivity(path: &Path) -> CmdResult {
    let r = load_ribbon(path)?;
    let d = r.is_positive_ribbon();
    println!("positive={}", d.is_positive());
    if let Some(w) = &d.witness {
        println!("witness={w}");
    }
    for (l, why) in &d.refusals {
        println!("refused={l}:{why}");
    }
    Ok(())
}

fn plan(path: &Path, verify: bool) -> CmdResult {
    let r = load_ribbon(path)?;
    let p = stabilization_plan(&r).map_err(|e| Fail::Check(e.to_string()))?;
    match &p.outcome {
        Outcome::Product => println!("outcome=product"),
        Outcome::PositiveObstruction { witness } => println!("outcome=positive witness={witness}"),
    }
    println!("k={}", p.k);
    println!("blowups={}", p.blowups);
    for (i, s) in p.steps.iter().enumerate() {
        println!("step={i} {s}");
    }
    println!("interpretation={:?}", p.interpretation());
    if verify {
        match verify_plan(&r, &p) {
            Ok(()) => println!("verified=true"),
            Err(e) => {
                println!("verified=false");
                return Err(Fail::Check(e.to_string()));
            }
        }
    }
    Ok(())
}

fn render(path: &Path) -> CmdResult {
    match parse_document(&read(path)?).map_err(parse_err(path))? {
        Document::Diagram(d) => print!("{}", diagram_dot(&d)),
        Document::Tree(t) => print!("{}", tree_dot(&t)),
        Document::Middle(r) => print!("{}", finger_graph_dot(&r.middle)),
        Document::Script(_) => return Err(Fail::Check("scripts have no graph rendering".into())),
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Cmd::Check { file } => check(file),
        Cmd::Apply { diagram, script, trace_invariants } => apply(diagram, script, *trace_invariants),
        Cmd::Homology { diagram, side } => homology(diagram, *side),
        Cmd::Dualize { diagram } => load_diagram(diagram).and_then(|d| {
            let dual = d.dualize().map_err(|e| Fail::Check(e.to_string()))?;
            print!("{}", serialize_diagram(&dual));
            Ok(())
        }),
        Cmd::Tree(args) => tree(args),
        Cmd::Ribbon { command: RibbonCmd::Positivity { file } } => positivity(file),
        Cmd::Ribbon { command: RibbonCmd::Plan { file, verify } } => plan(file, *verify),
        Cmd::Corpus { command: CorpusCmd::Run } => {
            let report = corpus_run();
            println!("{report}");
            if report.passed() {
                Ok(())
            } else {
                Err(Fail::Check("corpus run failed".into()))
            }
        }
        Cmd::Render { file, .. } => render(file),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(Fail::Check(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
        Err(Fail::Parse(msg)) => {
            eprintln!("parse error: {msg}");
            ExitCode::from(2)
        }
    }
}
