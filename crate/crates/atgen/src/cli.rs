//! The `atgen` command-line surface.
//!
//! Verbs: `paths` (enumerate breach paths of a system spec), `generate`
//! (synthesise a tree from a spec, a paths file, or an attacks+goals pair),
//! `factor` (factorise an algebraic expression), `check` (soundness and
//! labelling report for a tree), `render` (DOT or text).
//!
//! Exit codes: 0 success, 1 check failure, 2 input error, 3 generation
//! infeasible (no common goal). The environment variable `ATGEN_SEED` is
//! reserved; all algorithms are deterministic and ignore it.

use std::fs;
use std::path::{Path as FsPath, PathBuf};

use clap::{Args, Parser, Subcommand};

use crate::factor::{Mode, SplitStrategy};
use crate::format;
use crate::goals::{GoalError, GoalRelation};
use crate::kripke::{enumerate_paths, lts_goal_relation, path_attacks, Path};
use crate::render;
use crate::sp::SpGraphSet;
use crate::synth::{self, SynthError};
use crate::tree::AttackTree;

#[derive(Parser)]
#[command(
    name = "atgen",
    version,
    about = "SAND attack-tree synthesis from attack graphs and system models"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Bounds {
    /// Maximum number of transitions per path.
    #[arg(long, default_value_t = 10)]
    max_depth: usize,
    /// Maximum number of paths to enumerate.
    #[arg(long, default_value_t = 1000)]
    max_paths: usize,
}

#[derive(Args)]
struct AttackInput {
    /// System spec JSON; paths are enumerated and transformed into attacks.
    #[arg(long)]
    spec: Option<PathBuf>,
    /// Pre-enumerated paths JSON (as produced by `atgen paths`).
    #[arg(long)]
    paths: Option<PathBuf>,
    /// Attacks JSON (an array of SP graphs); requires --goals.
    #[arg(long)]
    attacks: Option<PathBuf>,
    /// Goal-relation JSON; requires --attacks.
    #[arg(long)]
    goals: Option<PathBuf>,
    #[command(flatten)]
    bounds: Bounds,
}

#[derive(Subcommand)]
enum Command {
    /// Enumerate breach paths of a system spec as JSON.
    Paths {
        /// System spec JSON.
        #[arg(long)]
        spec: PathBuf,
        #[command(flatten)]
        bounds: Bounds,
    },
    /// Generate an optimally-labelled attack tree.
    Generate {
        #[command(flatten)]
        input: AttackInput,
        /// Write the tree JSON here instead of stdout.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Factorise an algebraic expression read from a file.
    Factor {
        /// Expression file, e.g. `a.a.a + b.a.a + a.b.b + b.b.b`.
        #[arg(long)]
        expr: PathBuf,
        /// Treat the product as commutative.
        #[arg(long)]
        commutative: bool,
        /// Cube splitting in commutative mode: `full` or `lex`.
        #[arg(long, default_value = "full")]
        split_strategy: String,
    },
    /// Check a tree for soundness and label correctness/optimality.
    Check {
        /// Tree JSON.
        #[arg(long)]
        tree: PathBuf,
        #[command(flatten)]
        input: AttackInput,
    },
    /// Render a tree to DOT or an indented outline.
    Render {
        /// Tree JSON.
        #[arg(long)]
        tree: PathBuf,
        /// Output format: `dot` or `text`.
        #[arg(long, default_value = "dot")]
        format: String,
    },
}

enum CliError {
    Input(String),
    CheckFailed,
    Infeasible(String),
}

impl CliError {
    fn code(&self) -> i32 {
        match self {
            CliError::CheckFailed => 1,
            CliError::Input(_) => 2,
            CliError::Infeasible(_) => 3,
        }
    }
}

impl From<format::FormatError> for CliError {
    fn from(e: format::FormatError) -> Self {
        CliError::Input(e.to_string())
    }
}

impl From<SynthError> for CliError {
    fn from(e: SynthError) -> Self {
        match e {
            SynthError::Goal(GoalError::NoCommonGoal) => {
                CliError::Infeasible("no common goal".into())
            }
            other => CliError::Infeasible(other.to_string()),
        }
    }
}

pub fn run() -> i32 {
    let cli = Cli::parse();
    match dispatch(cli.command) {
        Ok(()) => 0,
        Err(e) => {
            match &e {
                CliError::Input(msg) | CliError::Infeasible(msg) => eprintln!("error: {msg}"),
                CliError::CheckFailed => {}
            }
            e.code()
        }
    }
}

fn read(path: &FsPath) -> Result<String, CliError> {
    fs::read_to_string(path).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))
}

fn read_json(path: &FsPath) -> Result<serde_json::Value, CliError> {
    let text = read(path)?;
    serde_json::from_str(&text).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))
}

fn load_paths(spec: &FsPath, bounds: &Bounds) -> Result<Vec<Path>, CliError> {
    let sys = format::parse_system(&read(spec)?)?;
    Ok(enumerate_paths(&sys, bounds.max_depth, bounds.max_paths))
}

/// Resolve an attack input to (relation, attack set).
fn load_input(input: &AttackInput) -> Result<(GoalRelation, SpGraphSet), CliError> {
    let modes = [
        input.spec.is_some(),
        input.paths.is_some(),
        input.attacks.is_some(),
    ];
    if modes.iter().filter(|m| **m).count() != 1 {
        return Err(CliError::Input(
            "pass exactly one of --spec, --paths, or --attacks with --goals".into(),
        ));
    }
    if input.attacks.is_some() != input.goals.is_some() {
        return Err(CliError::Input("--attacks and --goals go together".into()));
    }
    let paths = if let Some(spec) = &input.spec {
        Some(load_paths(spec, &input.bounds)?)
    } else if let Some(paths_file) = &input.paths {
        Some(format::paths_from_value(&read_json(paths_file)?)?)
    } else {
        None
    };
    match paths {
        Some(paths) => {
            if paths.is_empty() {
                return Err(CliError::Infeasible("no breach paths within bounds".into()));
            }
            let relation = lts_goal_relation(&paths).map_err(|e| CliError::Input(e.to_string()))?;
            let attacks = path_attacks(&paths).map_err(|e| CliError::Input(e.to_string()))?;
            Ok((relation, attacks))
        }
        None => {
            let attacks = format::attacks_from_value(&read_json(
                input.attacks.as_ref().expect("mode checked"),
            )?)?;
            let relation =
                format::relation_from_value(&read_json(input.goals.as_ref().expect("mode"))?)?;
            Ok((relation, attacks))
        }
    }
}

fn dispatch(cmd: Command) -> Result<(), CliError> {
    match cmd {
        Command::Paths { spec, bounds } => {
            let paths = load_paths(&spec, &bounds)?;
            print!("{}", format::to_pretty(&format::paths_to_value(&paths)));
            Ok(())
        }
        Command::Generate { input, out } => {
            let (relation, attacks) = load_input(&input)?;
            let tree = synth::tree_generation(&relation, &attacks)?;
            let rendered = format::to_pretty(&format::tree_to_value(&tree));
            match out {
                Some(path) => fs::write(&path, rendered)
                    .map_err(|e| CliError::Input(format!("{}: {e}", path.display())))?,
                None => print!("{rendered}"),
            }
            Ok(())
        }
        Command::Factor {
            expr,
            commutative,
            split_strategy,
        } => {
            let mode = if commutative {
                Mode::Commutative
            } else {
                Mode::NonCommutative
            };
            let strategy = match split_strategy.as_str() {
                "full" => SplitStrategy::Full,
                "lex" => SplitStrategy::Lex,
                other => {
                    return Err(CliError::Input(format!(
                        "unknown split strategy `{other}` (expected full or lex)"
                    )))
                }
            };
            let ast = format::parse_expression(&read(&expr)?)?;
            let sop = ast.to_sop(mode)?;
            println!("{}", sop.factorise(strategy));
            Ok(())
        }
        Command::Check { tree, input } => {
            let tree = format::tree_from_value(&read_json(&tree)?)?;
            let (relation, attacks) = load_input(&input)?;
            if check_report(&tree, &relation, &attacks) {
                Ok(())
            } else {
                Err(CliError::CheckFailed)
            }
        }
        Command::Render { tree, format: fmt } => {
            let tree = format::tree_from_value(&read_json(&tree)?)?;
            match fmt.as_str() {
                "dot" => print!("{}", render::dot(&tree)),
                "text" => print!("{}", render::text(&tree)),
                other => {
                    return Err(CliError::Input(format!(
                        "unknown format `{other}` (expected dot or text)"
                    )))
                }
            }
            Ok(())
        }
    }
}

/// Print the three-part check report; true when all checks pass.
fn check_report(tree: &AttackTree, relation: &GoalRelation, attacks: &SpGraphSet) -> bool {
    let mut ok = true;

    let semantics = tree.semantics();
    if semantics == *attacks {
        println!("soundness: PASS ({} attacks)", attacks.len());
    } else {
        ok = false;
        println!("soundness: FAIL (unsound)");
        if let Some(extra) = semantics.difference(attacks).next() {
            println!("  tree covers an attack outside the input set: {extra}");
        }
        if let Some(missing) = attacks.difference(&semantics).next() {
            println!("  input attack not covered by the tree: {missing}");
        }
    }

    let violations = relation.correctness_violations(tree);
    if violations.is_empty() {
        println!("correctly labelled: PASS");
    } else {
        ok = false;
        let first = &violations[0];
        println!("correctly labelled: FAIL ({} violations)", violations.len());
        println!(
            "  attack {} does not satisfy label {} at subtree {}",
            first.attack,
            first.subtree.top(),
            first.subtree
        );
    }

    if ok {
        match relation.optimality_violations(tree) {
            Ok(violations) if violations.is_empty() => println!("optimally labelled: PASS"),
            Ok(violations) => {
                ok = false;
                let first = &violations[0];
                println!("optimally labelled: FAIL ({} violations)", violations.len());
                println!(
                    "  label {} at subtree {} is beaten by {}",
                    first.subtree.top(),
                    first.subtree,
                    first.better
                );
            }
            Err(e) => {
                ok = false;
                println!("optimally labelled: FAIL ({e})");
            }
        }
    } else {
        println!("optimally labelled: SKIPPED (correctness failed)");
    }
    ok
}
