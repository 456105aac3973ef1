//! The `bptg` command line.
//!
//! Exit codes: 0 success, 1 usage, 2 parse or validation error, 3 internal
//! invariant breach (including oracle mismatches).

use std::collections::BTreeMap;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use bptg::abstraction::{build_border_abstraction, export_dot, reachable_subgraph};
use bptg::arena::{bi_valued_profile, make_bounded, validate_arena, Element, ExtValue, Player, PtgArena};
use bptg::finite_solver::{brute_force_values, random_game, solve_finite, OracleLimits};
use bptg::io::{parse_arena, parse_rational, ArenaDocument};
use bptg::simulation::{play_cost, run_match, trace, TimedStrategy};
use bptg::synthesis::{RandomUniformStrategy, SynthesisError};
use bptg::{decide_objective, solve_ptg, Comparator, Rational, RationalSolution};
use clap::{Parser, Subcommand, ValueEnum};
use serde::Serialize;

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_INPUT: i32 = 2;
pub const EXIT_INTERNAL: i32 = 3;

#[derive(Parser, Debug)]
#[command(name = "bptg", version, about = "Solve one-clock bi-valued priced timed games")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Compute the value at a border configuration and the strategies.
    Solve {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        location: String,
        /// A border constant, as an integer or p/q.
        #[arg(long, value_parser = rational)]
        valuation: Rational,
        #[arg(long, value_parser = rational)]
        epsilon: Rational,
        /// Write the JSON result here instead of stdout.
        #[arg(long)]
        json: Option<PathBuf>,
        /// Thresholds K for the verdicts; defaults to the value itself.
        #[arg(long = "bound")]
        bounds: Vec<i64>,
    },
    /// Build the border abstraction of the (bounded) arena.
    Abstract {
        #[arg(long)]
        input: PathBuf,
        /// Write DOT here instead of stdout.
        #[arg(long)]
        dot: Option<PathBuf>,
        /// Keep only what is reachable from L@M, the location L at border M.
        #[arg(long)]
        from: Option<String>,
    },
    /// Play the synthesized strategies and print the trace.
    Simulate {
        #[arg(long)]
        input: PathBuf,
        #[arg(long, value_parser = rational)]
        epsilon: Rational,
        #[arg(long)]
        steps: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, value_enum, default_value_t = Adversary::Optimal)]
        adversary: Adversary,
        /// The player that always plays its ε-optimal strategy.
        #[arg(long, default_value_t = 1, value_parser = clap::value_parser!(u8).range(1..=2))]
        protagonist: u8,
        /// Start location; defaults to the first declared one.
        #[arg(long)]
        location: Option<String>,
        #[arg(long, value_parser = rational, default_value = "0")]
        valuation: Rational,
    },
    /// Compare value iteration against exhaustive strategy enumeration.
    OracleCheck {
        #[arg(long)]
        count: u64,
        #[arg(long, default_value_t = 6)]
        max_vertices: usize,
        #[arg(long, default_value_t = 3)]
        max_actions: usize,
        #[arg(long, default_value_t = 5)]
        max_weight: i64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Adversary {
    Optimal,
    RandomUniform,
}

fn rational(s: &str) -> Result<Rational, String> {
    parse_rational(s)
}

/// A failure with its exit code.
#[derive(Debug)]
struct Failure {
    code: i32,
    message: String,
}

impl Failure {
    fn input(message: impl Into<String>) -> Self {
        Failure {
            code: EXIT_INPUT,
            message: message.into(),
        }
    }

    fn internal(message: impl Into<String>) -> Self {
        Failure {
            code: EXIT_INTERNAL,
            message: message.into(),
        }
    }
}

/// Runs the command line `argv` (program name first), writing to `out` and
/// `err`, and returns the exit code.
pub fn run<S: AsRef<str>>(argv: &[S], out: &mut dyn Write, err: &mut dyn Write) -> i32 {
    let cli = match Cli::try_parse_from(argv.iter().map(AsRef::as_ref)) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            let rendered = e.render().to_string();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    let _ = write!(out, "{rendered}");
                    EXIT_OK
                }
                _ => {
                    let _ = write!(err, "{rendered}");
                    EXIT_USAGE
                }
            };
        }
    };
    let result = match cli.command {
        Command::Solve {
            input,
            location,
            valuation,
            epsilon,
            json,
            bounds,
        } => solve(&input, &location, &valuation, &epsilon, json.as_deref(), &bounds, out),
        Command::Abstract { input, dot, from } => abstract_cmd(&input, dot.as_deref(), from.as_deref(), out),
        Command::Simulate {
            input,
            epsilon,
            steps,
            seed,
            adversary,
            protagonist,
            location,
            valuation,
        } => simulate(
            &input,
            &epsilon,
            steps,
            seed,
            adversary,
            protagonist,
            location.as_deref(),
            &valuation,
            out,
        ),
        Command::OracleCheck {
            count,
            max_vertices,
            max_actions,
            max_weight,
            seed,
        } => oracle_check(count, max_vertices, max_actions, max_weight, seed, out),
    };
    match result {
        Ok(code) => code,
        Err(f) => {
            let _ = writeln!(err, "error: {}", f.message);
            f.code
        }
    }
}

/// Reads, parses and validates an arena file.
fn load(path: &Path) -> Result<ArenaDocument, Failure> {
    let text = fs::read_to_string(path).map_err(|e| Failure::input(format!("{}: {e}", path.display())))?;
    let doc = parse_arena(&text).map_err(|e| Failure::input(format!("{}: {e}", path.display())))?;
    let violations = validate_arena(&doc.arena);
    if !violations.is_empty() {
        let lines: Vec<String> = violations.iter().map(|v| format!("{}: {}", path.display(), doc.describe(v))).collect();
        return Err(Failure::input(lines.join("\n")));
    }
    if let Err(rejection) = bi_valued_profile(&doc.arena) {
        let lines: Vec<String> = doc
            .arena
            .locations
            .iter()
            .filter(|l| !doc.arena.is_target(&l.id))
            .filter_map(|l| doc.line_of(&Element::Location(l.id.clone())).map(|n| format!("line {n}: {} rate={}", l.id, l.rate)))
            .collect();
        return Err(Failure::input(format!(
            "{}: {rejection}\n{}",
            path.display(),
            lines.join("\n")
        )));
    }
    Ok(doc)
}

fn synthesis_failure(doc: &ArenaDocument, location: &str, e: SynthesisError) -> Failure {
    match e {
        SynthesisError::NotABorder { valuation, borders } => Failure::input(format!(
            "valuation {valuation} is not a border of the arena. Values and strategies are computed \
             on the border abstraction, so solve only starts at a constant of the arena: {}",
            borders.iter().map(ToString::to_string).collect::<Vec<_>>().join(", ")
        )),
        e @ (SynthesisError::UnknownLocation(_) | SynthesisError::OutsideInvariant { .. } | SynthesisError::BadEpsilon(_)) => {
            match doc.line_of(&Element::Location(location.to_string())) {
                Some(n) => Failure::input(format!("{e} (location declared on line {n})")),
                None => Failure::input(e.to_string()),
            }
        }
        e => Failure::internal(e.to_string()),
    }
}

#[derive(Serialize)]
struct SolveReport {
    value: ExtValue,
    eta: Option<String>,
    #[serde(rename = "L")]
    steps: Option<usize>,
    strategy_p2: BTreeMap<String, String>,
    verdicts: BTreeMap<String, String>,
}

fn report(sol: &RationalSolution, bounds: &[i64]) -> SolveReport {
    let g = &sol.abstraction.graph;
    let reach = g.reachable_from(sol.start);
    let strategy_p2 = (0..g.len())
        .filter(|&v| reach[v] && g.owner(v) == Player::Two && !g.is_target(v))
        .filter_map(|v| {
            let a = sol.result.p2.action(v)?;
            Some((g.vertex(v).id.clone(), g.action_name(a).to_string()))
        })
        .collect();
    let bounds: Vec<i64> = match (bounds, sol.value) {
        ([], ExtValue::Finite(v)) => vec![v],
        (b, _) => b.to_vec(),
    };
    let mut verdicts = BTreeMap::new();
    for k in bounds {
        for cmp in Comparator::ALL {
            verdicts.insert(format!("{}{k}", cmp.symbol()), decide_objective(sol.value, cmp, k).to_string());
        }
    }
    SolveReport {
        value: sol.value,
        eta: sol.plan.as_ref().map(|p| p.eta.to_string()),
        steps: sol.plan.as_ref().map(|p| p.steps),
        strategy_p2,
        verdicts,
    }
}

fn solve(
    input: &Path,
    location: &str,
    valuation: &Rational,
    epsilon: &Rational,
    json: Option<&Path>,
    bounds: &[i64],
    out: &mut dyn Write,
) -> Result<i32, Failure> {
    let doc = load(input)?;
    let sol = solve_ptg(&doc.arena, location, valuation, epsilon).map_err(|e| synthesis_failure(&doc, location, e))?;
    let mut text = serde_json::to_string_pretty(&report(&sol, bounds)).map_err(|e| Failure::internal(e.to_string()))?;
    text.push('\n');
    match json {
        Some(path) => fs::write(path, &text).map_err(|e| Failure::input(format!("{}: {e}", path.display())))?,
        None => out.write_all(text.as_bytes()).map_err(|e| Failure::internal(e.to_string()))?,
    }
    Ok(EXIT_OK)
}

fn bounded_arena(doc: &ArenaDocument) -> PtgArena {
    make_bounded(&doc.arena)
}

fn abstract_cmd(input: &Path, dot: Option<&Path>, from: Option<&str>, out: &mut dyn Write) -> Result<i32, Failure> {
    let doc = load(input)?;
    let abs = build_border_abstraction(&bounded_arena(&doc)).map_err(|e| Failure::internal(e.to_string()))?;
    let graph = match from {
        None => abs.graph,
        Some(spec) => {
            let (loc, m) = spec
                .split_once('@')
                .ok_or_else(|| Failure::input(format!("--from expects LOCATION@BORDER, got {spec:?}")))?;
            let id = format!("({loc},{{{m}}})");
            reachable_subgraph(&abs.graph, &id).map_err(|_| {
                Failure::input(format!(
                    "no abstract vertex {id}; {m} must be a border inside the invariant of {loc}"
                ))
            })?
        }
    };
    let text = export_dot(&graph);
    let write = |w: &mut dyn Write, s: &str| w.write_all(s.as_bytes()).map_err(|e| Failure::internal(e.to_string()));
    match dot {
        Some(path) => {
            fs::write(path, &text).map_err(|e| Failure::input(format!("{}: {e}", path.display())))?;
            write(out, &format!("{} vertices, {} edges\n", graph.len(), graph.edge_count()))?;
        }
        None => write(out, &text)?,
    }
    Ok(EXIT_OK)
}

#[allow(clippy::too_many_arguments)]
fn simulate(
    input: &Path,
    epsilon: &Rational,
    steps: usize,
    seed: u64,
    adversary: Adversary,
    protagonist: u8,
    location: Option<&str>,
    valuation: &Rational,
    out: &mut dyn Write,
) -> Result<i32, Failure> {
    let doc = load(input)?;
    let location = match location {
        Some(l) => l.to_string(),
        None => doc.arena.locations[0].id.clone(),
    };
    let sol = solve_ptg(&doc.arena, &location, valuation, epsilon).map_err(|e| synthesis_failure(&doc, &location, e))?;
    let (Some(p1), Some(p2), Some(plan)) = (sol.p1_strategy(), sol.p2_strategy(), sol.plan.as_ref()) else {
        return Err(Failure::input(format!(
            "the value at ({location}, {valuation}) is {}; strategies exist only for finite values",
            sol.value
        )));
    };
    let random_p1;
    let random_p2;
    let (s1, s2): (&dyn TimedStrategy<Rational>, &dyn TimedStrategy<Rational>) = match (adversary, protagonist) {
        (Adversary::Optimal, _) => (&p1, &p2),
        (Adversary::RandomUniform, 1) => {
            random_p2 = RandomUniformStrategy::new(&sol, plan.eta.clone(), seed, true);
            (&p1, &random_p2)
        }
        (Adversary::RandomUniform, _) => {
            random_p1 = RandomUniformStrategy::new(&sol, plan.eta.clone(), seed, false);
            (&random_p1, &p2)
        }
    };
    let play = run_match(&sol.arena, s1, s2, sol.start_configuration(), steps).map_err(|e| {
        Failure::internal(format!("{e}\n{}", trace(&e.prefix)))
    })?;
    let mut text = trace(&play);
    let cost = play_cost(&sol.arena, &play);
    let status = if play.truncated {
        " (step limit reached)"
    } else if play.stuck {
        " (no move available)"
    } else {
        ""
    };
    text.push_str(&format!("cost {cost}{status}\nvalue {}\neta {}\n", sol.value, plan.eta));
    out.write_all(text.as_bytes()).map_err(|e| Failure::internal(e.to_string()))?;
    Ok(EXIT_OK)
}

#[derive(Serialize)]
struct Mismatch {
    seed: u64,
    vertex: String,
    solver: ExtValue,
    oracle: ExtValue,
}

#[derive(Serialize)]
struct OracleReport {
    count: u64,
    vertices: usize,
    mismatches: usize,
    failures: Vec<Mismatch>,
}

fn oracle_check(
    count: u64,
    max_vertices: usize,
    max_actions: usize,
    max_weight: i64,
    seed: u64,
    out: &mut dyn Write,
) -> Result<i32, Failure> {
    let limits = OracleLimits::default();
    if max_vertices == 0 || max_vertices > limits.max_vertices {
        return Err(Failure {
            code: EXIT_USAGE,
            message: format!("--max-vertices must be between 1 and {}", limits.max_vertices),
        });
    }
    let mut report = OracleReport {
        count,
        vertices: 0,
        mismatches: 0,
        failures: Vec::new(),
    };
    for i in 0..count {
        let s = seed.wrapping_add(i);
        let g = random_game(s, max_vertices, max_actions.max(1), max_weight);
        let ours = solve_finite(&g).values;
        let theirs = brute_force_values(&g, limits).map_err(|e| Failure::internal(format!("seed {s}: {e}")))?;
        report.vertices += g.len();
        for v in 0..g.len() {
            if ours[v] != theirs[v] {
                report.mismatches += 1;
                report.failures.push(Mismatch {
                    seed: s,
                    vertex: g.vertex(v).id.clone(),
                    solver: ours[v],
                    oracle: theirs[v],
                });
            }
        }
    }
    let mut text = serde_json::to_string_pretty(&report).map_err(|e| Failure::internal(e.to_string()))?;
    text.push('\n');
    out.write_all(text.as_bytes()).map_err(|e| Failure::internal(e.to_string()))?;
    Ok(if report.mismatches == 0 { EXIT_OK } else { EXIT_INTERNAL })
}
