use std::fmt::Display;
use std::fs;
use std::io::{self, BufRead, Read, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::Arc;

use clap::{Parser, Subcommand, ValueEnum};

use catmouse_core::circuit::{generate_random, parse_circuit, Assignment, Circuit, GenParams};
use catmouse_core::harness::{fuzz_equivalence, verify_equivalence, BuiltGame, FuzzParams, Mode};
use catmouse_core::reduction::{export_graph, import_graph, stats, ExportFormat};
use catmouse_core::solver::{solve, GameInstance, Player};
use catmouse_core::strategy::{
    MatchView, OptimalStrategy, Strategy, StrategyContext, StrategyError, StrategyRegistry,
};

#[derive(Parser)]
#[command(name = "catmouse", version, about = "Circuit-to-cat-and-mouse reduction toolkit")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum ModeArg {
    Directed,
    Undirected,
}

impl From<ModeArg> for Mode {
    fn from(m: ModeArg) -> Mode {
        match m {
            ModeArg::Directed => Mode::Directed,
            ModeArg::Undirected => Mode::Undirected,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum ModesArg {
    Directed,
    Undirected,
    Both,
}

impl ModesArg {
    fn modes(self) -> Vec<Mode> {
        match self {
            ModesArg::Directed => vec![Mode::Directed],
            ModesArg::Undirected => vec![Mode::Undirected],
            ModesArg::Both => Mode::BOTH.to_vec(),
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum FormatArg {
    Dot,
    Structured,
}

#[derive(Clone, Copy, ValueEnum)]
enum Side {
    Cat,
    Mouse,
}

#[derive(Subcommand)]
enum Command {
    /// Evaluate a circuit; prints 0 or 1.
    Eval {
        /// Circuit file, or `-` for standard input.
        circuit: PathBuf,
        bits: String,
    },
    /// Build the game graph for a circuit and assignment.
    Reduce {
        circuit: PathBuf,
        bits: String,
        #[arg(long, value_enum, default_value = "directed")]
        mode: ModeArg,
        #[arg(long, value_enum, default_value = "structured")]
        format: FormatArg,
    },
    /// Solve a game graph in the structured format.
    Solve {
        graph: PathBuf,
        /// Start from `cat,mouse,turn` instead of the initial state.
        #[arg(long)]
        state: Option<String>,
    },
    /// Check that game outcomes match the circuit value.
    Verify {
        circuit: PathBuf,
        bits: String,
        #[arg(long, value_enum, default_value = "both")]
        mode: ModesArg,
    },
    /// Generate a random synchronous circuit.
    Gen {
        #[arg(long)]
        layers: u32,
        #[arg(long)]
        width: usize,
        #[arg(long)]
        inputs: usize,
        #[arg(long, default_value_t = 0.5)]
        p_or: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        fanout2: bool,
    },
    /// Verify many generated circuits under every assignment.
    Fuzz {
        #[arg(long)]
        n: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Largest number of layers per circuit.
        #[arg(long, default_value_t = 2)]
        layers: u32,
        /// Largest layer width.
        #[arg(long, default_value_t = 3)]
        width: usize,
        /// Largest number of inputs.
        #[arg(long, default_value_t = 4)]
        inputs: usize,
        /// Fixed OR probability; drawn per circuit when omitted.
        #[arg(long)]
        p_or: Option<f64>,
        #[arg(long)]
        fanout2: bool,
        #[arg(long, value_enum, default_value = "both")]
        mode: ModesArg,
        /// Write a circuit and graph file for every failure here.
        #[arg(long)]
        repro_dir: Option<PathBuf>,
    },
    /// Play against the optimal opponent, entering node ids on standard input.
    Play {
        circuit: PathBuf,
        bits: String,
        #[arg(long, value_enum, default_value = "directed")]
        mode: ModeArg,
        #[arg(long = "as", value_enum)]
        side: Side,
    },
    /// Play two registered strategies against each other.
    Match {
        circuit: PathBuf,
        bits: String,
        #[arg(long, value_enum, default_value = "directed")]
        mode: ModeArg,
        #[arg(long, default_value = "optimal")]
        cat: String,
        #[arg(long, default_value = "optimal")]
        mouse: String,
        /// Scripted moves a deviating strategy makes before it deviates.
        #[arg(long, default_value_t = 1)]
        deviate_after: usize,
    },
    /// List registered strategies.
    Strategies,
}

struct Failure {
    code: u8,
    message: String,
}

fn usage(e: impl Display) -> Failure {
    Failure {
        code: 2,
        message: e.to_string(),
    }
}

fn violated(e: impl Display) -> Failure {
    Failure {
        code: 1,
        message: e.to_string(),
    }
}

fn read_input(path: &Path) -> Result<String, Failure> {
    if path.as_os_str() == "-" {
        let mut s = String::new();
        io::stdin().read_to_string(&mut s).map_err(usage)?;
        Ok(s)
    } else {
        fs::read_to_string(path).map_err(|e| usage(format!("{}: {e}", path.display())))
    }
}

fn load(path: &Path, bits: &str) -> Result<(Circuit, Assignment), Failure> {
    let c = parse_circuit(&read_input(path)?).map_err(|e| usage(format!("{}: {e}", path.display())))?;
    let x = Assignment::parse(bits).map_err(usage)?;
    c.evaluate(&x).map_err(usage)?;
    Ok((c, x))
}

fn build(path: &Path, bits: &str, mode: ModeArg) -> Result<Arc<BuiltGame>, Failure> {
    let (c, x) = load(path, bits)?;
    BuiltGame::new(&c, &x, mode.into()).map(Arc::new).map_err(usage)
}

/// Reads destination ids from the user and checks them against the legal moves.
struct Human<R, W> {
    input: R,
    output: W,
}

impl<R: BufRead, W: Write> Strategy for Human<R, W> {
    fn name(&self) -> &str {
        "human"
    }

    fn choose(&mut self, view: &MatchView<'_>) -> Result<usize, StrategyError> {
        let board = view.instance.board();
        let from = view.state.mover_position();
        let mut legal: Vec<usize> = board.successors(from).collect();
        legal.sort_by(|&a, &b| board.name(a).cmp(board.name(b)));
        let io_err = |e: io::Error| StrategyError::Input(e.to_string());
        loop {
            writeln!(
                self.output,
                "ply {}: Cat at {}, Mouse at {}",
                view.ply,
                board.name(view.state.cat),
                board.name(view.state.mouse)
            )
            .map_err(io_err)?;
            let names: Vec<&str> = legal.iter().map(|&v| board.name(v)).collect();
            writeln!(self.output, "legal: {}", names.join(" ")).map_err(io_err)?;
            write!(self.output, "{}> ", view.state.turn).map_err(io_err)?;
            self.output.flush().map_err(io_err)?;
            let mut line = String::new();
            if self.input.read_line(&mut line).map_err(io_err)? == 0 {
                return Err(StrategyError::Input("input ended".into()));
            }
            let wanted = line.trim();
            match legal.iter().find(|&&v| board.name(v) == wanted) {
                Some(&v) => return Ok(v),
                None => writeln!(self.output, "`{wanted}` is not a legal move").map_err(io_err)?,
            }
        }
    }
}

fn run(cli: Cli) -> Result<(), Failure> {
    let mut out = io::stdout().lock();
    let write = |out: &mut io::StdoutLock, s: &str| out.write_all(s.as_bytes()).map_err(usage);
    match cli.command {
        Command::Eval { circuit, bits } => {
            let (c, x) = load(&circuit, &bits)?;
            let (v, _) = c.evaluate(&x).map_err(usage)?;
            write(&mut out, &format!("{}\n", v as u8))?;
        }
        Command::Reduce {
            circuit,
            bits,
            mode,
            format,
        } => {
            let game = build(&circuit, &bits, mode)?;
            let format = match format {
                FormatArg::Dot => ExportFormat::Dot,
                FormatArg::Structured => ExportFormat::Structured,
            };
            write(&mut out, &export_graph(&game.graph, &game.map, format))?;
            let s = stats(&game.graph);
            eprintln!("{} graph: {} nodes, {} edges", game.mode, s.nodes, s.edges);
        }
        Command::Solve { graph, state } => {
            let text = read_input(&graph)?;
            let (g, _) = import_graph(&text).map_err(|e| usage(format!("{}: {e}", graph.display())))?;
            let inst = GameInstance::from_game_graph(&g).map_err(usage)?;
            let sol = solve(&inst);
            let start = match state {
                Some(s) => inst
                    .parse_state(&s)
                    .ok_or_else(|| usage(format!("bad state `{s}`, expected cat,mouse,Cat|Mouse")))?,
                None => inst.initial_state(),
            };
            let value = sol.value(&start).expect("full solve covers every state");
            let mut text = format!("outcome {value}\n");
            if let Some(d) = sol.dist(&start) {
                text.push_str(&format!("plies {d}\n"));
            }
            for s in sol.principal_line(&start, inst.state_count()) {
                text.push_str(&format!("{}\n", inst.describe(&s)));
            }
            write(&mut out, &text)?;
            eprintln!("{} nodes, {} states, {value}", inst.board().len(), inst.state_count());
        }
        Command::Verify { circuit, bits, mode } => {
            let (c, x) = load(&circuit, &bits)?;
            let report = verify_equivalence(&c, &x, &mode.modes()).map_err(usage)?;
            write(&mut out, &report.to_string())?;
            let outcomes: Vec<String> = report.outcomes.iter().map(|(m, o)| format!("{m} {o}")).collect();
            eprintln!("value {}: {}", report.value as u8, outcomes.join(", "));
            if !report.equivalence_ok {
                return Err(violated("outcome does not match the circuit value"));
            }
        }
        Command::Gen {
            layers,
            width,
            inputs,
            p_or,
            seed,
            fanout2,
        } => {
            let params = GenParams {
                layers,
                width,
                num_inputs: inputs,
                p_or,
                fanout2,
            };
            let c = generate_random(&params, seed).map_err(usage)?;
            write(&mut out, &c.serialize())?;
        }
        Command::Fuzz {
            n,
            seed,
            layers,
            width,
            inputs,
            p_or,
            fanout2,
            mode,
            repro_dir,
        } => {
            let params = FuzzParams {
                max_layers: layers,
                max_width: width,
                max_inputs: inputs,
                p_or,
                fanout2,
                modes: mode.modes(),
            };
            let summary = fuzz_equivalence(&params, seed, n).map_err(usage)?;
            write(&mut out, &summary.to_string())?;
            eprintln!(
                "{} circuits, {} assignments, {} failures",
                summary.n,
                summary.assignments_checked,
                summary.failures.len()
            );
            if let Some(dir) = repro_dir {
                fs::create_dir_all(&dir).map_err(usage)?;
                for (k, r) in summary.failures.iter().enumerate() {
                    let stem = format!("repro-{}-{k}", r.index);
                    fs::write(dir.join(format!("{stem}.circuit")), r.to_string()).map_err(usage)?;
                    if let Some(g) = &r.graph {
                        fs::write(dir.join(format!("{stem}.graph")), g).map_err(usage)?;
                    }
                }
            }
            if !summary.failures.is_empty() {
                return Err(violated(format!("{} failures", summary.failures.len())));
            }
        }
        Command::Play {
            circuit,
            bits,
            mode,
            side,
        } => {
            let game = build(&circuit, &bits, mode)?;
            let solution = game.solution();
            let stdin = io::stdin();
            let mut human = Human {
                input: stdin.lock(),
                output: io::stdout(),
            };
            let mut optimal = OptimalStrategy::new(solution);
            let t = match side {
                Side::Cat => game.play(&mut human, &mut optimal),
                Side::Mouse => game.play(&mut optimal, &mut human),
            }
            .map_err(usage)?;
            write(&mut out, &t.render(game.instance.board()))?;
        }
        Command::Match {
            circuit,
            bits,
            mode,
            cat,
            mouse,
            deviate_after,
        } => {
            let game = build(&circuit, &bits, mode)?;
            let ctx = StrategyContext {
                solution: Some(game.solution()),
                game: Some(Arc::clone(&game)),
                deviate_after,
            };
            let reg = StrategyRegistry::builtin();
            let mut c = reg.build(&cat, Player::Cat, &ctx).map_err(usage)?;
            let mut m = reg.build(&mouse, Player::Mouse, &ctx).map_err(usage)?;
            let t = game.play(c.as_mut(), m.as_mut()).map_err(violated)?;
            write(&mut out, &t.render(game.instance.board()))?;
            eprintln!("{} vs {}: {} by {} after {} plies", cat, mouse, t.result, t.reason, t.plies());
        }
        Command::Strategies => {
            let mut text = String::new();
            for e in StrategyRegistry::builtin().entries() {
                let side = e.plays.map_or("any".to_string(), |p| p.to_string());
                text.push_str(&format!("{:<20} {:<6} {}\n", e.name, side, e.description));
            }
            write(&mut out, &text)?;
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}

