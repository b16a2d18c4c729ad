use std::fmt::Write as _;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use arboreal::cayley::CayleyBall;
use arboreal::chains::{hnn_chain, reduce_chain, run_chain_free, verify_strict};
use arboreal::core_maps::{build_core_map, CoreMap};
use arboreal::displacement::{enumerate_bounded, tau};
use arboreal::group::DEFAULT_BUDGET;
use arboreal::metric_core::{enumerate_small_cores, ConstantLedger, CoreJson, MetricCore, SearchParams};
use arboreal::report::*;
use arboreal::stallings::folded_core;
use arboreal::{BackendKind, Error, Group, Letter, Presentation, Rational, Result, Word};

#[derive(Parser)]
#[command(name = "arboreal", version, about = "Folding experiments for free subgroups of hyperbolic groups")]
struct Cli {
    #[command(flatten)]
    cfg: RunConfig,
    #[command(subcommand)]
    cmd: Command,
}

fn positive(s: &str) -> std::result::Result<usize, String> {
    match s.parse::<usize>() {
        Ok(0) => Err("must be positive".into()),
        Ok(n) => Ok(n),
        Err(e) => Err(e.to_string()),
    }
}

#[derive(Args)]
struct RunConfig {
    /// Presentation file (free group on a, b when omitted)
    #[arg(long, short, global = true)]
    presentation: Option<PathBuf>,
    /// Radius of Cayley balls and cover windows
    #[arg(long, global = true, default_value_t = 6, value_parser = positive)]
    radius: usize,
    /// Depth of component windows in improvement searches
    #[arg(long, global = true, default_value_t = 2, value_parser = positive)]
    depth: usize,
    /// Cap on enumerated elements
    #[arg(long, global = true, env = "ARBOREAL_BUDGET", default_value_t = DEFAULT_BUDGET, value_parser = positive)]
    budget: usize,
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    #[arg(long, global = true, value_enum, default_value_t = Format::Table)]
    format: Format,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Dot,
    Table,
}

#[derive(Subcommand)]
enum Command {
    /// Presentation checks
    Present {
        #[command(subcommand)]
        cmd: PresentCmd,
    },
    /// Cayley ball of the given radius
    Ball {
        /// Include the distance matrix in JSON output
        #[arg(long)]
        distances: bool,
    },
    /// Four-point constant of the Cayley ball
    Delta,
    /// Classical subgroup graphs (free groups)
    Stallings {
        #[command(subcommand)]
        cmd: StallingsCmd,
    },
    /// Metric cores
    Core {
        #[command(subcommand)]
        cmd: CoreCmd,
    },
    /// Maps between cores of nested subgroups
    Map {
        #[command(subcommand)]
        cmd: MapCmd,
    },
    /// Sum of geodesic lengths
    Tau {
        #[arg(long)]
        words: String,
    },
    /// Generating tuples with bounded displacement, one JSON object per line
    EnumerateSubgroups {
        #[arg(long)]
        alpha: usize,
        #[arg(long, default_value_t = 1, value_parser = positive)]
        rank: usize,
    },
    /// Ascending chains
    Chain {
        #[command(subcommand)]
        cmd: ChainCmd,
    },
}

#[derive(Subcommand)]
enum PresentCmd {
    /// Parse and run the small-cancellation check
    Check {
        #[arg(long, default_value = "1/6")]
        lambda: String,
    },
}

#[derive(Subcommand)]
enum StallingsCmd {
    /// Folded graph of the subgroup
    Fold {
        #[arg(long)]
        gens: String,
    },
    /// Membership of words in the subgroup
    Member {
        #[arg(long)]
        gens: String,
        /// Words to test, comma separated
        #[arg(long)]
        words: Option<String>,
        /// Also test this many seeded random reduced words
        #[arg(long, default_value_t = 0)]
        random: usize,
    },
    /// Rank of the subgroup
    Rank {
        #[arg(long)]
        gens: String,
    },
}

#[derive(Args)]
#[group(required = true, multiple = false)]
struct CoreSource {
    /// Generators of a rose, comma separated
    #[arg(long)]
    gens: Option<String>,
    /// Core JSON file
    #[arg(long)]
    core: Option<PathBuf>,
}

#[derive(Subcommand)]
enum CoreCmd {
    /// Core of a rose or file, without folding
    Build {
        #[command(flatten)]
        src: CoreSource,
    },
    /// Apply improvements until none is found
    Fold {
        #[command(flatten)]
        src: CoreSource,
        #[arg(long, default_value_t = 1000)]
        max_moves: usize,
    },
    /// Quasi-isometry constants of the cover embedding
    Measure {
        #[command(flatten)]
        src: CoreSource,
        /// Fold before measuring
        #[arg(long)]
        fold: bool,
        /// Report the full constant ledger
        #[arg(long)]
        ledger: bool,
    },
    /// Whether edges are shortest within the search horizon
    MinimalCheck {
        #[command(flatten)]
        src: CoreSource,
        /// Single edge; all edges when omitted
        #[arg(long)]
        edge: Option<usize>,
    },
    /// Small immersed cores up to isomorphism
    Enumerate {
        #[arg(long)]
        edges: usize,
        #[arg(long, value_parser = positive)]
        max_len: usize,
    },
}

#[derive(Args)]
struct MapPair {
    /// Generators of the smaller subgroup
    #[arg(long)]
    source: String,
    /// Generators of the larger subgroup
    #[arg(long)]
    target: String,
}

#[derive(Subcommand)]
enum MapCmd {
    /// Build the map and print it
    Build {
        #[command(flatten)]
        pair: MapPair,
    },
    /// Empirical and predicted map constants
    Measure {
        #[command(flatten)]
        pair: MapPair,
    },
    /// Size of the target against the source, for surjective maps
    SizeBound {
        #[command(flatten)]
        pair: MapPair,
    },
}

#[derive(Args)]
struct ChainArg {
    /// Groups separated by ';', generators by ','
    #[arg(long)]
    chain: String,
}

#[derive(Subcommand)]
enum ChainCmd {
    /// Conjugates of the base by powers of the stable letter
    Hnn {
        #[arg(long)]
        steps: usize,
        #[arg(long)]
        verify_strict: bool,
    },
    /// Fold each group and compare consecutive cores (free groups)
    Run {
        #[command(flatten)]
        chain: ChainArg,
    },
    /// Replace groups by free factors until every step is onto
    Reduce {
        #[command(flatten)]
        chain: ChainArg,
    },
    /// Strictness of each inclusion
    VerifyStrict {
        #[command(flatten)]
        chain: ChainArg,
    },
}

/// What a command prints in each format, and the exit code it wants.
struct Rendered {
    json: String,
    table: String,
    dot: Option<String>,
    code: u8,
}

impl Rendered {
    fn new<T: Serialize>(value: &T, table: String) -> Result<Self> {
        let json = serde_json::to_string_pretty(value).map_err(|e| Error::Io(e.to_string()))?;
        Ok(Rendered { json, table, dot: None, code: 0 })
    }

    fn dot(mut self, dot: String) -> Self {
        self.dot = Some(dot);
        self
    }
}

fn parse_rational(s: &str) -> Result<Rational> {
    let bad = || Error::InvalidArgument(format!("not a rational number: {s}"));
    match s.split_once('/') {
        Some((n, d)) => {
            let (n, d): (i64, i64) = (n.trim().parse().map_err(|_| bad())?, d.trim().parse().map_err(|_| bad())?);
            if d == 0 {
                return Err(bad());
            }
            Ok(Rational::new(n, d))
        }
        None => Ok(Rational::from_integer(s.trim().parse().map_err(|_| bad())?)),
    }
}

fn load_group(cfg: &RunConfig, fallback: Presentation) -> Result<Group> {
    let pres = match &cfg.presentation {
        Some(p) => Presentation::load(p)?,
        None => fallback,
    };
    Ok(Group::new(pres)?.with_budget(cfg.budget))
}

fn params(cfg: &RunConfig) -> SearchParams {
    SearchParams { depth: cfg.depth, radius: cfg.radius }
}

fn load_core(g: &Group, src: &CoreSource) -> Result<MetricCore> {
    if let Some(gens) = &src.gens {
        return MetricCore::from_generators(g, &g.parse_words(gens)?);
    }
    let path = src.core.as_ref().unwrap();
    let text = std::fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    let j: CoreJson = serde_json::from_str(&text).map_err(|e| Error::InvalidArgument(e.to_string()))?;
    MetricCore::from_json(g, &j)
}

fn core_table(g: &Group, c: &MetricCore) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "size: {}  rank: {}  vertices: {}  edges: {}", c.size(), c.rank(), c.num_vertices(), c.num_edges());
    for (i, e) in c.edges().iter().enumerate() {
        let _ = writeln!(s, "  e{i}: {} -> {}  {}  (length {})", e.from, e.to, g.format(&e.label), e.length());
    }
    s
}

fn words_list(g: &Group, ws: &[Word]) -> Vec<String> {
    ws.iter().map(|w| g.format(w)).collect()
}

fn parse_chain(g: &Group, s: &str) -> Result<Vec<Vec<Word>>> {
    s.split(';').map(|part| g.parse_words(part.trim())).collect()
}

fn random_word(g: &Group, rng: &mut ChaCha8Rng, max_len: usize) -> Word {
    let letters: Vec<Letter> = g.presentation().letters();
    let len = rng.gen_range(0..=max_len);
    let mut w = Word::empty();
    while w.len() < len {
        w.push_reduced(letters[rng.gen_range(0..letters.len())]);
    }
    w
}

fn folded(g: &Group, gens: &str, p: SearchParams) -> Result<MetricCore> {
    let c = MetricCore::from_generators(g, &g.parse_words(gens)?)?;
    Ok(c.fold_to_minimal(g, p, 10_000)?.core)
}

fn map_for(g: &Group, cfg: &RunConfig, pair: &MapPair) -> Result<CoreMap> {
    let p = params(cfg);
    build_core_map(g, &folded(g, &pair.source, p)?, &folded(g, &pair.target, p)?, cfg.radius)
}

fn run(cli: &Cli) -> Result<Rendered> {
    let cfg = &cli.cfg;
    let free2 = || Presentation::free(2);
    match &cli.cmd {
        Command::Present { cmd: PresentCmd::Check { lambda } } => {
            let g = load_group(cfg, free2())?;
            let lambda = parse_rational(lambda)?;
            let pres = g.presentation();
            let small_cancellation = if pres.relators.is_empty() || pres.backend == BackendKind::Hnn {
                None
            } else {
                Some(g.check_small_cancellation(lambda)?)
            };
            let rep = PresentationReport {
                backend: pres.backend.keyword().to_string(),
                generators: pres.alphabet.names().to_vec(),
                relators: words_list(&g, &pres.relators),
                small_cancellation,
                lambda,
            };
            let mut table = format!("backend: {}\ngenerators: {}\nrelators: {}\n", rep.backend, rep.generators.join(" "), rep.relators.len());
            if let Some(ok) = small_cancellation {
                let _ = writeln!(table, "small cancellation C'({lambda}): {ok}");
            }
            let mut r = Rendered::new(&rep, table)?;
            if small_cancellation == Some(false) && pres.backend == BackendKind::Dehn {
                r.code = 2;
            }
            Ok(r)
        }
        Command::Ball { distances } => {
            let g = load_group(cfg, free2())?;
            let ball = CayleyBall::new(&g, cfg.radius)?;
            let j = ball.to_json(*distances)?;
            let mut table = format!("radius {}: {} vertices, {} edges\n", j.radius, j.vertices.len(), j.edges.len());
            for (i, v) in j.vertices.iter().enumerate() {
                let _ = writeln!(table, "  {i}: {v}");
            }
            Ok(Rendered::new(&j, table)?.dot(ball.to_dot()))
        }
        Command::Delta => {
            let g = load_group(cfg, free2())?;
            let ball = CayleyBall::new(&g, cfg.radius)?;
            let rep = DeltaReport { radius: cfg.radius, vertices: ball.len(), delta: ball.estimate_delta()? };
            Rendered::new(&rep, format!("{}\n", rep.delta))
        }
        Command::Stallings { cmd } => {
            let g = load_group(cfg, free2())?;
            if g.backend() != BackendKind::Free {
                return Err(Error::Unsupported("subgroup graphs need a free presentation".into()));
            }
            match cmd {
                StallingsCmd::Fold { gens } => {
                    let j = StallingsJson::new(&g, &folded_core(&g.parse_words(gens)?))?;
                    let mut table = format!("vertices: {}  edges: {}  rank: {}  basepoint: {}\n", j.vertices, j.edges.len(), j.rank, j.basepoint);
                    for e in &j.edges {
                        let _ = writeln!(table, "  {} -{}-> {}", e.from, e.label, e.to);
                    }
                    let dot = j.to_dot();
                    Ok(Rendered::new(&j, table)?.dot(dot))
                }
                StallingsCmd::Member { gens, words, random } => {
                    let core = folded_core(&g.parse_words(gens)?);
                    let mut tests = match words {
                        Some(w) => g.parse_words(w)?,
                        None => Vec::new(),
                    };
                    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
                    tests.extend((0..*random).map(|_| random_word(&g, &mut rng, cfg.radius)));
                    let reps: Vec<MemberReport> = tests
                        .iter()
                        .map(|w| Ok(MemberReport { word: g.format(w), member: core.membership(w)? }))
                        .collect::<Result<_>>()?;
                    let table = reps.iter().map(|r| format!("{}: {}\n", r.word, r.member)).collect();
                    Rendered::new(&reps, table)
                }
                StallingsCmd::Rank { gens } => {
                    let rank = folded_core(&g.parse_words(gens)?).rank()?;
                    Rendered::new(&rank, format!("{rank}\n"))
                }
            }
        }
        Command::Core { cmd } => {
            let g = load_group(cfg, free2())?;
            match cmd {
                CoreCmd::Build { src } => {
                    let c = load_core(&g, src)?;
                    Ok(Rendered::new(&c.to_json(&g), core_table(&g, &c))?.dot(c.to_dot(&g)))
                }
                CoreCmd::Fold { src, max_moves } => {
                    let c = load_core(&g, src)?;
                    let out = c.fold_to_minimal(&g, params(cfg), *max_moves)?;
                    let rep = FoldReport::new(&g, c.size(), &out);
                    let mut table = String::new();
                    for (i, m) in rep.moves.iter().enumerate() {
                        let _ = writeln!(table, "move {}: {} on edge {}", i + 1, m.kind, m.edge);
                    }
                    table.push_str(&core_table(&g, &out.core));
                    let _ = writeln!(table, "horizon binding: {}", rep.horizon_binding);
                    let mut r = Rendered::new(&rep, table)?.dot(out.core.to_dot(&g));
                    if out.budget_exhausted {
                        r.code = 4;
                    }
                    Ok(r)
                }
                CoreCmd::Measure { src, fold, ledger } => {
                    let mut c = load_core(&g, src)?;
                    if *fold {
                        c = c.fold_to_minimal(&g, params(cfg), 10_000)?.core;
                    }
                    if *ledger {
                        let l = ConstantLedger::measure(&g, &c, params(cfg), cfg.radius)?;
                        let table = format!(
                            "delta: {}\nM0: {}  M1: {}  M2: {}\nL: {}\nK: {}  C: {}  m: {}\nwindow Gromov max: {} (bound holds: {})\n",
                            l.delta, l.m0, l.m1, l.m2, l.l, l.k, l.c, l.m, l.window_gromov_max, l.lemma_holds
                        );
                        return Rendered::new(&l, table);
                    }
                    let m = c.measure_qi(&g, cfg.radius)?;
                    let mut table = format!("K: {}  C: {}  pairs: {}  lipschitz: {}\npareto:", m.estimate.k, m.estimate.c, m.pairs, m.lipschitz);
                    for (k, c) in &m.pareto {
                        let _ = write!(table, " ({k}, {c})");
                    }
                    table.push('\n');
                    Rendered::new(&m, table)
                }
                CoreCmd::MinimalCheck { src, edge } => {
                    let c = load_core(&g, src)?;
                    let edges: Vec<usize> = match edge {
                        Some(e) => vec![*e],
                        None => (0..c.num_edges()).collect(),
                    };
                    let checks: Vec<MinimalCheck> = edges
                        .into_iter()
                        .map(|e| {
                            let length = c.edges().get(e).ok_or_else(|| Error::InvalidArgument(format!("no edge {e}")))?.length();
                            Ok(MinimalCheck { edge: e, length, shortest: c.check_minimal_edge_shortest(&g, e, params(cfg))? })
                        })
                        .collect::<Result<_>>()?;
                    let table = checks.iter().map(|m| format!("e{}: {}\n", m.edge, m.shortest)).collect();
                    Rendered::new(&checks, table)
                }
                CoreCmd::Enumerate { edges, max_len } => {
                    let cores = enumerate_small_cores(&g, *edges, *max_len, cfg.radius)?;
                    let js: Vec<CoreJson> = cores.iter().map(|c| c.to_json(&g)).collect();
                    let mut table = format!("{} cores\n", cores.len());
                    for c in &cores {
                        let labels: Vec<String> = c.edges().iter().map(|e| format!("{}->{}:{}", e.from, e.to, g.format(&e.label))).collect();
                        let _ = writeln!(table, "  {}", labels.join(" "));
                    }
                    Rendered::new(&js, table)
                }
            }
        }
        Command::Map { cmd } => {
            let g = load_group(cfg, free2())?;
            match cmd {
                MapCmd::Build { pair } => {
                    let m = map_for(&g, cfg, pair)?;
                    let c = m.constants();
                    let table = format!(
                        "source size: {}  target size: {}\nsurjective: {}\nD: {}  K: {}  C: {}\nK'0: {}  C'0: {}  K': {}  C': {}\n",
                        m.source().size(),
                        m.target().size(),
                        m.is_surjective(),
                        c.d,
                        c.k,
                        c.c,
                        c.k0,
                        c.c0,
                        c.k_prime,
                        c.c_prime
                    );
                    Rendered::new(&m.to_json(&g), table)
                }
                MapCmd::Measure { pair } => {
                    let m = map_for(&g, cfg, pair)?;
                    let q = m.measure_qi(&g, cfg.radius)?;
                    let table = format!(
                        "empirical K: {}  C: {}\npredicted K': {}  C': {}\nwithin predicted: {}  (vertex pairs within K'0, C'0: {})\n",
                        q.empirical.k, q.empirical.c, q.predicted.k_prime, q.predicted.c_prime, q.holds, q.step1_holds
                    );
                    Rendered::new(&q, table)
                }
                MapCmd::SizeBound { pair } => {
                    let m = map_for(&g, cfg, pair)?;
                    let holds = m.size_bound_check()?;
                    let c = m.constants();
                    let rep = SizeBoundReport {
                        source_size: m.source().size(),
                        target_size: m.target().size(),
                        k_prime: c.k_prime,
                        c_prime: c.c_prime,
                        holds,
                    };
                    let table = format!("{} <= {} * {} + {}: {}\n", rep.target_size, rep.k_prime, rep.source_size, rep.c_prime, holds);
                    Rendered::new(&rep, table)
                }
            }
        }
        Command::Tau { words } => {
            let g = load_group(cfg, free2())?;
            let ws = g.parse_words(words)?;
            let rep = TauReport { words: words_list(&g, &ws), tau: tau(&g, &ws)? };
            Rendered::new(&rep, format!("{}\n", rep.tau))
        }
        Command::EnumerateSubgroups { alpha, rank } => {
            let g = load_group(cfg, free2())?;
            let e = enumerate_bounded(&g, *alpha, *rank)?;
            let lines = e.to_lines(&g);
            let mut json = String::new();
            for l in &lines {
                json.push_str(&serde_json::to_string(l).map_err(|e| Error::Io(e.to_string()))?);
                json.push('\n');
            }
            let mut table = format!("{} tuples, {} classes\n", lines.len(), e.num_classes);
            for l in &lines {
                let _ = writeln!(table, "  [{}] tau {}  class {}", l.tuple.join(", "), l.tau, l.class);
            }
            // already one object per line
            Ok(Rendered { json: json.trim_end().to_string(), table, dot: None, code: 0 })
        }
        Command::Chain { cmd } => match cmd {
            ChainCmd::Hnn { steps, verify_strict: check } => {
                let g = load_group(cfg, Presentation::hnn_example())?;
                let n = if *check { steps + 1 } else { *steps };
                let chain = hnn_chain(&g, n)?;
                let flags = if *check { Some(verify_strict(&g, &chain)?) } else { None };
                let lines: Vec<ChainLine> = (0..=*steps)
                    .map(|i| ChainLine { index: i, generators: words_list(&g, &chain[i]), strict: flags.as_ref().map(|f| f[i]) })
                    .collect();
                let mut table = String::new();
                for l in &lines {
                    let _ = write!(table, "H{}: <{}>", l.index, l.generators.join(", "));
                    if let Some(s) = l.strict {
                        let _ = write!(table, "  strict: {s}");
                    }
                    table.push('\n');
                }
                Rendered::new(&lines, table)
            }
            ChainCmd::Run { chain } => {
                let g = load_group(cfg, free2())?;
                let rec = run_chain_free(&g, &parse_chain(&g, &chain.chain)?)?;
                Rendered::new(&rec, chain_table(&rec))
            }
            ChainCmd::Reduce { chain } => {
                let g = load_group(cfg, free2())?;
                let red = reduce_chain(&g, &parse_chain(&g, &chain.chain)?)?;
                let mut table = String::new();
                for (i, before, after) in &red.rank_history {
                    let _ = writeln!(table, "replaced H{i}: rank {before} -> {after}");
                }
                table.push_str(&chain_table(&red.record));
                Rendered::new(&red, table)
            }
            ChainCmd::VerifyStrict { chain } => {
                let g = load_group(cfg, free2())?;
                let flags = verify_strict(&g, &parse_chain(&g, &chain.chain)?)?;
                let table = flags.iter().enumerate().map(|(i, f)| format!("step {}: strict: {f}\n", i + 1)).collect();
                Rendered::new(&flags, table)
            }
        },
    }
}

fn chain_table(rec: &arboreal::chains::ChainRecord) -> String {
    let mut s = String::new();
    for (i, st) in rec.steps.iter().enumerate() {
        let _ = write!(s, "H{}: <{}>  rank {}  edges {}", i + 1, st.generators.join(", "), st.rank, st.edges);
        if let Some(t) = rec.transitions.get(i) {
            let _ = write!(s, "  strict: {}  surjective: {}", t.strict, t.surjective);
        }
        s.push('\n');
    }
    match rec.stabilization_index {
        Some(i) => {
            let _ = writeln!(s, "stabilized at {i}");
        }
        None => s.push_str("not stabilized within horizon\n"),
    }
    s
}

fn main() -> ExitCode {
    env_logger::init();
    let cli = Cli::parse();
    match run(&cli) {
        Ok(r) => {
            let out = match cli.cfg.format {
                Format::Json => r.json + "\n",
                Format::Table => r.table,
                Format::Dot => match r.dot {
                    Some(d) => d,
                    None => {
                        eprintln!("error: this command has no DOT output");
                        return ExitCode::from(2);
                    }
                },
            };
            print!("{out}");
            ExitCode::from(r.code)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
