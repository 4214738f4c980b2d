use std::fs;
use std::io::{self, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use thiserror::Error;

use vpgame::equilibria::{classify_pair, classify_pairs, EquilibriumRecord};
use vpgame::error::Error as CoreError;
use vpgame::game::{GameFile, MixedStrategy, Player, VectorPayoffGame};
use vpgame::poss::{compute_security_image, poss_strategies_in, verify_gap};
use vpgame::report::{
    rational_text, reals, type_label, CertificateJson, EquilibriumJson, FrontJson, GapJson, ImageJson, PlotItem,
    Real17, StrategyJson,
};
use vpgame::strategy::{classify_grid, optimality_lp, payoff_polyhedron, ClassifyOptions, StrategyFront, DEFAULT_PREFILTER_EPS};

const VERSION: &str = env!("CARGO_PKG_VERSION");
const GAP_EPS: f64 = 1e-6;

#[derive(Debug, Parser)]
#[command(name = "vpgame", version, about = "Zero-sum matrix games with vector payoffs")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Minimal strategies of player I and maximal strategies of player II.
    Solve(GameArgs),
    /// Classify every pair of optimal strategies.
    Equilibria(GameArgs),
    /// Security images, POSS strategies and the gap check.
    Poss(GameArgs),
    /// Test a single strategy or a strategy pair.
    Check {
        #[command(flatten)]
        game: GameArgs,
        /// Row strategy, e.g. "1/3,2/3".
        #[arg(long)]
        p: Option<String>,
        /// Column strategy.
        #[arg(long)]
        q: Option<String>,
        /// Pair "P;Q".
        #[arg(long)]
        pair: Option<String>,
    },
    /// Polygon geometry for two-dimensional payoffs.
    Plot {
        #[command(flatten)]
        game: GameArgs,
        #[arg(long)]
        p: Option<String>,
        #[arg(long)]
        q: Option<String>,
    },
    /// Random integer game with entries in [-10, 10].
    Random {
        #[arg(long, default_value_t = 3)]
        rows: usize,
        #[arg(long, default_value_t = 3)]
        cols: usize,
        #[arg(long, default_value_t = 2)]
        dim: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, short)]
        output: Option<PathBuf>,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
enum Format {
    Json,
    Csv,
    Table,
}

#[derive(Debug, Clone, Args)]
struct GameArgs {
    /// Game file in JSON.
    input: PathBuf,
    #[arg(long, default_value = "1/10")]
    step_row: String,
    #[arg(long, default_value = "1/10")]
    step_col: String,
    #[arg(long, default_value_t = 1e-7)]
    tol: f64,
    /// Skip strategies ruled out by the security image before the LP test.
    #[arg(long)]
    prefilter: bool,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    format: Format,
    #[arg(long, short)]
    output: Option<PathBuf>,
    /// Worker threads; 0 uses all cores.
    #[arg(long, default_value_t = 0)]
    workers: usize,
}

#[derive(Debug, Error)]
enum CliError {
    #[error("{0}")]
    Input(String),
    #[error("numerical failure: {0}")]
    Numerical(String),
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Input(_) => 2,
            CliError::Numerical(_) => 3,
        }
    }
}

impl From<CoreError> for CliError {
    fn from(e: CoreError) -> Self {
        match e {
            CoreError::DimensionMismatch(_)
            | CoreError::InvalidGame(_)
            | CoreError::InvalidStrategy(_)
            | CoreError::InvalidStep(_)
            | CoreError::EmptyInput
            | CoreError::InvalidParameter(_) => CliError::Input(e.to_string()),
            _ => CliError::Numerical(e.to_string()),
        }
    }
}

impl From<csv::Error> for CliError {
    fn from(e: csv::Error) -> Self {
        CliError::Input(format!("csv: {e}"))
    }
}

type CliResult<T> = Result<T, CliError>;

/// Settings echoed into every report. Worker count is left out: reports do
/// not depend on it.
#[derive(Debug, Clone, Serialize)]
struct RunConfig {
    command: &'static str,
    input: String,
    step_row: String,
    step_col: String,
    tol: Real17,
    prefilter: bool,
    format: Format,
}

#[derive(Serialize)]
struct Report<'a, T: Serialize> {
    version: &'static str,
    config: &'a RunConfig,
    #[serde(flatten)]
    body: T,
}

struct Loaded {
    game: VectorPayoffGame,
    config: RunConfig,
    row_div: u32,
    col_div: u32,
}

fn parse_step(text: &str) -> CliResult<u32> {
    let bad = || CliError::Input(format!("step must have the form 1/N with N >= 1, got {text:?}"));
    let (num, den) = text.trim().split_once('/').ok_or_else(bad)?;
    if num.trim() != "1" {
        return Err(bad());
    }
    match den.trim().parse::<u32>() {
        Ok(n) if n >= 1 => Ok(n),
        _ => Err(bad()),
    }
}

fn parse_real(text: &str) -> CliResult<f64> {
    let t = text.trim();
    let value = match t.split_once('/') {
        Some((a, b)) => {
            let a: f64 = a.trim().parse().map_err(|_| CliError::Input(format!("bad number {t:?}")))?;
            let b: f64 = b.trim().parse().map_err(|_| CliError::Input(format!("bad number {t:?}")))?;
            if b == 0.0 {
                return Err(CliError::Input(format!("zero denominator in {t:?}")));
            }
            a / b
        }
        None => t.parse().map_err(|_| CliError::Input(format!("bad number {t:?}")))?,
    };
    if !value.is_finite() {
        return Err(CliError::Input(format!("bad number {t:?}")));
    }
    Ok(value)
}

fn parse_strategy(text: &str, owner: Player, game: &VectorPayoffGame) -> CliResult<MixedStrategy> {
    let raw = text.split(',').map(parse_real).collect::<CliResult<Vec<f64>>>()?;
    if raw.len() != game.strategy_len(owner) {
        return Err(CliError::Input(format!(
            "strategy for player {owner} needs {} weights, got {}",
            game.strategy_len(owner),
            raw.len()
        )));
    }
    Ok(MixedStrategy::from_approximate(owner, &raw, 1e-9)?)
}

fn load(args: &GameArgs, command: &'static str) -> CliResult<Loaded> {
    if !(args.tol > 0.0 && args.tol.is_finite()) {
        return Err(CliError::Input(format!("tol must be positive, got {}", args.tol)));
    }
    let row_div = parse_step(&args.step_row)?;
    let col_div = parse_step(&args.step_col)?;
    let text = fs::read_to_string(&args.input)
        .map_err(|e| CliError::Input(format!("cannot read {}: {e}", args.input.display())))?;
    let file: GameFile =
        serde_json::from_str(&text).map_err(|e| CliError::Input(format!("malformed game JSON: {e}")))?;
    let game = VectorPayoffGame::try_from(file)?;
    let config = RunConfig {
        command,
        input: args.input.display().to_string(),
        step_row: format!("1/{row_div}"),
        step_col: format!("1/{col_div}"),
        tol: Real17(args.tol),
        prefilter: args.prefilter,
        format: args.format,
    };
    Ok(Loaded { game, config, row_div, col_div })
}

fn options(args: &GameArgs) -> ClassifyOptions {
    ClassifyOptions { tol: args.tol, prefilter: args.prefilter.then_some(DEFAULT_PREFILTER_EPS) }
}

fn fronts(l: &Loaded, args: &GameArgs) -> CliResult<(StrategyFront, StrategyFront)> {
    let opts = options(args);
    let row = classify_grid(&l.game, Player::Row, l.row_div, &opts)?;
    let col = classify_grid(&l.game, Player::Col, l.col_div, &opts)?;
    Ok((row, col))
}

fn json<T: Serialize>(config: &RunConfig, body: T) -> CliResult<String> {
    let report = Report { version: VERSION, config, body };
    let mut s = serde_json::to_string_pretty(&report).map_err(|e| CliError::Numerical(e.to_string()))?;
    s.push('\n');
    Ok(s)
}

fn rationals(s: &MixedStrategy) -> String {
    s.weights().iter().map(|w| rational_text(*w, 1000)).collect::<Vec<_>>().join(" ")
}

fn decimals(v: &[f64]) -> String {
    reals(v).iter().map(|r| r.text()).collect::<Vec<_>>().join(" ")
}

fn csv_string(header: &[&str], rows: Vec<Vec<String>>) -> CliResult<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header)?;
    for r in rows {
        w.write_record(&r)?;
    }
    let bytes = w.into_inner().map_err(|e| CliError::Numerical(e.to_string()))?;
    String::from_utf8(bytes).map_err(|e| CliError::Numerical(e.to_string()))
}

fn table_string(header: &[&str], rows: Vec<Vec<String>>) -> String {
    let mut widths: Vec<usize> = header.iter().map(|h| h.len()).collect();
    for r in &rows {
        for (w, c) in widths.iter_mut().zip(r) {
            *w = (*w).max(c.len());
        }
    }
    let line = |cells: Vec<&str>| {
        let padded: Vec<String> = cells.iter().zip(&widths).map(|(c, w)| format!("{c:<w$}")).collect();
        padded.join("  ").trim_end().to_string() + "\n"
    };
    let mut out = line(header.to_vec());
    out += &line(widths.iter().map(|w| "-".repeat(*w)).collect::<Vec<_>>().iter().map(String::as_str).collect());
    for r in &rows {
        out += &line(r.iter().map(String::as_str).collect());
    }
    out
}

fn tabular(format: Format, header: &[&str], rows: Vec<Vec<String>>) -> CliResult<String> {
    match format {
        Format::Csv => csv_string(header, rows),
        _ => Ok(table_string(header, rows)),
    }
}

fn front_rows(front: &StrategyFront) -> Vec<Vec<String>> {
    let label = front.player.to_string();
    front
        .verdicts
        .iter()
        .filter(|v| v.optimal)
        .map(|v| {
            vec![
                label.clone(),
                v.index.to_string(),
                rationals(&v.strategy),
                decimals(v.strategy.weights()),
                front.is_representative(v.index).to_string(),
            ]
        })
        .collect()
}

fn cmd_solve(args: &GameArgs) -> CliResult<String> {
    let l = load(args, "solve")?;
    let (row, col) = fronts(&l, args)?;
    match args.format {
        Format::Json => {
            #[derive(Serialize)]
            struct Body {
                fronts: Vec<FrontJson>,
            }
            json(&l.config, Body { fronts: vec![(&row).into(), (&col).into()] })
        }
        f => {
            let mut rows = front_rows(&row);
            rows.extend(front_rows(&col));
            tabular(f, &["player", "index", "strategy", "weights", "representative"], rows)
        }
    }
}

fn cmd_equilibria(args: &GameArgs) -> CliResult<String> {
    let l = load(args, "equilibria")?;
    let (row, col) = fronts(&l, args)?;
    let records = classify_pairs(&l.game, &row, &col)?;
    match args.format {
        Format::Json => {
            #[derive(Serialize)]
            struct Body {
                minimal_count: usize,
                maximal_count: usize,
                set_shapley_count: usize,
                strong_count: usize,
                pairs: Vec<EquilibriumJson>,
            }
            let set_shapley: Vec<&EquilibriumRecord> =
                records.iter().filter(|r| r.classification.is_set_shapley()).collect();
            json(
                &l.config,
                Body {
                    minimal_count: row.optimal().len(),
                    maximal_count: col.optimal().len(),
                    set_shapley_count: set_shapley.len(),
                    strong_count: set_shapley.iter().filter(|r| r.strong).count(),
                    pairs: records.iter().map(Into::into).collect(),
                },
            )
        }
        f => {
            let rows = records
                .iter()
                .filter(|r| r.classification.is_set_shapley())
                .map(|r| {
                    vec![
                        rationals(&r.p),
                        rationals(&r.q),
                        type_label(r).to_string(),
                        decimals(&r.payoff),
                    ]
                })
                .collect();
            tabular(f, &["p", "q", "type", "payoff"], rows)
        }
    }
}

fn cmd_poss(args: &GameArgs) -> CliResult<String> {
    let l = load(args, "poss")?;
    let (row, col) = fronts(&l, args)?;
    let img_row = compute_security_image(&l.game, Player::Row)?;
    let img_col = compute_security_image(&l.game, Player::Col)?;
    let poss_row = poss_strategies_in(&l.game, &img_row, l.row_div)?;
    let poss_col = poss_strategies_in(&l.game, &img_col, l.col_div)?;
    let gap_row = verify_gap(&l.game, &row, &img_row, GAP_EPS)?;
    let gap_col = verify_gap(&l.game, &col, &img_col, GAP_EPS)?;
    match args.format {
        Format::Json => {
            #[derive(Serialize)]
            struct PlayerPoss {
                image: ImageJson,
                poss: Vec<StrategyJson>,
                gap: GapJson,
            }
            #[derive(Serialize)]
            struct Body {
                players: Vec<PlayerPoss>,
            }
            let players = vec![
                PlayerPoss {
                    image: (&img_row).into(),
                    poss: poss_row.iter().map(Into::into).collect(),
                    gap: (&gap_row).into(),
                },
                PlayerPoss {
                    image: (&img_col).into(),
                    poss: poss_col.iter().map(Into::into).collect(),
                    gap: (&gap_col).into(),
                },
            ];
            json(&l.config, Body { players })
        }
        f => {
            let mut rows = Vec::new();
            for (player, list) in [(Player::Row, &poss_row), (Player::Col, &poss_col)] {
                for s in list {
                    let w = l.game.componentwise_security_point(s)?;
                    rows.push(vec![player.to_string(), rationals(s), decimals(&w)]);
                }
            }
            let mut out = tabular(f, &["player", "strategy", "security_point"], rows)?;
            if f == Format::Table {
                for g in [&gap_row, &gap_col] {
                    out += &format!("gap check player {}: {} checked, {} violations\n", g.player, g.checked, g.violations.len());
                }
            }
            Ok(out)
        }
    }
}

fn cmd_check(args: &GameArgs, p: Option<&str>, q: Option<&str>, pair: Option<&str>) -> CliResult<String> {
    let l = load(args, "check")?;
    let (p, q) = match (pair, p, q) {
        (Some(text), None, None) => {
            let (a, b) = text
                .split_once(';')
                .ok_or_else(|| CliError::Input(format!("pair must look like \"P;Q\", got {text:?}")))?;
            (Some(a), Some(b))
        }
        (None, p, q) if p.is_some() || q.is_some() => (p, q),
        _ => return Err(CliError::Input("give --p and/or --q, or --pair alone".into())),
    };
    let p = p.map(|t| parse_strategy(t, Player::Row, &l.game)).transpose()?;
    let q = q.map(|t| parse_strategy(t, Player::Col, &l.game)).transpose()?;
    if let (Some(p), Some(q)) = (&p, &q) {
        let r = classify_pair(&l.game, p, q)?;
        return match args.format {
            Format::Json => {
                #[derive(Serialize)]
                struct Body {
                    label: &'static str,
                    pair: EquilibriumJson,
                }
                json(&l.config, Body { label: r.classification.label(), pair: (&r).into() })
            }
            _ => Ok(format!("{}\n", r.classification.label())),
        };
    }
    let s = p.or(q).expect("one strategy present");
    let cert = optimality_lp(&l.game, &s, args.tol)?;
    let word = match (s.owner(), cert.optimal) {
        (Player::Row, true) => "minimal",
        (Player::Row, false) => "not minimal",
        (Player::Col, true) => "maximal",
        (Player::Col, false) => "not maximal",
    };
    match args.format {
        Format::Json => {
            #[derive(Serialize)]
            struct Body {
                player: String,
                verdict: &'static str,
                certificate: CertificateJson,
            }
            json(&l.config, Body { player: s.owner().to_string(), verdict: word, certificate: (&cert).into() })
        }
        _ => {
            let mut out = format!("player {} strategy ({}) is {word}\n", s.owner(), rationals(&s));
            out += &format!("lp value {}\n", Real17(cert.lp_value).text());
            if let Some(better) = &cert.improving {
                out += &format!("improving strategy ({})\n", rationals(better));
            }
            Ok(out)
        }
    }
}

fn cmd_plot(args: &GameArgs, p: Option<&str>, q: Option<&str>) -> CliResult<String> {
    let l = load(args, "plot")?;
    if l.game.dim() != 2 {
        return Err(CliError::Input(format!("plot needs two-dimensional payoffs, game has {}", l.game.dim())));
    }
    let mut items = Vec::new();
    if let Some(t) = p {
        let p = parse_strategy(t, Player::Row, &l.game)?;
        items.push(PlotItem::new(format!("V_I({})", rationals(&p)), &payoff_polyhedron(&l.game, &p)?));
    }
    if let Some(t) = q {
        let q = parse_strategy(t, Player::Col, &l.game)?;
        items.push(PlotItem::new(format!("V_II({})", rationals(&q)), &payoff_polyhedron(&l.game, &q)?));
    }
    items.push(PlotItem::new("W_I", compute_security_image(&l.game, Player::Row)?.polyhedron()));
    items.push(PlotItem::new("W_II", compute_security_image(&l.game, Player::Col)?.polyhedron()));
    let mut s = serde_json::to_string_pretty(&items).map_err(|e| CliError::Numerical(e.to_string()))?;
    s.push('\n');
    Ok(s)
}

fn random_game(rows: usize, cols: usize, dim: usize, seed: u64) -> CliResult<String> {
    if rows == 0 || cols == 0 || dim == 0 {
        return Err(CliError::Input("rows, cols and dim must be positive".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let payoffs: Vec<Vec<Vec<f64>>> = (0..rows)
        .map(|_| (0..cols).map(|_| (0..dim).map(|_| rng.gen_range(-10i32..=10) as f64).collect()).collect())
        .collect();
    let file = GameFile { rows, cols, dim, payoffs };
    let mut s = serde_json::to_string(&file).map_err(|e| CliError::Numerical(e.to_string()))?;
    s.push('\n');
    Ok(s)
}

fn emit(text: &str, output: Option<&PathBuf>) -> CliResult<()> {
    match output {
        Some(path) => fs::write(path, text).map_err(|e| CliError::Input(format!("cannot write {}: {e}", path.display()))),
        None => io::stdout()
            .write_all(text.as_bytes())
            .map_err(|e| CliError::Input(format!("cannot write output: {e}"))),
    }
}

fn with_workers<T: Send>(workers: usize, f: impl FnOnce() -> CliResult<T> + Send) -> CliResult<T> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| CliError::Input(format!("cannot start {workers} workers: {e}")))?;
    pool.install(f)
}

fn run(cli: Cli) -> CliResult<()> {
    match cli.command {
        Command::Random { rows, cols, dim, seed, output } => emit(&random_game(rows, cols, dim, seed)?, output.as_ref()),
        Command::Solve(a) => emit(&with_workers(a.workers, || cmd_solve(&a))?, a.output.as_ref()),
        Command::Equilibria(a) => emit(&with_workers(a.workers, || cmd_equilibria(&a))?, a.output.as_ref()),
        Command::Poss(a) => emit(&with_workers(a.workers, || cmd_poss(&a))?, a.output.as_ref()),
        Command::Check { game, p, q, pair } => {
            let out = with_workers(game.workers, || cmd_check(&game, p.as_deref(), q.as_deref(), pair.as_deref()))?;
            emit(&out, game.output.as_ref())
        }
        Command::Plot { game, p, q } => {
            let out = with_workers(game.workers, || cmd_plot(&game, p.as_deref(), q.as_deref()))?;
            emit(&out, game.output.as_ref())
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
