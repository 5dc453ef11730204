//! `zzrank` command-line front end.
//!
//! Inputs are either a bifiltration text file (first directive `grid ...`) or
//! an explicit module in JSON (first character `{`). Exit codes: 2 for parse
//! errors, 3 for validation errors, 4 when a size guard trips, 5 when two
//! rank engines disagree.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};

use zzrank_core::decomp::{
    barcode_ensemble, dim_all, interval_decompose, is_interval, is_interval_decomposable,
    EnsembleGuard, OrderPolicy,
};
use zzrank_core::filtration::Bifiltration;
use zzrank_core::gen::{indecomposable_candidates, interval_sum, random_bifiltration};
use zzrank_core::grid::ENUMERATION_GUARD;
use zzrank_core::rank::{
    dgm_all, dgm_via_neighborhood, generalized_rank, generalized_rank_lower_variant, Method,
    RankCache, NEIGHBORHOOD_GUARD,
};
use zzrank_core::zigzag::{zigzag_along_cap, zigzag_from_bifiltration};
use zzrank_core::{CapVariant, Error, ExplicitModule, GridInterval, PrimeField};

const FIELD_ENV: &str = "ZZRANK_FIELD";

#[derive(Parser, Debug)]
#[command(name = "zzrank", version, about = "Generalized ranks and interval decompositions of grid modules")]
struct Cli {
    /// Field modulus; overrides the input file and the ZZRANK_FIELD variable
    #[arg(long, global = true)]
    field: Option<u32>,

    #[arg(long, global = true, value_enum, default_value_t = Format::Text)]
    format: Format,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Text,
    Json,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum MethodArg {
    Zigzag,
    Direct,
    Both,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum CapArg {
    Upper,
    Lower,
}

impl From<CapArg> for CapVariant {
    fn from(c: CapArg) -> Self {
        match c {
            CapArg::Upper => CapVariant::Upper,
            CapArg::Lower => CapVariant::Lower,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum GenKind {
    IntervalSum,
    RandomBifiltration,
    IndecomposableCandidate,
}

fn parse_interval(s: &str) -> Result<GridInterval, String> {
    s.parse::<GridInterval>().map_err(|e| e.to_string())
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Generalized rank over one or more intervals
    Rank {
        input: PathBuf,
        #[arg(long, required = true, value_parser = parse_interval)]
        interval: Vec<GridInterval>,
        #[arg(long, value_enum, default_value_t = MethodArg::Zigzag)]
        method: MethodArg,
        #[arg(long, default_value_t = 0)]
        degree: usize,
        #[arg(long, value_enum, default_value_t = CapArg::Upper)]
        cap: CapArg,
    },
    /// Generalized persistence diagram
    Dgm {
        input: PathBuf,
        #[arg(long, value_parser = parse_interval, conflicts_with = "all", required_unless_present = "all")]
        interval: Option<GridInterval>,
        #[arg(long)]
        all: bool,
        #[arg(long, default_value_t = 0)]
        degree: usize,
    },
    /// Peel intervals off the module
    Decompose {
        input: PathBuf,
        #[arg(long, default_value_t = 0)]
        degree: usize,
        /// Seeded exploration order instead of grid order
        #[arg(long)]
        seed: Option<u64>,
        /// Print the neighbour tests
        #[arg(long)]
        trace: bool,
    },
    /// Decide interval decomposability
    Check {
        input: PathBuf,
        #[arg(long, default_value_t = 0)]
        degree: usize,
    },
    /// Multiplicity of the full interval module as a summand
    Isinterval {
        input: PathBuf,
        #[arg(long, default_value_t = 0)]
        degree: usize,
    },
    /// Pointwise dimensions
    Dims {
        input: PathBuf,
        #[arg(long, default_value_t = 0)]
        degree: usize,
    },
    /// Zigzag barcode along the boundary cap of an interval
    Zigzag {
        input: PathBuf,
        #[arg(long, value_parser = parse_interval)]
        interval: GridInterval,
        #[arg(long, default_value_t = 0)]
        degree: usize,
        #[arg(long, value_enum, default_value_t = CapArg::Upper)]
        cap: CapArg,
    },
    /// All outputs of the peeling over every exploration order
    Ensemble {
        input: PathBuf,
        #[arg(long, default_value_t = 0)]
        degree: usize,
    },
    /// Generate a random instance
    Gen {
        #[arg(long, value_enum)]
        kind: GenKind,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, value_parser = parse_interval)]
        grid: GridInterval,
        #[arg(long, default_value_t = 4)]
        max_intervals: usize,
        #[arg(long, default_value_t = 20)]
        max_simplices: usize,
        /// Write here instead of stdout; interval sums also get `<out>.barcode.json`
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Debug)]
enum Failure {
    Core(Error),
    Io(String),
    Mismatch(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Core(e)
    }
}

impl Failure {
    fn exit_code(&self) -> u8 {
        match self {
            Failure::Core(e) if e.is_parse() => 2,
            Failure::Core(e) if e.is_guard() => 4,
            Failure::Core(_) | Failure::Io(_) => 3,
            Failure::Mismatch(_) => 5,
        }
    }
}

impl std::fmt::Display for Failure {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Failure::Core(e) => write!(f, "{e}"),
            Failure::Io(m) | Failure::Mismatch(m) => f.write_str(m),
        }
    }
}

type CmdResult = Result<(), Failure>;

enum Input {
    Filtration(Bifiltration),
    Module(ExplicitModule),
}

impl Input {
    fn module(&self, degree: usize) -> Result<ExplicitModule, Failure> {
        match self {
            Input::Filtration(f) => Ok(ExplicitModule::from_bifiltration(f, degree)?),
            Input::Module(m) => Ok(m.clone()),
        }
    }
}

fn env_field() -> Result<Option<PrimeField>, Failure> {
    match std::env::var(FIELD_ENV) {
        Ok(v) => {
            let p: u32 = v
                .trim()
                .parse()
                .map_err(|_| Failure::Core(Error::Syntax(format!("{FIELD_ENV}=`{v}` is not an integer"))))?;
            Ok(Some(PrimeField::new(p)?))
        }
        Err(_) => Ok(None),
    }
}

fn load(path: &Path, flag: Option<u32>) -> Result<Input, Failure> {
    let text = fs::read_to_string(path).map_err(|e| Failure::Io(format!("{}: {e}", path.display())))?;
    let flag = flag.map(PrimeField::new).transpose()?;
    let fallback = env_field()?.unwrap_or(PrimeField::F2);
    let first = text
        .lines()
        .map(|l| l.split('#').next().unwrap_or("").trim())
        .find(|l| !l.is_empty())
        .unwrap_or("");
    if first.starts_with('{') {
        let mut v: Value = serde_json::from_str(&text).map_err(|e| Error::Parse {
            line: e.line(),
            msg: e.to_string(),
        })?;
        if let Some(obj) = v.as_object_mut() {
            match flag {
                Some(f) => {
                    obj.insert("field".into(), json!(f.modulus()));
                }
                None => {
                    obj.entry("field").or_insert(json!(fallback.modulus()));
                }
            }
        }
        Ok(Input::Module(ExplicitModule::from_json(&v.to_string())?))
    } else if first.starts_with("grid") {
        let f = match flag {
            Some(f) => {
                let stripped: String = text
                    .lines()
                    .filter(|l| !l.trim_start().starts_with("field"))
                    .collect::<Vec<_>>()
                    .join("\n");
                Bifiltration::parse(&stripped, f)?
            }
            None => Bifiltration::parse(&text, fallback)?,
        };
        Ok(Input::Filtration(f))
    } else {
        Err(Failure::Core(Error::Parse {
            line: 1,
            msg: "input must start with a `grid` line or a JSON object".into(),
        }))
    }
}

fn print_json(v: &Value) {
    println!("{}", serde_json::to_string_pretty(v).expect("json values serialize"));
}

fn cmd_rank(
    input: &Input,
    intervals: &[GridInterval],
    method: MethodArg,
    degree: usize,
    cap: CapArg,
    format: Format,
) -> CmdResult {
    let m = input.module(degree)?;
    let rank_by = |i: &GridInterval, method: Method| -> Result<usize, Failure> {
        Ok(match (method, cap) {
            (Method::Zigzag, CapArg::Lower) => generalized_rank_lower_variant(&m, i)?,
            _ => generalized_rank(&m, i, method)?.rank,
        })
    };
    let mut rows = Vec::new();
    let mut mismatch = None;
    for i in intervals {
        match method {
            MethodArg::Zigzag | MethodArg::Direct => {
                let meth = if method == MethodArg::Zigzag { Method::Zigzag } else { Method::Direct };
                let r = rank_by(i, meth)?;
                match format {
                    Format::Text => println!("{i}\trank {r}"),
                    Format::Json => rows.push(json!({"interval": i, "rank": r})),
                }
            }
            MethodArg::Both => {
                let z = rank_by(i, Method::Zigzag)?;
                let d = rank_by(i, Method::Direct)?;
                match format {
                    Format::Text => println!("{i}\tzigzag {z}\tdirect {d}"),
                    Format::Json => rows.push(json!({"interval": i, "rank": z, "zigzag": z, "direct": d})),
                }
                if z != d && mismatch.is_none() {
                    mismatch = Some(format!("rank engines disagree on {i}: zigzag {z}, direct {d}"));
                }
            }
        }
    }
    if format == Format::Json {
        if rows.len() == 1 {
            print_json(&rows[0]);
        } else {
            print_json(&Value::Array(rows));
        }
    }
    match mismatch {
        Some(msg) => Err(Failure::Mismatch(msg)),
        None => Ok(()),
    }
}

fn cmd_dgm(input: &Input, interval: Option<&GridInterval>, degree: usize, format: Format) -> CmdResult {
    let m = input.module(degree)?;
    let poset = m.domain().clone();
    match interval {
        Some(i) => {
            let e = dgm_via_neighborhood(&m, i, &poset, Method::Zigzag, NEIGHBORHOOD_GUARD)?;
            match format {
                Format::Text => println!("{}\tdgm {}", e.interval, e.value),
                Format::Json => print_json(&json!({"dgm": [e]})),
            }
        }
        None => {
            let dgm = dgm_all(&m, &poset, Method::Zigzag, ENUMERATION_GUARD)?;
            // rk(I) = Σ_{J ⊇ I} dgm(J), checked against independent direct ranks
            let ranks = RankCache::new(&m, Method::Direct);
            let mut failures = Vec::new();
            for e in &dgm {
                let total: i64 = dgm
                    .iter()
                    .filter(|j| e.interval.is_subset_of(&j.interval))
                    .map(|j| j.value)
                    .sum();
                let rk = ranks.rank(&e.interval)? as i64;
                if rk != total {
                    failures.push(format!("{}: rk {rk}, sum {total}", e.interval));
                }
            }
            let nonzero: Vec<_> = dgm.iter().filter(|e| e.value != 0).collect();
            match format {
                Format::Text => {
                    for e in &nonzero {
                        println!("{}\tdgm {}", e.interval, e.value);
                    }
                    if failures.is_empty() {
                        println!("identity check: pass ({} intervals)", dgm.len());
                    } else {
                        println!("identity check: FAIL ({} of {} intervals)", failures.len(), dgm.len());
                    }
                }
                Format::Json => print_json(&json!({
                    "dgm": nonzero,
                    "identity_check": failures.is_empty(),
                })),
            }
            if let Some(first) = failures.first() {
                return Err(Failure::Mismatch(format!("rank and diagram disagree on {first}")));
            }
        }
    }
    Ok(())
}

fn cmd_decompose(input: &Input, degree: usize, seed: Option<u64>, trace: bool, format: Format) -> CmdResult {
    let m = input.module(degree)?;
    let policy = seed.map_or(OrderPolicy::Deterministic, OrderPolicy::Seeded);
    let out = interval_decompose(&m, m.domain(), policy)?;
    match format {
        Format::Text => {
            if trace {
                for line in &out.trace {
                    println!("{line}");
                }
            }
            for e in &out.entries {
                println!("#{}\t{}\tmult {}", e.id, e.interval, e.mult);
            }
        }
        Format::Json => {
            let mut v = out.to_json(None);
            if trace {
                v["trace"] = json!(out.trace);
            }
            print_json(&v);
        }
    }
    Ok(())
}

fn cmd_check(input: &Input, degree: usize, format: Format) -> CmdResult {
    let m = input.module(degree)?;
    let rep = is_interval_decomposable(&m, m.domain(), OrderPolicy::Deterministic)?;
    match format {
        Format::Text => {
            println!("{}", rep.decomposable);
            if let Some(f) = &rep.failing {
                println!("failing interval {}: emitted mult {}, summand test {}", f.interval, f.expected, f.found);
            } else if !rep.decomposable {
                println!("multiplicities do not account for the pointwise dimensions");
            }
        }
        Format::Json => {
            let mut v = rep.output.to_json(Some(rep.decomposable));
            if let Some(f) = &rep.failing {
                v["failing"] = json!({"interval": f.interval, "expected": f.expected, "found": f.found});
            }
            print_json(&v);
        }
    }
    Ok(())
}

fn cmd_isinterval(input: &Input, degree: usize, format: Format) -> CmdResult {
    let m = input.module(degree)?;
    let mult = is_interval(&m, m.domain())?;
    match format {
        Format::Text => println!("{mult}"),
        Format::Json => print_json(&json!({"interval": m.domain(), "mult": mult})),
    }
    Ok(())
}

fn cmd_dims(input: &Input, degree: usize, format: Format) -> CmdResult {
    let dims = match input {
        Input::Filtration(f) => dim_all(f, degree),
        Input::Module(m) => m.dims(),
    };
    match format {
        Format::Text => {
            for (p, d) in &dims {
                println!("{p}\t{d}");
            }
        }
        Format::Json => {
            let obj: serde_json::Map<String, Value> =
                dims.iter().map(|(p, d)| (format!("{},{}", p.x, p.y), json!(d))).collect();
            print_json(&json!({"dims": obj}));
        }
    }
    Ok(())
}

fn cmd_zigzag(input: &Input, interval: &GridInterval, degree: usize, cap: CapArg, format: Format) -> CmdResult {
    let z = match input {
        Input::Filtration(f) => zigzag_from_bifiltration(f, interval, degree, cap.into())?,
        Input::Module(m) => zigzag_along_cap(m, interval, cap.into())?,
    };
    let bc = z.barcode();
    match format {
        Format::Text => {
            println!("{}", interval.render().trim_end());
            println!("nodes {}", bc.nodes);
            for b in &bc.bars {
                println!("[{}, {}]\tmult {}", b.lo, b.hi, b.mult);
            }
        }
        Format::Json => print_json(&json!(bc)),
    }
    Ok(())
}

fn cmd_ensemble(input: &Input, degree: usize, format: Format) -> CmdResult {
    let m = input.module(degree)?;
    let ens = barcode_ensemble(&m, m.domain(), EnsembleGuard::default())?;
    match format {
        Format::Text => {
            println!("{} member(s)", ens.len());
            for (k, c) in ens.iter().enumerate() {
                println!("member {k}");
                for (i, mu) in c {
                    println!("  {i}\tmult {mu}");
                }
            }
        }
        Format::Json => {
            let members: Vec<Value> = ens
                .iter()
                .map(|c| {
                    json!(c
                        .iter()
                        .map(|(i, mu)| json!({"interval": i, "mult": mu}))
                        .collect::<Vec<_>>())
                })
                .collect();
            print_json(&json!({"members": members}));
        }
    }
    Ok(())
}

fn write_out(out: Option<&Path>, text: &str) -> CmdResult {
    match out {
        Some(p) => fs::write(p, text).map_err(|e| Failure::Io(format!("{}: {e}", p.display()))),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn sidecar_path(out: &Path) -> PathBuf {
    let mut s = out.as_os_str().to_owned();
    s.push(".barcode.json");
    PathBuf::from(s)
}

fn cmd_gen(
    kind: GenKind,
    seed: u64,
    grid: &GridInterval,
    max_intervals: usize,
    max_simplices: usize,
    out: Option<&Path>,
    field_flag: Option<u32>,
) -> CmdResult {
    let field = match field_flag {
        Some(p) => PrimeField::new(p)?,
        None => env_field()?.unwrap_or(PrimeField::F2),
    };
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    match kind {
        GenKind::IntervalSum => {
            let (m, barcode) = interval_sum(&mut rng, field, grid, max_intervals)?;
            let text = serde_json::to_string_pretty(&m.to_json()).unwrap() + "\n";
            let bc: Vec<Value> = barcode
                .iter()
                .map(|(i, mu)| json!({"interval": i, "mult": mu}))
                .collect();
            let bc_text = serde_json::to_string_pretty(&json!({"barcode": bc})).unwrap() + "\n";
            match out {
                Some(p) => {
                    write_out(Some(p), &text)?;
                    write_out(Some(&sidecar_path(p)), &bc_text)?;
                }
                None => write_out(None, &text)?,
            }
        }
        GenKind::RandomBifiltration => {
            let f = random_bifiltration(&mut rng, field, grid, max_simplices)?;
            write_out(out, &f.to_text())?;
        }
        GenKind::IndecomposableCandidate => {
            let m = indecomposable_candidates(&mut rng, field, grid, 1).remove(0);
            write_out(out, &(serde_json::to_string_pretty(&m.to_json()).unwrap() + "\n"))?;
        }
    }
    Ok(())
}

fn run(cli: Cli) -> CmdResult {
    let fmt = cli.format;
    let field = cli.field;
    match cli.command {
        Command::Rank {
            input,
            interval,
            method,
            degree,
            cap,
        } => cmd_rank(&load(&input, field)?, &interval, method, degree, cap, fmt),
        Command::Dgm {
            input,
            interval,
            all: _,
            degree,
        } => cmd_dgm(&load(&input, field)?, interval.as_ref(), degree, fmt),
        Command::Decompose {
            input,
            degree,
            seed,
            trace,
        } => cmd_decompose(&load(&input, field)?, degree, seed, trace, fmt),
        Command::Check { input, degree } => cmd_check(&load(&input, field)?, degree, fmt),
        Command::Isinterval { input, degree } => cmd_isinterval(&load(&input, field)?, degree, fmt),
        Command::Dims { input, degree } => cmd_dims(&load(&input, field)?, degree, fmt),
        Command::Zigzag {
            input,
            interval,
            degree,
            cap,
        } => cmd_zigzag(&load(&input, field)?, &interval, degree, cap, fmt),
        Command::Ensemble { input, degree } => cmd_ensemble(&load(&input, field)?, degree, fmt),
        Command::Gen {
            kind,
            seed,
            grid,
            max_intervals,
            max_simplices,
            out,
        } => cmd_gen(kind, seed, &grid, max_intervals, max_simplices, out.as_deref(), field),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("zzrank: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
