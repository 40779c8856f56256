use std::fs;
use std::io::{self, Read, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use serde_json::{json, Value};

use wvg_nucleolus::generate::{generate_batch, random_allocation, GeneratorBounds};
use wvg_nucleolus::io::{format_rational, to_decimal, SolveReport, SCHEMA_VERSION};
use wvg_nucleolus::modlinalg::ModVector;
use wvg_nucleolus::separation::{dp_min_table, dp_min_table_mod};
use wvg_nucleolus::{
    brute_gamma, brute_nucleolus, prime_set, solve_nucleolus_with, Error, ExplicitGame, Instance, Rational,
    SolverOptions,
};

const EXIT_MISMATCH: u8 = 1;
const EXIT_BAD_INPUT: u8 = 2;
const EXIT_SIZE_LIMIT: u8 = 3;
const EXIT_INTERNAL: u8 = 4;

#[derive(Parser)]
#[command(name = "wvg-nucleolus", version, about = "Exact nucleolus of weighted voting games")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve an instance file with the pseudo-polynomial solver.
    Solve {
        /// Instance JSON; `-` reads standard input.
        input: PathBuf,
        #[command(flatten)]
        output: OutputArgs,
        /// Include one line per master iteration.
        #[arg(long)]
        trace: bool,
        /// Scan every constraint family at its own level value.
        #[arg(long)]
        literal: bool,
    },
    /// Solve by explicit enumeration (at most 16 players).
    Oracle {
        input: PathBuf,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Run both and compare exactly. Without files, compares a seeded batch.
    Compare {
        inputs: Vec<PathBuf>,
        #[command(flatten)]
        batch: BatchArgs,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Write seeded random instances.
    Generate {
        #[command(flatten)]
        batch: BatchArgs,
        /// Directory for `instance-<seed>-<k>.json` files; prints a JSON
        /// array when absent.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Time the solver on a seeded batch; CSV on standard output.
    Bench {
        #[command(flatten)]
        batch: BatchArgs,
    },
    /// Check the DP tables against enumeration at a random allocation.
    GammaCheck {
        input: PathBuf,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
}

#[derive(Args, Clone)]
struct OutputArgs {
    #[arg(long, value_enum, default_value_t = Format::Rational)]
    format: Format,
    /// Fractional digits of decimal output.
    #[arg(long, default_value_t = 6, value_parser = clap::value_parser!(u32).range(1..))]
    precision: u32,
}

impl OutputArgs {
    fn rational(&self) -> bool {
        self.format != Format::Decimal
    }

    fn decimal(&self) -> Option<usize> {
        (self.format != Format::Rational).then_some(self.precision as usize)
    }

    fn render(&self, values: &[Rational]) -> Value {
        let mut out = serde_json::Map::new();
        if self.rational() {
            out.insert("payoffs".into(), json!(values.iter().map(format_rational).collect::<Vec<_>>()));
        }
        if let Some(d) = self.decimal() {
            out.insert("payoffs_decimal".into(), json!(values.iter().map(|v| to_decimal(v, d)).collect::<Vec<_>>()));
        }
        Value::Object(out)
    }
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Rational,
    Decimal,
    Both,
}

#[derive(Args, Clone)]
struct BatchArgs {
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 10)]
    count: usize,
    #[arg(long, default_value_t = 3)]
    n_min: usize,
    #[arg(long, default_value_t = 10)]
    n_max: usize,
    #[arg(long, default_value_t = 20)]
    weight_max: u64,
    /// Let the quota be 0.
    #[arg(long)]
    allow_zero_quota: bool,
}

impl BatchArgs {
    fn instances(&self) -> Result<Vec<Instance>, Failure> {
        let bounds = GeneratorBounds {
            n_min: self.n_min,
            n_max: self.n_max,
            weight_max: self.weight_max,
            allow_zero_quota: self.allow_zero_quota,
        };
        bounds.validate().map_err(Failure::BadInput)?;
        Ok(generate_batch(self.seed, &bounds, self.count))
    }
}

enum Failure {
    Mismatch(String),
    BadInput(String),
    SizeLimit(String),
    Internal(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::SizeLimit { .. } => Failure::SizeLimit(e.to_string()),
            Error::InvalidInstance(_) | Error::InvalidAllocation(_) | Error::Json(_) | Error::Io(_) => {
                Failure::BadInput(e.to_string())
            }
            _ => Failure::Internal(e.to_string()),
        }
    }
}

fn read_instance(path: &Path) -> Result<Instance, Failure> {
    let text = if path == Path::new("-") {
        let mut s = String::new();
        io::stdin()
            .read_to_string(&mut s)
            .map_err(|e| Failure::BadInput(format!("stdin: {e}")))?;
        s
    } else {
        fs::read_to_string(path).map_err(|e| Failure::BadInput(format!("{}: {e}", path.display())))?
    };
    Instance::from_json(&text).map_err(|e| Failure::BadInput(format!("{}: {e}", path.display())))
}

fn print_json<T: Serialize>(value: &T) {
    let text = serde_json::to_string_pretty(value).expect("serializable");
    let mut out = io::stdout().lock();
    // A closed pipe is not worth a panic.
    let _ = writeln!(out, "{text}");
}

fn solve(input: &Path, output: &OutputArgs, trace: bool, literal: bool) -> Result<(), Failure> {
    let instance = read_instance(input)?;
    let options = SolverOptions {
        trace,
        literal,
        ..SolverOptions::default()
    };
    let result = solve_nucleolus_with(&instance, &options)?;
    print_json(&SolveReport::from_result(&instance, &result, output.rational(), output.decimal()));
    Ok(())
}

fn oracle(input: &Path, output: &OutputArgs) -> Result<(), Failure> {
    let instance = read_instance(input)?;
    let x = brute_nucleolus(&ExplicitGame::new(&instance)?)?;
    let mut report = json!({ "schema_version": SCHEMA_VERSION, "instance": instance });
    merge(&mut report, output.render(x.values()));
    print_json(&report);
    Ok(())
}

fn merge(into: &mut Value, from: Value) {
    if let (Value::Object(a), Value::Object(b)) = (into, from) {
        a.extend(b);
    }
}

fn compare_one(instance: &Instance, output: &OutputArgs) -> Result<(bool, Value), Failure> {
    let game = ExplicitGame::new(instance)?;
    let fast = solve_nucleolus_with(instance, &SolverOptions::default())?.allocation;
    let slow = brute_nucleolus(&game)?;
    let diff: Vec<Value> = fast
        .values()
        .iter()
        .zip(slow.values())
        .enumerate()
        .filter(|(_, (a, b))| a != b)
        .map(|(i, (a, b))| json!({ "player": i + 1, "solver": format_rational(a), "oracle": format_rational(b) }))
        .collect();
    let equal = diff.is_empty();
    Ok((
        equal,
        json!({
            "instance": instance,
            "solver": output.render(fast.values()),
            "oracle": output.render(slow.values()),
            "verdict": if equal { "equal" } else { "different" },
            "diff": diff,
        }),
    ))
}

fn compare(inputs: &[PathBuf], batch: &BatchArgs, output: &OutputArgs) -> Result<(), Failure> {
    let instances = if inputs.is_empty() {
        batch.instances()?
    } else {
        inputs.iter().map(|p| read_instance(p)).collect::<Result<_, _>>()?
    };
    let mut results = Vec::with_capacity(instances.len());
    let mut mismatches = 0;
    for instance in &instances {
        let (equal, report) = compare_one(instance, output)?;
        mismatches += usize::from(!equal);
        results.push(report);
    }
    print_json(&json!({
        "schema_version": SCHEMA_VERSION,
        "compared": results.len(),
        "mismatches": mismatches,
        "results": results,
    }));
    if mismatches > 0 {
        return Err(Failure::Mismatch(format!("{mismatches} of {} instances differ", instances.len())));
    }
    Ok(())
}

fn generate(batch: &BatchArgs, out: Option<&Path>) -> Result<(), Failure> {
    let instances = batch.instances()?;
    match out {
        None => print_json(&instances),
        Some(dir) => {
            fs::create_dir_all(dir).map_err(|e| Failure::BadInput(format!("{}: {e}", dir.display())))?;
            for (k, instance) in instances.iter().enumerate() {
                let path = dir.join(format!("instance-{}-{k}.json", batch.seed));
                fs::write(&path, instance.to_json() + "\n")
                    .map_err(|e| Failure::BadInput(format!("{}: {e}", path.display())))?;
            }
        }
    }
    Ok(())
}

fn bench(batch: &BatchArgs) -> Result<(), Failure> {
    let mut out = io::stdout().lock();
    let _ = writeln!(out, "name,n,max_weight,total_weight,quota,wall_ms,cuts,oracle_calls");
    for instance in batch.instances()? {
        let start = Instant::now();
        let result = solve_nucleolus_with(&instance, &SolverOptions::default())?;
        let ms = start.elapsed().as_secs_f64() * 1000.0;
        let _ = writeln!(
            out,
            "{},{},{},{},{},{ms:.3},{},{}",
            instance.name().unwrap_or(""),
            instance.n(),
            instance.weights().iter().max().copied().unwrap_or(0),
            instance.total_weight(),
            instance.quota(),
            result.stats.cuts,
            result.stats.oracle_calls,
        );
    }
    Ok(())
}

fn gamma_check(input: &Path, seed: u64) -> Result<(), Failure> {
    let instance = read_instance(input)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let x = random_allocation(&mut rng, &instance, 12).into_values();
    let plain = dp_min_table(&instance, &x) == brute_gamma(&instance, &x, None)?;
    let mut modular = Vec::new();
    for p in prime_set(instance.n()).iter().take(3) {
        let v = ModVector::new(p, (0..instance.n()).map(|_| rng.random_range(0..p)).collect());
        let ok = dp_min_table_mod(&instance, &x, &v) == brute_gamma(&instance, &x, Some(&v))?;
        modular.push(json!({ "p": p, "v": v.entries(), "equal": ok }));
    }
    let all = plain && modular.iter().all(|m| m["equal"] == json!(true));
    print_json(&json!({
        "schema_version": SCHEMA_VERSION,
        "instance": instance,
        "x": x.iter().map(format_rational).collect::<Vec<_>>(),
        "plain": plain,
        "modular": modular,
        "verdict": if all { "equal" } else { "different" },
    }));
    if !all {
        return Err(Failure::Mismatch("DP tables differ from enumeration".into()));
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match &cli.command {
        Command::Solve {
            input,
            output,
            trace,
            literal,
        } => solve(input, output, *trace, *literal),
        Command::Oracle { input, output } => oracle(input, output),
        Command::Compare { inputs, batch, output } => compare(inputs, batch, output),
        Command::Generate { batch, out } => generate(batch, out.as_deref()),
        Command::Bench { batch } => bench(batch),
        Command::GammaCheck { input, seed } => gamma_check(input, *seed),
    };
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            let (code, kind, msg) = match f {
                Failure::Mismatch(m) => (EXIT_MISMATCH, "mismatch", m),
                Failure::BadInput(m) => (EXIT_BAD_INPUT, "bad input", m),
                Failure::SizeLimit(m) => (EXIT_SIZE_LIMIT, "size limit", m),
                Failure::Internal(m) => (EXIT_INTERNAL, "internal error", m),
            };
            eprintln!("wvg-nucleolus: {kind}: {msg}");
            ExitCode::from(code)
        }
    }
}
