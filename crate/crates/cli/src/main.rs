mod report;

use std::io::Read as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Duration;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use num_rational::BigRational;

use sixsquare::design::{Block, Replicate, Resolvability, ResolvableDesign};
use sixsquare::efficiency::{
    a_value_block_design, a_value_float_oracle, average_variance, robustness_with, spectrum,
    FactorValue, RobustnessOptions, REPORTED_UPPER_BOUND_R8,
};
use sixsquare::error::{DesignError, EfficiencyError, FamilyError, ParseError, SearchError, SylvesterError};
use sixsquare::exact::round_decimal;
use sixsquare::families::{
    cached_theta_4_search, catalog, delta, embedded_theta_8, gamma, is_semi_latin, lookup,
    roy_check, Variant,
};
use sixsquare::format::{read_design, write_design};
use sixsquare::iso::{automorphism_order, canonical_form, compare, is_sylvester_design, SylvesterVerdict};
use sixsquare::search::{anneal, trace_csv, SearchConfig};

use report::{Format, Report};

#[derive(Parser)]
#[command(name = "sixsquare", version, about = "Resolvable designs for 36 varieties in blocks of six")]
struct Cli {
    /// Decimal places for A-values and efficiency factors.
    #[arg(long, global = true, default_value_t = 4)]
    precision: usize,
    /// Report layout.
    #[arg(long, global = true, default_value = "kv")]
    format: Format,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Print a family member in the design text format.
    Generate {
        /// gamma, delta or theta.
        #[arg(long)]
        family: String,
        /// plain, R, C or RC.
        #[arg(long, default_value = "plain")]
        variant: Variant,
        #[arg(long)]
        r: usize,
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// A-criterion and canonical efficiency factors.
    Evaluate {
        design: String,
        /// Error variance for the average pairwise variance.
        #[arg(long, default_value_t = 1.0)]
        sigma2: f64,
    },
    /// Simulated annealing for an A-efficient resolvable design.
    Search(SearchArgs),
    /// A after losing each single replicate.
    Robustness {
        design: String,
        /// Skip deletions that disconnect the design instead of failing.
        #[arg(long)]
        exclude_disconnected: bool,
    },
    /// Test two designs for isomorphism; exit status 0 when isomorphic, 1 when not.
    Isomorphic {
        first: String,
        second: String,
        /// Print a variety permutation taking the first design to the second.
        #[arg(long)]
        witness: bool,
    },
    /// Order of the automorphism group acting on the varieties.
    Autorder { design: String },
    /// Test the Sylvester-design property; exit status 0 when it holds, 1 when not.
    SylvesterCheck {
        design: String,
        /// Print the variety to Sylvester-graph vertex map.
        #[arg(long)]
        witness: bool,
    },
    /// Dual design, semi-Latin check and the duality identity.
    Dual { design: String },
    /// Published and constructed designs with their A-values.
    Catalog,
    /// Write catalog designs to files.
    Export {
        #[arg(required_unless_present = "all", conflicts_with = "all")]
        names: Vec<String>,
        #[arg(long)]
        all: bool,
        #[arg(long, default_value = ".")]
        dir: PathBuf,
    },
}

#[derive(Args)]
struct SearchArgs {
    #[arg(long, default_value_t = 36)]
    v: usize,
    #[arg(long, default_value_t = 6)]
    k: usize,
    #[arg(long)]
    r: usize,
    #[arg(long, default_value_t = 8)]
    restarts: usize,
    #[arg(long, default_value_t = 42)]
    seed: u64,
    /// Wall-clock limit such as `60s` or `2m`; `none` for no limit.
    #[arg(long, default_value = "60s")]
    budget: String,
    #[arg(long)]
    initial_temperature: Option<f64>,
    #[arg(long)]
    final_temperature: Option<f64>,
    #[arg(long)]
    cooling_rate: Option<f64>,
    #[arg(long)]
    moves: Option<usize>,
    /// Write the annealing trace as CSV.
    #[arg(long)]
    trace: Option<PathBuf>,
    /// Write the best design here instead of standard output.
    #[arg(long)]
    output: Option<PathBuf>,
}

const EXIT_FALSE: u8 = 1;
const EXIT_PARSE: u8 = 2;
const EXIT_DISCONNECTED: u8 = 3;
const EXIT_SHAPE: u8 = 4;
const EXIT_OTHER: u8 = 5;
const EXIT_USAGE: u8 = 64;

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(EXIT_USAGE) } else { ExitCode::SUCCESS };
        }
    };
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}

fn exit_code(e: &anyhow::Error) -> u8 {
    for cause in e.chain() {
        if cause.is::<ParseError>() {
            return EXIT_PARSE;
        }
        if let Some(FamilyError::UnknownName(_)) = cause.downcast_ref() {
            return EXIT_PARSE;
        }
        let efficiency = match cause.downcast_ref() {
            Some(FamilyError::Efficiency(e)) => Some(e),
            _ => cause.downcast_ref::<EfficiencyError>(),
        };
        if let Some(EfficiencyError::Disconnected | EfficiencyError::Empty) = efficiency {
            return EXIT_DISCONNECTED;
        }
        if cause.is::<DesignError>() || matches!(efficiency, Some(EfficiencyError::Design(_))) {
            return EXIT_SHAPE;
        }
        if let Some(FamilyError::Shape { .. } | FamilyError::OutOfRange { .. }) = cause.downcast_ref() {
            return EXIT_SHAPE;
        }
        if let Some(SylvesterError::Shape { .. }) = cause.downcast_ref() {
            return EXIT_SHAPE;
        }
        if let Some(SearchError::Config(_)) = cause.downcast_ref() {
            return EXIT_SHAPE;
        }
    }
    EXIT_OTHER
}

/// A file path, `-` for standard input, or a catalog name.
fn load(arg: &str) -> Result<ResolvableDesign> {
    if arg == "-" {
        let mut text = String::new();
        std::io::stdin().read_to_string(&mut text)?;
        let design = read_design(&text).context("standard input")?;
        let label = if design.label().is_empty() { "stdin".to_string() } else { design.label().to_string() };
        return Ok(design.with_label(label));
    }
    let path = Path::new(arg);
    if path.is_file() {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading {arg}"))?;
        let design = read_design(&text).with_context(|| arg.to_string())?;
        let label = if design.label().is_empty() { arg.to_string() } else { design.label().to_string() };
        return Ok(design.with_label(label));
    }
    Ok(lookup(arg)?)
}

fn decimal(q: &BigRational, places: usize) -> String {
    round_decimal(q, places)
}

fn run(cli: Cli) -> Result<u8> {
    let p = cli.precision;
    let fmt = cli.format;
    match cli.command {
        Command::Generate { family, variant, r, output } => {
            let design = match family.to_ascii_lowercase().as_str() {
                "gamma" => gamma(r, variant)?,
                "delta" => delta(r, variant)?,
                "theta" => match (variant, r) {
                    (Variant::Plain, 8) => embedded_theta_8(),
                    (Variant::Plain, 4) => cached_theta_4_search(),
                    _ => bail!(FamilyError::OutOfRange { r, min: 4, max: 8 }),
                },
                other => bail!(FamilyError::UnknownName(other.to_string())),
            };
            emit(&write_design(&design), output.as_deref())?;
        }
        Command::Evaluate { design, sigma2 } => {
            let d = load(&design)?;
            let s = spectrum(&d)?;
            let a = s.a_value.clone().ok_or(EfficiencyError::Disconnected)?;
            let mut rep = Report::new();
            rep.field("design", d.label())
                .field("v", d.v())
                .field("k", d.k())
                .field("r", d.r())
                .field("A", decimal(&a, p))
                .field("A exact", &a)
                .field("A float", format!("{:.12}", a_value_float_oracle(&d)?))
                .field("sum of reciprocal factors", decimal(&(BigRational::from_integer((d.v() as i64 - 1).into()) / &a), p.max(4)))
                .field("average variance", format!("{:.6}", average_variance(&a, d.r(), sigma2)?));
            let rows = s
                .factors
                .iter()
                .map(|f| {
                    let (exact, dec) = match &f.value {
                        FactorValue::Exact(q) => (q.to_string(), decimal(q, p)),
                        FactorValue::Approximate(x) => ("irrational".to_string(), format!("{x:.p$}")),
                    };
                    vec![exact, dec, f.multiplicity.to_string()]
                })
                .collect();
            rep.table("spectrum", &["factor", "decimal", "multiplicity"], rows);
            print!("{}", rep.render(fmt));
        }
        Command::Search(args) => return search(args, p, fmt),
        Command::Robustness { design, exclude_disconnected } => {
            let d = load(&design)?;
            let rob = robustness_with(&d, RobustnessOptions { exclude_disconnected })?;
            let (Some(worst), Some(average)) = (&rob.worst, &rob.average) else {
                bail!(EfficiencyError::Disconnected);
            };
            let mut rep = Report::new();
            rep.field("design", d.label())
                .field("worst", decimal(worst, p))
                .field("average", decimal(average, p))
                .field("worst exact", worst)
                .field("average exact", average);
            let rows = rob
                .per_replicate
                .iter()
                .enumerate()
                .map(|(i, a)| match a {
                    Ok(a) => vec![(i + 1).to_string(), decimal(a, p), a.to_string()],
                    Err(e) => vec![(i + 1).to_string(), e.to_string(), String::new()],
                })
                .collect();
            rep.table("without replicate", &["replicate", "A", "exact"], rows);
            print!("{}", rep.render(fmt));
        }
        Command::Isomorphic { first, second, witness } => {
            let (a, b) = (load(&first)?, load(&second)?);
            let verdict = compare(&a, &b);
            let mut rep = Report::new();
            rep.field("result", &verdict);
            if verdict.is_isomorphic() && witness {
                let (ca, cb) = (canonical_form(&a), canonical_form(&b));
                let mut inverse = vec![0; cb.v];
                for (x, &l) in cb.variety_labeling.iter().enumerate() {
                    inverse[l] = x;
                }
                rep.field("witness", permutation_text(ca.variety_labeling.iter().map(|&l| inverse[l])));
            }
            print!("{}", rep.render(fmt));
            return Ok(if verdict.is_isomorphic() { 0 } else { EXIT_FALSE });
        }
        Command::Autorder { design } => {
            let d = load(&design)?;
            let mut rep = Report::new();
            rep.field("design", d.label()).field("automorphism group order", automorphism_order(&d));
            print!("{}", rep.render(fmt));
        }
        Command::SylvesterCheck { design, witness } => {
            let d = load(&design)?;
            let verdict = is_sylvester_design(&d)?;
            let mut rep = Report::new();
            rep.field("design", d.label()).field("sylvester design", verdict.is_sylvester());
            match &verdict {
                SylvesterVerdict::Sylvester { witness: w } if witness => {
                    rep.field("witness", permutation_text(w.iter().copied()));
                }
                SylvesterVerdict::NotSylvester { reason } => {
                    rep.field("reason", reason);
                }
                _ => {}
            }
            print!("{}", rep.render(fmt));
            return Ok(if verdict.is_sylvester() { 0 } else { EXIT_FALSE });
        }
        Command::Dual { design } => dual(&load(&design)?, p, fmt)?,
        Command::Catalog => {
            let rows = catalog()
                .into_iter()
                .map(|e| {
                    let a = sixsquare::efficiency::a_value(&e.design);
                    vec![
                        e.name,
                        e.design.r().to_string(),
                        a.as_ref().map_or("disconnected".into(), |a| decimal(a, p)),
                        a.as_ref().map_or(String::new(), |a| a.to_string()),
                        e.provenance.to_string(),
                    ]
                })
                .collect();
            let mut rep = Report::new();
            rep.table("catalog", &["name", "r", "A", "exact", "provenance"], rows);
            print!("{}", rep.render(fmt));
        }
        Command::Export { names, all, dir } => {
            let names: Vec<String> =
                if all { catalog().into_iter().map(|e| e.name).collect() } else { names };
            std::fs::create_dir_all(&dir)?;
            for name in names {
                let design = lookup(&name)?;
                let path = dir.join(format!("{name}.txt"));
                std::fs::write(&path, write_design(&design.with_label(name.clone())))
                    .with_context(|| format!("writing {}", path.display()))?;
                println!("{}", path.display());
            }
        }
    }
    Ok(0)
}

fn permutation_text(images: impl Iterator<Item = usize>) -> String {
    images.enumerate().map(|(x, y)| format!("{}->{}", x + 1, y + 1)).collect::<Vec<_>>().join(" ")
}

fn emit(text: &str, output: Option<&Path>) -> Result<()> {
    match output {
        Some(path) => std::fs::write(path, text).with_context(|| format!("writing {}", path.display())),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn parse_budget(s: &str) -> Result<Option<Duration>> {
    if s == "none" {
        return Ok(None);
    }
    let d = humantime::parse_duration(s).map_err(|e| SearchError::Config(format!("budget `{s}`: {e}")))?;
    Ok(Some(d))
}

fn search(args: SearchArgs, p: usize, fmt: Format) -> Result<u8> {
    let mut config = SearchConfig::new(args.v, args.k, args.r);
    config.restarts = args.restarts;
    config.seed = args.seed;
    config.time_budget = parse_budget(&args.budget)?;
    if let Some(t) = args.initial_temperature {
        config.initial_temperature = t;
    }
    if let Some(t) = args.final_temperature {
        config.final_temperature = t;
    }
    if let Some(c) = args.cooling_rate {
        config.cooling_rate = c;
    }
    if let Some(m) = args.moves {
        config.moves_per_temperature = m;
    }
    config.validate()?;
    let outcome = anneal(&config)?;
    if let Some(path) = &args.trace {
        std::fs::write(path, trace_csv(&outcome.trace()))
            .with_context(|| format!("writing {}", path.display()))?;
    }
    let mut rep = Report::new();
    rep.field("seed", config.seed)
        .field("restarts", config.restarts)
        .field("winning restart", outcome.restart)
        .field("A", decimal(&outcome.a, p))
        .field("A exact", &outcome.a)
        .field("A float", format!("{:.12}", outcome.a_float))
        .field("objective", format!("{:.9}", outcome.objective))
        .field("budget exhausted", outcome.timed_out);
    let rows = outcome
        .restarts
        .iter()
        .map(|r| vec![r.restart.to_string(), decimal(&r.a, p), format!("{:.9}", r.objective)])
        .collect();
    rep.table("restarts", &["restart", "A", "objective"], rows);
    if outcome.design.r() == 8 && outcome.design.v() == 36 && outcome.design.k() == 6 {
        let v = is_sylvester_design(&outcome.design)?;
        rep.field("sylvester design", v.is_sylvester())
            .field("reported upper bound", REPORTED_UPPER_BOUND_R8);
    }
    let commented: String =
        rep.render(fmt).lines().map(|l| format!("# {l}\n")).collect();
    match &args.output {
        Some(path) => {
            emit(&write_design(&outcome.design), Some(path))?;
            print!("{commented}");
        }
        None => print!("{}\n{commented}", write_design(&outcome.design)),
    }
    Ok(0)
}

fn dual(d: &ResolvableDesign, p: usize, fmt: Format) -> Result<()> {
    let dual = d.dual()?;
    let dd = &dual.design;
    let mut rep = Report::new();
    rep.field("design", d.label())
        .field("dual varieties", dd.v())
        .field("dual blocks", dd.blocks().len())
        .field("dual block size", dd.block_size().map_or("mixed".into(), |k| k.to_string()))
        .field(
            "dual resolvable",
            match &dual.resolution {
                Resolvability::Resolvable(_) => "yes",
                Resolvability::NotResolvable => "no",
                Resolvability::Unknown => "unknown (search budget exhausted)",
            },
        );
    match a_value_block_design(dd) {
        Ok(a) => rep.field("dual A", decimal(&a, p)).field("dual A exact", &a),
        Err(e) => rep.field("dual A", e),
    };
    if d.v() == 36 && d.k() == 6 {
        rep.field("semi-Latin", is_semi_latin(dd)?.is_some());
        match roy_check(d) {
            Ok(c) => rep
                .field("35/A", &c.lhs)
                .field("6(6-r) + (6r-1)/A'", &c.rhs)
                .field("identity residual", &c.residual),
            Err(e) => rep.field("identity", e),
        };
    }
    let body = match &dual.resolution {
        Resolvability::Resolvable(classes) => {
            let k = dd.block_size().unwrap_or(0);
            let replicates = classes
                .iter()
                .map(|c| Replicate::new(c.iter().map(|&j| dd.blocks()[j].clone()).collect()))
                .collect();
            write_design(&ResolvableDesign::from_parts(dd.v(), k, replicates, format!("dual of {}", d.label())))
        }
        // a non-resolvable dual is not a valid design file, so list its blocks as comments
        _ => dd.blocks().iter().map(|b: &Block| format!("# {b}\n")).collect(),
    };
    let commented: String = rep.render(fmt).lines().map(|l| format!("# {l}\n")).collect();
    print!("{body}\n{commented}");
    Ok(())
}
