mod output;

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, bail, Context};
use clap::{Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use gibbs_core::exactgibbs::gibbs_probability;
use gibbs_core::expansion::{
    consistency_check, thermodynamic_probability, verify_bounds, Certificate, ExpansionOptions, RhoChoice,
};
use gibbs_core::graphkit::{
    associated_graph, associated_track, l_max, size_of, verify_graph_bounds, Lambda0,
};
use gibbs_core::model::{event_probability_p0, CylinderEvent, EventConfig, InteractionModel, ModelConfig};
use gibbs_core::{Budget, Error, LatticePoint, Region, VerificationRecord};

use output::{records_csv, render_json};

const EXIT_CHECK_FAILED: u8 = 1;
const EXIT_VALIDATION: u8 = 3;
const EXIT_RESOURCE: u8 = 4;
const EXIT_REFUSED: u8 = 5;

#[derive(Parser)]
#[command(
    name = "gibbs",
    version,
    about = "Exact Gibbs probabilities and certified cluster expansions on ℤ^ν"
)]
struct Cli {
    /// Worker threads (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Write the report here instead of stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    format: Format,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Csv,
}

#[derive(Clone, Copy, ValueEnum)]
enum RhoArg {
    Model,
    Fixed,
}

#[derive(clap::Args)]
struct ModelArgs {
    /// Model config (JSON).
    #[arg(long)]
    model: PathBuf,
    /// Event config (JSON).
    #[arg(long)]
    event: PathBuf,
    /// Override the model's λ.
    #[arg(long)]
    lambda: Option<f64>,
    /// Override a top-level model key; the value is read as JSON, or as a
    /// string if it is not valid JSON. Repeatable.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    sets: Vec<String>,
}

#[derive(Subcommand)]
enum Command {
    /// S(B), the associated graph and the associated track of a point set.
    Size {
        /// Points such as "[0,0],[1,1]".
        #[arg(long)]
        points: String,
        #[arg(long)]
        nu: Option<usize>,
    },
    /// L, λ₀ and the exhaustive lattice counting checks.
    Constants {
        #[arg(long)]
        nu: usize,
        #[arg(long, default_value_t = 1)]
        r: u32,
        /// Longest closed track length to count.
        #[arg(long, default_value_t = 6)]
        max_n: usize,
    },
    /// Exact P_N(A) by enumerating every configuration of Λ_N.
    FiniteProb {
        #[command(flatten)]
        model: ModelArgs,
        #[arg(long = "N")]
        n: u32,
    },
    /// The series Σ J_A(M_n, n) with its tail certificate.
    Expand {
        #[command(flatten)]
        model: ModelArgs,
        #[arg(long = "n-max")]
        n_max: usize,
        /// Compare with the exact P_N(A) on this cube.
        #[arg(long = "N")]
        n: Option<u32>,
        #[arg(long, value_enum, default_value_t = RhoArg::Model)]
        rho: RhoArg,
    },
    /// Bound checks on enumerated families plus the consistency checks.
    Verify {
        #[command(flatten)]
        model: ModelArgs,
        /// Orders to check, "a..b" or a single order.
        #[arg(long = "n-range")]
        n_range: String,
        #[arg(long = "N")]
        n: u32,
        /// Enlarged base for the consistency check (default: the event
        /// base plus one neighbouring site).
        #[arg(long)]
        enlarge: Option<String>,
        #[arg(long, value_enum, default_value_t = RhoArg::Model)]
        rho: RhoArg,
    },
}

/// What a subcommand produced: the document to print and the exit status.
struct Outcome {
    json: Value,
    csv: String,
    status: u8,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(n) = cli.threads {
        if n == 0 {
            eprintln!("error: --threads must be at least 1");
            return ExitCode::from(2);
        }
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    }
    match run(&cli) {
        Ok(outcome) => {
            let text = match cli.format {
                Format::Json => render_json(&outcome.json),
                Format::Csv => outcome.csv,
            };
            let written = match &cli.out {
                Some(path) => fs::write(path, &text).with_context(|| format!("writing {}", path.display())),
                None => {
                    print!("{text}");
                    Ok(())
                }
            };
            if let Err(e) = written {
                eprintln!("error: {e:#}");
                return ExitCode::from(EXIT_CHECK_FAILED);
            }
            ExitCode::from(outcome.status)
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            let code = match e.downcast_ref::<Error>() {
                Some(Error::ResourceLimit { .. }) => EXIT_RESOURCE,
                _ => EXIT_VALIDATION,
            };
            ExitCode::from(code)
        }
    }
}

fn run(cli: &Cli) -> anyhow::Result<Outcome> {
    let budget = Budget::default();
    match &cli.command {
        Command::Size { points, nu } => cmd_size(points, *nu, &budget),
        Command::Constants { nu, r, max_n } => cmd_constants(*nu, *r, *max_n, &budget),
        Command::FiniteProb { model, n } => {
            let (m, a) = load(model, &budget)?;
            let p = gibbs_probability(&m, *n, &a, &budget)?;
            let p0 = event_probability_p0(m.measure(), &a, &budget)?;
            Ok(Outcome {
                json: json!({ "N": n, "probability": p, "p0_event": p0 }),
                csv: format!(
                    "N,probability,p0_event\n{n},{},{}\n",
                    output::float(p),
                    output::float(p0)
                ),
                status: 0,
            })
        }
        Command::Expand { model, n_max, n, rho } => {
            let (m, a) = load(model, &budget)?;
            let options = ExpansionOptions {
                rho: rho_choice(*rho),
                oracle_cube: *n,
            };
            let report = thermodynamic_probability(&m, &a, *n_max, &options, &budget)?;
            if let Some(note) = &report.note {
                eprintln!("warning: {note}");
            }
            let status = if report.certificate == Certificate::Refused {
                EXIT_REFUSED
            } else {
                0
            };
            Ok(Outcome {
                json: serde_json::to_value(&report)?,
                csv: report.to_csv(),
                status,
            })
        }
        Command::Verify {
            model,
            n_range,
            n,
            enlarge,
            rho,
        } => {
            let (m, a) = load(model, &budget)?;
            let orders = parse_range(n_range)?;
            let enlarged = match enlarge {
                Some(text) => a.base().union(&parse_points(text, Some(m.nu()))?),
                None => default_enlargement(a.base()),
            };
            let mut records = verify_bounds(&m, &a, orders.clone(), *n, &budget)?;
            let options = ExpansionOptions {
                rho: rho_choice(*rho),
                oracle_cube: None,
            };
            records.extend(consistency_check(
                &m,
                &a,
                &enlarged,
                *orders.end(),
                &options,
                &budget,
            )?);
            Ok(records_outcome(json!({}), records))
        }
    }
}

fn rho_choice(rho: RhoArg) -> RhoChoice {
    match rho {
        RhoArg::Model => RhoChoice::Model,
        RhoArg::Fixed => RhoChoice::Fixed,
    }
}

fn records_outcome(mut head: Value, records: Vec<VerificationRecord>) -> Outcome {
    let all_pass = records.iter().all(|r| r.pass);
    let csv = records_csv(&records);
    head["all_pass"] = json!(all_pass);
    head["records"] = serde_json::to_value(&records).expect("records serialize");
    Outcome {
        json: head,
        csv,
        status: if all_pass { 0 } else { EXIT_CHECK_FAILED },
    }
}

fn cmd_size(points: &str, nu: Option<usize>, budget: &Budget) -> anyhow::Result<Outcome> {
    let region = parse_points(points, nu)?;
    let s = size_of(&region, budget)?;
    let (graph, track) = if region.len() >= 2 {
        (
            Some(associated_graph(&region, budget)?),
            Some(associated_track(&region, budget)?),
        )
    } else {
        (None, None)
    };
    let json = json!({
        "points": region,
        "size": s,
        "associated_graph": graph,
        "associated_track": track,
    });
    let mut csv = String::from("size,vertices,edges,track_steps\n");
    csv.push_str(&format!(
        "{s},{},{},{}\n",
        graph.as_ref().map_or(region.len(), |g| g.vertices().len()),
        graph.as_ref().map_or(0, |g| g.edge_count()),
        track.as_ref().map_or(0, |t| t.steps()),
    ));
    Ok(Outcome { json, csv, status: 0 })
}

fn cmd_constants(nu: usize, r: u32, max_n: usize, budget: &Budget) -> anyhow::Result<Outcome> {
    let l = l_max(nu, r, budget)?;
    let lambda0 = Lambda0::from_l(nu, r, l);
    let records = verify_graph_bounds(nu, r, max_n, budget)?;
    let head = json!({
        "nu": nu,
        "r": r,
        "L": l,
        "lambda0": lambda0.value(),
        "lambda0_fraction": format!("1/{}", lambda0.denominator),
    });
    Ok(records_outcome(head, records))
}

fn load(args: &ModelArgs, budget: &Budget) -> anyhow::Result<(InteractionModel, CylinderEvent)> {
    let mut value = read_json(&args.model)?;
    let obj = value
        .as_object_mut()
        .ok_or_else(|| anyhow!("model config must be a JSON object"))?;
    for set in &args.sets {
        let (key, raw) = set
            .split_once('=')
            .ok_or_else(|| anyhow!("--set expects KEY=VALUE, got {set:?}"))?;
        let parsed = serde_json::from_str(raw).unwrap_or_else(|_| Value::String(raw.to_string()));
        obj.insert(key.trim().to_string(), parsed);
    }
    if let Some(l) = args.lambda {
        obj.insert("lambda".into(), json!(l));
    }
    let model = ModelConfig::from_value(value)?.build(budget)?;
    let event = EventConfig::from_value(read_json(&args.event)?)?.build()?;
    if event.base().dim() != Some(model.nu()) {
        bail!(Error::InvalidInput(
            "event base dimension differs from the model's ν".into()
        ));
    }
    Ok((model, event))
}

fn read_json(path: &Path) -> anyhow::Result<Value> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))
}

/// "[0,0],[1,1]" (outer brackets optional).
fn parse_points(text: &str, nu: Option<usize>) -> anyhow::Result<Region> {
    let trimmed = text.trim();
    let wrapped = if trimmed.starts_with("[[") {
        trimmed.to_string()
    } else {
        format!("[{trimmed}]")
    };
    let coords: Vec<Vec<i64>> =
        serde_json::from_str(&wrapped).map_err(|e| Error::InvalidInput(format!("points {text:?}: {e}")))?;
    let points = coords
        .into_iter()
        .map(LatticePoint::new)
        .collect::<Result<Vec<_>, _>>()?;
    let region = Region::new(points)?;
    if let (Some(nu), Some(d)) = (nu, region.dim()) {
        if nu != d {
            bail!(Error::InvalidInput(format!(
                "points have dimension {d}, expected {nu}"
            )));
        }
    }
    Ok(region)
}

fn parse_range(text: &str) -> anyhow::Result<std::ops::RangeInclusive<usize>> {
    let bad = || Error::InvalidInput(format!("--n-range {text:?}: expected \"a..b\" or a single order"));
    let (a, b) = match text.split_once("..") {
        Some((a, b)) => (a, b.trim_start_matches('=')),
        None => (text, text),
    };
    let a: usize = a.trim().parse().map_err(|_| bad())?;
    let b: usize = b.trim().parse().map_err(|_| bad())?;
    if a > b {
        bail!(bad());
    }
    Ok(a..=b)
}

/// The base plus the site one step along +e₁ from its largest point.
fn default_enlargement(base: &Region) -> Region {
    let last = base.points().last().expect("event bases are nonempty");
    base.union(&Region::new(vec![last.stepped(0, 1)]).expect("one point"))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn points_and_ranges() {
        let r = parse_points("[0,0],[1,1]", Some(2)).unwrap();
        assert_eq!(r.len(), 2);
        assert!(parse_points("[0],[1,1]", None).is_err());
        assert!(parse_points("[0],[1]", Some(2)).is_err());
        assert_eq!(parse_range("1..5").unwrap(), 1..=5);
        assert_eq!(parse_range("2..=3").unwrap(), 2..=3);
        assert_eq!(parse_range("4").unwrap(), 4..=4);
        assert!(parse_range("5..1").is_err());
    }
}
