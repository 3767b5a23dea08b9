use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, Context};
use clap::{Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use opidforge::gen::{self, GenConfig};
use opidforge::io::{
    ocpn_to_dot, opid_to_dot, read_ocpn_json, read_opid_json, read_opid_pnml, write_ocpn_json, write_opid_json,
    write_opid_pnml,
};
use opidforge::model::TypePair;
use opidforge::ocel::{parse_ocel_auto, Ocel};
use opidforge::ocpn::{self, Ocpn};
use opidforge::opid::{created_links, replay_structured, BoundedExecutor, NetKind, Opid};
use opidforge::relations::{discover_stable_m2o, RelationshipSet};
use opidforge::replay::{ReplayResult, DEFAULT_BUDGET};
use opidforge::transform::{t1, t_r};

/// Version of the `--json` output layout.
const SCHEMA_VERSION: u32 = 1;

const EXIT_REJECTED: u8 = 1;
const EXIT_SCHEMA: u8 = 2;
const EXIT_PRECONDITION: u8 = 3;
const EXIT_BUDGET: u8 = 4;

#[derive(Parser)]
#[command(name = "opidforge", version, about = "Object-centric Petri nets with identifiers")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Lower an OCPN to an OPID, optionally enforcing many-to-one relationships.
    Transform {
        #[arg(long)]
        ocpn: PathBuf,
        /// JSON file of `[many, one]` pairs, or `mine` to discover them from `--log`.
        #[arg(long)]
        relations: Option<String>,
        #[arg(long, default_value_t = 0.0)]
        noise: f64,
        #[arg(long, required_if_eq("relations", "mine"))]
        log: Option<PathBuf>,
        #[arg(long)]
        out_pnml: PathBuf,
        #[arg(long)]
        out_dot: Option<PathBuf>,
        #[arg(long)]
        out_json: Option<PathBuf>,
        #[arg(long)]
        json: bool,
    },
    /// Replay one or more logs on a model.
    Replay {
        #[arg(long)]
        model: PathBuf,
        #[arg(long, required = true, num_args = 1..)]
        log: Vec<PathBuf>,
        /// Model kind; required when it cannot be told from the file.
        #[arg(long, value_enum)]
        kind: Option<Kind>,
        #[arg(long, env = "OPIDFORGE_BUDGET", default_value_t = DEFAULT_BUDGET)]
        budget: usize,
        #[arg(long)]
        json: bool,
    },
    /// Mine stable many-to-one relationships from a log.
    Discover {
        #[arg(long)]
        log: PathBuf,
        #[arg(long, default_value_t = 0.0)]
        noise: f64,
        #[arg(long)]
        json: bool,
    },
    /// Write a random net, log and relationship set (test tooling).
    Gen {
        #[arg(long)]
        seed: u64,
        /// Simulate the log under link maps for the relationship set.
        #[arg(long)]
        synchronized: bool,
        #[arg(long)]
        out_dir: PathBuf,
    },
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Kind {
    Ocpn,
    T1,
    Tr,
    /// Any OPID, replayed by bounded exhaustive search.
    Opid,
}

struct Failure {
    code: u8,
    error: anyhow::Error,
}

type CliResult<T> = Result<T, Failure>;

fn fail(code: u8) -> impl FnOnce(anyhow::Error) -> Failure {
    move |error| Failure { code, error }
}

fn schema<E: Into<anyhow::Error>>(e: E) -> Failure {
    Failure { code: EXIT_SCHEMA, error: e.into() }
}

fn precondition<E: Into<anyhow::Error>>(e: E) -> Failure {
    Failure { code: EXIT_PRECONDITION, error: e.into() }
}

fn read(path: &Path) -> CliResult<Vec<u8>> {
    fs::read(path).with_context(|| format!("cannot read {}", path.display())).map_err(fail(EXIT_SCHEMA))
}

fn write(path: &Path, contents: &str) -> CliResult<()> {
    fs::write(path, contents).with_context(|| format!("cannot write {}", path.display())).map_err(fail(EXIT_SCHEMA))
}

fn read_log(path: &Path) -> CliResult<Ocel> {
    parse_ocel_auto(&read(path)?).with_context(|| format!("invalid log {}", path.display())).map_err(fail(EXIT_SCHEMA))
}

fn parse_relations(bytes: &[u8]) -> CliResult<RelationshipSet> {
    let pairs: Vec<(String, String)> =
        serde_json::from_slice(bytes).context("relations must be a JSON array of [many, one] pairs").map_err(schema)?;
    RelationshipSet::new(pairs.into_iter().map(|(m, o)| TypePair::new(m.as_str(), o.as_str())))
        .map_err(precondition)
}

fn print_json(value: Value) {
    println!("{}", serde_json::to_string_pretty(&value).expect("json values serialize"));
}

fn transform(
    ocpn_path: &Path,
    relations: Option<&str>,
    noise: f64,
    log: Option<&Path>,
    outputs: (&Path, Option<&Path>, Option<&Path>),
    as_json: bool,
) -> CliResult<u8> {
    let net = read_ocpn_json(&read(ocpn_path)?).map_err(schema)?;
    let relations = match relations {
        None => None,
        Some("mine") => {
            let log = read_log(log.ok_or_else(|| schema(anyhow!("--relations mine needs --log")))?)?;
            Some(discover_stable_m2o(&log, noise).stable_set())
        }
        Some(path) => Some(parse_relations(&read(Path::new(path))?)?),
    };
    let lowered = t1(&net).map_err(precondition)?;
    let out = match &relations {
        Some(r) => t_r(&lowered, r).map_err(precondition)?,
        None => lowered,
    };
    let (pnml, dot, opid_json) = outputs;
    write(pnml, &write_opid_pnml(&out))?;
    if let Some(path) = dot {
        write(path, &opid_to_dot(&out))?;
    }
    if let Some(path) = opid_json {
        write(path, &write_opid_json(&out))?;
    }
    let applied: Vec<String> = relations.iter().flat_map(|r| r.pairs().iter().map(|p| p.to_string())).collect();
    if as_json {
        print_json(json!({
            "schema_version": SCHEMA_VERSION,
            "command": "transform",
            "relations": relations.as_ref().map(|r| r.pairs().iter().map(|p| [p.many.as_str(), p.one.as_str()]).collect::<Vec<_>>()),
            "places": out.places().len(),
            "transitions": out.transitions().len(),
            "arcs": out.arcs().len(),
        }));
    } else {
        println!(
            "{} net: {} places, {} transitions, {} arcs; relations: [{}]",
            if relations.is_some() { "TR" } else { "T1" },
            out.places().len(),
            out.transitions().len(),
            out.arcs().len(),
            applied.join(" ")
        );
    }
    Ok(0)
}

enum Model {
    Ocpn(Ocpn),
    Opid(Opid),
}

fn load_model(bytes: &[u8], kind: Option<Kind>) -> CliResult<(Model, Kind)> {
    let text = std::str::from_utf8(bytes).map_err(schema)?;
    if text.trim_start().starts_with('<') {
        return opid_kind(read_opid_pnml(text).map_err(schema)?, kind);
    }
    let value: Value = serde_json::from_str(text).map_err(schema)?;
    let places = value.get("places").and_then(Value::as_array);
    let looks_ocpn = places.and_then(|p| p.first()).is_some_and(|p| p.get("type").is_some());
    let looks_opid = places.and_then(|p| p.first()).is_some_and(|p| p.get("color").is_some());
    match (looks_ocpn, looks_opid, kind) {
        (true, _, None | Some(Kind::Ocpn)) | (false, false, Some(Kind::Ocpn)) => {
            Ok((Model::Ocpn(read_ocpn_json(bytes).map_err(schema)?), Kind::Ocpn))
        }
        (true, _, Some(_)) => Err(schema(anyhow!("model is an OCPN but --kind asks for an OPID"))),
        (false, true, _) | (false, false, Some(_)) => opid_kind(read_opid_json(bytes).map_err(schema)?, kind),
        (false, false, None) => Err(schema(anyhow!("cannot tell the model kind from the file; pass --kind"))),
    }
}

fn opid_kind(net: Opid, kind: Option<Kind>) -> CliResult<(Model, Kind)> {
    let detected = match net.kind() {
        NetKind::T1 => Some(Kind::T1),
        NetKind::Tr => Some(Kind::Tr),
        NetKind::Plain => None,
    };
    let kind = match (kind, detected) {
        (Some(Kind::Ocpn), _) => return Err(schema(anyhow!("model is an OPID but --kind asks for an OCPN"))),
        (Some(Kind::Opid), _) => Kind::Opid,
        (Some(k), Some(d)) if k != d => return Err(schema(anyhow!("--kind does not match the role tags of the model"))),
        (Some(Kind::T1 | Kind::Tr), None) => {
            return Err(schema(anyhow!("model has no role tags; only --kind opid applies")))
        }
        (_, Some(d)) => d,
        (None, None) => return Err(schema(anyhow!("model carries no role tags; pass --kind opid"))),
    };
    Ok((Model::Opid(net), kind))
}

struct Replayed {
    log: PathBuf,
    accepted: bool,
    budget_exhausted: bool,
    failure: Value,
    states_visited: usize,
    links: Option<Value>,
    diagnostics: Vec<String>,
}

fn summarize<B>(log: &Path, r: &ReplayResult<B>) -> Replayed {
    let mut diagnostics = Vec::new();
    if let Some(f) = &r.failure {
        let at = f.event_index.map(|i| format!("event {i}: ")).unwrap_or_default();
        diagnostics.push(format!("{at}{}", f.reason));
        if let opidforge::replay::FailureReason::LinkInferenceFailed { violations } = &f.reason {
            diagnostics.extend(violations.iter().map(|v| format!("  {v}")));
        }
    }
    Replayed {
        log: log.to_path_buf(),
        accepted: r.accepted,
        budget_exhausted: r.budget_exhausted(),
        failure: serde_json::to_value(&r.failure).expect("failures serialize"),
        states_visited: r.states_visited,
        links: None,
        diagnostics,
    }
}

fn replay_one(model: &Model, kind: Kind, path: &Path, log: &Ocel, budget: usize) -> Replayed {
    match (model, kind) {
        (Model::Ocpn(net), _) => summarize(path, &ocpn::replay_with_budget(net, log, budget)),
        (Model::Opid(net), Kind::Opid) => {
            summarize(path, &BoundedExecutor::new(net, log.objects().cloned(), budget).accepts_log(log))
        }
        (Model::Opid(net), _) => {
            let r = replay_structured(net, log, budget).expect("kind was checked against the role tags");
            let mut out = summarize(path, &r);
            if r.accepted && kind == Kind::Tr {
                let links: serde_json::Map<String, Value> = created_links(net, &r)
                    .into_iter()
                    .map(|(pair, tokens)| (pair.to_string(), serde_json::to_value(tokens).expect("tokens serialize")))
                    .collect();
                out.links = Some(Value::Object(links));
            }
            out
        }
    }
}

fn replay(model_path: &Path, logs: &[PathBuf], kind: Option<Kind>, budget: usize, as_json: bool) -> CliResult<u8> {
    let (model, kind) = load_model(&read(model_path)?, kind)?;
    let parsed = logs.iter().map(|p| read_log(p)).collect::<CliResult<Vec<_>>>()?;
    let results: Vec<Replayed> = std::thread::scope(|s| {
        let handles: Vec<_> = logs
            .iter()
            .zip(&parsed)
            .map(|(path, log)| {
                let model = &model;
                s.spawn(move || replay_one(model, kind, path, log, budget))
            })
            .collect();
        handles.into_iter().map(|h| h.join().expect("replay thread")).collect()
    });

    if as_json {
        let entries: Vec<Value> = results
            .iter()
            .map(|r| {
                json!({
                    "log": r.log.display().to_string(),
                    "accepted": r.accepted,
                    "budget_exhausted": r.budget_exhausted,
                    "failure": r.failure,
                    "states_visited": r.states_visited,
                    "links": r.links,
                })
            })
            .collect();
        print_json(json!({
            "schema_version": SCHEMA_VERSION,
            "command": "replay",
            "kind": kind_name(kind),
            "results": entries,
        }));
    } else {
        for r in &results {
            println!("{} {}", if r.accepted { "ACCEPTED" } else { "REJECTED" }, r.log.display());
            for d in &r.diagnostics {
                println!("  {d}");
            }
        }
    }
    Ok(if results.iter().any(|r| r.budget_exhausted) {
        EXIT_BUDGET
    } else if results.iter().all(|r| r.accepted) {
        0
    } else {
        EXIT_REJECTED
    })
}

fn kind_name(kind: Kind) -> &'static str {
    match kind {
        Kind::Ocpn => "ocpn",
        Kind::T1 => "t1",
        Kind::Tr => "tr",
        Kind::Opid => "opid",
    }
}

fn discover(log: &Path, noise: f64, as_json: bool) -> CliResult<u8> {
    if !(0.0..=1.0).contains(&noise) {
        return Err(schema(anyhow!("noise must lie in [0, 1]")));
    }
    let report = discover_stable_m2o(&read_log(log)?, noise);
    if as_json {
        let mut value = serde_json::to_value(&report).expect("reports serialize");
        value["schema_version"] = json!(SCHEMA_VERSION);
        value["command"] = json!("discover");
        value["summary_text"] = json!(report.summary.to_string());
        print_json(value);
    } else {
        print!("{}", report.render_table());
    }
    Ok(0)
}

fn generate(seed: u64, synchronized: bool, dir: &Path) -> CliResult<u8> {
    let inst = gen::instance(seed, &GenConfig::default(), synchronized);
    fs::create_dir_all(dir).with_context(|| format!("cannot create {}", dir.display())).map_err(schema)?;
    let pairs: Vec<[&str; 2]> = inst.relations.pairs().iter().map(|p| [p.many.as_str(), p.one.as_str()]).collect();
    write(&dir.join("ocpn.json"), &write_ocpn_json(&inst.net))?;
    write(&dir.join("log.json"), &inst.log.to_native_json())?;
    write(&dir.join("relations.json"), &serde_json::to_string(&pairs).expect("pairs serialize"))?;
    write(&dir.join("ocpn.dot"), &ocpn_to_dot(&inst.net))?;
    println!("wrote ocpn.json, log.json, relations.json and ocpn.dot to {}", dir.display());
    Ok(0)
}

fn run(cli: Cli) -> CliResult<u8> {
    match cli.command {
        Command::Transform { ocpn, relations, noise, log, out_pnml, out_dot, out_json, json } => transform(
            &ocpn,
            relations.as_deref(),
            noise,
            log.as_deref(),
            (&out_pnml, out_dot.as_deref(), out_json.as_deref()),
            json,
        ),
        Command::Replay { model, log, kind, budget, json } => replay(&model, &log, kind, budget, json),
        Command::Discover { log, noise, json } => discover(&log, noise, json),
        Command::Gen { seed, synchronized, out_dir } => generate(seed, synchronized, &out_dir),
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(code) => ExitCode::from(code),
        Err(Failure { code, error }) => {
            eprintln!("error: {error:#}");
            ExitCode::from(code)
        }
    }
}
