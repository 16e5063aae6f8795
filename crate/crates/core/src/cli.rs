//! Experiment harness behind the `colorsim` binary.

use std::fs::File;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Parser, ValueEnum};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::bidding::{color_with_bidding, generate_good_instance, BiddingKnobs, GoodSpec};
use crate::clique::{run_clique_coloring, CliqueConfig};
use crate::graph::{
    gnp, random_regular, read_edge_list, read_palette_file, validate_coloring, Coloring,
    ListColoringInstance, ValidityReport, Vertex,
};
use crate::lca::{lca_color, lca_sweep, LcaConfig, LcaOracle};
use crate::mpc::{run_mpc_coloring, MpcConfig};
use crate::rng::trial_seed;
use crate::{Error, Result};

pub const EXIT_OK: i32 = 0;
pub const EXIT_INVALID: i32 = 1;
pub const EXIT_CONFIG: i32 = 2;

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Model {
    Clique,
    Mpc,
    Lca,
    Bidding,
}

#[derive(Parser, Debug)]
#[command(name = "colorsim", version, about = "Randomized (Δ+1)-list coloring simulator")]
pub struct Args {
    #[arg(long, value_enum, default_value = "clique")]
    pub model: Model,
    /// `gnp:n,p`, `regular:n,d` or `good:n,delta[,palette]`
    #[arg(long, conflicts_with = "edge_list")]
    pub gen: Option<String>,
    #[arg(long)]
    pub edge_list: Option<PathBuf>,
    /// One line per vertex: `v: c1 c2 ...`. Defaults to `0..=Δ` for everyone.
    #[arg(long)]
    pub palette_file: Option<PathBuf>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = 1)]
    pub trials: u64,
    #[arg(long, default_value_t = 0.5)]
    pub alpha: f64,
    #[arg(long)]
    pub beta: Option<f64>,
    #[arg(long)]
    pub c0: Option<u64>,
    #[arg(long)]
    pub gamma: Option<f64>,
    /// JSON report path; the CSV summary goes next to it with a `.csv` extension.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// `key=value`, repeatable. Keys are dotted paths into the knob tree
    /// (`clique.c_stop`) or one of the short aliases listed in `--help-knobs`.
    #[arg(long = "knob", value_name = "KEY=VALUE")]
    pub knobs: Vec<String>,
    /// LCA: answer a single vertex.
    #[arg(long, conflicts_with = "sweep")]
    pub query: Option<Vertex>,
    /// LCA: answer every vertex (the default).
    #[arg(long)]
    pub sweep: bool,
    #[arg(long)]
    pub help_knobs: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum Source {
    Gnp { n: usize, p: f64 },
    Regular { n: usize, d: usize },
    Good { n: usize, delta: usize, palette: usize },
    File { edge_list: PathBuf, palette_file: Option<PathBuf> },
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Knobs {
    pub clique: CliqueConfig,
    pub mpc: MpcConfig,
    pub bidding: BiddingKnobs,
    pub lca: LcaConfig,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub model: Model,
    pub source: Source,
    #[serde(rename = "masterSeed")]
    pub master_seed: u64,
    pub trials: u64,
    pub alpha: f64,
    pub knobs: Knobs,
    #[serde(rename = "lcaQuery", skip_serializing_if = "Option::is_none")]
    pub lca_query: Option<Vertex>,
    #[serde(skip)]
    pub out: Option<PathBuf>,
}

/// Short names mapped onto every knob path they set.
const ALIASES: &[(&str, &[&str])] = &[
    ("cQ", &["clique.partition.c_q", "mpc.partition.c_q"]),
    ("cMin", &["clique.partition.c_min", "mpc.partition.c_min"]),
    ("slack", &["clique.partition.slack", "mpc.partition.slack"]),
    ("cL", &["clique.c_l"]),
    ("cStop", &["clique.c_stop"]),
    ("cHigh", &["clique.c_high"]),
    ("cBase", &["mpc.c_base"]),
    ("cMem", &["mpc.c_mem"]),
    ("cTot", &["mpc.c_tot"]),
    ("cQuery", &["lca.c_query"]),
    ("cComp", &["lca.c_comp"]),
    ("sharedMemo", &["lca.shared_memo"]),
    (
        "pStarFloor",
        &[
            "bidding.p_star_floor",
            "clique.bidding.p_star_floor",
            "lca.bidding.p_star_floor",
        ],
    ),
];

const BIDDING_PATHS: &[&str] = &["bidding", "clique.bidding", "lca.bidding"];

fn parse_source(spec: &str) -> Result<Source> {
    let bad = || Error::Config(format!("cannot parse generator `{spec}`"));
    let (kind, rest) = spec.split_once(':').ok_or_else(bad)?;
    let fields: Vec<&str> = rest.split(',').map(str::trim).collect();
    let int = |i: usize| -> Result<usize> {
        fields.get(i).ok_or_else(bad)?.parse().map_err(|_| bad())
    };
    match (kind, fields.len()) {
        ("gnp", 2) => Ok(Source::Gnp {
            n: int(0)?,
            p: fields[1].parse().map_err(|_| bad())?,
        }),
        ("regular", 2) => Ok(Source::Regular { n: int(0)?, d: int(1)? }),
        ("good", 2) | ("good", 3) => {
            let delta = int(1)?;
            let palette = if fields.len() == 3 { int(2)? } else { 2 * delta + 1 };
            Ok(Source::Good { n: int(0)?, delta, palette })
        }
        _ => Err(bad()),
    }
}

fn set_path(root: &mut Value, path: &str, raw: &str) -> Result<()> {
    let mut cur = root;
    for key in path.split('.') {
        cur = cur
            .get_mut(key)
            .ok_or_else(|| Error::Config(format!("unknown knob `{path}`")))?;
    }
    let parsed = match cur {
        Value::Bool(_) => raw.parse::<bool>().map(Value::from).ok(),
        Value::Number(n) if n.is_f64() => raw.parse::<f64>().map(Value::from).ok(),
        Value::Number(_) => raw.parse::<u64>().map(Value::from).ok(),
        Value::Null => raw
            .parse::<u64>()
            .map(Value::from)
            .ok()
            .or_else(|| (raw == "none").then_some(Value::Null)),
        _ => None,
    };
    *cur = parsed.ok_or_else(|| Error::Config(format!("bad value `{raw}` for `{path}`")))?;
    Ok(())
}

fn apply_knobs(knobs: &mut Knobs, assignments: &[(String, String)]) -> Result<()> {
    let mut tree = serde_json::to_value(&*knobs).expect("knobs serialize");
    for (key, raw) in assignments {
        match ALIASES.iter().find(|(a, _)| a == key) {
            Some((_, paths)) => {
                for p in *paths {
                    set_path(&mut tree, p, raw)?;
                }
            }
            None => set_path(&mut tree, key, raw)?,
        }
    }
    *knobs = serde_json::from_value(tree).map_err(|e| Error::Config(e.to_string()))?;
    Ok(())
}

pub fn knob_help() -> String {
    let tree = serde_json::to_string_pretty(&Knobs::default()).expect("knobs serialize");
    let mut out = String::from("aliases:\n");
    for (a, paths) in ALIASES {
        out.push_str(&format!("  {a} -> {}\n", paths.join(", ")));
    }
    out.push_str("defaults:\n");
    out.push_str(&tree);
    out
}

impl RunConfig {
    pub fn from_args(args: &Args) -> Result<Self> {
        let source = match (&args.gen, &args.edge_list) {
            (Some(g), None) => parse_source(g)?,
            (None, Some(path)) => Source::File {
                edge_list: path.clone(),
                palette_file: args.palette_file.clone(),
            },
            (None, None) => return Err(Error::Config("need --gen or --edge-list".into())),
            (Some(_), Some(_)) => unreachable!("clap rejects both"),
        };
        if args.palette_file.is_some() && !matches!(source, Source::File { .. }) {
            return Err(Error::Config("--palette-file needs --edge-list".into()));
        }
        let mut assignments = Vec::new();
        for paths in BIDDING_PATHS {
            if let Some(b) = args.beta {
                assignments.push((format!("{paths}.beta"), b.to_string()));
            }
            if let Some(c) = args.c0 {
                assignments.push((format!("{paths}.c0"), c.to_string()));
            }
        }
        if let Some(g) = args.gamma {
            assignments.push(("clique.gamma".into(), g.to_string()));
            assignments.push(("mpc.gamma".into(), g.to_string()));
        }
        for kv in &args.knobs {
            let (k, v) = kv
                .split_once('=')
                .ok_or_else(|| Error::Config(format!("knob `{kv}` is not key=value")))?;
            assignments.push((k.trim().to_string(), v.trim().to_string()));
        }
        let mut knobs = Knobs::default();
        apply_knobs(&mut knobs, &assignments)?;
        if !(args.alpha > 0.0 && args.alpha < 1.0) {
            return Err(Error::Config(format!("--alpha {} outside (0, 1)", args.alpha)));
        }
        if args.query.is_some() && args.model != Model::Lca {
            return Err(Error::Config("--query applies to --model lca only".into()));
        }
        Ok(RunConfig {
            model: args.model,
            source,
            master_seed: args.seed,
            trials: args.trials,
            alpha: args.alpha,
            knobs,
            lca_query: args.query,
            out: args.out.clone(),
        })
    }
}

/// Loads or generates the instance of one trial. Errors here are config
/// errors: a missing file or an infeasible generator.
pub fn build_instance(source: &Source, seed: u64) -> Result<ListColoringInstance> {
    match source {
        Source::Gnp { n, p } => Ok(ListColoringInstance::uniform(gnp(*n, *p, seed)?)),
        Source::Regular { n, d } => Ok(ListColoringInstance::uniform(random_regular(*n, *d, seed)?)),
        Source::Good { n, delta, palette } => {
            let mut spec = GoodSpec::new(*n, *delta, BiddingKnobs::default().c0, 2.0);
            spec.palette_size = *palette;
            generate_good_instance(&spec, seed)?.to_list_instance()
        }
        Source::File { edge_list, palette_file } => {
            let g = read_edge_list(edge_list)?;
            match palette_file {
                None => Ok(ListColoringInstance::uniform(g)),
                Some(p) => {
                    let pals = read_palette_file(p, &g)?;
                    ListColoringInstance::with_inferred_floor(g, pals)
                }
            }
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct TrialReport {
    pub trial: u64,
    pub seed: u64,
    pub n: usize,
    pub delta: usize,
    pub valid: bool,
    pub validity: Option<ValidityReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
    pub trace: Value,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub answers: Vec<Value>,
}

#[derive(Clone, Debug, Serialize)]
pub struct Report {
    pub config: RunConfig,
    pub trials: Vec<TrialReport>,
}

impl Report {
    pub fn all_valid(&self) -> bool {
        self.trials.iter().all(|t| t.valid)
    }
}

fn run_model(cfg: &RunConfig, inst: &ListColoringInstance, seed: u64) -> Result<(Coloring, Value, Vec<Value>)> {
    let k = &cfg.knobs;
    match cfg.model {
        Model::Clique => {
            let (c, t) = run_clique_coloring(inst, &k.clique, seed)?;
            Ok((c, to_json(&t), Vec::new()))
        }
        Model::Mpc => {
            let (c, t) = run_mpc_coloring(inst, cfg.alpha, &k.mpc, seed)?;
            Ok((c, to_json(&t), Vec::new()))
        }
        Model::Bidding => {
            let (c, t) = color_with_bidding(inst, &k.bidding, seed)?;
            Ok((c, to_json(&t), Vec::new()))
        }
        Model::Lca => {
            let oracle = LcaOracle::new(inst, seed);
            let answers = match cfg.lca_query {
                Some(v) => vec![lca_color(&oracle, v, &k.lca)?],
                None => lca_sweep(&oracle, &k.lca).into_iter().collect::<Result<_>>()?,
            };
            let mut coloring = Coloring::new(inst.n());
            for a in &answers {
                coloring.set(a.vertex, a.color);
            }
            let totals = oracle.totals();
            let max_probes = answers.iter().map(|a| a.queries.total()).max().unwrap_or(0);
            let trace = serde_json::json!({
                "model": "lca",
                "calls": answers.len(),
                "maxProbes": max_probes,
                "budget": k.lca.probe_budget(inst.n(), inst.max_degree()),
                "totals": totals,
            });
            let lines = answers
                .iter()
                .map(|a| serde_json::to_value(a).expect("answer serializes"))
                .collect();
            Ok((coloring, trace, lines))
        }
    }
}

fn to_json<T: Serialize>(t: &T) -> Value {
    serde_json::to_value(t).expect("trace serializes")
}

fn run_trial(cfg: &RunConfig, trial: u64, inst_cache: Option<&ListColoringInstance>) -> Result<TrialReport> {
    let seed = trial_seed(cfg.master_seed, trial);
    let owned;
    let inst = match inst_cache {
        Some(i) => i,
        None => {
            owned = build_instance(&cfg.source, seed)?;
            &owned
        }
    };
    let mut report = TrialReport {
        trial,
        seed,
        n: inst.n(),
        delta: inst.max_degree(),
        valid: false,
        validity: None,
        error: None,
        trace: Value::Null,
        answers: Vec::new(),
    };
    match run_model(cfg, inst, seed) {
        Ok((coloring, trace, answers)) => {
            let validity = validate_coloring(inst, &coloring);
            // a single LCA query colors one vertex; only its palette is checkable
            report.valid = if cfg.lca_query.is_some() {
                validity.is_empty()
            } else {
                validity.is_valid_total()
            };
            report.validity = Some(validity);
            report.trace = trace;
            report.answers = answers;
        }
        Err(e) => report.error = Some(e.to_string()),
    }
    Ok(report)
}

/// Runs every trial. Instance construction failures abort with a config
/// error; pipeline failures are recorded in the trial and make it invalid.
pub fn execute(cfg: &RunConfig) -> Result<Report> {
    // file inputs do not depend on the seed; read them once
    let shared = match &cfg.source {
        Source::File { .. } if cfg.trials > 0 => Some(build_instance(&cfg.source, 0)?),
        _ => None,
    };
    let trials = (0..cfg.trials)
        .into_par_iter()
        .map(|t| run_trial(cfg, t, shared.as_ref()))
        .collect::<Result<Vec<_>>>()?;
    Ok(Report { config: cfg.clone(), trials })
}

fn io_err(path: &Path, source: std::io::Error) -> Error {
    Error::Io {
        path: path.to_path_buf(),
        source,
    }
}

fn csv_path(out: &Path) -> PathBuf {
    out.with_extension("csv")
}

#[derive(Serialize)]
struct CsvRow<'a> {
    trial: u64,
    seed: u64,
    model: Model,
    n: usize,
    delta: usize,
    valid: bool,
    uncolored: usize,
    violations: usize,
    rounds: Option<u64>,
    depth: Option<u64>,
    error: &'a str,
}

pub fn write_outputs(report: &Report, out: &Path) -> Result<()> {
    let mut f = File::create(out).map_err(|e| io_err(out, e))?;
    serde_json::to_writer_pretty(&mut f, report).map_err(|e| io_err(out, e.into()))?;
    writeln!(f).map_err(|e| io_err(out, e))?;
    let csv_out = csv_path(out);
    let mut w = csv::Writer::from_path(&csv_out).map_err(|e| io_err(&csv_out, e.into()))?;
    for t in &report.trials {
        let v = t.validity.as_ref();
        let row = CsvRow {
            trial: t.trial,
            seed: t.seed,
            model: report.config.model,
            n: t.n,
            delta: t.delta,
            valid: t.valid,
            uncolored: v.map_or(0, |v| v.uncolored),
            violations: v.map_or(0, |v| v.edge_violations.len() + v.palette_violations.len()),
            rounds: t.trace.get("rounds").and_then(Value::as_u64),
            depth: t.trace.get("depth").and_then(Value::as_u64),
            error: t.error.as_deref().unwrap_or(""),
        };
        w.serialize(row).map_err(|e| io_err(&csv_out, e.into()))?;
    }
    w.flush().map_err(|e| io_err(&csv_out, e))?;
    Ok(())
}

fn thread_pool() -> Result<rayon::ThreadPool> {
    let mut b = rayon::ThreadPoolBuilder::new();
    if let Ok(s) = std::env::var("COLORSIM_THREADS") {
        let n: usize = s
            .parse()
            .map_err(|_| Error::Config(format!("COLORSIM_THREADS={s} is not a count")))?;
        b = b.num_threads(n.max(1));
    }
    b.build().map_err(|e| Error::Config(e.to_string()))
}

/// Parses, runs and writes; returns the process exit code.
pub fn run<I, T>(argv: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let args = match Args::try_parse_from(argv) {
        Ok(a) => a,
        Err(e) => {
            if e.use_stderr() {
                let _ = write!(stderr, "{e}");
                return EXIT_CONFIG;
            }
            let _ = write!(stdout, "{e}");
            return EXIT_OK;
        }
    };
    if args.help_knobs {
        let _ = writeln!(stdout, "{}", knob_help());
        return EXIT_OK;
    }
    let cfg = match RunConfig::from_args(&args) {
        Ok(c) => c,
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}");
            return EXIT_CONFIG;
        }
    };
    let report = match thread_pool().and_then(|pool| pool.install(|| execute(&cfg))) {
        Ok(r) => r,
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}");
            return EXIT_CONFIG;
        }
    };
    if cfg.model == Model::Lca {
        for t in &report.trials {
            for a in &t.answers {
                let _ = writeln!(stdout, "{a}");
            }
        }
    }
    match &cfg.out {
        Some(out) => {
            if let Err(e) = write_outputs(&report, out) {
                let _ = writeln!(stderr, "error: {e}");
                return EXIT_CONFIG;
            }
        }
        None if cfg.model != Model::Lca => {
            let _ = writeln!(
                stdout,
                "{}",
                serde_json::to_string_pretty(&report).expect("report serializes")
            );
        }
        None => {}
    }
    for t in &report.trials {
        if let Some(e) = &t.error {
            let _ = writeln!(stderr, "trial {}: {e}", t.trial);
        }
    }
    if report.all_valid() {
        EXIT_OK
    } else {
        EXIT_INVALID
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn generator_specs() {
        assert_eq!(parse_source("gnp:100,0.1").unwrap(), Source::Gnp { n: 100, p: 0.1 });
        assert_eq!(
            parse_source("good:50,4").unwrap(),
            Source::Good { n: 50, delta: 4, palette: 9 }
        );
        assert!(parse_source("regular:10").is_err());
        assert!(parse_source("torus:3,3").is_err());
    }

    #[test]
    fn aliases_reach_both_partitions() {
        let mut k = Knobs::default();
        apply_knobs(&mut k, &[("cQ".into(), "1.5".into())]).unwrap();
        assert_eq!(k.clique.partition.c_q, 1.5);
        assert_eq!(k.mpc.partition.c_q, 1.5);
    }

    #[test]
    fn dotted_paths_and_unknown_keys() {
        let mut k = Knobs::default();
        apply_knobs(&mut k, &[("clique.max_depth".into(), "3".into())]).unwrap();
        assert_eq!(k.clique.max_depth, 3);
        assert!(apply_knobs(&mut k, &[("clique.nope".into(), "3".into())]).is_err());
        assert!(apply_knobs(&mut k, &[("clique.c_l".into(), "x".into())]).is_err());
    }
}
