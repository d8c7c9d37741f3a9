//! Command-line front end.
//!
//! Every setting is a flat `key = value` pair. Values come from the
//! built-in defaults, then an optional `--config` file, then flags
//! (`--batch-size 50` sets `batch_size`). `PENALEARN_SEED` is consulted only
//! when neither the file nor a flag sets `seed`.

use std::collections::BTreeMap;
use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Arg, ArgAction, ArgMatches, Command};

use crate::error::Error;
use crate::harness::{run_benchmark, table_repro};
use crate::model_io::{load_model, save_model, write_atomic};
use crate::nn::AdamConfig;
use crate::oracle::{solve, OracleConfig};
use crate::penalty::{PenaltyConfig, PenaltyMode};
use crate::problems::{make_problem, ParamSet, ProblemSpec, PROBLEM_NAMES};
use crate::trainer::{evaluate, train, write_eval_csv, TrainConfig};

pub const SEED_ENV: &str = "PENALEARN_SEED";

pub struct KeySpec {
    pub name: &'static str,
    pub default: &'static str,
    pub range: &'static str,
    pub help: &'static str,
}

const fn key(name: &'static str, default: &'static str, range: &'static str, help: &'static str) -> KeySpec {
    KeySpec {
        name,
        default,
        range,
        help,
    }
}

pub const KEYS: &[KeySpec] = &[
    key("problem", "", "rosenbrock-1c|rosenbrock-3c|ackley-1c|ackley-3c", "Registry problem (required)"),
    key("seed", "0", "u64", "Training seed; falls back to $PENALEARN_SEED"),
    key("samples", "1000", ">= 1", "Training parameter samples"),
    key("epochs", "5000", ">= 1", "Training epochs"),
    key("batch_size", "100", "1..=samples", "Mini-batch size"),
    key("lr", "1e-4", "> 0", "ADAM learning rate"),
    key("beta1", "0.9", "[0, 1)", "ADAM first-moment decay"),
    key("beta2", "0.999", "[0, 1)", "ADAM second-moment decay"),
    key("adam_epsilon", "1e-8", "> 0", "ADAM denominator offset"),
    key("penalty", "piecewise", "piecewise|indicator|none", "Constraint penalty mode"),
    key("eta", "1e8", ">= 0", "Penalty weight for every constraint"),
    key("gamma", "2", ">= 1", "Penalty exponent"),
    key("indicator_big", "1e12", "> 0", "Per-violation cost in indicator mode"),
    key("eq_tolerance", "0", ">= 0", "Equality tolerance for feasibility tests"),
    key("log_every", "100", ">= 1", "Epochs between training log rows"),
    key("net_shape", "", "comma-separated sizes, empty = problem default", "Network layer sizes"),
    key("feasibility_tol", "0.1", ">= 0", "Violation tolerance of the logged feasible fraction"),
    key("normalize_inputs", "true", "true|false", "Rescale parameters to [-1, 1] while training"),
    key("grid_points", "201", ">= 2", "Oracle grid points per dimension"),
    key("grid_low", "-6", "< grid_high", "Oracle grid lower bound"),
    key("grid_high", "6", "> grid_low", "Oracle grid upper bound"),
    key("oracle_starts", "16", ">= 0", "Oracle random descent starts"),
    key("oracle_steps", "200", ">= 1", "Oracle quasi-Newton iterations per stage"),
    key("oracle_tolerance", "1e-10", ">= 0", "Oracle gradient-norm stopping threshold"),
    key("eta_schedule", "1,1e2,1e4,1e6,1e8", "positive, strictly increasing", "Oracle penalty continuation"),
    key("oracle_seed", "0", "u64", "Oracle start seed"),
    key("eval_samples", "100", ">= 0", "Fresh parameter samples for eval and bench"),
    key("eval_seed", "1000", "u64", "Seed of the eval and bench samples"),
    key("timing", "true", "true|false", "Write wall-clock columns (false writes zeros)"),
    key("threads", "0", ">= 0, 0 = all cores", "Worker threads"),
    key("model", "", "path", "Model file (written by train, read by eval/bench/table)"),
    key("output", "", "path, empty = stdout", "Output CSV"),
    key("log", "", "path, empty = none", "Training log CSV"),
    key("params", "", "comma-separated decimals", "Single parameter vector for oracle/eval"),
];

fn key_spec(name: &str) -> Option<&'static KeySpec> {
    KEYS.iter().find(|k| k.name == name)
}

fn flag_name(key: &str) -> String {
    key.replace('_', "-")
}

#[derive(Debug)]
pub enum CliError {
    /// Bad invocation or configuration; exit status 2.
    Usage(String),
    /// Failure while running; exit status 1.
    Run(Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Run(_) => 1,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Usage(msg) => write!(f, "usage error: {msg}"),
            CliError::Run(e) => write!(f, "error: {e}"),
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        match e {
            Error::Config(_) | Error::Registry { .. } => CliError::Usage(e.to_string()),
            other => CliError::Run(other),
        }
    }
}

type CliResult<T> = std::result::Result<T, CliError>;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Subcommand {
    Train,
    Eval,
    Oracle,
    Bench,
    Table,
}

impl Subcommand {
    fn name(self) -> &'static str {
        match self {
            Subcommand::Train => "train",
            Subcommand::Eval => "eval",
            Subcommand::Oracle => "oracle",
            Subcommand::Bench => "bench",
            Subcommand::Table => "table",
        }
    }
}

#[derive(Debug, Clone)]
pub struct RunConfig {
    pub problem: ProblemSpec,
    pub train: TrainConfig,
    pub oracle: OracleConfig,
    pub eval_samples: usize,
    pub eval_seed: u64,
    pub timing: bool,
    pub threads: usize,
    pub model: Option<PathBuf>,
    pub output: Option<PathBuf>,
    pub log: Option<PathBuf>,
    pub params: Option<Vec<f64>>,
}

/// Parses `key = value` lines; `#` starts a comment.
pub fn parse_config_text(text: &str) -> CliResult<BTreeMap<String, String>> {
    let mut out = BTreeMap::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| CliError::Usage(format!("config line {}: expected 'key = value'", i + 1)))?;
        let k = k.trim();
        if key_spec(k).is_none() {
            return Err(CliError::Usage(format!("config line {}: unknown key '{k}'", i + 1)));
        }
        if out.insert(k.to_string(), v.trim().to_string()).is_some() {
            return Err(CliError::Usage(format!("config line {}: duplicate key '{k}'", i + 1)));
        }
    }
    Ok(out)
}

struct Values {
    map: BTreeMap<String, String>,
}

impl Values {
    fn raw(&self, name: &str) -> &str {
        self.map
            .get(name)
            .map(String::as_str)
            .unwrap_or_else(|| key_spec(name).map(|k| k.default).unwrap_or(""))
    }

    fn bad(&self, name: &str, why: &str) -> CliError {
        let range = key_spec(name).map(|k| k.range).unwrap_or("?");
        CliError::Usage(format!(
            "invalid value '{}' for '{name}' ({why}; accepted: {range})",
            self.raw(name)
        ))
    }

    fn parse<T: std::str::FromStr>(&self, name: &str) -> CliResult<T> {
        self.raw(name).parse().map_err(|_| self.bad(name, "not a valid value"))
    }

    fn checked<T: std::str::FromStr + Copy>(&self, name: &str, ok: impl Fn(T) -> bool) -> CliResult<T> {
        let v = self.parse::<T>(name)?;
        if ok(v) {
            Ok(v)
        } else {
            Err(self.bad(name, "out of range"))
        }
    }

    fn list<T: std::str::FromStr>(&self, name: &str) -> CliResult<Option<Vec<T>>> {
        let raw = self.raw(name);
        if raw.is_empty() {
            return Ok(None);
        }
        raw.split(',')
            .map(|t| t.trim().parse::<T>())
            .collect::<Result<Vec<_>, _>>()
            .map(Some)
            .map_err(|_| self.bad(name, "not a comma-separated list"))
    }

    fn path(&self, name: &str) -> Option<PathBuf> {
        let raw = self.raw(name);
        (!raw.is_empty()).then(|| PathBuf::from(raw))
    }
}

/// Merges defaults, file values, flag overrides and the seed fallback into a
/// validated [`RunConfig`].
pub fn parse_config(
    file_text: Option<&str>,
    overrides: &[(String, String)],
    env_seed: Option<&str>,
) -> CliResult<RunConfig> {
    let mut map = match file_text {
        Some(text) => parse_config_text(text)?,
        None => BTreeMap::new(),
    };
    for (k, v) in overrides {
        if key_spec(k).is_none() {
            return Err(CliError::Usage(format!("unknown key '{k}'")));
        }
        map.insert(k.clone(), v.clone());
    }
    if !map.contains_key("seed") {
        if let Some(s) = env_seed {
            map.insert("seed".into(), s.trim().to_string());
        }
    }
    let v = Values { map };

    let name = v.raw("problem");
    if name.is_empty() {
        return Err(CliError::Usage(format!(
            "missing 'problem' (accepted: {})",
            PROBLEM_NAMES.join("|")
        )));
    }
    let problem = make_problem(name).map_err(|_| v.bad("problem", "unknown problem"))?;

    let sample_count = v.checked::<usize>("samples", |n| n >= 1)?;
    let batch_size = v.checked::<usize>("batch_size", |n| n >= 1 && n <= sample_count)?;
    let mode: PenaltyMode = v.parse("penalty")?;
    let eta = v.checked::<f64>("eta", |x| x >= 0.0 && x.is_finite())?;
    let gamma = v.checked::<f64>("gamma", |x| x >= 1.0 && x.is_finite())?;
    let mut penalty = PenaltyConfig::uniform(&problem, mode, eta, gamma);
    penalty.indicator_big = v.checked("indicator_big", |x: f64| x > 0.0 && x.is_finite())?;
    penalty.eq_tolerance = v.checked("eq_tolerance", |x: f64| x >= 0.0 && x.is_finite())?;

    let net_shape = v.list::<usize>("net_shape")?;
    if let Some(shape) = &net_shape {
        let fits = shape.len() >= 3
            && shape.first() == Some(&problem.param_dim)
            && shape.last() == Some(&problem.decision_dim)
            && shape.iter().all(|&s| s > 0);
        if !fits {
            return Err(v.bad("net_shape", "must map param_dim to decision_dim through at least one hidden layer"));
        }
    }

    let train = TrainConfig {
        sample_count,
        epochs: v.checked("epochs", |n: usize| n >= 1)?,
        batch_size,
        seed: v.parse("seed")?,
        adam: AdamConfig {
            learning_rate: v.checked("lr", |x: f64| x > 0.0 && x.is_finite())?,
            beta1: v.checked("beta1", |x: f64| (0.0..1.0).contains(&x))?,
            beta2: v.checked("beta2", |x: f64| (0.0..1.0).contains(&x))?,
            epsilon: v.checked("adam_epsilon", |x: f64| x > 0.0 && x.is_finite())?,
        },
        penalty,
        log_every: v.checked("log_every", |n: usize| n >= 1)?,
        net_shape,
        feasibility_tol: v.checked("feasibility_tol", |x: f64| x >= 0.0)?,
        normalize_inputs: v.parse("normalize_inputs")?,
    };
    train.validate(&problem)?;

    let grid_low: f64 = v.parse("grid_low")?;
    let grid_high: f64 = v.parse("grid_high")?;
    if !(grid_low < grid_high) || !grid_low.is_finite() || !grid_high.is_finite() {
        return Err(v.bad("grid_low", "grid_low must be below grid_high"));
    }
    let oracle = OracleConfig {
        grid_points_per_dim: v.checked("grid_points", |n: usize| n >= 2)?,
        grid_bounds: vec![(grid_low, grid_high)],
        starts: v.parse("oracle_starts")?,
        descent_steps: v.checked("oracle_steps", |n: usize| n >= 1)?,
        eta_schedule: v.list("eta_schedule")?.ok_or_else(|| v.bad("eta_schedule", "empty"))?,
        tolerance: v.checked("oracle_tolerance", |x: f64| x >= 0.0)?,
        seed: v.parse("oracle_seed")?,
        ..OracleConfig::default()
    };
    oracle
        .validate()
        .map_err(|e| CliError::Usage(format!("{e} (accepted: {})", key_spec("eta_schedule").unwrap().range)))?;

    let params = v.list::<f64>("params")?;
    if let Some(p) = &params {
        if p.len() != problem.param_dim {
            return Err(v.bad("params", &format!("{} needs {} values", problem.name, problem.param_dim)));
        }
    }

    Ok(RunConfig {
        problem,
        train,
        oracle,
        eval_samples: v.parse("eval_samples")?,
        eval_seed: v.parse("eval_seed")?,
        timing: v.parse("timing")?,
        threads: v.parse("threads")?,
        model: v.path("model"),
        output: v.path("output"),
        log: v.path("log"),
        params,
    })
}

fn key_table() -> String {
    let width = KEYS.iter().map(|k| k.name.len()).max().unwrap_or(0);
    let mut s = String::from("Config keys (file: `key = value`, flag: --key-name):\n");
    for k in KEYS {
        let default = if k.default.is_empty() { "(none)" } else { k.default };
        s.push_str(&format!("  {:<width$}  default {default}; range {}\n", k.name, k.range));
    }
    s
}

pub fn command() -> Command {
    let mut root = Command::new("penalearn")
        .about("Train, evaluate and benchmark penalty-trained optimizer networks")
        .subcommand_required(true)
        .arg_required_else_help(true)
        .after_help(key_table())
        .arg(
            Arg::new("config")
                .long("config")
                .global(true)
                .value_name("FILE")
                .help("Flat key = value config file"),
        );
    for k in KEYS {
        let default = if k.default.is_empty() { "(none)" } else { k.default };
        root = root.arg(
            Arg::new(k.name)
                .long(flag_name(k.name))
                .global(true)
                .action(ArgAction::Set)
                .allow_hyphen_values(true)
                .value_name("VALUE")
                .help(format!("{} [default: {default}] [range: {}]", k.help, k.range)),
        );
    }
    let sub = |name: &'static str, about: &'static str| Command::new(name).about(about).after_help(key_table());
    root.subcommand(sub("train", "Train a network; writes the model and an optional log CSV"))
        .subcommand(sub("eval", "Evaluate a model on --params or on fresh samples (CSV)"))
        .subcommand(sub("oracle", "Solve one instance given by --params"))
        .subcommand(sub("bench", "Compare a model against the oracle on fresh samples (CSV)"))
        .subcommand(sub("table", "Reproduce the published comparison table for a problem"))
}

fn overrides(m: &ArgMatches) -> Vec<(String, String)> {
    KEYS.iter()
        .filter_map(|k| m.get_one::<String>(k.name).map(|v| (k.name.to_string(), v.clone())))
        .collect()
}

fn emit(path: Option<&Path>, text: &str, out: &mut dyn Write) -> CliResult<()> {
    match path {
        Some(p) => write_atomic(p, text.as_bytes())?,
        None => out.write_all(text.as_bytes()).map_err(Error::from)?,
    }
    Ok(())
}

fn require_model(cfg: &RunConfig, cmd: Subcommand) -> CliResult<PathBuf> {
    cfg.model
        .clone()
        .ok_or_else(|| CliError::Usage(format!("'{}' needs --model <FILE>", cmd.name())))
}

fn fmt_vec(x: &[f64]) -> String {
    let parts: Vec<String> = x.iter().map(|v| format!("{v:.10}")).collect();
    format!("({})", parts.join(", "))
}

/// Runs one subcommand; `out` receives what would go to stdout.
pub fn dispatch(cmd: Subcommand, cfg: &RunConfig, out: &mut dyn Write) -> CliResult<()> {
    let spec = &cfg.problem;
    match cmd {
        Subcommand::Train => {
            let model_path = require_model(cfg, cmd)?;
            let (net, log) = train(spec, &cfg.train)?;
            save_model(&net, &model_path)?;
            if let Some(p) = &cfg.log {
                let mut buf = Vec::new();
                log.write_csv(&mut buf, cfg.timing)?;
                write_atomic(p, &buf)?;
            }
            if let Some(last) = log.last() {
                writeln!(
                    out,
                    "epoch {}: loss {:.6e}, objective {:.6e}, penalty {:.6e}, feasible {:.3}",
                    last.epoch, last.mean_loss, last.mean_objective, last.mean_penalty, last.feasible_frac
                )
                .map_err(Error::from)?;
            }
        }
        Subcommand::Eval => {
            let net = load_model(&require_model(cfg, cmd)?)?;
            let params = match &cfg.params {
                Some(p) => ParamSet::from_rows(std::slice::from_ref(p), spec.param_dim)?,
                None => spec.sample_params(cfg.eval_samples, cfg.eval_seed)?,
            };
            let reports = evaluate(&net, spec, &params, &cfg.train.penalty)?;
            let mut buf = Vec::new();
            write_eval_csv(&reports, spec, &mut buf, cfg.timing)?;
            emit(cfg.output.as_deref(), &String::from_utf8_lossy(&buf), out)?;
        }
        Subcommand::Oracle => {
            let p = cfg
                .params
                .as_ref()
                .ok_or_else(|| CliError::Usage("'oracle' needs --params c1,c2,...".into()))?;
            let sol = solve(spec, p, &cfg.oracle)?;
            let mut text = format!(
                "x = {}\nobjective = {:.10e}\nmax_violation = {:.3e}\nfeasible = {}\nmethod = {}\n",
                fmt_vec(&sol.x),
                sol.objective,
                sol.max_violation,
                sol.is_feasible(),
                sol.method
            );
            if cfg.timing {
                text.push_str(&format!("solve_ns = {:.0}\n", sol.solve_ns));
            }
            emit(cfg.output.as_deref(), &text, out)?;
        }
        Subcommand::Bench => {
            let net = load_model(&require_model(cfg, cmd)?)?;
            let params = spec.sample_params(cfg.eval_samples, cfg.eval_seed)?;
            let report = run_benchmark(spec, &net, &cfg.oracle, &params)?;
            emit(cfg.output.as_deref(), &report.to_csv(cfg.timing), out)?;
        }
        Subcommand::Table => {
            let net = load_model(&require_model(cfg, cmd)?)?;
            let table = table_repro(spec, &net, &cfg.oracle)?;
            out.write_all(table.to_text().as_bytes()).map_err(Error::from)?;
            if let Some(p) = &cfg.output {
                write_atomic(p, table.to_csv().as_bytes())?;
            }
        }
    }
    Ok(())
}

/// Full program: parse `args`, run, and return the exit status.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let matches = match command().try_get_matches_from(args) {
        Ok(m) => m,
        Err(e) => {
            let code = e.exit_code();
            let text = e.render().to_string();
            let _ = if e.use_stderr() { err.write_all(text.as_bytes()) } else { out.write_all(text.as_bytes()) };
            return code;
        }
    };
    let result = (|| {
        let (name, sub) = matches.subcommand().expect("subcommand is required");
        let cmd = match name {
            "train" => Subcommand::Train,
            "eval" => Subcommand::Eval,
            "oracle" => Subcommand::Oracle,
            "bench" => Subcommand::Bench,
            _ => Subcommand::Table,
        };
        let file_text = match sub.get_one::<String>("config") {
            Some(path) => Some(
                std::fs::read_to_string(path)
                    .map_err(|e| CliError::Usage(format!("cannot read config '{path}': {e}")))?,
            ),
            None => None,
        };
        let env_seed = std::env::var(SEED_ENV).ok();
        let cfg = parse_config(file_text.as_deref(), &overrides(sub), env_seed.as_deref())?;
        if cfg.threads > 0 {
            // Fails only if a pool already exists, which is harmless here.
            let _ = rayon::ThreadPoolBuilder::new().num_threads(cfg.threads).build_global();
        }
        dispatch(cmd, &cfg, out)
    })();
    match result {
        Ok(()) => 0,
        Err(e) => {
            let _ = writeln!(err, "{e}");
            e.exit_code()
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn kv(pairs: &[(&str, &str)]) -> Vec<(String, String)> {
        pairs.iter().map(|(k, v)| (k.to_string(), v.to_string())).collect()
    }

    #[test]
    fn minimal_file_gives_defaults() {
        let cfg = parse_config(Some("problem = rosenbrock-1c\n"), &[], None).unwrap();
        assert_eq!(cfg.train.penalty.eta_ineq, vec![1e8]);
        assert_eq!(cfg.train.penalty.gamma, 2.0);
        assert_eq!(cfg.train.penalty.mode, PenaltyMode::Piecewise);
        assert_eq!(cfg.train.sample_count, 1000);
        assert_eq!(cfg.train.net_shape(&cfg.problem), &[2, 20, 20, 2]);
        assert_eq!(cfg.train.seed, 0);
        assert_eq!(cfg.oracle, OracleConfig::default());
    }

    #[test]
    fn defaults_agree_with_library() {
        let cfg = parse_config(None, &kv(&[("problem", "ackley-1c")]), None).unwrap();
        let reference = TrainConfig::reference(&cfg.problem);
        assert_eq!(cfg.train.adam, reference.adam);
        assert_eq!(cfg.train.epochs, reference.epochs);
        assert_eq!(cfg.train.batch_size, reference.batch_size);
        assert_eq!(cfg.train.log_every, reference.log_every);
        assert_eq!(cfg.train.penalty, reference.penalty);
        assert_eq!(cfg.train.feasibility_tol, reference.feasibility_tol);
    }

    #[test]
    fn gamma_below_one_is_rejected() {
        let err = parse_config(Some("problem = rosenbrock-1c\ngamma = 0.5\n"), &[], None).unwrap_err();
        assert_eq!(err.exit_code(), 2);
        let msg = err.to_string();
        assert!(msg.contains("gamma") && msg.contains(">= 1"), "{msg}");
    }

    #[test]
    fn flags_override_file() {
        let cfg = parse_config(
            Some("problem = rosenbrock-1c\nepochs = 5000\n"),
            &kv(&[("epochs", "10")]),
            None,
        )
        .unwrap();
        assert_eq!(cfg.train.epochs, 10);
    }

    #[test]
    fn seed_fallback_order() {
        let file = "problem = rosenbrock-1c\n";
        assert_eq!(parse_config(Some(file), &[], Some("9")).unwrap().train.seed, 9);
        let with_seed = "problem = rosenbrock-1c\nseed = 3\n";
        assert_eq!(parse_config(Some(with_seed), &[], Some("9")).unwrap().train.seed, 3);
        let flag = kv(&[("seed", "4")]);
        assert_eq!(parse_config(Some(with_seed), &flag, Some("9")).unwrap().train.seed, 4);
    }

    #[test]
    fn rejects_bad_input() {
        let bad = |text: &str| parse_config(Some(text), &[], None).unwrap_err().to_string();
        assert!(bad("problem = rosenbrock-1c\nlearning = 3\n").contains("unknown key 'learning'"));
        assert!(bad("epochs = 3\n").contains("missing 'problem'"));
        assert!(bad("problem = sphere\n").contains("'problem'"));
        assert!(bad("problem = rosenbrock-1c\nproblem = ackley-1c\n").contains("duplicate"));
        assert!(bad("problem = rosenbrock-1c\nbatch_size = 2000\n").contains("batch_size"));
        assert!(bad("problem = rosenbrock-1c\nparams = 1,2,3\n").contains("params"));
        assert!(bad("problem = rosenbrock-1c\nnet_shape = 3,4,2\n").contains("net_shape"));
        assert!(bad("problem = rosenbrock-1c\neta_schedule = 1,1\n").contains("eta_schedule"));
        assert!(bad("problem = rosenbrock-1c\npenalty = soft\n").contains("piecewise|indicator|none"));
    }

    #[test]
    fn comments_and_blank_lines() {
        let text = "# run\n\nproblem = ackley-1c  # trailing\nnet_shape = 5,8,2\n";
        let cfg = parse_config(Some(text), &[], None).unwrap();
        assert_eq!(cfg.train.net_shape, Some(vec![5, 8, 2]));
    }

    #[test]
    fn help_lists_every_key() {
        let help = command().render_long_help().to_string();
        for k in KEYS {
            assert!(help.contains(&format!("--{}", flag_name(k.name))), "{}", k.name);
            assert!(help.contains(k.range), "{}", k.name);
        }
    }
}
