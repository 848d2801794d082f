//! INI-style evaluation config.
//!
//! ```text
//! [GENERAL]
//! seed = 42
//! repeats = 2
//!
//! [NETWORKS]
//! names = ba500
//! paths = ba500.edgelist
//! directed = false
//!
//! [BASELINES]
//! methods = cn, aa, random
//!
//! [METHOD:mock]
//! category = node_embedding
//! command = awk -v dim={dim} -f {config_dir}/mock/node_embed.awk {train_net} > {output}
//! dim = 8
//! tune.scale = 1, 2
//! ```
//!
//! Lines starting with `#` or `;` are comments. There are no inline
//! comments, so commands may contain `#`. Keys in `[NETWORKS]` take either
//! one value for every network or one value per network.

use std::collections::{BTreeSet, HashMap};
use std::fmt::{self, Write as _};
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::classifier::{log_grid, CvMetric, CvOptions};
use crate::embed::EdgeOperator;
use crate::graph::Delimiter;
use crate::heuristics::{Heuristic, HeuristicOptions, KatzParams, NeighborhoodMode, Pairing};
use crate::metrics::{CurveKind, Metric, MissConvention};
use crate::split::{NonEdgeCount, SplitAlgorithm, World};

#[derive(Debug, Error, PartialEq)]
#[error("{}{message}", line.map(|l| format!("line {l}: ")).unwrap_or_default())]
pub struct ConfigError {
    pub line: Option<usize>,
    pub message: String,
}

impl ConfigError {
    fn at(line: usize, message: impl Into<String>) -> Self {
        ConfigError {
            line: Some(line),
            message: message.into(),
        }
    }

    fn general(message: impl Into<String>) -> Self {
        ConfigError {
            line: None,
            message: message.into(),
        }
    }
}

/// Which non-edge assumption the inner tuning split uses.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TuneWorld {
    /// whatever `world` says
    #[default]
    Same,
    Open,
    Closed,
}

impl TuneWorld {
    pub fn resolve(self, outer: World) -> World {
        match self {
            TuneWorld::Same => outer,
            TuneWorld::Open => World::Open,
            TuneWorld::Closed => World::Closed,
        }
    }
}

impl FromStr for TuneWorld {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "same" => Ok(TuneWorld::Same),
            "open" => Ok(TuneWorld::Open),
            "closed" => Ok(TuneWorld::Closed),
            other => Err(format!("unknown tune world '{other}' (same, open, closed)")),
        }
    }
}

impl fmt::Display for TuneWorld {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            TuneWorld::Same => "same",
            TuneWorld::Open => "open",
            TuneWorld::Closed => "closed",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MethodCategory {
    /// writes one vector per node; pairs go through an edge operator and
    /// the classifier
    NodeEmbedding,
    /// writes one vector per pair (train pairs, then test pairs)
    EdgeEmbedding,
    /// writes one score per test pair
    EndToEnd,
}

impl FromStr for MethodCategory {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().replace('-', "_").as_str() {
            "node_embedding" => Ok(MethodCategory::NodeEmbedding),
            "edge_embedding" => Ok(MethodCategory::EdgeEmbedding),
            "end_to_end" => Ok(MethodCategory::EndToEnd),
            other => Err(format!(
                "unknown category '{other}' (node_embedding, edge_embedding, end_to_end)"
            )),
        }
    }
}

impl fmt::Display for MethodCategory {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            MethodCategory::NodeEmbedding => "node_embedding",
            MethodCategory::EdgeEmbedding => "edge_embedding",
            MethodCategory::EndToEnd => "end_to_end",
        })
    }
}

/// Placeholders filled by the evaluator; tuned parameters add their own.
pub const RESERVED_PLACEHOLDERS: [&str; 7] = [
    "train_net",
    "train_pairs",
    "test_pairs",
    "output",
    "dim",
    "config_dir",
    "seed",
];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MethodSpec {
    pub name: String,
    pub category: MethodCategory,
    pub command: String,
    pub dim: usize,
    pub timeout_secs: f64,
    /// parameter name and candidate values, in config order
    pub tune_grid: Vec<(String, Vec<String>)>,
}

impl MethodSpec {
    pub fn grid_size(&self) -> usize {
        self.tune_grid.iter().map(|(_, v)| v.len()).product()
    }

    /// Cartesian product of the grid; the first parameter varies slowest.
    pub fn grid_points(&self) -> Vec<Vec<(String, String)>> {
        let mut points = vec![Vec::new()];
        for (key, values) in &self.tune_grid {
            points = points
                .into_iter()
                .flat_map(|p| {
                    values.iter().map(move |v| {
                        let mut q = p.clone();
                        q.push((key.clone(), v.clone()));
                        q
                    })
                })
                .collect();
        }
        points
    }
}

/// `{name}` tokens in a command template, in order of appearance.
pub fn placeholders(template: &str) -> Vec<String> {
    let mut out = Vec::new();
    let mut rest = template;
    while let Some(start) = rest.find('{') {
        let after = &rest[start + 1..];
        match after.find('}') {
            Some(end) => {
                let name = &after[..end];
                if !name.is_empty() && name.chars().all(|c| c.is_ascii_alphanumeric() || c == '_') {
                    out.push(name.to_string());
                }
                rest = &after[end + 1..];
            }
            None => break,
        }
    }
    out
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NetworkConfig {
    pub name: String,
    /// as written in the config; relative paths resolve against the
    /// config file's directory
    pub path: String,
    pub directed: bool,
    pub delimiter: Delimiter,
    pub remove_self_loops: bool,
    pub main_component: bool,
    pub min_degree: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BaselineConfig {
    pub heuristics: Vec<Heuristic>,
    /// modes used on directed networks; undirected ones always use the
    /// undirected neighborhood
    pub directed_modes: Vec<NeighborhoodMode>,
}

impl Default for BaselineConfig {
    fn default() -> Self {
        BaselineConfig {
            heuristics: Vec::new(),
            directed_modes: vec![NeighborhoodMode::Out, NeighborhoodMode::In],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GeneralConfig {
    pub seed: u64,
    pub repeats: usize,
    pub train_fraction: f64,
    pub world: World,
    pub train_nonedges: NonEdgeCount,
    pub test_nonedges: NonEdgeCount,
    pub split_algorithm: SplitAlgorithm,
    pub folds: usize,
    pub c_min: f64,
    pub c_max: f64,
    pub c_count: usize,
    pub cv_metric: CvMetric,
    pub standardize: bool,
    pub edge_operators: Vec<EdgeOperator>,
    pub metrics: Vec<Metric>,
    pub curves: Vec<CurveKind>,
    pub threshold: f64,
    pub miss_convention: MissConvention,
    pub output_dir: String,
    pub workers: usize,
    pub keep_scratch: bool,
    pub tune_world: TuneWorld,
    pub katz_beta: f64,
    pub pairing: Pairing,
}

impl Default for GeneralConfig {
    fn default() -> Self {
        GeneralConfig {
            seed: 42,
            repeats: 1,
            train_fraction: 0.8,
            world: World::Closed,
            train_nonedges: NonEdgeCount::Auto,
            test_nonedges: NonEdgeCount::Auto,
            split_algorithm: SplitAlgorithm::Fast,
            folds: 10,
            c_min: 1e-4,
            c_max: 1e4,
            c_count: 10,
            cv_metric: CvMetric::Auc,
            standardize: true,
            edge_operators: EdgeOperator::ALL.to_vec(),
            metrics: Metric::ALL.to_vec(),
            curves: vec![CurveKind::Roc, CurveKind::Pr],
            threshold: 0.5,
            miss_convention: MissConvention::MissRate,
            output_dir: "linkbench-out".to_string(),
            workers: 1,
            keep_scratch: false,
            tune_world: TuneWorld::Same,
            katz_beta: KatzParams::default().beta,
            pairing: Pairing::SameMode,
        }
    }
}

impl GeneralConfig {
    pub fn cv_options(&self) -> CvOptions {
        CvOptions {
            folds: self.folds,
            grid: log_grid(self.c_min, self.c_max, self.c_count),
            metric: self.cv_metric,
            standardize: self.standardize,
        }
    }

    pub fn heuristic_options(&self) -> HeuristicOptions {
        HeuristicOptions {
            katz: KatzParams {
                beta: self.katz_beta,
                ..KatzParams::default()
            },
            pairing: self.pairing,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalConfig {
    pub general: GeneralConfig,
    pub networks: Vec<NetworkConfig>,
    pub baselines: BaselineConfig,
    pub methods: Vec<MethodSpec>,
    /// directory of the config file
    #[serde(skip)]
    pub base_dir: PathBuf,
}

impl EvalConfig {
    pub fn resolve(&self, path: &str) -> PathBuf {
        let p = Path::new(path);
        if p.is_absolute() {
            p.to_path_buf()
        } else {
            self.base_dir.join(p)
        }
    }

    pub fn output_dir(&self) -> PathBuf {
        self.resolve(&self.general.output_dir)
    }

    /// Canonical text with every key spelled out; parses back to an equal
    /// config.
    pub fn dump(&self) -> String {
        let g = &self.general;
        let list = |items: Vec<String>| items.join(", ");
        let mut out = String::new();
        let _ = writeln!(out, "[GENERAL]");
        let general: [(&str, String); 24] = [
            ("seed", g.seed.to_string()),
            ("repeats", g.repeats.to_string()),
            ("train_fraction", g.train_fraction.to_string()),
            ("world", g.world.to_string()),
            ("train_nonedges", g.train_nonedges.to_string()),
            ("test_nonedges", g.test_nonedges.to_string()),
            ("split_algorithm", g.split_algorithm.to_string()),
            ("folds", g.folds.to_string()),
            ("c_min", g.c_min.to_string()),
            ("c_max", g.c_max.to_string()),
            ("c_count", g.c_count.to_string()),
            ("cv_metric", g.cv_metric.to_string()),
            ("standardize", g.standardize.to_string()),
            (
                "edge_operators",
                list(g.edge_operators.iter().map(|o| o.to_string()).collect()),
            ),
            ("metrics", list(g.metrics.iter().map(|m| m.to_string()).collect())),
            ("curves", list(g.curves.iter().map(|c| c.to_string()).collect())),
            ("threshold", g.threshold.to_string()),
            ("miss_convention", g.miss_convention.to_string()),
            ("output_dir", g.output_dir.clone()),
            ("workers", g.workers.to_string()),
            ("keep_scratch", g.keep_scratch.to_string()),
            ("tune_world", g.tune_world.to_string()),
            ("katz_beta", g.katz_beta.to_string()),
            ("pairing", g.pairing.to_string()),
        ];
        for (k, v) in general {
            let _ = writeln!(out, "{k} = {v}");
        }

        let nets = &self.networks;
        let col = |f: &dyn Fn(&NetworkConfig) -> String| list(nets.iter().map(f).collect());
        let _ = writeln!(out, "\n[NETWORKS]");
        let _ = writeln!(out, "names = {}", col(&|n| n.name.clone()));
        let _ = writeln!(out, "paths = {}", col(&|n| n.path.clone()));
        let _ = writeln!(out, "directed = {}", col(&|n| n.directed.to_string()));
        let _ = writeln!(out, "delimiter = {}", col(&|n| n.delimiter.to_string()));
        let _ = writeln!(out, "remove_self_loops = {}", col(&|n| n.remove_self_loops.to_string()));
        let _ = writeln!(out, "main_component = {}", col(&|n| n.main_component.to_string()));
        let _ = writeln!(out, "min_degree = {}", col(&|n| n.min_degree.to_string()));

        let b = &self.baselines;
        let _ = writeln!(out, "\n[BASELINES]");
        let _ = writeln!(
            out,
            "methods = {}",
            list(b.heuristics.iter().map(|h| h.to_string()).collect())
        );
        let _ = writeln!(
            out,
            "directed_modes = {}",
            list(b.directed_modes.iter().map(|m| m.to_string()).collect())
        );

        for m in &self.methods {
            let _ = writeln!(out, "\n[METHOD:{}]", m.name);
            let _ = writeln!(out, "category = {}", m.category);
            let _ = writeln!(out, "command = {}", m.command);
            let _ = writeln!(out, "dim = {}", m.dim);
            let _ = writeln!(out, "timeout = {}", m.timeout_secs);
            for (k, values) in &m.tune_grid {
                let _ = writeln!(out, "tune.{k} = {}", values.join(", "));
            }
        }
        out
    }
}

const GENERAL_KEYS: [&str; 24] = [
    "seed",
    "repeats",
    "train_fraction",
    "world",
    "train_nonedges",
    "test_nonedges",
    "split_algorithm",
    "folds",
    "c_min",
    "c_max",
    "c_count",
    "cv_metric",
    "standardize",
    "edge_operators",
    "metrics",
    "curves",
    "threshold",
    "miss_convention",
    "output_dir",
    "workers",
    "keep_scratch",
    "tune_world",
    "katz_beta",
    "pairing",
];
const NETWORK_KEYS: [&str; 7] = [
    "names",
    "paths",
    "directed",
    "delimiter",
    "remove_self_loops",
    "main_component",
    "min_degree",
];
const BASELINE_KEYS: [&str; 2] = ["methods", "directed_modes"];
const METHOD_KEYS: [&str; 5] = ["category", "command", "dim", "timeout", "tune.<param>"];

struct Entry {
    line: usize,
    value: String,
}

struct Section {
    name: String,
    line: usize,
    entries: HashMap<String, Entry>,
}

fn nearest<'a>(key: &str, valid: &[&'a str]) -> Option<&'a str> {
    valid
        .iter()
        .map(|v| (strsim::levenshtein(key, v), *v))
        .filter(|(d, _)| *d <= 3)
        .min()
        .map(|(_, v)| v)
}

fn unknown_key(section: &str, key: &str, line: usize, valid: &[&str]) -> ConfigError {
    let hint = nearest(key, valid)
        .map(|v| format!(" did you mean '{v}'?"))
        .unwrap_or_default();
    ConfigError::at(
        line,
        format!(
            "unknown key '{key}' in [{section}].{hint} Valid keys: {}",
            valid.join(", ")
        ),
    )
}

fn split_sections(text: &str) -> Result<Vec<Section>, ConfigError> {
    let mut sections: Vec<Section> = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let l = raw.trim();
        if l.is_empty() || l.starts_with('#') || l.starts_with(';') {
            continue;
        }
        if l.starts_with('[') {
            let name = l
                .strip_prefix('[')
                .and_then(|s| s.strip_suffix(']'))
                .ok_or_else(|| ConfigError::at(line, format!("malformed section header '{l}'")))?
                .trim()
                .to_string();
            if let Some(prev) = sections.iter().find(|s| s.name.eq_ignore_ascii_case(&name)) {
                let what = if name.to_ascii_uppercase().starts_with("METHOD:") {
                    "duplicate method name"
                } else {
                    "duplicate section"
                };
                return Err(ConfigError::at(
                    line,
                    format!("{what} [{name}], first defined on line {}", prev.line),
                ));
            }
            sections.push(Section {
                name,
                line,
                entries: HashMap::new(),
            });
            continue;
        }
        let (key, value) = l
            .split_once('=')
            .ok_or_else(|| ConfigError::at(line, format!("expected 'key = value', got '{l}'")))?;
        let key = key.trim().to_ascii_lowercase();
        let section = sections
            .last_mut()
            .ok_or_else(|| ConfigError::at(line, "key outside of any section"))?;
        if let Some(prev) = section.entries.get(&key) {
            return Err(ConfigError::at(
                line,
                format!(
                    "key '{key}' repeated in [{}] (first on line {})",
                    section.name, prev.line
                ),
            ));
        }
        section.entries.insert(
            key,
            Entry {
                line,
                value: value.trim().to_string(),
            },
        );
    }
    Ok(sections)
}

fn parse_value<T: FromStr>(entry: &Entry, key: &str, what: &str) -> Result<T, ConfigError>
where
    T::Err: fmt::Display,
{
    entry.value.parse::<T>().map_err(|e| {
        let e = e.to_string();
        let detail = if e.is_empty() { String::new() } else { format!(" ({e})") };
        ConfigError::at(
            entry.line,
            format!("key '{key}' expects {what}, got '{}'{detail}", entry.value),
        )
    })
}

fn parse_bool(s: &str) -> Result<bool, String> {
    match s.trim().to_ascii_lowercase().as_str() {
        "true" | "yes" | "on" | "1" => Ok(true),
        "false" | "no" | "off" | "0" => Ok(false),
        other => Err(format!("'{other}' is not a boolean")),
    }
}

#[derive(Debug, Clone)]
struct Bool(bool);

impl FromStr for Bool {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        parse_bool(s).map(Bool)
    }
}

fn items(value: &str) -> Vec<String> {
    value
        .split(',')
        .map(|s| s.trim().to_string())
        .filter(|s| !s.is_empty())
        .collect()
}

fn parse_list<T: FromStr>(entry: &Entry, key: &str) -> Result<Vec<T>, ConfigError>
where
    T::Err: fmt::Display,
{
    items(&entry.value)
        .iter()
        .map(|s| {
            s.parse::<T>()
                .map_err(|e| ConfigError::at(entry.line, format!("key '{key}': {e}")))
        })
        .collect()
}

fn parse_general(section: &Section) -> Result<GeneralConfig, ConfigError> {
    let mut g = GeneralConfig::default();
    for (key, e) in &section.entries {
        match key.as_str() {
            "seed" => g.seed = parse_value(e, key, "an unsigned integer")?,
            "repeats" => g.repeats = parse_value(e, key, "a positive integer")?,
            "train_fraction" => g.train_fraction = parse_value(e, key, "a number")?,
            "world" => g.world = parse_value(e, key, "open or closed")?,
            "train_nonedges" => g.train_nonedges = parse_value(e, key, "auto, a count or '<ratio>x'")?,
            "test_nonedges" => g.test_nonedges = parse_value(e, key, "auto, a count or '<ratio>x'")?,
            "split_algorithm" => g.split_algorithm = parse_value(e, key, "fast or naive")?,
            "folds" => g.folds = parse_value(e, key, "an integer")?,
            "c_min" => g.c_min = parse_value(e, key, "a number")?,
            "c_max" => g.c_max = parse_value(e, key, "a number")?,
            "c_count" => g.c_count = parse_value(e, key, "an integer")?,
            "cv_metric" => g.cv_metric = parse_value(e, key, "auc or accuracy")?,
            "standardize" => g.standardize = parse_value::<Bool>(e, key, "a boolean")?.0,
            "edge_operators" => g.edge_operators = parse_list(e, key)?,
            "metrics" => g.metrics = parse_list(e, key)?,
            "curves" => g.curves = parse_list(e, key)?,
            "threshold" => g.threshold = parse_value(e, key, "a number")?,
            "miss_convention" => g.miss_convention = parse_value(e, key, "miss_rate or false_omission")?,
            "output_dir" => g.output_dir = e.value.clone(),
            "workers" => g.workers = parse_value(e, key, "a positive integer")?,
            "keep_scratch" => g.keep_scratch = parse_value::<Bool>(e, key, "a boolean")?.0,
            "tune_world" => g.tune_world = parse_value(e, key, "same, open or closed")?,
            "katz_beta" => g.katz_beta = parse_value(e, key, "a number")?,
            "pairing" => g.pairing = parse_value(e, key, "same or successor_predecessor")?,
            _ => return Err(unknown_key("GENERAL", key, e.line, &GENERAL_KEYS)),
        }
    }
    let line = section.line;
    let check = |ok: bool, msg: &str| {
        if ok {
            Ok(())
        } else {
            Err(ConfigError::at(line, format!("[GENERAL] {msg}")))
        }
    };
    check(g.repeats >= 1, "repeats must be at least 1")?;
    check(
        g.train_fraction > 0.0 && g.train_fraction <= 1.0,
        "train_fraction must be in (0, 1]",
    )?;
    check(g.folds >= 2, "folds must be at least 2")?;
    check(
        g.c_min > 0.0 && g.c_max >= g.c_min && g.c_max.is_finite(),
        "need 0 < c_min <= c_max",
    )?;
    check(g.c_count >= 1, "c_count must be at least 1")?;
    check(g.threshold.is_finite(), "threshold must be finite")?;
    check(g.workers >= 1, "workers must be at least 1")?;
    check(g.katz_beta >= 0.0 && g.katz_beta.is_finite(), "katz_beta must be >= 0")?;
    check(!g.edge_operators.is_empty(), "edge_operators must not be empty")?;
    check(!g.metrics.is_empty(), "metrics must not be empty")?;
    Ok(g)
}

fn parse_networks(section: &Section) -> Result<Vec<NetworkConfig>, ConfigError> {
    for (key, e) in &section.entries {
        if !NETWORK_KEYS.contains(&key.as_str()) {
            return Err(unknown_key("NETWORKS", key, e.line, &NETWORK_KEYS));
        }
    }
    let require = |key: &str| {
        section
            .entries
            .get(key)
            .ok_or_else(|| ConfigError::at(section.line, format!("[NETWORKS] is missing mandatory key '{key}'")))
    };
    let names = items(&require("names")?.value);
    let paths_entry = require("paths")?;
    let paths = items(&paths_entry.value);
    let n = names.len();
    if n == 0 {
        return Err(ConfigError::at(section.line, "[NETWORKS] needs at least one network"));
    }
    let mut seen = BTreeSet::new();
    for name in &names {
        if !valid_name(name) {
            return Err(ConfigError::at(
                section.line,
                format!("network name '{name}' may only use letters, digits, '-', '_' and '.'"),
            ));
        }
        if !seen.insert(name) {
            return Err(ConfigError::at(
                section.line,
                format!("duplicate network name '{name}'"),
            ));
        }
    }
    if paths.len() != n {
        return Err(ConfigError::at(
            paths_entry.line,
            format!("{} paths for {n} networks", paths.len()),
        ));
    }

    // one value for all networks, or one per network
    fn column<T>(section: &Section, key: &str, n: usize, default: T) -> Result<Vec<T>, ConfigError>
    where
        T: FromStr + Clone,
        T::Err: fmt::Display,
    {
        let Some(e) = section.entries.get(key) else {
            return Ok(vec![default; n]);
        };
        let values: Vec<T> = parse_list(e, key)?;
        match values.len() {
            1 => Ok(vec![values[0].clone(); n]),
            k if k == n => Ok(values),
            k => Err(ConfigError::at(
                e.line,
                format!("key '{key}' has {k} values for {n} networks"),
            )),
        }
    }
    let directed = column(section, "directed", n, Bool(false))?;
    let delimiter = column(section, "delimiter", n, Delimiter::Auto)?;
    let self_loops = column(section, "remove_self_loops", n, Bool(true))?;
    let main = column(section, "main_component", n, Bool(true))?;
    let min_degree = column(section, "min_degree", n, 0usize)?;

    Ok((0..n)
        .map(|i| NetworkConfig {
            name: names[i].clone(),
            path: paths[i].clone(),
            directed: directed[i].0,
            delimiter: delimiter[i],
            remove_self_loops: self_loops[i].0,
            main_component: main[i].0,
            min_degree: min_degree[i],
        })
        .collect())
}

fn valid_name(name: &str) -> bool {
    !name.is_empty() && name.chars().all(|c| c.is_ascii_alphanumeric() || "-_.".contains(c))
}

fn parse_baselines(section: &Section) -> Result<BaselineConfig, ConfigError> {
    let mut b = BaselineConfig::default();
    for (key, e) in &section.entries {
        match key.as_str() {
            "methods" => b.heuristics = parse_list(e, key)?,
            "directed_modes" => {
                b.directed_modes = parse_list(e, key)?;
                if b.directed_modes.is_empty() || b.directed_modes.contains(&NeighborhoodMode::Undirected) {
                    return Err(ConfigError::at(e.line, "directed_modes must list 'in' and/or 'out'"));
                }
            }
            _ => return Err(unknown_key("BASELINES", key, e.line, &BASELINE_KEYS)),
        }
    }
    let mut seen = BTreeSet::new();
    if let Some(h) = b.heuristics.iter().find(|h| !seen.insert(**h)) {
        return Err(ConfigError::at(section.line, format!("baseline '{h}' listed twice")));
    }
    Ok(b)
}

fn parse_method(name: &str, section: &Section) -> Result<MethodSpec, ConfigError> {
    if !valid_name(name) {
        return Err(ConfigError::at(
            section.line,
            format!("method name '{name}' may only use letters, digits, '-', '_' and '.'"),
        ));
    }
    let mut category = None;
    let mut command = None;
    let mut dim = 128;
    let mut timeout_secs: f64 = 3600.0;
    let mut grid: Vec<(usize, String, Vec<String>)> = Vec::new();
    for (key, e) in &section.entries {
        match key.as_str() {
            "category" => category = Some(parse_value::<MethodCategory>(e, key, "a method category")?),
            "command" => command = Some(e.value.clone()),
            "dim" => dim = parse_value(e, key, "a positive integer")?,
            "timeout" => timeout_secs = parse_value(e, key, "seconds")?,
            k if k.starts_with("tune.") => {
                let param = &k["tune.".len()..];
                if param.is_empty() || !param.chars().all(|c| c.is_ascii_alphanumeric() || c == '_') {
                    return Err(ConfigError::at(e.line, format!("bad tuned parameter name '{param}'")));
                }
                if RESERVED_PLACEHOLDERS.contains(&param) {
                    return Err(ConfigError::at(
                        e.line,
                        format!("'{param}' is filled by the evaluator and cannot be tuned"),
                    ));
                }
                let values = items(&e.value);
                if values.is_empty() {
                    return Err(ConfigError::at(e.line, format!("grid for '{param}' is empty")));
                }
                grid.push((e.line, param.to_string(), values));
            }
            _ => return Err(unknown_key(&format!("METHOD:{name}"), key, e.line, &METHOD_KEYS)),
        }
    }
    let missing = |key: &str| {
        ConfigError::at(
            section.line,
            format!("[METHOD:{name}] is missing mandatory key '{key}'"),
        )
    };
    let category = category.ok_or_else(|| missing("category"))?;
    let command = command.ok_or_else(|| missing("command"))?;
    grid.sort_by_key(|(line, _, _)| *line);

    let used = placeholders(&command);
    let here = |msg: String| ConfigError::at(section.entries["command"].line, msg);
    if !used.iter().any(|p| p == "output") {
        return Err(here(format!("command of '{name}' must contain {{output}}")));
    }
    for p in &used {
        if !RESERVED_PLACEHOLDERS.contains(&p.as_str()) && !grid.iter().any(|(_, k, _)| k == p) {
            return Err(here(format!(
                "placeholder {{{p}}} has no value (known: {}, or a tune.<param>)",
                RESERVED_PLACEHOLDERS.join(", ")
            )));
        }
    }
    for (line, k, _) in &grid {
        if !used.contains(k) {
            return Err(ConfigError::at(
                *line,
                format!("tuned parameter '{k}' does not appear as {{{k}}} in the command"),
            ));
        }
    }
    if dim == 0 {
        return Err(ConfigError::at(section.line, "dim must be positive"));
    }
    if !(timeout_secs > 0.0 && timeout_secs.is_finite()) {
        return Err(ConfigError::at(
            section.line,
            "timeout must be a positive number of seconds",
        ));
    }
    Ok(MethodSpec {
        name: name.to_string(),
        category,
        command,
        dim,
        timeout_secs,
        tune_grid: grid.into_iter().map(|(_, k, v)| (k, v)).collect(),
    })
}

/// Parses config text; relative paths later resolve against `base_dir`.
pub fn parse_config_str(text: &str, base_dir: impl Into<PathBuf>) -> Result<EvalConfig, ConfigError> {
    let sections = split_sections(text)?;
    let mut general = None;
    let mut networks = None;
    let mut baselines = None;
    let mut methods = Vec::new();
    for s in &sections {
        let upper = s.name.to_ascii_uppercase();
        match upper.as_str() {
            "GENERAL" => general = Some(parse_general(s)?),
            "NETWORKS" => networks = Some(parse_networks(s)?),
            "BASELINES" => baselines = Some(parse_baselines(s)?),
            _ if upper.starts_with("METHOD:") => methods.push(parse_method(s.name["METHOD:".len()..].trim(), s)?),
            _ => {
                return Err(ConfigError::at(
                    s.line,
                    format!(
                        "unknown section [{}] (GENERAL, NETWORKS, BASELINES, METHOD:<name>)",
                        s.name
                    ),
                ))
            }
        }
    }
    let networks = networks.ok_or_else(|| ConfigError::general("missing [NETWORKS] section"))?;
    let baselines = baselines.unwrap_or_default();
    let mut names = BTreeSet::new();
    for m in &methods {
        if baselines.heuristics.iter().any(|h| h.name() == m.name) {
            return Err(ConfigError::general(format!(
                "method name '{}' clashes with a baseline",
                m.name
            )));
        }
        if !names.insert(m.name.to_ascii_lowercase()) {
            return Err(ConfigError::general(format!("duplicate method name '{}'", m.name)));
        }
    }
    if baselines.heuristics.is_empty() && methods.is_empty() {
        return Err(ConfigError::general(
            "nothing to evaluate: no baselines and no [METHOD:<name>] sections",
        ));
    }
    Ok(EvalConfig {
        general: general.unwrap_or_default(),
        networks,
        baselines,
        methods,
        base_dir: base_dir.into(),
    })
}

pub fn parse_config(path: impl AsRef<Path>) -> Result<EvalConfig, ConfigError> {
    let path = path.as_ref();
    let text =
        fs::read_to_string(path).map_err(|e| ConfigError::general(format!("cannot read {}: {e}", path.display())))?;
    let base = path.parent().map(Path::to_path_buf).unwrap_or_default();
    parse_config_str(&text, base).map_err(|mut e| {
        e.message = format!("{}: {}", path.display(), e.message);
        e
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = "[NETWORKS]\nnames = tiny\npaths = tiny.edgelist\n\n[BASELINES]\nmethods = cn\n";

    #[test]
    fn minimal_config_gets_defaults() {
        let c = parse_config_str(MINIMAL, "/cfg").unwrap();
        assert_eq!(c.general, GeneralConfig::default());
        assert_eq!(c.networks.len(), 1);
        let n = &c.networks[0];
        assert_eq!(
            (n.directed, n.remove_self_loops, n.main_component, n.min_degree),
            (false, true, true, 0)
        );
        assert_eq!(c.baselines.heuristics, vec![Heuristic::CommonNeighbors]);
        assert_eq!(c.resolve(&n.path), PathBuf::from("/cfg/tiny.edgelist"));
        assert_eq!(c.general.cv_options().grid.len(), 10);
    }

    #[test]
    fn misspelled_key_suggests_nearest() {
        let text = format!("[GENERAL]\ntrain_fracton = 0.5\n{MINIMAL}");
        let err = parse_config_str(&text, ".").unwrap_err();
        assert_eq!(err.line, Some(2));
        assert!(err.message.contains("'train_fracton'"), "{err}");
        assert!(err.message.contains("did you mean 'train_fraction'"), "{err}");
    }

    #[test]
    fn type_and_range_errors() {
        let bad = [
            "[GENERAL]\nrepeats = two\n",
            "[GENERAL]\ntrain_fraction = 1.5\n",
            "[GENERAL]\nfolds = 1\n",
            "[GENERAL]\nstandardize = maybe\n",
            "[GENERAL]\nmetrics = auc, mrr\n",
        ];
        for b in bad {
            assert!(parse_config_str(&format!("{b}{MINIMAL}"), ".").is_err(), "{b}");
        }
        assert!(parse_config_str("[BASELINES]\nmethods = cn\n", ".").is_err());
        assert!(parse_config_str("[NETWORKS]\nnames = a\n", ".").is_err());
        assert!(parse_config_str("[NETWORKS]\nnames = a\npaths = a\n", ".").is_err());
    }

    #[test]
    fn method_validation() {
        let method = |body: &str| format!("{MINIMAL}\n[METHOD:m]\ncategory = end_to_end\n{body}");
        assert!(parse_config_str(&method("command = run {train_pairs} {test_pairs} > {output}\n"), ".").is_ok());
        // no {output}
        assert!(parse_config_str(&method("command = run {train_pairs}\n"), ".").is_err());
        // tuned key not used
        assert!(parse_config_str(&method("command = run > {output}\ntune.k = 1, 2\n"), ".").is_err());
        // unknown placeholder
        assert!(parse_config_str(&method("command = run {k} > {output}\n"), ".").is_err());
        // reserved names are not tunable
        assert!(parse_config_str(&method("command = run {dim} > {output}\ntune.dim = 1\n"), ".").is_err());
        let err = parse_config_str(&method("command = x {output}\ntimeuot = 3\n"), ".").unwrap_err();
        assert!(err.message.contains("did you mean 'timeout'"), "{err}");
    }

    #[test]
    fn duplicate_methods_are_rejected() {
        let m = "[METHOD:m]\ncategory = end_to_end\ncommand = x {output}\n";
        let err = parse_config_str(&format!("{MINIMAL}{m}{m}"), ".").unwrap_err();
        assert!(err.message.contains("duplicate method name"), "{err}");
    }

    #[test]
    fn network_columns_broadcast() {
        let text = "[NETWORKS]\nnames = a, b\npaths = a.txt, b.txt\ndirected = false, true\nmin_degree = 2\n[BASELINES]\nmethods = aa\n";
        let c = parse_config_str(text, ".").unwrap();
        assert!(c.networks[1].directed);
        assert_eq!(c.networks[0].min_degree, 2);
        assert_eq!(c.networks[1].min_degree, 2);
        let bad = text.replace("min_degree = 2", "min_degree = 1, 2, 3");
        assert!(parse_config_str(&bad, ".").is_err());
    }

    #[test]
    fn grid_points_follow_config_order() {
        let text = format!(
            "{MINIMAL}[METHOD:m]\ncategory = node_embedding\ncommand = x {{b}} {{a}} {{output}}\ntune.b = 1, 2\ntune.a = x, y, z\n"
        );
        let c = parse_config_str(&text, ".").unwrap();
        let m = &c.methods[0];
        assert_eq!(m.grid_size(), 6);
        let points = m.grid_points();
        assert_eq!(
            points[0],
            vec![("b".to_string(), "1".to_string()), ("a".to_string(), "x".to_string())]
        );
        assert_eq!(points[1][1].1, "y");
        assert_eq!(points[3][0].1, "2");
    }

    #[test]
    fn dump_round_trips() {
        let text = format!(
            "[GENERAL]\nseed = 7\nc_min = 0.001\ntest_nonedges = 2.5x\nmetrics = auc, f1\n{MINIMAL}directed_modes = in\n[METHOD:m]\ncategory = end_to_end\ncommand = run {{q}} # {{output}}\ntimeout = 2.5\ntune.q = 0, 1\n"
        );
        let c = parse_config_str(&text, "/x").unwrap();
        let again = parse_config_str(&c.dump(), "/x").unwrap();
        assert_eq!(c, again);
        assert_eq!(again.dump(), c.dump());
    }

    #[test]
    fn placeholder_scan() {
        assert_eq!(
            placeholders("a {x} {y_1}{output} {not valid} {}"),
            vec!["x", "y_1", "output"]
        );
        assert_eq!(placeholders("awk '{print $1}' {output}"), vec!["output"]);
    }
}
