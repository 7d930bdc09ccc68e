//! Run configuration from command-line flags and an optional `key = value`
//! file. Keys match the long flag names; flags take precedence.

use std::collections::BTreeMap;
use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use clap::Args;
use csdr_core::chordal::{DEFAULT_T_FILL, DEFAULT_T_SIZE};
use csdr_core::conversion::ConsistencyStrategy;
use csdr_core::netmodel::{DEFAULT_FIXING_TOLERANCE, DEFAULT_MIN_RESISTANCE};
use csdr_core::solver::{ExportFormat, SolverOptions};

use crate::error::{CliError, CliResult};

/// Strategies compared by `bench` when none are given.
pub const DEFAULT_BENCH: &str = "full,amalgamated-full,band1,band2,band3,sparse";

#[derive(Debug, Clone, Default, Args)]
pub struct Flags {
    /// `key = value` configuration file; flags override its entries.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Network file.
    #[arg(long)]
    pub input: Option<String>,
    /// `matpower` or `json`; inferred from the extension when absent.
    #[arg(long)]
    pub format: Option<String>,
    /// `all`, `none`, or a file listing flow-limited branch ids.
    #[arg(long)]
    pub flows: Option<String>,
    /// full, band, arrow, sparse, diagonal, unconverted or soc-minors.
    #[arg(long)]
    pub strategy: Option<String>,
    /// Comma-separated strategy list for `bench`, e.g. `full,band2,sparse`;
    /// an `amalgamated-` prefix merges cliques first.
    #[arg(long)]
    pub strategies: Option<String>,
    /// Bandwidth for the band and arrow strategies.
    #[arg(long)]
    pub rho: Option<String>,
    /// Merge cliques before converting.
    #[arg(long)]
    pub amalgamate: bool,
    #[arg(long)]
    pub tfill: Option<String>,
    #[arg(long)]
    pub tsize: Option<String>,
    /// Solver tolerance.
    #[arg(long)]
    pub tol: Option<String>,
    #[arg(long = "max-iter")]
    pub max_iter: Option<String>,
    /// Minimum branch resistance; 0 disables.
    #[arg(long)]
    pub rmin: Option<String>,
    /// Per-unit gap below which a generator is fixed.
    #[arg(long = "fix-tol")]
    pub fix_tol: Option<String>,
    /// `FMT:PATH` with FMT `cbf` or `sdpa-sparse`.
    #[arg(long)]
    pub export: Option<String>,
    /// Write the clique tree as JSON.
    #[arg(long = "dump-tree")]
    pub dump_tree: Option<String>,
    /// Directory for report files.
    #[arg(long)]
    pub report: Option<String>,
}

impl Flags {
    fn pairs(&self) -> Vec<(&'static str, String)> {
        let mut out = Vec::new();
        let mut push = |key: &'static str, v: &Option<String>| {
            if let Some(v) = v {
                out.push((key, v.clone()));
            }
        };
        push("input", &self.input);
        push("format", &self.format);
        push("flows", &self.flows);
        push("strategy", &self.strategy);
        push("strategies", &self.strategies);
        push("rho", &self.rho);
        push("tfill", &self.tfill);
        push("tsize", &self.tsize);
        push("tol", &self.tol);
        push("max-iter", &self.max_iter);
        push("rmin", &self.rmin);
        push("fix-tol", &self.fix_tol);
        push("export", &self.export);
        push("dump-tree", &self.dump_tree);
        push("report", &self.report);
        if self.amalgamate {
            out.push(("amalgamate", "true".into()));
        }
        out
    }
}

const KEYS: &[&str] = &[
    "input",
    "format",
    "flows",
    "strategy",
    "strategies",
    "rho",
    "amalgamate",
    "tfill",
    "tsize",
    "tol",
    "max-iter",
    "rmin",
    "fix-tol",
    "export",
    "dump-tree",
    "report",
];

/// Parse a `key = value` file. Blank lines and `#` comments are skipped;
/// values may be double-quoted; underscores in keys read as hyphens.
pub fn parse_config_file(text: &str) -> CliResult<BTreeMap<String, String>> {
    let mut out = BTreeMap::new();
    for (k, line) in text.lines().enumerate() {
        let line = line.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| CliError::Usage(format!("config line {}: expected key = value", k + 1)))?;
        let key = key.trim().replace('_', "-");
        if !KEYS.contains(&key.as_str()) {
            return Err(CliError::Usage(format!("config line {}: unknown key '{key}'", k + 1)));
        }
        let value = value.trim();
        let value = value.strip_prefix('"').and_then(|v| v.strip_suffix('"')).unwrap_or(value);
        out.insert(key, value.to_string());
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum InputFormat {
    Matpower,
    Json,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum FlowSource {
    All,
    None,
    File(PathBuf),
}

/// One relaxation to solve.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Method {
    Unconverted,
    SocMinors,
    Converted { strategy: ConsistencyStrategy, amalgamated: bool },
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Method::Unconverted => f.write_str("unconverted"),
            Method::SocMinors => f.write_str("soc-minors"),
            Method::Converted { strategy, amalgamated: true } => write!(f, "amalgamated-{strategy}"),
            Method::Converted { strategy, amalgamated: false } => write!(f, "{strategy}"),
        }
    }
}

impl FromStr for Method {
    type Err = CliError;

    /// Accepts the names printed by `Display`.
    fn from_str(s: &str) -> CliResult<Self> {
        let s = s.trim();
        let (amalgamated, rest) = match s.strip_prefix("amalgamated-") {
            Some(rest) => (true, rest),
            None => (false, s),
        };
        let method = match rest {
            "unconverted" => Method::Unconverted,
            "soc-minors" => Method::SocMinors,
            _ => Method::Converted {
                strategy: rest.parse().map_err(|e: csdr_core::Error| CliError::Usage(e.to_string()))?,
                amalgamated,
            },
        };
        if amalgamated && !matches!(method, Method::Converted { .. }) {
            return Err(CliError::Usage(format!("'{s}': only conversions can be amalgamated")));
        }
        Ok(method)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub input: PathBuf,
    pub format: InputFormat,
    pub flows: FlowSource,
    /// One entry for `run` and `export`, the compared list for `bench`.
    pub methods: Vec<Method>,
    pub t_fill: usize,
    pub t_size: usize,
    pub solver: SolverOptions,
    pub min_resistance: f64,
    pub fixing_tolerance: f64,
    pub export: Option<(ExportFormat, PathBuf)>,
    pub dump_tree: Option<PathBuf>,
    pub report: Option<PathBuf>,
}

fn number<T: FromStr>(map: &BTreeMap<String, String>, key: &str) -> CliResult<Option<T>> {
    map.get(key)
        .map(|v| v.parse::<T>().map_err(|_| CliError::Usage(format!("--{key}: invalid value '{v}'"))))
        .transpose()
}

fn flag(map: &BTreeMap<String, String>, key: &str) -> CliResult<bool> {
    match map.get(key).map(String::as_str) {
        None | Some("false") => Ok(false),
        Some("true") => Ok(true),
        Some(v) => Err(CliError::Usage(format!("--{key}: expected true or false, got '{v}'"))),
    }
}

fn single_method(map: &BTreeMap<String, String>, amalgamated: bool) -> CliResult<Method> {
    let name = map.get("strategy").map_or("full", String::as_str);
    let rho: Option<usize> = number(map, "rho")?;
    let strategy = match (name, rho) {
        ("unconverted", None) => return Ok(Method::Unconverted),
        ("soc-minors", None) => return Ok(Method::SocMinors),
        ("band", r) => ConsistencyStrategy::Band(r.unwrap_or(1)),
        ("arrow", r) => ConsistencyStrategy::Arrow(r.unwrap_or(1)),
        (other, None) => other.parse().map_err(|e: csdr_core::Error| CliError::Usage(e.to_string()))?,
        (other, Some(_)) => return Err(CliError::Usage(format!("--rho applies to band and arrow only, not '{other}'"))),
    };
    Ok(Method::Converted { strategy, amalgamated })
}

impl RunConfig {
    /// Merge the configuration file named by `flags.config` (if any) with
    /// the flags and validate. `bench` selects the strategy-list mode.
    pub fn from_flags(flags: &Flags, bench: bool) -> CliResult<Self> {
        let mut map = match &flags.config {
            Some(path) => parse_config_file(&read(path)?)?,
            None => BTreeMap::new(),
        };
        for (k, v) in flags.pairs() {
            map.insert(k.to_string(), v);
        }
        Self::from_map(&map, bench)
    }

    pub fn from_map(map: &BTreeMap<String, String>, bench: bool) -> CliResult<Self> {
        let input = PathBuf::from(map.get("input").ok_or_else(|| CliError::Usage("--input is required".into()))?);
        let format = match map.get("format").map(String::as_str) {
            Some("matpower") => InputFormat::Matpower,
            Some("json") => InputFormat::Json,
            Some(f) => return Err(CliError::Usage(format!("--format: unknown format '{f}'"))),
            None if input.extension().is_some_and(|e| e == "json") => InputFormat::Json,
            None => InputFormat::Matpower,
        };
        let flows = match map.get("flows").map(String::as_str) {
            None | Some("all") => FlowSource::All,
            Some("none") => FlowSource::None,
            Some(path) => FlowSource::File(PathBuf::from(path)),
        };
        let amalgamate = flag(map, "amalgamate")? || map.contains_key("tfill") || map.contains_key("tsize");
        let methods = if bench {
            if map.contains_key("rho") || map.contains_key("strategy") {
                return Err(CliError::Usage("bench takes --strategies, not --strategy or --rho".into()));
            }
            let list = map.get("strategies").map_or(DEFAULT_BENCH, String::as_str);
            let methods = list.split(',').filter(|s| !s.trim().is_empty()).map(str::parse).collect::<CliResult<Vec<_>>>()?;
            if methods.is_empty() {
                return Err(CliError::Usage("--strategies is empty".into()));
            }
            methods
        } else {
            if map.contains_key("strategies") {
                return Err(CliError::Usage("--strategies is only accepted by bench".into()));
            }
            let method = single_method(map, amalgamate)?;
            if amalgamate && !matches!(method, Method::Converted { .. }) {
                return Err(CliError::Usage(format!("amalgamation needs a conversion strategy, not '{method}'")));
            }
            vec![method]
        };
        let mut solver = SolverOptions::default();
        if let Some(tol) = number(map, "tol")? {
            solver.tolerance = tol;
        }
        if let Some(it) = number(map, "max-iter")? {
            solver.max_iterations = it;
        }
        solver.validate().map_err(|e| CliError::Usage(e.to_string()))?;
        let export = map
            .get("export")
            .map(|spec| {
                let (fmt, path) = spec
                    .split_once(':')
                    .ok_or_else(|| CliError::Usage(format!("--export: expected FMT:PATH, got '{spec}'")))?;
                let fmt = fmt.parse::<ExportFormat>().map_err(|e| CliError::Usage(e.to_string()))?;
                Ok::<_, CliError>((fmt, PathBuf::from(path)))
            })
            .transpose()?;
        let nonneg = |key: &str, default: f64| -> CliResult<f64> {
            let v = number(map, key)?.unwrap_or(default);
            if v >= 0.0 {
                Ok(v)
            } else {
                Err(CliError::Usage(format!("--{key} must be nonnegative")))
            }
        };
        Ok(Self {
            input,
            format,
            flows,
            methods,
            t_fill: number(map, "tfill")?.unwrap_or(DEFAULT_T_FILL),
            t_size: number(map, "tsize")?.unwrap_or(DEFAULT_T_SIZE),
            solver,
            min_resistance: nonneg("rmin", DEFAULT_MIN_RESISTANCE)?,
            fixing_tolerance: nonneg("fix-tol", DEFAULT_FIXING_TOLERANCE)?,
            export,
            dump_tree: map.get("dump-tree").map(PathBuf::from),
            report: map.get("report").map(PathBuf::from),
        })
    }

    /// Case name used in reports: the input file stem.
    pub fn case_name(&self) -> String {
        self.input.file_stem().map_or_else(|| "case".into(), |s| s.to_string_lossy().into_owned())
    }
}

pub fn read(path: &Path) -> CliResult<String> {
    std::fs::read_to_string(path).map_err(|source| CliError::Io { path: path.to_path_buf(), source })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn map(pairs: &[(&str, &str)]) -> BTreeMap<String, String> {
        pairs.iter().map(|(k, v)| (k.to_string(), v.to_string())).collect()
    }

    #[test]
    fn method_names_round_trip() {
        for name in ["unconverted", "soc-minors", "full", "amalgamated-full", "band2", "arrow1", "sparse", "diagonal"] {
            assert_eq!(name.parse::<Method>().unwrap().to_string(), name);
        }
        assert!("amalgamated-unconverted".parse::<Method>().is_err());
    }

    #[test]
    fn rho_only_with_band_or_arrow() {
        let cfg = RunConfig::from_map(&map(&[("input", "a.m"), ("strategy", "band"), ("rho", "3")]), false).unwrap();
        assert_eq!(
            cfg.methods,
            vec![Method::Converted { strategy: ConsistencyStrategy::Band(3), amalgamated: false }]
        );
        assert!(RunConfig::from_map(&map(&[("input", "a.m"), ("strategy", "full"), ("rho", "3")]), false).is_err());
        assert!(RunConfig::from_map(&map(&[("input", "a.m"), ("strategy", "unconverted"), ("amalgamate", "true")]), false).is_err());
    }

    #[test]
    fn file_entries_are_overridden_by_flags() {
        let text = "# comment\ninput = \"net.json\"\ntol = 1e-6\nstrategy = sparse\n";
        let mut m = parse_config_file(text).unwrap();
        m.insert("strategy".into(), "diagonal".into());
        let cfg = RunConfig::from_map(&m, false).unwrap();
        assert_eq!(cfg.format, InputFormat::Json);
        assert_eq!(cfg.solver.tolerance, 1e-6);
        assert_eq!(
            cfg.methods,
            vec![Method::Converted { strategy: ConsistencyStrategy::Diagonal, amalgamated: false }]
        );
        assert!(parse_config_file("colour = red").is_err());
    }

    #[test]
    fn thresholds_imply_amalgamation() {
        let cfg = RunConfig::from_map(&map(&[("input", "a.m"), ("tfill", "4")]), false).unwrap();
        assert_eq!((cfg.t_fill, cfg.t_size), (4, DEFAULT_T_SIZE));
        assert!(matches!(cfg.methods[0], Method::Converted { amalgamated: true, .. }));
    }
}
