//! Layered configuration: built-in defaults, then a TOML file with one
//! section per subcommand, then command-line flags. Every resolved value
//! remembers where it came from.

use std::fmt;
use std::path::Path;
use std::str::FromStr;

use serde_json::{json, Map, Value};
use sparsified_lasso::Error as CoreError;

/// A failure, split by exit status: usage problems exit 2, everything else 1.
#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Runtime(String),
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Usage(m) | CliError::Runtime(m) => f.write_str(m),
        }
    }
}

impl From<CoreError> for CliError {
    fn from(e: CoreError) -> Self {
        if e.is_usage() {
            CliError::Usage(e.to_string())
        } else {
            CliError::Runtime(e.to_string())
        }
    }
}

pub type CliResult<T> = Result<T, CliError>;

pub struct KeySpec {
    pub key: &'static str,
    pub flag: &'static str,
    pub default: Option<&'static str>,
    pub help: &'static str,
}

pub struct CommandSpec {
    pub name: &'static str,
    pub about: &'static str,
    /// Stochastic commands refuse to run without an explicit `base_seed`.
    pub stochastic: bool,
    pub keys: &'static [KeySpec],
}

const fn key(
    key: &'static str,
    flag: &'static str,
    default: Option<&'static str>,
    help: &'static str,
) -> KeySpec {
    KeySpec {
        key,
        flag,
        default,
        help,
    }
}

const SEED: KeySpec = key("base_seed", "base-seed", None, "64-bit seed (required)");

pub const COMMANDS: &[CommandSpec] = &[
    CommandSpec {
        name: "gen",
        about: "Sample a sparsified measurement matrix (and optionally observations)",
        stochastic: true,
        keys: &[
            key("n", "n", None, "number of rows"),
            key("p", "p", None, "number of columns"),
            key("gamma", "gamma", Some("1"), "non-zero probability per entry"),
            key("convention", "convention", Some("standard"), "standard or rescaled"),
            SEED,
            key("output", "output", Some("-"), "matrix file, `-` for stdout"),
            key("y_output", "y-output", None, "also write y = Xβ* + w to this file"),
            key("k", "k", None, "support size of β* (with --y-output)"),
            key("beta_min", "beta-min", Some("1"), "magnitude of β* on its support"),
            key("sign_pattern", "sign-pattern", Some("all_plus"), "all_plus, alternating or seeded_random:SEED"),
            key("sigma2", "sigma2", Some("0.0625"), "noise variance"),
            key("noise_reference", "noise-reference", Some("working"), "working or original"),
        ],
    },
    CommandSpec {
        name: "solve",
        about: "Solve the Lasso for a stored matrix and observation vector",
        stochastic: false,
        keys: &[
            key("matrix", "matrix", None, "matrix file written by `gen`"),
            key("y", "y", None, "observation vector, one value per line"),
            key("lambda", "lambda", Some("0.1"), "regularization parameter"),
            key("tol", "tol", Some("1e-10"), "convergence tolerance"),
            key("max_iter", "max-iter", Some("10000"), "maximum coordinate sweeps"),
            key("zero_tol", "zero-tol", Some("1e-8"), "magnitudes at or below this count as zero"),
        ],
    },
    CommandSpec {
        name: "witness",
        about: "Run the primal-dual witness construction on a stored matrix",
        stochastic: true,
        keys: &[
            key("matrix", "matrix", None, "matrix file written by `gen`"),
            key("k", "k", None, "support size of β*"),
            key("beta_min", "beta-min", Some("1"), "magnitude of β* on its support"),
            key("sign_pattern", "sign-pattern", Some("all_plus"), "all_plus, alternating or seeded_random:SEED"),
            key("sigma2", "sigma2", Some("0.0625"), "noise variance"),
            key("noise_reference", "noise-reference", Some("working"), "working or original"),
            key("lambda", "lambda", Some("0.1"), "regularization parameter"),
            SEED,
        ],
    },
    CommandSpec {
        name: "sweep",
        about: "Monte Carlo success-probability sweep over a (p, θ) grid",
        stochastic: true,
        keys: &[
            key("p_list", "p-list", Some("512,1024,2048"), "ambient dimensions"),
            key("sparsity", "sparsity", Some("polynomial:0.5"), "linear:α, polynomial:c or explicit:k,…"),
            key("theta_grid", "theta-grid", Some("0.2,0.4,0.6,0.8,1,1.2,1.4,1.6,1.8,2"), "control-parameter values"),
            key("gamma_rule", "gamma-rule", Some("figure1"), "figure1, theorem_eq9 or constant:γ"),
            key("lambda_rule", "lambda-rule", Some("remark_b"), "remark_b or constant:λ"),
            key("sigma2", "sigma2", Some("0.0625"), "noise variance"),
            key("beta_min", "beta-min", Some("1"), "magnitude of β* on its support"),
            key("trials", "trials", Some("100"), "trials per grid point"),
            key("mode", "mode", Some("witness"), "witness, full or both"),
            key("convention", "convention", Some("rescaled"), "standard or rescaled"),
            key("noise_reference", "noise-reference", Some("working"), "working or original"),
            key("retain_trials", "retain-trials", Some("false"), "keep per-trial records in the JSON"),
            key("record_timing", "record-timing", Some("false"), "record per-trial wall time"),
            key("threads", "threads", Some("0"), "worker cap; 0 = all cores, 1 = sequential"),
            key("output_csv", "output-csv", Some("sweep.csv"), "CSV summary path"),
            key("output_json", "output-json", Some("sweep.json"), "JSON mirror path"),
            SEED,
        ],
    },
    CommandSpec {
        name: "bounds",
        about: "Monte Carlo check of the tail bounds",
        stochastic: true,
        keys: &[
            key("samples", "samples", Some("100000"), "samples per grid point"),
            key("threads", "threads", Some("0"), "worker cap; 0 = all cores, 1 = sequential"),
            SEED,
        ],
    },
    CommandSpec {
        name: "check-conditions",
        about: "Tabulate the sufficiency conditions along the γ and λ schedules",
        stochastic: false,
        keys: &[
            key("p_list", "p-list", Some("1024,16384,262144"), "ambient dimensions"),
            key("sparsity", "sparsity", Some("polynomial:0.5"), "linear:α, polynomial:c or explicit:k,…"),
            key("gamma_rule", "gamma-rule", Some("theorem_eq9"), "figure1, theorem_eq9 or constant:γ"),
            key("eps", "eps", Some("0"), "sample size n = ⌊(2+eps)·k·log(p−k)⌋ + 1"),
            key("beta_min", "beta-min", Some("1"), "β_min used in the conditions"),
        ],
    },
];

pub fn command_spec(name: &str) -> Option<&'static CommandSpec> {
    COMMANDS.iter().find(|c| c.name == name)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Source {
    Default,
    File,
    Flag,
}

impl Source {
    pub fn as_str(self) -> &'static str {
        match self {
            Source::Default => "default",
            Source::File => "file",
            Source::Flag => "flag",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Entry {
    pub key: &'static str,
    pub value: Option<String>,
    pub source: Source,
}

/// The fully resolved parameters of one subcommand.
#[derive(Debug, Clone)]
pub struct CliConfig {
    pub command: &'static str,
    pub entries: Vec<Entry>,
}

fn nearest<'a>(name: &str, candidates: impl Iterator<Item = &'a str>) -> Option<&'a str> {
    candidates
        .map(|c| (strsim::levenshtein(name, c), c))
        .min()
        .map(|(_, c)| c)
}

fn toml_scalar(v: &toml::Value) -> Option<String> {
    match v {
        toml::Value::String(s) => Some(s.clone()),
        toml::Value::Integer(i) => Some(i.to_string()),
        toml::Value::Float(f) => Some(f.to_string()),
        toml::Value::Boolean(b) => Some(b.to_string()),
        _ => None,
    }
}

fn toml_to_string(v: &toml::Value) -> Option<String> {
    match v {
        toml::Value::Array(items) => items
            .iter()
            .map(toml_scalar)
            .collect::<Option<Vec<_>>>()
            .map(|parts| parts.join(",")),
        other => toml_scalar(other),
    }
}

/// Values set for `command` in a config file, after validating every
/// section and key in the file.
pub fn load_config(path: &Path, command: &str) -> CliResult<Vec<(String, String)>> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Usage(format!("cannot read config {}: {e}", path.display())))?;
    parse_config(&text, command)
        .map_err(|e| CliError::Usage(format!("config {}: {e}", path.display())))
}

pub fn parse_config(text: &str, command: &str) -> Result<Vec<(String, String)>, String> {
    let table: toml::Table = text.parse().map_err(|e: toml::de::Error| e.message().to_string())?;
    let mut out = Vec::new();
    for (section, body) in &table {
        let Some(spec) = command_spec(section) else {
            let hint = nearest(section, COMMANDS.iter().map(|c| c.name))
                .map(|n| format!("; did you mean [{n}]?"))
                .unwrap_or_default();
            return Err(format!("unknown section [{section}]{hint}"));
        };
        let toml::Value::Table(body) = body else {
            return Err(format!("`{section}` must be a section, not a value"));
        };
        for (k, v) in body {
            if !spec.keys.iter().any(|s| s.key == k) {
                let hint = nearest(k, spec.keys.iter().map(|s| s.key))
                    .map(|n| format!("; did you mean `{n}`?"))
                    .unwrap_or_default();
                return Err(format!("unknown key `{k}` in [{section}]{hint}"));
            }
            let value = toml_to_string(v)
                .ok_or_else(|| format!("key `{k}` in [{section}] has an unsupported value"))?;
            if section == command {
                out.push((k.clone(), value));
            }
        }
    }
    Ok(out)
}

impl CliConfig {
    /// Merge defaults ← file ← flags for `spec`.
    pub fn resolve(
        spec: &'static CommandSpec,
        file: &[(String, String)],
        flags: &[(&'static str, String)],
    ) -> CliResult<Self> {
        let mut entries: Vec<Entry> = spec
            .keys
            .iter()
            .map(|k| Entry {
                key: k.key,
                value: k.default.map(str::to_string),
                source: Source::Default,
            })
            .collect();
        let mut set = |key: &str, value: &str, source: Source| {
            if let Some(e) = entries.iter_mut().find(|e| e.key == key) {
                e.value = Some(value.to_string());
                e.source = source;
            }
        };
        for (k, v) in file {
            set(k, v, Source::File);
        }
        for (k, v) in flags {
            set(k, v, Source::Flag);
        }
        let cfg = CliConfig {
            command: spec.name,
            entries,
        };
        if spec.stochastic && cfg.get("base_seed").is_none() {
            return Err(CliError::Usage(format!(
                "`{}` needs an explicit base_seed (--base-seed or the config file); runs are never seeded from the clock",
                spec.name
            )));
        }
        Ok(cfg)
    }

    pub fn entry(&self, key: &str) -> Option<&Entry> {
        self.entries.iter().find(|e| e.key == key)
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.entry(key).and_then(|e| e.value.as_deref())
    }

    pub fn require(&self, key: &str) -> CliResult<&str> {
        self.get(key)
            .ok_or_else(|| CliError::Usage(format!("`{key}` is required for `{}`", self.command)))
    }

    pub fn parse<T: FromStr>(&self, key: &str) -> CliResult<T>
    where
        T::Err: fmt::Display,
    {
        let raw = self.require(key)?;
        raw.trim()
            .parse()
            .map_err(|e| CliError::Usage(format!("invalid value `{raw}` for `{key}`: {e}")))
    }

    pub fn parse_list<T: FromStr>(&self, key: &str) -> CliResult<Vec<T>>
    where
        T::Err: fmt::Display,
    {
        let raw = self.require(key)?;
        raw.split(',')
            .filter(|s| !s.trim().is_empty())
            .map(|s| {
                s.trim()
                    .parse()
                    .map_err(|e| CliError::Usage(format!("invalid entry `{s}` in `{key}`: {e}")))
            })
            .collect()
    }

    /// `{"key": {"value": …, "source": …}, …}` in declaration order.
    pub fn to_json(&self) -> Value {
        let mut map = Map::new();
        for e in &self.entries {
            map.insert(
                e.key.to_string(),
                json!({ "value": e.value, "source": e.source.as_str() }),
            );
        }
        json!({ "command": self.command, "parameters": Value::Object(map) })
    }

    /// `# key = value (source)` lines for text outputs.
    pub fn comment_lines(&self) -> String {
        let mut out = format!("# splasso {}\n", self.command);
        for e in &self.entries {
            out.push_str(&format!(
                "# {} = {} ({})\n",
                e.key,
                e.value.as_deref().unwrap_or("<unset>"),
                e.source.as_str()
            ));
        }
        out
    }
}
