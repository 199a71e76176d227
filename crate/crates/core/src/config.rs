//! Plain-text simulation configuration.
//!
//! ```text
//! # comment
//! [model]
//! n = 8
//! lambda = 0.45
//! [bath]
//! temperature = 0.05
//! ```
//!
//! Keys may also appear before any section header. Every problem in a file
//! is collected and reported at once.

use std::fmt;
use std::path::PathBuf;

use crate::dissipation::BathParams;
use crate::experiments::{Axis, LambdaCVariant, Scale};
use crate::model::DickeParams;
use crate::pipeline::{LevelPolicy, SolverSettings};

#[derive(Debug, Clone, PartialEq)]
pub struct ConfigIssue {
    /// 1-based; 0 for problems not tied to a line.
    pub line: usize,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConfigError {
    pub issues: Vec<ConfigIssue>,
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} configuration problem(s)", self.issues.len())?;
        for i in &self.issues {
            if i.line > 0 {
                write!(f, "\n  line {}: {}", i.line, i.message)?;
            } else {
                write!(f, "\n  {}", i.message)?;
            }
        }
        Ok(())
    }
}

impl std::error::Error for ConfigError {}

/// Everything a run needs.
#[derive(Debug, Clone, PartialEq)]
pub struct SimulationConfig {
    pub params: DickeParams,
    pub baths: BathParams,
    pub solver: SolverSettings,
    pub oracle_fock_cutoff: usize,
    pub lambda_axis: Axis,
    pub n_values: Vec<usize>,
    pub temperature_axis: Axis,
    pub bias_axis: Axis,
    pub bias_lambdas: Vec<f64>,
    pub lambda_c_variant: LambdaCVariant,
    pub out: Option<PathBuf>,
    pub cache_dir: Option<PathBuf>,
}

impl Default for SimulationConfig {
    fn default() -> Self {
        SimulationConfig {
            params: DickeParams::default(),
            baths: BathParams::default(),
            solver: SolverSettings::default(),
            oracle_fock_cutoff: 150,
            lambda_axis: Axis::linear("lambda", 0.05, 1.2, 116),
            n_values: vec![4, 8, 16, 32, 64],
            temperature_axis: Axis::linear("temperature", 0.05, 0.5, 10),
            bias_axis: Axis::linear("temperature", 0.05, 0.5, 8),
            bias_lambdas: vec![0.1, 0.4, 0.7, 1.0],
            lambda_c_variant: LambdaCVariant::Caption,
            out: None,
            cache_dir: None,
        }
    }
}

const SECTIONS: &[(&str, &[&str])] = &[
    ("model", &["n", "delta", "omega", "lambda"]),
    ("bath", &["alpha", "omega_c", "temperature", "t_q", "t_c"]),
    (
        "solver",
        &["n_tr", "k_levels", "max_levels", "oracle_fock_cutoff"],
    ),
    (
        "sweep",
        &[
            "lambda_min",
            "lambda_max",
            "lambda_points",
            "lambda_scale",
            "n_values",
            "t_min",
            "t_max",
            "t_points",
            "t_scale",
            "bias_min",
            "bias_max",
            "bias_points",
            "bias_lambdas",
            "lambda_c_variant",
        ],
    ),
    ("output", &["out", "cache_dir"]),
];

fn section_of(key: &str) -> Option<&'static str> {
    SECTIONS
        .iter()
        .find(|(_, keys)| keys.contains(&key))
        .map(|(s, _)| *s)
}

struct Parser {
    issues: Vec<ConfigIssue>,
}

impl Parser {
    fn push(&mut self, line: usize, message: impl Into<String>) {
        self.issues.push(ConfigIssue {
            line,
            message: message.into(),
        });
    }

    fn float(&mut self, line: usize, key: &str, v: &str) -> Option<f64> {
        match v.parse::<f64>() {
            Ok(x) if x.is_finite() => Some(x),
            _ => {
                self.push(
                    line,
                    format!("`{key}`: expected a finite number, got `{v}`"),
                );
                None
            }
        }
    }

    fn int(&mut self, line: usize, key: &str, v: &str) -> Option<usize> {
        match v.parse::<usize>() {
            Ok(x) => Some(x),
            Err(_) => {
                self.push(
                    line,
                    format!("`{key}`: expected a non-negative integer, got `{v}`"),
                );
                None
            }
        }
    }

    fn list<T: std::str::FromStr>(&mut self, line: usize, key: &str, v: &str) -> Option<Vec<T>> {
        let parts: Vec<&str> = v
            .split(',')
            .map(str::trim)
            .filter(|s| !s.is_empty())
            .collect();
        let parsed: std::result::Result<Vec<T>, _> = parts.iter().map(|s| s.parse::<T>()).collect();
        match parsed {
            Ok(xs) if !xs.is_empty() => Some(xs),
            _ => {
                self.push(
                    line,
                    format!("`{key}`: expected a comma separated list, got `{v}`"),
                );
                None
            }
        }
    }

    fn scale(&mut self, line: usize, key: &str, v: &str) -> Option<Scale> {
        match v {
            "linear" => Some(Scale::Linear),
            "log" => Some(Scale::Log),
            _ => {
                self.push(
                    line,
                    format!("`{key}`: expected `linear` or `log`, got `{v}`"),
                );
                None
            }
        }
    }
}

/// Axis fields gathered from separate keys, with the line that last touched them.
#[derive(Default)]
struct AxisDraft {
    min: Option<f64>,
    max: Option<f64>,
    points: Option<usize>,
    scale: Option<Scale>,
    line: usize,
}

impl AxisDraft {
    fn apply(&self, base: &Axis) -> Axis {
        Axis {
            name: base.name.clone(),
            min: self.min.unwrap_or(base.min),
            max: self.max.unwrap_or(base.max),
            points: self.points.unwrap_or(base.points),
            scale: self.scale.unwrap_or(base.scale),
        }
    }
}

fn unquote(v: &str) -> &str {
    let v = v.trim();
    if v.len() >= 2
        && ((v.starts_with('"') && v.ends_with('"')) || (v.starts_with('\'') && v.ends_with('\'')))
    {
        &v[1..v.len() - 1]
    } else {
        v
    }
}

/// Parses and validates a configuration file body.
pub fn parse_config(text: &str) -> Result<SimulationConfig, ConfigError> {
    let mut cfg = SimulationConfig::default();
    let mut p = Parser { issues: Vec::new() };
    let mut section: Option<String> = None;
    let mut lam = AxisDraft::default();
    let mut temp = AxisDraft::default();
    let mut bias = AxisDraft::default();
    let mut temperature: Option<f64> = None;
    let (mut t_q, mut t_c) = (None, None);
    let mut line_of = std::collections::HashMap::new();

    for (i, raw) in text.lines().enumerate() {
        let ln = i + 1;
        let line = match raw.find('#') {
            Some(c) => &raw[..c],
            None => raw,
        }
        .trim();
        if line.is_empty() {
            continue;
        }
        if let Some(rest) = line.strip_prefix('[') {
            match rest.strip_suffix(']').map(str::trim) {
                Some(name) if SECTIONS.iter().any(|(s, _)| *s == name) => {
                    section = Some(name.to_string())
                }
                Some(name) => p.push(ln, format!("unknown section `[{name}]`")),
                None => p.push(ln, format!("malformed section header `{line}`")),
            }
            continue;
        }
        let Some((key, value)) = line.split_once('=') else {
            p.push(ln, format!("expected `key = value`, got `{line}`"));
            continue;
        };
        let key = key.trim();
        let value = unquote(value);
        match (section_of(key), section.as_deref()) {
            (None, _) => {
                p.push(ln, format!("unknown key `{key}`"));
                continue;
            }
            (Some(home), Some(cur)) if home != cur => {
                p.push(
                    ln,
                    format!("key `{key}` belongs in [{home}], found in [{cur}]"),
                );
                continue;
            }
            _ => {}
        }
        if let Some(prev) = line_of.insert(key.to_string(), ln) {
            p.push(
                ln,
                format!("duplicate key `{key}` (first set on line {prev})"),
            );
        }
        match key {
            "n" => {
                if let Some(v) = p.int(ln, key, value) {
                    cfg.params.n_qubits = v;
                }
            }
            "delta" => {
                if let Some(v) = p.float(ln, key, value) {
                    cfg.params.delta = v;
                }
            }
            "omega" => {
                if let Some(v) = p.float(ln, key, value) {
                    cfg.params.omega = v;
                }
            }
            "lambda" => {
                if let Some(v) = p.float(ln, key, value) {
                    cfg.params.lambda = v;
                }
            }
            "alpha" => {
                if let Some(v) = p.float(ln, key, value) {
                    cfg.baths.alpha = v;
                }
            }
            "omega_c" => {
                if let Some(v) = p.float(ln, key, value) {
                    cfg.baths.omega_c = v;
                }
            }
            "temperature" => temperature = p.float(ln, key, value),
            "t_q" => t_q = p.float(ln, key, value),
            "t_c" => t_c = p.float(ln, key, value),
            "n_tr" => {
                if let Some(v) = p.int(ln, key, value) {
                    cfg.solver.n_tr = v;
                }
            }
            "k_levels" => {
                if value == "auto" {
                    cfg.solver.k_levels = LevelPolicy::Auto;
                } else if let Some(v) = p.int(ln, key, value) {
                    cfg.solver.k_levels = LevelPolicy::Fixed(v);
                }
            }
            "max_levels" => {
                if let Some(v) = p.int(ln, key, value) {
                    cfg.solver.max_levels = v;
                }
            }
            "oracle_fock_cutoff" => {
                if let Some(v) = p.int(ln, key, value) {
                    cfg.oracle_fock_cutoff = v;
                }
            }
            "lambda_min" => (lam.min, lam.line) = (p.float(ln, key, value), ln),
            "lambda_max" => (lam.max, lam.line) = (p.float(ln, key, value), ln),
            "lambda_points" => (lam.points, lam.line) = (p.int(ln, key, value), ln),
            "lambda_scale" => (lam.scale, lam.line) = (p.scale(ln, key, value), ln),
            "t_min" => (temp.min, temp.line) = (p.float(ln, key, value), ln),
            "t_max" => (temp.max, temp.line) = (p.float(ln, key, value), ln),
            "t_points" => (temp.points, temp.line) = (p.int(ln, key, value), ln),
            "t_scale" => (temp.scale, temp.line) = (p.scale(ln, key, value), ln),
            "bias_min" => (bias.min, bias.line) = (p.float(ln, key, value), ln),
            "bias_max" => (bias.max, bias.line) = (p.float(ln, key, value), ln),
            "bias_points" => (bias.points, bias.line) = (p.int(ln, key, value), ln),
            "n_values" => {
                if let Some(v) = p.list::<usize>(ln, key, value) {
                    if v.iter().any(|&n| n == 0) {
                        p.push(ln, "`n_values`: qubit numbers must be positive");
                    }
                    cfg.n_values = v;
                }
            }
            "bias_lambdas" => {
                if let Some(v) = p.list::<f64>(ln, key, value) {
                    if v.iter().any(|x| !x.is_finite() || *x < 0.0) {
                        p.push(
                            ln,
                            "`bias_lambdas`: couplings must be finite and non-negative",
                        );
                    }
                    cfg.bias_lambdas = v;
                }
            }
            "lambda_c_variant" => match value {
                "caption" => cfg.lambda_c_variant = LambdaCVariant::Caption,
                "main-text" | "main_text" => cfg.lambda_c_variant = LambdaCVariant::MainText,
                _ => p.push(
                    ln,
                    format!("`{key}`: expected `caption` or `main-text`, got `{value}`"),
                ),
            },
            "out" => cfg.out = Some(PathBuf::from(value)),
            "cache_dir" => cfg.cache_dir = Some(PathBuf::from(value)),
            _ => unreachable!("key table and match arms disagree on `{key}`"),
        }
    }

    if let Some(t) = temperature {
        cfg.baths.t_q = t;
        cfg.baths.t_c = t;
    }
    if let Some(t) = t_q {
        cfg.baths.t_q = t;
    }
    if let Some(t) = t_c {
        cfg.baths.t_c = t;
    }
    cfg.lambda_axis = lam.apply(&cfg.lambda_axis);
    cfg.temperature_axis = temp.apply(&cfg.temperature_axis);
    cfg.bias_axis = bias.apply(&cfg.bias_axis);

    let at = |key: &str| line_of.get(key).copied().unwrap_or(0);
    let key_line = |e: &crate::error::Error| match e {
        crate::error::Error::InvalidParameter { name, .. } => match *name {
            "n_qubits" => at("n"),
            "t_q" | "t_c" => at(name).max(at("temperature")),
            other => at(other),
        },
        _ => 0,
    };
    for e in cfg.params.problems().iter().chain(&cfg.baths.problems()) {
        p.push(key_line(e), e.to_string());
    }
    if let Err(e) = cfg.solver.validate() {
        p.push(
            at("n_tr").max(at("k_levels")).max(at("max_levels")),
            e.to_string(),
        );
    }
    for (axis, draft, positive) in [
        (&cfg.lambda_axis, &lam, false),
        (&cfg.temperature_axis, &temp, true),
        (&cfg.bias_axis, &bias, true),
    ] {
        if let Err(e) = axis.validate() {
            p.push(draft.line, e.to_string());
        } else if positive && axis.min <= 0.0 {
            p.push(
                draft.line,
                format!("{} axis must be strictly positive", axis.name),
            );
        } else if axis.min < 0.0 {
            p.push(
                draft.line,
                format!("{} axis must be non-negative", axis.name),
            );
        }
    }
    if p.issues.is_empty() {
        Ok(cfg)
    } else {
        p.issues.sort_by_key(|i| i.line);
        Err(ConfigError { issues: p.issues })
    }
}

fn join<T: fmt::Debug>(xs: &[T]) -> String {
    xs.iter()
        .map(|x| format!("{x:?}"))
        .collect::<Vec<_>>()
        .join(", ")
}

fn scale_name(s: Scale) -> &'static str {
    match s {
        Scale::Linear => "linear",
        Scale::Log => "log",
    }
}

/// Canonical text form; `parse_config(render_config(c)) == c`.
pub fn render_config(c: &SimulationConfig) -> String {
    let f = |x: f64| format!("{x:?}");
    let mut lines: Vec<String> = Vec::new();
    let mut section = |name: &str, kvs: Vec<(&str, String)>| {
        lines.push(format!("[{name}]"));
        lines.extend(kvs.into_iter().map(|(k, v)| format!("{k} = {v}")));
    };
    section(
        "model",
        vec![
            ("n", c.params.n_qubits.to_string()),
            ("delta", f(c.params.delta)),
            ("omega", f(c.params.omega)),
            ("lambda", f(c.params.lambda)),
        ],
    );
    section(
        "bath",
        vec![
            ("alpha", f(c.baths.alpha)),
            ("omega_c", f(c.baths.omega_c)),
            ("t_q", f(c.baths.t_q)),
            ("t_c", f(c.baths.t_c)),
        ],
    );
    let k_levels = match c.solver.k_levels {
        LevelPolicy::Auto => "auto".to_string(),
        LevelPolicy::Fixed(k) => k.to_string(),
    };
    section(
        "solver",
        vec![
            ("n_tr", c.solver.n_tr.to_string()),
            ("k_levels", k_levels),
            ("max_levels", c.solver.max_levels.to_string()),
            ("oracle_fock_cutoff", c.oracle_fock_cutoff.to_string()),
        ],
    );
    section(
        "sweep",
        vec![
            ("lambda_min", f(c.lambda_axis.min)),
            ("lambda_max", f(c.lambda_axis.max)),
            ("lambda_points", c.lambda_axis.points.to_string()),
            ("lambda_scale", scale_name(c.lambda_axis.scale).into()),
            ("n_values", join(&c.n_values)),
            ("t_min", f(c.temperature_axis.min)),
            ("t_max", f(c.temperature_axis.max)),
            ("t_points", c.temperature_axis.points.to_string()),
            ("t_scale", scale_name(c.temperature_axis.scale).into()),
            ("bias_min", f(c.bias_axis.min)),
            ("bias_max", f(c.bias_axis.max)),
            ("bias_points", c.bias_axis.points.to_string()),
            ("bias_lambdas", join(&c.bias_lambdas)),
            ("lambda_c_variant", c.lambda_c_variant.name().into()),
        ],
    );
    let mut out = Vec::new();
    if let Some(p) = &c.out {
        out.push(("out", format!("\"{}\"", p.display())));
    }
    if let Some(p) = &c.cache_dir {
        out.push(("cache_dir", format!("\"{}\"", p.display())));
    }
    section("output", out);
    lines.join("\n") + "\n"
}

/// Applies `key = value` overrides (command-line flags) on top of a parsed
/// config. Keys are the file keys; `temperature` sets both baths. Problems
/// are reported against the key instead of a line.
pub fn with_overrides(
    base: &SimulationConfig,
    overrides: &[(&str, String)],
) -> Result<SimulationConfig, ConfigError> {
    if overrides.is_empty() {
        return Ok(base.clone());
    }
    let mut issues = Vec::new();
    let mut lines: Vec<String> = render_config(base).lines().map(String::from).collect();
    for (key, value) in overrides {
        let targets: &[&str] = if *key == "temperature" {
            &["t_q", "t_c"]
        } else {
            std::slice::from_ref(key)
        };
        for t in targets {
            if section_of(t).is_none() {
                issues.push(ConfigIssue {
                    line: 0,
                    message: format!("unknown key `{t}`"),
                });
                continue;
            }
            let prefix = format!("{t} = ");
            let entry = format!("{t} = {value}");
            match lines.iter().position(|l| l.starts_with(&prefix)) {
                Some(i) => lines[i] = entry,
                // only the optional [output] keys are absent, and that section is last
                None => lines.push(entry),
            }
        }
    }
    if !issues.is_empty() {
        return Err(ConfigError { issues });
    }
    parse_config(&(lines.join("\n") + "\n")).map_err(|e| ConfigError {
        issues: e
            .issues
            .into_iter()
            .map(|i| {
                let key = lines
                    .get(i.line.wrapping_sub(1))
                    .and_then(|l| l.split('=').next())
                    .map(str::trim)
                    .unwrap_or("");
                ConfigIssue {
                    line: 0,
                    message: if key.is_empty() {
                        i.message
                    } else {
                        format!("{key}: {}", i.message)
                    },
                }
            })
            .collect(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_file_gives_defaults() {
        let c = parse_config("").unwrap();
        assert_eq!(c.params.n_qubits, 8);
        assert_eq!((c.params.delta, c.params.omega), (1.0, 1.0));
        assert_eq!(c.baths.alpha, 0.001);
        assert_eq!(c.baths.omega_c, 10.0);
        assert_eq!((c.baths.t_q, c.baths.t_c), (0.05, 0.05));
        assert_eq!(c.solver.n_tr, 50);
        assert_eq!(c, SimulationConfig::default());
    }

    #[test]
    fn negative_lambda_rejected() {
        let e = parse_config("lambda = -0.1").unwrap_err();
        assert_eq!(e.issues.len(), 1);
        assert_eq!(e.issues[0].line, 1);
        assert!(e.issues[0].message.contains("lambda"));
    }

    #[test]
    fn small_truncation_accepted() {
        let c = parse_config("[model]\nn = 32\n[solver]\nn_tr = 6\n").unwrap();
        assert_eq!(c.params.n_qubits, 32);
        assert_eq!(c.solver.n_tr, 6);
    }

    #[test]
    fn sections_comments_and_temperatures() {
        let text = "# header\nn = 4 # inline\n[bath]\ntemperature = 0.2\nt_c = 0.4\n[sweep]\nn_values = 4, 8,16\nlambda_c_variant = main-text\n";
        let c = parse_config(text).unwrap();
        assert_eq!(c.params.n_qubits, 4);
        assert_eq!((c.baths.t_q, c.baths.t_c), (0.2, 0.4));
        assert_eq!(c.n_values, vec![4, 8, 16]);
        assert_eq!(c.lambda_c_variant, LambdaCVariant::MainText);
    }

    #[test]
    fn all_problems_reported_together() {
        let text = "foo = 1\nn = eight\n[model]\nalpha = 0.1\n[nowhere]\nomega = -1\njunk\n";
        let e = parse_config(text).unwrap_err();
        let lines: Vec<usize> = e.issues.iter().map(|i| i.line).collect();
        assert!(lines.contains(&1), "{e}");
        assert!(lines.contains(&2), "{e}");
        assert!(lines.contains(&4), "{e}");
        assert!(lines.contains(&5), "{e}");
        assert!(lines.contains(&7), "{e}");
        let msg = e.to_string();
        assert!(msg.contains("line 2"));
    }

    #[test]
    fn canonical_text_round_trips() {
        let mut c = parse_config(
            "n = 3\nt_c = 0.3\nk_levels = 20\nout = \"a b.csv\"\nbias_lambdas = 0.1, 0.25",
        )
        .unwrap();
        assert_eq!(parse_config(&render_config(&c)).unwrap(), c);
        c.lambda_axis.scale = Scale::Log;
        assert_eq!(parse_config(&render_config(&c)).unwrap(), c);
    }

    #[test]
    fn overrides_replace_and_validate() {
        let base = parse_config("[model]\nn = 4\n").unwrap();
        let c = with_overrides(
            &base,
            &[
                ("lambda", "0.7".into()),
                ("temperature", "0.2".into()),
                ("out", "x.csv".into()),
            ],
        )
        .unwrap();
        assert_eq!((c.params.n_qubits, c.params.lambda), (4, 0.7));
        assert_eq!((c.baths.t_q, c.baths.t_c), (0.2, 0.2));
        assert_eq!(c.out.as_deref(), Some(std::path::Path::new("x.csv")));
        let e =
            with_overrides(&base, &[("lambda", "-1".into()), ("n", "zero".into())]).unwrap_err();
        assert_eq!(e.issues.len(), 2, "{e}");
        assert!(e.issues.iter().all(|i| i.line == 0));
        assert!(with_overrides(&base, &[("bogus", "1".into())]).is_err());
    }

    #[test]
    fn axis_invariants() {
        assert!(parse_config("lambda_points = 1").is_err());
        assert!(parse_config("lambda_min = 1.0\nlambda_max = 0.5").is_err());
        assert!(parse_config("t_min = 0").is_err());
        let c = parse_config("lambda_min = 0\nlambda_max = 1\nlambda_points = 11").unwrap();
        assert_eq!(c.lambda_axis.values()[10], 1.0);
    }
}
