//! Run configuration: flat `section.key = value` text files with full
//! validation. Unknown keys are errors; validation collects every violation
//! instead of stopping at the first.

use crate::driver::IterationConfig;
use crate::gas::GasParams;
use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("config syntax errors:\n{}", .0.join("\n"))]
    Parse(Vec<String>),
    #[error("config validation errors:\n{}", .0.join("\n"))]
    Validation(Vec<String>),
    #[error("cannot read config: {0}")]
    Io(String),
}

#[derive(Debug, Clone)]
pub struct InletConfig {
    pub a_s: f64,
    pub a_v: f64,
    pub epsilon: f64,
    pub alpha: f64,
    pub s_profile: Option<PathBuf>,
    pub v_profile: Option<PathBuf>,
}

#[derive(Debug, Clone)]
pub struct DomainConfig {
    /// One length for solve, several for the continuation sweep.
    pub l_list: Vec<f64>,
    pub nx: usize,
    pub ny: usize,
}

#[derive(Debug, Clone)]
pub struct OutputConfig {
    pub dir: Option<PathBuf>,
    pub solution: bool,
    pub boundary: bool,
    pub report: bool,
}

#[derive(Debug, Clone)]
pub struct RunConfig {
    pub gas: GasParams,
    pub inlet: InletConfig,
    pub domain: DomainConfig,
    pub iteration: IterationConfig,
    pub output: OutputConfig,
    /// Original key-value pairs, echoed into output headers.
    pub echo: Vec<(String, String)>,
}

pub fn parse_config(path: &Path) -> Result<RunConfig, ConfigError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| ConfigError::Io(format!("{}: {e}", path.display())))?;
    parse_config_str(&text)
}

const KNOWN_KEYS: &[&str] = &[
    "gas.gamma",
    "gas.rho_plus",
    "gas.rho_minus",
    "gas.p0",
    "gas.u0",
    "inlet.a_s",
    "inlet.a_v",
    "inlet.epsilon",
    "inlet.alpha",
    "inlet.s_profile",
    "inlet.v_profile",
    "domain.l",
    "domain.l_list",
    "domain.nx",
    "domain.ny",
    "iteration.tol_inner",
    "iteration.tol_middle",
    "iteration.tol_outer",
    "iteration.max_inner",
    "iteration.max_middle",
    "iteration.max_outer",
    "iteration.theta",
    "output.dir",
    "output.solution",
    "output.boundary",
    "output.report",
];

struct Reader<'a> {
    pairs: &'a BTreeMap<String, (usize, String)>,
    violations: Vec<String>,
}

impl Reader<'_> {
    fn f64(&mut self, key: &str, default: Option<f64>) -> Option<f64> {
        match self.pairs.get(key) {
            Some((lineno, v)) => match v.parse::<f64>() {
                Ok(x) => Some(x),
                Err(_) => {
                    self.violations
                        .push(format!("line {lineno}: `{key}` is not a number: `{v}`"));
                    None
                }
            },
            None => default,
        }
    }

    fn usize(&mut self, key: &str, default: usize) -> usize {
        match self.pairs.get(key) {
            Some((lineno, v)) => match v.parse::<usize>() {
                Ok(x) => x,
                Err(_) => {
                    self.violations.push(format!(
                        "line {lineno}: `{key}` is not a positive integer: `{v}`"
                    ));
                    default
                }
            },
            None => default,
        }
    }

    fn bool(&mut self, key: &str, default: bool) -> bool {
        match self.pairs.get(key) {
            Some((lineno, v)) => match v.as_str() {
                "true" | "1" | "yes" => true,
                "false" | "0" | "no" => false,
                _ => {
                    self.violations
                        .push(format!("line {lineno}: `{key}` is not a boolean: `{v}`"));
                    default
                }
            },
            None => default,
        }
    }
}

pub fn parse_config_str(text: &str) -> Result<RunConfig, ConfigError> {
    let mut parse_errors = Vec::new();
    let mut pairs: BTreeMap<String, (usize, String)> = BTreeMap::new();
    let mut echo = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let lineno = idx + 1;
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let Some((key, value)) = line.split_once('=') else {
            parse_errors.push(format!("line {lineno}: expected `section.key = value`"));
            continue;
        };
        let key = key.trim().to_string();
        let value = value.trim().to_string();
        if !KNOWN_KEYS.contains(&key.as_str()) {
            parse_errors.push(format!("line {lineno}: unknown key `{key}`"));
            continue;
        }
        if let Some((first, _)) = pairs.get(&key) {
            parse_errors.push(format!(
                "line {lineno}: key `{key}` already set on line {first}"
            ));
            continue;
        }
        echo.push((key.clone(), value.clone()));
        pairs.insert(key, (lineno, value));
    }
    if !parse_errors.is_empty() {
        return Err(ConfigError::Parse(parse_errors));
    }

    let mut rd = Reader {
        pairs: &pairs,
        violations: Vec::new(),
    };

    let gamma = rd.f64("gas.gamma", None);
    let rho_plus = rd.f64("gas.rho_plus", None);
    let rho_minus = rd.f64("gas.rho_minus", None);
    let p0 = rd.f64("gas.p0", None);
    let u0 = rd.f64("gas.u0", None);
    for (key, v) in [
        ("gas.gamma", &gamma),
        ("gas.rho_plus", &rho_plus),
        ("gas.rho_minus", &rho_minus),
        ("gas.p0", &p0),
        ("gas.u0", &u0),
    ] {
        if v.is_none() && !rd.violations.iter().any(|m| m.contains(key)) {
            rd.violations.push(format!("missing required key `{key}`"));
        }
    }

    let a_s = rd.f64("inlet.a_s", Some(0.0));
    let a_v = rd.f64("inlet.a_v", Some(0.0));
    let epsilon = rd.f64("inlet.epsilon", Some(0.05));
    let alpha = rd.f64("inlet.alpha", Some(0.5));
    let tol_inner = rd.f64("iteration.tol_inner", Some(1e-8));
    let tol_middle = rd.f64("iteration.tol_middle", Some(1e-8));
    let tol_outer = rd.f64("iteration.tol_outer", Some(1e-8));
    let theta = rd.f64("iteration.theta", Some(1.0));
    let l_single = rd.f64("domain.l", None);

    let nx = rd.usize("domain.nx", 256);
    let ny = rd.usize("domain.ny", 64);
    let max_inner = rd.usize("iteration.max_inner", 50);
    let max_middle = rd.usize("iteration.max_middle", 50);
    let max_outer = rd.usize("iteration.max_outer", 30);

    let l_list: Vec<f64> = match pairs.get("domain.l_list") {
        Some((lineno, v)) => {
            let mut out = Vec::new();
            for tok in v.split(',') {
                match tok.trim().parse::<f64>() {
                    Ok(x) => out.push(x),
                    Err(_) => rd.violations.push(format!(
                        "line {lineno}: `domain.l_list` entry is not a number: `{tok}`"
                    )),
                }
            }
            out
        }
        None => vec![l_single.unwrap_or(20.0)],
    };
    if pairs.contains_key("domain.l") && pairs.contains_key("domain.l_list") {
        rd.violations
            .push("`domain.l` and `domain.l_list` are mutually exclusive".to_string());
    }

    let path_of = |key: &str| pairs.get(key).map(|(_, v)| PathBuf::from(v));
    let s_profile = path_of("inlet.s_profile");
    let v_profile = path_of("inlet.v_profile");
    if s_profile.is_some() != v_profile.is_some() {
        rd.violations
            .push("`inlet.s_profile` and `inlet.v_profile` must be given together".to_string());
    }

    let out_solution = rd.bool("output.solution", true);
    let out_boundary = rd.bool("output.boundary", true);
    let out_report = rd.bool("output.report", true);
    let out_dir = path_of("output.dir");

    let mut violations = rd.violations;
    // constraint validation with named constraints
    if let (Some(gamma), Some(rho_plus), Some(rho_minus), Some(p0), Some(u0)) =
        (gamma, rho_plus, rho_minus, p0, u0)
    {
        let params = GasParams {
            gamma,
            rho_plus,
            rho_minus,
            p0,
            u0,
        };
        if let Err(e) = params.validate() {
            violations.push(e.to_string());
        }
    }
    if let Some(eps) = epsilon {
        if !(eps > 0.0 && eps < 0.1) {
            violations.push(format!("inlet.epsilon must lie in (0, 1/10), got {eps}"));
        }
    }
    if let Some(alpha) = alpha {
        if !(alpha > 0.0 && alpha < 1.0) {
            violations.push(format!("inlet.alpha must lie in (0, 1), got {alpha}"));
        }
    }
    for l in &l_list {
        if !(*l > 0.0) {
            violations.push(format!("domain length must be positive, got {l}"));
        }
    }
    if l_list.is_empty() {
        violations.push("domain.l_list must not be empty".to_string());
    }
    for pair in l_list.windows(2) {
        if pair[1] <= pair[0] {
            violations.push(format!(
                "domain.l_list must be strictly increasing, got {} after {}",
                pair[1], pair[0]
            ));
            break;
        }
    }
    if nx < 8 || ny < 8 {
        violations.push(format!(
            "grid counts must be at least 8, got nx = {nx}, ny = {ny}"
        ));
    }
    for (name, tol) in [
        ("iteration.tol_inner", tol_inner),
        ("iteration.tol_middle", tol_middle),
        ("iteration.tol_outer", tol_outer),
    ] {
        if let Some(t) = tol {
            if !(t > 0.0) {
                violations.push(format!("{name} must be positive, got {t}"));
            }
        }
    }
    for (name, cap) in [
        ("iteration.max_inner", max_inner),
        ("iteration.max_middle", max_middle),
        ("iteration.max_outer", max_outer),
    ] {
        if cap < 1 {
            violations.push(format!("{name} must be at least 1"));
        }
    }
    if let Some(t) = theta {
        if !(t > 0.0 && t <= 1.0) {
            violations.push(format!("iteration.theta must lie in (0, 1], got {t}"));
        }
    }
    if !violations.is_empty() {
        return Err(ConfigError::Validation(violations));
    }

    let iteration = IterationConfig {
        tol_inner: tol_inner.unwrap(),
        tol_middle: tol_middle.unwrap(),
        tol_outer: tol_outer.unwrap(),
        max_inner,
        max_middle,
        max_outer,
        theta: theta.unwrap(),
        ..IterationConfig::default()
    };
    Ok(RunConfig {
        gas: GasParams {
            gamma: gamma.unwrap(),
            rho_plus: rho_plus.unwrap(),
            rho_minus: rho_minus.unwrap(),
            p0: p0.unwrap(),
            u0: u0.unwrap(),
        },
        inlet: InletConfig {
            a_s: a_s.unwrap(),
            a_v: a_v.unwrap(),
            epsilon: epsilon.unwrap(),
            alpha: alpha.unwrap(),
            s_profile,
            v_profile,
        },
        domain: DomainConfig { l_list, nx, ny },
        iteration,
        output: OutputConfig {
            dir: out_dir,
            solution: out_solution,
            boundary: out_boundary,
            report: out_report,
        },
        echo,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = "gas.gamma = 1.4\n\
                           gas.rho_plus = 1.0\n\
                           gas.rho_minus = 2.0\n\
                           gas.p0 = 1.0\n\
                           gas.u0 = 0.5\n";

    #[test]
    fn minimal_config_gets_defaults() {
        let cfg = parse_config_str(MINIMAL).unwrap();
        assert_eq!(cfg.domain.l_list, vec![20.0]);
        assert_eq!(cfg.domain.nx, 256);
        assert_eq!(cfg.domain.ny, 64);
        assert_eq!(cfg.iteration.tol_inner, 1e-8);
        assert_eq!(cfg.iteration.max_inner, 50);
        assert_eq!(cfg.iteration.max_outer, 30);
        assert_eq!(cfg.iteration.theta, 1.0);
        assert_eq!(cfg.inlet.epsilon, 0.05);
        assert_eq!(cfg.inlet.alpha, 0.5);
        assert_eq!(cfg.inlet.a_s, 0.0);
    }

    #[test]
    fn bad_gamma_names_the_constraint() {
        let text = MINIMAL.replace("gas.gamma = 1.4", "gas.gamma = 0.9");
        match parse_config_str(&text) {
            Err(ConfigError::Validation(v)) => {
                assert!(v.iter().any(|m| m.contains("gamma")), "{v:?}");
            }
            other => panic!("expected validation error, got {other:?}"),
        }
    }

    #[test]
    fn supersonic_background_rejected() {
        let text = MINIMAL.replace("gas.u0 = 0.5", "gas.u0 = 1.3");
        match parse_config_str(&text) {
            Err(ConfigError::Validation(v)) => {
                assert!(v.iter().any(|m| m.contains("subsonic")), "{v:?}");
            }
            other => panic!("expected validation error, got {other:?}"),
        }
    }

    #[test]
    fn unknown_key_rejected() {
        let text = format!("{MINIMAL}gas.tyop = 3\n");
        match parse_config_str(&text) {
            Err(ConfigError::Parse(v)) => {
                assert!(v[0].contains("unknown key"), "{v:?}");
            }
            other => panic!("expected parse error, got {other:?}"),
        }
    }

    #[test]
    fn all_violations_collected() {
        let text = "gas.gamma = 0.9\n\
                    gas.rho_plus = -1\n\
                    gas.rho_minus = 2.0\n\
                    gas.p0 = 1.0\n\
                    gas.u0 = 0.5\n\
                    inlet.epsilon = 0.3\n\
                    iteration.theta = 1.5\n";
        match parse_config_str(text) {
            Err(ConfigError::Validation(v)) => {
                assert!(v.len() >= 3, "expected all violations, got {v:?}");
            }
            other => panic!("expected validation error, got {other:?}"),
        }
    }

    #[test]
    fn l_list_parses() {
        let text = format!("{MINIMAL}domain.l_list = 20, 40, 80\n");
        let cfg = parse_config_str(&text).unwrap();
        assert_eq!(cfg.domain.l_list, vec![20.0, 40.0, 80.0]);
    }
}
