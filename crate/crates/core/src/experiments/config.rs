//! Experiment configuration and the `key = value` config-file format.

use crate::algorithms::PolicySpec;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExperimentKind {
    Sensitivity,
    Online,
}

impl std::fmt::Display for ExperimentKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            ExperimentKind::Sensitivity => write!(f, "sensitivity"),
            ExperimentKind::Online => write!(f, "online"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DistributionKind {
    /// Pareto with scale 1 and shape 1.1 (heavy-tailed lengths).
    Pareto,
    /// Exponential with mean 1.
    Exponential,
    /// Weibull with scale 2 and shape 0.5.
    Weibull,
}

impl std::str::FromStr for DistributionKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "pareto" => Ok(DistributionKind::Pareto),
            "exponential" => Ok(DistributionKind::Exponential),
            "weibull" => Ok(DistributionKind::Weibull),
            other => Err(Error::Parse(format!("unknown distribution `{other}`"))),
        }
    }
}

impl std::fmt::Display for DistributionKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            DistributionKind::Pareto => write!(f, "pareto"),
            DistributionKind::Exponential => write!(f, "exponential"),
            DistributionKind::Weibull => write!(f, "weibull"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EnvKind {
    Single,
    Identical,
    Unrelated,
}

impl std::str::FromStr for EnvKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "single" => Ok(EnvKind::Single),
            "identical" => Ok(EnvKind::Identical),
            "unrelated" => Ok(EnvKind::Unrelated),
            other => Err(Error::Parse(format!("unknown environment `{other}`"))),
        }
    }
}

impl std::fmt::Display for EnvKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            EnvKind::Single => write!(f, "single"),
            EnvKind::Identical => write!(f, "identical"),
            EnvKind::Unrelated => write!(f, "unrelated"),
        }
    }
}

impl EnvKind {
    /// Default prediction-clairvoyant constituent for this environment.
    pub fn default_clairvoyant(&self) -> PolicySpec {
        match self {
            EnvKind::Single => PolicySpec::Wspt,
            EnvKind::Identical => PolicySpec::Pwspt,
            EnvKind::Unrelated => PolicySpec::MinIncrease,
        }
    }

    /// Default non-clairvoyant constituent for this environment.
    pub fn default_nonclairvoyant(&self) -> PolicySpec {
        match self {
            EnvKind::Single => PolicySpec::Rr,
            EnvKind::Identical => PolicySpec::Wdeq,
            EnvKind::Unrelated => PolicySpec::Pf,
        }
    }
}

/// Default noise grid, bracketing the crossover region of interest.
pub const DEFAULT_OMEGAS: [f64; 10] = [0.0, 0.1, 0.5, 1.0, 2.0, 5.0, 10.0, 20.0, 35.0, 50.0];

#[derive(Debug, Clone)]
pub struct ExperimentConfig {
    pub experiment: ExperimentKind,
    pub distribution: DistributionKind,
    pub n: usize,
    pub m: usize,
    pub env: EnvKind,
    pub algorithms: Vec<PolicySpec>,
    /// Noise standard deviations for sensitivity experiments.
    pub omegas: Vec<f64>,
    /// Relative noise level for online-learning experiments.
    pub gamma: f64,
    pub rounds: usize,
    pub runs: usize,
    pub seed: u64,
}

impl ExperimentConfig {
    pub fn new(experiment: ExperimentKind, env: EnvKind) -> Self {
        let lambda = 0.1;
        let algorithms = vec![
            env.default_nonclairvoyant(),
            PolicySpec::Pts {
                a: Box::new(env.default_clairvoyant()),
                b: Box::new(env.default_nonclairvoyant()),
                lambda,
            },
        ];
        ExperimentConfig {
            experiment,
            distribution: DistributionKind::Pareto,
            n: 1000,
            m: match env {
                EnvKind::Single => 1,
                _ => 5,
            },
            env,
            algorithms,
            omegas: DEFAULT_OMEGAS.to_vec(),
            gamma: 10.0,
            rounds: 10,
            runs: 10,
            seed: 1,
        }
    }

    /// Appends `pts(<default A>,<default B>,lambda)` per lambda.
    pub fn add_pts_lambdas(&mut self, lambdas: &[f64]) -> Result<()> {
        for &lambda in lambdas {
            if !(lambda > 0.0 && lambda < 1.0) {
                return Err(Error::Parse(format!("lambda must lie in (0,1), got {lambda}")));
            }
            self.algorithms.push(PolicySpec::Pts {
                a: Box::new(self.env.default_clairvoyant()),
                b: Box::new(self.env.default_nonclairvoyant()),
                lambda,
            });
        }
        Ok(())
    }

    pub fn validate(&self) -> Result<()> {
        if self.n == 0 {
            return Err(Error::Parse("n must be at least 1".into()));
        }
        if self.runs == 0 {
            return Err(Error::Parse("runs must be at least 1".into()));
        }
        if self.m == 0 {
            return Err(Error::Parse("m must be at least 1".into()));
        }
        if self.env == EnvKind::Single && self.m != 1 {
            return Err(Error::Parse(format!("single environment with m = {}", self.m)));
        }
        if self.algorithms.is_empty() {
            return Err(Error::Parse("no algorithms selected".into()));
        }
        if self.experiment == ExperimentKind::Online && self.rounds == 0 {
            return Err(Error::Parse("rounds must be at least 1".into()));
        }
        for w in &self.omegas {
            if !(*w >= 0.0) {
                return Err(Error::Parse(format!("omega must be non-negative, got {w}")));
            }
        }
        if !(self.gamma >= 0.0) {
            return Err(Error::Parse(format!("gamma must be non-negative, got {}", self.gamma)));
        }
        Ok(())
    }

    /// Applies one `key = value` assignment using the CLI flag names as keys.
    pub fn apply(&mut self, key: &str, value: &str) -> Result<()> {
        match key {
            "experiment" => {
                self.experiment = match value {
                    "sensitivity" => ExperimentKind::Sensitivity,
                    "online" => ExperimentKind::Online,
                    other => return Err(Error::Parse(format!("unknown experiment `{other}`"))),
                }
            }
            "dist" => self.distribution = value.parse()?,
            "n" => self.n = parse_num(key, value)?,
            "m" => self.m = parse_num(key, value)?,
            "env" => self.env = value.parse()?,
            "algos" => {
                self.algorithms = split_list(value)
                    .map(|s| s.parse::<PolicySpec>())
                    .collect::<Result<_>>()?;
            }
            "lambdas" => {
                let lambdas: Vec<f64> =
                    split_list(value).map(|s| parse_num(key, s)).collect::<Result<_>>()?;
                self.add_pts_lambdas(&lambdas)?;
            }
            "omegas" => {
                self.omegas = split_list(value).map(|s| parse_num(key, s)).collect::<Result<_>>()?;
            }
            "gamma" => self.gamma = parse_num(key, value)?,
            "rounds" => self.rounds = parse_num(key, value)?,
            "runs" => self.runs = parse_num(key, value)?,
            "seed" => self.seed = parse_num(key, value)?,
            other => return Err(Error::Parse(format!("unknown config key `{other}`"))),
        }
        Ok(())
    }

    /// Parses a config file: one `key = value` per line, `#` comments allowed.
    pub fn apply_file(&mut self, text: &str) -> Result<()> {
        for (lineno, line) in text.lines().enumerate() {
            let line = line.split('#').next().unwrap().trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| {
                Error::Parse(format!("line {}: expected `key = value`", lineno + 1))
            })?;
            self.apply(key.trim(), value.trim())?;
        }
        Ok(())
    }
}

fn parse_num<T: std::str::FromStr>(key: &str, value: &str) -> Result<T>
where
    T::Err: std::fmt::Display,
{
    value.parse().map_err(|e| Error::Parse(format!("key `{key}`: {e}")))
}

fn split_list(value: &str) -> impl Iterator<Item = &str> {
    // Split on commas at depth 0 so pts(a,b,l) entries stay intact.
    let mut parts = Vec::new();
    let mut depth = 0usize;
    let mut start = 0usize;
    for (idx, c) in value.char_indices() {
        match c {
            '(' => depth += 1,
            ')' => depth = depth.saturating_sub(1),
            ',' if depth == 0 => {
                parts.push(value[start..idx].trim());
                start = idx + 1;
            }
            _ => {}
        }
    }
    parts.push(value[start..].trim());
    parts.into_iter().filter(|s| !s.is_empty())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn config_file_round() {
        let mut cfg = ExperimentConfig::new(ExperimentKind::Sensitivity, EnvKind::Single);
        cfg.apply_file(
            "experiment = sensitivity\n\
             dist = weibull\n\
             n = 100\n\
             # comment\n\
             algos = rr, pts(wspt,rr,0.5)\n\
             omegas = 0, 1, 2\n\
             seed = 99\n",
        )
        .unwrap();
        assert_eq!(cfg.distribution, DistributionKind::Weibull);
        assert_eq!(cfg.n, 100);
        assert_eq!(cfg.algorithms.len(), 2);
        assert_eq!(cfg.algorithms[1].to_string(), "pts(wspt,rr,0.5)");
        assert_eq!(cfg.omegas, vec![0.0, 1.0, 2.0]);
        assert_eq!(cfg.seed, 99);
        cfg.validate().unwrap();
    }

    #[test]
    fn lambdas_expand_to_pts_defaults() {
        let mut cfg = ExperimentConfig::new(ExperimentKind::Sensitivity, EnvKind::Identical);
        cfg.algorithms = vec![PolicySpec::Wdeq];
        cfg.apply("lambdas", "0.1, 0.5").unwrap();
        assert_eq!(cfg.algorithms.len(), 3);
        assert_eq!(cfg.algorithms[1].to_string(), "pts(pwspt,wdeq,0.1)");
        assert_eq!(cfg.algorithms[2].to_string(), "pts(pwspt,wdeq,0.5)");
        assert!(cfg.apply("lambdas", "1.5").is_err());
    }

    #[test]
    fn validate_rejects_bad_values() {
        let mut cfg = ExperimentConfig::new(ExperimentKind::Sensitivity, EnvKind::Single);
        cfg.n = 0;
        assert!(cfg.validate().is_err());
        let mut cfg = ExperimentConfig::new(ExperimentKind::Sensitivity, EnvKind::Single);
        cfg.m = 2;
        assert!(cfg.validate().is_err());
        let mut cfg = ExperimentConfig::new(ExperimentKind::Online, EnvKind::Single);
        cfg.rounds = 0;
        assert!(cfg.validate().is_err());
    }

    #[test]
    fn unknown_keys_rejected() {
        let mut cfg = ExperimentConfig::new(ExperimentKind::Sensitivity, EnvKind::Single);
        assert!(cfg.apply("plumbus", "1").is_err());
        assert!(cfg.apply_file("n: 5\n").is_err());
    }
}
