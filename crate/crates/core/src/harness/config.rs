use std::collections::BTreeMap;
use std::path::Path;

use crate::debf::DebfOptions;
use crate::error::{Error, Result};
use crate::psb::PsbParams;
use crate::scalar::Scalar;

/// How the expansion parameter handed to the driver is chosen.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum EpsilonMode {
    /// The encoder's expansion is known to be at most this value.
    Known(f64),
    /// Expansion unknown: run with `ε = 1/6` and the merge pass.
    Practical,
}

impl EpsilonMode {
    pub fn epsilon(&self) -> f64 {
        match *self {
            EpsilonMode::Known(e) => e,
            EpsilonMode::Practical => 1.0 / 6.0,
        }
    }

    pub fn merge(&self) -> bool {
        matches!(self, EpsilonMode::Practical)
    }

    fn parse(s: &str) -> Option<Self> {
        if s.eq_ignore_ascii_case("practical") {
            return Some(EpsilonMode::Practical);
        }
        s.parse().ok().map(EpsilonMode::Known)
    }
}

/// One cell of an experiment: the shape of a PSB instance plus how many
/// seeded trials to run and how to run them.
#[derive(Debug, Clone, PartialEq)]
pub struct TrialConfig {
    pub d: usize,
    pub k: usize,
    pub m: usize,
    pub n: usize,
    /// Number of measurement columns `N`.
    pub samples: usize,
    /// Master seed.
    pub seed: u64,
    pub epsilon_mode: EpsilonMode,
    pub trials: usize,
    pub tol: f64,
    pub max_iterations: Option<usize>,
}

impl TrialConfig {
    pub fn validate(&self) -> Result<()> {
        if self.trials == 0 {
            return Err(Error::InvalidParameter("trials must be at least 1".into()));
        }
        PsbParams::new(self.d, self.k, self.m, self.n, self.samples, self.seed).validate()?;
        self.options::<f64>().validate()
    }

    pub fn psb_params(&self, seed: u64) -> PsbParams {
        PsbParams::new(self.d, self.k, self.m, self.n, self.samples, seed)
    }

    pub fn options<T: Scalar>(&self) -> DebfOptions<T> {
        let mut opts = DebfOptions::new(self.d)
            .with_epsilon(self.epsilon_mode.epsilon())
            .with_tol(T::from_f64_lossy(self.tol));
        opts.merge = self.epsilon_mode.merge();
        opts.max_iterations = self.max_iterations;
        opts
    }
}

/// A sweep over `k` and `N` with everything else fixed.
#[derive(Debug, Clone, PartialEq)]
pub struct GridConfig {
    pub base: TrialConfig,
    pub ks: Vec<usize>,
    pub sample_counts: Vec<usize>,
    /// Record wall-clock times; when off the timing column is written as 0 so
    /// the CSV depends only on the configuration.
    pub timing: bool,
}

impl GridConfig {
    /// Cells in output order: `N` outer, `k` inner.
    pub fn cells(&self) -> Vec<TrialConfig> {
        let mut out = Vec::with_capacity(self.ks.len() * self.sample_counts.len());
        for &samples in &self.sample_counts {
            for &k in &self.ks {
                out.push(TrialConfig {
                    k,
                    samples,
                    ..self.base.clone()
                });
            }
        }
        out
    }

    pub fn validate(&self) -> Result<()> {
        if self.ks.is_empty() || self.sample_counts.is_empty() {
            return Err(Error::InvalidParameter("grid needs at least one k and one N".into()));
        }
        self.cells().iter().try_for_each(TrialConfig::validate)
    }

    /// Builds a grid from `key = value` settings.
    ///
    /// Keys: `n`, `m`, `d`, `k` or `k_pct`, `N` (alias `samples`), `seed`,
    /// `trials`, `epsilon` (a number or `practical`), `tol`, `timing`,
    /// `max_iterations`. Lists are comma separated and may contain inclusive
    /// ranges `a..b` or `a..b:step`. Unset keys take the defaults of the
    /// `n = 1000, m = 800, d = 10` sweep over `k/n` from 1% to 10%.
    pub fn from_settings(settings: &Settings) -> Result<Self> {
        for key in settings.keys() {
            if !KNOWN_KEYS.contains(&key) {
                return Err(Error::InvalidParameter(format!("unknown configuration key `{key}`")));
            }
        }
        let n = settings.parsed("n")?.unwrap_or(1000);
        let ks = match (settings.get("k"), settings.get("k_pct")) {
            (Some(_), Some(_)) => {
                return Err(Error::InvalidParameter("set either `k` or `k_pct`, not both".into()));
            }
            (Some(v), None) => parse_list(v).map_err(|m| settings.error("k", m))?,
            (None, Some(v)) => parse_list(v)
                .map_err(|m| settings.error("k_pct", m))?
                .into_iter()
                .map(|p| (p * n).div_ceil(100))
                .collect(),
            (None, None) => (1..=10).map(|p| p * n / 100).collect(),
        };
        let samples_key = if settings.get("N").is_some() { "N" } else { "samples" };
        let sample_counts = match settings.get(samples_key) {
            Some(v) => parse_list(v).map_err(|m| settings.error(samples_key, m))?,
            None => vec![100, 200, 300],
        };
        let epsilon_mode = match settings.get("epsilon") {
            Some(v) => EpsilonMode::parse(v).ok_or_else(|| settings.error("epsilon", "expected a number or `practical`"))?,
            None => EpsilonMode::Practical,
        };
        let base = TrialConfig {
            d: settings.parsed("d")?.unwrap_or(10),
            k: 0,
            m: settings.parsed("m")?.unwrap_or(800),
            n,
            samples: 0,
            seed: settings.parsed("seed")?.unwrap_or(0),
            epsilon_mode,
            trials: settings.parsed("trials")?.unwrap_or(10),
            tol: settings.parsed("tol")?.unwrap_or(1e-9),
            max_iterations: settings.parsed("max_iterations")?,
        };
        let grid = GridConfig {
            base,
            ks,
            sample_counts,
            timing: settings.parsed("timing")?.unwrap_or(false),
        };
        grid.validate()?;
        Ok(grid)
    }
}

const KNOWN_KEYS: &[&str] = &[
    "n", "m", "d", "k", "k_pct", "N", "samples", "seed", "trials", "epsilon", "tol", "timing", "max_iterations",
];

/// Plain-text `key = value` settings, one per line, with `#` comments.
/// Later assignments (including [`Settings::set`]) override earlier ones.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Settings {
    values: BTreeMap<String, (usize, String)>,
}

impl Settings {
    pub fn parse(text: &str) -> Result<Self> {
        let mut out = Settings::default();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| Error::Parse {
                line: i + 1,
                msg: format!("expected `key = value`, got `{line}`"),
            })?;
            let key = key.trim();
            if key.is_empty() {
                return Err(Error::Parse {
                    line: i + 1,
                    msg: "empty key".into(),
                });
            }
            out.values.insert(key.to_string(), (i + 1, value.trim().to_string()));
        }
        Ok(out)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Self::parse(&std::fs::read_to_string(path)?)
    }

    pub fn set(&mut self, key: &str, value: impl Into<String>) {
        self.values.insert(key.to_string(), (0, value.into()));
    }

    pub fn remove(&mut self, key: &str) {
        self.values.remove(key);
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.values.get(key).map(|(_, v)| v.as_str())
    }

    pub fn keys(&self) -> impl Iterator<Item = &str> {
        self.values.keys().map(String::as_str)
    }

    pub fn parsed<V: std::str::FromStr>(&self, key: &str) -> Result<Option<V>> {
        match self.get(key) {
            None => Ok(None),
            Some(v) => v
                .parse()
                .map(Some)
                .map_err(|_| self.error(key, format!("cannot parse `{v}`"))),
        }
    }

    fn error(&self, key: &str, msg: impl std::fmt::Display) -> Error {
        match self.values.get(key) {
            Some(&(line, _)) if line > 0 => Error::Parse {
                line,
                msg: format!("{key}: {msg}"),
            },
            _ => Error::InvalidParameter(format!("{key}: {msg}")),
        }
    }
}

fn parse_list(s: &str) -> std::result::Result<Vec<usize>, String> {
    let mut out = Vec::new();
    for item in s.split(',').map(str::trim).filter(|t| !t.is_empty()) {
        if let Some((lo, rest)) = item.split_once("..") {
            let (hi, step) = match rest.split_once(':') {
                Some((hi, step)) => (hi, step),
                None => (rest, "1"),
            };
            let num = |t: &str| t.trim().parse::<usize>().map_err(|_| format!("bad range `{item}`"));
            let (lo, hi, step) = (num(lo)?, num(hi)?, num(step)?);
            if step == 0 || lo > hi {
                return Err(format!("bad range `{item}`"));
            }
            out.extend((lo..=hi).step_by(step));
        } else {
            out.push(item.parse().map_err(|_| format!("bad list entry `{item}`"))?);
        }
    }
    if out.is_empty() {
        return Err("empty list".into());
    }
    Ok(out)
}
