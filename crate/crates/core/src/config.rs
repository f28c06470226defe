//! Solver and pipeline configuration with the `key = value` file format.

use std::fmt::Write as _;
use std::str::FromStr;

use crate::error::{Error, Result};

/// Hyper-parameters for training and clustering.
///
/// The ALM defaults (`mu0`, `mu_max`, `eta`, `eps`) are the standard inexact
/// ALM settings for this model.
#[derive(Debug, Clone, PartialEq)]
pub struct SolverConfig {
    pub layers: usize,
    pub alpha: f64,
    pub lambda1: f64,
    pub rho: f64,
    pub mu0: f64,
    pub mu_max: f64,
    pub eta: f64,
    pub eps: f64,
    pub max_iter: usize,
    pub seed: u64,
    pub clusters: usize,
    pub kmeans_restarts: usize,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            layers: 3,
            alpha: 1.0,
            lambda1: 0.1,
            rho: 1.0,
            mu0: 1e-6,
            mu_max: 1e6,
            eta: 1.5,
            eps: 1e-7,
            max_iter: 500,
            seed: 0,
            clusters: 10,
            kmeans_restarts: 20,
        }
    }
}

pub const CONFIG_KEYS: [&str; 12] = [
    "layers",
    "alpha",
    "lambda1",
    "rho",
    "mu0",
    "mu_max",
    "eta",
    "eps",
    "max_iter",
    "seed",
    "clusters",
    "kmeans_restarts",
];

fn parse_value<T: FromStr>(key: &str, value: &str) -> Result<T> {
    value
        .parse()
        .map_err(|_| Error::InvalidConfig(format!("cannot parse {key} = {value:?}")))
}

impl SolverConfig {
    pub fn validate(&self) -> Result<()> {
        let fail = |msg: &str| Err(Error::InvalidConfig(msg.to_string()));
        let finite = [
            self.alpha,
            self.lambda1,
            self.rho,
            self.mu0,
            self.mu_max,
            self.eta,
            self.eps,
        ];
        if finite.iter().any(|v| !v.is_finite()) {
            return fail("real-valued parameters must be finite");
        }
        if self.layers == 0 {
            return fail("layers must be positive");
        }
        if self.alpha < 0.0 {
            return fail("alpha must be non-negative");
        }
        if self.lambda1 <= 0.0 {
            return fail("lambda1 must be positive");
        }
        if self.rho < 1.0 {
            return fail("rho must be at least 1");
        }
        if self.mu0 <= 0.0 || self.mu_max <= 0.0 {
            return fail("mu0 and mu_max must be positive");
        }
        if self.eta <= 1.0 {
            return fail("eta must exceed 1");
        }
        if self.eps <= 0.0 {
            return fail("eps must be positive");
        }
        if self.max_iter == 0 {
            return fail("max_iter must be positive");
        }
        if self.clusters == 0 {
            return fail("clusters must be positive");
        }
        if self.kmeans_restarts == 0 {
            return fail("kmeans_restarts must be positive");
        }
        Ok(())
    }

    /// Sets one field by its name. Does not validate.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        let value = value.trim();
        match key {
            "layers" => self.layers = parse_value(key, value)?,
            "alpha" => self.alpha = parse_value(key, value)?,
            "lambda1" => self.lambda1 = parse_value(key, value)?,
            "rho" => self.rho = parse_value(key, value)?,
            "mu0" => self.mu0 = parse_value(key, value)?,
            "mu_max" => self.mu_max = parse_value(key, value)?,
            "eta" => self.eta = parse_value(key, value)?,
            "eps" => self.eps = parse_value(key, value)?,
            "max_iter" => self.max_iter = parse_value(key, value)?,
            "seed" => self.seed = parse_value(key, value)?,
            "clusters" => self.clusters = parse_value(key, value)?,
            "kmeans_restarts" => self.kmeans_restarts = parse_value(key, value)?,
            other => return Err(Error::InvalidConfig(format!("unknown key {other:?}"))),
        }
        Ok(())
    }

    /// Applies `key = value` lines on top of `self`. Blank lines and `#` comments are skipped.
    pub fn apply_text(&mut self, text: &str) -> Result<()> {
        for (no, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| Error::InvalidConfig(format!("line {}: expected key = value", no + 1)))?;
            self.set(key.trim(), value)?;
        }
        Ok(())
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let mut cfg = SolverConfig::default();
        cfg.apply_text(text)?;
        cfg.validate()?;
        Ok(cfg)
    }

    /// Renders every field in file order. Reals use the shortest round-trip form.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let reals = [
            ("alpha", self.alpha),
            ("lambda1", self.lambda1),
            ("rho", self.rho),
            ("mu0", self.mu0),
            ("mu_max", self.mu_max),
            ("eta", self.eta),
            ("eps", self.eps),
        ];
        let _ = writeln!(out, "layers = {}", self.layers);
        for (k, v) in reals {
            let _ = writeln!(out, "{k} = {}", crate::io::format_real(v));
        }
        let _ = writeln!(out, "max_iter = {}", self.max_iter);
        let _ = writeln!(out, "seed = {}", self.seed);
        let _ = writeln!(out, "clusters = {}", self.clusters);
        let _ = writeln!(out, "kmeans_restarts = {}", self.kmeans_restarts);
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_are_alm_settings() {
        let c = SolverConfig::default();
        assert_eq!((c.mu0, c.mu_max, c.eta, c.eps), (1e-6, 1e6, 1.5, 1e-7));
        assert_eq!((c.max_iter, c.kmeans_restarts, c.layers), (500, 20, 3));
        c.validate().unwrap();
    }

    #[test]
    fn text_roundtrip() {
        let c = SolverConfig {
            alpha: 0.3,
            lambda1: 1e-8,
            seed: u64::MAX,
            ..SolverConfig::default()
        };
        let back = SolverConfig::from_text(&c.to_text()).unwrap();
        assert_eq!(back, c);
        for key in CONFIG_KEYS {
            assert!(c.to_text().contains(&format!("{key} = ")));
        }
    }

    #[test]
    fn rejects_bad_values() {
        assert!(SolverConfig::from_text("rho = 0.5").is_err());
        assert!(SolverConfig::from_text("eta = 1").is_err());
        assert!(SolverConfig::from_text("lambda1 = 0").is_err());
        assert!(SolverConfig::from_text("bogus = 1").is_err());
        assert!(SolverConfig::from_text("layers 3").is_err());
        assert!(SolverConfig::from_text("layers = x").is_err());
    }

    #[test]
    fn comments_and_partial_files() {
        let c = SolverConfig::from_text("# tuned\nlayers = 5 # deeper\n\nalpha=0\n").unwrap();
        assert_eq!(c.layers, 5);
        assert_eq!(c.alpha, 0.0);
        assert_eq!(c.eps, 1e-7);
    }
}
