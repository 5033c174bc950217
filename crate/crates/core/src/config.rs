//! Declarative run configuration (TOML).
//!
//! Rates are ratios to γ, the lattice depth is in units of E_R, and E_R itself
//! is given in units of ħγ. Every field is optional at parse time so that
//! [`RawConfig::diagnostics`] can name all missing or invalid entries at once.

use std::f64::consts::{FRAC_PI_2, FRAC_PI_4};
use std::path::PathBuf;

use serde::{Deserialize, Serialize};

use crate::classifier::DEFAULT_EPSILON;
use crate::correlations::{Channel, FtDenominator, HthetaOptions};
use crate::dressed_lattice::{LatticeSystem, Mode};
use crate::error::{invalid, Result};

pub const DEFAULT_TAU_MAX: f64 = 20.0;
pub const DEFAULT_POINTS: usize = 400;
pub const DEFAULT_THETAS: [f64; 3] = [0.0, FRAC_PI_4, FRAC_PI_2];

/// Parameters a sweep may vary.
pub const SWEEPABLE: [&str; 7] = ["g0", "kappa", "gamma", "v0", "drive", "sigma", "recoil"];

#[derive(Debug, Clone, Default, PartialEq, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct RawSystem {
    pub g0: Option<f64>,
    pub kappa: Option<f64>,
    pub gamma: Option<f64>,
    pub v0: Option<f64>,
    pub recoil: Option<f64>,
    pub drive: Option<f64>,
    pub sigma: Option<f64>,
    pub mode: Option<Mode>,
    pub l_max: Option<usize>,
}

#[derive(Debug, Clone, Default, PartialEq, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct RawGrid {
    pub tau_max: Option<f64>,
    pub points: Option<usize>,
}

#[derive(Debug, Clone, Default, PartialEq, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct RawCorrelations {
    pub channels: Option<Vec<String>>,
    pub thetas: Option<Vec<f64>>,
    pub ft_denominator: Option<FtDenominator>,
    pub strict_real: Option<bool>,
}

#[derive(Debug, Clone, Default, PartialEq, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct RawClassifier {
    pub epsilon: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct Sweep {
    pub parameter: String,
    pub start: f64,
    pub stop: f64,
    /// Number of points, endpoints included.
    pub steps: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Deserialize, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
    Svg,
}

#[derive(Debug, Clone, Default, PartialEq, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct RawOutput {
    pub directory: Option<PathBuf>,
    pub formats: Option<Vec<Format>>,
}

/// A config file as written, before defaults and validation.
#[derive(Debug, Clone, Default, PartialEq, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct RawConfig {
    #[serde(default)]
    pub system: RawSystem,
    #[serde(default)]
    pub grid: RawGrid,
    #[serde(default)]
    pub correlations: RawCorrelations,
    #[serde(default)]
    pub classifier: RawClassifier,
    pub sweep: Option<Sweep>,
    #[serde(default)]
    pub output: RawOutput,
}

/// A validated configuration with defaults filled in.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunConfig {
    pub system: LatticeSystem,
    pub tau_max: f64,
    pub points: usize,
    pub channels: Vec<Channel>,
    pub thetas: Vec<f64>,
    pub htheta: HthetaOptions,
    pub epsilon: f64,
    pub sweep: Option<Sweep>,
    pub directory: PathBuf,
    pub formats: Vec<Format>,
}

impl RawConfig {
    pub fn parse(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| invalid(format!("config: {e}")))
    }

    /// The system with defaults filled in. Missing required fields take
    /// canonical values here; [`Self::diagnostics`] reports them separately.
    fn system(&self) -> LatticeSystem {
        let s = &self.system;
        let d = LatticeSystem::canonical();
        LatticeSystem {
            g0: s.g0.unwrap_or(d.g0),
            kappa: s.kappa.unwrap_or(d.kappa),
            gamma: s.gamma.unwrap_or(d.gamma),
            v0: s.v0.unwrap_or(d.v0),
            recoil: s.recoil.unwrap_or(d.recoil),
            drive: s.drive.unwrap_or(d.drive),
            sigma: s.sigma.unwrap_or(d.sigma),
            mode: s.mode.unwrap_or(d.mode),
            l_max: s.l_max.unwrap_or(if s.mode == Some(Mode::Stationary) { 0 } else { d.l_max }),
        }
    }

    /// Every problem with the config, one message each; empty when valid.
    pub fn diagnostics(&self) -> Vec<String> {
        let mut out = Vec::new();
        let s = &self.system;
        for (name, missing) in [
            ("system.g0", s.g0.is_none()),
            ("system.kappa", s.kappa.is_none()),
            ("system.v0", s.v0.is_none()),
            ("system.mode", s.mode.is_none()),
            ("output.directory", self.output.directory.is_none()),
        ] {
            if missing {
                out.push(format!("missing required field {name}"));
            }
        }
        let sys = self.system();
        out.extend(sys.diagnostics().into_iter().map(|m| format!("system: {m}")));

        let tau_max = self.grid.tau_max.unwrap_or(DEFAULT_TAU_MAX);
        if !(tau_max.is_finite() && tau_max > 0.0) {
            out.push(format!("grid.tau_max must be positive and finite, got {tau_max}"));
        }
        let points = self.grid.points.unwrap_or(DEFAULT_POINTS);
        if points < 2 {
            out.push(format!("grid.points must be at least 2, got {points}"));
        }
        for c in self.correlations.channels.iter().flatten() {
            if let Err(e) = c.parse::<Channel>() {
                out.push(format!("correlations.channels: {e}"));
            }
        }
        if self.correlations.channels.as_ref().is_some_and(|c| c.is_empty()) {
            out.push("correlations.channels must not be empty".into());
        }
        for t in self.correlations.thetas.iter().flatten() {
            if !t.is_finite() {
                out.push(format!("correlations.thetas must be finite, got {t}"));
            }
        }
        if let Some(e) = self.classifier.epsilon {
            if !(e.is_finite() && e >= 0.0) {
                out.push(format!("classifier.epsilon must be non-negative and finite, got {e}"));
            }
        }
        if let Some(sw) = &self.sweep {
            if !SWEEPABLE.contains(&sw.parameter.as_str()) {
                out.push(format!("sweep.parameter {:?} is not one of {}", sw.parameter, SWEEPABLE.join(", ")));
            }
            if !(sw.start.is_finite() && sw.stop.is_finite()) {
                out.push(format!("sweep bounds must be finite, got {} .. {}", sw.start, sw.stop));
            }
            if sw.steps < 1 {
                out.push("sweep.steps must be at least 1".into());
            }
            if out.is_empty() {
                for (k, v) in sweep_values(sw).into_iter().enumerate() {
                    if let Some(msg) = with_parameter(&sys, &sw.parameter, v).diagnostics().into_iter().next() {
                        out.push(format!("sweep point {k} ({} = {v}): {msg}", sw.parameter));
                    }
                }
            }
        }
        if self.output.formats.as_ref().is_some_and(|f| f.is_empty()) {
            out.push("output.formats must not be empty".into());
        }
        out
    }

    pub fn validate(self) -> Result<RunConfig> {
        let diag = self.diagnostics();
        if !diag.is_empty() {
            return Err(invalid(diag.join("; ")));
        }
        let channels = match &self.correlations.channels {
            Some(c) => {
                let mut v = Vec::new();
                for ch in c {
                    let ch: Channel = ch.parse()?;
                    if !v.contains(&ch) {
                        v.push(ch);
                    }
                }
                v
            }
            None => Channel::ALL.to_vec(),
        };
        Ok(RunConfig {
            system: self.system(),
            tau_max: self.grid.tau_max.unwrap_or(DEFAULT_TAU_MAX),
            points: self.grid.points.unwrap_or(DEFAULT_POINTS),
            channels,
            thetas: self.correlations.thetas.clone().unwrap_or_else(|| DEFAULT_THETAS.to_vec()),
            htheta: HthetaOptions {
                ft_denominator: self.correlations.ft_denominator.unwrap_or_default(),
                strict_real: self.correlations.strict_real.unwrap_or(false),
            },
            epsilon: self.classifier.epsilon.unwrap_or(DEFAULT_EPSILON),
            sweep: self.sweep.clone(),
            directory: self.output.directory.clone().unwrap_or_default(),
            formats: self.output.formats.clone().unwrap_or_else(|| vec![Format::Csv, Format::Json]),
        })
    }
}

/// `steps` values from `start` to `stop`, both included.
pub fn sweep_values(sw: &Sweep) -> Vec<f64> {
    match sw.steps {
        0 => Vec::new(),
        1 => vec![sw.start],
        n => (0..n).map(|k| sw.start + (sw.stop - sw.start) * k as f64 / (n - 1) as f64).collect(),
    }
}

/// A value with at most four decimals and no trailing zeros.
fn short(v: f64) -> String {
    let s = format!("{v:.4}");
    let s = s.trim_end_matches('0').trim_end_matches('.');
    if s == "-0" { "0".into() } else { s.into() }
}

/// `sys` with one named parameter replaced.
pub fn with_parameter(sys: &LatticeSystem, name: &str, value: f64) -> LatticeSystem {
    let mut s = sys.clone();
    match name {
        "g0" => s.g0 = value,
        "kappa" => s.kappa = value,
        "gamma" => s.gamma = value,
        "v0" => s.v0 = value,
        "drive" => s.drive = value,
        "sigma" => s.sigma = value,
        "recoil" => s.recoil = value,
        _ => {}
    }
    s
}

impl RunConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        RawConfig::parse(text)?.validate()
    }

    /// `(label, system)` for each point, a single unlabelled point without a sweep.
    pub fn points(&self) -> Vec<(String, LatticeSystem)> {
        match &self.sweep {
            None => vec![(String::new(), self.system.clone())],
            Some(sw) => sweep_values(sw)
                .into_iter()
                .enumerate()
                .map(|(k, v)| (format!("{k:02}_{}={}", sw.parameter, short(v)), with_parameter(&self.system, &sw.parameter, v)))
                .collect(),
        }
    }

    pub fn wants(&self, f: Format) -> bool {
        self.formats.contains(&f)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const CANONICAL: &str = r#"
        [system]
        g0 = 1.0
        kappa = 1.6
        v0 = 20.0
        mode = "mathieu"
        [output]
        directory = "out"
    "#;

    #[test]
    fn empty_file_names_every_required_field() {
        let d = RawConfig::parse("").unwrap().diagnostics();
        for f in ["system.g0", "system.kappa", "system.v0", "system.mode", "output.directory"] {
            assert!(d.iter().any(|m| m.contains(f)), "{f} missing from {d:?}");
        }
        assert_eq!(d.len(), 5, "{d:?}");
    }

    #[test]
    fn negative_kappa_is_one_diagnostic() {
        let d = RawConfig::parse(&CANONICAL.replace("kappa = 1.6", "kappa = -1.6")).unwrap().diagnostics();
        assert_eq!(d.len(), 1, "{d:?}");
        assert!(d[0].contains("kappa"));
    }

    #[test]
    fn canonical_is_clean_and_defaults_apply() {
        let raw = RawConfig::parse(CANONICAL).unwrap();
        assert!(raw.diagnostics().is_empty());
        let c = raw.validate().unwrap();
        assert_eq!((c.points, c.tau_max), (DEFAULT_POINTS, DEFAULT_TAU_MAX));
        assert_eq!(c.thetas, DEFAULT_THETAS.to_vec());
        assert_eq!(c.channels, Channel::ALL.to_vec());
        assert_eq!(c.system, LatticeSystem::canonical());
    }

    #[test]
    fn unknown_keys_and_channels_are_rejected() {
        assert!(RawConfig::parse("[system]\nkapa = 1.0").is_err());
        let d = RawConfig::parse(&format!("{CANONICAL}\n[correlations]\nchannels = [\"TX\"]")).unwrap().diagnostics();
        assert_eq!(d.len(), 1);
    }

    #[test]
    fn sweep_points_include_endpoints() {
        let c = RunConfig::from_toml(&format!(
            "{CANONICAL}\n[sweep]\nparameter = \"sigma\"\nstart = 0.2\nstop = 3.0\nsteps = 10"
        ))
        .unwrap();
        let p = c.points();
        assert_eq!(p.len(), 10);
        assert_eq!(p[0].1.sigma, 0.2);
        assert_eq!(p[9].1.sigma, 3.0);
        assert!(p[3].0.starts_with("03_sigma="));
    }

    #[test]
    fn sweep_into_invalid_region_is_reported() {
        let d = RawConfig::parse(&format!("{CANONICAL}\n[sweep]\nparameter = \"kappa\"\nstart = 1.0\nstop = -1.0\nsteps = 3"))
            .unwrap()
            .diagnostics();
        // kappa = 1, 0, -1: the last two points are invalid.
        assert_eq!(d.len(), 2, "{d:?}");
        assert!(d[0].starts_with("sweep point 1 (kappa = 0)"));
        assert!(d[1].starts_with("sweep point 2 (kappa = -1)"));
    }
}
