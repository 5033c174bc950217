//! Intensity (g²) and intensity–field (hθ) correlations after a photodetection.
//!
//! A channel is named by two letters: the first picks the detection that
//! conditions the state (T = transmitted photon, F = fluorescent photon), the
//! second the quantity measured afterwards (T = cavity field, F = atomic dipole).

use std::fmt;
use std::io::{Read, Write};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::dressed_lattice::LatticeSystem;
use crate::dynamics::{
    build_generator, collapse, evolve, steady_state, AmplitudeState, BareSector, CollapseKind, CollapsedState, Frame,
    Generator, Spectrum, C64,
};
use crate::error::{invalid, Error, Result};

/// Imaginary parts of hθ below this are treated as rounding.
pub const REAL_TOLERANCE: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Channel {
    TT,
    FF,
    TF,
    FT,
}

impl Channel {
    pub const ALL: [Channel; 4] = [Channel::TT, Channel::FF, Channel::TF, Channel::FT];

    pub fn trigger(self) -> CollapseKind {
        match self {
            Channel::TT | Channel::TF => CollapseKind::T,
            Channel::FF | Channel::FT => CollapseKind::F,
        }
    }

    /// The bare sector carrying the measured quantity.
    pub fn measured(self) -> BareSector {
        match self {
            Channel::TT | Channel::FT => BareSector::G1,
            Channel::FF | Channel::TF => BareSector::E0,
        }
    }

    pub fn is_auto(self) -> bool {
        matches!(self, Channel::TT | Channel::FF)
    }
}

impl fmt::Display for Channel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self:?}")
    }
}

impl FromStr for Channel {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_uppercase().as_str() {
            "TT" => Ok(Channel::TT),
            "FF" => Ok(Channel::FF),
            "TF" => Ok(Channel::TF),
            "FT" => Ok(Channel::FT),
            _ => Err(invalid(format!("unknown channel {s:?}; expected TT, FF, TF or FT"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TraceKind {
    G2,
    Htheta,
}

/// Which steady-state quadrature normalises the FT intensity–field correlation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FtDenominator {
    /// `⟨σ_θ⟩_ss`.
    Atomic,
    /// `⟨a_θ⟩_ss`, the quantity actually measured; the trace then relaxes to 1.
    #[default]
    Cavity,
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct HthetaOptions {
    pub ft_denominator: FtDenominator,
    /// Fail instead of recording the leakage when hθ has an imaginary part.
    pub strict_real: bool,
}

/// One sampled correlation function.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorrelationTrace {
    pub kind: TraceKind,
    pub channel: Channel,
    pub theta: Option<f64>,
    pub tau: Vec<f64>,
    pub values: Vec<f64>,
    /// Largest imaginary part dropped from an hθ sample.
    pub max_imag: f64,
    pub system: Option<LatticeSystem>,
}

/// Everything stored next to a trace CSV.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceMetadata {
    pub kind: TraceKind,
    pub channel: Channel,
    pub theta: Option<f64>,
    pub samples: usize,
    pub max_imag: f64,
    pub system: Option<LatticeSystem>,
}

impl CorrelationTrace {
    pub fn value_at_zero(&self) -> Option<f64> {
        self.values.first().copied()
    }

    pub fn label(&self) -> String {
        match (self.kind, self.theta) {
            (TraceKind::G2, _) => format!("g2_{}", self.channel),
            (TraceKind::Htheta, Some(t)) => format!("h_{}_theta{:.4}", self.channel, t),
            (TraceKind::Htheta, None) => format!("h_{}", self.channel),
        }
    }

    pub fn metadata(&self) -> TraceMetadata {
        TraceMetadata {
            kind: self.kind,
            channel: self.channel,
            theta: self.theta,
            samples: self.values.len(),
            max_imag: self.max_imag,
            system: self.system.clone(),
        }
    }

    /// `tau,value` rows; floats use the shortest representation that round-trips.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        let io = |e: csv::Error| invalid(format!("writing trace CSV: {e}"));
        w.write_record(["tau", "value"]).map_err(io)?;
        for (t, v) in self.tau.iter().zip(&self.values) {
            w.write_record([t.to_string(), v.to_string()]).map_err(io)?;
        }
        w.flush().map_err(|e| invalid(format!("writing trace CSV: {e}")))
    }

    /// Reads a `tau,value` CSV. Kind and channel come from `meta` when given.
    pub fn read_csv<R: Read>(input: R, meta: Option<TraceMetadata>) -> Result<Self> {
        let mut r = csv::Reader::from_reader(input);
        let headers = r.headers().map_err(|e| invalid(format!("reading trace CSV: {e}")))?.clone();
        if headers.len() != 2 || &headers[0] != "tau" || &headers[1] != "value" {
            return Err(invalid(format!("trace CSV must have header tau,value, got {headers:?}")));
        }
        let (mut tau, mut values) = (Vec::new(), Vec::new());
        for (i, rec) in r.records().enumerate() {
            let rec = rec.map_err(|e| invalid(format!("reading trace CSV: {e}")))?;
            let num = |k: usize| -> Result<f64> {
                rec.get(k)
                    .and_then(|s| s.trim().parse::<f64>().ok())
                    .ok_or_else(|| invalid(format!("row {}: column {k} is not a number", i + 2)))
            };
            tau.push(num(0)?);
            values.push(num(1)?);
        }
        let meta = meta.unwrap_or(TraceMetadata {
            kind: TraceKind::G2,
            channel: Channel::TT,
            theta: None,
            samples: values.len(),
            max_imag: 0.0,
            system: None,
        });
        Ok(Self { kind: meta.kind, channel: meta.channel, theta: meta.theta, tau, values, max_imag: meta.max_imag, system: meta.system })
    }
}

/// Steady state plus both conditioned evolutions, shared by every channel.
#[derive(Debug, Clone)]
pub struct CorrelationEngine {
    pub spectrum: Spectrum,
    pub generator: Generator,
    pub steady: AmplitudeState,
}

/// Conditioned amplitudes along a τ grid.
#[derive(Debug, Clone)]
pub struct ConditionedPath {
    pub collapsed: CollapsedState,
    pub states: Vec<AmplitudeState>,
}

fn quadrature(state: &AmplitudeState, sector: BareSector) -> C64 {
    state.ground.iter().zip(state.bare(sector)).map(|(g, c)| g.conj() * c).sum()
}

impl CorrelationEngine {
    pub fn new(sys: &LatticeSystem) -> Result<Self> {
        Self::with_frame(Spectrum::compute(sys)?, Frame::Dressed)
    }

    pub fn with_frame(spectrum: Spectrum, frame: Frame) -> Result<Self> {
        let generator = build_generator(&spectrum, frame);
        let steady = steady_state(&generator)?;
        Ok(Self { spectrum, generator, steady })
    }

    pub fn system(&self) -> &LatticeSystem {
        &self.spectrum.sys
    }

    pub fn conditioned(&self, kind: CollapseKind, tau_grid: &[f64]) -> Result<ConditionedPath> {
        let collapsed = collapse(&self.generator, &self.steady, kind)?;
        let states = evolve(&self.generator, &self.steady, &collapsed, tau_grid)?;
        Ok(ConditionedPath { collapsed, states })
    }

    pub fn g2(&self, channel: Channel, tau_grid: &[f64]) -> Result<CorrelationTrace> {
        let path = self.conditioned(channel.trigger(), tau_grid)?;
        self.g2_on(channel, &path)
    }

    /// g² from an already evolved path, which must match the channel's trigger.
    pub fn g2_on(&self, channel: Channel, path: &ConditionedPath) -> Result<CorrelationTrace> {
        if path.collapsed.kind != channel.trigger() {
            return Err(invalid(format!("{channel} needs a {:?}-conditioned path", channel.trigger())));
        }
        let sector = channel.measured();
        let denom = self.steady.population(sector);
        if !(denom > 0.0) {
            return Err(Error::DegenerateDenominator { what: format!("g2 {channel}"), value: denom });
        }
        Ok(CorrelationTrace {
            kind: TraceKind::G2,
            channel,
            theta: None,
            tau: path.states.iter().map(|s| s.tau).collect(),
            values: path.states.iter().map(|s| s.population(sector) / denom).collect(),
            max_imag: 0.0,
            system: Some(self.system().clone()),
        })
    }

    pub fn h_theta(&self, channel: Channel, theta: f64, tau_grid: &[f64], opts: HthetaOptions) -> Result<CorrelationTrace> {
        let path = self.conditioned(channel.trigger(), tau_grid)?;
        self.h_theta_on(channel, theta, &path, opts)
    }

    /// `hθ(τ) = Re(e^{−iθ} S(τ) / S_ss)` with `S = Σ_l C*_{0,g,l} C_{measured,l}`.
    pub fn h_theta_on(&self, channel: Channel, theta: f64, path: &ConditionedPath, opts: HthetaOptions) -> Result<CorrelationTrace> {
        if path.collapsed.kind != channel.trigger() {
            return Err(invalid(format!("{channel} needs a {:?}-conditioned path", channel.trigger())));
        }
        let sector = channel.measured();
        let denom_sector = match (channel, opts.ft_denominator) {
            (Channel::FT, FtDenominator::Atomic) => BareSector::E0,
            _ => sector,
        };
        let denom = quadrature(&self.steady, denom_sector);
        let scale = self.steady.excited.rows(0, 2 * self.steady.channels).norm();
        if !(denom.norm() > 1e-12 * scale) {
            return Err(Error::DegenerateDenominator { what: format!("h_theta {channel}"), value: denom.norm() });
        }
        let phase = C64::from_polar(1.0, -theta);
        let mut max_imag: f64 = 0.0;
        let mut values = Vec::with_capacity(path.states.len());
        for s in &path.states {
            let r = phase * quadrature(s, sector) / denom;
            max_imag = max_imag.max(r.im.abs());
            values.push(r.re);
        }
        if opts.strict_real && max_imag > REAL_TOLERANCE {
            return Err(Error::ComplexQuadrature { imag: max_imag });
        }
        Ok(CorrelationTrace {
            kind: TraceKind::Htheta,
            channel,
            theta: Some(theta),
            tau: path.states.iter().map(|s| s.tau).collect(),
            values,
            max_imag,
            system: Some(self.system().clone()),
        })
    }
}

/// One-shot g² for a system.
pub fn g2(channel: Channel, sys: &LatticeSystem, tau_grid: &[f64]) -> Result<CorrelationTrace> {
    CorrelationEngine::new(sys)?.g2(channel, tau_grid)
}

/// One-shot hθ for a system with default options.
pub fn h_theta(channel: Channel, theta: f64, sys: &LatticeSystem, tau_grid: &[f64]) -> Result<CorrelationTrace> {
    CorrelationEngine::new(sys)?.h_theta(channel, theta, tau_grid, HthetaOptions::default())
}

/// `n` equally spaced samples on `[0, tau_max]`.
pub fn uniform_grid(tau_max: f64, n: usize) -> Vec<f64> {
    if n < 2 {
        return vec![0.0; n];
    }
    (0..n).map(|k| tau_max * k as f64 / (n - 1) as f64).collect()
}
