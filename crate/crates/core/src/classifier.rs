//! Flags every classical inequality a set of correlation traces violates.
//!
//! | flag | trace | violated when |
//! |------|-------|---------------|
//! | B / A | g² TT, FF | the first step away from τ = 0 goes down / up |
//! | SUB / SUP | g² TT, FF | g²(0) < 1 / g²(0) > 1 |
//! | OS | g² TT, FF | \|g²(τ) − 1\| > \|g²(0) − 1\| somewhere |
//! | US | g² TT, FF | the trace swings to the other side of 1 without exceeding \|g²(0) − 1\| |
//! | CV1 | g² TF, FT | g²_×(0) > √(g²_TT(0) g²_FF(0)) |
//! | CV2 | g² TF | g²_TF(0) − 1 > √max(g²_TT(0) − 1, 0) |
//! | S1 | hθ | hθ(0) outside [1, 2] |
//! | S2 | hθ | \|hθ(τ) − 1\| > min(\|hθ(0) − 1\|, 1) somewhere |
//!
//! Every comparison needs a margin larger than ε, so raising ε can only remove
//! flags.

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::correlations::{Channel, CorrelationTrace, TraceKind};
use crate::error::{invalid, Result};

pub const DEFAULT_EPSILON: f64 = 1e-9;
/// Largest first grid step for which the initial slope is trusted.
pub const INITIAL_STEP_LIMIT: f64 = 0.1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum FlagKind {
    B,
    A,
    SUB,
    SUP,
    OS,
    US,
    CV1,
    CV2,
    S1,
    S2,
}

impl FlagKind {
    pub const ALL: [FlagKind; 10] = [
        FlagKind::B,
        FlagKind::A,
        FlagKind::SUB,
        FlagKind::SUP,
        FlagKind::OS,
        FlagKind::US,
        FlagKind::CV1,
        FlagKind::CV2,
        FlagKind::S1,
        FlagKind::S2,
    ];

    pub fn description(self) -> &'static str {
        match self {
            FlagKind::B => "bunching",
            FlagKind::A => "anti-bunching",
            FlagKind::SUB => "sub-Poissonian",
            FlagKind::SUP => "super-Poissonian",
            FlagKind::OS => "overshoot",
            FlagKind::US => "undershoot",
            FlagKind::CV1 => "cross-violation 1",
            FlagKind::CV2 => "cross-violation 2",
            FlagKind::S1 => "squeezing, initial value",
            FlagKind::S2 => "squeezing, excursion",
        }
    }
}

impl fmt::Display for FlagKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self:?}")
    }
}

/// Where and by how much an inequality is violated.
///
/// `value` is the sample that violates it and `bound` the reference it is
/// compared with; [`Witness::margin_of`] recomputes the violation from the two.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Witness {
    pub tau: f64,
    pub value: f64,
    pub bound: f64,
    pub margin: f64,
}

impl Witness {
    /// The amount by which `value` violates flag `kind` against `bound`.
    pub fn margin_of(kind: FlagKind, value: f64, bound: f64) -> f64 {
        match kind {
            FlagKind::B | FlagKind::SUB => bound - value,
            FlagKind::A | FlagKind::SUP | FlagKind::CV1 => value - bound,
            FlagKind::OS | FlagKind::S2 => (value - 1.0).abs() - bound,
            // bound holds g²(0); the swing must be on the other side of 1.
            FlagKind::US => {
                if (value - 1.0) * (bound - 1.0) < 0.0 {
                    (value - 1.0).abs()
                } else {
                    f64::NEG_INFINITY
                }
            }
            FlagKind::CV2 => value - 1.0 - bound,
            FlagKind::S1 => (1.0 - value).max(value - 2.0),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Flag {
    pub kind: FlagKind,
    pub witness: Witness,
    /// Separate violating intervals (OS, US, S2) or violating channels (CV1).
    pub count: usize,
}

impl Flag {
    fn new(kind: FlagKind, tau: f64, value: f64, bound: f64, count: usize) -> Self {
        Flag { kind, witness: Witness { tau, value, bound, margin: Witness::margin_of(kind, value, bound) }, count }
    }

    /// True when the witness, re-evaluated, still violates by more than ε.
    pub fn audit(&self, epsilon: f64) -> bool {
        let m = Witness::margin_of(self.kind, self.witness.value, self.witness.bound);
        m > epsilon && m == self.witness.margin
    }
}

/// Flags of one trace (or of the cross-correlation pair).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceFlags {
    pub label: String,
    pub channel: Option<Channel>,
    pub flags: Vec<Flag>,
    pub warnings: Vec<String>,
}

impl TraceFlags {
    pub fn has(&self, kind: FlagKind) -> bool {
        self.flags.iter().any(|f| f.kind == kind)
    }

    pub fn get(&self, kind: FlagKind) -> Option<&Flag> {
        self.flags.iter().find(|f| f.kind == kind)
    }

    pub fn kinds(&self) -> Vec<FlagKind> {
        self.flags.iter().map(|f| f.kind).collect()
    }
}

fn check_samples(tau: &[f64], values: &[f64], epsilon: f64) -> Result<()> {
    if values.is_empty() {
        return Err(invalid("cannot classify an empty trace"));
    }
    if tau.len() != values.len() {
        return Err(invalid(format!("{} delays but {} values", tau.len(), values.len())));
    }
    if !(epsilon >= 0.0) {
        return Err(invalid(format!("epsilon must be non-negative, got {epsilon}")));
    }
    if values.iter().chain(tau).any(|v| !v.is_finite()) {
        return Err(invalid("trace contains non-finite samples"));
    }
    Ok(())
}

/// Maximal runs of consecutive indices satisfying `pred`.
fn runs(n: usize, pred: impl Fn(usize) -> bool) -> Vec<(usize, usize)> {
    let mut out = Vec::new();
    let mut start = None;
    for k in 0..n {
        match (pred(k), start) {
            (true, None) => start = Some(k),
            (false, Some(s)) => {
                out.push((s, k));
                start = None;
            }
            _ => {}
        }
    }
    if let Some(s) = start {
        out.push((s, n));
    }
    out
}

fn argmax(range: impl Iterator<Item = usize>, key: impl Fn(usize) -> f64) -> Option<usize> {
    range.fold(None, |best: Option<usize>, k| match best {
        Some(b) if key(b) >= key(k) => Some(b),
        _ => Some(k),
    })
}

/// B/A, SUB/SUP, OS and US from raw samples of an autocorrelation.
pub fn classify_auto_samples(tau: &[f64], values: &[f64], epsilon: f64) -> Result<(Vec<Flag>, Vec<String>)> {
    check_samples(tau, values, epsilon)?;
    if values.iter().any(|v| *v < 0.0) {
        return Err(invalid("g2 traces cannot be negative"));
    }
    let n = values.len();
    let v0 = values[0];
    let mut flags = Vec::new();
    let mut warnings = Vec::new();

    if n >= 2 {
        if tau[1] - tau[0] > INITIAL_STEP_LIMIT {
            warnings.push(format!(
                "first grid step {} exceeds {INITIAL_STEP_LIMIT}; the initial slope may be unresolved",
                tau[1] - tau[0]
            ));
        }
        let step = values[1] - v0;
        let lowest = argmax(0..n, |k| -values[k]).unwrap();
        let highest = argmax(0..n, |k| values[k]).unwrap();
        let (down, up) = (v0 - values[lowest], values[highest] - v0);
        let initial = if step < -epsilon {
            flags.push(Flag::new(FlagKind::B, tau[lowest], values[lowest], v0, 1));
            Some(FlagKind::B)
        } else if step > epsilon {
            flags.push(Flag::new(FlagKind::A, tau[highest], values[highest], v0, 1));
            Some(FlagKind::A)
        } else {
            None
        };
        let global = if down > epsilon && down > up {
            Some(FlagKind::B)
        } else if up > epsilon && up > down {
            Some(FlagKind::A)
        } else {
            None
        };
        match (initial, global) {
            (Some(i), Some(g)) if i != g => warnings.push(format!(
                "initial step says {i} but the largest excursion from g2(0) says {g}; check the grid resolution"
            )),
            (None, Some(g)) => warnings.push(format!(
                "first step is within epsilon of g2(0) but the trace later departs ({g}); refine the grid near 0"
            )),
            _ => {}
        }
    }

    if 1.0 - v0 > epsilon {
        flags.push(Flag::new(FlagKind::SUB, tau[0], v0, 1.0, 1));
    } else if v0 - 1.0 > epsilon {
        flags.push(Flag::new(FlagKind::SUP, tau[0], v0, 1.0, 1));
    }

    let d0 = (v0 - 1.0).abs();
    let over = runs(n, |k| (values[k] - 1.0).abs() - d0 > epsilon);
    if !over.is_empty() {
        let k = argmax(over.iter().flat_map(|&(a, b)| a..b), |k| (values[k] - 1.0).abs()).unwrap();
        flags.push(Flag::new(FlagKind::OS, tau[k], values[k], d0, over.len()));
    }

    if d0 > epsilon {
        let opposite = |k: usize| (values[k] - 1.0) * (v0 - 1.0) < 0.0;
        let swing_ok = (0..n).filter(|&k| opposite(k)).all(|k| (values[k] - 1.0).abs() <= d0);
        let lobes = runs(n, |k| opposite(k) && (values[k] - 1.0).abs() > epsilon);
        if swing_ok && !lobes.is_empty() {
            let k = argmax(lobes.iter().flat_map(|&(a, b)| a..b), |k| (values[k] - 1.0).abs()).unwrap();
            flags.push(Flag::new(FlagKind::US, tau[k], values[k], v0, lobes.len()));
        }
    }
    Ok((flags, warnings))
}

pub fn classify_auto(trace: &CorrelationTrace, epsilon: f64) -> Result<TraceFlags> {
    if trace.kind != TraceKind::G2 {
        return Err(invalid(format!("{} is not a g2 trace", trace.label())));
    }
    let (flags, warnings) = classify_auto_samples(&trace.tau, &trace.values, epsilon)?;
    Ok(TraceFlags { label: trace.label(), channel: Some(trace.channel), flags, warnings })
}

/// CV1 and CV2 from the four τ = 0 values.
pub fn classify_cross_values(tf0: Option<f64>, ft0: Option<f64>, tt0: f64, ff0: f64, epsilon: f64) -> Result<Vec<Flag>> {
    for (name, v) in [("tf(0)", tf0), ("ft(0)", ft0), ("tt(0)", Some(tt0)), ("ff(0)", Some(ff0))] {
        if let Some(v) = v {
            if !(v >= 0.0) || !v.is_finite() {
                return Err(invalid(format!("{name} must be a non-negative number, got {v}")));
            }
        }
    }
    if !(epsilon >= 0.0) {
        return Err(invalid(format!("epsilon must be non-negative, got {epsilon}")));
    }
    let mut flags = Vec::new();
    let bound = (tt0 * ff0).sqrt();
    let hits: Vec<f64> = [tf0, ft0].into_iter().flatten().filter(|v| v - bound > epsilon).collect();
    if let Some(best) = hits.iter().copied().reduce(f64::max) {
        flags.push(Flag::new(FlagKind::CV1, 0.0, best, bound, hits.len()));
    }
    if let Some(tf0) = tf0 {
        let b2 = (tt0 - 1.0).max(0.0).sqrt();
        if tf0 - 1.0 - b2 > epsilon {
            flags.push(Flag::new(FlagKind::CV2, 0.0, tf0, b2, 1));
        }
    }
    Ok(flags)
}

pub fn classify_cross(tf: &CorrelationTrace, ft: &CorrelationTrace, tt0: f64, ff0: f64, epsilon: f64) -> Result<TraceFlags> {
    let at0 = |t: &CorrelationTrace| t.value_at_zero().ok_or_else(|| invalid(format!("{} is empty", t.label())));
    let flags = classify_cross_values(Some(at0(tf)?), Some(at0(ft)?), tt0, ff0, epsilon)?;
    Ok(TraceFlags { label: "cross".into(), channel: None, flags, warnings: Vec::new() })
}

/// S1 and S2 from raw samples of an intensity–field correlation.
pub fn classify_htheta_samples(tau: &[f64], values: &[f64], epsilon: f64) -> Result<Vec<Flag>> {
    check_samples(tau, values, epsilon)?;
    let h0 = values[0];
    let mut flags = Vec::new();
    if Witness::margin_of(FlagKind::S1, h0, 0.0) > epsilon {
        flags.push(Flag::new(FlagKind::S1, tau[0], h0, 0.0, 1));
    }
    let bound = (h0 - 1.0).abs().min(1.0);
    let over = runs(values.len(), |k| (values[k] - 1.0).abs() - bound > epsilon);
    if !over.is_empty() {
        let k = argmax(over.iter().flat_map(|&(a, b)| a..b), |k| (values[k] - 1.0).abs()).unwrap();
        flags.push(Flag::new(FlagKind::S2, tau[k], values[k], bound, over.len()));
    }
    Ok(flags)
}

pub fn classify_htheta(trace: &CorrelationTrace, epsilon: f64) -> Result<TraceFlags> {
    if trace.kind != TraceKind::Htheta {
        return Err(invalid(format!("{} is not an h_theta trace", trace.label())));
    }
    let flags = classify_htheta_samples(&trace.tau, &trace.values, epsilon)?;
    Ok(TraceFlags { label: trace.label(), channel: Some(trace.channel), flags, warnings: Vec::new() })
}

/// All flags of one simulation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ViolationReport {
    pub epsilon: f64,
    pub traces: Vec<TraceFlags>,
    pub cross: Option<TraceFlags>,
    /// Every witness re-evaluated against its inequality and the sample it names.
    pub audit_passed: bool,
    pub warnings: Vec<String>,
}

impl ViolationReport {
    /// Classifies a set of traces: g² TT/FF as autocorrelations, g² TF/FT (with
    /// TT and FF at τ = 0) as cross correlations, and every hθ trace.
    pub fn from_traces(traces: &[CorrelationTrace], epsilon: f64) -> Result<Self> {
        let mut out = Vec::new();
        let mut warnings = Vec::new();
        let g2_at = |ch: Channel| {
            traces.iter().find(|t| t.kind == TraceKind::G2 && t.channel == ch).and_then(|t| t.value_at_zero())
        };
        for t in traces {
            match (t.kind, t.channel.is_auto()) {
                (TraceKind::G2, true) => out.push(classify_auto(t, epsilon)?),
                (TraceKind::Htheta, _) => out.push(classify_htheta(t, epsilon)?),
                (TraceKind::G2, false) => {}
            }
        }
        let (tf0, ft0) = (g2_at(Channel::TF), g2_at(Channel::FT));
        let cross = match (tf0.or(ft0), g2_at(Channel::TT), g2_at(Channel::FF)) {
            (Some(_), Some(tt0), Some(ff0)) => Some(TraceFlags {
                label: "cross".into(),
                channel: None,
                flags: classify_cross_values(tf0, ft0, tt0, ff0, epsilon)?,
                warnings: Vec::new(),
            }),
            (Some(_), _, _) => {
                warnings.push("cross correlations need g2 TT and FF at tau = 0; CV1/CV2 not evaluated".into());
                None
            }
            _ => None,
        };
        for t in out.iter().chain(cross.iter()) {
            warnings.extend(t.warnings.iter().map(|w| format!("{}: {w}", t.label)));
        }
        let mut report = Self { epsilon, traces: out, cross, audit_passed: false, warnings };
        report.audit_passed = report.audit(traces);
        Ok(report)
    }

    /// Re-evaluates every witness; where a trace is available the witness
    /// sample must also be present in it.
    pub fn audit(&self, traces: &[CorrelationTrace]) -> bool {
        let eps = self.epsilon;
        let on_trace = |tf: &TraceFlags, f: &Flag| {
            traces.iter().filter(|t| t.label() == tf.label).all(|t| {
                t.tau.iter().zip(&t.values).any(|(&tau, &v)| tau == f.witness.tau && v == f.witness.value)
            })
        };
        self.traces.iter().all(|t| t.flags.iter().all(|f| f.audit(eps) && on_trace(t, f)))
            && self.cross.iter().all(|t| t.flags.iter().all(|f| f.audit(eps)))
    }

    /// Which traces raised each flag, e.g. `SUB → [g2_TT]`.
    pub fn legend(&self) -> BTreeMap<FlagKind, Vec<String>> {
        let mut m: BTreeMap<FlagKind, Vec<String>> = BTreeMap::new();
        for t in self.traces.iter().chain(self.cross.iter()) {
            for f in &t.flags {
                let who = t.channel.map(|c| c.to_string()).unwrap_or_else(|| t.label.clone());
                let entry = m.entry(f.kind).or_default();
                if !entry.contains(&who) {
                    entry.push(who);
                }
            }
        }
        m
    }

    pub fn has(&self, kind: FlagKind) -> bool {
        self.traces.iter().chain(self.cross.iter()).any(|t| t.has(kind))
    }

    /// One line per trace with its flags.
    pub fn to_table(&self) -> String {
        let rows: Vec<(String, String)> = self
            .traces
            .iter()
            .chain(self.cross.iter())
            .map(|t| {
                let flags: Vec<String> = t.flags.iter().map(|f| f.kind.to_string()).collect();
                (t.label.clone(), if flags.is_empty() { "-".into() } else { flags.join(" ") })
            })
            .collect();
        let w = rows.iter().map(|r| r.0.len()).max().unwrap_or(5).max(5);
        let mut s = format!("{:<w$}  flags\n", "trace");
        for (label, flags) in rows {
            s.push_str(&format!("{label:<w$}  {flags}\n"));
        }
        s
    }
}

/// Aligned table with one row per labelled report and one column per flag.
/// Cells list the channels that raised the flag.
pub fn summary_table(rows: &[(String, std::result::Result<ViolationReport, String>)]) -> String {
    let mut cells: Vec<Vec<String>> = Vec::new();
    let mut header = vec!["point".to_string()];
    header.extend(FlagKind::ALL.iter().map(|k| k.to_string()));
    cells.push(header);
    for (label, report) in rows {
        let mut row = vec![label.clone()];
        match report {
            Ok(r) => {
                let legend = r.legend();
                for k in FlagKind::ALL {
                    row.push(legend.get(&k).map(|v| v.join(",")).unwrap_or_else(|| "-".into()));
                }
            }
            Err(e) => {
                row.push(format!("error: {e}"));
            }
        }
        cells.push(row);
    }
    let cols = FlagKind::ALL.len() + 1;
    let widths: Vec<usize> =
        (0..cols).map(|c| cells.iter().filter_map(|r| r.get(c)).map(|s| s.chars().count()).max().unwrap_or(1)).collect();
    let mut out = String::new();
    for row in &cells {
        let line: Vec<String> = row
            .iter()
            .enumerate()
            .map(|(c, s)| if row.len() == cols { format!("{s:<w$}", w = widths[c]) } else { s.clone() })
            .collect();
        out.push_str(line.join("  ").trim_end());
        out.push('\n');
    }
    out
}
