//! Scenario files and auxiliary input formats.
//!
//! A scenario is a line-oriented text file with named sections. List
//! sections (`segments`, `pollution`, `history`) hold comma-separated
//! records, the remaining sections hold `key = value` pairs. Blank lines
//! and `#` comments are ignored everywhere.
//!
//! ```text
//! [segments]
//! main, 1500          # id, length in meters
//!
//! [pollution]
//! main, 2.5           # id, pollution level
//!
//! [history]
//! main                # one trip per line, comma-separated segment ids
//!
//! [cyclist]
//! target_speed_kmh = 20
//!
//! [controller]
//! mode = schedule
//! setpoint = 0, 0.9   # time s, m*
//! setpoint = 180, 0.3
//!
//! [run]
//! tick_s = 0.1
//! duration_s = 480
//! budget_wh = 100
//! route = main
//! ```

use std::collections::BTreeMap;
use std::path::Path;

use crate::controller::CooperationGain;
use crate::cyclist::{Behavior, CalibrationTarget, CyclistParams};
use crate::error::{Error, Result};
use crate::optimizer::SegmentEstimate;
use crate::powertrain::PowertrainConfig;
use crate::route::{SegmentId, TripHistory};

/// Where the low-level controller gets its setpoint from.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SetpointMode {
    /// Piecewise-constant schedule of `m*` values.
    Schedule,
    /// Consensus filter; `m*` converges to 0.5.
    Consensus,
    /// Consensus tracking variant following a reference signal.
    Tracking,
    /// `m* = 1 - x` for the active segment of the assist plan.
    Optimizer,
    /// Pitchfork cooperation dynamics command motor power directly.
    Bifurcation,
}

/// Reference signal feeding the tracking variant.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReferenceSource {
    Schedule,
    Optimizer,
}

/// Controller configuration from the scenario file.
#[derive(Debug, Clone)]
pub struct ControllerConfig {
    pub mode: SetpointMode,
    pub gamma: f64,
    pub y_max: f64,
    pub alpha: f64,
    pub m_min: f64,
    /// `(time s, m*)` pairs, strictly increasing in time.
    pub setpoint_schedule: Vec<(f64, f64)>,
    pub reference_source: ReferenceSource,
    pub gain_breakpoints: Vec<(f64, f64)>,
    pub bifurcation_dt_s: f64,
}

impl Default for ControllerConfig {
    fn default() -> Self {
        ControllerConfig {
            mode: SetpointMode::Schedule,
            gamma: 0.2,
            y_max: 100.0,
            alpha: 0.75,
            m_min: 0.0,
            setpoint_schedule: vec![(0.0, 0.5)],
            reference_source: ReferenceSource::Schedule,
            gain_breakpoints: CooperationGain::standard().breakpoints().to_vec(),
            bifurcation_dt_s: 0.001,
        }
    }
}

/// Run-level configuration.
#[derive(Debug, Clone)]
pub struct RunConfig {
    pub tick_s: f64,
    pub duration_s: f64,
    pub budget_wh: f64,
    pub route: Vec<SegmentId>,
    pub seed: u64,
    /// `(time s, speed km/h)` pairs, strictly increasing in time.
    pub speed_schedule: Vec<(f64, f64)>,
}

/// A fully validated simulation scenario.
#[derive(Debug, Clone)]
pub struct Scenario {
    pub segments: BTreeMap<SegmentId, f64>,
    pub pollution: BTreeMap<SegmentId, f64>,
    pub history: TripHistory,
    pub cyclist: CyclistParams,
    pub controller: ControllerConfig,
    pub powertrain: PowertrainConfig,
    pub run: RunConfig,
}

impl Scenario {
    pub fn from_path(path: impl AsRef<Path>) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Scenario::parse(&text)
    }

    pub fn parse(text: &str) -> Result<Self> {
        Parser::new(text).finish()
    }

    pub fn segment_length_m(&self, id: &SegmentId) -> Option<f64> {
        self.segments.get(id).copied()
    }

    pub fn pollution_level(&self, id: &SegmentId) -> f64 {
        self.pollution.get(id).copied().unwrap_or(0.0)
    }
}

struct Parser<'a> {
    text: &'a str,
    segments: BTreeMap<SegmentId, f64>,
    segment_order: Vec<SegmentId>,
    pollution: BTreeMap<SegmentId, f64>,
    history: TripHistory,
    cyclist: CyclistParams,
    controller: ControllerConfig,
    powertrain: PowertrainConfig,
    tick_s: f64,
    duration_s: Option<f64>,
    budget_wh: f64,
    route: Option<Vec<SegmentId>>,
    seed: u64,
    speed_schedule: Option<Vec<(f64, f64)>>,
    setpoints: Option<Vec<(f64, f64)>>,
    gain_points: Option<Vec<(f64, f64)>>,
}

fn parse_err(line: usize, message: impl Into<String>) -> Error {
    Error::ScenarioParse {
        line,
        message: message.into(),
    }
}

fn parse_f64(line: usize, field: &str, raw: &str) -> Result<f64> {
    raw.trim()
        .parse::<f64>()
        .map_err(|_| parse_err(line, format!("{field}: expected a number, got `{}`", raw.trim())))
}

fn parse_u64(line: usize, field: &str, raw: &str) -> Result<u64> {
    raw.trim()
        .parse::<u64>()
        .map_err(|_| parse_err(line, format!("{field}: expected an integer, got `{}`", raw.trim())))
}

impl<'a> Parser<'a> {
    fn new(text: &'a str) -> Self {
        Parser {
            text,
            segments: BTreeMap::new(),
            segment_order: Vec::new(),
            pollution: BTreeMap::new(),
            history: TripHistory::new(),
            cyclist: CyclistParams::default(),
            controller: ControllerConfig::default(),
            powertrain: PowertrainConfig::default(),
            tick_s: 0.1,
            duration_s: None,
            budget_wh: 500.0,
            route: None,
            seed: 0,
            speed_schedule: None,
            setpoints: None,
            gain_points: None,
        }
    }

    fn finish(mut self) -> Result<Scenario> {
        let mut section = String::new();
        for (idx, raw) in self.text.lines().enumerate() {
            let line_no = idx + 1;
            let line = match raw.find('#') {
                Some(pos) => raw[..pos].trim(),
                None => raw.trim(),
            };
            if line.is_empty() {
                continue;
            }
            if let Some(name) = line.strip_prefix('[') {
                let name = name
                    .strip_suffix(']')
                    .ok_or_else(|| parse_err(line_no, "unterminated section header"))?
                    .trim()
                    .to_lowercase();
                match name.as_str() {
                    "segments" | "pollution" | "history" | "cyclist" | "controller"
                    | "powertrain" | "run" => section = name,
                    other => {
                        return Err(parse_err(line_no, format!("unknown section `{other}`")));
                    }
                }
                continue;
            }
            match section.as_str() {
                "segments" => self.segment_row(line_no, line)?,
                "pollution" => self.pollution_row(line_no, line)?,
                "history" => self.history_row(line_no, line)?,
                "cyclist" => self.cyclist_key(line_no, line)?,
                "controller" => self.controller_key(line_no, line)?,
                "powertrain" => self.powertrain_key(line_no, line)?,
                "run" => self.run_key(line_no, line)?,
                _ => {
                    return Err(parse_err(
                        line_no,
                        "content before any [section] header",
                    ));
                }
            }
        }
        self.build()
    }

    fn segment_row(&mut self, line_no: usize, line: &str) -> Result<()> {
        let (id, len) = split_pair(line_no, line, "segment row needs `id, length_m`")?;
        let length = parse_f64(line_no, "segment length", &len)?;
        if !(length > 0.0) {
            return Err(parse_err(line_no, "segment length must be positive"));
        }
        let id = SegmentId::new(id);
        if self.segments.insert(id.clone(), length).is_some() {
            return Err(parse_err(line_no, format!("duplicate segment `{id}`")));
        }
        self.segment_order.push(id);
        Ok(())
    }

    fn pollution_row(&mut self, line_no: usize, line: &str) -> Result<()> {
        let (id, level) = split_pair(line_no, line, "pollution row needs `id, level`")?;
        let level = parse_f64(line_no, "pollution level", &level)?;
        if !(level >= 0.0) {
            return Err(parse_err(line_no, "pollution level must be nonnegative"));
        }
        self.pollution.insert(SegmentId::new(id), level);
        Ok(())
    }

    fn history_row(&mut self, line_no: usize, line: &str) -> Result<()> {
        let segments: Vec<SegmentId> = line
            .split(',')
            .map(|s| s.trim())
            .filter(|s| !s.is_empty())
            .map(SegmentId::from)
            .collect();
        let route = crate::route::Route::new(segments)
            .map_err(|e| parse_err(line_no, e.to_string()))?;
        self.history.record_trip(route);
        Ok(())
    }

    fn cyclist_key(&mut self, line_no: usize, line: &str) -> Result<()> {
        let (key, value) = split_key_value(line_no, line)?;
        let c = &mut self.cyclist;
        match key.as_str() {
            "target_speed_kmh" => c.target_speed_kmh = parse_f64(line_no, &key, &value)?,
            "resting_ventilation_lpm" => {
                c.resting_ventilation_lpm = parse_f64(line_no, &key, &value)?
            }
            "ventilation_gain_lpm_per_w" => {
                c.ventilation_gain_lpm_per_w = parse_f64(line_no, &key, &value)?
            }
            "ventilation_time_constant_s" => {
                c.ventilation_time_constant_s = parse_f64(line_no, &key, &value)?
            }
            "heart_rate_rest_bpm" => c.heart_rate_rest_bpm = parse_f64(line_no, &key, &value)?,
            "heart_rate_gain_bpm_per_w" => {
                c.heart_rate_gain_bpm_per_w = parse_f64(line_no, &key, &value)?
            }
            "heart_rate_time_constant_s" => {
                c.heart_rate_time_constant_s = parse_f64(line_no, &key, &value)?
            }
            "behavior" => {
                c.behavior = match value.trim().to_lowercase().as_str() {
                    "cooperative" => Behavior::Cooperative,
                    "competitive" => Behavior::Competitive,
                    other => {
                        return Err(parse_err(
                            line_no,
                            format!("behavior must be cooperative or competitive, got `{other}`"),
                        ));
                    }
                }
            }
            "effort_noise_std_w" => c.effort_noise_std_w = parse_f64(line_no, &key, &value)?,
            "competitive_yield" => c.competitive_yield = parse_f64(line_no, &key, &value)?,
            "power_linear_w_per_mps" => {
                c.power_linear_w_per_mps = parse_f64(line_no, &key, &value)?
            }
            "power_cubic_w_per_mps3" => {
                c.power_cubic_w_per_mps3 = parse_f64(line_no, &key, &value)?
            }
            "cadence_rad_per_s" => c.cadence_rad_per_s = parse_f64(line_no, &key, &value)?,
            other => return Err(parse_err(line_no, format!("unknown cyclist key `{other}`"))),
        }
        Ok(())
    }

    fn controller_key(&mut self, line_no: usize, line: &str) -> Result<()> {
        let (key, value) = split_key_value(line_no, line)?;
        let c = &mut self.controller;
        match key.as_str() {
            "mode" => {
                c.mode = match value.trim().to_lowercase().as_str() {
                    "schedule" => SetpointMode::Schedule,
                    "consensus" => SetpointMode::Consensus,
                    "tracking" => SetpointMode::Tracking,
                    "optimizer" => SetpointMode::Optimizer,
                    "bifurcation" => SetpointMode::Bifurcation,
                    other => {
                        return Err(parse_err(line_no, format!("unknown mode `{other}`")));
                    }
                }
            }
            "gamma" => c.gamma = parse_f64(line_no, &key, &value)?,
            "y_max" => c.y_max = parse_f64(line_no, &key, &value)?,
            "alpha" => c.alpha = parse_f64(line_no, &key, &value)?,
            "m_min" => c.m_min = parse_f64(line_no, &key, &value)?,
            "reference" => {
                c.reference_source = match value.trim().to_lowercase().as_str() {
                    "schedule" => ReferenceSource::Schedule,
                    "optimizer" => ReferenceSource::Optimizer,
                    other => {
                        return Err(parse_err(
                            line_no,
                            format!("reference must be schedule or optimizer, got `{other}`"),
                        ));
                    }
                }
            }
            "setpoint" => {
                let (t, v) = split_pair(line_no, &value, "setpoint needs `time_s, m_star`")?;
                let entry = (
                    parse_f64(line_no, "setpoint time", &t)?,
                    parse_f64(line_no, "setpoint value", &v)?,
                );
                self.setpoints.get_or_insert_with(Vec::new).push(entry);
            }
            "gain_point" => {
                let (x, y) = split_pair(line_no, &value, "gain_point needs `effort_w, gain`")?;
                let entry = (
                    parse_f64(line_no, "gain effort", &x)?,
                    parse_f64(line_no, "gain value", &y)?,
                );
                self.gain_points.get_or_insert_with(Vec::new).push(entry);
            }
            "bifurcation_dt_s" => c.bifurcation_dt_s = parse_f64(line_no, &key, &value)?,
            other => {
                return Err(parse_err(
                    line_no,
                    format!("unknown controller key `{other}`"),
                ));
            }
        }
        Ok(())
    }

    fn powertrain_key(&mut self, line_no: usize, line: &str) -> Result<()> {
        let (key, value) = split_key_value(line_no, line)?;
        let p = &mut self.powertrain;
        match key.as_str() {
            "voltage_v" => p.voltage = parse_f64(line_no, &key, &value)?,
            "current_gain_a" => p.current_gain = parse_f64(line_no, &key, &value)?,
            "motor_efficiency" => p.motor_efficiency = parse_f64(line_no, &key, &value)?,
            "crank_efficiency" => p.crank_efficiency = parse_f64(line_no, &key, &value)?,
            "filter_alpha" => p.filter_alpha = parse_f64(line_no, &key, &value)?,
            "average_window" => {
                p.average_window = parse_u64(line_no, &key, &value)? as usize;
            }
            "dead_zone_w" => p.dead_zone_w = parse_f64(line_no, &key, &value)?,
            other => {
                return Err(parse_err(
                    line_no,
                    format!("unknown powertrain key `{other}`"),
                ));
            }
        }
        Ok(())
    }

    fn run_key(&mut self, line_no: usize, line: &str) -> Result<()> {
        let (key, value) = split_key_value(line_no, line)?;
        match key.as_str() {
            "tick_s" => self.tick_s = parse_f64(line_no, &key, &value)?,
            "duration_s" => self.duration_s = Some(parse_f64(line_no, &key, &value)?),
            "budget_wh" => self.budget_wh = parse_f64(line_no, &key, &value)?,
            "seed" => self.seed = parse_u64(line_no, &key, &value)?,
            "route" => {
                let route: Vec<SegmentId> = value
                    .split(',')
                    .map(|s| s.trim())
                    .filter(|s| !s.is_empty())
                    .map(SegmentId::from)
                    .collect();
                if route.is_empty() {
                    return Err(parse_err(line_no, "route must name at least one segment"));
                }
                self.route = Some(route);
            }
            "speed" => {
                let (t, v) = split_pair(line_no, &value, "speed needs `time_s, speed_kmh`")?;
                let entry = (
                    parse_f64(line_no, "speed time", &t)?,
                    parse_f64(line_no, "speed value", &v)?,
                );
                self.speed_schedule.get_or_insert_with(Vec::new).push(entry);
            }
            other => return Err(parse_err(line_no, format!("unknown run key `{other}`"))),
        }
        Ok(())
    }

    fn build(mut self) -> Result<Scenario> {
        if let Some(points) = self.setpoints.take() {
            self.controller.setpoint_schedule = points;
        }
        if let Some(points) = self.gain_points.take() {
            self.controller.gain_breakpoints = points;
        }

        // A scenario without explicit segments gets one effectively
        // unbounded default segment.
        if self.segments.is_empty() {
            let id = SegmentId::new("s0");
            self.segments.insert(id.clone(), 1e12);
            self.segment_order.push(id);
        }
        let route = self
            .route
            .take()
            .unwrap_or_else(|| self.segment_order.clone());

        let explicit_duration = self.duration_s.is_some();
        let cyclist = self.cyclist.clone();
        let duration = match self.duration_s {
            Some(d) => d,
            None => {
                if self.segment_order.len() == 1 && self.segments.values().any(|&l| l >= 1e12) {
                    60.0
                } else if cyclist.target_speed_kmh > 0.0 {
                    let dist: f64 = route
                        .iter()
                        .filter_map(|id| self.segments.get(id))
                        .sum();
                    (dist / (cyclist.target_speed_kmh / 3.6)).ceil()
                } else {
                    60.0
                }
            }
        };

        let speed_schedule = self
            .speed_schedule
            .take()
            .unwrap_or_else(|| vec![(0.0, cyclist.target_speed_kmh)]);

        let scenario = Scenario {
            segments: self.segments,
            pollution: self.pollution,
            history: self.history,
            cyclist,
            controller: self.controller,
            powertrain: self.powertrain,
            run: RunConfig {
                tick_s: self.tick_s,
                duration_s: duration,
                budget_wh: self.budget_wh,
                route,
                seed: self.seed,
                speed_schedule,
            },
        };
        validate(&scenario, explicit_duration)?;
        Ok(scenario)
    }
}

fn split_pair(line_no: usize, line: &str, expect: &str) -> Result<(String, String)> {
    let mut parts = line.splitn(2, ',');
    let a = parts.next().unwrap_or("").trim();
    let b = parts.next().unwrap_or("").trim();
    if a.is_empty() || b.is_empty() {
        return Err(parse_err(line_no, expect.to_string()));
    }
    Ok((a.to_string(), b.to_string()))
}

fn split_key_value(line_no: usize, line: &str) -> Result<(String, String)> {
    let mut parts = line.splitn(2, '=');
    let key = parts.next().unwrap_or("").trim().to_lowercase();
    let value = parts
        .next()
        .ok_or_else(|| parse_err(line_no, "expected `key = value`"))?
        .trim()
        .to_string();
    if key.is_empty() || value.is_empty() {
        return Err(parse_err(line_no, "expected `key = value`"));
    }
    Ok((key, value))
}

fn validate(s: &Scenario, explicit_duration: bool) -> Result<()> {
    let invalid = |msg: String| Err(Error::ScenarioInvalid(msg));
    if !(s.run.tick_s > 0.0) {
        return invalid(format!("tick must be positive, got {}", s.run.tick_s));
    }
    if !(s.run.duration_s > 0.0) {
        return invalid(format!("duration must be positive, got {}", s.run.duration_s));
    }
    if !(s.run.budget_wh >= 0.0) {
        return invalid(format!("budget must be nonnegative, got {}", s.run.budget_wh));
    }
    let _ = explicit_duration;

    s.cyclist.validate()?;
    s.powertrain.validate()?;

    let c = &s.controller;
    if !(c.gamma > 0.0) {
        return invalid(format!("controller gamma must be positive, got {}", c.gamma));
    }
    if !(c.y_max > 0.0) {
        return invalid(format!("controller y_max must be positive, got {}", c.y_max));
    }
    if !(c.alpha > 0.0 && c.alpha < 1.0) {
        return Err(Error::InvalidAlpha(c.alpha));
    }
    if !(0.0..=1.0).contains(&c.m_min) {
        return invalid(format!("m_min must lie in [0, 1], got {}", c.m_min));
    }
    if c.setpoint_schedule.is_empty() {
        return invalid("setpoint schedule is empty".into());
    }
    for pair in c.setpoint_schedule.windows(2) {
        if !(pair[1].0 > pair[0].0) {
            return invalid("setpoint schedule times must strictly increase".into());
        }
    }
    for &(_, m) in &c.setpoint_schedule {
        if !(0.0..=1.0).contains(&m) {
            return invalid(format!("setpoint {m} outside [0, 1]"));
        }
    }
    for pair in s.run.speed_schedule.windows(2) {
        if !(pair[1].0 > pair[0].0) {
            return invalid("speed schedule times must strictly increase".into());
        }
    }
    for &(_, v) in &s.run.speed_schedule {
        if !(v >= 0.0) {
            return invalid(format!("scheduled speed {v} must be nonnegative"));
        }
    }
    // Exercises the profile invariants (starts at zero, positive beyond).
    CooperationGain::new(c.gain_breakpoints.clone())?;

    let dangling = |segment: &SegmentId, context: &str| {
        Err(Error::DanglingSegment {
            segment: segment.to_string(),
            context: context.to_string(),
        })
    };
    for id in s.pollution.keys() {
        if !s.segments.contains_key(id) {
            return dangling(id, "pollution map");
        }
    }
    for (route, _) in s.history.routes() {
        for id in route.segments() {
            if !s.segments.contains_key(id) {
                return dangling(id, "trip history");
            }
        }
    }
    for id in &s.run.route {
        if !s.segments.contains_key(id) {
            return dangling(id, "route");
        }
    }
    Ok(())
}

/// Parse a segment-estimates file: one `id, probability, energy_wh,
/// pollution` row per line.
pub fn parse_estimates(text: &str) -> Result<Vec<SegmentEstimate>> {
    let mut out = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = match raw.find('#') {
            Some(pos) => raw[..pos].trim(),
            None => raw.trim(),
        };
        if line.is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').map(|s| s.trim()).collect();
        if fields.len() != 4 {
            return Err(parse_err(
                line_no,
                "estimate row needs `id, probability, energy_wh, pollution`",
            ));
        }
        out.push(SegmentEstimate {
            segment: SegmentId::new(fields[0]),
            probability: parse_f64(line_no, "probability", fields[1])?,
            expected_energy_wh: parse_f64(line_no, "energy", fields[2])?,
            pollution: parse_f64(line_no, "pollution", fields[3])?,
        });
    }
    Ok(out)
}

/// Parse a calibration-targets file: one `speed_kmh, m_star, band_lo,
/// band_hi` row per line.
pub fn parse_targets(text: &str) -> Result<Vec<CalibrationTarget>> {
    let mut out = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = match raw.find('#') {
            Some(pos) => raw[..pos].trim(),
            None => raw.trim(),
        };
        if line.is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').map(|s| s.trim()).collect();
        if fields.len() != 4 {
            return Err(parse_err(
                line_no,
                "target row needs `speed_kmh, m_star, band_lo, band_hi`",
            ));
        }
        out.push(CalibrationTarget {
            speed_kmh: parse_f64(line_no, "speed", fields[0])?,
            m_star: parse_f64(line_no, "m_star", fields[1])?,
            band_lpm: (
                parse_f64(line_no, "band_lo", fields[2])?,
                parse_f64(line_no, "band_hi", fields[3])?,
            ),
        });
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimal_file_fills_defaults() {
        let s = Scenario::parse("").unwrap();
        assert_eq!(s.run.tick_s, 0.1);
        assert_eq!(s.run.duration_s, 60.0);
        assert_eq!(s.run.route.len(), 1);
        assert_eq!(s.cyclist.target_speed_kmh, 20.0);
        assert_eq!(s.controller.mode, SetpointMode::Schedule);
        assert!(s.segments.len() == 1);
    }

    #[test]
    fn full_file_round_trip() {
        let text = "\
[segments]
a, 500
b, 800

[pollution]
a, 5.0

[history]
a, b
a, b

[cyclist]
target_speed_kmh = 18
behavior = competitive

[controller]
mode = optimizer
gamma = 0.3
setpoint = 0, 0.8

[powertrain]
voltage_v = 48

[run]
tick_s = 0.05
duration_s = 120
budget_wh = 12
route = a, b
seed = 9
";
        let s = Scenario::parse(text).unwrap();
        assert_eq!(s.segments.len(), 2);
        assert_eq!(s.segment_length_m(&"a".into()), Some(500.0));
        assert_eq!(s.pollution_level(&"a".into()), 5.0);
        assert_eq!(s.pollution_level(&"b".into()), 0.0);
        assert_eq!(s.history.trip_count(), 2);
        assert_eq!(s.cyclist.target_speed_kmh, 18.0);
        assert_eq!(s.controller.mode, SetpointMode::Optimizer);
        assert_eq!(s.powertrain.voltage, 48.0);
        assert_eq!(s.run.tick_s, 0.05);
        assert_eq!(s.run.seed, 9);
        assert_eq!(s.run.route.len(), 2);
    }

    #[test]
    fn dangling_pollution_segment_is_rejected() {
        let text = "[segments]\na, 100\n[pollution]\nzz, 1.0\n";
        assert!(matches!(
            Scenario::parse(text),
            Err(Error::DanglingSegment { .. })
        ));
    }

    #[test]
    fn dangling_history_segment_is_rejected() {
        let text = "[segments]\na, 100\n[history]\na, q\n";
        assert!(matches!(
            Scenario::parse(text),
            Err(Error::DanglingSegment { .. })
        ));
    }

    #[test]
    fn zero_tick_is_rejected() {
        let text = "[run]\ntick_s = 0\n";
        assert!(matches!(
            Scenario::parse(text),
            Err(Error::ScenarioInvalid(_))
        ));
    }

    #[test]
    fn parse_errors_carry_line_numbers() {
        let text = "[segments]\na, 100\nbad-row\n";
        match Scenario::parse(text) {
            Err(Error::ScenarioParse { line, .. }) => assert_eq!(line, 3),
            other => panic!("expected parse error, got {other:?}"),
        }
    }

    #[test]
    fn duration_defaults_to_route_time() {
        let text = "[segments]\na, 1000\nb, 1000\n[run]\nroute = a, b\n";
        let s = Scenario::parse(text).unwrap();
        // 2000 m at 20 km/h is 360 s.
        assert_eq!(s.run.duration_s, 360.0);
    }

    #[test]
    fn estimates_file_parses() {
        let ests = parse_estimates("# id, p, e, d\na, 0.75, 3.8, 5\nb, 0.25, 2.0, 1\n").unwrap();
        assert_eq!(ests.len(), 2);
        assert_eq!(ests[0].probability, 0.75);
        assert!(parse_estimates("a, 1, 2\n").is_err());
    }

    #[test]
    fn targets_file_parses() {
        let t = parse_targets("20, 0.9, 55, 60\n20, 0.3, 35, 40\n").unwrap();
        assert_eq!(t.len(), 2);
        assert_eq!(t[1].band_lpm, (35.0, 40.0));
    }
}
