//! Telemetry records, CSV persistence, and run summaries.

use std::collections::BTreeMap;
use std::io::Write;
use std::path::Path;

use serde_json::json;

use crate::error::{Error, Result};
use crate::route::SegmentId;

/// Exact column order of the telemetry CSV.
pub const CSV_HEADER: &str =
    "t,segment,speed_kmh,Y,m,m_star,p_h_out_w,p_m_out_w,ventilation_lpm,heart_rate_bpm,budget_wh,x_s";

/// One tick of simulation output.
#[derive(Debug, Clone, PartialEq)]
pub struct TelemetryRecord {
    pub time_s: f64,
    pub segment: SegmentId,
    pub speed_kmh: f64,
    /// Control input applied during this tick.
    pub control_input: f64,
    /// Measured human power share.
    pub share: f64,
    /// Active setpoint; NaN when the controller runs without one.
    pub setpoint: f64,
    pub human_out_w: f64,
    pub motor_out_w: f64,
    pub ventilation_lpm: f64,
    pub heart_rate_bpm: f64,
    /// Battery energy remaining after this tick.
    pub budget_wh: f64,
    /// Assist fraction of the active segment.
    pub assist_fraction: f64,
}

impl TelemetryRecord {
    fn csv_row(&self) -> String {
        format!(
            "{:.3},{},{:.3},{:.6},{:.6},{:.6},{:.6},{:.6},{:.6},{:.6},{:.9},{:.6}",
            self.time_s,
            self.segment,
            self.speed_kmh,
            self.control_input,
            self.share,
            self.setpoint,
            self.human_out_w,
            self.motor_out_w,
            self.ventilation_lpm,
            self.heart_rate_bpm,
            self.budget_wh,
            self.assist_fraction,
        )
    }

    fn json_value(&self) -> serde_json::Value {
        let opt = |v: f64| {
            if v.is_nan() {
                serde_json::Value::Null
            } else {
                json!(v)
            }
        };
        json!({
            "t": self.time_s,
            "segment": self.segment.to_string(),
            "speed_kmh": self.speed_kmh,
            "Y": self.control_input,
            "m": self.share,
            "m_star": opt(self.setpoint),
            "p_h_out_w": self.human_out_w,
            "p_m_out_w": self.motor_out_w,
            "ventilation_lpm": self.ventilation_lpm,
            "heart_rate_bpm": self.heart_rate_bpm,
            "budget_wh": self.budget_wh,
            "x_s": self.assist_fraction,
        })
    }
}

/// Serialize records as CSV with the canonical header.
pub fn to_csv(records: &[TelemetryRecord]) -> String {
    let mut out = String::with_capacity(64 * (records.len() + 1));
    out.push_str(CSV_HEADER);
    out.push('\n');
    for r in records {
        out.push_str(&r.csv_row());
        out.push('\n');
    }
    out
}

pub fn write_csv(path: impl AsRef<Path>, records: &[TelemetryRecord]) -> Result<()> {
    let mut file = std::fs::File::create(path)?;
    file.write_all(to_csv(records).as_bytes())?;
    Ok(())
}

/// Serialize records as a JSON array.
pub fn to_json(records: &[TelemetryRecord]) -> String {
    let values: Vec<serde_json::Value> = records.iter().map(|r| r.json_value()).collect();
    serde_json::to_string_pretty(&values).expect("telemetry serializes")
}

/// Parse a telemetry CSV produced by [`to_csv`].
pub fn from_csv(text: &str) -> Result<Vec<TelemetryRecord>> {
    let mut lines = text.lines().enumerate();
    match lines.next() {
        Some((_, header)) if header.trim() == CSV_HEADER => {}
        _ => {
            return Err(Error::TelemetryParse {
                line: 1,
                message: "missing or unexpected header".into(),
            });
        }
    }
    let mut records = Vec::new();
    for (idx, line) in lines {
        let line_no = idx + 1;
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != 12 {
            return Err(Error::TelemetryParse {
                line: line_no,
                message: format!("expected 12 fields, got {}", fields.len()),
            });
        }
        let num = |i: usize| -> Result<f64> {
            fields[i].trim().parse::<f64>().map_err(|_| Error::TelemetryParse {
                line: line_no,
                message: format!("field {} is not a number: `{}`", i + 1, fields[i]),
            })
        };
        records.push(TelemetryRecord {
            time_s: num(0)?,
            segment: SegmentId::new(fields[1].trim()),
            speed_kmh: num(2)?,
            control_input: num(3)?,
            share: num(4)?,
            setpoint: num(5)?,
            human_out_w: num(6)?,
            motor_out_w: num(7)?,
            ventilation_lpm: num(8)?,
            heart_rate_bpm: num(9)?,
            budget_wh: num(10)?,
            assist_fraction: num(11)?,
        });
    }
    Ok(records)
}

pub fn read_csv(path: impl AsRef<Path>) -> Result<Vec<TelemetryRecord>> {
    from_csv(&std::fs::read_to_string(path)?)
}

/// Aggregated quantities recomputed from telemetry.
#[derive(Debug, Clone)]
pub struct Summary {
    /// Mean ventilation per distinct setpoint level, settling excluded.
    pub mean_ventilation_by_setpoint: BTreeMap<String, f64>,
    /// Relative spread between the highest and lowest level means, percent.
    pub ventilation_reduction_pct: f64,
    /// RMS tracking error of the share, settling excluded.
    pub tracking_rmse: f64,
    /// Battery energy drawn over the run.
    pub energy_used_wh: f64,
}

impl Summary {
    pub fn to_json(&self) -> String {
        let means: serde_json::Map<String, serde_json::Value> = self
            .mean_ventilation_by_setpoint
            .iter()
            .map(|(k, v)| (k.clone(), json!(v)))
            .collect();
        serde_json::to_string_pretty(&json!({
            "mean_ventilation_by_setpoint": means,
            "ventilation_reduction_pct": self.ventilation_reduction_pct,
            "tracking_rmse": self.tracking_rmse,
            "energy_used_wh": self.energy_used_wh,
        }))
        .expect("summary serializes")
    }
}

/// Recompute the run summary from telemetry. The first `settle_s` seconds
/// after every setpoint change (and after the start) are excluded from the
/// per-level ventilation means and the tracking error.
pub fn summarize(records: &[TelemetryRecord], settle_s: f64) -> Summary {
    let mut by_level: BTreeMap<String, (f64, u64)> = BTreeMap::new();
    let mut err_sq = 0.0;
    let mut err_n = 0u64;
    let mut plateau_start = records.first().map(|r| r.time_s).unwrap_or(0.0);
    let mut last_setpoint = f64::NAN;

    for r in records {
        let changed = !(r.setpoint == last_setpoint
            || (r.setpoint.is_nan() && last_setpoint.is_nan()));
        if changed {
            plateau_start = r.time_s;
            last_setpoint = r.setpoint;
        }
        if r.time_s - plateau_start < settle_s {
            continue;
        }
        if r.setpoint.is_nan() {
            continue;
        }
        let key = format!("{:.3}", r.setpoint);
        let entry = by_level.entry(key).or_insert((0.0, 0));
        entry.0 += r.ventilation_lpm;
        entry.1 += 1;
        err_sq += (r.share - r.setpoint) * (r.share - r.setpoint);
        err_n += 1;
    }

    let mean_ventilation_by_setpoint: BTreeMap<String, f64> = by_level
        .into_iter()
        .map(|(k, (sum, n))| (k, sum / n as f64))
        .collect();

    let reduction = {
        let mut max = f64::NEG_INFINITY;
        let mut min = f64::INFINITY;
        for &v in mean_ventilation_by_setpoint.values() {
            max = max.max(v);
            min = min.min(v);
        }
        if mean_ventilation_by_setpoint.len() >= 2 && max > 0.0 {
            (max - min) / max * 100.0
        } else {
            0.0
        }
    };

    let energy_used_wh = match (records.first(), records.last()) {
        // No motor draw can happen on the very first tick (the control
        // input starts at zero), so the first row still shows the initial
        // budget.
        (Some(first), Some(last)) => first.budget_wh - last.budget_wh,
        _ => 0.0,
    };

    Summary {
        mean_ventilation_by_setpoint,
        ventilation_reduction_pct: reduction,
        tracking_rmse: if err_n > 0 {
            (err_sq / err_n as f64).sqrt()
        } else {
            0.0
        },
        energy_used_wh,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn record(t: f64, setpoint: f64, vent: f64) -> TelemetryRecord {
        TelemetryRecord {
            time_s: t,
            segment: SegmentId::new("a"),
            speed_kmh: 20.0,
            control_input: 1.0,
            share: setpoint + 0.01,
            setpoint,
            human_out_w: 100.0,
            motor_out_w: 50.0,
            ventilation_lpm: vent,
            heart_rate_bpm: 90.0,
            budget_wh: 10.0,
            assist_fraction: 0.5,
        }
    }

    #[test]
    fn csv_round_trip_preserves_records() {
        let records = vec![record(0.0, 0.9, 40.0), record(0.1, 0.9, 41.0)];
        let parsed = from_csv(&to_csv(&records)).unwrap();
        assert_eq!(parsed.len(), 2);
        assert_eq!(parsed[0].segment, SegmentId::new("a"));
        assert!((parsed[1].ventilation_lpm - 41.0).abs() < 1e-9);
    }

    #[test]
    fn csv_nan_setpoint_round_trips() {
        let mut r = record(0.0, f64::NAN, 40.0);
        r.share = 0.5;
        let parsed = from_csv(&to_csv(&[r])).unwrap();
        assert!(parsed[0].setpoint.is_nan());
    }

    #[test]
    fn csv_rejects_wrong_header() {
        assert!(matches!(
            from_csv("a,b,c\n"),
            Err(Error::TelemetryParse { line: 1, .. })
        ));
    }

    #[test]
    fn summary_groups_by_setpoint_after_settling() {
        let mut records = Vec::new();
        for k in 0..1000 {
            let t = k as f64 * 0.1;
            let (sp, v) = if t < 50.0 { (0.9, 60.0) } else { (0.3, 40.0) };
            records.push(record(t, sp, v));
        }
        let summary = summarize(&records, 30.0);
        assert_eq!(summary.mean_ventilation_by_setpoint.len(), 2);
        assert!((summary.mean_ventilation_by_setpoint["0.900"] - 60.0).abs() < 1e-9);
        assert!((summary.mean_ventilation_by_setpoint["0.300"] - 40.0).abs() < 1e-9);
        assert!((summary.ventilation_reduction_pct - 100.0 * 20.0 / 60.0).abs() < 1e-9);
        assert!((summary.tracking_rmse - 0.01).abs() < 1e-9);
    }

    #[test]
    fn summary_json_has_required_fields() {
        let summary = summarize(&[record(0.0, 0.9, 40.0)], 0.0);
        let text = summary.to_json();
        for field in [
            "mean_ventilation_by_setpoint",
            "ventilation_reduction_pct",
            "tracking_rmse",
            "energy_used_wh",
        ] {
            assert!(text.contains(field), "missing {field}");
        }
    }
}
