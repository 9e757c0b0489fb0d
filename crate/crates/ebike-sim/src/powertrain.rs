//! Power accounting for the motor/rider drivetrain.
//!
//! Instantaneous input powers are scaled by component efficiencies into
//! output powers, smoothed by a first-order filter, windowed into moving
//! averages, and combined into the human power share `m` that the tracking
//! controller regulates.

use std::collections::VecDeque;

use crate::error::{Error, Result};

/// One sample of the motor electrical state.
#[derive(Debug, Clone, Copy)]
pub struct MotorSample {
    /// Motor supply voltage, volts.
    pub voltage: f64,
    /// Dimensionless control input; motor current is `current_gain * control_input`.
    pub control_input: f64,
    /// Amps per unit of control input.
    pub current_gain: f64,
    /// Motor efficiency in (0, 1].
    pub motor_efficiency: f64,
}

/// One sample of the crank state.
#[derive(Debug, Clone, Copy)]
pub struct CrankSample {
    /// Pedal torque, newton-meters.
    pub pedal_torque: f64,
    /// Pedal angular velocity, rad/s.
    pub pedal_speed: f64,
    /// Crankset efficiency in (0, 1].
    pub crank_efficiency: f64,
}

/// Electrical power into the motor: voltage times commanded current.
pub fn motor_input_power(sample: &MotorSample) -> f64 {
    sample.voltage * sample.current_gain * sample.control_input
}

/// Mechanical power from the rider at the pedals: torque times cadence.
pub fn human_input_power(sample: &CrankSample) -> f64 {
    sample.pedal_torque * sample.pedal_speed
}

/// Efficiency-scaled output powers `(motor, human)`. Their sum approximates
/// the power delivered at the rear wheel.
pub fn output_powers(motor: &MotorSample, crank: &CrankSample) -> (f64, f64) {
    (
        motor.motor_efficiency * motor_input_power(motor),
        crank.crank_efficiency * human_input_power(crank),
    )
}

/// First-order exponential smoothing: `alpha * raw + (1 - alpha) * previous`.
pub fn filter_power(previous_filtered: f64, raw: f64, alpha: f64) -> f64 {
    alpha * raw + (1.0 - alpha) * previous_filtered
}

/// Arithmetic mean of the window contents.
pub fn moving_average(window: &[f64]) -> Result<f64> {
    if window.is_empty() {
        return Err(Error::EmptyWindow);
    }
    Ok(window.iter().sum::<f64>() / window.len() as f64)
}

/// Human power share `m = h / (m + h)` over averaged output powers.
///
/// When both averages sit below `dead_zone` watts the bike is effectively
/// stationary and the ratio is undefined; the previous share is held.
pub fn human_share(p_h_avg: f64, p_m_avg: f64, previous: f64, dead_zone: f64) -> f64 {
    if p_h_avg < dead_zone && p_m_avg < dead_zone {
        previous
    } else {
        p_h_avg / (p_m_avg + p_h_avg)
    }
}

/// Powertrain constants shared by a simulation run.
#[derive(Debug, Clone, Copy)]
pub struct PowertrainConfig {
    pub voltage: f64,
    pub current_gain: f64,
    pub motor_efficiency: f64,
    pub crank_efficiency: f64,
    /// Smoothing factor of the output-power filter, per tick.
    pub filter_alpha: f64,
    /// Moving-average window length in ticks.
    pub average_window: usize,
    /// Stationary dead zone for the share computation, watts.
    pub dead_zone_w: f64,
}

impl Default for PowertrainConfig {
    fn default() -> Self {
        PowertrainConfig {
            voltage: 36.0,
            current_gain: 1.0,
            motor_efficiency: 0.8,
            crank_efficiency: 0.95,
            filter_alpha: 0.2,
            average_window: 50,
            dead_zone_w: 1.0,
        }
    }
}

impl PowertrainConfig {
    pub fn validate(&self) -> Result<()> {
        let fail = |msg: &str| Err(Error::InvalidController(msg.to_string()));
        if !(self.voltage > 0.0) {
            return fail("voltage must be positive");
        }
        if !(self.current_gain >= 0.0) {
            return fail("current gain must be nonnegative");
        }
        if !(self.motor_efficiency > 0.0 && self.motor_efficiency <= 1.0) {
            return fail("motor efficiency must lie in (0, 1]");
        }
        if !(self.crank_efficiency > 0.0 && self.crank_efficiency <= 1.0) {
            return fail("crank efficiency must lie in (0, 1]");
        }
        if !(self.filter_alpha > 0.0 && self.filter_alpha <= 1.0) {
            return fail("filter alpha must lie in (0, 1]");
        }
        if self.average_window == 0 {
            return fail("moving-average window must hold at least one tick");
        }
        if !(self.dead_zone_w >= 0.0) {
            return fail("dead zone must be nonnegative");
        }
        Ok(())
    }
}

/// Filtered and averaged powers plus the share for one tick.
#[derive(Debug, Clone, Copy)]
pub struct PowerShares {
    pub motor_out_filtered_w: f64,
    pub human_out_filtered_w: f64,
    pub motor_out_avg_w: f64,
    pub human_out_avg_w: f64,
    pub share: f64,
}

/// Stateful filter/average pipeline owned by one simulation loop.
#[derive(Debug, Clone)]
pub struct PowerTracker {
    config: PowertrainConfig,
    filtered_motor: f64,
    filtered_human: f64,
    motor_window: VecDeque<f64>,
    human_window: VecDeque<f64>,
    share: f64,
}

impl PowerTracker {
    pub fn new(config: PowertrainConfig) -> Result<Self> {
        config.validate()?;
        Ok(PowerTracker {
            config,
            filtered_motor: 0.0,
            filtered_human: 0.0,
            motor_window: VecDeque::with_capacity(config.average_window),
            human_window: VecDeque::with_capacity(config.average_window),
            // Stationary start: no motor output yet, so treat the rider as
            // the sole power source until the dead zone clears.
            share: 1.0,
        })
    }

    pub fn config(&self) -> &PowertrainConfig {
        &self.config
    }

    /// Ingest one tick of raw output powers and update the share.
    pub fn step(&mut self, motor_out_w: f64, human_out_w: f64) -> PowerShares {
        self.filtered_motor = filter_power(self.filtered_motor, motor_out_w, self.config.filter_alpha);
        self.filtered_human = filter_power(self.filtered_human, human_out_w, self.config.filter_alpha);

        if self.motor_window.len() == self.config.average_window {
            self.motor_window.pop_front();
            self.human_window.pop_front();
        }
        self.motor_window.push_back(self.filtered_motor);
        self.human_window.push_back(self.filtered_human);

        let motor_avg = self.motor_window.iter().sum::<f64>() / self.motor_window.len() as f64;
        let human_avg = self.human_window.iter().sum::<f64>() / self.human_window.len() as f64;
        self.share = human_share(human_avg, motor_avg, self.share, self.config.dead_zone_w);

        PowerShares {
            motor_out_filtered_w: self.filtered_motor,
            human_out_filtered_w: self.filtered_human,
            motor_out_avg_w: motor_avg,
            human_out_avg_w: human_avg,
            share: self.share,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn motor(voltage: f64, gain: f64, y: f64) -> MotorSample {
        MotorSample {
            voltage,
            control_input: y,
            current_gain: gain,
            motor_efficiency: 0.8,
        }
    }

    fn crank(torque: f64, speed: f64) -> CrankSample {
        CrankSample {
            pedal_torque: torque,
            pedal_speed: speed,
            crank_efficiency: 0.95,
        }
    }

    #[test]
    fn motor_input_power_is_voltage_times_current() {
        assert_eq!(motor_input_power(&motor(36.0, 1.0, 5.0)), 180.0);
        assert_eq!(motor_input_power(&motor(36.0, 1.0, 0.0)), 0.0);
        assert_eq!(motor_input_power(&motor(36.0, 0.5, 10.0)), 180.0);
    }

    #[test]
    fn human_input_power_is_torque_times_cadence() {
        assert_eq!(human_input_power(&crank(20.0, 6.0)), 120.0);
        assert_eq!(human_input_power(&crank(20.0, 0.0)), 0.0);
        assert_eq!(human_input_power(&crank(15.0, 8.0)), 120.0);
    }

    #[test]
    fn output_powers_apply_efficiencies() {
        let (pm, ph) = output_powers(&motor(36.0, 1.0, 5.0), &crank(20.0, 6.0));
        assert!((pm - 144.0).abs() < 1e-12);
        assert!((ph - 114.0).abs() < 1e-12);
        let (pm0, ph0) = output_powers(&motor(36.0, 1.0, 0.0), &crank(0.0, 6.0));
        assert_eq!((pm0, ph0), (0.0, 0.0));
    }

    #[test]
    fn filter_passthrough_at_alpha_one() {
        assert_eq!(filter_power(42.0, 100.0, 1.0), 100.0);
    }

    #[test]
    fn filter_hand_value() {
        assert!((filter_power(0.0, 100.0, 0.1) - 10.0).abs() < 1e-12);
    }

    #[test]
    fn filter_converges_to_constant_input() {
        let mut v = 7.0;
        for _ in 0..200 {
            v = filter_power(v, 55.0, 0.2);
        }
        assert!((v - 55.0).abs() < 1e-9);
    }

    #[test]
    fn moving_average_basics() {
        assert_eq!(moving_average(&[100.0]).unwrap(), 100.0);
        assert_eq!(moving_average(&[0.0, 100.0]).unwrap(), 50.0);
        assert_eq!(moving_average(&[3.0; 17]).unwrap(), 3.0);
        assert!(matches!(moving_average(&[]), Err(Error::EmptyWindow)));
    }

    #[test]
    fn share_full_modes() {
        assert_eq!(human_share(114.0, 0.0, 0.3, 1.0), 1.0);
        assert_eq!(human_share(0.0, 144.0, 0.3, 1.0), 0.0);
        assert!((human_share(60.0, 120.0, 0.3, 1.0) - 1.0 / 3.0).abs() < 1e-12);
    }

    #[test]
    fn share_dead_zone_holds_previous() {
        assert_eq!(human_share(0.4, 0.2, 0.73, 1.0), 0.73);
        // Either side clearing the dead zone re-enables the ratio.
        assert_eq!(human_share(2.0, 0.0, 0.73, 1.0), 1.0);
    }

    #[test]
    fn tracker_reaches_share_of_constant_inputs() {
        let mut tracker = PowerTracker::new(PowertrainConfig::default()).unwrap();
        let mut last = None;
        for _ in 0..400 {
            last = Some(tracker.step(120.0, 60.0));
        }
        let shares = last.unwrap();
        assert!((shares.share - 1.0 / 3.0).abs() < 1e-6);
        assert!((shares.motor_out_avg_w - 120.0).abs() < 1e-6);
        assert!((shares.human_out_avg_w - 60.0).abs() < 1e-6);
    }

    #[test]
    fn tracker_rejects_bad_config() {
        let mut cfg = PowertrainConfig::default();
        cfg.filter_alpha = 0.0;
        assert!(PowerTracker::new(cfg).is_err());
        let mut cfg = PowertrainConfig::default();
        cfg.average_window = 0;
        assert!(PowerTracker::new(cfg).is_err());
    }
}
