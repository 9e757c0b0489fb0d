//! Synthetic rider closing the loop.
//!
//! The rider holds a target speed, so required wheel power is an input and
//! pedal effort is whatever the motor leaves over (or more, when riding
//! competitively). Ventilation and heart rate relax first-order toward
//! affine functions of human output power, with the ventilation time
//! constant chosen so 95% settling lands near two minutes.

use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use crate::error::{Error, Result};

/// How the rider reacts to motor assistance.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Behavior {
    /// Effort yields fully to assistance: pedal only the shortfall.
    Cooperative,
    /// Effort yields only partially to assistance.
    Competitive,
}

/// Rider constants for one scenario.
#[derive(Debug, Clone)]
pub struct CyclistParams {
    pub target_speed_kmh: f64,
    pub resting_ventilation_lpm: f64,
    pub ventilation_gain_lpm_per_w: f64,
    pub ventilation_time_constant_s: f64,
    pub heart_rate_rest_bpm: f64,
    pub heart_rate_gain_bpm_per_w: f64,
    pub heart_rate_time_constant_s: f64,
    pub behavior: Behavior,
    pub effort_noise_std_w: f64,
    /// Fraction of assistance a competitive rider yields to.
    pub competitive_yield: f64,
    /// Linear coefficient of required wheel power, W per (m/s).
    pub power_linear_w_per_mps: f64,
    /// Cubic coefficient of required wheel power, W per (m/s)^3.
    pub power_cubic_w_per_mps3: f64,
    /// Pedal cadence used to translate effort into crank torque, rad/s.
    pub cadence_rad_per_s: f64,
}

impl Default for CyclistParams {
    fn default() -> Self {
        CyclistParams {
            target_speed_kmh: 20.0,
            resting_ventilation_lpm: 24.0,
            ventilation_gain_lpm_per_w: 0.1875,
            ventilation_time_constant_s: 40.0,
            heart_rate_rest_bpm: 60.0,
            heart_rate_gain_bpm_per_w: 0.45,
            heart_rate_time_constant_s: 25.0,
            behavior: Behavior::Cooperative,
            effort_noise_std_w: 0.0,
            competitive_yield: 0.3,
            power_linear_w_per_mps: 27.0,
            power_cubic_w_per_mps3: 0.2,
            cadence_rad_per_s: 8.4,
        }
    }
}

impl CyclistParams {
    pub fn validate(&self) -> Result<()> {
        let fail = |msg: String| Err(Error::InvalidCyclist(msg));
        if !(self.target_speed_kmh >= 0.0) {
            return fail(format!("target speed must be nonnegative, got {}", self.target_speed_kmh));
        }
        if !(self.resting_ventilation_lpm > 0.0) {
            return fail("resting ventilation must be positive".into());
        }
        if !(self.heart_rate_rest_bpm > 0.0) {
            return fail("resting heart rate must be positive".into());
        }
        if !(self.ventilation_gain_lpm_per_w >= 0.0) || !(self.heart_rate_gain_bpm_per_w >= 0.0) {
            return fail("physiological gains must be nonnegative".into());
        }
        if !(self.ventilation_time_constant_s > 0.0) || !(self.heart_rate_time_constant_s > 0.0) {
            return fail("time constants must be positive".into());
        }
        if !(self.effort_noise_std_w >= 0.0) {
            return fail("effort noise must be nonnegative".into());
        }
        if !(0.0..1.0).contains(&self.competitive_yield) {
            return fail(format!(
                "competitive yield must lie in [0, 1), got {}",
                self.competitive_yield
            ));
        }
        if !(self.power_linear_w_per_mps >= 0.0) || !(self.power_cubic_w_per_mps3 >= 0.0) {
            return fail("wheel power coefficients must be nonnegative".into());
        }
        if !(self.cadence_rad_per_s > 0.0) {
            return fail("cadence must be positive".into());
        }
        Ok(())
    }

    /// Wheel power needed to hold a speed on flat terrain.
    pub fn required_wheel_power_w(&self, speed_kmh: f64) -> f64 {
        let v = speed_kmh.max(0.0) / 3.6;
        self.power_linear_w_per_mps * v + self.power_cubic_w_per_mps3 * v * v * v
    }

    /// Steady-state ventilation at a constant human output power.
    pub fn steady_state_ventilation_lpm(&self, human_out_w: f64) -> f64 {
        self.resting_ventilation_lpm + self.ventilation_gain_lpm_per_w * human_out_w
    }

    /// Steady-state heart rate at a constant human output power.
    pub fn steady_state_heart_rate_bpm(&self, human_out_w: f64) -> f64 {
        self.heart_rate_rest_bpm + self.heart_rate_gain_bpm_per_w * human_out_w
    }
}

/// Evolving rider state. The seeded generator lives here so that identical
/// seeds reproduce identical effort sequences.
#[derive(Debug, Clone)]
pub struct CyclistState {
    pub ventilation_lpm: f64,
    pub heart_rate_bpm: f64,
    pub current_effort_w: f64,
    rng: ChaCha8Rng,
}

impl CyclistState {
    pub fn new(params: &CyclistParams, seed: u64) -> Self {
        use rand::SeedableRng;
        CyclistState {
            ventilation_lpm: params.resting_ventilation_lpm,
            heart_rate_bpm: params.heart_rate_rest_bpm,
            current_effort_w: 0.0,
            rng: ChaCha8Rng::seed_from_u64(seed),
        }
    }
}

/// Human output power for one tick, given the demanded wheel power and the
/// motor's current contribution.
pub fn pedal_effort(
    params: &CyclistParams,
    state: &mut CyclistState,
    required_wheel_power_w: f64,
    motor_output_w: f64,
) -> f64 {
    let yielded = match params.behavior {
        Behavior::Cooperative => motor_output_w,
        Behavior::Competitive => params.competitive_yield * motor_output_w,
    };
    let mut effort = (required_wheel_power_w - yielded).max(0.0);
    if params.effort_noise_std_w > 0.0 {
        let noise = Normal::new(0.0, params.effort_noise_std_w)
            .expect("validated std")
            .sample(&mut state.rng);
        effort = (effort + noise).max(0.0);
    }
    state.current_effort_w = effort;
    effort
}

/// Relax ventilation and heart rate toward their steady states for `dt`
/// seconds of constant human output power.
pub fn physiology_step(params: &CyclistParams, state: &mut CyclistState, human_out_w: f64, dt: f64) {
    debug_assert!(dt > 0.0);
    let v_ss = params.steady_state_ventilation_lpm(human_out_w);
    let decay_v = (-dt / params.ventilation_time_constant_s).exp();
    state.ventilation_lpm = v_ss + (state.ventilation_lpm - v_ss) * decay_v;

    let h_ss = params.steady_state_heart_rate_bpm(human_out_w);
    let decay_h = (-dt / params.heart_rate_time_constant_s).exp();
    state.heart_rate_bpm = h_ss + (state.heart_rate_bpm - h_ss) * decay_h;
}

/// One steady-state ventilation target for calibration.
#[derive(Debug, Clone, Copy)]
pub struct CalibrationTarget {
    pub speed_kmh: f64,
    pub m_star: f64,
    /// Acceptable steady-state ventilation band, l/min.
    pub band_lpm: (f64, f64),
}

impl CalibrationTarget {
    /// Human output power implied by the target operating point.
    fn human_power_w(&self, params: &CyclistParams) -> f64 {
        self.m_star * params.required_wheel_power_w(self.speed_kmh)
    }
}

/// Fit resting ventilation and ventilation gain so the steady states at the
/// target operating points land on the band midpoints (least squares), then
/// verify every target band is met. The ventilation time constant is pinned
/// at 40 s so 95% settling sits near 120 s.
///
/// A single target (or targets that all share one power level) leaves the
/// gain underdetermined; the current gain is kept and the resting level is
/// shifted to interpolate the midpoint exactly.
pub fn calibrate(params: &CyclistParams, targets: &[CalibrationTarget]) -> Result<CyclistParams> {
    if targets.is_empty() {
        return Err(Error::InfeasibleTargets("no targets supplied".into()));
    }
    for t in targets {
        if !(t.band_lpm.0 > 0.0) || !(t.band_lpm.1 >= t.band_lpm.0) {
            return Err(Error::InfeasibleTargets(format!(
                "band ({}, {}) is not a valid interval",
                t.band_lpm.0, t.band_lpm.1
            )));
        }
        if !(0.0..=1.0).contains(&t.m_star) {
            return Err(Error::InfeasibleTargets(format!(
                "setpoint {} outside [0, 1]",
                t.m_star
            )));
        }
    }

    let powers: Vec<f64> = targets.iter().map(|t| t.human_power_w(params)).collect();
    let mids: Vec<f64> = targets
        .iter()
        .map(|t| 0.5 * (t.band_lpm.0 + t.band_lpm.1))
        .collect();

    let n = powers.len() as f64;
    let sum_p: f64 = powers.iter().sum();
    let sum_pp: f64 = powers.iter().map(|p| p * p).sum();
    let sum_v: f64 = mids.iter().sum();
    let sum_pv: f64 = powers.iter().zip(&mids).map(|(p, v)| p * v).sum();
    let det = n * sum_pp - sum_p * sum_p;

    let mut fitted = params.clone();
    fitted.ventilation_time_constant_s = 40.0;
    if det.abs() < 1e-9 {
        // All targets at one power level: keep the gain, interpolate the
        // resting level through the mean midpoint.
        fitted.resting_ventilation_lpm =
            sum_v / n - fitted.ventilation_gain_lpm_per_w * sum_p / n;
    } else {
        fitted.ventilation_gain_lpm_per_w = (n * sum_pv - sum_p * sum_v) / det;
        fitted.resting_ventilation_lpm = (sum_v - fitted.ventilation_gain_lpm_per_w * sum_p) / n;
    }

    if !(fitted.resting_ventilation_lpm > 0.0) || fitted.ventilation_gain_lpm_per_w < 0.0 {
        return Err(Error::InfeasibleTargets(format!(
            "fit produced resting {} l/min and gain {} l/min/W",
            fitted.resting_ventilation_lpm, fitted.ventilation_gain_lpm_per_w
        )));
    }
    for (t, p) in targets.iter().zip(&powers) {
        let v = fitted.steady_state_ventilation_lpm(*p);
        if v < t.band_lpm.0 - 1e-9 || v > t.band_lpm.1 + 1e-9 {
            return Err(Error::InfeasibleTargets(format!(
                "steady state {v:.2} l/min at {} W misses band ({}, {})",
                p, t.band_lpm.0, t.band_lpm.1
            )));
        }
    }
    Ok(fitted)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cooperative_effort_is_the_shortfall() {
        let params = CyclistParams::default();
        let mut state = CyclistState::new(&params, 1);
        assert_eq!(pedal_effort(&params, &mut state, 180.0, 120.0), 60.0);
    }

    #[test]
    fn cooperative_effort_clamps_at_zero() {
        let params = CyclistParams::default();
        let mut state = CyclistState::new(&params, 1);
        assert_eq!(pedal_effort(&params, &mut state, 100.0, 140.0), 0.0);
    }

    #[test]
    fn competitive_effort_yields_partially() {
        let params = CyclistParams {
            behavior: Behavior::Competitive,
            ..CyclistParams::default()
        };
        let mut state = CyclistState::new(&params, 1);
        assert!((pedal_effort(&params, &mut state, 180.0, 120.0) - 144.0).abs() < 1e-12);
    }

    #[test]
    fn effort_noise_is_seed_deterministic() {
        let params = CyclistParams {
            effort_noise_std_w: 5.0,
            ..CyclistParams::default()
        };
        let run = |seed| {
            let mut state = CyclistState::new(&params, seed);
            (0..100)
                .map(|_| pedal_effort(&params, &mut state, 150.0, 30.0))
                .collect::<Vec<f64>>()
        };
        assert_eq!(run(7), run(7));
        assert_ne!(run(7), run(8));
    }

    #[test]
    fn ventilation_returns_to_rest() {
        let params = CyclistParams::default();
        let mut state = CyclistState::new(&params, 1);
        state.ventilation_lpm = 60.0;
        for _ in 0..10_000 {
            physiology_step(&params, &mut state, 0.0, 0.1);
        }
        assert!((state.ventilation_lpm - params.resting_ventilation_lpm).abs() < 1e-6);
    }

    #[test]
    fn one_time_constant_closes_632_permille_of_the_gap() {
        let params = CyclistParams::default();
        let mut state = CyclistState::new(&params, 1);
        let p = 100.0;
        let v0 = state.ventilation_lpm;
        let v_ss = params.steady_state_ventilation_lpm(p);
        let steps = (params.ventilation_time_constant_s / 0.1).round() as usize;
        for _ in 0..steps {
            physiology_step(&params, &mut state, p, 0.1);
        }
        let closed = (state.ventilation_lpm - v0) / (v_ss - v0);
        assert!((closed - 0.632).abs() < 0.001, "closed fraction {closed}");
    }

    #[test]
    fn full_human_twenty_kmh_reaches_paper_band() {
        let params = CyclistParams::default();
        let p = params.required_wheel_power_w(20.0);
        let v = params.steady_state_ventilation_lpm(p);
        assert!((55.0..=60.0).contains(&v), "steady ventilation {v}");
    }

    #[test]
    fn calibrate_reproduces_step_test_bands() {
        let params = CyclistParams::default();
        let targets = [
            CalibrationTarget {
                speed_kmh: 20.0,
                m_star: 0.9,
                band_lpm: (55.0, 60.0),
            },
            CalibrationTarget {
                speed_kmh: 20.0,
                m_star: 0.3,
                band_lpm: (35.0, 40.0),
            },
        ];
        let fitted = calibrate(&params, &targets).unwrap();
        for t in &targets {
            let v = fitted
                .steady_state_ventilation_lpm(t.m_star * fitted.required_wheel_power_w(t.speed_kmh));
            assert!(v >= t.band_lpm.0 && v <= t.band_lpm.1);
        }
        assert_eq!(fitted.ventilation_time_constant_s, 40.0);
    }

    #[test]
    fn calibrate_post_stop_band_adjusts_resting_level() {
        let params = CyclistParams::default();
        // Post-stop level: zero speed, so the steady state is the resting
        // ventilation regardless of the setpoint.
        let targets = [CalibrationTarget {
            speed_kmh: 0.0,
            m_star: 1.0,
            band_lpm: (25.0, 30.0),
        }];
        let fitted = calibrate(&params, &targets).unwrap();
        assert!((fitted.resting_ventilation_lpm - 27.5).abs() < 1e-9);
    }

    #[test]
    fn calibrate_single_target_interpolates_exactly() {
        let params = CyclistParams::default();
        let targets = [CalibrationTarget {
            speed_kmh: 20.0,
            m_star: 1.0,
            band_lpm: (50.0, 50.0),
        }];
        let fitted = calibrate(&params, &targets).unwrap();
        let v = fitted.steady_state_ventilation_lpm(fitted.required_wheel_power_w(20.0));
        assert!((v - 50.0).abs() < 1e-9);
        // Gain untouched by the degenerate fit.
        assert_eq!(
            fitted.ventilation_gain_lpm_per_w,
            params.ventilation_gain_lpm_per_w
        );
    }

    #[test]
    fn calibrate_rejects_conflicting_bands() {
        let params = CyclistParams::default();
        // Same operating point, disjoint bands.
        let targets = [
            CalibrationTarget {
                speed_kmh: 20.0,
                m_star: 0.5,
                band_lpm: (30.0, 31.0),
            },
            CalibrationTarget {
                speed_kmh: 20.0,
                m_star: 0.5,
                band_lpm: (50.0, 51.0),
            },
        ];
        assert!(matches!(
            calibrate(&params, &targets),
            Err(Error::InfeasibleTargets(_))
        ));
    }

    #[test]
    fn steady_states_are_affine_in_power() {
        let params = CyclistParams::default();
        let points: Vec<(f64, f64)> = [0.0, 50.0, 100.0, 150.0, 200.0]
            .iter()
            .map(|&p| {
                (
                    params.steady_state_heart_rate_bpm(p),
                    params.steady_state_ventilation_lpm(p),
                )
            })
            .collect();
        // Collinearity of all point triples.
        for w in points.windows(3) {
            let (h0, v0) = w[0];
            let (h1, v1) = w[1];
            let (h2, v2) = w[2];
            let cross = (h1 - h0) * (v2 - v0) - (h2 - h0) * (v1 - v0);
            assert!(cross.abs() < 1e-9);
        }
    }
}
