//! Assistance control laws.
//!
//! Three layers live here: the low-level integral law that regulates the
//! human power share toward a setpoint, the consensus setpoint filter and
//! its reference-tracking variant, and the pitchfork cooperation dynamics
//! that gate motor output on rider effort.

use crate::error::{Error, Result};

/// State of the low-level integral tracking law.
#[derive(Debug, Clone, Copy)]
pub struct TrackingState {
    control_input: f64,
    gain: f64,
    max_control: f64,
}

impl TrackingState {
    pub fn new(initial: f64, gain: f64, max_control: f64) -> Result<Self> {
        if !(gain > 0.0) {
            return Err(Error::InvalidController(format!(
                "tracking gain must be positive, got {gain}"
            )));
        }
        if !(max_control > 0.0) {
            return Err(Error::InvalidController(format!(
                "control saturation bound must be positive, got {max_control}"
            )));
        }
        if !(0.0..=max_control).contains(&initial) {
            return Err(Error::InvalidController(format!(
                "initial control input {initial} outside [0, {max_control}]"
            )));
        }
        Ok(TrackingState {
            control_input: initial,
            gain,
            max_control,
        })
    }

    pub fn control_input(&self) -> f64 {
        self.control_input
    }

    pub fn force_off(&mut self) {
        self.control_input = 0.0;
    }

    /// One update of the integral law with error `m_star - m_measured`.
    ///
    /// A higher control input raises motor output and therefore lowers the
    /// measured share, so subtracting the scaled error moves the share
    /// toward the setpoint. The result saturates at `[0, max_control]` to
    /// prevent windup.
    pub fn step(&mut self, m_measured: f64, m_star: f64) -> f64 {
        let error = m_star - m_measured;
        self.control_input = (self.control_input - self.gain * error).clamp(0.0, self.max_control);
        self.control_input
    }
}

/// Consensus setpoint filter state.
#[derive(Debug, Clone, Copy)]
pub struct ConsensusState {
    setpoint: f64,
    alpha: f64,
}

impl ConsensusState {
    pub fn new(setpoint: f64, alpha: f64) -> Result<Self> {
        if !(alpha > 0.0 && alpha < 1.0) {
            return Err(Error::InvalidAlpha(alpha));
        }
        if !(0.0..=1.0).contains(&setpoint) {
            return Err(Error::InvalidController(format!(
                "setpoint {setpoint} outside [0, 1]"
            )));
        }
        Ok(ConsensusState { setpoint, alpha })
    }

    pub fn setpoint(&self) -> f64 {
        self.setpoint
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    /// Averaging step toward the motor-share complement:
    /// `m' = (1 - alpha) + (2 alpha - 1) m`. Iterates converge to 0.5.
    pub fn consensus_step(&mut self) -> f64 {
        self.setpoint = (1.0 - self.alpha) + (2.0 * self.alpha - 1.0) * self.setpoint;
        self.setpoint
    }

    /// Reference-tracking variant: `m' = (2 alpha - 1) m + 2 (1 - alpha) o`.
    /// For a piecewise-constant reference the iterates converge to each
    /// plateau value. Transients may leave [0, 1] when `alpha < 0.5`; the
    /// update is left unclamped so the geometric error decay is exact.
    pub fn tracking_step(&mut self, reference: f64) -> f64 {
        self.setpoint =
            (2.0 * self.alpha - 1.0) * self.setpoint + 2.0 * (1.0 - self.alpha) * reference;
        self.setpoint
    }
}

/// Piecewise-linear cooperation gain over human output power.
///
/// The curve is pinned to zero at zero effort and must be strictly
/// positive everywhere beyond, so the motor only engages when the rider
/// pedals, and backs off gradually instead of cutting out.
#[derive(Debug, Clone)]
pub struct CooperationGain {
    /// `(effort watts, gain)` pairs with strictly increasing effort,
    /// starting at `(0, 0)`. Beyond the last point the gain is constant.
    breakpoints: Vec<(f64, f64)>,
}

impl CooperationGain {
    pub fn new(breakpoints: Vec<(f64, f64)>) -> Result<Self> {
        let fail = |msg: String| Err(Error::InvalidGainProfile(msg));
        if breakpoints.len() < 2 {
            return fail("profile needs at least two breakpoints".into());
        }
        if breakpoints[0] != (0.0, 0.0) {
            return fail("profile must start at (0, 0)".into());
        }
        for pair in breakpoints.windows(2) {
            if !(pair[1].0 > pair[0].0) {
                return fail(format!(
                    "breakpoint abscissae must strictly increase ({} then {})",
                    pair[0].0, pair[1].0
                ));
            }
        }
        for &(chi, value) in &breakpoints[1..] {
            if !value.is_finite() || value <= 0.0 {
                return fail(format!("gain must be positive for effort {chi} > 0"));
            }
        }
        Ok(CooperationGain { breakpoints })
    }

    /// Default profile: cooperative ramp to the plateau, then a gradual
    /// competitive decay to a small floor that keeps the gain positive.
    pub fn standard() -> Self {
        CooperationGain::new(vec![
            (0.0, 0.0),
            (50.0, 400.0),
            (250.0, 400.0),
            (400.0, 1.0),
        ])
        .expect("standard profile is valid")
    }

    pub fn breakpoints(&self) -> &[(f64, f64)] {
        &self.breakpoints
    }

    /// Largest gain value the profile can produce.
    pub fn max_gain(&self) -> f64 {
        self.breakpoints
            .iter()
            .map(|&(_, v)| v)
            .fold(0.0, f64::max)
    }

    /// Interpolated gain at the given human output power.
    pub fn evaluate(&self, effort_w: f64) -> f64 {
        let effort = effort_w.max(0.0);
        let last = self.breakpoints[self.breakpoints.len() - 1];
        if effort >= last.0 {
            return last.1;
        }
        for pair in self.breakpoints.windows(2) {
            let (x0, y0) = pair[0];
            let (x1, y1) = pair[1];
            if effort <= x1 {
                let t = (effort - x0) / (x1 - x0);
                return y0 + t * (y1 - y0);
            }
        }
        last.1
    }
}

/// State of the pitchfork cooperation dynamics for the motor output power.
#[derive(Debug, Clone)]
pub struct BifurcationState {
    motor_out_w: f64,
    dt: f64,
    profile: CooperationGain,
}

impl BifurcationState {
    /// Default initial motor output. Zero is an invariant equilibrium, so
    /// assistance must start from a small positive seed.
    pub const INITIAL_OUTPUT_W: f64 = 0.1;

    /// Default integration step, safely below the bound for the standard
    /// profile (1/400 s).
    pub const DEFAULT_DT_S: f64 = 0.001;

    /// Explicit Euler is stable at the high equilibrium only for
    /// `dt <= 1 / max_gain`: the linearization there has eigenvalue
    /// `-2 f`, and at equality the cubic term still contracts.
    pub fn stability_bound(profile: &CooperationGain) -> f64 {
        1.0 / profile.max_gain()
    }

    pub fn new(initial_output_w: f64, dt: f64, profile: CooperationGain) -> Result<Self> {
        if !(initial_output_w >= 0.0) {
            return Err(Error::InvalidController(format!(
                "motor output must be nonnegative, got {initial_output_w}"
            )));
        }
        let bound = Self::stability_bound(&profile);
        if !(dt > 0.0) || dt > bound {
            return Err(Error::StepSizeTooLarge { dt, bound });
        }
        Ok(BifurcationState {
            motor_out_w: initial_output_w,
            dt,
            profile,
        })
    }

    pub fn motor_out_w(&self) -> f64 {
        self.motor_out_w
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn profile(&self) -> &CooperationGain {
        &self.profile
    }

    /// One Euler step of `dP/dt = f(effort) P - P^3`, clamped at zero.
    ///
    /// With zero effort the output decays to zero; with constant positive
    /// effort it converges to `sqrt(f(effort))`.
    pub fn step(&mut self, human_out_w: f64) -> f64 {
        let gain = self.profile.evaluate(human_out_w);
        let p = self.motor_out_w;
        self.motor_out_w = (p + self.dt * (gain * p - p * p * p)).max(0.0);
        self.motor_out_w
    }
}
