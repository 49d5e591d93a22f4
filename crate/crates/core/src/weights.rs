//! Frequency weights for the interpolation certificate.
//!
//! Each margin mode induces a weight `phi(omega)` equal to the reciprocal
//! distance from the shift value `T0(i omega)` to the forbidden set at that
//! frequency, floored at a small `eps` so that its logarithm stays integrable
//! and the resulting controller is realizable.

use crate::error::{Error, Result};
use crate::rational::RationalFunction;
use crate::regions::{
    dist_to_cut, dist_to_gain_set, dist_to_phase_set, dist_to_simultaneous, SimultaneousRegion,
};
use crate::C64;
use std::f64::consts::PI;

pub const DEFAULT_FLOOR_EPS: f64 = 1e-4;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum WeightMode {
    /// Pure delay margin.
    Delay,
    /// Independent gain, phase, and delay margins: the weight is the maximum
    /// of the three reciprocal distances.
    Independent { gain_k: f64, phase_phi: f64 },
    /// Simultaneous gain/phase/delay disturbances acting together.
    Simultaneous { gain_k: f64, phase_phi: f64 },
}

/// Everything needed to evaluate a weight: delay horizon, shift, floor, mode.
#[derive(Debug, Clone)]
pub struct WeightSpec {
    pub tau_bar: f64,
    pub shift: RationalFunction<f64>,
    pub floor_eps: f64,
    pub mode: WeightMode,
}

impl WeightSpec {
    pub fn new(
        tau_bar: f64,
        shift: RationalFunction<f64>,
        floor_eps: f64,
        mode: WeightMode,
    ) -> Result<Self> {
        if tau_bar < 0.0 || !tau_bar.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "delay horizon {tau_bar} must be finite and nonnegative"
            )));
        }
        if floor_eps <= 0.0 {
            return Err(Error::InvalidParameter(format!(
                "weight floor {floor_eps} must be positive"
            )));
        }
        match shift.value_at_infinity() {
            Some(v) if v < 0.5 => {}
            Some(v) => return Err(Error::ShiftInvalid(v)),
            None => {
                return Err(Error::InvalidParameter(
                    "shift must be proper (bounded at infinity)".into(),
                ))
            }
        }
        match mode {
            WeightMode::Delay => {}
            WeightMode::Independent { gain_k, phase_phi }
            | WeightMode::Simultaneous { gain_k, phase_phi } => {
                if gain_k < 1.0 {
                    return Err(Error::InvalidGain(gain_k));
                }
                if !(0.0..2.0 * PI).contains(&phase_phi) {
                    return Err(Error::InvalidParameter(format!(
                        "phase margin {phase_phi} outside [0, 2 pi)"
                    )));
                }
            }
        }
        Ok(WeightSpec {
            tau_bar,
            shift,
            floor_eps,
            mode,
        })
    }

    pub fn delay(tau_bar: f64, shift: RationalFunction<f64>) -> Result<Self> {
        WeightSpec::new(tau_bar, shift, DEFAULT_FLOOR_EPS, WeightMode::Delay)
    }
}

/// Immutable weight evaluator. Evaluation is pure; errors signal the shift
/// touching a forbidden set, which genuinely invalidates the certificate at
/// this delay horizon.
#[derive(Debug, Clone)]
pub struct WeightFunction {
    pub spec: WeightSpec,
}

impl WeightFunction {
    pub fn new(spec: WeightSpec) -> Self {
        WeightFunction { spec }
    }

    pub fn eval(&self, omega: f64) -> Result<f64> {
        match self.spec.mode {
            WeightMode::Delay => phi_shifted(&self.spec, omega),
            WeightMode::Independent { .. } => phi_multi_independent(&self.spec, omega),
            WeightMode::Simultaneous { .. } => phi_multi_simultaneous(&self.spec, omega),
        }
    }

    /// Known kink frequencies (positive side), used as mandatory quadrature
    /// panel breaks and constraint-grid refinement points.
    pub fn breakpoints(&self) -> Vec<f64> {
        let mut pts = vec![0.0];
        let tau = self.spec.tau_bar;
        if tau > 0.0 {
            pts.push(PI / tau);
            pts.push(2.0 * PI / tau);
            // where the raw delay weight crosses the floor
            let x = 2.0 * (self.spec.floor_eps / 2.0).min(1.0).asin() / tau;
            if x > 0.0 {
                pts.push(x);
            }
            if let WeightMode::Independent { phase_phi, .. }
            | WeightMode::Simultaneous { phase_phi, .. } = self.spec.mode
            {
                for target in [PI, 2.0 * PI] {
                    let w = (target - phase_phi) / tau;
                    if w > 0.0 {
                        pts.push(w);
                    }
                }
                let w = (2.0 * PI - 2.0 * phase_phi) / tau;
                if w > 0.0 {
                    pts.push(w);
                }
            }
        }
        pts
    }
}

fn shift_at(spec: &WeightSpec, omega: f64) -> Result<C64> {
    spec.shift.eval(C64::new(0.0, omega))
}

/// Raw (unfloored, unshifted) delay weight.
pub fn phi_delay(tau_bar: f64, omega: f64) -> f64 {
    let x = omega * tau_bar;
    if x.abs() <= PI {
        2.0 * (x / 2.0).sin().abs()
    } else {
        2.0
    }
}

/// Shifted delay weight: floored reciprocal distance from `T0(i omega)` to
/// the cut with parameter `omega * tau_bar`.
pub fn phi_shifted(spec: &WeightSpec, omega: f64) -> Result<f64> {
    let t0 = shift_at(spec, omega)?;
    let d = dist_to_cut(omega * spec.tau_bar, t0);
    if d == 0.0 {
        return Err(Error::ShiftHitsCut(omega));
    }
    Ok(spec.floor_eps.max(1.0 / d))
}

/// Independent-margin weight: max of the gain, phase, and delay reciprocal
/// distances around `T0(i omega)`.
pub fn phi_multi_independent(spec: &WeightSpec, omega: f64) -> Result<f64> {
    let (gain_k, phase_phi) = match spec.mode {
        WeightMode::Independent { gain_k, phase_phi } => (gain_k, phase_phi),
        _ => {
            return Err(Error::InvalidParameter(
                "weight spec is not in independent-margin mode".into(),
            ))
        }
    };
    let t0 = shift_at(spec, omega)?;
    let mut w = spec.floor_eps;
    if gain_k > 1.0 {
        let d = dist_to_gain_set(gain_k, t0)?;
        if d == 0.0 {
            return Err(Error::ShiftHitsRegion(omega));
        }
        w = w.max(1.0 / d);
    }
    if phase_phi > 0.0 {
        let d = dist_to_phase_set(phase_phi, t0);
        if d == 0.0 {
            return Err(Error::ShiftHitsRegion(omega));
        }
        w = w.max(1.0 / d);
    }
    let d = dist_to_cut(omega * spec.tau_bar, t0);
    if d == 0.0 {
        return Err(Error::ShiftHitsRegion(omega));
    }
    w = w.max(1.0 / d);
    Ok(w)
}

/// Simultaneous-margin weight: reciprocal distance to the combined region.
pub fn phi_multi_simultaneous(spec: &WeightSpec, omega: f64) -> Result<f64> {
    let (gain_k, phase_phi) = match spec.mode {
        WeightMode::Simultaneous { gain_k, phase_phi } => (gain_k, phase_phi),
        _ => {
            return Err(Error::InvalidParameter(
                "weight spec is not in simultaneous-margin mode".into(),
            ))
        }
    };
    let t0 = shift_at(spec, omega)?;
    if gain_k == 1.0 && phase_phi == 0.0 {
        // region degenerates to the pure-delay cut
        let d = dist_to_cut(omega * spec.tau_bar, t0);
        if d == 0.0 {
            return Err(Error::ShiftHitsRegion(omega));
        }
        return Ok(spec.floor_eps.max(1.0 / d));
    }
    let region = SimultaneousRegion::new(gain_k, phase_phi, spec.tau_bar, omega)?;
    let d = dist_to_simultaneous(&region, t0);
    if d == 0.0 {
        return Err(Error::ShiftHitsRegion(omega));
    }
    Ok(spec.floor_eps.max(1.0 / d))
}

/// Scan for log-integrability. The floor makes the weight bounded below, so
/// the only failure mode is an unbounded weight, which signals the shift
/// approaching the forbidden set somewhere on the axis.
pub fn log_integrability_check(w: &WeightFunction) -> bool {
    let mut grid: Vec<f64> = vec![0.0];
    for i in 0..=400 {
        let x = 10f64.powf(-6.0 + 12.0 * i as f64 / 400.0);
        grid.push(x);
        grid.push(-x);
    }
    for b in w.breakpoints() {
        grid.push(b);
        grid.push(-b);
    }
    for omega in grid {
        match w.eval(omega) {
            Ok(v) if v <= 1e12 => {}
            _ => return false,
        }
    }
    true
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::RationalFunction;
    use approx::assert_relative_eq;

    type R = RationalFunction<f64>;

    fn delay_spec(tau: f64) -> WeightSpec {
        WeightSpec::delay(tau, R::zero()).unwrap()
    }

    #[test]
    fn delay_weight_values() {
        assert_relative_eq!(phi_delay(1.0, PI), 2.0);
        assert_relative_eq!(phi_delay(1.0, 0.0), 0.0);
        assert_relative_eq!(phi_delay(1.0, 10.0), 2.0);
        assert_relative_eq!(phi_delay(1.0, PI / 2.0), 2.0 * (PI / 4.0).sin());
    }

    #[test]
    fn shifted_weight_reduces_to_delay_weight() {
        let spec = delay_spec(1.0);
        for &omega in &[0.3, 1.0, PI / 2.0, 2.0, 5.0, 40.0] {
            assert_relative_eq!(
                phi_shifted(&spec, omega).unwrap(),
                phi_delay(1.0, omega).max(spec.floor_eps),
                epsilon = 1e-13
            );
        }
        // floored at omega = 0
        assert_relative_eq!(phi_shifted(&spec, 0.0).unwrap(), 1e-4);
    }

    #[test]
    fn shifted_weight_constant_shift() {
        let spec = WeightSpec::delay(1.0, R::constant(-10.0)).unwrap();
        assert_relative_eq!(
            phi_shifted(&spec, PI).unwrap(),
            1.0 / 10.5,
            epsilon = 1e-12
        );
    }

    #[test]
    fn improper_or_large_shift_rejected() {
        assert!(matches!(
            WeightSpec::delay(1.0, R::constant(0.6)),
            Err(Error::ShiftInvalid(_))
        ));
        let improper = R::new(
            crate::Poly::new(vec![0.0, 0.0, 1.0]),
            crate::Poly::new(vec![1.0, 1.0]),
        );
        assert!(WeightSpec::delay(1.0, improper).is_err());
    }

    #[test]
    fn independent_weight_cases() {
        let spec = WeightSpec::new(
            1e-12,
            R::zero(),
            1e-4,
            WeightMode::Independent {
                gain_k: 2.0,
                phase_phi: 0.0,
            },
        )
        .unwrap();
        assert_relative_eq!(phi_multi_independent(&spec, 3.0).unwrap(), 1.0);

        let spec = WeightSpec::new(
            0.0,
            R::zero(),
            1e-4,
            WeightMode::Independent {
                gain_k: 1.0,
                phase_phi: PI / 2.0,
            },
        )
        .unwrap();
        assert_relative_eq!(
            phi_multi_independent(&spec, 7.0).unwrap(),
            2.0 * (PI / 4.0).sin(),
            epsilon = 1e-12
        );

        let spec = WeightSpec::new(
            1.0,
            R::zero(),
            1e-4,
            WeightMode::Independent {
                gain_k: 2.0,
                phase_phi: PI / 2.0,
            },
        )
        .unwrap();
        // delay cut empty at omega = 0: max(1, sqrt 2)
        assert_relative_eq!(
            phi_multi_independent(&spec, 0.0).unwrap(),
            2f64.sqrt(),
            epsilon = 1e-12
        );
    }

    #[test]
    fn simultaneous_reduces_to_shifted() {
        let spec = WeightSpec::new(
            1.0,
            R::zero(),
            1e-4,
            WeightMode::Simultaneous {
                gain_k: 1.0,
                phase_phi: 0.0,
            },
        )
        .unwrap();
        let delay = delay_spec(1.0);
        for &omega in &[0.0, 0.5, 2.0, 10.0] {
            assert_relative_eq!(
                phi_multi_simultaneous(&spec, omega).unwrap(),
                phi_shifted(&delay, omega).unwrap(),
                epsilon = 1e-13
            );
        }
    }

    #[test]
    fn dominance_and_floor() {
        let ind = WeightSpec::new(
            1.0,
            R::zero(),
            1e-4,
            WeightMode::Independent {
                gain_k: 1.5,
                phase_phi: PI / 12.0,
            },
        )
        .unwrap();
        let sim = WeightSpec::new(
            1.0,
            R::zero(),
            1e-4,
            WeightMode::Simultaneous {
                gain_k: 1.5,
                phase_phi: PI / 12.0,
            },
        )
        .unwrap();
        let delay = delay_spec(1.0);
        for i in 0..200 {
            let omega = 10f64.powf(-3.0 + 6.0 * i as f64 / 199.0);
            let wd = phi_shifted(&delay, omega).unwrap();
            let wi = phi_multi_independent(&ind, omega).unwrap();
            let ws = phi_multi_simultaneous(&sim, omega).unwrap();
            assert!(wi >= wd - 1e-12, "omega={omega}");
            assert!(ws >= wi - 1e-9, "omega={omega}: {ws} < {wi}");
            assert!(wd >= 1e-4 && wi >= 1e-4 && ws >= 1e-4);
        }
    }

    #[test]
    fn monotone_in_tau() {
        for i in 0..50 {
            let omega = 10f64.powf(-2.0 + 4.0 * i as f64 / 49.0);
            let mut last = 0.0;
            for &tau in &[0.1, 0.5, 1.0, 2.0, 8.0] {
                let spec = delay_spec(tau);
                let v = phi_shifted(&spec, omega).unwrap();
                assert!(v >= last - 1e-13);
                last = v;
            }
        }
    }

    #[test]
    fn integrability_scan() {
        assert!(log_integrability_check(&WeightFunction::new(delay_spec(
            1.0
        ))));
        // shift close to Re = 1/2 where the cut is a full line: unbounded
        let bad = WeightSpec::delay(1.0, R::constant(0.5 - 1e-14)).unwrap();
        assert!(!log_integrability_check(&WeightFunction::new(bad)));
    }

    #[test]
    fn evenness_for_real_shift() {
        let spec = WeightSpec::delay(0.7, R::constant(-2.0)).unwrap();
        let w = WeightFunction::new(spec);
        for &omega in &[0.1, 1.0, 3.3, 12.0] {
            assert_relative_eq!(
                w.eval(omega).unwrap(),
                w.eval(-omega).unwrap(),
                epsilon = 1e-13
            );
        }
    }
}
