//! Controller realization from a certified interpolant, strict-properness
//! enforcement, and geometric verification of the achieved margins.

use crate::approx::MagnitudeApproxResult;
use crate::error::{Error, Result};
use crate::margin::{certify_at, MarginQuery, MarginReport, WeightBackend};
use crate::pick::max_entropy_interpolant;
use crate::rational::{Plant, Polynomial, RationalFunction};
use crate::regions::{
    dist_to_cut, dist_to_gain_set, dist_to_phase_set, dist_to_simultaneous, SimultaneousRegion,
};
use crate::weights::{WeightFunction, WeightMode, WeightSpec};
use crate::C64;

/// Fraction of the certified bound at which the controller is realized.
/// At the bound itself the interpolant saturates the unit ball, so the
/// realization sits strictly inside it.
pub const DEFAULT_SYNTHESIS_FRACTION: f64 = 0.98;

/// Tolerance on interpolation residuals and on the remainder of each
/// plant-factor cancellation, relative to the coefficient norm.
pub const CANCEL_TOL: f64 = 1e-6;

const VERIFY_GRID_POINTS: usize = 4096;
const AXIS_TOL: f64 = 1e-9;

/// A realized controller together with the closed loop it induces and the
/// data certifying it.
#[derive(Debug, Clone)]
pub struct ControllerRealization {
    /// The feedback controller.
    pub controller: RationalFunction<f64>,
    /// Achieved complementary sensitivity, analytic in the right half-plane.
    pub closed_loop: RationalFunction<f64>,
    /// Rational weight used to certify the realization.
    pub weight_fit: MagnitudeApproxResult,
    /// Certified `(gain, phase, delay)` margin triple.
    pub certified: (f64, f64, f64),
    /// Roots of `1 + P K`; internal stability means none lies in `Re >= 0`.
    pub loop_roots: Vec<C64>,
}

/// Outcome of re-deriving the margins of a closed loop from the forbidden-set
/// geometry on a dense frequency grid.
#[derive(Debug, Clone)]
pub struct VerificationReport {
    /// Smallest distance from the closed loop to the forbidden set.
    pub min_distance: f64,
    /// Frequency attaining the minimum.
    pub argmin_omega: f64,
    /// Value of the closed loop at infinity (real part bounds the method).
    pub infinity_value: f64,
    /// Largest interpolation residual at the plant's defining nodes.
    pub interp_residual: f64,
    /// True when the minimum distance clears the requested threshold and the
    /// interpolation conditions hold.
    pub pass: bool,
}

/// Realize the controller for a certified bound. Re-certifies the query at
/// `fraction * report.tau_bound` with its rational weight backend, builds the
/// closed loop `T = interpolant / weight + shift`, and inverts the plant on
/// the coprime representation with exact factor cancellation.
pub fn synthesize(
    q: &MarginQuery,
    report: &MarginReport,
    fraction: f64,
) -> Result<ControllerRealization> {
    if !matches!(q.backend, WeightBackend::RationalApprox { .. }) {
        return Err(Error::InvalidParameter(
            "controller synthesis needs a rational weight backend".into(),
        ));
    }
    if !(0.0 < fraction && fraction < 1.0) {
        return Err(Error::InvalidParameter(format!(
            "synthesis fraction {fraction} must lie in (0, 1)"
        )));
    }
    let tau = fraction * report.tau_bound;
    let cert = certify_at(q, tau, 1.0)?;
    if !cert.feasible {
        return Err(Error::Infeasible(cert.min_eigenvalue));
    }
    let problem = cert.problem.expect("feasible certificate carries its data");
    let fit = cert
        .weight_fit
        .expect("rational backend certificate carries its weight fit");

    let t_tilde = max_entropy_interpolant(&problem)?;
    let w = fit.rational();
    let t = t_tilde.mul(&w.inv()).add(&q.shift);

    check_analytic(&t)?;
    let resid = interpolation_residual(&t, &q.plant)?;
    if resid > CANCEL_TOL {
        return Err(Error::CancellationFailure(resid));
    }

    // K = P^{-1} T / (1 - T). The unstable plant poles are zeros of 1 - T
    // and the nonminimum-phase zeros are zeros of T, so the half-plane
    // factors of P cancel; perform those cancellations exactly.
    let mut t_num = t.num().clone();
    let mut one_minus_t = t.den().sub(t.num());
    let mut p_den = q.plant.transfer.den().clone();
    let mut p_num = q.plant.transfer.num().clone();
    for &p in upper_half(&q.plant.unstable_poles) {
        one_minus_t = deflate(&one_minus_t, p)?;
        p_den = deflate(&p_den, p)?;
    }
    for &z in upper_half(&q.plant.nmp_zeros) {
        t_num = deflate(&t_num, z)?;
        p_num = deflate(&p_num, z)?;
    }
    let controller = RationalFunction::new(t_num.mul(&p_den), one_minus_t.mul(&p_num));

    // 1 + P K root check catches any hidden unstable cancellation.
    let char_poly = q
        .plant
        .transfer
        .num()
        .mul(controller.num())
        .add(&q.plant.transfer.den().mul(controller.den()));
    let loop_roots = char_poly.roots()?;

    let certified = match q.mode {
        WeightMode::Delay => (1.0, 0.0, tau),
        WeightMode::Independent { gain_k, phase_phi }
        | WeightMode::Simultaneous { gain_k, phase_phi } => (gain_k, phase_phi, tau),
    };
    Ok(ControllerRealization {
        controller,
        closed_loop: t,
        weight_fit: fit,
        certified,
        loop_roots,
    })
}

/// Switch a query's weight approximation to a relative-degree-one roll-off,
/// so the realized closed loop comes out strictly proper. Only shifts with
/// `Im(T0(inf))^2 + Re(T0(inf)) <= 1/4` admit this.
pub fn enforce_strict_properness(q: &MarginQuery) -> Result<MarginQuery> {
    let v = q
        .shift
        .value_at_infinity()
        .ok_or_else(|| Error::InvalidParameter("shift must be proper".into()))?;
    // Real-rational shift: the limit at infinity is real.
    if v > 0.25 {
        return Err(Error::ShiftBlocksProperness(v));
    }
    let mut out = q.clone();
    match &mut out.backend {
        WeightBackend::RationalApprox { options, .. } => {
            options.improper_rolloff = Some(1);
        }
        WeightBackend::Exact { .. } => {
            return Err(Error::InvalidParameter(
                "strict properness applies to the rational weight backend".into(),
            ))
        }
    }
    Ok(out)
}

/// Re-derive the achieved margins of a closed loop from the forbidden-set
/// geometry: minimum distance from `T(i omega)` to the set over a dense log
/// grid plus the weight's kink frequencies, the hypothesis `Re T(inf) < 1/2`,
/// and the interpolation conditions at the plant's defining nodes.
pub fn verify_margins(
    t: &RationalFunction<f64>,
    plant: &Plant<f64>,
    spec: &WeightSpec,
    threshold: f64,
) -> Result<VerificationReport> {
    let t_inf = match t.relative_degree() {
        d if d > 0 => 0.0,
        0 => t.value_at_infinity().unwrap_or(f64::INFINITY),
        _ => f64::INFINITY,
    };
    if t_inf >= 0.5 {
        return Err(Error::HypothesisViolated(t_inf));
    }

    let mut grid: Vec<f64> = (0..VERIFY_GRID_POINTS)
        .map(|i| 10f64.powf(-4.0 + 8.0 * i as f64 / (VERIFY_GRID_POINTS - 1) as f64))
        .collect();
    for b in WeightFunction::new(spec.clone()).breakpoints() {
        if b.is_finite() && b > 0.0 {
            grid.push(b);
        }
    }

    let mut min_distance = f64::INFINITY;
    let mut argmin_omega = f64::NAN;
    for &omega in &grid {
        let z = t.eval(C64::new(0.0, omega))?;
        let d = match spec.mode {
            WeightMode::Delay => dist_to_cut(omega * spec.tau_bar, z),
            WeightMode::Independent { gain_k, phase_phi } => dist_to_gain_set(gain_k, z)?
                .min(dist_to_phase_set(phase_phi, z))
                .min(dist_to_cut(omega * spec.tau_bar, z)),
            WeightMode::Simultaneous { gain_k, phase_phi } => {
                let region = SimultaneousRegion::new(gain_k, phase_phi, spec.tau_bar, omega)?;
                dist_to_simultaneous(&region, z)
            }
        };
        if d < min_distance {
            min_distance = d;
            argmin_omega = omega;
        }
    }

    let interp_residual = interpolation_residual(t, plant)?;
    Ok(VerificationReport {
        min_distance,
        argmin_omega,
        infinity_value: t_inf,
        interp_residual,
        pass: min_distance > threshold && interp_residual <= CANCEL_TOL,
    })
}

/// Largest deviation of `t` from 1 at the unstable poles and 0 at the
/// nonminimum-phase zeros.
fn interpolation_residual(t: &RationalFunction<f64>, plant: &Plant<f64>) -> Result<f64> {
    let mut worst = 0.0f64;
    for &p in &plant.unstable_poles {
        worst = worst.max((t.eval(p)? - C64::new(1.0, 0.0)).norm());
    }
    for &z in &plant.nmp_zeros {
        worst = worst.max(t.eval(z)?.norm());
    }
    Ok(worst)
}

fn check_analytic(t: &RationalFunction<f64>) -> Result<()> {
    let scale = t.den().coeff_norm().max(1.0);
    for r in t.den().roots()? {
        if r.re > AXIS_TOL * scale {
            return Err(Error::UnstableT(format!("{r}")));
        }
    }
    Ok(())
}

/// One representative per conjugate pair (the spectrum of a real plant is
/// conjugate-symmetric, and each pair is cancelled by one real factor).
fn upper_half(nodes: &[C64]) -> impl Iterator<Item = &C64> {
    nodes.iter().filter(|n| n.im >= 0.0)
}

/// Divide out `(s - r)` (real `r`) or the real quadratic of the conjugate
/// pair, demanding the remainder vanish to relative tolerance.
fn deflate(poly: &Polynomial<f64>, r: C64) -> Result<Polynomial<f64>> {
    let factor = if r.im.abs() <= AXIS_TOL * r.norm().max(1.0) {
        Polynomial::new(vec![-r.re, 1.0])
    } else {
        Polynomial::new(vec![r.norm_sqr(), -2.0 * r.re, 1.0])
    };
    let (quot, rem) = poly.div_rem(&factor);
    let resid = rem.coeff_norm() / poly.coeff_norm().max(f64::MIN_POSITIVE);
    if resid > CANCEL_TOL {
        return Err(Error::CancellationFailure(resid));
    }
    Ok(quot)
}
