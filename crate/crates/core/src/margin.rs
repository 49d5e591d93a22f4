//! Certified delay-margin lower bounds: bisection over interpolation
//! feasibility, constant and rational shifts, combined gain/phase/delay
//! specifications, and the iterative shift-selection heuristic.

use crate::approx::{approx_weight, default_grid, reduce_interpolant, ApproxOptions, MagnitudeApproxResult};
use crate::error::{Error, Result};
use crate::outer::{interpolation_values, OuterEvaluator, DEFAULT_QUAD_TOL};
use crate::pick::{
    build_pick, feasibility_margin, is_feasible, max_entropy_interpolant, min_eigenvalue,
    InterpolationProblem,
};
use crate::rational::{Plant, RationalFunction};
use crate::weights::{WeightFunction, WeightMode, WeightSpec, DEFAULT_FLOOR_EPS};
use crate::C64;
use std::f64::consts::PI;

pub const DEFAULT_BISECTION_TOL: f64 = 1e-3;

/// How the weight enters the certificate.
#[derive(Debug, Clone)]
pub enum WeightBackend {
    /// Evaluate the outer extension by adaptive quadrature; sharpest bound.
    Exact { quad_tol: f64 },
    /// Fit a stable rational over-approximation of the weight first; required
    /// whenever a realizable controller must come out of the certificate.
    RationalApprox {
        n_b: usize,
        n_a: usize,
        options: ApproxOptions,
    },
}

impl Default for WeightBackend {
    fn default() -> Self {
        WeightBackend::Exact {
            quad_tol: DEFAULT_QUAD_TOL,
        }
    }
}

/// A margin computation request.
#[derive(Debug, Clone)]
pub struct MarginQuery {
    pub plant: Plant<f64>,
    pub mode: WeightMode,
    pub shift: RationalFunction<f64>,
    pub floor_eps: f64,
    pub bisection_tol: f64,
    pub tau_upper_init: Option<f64>,
    pub backend: WeightBackend,
}

impl MarginQuery {
    pub fn new(plant: Plant<f64>) -> Self {
        MarginQuery {
            plant,
            mode: WeightMode::Delay,
            shift: RationalFunction::zero(),
            floor_eps: DEFAULT_FLOOR_EPS,
            bisection_tol: DEFAULT_BISECTION_TOL,
            tau_upper_init: None,
            backend: WeightBackend::default(),
        }
    }
}

/// One feasibility probe in a bisection trace.
#[derive(Debug, Clone, Copy)]
pub struct Iteration {
    pub tau: f64,
    pub feasible: bool,
    pub min_eigenvalue: f64,
}

/// Outcome of a single feasibility certificate at a fixed delay horizon.
#[derive(Debug, Clone)]
pub struct Certificate {
    pub feasible: bool,
    pub min_eigenvalue: f64,
    pub problem: Option<InterpolationProblem>,
    pub weight_fit: Option<MagnitudeApproxResult>,
}

/// Certified lower bound together with its audit trail.
#[derive(Debug, Clone)]
pub struct MarginReport {
    /// Certified lower bound on the maximum delay margin.
    pub tau_bound: f64,
    pub iterations: Vec<Iteration>,
    /// Central interpolant at the final feasible horizon, when recoverable.
    pub interpolant: Option<RationalFunction<f64>>,
    pub shift_used: RationalFunction<f64>,
    pub mode: WeightMode,
    /// Rational weight fit at the final feasible horizon (rational backend).
    pub weight_fit: Option<MagnitudeApproxResult>,
    /// Per-step trace of the shift-selection heuristic (empty for plain
    /// bisection).
    pub steps: Vec<HomotopyStep>,
    pub warnings: Vec<String>,
}

impl MarginReport {
    /// `(gain, phase, delay)` triple guaranteed by this certificate.
    pub fn guaranteed_margins(&self) -> (f64, f64, f64) {
        match self.mode {
            WeightMode::Delay => (1.0, 0.0, self.tau_bound),
            WeightMode::Independent { gain_k, phase_phi }
            | WeightMode::Simultaneous { gain_k, phase_phi } => {
                (gain_k, phase_phi, self.tau_bound)
            }
        }
    }
}

/// Feasibility certificate at one delay horizon. The shift touching a
/// forbidden set at this horizon invalidates only this horizon, so those
/// errors come back as an infeasible verdict rather than propagating.
pub fn certify_at(q: &MarginQuery, tau: f64, pole_target: f64) -> Result<Certificate> {
    let spec = WeightSpec::new(tau, q.shift.clone(), q.floor_eps, q.mode)?;
    let wf = WeightFunction::new(spec);

    let assembled: Result<(InterpolationProblem, Option<MagnitudeApproxResult>)> =
        match &q.backend {
            WeightBackend::Exact { quad_tol } => {
                let ev = OuterEvaluator::with_tol(&wf, *quad_tol);
                interpolation_values(&ev, &q.plant, &q.shift, pole_target).map(|p| (p, None))
            }
            WeightBackend::RationalApprox { n_b, n_a, options } => {
                let grid = default_grid(&wf);
                approx_weight(&wf, *n_b, *n_a, &grid, *options).and_then(|fit| {
                    let w = fit.rational();
                    let mut nodes = vec![];
                    let mut values = vec![];
                    for &p in &q.plant.unstable_poles {
                        let wv = w.eval(p)?;
                        nodes.push(p);
                        values.push((C64::new(pole_target, 0.0) - q.shift.eval(p)?) * wv);
                    }
                    for &z in &q.plant.nmp_zeros {
                        let wv = w.eval(z)?;
                        nodes.push(z);
                        values.push(-q.shift.eval(z)? * wv);
                    }
                    InterpolationProblem::new(nodes, values).map(|p| (p, Some(fit)))
                })
            }
        };
    let (problem, weight_fit) = match assembled {
        Ok(v) => v,
        Err(Error::ShiftHitsCut(_)) | Err(Error::ShiftHitsRegion(_)) => {
            return Ok(Certificate {
                feasible: false,
                min_eigenvalue: f64::NEG_INFINITY,
                problem: None,
                weight_fit: None,
            })
        }
        Err(e) => return Err(e),
    };
    let pick = build_pick(&problem);
    let me = min_eigenvalue(&pick);
    let feasible = is_feasible(&pick, feasibility_margin(&pick));
    Ok(Certificate {
        feasible,
        min_eigenvalue: me,
        problem: Some(problem),
        weight_fit,
    })
}

fn default_tau_upper(plant: &Plant<f64>) -> f64 {
    let max_p = plant
        .unstable_poles
        .iter()
        .map(|p| p.norm())
        .fold(0.0, f64::max);
    2.0 * PI / max_p
}

/// Bisect the feasibility boundary in the delay horizon and return the last
/// certified-feasible value.
pub fn bound_bisection(q: &MarginQuery) -> Result<MarginReport> {
    bound_bisection_with_target(q, 1.0)
}

fn bound_bisection_with_target(q: &MarginQuery, pole_target: f64) -> Result<MarginReport> {
    if q.plant.unstable_poles.is_empty() {
        return Err(Error::NoUnstablePole);
    }
    if q.bisection_tol <= 0.0 {
        return Err(Error::InvalidParameter(format!(
            "bisection tolerance {} must be positive",
            q.bisection_tol
        )));
    }
    // surfaces ShiftInvalid and parameter errors before any bisection work
    WeightSpec::new(0.0, q.shift.clone(), q.floor_eps, q.mode)?;

    let mut iterations = vec![];
    let mut warnings = vec![];

    let at_zero = certify_at(q, 0.0, pole_target)?;
    iterations.push(Iteration {
        tau: 0.0,
        feasible: at_zero.feasible,
        min_eigenvalue: at_zero.min_eigenvalue,
    });
    if !at_zero.feasible {
        if !matches!(q.mode, WeightMode::Delay) {
            return Err(Error::InfeasibleAtZero);
        }
        return Err(Error::Infeasible(at_zero.min_eigenvalue));
    }

    let tau_up = q.tau_upper_init.unwrap_or_else(|| default_tau_upper(&q.plant));
    let mut lo = 0.0f64;
    let mut hi = tau_up;
    let top = certify_at(q, tau_up, pole_target)?;
    iterations.push(Iteration {
        tau: tau_up,
        feasible: top.feasible,
        min_eigenvalue: top.min_eigenvalue,
    });
    if top.feasible {
        // the bound is capped at the initializer
        lo = tau_up;
    } else {
        while hi - lo > q.bisection_tol {
            let mid = 0.5 * (lo + hi);
            let c = certify_at(q, mid, pole_target)?;
            iterations.push(Iteration {
                tau: mid,
                feasible: c.feasible,
                min_eigenvalue: c.min_eigenvalue,
            });
            if c.feasible {
                lo = mid;
            } else {
                hi = mid;
            }
        }
    }

    // structural consistency scan of the recorded trace
    let max_feas = iterations
        .iter()
        .filter(|i| i.feasible)
        .map(|i| i.tau)
        .fold(0.0, f64::max);
    if iterations
        .iter()
        .any(|i| !i.feasible && i.tau < max_feas)
    {
        warnings.push("non-monotone feasibility trace".into());
    }

    // recover the central interpolant at (or just inside) the bound
    let mut interpolant = None;
    let mut weight_fit = None;
    for tau in [lo, 0.98 * lo] {
        if tau <= 0.0 {
            break;
        }
        if let Ok(c) = certify_at(q, tau, pole_target) {
            if let Some(prob) = c.problem.as_ref() {
                if c.feasible {
                    if let Ok(t) = max_entropy_interpolant(prob) {
                        interpolant = Some(t);
                        weight_fit = c.weight_fit;
                        break;
                    }
                }
            }
        }
    }
    if interpolant.is_none() && lo > 0.0 {
        warnings.push("central interpolant not recoverable at the bound".into());
    }

    Ok(MarginReport {
        tau_bound: lo,
        iterations,
        interpolant,
        shift_used: q.shift.clone(),
        mode: q.mode,
        weight_fit,
        steps: vec![],
        warnings,
    })
}

/// Delay bound with a constant shift value.
pub fn bound_with_constant_shift(q: &MarginQuery, t0: f64) -> Result<MarginReport> {
    if t0 >= 0.5 {
        return Err(Error::ShiftInvalid(t0));
    }
    let mut q = q.clone();
    q.shift = RationalFunction::constant(t0);
    bound_bisection(&q)
}

/// Combined gain/phase/delay bound; the gain and phase specifications alone
/// must be attainable at zero delay.
pub fn bound_multi_margin(q: &MarginQuery) -> Result<MarginReport> {
    match q.mode {
        WeightMode::Delay => Err(Error::InvalidParameter(
            "combined-margin bound requires a gain/phase mode".into(),
        )),
        WeightMode::Independent { gain_k, phase_phi }
        | WeightMode::Simultaneous { gain_k, phase_phi } => {
            if gain_k <= 1.0 && phase_phi <= 0.0 {
                return Err(Error::InvalidParameter(
                    "combined-margin bound requires gain > 1 or phase > 0".into(),
                ));
            }
            bound_bisection(q)
        }
    }
}

/// Per-step record of the shift-selection heuristic.
#[derive(Debug, Clone)]
pub struct HomotopyStep {
    pub alpha: f64,
    pub tau_bound: f64,
}

/// Iterative shift selection: ramp the pole interpolation target from `1/n`
/// to `1`, each step reusing the previous reduced interpolant as the shift.
///
/// The inner bisection warm-starts from the previous step's bound with one
/// 1.5x headroom retry when that bound proves feasible at its own upper end.
/// `gamma` backs the reconstruction horizon into the strict interior.
pub fn homotopy_bound(
    q: &MarginQuery,
    n_steps: usize,
    n_t: usize,
    n_b: usize,
    n_a: usize,
    gamma: f64,
) -> Result<MarginReport> {
    if n_steps == 0 {
        return Err(Error::InvalidParameter("step count must be >= 1".into()));
    }
    if !(gamma > 0.0 && gamma <= 1.0) {
        return Err(Error::InvalidParameter(format!(
            "damping {gamma} outside (0, 1]"
        )));
    }
    if q.plant.unstable_poles.is_empty() {
        return Err(Error::NoUnstablePole);
    }
    let n_nodes = q.plant.nodes().len();
    if n_t < n_nodes {
        return Err(Error::InvalidParameter(format!(
            "interpolant degree {n_t} below node count {n_nodes}"
        )));
    }

    let step_err = |k: usize, e: Error| {
        Error::NonConvergence(format!("homotopy step {k}: {e}"))
    };

    let mut shift = q.shift.clone();
    let mut tau_up = q.tau_upper_init.unwrap_or_else(|| default_tau_upper(&q.plant));
    let mut iterations = vec![];
    let mut warnings = vec![];
    let mut last_half = None;
    let mut last_fit = None;
    let mut steps = vec![];
    let mut last_shift = shift.clone();
    let mut tau_bound = 0.0;

    for k in 1..=n_steps {
        let alpha = k as f64 / n_steps as f64;
        let mut inner = q.clone();
        inner.shift = shift.clone();
        inner.backend = WeightBackend::RationalApprox {
            n_b,
            n_a,
            options: ApproxOptions::default(),
        };
        inner.tau_upper_init = Some(tau_up);

        let mut report = bound_bisection_with_target(&inner, alpha)
            .map_err(|e| step_err(k, e))?;
        if report.tau_bound >= tau_up - q.bisection_tol {
            // the warm-start cap itself is feasible: allow growth
            inner.tau_upper_init = Some(1.5 * tau_up);
            report = bound_bisection_with_target(&inner, alpha)
                .map_err(|e| step_err(k, e))?;
        }
        iterations.extend(report.iterations.iter().copied());
        warnings.extend(report.warnings.iter().cloned());
        tau_bound = report.tau_bound;
        tau_up = report.tau_bound.max(q.bisection_tol);
        steps.push(HomotopyStep {
            alpha,
            tau_bound: report.tau_bound,
        });

        // reconstruct at a strictly interior horizon
        let tau_use = gamma * report.tau_bound;
        let cert = certify_at(&inner, tau_use, alpha).map_err(|e| step_err(k, e))?;
        let (prob, fit) = match (cert.problem, cert.weight_fit) {
            (Some(p), Some(f)) if cert.feasible => (p, f),
            _ => return Err(step_err(k, Error::Infeasible(cert.min_eigenvalue))),
        };
        let t_tilde = max_entropy_interpolant(&prob).map_err(|e| step_err(k, e))?;
        let w_inv = fit.rational().inv();
        let t_half = t_tilde.mul(&w_inv).add(&shift);

        last_shift = shift.clone();
        last_half = Some(t_half.clone());
        last_fit = Some(fit);

        if k < n_steps {
            // target data for the reduced shift: alpha at poles, 0 at zeros
            let mut nodes = vec![];
            let mut values = vec![];
            for &p in &q.plant.unstable_poles {
                nodes.push(p);
                values.push(C64::new(alpha, 0.0));
            }
            for &z in &q.plant.nmp_zeros {
                nodes.push(z);
                values.push(C64::new(0.0, 0.0));
            }
            let prob_t =
                InterpolationProblem::new(nodes, values).map_err(|e| step_err(k, e))?;
            shift = reduce_interpolant(&t_half, &prob_t, n_t).map_err(|e| step_err(k, e))?;
        }
    }

    Ok(MarginReport {
        tau_bound,
        iterations,
        interpolant: last_half,
        shift_used: last_shift,
        mode: q.mode,
        weight_fit: last_fit,
        steps,
        warnings,
    })
}
