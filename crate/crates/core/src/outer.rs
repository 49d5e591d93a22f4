//! Outer (minimum-phase) extension of a boundary magnitude.
//!
//! Given `phi(omega) > 0` with integrable logarithm, the outer function
//!
//! `W(s) = exp[ (1/pi) \int log phi(omega) (omega s + i)/(omega + i s)
//!          d omega / (1 + omega^2) ]`
//!
//! is analytic and zero-free in the open right half-plane with
//! `|W(i omega)| = phi(omega)` a.e. We evaluate the integral after the
//! substitution `omega = tan(theta/2)`, which compactifies the line and
//! absorbs the `1/(1+omega^2)` factor, with adaptive Gauss-Kronrod panels.

use crate::error::{Error, Result};
use crate::rational::{Plant, RationalFunction};
use crate::weights::WeightFunction;
use crate::C64;
use std::f64::consts::PI;

/// Boundary magnitude that the outer extension reproduces. Implementations
/// must be positive and piecewise smooth with the listed kinks.
pub trait Magnitude {
    fn magnitude(&self, omega: f64) -> Result<f64>;
    /// Positive-axis kink locations; mirrored internally.
    fn breakpoints(&self) -> Vec<f64> {
        vec![]
    }
}

impl Magnitude for WeightFunction {
    fn magnitude(&self, omega: f64) -> Result<f64> {
        self.eval(omega)
    }
    fn breakpoints(&self) -> Vec<f64> {
        WeightFunction::breakpoints(self)
    }
}

/// Magnitude backed by a closure, for custom boundary data.
pub struct FnMagnitude<F: Fn(f64) -> f64> {
    pub f: F,
    pub breaks: Vec<f64>,
}

impl<F: Fn(f64) -> f64> Magnitude for FnMagnitude<F> {
    fn magnitude(&self, omega: f64) -> Result<f64> {
        Ok((self.f)(omega))
    }
    fn breakpoints(&self) -> Vec<f64> {
        self.breaks.clone()
    }
}

/// `|b(i omega) / a(i omega)|` of a rational function: the outer extension of
/// this magnitude is the function itself when numerator and denominator are
/// stable.
impl Magnitude for RationalFunction<f64> {
    fn magnitude(&self, omega: f64) -> Result<f64> {
        Ok(self.eval(C64::new(0.0, omega))?.norm())
    }
}

pub const DEFAULT_QUAD_TOL: f64 = 1e-8;
const MAX_PANELS: usize = 40_000;

pub struct OuterEvaluator<'a, M: Magnitude> {
    pub weight: &'a M,
    pub quad_tol: f64,
}

impl<'a, M: Magnitude> OuterEvaluator<'a, M> {
    pub fn new(weight: &'a M) -> Self {
        OuterEvaluator {
            weight,
            quad_tol: DEFAULT_QUAD_TOL,
        }
    }

    pub fn with_tol(weight: &'a M, quad_tol: f64) -> Self {
        OuterEvaluator { weight, quad_tol }
    }

    /// Evaluate `W(s)` for `Re(s) > 0`.
    pub fn eval_outer(&self, s: C64) -> Result<C64> {
        if s.re <= 0.0 {
            return Err(Error::InvalidParameter(format!(
                "outer function evaluated at Re(s) = {} <= 0",
                s.re
            )));
        }
        let integrand = |theta: f64| -> Result<C64> {
            // theta = +-pi maps to omega = +-infinity, where the kernel
            // tends to s and the magnitude to its high-frequency limit
            let (omega, kernel) = if (PI - theta.abs()) < 1e-12 {
                (theta.signum() * 1e15, s)
            } else {
                let omega = (theta / 2.0).tan();
                let kernel = (C64::new(omega, 0.0) * s + C64::new(0.0, 1.0))
                    / (C64::new(omega, 0.0) + C64::new(0.0, 1.0) * s);
                (omega, kernel)
            };
            let phi = self.weight.magnitude(omega)?;
            if phi <= 0.0 {
                return Err(Error::InvalidParameter(format!(
                    "magnitude nonpositive ({phi}) at omega = {omega}"
                )));
            }
            Ok(kernel * (phi.ln() / 2.0))
        };

        // panel edges: breakpoints mapped through omega -> theta, mirrored
        let mut edges = vec![-PI, 0.0, PI];
        for b in self.weight.breakpoints() {
            if b.is_finite() {
                let t = 2.0 * b.atan();
                if t.abs() < PI {
                    edges.push(t);
                    edges.push(-t);
                }
            }
        }
        // a node near the axis makes the kernel sharply peaked at
        // omega = Im(s) with width Re(s); seed graded panel edges so the
        // error estimator sees the spike
        edges.push(2.0 * s.im.atan());
        if s.re < 1e-2 {
            let mut h = s.re.max(1e-300);
            while h < 1.0 {
                edges.push(2.0 * (s.im - h).atan());
                edges.push(2.0 * (s.im + h).atan());
                h *= 8.0;
            }
        }
        edges.sort_by(|a, b| a.partial_cmp(b).unwrap());
        edges.dedup_by(|a, b| (*a - *b).abs() < 1e-14);

        let integral = adaptive_gk(&integrand, &edges, self.quad_tol)?;
        Ok((integral / PI).exp())
    }
}

/// Interpolation data for the margin certificate: nodes are the plant's
/// unstable poles then nonminimum-phase zeros; the value at a pole `p` is
/// `(target - T0(p)) W(p)` and at a zero `z` is `-T0(z) W(z)`.
pub fn interpolation_values<M: Magnitude>(
    ev: &OuterEvaluator<'_, M>,
    plant: &Plant<f64>,
    shift: &RationalFunction<f64>,
    pole_target: f64,
) -> Result<crate::pick::InterpolationProblem> {
    let mut nodes = vec![];
    let mut values = vec![];
    for &p in &plant.unstable_poles {
        let w = ev.eval_outer(p)?;
        let t0 = shift.eval(p)?;
        nodes.push(p);
        values.push((C64::new(pole_target, 0.0) - t0) * w);
    }
    for &z in &plant.nmp_zeros {
        let w = ev.eval_outer(z)?;
        let t0 = shift.eval(z)?;
        nodes.push(z);
        values.push(-t0 * w);
    }
    crate::pick::InterpolationProblem::new(nodes, values)
}

// Gauss 7 / Kronrod 15 abscissae and weights on [-1, 1].
const XGK: [f64; 8] = [
    0.991455371120813,
    0.949107912342759,
    0.864864423359769,
    0.741531185599394,
    0.586087235467691,
    0.405845151377397,
    0.207784955007898,
    0.0,
];
const WGK: [f64; 8] = [
    0.022935322010529,
    0.063092092629979,
    0.104790010322250,
    0.140653259715525,
    0.169004726639267,
    0.190350578064785,
    0.204432940075298,
    0.209482141084728,
];
const WG: [f64; 4] = [
    0.129484966168870,
    0.279705391489277,
    0.381830050505119,
    0.417959183673469,
];

fn gk15(f: &impl Fn(f64) -> Result<C64>, a: f64, b: f64) -> Result<(C64, f64)> {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let mut k = C64::new(0.0, 0.0);
    let mut g = C64::new(0.0, 0.0);
    for j in 0..8 {
        let (fl, fr);
        if j == 7 {
            fl = f(c)?;
            k += fl * WGK[7];
            g += fl * WG[3];
        } else {
            fl = f(c - h * XGK[j])?;
            fr = f(c + h * XGK[j])?;
            k += (fl + fr) * WGK[j];
            if j % 2 == 1 {
                g += (fl + fr) * WG[j / 2];
            }
        }
    }
    Ok((k * h, ((k - g) * h).norm()))
}

/// Adaptive refinement over the given initial edges until the summed error
/// estimate drops below `tol` (absolute, on the integral).
fn adaptive_gk(f: &impl Fn(f64) -> Result<C64>, edges: &[f64], tol: f64) -> Result<C64> {
    struct Panel {
        a: f64,
        b: f64,
        value: C64,
        err: f64,
    }
    let mut panels: Vec<Panel> = vec![];
    for w in edges.windows(2) {
        let (value, err) = gk15(f, w[0], w[1])?;
        panels.push(Panel {
            a: w[0],
            b: w[1],
            value,
            err,
        });
    }
    loop {
        let total_err: f64 = panels.iter().map(|p| p.err).sum();
        if total_err <= tol * 0.5 {
            break;
        }
        if panels.len() >= MAX_PANELS {
            return Err(Error::QuadratureFailure {
                tol,
                panels: panels.len(),
            });
        }
        let worst = panels
            .iter()
            .enumerate()
            .max_by(|x, y| x.1.err.partial_cmp(&y.1.err).unwrap())
            .map(|(i, _)| i)
            .unwrap();
        let Panel { a, b, .. } = panels[worst];
        let m = 0.5 * (a + b);
        if m <= a || m >= b {
            // interval exhausted at machine precision
            return Err(Error::QuadratureFailure {
                tol,
                panels: panels.len(),
            });
        }
        let (v1, e1) = gk15(f, a, m)?;
        let (v2, e2) = gk15(f, m, b)?;
        panels[worst] = Panel {
            a,
            b: m,
            value: v1,
            err: e1,
        };
        panels.push(Panel {
            a: m,
            b,
            value: v2,
            err: e2,
        });
    }
    Ok(panels.iter().map(|p| p.value).sum())
}
