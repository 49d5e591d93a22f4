//! Rational magnitude over-approximation and interpolant degree reduction.
//!
//! `approx_weight` finds stable polynomials `b`, `a` with
//! `phi <= |b(i omega)/a(i omega)| <= (1+eps) phi` on a frequency grid,
//! minimizing `eps` by bisection. For fixed `eps` the constraint is linear in
//! the squared-magnitude coefficient spaces `B(u) = |b|^2`, `A(u) = |a|^2`
//! (`u = omega^2`), so each step is a linear feasibility problem; the
//! factors are recovered by spectral factorization.
//!
//! `reduce_interpolant` projects a high-degree interpolant onto rational
//! functions of bounded degree while preserving the interpolation data
//! exactly, using a weighted least-squares space spanned by `1/(s + conj(s_k))`.

use crate::error::{Error, Result};
use crate::outer::Magnitude;
use crate::pick::InterpolationProblem;
use crate::rational::{spectral_factor, Polynomial, RationalFunction};
use crate::C64;
use nalgebra::DMatrix;

pub const EPS_BISECTION_TOL: f64 = 1e-3;
pub const EPS_MAX: f64 = 10.0;

/// Result of a magnitude over-approximation.
#[derive(Debug, Clone)]
pub struct MagnitudeApproxResult {
    /// Stable numerator factor.
    pub b: Polynomial<f64>,
    /// Stable denominator factor.
    pub a: Polynomial<f64>,
    /// Achieved relative overshoot on the constraint grid.
    pub eps_star: f64,
    /// `deg a - deg b`; negative when an improper roll-off was requested.
    pub relative_degree: isize,
}

impl MagnitudeApproxResult {
    /// The approximant `b/a` as a rational function.
    pub fn rational(&self) -> RationalFunction<f64> {
        RationalFunction::new(self.b.clone(), self.a.clone())
    }
}

/// Options beyond the plain sandwich fit.
#[derive(Debug, Clone, Copy, Default)]
pub struct ApproxOptions {
    /// Force `deg b - deg a` to this value and release the upper sandwich
    /// constraint beyond `rolloff_cutoff`, so `|b/a|` may grow at high
    /// frequency (needed for strictly proper closed loops).
    pub improper_rolloff: Option<usize>,
    /// Frequency beyond which the upper constraint is dropped; defaults to a
    /// tenth of the largest grid frequency.
    pub rolloff_cutoff: Option<f64>,
}

/// Default constraint grid: log-spaced on `[1e-3, 1e3]` rad/s plus the
/// magnitude's published kinks.
pub fn default_grid<M: Magnitude>(phi: &M) -> Vec<f64> {
    let mut grid: Vec<f64> = (0..600)
        .map(|i| 10f64.powf(-3.0 + 6.0 * i as f64 / 599.0))
        .collect();
    for b in phi.breakpoints() {
        if b.is_finite() && b > 1e-3 && b < 1e3 {
            grid.push(b);
        }
    }
    grid.sort_by(|a, b| a.partial_cmp(b).unwrap());
    grid.dedup_by(|a, b| (*a - *b).abs() < 1e-12 * b.abs());
    grid
}

/// Minimize the overshoot `eps` by bisection; each verdict is a linear
/// feasibility problem, so the verdict is monotone in `eps`.
pub fn approx_weight<M: Magnitude>(
    phi: &M,
    n_b: usize,
    n_a: usize,
    grid: &[f64],
    options: ApproxOptions,
) -> Result<MagnitudeApproxResult> {
    let mut grid: Vec<f64> = grid.to_vec();
    grid.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let (n_b, cutoff) = match options.improper_rolloff {
        Some(r) => {
            let max_w = grid.last().copied().unwrap_or(1e3);
            (n_a + r, Some(options.rolloff_cutoff.unwrap_or(max_w / 10.0)))
        }
        None => (n_b, None),
    };

    let mut last_err: Option<Error> = None;
    for _repair in 0..4 {
        let phis = eval_on_grid(phi, &grid)?;
        if !sandwich_feasible(&phis, &grid, n_b, n_a, cutoff, EPS_MAX)?.is_some() {
            return Err(Error::InfeasibleDegree(EPS_MAX));
        }
        let mut lo = 0.0;
        let mut hi = EPS_MAX;
        let mut best = sandwich_feasible(&phis, &grid, n_b, n_a, cutoff, EPS_MAX)?.unwrap();
        while hi - lo > EPS_BISECTION_TOL {
            let mid = 0.5 * (lo + hi);
            match sandwich_feasible(&phis, &grid, n_b, n_a, cutoff, mid)? {
                Some(sol) => {
                    hi = mid;
                    best = sol;
                }
                None => lo = mid,
            }
        }
        let (alpha, beta) = best;
        let a_u = Polynomial::new(alpha);
        let b_u = Polynomial::new(beta);
        match (factor_with_ridge(&a_u), factor_with_ridge(&b_u)) {
            (Ok(a), Ok(b)) => {
                // the factored ratio can drift off the certified corridor when
                // the squared-magnitude polynomials have near-axis roots;
                // lift b so the lower bound holds pointwise and report the
                // measured overshoot
                let mut lift = 0.0f64;
                let mut over = 0.0f64;
                for (&w, &p) in grid.iter().zip(&phis) {
                    if cutoff.map_or(false, |c| w > c) {
                        continue;
                    }
                    let s = C64::new(0.0, w);
                    let m = b.eval_complex(s).norm() / a.eval_complex(s).norm();
                    lift = lift.max(p / m);
                    over = over.max(m / p);
                }
                let lift = lift.max(1.0);
                let b = b.scale(lift);
                let eps_star = (lift * over - 1.0).max(hi);
                let relative_degree = a.degree() as isize - b.degree() as isize;
                return Ok(MagnitudeApproxResult {
                    b,
                    a,
                    eps_star,
                    relative_degree,
                });
            }
            (ra, rb) => {
                // squared-magnitude polynomial dips negative between grid
                // points: refine the grid and re-solve
                last_err = ra.err().or(rb.err());
                grid = refine_grid(&grid);
            }
        }
    }
    Err(Error::NonConvergence(format!(
        "magnitude approximation: sign repair refinement exhausted ({})",
        last_err.map_or_else(|| "no inner error".into(), |e| e.to_string())
    )))
}

/// Single feasibility solve at a fixed overshoot `eps` (exposed for the
/// convergence sweeps). Returns the squared-magnitude coefficients
/// `(A, B)` in `u = omega^2` when feasible.
pub fn approx_weight_at<M: Magnitude>(
    phi: &M,
    n_b: usize,
    n_a: usize,
    grid: &[f64],
    eps: f64,
) -> Result<Option<MagnitudeApproxResult>> {
    let phis = eval_on_grid(phi, grid)?;
    match sandwich_feasible(&phis, grid, n_b, n_a, None, eps)? {
        None => Ok(None),
        Some((alpha, beta)) => {
            let a = spectral_factor(&Polynomial::new(alpha))?;
            let b = spectral_factor(&Polynomial::new(beta))?;
            let relative_degree = a.degree() as isize - b.degree() as isize;
            Ok(Some(MagnitudeApproxResult {
                b,
                a,
                eps_star: eps,
                relative_degree,
            }))
        }
    }
}

/// Spectral factorization tolerant of roundoff-scale negative dips: retry
/// with an escalating all-positive-coefficient ridge, which is nonnegative on
/// the half-line and proportionally largest exactly where cancellation made
/// the polynomial dip. The later pointwise lift absorbs the perturbation.
fn factor_with_ridge(p: &Polynomial<f64>) -> Result<Polynomial<f64>> {
    let mut err = None;
    for k in 0..8 {
        let q = if k == 0 {
            p.clone()
        } else {
            let delta = 1e-9 * 10f64.powi(k - 1);
            let ridge = Polynomial::new(p.coeffs().iter().map(|c| delta * c.abs()).collect());
            p.add(&ridge)
        };
        match spectral_factor(&q) {
            Ok(f) => return Ok(f),
            Err(e) => err = Some(e),
        }
    }
    Err(err.unwrap())
}

fn eval_on_grid<M: Magnitude>(phi: &M, grid: &[f64]) -> Result<Vec<f64>> {
    grid.iter().map(|&w| phi.magnitude(w)).collect()
}

fn refine_grid(grid: &[f64]) -> Vec<f64> {
    let mut out = Vec::with_capacity(grid.len() * 2);
    for w in grid.windows(2) {
        out.push(w[0]);
        out.push((w[0] * w[1]).sqrt());
    }
    out.push(*grid.last().unwrap());
    out
}

/// Linear feasibility of the squared-magnitude sandwich at overshoot `eps`.
///
/// The coefficient spaces are constrained entrywise nonnegative, which
/// certifies `A, B >= 0` on the whole half-line `u >= 0` (the monomials are
/// nonnegative there), so spectral factorization cannot be defeated by dips
/// between or beyond the grid points. Rows are assembled through the Moebius
/// variable `t = (u-1)/(u+1)` to keep every basis value in `[-2^N, 2^N]`,
/// and solved by an interior-point method: interior iterates avoid the
/// degenerate vertices a simplex method returns on this family, whose
/// near-cancelling coefficients destroy the accuracy of the factored ratio.
fn sandwich_feasible(
    phis: &[f64],
    grid: &[f64],
    n_b: usize,
    n_a: usize,
    cutoff: Option<f64>,
    eps: f64,
) -> Result<Option<(Vec<f64>, Vec<f64>)>> {
    use clarabel::algebra::CscMatrix;
    use clarabel::solver::{
        DefaultSettings, DefaultSolver, IPSolver, SolverStatus, SupportedConeT,
    };

    let n_basis = n_a.max(n_b);
    let na = n_a + 1;
    let nv = na + n_b + 1;
    // rows: equality first (normalization), then all <= rows
    let mut rows: Vec<Vec<f64>> = vec![];
    let mut rhs: Vec<f64> = vec![];

    // normalization A(1) = 1, i.e. sum alpha_j = 1
    let mut row = vec![0.0; nv];
    for j in 0..na {
        row[j] = 1.0;
    }
    rows.push(row);
    rhs.push(1.0);
    let n_eq = 1;

    // x >= 0 as -x <= 0
    for j in 0..nv {
        let mut row = vec![0.0; nv];
        row[j] = -1.0;
        rows.push(row);
        rhs.push(0.0);
    }
    if cutoff.is_some() {
        // pin the enforced degrees so the requested roll-off is realized
        let mut row = vec![0.0; nv];
        row[na + n_b] = -1.0;
        rows.push(row);
        rhs.push(-1e-9);
        let mut row = vec![0.0; nv];
        row[n_a] = -1.0;
        rows.push(row);
        rhs.push(-1e-9);
    }

    let up = (1.0 + eps) * (1.0 + eps);
    for (&w, &p) in grid.iter().zip(phis) {
        let u = w * w;
        let t = (u - 1.0) / (u + 1.0);
        let pa: Vec<f64> = (0..=n_a)
            .map(|j| (1.0 + t).powi(j as i32) * (1.0 - t).powi((n_basis - j) as i32))
            .collect();
        let pbv: Vec<f64> = (0..=n_b)
            .map(|j| (1.0 + t).powi(j as i32) * (1.0 - t).powi((n_basis - j) as i32))
            .collect();
        let p2 = p * p;

        // lower: phi^2 A - B <= 0
        let mut row = vec![0.0; nv];
        for j in 0..na {
            row[j] = p2 * pa[j];
        }
        for j in 0..=n_b {
            row[na + j] = -pbv[j];
        }
        scale_row(&mut row);
        rows.push(row);
        rhs.push(0.0);

        if cutoff.map_or(true, |c| w <= c) {
            // upper: B - (1+eps)^2 phi^2 A <= 0
            let mut row = vec![0.0; nv];
            for j in 0..=n_b {
                row[na + j] = pbv[j];
            }
            for j in 0..na {
                row[j] = -up * p2 * pa[j];
            }
            scale_row(&mut row);
            rows.push(row);
            rhs.push(0.0);
        }
    }

    let a_mat = CscMatrix::from(&rows);
    let p_mat = CscMatrix::zeros((nv, nv));
    let q = vec![0.0; nv];
    let cones = [
        SupportedConeT::ZeroConeT(n_eq),
        SupportedConeT::NonnegativeConeT(rows.len() - n_eq),
    ];
    let settings = DefaultSettings {
        verbose: false,
        ..Default::default()
    };
    let mut solver = DefaultSolver::new(&p_mat, &q, &a_mat, &rhs, &cones, settings)
        .map_err(|e| Error::NonConvergence(format!("feasibility solver setup: {e:?}")))?;
    solver.solve();
    match solver.solution.status {
        SolverStatus::Solved | SolverStatus::AlmostSolved => {
            let x = &solver.solution.x;
            Ok(Some((
                x[..na].iter().map(|&v| v.max(0.0)).collect(),
                x[na..].iter().map(|&v| v.max(0.0)).collect(),
            )))
        }
        // A stalled solve yields no certificate either way; calling it
        // infeasible is sound, the bisection just settles on a larger eps.
        _ => Ok(None),
    }
}

fn scale_row(row: &mut [f64]) {
    let m = row.iter().fold(0.0f64, |a, c| a.max(c.abs()));
    if m > 0.0 {
        for c in row.iter_mut() {
            *c /= m;
        }
    }
}

/// Reduce an interpolant to degree at most `n_t` while matching the
/// interpolation data exactly.
///
/// With nodes `s_k`, pick `a(s) = q(s)/d(s)` in the span of `1/(s+conj(s_k))`
/// (`d = prod (s + conj(s_k))`, `q` real of degree `< N`) vanishing at the
/// right-half-plane zeros of `T`. Then `sigma = a/T` is outer, its magnitude
/// is fitted rationally, and the linear system `q_hat(s_k) = w_k
/// sigma_hat(s_k) d(s_k)` reconstructs `T_hat = q_hat a_sigma / (d b_sigma)`.
pub fn reduce_interpolant(
    t: &RationalFunction<f64>,
    prob: &InterpolationProblem,
    n_t: usize,
) -> Result<RationalFunction<f64>> {
    let nodes = prob.nodes();
    let values = prob.values();
    let n = nodes.len();
    if n_t < n {
        return Err(Error::InvalidParameter(format!(
            "target degree {n_t} below node count {n}"
        )));
    }
    if t.is_zero() {
        return Err(Error::ReductionFailure("interpolant is zero".into()));
    }
    // T must be analytic in the closed right half-plane
    if t.den().degree() >= 1 {
        for r in t.den().roots()? {
            if r.re >= -1e-9 * r.norm().max(1.0) {
                return Err(Error::UnstableT(format!("{r}")));
            }
        }
    }
    let mut rhp_zeros = vec![];
    if t.num().degree() >= 1 {
        for r in t.num().roots()? {
            if r.re.abs() <= 1e-6 * r.norm().max(1.0) {
                return Err(Error::ReductionFailure(format!(
                    "interpolant zero {r} too close to the imaginary axis"
                )));
            }
            if r.re > 0.0 {
                rhp_zeros.push(r);
            }
        }
    }
    if rhp_zeros.len() >= n {
        return Err(Error::ZeroCountOverflow {
            zeros: rhp_zeros.len(),
            capacity: n - 1,
        });
    }

    let d = Polynomial::from_roots(
        &nodes.iter().map(|s| -s.conj()).collect::<Vec<_>>(),
        1.0,
    );
    // q: real, degree < N, vanishing at the RHP zeros of T; remaining roots
    // placed at the scale of the node set
    let scale_root = nodes.iter().map(|s| s.norm()).sum::<f64>() / n as f64;
    let mut q = Polynomial::from_roots(&rhp_zeros, 1.0);
    for _ in 0..(n - 1 - rhp_zeros.len()) {
        q = q.mul(&Polynomial::new(vec![scale_root, 1.0]));
    }

    // |sigma(i omega)| = |q| / (|d| |T|), floored against |T| zeros on the
    // grid far from the fit region
    let sigma_mag = {
        let q = q.clone();
        let d = d.clone();
        let t = t.clone();
        move |omega: f64| -> Result<f64> {
            let s = C64::new(0.0, omega);
            let tv = t.eval(s)?;
            let den = d.eval_complex(s).norm() * tv.norm();
            if den <= 0.0 {
                return Err(Error::ReductionFailure(format!(
                    "interpolant vanishes on the axis at omega = {omega}"
                )));
            }
            Ok(q.eval_complex(s).norm() / den)
        }
    };
    let probe: Vec<f64> = (0..200)
        .map(|i| 10f64.powf(-3.0 + 6.0 * i as f64 / 199.0))
        .collect();
    let mut floor = 0.0f64;
    for &w in &probe {
        floor = floor.max(sigma_mag(w)?);
    }
    let floor = floor * 1e-8;
    let mag = crate::outer::FnMagnitude {
        f: move |w: f64| sigma_mag(w).map(|v| v.max(floor)).unwrap_or(floor),
        breaks: vec![],
    };

    let deg = n_t - n;
    let grid = default_grid(&mag);
    let fit = approx_weight(&mag, deg, deg, &grid, ApproxOptions::default())?;

    // q_hat(s_k) = w_k sigma_hat(s_k) d(s_k), sigma_hat = b/a of the fit
    let mut m = DMatrix::<C64>::zeros(n, n);
    let mut rhs = DMatrix::<C64>::zeros(n, 1);
    for (k, (&sk, &wk)) in nodes.iter().zip(values).enumerate() {
        let mut p = C64::new(1.0, 0.0);
        for j in 0..n {
            m[(k, j)] = p;
            p *= sk;
        }
        let sigma_hat = fit.b.eval_complex(sk) / fit.a.eval_complex(sk);
        rhs[(k, 0)] = wk * sigma_hat * d.eval_complex(sk);
    }
    let qh = m
        .lu()
        .solve(&rhs)
        .ok_or(Error::SingularSystem)?;
    let imag = qh.iter().map(|c| c.im.abs()).fold(0.0, f64::max);
    let scale = qh.iter().map(|c| c.norm()).fold(0.0, f64::max).max(1e-300);
    if imag > 1e-6 * scale {
        return Err(Error::ReductionFailure(format!(
            "reconstructed numerator not real (imaginary residual {imag:.3e})"
        )));
    }
    let q_hat = Polynomial::new(qh.iter().map(|c| c.re).collect());
    let t_hat = RationalFunction::new(q_hat.mul(&fit.a), d.mul(&fit.b));

    for (&sk, &wk) in nodes.iter().zip(values) {
        let r = (t_hat.eval(sk)? - wk).norm();
        if r > 1e-6 * wk.norm().max(1.0) {
            return Err(Error::ReductionFailure(format!(
                "interpolation residual {r:.3e} at node {sk}"
            )));
        }
    }
    Ok(t_hat)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::outer::FnMagnitude;
    use crate::pick::max_entropy_interpolant;
    use approx::assert_relative_eq;

    fn check_sandwich(r: &MagnitudeApproxResult, phi: impl Fn(f64) -> f64, grid: &[f64]) {
        for &w in grid {
            let m = (r.b.eval_complex(C64::new(0.0, w)).norm())
                / (r.a.eval_complex(C64::new(0.0, w)).norm());
            let p = phi(w);
            assert!(m >= p * (1.0 - 1e-6), "low at {w}: {m} < {p}");
            assert!(
                m <= (1.0 + r.eps_star) * p * (1.0 + 1e-6),
                "high at {w}: {m} > {}",
                (1.0 + r.eps_star) * p
            );
        }
    }

    #[test]
    fn constant_magnitude_exact() {
        let mag = FnMagnitude {
            f: |_| 2.0,
            breaks: vec![],
        };
        let grid = default_grid(&mag);
        let r = approx_weight(&mag, 0, 0, &grid, ApproxOptions::default()).unwrap();
        assert!(r.eps_star <= 2.0 * EPS_BISECTION_TOL);
        assert_relative_eq!(
            r.b.coeffs()[0] / r.a.coeffs()[0],
            2.0,
            epsilon = 1e-2
        );
    }

    #[test]
    fn representable_magnitude_recovered() {
        let mag = FnMagnitude {
            f: |w: f64| (w * w + 1.0).sqrt(),
            breaks: vec![],
        };
        let grid = default_grid(&mag);
        let r = approx_weight(&mag, 1, 0, &grid, ApproxOptions::default()).unwrap();
        assert!(r.eps_star <= 2.0 * EPS_BISECTION_TOL, "eps = {}", r.eps_star);
        check_sandwich(&r, |w| (w * w + 1.0).sqrt(), &grid);
        // b ~ c (s + 1) with c ~ 1
        assert_eq!(r.b.degree(), 1);
        let root = -r.b.coeffs()[0] / r.b.coeffs()[1];
        assert_relative_eq!(root, -1.0, epsilon = 0.05);
    }

    #[test]
    fn verdict_monotone_in_eps() {
        let mag = FnMagnitude {
            f: |w: f64| crate::weights::phi_delay(1.0, w).max(1e-4),
            breaks: vec![1e-4, std::f64::consts::PI],
        };
        let grid: Vec<f64> = (0..150)
            .map(|i| 10f64.powf(-3.0 + 6.0 * i as f64 / 149.0))
            .collect();
        let phis: Vec<f64> = grid.iter().map(|&w| mag.magnitude(w).unwrap()).collect();
        let mut seen_feasible = false;
        for i in 0..30 {
            let eps = 0.005 * (i as f64 + 1.0);
            let f = sandwich_feasible(&phis, &grid, 6, 6, None, eps)
                .unwrap()
                .is_some();
            assert!(!(seen_feasible && !f), "verdict flipped back at eps={eps}");
            seen_feasible |= f;
        }
        assert!(seen_feasible);
    }

    #[test]
    fn reduction_fixed_point_and_residuals() {
        // feasible 2-node problem, inflate with a stable spurious factor
        let prob = InterpolationProblem::new(
            vec![C64::new(1.0, 0.0), C64::new(2.0, 0.0)],
            vec![C64::new(0.3, 0.0), C64::new(0.1, 0.0)],
        )
        .unwrap();
        let t = max_entropy_interpolant(&prob).unwrap();
        let spurious = RationalFunction::new(
            Polynomial::new(vec![1.0, 1.0, 1.0]),
            Polynomial::new(vec![1.05, 1.1, 1.0]),
        );
        let inflated = t.mul(&spurious);
        let reduced = reduce_interpolant(&inflated, &prob, 4).unwrap();
        assert!(reduced.den().degree() <= 4);
        for (s, w) in prob.nodes().iter().zip(prob.values()) {
            assert!((reduced.eval(*s).unwrap() - w).norm() < 1e-6);
        }
    }

    #[test]
    fn reduction_convergence_as_fit_tightens() {
        let prob = InterpolationProblem::new(
            vec![C64::new(1.0, 0.0), C64::new(2.0, 0.0)],
            vec![C64::new(0.3, 0.0), C64::new(0.1, 0.0)],
        )
        .unwrap();
        let t = max_entropy_interpolant(&prob).unwrap();
        let spurious = RationalFunction::new(
            Polynomial::new(vec![1.0, 1.0, 1.0]),
            Polynomial::new(vec![1.05, 1.1, 1.0]),
        );
        let inflated = t.mul(&spurious);
        // degree-convergence sweep: increasing fit degree must not
        // worsen the sup deviation from the original interpolant
        let mut errs = vec![];
        for n_t in [2usize, 3, 4] {
            let reduced = reduce_interpolant(&inflated, &prob, n_t).unwrap();
            let mut sup = 0.0f64;
            for i in 0..200 {
                let w = 10f64.powf(-2.0 + 4.0 * i as f64 / 199.0);
                let d = (reduced.eval(C64::new(0.0, w)).unwrap()
                    - inflated.eval(C64::new(0.0, w)).unwrap())
                .norm();
                sup = sup.max(d);
            }
            errs.push(sup);
        }
        assert!(errs[2] <= errs[0] + 1e-9, "errors {errs:?}");
    }
}
