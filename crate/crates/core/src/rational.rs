//! Real-coefficient polynomial and rational-function arithmetic.
//!
//! This is the numeric substrate for everything else: Horner evaluation,
//! companion-matrix root finding, stability classification of plants, and
//! spectral factorization of nonnegative magnitude polynomials.

use crate::error::{Error, Result};
use nalgebra::{DMatrix, RealField};
use num_complex::Complex;
use num_traits::{Float, FromPrimitive, ToPrimitive};

/// Scalar types the rational substrate is generic over (`f32`, `f64`).
pub trait RealScalar: Float + RealField + FromPrimitive + ToPrimitive + Copy + std::fmt::Debug {
    /// Lower to `f64` (lossy for wider types, exact for `f32`/`f64`).
    fn as_f64(self) -> f64 {
        <Self as ToPrimitive>::to_f64(&self).expect("scalar not representable as f64")
    }
    /// Lift an `f64` constant into the scalar type.
    fn c(v: f64) -> Self {
        <Self as FromPrimitive>::from_f64(v).expect("constant not representable")
    }
}

impl RealScalar for f32 {}
impl RealScalar for f64 {}

/// Dense real polynomial, coefficients in ascending degree order.
///
/// The zero polynomial is represented by an empty coefficient vector.
#[derive(Debug, Clone, PartialEq)]
pub struct Polynomial<T: RealScalar> {
    coeffs: Vec<T>,
}

impl<T: RealScalar> Polynomial<T> {
    pub fn new(mut coeffs: Vec<T>) -> Self {
        while let Some(&c) = coeffs.last() {
            if c == T::zero() {
                coeffs.pop();
            } else {
                break;
            }
        }
        Polynomial { coeffs }
    }

    pub fn zero() -> Self {
        Polynomial { coeffs: vec![] }
    }

    pub fn constant(c: T) -> Self {
        Polynomial::new(vec![c])
    }

    /// Monomial `x`.
    pub fn x() -> Self {
        Polynomial::new(vec![T::zero(), T::one()])
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len().saturating_sub(1)
    }

    pub fn coeffs(&self) -> &[T] {
        &self.coeffs
    }

    pub fn leading(&self) -> T {
        self.coeffs.last().copied().unwrap_or_else(T::zero)
    }

    pub fn coeff_norm(&self) -> T {
        self.coeffs
            .iter()
            .fold(T::zero(), |a, &c| Float::max(a, Float::abs(c)))
    }

    /// Horner evaluation at a real point.
    pub fn eval(&self, x: T) -> T {
        self.coeffs
            .iter()
            .rev()
            .fold(T::zero(), |acc, &c| acc * x + c)
    }

    /// Horner evaluation at a complex point.
    pub fn eval_complex(&self, s: Complex<T>) -> Complex<T> {
        self.coeffs
            .iter()
            .rev()
            .fold(Complex::new(T::zero(), T::zero()), |acc, &c| {
                acc * s + Complex::new(c, T::zero())
            })
    }

    pub fn derivative(&self) -> Self {
        if self.coeffs.len() <= 1 {
            return Polynomial::zero();
        }
        let coeffs = self
            .coeffs
            .iter()
            .enumerate()
            .skip(1)
            .map(|(i, &c)| c * T::c(i as f64))
            .collect();
        Polynomial::new(coeffs)
    }

    pub fn scale(&self, k: T) -> Self {
        Polynomial::new(self.coeffs.iter().map(|&c| c * k).collect())
    }

    pub fn add(&self, other: &Self) -> Self {
        let n = self.coeffs.len().max(other.coeffs.len());
        let coeffs = (0..n)
            .map(|i| {
                self.coeffs.get(i).copied().unwrap_or_else(T::zero)
                    + other.coeffs.get(i).copied().unwrap_or_else(T::zero)
            })
            .collect();
        Polynomial::new(coeffs)
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.scale(-T::one()))
    }

    pub fn mul(&self, other: &Self) -> Self {
        if self.is_zero() || other.is_zero() {
            return Polynomial::zero();
        }
        let mut coeffs = vec![T::zero(); self.coeffs.len() + other.coeffs.len() - 1];
        for (i, &a) in self.coeffs.iter().enumerate() {
            for (j, &b) in other.coeffs.iter().enumerate() {
                coeffs[i + j] = coeffs[i + j] + a * b;
            }
        }
        Polynomial::new(coeffs)
    }

    /// Euclidean division: returns `(quotient, remainder)`.
    pub fn div_rem(&self, divisor: &Self) -> (Self, Self) {
        assert!(!divisor.is_zero(), "division by zero polynomial");
        if self.degree() < divisor.degree() || self.is_zero() {
            return (Polynomial::zero(), self.clone());
        }
        let mut rem = self.coeffs.clone();
        let dn = divisor.degree();
        let lead = divisor.leading();
        let mut quot = vec![T::zero(); rem.len() - dn];
        for i in (dn..rem.len()).rev() {
            let q = rem[i] / lead;
            quot[i - dn] = q;
            for (j, &dc) in divisor.coeffs.iter().enumerate() {
                rem[i - dn + j] = rem[i - dn + j] - q * dc;
            }
        }
        rem.truncate(dn);
        (Polynomial::new(quot), Polynomial::new(rem))
    }

    /// Build a real polynomial from a conjugate-closed root set.
    pub fn from_roots(roots: &[Complex<T>], leading: T) -> Self {
        let mut acc = vec![Complex::new(T::one(), T::zero())];
        for &r in roots {
            let mut next = vec![Complex::new(T::zero(), T::zero()); acc.len() + 1];
            for (i, &c) in acc.iter().enumerate() {
                next[i + 1] = next[i + 1] + c;
                next[i] = next[i] - c * r;
            }
            acc = next;
        }
        Polynomial::new(acc.iter().map(|c| c.re * leading).collect())
    }

    /// All complex roots via the companion matrix, polished by Newton steps
    /// and snapped into exact conjugate pairs.
    pub fn roots(&self) -> Result<Vec<Complex<T>>> {
        if self.degree() < 1 {
            return Err(Error::NonConvergence(
                "root finding requires degree >= 1".into(),
            ));
        }
        let n = self.degree();
        let lead = self.leading();
        // companion matrix of the monic normalization
        let mut m = DMatrix::<T>::zeros(n, n);
        for i in 1..n {
            m[(i, i - 1)] = T::one();
        }
        for i in 0..n {
            m[(i, n - 1)] = -self.coeffs[i] / lead;
        }
        balance(&mut m);
        // companion matrices can stall the unbounded Schur iteration, so cap
        // it and retry under a diagonal similarity perturbation; if that also
        // fails, seed the simultaneous iteration from the Cauchy circle
        let seeds = bounded_eigenvalues(&m)
            .map(|e| e.iter().copied().collect::<Vec<_>>())
            .unwrap_or_else(|_| {
            let radius = T::one()
                + self
                    .coeffs
                    .iter()
                    .fold(T::zero(), |a, &c| Float::max(a, Float::abs(c / lead)));
            (0..n)
                .map(|k| {
                    let th = T::c(2.0 * std::f64::consts::PI * (k as f64 + 0.25) / n as f64);
                    Complex::new(radius * Float::cos(th), radius * Float::sin(th))
                })
                .collect()
            });
        // the eigenvalues can be crude (or collapse a complex pair onto the
        // real axis, where per-root Newton is trapped); refine them jointly
        let mut roots = aberth_refine(self, seeds);
        pair_conjugates(&mut roots);
        let scale = self.coeff_norm();
        for &r in &roots {
            let res = self.eval_complex(r).norm();
            let local = scale * Float::max(T::one(), Float::powi(r.norm(), n as i32));
            if res > T::c(1e-6) * local {
                return Err(Error::NonConvergence(format!(
                    "residual {:?} at root {:?}",
                    res, r
                )));
            }
        }
        Ok(roots)
    }

    /// Monic normalization.
    pub fn monic(&self) -> Self {
        if self.is_zero() {
            return Polynomial::zero();
        }
        self.scale(T::one() / self.leading())
    }
}

/// Snap near-conjugate root pairs into exact conjugates and realify
/// near-real roots.
/// Aberth-Ehrlich simultaneous refinement. Each approximation repels the
/// others, so clustered roots split correctly and a conjugate pair that an
/// eigensolver collapsed onto the real axis can move back off it.
fn aberth_refine<T: RealScalar>(p: &Polynomial<T>, seeds: Vec<Complex<T>>) -> Vec<Complex<T>> {
    let deriv = p.derivative();
    let mut z = seeds;
    // distinct, slightly off-axis starting points (the iteration divides by
    // pairwise differences and cannot leave the real axis from a real start)
    for (k, zk) in z.iter_mut().enumerate() {
        let s = T::c(1e-4) * (T::one() + zk.norm()) * T::c(1.0 + k as f64 * 1e-2);
        *zk = *zk + Complex::new(s * T::c(0.5), s);
    }
    for _ in 0..120 {
        let mut moved = T::zero();
        for k in 0..z.len() {
            let pv = p.eval_complex(z[k]);
            let dv = deriv.eval_complex(z[k]);
            if dv.norm() <= T::c(1e-300) {
                continue;
            }
            let w = pv / dv;
            let mut rep = Complex::new(T::zero(), T::zero());
            for j in 0..z.len() {
                if j != k {
                    let d = z[k] - z[j];
                    if d.norm() > T::c(1e-300) {
                        rep = rep + Complex::new(T::one(), T::zero()) / d;
                    }
                }
            }
            let denom = Complex::new(T::one(), T::zero()) - w * rep;
            let step = if denom.norm() > T::c(1e-300) { w / denom } else { w };
            if step.norm() < T::one() + z[k].norm() {
                z[k] = z[k] - step;
                moved = Float::max(moved, step.norm() / (T::one() + z[k].norm()));
            }
        }
        if moved <= T::c(1e-15) {
            break;
        }
    }
    z
}

/// Parlett-Reinsch balancing: diagonal similarity with powers of two until
/// row and column norms agree, preserving eigenvalues exactly.
fn balance<T: RealScalar>(m: &mut DMatrix<T>) {
    let n = m.nrows();
    let two = T::c(2.0);
    for _ in 0..32 {
        let mut converged = true;
        for i in 0..n {
            let mut r = T::zero();
            let mut c = T::zero();
            for j in 0..n {
                if j != i {
                    r = r + Float::abs(m[(i, j)]);
                    c = c + Float::abs(m[(j, i)]);
                }
            }
            if r <= T::zero() || c <= T::zero() {
                continue;
            }
            let mut f = T::one();
            let s = r + c;
            while c < r / two {
                c = c * two;
                r = r / two;
                f = f * two;
            }
            while c >= r * two {
                c = c / two;
                r = r * two;
                f = f / two;
            }
            if c + r < T::c(0.95) * s {
                converged = false;
                for j in 0..n {
                    m[(i, j)] = m[(i, j)] / f;
                    m[(j, i)] = m[(j, i)] * f;
                }
            }
        }
        if converged {
            break;
        }
    }
}

/// Eigenvalues through the Schur form with a bounded iteration count; a
/// stalled iteration is retried under a diagonal similarity that perturbs
/// the rounding pattern without moving the spectrum.
fn bounded_eigenvalues<T: RealScalar>(
    m: &DMatrix<T>,
) -> Result<nalgebra::DVector<Complex<T>>> {
    let n = m.nrows();
    let max_iter = 200 * n.max(4);
    for attempt in 0..3u32 {
        let mut mm = m.clone();
        if attempt > 0 {
            let f = T::one() + T::c(1e-3) * T::c(attempt as f64);
            let mut d = T::one();
            for i in 0..n {
                for j in 0..n {
                    mm[(i, j)] = mm[(i, j)] * d;
                    mm[(j, i)] = mm[(j, i)] / d;
                }
                d = d * f;
            }
        }
        if let Some(schur) = nalgebra::linalg::Schur::try_new(
            mm,
            T::c(1e-15),
            max_iter << attempt,
        ) {
            return Ok(schur.complex_eigenvalues());
        }
    }
    Err(Error::NonConvergence(
        "eigenvalue iteration stalled on the companion matrix".into(),
    ))
}

fn pair_conjugates<T: RealScalar>(roots: &mut [Complex<T>]) {
    let n = roots.len();
    // tolerances are relative to each root's own magnitude: root moduli can
    // span many orders, and a global scale would swallow small conjugate pairs
    for r in roots.iter_mut() {
        if Float::abs(r.im) < T::c(1e-7) * (T::one() + r.norm()) {
            r.im = T::zero();
        }
    }
    let mut used = vec![false; n];
    for i in 0..n {
        if used[i] || roots[i].im == T::zero() {
            continue;
        }
        let mut best: Option<(usize, T)> = None;
        for j in 0..n {
            if j == i || used[j] || roots[j].im == T::zero() {
                continue;
            }
            let d = (roots[j] - roots[i].conj()).norm();
            if best.map_or(true, |(_, bd)| d < bd) {
                best = Some((j, d));
            }
        }
        if let Some((j, d)) = best {
            if d < T::c(1e-5) * (T::one() + roots[i].norm()) {
                let re = (roots[i].re + roots[j].re) / T::c(2.0);
                let im = (Float::abs(roots[i].im) + Float::abs(roots[j].im)) / T::c(2.0);
                let sign = if roots[i].im > T::zero() {
                    T::one()
                } else {
                    -T::one()
                };
                roots[i] = Complex::new(re, sign * im);
                roots[j] = roots[i].conj();
                used[i] = true;
                used[j] = true;
            }
        }
    }
}

/// Greatest common divisor of two polynomials, monic, with relative
/// tolerance for the remainder cutoff.
pub fn poly_gcd<T: RealScalar>(a: &Polynomial<T>, b: &Polynomial<T>, rel_tol: T) -> Polynomial<T> {
    let mut p = a.monic();
    let mut q = b.monic();
    if p.degree() < q.degree() {
        std::mem::swap(&mut p, &mut q);
    }
    while !q.is_zero() && q.degree() >= 1 {
        let (_, r) = p.div_rem(&q);
        let cutoff = rel_tol * Float::max(p.coeff_norm(), q.coeff_norm());
        if r.coeff_norm() <= cutoff {
            return q.monic();
        }
        p = q;
        q = r.monic();
    }
    Polynomial::constant(T::one())
}

/// Ratio of two real polynomials, kept coprime to tolerance with a monic
/// denominator.
#[derive(Debug, Clone, PartialEq)]
pub struct RationalFunction<T: RealScalar> {
    num: Polynomial<T>,
    den: Polynomial<T>,
}

impl<T: RealScalar> RationalFunction<T> {
    pub fn new(num: Polynomial<T>, den: Polynomial<T>) -> Self {
        assert!(!den.is_zero(), "denominator must not be identically zero");
        let mut f = RationalFunction { num, den };
        f.normalize();
        f
    }

    pub fn zero() -> Self {
        RationalFunction {
            num: Polynomial::zero(),
            den: Polynomial::constant(T::one()),
        }
    }

    pub fn constant(c: T) -> Self {
        RationalFunction {
            num: Polynomial::constant(c),
            den: Polynomial::constant(T::one()),
        }
    }

    pub fn from_poly(p: Polynomial<T>) -> Self {
        RationalFunction {
            num: p,
            den: Polynomial::constant(T::one()),
        }
    }

    fn normalize(&mut self) {
        if self.num.is_zero() {
            self.den = Polynomial::constant(T::one());
            return;
        }
        let g = poly_gcd(&self.num, &self.den, T::c(1e-8));
        if g.degree() >= 1 {
            let (qn, _) = self.num.div_rem(&g);
            let (qd, _) = self.den.div_rem(&g);
            self.num = qn;
            self.den = qd;
        }
        let lead = self.den.leading();
        self.num = self.num.scale(T::one() / lead);
        self.den = self.den.scale(T::one() / lead);
    }

    pub fn num(&self) -> &Polynomial<T> {
        &self.num
    }

    pub fn den(&self) -> &Polynomial<T> {
        &self.den
    }

    pub fn is_zero(&self) -> bool {
        self.num.is_zero()
    }

    /// Evaluate at a complex point; errors on (numerical) poles.
    pub fn eval(&self, s: Complex<T>) -> Result<Complex<T>> {
        let d = self.den.eval_complex(s);
        let scale = self.den.coeff_norm()
            * Float::max(T::one(), Float::powi(s.norm(), self.den.degree() as i32));
        if d.norm() <= T::c(1e-12) * scale {
            return Err(Error::PoleEvaluation(
                <T as FromPrimitive>::from_f64(0.0)
                    .map(|_| d.norm().as_f64())
                    .unwrap_or(0.0),
            ));
        }
        Ok(self.num.eval_complex(s) / d)
    }

    /// Value at `s = infinity`: 0 when strictly proper, the leading-coefficient
    /// ratio when biproper, `None` when improper (unbounded).
    pub fn value_at_infinity(&self) -> Option<T> {
        if self.num.is_zero() {
            return Some(T::zero());
        }
        match self.num.degree().cmp(&self.den.degree()) {
            std::cmp::Ordering::Less => Some(T::zero()),
            std::cmp::Ordering::Equal => Some(self.num.leading() / self.den.leading()),
            std::cmp::Ordering::Greater => None,
        }
    }

    pub fn add(&self, other: &Self) -> Self {
        RationalFunction::new(
            self.num
                .mul(&other.den)
                .add(&other.num.mul(&self.den)),
            self.den.mul(&other.den),
        )
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.scale(-T::one()))
    }

    pub fn mul(&self, other: &Self) -> Self {
        RationalFunction::new(self.num.mul(&other.num), self.den.mul(&other.den))
    }

    pub fn scale(&self, k: T) -> Self {
        RationalFunction {
            num: self.num.scale(k),
            den: self.den.clone(),
        }
    }

    pub fn inv(&self) -> Self {
        assert!(!self.num.is_zero(), "inverse of the zero function");
        RationalFunction::new(self.den.clone(), self.num.clone())
    }

    /// deg(den) - deg(num); negative for improper functions.
    pub fn relative_degree(&self) -> isize {
        self.den.degree() as isize - self.num.degree() as isize
    }
}

/// An unstable SISO plant: transfer function plus its open-right-half-plane
/// poles and zeros, which carry all the interpolation data.
#[derive(Debug, Clone)]
pub struct Plant<T: RealScalar> {
    pub transfer: RationalFunction<T>,
    pub unstable_poles: Vec<Complex<T>>,
    pub nmp_zeros: Vec<Complex<T>>,
}

impl<T: RealScalar> Plant<T> {
    /// Interpolation nodes: unstable poles first, then nonminimum-phase zeros.
    pub fn nodes(&self) -> Vec<Complex<T>> {
        let mut v = self.unstable_poles.clone();
        v.extend_from_slice(&self.nmp_zeros);
        v
    }
}

const BOUNDARY_TOL: f64 = 1e-9;
const DISTINCT_TOL: f64 = 1e-6;

/// Separate the right-half-plane poles and zeros of a proper transfer
/// function. The theory needs open-half-plane roots, so anything within
/// `1e-9` (relative) of the imaginary axis is rejected outright.
pub fn classify_plant<T: RealScalar>(transfer: RationalFunction<T>) -> Result<Plant<T>> {
    if transfer.num().degree() > transfer.den().degree() {
        return Err(Error::InvalidParameter(
            "plant transfer function must be proper".into(),
        ));
    }
    let mut unstable_poles = rhp_roots(transfer.den())?;
    let nmp_zeros = if transfer.num().degree() >= 1 {
        rhp_roots(transfer.num())?
    } else {
        vec![]
    };
    if unstable_poles.is_empty() {
        return Err(Error::StablePlant);
    }
    sort_conjugate(&mut unstable_poles);
    let mut all = unstable_poles.clone();
    all.extend_from_slice(&nmp_zeros);
    for i in 0..all.len() {
        for j in (i + 1)..all.len() {
            let sep = (all[i] - all[j]).norm();
            let scale = Float::max(T::one(), Float::max(all[i].norm(), all[j].norm()));
            if sep < T::c(DISTINCT_TOL) * scale {
                return Err(Error::InvalidParameter(format!(
                    "poles/zeros {:?} and {:?} are not distinct",
                    all[i], all[j]
                )));
            }
        }
    }
    Ok(Plant {
        transfer,
        unstable_poles,
        nmp_zeros,
    })
}

fn rhp_roots<T: RealScalar>(p: &Polynomial<T>) -> Result<Vec<Complex<T>>> {
    if p.degree() < 1 {
        return Ok(vec![]);
    }
    let roots = p.roots()?;
    let mut out = vec![];
    for r in roots {
        let scale = Float::max(T::one(), r.norm());
        if Float::abs(r.re) < T::c(BOUNDARY_TOL) * scale {
            return Err(Error::BoundaryPoleZero {
                root: format!("{:?}", r),
                tol: BOUNDARY_TOL,
            });
        }
        if r.re > T::zero() {
            out.push(r);
        }
    }
    sort_conjugate(&mut out);
    Ok(out)
}

fn sort_conjugate<T: RealScalar>(v: &mut [Complex<T>]) {
    v.sort_by(|a, b| {
        (a.re).as_f64()
            .partial_cmp(&(b.re).as_f64())
            .unwrap()
            .then(
                (Float::abs(a.im).as_f64())
                    .partial_cmp(&(Float::abs(b.im).as_f64()))
                    .unwrap(),
            )
            .then(
                (b.im).as_f64()
                    .partial_cmp(&(a.im).as_f64())
                    .unwrap(),
            )
    });
}

/// Stable spectral factor of a magnitude polynomial.
///
/// Input `B` is a polynomial in `u = omega^2` with `B(omega^2) >= 0` on the
/// real axis; returns a stable real `b(s)` with `|b(i omega)|^2 = B(omega^2)`
/// and positive leading normalization.
pub fn spectral_factor<T: RealScalar>(b_mag: &Polynomial<T>) -> Result<Polynomial<T>> {
    if b_mag.is_zero() {
        return Err(Error::NotNonnegative(0.0));
    }
    let lead = b_mag.leading();
    if lead < T::zero() {
        return Err(Error::NotNonnegative(lead.as_f64()));
    }
    if b_mag.degree() == 0 {
        let c = b_mag.coeffs()[0];
        if c < T::zero() {
            return Err(Error::NotNonnegative(c.as_f64()));
        }
        return Ok(Polynomial::constant(Float::sqrt(c)));
    }
    // grid check for sign violations on u >= 0
    let norm = b_mag.coeff_norm();
    let mut min_val = T::zero();
    for i in 0..=2000 {
        let u = T::c(10f64.powf(-6.0 + 12.0 * i as f64 / 2000.0));
        min_val = Float::min(min_val, b_mag.eval(u) / norm);
    }
    if min_val < T::c(-1e-7) {
        return Err(Error::NotNonnegative(min_val.as_f64()));
    }

    let u_roots = b_mag.roots()?;
    let mut s_roots: Vec<Complex<T>> = Vec::with_capacity(b_mag.degree());
    // roots on the positive real u-axis give imaginary-axis s-roots and must
    // pair up; alternate signs to keep the factor conjugate-closed.
    // classification thresholds are relative to each root's own magnitude:
    // root moduli can span many orders within one factorization
    let mut axis_pending: Vec<Complex<T>> = vec![];
    for r in u_roots {
        let local = T::one() + r.norm();
        let im_small = Float::abs(r.im) < T::c(1e-7) * local;
        if im_small && r.re > T::c(1e-9) * local {
            let w = Float::sqrt(r.re);
            axis_pending.push(Complex::new(T::zero(), w));
        } else if im_small {
            // u <= 0: s = +-sqrt(-u) real; take the nonpositive one
            let x = Float::sqrt(Float::max(-r.re, T::zero()));
            s_roots.push(Complex::new(-x, T::zero()));
        } else {
            // complex u: s^2 = -u, take the left-half-plane branch
            let s = (-Complex::new(r.re, r.im)).sqrt();
            let s = if s.re <= T::zero() { s } else { -s };
            s_roots.push(s);
        }
    }
    axis_pending.sort_by(|a, b| {
        (a.im).as_f64()
            .partial_cmp(&(b.im).as_f64())
            .unwrap()
    });
    if axis_pending.len() % 2 != 0 {
        return Err(Error::NotNonnegative(0.0));
    }
    // each imaginary pair {iw, iw} (even multiplicity in u) contributes the
    // conjugate pair {iw, -iw}
    let mut i = 0;
    while i < axis_pending.len() {
        let w = (axis_pending[i].im + axis_pending[i + 1].im) / T::c(2.0);
        s_roots.push(Complex::new(T::zero(), w));
        s_roots.push(Complex::new(T::zero(), -w));
        i += 2;
    }
    let b = Polynomial::from_roots(&s_roots, Float::sqrt(lead));
    // verification grid
    let bnorm = Float::max(b_mag.coeff_norm(), T::one());
    for i in 0..=1000 {
        let w = T::c(10f64.powf(-3.0 + 6.0 * i as f64 / 1000.0));
        let have = b.eval_complex(Complex::new(T::zero(), w)).norm_sqr();
        let want = b_mag.eval(w * w);
        let local = bnorm * Float::max(T::one(), Float::powi(w, 2 * b_mag.degree() as i32));
        if Float::abs(have - want) > T::c(1e-6) * local {
            return Err(Error::NonConvergence(format!(
                "spectral factor mismatch at omega = {:?}",
                w
            )));
        }
    }
    Ok(b)
}
