//! Nevanlinna-Pick interpolation on the right half-plane.
//!
//! Feasibility of `|f| <= 1`, `f(v_j) = w_j` with `Re v_j > 0` is decided by
//! positive definiteness of the Pick matrix. For strictly feasible data the
//! central (maximum-entropy) solution is built from the J-lossless transfer
//! matrix of the data; with conjugate-closed data it has real coefficients.

use crate::error::{Error, Result};
use crate::rational::{Polynomial, RationalFunction};
use crate::C64;
use nalgebra::DMatrix;

/// Margin used to call a Pick matrix "strictly" positive definite, relative
/// to its trace.
pub const FEAS_MARGIN_REL: f64 = 1e-10;

/// Conjugate-closed interpolation data in the open right half-plane.
#[derive(Debug, Clone)]
pub struct InterpolationProblem {
    nodes: Vec<C64>,
    values: Vec<C64>,
    /// partner[j] = index of the conjugate node (self-paired when real)
    partner: Vec<usize>,
}

impl InterpolationProblem {
    /// Validates distinctness and half-plane location, pairs conjugate nodes,
    /// and snaps values to exact conjugate closure (averaging out numerical
    /// asymmetry from upstream quadrature).
    pub fn new(nodes: Vec<C64>, values: Vec<C64>) -> Result<Self> {
        assert_eq!(nodes.len(), values.len());
        if nodes.is_empty() {
            return Err(Error::InvalidParameter("no interpolation nodes".into()));
        }
        for (i, n) in nodes.iter().enumerate() {
            if n.re <= 0.0 {
                return Err(Error::InvalidParameter(format!(
                    "node {n} not in the open right half-plane"
                )));
            }
            for m in nodes.iter().skip(i + 1) {
                if (n - m).norm() < 1e-12 * n.norm().max(1.0) {
                    return Err(Error::DuplicateNodes);
                }
            }
        }
        let mut partner = vec![usize::MAX; nodes.len()];
        for (i, n) in nodes.iter().enumerate() {
            if n.im.abs() < 1e-12 * n.norm().max(1.0) {
                partner[i] = i;
                continue;
            }
            let p = nodes
                .iter()
                .position(|m| (m - n.conj()).norm() < 1e-9 * n.norm().max(1.0))
                .ok_or_else(|| {
                    Error::InvalidParameter(format!(
                        "node set not conjugate-closed: no partner for {n}"
                    ))
                })?;
            partner[i] = p;
        }
        let mut values = values;
        for (i, &p) in partner.iter().enumerate() {
            if p == i {
                values[i] = C64::new(values[i].re, 0.0).into();
            } else if p > i {
                let v = 0.5 * (values[i] + values[p].conj());
                values[i] = v;
                values[p] = v.conj();
            }
        }
        Ok(InterpolationProblem {
            nodes,
            values,
            partner,
        })
    }

    pub fn nodes(&self) -> &[C64] {
        &self.nodes
    }

    pub fn values(&self) -> &[C64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn conjugate_partner(&self, j: usize) -> usize {
        self.partner[j]
    }
}

/// Hermitian Pick matrix with entries `(1 - w_j conj(w_k)) / (v_j + conj(v_k))`.
#[derive(Debug, Clone)]
pub struct PickMatrix {
    pub entries: DMatrix<C64>,
}

pub fn build_pick(prob: &InterpolationProblem) -> PickMatrix {
    let n = prob.len();
    let v = prob.nodes();
    let w = prob.values();
    let mut m = DMatrix::<C64>::zeros(n, n);
    for j in 0..n {
        for k in 0..n {
            m[(j, k)] = (C64::new(1.0, 0.0) - w[j] * w[k].conj()) / (v[j] + v[k].conj());
        }
    }
    // enforce exact Hermitian symmetry against roundoff
    for j in 0..n {
        for k in (j + 1)..n {
            let avg = 0.5 * (m[(j, k)] + m[(k, j)].conj());
            m[(j, k)] = avg;
            m[(k, j)] = avg.conj();
        }
        m[(j, j)] = C64::new(m[(j, j)].re, 0.0);
    }
    PickMatrix { entries: m }
}

pub fn min_eigenvalue(pick: &PickMatrix) -> f64 {
    pick.entries
        .clone()
        .symmetric_eigen()
        .eigenvalues
        .iter()
        .cloned()
        .fold(f64::INFINITY, f64::min)
}

/// Strict positive definiteness with a numerical margin.
pub fn is_feasible(pick: &PickMatrix, margin: f64) -> bool {
    min_eigenvalue(pick) > margin
}

/// Default feasibility margin for a given Pick matrix.
pub fn feasibility_margin(pick: &PickMatrix) -> f64 {
    FEAS_MARGIN_REL * pick.entries.trace().re.abs()
}

/// Central (maximum-entropy) solution of a strictly feasible problem.
///
/// With Pick matrix `P`, solve `P G = [1 | w]`. The solution is
///
/// `f(s) = sum_j G_{j,1} e_j(s) / (1 + sum_j conj(w_j) G_{j,1} e_j(s))`,
/// `e_j(s) = 1/(s + conj(v_j))`,
///
/// the zero-parameter member of the linear-fractional solution family of the
/// J-lossless transfer matrix attached to the data. It interpolates the data,
/// is analytic in the right half-plane, and has supremum norm below one;
/// conjugate-closed data gives real coefficients.
pub fn max_entropy_interpolant(prob: &InterpolationProblem) -> Result<RationalFunction<f64>> {
    let n = prob.len();
    let v = prob.nodes();
    let w = prob.values();

    let pick = build_pick(prob);
    let min_eig = min_eigenvalue(&pick);
    if min_eig <= feasibility_margin(&pick) {
        return Err(Error::Infeasible(min_eig));
    }

    let mut rhs = DMatrix::<C64>::zeros(n, 2);
    for j in 0..n {
        rhs[(j, 0)] = C64::new(1.0, 0.0);
        rhs[(j, 1)] = w[j];
    }
    let g = pick
        .entries
        .clone()
        .lu()
        .solve(&rhs)
        .ok_or_else(|| Error::IllConditioned("singular data matrix".into()))?;

    // assemble numerator and denominator over the common pole set -conj(v_j)
    let base: Vec<Vec<C64>> = (0..n)
        .map(|j| {
            let mut acc = vec![C64::new(1.0, 0.0)];
            for (l, vl) in v.iter().enumerate() {
                if l != j {
                    acc = cpoly_mul(&acc, &[vl.conj(), C64::new(1.0, 0.0)]);
                }
            }
            acc
        })
        .collect();
    let mut full = vec![C64::new(1.0, 0.0)];
    for vl in v {
        full = cpoly_mul(&full, &[vl.conj(), C64::new(1.0, 0.0)]);
    }
    let mut num = vec![C64::new(0.0, 0.0); n.max(1)];
    let mut den = full.clone();
    for j in 0..n {
        let cj = g[(j, 1)];
        num = cpoly_add(&num, &cpoly_scale(&base[j], cj));
        den = cpoly_add(&den, &cpoly_scale(&base[j], w[j].conj() * cj));
    }

    let scale = den
        .iter()
        .chain(num.iter())
        .map(|c| c.norm())
        .fold(0.0, f64::max);
    let imag = den
        .iter()
        .chain(num.iter())
        .map(|c| c.im.abs())
        .fold(0.0, f64::max);
    if imag > 1e-8 * scale {
        return Err(Error::IllConditioned(format!(
            "coefficients not real (residual imaginary part {imag:.3e})"
        )));
    }
    let num_re = Polynomial::new(num.iter().map(|c| c.re).collect());
    let den_re = Polynomial::new(den.iter().map(|c| c.re).collect());
    let f = RationalFunction::new(num_re, den_re);

    // postcondition checks: interpolation, stability, contractiveness
    for (vj, wj) in v.iter().zip(w) {
        let fv = f.eval(*vj)?;
        if (fv - wj).norm() > 1e-8 * wj.norm().max(1.0) {
            return Err(Error::IllConditioned(format!(
                "interpolation residual {:.3e} at node {vj}",
                (fv - wj).norm()
            )));
        }
    }
    if f.den().degree() >= 1 {
        for r in f.den().roots()? {
            if r.re >= -1e-9 * r.norm().max(1.0) {
                return Err(Error::IllConditioned(format!(
                    "central solution has an unstable pole at {r}"
                )));
            }
        }
    }
    let mut sup: f64 = 0.0;
    for i in 0..512 {
        let omega = 10f64.powf(-3.0 + 6.0 * i as f64 / 511.0);
        sup = sup.max(f.eval(C64::new(0.0, omega))?.norm());
        sup = sup.max(f.eval(C64::new(0.0, -omega))?.norm());
    }
    sup = sup.max(f.eval(C64::new(0.0, 0.0))?.norm());
    if sup >= 1.0 {
        return Err(Error::IllConditioned(format!(
            "central solution reaches modulus {sup} on the axis"
        )));
    }
    Ok(f)
}

fn cpoly_mul(a: &[C64], b: &[C64]) -> Vec<C64> {
    let mut out = vec![C64::new(0.0, 0.0); a.len() + b.len() - 1];
    for (i, x) in a.iter().enumerate() {
        for (j, y) in b.iter().enumerate() {
            out[i + j] += x * y;
        }
    }
    out
}

fn cpoly_add(a: &[C64], b: &[C64]) -> Vec<C64> {
    let n = a.len().max(b.len());
    (0..n)
        .map(|i| {
            a.get(i).copied().unwrap_or_else(|| C64::new(0.0, 0.0))
                + b.get(i).copied().unwrap_or_else(|| C64::new(0.0, 0.0))
        })
        .collect()
}

fn cpoly_scale(a: &[C64], k: C64) -> Vec<C64> {
    a.iter().map(|c| c * k).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    fn prob(nodes: Vec<C64>, values: Vec<C64>) -> InterpolationProblem {
        InterpolationProblem::new(nodes, values).unwrap()
    }

    #[test]
    fn pick_entries_closed_form() {
        let p = prob(vec![c(1.0, 0.0), c(2.0, 0.0)], vec![c(0.25, 0.0), c(0.0, 0.0)]);
        let m = build_pick(&p).entries;
        assert_relative_eq!(m[(0, 0)].re, (1.0 - 0.0625) / 2.0);
        assert_relative_eq!(m[(0, 1)].re, 1.0 / 3.0);
        assert_relative_eq!(m[(1, 0)].re, 1.0 / 3.0);
        assert_relative_eq!(m[(1, 1)].re, 0.25);
    }

    #[test]
    fn feasibility_verdicts() {
        let single = prob(vec![c(1.0, 0.0)], vec![c(0.0, 0.0)]);
        assert!(is_feasible(&build_pick(&single), 0.0));
        let boundary = prob(vec![c(1.0, 0.0)], vec![c(1.0, 0.0)]);
        assert!(!is_feasible(&build_pick(&boundary), 0.0));
        for (w1, want) in [(0.3, true), (0.34, false)] {
            let p = prob(vec![c(1.0, 0.0), c(2.0, 0.0)], vec![c(w1, 0.0), c(0.0, 0.0)]);
            let pick = build_pick(&p);
            assert_eq!(is_feasible(&pick, feasibility_margin(&pick)), want, "w1={w1}");
        }
    }

    #[test]
    fn central_solution_zero_data() {
        let p = prob(vec![c(0.7, 0.0)], vec![c(0.0, 0.0)]);
        let f = max_entropy_interpolant(&p).unwrap();
        assert!(f.is_zero());
    }

    #[test]
    fn central_solution_one_point() {
        let p = prob(vec![c(1.0, 0.0)], vec![c(0.5, 0.0)]);
        let f = max_entropy_interpolant(&p).unwrap();
        // closed form 4/(3s+5)
        assert_relative_eq!(f.eval(c(1.0, 0.0)).unwrap().re, 0.5, epsilon = 1e-12);
        assert_eq!(f.den().degree(), 1);
        assert_relative_eq!(f.num().coeffs()[0] / f.den().coeffs()[0], 0.8, epsilon = 1e-10);
    }

    #[test]
    fn central_solution_two_points() {
        let p = prob(vec![c(1.0, 0.0), c(2.0, 0.0)], vec![c(0.3, 0.0), c(0.0, 0.0)]);
        let f = max_entropy_interpolant(&p).unwrap();
        assert_relative_eq!(f.eval(c(1.0, 0.0)).unwrap().re, 0.3, epsilon = 1e-9);
        assert!(f.eval(c(2.0, 0.0)).unwrap().norm() < 1e-9);
    }

    #[test]
    fn conjugate_pair_gives_real_solution() {
        let p = prob(
            vec![c(1.0, 2.0), c(1.0, -2.0), c(3.0, 0.0)],
            vec![c(0.1, 0.05), c(0.1, -0.05), c(-0.15, 0.0)],
        );
        let f = max_entropy_interpolant(&p).unwrap();
        let fv = f.eval(c(1.0, 2.0)).unwrap();
        assert_relative_eq!(fv.re, 0.1, epsilon = 1e-9);
        assert_relative_eq!(fv.im, 0.05, epsilon = 1e-9);
    }

    #[test]
    fn infeasible_data_rejected() {
        let p = prob(vec![c(1.0, 0.0), c(2.0, 0.0)], vec![c(0.5, 0.0), c(0.0, 0.0)]);
        assert!(matches!(
            max_entropy_interpolant(&p),
            Err(Error::Infeasible(_))
        ));
    }

    #[test]
    fn duplicate_nodes_rejected() {
        assert!(matches!(
            InterpolationProblem::new(vec![c(1.0, 0.0), c(1.0, 0.0)], vec![c(0.0, 0.0); 2]),
            Err(Error::DuplicateNodes)
        ));
    }
}
