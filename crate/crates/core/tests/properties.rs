//! Property suites for the geometry, weights, interpolation, and
//! approximation layers.

use std::f64::consts::PI;

use marginforge::approx::{approx_weight, default_grid, reduce_interpolant, ApproxOptions};
use marginforge::pick::{
    build_pick, feasibility_margin, is_feasible, max_entropy_interpolant, InterpolationProblem,
};
use marginforge::rational::RationalFunction;
use marginforge::regions::{dist_to_cut, dist_to_simultaneous, SimultaneousRegion};
use marginforge::weights::{phi_delay, phi_shifted, WeightFunction, WeightMode, WeightSpec};
use marginforge::C64;
use proptest::prelude::*;

const FLOOR: f64 = 1e-4;

fn delay_spec(tau: f64, t0: f64) -> WeightSpec {
    WeightSpec::new(tau, RationalFunction::constant(t0), FLOOR, WeightMode::Delay).unwrap()
}

proptest! {
    /// The shifted weight is the reciprocal of the distance from the shift to
    /// the cut, unless that reciprocal falls below the floor.
    #[test]
    fn reciprocal_identity(
        tau in 0.01f64..20.0,
        t0 in -20.0f64..0.4,
        omega in 1e-3f64..1e3,
    ) {
        let spec = delay_spec(tau, t0);
        let phi = phi_shifted(&spec, omega).unwrap();
        let d = dist_to_cut(omega * tau, C64::new(t0, 0.0));
        prop_assert!(phi >= FLOOR - 1e-15);
        if d.is_finite() && 1.0 / d >= FLOOR {
            prop_assert!((phi * d - 1.0).abs() < 1e-9, "phi {phi} dist {d}");
        } else {
            prop_assert!((phi - FLOOR).abs() < 1e-15);
        }
    }

    /// Cut distances are conjugate-symmetric in the phase parameter.
    #[test]
    fn cut_conjugate_symmetry(
        phi in -10.0f64..10.0,
        re in -5.0f64..5.0,
        im in -5.0f64..5.0,
    ) {
        let z = C64::new(re, im);
        let a = dist_to_cut(phi, z);
        let b = dist_to_cut(-phi, z.conj());
        if a.is_finite() {
            prop_assert!((a - b).abs() < 1e-12);
        } else {
            prop_assert!(b.is_infinite());
        }
    }

    /// Simultaneous-region distances conjugate under frequency sign flip.
    #[test]
    fn region_conjugate_symmetry(
        k in 1.01f64..3.0,
        phase in 0.0f64..1.5,
        tau in 0.0f64..3.0,
        omega in 0.05f64..3.0,
        re in -3.0f64..3.0,
        im in -3.0f64..3.0,
    ) {
        let z = C64::new(re, im);
        let pos = SimultaneousRegion::new(k, phase, tau, omega).unwrap();
        let neg = SimultaneousRegion::new(k, phase, tau, -omega).unwrap();
        let a = dist_to_simultaneous(&pos, z);
        let b = dist_to_simultaneous(&neg, z.conj());
        prop_assert!((a - b).abs() < 1e-12 || (a.is_infinite() && b.is_infinite()));
    }

    /// With no shift the delay weight is nondecreasing in the horizon.
    #[test]
    fn weight_monotone_in_horizon(
        omega in 1e-3f64..1e3,
        tau in 0.01f64..30.0,
        bump in 1.0f64..4.0,
    ) {
        prop_assert!(phi_delay(tau * bump, omega) >= phi_delay(tau, omega) - 1e-12);
    }

    /// The region at trivial gain and phase degenerates to the delay cut.
    #[test]
    fn region_reduces_to_cut(
        tau in 0.01f64..5.0,
        omega in 0.01f64..5.0,
        re in -3.0f64..3.0,
        im in -3.0f64..3.0,
    ) {
        let z = C64::new(re, im);
        let region = SimultaneousRegion::new(1.0, 0.0, tau, omega).unwrap();
        let a = dist_to_simultaneous(&region, z);
        let b = dist_to_cut(omega * tau, z);
        prop_assert!((a - b).abs() < 1e-9 || (a.is_infinite() && b.is_infinite()));
    }
}

/// Conjugate-closed random interpolation data: a mix of real nodes with real
/// values and conjugate node pairs with conjugate values.
fn random_problem(
    reals: &[(f64, f64)],
    pairs: &[(f64, f64, f64, f64)],
) -> InterpolationProblem {
    let mut nodes = vec![];
    let mut values = vec![];
    for &(x, v) in reals {
        nodes.push(C64::new(x, 0.0));
        values.push(C64::new(v, 0.0));
    }
    for &(x, y, vr, vi) in pairs {
        nodes.push(C64::new(x, y));
        values.push(C64::new(vr, vi));
        nodes.push(C64::new(x, -y));
        values.push(C64::new(vr, -vi));
    }
    InterpolationProblem::new(nodes, values).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    /// Central solutions of strictly feasible problems interpolate the data
    /// and stay strictly inside the unit ball on the axis.
    #[test]
    fn central_interpolant_contractive(
        x1 in 0.1f64..2.0,
        v1 in -0.6f64..0.6,
        x2 in 2.5f64..4.0,
        y2 in 0.2f64..2.0,
        vr in -0.4f64..0.4,
        vi in -0.4f64..0.4,
    ) {
        let prob = random_problem(&[(x1, v1)], &[(x2, y2, vr, vi)]);
        let pick = build_pick(&prob);
        prop_assume!(is_feasible(&pick, feasibility_margin(&pick)));
        let t = max_entropy_interpolant(&prob).unwrap();
        for (n, v) in prob.nodes().iter().zip(prob.values()) {
            prop_assert!((t.eval(*n).unwrap() - v).norm() < 1e-6);
        }
        for i in 0..200 {
            let w = if i == 0 { 0.0 } else { 10f64.powf(-3.0 + 6.0 * i as f64 / 199.0) };
            prop_assert!(t.eval(C64::new(0.0, w)).unwrap().norm() < 1.0);
        }
    }

    /// Degree reduction at sufficient degree preserves the interpolation data.
    /// Two degrees above the node count leave room for the spectral-factor
    /// correction, which a bare node-count target does not.
    #[test]
    fn reduction_preserves_data(
        x1 in 0.1f64..2.0,
        v1 in -0.6f64..0.6,
        x2 in 2.5f64..4.0,
        v2 in -0.6f64..0.6,
    ) {
        let prob = random_problem(&[(x1, v1), (x2, v2)], &[]);
        let pick = build_pick(&prob);
        prop_assume!(is_feasible(&pick, feasibility_margin(&pick)));
        let t = max_entropy_interpolant(&prob).unwrap();
        let reduced = reduce_interpolant(&t, &prob, prob.len() + 2).unwrap();
        for (n, v) in prob.nodes().iter().zip(prob.values()) {
            prop_assert!((reduced.eval(*n).unwrap() - v).norm() < 1e-6,
                "node {n} value {v}");
        }
    }
}

/// Raising the approximation degree does not worsen the achieved overshoot
/// (up to the bisection tolerance), and high degree reaches a tight fit.
#[test]
fn overshoot_converges_with_degree() {
    let spec = delay_spec(1.0, 0.0);
    let wf = WeightFunction::new(spec);
    let grid = default_grid(&wf);
    let mut last = f64::INFINITY;
    for deg in [3usize, 5, 8, 10] {
        let fit = approx_weight(&wf, deg, deg, &grid, ApproxOptions::default()).unwrap();
        assert!(
            fit.eps_star <= last * 1.05 + 2e-3,
            "deg {deg}: {} after {last}",
            fit.eps_star
        );
        last = fit.eps_star;
    }
    assert!(last <= 0.05, "degree-10 overshoot {last}");
}

/// Weight breakpoints bracket the floor region: below the first kink the
/// reciprocal distance is tiny, so the floor rules.
#[test]
fn floor_active_at_low_frequency() {
    let spec = delay_spec(1.0, 0.0);
    let phi = phi_shifted(&spec, 1e-9).unwrap();
    assert!((phi - FLOOR).abs() < 1e-12);
}

/// Independent-mode weight dominates each of its component weights.
#[test]
fn independent_weight_dominates_components() {
    let spec = WeightSpec::new(
        1.0,
        RationalFunction::zero(),
        FLOOR,
        WeightMode::Independent {
            gain_k: 2.0,
            phase_phi: PI / 6.0,
        },
    )
    .unwrap();
    let delay_only = delay_spec(1.0, 0.0);
    for i in 0..200 {
        let w = 10f64.powf(-2.0 + 4.0 * i as f64 / 199.0);
        let multi = WeightFunction::new(spec.clone()).eval(w).unwrap();
        let delay = WeightFunction::new(delay_only.clone()).eval(w).unwrap();
        assert!(multi >= delay - 1e-12, "omega {w}: {multi} < {delay}");
    }
}
