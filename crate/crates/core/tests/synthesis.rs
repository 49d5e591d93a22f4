//! Controller realization round trips: synthesize at an interior fraction of
//! a certified bound, then re-derive the margins from the region geometry.

use marginforge::approx::ApproxOptions;
use marginforge::margin::*;
use marginforge::rational::*;
use marginforge::synthesis::*;
use marginforge::weights::WeightSpec;

fn rational_query(num: Vec<f64>, den: Vec<f64>) -> MarginQuery {
    let plant =
        classify_plant(RationalFunction::new(Polynomial::new(num), Polynomial::new(den))).unwrap();
    let mut q = MarginQuery::new(plant);
    q.backend = WeightBackend::RationalApprox {
        n_b: 6,
        n_a: 6,
        options: ApproxOptions::default(),
    };
    q
}

#[test]
fn round_trip_single_pole_zero() {
    let q = rational_query(vec![-2.0, 1.0], vec![-0.5, 1.0]);
    let report = bound_bisection(&q).unwrap();
    let real = synthesize(&q, &report, 0.98).unwrap();

    assert!(real.loop_roots.iter().all(|r| r.re < 0.0), "1+PK root in Re >= 0");
    let tau = real.certified.2;
    let spec = WeightSpec::delay(0.99 * tau, q.shift.clone()).unwrap();
    let v = verify_margins(&real.closed_loop, &q.plant, &spec, 0.0).unwrap();
    assert!(v.pass, "min distance {} at omega {}", v.min_distance, v.argmin_omega);
    assert!(v.interp_residual <= 1e-6);
}

#[test]
fn zero_delay_stabilization() {
    // controller synthesized at half the certified bound still stabilizes
    // the undelayed loop: 1 + PK has no closed-right-half-plane roots.
    let q = rational_query(vec![-2.0, 1.0], vec![-0.5, 1.0]);
    let report = bound_bisection(&q).unwrap();
    let real = synthesize(&q, &report, 0.5).unwrap();
    assert!(real.loop_roots.iter().all(|r| r.re < 0.0));
}

#[test]
fn properness_gate() {
    let q = rational_query(vec![-2.0, 1.0], vec![-0.5, 1.0]);
    // zero shift passes the gate and switches the roll-off on
    let q2 = enforce_strict_properness(&q).unwrap();
    match q2.backend {
        WeightBackend::RationalApprox { options, .. } => {
            assert_eq!(options.improper_rolloff, Some(1))
        }
        _ => panic!("backend changed kind"),
    }
    // constant shift 0.3 violates the quarter bound
    let mut q3 = q.clone();
    q3.shift = RationalFunction::constant(0.3);
    assert!(matches!(
        enforce_strict_properness(&q3),
        Err(marginforge::Error::ShiftBlocksProperness(_))
    ));
}

#[test]
fn strictly_proper_closed_loop() {
    let q = rational_query(vec![-2.0, 1.0], vec![-0.5, 1.0]);
    let q = enforce_strict_properness(&q).unwrap();
    let report = bound_bisection(&q).unwrap();
    let real = synthesize(&q, &report, 0.98).unwrap();
    assert!(real.closed_loop.relative_degree() >= 1, "closed loop not strictly proper");
    assert!(real.loop_roots.iter().all(|r| r.re < 0.0));
    let spec = WeightSpec::delay(0.99 * real.certified.2, q.shift.clone()).unwrap();
    let v = verify_margins(&real.closed_loop, &q.plant, &spec, 0.0).unwrap();
    assert!(v.pass, "min distance {}", v.min_distance);
}

#[test]
fn hypothesis_gate() {
    let plant = classify_plant(RationalFunction::new(
        Polynomial::new(vec![-2.0, 1.0]),
        Polynomial::new(vec![-0.5, 1.0]),
    ))
    .unwrap();
    let t = RationalFunction::constant(0.6);
    let spec = WeightSpec::delay(1.0, RationalFunction::zero()).unwrap();
    assert!(matches!(
        verify_margins(&t, &plant, &spec, 0.0),
        Err(marginforge::Error::HypothesisViolated(_))
    ));
}

#[test]
fn stable_t_zero_distance_is_half() {
    // T == 0 keeps distance 1/2 to the cut once it reaches the full line.
    let plant = classify_plant(RationalFunction::new(
        Polynomial::new(vec![-2.0, 1.0]),
        Polynomial::new(vec![-0.5, 1.0]),
    ))
    .unwrap();
    let t = RationalFunction::zero();
    let spec = WeightSpec::delay(1.0, RationalFunction::zero()).unwrap();
    // T == 0 misses the interpolation condition T(p) = 1, so only the
    // distance field is meaningful here.
    let v = verify_margins(&t, &plant, &spec, 0.0).unwrap();
    assert!((v.min_distance - 0.5).abs() < 1e-9);
    assert!(!v.pass);
}
