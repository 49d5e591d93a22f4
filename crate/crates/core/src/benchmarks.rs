//! Built-in benchmark plants with reference values for regression testing
//! and demos. Every reference value carries the formula or measurement it
//! derives from, together with the tolerance band acceptance tests use.

use std::f64::consts::PI;

use crate::error::Result;
use crate::rational::{classify_plant, Plant, Polynomial, RationalFunction};
use crate::weights::WeightMode;

/// A named reference value with its tolerance band and derivation note.
#[derive(Debug, Clone)]
pub struct Reference {
    pub name: &'static str,
    pub value: f64,
    pub tolerance: f64,
    /// How the value is obtained (closed-form formula or measurement).
    pub note: &'static str,
}

/// One benchmark: a plant, the margin mode it is tested under, reference
/// values, and an optional parameter sweep grid.
#[derive(Debug, Clone)]
pub struct BenchmarkCase {
    pub id: &'static str,
    pub plant: Plant<f64>,
    pub mode: WeightMode,
    pub references: Vec<Reference>,
    pub sweep: Option<Vec<f64>>,
}

/// Third-order plant with one unstable pole at 0.1081 and a nonminimum-phase
/// zero at 10: `0.1 (0.1 s - 1)(s + 0.1659) / ((s - 0.1081)(s^2 + 0.2981 s + 0.06281))`.
pub fn ex1_plant() -> Result<Plant<f64>> {
    let num = Polynomial::new(vec![-1.0, 0.1])
        .mul(&Polynomial::new(vec![0.1659, 1.0]))
        .scale(0.1);
    let den = Polynomial::new(vec![-0.1081, 1.0])
        .mul(&Polynomial::new(vec![0.06281, 0.2981, 1.0]));
    classify_plant(RationalFunction::new(num, den))
}

/// One real unstable pole against one real nonminimum-phase zero:
/// `(s - 2)/(s - p)`.
pub fn ex2_plant(p: f64) -> Result<Plant<f64>> {
    classify_plant(RationalFunction::new(
        Polynomial::new(vec![-2.0, 1.0]),
        Polynomial::new(vec![-p, 1.0]),
    ))
}

/// Two real unstable poles, no zero: `1/((s - 0.2)(s - p2))`.
pub fn ex3_plant(p2: f64) -> Result<Plant<f64>> {
    classify_plant(RationalFunction::new(
        Polynomial::constant(1.0),
        Polynomial::new(vec![-0.2, 1.0]).mul(&Polynomial::new(vec![-p2, 1.0])),
    ))
}

/// Complex unstable pole pair `r e^{+- i theta}` against a real zero:
/// `(s - z)/(s^2 - 2 r cos(theta) s + r^2)`.
pub fn ex4_plant(r: f64, theta: f64, z: f64) -> Result<Plant<f64>> {
    classify_plant(RationalFunction::new(
        Polynomial::new(vec![-z, 1.0]),
        Polynomial::new(vec![r * r, -2.0 * r * theta.cos(), 1.0]),
    ))
}

/// The parameter triples the complex-pole family is exercised at.
pub const EX4_POLE_PARAMS: [(f64, f64); 3] = [(1.0, PI / 4.0), (1.0, PI / 3.0), (2.0, PI / 3.0)];

/// All built-in cases, addressable by id.
pub fn builtin_cases() -> Vec<BenchmarkCase> {
    let sweep = |lo: f64, hi: f64, n: usize| -> Vec<f64> {
        (0..n)
            .map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64)
            .collect()
    };
    vec![
        BenchmarkCase {
            id: "ex1",
            plant: ex1_plant().expect("ex1 plant is well-posed"),
            mode: WeightMode::Delay,
            references: vec![Reference {
                name: "tight_delay_margin",
                value: 18.301,
                tolerance: 1e-3,
                note: "2/p - 2/z with p = 0.1081, z = 10",
            }],
            sweep: None,
        },
        BenchmarkCase {
            id: "ex2",
            plant: ex2_plant(0.5).expect("ex2 plant is well-posed"),
            mode: WeightMode::Delay,
            references: vec![Reference {
                name: "tight_delay_margin",
                value: 3.0,
                tolerance: 1e-3,
                note: "2/p - 2/z with p = 0.5, z = 2 (valid for p < z)",
            }],
            sweep: Some(sweep(0.3, 4.0, 16)),
        },
        BenchmarkCase {
            id: "ex3",
            plant: ex3_plant(0.5).expect("ex3 plant is well-posed"),
            mode: WeightMode::Delay,
            references: vec![],
            sweep: Some(sweep(0.1, 3.0, 16)),
        },
        BenchmarkCase {
            id: "ex4",
            plant: ex4_plant(1.0, PI / 4.0, 1.0).expect("ex4 plant is well-posed"),
            mode: WeightMode::Delay,
            references: vec![],
            sweep: Some(sweep(0.01, 4.0, 16)),
        },
        BenchmarkCase {
            id: "ex5",
            plant: ex1_plant().expect("ex5 reuses the third-order plant"),
            mode: WeightMode::Simultaneous {
                gain_k: 1.5,
                phase_phi: PI / 12.0,
            },
            references: vec![
                Reference {
                    name: "guaranteed_delay_margin",
                    value: 1.870,
                    tolerance: 0.4,
                    note: "certified simultaneous bound at gain 1.5, phase pi/12 \
                           (solver- and degree-dependent; band is deliberately wide)",
                },
                Reference {
                    name: "achieved_delay_margin",
                    value: 2.254,
                    tolerance: 0.5,
                    note: "delay at which the realized loop first touches the region",
                },
                Reference {
                    name: "critical_frequency",
                    value: 0.7188,
                    tolerance: 0.5,
                    note: "frequency where the realized loop comes closest to the region",
                },
            ],
            sweep: None,
        },
    ]
}

/// Case lookup by id.
pub fn case(id: &str) -> Option<BenchmarkCase> {
    builtin_cases().into_iter().find(|c| c.id == id)
}
