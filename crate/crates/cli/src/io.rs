//! Plant-file ingestion and machine-readable result documents.

use marginforge::margin::MarginReport;
use marginforge::rational::{Polynomial, RationalFunction};
use marginforge::synthesis::VerificationReport;
use marginforge::weights::WeightMode;
use marginforge::C64;
use serde::{Deserialize, Serialize};

/// Structured plant description: either polynomial coefficients (ascending
/// degree) or gain/zeros/poles with complex numbers as `[re, im]` pairs.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PlantFile {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub num: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub den: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gain: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub zeros: Option<Vec<[f64; 2]>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub poles: Option<Vec<[f64; 2]>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub shift: Option<ShiftFile>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub margin: Option<MarginFile>,
}

/// Shift given as a constant or as a rational function.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ShiftFile {
    Constant(f64),
    Rational { num: Vec<f64>, den: Vec<f64> },
}

/// Margin specification embedded in a plant file.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MarginFile {
    pub mode: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gain: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub phase: Option<f64>,
}

impl PlantFile {
    /// The raw transfer function; classification happens at the call site so
    /// stability errors keep their own exit code.
    pub fn to_transfer(&self) -> Result<RationalFunction<f64>, String> {
        let by_coeffs = self.num.is_some() || self.den.is_some();
        let by_roots = self.gain.is_some() || self.zeros.is_some() || self.poles.is_some();
        if by_coeffs == by_roots {
            return Err(
                "plant file needs exactly one of {num, den} or {gain, zeros, poles}".into(),
            );
        }
        let transfer = if by_coeffs {
            let num = self.num.clone().ok_or("missing field: num")?;
            let den = self.den.clone().ok_or("missing field: den")?;
            RationalFunction::new(Polynomial::new(num), Polynomial::new(den))
        } else {
            let gain = self.gain.unwrap_or(1.0);
            let zeros: Vec<C64> = self
                .zeros
                .clone()
                .unwrap_or_default()
                .iter()
                .map(|&[re, im]| C64::new(re, im))
                .collect();
            let poles: Vec<C64> = self
                .poles
                .clone()
                .ok_or("missing field: poles")?
                .iter()
                .map(|&[re, im]| C64::new(re, im))
                .collect();
            RationalFunction::new(
                Polynomial::from_roots(&zeros, gain),
                Polynomial::from_roots(&poles, 1.0),
            )
        };
        Ok(transfer)
    }

    pub fn to_shift(&self) -> RationalFunction<f64> {
        match &self.shift {
            None => RationalFunction::zero(),
            Some(ShiftFile::Constant(c)) => RationalFunction::constant(*c),
            Some(ShiftFile::Rational { num, den }) => RationalFunction::new(
                Polynomial::new(num.clone()),
                Polynomial::new(den.clone()),
            ),
        }
    }

    pub fn to_mode(&self) -> Result<Option<WeightMode>, String> {
        let Some(m) = &self.margin else {
            return Ok(None);
        };
        parse_mode(&m.mode, m.gain, m.phase).map(Some)
    }
}

pub fn parse_mode(
    mode: &str,
    gain: Option<f64>,
    phase: Option<f64>,
) -> Result<WeightMode, String> {
    match mode {
        "delay" => Ok(WeightMode::Delay),
        "independent" | "simultaneous" => {
            let gain_k = gain.ok_or("gain margin required for this mode")?;
            let phase_phi = phase.ok_or("phase margin required for this mode")?;
            if mode == "independent" {
                Ok(WeightMode::Independent { gain_k, phase_phi })
            } else {
                Ok(WeightMode::Simultaneous { gain_k, phase_phi })
            }
        }
        other => Err(format!(
            "unknown mode {other:?} (expected delay, independent, or simultaneous)"
        )),
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RationalDoc {
    pub num: Vec<f64>,
    pub den: Vec<f64>,
}

impl RationalDoc {
    pub fn of(r: &RationalFunction<f64>) -> Self {
        RationalDoc {
            num: r.num().coeffs().to_vec(),
            den: r.den().coeffs().to_vec(),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct IterationDoc {
    pub tau: f64,
    pub feasible: bool,
    pub min_eigenvalue: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct StepDoc {
    pub alpha: f64,
    pub tau_bound: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct VerificationDoc {
    pub min_distance: f64,
    pub argmin_omega: f64,
    pub infinity_value: f64,
    pub interp_residual: f64,
    pub pass: bool,
}

impl VerificationDoc {
    pub fn of(v: &VerificationReport) -> Self {
        VerificationDoc {
            min_distance: v.min_distance,
            argmin_omega: v.argmin_omega,
            infinity_value: v.infinity_value,
            interp_residual: v.interp_residual,
            pass: v.pass,
        }
    }
}

/// Machine-readable output of every command. Identical inputs produce
/// identical documents.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ResultDocument {
    pub version: String,
    pub command: String,
    pub input: PlantFile,
    pub shift: RationalDoc,
    pub mode: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub bound: Option<f64>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub trace: Vec<IterationDoc>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub steps: Vec<StepDoc>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub eps_star: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub controller: Option<RationalDoc>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub closed_loop: Option<RationalDoc>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub verification: Option<VerificationDoc>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub warnings: Vec<String>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub sweep: Vec<SweepEntry>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SweepEntry {
    pub parameter: String,
    pub value: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub bound: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

impl ResultDocument {
    pub fn new(command: &str, input: PlantFile, shift: &RationalFunction<f64>, mode: &str) -> Self {
        ResultDocument {
            version: env!("CARGO_PKG_VERSION").to_string(),
            command: command.to_string(),
            input,
            shift: RationalDoc::of(shift),
            mode: mode.to_string(),
            bound: None,
            trace: vec![],
            steps: vec![],
            eps_star: None,
            controller: None,
            closed_loop: None,
            verification: None,
            warnings: vec![],
            sweep: vec![],
        }
    }

    pub fn absorb_report(&mut self, r: &MarginReport) {
        self.bound = Some(r.tau_bound);
        self.trace = r
            .iterations
            .iter()
            .map(|it| IterationDoc {
                tau: it.tau,
                feasible: it.feasible,
                min_eigenvalue: it.min_eigenvalue,
            })
            .collect();
        self.steps = r
            .steps
            .iter()
            .map(|s| StepDoc {
                alpha: s.alpha,
                tau_bound: s.tau_bound,
            })
            .collect();
        self.eps_star = r.weight_fit.as_ref().map(|f| f.eps_star);
        self.warnings = r.warnings.clone();
    }
}

pub fn mode_name(mode: WeightMode) -> &'static str {
    match mode {
        WeightMode::Delay => "delay",
        WeightMode::Independent { .. } => "independent",
        WeightMode::Simultaneous { .. } => "simultaneous",
    }
}
