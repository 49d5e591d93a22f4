//! Subcommand implementations.

use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};

use clap::Args;
use rayon::prelude::*;

use marginforge::approx::{approx_weight, default_grid, ApproxOptions};
use marginforge::benchmarks;
use marginforge::margin::{
    bound_bisection, bound_multi_margin, homotopy_bound, MarginQuery, WeightBackend,
};
use marginforge::rational::{classify_plant, Plant, Polynomial, RationalFunction};
use marginforge::regions::{image_point, SimultaneousRegion};
use marginforge::synthesis::{enforce_strict_properness, synthesize, verify_margins};
use marginforge::weights::{WeightFunction, WeightMode, WeightSpec};
use marginforge::{C64, Error as CoreError};

use crate::io::{
    mode_name, parse_mode, PlantFile, RationalDoc, ResultDocument, ShiftFile, SweepEntry,
    VerificationDoc,
};

#[derive(Debug)]
pub enum CmdError {
    Parse(String),
    Core(CoreError),
}

impl fmt::Display for CmdError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CmdError::Parse(m) => write!(f, "{m}"),
            CmdError::Core(e) => write!(f, "{e}"),
        }
    }
}

impl From<CoreError> for CmdError {
    fn from(e: CoreError) -> Self {
        CmdError::Core(e)
    }
}

fn parse_err(m: impl Into<String>) -> CmdError {
    CmdError::Parse(m.into())
}

type CmdResult<T = ()> = Result<T, CmdError>;

/// Flags shared by every margin-computing command.
#[derive(Args, Debug, Clone)]
pub struct CommonArgs {
    /// Plant file (JSON) or a builtin case id (ex1..ex5).
    pub plant: String,
    /// Shift: a constant (e.g. -10) or a path to a {num, den} JSON file.
    #[arg(long, allow_hyphen_values = true)]
    pub shift: Option<String>,
    /// Margin mode.
    #[arg(long, value_parser = ["delay", "independent", "simultaneous"])]
    pub mode: Option<String>,
    /// Gain margin (required for independent/simultaneous modes).
    #[arg(long)]
    pub gain: Option<f64>,
    /// Phase margin in radians (required for independent/simultaneous modes).
    #[arg(long)]
    pub phase: Option<f64>,
    /// Bisection tolerance on the delay horizon.
    #[arg(long, default_value_t = 1e-3)]
    pub tol: f64,
    /// Weight floor epsilon.
    #[arg(long, default_value_t = 1e-4)]
    pub eps: f64,
    /// Write the result document to this path instead of stdout.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct BoundArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    /// Fan out over a parameter range, e.g. `shift=-50:0:5`.
    #[arg(long)]
    pub sweep: Option<String>,
}

#[derive(Args, Debug)]
pub struct HomotopyArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    /// Number of homotopy steps.
    #[arg(long, default_value_t = 3)]
    pub steps: usize,
    /// Degree of the reduced interpolant reused as the next shift.
    #[arg(long = "deg-t", default_value_t = 4)]
    pub deg_t: usize,
    /// Numerator and denominator degree of the rational weight fit.
    #[arg(long = "deg-weight", num_args = 2, default_values_t = [6, 6])]
    pub deg_weight: Vec<usize>,
    /// Interior damping for the reconstruction horizon, in (0, 1].
    #[arg(long, default_value_t = 0.95)]
    pub gamma: f64,
}

#[derive(Args, Debug)]
pub struct SynthesizeArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    /// Fraction of the certified bound the controller is realized at.
    #[arg(long = "at-fraction", default_value_t = 0.98)]
    pub at_fraction: f64,
    /// Numerator and denominator degree of the rational weight fit.
    #[arg(long = "deg-weight", num_args = 2, default_values_t = [6, 6])]
    pub deg_weight: Vec<usize>,
    /// Force a strictly proper closed loop via an improper weight roll-off.
    #[arg(long)]
    pub strictly_proper: bool,
    /// Write the controller {num, den} to this path.
    #[arg(long = "controller-out")]
    pub controller_out: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct PlotdataArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    /// What to export.
    #[arg(long, value_parser = ["nyquist", "interpolant", "weight", "regions"])]
    pub what: String,
    /// Frequency range (rad/s).
    #[arg(long = "omega-range", num_args = 2, default_values_t = [1e-3, 1e3])]
    pub omega_range: Vec<f64>,
    /// Number of samples.
    #[arg(long, default_value_t = 500)]
    pub points: usize,
    /// Delay horizon for weight/region exports.
    #[arg(long, default_value_t = 1.0)]
    pub tau: f64,
    /// Frequency at which the region boundary is exported.
    #[arg(long, default_value_t = 1.0)]
    pub omega: f64,
}

/// Load a plant file from disk or resolve a builtin case id.
fn load_input(name: &str) -> CmdResult<(PlantFile, Plant<f64>)> {
    if let Some(case) = benchmarks::case(name) {
        let t = &case.plant.transfer;
        let (gain, phase) = match case.mode {
            WeightMode::Delay => (None, None),
            WeightMode::Independent { gain_k, phase_phi }
            | WeightMode::Simultaneous { gain_k, phase_phi } => (Some(gain_k), Some(phase_phi)),
        };
        let file = PlantFile {
            num: Some(t.num().coeffs().to_vec()),
            den: Some(t.den().coeffs().to_vec()),
            gain: None,
            zeros: None,
            poles: None,
            shift: None,
            margin: Some(crate::io::MarginFile {
                mode: mode_name(case.mode).to_string(),
                gain,
                phase,
            }),
        };
        return Ok((file, case.plant));
    }
    let path = Path::new(name);
    let text = fs::read_to_string(path)
        .map_err(|e| parse_err(format!("cannot read plant file {name}: {e}")))?;
    let file: PlantFile = serde_json::from_str(&text)
        .map_err(|e| parse_err(format!("plant file {name}: {e}")))?;
    let transfer = file.to_transfer().map_err(parse_err)?;
    let plant = classify_plant(transfer)?;
    Ok((file, plant))
}

fn parse_shift_arg(arg: &str) -> CmdResult<RationalFunction<f64>> {
    if let Ok(c) = arg.parse::<f64>() {
        return Ok(RationalFunction::constant(c));
    }
    let text = fs::read_to_string(arg)
        .map_err(|e| parse_err(format!("cannot read shift file {arg}: {e}")))?;
    let doc: ShiftFile =
        serde_json::from_str(&text).map_err(|e| parse_err(format!("shift file {arg}: {e}")))?;
    Ok(match doc {
        ShiftFile::Constant(c) => RationalFunction::constant(c),
        ShiftFile::Rational { num, den } => {
            RationalFunction::new(Polynomial::new(num), Polynomial::new(den))
        }
    })
}

/// Assemble the margin query from file contents and flag overrides.
fn build_query(common: &CommonArgs) -> CmdResult<(PlantFile, MarginQuery)> {
    let (file, plant) = load_input(&common.plant)?;
    let mut q = MarginQuery::new(plant);
    q.bisection_tol = common.tol;
    q.floor_eps = common.eps;
    if let Some(m) = file.to_mode().map_err(parse_err)? {
        q.mode = m;
    }
    if let Some(mode) = &common.mode {
        q.mode = parse_mode(mode, common.gain, common.phase).map_err(parse_err)?;
    }
    q.shift = file.to_shift();
    if let Some(sh) = &common.shift {
        q.shift = parse_shift_arg(sh)?;
    }
    Ok((file, q))
}

fn emit(doc: &ResultDocument, out: &Option<PathBuf>) -> CmdResult {
    let text = serde_json::to_string_pretty(doc).expect("result document serializes");
    match out {
        Some(p) => fs::write(p, text).map_err(|e| parse_err(format!("cannot write {p:?}: {e}"))),
        None => {
            println!("{text}");
            Ok(())
        }
    }
}

fn run_bound(q: &MarginQuery) -> Result<marginforge::margin::MarginReport, CoreError> {
    match q.mode {
        WeightMode::Delay => bound_bisection(q),
        _ => bound_multi_margin(q),
    }
}

pub fn cmd_bound(args: &BoundArgs) -> CmdResult {
    let (file, q) = build_query(&args.common)?;
    let mut doc = ResultDocument::new("bound", file, &q.shift, mode_name(q.mode));

    if let Some(sweep) = &args.sweep {
        let (param, values) = parse_sweep(sweep)?;
        if param != "shift" {
            return Err(parse_err(format!(
                "unsupported sweep parameter {param:?} (only `shift`)"
            )));
        }
        let entries: Vec<SweepEntry> = values
            .par_iter()
            .map(|&v| {
                let mut qv = q.clone();
                qv.shift = RationalFunction::constant(v);
                match run_bound(&qv) {
                    Ok(r) => SweepEntry {
                        parameter: param.clone(),
                        value: v,
                        bound: Some(r.tau_bound),
                        error: None,
                    },
                    Err(e) => SweepEntry {
                        parameter: param.clone(),
                        value: v,
                        bound: None,
                        error: Some(e.to_string()),
                    },
                }
            })
            .collect();
        doc.sweep = entries;
        eprintln!("swept {} values of {param}", doc.sweep.len());
        return emit(&doc, &args.common.out);
    }

    let report = run_bound(&q)?;
    doc.absorb_report(&report);
    eprintln!("certified delay-margin bound: {}", report.tau_bound);
    emit(&doc, &args.common.out)
}

pub fn cmd_homotopy(args: &HomotopyArgs) -> CmdResult {
    let (file, q) = build_query(&args.common)?;
    let [n_b, n_a] = args.deg_weight[..] else {
        return Err(parse_err("--deg-weight takes exactly two degrees"));
    };
    let report = homotopy_bound(&q, args.steps, args.deg_t, n_b, n_a, args.gamma)?;
    let mut doc = ResultDocument::new("homotopy", file, &q.shift, mode_name(q.mode));
    doc.absorb_report(&report);
    eprintln!("homotopy bound after {} steps: {}", args.steps, report.tau_bound);
    emit(&doc, &args.common.out)
}

pub fn cmd_synthesize(args: &SynthesizeArgs) -> CmdResult {
    let (file, mut q) = build_query(&args.common)?;
    let [n_b, n_a] = args.deg_weight[..] else {
        return Err(parse_err("--deg-weight takes exactly two degrees"));
    };
    q.backend = WeightBackend::RationalApprox {
        n_b,
        n_a,
        options: ApproxOptions::default(),
    };
    if args.strictly_proper {
        q = enforce_strict_properness(&q)?;
    }
    let report = run_bound(&q)?;
    let real = synthesize(&q, &report, args.at_fraction)?;

    let spec = WeightSpec::new(0.99 * real.certified.2, q.shift.clone(), q.floor_eps, q.mode)?;
    let verification = verify_margins(&real.closed_loop, &q.plant, &spec, 0.0)?;

    let mut doc = ResultDocument::new("synthesize", file, &q.shift, mode_name(q.mode));
    doc.absorb_report(&report);
    doc.eps_star = Some(real.weight_fit.eps_star);
    doc.controller = Some(RationalDoc::of(&real.controller));
    doc.closed_loop = Some(RationalDoc::of(&real.closed_loop));
    doc.verification = Some(VerificationDoc::of(&verification));
    if let Some(p) = &args.controller_out {
        let text = serde_json::to_string_pretty(&RationalDoc::of(&real.controller))
            .expect("controller serializes");
        fs::write(p, text).map_err(|e| parse_err(format!("cannot write {p:?}: {e}")))?;
    }
    eprintln!(
        "controller realized at tau = {} (min verification distance {})",
        real.certified.2, verification.min_distance
    );
    emit(&doc, &args.common.out)
}

pub fn cmd_plotdata(args: &PlotdataArgs) -> CmdResult {
    let [lo, hi] = args.omega_range[..] else {
        return Err(parse_err("--omega-range takes exactly two frequencies"));
    };
    if !(lo > 0.0 && hi > lo) || args.points < 2 {
        return Err(parse_err(format!(
            "invalid range: need 0 < {lo} < {hi} and at least 2 points"
        )));
    }
    let grid: Vec<f64> = (0..args.points)
        .map(|i| {
            let t = i as f64 / (args.points - 1) as f64;
            lo * (hi / lo).powf(t)
        })
        .collect();
    let (file, q) = build_query(&args.common)?;

    match args.what.as_str() {
        "nyquist" => {
            println!("omega,re,im");
            for &w in &grid {
                let v = q.plant.transfer.eval(C64::new(0.0, w))?;
                println!("{w},{},{}", v.re, v.im);
            }
        }
        "interpolant" => {
            let report = run_bound(&q)?;
            let t = report
                .interpolant
                .ok_or_else(|| parse_err("no interpolant recoverable at the bound"))?;
            println!("omega,re,im");
            for &w in &grid {
                let v = t.eval(C64::new(0.0, w))?;
                println!("{w},{},{}", v.re, v.im);
            }
        }
        "weight" => {
            let spec = WeightSpec::new(args.tau, q.shift.clone(), q.floor_eps, q.mode)?;
            let wf = WeightFunction::new(spec);
            let fit_grid = default_grid(&wf);
            let fit = approx_weight(&wf, 6, 6, &fit_grid, ApproxOptions::default())?;
            println!("omega,phi,approx_magnitude");
            for &w in &grid {
                let phi = wf.eval(w)?;
                let m = fit.rational().eval(C64::new(0.0, w))?.norm();
                println!("{w},{phi},{m}");
            }
        }
        "regions" => {
            let (gain_k, phase_phi) = match q.mode {
                WeightMode::Simultaneous { gain_k, phase_phi }
                | WeightMode::Independent { gain_k, phase_phi } => (gain_k, phase_phi),
                WeightMode::Delay => (1.0 + 1e-9, 0.0),
            };
            let region = SimultaneousRegion::new(gain_k, phase_phi, args.tau, args.omega)?;
            let (psi_lo, psi_hi) = region.psi_range();
            println!("label,re,im");
            for i in 0..args.points {
                let t = i as f64 / (args.points - 1) as f64;
                let psi = psi_lo + (psi_hi - psi_lo) * t;
                for (label, rho) in [("outer", 1.0), ("inner", 1.0 / gain_k)] {
                    let p = image_point(rho, psi);
                    println!("{label},{},{}", p.re, p.im);
                }
            }
            for (label, psi) in [("cut_low", psi_lo), ("cut_high", psi_hi)] {
                for i in 0..args.points {
                    let t = i as f64 / (args.points - 1) as f64;
                    let rho = 1.0 / gain_k + (1.0 - 1.0 / gain_k) * t;
                    let p = image_point(rho, psi);
                    println!("{label},{},{}", p.re, p.im);
                }
            }
        }
        other => return Err(parse_err(format!("unknown export {other:?}"))),
    }
    let _ = file;
    Ok(())
}

/// Parse `name=start:end:step` into a parameter name and value list.
fn parse_sweep(s: &str) -> CmdResult<(String, Vec<f64>)> {
    let (name, range) = s
        .split_once('=')
        .ok_or_else(|| parse_err(format!("sweep {s:?} must look like name=start:end:step")))?;
    let parts: Vec<&str> = range.split(':').collect();
    let [start, end, step] = parts[..] else {
        return Err(parse_err(format!("sweep range {range:?} must be start:end:step")));
    };
    let (start, end, step) = (
        start.parse::<f64>().map_err(|e| parse_err(format!("sweep start: {e}")))?,
        end.parse::<f64>().map_err(|e| parse_err(format!("sweep end: {e}")))?,
        step.parse::<f64>().map_err(|e| parse_err(format!("sweep step: {e}")))?,
    );
    if step <= 0.0 || end < start {
        return Err(parse_err("sweep needs start <= end and step > 0"));
    }
    let mut values = vec![];
    let mut v = start;
    while v <= end + 1e-12 * step {
        values.push(v);
        v += step;
    }
    Ok((name.to_string(), values))
}
