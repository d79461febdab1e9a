//! Command implementations. Each returns the artifacts it produced; the
//! caller writes the manifest and maps errors to exit codes.

use std::fs;
use std::path::{Path, PathBuf};

use hermrep::classify::{classify_dual, classify_test, estimate_gevrey_index, ClassifyOptions, Quantifier};
use hermrep::coeff::{analyze, ladder, synthesize_grid, LadderKind, Signal, ThetaVector};
use hermrep::hermite::{gauss_hermite, hermite_eval};
use hermrep::io::{expansion_to_csv, load_rep, samples_from_csv, samples_to_csv, save_kernel, save_rep, sidecar_path};
use hermrep::kernel::{kernel_from_bilinear, kernel_growth_check, kernel_of_operator, KernelOperator};
use hermrep::opcalc::{build_expansion, hermite_envelope_check, verify_bound_26, verify_bound_52, MAX_BOUND_ORDER};
use hermrep::weights::{check_all, check_condition, AssociatedFunction, Condition, WeightSequence};
use hermrep::Complex64;
use serde_json::{json, Value};

use crate::config::*;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("usage: {0}")]
    Usage(String),
    #[error("{0}")]
    Failure(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Failure(_) => 1,
        }
    }
}

impl From<hermrep::Error> for CliError {
    fn from(e: hermrep::Error) -> Self {
        match e {
            hermrep::Error::Precondition(_) => CliError::Usage(e.to_string()),
            other => CliError::Failure(other.to_string()),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Failure(e.to_string())
    }
}

impl From<serde_json::Error> for CliError {
    fn from(e: serde_json::Error) -> Self {
        CliError::Failure(e.to_string())
    }
}

pub type CliResult<T> = std::result::Result<T, CliError>;

#[derive(Default)]
pub struct Outcome {
    pub outputs: Vec<PathBuf>,
    pub stdout: Option<String>,
    pub warnings: Vec<String>,
}

impl Outcome {
    fn emit_json(&mut self, value: &Value, out: Option<&PathBuf>) -> CliResult<()> {
        let text = serde_json::to_string_pretty(value)? + "\n";
        match out {
            Some(path) => {
                fs::write(path, text)?;
                self.outputs.push(path.clone());
            }
            None => self.stdout = Some(text),
        }
        Ok(())
    }

    fn emit_text(&mut self, text: String, out: Option<&PathBuf>) -> CliResult<()> {
        match out {
            Some(path) => {
                fs::write(path, text)?;
                self.outputs.push(path.clone());
            }
            None => self.stdout = Some(text),
        }
        Ok(())
    }

    fn wrote_with_sidecar(&mut self, path: &Path) {
        self.outputs.push(path.to_path_buf());
        self.outputs.push(sidecar_path(path));
    }
}

pub fn validate(job: &Job) -> CliResult<()> {
    if let (Some(i), Some(o)) = (job.input(), job.output()) {
        if i == o {
            return Err(CliError::Usage(format!("input and output are the same path {}", i.display())));
        }
    }
    let check_shape = |shape: &[usize]| {
        if shape.is_empty() || shape.contains(&0) {
            Err(CliError::Usage(format!("invalid shape {shape:?}")))
        } else {
            Ok(())
        }
    };
    match job {
        Job::Analyze(a) => {
            check_shape(&a.shape)?;
            if a.preset.is_none() == a.input.is_none() {
                return Err(CliError::Usage("analyze needs exactly one of preset or in".into()));
            }
            if let Some(p) = &a.preset {
                Preset::parse(p, a.shape.len())?;
            }
        }
        Job::Synth(a) if a.nodes.is_none() && a.at.is_empty() => {
            return Err(CliError::Usage("synth needs nodes or at".into()));
        }
        Job::Kernel(a) => check_shape(&a.shape)?,
        Job::Bounds(a) if a.lemma == 2 && !(1..=MAX_BOUND_ORDER).contains(&a.order) => {
            return Err(CliError::Usage(format!("N must be in 1..={MAX_BOUND_ORDER}")));
        }
        _ => {}
    }
    Ok(())
}

pub fn run(job: &Job) -> CliResult<Outcome> {
    validate(job)?;
    let mut out = Outcome::default();
    match job {
        Job::SeqCheck(a) => seq_check(a, &mut out)?,
        Job::Assoc(a) => assoc(a, &mut out)?,
        Job::Analyze(a) => run_analyze(a, &mut out)?,
        Job::Synth(a) => synth(a, &mut out)?,
        Job::Classify(a) => classify(a, &mut out)?,
        Job::Transform(a) => transform(a, &mut out)?,
        Job::Kernel(a) => kernel(a, &mut out)?,
        Job::Bounds(a) => bounds(a, &mut out)?,
    }
    Ok(out)
}

fn seq_check(a: &SeqCheckArgs, out: &mut Outcome) -> CliResult<()> {
    let seq = a.seq.build()?;
    let certs = check_all(&seq, a.pmax)?;
    out.emit_json(&json!({ "sequence": a.seq, "p_max": a.pmax, "certificates": certs }), a.out.as_ref())
}

fn assoc(a: &AssocArgs, out: &mut Outcome) -> CliResult<()> {
    let af = AssociatedFunction::new(a.seq.build()?);
    let mut text = String::from("rho,value,maximizer\n");
    for &rho in &a.rho {
        let v = af.eval(rho)?;
        text += &format!("{},{},{}\n", fmt(rho), fmt(v.value), v.maximizer);
    }
    out.emit_text(text, a.out.as_ref())
}

fn fmt(v: f64) -> String {
    hermrep::io::format_f64(v)
}

/// Built-in analysis inputs.
#[derive(Clone, Debug, PartialEq)]
pub enum Preset {
    /// `e^{-a|x|²}`.
    Gaussian(f64),
    /// `Π_k H_{n_k}(x_k)`.
    Hermite(Vec<usize>),
    /// `e^{-a|x|²} Π_k p(x_k)` with `p(x) = Σ c_j x^j`.
    GaussianPoly(f64, Vec<f64>),
}

impl Preset {
    pub fn parse(text: &str, dims: usize) -> CliResult<Self> {
        let bad = || {
            CliError::Usage(format!(
                "unknown preset {text:?}; use gaussian:A, hermite:N[,N...] or gaussian-poly:A:C0,C1,..."
            ))
        };
        let parts: Vec<&str> = text.split(':').collect();
        let positive = |s: &str| s.parse::<f64>().ok().filter(|a| *a > 0.0 && a.is_finite()).ok_or_else(bad);
        match parts.as_slice() {
            ["gaussian", a] => Ok(Preset::Gaussian(positive(a)?)),
            ["hermite", ns] => {
                let ns: Vec<usize> = ns.split(',').map(|n| n.parse().map_err(|_| bad())).collect::<CliResult<_>>()?;
                match ns.len() {
                    1 => Ok(Preset::Hermite(vec![ns[0]; dims])),
                    n if n == dims => Ok(Preset::Hermite(ns)),
                    _ => Err(CliError::Usage(format!("hermite preset needs 1 or {dims} indices"))),
                }
            }
            ["gaussian-poly", a, cs] => {
                let cs: Vec<f64> = cs.split(',').map(|c| c.parse().map_err(|_| bad())).collect::<CliResult<_>>()?;
                Ok(Preset::GaussianPoly(positive(a)?, cs))
            }
            _ => Err(bad()),
        }
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        match self {
            Preset::Gaussian(a) => (-a * x.iter().map(|v| v * v).sum::<f64>()).exp(),
            Preset::Hermite(ns) => ns.iter().zip(x).map(|(&n, &v)| hermite_eval(n, v)).product(),
            Preset::GaussianPoly(a, cs) => {
                let poly = |v: f64| cs.iter().rev().fold(0.0, |acc, c| acc * v + c);
                (-a * x.iter().map(|v| v * v).sum::<f64>()).exp() * x.iter().map(|&v| poly(v)).product::<f64>()
            }
        }
    }
}

fn run_analyze(a: &AnalyzeArgs, out: &mut Outcome) -> CliResult<()> {
    let n_max = *a.shape.iter().max().expect("validated shape");
    let rep = match (&a.preset, &a.input) {
        (Some(p), _) => {
            let preset = Preset::parse(p, a.shape.len())?;
            let rule = gauss_hermite(a.order.unwrap_or(2 * n_max + 8))?;
            let f = |x: &[f64]| Complex64::new(preset.eval(x), 0.0);
            analyze(Signal::Function(&f), &a.shape, &rule)?
        }
        (None, Some(path)) => {
            let grid = samples_from_csv(&fs::read_to_string(path)?)?;
            let order = a.order.unwrap_or(grid.axes[0].len());
            let rule = gauss_hermite(order)?;
            analyze(Signal::Samples(&grid), &a.shape, &rule)?
        }
        (None, None) => unreachable!("validated"),
    };
    save_rep(&rep, &a.out)?;
    out.wrote_with_sidecar(&a.out);
    Ok(())
}

fn synth(a: &SynthArgs, out: &mut Outcome) -> CliResult<()> {
    let rep = load_rep(&a.input)?;
    let axes: Vec<Vec<f64>> = match a.nodes {
        Some(q) => vec![gauss_hermite(q)?.nodes; rep.dims()],
        None if rep.dims() == 1 => vec![a.at.clone()],
        None => return Err(CliError::Usage("at points need a one-dimensional input; use nodes".into())),
    };
    let grid = synthesize_grid(&rep, axes)?;
    out.emit_text(samples_to_csv(&grid)?, Some(&a.out))
}

fn classify(a: &ClassifyArgs, out: &mut Outcome) -> CliResult<()> {
    let rep = load_rep(&a.input)?;
    let seq = a.seq.build()?;
    let grid: Vec<ThetaVector> =
        a.theta.iter().map(|&t| ThetaVector::uniform(t, rep.dims())).collect::<hermrep::Result<_>>()?;
    let q = match a.mode {
        QuantifierArg::Roumieu => Quantifier::Roumieu,
        QuantifierArg::Beurling => Quantifier::Beurling,
    };
    let opts = ClassifyOptions { noise_floor: a.noise_floor };
    let cert =
        if a.dual { classify_dual(&rep, &seq, &grid, q, opts)? } else { classify_test(&rep, &seq, &grid, q, opts)? };
    for r in cert.per_theta.iter().filter(|r| r.saturated) {
        out.warnings.push(format!("weighted norm saturated at theta {:?}", r.theta.components()));
    }
    let estimate = if a.estimate {
        match estimate_gevrey_index(&rep) {
            Ok(e) => json!(e),
            Err(e) => {
                out.warnings.push(format!("gevrey index not estimated: {e}"));
                Value::Null
            }
        }
    } else {
        Value::Null
    };
    let warnings = out.warnings.clone();
    out.emit_json(&json!({ "certificate": cert, "estimate": estimate, "warnings": warnings }), a.out.as_ref())
}

fn transform(a: &TransformArgs, out: &mut Outcome) -> CliResult<()> {
    let rep = load_rep(&a.input)?;
    let result = match a.op {
        TransformOp::Fourier => KernelOperator::Fourier.apply(&rep)?,
        TransformOp::Raise => ladder(&rep, LadderKind::Raise, a.axis)?,
        TransformOp::Lower => ladder(&rep, LadderKind::Lower, a.axis)?,
        TransformOp::MulX => KernelOperator::MulX { axis: a.axis }.apply(&rep)?,
        TransformOp::Diff => KernelOperator::Diff { axis: a.axis }.apply(&rep)?,
        TransformOp::Oscillator => KernelOperator::Oscillator { power: a.power, axis: a.axis }.apply(&rep)?,
    };
    if result.truncation_loss() > rep.truncation_loss() {
        out.warnings.push(format!("truncation loss grew to {:e}", result.truncation_loss()));
    }
    save_rep(&result, &a.out)?;
    out.wrote_with_sidecar(&a.out);
    Ok(())
}

fn kernel(a: &KernelArgs, out: &mut Outcome) -> CliResult<()> {
    let mut k = match a.op {
        KernelOpArg::Identity => {
            kernel_from_bilinear(|n, m| Complex64::new(if n == m { 1.0 } else { 0.0 }, 0.0), &a.shape, &a.shape)?
        }
        KernelOpArg::Fourier => kernel_of_operator(KernelOperator::Fourier, &a.shape)?,
        KernelOpArg::MulX => kernel_of_operator(KernelOperator::MulX { axis: a.axis }, &a.shape)?,
        KernelOpArg::Diff => kernel_of_operator(KernelOperator::Diff { axis: a.axis }, &a.shape)?,
        KernelOpArg::Oscillator => {
            kernel_of_operator(KernelOperator::Oscillator { power: a.power, axis: a.axis }, &a.shape)?
        }
    };
    if let (Some(theta), Some(nu)) = (a.theta, a.nu) {
        let af = AssociatedFunction::new(a.seq.clone().unwrap_or_default().build()?);
        let d = a.shape.len();
        kernel_growth_check(&mut k, &ThetaVector::uniform(theta, d)?, &ThetaVector::uniform(nu, d)?, &af)?;
    }
    save_kernel(&k, &a.out)?;
    out.wrote_with_sidecar(&a.out);
    Ok(())
}

fn bounds(a: &BoundsArgs, out: &mut Outcome) -> CliResult<()> {
    let spec = a.seq.clone().unwrap_or_default();
    let seq = spec.build()?;
    let value = if a.lemma == 2 { expansion_bounds(a, &spec, &seq, out)? } else { envelope_bounds(a, &spec, seq)? };
    out.emit_json(&value, a.out.as_ref())
}

fn expansion_bounds(a: &BoundsArgs, spec: &SeqSpec, seq: &WeightSequence, out: &mut Outcome) -> CliResult<Value> {
    let mut orders = Vec::new();
    let mut all_hold = true;
    for n in 1..=a.order {
        let r26 = verify_bound_26(n)?;
        let [sq, dbl] = verify_bound_52(n, seq)?;
        all_hold &= r26.holds() && sq.holds() && dbl.holds();
        orders.push(json!({ "N": n, "bound_26": r26, "bound_52_mn_squared": sq, "bound_52_m2n": dbl }));
    }
    if let Some(path) = &a.expansion_out {
        fs::write(path, expansion_to_csv(&build_expansion(a.order)?)?)?;
        out.outputs.push(path.clone());
    }
    Ok(json!({ "lemma": 2, "sequence": spec, "N": a.order, "all_hold": all_hold, "orders": orders }))
}

/// `H` from the (M.2) certificate and `L` from (M.3)″ on `[0, 200]`.
pub fn envelope_constants(seq: &WeightSequence) -> CliResult<(f64, f64)> {
    let get = |cond: Condition, key: &str| -> CliResult<f64> {
        let cert = check_condition(seq, cond, 200)?;
        cert.constants
            .get(key)
            .copied()
            .filter(|_| cert.holds())
            .ok_or_else(|| CliError::Usage(format!("sequence has no {cond:?} certificate; pass m explicitly")))
    };
    Ok((get(Condition::M2, "H")?, get(Condition::M3dprime, "L")?))
}

fn envelope_bounds(a: &BoundsArgs, spec: &SeqSpec, seq: WeightSequence) -> CliResult<Value> {
    let (h, l) = envelope_constants(&seq)?;
    let m = a.m.unwrap_or(1.0 / (16.0 * h * l));
    let af = AssociatedFunction::new(seq);
    let report = hermite_envelope_check(&af, m, h, a.alpha_max, a.beta_max, a.n_max)?;
    Ok(json!({ "lemma": 1, "sequence": spec, "H": h, "L": l, "m": m, "report": report }))
}
