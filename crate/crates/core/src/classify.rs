//! Decay and growth certificates for Hermite coefficient arrays, and a
//! Gevrey index estimate from the shape of the decay.
//!
//! For a scale `θ` the weighted profile is `ℓ_n = log|a_n| + Σ_k M(θ_k √n_k)`
//! for test functions and `ℓ_n = log|b_n| - Σ_k M(θ_k √n_k)` for functionals.
//! A bound `|a_n| ≤ C e^{∓ΣM}` fits the truncation at `θ` when, along every
//! axis lane, the profile over the upper half `n_k ≥ N_k/2` does not exceed
//! its maximum over the lower half. The fitted constant is `C = max_n e^{ℓ_n}`.
//! All verdicts are relative to the truncation and the supplied grid.

use std::collections::BTreeMap;

use ndarray::{ArrayD, Dimension};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::coeff::{axis_weights, norm_from_log_terms, HermiteRep, ThetaVector};
use crate::weights::{AssociatedFunction, WeightSequence};
use crate::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Quantifier {
    Roumieu,
    Beurling,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    RoumieuSomeTheta,
    BeurlingAllTheta,
    DualRoumieuEveryTheta,
    DualBeurlingSomeTheta,
}

impl Mode {
    pub fn is_dual(self) -> bool {
        matches!(self, Mode::DualRoumieuEveryTheta | Mode::DualBeurlingSomeTheta)
    }

    fn existential(self) -> bool {
        matches!(self, Mode::RoumieuSomeTheta | Mode::DualBeurlingSomeTheta)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum DecayVerdict {
    Consistent,
    Violated { witness: Vec<usize> },
    Inconclusive,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ThetaStatus {
    Consistent,
    Violated,
    /// Some lane has data only in its upper half, so no trend is visible.
    Inconclusive,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ThetaResult {
    pub theta: ThetaVector,
    pub status: ThetaStatus,
    /// `log C`; `-inf` for an all-zero representation.
    pub log_constant: f64,
    /// Largest `upper max - lower max` over all lanes; positive means growth.
    pub residual: f64,
    /// Index of the worst upper-half profile value in a violating lane, or
    /// of the largest norm term when the norm saturates.
    pub witness: Option<Vec<usize>>,
    /// The weighted norm left double range (test functions only).
    pub saturated: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DecayCertificate {
    pub mode: Mode,
    pub theta_witness: Option<ThetaVector>,
    pub constant_c: Option<f64>,
    pub log_constant: Option<f64>,
    pub residual: f64,
    pub verdict: DecayVerdict,
    /// Truncation box the verdict refers to.
    pub shape: Vec<usize>,
    /// Verdicts hold only on this grid and box.
    pub grid_relative: bool,
    pub per_theta: Vec<ThetaResult>,
}

impl DecayCertificate {
    /// Consistent scales are closed downward (test functions) or upward
    /// (functionals) in the componentwise order of the grid.
    pub fn is_monotone(&self) -> bool {
        let dual = self.mode.is_dual();
        self.per_theta.iter().all(|a| {
            a.status != ThetaStatus::Consistent
                || self.per_theta.iter().all(|b| {
                    let implied = if dual { a.theta.le(&b.theta) } else { b.theta.le(&a.theta) };
                    !implied || b.status == ThetaStatus::Consistent
                })
        })
    }
}

/// Coefficients below `noise_floor · max|a|` count as zero.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ClassifyOptions {
    pub noise_floor: f64,
}

impl Default for ClassifyOptions {
    fn default() -> Self {
        Self { noise_floor: NOISE_FLOOR }
    }
}

pub const NOISE_FLOOR: f64 = 1e-14;
pub const MIN_COEFFS_PER_AXIS: usize = 16;

/// Falloff certificate `|a_n| ≤ C exp[-Σ M(θ_k √n_k)]`.
pub fn classify_test(
    rep: &HermiteRep,
    seq: &WeightSequence,
    grid: &[ThetaVector],
    quantifier: Quantifier,
    opts: ClassifyOptions,
) -> Result<DecayCertificate> {
    let mode = match quantifier {
        Quantifier::Roumieu => Mode::RoumieuSomeTheta,
        Quantifier::Beurling => Mode::BeurlingAllTheta,
    };
    classify(rep, seq, grid, mode, opts)
}

/// Growth certificate `|b_n| ≤ C exp[Σ M(θ_k √n_k)]`.
pub fn classify_dual(
    rep: &HermiteRep,
    seq: &WeightSequence,
    grid: &[ThetaVector],
    quantifier: Quantifier,
    opts: ClassifyOptions,
) -> Result<DecayCertificate> {
    let mode = match quantifier {
        Quantifier::Roumieu => Mode::DualRoumieuEveryTheta,
        Quantifier::Beurling => Mode::DualBeurlingSomeTheta,
    };
    classify(rep, seq, grid, mode, opts)
}

fn classify(
    rep: &HermiteRep,
    seq: &WeightSequence,
    grid: &[ThetaVector],
    mode: Mode,
    opts: ClassifyOptions,
) -> Result<DecayCertificate> {
    if grid.is_empty() {
        return Err(Error::Precondition("theta grid is empty".into()));
    }
    if let Some(n) = rep.shape().iter().find(|&&n| n < MIN_COEFFS_PER_AXIS) {
        return Err(Error::Precondition(format!("axis with {n} coefficients; need at least {MIN_COEFFS_PER_AXIS}")));
    }
    if let Some(t) = grid.iter().find(|t| t.dims() != rep.dims()) {
        return Err(Error::Shape(format!("theta {:?} does not match d = {}", t.components(), rep.dims())));
    }
    let af = AssociatedFunction::new(seq.clone());
    let max_abs = rep.coeffs().iter().map(|c| c.norm()).fold(0.0, f64::max);
    let cut = opts.noise_floor * max_abs;
    let log_abs: ArrayD<f64> =
        rep.coeffs().mapv(|c| if c.norm() > cut && c.norm() > 0.0 { c.norm().ln() } else { f64::NEG_INFINITY });

    let per_theta: Vec<ThetaResult> =
        grid.par_iter().map(|theta| theta_result(&log_abs, theta, &af, mode.is_dual())).collect::<Result<_>>()?;
    Ok(aggregate(mode, rep.shape().to_vec(), per_theta, max_abs == 0.0, grid))
}

fn theta_result(
    log_abs: &ArrayD<f64>,
    theta: &ThetaVector,
    af: &AssociatedFunction,
    dual: bool,
) -> Result<ThetaResult> {
    let w = axis_weights(theta, log_abs.shape(), af)?;
    let sign = if dual { -1.0 } else { 1.0 };
    let mut profile = log_abs.clone();
    for (idx, l) in profile.indexed_iter_mut() {
        if l.is_finite() {
            *l += sign * idx.slice().iter().enumerate().map(|(k, &n)| w[k][n]).sum::<f64>();
        }
    }
    let log_constant = profile.iter().copied().fold(f64::NEG_INFINITY, f64::max);

    let mut residual = f64::NEG_INFINITY;
    let mut witness: Option<(f64, Vec<usize>)> = None;
    let mut inconclusive = false;
    for axis in 0..profile.ndim() {
        let half = profile.shape()[axis].div_ceil(2);
        // other coordinates -> (lower max, upper max, upper argmax)
        let mut lanes: BTreeMap<Vec<usize>, (f64, f64, Vec<usize>)> = BTreeMap::new();
        for (idx, &l) in profile.indexed_iter() {
            if !l.is_finite() {
                continue;
            }
            let idx = idx.slice().to_vec();
            let mut key = idx.clone();
            key.remove(axis);
            let e = lanes.entry(key).or_insert((f64::NEG_INFINITY, f64::NEG_INFINITY, Vec::new()));
            if idx[axis] < half {
                e.0 = e.0.max(l);
            } else if l > e.1 {
                e.1 = l;
                e.2 = idx;
            }
        }
        for (lower, upper, arg) in lanes.into_values() {
            if upper == f64::NEG_INFINITY {
                continue;
            }
            if lower == f64::NEG_INFINITY {
                inconclusive = true;
                continue;
            }
            let r = upper - lower;
            residual = residual.max(r);
            if r > slack(lower) && witness.as_ref().is_none_or(|(wr, _)| r > *wr) {
                witness = Some((r, arg));
            }
        }
    }
    if residual == f64::NEG_INFINITY {
        residual = 0.0;
    }

    let mut saturated = false;
    if !dual {
        let mut terms: Vec<f64> = profile.iter().filter(|l| l.is_finite()).map(|l| 2.0 * l).collect();
        saturated = norm_from_log_terms(&mut terms).saturated;
        if saturated && witness.is_none() {
            let arg = profile.indexed_iter().max_by(|a, b| a.1.total_cmp(b.1)).map(|(i, _)| i.slice().to_vec());
            witness = arg.map(|a| (f64::INFINITY, a));
        }
    }
    let status = if witness.is_some() {
        ThetaStatus::Violated
    } else if inconclusive {
        ThetaStatus::Inconclusive
    } else {
        ThetaStatus::Consistent
    };
    Ok(ThetaResult {
        theta: theta.clone(),
        status,
        log_constant,
        residual,
        witness: witness.map(|(_, i)| i),
        saturated,
    })
}

fn slack(reference: f64) -> f64 {
    64.0 * f64::EPSILON * reference.abs().max(1.0)
}

fn magnitude(t: &ThetaVector) -> f64 {
    t.components().iter().sum()
}

fn aggregate(
    mode: Mode,
    shape: Vec<usize>,
    per_theta: Vec<ThetaResult>,
    all_zero: bool,
    grid: &[ThetaVector],
) -> DecayCertificate {
    let mut cert = DecayCertificate {
        mode,
        theta_witness: None,
        constant_c: None,
        log_constant: None,
        residual: 0.0,
        verdict: DecayVerdict::Inconclusive,
        shape,
        grid_relative: true,
        per_theta,
    };
    if all_zero {
        let top = grid.iter().max_by(|a, b| magnitude(a).total_cmp(&magnitude(b))).cloned();
        cert.theta_witness = top;
        cert.constant_c = Some(0.0);
        cert.log_constant = Some(f64::NEG_INFINITY);
        cert.verdict = DecayVerdict::Consistent;
        return cert;
    }

    let by_mag = |a: &&&ThetaResult, b: &&&ThetaResult| magnitude(&a.theta).total_cmp(&magnitude(&b.theta));
    let consistent: Vec<&ThetaResult> = cert.per_theta.iter().filter(|r| r.status == ThetaStatus::Consistent).collect();
    let violated: Vec<&ThetaResult> = cert.per_theta.iter().filter(|r| r.status == ThetaStatus::Violated).collect();
    // best scale: largest consistent for falloff, smallest for growth
    let best =
        if mode.is_dual() { consistent.iter().min_by(by_mag) } else { consistent.iter().max_by(by_mag) }.copied();
    // decisive violation: the one that best breaks the claim
    let worst = if mode.is_dual() { violated.iter().max_by(by_mag) } else { violated.iter().min_by(by_mag) }.copied();

    let decisive = if mode.existential() {
        match (best, worst) {
            (Some(b), _) => Some((b, DecayVerdict::Consistent)),
            (None, Some(w)) if violated.len() == cert.per_theta.len() => {
                Some((w, DecayVerdict::Violated { witness: w.witness.clone().unwrap_or_default() }))
            }
            _ => None,
        }
    } else {
        match (worst, best) {
            (Some(w), _) => Some((w, DecayVerdict::Violated { witness: w.witness.clone().unwrap_or_default() })),
            (None, Some(b)) if consistent.len() == cert.per_theta.len() => Some((b, DecayVerdict::Consistent)),
            _ => None,
        }
    };
    cert.theta_witness = best.map(|b| b.theta.clone());
    match decisive {
        Some((r, verdict)) => {
            cert.verdict = verdict;
            cert.residual = r.residual;
            cert.log_constant = Some(r.log_constant);
            cert.constant_c = Some(r.log_constant.exp());
        }
        None => {
            let r = best.or(cert.per_theta.first()).expect("nonempty grid");
            cert.residual = r.residual;
            cert.log_constant = Some(r.log_constant);
            cert.constant_c = Some(r.log_constant.exp());
        }
    }
    cert
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GevreyEstimate {
    pub s_hat: f64,
    /// Decay exponent `σ` in `log|a_n| ≈ A - B n^σ`; `s_hat = 1/(2σ)`.
    pub sigma: f64,
    pub fit_quality: f64,
    pub usable: usize,
}

pub const MIN_NONZERO_FOR_ESTIMATE: usize = 32;
const MIN_USABLE_FOR_ESTIMATE: usize = 8;
const SIGMA_RANGE: (f64, f64) = (0.05, 4.0);
const SIGMA_GRID: usize = 200;

/// Estimates `s` from `|a_n| ≈ e^{A - B n^{1/(2s)}}` by choosing the exponent
/// whose linear fit in `n^σ` has the smallest residual. Coefficients below
/// `1e-14 · max|a|` are left out.
pub fn estimate_gevrey_index(rep: &HermiteRep) -> Result<GevreyEstimate> {
    let a = rep.to_vec_1d()?;
    let nonzero = a.iter().filter(|c| c.norm() > 0.0).count();
    if nonzero < MIN_NONZERO_FOR_ESTIMATE {
        return Err(Error::InsufficientData { usable: nonzero, needed: MIN_NONZERO_FOR_ESTIMATE });
    }
    let max = a.iter().map(|c| c.norm()).fold(0.0, f64::max);
    let (ns, ys): (Vec<f64>, Vec<f64>) = a
        .iter()
        .enumerate()
        .filter(|(_, c)| c.norm() > NOISE_FLOOR * max)
        .map(|(n, c)| (n as f64, c.norm().ln()))
        .unzip();
    if ns.len() < MIN_USABLE_FOR_ESTIMATE {
        return Err(Error::InsufficientData { usable: ns.len(), needed: MIN_USABLE_FOR_ESTIMATE });
    }
    let sse = |sigma: f64| {
        let xs: Vec<f64> = ns.iter().map(|n| n.powf(sigma)).collect();
        linear_fit_sse(&xs, &ys)
    };
    let (lo, hi) = (SIGMA_RANGE.0.ln(), SIGMA_RANGE.1.ln());
    let grid: Vec<f64> = (0..SIGMA_GRID).map(|i| (lo + (hi - lo) * i as f64 / (SIGMA_GRID - 1) as f64).exp()).collect();
    let best = (0..SIGMA_GRID).min_by(|&i, &j| sse(grid[i]).total_cmp(&sse(grid[j]))).expect("nonempty grid");
    let (mut a_lo, mut a_hi) = (grid[best.saturating_sub(1)], grid[(best + 1).min(SIGMA_GRID - 1)]);
    let r = (5f64.sqrt() - 1.0) / 2.0;
    for _ in 0..100 {
        let m1 = a_hi - r * (a_hi - a_lo);
        let m2 = a_lo + r * (a_hi - a_lo);
        if sse(m1) < sse(m2) {
            a_hi = m2;
        } else {
            a_lo = m1;
        }
    }
    let sigma = 0.5 * (a_lo + a_hi);
    let mean = ys.iter().sum::<f64>() / ys.len() as f64;
    let sst: f64 = ys.iter().map(|y| (y - mean).powi(2)).sum();
    let fit_quality = if sst > 0.0 { 1.0 - sse(sigma) / sst } else { 1.0 };
    Ok(GevreyEstimate { s_hat: 1.0 / (2.0 * sigma), sigma, fit_quality, usable: ns.len() })
}

fn linear_fit_sse(xs: &[f64], ys: &[f64]) -> f64 {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (x, y) in xs.iter().zip(ys) {
        sxy += (x - mx) * (y - my);
        sxx += (x - mx) * (x - mx);
        syy += (y - my) * (y - my);
    }
    if sxx == 0.0 {
        return syy;
    }
    (syy - sxy * sxy / sxx).max(0.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coeff::analyze_1d;
    use crate::hermite::{gauss_hermite, hermite_eval};
    use std::f64::consts::E;

    fn grid(values: &[f64]) -> Vec<ThetaVector> {
        values.iter().map(|&t| ThetaVector::uniform(t, 1).unwrap()).collect()
    }

    fn geometric_grid() -> Vec<ThetaVector> {
        grid(&(-8..=24).map(|k| 2f64.powf(k as f64 / 4.0)).collect::<Vec<_>>())
    }

    fn rep_from(f: impl Fn(f64) -> f64, n: usize) -> HermiteRep {
        HermiteRep::from_real(&(0..n).map(|k| f(k as f64)).collect::<Vec<_>>()).unwrap()
    }

    fn gevrey(s: f64) -> WeightSequence {
        WeightSequence::gevrey_log(s, 0.0).unwrap()
    }

    #[test]
    fn finite_hermite_expansion_is_consistent_everywhere() {
        let rule = gauss_hermite(40).unwrap();
        let rep = analyze_1d(|x| hermite_eval(7, x), 16, &rule).unwrap();
        for q in [Quantifier::Roumieu, Quantifier::Beurling] {
            let cert =
                classify_test(&rep, &gevrey(0.5), &grid(&[1.0, 2.0, 4.0]), q, ClassifyOptions::default()).unwrap();
            assert_eq!(cert.verdict, DecayVerdict::Consistent);
            assert!(cert.per_theta.iter().all(|r| r.status == ThetaStatus::Consistent));
            assert_eq!(cert.theta_witness.as_ref().unwrap().components(), &[4.0]);
            assert!(cert.is_monotone());
        }
    }

    #[test]
    fn root_exponential_decay_witness_below_3e() {
        let rep = rep_from(|n| (-3.0 * n.sqrt()).exp(), 64);
        let g = geometric_grid();
        let cert = classify_test(&rep, &gevrey(1.0), &g, Quantifier::Roumieu, ClassifyOptions::default()).unwrap();
        assert_eq!(cert.verdict, DecayVerdict::Consistent);
        let w = cert.theta_witness.as_ref().unwrap().components()[0];
        let next = w * 2f64.powf(0.25);
        assert!(w < 3.0 * E && next > 3.0 * E, "witness {w}");
        assert!(cert.is_monotone());
        let beurling = classify_test(&rep, &gevrey(1.0), &g, Quantifier::Beurling, ClassifyOptions::default()).unwrap();
        assert!(matches!(beurling.verdict, DecayVerdict::Violated { .. }));
        assert!(beurling.residual > 0.0);
    }

    #[test]
    fn polynomial_decay_is_violated() {
        let rep = rep_from(|n| (n + 1.0).powi(-2), 64);
        let cert =
            classify_test(&rep, &gevrey(0.5), &grid(&[1.0, 2.0, 4.0]), Quantifier::Roumieu, ClassifyOptions::default())
                .unwrap();
        assert!(matches!(cert.verdict, DecayVerdict::Violated { ref witness } if witness[0] >= 32));
        assert!(cert.per_theta.iter().all(|r| r.status == ThetaStatus::Violated));
        assert!(cert.theta_witness.is_none());
    }

    #[test]
    fn delta_functional_has_bounded_growth() {
        let rep = rep_from(|n| hermite_eval(n as usize, 0.0), 129);
        let cert =
            classify_dual(&rep, &gevrey(0.5), &geometric_grid(), Quantifier::Roumieu, ClassifyOptions::default())
                .unwrap();
        assert_eq!(cert.verdict, DecayVerdict::Consistent);
        assert!(cert.constant_c.unwrap() <= 0.76);
        assert!(cert.is_monotone());
    }

    #[test]
    fn root_exponential_growth_threshold_e() {
        let rep = rep_from(|n| n.sqrt().exp(), 128);
        let g = geometric_grid();
        let cert = classify_dual(&rep, &gevrey(1.0), &g, Quantifier::Roumieu, ClassifyOptions::default()).unwrap();
        assert!(matches!(cert.verdict, DecayVerdict::Violated { .. }));
        for r in &cert.per_theta {
            let t = r.theta.components()[0];
            if t > E * 1.05 {
                assert_eq!(r.status, ThetaStatus::Consistent, "theta {t}");
            }
            if t < E * 0.95 {
                assert_eq!(r.status, ThetaStatus::Violated, "theta {t}");
            }
        }
        let some = classify_dual(&rep, &gevrey(1.0), &g, Quantifier::Beurling, ClassifyOptions::default()).unwrap();
        assert_eq!(some.verdict, DecayVerdict::Consistent);
        let w = some.theta_witness.unwrap().components()[0];
        assert!(w > E * 0.95 && w < E * 1.2, "witness {w}");
    }

    #[test]
    fn exponential_growth_against_quadratic_weight() {
        let rep = rep_from(|n| n.exp(), 64);
        let cert = classify_dual(
            &rep,
            &gevrey(0.5),
            &grid(&[0.5, 1.0, 4.0, 8.0]),
            Quantifier::Roumieu,
            ClassifyOptions::default(),
        )
        .unwrap();
        assert!(matches!(cert.verdict, DecayVerdict::Violated { .. }));
        let st: Vec<ThetaStatus> = cert.per_theta.iter().map(|r| r.status).collect();
        assert_eq!(
            st,
            vec![ThetaStatus::Violated, ThetaStatus::Violated, ThetaStatus::Consistent, ThetaStatus::Consistent]
        );
        assert!(cert.is_monotone());
    }

    #[test]
    fn zero_rep_and_preconditions() {
        let z = HermiteRep::zeros(&[16]).unwrap();
        let g = grid(&[1.0, 3.0, 2.0]);
        let cert = classify_test(&z, &gevrey(0.5), &g, Quantifier::Beurling, ClassifyOptions::default()).unwrap();
        assert_eq!(cert.verdict, DecayVerdict::Consistent);
        assert_eq!(cert.theta_witness.as_ref().unwrap().components(), &[3.0]);
        assert!(classify_test(
            &HermiteRep::zeros(&[15]).unwrap(),
            &gevrey(0.5),
            &g,
            Quantifier::Roumieu,
            ClassifyOptions::default()
        )
        .is_err());
        assert!(classify_test(&z, &gevrey(0.5), &[], Quantifier::Roumieu, ClassifyOptions::default()).is_err());
    }

    #[test]
    fn data_only_at_the_top_is_inconclusive() {
        let rep = HermiteRep::unit(&[16], &[15]).unwrap();
        let cert =
            classify_test(&rep, &gevrey(0.5), &grid(&[1.0]), Quantifier::Roumieu, ClassifyOptions::default()).unwrap();
        assert_eq!(cert.verdict, DecayVerdict::Inconclusive);
    }

    #[test]
    fn two_dimensional_separable_decay() {
        let f = |n: usize| (-(n as f64)).exp();
        let v: Vec<_> = (0..16 * 16).map(|i| crate::Complex64::new(f(i / 16) * f(i % 16), 0.0)).collect();
        let rep = HermiteRep::new(
            ArrayD::from_shape_vec(ndarray::IxDyn(&[16, 16]), v).unwrap(),
            crate::coeff::Provenance::Synthetic,
        )
        .unwrap();
        let g: Vec<ThetaVector> = [0.5, 1.0, 2.0, 4.0].iter().map(|&t| ThetaVector::uniform(t, 2).unwrap()).collect();
        // M(θ√n) ≈ θ² n / (2e) for s = 1/2: falloff holds while θ² < 2e
        let cert = classify_test(&rep, &gevrey(0.5), &g, Quantifier::Roumieu, ClassifyOptions::default()).unwrap();
        assert_eq!(cert.theta_witness.as_ref().unwrap().components(), &[2.0, 2.0]);
        assert!(cert.is_monotone());
    }

    #[test]
    fn truncation_doubling_keeps_verdicts() {
        for (f, s) in [
            (Box::new(|n: f64| (-n).exp()) as Box<dyn Fn(f64) -> f64>, 0.5),
            (Box::new(|n: f64| (-n.sqrt()).exp()), 1.0),
        ] {
            let g = grid(&[0.25, 0.5, 1.0, 2.0, 8.0]);
            let a = classify_test(&rep_from(&f, 32), &gevrey(s), &g, Quantifier::Roumieu, ClassifyOptions::default())
                .unwrap();
            let b = classify_test(&rep_from(&f, 64), &gevrey(s), &g, Quantifier::Roumieu, ClassifyOptions::default())
                .unwrap();
            assert_eq!(a.verdict, b.verdict);
            assert_eq!(a.theta_witness, b.theta_witness);
        }
    }

    #[test]
    fn gevrey_index_recovery() {
        for (s, n, tol) in [(0.5, 64, 0.05), (1.0, 128, 0.1), (2.0, 256, 0.2), (1.0, 256, 0.1)] {
            let rep = rep_from(|k| (-k.powf(1.0 / (2.0 * s))).exp(), n);
            let est = estimate_gevrey_index(&rep).unwrap();
            assert!((est.s_hat - s).abs() <= tol, "s={s} got {}", est.s_hat);
            assert!(est.fit_quality > 0.999);
            for c in [0.5, 2.0, 1e-3] {
                let scaled = rep.scaled(crate::Complex64::new(c, 0.0));
                let e2 = estimate_gevrey_index(&scaled).unwrap();
                assert!((e2.s_hat - est.s_hat).abs() <= 0.02);
            }
        }
    }

    #[test]
    fn gevrey_index_needs_data() {
        let rep = rep_from(|k| (-k).exp(), 20);
        assert!(matches!(estimate_gevrey_index(&rep), Err(Error::InsufficientData { usable: 20, needed: 32 })));
        let rep = rep_from(|k| if k < 4.0 { 1.0 } else { 1e-20 }, 40);
        assert!(matches!(estimate_gevrey_index(&rep), Err(Error::InsufficientData { usable: 4, .. })));
        assert!(estimate_gevrey_index(&HermiteRep::zeros(&[4, 16]).unwrap()).is_err());
    }
}
