//! Oscillator calculus: the normal-ordered expansion
//! `Σ_{p+q≤2N} c^{(N)}_{p,q} x^p ∂^q` of `2^N (1 + x² - ∂²)^N`, its coefficient
//! bounds, its action in coefficient space, and the Hermite envelope.
//!
//! The coefficients come from the recurrence
//! `c^{(N+1)}_{p,q} = 2(c_{p,q} + c_{p-2,q} - c_{p,q-2} - (p+2)(p+1) c_{p+2,q} - 2(p+1) c_{p+1,q-1})`
//! started from the identity, so `N = 1` gives `2(1 + x² - ∂²)`. Since
//! `1 + x² - ∂² = 2 L⁻L⁺`, the expansion acts on `H_n` as `κ^N (n+1)^N` with
//! `κ = 4`; [`calibrate_kappa`] recovers this from the `N = 1` action.

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_traits::{Signed, ToPrimitive, Zero};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::coeff::{diff, mul_x, HermiteRep, Provenance};
use crate::hermite::{derivative_stencil, hermite_values, MAX_DERIVATIVE_ORDER};
use crate::weights::{check_condition, AssociatedFunction, Condition, WeightSequence};
use crate::{Complex64, Error, Result};

pub const MAX_EXPANSION_ORDER: usize = 64;
pub const MAX_BOUND_ORDER: usize = 20;

/// Exact coefficients `c^{(N)}_{p,q}`; zero entries are not stored.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct OperatorExpansion {
    order: usize,
    coeffs: BTreeMap<(usize, usize), BigInt>,
}

impl OperatorExpansion {
    pub fn order(&self) -> usize {
        self.order
    }

    pub fn coeffs(&self) -> &BTreeMap<(usize, usize), BigInt> {
        &self.coeffs
    }

    /// `c_{p,q}`, zero outside the support.
    pub fn get(&self, p: usize, q: usize) -> BigInt {
        self.coeffs.get(&(p, q)).cloned().unwrap_or_default()
    }

    /// Nonzero entries rounded to `f64`.
    pub fn to_f64(&self) -> BTreeMap<(usize, usize), f64> {
        self.coeffs.iter().map(|(k, v)| (*k, v.to_f64().unwrap_or(f64::NAN))).collect()
    }

    pub fn max_abs(&self) -> BigInt {
        self.coeffs.values().map(|v| v.abs()).max().unwrap_or_default()
    }
}

fn check_order(n: usize, max: usize) -> Result<()> {
    if !(1..=max).contains(&n) {
        return Err(Error::Precondition(format!("expansion order N = {n} outside 1..={max}")));
    }
    Ok(())
}

/// One recurrence step on a dense `(2N+3)²` table; `get` reads the previous
/// level with zero outside its support.
fn step<T, G>(level: usize, get: G, zero: T, make: impl Fn(i64) -> T) -> BTreeMap<(usize, usize), T>
where
    T: Clone + PartialEq,
    G: Fn(i64, i64) -> T,
    T: std::ops::Add<Output = T> + std::ops::Sub<Output = T> + std::ops::Mul<Output = T>,
{
    let top = 2 * level as i64 + 2;
    let mut out = BTreeMap::new();
    for p in 0..=top {
        for q in 0..=(top - p) {
            let v = get(p, q) + get(p - 2, q)
                - get(p, q - 2)
                - make((p + 2) * (p + 1)) * get(p + 2, q)
                - make(2 * (p + 1)) * get(p + 1, q - 1);
            let v = make(2) * v;
            if v != zero {
                out.insert((p as usize, q as usize), v);
            }
        }
    }
    out
}

/// `c^{(N)}` in exact integer arithmetic.
pub fn build_expansion(n: usize) -> Result<OperatorExpansion> {
    check_order(n, MAX_EXPANSION_ORDER)?;
    let mut c: BTreeMap<(usize, usize), BigInt> = BTreeMap::from([((0, 0), BigInt::from(1))]);
    for level in 0..n {
        let get = |p: i64, q: i64| {
            if p < 0 || q < 0 {
                BigInt::zero()
            } else {
                c.get(&(p as usize, q as usize)).cloned().unwrap_or_default()
            }
        };
        c = step(level, get, BigInt::zero(), BigInt::from);
    }
    let exp = OperatorExpansion { order: n, coeffs: c };
    debug_assert!(exp.coeffs.keys().all(|&(p, q)| p + q <= 2 * n && (p + q) % 2 == 0));
    Ok(exp)
}

/// The same recurrence in `f64`, for comparison with the exact build.
pub fn build_expansion_f64(n: usize) -> Result<BTreeMap<(usize, usize), f64>> {
    check_order(n, MAX_EXPANSION_ORDER)?;
    let mut c: BTreeMap<(usize, usize), f64> = BTreeMap::from([((0, 0), 1.0)]);
    for level in 0..n {
        let get = |p: i64, q: i64| {
            if p < 0 || q < 0 {
                0.0
            } else {
                c.get(&(p as usize, q as usize)).copied().unwrap_or(0.0)
            }
        };
        c = step(level, get, 0.0, |k| k as f64);
    }
    Ok(c)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoundViolation {
    pub p: usize,
    pub q: usize,
    pub log_abs_c: f64,
    pub log_bound: f64,
}

/// Outcome of a coefficient bound sweep. Slack is `log(bound) - log|c|`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoundReport {
    pub order: usize,
    pub variant: String,
    pub checked: usize,
    /// Smallest slack over the support and where it occurs.
    pub min_log_slack: f64,
    pub tightest: (usize, usize),
    pub max_log_slack: f64,
    pub violations: Vec<BoundViolation>,
}

impl BoundReport {
    pub fn holds(&self) -> bool {
        self.violations.is_empty()
    }
}

fn log_abs(v: &BigInt) -> f64 {
    // exact enough: f64 covers every |c| with N <= 64
    v.abs().to_f64().map(f64::ln).unwrap_or(f64::INFINITY)
}

fn sweep(exp: &OperatorExpansion, variant: &str, log_bound: impl Fn(usize, usize) -> f64) -> BoundReport {
    let mut report = BoundReport {
        order: exp.order,
        variant: variant.to_string(),
        checked: 0,
        min_log_slack: f64::INFINITY,
        tightest: (0, 0),
        max_log_slack: f64::NEG_INFINITY,
        violations: Vec::new(),
    };
    for (&(p, q), v) in &exp.coeffs {
        let lc = log_abs(v);
        let lb = log_bound(p, q);
        let slack = lb - lc;
        report.checked += 1;
        if slack < report.min_log_slack {
            report.min_log_slack = slack;
            report.tightest = (p, q);
        }
        report.max_log_slack = report.max_log_slack.max(slack);
        // bound values are integers or products of integer powers; allow rounding
        if slack < -1e-12 * lb.abs().max(1.0) {
            report.violations.push(BoundViolation { p, q, log_abs_c: lc, log_bound: lb });
        }
    }
    report
}

/// `|c^{(N)}_{p,q}| ≤ 26^N (2N - q)^{N - (p+q)/2}` with `0⁰ = 1`.
pub fn verify_bound_26(n: usize) -> Result<BoundReport> {
    check_order(n, MAX_BOUND_ORDER)?;
    let exp = build_expansion(n)?;
    let nf = n as f64;
    Ok(sweep(&exp, "26", |p, q| {
        let base = (2 * n - q) as f64;
        let e = nf - (p + q) as f64 / 2.0;
        let pow = if e == 0.0 {
            0.0
        } else if base == 0.0 {
            f64::NEG_INFINITY
        } else {
            e * base.ln()
        };
        nf * 26f64.ln() + pow
    }))
}

/// `|c^{(N)}_{p,q}| ≤ 52^N M_N² / (M_p M_q)` and the `52^N M_{2N} / (M_p M_q)`
/// form, as two reports in that order.
///
/// The sequence must carry (M.1), (M.2) and (M.3)″ certificates on `[0, max(4N, 64)]`.
pub fn verify_bound_52(n: usize, seq: &WeightSequence) -> Result<[BoundReport; 2]> {
    check_order(n, MAX_BOUND_ORDER)?;
    let p_max = (4 * n).max(64);
    for cond in [Condition::M1, Condition::M2, Condition::M3dprime] {
        let cert = check_condition(seq, cond, p_max)?;
        if !cert.holds() {
            return Err(Error::Precondition(format!("sequence lacks {cond:?} up to p = {p_max}: {:?}", cert.verdict)));
        }
    }
    let lm = seq.log_table(2 * n)?;
    let exp = build_expansion(n)?;
    let base = n as f64 * 52f64.ln();
    let squared = sweep(&exp, "52_mn_squared", |p, q| base + 2.0 * lm[n] - lm[p] - lm[q]);
    let doubled = sweep(&exp, "52_m2n", |p, q| base + lm[2 * n] - lm[p] - lm[q]);
    Ok([squared, doubled])
}

/// `Σ c^{(N)}_{p,q} x^p ∂^q` applied along `axis` in coefficient space.
///
/// The top `2N` slots along `axis` must be below `1e-10` in magnitude so
/// that nothing is pushed out of the box.
pub fn apply_expansion(exp: &OperatorExpansion, rep: &HermiteRep, axis: usize) -> Result<HermiteRep> {
    let reach = 2 * exp.order;
    if axis >= rep.dims() {
        return Err(Error::Shape(format!("axis {axis} out of range for d = {}", rep.dims())));
    }
    let len = rep.shape()[axis];
    if len <= reach {
        return Err(Error::Precondition(format!(
            "axis {axis} has {len} slots; order {} needs more than {reach}",
            exp.order
        )));
    }
    let (slot, magnitude) = rep.top_slots_magnitude(axis, reach)?;
    if magnitude > HEADROOM_TOL {
        return Err(Error::Headroom { slot, magnitude });
    }
    let coeffs = exp.to_f64();
    let mut total = rep.coeffs().mapv(|_| Complex64::new(0.0, 0.0));
    let mut loss = rep.truncation_loss();
    let mut dq = rep.clone();
    for q in 0..=reach {
        if q > 0 {
            dq = diff(&dq, axis)?;
        }
        let mut xp = dq.clone();
        for p in 0..=(reach - q) {
            if p > 0 {
                xp = mul_x(&xp, axis)?;
            }
            if let Some(&c) = coeffs.get(&(p, q)) {
                total.zip_mut_with(xp.coeffs(), |t, v| *t += v * c);
                loss += c.abs() * (xp.truncation_loss() - rep.truncation_loss());
            }
        }
    }
    HermiteRep::with_loss(total, Provenance::OperatorOutput, loss)
}

const HEADROOM_TOL: f64 = 1e-10;

/// Exact eigenvalue of the order-`N` expansion on `H_n`.
pub fn oscillator_eigenvalue(order: usize, n: usize) -> f64 {
    (KAPPA * (n + 1) as f64).powi(order as i32)
}

pub const KAPPA: f64 = 4.0;

/// Reads `κ` off the `N = 1` action on `H_3`, snapped to `{2, 4}`.
pub fn calibrate_kappa() -> Result<f64> {
    let exp = build_expansion(1)?;
    let n = 3;
    let out = apply_expansion(&exp, &HermiteRep::unit(&[8], &[n])?, 0)?;
    let ratio = out.get(&[n]).map(|c| c.re).unwrap_or(0.0) / (n + 1) as f64;
    Ok(if (ratio - 2.0).abs() < (ratio - 4.0).abs() { 2.0 } else { 4.0 })
}

/// One `(n, C(n))` point of the envelope trend; `C(n)` is the max over
/// `(α, β)` and `(alpha, beta)` is where it is attained.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EnvelopePoint {
    pub n: usize,
    pub constant: f64,
    pub alpha: usize,
    pub beta: usize,
    pub argmax_x: f64,
    pub log_rhs: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EnvelopeReport {
    pub m: f64,
    pub h: f64,
    pub points: Vec<EnvelopePoint>,
    /// `max_n C(n)`.
    pub fitted_constant: f64,
    /// Reference index for the trend test: the largest grid `n ≤ n_max/8`.
    pub reference_n: usize,
    /// `C(n) ≤ 2 C(reference_n)` for every grid `n ≥ reference_n`.
    pub bounded: bool,
}

pub const MAX_ENVELOPE_N: usize = 400;
pub const MAX_ENVELOPE_ORDER: usize = 10;

/// Index grid: `0`, powers of two, and `{50, 100, 200, 400}`, up to `n_max`.
pub fn envelope_grid(n_max: usize) -> Vec<usize> {
    let mut v: Vec<usize> = std::iter::once(0)
        .chain((0..).map(|k| 1usize << k).take_while(|&n| n <= n_max))
        .chain([50, 100, 200, 400].into_iter().filter(|&n| n <= n_max))
        .chain(std::iter::once(n_max))
        .collect();
    v.sort_unstable();
    v.dedup();
    v
}

/// `m^{α+β} / (M_α M_β) · sup_x (1+x²)^{β/2} |H_n^{(α)}(x)|` against
/// `exp M(8 m H √n)`, for `α ≤ α_max`, `β ≤ β_max`, `n` on [`envelope_grid`].
pub fn hermite_envelope_check(
    af: &AssociatedFunction,
    m: f64,
    h: f64,
    alpha_max: usize,
    beta_max: usize,
    n_max: usize,
) -> Result<EnvelopeReport> {
    if !(m > 0.0 && h > 0.0 && m.is_finite() && h.is_finite()) {
        return Err(Error::Precondition(format!("m = {m}, H = {h} must be positive")));
    }
    if alpha_max > MAX_ENVELOPE_ORDER || beta_max > MAX_ENVELOPE_ORDER || n_max > MAX_ENVELOPE_N {
        return Err(Error::Precondition(format!(
            "alpha_max, beta_max <= {MAX_ENVELOPE_ORDER} and n_max <= {MAX_ENVELOPE_N} required"
        )));
    }
    const { assert!(MAX_ENVELOPE_ORDER <= MAX_DERIVATIVE_ORDER) };
    let lm = af.sequence().log_table(alpha_max.max(beta_max))?;
    let grid = envelope_grid(n_max);
    let points: Vec<EnvelopePoint> = grid
        .par_iter()
        .map(|&n| {
            let log_rhs = af.value(8.0 * m * h * (n as f64).sqrt())?;
            let sups = envelope_sups(n, alpha_max, beta_max)?;
            let mut best = EnvelopePoint { n, constant: 0.0, alpha: 0, beta: 0, argmax_x: 0.0, log_rhs };
            for (alpha, row) in sups.iter().enumerate() {
                for (beta, &(sup, x)) in row.iter().enumerate() {
                    let log_lhs = (alpha + beta) as f64 * m.ln() - lm[alpha] - lm[beta] + sup.ln();
                    let ratio = (log_lhs - log_rhs).exp();
                    if ratio > best.constant {
                        best = EnvelopePoint { n, constant: ratio, alpha, beta, argmax_x: x, log_rhs };
                    }
                }
            }
            Ok(best)
        })
        .collect::<Result<_>>()?;
    let fitted_constant = points.iter().map(|p| p.constant).fold(0.0, f64::max);
    let reference_n = grid.iter().copied().filter(|&n| 8 * n <= n_max).max().unwrap_or(0);
    let c_ref = points.iter().find(|p| p.n == reference_n).map(|p| p.constant).unwrap_or(0.0);
    let bounded = points.iter().filter(|p| p.n >= reference_n).all(|p| p.constant <= 2.0 * c_ref);
    Ok(EnvelopeReport { m, h, points, fitted_constant, reference_n, bounded })
}

/// `sups[α][β] = (sup_{x ≥ 0} (1+x²)^{β/2} |H_n^{(α)}(x)|, argmax)`.
///
/// `|H_n^{(α)}|` is even, so `x ≥ 0` suffices. A grid over `[0, √(2n) + 10]`
/// is refined by golden-section search around each grid maximum.
fn envelope_sups(n: usize, alpha_max: usize, beta_max: usize) -> Result<Vec<Vec<(f64, f64)>>> {
    let stencils: Vec<Vec<(usize, f64)>> = (0..=alpha_max).map(|a| derivative_stencil(n, a)).collect::<Result<_>>()?;
    let derivs = |x: f64| -> Vec<f64> {
        let values = hermite_values(n + alpha_max, x);
        stencils.iter().map(|s| s.iter().map(|&(k, g)| g * values[k]).sum()).collect()
    };
    let objective = |x: f64, alpha: usize, beta: usize| -> f64 {
        let d = derivs(x)[alpha];
        (1.0 + x * x).powf(beta as f64 / 2.0) * d.abs()
    };

    let x_hi = (2.0 * n as f64).sqrt() + 10.0;
    let dx = 0.25 / (2.0 * n as f64 + 1.0).sqrt().max(1.0);
    let steps = (x_hi / dx).ceil() as usize;
    let mut best = vec![vec![(0.0f64, 0usize); beta_max + 1]; alpha_max + 1];
    for i in 0..=steps {
        let x = i as f64 * dx;
        let d = derivs(x);
        let w = 1.0 + x * x;
        for (alpha, row) in best.iter_mut().enumerate() {
            for (beta, cell) in row.iter_mut().enumerate() {
                let v = w.powf(beta as f64 / 2.0) * d[alpha].abs();
                if v > cell.0 {
                    *cell = (v, i);
                }
            }
        }
    }
    Ok(best
        .iter()
        .enumerate()
        .map(|(alpha, row)| {
            row.iter()
                .enumerate()
                .map(|(beta, &(v, i))| {
                    let lo = (i as f64 - 1.0).max(0.0) * dx;
                    let hi = (i as f64 + 1.0) * dx;
                    let (x, refined) = golden_max(|x| objective(x, alpha, beta), lo, hi);
                    if refined > v {
                        (refined, x)
                    } else {
                        (v, i as f64 * dx)
                    }
                })
                .collect()
        })
        .collect())
}

fn golden_max(f: impl Fn(f64) -> f64, mut a: f64, mut b: f64) -> (f64, f64) {
    let r = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = b - r * (b - a);
    let mut d = a + r * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    for _ in 0..40 {
        if fc > fd {
            b = d;
            d = c;
            fd = fc;
            c = b - r * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + r * (b - a);
            fd = f(d);
        }
    }
    if fc > fd {
        (c, fc)
    } else {
        (d, fd)
    }
}
