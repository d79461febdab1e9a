//! Weight sequences `{M_p}`, their structural conditions, and the associated
//! function `M(ρ) = sup_p log(ρ^p / M_p)`.
//!
//! Everything is computed on `log M_p`; `M_p`, `ρ^p` and `p^{p/2}` overflow a
//! double long before the horizons used here.

use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::sync::RwLock;

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Relative slack used for floating comparisons between log quantities.
const LOG_TOL: f64 = 1e-12;

fn tol(v: f64) -> f64 {
    LOG_TOL * v.abs().max(1.0)
}

/// Serialized form of a weight sequence.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum SequenceKind {
    /// `M_p = p^{sp} (max(1, log p))^{tp}` with `M_0 = M_1 = 1`.
    GevreyLog { s: f64, t: f64 },
    /// Explicit values `M_0, M_1, ...`.
    Table { values: Vec<f64> },
}

/// A validated weight sequence.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "SequenceKind", into = "SequenceKind")]
pub struct WeightSequence {
    kind: SequenceKind,
    // log M_p for tables, precomputed
    log_values: Vec<f64>,
}

impl TryFrom<SequenceKind> for WeightSequence {
    type Error = Error;

    fn try_from(kind: SequenceKind) -> Result<Self> {
        match kind {
            SequenceKind::GevreyLog { s, t } => Self::gevrey_log(s, t),
            SequenceKind::Table { values } => Self::table(values),
        }
    }
}

impl From<WeightSequence> for SequenceKind {
    fn from(seq: WeightSequence) -> Self {
        seq.kind
    }
}

impl fmt::Display for WeightSequence {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.kind {
            SequenceKind::GevreyLog { s, t } => write!(f, "gevrey_log(s={s}, t={t})"),
            SequenceKind::Table { values } => write!(f, "table(len={})", values.len()),
        }
    }
}

impl WeightSequence {
    pub fn gevrey_log(s: f64, t: f64) -> Result<Self> {
        if !(s.is_finite() && s >= 0.5) {
            return Err(Error::Precondition(format!("gevrey exponent s = {s} must be >= 1/2")));
        }
        if !(t.is_finite() && t >= 0.0) {
            return Err(Error::Precondition(format!("log exponent t = {t} must be >= 0")));
        }
        Ok(Self { kind: SequenceKind::GevreyLog { s, t }, log_values: Vec::new() })
    }

    pub fn table(values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::Precondition("weight table is empty".into()));
        }
        if values[0] != 1.0 {
            return Err(Error::Precondition(format!("M_0 must be exactly 1, got {}", values[0])));
        }
        if let Some(p) = values.iter().position(|v| !(v.is_finite() && *v > 0.0)) {
            return Err(Error::Precondition(format!("M_{p} = {} is not a positive real", values[p])));
        }
        let log_values = values.iter().map(|v| v.ln()).collect();
        Ok(Self { kind: SequenceKind::Table { values }, log_values })
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn kind(&self) -> &SequenceKind {
        &self.kind
    }

    /// Largest index that can be evaluated.
    pub fn max_index(&self) -> usize {
        match &self.kind {
            SequenceKind::GevreyLog { .. } => usize::MAX,
            SequenceKind::Table { values } => values.len() - 1,
        }
    }

    /// `log M_p`.
    pub fn log_mp(&self, p: usize) -> Result<f64> {
        match &self.kind {
            SequenceKind::GevreyLog { s, t } => Ok(gevrey_log_value(*s, *t, p)),
            SequenceKind::Table { values } => {
                self.log_values.get(p).copied().ok_or(Error::Range { index: p, len: values.len() })
            }
        }
    }

    /// `M_p` itself; `+inf` once it leaves double range.
    pub fn eval_mp(&self, p: usize) -> Result<f64> {
        match &self.kind {
            SequenceKind::Table { values } => {
                values.get(p).copied().ok_or(Error::Range { index: p, len: values.len() })
            }
            SequenceKind::GevreyLog { .. } => Ok(self.log_mp(p)?.exp()),
        }
    }

    /// `log M_0, ..., log M_{p_max}`.
    pub fn log_table(&self, p_max: usize) -> Result<Vec<f64>> {
        if p_max > self.max_index() {
            return Err(Error::Range { index: p_max, len: self.max_index() + 1 });
        }
        (0..=p_max).map(|p| self.log_mp(p)).collect()
    }
}

fn gevrey_log_value(s: f64, t: f64, p: usize) -> f64 {
    if p <= 1 {
        return 0.0;
    }
    let pf = p as f64;
    let lp = pf.ln();
    let mut v = s * pf * lp;
    if t != 0.0 {
        v += t * pf * lp.max(1.0).ln();
    }
    v
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Condition {
    /// Logarithmic convexity.
    M1,
    /// Stability under ultradifferential operators.
    M2,
    /// Non-quasianalyticity, `Σ M_{p-1}/M_p < ∞`.
    M3prime,
    /// `p^{p/2} ≤ C L^p M_p` for some `L`.
    M3dprime,
    /// `p^{p/2} ≤ C L^p M_p` for every `L`.
    M3tprime,
}

impl Condition {
    pub const ALL: [Condition; 5] =
        [Condition::M1, Condition::M2, Condition::M3prime, Condition::M3dprime, Condition::M3tprime];
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum Verdict {
    HoldsUpToPmax,
    Fails { witness: usize },
    Undecided,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConditionCertificate {
    pub condition: Condition,
    pub verdict: Verdict,
    /// Certifying constants. Keys ending in `log_` hold natural logarithms.
    pub constants: BTreeMap<String, f64>,
    pub p_max: usize,
}

impl ConditionCertificate {
    pub fn holds(&self) -> bool {
        self.verdict == Verdict::HoldsUpToPmax
    }
}

/// Geometric grid used for the constants `H` and `L`.
pub fn constant_grid() -> impl Iterator<Item = f64> {
    (-10..=20).map(|k| 2f64.powi(k))
}

/// Default ladder of `L` values probed for (M.3)‴.
pub const DEFAULT_L_LADDER: [f64; 3] = [1.0, 0.5, 0.25];

pub fn check_condition(seq: &WeightSequence, which: Condition, p_max: usize) -> Result<ConditionCertificate> {
    if p_max < 4 {
        return Err(Error::Precondition(format!("p_max = {p_max} must be >= 4")));
    }
    match which {
        Condition::M1 => check_m1(seq, p_max),
        Condition::M2 => check_m2(seq, p_max),
        Condition::M3prime => check_m3_prime(seq, p_max),
        Condition::M3dprime => check_m3_dprime(seq, p_max),
        Condition::M3tprime => check_m3_tprime(seq, p_max, &DEFAULT_L_LADDER),
    }
}

/// Certificates for all five conditions, in [`Condition::ALL`] order.
pub fn check_all(seq: &WeightSequence, p_max: usize) -> Result<Vec<ConditionCertificate>> {
    Condition::ALL.iter().map(|c| check_condition(seq, *c, p_max)).collect()
}

fn certificate(condition: Condition, verdict: Verdict, p_max: usize) -> ConditionCertificate {
    ConditionCertificate { condition, verdict, constants: BTreeMap::new(), p_max }
}

fn check_m1(seq: &WeightSequence, p_max: usize) -> Result<ConditionCertificate> {
    let lm = seq.log_table(p_max + 1)?;
    for p in 1..=p_max {
        let lhs = 2.0 * lm[p];
        let rhs = lm[p - 1] + lm[p + 1];
        if lhs > rhs + tol(lhs) {
            return Ok(certificate(Condition::M1, Verdict::Fails { witness: p }, p_max));
        }
    }
    Ok(certificate(Condition::M1, Verdict::HoldsUpToPmax, p_max))
}

/// Fits `max_p (g_p - p log K)` on `[0, p_max/2]` and on `[0, p_max]`.
/// The constant is certified when the half-horizon fit already covers the
/// full horizon. Returns `(log_const_full, argmax_full, certified)`.
fn half_horizon_fit(g: &[f64], log_k: f64) -> (f64, usize, bool) {
    let p_max = g.len() - 1;
    let half = p_max / 2;
    let mut best_half = f64::NEG_INFINITY;
    let mut best = f64::NEG_INFINITY;
    let mut arg = 0;
    for (p, gp) in g.iter().enumerate() {
        let v = gp - p as f64 * log_k;
        if v > best {
            best = v;
            arg = p;
        }
        if p == half {
            best_half = best;
        }
    }
    (best, arg, best <= best_half + tol(best_half))
}

fn check_m2(seq: &WeightSequence, p_max: usize) -> Result<ConditionCertificate> {
    let lm = seq.log_table(p_max)?;
    // g_p = log M_p - min_q (log M_q + log M_{p-q})
    let g: Vec<f64> = (0..=p_max)
        .map(|p| {
            let min = (0..=p).map(|q| lm[q] + lm[p - q]).fold(f64::INFINITY, f64::min);
            lm[p] - min
        })
        .collect();
    let mut last_witness = p_max;
    for h in constant_grid() {
        let (log_a, arg, ok) = half_horizon_fit(&g, h.ln());
        if ok {
            let mut cert = certificate(Condition::M2, Verdict::HoldsUpToPmax, p_max);
            cert.constants.insert("H".into(), h);
            cert.constants.insert("A".into(), log_a.exp());
            cert.constants.insert("log_A".into(), log_a);
            return Ok(cert);
        }
        last_witness = arg;
    }
    Ok(certificate(Condition::M2, Verdict::Fails { witness: last_witness }, p_max))
}

/// `log(p^{p/2}) - log M_p`, with `0^0 = 1`.
fn nontriviality_gap(lm: &[f64]) -> Vec<f64> {
    lm.iter()
        .enumerate()
        .map(|(p, l)| {
            let pf = p as f64;
            let half_log = if p == 0 { 0.0 } else { 0.5 * pf * pf.ln() };
            half_log - l
        })
        .collect()
}

fn check_m3_dprime(seq: &WeightSequence, p_max: usize) -> Result<ConditionCertificate> {
    let gap = nontriviality_gap(&seq.log_table(p_max)?);
    let mut last_witness = p_max;
    for l in constant_grid() {
        let (log_c, arg, ok) = half_horizon_fit(&gap, l.ln());
        if ok {
            let mut cert = certificate(Condition::M3dprime, Verdict::HoldsUpToPmax, p_max);
            cert.constants.insert("L".into(), l);
            cert.constants.insert("C".into(), log_c.exp());
            cert.constants.insert("log_C".into(), log_c);
            return Ok(cert);
        }
        last_witness = arg;
    }
    Ok(certificate(Condition::M3dprime, Verdict::Fails { witness: last_witness }, p_max))
}

/// (M.3)‴ probed on an explicit ladder of `L` values.
///
/// Each `L` is certified when the constant fitted on half the horizon covers
/// the full horizon. An uncertified `L` whose log-increments are still
/// decreasing at the horizon is `undecided` (the sup may be attained later);
/// one with non-decreasing increments is a failure.
pub fn check_m3_tprime(seq: &WeightSequence, p_max: usize, ladder: &[f64]) -> Result<ConditionCertificate> {
    if ladder.is_empty() || ladder.iter().any(|l| !(l.is_finite() && *l > 0.0)) {
        return Err(Error::Precondition("L ladder must be nonempty and positive".into()));
    }
    let gap = nontriviality_gap(&seq.log_table(p_max)?);
    let mut cert = certificate(Condition::M3tprime, Verdict::HoldsUpToPmax, p_max);
    let mut undecided = false;
    for &l in ladder {
        let log_l = l.ln();
        let (log_c, arg, ok) = half_horizon_fit(&gap, log_l);
        cert.constants.insert(format!("log_C[L={l}]"), log_c);
        if ok {
            continue;
        }
        let q = (3 * p_max) / 4;
        let inc_late = gap[p_max] - gap[p_max - 1] - log_l;
        let inc_mid = gap[q] - gap[q - 1] - log_l;
        if inc_late < inc_mid - tol(inc_mid) {
            undecided = true;
        } else {
            cert.verdict = Verdict::Fails { witness: arg };
            return Ok(cert);
        }
    }
    if undecided {
        cert.verdict = Verdict::Undecided;
    }
    Ok(cert)
}

/// Exponent at which `M_{p-1}/M_p` must decay to count as summable.
pub const M3_PRIME_CONVERGE_EXPONENT: f64 = 1.25;
/// Tail exponents at or below this are reported as divergent.
pub const M3_PRIME_DIVERGE_EXPONENT: f64 = 1.05;

/// Partial sums decide nothing, so the verdict comes from the tail decay
/// exponent σ of `M_{p-1}/M_p ~ p^{-σ}` fitted over `[p_max/2, p_max]`.
fn check_m3_prime(seq: &WeightSequence, p_max: usize) -> Result<ConditionCertificate> {
    let lm = seq.log_table(p_max)?;
    let log_ratio: Vec<f64> = (1..=p_max).map(|p| lm[p - 1] - lm[p]).collect();
    let partial_sum: f64 = log_ratio.iter().map(|r| r.exp()).sum();

    let lo = (p_max / 2).max(2);
    let (xs, ys): (Vec<f64>, Vec<f64>) = (lo..=p_max).map(|p| ((p as f64).ln(), -log_ratio[p - 1])).unzip();
    let sigma = least_squares_slope(&xs, &ys);

    let verdict = if sigma >= M3_PRIME_CONVERGE_EXPONENT {
        Verdict::HoldsUpToPmax
    } else if sigma <= M3_PRIME_DIVERGE_EXPONENT {
        Verdict::Fails { witness: p_max }
    } else {
        Verdict::Undecided
    };
    let mut cert = certificate(Condition::M3prime, verdict, p_max);
    cert.constants.insert("partial_sum".into(), partial_sum);
    cert.constants.insert("tail_exponent".into(), sigma);
    Ok(cert)
}

pub(crate) fn least_squares_slope(xs: &[f64], ys: &[f64]) -> f64 {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let (mut sxy, mut sxx) = (0.0, 0.0);
    for (x, y) in xs.iter().zip(ys) {
        sxy += (x - mx) * (y - my);
        sxx += (x - mx) * (x - mx);
    }
    sxy / sxx
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct AssocValue {
    pub value: f64,
    pub maximizer: usize,
}

/// Hard cap on the maximizer search of [`AssociatedFunction::eval`].
pub const ASSOC_CAP: usize = 1 << 27;
/// Number of consecutive non-improving terms that ends the search.
const SETTLE_RUN: usize = 64;

/// Memoized evaluator of `M(ρ) = sup_p (p log ρ - log M_p)`.
#[derive(Debug)]
pub struct AssociatedFunction {
    seq: WeightSequence,
    cap: usize,
    cache: RwLock<HashMap<u64, AssocValue>>,
}

impl Clone for AssociatedFunction {
    fn clone(&self) -> Self {
        let cache = self.cache.read().map(|c| c.clone()).unwrap_or_default();
        Self { seq: self.seq.clone(), cap: self.cap, cache: RwLock::new(cache) }
    }
}

impl AssociatedFunction {
    pub fn new(seq: WeightSequence) -> Self {
        Self::with_cap(seq, ASSOC_CAP)
    }

    pub fn with_cap(seq: WeightSequence, cap: usize) -> Self {
        Self { seq, cap, cache: RwLock::new(HashMap::new()) }
    }

    pub fn sequence(&self) -> &WeightSequence {
        &self.seq
    }

    /// Evaluates `M(ρ)` and the smallest maximizing index.
    ///
    /// The scan stops once the summand has failed to improve for a sustained
    /// run; this is exact for log-convex sequences, where the summand is
    /// concave in `p`. `ρ = 0` is accepted as the limit value `M(0) = 0`.
    pub fn eval(&self, rho: f64) -> Result<AssocValue> {
        if !(rho.is_finite() && rho >= 0.0) {
            return Err(Error::Precondition(format!("rho = {rho} must be a nonnegative real")));
        }
        let key = rho.to_bits();
        if let Some(hit) = self.cache.read().ok().and_then(|c| c.get(&key).copied()) {
            return Ok(hit);
        }
        let out = self.scan(rho)?;
        if let Ok(mut c) = self.cache.write() {
            c.insert(key, out);
        }
        Ok(out)
    }

    /// `M(ρ)` only.
    pub fn value(&self, rho: f64) -> Result<f64> {
        Ok(self.eval(rho)?.value)
    }

    fn scan(&self, rho: f64) -> Result<AssocValue> {
        let l0 = self.seq.log_mp(0)?;
        if rho == 0.0 {
            return Ok(AssocValue { value: -l0, maximizer: 0 });
        }
        let log_rho = rho.ln();
        let limit = self.seq.max_index().min(self.cap);
        let mut best = -l0;
        let mut arg = 0;
        let mut p = 1;
        while p <= limit {
            let term = p as f64 * log_rho - self.seq.log_mp(p)?;
            if term > best {
                best = term;
                arg = p;
            } else if p - arg >= SETTLE_RUN {
                return Ok(AssocValue { value: best, maximizer: arg });
            }
            p += 1;
        }
        if limit < self.cap && arg < limit {
            // table exhausted after the summand started to fall
            return Ok(AssocValue { value: best, maximizer: arg });
        }
        Err(Error::Cap { rho, cap: limit, best: arg })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AsymptoticPoint {
    pub rho: f64,
    pub log_m: f64,
    /// `(1/s) log ρ - (t/s) log log ρ`
    pub reference: f64,
    pub ratio: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AsymptoticReport {
    pub s: f64,
    pub t: f64,
    pub points: Vec<AsymptoticPoint>,
    /// `|ratio - 1|` is non-increasing along the (sorted) grid.
    pub approaches_one: bool,
    pub final_deviation: f64,
}

/// Compares `log M(ρ)` with the logarithm of `ρ^{1/s} (log ρ)^{-t/s}`.
pub fn assoc_asymptotic_check(af: &AssociatedFunction, s: f64, t: f64, rho_grid: &[f64]) -> Result<AsymptoticReport> {
    if !matches!(af.sequence().kind(), SequenceKind::GevreyLog { .. }) {
        return Err(Error::Precondition("asymptotic check needs a gevrey_log sequence".into()));
    }
    if rho_grid.is_empty() || rho_grid.iter().any(|r| r.is_nan() || *r < 100.0) {
        return Err(Error::Precondition("rho grid must be nonempty with values >= 100".into()));
    }
    let mut grid = rho_grid.to_vec();
    grid.sort_by(f64::total_cmp);
    let mut points = Vec::with_capacity(grid.len());
    for rho in grid {
        let m = af.value(rho)?;
        let lr = rho.ln();
        let reference = lr / s - (t / s) * lr.ln();
        let log_m = m.ln();
        points.push(AsymptoticPoint { rho, log_m, reference, ratio: log_m / reference });
    }
    let approaches_one = points.windows(2).all(|w| (w[1].ratio - 1.0).abs() <= (w[0].ratio - 1.0).abs() + 1e-9);
    let final_deviation = (points.last().map(|p| p.ratio).unwrap_or(1.0) - 1.0).abs();
    Ok(AsymptoticReport { s, t, points, approaches_one, final_deviation })
}

#[cfg(test)]
#[allow(clippy::excessive_precision)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn gev(s: f64, t: f64) -> WeightSequence {
        WeightSequence::gevrey_log(s, t).unwrap()
    }

    // brute-force sup, kept separate from the adaptive scan
    fn brute_sup(s: f64, t: f64, rho: f64, p_max: usize) -> (f64, usize) {
        let mut best = (0.0, 0);
        for p in 1..=p_max {
            let pf = p as f64;
            let lm = if p <= 1 { 0.0 } else { s * pf * pf.ln() + t * pf * pf.ln().max(1.0).ln() };
            let v = pf * rho.ln() - lm;
            if v > best.0 {
                best = (v, p);
            }
        }
        best
    }

    #[test]
    fn eval_mp_examples() {
        assert_relative_eq!(gev(1.0, 0.0).eval_mp(3).unwrap(), 27.0, max_relative = 1e-14);
        assert_relative_eq!(gev(0.5, 0.0).eval_mp(4).unwrap(), 16.0, max_relative = 1e-14);
        // 10^10 (ln 10)^10 evaluated at 30 digits
        assert_relative_eq!(gev(1.0, 1.0).eval_mp(10).unwrap(), 41894487980295.2047902488112643, max_relative = 1e-13);
        let s = gev(0.5, 1.0);
        assert_eq!(s.eval_mp(0).unwrap(), 1.0);
        assert_eq!(s.eval_mp(1).unwrap(), 1.0);
    }

    #[test]
    fn table_validation_and_range() {
        assert!(WeightSequence::table(vec![2.0, 3.0]).is_err());
        assert!(WeightSequence::table(vec![1.0, 0.0]).is_err());
        assert!(WeightSequence::table(vec![]).is_err());
        let t = WeightSequence::table(vec![1.0, 1.0, 2.0]).unwrap();
        assert_eq!(t.eval_mp(2).unwrap(), 2.0);
        assert!(matches!(t.eval_mp(3), Err(Error::Range { index: 3, len: 3 })));
        assert!(WeightSequence::gevrey_log(0.4, 0.0).is_err());
    }

    #[test]
    fn json_forms() {
        let s = WeightSequence::from_json(r#"{"kind":"gevrey_log","s":0.5,"t":1.0}"#).unwrap();
        assert_eq!(s, gev(0.5, 1.0));
        let t = WeightSequence::from_json(r#"{"kind":"table","values":[1.0,2.0,8.0]}"#).unwrap();
        assert_eq!(t.max_index(), 2);
        assert!(WeightSequence::from_json(r#"{"kind":"table","values":[3.0]}"#).is_err());
        let back = serde_json::to_string(&s).unwrap();
        assert_eq!(back, r#"{"kind":"gevrey_log","s":0.5,"t":1.0}"#);
    }

    #[test]
    fn m1_examples() {
        assert!(check_condition(&gev(1.0, 0.0), Condition::M1, 100).unwrap().holds());
        assert!(check_condition(&gev(0.5, 1.0), Condition::M1, 500).unwrap().holds());
        let bad = WeightSequence::table(vec![1.0, 1.0, 8.0, 9.0, 100.0, 1e4, 1e6]).unwrap();
        let cert = check_condition(&bad, Condition::M1, 4).unwrap();
        assert_eq!(cert.verdict, Verdict::Fails { witness: 2 });
    }

    #[test]
    fn m1_needs_one_extra_table_entry() {
        let t = WeightSequence::table(vec![1.0, 1.0, 2.0, 6.0, 24.0]).unwrap();
        assert!(matches!(check_condition(&t, Condition::M1, 4), Err(Error::Range { .. })));
        assert!(check_condition(&t, Condition::M1, 3).is_err());
    }

    #[test]
    fn m2_gevrey_half() {
        let cert = check_condition(&gev(0.5, 0.0), Condition::M2, 200).unwrap();
        assert!(cert.holds());
        assert_eq!(cert.constants["H"], 2.0);
        assert_relative_eq!(cert.constants["A"], 1.0, max_relative = 1e-12);
        // certified constants do cover the whole horizon
        let lm = gev(0.5, 0.0).log_table(200).unwrap();
        for p in 0..=200 {
            for q in 0..=p {
                assert!(lm[p] <= cert.constants["log_A"] + p as f64 * 2f64.ln() + lm[q] + lm[p - q] + 1e-9);
            }
        }
    }

    #[test]
    fn m2_fails_for_late_jump() {
        let mut vals = vec![1.0; 10];
        vals.push(1e300);
        let cert = check_condition(&WeightSequence::table(vals).unwrap(), Condition::M2, 10).unwrap();
        assert!(matches!(cert.verdict, Verdict::Fails { .. }));
    }

    #[test]
    fn m3_dprime_gevrey_half_has_unit_constants() {
        let cert = check_condition(&gev(0.5, 0.0), Condition::M3dprime, 200).unwrap();
        assert!(cert.holds());
        assert_eq!(cert.constants["L"], 1.0);
        assert_eq!(cert.constants["C"], 1.0);
    }

    #[test]
    fn m3_dprime_fails_on_late_collapse() {
        // p^{p/2} up to a collapse at the end of the table
        let mut vals: Vec<f64> = (0..30).map(|p| if p == 0 { 1.0 } else { (p as f64).powf(p as f64 / 2.0) }).collect();
        vals.push(1e-250);
        let cert = check_condition(&WeightSequence::table(vals).unwrap(), Condition::M3dprime, 30).unwrap();
        assert!(matches!(cert.verdict, Verdict::Fails { .. }));
    }

    #[test]
    fn m3_tprime_examples() {
        let cert = check_condition(&gev(0.5, 1.0), Condition::M3tprime, 200).unwrap();
        assert!(cert.holds(), "{cert:?}");
        let cert = check_condition(&gev(0.5, 0.0), Condition::M3tprime, 200).unwrap();
        assert!(matches!(cert.verdict, Verdict::Fails { .. }));
        // too small an L for the horizon: trend still bending down
        let cert = check_m3_tprime(&gev(0.5, 1.0), 200, &[0.125]).unwrap();
        assert_eq!(cert.verdict, Verdict::Undecided);
    }

    #[test]
    fn m3_prime_examples() {
        let cert = check_condition(&gev(0.5, 0.0), Condition::M3prime, 10_000).unwrap();
        assert!(matches!(cert.verdict, Verdict::Fails { .. }), "{cert:?}");
        assert!(matches!(
            check_condition(&gev(1.0, 0.0), Condition::M3prime, 10_000).unwrap().verdict,
            Verdict::Fails { .. }
        ));
        assert!(check_condition(&gev(2.0, 0.0), Condition::M3prime, 10_000).unwrap().holds());
        assert_eq!(check_condition(&gev(1.0, 1.0), Condition::M3prime, 10_000).unwrap().verdict, Verdict::Undecided);
    }

    #[test]
    fn small_horizon_rejected() {
        assert!(check_condition(&gev(1.0, 0.0), Condition::M1, 3).is_err());
    }

    #[test]
    fn assoc_examples() {
        let af = AssociatedFunction::new(gev(1.0, 0.0));
        assert_eq!(af.eval(1.0).unwrap(), AssocValue { value: 0.0, maximizer: 0 });
        let e2 = af.eval(std::f64::consts::E.powi(2)).unwrap();
        // brute force over p <= 10^4 gives 2.704163133995671 at p = 3
        assert_relative_eq!(e2.value, 2.704163133995671, max_relative = 1e-13);
        assert_eq!(e2.maximizer, 3);

        let af = AssociatedFunction::new(gev(0.5, 0.0));
        let v = af.eval(10.0).unwrap();
        assert_relative_eq!(v.value, 18.393667056861545, max_relative = 1e-13);
        assert_eq!(v.maximizer, 37);
        assert!((v.value - 100.0 / (2.0 * std::f64::consts::E)).abs() < 1.0);
    }

    #[test]
    fn assoc_matches_brute_force() {
        for (s, t) in [(0.5, 0.0), (1.0, 0.0), (1.0, 1.0), (0.5, 1.0)] {
            let af = AssociatedFunction::new(gev(s, t));
            for rho in [0.3, 1.0, 1.7, 5.0, 42.0, 150.0] {
                let got = af.eval(rho).unwrap();
                let (v, p) = brute_sup(s, t, rho, 10_000);
                assert!((got.value - v).abs() <= 1e-12 * v.abs().max(1.0));
                assert_eq!(got.maximizer, p);
            }
        }
    }

    #[test]
    fn assoc_zero_below_one_and_rejects_negative() {
        let af = AssociatedFunction::new(gev(0.5, 1.0));
        for rho in [0.0, 1e-300, 0.2, 0.999, 1.0] {
            assert_eq!(af.value(rho).unwrap(), 0.0);
        }
        assert!(af.eval(-1.0).is_err());
        assert!(af.eval(f64::NAN).is_err());
    }

    #[test]
    fn assoc_cap_error() {
        let af = AssociatedFunction::with_cap(gev(0.5, 0.0), 1000);
        assert!(matches!(af.eval(1e3), Err(Error::Cap { .. })));
        let table = WeightSequence::table(vec![1.0, 1.0, 1.0, 1.0]).unwrap();
        assert!(matches!(AssociatedFunction::new(table).eval(2.0), Err(Error::Cap { .. })));
    }

    #[test]
    fn assoc_on_table() {
        let vals: Vec<f64> = (0..150u32).map(|p| (1..=p).map(f64::from).product::<f64>().max(1.0)).collect();
        let af = AssociatedFunction::new(WeightSequence::table(vals).unwrap());
        // M_p = p!: sup_p rho^p / p! near p = rho
        let v = af.eval(20.0).unwrap();
        assert!(v.maximizer == 19 || v.maximizer == 20);
    }

    #[test]
    fn asymptotic_examples() {
        let af = AssociatedFunction::new(gev(1.0, 0.0));
        let rep = assoc_asymptotic_check(&af, 1.0, 0.0, &[1e2, 1e4, 1e6]).unwrap();
        assert!(rep.final_deviation < 0.15, "{rep:?}");
        assert!(rep.approaches_one);

        let af = AssociatedFunction::new(gev(0.5, 0.0));
        let rep = assoc_asymptotic_check(&af, 0.5, 0.0, &[1e3]).unwrap();
        assert!(rep.final_deviation < 0.15, "{rep:?}");

        let af = AssociatedFunction::new(gev(1.0, 1.0));
        let rep = assoc_asymptotic_check(&af, 1.0, 1.0, &[1e6]).unwrap();
        assert!(rep.final_deviation < 0.3, "{rep:?}");

        assert!(assoc_asymptotic_check(&af, 1.0, 1.0, &[10.0]).is_err());
    }
}
