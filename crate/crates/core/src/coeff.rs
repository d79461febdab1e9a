//! Hermite representations: Fourier-Hermite analysis and synthesis, the
//! weighted sequence norms `‖·‖_θ`, and the coefficient-space action of the
//! Fourier transform, the ladder operators, `x` and `d/dx`.
//!
//! With `L⁺ H_n = √(n+1) H_{n+1}` and `L⁻ H_n = √n H_{n-1}`, multiplication by
//! `x` is `(L⁻ + L⁺)/√2` and differentiation is `(L⁻ - L⁺)/√2`; the Fourier
//! transform is diagonal with eigenvalue `√(2π) iⁿ` per axis.

use std::f64::consts::{FRAC_1_SQRT_2, PI};

use ndarray::{Array2, ArrayD, ArrayView1, ArrayViewMut1, Axis, Dimension, IxDyn};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::hermite::{hermite_values, QuadratureRule};
use crate::weights::AssociatedFunction;
use crate::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Provenance {
    Analyzed,
    Synthetic,
    OperatorOutput,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RepMeta {
    pub provenance: Provenance,
    /// Accumulated ℓ² magnitude of coefficients pushed out of the box by
    /// raising-type operators.
    pub truncation_loss: f64,
}

/// Coefficients `a_n` over a truncated index box `N_1 × ⋯ × N_d`.
#[derive(Clone, Debug, PartialEq)]
pub struct HermiteRep {
    coeffs: ArrayD<Complex64>,
    meta: RepMeta,
}

impl HermiteRep {
    pub fn new(coeffs: ArrayD<Complex64>, provenance: Provenance) -> Result<Self> {
        Self::with_loss(coeffs, provenance, 0.0)
    }

    pub fn with_loss(coeffs: ArrayD<Complex64>, provenance: Provenance, truncation_loss: f64) -> Result<Self> {
        if coeffs.ndim() == 0 || coeffs.is_empty() {
            return Err(Error::Shape("a representation needs d >= 1 and a nonempty box".into()));
        }
        if let Some((idx, _)) = coeffs.indexed_iter().find(|(_, c)| !(c.re.is_finite() && c.im.is_finite())) {
            return Err(Error::Data(format!("non-finite coefficient at {:?}", idx.slice())));
        }
        Ok(Self { coeffs, meta: RepMeta { provenance, truncation_loss } })
    }

    pub fn zeros(shape: &[usize]) -> Result<Self> {
        Self::new(ArrayD::zeros(IxDyn(shape)), Provenance::Synthetic)
    }

    /// Unit coefficient at `index`.
    pub fn unit(shape: &[usize], index: &[usize]) -> Result<Self> {
        let mut rep = Self::zeros(shape)?;
        if index.len() != shape.len() || index.iter().zip(shape).any(|(i, n)| i >= n) {
            return Err(Error::Shape(format!("index {index:?} outside box {shape:?}")));
        }
        rep.coeffs[IxDyn(index)] = Complex64::new(1.0, 0.0);
        Ok(rep)
    }

    pub fn from_vec(values: Vec<Complex64>) -> Result<Self> {
        let n = values.len();
        Self::new(ArrayD::from_shape_vec(IxDyn(&[n]), values).expect("1-d shape"), Provenance::Synthetic)
    }

    pub fn from_real(values: &[f64]) -> Result<Self> {
        Self::from_vec(values.iter().map(|&v| Complex64::new(v, 0.0)).collect())
    }

    pub fn dims(&self) -> usize {
        self.coeffs.ndim()
    }

    pub fn shape(&self) -> &[usize] {
        self.coeffs.shape()
    }

    pub fn coeffs(&self) -> &ArrayD<Complex64> {
        &self.coeffs
    }

    pub fn into_coeffs(self) -> ArrayD<Complex64> {
        self.coeffs
    }

    pub fn meta(&self) -> &RepMeta {
        &self.meta
    }

    pub fn truncation_loss(&self) -> f64 {
        self.meta.truncation_loss
    }

    pub fn get(&self, index: &[usize]) -> Option<Complex64> {
        self.coeffs.get(IxDyn(index)).copied()
    }

    /// Flat coefficient list of a one-dimensional representation.
    pub fn to_vec_1d(&self) -> Result<Vec<Complex64>> {
        if self.dims() != 1 {
            return Err(Error::Shape(format!("expected a 1-d representation, got d = {}", self.dims())));
        }
        Ok(self.coeffs.iter().copied().collect())
    }

    /// Largest `|a_n|` among the top `count` slots along `axis`.
    pub fn top_slots_magnitude(&self, axis: usize, count: usize) -> Result<(usize, f64)> {
        self.check_axis(axis)?;
        let n = self.shape()[axis];
        let from = n.saturating_sub(count);
        let mut worst = (from, 0.0f64);
        for slot in from..n {
            let m = self.coeffs.index_axis(Axis(axis), slot).iter().map(|c| c.norm()).fold(0.0, f64::max);
            if m > worst.1 {
                worst = (slot, m);
            }
        }
        Ok(worst)
    }

    /// Copy into a larger (or smaller) box, zero-filling or cropping per axis.
    /// Cropped mass is added to the truncation loss.
    pub fn resized(&self, shape: &[usize]) -> Result<Self> {
        if shape.len() != self.dims() {
            return Err(Error::Shape(format!("cannot resize d = {} to {shape:?}", self.dims())));
        }
        let mut out = ArrayD::zeros(IxDyn(shape));
        let mut lost = 0.0;
        for (idx, c) in self.coeffs.indexed_iter() {
            match out.get_mut(idx.slice()) {
                Some(slot) => *slot = *c,
                None => lost += c.norm_sqr(),
            }
        }
        Self::with_loss(out, self.meta.provenance, self.meta.truncation_loss + lost.sqrt())
    }

    pub fn scaled(&self, factor: Complex64) -> Self {
        Self {
            coeffs: self.coeffs.mapv(|c| c * factor),
            meta: RepMeta {
                provenance: self.meta.provenance,
                truncation_loss: self.meta.truncation_loss * factor.norm(),
            },
        }
    }

    fn check_axis(&self, axis: usize) -> Result<()> {
        if axis >= self.dims() {
            return Err(Error::Shape(format!("axis {axis} out of range for d = {}", self.dims())));
        }
        Ok(())
    }
}

/// Positive scale vector `(θ_1, …, θ_d)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct ThetaVector(Vec<f64>);

impl ThetaVector {
    pub fn new(components: Vec<f64>) -> Result<Self> {
        if components.is_empty() || components.iter().any(|t| !(t.is_finite() && *t > 0.0)) {
            return Err(Error::Precondition(format!("theta {components:?} must be nonempty and positive")));
        }
        Ok(Self(components))
    }

    /// Same value on every axis.
    pub fn uniform(theta: f64, dims: usize) -> Result<Self> {
        Self::new(vec![theta; dims])
    }

    pub fn components(&self) -> &[f64] {
        &self.0
    }

    pub fn dims(&self) -> usize {
        self.0.len()
    }

    /// Componentwise `self ≤ other`.
    pub fn le(&self, other: &ThetaVector) -> bool {
        self.0.len() == other.0.len() && self.0.iter().zip(&other.0).all(|(a, b)| a <= b)
    }
}

impl TryFrom<Vec<f64>> for ThetaVector {
    type Error = Error;
    fn try_from(v: Vec<f64>) -> Result<Self> {
        Self::new(v)
    }
}

impl From<ThetaVector> for Vec<f64> {
    fn from(t: ThetaVector) -> Self {
        t.0
    }
}

/// Per-axis weight tables `M(θ_k √n)` for `n < N_k`.
pub fn axis_weights(theta: &ThetaVector, shape: &[usize], af: &AssociatedFunction) -> Result<Vec<Vec<f64>>> {
    if theta.dims() != shape.len() {
        return Err(Error::Shape(format!("theta has {} components, box has {} axes", theta.dims(), shape.len())));
    }
    theta.0.iter().zip(shape).map(|(&t, &n)| (0..n).map(|k| af.value(t * (k as f64).sqrt())).collect()).collect()
}

/// Input to [`analyze`].
pub enum Signal<'a> {
    Function(&'a dyn Fn(&[f64]) -> Complex64),
    Samples(&'a SampledGrid),
}

/// Tensor-grid samples: per-axis coordinates and values over their product.
#[derive(Clone, Debug)]
pub struct SampledGrid {
    pub axes: Vec<Vec<f64>>,
    pub values: ArrayD<Complex64>,
}

impl SampledGrid {
    /// Samples `f` on the tensor grid of a rule's nodes.
    pub fn on_nodes(rule: &QuadratureRule, dims: usize, f: impl Fn(&[f64]) -> Complex64) -> Self {
        let q = rule.order;
        let shape = vec![q; dims];
        let values = ArrayD::from_shape_fn(IxDyn(&shape), |idx| {
            let x: Vec<f64> = idx.slice().iter().map(|&i| rule.nodes[i]).collect();
            f(&x)
        });
        Self { axes: vec![rule.nodes.clone(); dims], values }
    }
}

const NODE_MATCH_TOL: f64 = 1e-12;

/// `a_n = ∫ φ H_n`, tensorized over the axes of `shape`.
pub fn analyze(signal: Signal<'_>, shape: &[usize], rule: &QuadratureRule) -> Result<HermiteRep> {
    if shape.is_empty() || shape.contains(&0) {
        return Err(Error::Shape(format!("invalid box {shape:?}")));
    }
    let n_max = *shape.iter().max().unwrap();
    if rule.order < 2 * n_max + 4 {
        return Err(Error::Precondition(format!("rule order {} below 2*{n_max}+4 for box {shape:?}", rule.order)));
    }
    let d = shape.len();
    let q = rule.order;
    let samples: ArrayD<Complex64> = match signal {
        Signal::Function(f) => SampledGrid::on_nodes(rule, d, f).values,
        Signal::Samples(grid) => align_samples(grid, rule, d)?,
    };
    if let Some((idx, _)) = samples.indexed_iter().find(|(_, c)| c.re.is_nan() || c.im.is_nan()) {
        return Err(Error::Data(format!("NaN sample at node index {:?}", idx.slice())));
    }

    // W[n][i] = exp(log_w_i) H_n(x_i)
    let n_top = n_max - 1;
    let mut table = Array2::<f64>::zeros((n_max, q));
    for (i, (&x, &lw)) in rule.nodes.iter().zip(&rule.log_weights).enumerate() {
        let w = lw.exp();
        for (n, h) in hermite_values(n_top, x).into_iter().enumerate() {
            table[[n, i]] = w * h;
        }
    }
    let mut acc = samples;
    for (axis, &n) in shape.iter().enumerate() {
        let sub = table.slice(ndarray::s![..n, ..]).to_owned();
        acc = contract_axis(&acc, axis, &sub);
    }
    HermiteRep::new(acc, Provenance::Analyzed)
}

/// One-dimensional convenience wrapper around [`analyze`].
pub fn analyze_1d(f: impl Fn(f64) -> f64, n: usize, rule: &QuadratureRule) -> Result<HermiteRep> {
    let g = |x: &[f64]| Complex64::new(f(x[0]), 0.0);
    analyze(Signal::Function(&g), &[n], rule)
}

fn align_samples(grid: &SampledGrid, rule: &QuadratureRule, d: usize) -> Result<ArrayD<Complex64>> {
    if grid.axes.len() != d || grid.values.ndim() != d {
        return Err(Error::Shape(format!("sample grid has {} axes, box has {d}", grid.axes.len())));
    }
    let mut values = grid.values.clone();
    for (axis, coords) in grid.axes.iter().enumerate() {
        if coords.len() != values.shape()[axis] {
            return Err(Error::Shape(format!(
                "axis {axis}: {} coordinates for {} samples",
                coords.len(),
                values.shape()[axis]
            )));
        }
        let mut pick = Vec::with_capacity(rule.order);
        for &node in &rule.nodes {
            let hit = coords
                .iter()
                .position(|&c| (c - node).abs() <= NODE_MATCH_TOL * node.abs().max(1.0))
                .ok_or(Error::Alignment { axis, node })?;
            pick.push(hit);
        }
        values = values.select(Axis(axis), &pick);
    }
    Ok(values)
}

/// Contracts `axis` of `input` against the rows of `mat`.
fn contract_axis(input: &ArrayD<Complex64>, axis: usize, mat: &Array2<f64>) -> ArrayD<Complex64> {
    let mut shape = input.shape().to_vec();
    shape[axis] = mat.nrows();
    let mut out = ArrayD::zeros(IxDyn(&shape));
    for (src, mut dst) in input.lanes(Axis(axis)).into_iter().zip(out.lanes_mut(Axis(axis))) {
        for (n, row) in mat.rows().into_iter().enumerate() {
            dst[n] = row.iter().zip(src.iter()).map(|(w, v)| v * *w).sum();
        }
    }
    out
}

/// `Σ_n a_n H_n(x)`.
pub fn synthesize(rep: &HermiteRep, x: &[f64]) -> Result<Complex64> {
    if x.len() != rep.dims() {
        return Err(Error::Shape(format!("point has {} coordinates, representation d = {}", x.len(), rep.dims())));
    }
    let tables: Vec<Vec<f64>> = rep.shape().iter().zip(x).map(|(&n, &xi)| hermite_values(n - 1, xi)).collect();
    Ok(rep
        .coeffs
        .indexed_iter()
        .map(|(idx, c)| {
            let h: f64 = idx.slice().iter().zip(&tables).map(|(&k, t)| t[k]).product();
            c * h
        })
        .sum())
}

/// [`synthesize`] on the tensor grid spanned by `axes`.
pub fn synthesize_grid(rep: &HermiteRep, axes: Vec<Vec<f64>>) -> Result<SampledGrid> {
    if axes.len() != rep.dims() {
        return Err(Error::Shape(format!("{} grid axes for a d = {} representation", axes.len(), rep.dims())));
    }
    let shape: Vec<usize> = axes.iter().map(Vec::len).collect();
    let mut values = ArrayD::zeros(IxDyn(&shape));
    for (idx, v) in values.indexed_iter_mut() {
        let x: Vec<f64> = idx.slice().iter().enumerate().map(|(k, &i)| axes[k][i]).collect();
        *v = synthesize(rep, &x)?;
    }
    Ok(SampledGrid { axes, values })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct NormValue {
    pub value: f64,
    pub log_value: f64,
    /// The norm exceeded double range; `value` is `+inf`, `log_value` is exact.
    pub saturated: bool,
}

/// `‖{a_n}‖_θ = (Σ |a_n|² exp[2 Σ_k M(θ_k √n_k)])^{1/2}`, summed in
/// descending order of magnitude.
pub fn seq_norm(rep: &HermiteRep, theta: &ThetaVector, af: &AssociatedFunction) -> Result<NormValue> {
    let w = axis_weights(theta, rep.shape(), af)?;
    let mut logs: Vec<f64> = rep
        .coeffs
        .indexed_iter()
        .filter(|(_, c)| c.norm() > 0.0)
        .map(|(idx, c)| {
            let m: f64 = idx.slice().iter().enumerate().map(|(k, &n)| w[k][n]).sum();
            2.0 * c.norm().ln() + 2.0 * m
        })
        .collect();
    Ok(norm_from_log_terms(&mut logs))
}

pub(crate) fn norm_from_log_terms(logs: &mut [f64]) -> NormValue {
    if logs.is_empty() {
        return NormValue { value: 0.0, log_value: f64::NEG_INFINITY, saturated: false };
    }
    logs.sort_by(|a, b| b.total_cmp(a));
    let top = logs[0];
    let sum: f64 = logs.iter().map(|l| (l - top).exp()).sum();
    let log_value = 0.5 * (top + sum.ln());
    let value = log_value.exp();
    NormValue { value, log_value, saturated: value.is_infinite() }
}

fn i_pow(k: usize) -> Complex64 {
    match k % 4 {
        0 => Complex64::new(1.0, 0.0),
        1 => Complex64::new(0.0, 1.0),
        2 => Complex64::new(-1.0, 0.0),
        _ => Complex64::new(0.0, -1.0),
    }
}

/// `F[H_n] = (2π)^{d/2} i^{|n|} H_n`.
pub fn fourier(rep: &HermiteRep) -> HermiteRep {
    let scale = (2.0 * PI).powf(rep.dims() as f64 / 2.0);
    let mut out = rep.coeffs.clone();
    for (idx, c) in out.indexed_iter_mut() {
        let total: usize = idx.slice().iter().sum();
        *c = *c * i_pow(total) * scale;
    }
    HermiteRep {
        coeffs: out,
        meta: RepMeta { provenance: Provenance::OperatorOutput, truncation_loss: rep.meta.truncation_loss * scale },
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LadderKind {
    Raise,
    Lower,
}

fn lane_op<F>(rep: &HermiteRep, axis: usize, mut f: F) -> Result<HermiteRep>
where
    F: FnMut(ArrayView1<Complex64>, ArrayViewMut1<Complex64>) -> f64,
{
    rep.check_axis(axis)?;
    let mut out = ArrayD::zeros(rep.coeffs.raw_dim());
    let mut dropped_sq = 0.0;
    for (src, dst) in rep.coeffs.lanes(Axis(axis)).into_iter().zip(out.lanes_mut(Axis(axis))) {
        dropped_sq += f(src, dst);
    }
    Ok(HermiteRep {
        coeffs: out,
        meta: RepMeta {
            provenance: Provenance::OperatorOutput,
            truncation_loss: rep.meta.truncation_loss + dropped_sq.sqrt(),
        },
    })
}

/// `L⁺` or `L⁻` along `axis`. Raising drops the top slot into the
/// truncation loss.
pub fn ladder(rep: &HermiteRep, which: LadderKind, axis: usize) -> Result<HermiteRep> {
    match which {
        LadderKind::Lower => lane_op(rep, axis, |src, mut dst| {
            for m in 0..src.len().saturating_sub(1) {
                dst[m] = src[m + 1] * ((m + 1) as f64).sqrt();
            }
            0.0
        }),
        LadderKind::Raise => lane_op(rep, axis, |src, mut dst| {
            let n = src.len();
            for m in 0..n - 1 {
                dst[m + 1] = src[m] * ((m + 1) as f64).sqrt();
            }
            (src[n - 1] * (n as f64).sqrt()).norm_sqr()
        }),
    }
}

fn tridiagonal(rep: &HermiteRep, axis: usize, sign: f64) -> Result<HermiteRep> {
    lane_op(rep, axis, |src, mut dst| {
        let n = src.len();
        for m in 0..n {
            let mut v = Complex64::new(0.0, 0.0);
            if m + 1 < n {
                v += src[m + 1] * ((m + 1) as f64).sqrt();
            }
            if m > 0 {
                v += src[m - 1] * (sign * (m as f64).sqrt());
            }
            dst[m] = v * FRAC_1_SQRT_2;
        }
        (src[n - 1] * ((n as f64).sqrt() * FRAC_1_SQRT_2)).norm_sqr()
    })
}

/// Multiplication by `x_axis`.
pub fn mul_x(rep: &HermiteRep, axis: usize) -> Result<HermiteRep> {
    tridiagonal(rep, axis, 1.0)
}

/// `∂/∂x_axis`.
pub fn diff(rep: &HermiteRep, axis: usize) -> Result<HermiteRep> {
    tridiagonal(rep, axis, -1.0)
}

/// Bilinear pairing `Σ_n b_n a_n` (no conjugation). Boxes must be nested;
/// the smaller one is zero-extended.
pub fn pairing(dual: &HermiteRep, test: &HermiteRep) -> Result<Complex64> {
    if dual.dims() != test.dims() {
        return Err(Error::Shape(format!("pairing d = {} with d = {}", dual.dims(), test.dims())));
    }
    let le = dual.shape().iter().zip(test.shape()).all(|(a, b)| a <= b);
    let ge = dual.shape().iter().zip(test.shape()).all(|(a, b)| a >= b);
    if !(le || ge) {
        return Err(Error::Shape(format!("boxes {:?} and {:?} are not nested", dual.shape(), test.shape())));
    }
    let (small, large) = if le { (dual, test) } else { (test, dual) };
    let mut products: Vec<Complex64> =
        small.coeffs.indexed_iter().map(|(idx, c)| c * large.coeffs[idx.slice()]).filter(|p| p.norm() > 0.0).collect();
    Ok(descending_sum(&mut products))
}

/// Neumaier-compensated sum in descending order of magnitude.
pub(crate) fn descending_sum(values: &mut [Complex64]) -> Complex64 {
    values.sort_by(|a, b| b.norm().total_cmp(&a.norm()));
    let re = neumaier(values.iter().map(|c| c.re));
    let im = neumaier(values.iter().map(|c| c.im));
    Complex64::new(re, im)
}

fn neumaier(values: impl Iterator<Item = f64>) -> f64 {
    let (mut sum, mut comp) = (0.0f64, 0.0f64);
    for v in values {
        let t = sum + v;
        if sum.abs() >= v.abs() {
            comp += (sum - t) + v;
        } else {
            comp += (v - t) + sum;
        }
        sum = t;
    }
    sum + comp
}
