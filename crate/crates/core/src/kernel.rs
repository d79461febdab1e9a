//! Coefficient-matrix kernels `t_{(n,k)} = B(H_n, H_k)` on a truncated box.
//!
//! Multi-indices are flattened in row-major order, so row `n` of the matrix
//! belongs to the output box and column `k` to the input box.

use ndarray::{Array2, ArrayD, IxDyn};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::coeff::{descending_sum, diff, fourier, mul_x, HermiteRep, Provenance, ThetaVector};
use crate::opcalc::{apply_expansion, build_expansion};
use crate::weights::AssociatedFunction;
use crate::{Complex64, Error, Result};

/// Minimal `C` with `|t_{(n,k)}| ≤ C exp[2ΣM(θ_i√n_i)] exp[2ΣM(ν_j√k_j)]`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GrowthCertificate {
    pub theta: ThetaVector,
    pub nu: ThetaVector,
    pub constant: f64,
    pub log_constant: f64,
    pub argmax: (Vec<usize>, Vec<usize>),
}

#[derive(Clone, Debug, PartialEq)]
pub struct KernelRep {
    shape_l: Vec<usize>,
    shape_s: Vec<usize>,
    matrix: Array2<Complex64>,
    growth: Option<GrowthCertificate>,
}

fn box_len(shape: &[usize]) -> Result<usize> {
    if shape.is_empty() || shape.contains(&0) {
        return Err(Error::Shape(format!("invalid box {shape:?}")));
    }
    Ok(shape.iter().product())
}

/// Row-major multi-index of flat position `i`.
pub fn unflatten(mut i: usize, shape: &[usize]) -> Vec<usize> {
    let mut idx = vec![0; shape.len()];
    for (slot, &n) in idx.iter_mut().zip(shape).rev() {
        *slot = i % n;
        i /= n;
    }
    idx
}

impl KernelRep {
    pub fn new(shape_l: Vec<usize>, shape_s: Vec<usize>, matrix: Array2<Complex64>) -> Result<Self> {
        let (rows, cols) = (box_len(&shape_l)?, box_len(&shape_s)?);
        if matrix.dim() != (rows, cols) {
            return Err(Error::Shape(format!(
                "matrix {:?} does not fit boxes {shape_l:?} x {shape_s:?}",
                matrix.dim()
            )));
        }
        if let Some(((n, k), _)) = matrix.indexed_iter().find(|(_, t)| !(t.re.is_finite() && t.im.is_finite())) {
            return Err(Error::Data(format!(
                "non-finite kernel entry at {:?}, {:?}",
                unflatten(n, &shape_l),
                unflatten(k, &shape_s)
            )));
        }
        Ok(Self { shape_l, shape_s, matrix, growth: None })
    }

    pub fn shape_l(&self) -> &[usize] {
        &self.shape_l
    }

    pub fn shape_s(&self) -> &[usize] {
        &self.shape_s
    }

    pub fn matrix(&self) -> &Array2<Complex64> {
        &self.matrix
    }

    pub fn growth(&self) -> Option<&GrowthCertificate> {
        self.growth.as_ref()
    }

    pub fn dims_l(&self) -> usize {
        self.shape_l.len()
    }

    pub fn dims_s(&self) -> usize {
        self.shape_s.len()
    }
}

/// `t_{(n,k)} = B(n, k)` over the product box.
pub fn kernel_from_bilinear<B>(b: B, shape_l: &[usize], shape_s: &[usize]) -> Result<KernelRep>
where
    B: Fn(&[usize], &[usize]) -> Complex64,
{
    let (rows, cols) = (box_len(shape_l)?, box_len(shape_s)?);
    let mut matrix = Array2::zeros((rows, cols));
    for r in 0..rows {
        let n = unflatten(r, shape_l);
        for c in 0..cols {
            let k = unflatten(c, shape_s);
            let t = b(&n, &k);
            if t.re.is_nan() || t.im.is_nan() {
                return Err(Error::Data(format!("bilinear form is NaN at n = {n:?}, k = {k:?}")));
            }
            matrix[[r, c]] = t;
        }
    }
    KernelRep::new(shape_l.to_vec(), shape_s.to_vec(), matrix)
}

/// Kernel of `f ⊗ g`: `t_{(n,k)} = a_n b_k`.
pub fn kernel_rank_one(a: &HermiteRep, b: &HermiteRep) -> Result<KernelRep> {
    kernel_from_bilinear(|n, k| a.coeffs()[IxDyn(n)] * b.coeffs()[IxDyn(k)], a.shape(), b.shape())
}

/// `(Kφ)_n = Σ_k t_{(n,k)} φ_k`.
pub fn apply_kernel(kernel: &KernelRep, phi: &HermiteRep) -> Result<HermiteRep> {
    if phi.shape() != kernel.shape_s.as_slice() {
        return Err(Error::Shape(format!("input box {:?} does not match kernel {:?}", phi.shape(), kernel.shape_s)));
    }
    let x: Vec<Complex64> = phi.coeffs().iter().copied().collect();
    let out: Vec<Complex64> = (0..kernel.matrix.nrows())
        .into_par_iter()
        .map(|r| kernel.matrix.row(r).iter().zip(&x).map(|(t, v)| t * v).sum())
        .collect();
    let coeffs = ArrayD::from_shape_vec(IxDyn(&kernel.shape_l), out).expect("row count matches box");
    HermiteRep::new(coeffs, Provenance::OperatorOutput)
}

/// `K(ψ ⊗ φ) = Σ t_{(n,k)} ψ_n φ_k`.
pub fn kernel_pairing(kernel: &KernelRep, psi: &HermiteRep, phi: &HermiteRep) -> Result<Complex64> {
    if psi.shape() != kernel.shape_l.as_slice() || phi.shape() != kernel.shape_s.as_slice() {
        return Err(Error::Shape(format!(
            "pairing boxes {:?} x {:?} do not match kernel {:?} x {:?}",
            psi.shape(),
            phi.shape(),
            kernel.shape_l,
            kernel.shape_s
        )));
    }
    let psi: Vec<Complex64> = psi.coeffs().iter().copied().collect();
    let phi: Vec<Complex64> = phi.coeffs().iter().copied().collect();
    let mut terms: Vec<Complex64> =
        kernel.matrix.indexed_iter().map(|((r, c), t)| t * psi[r] * phi[c]).filter(|v| v.norm() > 0.0).collect();
    Ok(descending_sum(&mut terms))
}

fn log_weight_table(theta: &ThetaVector, shape: &[usize], af: &AssociatedFunction) -> Result<Vec<f64>> {
    let w = crate::coeff::axis_weights(theta, shape, af)?;
    Ok((0..box_len(shape)?)
        .map(|i| unflatten(i, shape).iter().enumerate().map(|(k, &n)| 2.0 * w[k][n]).sum())
        .collect())
}

/// Fits the growth constant and stores the certificate on the kernel.
pub fn kernel_growth_check(
    kernel: &mut KernelRep,
    theta: &ThetaVector,
    nu: &ThetaVector,
    af: &AssociatedFunction,
) -> Result<GrowthCertificate> {
    let wl = log_weight_table(theta, &kernel.shape_l, af)?;
    let ws = log_weight_table(nu, &kernel.shape_s, af)?;
    let mut best = (0.0f64, f64::NEG_INFINITY, 0usize, 0usize);
    for ((r, c), t) in kernel.matrix.indexed_iter() {
        let mag = t.norm();
        if mag == 0.0 {
            continue;
        }
        let w = wl[r] + ws[c];
        let log_ratio = mag.ln() - w;
        if log_ratio > best.1 {
            // e^0 = 1 keeps unit entries at unit weight exact
            best = (mag * (-w).exp(), log_ratio, r, c);
        }
    }
    let cert = GrowthCertificate {
        theta: theta.clone(),
        nu: nu.clone(),
        constant: best.0,
        log_constant: best.1,
        argmax: (unflatten(best.2, &kernel.shape_l), unflatten(best.3, &kernel.shape_s)),
    };
    kernel.growth = Some(cert.clone());
    Ok(cert)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "op", rename_all = "snake_case")]
pub enum KernelOperator {
    Fourier,
    MulX {
        axis: usize,
    },
    Diff {
        axis: usize,
    },
    /// Order-`power` oscillator expansion along `axis`.
    Oscillator {
        power: usize,
        axis: usize,
    },
}

impl KernelOperator {
    /// The operator applied directly in coefficient space.
    pub fn apply(self, rep: &HermiteRep) -> Result<HermiteRep> {
        match self {
            KernelOperator::Fourier => Ok(fourier(rep)),
            KernelOperator::MulX { axis } => mul_x(rep, axis),
            KernelOperator::Diff { axis } => diff(rep, axis),
            KernelOperator::Oscillator { power, axis } => apply_expansion(&build_expansion(power)?, rep, axis),
        }
    }
}

/// Matrix of an operator compressed to `shape`: column `k` is the image of
/// the `k`-th basis vector, cropped to the box. The oscillator is applied in
/// a box padded by `2N` along its axis, so its columns are exact.
pub fn kernel_of_operator(op: KernelOperator, shape: &[usize]) -> Result<KernelRep> {
    let len = box_len(shape)?;
    let pad = match op {
        KernelOperator::MulX { axis } | KernelOperator::Diff { axis } | KernelOperator::Oscillator { axis, .. }
            if axis >= shape.len() =>
        {
            return Err(Error::Shape(format!("axis {axis} out of range for d = {}", shape.len())));
        }
        KernelOperator::Oscillator { power, axis } => Some((axis, 2 * power)),
        _ => None,
    };
    let work_shape: Vec<usize> = match pad {
        Some((axis, extra)) => shape.iter().enumerate().map(|(i, &n)| if i == axis { n + extra } else { n }).collect(),
        None => shape.to_vec(),
    };
    let columns: Vec<Vec<Complex64>> = (0..len)
        .into_par_iter()
        .map(|c| {
            let unit = HermiteRep::unit(&work_shape, &unflatten(c, shape))?;
            let image = op.apply(&unit)?.resized(shape)?;
            Ok(image.coeffs().iter().copied().collect())
        })
        .collect::<Result<_>>()?;
    let matrix = Array2::from_shape_fn((len, len), |(r, c)| columns[c][r]);
    KernelRep::new(shape.to_vec(), shape.to_vec(), matrix)
}
