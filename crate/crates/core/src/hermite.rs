//! Orthonormal Hermite functions
//! `H_n(x) = (-1)^n π^{-1/4} 2^{-n/2} (n!)^{-1/2} e^{x²/2} (d/dx)^n e^{-x²}`,
//! their derivatives, and Gauss-Hermite quadrature.
//!
//! Values come from the normalized three-term recurrence
//! `H_{n+1} = x √(2/(n+1)) H_n - √(n/(n+1)) H_{n-1}`, run on a rescaled state
//! so that large `|x|` does not underflow the seed `e^{-x²/2}` before the
//! oscillatory region of a high-order function is reached.

use std::f64::consts::PI;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Rescaling threshold for the recurrence state.
const BIG: f64 = 1e150;
const LN_BIG: f64 = 345.387_763_949_107; // ln(1e150)

fn seed_log_scale(x: f64) -> f64 {
    -0.5 * x * x - 0.25 * PI.ln()
}

/// `H_n(x)`.
pub fn hermite_eval(n: usize, x: f64) -> f64 {
    let mut log_scale = seed_log_scale(x);
    let (mut prev, mut cur) = (0.0, 1.0);
    for k in 0..n {
        let kf = k as f64;
        let next = x * (2.0 / (kf + 1.0)).sqrt() * cur - (kf / (kf + 1.0)).sqrt() * prev;
        prev = cur;
        cur = next;
        if cur.abs() > BIG {
            prev /= BIG;
            cur /= BIG;
            log_scale += LN_BIG;
        }
    }
    cur * log_scale.exp()
}

/// `[H_0(x), ..., H_{n_max}(x)]`.
pub fn hermite_values(n_max: usize, x: f64) -> Vec<f64> {
    let mut out = Vec::with_capacity(n_max + 1);
    let mut log_scale = seed_log_scale(x);
    let mut factor = log_scale.exp();
    let (mut prev, mut cur) = (0.0, 1.0);
    out.push(factor);
    for k in 0..n_max {
        let kf = k as f64;
        let next = x * (2.0 / (kf + 1.0)).sqrt() * cur - (kf / (kf + 1.0)).sqrt() * prev;
        prev = cur;
        cur = next;
        if cur.abs() > BIG {
            prev /= BIG;
            cur /= BIG;
            log_scale += LN_BIG;
            factor = log_scale.exp();
        }
        out.push(cur * factor);
    }
    out
}

/// Recurrence state at index `n`: `(h_{n-1}, h_n, log_scale)` with
/// `H_k(x) = h_k · e^{log_scale}`. Optionally accumulates `Σ_{k<n} h_k²`
/// (returned in the same scale squared).
fn scaled_state(n: usize, x: f64, want_sum: bool) -> (f64, f64, f64, f64) {
    let mut log_scale = seed_log_scale(x);
    let (mut prev, mut cur) = (0.0, 1.0);
    let mut sum = 0.0;
    for k in 0..n {
        if want_sum {
            sum += cur * cur;
        }
        let kf = k as f64;
        let next = x * (2.0 / (kf + 1.0)).sqrt() * cur - (kf / (kf + 1.0)).sqrt() * prev;
        prev = cur;
        cur = next;
        if cur.abs() > BIG {
            prev /= BIG;
            cur /= BIG;
            sum /= BIG * BIG;
            log_scale += LN_BIG;
        }
    }
    (prev, cur, log_scale, sum)
}

pub const MAX_DERIVATIVE_ORDER: usize = 30;

/// Coefficients `γ` with `H_n^{(α)} = Σ γ_m H_m`, obtained by applying
/// `d/dx = (L⁻ - L⁺)/√2` α times. Entries are `(m, γ_m)` with `m` ascending;
/// indices below zero are dropped (`H_{-k} = 0`).
pub fn derivative_stencil(n: usize, alpha: usize) -> Result<Vec<(usize, f64)>> {
    if alpha > MAX_DERIVATIVE_ORDER {
        return Err(Error::Precondition(format!("derivative order {alpha} exceeds {MAX_DERIVATIVE_ORDER}")));
    }
    // slot j holds the coefficient of H_{n + j - alpha}
    let width = 2 * alpha + 1;
    let mut gamma = vec![0.0; width];
    gamma[alpha] = 1.0;
    let inv_sqrt2 = std::f64::consts::FRAC_1_SQRT_2;
    for _ in 0..alpha {
        let mut next = vec![0.0; width];
        for (j, &c) in gamma.iter().enumerate() {
            if c == 0.0 {
                continue;
            }
            let m = n as i64 + j as i64 - alpha as i64;
            if m < 0 {
                continue;
            }
            let mf = m as f64;
            if m > 0 {
                next[j - 1] += mf.sqrt() * inv_sqrt2 * c;
            }
            next[j + 1] -= (mf + 1.0).sqrt() * inv_sqrt2 * c;
        }
        gamma = next;
    }
    Ok(gamma
        .into_iter()
        .enumerate()
        .filter_map(|(j, g)| {
            let m = n as i64 + j as i64 - alpha as i64;
            (m >= 0 && g != 0.0).then_some((m as usize, g))
        })
        .collect())
}

/// Applies a stencil to precomputed `H_0..` values.
pub fn apply_stencil(stencil: &[(usize, f64)], values: &[f64]) -> f64 {
    stencil.iter().map(|&(m, g)| g * values[m]).sum()
}

/// `H_n^{(α)}(x)`.
pub fn hermite_deriv(n: usize, x: f64, alpha: usize) -> Result<f64> {
    let stencil = derivative_stencil(n, alpha)?;
    let values = hermite_values(n + alpha, x);
    Ok(apply_stencil(&stencil, &values))
}

/// Multi-index `(n_1, ..., n_d)`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct HermiteIndex(Vec<usize>);

impl HermiteIndex {
    pub fn new(components: Vec<usize>) -> Result<Self> {
        if components.is_empty() {
            return Err(Error::Shape("a Hermite index needs at least one component".into()));
        }
        Ok(Self(components))
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn components(&self) -> &[usize] {
        &self.0
    }

    pub fn total_degree(&self) -> usize {
        self.0.iter().sum()
    }
}

/// `H_{n_1}(x_1) ⋯ H_{n_d}(x_d)`.
pub fn tensor_eval(n: &HermiteIndex, x: &[f64]) -> Result<f64> {
    if n.dim() != x.len() {
        return Err(Error::Shape(format!("index has {} components, point has {}", n.dim(), x.len())));
    }
    Ok(n.0.iter().zip(x).map(|(&k, &xi)| hermite_eval(k, xi)).product())
}

/// Gauss-Hermite rule for the weight `e^{-x²}`.
///
/// `log_weights[i] = ln w_i + x_i²`, so `∫ f ≈ Σ exp(log_weights[i]) f(x_i)`
/// for integrands `f` that carry their own Gaussian decay (products of
/// Hermite functions, say).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct QuadratureRule {
    pub nodes: Vec<f64>,
    pub log_weights: Vec<f64>,
    pub order: usize,
}

pub const MAX_QUADRATURE_ORDER: usize = 2000;

/// Golub-Welsch: nodes are the eigenvalues of the Jacobi matrix with
/// off-diagonal `√(k/2)`, polished by Newton on `H_order`. The shifted
/// weights come from the Christoffel function, `w_i e^{x_i²} = 1/Σ_{k<order} H_k(x_i)²`,
/// which stays representable where eigenvector components underflow.
pub fn gauss_hermite(order: usize) -> Result<QuadratureRule> {
    if !(2..=MAX_QUADRATURE_ORDER).contains(&order) {
        return Err(Error::Precondition(format!("quadrature order {order} outside 2..={MAX_QUADRATURE_ORDER}")));
    }
    let mut diag = vec![0.0; order];
    let mut off: Vec<f64> = (1..=order).map(|k| (k as f64 / 2.0).sqrt()).collect();
    off[order - 1] = 0.0;
    tridiagonal_eigenvalues(&mut diag, &mut off)?;
    diag.sort_by(f64::total_cmp);

    let of = order as f64;
    let mut nodes: Vec<f64> = diag
        .iter()
        .map(|&x0| {
            let mut x = x0;
            for _ in 0..4 {
                let (hm1, h, _, _) = scaled_state(order, x, false);
                let dh = (2.0 * of).sqrt() * hm1 - x * h;
                if dh == 0.0 {
                    break;
                }
                let step = h / dh;
                x -= step;
                if step.abs() <= 1e-16 * x.abs().max(1.0) {
                    break;
                }
            }
            x
        })
        .collect();
    for i in 0..order / 2 {
        let j = order - 1 - i;
        let a = 0.5 * (nodes[j] - nodes[i]);
        nodes[i] = -a;
        nodes[j] = a;
    }
    if order % 2 == 1 {
        nodes[order / 2] = 0.0;
    }
    if nodes.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::EigenNonConvergence { index: 0 });
    }

    let mut log_weights = vec![0.0; order];
    for i in (order / 2)..order {
        let (_, _, log_scale, sum) = scaled_state(order, nodes[i], true);
        let lw = -(sum.ln() + 2.0 * log_scale);
        log_weights[i] = lw;
        log_weights[order - 1 - i] = lw;
    }
    Ok(QuadratureRule { nodes, log_weights, order })
}

impl QuadratureRule {
    /// `∫ f dx ≈ Σ exp(log_weight_i) f(x_i)`.
    pub fn integrate<F: Fn(f64) -> f64>(&self, f: F) -> f64 {
        self.nodes.iter().zip(&self.log_weights).map(|(&x, &lw)| lw.exp() * f(x)).sum()
    }

    /// Classical weights `w_i` of `∫ g e^{-x²} ≈ Σ w_i g(x_i)`; may underflow.
    pub fn raw_weights(&self) -> Vec<f64> {
        self.nodes.iter().zip(&self.log_weights).map(|(x, lw)| (lw - x * x).exp()).collect()
    }

    /// `(node, log_weight)` lines with a header.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("node,log_weight\n");
        for (x, lw) in self.nodes.iter().zip(&self.log_weights) {
            let _ = writeln!(out, "{x:.16e},{lw:.16e}");
        }
        out
    }
}

/// Implicit QL with Wilkinson shifts, eigenvalues only. `off[i]` couples
/// rows `i` and `i+1`; `off[n-1]` is scratch.
fn tridiagonal_eigenvalues(d: &mut [f64], e: &mut [f64]) -> Result<()> {
    let n = d.len();
    for l in 0..n {
        let mut iter = 0;
        loop {
            let mut m = l;
            while m + 1 < n {
                let dd = d[m].abs() + d[m + 1].abs();
                if e[m].abs() <= f64::EPSILON * dd {
                    break;
                }
                m += 1;
            }
            if m == l {
                break;
            }
            iter += 1;
            if iter > 60 {
                return Err(Error::EigenNonConvergence { index: l });
            }
            let mut g = (d[l + 1] - d[l]) / (2.0 * e[l]);
            let mut r = g.hypot(1.0);
            g = d[m] - d[l] + e[l] / (g + r.copysign(g));
            let (mut s, mut c, mut p) = (1.0, 1.0, 0.0);
            let mut deflated = false;
            let mut i = m;
            while i > l {
                i -= 1;
                let f = s * e[i];
                let b = c * e[i];
                r = f.hypot(g);
                e[i + 1] = r;
                if r == 0.0 {
                    d[i + 1] -= p;
                    e[m] = 0.0;
                    deflated = true;
                    break;
                }
                s = f / r;
                c = g / r;
                g = d[i + 1] - p;
                r = (d[i] - g) * s + 2.0 * c * b;
                p = s * r;
                d[i + 1] = g + p;
                g = c * r - b;
            }
            if deflated {
                continue;
            }
            d[l] -= p;
            e[l] = g;
            e[m] = 0.0;
        }
    }
    Ok(())
}

#[cfg(test)]
#[allow(clippy::excessive_precision)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    // physicists' polynomial by the explicit sum, then normalized
    fn explicit_hermite(n: usize, x: f64) -> f64 {
        let mut poly = 0.0;
        let fact = |k: usize| (1..=k).map(|i| i as f64).product::<f64>();
        for m in 0..=n / 2 {
            let sign = if m % 2 == 0 { 1.0 } else { -1.0 };
            poly += sign * fact(n) / (fact(m) * fact(n - 2 * m)) * (2.0 * x).powi((n - 2 * m) as i32);
        }
        poly * (-x * x / 2.0).exp() / (PI.sqrt() * 2f64.powi(n as i32) * fact(n)).sqrt()
    }

    #[test]
    fn eval_examples() {
        assert_relative_eq!(hermite_eval(0, 0.0), 0.751_125_544_464_942_5, max_relative = 1e-15);
        assert_eq!(hermite_eval(1, 0.0), 0.0);
        // Rodrigues formula at 40 digits
        assert_relative_eq!(hermite_eval(4, 1.3), -0.385_655_452_466_583_154_198_3, max_relative = 1e-12);
    }

    #[test]
    fn eval_matches_explicit_polynomials() {
        for n in 0..=12 {
            for x in [-2.5, -0.7, 0.0, 0.3, 1.1, 3.0] {
                let want = explicit_hermite(n, x);
                assert!((hermite_eval(n, x) - want).abs() <= 1e-13 * want.abs().max(1e-3), "n={n} x={x}");
            }
        }
    }

    #[test]
    fn values_agree_with_single_eval() {
        let vals = hermite_values(300, 7.5);
        for n in [0, 1, 17, 150, 300] {
            assert_eq!(vals[n], hermite_eval(n, 7.5));
        }
    }

    #[test]
    fn large_argument_high_order_does_not_underflow() {
        // x = 60 is inside the oscillatory region of H_4000 (turning point ~ 89)
        let v = hermite_eval(4000, 60.0);
        assert!(v != 0.0 && v.abs() < 0.9);
        assert_eq!(hermite_eval(10, 60.0), 0.0);
        assert!(hermite_eval(100_000, 1.0).abs() < 0.9);
    }

    #[test]
    fn uniform_bound_and_parity() {
        for n in [1, 2, 5, 10, 33, 100, 257, 1000] {
            let mut x = -50.0;
            while x <= 50.0 {
                let h = hermite_eval(n, x);
                assert!(h.abs() <= 0.9, "n={n} x={x} h={h}");
                let sign = if n % 2 == 0 { 1.0 } else { -1.0 };
                assert_eq!(hermite_eval(n, -x), sign * h);
                x += 0.0371;
            }
        }
    }

    fn central_diff(n: usize, x: f64, h: f64) -> f64 {
        (hermite_eval(n, x + h) - hermite_eval(n, x - h)) / (2.0 * h)
    }

    #[test]
    fn derivative_examples() {
        let h = 1e-5;
        let d = hermite_deriv(1, 0.0, 1).unwrap();
        let ladder = (0.5f64).sqrt() * hermite_eval(0, 0.0) - hermite_eval(2, 0.0);
        assert_relative_eq!(d, ladder, max_relative = 1e-14);
        assert!((d - central_diff(1, 0.0, h)).abs() < 1e-8);

        assert_eq!(hermite_deriv(0, 0.37, 0).unwrap(), hermite_eval(0, 0.37));

        let x = 0.7;
        let fd2 = (hermite_eval(5, x + h) - 2.0 * hermite_eval(5, x) + hermite_eval(5, x - h)) / (h * h);
        assert!((hermite_deriv(5, x, 2).unwrap() - fd2).abs() < 1e-6);
    }

    #[test]
    fn first_derivative_matches_finite_differences() {
        for n in 0..40 {
            for x in [-3.1, -1.0, 0.2, 0.9, 2.4] {
                let fd = central_diff(n, x, 1e-5);
                assert!((hermite_deriv(n, x, 1).unwrap() - fd).abs() < 1e-6, "n={n} x={x}");
            }
        }
    }

    #[test]
    fn stencil_shape() {
        let st = derivative_stencil(1, 3).unwrap();
        assert!(st.iter().all(|(m, _)| *m <= 4));
        // parity: the derivative flips parity, so only even indices appear for n=1, α=3
        assert!(st.iter().all(|(m, _)| m % 2 == 0));
        assert!(derivative_stencil(3, 31).is_err());
    }

    #[test]
    fn tensor_examples() {
        let idx = |v: Vec<usize>| HermiteIndex::new(v).unwrap();
        assert_relative_eq!(tensor_eval(&idx(vec![0, 0]), &[0.0, 0.0]).unwrap(), 1.0 / PI.sqrt(), max_relative = 1e-15);
        assert_eq!(tensor_eval(&idx(vec![1, 0]), &[0.0, 0.8]).unwrap(), 0.0);
        assert_eq!(tensor_eval(&idx(vec![2, 3]), &[0.5, -0.5]).unwrap(), hermite_eval(2, 0.5) * hermite_eval(3, -0.5));
        assert!(matches!(tensor_eval(&idx(vec![1, 2]), &[0.0]), Err(Error::Shape(_))));
        assert!(HermiteIndex::new(vec![]).is_err());
    }

    #[test]
    fn two_point_rule() {
        let r = gauss_hermite(2).unwrap();
        assert_relative_eq!(r.nodes[1], std::f64::consts::FRAC_1_SQRT_2, max_relative = 1e-15);
        assert_eq!(r.nodes[0], -r.nodes[1]);
        for w in r.raw_weights() {
            assert_relative_eq!(w, PI.sqrt() / 2.0, max_relative = 1e-14);
        }
    }

    #[test]
    fn rule_invariants() {
        for order in [3, 10, 41, 160, 700] {
            let r = gauss_hermite(order).unwrap();
            assert!(r.nodes.windows(2).all(|w| w[0] < w[1]));
            for i in 0..order {
                assert_eq!(r.nodes[i], -r.nodes[order - 1 - i]);
            }
            let total: f64 = r.raw_weights().iter().sum();
            assert_relative_eq!(total, PI.sqrt(), max_relative = 1e-12);
        }
    }

    #[test]
    fn rule_is_exact_for_low_moments() {
        let order = 20;
        let r = gauss_hermite(order).unwrap();
        let raw = r.raw_weights();
        for k in 0..2 * order {
            let got: f64 = r.nodes.iter().zip(&raw).map(|(x, w)| w * x.powi(k as i32)).sum();
            let mass: f64 = r.nodes.iter().zip(&raw).map(|(x, w)| (w * x.powi(k as i32)).abs()).sum();
            if k % 2 == 1 {
                assert!(got.abs() < 1e-10 * mass, "k={k} got={got}");
            } else {
                // Γ((k+1)/2) = (k-1)!! √π / 2^{k/2}
                let dfact: f64 = (1..k).step_by(2).map(|i| i as f64).product();
                let want = dfact * PI.sqrt() / 2f64.powi(k as i32 / 2);
                assert_relative_eq!(got, want, max_relative = 1e-10);
            }
        }
    }

    #[test]
    fn orthonormality_examples() {
        let r = gauss_hermite(20).unwrap();
        assert!((r.integrate(|x| hermite_eval(3, x).powi(2)) - 1.0).abs() < 1e-12);
        let r = gauss_hermite(60).unwrap();
        assert!(r.integrate(|x| hermite_eval(40, x) * hermite_eval(38, x)).abs() < 1e-10);
    }

    #[test]
    fn highest_order_rule() {
        let r = gauss_hermite(MAX_QUADRATURE_ORDER).unwrap();
        assert!(r.log_weights.iter().all(|w| w.is_finite()));
        let total: f64 = r.raw_weights().iter().sum();
        assert_relative_eq!(total, PI.sqrt(), max_relative = 1e-12);
        assert!(gauss_hermite(1).is_err());
        assert!(gauss_hermite(2001).is_err());
    }

    #[test]
    fn csv_dump() {
        let csv = gauss_hermite(2).unwrap().to_csv();
        let lines: Vec<_> = csv.lines().collect();
        assert_eq!(lines[0], "node,log_weight");
        assert_eq!(lines.len(), 3);
    }
}
