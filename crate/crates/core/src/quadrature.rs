//! Gauss-Legendre and Gauss-Lobatto rules on the reference interval `[-1/2, 1/2]`.
//!
//! Weights are normalised to sum to one. Nodes are computed in `f64` by Newton
//! iteration on Legendre polynomials and then converted to the target scalar.

use crate::error::{MhdError, Result};
use crate::real::Real;

/// Largest supported number of nodes.
pub const MAX_NODES: usize = 10;

/// A one-dimensional quadrature rule on `[-1/2, 1/2]`.
#[derive(Clone, Debug, PartialEq)]
pub struct Rule<T> {
    pub nodes: Vec<T>,
    pub weights: Vec<T>,
}

impl<T: Real> Rule<T> {
    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Approximates `int_{-1/2}^{1/2} f`.
    pub fn integrate(&self, f: impl Fn(T) -> T) -> T {
        self.nodes.iter().zip(&self.weights).map(|(&x, &w)| w * f(x)).sum()
    }

    fn from_f64(nodes: Vec<f64>, weights: Vec<f64>) -> Self {
        Self {
            nodes: nodes.into_iter().map(T::lit).collect(),
            weights: weights.into_iter().map(T::lit).collect(),
        }
    }
}

/// `(P_n(x), P_n'(x))` on `[-1, 1]`.
pub(crate) fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    if n == 0 {
        return (1.0, 0.0);
    }
    let (mut p0, mut p1) = (1.0, x);
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let dp = if (1.0 - x * x).abs() < 1e-300 {
        let nf = n as f64;
        x.powi(n as i32 + 1) * nf * (nf + 1.0) / 2.0
    } else {
        n as f64 * (p0 - x * p1) / (1.0 - x * x)
    };
    (p1, dp)
}

/// `P_n(x)` on `[-1, 1]`.
pub(crate) fn legendre(n: usize, x: f64) -> f64 {
    legendre_with_derivative(n, x).0
}

/// `Q`-point Gauss-Legendre rule, exact for degree `2Q - 1`.
pub fn gauss_legendre<T: Real>(q: usize) -> Result<Rule<T>> {
    if q == 0 || q > MAX_NODES {
        return Err(MhdError::QuadratureSize(q));
    }
    let mut nodes = Vec::with_capacity(q);
    let mut weights = Vec::with_capacity(q);
    for k in 0..q {
        let mut x = -(std::f64::consts::PI * (k as f64 + 0.75) / (q as f64 + 0.5)).cos();
        for _ in 0..100 {
            let (p, dp) = legendre_with_derivative(q, x);
            let dx = p / dp;
            x -= dx;
            if dx.abs() < 1e-15 {
                break;
            }
        }
        let (_, dp) = legendre_with_derivative(q, x);
        nodes.push(0.5 * x);
        // Weight on [-1, 1] divided by the interval length 2.
        weights.push(1.0 / ((1.0 - x * x) * dp * dp));
    }
    symmetrize(&mut nodes, &mut weights);
    Ok(Rule::from_f64(nodes, weights))
}

/// `L`-point Gauss-Lobatto rule (`L >= 2`), exact for degree `2L - 3`.
pub fn gauss_lobatto<T: Real>(l: usize) -> Result<Rule<T>> {
    if !(2..=MAX_NODES).contains(&l) {
        return Err(MhdError::QuadratureSize(l));
    }
    let n = l - 1;
    let nf = n as f64;
    let mut nodes = Vec::with_capacity(l);
    let mut weights = Vec::with_capacity(l);
    for k in 0..l {
        let x = if k == 0 {
            -1.0
        } else if k == n {
            1.0
        } else {
            // Interior nodes are the roots of P_n'.
            let mut x = -(std::f64::consts::PI * k as f64 / nf).cos();
            for _ in 0..100 {
                let (p, dp) = legendre_with_derivative(n, x);
                // P_n'' from the Legendre ODE.
                let d2p = (2.0 * x * dp - nf * (nf + 1.0) * p) / (1.0 - x * x);
                let dx = dp / d2p;
                x -= dx;
                if dx.abs() < 1e-15 {
                    break;
                }
            }
            x
        };
        let p = legendre(n, x);
        nodes.push(0.5 * x);
        weights.push(1.0 / (nf * (nf + 1.0) * p * p));
    }
    symmetrize(&mut nodes, &mut weights);
    Ok(Rule::from_f64(nodes, weights))
}

fn symmetrize(nodes: &mut [f64], weights: &mut [f64]) {
    let n = nodes.len();
    for k in 0..n / 2 {
        let x = 0.5 * (nodes[n - 1 - k] - nodes[k]);
        nodes[k] = -x;
        nodes[n - 1 - k] = x;
        let w = 0.5 * (weights[k] + weights[n - 1 - k]);
        weights[k] = w;
        weights[n - 1 - k] = w;
    }
    if n % 2 == 1 {
        nodes[n / 2] = 0.0;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn exact_monomial(k: i32) -> f64 {
        if k % 2 == 1 {
            0.0
        } else {
            2.0 * 0.5f64.powi(k + 1) / (k as f64 + 1.0)
        }
    }

    #[test]
    fn gauss_exactness() {
        for q in 1..=MAX_NODES {
            let r = gauss_legendre::<f64>(q).unwrap();
            assert_eq!(r.len(), q);
            assert_relative_eq!(r.weights.iter().sum::<f64>(), 1.0, epsilon = 1e-14);
            for k in 0..(2 * q as i32) {
                assert_relative_eq!(r.integrate(|x| x.powi(k)), exact_monomial(k), epsilon = 1e-14);
            }
        }
    }

    #[test]
    fn lobatto_exactness() {
        for l in 2..=MAX_NODES {
            let r = gauss_lobatto::<f64>(l).unwrap();
            assert_eq!(r.nodes[0], -0.5);
            assert_eq!(r.nodes[l - 1], 0.5);
            assert_relative_eq!(r.weights.iter().sum::<f64>(), 1.0, epsilon = 1e-14);
            for k in 0..(2 * l as i32 - 2) {
                assert_relative_eq!(r.integrate(|x| x.powi(k)), exact_monomial(k), epsilon = 1e-14);
            }
        }
    }

    #[test]
    fn tabulated_values() {
        let g = gauss_legendre::<f64>(2).unwrap();
        assert_relative_eq!(g.nodes[1], 0.5 / 3.0f64.sqrt(), epsilon = 1e-15);
        let g = gauss_legendre::<f64>(3).unwrap();
        assert_relative_eq!(g.nodes[2], 0.5 * 0.6f64.sqrt(), epsilon = 1e-15);
        assert_relative_eq!(g.weights[0], 5.0 / 18.0, epsilon = 1e-15);
        assert_relative_eq!(g.weights[1], 8.0 / 18.0, epsilon = 1e-15);
        let l = gauss_lobatto::<f64>(2).unwrap();
        assert_eq!(l.weights, vec![0.5, 0.5]);
        let l = gauss_lobatto::<f64>(3).unwrap();
        assert_relative_eq!(l.weights[0], 1.0 / 6.0, epsilon = 1e-15);
        assert_relative_eq!(l.weights[1], 2.0 / 3.0, epsilon = 1e-15);
        let l = gauss_lobatto::<f64>(4).unwrap();
        assert_relative_eq!(l.nodes[2], 0.5 / 5.0f64.sqrt(), epsilon = 1e-15);
        assert_relative_eq!(l.weights[0], 1.0 / 12.0, epsilon = 1e-15);
    }

    #[test]
    fn rejects_bad_sizes() {
        assert!(gauss_legendre::<f64>(0).is_err());
        assert!(gauss_legendre::<f64>(11).is_err());
        assert!(gauss_lobatto::<f64>(1).is_err());
        assert!(gauss_lobatto::<f32>(11).is_err());
    }
}
