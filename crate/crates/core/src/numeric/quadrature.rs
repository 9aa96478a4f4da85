//! Gauss-Hermite quadrature normalized to a unit-mass Gaussian.
//!
//! With nodes `x_i` and weights `w_i` from [`GaussHermite::new`],
//! `sum_i w_i f(x_i)` approximates `∫ f(x) exp(-x²) dx / √π`, exactly for
//! polynomials of degree up to `2n - 1`. The weights therefore sum to one.

use thiserror::Error;

use super::Real;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum QuadratureError {
    #[error("quadrature order must be at least 1")]
    ZeroOrder,
    #[error("Newton iteration for Hermite root {index} of order {order} did not converge")]
    NoConvergence { index: usize, order: usize },
}

#[derive(Debug, Clone, PartialEq)]
pub struct GaussHermite<T> {
    pub nodes: Vec<T>,
    pub weights: Vec<T>,
}

impl<T: Real> GaussHermite<T> {
    /// Nodes in ascending order, weights normalized to sum to one.
    pub fn new(order: usize) -> Result<Self, QuadratureError> {
        if order == 0 {
            return Err(QuadratureError::ZeroOrder);
        }
        let n = order;
        let nf = T::from_usize(n).unwrap();
        let two = T::lit(2.0);
        let pim4 = T::PI().powf(T::lit(-0.25));
        let m = n.div_ceil(2);
        let mut nodes = vec![T::zero(); n];
        let mut weights = vec![T::zero(); n];
        let eps = T::epsilon() * T::lit(16.0);
        let mut z = T::zero();

        for i in 0..m {
            // Initial guesses for the largest roots first, then use the spacing.
            z = match i {
                0 => {
                    (two * nf + T::one()).sqrt()
                        - T::lit(1.85575) * (two * nf + T::one()).powf(T::lit(-1.0 / 6.0))
                }
                1 => z - T::lit(1.14) * nf.powf(T::lit(0.426)) / z,
                2 => T::lit(1.86) * z - T::lit(0.86) * nodes[0],
                3 => T::lit(1.91) * z - T::lit(0.91) * nodes[1],
                _ => two * z - nodes[i - 2],
            };
            let mut pp = T::zero();
            let mut converged = false;
            for _ in 0..100 {
                let mut p1 = pim4;
                let mut p2 = T::zero();
                for j in 0..n {
                    let p3 = p2;
                    p2 = p1;
                    let jf = T::from_usize(j).unwrap();
                    p1 = z * (two / (jf + T::one())).sqrt() * p2
                        - (jf / (jf + T::one())).sqrt() * p3;
                }
                pp = (two * nf).sqrt() * p2;
                let z1 = z;
                z = z1 - p1 / pp;
                if (z - z1).abs() <= eps * z.abs().max(T::one()) {
                    converged = true;
                    break;
                }
            }
            if !converged {
                return Err(QuadratureError::NoConvergence { index: i, order: n });
            }
            nodes[i] = z;
            nodes[n - 1 - i] = -z;
            weights[i] = two / (pp * pp);
            weights[n - 1 - i] = weights[i];
        }
        if n % 2 == 1 {
            nodes[m - 1] = T::zero();
        }

        let norm = T::PI().sqrt();
        for w in &mut weights {
            *w = *w / norm;
        }
        nodes.reverse();
        weights.reverse();
        Ok(Self { nodes, weights })
    }

    pub fn order(&self) -> usize {
        self.nodes.len()
    }

    /// Weighted sum of `f` over the nodes.
    pub fn integrate<F: FnMut(T) -> T>(&self, mut f: F) -> T {
        self.nodes
            .iter()
            .zip(&self.weights)
            .fold(T::zero(), |acc, (&x, &w)| acc + w * f(x))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn double_factorial_odd(k: u32) -> f64 {
        (1..=k).filter(|j| j % 2 == 1).map(f64::from).product()
    }

    #[test]
    fn weights_sum_to_one() {
        for n in [1, 2, 5, 8, 16, 33, 64] {
            let q = GaussHermite::<f64>::new(n).unwrap();
            let s: f64 = q.weights.iter().sum();
            assert!((s - 1.0).abs() < 1e-12, "n={n} sum={s}");
        }
    }

    #[test]
    fn gaussian_moments_are_exact() {
        // E[x^{2k}] for density exp(-x²)/√π is (2k-1)!! / 2^k.
        let q = GaussHermite::<f64>::new(12).unwrap();
        for k in 0..12u32 {
            let got = q.integrate(|x| x.powi(2 * k as i32));
            let exact = if k == 0 {
                1.0
            } else {
                double_factorial_odd(2 * k - 1) / 2f64.powi(k as i32)
            };
            assert!(
                (got - exact).abs() <= 1e-11 * exact.max(1.0),
                "k={k} got={got} exact={exact}"
            );
            let odd = q.integrate(|x| x.powi(2 * k as i32 + 1));
            assert!(odd.abs() < 1e-10 * exact.max(1.0));
        }
    }

    #[test]
    fn nodes_are_symmetric_and_sorted() {
        let q = GaussHermite::<f64>::new(9).unwrap();
        for i in 0..9 {
            assert!((q.nodes[i] + q.nodes[8 - i]).abs() < 1e-13);
            assert_eq!(q.weights[i], q.weights[8 - i]);
        }
        assert!(q.nodes.windows(2).all(|w| w[0] < w[1]));
        assert_eq!(q.nodes[4], 0.0);
    }

    #[test]
    fn known_two_point_rule() {
        let q = GaussHermite::<f64>::new(2).unwrap();
        assert!((q.nodes[1] - 0.5f64.sqrt()).abs() < 1e-14);
        assert!((q.weights[0] - 0.5).abs() < 1e-14);
    }

    #[test]
    fn single_precision_rule() {
        let q = GaussHermite::<f32>::new(6).unwrap();
        let s: f32 = q.weights.iter().sum();
        assert!((s - 1.0).abs() < 1e-5);
    }

    #[test]
    fn zero_order_rejected() {
        assert_eq!(
            GaussHermite::<f64>::new(0).unwrap_err(),
            QuadratureError::ZeroOrder
        );
    }
}
