use crate::error::{Error, Result};

/// Nodes and weights of a Gauss rule, nodes in increasing order.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadratureRule {
    pub order: usize,
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl QuadratureRule {
    /// Applies the rule to `f`, i.e. `sum_i w_i f(x_i)`.
    pub fn integrate(&self, mut f: impl FnMut(f64) -> f64) -> f64 {
        self.nodes.iter().zip(&self.weights).map(|(&x, &w)| w * f(x)).sum()
    }
}

/// Physicists' Gauss–Hermite rule for the weight `exp(-t^2)`.
///
/// Nodes start from the eigenvalues of the Jacobi matrix (Golub–Welsch) and
/// are polished by Newton steps on the orthonormal Hermite recurrence. Weights
/// come from the recurrence rather than from eigenvectors, so the tiny weights
/// of the outermost nodes keep full relative accuracy.
pub fn gauss_hermite(order: usize) -> Result<QuadratureRule> {
    if order < 2 {
        return Err(Error::domain(format!("Gauss-Hermite order must be >= 2, got {order}")));
    }
    let n = order;
    let off: Vec<f64> = (1..n).map(|k| (k as f64 / 2.0).sqrt()).collect();
    let mut nodes = symmetric_tridiagonal_eigenvalues(vec![0.0; n], off)?;
    nodes.sort_by(|a, b| a.total_cmp(b));

    let mut weights = vec![0.0; n];
    for (node, weight) in nodes.iter_mut().zip(weights.iter_mut()) {
        let mut z = *node;
        let mut eval = hermite_orthonormal(n, z);
        for _ in 0..8 {
            let step = eval.value / eval.derivative;
            z -= step;
            eval = hermite_orthonormal(n, z);
            if step.abs() <= 1e-15 * z.abs().max(1.0) {
                break;
            }
        }
        *node = z;
        *weight = (2f64.ln() - 2.0 * (eval.derivative.abs().ln() + eval.ln_scale)).exp();
    }

    // exact symmetry
    for i in 0..n / 2 {
        let j = n - 1 - i;
        let x = 0.5 * (nodes[j] - nodes[i]);
        let w = 0.5 * (weights[i] + weights[j]);
        nodes[i] = -x;
        nodes[j] = x;
        weights[i] = w;
        weights[j] = w;
    }
    if n % 2 == 1 {
        nodes[n / 2] = 0.0;
    }

    Ok(QuadratureRule { order, nodes, weights })
}

struct HermiteEval {
    value: f64,
    derivative: f64,
    ln_scale: f64,
}

/// Orthonormal Hermite polynomial of degree `n` and its derivative at `z`,
/// both divided by `exp(ln_scale)`.
fn hermite_orthonormal(n: usize, z: f64) -> HermiteEval {
    const PIM4: f64 = 0.751_125_544_464_942_5; // pi^(-1/4)
    const RESCALE: f64 = 1e100;
    let mut p1 = PIM4;
    let mut p2 = 0.0;
    let mut ln_scale = 0.0;
    for j in 0..n {
        let p3 = p2;
        p2 = p1;
        let jf = j as f64;
        p1 = z * (2.0 / (jf + 1.0)).sqrt() * p2 - (jf / (jf + 1.0)).sqrt() * p3;
        if p1.abs() > RESCALE {
            p1 /= RESCALE;
            p2 /= RESCALE;
            ln_scale += RESCALE.ln();
        }
    }
    HermiteEval {
        value: p1,
        derivative: (2.0 * n as f64).sqrt() * p2,
        ln_scale,
    }
}

/// Eigenvalues of a symmetric tridiagonal matrix by implicit QL with shifts.
fn symmetric_tridiagonal_eigenvalues(mut d: Vec<f64>, off: Vec<f64>) -> Result<Vec<f64>> {
    let n = d.len();
    let mut e = off;
    e.push(0.0);
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
                return Err(Error::domain("tridiagonal eigenvalue iteration did not converge"));
            }
            let mut g = (d[l + 1] - d[l]) / (2.0 * e[l]);
            let mut r = g.hypot(1.0);
            g = d[m] - d[l] + e[l] / (g + r.copysign(g));
            let (mut s, mut c, mut p) = (1.0, 1.0, 0.0);
            let mut i = m;
            let mut underflow = false;
            while i > l {
                i -= 1;
                let f = s * e[i];
                let b = c * e[i];
                r = f.hypot(g);
                e[i + 1] = r;
                if r == 0.0 {
                    d[i + 1] -= p;
                    e[m] = 0.0;
                    underflow = true;
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
            if underflow {
                continue;
            }
            d[l] -= p;
            e[l] = g;
            e[m] = 0.0;
        }
    }
    Ok(d)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn order_two_closed_form() {
        let rule = gauss_hermite(2).unwrap();
        let r = std::f64::consts::FRAC_1_SQRT_2;
        assert!((rule.nodes[0] + r).abs() < 1e-14);
        assert!((rule.nodes[1] - r).abs() < 1e-14);
        for &wt in &rule.weights {
            assert!((wt - PI.sqrt() / 2.0).abs() < 1e-14);
        }
    }

    #[test]
    fn rejects_low_order() {
        assert!(gauss_hermite(1).is_err());
        assert!(gauss_hermite(0).is_err());
    }

    #[test]
    fn nodes_increasing_weights_positive() {
        for order in [2, 3, 7, 16, 32, 64, 128, 256] {
            let rule = gauss_hermite(order).unwrap();
            assert!(rule.nodes.windows(2).all(|p| p[0] < p[1]), "order {order}");
            assert!(rule.weights.iter().all(|&w| w > 0.0), "order {order}");
            let total: f64 = rule.weights.iter().sum();
            assert!((total - PI.sqrt()).abs() < 1e-12, "order {order}: {total}");
        }
    }

    #[test]
    fn exact_for_polynomials_up_to_degree_2k_minus_1() {
        // int t^(2m) e^{-t^2} = Gamma(m + 1/2), odd moments vanish
        for k in 2..=16 {
            let rule = gauss_hermite(k).unwrap();
            for deg in 0..(2 * k) {
                let got = rule.integrate(|t| t.powi(deg as i32));
                let expected = if deg % 2 == 1 {
                    0.0
                } else {
                    libm::tgamma(deg as f64 / 2.0 + 0.5)
                };
                let scale = rule.integrate(|t| t.powi(deg as i32).abs()).max(1.0);
                assert!((got - expected).abs() / scale < 1e-10, "k={k} deg={deg}: {got} vs {expected}");
            }
        }
        let rule = gauss_hermite(5).unwrap();
        let second = rule.integrate(|t| t * t);
        assert!((second - PI.sqrt() / 2.0).abs() < 1e-14);
    }
}
