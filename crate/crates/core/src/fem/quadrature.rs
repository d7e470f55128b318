//! Quadrature on reference simplices.
//!
//! Rules of arbitrary order come from Gauss–Legendre tensor rules mapped
//! onto the simplex by the collapsed (Duffy) transform. Points are returned
//! in barycentric coordinates and the weights sum to the reference measure
//! `1/s!` for an `s`-dimensional simplex.

/// Quadrature rule on the reference `s`-simplex.
#[derive(Debug, Clone)]
pub struct QuadratureRule {
    pub simplex_dim: usize,
    /// Barycentric coordinates; entries past `simplex_dim + 1` are zero.
    pub points: Vec<[f64; 4]>,
    pub weights: Vec<f64>,
    /// Polynomials of total degree up to `order` are integrated exactly.
    pub order: usize,
}

/// Gauss–Legendre nodes and weights on [0, 1].
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut nodes = Vec::with_capacity(n);
    let mut weights = Vec::with_capacity(n);
    for i in 0..n {
        // Tricomi initial guess, then Newton on P_n.
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, x);
            for k in 2..=n {
                let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            let pn = if n == 0 { 1.0 } else if n == 1 { x } else { p1 };
            let pn1 = if n == 1 { 1.0 } else { p0 };
            dp = n as f64 * (x * pn - pn1) / (x * x - 1.0);
            let dx = pn / dp;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes.push(0.5 * (1.0 - x));
        weights.push(0.5 * w);
    }
    (nodes, weights)
}

impl QuadratureRule {
    /// Rule exact for total degree `order` on the `simplex_dim`-simplex (1, 2 or 3).
    pub fn new(simplex_dim: usize, order: usize) -> QuadratureRule {
        assert!((1..=3).contains(&simplex_dim), "simplex dimension must be 1, 2 or 3");
        if order <= 1 {
            let c = 1.0 / (simplex_dim + 1) as f64;
            let mut point = [0.0; 4];
            point[..=simplex_dim].iter_mut().for_each(|v| *v = c);
            let measure = 1.0 / factorial(simplex_dim);
            return QuadratureRule { simplex_dim, points: vec![point], weights: vec![measure], order: 1 };
        }
        let mut points = Vec::new();
        let mut weights = Vec::new();
        match simplex_dim {
            1 => {
                let (x, w) = gauss_legendre(order / 2 + 1);
                for (xi, wi) in x.iter().zip(&w) {
                    points.push([1.0 - xi, *xi, 0.0, 0.0]);
                    weights.push(*wi);
                }
            }
            2 => {
                let (u, wu) = gauss_legendre((order + 1) / 2 + 1);
                let (v, wv) = gauss_legendre(order / 2 + 1);
                for (ui, wui) in u.iter().zip(&wu) {
                    for (vj, wvj) in v.iter().zip(&wv) {
                        let x = *ui;
                        let y = (1.0 - ui) * vj;
                        points.push([1.0 - x - y, x, y, 0.0]);
                        weights.push(wui * wvj * (1.0 - ui));
                    }
                }
            }
            _ => {
                let (u, wu) = gauss_legendre((order + 2) / 2 + 1);
                let (v, wv) = gauss_legendre((order + 1) / 2 + 1);
                let (s, ws) = gauss_legendre(order / 2 + 1);
                for (ui, wui) in u.iter().zip(&wu) {
                    for (vj, wvj) in v.iter().zip(&wv) {
                        for (sk, wsk) in s.iter().zip(&ws) {
                            let x = *ui;
                            let y = (1.0 - ui) * vj;
                            let z = (1.0 - ui) * (1.0 - vj) * sk;
                            points.push([1.0 - x - y - z, x, y, z]);
                            weights.push(wui * wvj * wsk * (1.0 - ui) * (1.0 - ui) * (1.0 - vj));
                        }
                    }
                }
            }
        }
        QuadratureRule { simplex_dim, points, weights, order }
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }
}

pub(crate) fn factorial(n: usize) -> f64 {
    (1..=n).map(|k| k as f64).product()
}

#[cfg(test)]
mod tests {
    use super::*;

    /// ∫ over the reference simplex of Π λ_i^{a_i} = Π a_i! · s! / (Σa + s)! · (1/s!)
    fn exact_monomial(exponents: &[usize]) -> f64 {
        let s = exponents.len() - 1;
        let total: usize = exponents.iter().sum();
        exponents.iter().map(|&a| factorial(a)).product::<f64>() / factorial(total + s)
    }

    fn exponent_tuples(parts: usize, max_total: usize) -> Vec<Vec<usize>> {
        if parts == 1 {
            return (0..=max_total).map(|a| vec![a]).collect();
        }
        let mut out = Vec::new();
        for a in 0..=max_total {
            for mut rest in exponent_tuples(parts - 1, max_total - a) {
                rest.insert(0, a);
                out.push(rest);
            }
        }
        out
    }

    #[test]
    fn weights_sum_to_reference_measure() {
        for s in 1..=3 {
            for order in 0..=8 {
                let rule = QuadratureRule::new(s, order);
                let sum: f64 = rule.weights.iter().sum();
                assert!((sum - 1.0 / factorial(s)).abs() < 1e-15, "s={s} order={order}");
                assert!(rule.weights.iter().all(|&w| w > 0.0));
            }
        }
    }

    #[test]
    fn monomials_integrated_exactly_up_to_order() {
        for s in 1..=3 {
            for order in 0..=7 {
                let rule = QuadratureRule::new(s, order);
                for exps in exponent_tuples(s + 1, rule.order) {
                    let approx: f64 = rule
                        .points
                        .iter()
                        .zip(&rule.weights)
                        .map(|(p, w)| w * exps.iter().enumerate().map(|(i, &a)| p[i].powi(a as i32)).product::<f64>())
                        .sum();
                    let exact = exact_monomial(&exps);
                    assert!((approx - exact).abs() < 1e-13, "s={s} order={order} exps={exps:?}");
                }
            }
        }
    }
}
