//! Quadrature rules on the unit interval.
//!
//! Abscissae are normalized (`0 <= xi <= 1`) and weights sum to one, so an
//! integral over an element of length `L` is `L * sum(w_r * f(xi_r * L))`.

use crate::error::FsdbError;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum QuadratureKind {
    GaussLobatto,
    GaussLegendre,
}

#[derive(Debug, Clone, PartialEq)]
pub struct QuadratureRule {
    pub kind: QuadratureKind,
    pub points: Vec<f64>,
    pub weights: Vec<f64>,
}

impl QuadratureRule {
    /// Gauss-Lobatto rule with `n >= 2` points; both end sections are
    /// integration points.
    pub fn gauss_lobatto(n: usize) -> Result<Self, FsdbError> {
        if n < 2 {
            return Err(FsdbError::InvalidInput(format!(
                "Gauss-Lobatto rule needs at least 2 points, got {n}"
            )));
        }
        let order = n - 1;
        let mut x: Vec<f64> = (0..n)
            .map(|i| (std::f64::consts::PI * i as f64 / order as f64).cos())
            .collect();
        let mut p_last = vec![0.0; n];
        for _ in 0..100 {
            let mut max_dx: f64 = 0.0;
            for (xi, pl) in x.iter_mut().zip(p_last.iter_mut()) {
                let (p_n, p_nm1) = legendre_pair(order, *xi);
                let dx = (*xi * p_n - p_nm1) / (n as f64 * p_n);
                *xi -= dx;
                *pl = p_n;
                max_dx = max_dx.max(dx.abs());
            }
            if max_dx < 1e-16 {
                break;
            }
        }
        for (xi, pl) in x.iter().zip(p_last.iter_mut()) {
            *pl = legendre_pair(order, *xi).0;
        }
        let mut pairs: Vec<(f64, f64)> = x
            .iter()
            .zip(&p_last)
            .map(|(&xi, &p)| {
                let w = 2.0 / (order as f64 * n as f64 * p * p);
                (0.5 * (1.0 + xi), 0.5 * w)
            })
            .collect();
        pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
        // pin the end points exactly
        pairs[0].0 = 0.0;
        pairs[n - 1].0 = 1.0;
        Ok(Self::from_pairs(QuadratureKind::GaussLobatto, pairs))
    }

    /// Gauss-Legendre rule with `n >= 1` interior points.
    pub fn gauss_legendre(n: usize) -> Result<Self, FsdbError> {
        if n < 1 {
            return Err(FsdbError::InvalidInput(
                "Gauss-Legendre rule needs at least 1 point".into(),
            ));
        }
        let mut pairs = Vec::with_capacity(n);
        for i in 1..=n {
            let mut x = (std::f64::consts::PI * (i as f64 - 0.25) / (n as f64 + 0.5)).cos();
            let mut dp = 0.0;
            for _ in 0..100 {
                let (p_n, p_nm1) = legendre_pair(n, x);
                dp = n as f64 * (x * p_n - p_nm1) / (x * x - 1.0);
                let dx = p_n / dp;
                x -= dx;
                if dx.abs() < 1e-16 {
                    break;
                }
            }
            let (p_n, p_nm1) = legendre_pair(n, x);
            if x * x != 1.0 {
                dp = n as f64 * (x * p_n - p_nm1) / (x * x - 1.0);
            }
            let w = 2.0 / ((1.0 - x * x) * dp * dp);
            pairs.push((0.5 * (1.0 + x), 0.5 * w));
        }
        pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
        Ok(Self::from_pairs(QuadratureKind::GaussLegendre, pairs))
    }

    fn from_pairs(kind: QuadratureKind, pairs: Vec<(f64, f64)>) -> Self {
        let (points, weights) = pairs.into_iter().unzip();
        Self {
            kind,
            points,
            weights,
        }
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Abscissae of the stiffness steps associated with each integration
    /// point: `x_i = L * sum_{j<i} w_j`.
    pub fn step_abscissae(&self, length: f64) -> Vec<f64> {
        let mut acc = 0.0;
        self.weights
            .iter()
            .map(|w| {
                let x = acc * length;
                acc += w;
                x
            })
            .collect()
    }

    /// Integrate `f` over `[0, length]`.
    pub fn integrate<F: Fn(f64) -> f64>(&self, length: f64, f: F) -> f64 {
        self.points
            .iter()
            .zip(&self.weights)
            .map(|(&xi, &w)| w * f(xi * length))
            .sum::<f64>()
            * length
    }
}

/// Returns `(P_n(x), P_{n-1}(x))` by the three-term recurrence.
fn legendre_pair(n: usize, x: f64) -> (f64, f64) {
    if n == 0 {
        return (1.0, 0.0);
    }
    let mut p_prev = 1.0;
    let mut p = x;
    for k in 2..=n {
        let kf = k as f64;
        let next = ((2.0 * kf - 1.0) * x * p - (kf - 1.0) * p_prev) / kf;
        p_prev = p;
        p = next;
    }
    (p, p_prev)
}
