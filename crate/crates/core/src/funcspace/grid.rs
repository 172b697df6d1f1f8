use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{CoreError, Result};

/// Sampled function with piecewise linear interpolation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridFunction {
    nodes: Vec<f64>,
    #[serde(with = "cx_vec")]
    values: Vec<Complex64>,
}

impl GridFunction {
    pub fn new(nodes: Vec<f64>, values: Vec<Complex64>) -> Result<Self> {
        if nodes.len() != values.len() {
            return Err(CoreError::DimensionMismatch {
                context: format!("{} nodes vs {} values", nodes.len(), values.len()),
            });
        }
        if nodes.len() < 2 {
            return Err(CoreError::InvalidInput(
                "grid needs at least two nodes".into(),
            ));
        }
        if !nodes.windows(2).all(|w| w[0] < w[1]) {
            return Err(CoreError::InvalidInput(
                "grid nodes must be strictly increasing".into(),
            ));
        }
        Ok(GridFunction { nodes, values })
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Piecewise linear evaluation; clamps outside the node range.
    pub fn eval(&self, x: f64) -> Complex64 {
        if x <= self.nodes[0] {
            return self.values[0];
        }
        if x >= *self.nodes.last().unwrap() {
            return *self.values.last().unwrap();
        }
        let idx = match self.nodes.binary_search_by(|n| n.total_cmp(&x)) {
            Ok(i) => return self.values[i],
            Err(i) => i,
        };
        let (x0, x1) = (self.nodes[idx - 1], self.nodes[idx]);
        let t = (x - x0) / (x1 - x0);
        self.values[idx - 1] * (1.0 - t) + self.values[idx] * t
    }

    /// Trapezoid rule for `integrand(x_j, f_j)` over the grid.
    pub fn integrate_trapezoid<F: Fn(f64, Complex64) -> f64>(&self, integrand: F) -> f64 {
        let mut acc = 0.0;
        for j in 1..self.nodes.len() {
            let h = self.nodes[j] - self.nodes[j - 1];
            let a = integrand(self.nodes[j - 1], self.values[j - 1]);
            let b = integrand(self.nodes[j], self.values[j]);
            acc += 0.5 * h * (a + b);
        }
        acc
    }

    /// Composite Simpson rule on a uniform grid (falls back to trapezoid on
    /// non-uniform grids or an even node count on the tail interval).
    pub fn integrate_simpson<F: Fn(f64, Complex64) -> f64>(&self, integrand: F) -> f64 {
        let n = self.nodes.len();
        let h = self.nodes[1] - self.nodes[0];
        let uniform = self
            .nodes
            .windows(2)
            .all(|w| ((w[1] - w[0]) - h).abs() <= 1e-12 * h.abs().max(1.0));
        if !uniform || n < 3 {
            return self.integrate_trapezoid(integrand);
        }
        let g = |j: usize| integrand(self.nodes[j], self.values[j]);
        let mut acc = 0.0;
        let mut j = 0;
        while j + 2 < n {
            acc += h / 3.0 * (g(j) + 4.0 * g(j + 1) + g(j + 2));
            j += 2;
        }
        if j + 1 < n {
            // one leftover cell: trapezoid
            acc += 0.5 * h * (g(j) + g(j + 1));
        }
        acc
    }
}

mod cx_vec {
    use num_complex::Complex64;
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    pub fn serialize<S: Serializer>(v: &[Complex64], s: S) -> std::result::Result<S::Ok, S::Error> {
        let pairs: Vec<[f64; 2]> = v.iter().map(|c| [c.re, c.im]).collect();
        pairs.serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(
        d: D,
    ) -> std::result::Result<Vec<Complex64>, D::Error> {
        let pairs = Vec::<[f64; 2]>::deserialize(d)?;
        Ok(pairs
            .into_iter()
            .map(|[re, im]| Complex64::new(re, im))
            .collect())
    }
}
