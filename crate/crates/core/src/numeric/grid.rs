use num_rational::BigRational;

use super::NumericError;
use crate::reduction::DomainSpec;
use crate::symbolic::{rational_to_f64, Expr, Symbol};

/// Uniform partition of `[z_min, z_max]` with `n ≥ 3` nodes.
#[derive(Debug, Clone, PartialEq)]
pub struct Grid {
    z_values: Vec<f64>,
    dz: f64,
}

impl Grid {
    pub fn new(z_min: f64, z_max: f64, n: usize) -> Result<Self, NumericError> {
        if n < 3 || !(z_min < z_max) {
            return Err(NumericError::InvalidGrid(format!(
                "need at least 3 nodes on a nonempty interval, got {n} on [{z_min}, {z_max}]"
            )));
        }
        let dz = (z_max - z_min) / (n - 1) as f64;
        let mut z_values: Vec<f64> = (0..n).map(|i| z_min + i as f64 * dz).collect();
        z_values[n - 1] = z_max;
        Ok(Self { z_values, dz })
    }

    pub fn over(domain: &DomainSpec, n: usize) -> Result<Self, NumericError> {
        Self::new(rational_to_f64(domain.z_min()), rational_to_f64(domain.z_max()), n)
    }

    pub fn n(&self) -> usize {
        self.z_values.len()
    }

    pub fn dz(&self) -> f64 {
        self.dz
    }

    pub fn z_values(&self) -> &[f64] {
        &self.z_values
    }

    pub fn z(&self, i: usize) -> f64 {
        self.z_values[i]
    }

    /// Index of the node at `z`, if `z` coincides with a node.
    pub fn node_at(&self, z: &BigRational) -> Option<usize> {
        let z = rational_to_f64(z);
        let pos = (z - self.z_values[0]) / self.dz;
        let i = pos.round();
        if i < 0.0 || i as usize >= self.n() || (pos - i).abs() > 1e-9 {
            return None;
        }
        Some(i as usize)
    }

    pub fn is_boundary(&self, i: usize) -> bool {
        i == 0 || i + 1 == self.n()
    }
}

/// Nodal values `x^α(z_i)` at one time.
#[derive(Debug, Clone, PartialEq)]
pub struct FieldState {
    /// `values[α][i]`.
    pub values: Vec<Vec<f64>>,
    pub time: f64,
}

impl FieldState {
    pub fn new(values: Vec<Vec<f64>>, time: f64) -> Self {
        Self { values, time }
    }

    /// Sample one profile per dependent variable; profiles are expressions
    /// in `z` (and optionally `t`).
    pub fn from_profiles(profiles: &[Expr], grid: &Grid, time: f64) -> Result<Self, NumericError> {
        let mut values = Vec::with_capacity(profiles.len());
        for p in profiles {
            if let Some(c) = p.jet_coordinates().into_iter().next() {
                return Err(NumericError::Unsupported(format!(
                    "initial profile depends on the dependent variable {c:?}"
                )));
            }
            let col = grid
                .z_values()
                .iter()
                .map(|&z| {
                    p.eval_f64(&|s| match s {
                        Symbol::Z => z,
                        Symbol::T => time,
                        Symbol::Jet(_) => f64::NAN,
                    })
                })
                .collect();
            values.push(col);
        }
        Ok(Self { values, time })
    }

    pub fn n(&self) -> usize {
        self.values.first().map_or(0, Vec::len)
    }

    pub fn max_norm(&self) -> f64 {
        self.values
            .iter()
            .flatten()
            .fold(0.0_f64, |m, v| m.max(v.abs()))
    }

    pub fn max_distance(&self, other: &FieldState) -> f64 {
        self.values
            .iter()
            .zip(&other.values)
            .flat_map(|(a, b)| a.iter().zip(b).map(|(x, y)| (x - y).abs()))
            .fold(0.0_f64, f64::max)
    }

    pub fn is_finite(&self) -> bool {
        self.values.iter().flatten().all(|v| v.is_finite())
    }
}

/// First-derivative stencil choice.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Difference {
    /// First-order `(u[i+1] − u[i]) / dz`; backward at the right end.
    Forward,
    /// First-order `(u[i] − u[i−1]) / dz`; forward at the left end.
    Backward,
    /// Second-order central, one-sided second-order at the ends.
    Central,
}

pub fn first_derivative(u: &[f64], i: usize, dz: f64, mode: Difference) -> f64 {
    let n = u.len();
    match mode {
        Difference::Forward if i + 1 < n => (u[i + 1] - u[i]) / dz,
        Difference::Forward => (u[i] - u[i - 1]) / dz,
        Difference::Backward if i > 0 => (u[i] - u[i - 1]) / dz,
        Difference::Backward => (u[i + 1] - u[i]) / dz,
        Difference::Central => {
            if i == 0 {
                (-3.0 * u[0] + 4.0 * u[1] - u[2]) / (2.0 * dz)
            } else if i + 1 == n {
                (3.0 * u[n - 1] - 4.0 * u[n - 2] + u[n - 3]) / (2.0 * dz)
            } else {
                (u[i + 1] - u[i - 1]) / (2.0 * dz)
            }
        }
    }
}

pub fn second_derivative(u: &[f64], i: usize, dz: f64) -> f64 {
    let n = u.len();
    let h2 = dz * dz;
    if i == 0 {
        if n >= 4 {
            (2.0 * u[0] - 5.0 * u[1] + 4.0 * u[2] - u[3]) / h2
        } else {
            (u[0] - 2.0 * u[1] + u[2]) / h2
        }
    } else if i + 1 == n {
        if n >= 4 {
            (2.0 * u[n - 1] - 5.0 * u[n - 2] + 4.0 * u[n - 3] - u[n - 4]) / h2
        } else {
            (u[n - 1] - 2.0 * u[n - 2] + u[n - 3]) / h2
        }
    } else {
        (u[i + 1] - 2.0 * u[i] + u[i - 1]) / h2
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_spacing_and_nodes() {
        let g = Grid::new(0.0, 1.0, 101).unwrap();
        assert!((g.dz() - 0.01).abs() < 1e-15);
        assert_eq!(g.z(100), 1.0);
        assert_eq!(g.node_at(&BigRational::new(1.into(), 2.into())), Some(50));
        assert_eq!(g.node_at(&BigRational::new(1.into(), 3.into())), None);
        assert!(Grid::new(0.0, 1.0, 2).is_err());
        assert!(Grid::new(1.0, 1.0, 5).is_err());
    }

    #[test]
    fn stencils_are_exact_on_quadratics() {
        let g = Grid::new(0.0, 1.0, 11).unwrap();
        let u: Vec<f64> = g.z_values().iter().map(|z| 3.0 * z * z - z + 2.0).collect();
        for i in 0..g.n() {
            let z = g.z(i);
            assert!((first_derivative(&u, i, g.dz(), Difference::Central) - (6.0 * z - 1.0)).abs() < 1e-10);
            assert!((second_derivative(&u, i, g.dz()) - 6.0).abs() < 1e-8);
        }
        // first-order one-sided differences are exact on lines
        let v: Vec<f64> = g.z_values().iter().map(|z| 1.0 - 0.5 * z).collect();
        for i in 0..g.n() {
            for m in [Difference::Forward, Difference::Backward] {
                assert!((first_derivative(&v, i, g.dz(), m) + 0.5).abs() < 1e-12);
            }
        }
    }
}
