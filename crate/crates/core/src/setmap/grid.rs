use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::setmap::func::norm;

/// How the unit directions of a [`DirectionGrid`] were generated.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GridScheme {
    Pair,
    Angular,
    Fibonacci,
    RandomSeeded,
}

/// Finite set of unit vectors standing in for the unit sphere.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DirectionGrid {
    n: usize,
    scheme: GridScheme,
    points: Vec<Vec<f64>>,
}

pub const DEFAULT_ANGULAR_COUNT: usize = 360;
pub const DEFAULT_FIBONACCI_COUNT: usize = 2000;

impl DirectionGrid {
    /// Deterministic grid for `1 <= n <= 3`.
    pub fn new(n: usize, m: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::usage("direction grid dimension must be positive"));
        }
        if m < 2 {
            return Err(Error::usage(format!("direction grid needs at least 2 points, got {m}")));
        }
        let (scheme, points) = match n {
            1 => (GridScheme::Pair, vec![vec![-1.0], vec![1.0]]),
            2 => (GridScheme::Angular, (0..m).map(|k| angular(k, m)).collect()),
            3 => (GridScheme::Fibonacci, fibonacci(m)),
            _ => return Err(Error::UnsupportedDimension(n)),
        };
        Ok(DirectionGrid { n, scheme, points })
    }

    /// Grid with the default size for the dimension.
    pub fn default_for(n: usize) -> Result<Self> {
        let m = match n {
            2 => DEFAULT_ANGULAR_COUNT,
            _ => DEFAULT_FIBONACCI_COUNT,
        };
        DirectionGrid::new(n, m)
    }

    /// Seeded random directions, the explicit override for `n > 3`.
    pub fn random(n: usize, m: usize, seed: u64) -> Result<Self> {
        if n == 0 || m < 2 {
            return Err(Error::usage("random grid needs n >= 1 and at least 2 points"));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut points = Vec::with_capacity(m);
        while points.len() < m {
            // Box-Muller normals give rotation-invariant directions.
            let v: Vec<f64> = (0..n)
                .map(|_| {
                    let u1: f64 = rng.gen_range(f64::EPSILON..1.0);
                    let u2: f64 = rng.gen();
                    (-2.0 * u1.ln()).sqrt() * (std::f64::consts::TAU * u2).cos()
                })
                .collect();
            let r = norm(&v);
            if r > 1e-12 {
                points.push(v.iter().map(|x| x / r).collect());
            }
        }
        Ok(DirectionGrid {
            n,
            scheme: GridScheme::RandomSeeded,
            points,
        })
    }

    /// Deterministic grid when `n <= 3`, else the seeded override if allowed.
    pub fn for_dimension(n: usize, m: Option<usize>, high_dim_seed: Option<u64>) -> Result<Self> {
        match (n, high_dim_seed) {
            (1..=3, _) => match m {
                Some(m) => DirectionGrid::new(n, m),
                None => DirectionGrid::default_for(n),
            },
            (_, Some(seed)) => DirectionGrid::random(n, m.unwrap_or(DEFAULT_FIBONACCI_COUNT), seed),
            _ => Err(Error::UnsupportedDimension(n)),
        }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn scheme(&self) -> GridScheme {
        self.scheme
    }

    pub fn points(&self) -> &[Vec<f64>] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
}

fn angular(k: usize, m: usize) -> Vec<f64> {
    // Exact axis points keep quarter turns free of roundoff.
    if (4 * k) % m == 0 {
        return match 4 * k / m {
            0 => vec![1.0, 0.0],
            1 => vec![0.0, 1.0],
            2 => vec![-1.0, 0.0],
            _ => vec![0.0, -1.0],
        };
    }
    let a = std::f64::consts::TAU * k as f64 / m as f64;
    vec![a.cos(), a.sin()]
}

fn fibonacci(m: usize) -> Vec<Vec<f64>> {
    let golden = std::f64::consts::PI * (3.0 - 5f64.sqrt());
    (0..m)
        .map(|i| {
            let z = 1.0 - (2.0 * i as f64 + 1.0) / m as f64;
            let r = (1.0 - z * z).sqrt();
            let phi = golden * i as f64;
            let v = [r * phi.cos(), r * phi.sin(), z];
            let s = norm(&v);
            v.iter().map(|x| x / s).collect()
        })
        .collect()
}
