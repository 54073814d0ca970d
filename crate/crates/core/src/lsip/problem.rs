use std::f64::consts::TAU;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{check_dim, Error, Result};
use crate::setmap::map::linspace;

/// Grid used to check continuity of a parametric index family.
const CONTINUITY_SAMPLES: usize = 4096;
/// Largest coefficient jump tolerated between neighbouring continuity samples.
const CONTINUITY_JUMP: f64 = 0.05;
/// Largest discretization count accepted.
pub const MAX_COUNT: usize = 1_000_000;

/// Curve `t ↦ a_t`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Curve {
    /// `(cos t, sin t)`, two-dimensional.
    Circle,
    /// `(1, t, ..., t^{n-1})`.
    Moment,
}

impl Curve {
    fn eval(self, n: usize, t: f64) -> Vec<f64> {
        match self {
            Curve::Circle => vec![t.cos(), t.sin()],
            Curve::Moment => (0..n).map(|k| t.powi(k as i32)).collect(),
        }
    }
}

/// Right-hand side `t ↦ b_t`, written `const:v` or `poly:c0,c1,...`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub enum Profile {
    Const(f64),
    Poly(Vec<f64>),
}

impl Profile {
    pub fn eval(&self, t: f64) -> f64 {
        match self {
            Profile::Const(v) => *v,
            Profile::Poly(c) => c.iter().rev().fold(0.0, |acc, ci| acc * t + ci),
        }
    }
}

impl FromStr for Profile {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::Problem(format!("right-hand side must be `const:v` or `poly:c0,c1,...`, got {s:?}"));
        let (kind, body) = s.split_once(':').ok_or_else(bad)?;
        let nums: Vec<f64> = body
            .split(',')
            .map(|v| v.trim().parse::<f64>().map_err(|_| bad()))
            .collect::<Result<_>>()?;
        if nums.iter().any(|v| !v.is_finite()) {
            return Err(bad());
        }
        match (kind.trim(), nums.as_slice()) {
            ("const", [v]) => Ok(Profile::Const(*v)),
            ("poly", c) if !c.is_empty() => Ok(Profile::Poly(c.to_vec())),
            _ => Err(bad()),
        }
    }
}

impl TryFrom<String> for Profile {
    type Error = Error;

    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

impl From<Profile> for String {
    fn from(p: Profile) -> String {
        match p {
            Profile::Const(v) => format!("const:{v}"),
            Profile::Poly(c) => {
                let parts: Vec<String> = c.iter().map(|v| v.to_string()).collect();
                format!("poly:{}", parts.join(","))
            }
        }
    }
}

/// Index family `t ↦ (a_t, b_t)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Family {
    Parametric {
        curve: Curve,
        b: Profile,
        range: [f64; 2],
    },
    Finite {
        rows: Vec<(Vec<f64>, f64)>,
    },
}

/// Linear semi-infinite problem `min ⟨c, x⟩` subject to `⟨a_t, x⟩ <= b_t`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LsipProblem {
    pub n: usize,
    pub c: Vec<f64>,
    pub family: Family,
    /// Discretization count for parametric families.
    #[serde(rename = "N", default = "default_count")]
    pub count: usize,
    /// Optional base point; defaults to the LP solution.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub xbar: Option<Vec<f64>>,
}

fn default_count() -> usize {
    720
}

impl LsipProblem {
    /// Parses and validates a problem from JSON text.
    pub fn from_json(text: &str) -> Result<Self> {
        let p: LsipProblem = serde_json::from_str(text)?;
        p.validate()?;
        Ok(p)
    }

    /// The unit-disc fixture: `min x₁` over `cos t·x₁ + sin t·x₂ <= 1`.
    pub fn semicircle(count: usize) -> Self {
        LsipProblem {
            n: 2,
            c: vec![1.0, 0.0],
            family: Family::Parametric {
                curve: Curve::Circle,
                b: Profile::Const(1.0),
                range: [0.0, TAU],
            },
            count,
            xbar: None,
        }
    }

    pub fn finite(c: Vec<f64>, rows: Vec<(Vec<f64>, f64)>) -> Result<Self> {
        let p = LsipProblem {
            n: c.len(),
            c,
            family: Family::Finite { rows },
            count: default_count(),
            xbar: None,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if self.n == 0 {
            return Err(Error::Problem("dimension must be positive".into()));
        }
        check_dim(self.n, self.c.len())?;
        if self.c.iter().any(|v| !v.is_finite()) {
            return Err(Error::Problem("cost vector must be finite".into()));
        }
        if let Some(x) = &self.xbar {
            check_dim(self.n, x.len())?;
        }
        match &self.family {
            Family::Finite { rows } => {
                for (a, b) in rows {
                    check_dim(self.n, a.len())?;
                    if !b.is_finite() || a.iter().any(|v| !v.is_finite()) {
                        return Err(Error::Problem("constraint data must be finite".into()));
                    }
                }
            }
            Family::Parametric { curve, range, .. } => {
                if *curve == Curve::Circle && self.n != 2 {
                    return Err(Error::Problem("the circle curve lives in two dimensions".into()));
                }
                if !(range[0].is_finite() && range[1].is_finite() && range[0] < range[1]) {
                    return Err(Error::Problem("parameter range must be a finite nonempty interval".into()));
                }
                if !(2..=MAX_COUNT).contains(&self.count) {
                    return Err(Error::usage(format!(
                        "discretization count must lie in [2, {MAX_COUNT}], got {}",
                        self.count
                    )));
                }
                self.check_continuity()?;
            }
        }
        Ok(())
    }

    fn check_continuity(&self) -> Result<()> {
        let Family::Parametric { curve, b, range } = &self.family else {
            return Ok(());
        };
        let mut prev: Option<Vec<f64>> = None;
        for t in linspace(range[0], range[1], CONTINUITY_SAMPLES) {
            let mut v = curve.eval(self.n, t);
            v.push(b.eval(t));
            if v.iter().any(|x| !x.is_finite()) {
                return Err(Error::Problem(format!("index family is not finite at t = {t}")));
            }
            if let Some(p) = &prev {
                let jump = p.iter().zip(&v).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max);
                if jump > CONTINUITY_JUMP {
                    return Err(Error::Problem(format!(
                        "index family jumps by {jump:.3} near t = {t}; refine the range or rescale"
                    )));
                }
            }
            prev = Some(v);
        }
        Ok(())
    }

    /// `N` uniformly spaced indices with both endpoints; finite families are
    /// passed through.
    pub fn discretize(&self, count: usize) -> Result<DiscreteProblem> {
        match &self.family {
            Family::Finite { rows } => Ok(DiscreteProblem {
                n: self.n,
                c: self.c.clone(),
                a: rows.iter().map(|r| r.0.clone()).collect(),
                b: rows.iter().map(|r| r.1).collect(),
                params: (0..rows.len()).map(|i| i as f64).collect(),
                spacing: 0.0,
                parametric: false,
            }),
            Family::Parametric { curve, b, range } => {
                if !(2..=MAX_COUNT).contains(&count) {
                    return Err(Error::usage(format!("discretization count must lie in [2, {MAX_COUNT}], got {count}")));
                }
                let params = linspace(range[0], range[1], count);
                let a: Vec<Vec<f64>> = params.iter().map(|&t| curve.eval(self.n, t)).collect();
                let spacing = a
                    .windows(2)
                    .map(|w| w[0].iter().zip(&w[1]).map(|(x, y)| (x - y).powi(2)).sum::<f64>().sqrt())
                    .fold(0.0, f64::max);
                Ok(DiscreteProblem {
                    n: self.n,
                    c: self.c.clone(),
                    b: params.iter().map(|&t| b.eval(t)).collect(),
                    a,
                    params,
                    spacing,
                    parametric: true,
                })
            }
        }
    }

    pub fn discretized(&self) -> Result<DiscreteProblem> {
        self.discretize(self.count)
    }
}

/// Finite LP obtained from an [`LsipProblem`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiscreteProblem {
    pub n: usize,
    pub c: Vec<f64>,
    pub a: Vec<Vec<f64>>,
    pub b: Vec<f64>,
    /// Parameter value of each row (row index for finite families).
    pub params: Vec<f64>,
    /// Largest distance between consecutive `a_t`; zero for finite families.
    pub spacing: f64,
    pub parametric: bool,
}

impl DiscreteProblem {
    pub fn len(&self) -> usize {
        self.a.len()
    }

    pub fn is_empty(&self) -> bool {
        self.a.is_empty()
    }

    pub fn with_b(&self, b: Vec<f64>) -> Result<DiscreteProblem> {
        check_dim(self.len(), b.len())?;
        Ok(DiscreteProblem { b, ..self.clone() })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn five_point_circle() {
        let d = LsipProblem::semicircle(720).discretize(5).unwrap();
        let expect = [0.0, PI / 2.0, PI, 1.5 * PI, 2.0 * PI];
        for (t, e) in d.params.iter().zip(expect) {
            assert!((t - e).abs() < 1e-15);
        }
        assert!(matches!(LsipProblem::semicircle(720).discretize(1), Err(Error::Usage(_))));
    }

    #[test]
    fn finite_passes_through() {
        let p = LsipProblem::finite(vec![1.0], vec![(vec![-1.0], 0.0)]).unwrap();
        let d = p.discretize(3).unwrap();
        assert_eq!((d.a.clone(), d.b.clone()), (vec![vec![-1.0]], vec![0.0]));
    }

    #[test]
    fn json_round_trip() {
        let text = r#"{"n":2, "c":[1,0], "family":{"kind":"parametric","curve":"circle","b":"const:1","range":[0,6.283185307179586]}, "N":720}"#;
        let p = LsipProblem::from_json(text).unwrap();
        assert_eq!(p, LsipProblem::semicircle(720));
        let back = serde_json::to_string(&p).unwrap();
        assert_eq!(LsipProblem::from_json(&back).unwrap(), p);
        let fin = r#"{"n":1, "c":[1], "family":{"kind":"finite","rows":[[[-1],0]]}}"#;
        assert!(LsipProblem::from_json(fin).is_ok());
    }

    #[test]
    fn rejects_discontinuous_or_malformed() {
        let jumpy = r#"{"n":2,"c":[1,0],"family":{"kind":"parametric","curve":"circle","b":"poly:0,1000","range":[0,6.28]}}"#;
        assert!(matches!(LsipProblem::from_json(jumpy), Err(Error::Problem(_))));
        assert!(matches!(LsipProblem::from_json("{\"n\":"), Err(Error::Json { .. })));
        assert!("poly:".parse::<Profile>().is_err());
        assert_eq!("poly:1,2".parse::<Profile>().unwrap().eval(3.0), 7.0);
    }
}
