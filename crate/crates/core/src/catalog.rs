//! Problem definitions in JSON and the built-in fixture catalogs.

use std::path::Path;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::error::{Error, Result};
use crate::moduli::SubdiffOracle;
use crate::penalty::{PenaltyProblem, PowerConvention};
use crate::setmap::{invert_map, make_epigraph_map, Bounds, ScalarFn, SetRepr, SetValuedMap, VectorFn};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ProblemKind {
    Function,
    Map,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Family {
    Power,
    Abs,
    MaxAffine,
    Norm,
    Epigraph,
    Subdiff,
    ExplicitGraph,
}

impl Family {
    pub fn kind(self) -> ProblemKind {
        match self {
            Family::Power | Family::Abs | Family::MaxAffine | Family::Norm => ProblemKind::Function,
            Family::Epigraph | Family::Subdiff | Family::ExplicitGraph => ProblemKind::Map,
        }
    }
}

/// Top-level problem file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemSpec {
    pub kind: ProblemKind,
    pub family: Family,
    #[serde(default = "empty_params")]
    pub params: Value,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub xbar: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ybar: Option<Vec<f64>>,
    /// Replace a map by its inverse, swapping the base point.
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    pub invert: bool,
}

/// Nested function reference used inside map and penalty definitions.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FunctionSpec {
    pub family: Family,
    #[serde(default = "empty_params")]
    pub params: Value,
}

fn empty_params() -> Value {
    Value::Object(Default::default())
}

fn one() -> f64 {
    1.0
}

fn one_usize() -> usize {
    1
}

fn unit_half_width() -> f64 {
    1.0
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
struct PowerParams {
    exponent: f64,
    #[serde(default = "one")]
    coef: f64,
    #[serde(default = "abs_power")]
    convention: PowerConvention,
    #[serde(default = "one_usize")]
    dim: usize,
}

fn abs_power() -> PowerConvention {
    PowerConvention::AbsPower
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
struct AbsParams {
    #[serde(default = "one")]
    coef: f64,
    #[serde(default = "one_usize")]
    dim: usize,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
struct MaxAffineParams {
    pieces: Vec<(Vec<f64>, f64)>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
struct NormParams {
    dim: usize,
    /// `1`, `2`, or `"inf"`.
    #[serde(default = "two")]
    order: NormOrder,
    #[serde(default = "one")]
    coef: f64,
    #[serde(default = "one")]
    power: f64,
}

fn two() -> NormOrder {
    NormOrder::Finite(2.0)
}

#[derive(Debug, Clone, Copy, PartialEq, Deserialize)]
#[serde(untagged)]
enum NormOrder {
    Finite(f64),
    Named(InfName),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "snake_case")]
enum InfName {
    Inf,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
struct EpigraphParams {
    of: FunctionSpec,
    #[serde(default = "unit_half_width")]
    half_width: f64,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
struct SubdiffParams {
    of: FunctionSpec,
    #[serde(default = "default_subdiff_domain")]
    domain: (f64, f64),
}

fn default_subdiff_domain() -> (f64, f64) {
    (-1.0, 1.0)
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
struct ExplicitGraphParams {
    lower: FunctionSpec,
    /// Absent means `+∞`.
    #[serde(default)]
    upper: Option<FunctionSpec>,
    /// Image is the single point `lower(x)`.
    #[serde(default)]
    single_valued: bool,
    #[serde(default = "unit_half_width")]
    half_width: f64,
}

fn params<T: for<'de> Deserialize<'de>>(family: Family, v: &Value) -> Result<T> {
    serde_json::from_value(v.clone()).map_err(|e| Error::Problem(format!("params of {}: {e}", family_name(family))))
}

fn family_name(f: Family) -> String {
    serde_json::to_value(f)
        .ok()
        .and_then(|v| v.as_str().map(str::to_owned))
        .unwrap_or_default()
}

fn positive(name: &str, v: f64) -> Result<f64> {
    if v.is_finite() && v > 0.0 {
        Ok(v)
    } else {
        Err(Error::Problem(format!("{name} must be positive and finite, got {v}")))
    }
}

type IntervalFn = Box<dyn Fn(f64) -> (f64, f64) + Send + Sync>;

/// Largest input dimension a problem file may declare.
pub const MAX_DIM: usize = 16;

fn nonzero_dim(dim: usize) -> Result<usize> {
    if dim == 0 {
        Err(Error::Problem("dimension must be at least 1".into()))
    } else if dim > MAX_DIM {
        Err(Error::Problem(format!("dimension {dim} exceeds the supported maximum {MAX_DIM}")))
    } else {
        Ok(dim)
    }
}

/// A parsed function family with the closed forms the catalog uses.
#[derive(Debug, Clone, PartialEq)]
pub enum FunctionDef {
    /// `coef Σ pow(x_i)` under the chosen convention.
    Power {
        coef: f64,
        exponent: f64,
        convention: PowerConvention,
        dim: usize,
    },
    /// `coef Σ |x_i|`.
    Abs { coef: f64, dim: usize },
    /// `max_j ⟨a_j, x⟩ + b_j`.
    MaxAffine { pieces: Vec<(Vec<f64>, f64)> },
    /// `coef ‖x‖_order^power`; an infinite order is the max norm.
    Norm { dim: usize, order: f64, coef: f64, power: f64 },
}

impl FunctionDef {
    pub fn parse(spec: &FunctionSpec) -> Result<Self> {
        let def = match spec.family {
            Family::Power => {
                let p: PowerParams = params(spec.family, &spec.params)?;
                if !p.coef.is_finite() {
                    return Err(Error::Problem("coef must be finite".into()));
                }
                FunctionDef::Power {
                    coef: p.coef,
                    exponent: positive("exponent", p.exponent)?,
                    convention: p.convention,
                    dim: nonzero_dim(p.dim)?,
                }
            }
            Family::Abs => {
                let p: AbsParams = params(spec.family, &spec.params)?;
                if !p.coef.is_finite() {
                    return Err(Error::Problem("coef must be finite".into()));
                }
                FunctionDef::Abs {
                    coef: p.coef,
                    dim: nonzero_dim(p.dim)?,
                }
            }
            Family::MaxAffine => {
                let p: MaxAffineParams = params(spec.family, &spec.params)?;
                let dim = p.pieces.first().map(|(a, _)| a.len()).ok_or_else(|| Error::Problem("max_affine needs at least one piece".into()))?;
                nonzero_dim(dim)?;
                if p.pieces.iter().any(|(a, b)| a.len() != dim || !b.is_finite() || a.iter().any(|v| !v.is_finite())) {
                    return Err(Error::Problem("max_affine pieces must share a dimension and be finite".into()));
                }
                FunctionDef::MaxAffine { pieces: p.pieces }
            }
            Family::Norm => {
                let p: NormParams = params(spec.family, &spec.params)?;
                let order = match p.order {
                    NormOrder::Finite(o) if o >= 1.0 && o.is_finite() => o,
                    NormOrder::Named(InfName::Inf) => f64::INFINITY,
                    NormOrder::Finite(o) => return Err(Error::Problem(format!("norm order must be at least 1, got {o}"))),
                };
                FunctionDef::Norm {
                    dim: nonzero_dim(p.dim)?,
                    order,
                    coef: positive("coef", p.coef)?,
                    power: positive("power", p.power)?,
                }
            }
            other => {
                return Err(Error::Problem(format!("{} is a map family, not a function", family_name(other))));
            }
        };
        Ok(def)
    }

    pub fn dim(&self) -> usize {
        match self {
            FunctionDef::Power { dim, .. } | FunctionDef::Abs { dim, .. } | FunctionDef::Norm { dim, .. } => *dim,
            FunctionDef::MaxAffine { pieces } => pieces[0].0.len(),
        }
    }

    pub fn build(&self) -> ScalarFn {
        let n = self.dim();
        match self.clone() {
            FunctionDef::Power {
                coef,
                exponent,
                convention,
                ..
            } => {
                let pow = convention.power(exponent);
                ScalarFn::new(n, move |x| {
                    let mut s = 0.0;
                    for &xi in x {
                        s += pow.eval(&[xi]);
                    }
                    if s.is_infinite() {
                        s
                    } else {
                        coef * s
                    }
                })
            }
            FunctionDef::Abs { coef, .. } => ScalarFn::new(n, move |x| coef * x.iter().map(|v| v.abs()).sum::<f64>()),
            FunctionDef::MaxAffine { pieces } => ScalarFn::new(n, move |x| {
                pieces
                    .iter()
                    .map(|(a, b)| a.iter().zip(x).map(|(ai, xi)| ai * xi).sum::<f64>() + b)
                    .fold(f64::NEG_INFINITY, f64::max)
            }),
            FunctionDef::Norm { order, coef, power, .. } => ScalarFn::new(n, move |x| coef * p_norm(x, order).powf(power)),
        }
    }

    /// `[f'_-(x), f'_+(x)]` in closed form for one-dimensional convex members.
    fn subdifferential_1d(&self) -> Option<IntervalFn> {
        if self.dim() != 1 {
            return None;
        }
        let kink = |c: f64| -> Box<dyn Fn(f64) -> (f64, f64) + Send + Sync> {
            Box::new(move |x| {
                if x > 0.0 {
                    (c, c)
                } else if x < 0.0 {
                    (-c, -c)
                } else {
                    (-c, c)
                }
            })
        };
        match self.clone() {
            FunctionDef::Power {
                coef,
                exponent,
                convention: PowerConvention::AbsPower,
                ..
            } if coef > 0.0 => {
                if exponent == 1.0 {
                    Some(kink(coef))
                } else if exponent > 1.0 {
                    Some(Box::new(move |x: f64| {
                        let d = coef * exponent * x.abs().powf(exponent - 1.0) * x.signum();
                        let d = if x == 0.0 { 0.0 } else { d };
                        (d, d)
                    }))
                } else {
                    None
                }
            }
            FunctionDef::Abs { coef, .. } if coef > 0.0 => Some(kink(coef)),
            FunctionDef::Norm { coef, power: 1.0, .. } => Some(kink(coef)),
            _ => None,
        }
    }

    /// Closed-form inverse of the one-dimensional subdifferential.
    fn subdifferential_inverse_1d(&self) -> Option<Box<dyn Fn(f64) -> SetRepr + Send + Sync>> {
        if self.dim() != 1 {
            return None;
        }
        let kink = |c: f64| -> Box<dyn Fn(f64) -> SetRepr + Send + Sync> {
            Box::new(move |y| {
                if (y - c).abs() <= 1e-12 * c {
                    SetRepr::interval(0.0, f64::INFINITY)
                } else if (y + c).abs() <= 1e-12 * c {
                    SetRepr::interval(f64::NEG_INFINITY, 0.0)
                } else if y.abs() < c {
                    SetRepr::point(vec![0.0])
                } else {
                    SetRepr::empty(1)
                }
            })
        };
        match self.clone() {
            FunctionDef::Power {
                coef,
                exponent,
                convention: PowerConvention::AbsPower,
                ..
            } if coef > 0.0 => {
                if exponent == 1.0 {
                    Some(kink(coef))
                } else if exponent > 1.0 {
                    Some(Box::new(move |y: f64| {
                        let x = (y.abs() / (coef * exponent)).powf(1.0 / (exponent - 1.0)) * y.signum();
                        SetRepr::point(vec![if y == 0.0 { 0.0 } else { x }])
                    }))
                } else {
                    None
                }
            }
            FunctionDef::Abs { coef, .. } if coef > 0.0 => Some(kink(coef)),
            FunctionDef::Norm { coef, power: 1.0, .. } => Some(kink(coef)),
            _ => None,
        }
    }

    /// `{x : f(x) ≤ y}` in closed form for one-dimensional even members.
    fn sublevel_1d(&self) -> Option<Box<dyn Fn(f64) -> SetRepr + Send + Sync>> {
        if self.dim() != 1 {
            return None;
        }
        let (coef, exponent, left) = match *self {
            FunctionDef::Power {
                coef,
                exponent,
                convention,
                ..
            } if coef > 0.0 => (coef, exponent, convention == PowerConvention::AbsPower),
            FunctionDef::Abs { coef, .. } if coef > 0.0 => (coef, 1.0, true),
            FunctionDef::Norm { coef, power, .. } => (coef, power, true),
            _ => return None,
        };
        Some(Box::new(move |y: f64| {
            if y < 0.0 {
                return SetRepr::empty(1);
            }
            let r = (y / coef).powf(1.0 / exponent);
            SetRepr::interval(if left { -r } else { 0.0 }, r)
        }))
    }
}

fn p_norm(x: &[f64], order: f64) -> f64 {
    if order.is_infinite() {
        x.iter().fold(0.0f64, |m, v| m.max(v.abs()))
    } else if order == 1.0 {
        x.iter().map(|v| v.abs()).sum()
    } else if order == 2.0 {
        x.iter().map(|v| v * v).sum::<f64>().sqrt()
    } else {
        x.iter().map(|v| v.abs().powf(order)).sum::<f64>().powf(1.0 / order)
    }
}

pub fn build_function(spec: &FunctionSpec) -> Result<ScalarFn> {
    Ok(FunctionDef::parse(spec)?.build())
}

/// Builds a map family; exact inverse images are attached when known.
pub fn build_map(family: Family, raw: &Value) -> Result<SetValuedMap> {
    match family {
        Family::Epigraph => {
            let p: EpigraphParams = params(family, raw)?;
            let def = FunctionDef::parse(&p.of)?;
            let f = def.build().with_domain_hint(Bounds::cube(def.dim(), positive("half_width", p.half_width)?));
            let map = make_epigraph_map(&f);
            Ok(match def.sublevel_1d() {
                Some(inv) => map.with_inverse_image(move |y| inv(y[0])),
                None => map,
            })
        }
        Family::Subdiff => {
            let p: SubdiffParams = params(family, raw)?;
            let def = FunctionDef::parse(&p.of)?;
            if def.dim() != 1 {
                return Err(Error::Problem("subdiff is defined for one-dimensional functions".into()));
            }
            let (a, b) = p.domain;
            if !(a < b && a.is_finite() && b.is_finite()) {
                return Err(Error::Problem("subdiff domain must be a bounded nonempty interval".into()));
            }
            let f = def.build();
            let oracle = match def.subdifferential_1d() {
                Some(d) => SubdiffOracle::new(f, p.domain, d)?,
                None => SubdiffOracle::from_convex(f, p.domain)?,
            };
            oracle.check_convex(401)?;
            let map = oracle.as_map();
            Ok(match def.subdifferential_inverse_1d() {
                Some(inv) => map.with_inverse_image(move |y| inv(y[0])),
                None => map,
            })
        }
        Family::ExplicitGraph => {
            let p: ExplicitGraphParams = params(family, raw)?;
            let lower_def = FunctionDef::parse(&p.lower)?;
            let n = lower_def.dim();
            let lower = lower_def.build();
            let upper = match &p.upper {
                Some(u) => {
                    let d = FunctionDef::parse(u)?;
                    if d.dim() != n {
                        return Err(Error::DimensionMismatch { expected: n, got: d.dim() });
                    }
                    if p.single_valued {
                        return Err(Error::Problem("single_valued excludes an upper function".into()));
                    }
                    Some(d.build())
                }
                None => None,
            };
            let domain = Bounds::cube(n, positive("half_width", p.half_width)?);
            if p.single_valued {
                return Ok(SetValuedMap::single_valued(VectorFn::new(n, 1, move |x| vec![lower.eval(x)]), domain));
            }
            Ok(SetValuedMap::from_image(n, 1, domain, move |x| {
                let lo = lower.eval(x);
                let hi = upper.as_ref().map_or(f64::INFINITY, |u| u.eval(x));
                if lo == f64::INFINITY || lo > hi {
                    SetRepr::empty(1)
                } else {
                    SetRepr::interval(lo, hi)
                }
            }))
        }
        other => Err(Error::Problem(format!("{} is a function family, not a map", family_name(other)))),
    }
}

/// A problem file turned into oracles plus a base point.
#[derive(Debug, Clone)]
pub enum Problem {
    Function { f: ScalarFn, xbar: Vec<f64> },
    Map { map: SetValuedMap, xbar: Vec<f64>, ybar: Vec<f64> },
}

impl Problem {
    pub fn kind(&self) -> ProblemKind {
        match self {
            Problem::Function { .. } => ProblemKind::Function,
            Problem::Map { .. } => ProblemKind::Map,
        }
    }
}

impl ProblemSpec {
    pub fn from_json(text: &str) -> Result<Self> {
        let spec: ProblemSpec = serde_json::from_str(text)?;
        if spec.family.kind() != spec.kind {
            return Err(Error::Problem(format!(
                "family {} does not describe a {}",
                family_name(spec.family),
                if spec.kind == ProblemKind::Map { "map" } else { "function" }
            )));
        }
        Ok(spec)
    }

    pub fn build(&self) -> Result<Problem> {
        match self.kind {
            ProblemKind::Function => {
                if self.invert || self.ybar.is_some() {
                    return Err(Error::Problem("invert and ybar apply to maps only".into()));
                }
                let f = build_function(&FunctionSpec {
                    family: self.family,
                    params: self.params.clone(),
                })?;
                let xbar = base_or_origin(self.xbar.clone(), f.dim())?;
                Ok(Problem::Function { f, xbar })
            }
            ProblemKind::Map => {
                let map = build_map(self.family, &self.params)?;
                let xbar = base_or_origin(self.xbar.clone(), map.input_dim())?;
                let ybar = match &self.ybar {
                    Some(y) => {
                        crate::error::check_dim(map.output_dim(), y.len())?;
                        y.clone()
                    }
                    None => map
                        .try_image(&xbar)?
                        .nearest(&vec![0.0; map.output_dim()])
                        .ok_or_else(|| Error::precondition("the map has an empty image at the base point"))?,
                };
                if self.invert {
                    Ok(Problem::Map {
                        map: invert_map(&map),
                        xbar: ybar,
                        ybar: xbar,
                    })
                } else {
                    Ok(Problem::Map { map, xbar, ybar })
                }
            }
        }
    }
}

fn base_or_origin(x: Option<Vec<f64>>, n: usize) -> Result<Vec<f64>> {
    match x {
        Some(x) => {
            crate::error::check_dim(n, x.len())?;
            if x.iter().any(|v| !v.is_finite()) {
                return Err(Error::Problem("base point must be finite".into()));
            }
            Ok(x)
        }
        None => Ok(vec![0.0; n]),
    }
}

pub fn load_problem(path: &Path) -> Result<Problem> {
    ProblemSpec::from_json(&std::fs::read_to_string(path)?)?.build()
}

/// Penalty problem file: objective, constraints and optional `p`, `r`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PenaltySpec {
    pub f: FunctionSpec,
    #[serde(default)]
    pub g: Vec<FunctionSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub p: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub r: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub xbar: Option<Vec<f64>>,
}

impl PenaltySpec {
    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    /// Command-line values of `p` and `r` take precedence over the file;
    /// `r` defaults to 1.
    pub fn build(&self, p: Option<f64>, r: Option<f64>) -> Result<PenaltyProblem> {
        let f = build_function(&self.f)?;
        let g = self.g.iter().map(build_function).collect::<Result<Vec<_>>>()?;
        let p = p.or(self.p).ok_or_else(|| Error::usage("the penalty exponent p is required"))?;
        let r = r.or(self.r).unwrap_or(1.0);
        let xbar = base_or_origin(self.xbar.clone(), f.dim())?;
        PenaltyProblem::new(f, g, p, r, xbar)
    }
}

/// A map with base point and the orders to examine it at.
#[derive(Debug, Clone)]
pub struct MapFixture {
    pub name: &'static str,
    pub map: SetValuedMap,
    pub xbar: Vec<f64>,
    pub ybar: Vec<f64>,
    pub orders: [f64; 3],
    /// Expected `srg_q` at each order, derived by hand.
    pub expected: [f64; 3],
}

/// A function with base point, orders and hand-derived `‖f'_q(xbar; ·)‖`.
#[derive(Debug, Clone)]
pub struct FunctionFixture {
    pub name: &'static str,
    pub spec: FunctionSpec,
    pub f: ScalarFn,
    pub xbar: Vec<f64>,
    pub orders: [f64; 3],
    pub expected: [f64; 3],
}

fn fspec(text: &str) -> FunctionSpec {
    serde_json::from_str(text).expect("built-in fixture is valid")
}

fn map_fixture(name: &'static str, text: &str, orders: [f64; 3], expected: [f64; 3]) -> MapFixture {
    let spec = ProblemSpec::from_json(text).expect("built-in fixture is valid");
    match spec.build().expect("built-in fixture builds") {
        Problem::Map { map, xbar, ybar } => MapFixture {
            name,
            map,
            xbar,
            ybar,
            orders,
            expected,
        },
        Problem::Function { .. } => unreachable!("map fixture"),
    }
}

const INF: f64 = f64::INFINITY;

/// Mapping catalog: each entry spans the zero, positive and infinite
/// regimes of the strong subregularity modulus at its base point.
pub fn map_catalog() -> Vec<MapFixture> {
    vec![
        map_fixture(
            "epi_square",
            r#"{"kind":"map","family":"epigraph","params":{"of":{"family":"power","params":{"exponent":2}}}}"#,
            [1.0, 2.0, 3.0],
            [0.0, 1.0, INF],
        ),
        map_fixture(
            "epi_abs",
            r#"{"kind":"map","family":"epigraph","params":{"of":{"family":"abs","params":{"coef":1.5}}}}"#,
            [0.5, 1.0, 2.0],
            [0.0, 1.5, INF],
        ),
        map_fixture(
            "epi_max_affine",
            r#"{"kind":"map","family":"epigraph","params":{"of":{"family":"max_affine","params":{"pieces":[[[1],0],[[-2],0]]}}}}"#,
            [0.5, 1.0, 2.0],
            [0.0, 1.0, INF],
        ),
        map_fixture(
            "linear_graph",
            r#"{"kind":"map","family":"explicit_graph","params":{"lower":{"family":"max_affine","params":{"pieces":[[[2],0]]}},"single_valued":true}}"#,
            [0.5, 1.0, 2.0],
            [0.0, 2.0, INF],
        ),
        map_fixture(
            "band_three_halves",
            r#"{"kind":"map","family":"explicit_graph","params":{"lower":{"family":"power","params":{"exponent":1.5}},"upper":{"family":"power","params":{"exponent":1.5,"coef":2}}}}"#,
            [1.0, 1.5, 2.0],
            [0.0, 1.0, INF],
        ),
        map_fixture(
            "subdiff_quartic",
            r#"{"kind":"map","family":"subdiff","params":{"of":{"family":"power","params":{"exponent":4}}}}"#,
            [2.0, 3.0, 5.0],
            [0.0, 4.0, INF],
        ),
        map_fixture(
            "epi_norm_2d",
            r#"{"kind":"map","family":"epigraph","params":{"of":{"family":"norm","params":{"dim":2}}}}"#,
            [0.5, 1.0, 2.0],
            [0.0, 1.0, INF],
        ),
    ]
}

fn function_fixture(name: &'static str, text: &str, orders: [f64; 3], expected: [f64; 3]) -> FunctionFixture {
    let spec = fspec(text);
    let f = build_function(&spec).expect("built-in fixture builds");
    FunctionFixture {
        name,
        xbar: vec![0.0; f.dim()],
        spec,
        f,
        orders,
        expected,
    }
}

/// Function catalog with hand-derived `‖f'_q(0; ·)‖` values.
pub fn function_catalog() -> Vec<FunctionFixture> {
    vec![
        function_fixture("square", r#"{"family":"power","params":{"exponent":2}}"#, [1.0, 2.0, 3.0], [0.0, 1.0, INF]),
        function_fixture("quartic", r#"{"family":"power","params":{"exponent":4}}"#, [2.0, 4.0, 5.0], [0.0, 1.0, INF]),
        function_fixture("abs", r#"{"family":"abs","params":{"coef":2}}"#, [0.5, 1.0, 2.0], [0.0, 2.0, INF]),
        function_fixture(
            "max_affine",
            r#"{"family":"max_affine","params":{"pieces":[[[1],0],[[-3],0]]}}"#,
            [0.5, 1.0, 2.0],
            [0.0, 1.0, INF],
        ),
        function_fixture(
            "root_domain",
            r#"{"family":"power","params":{"exponent":0.5,"convention":"domain_power"}}"#,
            [0.25, 0.5, 1.0],
            [0.0, 1.0, INF],
        ),
        function_fixture("norm_2d", r#"{"family":"norm","params":{"dim":2}}"#, [0.5, 1.0, 2.0], [0.0, 1.0, INF]),
    ]
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_function_and_map_files() {
        let spec = ProblemSpec::from_json(r#"{"kind":"function","family":"power","params":{"exponent":2}}"#).unwrap();
        match spec.build().unwrap() {
            Problem::Function { f, xbar } => {
                assert_eq!(xbar, vec![0.0]);
                assert_eq!(f.eval(&[-3.0]), 9.0);
            }
            _ => panic!("expected a function"),
        }
        let spec = ProblemSpec::from_json(r#"{"kind":"map","family":"epigraph","params":{"of":{"family":"abs"}},"xbar":[0.5]}"#).unwrap();
        match spec.build().unwrap() {
            Problem::Map { ybar, .. } => assert_eq!(ybar, vec![0.5]),
            _ => panic!("expected a map"),
        }
    }

    #[test]
    fn kind_family_mismatch_is_rejected() {
        let e = ProblemSpec::from_json(r#"{"kind":"map","family":"power","params":{"exponent":2}}"#).unwrap_err();
        assert!(matches!(e, Error::Problem(_)));
        assert_eq!(e.exit_code(), 2);
    }

    #[test]
    fn malformed_json_reports_position() {
        let e = ProblemSpec::from_json("{\n  \"kind\": \"function\",\n  \"family\": }").unwrap_err();
        match e {
            Error::Json { line, column, .. } => assert_eq!((line, column), (3, 13)),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn unknown_params_are_rejected() {
        let e = ProblemSpec::from_json(r#"{"kind":"function","family":"abs","params":{"coeff":2}}"#).unwrap().build().unwrap_err();
        assert!(matches!(e, Error::Problem(_)));
    }

    #[test]
    fn power_conventions() {
        let two_sided = build_function(&fspec(r#"{"family":"power","params":{"exponent":0.5}}"#)).unwrap();
        assert_eq!(two_sided.eval(&[-4.0]), 2.0);
        let one_sided = build_function(&fspec(r#"{"family":"power","params":{"exponent":0.5,"convention":"domain_power"}}"#)).unwrap();
        assert_eq!(one_sided.eval(&[-4.0]), f64::INFINITY);
        assert_eq!(one_sided.eval(&[4.0]), 2.0);
    }

    #[test]
    fn norm_orders() {
        for (order, want) in [("1", 7.0), ("2", 5.0), ("\"inf\"", 4.0)] {
            let f = build_function(&fspec(&format!(r#"{{"family":"norm","params":{{"dim":2,"order":{order}}}}}"#))).unwrap();
            assert!((f.eval(&[3.0, -4.0]) - want).abs() < 1e-12);
        }
    }

    #[test]
    fn exact_inverses_match_filtered_ones() {
        for fx in map_catalog().into_iter().filter(|m| m.map.input_dim() == 1) {
            let exact = invert_map(&fx.map);
            for y in [0.3, 0.7] {
                let img = exact.image(&[y]);
                for x in img.sample_in_box(&[0.0], &[1.0], 9) {
                    assert!(fx.map.residual(&x, &[y]) < 1e-7, "{} at y={y}: {x:?}", fx.name);
                }
            }
        }
    }

    #[test]
    fn subdiff_family_uses_closed_forms() {
        let m = build_map(Family::Subdiff, &serde_json::json!({"of":{"family":"abs"}})).unwrap();
        assert_eq!(m.image(&[0.0]), SetRepr::interval(-1.0, 1.0));
        assert_eq!(m.image(&[0.2]), SetRepr::interval(1.0, 1.0));
        let inv = invert_map(&m);
        assert_eq!(inv.image(&[1.0]), SetRepr::interval(0.0, f64::INFINITY));
        let concave = build_map(Family::Subdiff, &serde_json::json!({"of":{"family":"power","params":{"exponent":2,"coef":-1}}}));
        assert!(matches!(concave, Err(Error::Precondition(_))));
    }

    #[test]
    fn penalty_spec_builds() {
        let spec = PenaltySpec::from_json(
            r#"{"f":{"family":"max_affine","params":{"pieces":[[[1],0]]}},"g":[{"family":"power","params":{"exponent":1}}],"p":1}"#,
        )
        .unwrap();
        let pr = spec.build(None, Some(3.0)).unwrap();
        assert_eq!((pr.p(), pr.r()), (1.0, 3.0));
        assert!(matches!(PenaltySpec::from_json(r#"{"f":{"family":"abs"}}"#).unwrap().build(None, None), Err(Error::Usage(_))));
    }

    #[test]
    fn catalogs_are_well_formed() {
        let maps = map_catalog();
        assert!(maps.len() >= 6);
        for m in &maps {
            assert!(m.map.residual(&m.xbar, &m.ybar) <= 1e-12, "{}", m.name);
        }
        assert!(function_catalog().iter().all(|f| f.f.eval(&f.xbar) == 0.0));
    }
}
