//! Kähler charts: a coordinate dimension plus a family of potentials.
//!
//! A chart carries scalar potentials indexed by an integer weight starting at
//! -1. The weight -1 potential is mandatory and plays the role of the Kähler
//! potential: its mixed Hessian is the metric and must be invertible wherever
//! operators are evaluated. Higher potentials perturb the pseudo-Kähler form
//! order by order in the deformation parameter and may be absent (absent
//! means identically zero).

use std::collections::BTreeMap;
use std::fmt;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::expr::{parse_expression, EvalError, ParseError, ScalarField};
use crate::jet::{Dir, Jet, JetError, JetMatrix};

#[derive(Debug, Error)]
pub enum GeometryError {
    #[error("chart has no weight -1 potential")]
    MissingMetric,
    #[error("potential weight {0} is below -1")]
    WeightBelowFloor(i32),
    #[error("metric is degenerate at {point}")]
    DegenerateMetric { point: PointDisplay },
    #[error("potential uses coordinate z{used} but chart dimension is {m}")]
    PotentialDimension { used: usize, m: usize },
    #[error("point has {got} coordinates, chart dimension is {m}")]
    PointDimension { got: usize, m: usize },
    #[error("unknown builtin chart `{0}`")]
    UnknownBuiltin(String),
    #[error("builtin chart `{name}` is one-dimensional, dimension {m} requested")]
    BuiltinDimension { name: String, m: usize },
    #[error("potential {weight}: {source}")]
    PotentialParse { weight: i32, source: ParseError },
    #[error("bad potential key `{0}`: keys are integer weights")]
    BadWeightKey(String),
    #[error(transparent)]
    Eval(#[from] EvalError),
    #[error(transparent)]
    Jet(#[from] JetError),
    #[error("chart json: {0}")]
    Json(#[from] serde_json::Error),
}

/// Formats a coordinate tuple for error messages.
#[derive(Debug, Clone)]
pub struct PointDisplay(pub Vec<Complex64>);

impl fmt::Display for PointDisplay {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (k, z) in self.0.iter().enumerate() {
            if k > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{}+{}i", z.re, z.im)?;
        }
        write!(f, ")")
    }
}

/// A chart: coordinate dimension and weighted potentials.
#[derive(Debug, Clone, PartialEq)]
pub struct KahlerChart {
    name: String,
    m: usize,
    potentials: BTreeMap<i32, ScalarField>,
}

#[derive(Serialize, Deserialize)]
struct ChartSpec {
    #[serde(default)]
    name: String,
    dimension: usize,
    potentials: BTreeMap<String, String>,
}

impl KahlerChart {
    pub fn new(
        name: impl Into<String>,
        m: usize,
        potentials: BTreeMap<i32, ScalarField>,
    ) -> Result<KahlerChart, GeometryError> {
        if !potentials.contains_key(&-1) {
            return Err(GeometryError::MissingMetric);
        }
        if let Some((&w, _)) = potentials.iter().next() {
            if w < -1 {
                return Err(GeometryError::WeightBelowFloor(w));
            }
        }
        for field in potentials.values() {
            let used = field.max_var_index();
            if used > m {
                return Err(GeometryError::PotentialDimension { used, m });
            }
        }
        Ok(KahlerChart { name: name.into(), m, potentials })
    }

    /// Builtin charts by name: `flat` (any dimension), `fubini-study` and
    /// `hyperbolic-disc` (one-dimensional).
    pub fn builtin(name: &str, m: usize) -> Result<KahlerChart, GeometryError> {
        let phi = match name {
            "flat" => {
                let terms: Vec<String> =
                    (1..=m).map(|k| format!("z{k}*zb{k}")).collect();
                terms.join(" + ")
            }
            "fubini-study" => {
                if m != 1 {
                    return Err(GeometryError::BuiltinDimension { name: name.into(), m });
                }
                "log(1 + z1*zb1)".to_string()
            }
            "hyperbolic-disc" => {
                if m != 1 {
                    return Err(GeometryError::BuiltinDimension { name: name.into(), m });
                }
                "-log(1 - z1*zb1)".to_string()
            }
            other => return Err(GeometryError::UnknownBuiltin(other.into())),
        };
        let field = parse_expression(&phi)
            .map_err(|source| GeometryError::PotentialParse { weight: -1, source })?;
        let mut potentials = BTreeMap::new();
        potentials.insert(-1, field);
        KahlerChart::new(name, m, potentials)
    }

    pub fn from_json(json: &str) -> Result<KahlerChart, GeometryError> {
        let spec: ChartSpec = serde_json::from_str(json)?;
        let mut potentials = BTreeMap::new();
        for (key, text) in &spec.potentials {
            let weight: i32 = key
                .parse()
                .map_err(|_| GeometryError::BadWeightKey(key.clone()))?;
            let field = parse_expression(text)
                .map_err(|source| GeometryError::PotentialParse { weight, source })?;
            potentials.insert(weight, field);
        }
        KahlerChart::new(spec.name, spec.dimension, potentials)
    }

    pub fn to_json(&self) -> String {
        let spec = ChartSpec {
            name: self.name.clone(),
            dimension: self.m,
            potentials: self
                .potentials
                .iter()
                .map(|(w, f)| (w.to_string(), f.source().to_string()))
                .collect(),
        };
        serde_json::to_string_pretty(&spec).expect("chart spec serializes")
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn dimension(&self) -> usize {
        self.m
    }

    pub fn potential(&self, weight: i32) -> Option<&ScalarField> {
        self.potentials.get(&weight)
    }

    /// Weights of the potentials actually present, ascending.
    pub fn weights(&self) -> impl Iterator<Item = i32> + '_ {
        self.potentials.keys().copied()
    }

    pub fn max_weight(&self) -> i32 {
        *self.potentials.keys().next_back().expect("weight -1 is mandatory")
    }

    /// Adds or replaces a potential; weight -1 replaces the metric potential.
    pub fn with_potential(mut self, weight: i32, field: ScalarField) -> Result<KahlerChart, GeometryError> {
        if weight < -1 {
            return Err(GeometryError::WeightBelowFloor(weight));
        }
        let used = field.max_var_index();
        if used > self.m {
            return Err(GeometryError::PotentialDimension { used, m: self.m });
        }
        self.potentials.insert(weight, field);
        Ok(self)
    }

    fn check_point(&self, coords: &[Complex64]) -> Result<(), GeometryError> {
        if coords.len() != self.m {
            return Err(GeometryError::PointDimension { got: coords.len(), m: self.m });
        }
        Ok(())
    }

    /// Jet of the weight `w` potential, or `None` when the chart omits it.
    pub fn potential_jet(
        &self,
        weight: i32,
        coords: &[Complex64],
        depth: usize,
    ) -> Result<Option<Jet>, GeometryError> {
        self.check_point(coords)?;
        match self.potentials.get(&weight) {
            Some(field) => Ok(Some(field.eval_jet(coords, depth)?)),
            None => Ok(None),
        }
    }

    /// Mixed Hessian of the weight -1 potential: entry `[p][q]` is the
    /// holomorphic-p, antiholomorphic-q second derivative as a jet of the
    /// requested depth.
    pub fn metric_jet(&self, coords: &[Complex64], depth: usize) -> Result<JetMatrix, GeometryError> {
        self.check_point(coords)?;
        let phi = self
            .potentials
            .get(&-1)
            .expect("weight -1 is mandatory")
            .eval_jet(coords, depth + 2)?;
        let mut entries = Vec::with_capacity(self.m * self.m);
        for p in 0..self.m {
            let dp = phi.derive(Dir::Holo(p))?;
            for q in 0..self.m {
                entries.push(dp.derive(Dir::AntiHolo(q))?);
            }
        }
        Ok(JetMatrix::from_entries(self.m, entries)?)
    }

    /// Inverse metric as a jet matrix; entry `[q][p]` contracts an
    /// antiholomorphic index q against a holomorphic index p.
    pub fn inverse_metric_jet(
        &self,
        coords: &[Complex64],
        depth: usize,
    ) -> Result<JetMatrix, GeometryError> {
        let g = self.metric_jet(coords, depth)?;
        g.inverse().map_err(|e| match e {
            JetError::SingularConstantTerm => GeometryError::DegenerateMetric {
                point: PointDisplay(coords.to_vec()),
            },
            other => GeometryError::Jet(other),
        })
    }

    /// Poisson bracket of two fields as a jet.
    pub fn poisson_bracket_jet(
        &self,
        f1: &ScalarField,
        f2: &ScalarField,
        coords: &[Complex64],
        depth: usize,
    ) -> Result<Jet, GeometryError> {
        self.check_point(coords)?;
        let inv = self.inverse_metric_jet(coords, depth)?;
        let j1 = f1.eval_jet(coords, depth + 1)?;
        let j2 = f2.eval_jet(coords, depth + 1)?;
        let mut acc = Jet::zero(self.m, depth);
        for q in 0..self.m {
            for p in 0..self.m {
                let x = inv.entry(q, p);
                let a = j1.derive(Dir::AntiHolo(q))?.checked_mul(&j2.derive(Dir::Holo(p))?)?;
                let b = j1.derive(Dir::Holo(p))?.checked_mul(&j2.derive(Dir::AntiHolo(q))?)?;
                acc = acc.checked_add(&x.checked_mul(&a.checked_sub(&b)?)?)?;
            }
        }
        Ok(acc.scale(Complex64::new(0.0, 1.0)))
    }

    /// Poisson bracket evaluated at the chart point.
    pub fn poisson_bracket(
        &self,
        f1: &ScalarField,
        f2: &ScalarField,
        coords: &[Complex64],
    ) -> Result<Complex64, GeometryError> {
        Ok(self.poisson_bracket_jet(f1, f2, coords, 0)?.eval_center())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn flat_metric_is_identity() {
        let chart = KahlerChart::builtin("flat", 2).unwrap();
        let g = chart.metric_jet(&[c(0.4, 0.1), c(-0.2, 0.7)], 1).unwrap();
        for p in 0..2 {
            for q in 0..2 {
                let want = if p == q { 1.0 } else { 0.0 };
                let got = g.entry(p, q).eval_center();
                assert!((got - c(want, 0.0)).norm() < 1e-14);
            }
        }
    }

    #[test]
    fn flat_bracket_of_coordinates() {
        // {z, zb} = -i on the flat chart.
        let chart = KahlerChart::builtin("flat", 1).unwrap();
        let z = parse_expression("z1").unwrap();
        let zb = parse_expression("zb1").unwrap();
        let got = chart.poisson_bracket(&z, &zb, &[c(0.3, -0.4)]).unwrap();
        assert!((got - c(0.0, -1.0)).norm() < 1e-14);
    }

    #[test]
    fn bracket_is_antisymmetric_and_leibniz() {
        let chart = KahlerChart::builtin("fubini-study", 1).unwrap();
        let f = parse_expression("z1^2 + zb1").unwrap();
        let g = parse_expression("z1*zb1").unwrap();
        let h = parse_expression("1 + z1").unwrap();
        let p = [c(0.2, 0.5)];
        let fg = chart.poisson_bracket(&f, &g, &p).unwrap();
        let gf = chart.poisson_bracket(&g, &f, &p).unwrap();
        assert!((fg + gf).norm() < 1e-13);

        // {f, g h} = {f, g} h + g {f, h}
        let gh = ScalarField::from_ast(crate::expr::Expr::Mul(
            g.ast().clone().into(),
            h.ast().clone().into(),
        ));
        let lhs = chart.poisson_bracket(&f, &gh, &p).unwrap();
        let gv = g.eval_jet(&p, 0).unwrap().eval_center();
        let hv = h.eval_jet(&p, 0).unwrap().eval_center();
        let fh = chart.poisson_bracket(&f, &h, &p).unwrap();
        assert!((lhs - (fg * hv + gv * fh)).norm() < 1e-13);
    }

    #[test]
    fn fubini_study_metric_value() {
        // g = (1+|z|^2)^-2 for the potential log(1+|z|^2).
        let chart = KahlerChart::builtin("fubini-study", 1).unwrap();
        let z = c(0.3, -0.2);
        let g = chart.metric_jet(&[z], 0).unwrap();
        let want = (1.0 + z.norm_sqr()).powi(-2);
        assert!((g.entry(0, 0).eval_center() - c(want, 0.0)).norm() < 1e-13);
    }

    #[test]
    fn hyperbolic_metric_blows_up_toward_boundary() {
        let chart = KahlerChart::builtin("hyperbolic-disc", 1).unwrap();
        let g_inner = chart.metric_jet(&[c(0.1, 0.0)], 0).unwrap().entry(0, 0).eval_center();
        let g_outer = chart.metric_jet(&[c(0.9, 0.0)], 0).unwrap().entry(0, 0).eval_center();
        assert!(g_outer.re > g_inner.re);
        let want = (1.0 - 0.81_f64).powi(-2);
        assert!((g_outer - c(want, 0.0)).norm() < 1e-12);
    }

    #[test]
    fn inverse_metric_round_trips() {
        let mut potentials = BTreeMap::new();
        potentials.insert(
            -1,
            parse_expression("z1*zb1 + z2*zb2 + 0.25*z1*zb1*z2*zb2").unwrap(),
        );
        let chart = KahlerChart::new("bumped", 2, potentials).unwrap();
        let p = [c(0.3, 0.1), c(-0.2, 0.4)];
        let g = chart.metric_jet(&p, 2).unwrap();
        let x = chart.inverse_metric_jet(&p, 2).unwrap();
        let prod = g.mul(&x).unwrap();
        for a in 0..2 {
            for b in 0..2 {
                let want = if a == b { 1.0 } else { 0.0 };
                let diff = prod
                    .entry(a, b)
                    .checked_sub(&Jet::constant(2, 2, c(want, 0.0)))
                    .unwrap();
                assert!(diff.max_abs() < 1e-12);
            }
        }
    }

    #[test]
    fn degenerate_metric_names_the_point() {
        let mut potentials = BTreeMap::new();
        potentials.insert(-1, parse_expression("z1*z1*zb1*zb1").unwrap());
        let chart = KahlerChart::new("degenerate", 1, potentials).unwrap();
        let err = chart.inverse_metric_jet(&[c(0.0, 0.0)], 0).unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("degenerate"), "{msg}");
        assert!(msg.contains("0+0i"), "{msg}");
    }

    #[test]
    fn chart_json_round_trip() {
        let chart = KahlerChart::builtin("fubini-study", 1)
            .unwrap()
            .with_potential(0, parse_expression("z1*zb1").unwrap())
            .unwrap();
        let json = chart.to_json();
        let back = KahlerChart::from_json(&json).unwrap();
        assert_eq!(back.dimension(), 1);
        assert_eq!(back.potential(0).unwrap().source(), "z1*zb1");
        assert_eq!(back.potential(-1).unwrap().source(), "log(1 + z1*zb1)");
    }

    #[test]
    fn missing_metric_potential_rejected() {
        let mut potentials = BTreeMap::new();
        potentials.insert(0, parse_expression("z1*zb1").unwrap());
        assert!(matches!(
            KahlerChart::new("nometric", 1, potentials),
            Err(GeometryError::MissingMetric)
        ));
    }

    #[test]
    fn oversized_variable_rejected() {
        let mut potentials = BTreeMap::new();
        potentials.insert(-1, parse_expression("z1*zb1 + z3*zb3").unwrap());
        assert!(matches!(
            KahlerChart::new("bad", 2, potentials),
            Err(GeometryError::PotentialDimension { used: 3, m: 2 })
        ));
    }
}
