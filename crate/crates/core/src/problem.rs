//! The JSON problem format read by the CLI, and writers for the same format.
//!
//! Structure constants are lists of `{"inputs": [labels], "output": {label: "p/q"}}`.
//! Inputs may come in any order; they are sorted with the Koszul sign of the
//! relevant power (exterior for brackets, symmetric for L∞[1] operations).

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::dgla::{DgLieAlgebra, DglaMorphism};
use crate::error::{invalid, Error, Result};
use crate::graded::{GradedMap, GradedVectorSpace};
use crate::linalg::SparseVec;
use crate::linf::{derived_brackets, LInfinityAlgebra, Taylor, VoronovData};
use crate::mc::TruncatedElement;
use crate::multilinear::Multilinear;
use crate::power::{normalize, PowerKind};
use crate::rational::Rational;

pub const SCHEMA_VERSION: u32 = 1;

/// A coefficient vector keyed by basis label.
pub type VectorSpec = BTreeMap<String, Rational>;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Entry {
    pub inputs: Vec<String>,
    pub output: VectorSpec,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AlgebraSpec {
    pub space: BTreeMap<i64, Vec<String>>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub differential: Vec<Entry>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub bracket: Vec<Entry>,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Properties {
    #[serde(rename = "M_formal", default, skip_serializing_if = "Option::is_none")]
    pub m_formal: Option<bool>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Kind {
    Dgla,
    Linf,
    Voronov,
    Morphism,
    Mc,
}

impl Kind {
    pub fn name(self) -> &'static str {
        match self {
            Kind::Dgla => "dgla",
            Kind::Linf => "linf",
            Kind::Voronov => "voronov",
            Kind::Morphism => "morphism",
            Kind::Mc => "mc",
        }
    }
}

/// The file as written on disk. Which optional fields are required depends on `kind`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemFile {
    pub schema_version: u32,
    pub kind: Kind,
    #[serde(default = "default_field")]
    pub field: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub description: Option<String>,
    /// `dgla`, `linf`: the underlying graded space.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub space: Option<BTreeMap<i64, Vec<String>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub differential: Option<Vec<Entry>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub bracket: Option<Vec<Entry>>,
    /// `linf`: the Taylor components `q_n`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub operations: Option<Vec<Entry>>,
    /// `linf`: operations above this arity are unknown, not zero.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub weight: Option<usize>,
    /// `voronov`: the ambient DG-Lie algebra.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ambient: Option<AlgebraSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub subalgebra: Option<Vec<String>>,
    /// `voronov`: the degree-1 element `d`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub element: Option<VectorSpec>,
    /// `morphism`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub source: Option<AlgebraSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub target: Option<AlgebraSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub map: Option<Vec<Entry>>,
    /// `mc`: the algebra and the coefficients of `t, t², …`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub algebra: Option<AlgebraSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub series: Option<Vec<VectorSpec>>,
    /// `mc`: work modulo `t^order`; defaults to one more than the length of `series`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub order: Option<usize>,
    /// `mc`: optional degree-0 gauge series.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gauge: Option<Vec<VectorSpec>>,
    #[serde(default, skip_serializing_if = "is_default")]
    pub properties: Properties,
}

fn default_field() -> String {
    "Q".into()
}

fn is_default(p: &Properties) -> bool {
    *p == Properties::default()
}

#[derive(Clone, Debug)]
pub struct McProblem {
    pub algebra: DgLieAlgebra,
    pub series: TruncatedElement,
    pub gauge: Option<TruncatedElement>,
}

#[derive(Clone, Debug)]
pub enum Problem {
    Dgla(DgLieAlgebra),
    Linf(LInfinityAlgebra),
    Voronov(Box<VoronovData>),
    Morphism(DglaMorphism),
    Mc(Box<McProblem>),
}

impl ProblemFile {
    pub fn parse(text: &str) -> Result<Self> {
        let file: ProblemFile = serde_json::from_str(text).map_err(|e| Error::Invalid(format!("malformed problem file: {e}")))?;
        if file.schema_version != SCHEMA_VERSION {
            return invalid(format!("unsupported schema_version {} (expected {SCHEMA_VERSION})", file.schema_version));
        }
        if file.field != "Q" {
            return invalid(format!("unsupported field {:?}; only \"Q\" is implemented", file.field));
        }
        Ok(file)
    }

    fn bare(kind: Kind) -> Self {
        ProblemFile {
            schema_version: SCHEMA_VERSION,
            kind,
            field: default_field(),
            name: None,
            description: None,
            space: None,
            differential: None,
            bracket: None,
            operations: None,
            weight: None,
            ambient: None,
            subalgebra: None,
            element: None,
            source: None,
            target: None,
            map: None,
            algebra: None,
            series: None,
            order: None,
            gauge: None,
            properties: Properties::default(),
        }
    }

    pub fn from_dgla(l: &DgLieAlgebra) -> Self {
        let spec = AlgebraSpec::from_dgla(l);
        ProblemFile {
            space: Some(spec.space),
            differential: Some(spec.differential),
            bracket: Some(spec.bracket),
            ..Self::bare(Kind::Dgla)
        }
    }

    pub fn from_linf(v: &LInfinityAlgebra) -> Self {
        let sp = v.space();
        let mut ops = Vec::new();
        for q in v.taylor().values() {
            for (t, val) in q.values() {
                ops.push(Entry { inputs: t.iter().map(|&i| sp.label(i).to_string()).collect(), output: vector_spec(sp, val) });
            }
        }
        ProblemFile {
            space: Some(sp.components().clone()),
            operations: Some(ops),
            weight: Some(v.weight()),
            ..Self::bare(Kind::Linf)
        }
    }

    pub fn from_morphism(f: &DglaMorphism) -> Self {
        let src = f.source.space();
        let map = (0..src.dim())
            .filter(|&i| !f.map.image(i).is_zero())
            .map(|i| Entry { inputs: vec![src.label(i).to_string()], output: vector_spec(f.target.space(), f.map.image(i)) })
            .collect();
        ProblemFile {
            source: Some(AlgebraSpec::from_dgla(&f.source)),
            target: Some(AlgebraSpec::from_dgla(&f.target)),
            map: Some(map),
            ..Self::bare(Kind::Morphism)
        }
    }

    pub fn from_mc(l: &DgLieAlgebra, x: &TruncatedElement) -> Self {
        ProblemFile {
            algebra: Some(AlgebraSpec::from_dgla(l)),
            series: Some(x.coefficients().iter().map(|c| vector_spec(l.space(), c)).collect()),
            order: Some(x.order()),
            ..Self::bare(Kind::Mc)
        }
    }

    pub fn with_name(mut self, name: &str, description: &str) -> Self {
        self.name = Some(name.into());
        self.description = Some(description.into());
        self
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("problem files serialize");
        s.push('\n');
        s
    }

    /// Builds the mathematical object. `weight` bounds the arity of derived
    /// brackets and must not exceed the declared weight of an L∞ input.
    pub fn build(&self, weight: usize) -> Result<Problem> {
        let need = |what: &str| Error::Invalid(format!("a {} problem needs the field {what:?}", self.kind.name()));
        match self.kind {
            Kind::Dgla => {
                let spec = AlgebraSpec {
                    space: self.space.clone().ok_or_else(|| need("space"))?,
                    differential: self.differential.clone().unwrap_or_default(),
                    bracket: self.bracket.clone().unwrap_or_default(),
                };
                Ok(Problem::Dgla(spec.build()?))
            }
            Kind::Linf => {
                let space = GradedVectorSpace::new(self.space.clone().ok_or_else(|| need("space"))?)?;
                let declared = self.weight.ok_or_else(|| need("weight"))?;
                if weight > declared {
                    return Err(Error::InsufficientBounds(format!(
                        "the input specifies operations only up to weight {declared}, but weight {weight} was requested"
                    )));
                }
                let mut taylor: Taylor = BTreeMap::new();
                for e in self.operations.as_deref().unwrap_or_default() {
                    let n = e.inputs.len();
                    if n == 0 {
                        return invalid("an operation needs at least one input");
                    }
                    if n > declared {
                        return invalid(format!("operation of arity {n} exceeds the declared weight {declared}"));
                    }
                    let (t, sign) = sorted_inputs(&space, &e.inputs, PowerKind::Symmetric)?;
                    let v = vector(&space, &e.output)?;
                    let Some(t) = t_or_vanish(t, &v, &e.inputs)? else { continue };
                    let deg: i64 = t.iter().map(|&i| space.degree(i)).sum::<i64>() + 1;
                    if let Some((bad, _)) = v.iter().find(|(i, _)| space.degree(*i) != deg) {
                        return invalid(format!(
                            "q_{n}({}) has a component along {} of the wrong degree",
                            e.inputs.join(", "),
                            space.label(bad)
                        ));
                    }
                    let q = taylor.entry(n).or_insert_with(|| Multilinear::zero(n, 1));
                    if q.get(&t).is_some() {
                        return invalid(format!("operation on {:?} given twice", e.inputs));
                    }
                    q.set(t, v.scaled(&Rational::from_int(sign)));
                }
                Ok(Problem::Linf(LInfinityAlgebra::new(space, taylor, weight)?))
            }
            Kind::Voronov => {
                let g = self.ambient.as_ref().ok_or_else(|| need("ambient"))?.build()?;
                let sub = self
                    .subalgebra
                    .as_ref()
                    .ok_or_else(|| need("subalgebra"))?
                    .iter()
                    .map(|x| label(g.space(), x))
                    .collect::<Result<Vec<_>>>()?;
                let d = vector(g.space(), self.element.as_ref().ok_or_else(|| need("element"))?)?;
                Ok(Problem::Voronov(Box::new(derived_brackets(&g, &sub, &d, weight)?)))
            }
            Kind::Morphism => {
                let src = self.source.as_ref().ok_or_else(|| need("source"))?.build()?;
                let tgt = self.target.as_ref().ok_or_else(|| need("target"))?.build()?;
                let mut images = vec![SparseVec::new(); src.dim()];
                let mut seen = vec![false; src.dim()];
                for e in self.map.as_deref().unwrap_or_default() {
                    let [x] = e.inputs.as_slice() else {
                        return invalid("each map entry takes exactly one input");
                    };
                    let i = label(src.space(), x)?;
                    if std::mem::replace(&mut seen[i], true) {
                        return invalid(format!("image of {x} given twice"));
                    }
                    images[i] = vector(tgt.space(), &e.output)?;
                }
                let map = GradedMap::new(0, tgt.dim(), images)?;
                Ok(Problem::Morphism(DglaMorphism::new(src, tgt, map)?))
            }
            Kind::Mc => {
                let algebra = self.algebra.as_ref().ok_or_else(|| need("algebra"))?.build()?;
                let series = self.series.as_ref().ok_or_else(|| need("series"))?;
                let order = self.order.unwrap_or(series.len() + 1);
                let series = truncated(&algebra, series, order)?;
                let gauge = match &self.gauge {
                    Some(g) => Some(truncated(&algebra, g, order)?),
                    None => None,
                };
                Ok(Problem::Mc(Box::new(McProblem { algebra, series, gauge })))
            }
        }
    }
}

/// Zero inputs that vanish by symmetry are skipped; nonzero ones are an error.
fn t_or_vanish(t: Option<Vec<usize>>, v: &SparseVec, inputs: &[String]) -> Result<Option<Vec<usize>>> {
    match t {
        Some(t) => Ok(Some(t)),
        None if v.is_zero() => Ok(None),
        None => invalid(format!("inputs {inputs:?} vanish by graded symmetry but a nonzero value was given")),
    }
}

fn truncated(l: &DgLieAlgebra, series: &[VectorSpec], order: usize) -> Result<TruncatedElement> {
    let coeffs = series.iter().map(|c| vector(l.space(), c)).collect::<Result<Vec<_>>>()?;
    TruncatedElement::new(order, coeffs)
}

impl AlgebraSpec {
    pub fn from_dgla(l: &DgLieAlgebra) -> Self {
        let sp = l.space();
        let differential = (0..sp.dim())
            .filter(|&i| !l.differential().image(i).is_zero())
            .map(|i| Entry { inputs: vec![sp.label(i).to_string()], output: vector_spec(sp, l.differential().image(i)) })
            .collect();
        let bracket = l
            .bracket_table()
            .iter()
            .map(|(&(i, j), v)| Entry {
                inputs: vec![sp.label(i).to_string(), sp.label(j).to_string()],
                output: vector_spec(sp, v),
            })
            .collect();
        AlgebraSpec { space: sp.components().clone(), differential, bracket }
    }

    pub fn build(&self) -> Result<DgLieAlgebra> {
        let space = GradedVectorSpace::new(self.space.clone())?;
        let mut diff = BTreeMap::new();
        for e in &self.differential {
            let [x] = e.inputs.as_slice() else {
                return invalid("each differential entry takes exactly one input");
            };
            let i = label(&space, x)?;
            if diff.insert(i, vector(&space, &e.output)?).is_some() {
                return invalid(format!("d({x}) given twice"));
            }
        }
        let mut bracket = Vec::new();
        for e in &self.bracket {
            let [x, y] = e.inputs.as_slice() else {
                return invalid("each bracket entry takes exactly two inputs");
            };
            bracket.push(((label(&space, x)?, label(&space, y)?), vector(&space, &e.output)?));
        }
        DgLieAlgebra::from_tables(space, diff, bracket)
    }
}

fn label(space: &GradedVectorSpace, x: &str) -> Result<usize> {
    space.index_of(x).ok_or_else(|| Error::Invalid(format!("unknown basis label {x:?}")))
}

pub fn vector(space: &GradedVectorSpace, spec: &VectorSpec) -> Result<SparseVec> {
    let mut v = SparseVec::new();
    for (x, c) in spec {
        v.add_term(label(space, x)?, c);
    }
    Ok(v)
}

pub fn vector_spec(space: &GradedVectorSpace, v: &SparseVec) -> VectorSpec {
    v.iter().map(|(i, c)| (space.label(i).to_string(), c.clone())).collect()
}

fn sorted_inputs(space: &GradedVectorSpace, inputs: &[String], kind: PowerKind) -> Result<(Option<Vec<usize>>, i64)> {
    let idx = inputs.iter().map(|x| label(space, x)).collect::<Result<Vec<_>>>()?;
    Ok(match normalize(kind, space.degrees(), &idx) {
        Some((t, s)) => (Some(t), s),
        None => (None, 1),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;

    #[test]
    fn dgla_round_trip() {
        let l = fixtures::endomorphisms(&[("a", 0), ("b", 1)], &[(1, 0, 1)]);
        let text = ProblemFile::from_dgla(&l).to_json();
        match ProblemFile::parse(&text).unwrap().build(5).unwrap() {
            Problem::Dgla(m) => assert_eq!(m, l),
            _ => panic!("wrong kind"),
        }
    }

    #[test]
    fn linf_inputs_are_sorted_with_sign() {
        let text = r#"{"schema_version": 1, "kind": "linf", "weight": 3,
            "space": {"0": ["x"], "1": ["a", "b"], "3": ["c"]},
            "operations": [{"inputs": ["b", "a"], "output": {"c": "1/2"}}]}"#;
        let Problem::Linf(v) = ProblemFile::parse(text).unwrap().build(3).unwrap() else { panic!() };
        let q2 = v.q(2);
        let (a, b) = (v.space().index_of("a").unwrap(), v.space().index_of("b").unwrap());
        assert_eq!(q2.get(&[a, b]).unwrap().get(v.space().index_of("c").unwrap()), Rational::new(-1, 2));
        assert!(matches!(ProblemFile::parse(text).unwrap().build(4), Err(Error::InsufficientBounds(_))));
    }

    #[test]
    fn rejects_unknown_fields_and_labels() {
        let text = r#"{"schema_version": 1, "kind": "dgla", "space": {"0": ["h"]}, "brackets": []}"#;
        assert!(matches!(ProblemFile::parse(text), Err(Error::Invalid(_))));
        let text = r#"{"schema_version": 1, "kind": "dgla", "space": {"0": ["h"]},
            "differential": [{"inputs": ["q"], "output": {}}]}"#;
        assert!(matches!(ProblemFile::parse(text).unwrap().build(5), Err(Error::Invalid(_))));
    }
}
