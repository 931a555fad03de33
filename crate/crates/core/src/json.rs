//! JSON documents for lattices, planes, discriminant classes and
//! perturbation certificates.
//!
//! Integers are written as JSON numbers of arbitrary size; rationals are
//! strings such as `"1/100"`. Field order is fixed by the structs below.

use std::str::FromStr;
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use serde_json::Number;
use thiserror::Error;

use crate::lattice::{GramLattice, LatticeError};
use crate::modp::{Legendre, ModPError, Prime};
use crate::perturb::{PerturbCertificate, PerturbStep, Residues, StepKind};
use crate::plane::{DiscClass, Plane, PlaneError, Target};
use crate::scalar::{format_rational, parse_rational, Rational, Scalar};

#[derive(Debug, Error)]
pub enum JsonError {
    #[error(transparent)]
    Serde(#[from] serde_json::Error),
    #[error("{0:?} is not an integer")]
    NotAnInteger(String),
    #[error("{0:?} is not a rational number")]
    NotARational(String),
    #[error("only planes in Λ_d can be serialized")]
    NotLambda,
    #[error("invalid document: {0}")]
    Invalid(String),
    #[error(transparent)]
    Lattice(#[from] LatticeError),
    #[error(transparent)]
    Plane(#[from] PlaneError),
    #[error(transparent)]
    ModP(#[from] ModPError),
}

pub fn to_number<T: Scalar>(x: &T) -> Number {
    Number::from_str(&x.to_string()).expect("integers are valid JSON numbers")
}

pub fn from_number<T: Scalar>(n: &Number) -> Result<T, JsonError> {
    let s = n.to_string();
    s.parse().map_err(|_| JsonError::NotAnInteger(s))
}

fn to_numbers<T: Scalar>(v: &[T]) -> Vec<Number> {
    v.iter().map(to_number).collect()
}

fn from_numbers<T: Scalar>(v: &[Number]) -> Result<Vec<T>, JsonError> {
    v.iter().map(from_number).collect()
}

fn rational<T: Scalar>(s: &str) -> Result<Rational<T>, JsonError> {
    parse_rational(s).ok_or_else(|| JsonError::NotARational(s.to_string()))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LatticeJson {
    pub label: String,
    pub rank: usize,
    /// Row-major.
    pub gram: Vec<Number>,
}

impl LatticeJson {
    pub fn from_lattice<T: Scalar>(l: &GramLattice<T>) -> Self {
        let n = l.rank();
        LatticeJson {
            label: l.label().to_string(),
            rank: n,
            gram: (0..n).flat_map(|i| to_numbers(l.gram().row(i))).collect(),
        }
    }

    pub fn to_lattice<T: Scalar>(&self) -> Result<GramLattice<T>, JsonError> {
        let flat: Vec<T> = from_numbers(&self.gram)?;
        if flat.len() != self.rank * self.rank {
            return Err(JsonError::Invalid("gram size does not match rank".into()));
        }
        let rows: Vec<Vec<T>> = flat.chunks(self.rank.max(1)).map(|c| c.to_vec()).collect();
        Ok(GramLattice::new(self.label.clone(), &rows)?)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlaneJson {
    pub d: u64,
    pub omega1: Vec<Number>,
    pub omega2: Vec<Number>,
}

impl PlaneJson {
    pub fn from_plane<T: Scalar>(h: &Plane<T>) -> Result<Self, JsonError> {
        let d = h.lattice().degree().ok_or(JsonError::NotLambda)?;
        Ok(PlaneJson {
            d,
            omega1: to_numbers(h.omega1()),
            omega2: to_numbers(h.omega2()),
        })
    }

    pub fn lattice<T: Scalar>(&self) -> Result<Arc<GramLattice<T>>, JsonError> {
        let d = i64::try_from(self.d).map_err(|_| JsonError::Invalid("degree too large".into()))?;
        Ok(Arc::new(GramLattice::lambda(d)?))
    }

    pub fn to_plane<T: Scalar>(&self) -> Result<Plane<T>, JsonError> {
        self.to_plane_in(self.lattice()?)
    }

    /// Parse into an existing `Λ_d` instance.
    pub fn to_plane_in<T: Scalar>(&self, l: Arc<GramLattice<T>>) -> Result<Plane<T>, JsonError> {
        if l.degree() != Some(self.d) {
            return Err(JsonError::Invalid(format!("plane lives in Λ_{}", self.d)));
        }
        Ok(Plane::new(l, from_numbers(&self.omega1)?, from_numbers(&self.omega2)?)?)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiscClassJson {
    pub disc: Number,
    pub p: u64,
    pub residue: u64,
    pub legendre: Legendre,
}

impl DiscClassJson {
    pub fn from_class<T: Scalar>(c: &DiscClass<T>) -> Self {
        DiscClassJson {
            disc: to_number(&c.disc),
            p: c.residue.modulus(),
            residue: c.residue.value(),
            legendre: c.legendre,
        }
    }

    /// Rebuilds the class as recorded; consistency is checked by the verifier.
    pub fn to_class<T: Scalar>(&self) -> Result<DiscClass<T>, JsonError> {
        let p = Prime::new(self.p)?;
        if self.residue >= self.p {
            return Err(JsonError::Invalid("residue out of range".into()));
        }
        Ok(DiscClass {
            disc: from_number(&self.disc)?,
            residue: p.elem(self.residue),
            legendre: self.legendre,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ResiduesJson {
    pub omega1_norm: u64,
    pub omega2_norm: u64,
    pub pairing: u64,
    pub disc: u64,
}

impl ResiduesJson {
    fn from_residues(r: &Residues) -> Self {
        ResiduesJson {
            omega1_norm: r.omega1_norm.value(),
            omega2_norm: r.omega2_norm.value(),
            pairing: r.pairing.value(),
            disc: r.disc.value(),
        }
    }

    fn to_residues(self, p: Prime) -> Result<Residues, JsonError> {
        let e = |v: u64| {
            if v < p.get() {
                Ok(p.elem(v))
            } else {
                Err(JsonError::Invalid(format!("residue {v} out of range")))
            }
        };
        Ok(Residues {
            omega1_norm: e(self.omega1_norm)?,
            omega2_norm: e(self.omega2_norm)?,
            pairing: e(self.pairing)?,
            disc: e(self.disc)?,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StepJson {
    pub kind: String,
    pub direction: Vec<Number>,
    #[serde(rename = "N")]
    pub n: Option<Number>,
    pub target: String,
    pub residues_before: ResiduesJson,
    pub residues_after: ResiduesJson,
}

fn kind_from_str(s: &str) -> Result<StepKind, JsonError> {
    match s {
        "Step1" => Ok(StepKind::Step1),
        "Step2" => Ok(StepKind::Step2),
        "Step3" => Ok(StepKind::Step3),
        "Step4" => Ok(StepKind::Step4),
        _ => Err(JsonError::Invalid(format!("unknown step kind {s:?}"))),
    }
}

fn target_name(t: Target) -> &'static str {
    match t {
        Target::Omega1 => "omega1",
        Target::Omega2 => "omega2",
    }
}

fn target_from_str(s: &str) -> Result<Target, JsonError> {
    match s {
        "omega1" => Ok(Target::Omega1),
        "omega2" => Ok(Target::Omega2),
        _ => Err(JsonError::Invalid(format!("unknown target {s:?}"))),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CertificateJson {
    pub d: u64,
    pub p: u64,
    pub epsilon: String,
    pub input: PlaneJson,
    pub output: PlaneJson,
    pub steps: Vec<StepJson>,
    #[serde(rename = "final")]
    pub final_class: DiscClassJson,
    pub sqrt_witness: u64,
    pub distance: String,
}

impl CertificateJson {
    pub fn from_certificate<T: Scalar>(c: &PerturbCertificate<T>) -> Result<Self, JsonError> {
        let input = PlaneJson::from_plane(&c.input)?;
        Ok(CertificateJson {
            d: input.d,
            p: c.p.get(),
            epsilon: format_rational(&c.epsilon),
            input,
            output: PlaneJson::from_plane(&c.output)?,
            steps: c
                .steps
                .iter()
                .map(|s| StepJson {
                    kind: s.kind.name().to_string(),
                    direction: to_numbers(&s.direction),
                    n: s.n.as_ref().map(to_number),
                    target: target_name(s.target).to_string(),
                    residues_before: ResiduesJson::from_residues(&s.residues_before),
                    residues_after: ResiduesJson::from_residues(&s.residues_after),
                })
                .collect(),
            final_class: DiscClassJson::from_class(&c.final_class),
            sqrt_witness: c.sqrt_witness.value(),
            distance: format_rational(&c.distance),
        })
    }

    pub fn to_certificate<T: Scalar>(&self) -> Result<PerturbCertificate<T>, JsonError> {
        let p = Prime::new(self.p)?;
        if self.input.d != self.d || self.output.d != self.d {
            return Err(JsonError::Invalid("planes disagree with the certificate degree".into()));
        }
        let l = self.input.lattice()?;
        let steps = self
            .steps
            .iter()
            .map(|s| {
                Ok(PerturbStep {
                    kind: kind_from_str(&s.kind)?,
                    direction: from_numbers(&s.direction)?,
                    n: s.n.as_ref().map(from_number).transpose()?,
                    target: target_from_str(&s.target)?,
                    residues_before: s.residues_before.to_residues(p)?,
                    residues_after: s.residues_after.to_residues(p)?,
                })
            })
            .collect::<Result<Vec<_>, JsonError>>()?;
        if self.sqrt_witness >= self.p {
            return Err(JsonError::Invalid("witness out of range".into()));
        }
        if self.final_class.p != self.p {
            return Err(JsonError::Invalid("final class uses a different prime".into()));
        }
        Ok(PerturbCertificate {
            p,
            epsilon: rational(&self.epsilon)?,
            input: self.input.to_plane_in(l.clone())?,
            output: self.output.to_plane_in(l)?,
            steps,
            final_class: self.final_class.to_class()?,
            sqrt_witness: p.elem(self.sqrt_witness),
            distance: rational(&self.distance)?,
        })
    }
}

/// Pretty JSON text of any document in this module.
pub fn to_pretty<S: Serialize>(doc: &S) -> Result<String, JsonError> {
    Ok(serde_json::to_string_pretty(doc)?)
}
