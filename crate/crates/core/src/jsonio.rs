//! Wire formats: complex numbers as `[re, im]` pairs, matrices row-major,
//! the point at infinity as the string `"inf"`.

use nalgebra::{DMatrix, DVector};
use serde::de::Error as DeError;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::branch::BranchData;
use crate::domains::{DomainPoint, DomainSpec, DomainValue};
use crate::germ::DiskIsometry;
use crate::poly::Poly;
use crate::rational::{RationalMap, SpherePoint};
use crate::rigidity::WeightedCandidate;
use crate::unitary::UnitaryFrame;
use crate::{c64, C64};

fn c_to_pair(z: C64) -> [f64; 2] {
    [z.re, z.im]
}

fn pair_to_c(p: [f64; 2]) -> C64 {
    c64(p[0], p[1])
}

fn poly_to_pairs(p: &Poly) -> Vec<[f64; 2]> {
    p.coeffs().iter().map(|&c| c_to_pair(c)).collect()
}

fn pairs_to_poly(pairs: Vec<[f64; 2]>) -> Poly {
    Poly::new(pairs.into_iter().map(pair_to_c).collect())
}

#[derive(Serialize, Deserialize)]
struct RationalMapRepr {
    num: Vec<[f64; 2]>,
    den: Vec<[f64; 2]>,
}

impl Serialize for RationalMap {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        RationalMapRepr {
            num: poly_to_pairs(self.num()),
            den: poly_to_pairs(self.den()),
        }
        .serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for RationalMap {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let repr = RationalMapRepr::deserialize(deserializer)?;
        RationalMap::new(pairs_to_poly(repr.num), pairs_to_poly(repr.den))
            .map_err(|e| D::Error::custom(e.to_string()))
    }
}

#[derive(Serialize, Deserialize)]
struct FlagsRepr {
    lower_block_upper_triangular: bool,
    constant_diagonal: Option<[f64; 2]>,
}

#[derive(Serialize, Deserialize)]
struct FrameRepr {
    dim: usize,
    entries: Vec<Vec<[f64; 2]>>,
    flags: FlagsRepr,
}

impl Serialize for UnitaryFrame {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        let k = self.dim();
        let entries = (0..k)
            .map(|i| (0..k).map(|j| c_to_pair(self.entries()[(i, j)])).collect())
            .collect();
        FrameRepr {
            dim: k,
            entries,
            flags: FlagsRepr {
                lower_block_upper_triangular: self.flags().lower_block_upper_triangular,
                constant_diagonal: self.flags().constant_diagonal.map(c_to_pair),
            },
        }
        .serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for UnitaryFrame {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let repr = FrameRepr::deserialize(deserializer)?;
        let k = repr.dim;
        if repr.entries.len() != k || repr.entries.iter().any(|row| row.len() != k) {
            return Err(D::Error::custom("entries do not form a dim×dim matrix"));
        }
        let m = DMatrix::from_fn(k, k, |i, j| pair_to_c(repr.entries[i][j]));
        // flags are re-detected; the stored ones are informational
        UnitaryFrame::check_unitary(m).map_err(|e| D::Error::custom(e.to_string()))
    }
}

#[derive(Serialize, Deserialize)]
struct BundleRepr {
    frame: UnitaryFrame,
    #[serde(rename = "R")]
    r: RationalMap,
    components: Vec<RationalMap>,
    degenerate: bool,
}

impl Serialize for DiskIsometry {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        BundleRepr {
            frame: self.frame().clone(),
            r: self.rational().clone(),
            components: self.components().to_vec(),
            degenerate: self.is_degenerate(),
        }
        .serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for DiskIsometry {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let repr = BundleRepr::deserialize(deserializer)?;
        Ok(DiskIsometry::from_parts(
            repr.frame,
            repr.r,
            repr.components,
            repr.degenerate,
        ))
    }
}

#[derive(Serialize, Deserialize)]
#[serde(untagged)]
enum SphereRepr {
    Finite([f64; 2]),
    Symbol(String),
}

impl Serialize for SpherePoint {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        match self {
            SpherePoint::Finite(z) => SphereRepr::Finite(c_to_pair(*z)),
            SpherePoint::Infinity => SphereRepr::Symbol("inf".into()),
        }
        .serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for SpherePoint {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        match SphereRepr::deserialize(deserializer)? {
            SphereRepr::Finite(p) => Ok(SpherePoint::Finite(pair_to_c(p))),
            SphereRepr::Symbol(s) if s == "inf" => Ok(SpherePoint::Infinity),
            SphereRepr::Symbol(s) => Err(D::Error::custom(format!("unknown point `{s}`"))),
        }
    }
}

#[derive(Serialize)]
struct RamificationEntry {
    point: SpherePoint,
    order: usize,
}

#[derive(Serialize)]
struct BranchEntry {
    value: SpherePoint,
    total_branching: usize,
}

#[derive(Serialize)]
struct BranchDataRepr {
    ramification: Vec<RamificationEntry>,
    branch: Vec<BranchEntry>,
    location_counts: [usize; 3],
}

impl Serialize for BranchData {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        BranchDataRepr {
            ramification: self
                .ramification
                .iter()
                .map(|(point, order)| RamificationEntry {
                    point: *point,
                    order: *order,
                })
                .collect(),
            branch: self
                .branch
                .iter()
                .map(|(value, total_branching)| BranchEntry {
                    value: *value,
                    total_branching: *total_branching,
                })
                .collect(),
            location_counts: [
                self.location_counts.0,
                self.location_counts.1,
                self.location_counts.2,
            ],
        }
        .serialize(serializer)
    }
}

#[derive(Serialize, Deserialize)]
struct CandidateRepr {
    components: Vec<Vec<RationalMap>>,
    weights: Vec<f64>,
}

impl Serialize for WeightedCandidate {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        CandidateRepr {
            components: self.components().to_vec(),
            weights: self.weights().to_vec(),
        }
        .serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for WeightedCandidate {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let repr = CandidateRepr::deserialize(deserializer)?;
        WeightedCandidate::new(repr.components, repr.weights)
            .map_err(|e| D::Error::custom(e.to_string()))
    }
}

// wire tags are the classical type numerals
#[allow(clippy::upper_case_acronyms)]
#[derive(Serialize, Deserialize)]
#[serde(tag = "kind")]
enum SpecRepr {
    I { p: usize, q: usize },
    II { m: usize },
    III { m: usize },
    IV { n: usize },
}

impl From<DomainSpec> for SpecRepr {
    fn from(s: DomainSpec) -> Self {
        match s {
            DomainSpec::TypeI { p, q } => SpecRepr::I { p, q },
            DomainSpec::TypeII { m } => SpecRepr::II { m },
            DomainSpec::TypeIII { m } => SpecRepr::III { m },
            DomainSpec::TypeIV { n } => SpecRepr::IV { n },
        }
    }
}

impl From<SpecRepr> for DomainSpec {
    fn from(s: SpecRepr) -> Self {
        match s {
            SpecRepr::I { p, q } => DomainSpec::TypeI { p, q },
            SpecRepr::II { m } => DomainSpec::TypeII { m },
            SpecRepr::III { m } => DomainSpec::TypeIII { m },
            SpecRepr::IV { n } => DomainSpec::TypeIV { n },
        }
    }
}

impl Serialize for DomainSpec {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        SpecRepr::from(*self).serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for DomainSpec {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        Ok(SpecRepr::deserialize(deserializer)?.into())
    }
}

#[derive(Serialize, Deserialize)]
#[serde(untagged)]
enum ValueRepr {
    Matrix(Vec<Vec<[f64; 2]>>),
    Vector(Vec<[f64; 2]>),
}

#[derive(Serialize, Deserialize)]
struct PointRepr {
    domain: DomainSpec,
    value: ValueRepr,
}

impl Serialize for DomainPoint {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        let value = match self.value() {
            DomainValue::Matrix(m) => ValueRepr::Matrix(
                (0..m.nrows())
                    .map(|i| (0..m.ncols()).map(|j| c_to_pair(m[(i, j)])).collect())
                    .collect(),
            ),
            DomainValue::Vector(v) => ValueRepr::Vector(v.iter().map(|&z| c_to_pair(z)).collect()),
        };
        PointRepr {
            domain: self.spec(),
            value,
        }
        .serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for DomainPoint {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let repr = PointRepr::deserialize(deserializer)?;
        let value = match repr.value {
            ValueRepr::Matrix(rows) => {
                let r = rows.len();
                let c = rows.first().map_or(0, |row| row.len());
                if rows.iter().any(|row| row.len() != c) {
                    return Err(D::Error::custom("ragged matrix"));
                }
                DomainValue::Matrix(DMatrix::from_fn(r, c, |i, j| pair_to_c(rows[i][j])))
            }
            ValueRepr::Vector(v) => {
                DomainValue::Vector(DVector::from_vec(v.into_iter().map(pair_to_c).collect()))
            }
        };
        DomainPoint::new(repr.domain, value).map_err(|e| D::Error::custom(e.to_string()))
    }
}
