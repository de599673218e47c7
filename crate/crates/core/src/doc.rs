//! JSON documents for spaces, vectors, blocks and operators.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::blocks::{Block, BlockFunctional, FunctionalForm};
use crate::criteria::Thm13Witness;
use crate::error::{Result, XpError};
use crate::operators::{
    BlockProjection, BlockSystem, DenseOperator, GramProjector, LinearOperator,
};
use crate::space::{SpVector, SupportSet, WeightedSpace};
use crate::weights::WeightFamily;

/// Weights given inline or by family.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum WeightsSpec {
    List(Vec<f64>),
    Family(WeightFamily),
}

impl WeightsSpec {
    pub fn generate(&self) -> Result<Vec<f64>> {
        match self {
            WeightsSpec::List(v) => Ok(v.clone()),
            WeightsSpec::Family(f) => f.generate(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpaceDoc {
    pub p: f64,
    pub weights: WeightsSpec,
}

impl SpaceDoc {
    pub fn build(&self) -> Result<Arc<WeightedSpace>> {
        WeightedSpace::new(self.p, self.weights.generate()?)
    }

    pub fn from_space(space: &WeightedSpace) -> Self {
        Self {
            p: space.p(),
            weights: WeightsSpec::List(space.weights().to_vec()),
        }
    }
}

/// `{"p", "weights", "entries": [[n, value], ...]}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VectorDoc {
    #[serde(flatten)]
    pub space: SpaceDoc,
    pub entries: Vec<(usize, f64)>,
}

impl VectorDoc {
    pub fn build(&self) -> Result<SpVector> {
        SpVector::new(&self.space.build()?, self.entries.iter().copied())
    }

    pub fn from_vector(x: &SpVector) -> Self {
        Self {
            space: SpaceDoc::from_space(x.space()),
            entries: x.entries().to_vec(),
        }
    }
}

/// Several vectors over one space: `{"p", "weights", "vectors": [[[n, v], ...], ...]}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VectorsDoc {
    #[serde(flatten)]
    pub space: SpaceDoc,
    pub vectors: Vec<Vec<(usize, f64)>>,
}

impl VectorsDoc {
    pub fn build(&self) -> Result<Vec<SpVector>> {
        let space = self.space.build()?;
        build_list(&space, &self.vectors)
    }

    pub fn from_vectors(space: &WeightedSpace, v: &[SpVector]) -> Self {
        Self {
            space: SpaceDoc::from_space(space),
            vectors: v.iter().map(|x| x.entries().to_vec()).collect(),
        }
    }
}

/// Builds each entry list as a vector of `space`.
pub fn build_list(
    space: &Arc<WeightedSpace>,
    lists: &[Vec<(usize, f64)>],
) -> Result<Vec<SpVector>> {
    lists
        .iter()
        .map(|e| SpVector::new(space, e.iter().copied()))
        .collect()
}

/// Constants of the witness criterion.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Thm13Constants {
    pub c: f64,
    pub delta: f64,
    pub eps: f64,
    pub eps_prime: f64,
}

/// `{"x": <vector>, "E": [...], "N": n}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WitnessDoc {
    pub x: VectorDoc,
    #[serde(rename = "E")]
    pub e: SupportSet,
    #[serde(rename = "N")]
    pub n: usize,
}

impl WitnessDoc {
    pub fn build(&self, k: &Thm13Constants) -> Result<Thm13Witness> {
        Ok(Thm13Witness {
            x: self.x.build()?,
            e: self.e.clone(),
            n: self.n,
            c: k.c,
            delta: k.delta,
            eps: k.eps,
            eps_prime: k.eps_prime,
        })
    }

    pub fn from_witness(w: &Thm13Witness) -> Self {
        Self {
            x: VectorDoc::from_vector(&w.x),
            e: w.e.clone(),
            n: w.n,
        }
    }
}

/// Generator output: shared constants and a list of witnesses.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WitnessSetDoc {
    pub constants: Thm13Constants,
    pub witnesses: Vec<WitnessDoc>,
}

/// A block inside a space given elsewhere. `support` defaults to the
/// support of `entries`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BlockDoc {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub support: Option<SupportSet>,
    #[serde(rename = "E")]
    pub e: SupportSet,
    pub entries: Vec<(usize, f64)>,
    pub delta: f64,
    pub c: f64,
    #[serde(default, skip_serializing_if = "is_default_form")]
    pub form: FunctionalForm,
}

fn is_default_form(f: &FunctionalForm) -> bool {
    *f == FunctionalForm::default()
}

impl BlockDoc {
    pub fn build(&self, space: &Arc<WeightedSpace>, checked: bool) -> Result<Block> {
        let v = SpVector::new(space, self.entries.iter().copied())?;
        let support = self.support.clone().unwrap_or_else(|| v.support());
        let b = if checked {
            Block::new(support, v, self.e.clone(), self.delta, self.c)?
        } else {
            Block::new_unchecked(support, v, self.e.clone(), self.delta, self.c)?
        };
        Ok(b.with_form(self.form))
    }

    pub fn from_block(b: &Block) -> Self {
        Self {
            support: Some(b.support().clone()),
            e: b.eset().clone(),
            entries: b.vector().entries().to_vec(),
            delta: b.delta(),
            c: b.c(),
            form: b.form(),
        }
    }
}

/// A block system: `{"p", "weights", "blocks": [...], "delta", "c"}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SystemDoc {
    #[serde(flatten)]
    pub space: SpaceDoc,
    pub blocks: Vec<BlockDoc>,
    pub delta: f64,
    pub c: f64,
}

impl SystemDoc {
    /// Builds the system; `checked` enforces normalization and conditions.
    pub fn build_in(&self, space: &Arc<WeightedSpace>, checked: bool) -> Result<BlockSystem> {
        let blocks = self
            .blocks
            .iter()
            .map(|b| b.build(space, false))
            .collect::<Result<Vec<_>>>()?;
        if checked {
            BlockSystem::new(blocks, self.delta, self.c)
        } else {
            BlockSystem::new_unchecked(blocks, self.delta, self.c)
        }
    }

    pub fn build(&self, checked: bool) -> Result<BlockSystem> {
        self.build_in(&self.space.build()?, checked)
    }

    pub fn from_system(sys: &BlockSystem) -> Self {
        Self {
            space: SpaceDoc::from_space(sys.space()),
            blocks: sys.blocks().iter().map(BlockDoc::from_block).collect(),
            delta: sys.delta(),
            c: sys.c(),
        }
    }
}

/// Operators accepted on the command line.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum OperatorDoc {
    BlockProjection {
        #[serde(flatten)]
        system: SystemDoc,
    },
    Gram {
        #[serde(flatten)]
        space: SpaceDoc,
        basis: Vec<Vec<(usize, f64)>>,
    },
    Matrix {
        #[serde(flatten)]
        space: SpaceDoc,
        rows: Vec<Vec<f64>>,
    },
}

/// A built operator.
pub enum AnyOperator {
    Block(BlockProjection),
    Gram(GramProjector),
    Matrix(DenseOperator),
}

impl AnyOperator {
    pub fn as_dyn(&self) -> &dyn LinearOperator {
        match self {
            AnyOperator::Block(p) => p,
            AnyOperator::Gram(q) => q,
            AnyOperator::Matrix(m) => m,
        }
    }
}

impl OperatorDoc {
    pub fn space_doc(&self) -> &SpaceDoc {
        match self {
            OperatorDoc::BlockProjection { system } => &system.space,
            OperatorDoc::Gram { space, .. } | OperatorDoc::Matrix { space, .. } => space,
        }
    }

    pub fn build_in(&self, space: &Arc<WeightedSpace>) -> Result<AnyOperator> {
        match self {
            OperatorDoc::BlockProjection { system } => Ok(AnyOperator::Block(
                BlockProjection::new(system.build_in(space, true)?),
            )),
            OperatorDoc::Gram { basis, .. } => Ok(AnyOperator::Gram(GramProjector::new(
                build_list(space, basis)?,
            )?)),
            OperatorDoc::Matrix { rows, .. } => {
                Ok(AnyOperator::Matrix(DenseOperator::from_rows(space, rows)?))
            }
        }
    }

    pub fn build(&self) -> Result<AnyOperator> {
        self.build_in(&self.space_doc().build()?)
    }
}

/// Parses a support set given as a list of 1-based indices.
pub fn support_from(indices: &[usize], space: &WeightedSpace) -> Result<SupportSet> {
    let s = SupportSet::from(indices.to_vec());
    if s.len() != indices.len() {
        return Err(XpError::InvalidParameter(
            "support set lists an index twice".into(),
        ));
    }
    space.check_set(&s)?;
    Ok(s)
}
