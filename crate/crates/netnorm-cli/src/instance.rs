//! Instance file formats.
//!
//! One JSON document per instance with a top-level `kind` tag. Matrices are
//! `{"dim": n, "entries": [[re, im], ...]}` (square, row-major) or
//! `{"rows": r, "cols": c, "entries": [...]}` for rectangular ones.

use netnorm::algorithms::InputFamily;
use netnorm::feascheck::Functionals;
use netnorm::jsonio::MatrixJson;
use netnorm::matlib::{DensityMatrix, Exponent, HermitianMatrix};
use netnorm::model::{
    BElements, BanachDescriptor, EbChannel, GeneralDecomposition, LoccTerm, MultipartiteLocc,
    NormFamily, OneWayLocc,
};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct TermJson {
    #[serde(rename = "X")]
    pub x: MatrixJson,
    #[serde(rename = "Y")]
    pub y: MatrixJson,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct NodeJson {
    pub op: MatrixJson,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub children: Vec<NodeJson>,
}

/// Exponent field: a number or the string "inf".
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(untagged)]
pub enum AlphaJson {
    Number(f64),
    Text(String),
}

impl AlphaJson {
    pub fn to_exponent(&self) -> Result<Exponent<f64>, String> {
        match self {
            AlphaJson::Number(v) => Ok(Exponent::Finite(*v)),
            AlphaJson::Text(s) if s == "inf" => Ok(Exponent::Infinity),
            AlphaJson::Text(s) => Err(format!("unrecognized exponent {s:?} (number or \"inf\")")),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct SpaceJson {
    pub family: NormFamily,
    pub alpha: AlphaJson,
    pub dim: usize,
}

impl SpaceJson {
    pub fn to_descriptor(&self) -> Result<BanachDescriptor<f64>, String> {
        let e = self.alpha.to_exponent()?;
        netnorm::model::banach_constants(self.family, e, self.dim).map_err(|e| e.to_string())
    }
}

/// Top-level instance document.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum InstanceFile {
    Locc {
        d1: usize,
        d2: usize,
        terms: Vec<TermJson>,
    },
    Multiparty {
        dims: Vec<usize>,
        nodes: Vec<NodeJson>,
    },
    Channel {
        d1: usize,
        d2: usize,
        terms: Vec<TermJson>,
    },
    Matrix {
        matrix: MatrixJson,
    },
    General {
        d1: usize,
        xs: Vec<MatrixJson>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        y_matrices: Option<Vec<MatrixJson>>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        y_vectors: Option<Vec<Vec<f64>>>,
        space: SpaceJson,
    },
    Injective {
        a_family: InputFamily,
        a_dim: usize,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        xstar_matrices: Option<Vec<MatrixJson>>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        xstar_vectors: Option<Vec<Vec<f64>>>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        y_matrices: Option<Vec<MatrixJson>>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        y_vectors: Option<Vec<Vec<f64>>>,
        space: SpaceJson,
    },
}

impl InstanceFile {
    pub fn kind_name(&self) -> &'static str {
        match self {
            InstanceFile::Locc { .. } => "locc",
            InstanceFile::Multiparty { .. } => "multiparty",
            InstanceFile::Channel { .. } => "channel",
            InstanceFile::Matrix { .. } => "matrix",
            InstanceFile::General { .. } => "general",
            InstanceFile::Injective { .. } => "injective",
        }
    }

    pub fn to_locc(&self) -> Result<OneWayLocc<f64>, String> {
        match self {
            InstanceFile::Locc { d1, d2, terms } => {
                let mut out = Vec::with_capacity(terms.len());
                for (i, t) in terms.iter().enumerate() {
                    let x =
                        t.x.to_hermitian::<f64>()
                            .map_err(|e| format!("terms[{i}].X: {e}"))?;
                    let y =
                        t.y.to_hermitian::<f64>()
                            .map_err(|e| format!("terms[{i}].Y: {e}"))?;
                    out.push(LoccTerm { x, y });
                }
                OneWayLocc::new(*d1, *d2, out).map_err(|e| e.to_string())
            }
            other => Err(format!(
                "expected a locc instance, got {}",
                other.kind_name()
            )),
        }
    }

    pub fn to_channel(&self) -> Result<EbChannel<f64>, String> {
        match self {
            InstanceFile::Channel { d1, d2, terms } => {
                let mut out = Vec::with_capacity(terms.len());
                for (i, t) in terms.iter().enumerate() {
                    let x =
                        t.x.to_hermitian::<f64>()
                            .map_err(|e| format!("terms[{i}].X: {e}"))?;
                    let y =
                        t.y.to_hermitian::<f64>()
                            .map_err(|e| format!("terms[{i}].Y: {e}"))?;
                    let y = DensityMatrix::new(y).map_err(|e| format!("terms[{i}].Y: {e}"))?;
                    out.push((x, y));
                }
                EbChannel::new(*d1, *d2, out).map_err(|e| e.to_string())
            }
            other => Err(format!(
                "expected a channel instance, got {}",
                other.kind_name()
            )),
        }
    }

    pub fn to_matrix(&self) -> Result<netnorm::CMatrix64, String> {
        match self {
            InstanceFile::Matrix { matrix } => {
                matrix.to_cmatrix::<f64>().map_err(|e| e.to_string())
            }
            other => Err(format!(
                "expected a matrix instance, got {}",
                other.kind_name()
            )),
        }
    }

    pub fn to_multiparty(&self) -> Result<MultipartiteLocc<f64>, String> {
        match self {
            InstanceFile::Multiparty { dims, nodes } => nodes_to_tree(dims, nodes),
            other => Err(format!(
                "expected a multiparty instance, got {}",
                other.kind_name()
            )),
        }
    }

    pub fn to_general(&self) -> Result<(GeneralDecomposition<f64>, BanachDescriptor<f64>), String> {
        match self {
            InstanceFile::General {
                d1,
                xs,
                y_matrices,
                y_vectors,
                space,
            } => {
                let desc = space.to_descriptor()?;
                let xs: Vec<HermitianMatrix<f64>> = xs
                    .iter()
                    .enumerate()
                    .map(|(i, m)| m.to_hermitian::<f64>().map_err(|e| format!("xs[{i}]: {e}")))
                    .collect::<Result<_, _>>()?;
                let ys = parse_elements(y_matrices, y_vectors, "y")?;
                let g = GeneralDecomposition::new(*d1, xs, ys).map_err(|e| e.to_string())?;
                Ok((g, desc))
            }
            other => Err(format!(
                "expected a general instance, got {}",
                other.kind_name()
            )),
        }
    }

    #[allow(clippy::type_complexity)]
    pub fn to_injective(
        &self,
    ) -> Result<
        (
            Functionals<f64>,
            BElements<f64>,
            InputFamily,
            usize,
            BanachDescriptor<f64>,
        ),
        String,
    > {
        match self {
            InstanceFile::Injective {
                a_family,
                a_dim,
                xstar_matrices,
                xstar_vectors,
                y_matrices,
                y_vectors,
                space,
            } => {
                let desc = space.to_descriptor()?;
                let xstar = match (xstar_matrices, xstar_vectors) {
                    (Some(ms), None) => Functionals::Herm(
                        ms.iter()
                            .enumerate()
                            .map(|(i, m)| {
                                m.to_hermitian::<f64>()
                                    .map_err(|e| format!("xstar_matrices[{i}]: {e}"))
                            })
                            .collect::<Result<_, _>>()?,
                    ),
                    (None, Some(vs)) => Functionals::Real(vs.clone()),
                    _ => {
                        return Err(
                            "exactly one of xstar_matrices / xstar_vectors is required".into()
                        )
                    }
                };
                let ys = parse_elements(y_matrices, y_vectors, "y")?;
                Ok((xstar, ys, *a_family, *a_dim, desc))
            }
            other => Err(format!(
                "expected an injective instance, got {}",
                other.kind_name()
            )),
        }
    }
}

fn parse_elements(
    mats: &Option<Vec<MatrixJson>>,
    vecs: &Option<Vec<Vec<f64>>>,
    what: &str,
) -> Result<BElements<f64>, String> {
    match (mats, vecs) {
        (Some(ms), None) => Ok(BElements::Matrices(
            ms.iter()
                .enumerate()
                .map(|(i, m)| {
                    m.to_hermitian::<f64>()
                        .map_err(|e| format!("{what}_matrices[{i}]: {e}"))
                })
                .collect::<Result<_, _>>()?,
        )),
        (None, Some(vs)) => {
            for (i, v) in vs.iter().enumerate() {
                if v.iter().any(|x| !x.is_finite()) {
                    return Err(format!("{what}_vectors[{i}]: non-finite entry"));
                }
            }
            Ok(BElements::Vectors(vs.clone()))
        }
        _ => Err(format!(
            "exactly one of {what}_matrices / {what}_vectors is required"
        )),
    }
}

/// Convert the recursive node forest into the level-tensor representation,
/// enforcing uniform branching per level.
fn nodes_to_tree(dims: &[usize], nodes: &[NodeJson]) -> Result<MultipartiteLocc<f64>, String> {
    let l = dims.len();
    if l == 0 {
        return Err("dims must be nonempty".into());
    }
    let mut levels: Vec<Vec<HermitianMatrix<f64>>> = Vec::with_capacity(l);
    let mut counts: Vec<usize> = Vec::with_capacity(l);
    let mut frontier: Vec<&NodeJson> = nodes.iter().collect();
    counts.push(frontier.len());
    for level in 0..l {
        if frontier.is_empty() {
            return Err(format!("level {level} has no nodes"));
        }
        let mut ops = Vec::with_capacity(frontier.len());
        for (i, node) in frontier.iter().enumerate() {
            let h = node
                .op
                .to_hermitian::<f64>()
                .map_err(|e| format!("node at level {level}, index {i}: {e}"))?;
            ops.push(h);
        }
        levels.push(ops);
        if level + 1 < l {
            let child_count = frontier[0].children.len();
            if child_count == 0 {
                return Err(format!(
                    "node at level {level} is missing children ({l} levels declared)"
                ));
            }
            let mut next: Vec<&NodeJson> = Vec::with_capacity(frontier.len() * child_count);
            for (i, node) in frontier.iter().enumerate() {
                if node.children.len() != child_count {
                    return Err(format!(
                        "non-uniform branching at level {level}: node {i} has {} children, expected {child_count}",
                        node.children.len()
                    ));
                }
                next.extend(node.children.iter());
            }
            counts.push(child_count);
            frontier = next;
        } else {
            for (i, node) in frontier.iter().enumerate() {
                if !node.children.is_empty() {
                    return Err(format!(
                        "leaf node {i} at depth {l} unexpectedly has children"
                    ));
                }
            }
        }
    }
    MultipartiteLocc::new(dims.to_vec(), counts, levels).map_err(|e| e.to_string())
}
