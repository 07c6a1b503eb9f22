//! File formats: tables, factor systems, embeddings and wreath specs.
//!
//! All documents are JSON. Reading is whitespace-insensitive; writing is
//! canonical (two-space pretty printing, fixed field order, trailing
//! newline), so rewriting a canonical file is byte-identical.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::Error;
use crate::products::{CentralEmbedding, SmashedSpec};
use crate::subquot::{QuotientTable, SubStructure};
use crate::table::MagmaTable;
use crate::wreath::WreathSpec;

/// The shared table document: name, order, element names and row-major cells.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TableDoc {
    pub name: String,
    pub order: usize,
    pub elements: Vec<String>,
    pub table: Vec<Vec<usize>>,
}

impl TableDoc {
    pub fn from_table(t: &MagmaTable) -> Self {
        let n = t.order();
        let table = (0..n)
            .map(|a| {
                (0..n)
                    .map(|b| t.cells()[a * n + b] as usize)
                    .collect()
            })
            .collect();
        TableDoc {
            name: t.name().to_string(),
            order: n,
            elements: t.elem_names().to_vec(),
            table,
        }
    }

    pub fn to_table(&self) -> Result<MagmaTable, Error> {
        if self.elements.len() != self.order {
            return Err(Error::BadTable {
                table: self.name.clone(),
                msg: format!(
                    "order {} does not match {} element names",
                    self.order,
                    self.elements.len()
                ),
            });
        }
        MagmaTable::from_rows(self.name.clone(), self.elements.clone(), &self.table)
    }
}

fn canonical_json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("serializable document");
    s.push('\n');
    s
}

fn parse_error(path: &Path, err: serde_json::Error) -> Error {
    Error::Parse {
        file: path.display().to_string(),
        msg: err.to_string(),
    }
}

pub fn table_to_string(t: &MagmaTable) -> String {
    canonical_json(&TableDoc::from_table(t))
}

pub fn table_from_str(s: &str, origin: &str) -> Result<MagmaTable, Error> {
    let doc: TableDoc = serde_json::from_str(s).map_err(|e| Error::Parse {
        file: origin.to_string(),
        msg: e.to_string(),
    })?;
    doc.to_table()
}

pub fn read_table(path: &Path) -> Result<MagmaTable, Error> {
    let text = std::fs::read_to_string(path)?;
    let doc: TableDoc = serde_json::from_str(&text).map_err(|e| parse_error(path, e))?;
    doc.to_table()
}

pub fn write_table(path: &Path, t: &MagmaTable) -> Result<(), Error> {
    std::fs::write(path, table_to_string(t))?;
    Ok(())
}

/// A table given inline or by path (relative paths resolve against the
/// referencing document).
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(untagged)]
pub enum TableRef {
    Path(String),
    Inline(TableDoc),
}

impl TableRef {
    pub fn load(&self, base: &Path) -> Result<MagmaTable, Error> {
        match self {
            TableRef::Inline(doc) => doc.to_table(),
            TableRef::Path(p) => {
                let path = base.join(p);
                read_table(&path)
            }
        }
    }

    pub fn inline(t: &MagmaTable) -> Self {
        TableRef::Inline(TableDoc::from_table(t))
    }
}

fn default_strict_unit() -> bool {
    true
}

/// A factor system document: carrier tables, the shared central group with
/// its embeddings, and the four factor arrays.
///
/// Shapes: `phi` is |A| x |B| of B indices, `eta` |A| x |A| x |B| of Z
/// indices, `kappa` |A| x |B| x |B| of Z indices, `xi` |A||B| x |A||B| of Z
/// indices over a-major pair indices.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FactorDoc {
    pub a: TableRef,
    pub b: TableRef,
    pub z: TableRef,
    pub into_a: Vec<usize>,
    pub into_b: Vec<usize>,
    pub phi: Vec<Vec<usize>>,
    pub eta: Vec<Vec<Vec<usize>>>,
    pub kappa: Vec<Vec<Vec<usize>>>,
    pub xi: Vec<Vec<usize>>,
    #[serde(default = "default_strict_unit")]
    pub strict_unit: bool,
}

fn embedding_from_indices(
    z: MagmaTable,
    a: &MagmaTable,
    b: &MagmaTable,
    into_a: &[usize],
    into_b: &[usize],
) -> Result<CentralEmbedding, Error> {
    let map = |t: &MagmaTable, idxs: &[usize]| -> Result<Vec<_>, Error> {
        idxs.iter().map(|&i| t.element(i)).collect()
    };
    CentralEmbedding::new(z, map(a, into_a)?, map(b, into_b)?)
}

fn flatten2(v: &[Vec<usize>], rows: usize, cols: usize, what: &str) -> Result<Vec<u32>, Error> {
    if v.len() != rows || v.iter().any(|r| r.len() != cols) {
        return Err(Error::BadTable {
            table: what.to_string(),
            msg: format!("expected shape {rows} x {cols}"),
        });
    }
    Ok(v.iter().flatten().map(|&x| x as u32).collect())
}

fn flatten3(
    v: &[Vec<Vec<usize>>],
    d0: usize,
    d1: usize,
    d2: usize,
    what: &str,
) -> Result<Vec<u32>, Error> {
    if v.len() != d0 || v.iter().any(|m| m.len() != d1 || m.iter().any(|r| r.len() != d2)) {
        return Err(Error::BadTable {
            table: what.to_string(),
            msg: format!("expected shape {d0} x {d1} x {d2}"),
        });
    }
    Ok(v.iter().flatten().flatten().map(|&x| x as u32).collect())
}

impl FactorDoc {
    pub fn load(&self, base: &Path) -> Result<SmashedSpec, Error> {
        let a = self.a.load(base)?;
        let b = self.b.load(base)?;
        let z = self.z.load(base)?;
        let emb = embedding_from_indices(z, &a, &b, &self.into_a, &self.into_b)?;
        let (na, nb) = (a.order(), b.order());
        let phi = flatten2(&self.phi, na, nb, "phi")?;
        let eta = flatten3(&self.eta, na, na, nb, "eta")?;
        let kappa = flatten3(&self.kappa, na, nb, nb, "kappa")?;
        let xi = flatten2(&self.xi, na * nb, na * nb, "xi")?;
        let mut spec = SmashedSpec::new(a, b, emb, phi, eta, kappa, xi)?;
        spec.strict_unit = self.strict_unit;
        Ok(spec)
    }

    pub fn from_spec(spec: &SmashedSpec) -> Self {
        let (na, nb) = (spec.a.order(), spec.b.order());
        let chunk2 =
            |v: &[u32], cols: usize| -> Vec<Vec<usize>> {
                v.chunks(cols)
                    .map(|c| c.iter().map(|&x| x as usize).collect())
                    .collect()
            };
        let chunk3 = |v: &[u32], d1: usize, d2: usize| -> Vec<Vec<Vec<usize>>> {
            v.chunks(d1 * d2)
                .map(|m| chunk2(m, d2))
                .collect()
        };
        FactorDoc {
            a: TableRef::inline(&spec.a),
            b: TableRef::inline(&spec.b),
            z: TableRef::inline(&spec.z.z),
            into_a: spec.z.into_a.iter().map(|e| e.index()).collect(),
            into_b: spec.z.into_b.iter().map(|e| e.index()).collect(),
            phi: chunk2(&spec.phi, nb),
            eta: chunk3(&spec.eta, na, nb),
            kappa: chunk3(&spec.kappa, nb, nb),
            xi: chunk2(&spec.xi, na * nb),
            strict_unit: spec.strict_unit,
        }
    }

    pub fn to_string_canonical(&self) -> String {
        canonical_json(self)
    }
}

pub fn read_factors(path: &Path) -> Result<SmashedSpec, Error> {
    let text = std::fs::read_to_string(path)?;
    let doc: FactorDoc = serde_json::from_str(&text).map_err(|e| parse_error(path, e))?;
    doc.load(path.parent().unwrap_or(Path::new(".")))
}

/// A central group with its two embeddings, used by the factor search.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EmbeddingDoc {
    pub z: TableRef,
    pub into_a: Vec<usize>,
    pub into_b: Vec<usize>,
}

impl EmbeddingDoc {
    pub fn load(
        &self,
        base: &Path,
        a: &MagmaTable,
        b: &MagmaTable,
    ) -> Result<CentralEmbedding, Error> {
        let z = self.z.load(base)?;
        embedding_from_indices(z, a, b, &self.into_a, &self.into_b)
    }
}

pub fn read_embedding(
    path: &Path,
    a: &MagmaTable,
    b: &MagmaTable,
) -> Result<CentralEmbedding, Error> {
    let text = std::fs::read_to_string(path)?;
    let doc: EmbeddingDoc = serde_json::from_str(&text).map_err(|e| parse_error(path, e))?;
    doc.load(path.parent().unwrap_or(Path::new(".")), a, b)
}

/// A wreath product specification document.
///
/// `a_members` lists the submetagroup as D indices; the factor arrays are
/// indexed by the induced standalone A table (members in ascending index
/// order). The transversal is optional and computed greedily when absent.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct WreathDoc {
    pub d: TableRef,
    pub a_members: Vec<usize>,
    pub b: TableRef,
    pub z: TableRef,
    pub into_a: Vec<usize>,
    pub into_b: Vec<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub transversal: Option<Vec<usize>>,
    pub phi: Vec<Vec<usize>>,
    pub eta: Vec<Vec<Vec<usize>>>,
    pub kappa: Vec<Vec<Vec<usize>>>,
    pub xi: Vec<Vec<usize>>,
    #[serde(default = "default_strict_unit")]
    pub strict_unit: bool,
}

impl WreathDoc {
    pub fn load(&self, base: &Path) -> Result<WreathSpec, Error> {
        let d = self.d.load(base)?;
        let b = self.b.load(base)?;
        let members = self
            .a_members
            .iter()
            .map(|&i| d.element(i))
            .collect::<Result<Vec<_>, _>>()?;
        let a = SubStructure::new(&d, members)?;
        let (a_table, _) = a.as_table(&d, format!("{}|A", d.name()))?;
        let z = self.z.load(base)?;
        let emb = embedding_from_indices(z, &a_table, &b, &self.into_a, &self.into_b)?;
        let (na, nb) = (a_table.order(), b.order());
        let phi = flatten2(&self.phi, na, nb, "phi")?;
        let eta = flatten3(&self.eta, na, na, nb, "eta")?;
        let kappa = flatten3(&self.kappa, na, nb, nb, "kappa")?;
        let xi = flatten2(&self.xi, na * nb, na * nb, "xi")?;
        let mut factors = SmashedSpec::new(a_table, b, emb, phi, eta, kappa, xi)?;
        factors.strict_unit = self.strict_unit;
        let trans = self
            .transversal
            .as_ref()
            .map(|v| v.iter().map(|&i| d.element(i)).collect::<Result<Vec<_>, _>>())
            .transpose()?;
        WreathSpec::assemble(d, a, trans, factors)
    }

    pub fn from_spec(spec: &WreathSpec) -> Self {
        let fd = FactorDoc::from_spec(&spec.factors);
        WreathDoc {
            d: TableRef::inline(&spec.d),
            a_members: spec.a.members().iter().map(|e| e.index()).collect(),
            b: fd.b,
            z: fd.z,
            into_a: fd.into_a,
            into_b: fd.into_b,
            transversal: Some(spec.trans.members().iter().map(|e| e.index()).collect()),
            phi: fd.phi,
            eta: fd.eta,
            kappa: fd.kappa,
            xi: fd.xi,
            strict_unit: spec.factors.strict_unit,
        }
    }

    pub fn to_string_canonical(&self) -> String {
        canonical_json(self)
    }
}

pub fn read_wreath(path: &Path) -> Result<WreathSpec, Error> {
    let text = std::fs::read_to_string(path)?;
    let doc: WreathDoc = serde_json::from_str(&text).map_err(|e| parse_error(path, e))?;
    doc.load(path.parent().unwrap_or(Path::new(".")))
}

/// Sidecar mapping of a quotient: parent element index to coset index.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct QuotientSidecar {
    pub parent: String,
    pub coset_of: Vec<usize>,
}

pub fn quotient_sidecar(parent: &MagmaTable, q: &QuotientTable) -> String {
    canonical_json(&QuotientSidecar {
        parent: parent.name().to_string(),
        coset_of: q.coset_of.clone(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gen;

    #[test]
    fn table_roundtrip_is_byte_identical() {
        let t = gen::quaternion8();
        let s1 = table_to_string(&t);
        let back = table_from_str(&s1, "mem").unwrap();
        let s2 = table_to_string(&back);
        assert_eq!(s1, s2);
        assert!(back.same_op(&t));
    }

    #[test]
    fn whitespace_insensitive_reading() {
        let t = gen::cyclic(2);
        let compact = serde_json::to_string(&TableDoc::from_table(&t)).unwrap();
        let back = table_from_str(&compact, "mem").unwrap();
        assert!(back.same_op(&t));
    }

    #[test]
    fn factor_doc_roundtrip() {
        let spec = SmashedSpec::trivial(gen::cyclic(2), gen::cyclic(3)).unwrap();
        let doc = FactorDoc::from_spec(&spec);
        let s1 = doc.to_string_canonical();
        let doc2: FactorDoc = serde_json::from_str(&s1).unwrap();
        let spec2 = doc2.load(Path::new(".")).unwrap();
        assert_eq!(spec.phi, spec2.phi);
        assert_eq!(s1, doc2.to_string_canonical());
    }

    #[test]
    fn bad_index_is_a_parse_time_error() {
        let json = r#"{"name":"t","order":2,"elements":["a","b"],"table":[[0,1],[1,2]]}"#;
        assert!(table_from_str(json, "mem").is_err());
    }
}
