//! Substructures, generated closures, the minimal central subgroup containing
//! all associators, and quotients by central subgroups.

use serde::Serialize;

use crate::classify::{classify_with, StructureReport};
use crate::error::Error;
use crate::table::{Element, Limits, MagmaTable};

/// A subset of a parent table that contains the identity and is closed under
/// multiplication and both divisions. Members are index-sorted.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SubStructure {
    members: Vec<Element>,
}

impl SubStructure {
    /// Validates closure of an explicit member set.
    pub fn new(parent: &MagmaTable, members: Vec<Element>) -> Result<Self, Error> {
        let e = parent.identity().ok_or_else(|| Error::NoIdentity {
            table: parent.name().to_string(),
        })?;
        let mut members = members;
        members.sort_unstable();
        members.dedup();
        let mut mask = vec![false; parent.order()];
        for m in &members {
            if m.index() >= parent.order() {
                return Err(Error::ElementOutOfRange {
                    table: parent.name().to_string(),
                    index: m.index(),
                    order: parent.order(),
                });
            }
            mask[m.index()] = true;
        }
        if !mask[e.index()] {
            return Err(Error::NotSubgroup {
                table: parent.name().to_string(),
                witness: e.index(),
            });
        }
        for &x in &members {
            for &y in &members {
                for v in [
                    parent.mul(x, y),
                    parent.left_div(x, y)?,
                    parent.right_div(x, y)?,
                ] {
                    if !mask[v.index()] {
                        return Err(Error::NotSubgroup {
                            table: parent.name().to_string(),
                            witness: v.index(),
                        });
                    }
                }
            }
        }
        Ok(SubStructure { members })
    }

    /// Smallest subset containing the generators and the identity, closed
    /// under multiplication and both divisions. Fixed-point iteration in
    /// index order.
    pub fn closure(parent: &MagmaTable, generators: &[Element]) -> Result<Self, Error> {
        let e = parent.identity().ok_or_else(|| Error::NoIdentity {
            table: parent.name().to_string(),
        })?;
        if !parent.is_quasigroup() {
            return Err(Error::NotQuasigroup {
                table: parent.name().to_string(),
                defect: parent.latin_defect().expect("non-quasigroup has defect"),
            });
        }
        let mut mask = vec![false; parent.order()];
        mask[e.index()] = true;
        for g in generators {
            if g.index() >= parent.order() {
                return Err(Error::ElementOutOfRange {
                    table: parent.name().to_string(),
                    index: g.index(),
                    order: parent.order(),
                });
            }
            mask[g.index()] = true;
        }
        loop {
            let members: Vec<Element> = collect(&mask);
            let mut grew = false;
            for &x in &members {
                for &y in &members {
                    for v in [parent.mul(x, y), parent.ld(x, y), parent.rd(x, y)] {
                        if !mask[v.index()] {
                            mask[v.index()] = true;
                            grew = true;
                        }
                    }
                }
            }
            if !grew {
                return Ok(SubStructure {
                    members: collect(&mask),
                });
            }
        }
    }

    pub fn members(&self) -> &[Element] {
        &self.members
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn contains(&self, e: Element) -> bool {
        self.members.binary_search(&e).is_ok()
    }

    /// Materializes the substructure as its own table.
    ///
    /// Returns the table together with the member list mapping sub-indices
    /// back to parent elements.
    pub fn as_table(
        &self,
        parent: &MagmaTable,
        name: impl Into<String>,
    ) -> Result<(MagmaTable, Vec<Element>), Error> {
        let members = self.members.clone();
        let names: Vec<String> = members
            .iter()
            .map(|&m| parent.elem_name(m).to_string())
            .collect();
        let pos = |e: Element| {
            members
                .binary_search(&e)
                .expect("substructure is closed under mul")
        };
        let table = MagmaTable::from_fn(name, names, |a, b| {
            pos(parent.mul(members[a], members[b]))
        })?;
        Ok((table, members))
    }
}

fn collect(mask: &[bool]) -> Vec<Element> {
    mask.iter()
        .enumerate()
        .filter(|(_, &m)| m)
        .map(|(i, _)| Element(i as u32))
        .collect()
}

/// The minimal subgroup of the center containing every associator value.
pub fn z_m(g: &MagmaTable) -> Result<SubStructure, Error> {
    z_m_with(g, &Limits::default())
}

pub fn z_m_with(g: &MagmaTable, limits: &Limits) -> Result<SubStructure, Error> {
    let report = classify_with(g, limits)?;
    if !report.is_metagroup {
        return Err(Error::NotMetagroup {
            table: g.name().to_string(),
            reason: "the minimal central subgroup is defined for metagroups".into(),
        });
    }
    Ok(SubStructure {
        members: report.z_m,
    })
}

/// A quotient of a metagroup by a central subgroup containing its associator
/// range. By the quotient theorem the result is a group; this is asserted
/// after construction.
#[derive(Debug, Clone)]
pub struct QuotientTable {
    pub table: MagmaTable,
    /// Parent element index -> coset index.
    pub coset_of: Vec<usize>,
    /// Coset members, sorted; cosets ordered by smallest member.
    pub cosets: Vec<Vec<Element>>,
}

pub fn quotient_by_central(g: &MagmaTable, z0: &SubStructure) -> Result<QuotientTable, Error> {
    quotient_by_central_with(g, z0, &Limits::default())
}

pub fn quotient_by_central_with(
    g: &MagmaTable,
    z0: &SubStructure,
    limits: &Limits,
) -> Result<QuotientTable, Error> {
    let report: StructureReport = classify_with(g, limits)?;
    if !report.is_metagroup {
        return Err(Error::NotMetagroup {
            table: g.name().to_string(),
            reason: "quotient construction requires a metagroup".into(),
        });
    }
    for &z in z0.members() {
        if !report.center_contains(z) {
            return Err(Error::NotCentral {
                table: g.name().to_string(),
                witness: z.index(),
            });
        }
    }
    // z0 is validated as closed at construction; check it again against this
    // parent in case it came from elsewhere.
    let e = report.identity.expect("metagroup has identity");
    if !z0.contains(e) {
        return Err(Error::NotSubgroup {
            table: g.name().to_string(),
            witness: e.index(),
        });
    }
    for &x in z0.members() {
        for &y in z0.members() {
            if !z0.contains(g.mul(x, y)) {
                return Err(Error::NotSubgroup {
                    table: g.name().to_string(),
                    witness: g.mul(x, y).index(),
                });
            }
        }
        if !z0.contains(g.rd(e, x)) {
            return Err(Error::NotSubgroup {
                table: g.name().to_string(),
                witness: g.rd(e, x).index(),
            });
        }
    }
    for &t in &report.t_range {
        if !z0.contains(t) {
            return Err(Error::TRangeEscapes {
                table: g.name().to_string(),
                witness: t.index(),
            });
        }
    }

    // Cosets a Z0, canonical representative = smallest member.
    let n = g.order();
    let mut coset_of = vec![usize::MAX; n];
    let mut cosets: Vec<Vec<Element>> = Vec::new();
    for a in 0..n {
        if coset_of[a] != usize::MAX {
            continue;
        }
        let mut members: Vec<Element> =
            z0.members().iter().map(|&z| g.mul(g.el(a), z)).collect();
        members.sort_unstable();
        members.dedup();
        let idx = cosets.len();
        for m in &members {
            if coset_of[m.index()] != usize::MAX {
                // overlapping cosets would contradict centrality; surface it
                return Err(Error::NotSubgroup {
                    table: g.name().to_string(),
                    witness: m.index(),
                });
            }
            coset_of[m.index()] = idx;
        }
        cosets.push(members);
    }

    // Well-definedness: every representative pair lands in the same coset.
    let k = cosets.len();
    let mut qtab = vec![usize::MAX; k * k];
    for a in 0..n {
        for b in 0..n {
            let (ca, cb) = (coset_of[a], coset_of[b]);
            let cp = coset_of[g.mul(g.el(a), g.el(b)).index()];
            let slot = &mut qtab[ca * k + cb];
            if *slot == usize::MAX {
                *slot = cp;
            } else if *slot != cp {
                return Err(Error::NotCentral {
                    table: g.name().to_string(),
                    witness: a,
                });
            }
        }
    }

    let names: Vec<String> = cosets
        .iter()
        .map(|c| format!("[{}]", g.elem_name(c[0])))
        .collect();
    let table = MagmaTable::from_fn(format!("{}/Z0", g.name()), names, |a, b| qtab[a * k + b])?;

    // The quotient theorem: the result is a group.
    let qreport = classify_with(&table, limits)?;
    if !qreport.is_group() {
        return Err(Error::NotMetagroup {
            table: table.name().to_string(),
            reason: "quotient by a central subgroup containing all associators must be a group"
                .into(),
        });
    }

    Ok(QuotientTable {
        table,
        coset_of,
        cosets,
    })
}
