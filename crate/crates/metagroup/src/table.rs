//! Cayley-table representation of a finite binary system.
//!
//! A [`MagmaTable`] stores a total binary operation on `{0, .., n-1}` as an
//! n-by-n index table. No algebraic law is assumed at construction; whether
//! the table is a quasigroup, loop or metagroup is a separate query
//! (see [`crate::classify`]). Division tables are precomputed when the table
//! has the Latin-square property, so `left_div`/`right_div` are O(1).

use serde::{Deserialize, Serialize};

use crate::error::{Error, LatinDefect};

/// Index of an element within its owning table.
///
/// An `Element` is only meaningful together with the table it came from;
/// operations panic if handed an element of a larger table.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Element(pub(crate) u32);

impl Element {
    /// 0-based index of the element.
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

impl std::fmt::Display for Element {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// Size caps for table construction and exhaustive scans.
///
/// The defaults keep O(n^3) scans at desk scale. The CLI overrides both caps
/// from the `MGK_ORDER_CAP` environment variable.
#[derive(Debug, Clone, Copy)]
pub struct Limits {
    /// Maximum order accepted by classification and product construction.
    pub order_cap: usize,
    /// Maximum order `|D| * |B|^|V|` of a wreath carrier.
    pub wreath_cap: usize,
}

impl Default for Limits {
    fn default() -> Self {
        Limits {
            order_cap: 4096,
            wreath_cap: 4096,
        }
    }
}

impl Limits {
    /// Reads `MGK_ORDER_CAP` and applies it to both caps when set.
    pub fn from_env() -> Self {
        match std::env::var("MGK_ORDER_CAP")
            .ok()
            .and_then(|s| s.trim().parse::<usize>().ok())
        {
            Some(cap) => Limits {
                order_cap: cap,
                wreath_cap: cap,
            },
            None => Limits::default(),
        }
    }

    pub(crate) fn check_order(&self, n: usize) -> Result<(), Error> {
        if n > self.order_cap {
            Err(Error::OrderCap {
                requested: n,
                cap: self.order_cap,
            })
        } else {
            Ok(())
        }
    }
}

/// A finite carrier with a total binary operation as an n-by-n index table.
#[derive(Debug, Clone)]
pub struct MagmaTable {
    name: String,
    order: usize,
    elem_names: Vec<String>,
    table: Vec<u32>,
    // left_div a\b at [a * n + b], present iff every row is a permutation
    ldiv: Option<Vec<u32>>,
    // right_div a/b at [a * n + b], present iff every column is a permutation
    rdiv: Option<Vec<u32>>,
    latin_defect: Option<LatinDefect>,
    identity: Option<u32>,
}

impl MagmaTable {
    /// Builds a table from explicit rows (`rows[a][b]` is the index of `a*b`).
    pub fn from_rows(
        name: impl Into<String>,
        elem_names: Vec<String>,
        rows: &[Vec<usize>],
    ) -> Result<Self, Error> {
        let name = name.into();
        let n = elem_names.len();
        if n == 0 {
            return Err(Error::BadTable {
                table: name,
                msg: "order must be positive".into(),
            });
        }
        if rows.len() != n {
            return Err(Error::BadTable {
                table: name,
                msg: format!("expected {n} rows, got {}", rows.len()),
            });
        }
        let mut table = Vec::with_capacity(n * n);
        for (i, row) in rows.iter().enumerate() {
            if row.len() != n {
                return Err(Error::BadTable {
                    table: name,
                    msg: format!("row {i} has {} entries, expected {n}", row.len()),
                });
            }
            for &v in row {
                if v >= n {
                    return Err(Error::BadTable {
                        table: name,
                        msg: format!("entry {v} in row {i} out of range"),
                    });
                }
                table.push(v as u32);
            }
        }
        Self::build(name, elem_names, table)
    }

    /// Builds a table of order `elem_names.len()` from a closure.
    pub fn from_fn(
        name: impl Into<String>,
        elem_names: Vec<String>,
        mut f: impl FnMut(usize, usize) -> usize,
    ) -> Result<Self, Error> {
        let name = name.into();
        let n = elem_names.len();
        if n == 0 {
            return Err(Error::BadTable {
                table: name,
                msg: "order must be positive".into(),
            });
        }
        let mut table = Vec::with_capacity(n * n);
        for a in 0..n {
            for b in 0..n {
                let v = f(a, b);
                if v >= n {
                    return Err(Error::BadTable {
                        table: name,
                        msg: format!("f({a},{b}) = {v} out of range"),
                    });
                }
                table.push(v as u32);
            }
        }
        Self::build(name, elem_names, table)
    }

    fn build(name: String, elem_names: Vec<String>, table: Vec<u32>) -> Result<Self, Error> {
        let n = elem_names.len();
        for i in 0..n {
            for j in i + 1..n {
                if elem_names[i] == elem_names[j] {
                    return Err(Error::BadTable {
                        table: name,
                        msg: format!("duplicate element name `{}`", elem_names[i]),
                    });
                }
            }
        }

        // Latin-square scan; build division tables when it holds.
        let mut latin_defect = None;
        let mut ldiv = vec![u32::MAX; n * n];
        'rows: for a in 0..n {
            for x in 0..n {
                let b = table[a * n + x] as usize;
                if ldiv[a * n + b] != u32::MAX {
                    latin_defect = Some(LatinDefect::Row(a));
                    break 'rows;
                }
                ldiv[a * n + b] = x as u32;
            }
        }
        let mut rdiv = vec![u32::MAX; n * n];
        if latin_defect.is_none() {
            'cols: for b in 0..n {
                for y in 0..n {
                    let a = table[y * n + b] as usize;
                    if rdiv[a * n + b] != u32::MAX {
                        latin_defect = Some(LatinDefect::Col(b));
                        break 'cols;
                    }
                    rdiv[a * n + b] = y as u32;
                }
            }
        }
        let (ldiv, rdiv) = if latin_defect.is_none() {
            (Some(ldiv), Some(rdiv))
        } else {
            (None, None)
        };

        // Two-sided identity, if any.
        let mut identity = None;
        'cand: for e in 0..n {
            for g in 0..n {
                if table[e * n + g] != g as u32 || table[g * n + e] != g as u32 {
                    continue 'cand;
                }
            }
            identity = Some(e as u32);
            break;
        }

        Ok(MagmaTable {
            name,
            order: n,
            elem_names,
            table,
            ldiv,
            rdiv,
            latin_defect,
            identity,
        })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn elem_names(&self) -> &[String] {
        &self.elem_names
    }

    pub fn elem_name(&self, e: Element) -> &str {
        &self.elem_names[e.index()]
    }

    /// Checked element constructor; the boundary where raw indices enter.
    pub fn element(&self, idx: usize) -> Result<Element, Error> {
        if idx < self.order {
            Ok(Element(idx as u32))
        } else {
            Err(Error::ElementOutOfRange {
                table: self.name.clone(),
                index: idx,
                order: self.order,
            })
        }
    }

    pub fn elements(&self) -> impl Iterator<Item = Element> + '_ {
        (0..self.order as u32).map(Element)
    }

    #[inline]
    pub(crate) fn el(&self, idx: usize) -> Element {
        debug_assert!(idx < self.order);
        Element(idx as u32)
    }

    #[inline]
    fn check(&self, e: Element) {
        assert!(
            e.index() < self.order,
            "element {} out of range for table `{}` of order {}",
            e.index(),
            self.name,
            self.order
        );
    }

    /// `a * b` by table lookup. Panics if an element of a larger table is passed.
    #[inline]
    pub fn mul(&self, a: Element, b: Element) -> Element {
        self.check(a);
        self.check(b);
        Element(self.table[a.index() * self.order + b.index()])
    }

    /// True iff every row and every column is a permutation.
    pub fn is_quasigroup(&self) -> bool {
        self.latin_defect.is_none()
    }

    pub(crate) fn latin_defect(&self) -> Option<LatinDefect> {
        self.latin_defect
    }

    /// The two-sided identity, if one exists.
    pub fn identity(&self) -> Option<Element> {
        self.identity.map(Element)
    }

    /// Left division `a \ b`: the unique `x` with `a * x = b`.
    ///
    /// Works whenever row `a` is a permutation, even if the table as a whole
    /// is not a quasigroup.
    pub fn left_div(&self, a: Element, b: Element) -> Result<Element, Error> {
        self.check(a);
        self.check(b);
        if let Some(ld) = &self.ldiv {
            return Ok(Element(ld[a.index() * self.order + b.index()]));
        }
        let mut found = None;
        for x in 0..self.order {
            if self.table[a.index() * self.order + x] == b.0 {
                if found.is_some() {
                    return Err(self.not_quasigroup(LatinDefect::Row(a.index())));
                }
                found = Some(x as u32);
            }
        }
        found
            .map(Element)
            .ok_or_else(|| self.not_quasigroup(LatinDefect::Row(a.index())))
    }

    /// Right division `a / b`: the unique `y` with `y * b = a`.
    pub fn right_div(&self, a: Element, b: Element) -> Result<Element, Error> {
        self.check(a);
        self.check(b);
        if let Some(rd) = &self.rdiv {
            return Ok(Element(rd[a.index() * self.order + b.index()]));
        }
        let mut found = None;
        for y in 0..self.order {
            if self.table[y * self.order + b.index()] == a.0 {
                if found.is_some() {
                    return Err(self.not_quasigroup(LatinDefect::Col(b.index())));
                }
                found = Some(y as u32);
            }
        }
        found
            .map(Element)
            .ok_or_else(|| self.not_quasigroup(LatinDefect::Col(b.index())))
    }

    fn not_quasigroup(&self, defect: LatinDefect) -> Error {
        Error::NotQuasigroup {
            table: self.name.clone(),
            defect,
        }
    }

    /// Unchecked left division for hot paths; the caller has verified
    /// `is_quasigroup`.
    #[inline]
    pub(crate) fn ld(&self, a: Element, b: Element) -> Element {
        let ld = self.ldiv.as_ref().expect("division on non-quasigroup");
        Element(ld[a.index() * self.order + b.index()])
    }

    /// Unchecked right division for hot paths.
    #[inline]
    pub(crate) fn rd(&self, a: Element, b: Element) -> Element {
        let rd = self.rdiv.as_ref().expect("division on non-quasigroup");
        Element(rd[a.index() * self.order + b.index()])
    }

    /// Left inverse `a \ e`.
    pub fn inv_left(&self, a: Element) -> Result<Element, Error> {
        let e = self.identity().ok_or_else(|| Error::NoIdentity {
            table: self.name.clone(),
        })?;
        self.left_div(a, e)
    }

    /// Right inverse `e / a`.
    pub fn inv_right(&self, a: Element) -> Result<Element, Error> {
        let e = self.identity().ok_or_else(|| Error::NoIdentity {
            table: self.name.clone(),
        })?;
        self.right_div(e, a)
    }

    /// The opposite table: `op(a, b) = b * a`, same carrier and names.
    pub fn opposite(&self, name: impl Into<String>) -> MagmaTable {
        let n = self.order;
        let mut table = Vec::with_capacity(n * n);
        for a in 0..n {
            for b in 0..n {
                table.push(self.table[b * n + a]);
            }
        }
        MagmaTable::build(name.into(), self.elem_names.clone(), table)
            .expect("opposite of a valid table is valid")
    }

    /// Row-major cells, for serialization and bit-exact comparisons.
    pub fn cells(&self) -> &[u32] {
        &self.table
    }

    /// True iff both tables define the same operation on the same order.
    pub fn same_op(&self, other: &MagmaTable) -> bool {
        self.order == other.order && self.table == other.table
    }

    /// Returns a copy under a new name.
    pub fn renamed(&self, name: impl Into<String>) -> MagmaTable {
        let mut t = self.clone();
        t.name = name.into();
        t
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gen;

    #[test]
    fn cyclic_division_coherence() {
        let g = gen::cyclic(7);
        for a in g.elements() {
            for b in g.elements() {
                let x = g.left_div(a, b).unwrap();
                assert_eq!(g.mul(a, x), b, "a*(a\\b) = b");
                let y = g.right_div(a, b).unwrap();
                assert_eq!(g.mul(y, b), a, "(a/b)*b = a");
                assert_eq!(g.left_div(a, g.mul(a, b)).unwrap(), b);
                assert_eq!(g.right_div(g.mul(a, b), b).unwrap(), a);
            }
        }
    }

    #[test]
    fn left_div_examples() {
        let g = gen::cyclic(4);
        // 1 + x = 0 mod 4
        let x = g.left_div(g.el(1), g.el(0)).unwrap();
        assert_eq!(x.index(), 3);
        // b / e = b in any loop
        let e = g.identity().unwrap();
        assert_eq!(g.right_div(g.el(1), e).unwrap().index(), 1);
    }

    #[test]
    fn non_latin_row_reports_defect() {
        let rows = vec![vec![0, 1, 2], vec![1, 1, 0], vec![2, 0, 1]];
        let names = vec!["a".into(), "b".into(), "c".into()];
        let g = MagmaTable::from_rows("bad", names, &rows).unwrap();
        assert!(!g.is_quasigroup());
        let err = g.left_div(g.el(1), g.el(1)).unwrap_err();
        match err {
            Error::NotQuasigroup {
                defect: LatinDefect::Row(1),
                ..
            } => {}
            other => panic!("unexpected error {other:?}"),
        }
    }

    #[test]
    fn partial_division_on_good_row() {
        // Row 0 is a permutation, row 1 is not.
        let rows = vec![vec![1, 0, 2], vec![1, 1, 0], vec![2, 0, 1]];
        let names = vec!["a".into(), "b".into(), "c".into()];
        let g = MagmaTable::from_rows("mixed", names, &rows).unwrap();
        assert_eq!(g.left_div(g.el(0), g.el(2)).unwrap().index(), 2);
    }

    #[test]
    fn rejects_malformed_tables() {
        let names = vec!["a".into(), "b".into()];
        assert!(MagmaTable::from_rows("t", names.clone(), &[vec![0, 1]]).is_err());
        assert!(MagmaTable::from_rows("t", names.clone(), &[vec![0, 2], vec![1, 0]]).is_err());
        assert!(MagmaTable::from_rows("t", vec!["a".into(), "a".into()], &[
            vec![0, 1],
            vec![1, 0]
        ])
        .is_err());
    }

    #[test]
    fn identity_detection() {
        let g = gen::cyclic(5);
        assert_eq!(g.identity().unwrap().index(), 0);
        // subtraction mod 5 is a quasigroup with no two-sided identity
        let h = MagmaTable::from_fn(
            "sub5",
            (0..5).map(|i| i.to_string()).collect(),
            |a, b| (a + 5 - b) % 5,
        )
        .unwrap();
        assert!(h.identity().is_none());
        assert!(h.is_quasigroup());
    }

    #[test]
    fn element_boundary_check() {
        let g = gen::cyclic(3);
        assert!(g.element(2).is_ok());
        assert!(matches!(
            g.element(3),
            Err(Error::ElementOutOfRange { .. })
        ));
    }
}
