//! Axiom classification: quasigroup/loop/metagroup flags, commutant, nuclei,
//! center, associator range and the minimal central subgroup generated by it.

use serde::Serialize;

use crate::error::Error;
use crate::table::{Element, Limits, MagmaTable};

/// Everything the exhaustive classification scan finds out about a table.
///
/// All element sets are index-sorted. For a table that is not a quasigroup,
/// every downstream flag is false and every set is empty.
#[derive(Debug, Clone, Serialize)]
pub struct StructureReport {
    pub is_quasigroup: bool,
    pub is_loop: bool,
    pub identity: Option<Element>,
    pub is_metagroup: bool,
    pub is_central_metagroup: bool,
    pub commutant: Vec<Element>,
    pub nucleus_left: Vec<Element>,
    pub nucleus_middle: Vec<Element>,
    pub nucleus_right: Vec<Element>,
    pub nucleus: Vec<Element>,
    pub center: Vec<Element>,
    pub t_range: Vec<Element>,
    pub z_m: Vec<Element>,
}

impl StructureReport {
    fn empty() -> Self {
        StructureReport {
            is_quasigroup: false,
            is_loop: false,
            identity: None,
            is_metagroup: false,
            is_central_metagroup: false,
            commutant: Vec::new(),
            nucleus_left: Vec::new(),
            nucleus_middle: Vec::new(),
            nucleus_right: Vec::new(),
            nucleus: Vec::new(),
            center: Vec::new(),
            t_range: Vec::new(),
            z_m: Vec::new(),
        }
    }

    pub fn center_contains(&self, e: Element) -> bool {
        self.center.binary_search(&e).is_ok()
    }

    /// True when the table is a group: an associative loop.
    pub fn is_group(&self) -> bool {
        self.is_loop && self.t_range.len() <= 1 && self.is_metagroup
    }
}

fn mask_to_vec(mask: &[bool]) -> Vec<Element> {
    mask.iter()
        .enumerate()
        .filter(|(_, &m)| m)
        .map(|(i, _)| Element(i as u32))
        .collect()
}

/// Classifies a table with default size limits.
pub fn classify(g: &MagmaTable) -> Result<StructureReport, Error> {
    classify_with(g, &Limits::default())
}

/// Classifies a table; refuses orders above `limits.order_cap`.
pub fn classify_with(g: &MagmaTable, limits: &Limits) -> Result<StructureReport, Error> {
    limits.check_order(g.order())?;
    let n = g.order();
    if !g.is_quasigroup() {
        return Ok(StructureReport::empty());
    }

    let identity = g.identity();
    let is_loop = identity.is_some();

    let mut commutant = vec![true; n];
    for a in 0..n {
        for b in 0..n {
            if g.mul(g.el(a), g.el(b)) != g.mul(g.el(b), g.el(a)) {
                commutant[a] = false;
                break;
            }
        }
    }

    let mut nl = vec![false; n];
    let mut nm = vec![false; n];
    let mut nr = vec![false; n];
    for a in 0..n {
        let ea = g.el(a);
        nl[a] = (0..n).all(|b| {
            let eb = g.el(b);
            (0..n).all(|c| {
                let ec = g.el(c);
                g.mul(g.mul(ea, eb), ec) == g.mul(ea, g.mul(eb, ec))
            })
        });
        nm[a] = (0..n).all(|b| {
            let eb = g.el(b);
            (0..n).all(|c| {
                let ec = g.el(c);
                g.mul(g.mul(eb, ea), ec) == g.mul(eb, g.mul(ea, ec))
            })
        });
        nr[a] = (0..n).all(|b| {
            let eb = g.el(b);
            (0..n).all(|c| {
                let ec = g.el(c);
                g.mul(g.mul(eb, ec), ea) == g.mul(eb, g.mul(ec, ea))
            })
        });
    }

    let mut center_mask = vec![false; n];
    for a in 0..n {
        center_mask[a] = commutant[a] && nl[a] && nm[a] && nr[a];
    }

    // Associator range over all triples, loops only.
    let mut t_mask = vec![false; n];
    if is_loop {
        for a in 0..n {
            for b in 0..n {
                let ab = g.mul(g.el(a), g.el(b));
                for c in 0..n {
                    let lhs = g.mul(ab, g.el(c));
                    let rhs = g.mul(g.el(a), g.mul(g.el(b), g.el(c)));
                    t_mask[g.rd(lhs, rhs).index()] = true;
                }
            }
        }
    }

    let is_metagroup = is_loop && t_mask.iter().enumerate().all(|(i, &t)| !t || center_mask[i]);

    let mut is_central_metagroup = is_metagroup;
    if is_metagroup {
        'outer: for a in 0..n {
            for b in 0..n {
                let ab = g.mul(g.el(a), g.el(b));
                let ba = g.mul(g.el(b), g.el(a));
                if !center_mask[g.rd(ab, ba).index()] {
                    is_central_metagroup = false;
                    break 'outer;
                }
            }
        }
    }

    // Minimal subgroup of the center containing the associator range.
    let z_m = if is_metagroup {
        central_closure(g, &t_mask, identity.expect("loop"))
    } else {
        Vec::new()
    };

    Ok(StructureReport {
        is_quasigroup: true,
        is_loop,
        identity,
        is_metagroup,
        is_central_metagroup,
        commutant: mask_to_vec(&commutant),
        nucleus_left: mask_to_vec(&nl),
        nucleus_middle: mask_to_vec(&nm),
        nucleus_right: mask_to_vec(&nr),
        nucleus: mask_to_vec(
            &(0..n)
                .map(|i| nl[i] && nm[i] && nr[i])
                .collect::<Vec<_>>(),
        ),
        center: mask_to_vec(&center_mask),
        t_range: mask_to_vec(&t_mask),
        z_m,
    })
}

/// Closes a set of central elements under products and inverses.
fn central_closure(g: &MagmaTable, seed: &[bool], e: Element) -> Vec<Element> {
    let n = g.order();
    let mut mask = vec![false; n];
    mask[e.index()] = true;
    for (i, &s) in seed.iter().enumerate() {
        if s {
            mask[i] = true;
        }
    }
    loop {
        let members: Vec<usize> = (0..n).filter(|&i| mask[i]).collect();
        let mut grew = false;
        for &x in &members {
            let inv = g.rd(e, g.el(x));
            if !mask[inv.index()] {
                mask[inv.index()] = true;
                grew = true;
            }
            for &y in &members {
                let p = g.mul(g.el(x), g.el(y));
                if !mask[p.index()] {
                    mask[p.index()] = true;
                    grew = true;
                }
            }
        }
        if !grew {
            return mask_to_vec(&mask);
        }
    }
}

/// The associator `((a b) c) / (a (b c))`.
pub fn associator(g: &MagmaTable, a: Element, b: Element, c: Element) -> Result<Element, Error> {
    let lhs = g.mul(g.mul(a, b), c);
    let rhs = g.mul(a, g.mul(b, c));
    g.right_div(lhs, rhs)
}

/// The commutation factor `(a b) / (b a)`.
pub fn commutation_factor(g: &MagmaTable, a: Element, b: Element) -> Result<Element, Error> {
    g.right_div(g.mul(a, b), g.mul(b, a))
}

/// Which inversion the opposite construction is labelled with.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum InvSide {
    Left,
    Right,
}

/// The metagroup carried by the inversion image: the opposite table.
///
/// Under right inversion the correspondence sends `a` to `e/a` and the image
/// product is `(e/a2)(e/a1)`; since inversion is a bijection of the carrier,
/// the resulting table is the opposite operation on the same index set. Its
/// associator satisfies `t'(x, y, z) = e / t(z, y, x)` of the source table.
pub fn opposite_inv_metagroup(g: &MagmaTable, side: InvSide) -> Result<MagmaTable, Error> {
    let report = classify(g)?;
    if !report.is_metagroup {
        return Err(Error::NotMetagroup {
            table: g.name().to_string(),
            reason: "opposite inversion table requires a metagroup".into(),
        });
    }
    let tag = match side {
        InvSide::Left => "linv",
        InvSide::Right => "rinv",
    };
    Ok(g.opposite(format!("{}({})", tag, g.name())))
}

/// Quasigroup whose associators all lie in its center, identity not required.
pub fn strict_quasigroup(g: &MagmaTable) -> Result<bool, Error> {
    strict_quasigroup_with(g, &Limits::default())
}

pub fn strict_quasigroup_with(g: &MagmaTable, limits: &Limits) -> Result<bool, Error> {
    limits.check_order(g.order())?;
    if !g.is_quasigroup() {
        return Ok(false);
    }
    let report = classify_with(g, limits)?;
    let n = g.order();
    let mut center_mask = vec![false; n];
    for e in &report.center {
        center_mask[e.index()] = true;
    }
    for a in 0..n {
        for b in 0..n {
            let ab = g.mul(g.el(a), g.el(b));
            for c in 0..n {
                let lhs = g.mul(ab, g.el(c));
                let rhs = g.mul(g.el(a), g.mul(g.el(b), g.el(c)));
                if !center_mask[g.rd(lhs, rhs).index()] {
                    return Ok(false);
                }
            }
        }
    }
    Ok(true)
}
