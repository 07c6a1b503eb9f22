//! Smashed splitting extensions of a central metagroup by a chosen
//! non-central element: the doubling action `b0 -> b0^2`, the order
//! constraint `l | 2^k - 1`, and the commutator-span verification
//! `[H, C*] Z(H) = H`.

use serde::Serialize;

use crate::classify::classify_with;
use crate::error::Error;
use crate::products::{CentralEmbedding, SmashedSpec};
use crate::subquot::{quotient_by_central_with, SubStructure};
use crate::table::{Element, Limits, MagmaTable};
use crate::wreath::{wreath_product_with, FElement, WreathSpec};

/// A built splitting extension together with its verification data.
#[derive(Debug, Clone)]
pub struct Extension {
    pub spec: WreathSpec,
    pub table: MagmaTable,
    /// Order of the chosen element's coset in A modulo its central subgroup.
    pub k: usize,
    /// Order of B modulo its minimal central associator subgroup.
    pub l: usize,
    pub d0: Element,
    pub b0: Element,
    /// The tuple carrying b0 at the identity coset and e elsewhere.
    pub f0: FElement,
}

/// Outcome of the extension checks.
#[derive(Debug, Clone, Serialize)]
pub struct ExtensionReport {
    pub order: usize,
    pub k: usize,
    pub l: usize,
    pub f0_doubling: bool,
    pub commutator_span: bool,
}

/// Builds the splitting extension of B by D determined by `d0` and `b0`.
///
/// A is the closure of `d0` with the minimal central associator subgroup of
/// D; the action sends `b0` to its square and extends along the cyclic coset
/// structure of B. Requires the minimal central subgroups involved to be
/// trivial, which holds for every group D.
pub fn build_splitting_extension(
    d: &MagmaTable,
    d0: Element,
    b: &MagmaTable,
    b0: Element,
    limits: &Limits,
) -> Result<Extension, Error> {
    let d_report = classify_with(d, limits)?;
    if !d_report.is_metagroup {
        return Err(Error::NotMetagroup {
            table: d.name().to_string(),
            reason: "extension base must be a metagroup".into(),
        });
    }
    if d_report.center_contains(d0) {
        return Err(Error::CentralD0 {
            table: d.name().to_string(),
            elem: d0.index(),
        });
    }
    let b_report = classify_with(b, limits)?;
    if !b_report.is_central_metagroup {
        return Err(Error::NotMetagroup {
            table: b.name().to_string(),
            reason: "the extended factor must be a central metagroup".into(),
        });
    }

    // A = closure({d0} u Z0), Z0 the minimal central subgroup of D.
    let mut gens = vec![d0];
    gens.extend_from_slice(&d_report.z_m);
    let a = SubStructure::closure(d, &gens)?;
    let (a_table, a_elems) = a.as_table(d, format!("{}|A", d.name()))?;
    let a_report = classify_with(&a_table, limits)?;

    // This builder instantiates the trivial shared central group, which
    // requires all three minimal central subgroups to vanish.
    if d_report.z_m.len() > 1 || a_report.z_m.len() > 1 || b_report.z_m.len() > 1 {
        return Err(Error::SpecMismatch {
            what: "extension builder requires trivial minimal central subgroups".into(),
        });
    }

    // k = order of d0's coset in A / Z_m(A).
    let zma = SubStructure::new(&a_table, a_report.z_m.clone())?;
    let quot = quotient_by_central_with(&a_table, &zma, limits)?;
    let d0_in_a = a_elems
        .iter()
        .position(|&m| m == d0)
        .expect("d0 generates A");
    let d0_coset = quot.table.el(quot.coset_of[d0_in_a]);
    let eq = quot.table.identity().expect("quotient is a group");
    let mut k = 1usize;
    let mut acc = d0_coset;
    while acc != eq {
        acc = quot.table.mul(acc, d0_coset);
        k += 1;
        if k > quot.table.order() {
            unreachable!("element order exceeds group order");
        }
    }

    // l = |B / Z_m(B)| must divide 2^k - 1.
    let l = b.order() / b_report.z_m.len();
    if l <= 1 {
        return Err(Error::BadOrderConstraint { l, k });
    }
    let modulus = 1u128
        .checked_shl(k as u32)
        .and_then(|x| x.checked_sub(1))
        .ok_or(Error::BadOrderConstraint { l, k })?;
    if modulus % (l as u128) != 0 {
        return Err(Error::BadOrderConstraint { l, k });
    }

    // B must be generated by b0 over its central part, with a cyclic coset
    // structure; each element decomposes as zeta * b0^j.
    let eb = b.identity().expect("loop");
    let mut b0_pows = vec![eb];
    for _ in 1..l {
        let prev = *b0_pows.last().expect("nonempty");
        b0_pows.push(b.mul(prev, b0));
    }
    let zmb_mask = {
        let mut m = vec![false; b.order()];
        for z in &b_report.z_m {
            m[z.index()] = true;
        }
        m
    };
    let mut power_class = vec![usize::MAX; b.order()];
    for x in b.elements() {
        for (j, &p) in b0_pows.iter().enumerate() {
            if zmb_mask[b.rd(x, p).index()] {
                power_class[x.index()] = j;
                break;
            }
        }
        if power_class[x.index()] == usize::MAX {
            return Err(Error::PhiExtension { elem: b0.index() });
        }
    }

    // sigma: zeta b0^j -> zeta b0^{2j mod l}; sigma(b0) = b0^2.
    let sigma: Vec<u32> = b
        .elements()
        .map(|x| {
            let j = power_class[x.index()];
            let zeta = b.rd(x, b0_pows[j]);
            b.mul(zeta, b0_pows[(2 * j) % l]).0
        })
        .collect();
    {
        let mut seen = vec![false; b.order()];
        for &s in &sigma {
            if seen[s as usize] {
                return Err(Error::PhiExtension { elem: b0.index() });
            }
            seen[s as usize] = true;
        }
        if sigma[b0.index()] != b.mul(b0, b0).0 {
            return Err(Error::PhiExtension { elem: b0.index() });
        }
    }

    // phi(a) = sigma^m where the coset of a is the m-th power of d0's coset.
    let mut coset_power = vec![usize::MAX; quot.table.order()];
    let mut acc = eq;
    for m in 0..k {
        coset_power[acc.index()] = m;
        acc = quot.table.mul(acc, d0_coset);
    }
    if coset_power.iter().any(|&m| m == usize::MAX) {
        return Err(Error::PhiExtension { elem: d0.index() });
    }
    let sigma_pow = |m: usize, x: Element| -> Element {
        let mut cur = x;
        for _ in 0..m {
            cur = Element(sigma[cur.index()]);
        }
        cur
    };
    // consistency: sigma^k must be the identity map
    for x in b.elements() {
        if sigma_pow(k, x) != x {
            return Err(Error::PhiExtension { elem: d0.index() });
        }
    }
    let na = a_table.order();
    let nb = b.order();
    let mut phi = vec![0u32; na * nb];
    for ai in 0..na {
        let m = coset_power[quot.coset_of[ai]];
        for x in b.elements() {
            phi[ai * nb + x.index()] = sigma_pow(m, x).0;
        }
    }

    let z = CentralEmbedding::trivial(&a_table, b)?;
    let factors = SmashedSpec::new(
        a_table,
        b.clone(),
        z,
        phi,
        vec![0; na * na * nb],
        vec![0; na * nb * nb],
        vec![0; (na * nb) * (na * nb)],
    )?;
    let spec = WreathSpec::assemble_with(d.clone(), a, None, factors, limits)?;
    let table = wreath_product_with(&spec, true, limits)?;

    let mut f0 = spec.f_identity();
    f0.vals[0] = b0.0; // identity coset sits first in the transversal
    Ok(Extension {
        spec,
        table,
        k,
        l,
        d0,
        b0,
        f0,
    })
}

/// `f0^{{d0}} = f0 * f0`.
pub fn verify_f0_doubling(ext: &Extension) -> bool {
    let acted = ext.spec.f_act(&ext.f0, ext.d0);
    acted == ext.spec.f_mul(&ext.f0, &ext.f0)
}

/// The commutator `[a, b] = (e/a)((e/b)(ab))` in a loop.
pub fn commutator(t: &MagmaTable, a: Element, b: Element) -> Element {
    let e = t.identity().expect("loop");
    t.mul(t.rd(e, a), t.mul(t.rd(e, b), t.mul(a, b)))
}

/// Members of the embedded H = F* slice, as product elements.
pub fn h_slice(ext: &Extension) -> Vec<Element> {
    let nf = ext.spec.f_order().expect("built");
    let e_d = ext.spec.d.identity().expect("loop");
    (0..nf)
        .map(|c| ext.table.el(e_d.index() * nf + c))
        .collect()
}

/// Checks `[H, C*] Z(H) = H` by closing the commutator set together with the
/// center of the embedded H under the product operations.
pub fn verify_commutator_span(ext: &Extension, limits: &Limits) -> Result<bool, Error> {
    let c = &ext.table;
    let h = h_slice(ext);
    let h_sub = SubStructure::new(c, h.clone())?;
    let (h_table, h_elems) = h_sub.as_table(c, "H")?;
    let h_report = classify_with(&h_table, limits)?;

    let mut gens: Vec<Element> = h_report
        .center
        .iter()
        .map(|&z| h_elems[z.index()])
        .collect();
    for &hh in &h_sub.members().to_vec() {
        for g in c.elements() {
            gens.push(commutator(c, hh, g));
        }
    }
    let span = SubStructure::closure(c, &gens)?;
    Ok(span.members() == h_sub.members())
}

/// Report for the generator-span check of the extension.
#[derive(Debug, Clone, Serialize)]
pub struct GeneratorSpanReport {
    pub preconditions: bool,
    pub span_is_whole: bool,
    pub slices_hit: bool,
}

/// Verifies that the lifted generators reproduce the whole extension:
/// `c_1 = (d_1\e, e)`, `c_2 = (d_2\e, f0)`, `c_j = (d_j\e, e)` for later
/// generators, and the closure of `{c_j}` with the center of the embedded H
/// is all of C*. Also checks `d_j\e` lies in `H c_j` for each j.
pub fn verify_generator_span(
    ext: &Extension,
    ds: &[Element],
    limits: &Limits,
) -> Result<GeneratorSpanReport, Error> {
    let d = &ext.spec.d;
    let e_d = d.identity().expect("loop");
    let d_report = classify_with(d, limits)?;
    let mut pre = ds.len() >= 2 && ds[0] != e_d;
    if pre {
        let i1 = d.ld(ds[0], e_d);
        let i2 = d.ld(ds[1], e_d);
        pre &= commutator(d, i2, i1) == e_d;
        let mut gens = ds.to_vec();
        gens.extend_from_slice(&d_report.z_m);
        pre &= SubStructure::closure(d, &gens)?.len() == d.order();
    }

    let c = &ext.table;
    let nf = ext.spec.f_order().expect("built");
    let f0_code = ext.spec.f_encode(&ext.f0);
    let e_code = ext.spec.f_encode(&ext.spec.f_identity());
    let cj: Vec<Element> = ds
        .iter()
        .enumerate()
        .map(|(j, &dj)| {
            let inv = d.ld(dj, e_d);
            let fcode = if j == 1 { f0_code } else { e_code };
            c.el(inv.index() * nf + fcode)
        })
        .collect();

    let h = h_slice(ext);
    let h_sub = SubStructure::new(c, h)?;
    let (h_table, h_elems) = h_sub.as_table(c, "H")?;
    let h_report = classify_with(&h_table, limits)?;
    let mut gens: Vec<Element> = h_report
        .center
        .iter()
        .map(|&z| h_elems[z.index()])
        .collect();
    gens.extend_from_slice(&cj);
    let span = SubStructure::closure(c, &gens)?;
    let span_is_whole = span.len() == c.order();

    // d_j \ e embeds in H c_j
    let mut slices_hit = true;
    for (j, &dj) in ds.iter().enumerate() {
        let target = c.el(d.ld(dj, e_d).index() * nf + e_code);
        let mut hit = false;
        for &hh in h_sub.members() {
            if c.mul(hh, cj[j]) == target {
                hit = true;
                break;
            }
        }
        slices_hit &= hit;
    }
    Ok(GeneratorSpanReport {
        preconditions: pre,
        span_is_whole,
        slices_hit,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gen;

    fn s3_extension() -> Extension {
        let d = gen::sym3();
        let b = gen::cyclic(3);
        build_splitting_extension(&d, d.el(1), &b, b.el(1), &Limits::default()).unwrap()
    }

    #[test]
    fn s3_instance_builds_with_k2_l3() {
        let ext = s3_extension();
        assert_eq!(ext.k, 2);
        assert_eq!(ext.l, 3);
        assert_eq!(ext.table.order(), 162);
    }

    #[test]
    fn central_d0_is_rejected() {
        let d = gen::sym3();
        let b = gen::cyclic(3);
        assert!(matches!(
            build_splitting_extension(&d, d.el(0), &b, b.el(1), &Limits::default()),
            Err(Error::CentralD0 { .. })
        ));
    }

    #[test]
    fn order_constraint_is_enforced() {
        // B = C4 gives l = 4, which does not divide 2^2 - 1 = 3.
        let d = gen::sym3();
        let b = gen::cyclic(4);
        assert!(matches!(
            build_splitting_extension(&d, d.el(1), &b, b.el(1), &Limits::default()),
            Err(Error::BadOrderConstraint { l: 4, k: 2 })
        ));
    }

    #[test]
    fn f0_doubles_under_d0() {
        let ext = s3_extension();
        assert!(verify_f0_doubling(&ext));
    }
}
