//! Right transversals, the decomposition calculus for a submetagroup, the
//! componentwise action on B-valued tuples, smashed twisted wreath products,
//! and metamorphisms between products built over different transversals.
//!
//! For a submetagroup A of D, a transversal V gives the unique decomposition
//! `g = psi(g) * tau(g)` with `psi(g)` in A and `tau(g)` in V; the cosets
//! realized here are `{s * v : s in A}`, so the representative sits on the
//! right and the decomposition is unique whenever the cosets partition D.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::classify::classify_with;
use crate::error::Error;
use crate::products::SmashedSpec;
use crate::subquot::SubStructure;
use crate::table::{Element, Limits, MagmaTable};

/// Fixed seed for deterministic sampled scans.
pub const SAMPLE_SEED: u64 = 0x6d676b;
/// Number of sampled tuples when a space is too large to exhaust.
pub const SAMPLE_COUNT: u64 = 10_000;
/// Exhaustive scans are used up to this many tuples.
pub const EXHAUSTIVE_TUPLES: u64 = 1 << 23;

/// A right transversal of a submetagroup with its decomposition maps.
#[derive(Debug, Clone)]
pub struct Transversal {
    v: Vec<Element>,
    tau: Vec<Element>,
    psi: Vec<Element>,
    /// position of d in `v`, when d is a member of V
    v_pos: Vec<Option<u32>>,
}

impl Transversal {
    pub fn members(&self) -> &[Element] {
        &self.v
    }

    pub fn len(&self) -> usize {
        self.v.len()
    }

    pub fn is_empty(&self) -> bool {
        self.v.is_empty()
    }

    /// The V-part of the decomposition of `g`.
    pub fn tau(&self, g: Element) -> Element {
        self.tau[g.index()]
    }

    /// The A-part of the decomposition of `g`.
    pub fn psi(&self, g: Element) -> Element {
        self.psi[g.index()]
    }

    pub fn position(&self, v: Element) -> Option<usize> {
        self.v_pos[v.index()].map(|p| p as usize)
    }
}

/// Greedy transversal selection in element-index order starting from the
/// identity, with the partition property verified exhaustively.
pub fn find_transversal(d: &MagmaTable, a: &SubStructure) -> Result<Transversal, Error> {
    find_transversal_with(d, a, &Limits::default())
}

pub fn find_transversal_with(
    d: &MagmaTable,
    a: &SubStructure,
    limits: &Limits,
) -> Result<Transversal, Error> {
    let report = classify_with(d, limits)?;
    if !report.is_metagroup {
        return Err(Error::NotMetagroup {
            table: d.name().to_string(),
            reason: "transversals are built over metagroups".into(),
        });
    }
    let e = report.identity.expect("metagroup has identity");

    let n = d.order();
    let mut owner: Vec<Option<u32>> = vec![None; n];
    let mut v: Vec<Element> = Vec::new();
    // e first: its coset is A itself.
    let mut order: Vec<usize> = Vec::with_capacity(n);
    order.push(e.index());
    order.extend((0..n).filter(|&i| i != e.index()));
    for cand in order {
        if owner[cand].is_some() {
            continue;
        }
        let pos = v.len() as u32;
        for &s in a.members() {
            let m = d.mul(s, d.el(cand));
            if let Some(prev) = owner[m.index()] {
                return Err(Error::PartitionFailure {
                    table: d.name().to_string(),
                    v1: cand,
                    v2: v[prev as usize].index(),
                    elem: m.index(),
                });
            }
            owner[m.index()] = Some(pos);
        }
        v.push(d.el(cand));
    }
    finish_transversal(d, a, v, owner, e)
}

/// Builds a transversal from an explicit representative list.
///
/// The identity must come first; the partition property is verified.
pub fn transversal_from(
    d: &MagmaTable,
    a: &SubStructure,
    v: Vec<Element>,
) -> Result<Transversal, Error> {
    let e = d.identity().ok_or_else(|| Error::NoIdentity {
        table: d.name().to_string(),
    })?;
    if v.first() != Some(&e) {
        return Err(Error::SpecMismatch {
            what: "transversal must list the identity first".into(),
        });
    }
    let n = d.order();
    let mut owner: Vec<Option<u32>> = vec![None; n];
    for (pos, &cand) in v.iter().enumerate() {
        for &s in a.members() {
            let m = d.mul(s, cand);
            if let Some(prev) = owner[m.index()] {
                return Err(Error::PartitionFailure {
                    table: d.name().to_string(),
                    v1: cand.index(),
                    v2: v[prev as usize].index(),
                    elem: m.index(),
                });
            }
            owner[m.index()] = Some(pos as u32);
        }
    }
    if let Some(missing) = owner.iter().position(|o| o.is_none()) {
        return Err(Error::PartitionFailure {
            table: d.name().to_string(),
            v1: missing,
            v2: missing,
            elem: missing,
        });
    }
    finish_transversal(d, a, v, owner, e)
}

fn finish_transversal(
    d: &MagmaTable,
    a: &SubStructure,
    v: Vec<Element>,
    owner: Vec<Option<u32>>,
    e: Element,
) -> Result<Transversal, Error> {
    let n = d.order();
    let mut tau = Vec::with_capacity(n);
    let mut psi = Vec::with_capacity(n);
    for g in 0..n {
        let rep = v[owner[g].expect("cosets cover D") as usize];
        let s = d.rd(d.el(g), rep);
        debug_assert!(a.contains(s));
        tau.push(rep);
        psi.push(s);
    }
    let mut v_pos = vec![None; n];
    for (i, &m) in v.iter().enumerate() {
        v_pos[m.index()] = Some(i as u32);
    }
    let trans = Transversal { v, tau, psi, v_pos };

    // The closed-form A-part must agree with the scan everywhere:
    // s = (g g^{e/tau}) t(g^{e/tau}, b, b\e) / t(g g^{e/tau}, b, b\e).
    for g in d.elements() {
        let b = trans.tau(g);
        let b_rinv = d.rd(e, b);
        let b_linv = d.ld(b, e);
        let t1 = assoc(d, b_rinv, b, b_linv);
        let x = d.mul(g, b_rinv);
        let t2 = assoc(d, x, b, b_linv);
        let closed = d.rd(d.mul(x, t1), t2);
        if closed != trans.psi(g) {
            return Err(Error::DecompositionMismatch {
                table: d.name().to_string(),
                elem: g.index(),
            });
        }
    }
    Ok(trans)
}

#[inline]
fn assoc(d: &MagmaTable, a: Element, b: Element, c: Element) -> Element {
    d.rd(d.mul(d.mul(a, b), c), d.mul(a, d.mul(b, c)))
}

/// The unique pair `(psi(g), tau(g))` with `g = psi(g) * tau(g)`.
pub fn decompose(trans: &Transversal, g: Element) -> (Element, Element) {
    (trans.psi(g), trans.tau(g))
}

/// The right-shift action of D on V: `v^[c] = tau(v c)`.
pub fn action(d: &MagmaTable, trans: &Transversal, v: Element, c: Element) -> Element {
    assert!(
        trans.position(v).is_some(),
        "action argument must be a transversal member"
    );
    trans.tau(d.mul(v, c))
}

/// A wreath product specification: D with a chosen submetagroup A and
/// transversal V, plus a factor system over (A, B, Z).
///
/// The factor tables are indexed by the standalone A table; `a_elems` maps
/// A indices back to D elements and `a_of_d` the other way.
///
/// The tuple action reads off the unique decomposition of `v * d`: the V
/// part relocates the component and the A part acts through `phi`. This
/// pairing composes as a left action up to central factors, which is what
/// makes the product associate up to its center.
#[derive(Debug, Clone)]
pub struct WreathSpec {
    pub d: MagmaTable,
    pub a: SubStructure,
    pub trans: Transversal,
    /// Factor system with `factors.a` the standalone table of `a`.
    pub factors: SmashedSpec,
    pub a_elems: Vec<Element>,
    a_of_d: Vec<Option<u32>>,
    /// psi(v * d) as an A-table index, at `[d * |V| + vpos]`.
    twist_aidx: Vec<u32>,
    /// tau(v * c) as a V position, at `[vpos * |D| + c]`.
    act_pos: Vec<u32>,
}

impl WreathSpec {
    /// Assembles and cross-checks a spec. `trans_v` is an optional explicit
    /// transversal; factor tables must be built over `a.as_table(d)`.
    pub fn assemble(
        d: MagmaTable,
        a: SubStructure,
        trans_v: Option<Vec<Element>>,
        factors: SmashedSpec,
    ) -> Result<Self, Error> {
        Self::assemble_with(d, a, trans_v, factors, &Limits::default())
    }

    pub fn assemble_with(
        d: MagmaTable,
        a: SubStructure,
        trans_v: Option<Vec<Element>>,
        factors: SmashedSpec,
        limits: &Limits,
    ) -> Result<Self, Error> {
        let (a_table, a_elems) = a.as_table(&d, format!("{}|A", d.name()))?;
        if !a_table.same_op(&factors.a) {
            return Err(Error::SpecMismatch {
                what: "factor system A table does not match the submetagroup".into(),
            });
        }
        let trans = match trans_v {
            Some(v) => transversal_from(&d, &a, v)?,
            None => find_transversal_with(&d, &a, limits)?,
        };
        let mut a_of_d = vec![None; d.order()];
        for (i, &m) in a_elems.iter().enumerate() {
            a_of_d[m.index()] = Some(i as u32);
        }

        let vlen = trans.len();
        let mut twist_aidx = vec![0u32; d.order() * vlen];
        for g in d.elements() {
            for (i, &v) in trans.members().iter().enumerate() {
                let s = trans.psi(d.mul(v, g));
                let idx = a_of_d[s.index()].expect("psi lands in the submetagroup");
                twist_aidx[g.index() * vlen + i] = idx;
            }
        }
        let mut act_pos = vec![0u32; vlen * d.order()];
        for (i, &v) in trans.members().iter().enumerate() {
            for c in d.elements() {
                let img = trans.tau(d.mul(v, c));
                act_pos[i * d.order() + c.index()] =
                    trans.position(img).expect("tau lands in V") as u32;
            }
        }
        Ok(WreathSpec {
            d,
            a,
            trans,
            factors,
            a_elems,
            a_of_d,
            twist_aidx,
            act_pos,
        })
    }

    /// Convenience constructor with all-trivial factors.
    pub fn trivial(d: MagmaTable, a_members: Vec<Element>, b: MagmaTable) -> Result<Self, Error> {
        let a = SubStructure::new(&d, a_members)?;
        let (a_table, _) = a.as_table(&d, format!("{}|A", d.name()))?;
        let factors = SmashedSpec::trivial(a_table, b)?;
        Self::assemble(d, a, None, factors)
    }

    pub fn b(&self) -> &MagmaTable {
        &self.factors.b
    }

    /// A-table index of a D element lying in the submetagroup.
    pub fn a_index(&self, g: Element) -> Element {
        Element(self.a_of_d[g.index()].expect("element of the submetagroup"))
    }

    /// `s(d, v)` as a D element.
    pub fn s_factor(&self, g: Element, v: Element) -> Element {
        let pos = self.trans.position(v).expect("v must be in V");
        self.a_elems[self.s_aidx[g.index() * self.trans.len() + pos] as usize]
    }

    #[inline]
    fn s_factor_aidx(&self, g: Element, vpos: usize) -> Element {
        Element(self.s_aidx[g.index() * self.trans.len() + vpos])
    }

    #[inline]
    fn act_vpos(&self, vpos: usize, c: Element) -> usize {
        self.act_pos[vpos * self.d.order() + c.index()] as usize
    }

    /// Order of F = B^V.
    pub fn f_order(&self) -> Option<usize> {
        self.b().order().checked_pow(self.trans.len() as u32)
    }

    pub fn f_decode(&self, code: usize) -> FElement {
        let nb = self.b().order();
        let mut code = code;
        let vals = (0..self.trans.len())
            .map(|_| {
                let v = (code % nb) as u32;
                code /= nb;
                v
            })
            .collect();
        FElement { vals }
    }

    pub fn f_encode(&self, f: &FElement) -> usize {
        let nb = self.b().order();
        let mut code = 0usize;
        for &v in f.vals.iter().rev() {
            code = code * nb + v as usize;
        }
        code
    }

    /// The constant-identity tuple.
    pub fn f_identity(&self) -> FElement {
        let e = self.b().identity().expect("B is a loop").0;
        FElement {
            vals: vec![e; self.trans.len()],
        }
    }

    /// Componentwise product in F.
    pub fn f_mul(&self, f: &FElement, g: &FElement) -> FElement {
        let b = self.b();
        FElement {
            vals: f
                .vals
                .iter()
                .zip(&g.vals)
                .map(|(&x, &y)| b.mul(Element(x), Element(y)).0)
                .collect(),
        }
    }

    /// The twisted action `f^{{d}}(v) = (f(tau(v (d\e))))^{s(d,v)}`.
    pub fn f_act(&self, f: &FElement, g: Element) -> FElement {
        let e = self.d.identity().expect("loop");
        let ginv = self.d.ld(g, e);
        let vals = (0..self.trans.len())
            .map(|i| {
                let src = self.act_vpos(i, ginv);
                let s = self.s_factor_aidx(g, i);
                self.factors.act(s, Element(f.vals[src])).0
            })
            .collect();
        FElement { vals }
    }
}

/// An element of F = B^V: one B value per transversal position.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FElement {
    pub vals: Vec<u32>,
}

impl FElement {
    pub fn value(&self, vpos: usize) -> Element {
        Element(self.vals[vpos])
    }
}

/// The correction factors relating `f^{{d d1}}` to the two-step action.
#[derive(Debug, Clone)]
pub struct WFactors {
    /// V-part discrepancy: `tau(v (dd1 \ e)) = tau(tau(v (d1\e)) (d\e)) * w1`.
    pub w1: Element,
    /// A-part discrepancy: `s(dd1, v) = (s(d, v^[d1\e]) s(d1, v)) * w2`.
    pub w2: Element,
    /// B-valued correction from the action-composition defects at `f`.
    pub w3: Element,
}

/// Computes the observed w-factors at `(d, d1, v)`; `w3` depends on `f`
/// through the eta corrections.
pub fn w_factors(
    spec: &WreathSpec,
    g: Element,
    g1: Element,
    v: Element,
    f: &FElement,
) -> WFactors {
    let d = &spec.d;
    let b = spec.b();
    let e = d.identity().expect("loop");
    let gg1 = d.mul(g, g1);

    let lhs_v = spec.trans.tau(d.mul(v, d.ld(gg1, e)));
    let step = spec.trans.tau(d.mul(v, d.ld(g1, e)));
    let two_step = spec.trans.tau(d.mul(step, d.ld(g, e)));
    let w1 = d.ld(two_step, lhs_v);

    let vpos = spec.trans.position(v).expect("v in V");
    let step_pos = spec.trans.position(step).expect("tau lands in V");
    let s1 = spec.a_elems[spec.s_factor_aidx(g, step_pos).index()];
    let s2 = spec.a_elems[spec.s_factor_aidx(g1, vpos).index()];
    let s12 = spec.a_elems[spec.s_factor_aidx(gg1, vpos).index()];
    let w2 = d.ld(d.mul(s1, s2), s12);

    // b0 = f(two_step * w1); eta corrections from splitting s(dd1, v).
    let arg = spec.trans.tau(d.mul(two_step, w1));
    let arg_pos = spec.trans.position(arg).expect("V shifted by w1 stays in V");
    let b0 = f.value(arg_pos);
    let (ia, ib) = (spec.a_index(s1), spec.a_index(s2));
    let iw2 = spec.a_index(w2);
    let a_t = &spec.factors.a;
    let eta1 = spec.factors.z.into_b[spec.factors.eta[(ia.index() * a_t.order()
        + a_t.mul(ib, iw2).index())
        * b.order()
        + b0.index()] as usize];
    let eta2 = spec.factors.z.into_b
        [spec.factors.eta[(ib.index() * a_t.order() + iw2.index()) * b.order() + b0.index()]
            as usize];
    let eb = b.identity().expect("loop");
    let w3 = b.rd(eb, b.mul(eta1, eta2));
    WFactors { w1, w2, w3 }
}

/// The gamma-expression forms of w1 and w2, evaluated through associators of
/// D. Exercised by tests against the observed discrepancies.
pub fn w_gamma_forms(
    spec: &WreathSpec,
    g: Element,
    g1: Element,
    v: Element,
) -> (Element, Element) {
    let d = &spec.d;
    let e = d.identity().expect("loop");
    let t = |x, y, z| assoc(d, x, y, z);
    let gg1 = d.mul(g, g1);
    let g_linv = d.ld(g, e);
    let g1_linv = d.ld(g1, e);

    // w1 = tau(gamma) with
    // gamma = t(dd1, d1\e, d\e) t(psi(v/d1), tau(v/d1), d\e)
    //       / [ t(d, d1, d1\e) t(v, e/d1, e/d) t(psi(v/d1), psi(tau(v/d1)/d), tau(v/(dd1))) ]
    let vd1 = d.rd(v, g1);
    let num = d.mul(
        t(gg1, g1_linv, g_linv),
        t(spec.trans.psi(vd1), spec.trans.tau(vd1), g_linv),
    );
    let den = d.mul(
        d.mul(t(g, g1, g1_linv), t(v, d.rd(e, g1), d.rd(e, g))),
        t(
            spec.trans.psi(vd1),
            spec.trans.psi(d.rd(spec.trans.tau(vd1), g)),
            spec.trans.tau(d.rd(v, gg1)),
        ),
    );
    let gamma = d.rd(num, den);
    let w1 = spec.trans.tau(gamma);

    // w2 = gamma3 / (psi(gamma1) psi(gamma2) psi(gamma5)) with the simplified
    // gamma expressions in terms of s-factors.
    let step = spec.trans.tau(d.mul(v, g1_linv));
    let s1 = spec.s_factor(g, step);
    let s2 = spec.s_factor(g1, v);
    let g2 = {
        let s2_rinv = d.rd(e, s2);
        d.rd(
            t(s2_rinv, step, d.rd(e, g)),
            t(s2_rinv, d.rd(e, s1), spec.trans.tau(d.mul(v, d.ld(gg1, e)))),
        )
    };
    let g3 = {
        let s1_rinv = d.rd(e, s1);
        let s2_rinv = d.rd(e, s2);
        d.rd(
            t(s2, s2_rinv, s1_rinv),
            t(s1, s2, d.rd(e, d.mul(s1, s2))),
        )
    };
    let g1exp = {
        let vdd1 = d.rd(v, gg1);
        d.rd(
            d.mul(t(vdd1, g, g1), t(d.rd(e, g), g, g_linv)),
            t(vdd1, g, g_linv),
        )
    };
    let g5 = {
        let x = d.rd(step, g);
        d.rd(t(x, g, g_linv), t(d.rd(e, g), g, g_linv))
    };
    let den = d.mul(
        d.mul(spec.trans.psi(g1exp), spec.trans.psi(g2)),
        spec.trans.psi(g5),
    );
    let w2 = d.rd(spec.trans.psi(g3), den);
    (w1, w2)
}

/// Builds the wreath product table over D x F (D-major, F in base |B|).
///
/// `restricted` only changes the table's label: over a finite transversal
/// every tuple has finite support, so the restricted and full carriers agree.
pub fn wreath_product(spec: &WreathSpec, restricted: bool) -> Result<MagmaTable, Error> {
    wreath_product_with(spec, restricted, &Limits::default())
}

pub fn wreath_product_with(
    spec: &WreathSpec,
    restricted: bool,
    limits: &Limits,
) -> Result<MagmaTable, Error> {
    let report = crate::products::validate_factors_with(&spec.factors, limits);
    if let Some(fail) = report.first_failure() {
        return Err(Error::InvalidFactors {
            condition: fail.id,
            witness: fail.witness.clone(),
        });
    }
    let nf = spec.f_order().ok_or(Error::WreathCap {
        requested: usize::MAX,
        cap: limits.wreath_cap,
    })?;
    let order = spec
        .d
        .order()
        .checked_mul(nf)
        .ok_or(Error::WreathCap {
            requested: usize::MAX,
            cap: limits.wreath_cap,
        })?;
    if order > limits.wreath_cap {
        return Err(Error::WreathCap {
            requested: order,
            cap: limits.wreath_cap,
        });
    }

    let d = &spec.d;
    let b = spec.b();
    let vlen = spec.trans.len();
    let fs: Vec<FElement> = (0..nf).map(|c| spec.f_decode(c)).collect();

    let mut names = Vec::with_capacity(order);
    for g in d.elements() {
        for f in &fs {
            let parts: Vec<&str> = f
                .vals
                .iter()
                .map(|&x| b.elem_names()[x as usize].as_str())
                .collect();
            names.push(format!("({},[{}])", d.elem_name(g), parts.join(",")));
        }
    }

    let sep = if restricted { "(w*)" } else { "(w)" };
    let name = format!("{}{}{}", d.name(), sep, b.name());
    let mut rows: Vec<Vec<usize>> = Vec::with_capacity(order);
    for g1 in d.elements() {
        // f^{{d1}} for every f, reused across the whole row block
        let acted: Vec<FElement> = fs.iter().map(|f| spec.f_act(f, g1)).collect();
        let psi1 = spec.a_index(spec.trans.psi(g1));
        for f1 in &fs {
            let mut row = Vec::with_capacity(order);
            for g in d.elements() {
                let g1g = d.mul(g1, g);
                let psi0 = spec.a_index(spec.trans.psi(g));
                for fc in 0..nf {
                    let f = &fs[fc];
                    let fa = &acted[fc];
                    let mut vals = Vec::with_capacity(vlen);
                    for i in 0..vlen {
                        let xi = spec.factors.z.into_b[spec
                            .factors
                            .xi_at((psi1, f1.value(i)), (psi0, f.value(i)))
                            .index()];
                        vals.push(b.mul(xi, b.mul(f1.value(i), fa.value(i))).0);
                    }
                    let fp = FElement { vals };
                    row.push(g1g.index() * nf + spec.f_encode(&fp));
                }
            }
            rows.push(row);
        }
    }
    MagmaTable::from_rows(name, names, &rows)
}

/// Associator of the wreath product from factor-level data only: D products,
/// B products, the factor tables and the twisted action, never the product
/// table itself. Returns `(t_D(d2, d1, d), y)` with `y` the componentwise
/// central correction.
pub fn wreath_closed_form_associator(
    spec: &WreathSpec,
    x2: (Element, &FElement),
    x1: (Element, &FElement),
    x0: (Element, &FElement),
) -> (Element, FElement) {
    let d = &spec.d;
    let b = spec.b();
    let (d2, f2) = x2;
    let (d1, f1) = x1;
    let (d0, f0) = x0;
    let d21 = d.mul(d2, d1);
    let d10 = d.mul(d1, d0);
    let t_d = assoc(d, d2, d1, d0);

    let f1_a2 = spec.f_act(f1, d2); // f1^{{d2}}
    let f0_a1 = spec.f_act(f0, d1); // f0^{{d1}}
    let f0_a21 = spec.f_act(f0, d21); // f0^{{d2 d1}}
    let f0_a1_a2 = spec.f_act(&f0_a1, d2); // (f0^{{d1}})^{{d2}}

    let psi2 = spec.a_index(spec.trans.psi(d2));
    let psi1 = spec.a_index(spec.trans.psi(d1));
    let psi0 = spec.a_index(spec.trans.psi(d0));
    let psi21 = spec.a_index(spec.trans.psi(d21));
    let psi10 = spec.a_index(spec.trans.psi(d10));
    let e_d = d.identity().expect("loop");
    let d2_linv = d.ld(d2, e_d);

    let vlen = spec.trans.len();
    let mut vals = Vec::with_capacity(vlen);
    for i in 0..vlen {
        let xpos = spec.act_vpos(i, d2_linv);
        let zb = |z: Element| spec.factors.z.into_b[z.index()];

        let xi_21 = zb(spec.factors.xi_at((psi2, f2.value(i)), (psi1, f1.value(i))));
        let prod21 = b.mul(f2.value(i), f1_a2.value(i));
        let xi_21_0 = zb(spec.factors.xi_at((psi21, prod21), (psi0, f0.value(i))));
        let i1 = b.mul(b.mul(xi_21_0, xi_21), b.mul(prod21, f0_a21.value(i)));

        let xi_2_10 = zb(spec
            .factors
            .xi_at((psi2, f2.value(i)), (psi10, b.mul(f1.value(i), f0_a1.value(i)))));
        let xi_10_x = zb(spec
            .factors
            .xi_at((psi1, f1.value(xpos)), (psi0, f0.value(xpos))));
        let s2 = spec.s_factor_aidx(d2, i);
        let kappa = spec.factors.z.into_b[spec.factors.kappa
            [(s2.index() * b.order() + f1.value(xpos).index()) * b.order()
                + f0_a1.value(xpos).index()] as usize];
        let i2 = b.mul(
            b.mul(b.mul(xi_2_10, xi_10_x), kappa),
            b.mul(f2.value(i), b.mul(f1_a2.value(i), f0_a1_a2.value(i))),
        );
        vals.push(b.rd(i1, i2).0);
    }
    (t_d, FElement { vals })
}

/// How a large scan was covered.
#[derive(Debug, Clone, Serialize)]
pub enum ScanMode {
    Exhaustive,
    Sampled { count: u64, seed: u64 },
}

/// Agreement statistics for the wreath associator cross-check.
#[derive(Debug, Clone, Serialize)]
pub struct WreathCrossCheck {
    pub mode: ScanMode,
    pub total: u64,
    pub agree: u64,
    pub first_mismatch: Option<(usize, usize, usize)>,
}

impl WreathCrossCheck {
    pub fn all_agree(&self) -> bool {
        self.agree == self.total
    }
}

/// Metagroup-condition report for a built wreath table.
#[derive(Debug, Clone, Serialize)]
pub struct WreathCheck {
    /// Does the minimal central subgroup of D embed into Z (via A)?
    pub zm_d_in_z: bool,
    pub is_loop: bool,
    /// Only meaningful when `zm_d_in_z` holds.
    pub is_metagroup: Option<bool>,
    pub associator_check: Option<WreathCrossCheck>,
}

impl WreathCheck {
    pub fn pass(&self) -> bool {
        self.is_loop
            && (!self.zm_d_in_z
                || (self.is_metagroup == Some(true)
                    && self.associator_check.as_ref().is_some_and(|c| c.all_agree())))
    }
}

/// Verifies the loop guarantee and, when `z_m(D)` lies inside the embedded Z,
/// the metagroup classification plus the closed-form associator agreement.
pub fn check_metagroup_condition(
    spec: &WreathSpec,
    table: &MagmaTable,
    limits: &Limits,
) -> Result<WreathCheck, Error> {
    let d_report = classify_with(&spec.d, limits)?;
    let image_in_d: Vec<Element> = spec
        .factors
        .z
        .into_a
        .iter()
        .map(|za| spec.a_elems[za.index()])
        .collect();
    let zm_d_in_z = d_report.z_m.iter().all(|zm| image_in_d.contains(zm));

    let c_report = classify_with(table, limits)?;
    let is_loop = c_report.is_loop;
    if !zm_d_in_z {
        return Ok(WreathCheck {
            zm_d_in_z,
            is_loop,
            is_metagroup: None,
            associator_check: None,
        });
    }

    let nf = spec.f_order().expect("table was built");
    let n = table.order();
    let total = (n as u64).pow(3);
    let mut agree = 0u64;
    let mut first_mismatch = None;
    let fs: Vec<FElement> = (0..nf).map(|c| spec.f_decode(c)).collect();
    let check_triple = |x: usize, y: usize, w: usize| -> bool {
        let xy = table.mul(table.el(x), table.el(y));
        let lhs = table.mul(xy, table.el(w));
        let rhs = table.mul(table.el(x), table.mul(table.el(y), table.el(w)));
        let brute = table.rd(lhs, rhs);
        let (td, fe) = wreath_closed_form_associator(
            spec,
            (spec.d.el(x / nf), &fs[x % nf]),
            (spec.d.el(y / nf), &fs[y % nf]),
            (spec.d.el(w / nf), &fs[w % nf]),
        );
        brute.index() == td.index() * nf + spec.f_encode(&fe)
    };
    let mode = if total <= EXHAUSTIVE_TUPLES {
        for x in 0..n {
            for y in 0..n {
                for w in 0..n {
                    if check_triple(x, y, w) {
                        agree += 1;
                    } else if first_mismatch.is_none() {
                        first_mismatch = Some((x, y, w));
                    }
                }
            }
        }
        ScanMode::Exhaustive
    } else {
        let mut rng = ChaCha8Rng::seed_from_u64(SAMPLE_SEED);
        for _ in 0..SAMPLE_COUNT {
            let (x, y, w) = (
                rng.gen_range(0..n),
                rng.gen_range(0..n),
                rng.gen_range(0..n),
            );
            if check_triple(x, y, w) {
                agree += 1;
            } else if first_mismatch.is_none() {
                first_mismatch = Some((x, y, w));
            }
        }
        ScanMode::Sampled {
            count: SAMPLE_COUNT,
            seed: SAMPLE_SEED,
        }
    };
    let checked = match mode {
        ScanMode::Exhaustive => total,
        ScanMode::Sampled { count, .. } => count,
    };
    Ok(WreathCheck {
        zm_d_in_z,
        is_loop,
        is_metagroup: Some(c_report.is_metagroup),
        associator_check: Some(WreathCrossCheck {
            mode,
            total: checked,
            agree,
            first_mismatch,
        }),
    })
}

/// A bijection between two wreath products multiplicative up to a central
/// factor, built from a change of transversal.
#[derive(Debug, Clone)]
pub struct Metamorphism {
    /// Image index in C2 for each index of C1.
    pub map: Vec<u32>,
    /// `nu(x, y) = mu(x y) / (mu(x) mu(y))` as C2 indices, row-major.
    pub nu: Vec<u32>,
    pub bijective: bool,
    pub nu_all_central: bool,
    pub first_noncentral: Option<(usize, usize)>,
    pub c1: MagmaTable,
    pub c2: MagmaTable,
}

/// Builds the transversal-change metamorphism between two specs that differ
/// only in their transversal.
pub fn build_metamorphism(
    spec1: &WreathSpec,
    spec2: &WreathSpec,
    limits: &Limits,
) -> Result<Metamorphism, Error> {
    if !spec1.d.same_op(&spec2.d)
        || !spec1.b().same_op(spec2.b())
        || spec1.a.members() != spec2.a.members()
        || !spec1.factors.z.z.same_op(&spec2.factors.z.z)
        || spec1.factors.phi != spec2.factors.phi
        || spec1.factors.eta != spec2.factors.eta
        || spec1.factors.kappa != spec2.factors.kappa
        || spec1.factors.xi != spec2.factors.xi
    {
        return Err(Error::SpecMismatch {
            what: "metamorphism requires the same D, A, B, Z and factors".into(),
        });
    }
    let c1 = wreath_product_with(spec1, false, limits)?;
    let c2 = wreath_product_with(spec2, false, limits)?;
    let d = &spec1.d;
    let e_d = d.identity().expect("loop");
    let nf = spec1.f_order().expect("built");

    // tau_1 restricted to V2 must hit V1 bijectively.
    let mut seen = vec![false; spec1.trans.len()];
    for &v in spec2.trans.members() {
        let img = spec1.trans.tau(v);
        let pos = spec1
            .trans
            .position(img)
            .expect("tau_1 lands in V1");
        if seen[pos] {
            return Err(Error::SpecMismatch {
                what: "tau_1 is not injective on V2".into(),
            });
        }
        seen[pos] = true;
    }

    // mu f (v) = f^{e / psi_1(v)} (tau_1(v)) for v in V2.
    let mut map = vec![0u32; c1.order()];
    for g in d.elements() {
        for fc in 0..nf {
            let f = spec1.f_decode(fc);
            let vals: Vec<u32> = spec2
                .trans
                .members()
                .iter()
                .map(|&v| {
                    let s = d.rd(e_d, spec1.trans.psi(v));
                    let src = spec1
                        .trans
                        .position(spec1.trans.tau(v))
                        .expect("tau_1 lands in V1");
                    spec1.factors.act(spec1.a_index(s), f.value(src)).0
                })
                .collect();
            let code = spec2.f_encode(&FElement { vals });
            map[g.index() * nf + fc] = (g.index() * nf + code) as u32;
        }
    }
    let mut hit = vec![false; c2.order()];
    let mut bijective = true;
    for &m in &map {
        if hit[m as usize] {
            bijective = false;
            break;
        }
        hit[m as usize] = true;
    }

    let center2 = classify_with(&c2, limits)?.center;
    let mut central_mask = vec![false; c2.order()];
    for e in &center2 {
        central_mask[e.index()] = true;
    }
    let n1 = c1.order();
    let mut nu = vec![0u32; n1 * n1];
    let mut nu_all_central = true;
    let mut first_noncentral = None;
    for x in 0..n1 {
        for y in 0..n1 {
            let prod = map[c1.mul(c1.el(x), c1.el(y)).index()];
            let split = c2.mul(c2.el(map[x] as usize), c2.el(map[y] as usize));
            let v = c2.rd(c2.el(prod as usize), split);
            nu[x * n1 + y] = v.0;
            if !central_mask[v.index()] && nu_all_central {
                nu_all_central = false;
                first_noncentral = Some((x, y));
            }
        }
    }
    Ok(Metamorphism {
        map,
        nu,
        bijective,
        nu_all_central,
        first_noncentral,
        c1,
        c2,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gen;

    #[test]
    fn transversal_of_whole_group_is_identity_only() {
        let s3 = gen::sym3();
        let all = SubStructure::new(&s3, s3.elements().collect()).unwrap();
        let t = find_transversal(&s3, &all).unwrap();
        assert_eq!(t.len(), 1);
        assert_eq!(t.members()[0].index(), 0);
    }

    #[test]
    fn s3_mod_c2_has_three_cosets() {
        let s3 = gen::sym3();
        let a = SubStructure::new(&s3, vec![s3.el(0), s3.el(1)]).unwrap();
        let t = find_transversal(&s3, &a).unwrap();
        assert_eq!(t.len(), 3);
        assert_eq!(t.members()[0].index(), 0, "identity first");
        for g in s3.elements() {
            let (s, v) = decompose(&t, g);
            assert_eq!(s3.mul(s, v), g, "g = psi(g) tau(g)");
            assert!(a.contains(s));
        }
    }

    #[test]
    fn octonion_transversal_example() {
        let o = gen::cayley_dickson(3).unwrap();
        // A = {1, e1, -1, -e1}
        let a = SubStructure::new(&o, vec![o.el(0), o.el(1), o.el(8), o.el(9)]).unwrap();
        let t = find_transversal(&o, &a).unwrap();
        assert_eq!(t.len(), 4);
        let v: Vec<usize> = t.members().iter().map(|e| e.index()).collect();
        assert_eq!(v[0], 0);
    }

    #[test]
    fn action_fixed_points() {
        let s3 = gen::sym3();
        let a = SubStructure::new(&s3, vec![s3.el(0), s3.el(1)]).unwrap();
        let t = find_transversal(&s3, &a).unwrap();
        let e = s3.identity().unwrap();
        // e^[s] = e for s in A, e^[q] = q for q in V
        for &s in a.members() {
            assert_eq!(action(&s3, &t, e, s), e);
        }
        for &q in t.members() {
            assert_eq!(action(&s3, &t, e, q), q);
        }
    }

    #[test]
    fn f_act_identity_is_identity() {
        let spec = WreathSpec::trivial(
            gen::sym3(),
            vec![Element(0), Element(1)],
            gen::cyclic(3),
        )
        .unwrap();
        let e = spec.d.identity().unwrap();
        for code in 0..spec.f_order().unwrap() {
            let f = spec.f_decode(code);
            assert_eq!(spec.f_act(&f, e), f, "f^{{e}} = f");
        }
    }

    #[test]
    fn s_factor_of_identity_is_identity() {
        let spec = WreathSpec::trivial(
            gen::sym3(),
            vec![Element(0), Element(1)],
            gen::cyclic(3),
        )
        .unwrap();
        let e = spec.d.identity().unwrap();
        for &v in spec.trans.members() {
            assert_eq!(spec.s_factor(e, v), e, "s(e, v) = e");
        }
    }

    #[test]
    fn wreath_order_162_is_a_group_here() {
        let spec = WreathSpec::trivial(
            gen::sym3(),
            vec![Element(0), Element(1)],
            gen::cyclic(3),
        )
        .unwrap();
        let c = wreath_product(&spec, false).unwrap();
        assert_eq!(c.order(), 162);
        // identity behaviour
        let e = c.identity().expect("wreath product is a loop");
        assert_eq!(e.index(), 0);
    }

    #[test]
    fn wreath_cap_enforced() {
        let spec = WreathSpec::trivial(
            gen::sym3(),
            vec![Element(0)],
            gen::cyclic(3),
        )
        .unwrap();
        // |V| = 6, so |C| = 6 * 3^6 = 4374 > 4096
        assert!(matches!(
            wreath_product(&spec, false),
            Err(Error::WreathCap { .. })
        ));
    }
}
