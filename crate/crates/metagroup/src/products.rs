//! Direct, smashed and smashed twisted products of metagroups, factor-system
//! validation, closed-form associator cross-checks, normality predicates and
//! exhaustive factor search.
//!
//! A factor system over tables A and B consists of an action table `phi`
//! (row `a` is the permutation `b -> b^a` of B), correction tables `eta`
//! (composition defect of the action), `kappa` (multiplicativity defect) and
//! `xi` (product twist), all valued in a commutative group Z embedded
//! centrally into both A and B. The product carrier is the plain Cartesian
//! product `A x B` in a-major order; the equivalence induced by moving a
//! central factor between the two slots only constrains `xi`, which must be
//! constant on its classes.

use serde::Serialize;

use crate::classify::classify_with;
use crate::error::Error;
use crate::subquot::SubStructure;
use crate::table::{Element, Limits, MagmaTable};

/// A commutative group Z with injective central embeddings into A and B.
#[derive(Debug, Clone)]
pub struct CentralEmbedding {
    pub z: MagmaTable,
    /// Image of each Z element in A, indexed by Z element.
    pub into_a: Vec<Element>,
    /// Image of each Z element in B, indexed by Z element.
    pub into_b: Vec<Element>,
}

impl CentralEmbedding {
    pub fn new(z: MagmaTable, into_a: Vec<Element>, into_b: Vec<Element>) -> Result<Self, Error> {
        if into_a.len() != z.order() || into_b.len() != z.order() {
            return Err(Error::BadTable {
                table: z.name().to_string(),
                msg: "embedding arrays must have one entry per Z element".into(),
            });
        }
        Ok(CentralEmbedding { z, into_a, into_b })
    }

    /// The trivial embedding of the one-element group.
    pub fn trivial(a: &MagmaTable, b: &MagmaTable) -> Result<Self, Error> {
        let ea = a.identity().ok_or_else(|| Error::NoIdentity {
            table: a.name().to_string(),
        })?;
        let eb = b.identity().ok_or_else(|| Error::NoIdentity {
            table: b.name().to_string(),
        })?;
        Ok(CentralEmbedding {
            z: crate::gen::cyclic(1),
            into_a: vec![ea],
            into_b: vec![eb],
        })
    }

    /// Full semantic validation against the two carrier tables.
    ///
    /// Checks that Z is a commutative group, that both embeddings are
    /// injective homomorphisms into the computed centers, and that each
    /// carrier's minimal central associator subgroup lies inside the image.
    pub fn validate(
        &self,
        a: &MagmaTable,
        b: &MagmaTable,
        limits: &Limits,
    ) -> Result<(), Error> {
        let zr = classify_with(&self.z, limits)?;
        if !zr.is_group() {
            return Err(Error::BadTable {
                table: self.z.name().to_string(),
                msg: "Z must be a group".into(),
            });
        }
        if zr.commutant.len() != self.z.order() {
            return Err(Error::BadTable {
                table: self.z.name().to_string(),
                msg: "Z must be commutative".into(),
            });
        }
        for (side, table, map) in [("A", a, &self.into_a), ("B", b, &self.into_b)] {
            let report = classify_with(table, limits)?;
            if !report.is_metagroup {
                return Err(Error::NotMetagroup {
                    table: table.name().to_string(),
                    reason: "product factors must be metagroups".into(),
                });
            }
            let mut seen = vec![false; table.order()];
            for (zi, &img) in map.iter().enumerate() {
                if img.index() >= table.order() {
                    return Err(Error::ElementOutOfRange {
                        table: table.name().to_string(),
                        index: img.index(),
                        order: table.order(),
                    });
                }
                if seen[img.index()] {
                    return Err(Error::BadTable {
                        table: table.name().to_string(),
                        msg: format!("embedding into {side} is not injective at Z element {zi}"),
                    });
                }
                seen[img.index()] = true;
                if !report.center_contains(img) {
                    return Err(Error::NotCentral {
                        table: table.name().to_string(),
                        witness: img.index(),
                    });
                }
            }
            for x in self.z.elements() {
                for y in self.z.elements() {
                    let lhs = map[self.z.mul(x, y).index()];
                    let rhs = table.mul(map[x.index()], map[y.index()]);
                    if lhs != rhs {
                        return Err(Error::BadTable {
                            table: table.name().to_string(),
                            msg: format!(
                                "embedding into {side} is not homomorphic at ({}, {})",
                                x.index(),
                                y.index()
                            ),
                        });
                    }
                }
            }
            for zm in &report.z_m {
                if !map.contains(zm) {
                    return Err(Error::TRangeEscapes {
                        table: table.name().to_string(),
                        witness: zm.index(),
                    });
                }
            }
        }
        Ok(())
    }

    pub fn order(&self) -> usize {
        self.z.order()
    }

    fn image_b_mask(&self, nb: usize) -> Vec<bool> {
        let mut m = vec![false; nb];
        for e in &self.into_b {
            m[e.index()] = true;
        }
        m
    }

    /// Z index of a B element, if it lies in the image.
    fn z_of_b(&self, b: Element) -> Option<Element> {
        self.into_b
            .iter()
            .position(|&x| x == b)
            .map(|i| Element(i as u32))
    }
}

/// Two tables, a shared central group and the four factor tables.
#[derive(Debug, Clone)]
pub struct SmashedSpec {
    pub a: MagmaTable,
    pub b: MagmaTable,
    pub z: CentralEmbedding,
    /// `phi[a * |B| + b]` is the index of `b^a` in B.
    pub phi: Vec<u32>,
    /// `eta[(v * |A| + u) * |B| + b]` is a Z index; outer action first slot.
    pub eta: Vec<u32>,
    /// `kappa[(u * |B| + c) * |B| + b]` is a Z index.
    pub kappa: Vec<u32>,
    /// `xi[p1 * |A||B| + p2]` is a Z index over pair indices `a * |B| + b`.
    pub xi: Vec<u32>,
    /// When false, the unit conditions on `xi` are not required and the
    /// product is only expected to be a strict quasigroup.
    pub strict_unit: bool,
}

impl SmashedSpec {
    pub fn new(
        a: MagmaTable,
        b: MagmaTable,
        z: CentralEmbedding,
        phi: Vec<u32>,
        eta: Vec<u32>,
        kappa: Vec<u32>,
        xi: Vec<u32>,
    ) -> Result<Self, Error> {
        let (na, nb, nz) = (a.order(), b.order(), z.order());
        let shape_err = |what: &str| Error::BadTable {
            table: format!("{}(x){}", a.name(), b.name()),
            msg: format!("factor table {what} has the wrong shape"),
        };
        if phi.len() != na * nb || phi.iter().any(|&v| v as usize >= nb) {
            return Err(shape_err("phi"));
        }
        if eta.len() != na * na * nb || eta.iter().any(|&v| v as usize >= nz) {
            return Err(shape_err("eta"));
        }
        if kappa.len() != na * nb * nb || kappa.iter().any(|&v| v as usize >= nz) {
            return Err(shape_err("kappa"));
        }
        if xi.len() != (na * nb) * (na * nb) || xi.iter().any(|&v| v as usize >= nz) {
            return Err(shape_err("xi"));
        }
        Ok(SmashedSpec {
            a,
            b,
            z,
            phi,
            eta,
            kappa,
            xi,
            strict_unit: true,
        })
    }

    /// All-trivial factors over A and B: identity action, no corrections.
    pub fn trivial(a: MagmaTable, b: MagmaTable) -> Result<Self, Error> {
        let z = CentralEmbedding::trivial(&a, &b)?;
        let (na, nb) = (a.order(), b.order());
        let mut phi = Vec::with_capacity(na * nb);
        for _ in 0..na {
            phi.extend((0..nb as u32).collect::<Vec<_>>());
        }
        SmashedSpec::new(
            a,
            b,
            z,
            phi,
            vec![0; na * na * nb],
            vec![0; na * nb * nb],
            vec![0; (na * nb) * (na * nb)],
        )
    }

    #[inline]
    pub fn act(&self, a: Element, b: Element) -> Element {
        Element(self.phi[a.index() * self.b.order() + b.index()])
    }

    #[inline]
    fn eta_at(&self, v: Element, u: Element, b: Element) -> Element {
        Element(self.eta[(v.index() * self.a.order() + u.index()) * self.b.order() + b.index()])
    }

    #[inline]
    fn kappa_at(&self, u: Element, c: Element, b: Element) -> Element {
        Element(self.kappa[(u.index() * self.b.order() + c.index()) * self.b.order() + b.index()])
    }

    #[inline]
    pub fn pair_index(&self, a: Element, b: Element) -> usize {
        a.index() * self.b.order() + b.index()
    }

    #[inline]
    pub fn xi_at(&self, p1: (Element, Element), p2: (Element, Element)) -> Element {
        Element(self.xi[self.pair_index(p1.0, p1.1) * (self.a.order() * self.b.order())
            + self.pair_index(p2.0, p2.1)])
    }

    #[inline]
    fn zb(&self, z: Element) -> Element {
        self.z.into_b[z.index()]
    }
}

/// One validated condition of a factor system.
#[derive(Debug, Clone, Serialize)]
pub struct FactorCondition {
    pub id: &'static str,
    pub pass: bool,
    pub skipped: bool,
    pub witness: Option<String>,
}

/// Pass/fail per condition, with the first witness tuple of each failure.
#[derive(Debug, Clone, Serialize)]
pub struct FactorReport {
    pub conditions: Vec<FactorCondition>,
}

impl FactorReport {
    pub fn pass(&self) -> bool {
        self.conditions.iter().all(|c| c.pass || c.skipped)
    }

    pub fn first_failure(&self) -> Option<&FactorCondition> {
        self.conditions.iter().find(|c| !c.pass && !c.skipped)
    }
}

fn cond(id: &'static str, witness: Option<String>) -> FactorCondition {
    FactorCondition {
        id,
        pass: witness.is_none(),
        skipped: false,
        witness,
    }
}

/// Exhaustively checks every factor-system condition.
pub fn validate_factors(spec: &SmashedSpec) -> FactorReport {
    validate_factors_with(spec, &Limits::default())
}

pub fn validate_factors_with(spec: &SmashedSpec, limits: &Limits) -> FactorReport {
    let mut conditions = Vec::new();
    let (a, b, z) = (&spec.a, &spec.b, &spec.z);
    let nb = b.order();

    // 3.2.1: the central embedding itself.
    conditions.push(cond(
        "3.2.1",
        z.validate(a, b, limits).err().map(|e| e.to_string()),
    ));
    let ez = z.z.identity();
    let (ea, eb) = match (a.identity(), b.identity(), ez) {
        (Some(ea), Some(eb), Some(_)) => (ea, eb),
        _ => {
            conditions.push(FactorCondition {
                id: "3.2.3",
                pass: false,
                skipped: false,
                witness: Some("factors must be loops".into()),
            });
            return FactorReport { conditions };
        }
    };
    let ez = ez.expect("checked");

    // 3.2.3: each phi row is a bijection of B.
    let mut w = None;
    'rows: for u in a.elements() {
        let mut seen = vec![false; nb];
        for x in b.elements() {
            let img = spec.act(u, x);
            if seen[img.index()] {
                w = Some(format!("phi({}) repeats image {}", u.index(), img.index()));
                break 'rows;
            }
            seen[img.index()] = true;
        }
    }
    conditions.push(cond("3.2.3", w));

    // 3.2.4: (b^u)^v = b^{vu} eta(v,u,b); e^u = e; b^e = b.
    let mut w = None;
    'l324: for v in a.elements() {
        for u in a.elements() {
            let vu = a.mul(v, u);
            for x in b.elements() {
                let lhs = spec.act(v, spec.act(u, x));
                let rhs = b.mul(spec.act(vu, x), spec.zb(spec.eta_at(v, u, x)));
                if lhs != rhs {
                    w = Some(format!("(v,u,b) = ({},{},{})", v, u, x));
                    break 'l324;
                }
            }
        }
    }
    if w.is_none() {
        for u in a.elements() {
            if spec.act(u, eb) != eb {
                w = Some(format!("e^u != e at u = {u}"));
                break;
            }
        }
    }
    if w.is_none() {
        for x in b.elements() {
            if spec.act(ea, x) != x {
                w = Some(format!("b^e != b at b = {x}"));
                break;
            }
        }
    }
    conditions.push(cond("3.2.4", w));

    // 3.2.5: eta(v,u,gamma b) = eta(v,u,b).
    let mut w = None;
    'l325: for v in a.elements() {
        for u in a.elements() {
            for x in b.elements() {
                let base = spec.eta_at(v, u, x);
                for g in z.z.elements() {
                    let shifted = spec.eta_at(v, u, b.mul(spec.zb(g), x));
                    if shifted != base {
                        w = Some(format!("(v,u,b,gamma) = ({v},{u},{x},{g})"));
                        break 'l325;
                    }
                }
            }
        }
    }
    conditions.push(cond("3.2.5", w));

    // 3.2.6: (cb)^u = c^u b^u kappa(u,c,b).
    let mut w = None;
    'l326: for u in a.elements() {
        for c in b.elements() {
            for x in b.elements() {
                let lhs = spec.act(u, b.mul(c, x));
                let rhs = b.mul(
                    b.mul(spec.act(u, c), spec.act(u, x)),
                    spec.zb(spec.kappa_at(u, c, x)),
                );
                if lhs != rhs {
                    w = Some(format!("(u,c,b) = ({u},{c},{x})"));
                    break 'l326;
                }
            }
        }
    }
    conditions.push(cond("3.2.6", w));

    // 3.2.7: kappa invariance under central shifts, unit on central images.
    let mut w = None;
    'l327: for u in a.elements() {
        for c in b.elements() {
            for x in b.elements() {
                let base = spec.kappa_at(u, c, x);
                for g in z.z.elements() {
                    let gb = spec.zb(g);
                    if spec.kappa_at(u, b.mul(gb, c), x) != base
                        || spec.kappa_at(u, c, b.mul(gb, x)) != base
                    {
                        w = Some(format!("(u,c,b,gamma) = ({u},{c},{x},{g})"));
                        break 'l327;
                    }
                }
            }
        }
        for g in z.z.elements() {
            let gb = spec.zb(g);
            for x in b.elements() {
                if spec.kappa_at(u, gb, x) != ez || spec.kappa_at(u, x, gb) != ez {
                    w = Some(format!("kappa with central slot at (u,gamma,b) = ({u},{g},{x})"));
                    break 'l327;
                }
            }
        }
    }
    conditions.push(cond("3.2.7", w));

    // 3.2.8 invariance part: xi((gamma u, c),(v, b)) = xi((u,c),(gamma v,b)) = xi((u,c),(v,b)).
    let mut w = None;
    'l328: for u in a.elements() {
        for c in b.elements() {
            for v in a.elements() {
                for x in b.elements() {
                    let base = spec.xi_at((u, c), (v, x));
                    for g in z.z.elements() {
                        let ga = z.into_a[g.index()];
                        if spec.xi_at((a.mul(ga, u), c), (v, x)) != base
                            || spec.xi_at((u, c), (a.mul(ga, v), x)) != base
                        {
                            w = Some(format!("((u,c),(v,b),gamma) = (({u},{c}),({v},{x}),{g})"));
                            break 'l328;
                        }
                    }
                }
            }
        }
    }
    conditions.push(cond("3.2.8", w));

    // 3.2.8 unit part: xi((gamma, e), (v,b)) = e and xi((u,c), (gamma, e)) = e.
    if spec.strict_unit {
        let mut w = None;
        'unit: for g in z.z.elements() {
            let ga = z.into_a[g.index()];
            for v in a.elements() {
                for x in b.elements() {
                    if spec.xi_at((ga, eb), (v, x)) != ez {
                        w = Some(format!("xi((gamma,e),(v,b)) at ({g},({v},{x}))"));
                        break 'unit;
                    }
                    if spec.xi_at((v, x), (ga, eb)) != ez {
                        w = Some(format!("xi((u,c),(gamma,e)) at (({v},{x}),{g})"));
                        break 'unit;
                    }
                }
            }
        }
        conditions.push(cond("3.2.8-unit", w));
    } else {
        conditions.push(FactorCondition {
            id: "3.2.8-unit",
            pass: true,
            skipped: true,
            witness: None,
        });
    }

    // 3.2.2: xi constant on classes generated by (gamma v, b) ~ (v, gamma b).
    let mut w = None;
    'l322: for u in a.elements() {
        for c in b.elements() {
            for v in a.elements() {
                for x in b.elements() {
                    for g in z.z.elements() {
                        let (ga, gb) = (z.into_a[g.index()], spec.zb(g));
                        let moved_second = spec.xi_at((u, c), (a.mul(ga, v), x))
                            == spec.xi_at((u, c), (v, b.mul(gb, x)));
                        let moved_first = spec.xi_at((a.mul(ga, u), c), (v, x))
                            == spec.xi_at((u, b.mul(gb, c)), (v, x));
                        if !moved_second || !moved_first {
                            w = Some(format!("((u,c),(v,b),gamma) = (({u},{c}),({v},{x}),{g})"));
                            break 'l322;
                        }
                    }
                }
            }
        }
    }
    conditions.push(cond("3.2.2", w));

    // z-shift: the action only depends on the central coset of its index.
    let mut w = None;
    'zs: for u in a.elements() {
        for g in z.z.elements() {
            let shifted = a.mul(z.into_a[g.index()], u);
            for x in b.elements() {
                if spec.act(shifted, x) != spec.act(u, x) {
                    w = Some(format!("(u,gamma,b) = ({u},{g},{x})"));
                    break 'zs;
                }
            }
        }
    }
    conditions.push(cond("z-shift", w));

    // z-fix: the action fixes the central image pointwise.
    let mut w = None;
    'zf: for u in a.elements() {
        for g in z.z.elements() {
            let gb = spec.zb(g);
            if spec.act(u, gb) != gb {
                w = Some(format!("(u,gamma) = ({u},{g})"));
                break 'zf;
            }
        }
    }
    conditions.push(cond("z-fix", w));

    FactorReport { conditions }
}

/// Which of the two product laws to build.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum ProductKind {
    /// `(a1,b1)(a2,b2) = (a1 a2, xi b1 b2^{a1})`
    Smashed,
    /// `(a1,b1)(a2,b2) = (a1 a2, xi b2^{a1} b1)`
    Twisted,
}

impl ProductKind {
    pub fn label(self) -> &'static str {
        match self {
            ProductKind::Smashed => "smashed",
            ProductKind::Twisted => "twisted",
        }
    }
}

fn pair_names(a: &MagmaTable, b: &MagmaTable) -> Vec<String> {
    let mut names = Vec::with_capacity(a.order() * b.order());
    for an in a.elem_names() {
        for bn in b.elem_names() {
            names.push(format!("({an},{bn})"));
        }
    }
    names
}

/// Componentwise direct product, factor 0 most significant in the index.
pub fn direct_product(factors: &[&MagmaTable]) -> Result<MagmaTable, Error> {
    direct_product_with(factors, &Limits::default())
}

pub fn direct_product_with(factors: &[&MagmaTable], limits: &Limits) -> Result<MagmaTable, Error> {
    if factors.is_empty() {
        return Err(Error::EmptyProduct);
    }
    for f in factors {
        let report = classify_with(f, limits)?;
        if !report.is_metagroup {
            return Err(Error::NotMetagroup {
                table: f.name().to_string(),
                reason: "direct product factors must be metagroups".into(),
            });
        }
    }
    if factors.len() == 1 {
        return Ok(factors[0].clone());
    }
    let mut order = 1usize;
    for f in factors {
        order = order
            .checked_mul(f.order())
            .ok_or(Error::OrderCap {
                requested: usize::MAX,
                cap: limits.order_cap,
            })?;
    }
    limits.check_order(order)?;

    let radices: Vec<usize> = factors.iter().map(|f| f.order()).collect();
    let decode = |mut idx: usize| -> Vec<usize> {
        let mut digits = vec![0usize; radices.len()];
        for j in (0..radices.len()).rev() {
            digits[j] = idx % radices[j];
            idx /= radices[j];
        }
        digits
    };
    let mut names = Vec::with_capacity(order);
    for i in 0..order {
        let digits = decode(i);
        let parts: Vec<&str> = digits
            .iter()
            .zip(factors)
            .map(|(&d, f)| f.elem_names()[d].as_str())
            .collect();
        names.push(format!("({})", parts.join(",")));
    }
    let name = factors
        .iter()
        .map(|f| f.name())
        .collect::<Vec<_>>()
        .join("x");
    MagmaTable::from_fn(name, names, |x, y| {
        let (dx, dy) = (decode(x), decode(y));
        let mut idx = 0usize;
        for (j, f) in factors.iter().enumerate() {
            idx = idx * radices[j] + f.mul(f.el(dx[j]), f.el(dy[j])).index();
        }
        idx
    })
}

/// Builds the smashed product `A (x) B`.
pub fn smashed_product(spec: &SmashedSpec) -> Result<MagmaTable, Error> {
    build_product(spec, ProductKind::Smashed, &Limits::default())
}

/// Builds the smashed twisted product `A (*) B`.
pub fn smashed_twisted_product(spec: &SmashedSpec) -> Result<MagmaTable, Error> {
    build_product(spec, ProductKind::Twisted, &Limits::default())
}

pub fn build_product(
    spec: &SmashedSpec,
    kind: ProductKind,
    limits: &Limits,
) -> Result<MagmaTable, Error> {
    let report = validate_factors_with(spec, limits);
    if let Some(fail) = report.first_failure() {
        return Err(Error::InvalidFactors {
            condition: fail.id,
            witness: fail.witness.clone(),
        });
    }
    let (a, b) = (&spec.a, &spec.b);
    let order = a.order() * b.order();
    limits.check_order(order)?;
    let nb = b.order();
    let name = match kind {
        ProductKind::Smashed => format!("{}(x){}", a.name(), b.name()),
        ProductKind::Twisted => format!("{}(*){}", a.name(), b.name()),
    };
    MagmaTable::from_fn(name, pair_names(a, b), |x, y| {
        let (a1, b1) = (a.el(x / nb), b.el(x % nb));
        let (a2, b2) = (a.el(y / nb), b.el(y % nb));
        let zb = spec.zb(spec.xi_at((a1, b1), (a2, b2)));
        let acted = spec.act(a1, b2);
        let bp = match kind {
            ProductKind::Smashed => b.mul(zb, b.mul(b1, acted)),
            ProductKind::Twisted => b.mul(zb, b.mul(acted, b1)),
        };
        a.mul(a1, a2).index() * nb + bp.index()
    })
}

/// The product's associator from factor-level data only.
///
/// The value is the pair `(t_A(a1,a2,a3), y)` where `y` collects the central
/// B-valued corrections; it is oriented so that `I1 = t * I2` with
/// `I1 = ((p1 p2) p3)` and `I2 = (p1 (p2 p3))`.
pub fn closed_form_associator(
    spec: &SmashedSpec,
    kind: ProductKind,
    p1: (Element, Element),
    p2: (Element, Element),
    p3: (Element, Element),
) -> (Element, Element) {
    let (a, b) = (&spec.a, &spec.b);
    let ((a1, b1), (a2, b2), (a3, b3)) = (p1, p2, p3);
    let a12 = a.mul(a1, a2);
    let a23 = a.mul(a2, a3);
    let t_a = a.rd(a.mul(a12, a3), a.mul(a1, a23));

    let b2_1 = spec.act(a1, b2); // b2^{a1}
    let b3_2 = spec.act(a2, b3); // b3^{a2}
    let b3_12 = spec.act(a12, b3); // b3^{a1 a2}

    let xi_12 = spec.zb(spec.xi_at((a1, b1), (a2, b2)));
    let xi_23 = spec.zb(spec.xi_at((a2, b2), (a3, b3)));
    let xi_23_acted = spec.act(a1, xi_23);
    let eta = spec.zb(spec.eta_at(a1, a2, b3));

    let y = match kind {
        ProductKind::Smashed => {
            let xi_12_3 = spec.zb(spec.xi_at((a12, b.mul(b1, b2_1)), (a3, b3)));
            let xi_1_23 = spec.zb(spec.xi_at((a1, b1), (a23, b.mul(b2, b3_2))));
            let kappa = spec.zb(spec.kappa_at(a1, b2, b3_2));
            let t_b = b.rd(b.mul(b.mul(b1, b2_1), b3_12), b.mul(b1, b.mul(b2_1, b3_12)));
            let num = b.mul(b.mul(xi_12, xi_12_3), t_b);
            let den = b.mul(b.mul(b.mul(xi_1_23, xi_23_acted), kappa), eta);
            b.rd(num, den)
        }
        ProductKind::Twisted => {
            let xi_12_3 = spec.zb(spec.xi_at((a12, b.mul(b2_1, b1)), (a3, b3)));
            let xi_1_23 = spec.zb(spec.xi_at((a1, b1), (a23, b.mul(b3_2, b2))));
            let kappa = spec.zb(spec.kappa_at(a1, b3_2, b2));
            let t_b = b.rd(b.mul(b.mul(b3_12, b2_1), b1), b.mul(b3_12, b.mul(b2_1, b1)));
            let num = b.mul(xi_12, xi_12_3);
            let den = b.mul(b.mul(b.mul(b.mul(t_b, xi_1_23), xi_23_acted), kappa), eta);
            b.rd(num, den)
        }
    };
    (t_a, y)
}

/// Agreement statistics of the closed-form associator against the table.
#[derive(Debug, Clone, Serialize)]
pub struct CrossCheck {
    pub total: u64,
    pub agree: u64,
    pub first_mismatch: Option<(usize, usize, usize)>,
}

impl CrossCheck {
    pub fn all_agree(&self) -> bool {
        self.agree == self.total
    }
}

/// Compares the closed-form associator with the table associator on every
/// triple of the built product.
pub fn cross_check_associators(
    spec: &SmashedSpec,
    kind: ProductKind,
    table: &MagmaTable,
) -> CrossCheck {
    let nb = spec.b.order();
    let n = table.order();
    let mut agree = 0u64;
    let mut first_mismatch = None;
    let dec = |i: usize| (spec.a.el(i / nb), spec.b.el(i % nb));
    for x in 0..n {
        for y in 0..n {
            let xy = table.mul(table.el(x), table.el(y));
            for w in 0..n {
                let lhs = table.mul(xy, table.el(w));
                let rhs = table.mul(table.el(x), table.mul(table.el(y), table.el(w)));
                let brute = table.rd(lhs, rhs);
                let (ta, tb) = closed_form_associator(spec, kind, dec(x), dec(y), dec(w));
                let closed = ta.index() * nb + tb.index();
                if closed == brute.index() {
                    agree += 1;
                } else if first_mismatch.is_none() {
                    first_mismatch = Some((x, y, w));
                }
            }
        }
    }
    CrossCheck {
        total: (n as u64).pow(3),
        agree,
        first_mismatch,
    }
}

/// Right inverse pair `(e,e) / (a,b)` from the closed formulas.
pub fn right_inverse_pair(
    spec: &SmashedSpec,
    kind: ProductKind,
    a: Element,
    b: Element,
) -> (Element, Element) {
    let (ta, tb) = (&spec.a, &spec.b);
    let e_b = tb.identity().expect("validated spec has loops");
    let a1 = ta.rd(ta.identity().expect("loop"), a);
    let v = spec.act(a1, b); // b^{e/a}
    let xi = spec.zb(spec.xi_at((a1, v), (a, b)));
    let b1 = match kind {
        ProductKind::Smashed => tb.rd(e_b, tb.mul(xi, v)),
        ProductKind::Twisted => tb.ld(tb.mul(xi, v), e_b),
    };
    (a1, b1)
}

/// Left inverse pair `(a,b) \ (e,e)` from the closed formulas.
pub fn left_inverse_pair(
    spec: &SmashedSpec,
    kind: ProductKind,
    a: Element,
    b: Element,
) -> (Element, Element) {
    let (ta, tb) = (&spec.a, &spec.b);
    let e_a = ta.identity().expect("loop");
    let e_b = tb.identity().expect("loop");
    let a2 = ta.ld(a, e_a);
    let a_rinv = ta.rd(e_a, a);
    let w = match kind {
        ProductKind::Smashed => spec.act(a_rinv, tb.ld(b, e_b)), // (b\e)^{e/a}
        ProductKind::Twisted => spec.act(a_rinv, tb.rd(e_b, b)), // (e/b)^{e/a}
    };
    let xi = spec.zb(spec.xi_at((a, b), (a2, w)));
    let den = tb.mul(spec.act(a_rinv, xi), spec.zb(spec.eta_at(a_rinv, a, w)));
    (a2, tb.rd(w, den))
}

/// The embedded copy of B inside a built product table.
pub fn b_slice(spec: &SmashedSpec, product: &MagmaTable) -> Result<SubStructure, Error> {
    let ea = spec.a.identity().ok_or_else(|| Error::NoIdentity {
        table: spec.a.name().to_string(),
    })?;
    let members: Vec<Element> = spec
        .b
        .elements()
        .map(|b| product.el(spec.pair_index(ea, b)))
        .collect();
    SubStructure::new(product, members)
}

/// `g H = H g` for every g, checked as set equality.
pub fn almost_normal(g: &MagmaTable, h: &SubStructure) -> bool {
    let n = g.order();
    let mut left = vec![false; n];
    let mut right = vec![false; n];
    for a in g.elements() {
        left.iter_mut().for_each(|x| *x = false);
        right.iter_mut().for_each(|x| *x = false);
        for &m in h.members() {
            left[g.mul(a, m).index()] = true;
            right[g.mul(m, a).index()] = true;
        }
        if left != right {
            return false;
        }
    }
    true
}

/// Almost normal plus the two bracketing conditions
/// `(g H) k = g (H k)` and `k (g H) = (k g) H`.
pub fn normal(g: &MagmaTable, h: &SubStructure) -> bool {
    if !almost_normal(g, h) {
        return false;
    }
    let n = g.order();
    let mut lhs = vec![false; n];
    let mut rhs = vec![false; n];
    for a in g.elements() {
        for k in g.elements() {
            lhs.iter_mut().for_each(|x| *x = false);
            rhs.iter_mut().for_each(|x| *x = false);
            for &m in h.members() {
                lhs[g.mul(g.mul(a, m), k).index()] = true;
                rhs[g.mul(a, g.mul(m, k)).index()] = true;
            }
            if lhs != rhs {
                return false;
            }
            lhs.iter_mut().for_each(|x| *x = false);
            rhs.iter_mut().for_each(|x| *x = false);
            for &m in h.members() {
                lhs[g.mul(k, g.mul(a, m)).index()] = true;
                rhs[g.mul(g.mul(k, a), m).index()] = true;
            }
            if lhs != rhs {
                return false;
            }
        }
    }
    true
}

/// Deterministic enumeration of valid factor systems over fixed (A, B, Z).
///
/// The action is enumerated per central coset of A from the permutations of B
/// compatible with the pointwise conditions; `eta` and `kappa` are derived
/// from the action; `xi` runs over its free equivalence classes. Yields only
/// specs passing [`validate_factors`].
pub struct FactorSearch {
    a: MagmaTable,
    b: MagmaTable,
    z: CentralEmbedding,
    a_class_of: Vec<usize>,
    free_classes: Vec<usize>, // A-class ids other than the identity class
    phi_candidates: Vec<Vec<Vec<u32>>>, // per free class
    pair_class_of: Vec<usize>,
    unit_class: usize,
    n_pair_classes: usize,
    free_slots: Vec<(usize, usize)>,
    phi_digits: Vec<usize>,
    xi_digits: Vec<usize>,
    cur: Option<(Vec<u32>, Vec<u32>, Vec<u32>)>, // phi, eta, kappa
    done: bool,
}

/// Starts a search; errors when the candidate space exceeds `budget`.
pub fn search_factors(
    a: &MagmaTable,
    b: &MagmaTable,
    z: &CentralEmbedding,
    budget: u128,
) -> Result<FactorSearch, Error> {
    search_factors_with(a, b, z, budget, &Limits::default())
}

pub fn search_factors_with(
    a: &MagmaTable,
    b: &MagmaTable,
    z: &CentralEmbedding,
    budget: u128,
    limits: &Limits,
) -> Result<FactorSearch, Error> {
    z.validate(a, b, limits)?;
    if b.order() > 8 {
        return Err(Error::SearchSpaceExceeded {
            needed: u128::MAX,
            budget,
        });
    }
    let (na, nb) = (a.order(), b.order());
    let ea = a.identity().expect("validated");
    let eb = b.identity().expect("validated");

    // Central cosets in A and B.
    let a_class_of = image_cosets(a, &z.into_a);
    let b_class_of = image_cosets(b, &z.into_b);
    let e_class = a_class_of[ea.index()];
    let mut free_classes: Vec<usize> = Vec::new();
    let n_a_classes = a_class_of.iter().max().map_or(0, |m| m + 1);
    for c in 0..n_a_classes {
        if c != e_class {
            free_classes.push(c);
        }
    }

    // Candidate permutations of B for the action on one nontrivial coset.
    let image_b = z.image_b_mask(nb);
    let mut base_candidates: Vec<Vec<u32>> = Vec::new();
    let mut perm = vec![0u32; nb];
    let mut used = vec![false; nb];
    gen_perms(0, &mut perm, &mut used, &mut |p: &[u32]| {
        if p[eb.index()] as usize != eb.index() {
            return;
        }
        for g in z.z.elements() {
            let gb = z.into_b[g.index()];
            // fixes the central image pointwise
            if p[gb.index()] as usize != gb.index() {
                return;
            }
            // commutes with central shifts
            for x in b.elements() {
                let shifted = b.mul(gb, x);
                if p[shifted.index()] != b.mul(gb, Element(p[x.index()])).0 {
                    return;
                }
            }
        }
        // multiplicativity defect must land in the central image
        for c in b.elements() {
            for x in b.elements() {
                let defect = b.rd(
                    Element(p[b.mul(c, x).index()]),
                    b.mul(Element(p[c.index()]), Element(p[x.index()])),
                );
                if !image_b[defect.index()] {
                    return;
                }
            }
        }
        base_candidates.push(p.to_vec());
    });
    let phi_candidates: Vec<Vec<Vec<u32>>> =
        free_classes.iter().map(|_| base_candidates.clone()).collect();

    // Pair classes and xi free slots.
    let n_b_classes = b_class_of.iter().max().map_or(0, |m| m + 1);
    let mut pair_class_of = vec![0usize; na * nb];
    for ai in 0..na {
        for bi in 0..nb {
            pair_class_of[ai * nb + bi] = a_class_of[ai] * n_b_classes + b_class_of[bi];
        }
    }
    let n_pair_classes = n_a_classes * n_b_classes;
    let unit_class = a_class_of[ea.index()] * n_b_classes + b_class_of[eb.index()];
    let mut free_slots = Vec::new();
    for p in 0..n_pair_classes {
        for q in 0..n_pair_classes {
            if p != unit_class && q != unit_class {
                free_slots.push((p, q));
            }
        }
    }

    // Budget guard over the nominal candidate space.
    let mut total: u128 = 1;
    for cands in &phi_candidates {
        total = total.saturating_mul(cands.len() as u128);
    }
    for _ in &free_slots {
        total = total.saturating_mul(z.order() as u128);
    }
    if total > budget {
        return Err(Error::SearchSpaceExceeded {
            needed: total,
            budget,
        });
    }

    let phi_digits = vec![0usize; free_classes.len()];
    let xi_digits = vec![0usize; free_slots.len()];
    Ok(FactorSearch {
        a: a.clone(),
        b: b.clone(),
        z: z.clone(),
        a_class_of,
        free_classes,
        phi_candidates,
        pair_class_of,
        unit_class,
        n_pair_classes,
        free_slots,
        phi_digits,
        xi_digits,
        cur: None,
        done: false,
    })
}

/// Left cosets of the embedded image: orbit of x under `x -> image * x`.
fn image_cosets(t: &MagmaTable, image: &[Element]) -> Vec<usize> {
    let n = t.order();
    let mut class_of = vec![usize::MAX; n];
    let mut next = 0;
    for x in 0..n {
        if class_of[x] != usize::MAX {
            continue;
        }
        class_of[x] = next;
        for &g in image {
            let y = t.mul(g, t.el(x));
            class_of[y.index()] = next;
        }
        // saturate: image products of already-assigned members
        let mut grew = true;
        while grew {
            grew = false;
            for y in 0..n {
                if class_of[y] == next {
                    for &g in image {
                        let w = t.mul(g, t.el(y));
                        if class_of[w.index()] == usize::MAX {
                            class_of[w.index()] = next;
                            grew = true;
                        }
                    }
                }
            }
        }
        next += 1;
    }
    class_of
}

fn gen_perms(pos: usize, perm: &mut Vec<u32>, used: &mut Vec<bool>, emit: &mut impl FnMut(&[u32])) {
    let n = perm.len();
    if pos == n {
        emit(perm);
        return;
    }
    for v in 0..n {
        if !used[v] {
            used[v] = true;
            perm[pos] = v as u32;
            gen_perms(pos + 1, perm, used, emit);
            used[v] = false;
        }
    }
}

impl FactorSearch {
    fn build_phi(&self) -> Vec<u32> {
        let (na, nb) = (self.a.order(), self.b.order());
        let mut phi = vec![0u32; na * nb];
        for ai in 0..na {
            let class = self.a_class_of[ai];
            let row: Vec<u32> = match self.free_classes.iter().position(|&c| c == class) {
                Some(k) => self.phi_candidates[k][self.phi_digits[k]].clone(),
                None => (0..nb as u32).collect(), // identity coset acts trivially
            };
            phi[ai * nb..(ai + 1) * nb].copy_from_slice(&row);
        }
        phi
    }

    /// Derives eta and kappa from the action; None when a defect leaves Z.
    fn derive_eta_kappa(&self, phi: &[u32]) -> Option<(Vec<u32>, Vec<u32>)> {
        let (a, b, z) = (&self.a, &self.b, &self.z);
        let (na, nb) = (a.order(), b.order());
        let act = |u: usize, x: Element| Element(phi[u * nb + x.index()]);
        let mut eta = vec![0u32; na * na * nb];
        for v in 0..na {
            for u in 0..na {
                let vu = a.mul(a.el(v), a.el(u));
                for x in 0..nb {
                    let lhs = act(v, act(u, b.el(x)));
                    let base = act(vu.index(), b.el(x));
                    let defect = b.rd(lhs, base);
                    eta[(v * na + u) * nb + x] = z.z_of_b(defect)?.0;
                }
            }
        }
        let mut kappa = vec![0u32; na * nb * nb];
        for u in 0..na {
            for c in 0..nb {
                for x in 0..nb {
                    let lhs = act(u, b.mul(b.el(c), b.el(x)));
                    let base = b.mul(act(u, b.el(c)), act(u, b.el(x)));
                    let defect = b.rd(lhs, base);
                    kappa[(u * nb + c) * nb + x] = z.z_of_b(defect)?.0;
                }
            }
        }
        Some((eta, kappa))
    }

    fn build_xi(&self) -> Vec<u32> {
        let np = self.a.order() * self.b.order();
        let mut class_val = vec![0u32; self.n_pair_classes * self.n_pair_classes];
        for (slot, &(p, q)) in self.free_slots.iter().enumerate() {
            class_val[p * self.n_pair_classes + q] = self.xi_digits[slot] as u32;
        }
        let mut xi = vec![0u32; np * np];
        for p1 in 0..np {
            for p2 in 0..np {
                let (c1, c2) = (self.pair_class_of[p1], self.pair_class_of[p2]);
                if c1 == self.unit_class || c2 == self.unit_class {
                    continue; // forced to the Z identity
                }
                xi[p1 * np + p2] = class_val[c1 * self.n_pair_classes + c2];
            }
        }
        xi
    }

    fn advance_xi(&mut self) -> bool {
        let base = self.z.order();
        for d in self.xi_digits.iter_mut().rev() {
            *d += 1;
            if *d < base {
                return true;
            }
            *d = 0;
        }
        false
    }

    fn advance_phi(&mut self) -> bool {
        for (d, cands) in self
            .phi_digits
            .iter_mut()
            .zip(&self.phi_candidates)
            .rev()
        {
            *d += 1;
            if *d < cands.len() {
                return true;
            }
            *d = 0;
        }
        false
    }
}

impl Iterator for FactorSearch {
    type Item = SmashedSpec;

    fn next(&mut self) -> Option<SmashedSpec> {
        loop {
            if self.done {
                return None;
            }
            if self.cur.is_none() {
                if self.phi_candidates.iter().any(|c| c.is_empty()) {
                    self.done = true;
                    return None;
                }
                let phi = self.build_phi();
                match self.derive_eta_kappa(&phi) {
                    Some((eta, kappa)) => {
                        self.cur = Some((phi, eta, kappa));
                        self.xi_digits.iter_mut().for_each(|d| *d = 0);
                    }
                    None => {
                        if !self.advance_phi() {
                            self.done = true;
                        }
                        continue;
                    }
                }
            }
            let (phi, eta, kappa) = self.cur.clone().expect("set above");
            let xi = self.build_xi();
            if !self.advance_xi() {
                self.cur = None;
                if !self.advance_phi() {
                    self.done = true;
                }
            }
            let spec = SmashedSpec::new(
                self.a.clone(),
                self.b.clone(),
                self.z.clone(),
                phi,
                eta,
                kappa,
                xi,
            )
            .expect("search builds well-shaped tables");
            if validate_factors(&spec).pass() {
                return Some(spec);
            }
        }
    }
}
