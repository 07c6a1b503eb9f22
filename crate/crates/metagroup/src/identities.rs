//! Exhaustive verification of the loop/metagroup identity catalog.
//!
//! Laws are addressed by stable catalog ids. In the formulas below `\` is
//! left division, `/` is right division, `t(a,b,c) = ((ab)c)/(a(bc))` is the
//! associator and `p` ranges over the computed center:
//!
//! - `2.2.1`  b\e = (e/b) t(e/b, b, b\e)
//! - `2.2.2`  (a\e)b = (a\b) t(e/a, a, a\e) / t(e/a, a, a\b)
//! - `2.2.3`  b(e/a) = (b/a) t(b/a, a, a\e) / t(e/a, a, a\e)
//! - `2.3.1`  t(p1 a1, p2 a2, p3 a3) = t(a1, a2, a3)
//! - `2.3.2`  t(a, a\e, a) t(a\e, a, e/a) = e
//! - `2.6.1`  e/(ab) = (e/b)(e/a) t(e/a, a, b) / t(e/b, e/a, ab)
//! - `2.6.2`  (ab)\e = (b\e)(a\e) t(ab, b\e, a\e) / t(a, b, b\e)
//! - `2.6.3`  a/(bc) = ((a/c)/b) t(a/(bc), b, c)
//! - `2.6.4`  (bc)\a = (c\(b\a)) / t(b, c, (bc)\a)
//!
//! All checks exhaust the indicated tuple space; a failing law reports the
//! lexicographically first counterexample tuple.

use serde::Serialize;

use crate::classify::{classify_with, StructureReport};
use crate::error::Error;
use crate::table::{Element, Limits, MagmaTable};

/// Catalog ids of the laws checked by [`verify_core_identities`].
pub const LAW_IDS: [&str; 9] = [
    "2.2.1", "2.2.2", "2.2.3", "2.3.1", "2.3.2", "2.6.1", "2.6.2", "2.6.3", "2.6.4",
];

/// Result of checking one law.
#[derive(Debug, Clone, Serialize)]
pub struct LawCheck {
    pub id: &'static str,
    pub pass: bool,
    /// Lexicographically first failing tuple, in the law's quantifier order.
    pub counterexample: Option<Vec<Element>>,
    /// Number of tuples the exhaustive scan covers.
    pub cases: u64,
}

/// Per-law verdicts for one table.
#[derive(Debug, Clone, Serialize)]
pub struct IdentityReport {
    pub table: String,
    pub laws: Vec<LawCheck>,
}

impl IdentityReport {
    pub fn all_pass(&self) -> bool {
        self.laws.iter().all(|l| l.pass)
    }
}

/// Associator evaluation with an optional dense memo.
struct Assoc<'a> {
    g: &'a MagmaTable,
    memo: Option<Vec<u32>>,
}

impl<'a> Assoc<'a> {
    fn new(g: &'a MagmaTable) -> Self {
        let n = g.order();
        // 2^24 entries caps the memo at 64 MiB.
        let memo = if n.pow(3) <= 1 << 24 {
            let mut memo = vec![0u32; n * n * n];
            for a in 0..n {
                for b in 0..n {
                    let ab = g.mul(g.el(a), g.el(b));
                    for c in 0..n {
                        let lhs = g.mul(ab, g.el(c));
                        let rhs = g.mul(g.el(a), g.mul(g.el(b), g.el(c)));
                        memo[(a * n + b) * n + c] = g.rd(lhs, rhs).0;
                    }
                }
            }
            Some(memo)
        } else {
            None
        };
        Assoc { g, memo }
    }

    #[inline]
    fn t(&self, a: Element, b: Element, c: Element) -> Element {
        match &self.memo {
            Some(m) => {
                let n = self.g.order();
                Element(m[(a.index() * n + b.index()) * n + c.index()])
            }
            None => {
                let g = self.g;
                let lhs = g.mul(g.mul(a, b), c);
                let rhs = g.mul(a, g.mul(b, c));
                g.rd(lhs, rhs)
            }
        }
    }
}

struct Ctx<'a> {
    g: &'a MagmaTable,
    e: Element,
    center: Vec<Element>,
    assoc: Assoc<'a>,
}

impl<'a> Ctx<'a> {
    /// `e / z`; for central z this is the group inverse within the center.
    #[inline]
    fn cinv(&self, z: Element) -> Element {
        self.g.rd(self.e, z)
    }

    /// `x * t1 / t2` with central t1, t2.
    #[inline]
    fn adjust(&self, x: Element, t1: Element, t2: Element) -> Element {
        self.g.mul(self.g.mul(x, t1), self.cinv(t2))
    }
}

/// Runs the whole law catalog on a metagroup.
pub fn verify_core_identities(g: &MagmaTable) -> Result<IdentityReport, Error> {
    verify_core_identities_with(g, &Limits::default())
}

pub fn verify_core_identities_with(
    g: &MagmaTable,
    limits: &Limits,
) -> Result<IdentityReport, Error> {
    let ctx = make_ctx(g, limits)?;
    let laws = LAW_IDS.iter().map(|id| check_law(&ctx, id)).collect();
    Ok(IdentityReport {
        table: g.name().to_string(),
        laws,
    })
}

/// Checks a single law by catalog id.
pub fn verify_identity(g: &MagmaTable, id: &str) -> Result<LawCheck, Error> {
    verify_identity_with(g, id, &Limits::default())
}

pub fn verify_identity_with(g: &MagmaTable, id: &str, limits: &Limits) -> Result<LawCheck, Error> {
    let id = LAW_IDS
        .iter()
        .find(|&&l| l == id)
        .copied()
        .ok_or_else(|| Error::UnknownLaw(id.to_string()))?;
    let ctx = make_ctx(g, limits)?;
    Ok(check_law(&ctx, id))
}

fn make_ctx<'a>(g: &'a MagmaTable, limits: &Limits) -> Result<Ctx<'a>, Error> {
    let report: StructureReport = classify_with(g, limits)?;
    if !report.is_metagroup {
        return Err(Error::NotMetagroup {
            table: g.name().to_string(),
            reason: "identity suite requires a metagroup".into(),
        });
    }
    Ok(Ctx {
        g,
        e: report.identity.expect("metagroup has identity"),
        center: report.center,
        assoc: Assoc::new(g),
    })
}

fn check_law(ctx: &Ctx<'_>, id: &'static str) -> LawCheck {
    match id {
        "2.2.1" => law_2_2_1(ctx),
        "2.2.2" => law_2_2_2(ctx),
        "2.2.3" => law_2_2_3(ctx),
        "2.3.1" => law_2_3_1(ctx),
        "2.3.2" => law_2_3_2(ctx),
        "2.6.1" => law_2_6_1(ctx),
        "2.6.2" => law_2_6_2(ctx),
        "2.6.3" => law_2_6_3(ctx),
        "2.6.4" => law_2_6_4(ctx),
        _ => unreachable!("unknown law id"),
    }
}

fn outcome(id: &'static str, cases: u64, counterexample: Option<Vec<Element>>) -> LawCheck {
    LawCheck {
        id,
        pass: counterexample.is_none(),
        counterexample,
        cases,
    }
}

fn law_2_2_1(ctx: &Ctx<'_>) -> LawCheck {
    let g = ctx.g;
    let e = ctx.e;
    let mut bad = None;
    for b in g.elements() {
        let linv = g.ld(b, e);
        let rinv = g.rd(e, b);
        let t = ctx.assoc.t(rinv, b, linv);
        if linv != g.mul(rinv, t) {
            bad = Some(vec![b]);
            break;
        }
    }
    outcome("2.2.1", g.order() as u64, bad)
}

fn law_2_2_2(ctx: &Ctx<'_>) -> LawCheck {
    let g = ctx.g;
    let e = ctx.e;
    let mut bad = None;
    'scan: for a in g.elements() {
        let a_linv = g.ld(a, e);
        let a_rinv = g.rd(e, a);
        let t1 = ctx.assoc.t(a_rinv, a, a_linv);
        for b in g.elements() {
            let lhs = g.mul(a_linv, b);
            let t2 = ctx.assoc.t(a_rinv, a, g.ld(a, b));
            let rhs = ctx.adjust(g.ld(a, b), t1, t2);
            if lhs != rhs {
                bad = Some(vec![a, b]);
                break 'scan;
            }
        }
    }
    outcome("2.2.2", (ctx.g.order() * ctx.g.order()) as u64, bad)
}

fn law_2_2_3(ctx: &Ctx<'_>) -> LawCheck {
    let g = ctx.g;
    let e = ctx.e;
    let mut bad = None;
    'scan: for a in g.elements() {
        let a_linv = g.ld(a, e);
        let a_rinv = g.rd(e, a);
        let t2 = ctx.assoc.t(a_rinv, a, a_linv);
        for b in g.elements() {
            let lhs = g.mul(b, a_rinv);
            let q = g.rd(b, a);
            let t1 = ctx.assoc.t(q, a, a_linv);
            let rhs = ctx.adjust(q, t1, t2);
            if lhs != rhs {
                bad = Some(vec![a, b]);
                break 'scan;
            }
        }
    }
    outcome("2.2.3", (ctx.g.order() * ctx.g.order()) as u64, bad)
}

/// Center-invariance of the associator in every slot.
///
/// The full tuple space is (a1, a2, a3, p1, p2, p3); the fast path checks one
/// shifted slot at a time, which decides the same universally quantified
/// statement. On failure the full lexicographic scan recovers the first
/// failing tuple.
fn law_2_3_1(ctx: &Ctx<'_>) -> LawCheck {
    let g = ctx.g;
    let n = g.order() as u64;
    let z = ctx.center.len() as u64;
    let cases = n * n * n * z * z * z;

    let mut ok = true;
    'fast: for a1 in g.elements() {
        for a2 in g.elements() {
            for a3 in g.elements() {
                let t = ctx.assoc.t(a1, a2, a3);
                for &p in &ctx.center {
                    if ctx.assoc.t(g.mul(p, a1), a2, a3) != t
                        || ctx.assoc.t(a1, g.mul(p, a2), a3) != t
                        || ctx.assoc.t(a1, a2, g.mul(p, a3)) != t
                    {
                        ok = false;
                        break 'fast;
                    }
                }
            }
        }
    }
    if ok {
        return outcome("2.3.1", cases, None);
    }

    for a1 in g.elements() {
        for a2 in g.elements() {
            for a3 in g.elements() {
                let t = ctx.assoc.t(a1, a2, a3);
                for &p1 in &ctx.center {
                    for &p2 in &ctx.center {
                        for &p3 in &ctx.center {
                            if ctx.assoc.t(g.mul(p1, a1), g.mul(p2, a2), g.mul(p3, a3)) != t {
                                return outcome(
                                    "2.3.1",
                                    cases,
                                    Some(vec![a1, a2, a3, p1, p2, p3]),
                                );
                            }
                        }
                    }
                }
            }
        }
    }
    unreachable!("fast path found a violation the full scan did not")
}

fn law_2_3_2(ctx: &Ctx<'_>) -> LawCheck {
    let g = ctx.g;
    let e = ctx.e;
    let mut bad = None;
    for a in g.elements() {
        let linv = g.ld(a, e);
        let rinv = g.rd(e, a);
        let t1 = ctx.assoc.t(a, linv, a);
        let t2 = ctx.assoc.t(linv, a, rinv);
        if g.mul(t1, t2) != e {
            bad = Some(vec![a]);
            break;
        }
    }
    outcome("2.3.2", g.order() as u64, bad)
}

fn law_2_6_1(ctx: &Ctx<'_>) -> LawCheck {
    let g = ctx.g;
    let e = ctx.e;
    let mut bad = None;
    'scan: for a in g.elements() {
        let a_rinv = g.rd(e, a);
        for b in g.elements() {
            let ab = g.mul(a, b);
            let lhs = g.rd(e, ab);
            let t1 = ctx.assoc.t(a_rinv, a, b);
            let t2 = ctx.assoc.t(g.rd(e, b), a_rinv, ab);
            let rhs = ctx.adjust(g.mul(g.rd(e, b), a_rinv), t1, t2);
            if lhs != rhs {
                bad = Some(vec![a, b]);
                break 'scan;
            }
        }
    }
    outcome("2.6.1", (ctx.g.order() * ctx.g.order()) as u64, bad)
}

fn law_2_6_2(ctx: &Ctx<'_>) -> LawCheck {
    let g = ctx.g;
    let e = ctx.e;
    let mut bad = None;
    'scan: for a in g.elements() {
        let a_linv = g.ld(a, e);
        for b in g.elements() {
            let ab = g.mul(a, b);
            let b_linv = g.ld(b, e);
            let lhs = g.ld(ab, e);
            let t1 = ctx.assoc.t(ab, b_linv, a_linv);
            let t2 = ctx.assoc.t(a, b, b_linv);
            let rhs = ctx.adjust(g.mul(b_linv, a_linv), t1, t2);
            if lhs != rhs {
                bad = Some(vec![a, b]);
                break 'scan;
            }
        }
    }
    outcome("2.6.2", (ctx.g.order() * ctx.g.order()) as u64, bad)
}

fn law_2_6_3(ctx: &Ctx<'_>) -> LawCheck {
    let g = ctx.g;
    let n = g.order();
    let mut bad = None;
    'scan: for a in g.elements() {
        for b in g.elements() {
            for c in g.elements() {
                let lhs = g.rd(a, g.mul(b, c));
                let rhs = g.mul(g.rd(g.rd(a, c), b), ctx.assoc.t(lhs, b, c));
                if lhs != rhs {
                    bad = Some(vec![a, b, c]);
                    break 'scan;
                }
            }
        }
    }
    outcome("2.6.3", (n * n * n) as u64, bad)
}

fn law_2_6_4(ctx: &Ctx<'_>) -> LawCheck {
    let g = ctx.g;
    let n = g.order();
    let mut bad = None;
    'scan: for a in g.elements() {
        for b in g.elements() {
            for c in g.elements() {
                let lhs = g.ld(g.mul(b, c), a);
                let t = ctx.assoc.t(b, c, lhs);
                let rhs = g.mul(g.ld(c, g.ld(b, a)), ctx.cinv(t));
                if lhs != rhs {
                    bad = Some(vec![a, b, c]);
                    break 'scan;
                }
            }
        }
    }
    outcome("2.6.4", (n * n * n) as u64, bad)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gen;

    #[test]
    fn groups_pass_everything() {
        for g in [gen::cyclic(6), gen::sym3(), gen::quaternion8()] {
            let report = verify_core_identities(&g).unwrap();
            assert!(report.all_pass(), "{} should pass all laws", g.name());
            assert_eq!(report.laws.len(), LAW_IDS.len());
        }
    }

    #[test]
    fn octonions_pass_everything() {
        let o = gen::cayley_dickson(3).unwrap();
        let report = verify_core_identities(&o).unwrap();
        for law in &report.laws {
            assert!(law.pass, "law {} failed: {:?}", law.id, law.counterexample);
        }
    }

    #[test]
    fn single_law_filter() {
        let g = gen::cyclic(6);
        let check = verify_identity(&g, "2.6.1").unwrap();
        assert!(check.pass);
        assert!(matches!(
            verify_identity(&g, "9.9.9"),
            Err(Error::UnknownLaw(_))
        ));
    }

    #[test]
    fn refuses_non_metagroups() {
        // quasigroup without identity
        let h = crate::table::MagmaTable::from_fn(
            "sub5",
            (0..5).map(|i| i.to_string()).collect(),
            |a, b| (a + 5 - b) % 5,
        )
        .unwrap();
        assert!(matches!(
            verify_core_identities(&h),
            Err(Error::NotMetagroup { .. })
        ));
    }
}
