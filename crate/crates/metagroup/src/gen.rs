//! Built-in table generators: cyclic groups, the symmetric group on three
//! letters, the quaternion group, and signed Cayley-Dickson basis tables.
//!
//! The doubling convention is `(a,b)(c,d) = (ac - d*b, da + bc*)` with
//! conjugation negating every non-real basis element. Signed basis elements
//! are indexed sign-major: index `k < 2^level` is `+e_k`, index `2^level + k`
//! is `-e_k`.

use std::str::FromStr;

use crate::error::Error;
use crate::table::MagmaTable;

/// The cyclic group of order `n` under addition, elements named `0..n-1`.
pub fn cyclic(n: usize) -> MagmaTable {
    assert!(n >= 1, "cyclic group order must be positive");
    let names = (0..n).map(|i| i.to_string()).collect();
    MagmaTable::from_fn(format!("C{n}"), names, |a, b| (a + b) % n)
        .expect("cyclic table is well-formed")
}

/// The symmetric group S3 with composition `(s*t)(x) = s(t(x))`.
///
/// Element order: e, (12), (13), (23), (123), (132).
pub fn sym3() -> MagmaTable {
    const PERMS: [[usize; 3]; 6] = [
        [0, 1, 2], // e
        [1, 0, 2], // (12)
        [2, 1, 0], // (13)
        [0, 2, 1], // (23)
        [1, 2, 0], // (123): 1->2, 2->3, 3->1
        [2, 0, 1], // (132): 1->3, 3->2, 2->1
    ];
    let names = ["e", "(12)", "(13)", "(23)", "(123)", "(132)"]
        .iter()
        .map(|s| s.to_string())
        .collect();
    MagmaTable::from_fn("S3", names, |a, b| {
        let mut c = [0usize; 3];
        for (x, slot) in c.iter_mut().enumerate() {
            *slot = PERMS[a][PERMS[b][x]];
        }
        PERMS.iter().position(|p| *p == c).expect("closed")
    })
    .expect("sym3 table is well-formed")
}

/// The quaternion group Q8, hand-written.
///
/// Element order: 1, i, j, k, -1, -i, -j, -k.
pub fn quaternion8() -> MagmaTable {
    const ROWS: [[usize; 8]; 8] = [
        [0, 1, 2, 3, 4, 5, 6, 7],
        [1, 4, 3, 6, 5, 0, 7, 2],
        [2, 7, 4, 1, 6, 3, 0, 5],
        [3, 2, 5, 4, 7, 6, 1, 0],
        [4, 5, 6, 7, 0, 1, 2, 3],
        [5, 0, 7, 2, 1, 4, 3, 6],
        [6, 3, 0, 5, 2, 7, 4, 1],
        [7, 6, 1, 0, 3, 2, 5, 4],
    ];
    let names = ["1", "i", "j", "k", "-1", "-i", "-j", "-k"]
        .iter()
        .map(|s| s.to_string())
        .collect();
    MagmaTable::from_fn("Q8", names, |a, b| ROWS[a][b]).expect("Q8 table is well-formed")
}

/// Basis product tables for one Cayley-Dickson doubling level.
#[derive(Clone)]
struct BasisTable {
    m: usize,
    sign: Vec<i8>,
    idx: Vec<usize>,
}

impl BasisTable {
    fn reals() -> Self {
        BasisTable {
            m: 1,
            sign: vec![1],
            idx: vec![0],
        }
    }

    fn double(&self) -> Self {
        let k = self.m;
        let m = 2 * k;
        let mut sign = vec![0i8; m * m];
        let mut idx = vec![0usize; m * m];
        let conj = |q: usize| if q == 0 { 1i8 } else { -1 };
        for p in 0..m {
            for q in 0..m {
                let (s, x) = if p < k && q < k {
                    (self.sign[p * k + q], self.idx[p * k + q])
                } else if p < k {
                    // (x,0)(0,d) = (0, d x)
                    let d = q - k;
                    (self.sign[d * k + p], k + self.idx[d * k + p])
                } else if q < k {
                    // (0,b)(y,0) = (0, b y*)
                    let b = p - k;
                    (conj(q) * self.sign[b * k + q], k + self.idx[b * k + q])
                } else {
                    // (0,b)(0,d) = (-d* b, 0)
                    let (b, d) = (p - k, q - k);
                    (-conj(d) * self.sign[d * k + b], self.idx[d * k + b])
                };
                sign[p * m + q] = s;
                idx[p * m + q] = x;
            }
        }
        BasisTable { m, sign, idx }
    }
}

/// Signed Cayley-Dickson basis table of order `2^(level+1)`.
///
/// Level 1 is the complex basis (order 4, a cyclic group), level 2 the
/// quaternion basis (order 8, equal to [`quaternion8`] up to names), level 3
/// the octonion basis of order 16.
pub fn cayley_dickson(level: u32) -> Result<MagmaTable, Error> {
    if level > 16 {
        return Err(Error::BadTable {
            table: format!("CD{level}"),
            msg: "doubling level too large".into(),
        });
    }
    let mut basis = BasisTable::reals();
    for _ in 0..level {
        basis = basis.double();
    }
    let m = basis.m;
    let mut names = Vec::with_capacity(2 * m);
    for s in ["", "-"] {
        for k in 0..m {
            if k == 0 {
                names.push(format!("{s}1"));
            } else {
                names.push(format!("{s}e{k}"));
            }
        }
    }
    MagmaTable::from_fn(format!("CD{level}"), names, |a, b| {
        let (sa, ka) = (a / m, a % m);
        let (sb, kb) = (b / m, b % m);
        let s = basis.sign[ka * m + kb];
        let neg = (sa + sb + usize::from(s < 0)) % 2;
        neg * m + basis.idx[ka * m + kb]
    })
}

/// A named built-in table.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GeneratorId {
    Cyclic(usize),
    Sym3,
    Quaternion8,
    CayleyDickson(u32),
}

impl GeneratorId {
    pub fn build(self) -> Result<MagmaTable, Error> {
        match self {
            GeneratorId::Cyclic(n) => {
                if n == 0 {
                    return Err(Error::BadTable {
                        table: "C0".into(),
                        msg: "cyclic order must be positive".into(),
                    });
                }
                Ok(cyclic(n))
            }
            GeneratorId::Sym3 => Ok(sym3()),
            GeneratorId::Quaternion8 => Ok(quaternion8()),
            GeneratorId::CayleyDickson(level) => cayley_dickson(level),
        }
    }
}

impl FromStr for GeneratorId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Error> {
        let bad = |msg: String| Error::Parse {
            file: s.to_string(),
            msg,
        };
        if let Some(rest) = s.strip_prefix("cyclic:") {
            let n = rest
                .parse()
                .map_err(|_| bad(format!("bad cyclic order `{rest}`")))?;
            return Ok(GeneratorId::Cyclic(n));
        }
        if let Some(rest) = s
            .strip_prefix("cayley-dickson:")
            .or_else(|| s.strip_prefix("cayley_dickson:"))
        {
            let level = rest
                .parse()
                .map_err(|_| bad(format!("bad doubling level `{rest}`")))?;
            return Ok(GeneratorId::CayleyDickson(level));
        }
        match s {
            "sym3" => Ok(GeneratorId::Sym3),
            "quaternion8" => Ok(GeneratorId::Quaternion8),
            _ => Err(bad(
                "expected cyclic:N, sym3, quaternion8 or cayley-dickson:L".into(),
            )),
        }
    }
}

/// All built-in metagroups of order at most `max_order`, in a fixed order.
///
/// Used by the verification suites: cyclic groups, S3, Q8 and the
/// Cayley-Dickson tables.
pub fn builtin_metagroups(max_order: usize) -> Vec<MagmaTable> {
    let mut out = Vec::new();
    for n in 2..=max_order.min(64) {
        out.push(cyclic(n));
    }
    if max_order >= 6 {
        out.push(sym3());
    }
    if max_order >= 8 {
        out.push(quaternion8());
    }
    let mut level = 1;
    while 1usize << (level + 1) <= max_order {
        out.push(cayley_dickson(level as u32).expect("small level"));
        level += 1;
    }
    out
}
