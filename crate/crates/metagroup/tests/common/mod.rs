//! Shared test oracles: brute-force isomorphism search and an independent
//! recursive doubling oracle for the signed basis tables.

#![allow(dead_code)]

use metagroup::MagmaTable;

/// Brute-force isomorphism search over all permutations, for small orders.
pub fn isomorphic(g: &MagmaTable, h: &MagmaTable) -> bool {
    let n = g.order();
    if h.order() != n {
        return false;
    }
    assert!(n <= 8, "brute-force isomorphism is for small tables");
    let mut perm: Vec<usize> = (0..n).collect();
    loop {
        let ok = (0..n).all(|a| {
            (0..n).all(|b| {
                let lhs = perm[g.mul(g.element(a).unwrap(), g.element(b).unwrap()).index()];
                let rhs = h
                    .mul(
                        h.element(perm[a]).unwrap(),
                        h.element(perm[b]).unwrap(),
                    )
                    .index();
                lhs == rhs
            })
        });
        if ok {
            return true;
        }
        if !next_permutation(&mut perm) {
            return false;
        }
    }
}

fn next_permutation(p: &mut [usize]) -> bool {
    let n = p.len();
    if n < 2 {
        return false;
    }
    let mut i = n - 1;
    while i > 0 && p[i - 1] >= p[i] {
        i -= 1;
    }
    if i == 0 {
        return false;
    }
    let mut j = n - 1;
    while p[j] <= p[i - 1] {
        j -= 1;
    }
    p.swap(i - 1, j);
    p[i..].reverse();
    true
}

/// Hand-written quaternion basis products: `idx[i][j]` and `sign[i][j]` of
/// `e_i e_j` for the basis 1, i, j, k.
pub const Q_IDX: [[usize; 4]; 4] = [
    [0, 1, 2, 3],
    [1, 0, 3, 2],
    [2, 3, 0, 1],
    [3, 2, 1, 0],
];
pub const Q_SIGN: [[i8; 4]; 4] = [
    [1, 1, 1, 1],
    [1, -1, 1, -1],
    [1, -1, -1, 1],
    [1, 1, -1, -1],
];

/// Independent recursive doubling oracle for basis products at any level,
/// under the convention `(a,b)(c,d) = (ac - d*b, da + bc*)` with conjugation
/// negating non-real basis elements.
pub fn cd_basis_oracle(level: u32, i: usize, j: usize) -> (i8, usize) {
    if level == 0 {
        assert!(i == 0 && j == 0);
        return (1, 0);
    }
    let m = 1usize << (level - 1);
    let conj = |q: usize| if q == 0 { 1i8 } else { -1 };
    match (i < m, j < m) {
        (true, true) => cd_basis_oracle(level - 1, i, j),
        (true, false) => {
            // (x, 0)(0, d) = (0, d x)
            let d = j - m;
            let (s, x) = cd_basis_oracle(level - 1, d, i);
            (s, m + x)
        }
        (false, true) => {
            // (0, b)(y, 0) = (0, b y*)
            let b = i - m;
            let (s, x) = cd_basis_oracle(level - 1, b, j);
            (conj(j) * s, m + x)
        }
        (false, false) => {
            // (0, b)(0, d) = (-d* b, 0)
            let (b, d) = (i - m, j - m);
            let (s, x) = cd_basis_oracle(level - 1, d, b);
            (-conj(d) * s, x)
        }
    }
}

/// Expected signed-table product per the oracle: signed elements are indexed
/// sign-major over `2^level` basis elements.
pub fn cd_signed_oracle(level: u32, a: usize, b: usize) -> usize {
    let m = 1usize << level;
    let (sa, ka) = (a / m, a % m);
    let (sb, kb) = (b / m, b % m);
    let (s, k) = cd_basis_oracle(level, ka, kb);
    let neg = (sa + sb + usize::from(s < 0)) % 2;
    neg * m + k
}

/// The lexicographically first nonassociative loop of order 5, found by
/// exhaustive search over normalized Latin squares.
pub fn first_nonassociative_loop_order5() -> MagmaTable {
    let n = 5;
    // rows[0] is the identity row; row i starts with i (identity column).
    let mut rows: Vec<Vec<usize>> = vec![(0..n).collect()];
    let mut found: Option<Vec<Vec<usize>>> = None;
    fn fill(
        rows: &mut Vec<Vec<usize>>,
        n: usize,
        found: &mut Option<Vec<Vec<usize>>>,
    ) {
        if found.is_some() {
            return;
        }
        if rows.len() == n {
            if !is_associative(rows) {
                *found = Some(rows.clone());
            }
            return;
        }
        let i = rows.len();
        let mut row = vec![usize::MAX; n];
        row[0] = i;
        extend(rows, &mut row, 1, n, found);
    }
    fn extend(
        rows: &mut Vec<Vec<usize>>,
        row: &mut Vec<usize>,
        col: usize,
        n: usize,
        found: &mut Option<Vec<Vec<usize>>>,
    ) {
        if found.is_some() {
            return;
        }
        if col == n {
            rows.push(row.clone());
            fill(rows, n, found);
            if found.is_none() {
                rows.pop();
            }
            return;
        }
        for v in 0..n {
            if row[..col].contains(&v) || rows.iter().any(|r| r[col] == v) {
                continue;
            }
            row[col] = v;
            extend(rows, row, col + 1, n, found);
            row[col] = usize::MAX;
        }
    }
    fn is_associative(rows: &[Vec<usize>]) -> bool {
        let n = rows.len();
        for a in 0..n {
            for b in 0..n {
                for c in 0..n {
                    if rows[rows[a][b]][c] != rows[a][rows[b][c]] {
                        return false;
                    }
                }
            }
        }
        true
    }
    fill(&mut rows, n, &mut found);
    let rows = found.expect("a nonassociative loop of order 5 exists");
    let names = (0..n).map(|i| i.to_string()).collect();
    MagmaTable::from_rows("L5", names, &rows).unwrap()
}
