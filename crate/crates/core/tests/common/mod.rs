use cargeom::sp2r::{DIM, Q};

/// Nonvanishing brackets `[E_i, E_j]`, `i < j`, as listed for this basis.
pub const LISTED: [(usize, usize, &[(usize, i64)]); 28] = [
    (1, 5, &[(1, 2)]),
    (1, 7, &[(2, -2)]),
    (1, 9, &[(4, -2)]),
    (1, 10, &[(5, 4)]),
    (2, 4, &[(1, 1)]),
    (2, 5, &[(2, 1)]),
    (2, 6, &[(2, 1)]),
    (2, 7, &[(3, 2)]),
    (2, 8, &[(4, 1)]),
    (2, 9, &[(5, -1), (6, -1)]),
    (2, 10, &[(7, -2)]),
    (3, 4, &[(2, -1)]),
    (3, 6, &[(3, 2)]),
    (3, 8, &[(6, -1)]),
    (3, 9, &[(7, -1)]),
    (4, 5, &[(4, 1)]),
    (4, 6, &[(4, -1)]),
    (4, 7, &[(5, 1), (6, -1)]),
    (4, 9, &[(8, -2)]),
    (4, 10, &[(9, -2)]),
    (5, 7, &[(7, 1)]),
    (5, 9, &[(9, 1)]),
    (5, 10, &[(10, 2)]),
    (6, 7, &[(7, -1)]),
    (6, 8, &[(8, 2)]),
    (6, 9, &[(9, 1)]),
    (7, 8, &[(9, 1)]),
    (7, 9, &[(10, 1)]),
];

pub fn listed(i: usize, j: usize) -> [Q; DIM] {
    let mut out = [Q::from_integer(0); DIM];
    let (a, b, sign) = if i < j { (i, j, 1) } else { (j, i, -1) };
    if let Some((_, _, terms)) = LISTED.iter().find(|(x, y, _)| (*x, *y) == (a, b)) {
        for &(k, c) in terms.iter() {
            out[k - 1] = Q::from_integer(sign * c);
        }
    }
    out
}
