//! Dense linear algebra over the prime field `F_p` on plain `u64` rows.

/// Row-reduces `rows` in place to reduced row echelon form and returns the
/// pivot columns. Pivots are taken column by column, first nonzero row wins.
pub fn rref(rows: &mut Vec<Vec<u64>>, ncols: usize, p: u64) -> Vec<usize> {
    let mut pivots = Vec::new();
    let mut next = 0usize;
    for col in 0..ncols {
        if next == rows.len() {
            break;
        }
        let Some(found) = (next..rows.len()).find(|&i| !rows[i][col].is_multiple_of(p)) else {
            continue;
        };
        rows.swap(next, found);
        let inv = inv_mod(rows[next][col], p);
        for v in rows[next].iter_mut() {
            *v = *v * inv % p;
        }
        for i in 0..rows.len() {
            if i != next && rows[i][col] != 0 {
                let f = rows[i][col];
                for j in 0..ncols {
                    let t = f * rows[next][j] % p;
                    rows[i][j] = (rows[i][j] + p - t) % p;
                }
            }
        }
        pivots.push(col);
        next += 1;
    }
    rows.truncate(next);
    pivots
}

pub fn inv_mod(a: u64, p: u64) -> u64 {
    let mut acc = 1u64;
    let mut base = a % p;
    let mut e = p - 2;
    while e > 0 {
        if e & 1 == 1 {
            acc = acc * base % p;
        }
        base = base * base % p;
        e >>= 1;
    }
    acc
}

pub fn rank(rows: &[Vec<u64>], ncols: usize, p: u64) -> usize {
    let mut work: Vec<Vec<u64>> = rows.iter().map(|r| r.iter().map(|x| x % p).collect()).collect();
    rref(&mut work, ncols, p).len()
}

/// Basis of the right kernel `{x : A x = 0}`, one vector per free column in
/// increasing column order.
pub fn kernel(rows: &[Vec<u64>], ncols: usize, p: u64) -> Vec<Vec<u64>> {
    let mut work: Vec<Vec<u64>> = rows.iter().map(|r| r.iter().map(|x| x % p).collect()).collect();
    let pivots = rref(&mut work, ncols, p);
    let mut basis = Vec::new();
    let mut is_pivot = vec![false; ncols];
    for &c in &pivots {
        is_pivot[c] = true;
    }
    for free in (0..ncols).filter(|&c| !is_pivot[c]) {
        let mut v = vec![0u64; ncols];
        v[free] = 1;
        for (row, &pc) in work.iter().zip(&pivots) {
            v[pc] = (p - row[free]) % p;
        }
        basis.push(v);
    }
    basis
}

/// Solves `sum_k lambda_k columns[k] = target` over `F_p`; `None` when the
/// target is outside the span. Free variables are set to zero.
pub fn solve(columns: &[Vec<u64>], target: &[u64], p: u64) -> Option<Vec<u64>> {
    let k = columns.len();
    let n = target.len();
    let mut rows: Vec<Vec<u64>> = (0..n)
        .map(|i| {
            let mut row: Vec<u64> = columns.iter().map(|c| c[i] % p).collect();
            row.push(target[i] % p);
            row
        })
        .collect();
    let pivots = rref(&mut rows, k + 1, p);
    if pivots.last() == Some(&k) {
        return None;
    }
    let mut x = vec![0u64; k];
    for (row, &pc) in rows.iter().zip(&pivots) {
        x[pc] = row[k];
    }
    Some(x)
}

/// A subspace of `F_p^n` held as an RREF basis, so equal subspaces compare equal.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Subspace {
    ambient: usize,
    p: u64,
    basis: Vec<Vec<u64>>,
    pivots: Vec<usize>,
}

impl Subspace {
    pub fn span(vectors: &[Vec<u64>], ambient: usize, p: u64) -> Self {
        let mut basis: Vec<Vec<u64>> = vectors.iter().map(|r| r.iter().map(|x| x % p).collect()).collect();
        let pivots = rref(&mut basis, ambient, p);
        Subspace { ambient, p, basis, pivots }
    }

    pub fn whole(ambient: usize, p: u64) -> Self {
        let vectors: Vec<Vec<u64>> = (0..ambient)
            .map(|i| (0..ambient).map(|j| u64::from(i == j)).collect())
            .collect();
        Subspace::span(&vectors, ambient, p)
    }

    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    pub fn ambient(&self) -> usize {
        self.ambient
    }

    pub fn basis(&self) -> &[Vec<u64>] {
        &self.basis
    }

    /// Coordinates of `v` in the RREF basis, `None` if `v` is outside.
    pub fn coords(&self, v: &[u64]) -> Option<Vec<u64>> {
        let c: Vec<u64> = self.pivots.iter().map(|&j| v[j] % self.p).collect();
        let p = self.p;
        let mut rebuilt = vec![0u64; self.ambient];
        for (ci, b) in c.iter().zip(&self.basis) {
            for (r, bj) in rebuilt.iter_mut().zip(b) {
                *r = (*r + ci * bj) % p;
            }
        }
        if rebuilt.iter().zip(v).all(|(a, b)| *a == b % p) {
            Some(c)
        } else {
            None
        }
    }

    pub fn contains(&self, v: &[u64]) -> bool {
        self.coords(v).is_some()
    }

    pub fn is_subspace_of(&self, other: &Subspace) -> bool {
        self.basis.iter().all(|b| other.contains(b))
    }

    /// Intersection with the kernel of a linear functional given by `weights`.
    pub fn intersect_hyperplane(&self, weights: &[u64]) -> Subspace {
        let p = self.p;
        let values: Vec<u64> = self
            .basis
            .iter()
            .map(|b| b.iter().zip(weights).fold(0, |acc, (x, w)| (acc + x * w) % p))
            .collect();
        let row = vec![values];
        let ker = kernel(&row, self.dim(), p);
        let vectors: Vec<Vec<u64>> = ker
            .iter()
            .map(|k| {
                let mut v = vec![0u64; self.ambient];
                for (ki, b) in k.iter().zip(&self.basis) {
                    for (vj, bj) in v.iter_mut().zip(b) {
                        *vj = (*vj + ki * bj) % p;
                    }
                }
                v
            })
            .collect();
        Subspace::span(&vectors, self.ambient, p)
    }
}

/// Rank of a small dense matrix over `F_p` stored row-major in `buf`;
/// `buf` is clobbered. Entries must already be reduced.
#[inline]
pub fn rank_in_place(buf: &mut [u32], n: usize, m: usize, p: u32) -> usize {
    let mut rank = 0;
    for col in 0..m {
        let Some(pr) = (rank..n).find(|&i| buf[i * m + col] != 0) else {
            continue;
        };
        if pr != rank {
            for j in 0..m {
                buf.swap(pr * m + j, rank * m + j);
            }
        }
        let inv = inv_mod(buf[rank * m + col] as u64, p as u64) as u32;
        for i in rank + 1..n {
            let e = buf[i * m + col];
            if e != 0 {
                let f = e * inv % p;
                for j in col..m {
                    let t = f * buf[rank * m + j] % p;
                    buf[i * m + j] = (buf[i * m + j] + p - t) % p;
                }
            }
        }
        rank += 1;
        if rank == n {
            break;
        }
    }
    rank
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn kernel_and_rank_agree() {
        let rows = vec![vec![1, 2, 3, 4], vec![2, 4, 6, 8], vec![0, 1, 0, 1]];
        assert_eq!(rank(&rows, 4, 5), 2);
        let ker = kernel(&rows, 4, 5);
        assert_eq!(ker.len(), 2);
        for v in &ker {
            for r in &rows {
                assert_eq!(r.iter().zip(v).map(|(a, b)| a * b).sum::<u64>() % 5, 0);
            }
        }
    }

    #[test]
    fn subspace_canonical() {
        let a = Subspace::span(&[vec![1, 1, 0], vec![0, 1, 1]], 3, 7);
        let b = Subspace::span(&[vec![1, 2, 1], vec![1, 0, 6]], 3, 7);
        assert_eq!(a, b);
        assert!(a.contains(&[1, 0, 6]));
        assert!(!a.contains(&[1, 0, 0]));
        let h = a.intersect_hyperplane(&[1, 0, 0]);
        assert_eq!(h.dim(), 1);
        assert!(h.contains(&[0, 1, 1]));
    }

    #[test]
    fn solve_in_span() {
        let cols = vec![vec![1, 0, 1], vec![0, 1, 1]];
        assert_eq!(solve(&cols, &[2, 3, 5], 7), Some(vec![2, 3]));
        assert_eq!(solve(&cols, &[1, 0, 0], 7), None);
    }

    #[test]
    fn small_rank() {
        let mut buf = [1u32, 2, 2, 4, 0, 3];
        assert_eq!(rank_in_place(&mut buf, 3, 2, 5), 2);
        let mut z = [0u32; 9];
        assert_eq!(rank_in_place(&mut z, 3, 3, 5), 0);
    }
}
