use rand::Rng;

use super::ParityCheckMatrix;

/// Null space of `H` over GF(2) in reduced row-echelon form; samples
/// uniformly random codewords.
#[derive(Clone, Debug)]
pub struct CodewordSpace {
    n: usize,
    /// `(pivot column, free columns of the row)`.
    pivots: Vec<(usize, Vec<usize>)>,
    free: Vec<usize>,
}

impl CodewordSpace {
    pub fn new(h: &ParityCheckMatrix) -> Self {
        let n = h.n_cols();
        let words = n.div_ceil(64);
        let mut rows: Vec<Vec<u64>> = h
            .rows()
            .iter()
            .map(|r| {
                let mut b = vec![0u64; words];
                for &j in r {
                    b[j / 64] |= 1 << (j % 64);
                }
                b
            })
            .collect();
        let bit = |row: &[u64], j: usize| row[j / 64] >> (j % 64) & 1 == 1;
        let mut pivot_cols = Vec::new();
        let mut rank = 0;
        for j in 0..n {
            let Some(p) = (rank..rows.len()).find(|&r| bit(&rows[r], j)) else {
                continue;
            };
            rows.swap(rank, p);
            let pivot = rows[rank].clone();
            for (r, row) in rows.iter_mut().enumerate() {
                if r != rank && bit(row, j) {
                    for (a, b) in row.iter_mut().zip(&pivot) {
                        *a ^= b;
                    }
                }
            }
            pivot_cols.push(j);
            rank += 1;
        }
        let mut is_pivot = vec![false; n];
        for &j in &pivot_cols {
            is_pivot[j] = true;
        }
        let free: Vec<usize> = (0..n).filter(|&j| !is_pivot[j]).collect();
        let pivots = pivot_cols
            .iter()
            .zip(&rows)
            .map(|(&p, row)| (p, free.iter().copied().filter(|&j| bit(row, j)).collect()))
            .collect();
        Self { n, pivots, free }
    }

    /// Code dimension `N − rank(H)`.
    pub fn dimension(&self) -> usize {
        self.free.len()
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Vec<u8> {
        let mut c = vec![0u8; self.n];
        for &j in &self.free {
            c[j] = rng.random_range(0..2);
        }
        for (p, deps) in &self.pivots {
            c[*p] = deps.iter().fold(0, |acc, &j| acc ^ c[j]);
        }
        c
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::decoder::syndrome_check;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn samples_are_codewords() {
        let h = crate::codes::standard::builtin("wimax_576_r12").unwrap();
        let space = CodewordSpace::new(&h);
        assert!(space.dimension() >= 288);
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..20 {
            let c = space.sample(&mut rng);
            assert!(syndrome_check(&h, &c).unwrap());
        }
    }

    #[test]
    fn repetition_code() {
        // H of the length-3 repetition code: rank 2, codewords 000 and 111
        let h = ParityCheckMatrix::new(3, vec![vec![0, 1], vec![1, 2]], "rep").unwrap();
        let space = CodewordSpace::new(&h);
        assert_eq!(space.dimension(), 1);
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        for _ in 0..10 {
            let c = space.sample(&mut rng);
            assert!(c == vec![0, 0, 0] || c == vec![1, 1, 1]);
        }
    }
}
