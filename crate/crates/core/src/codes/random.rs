use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::ParityCheckMatrix;
use crate::error::{Error, Result};

const MAX_SWAP_ATTEMPTS: usize = 2_000_000;

/// Random `m x n` code with constant row degree.
///
/// The `m * row_degree` sockets are spread over the columns as evenly as
/// possible, shuffled and dealt to the rows. A row that receives the same
/// column twice swaps one of the duplicates with a random socket elsewhere
/// until no row repeats a column. The result carries the greedy layer
/// schedule and depends only on the inputs.
pub fn random_code(n: usize, m: usize, row_degree: usize, seed: u64) -> Result<ParityCheckMatrix> {
    if n == 0 || m == 0 || row_degree == 0 {
        return Err(Error::InfeasibleDegrees(
            "code length, check count and row degree must be positive".into(),
        ));
    }
    if row_degree > n {
        return Err(Error::InfeasibleDegrees(format!(
            "row degree {row_degree} exceeds code length {n}"
        )));
    }
    let sockets_total = m * row_degree;
    let base = sockets_total / n;
    let extra = sockets_total % n;
    let mut sockets: Vec<usize> = (0..n)
        .flat_map(|j| std::iter::repeat_n(j, base + usize::from(j < extra)))
        .collect();

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    sockets.shuffle(&mut rng);

    let has_dup = |sockets: &[usize], r: usize| -> Option<usize> {
        let row = &sockets[r * row_degree..(r + 1) * row_degree];
        (0..row_degree).find(|&a| row[..a].contains(&row[a]))
    };

    let mut attempts = 0usize;
    loop {
        let mut clean = true;
        for r in 0..m {
            while let Some(a) = has_dup(&sockets, r) {
                clean = false;
                attempts += 1;
                if attempts > MAX_SWAP_ATTEMPTS {
                    return Err(Error::InfeasibleDegrees(format!(
                        "could not place {sockets_total} sockets without repeated edges"
                    )));
                }
                let i = r * row_degree + a;
                let k = rng.random_range(0..sockets_total);
                let other = k / row_degree;
                if other == r {
                    continue;
                }
                let (vi, vk) = (sockets[i], sockets[k]);
                let row_r = &sockets[r * row_degree..(r + 1) * row_degree];
                let row_o = &sockets[other * row_degree..(other + 1) * row_degree];
                if row_r.contains(&vk) || row_o.contains(&vi) {
                    continue;
                }
                sockets.swap(i, k);
            }
        }
        if clean {
            let rows = sockets
                .chunks(row_degree)
                .map(|c| {
                    let mut row = c.to_vec();
                    row.sort_unstable();
                    row
                })
                .collect();
            let label = format!("random ({n},{m})");
            return Ok(ParityCheckMatrix::new(n, rows, label)?.with_greedy_layers());
        }
    }
}
