use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{Edge, Graph};
use crate::error::{Error, Result};

const MAX_ATTEMPTS: usize = 10_000;

/// Erdős–Rényi `G(n, p)` with unit weights, resampled until connected.
///
/// Draws come from a ChaCha8 stream seeded with `seed`, so the same
/// `(n, p, seed)` always yields the same graph.
pub fn random_connected(n: usize, p: f64, seed: u64) -> Result<Graph> {
    if n == 0 {
        return Err(Error::InvalidParameter(
            "graph needs at least one node".into(),
        ));
    }
    if !(p > 0.0 && p <= 1.0) {
        return Err(Error::InvalidParameter(format!(
            "edge probability {p} outside (0, 1]"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..MAX_ATTEMPTS {
        let mut edges = Vec::new();
        for i in 1..=n {
            for j in (i + 1)..=n {
                if rng.random::<f64>() < p {
                    edges.push(Edge::new(i, j, 1.0));
                }
            }
        }
        let g = Graph::new(n, false, edges)?;
        if g.is_connected() {
            return Ok(g);
        }
    }
    Err(Error::Disconnected)
}
