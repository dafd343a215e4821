//! Seeded workloads shared by the benchmarks.

use isodag_core::Dag;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Random DAG on `n` nodes with exactly `edges` edges.
pub fn sparse_dag(n: usize, edges: usize, seed: u64) -> Dag {
    Dag::random_with_edges(n, edges, &mut rng(seed)).expect("edge count fits")
}

/// A graph Markov equivalent to `g`, obtained by reversing its first
/// covered edge; `g` itself when there is none.
pub fn equivalent_partner(g: &Dag) -> Dag {
    for &(u, v) in g.edges() {
        let mut expect = g.parents(u).to_vec();
        expect.push(u);
        expect.sort_unstable();
        if g.parents(v) == expect.as_slice() {
            let edges = g.edges().iter().map(|&e| if e == (u, v) { (v, u) } else { e });
            return Dag::new(g.n(), edges).expect("covered reversal stays acyclic");
        }
    }
    g.clone()
}
