#![allow(dead_code)]

use isodag_core::Dag;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn random_dag(n: usize, seed: u64) -> Dag {
    let mut r = rng(seed);
    let p = r.gen_range(0.0..1.0);
    Dag::random_bernoulli(n, p, &mut r)
}

pub fn random_permutation<R: Rng>(n: usize, r: &mut R) -> isodag_core::Permutation {
    use rand::seq::SliceRandom;
    let mut v: Vec<usize> = (0..n).collect();
    v.shuffle(r);
    isodag_core::Permutation::new(v).unwrap()
}

/// d-separation by listing every simple trail of the skeleton and checking
/// each interior node.
pub fn dsep_by_trails(g: &Dag, i: usize, j: usize, cond: &[usize]) -> bool {
    fn descendants_hit(g: &Dag, v: usize, cond: &[usize]) -> bool {
        cond.contains(&v) || g.descendants(v).iter().any(|d| cond.contains(d))
    }
    fn walk(g: &Dag, path: &mut Vec<usize>, j: usize, cond: &[usize]) -> bool {
        let last = *path.last().unwrap();
        if last == j {
            let open = (1..path.len() - 1).all(|k| {
                let (a, b, c) = (path[k - 1], path[k], path[k + 1]);
                let collider = g.has_edge(a, b) && g.has_edge(c, b);
                if collider {
                    descendants_hit(g, b, cond)
                } else {
                    !cond.contains(&b)
                }
            });
            return open;
        }
        for w in 0..g.n() {
            if g.adjacent(last, w) && !path.contains(&w) {
                path.push(w);
                if walk(g, path, j, cond) {
                    return true;
                }
                path.pop();
            }
        }
        false
    }
    !walk(g, &mut vec![i], j, cond)
}
