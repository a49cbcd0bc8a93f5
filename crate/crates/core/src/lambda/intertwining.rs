//! Exact check that ordering blocks uniformly intertwines the two generators.
//!
//! For a function `f` on compositions of `[n]` let `Lf(π)` be the average of
//! `f` over the `b!` orderings of the blocks of `π`. With `Q` the generator
//! of the partition chain and `Q̃` that of the composition chain, both sides
//! of `Q Lf = L Q̃ f` are built by enumeration and compared at every `π`.

use crate::error::{Error, Result};
use crate::lambda::LambdaMeasure;
use crate::partition::{Composition, Partition};

/// Largest `n` accepted by [`intertwining_check`].
pub const MAX_N: usize = 6;

/// All set partitions of `[n]`, via restricted growth strings.
pub fn all_partitions(n: usize) -> Vec<Partition> {
    fn grow(prefix: &mut Vec<usize>, n: usize, out: &mut Vec<Partition>) {
        if prefix.len() == n {
            out.push(Partition::from_assignment(prefix));
            return;
        }
        let next = prefix.iter().copied().max().map_or(0, |m| m + 1);
        for l in 0..=next {
            prefix.push(l);
            grow(prefix, n, out);
            prefix.pop();
        }
    }
    let mut out = Vec::new();
    grow(&mut Vec::with_capacity(n), n, &mut out);
    out
}

/// Every permutation of `0..b`.
fn permutations(b: usize) -> Vec<Vec<usize>> {
    fn rec(v: &mut Vec<usize>, k: usize, out: &mut Vec<Vec<usize>>) {
        if k == v.len() {
            out.push(v.clone());
            return;
        }
        for i in k..v.len() {
            v.swap(k, i);
            rec(v, k + 1, out);
            v.swap(k, i);
        }
    }
    let mut out = Vec::new();
    rec(&mut (0..b).collect(), 0, &mut out);
    out
}

/// The `b!` compositions obtained by ordering the blocks of `p`.
pub fn orderings(p: &Partition) -> Vec<Composition> {
    let blocks = p.blocks();
    permutations(blocks.len())
        .into_iter()
        .map(|perm| {
            Composition::new(p.n(), perm.iter().map(|&i| blocks[i].clone()).collect())
                .expect("reordered blocks of a partition")
        })
        .collect()
}

/// All compositions of `[n]`.
pub fn all_compositions(n: usize) -> Vec<Composition> {
    all_partitions(n).iter().flat_map(orderings).collect()
}

fn average_over_orderings(p: &Partition, f: &dyn Fn(&Composition) -> f64) -> f64 {
    let all = orderings(p);
    all.iter().map(f).sum::<f64>() / all.len() as f64
}

/// `max_π |(Q L f)(π) - (L Q̃ f)(π)|` over partitions of `[n]`.
pub fn intertwining_check(lambda: &LambdaMeasure, n: usize, f: &dyn Fn(&Composition) -> f64) -> Result<f64> {
    if n == 0 || n > MAX_N {
        return Err(Error::InvalidArgument(format!(
            "intertwining check needs 1 <= n <= {MAX_N}, got {n}"
        )));
    }
    lambda.validate()?;
    let mut worst: f64 = 0.0;
    for p in all_partitions(n) {
        let blocks = p.blocks();
        let b = blocks.len();
        let here = average_over_orderings(&p, f);

        // partition side: any k of the b blocks merge at rate λ_{b,k}
        let mut lhs = 0.0;
        for mask in 0u32..(1 << b) {
            let k = mask.count_ones() as usize;
            if k < 2 {
                continue;
            }
            let rate = lambda.rate(b, k)?;
            let first = mask.trailing_zeros() as usize;
            let mut assignment = vec![0; n];
            for (i, block) in blocks.iter().enumerate() {
                let label = if mask & (1 << i) != 0 { first } else { i };
                for &x in block {
                    assignment[x] = label;
                }
            }
            let merged = Partition::from_assignment(&assignment);
            lhs += rate * (average_over_orderings(&merged, f) - here);
        }

        // composition side: each run of k adjacent blocks merges at rate λ̃_{b,k}
        let mut rhs = 0.0;
        let all = orderings(&p);
        for c in &all {
            let fc = f(c);
            for k in 2..=b {
                let rate = lambda.adjacent_rate(b, k)?;
                for start in 0..=b - k {
                    let cb = c.blocks();
                    let mut next: Vec<Vec<usize>> = cb[..start].to_vec();
                    next.push(cb[start..start + k].concat());
                    next.extend_from_slice(&cb[start + k..]);
                    let merged = Composition::new(n, next)?;
                    rhs += rate * (f(&merged) - fc);
                }
            }
        }
        rhs /= all.len() as f64;
        worst = worst.max((lhs - rhs).abs());
    }
    Ok(worst)
}
