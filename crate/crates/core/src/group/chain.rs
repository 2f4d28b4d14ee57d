use std::collections::VecDeque;

use num_bigint::BigUint;

use crate::tree::LevelPerm;

/// Layer vector of an element of the level stabilizer `St(l)`: bit `v` is
/// set iff the element swaps the two children of level-`l` vertex `v`.
fn layer_vector(g: &LevelPerm, l: u32) -> Vec<u64> {
    let n = g.level();
    let shift = n - l;
    let width = 1usize << l;
    let mut bits = vec![0u64; width.div_ceil(64)];
    let images = g.images();
    for v in 0..width {
        if (images[v << shift] >> (shift - 1)) & 1 == 1 {
            bits[v / 64] |= 1 << (v % 64);
        }
    }
    bits
}

fn lowest_bit(bits: &[u64]) -> Option<usize> {
    bits.iter()
        .enumerate()
        .find(|(_, w)| **w != 0)
        .map(|(i, w)| i * 64 + w.trailing_zeros() as usize)
}

fn test_bit(bits: &[u64], i: usize) -> bool {
    (bits[i / 64] >> (i % 64)) & 1 == 1
}

fn xor_into(acc: &mut [u64], other: &[u64]) {
    for (a, b) in acc.iter_mut().zip(other) {
        *a ^= b;
    }
}

pub(crate) fn commutator(a: &LevelPerm, b: &LevelPerm) -> LevelPerm {
    a.inverse().then(&b.inverse()).then(a).then(b)
}

#[derive(Clone, Default)]
struct Layer {
    // sorted by pivot (lowest set bit of the vector)
    pivots: Vec<usize>,
    vectors: Vec<Vec<u64>>,
    elements: Vec<LevelPerm>,
}

/// A strong generating set adapted to the level stabilizer filtration
/// `St(0) ⊇ St(1) ⊇ ⋯ ⊇ St(n) = 1`.
///
/// Each quotient `St(l)/St(l+1)` is elementary abelian of rank `2^l`, so the
/// subgroup is described by one echelon basis per layer and has order
/// `2^(total basis size)`.
#[derive(Clone)]
pub(crate) struct LayeredChain {
    level: u32,
    layers: Vec<Layer>,
    // the chain is kept closed under conjugation by these
    closers: Vec<(LevelPerm, LevelPerm)>,
}

impl LayeredChain {
    pub(crate) fn new(level: u32) -> Self {
        LayeredChain {
            level,
            layers: vec![Layer::default(); level as usize],
            closers: Vec::new(),
        }
    }

    pub(crate) fn log2_order(&self) -> u32 {
        self.layers.iter().map(|l| l.elements.len() as u32).sum()
    }

    pub(crate) fn order(&self) -> BigUint {
        BigUint::from(1u8) << self.log2_order()
    }

    /// Basis sizes per layer.
    pub(crate) fn layer_ranks(&self) -> Vec<usize> {
        self.layers.iter().map(|l| l.elements.len()).collect()
    }

    pub(crate) fn elements(&self) -> impl Iterator<Item = &LevelPerm> {
        self.layers.iter().flat_map(|l| l.elements.iter())
    }

    /// Reduces `g` against the chain. Returns `None` for members, otherwise
    /// the layer, vector and element of the nonzero residue.
    fn sift(&self, mut g: LevelPerm) -> Option<(usize, Vec<u64>, LevelPerm)> {
        for l in 0..self.level {
            let layer = &self.layers[l as usize];
            let mut vec = layer_vector(&g, l);
            for ((&pivot, bvec), b) in layer.pivots.iter().zip(&layer.vectors).zip(&layer.elements) {
                if test_bit(&vec, pivot) {
                    xor_into(&mut vec, bvec);
                    g.then_in_place(b);
                }
            }
            if lowest_bit(&vec).is_some() {
                return Some((l as usize, vec, g));
            }
        }
        debug_assert!(g.is_identity());
        None
    }

    pub(crate) fn contains(&self, g: &LevelPerm) -> bool {
        g.level() == self.level && self.sift(g.clone()).is_none()
    }

    /// Adds closers, then closes the chain over `gens`.
    ///
    /// Afterwards every `K_l` (the subgroup generated by the basis of layers
    /// `>= l`) is normalized by all closers, and each layer basis is
    /// independent modulo `K_{l+1}` with squares and commutators in
    /// `K_{l+1}`. When the closers generate a group containing the chain,
    /// this makes the basis a strong generating set.
    pub(crate) fn absorb(&mut self, gens: impl IntoIterator<Item = LevelPerm>, closers: &[LevelPerm]) {
        let mut queue: VecDeque<LevelPerm> = gens.into_iter().collect();
        for x in closers {
            let xi = x.inverse();
            queue.extend(self.elements().map(|b| xi.then(b).then(x)));
            self.closers.push((x.clone(), xi));
        }
        while let Some(g) = queue.pop_front() {
            let Some((l, vec, r)) = self.sift(g) else {
                continue;
            };
            let layer = &self.layers[l];
            queue.push_back(r.then(&r));
            queue.extend(layer.elements.iter().map(|c| commutator(&r, c)));
            queue.extend(self.closers.iter().map(|(x, xi)| xi.then(&r).then(x)));
            let pivot = lowest_bit(&vec).expect("nonzero residue");
            let layer = &mut self.layers[l];
            let at = layer.pivots.partition_point(|&p| p < pivot);
            layer.pivots.insert(at, pivot);
            layer.vectors.insert(at, vec);
            layer.elements.insert(at, r);
        }
    }

    /// Drops all closers; later [`absorb`](Self::absorb) calls only close
    /// under the closers they pass.
    pub(crate) fn reset_closers(&mut self) {
        self.closers.clear();
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn perm(level: u32, images: &[u32]) -> LevelPerm {
        LevelPerm::from_images(level, images.to_vec()).unwrap()
    }

    #[test]
    fn layer_vectors() {
        let sigma = perm(2, &[2, 3, 0, 1]);
        assert_eq!(layer_vector(&sigma, 0), vec![1]);
        let right_swap = perm(2, &[0, 1, 3, 2]);
        assert_eq!(layer_vector(&right_swap, 1), vec![0b10]);
    }

    #[test]
    fn full_group_at_level_two() {
        let mut chain = LayeredChain::new(2);
        let a = perm(2, &[2, 3, 1, 0]);
        let b = perm(2, &[1, 0, 2, 3]);
        chain.absorb([a.clone(), b.clone()], &[a, b]);
        assert_eq!(chain.log2_order(), 3);
        assert_eq!(chain.layer_ranks(), vec![1, 2]);
    }

    #[test]
    fn cyclic_subgroup() {
        let mut chain = LayeredChain::new(2);
        let a = perm(2, &[2, 3, 1, 0]);
        chain.absorb([a.clone()], std::slice::from_ref(&a));
        assert_eq!(chain.log2_order(), 2);
        assert!(chain.contains(&a.pow(2)));
        assert!(!chain.contains(&perm(2, &[1, 0, 2, 3])));
    }
}
