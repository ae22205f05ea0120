use std::collections::VecDeque;

use rand::seq::index;
use rand::Rng;

use super::Experience;
use crate::error::{Error, Result};

/// FIFO replay memory with uniform minibatch sampling.
#[derive(Debug, Clone, PartialEq)]
pub struct ReplayBuffer {
    capacity: usize,
    items: VecDeque<Experience>,
}

impl ReplayBuffer {
    pub fn new(capacity: usize) -> Self {
        assert!(capacity > 0, "replay capacity must be positive");
        Self {
            capacity,
            items: VecDeque::with_capacity(capacity.min(1 << 16)),
        }
    }

    pub fn capacity(&self) -> usize {
        self.capacity
    }

    pub fn len(&self) -> usize {
        self.items.len()
    }

    pub fn is_empty(&self) -> bool {
        self.items.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = &Experience> {
        self.items.iter()
    }

    pub fn push(&mut self, exp: Experience) {
        if self.items.len() == self.capacity {
            self.items.pop_front();
        }
        self.items.push_back(exp);
    }

    /// Uniform draw of `batch_size` distinct slots.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R, batch_size: usize) -> Result<Vec<&Experience>> {
        if batch_size == 0 || self.items.len() < batch_size {
            return Err(Error::NotReady {
                len: self.items.len(),
                needed: batch_size.max(1),
            });
        }
        Ok(index::sample(rng, self.items.len(), batch_size)
            .into_iter()
            .map(|i| &self.items[i])
            .collect())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::seed::SeedTree;
    use proptest::prelude::*;

    fn tagged(tag: f64) -> Experience {
        Experience {
            state: vec![tag],
            action: 0,
            reward: tag,
            next_state: vec![tag],
            terminal: false,
        }
    }

    #[test]
    fn fifo_eviction() {
        let mut b = ReplayBuffer::new(2);
        for t in [1.0, 2.0, 3.0] {
            b.push(tagged(t));
        }
        let kept: Vec<f64> = b.iter().map(|e| e.reward).collect();
        assert_eq!(kept, vec![2.0, 3.0]);
    }

    #[test]
    fn underfilled_buffer_is_not_ready() {
        let mut b = ReplayBuffer::new(100);
        for t in 0..31 {
            b.push(tagged(t as f64));
        }
        let mut rng = SeedTree::new(1).rng("replay", &[]);
        assert!(matches!(b.sample(&mut rng, 32), Err(Error::NotReady { len: 31, needed: 32 })));
        b.push(tagged(31.0));
        assert_eq!(b.sample(&mut rng, 32).unwrap().len(), 32);
    }

    #[test]
    fn batch_has_no_duplicate_slots() {
        let mut b = ReplayBuffer::new(64);
        for t in 0..64 {
            b.push(tagged(t as f64));
        }
        let mut rng = SeedTree::new(2).rng("replay", &[]);
        for _ in 0..100 {
            let mut tags: Vec<i64> = b.sample(&mut rng, 32).unwrap().iter().map(|e| e.reward as i64).collect();
            tags.sort_unstable();
            tags.dedup();
            assert_eq!(tags.len(), 32);
        }
    }

    proptest! {
        #[test]
        fn never_exceeds_capacity_and_keeps_order(cap in 1usize..20, n in 0usize..80) {
            let mut b = ReplayBuffer::new(cap);
            for t in 0..n {
                b.push(tagged(t as f64));
                prop_assert!(b.len() <= cap);
            }
            let kept: Vec<f64> = b.iter().map(|e| e.reward).collect();
            let expected: Vec<f64> = (n.saturating_sub(cap)..n).map(|t| t as f64).collect();
            prop_assert_eq!(kept, expected);
        }
    }
}
