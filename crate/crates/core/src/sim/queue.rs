use std::cmp::{Ordering, Reverse};
use std::collections::BinaryHeap;

#[derive(Clone, Copy, Debug)]
struct Entry {
    key: f64,
    id: usize,
    generation: u64,
}

impl PartialEq for Entry {
    fn eq(&self, o: &Self) -> bool {
        self.cmp(o) == Ordering::Equal
    }
}

impl Eq for Entry {}

impl PartialOrd for Entry {
    fn partial_cmp(&self, o: &Self) -> Option<Ordering> {
        Some(self.cmp(o))
    }
}

impl Ord for Entry {
    fn cmp(&self, o: &Self) -> Ordering {
        self.key
            .total_cmp(&o.key)
            .then(self.id.cmp(&o.id))
            .then(self.generation.cmp(&o.generation))
    }
}

/// Min-heap of activation times of clock-guarded instantaneous
/// transitions. Rescheduling or cancelling bumps a per-transition
/// generation; stale heap entries are discarded lazily.
#[derive(Clone, Debug, Default)]
pub struct PendingEventQueue {
    heap: BinaryHeap<Reverse<Entry>>,
    generation: Vec<u64>,
}

impl PendingEventQueue {
    pub fn new(n_transitions: usize) -> Self {
        PendingEventQueue {
            heap: BinaryHeap::new(),
            generation: vec![0; n_transitions],
        }
    }

    pub fn schedule(&mut self, id: usize, key: f64) {
        self.generation[id] += 1;
        self.heap.push(Reverse(Entry {
            key,
            id,
            generation: self.generation[id],
        }));
    }

    pub fn cancel(&mut self, id: usize) {
        self.generation[id] += 1;
    }

    pub fn clear(&mut self) {
        self.heap.clear();
        self.generation.iter_mut().for_each(|g| *g += 1);
    }

    fn drop_stale(&mut self) {
        while let Some(Reverse(e)) = self.heap.peek() {
            if e.generation == self.generation[e.id] {
                break;
            }
            self.heap.pop();
        }
    }

    /// Earliest live activation time.
    pub fn peek(&mut self) -> Option<(f64, usize)> {
        self.drop_stale();
        self.heap.peek().map(|Reverse(e)| (e.key, e.id))
    }

    /// Removes and returns every live entry with key `<= t`.
    pub fn pop_due(&mut self, t: f64) -> Vec<usize> {
        let mut out = Vec::new();
        while let Some((k, id)) = self.peek() {
            if k > t {
                break;
            }
            self.heap.pop();
            self.generation[id] += 1;
            out.push(id);
        }
        out
    }

    pub fn is_empty(&mut self) -> bool {
        self.peek().is_none()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ordering_and_invalidation() {
        let mut q = PendingEventQueue::new(3);
        q.schedule(0, 5.0);
        q.schedule(1, 2.0);
        q.schedule(2, 9.0);
        assert_eq!(q.peek(), Some((2.0, 1)));
        q.schedule(1, 7.0);
        assert_eq!(q.peek(), Some((5.0, 0)));
        q.cancel(0);
        assert_eq!(q.pop_due(8.0), vec![1]);
        assert_eq!(q.peek(), Some((9.0, 2)));
        q.clear();
        assert!(q.is_empty());
    }
}
