//! Future-event list.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

/// Events at equal timestamps run arrivals first.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Class {
    Arrival,
    Departure,
}

struct Entry<E> {
    time: f64,
    class: Class,
    seq: u64,
    event: E,
}

impl<E> Entry<E> {
    fn key_cmp(&self, other: &Self) -> Ordering {
        self.time
            .total_cmp(&other.time)
            .then(self.class.cmp(&other.class))
            .then(self.seq.cmp(&other.seq))
    }
}

impl<E> PartialEq for Entry<E> {
    fn eq(&self, other: &Self) -> bool {
        self.key_cmp(other) == Ordering::Equal
    }
}

impl<E> Eq for Entry<E> {}

impl<E> PartialOrd for Entry<E> {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl<E> Ord for Entry<E> {
    // Reversed so the max-heap pops the earliest entry.
    fn cmp(&self, other: &Self) -> Ordering {
        other.key_cmp(self)
    }
}

/// Min-ordered by `(time, class, insertion order)`.
pub struct EventList<E> {
    heap: BinaryHeap<Entry<E>>,
    next_seq: u64,
}

impl<E> EventList<E> {
    pub fn new() -> Self {
        Self {
            heap: BinaryHeap::new(),
            next_seq: 0,
        }
    }

    pub fn schedule(&mut self, time: f64, class: Class, event: E) {
        let seq = self.next_seq;
        self.next_seq += 1;
        self.heap.push(Entry {
            time,
            class,
            seq,
            event,
        });
    }

    pub fn pop(&mut self) -> Option<(f64, E)> {
        self.heap.pop().map(|e| (e.time, e.event))
    }

    pub fn len(&self) -> usize {
        self.heap.len()
    }

    pub fn is_empty(&self) -> bool {
        self.heap.is_empty()
    }
}

impl<E> Default for EventList<E> {
    fn default() -> Self {
        Self::new()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pops_in_time_order() {
        let mut list = EventList::new();
        for (t, v) in [(3.0, 'c'), (1.0, 'a'), (2.0, 'b')] {
            list.schedule(t, Class::Arrival, v);
        }
        let order: Vec<char> = std::iter::from_fn(|| list.pop().map(|(_, v)| v)).collect();
        assert_eq!(order, vec!['a', 'b', 'c']);
    }

    #[test]
    fn ties_put_arrivals_first_then_fifo() {
        let mut list = EventList::new();
        list.schedule(1.0, Class::Departure, 0);
        list.schedule(1.0, Class::Arrival, 1);
        list.schedule(1.0, Class::Departure, 2);
        list.schedule(1.0, Class::Arrival, 3);
        let order: Vec<i32> = std::iter::from_fn(|| list.pop().map(|(_, v)| v)).collect();
        assert_eq!(order, vec![1, 3, 0, 2]);
        assert!(list.is_empty());
    }
}
