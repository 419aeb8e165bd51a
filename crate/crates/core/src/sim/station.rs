//! FCFS service station with identical deterministic servers.

use std::collections::VecDeque;

/// A frame that has just entered service.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Started {
    pub id: u64,
    pub arrival: f64,
    pub start: f64,
}

#[derive(Debug, Clone)]
pub struct Station {
    servers: usize,
    busy: usize,
    waiting: VecDeque<(u64, f64)>,
}

impl Station {
    pub fn new(servers: usize) -> Self {
        Self {
            servers,
            busy: 0,
            waiting: VecDeque::new(),
        }
    }

    /// Frames in system, in service or waiting.
    pub fn occupancy(&self) -> usize {
        self.busy + self.waiting.len()
    }

    pub fn busy(&self) -> usize {
        self.busy
    }

    pub fn waiting(&self) -> usize {
        self.waiting.len()
    }

    /// Admits a frame; returns it if a server was free.
    pub fn arrive(&mut self, id: u64, now: f64) -> Option<Started> {
        let started = if self.busy < self.servers {
            self.busy += 1;
            Some(Started {
                id,
                arrival: now,
                start: now,
            })
        } else {
            self.waiting.push_back((id, now));
            None
        };
        self.check();
        started
    }

    /// Releases one server and hands it the head of the line, if any.
    pub fn depart(&mut self, now: f64) -> Option<Started> {
        assert!(self.busy > 0, "departure from an idle station");
        self.busy -= 1;
        let next = self.waiting.pop_front().map(|(id, arrival)| {
            self.busy += 1;
            Started {
                id,
                arrival,
                start: now,
            }
        });
        self.check();
        next
    }

    // Work conservation: nobody waits while a server idles.
    fn check(&self) {
        assert!(
            self.waiting.is_empty() || self.busy == self.servers,
            "idle server with {} frames waiting",
            self.waiting.len()
        );
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fills_servers_then_queues() {
        let mut s = Station::new(2);
        assert!(s.arrive(0, 0.0).is_some());
        assert!(s.arrive(1, 0.1).is_some());
        assert!(s.arrive(2, 0.2).is_none());
        assert_eq!((s.busy(), s.waiting(), s.occupancy()), (2, 1, 3));
        let next = s.depart(1.0).unwrap();
        assert_eq!(
            next,
            Started {
                id: 2,
                arrival: 0.2,
                start: 1.0
            }
        );
        assert!(s.depart(1.1).is_none());
        assert_eq!(s.occupancy(), 1);
    }
}
