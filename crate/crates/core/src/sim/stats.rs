//! Estimators shared by the simulators.

/// Number of batches used for batch-means standard errors.
pub const BATCHES: usize = 32;

/// Point estimate with its standard error.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Estimate {
    pub mean: f64,
    pub std_error: f64,
}

impl Estimate {
    /// Whether `value` lies within `k` standard errors of the mean.
    pub fn covers(&self, value: f64, k: f64) -> bool {
        (self.mean - value).abs() <= k * self.std_error
    }
}

/// Per-batch sums over a run split into [`BATCHES`] consecutive blocks.
#[derive(Debug, Clone)]
pub struct BatchMeans {
    sums: [f64; BATCHES],
    counts: [u64; BATCHES],
}

impl BatchMeans {
    pub fn new() -> Self {
        Self {
            sums: [0.0; BATCHES],
            counts: [0; BATCHES],
        }
    }

    pub fn add(&mut self, batch: usize, value: f64) {
        self.sums[batch] += value;
        self.counts[batch] += 1;
    }

    pub fn count(&self) -> u64 {
        self.counts.iter().sum()
    }

    /// Means of the non-empty batches, in run order.
    pub fn batch_means(&self) -> Vec<f64> {
        self.sums
            .iter()
            .zip(&self.counts)
            .filter(|(_, &n)| n > 0)
            .map(|(s, &n)| s / n as f64)
            .collect()
    }

    /// Grand mean with the batch-means standard error.
    pub fn estimate(&self) -> Estimate {
        let total = self.count();
        if total == 0 {
            return Estimate {
                mean: f64::NAN,
                std_error: f64::NAN,
            };
        }
        let mean = self.sums.iter().sum::<f64>() / total as f64;
        let means = self.batch_means();
        let k = means.len() as f64;
        let std_error = if means.len() < 2 {
            f64::NAN
        } else {
            let mbar = means.iter().sum::<f64>() / k;
            let var = means.iter().map(|m| (m - mbar).powi(2)).sum::<f64>() / (k - 1.0);
            (var / k).sqrt()
        };
        Estimate { mean, std_error }
    }
}

impl Default for BatchMeans {
    fn default() -> Self {
        Self::new()
    }
}

/// Maps frame ids to batches, skipping the warmup prefix.
#[derive(Debug, Clone, Copy)]
pub struct Batcher {
    warmup: u64,
    measured: u64,
}

impl Batcher {
    pub fn new(total: u64, warmup: u64) -> Self {
        Self {
            warmup,
            measured: total - warmup,
        }
    }

    pub fn batch(&self, id: u64) -> Option<usize> {
        let k = id.checked_sub(self.warmup)?;
        Some((u128::from(k) * BATCHES as u128 / u128::from(self.measured)) as usize)
    }
}

/// Summary of one queue (or a pool of identical queues) over a run.
#[derive(Debug, Clone, PartialEq)]
pub struct QueueStats {
    /// Fraction of measured arrivals that found `j` frames in the system.
    pub state_probs: Vec<f64>,
    /// Measured arrivals.
    pub arrivals: u64,
    /// Wait before service, s.
    pub wait: Estimate,
    /// Batch means of the wait, in run order.
    pub wait_batches: Vec<f64>,
    /// Time average of the number waiting over the measurement window.
    pub time_avg_queue_length: f64,
    /// Arrivals per second observed in the same window.
    pub arrival_rate: f64,
    /// Busy fraction of the servers in the window.
    pub utilization: f64,
}

impl QueueStats {
    /// Wait implied by the time-average queue length, `L_q / lambda`.
    pub fn little_wait(&self) -> f64 {
        self.time_avg_queue_length / self.arrival_rate
    }

    /// `p_j` from the arrival histogram, zero past the largest state seen.
    pub fn state_probability(&self, j: usize) -> f64 {
        self.state_probs.get(j).copied().unwrap_or(0.0)
    }
}

/// Tracks the number waiting and in service across one or more stations.
#[derive(Debug, Clone)]
pub struct QueueMonitor {
    servers: usize,
    waiting: usize,
    busy: usize,
    last_t: f64,
    window: Option<Window>,
    histogram: Vec<u64>,
    pub waits: BatchMeans,
}

#[derive(Debug, Clone, Copy)]
struct Window {
    start: f64,
    area_waiting: f64,
    area_busy: f64,
    // Snapshot at the most recent measured arrival.
    end: f64,
    end_waiting: f64,
    end_busy: f64,
    arrivals: u64,
}

impl QueueMonitor {
    /// `servers` is the total server count being pooled.
    pub fn new(servers: usize) -> Self {
        Self {
            servers,
            waiting: 0,
            busy: 0,
            last_t: 0.0,
            window: None,
            histogram: Vec::new(),
            waits: BatchMeans::new(),
        }
    }

    /// Integrates the current levels up to `now`. Call before any change.
    pub fn advance(&mut self, now: f64) {
        if let Some(w) = &mut self.window {
            let dt = now - self.last_t;
            w.area_waiting += dt * self.waiting as f64;
            w.area_busy += dt * self.busy as f64;
        }
        self.last_t = now;
    }

    /// Records a measured arrival that found `seen` frames at its station.
    pub fn record_arrival(&mut self, now: f64, seen: usize) {
        if seen >= self.histogram.len() {
            self.histogram.resize(seen + 1, 0);
        }
        self.histogram[seen] += 1;
        let w = self.window.get_or_insert(Window {
            start: now,
            area_waiting: 0.0,
            area_busy: 0.0,
            end: now,
            end_waiting: 0.0,
            end_busy: 0.0,
            arrivals: 0,
        });
        w.end = now;
        w.end_waiting = w.area_waiting;
        w.end_busy = w.area_busy;
        w.arrivals += 1;
    }

    pub fn started_on_arrival(&mut self) {
        self.busy += 1;
    }

    pub fn queued_on_arrival(&mut self) {
        self.waiting += 1;
    }

    /// A departure; `refilled` when a waiting frame took the server.
    pub fn departed(&mut self, refilled: bool) {
        if refilled {
            self.waiting -= 1;
        } else {
            self.busy -= 1;
        }
    }

    pub fn finish(&self) -> QueueStats {
        let arrivals: u64 = self.histogram.iter().sum();
        let state_probs = self
            .histogram
            .iter()
            .map(|&h| h as f64 / arrivals as f64)
            .collect();
        let (time_avg_queue_length, arrival_rate, utilization) = match self.window {
            Some(w) if w.end > w.start => {
                let span = w.end - w.start;
                (
                    w.end_waiting / span,
                    // The first arrival opens the window.
                    (w.arrivals - 1) as f64 / span,
                    w.end_busy / (span * self.servers as f64),
                )
            }
            _ => (f64::NAN, f64::NAN, f64::NAN),
        };
        QueueStats {
            state_probs,
            arrivals,
            wait: self.waits.estimate(),
            wait_batches: self.waits.batch_means(),
            time_avg_queue_length,
            arrival_rate,
            utilization,
        }
    }
}

/// Variance-to-mean ratio of arrival counts in fixed windows.
#[derive(Debug, Clone)]
pub struct DispersionCounter {
    width: f64,
    origin: Option<f64>,
    index: u64,
    current: u64,
    counts: Vec<u64>,
}

impl DispersionCounter {
    pub fn new(width: f64) -> Self {
        Self {
            width,
            origin: None,
            index: 0,
            current: 0,
            counts: Vec::new(),
        }
    }

    /// Arrival times must be non-decreasing.
    pub fn add(&mut self, t: f64) {
        let origin = *self.origin.get_or_insert(t);
        let idx = ((t - origin) / self.width) as u64;
        while self.index < idx {
            self.counts.push(self.current);
            self.current = 0;
            self.index += 1;
        }
        self.current += 1;
    }

    /// Index of dispersion over the completed windows.
    pub fn index_of_dispersion(&self) -> Option<f64> {
        if self.counts.len() < 2 {
            return None;
        }
        let k = self.counts.len() as f64;
        let mean = self.counts.iter().sum::<u64>() as f64 / k;
        if mean == 0.0 {
            return None;
        }
        let var = self.counts.iter().map(|&c| (c as f64 - mean).powi(2)).sum::<f64>() / (k - 1.0);
        Some(var / mean)
    }
}
