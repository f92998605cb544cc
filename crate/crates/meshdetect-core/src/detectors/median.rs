//! Streaming median over a fixed-depth ring.

/// Ring buffer with an incrementally maintained sorted copy.
///
/// `median` is the middle order statistic for odd depth and the mean of the
/// two middle order statistics for even depth, evaluated over the current
/// contents (which may be shorter than the depth while filling).
#[derive(Debug, Clone)]
pub struct RingMedian {
    depth: usize,
    ring: Vec<f64>,
    head: usize,
    len: usize,
    sorted: Vec<f64>,
}

impl RingMedian {
    pub fn new(depth: usize) -> Self {
        assert!(depth >= 1);
        Self {
            depth,
            ring: vec![0.0; depth],
            head: 0,
            len: 0,
            sorted: Vec::with_capacity(depth),
        }
    }

    pub fn is_full(&self) -> bool {
        self.len == self.depth
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    /// Push a value, evicting the oldest once full.
    pub fn push(&mut self, value: f64) {
        if self.len == self.depth {
            let old = self.ring[self.head];
            let pos = self
                .sorted
                .binary_search_by(|x| x.total_cmp(&old))
                .expect("evicted value present in sorted copy");
            self.sorted.remove(pos);
        } else {
            self.len += 1;
        }
        self.ring[self.head] = value;
        self.head = (self.head + 1) % self.depth;
        let pos = self
            .sorted
            .binary_search_by(|x| x.total_cmp(&value))
            .unwrap_or_else(|p| p);
        self.sorted.insert(pos, value);
    }

    /// Median of the current contents.
    pub fn median(&self) -> f64 {
        assert!(self.len > 0, "median of empty buffer");
        if self.len % 2 == 1 {
            self.sorted[self.len / 2]
        } else {
            0.5 * (self.sorted[self.len / 2 - 1] + self.sorted[self.len / 2])
        }
    }
}
