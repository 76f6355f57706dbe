/// Fenwick tree over nonnegative rates: point update, total, and selection
/// of the leaf where a uniform draw in `[0, total)` falls, all `O(log n)`.
#[derive(Debug, Clone)]
pub struct RateTree {
    rates: Vec<f64>,
    tree: Vec<f64>,
    top: usize,
}

impl RateTree {
    pub fn new(rates: Vec<f64>) -> Self {
        let n = rates.len();
        let top = if n == 0 { 0 } else { 1 << (usize::BITS - 1 - n.leading_zeros()) };
        let mut t = Self { rates, tree: vec![0.0; n + 1], top };
        t.rebuild();
        t
    }

    pub fn len(&self) -> usize {
        self.rates.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rates.is_empty()
    }

    pub fn rate(&self, i: usize) -> f64 {
        self.rates[i]
    }

    /// Recomputes every partial sum from the leaf rates, clearing drift.
    pub fn rebuild(&mut self) {
        let n = self.rates.len();
        self.tree[1..].copy_from_slice(&self.rates);
        self.tree[0] = 0.0;
        for i in 1..=n {
            let parent = i + (i & i.wrapping_neg());
            if parent <= n {
                self.tree[parent] += self.tree[i];
            }
        }
    }

    pub fn set(&mut self, i: usize, rate: f64) {
        let delta = rate - self.rates[i];
        if delta == 0.0 {
            return;
        }
        self.rates[i] = rate;
        let mut j = i + 1;
        while j < self.tree.len() {
            self.tree[j] += delta;
            j += j & j.wrapping_neg();
        }
    }

    pub fn total(&self) -> f64 {
        let mut s = 0.0;
        let mut j = self.rates.len();
        while j > 0 {
            s += self.tree[j];
            j -= j & j.wrapping_neg();
        }
        s
    }

    /// Smallest `i` with `rate(0) + … + rate(i) > u`, clamped to the last leaf.
    pub fn find(&self, mut u: f64) -> usize {
        let n = self.rates.len();
        let mut pos = 0;
        let mut step = self.top;
        while step > 0 {
            let next = pos + step;
            if next <= n && self.tree[next] <= u {
                pos = next;
                u -= self.tree[next];
            }
            step >>= 1;
        }
        pos.min(n.saturating_sub(1))
    }
}
