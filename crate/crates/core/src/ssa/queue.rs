/// Indexed binary min-heap over reaction firing times.
///
/// Every reaction is present exactly once; a disabled reaction sits at
/// `+inf`. `update` moves an entry up or down in `O(log n)`.
#[derive(Debug, Clone)]
pub struct EventQueue {
    heap: Vec<usize>,
    pos: Vec<usize>,
    time: Vec<f64>,
}

impl EventQueue {
    pub fn new(times: Vec<f64>) -> Self {
        let n = times.len();
        let mut q = EventQueue { heap: (0..n).collect(), pos: (0..n).collect(), time: times };
        for i in (0..n / 2).rev() {
            q.sift_down(i);
        }
        q
    }

    pub fn len(&self) -> usize {
        self.heap.len()
    }

    pub fn is_empty(&self) -> bool {
        self.heap.is_empty()
    }

    /// Reaction with the earliest putative time.
    pub fn peek(&self) -> Option<(usize, f64)> {
        self.heap.first().map(|&r| (r, self.time[r]))
    }

    pub fn time(&self, r: usize) -> f64 {
        self.time[r]
    }

    pub fn update(&mut self, r: usize, t: f64) {
        let old = self.time[r];
        self.time[r] = t;
        let i = self.pos[r];
        if t < old {
            self.sift_up(i);
        } else {
            self.sift_down(i);
        }
    }

    fn less(&self, a: usize, b: usize) -> bool {
        let (ta, tb) = (self.time[self.heap[a]], self.time[self.heap[b]]);
        ta < tb || (ta == tb && self.heap[a] < self.heap[b])
    }

    fn swap(&mut self, a: usize, b: usize) {
        self.heap.swap(a, b);
        self.pos[self.heap[a]] = a;
        self.pos[self.heap[b]] = b;
    }

    fn sift_up(&mut self, mut i: usize) {
        while i > 0 {
            let p = (i - 1) / 2;
            if !self.less(i, p) {
                break;
            }
            self.swap(i, p);
            i = p;
        }
    }

    fn sift_down(&mut self, mut i: usize) {
        let n = self.heap.len();
        loop {
            let (l, r) = (2 * i + 1, 2 * i + 2);
            let mut m = i;
            if l < n && self.less(l, m) {
                m = l;
            }
            if r < n && self.less(r, m) {
                m = r;
            }
            if m == i {
                break;
            }
            self.swap(i, m);
            i = m;
        }
    }

    #[cfg(test)]
    fn check(&self) {
        for i in 1..self.heap.len() {
            assert!(!self.less(i, (i - 1) / 2));
        }
        for (r, &p) in self.pos.iter().enumerate() {
            assert_eq!(self.heap[p], r);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    proptest! {
        #[test]
        fn min_is_always_at_front(init in prop::collection::vec(0.0f64..100.0, 1..40),
                                  ops in prop::collection::vec((0usize..40, prop_oneof![Just(f64::INFINITY), 0.0f64..100.0]), 0..100)) {
            let mut q = EventQueue::new(init.clone());
            let mut model = init;
            q.check();
            for (r, t) in ops {
                let r = r % model.len();
                q.update(r, t);
                model[r] = t;
                q.check();
                let best = model.iter().cloned().fold(f64::INFINITY, f64::min);
                prop_assert_eq!(q.peek().unwrap().1, best);
            }
        }
    }
}
