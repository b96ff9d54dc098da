//! Binary min-heap over ids `0..capacity` with decrease-key through a
//! position table.

const ABSENT: usize = usize::MAX;

#[derive(Debug, Clone)]
pub struct IndexedHeap {
    heap: Vec<usize>,
    pos: Vec<usize>,
    key: Vec<f64>,
}

impl IndexedHeap {
    pub fn new(capacity: usize) -> Self {
        IndexedHeap { heap: Vec::new(), pos: vec![ABSENT; capacity], key: vec![0.0; capacity] }
    }

    pub fn is_empty(&self) -> bool {
        self.heap.is_empty()
    }

    pub fn len(&self) -> usize {
        self.heap.len()
    }

    pub fn contains(&self, id: usize) -> bool {
        self.pos[id] != ABSENT
    }

    /// Inserts `id` or lowers its key; a larger key is ignored.
    pub fn push_or_decrease(&mut self, id: usize, key: f64) {
        let p = self.pos[id];
        if p == ABSENT {
            self.key[id] = key;
            self.pos[id] = self.heap.len();
            self.heap.push(id);
            self.sift_up(self.heap.len() - 1);
        } else if key < self.key[id] {
            self.key[id] = key;
            self.sift_up(p);
        }
    }

    pub fn pop(&mut self) -> Option<(usize, f64)> {
        let top = *self.heap.first()?;
        let last = self.heap.pop().expect("non-empty");
        self.pos[top] = ABSENT;
        if last != top {
            self.heap[0] = last;
            self.pos[last] = 0;
            self.sift_down(0);
        }
        Some((top, self.key[top]))
    }

    pub fn clear(&mut self) {
        for &id in &self.heap {
            self.pos[id] = ABSENT;
        }
        self.heap.clear();
    }

    fn sift_up(&mut self, mut i: usize) {
        let id = self.heap[i];
        let k = self.key[id];
        while i > 0 {
            let parent = (i - 1) / 2;
            let pid = self.heap[parent];
            if self.key[pid] <= k {
                break;
            }
            self.heap[i] = pid;
            self.pos[pid] = i;
            i = parent;
        }
        self.heap[i] = id;
        self.pos[id] = i;
    }

    fn sift_down(&mut self, mut i: usize) {
        let id = self.heap[i];
        let k = self.key[id];
        let n = self.heap.len();
        loop {
            let l = 2 * i + 1;
            if l >= n {
                break;
            }
            let r = l + 1;
            let c = if r < n && self.key[self.heap[r]] < self.key[self.heap[l]] { r } else { l };
            let cid = self.heap[c];
            if self.key[cid] >= k {
                break;
            }
            self.heap[i] = cid;
            self.pos[cid] = i;
            i = c;
        }
        self.heap[i] = id;
        self.pos[id] = i;
    }
}
