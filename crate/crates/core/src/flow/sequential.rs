use std::collections::VecDeque;

use super::{Arc, AugmentStats, FlowState};

impl FlowState<'_> {
    /// FIFO push-relabel with periodic global relabeling.
    pub fn augment_sequential(&mut self) -> AugmentStats {
        let mut stats = AugmentStats::default();
        let n = self.num_simulated() as u32;
        let cadence = self.num_arcs().max(1);
        let mut queued = vec![false; self.num_simulated()];
        let mut queue: VecDeque<usize> = VecDeque::new();
        let mut work = 0usize;

        let refill = |state: &mut Self, queue: &mut VecDeque<usize>, queued: &mut Vec<bool>| {
            queue.clear();
            queued.iter_mut().for_each(|q| *q = false);
            for x in state.global_relabel() {
                queued[x] = true;
                queue.push_back(x);
            }
        };
        refill(self, &mut queue, &mut queued);
        stats.global_relabels += 1;

        let mut arcs: Vec<(usize, Arc, usize)> = Vec::new();
        while let Some(x) = queue.pop_front() {
            queued[x] = false;
            if self.excess[x] == 0 || self.labels[x] >= n {
                continue;
            }
            arcs.clear();
            self.for_each_out_arc(x, |y, arc, e| {
                arcs.push((y, arc, e));
                true
            });
            work += arcs.len();

            let mut min_label = n;
            for &(y, arc, e) in &arcs {
                let r = self.residual(arc, e);
                if r <= 0 {
                    continue;
                }
                if self.excess[x] > 0 && self.labels[x] == self.labels[y] + 1 {
                    let delta = r.min(self.excess[x]);
                    self.push_flow(arc, delta);
                    stats.pushes += 1;
                    self.excess[x] -= delta;
                    if self.is_sink_node(y) {
                        self.flow_value += delta;
                    } else {
                        self.excess[y] += delta;
                        if !queued[y] && self.labels[y] < n {
                            queued[y] = true;
                            queue.push_back(y);
                        }
                    }
                    if delta < r {
                        min_label = min_label.min(self.labels[y] + 1);
                    }
                } else {
                    min_label = min_label.min(self.labels[y] + 1);
                }
            }

            if self.excess[x] > 0 {
                self.labels[x] = min_label.min(n);
                stats.relabels += 1;
                if self.labels[x] < n {
                    queued[x] = true;
                    queue.push_back(x);
                }
            }

            if work > cadence {
                work = 0;
                refill(self, &mut queue, &mut queued);
                stats.global_relabels += 1;
            }
        }
        stats
    }
}
