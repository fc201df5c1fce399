/// Parameters of [`crate::scheduler::Refiner`].
#[derive(Debug, Clone, PartialEq)]
pub struct RefinementConfig {
    /// Imbalance parameter ε.
    pub epsilon: f64,
    /// Parallelism multiplier τ for the number of concurrently refined pairs.
    pub tau: f64,
    /// Region scaling α.
    pub alpha: f64,
    /// Maximum BFS distance δ of region vertices from the cut.
    pub delta: u32,
    /// Shrink factor β of the bulk piercing goals.
    pub beta: f64,
    pub bulk_piercing: bool,
    /// Total thread budget.
    pub threads: usize,
    pub seed: u64,
    /// Whether the partition is on the finest level (disables cut-size pruning).
    pub finest: bool,
    /// Pairs with a smaller cut weight are skipped on coarse levels.
    pub min_cut_prune: u64,
    /// Relative round improvement below which refinement stops.
    pub min_relative_improvement: f64,
    /// Flow computations are limited to this multiple of the average time.
    pub time_limit_factor: f64,
    /// Bound flow on pin-to-net arcs by the net weight.
    pub restricted_capacities: bool,
    /// Randomized repetitions of the most balanced cut search.
    pub most_balanced_repetitions: usize,
    /// Run full consistency checks: after every applied move sequence with a
    /// single pair worker, after the final round otherwise.
    pub validate: bool,
}

impl Default for RefinementConfig {
    fn default() -> Self {
        Self {
            epsilon: 0.03,
            tau: 1.0,
            alpha: 16.0,
            delta: 2,
            beta: 0.55,
            bulk_piercing: true,
            threads: 1,
            seed: 0,
            finest: true,
            min_cut_prune: 10,
            min_relative_improvement: 0.001,
            time_limit_factor: 8.0,
            restricted_capacities: true,
            most_balanced_repetitions: 7,
            validate: false,
        }
    }
}

impl RefinementConfig {
    /// Number of block pairs refined concurrently:
    /// `min(min(t, k(k-1)/2), τk)`, at least one.
    pub fn pair_workers(&self, k: usize) -> usize {
        let pairs = k * k.saturating_sub(1) / 2;
        let by_tau = (self.tau * k as f64).floor() as usize;
        self.threads.min(pairs).min(by_tau).max(1)
    }
}
