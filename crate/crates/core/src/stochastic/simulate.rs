use rand::Rng;

use super::config::{Configuration, Process};
use super::rate_tree::RateTree;
use super::rng::{stream_rng, Purpose};
use crate::lattice::ScaledGraph;
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct Snapshot {
    pub time: f64,
    pub configuration: Configuration,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimResult {
    pub snapshots: Vec<Snapshot>,
    pub event_count: u64,
    pub seed: u64,
    pub replica: u64,
}

/// Per-dart rates of the move form of each generator, without the `N²`.
struct Engine<'a> {
    sg: &'a ScaledGraph,
    process: &'a Process,
    /// `p(e) + p(ē)` for exclusion, `p(e)` for zero range.
    dart_weight: Vec<f64>,
    g_table: Vec<f64>,
}

impl Engine<'_> {
    fn rate(&self, eta: &[u32], dart: usize) -> f64 {
        let base = self.sg.base_dart(dart);
        let tail = eta[self.sg.tail(dart)];
        match self.process {
            Process::Exclusion => {
                if tail == 1 && eta[self.sg.head(dart)] == 0 {
                    self.dart_weight[base]
                } else {
                    0.0
                }
            }
            Process::ZeroRange(_) => self.dart_weight[base] * self.g_table[tail as usize],
        }
    }

    fn all_rates(&self, eta: &[u32]) -> Vec<f64> {
        (0..self.sg.dart_count()).map(|e| self.rate(eta, e)).collect()
    }

    fn refresh_site(&self, tree: &mut RateTree, eta: &[u32], site: usize) {
        for e in self.sg.out_darts(site) {
            tree.set(e, self.rate(eta, e));
            if matches!(self.process, Process::Exclusion) {
                let inv = self.sg.inverse(e);
                tree.set(inv, self.rate(eta, inv));
            }
        }
    }
}

/// Exact continuous-time simulation under the generator `N² L_N`.
///
/// Exclusion darts move a particle `oe → te` at rate `(p(e) + p(ē))`
/// when `η_oe = 1, η_te = 0`, which is the swap dynamics with no-op swaps
/// removed; zero-range darts fire at `p(e) g(η_oe)`. Waiting times are
/// exponential at the total rate and darts are chosen proportionally to
/// their rate from a Fenwick tree. Snapshot `s` records the state after the
/// last event at time `≤ s`. The random stream depends only on
/// `(seed, replica, N)`.
pub fn simulate(
    sg: &ScaledGraph,
    initial: &Configuration,
    process: &Process,
    horizon: f64,
    snapshot_times: &[f64],
    seed: u64,
    replica: u64,
) -> Result<SimResult> {
    initial.check(sg, process)?;
    if !(horizon >= 0.0) || !horizon.is_finite() {
        return Err(Error::InvalidArgument(format!("horizon must be finite and nonnegative, got {horizon}")));
    }
    if let Some(s) = snapshot_times.iter().find(|&&s| !(0.0..=horizon).contains(&s)) {
        return Err(Error::InvalidArgument(format!("snapshot time {s} outside [0, {horizon}]")));
    }
    let mut times = snapshot_times.to_vec();
    times.sort_by(f64::total_cmp);

    let base = sg.base();
    let dart_weight = base
        .darts()
        .iter()
        .map(|d| match process {
            Process::Exclusion => d.weight + base.dart(d.inverse).weight,
            Process::ZeroRange(_) => d.weight,
        })
        .collect();
    let g_table = match process {
        Process::Exclusion => Vec::new(),
        Process::ZeroRange(t) => (0..=initial.total().min(u32::MAX as u64) as u32).map(|k| t.rate().g(k)).collect(),
    };
    let engine = Engine { sg, process, dart_weight, g_table };

    let mut eta = initial.clone();
    let frozen = initial.total() == 0
        || (matches!(process, Process::Exclusion) && initial.total() == initial.len() as u64);
    let mut rng = stream_rng(seed, replica, Purpose::Dynamics, sg.scale() as u64);
    let mut tree = RateTree::new(engine.all_rates(eta.occupation()));
    let n2 = (sg.scale() as f64).powi(2);
    let rebuild_every = sg.dart_count().max(1) as u64;

    let mut snapshots = Vec::with_capacity(times.len());
    let mut next = 0;
    let mut t = 0.0;
    let mut events = 0u64;
    if !frozen {
        loop {
            let total = tree.total();
            let u: f64 = rng.random();
            let ts = t - (1.0 - u).ln() / (n2 * total);
            while next < times.len() && times[next] < ts {
                snapshots.push(Snapshot { time: times[next], configuration: eta.clone() });
                next += 1;
            }
            if ts > horizon {
                break;
            }
            let mut dart = tree.find(rng.random::<f64>() * total);
            while tree.rate(dart) <= 0.0 {
                // rounding put the draw on an idle dart
                tree.rebuild();
                dart = tree.find(rng.random::<f64>() * tree.total());
            }
            let (a, b) = (sg.tail(dart), sg.head(dart));
            eta.move_particle(a, b);
            engine.refresh_site(&mut tree, eta.occupation(), a);
            engine.refresh_site(&mut tree, eta.occupation(), b);
            t = ts;
            events += 1;
            if events.is_multiple_of(rebuild_every) {
                tree.rebuild();
            }
        }
    }
    while next < times.len() {
        snapshots.push(Snapshot { time: times[next], configuration: eta.clone() });
        next += 1;
    }
    Ok(SimResult { snapshots, event_count: events, seed, replica })
}
