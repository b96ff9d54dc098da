//! Racing: several diversified solvers on one instance plus a worker that
//! only runs primal heuristics. Incumbents and root fixings travel between
//! workers as messages; the first worker to prove optimality stops the rest.

use std::panic::AssertUnwindSafe;
use std::sync::atomic::{AtomicBool, Ordering};
use std::sync::mpsc::{channel, Receiver, Sender};
use std::sync::Arc;
use std::time::Instant;

use log::{error, info};

use super::{solve_prepared, Prepared, PreparedOutcome, SolverConfig};
use crate::graph::CutSolution;
use crate::heuristics::burer_rank2;

#[derive(Debug, Clone)]
pub(crate) enum Message {
    Incumbent { component: usize, weight: f64, sides: Vec<bool> },
    RootFixings { component: usize, fixes: Vec<(usize, bool)> },
}

impl Message {
    fn component(&self) -> usize {
        match self {
            Message::Incumbent { component, .. } | Message::RootFixings { component, .. } => *component,
        }
    }
}

/// One worker's end of the message exchange.
pub(crate) struct Exchange {
    me: usize,
    rx: Receiver<Message>,
    peers: Vec<Sender<Message>>,
    stop: Arc<AtomicBool>,
    pending: Vec<Message>,
    pub share: bool,
}

impl Exchange {
    pub fn broadcast(&mut self, m: Message) {
        for (i, tx) in self.peers.iter().enumerate() {
            if i != self.me {
                let _ = tx.send(m.clone());
            }
        }
    }

    /// Received messages about `component`; others stay queued.
    pub fn take_for(&mut self, component: usize) -> Vec<Message> {
        self.pending.extend(self.rx.try_iter());
        let (mine, rest) = std::mem::take(&mut self.pending).into_iter().partition(|m| m.component() == component);
        self.pending = rest;
        mine
    }

    pub fn cancelled(&self) -> bool {
        self.stop.load(Ordering::Relaxed)
    }
}

fn exchanges(k: usize, share: bool, stop: &Arc<AtomicBool>) -> Vec<Exchange> {
    let (txs, rxs): (Vec<Sender<Message>>, Vec<Receiver<Message>>) = (0..k).map(|_| channel()).unzip();
    rxs.into_iter()
        .enumerate()
        .map(|(me, rx)| Exchange { me, rx, peers: txs.clone(), stop: Arc::clone(stop), pending: Vec::new(), share })
        .collect()
}

/// Worker `i > 0` varies the seed and a few separation and heuristic
/// settings.
fn preset(cfg: &SolverConfig, i: usize) -> SolverConfig {
    let mut c = cfg.clone();
    c.seed = cfg.seed.wrapping_add(i as u64 * 0x9e37_79b9);
    c.threads = 1;
    c.separation.threads = 1;
    if i % 2 == 1 {
        c.separation.max_extra_walks = cfg.separation.max_extra_walks / 2;
        c.heur_restarts = (cfg.heur_restarts / 2).max(1);
    }
    c
}

/// Repeats the rank-2 heuristic over the large components until stopped.
fn heuristic_worker(prep: &Prepared, cfg: &SolverConfig, ex: &mut Exchange) {
    let large: Vec<usize> =
        (0..prep.components.len()).filter(|&i| prep.components[i].0.vertex_count() > cfg.enum_threshold).collect();
    if large.is_empty() || !cfg.heuristics {
        return;
    }
    let mut best: Vec<f64> = large.iter().map(|_| f64::NEG_INFINITY).collect();
    let mut seed = cfg.seed ^ 0x5eed;
    while !ex.cancelled() {
        for (slot, &c) in large.iter().enumerate() {
            if ex.cancelled() {
                return;
            }
            let g = &prep.components[c].0;
            let cut: CutSolution = burer_rank2(g, seed, None, cfg.heur_restarts);
            seed = seed.wrapping_add(1);
            if cut.weight > best[slot] + 1e-9 {
                best[slot] = cut.weight;
                if ex.share {
                    ex.broadcast(Message::Incumbent { component: c, weight: cut.weight, sides: cut.sides });
                }
            }
            let _ = ex.take_for(c);
        }
    }
}

/// Races `k - 1` solver workers and one heuristic worker. Returns the
/// outcome of the first worker that proves optimality, or else the best
/// one by primal value, with the tightest dual bound seen. `None` if every
/// solver worker panicked.
pub(crate) fn race(prep: &Prepared, cfg: &SolverConfig, k: usize, start: Instant) -> Option<PreparedOutcome> {
    let solvers = k.saturating_sub(1).max(1);
    let stop = Arc::new(AtomicBool::new(false));
    let mut ex = exchanges(solvers + 1, cfg.share_incumbents, &stop);
    let mut heur_ex = ex.pop().expect("heuristic exchange");
    let (done_tx, done_rx) = channel::<(usize, PreparedOutcome)>();
    let mut results: Vec<(usize, PreparedOutcome)> = Vec::new();
    std::thread::scope(|scope| {
        for (i, mut e) in ex.into_iter().enumerate() {
            let tx = done_tx.clone();
            let stop = Arc::clone(&stop);
            let c = preset(cfg, i);
            scope.spawn(move || {
                let run = std::panic::catch_unwind(AssertUnwindSafe(|| solve_prepared(prep, &c, Some(&mut e), None, start)));
                match run {
                    Ok(out) => {
                        if out.complete() {
                            stop.store(true, Ordering::Relaxed);
                        }
                        let _ = tx.send((i, out));
                    }
                    Err(_) => error!("racing worker {i} panicked"),
                }
            });
        }
        drop(done_tx);
        let heur_stop = Arc::clone(&stop);
        let heur = scope.spawn(move || {
            let _ = std::panic::catch_unwind(AssertUnwindSafe(|| heuristic_worker(prep, cfg, &mut heur_ex)));
        });
        for r in done_rx.iter() {
            results.push(r);
        }
        heur_stop.store(true, Ordering::Relaxed);
        let _ = heur.join();
    });
    let winner = results
        .iter()
        .position(|(_, o)| o.complete())
        .or_else(|| {
            (0..results.len()).max_by(|&a, &b| results[a].1.primal().total_cmp(&results[b].1.primal()).then(b.cmp(&a)))
        })?;
    let others: Vec<PreparedOutcome> = results.iter().map(|(_, o)| o.clone()).collect();
    let (idx, mut out) = results.swap_remove(winner);
    info!("racing: worker {idx} wins with value {}", out.primal());
    out.tighten_with(&others);
    Some(out)
}
