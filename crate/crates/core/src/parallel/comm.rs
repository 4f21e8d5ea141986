//! In-process communicator: one thread per rank, point-to-point mailboxes.

use std::any::Any;
use std::cell::Cell;
use std::collections::{HashMap, VecDeque};
use std::rc::Rc;
use std::sync::{Arc, Condvar, Mutex};
use std::time::Duration;

type Message = Box<dyn Any + Send>;

/// How long a receive waits before the run is declared deadlocked.
const RECV_TIMEOUT: Duration = Duration::from_secs(120);

/// First tag used by collectives; user tags must stay below it.
pub const COLLECTIVE_TAG_BASE: u64 = 1 << 62;

#[derive(Debug, Default)]
struct Shared {
    size: usize,
    queues: Mutex<HashMap<(usize, usize, u64), VecDeque<Message>>>,
    arrived: Condvar,
}

/// Simulated communicator shared by all ranks of one run.
#[derive(Debug)]
pub struct SimComm {
    shared: Arc<Shared>,
}

impl SimComm {
    pub fn new(nb_ranks: usize) -> Self {
        assert!(nb_ranks > 0, "a communicator needs at least one rank");
        Self {
            shared: Arc::new(Shared {
                size: nb_ranks,
                ..Default::default()
            }),
        }
    }

    pub fn size(&self) -> usize {
        self.shared.size
    }

    /// Handle for `rank`. Each handle must stay on one thread.
    pub fn rank(&self, rank: usize) -> Comm {
        assert!(rank < self.size(), "rank {rank} of {}", self.size());
        Comm {
            rank,
            shared: Arc::clone(&self.shared),
            sequence: Rc::new(Cell::new(0)),
        }
    }

    /// Run `task` on every rank concurrently and collect the results in rank order.
    pub fn run<R, F>(nb_ranks: usize, task: F) -> Vec<R>
    where
        R: Send,
        F: Fn(Comm) -> R + Sync,
    {
        let world = SimComm::new(nb_ranks);
        let task = &task;
        std::thread::scope(|s| {
            let handles: Vec<_> = (0..nb_ranks)
                .map(|r| {
                    let shared = Arc::clone(&world.shared);
                    std::thread::Builder::new()
                        .name(format!("rank-{r}"))
                        .spawn_scoped(s, move || {
                            task(Comm {
                                rank: r,
                                shared,
                                sequence: Rc::new(Cell::new(0)),
                            })
                        })
                        .expect("spawn rank thread")
                })
                .collect();
            handles
                .into_iter()
                .map(|h| h.join().unwrap_or_else(|e| std::panic::resume_unwind(e)))
                .collect()
        })
    }
}

/// One rank's endpoint.
#[derive(Clone, Debug)]
pub struct Comm {
    rank: usize,
    shared: Arc<Shared>,
    sequence: Rc<Cell<u64>>,
}

impl Comm {
    /// Single-rank communicator.
    pub fn serial() -> Self {
        SimComm::new(1).rank(0)
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn size(&self) -> usize {
        self.shared.size
    }

    /// Queue `value` for `dest`. Never blocks.
    pub fn send<T: Send + 'static>(&self, dest: usize, tag: u64, value: T) {
        assert!(dest < self.size(), "destination {dest} of {}", self.size());
        let mut queues = self.shared.queues.lock().unwrap();
        queues
            .entry((self.rank, dest, tag))
            .or_default()
            .push_back(Box::new(value));
        self.shared.arrived.notify_all();
    }

    /// Take the oldest message from `source` with `tag`, waiting for it.
    ///
    /// Panics when the payload type differs from `T` or nothing arrives
    /// within the deadlock timeout.
    pub fn recv<T: 'static>(&self, source: usize, tag: u64) -> T {
        let key = (source, self.rank, tag);
        let mut queues = self.shared.queues.lock().unwrap();
        loop {
            if let Some(msg) = queues.get_mut(&key).and_then(VecDeque::pop_front) {
                return *msg.downcast::<T>().unwrap_or_else(|_| {
                    panic!(
                        "rank {}: unexpected payload type from {source} tag {tag}",
                        self.rank
                    )
                });
            }
            let (guard, timeout) = self
                .shared
                .arrived
                .wait_timeout(queues, RECV_TIMEOUT)
                .unwrap();
            queues = guard;
            if timeout.timed_out() && !queues.get(&key).is_some_and(|q| !q.is_empty()) {
                panic!(
                    "rank {}: no message from {source} with tag {tag}",
                    self.rank
                );
            }
        }
    }

    /// Fresh tag for the next collective; all ranks must call collectives in the same order.
    pub fn next_collective_tag(&self) -> u64 {
        let s = self.sequence.get();
        self.sequence.set(s + 1);
        COLLECTIVE_TAG_BASE + s
    }

    /// Send `items[d]` to rank `d` and return what every rank sent here, by source.
    pub fn all_to_all<T: Send + 'static>(&self, items: Vec<T>) -> Vec<T> {
        assert_eq!(items.len(), self.size(), "one item per rank");
        let tag = self.next_collective_tag();
        for (d, item) in items.into_iter().enumerate() {
            self.send(d, tag, item);
        }
        (0..self.size()).map(|s| self.recv(s, tag)).collect()
    }

    /// Every rank's `value`, by rank.
    pub fn all_gather<T: Clone + Send + 'static>(&self, value: T) -> Vec<T> {
        self.all_to_all(vec![value; self.size()])
    }

    /// Values of all ranks at `root`, by rank; `None` elsewhere.
    pub fn gather<T: Send + 'static>(&self, value: T, root: usize) -> Option<Vec<T>> {
        let tag = self.next_collective_tag();
        self.send(root, tag, value);
        (self.rank == root).then(|| (0..self.size()).map(|s| self.recv(s, tag)).collect())
    }

    /// Root's value on every rank.
    pub fn broadcast<T: Clone + Send + 'static>(&self, value: Option<T>, root: usize) -> T {
        let tag = self.next_collective_tag();
        if self.rank == root {
            let v = value.expect("root provides the broadcast value");
            for d in 0..self.size() {
                self.send(d, tag, v.clone());
            }
        }
        self.recv(root, tag)
    }

    pub fn barrier(&self) {
        self.all_gather(());
    }

    /// Sum in rank order, identical on every rank.
    pub fn all_reduce_sum_f64(&self, value: f64) -> f64 {
        self.all_gather(value).into_iter().fold(0.0, |a, b| a + b)
    }

    pub fn all_reduce_sum_i128(&self, value: i128) -> i128 {
        self.all_gather(value).into_iter().sum()
    }

    pub fn all_reduce_sum_usize(&self, value: usize) -> usize {
        self.all_gather(value).into_iter().sum()
    }

    pub fn all_reduce_min_f64(&self, value: f64) -> f64 {
        self.all_gather(value)
            .into_iter()
            .fold(f64::INFINITY, f64::min)
    }

    pub fn all_reduce_max_f64(&self, value: f64) -> f64 {
        self.all_gather(value)
            .into_iter()
            .fold(f64::NEG_INFINITY, f64::max)
    }

    /// Whether every rank passed `true`.
    pub fn all_ok(&self, ok: bool) -> bool {
        self.all_gather(ok).into_iter().all(|b| b)
    }
}
