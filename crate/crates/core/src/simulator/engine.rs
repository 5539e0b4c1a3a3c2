use std::cmp::Ordering;
use std::collections::{BinaryHeap, VecDeque};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::Exp1;
use serde::Serialize;

use super::{ConservationCounts, SimConfig, SimOutcome, SimScenario};
use crate::error::{ModelError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum EventKind {
    Failure,
    RepairComplete,
    ServicerReturn,
    Review,
    Delivery,
}

#[derive(Debug, Clone, Copy)]
struct Event {
    time: f64,
    seq: u64,
    kind: EventKind,
    module: u32,
    quantity: u64,
}

impl PartialEq for Event {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for Event {}

impl PartialOrd for Event {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Event {
    // Reversed: the heap pops the earliest event, ties in scheduling order.
    fn cmp(&self, other: &Self) -> Ordering {
        other
            .time
            .total_cmp(&self.time)
            .then_with(|| other.seq.cmp(&self.seq))
    }
}

/// Depot stock levels.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
pub struct DepotState {
    pub capacity: u64,
    pub on_hand: u64,
    pub on_order: u64,
    /// Demands waiting for stock (at most one: the servicer's current job).
    pub backorders: u64,
}

impl DepotState {
    /// On hand plus on order, less backorders.
    pub fn position(&self) -> i64 {
        self.on_hand as i64 + self.on_order as i64 - self.backorders as i64
    }

    pub fn check(&self) -> std::result::Result<(), String> {
        if self.on_hand > self.capacity {
            return Err(format!(
                "on-hand {} above capacity {}",
                self.on_hand, self.capacity
            ));
        }
        if self.backorders > 1 {
            return Err(format!(
                "{} backorders with a single servicer",
                self.backorders
            ));
        }
        if self.backorders > 0 && self.on_hand > 0 {
            return Err("backorder outstanding while stock is on hand".into());
        }
        if self.position() > self.capacity as i64 {
            return Err(format!("position {} above capacity", self.position()));
        }
        Ok(())
    }
}

/// One processed event and the state right after it.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TraceRecord {
    pub time: f64,
    pub event: EventKind,
    pub module: Option<u32>,
    pub quantity: Option<u64>,
    pub on_hand: u64,
    pub on_order: u64,
    pub backorders: u64,
    pub queue_len: u64,
    pub servicer_busy: bool,
}

struct Sim<'a> {
    scn: &'a SimScenario,
    cfg: &'a SimConfig,
    rng: ChaCha8Rng,
    heap: BinaryHeap<Event>,
    seq: u64,
    now: f64,
    depot: DepotState,
    queue: VecDeque<(u32, f64)>,
    /// Failure time of the module being serviced, until its repair ends.
    in_service: Option<f64>,
    servicer_away: bool,
    stockout_since: f64,
    counts: ConservationCounts,
    wait_sum: f64,
    waits: u64,
    demands: u64,
    filled: u64,
    stockout_delay: f64,
    idle_time: f64,
}

impl<'a> Sim<'a> {
    fn exp(&mut self, rate: f64) -> f64 {
        let e: f64 = self.rng.sample(Exp1);
        e / rate
    }

    fn schedule(&mut self, time: f64, kind: EventKind, module: u32, quantity: u64) {
        self.seq += 1;
        self.heap.push(Event {
            time,
            seq: self.seq,
            kind,
            module,
            quantity,
        });
    }

    fn idle(&self) -> bool {
        !self.servicer_away && self.queue.is_empty()
    }

    fn advance(&mut self, t: f64) {
        if self.idle() {
            let a = self.now.max(self.cfg.warmup_hours);
            let b = t.min(self.cfg.horizon_hours);
            if b > a {
                self.idle_time += b - a;
            }
        }
        self.now = t;
    }

    /// Starts the head-of-line job if the servicer is home and stock allows.
    fn dispatch(&mut self) {
        if self.servicer_away || self.queue.is_empty() {
            return;
        }
        let counted = self.now >= self.cfg.warmup_hours;
        if self.depot.on_hand == 0 {
            if self.depot.backorders == 0 {
                self.depot.backorders = 1;
                self.stockout_since = self.now;
                if counted {
                    self.demands += 1;
                }
            }
            return;
        }
        if self.depot.backorders > 0 {
            self.depot.backorders = 0;
            if self.stockout_since >= self.cfg.warmup_hours {
                self.stockout_delay += self.now - self.stockout_since;
            }
        } else if counted {
            self.demands += 1;
            self.filled += 1;
        }
        self.depot.on_hand -= 1;
        self.counts.consumed += 1;
        let (module, failed_at) = self.queue.pop_front().expect("queue checked non-empty");
        let sat = (module / self.scn.modules_per_satellite) as usize;
        let done = self.now + self.scn.outbound[sat] + self.scn.repair_time;
        self.in_service = Some(failed_at);
        self.servicer_away = true;
        self.schedule(done, EventKind::RepairComplete, module, 0);
        self.schedule(
            done + self.scn.inbound[sat],
            EventKind::ServicerReturn,
            module,
            0,
        );
    }

    fn handle(&mut self, ev: Event) {
        match ev.kind {
            EventKind::Failure => {
                self.counts.failures += 1;
                self.queue.push_back((ev.module, self.now));
                self.dispatch();
            }
            EventKind::RepairComplete => {
                let failed_at = self.in_service.take().expect("repair without a job");
                self.counts.repairs_completed += 1;
                if failed_at >= self.cfg.warmup_hours {
                    self.wait_sum += self.now - failed_at;
                    self.waits += 1;
                }
                let next = self.now + self.exp(self.scn.alpha);
                self.schedule(next, EventKind::Failure, ev.module, 0);
            }
            EventKind::ServicerReturn => {
                self.servicer_away = false;
                self.dispatch();
            }
            EventKind::Review => {
                let c = self.scn.capacity;
                let want = c as i64 - self.depot.position();
                if want > 0 {
                    let q = if self.cfg.rocket_capacity_enforced {
                        (want as u64).min(c)
                    } else {
                        want as u64
                    };
                    if q > 0 {
                        self.depot.on_order += q;
                        self.counts.launched += q;
                        self.schedule(self.now + self.scn.lead_time, EventKind::Delivery, 0, q);
                    }
                }
                let next = self.now + self.exp(self.scn.beta);
                self.schedule(next, EventKind::Review, 0, 0);
            }
            EventKind::Delivery => {
                self.depot.on_order -= ev.quantity;
                self.depot.on_hand += ev.quantity;
                self.counts.delivered += ev.quantity;
                self.dispatch();
            }
        }
    }
}

pub(super) fn run(
    scn: &SimScenario,
    cfg: &SimConfig,
    replication: u32,
    mut trace: Option<&mut Vec<TraceRecord>>,
) -> Result<SimOutcome> {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    rng.set_stream(replication as u64);
    let mut sim = Sim {
        scn,
        cfg,
        rng,
        heap: BinaryHeap::new(),
        seq: 0,
        now: 0.0,
        depot: DepotState {
            capacity: scn.capacity,
            on_hand: scn.capacity,
            ..DepotState::default()
        },
        queue: VecDeque::new(),
        in_service: None,
        servicer_away: false,
        stockout_since: 0.0,
        counts: ConservationCounts {
            initial_stock: scn.capacity,
            ..ConservationCounts::default()
        },
        wait_sum: 0.0,
        waits: 0,
        demands: 0,
        filled: 0,
        stockout_delay: 0.0,
        idle_time: 0.0,
    };
    for m in 0..scn.modules() {
        let t = sim.exp(scn.alpha);
        sim.schedule(t, EventKind::Failure, m, 0);
    }
    let t = sim.exp(scn.beta);
    sim.schedule(t, EventKind::Review, 0, 0);

    while let Some(ev) = sim.heap.pop() {
        if ev.time > cfg.horizon_hours {
            break;
        }
        sim.advance(ev.time);
        sim.handle(ev);
        sim.depot
            .check()
            .map_err(|reason| ModelError::domain("simulation", reason))?;
        if let Some(tr) = trace.as_deref_mut() {
            tr.push(TraceRecord {
                time: ev.time,
                event: ev.kind,
                module: matches!(
                    ev.kind,
                    EventKind::Failure | EventKind::RepairComplete | EventKind::ServicerReturn
                )
                .then_some(ev.module),
                quantity: (ev.kind == EventKind::Delivery).then_some(ev.quantity),
                on_hand: sim.depot.on_hand,
                on_order: sim.depot.on_order,
                backorders: sim.depot.backorders,
                queue_len: sim.queue.len() as u64,
                servicer_busy: sim.servicer_away,
            });
        }
    }
    sim.advance(cfg.horizon_hours);

    let mut counts = sim.counts;
    counts.queued_at_end = sim.queue.len() as u64;
    counts.in_service_at_end = sim.in_service.is_some() as u64;
    counts.on_hand_at_end = sim.depot.on_hand;
    counts.on_order_at_end = sim.depot.on_order;
    counts
        .check()
        .map_err(|reason| ModelError::domain("simulation", reason))?;

    let window = cfg.horizon_hours - cfg.warmup_hours;
    let ratio = |a: f64, b: u64| if b == 0 { f64::NAN } else { a / b as f64 };
    Ok(SimOutcome {
        replication,
        mean_wait: ratio(sim.wait_sum, sim.waits),
        wait_samples: sim.waits,
        demands: sim.demands,
        filled: sim.filled,
        fill_rate: ratio(sim.filled as f64, sim.demands),
        idle_fraction: sim.idle_time / window,
        demand_rate: sim.demands as f64 / window,
        mean_stockout_delay: if sim.demands == 0 {
            0.0
        } else {
            sim.stockout_delay / sim.demands as f64
        },
        counts,
    })
}
