//! Successive shortest paths on the session/step transport network:
//! source → session (demand) → step (socket limit, effective price) → sink
//! (station limit). Arc capacities are in kWh.

use std::cmp::Ordering;
use std::collections::{BinaryHeap, VecDeque};

use super::{AllocationMatrix, ChargingInstance};
use crate::error::{Error, Result};

const CAP_EPS: f64 = 1e-9;

#[derive(Debug, Clone)]
struct Arc {
    to: usize,
    cap: f64,
    cost: f64,
}

struct Network {
    arcs: Vec<Arc>,
    adj: Vec<Vec<usize>>,
}

impl Network {
    fn new(nodes: usize) -> Self {
        Network {
            arcs: Vec::new(),
            adj: vec![Vec::new(); nodes],
        }
    }

    fn add_arc(&mut self, from: usize, to: usize, cap: f64, cost: f64) -> usize {
        let id = self.arcs.len();
        self.arcs.push(Arc { to, cap, cost });
        self.arcs.push(Arc {
            to: from,
            cap: 0.0,
            cost: -cost,
        });
        self.adj[from].push(id);
        self.adj[to].push(id + 1);
        id
    }

    /// Push up to `limit` units from `s` to `t` at minimum cost; returns the flow sent.
    fn min_cost_flow(&mut self, s: usize, t: usize, limit: f64) -> f64 {
        let n = self.adj.len();
        let mut potential = vec![0.0; n];
        let mut sent = 0.0;
        while limit - sent > CAP_EPS {
            let mut dist = vec![f64::INFINITY; n];
            let mut via = vec![usize::MAX; n];
            dist[s] = 0.0;
            let mut heap = BinaryHeap::new();
            heap.push(Entry(0.0, s));
            while let Some(Entry(d, u)) = heap.pop() {
                if d > dist[u] {
                    continue;
                }
                for &a in &self.adj[u] {
                    let arc = &self.arcs[a];
                    if arc.cap <= CAP_EPS {
                        continue;
                    }
                    let reduced = (arc.cost + potential[u] - potential[arc.to]).max(0.0);
                    let nd = d + reduced;
                    if nd < dist[arc.to] {
                        dist[arc.to] = nd;
                        via[arc.to] = a;
                        heap.push(Entry(nd, arc.to));
                    }
                }
            }
            if !dist[t].is_finite() {
                break;
            }
            for v in 0..n {
                if dist[v].is_finite() {
                    potential[v] += dist[v];
                }
            }
            let mut push = limit - sent;
            let mut v = t;
            while v != s {
                let a = via[v];
                push = push.min(self.arcs[a].cap);
                v = self.arcs[a ^ 1].to;
            }
            let mut v = t;
            while v != s {
                let a = via[v];
                self.arcs[a].cap -= push;
                self.arcs[a ^ 1].cap += push;
                v = self.arcs[a ^ 1].to;
            }
            sent += push;
        }
        sent
    }

    fn reachable_from(&self, s: usize) -> Vec<bool> {
        let mut seen = vec![false; self.adj.len()];
        let mut queue = VecDeque::from([s]);
        seen[s] = true;
        while let Some(u) = queue.pop_front() {
            for &a in &self.adj[u] {
                let arc = &self.arcs[a];
                if arc.cap > CAP_EPS && !seen[arc.to] {
                    seen[arc.to] = true;
                    queue.push_back(arc.to);
                }
            }
        }
        seen
    }
}

#[derive(PartialEq)]
struct Entry(f64, usize);

impl Eq for Entry {}

impl Ord for Entry {
    fn cmp(&self, other: &Self) -> Ordering {
        other.0.total_cmp(&self.0).then_with(|| other.1.cmp(&self.1))
    }
}

impl PartialOrd for Entry {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

struct Built {
    net: Network,
    source: usize,
    sink: usize,
    /// `(session, step, arc)` for every session→step arc.
    charge_arcs: Vec<(usize, usize, usize)>,
    sink_arcs: Vec<usize>,
}

fn build(instance: &ChargingInstance, prices: &[f64]) -> Built {
    let n = instance.sessions.len();
    let steps = instance.steps();
    let source = 0;
    let sink = n + steps + 1;
    let mut net = Network::new(n + steps + 2);
    let dt = instance.step_hours;
    let mut charge_arcs = Vec::new();
    for (i, s) in instance.sessions.iter().enumerate() {
        net.add_arc(source, 1 + i, s.demand_kwh, 0.0);
        for t in s.window() {
            let a = net.add_arc(1 + i, 1 + n + t, instance.socket_kw * dt, prices[t]);
            charge_arcs.push((i, t, a));
        }
    }
    let sink_arcs = (0..steps)
        .map(|t| net.add_arc(1 + n + t, sink, instance.station_capacity[t] * dt, 0.0))
        .collect();
    Built {
        net,
        source,
        sink,
        charge_arcs,
        sink_arcs,
    }
}

fn run(instance: &ChargingInstance, prices: &[f64]) -> Result<Built> {
    let mut built = build(instance, prices);
    let total = instance.total_demand();
    let sent = built.net.min_cost_flow(built.source, built.sink, total);
    if total - sent > CAP_EPS * total.max(1.0) {
        let n = instance.sessions.len();
        let seen = built.net.reachable_from(built.source);
        let step = (0..instance.steps())
            .find(|&t| seen[1 + n + t] && built.net.arcs[built.sink_arcs[t]].cap <= CAP_EPS)
            .unwrap_or(0);
        return Err(Error::CapacityInfeasible { step });
    }
    Ok(built)
}

pub(super) fn solve(instance: &ChargingInstance, prices: &[f64]) -> Result<AllocationMatrix> {
    let built = run(instance, prices)?;
    let mut alloc = AllocationMatrix::zeros(instance.steps(), instance.sessions.len());
    let full = instance.socket_kw * instance.step_hours;
    for &(i, t, a) in &built.charge_arcs {
        let kwh = (full - built.net.arcs[a].cap).clamp(0.0, full);
        if kwh > 0.0 {
            alloc.set(t, i, (kwh / instance.step_hours).min(instance.socket_kw));
        }
    }
    Ok(alloc)
}

/// Error with the first overloaded step if the demands cannot all be met.
pub(super) fn check_feasible(instance: &ChargingInstance) -> Result<()> {
    run(instance, &vec![0.0; instance.steps()]).map(|_| ())
}
