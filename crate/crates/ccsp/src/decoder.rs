//! Chromosome-to-solution decoder: key sort, best-fit vehicle assignment,
//! cheapest-insertion route construction and greedy redundancy removal.
//!
//! The decoder is a pure function of (chromosome, instance): identical inputs
//! always produce identical solutions, so decoding may run concurrently.

use std::cmp::Reverse;
use std::collections::{BTreeMap, BTreeSet};

use thiserror::Error;

use crate::model::{CcspInstance, Route, Solution, VertexId};

#[derive(Debug, Error)]
pub enum DecodeError {
    #[error("chromosome has {got} keys but |V_d| = {expected}")]
    KeyCountMismatch { got: usize, expected: usize },
    #[error("no feasible server for demand vertex {demand}")]
    NoServer { demand: VertexId },
}

/// Output of the first phase: vehicles and their assigned demand vertices.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Assignment {
    /// A_m per vehicle, in assignment order.
    pub vehicles: Vec<Vec<VertexId>>,
    /// Total assigned demand per vehicle.
    pub loads: Vec<u32>,
}

/// Sort the demand vertices by their random keys, non-decreasing, stable
/// (equal keys keep index order).
pub fn sort_keys(instance: &CcspInstance, keys: &[f64]) -> Result<Vec<VertexId>, DecodeError> {
    let demand_vertices = instance.demand_vertices();
    if keys.len() != demand_vertices.len() {
        return Err(DecodeError::KeyCountMismatch {
            got: keys.len(),
            expected: demand_vertices.len(),
        });
    }
    let mut order: Vec<usize> = (0..keys.len()).collect();
    order.sort_by(|&a, &b| keys[a].partial_cmp(&keys[b]).unwrap());
    Ok(order.into_iter().map(|i| demand_vertices[i]).collect())
}

/// Best-fit vehicle assignment: each vertex goes to the open vehicle with the
/// largest current load that still fits it, otherwise a new vehicle opens.
/// Load ties go to the lowest vehicle index. Runs in O(n lg n) through an
/// ordered-load index.
pub fn best_fit(instance: &CcspInstance, order: &[VertexId]) -> Assignment {
    let capacity = instance.capacity();
    let mut vehicles: Vec<Vec<VertexId>> = Vec::new();
    let mut loads: Vec<u32> = Vec::new();
    // (load, Reverse(vehicle)): next_back over a bounded range yields the
    // max-load vehicle that fits, lowest index on load ties.
    let mut by_load: BTreeSet<(u32, Reverse<usize>)> = BTreeSet::new();

    for &v in order {
        let demand = instance.demand(v);
        let limit = capacity - demand;
        let fit = by_load
            .range(..=(limit, Reverse(0usize)))
            .next_back()
            .copied();
        match fit {
            Some(entry) => {
                let (load, Reverse(m)) = entry;
                by_load.remove(&entry);
                vehicles[m].push(v);
                loads[m] = load + demand;
                by_load.insert((loads[m], Reverse(m)));
            }
            None => {
                vehicles.push(vec![v]);
                loads.push(demand);
                by_load.insert((demand, Reverse(vehicles.len() - 1)));
            }
        }
    }
    Assignment { vehicles, loads }
}

/// Minimum cost of inserting `v` into the route and the position achieving
/// it: g(v, R) = min over consecutive cycle pairs (u, w) of
/// c(u,v) + c(v,w) - c(u,w). Ties go to the earliest position. Position p
/// means "insert before the p-th stop" (p = len appends before the depot).
pub fn insertion_cost(instance: &CcspInstance, v: VertexId, route: &Route) -> (f64, usize) {
    insertion_cost_in(instance, v, &route.stops)
}

fn insertion_cost_in(instance: &CcspInstance, v: VertexId, stops: &[VertexId]) -> (f64, usize) {
    let depot = instance.depot();
    if stops.is_empty() {
        return (2.0 * instance.edge_cost(depot, v), 0);
    }
    let mut best = f64::INFINITY;
    let mut best_pos = 0;
    for pos in 0..=stops.len() {
        let before = if pos == 0 { depot } else { stops[pos - 1] };
        let after = if pos == stops.len() { depot } else { stops[pos] };
        let delta = instance.edge_cost(before, v) + instance.edge_cost(v, after)
            - instance.edge_cost(before, after);
        if delta < best {
            best = delta;
            best_pos = pos;
        }
    }
    (best, best_pos)
}

/// Second phase: build one route per vehicle. For each assigned demand, the
/// candidate servers are the globally unvisited vertices of its cover set,
/// plus any cover vertex already on the current route (reused at zero cost).
/// The cheapest candidate wins, ties by lower id.
///
/// When every cover vertex is already visited on other routes, the demand is
/// re-homed to the visited cover vertex whose route still has capacity
/// (max-load route first, ties by lower vertex id); only then do phase-one
/// loads shift between vehicles. Should even that fail, construction restarts
/// with unprocessed demand vertices reserved for their own vehicles, which
/// always succeeds: every demand can then at worst visit itself.
pub fn construct_routes(
    instance: &CcspInstance,
    assignment: &Assignment,
) -> Result<Solution, DecodeError> {
    match construct_routes_pass(instance, assignment, false) {
        Ok(solution) => Ok(solution),
        Err(_) => construct_routes_pass(instance, assignment, true),
    }
}

fn construct_routes_pass(
    instance: &CcspInstance,
    assignment: &Assignment,
    reserve_unprocessed: bool,
) -> Result<Solution, DecodeError> {
    let capacity = instance.capacity();
    let n = instance.vertex_count();
    let mut visited_on: Vec<Option<usize>> = vec![None; n];
    let mut processed: Vec<bool> = vec![false; n];
    let mut vehicle_of: Vec<usize> = vec![usize::MAX; n];
    for (m, vehicle) in assignment.vehicles.iter().enumerate() {
        for &u in vehicle {
            vehicle_of[u] = m;
        }
    }
    let mut stops_per_route: Vec<Vec<VertexId>> = Vec::new();
    let mut serviced_per_route: Vec<BTreeMap<VertexId, VertexId>> = Vec::new();
    let mut recorded_load: Vec<u32> = Vec::new();

    for vehicle in &assignment.vehicles {
        let m = stops_per_route.len();
        stops_per_route.push(Vec::new());
        serviced_per_route.push(BTreeMap::new());
        recorded_load.push(0);

        for &u in vehicle {
            let demand = instance.demand(u);
            // Cheapest candidate: reuse on this route costs zero, unvisited
            // vertices cost their insertion delta.
            let mut best: Option<(f64, VertexId, Option<usize>)> = None;
            for &w in instance.covered_by(u) {
                let candidate = match visited_on[w] {
                    Some(r) if r == m => Some((0.0, w, None)),
                    Some(_) => None,
                    None => {
                        let reserved = reserve_unprocessed
                            && w != u
                            && instance.is_demand(w)
                            && !processed[w]
                            && vehicle_of[w] != m;
                        if reserved {
                            None
                        } else {
                            let (g, pos) = insertion_cost_in(instance, w, &stops_per_route[m]);
                            Some((g, w, Some(pos)))
                        }
                    }
                };
                if let Some((g, w, pos)) = candidate {
                    let better = match best {
                        None => true,
                        Some((bg, bw, _)) => g < bg || (g == bg && w < bw),
                    };
                    if better {
                        best = Some((g, w, pos));
                    }
                }
            }

            processed[u] = true;
            if let Some((_, w, pos)) = best {
                if let Some(pos) = pos {
                    stops_per_route[m].insert(pos, w);
                    visited_on[w] = Some(m);
                }
                serviced_per_route[m].insert(u, w);
                recorded_load[m] += demand;
                continue;
            }

            // Fallback: every cover vertex is already visited on earlier
            // routes; re-home the demand where capacity remains.
            let mut target: Option<(u32, VertexId, usize)> = None;
            for &w in instance.covered_by(u) {
                let Some(r) = visited_on[w] else { continue };
                let load = recorded_load[r];
                if load + demand > capacity {
                    continue;
                }
                if target.map_or(true, |(best_load, _, _)| load > best_load) {
                    target = Some((load, w, r));
                }
            }
            let (_, w, r) = target.ok_or(DecodeError::NoServer { demand: u })?;
            serviced_per_route[r].insert(u, w);
            recorded_load[r] += demand;
        }
    }

    let routes: Vec<Route> = stops_per_route
        .into_iter()
        .zip(serviced_per_route)
        .filter(|(stops, _)| !stops.is_empty())
        .map(|(stops, serviced)| Route::new(stops, serviced))
        .collect();
    Ok(Solution::from_routes(instance, routes))
}

/// Greedy redundancy removal: repeatedly drop the visited vertex with the
/// largest detour saving whose serviced demands can all move to other
/// visited cover vertices with residual capacity (receivers picked best-fit
/// style: max-load route first, ties by lower vertex id). Stops once the
/// redundancy set is maximal; the cost never increases.
pub fn remove_redundant(instance: &CcspInstance, solution: &Solution) -> Solution {
    let mut routes = solution.routes.clone();
    loop {
        let loads: Vec<u32> = routes.iter().map(|r| r.load(instance)).collect();
        let mut best: Option<(f64, usize, usize, Vec<(VertexId, VertexId, usize)>)> = None;

        for (ri, route) in routes.iter().enumerate() {
            for (pi, &v) in route.stops.iter().enumerate() {
                let saving = removal_saving(instance, route, pi);
                if saving < 0.0 {
                    continue;
                }
                let Some(plan) = reassignment_plan(instance, &routes, &loads, ri, v) else {
                    continue;
                };
                let better = match &best {
                    None => true,
                    Some((best_saving, bri, bpi, _)) => {
                        let bv = routes[*bri].stops[*bpi];
                        saving > *best_saving || (saving == *best_saving && v < bv)
                    }
                };
                if better {
                    best = Some((saving, ri, pi, plan));
                }
            }
        }

        let Some((_, ri, pi, plan)) = best else { break };
        let v = routes[ri].stops.remove(pi);
        routes[ri].serviced.retain(|_, server| *server != v);
        for (u, w, target) in plan {
            routes[target].serviced.insert(u, w);
        }
        routes.retain(|r| !r.stops.is_empty());
    }
    Solution::from_routes(instance, routes)
}

/// Detour saved by removing the stop at `pi` from the route cycle.
fn removal_saving(instance: &CcspInstance, route: &Route, pi: usize) -> f64 {
    let depot = instance.depot();
    let v = route.stops[pi];
    let before = if pi == 0 { depot } else { route.stops[pi - 1] };
    let after = if pi + 1 == route.stops.len() {
        depot
    } else {
        route.stops[pi + 1]
    };
    instance.edge_cost(before, v) + instance.edge_cost(v, after)
        - instance.edge_cost(before, after)
}

/// Try to re-home every demand served by `v` (on route `ri`) onto other
/// visited cover vertices, best-fit style. Returns the per-demand moves, or
/// None when some demand has no feasible receiver.
fn reassignment_plan(
    instance: &CcspInstance,
    routes: &[Route],
    loads: &[u32],
    ri: usize,
    v: VertexId,
) -> Option<Vec<(VertexId, VertexId, usize)>> {
    let capacity = instance.capacity();
    let moved: Vec<VertexId> = routes[ri]
        .serviced
        .iter()
        .filter(|&(_, &server)| server == v)
        .map(|(&u, _)| u)
        .collect();

    let mut sim_loads = loads.to_vec();
    let total_moved: u32 = moved.iter().map(|&u| instance.demand(u)).sum();
    sim_loads[ri] -= total_moved;

    let mut plan = Vec::with_capacity(moved.len());
    for &u in &moved {
        let demand = instance.demand(u);
        let mut chosen: Option<(u32, VertexId, usize)> = None;
        for &w in instance.covered_by(u) {
            if w == v {
                continue;
            }
            let Some(target) = routes.iter().position(|r| r.stops.contains(&w)) else {
                continue;
            };
            if sim_loads[target] + demand > capacity {
                continue;
            }
            if chosen.map_or(true, |(best_load, _, _)| sim_loads[target] > best_load) {
                chosen = Some((sim_loads[target], w, target));
            }
        }
        let (_, w, target) = chosen?;
        sim_loads[target] += demand;
        plan.push((u, w, target));
    }
    Some(plan)
}

/// The full decoder: key sort, best-fit assignment, route construction,
/// redundancy removal.
pub fn decode(instance: &CcspInstance, keys: &[f64]) -> Result<Solution, DecodeError> {
    let order = sort_keys(instance, keys)?;
    let assignment = best_fit(instance, &order);
    let constructed = construct_routes(instance, &assignment)?;
    Ok(remove_redundant(instance, &constructed))
}
