//! Route-pool matheuristic: exhaustive enumeration of optimal small routes,
//! elite-route harvesting from BRKGA generations, an exact set-covering /
//! set-packing solver over the pool, and the tiny-instance exact oracle.

use std::collections::{BTreeMap, HashMap, HashSet};
use std::fmt::Write as _;
use std::time::Instant;

use rayon::prelude::*;
use thiserror::Error;

use crate::model::{CcspInstance, Route, Solution, VertexId};

#[derive(Debug, Error)]
pub enum MatheuristicError {
    #[error("pool covers no route for demand vertices {0:?}")]
    UncoveredDemands(Vec<VertexId>),
    #[error("no feasible covering selection exists in the pool")]
    Infeasible,
    #[error("exact oracle limited to {max} non-depot vertices, instance has {vertices}")]
    SizeGuard { vertices: usize, max: usize },
    #[error("line {line}: {message}")]
    PoolParse { line: usize, message: String },
    #[error("invalid pool route: {0}")]
    InvalidRoute(String),
}

/// One feasible route of the pool: the visit cycle plus the demand set it
/// services.
#[derive(Debug, Clone, PartialEq)]
pub struct PooledRoute {
    /// Visited vertices in order, depot excluded.
    pub stops: Vec<VertexId>,
    pub cost: f64,
    /// Serviced demand vertices, ascending.
    pub covered: Vec<VertexId>,
    pub load: u32,
}

impl PooledRoute {
    pub fn new(instance: &CcspInstance, stops: Vec<VertexId>, covered: Vec<VertexId>) -> Self {
        let route = Route::new(stops, BTreeMap::new());
        let cost = route.cost(instance);
        let load = covered.iter().map(|&u| instance.demand(u)).sum();
        Self {
            stops: route.stops,
            cost,
            covered,
            load,
        }
    }

    /// Harvest a solution route: covered set = its serviced demands.
    pub fn from_route(instance: &CcspInstance, route: &Route) -> Self {
        let covered: Vec<VertexId> = route.serviced.keys().copied().collect();
        Self::new(instance, route.stops.clone(), covered)
    }

    /// Dedup key: the lexicographically smaller of the two traversal
    /// directions of the visit sequence.
    pub fn canonical_key(&self) -> Vec<VertexId> {
        let mut reversed = self.stops.clone();
        reversed.reverse();
        if reversed < self.stops {
            reversed
        } else {
            self.stops.clone()
        }
    }

    /// Check the route is a feasible single-route fragment: distinct
    /// non-depot stops, load within capacity, every covered demand
    /// serviceable by a visited cover vertex.
    pub fn check(&self, instance: &CcspInstance) -> Result<(), MatheuristicError> {
        let bad = |msg: String| Err(MatheuristicError::InvalidRoute(msg));
        if self.stops.is_empty() {
            return bad("empty visit sequence".into());
        }
        let mut seen = HashSet::new();
        for &v in &self.stops {
            if v >= instance.vertex_count() || v == instance.depot() {
                return bad(format!("invalid stop {v}"));
            }
            if !seen.insert(v) {
                return bad(format!("stop {v} repeated"));
            }
        }
        let load: u32 = self.covered.iter().map(|&u| instance.demand(u)).sum();
        if load != self.load {
            return bad(format!("stored load {} but demands sum to {load}", self.load));
        }
        if load > instance.capacity() {
            return bad(format!("load {load} exceeds capacity {}", instance.capacity()));
        }
        for &u in &self.covered {
            if !instance.is_demand(u) {
                return bad(format!("{u} is not a demand vertex"));
            }
            if !instance.covered_by(u).iter().any(|w| seen.contains(w)) {
                return bad(format!("no visited vertex covers demand {u}"));
            }
        }
        Ok(())
    }

    /// Materialize as a solution route: each covered demand serviced by its
    /// lowest-id visited cover vertex.
    pub fn to_route(&self, instance: &CcspInstance) -> Route {
        let visited: HashSet<VertexId> = self.stops.iter().copied().collect();
        let serviced: BTreeMap<VertexId, VertexId> = self
            .covered
            .iter()
            .map(|&u| {
                let server = instance
                    .covered_by(u)
                    .iter()
                    .copied()
                    .find(|w| visited.contains(w))
                    .expect("checked cover");
                (u, server)
            })
            .collect();
        Route::new(self.stops.clone(), serviced)
    }
}

/// Deduplicated feasible routes, capped at a size limit.
#[derive(Debug, Clone)]
pub struct RoutePool {
    routes: Vec<PooledRoute>,
    index: HashSet<Vec<VertexId>>,
    pub limit: usize,
}

/// The benchmark pool cap.
pub const DEFAULT_POOL_LIMIT: usize = 1_000_000;

impl Default for RoutePool {
    fn default() -> Self {
        Self::new(DEFAULT_POOL_LIMIT)
    }
}

impl RoutePool {
    pub fn new(limit: usize) -> Self {
        Self {
            routes: Vec::new(),
            index: HashSet::new(),
            limit,
        }
    }

    /// Append unless the visit sequence is already present or the pool is
    /// full. Returns whether the route went in.
    pub fn push(&mut self, route: PooledRoute) -> bool {
        if self.routes.len() >= self.limit {
            return false;
        }
        let key = route.canonical_key();
        if !self.index.insert(key) {
            return false;
        }
        self.routes.push(route);
        true
    }

    pub fn routes(&self) -> &[PooledRoute] {
        &self.routes
    }

    pub fn len(&self) -> usize {
        self.routes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.routes.is_empty()
    }

    /// Line-oriented text export: cost, visit sequence, covered set.
    pub fn export(&self) -> String {
        let mut out = String::new();
        for r in &self.routes {
            let stops: Vec<String> = r.stops.iter().map(|&v| (v + 1).to_string()).collect();
            let covered: Vec<String> = r.covered.iter().map(|&u| (u + 1).to_string()).collect();
            writeln!(
                out,
                "ROUTE {} VISITS {} COVERS {}",
                r.cost,
                stops.join(" "),
                covered.join(" ")
            )
            .unwrap();
        }
        out
    }

    pub fn import(
        text: &str,
        instance: &CcspInstance,
        limit: usize,
    ) -> Result<Self, MatheuristicError> {
        let mut pool = Self::new(limit);
        for (idx, raw) in text.lines().enumerate() {
            let line_no = idx + 1;
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let toks: Vec<&str> = line.split_whitespace().collect();
            let fail = |message: String| MatheuristicError::PoolParse {
                line: line_no,
                message,
            };
            if toks.first() != Some(&"ROUTE") {
                return Err(fail("expected `ROUTE <cost> VISITS ... COVERS ...`".into()));
            }
            let visits_at = toks
                .iter()
                .position(|&t| t == "VISITS")
                .ok_or_else(|| fail("missing VISITS".into()))?;
            let covers_at = toks
                .iter()
                .position(|&t| t == "COVERS")
                .ok_or_else(|| fail("missing COVERS".into()))?;
            let parse_ids = |toks: &[&str]| -> Result<Vec<VertexId>, MatheuristicError> {
                toks.iter()
                    .map(|t| {
                        t.parse::<usize>()
                            .map_err(|_| fail(format!("malformed id `{t}`")))
                            .and_then(|id| {
                                if id >= 1 && id <= instance.vertex_count() {
                                    Ok(id - 1)
                                } else {
                                    Err(fail(format!("id {id} out of range")))
                                }
                            })
                    })
                    .collect()
            };
            let stops = parse_ids(&toks[visits_at + 1..covers_at])?;
            let mut covered = parse_ids(&toks[covers_at + 1..])?;
            covered.sort_unstable();
            let route = PooledRoute::new(instance, stops, covered);
            route.check(instance)?;
            pool.push(route);
        }
        Ok(pool)
    }
}

/// Deduplicated elite routes per BRKGA generation. Each distinct route
/// remembers the latest generation it appeared in, so harvesting can hand
/// routes to the pool newest-generation-first without storing every copy.
#[derive(Debug, Clone, Default)]
pub struct EliteArchive {
    entries: HashMap<Vec<VertexId>, (PooledRoute, u32)>,
}

impl EliteArchive {
    pub fn new() -> Self {
        Self::default()
    }

    /// Record the routes of one elite solution of `generation`.
    pub fn record(&mut self, instance: &CcspInstance, generation: u32, solution: &Solution) {
        for route in &solution.routes {
            if route.stops.is_empty() {
                continue;
            }
            let pooled = PooledRoute::from_route(instance, route);
            let key = pooled.canonical_key();
            match self.entries.get_mut(&key) {
                Some((_, last)) => *last = (*last).max(generation),
                None => {
                    self.entries.insert(key, (pooled, generation));
                }
            }
        }
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

/// Append archived elite routes to the pool, newest generation first (ties
/// in deterministic key order), until the pool limit is reached or the
/// archive is exhausted.
pub fn harvest_elite_routes(archive: &EliteArchive, pool: &mut RoutePool) {
    let mut entries: Vec<(&Vec<VertexId>, &(PooledRoute, u32))> = archive.entries.iter().collect();
    entries.sort_by(|a, b| b.1 .1.cmp(&a.1 .1).then_with(|| a.0.cmp(b.0)));
    for (_, (route, _)) in entries {
        if pool.len() >= pool.limit {
            break;
        }
        pool.push(route.clone());
    }
}

/// Every optimal route servicing up to `max_serviced` demand vertices: for
/// each capacity-feasible subset S of V_d, the cheapest (assignment,
/// ordering) pair over all server choices. With `keep_all`, the cheapest
/// route of every distinct server set is kept instead of the per-subset
/// global minimum.
pub fn enumerate_small_routes(instance: &CcspInstance, max_serviced: usize) -> Vec<PooledRoute> {
    enumerate_small_routes_with(instance, max_serviced, false)
}

pub fn enumerate_small_routes_with(
    instance: &CcspInstance,
    max_serviced: usize,
    keep_all: bool,
) -> Vec<PooledRoute> {
    let demands = instance.demand_vertices();
    let mut subsets: Vec<Vec<VertexId>> = Vec::new();
    let mut stack: Vec<(usize, Vec<VertexId>, u32)> = vec![(0, Vec::new(), 0)];
    while let Some((from, chosen, load)) = stack.pop() {
        if !chosen.is_empty() {
            subsets.push(chosen.clone());
        }
        if chosen.len() == max_serviced {
            continue;
        }
        for (offset, &u) in demands[from..].iter().enumerate() {
            let next_load = load + instance.demand(u);
            if next_load > instance.capacity() {
                continue;
            }
            let mut next = chosen.clone();
            next.push(u);
            stack.push((from + offset + 1, next, next_load));
        }
    }
    subsets.sort();

    let mut routes: Vec<PooledRoute> = subsets
        .par_iter()
        .flat_map_iter(|subset| best_routes_for_subset(instance, subset, keep_all))
        .collect();
    routes.sort_by(|a, b| {
        a.covered
            .cmp(&b.covered)
            .then_with(|| a.cost.partial_cmp(&b.cost).unwrap())
            .then_with(|| a.stops.cmp(&b.stops))
    });
    routes
}

/// Cheapest route(s) servicing exactly `subset`: brute force over the
/// per-demand server assignments and every ordering of each server set.
fn best_routes_for_subset(
    instance: &CcspInstance,
    subset: &[VertexId],
    keep_all: bool,
) -> Vec<PooledRoute> {
    let mut seen_sets: HashSet<Vec<VertexId>> = HashSet::new();
    let mut per_set: Vec<(f64, Vec<VertexId>)> = Vec::new();

    let choices: Vec<&[VertexId]> = subset.iter().map(|&u| instance.covered_by(u)).collect();
    let mut pick = vec![0usize; subset.len()];
    loop {
        let mut servers: Vec<VertexId> = pick
            .iter()
            .zip(&choices)
            .map(|(&i, c)| c[i])
            .collect();
        servers.sort_unstable();
        servers.dedup();
        if seen_sets.insert(servers.clone()) {
            let (cost, order) = best_cycle(instance, &servers);
            per_set.push((cost, order));
        }

        // Advance the mixed-radix counter over server choices.
        let mut digit = 0;
        loop {
            if digit == pick.len() {
                let routes = if keep_all {
                    per_set
                } else {
                    let best = per_set
                        .into_iter()
                        .min_by(|a, b| {
                            a.0.partial_cmp(&b.0).unwrap().then_with(|| a.1.cmp(&b.1))
                        })
                        .expect("cover sets are never empty");
                    vec![best]
                };
                return routes
                    .into_iter()
                    .map(|(_, order)| PooledRoute::new(instance, order, subset.to_vec()))
                    .collect();
            }
            pick[digit] += 1;
            if pick[digit] < choices[digit].len() {
                break;
            }
            pick[digit] = 0;
            digit += 1;
        }
    }
}

/// Optimal depot cycle through the given vertex set, by exhaustive
/// permutation (server sets stay tiny). Ties resolve to the
/// lexicographically smallest order.
fn best_cycle(instance: &CcspInstance, vertices: &[VertexId]) -> (f64, Vec<VertexId>) {
    fn go(
        instance: &CcspInstance,
        items: &mut Vec<VertexId>,
        k: usize,
        best: &mut (f64, Vec<VertexId>),
    ) {
        if k == items.len() {
            let cost = Route::new(items.clone(), BTreeMap::new()).cost(instance);
            if cost < best.0 - 1e-12 || ((cost - best.0).abs() <= 1e-12 && *items < best.1) {
                *best = (cost, items.clone());
            }
            return;
        }
        for i in k..items.len() {
            items.swap(k, i);
            go(instance, items, k + 1, best);
            items.swap(k, i);
        }
    }
    let mut items = vertices.to_vec();
    items.sort_unstable();
    let mut best = (f64::INFINITY, Vec::new());
    go(instance, &mut items, 0, &mut best);
    best
}

/// Limits and warm start for the cover/packing search.
#[derive(Debug, Clone, Default)]
pub struct CoverPackingOptions {
    pub node_limit: Option<u64>,
    pub time_limit_seconds: Option<f64>,
    /// Route indices of a known feasible selection, used as the starting
    /// incumbent.
    pub initial_selection: Option<Vec<usize>>,
}

#[derive(Debug, Clone)]
pub struct CoverPackingResult {
    /// Indices of the selected routes.
    pub selected: Vec<usize>,
    pub solution: Solution,
    pub cost: f64,
    pub lower_bound: f64,
    pub proven_optimal: bool,
    pub nodes: u64,
}

/// Select a minimum-cost set of pool routes servicing every demand vertex at
/// least once while visiting every vertex at most once, by depth-first
/// branch and bound. Exact when it runs to completion; limits return the
/// incumbent with a valid lower bound. Over-covered demands are assigned to
/// the lowest-index selecting route in the final solution.
pub fn solve_cover_packing(
    instance: &CcspInstance,
    routes: &[PooledRoute],
    options: &CoverPackingOptions,
) -> Result<CoverPackingResult, MatheuristicError> {
    let demands = instance.demand_vertices();
    let demand_index: HashMap<VertexId, usize> =
        demands.iter().enumerate().map(|(i, &u)| (u, i)).collect();

    // covering[i]: routes servicing demand i, cheapest first.
    let mut covering: Vec<Vec<usize>> = vec![Vec::new(); demands.len()];
    for (f, route) in routes.iter().enumerate() {
        for &u in &route.covered {
            covering[demand_index[&u]].push(f);
        }
    }
    let uncovered: Vec<VertexId> = demands
        .iter()
        .zip(&covering)
        .filter(|(_, c)| c.is_empty())
        .map(|(&u, _)| u)
        .collect();
    if !uncovered.is_empty() {
        return Err(MatheuristicError::UncoveredDemands(uncovered));
    }
    for list in &mut covering {
        list.sort_by(|&a, &b| {
            routes[a]
                .cost
                .partial_cmp(&routes[b].cost)
                .unwrap()
                .then(a.cmp(&b))
        });
    }
    // Cost shares for the fractional covering bound.
    let share: Vec<f64> = routes
        .iter()
        .map(|r| r.cost / r.covered.len().max(1) as f64)
        .collect();

    let mut search = Search {
        instance,
        routes,
        covering: &covering,
        share: &share,
        demand_index: &demand_index,
        blocked: vec![false; instance.vertex_count()],
        cover_count: vec![0u32; demands.len()],
        chosen: Vec::new(),
        incumbent: None,
        nodes: 0,
        open_bound: f64::INFINITY,
        aborted: false,
        node_limit: options.node_limit,
        deadline: options
            .time_limit_seconds
            .map(|s| (Instant::now(), s)),
    };

    if let Some(initial) = &options.initial_selection {
        if let Some(cost) = selection_cost_if_feasible(instance, routes, initial) {
            search.incumbent = Some((cost, initial.clone()));
        }
    }

    search.dfs(0.0);

    let (cost, mut selected) = search.incumbent.ok_or(MatheuristicError::Infeasible)?;
    selected.sort_unstable();
    let solution = selection_to_solution(instance, routes, &selected);
    let lower_bound = if search.aborted {
        search.open_bound.min(cost)
    } else {
        cost
    };
    Ok(CoverPackingResult {
        selected,
        cost,
        solution,
        lower_bound,
        proven_optimal: !search.aborted,
        nodes: search.nodes,
    })
}

struct Search<'a> {
    instance: &'a CcspInstance,
    routes: &'a [PooledRoute],
    covering: &'a [Vec<usize>],
    share: &'a [f64],
    demand_index: &'a HashMap<VertexId, usize>,
    blocked: Vec<bool>,
    cover_count: Vec<u32>,
    chosen: Vec<usize>,
    incumbent: Option<(f64, Vec<usize>)>,
    nodes: u64,
    open_bound: f64,
    aborted: bool,
    node_limit: Option<u64>,
    deadline: Option<(Instant, f64)>,
}

impl Search<'_> {
    fn available(&self, f: usize) -> bool {
        self.routes[f].stops.iter().all(|&v| !self.blocked[v])
    }

    fn dfs(&mut self, cost_so_far: f64) {
        self.nodes += 1;
        let over_limit = self.node_limit.is_some_and(|max| self.nodes > max)
            || self
                .deadline
                .is_some_and(|(start, secs)| start.elapsed().as_secs_f64() > secs);
        if over_limit {
            self.aborted = true;
            self.open_bound = self.open_bound.min(cost_so_far);
            return;
        }

        // Fractional-share lower bound over uncovered demands; fail-first
        // branching on the demand with the fewest available routes.
        let mut bound_extra = 0.0;
        let mut branch: Option<(usize, usize)> = None; // (available count, demand)
        for (i, count) in self.cover_count.iter().enumerate() {
            if *count > 0 {
                continue;
            }
            let mut min_share = f64::INFINITY;
            let mut available = 0usize;
            for &f in &self.covering[i] {
                if self.available(f) {
                    available += 1;
                    min_share = min_share.min(self.share[f]);
                }
            }
            if available == 0 {
                return; // demand lost, prune
            }
            bound_extra += min_share;
            if branch.map_or(true, |(best, _)| available < best) {
                branch = Some((available, i));
            }
        }

        let bound = cost_so_far + bound_extra;
        if let Some((best_cost, _)) = &self.incumbent {
            if bound >= *best_cost - 1e-9 {
                return;
            }
        }

        let Some((_, demand)) = branch else {
            // Everything covered: new incumbent.
            let better = self
                .incumbent
                .as_ref()
                .map_or(true, |(c, _)| cost_so_far < c - 1e-9);
            if better {
                self.incumbent = Some((cost_so_far, self.chosen.clone()));
            }
            return;
        };

        let candidates: Vec<usize> = self.covering[demand]
            .iter()
            .copied()
            .filter(|&f| self.available(f))
            .collect();
        for f in candidates {
            self.select(f);
            self.dfs(cost_so_far + self.routes[f].cost);
            self.unselect(f);
        }
    }

    fn select(&mut self, f: usize) {
        for &v in &self.routes[f].stops {
            self.blocked[v] = true;
        }
        for &u in &self.routes[f].covered {
            self.cover_count[self.demand_index[&u]] += 1;
        }
        self.chosen.push(f);
    }

    fn unselect(&mut self, f: usize) {
        self.chosen.pop();
        for &v in &self.routes[f].stops {
            self.blocked[v] = false;
        }
        for &u in &self.routes[f].covered {
            self.cover_count[self.demand_index[&u]] -= 1;
        }
    }
}

/// Cost of a selection when it is feasible (all demands covered, visits
/// disjoint), None otherwise.
fn selection_cost_if_feasible(
    instance: &CcspInstance,
    routes: &[PooledRoute],
    selected: &[usize],
) -> Option<f64> {
    let mut visited = HashSet::new();
    let mut covered = HashSet::new();
    let mut cost = 0.0;
    for &f in selected {
        let route = routes.get(f)?;
        for &v in &route.stops {
            if !visited.insert(v) {
                return None;
            }
        }
        covered.extend(route.covered.iter().copied());
        cost += route.cost;
    }
    instance
        .demand_vertices()
        .iter()
        .all(|u| covered.contains(u))
        .then_some(cost)
}

/// Turn a feasible selection into a solution: each demand is assigned to the
/// lowest-index selecting route, serviced by its lowest-id visited cover
/// vertex there.
fn selection_to_solution(
    instance: &CcspInstance,
    routes: &[PooledRoute],
    selected: &[usize],
) -> Solution {
    let mut assigned: HashSet<VertexId> = HashSet::new();
    let mut built: Vec<Route> = Vec::with_capacity(selected.len());
    for &f in selected {
        let pooled = &routes[f];
        let visited: HashSet<VertexId> = pooled.stops.iter().copied().collect();
        let mut serviced = BTreeMap::new();
        for &u in &pooled.covered {
            if assigned.contains(&u) {
                continue;
            }
            let server = instance
                .covered_by(u)
                .iter()
                .copied()
                .find(|w| visited.contains(w))
                .expect("pool route covers its demands");
            serviced.insert(u, server);
            assigned.insert(u);
        }
        built.push(Route::new(pooled.stops.clone(), serviced));
    }
    Solution::from_routes(instance, built)
}

/// Exact CCSP oracle for tiny instances: enumerate the optimal cycle of
/// every vertex subset (Held-Karp), attach every maximal capacity-feasible
/// demand set each cycle can service, and solve the cover/packing model over
/// that complete pool.
pub fn exact_ccsp(instance: &CcspInstance) -> Result<Solution, MatheuristicError> {
    const MAX_TRANSIT: usize = 10;
    let transit: Vec<VertexId> = instance.transit_vertices().collect();
    let m = transit.len();
    if m > MAX_TRANSIT {
        return Err(MatheuristicError::SizeGuard {
            vertices: m,
            max: MAX_TRANSIT,
        });
    }
    if instance.demand_vertices().is_empty() {
        return Ok(Solution::empty());
    }

    let routes = enumerate_all_routes(instance, &transit);
    let result = solve_cover_packing(instance, &routes, &CoverPackingOptions::default())?;
    debug_assert!(result.proven_optimal);
    Ok(result.solution)
}

/// All (visit set, maximal feasible covered set) routes with optimal cycle
/// costs, via one Held-Karp sweep over the transit vertices.
fn enumerate_all_routes(instance: &CcspInstance, transit: &[VertexId]) -> Vec<PooledRoute> {
    let m = transit.len();
    let depot = instance.depot();
    let full = 1usize << m;
    // dp[mask][last]: cheapest depot-anchored path through mask ending at last.
    let mut dp = vec![vec![f64::INFINITY; m]; full];
    let mut parent = vec![vec![usize::MAX; m]; full];
    for i in 0..m {
        dp[1 << i][i] = instance.edge_cost(depot, transit[i]);
    }
    for mask in 1..full {
        for last in 0..m {
            if mask & (1 << last) == 0 || dp[mask][last].is_infinite() {
                continue;
            }
            for next in 0..m {
                if mask & (1 << next) != 0 {
                    continue;
                }
                let cand = dp[mask][last] + instance.edge_cost(transit[last], transit[next]);
                let target = &mut dp[mask | (1 << next)][next];
                if cand < *target {
                    *target = cand;
                    parent[mask | (1 << next)][next] = last;
                }
            }
        }
    }

    let demands = instance.demand_vertices();
    let mut routes = Vec::new();
    for mask in 1..full {
        // Optimal cycle for this visit set.
        let mut best_last = usize::MAX;
        let mut best_cost = f64::INFINITY;
        for last in 0..m {
            if mask & (1 << last) == 0 {
                continue;
            }
            let cost = dp[mask][last] + instance.edge_cost(transit[last], depot);
            if cost < best_cost {
                best_cost = cost;
                best_last = last;
            }
        }
        let mut order = Vec::new();
        let mut cur_mask = mask;
        let mut cur = best_last;
        while cur != usize::MAX {
            order.push(transit[cur]);
            let prev = parent[cur_mask][cur];
            cur_mask &= !(1 << cur);
            cur = prev;
        }
        order.reverse();

        // Demands this visit set can reach.
        let reachable: Vec<VertexId> = demands
            .iter()
            .copied()
            .filter(|&u| {
                instance
                    .covered_by(u)
                    .iter()
                    .any(|&w| transit.iter().position(|&t| t == w).is_some_and(|i| mask & (1 << i) != 0))
            })
            .collect();
        if reachable.is_empty() {
            continue;
        }
        for covered in maximal_feasible_subsets(instance, &reachable) {
            routes.push(PooledRoute::new(instance, order.clone(), covered));
        }
    }
    routes
}

/// All maximal subsets of `reachable` whose demand fits the capacity.
fn maximal_feasible_subsets(instance: &CcspInstance, reachable: &[VertexId]) -> Vec<Vec<VertexId>> {
    let k = reachable.len();
    let total: u32 = reachable.iter().map(|&u| instance.demand(u)).sum();
    if total <= instance.capacity() {
        return vec![reachable.to_vec()];
    }
    let loads: Vec<u32> = reachable.iter().map(|&u| instance.demand(u)).collect();
    let mut maximal = Vec::new();
    for mask in 1usize..(1 << k) {
        let load: u32 = (0..k).filter(|i| mask & (1 << i) != 0).map(|i| loads[i]).sum();
        if load > instance.capacity() {
            continue;
        }
        let is_maximal = (0..k)
            .filter(|i| mask & (1 << i) == 0)
            .all(|i| load + loads[i] > instance.capacity());
        if is_maximal {
            maximal.push(
                (0..k)
                    .filter(|i| mask & (1 << i) != 0)
                    .map(|i| reachable[i])
                    .collect(),
            );
        }
    }
    maximal
}
