//! Canonical data model: instances, routes, solutions, cost evaluation and the
//! independent feasibility checker used by every other module and by tests.

use std::collections::{BTreeMap, HashSet};
use std::fmt;

use thiserror::Error;

/// Internal vertex identifier. 0-based; file formats keep their native
/// 1-based ids with translation at the I/O boundary.
pub type VertexId = usize;

/// Absolute tolerance for cost comparisons (exact-euclidean mode).
/// Rounded-euclidean costs are integer-valued and compare exactly.
pub const COST_EPS: f64 = 1e-6;

#[derive(Debug, Error)]
pub enum ModelError {
    #[error("unknown vertex id {0}")]
    UnknownVertex(VertexId),
    #[error("instance `{name}`: {reason}")]
    InvalidInstance { name: String, reason: String },
    #[error("vertex {vertex} has demand {demand} exceeding capacity {capacity}")]
    DemandExceedsCapacity {
        vertex: VertexId,
        demand: u32,
        capacity: u32,
    },
}

/// How edge costs are derived from coordinates.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EdgeMetric {
    /// Nearest-integer Euclidean distance (TSPLIB EUC_2D convention).
    RoundedEuclidean,
    /// Real-valued Euclidean distance.
    ExactEuclidean,
}

/// A Capacitated Covering Salesman Problem instance.
///
/// Immutable after construction and safe to share across concurrent workers.
#[derive(Debug, Clone, PartialEq)]
pub struct CcspInstance {
    name: String,
    comment: String,
    coords: Vec<(f64, f64)>,
    depot: VertexId,
    demands: Vec<u32>,
    capacity: u32,
    covers: Vec<Vec<VertexId>>,
    covered_by: Vec<Vec<VertexId>>,
    metric: EdgeMetric,
    demand_vertices: Vec<VertexId>,
}

impl CcspInstance {
    /// Build and check an instance. `covers[v]` is the ordered set D(v) of
    /// vertices covered by v; it must be empty for the depot, contain v for
    /// every other vertex, and intersect the demand set (instances are
    /// expected to be pre-processed). The dual map C(u) is derived here.
    pub fn new(
        name: impl Into<String>,
        comment: impl Into<String>,
        coords: Vec<(f64, f64)>,
        depot: VertexId,
        demands: Vec<u32>,
        capacity: u32,
        covers: Vec<Vec<VertexId>>,
        metric: EdgeMetric,
    ) -> Result<Self, ModelError> {
        let name = name.into();
        let n = coords.len();
        let invalid = |reason: String| ModelError::InvalidInstance {
            name: name.clone(),
            reason,
        };
        if n == 0 {
            return Err(invalid("no vertices".into()));
        }
        if depot >= n {
            return Err(ModelError::UnknownVertex(depot));
        }
        if demands.len() != n {
            return Err(invalid(format!(
                "{} demand records for {} vertices",
                demands.len(),
                n
            )));
        }
        if covers.len() != n {
            return Err(invalid(format!(
                "{} cover sets for {} vertices",
                covers.len(),
                n
            )));
        }
        if capacity == 0 {
            return Err(invalid("capacity must be positive".into()));
        }
        if demands[depot] != 0 {
            return Err(invalid("depot must have zero demand".into()));
        }
        for (v, &d) in demands.iter().enumerate() {
            if d > capacity {
                return Err(ModelError::DemandExceedsCapacity {
                    vertex: v,
                    demand: d,
                    capacity,
                });
            }
        }
        let demand_vertices: Vec<VertexId> =
            (0..n).filter(|&v| demands[v] > 0).collect();
        let is_demand: Vec<bool> = (0..n).map(|v| demands[v] > 0).collect();

        if !covers[depot].is_empty() {
            return Err(invalid("depot must not have a cover set".into()));
        }
        for v in 0..n {
            if v == depot {
                continue;
            }
            let dv = &covers[v];
            let mut seen = HashSet::new();
            for &w in dv {
                if w >= n {
                    return Err(ModelError::UnknownVertex(w));
                }
                if w == depot {
                    return Err(invalid(format!("D({v}) contains the depot")));
                }
                if !seen.insert(w) {
                    return Err(invalid(format!("D({v}) lists {w} twice")));
                }
            }
            if !seen.contains(&v) {
                return Err(invalid(format!("D({v}) does not contain {v}")));
            }
            if !dv.iter().any(|&w| is_demand[w]) {
                return Err(invalid(format!(
                    "D({v}) covers no demand vertex (instance not pre-processed)"
                )));
            }
        }

        // Derive C(u) = { v : u in D(v) }, ordered by vertex id.
        let mut covered_by = vec![Vec::new(); n];
        for v in 0..n {
            for &u in &covers[v] {
                if is_demand[u] {
                    covered_by[u].push(v);
                }
            }
        }
        for row in &mut covered_by {
            row.sort_unstable();
        }

        Ok(Self {
            name,
            comment: comment.into(),
            coords,
            depot,
            demands,
            capacity,
            covers,
            covered_by,
            metric,
            demand_vertices,
        })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn comment(&self) -> &str {
        &self.comment
    }

    /// Total number of vertices, depot included.
    pub fn vertex_count(&self) -> usize {
        self.coords.len()
    }

    pub fn depot(&self) -> VertexId {
        self.depot
    }

    pub fn capacity(&self) -> u32 {
        self.capacity
    }

    pub fn metric(&self) -> EdgeMetric {
        self.metric
    }

    pub fn coords(&self, v: VertexId) -> (f64, f64) {
        self.coords[v]
    }

    pub fn demand(&self, v: VertexId) -> u32 {
        self.demands[v]
    }

    pub fn is_demand(&self, v: VertexId) -> bool {
        self.demands[v] > 0
    }

    /// V_d: vertices with positive demand, ascending id.
    pub fn demand_vertices(&self) -> &[VertexId] {
        &self.demand_vertices
    }

    /// V_0: every vertex except the depot, ascending id.
    pub fn transit_vertices(&self) -> impl Iterator<Item = VertexId> + '_ {
        (0..self.vertex_count()).filter(move |&v| v != self.depot)
    }

    /// D(v): the vertices covered by v (empty for the depot).
    pub fn covers(&self, v: VertexId) -> &[VertexId] {
        &self.covers[v]
    }

    /// C(u): the vertices covering u, ascending id (empty unless u has demand).
    pub fn covered_by(&self, u: VertexId) -> &[VertexId] {
        &self.covered_by[u]
    }

    /// Cost of edge (u, v) under the instance metric. Symmetric;
    /// `edge_cost(v, v)` is 0. Panics on an unknown vertex id; use
    /// [`CcspInstance::try_edge_cost`] at trust boundaries.
    pub fn edge_cost(&self, u: VertexId, v: VertexId) -> f64 {
        let (ux, uy) = self.coords[u];
        let (vx, vy) = self.coords[v];
        euclidean(self.metric, ux, uy, vx, vy)
    }

    pub fn try_edge_cost(&self, u: VertexId, v: VertexId) -> Result<f64, ModelError> {
        let n = self.vertex_count();
        if u >= n {
            return Err(ModelError::UnknownVertex(u));
        }
        if v >= n {
            return Err(ModelError::UnknownVertex(v));
        }
        Ok(self.edge_cost(u, v))
    }
}

pub(crate) fn euclidean(metric: EdgeMetric, ux: f64, uy: f64, vx: f64, vy: f64) -> f64 {
    let d = ((ux - vx).powi(2) + (uy - vy).powi(2)).sqrt();
    match metric {
        EdgeMetric::ExactEuclidean => d,
        EdgeMetric::RoundedEuclidean => (d + 0.5).floor(),
    }
}

/// One vehicle route: the visited non-depot vertices in visit order plus the
/// demand-to-server assignment it carries. The cycle implicitly starts and
/// ends at the depot.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Route {
    /// Visited vertices in order, excluding the depot.
    pub stops: Vec<VertexId>,
    /// serviced[u] = v means demand u is serviced through vertex v of this route.
    pub serviced: BTreeMap<VertexId, VertexId>,
}

impl Route {
    pub fn new(stops: Vec<VertexId>, serviced: BTreeMap<VertexId, VertexId>) -> Self {
        Self { stops, serviced }
    }

    pub fn is_empty(&self) -> bool {
        self.stops.is_empty()
    }

    /// Total demand serviced by this route.
    pub fn load(&self, instance: &CcspInstance) -> u32 {
        self.serviced.keys().map(|&u| instance.demand(u)).sum()
    }

    /// Sum of consecutive edge costs along the depot-to-depot cycle.
    pub fn cost(&self, instance: &CcspInstance) -> f64 {
        if self.stops.is_empty() {
            return 0.0;
        }
        let depot = instance.depot();
        let mut total = instance.edge_cost(depot, self.stops[0]);
        for pair in self.stops.windows(2) {
            total += instance.edge_cost(pair[0], pair[1]);
        }
        total + instance.edge_cost(*self.stops.last().unwrap(), depot)
    }

    /// Consecutive vertex pairs of the cycle, depot endpoints included.
    pub fn cycle_edges<'a>(
        &'a self,
        instance: &CcspInstance,
    ) -> impl Iterator<Item = (VertexId, VertexId)> + 'a {
        let depot = instance.depot();
        let first = self.stops.first().map(|&s| (depot, s));
        let last = self.stops.last().map(|&s| (s, depot));
        first
            .into_iter()
            .chain(self.stops.windows(2).map(|w| (w[0], w[1])))
            .chain(last)
    }
}

/// A full CCSP solution: a set of routes and their total traversal cost.
/// The fleet size K is an output (`routes.len()`), never an input bound.
#[derive(Debug, Clone, PartialEq)]
pub struct Solution {
    pub routes: Vec<Route>,
    pub cost: f64,
}

impl Solution {
    /// Assemble a solution, computing the cost from the instance metric.
    pub fn from_routes(instance: &CcspInstance, routes: Vec<Route>) -> Self {
        let cost = routes.iter().map(|r| r.cost(instance)).sum();
        Self { routes, cost }
    }

    pub fn empty() -> Self {
        Self {
            routes: Vec::new(),
            cost: 0.0,
        }
    }

    /// K: the number of routes.
    pub fn fleet_size(&self) -> usize {
        self.routes.len()
    }

    /// The route index and servicing vertex for demand u, if any.
    pub fn serviced_by(&self, u: VertexId) -> Option<(usize, VertexId)> {
        self.routes
            .iter()
            .enumerate()
            .find_map(|(i, r)| r.serviced.get(&u).map(|&v| (i, v)))
    }
}

/// One feasibility violation found by [`validate`].
#[derive(Debug, Clone, PartialEq)]
pub enum Violation {
    /// A non-depot vertex appears more than once across the solution,
    /// or the depot appears among a route's stops.
    DuplicateVisit { vertex: VertexId, detail: String },
    /// A demand vertex is serviced by no route, or by more than one.
    CoverageViolation { vertex: VertexId, detail: String },
    /// A route's serviced demand exceeds the vehicle capacity.
    CapacityViolation { route: usize, load: u32, capacity: u32 },
    /// A route's vertex sequence does not induce a simple cycle through the depot.
    NotACycle { route: usize, detail: String },
    /// serviced(u) = v with v outside C(u) or v not visited by the route.
    ServiceOutsideCoverSet {
        demand: VertexId,
        server: VertexId,
        detail: String,
    },
    /// The stated solution cost differs from the recomputed edge-cost sum.
    CostMismatch { stated: f64, computed: f64 },
    /// More routes than the optional fleet bound allows.
    FleetExceeded { used: usize, max: usize },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::DuplicateVisit { vertex, detail } => {
                write!(f, "DuplicateVisit: vertex {vertex}: {detail}")
            }
            Violation::CoverageViolation { vertex, detail } => {
                write!(f, "CoverageViolation: demand {vertex}: {detail}")
            }
            Violation::CapacityViolation {
                route,
                load,
                capacity,
            } => write!(
                f,
                "CapacityViolation: route {route} load {load} exceeds capacity {capacity}"
            ),
            Violation::NotACycle { route, detail } => {
                write!(f, "NotACycle: route {route}: {detail}")
            }
            Violation::ServiceOutsideCoverSet {
                demand,
                server,
                detail,
            } => write!(
                f,
                "ServiceOutsideCoverSet: demand {demand} served by {server}: {detail}"
            ),
            Violation::CostMismatch { stated, computed } => {
                write!(f, "CostMismatch: stated {stated} but edges sum to {computed}")
            }
            Violation::FleetExceeded { used, max } => {
                write!(f, "FleetExceeded: {used} routes but at most {max} allowed")
            }
        }
    }
}

/// Optional extra checks for [`validate_with`].
#[derive(Debug, Clone, Copy, Default)]
pub struct ValidationLimits {
    /// When set, flag solutions using more than this many routes.
    /// Never enforced by default: the fleet size is a free output.
    pub max_fleet: Option<usize>,
}

/// Check every solution and route invariant independently of how the solution
/// was produced. An empty report means the solution is feasible. Depot-only
/// routes are tolerated as degenerate (they cost nothing and service nothing).
pub fn validate(instance: &CcspInstance, solution: &Solution) -> Vec<Violation> {
    validate_with(instance, solution, ValidationLimits::default())
}

pub fn validate_with(
    instance: &CcspInstance,
    solution: &Solution,
    limits: ValidationLimits,
) -> Vec<Violation> {
    let mut violations = Vec::new();
    let depot = instance.depot();
    let n = instance.vertex_count();

    // Visits: at most once globally, never the depot, always known ids.
    let mut visited_in: BTreeMap<VertexId, usize> = BTreeMap::new();
    for (ri, route) in solution.routes.iter().enumerate() {
        let mut local = HashSet::new();
        for &v in &route.stops {
            if v >= n {
                violations.push(Violation::NotACycle {
                    route: ri,
                    detail: format!("unknown vertex {v}"),
                });
                continue;
            }
            if v == depot {
                violations.push(Violation::NotACycle {
                    route: ri,
                    detail: "depot listed among stops".into(),
                });
                continue;
            }
            if !local.insert(v) {
                violations.push(Violation::DuplicateVisit {
                    vertex: v,
                    detail: format!("visited twice by route {ri}"),
                });
                continue;
            }
            if let Some(&other) = visited_in.get(&v) {
                violations.push(Violation::DuplicateVisit {
                    vertex: v,
                    detail: format!("visited by routes {other} and {ri}"),
                });
            } else {
                visited_in.insert(v, ri);
            }
        }
    }

    // Service assignment: exactly one route per demand, server in C(u),
    // server on the servicing route, loads within capacity.
    let mut served_by: BTreeMap<VertexId, Vec<usize>> = BTreeMap::new();
    for (ri, route) in solution.routes.iter().enumerate() {
        let mut load: u32 = 0;
        for (&u, &v) in &route.serviced {
            served_by.entry(u).or_default().push(ri);
            if u >= n || !instance.is_demand(u) {
                violations.push(Violation::CoverageViolation {
                    vertex: u,
                    detail: format!("route {ri} claims to serve a non-demand vertex"),
                });
                continue;
            }
            load += instance.demand(u);
            if v >= n || !instance.covered_by(u).contains(&v) {
                violations.push(Violation::ServiceOutsideCoverSet {
                    demand: u,
                    server: v,
                    detail: format!("{v} is not in C({u})"),
                });
            } else if !route.stops.contains(&v) {
                violations.push(Violation::ServiceOutsideCoverSet {
                    demand: u,
                    server: v,
                    detail: format!("route {ri} does not visit {v}"),
                });
            }
        }
        if load > instance.capacity() {
            violations.push(Violation::CapacityViolation {
                route: ri,
                load,
                capacity: instance.capacity(),
            });
        }
    }
    for &u in instance.demand_vertices() {
        match served_by.get(&u).map(Vec::as_slice) {
            None | Some([]) => violations.push(Violation::CoverageViolation {
                vertex: u,
                detail: "serviced by no route".into(),
            }),
            Some([_]) => {}
            Some(routes) => violations.push(Violation::CoverageViolation {
                vertex: u,
                detail: format!("serviced by {} routes", routes.len()),
            }),
        }
    }

    // Stated cost versus recomputed edge-cost sum.
    let computed: f64 = solution.routes.iter().map(|r| r.cost(instance)).sum();
    if (computed - solution.cost).abs() > COST_EPS {
        violations.push(Violation::CostMismatch {
            stated: solution.cost,
            computed,
        });
    }

    if let Some(max) = limits.max_fleet {
        let used = solution.routes.len();
        if used > max {
            violations.push(Violation::FleetExceeded { used, max });
        }
    }

    violations
}

/// A Multi-Depot Covering Tour VRP instance. Customers occupy node ids
/// `0..customer_count()`, depots follow at `customer_count()..node_count()`.
#[derive(Debug, Clone, PartialEq)]
pub struct MdctvrpInstance {
    name: String,
    customers: Vec<(f64, f64)>,
    depots: Vec<(f64, f64)>,
    demands: Vec<u32>,
    capacity: u32,
    depot_capacity: u32,
    fleet: Vec<u32>,
    allocation: BTreeMap<(VertexId, VertexId), f64>,
    covered_by: Vec<Vec<VertexId>>,
    metric: EdgeMetric,
}

impl MdctvrpInstance {
    /// Build and check an instance. `allocation[(i, j)]` is the cost c'_ij of
    /// servicing customer i through customer j; the coverage sets are derived
    /// as C(i) = {i} ∪ {j : (i, j) allocated}, with self-service free.
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        name: impl Into<String>,
        customers: Vec<(f64, f64)>,
        depots: Vec<(f64, f64)>,
        demands: Vec<u32>,
        capacity: u32,
        depot_capacity: u32,
        fleet: Vec<u32>,
        allocation: BTreeMap<(VertexId, VertexId), f64>,
        metric: EdgeMetric,
    ) -> Result<Self, ModelError> {
        let name = name.into();
        let invalid = |reason: String| ModelError::InvalidInstance {
            name: name.clone(),
            reason,
        };
        let nc = customers.len();
        if nc == 0 || depots.is_empty() {
            return Err(invalid("need at least one customer and one depot".into()));
        }
        if demands.len() != nc {
            return Err(invalid("one demand per customer required".into()));
        }
        if fleet.len() != depots.len() {
            return Err(invalid("one fleet size per depot required".into()));
        }
        if capacity == 0 {
            return Err(invalid("vehicle capacity must be positive".into()));
        }
        if fleet.iter().any(|&p| p == 0) {
            return Err(invalid("fleet sizes must be positive".into()));
        }
        for (i, &d) in demands.iter().enumerate() {
            if d == 0 {
                return Err(invalid(format!("customer {i} has zero demand")));
            }
            if d > capacity {
                return Err(ModelError::DemandExceedsCapacity {
                    vertex: i,
                    demand: d,
                    capacity,
                });
            }
        }
        let mut covered_by = vec![Vec::new(); nc];
        for (&(i, j), &cost) in &allocation {
            if i >= nc || j >= nc {
                return Err(ModelError::UnknownVertex(i.max(j)));
            }
            if i == j {
                return Err(invalid(format!("allocation ({i},{i}) is implicit")));
            }
            if cost <= 0.0 {
                return Err(invalid(format!("allocation cost ({i},{j}) must be positive")));
            }
            covered_by[i].push(j);
        }
        for (i, row) in covered_by.iter_mut().enumerate() {
            row.push(i);
            row.sort_unstable();
        }
        Ok(Self {
            name,
            customers,
            depots,
            demands,
            capacity,
            depot_capacity,
            fleet,
            allocation,
            covered_by,
            metric,
        })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn customer_count(&self) -> usize {
        self.customers.len()
    }

    pub fn depot_count(&self) -> usize {
        self.depots.len()
    }

    pub fn node_count(&self) -> usize {
        self.customers.len() + self.depots.len()
    }

    pub fn is_depot(&self, node: VertexId) -> bool {
        node >= self.customers.len()
    }

    /// Node ids of the depots.
    pub fn depot_nodes(&self) -> impl Iterator<Item = VertexId> + '_ {
        self.customers.len()..self.node_count()
    }

    pub fn coords(&self, node: VertexId) -> (f64, f64) {
        if node < self.customers.len() {
            self.customers[node]
        } else {
            self.depots[node - self.customers.len()]
        }
    }

    pub fn demand(&self, customer: VertexId) -> u32 {
        self.demands[customer]
    }

    pub fn capacity(&self) -> u32 {
        self.capacity
    }

    pub fn depot_capacity(&self) -> u32 {
        self.depot_capacity
    }

    /// p_k for depot node `depot`.
    pub fn fleet_size(&self, depot: VertexId) -> u32 {
        self.fleet[depot - self.customers.len()]
    }

    pub fn metric(&self) -> EdgeMetric {
        self.metric
    }

    /// C(i) for customer i, ascending id (always contains i).
    pub fn covered_by(&self, customer: VertexId) -> &[VertexId] {
        &self.covered_by[customer]
    }

    /// c'_ij; self-service is free, anything else must be allocated.
    pub fn allocation_cost(&self, i: VertexId, j: VertexId) -> f64 {
        if i == j {
            0.0
        } else {
            self.allocation[&(i, j)]
        }
    }

    pub fn allocations(&self) -> impl Iterator<Item = (VertexId, VertexId, f64)> + '_ {
        self.allocation.iter().map(|(&(i, j), &c)| (i, j, c))
    }

    /// Traversal cost of arc (i, j).
    pub fn arc_cost(&self, i: VertexId, j: VertexId) -> f64 {
        let (ix, iy) = self.coords(i);
        let (jx, jy) = self.coords(j);
        euclidean(self.metric, ix, iy, jx, jy)
    }

    /// All arcs of the digraph: ordered pairs of distinct nodes, except
    /// depot-to-depot pairs (no route ever traverses one).
    pub fn arcs(&self) -> impl Iterator<Item = (VertexId, VertexId)> + '_ {
        let n = self.node_count();
        (0..n).flat_map(move |i| {
            (0..n).filter_map(move |j| {
                if i == j || (self.is_depot(i) && self.is_depot(j)) {
                    None
                } else {
                    Some((i, j))
                }
            })
        })
    }
}
