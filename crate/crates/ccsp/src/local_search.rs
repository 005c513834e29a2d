//! Intra-route improvement applied to final solutions: 2-opt, Or-opt moves
//! of segment length 1..3, and an optional sequential 3-opt. Routes never get
//! worse, the depot stays fixed, and the visit set and service map are
//! preserved exactly.

use crate::model::{CcspInstance, Route, Solution, VertexId};

const EPS: f64 = 1e-9;

/// Which intra-route moves run, and a pass cap as a safety valve.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct MoveSet {
    pub two_opt: bool,
    /// Or-opt with segment lengths 1, 2 and 3.
    pub or_opt: [bool; 3],
    pub three_opt: bool,
    pub max_passes: usize,
}

impl Default for MoveSet {
    fn default() -> Self {
        Self {
            two_opt: true,
            or_opt: [true, true, true],
            three_opt: true,
            max_passes: 10_000,
        }
    }
}

impl MoveSet {
    pub fn is_empty(&self) -> bool {
        !self.two_opt && !self.or_opt.iter().any(|&m| m) && !self.three_opt
    }

    /// Parse a comma-separated move list: `two-opt`, `or-opt-1`, `or-opt-2`,
    /// `or-opt-3`, `three-opt` (aliases `3-opt`, `2-opt`).
    pub fn parse(list: &str) -> Result<Self, String> {
        let mut moves = MoveSet {
            two_opt: false,
            or_opt: [false; 3],
            three_opt: false,
            max_passes: 10_000,
        };
        for name in list.split(',').map(str::trim).filter(|s| !s.is_empty()) {
            match name {
                "two-opt" | "2-opt" => moves.two_opt = true,
                "or-opt-1" => moves.or_opt[0] = true,
                "or-opt-2" => moves.or_opt[1] = true,
                "or-opt-3" => moves.or_opt[2] = true,
                "three-opt" | "3-opt" | "sequential-3-opt" => moves.three_opt = true,
                other => return Err(format!("unknown move `{other}`")),
            }
        }
        if moves.is_empty() {
            return Err("at least one move must be enabled".into());
        }
        Ok(moves)
    }
}

fn cycle_cost(instance: &CcspInstance, stops: &[VertexId]) -> f64 {
    if stops.is_empty() {
        return 0.0;
    }
    let depot = instance.depot();
    let mut total = instance.edge_cost(depot, stops[0]);
    for pair in stops.windows(2) {
        total += instance.edge_cost(pair[0], pair[1]);
    }
    total + instance.edge_cost(*stops.last().unwrap(), depot)
}

/// Improve one route until it is locally optimal for every enabled move.
/// First-improvement sweeps in a fixed scan order keep the result
/// deterministic.
pub fn improve_route(instance: &CcspInstance, route: &Route, moves: &MoveSet) -> Route {
    assert!(!moves.is_empty(), "empty move set");
    if route.stops.len() < 2 {
        return route.clone();
    }
    let mut stops = route.stops.clone();
    let mut passes = 0;
    let mut improved = true;
    while improved && passes < moves.max_passes {
        improved = false;
        passes += 1;
        if moves.two_opt {
            improved |= two_opt_pass(instance, &mut stops);
        }
        for len in 1..=3 {
            if moves.or_opt[len - 1] {
                improved |= or_opt_pass(instance, &mut stops, len);
            }
        }
        if moves.three_opt {
            improved |= three_opt_pass(instance, &mut stops);
        }
    }
    Route::new(stops, route.serviced.clone())
}

/// Improve every route of a solution independently.
pub fn improve_solution(instance: &CcspInstance, solution: &Solution, moves: &MoveSet) -> Solution {
    let routes = solution
        .routes
        .iter()
        .map(|r| improve_route(instance, r, moves))
        .collect();
    Solution::from_routes(instance, routes)
}

/// Reverse stops[i..=j] when the edge exchange pays off.
fn two_opt_pass(instance: &CcspInstance, stops: &mut Vec<VertexId>) -> bool {
    let depot = instance.depot();
    let mut any = false;
    'scan: loop {
        let n = stops.len();
        for i in 0..n.saturating_sub(1) {
            let before = if i == 0 { depot } else { stops[i - 1] };
            for j in i + 1..n {
                let after = if j + 1 == n { depot } else { stops[j + 1] };
                let delta = instance.edge_cost(before, stops[j])
                    + instance.edge_cost(stops[i], after)
                    - instance.edge_cost(before, stops[i])
                    - instance.edge_cost(stops[j], after);
                if delta < -EPS {
                    stops[i..=j].reverse();
                    any = true;
                    continue 'scan;
                }
            }
        }
        return any;
    }
}

/// Relocate a segment of `len` consecutive stops, orientation preserved.
fn or_opt_pass(instance: &CcspInstance, stops: &mut Vec<VertexId>, len: usize) -> bool {
    let depot = instance.depot();
    let mut any = false;
    'scan: loop {
        let n = stops.len();
        if n <= len {
            return any;
        }
        for i in 0..=n - len {
            let seg_start = stops[i];
            let seg_end = stops[i + len - 1];
            let before = if i == 0 { depot } else { stops[i - 1] };
            let after = if i + len == n { depot } else { stops[i + len] };
            let removal = instance.edge_cost(before, seg_start)
                + instance.edge_cost(seg_end, after)
                - instance.edge_cost(before, after);
            // Positions in the remaining sequence of n - len stops.
            for k in 0..=n - len {
                if k == i {
                    continue; // same slot, no move
                }
                let rem_at = |idx: usize| -> VertexId {
                    if idx < i {
                        stops[idx]
                    } else {
                        stops[idx + len]
                    }
                };
                let u = if k == 0 { depot } else { rem_at(k - 1) };
                let w = if k == n - len { depot } else { rem_at(k) };
                let insertion = instance.edge_cost(u, seg_start)
                    + instance.edge_cost(seg_end, w)
                    - instance.edge_cost(u, w);
                if insertion - removal < -EPS {
                    let segment: Vec<VertexId> = stops.drain(i..i + len).collect();
                    for (offset, v) in segment.into_iter().enumerate() {
                        stops.insert(k + offset, v);
                    }
                    any = true;
                    continue 'scan;
                }
            }
        }
        return any;
    }
}

/// Sequential 3-opt: cut the cycle at three positions and try every
/// reconnection of the two middle segments, first improvement wins.
fn three_opt_pass(instance: &CcspInstance, stops: &mut Vec<VertexId>) -> bool {
    let mut any = false;
    'scan: loop {
        let n = stops.len();
        if n < 3 {
            return any;
        }
        let current = cycle_cost(instance, stops);
        for i in 0..n - 2 {
            for j in i + 1..n - 1 {
                for k in j + 1..n {
                    for variant in reconnections(stops, i, j, k) {
                        if cycle_cost(instance, &variant) < current - EPS {
                            *stops = variant;
                            any = true;
                            continue 'scan;
                        }
                    }
                }
            }
        }
        return any;
    }
}

/// The seven reconnections of segments B = stops[i..j], C = stops[j..k]
/// within A | B | C | D.
fn reconnections(stops: &[VertexId], i: usize, j: usize, k: usize) -> Vec<Vec<VertexId>> {
    let a = &stops[..i];
    let b = &stops[i..j];
    let c = &stops[j..k];
    let d = &stops[k..];
    let rev = |s: &[VertexId]| -> Vec<VertexId> { s.iter().rev().copied().collect() };
    let order = |parts: &[&[VertexId]]| -> Vec<VertexId> {
        let mut out = Vec::with_capacity(stops.len());
        for p in parts {
            out.extend_from_slice(p);
        }
        out
    };
    vec![
        order(&[a, &rev(b), c, d]),
        order(&[a, b, &rev(c), d]),
        order(&[a, &rev(b), &rev(c), d]),
        order(&[a, c, b, d]),
        order(&[a, c, &rev(b), d]),
        order(&[a, &rev(c), b, d]),
        order(&[a, &rev(c), &rev(b), d]),
    ]
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::decoder::decode;
    use crate::model::{validate, EdgeMetric};
    use rand::prelude::*;
    use rand_chacha::ChaCha8Rng;
    use std::collections::BTreeMap;
    use std::collections::BTreeSet;

    fn square_instance() -> CcspInstance {
        CcspInstance::new(
            "square",
            "",
            vec![(0.0, 0.0), (1.0, 1.0), (1.0, 0.0), (0.0, 1.0)],
            0,
            vec![0, 1, 1, 1],
            5,
            vec![vec![], vec![1], vec![2], vec![3]],
            EdgeMetric::ExactEuclidean,
        )
        .unwrap()
    }

    /// Exhaustive tour oracle: minimum cycle cost over all stop orders.
    fn brute_force_tsp(instance: &CcspInstance, stops: &[VertexId]) -> f64 {
        fn perms(items: &mut Vec<VertexId>, k: usize, best: &mut f64, inst: &CcspInstance) {
            if k == items.len() {
                *best = best.min(cycle_cost(inst, items));
                return;
            }
            for i in k..items.len() {
                items.swap(k, i);
                perms(items, k + 1, best, inst);
                items.swap(k, i);
            }
        }
        let mut items = stops.to_vec();
        let mut best = f64::INFINITY;
        perms(&mut items, 0, &mut best, instance);
        best
    }

    #[test]
    fn two_opt_uncrosses_the_square() {
        let inst = square_instance();
        // (0,0) -> (1,1) -> (1,0) -> (0,1) -> (0,0): both diagonals crossed.
        let route = Route::new(vec![1, 2, 3], BTreeMap::from([(1, 1), (2, 2), (3, 3)]));
        let crossed = route.cost(&inst);
        assert!((crossed - (2.0 + 2.0 * 2.0_f64.sqrt())).abs() < 1e-9);
        let moves = MoveSet {
            two_opt: true,
            or_opt: [false; 3],
            three_opt: false,
            max_passes: 100,
        };
        let improved = improve_route(&inst, &route, &moves);
        let optimal = brute_force_tsp(&inst, &route.stops);
        assert!((optimal - 4.0).abs() < 1e-9);
        assert!((improved.cost(&inst) - 4.0).abs() < 1e-9);
    }

    #[test]
    fn triangle_route_is_already_optimal() {
        let inst = CcspInstance::new(
            "tri",
            "",
            vec![(0.0, 0.0), (3.0, 0.0), (0.0, 4.0)],
            0,
            vec![0, 1, 1],
            5,
            vec![vec![], vec![1], vec![2]],
            EdgeMetric::ExactEuclidean,
        )
        .unwrap();
        let route = Route::new(vec![1, 2], BTreeMap::from([(1, 1), (2, 2)]));
        let improved = improve_route(&inst, &route, &MoveSet::default());
        assert_eq!(improved, route);
    }

    #[test]
    fn depot_only_route_is_unchanged() {
        let inst = square_instance();
        let route = Route::new(vec![], BTreeMap::new());
        let improved = improve_route(&inst, &route, &MoveSet::default());
        assert_eq!(improved, route);
        let sol = Solution::from_routes(&inst, vec![route]);
        assert_eq!(improve_solution(&inst, &sol, &MoveSet::default()), sol);
    }

    #[test]
    fn improvement_preserves_visits_and_service() {
        let mut rng = ChaCha8Rng::seed_from_u64(31);
        for _ in 0..30 {
            let inst = crate::test_fixtures::random_cover_instance(&mut rng);
            let keys: Vec<f64> = (0..inst.demand_vertices().len())
                .map(|_| rng.gen::<f64>())
                .collect();
            let sol = decode(&inst, &keys).unwrap();
            let improved = improve_solution(&inst, &sol, &MoveSet::default());
            assert!(improved.cost <= sol.cost + 1e-9);
            assert!(validate(&inst, &improved).is_empty());
            for (before, after) in sol.routes.iter().zip(&improved.routes) {
                let b: BTreeSet<_> = before.stops.iter().collect();
                let a: BTreeSet<_> = after.stops.iter().collect();
                assert_eq!(b, a);
                assert_eq!(before.serviced, after.serviced);
            }
        }
    }

    #[test]
    fn improvement_is_idempotent_at_local_optimum() {
        let mut rng = ChaCha8Rng::seed_from_u64(77);
        for _ in 0..20 {
            let inst = crate::test_fixtures::random_cover_instance(&mut rng);
            let keys: Vec<f64> = (0..inst.demand_vertices().len())
                .map(|_| rng.gen::<f64>())
                .collect();
            let sol = decode(&inst, &keys).unwrap();
            let once = improve_solution(&inst, &sol, &MoveSet::default());
            let twice = improve_solution(&inst, &once, &MoveSet::default());
            assert_eq!(once, twice);
        }
    }

    #[test]
    fn two_opt_output_admits_no_improving_exchange() {
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        let moves = MoveSet {
            two_opt: true,
            or_opt: [false; 3],
            three_opt: false,
            max_passes: 10_000,
        };
        for _ in 0..20 {
            let inst = crate::test_fixtures::random_cover_instance(&mut rng);
            let keys: Vec<f64> = (0..inst.demand_vertices().len())
                .map(|_| rng.gen::<f64>())
                .collect();
            let sol = decode(&inst, &keys).unwrap();
            let improved = improve_solution(&inst, &sol, &moves);
            let depot = inst.depot();
            for route in &improved.routes {
                let stops = &route.stops;
                let n = stops.len();
                for i in 0..n.saturating_sub(1) {
                    let before = if i == 0 { depot } else { stops[i - 1] };
                    for j in i + 1..n {
                        let after = if j + 1 == n { depot } else { stops[j + 1] };
                        let delta = inst.edge_cost(before, stops[j])
                            + inst.edge_cost(stops[i], after)
                            - inst.edge_cost(before, stops[i])
                            - inst.edge_cost(stops[j], after);
                        assert!(delta >= -EPS, "improving 2-opt exchange left behind");
                    }
                }
            }
        }
    }

    #[test]
    fn small_routes_reach_brute_force_optimum_with_three_opt() {
        let mut rng = ChaCha8Rng::seed_from_u64(2024);
        let mut gaps: Vec<f64> = Vec::new();
        for _ in 0..40 {
            let inst = crate::test_fixtures::random_cover_instance(&mut rng);
            let keys: Vec<f64> = (0..inst.demand_vertices().len())
                .map(|_| rng.gen::<f64>())
                .collect();
            let sol = decode(&inst, &keys).unwrap();
            let improved = improve_solution(&inst, &sol, &MoveSet::default());
            for route in &improved.routes {
                if route.stops.len() < 2 || route.stops.len() > 8 {
                    continue;
                }
                let optimal = brute_force_tsp(&inst, &route.stops);
                let got = route.cost(&inst);
                assert!(got >= optimal - 1e-9);
                let gap = if optimal > 0.0 {
                    (got - optimal) / optimal * 100.0
                } else {
                    0.0
                };
                gaps.push(gap);
            }
        }
        assert!(gaps.len() > 20, "not enough routes sampled");
        gaps.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let median = gaps[gaps.len() / 2];
        assert!(median <= 2.0, "median gap {median}% exceeds 2%");
    }

    #[test]
    fn move_set_parsing() {
        let moves = MoveSet::parse("two-opt,or-opt-2,3-opt").unwrap();
        assert!(moves.two_opt);
        assert_eq!(moves.or_opt, [false, true, false]);
        assert!(moves.three_opt);
        assert!(MoveSet::parse("").is_err());
        assert!(MoveSet::parse("warp").is_err());
    }
}
