//! Solution files: instance name header, one route per line as vertex ids,
//! then one `SERVE u BY v` line per serviced demand.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use crate::model::{CcspInstance, Route, Solution};

use super::{parse_num, IoError};

pub fn write_solution(instance: &CcspInstance, solution: &Solution) -> String {
    let mut out = String::new();
    writeln!(out, "INSTANCE {}", instance.name()).unwrap();
    writeln!(out, "COST {}", solution.cost).unwrap();
    for route in &solution.routes {
        let stops: Vec<String> = route.stops.iter().map(|&v| (v + 1).to_string()).collect();
        writeln!(out, "ROUTE {}", stops.join(" ")).unwrap();
    }
    for route in &solution.routes {
        for (&u, &v) in &route.serviced {
            writeln!(out, "SERVE {} BY {}", u + 1, v + 1).unwrap();
        }
    }
    writeln!(out, "EOF").unwrap();
    out
}

/// Parse a solution file against its instance. Returns the stated name along
/// with the solution so callers can warn about mismatched pairings.
pub fn read_solution(text: &str, instance: &CcspInstance) -> Result<(String, Solution), IoError> {
    let n = instance.vertex_count();
    let mut name = String::new();
    let mut cost: Option<f64> = None;
    let mut routes: Vec<Route> = Vec::new();

    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = raw.trim();
        if line.is_empty() || line == "EOF" || line.starts_with('#') {
            continue;
        }
        let mut fields = line.split_whitespace();
        match fields.next().unwrap_or("") {
            "INSTANCE" => name = fields.collect::<Vec<_>>().join(" "),
            "COST" => {
                let tok = fields
                    .next()
                    .ok_or_else(|| IoError::at(line_no, "COST needs a value"))?;
                cost = Some(parse_num(line_no, tok, "cost")?);
            }
            "ROUTE" => {
                let mut stops = Vec::new();
                for tok in fields {
                    let id: usize = parse_num(line_no, tok, "vertex id")?;
                    if id < 1 || id > n {
                        return Err(IoError::at(line_no, format!("vertex id {id} out of range")));
                    }
                    stops.push(id - 1);
                }
                routes.push(Route::new(stops, BTreeMap::new()));
            }
            "SERVE" => {
                let toks: Vec<&str> = fields.collect();
                if toks.len() != 3 || toks[1] != "BY" {
                    return Err(IoError::at(line_no, "expected `SERVE u BY v`"));
                }
                let u: usize = parse_num(line_no, toks[0], "demand id")?;
                let v: usize = parse_num(line_no, toks[2], "server id")?;
                if u < 1 || u > n || v < 1 || v > n {
                    return Err(IoError::at(line_no, "SERVE ids out of range"));
                }
                let (u, v) = (u - 1, v - 1);
                let route = routes
                    .iter_mut()
                    .find(|r| r.stops.contains(&v))
                    .ok_or_else(|| {
                        IoError::at(
                            line_no,
                            format!("server {} is not visited by any route", v + 1),
                        )
                    })?;
                route.serviced.insert(u, v);
            }
            other => return Err(IoError::at(line_no, format!("unexpected keyword `{other}`"))),
        }
    }

    let cost = cost.ok_or_else(|| IoError::MissingSection("COST".into()))?;
    Ok((name, Solution { routes, cost }))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::validate;

    fn toy_instance() -> CcspInstance {
        CcspInstance::new(
            "toy",
            "",
            vec![(0.0, 0.0), (1.0, 0.0), (2.0, 0.0), (3.0, 0.0)],
            0,
            vec![0, 2, 0, 3],
            5,
            vec![vec![], vec![1, 2], vec![2, 1, 3], vec![3, 2]],
            crate::model::EdgeMetric::ExactEuclidean,
        )
        .unwrap()
    }

    #[test]
    fn roundtrip_keeps_solution_valid() {
        let inst = toy_instance();
        let route = Route::new(vec![2], BTreeMap::from([(1, 2), (3, 2)]));
        let sol = Solution::from_routes(&inst, vec![route]);
        assert!(validate(&inst, &sol).is_empty());
        let text = write_solution(&inst, &sol);
        let (name, back) = read_solution(&text, &inst).unwrap();
        assert_eq!(name, "toy");
        assert_eq!(back, sol);
        assert!(validate(&inst, &back).is_empty());
    }

    #[test]
    fn serve_by_unvisited_vertex_is_rejected() {
        let inst = toy_instance();
        let text = "INSTANCE toy\nCOST 4\nROUTE 3\nSERVE 2 BY 4\nEOF\n";
        let err = read_solution(text, &inst).unwrap_err();
        assert!(err.to_string().contains("not visited"));
    }
}
