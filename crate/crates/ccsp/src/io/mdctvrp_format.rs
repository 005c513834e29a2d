//! Normalized MDCTVRP instance format. The original benchmark layout is not
//! published, so this format stores everything explicitly: coordinates,
//! demands, fleet sizes, and the full allocation cost table (which doubles
//! as the coverage relation).

use std::collections::BTreeMap;
use std::fmt::Write as _;

use crate::model::{EdgeMetric, MdctvrpInstance};

use super::{parse_num, IoError, Scanner};

pub fn write_mdctvrp(instance: &MdctvrpInstance) -> String {
    let mut out = String::new();
    writeln!(out, "NAME : {}", instance.name()).unwrap();
    writeln!(out, "TYPE : MDCTVRP").unwrap();
    writeln!(out, "CUSTOMERS : {}", instance.customer_count()).unwrap();
    writeln!(out, "DEPOTS : {}", instance.depot_count()).unwrap();
    writeln!(out, "VEHICLE_CAPACITY : {}", instance.capacity()).unwrap();
    writeln!(out, "DEPOT_CAPACITY : {}", instance.depot_capacity()).unwrap();
    let metric = match instance.metric() {
        EdgeMetric::RoundedEuclidean => "EUC_2D",
        EdgeMetric::ExactEuclidean => "EXACT_2D",
    };
    writeln!(out, "EDGE_WEIGHT_TYPE : {metric}").unwrap();
    writeln!(out, "FLEET_SECTION").unwrap();
    for (k, depot) in instance.depot_nodes().enumerate() {
        writeln!(out, "{} {}", k + 1, instance.fleet_size(depot)).unwrap();
    }
    writeln!(out, "CUSTOMER_SECTION").unwrap();
    for i in 0..instance.customer_count() {
        let (x, y) = instance.coords(i);
        writeln!(out, "{} {} {} {}", i + 1, x, y, instance.demand(i)).unwrap();
    }
    writeln!(out, "DEPOT_COORD_SECTION").unwrap();
    for (k, depot) in instance.depot_nodes().enumerate() {
        let (x, y) = instance.coords(depot);
        writeln!(out, "{} {} {}", k + 1, x, y).unwrap();
    }
    writeln!(out, "ALLOCATION_SECTION").unwrap();
    for (i, j, cost) in instance.allocations() {
        writeln!(out, "{} {} {}", i + 1, j + 1, cost).unwrap();
    }
    writeln!(out, "EOF").unwrap();
    out
}

/// Parse the normalized MDCTVRP format.
pub fn read_mdctvrp(text: &str) -> Result<MdctvrpInstance, IoError> {
    let mut scanner = Scanner::new(text);

    let mut name = String::new();
    let mut customers: Option<usize> = None;
    let mut depots: Option<usize> = None;
    let mut capacity: Option<u32> = None;
    let mut depot_capacity: Option<u32> = None;
    let mut metric = EdgeMetric::ExactEuclidean;
    let mut fleet: Vec<Option<u32>> = Vec::new();
    let mut customer_coords: Vec<Option<(f64, f64)>> = Vec::new();
    let mut demands: Vec<Option<u32>> = Vec::new();
    let mut depot_coords: Vec<Option<(f64, f64)>> = Vec::new();
    let mut allocation: BTreeMap<(usize, usize), f64> = BTreeMap::new();

    while let Some((line_no, line)) = scanner.next() {
        if line == "EOF" {
            break;
        }
        let keyword = line.split_whitespace().next().unwrap_or("");
        match keyword {
            "FLEET_SECTION" | "CUSTOMER_SECTION" | "DEPOT_COORD_SECTION" | "ALLOCATION_SECTION" => {
                let nc = customers
                    .ok_or_else(|| IoError::at(line_no, format!("CUSTOMERS must precede {keyword}")))?;
                let nd = depots
                    .ok_or_else(|| IoError::at(line_no, format!("DEPOTS must precede {keyword}")))?;
                if keyword == "FLEET_SECTION" {
                    fleet = vec![None; nd];
                } else if keyword == "CUSTOMER_SECTION" {
                    customer_coords = vec![None; nc];
                    demands = vec![None; nc];
                } else if keyword == "DEPOT_COORD_SECTION" {
                    depot_coords = vec![None; nd];
                }
                while let Some((l, data)) = scanner.peek() {
                    if data
                        .split_whitespace()
                        .next()
                        .unwrap_or("")
                        .chars()
                        .next()
                        .is_some_and(|c| c.is_ascii_alphabetic())
                    {
                        break;
                    }
                    scanner.next();
                    let f: Vec<&str> = data.split_whitespace().collect();
                    match keyword {
                        "FLEET_SECTION" => {
                            if f.len() != 2 {
                                return Err(IoError::at(l, "expected `depot_id fleet_size`"));
                            }
                            let id: usize = parse_num(l, f[0], "depot id")?;
                            check_range(l, id, nd, "depot id")?;
                            fleet[id - 1] = Some(parse_num(l, f[1], "fleet size")?);
                        }
                        "CUSTOMER_SECTION" => {
                            if f.len() != 4 {
                                return Err(IoError::at(l, "expected `id x y demand`"));
                            }
                            let id: usize = parse_num(l, f[0], "customer id")?;
                            check_range(l, id, nc, "customer id")?;
                            customer_coords[id - 1] = Some((
                                parse_num(l, f[1], "x coordinate")?,
                                parse_num(l, f[2], "y coordinate")?,
                            ));
                            demands[id - 1] = Some(parse_num(l, f[3], "demand")?);
                        }
                        "DEPOT_COORD_SECTION" => {
                            if f.len() != 3 {
                                return Err(IoError::at(l, "expected `id x y`"));
                            }
                            let id: usize = parse_num(l, f[0], "depot id")?;
                            check_range(l, id, nd, "depot id")?;
                            depot_coords[id - 1] = Some((
                                parse_num(l, f[1], "x coordinate")?,
                                parse_num(l, f[2], "y coordinate")?,
                            ));
                        }
                        _ => {
                            if f.len() != 3 {
                                return Err(IoError::at(l, "expected `i j cost`"));
                            }
                            let i: usize = parse_num(l, f[0], "customer id")?;
                            let j: usize = parse_num(l, f[1], "customer id")?;
                            check_range(l, i, nc, "customer id")?;
                            check_range(l, j, nc, "customer id")?;
                            let cost: f64 = parse_num(l, f[2], "allocation cost")?;
                            allocation.insert((i - 1, j - 1), cost);
                        }
                    }
                }
            }
            _ => {
                let Some((key, value)) = Scanner::header_of(line) else {
                    return Err(IoError::at(line_no, format!("unexpected line `{line}`")));
                };
                match key {
                    "NAME" => name = value.to_string(),
                    "CUSTOMERS" => customers = Some(parse_num(line_no, value, "CUSTOMERS")?),
                    "DEPOTS" => depots = Some(parse_num(line_no, value, "DEPOTS")?),
                    "VEHICLE_CAPACITY" => {
                        capacity = Some(parse_num(line_no, value, "VEHICLE_CAPACITY")?)
                    }
                    "DEPOT_CAPACITY" => {
                        depot_capacity = Some(parse_num(line_no, value, "DEPOT_CAPACITY")?)
                    }
                    "EDGE_WEIGHT_TYPE" => match value {
                        "EUC_2D" => metric = EdgeMetric::RoundedEuclidean,
                        "EXACT_2D" => metric = EdgeMetric::ExactEuclidean,
                        other => {
                            return Err(IoError::at(
                                line_no,
                                format!("unsupported EDGE_WEIGHT_TYPE `{other}`"),
                            ))
                        }
                    },
                    _ => {}
                }
            }
        }
    }

    let nc = customers.ok_or_else(|| IoError::MissingSection("CUSTOMERS".into()))?;
    let nd = depots.ok_or_else(|| IoError::MissingSection("DEPOTS".into()))?;
    let capacity = capacity.ok_or_else(|| IoError::MissingSection("VEHICLE_CAPACITY".into()))?;
    let depot_capacity =
        depot_capacity.ok_or_else(|| IoError::Header("depot capacity required".into()))?;
    let customers = collect(customer_coords, nc, "CUSTOMER_SECTION")?;
    let demands = collect(demands, nc, "CUSTOMER_SECTION")?;
    let depot_coords = collect(depot_coords, nd, "DEPOT_COORD_SECTION")?;
    let fleet = collect(fleet, nd, "FLEET_SECTION")?;

    Ok(MdctvrpInstance::new(
        name,
        customers,
        depot_coords,
        demands,
        capacity,
        depot_capacity,
        fleet,
        allocation,
        metric,
    )?)
}

fn check_range(line: usize, id: usize, n: usize, what: &str) -> Result<(), IoError> {
    if id < 1 || id > n {
        Err(IoError::at(line, format!("{what} {id} out of range 1..={n}")))
    } else {
        Ok(())
    }
}

fn collect<T>(entries: Vec<Option<T>>, n: usize, section: &str) -> Result<Vec<T>, IoError> {
    if entries.len() != n || entries.iter().any(Option::is_none) {
        let present = entries.iter().filter(|e| e.is_some()).count();
        return Err(IoError::Header(format!(
            "expected {n} records in {section}, found {present}"
        )));
    }
    Ok(entries.into_iter().map(Option::unwrap).collect())
}
