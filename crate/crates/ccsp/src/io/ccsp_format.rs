//! The self-contained CCSP instance format: TSPLIB-style headers plus an
//! explicit COVER_SECTION, so files stay valid even if the k-nearest
//! generation rule changes.

use std::fmt::Write as _;

use crate::model::{CcspInstance, EdgeMetric};

use super::{parse_num, IoError, Scanner};

/// Render an instance; `read_ccsp(write_ccsp(i))` is the identity.
pub fn write_ccsp(instance: &CcspInstance) -> String {
    let mut out = String::new();
    let n = instance.vertex_count();
    writeln!(out, "NAME : {}", instance.name()).unwrap();
    if !instance.comment().is_empty() {
        writeln!(out, "COMMENT : {}", instance.comment()).unwrap();
    }
    writeln!(out, "TYPE : CCSP").unwrap();
    writeln!(out, "DIMENSION : {n}").unwrap();
    let metric = match instance.metric() {
        EdgeMetric::RoundedEuclidean => "EUC_2D",
        EdgeMetric::ExactEuclidean => "EXACT_2D",
    };
    writeln!(out, "EDGE_WEIGHT_TYPE : {metric}").unwrap();
    writeln!(out, "CAPACITY : {}", instance.capacity()).unwrap();
    writeln!(out, "NODE_COORD_SECTION").unwrap();
    for v in 0..n {
        let (x, y) = instance.coords(v);
        writeln!(out, "{} {} {}", v + 1, x, y).unwrap();
    }
    writeln!(out, "DEMAND_SECTION").unwrap();
    for v in 0..n {
        writeln!(out, "{} {}", v + 1, instance.demand(v)).unwrap();
    }
    writeln!(out, "DEPOT_SECTION").unwrap();
    writeln!(out, "{}", instance.depot() + 1).unwrap();
    writeln!(out, "-1").unwrap();
    writeln!(out, "COVER_SECTION").unwrap();
    for v in instance.transit_vertices() {
        let members: Vec<String> = instance
            .covers(v)
            .iter()
            .map(|&u| (u + 1).to_string())
            .collect();
        writeln!(out, "{} : {}", v + 1, members.join(" ")).unwrap();
    }
    writeln!(out, "EOF").unwrap();
    out
}

/// Parse the CCSP format back into an instance.
pub fn read_ccsp(text: &str) -> Result<CcspInstance, IoError> {
    let mut scanner = Scanner::new(text);

    let mut name = String::new();
    let mut comment = String::new();
    let mut dimension: Option<usize> = None;
    let mut capacity: Option<u32> = None;
    let mut metric: Option<EdgeMetric> = None;
    let mut coords: Vec<Option<(f64, f64)>> = Vec::new();
    let mut demands: Vec<Option<u32>> = Vec::new();
    let mut covers: Vec<Option<Vec<usize>>> = Vec::new();
    let mut depots: Vec<usize> = Vec::new();
    let mut seen_cover_section = false;

    while let Some((line_no, line)) = scanner.next() {
        if line == "EOF" {
            break;
        }
        let keyword = line.split_whitespace().next().unwrap_or("");
        match keyword {
            "NODE_COORD_SECTION" | "DEMAND_SECTION" | "COVER_SECTION" => {
                let n = dimension
                    .ok_or_else(|| IoError::at(line_no, format!("DIMENSION must precede {keyword}")))?;
                if keyword == "NODE_COORD_SECTION" {
                    coords = vec![None; n];
                } else if keyword == "DEMAND_SECTION" {
                    demands = vec![None; n];
                } else {
                    seen_cover_section = true;
                    covers = vec![None; n];
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
                    match keyword {
                        "NODE_COORD_SECTION" => {
                            let f: Vec<&str> = data.split_whitespace().collect();
                            if f.len() != 3 {
                                return Err(IoError::at(l, "expected `id x y`"));
                            }
                            let id: usize = parse_num(l, f[0], "vertex id")?;
                            check_id(l, id, n)?;
                            coords[id - 1] = Some((
                                parse_num(l, f[1], "x coordinate")?,
                                parse_num(l, f[2], "y coordinate")?,
                            ));
                        }
                        "DEMAND_SECTION" => {
                            let f: Vec<&str> = data.split_whitespace().collect();
                            if f.len() != 2 {
                                return Err(IoError::at(l, "expected `id demand`"));
                            }
                            let id: usize = parse_num(l, f[0], "vertex id")?;
                            check_id(l, id, n)?;
                            demands[id - 1] = Some(parse_num(l, f[1], "demand")?);
                        }
                        _ => {
                            // COVER_SECTION line: `v : u1 u2 ...`
                            let (head, tail) = data.split_once(':').ok_or_else(|| {
                                IoError::at(l, "expected `v : covered ids`")
                            })?;
                            let id: usize = parse_num(l, head.trim(), "vertex id")?;
                            check_id(l, id, n)?;
                            let mut members = Vec::new();
                            for tok in tail.split_whitespace() {
                                let u: usize = parse_num(l, tok, "covered id")?;
                                check_id(l, u, n)?;
                                members.push(u - 1);
                            }
                            covers[id - 1] = Some(members);
                        }
                    }
                }
            }
            "DEPOT_SECTION" => {
                let n = dimension
                    .ok_or_else(|| IoError::at(line_no, "DIMENSION must precede DEPOT_SECTION"))?;
                while let Some((l, entry)) = scanner.next() {
                    let id: i64 = parse_num(l, entry, "depot id")?;
                    if id == -1 {
                        break;
                    }
                    if id < 1 || id as usize > n {
                        return Err(IoError::at(l, format!("depot id {id} out of range")));
                    }
                    depots.push(id as usize - 1);
                }
            }
            _ => {
                let Some((key, value)) = Scanner::header_of(line) else {
                    return Err(IoError::at(line_no, format!("unexpected line `{line}`")));
                };
                match key {
                    "NAME" => name = value.to_string(),
                    "COMMENT" => comment = value.to_string(),
                    "DIMENSION" => dimension = Some(parse_num(line_no, value, "DIMENSION")?),
                    "CAPACITY" => capacity = Some(parse_num(line_no, value, "CAPACITY")?),
                    "EDGE_WEIGHT_TYPE" => match value {
                        "EUC_2D" => metric = Some(EdgeMetric::RoundedEuclidean),
                        "EXACT_2D" => metric = Some(EdgeMetric::ExactEuclidean),
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

    let dimension = dimension.ok_or_else(|| IoError::MissingSection("DIMENSION".into()))?;
    let capacity = capacity.ok_or_else(|| IoError::MissingSection("CAPACITY".into()))?;
    let metric = metric.ok_or_else(|| IoError::MissingSection("EDGE_WEIGHT_TYPE".into()))?;
    if !seen_cover_section {
        return Err(IoError::MissingSection("COVER_SECTION".into()));
    }
    if depots.len() != 1 {
        return Err(IoError::Header(format!(
            "expected exactly one depot, found {}",
            depots.len()
        )));
    }
    let depot = depots[0];
    let coords = collect_section(coords, dimension, "NODE_COORD_SECTION")?;
    let demands = collect_section(demands, dimension, "DEMAND_SECTION")?;
    let covers: Vec<Vec<usize>> = covers
        .into_iter()
        .enumerate()
        .map(|(v, entry)| match entry {
            Some(members) => Ok(members),
            None if v == depot => Ok(Vec::new()),
            None => Err(IoError::Header(format!(
                "COVER_SECTION has no line for vertex {}",
                v + 1
            ))),
        })
        .collect::<Result<_, _>>()?;

    Ok(CcspInstance::new(
        name, comment, coords, depot, demands, capacity, covers, metric,
    )?)
}

fn check_id(line: usize, id: usize, n: usize) -> Result<(), IoError> {
    if id < 1 || id > n {
        Err(IoError::at(line, format!("vertex id {id} out of range 1..={n}")))
    } else {
        Ok(())
    }
}

fn collect_section<T>(
    entries: Vec<Option<T>>,
    n: usize,
    section: &str,
) -> Result<Vec<T>, IoError> {
    let present = entries.iter().filter(|e| e.is_some()).count();
    if present != n {
        return Err(IoError::Header(format!(
            "DIMENSION says {n} but {section} has {present} records"
        )));
    }
    Ok(entries.into_iter().map(Option::unwrap).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::io::{generate_ccsp, CvrpSource, GenerationParams};
    use rand::prelude::*;
    use rand_chacha::ChaCha8Rng;

    fn random_instance(seed: u64) -> CcspInstance {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let n = rng.gen_range(8..25);
        let coords: Vec<(f64, f64)> = (0..n)
            .map(|_| (rng.gen_range(0..100) as f64, rng.gen_range(0..100) as f64))
            .collect();
        let mut demands: Vec<u32> = (0..n).map(|_| rng.gen_range(1..=9)).collect();
        demands[0] = 0;
        let src = CvrpSource {
            name: format!("R-n{n}"),
            dimension: n,
            capacity: 20,
            coords,
            demands,
            depot: 0,
            metric: if seed % 2 == 0 {
                EdgeMetric::RoundedEuclidean
            } else {
                EdgeMetric::ExactEuclidean
            },
        };
        generate_ccsp(&src, &GenerationParams::new(0.3, 3).unwrap()).unwrap()
    }

    #[test]
    fn roundtrip_is_identity_on_generated_instances() {
        for seed in 0..20 {
            let inst = random_instance(seed);
            let text = write_ccsp(&inst);
            let back = read_ccsp(&text).unwrap();
            assert_eq!(inst, back, "seed {seed}");
        }
    }

    #[test]
    fn cover_line_grammar() {
        let inst = random_instance(1);
        let text = write_ccsp(&inst);
        let back = read_ccsp(&text).unwrap();
        // Spot-check a cover line parses into the same ordered set.
        for v in inst.transit_vertices() {
            assert_eq!(inst.covers(v), back.covers(v));
        }
    }

    #[test]
    fn explicit_cover_line_parses_as_written() {
        let text = "\
NAME : tiny
TYPE : CCSP
DIMENSION : 9
EDGE_WEIGHT_TYPE : EXACT_2D
CAPACITY : 10
NODE_COORD_SECTION
1 0 0
2 1 0
3 2 0
4 3 0
5 4 0
6 5 0
7 6 0
8 7 0
9 8 0
DEMAND_SECTION
1 0
2 1
3 2
4 0
5 0
6 3
7 0
8 0
9 1
DEPOT_SECTION
1
-1
COVER_SECTION
2 : 2 3
3 : 3 2
4 : 4 2
5 : 5 2 9
6 : 6
7 : 7 6
8 : 8 9
9 : 9
EOF
";
        let inst = read_ccsp(text).unwrap();
        assert_eq!(inst.covers(4), &[4, 1, 8]);
        assert_eq!(inst.demand_vertices(), &[1, 2, 5, 8]);
    }

    #[test]
    fn missing_cover_section_is_an_error() {
        let inst = random_instance(2);
        let text = write_ccsp(&inst);
        let start = text.find("COVER_SECTION").unwrap();
        let truncated = format!("{}EOF\n", &text[..start]);
        let err = read_ccsp(&truncated).unwrap_err();
        assert_eq!(err.to_string(), "missing COVER_SECTION");
    }
}
