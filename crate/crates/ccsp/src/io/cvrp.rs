//! TSPLIB CVRP reader (EUC_2D, explicit node coordinates only).

use crate::model::EdgeMetric;

use super::{parse_num, IoError, Scanner};

/// A parsed CVRP benchmark file: the raw material for CCSP generation.
#[derive(Debug, Clone, PartialEq)]
pub struct CvrpSource {
    pub name: String,
    pub dimension: usize,
    pub capacity: u32,
    /// Coordinates by 0-based id (file id minus one).
    pub coords: Vec<(f64, f64)>,
    pub demands: Vec<u32>,
    pub depot: usize,
    pub metric: EdgeMetric,
}

/// Parse a TSPLIB-layout CVRP file (NAME, DIMENSION, CAPACITY,
/// EDGE_WEIGHT_TYPE, NODE_COORD_SECTION, DEMAND_SECTION, DEPOT_SECTION, EOF).
/// The depot demand is forced to zero.
pub fn parse_cvrp(text: &str) -> Result<CvrpSource, IoError> {
    let mut scanner = Scanner::new(text);

    let mut name = String::new();
    let mut dimension: Option<usize> = None;
    let mut capacity: Option<u32> = None;
    let mut metric: Option<EdgeMetric> = None;

    let mut coords: Vec<Option<(f64, f64)>> = Vec::new();
    let mut demands: Vec<Option<u32>> = Vec::new();
    let mut coord_records = 0usize;
    let mut demand_records = 0usize;
    let mut depots: Vec<usize> = Vec::new();
    let mut seen_coord_section = false;
    let mut seen_demand_section = false;
    let mut seen_depot_section = false;

    while let Some((line_no, line)) = scanner.next() {
        if line == "EOF" {
            break;
        }
        match line.split_whitespace().next().unwrap_or("") {
            "NODE_COORD_SECTION" => {
                seen_coord_section = true;
                let n = dimension
                    .ok_or_else(|| IoError::at(line_no, "DIMENSION must precede NODE_COORD_SECTION"))?;
                coords = vec![None; n];
                coord_records =
                    read_records(&mut scanner, n, |line_no, fields| {
                        record_coord(line_no, fields, &mut coords)
                    })?;
            }
            "DEMAND_SECTION" => {
                seen_demand_section = true;
                let n = dimension
                    .ok_or_else(|| IoError::at(line_no, "DIMENSION must precede DEMAND_SECTION"))?;
                demands = vec![None; n];
                demand_records =
                    read_records(&mut scanner, n, |line_no, fields| {
                        record_demand(line_no, fields, &mut demands)
                    })?;
            }
            "DEPOT_SECTION" => {
                seen_depot_section = true;
                let n = dimension
                    .ok_or_else(|| IoError::at(line_no, "DIMENSION must precede DEPOT_SECTION"))?;
                while let Some((l, entry)) = scanner.next() {
                    let id: i64 = parse_num(l, entry.split_whitespace().next().unwrap_or(""), "depot id")?;
                    if id == -1 {
                        break;
                    }
                    if id < 1 || id as usize > n {
                        return Err(IoError::at(l, format!("depot id {id} out of range 1..={n}")));
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
                    "DIMENSION" => dimension = Some(parse_num(line_no, value, "DIMENSION")?),
                    "CAPACITY" => capacity = Some(parse_num(line_no, value, "CAPACITY")?),
                    "EDGE_WEIGHT_TYPE" => match value {
                        "EUC_2D" => metric = Some(EdgeMetric::RoundedEuclidean),
                        other => {
                            return Err(IoError::at(
                                line_no,
                                format!("unsupported EDGE_WEIGHT_TYPE `{other}` (only EUC_2D)"),
                            ))
                        }
                    },
                    // TYPE, COMMENT and friends carry no structure we need.
                    _ => {}
                }
            }
        }
    }

    let dimension = dimension.ok_or_else(|| IoError::MissingSection("DIMENSION".into()))?;
    let capacity = capacity.ok_or_else(|| IoError::MissingSection("CAPACITY".into()))?;
    let metric = metric.ok_or_else(|| IoError::MissingSection("EDGE_WEIGHT_TYPE".into()))?;
    if !seen_coord_section {
        return Err(IoError::MissingSection("NODE_COORD_SECTION".into()));
    }
    if !seen_demand_section {
        return Err(IoError::MissingSection("DEMAND_SECTION".into()));
    }
    if !seen_depot_section {
        return Err(IoError::MissingSection("DEPOT_SECTION".into()));
    }
    if coord_records != dimension {
        return Err(IoError::Header(format!(
            "DIMENSION says {dimension} but NODE_COORD_SECTION has {coord_records} records"
        )));
    }
    if demand_records != dimension {
        return Err(IoError::Header(format!(
            "DIMENSION says {dimension} but DEMAND_SECTION has {demand_records} records"
        )));
    }
    let coords: Vec<(f64, f64)> = coords.into_iter().map(Option::unwrap).collect();
    let mut demands: Vec<u32> = demands.into_iter().map(Option::unwrap).collect();
    if depots.len() != 1 {
        return Err(IoError::Header(format!(
            "expected exactly one depot, found {}",
            depots.len()
        )));
    }
    let depot = depots[0];
    demands[depot] = 0;

    Ok(CvrpSource {
        name,
        dimension,
        capacity,
        coords,
        demands,
        depot,
        metric,
    })
}

/// Read exactly the data lines of a section: stops before the next section
/// keyword or EOF, returns the number of records consumed.
fn read_records(
    scanner: &mut Scanner,
    expected: usize,
    mut record: impl FnMut(usize, &[&str]) -> Result<(), IoError>,
) -> Result<usize, IoError> {
    let mut count = 0;
    while let Some((line_no, line)) = scanner.peek() {
        let first = line.split_whitespace().next().unwrap_or("");
        if first.chars().next().is_some_and(|c| c.is_ascii_alphabetic()) {
            break; // next section keyword or EOF
        }
        scanner.next();
        let fields: Vec<&str> = line.split_whitespace().collect();
        record(line_no, &fields)?;
        count += 1;
        if count > expected {
            break;
        }
    }
    Ok(count)
}

fn record_coord(
    line_no: usize,
    fields: &[&str],
    coords: &mut [Option<(f64, f64)>],
) -> Result<(), IoError> {
    if fields.len() != 3 {
        return Err(IoError::at(line_no, "expected `id x y`"));
    }
    let id: usize = parse_num(line_no, fields[0], "vertex id")?;
    if id < 1 || id > coords.len() {
        return Err(IoError::at(line_no, format!("vertex id {id} out of range")));
    }
    if coords[id - 1].is_some() {
        return Err(IoError::at(line_no, format!("duplicate coordinates for vertex {id}")));
    }
    let x: f64 = parse_num(line_no, fields[1], "x coordinate")?;
    let y: f64 = parse_num(line_no, fields[2], "y coordinate")?;
    coords[id - 1] = Some((x, y));
    Ok(())
}

fn record_demand(
    line_no: usize,
    fields: &[&str],
    demands: &mut [Option<u32>],
) -> Result<(), IoError> {
    if fields.len() != 2 {
        return Err(IoError::at(line_no, "expected `id demand`"));
    }
    let id: usize = parse_num(line_no, fields[0], "vertex id")?;
    if id < 1 || id > demands.len() {
        return Err(IoError::at(line_no, format!("vertex id {id} out of range")));
    }
    if demands[id - 1].is_some() {
        return Err(IoError::at(line_no, format!("duplicate demand for vertex {id}")));
    }
    demands[id - 1] = Some(parse_num(line_no, fields[1], "demand")?);
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    pub(crate) const MINIMAL: &str = "\
NAME : mini
TYPE : CVRP
DIMENSION : 3
EDGE_WEIGHT_TYPE : EUC_2D
CAPACITY : 10
NODE_COORD_SECTION
1 0 0
2 3 4
3 6 8
DEMAND_SECTION
1 0
2 4
3 5
DEPOT_SECTION
1
-1
EOF
";

    #[test]
    fn parses_minimal_three_vertex_file() {
        let src = parse_cvrp(MINIMAL).unwrap();
        assert_eq!(src.name, "mini");
        assert_eq!(src.dimension, 3);
        assert_eq!(src.capacity, 10);
        assert_eq!(src.depot, 0);
        assert_eq!(src.demands, vec![0, 4, 5]);
        assert_eq!(src.coords[1], (3.0, 4.0));
        assert_eq!(src.metric, EdgeMetric::RoundedEuclidean);
    }

    #[test]
    fn dimension_mismatch_names_the_section() {
        let text = MINIMAL.replace("DIMENSION : 3", "DIMENSION : 5");
        let err = parse_cvrp(&text).unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("NODE_COORD_SECTION"), "got: {msg}");
        assert!(msg.contains('5') && msg.contains('3'), "got: {msg}");
    }

    #[test]
    fn euc_2d_maps_to_rounded_metric() {
        let src = parse_cvrp(MINIMAL).unwrap();
        assert_eq!(src.metric, EdgeMetric::RoundedEuclidean);
    }

    #[test]
    fn depot_demand_is_forced_to_zero() {
        let text = MINIMAL.replace("1 0\n2 4", "1 7\n2 4");
        let src = parse_cvrp(&text).unwrap();
        assert_eq!(src.demands[0], 0);
    }

    #[test]
    fn malformed_number_reports_line() {
        let text = MINIMAL.replace("2 3 4", "2 x 4");
        let err = parse_cvrp(&text).unwrap_err();
        assert!(matches!(err, IoError::Parse { line: 8, .. }), "got: {err}");
    }

    #[test]
    fn missing_section_is_reported() {
        let text = MINIMAL
            .replace("DEPOT_SECTION\n1\n-1\n", "");
        let err = parse_cvrp(&text).unwrap_err();
        assert_eq!(err.to_string(), "missing DEPOT_SECTION");
    }
}
