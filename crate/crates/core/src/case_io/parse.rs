use std::collections::HashMap;

use super::{Branch, Bus, BusId, CaseData, CaseError, CostFunction, Generator};

struct Row {
    line: usize,
    values: Vec<f64>,
}

#[derive(Default)]
struct RawCase {
    name: String,
    scalars: HashMap<String, (usize, f64)>,
    matrices: HashMap<String, Vec<Row>>,
}

/// Parses a MATPOWER version 2 case and normalizes it to per unit.
pub fn parse_case(text: &str) -> Result<CaseData, CaseError> {
    let raw = tokenize(text)?;
    let base_mva = match raw.scalars.get("baseMVA") {
        Some(&(_, v)) => v,
        None => return Err(CaseError::MissingMatrix("baseMVA")),
    };
    if !(base_mva > 0.0) {
        return Err(CaseError::Validation(format!("baseMVA must be positive, got {base_mva}")));
    }
    let bus_rows = raw.matrices.get("bus").ok_or(CaseError::MissingMatrix("bus"))?;
    let gen_rows = raw.matrices.get("gen").ok_or(CaseError::MissingMatrix("gen"))?;
    let branch_rows = raw.matrices.get("branch").ok_or(CaseError::MissingMatrix("branch"))?;
    let cost_rows = raw.matrices.get("gencost").ok_or(CaseError::MissingMatrix("gencost"))?;

    let buses = bus_rows.iter().map(|r| parse_bus(r, base_mva)).collect::<Result<Vec<_>, _>>()?;
    let branches = branch_rows.iter().map(|r| parse_branch(r, base_mva)).collect::<Result<Vec<_>, _>>()?;

    if cost_rows.len() < gen_rows.len() {
        return Err(CaseError::Validation(format!(
            "gencost has {} rows but there are {} generators",
            cost_rows.len(),
            gen_rows.len()
        )));
    }
    // a second block of gencost rows holds reactive costs; unused
    let generators = gen_rows
        .iter()
        .zip(cost_rows)
        .map(|(g, c)| parse_generator(g, c, base_mva))
        .collect::<Result<Vec<_>, _>>()?;

    let case = CaseData { name: raw.name, base_mva, buses, branches, generators };
    case.validate()?;
    Ok(case)
}

fn tokenize(text: &str) -> Result<RawCase, CaseError> {
    let mut raw = RawCase::default();
    let mut open: Option<(String, Vec<Row>, char)> = None;

    for (idx, full_line) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = strip_comment(full_line).trim();
        if line.is_empty() {
            continue;
        }

        if let Some((name, mut rows, close)) = open.take() {
            match line.find(close) {
                Some(pos) => {
                    if close == ']' {
                        push_rows(&line[..pos], line_no, &mut rows)?;
                        raw.matrices.insert(name, rows);
                    }
                }
                None => {
                    if close == ']' {
                        push_rows(line, line_no, &mut rows)?;
                    }
                    open = Some((name, rows, close));
                }
            }
            continue;
        }

        if let Some(rest) = line.strip_prefix("function") {
            if let Some(eq) = rest.find('=') {
                raw.name = rest[eq + 1..].trim().trim_end_matches(';').to_string();
            }
            continue;
        }

        let Some(rest) = line.strip_prefix("mpc.") else { continue };
        let Some(eq) = rest.find('=') else {
            return Err(CaseError::Malformed { line: line_no, message: "expected assignment".into() });
        };
        let name = rest[..eq].trim().to_string();
        let value = rest[eq + 1..].trim();

        if let Some(body) = value.strip_prefix('[') {
            let mut rows = Vec::new();
            match body.find(']') {
                Some(pos) => {
                    push_rows(&body[..pos], line_no, &mut rows)?;
                    raw.matrices.insert(name, rows);
                }
                None => {
                    push_rows(body, line_no, &mut rows)?;
                    open = Some((name, rows, ']'));
                }
            }
        } else if let Some(body) = value.strip_prefix('{') {
            if !body.contains('}') {
                open = Some((name, Vec::new(), '}'));
            }
        } else if value.starts_with('\'') || value.starts_with('"') {
            // string fields such as mpc.version
        } else {
            let token = value.trim_end_matches(';').trim();
            let v = parse_number(token, line_no)?;
            raw.scalars.insert(name, (line_no, v));
        }
    }
    if let Some((name, _, _)) = open {
        return Err(CaseError::Validation(format!("matrix {name} is not terminated")));
    }
    Ok(raw)
}

fn strip_comment(line: &str) -> &str {
    match line.find('%') {
        Some(pos) => &line[..pos],
        None => line,
    }
}

fn push_rows(chunk: &str, line: usize, rows: &mut Vec<Row>) -> Result<(), CaseError> {
    for part in chunk.split(';') {
        let values = part
            .split(|c: char| c.is_whitespace() || c == ',')
            .filter(|t| !t.is_empty())
            .map(|t| parse_number(t, line))
            .collect::<Result<Vec<_>, _>>()?;
        if !values.is_empty() {
            rows.push(Row { line, values });
        }
    }
    Ok(())
}

fn parse_number(token: &str, line: usize) -> Result<f64, CaseError> {
    match token {
        "Inf" | "inf" => Ok(f64::INFINITY),
        "-Inf" | "-inf" => Ok(f64::NEG_INFINITY),
        _ => token
            .parse::<f64>()
            .map_err(|_| CaseError::Malformed { line, message: format!("cannot parse number `{token}`") }),
    }
}

fn need(row: &Row, cols: usize, what: &str) -> Result<(), CaseError> {
    if row.values.len() < cols {
        return Err(CaseError::Malformed {
            line: row.line,
            message: format!("{what} row has {} columns, need at least {cols}", row.values.len()),
        });
    }
    Ok(())
}

fn bus_id(v: f64, line: usize) -> Result<BusId, CaseError> {
    if v < 1.0 || v.fract() != 0.0 || v > u32::MAX as f64 {
        return Err(CaseError::Malformed { line, message: format!("invalid bus number {v}") });
    }
    Ok(BusId(v as u32))
}

fn parse_bus(row: &Row, base: f64) -> Result<Bus, CaseError> {
    need(row, 13, "bus")?;
    let v = &row.values;
    Ok(Bus {
        id: bus_id(v[0], row.line)?,
        kind: v[1] as u8,
        p_load: v[2] / base,
        q_load: v[3] / base,
        shunt_g: v[4] / base,
        shunt_b: v[5] / base,
        v_max: v[11],
        v_min: v[12],
    })
}

fn parse_branch(row: &Row, base: f64) -> Result<Branch, CaseError> {
    need(row, 11, "branch")?;
    let v = &row.values;
    let tap = if v[8] == 0.0 { 1.0 } else { v[8] };
    Ok(Branch {
        from_bus: bus_id(v[0], row.line)?,
        to_bus: bus_id(v[1], row.line)?,
        r: v[2],
        x: v[3],
        b_charge: v[4],
        rate_a: if v[5] == 0.0 { None } else { Some(v[5] / base) },
        tap,
        shift: v[9].to_radians(),
        in_service: v[10] != 0.0,
    })
}

fn parse_generator(row: &Row, cost: &Row, base: f64) -> Result<Generator, CaseError> {
    need(row, 10, "gen")?;
    let v = &row.values;
    Ok(Generator {
        bus: bus_id(v[0], row.line)?,
        q_max: v[3] / base,
        q_min: v[4] / base,
        in_service: v[7] > 0.0,
        p_max: v[8] / base,
        p_min: v[9] / base,
        cost: parse_cost(cost, base)?,
    })
}

/// Converts a gencost row to a per-unit cost function.
fn parse_cost(row: &Row, base: f64) -> Result<CostFunction, CaseError> {
    need(row, 4, "gencost")?;
    let v = &row.values;
    let model = v[0];
    let n = v[3];
    if n < 0.0 || n.fract() != 0.0 {
        return Err(CaseError::Malformed { line: row.line, message: format!("invalid NCOST {n}") });
    }
    let n = n as usize;
    match model as i64 {
        1 => {
            need(row, 4 + 2 * n, "gencost")?;
            let points = (0..n).map(|i| (v[4 + 2 * i] / base, v[5 + 2 * i])).collect();
            Ok(CostFunction::PiecewiseLinear(points))
        }
        2 => {
            need(row, 4 + n, "gencost")?;
            // highest order first; allow padding with exact zeros
            let coeffs = &v[4..4 + n];
            let lead_zeros = coeffs.iter().take_while(|c| **c == 0.0).count();
            let effective = &coeffs[lead_zeros.min(n.saturating_sub(1))..];
            if effective.len() > 3 {
                return Err(CaseError::Validation(format!(
                    "line {}: polynomial cost of degree {} unsupported (max 2)",
                    row.line,
                    effective.len() - 1
                )));
            }
            let mut asc = [0.0; 3];
            for (deg, c) in effective.iter().rev().enumerate() {
                asc[deg] = c * base.powi(deg as i32);
            }
            Ok(CostFunction::Polynomial(asc))
        }
        m => Err(CaseError::Malformed { line: row.line, message: format!("unknown cost model {m}") }),
    }
}
