use std::fmt::Write;

use super::{CaseData, CostFunction};

/// Serializes a case back to MATPOWER text (MW/MVAr units, degrees).
///
/// Columns not retained by [`CaseData`] are written as neutral values.
pub fn write_case(case: &CaseData) -> String {
    let base = case.base_mva;
    let mut out = String::new();
    let name = if case.name.is_empty() { "case" } else { case.name.as_str() };
    let _ = writeln!(out, "function mpc = {name}");
    let _ = writeln!(out, "mpc.version = '2';");
    let _ = writeln!(out, "mpc.baseMVA = {};", fmt(base));

    out.push_str("%\tbus_i\ttype\tPd\tQd\tGs\tBs\tarea\tVm\tVa\tbaseKV\tzone\tVmax\tVmin\nmpc.bus = [\n");
    for b in &case.buses {
        let _ = writeln!(
            out,
            "\t{}\t{}\t{}\t{}\t{}\t{}\t1\t1\t0\t0\t1\t{}\t{};",
            b.id,
            b.kind,
            fmt(b.p_load * base),
            fmt(b.q_load * base),
            fmt(b.shunt_g * base),
            fmt(b.shunt_b * base),
            fmt(b.v_max),
            fmt(b.v_min)
        );
    }
    out.push_str("];\n\n");

    out.push_str("%\tbus\tPg\tQg\tQmax\tQmin\tVg\tmBase\tstatus\tPmax\tPmin\nmpc.gen = [\n");
    for g in &case.generators {
        let _ = writeln!(
            out,
            "\t{}\t0\t0\t{}\t{}\t1\t{}\t{}\t{}\t{};",
            g.bus,
            fmt(g.q_max * base),
            fmt(g.q_min * base),
            fmt(base),
            u8::from(g.in_service),
            fmt(g.p_max * base),
            fmt(g.p_min * base)
        );
    }
    out.push_str("];\n\n");

    out.push_str("%\tfbus\ttbus\tr\tx\tb\trateA\trateB\trateC\tratio\tangle\tstatus\tangmin\tangmax\nmpc.branch = [\n");
    for br in &case.branches {
        let tap = if br.tap == 1.0 { 0.0 } else { br.tap };
        let _ = writeln!(
            out,
            "\t{}\t{}\t{}\t{}\t{}\t{}\t0\t0\t{}\t{}\t{}\t-360\t360;",
            br.from_bus,
            br.to_bus,
            fmt(br.r),
            fmt(br.x),
            fmt(br.b_charge),
            fmt(br.rate_a.map_or(0.0, |u| u * base)),
            fmt(tap),
            fmt(br.shift.to_degrees()),
            u8::from(br.in_service)
        );
    }
    out.push_str("];\n\n");

    out.push_str("mpc.gencost = [\n");
    for g in &case.generators {
        match &g.cost {
            CostFunction::Polynomial(c) => {
                let _ = writeln!(
                    out,
                    "\t2\t0\t0\t3\t{}\t{}\t{};",
                    fmt(c[2] / (base * base)),
                    fmt(c[1] / base),
                    fmt(c[0])
                );
            }
            CostFunction::PiecewiseLinear(points) => {
                let _ = write!(out, "\t1\t0\t0\t{}", points.len());
                for (p, f) in points {
                    let _ = write!(out, "\t{}\t{}", fmt(p * base), fmt(*f));
                }
                out.push_str(";\n");
            }
        }
    }
    out.push_str("];\n");
    out
}

/// Shortest representation that parses back to the same `f64`.
fn fmt(v: f64) -> String {
    if v.is_infinite() {
        return if v > 0.0 { "Inf".into() } else { "-Inf".into() };
    }
    format!("{v:?}")
}

#[cfg(test)]
mod tests {
    use super::super::parse_case;
    use super::*;

    fn close(a: f64, b: f64) -> bool {
        (a - b).abs() <= 1e-12 * a.abs().max(b.abs()).max(1.0) || (a.is_infinite() && a == b)
    }

    #[test]
    fn case14_round_trip() {
        let text = std::fs::read_to_string(concat!(env!("CARGO_MANIFEST_DIR"), "/../../data/case14.m")).unwrap();
        let case = parse_case(&text).unwrap();
        let again = parse_case(&write_case(&case)).unwrap();
        assert_eq!(case.buses.len(), again.buses.len());
        for (a, b) in case.buses.iter().zip(&again.buses) {
            assert_eq!(a.id, b.id);
            for (x, y) in [
                (a.p_load, b.p_load),
                (a.q_load, b.q_load),
                (a.shunt_g, b.shunt_g),
                (a.shunt_b, b.shunt_b),
                (a.v_min, b.v_min),
                (a.v_max, b.v_max),
            ] {
                assert!(close(x, y), "{x} vs {y}");
            }
        }
        for (a, b) in case.branches.iter().zip(&again.branches) {
            assert!(close(a.tap, b.tap) && close(a.shift, b.shift) && close(a.x, b.x));
            assert_eq!(a.rate_a, b.rate_a);
        }
        for (a, b) in case.generators.iter().zip(&again.generators) {
            match (&a.cost, &b.cost) {
                (CostFunction::Polynomial(x), CostFunction::Polynomial(y)) => {
                    assert!(x.iter().zip(y).all(|(u, v)| close(*u, *v)))
                }
                _ => panic!("cost kind changed"),
            }
        }
    }
}
