//! Reader for the MATPOWER case file subset documented in
//! `docs/matpower-format.md`.

use std::collections::HashMap;

use super::{Branch, Bus, Generator, GeneratorKind, Network};
use crate::error::{Error, Result};

const BUS_COLS: usize = 13;
const GEN_COLS: usize = 10;
const BRANCH_COLS: usize = 11;

/// Assigned values found in the file, keyed by the last component of the
/// assigned name (`mpc.bus` and `bus` both map to `bus`).
#[derive(Debug, Default)]
struct Assignments {
    scalars: HashMap<String, f64>,
    matrices: HashMap<String, Vec<Vec<f64>>>,
}

fn strip_comments(text: &str) -> String {
    let mut out = String::with_capacity(text.len());
    for line in text.lines() {
        let mut in_quote = false;
        for ch in line.chars() {
            match ch {
                '\'' => in_quote = !in_quote,
                '%' if !in_quote => break,
                _ => {}
            }
            out.push(ch);
        }
        out.push('\n');
    }
    out.replace("...\n", " ")
}

fn parse_number(tok: &str, context: &str) -> Result<f64> {
    match tok {
        "Inf" | "inf" => Ok(f64::INFINITY),
        "-Inf" | "-inf" => Ok(f64::NEG_INFINITY),
        _ => tok
            .parse::<f64>()
            .map_err(|_| Error::parse(context, format!("invalid number '{tok}'"))),
    }
}

fn parse_matrix(body: &str, name: &str) -> Result<Vec<Vec<f64>>> {
    let mut rows = Vec::new();
    for (r, row) in body.split([';', '\n']).enumerate() {
        let toks: Vec<&str> = row
            .split(|c: char| c.is_whitespace() || c == ',')
            .filter(|t| !t.is_empty())
            .collect();
        if toks.is_empty() {
            continue;
        }
        let ctx = format!("{name} row {}", r + 1);
        rows.push(toks.iter().map(|t| parse_number(t, &ctx)).collect::<Result<Vec<_>>>()?);
    }
    if let Some(w) = rows.first().map(Vec::len) {
        if let Some(bad) = rows.iter().position(|r| r.len() != w) {
            return Err(Error::parse(name, format!("row {} has {} columns, expected {w}", bad + 1, rows[bad].len())));
        }
    }
    Ok(rows)
}

fn find_closing(bytes: &[u8], open: usize, (lo, hi): (u8, u8)) -> Option<usize> {
    let mut depth = 0usize;
    let mut in_quote = false;
    for (i, &b) in bytes.iter().enumerate().skip(open) {
        if b == b'\'' {
            in_quote = !in_quote;
        } else if !in_quote && b == lo {
            depth += 1;
        } else if !in_quote && b == hi {
            depth -= 1;
            if depth == 0 {
                return Some(i);
            }
        }
    }
    None
}

fn scan(text: &str) -> Result<Assignments> {
    let clean = strip_comments(text);
    let bytes = clean.as_bytes();
    let mut out = Assignments::default();
    let mut i = 0;
    while i < bytes.len() {
        // Statement start: an identifier path followed by '='.
        let start = i;
        while i < bytes.len() && (bytes[i].is_ascii_alphanumeric() || bytes[i] == b'_' || bytes[i] == b'.') {
            i += 1;
        }
        let name = &clean[start..i];
        let mut j = i;
        while j < bytes.len() && (bytes[j] == b' ' || bytes[j] == b'\t') {
            j += 1;
        }
        let is_assign = !name.is_empty() && j < bytes.len() && bytes[j] == b'=' && bytes.get(j + 1) != Some(&b'=');
        if !is_assign {
            // Skip to the end of this statement.
            while i < bytes.len() && bytes[i] != b'\n' && bytes[i] != b';' {
                if bytes[i] == b'[' || bytes[i] == b'{' {
                    let pair = if bytes[i] == b'[' { (b'[', b']') } else { (b'{', b'}') };
                    i = find_closing(bytes, i, pair).unwrap_or(bytes.len() - 1);
                }
                i += 1;
            }
            i += 1;
            continue;
        }
        let key = name.rsplit('.').next().unwrap_or(name).to_string();
        j += 1;
        while j < bytes.len() && bytes[j].is_ascii_whitespace() {
            j += 1;
        }
        if j >= bytes.len() {
            return Err(Error::parse(&key, "missing value"));
        }
        match bytes[j] {
            b'[' => {
                let close = find_closing(bytes, j, (b'[', b']')).ok_or_else(|| Error::parse(&key, "unterminated matrix"))?;
                let m = parse_matrix(&clean[j + 1..close], &key)?;
                out.matrices.insert(key, m);
                i = close + 1;
            }
            b'{' => {
                let close = find_closing(bytes, j, (b'{', b'}')).ok_or_else(|| Error::parse(&key, "unterminated cell array"))?;
                i = close + 1;
            }
            _ => {
                let mut k = j;
                while k < bytes.len() && bytes[k] != b';' && bytes[k] != b'\n' {
                    k += 1;
                }
                let value = clean[j..k].trim();
                if !value.starts_with('\'') {
                    if let Ok(v) = parse_number(value, &key) {
                        out.scalars.insert(key, v);
                    }
                }
                i = k + 1;
            }
        }
    }
    Ok(out)
}

fn require<'a>(a: &'a Assignments, name: &str, min_cols: usize) -> Result<&'a Vec<Vec<f64>>> {
    let m = a
        .matrices
        .get(name)
        .ok_or_else(|| Error::parse(name, format!("missing '{name}' matrix")))?;
    if let Some(row) = m.first() {
        if row.len() < min_cols {
            return Err(Error::parse(name, format!("expected at least {min_cols} columns, found {}", row.len())));
        }
    }
    Ok(m)
}

fn as_id(v: f64, context: &str) -> Result<usize> {
    if v >= 1.0 && v.fract() == 0.0 {
        Ok(v as usize)
    } else {
        Err(Error::parse(context, format!("invalid id {v}")))
    }
}

/// Parse a MATPOWER case into a per-unit [`Network`].
///
/// Out-of-service branches and generators and isolated buses (type 4) are
/// dropped. Costs must be polynomial of degree at most two; the constant
/// coefficient is kept as [`Generator::cost_constant`]. All branches with a
/// nonzero `RATE_A` are flow limited.
pub fn parse_matpower_case(text: &str) -> Result<Network> {
    let a = scan(text)?;
    let base_mva = *a
        .scalars
        .get("baseMVA")
        .ok_or_else(|| Error::parse("baseMVA", "missing system base"))?;
    if !(base_mva > 0.0) {
        return Err(Error::parse("baseMVA", "system base must be positive"));
    }
    let bus_m = require(&a, "bus", BUS_COLS)?;
    let gen_m = require(&a, "gen", GEN_COLS)?;
    let branch_m = require(&a, "branch", BRANCH_COLS)?;
    let cost_m = require(&a, "gencost", 4)?;

    let mut buses = Vec::new();
    let mut index = HashMap::new();
    let mut reference = None;
    for (r, row) in bus_m.iter().enumerate() {
        let ctx = format!("bus row {}", r + 1);
        let id = as_id(row[0], &ctx)?;
        let kind = row[1] as i64;
        if kind == 4 {
            continue;
        }
        if index.insert(id, buses.len()).is_some() {
            return Err(Error::parse(ctx, format!("duplicate bus id {id}")));
        }
        if kind == 3 && reference.is_none() {
            reference = Some(buses.len());
        }
        buses.push(Bus {
            id,
            p_demand: row[2] / base_mva,
            q_demand: row[3] / base_mva,
            shunt_g: row[4] / base_mva,
            shunt_b: row[5] / base_mva,
            v_max: row[11],
            v_min: row[12],
        });
    }

    if cost_m.len() < gen_m.len() {
        return Err(Error::parse("gencost", format!("{} rows for {} generators", cost_m.len(), gen_m.len())));
    }
    let mut generators = Vec::new();
    for (r, row) in gen_m.iter().enumerate() {
        let ctx = format!("gen row {}", r + 1);
        if row[7] <= 0.0 {
            continue;
        }
        let bus_id = as_id(row[0], &ctx)?;
        let Some(&bus) = index.get(&bus_id) else {
            if bus_m.iter().any(|b| b[0] as usize == bus_id) {
                continue; // attached to an isolated bus
            }
            return Err(Error::parse(ctx, format!("unknown bus {bus_id}")));
        };
        let (alpha, beta, constant) = polynomial_cost(&cost_m[r], r, base_mva)?;
        generators.push(Generator {
            id: r + 1,
            bus,
            p_max: row[8] / base_mva,
            p_min: row[9] / base_mva,
            q_max: row[3] / base_mva,
            q_min: row[4] / base_mva,
            alpha,
            beta,
            cost_constant: constant,
            kind: Generator::classify_cost(alpha),
        });
    }

    let mut branches = Vec::new();
    for (r, row) in branch_m.iter().enumerate() {
        let ctx = format!("branch row {}", r + 1);
        if row[10] <= 0.0 {
            continue;
        }
        let (f, t) = (as_id(row[0], &ctx)?, as_id(row[1], &ctx)?);
        let (Some(&from), Some(&to)) = (index.get(&f), index.get(&t)) else {
            return Err(Error::parse(ctx, format!("in-service branch touches unknown or isolated bus ({f}, {t})")));
        };
        if from == to {
            return Err(Error::parse(ctx, "branch connects a bus to itself"));
        }
        let rate = row[5];
        branches.push(Branch {
            id: r + 1,
            from,
            to,
            r: row[2],
            x: row[3],
            b_charging: row[4],
            tap_ratio: if row[8] == 0.0 { 1.0 } else { row[8] },
            phase_shift: row[9].to_radians(),
            s_max: (rate > 0.0 && rate.is_finite()).then(|| rate / base_mva),
        });
    }

    let flow_limited = (0..branches.len()).filter(|&i| branches[i].s_max.is_some()).collect();
    let reference_bus = reference
        .or_else(|| generators.first().map(|g| g.bus))
        .unwrap_or(0);
    let net = Network {
        base_mva,
        buses,
        generators,
        branches,
        flow_limited,
        reference_bus,
    };
    net.validate()?;
    Ok(net)
}

/// Per-unit `(alpha, beta, constant)` from a polynomial gencost row.
fn polynomial_cost(row: &[f64], r: usize, base: f64) -> Result<(f64, f64, f64)> {
    let ctx = format!("gencost row {}", r + 1);
    match row[0] as i64 {
        1 => return Err(Error::parse(ctx, "piecewise-linear costs are not supported")),
        2 => {}
        m => return Err(Error::parse(ctx, format!("unknown cost model {m}"))),
    }
    let n = row[3] as usize;
    if n > 3 {
        return Err(Error::parse(ctx, format!("polynomial degree {} exceeds 2", n - 1)));
    }
    if row.len() < 4 + n {
        return Err(Error::parse(ctx, "too few cost coefficients"));
    }
    let c = &row[4..4 + n];
    let (c2, c1, c0) = match n {
        3 => (c[0], c[1], c[2]),
        2 => (0.0, c[0], c[1]),
        1 => (0.0, 0.0, c[0]),
        _ => (0.0, 0.0, 0.0),
    };
    if c2 < 0.0 {
        return Err(Error::parse(ctx, "negative quadratic cost coefficient"));
    }
    Ok((c2 * base * base, c1 * base, c0))
}

impl GeneratorKind {
    pub fn as_str(self) -> &'static str {
        match self {
            GeneratorKind::Fixed => "fixed",
            GeneratorKind::Linear => "linear",
            GeneratorKind::Quadratic => "quadratic",
        }
    }
}
