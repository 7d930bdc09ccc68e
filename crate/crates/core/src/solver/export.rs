//! Writers for the SDPA-sparse and CBF (version 3) formats.
//!
//! Both writers take the problem `min hᵀz` s.t. `constant + Σ g z = 0`,
//! `z ∈ K`. Hermitian blocks are realized through the real embedding first.

use std::fmt::Write as _;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::conversion::real_embedding;
use crate::error::{Error, Result};
use crate::formulation::{symmetric_coord, ConeLp, ConeSegment};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ExportFormat {
    SdpaSparse,
    Cbf,
}

impl FromStr for ExportFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "sdpa-sparse" | "sdpa" | "dat-s" => Ok(ExportFormat::SdpaSparse),
            "cbf" => Ok(ExportFormat::Cbf),
            _ => Err(Error::parse("export format", format!("unknown format '{s}'"))),
        }
    }
}

/// Export in the chosen format; `header` lines become leading comments.
pub fn export_conelp(lp: &ConeLp, format: ExportFormat, header: &[String]) -> Result<String> {
    let embedded;
    let (lp, note) = if lp.cone.segments.iter().any(|s| matches!(s, ConeSegment::HermitianPsd(_))) {
        embedded = real_embedding(lp).lp;
        (&embedded, Some("hermitian blocks realized as real symmetric blocks of twice the order"))
    } else {
        (lp, None)
    };
    let mut lines: Vec<String> = header.to_vec();
    lines.extend(note.map(String::from));
    match format {
        ExportFormat::SdpaSparse => export_sdpa(lp, &lines),
        ExportFormat::Cbf => export_cbf(lp, &lines),
    }
}

/// Shortest round-trip decimal; exponent notation outside `[1e-4, 1e15)`.
fn num(v: f64) -> String {
    let a = v.abs();
    if v == 0.0 {
        "0".into()
    } else if (1e-4..1e15).contains(&a) {
        format!("{v}")
    } else {
        format!("{v:e}")
    }
}

/// Coordinate of each segment as (segment index, local index).
fn locate(lp: &ConeLp) -> Vec<(usize, usize)> {
    let mut out = Vec::with_capacity(lp.num_vars());
    for (b, seg) in lp.cone.segments.iter().enumerate() {
        for l in 0..seg.dim() {
            out.push((b, l));
        }
    }
    out
}

/// `(i, j)`, `i ≤ j`, of packed symmetric coordinate `l`.
fn sym_entry(l: usize) -> (usize, usize) {
    let mut j = 0;
    while symmetric_coord(0, j + 1) <= l {
        j += 1;
    }
    (l - symmetric_coord(0, j), j)
}

/// SDPA-sparse: the problem is written in SDPA's dual form
/// `max F₀•Y` s.t. `F_i•Y = c_i`, `Y ⪰ 0`, with `Y = z`, `F₀ = −h`,
/// `F_i = g_i`, `c_i = −constant_i`. Nonnegative segments form one diagonal
/// block; free and second-order segments are rejected.
pub fn export_sdpa(lp: &ConeLp, header: &[String]) -> Result<String> {
    let mut block_of = Vec::new();
    let mut structs = Vec::new();
    let mut lp_block = None;
    let mut lp_len = 0;
    let mut lp_start = Vec::new();
    for seg in &lp.cone.segments {
        match *seg {
            ConeSegment::NonNeg(n) => {
                if lp_block.is_none() {
                    lp_block = Some(structs.len());
                    structs.push(0i64);
                }
                lp_start.push(lp_len);
                block_of.push(lp_block.unwrap());
                lp_len += n;
            }
            ConeSegment::SymmetricPsd(q) => {
                lp_start.push(0);
                block_of.push(structs.len());
                structs.push(q as i64);
            }
            s => return Err(Error::UnsupportedSegment(format!("{} in sdpa-sparse", s.name()))),
        }
    }
    if let Some(b) = lp_block {
        structs[b] = -(lp_len as i64);
    }
    let loc = locate(lp);
    // (block, i, j) 1-based with i ≤ j, and the matrix entry value.
    let entry = |k: usize, v: f64| -> (usize, usize, usize, f64) {
        let (seg, l) = loc[k];
        let blk = block_of[seg] + 1;
        match lp.cone.segments[seg] {
            ConeSegment::NonNeg(_) => {
                let d = lp_start[seg] + l + 1;
                (blk, d, d, v)
            }
            _ => {
                let (i, j) = sym_entry(l);
                (blk, i + 1, j + 1, if i == j { v } else { v / 2.0 })
            }
        }
    };
    let mut out = String::new();
    for h in header {
        writeln!(out, "* {h}").unwrap();
    }
    writeln!(out, "* objective offset {}", num(lp.objective_offset)).unwrap();
    writeln!(out, "{}", lp.num_rows()).unwrap();
    writeln!(out, "{}", structs.len()).unwrap();
    writeln!(out, "{}", structs.iter().map(|s| s.to_string()).collect::<Vec<_>>().join(" ")).unwrap();
    writeln!(out, "{}", lp.rows.iter().map(|r| num(-r.constant)).collect::<Vec<_>>().join(" ")).unwrap();
    let mut emit = |mat: usize, terms: Vec<(usize, f64)>| {
        let mut entries: Vec<(usize, usize, usize, f64)> = terms.into_iter().filter(|t| t.1 != 0.0).map(|(k, v)| entry(k, v)).collect();
        entries.sort_by_key(|a| (a.0, a.1, a.2));
        let mut merged: Vec<(usize, usize, usize, f64)> = Vec::new();
        for e in entries {
            match merged.last_mut() {
                Some(m) if (m.0, m.1, m.2) == (e.0, e.1, e.2) => m.3 += e.3,
                _ => merged.push(e),
            }
        }
        for (b, i, j, v) in merged {
            if v != 0.0 {
                writeln!(out, "{mat} {b} {i} {j} {}", num(v)).unwrap();
            }
        }
    };
    emit(0, lp.objective.iter().enumerate().map(|(k, &h)| (k, -h)).collect());
    for (r, row) in lp.rows.iter().enumerate() {
        emit(r + 1, row.terms.clone());
    }
    Ok(out)
}

/// CBF version 3: scalar segments become `VAR` cones (`F`, `L+`, `Q`),
/// symmetric blocks become `PSDVAR`s, and all rows one `L=` cone with
/// `BCOORD` holding the constants.
pub fn export_cbf(lp: &ConeLp, header: &[String]) -> Result<String> {
    let loc = locate(lp);
    let mut scalar_index = vec![usize::MAX; lp.num_vars()];
    let mut psd_index = vec![usize::MAX; lp.cone.segments.len()];
    let mut var_cones = Vec::new();
    let mut psd_orders = Vec::new();
    let mut nscalar = 0;
    for ((off, seg), b) in lp.cone.with_offsets().zip(0..) {
        let (name, count) = match seg {
            ConeSegment::Free(n) => ("F", vec![n]),
            ConeSegment::NonNeg(n) => ("L+", vec![n]),
            ConeSegment::Soc { dim, count } => ("Q", vec![dim; count]),
            ConeSegment::SymmetricPsd(q) => {
                psd_index[b] = psd_orders.len();
                psd_orders.push(q);
                continue;
            }
            ConeSegment::HermitianPsd(_) => {
                return Err(Error::UnsupportedSegment("hermitian_psd in cbf (apply real_embedding first)".into()))
            }
        };
        for k in off..off + seg.dim() {
            scalar_index[k] = nscalar;
            nscalar += 1;
        }
        for d in count {
            var_cones.push((name, d));
        }
    }
    // Merge adjacent cones of the same linear kind.
    let mut merged: Vec<(&str, usize)> = Vec::new();
    for (name, d) in var_cones {
        match merged.last_mut() {
            Some(last) if last.0 == name && name != "Q" => last.1 += d,
            _ => merged.push((name, d)),
        }
    }
    let m = lp.num_rows();
    let split = |terms: &[(usize, f64)]| {
        let mut a = Vec::new();
        let mut f = Vec::new();
        for &(k, v) in terms {
            if v == 0.0 {
                continue;
            }
            let (seg, l) = loc[k];
            if psd_index[seg] == usize::MAX {
                a.push((scalar_index[k], v));
            } else {
                let (i, j) = sym_entry(l);
                f.push((psd_index[seg], j, i, if i == j { v } else { v / 2.0 }));
            }
        }
        a.sort_by_key(|t| t.0);
        f.sort_by_key(|t| (t.0, t.1, t.2));
        (a, f)
    };
    let mut out = String::new();
    for h in header {
        writeln!(out, "# {h}").unwrap();
    }
    out.push_str("VER\n3\n\nOBJSENSE\nMIN\n\n");
    if !psd_orders.is_empty() {
        writeln!(out, "PSDVAR\n{}", psd_orders.len()).unwrap();
        for q in &psd_orders {
            writeln!(out, "{q}").unwrap();
        }
        out.push('\n');
    }
    if nscalar > 0 {
        writeln!(out, "VAR\n{} {}", nscalar, merged.len()).unwrap();
        for (name, d) in &merged {
            writeln!(out, "{name} {d}").unwrap();
        }
        out.push('\n');
    }
    if m > 0 {
        writeln!(out, "CON\n{m} 1\nL= {m}\n").unwrap();
    }
    let obj_terms: Vec<(usize, f64)> = lp.objective.iter().copied().enumerate().collect();
    let (oa, of) = split(&obj_terms);
    if !of.is_empty() {
        writeln!(out, "OBJFCOORD\n{}", of.len()).unwrap();
        for (j, k, l, v) in of {
            writeln!(out, "{j} {k} {l} {}", num(v)).unwrap();
        }
        out.push('\n');
    }
    if !oa.is_empty() {
        writeln!(out, "OBJACOORD\n{}", oa.len()).unwrap();
        for (j, v) in oa {
            writeln!(out, "{j} {}", num(v)).unwrap();
        }
        out.push('\n');
    }
    if lp.objective_offset != 0.0 {
        writeln!(out, "OBJBCOORD\n{}\n", num(lp.objective_offset)).unwrap();
    }
    let mut fc = Vec::new();
    let mut ac = Vec::new();
    for (r, row) in lp.rows.iter().enumerate() {
        let mut terms = row.terms.clone();
        terms.sort_by_key(|t| t.0);
        let mut dedup: Vec<(usize, f64)> = Vec::new();
        for (k, v) in terms {
            match dedup.last_mut() {
                Some(d) if d.0 == k => d.1 += v,
                _ => dedup.push((k, v)),
            }
        }
        let (a, f) = split(&dedup);
        ac.extend(a.into_iter().map(|(j, v)| (r, j, v)));
        fc.extend(f.into_iter().map(|(j, k, l, v)| (r, j, k, l, v)));
    }
    if !fc.is_empty() {
        writeln!(out, "FCOORD\n{}", fc.len()).unwrap();
        for (i, j, k, l, v) in fc {
            writeln!(out, "{i} {j} {k} {l} {}", num(v)).unwrap();
        }
        out.push('\n');
    }
    if !ac.is_empty() {
        writeln!(out, "ACOORD\n{}", ac.len()).unwrap();
        for (i, j, v) in ac {
            writeln!(out, "{i} {j} {}", num(v)).unwrap();
        }
        out.push('\n');
    }
    let bc: Vec<(usize, f64)> = lp.rows.iter().enumerate().filter(|(_, r)| r.constant != 0.0).map(|(i, r)| (i, r.constant)).collect();
    if !bc.is_empty() {
        writeln!(out, "BCOORD\n{}", bc.len()).unwrap();
        for (i, v) in bc {
            writeln!(out, "{i} {}", num(v)).unwrap();
        }
        out.push('\n');
    }
    Ok(out)
}
