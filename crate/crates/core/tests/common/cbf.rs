//! Minimal CBF version 3 reader used as an oracle for the writer.

#![allow(dead_code)]

use std::collections::BTreeMap;

use csdr_core::formulation::{unpack_symmetric, ConeLp, ConeSegment};

#[derive(Debug, Default)]
pub struct CbfProblem {
    pub version: u32,
    pub minimize: bool,
    pub psd_orders: Vec<usize>,
    pub num_scalar: usize,
    pub var_cones: Vec<(String, usize)>,
    pub num_cons: usize,
    pub con_cones: Vec<(String, usize)>,
    /// `(psd var, k, l, value)` with `k ≥ l`.
    pub obj_f: Vec<(usize, usize, usize, f64)>,
    pub obj_a: Vec<(usize, f64)>,
    pub obj_b: f64,
    pub f: Vec<(usize, usize, usize, usize, f64)>,
    pub a: Vec<(usize, usize, f64)>,
    pub b: Vec<(usize, f64)>,
}

fn ints(line: &str) -> Vec<usize> {
    line.split_whitespace().map(|t| t.parse().expect("integer")).collect()
}

pub fn read_cbf(text: &str) -> CbfProblem {
    let mut lines = text.lines().map(str::trim).filter(|l| !l.is_empty() && !l.starts_with('#'));
    let mut p = CbfProblem::default();
    while let Some(key) = lines.next() {
        let mut next = || lines.next().expect("truncated section");
        match key {
            "VER" => p.version = next().parse().unwrap(),
            "OBJSENSE" => p.minimize = next() == "MIN",
            "PSDVAR" => {
                let n: usize = next().parse().unwrap();
                p.psd_orders = (0..n).map(|_| next().parse().unwrap()).collect();
            }
            "VAR" | "CON" => {
                let head = ints(next());
                let cones: Vec<(String, usize)> = (0..head[1])
                    .map(|_| {
                        let mut t = next().split_whitespace();
                        (t.next().unwrap().to_string(), t.next().unwrap().parse().unwrap())
                    })
                    .collect();
                assert_eq!(cones.iter().map(|c| c.1).sum::<usize>(), head[0], "{key} cone sizes");
                if key == "VAR" {
                    p.num_scalar = head[0];
                    p.var_cones = cones;
                } else {
                    p.num_cons = head[0];
                    p.con_cones = cones;
                }
            }
            "OBJFCOORD" | "OBJACOORD" | "FCOORD" | "ACOORD" | "BCOORD" => {
                let n: usize = next().parse().unwrap();
                for _ in 0..n {
                    let t: Vec<&str> = next().split_whitespace().collect();
                    let (idx, v) = t.split_at(t.len() - 1);
                    let idx: Vec<usize> = idx.iter().map(|s| s.parse().unwrap()).collect();
                    let v: f64 = v[0].parse().unwrap();
                    match key {
                        "OBJFCOORD" => p.obj_f.push((idx[0], idx[1], idx[2], v)),
                        "OBJACOORD" => p.obj_a.push((idx[0], v)),
                        "FCOORD" => p.f.push((idx[0], idx[1], idx[2], idx[3], v)),
                        "ACOORD" => p.a.push((idx[0], idx[1], v)),
                        _ => p.b.push((idx[0], v)),
                    }
                }
            }
            "OBJBCOORD" => p.obj_b = next().parse().unwrap(),
            other => panic!("unknown keyword {other}"),
        }
    }
    p
}

impl CbfProblem {
    pub fn nonzeros(&self) -> usize {
        self.obj_f.len() + self.obj_a.len() + usize::from(self.obj_b != 0.0) + self.f.len() + self.a.len() + self.b.len()
    }

    /// Row values `Σ a x + Σ F•X + b` and the objective at the given point.
    pub fn evaluate(&self, x: &[f64], mats: &[nalgebra::DMatrix<f64>]) -> (Vec<f64>, f64) {
        let frob = |j: usize, k: usize, l: usize, v: f64| if k == l { v * mats[j][(k, l)] } else { 2.0 * v * mats[j][(k, l)] };
        let mut rows = vec![0.0; self.num_cons];
        for &(i, j, v) in &self.a {
            rows[i] += v * x[j];
        }
        for &(i, j, k, l, v) in &self.f {
            rows[i] += frob(j, k, l, v);
        }
        for &(i, v) in &self.b {
            rows[i] += v;
        }
        let mut obj = self.obj_b;
        for &(j, v) in &self.obj_a {
            obj += v * x[j];
        }
        for &(j, k, l, v) in &self.obj_f {
            obj += frob(j, k, l, v);
        }
        (rows, obj)
    }
}

/// Split a point of a real cone LP into the CBF scalar vector and PSD
/// matrices, in segment order.
pub fn split_point(lp: &ConeLp, z: &[f64]) -> (Vec<f64>, Vec<nalgebra::DMatrix<f64>>) {
    let mut x = Vec::new();
    let mut mats = Vec::new();
    for (off, seg) in lp.cone.with_offsets() {
        match seg {
            ConeSegment::SymmetricPsd(q) => mats.push(unpack_symmetric(&z[off..off + seg.dim()], q)),
            _ => x.extend_from_slice(&z[off..off + seg.dim()]),
        }
    }
    (x, mats)
}

/// Cone counts per CBF name over the scalar variables.
pub fn cone_totals(p: &CbfProblem) -> BTreeMap<String, usize> {
    let mut out = BTreeMap::new();
    for (name, d) in &p.var_cones {
        *out.entry(name.clone()).or_insert(0) += d;
    }
    out
}
