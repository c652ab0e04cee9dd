//! Label alignment against a reference allocation.

use pathfinding::matrix::Matrix;
use pathfinding::prelude::kuhn_munkres;
use serde::{Deserialize, Serialize};

use crate::atoms::Atom;
use crate::error::{Error, Result};
use crate::sampler::ChainTrace;

/// Trace after label alignment. Slot `k` of draw `t` is the atom mapped
/// onto reference label `k`; slots with no instantiated atom at that draw
/// carry a NaN weight and no atom.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Relabeled {
    pub reference: usize,
    pub permutations: Vec<Vec<usize>>,
    pub z: Vec<Vec<usize>>,
    pub weights: Vec<Vec<Vec<f64>>>,
    pub atoms: Vec<Vec<Option<Atom>>>,
}

/// Permutation `sigma` of `0..size` maximizing agreement of `sigma(z)` with
/// `reference`; ties favour leaving labels in place.
fn align(z: &[usize], reference: &[usize], size: usize) -> Vec<usize> {
    let mut c = vec![0i64; size * size];
    for (&a, &b) in z.iter().zip(reference) {
        c[a * size + b] += 1;
    }
    let big = size as i64 + 1;
    let w: Vec<i64> = c
        .iter()
        .enumerate()
        .map(|(idx, &v)| v * big + i64::from(idx / size == idx % size))
        .collect();
    let m = Matrix::from_vec(size, size, w).expect("square matrix");
    kuhn_munkres(&m).1
}

/// Permutations aligning each label vector with `labels[reference]`.
pub fn ecr_relabel_labels(labels: &[Vec<usize>], reference: usize) -> Result<Vec<Vec<usize>>> {
    let r = labels
        .get(reference)
        .ok_or_else(|| Error::Validation(format!("reference draw {reference} out of range")))?;
    let r_size = r.iter().max().map_or(0, |m| m + 1);
    labels
        .iter()
        .map(|z| {
            if z.len() != r.len() {
                return Err(Error::Validation("label vectors differ in length".into()));
            }
            let size = r_size.max(z.iter().max().map_or(0, |m| m + 1)).max(1);
            Ok(align(z, r, size))
        })
        .collect()
}

/// Align every kept draw to a reference draw, by default the one with the
/// highest log joint density.
pub fn ecr_relabel(trace: &ChainTrace, reference: Option<usize>) -> Result<Relabeled> {
    if trace.is_empty() {
        return Err(Error::Validation("cannot relabel an empty trace".into()));
    }
    let reference = match reference {
        Some(r) if r < trace.len() => r,
        Some(r) => return Err(Error::Validation(format!("reference draw {r} out of range"))),
        None => trace
            .log_joint
            .iter()
            .enumerate()
            .fold((0, f64::NEG_INFINITY), |best, (t, &v)| if v > best.1 { (t, v) } else { best })
            .0,
    };
    let k_ref = trace.weights[reference].first().map_or(0, Vec::len);
    let r = &trace.z[reference];
    let mut out = Relabeled {
        reference,
        permutations: Vec::with_capacity(trace.len()),
        z: Vec::with_capacity(trace.len()),
        weights: Vec::with_capacity(trace.len()),
        atoms: Vec::with_capacity(trace.len()),
    };
    for t in 0..trace.len() {
        let k_t = trace.weights[t].first().map_or(0, Vec::len);
        let z = &trace.z[t];
        let used = z.iter().max().map_or(0, |m| m + 1);
        let size = k_t.max(k_ref).max(used).max(1);
        let sigma = align(z, r, size);
        out.z.push(z.iter().map(|&l| sigma[l]).collect());
        out.weights.push(
            trace.weights[t]
                .iter()
                .map(|row| {
                    let mut new = vec![f64::NAN; size];
                    for (a, &w) in row.iter().enumerate() {
                        new[sigma[a]] = w;
                    }
                    new
                })
                .collect(),
        );
        let mut atoms = vec![None; size];
        if let Some(src) = trace.atoms.get(t) {
            for (a, atom) in src.iter().enumerate() {
                atoms[sigma[a]] = Some(atom.clone());
            }
        }
        out.atoms.push(atoms);
        out.permutations.push(sigma);
    }
    Ok(out)
}
