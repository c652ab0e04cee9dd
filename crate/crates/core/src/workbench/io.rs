//! CSV layouts for datasets, truth files and chain traces.

use std::collections::HashMap;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use nalgebra::{DMatrix, DVector};

use crate::atoms::Atom;
use crate::data::{GroupedDataset, Observations};
use crate::error::{Error, Result};
use crate::sampler::ChainTrace;

pub const LABELS_FILE: &str = "labels.csv";
pub const WEIGHTS_FILE: &str = "weights.csv";
pub const ATOMS_FILE: &str = "atoms.csv";
pub const HYPER_FILE: &str = "hyper.csv";
pub const LATENT_FILE: &str = "latent.csv";

/// 17 significant digits; exact zero as the literal `0`.
pub fn fmt_f64(x: f64) -> String {
    if x == 0.0 {
        "0".to_string()
    } else {
        format!("{x:.16e}")
    }
}

pub fn parse_f64(s: &str, what: &str) -> Result<f64> {
    s.trim()
        .parse::<f64>()
        .map_err(|_| Error::Validation(format!("{what}: cannot parse {s:?} as a number")))
}

fn bad_row(row: usize, msg: impl std::fmt::Display) -> Error {
    Error::Validation(format!("row {row}: {msg}"))
}

fn writer(path: &Path) -> Result<csv::Writer<BufWriter<File>>> {
    Ok(csv::WriterBuilder::new().from_writer(BufWriter::new(File::create(path)?)))
}

fn reader(path: &Path) -> Result<csv::Reader<File>> {
    csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(|e| match e.kind() {
            csv::ErrorKind::Io(_) => Error::Usage(format!("cannot open {}: {e}", path.display())),
            _ => Error::Csv(e),
        })
}

/// Reads a long-format dataset. The header decides the observation kind:
/// `group,value`, `group,count` or `group,v1,...,vq`. Group ids are mapped to
/// groups in order of first appearance.
pub fn read_dataset(path: &Path) -> Result<GroupedDataset> {
    let mut rdr = reader(path)?;
    let header: Vec<String> = rdr.headers()?.iter().map(str::to_lowercase).collect();
    if header.first().map(String::as_str) != Some("group") || header.len() < 2 {
        return Err(Error::Validation(format!(
            "{}: header must start with `group` followed by value columns",
            path.display()
        )));
    }
    let cols = &header[1..];
    enum Kind {
        Value,
        Count,
        Vector(usize),
    }
    let kind = if cols == ["value"] {
        Kind::Value
    } else if cols == ["count"] {
        Kind::Count
    } else if cols.iter().enumerate().all(|(i, c)| *c == format!("v{}", i + 1)) {
        Kind::Vector(cols.len())
    } else {
        return Err(Error::Validation(format!(
            "{}: unrecognised columns {cols:?}; expected value, count or v1..vq",
            path.display()
        )));
    };

    let mut names: Vec<String> = Vec::new();
    let mut index: HashMap<String, usize> = HashMap::new();
    let mut uni: Vec<Vec<f64>> = Vec::new();
    let mut multi: Vec<Vec<DVector<f64>>> = Vec::new();
    let mut counts: Vec<Vec<u64>> = Vec::new();
    for (r, rec) in rdr.records().enumerate() {
        let row = r + 1;
        let rec = rec.map_err(|e| bad_row(row, e))?;
        if rec.len() != header.len() {
            return Err(bad_row(row, format!("expected {} fields, found {}", header.len(), rec.len())));
        }
        let g = rec[0].to_string();
        if g.is_empty() {
            return Err(bad_row(row, "empty group id"));
        }
        let j = *index.entry(g.clone()).or_insert_with(|| {
            names.push(g);
            uni.push(Vec::new());
            multi.push(Vec::new());
            counts.push(Vec::new());
            names.len() - 1
        });
        let num = |s: &str| -> Result<f64> {
            let v: f64 = s.parse().map_err(|_| bad_row(row, format!("{s:?} is not a number")))?;
            if v.is_finite() {
                Ok(v)
            } else {
                Err(bad_row(row, format!("non-finite value {s:?}")))
            }
        };
        match kind {
            Kind::Value => uni[j].push(num(&rec[1])?),
            Kind::Count => {
                let c = rec[1]
                    .parse::<u64>()
                    .map_err(|_| bad_row(row, format!("{:?} is not a non-negative integer count", &rec[1])))?;
                counts[j].push(c);
            }
            Kind::Vector(q) => {
                let v = (1..=q).map(|c| num(&rec[c])).collect::<Result<Vec<_>>>()?;
                multi[j].push(DVector::from_vec(v));
            }
        }
    }
    if names.is_empty() {
        return Err(Error::Validation(format!("{}: no observations", path.display())));
    }
    let obs = match kind {
        Kind::Value => Observations::Univariate(uni),
        Kind::Count => Observations::Counts(counts),
        Kind::Vector(dim) => Observations::Multivariate { dim, groups: multi },
    };
    let ds = GroupedDataset { group_names: names, obs };
    ds.validate()?;
    Ok(ds)
}

pub fn write_dataset(path: &Path, data: &GroupedDataset) -> Result<()> {
    let mut w = writer(path)?;
    match &data.obs {
        Observations::Univariate(g) => {
            w.write_record(["group", "value"])?;
            for (j, grp) in g.iter().enumerate() {
                for v in grp {
                    w.write_record([data.group_names[j].clone(), fmt_f64(*v)])?;
                }
            }
        }
        Observations::Counts(g) => {
            w.write_record(["group", "count"])?;
            for (j, grp) in g.iter().enumerate() {
                for v in grp {
                    w.write_record([data.group_names[j].clone(), v.to_string()])?;
                }
            }
        }
        Observations::Multivariate { dim, groups } => {
            let mut h = vec!["group".to_string()];
            h.extend((1..=*dim).map(|c| format!("v{c}")));
            w.write_record(&h)?;
            for (j, grp) in groups.iter().enumerate() {
                for v in grp {
                    let mut r = vec![data.group_names[j].clone()];
                    r.extend(v.iter().map(|x| fmt_f64(*x)));
                    w.write_record(&r)?;
                }
            }
        }
    }
    w.flush()?;
    Ok(())
}

/// Truth labels as `group,obs,component` with 1-based `obs` within group and component.
pub fn write_truth(path: &Path, data: &GroupedDataset, truth: &[usize]) -> Result<()> {
    let mut w = writer(path)?;
    w.write_record(["group", "obs", "component"])?;
    let mut i = 0;
    for j in 0..data.n_groups() {
        for o in 0..data.group_len(j) {
            w.write_record([data.group_names[j].clone(), (o + 1).to_string(), (truth[i] + 1).to_string()])?;
            i += 1;
        }
    }
    w.flush()?;
    Ok(())
}

/// Truth components in file order, 0-based.
pub fn read_truth(path: &Path) -> Result<Vec<usize>> {
    let mut rdr = reader(path)?;
    let h = rdr.headers()?.clone();
    let col = h
        .iter()
        .position(|c| c == "component")
        .ok_or_else(|| Error::Validation(format!("{}: missing `component` column", path.display())))?;
    let mut out = Vec::new();
    for (r, rec) in rdr.records().enumerate() {
        let rec = rec.map_err(|e| bad_row(r + 1, e))?;
        let c: usize = rec
            .get(col)
            .and_then(|s| s.parse().ok())
            .filter(|&c: &usize| c >= 1)
            .ok_or_else(|| bad_row(r + 1, "component must be a positive integer"))?;
        out.push(c - 1);
    }
    Ok(out)
}

/// Square matrix without a header.
pub fn write_matrix(path: &Path, m: &DMatrix<f64>) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    for r in 0..m.nrows() {
        let row: Vec<String> = (0..m.ncols()).map(|c| fmt_f64(m[(r, c)])).collect();
        writeln!(w, "{}", row.join(","))?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_matrix(path: &Path) -> Result<DMatrix<f64>> {
    let mut rdr = csv::ReaderBuilder::new().has_headers(false).from_path(path)?;
    let mut rows: Vec<Vec<f64>> = Vec::new();
    for (r, rec) in rdr.records().enumerate() {
        let rec = rec.map_err(|e| bad_row(r + 1, e))?;
        rows.push(rec.iter().map(|s| parse_f64(s, "matrix entry")).collect::<Result<_>>()?);
    }
    let n = rows.len();
    let m = rows.first().map_or(0, Vec::len);
    if rows.iter().any(|r| r.len() != m) {
        return Err(Error::Validation(format!("{}: ragged matrix", path.display())));
    }
    Ok(DMatrix::from_fn(n, m, |r, c| rows[r][c]))
}

/// Writes the label, weight, atom and hyperparameter traces (and latent
/// values when recorded) into `dir`.
pub fn write_trace(dir: &Path, trace: &ChainTrace) -> Result<()> {
    std::fs::create_dir_all(dir)?;
    let n = trace.n_obs();

    let mut w = writer(&dir.join(LABELS_FILE))?;
    let mut h = vec!["iter".to_string()];
    h.extend((1..=n).map(|i| format!("o{i}")));
    w.write_record(&h)?;
    for (t, z) in trace.z.iter().enumerate() {
        let mut r = vec![trace.iterations[t].to_string()];
        r.extend(z.iter().map(usize::to_string));
        w.write_record(&r)?;
    }
    w.flush()?;

    let mut w = writer(&dir.join(WEIGHTS_FILE))?;
    w.write_record(["iter", "group", "atom", "weight"])?;
    for (t, wt) in trace.weights.iter().enumerate() {
        let it = trace.iterations[t].to_string();
        for (j, row) in wt.iter().enumerate() {
            for (k, &x) in row.iter().enumerate() {
                w.write_record([it.as_str(), &(j + 1).to_string(), &k.to_string(), &fmt_f64(x)])?;
            }
        }
    }
    w.flush()?;

    let q = trace.atoms.iter().flatten().next().map_or(1, |a| match a {
        Atom::Univariate { .. } => 1,
        Atom::Multivariate { mu, .. } => mu.len(),
    });
    let mut w = writer(&dir.join(ATOMS_FILE))?;
    let mut h = vec!["iter".to_string(), "atom".to_string()];
    if q == 1 {
        h.extend(["mu".to_string(), "var".to_string()]);
    } else {
        h.extend((1..=q).map(|c| format!("mu{c}")));
        for r in 1..=q {
            h.extend((1..=q).map(|c| format!("cov{r}_{c}")));
        }
    }
    w.write_record(&h)?;
    for (t, set) in trace.atoms.iter().enumerate() {
        for (k, a) in set.iter().enumerate() {
            let mut r = vec![trace.iterations[t].to_string(), k.to_string()];
            r.extend(a.to_flat().into_iter().map(fmt_f64));
            w.write_record(&r)?;
        }
    }
    w.flush()?;

    let jn = trace.p.first().map_or(trace.n_groups(), Vec::len);
    let mut w = writer(&dir.join(HYPER_FILE))?;
    let mut h: Vec<String> = ["iter", "alpha0", "gamma", "log_joint"].map(String::from).to_vec();
    h.extend((1..=jn).map(|j| format!("p{j}")));
    w.write_record(&h)?;
    for t in 0..trace.len() {
        let opt = |v: &Vec<f64>| v.get(t).map_or(String::new(), |x| fmt_f64(*x));
        let mut r = vec![trace.iterations[t].to_string(), opt(&trace.alpha0), opt(&trace.gamma), opt(&trace.log_joint)];
        r.extend(trace.p[t].iter().map(|x| fmt_f64(*x)));
        w.write_record(&r)?;
    }
    w.flush()?;

    if !trace.latent_y.is_empty() {
        let mut w = writer(&dir.join(LATENT_FILE))?;
        let mut h = vec!["iter".to_string()];
        h.extend((1..=n).map(|i| format!("y{i}")));
        w.write_record(&h)?;
        for (t, y) in trace.latent_y.iter().enumerate() {
            let mut r = vec![trace.iterations[t].to_string()];
            r.extend(y.iter().map(|x| fmt_f64(*x)));
            w.write_record(&r)?;
        }
        w.flush()?;
    }
    Ok(())
}

fn records(path: &Path) -> Result<Vec<csv::StringRecord>> {
    let mut rdr = reader(path)?;
    rdr.records()
        .enumerate()
        .map(|(r, x)| x.map_err(|e| bad_row(r + 1, e)))
        .collect()
}

fn field<T: std::str::FromStr>(rec: &csv::StringRecord, c: usize, row: usize) -> Result<T> {
    rec.get(c)
        .and_then(|s| s.parse().ok())
        .ok_or_else(|| bad_row(row, format!("bad value in column {}", c + 1)))
}

/// Reads the trace files written by [`write_trace`]. `model`, group sizes
/// and acceptance counts are not stored in the CSVs and are supplied by the
/// caller (usually from the run manifest).
pub fn read_trace(dir: &Path, model: &str, group_sizes: &[usize]) -> Result<ChainTrace> {
    let mut tr = ChainTrace { model: model.to_string(), group_sizes: group_sizes.to_vec(), ..Default::default() };
    let n: usize = group_sizes.iter().sum();
    let mut pos: HashMap<usize, usize> = HashMap::new();
    for (r, rec) in records(&dir.join(LABELS_FILE))?.iter().enumerate() {
        if rec.len() != n + 1 {
            return Err(bad_row(r + 1, format!("labels row has {} fields, expected {}", rec.len(), n + 1)));
        }
        let it: usize = field(rec, 0, r + 1)?;
        pos.insert(it, tr.iterations.len());
        tr.iterations.push(it);
        tr.z.push((1..=n).map(|c| field(rec, c, r + 1)).collect::<Result<_>>()?);
    }
    let t_len = tr.iterations.len();
    let slot = |it: usize, row: usize| {
        pos.get(&it).copied().ok_or_else(|| bad_row(row, format!("iteration {it} not in labels trace")))
    };

    let j_len = group_sizes.len();
    tr.weights = vec![vec![Vec::new(); j_len]; t_len];
    for (r, rec) in records(&dir.join(WEIGHTS_FILE))?.iter().enumerate() {
        let t = slot(field(rec, 0, r + 1)?, r + 1)?;
        let j: usize = field(rec, 1, r + 1)?;
        let k: usize = field(rec, 2, r + 1)?;
        if j == 0 || j > j_len || k != tr.weights[t][j - 1].len() {
            return Err(bad_row(r + 1, "weights rows out of order"));
        }
        tr.weights[t][j - 1].push(parse_f64(&rec[3], "weight")?);
    }

    let mut rdr = reader(&dir.join(ATOMS_FILE))?;
    let width = rdr.headers()?.len() - 2;
    let q = if width == 2 { 1 } else { ((1.0 + 4.0 * width as f64).sqrt() as usize - 1) / 2 };
    tr.atoms = vec![Vec::new(); t_len];
    for (r, rec) in rdr.records().enumerate() {
        let rec = rec.map_err(|e| bad_row(r + 1, e))?;
        let t = slot(field(&rec, 0, r + 1)?, r + 1)?;
        let v: Vec<f64> = (2..rec.len()).map(|c| parse_f64(&rec[c], "atom parameter")).collect::<Result<_>>()?;
        let a = Atom::from_flat(q, &v).ok_or_else(|| bad_row(r + 1, "atom row has the wrong width"))?;
        tr.atoms[t].push(a);
    }

    let opt = |s: &str| -> Result<Option<f64>> {
        if s.is_empty() {
            Ok(None)
        } else {
            parse_f64(s, "hyperparameter").map(Some)
        }
    };
    for (r, rec) in records(&dir.join(HYPER_FILE))?.iter().enumerate() {
        slot(field(rec, 0, r + 1)?, r + 1)?;
        if let Some(a) = opt(&rec[1])? {
            tr.alpha0.push(a);
        }
        if let Some(g) = opt(&rec[2])? {
            tr.gamma.push(g);
        }
        if let Some(l) = opt(&rec[3])? {
            tr.log_joint.push(l);
        }
        tr.p.push((4..rec.len()).map(|c| parse_f64(&rec[c], "p")).collect::<Result<_>>()?);
    }

    let lp = dir.join(LATENT_FILE);
    if lp.exists() {
        for (r, rec) in records(&lp)?.iter().enumerate() {
            slot(field(rec, 0, r + 1)?, r + 1)?;
            tr.latent_y.push((1..rec.len()).map(|c| parse_f64(&rec[c], "latent value")).collect::<Result<_>>()?);
        }
    }
    Ok(tr)
}
