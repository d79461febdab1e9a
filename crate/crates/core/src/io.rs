//! CSV and JSON-sidecar formats for coefficient arrays, kernels and
//! operator expansions. Floats are written in scientific notation with 17
//! significant digits, so every `f64` round-trips exactly.

use std::fs;
use std::path::{Path, PathBuf};

use ndarray::{Array2, ArrayD, Dimension, IxDyn};
use serde::{Deserialize, Serialize};

use crate::coeff::{HermiteRep, Provenance, SampledGrid};
use crate::kernel::{unflatten, GrowthCertificate, KernelRep};
use crate::opcalc::OperatorExpansion;
use crate::{Complex64, Error, Result};

pub fn format_f64(v: f64) -> String {
    format!("{v:.16e}")
}

/// Sidecar path: `coeffs.csv` -> `coeffs.csv.json`.
pub fn sidecar_path(csv: &Path) -> PathBuf {
    let mut s = csv.as_os_str().to_owned();
    s.push(".json");
    PathBuf::from(s)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CoeffSidecar {
    pub shape: Vec<usize>,
    pub provenance: Provenance,
    pub truncation_loss: f64,
}

fn csv_error(e: csv::Error) -> Error {
    Error::Parse(e.to_string())
}

/// `n1,...,nd,re,im`, one row per slot in row-major order.
pub fn coeffs_to_csv(rep: &HermiteRep) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let mut header: Vec<String> = (1..=rep.dims()).map(|k| format!("n{k}")).collect();
    header.extend(["re".into(), "im".into()]);
    w.write_record(&header).map_err(csv_error)?;
    for (idx, c) in rep.coeffs().indexed_iter() {
        let mut row: Vec<String> = idx.slice().iter().map(|n| n.to_string()).collect();
        row.push(format_f64(c.re));
        row.push(format_f64(c.im));
        w.write_record(&row).map_err(csv_error)?;
    }
    finish(w)
}

fn finish(w: csv::Writer<Vec<u8>>) -> Result<String> {
    let bytes = w.into_inner().map_err(|e| Error::Parse(e.to_string()))?;
    String::from_utf8(bytes).map_err(|e| Error::Parse(e.to_string()))
}

fn parse_num<T: std::str::FromStr>(field: &str, line: u64) -> Result<T> {
    field.trim().parse().map_err(|_| Error::Parse(format!("line {line}: cannot parse {field:?}")))
}

/// Reads `n1,...,nd,re,im`. Without an explicit `shape` the box is the
/// smallest one containing every listed index; missing slots are zero.
pub fn coeffs_from_csv(text: &str, shape: Option<&[usize]>) -> Result<HermiteRep> {
    let mut r = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(text.as_bytes());
    let header = r.headers().map_err(csv_error)?.clone();
    let d =
        header.len().checked_sub(2).filter(|&d| d >= 1).ok_or_else(|| {
            Error::Parse(format!("header {:?} needs n1..nd,re,im", header.iter().collect::<Vec<_>>()))
        })?;
    let expected: Vec<String> = (1..=d).map(|k| format!("n{k}")).chain(["re".into(), "im".into()]).collect();
    if header.iter().ne(expected.iter().map(String::as_str)) {
        return Err(Error::Parse(format!("header must be {}", expected.join(","))));
    }
    let mut entries = Vec::new();
    for rec in r.records() {
        let rec = rec.map_err(csv_error)?;
        let line = rec.position().map(|p| p.line()).unwrap_or(0);
        let idx: Vec<usize> = (0..d).map(|k| parse_num(&rec[k], line)).collect::<Result<_>>()?;
        let c = Complex64::new(parse_num(&rec[d], line)?, parse_num(&rec[d + 1], line)?);
        entries.push((idx, c));
    }
    let shape: Vec<usize> = match shape {
        Some(s) => s.to_vec(),
        None => (0..d).map(|k| entries.iter().map(|(i, _)| i[k] + 1).max().unwrap_or(0)).collect(),
    };
    if shape.len() != d {
        return Err(Error::Shape(format!("file has d = {d}, shape {shape:?}")));
    }
    let mut arr = ArrayD::zeros(IxDyn(&shape));
    for (idx, c) in entries {
        let slot =
            arr.get_mut(IxDyn(&idx)).ok_or_else(|| Error::Shape(format!("index {idx:?} outside box {shape:?}")))?;
        *slot = c;
    }
    HermiteRep::new(arr, Provenance::Synthetic)
}

/// Writes `path` and its sidecar.
pub fn save_rep(rep: &HermiteRep, path: &Path) -> Result<()> {
    fs::write(path, coeffs_to_csv(rep)?)?;
    let side = CoeffSidecar {
        shape: rep.shape().to_vec(),
        provenance: rep.meta().provenance,
        truncation_loss: rep.truncation_loss(),
    };
    fs::write(sidecar_path(path), serde_json::to_string_pretty(&side)? + "\n")?;
    Ok(())
}

/// Reads `path`, taking shape and metadata from the sidecar when present.
pub fn load_rep(path: &Path) -> Result<HermiteRep> {
    let text = fs::read_to_string(path)?;
    let side_path = sidecar_path(path);
    if !side_path.exists() {
        return coeffs_from_csv(&text, None);
    }
    let side: CoeffSidecar = serde_json::from_str(&fs::read_to_string(side_path)?)?;
    let rep = coeffs_from_csv(&text, Some(&side.shape))?;
    HermiteRep::with_loss(rep.into_coeffs(), side.provenance, side.truncation_loss)
}

/// Tensor-grid samples as `x1,...,xd,re,im` in row-major order.
pub fn samples_to_csv(grid: &SampledGrid) -> Result<String> {
    let d = grid.axes.len();
    if grid.values.ndim() != d || grid.axes.iter().zip(grid.values.shape()).any(|(a, &n)| a.len() != n) {
        return Err(Error::Shape("sample axes do not match the value array".into()));
    }
    let mut w = csv::Writer::from_writer(Vec::new());
    let mut header: Vec<String> = (1..=d).map(|k| format!("x{k}")).collect();
    header.extend(["re".into(), "im".into()]);
    w.write_record(&header).map_err(csv_error)?;
    for (idx, c) in grid.values.indexed_iter() {
        let mut row: Vec<String> = idx.slice().iter().enumerate().map(|(k, &i)| format_f64(grid.axes[k][i])).collect();
        row.push(format_f64(c.re));
        row.push(format_f64(c.im));
        w.write_record(&row).map_err(csv_error)?;
    }
    finish(w)
}

/// Reads `x1,...,xd,re,im` rows covering a full tensor grid.
pub fn samples_from_csv(text: &str) -> Result<SampledGrid> {
    let mut r = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(text.as_bytes());
    let header = r.headers().map_err(csv_error)?.clone();
    let d = header
        .len()
        .checked_sub(2)
        .filter(|&d| d >= 1)
        .ok_or_else(|| Error::Parse("sample header needs x1..xd,re,im".into()))?;
    let expected: Vec<String> = (1..=d).map(|k| format!("x{k}")).chain(["re".into(), "im".into()]).collect();
    if header.iter().ne(expected.iter().map(String::as_str)) {
        return Err(Error::Parse(format!("header must be {}", expected.join(","))));
    }
    let mut rows = Vec::new();
    for rec in r.records() {
        let rec = rec.map_err(csv_error)?;
        let line = rec.position().map(|p| p.line()).unwrap_or(0);
        let x: Vec<f64> = (0..d).map(|k| parse_num(&rec[k], line)).collect::<Result<_>>()?;
        let c = Complex64::new(parse_num(&rec[d], line)?, parse_num(&rec[d + 1], line)?);
        rows.push((x, c));
    }
    let axes: Vec<Vec<f64>> = (0..d)
        .map(|k| {
            let mut a: Vec<f64> = rows.iter().map(|(x, _)| x[k]).collect();
            a.sort_by(f64::total_cmp);
            a.dedup_by(|u, v| u.to_bits() == v.to_bits());
            a
        })
        .collect();
    let shape: Vec<usize> = axes.iter().map(Vec::len).collect();
    if rows.len() != shape.iter().product::<usize>() {
        return Err(Error::Data(format!("{} samples do not form a full {shape:?} grid", rows.len())));
    }
    let mut values = ArrayD::from_elem(IxDyn(&shape), Complex64::new(f64::NAN, f64::NAN));
    for (x, c) in rows {
        let idx: Vec<usize> = x
            .iter()
            .zip(&axes)
            .map(|(v, a)| a.binary_search_by(|u| u.total_cmp(v)).expect("coordinate is on its axis"))
            .collect();
        values[IxDyn(&idx)] = c;
    }
    if values.iter().any(|c| c.re.is_nan()) {
        return Err(Error::Data("sample grid has repeated or missing points".into()));
    }
    Ok(SampledGrid { axes, values })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct KernelSidecar {
    pub shape_l: Vec<usize>,
    pub shape_s: Vec<usize>,
    pub growth: Option<GrowthCertificate>,
}

/// `n,k,re,im` with flat row-major indices; zero entries are omitted.
pub fn kernel_to_csv(kernel: &KernelRep) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["n", "k", "re", "im"]).map_err(csv_error)?;
    for ((n, k), t) in kernel.matrix().indexed_iter() {
        if t.re == 0.0 && t.im == 0.0 {
            continue;
        }
        w.write_record([n.to_string(), k.to_string(), format_f64(t.re), format_f64(t.im)]).map_err(csv_error)?;
    }
    finish(w)
}

pub fn kernel_from_csv(text: &str, shape_l: &[usize], shape_s: &[usize]) -> Result<KernelRep> {
    let rows: usize = shape_l.iter().product();
    let cols: usize = shape_s.iter().product();
    let mut r = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(text.as_bytes());
    let header = r.headers().map_err(csv_error)?.clone();
    if header.iter().ne(["n", "k", "re", "im"]) {
        return Err(Error::Parse("kernel header must be n,k,re,im".into()));
    }
    let mut m = Array2::zeros((rows, cols));
    for rec in r.records() {
        let rec = rec.map_err(csv_error)?;
        let line = rec.position().map(|p| p.line()).unwrap_or(0);
        let (n, k): (usize, usize) = (parse_num(&rec[0], line)?, parse_num(&rec[1], line)?);
        let slot = m.get_mut((n, k)).ok_or_else(|| {
            Error::Shape(format!("entry ({n}, {k}) outside {rows} x {cols}; n = {:?}", unflatten(n, shape_l)))
        })?;
        *slot = Complex64::new(parse_num(&rec[2], line)?, parse_num(&rec[3], line)?);
    }
    KernelRep::new(shape_l.to_vec(), shape_s.to_vec(), m)
}

pub fn save_kernel(kernel: &KernelRep, path: &Path) -> Result<()> {
    fs::write(path, kernel_to_csv(kernel)?)?;
    let side = KernelSidecar {
        shape_l: kernel.shape_l().to_vec(),
        shape_s: kernel.shape_s().to_vec(),
        growth: kernel.growth().cloned(),
    };
    fs::write(sidecar_path(path), serde_json::to_string_pretty(&side)? + "\n")?;
    Ok(())
}

/// Reads a kernel and its sidecar; the growth certificate is not restored
/// because it is only valid for the kernel it was computed on.
pub fn load_kernel(path: &Path) -> Result<(KernelRep, KernelSidecar)> {
    let side: KernelSidecar = serde_json::from_str(&fs::read_to_string(sidecar_path(path))?)?;
    let kernel = kernel_from_csv(&fs::read_to_string(path)?, &side.shape_l, &side.shape_s)?;
    Ok((kernel, side))
}

/// `N,p,q,c` with exact decimal integers.
pub fn expansion_to_csv(exp: &OperatorExpansion) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["N", "p", "q", "c"]).map_err(csv_error)?;
    for ((p, q), c) in exp.coeffs() {
        w.write_record([exp.order().to_string(), p.to_string(), q.to_string(), c.to_string()]).map_err(csv_error)?;
    }
    finish(w)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coeff::ThetaVector;
    use crate::kernel::{kernel_growth_check, kernel_of_operator, KernelOperator};
    use crate::opcalc::build_expansion;
    use crate::weights::{AssociatedFunction, WeightSequence};

    fn tmp(name: &str) -> PathBuf {
        let dir = std::env::temp_dir().join(format!("hermrep-io-{}", std::process::id()));
        fs::create_dir_all(&dir).unwrap();
        dir.join(name)
    }

    #[test]
    fn float_format_round_trips() {
        for v in [0.1, -1.0 / 3.0, 1e-300, 5e-324, f64::MAX, 0.0, -0.0] {
            let s = format_f64(v);
            assert_eq!(s.parse::<f64>().unwrap().to_bits(), v.to_bits(), "{s}");
        }
        assert_eq!(format_f64(1.5), "1.5000000000000000e0");
    }

    #[test]
    fn coeff_csv_layout() {
        let rep = HermiteRep::from_vec(vec![Complex64::new(1.0, 0.0), Complex64::new(0.0, -2.0)]).unwrap();
        let text = coeffs_to_csv(&rep).unwrap();
        assert_eq!(
            text,
            "n1,re,im\n0,1.0000000000000000e0,0.0000000000000000e0\n1,0.0000000000000000e0,-2.0000000000000000e0\n"
        );
        assert_eq!(coeffs_from_csv(&text, None).unwrap().coeffs(), rep.coeffs());
    }

    #[test]
    fn coeff_csv_two_dims_and_errors() {
        let text = "n1,n2,re,im\n1,2,0.5,0\n";
        let rep = coeffs_from_csv(text, None).unwrap();
        assert_eq!(rep.shape(), &[2, 3]);
        assert_eq!(rep.get(&[1, 2]).unwrap().re, 0.5);
        assert!(coeffs_from_csv(text, Some(&[1, 3])).is_err());
        assert!(coeffs_from_csv("a,b\n", None).is_err());
        assert!(coeffs_from_csv("n1,re,im\n0,x,0\n", None).is_err());
    }

    #[test]
    fn rep_file_round_trip() {
        let rep = HermiteRep::with_loss(
            ArrayD::from_shape_fn(IxDyn(&[3, 4]), |i| Complex64::new(i[0] as f64 / 7.0, -(i[1] as f64).sqrt())),
            Provenance::OperatorOutput,
            1e-3,
        )
        .unwrap();
        let path = tmp("rep.csv");
        save_rep(&rep, &path).unwrap();
        let back = load_rep(&path).unwrap();
        assert_eq!(back, rep);
    }

    #[test]
    fn kernel_file_round_trip() {
        let mut k = kernel_of_operator(KernelOperator::Diff { axis: 0 }, &[6]).unwrap();
        let af = AssociatedFunction::new(WeightSequence::gevrey_log(0.5, 0.0).unwrap());
        let t = ThetaVector::uniform(1.0, 1).unwrap();
        kernel_growth_check(&mut k, &t, &t, &af).unwrap();
        let path = tmp("kernel.csv");
        save_kernel(&k, &path).unwrap();
        let (back, side) = load_kernel(&path).unwrap();
        assert_eq!(back.matrix(), k.matrix());
        assert_eq!(side.growth.as_ref(), k.growth());
    }

    #[test]
    fn samples_round_trip() {
        let grid = SampledGrid {
            axes: vec![vec![-1.0, 0.5], vec![0.0, 1.0 / 3.0, 2.0]],
            values: ArrayD::from_shape_fn(IxDyn(&[2, 3]), |i| Complex64::new(i[0] as f64, i[1] as f64 * 0.1)),
        };
        let text = samples_to_csv(&grid).unwrap();
        assert!(text.starts_with("x1,x2,re,im\n"));
        let back = samples_from_csv(&text).unwrap();
        assert_eq!(back.axes, grid.axes);
        assert_eq!(back.values, grid.values);
        let partial: String = text.lines().take(5).collect::<Vec<_>>().join("\n");
        assert!(matches!(samples_from_csv(&partial), Err(Error::Data(_))));
    }

    #[test]
    fn expansion_csv_is_exact() {
        let text = expansion_to_csv(&build_expansion(2).unwrap()).unwrap();
        assert!(text.starts_with("N,p,q,c\n2,0,0,-4\n"));
        let big = expansion_to_csv(&build_expansion(30).unwrap()).unwrap();
        let top = big.lines().find(|l| l.starts_with("30,60,0,")).unwrap();
        assert_eq!(top, "30,60,0,1073741824");
    }
}
