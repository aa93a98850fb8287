//! Plain-text ingestion of tabulated multi-fidelity samples.
//!
//! Format: comma-separated with header `fidelity,x1[,x2,...],y[,g1,g2,...]`,
//! `fidelity` one of `low`/`high`, optional gradient columns `g1..gd`, and
//! `#` starting a comment line. Decimal points only, no locale variance.

use std::path::Path;

use crate::error::{Error, Result};
use crate::point::Point;
use crate::surrogates::{GradObservationSet, MultiFidelityData};

use super::cases::BenchmarkCase;

/// Where gradients come from when ingesting a file.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum GradientMode {
    /// Gradients come from the file's `g1..gd` columns. A file without
    /// gradient columns loads as value-only data; models that need
    /// gradients then fail with `MissingGradients` at training time.
    Provided,
    /// Gradients are central differences `(f(x+h) - f(x-h)) / 2h`; the file
    /// must contain value rows at the companion locations. Rows that have
    /// companions along every dimension become design points, the rest only
    /// serve as companions.
    FiniteDifference(f64),
}

struct RawRow {
    line: usize,
    high: bool,
    coords: Vec<f64>,
    value: f64,
    grads: Option<Vec<f64>>,
}

/// Match tolerance for locating companion rows at `x +- h`.
const COMPANION_TOL: f64 = 1e-9;

pub fn load_tabulated(path: &Path, mode: GradientMode) -> Result<(MultiFidelityData, BenchmarkCase)> {
    let text = std::fs::read_to_string(path)?;
    let name = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "file".to_string());
    let (dim, has_grads, rows) = parse_rows(&text)?;

    let build = |high: bool| -> Result<GradObservationSet> {
        let fid_rows: Vec<&RawRow> = rows.iter().filter(|r| r.high == high).collect();
        if fid_rows.is_empty() {
            return Err(Error::MissingColumns(format!(
                "no {} rows in {}",
                if high { "high-fidelity" } else { "low-fidelity" },
                path.display()
            )));
        }
        match mode {
            GradientMode::Provided => {
                let points = fid_rows.iter().map(|r| Point::new(r.coords.clone())).collect();
                let values = fid_rows.iter().map(|r| r.value).collect();
                if has_grads {
                    GradObservationSet::with_gradients(
                        points,
                        values,
                        fid_rows
                            .iter()
                            .map(|r| r.grads.clone().expect("header declared gradients"))
                            .collect(),
                    )
                } else {
                    GradObservationSet::values_only(points, values)
                }
            }
            GradientMode::FiniteDifference(h) => {
                if !h.is_finite() || h <= 0.0 {
                    return Err(Error::FiniteDifference(format!(
                        "step size must be positive, got {h}"
                    )));
                }
                finite_difference_set(&fid_rows, dim, h)
            }
        }
    };

    let low = build(false)?;
    let high = build(true)?;
    let data = MultiFidelityData::new(low, high)?;

    // For ingested data the only known truth is the high-fidelity
    // observations themselves, so the case reports interpolation residuals.
    let case = BenchmarkCase {
        name,
        data: data.clone(),
        test_grid: data.high().points().to_vec(),
        truth_values: data.high().values().to_vec(),
        truth_gradients: data
            .high()
            .gradients()
            .map(|g| g.to_vec())
            .unwrap_or_else(|| vec![vec![0.0; data.dim()]; data.high().len()]),
    };
    Ok((data, case))
}

fn parse_rows(text: &str) -> Result<(usize, bool, Vec<RawRow>)> {
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'));

    let (header_line, header) = lines.next().ok_or(Error::Parse {
        line: 0,
        message: "file has no header row".into(),
    })?;
    let cols: Vec<&str> = header.split(',').map(str::trim).collect();
    if cols.first() != Some(&"fidelity") {
        return Err(Error::Parse {
            line: header_line,
            message: "header must start with `fidelity`".into(),
        });
    }
    let mut i = 1;
    let mut dim = 0;
    while i < cols.len() && cols[i] == format!("x{}", dim + 1) {
        dim += 1;
        i += 1;
    }
    if dim == 0 {
        return Err(Error::Parse {
            line: header_line,
            message: "expected coordinate columns x1[,x2,...] after fidelity".into(),
        });
    }
    if i >= cols.len() || cols[i] != "y" {
        return Err(Error::Parse {
            line: header_line,
            message: "expected value column `y` after the coordinates".into(),
        });
    }
    i += 1;
    let mut g = 0;
    while i < cols.len() && cols[i] == format!("g{}", g + 1) {
        g += 1;
        i += 1;
    }
    if i != cols.len() {
        return Err(Error::Parse {
            line: header_line,
            message: format!("unexpected column `{}`", cols[i]),
        });
    }
    if g != 0 && g != dim {
        return Err(Error::MissingColumns(format!(
            "found {g} gradient columns for {dim} coordinates; need g1..g{dim} or none"
        )));
    }
    let has_grads = g == dim && g > 0;
    let expected = 1 + dim + 1 + if has_grads { dim } else { 0 };

    let mut rows = Vec::new();
    for (line, raw) in lines {
        let fields: Vec<&str> = raw.split(',').map(str::trim).collect();
        if fields.len() != expected {
            return Err(Error::Parse {
                line,
                message: format!("expected {expected} fields, found {}", fields.len()),
            });
        }
        let high = match fields[0].to_ascii_lowercase().as_str() {
            "low" => false,
            "high" => true,
            other => {
                return Err(Error::Parse {
                    line,
                    message: format!("fidelity must be `low` or `high`, got `{other}`"),
                })
            }
        };
        let parse_f = |s: &str| -> Result<f64> {
            s.parse::<f64>().map_err(|_| Error::Parse {
                line,
                message: format!("`{s}` is not a number"),
            })
        };
        let coords: Vec<f64> = fields[1..=dim]
            .iter()
            .map(|s| parse_f(s))
            .collect::<Result<_>>()?;
        let value = parse_f(fields[dim + 1])?;
        let grads = if has_grads {
            Some(
                fields[dim + 2..]
                    .iter()
                    .map(|s| parse_f(s))
                    .collect::<Result<Vec<f64>>>()?,
            )
        } else {
            None
        };
        rows.push(RawRow {
            line,
            high,
            coords,
            value,
            grads,
        });
    }
    Ok((dim, has_grads, rows))
}

fn find_value(rows: &[&RawRow], target: &[f64]) -> Option<f64> {
    rows.iter()
        .find(|r| {
            r.coords
                .iter()
                .zip(target)
                .all(|(a, b)| (a - b).abs() <= COMPANION_TOL)
        })
        .map(|r| r.value)
}

fn finite_difference_set(rows: &[&RawRow], dim: usize, h: f64) -> Result<GradObservationSet> {
    let mut points = Vec::new();
    let mut values = Vec::new();
    let mut grads = Vec::new();
    for row in rows {
        let mut grad = Vec::with_capacity(dim);
        let mut complete = true;
        for i in 0..dim {
            let mut plus = row.coords.clone();
            let mut minus = row.coords.clone();
            plus[i] += h;
            minus[i] -= h;
            match (find_value(rows, &plus), find_value(rows, &minus)) {
                (Some(yp), Some(ym)) => grad.push((yp - ym) / (2.0 * h)),
                _ => {
                    complete = false;
                    break;
                }
            }
        }
        if complete {
            points.push(Point::new(row.coords.clone()));
            values.push(row.value);
            grads.push(grad);
        }
    }
    if points.is_empty() {
        return Err(Error::FiniteDifference(format!(
            "no rows have value companions at +-{h} in every dimension (first row at line {})",
            rows.first().map(|r| r.line).unwrap_or(0)
        )));
    }
    GradObservationSet::with_gradients(points, values, grads)
}

/// Writes a data set back out in the tabulated format; gradient columns are
/// emitted when both fidelities carry gradients.
pub fn write_tabulated(path: &Path, data: &MultiFidelityData) -> Result<()> {
    use std::io::Write;
    let d = data.dim();
    let with_grads = data.low().has_gradients() && data.high().has_gradients();
    let mut out = String::new();
    out.push_str("fidelity");
    for i in 1..=d {
        out.push_str(&format!(",x{i}"));
    }
    out.push_str(",y");
    if with_grads {
        for i in 1..=d {
            out.push_str(&format!(",g{i}"));
        }
    }
    out.push('\n');
    let mut dump = |set: &GradObservationSet, fid: &str| {
        for (i, p) in set.points().iter().enumerate() {
            out.push_str(fid);
            for c in p.coords() {
                out.push_str(&format!(",{c}"));
            }
            out.push_str(&format!(",{}", set.values()[i]));
            if with_grads {
                for g in &set.gradients().expect("gradients present")[i] {
                    out.push_str(&format!(",{g}"));
                }
            }
            out.push('\n');
        }
    };
    dump(data.low(), "low");
    dump(data.high(), "high");
    let mut f = std::fs::File::create(path)?;
    f.write_all(out.as_bytes())?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Write;

    fn write_temp(content: &str) -> std::path::PathBuf {
        let dir = std::env::temp_dir();
        let path = dir.join(format!(
            "mfgp_tab_{}_{:?}.csv",
            std::process::id(),
            std::thread::current().id()
        ));
        let mut f = std::fs::File::create(&path).unwrap();
        f.write_all(content.as_bytes()).unwrap();
        path
    }

    #[test]
    fn provided_mode_round_trip() {
        let text = "\
# demo file
fidelity,x1,y,g1
low,0.0,1.0,0.5
low,0.5,2.0,0.25
low,1.0,1.5,-0.5
high,0.0,2.0,1.0
high,1.0,3.0,-1.0
";
        let path = write_temp(text);
        let (data, case) = load_tabulated(&path, GradientMode::Provided).unwrap();
        assert_eq!(data.low().len(), 3);
        assert_eq!(data.high().len(), 2);
        assert_eq!(data.high().gradients().unwrap()[1], vec![-1.0]);
        assert_eq!(case.test_grid.len(), 2);
        std::fs::remove_file(path).ok();
    }

    #[test]
    fn quadratic_finite_difference_is_exact() {
        // y = x^2 sampled on a dense grid; central differences with h = 0.25
        // are exact for quadratics
        let mut text = String::from("fidelity,x1,y\n");
        let mut x = 0.0;
        while x <= 4.0 + 1e-9 {
            text.push_str(&format!("low,{x},{}\n", x * x));
            x += 0.25;
        }
        for x in [1.75f64, 2.0, 2.25] {
            text.push_str(&format!("high,{x},{}\n", x * x));
        }
        let path = write_temp(&text);
        let (data, _) = load_tabulated(&path, GradientMode::FiniteDifference(0.25)).unwrap();
        let i = data
            .low()
            .points()
            .iter()
            .position(|p| (p.coord(0) - 2.0).abs() < 1e-12)
            .unwrap();
        assert_eq!(data.low().gradients().unwrap()[i][0], 4.0);
        // endpoints have no companions and are dropped
        assert!(data
            .low()
            .points()
            .iter()
            .all(|p| p.coord(0) > 0.0 && p.coord(0) < 4.0));
        // the high design point at 2.0 kept its companions
        assert_eq!(data.high().len(), 1);
        assert_eq!(data.high().gradients().unwrap()[0][0], 4.0);
        std::fs::remove_file(path).ok();
    }

    #[test]
    fn malformed_row_names_the_line() {
        let text = "fidelity,x1,y\nlow,0.0,1.0\nlow,oops,2.0\nhigh,0.0,2.0\n";
        let path = write_temp(text);
        let err = load_tabulated(&path, GradientMode::FiniteDifference(0.25)).unwrap_err();
        match err {
            Error::Parse { line, .. } => assert_eq!(line, 3),
            other => panic!("unexpected error {other:?}"),
        }
        std::fs::remove_file(path).ok();
    }

    #[test]
    fn value_only_file_loads_without_gradients() {
        let text = "fidelity,x1,y\nlow,0.0,1.0\nlow,1.0,2.0\nhigh,0.0,2.0\n";
        let path = write_temp(text);
        let (data, _) = load_tabulated(&path, GradientMode::Provided).unwrap();
        assert!(!data.low().has_gradients());
        assert!(!data.high().has_gradients());
        std::fs::remove_file(path).ok();
    }

    #[test]
    fn non_nested_design_is_rejected() {
        let text = "\
fidelity,x1,y,g1
low,0.0,1.0,0.0
low,1.0,2.0,0.0
high,0.5,3.0,0.0
high,1.0,4.0,0.0
";
        let path = write_temp(text);
        let err = load_tabulated(&path, GradientMode::Provided).unwrap_err();
        assert!(matches!(err, Error::NotNested { index: 0, .. }));
        std::fs::remove_file(path).ok();
    }

    #[test]
    fn wrong_gradient_column_count_rejected() {
        let text = "fidelity,x1,x2,y,g1\nlow,0,0,1,0\nhigh,0,0,1,0\n";
        let path = write_temp(text);
        let err = load_tabulated(&path, GradientMode::Provided).unwrap_err();
        assert!(matches!(err, Error::MissingColumns(_)));
        std::fs::remove_file(path).ok();
    }

    #[test]
    fn bundled_power_dataset_loads_with_design_sizes() {
        use crate::benchmarks::{load_case, CaseName};
        let path = std::path::Path::new(env!("CARGO_MANIFEST_DIR")).join("data/power_style.csv");
        let (data, _) = load_tabulated(&path, GradientMode::FiniteDifference(0.25)).unwrap();
        assert_eq!(data.low().len(), 51);
        assert_eq!(data.high().len(), 5);
        // file ingestion reproduces the in-code case bit for bit
        let case = load_case(CaseName::Power, 0).unwrap();
        assert_eq!(data.low().values(), case.data.low().values());
        assert_eq!(data.high().values(), case.data.high().values());
        assert_eq!(
            data.low().gradients().unwrap(),
            case.data.low().gradients().unwrap()
        );
        assert_eq!(
            data.high().gradients().unwrap(),
            case.data.high().gradients().unwrap()
        );
    }

    #[test]
    fn writer_round_trips() {
        let low = GradObservationSet::with_gradients(
            vec![Point::scalar(0.0), Point::scalar(1.0), Point::scalar(2.0)],
            vec![1.0, 2.5, -0.125],
            vec![vec![0.5], vec![-0.25], vec![3.0]],
        )
        .unwrap();
        let high = GradObservationSet::with_gradients(
            vec![Point::scalar(0.0), Point::scalar(2.0)],
            vec![2.0, 0.0625],
            vec![vec![1.5], vec![-2.0]],
        )
        .unwrap();
        let data = MultiFidelityData::new(low, high).unwrap();
        let path = write_temp("");
        write_tabulated(&path, &data).unwrap();
        let (loaded, _) = load_tabulated(&path, GradientMode::Provided).unwrap();
        assert_eq!(loaded.low().values(), data.low().values());
        assert_eq!(loaded.high().gradients().unwrap(), data.high().gradients().unwrap());
        std::fs::remove_file(path).ok();
    }
}
