//! Convergence tables as CSV and empirical rates.

use std::io::{Read, Write};
use std::path::Path;

use crate::adaptivity::LevelRecord;
use crate::error::{Error, Result};

pub const BASE_COLUMNS: [&str; 6] = ["nE", "nDof", "est", "eta", "estContact", "oscF"];
pub const ERROR_COLUMNS: [&str; 5] = ["errNormU", "errNormV", "errU", "errSigma", "errDivSigmaLambda"];

/// Header row; error columns only when `with_errors`.
pub fn header(with_errors: bool) -> Vec<&'static str> {
    let mut h = BASE_COLUMNS.to_vec();
    if with_errors {
        h.extend(ERROR_COLUMNS);
    }
    h.push("iters");
    h
}

fn row(r: &LevelRecord, with_errors: bool) -> Vec<String> {
    let mut v = vec![
        r.n_elements.to_string(),
        r.n_dofs.to_string(),
        format!("{:e}", r.est),
        format!("{:e}", r.eta),
        format!("{:e}", r.est_contact),
        format!("{:e}", r.osc_f),
    ];
    if with_errors {
        match &r.errors {
            Some(e) => v.extend(
                [e.err_norm_u, e.err_norm_v, e.err_grad_u, e.err_sigma, e.err_div_sigma_lambda]
                    .map(|x| format!("{x:e}")),
            ),
            None => v.extend(std::iter::repeat_n(String::new(), ERROR_COLUMNS.len())),
        }
    }
    v.push(r.iterations.to_string());
    v
}

/// Writes the table. Error columns are present iff the first record has
/// exact errors.
pub fn write_csv<W: Write>(records: &[LevelRecord], out: W) -> Result<()> {
    let with_errors = records.first().is_some_and(|r| r.errors.is_some());
    let mut w = csv::Writer::from_writer(out);
    w.write_record(header(with_errors))?;
    for r in records {
        w.write_record(row(r, with_errors))?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_csv_file(records: &[LevelRecord], path: &Path) -> Result<()> {
    write_csv(records, std::fs::File::create(path)?)
}

/// Least-squares slope of `ln(value)` against `ln(n)`, sign flipped so that
/// decaying quantities give positive rates.
pub fn fit_rate(n: &[f64], value: &[f64]) -> Result<f64> {
    if n.len() != value.len() {
        return Err(Error::DimensionMismatch { expected: n.len(), actual: value.len() });
    }
    if n.len() < 2 {
        return Err(Error::NotEnoughRows { needed: 2, found: n.len() });
    }
    if n.iter().chain(value).any(|&v| !(v > 0.0 && v.is_finite())) {
        return Err(Error::Malformed("rates need positive finite values".into()));
    }
    let x: Vec<f64> = n.iter().map(|v| v.ln()).collect();
    let y: Vec<f64> = value.iter().map(|v| v.ln()).collect();
    let k = x.len() as f64;
    let (mx, my) = (x.iter().sum::<f64>() / k, y.iter().sum::<f64>() / k);
    let sxx: f64 = x.iter().map(|a| (a - mx).powi(2)).sum();
    if sxx == 0.0 {
        return Err(Error::Malformed("element counts do not vary".into()));
    }
    let sxy: f64 = x.iter().zip(&y).map(|(a, b)| (a - mx) * (b - my)).sum();
    Ok(-(sxy / sxx))
}

/// Rate of `column` over the last `tail` rows of a table read from `input`.
pub fn rates_from_reader<R: Read>(input: R, column: &str, tail: usize) -> Result<f64> {
    let mut r = csv::Reader::from_reader(input);
    let headers = r.headers()?.clone();
    let find = |name: &str| {
        headers.iter().position(|h| h == name).ok_or_else(|| Error::MissingColumn(name.to_string()))
    };
    let (ne, col) = (find("nE")?, find(column)?);
    let mut n = Vec::new();
    let mut v = Vec::new();
    for rec in r.records() {
        let rec = rec?;
        let parse = |i: usize| {
            rec.get(i)
                .and_then(|s| s.trim().parse::<f64>().ok())
                .ok_or_else(|| Error::Malformed(format!("bad value in column {}", &headers[i])))
        };
        n.push(parse(ne)?);
        v.push(parse(col)?);
    }
    let needed = tail.max(2);
    if n.len() < needed {
        return Err(Error::NotEnoughRows { needed, found: n.len() });
    }
    let start = n.len() - needed;
    fit_rate(&n[start..], &v[start..])
}

pub fn rates(path: &Path, column: &str, tail: usize) -> Result<f64> {
    rates_from_reader(std::fs::File::open(path)?, column, tail)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rate_examples() {
        let n = [100.0, 400.0, 1600.0, 6400.0];
        let v: Vec<f64> = n.iter().map(|x: &f64| 3.0 * x.powf(-0.5)).collect();
        assert!((fit_rate(&n, &v).unwrap() - 0.5).abs() < 1e-12);
        assert_eq!(fit_rate(&n, &[2.0; 4]).unwrap(), 0.0);
        assert!((fit_rate(&[100.0, 400.0], &[1.0, 0.5]).unwrap() - 0.5).abs() < 1e-14);
        assert!(fit_rate(&[1.0], &[1.0]).is_err());
        assert!(fit_rate(&[1.0, 2.0], &[0.0, 1.0]).is_err());
    }

    #[test]
    fn rates_from_table() {
        let table = "nE,nDof,est\n100,5,1\n400,9,0.5\n";
        assert!((rates_from_reader(table.as_bytes(), "est", 3).is_err()));
        assert!((rates_from_reader(table.as_bytes(), "est", 2).unwrap() - 0.5).abs() < 1e-14);
        assert!(matches!(rates_from_reader(table.as_bytes(), "errU", 2), Err(Error::MissingColumn(_))));
    }

    #[test]
    fn header_layout() {
        assert_eq!(header(false).join(","), "nE,nDof,est,eta,estContact,oscF,iters");
        assert_eq!(
            header(true).join(","),
            "nE,nDof,est,eta,estContact,oscF,errNormU,errNormV,errU,errSigma,errDivSigmaLambda,iters"
        );
    }
}
