use std::fs::File;
use std::io::Write;
use std::path::Path;

use serde::Serialize;

use crate::error::Result;

/// CSV with a header row taken from the field names.
pub fn write_csv<T: Serialize>(path: &Path, rows: &[T]) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    for row in rows {
        w.serialize(row)?;
    }
    w.flush()?;
    Ok(())
}

pub fn csv_string<T: Serialize>(rows: &[T]) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for row in rows {
        w.serialize(row)?;
    }
    let bytes = w.into_inner().map_err(|e| e.into_error())?;
    Ok(String::from_utf8(bytes).expect("csv output is UTF-8"))
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut f = File::create(path)?;
    serde_json::to_writer_pretty(&mut f, value)?;
    f.write_all(b"\n")?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::experiments::RiskRow;

    #[test]
    fn header_matches_contract() {
        let row = RiskRow {
            estimator: "adaptive".into(),
            noise: "gaussian".into(),
            n: 101,
            risk_empiric: 0.5,
            se_empiric: 0.01,
            risk_l2: 0.6,
            se_l2: 0.02,
            normalized_ratio: 1.5,
            gamma_k: 0.4,
            seed: 7,
        };
        let text = csv_string(std::slice::from_ref(&row)).unwrap();
        assert_eq!(
            text.lines().next().unwrap(),
            "estimator,noise,n,risk_empiric,se_empiric,risk_l2,se_l2,normalized_ratio,gamma_k,seed"
        );
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("r.csv");
        write_csv(&p, &[row]).unwrap();
        assert_eq!(std::fs::read_to_string(&p).unwrap(), text);
    }
}
