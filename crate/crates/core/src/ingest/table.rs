use std::io::{Read, Write};

use crate::dataset::LabeledDataset;
use crate::error::{invalid, Result};

/// Writes `label,x0,x1,...` rows with a header.
pub fn write_dataset_csv<W: Write>(ds: &LabeledDataset, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let mut header = vec!["label".to_string()];
    header.extend((0..ds.dim()).map(|j| format!("x{j}")));
    w.write_record(&header)?;
    for i in 0..ds.len() {
        let mut rec = vec![ds.label(i).to_string()];
        rec.extend(ds.row(i).iter().map(|v| v.to_string()));
        w.write_record(&rec)?;
    }
    w.flush()?;
    Ok(())
}

/// Reads the format produced by [`write_dataset_csv`]. `n_classes` defaults
/// to the largest label seen.
pub fn read_dataset_csv<R: Read>(input: R, n_classes: Option<usize>) -> Result<LabeledDataset> {
    let mut r = csv::Reader::from_reader(input);
    let dim = r.headers()?.len().checked_sub(1).filter(|d| *d > 0).ok_or_else(|| invalid("need a label and at least one feature column"))?;
    let (mut features, mut labels) = (Vec::new(), Vec::new());
    for (line, rec) in r.records().enumerate() {
        let rec = rec?;
        let bad = |what: &str| invalid(format!("row {}: bad {what}", line + 1));
        labels.push(rec[0].trim().parse::<usize>().map_err(|_| bad("label"))?);
        for v in rec.iter().skip(1) {
            features.push(v.trim().parse::<f64>().map_err(|_| bad("feature"))?);
        }
    }
    let k = n_classes.unwrap_or_else(|| labels.iter().copied().max().unwrap_or(0));
    LabeledDataset::new(features, dim, labels, k)
}
