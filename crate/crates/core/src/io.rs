//! Text decoders for data files and compact command-line specs.

use crate::error::{Error, Result};
use crate::model::{Data, Design, IndexData, IndexDesign, Partition};

/// Rows of an `x,y[,f0]` file in file order.
#[derive(Debug, Clone, PartialEq)]
pub struct XyTable {
    pub x: Vec<f64>,
    pub y: Vec<f64>,
    pub extra: Option<Vec<f64>>,
}

impl XyTable {
    /// Sort rows by `x` (stable) and build the sample. The permuted extra
    /// column is returned alongside.
    pub fn into_data(self) -> Result<(Data, Option<Vec<f64>>)> {
        let mut order: Vec<usize> = (0..self.x.len()).collect();
        order.sort_by(|&a, &b| self.x[a].total_cmp(&self.x[b]));
        let x = order.iter().map(|&i| self.x[i]).collect();
        let y = order.iter().map(|&i| self.y[i]).collect();
        let extra = self.extra.map(|e| order.iter().map(|&i| e[i]).collect());
        Ok((Data::new(Design::new(x)?, y)?, extra))
    }
}

fn reader(text: &str) -> csv::Reader<&[u8]> {
    csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .trim(csv::Trim::All)
        .comment(Some(b'#'))
        .from_reader(text.as_bytes())
}

fn parse_num(field: &str, row: usize, col: usize) -> Result<f64> {
    let v: f64 = field
        .parse()
        .map_err(|_| Error::parse(format!("row {row}, column {col}: '{field}' is not a number")))?;
    if !v.is_finite() {
        return Err(Error::parse(format!("row {row}, column {col}: non-finite value")));
    }
    Ok(v)
}

fn numeric_rows(text: &str) -> Result<Vec<Vec<f64>>> {
    let mut rows = Vec::new();
    let mut width = None;
    for (idx, rec) in reader(text).records().enumerate() {
        let rec = rec.map_err(|e| Error::parse(e.to_string()))?;
        if rec.iter().all(|f| f.is_empty()) {
            continue;
        }
        let is_header = idx == 0 && rec.iter().any(|f| f.parse::<f64>().is_err());
        if let Some(w) = width {
            if rec.len() != w {
                return Err(Error::parse(format!("row {idx} has {} fields, expected {w}", rec.len())));
            }
        }
        width = Some(rec.len());
        if is_header {
            continue;
        }
        rows.push(rec.iter().enumerate().map(|(c, f)| parse_num(f, idx, c)).collect::<Result<Vec<_>>>()?);
    }
    if rows.is_empty() {
        return Err(Error::parse("no data rows"));
    }
    Ok(rows)
}

/// Decode `x,y` or `x,y,f0` rows. A non-numeric first row is a header.
pub fn parse_xy_csv(text: &str) -> Result<XyTable> {
    let rows = numeric_rows(text)?;
    let w = rows[0].len();
    if !(2..=3).contains(&w) {
        return Err(Error::parse(format!("expected 2 or 3 columns, found {w}")));
    }
    Ok(XyTable {
        x: rows.iter().map(|r| r[0]).collect(),
        y: rows.iter().map(|r| r[1]).collect(),
        extra: (w == 3).then(|| rows.iter().map(|r| r[2]).collect()),
    })
}

/// Decode `x1,...,xm,y` rows for single-index data.
pub fn parse_index_csv(text: &str) -> Result<IndexData> {
    let rows = numeric_rows(text)?;
    let w = rows[0].len();
    if w < 2 {
        return Err(Error::parse("need at least one coordinate and a response"));
    }
    let y = rows.iter().map(|r| r[w - 1]).collect();
    let coords = rows.into_iter().map(|mut r| {
        r.pop();
        r
    });
    IndexData::new(IndexDesign::new(coords.collect())?, y)
}

/// `"1-3,4,5-8"`: 1-based inclusive index ranges covering `1..=n`.
pub fn parse_blocks(spec: &str, n: usize) -> Result<Partition> {
    let mut blocks = Vec::new();
    for part in spec.split(',').map(str::trim) {
        let (lo, hi) = match part.split_once('-') {
            Some((a, b)) => (a.trim(), b.trim()),
            None => (part, part),
        };
        let lo: usize = lo.parse().map_err(|_| Error::parse(format!("bad block start '{lo}'")))?;
        let hi: usize = hi.parse().map_err(|_| Error::parse(format!("bad block end '{hi}'")))?;
        if lo == 0 || hi < lo {
            return Err(Error::parse(format!("bad block '{part}'")));
        }
        blocks.push(lo - 1..hi);
    }
    Partition::new(n, blocks).map_err(|e| Error::parse(e.to_string()))
}

pub fn parse_f64_list(spec: &str) -> Result<Vec<f64>> {
    spec.split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .enumerate()
        .map(|(i, s)| parse_num(s, 0, i))
        .collect()
}

pub fn parse_usize_list(spec: &str) -> Result<Vec<usize>> {
    spec.split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| s.parse().map_err(|_| Error::parse(format!("'{s}' is not a nonnegative integer"))))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_with_header_and_sorting() {
        let t = parse_xy_csv("x,y\n0.5, 2\n0.1,1\n").unwrap();
        let (d, extra) = t.into_data().unwrap();
        assert_eq!(d.design.points(), &[0.1, 0.5]);
        assert_eq!(d.y, vec![1.0, 2.0]);
        assert!(extra.is_none());
    }

    #[test]
    fn csv_rejects_garbage() {
        assert!(parse_xy_csv("").is_err());
        assert!(parse_xy_csv("1,2\n3").is_err());
        assert!(parse_xy_csv("1,nan").is_err());
        assert!(parse_xy_csv("1,2\nfoo,3").is_err());
        assert!(parse_xy_csv("1,2,3,4").is_err());
    }

    #[test]
    fn index_csv() {
        let d = parse_index_csv("x1,x2,y\n0,1,3\n1,0,4\n").unwrap();
        assert_eq!(d.design.dim(), 2);
        assert_eq!(d.y, vec![3.0, 4.0]);
    }

    #[test]
    fn blocks() {
        let p = parse_blocks("1-2, 3, 4-6", 6).unwrap();
        assert_eq!(p.blocks(), &[0..2, 2..3, 3..6]);
        assert!(parse_blocks("1-2,4-6", 6).is_err());
        assert!(parse_blocks("0-2", 2).is_err());
        assert!(parse_blocks("1-2", 3).is_err());
    }
}
