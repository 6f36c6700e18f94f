use std::io::{Read, Write};

use crate::error::{Error, Result};
use crate::operators::Operator;
use crate::C64;

/// Dense operator as CSV rows `row, col, re, im`, row-major.
pub fn write_operator_csv<W: Write>(op: &Operator, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["row", "col", "re", "im"])?;
    for i in 0..op.dim() {
        for j in 0..op.dim() {
            let z = op.get(i, j);
            w.write_record([i.to_string(), j.to_string(), z.re.to_string(), z.im.to_string()])?;
        }
    }
    w.flush()?;
    Ok(())
}

/// Inverse of [`write_operator_csv`]; missing entries are zero.
pub fn read_operator_csv<R: Read>(input: R) -> Result<Operator> {
    let mut rd = csv::Reader::from_reader(input);
    let mut entries = Vec::new();
    let mut dim = 0;
    for row in rd.records() {
        let row = row?;
        let field = |i: usize| -> Result<&str> {
            row.get(i).ok_or_else(|| Error::InvalidParameter(format!("operator row has {} fields", row.len())))
        };
        let bad = |s: &str| Error::InvalidParameter(format!("bad operator field {s:?}"));
        let i: usize = field(0)?.parse().map_err(|_| bad(field(0).unwrap_or("")))?;
        let j: usize = field(1)?.parse().map_err(|_| bad(field(1).unwrap_or("")))?;
        let re: f64 = field(2)?.parse().map_err(|_| bad(field(2).unwrap_or("")))?;
        let im: f64 = field(3)?.parse().map_err(|_| bad(field(3).unwrap_or("")))?;
        dim = dim.max(i + 1).max(j + 1);
        entries.push((i, j, C64::new(re, im)));
    }
    if dim == 0 {
        return Err(Error::InvalidParameter("empty operator file".into()));
    }
    let mut op = Operator::zeros(dim).into_mat();
    for (i, j, z) in entries {
        op[(i, j)] = z;
    }
    Operator::from_mat(op)
}
