//! Trajectory CSV format: header `n,s,e,i,r`, one row per day, every value
//! with 17 significant digits, `\n` line endings.

use std::io::{self, BufRead, Write};

use crate::model::SimplexState;
use crate::qso::fmt_sig17;
use crate::trajectory::Trajectory;

pub const CSV_HEADER: &str = "n,s,e,i,r";

pub fn write_csv<W: Write>(t: &Trajectory, mut out: W) -> io::Result<()> {
    writeln!(out, "{CSV_HEADER}")?;
    for (n, x) in t.states().iter().enumerate() {
        writeln!(
            out,
            "{n},{},{},{},{}",
            fmt_sig17(x.s),
            fmt_sig17(x.e),
            fmt_sig17(x.i),
            fmt_sig17(x.r)
        )?;
    }
    out.flush()
}

pub fn to_csv_string(t: &Trajectory) -> String {
    let mut buf = Vec::new();
    write_csv(t, &mut buf).expect("writing to a Vec cannot fail");
    String::from_utf8(buf).expect("CSV output is ASCII")
}

/// Parses the CSV written by [`write_csv`]. States are not checked against
/// the simplex.
pub fn read_csv<R: BufRead>(input: R) -> io::Result<Vec<SimplexState>> {
    let bad = |msg: String| io::Error::new(io::ErrorKind::InvalidData, msg);
    let mut lines = input.lines();
    match lines.next() {
        Some(Ok(h)) if h == CSV_HEADER => {}
        Some(Ok(h)) => return Err(bad(format!("unexpected header `{h}`"))),
        Some(Err(e)) => return Err(e),
        None => return Err(bad("empty input".into())),
    }
    let mut states = Vec::new();
    for (row, line) in lines.enumerate() {
        let line = line?;
        if line.is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != 5 {
            return Err(bad(format!(
                "row {row}: expected 5 fields, got {}",
                fields.len()
            )));
        }
        let n: usize = fields[0]
            .parse()
            .map_err(|e| bad(format!("row {row}: day index: {e}")))?;
        if n != row {
            return Err(bad(format!("row {row}: day index {n} out of sequence")));
        }
        let mut xs = [0.0; 4];
        for (slot, field) in xs.iter_mut().zip(&fields[1..]) {
            *slot = field
                .parse()
                .map_err(|e| bad(format!("row {row}: value `{field}`: {e}")))?;
        }
        states.push(SimplexState::from_array(xs));
    }
    Ok(states)
}
