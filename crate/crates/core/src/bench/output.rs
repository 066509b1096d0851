use std::io::Write;

use serde::Serialize;

use crate::error::Result;

/// Significant digits in CSV output.
pub const SIG_DIGITS: usize = 12;

/// `x` with [`SIG_DIGITS`] significant digits, in plain decimal notation when
/// the exponent is moderate.
pub fn format_sig(x: f64) -> String {
    if !x.is_finite() {
        return x.to_string();
    }
    if x == 0.0 {
        return "0".into();
    }
    let exp = x.abs().log10().floor() as i32;
    if (-5..15).contains(&exp) {
        let decimals = (SIG_DIGITS as i32 - 1 - exp).max(0) as usize;
        format!("{x:.decimals$}")
    } else {
        format!("{x:.*e}", SIG_DIGITS - 1)
    }
}

/// Empty for `None`.
pub fn opt_sig(x: Option<f64>) -> String {
    x.map(format_sig).unwrap_or_default()
}

/// A flat record with a fixed column order.
pub trait CsvRow {
    fn header() -> Vec<&'static str>;
    fn fields(&self) -> Vec<String>;
}

pub fn write_csv<R: CsvRow, W: Write>(rows: &[R], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(R::header())?;
    for r in rows {
        w.write_record(r.fields())?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_json<T: Serialize + ?Sized, W: Write>(value: &T, mut out: W) -> Result<()> {
    serde_json::to_writer_pretty(&mut out, value)?;
    out.write_all(b"\n")?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn twelve_significant_digits() {
        assert_eq!(format_sig((17f64.sqrt() - 3.0) / 2.0), "0.561552812809");
        assert_eq!(format_sig(10.0 / 19.0), "0.526315789474");
        assert_eq!(format_sig(0.5), "0.500000000000");
        assert_eq!(format_sig(12.0), "12.0000000000");
        assert_eq!(format_sig(0.0), "0");
        assert_eq!(format_sig(-1.25e-9), "-1.25000000000e-9");
    }
}
