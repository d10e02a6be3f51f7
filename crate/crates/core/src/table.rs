//! Fixed-precision numeric text for CSV output.

use std::io::Write;

use crate::error::Result;

/// Nine significant digits in scientific notation; `-0` prints as `0`.
pub fn format_number(x: f64) -> String {
    if x == 0.0 {
        return "0.00000000e0".to_string();
    }
    format!("{x:.8e}")
}

/// Writes a header and rows of numbers as comma-separated lines with LF
/// endings.
pub fn write_csv<W: Write>(mut w: W, header: &[&str], rows: &[Vec<f64>]) -> Result<()> {
    writeln!(w, "{}", header.join(","))?;
    for row in rows {
        let fields: Vec<String> = row.iter().map(|&x| format_number(x)).collect();
        writeln!(w, "{}", fields.join(","))?;
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn number_format() {
        assert_eq!(format_number(0.611684969), "6.11684969e-1");
        assert_eq!(format_number(1.0), "1.00000000e0");
        assert_eq!(format_number(-0.0), "0.00000000e0");
        assert_eq!(format_number(-2.5e-12), "-2.50000000e-12");
        assert_eq!(format_number(0.0).parse::<f64>().unwrap(), 0.0);
    }

    #[test]
    fn csv_layout() {
        let mut buf = Vec::new();
        write_csv(&mut buf, &["t", "x"], &[vec![0.0, 1.0], vec![0.5, -0.25]]).unwrap();
        assert_eq!(
            String::from_utf8(buf).unwrap(),
            "t,x\n0.00000000e0,1.00000000e0\n5.00000000e-1,-2.50000000e-1\n"
        );
    }
}
