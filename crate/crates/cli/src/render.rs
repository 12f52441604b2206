use std::io::Write;

use anyhow::Result;
use serde::Serialize;

/// `%.15g`: 15 significant digits, trailing zeros trimmed, scientific
/// notation outside `1e-5 ≤ |x| < 1e15`.
pub fn g15(x: f64) -> String {
    if x == 0.0 {
        return "0".into();
    }
    if !x.is_finite() {
        return x.to_string();
    }
    let sci = format!("{:.14e}", x);
    let (mantissa, exp) = sci.split_once('e').expect("exponent");
    let exp: i32 = exp.parse().expect("integer exponent");
    if !(-5..15).contains(&exp) {
        return format!("{}e{}{:02}", trim(mantissa), if exp < 0 { '-' } else { '+' }, exp.abs());
    }
    let decimals = (14 - exp).max(0) as usize;
    trim(&format!("{:.*}", decimals, x)).to_string()
}

fn trim(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

pub fn opt(x: Option<f64>) -> String {
    x.map(g15).unwrap_or_default()
}

pub fn csv_line<W: Write + ?Sized>(out: &mut W, fields: &[String]) -> Result<()> {
    writeln!(out, "{}", fields.join(","))?;
    Ok(())
}

pub fn json<W: Write + ?Sized, T: Serialize>(out: &mut W, value: &T) -> Result<()> {
    serde_json::to_writer_pretty(&mut *out, value)?;
    writeln!(out)?;
    Ok(())
}
