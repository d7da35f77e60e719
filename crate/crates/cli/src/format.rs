//! Fixed number formatting for CSV output.

use std::io::Write;

/// `x` with 15 significant digits, like C's `%.15g`.
pub fn num(x: f64) -> String {
    if x.is_nan() {
        return "nan".into();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    if x == 0.0 {
        return "0".into();
    }
    let sci = format!("{x:.14e}");
    let (mantissa, exp) = sci.split_once('e').expect("exponent present");
    let exp: i32 = exp.parse().expect("integer exponent");
    if (-5..15).contains(&exp) {
        let decimals = (14 - exp).max(0) as usize;
        trim(&format!("{x:.decimals$}")).to_string()
    } else {
        let sign = if exp < 0 { '-' } else { '+' };
        format!("{}e{sign}{:02}", trim(mantissa), exp.abs())
    }
}

fn trim(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

/// Writes one CSV row terminated by `\n`.
pub fn row(out: &mut dyn Write, values: impl IntoIterator<Item = f64>) -> std::io::Result<()> {
    let cells: Vec<String> = values.into_iter().map(num).collect();
    out.write_all(cells.join(",").as_bytes())?;
    out.write_all(b"\n")
}

pub fn header(out: &mut dyn Write, names: &[String]) -> std::io::Result<()> {
    out.write_all(names.join(",").as_bytes())?;
    out.write_all(b"\n")
}

/// `prefix1,...,prefixd`.
pub fn numbered(prefix: &str, d: usize) -> Vec<String> {
    (1..=d).map(|i| format!("{prefix}{i}")).collect()
}

#[cfg(test)]
mod tests {
    use super::num;

    #[test]
    fn significant_digits() {
        assert_eq!(num(0.427_583_576_155_807_04), "0.427583576155807");
        assert_eq!(num(1.0), "1");
        assert_eq!(num(-2.5), "-2.5");
        assert_eq!(num(1e-7), "1e-07");
        assert_eq!(num(123456789012345678.0), "1.23456789012346e+17");
        assert_eq!(num(0.0001), "0.0001");
        assert_eq!(num(100.0), "100");
        assert_eq!(num(f64::NEG_INFINITY), "-inf");
    }
}
