//! CSV helpers. Floats use the shortest representation that round-trips,
//! switching to exponent form outside `[1e-5, 1e16)`.

pub fn float(x: f64) -> String {
    let m = x.abs();
    if x == 0.0 || !x.is_finite() {
        format!("{x}")
    } else if !(1e-5..1e16).contains(&m) {
        format!("{x:e}")
    } else {
        format!("{x}")
    }
}

/// Accumulates LF-terminated CSV rows.
#[derive(Debug, Clone, Default)]
pub struct Csv {
    text: String,
}

impl Csv {
    pub fn with_header(columns: &[&str]) -> Self {
        let mut c = Csv::default();
        c.row(columns.iter().map(|s| s.to_string()));
        c
    }

    pub fn row<I: IntoIterator<Item = String>>(&mut self, fields: I) {
        let line: Vec<String> = fields.into_iter().collect();
        self.text.push_str(&line.join(","));
        self.text.push('\n');
    }

    pub fn into_string(self) -> String {
        self.text
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn float_forms() {
        assert_eq!(float(0.0), "0");
        assert_eq!(float(1.5), "1.5");
        assert_eq!(float(0.1), "0.1");
        assert_eq!(float(-2e-7), "-2e-7");
        assert_eq!(float(4.1e-5), "0.000041");
        assert_eq!(float(1e16), "1e16");
        assert_eq!(float(1.0), "1");
        for x in [std::f64::consts::PI, 1.0 / 3.0, 6.02e23, -1.234_567_890_123e-9] {
            assert_eq!(float(x).parse::<f64>().unwrap(), x);
        }
    }

    #[test]
    fn rows_end_with_lf() {
        let mut c = Csv::with_header(&["t", "x"]);
        c.row([float(0.5), float(-1.0)]);
        assert_eq!(c.into_string(), "t,x\n0.5,-1\n");
    }
}
