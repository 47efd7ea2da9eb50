use std::io::Write;

use serde::Serialize;

/// How a row's value is compared with its reference.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Check {
    /// `|value − reference| ≤ tolerance`.
    Near,
    /// `value ≥ reference − tolerance`.
    AtLeast,
    /// Reported only; never passes or fails.
    Estimate,
}

impl Check {
    fn as_str(self) -> &'static str {
        match self {
            Check::Near => "near",
            Check::AtLeast => "at_least",
            Check::Estimate => "estimate",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(untagged)]
pub enum Cell {
    Text(String),
    Int(u64),
    Float(f64),
}

impl From<&str> for Cell {
    fn from(s: &str) -> Self {
        Cell::Text(s.to_string())
    }
}

impl From<String> for Cell {
    fn from(s: String) -> Self {
        Cell::Text(s)
    }
}

impl From<usize> for Cell {
    fn from(n: usize) -> Self {
        Cell::Int(n as u64)
    }
}

impl From<f64> for Cell {
    fn from(x: f64) -> Self {
        Cell::Float(x)
    }
}

impl Cell {
    fn render(&self) -> String {
        match self {
            Cell::Text(s) => s.clone(),
            Cell::Int(n) => n.to_string(),
            Cell::Float(x) => fmt_float(*x),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Row {
    pub context: Vec<Cell>,
    pub value: f64,
    pub stderr: Option<f64>,
    pub reference: Option<f64>,
    pub tolerance: Option<f64>,
    pub check: Check,
    pub pass: Option<bool>,
}

impl Row {
    pub fn near(context: Vec<Cell>, value: f64, reference: f64, tolerance: f64) -> Self {
        let pass = (value - reference).abs() <= tolerance;
        Self::build(
            context,
            value,
            Some(reference),
            Some(tolerance),
            Check::Near,
            Some(pass),
        )
    }

    pub fn at_least(context: Vec<Cell>, value: f64, reference: f64, tolerance: f64) -> Self {
        let pass = value >= reference - tolerance;
        Self::build(
            context,
            value,
            Some(reference),
            Some(tolerance),
            Check::AtLeast,
            Some(pass),
        )
    }

    pub fn estimate(context: Vec<Cell>, value: f64, reference: Option<f64>) -> Self {
        Self::build(context, value, reference, None, Check::Estimate, None)
    }

    pub fn with_stderr(mut self, stderr: f64) -> Self {
        self.stderr = Some(stderr);
        self
    }

    fn build(
        context: Vec<Cell>,
        value: f64,
        reference: Option<f64>,
        tolerance: Option<f64>,
        check: Check,
        pass: Option<bool>,
    ) -> Self {
        // NaN never passes
        let pass = pass.map(|p| p && value.is_finite());
        Self {
            context,
            value,
            stderr: None,
            reference,
            tolerance,
            check,
            pass,
        }
    }
}

/// Result table of one experiment. The trailing columns are the same for
/// every experiment: value, stderr, reference, tolerance, check, pass.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Report {
    pub experiment: String,
    pub context_columns: Vec<String>,
    pub rows: Vec<Row>,
}

pub const TRAILING_COLUMNS: [&str; 6] =
    ["value", "stderr", "reference", "tolerance", "check", "pass"];

impl Report {
    pub fn new(experiment: &str, context_columns: &[&str]) -> Self {
        Self {
            experiment: experiment.to_string(),
            context_columns: context_columns.iter().map(|s| s.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Row) {
        debug_assert_eq!(row.context.len(), self.context_columns.len());
        self.rows.push(row);
    }

    pub fn failures(&self) -> usize {
        self.rows.iter().filter(|r| r.pass == Some(false)).count()
    }

    pub fn passed(&self) -> bool {
        self.failures() == 0
    }

    pub fn header(&self) -> Vec<String> {
        let mut h = self.context_columns.clone();
        h.extend(TRAILING_COLUMNS.iter().map(|s| s.to_string()));
        h
    }

    pub fn write_csv<W: Write>(&self, out: W) -> csv::Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(self.header())?;
        let opt = |x: Option<f64>| x.map(fmt_float).unwrap_or_default();
        for row in &self.rows {
            let mut rec: Vec<String> = row.context.iter().map(Cell::render).collect();
            rec.push(fmt_float(row.value));
            rec.push(opt(row.stderr));
            rec.push(opt(row.reference));
            rec.push(opt(row.tolerance));
            rec.push(row.check.as_str().to_string());
            rec.push(row.pass.map(|p| p.to_string()).unwrap_or_default());
            w.write_record(&rec)?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn to_csv_string(&self) -> String {
        let mut buf = Vec::new();
        self.write_csv(&mut buf).expect("writing to memory");
        String::from_utf8(buf).expect("csv output is utf-8")
    }

    pub fn to_json_string(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }
}

/// Twelve significant digits, trailing zeros trimmed; scientific notation
/// outside `1e-5 ≤ |x| < 1e12`.
pub fn fmt_float(x: f64) -> String {
    const DIGITS: i32 = 12;
    if x == 0.0 {
        return "0".into();
    }
    if !x.is_finite() {
        return x.to_string();
    }
    let sci = format!("{:.*e}", (DIGITS - 1) as usize, x);
    let (mantissa, exp) = sci.split_once('e').expect("exponent present");
    let exp: i32 = exp.parse().expect("integer exponent");
    if !(-5..12).contains(&exp) {
        return format!("{}e{exp}", trim_zeros(mantissa));
    }
    let decimals = (DIGITS - 1 - exp).max(0) as usize;
    trim_zeros(&format!("{x:.decimals$}")).to_string()
}

fn trim_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn float_formatting() {
        assert_eq!(fmt_float(0.5625), "0.5625");
        assert_eq!(
            fmt_float(0.5 + std::f64::consts::FRAC_1_SQRT_2 / 2.0),
            "0.853553390593"
        );
        assert_eq!(fmt_float(4.5), "4.5");
        assert_eq!(fmt_float(0.0), "0");
        assert_eq!(fmt_float(-0.25), "-0.25");
        assert_eq!(fmt_float(1e-9), "1e-9");
        assert_eq!(fmt_float(3.7e-15), "3.7e-15");
        assert_eq!(fmt_float(1.0 / 3.0), "0.333333333333");
        assert_eq!(fmt_float(123456.789), "123456.789");
        assert_eq!(fmt_float(0.000123456789012345), "0.000123456789012");
    }

    #[test]
    fn csv_layout_and_quoting() {
        let mut r = Report::new("demo", &["label", "n"]);
        r.push(Row::near(vec!["a,b".into(), 3usize.into()], 0.5, 0.5, 1e-9));
        r.push(Row::at_least(vec!["c".into(), 4usize.into()], 0.1, 0.2, 0.05).with_stderr(0.01));
        r.push(Row::estimate(vec!["e".into(), 5usize.into()], 0.3, None));
        let csv = r.to_csv_string();
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(
            lines[0],
            "label,n,value,stderr,reference,tolerance,check,pass"
        );
        assert_eq!(lines[1], "\"a,b\",3,0.5,,0.5,1e-9,near,true");
        assert_eq!(lines[2], "c,4,0.1,0.01,0.2,0.05,at_least,false");
        assert_eq!(lines[3], "e,5,0.3,,,,estimate,");
        assert_eq!(r.failures(), 1);
    }

    #[test]
    fn nan_never_passes() {
        assert_eq!(Row::near(vec![], f64::NAN, 0.0, 1.0).pass, Some(false));
        assert_eq!(Row::at_least(vec![], f64::NAN, 0.0, 1.0).pass, Some(false));
    }
}
