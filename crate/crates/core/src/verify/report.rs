//! Verification report: a text table and its CSV twin.

pub const REPORT_HEADER: &str = "check,maxResidual,order,pass";

#[derive(Debug, Clone, PartialEq)]
pub struct CheckRow {
    pub check: String,
    /// Largest residual, or the worst violation for inequalities (non-positive
    /// when the inequality holds strictly).
    pub max_residual: f64,
    pub order: Option<f64>,
    pub pass: bool,
}

impl CheckRow {
    pub fn new(check: impl Into<String>, max_residual: f64, order: Option<f64>, pass: bool) -> Self {
        CheckRow { check: check.into(), max_residual, order, pass }
    }

    fn fields(&self) -> [String; 4] {
        [
            self.check.clone(),
            format!("{:.6e}", self.max_residual),
            self.order.map(|o| format!("{o:.3}")).unwrap_or_default(),
            self.pass.to_string(),
        ]
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct VerificationReport {
    pub rows: Vec<CheckRow>,
}

impl VerificationReport {
    pub fn push(&mut self, row: CheckRow) {
        self.rows.push(row);
    }

    pub fn extend(&mut self, rows: impl IntoIterator<Item = CheckRow>) {
        self.rows.extend(rows);
    }

    pub fn all_pass(&self) -> bool {
        self.rows.iter().all(|r| r.pass)
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from(REPORT_HEADER);
        out.push('\n');
        for r in &self.rows {
            out.push_str(&r.fields().join(","));
            out.push('\n');
        }
        out
    }

    /// Column-aligned rendering of the same table.
    pub fn to_text(&self) -> String {
        let header: Vec<String> = REPORT_HEADER.split(',').map(str::to_string).collect();
        let body: Vec<[String; 4]> = self.rows.iter().map(CheckRow::fields).collect();
        let mut width = [0usize; 4];
        for row in std::iter::once(&header[..]).chain(body.iter().map(|r| &r[..])) {
            for (w, cell) in width.iter_mut().zip(row) {
                *w = (*w).max(cell.len());
            }
        }
        let line = |cells: &[String]| {
            let padded: Vec<String> = cells.iter().zip(&width).map(|(c, w)| format!("{c:<w$}")).collect();
            padded.join("  ").trim_end().to_string() + "\n"
        };
        let mut out = line(&header);
        for row in &body {
            out.push_str(&line(row));
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_and_text_agree() {
        let mut r = VerificationReport::default();
        r.push(CheckRow::new("residual_h", 1.5e-3, Some(1.93), true));
        r.push(CheckRow::new("rbar_band", -0.2, None, true));
        let csv = r.to_csv();
        assert_eq!(csv.lines().next().unwrap(), REPORT_HEADER);
        assert_eq!(csv.lines().nth(1).unwrap(), "residual_h,1.500000e-3,1.930,true");
        assert_eq!(csv.lines().nth(2).unwrap(), "rbar_band,-2.000000e-1,,true");
        let text = r.to_text();
        assert!(text.starts_with("check"));
        assert_eq!(text.lines().count(), 3);
        assert!(r.all_pass());
    }
}
