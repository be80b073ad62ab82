//! Plain CSV writing. Floats carry 17 significant digits so that values
//! round-trip exactly.

use std::fmt::Write;

pub fn num(x: f64) -> String {
    format!("{x:.16e}")
}

#[derive(Debug, Default)]
pub struct Table {
    text: String,
}

impl Table {
    pub fn new(comment: &str, header: &[&str]) -> Self {
        let mut t = Self::default();
        t.comment(comment);
        t.row(header.iter().map(|s| s.to_string()));
        t
    }

    pub fn comment(&mut self, line: &str) {
        writeln!(self.text, "{line}").unwrap();
    }

    pub fn row<I: IntoIterator<Item = String>>(&mut self, cells: I) {
        let cells: Vec<String> = cells.into_iter().collect();
        writeln!(self.text, "{}", cells.join(",")).unwrap();
    }

    pub fn into_string(self) -> String {
        self.text
    }
}

/// Builds a row from heterogeneous cells.
#[macro_export]
macro_rules! cells {
    ($($x:expr),* $(,)?) => { vec![$($x.to_string()),*] };
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn seventeen_digits_round_trip() {
        for x in [0.1, -2.0 / 3.0, 1e-300, 12345.678901234567] {
            let s = num(x);
            assert_eq!(s.parse::<f64>().unwrap(), x);
            assert_eq!(s.split('e').next().unwrap().trim_start_matches('-').len(), 18);
        }
    }
}
