use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::io::Write;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::args::Format;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Metadata {
    pub model: String,
    pub parameters: BTreeMap<String, Value>,
    pub seed: u64,
    pub draws: usize,
    pub burn_in: usize,
    pub a: f64,
    pub b: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub timestamp: Option<u64>,
    /// Derived scalars: errors, iteration counts, reported probabilities.
    pub summary: BTreeMap<String, Value>,
}

/// One run: per-node arrays over the interior nodes plus metadata.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunOutput {
    pub metadata: Metadata,
    pub x: Vec<f64>,
    pub fd_solution: Vec<f64>,
    pub posterior_mean: Vec<f64>,
    pub ci_lower: Vec<f64>,
    pub ci_upper: Vec<f64>,
    pub width: Vec<f64>,
    pub scaled_width: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub exact: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub abs_error: Option<Vec<f64>>,
    /// `None` entries mark nodes where the exact value is zero.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rel_error: Option<Vec<Option<f64>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub truncation_leading: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub reference: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub proxy_mean: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub proxy_limit_sum: Option<Vec<f64>>,
}

impl RunOutput {
    pub fn len(&self) -> usize {
        self.x.len()
    }

    pub fn is_empty(&self) -> bool {
        self.x.is_empty()
    }

    /// Name and length of the first array whose length differs from `x`.
    pub fn check_lengths(&self) -> Result<(), (String, usize)> {
        let n = self.x.len();
        for (name, len) in self.columns().iter().map(|(name, col)| (name, col.len())) {
            if len != n {
                return Err((name.to_string(), len));
            }
        }
        Ok(())
    }

    fn columns(&self) -> Vec<(&'static str, Column<'_>)> {
        let mut cols = vec![
            ("x", Column::Plain(&self.x)),
            ("fd", Column::Plain(&self.fd_solution)),
            ("mean", Column::Plain(&self.posterior_mean)),
            ("lower", Column::Plain(&self.ci_lower)),
            ("upper", Column::Plain(&self.ci_upper)),
            ("width", Column::Plain(&self.width)),
            ("scaled_width", Column::Plain(&self.scaled_width)),
        ];
        let optional = [
            ("exact", &self.exact),
            ("abs_error", &self.abs_error),
            ("truncation_leading", &self.truncation_leading),
            ("reference", &self.reference),
            ("proxy_mean", &self.proxy_mean),
            ("proxy_limit_sum", &self.proxy_limit_sum),
        ];
        for (name, col) in optional {
            if let Some(v) = col {
                cols.push((name, Column::Plain(v)));
            }
        }
        if let Some(v) = &self.rel_error {
            cols.push(("rel_error", Column::Partial(v)));
        }
        cols
    }

    pub fn to_json(&self) -> serde_json::Result<String> {
        let mut s = serde_json::to_string_pretty(self)?;
        s.push('\n');
        Ok(s)
    }

    pub fn from_json(text: &str) -> serde_json::Result<Self> {
        serde_json::from_str(text)
    }

    /// One header row, then one row per node; 17 significant digits.
    pub fn to_csv(&self) -> String {
        let cols = self.columns();
        let mut out = cols.iter().map(|(name, _)| *name).collect::<Vec<_>>().join(",");
        out.push('\n');
        for i in 0..self.len() {
            for (k, (_, col)) in cols.iter().enumerate() {
                if k > 0 {
                    out.push(',');
                }
                if let Some(v) = col.get(i) {
                    write!(out, "{v:.16e}").expect("writing to a String");
                }
            }
            out.push('\n');
        }
        out
    }

    pub fn render(&self, format: Format) -> serde_json::Result<String> {
        match format {
            Format::Json => self.to_json(),
            Format::Csv => Ok(self.to_csv()),
        }
    }

    pub fn write_to(&self, format: Format, sink: &mut dyn Write) -> anyhow::Result<()> {
        sink.write_all(self.render(format)?.as_bytes())?;
        Ok(())
    }
}

enum Column<'a> {
    Plain(&'a [f64]),
    Partial(&'a [Option<f64>]),
}

impl Column<'_> {
    fn len(&self) -> usize {
        match self {
            Column::Plain(v) => v.len(),
            Column::Partial(v) => v.len(),
        }
    }

    fn get(&self, i: usize) -> Option<f64> {
        match self {
            Column::Plain(v) => Some(v[i]),
            Column::Partial(v) => v[i],
        }
    }
}
