use std::path::PathBuf;

use serde::{Deserialize, Serialize};

use super::CampaignError;

/// A covered function: the only places mutations are allowed.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TargetSpec {
    pub file: PathBuf,
    pub function: String,
    pub coverage_hits: u64,
}

/// Parse `file<TAB>function<TAB>hits` rows. Rows with zero hits are dropped;
/// blank lines and `#` comments are ignored.
pub fn load_coverage(report: &str) -> Result<Vec<TargetSpec>, CampaignError> {
    let mut out = Vec::new();
    for (i, line) in report.lines().enumerate() {
        let line_no = i + 1;
        let trimmed = line.trim_end_matches('\r');
        if trimmed.trim().is_empty() || trimmed.starts_with('#') {
            continue;
        }
        let cols: Vec<&str> = trimmed.split('\t').collect();
        let malformed = |reason: String| CampaignError::MalformedRow { line: line_no, reason };
        if cols.len() != 3 {
            return Err(malformed(format!("expected 3 tab-separated columns, found {}", cols.len())));
        }
        let (file, function) = (cols[0].trim(), cols[1].trim());
        if file.is_empty() || function.is_empty() {
            return Err(malformed("empty file or function column".into()));
        }
        let hits: u64 = cols[2]
            .trim()
            .parse()
            .map_err(|_| malformed(format!("hit count {:?} is not a non-negative integer", cols[2])))?;
        if hits == 0 {
            continue;
        }
        out.push(TargetSpec {
            file: PathBuf::from(file),
            function: function.to_string(),
            coverage_hits: hits,
        });
    }
    Ok(out)
}
