//! Text form of a [`SearchReport`].

use std::fmt::Write as _;

use crate::model::SearchReport;

/// `Matches:`, `Checksum:` and `Multi:` lines, preceded by one
/// `Pattern <p>: <pos|-1>` line per pattern when `verbose` is set.
pub fn to_text(report: &SearchReport, verbose: bool) -> String {
    let mut out = String::new();
    if verbose {
        for (p, pos) in report.pat_found_signed().iter().enumerate() {
            writeln!(out, "Pattern {p}: {pos}").unwrap();
        }
    }
    writeln!(out, "Matches: {}", report.pat_matches).unwrap();
    writeln!(out, "Checksum: {}", report.checksum_found).unwrap();
    writeln!(out, "Multi: {}", report.multi_match_positions).unwrap();
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::PatternSet;
    use crate::oracle::search_all_sequential;

    #[test]
    fn fixture_text() {
        let seq = "GATTACA".parse().unwrap();
        let pats = PatternSet::parse(&["TTA", "CA", "A", "ACA", "GG"]).unwrap();
        let r = search_all_sequential(&seq, &pats);
        assert_eq!(to_text(&r, false), "Matches: 4\nChecksum: 12\nMulti: 3\n");
        let verbose = to_text(&r, true);
        assert!(verbose.starts_with("Pattern 0: 2\nPattern 1: 5\n"));
        assert!(verbose.contains("Pattern 4: -1\n"));
    }
}
