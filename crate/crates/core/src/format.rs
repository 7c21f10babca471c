//! Plain-text design format.
//!
//! ```text
//! # label
//! 1 7 13 19 25 31
//! 2 8 14 20 26 32
//! ...
//!
//! 1 2 3 4 5 6
//! ...
//! ```
//!
//! One block per line, varieties 1-based and whitespace separated; a blank
//! line ends a replicate; lines starting with `#` are comments and the first
//! one carries the label. The block size is taken from the first block and
//! the variety count from the number of blocks in the first replicate.

use std::fmt::Write as _;

use crate::design::{Block, Replicate, ResolvableDesign};
use crate::error::ParseError;

pub fn read_design(text: &str) -> Result<ResolvableDesign, ParseError> {
    let mut label: Option<String> = None;
    // (line number of each block, its numbers), grouped by replicate
    let mut replicates: Vec<Vec<(usize, Vec<usize>)>> = Vec::new();
    let mut current: Vec<(usize, Vec<usize>)> = Vec::new();

    for (i, raw) in text.lines().enumerate() {
        let line_no = i + 1;
        let line = raw.trim();
        if let Some(comment) = line.strip_prefix('#') {
            if label.is_none() {
                label = Some(comment.trim().to_string());
            }
            continue;
        }
        if line.is_empty() {
            if !current.is_empty() {
                replicates.push(std::mem::take(&mut current));
            }
            continue;
        }
        let numbers = line
            .split_whitespace()
            .map(|tok| {
                tok.parse::<usize>().map_err(|_| ParseError::Malformed {
                    line: line_no,
                    message: format!("`{tok}` is not a variety number"),
                })
            })
            .collect::<Result<Vec<_>, _>>()?;
        current.push((line_no, numbers));
    }
    if !current.is_empty() {
        replicates.push(current);
    }
    let first = replicates.first().ok_or(ParseError::NoReplicates)?;
    let k = first[0].1.len();
    let v = k * first.len();

    let mut reps = Vec::with_capacity(replicates.len());
    for (ri, rep) in replicates.iter().enumerate() {
        let last_line = rep.last().map(|b| b.0).unwrap_or(0);
        if rep.len() != first.len() {
            return Err(ParseError::WrongBlockCount {
                replicate: ri + 1,
                line: last_line,
                found: rep.len(),
                expected: first.len(),
            });
        }
        let mut blocks = Vec::with_capacity(rep.len());
        for (line, numbers) in rep {
            if numbers.len() != k {
                return Err(ParseError::WrongBlockSize {
                    line: *line,
                    found: numbers.len(),
                    expected: k,
                });
            }
            if let Some(&bad) = numbers.iter().find(|&&n| n == 0 || n > v) {
                return Err(ParseError::OutOfRange { line: *line, number: bad, v });
            }
            blocks.push(Block::from_numbers(numbers.iter().copied()));
        }
        reps.push(Replicate::new(blocks));
    }
    Ok(ResolvableDesign::new(v, k, reps, label.unwrap_or_default())?)
}

/// Canonical text: label comment (if any), sorted blocks with single spaces,
/// one blank line between replicates, trailing newline.
pub fn write_design(design: &ResolvableDesign) -> String {
    let mut out = String::new();
    if !design.label().is_empty() {
        let _ = writeln!(out, "# {}", design.label());
    }
    for (i, rep) in design.replicates().iter().enumerate() {
        if i > 0 {
            out.push('\n');
        }
        for block in rep.blocks() {
            let _ = writeln!(out, "{block}");
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    const SMALL: &str = "# toy\n1 2\n3 4\n\n1   3\n2 4\n";

    #[test]
    fn reads_small_design() {
        let d = read_design(SMALL).unwrap();
        assert_eq!((d.v(), d.k(), d.r()), (4, 2, 2));
        assert_eq!(d.label(), "toy");
        assert_eq!(write_design(&d), "# toy\n1 2\n3 4\n\n1 3\n2 4\n");
    }

    #[test]
    fn empty_text_has_no_replicates() {
        assert_eq!(read_design(""), Err(ParseError::NoReplicates));
        assert_eq!(read_design("# only a comment\n\n"), Err(ParseError::NoReplicates));
    }

    #[test]
    fn reports_line_numbers() {
        assert!(matches!(
            read_design("1 2\n3 x\n"),
            Err(ParseError::Malformed { line: 2, .. })
        ));
        assert!(matches!(
            read_design("1 2\n3 5\n"),
            Err(ParseError::OutOfRange { line: 2, number: 5, v: 4 })
        ));
        assert!(matches!(
            read_design("1 2\n3 4\n\n1 3\n2 4 1\n"),
            Err(ParseError::WrongBlockSize { line: 5, found: 3, expected: 2 })
        ));
        assert!(matches!(
            read_design("1 2\n3 4\n\n1 3\n"),
            Err(ParseError::WrongBlockCount { replicate: 2, .. })
        ));
    }

    #[test]
    fn rejects_non_partition() {
        assert!(matches!(read_design("1 2\n2 4\n"), Err(ParseError::Invalid(_))));
    }

    #[test]
    fn extra_blank_lines_and_tabs_are_accepted() {
        let d = read_design("\n\n2\t1\n4 3\n\n\n\n3 1\n4 2\n\n").unwrap();
        assert_eq!(write_design(&d), "1 2\n3 4\n\n1 3\n2 4\n");
    }
}
