//! Letter-and-subscript notation for blocks (`A₁` is gene A at the first
//! position), used by the demos and the CLI.

use crate::error::{Error, Result};
use crate::model::{Bucket, Gene, Position};

const SUBSCRIPTS: [char; 10] = ['₀', '₁', '₂', '₃', '₄', '₅', '₆', '₇', '₈', '₉'];

/// `A`..`Z` for the first 26 genes, `G26`, `G27`, ... after that.
pub fn gene_label(gene: Gene) -> String {
    if gene.0 < 26 {
        char::from(b'A' + gene.0 as u8).to_string()
    } else {
        format!("G{}", gene.0)
    }
}

pub fn permutation_label(genes: &[Gene]) -> String {
    genes.iter().map(|&g| gene_label(g)).collect::<Vec<_>>().join(" ")
}

/// Gene label followed by the one-based position as subscript digits.
pub fn block_label(gene: Gene, position: Position) -> String {
    let digits: String = (position.0 + 1)
        .to_string()
        .chars()
        .map(|c| SUBSCRIPTS[c.to_digit(10).expect("decimal digit") as usize])
        .collect();
    format!("{}{digits}", gene_label(gene))
}

/// Parses `A1` or `A₁` style labels (single letter, one-based position).
pub fn parse_block_label(label: &str) -> Result<(Gene, Position)> {
    let bad = || Error::InvalidArgument(format!("malformed block label `{label}`"));
    let mut chars = label.trim().chars();
    let letter = chars.next().filter(char::is_ascii_uppercase).ok_or_else(bad)?;
    let digits: String = chars
        .map(|c| match SUBSCRIPTS.iter().position(|&s| s == c) {
            Some(d) => char::from(b'0' + d as u8),
            None => c,
        })
        .collect();
    let pos: usize = digits.parse().map_err(|_| bad())?;
    if pos == 0 {
        return Err(bad());
    }
    Ok((Gene((letter as u8 - b'A') as usize), Position(pos - 1)))
}

/// Two-column table: fitness value, then the bucket's blocks.
pub fn bucket_table(buckets: &[Bucket]) -> String {
    let mut out = String::from("Fitness value\tBuildingBlocks\n");
    for bucket in buckets {
        let blocks: Vec<String> = bucket
            .blocks
            .iter()
            .map(|b| block_label(b.gene, b.position))
            .collect();
        out.push_str(&format!("{}\t{}\n", bucket.fitness, blocks.join(", ")));
    }
    out
}
