use crate::error::{Error, Result};

use super::ProblemInstance;

struct Token<'a> {
    line: usize,
    column: usize,
    text: &'a str,
}

/// Non-blank, non-comment lines split into tokens with 1-based coordinates.
fn data_lines(text: &str) -> Vec<(usize, Vec<Token<'_>>)> {
    text.lines()
        .enumerate()
        .filter_map(|(idx, raw)| {
            let trimmed = raw.trim_start();
            if trimmed.is_empty() || trimmed.starts_with('#') {
                return None;
            }
            let tokens = tokenize(raw, idx + 1);
            Some((idx + 1, tokens))
        })
        .collect()
}

fn tokenize(raw: &str, line: usize) -> Vec<Token<'_>> {
    let mut tokens = Vec::new();
    let mut start = None;
    for (i, ch) in raw.char_indices().chain(std::iter::once((raw.len(), ' '))) {
        match (ch.is_whitespace(), start) {
            (false, None) => start = Some(i),
            (true, Some(s)) => {
                tokens.push(Token {
                    line,
                    column: raw[..s].chars().count() + 1,
                    text: &raw[s..i],
                });
                start = None;
            }
            _ => {}
        }
    }
    tokens
}

fn number(tok: &Token<'_>) -> Result<f64> {
    match tok.text.parse::<f64>() {
        Ok(v) if v.is_finite() => Ok(v),
        _ => Err(Error::parse(
            tok.line,
            tok.column,
            format!("malformed number `{}`", tok.text),
        )),
    }
}

struct Grid {
    n: usize,
    rows: Vec<Vec<f64>>,
    // (line, column) of every cell
    at: Vec<Vec<(usize, usize)>>,
}

fn parse_grid(text: &str) -> Result<Grid> {
    let lines = data_lines(text);
    let mut iter = lines.iter();
    let (header_line, header) = iter
        .next()
        .ok_or_else(|| Error::parse(1, 1, "missing matrix size"))?;
    if header.len() != 1 {
        let col = header.get(1).map_or(1, |t| t.column);
        return Err(Error::parse(*header_line, col, "size line must hold a single integer"));
    }
    let n: usize = header[0].text.parse().map_err(|_| {
        Error::parse(
            *header_line,
            header[0].column,
            format!("malformed size `{}`", header[0].text),
        )
    })?;
    if n == 0 {
        return Err(Error::parse(*header_line, header[0].column, "size must be at least 1"));
    }

    let mut rows = Vec::with_capacity(n);
    let mut at = Vec::with_capacity(n);
    for row_idx in 0..n {
        let (line, tokens) = iter.next().ok_or_else(|| {
            let last = lines.last().map_or(1, |(l, _)| *l);
            Error::parse(last + 1, 1, format!("expected {n} rows, found {row_idx}"))
        })?;
        if tokens.len() != n {
            let col = tokens.get(n).map_or_else(
                || tokens.last().map_or(1, |t| t.column + t.text.chars().count()),
                |t| t.column,
            );
            return Err(Error::parse(
                *line,
                col,
                format!("row {row_idx} has {} entries, expected {n}", tokens.len()),
            ));
        }
        rows.push(tokens.iter().map(number).collect::<Result<Vec<_>>>()?);
        at.push(tokens.iter().map(|t| (t.line, t.column)).collect());
    }
    if let Some((line, tokens)) = iter.next() {
        return Err(Error::parse(*line, tokens[0].column, "unexpected content after matrix"));
    }
    Ok(Grid { n, rows, at })
}

fn check_non_negative(grid: &Grid) -> Result<()> {
    for (i, row) in grid.rows.iter().enumerate() {
        for (j, &v) in row.iter().enumerate() {
            if v < 0.0 {
                let (l, c) = grid.at[i][j];
                return Err(Error::parse(l, c, format!("negative entry {v}")));
            }
        }
    }
    Ok(())
}

/// Parses an open-path TSP distance matrix.
///
/// Format: the first non-comment line holds `n`, followed by `n` rows of `n`
/// whitespace-separated numbers. Lines starting with `#` are comments.
pub fn parse_distance_matrix(text: &str) -> Result<ProblemInstance> {
    let grid = parse_grid(text)?;
    check_non_negative(&grid)?;
    for i in 0..grid.n {
        let (l, c) = grid.at[i][i];
        if grid.rows[i][i] != 0.0 {
            return Err(Error::parse(l, c, format!("nonzero diagonal entry {}", grid.rows[i][i])));
        }
        for j in 0..i {
            if grid.rows[i][j] != grid.rows[j][i] {
                let (l, c) = grid.at[i][j];
                return Err(Error::parse(
                    l,
                    c,
                    format!(
                        "asymmetric matrix: d[{i}][{j}] = {} but d[{j}][{i}] = {}",
                        grid.rows[i][j], grid.rows[j][i]
                    ),
                ));
            }
        }
    }
    ProblemInstance::open_path_tsp(grid.rows)
}

/// Parses an assignment cost matrix in the same grid format; row `g`,
/// column `p` is the cost of placing gene `g` at position `p`.
pub fn parse_assignment_matrix(text: &str) -> Result<ProblemInstance> {
    let grid = parse_grid(text)?;
    check_non_negative(&grid)?;
    ProblemInstance::assignment(grid.rows)
}

/// Parses the `EUC_2D` subset of TSPLIB into an open-path instance.
/// Distances are Euclidean, rounded half up to the nearest integer.
pub fn parse_tsplib_euc2d(text: &str) -> Result<ProblemInstance> {
    let mut dimension: Option<usize> = None;
    let mut weight_type: Option<String> = None;
    let mut coords: Option<Vec<Option<(f64, f64)>>> = None;
    let mut in_coords = false;
    let mut last_line = 0;

    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        last_line = line;
        let trimmed = raw.trim();
        if trimmed.is_empty() {
            continue;
        }
        if trimmed == "EOF" {
            break;
        }
        if in_coords && trimmed.starts_with(|c: char| c.is_ascii_digit() || c == '-' || c == '+') {
            let tokens = tokenize(raw, line);
            if tokens.len() != 3 {
                return Err(Error::parse(line, 1, "coordinate line must be `index x y`"));
            }
            let index: usize = tokens[0].text.parse().map_err(|_| {
                Error::parse(line, tokens[0].column, format!("malformed node index `{}`", tokens[0].text))
            })?;
            let x = number(&tokens[1])?;
            let y = number(&tokens[2])?;
            let nodes = coords.as_mut().expect("section opened after DIMENSION");
            if index == 0 || index > nodes.len() {
                return Err(Error::parse(
                    line,
                    tokens[0].column,
                    format!("node index {index} outside 1..={}", nodes.len()),
                ));
            }
            if nodes[index - 1].replace((x, y)).is_some() {
                return Err(Error::parse(line, tokens[0].column, format!("duplicate node index {index}")));
            }
            continue;
        }
        in_coords = false;

        let (key, value) = match trimmed.split_once(':') {
            Some((k, v)) => (k.trim(), v.trim()),
            None => (trimmed, ""),
        };
        match key {
            "DIMENSION" => {
                let n: usize = value
                    .parse()
                    .map_err(|_| Error::parse(line, 1, format!("malformed DIMENSION `{value}`")))?;
                if n == 0 {
                    return Err(Error::parse(line, 1, "DIMENSION must be at least 1"));
                }
                dimension = Some(n);
            }
            "EDGE_WEIGHT_TYPE" => {
                if value != "EUC_2D" {
                    return Err(Error::parse(
                        line,
                        1,
                        format!("unsupported EDGE_WEIGHT_TYPE `{value}` (only EUC_2D)"),
                    ));
                }
                weight_type = Some(value.to_string());
            }
            "NODE_COORD_SECTION" => {
                let n = dimension
                    .ok_or_else(|| Error::parse(line, 1, "NODE_COORD_SECTION before DIMENSION"))?;
                if coords.is_some() {
                    return Err(Error::parse(line, 1, "repeated NODE_COORD_SECTION"));
                }
                coords = Some(vec![None; n]);
                in_coords = true;
            }
            "NAME" | "TYPE" | "COMMENT" => {}
            other => {
                return Err(Error::parse(line, 1, format!("unsupported TSPLIB keyword `{other}`")));
            }
        }
    }

    let end = last_line + 1;
    if weight_type.is_none() {
        return Err(Error::parse(end, 1, "missing EDGE_WEIGHT_TYPE"));
    }
    let nodes = coords.ok_or_else(|| Error::parse(end, 1, "missing NODE_COORD_SECTION"))?;
    let points = nodes
        .iter()
        .enumerate()
        .map(|(i, p)| p.ok_or_else(|| Error::parse(end, 1, format!("missing coordinates for node {}", i + 1))))
        .collect::<Result<Vec<_>>>()?;

    let rows = points
        .iter()
        .map(|&(xi, yi)| {
            points
                .iter()
                .map(|&(xj, yj)| ((xi - xj).hypot(yi - yj) + 0.5).floor())
                .collect()
        })
        .collect();
    ProblemInstance::open_path_tsp(rows)
}
