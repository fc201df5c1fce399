//! hMetis hypergraph files and partition files.

use std::fmt::Write as _;
use std::path::Path;

use crate::error::{Error, Result};
use crate::hypergraph::Hypergraph;
use crate::types::{BlockId, Weight};

fn malformed(line: usize, message: impl Into<String>) -> Error {
    Error::Malformed { line, message: message.into() }
}

/// Parses the hMetis format: a header `|E| |V| [fmt]`, one line of 1-based
/// pins per net (prefixed by its weight if `fmt` is 1 or 11), then one
/// weight line per vertex if `fmt` is 10 or 11. Lines starting with `%` are
/// comments.
pub fn parse_hgr(text: &str) -> Result<Hypergraph> {
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.starts_with('%') && !l.is_empty());

    let (header_line, header) = lines.next().ok_or_else(|| malformed(1, "missing header"))?;
    let fields = parse_numbers(header_line, header)?;
    let (num_nets, num_vertices, fmt) = match fields[..] {
        [e, v] => (e, v, 0),
        [e, v, f] => (e, v, f),
        _ => return Err(malformed(header_line, "header must be `|E| |V| [fmt]`")),
    };
    let (net_weighted, vertex_weighted) = match fmt {
        0 => (false, false),
        1 => (true, false),
        10 => (false, true),
        11 => (true, true),
        other => return Err(malformed(header_line, format!("unknown format code {other}"))),
    };

    let mut nets = Vec::with_capacity(num_nets as usize);
    let mut net_weights = Vec::with_capacity(num_nets as usize);
    for e in 0..num_nets {
        let (line, text) = lines
            .next()
            .ok_or_else(|| malformed(header_line, format!("expected {num_nets} nets, found {e}")))?;
        let mut values = parse_numbers(line, text)?.into_iter();
        if net_weighted {
            let w = values.next().ok_or_else(|| malformed(line, "missing net weight"))?;
            if w == 0 {
                return Err(malformed(line, "net weight must be positive"));
            }
            net_weights.push(w);
        }
        let pins: Vec<usize> = values
            .map(|p| {
                if p == 0 || p > num_vertices {
                    Err(malformed(line, format!("pin {p} out of range 1..={num_vertices}")))
                } else {
                    Ok(p as usize - 1)
                }
            })
            .collect::<Result<_>>()?;
        if pins.is_empty() {
            return Err(malformed(line, "net without pins"));
        }
        nets.push(pins);
    }

    let mut vertex_weights = Vec::new();
    if vertex_weighted {
        for v in 0..num_vertices {
            let (line, text) = lines
                .next()
                .ok_or_else(|| malformed(header_line, format!("expected {num_vertices} vertex weights, found {v}")))?;
            match parse_numbers(line, text)?[..] {
                [w] if w > 0 => vertex_weights.push(w),
                [_] => return Err(malformed(line, "vertex weight must be positive")),
                _ => return Err(malformed(line, "expected a single vertex weight")),
            }
        }
    }
    if let Some((line, _)) = lines.next() {
        return Err(malformed(line, "unexpected trailing content"));
    }

    Hypergraph::new(
        num_vertices as usize,
        nets,
        net_weighted.then_some(net_weights),
        vertex_weighted.then_some(vertex_weights),
    )
}

fn parse_numbers(line: usize, text: &str) -> Result<Vec<Weight>> {
    text.split_whitespace()
        .map(|t| t.parse::<Weight>().map_err(|_| malformed(line, format!("`{t}` is not a non-negative integer"))))
        .collect()
}

pub fn read_hgr(path: impl AsRef<Path>) -> Result<Hypergraph> {
    parse_hgr(&std::fs::read_to_string(path)?)
}

/// Writes `h` in hMetis format. Weights are written only when not all one.
pub fn format_hgr(h: &Hypergraph) -> String {
    let net_weighted = !h.has_unit_net_weights();
    let vertex_weighted = !h.has_unit_vertex_weights();
    let fmt = match (net_weighted, vertex_weighted) {
        (false, false) => "",
        (true, false) => " 1",
        (false, true) => " 10",
        (true, true) => " 11",
    };
    let mut out = String::new();
    let _ = writeln!(out, "{} {}{}", h.num_nets(), h.num_vertices(), fmt);
    for e in h.nets() {
        let mut line = String::new();
        if net_weighted {
            let _ = write!(line, "{} ", h.net_weight(e));
        }
        let pins: Vec<String> = h.pins(e).iter().map(|v| (v + 1).to_string()).collect();
        line.push_str(&pins.join(" "));
        out.push_str(&line);
        out.push('\n');
    }
    if vertex_weighted {
        for v in h.vertices() {
            let _ = writeln!(out, "{}", h.vertex_weight(v));
        }
    }
    out
}

pub fn write_hgr(path: impl AsRef<Path>, h: &Hypergraph) -> Result<()> {
    std::fs::write(path, format_hgr(h))?;
    Ok(())
}

/// Parses a partition file with one 0-based block ID per line.
pub fn parse_partition(text: &str, num_vertices: usize) -> Result<Vec<BlockId>> {
    let blocks: Vec<BlockId> = text
        .lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(i, l)| l.trim().parse().map_err(|_| malformed(i + 1, format!("`{}` is not a block id", l.trim()))))
        .collect::<Result<_>>()?;
    if blocks.len() != num_vertices {
        return Err(Error::InvalidPartition(format!("{} block ids for {num_vertices} vertices", blocks.len())));
    }
    Ok(blocks)
}

pub fn read_partition(path: impl AsRef<Path>, num_vertices: usize) -> Result<Vec<BlockId>> {
    parse_partition(&std::fs::read_to_string(path)?, num_vertices)
}

pub fn format_partition(blocks: &[BlockId]) -> String {
    let mut out = String::with_capacity(blocks.len() * 3);
    for b in blocks {
        let _ = writeln!(out, "{b}");
    }
    out
}

pub fn write_partition(path: impl AsRef<Path>, blocks: &[BlockId]) -> Result<()> {
    std::fs::write(path, format_partition(blocks))?;
    Ok(())
}
