//! Stream elements, edge-list ingestion, and fully dynamic stream synthesis.
//!
//! Vertex ids found in input files are remapped to dense per-side ordinals in
//! first-seen order, so the left and right vertex spaces are disjoint by
//! construction and adjacency can be array-backed downstream.

use std::collections::hash_map::Entry;
use std::collections::{HashMap, HashSet};
use std::io::{BufRead, BufReader, Read, Write};

use rand::seq::index;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};

/// Which bipartition a vertex belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Side {
    Left,
    Right,
}

/// A vertex, namespaced per side: `(Left, 3)` and `(Right, 3)` are distinct.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct VertexId {
    pub side: Side,
    pub ordinal: u32,
}

impl VertexId {
    pub fn left(ordinal: u32) -> Self {
        VertexId { side: Side::Left, ordinal }
    }

    pub fn right(ordinal: u32) -> Self {
        VertexId { side: Side::Right, ordinal }
    }
}

/// An undirected edge joining a left vertex to a right vertex, stored as the
/// pair of per-side ordinals.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Edge {
    pub left: u32,
    pub right: u32,
}

impl Edge {
    pub fn new(left: u32, right: u32) -> Self {
        Edge { left, right }
    }

    pub fn left_vertex(&self) -> VertexId {
        VertexId::left(self.left)
    }

    pub fn right_vertex(&self) -> VertexId {
        VertexId::right(self.right)
    }
}

/// Whether a stream element inserts or deletes its edge.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Sign {
    Insert,
    Delete,
}

impl Sign {
    pub fn signum(&self) -> f64 {
        match self {
            Sign::Insert => 1.0,
            Sign::Delete => -1.0,
        }
    }
}

/// One element of a fully dynamic bipartite graph stream.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct EdgeEvent {
    pub edge: Edge,
    pub sign: Sign,
    /// Arrival order, 1-based and strictly increasing within a stream.
    pub index: u64,
}

/// Replay tracker enforcing that inserts target absent edges and deletes
/// target present edges.
#[derive(Debug, Default, Clone)]
pub struct StreamValidityState {
    present: HashSet<Edge>,
}

impl StreamValidityState {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn apply(&mut self, event: &EdgeEvent) -> Result<()> {
        match event.sign {
            Sign::Insert => {
                if !self.present.insert(event.edge) {
                    return Err(Error::StreamInvariantViolation {
                        index: event.index,
                        reason: "insert of an edge that is already present".into(),
                    });
                }
            }
            Sign::Delete => {
                if !self.present.remove(&event.edge) {
                    return Err(Error::StreamInvariantViolation {
                        index: event.index,
                        reason: "delete of an edge that is not present".into(),
                    });
                }
            }
        }
        Ok(())
    }

    pub fn contains(&self, edge: &Edge) -> bool {
        self.present.contains(edge)
    }

    pub fn live_edges(&self) -> usize {
        self.present.len()
    }
}

/// Succeeds iff every insert targets an absent edge and every delete a
/// present edge; the first violating index is reported otherwise.
pub fn validate_stream(events: &[EdgeEvent]) -> Result<()> {
    let mut state = StreamValidityState::new();
    let mut last_index = 0u64;
    for event in events {
        if event.index <= last_index {
            return Err(Error::StreamInvariantViolation {
                index: event.index,
                reason: "arrival index not strictly increasing".into(),
            });
        }
        last_index = event.index;
        state.apply(event)?;
    }
    Ok(())
}

/// Supported edge-list input formats.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EdgeListFormat {
    /// Whitespace-separated `left right [sign]` per line, sign in {+1,-1},
    /// default +1.
    PlainTsv,
    /// KONECT `out.*` edge list; lines starting with '%' are comments.
    Konect,
}

/// Counters for lines skipped during parsing.
#[derive(Debug, Default, Clone, PartialEq, Eq)]
pub struct ParseStats {
    pub duplicate_edges: u64,
    pub malformed_lines: u64,
    pub self_referential: u64,
    pub comments: u64,
}

/// Result of ingesting an edge-list file: events plus skip counters and the
/// sizes of the dense per-side id spaces.
#[derive(Debug, Clone)]
pub struct ParsedStream {
    pub events: Vec<EdgeEvent>,
    pub stats: ParseStats,
    pub left_vertices: u32,
    pub right_vertices: u32,
}

/// Parses a line-oriented edge list into a stream of events.
///
/// Raw ids are remapped to dense per-side ordinals in first-seen order.
/// Duplicate edges, self-referential lines, and malformed lines are skipped
/// and counted, not fatal.
pub fn parse_edge_list<R: Read>(source: R, format: EdgeListFormat) -> Result<ParsedStream> {
    let reader = BufReader::new(source);
    let mut left_ids: HashMap<i64, u32> = HashMap::new();
    let mut right_ids: HashMap<i64, u32> = HashMap::new();
    let mut validity = StreamValidityState::new();
    let mut stats = ParseStats::default();
    let mut events = Vec::new();
    let mut next_index = 1u64;

    for line in reader.lines() {
        let line = line?;
        let trimmed = line.trim();
        if trimmed.is_empty() {
            continue;
        }
        if format == EdgeListFormat::Konect && trimmed.starts_with('%') {
            stats.comments += 1;
            continue;
        }
        let mut fields = trimmed.split_whitespace();
        let raw_left = fields.next().and_then(|f| f.parse::<i64>().ok());
        let raw_right = fields.next().and_then(|f| f.parse::<i64>().ok());
        let (raw_left, raw_right) = match (raw_left, raw_right) {
            (Some(l), Some(r)) => (l, r),
            _ => {
                stats.malformed_lines += 1;
                continue;
            }
        };
        let sign = match format {
            EdgeListFormat::PlainTsv => match fields.next() {
                None => Sign::Insert,
                Some("+1") | Some("1") => Sign::Insert,
                Some("-1") => Sign::Delete,
                Some(_) => {
                    stats.malformed_lines += 1;
                    continue;
                }
            },
            EdgeListFormat::Konect => Sign::Insert,
        };
        if raw_left == raw_right {
            stats.self_referential += 1;
            continue;
        }
        let left = intern(&mut left_ids, raw_left);
        let right = intern(&mut right_ids, raw_right);
        let event = EdgeEvent {
            edge: Edge::new(left, right),
            sign,
            index: next_index,
        };
        if validity.apply(&event).is_err() {
            stats.duplicate_edges += 1;
            continue;
        }
        next_index += 1;
        events.push(event);
    }

    if events.is_empty() {
        return Err(Error::EmptyStream);
    }
    Ok(ParsedStream {
        events,
        stats,
        left_vertices: left_ids.len() as u32,
        right_vertices: right_ids.len() as u32,
    })
}

fn intern(ids: &mut HashMap<i64, u32>, raw: i64) -> u32 {
    let next = ids.len() as u32;
    match ids.entry(raw) {
        Entry::Occupied(e) => *e.get(),
        Entry::Vacant(e) => *e.insert(next),
    }
}

/// Turns an insertion-only base stream into a fully dynamic one by deleting
/// `floor(alpha * |base|)` distinct base edges, each placed uniformly at
/// random strictly after its own insertion. Deterministic per seed.
pub fn generate_dynamic_stream(
    base: &[EdgeEvent],
    alpha: f64,
    seed: u64,
) -> Result<Vec<EdgeEvent>> {
    if !(0.0..=1.0).contains(&alpha) || !alpha.is_finite() {
        return Err(Error::Config(format!("alpha must be in [0,1], got {alpha}")));
    }
    let mut seen = HashSet::new();
    for event in base {
        if event.sign != Sign::Insert {
            return Err(Error::Config("base stream must be insertion-only".into()));
        }
        if !seen.insert(event.edge) {
            return Err(Error::Config("base stream contains duplicate edges".into()));
        }
    }

    let n = base.len();
    let deletions = (alpha * n as f64).floor() as usize;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);

    // Deleted edges are drawn without replacement; a deletion of insertion i
    // gets a uniform slot in {i+1, ..., n}, where slot s means "just before
    // insertion s" (slot n: after the last insertion). Same-slot deletions
    // keep base order.
    let mut chosen: Vec<usize> = index::sample(&mut rng, n, deletions).into_iter().collect();
    chosen.sort_unstable();
    let mut slots: Vec<Vec<usize>> = vec![Vec::new(); n + 1];
    for &pos in &chosen {
        let slot = rng.random_range(pos + 1..=n);
        slots[slot].push(pos);
    }

    let mut out = Vec::with_capacity(n + deletions);
    let mut next_index = 1u64;
    let mut push = |edge: Edge, sign: Sign, out: &mut Vec<EdgeEvent>| {
        out.push(EdgeEvent { edge, sign, index: next_index });
        next_index += 1;
    };
    for (i, event) in base.iter().enumerate() {
        push(event.edge, Sign::Insert, &mut out);
        for &pos in &slots[i + 1] {
            push(base[pos].edge, Sign::Delete, &mut out);
        }
    }
    Ok(out)
}

/// Generates an insertion-only stream of `count` distinct uniform random
/// edges over a `left_vertices x right_vertices` bipartite vertex space.
pub fn random_insert_stream(
    left_vertices: u32,
    right_vertices: u32,
    count: usize,
    seed: u64,
) -> Result<Vec<EdgeEvent>> {
    let capacity = left_vertices as u64 * right_vertices as u64;
    if count as u64 > capacity {
        return Err(Error::Config(format!(
            "cannot draw {count} distinct edges from a {left_vertices}x{right_vertices} space"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut seen = HashSet::with_capacity(count);
    let mut events = Vec::with_capacity(count);
    let mut index = 1u64;
    while events.len() < count {
        let edge = Edge::new(
            rng.random_range(0..left_vertices),
            rng.random_range(0..right_vertices),
        );
        if seen.insert(edge) {
            events.push(EdgeEvent { edge, sign: Sign::Insert, index });
            index += 1;
        }
    }
    Ok(events)
}

/// Writes the native event format: CSV `index,left,right,sign` with header.
pub fn write_native<W: Write>(events: &[EdgeEvent], mut writer: W) -> Result<()> {
    writeln!(writer, "index,left,right,sign")?;
    for event in events {
        let sign = match event.sign {
            Sign::Insert => "+1",
            Sign::Delete => "-1",
        };
        writeln!(
            writer,
            "{},{},{},{}",
            event.index, event.edge.left, event.edge.right, sign
        )?;
    }
    Ok(())
}

/// Reads the native event format written by [`write_native`].
pub fn read_native<R: Read>(source: R) -> Result<Vec<EdgeEvent>> {
    let reader = BufReader::new(source);
    let mut events = Vec::new();
    for (lineno, line) in reader.lines().enumerate() {
        let line = line?;
        let trimmed = line.trim();
        if trimmed.is_empty() || (lineno == 0 && trimmed.starts_with("index")) {
            continue;
        }
        let fields: Vec<&str> = trimmed.split(',').collect();
        let parse_err = || Error::Config(format!("malformed native event line: {trimmed:?}"));
        if fields.len() != 4 {
            return Err(parse_err());
        }
        let index: u64 = fields[0].parse().map_err(|_| parse_err())?;
        let left: u32 = fields[1].parse().map_err(|_| parse_err())?;
        let right: u32 = fields[2].parse().map_err(|_| parse_err())?;
        let sign = match fields[3] {
            "+1" | "1" => Sign::Insert,
            "-1" => Sign::Delete,
            _ => return Err(parse_err()),
        };
        events.push(EdgeEvent { edge: Edge::new(left, right), sign, index });
    }
    if events.is_empty() {
        return Err(Error::EmptyStream);
    }
    Ok(events)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn insert(left: u32, right: u32, index: u64) -> EdgeEvent {
        EdgeEvent { edge: Edge::new(left, right), sign: Sign::Insert, index }
    }

    #[test]
    fn plain_tsv_maps_lines_in_order() {
        let parsed = parse_edge_list("1 2\n1 3\n".as_bytes(), EdgeListFormat::PlainTsv).unwrap();
        assert_eq!(parsed.events.len(), 2);
        assert_eq!(parsed.events[0].edge, Edge::new(0, 0));
        assert_eq!(parsed.events[1].edge, Edge::new(0, 1));
        assert_eq!(parsed.events[0].index, 1);
        assert_eq!(parsed.events[1].index, 2);
        assert!(parsed.events.iter().all(|e| e.sign == Sign::Insert));
    }

    #[test]
    fn konect_comments_are_skipped() {
        let parsed = parse_edge_list("% comment\n4 7\n".as_bytes(), EdgeListFormat::Konect).unwrap();
        assert_eq!(parsed.events.len(), 1);
        assert_eq!(parsed.stats.comments, 1);
        assert_eq!(parsed.events[0].index, 1);
    }

    #[test]
    fn duplicate_edges_are_counted_not_fatal() {
        let parsed = parse_edge_list("1 2\n1 2\n".as_bytes(), EdgeListFormat::PlainTsv).unwrap();
        assert_eq!(parsed.events.len(), 1);
        assert_eq!(parsed.stats.duplicate_edges, 1);
    }

    #[test]
    fn self_referential_lines_are_skipped() {
        let parsed = parse_edge_list("3 3\n1 2\n".as_bytes(), EdgeListFormat::PlainTsv).unwrap();
        assert_eq!(parsed.events.len(), 1);
        assert_eq!(parsed.stats.self_referential, 1);
    }

    #[test]
    fn empty_input_is_an_error() {
        let err = parse_edge_list("% nothing\n".as_bytes(), EdgeListFormat::Konect).unwrap_err();
        assert!(matches!(err, Error::EmptyStream));
    }

    #[test]
    fn tsv_sign_column_is_honored() {
        let parsed =
            parse_edge_list("1 2 +1\n1 2 -1\n".as_bytes(), EdgeListFormat::PlainTsv).unwrap();
        assert_eq!(parsed.events.len(), 2);
        assert_eq!(parsed.events[1].sign, Sign::Delete);
    }

    #[test]
    fn zero_alpha_keeps_the_base() {
        let base: Vec<_> = (0..10).map(|i| insert(i, i, i as u64 + 1)).collect();
        let out = generate_dynamic_stream(&base, 0.0, 42).unwrap();
        assert_eq!(out, base);
    }

    #[test]
    fn alpha_one_on_single_insert_has_one_legal_placement() {
        let base = vec![insert(0, 0, 1)];
        let out = generate_dynamic_stream(&base, 1.0, 3).unwrap();
        assert_eq!(out.len(), 2);
        assert_eq!(out[0].sign, Sign::Insert);
        assert_eq!(out[1].sign, Sign::Delete);
        assert_eq!(out[0].edge, out[1].edge);
    }

    #[test]
    fn deletion_counts_and_ordering() {
        let base: Vec<_> = (0..100).map(|i| insert(i, i + 1, i as u64 + 1)).collect();
        let out = generate_dynamic_stream(&base, 0.2, 7).unwrap();
        assert_eq!(out.len(), 120);
        let deletes = out.iter().filter(|e| e.sign == Sign::Delete).count();
        assert_eq!(deletes, 20);
        validate_stream(&out).unwrap();
        // Insertion subsequence equals the base order.
        let inserts: Vec<Edge> = out
            .iter()
            .filter(|e| e.sign == Sign::Insert)
            .map(|e| e.edge)
            .collect();
        let base_edges: Vec<Edge> = base.iter().map(|e| e.edge).collect();
        assert_eq!(inserts, base_edges);
        // Indices reassigned 1..N.
        assert!(out.iter().enumerate().all(|(i, e)| e.index == i as u64 + 1));
    }

    #[test]
    fn generation_is_deterministic_per_seed() {
        let base: Vec<_> = (0..50).map(|i| insert(i, i, i as u64 + 1)).collect();
        let a = generate_dynamic_stream(&base, 0.4, 9).unwrap();
        let b = generate_dynamic_stream(&base, 0.4, 9).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn bad_alpha_is_config_error() {
        let base = vec![insert(0, 0, 1)];
        assert!(matches!(
            generate_dynamic_stream(&base, 1.5, 0),
            Err(Error::Config(_))
        ));
    }

    #[test]
    fn validate_accepts_insert_then_delete() {
        let events = vec![
            insert(0, 0, 1),
            EdgeEvent { edge: Edge::new(0, 0), sign: Sign::Delete, index: 2 },
        ];
        validate_stream(&events).unwrap();
    }

    #[test]
    fn validate_rejects_delete_of_absent_edge() {
        let events = vec![EdgeEvent { edge: Edge::new(0, 0), sign: Sign::Delete, index: 1 }];
        let err = validate_stream(&events).unwrap_err();
        assert!(matches!(err, Error::StreamInvariantViolation { index: 1, .. }));
    }

    #[test]
    fn validate_rejects_duplicate_insert() {
        let events = vec![insert(0, 0, 1), insert(0, 0, 2)];
        let err = validate_stream(&events).unwrap_err();
        assert!(matches!(err, Error::StreamInvariantViolation { index: 2, .. }));
    }

    #[test]
    fn native_round_trip_is_exact() {
        let base: Vec<_> = (0..30).map(|i| insert(i, 29 - i, i as u64 + 1)).collect();
        let events = generate_dynamic_stream(&base, 0.3, 11).unwrap();
        let mut buf = Vec::new();
        write_native(&events, &mut buf).unwrap();
        let back = read_native(buf.as_slice()).unwrap();
        assert_eq!(events, back);
    }
}
