//! Ingests an edge list, reports what the parser skipped, validates the
//! stream, and round-trips it through the native event format.

use abacus::stream::{parse_edge_list, read_native, validate_stream, write_native, EdgeListFormat};

const RAW: &str = "\
% bipartite rating graph, user item
101 9001
101 9002
102 9001
102 9001
103 103
banana 9002
102 9002 -1
102 9002
103 9003
";

fn main() -> abacus::Result<()> {
    let parsed = parse_edge_list(RAW.as_bytes(), EdgeListFormat::Konect)?;
    println!(
        "parsed {} events over {} left x {} right vertices",
        parsed.events.len(),
        parsed.left_vertices,
        parsed.right_vertices
    );
    println!(
        "skipped: {} duplicates, {} malformed, {} self-referential, {} comments",
        parsed.stats.duplicate_edges,
        parsed.stats.malformed_lines,
        parsed.stats.self_referential,
        parsed.stats.comments
    );

    validate_stream(&parsed.events)?;
    println!("stream is valid: inserts target absent edges, deletes target present ones");

    // The KONECT reader treats every line as an insertion; the TSV reader
    // honors an optional +1/-1 sign column.
    let dynamic = parse_edge_list("1 2\n1 3\n1 2 -1\n".as_bytes(), EdgeListFormat::PlainTsv)?;
    println!(
        "tsv with sign column: {} events, last one is {:?}",
        dynamic.events.len(),
        dynamic.events.last().unwrap().sign
    );

    let mut buf = Vec::new();
    write_native(&parsed.events, &mut buf)?;
    let back = read_native(buf.as_slice())?;
    assert_eq!(parsed.events, back);
    println!("native round trip: {} bytes, events identical", buf.len());
    Ok(())
}
