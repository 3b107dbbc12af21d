use std::io::{Read, Write};

use serde::{Deserialize, Serialize};

use super::Network;
use crate::error::{input, Result};
use crate::io::check_header;

#[derive(Debug, Serialize, Deserialize)]
struct EdgeRow {
    u: usize,
    v: usize,
    w_uv: Option<f64>,
    w_vu: Option<f64>,
}

#[derive(Debug, Serialize)]
struct DegreeRow {
    node: usize,
    degree: usize,
}

/// Reads an edge list with header `u,v,w_uv,w_vu`, one undirected edge per
/// row. Empty weight cells mean zero; with `symmetric`, an empty `w_vu`
/// copies `w_uv`. The node count defaults to the largest id plus one.
pub fn read_edge_list<R: Read>(reader: R, n: Option<usize>, symmetric: bool) -> Result<Network> {
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
    check_header(rdr.headers()?, &["u", "v", "w_uv", "w_vu"])?;
    let rows: Vec<EdgeRow> = rdr.deserialize().collect::<std::result::Result<_, _>>()?;
    let max_id = rows.iter().map(|r| r.u.max(r.v) + 1).max().unwrap_or(0);
    let n = match n {
        Some(n) if n < max_id => {
            return Err(input(format!("edge list references node {} but n = {n}", max_id - 1)))
        }
        Some(n) => n,
        None => max_id,
    };
    let mut net = Network::from_edges(n, rows.iter().map(|r| (r.u, r.v)))?;
    for r in &rows {
        let w_uv = r.w_uv.unwrap_or(0.0);
        let w_vu = match r.w_vu {
            Some(w) => w,
            None if symmetric => w_uv,
            None => 0.0,
        };
        net.set_weight(r.u, r.v, w_uv)?;
        net.set_weight(r.v, r.u, w_vu)?;
    }
    Ok(net)
}

pub fn write_edge_list<W: Write>(net: &Network, writer: W) -> Result<()> {
    let mut wtr = csv::WriterBuilder::new().has_headers(false).from_writer(writer);
    wtr.write_record(["u", "v", "w_uv", "w_vu"])?;
    for (u, v) in net.edges() {
        wtr.serialize(EdgeRow {
            u,
            v,
            w_uv: Some(net.weight(u, v)),
            w_vu: Some(net.weight(v, u)),
        })?;
    }
    wtr.flush()?;
    Ok(())
}

/// Writes `node,degree` for every node.
pub fn write_degree_csv<W: Write>(net: &Network, writer: W) -> Result<()> {
    let mut wtr = csv::Writer::from_writer(writer);
    for (node, degree) in net.degrees().into_iter().enumerate() {
        wtr.serialize(DegreeRow { node, degree })?;
    }
    if net.n() == 0 {
        wtr.write_record(["node", "degree"])?;
    }
    wtr.flush()?;
    Ok(())
}
