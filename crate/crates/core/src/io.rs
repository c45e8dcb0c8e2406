//! File formats.
//!
//! Binary layouts are little-endian:
//!
//! * `AMAT`, u32 N, u32 M, then N*M f64 in row-major order
//! * `CONN`, u32 M, then M*M f64 in row-major order
//! * `PERS`, u32 M, u64 len(births), births, u64 len(deaths), deaths
//!
//! CSV activations carry a `neuron_0,...,neuron_{M-1}` header and one row per sample.

use std::fs;
use std::io::{Read, Write};
use std::path::Path;

use crate::connectome::{ActivationMatrix, Connectome};
use crate::error::{Error, Result};
use crate::homology::GraphPersistence;

pub const ACTIVATION_MAGIC: &[u8; 4] = b"AMAT";
pub const CONNECTOME_MAGIC: &[u8; 4] = b"CONN";
pub const PERSISTENCE_MAGIC: &[u8; 4] = b"PERS";

struct Cursor<'a> {
    buf: &'a [u8],
    pos: usize,
    what: &'static str,
}

impl<'a> Cursor<'a> {
    fn new(buf: &'a [u8], magic: &[u8; 4], what: &'static str) -> Result<Self> {
        if buf.len() < 4 || &buf[..4] != magic {
            return Err(Error::format(format!(
                "{what}: missing magic {:?}",
                String::from_utf8_lossy(magic)
            )));
        }
        Ok(Self { buf, pos: 4, what })
    }

    fn take(&mut self, n: usize) -> Result<&'a [u8]> {
        let end = self.pos.checked_add(n).filter(|&e| e <= self.buf.len()).ok_or_else(|| {
            Error::format(format!("{}: truncated at byte {}", self.what, self.pos))
        })?;
        let out = &self.buf[self.pos..end];
        self.pos = end;
        Ok(out)
    }

    fn u32(&mut self) -> Result<u32> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().expect("4 bytes")))
    }

    fn u64(&mut self) -> Result<u64> {
        Ok(u64::from_le_bytes(self.take(8)?.try_into().expect("8 bytes")))
    }

    fn f64s(&mut self, n: u64) -> Result<Vec<f64>> {
        let bytes = usize::try_from(n)
            .ok()
            .and_then(|n| n.checked_mul(8))
            .ok_or_else(|| Error::format(format!("{}: length {n} too large", self.what)))?;
        Ok(self
            .take(bytes)?
            .chunks_exact(8)
            .map(|c| f64::from_le_bytes(c.try_into().expect("8 bytes")))
            .collect())
    }

    fn finish(self) -> Result<()> {
        if self.pos != self.buf.len() {
            return Err(Error::format(format!(
                "{}: {} trailing bytes",
                self.what,
                self.buf.len() - self.pos
            )));
        }
        Ok(())
    }
}

fn put_f64s(out: &mut Vec<u8>, xs: &[f64]) {
    for x in xs {
        out.extend_from_slice(&x.to_le_bytes());
    }
}

fn u32_len(n: usize, what: &str) -> Result<u32> {
    u32::try_from(n).map_err(|_| Error::invalid(format!("{what} {n} exceeds u32")))
}

pub fn activation_to_bin(acts: &ActivationMatrix) -> Result<Vec<u8>> {
    let mut out = Vec::with_capacity(12 + 8 * acts.values().len());
    out.extend_from_slice(ACTIVATION_MAGIC);
    out.extend_from_slice(&u32_len(acts.n_samples(), "sample count")?.to_le_bytes());
    out.extend_from_slice(&u32_len(acts.n_neurons(), "neuron count")?.to_le_bytes());
    put_f64s(&mut out, acts.values());
    Ok(out)
}

pub fn activation_from_bin(buf: &[u8]) -> Result<ActivationMatrix> {
    let mut c = Cursor::new(buf, ACTIVATION_MAGIC, "activation file")?;
    let n = c.u32()? as u64;
    let m = c.u32()? as u64;
    let values = c.f64s(n * m)?;
    c.finish()?;
    ActivationMatrix::new(n as usize, m as usize, values)
}

pub fn activation_to_csv(acts: &ActivationMatrix) -> String {
    let m = acts.n_neurons();
    let header: Vec<String> = (0..m).map(|j| format!("neuron_{j}")).collect();
    let mut out = header.join(",");
    out.push('\n');
    for row in acts.values().chunks(m) {
        let line: Vec<String> = row.iter().map(f64::to_string).collect();
        out.push_str(&line.join(","));
        out.push('\n');
    }
    out
}

/// Parses the CSV activation format. Diagnostics name the offending line.
pub fn activation_from_csv(reader: impl Read) -> Result<ActivationMatrix> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(true)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(reader);
    let header = rdr
        .headers()
        .map_err(|e| Error::format(format!("activation CSV header: {e}")))?
        .clone();
    let m = header.len();
    if m == 0 || (m == 1 && header[0].is_empty()) {
        return Err(Error::format("activation CSV: empty header"));
    }
    for (j, name) in header.iter().enumerate() {
        if name != format!("neuron_{j}") {
            return Err(Error::format(format!(
                "activation CSV header column {j} is {name:?}, expected \"neuron_{j}\""
            )));
        }
    }
    let mut values = Vec::new();
    let mut n = 0;
    for record in rdr.records() {
        let record = record.map_err(|e| Error::format(format!("activation CSV: {e}")))?;
        let line = record.position().map_or(n + 2, |p| p.line() as usize);
        if record.len() != m {
            return Err(Error::format(format!(
                "activation CSV row {} (line {line}) has {} fields, header has {m}",
                n + 1,
                record.len()
            )));
        }
        for (j, field) in record.iter().enumerate() {
            let v: f64 = field.parse().map_err(|_| {
                Error::format(format!(
                    "activation CSV row {} (line {line}), column {j}: cannot parse {field:?}",
                    n + 1
                ))
            })?;
            values.push(v);
        }
        n += 1;
    }
    ActivationMatrix::new(n, m, values)
}

pub fn connectome_to_bin(c: &Connectome) -> Result<Vec<u8>> {
    let mut out = Vec::with_capacity(8 + 8 * c.weights().len());
    out.extend_from_slice(CONNECTOME_MAGIC);
    out.extend_from_slice(&u32_len(c.n_neurons(), "neuron count")?.to_le_bytes());
    put_f64s(&mut out, c.weights());
    Ok(out)
}

pub fn connectome_from_bin(buf: &[u8]) -> Result<Connectome> {
    let mut c = Cursor::new(buf, CONNECTOME_MAGIC, "connectome file")?;
    let m = c.u32()? as u64;
    let weights = c.f64s(m * m)?;
    c.finish()?;
    Connectome::from_weights(m as usize, weights)
}

pub fn persistence_to_bin(p: &GraphPersistence) -> Result<Vec<u8>> {
    let mut out = Vec::with_capacity(24 + 8 * (p.births().len() + p.deaths().len()));
    out.extend_from_slice(PERSISTENCE_MAGIC);
    out.extend_from_slice(&u32_len(p.n_nodes(), "node count")?.to_le_bytes());
    out.extend_from_slice(&(p.births().len() as u64).to_le_bytes());
    put_f64s(&mut out, p.births());
    out.extend_from_slice(&(p.deaths().len() as u64).to_le_bytes());
    put_f64s(&mut out, p.deaths());
    Ok(out)
}

pub fn persistence_from_bin(buf: &[u8]) -> Result<GraphPersistence> {
    let mut c = Cursor::new(buf, PERSISTENCE_MAGIC, "persistence file")?;
    let m = c.u32()?;
    let nb = c.u64()?;
    let births = c.f64s(nb)?;
    let nd = c.u64()?;
    let deaths = c.f64s(nd)?;
    c.finish()?;
    GraphPersistence::new(m as usize, births, deaths)
}

/// Compact JSON for values, one document per file.
pub fn to_json<T: serde::Serialize>(value: &T) -> Result<Vec<u8>> {
    let mut out = serde_json::to_vec(value)?;
    out.push(b'\n');
    Ok(out)
}

fn starts_with_json(buf: &[u8]) -> bool {
    buf.iter()
        .find(|b| !b.is_ascii_whitespace())
        .is_some_and(|&b| b == b'{')
}

/// Reads an activation matrix: `AMAT` binary if the magic is present, CSV otherwise.
pub fn read_activation(path: &Path) -> Result<ActivationMatrix> {
    let buf = fs::read(path)?;
    if buf.starts_with(ACTIVATION_MAGIC) {
        activation_from_bin(&buf)
    } else {
        activation_from_csv(buf.as_slice())
    }
}

/// Reads a connectome from `CONN` binary or JSON.
pub fn read_connectome(path: &Path) -> Result<Connectome> {
    let buf = fs::read(path)?;
    if buf.starts_with(CONNECTOME_MAGIC) {
        connectome_from_bin(&buf)
    } else if starts_with_json(&buf) {
        Ok(serde_json::from_slice(&buf)?)
    } else {
        Err(Error::format(format!(
            "{}: neither CONN binary nor JSON",
            path.display()
        )))
    }
}

/// Reads a persistence summary from `PERS` binary or JSON.
pub fn read_persistence(path: &Path) -> Result<GraphPersistence> {
    let buf = fs::read(path)?;
    if buf.starts_with(PERSISTENCE_MAGIC) {
        persistence_from_bin(&buf)
    } else if starts_with_json(&buf) {
        Ok(serde_json::from_slice(&buf)?)
    } else {
        Err(Error::format(format!(
            "{}: neither PERS binary nor JSON",
            path.display()
        )))
    }
}

fn wants_json(path: &Path) -> bool {
    path.extension().is_some_and(|e| e.eq_ignore_ascii_case("json"))
}

/// Writes JSON for `.json` paths and binary otherwise.
pub fn write_connectome(path: &Path, c: &Connectome) -> Result<()> {
    let bytes = if wants_json(path) { to_json(c)? } else { connectome_to_bin(c)? };
    write_file(path, &bytes)
}

/// Writes JSON for `.json` paths and binary otherwise.
pub fn write_persistence(path: &Path, p: &GraphPersistence) -> Result<()> {
    let bytes = if wants_json(path) { to_json(p)? } else { persistence_to_bin(p)? };
    write_file(path, &bytes)
}

pub fn write_file(path: &Path, bytes: &[u8]) -> Result<()> {
    let mut f = fs::File::create(path)?;
    f.write_all(bytes)?;
    Ok(())
}

/// Class labels: a `label` header followed by one label per line.
pub fn read_labels(path: &Path) -> Result<Vec<String>> {
    let mut rdr = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(|e| Error::format(format!("{}: {e}", path.display())))?;
    let header = rdr
        .headers()
        .map_err(|e| Error::format(format!("labels header: {e}")))?
        .clone();
    if header.len() != 1 || &header[0] != "label" {
        return Err(Error::format(format!(
            "{}: expected a single `label` header column",
            path.display()
        )));
    }
    rdr.records()
        .enumerate()
        .map(|(i, r)| {
            let r = r.map_err(|e| Error::format(format!("labels row {}: {e}", i + 1)))?;
            Ok(r[0].to_string())
        })
        .collect()
}
