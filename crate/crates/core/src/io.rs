//! File formats for keys, codewords and complexity tables.
//!
//! A key file is one line of JSON followed by a binary payload:
//!
//! ```text
//! {"magic":"PRCKEY1","kind":"public","scheme":"llm","n":..,"r":..,"g":..,"t":..,"lambda":..,"omega":..,"seed":null,"encoding":"lsb8-u32le"}\n
//! <payload>
//! ```
//!
//! Bit strings are packed into octets least-significant bit first, and every
//! row starts on a fresh octet. Padding bits must be zero. Integers are
//! little-endian `u32`.
//!
//! * public payload: `z` (`⌈n/8⌉` octets), then the `n` rows of `G`, each
//!   `⌈g/8⌉` octets.
//! * secret payload: `z` (`⌈n/8⌉` octets), then the `r` rows of `P`, each as
//!   `t` ascending column indices.
//!
//! For example an 8×2 public key with `z = 0` and `G` rows
//! `10, 01, 11, 00, 00, 00, 00, 01` (column 0 first) has the payload
//! `00 01 02 03 00 00 00 00 02`.
//!
//! Public and secret halves always go to separate files. Codeword files use
//! magic `PRCCW1` and store one provenance octet plus `⌈n/8⌉` bit octets per
//! codeword.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::complexity::ComplexityRow;
use crate::error::{Error, Result};
use crate::gf2::{BitMatrix, BitVector, SparseRowMatrix};
use crate::prc::{Codeword, KeyPair, PrcParams, Provenance, PublicKey, Scheme, SecretKey};

pub const KEY_MAGIC: &str = "PRCKEY1";
pub const CODEWORD_MAGIC: &str = "PRCCW1";
pub const KEY_ENCODING: &str = "lsb8-u32le";

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum KeyKind {
    Public,
    Secret,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct KeyFileHeader {
    pub magic: String,
    pub kind: KeyKind,
    pub scheme: Scheme,
    pub n: usize,
    pub r: usize,
    pub g: usize,
    pub t: usize,
    pub lambda: usize,
    pub omega: f64,
    /// Keygen seed; only written in test mode.
    pub seed: Option<u64>,
    pub encoding: String,
}

impl KeyFileHeader {
    pub fn new(kind: KeyKind, params: &PrcParams, seed: Option<u64>) -> Self {
        Self {
            magic: KEY_MAGIC.into(),
            kind,
            scheme: params.scheme,
            n: params.n,
            r: params.r,
            g: params.g,
            t: params.t,
            lambda: params.lambda,
            omega: params.omega,
            seed,
            encoding: KEY_ENCODING.into(),
        }
    }

    pub fn params(&self) -> PrcParams {
        PrcParams { n: self.n, r: self.r, g: self.g, t: self.t, lambda: self.lambda, omega: self.omega, scheme: self.scheme }
    }

    fn payload_len(&self) -> usize {
        let z = self.n.div_ceil(8);
        match self.kind {
            KeyKind::Public => z + self.n * self.g.div_ceil(8),
            KeyKind::Secret => z + self.r * self.t * 4,
        }
    }
}

fn pack_bits(v: &BitVector, out: &mut Vec<u8>) {
    let start = out.len();
    out.resize(start + v.len().div_ceil(8), 0);
    for i in v.support() {
        out[start + i / 8] |= 1 << (i % 8);
    }
}

fn unpack_bits(bytes: &[u8], len: usize, what: &str) -> Result<BitVector> {
    let mut v = BitVector::zeros(len);
    for (k, &b) in bytes.iter().enumerate() {
        for bit in 0..8 {
            if b >> bit & 1 == 1 {
                let i = 8 * k + bit;
                if i >= len {
                    return Err(Error::Invariant(format!("{what}: nonzero padding bit")));
                }
                v.set(i, true);
            }
        }
    }
    Ok(v)
}

fn write_header<W: Write>(w: &mut W, header: &impl Serialize) -> Result<()> {
    serde_json::to_writer(&mut *w, header)?;
    w.write_all(b"\n")?;
    Ok(())
}

/// Reads the header line and checks the magic before anything else.
fn read_header_line<R: BufRead>(r: &mut R, magic: &str) -> Result<serde_json::Value> {
    let mut line = Vec::new();
    r.read_until(b'\n', &mut line)?;
    if line.last() != Some(&b'\n') {
        return Err(Error::LengthMismatch("missing header terminator".into()));
    }
    line.pop();
    let value: serde_json::Value = match serde_json::from_slice(&line) {
        Ok(v) => v,
        Err(_) => {
            let found = String::from_utf8_lossy(&line[..line.len().min(16)]).into_owned();
            return Err(Error::BadMagic { expected: magic.into(), found });
        }
    };
    let found = value.get("magic").and_then(|m| m.as_str()).unwrap_or("").to_string();
    if found != magic {
        return Err(Error::BadMagic { expected: magic.into(), found });
    }
    Ok(value)
}

fn read_exact_payload<R: Read>(r: &mut R, len: usize) -> Result<Vec<u8>> {
    let mut buf = Vec::with_capacity(len.min(1 << 24));
    r.take(len as u64 + 1).read_to_end(&mut buf)?;
    if buf.len() != len {
        let got = if buf.len() > len { "more".to_string() } else { buf.len().to_string() };
        return Err(Error::LengthMismatch(format!("payload has {got} octets, header implies {len}")));
    }
    Ok(buf)
}

pub fn write_public_key<W: Write>(w: &mut W, pk: &PublicKey, params: &PrcParams, seed: Option<u64>) -> Result<()> {
    if pk.g.rows() != params.n || pk.g.cols() != params.g || pk.z.len() != params.n {
        return Err(Error::Invariant("public key shape disagrees with parameters".into()));
    }
    write_header(w, &KeyFileHeader::new(KeyKind::Public, params, seed))?;
    let mut payload = Vec::new();
    pack_bits(&pk.z, &mut payload);
    for i in 0..pk.g.rows() {
        pack_bits(&pk.g.row(i), &mut payload);
    }
    w.write_all(&payload)?;
    Ok(())
}

pub fn write_secret_key<W: Write>(w: &mut W, sk: &SecretKey, params: &PrcParams, seed: Option<u64>) -> Result<()> {
    if sk.p.rows() != params.r || sk.p.cols() != params.n || sk.z.len() != params.n {
        return Err(Error::Invariant("secret key shape disagrees with parameters".into()));
    }
    write_header(w, &KeyFileHeader::new(KeyKind::Secret, params, seed))?;
    let mut payload = Vec::new();
    pack_bits(&sk.z, &mut payload);
    for row in sk.p.supports() {
        if row.len() != params.t {
            return Err(Error::Invariant(format!("row weight {} ≠ t = {}", row.len(), params.t)));
        }
        for &c in row {
            payload.extend_from_slice(&c.to_le_bytes());
        }
    }
    w.write_all(&payload)?;
    Ok(())
}

fn read_key_header<R: BufRead>(r: &mut R, kind: KeyKind) -> Result<KeyFileHeader> {
    let value = read_header_line(r, KEY_MAGIC)?;
    let header: KeyFileHeader = serde_json::from_value(value).map_err(|e| Error::Header(e.to_string()))?;
    if header.encoding != KEY_ENCODING {
        return Err(Error::Header(format!("unknown payload encoding {:?}", header.encoding)));
    }
    if header.kind != kind {
        return Err(Error::Header(format!("expected a {kind:?} key, found {:?}", header.kind)));
    }
    header.params().validate().map_err(|e| Error::Invariant(e.to_string()))?;
    Ok(header)
}

pub fn read_public_key<R: BufRead>(r: &mut R) -> Result<(PublicKey, KeyFileHeader)> {
    let header = read_key_header(r, KeyKind::Public)?;
    let payload = read_exact_payload(r, header.payload_len())?;
    let zb = header.n.div_ceil(8);
    let z = unpack_bits(&payload[..zb], header.n, "z")?;
    let rb = header.g.div_ceil(8);
    let mut g = BitMatrix::zeros(header.n, header.g);
    for (i, chunk) in payload[zb..].chunks(rb.max(1)).take(header.n).enumerate() {
        g.set_row(i, &unpack_bits(chunk, header.g, "G row")?);
    }
    Ok((PublicKey { g, z }, header))
}

pub fn read_secret_key<R: BufRead>(r: &mut R) -> Result<(SecretKey, KeyFileHeader)> {
    let header = read_key_header(r, KeyKind::Secret)?;
    let payload = read_exact_payload(r, header.payload_len())?;
    let zb = header.n.div_ceil(8);
    let z = unpack_bits(&payload[..zb], header.n, "z")?;
    let mut supports = Vec::with_capacity(header.r);
    for (i, row) in payload[zb..].chunks(4 * header.t).enumerate() {
        let idx: Vec<u32> = row.chunks(4).map(|b| u32::from_le_bytes([b[0], b[1], b[2], b[3]])).collect();
        if idx.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::Invariant(format!("row {i} of P is not strictly ascending")));
        }
        if idx.last().is_some_and(|&c| c as usize >= header.n) {
            return Err(Error::Invariant(format!("row {i} of P has an index ≥ n")));
        }
        supports.push(idx);
    }
    let p = SparseRowMatrix::new(header.n, supports).map_err(|e| Error::Invariant(e.to_string()))?;
    Ok((SecretKey { p, z }, header))
}

/// Writes `<stem>.pk` and `<stem>.sk`.
pub fn save_keypair(stem: &Path, kp: &KeyPair, params: &PrcParams, seed: Option<u64>) -> Result<()> {
    let (pk_path, sk_path) = keypair_paths(stem);
    let mut w = BufWriter::new(File::create(pk_path)?);
    write_public_key(&mut w, &kp.public, params, seed)?;
    w.flush()?;
    let mut w = BufWriter::new(File::create(sk_path)?);
    write_secret_key(&mut w, &kp.secret, params, seed)?;
    w.flush()?;
    Ok(())
}

pub fn keypair_paths(stem: &Path) -> (std::path::PathBuf, std::path::PathBuf) {
    (stem.with_extension("pk"), stem.with_extension("sk"))
}

pub fn load_public_key(path: &Path) -> Result<(PublicKey, PrcParams)> {
    let (pk, h) = read_public_key(&mut BufReader::new(File::open(path)?))?;
    Ok((pk, h.params()))
}

pub fn load_secret_key(path: &Path) -> Result<(SecretKey, PrcParams)> {
    let (sk, h) = read_secret_key(&mut BufReader::new(File::open(path)?))?;
    Ok((sk, h.params()))
}

/// Loads both halves and checks that they belong together.
pub fn load_keypair(stem: &Path) -> Result<(KeyPair, PrcParams)> {
    let (pk_path, sk_path) = keypair_paths(stem);
    let (public, pp) = load_public_key(&pk_path)?;
    let (secret, sp) = load_secret_key(&sk_path)?;
    if pp != sp {
        return Err(Error::Invariant("public and secret headers disagree".into()));
    }
    let kp = KeyPair { public, secret };
    kp.check(pp.t)?;
    Ok((kp, pp))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CodewordFileHeader {
    pub magic: String,
    pub n: usize,
    pub count: usize,
}

fn provenance_tag(p: Provenance) -> u8 {
    match p {
        Provenance::Fresh => 0,
        Provenance::ChannelNoised => 1,
        Provenance::Attacked => 2,
    }
}

pub fn write_codewords<W: Write>(w: &mut W, n: usize, words: &[Codeword]) -> Result<()> {
    if let Some(c) = words.iter().find(|c| c.len() != n) {
        return Err(Error::Dimension(format!("codeword of length {} in a length-{n} file", c.len())));
    }
    write_header(w, &CodewordFileHeader { magic: CODEWORD_MAGIC.into(), n, count: words.len() })?;
    let mut payload = Vec::new();
    for c in words {
        payload.push(provenance_tag(c.provenance));
        pack_bits(&c.x, &mut payload);
    }
    w.write_all(&payload)?;
    Ok(())
}

pub fn read_codewords<R: BufRead>(r: &mut R) -> Result<(usize, Vec<Codeword>)> {
    let value = read_header_line(r, CODEWORD_MAGIC)?;
    let h: CodewordFileHeader = serde_json::from_value(value).map_err(|e| Error::Header(e.to_string()))?;
    if h.n == 0 {
        return Err(Error::Header("n = 0".into()));
    }
    let per = 1 + h.n.div_ceil(8);
    let payload = read_exact_payload(r, per * h.count)?;
    let mut out = Vec::with_capacity(h.count);
    for chunk in payload.chunks(per) {
        let provenance = match chunk[0] {
            0 => Provenance::Fresh,
            1 => Provenance::ChannelNoised,
            2 => Provenance::Attacked,
            b => return Err(Error::Invariant(format!("unknown provenance tag {b}"))),
        };
        out.push(Codeword::new(unpack_bits(&chunk[1..], h.n, "codeword")?, provenance));
    }
    Ok((h.n, out))
}

pub fn save_codewords(path: &Path, n: usize, words: &[Codeword]) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    write_codewords(&mut w, n, words)?;
    w.flush()?;
    Ok(())
}

pub fn load_codewords(path: &Path) -> Result<(usize, Vec<Codeword>)> {
    read_codewords(&mut BufReader::new(File::open(path)?))
}

/// CSV column names for a scheme's complexity table, in table order.
pub fn table_columns(scheme: Scheme) -> Vec<&'static str> {
    let mut cols = vec!["t", "epsilon", "rho"];
    if scheme == Scheme::Gim {
        cols.push("eta");
    }
    cols.extend(["log2_t_partial", "log2_p_weak", "log2_t_dis", "log2_t_overlay"]);
    if scheme == Scheme::Gim {
        cols.push("log2_t_overlay_concrete");
    }
    cols.push("lambda");
    cols
}

/// Table CSV: noise rates at three decimals, bit counts at two, as printed in
/// the reference tables. A `-0.00` cell is kept as such.
pub fn write_table_csv<W: Write>(w: W, scheme: Scheme, rows: &[ComplexityRow]) -> Result<()> {
    let mut out = csv::Writer::from_writer(w);
    out.write_record(table_columns(scheme))?;
    for row in rows {
        let mut rec = vec![row.t.to_string(), format!("{:.3}", row.epsilon), format!("{:.3}", row.rho)];
        if scheme == Scheme::Gim {
            rec.push(format!("{:.3}", row.eta.unwrap_or(f64::NAN)));
        }
        for v in [row.log2_t_partial, row.log2_p_weak, row.log2_t_dis, row.log2_t_overlay] {
            rec.push(format!("{v:.2}"));
        }
        if scheme == Scheme::Gim {
            rec.push(format!("{:.2}", row.log2_t_overlay_concrete.unwrap_or(f64::NAN)));
        }
        rec.push(row.lambda.to_string());
        out.write_record(&rec)?;
    }
    out.flush()?;
    Ok(())
}

/// Reads a table written by [`write_table_csv`]. The optional columns are
/// picked up by name.
pub fn read_table_csv<R: Read>(r: R) -> Result<Vec<ComplexityRow>> {
    let mut rdr = csv::Reader::from_reader(r);
    let headers = rdr.headers()?.clone();
    let col = |name: &str| headers.iter().position(|h| h == name);
    let required = ["t", "epsilon", "rho", "log2_t_partial", "log2_p_weak", "log2_t_dis", "log2_t_overlay", "lambda"];
    let mut idx = std::collections::HashMap::new();
    for name in required {
        idx.insert(name, col(name).ok_or_else(|| Error::Header(format!("missing column {name}")))?);
    }
    let (eta, conc) = (col("eta"), col("log2_t_overlay_concrete"));
    let mut rows = Vec::new();
    for rec in rdr.records() {
        let rec = rec?;
        let f = |i: usize| -> Result<f64> {
            rec.get(i).and_then(|s| s.parse().ok()).ok_or_else(|| Error::Header(format!("bad cell in column {i}")))
        };
        let u = |i: usize| -> Result<usize> {
            rec.get(i).and_then(|s| s.parse().ok()).ok_or_else(|| Error::Header(format!("bad cell in column {i}")))
        };
        rows.push(ComplexityRow {
            t: u(idx["t"])?,
            epsilon: f(idx["epsilon"])?,
            rho: f(idx["rho"])?,
            eta: eta.map(&f).transpose()?,
            log2_t_partial: f(idx["log2_t_partial"])?,
            log2_p_weak: f(idx["log2_p_weak"])?,
            log2_t_dis: f(idx["log2_t_dis"])?,
            log2_t_overlay: f(idx["log2_t_overlay"])?,
            log2_t_overlay_concrete: conc.map(&f).transpose()?,
            lambda: u(idx["lambda"])?,
        });
    }
    Ok(rows)
}

/// Pretty JSON with the struct's field order.
pub fn write_json<W: Write, T: Serialize>(mut w: W, value: &T) -> Result<()> {
    serde_json::to_writer_pretty(&mut w, value)?;
    w.write_all(b"\n")?;
    Ok(())
}
