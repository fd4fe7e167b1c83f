//! Readers and writers for embedding files.
//!
//! Three formats are supported:
//!
//! * text: one token followed by `dim` decimal numbers per line, separated
//!   by whitespace. An optional word2vec-style `<count> <dim>` header line is
//!   recognised and skipped.
//! * word2vec binary: an ASCII `<count> <dim>\n` header, then per record a
//!   space-terminated token and `dim` little-endian `f32` values.
//! * native: `MEB1`, `u32` version, `u32` dim, `u64` count, `count` tokens
//!   each prefixed with a `u32` byte length, then `count * dim`
//!   little-endian `f64` values in row-major order. All integers are
//!   little-endian.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, ErrorKind, Read, Write};
use std::path::Path;

use crate::embedding::{EmbeddingSet, Loaded, SetBuilder};
use crate::error::{Error, Result};

pub const NATIVE_MAGIC: &[u8; 4] = b"MEB1";
pub const NATIVE_VERSION: u32 = 1;

/// On-disk embedding formats.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Format {
    Text,
    Word2vecBinary,
    Native,
}

impl std::str::FromStr for Format {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "text" | "glove" => Ok(Format::Text),
            "word2vec" | "w2v" | "bin" => Ok(Format::Word2vecBinary),
            "native" | "meb" => Ok(Format::Native),
            other => Err(format!(
                "unknown format {other:?} (expected text, word2vec or native)"
            )),
        }
    }
}

/// Derives a set name from a file path (its stem).
pub fn name_from_path(path: &Path) -> String {
    path.file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "embeddings".to_owned())
}

/// Loads a set in the given format. Native files never contain duplicates.
pub fn load(path: impl AsRef<Path>, format: Format) -> Result<Loaded> {
    let path = path.as_ref();
    match format {
        Format::Text => load_text(path),
        Format::Word2vecBinary => load_word2vec_binary(path),
        Format::Native => load_native(path).map(|set| Loaded { set, duplicates: 0 }),
    }
}

fn open(path: &Path) -> Result<BufReader<File>> {
    File::open(path)
        .map(|f| BufReader::with_capacity(1 << 20, f))
        .map_err(|e| Error::from(e).in_file(path))
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    File::create(path)
        .map(|f| BufWriter::with_capacity(1 << 20, f))
        .map_err(|e| Error::from(e).in_file(path))
}

pub fn load_text(path: impl AsRef<Path>) -> Result<Loaded> {
    let path = path.as_ref();
    read_text(open(path)?, name_from_path(path)).map_err(|e| e.in_file(path))
}

fn parse_text_line(line: &str, lineno: usize, dim: Option<usize>) -> Result<(&str, Vec<f64>)> {
    let mut fields = line.split_whitespace();
    let token = fields.next().unwrap_or_default();
    let rest: Vec<&str> = fields.collect();
    let parsed: Vec<Option<f64>> = rest.iter().map(|f| f.parse::<f64>().ok()).collect();

    if let Some(last_bad) = parsed.iter().rposition(Option::is_none) {
        // Non-numeric fields directly after the token followed by a run of
        // numbers means the token itself contained whitespace.
        let bad_prefix = parsed[..=last_bad].iter().all(Option::is_none);
        let suffix = rest.len() - last_bad - 1;
        if bad_prefix && suffix > 0 && dim.is_none_or(|d| d == suffix) {
            let mut joined = token.to_owned();
            for f in &rest[..=last_bad] {
                joined.push(' ');
                joined.push_str(f);
            }
            return Err(Error::TokenWithWhitespace {
                line: lineno,
                token: joined,
            });
        }
        let first_bad = parsed.iter().position(Option::is_none).unwrap();
        return Err(Error::NonNumeric {
            line: lineno,
            field: rest[first_bad].to_owned(),
        });
    }

    let expected = dim.unwrap_or(rest.len().max(1));
    if rest.len() != expected {
        return Err(Error::InconsistentDimension {
            line: lineno,
            expected,
            found: rest.len(),
        });
    }
    Ok((token, parsed.into_iter().map(Option::unwrap).collect()))
}

fn push_text_line(builder: &mut Option<SetBuilder>, line: &str, lineno: usize) -> Result<()> {
    let dim = builder.as_ref().map(SetBuilder::dim);
    let (token, values) = parse_text_line(line, lineno, dim)?;
    builder
        .get_or_insert_with(|| SetBuilder::new(values.len(), 1024))
        .push(token, values);
    Ok(())
}

fn integer_pair(line: &str) -> Option<usize> {
    let mut f = line.split_whitespace();
    match (f.next(), f.next(), f.next()) {
        (Some(a), Some(b), None) if a.parse::<u64>().is_ok() => b.parse().ok(),
        _ => None,
    }
}

/// Reads the text format. See the module docs.
pub fn read_text<R: BufRead>(reader: R, name: impl Into<String>) -> Result<Loaded> {
    let mut lines = reader
        .lines()
        .enumerate()
        .map(|(i, l)| l.map(|l| (i + 1, l)))
        .filter(|l| !matches!(l, Ok((_, s)) if s.trim().is_empty()));

    let mut builder = None;
    let (first_no, first) = lines.next().ok_or(Error::EmptyInput)??;
    match integer_pair(&first) {
        Some(declared) => match lines.next().transpose()? {
            Some((no, second)) => {
                // "<count> <dim>" is a header only if the next row has that
                // dimension; otherwise the file is one-dimensional.
                let is_header =
                    declared != 1 && second.split_whitespace().count() == declared + 1;
                if !is_header {
                    push_text_line(&mut builder, &first, first_no)?;
                }
                push_text_line(&mut builder, &second, no)?;
            }
            None => push_text_line(&mut builder, &first, first_no)?,
        },
        None => push_text_line(&mut builder, &first, first_no)?,
    }
    for line in lines {
        let (no, line) = line?;
        push_text_line(&mut builder, &line, no)?;
    }

    builder.ok_or(Error::EmptyInput)?.finish(name)
}

pub fn save_text(set: &EmbeddingSet, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let mut w = create(path)?;
    write_text(set, &mut w).and_then(|_| Ok(w.flush()?)).map_err(|e| e.in_file(path))
}

/// Writes one line per token. Values use the shortest representation that
/// parses back to the same `f64`.
pub fn write_text<W: Write>(set: &EmbeddingSet, mut w: W) -> Result<()> {
    for (token, row) in set.vocab().iter().zip(set.rows()) {
        w.write_all(token.as_bytes())?;
        for v in row {
            write!(w, " {v}")?;
        }
        w.write_all(b"\n")?;
    }
    Ok(())
}

pub fn load_word2vec_binary(path: impl AsRef<Path>) -> Result<Loaded> {
    let path = path.as_ref();
    read_word2vec_binary(open(path)?, name_from_path(path)).map_err(|e| e.in_file(path))
}

fn skip_whitespace<R: BufRead>(reader: &mut R) -> Result<bool> {
    loop {
        let buf = reader.fill_buf()?;
        if buf.is_empty() {
            return Ok(false);
        }
        let n = buf.iter().take_while(|b| b.is_ascii_whitespace()).count();
        let more = n < buf.len();
        reader.consume(n);
        if more {
            return Ok(true);
        }
    }
}

fn read_w2v_record<R: BufRead>(
    reader: &mut R,
    dim: usize,
    token: &mut Vec<u8>,
    raw: &mut [u8],
) -> Result<bool> {
    if !skip_whitespace(reader)? {
        return Ok(false);
    }
    token.clear();
    reader.read_until(b' ', token)?;
    if token.pop() != Some(b' ') {
        return Err(Error::Truncated("record token is not space-terminated".into()));
    }
    reader.read_exact(raw).map_err(|e| match e.kind() {
        ErrorKind::UnexpectedEof => Error::Truncated(format!(
            "vector for {:?} ends before {} values",
            String::from_utf8_lossy(token),
            dim
        )),
        _ => Error::Io(e),
    })?;
    Ok(true)
}

/// Reads the word2vec binary format. Newlines between records are
/// tolerated, as written by the reference tool.
pub fn read_word2vec_binary<R: BufRead>(mut reader: R, name: impl Into<String>) -> Result<Loaded> {
    let mut header = Vec::new();
    reader.read_until(b'\n', &mut header)?;
    if header.is_empty() {
        return Err(Error::EmptyInput);
    }
    let header = String::from_utf8_lossy(&header);
    let mut fields = header.split_whitespace();
    let (Some(count), Some(dim), None) = (fields.next(), fields.next(), fields.next()) else {
        return Err(Error::InvalidHeader(header.trim().to_owned()));
    };
    let count: u64 = count
        .parse()
        .map_err(|_| Error::InvalidHeader(format!("bad count {count:?}")))?;
    let dim: i64 = dim
        .parse()
        .map_err(|_| Error::InvalidHeader(format!("bad dimension {dim:?}")))?;
    if dim <= 0 {
        return Err(Error::InvalidHeader(format!("dimension {dim} must be positive")));
    }
    let dim = dim as usize;
    let count = count as usize;

    let mut builder = SetBuilder::new(dim, count.min(1 << 24));
    let mut token = Vec::new();
    let mut raw = vec![0u8; dim * 4];
    for found in 0..count {
        if !read_w2v_record(&mut reader, dim, &mut token, &mut raw)? {
            return Err(Error::Truncated(format!(
                "header declares {count} records, file ends after {found}"
            )));
        }
        let token = String::from_utf8_lossy(&token);
        builder.push(
            &token,
            raw.chunks_exact(4)
                .map(|b| f32::from_le_bytes(b.try_into().unwrap()) as f64),
        );
    }

    let mut extra = 0;
    while read_w2v_record(&mut reader, dim, &mut token, &mut raw).unwrap_or(false) {
        extra += 1;
    }
    if extra > 0 || skip_whitespace(&mut reader)? {
        return Err(Error::CountMismatch {
            declared: count,
            found: count + extra.max(1),
        });
    }

    builder.finish(name)
}

pub fn save_word2vec_binary(set: &EmbeddingSet, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let mut w = create(path)?;
    write_word2vec_binary(set, &mut w)
        .and_then(|_| Ok(w.flush()?))
        .map_err(|e| e.in_file(path))
}

/// Writes the word2vec binary format. Values are narrowed to `f32`.
pub fn write_word2vec_binary<W: Write>(set: &EmbeddingSet, mut w: W) -> Result<()> {
    writeln!(w, "{} {}", set.len(), set.dim())?;
    for (token, row) in set.vocab().iter().zip(set.rows()) {
        w.write_all(token.as_bytes())?;
        w.write_all(b" ")?;
        for &v in row {
            w.write_all(&(v as f32).to_le_bytes())?;
        }
        w.write_all(b"\n")?;
    }
    Ok(())
}

pub fn save_native(set: &EmbeddingSet, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let mut w = create(path)?;
    write_native(set, &mut w)
        .and_then(|_| Ok(w.flush()?))
        .map_err(|e| e.in_file(path))
}

pub fn write_native<W: Write>(set: &EmbeddingSet, mut w: W) -> Result<()> {
    w.write_all(NATIVE_MAGIC)?;
    w.write_all(&NATIVE_VERSION.to_le_bytes())?;
    w.write_all(&(set.dim() as u32).to_le_bytes())?;
    w.write_all(&(set.len() as u64).to_le_bytes())?;
    for token in set.vocab() {
        w.write_all(&(token.len() as u32).to_le_bytes())?;
        w.write_all(token.as_bytes())?;
    }
    for &v in set.matrix() {
        w.write_all(&v.to_le_bytes())?;
    }
    Ok(())
}

pub fn load_native(path: impl AsRef<Path>) -> Result<EmbeddingSet> {
    let path = path.as_ref();
    read_native(open(path)?, name_from_path(path)).map_err(|e| e.in_file(path))
}

fn read_exact_or_truncated<R: Read>(reader: &mut R, buf: &mut [u8], what: &str) -> Result<()> {
    reader.read_exact(buf).map_err(|e| match e.kind() {
        ErrorKind::UnexpectedEof => Error::Truncated(format!("file ends inside {what}")),
        _ => Error::Io(e),
    })
}

pub fn read_native<R: Read>(mut reader: R, name: impl Into<String>) -> Result<EmbeddingSet> {
    let mut head = [0u8; 20];
    read_exact_or_truncated(&mut reader, &mut head, "header")?;
    if &head[0..4] != NATIVE_MAGIC {
        return Err(Error::InvalidHeader("missing MEB1 magic".into()));
    }
    let version = u32::from_le_bytes(head[4..8].try_into().unwrap());
    if version != NATIVE_VERSION {
        return Err(Error::InvalidHeader(format!("unsupported version {version}")));
    }
    let dim = u32::from_le_bytes(head[8..12].try_into().unwrap()) as usize;
    let count = u64::from_le_bytes(head[12..20].try_into().unwrap()) as usize;

    let mut vocab = Vec::with_capacity(count.min(1 << 24));
    let mut len = [0u8; 4];
    let mut bytes = Vec::new();
    for _ in 0..count {
        read_exact_or_truncated(&mut reader, &mut len, "token table")?;
        bytes.resize(u32::from_le_bytes(len) as usize, 0);
        read_exact_or_truncated(&mut reader, &mut bytes, "token table")?;
        let token = std::str::from_utf8(&bytes)
            .map_err(|_| Error::InvalidSet("token is not valid UTF-8".into()))?;
        vocab.push(token.to_owned());
    }

    let total = count * dim;
    let mut data = Vec::with_capacity(total);
    let mut chunk = vec![0u8; 8 * 8192];
    while data.len() < total {
        let n = (total - data.len()).min(8192);
        let buf = &mut chunk[..n * 8];
        read_exact_or_truncated(&mut reader, buf, "matrix")?;
        data.extend(
            buf.chunks_exact(8)
                .map(|b| f64::from_le_bytes(b.try_into().unwrap())),
        );
    }
    let mut probe = [0u8; 1];
    if reader.read(&mut probe)? != 0 {
        return Err(Error::InvalidSet("trailing bytes after matrix".into()));
    }

    EmbeddingSet::new(name, dim, vocab, data)
}
