//! Binary model files.
//!
//! All integers and floats are little-endian.
//!
//! ```text
//! offset  size  field
//! 0       8     magic "OTHPVEC\0"
//! 8       4     version (u32, currently 1)
//! 12      4     dim (u32)
//! 16      4     vocabulary size V (u32)
//! 20      4     document count D (u32)
//! 24      4     window (u32)
//! 28      4     epochs (u32)
//! 32      4     negative samples (u32)
//! 36      4     min_count (u32)
//! 40      1     mode (u8: 0 = pvdm, 1 = pvdbow)
//! 41      3     reserved, zero
//! 44      8     seed (u64)
//! 52      8     lr_start (f64)
//! 60      8     lr_end (f64)
//! 68      8     config hash (u64)
//! 76      ...   document vectors, D x dim f32, row-major
//!               word vectors, V x dim f32
//!               output weights, V x dim f32
//!               vocabulary: V x (u32 byte length, UTF-8 bytes, u64 count)
//!               document ids: D x (u32 byte length, UTF-8 bytes)
//! ```

use std::io::{Read, Write};

use byteorder::{LittleEndian, ReadBytesExt, WriteBytesExt};

use super::objective::Params;
use super::{EmbedHyper, EmbedMode, EmbeddingModel, Vocab};
use crate::error::{Error, Result};
use crate::matrix::Matrix;

pub const MAGIC: &[u8; 8] = b"OTHPVEC\0";
pub const VERSION: u32 = 1;

fn u32_of(n: usize, what: &str) -> Result<u32> {
    u32::try_from(n).map_err(|_| Error::Data(format!("{what} {n} does not fit the model format")))
}

fn write_matrix<W: Write>(sink: &mut W, m: &Matrix) -> Result<()> {
    for &x in m.as_slice() {
        sink.write_f32::<LittleEndian>(x as f32)?;
    }
    Ok(())
}

fn write_str<W: Write>(sink: &mut W, s: &str) -> Result<()> {
    sink.write_u32::<LittleEndian>(u32_of(s.len(), "string length")?)?;
    sink.write_all(s.as_bytes())?;
    Ok(())
}

/// Write `model` with the hash of the run configuration that produced it.
pub fn save_model<W: Write>(model: &EmbeddingModel, config_hash: u64, mut sink: W) -> Result<()> {
    let h = &model.hyper;
    sink.write_all(MAGIC)?;
    sink.write_u32::<LittleEndian>(VERSION)?;
    sink.write_u32::<LittleEndian>(u32_of(h.dim, "dim")?)?;
    sink.write_u32::<LittleEndian>(u32_of(model.vocab.len(), "vocabulary size")?)?;
    sink.write_u32::<LittleEndian>(u32_of(model.doc_ids.len(), "document count")?)?;
    sink.write_u32::<LittleEndian>(u32_of(h.window, "window")?)?;
    sink.write_u32::<LittleEndian>(u32_of(h.epochs, "epochs")?)?;
    sink.write_u32::<LittleEndian>(u32_of(h.negative, "negative")?)?;
    sink.write_u32::<LittleEndian>(u32_of(h.min_count, "min_count")?)?;
    sink.write_u8(match h.mode {
        EmbedMode::Pvdm => 0,
        EmbedMode::Pvdbow => 1,
    })?;
    sink.write_all(&[0; 3])?;
    sink.write_u64::<LittleEndian>(h.seed)?;
    sink.write_f64::<LittleEndian>(h.lr_start)?;
    sink.write_f64::<LittleEndian>(h.lr_end)?;
    sink.write_u64::<LittleEndian>(config_hash)?;
    write_matrix(&mut sink, &model.params.docs)?;
    write_matrix(&mut sink, &model.params.words)?;
    write_matrix(&mut sink, &model.params.outs)?;
    for (token, &count) in model.vocab.tokens().iter().zip(model.vocab.counts()) {
        write_str(&mut sink, token)?;
        sink.write_u64::<LittleEndian>(count)?;
    }
    for id in &model.doc_ids {
        write_str(&mut sink, id)?;
    }
    sink.flush()?;
    Ok(())
}

fn read_matrix<R: Read>(source: &mut R, rows: usize, cols: usize) -> Result<Matrix> {
    let mut buf = vec![0f32; rows * cols];
    source.read_f32_into::<LittleEndian>(&mut buf)?;
    Ok(Matrix::from_vec(
        rows,
        cols,
        buf.into_iter().map(f64::from).collect(),
    ))
}

fn read_str<R: Read>(source: &mut R) -> Result<String> {
    let len = source.read_u32::<LittleEndian>()? as usize;
    let mut bytes = vec![0; len];
    source.read_exact(&mut bytes)?;
    String::from_utf8(bytes).map_err(|e| Error::Data(format!("model string table: {e}")))
}

/// Read a model file, returning the model and its configuration hash.
/// Vector values come back at 32-bit precision.
pub fn load_model<R: Read>(mut source: R) -> Result<(EmbeddingModel, u64)> {
    let mut magic = [0u8; 8];
    source.read_exact(&mut magic)?;
    if &magic != MAGIC {
        return Err(Error::Data(
            "not an embedding model file (bad magic)".into(),
        ));
    }
    let version = source.read_u32::<LittleEndian>()?;
    if version != VERSION {
        return Err(Error::Data(format!("unsupported model version {version}")));
    }
    let mut next = || source.read_u32::<LittleEndian>().map(|x| x as usize);
    let dim = next()?;
    let vocab_size = next()?;
    let doc_count = next()?;
    let window = next()?;
    let epochs = next()?;
    let negative = next()?;
    let min_count = next()?;
    let mode = match source.read_u8()? {
        0 => EmbedMode::Pvdm,
        1 => EmbedMode::Pvdbow,
        m => return Err(Error::Data(format!("unknown mode tag {m}"))),
    };
    let mut reserved = [0u8; 3];
    source.read_exact(&mut reserved)?;
    let seed = source.read_u64::<LittleEndian>()?;
    let lr_start = source.read_f64::<LittleEndian>()?;
    let lr_end = source.read_f64::<LittleEndian>()?;
    let config_hash = source.read_u64::<LittleEndian>()?;
    let hyper = EmbedHyper {
        dim,
        window,
        epochs,
        lr_start,
        lr_end,
        negative,
        min_count,
        mode,
        seed,
        threads: 1,
    };
    let params = Params {
        docs: read_matrix(&mut source, doc_count, dim)?,
        words: read_matrix(&mut source, vocab_size, dim)?,
        outs: read_matrix(&mut source, vocab_size, dim)?,
    };
    let mut entries = Vec::with_capacity(vocab_size);
    for _ in 0..vocab_size {
        let token = read_str(&mut source)?;
        let count = source.read_u64::<LittleEndian>()?;
        entries.push((token, count));
    }
    let vocab = Vocab::from_entries(entries, min_count);
    if vocab.len() != vocab_size {
        return Err(Error::Data("duplicate token in model vocabulary".into()));
    }
    let doc_ids = (0..doc_count)
        .map(|_| read_str(&mut source))
        .collect::<Result<Vec<_>>>()?;
    let model = EmbeddingModel::assemble(params, vocab, hyper, doc_ids, Vec::new())?;
    Ok((model, config_hash))
}
