//! Binary classifier files.
//!
//! Little-endian throughout. Header:
//!
//! ```text
//! offset  size  field
//! 0       8     magic "OTHCLF\0\0"
//! 8       4     version (u32, currently 1)
//! 12      1     kind (0 = mlp, 1 = logreg, 2 = gnb)
//! 13      1     activation (mlp only: 0 = tanh, 1 = logistic; else 0)
//! 14      2     reserved, zero
//! 16      4     input dimension (u32)
//! 20      4     threshold (f32)
//! ```
//!
//! Body, all values f32:
//!
//! * mlp: layer count (u32), then per layer `outputs (u32), inputs (u32)`,
//!   then per layer the weights row-major followed by the biases
//! * logreg: `dim` weights, then the bias
//! * gnb: for class 0 then class 1: `dim` means, `dim` variances, log prior

use std::io::{Read, Write};

use byteorder::{LittleEndian, ReadBytesExt, WriteBytesExt};

use super::{Activation, Classifier, ClassifierModel, Dense, Gnb, LogReg, Mlp};
use crate::error::{Error, Result};
use crate::matrix::Matrix;

pub const MAGIC: &[u8; 8] = b"OTHCLF\0\0";
pub const VERSION: u32 = 1;

fn put<W: Write>(sink: &mut W, xs: &[f64]) -> Result<()> {
    for &x in xs {
        sink.write_f32::<LittleEndian>(x as f32)?;
    }
    Ok(())
}

fn take<R: Read>(source: &mut R, n: usize) -> Result<Vec<f64>> {
    let mut buf = vec![0f32; n];
    source.read_f32_into::<LittleEndian>(&mut buf)?;
    Ok(buf.into_iter().map(f64::from).collect())
}

fn as_u32(n: usize) -> Result<u32> {
    u32::try_from(n).map_err(|_| Error::Data(format!("size {n} does not fit the model format")))
}

pub fn save_classifier<W: Write>(model: &ClassifierModel, mut sink: W) -> Result<()> {
    sink.write_all(MAGIC)?;
    sink.write_u32::<LittleEndian>(VERSION)?;
    let (kind, act) = match &model.classifier {
        Classifier::Mlp(m) => (
            0u8,
            match m.activation {
                Activation::Tanh => 0u8,
                Activation::Logistic => 1,
            },
        ),
        Classifier::LogReg(_) => (1, 0),
        Classifier::Gnb(_) => (2, 0),
    };
    sink.write_all(&[kind, act, 0, 0])?;
    sink.write_u32::<LittleEndian>(as_u32(model.dim)?)?;
    sink.write_f32::<LittleEndian>(model.threshold as f32)?;
    match &model.classifier {
        Classifier::Mlp(m) => {
            sink.write_u32::<LittleEndian>(as_u32(m.layers.len())?)?;
            for l in &m.layers {
                sink.write_u32::<LittleEndian>(as_u32(l.weights.rows())?)?;
                sink.write_u32::<LittleEndian>(as_u32(l.weights.cols())?)?;
            }
            for l in &m.layers {
                put(&mut sink, l.weights.as_slice())?;
                put(&mut sink, &l.bias)?;
            }
        }
        Classifier::LogReg(m) => {
            put(&mut sink, &m.weights)?;
            put(&mut sink, &[m.bias])?;
        }
        Classifier::Gnb(g) => {
            for c in 0..2 {
                put(&mut sink, &g.means[c])?;
                put(&mut sink, &g.variances[c])?;
                put(&mut sink, &[g.log_priors[c]])?;
            }
        }
    }
    sink.flush()?;
    Ok(())
}

pub fn load_classifier<R: Read>(mut source: R) -> Result<ClassifierModel> {
    let mut magic = [0u8; 8];
    source.read_exact(&mut magic)?;
    if &magic != MAGIC {
        return Err(Error::Data("not a classifier file (bad magic)".into()));
    }
    let version = source.read_u32::<LittleEndian>()?;
    if version != VERSION {
        return Err(Error::Data(format!(
            "unsupported classifier version {version}"
        )));
    }
    let mut tags = [0u8; 4];
    source.read_exact(&mut tags)?;
    let dim = source.read_u32::<LittleEndian>()? as usize;
    let threshold = f64::from(source.read_f32::<LittleEndian>()?);
    let classifier = match tags[0] {
        0 => {
            let activation = match tags[1] {
                0 => Activation::Tanh,
                1 => Activation::Logistic,
                a => return Err(Error::Data(format!("unknown activation tag {a}"))),
            };
            let n = source.read_u32::<LittleEndian>()? as usize;
            let mut shapes = Vec::with_capacity(n);
            for _ in 0..n {
                let rows = source.read_u32::<LittleEndian>()? as usize;
                let cols = source.read_u32::<LittleEndian>()? as usize;
                shapes.push((rows, cols));
            }
            let chained = shapes.windows(2).all(|w| w[0].0 == w[1].1);
            if n == 0 || shapes[0].1 != dim || shapes[n - 1].0 != 1 || !chained {
                return Err(Error::Data("inconsistent mlp layer shapes".into()));
            }
            let mut layers = Vec::with_capacity(n);
            for (rows, cols) in shapes {
                let weights = Matrix::from_vec(rows, cols, take(&mut source, rows * cols)?);
                let bias = take(&mut source, rows)?;
                layers.push(Dense { weights, bias });
            }
            Classifier::Mlp(Mlp { layers, activation })
        }
        1 => {
            let weights = take(&mut source, dim)?;
            let bias = take(&mut source, 1)?[0];
            Classifier::LogReg(LogReg { weights, bias })
        }
        2 => {
            let mut means: [Vec<f64>; 2] = Default::default();
            let mut variances: [Vec<f64>; 2] = Default::default();
            let mut log_priors = [0.0; 2];
            for c in 0..2 {
                means[c] = take(&mut source, dim)?;
                variances[c] = take(&mut source, dim)?;
                log_priors[c] = take(&mut source, 1)?[0];
            }
            Classifier::Gnb(Gnb {
                means,
                variances,
                log_priors,
            })
        }
        k => return Err(Error::Data(format!("unknown classifier kind tag {k}"))),
    };
    Ok(ClassifierModel {
        classifier,
        dim,
        threshold,
    })
}
