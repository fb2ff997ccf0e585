//! Binary checkpoint: magic, version, config block, vocabulary, then every
//! matrix row-major as little-endian f64, then the loss curve.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use ndarray::{Array1, Array2};

use super::{compute_beta, Encoder, EtmConfig, EtmError, EtmModel, EtmParams};

pub const CHECKPOINT_MAGIC: [u8; 4] = *b"ITMC";
pub const CHECKPOINT_VERSION: u32 = 1;

fn put_u64<W: Write>(w: &mut W, x: u64) -> std::io::Result<()> {
    w.write_all(&x.to_le_bytes())
}

fn put_bytes<W: Write>(w: &mut W, b: &[u8]) -> std::io::Result<()> {
    put_u64(w, b.len() as u64)?;
    w.write_all(b)
}

fn put_floats<'a, W: Write>(w: &mut W, xs: impl Iterator<Item = &'a f64>) -> std::io::Result<()> {
    for x in xs {
        w.write_all(&x.to_le_bytes())?;
    }
    Ok(())
}

pub fn write_model<W: Write>(model: &EtmModel, w: &mut W) -> Result<(), EtmError> {
    let p = &model.params;
    let e = &p.encoder;
    w.write_all(&CHECKPOINT_MAGIC)?;
    w.write_all(&CHECKPOINT_VERSION.to_le_bytes())?;
    put_bytes(w, model.config.to_kv().as_bytes())?;
    put_u64(w, model.vocab.len() as u64)?;
    for word in &model.vocab {
        put_bytes(w, word.as_bytes())?;
    }
    for dim in [p.vocab_size(), p.embedding_dim(), p.topics(), e.hidden()] {
        put_u64(w, dim as u64)?;
    }
    put_floats(w, p.rho.iter())?;
    put_floats(w, p.alpha.iter())?;
    put_floats(w, e.w_in.iter())?;
    put_floats(w, e.b_in.iter())?;
    put_floats(w, e.w_mu.iter())?;
    put_floats(w, e.b_mu.iter())?;
    put_floats(w, e.w_lv.iter())?;
    put_floats(w, e.b_lv.iter())?;
    put_u64(w, model.loss_curve.len() as u64)?;
    put_floats(w, model.loss_curve.iter())?;
    Ok(())
}

pub fn save_model(model: &EtmModel, path: impl AsRef<Path>) -> Result<(), EtmError> {
    let mut w = BufWriter::new(File::create(path)?);
    write_model(model, &mut w)?;
    w.flush()?;
    Ok(())
}

struct Reader<R> {
    inner: R,
}

impl<R: Read> Reader<R> {
    fn exact(&mut self, buf: &mut [u8], what: &str) -> Result<(), EtmError> {
        self.inner.read_exact(buf).map_err(|e| match e.kind() {
            std::io::ErrorKind::UnexpectedEof => {
                EtmError::Format(format!("truncated while reading {what}"))
            }
            _ => EtmError::Io(e),
        })
    }

    fn u64(&mut self, what: &str) -> Result<u64, EtmError> {
        let mut b = [0u8; 8];
        self.exact(&mut b, what)?;
        Ok(u64::from_le_bytes(b))
    }

    fn len(&mut self, what: &str, limit: u64) -> Result<usize, EtmError> {
        let n = self.u64(what)?;
        if n > limit {
            return Err(EtmError::Format(format!("implausible {what} length {n}")));
        }
        Ok(n as usize)
    }

    fn string(&mut self, what: &str) -> Result<String, EtmError> {
        let n = self.len(what, 1 << 24)?;
        let mut b = vec![0u8; n];
        self.exact(&mut b, what)?;
        String::from_utf8(b).map_err(|_| EtmError::Format(format!("{what} is not UTF-8")))
    }

    fn floats(&mut self, n: usize, what: &str) -> Result<Vec<f64>, EtmError> {
        let mut out = Vec::with_capacity(n);
        let mut b = [0u8; 8];
        for _ in 0..n {
            self.exact(&mut b, what)?;
            out.push(f64::from_le_bytes(b));
        }
        Ok(out)
    }

    fn matrix(&mut self, rows: usize, cols: usize, what: &str) -> Result<Array2<f64>, EtmError> {
        let data = self.floats(rows * cols, what)?;
        Array2::from_shape_vec((rows, cols), data).map_err(|e| EtmError::Shape(e.to_string()))
    }
}

pub fn read_model<R: Read>(r: R) -> Result<EtmModel, EtmError> {
    let mut r = Reader { inner: r };
    let mut magic = [0u8; 4];
    r.exact(&mut magic, "magic")?;
    if magic != CHECKPOINT_MAGIC {
        return Err(EtmError::Format("bad magic bytes".into()));
    }
    let mut vb = [0u8; 4];
    r.exact(&mut vb, "version")?;
    let version = u32::from_le_bytes(vb);
    if version != CHECKPOINT_VERSION {
        return Err(EtmError::Version {
            found: version,
            expected: CHECKPOINT_VERSION,
        });
    }
    let config = EtmConfig::from_kv(&r.string("config")?)?;
    let n_words = r.len("vocabulary", 1 << 26)?;
    let vocab = (0..n_words)
        .map(|_| r.string("word"))
        .collect::<Result<Vec<_>, _>>()?;
    let mut dims = [0usize; 4];
    for d in &mut dims {
        *d = r.len("dimension", 1 << 26)?;
    }
    let [v, l, k, h] = dims;
    if v != vocab.len() {
        return Err(EtmError::Format(format!(
            "{} words but rho has {v} rows",
            vocab.len()
        )));
    }
    let rho = r.matrix(v, l, "rho")?;
    let alpha = r.matrix(k, l, "alpha")?;
    let w_in = r.matrix(v, h, "w_in")?;
    let b_in = Array1::from(r.floats(h, "b_in")?);
    let w_mu = r.matrix(k, h, "w_mu")?;
    let b_mu = Array1::from(r.floats(k, "b_mu")?);
    let w_lv = r.matrix(k, h, "w_lv")?;
    let b_lv = Array1::from(r.floats(k, "b_lv")?);
    let n_loss = r.len("loss curve", 1 << 32)?;
    let loss_curve = r.floats(n_loss, "loss curve")?;
    let mut trailing = [0u8; 1];
    if r.inner.read(&mut trailing)? != 0 {
        return Err(EtmError::Format("trailing bytes after checkpoint".into()));
    }
    let params = EtmParams {
        rho,
        alpha,
        encoder: Encoder {
            w_in,
            b_in,
            w_mu,
            b_mu,
            w_lv,
            b_lv,
        },
    };
    params.check_shapes()?;
    let beta = compute_beta(&params)?;
    Ok(EtmModel {
        config,
        vocab,
        params,
        beta,
        loss_curve,
    })
}

pub fn load_model(path: impl AsRef<Path>) -> Result<EtmModel, EtmError> {
    read_model(BufReader::new(File::open(path)?))
}
