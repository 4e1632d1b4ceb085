//! Binary ensemble dumps.
//!
//! Layout, all integers `u64` and all reals `f64`, little endian:
//!
//! ```text
//! magic "DGPENS\0\0" | version u32 | seed | nodes | M | N
//! per node: noise_variance | |T_c| indices.. | |T_p| indices.. | A (column-major) | x | y | w
//! ```
//!
//! Indices are stored 0-based.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use crate::error::{Error, Result};
use crate::linalg::DenseMatrix;
use crate::signal::{Ensemble, NodeProblem};
use crate::support::SupportSet;

const MAGIC: &[u8; 8] = b"DGPENS\0\0";
pub const FORMAT_VERSION: u32 = 1;

pub fn write_ensemble(ensemble: &Ensemble, out: &mut impl Write) -> std::io::Result<()> {
    let (m, n) = ensemble
        .problems
        .first()
        .map_or((0, 0), |p| (p.a.rows(), p.a.cols()));
    out.write_all(MAGIC)?;
    out.write_all(&FORMAT_VERSION.to_le_bytes())?;
    for v in [ensemble.seed, ensemble.nodes() as u64, m as u64, n as u64] {
        out.write_all(&v.to_le_bytes())?;
    }
    for p in &ensemble.problems {
        out.write_all(&p.noise_variance.to_le_bytes())?;
        for s in [&p.common, &p.private] {
            out.write_all(&(s.len() as u64).to_le_bytes())?;
            for i in s.iter() {
                out.write_all(&(i as u64).to_le_bytes())?;
            }
        }
        for block in [p.a.as_column_major(), &p.x, &p.y, &p.noise] {
            for v in block {
                out.write_all(&v.to_le_bytes())?;
            }
        }
    }
    out.flush()
}

struct Decoder<R> {
    inner: R,
}

impl<R: Read> Decoder<R> {
    fn bytes<const K: usize>(&mut self) -> Result<[u8; K]> {
        let mut buf = [0u8; K];
        self.inner
            .read_exact(&mut buf)
            .map_err(|e| Error::Parse(format!("truncated ensemble dump: {e}")))?;
        Ok(buf)
    }

    fn u64(&mut self) -> Result<u64> {
        self.bytes().map(u64::from_le_bytes)
    }

    fn count(&mut self, limit: usize, what: &str) -> Result<usize> {
        let v = self.u64()?;
        if v > limit as u64 {
            return Err(Error::Parse(format!("{what} = {v} exceeds {limit}")));
        }
        Ok(v as usize)
    }

    fn f64s(&mut self, len: usize) -> Result<Vec<f64>> {
        (0..len).map(|_| self.bytes().map(f64::from_le_bytes)).collect()
    }

    fn support(&mut self, n: usize) -> Result<SupportSet> {
        let len = self.count(n, "support size")?;
        let idx = (0..len).map(|_| self.u64().map(|v| v as usize)).collect::<Result<Vec<_>>>()?;
        SupportSet::new(idx, n).map_err(|e| Error::Parse(e.to_string()))
    }
}

pub fn read_ensemble(input: impl Read) -> Result<Ensemble> {
    let mut d = Decoder { inner: input };
    if &d.bytes::<8>()? != MAGIC {
        return Err(Error::Parse("not an ensemble dump (bad magic)".into()));
    }
    let version = u32::from_le_bytes(d.bytes()?);
    if version != FORMAT_VERSION {
        return Err(Error::Parse(format!(
            "ensemble dump version {version}, expected {FORMAT_VERSION}"
        )));
    }
    let seed = d.u64()?;
    let nodes = d.count(1 << 20, "node count")?;
    let m = d.count(1 << 24, "M")?;
    let n = d.count(1 << 24, "N")?;
    let mut problems = Vec::with_capacity(nodes);
    for _ in 0..nodes {
        let noise_variance = f64::from_le_bytes(d.bytes()?);
        let common = d.support(n)?;
        let private = d.support(n)?;
        let a = DenseMatrix::from_column_major(m, n, d.f64s(m * n)?)
            .map_err(|e| Error::Parse(e.to_string()))?;
        problems.push(NodeProblem {
            a,
            x: d.f64s(n)?,
            y: d.f64s(m)?,
            noise: d.f64s(m)?,
            common,
            private,
            noise_variance,
        });
    }
    let mut rest = [0u8; 1];
    if d.inner.read(&mut rest).map_err(|e| Error::Parse(e.to_string()))? != 0 {
        return Err(Error::Parse("trailing bytes after ensemble dump".into()));
    }
    Ok(Ensemble { problems, seed })
}

pub fn save_ensemble(ensemble: &Ensemble, path: &Path) -> Result<()> {
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    write_ensemble(ensemble, &mut BufWriter::new(file)).map_err(|e| Error::io(path, e))
}

pub fn load_ensemble(path: &Path) -> Result<Ensemble> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    read_ensemble(BufReader::new(file))
}
