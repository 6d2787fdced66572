//! CSV emission with a provenance line `# critload <version> config=<sha256>`.

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::Path;

use sha2::{Digest, Sha256};

use crate::outcome::Failure;

pub struct Sink {
    inner: Box<dyn Write>,
}

impl Sink {
    pub fn new(path: Option<&Path>) -> Result<Self, Failure> {
        let inner: Box<dyn Write> = match path {
            Some(p) => Box::new(BufWriter::new(
                File::create(p).map_err(|e| Failure::usage(format!("cannot create {}: {e}", p.display())))?,
            )),
            None => Box::new(BufWriter::new(io::stdout())),
        };
        Ok(Self { inner })
    }
}

/// Hash input describing a run, excluding the worker count.
#[derive(Default)]
pub struct Provenance {
    hasher: Sha256,
}

impl Provenance {
    pub fn new(command: &str) -> Self {
        let mut p = Self::default();
        p.field("command", command);
        p
    }

    pub fn field(&mut self, key: &str, value: impl std::fmt::Display) -> &mut Self {
        self.hasher.update(format!("{key}={value}\n").as_bytes());
        self
    }

    pub fn file(&mut self, key: &str, contents: &str) -> &mut Self {
        self.hasher.update(format!("{key}:{}\n", contents.len()).as_bytes());
        self.hasher.update(contents.as_bytes());
        self
    }

    fn digest(&self) -> String {
        self.hasher.clone().finalize().iter().map(|b| format!("{b:02x}")).collect()
    }
}

pub struct Table<'a> {
    writer: csv::Writer<&'a mut dyn Write>,
}

impl<'a> Table<'a> {
    /// Writes the provenance line, any extra comment lines, and the header.
    pub fn start(sink: &'a mut Sink, provenance: &Provenance, notes: &[String], header: &[&str]) -> Result<Self, Failure> {
        let w: &mut dyn Write = sink.inner.as_mut();
        writeln!(w, "# critload {} config={}", env!("CARGO_PKG_VERSION"), provenance.digest())?;
        for n in notes {
            writeln!(w, "# {n}")?;
        }
        let mut writer = csv::Writer::from_writer(w);
        writer.write_record(header)?;
        Ok(Self { writer })
    }

    pub fn row(&mut self, cells: &[String]) -> Result<(), Failure> {
        self.writer.write_record(cells)?;
        Ok(())
    }

    pub fn finish(mut self) -> Result<(), Failure> {
        self.writer.flush()?;
        Ok(())
    }
}

/// Shortest round-trip formatting, switching to exponent form outside
/// `[1e-4, 1e7)`.
pub fn num(x: f64) -> String {
    let a = x.abs();
    if x == 0.0 || !x.is_finite() || (1e-4..1e7).contains(&a) {
        format!("{x}")
    } else {
        format!("{x:e}")
    }
}

pub fn flag(b: bool) -> String {
    b.to_string()
}

pub fn read_file(path: &Path) -> Result<String, Failure> {
    std::fs::read_to_string(path).map_err(|e| Failure::usage(format!("cannot read {}: {e}", path.display())))
}

/// Parses `lo,hi` into an increasing pair.
pub fn parse_pair(s: &str, what: &str) -> Result<(f64, f64), Failure> {
    let v = parse_list(s, what)?;
    match v[..] {
        [lo, hi] if lo < hi => Ok((lo, hi)),
        _ => Err(Failure::usage(format!("{what} must be `lo,hi` with lo < hi, got `{s}`"))),
    }
}

pub fn parse_list(s: &str, what: &str) -> Result<Vec<f64>, Failure> {
    s.split(',')
        .map(|t| {
            t.trim()
                .parse::<f64>()
                .ok()
                .filter(|v| v.is_finite())
                .ok_or_else(|| Failure::usage(format!("{what}: cannot parse `{t}`")))
        })
        .collect()
}
