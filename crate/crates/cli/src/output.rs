//! Output plumbing: 12-significant-digit floats, CSV rows (comma separator,
//! `.` decimal, header row, LF endings), and the stdout/file sink.

use std::io::Write;

use crate::CliError;

/// Formats a float with 12 significant digits.
pub fn sig(x: f64) -> String {
    format!("{x:.11e}")
}

pub enum Sink {
    Stdout,
    File(std::io::BufWriter<std::fs::File>),
}

impl Sink {
    pub fn open(out: &Option<String>) -> Result<Self, CliError> {
        match out {
            None => Ok(Sink::Stdout),
            Some(path) => {
                let file = std::fs::File::create(path)
                    .map_err(|e| CliError::Io(format!("cannot write {path}: {e}")))?;
                Ok(Sink::File(std::io::BufWriter::new(file)))
            }
        }
    }

    pub fn line(&mut self, text: &str) -> Result<(), CliError> {
        let res = match self {
            Sink::Stdout => {
                let mut lock = std::io::stdout().lock();
                lock.write_all(text.as_bytes())
                    .and_then(|_| lock.write_all(b"\n"))
            }
            Sink::File(f) => f
                .write_all(text.as_bytes())
                .and_then(|_| f.write_all(b"\n")),
        };
        res.map_err(|e| CliError::Io(format!("write failed: {e}")))
    }

    pub fn finish(self) -> Result<(), CliError> {
        if let Sink::File(mut f) = self {
            f.flush()
                .map_err(|e| CliError::Io(format!("flush failed: {e}")))?;
        }
        Ok(())
    }
}

/// Joins cells into one CSV row.
pub fn csv_row(cells: &[String]) -> String {
    cells.join(",")
}

/// Clamps negative rates to zero when plotting parity is requested.
pub fn maybe_clamp(k: f64, clamp: bool) -> f64 {
    if clamp && k < 0.0 {
        0.0
    } else {
        k
    }
}
