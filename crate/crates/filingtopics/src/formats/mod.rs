//! Readers and writers for every file the pipeline consumes or produces.

use std::path::{Path, PathBuf};

use thiserror::Error;

pub mod artifact;
pub mod input;
pub mod tables;

#[derive(Debug, Error)]
pub enum FormatError {
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("{}:{line}: {message}", path.display())]
    Parse {
        path: PathBuf,
        line: usize,
        message: String,
    },
    #[error("{}: {source}", path.display())]
    Csv { path: PathBuf, source: csv::Error },
    #[error("{}: {message}", path.display())]
    Invalid { path: PathBuf, message: String },
}

impl FormatError {
    fn parse(path: &Path, line: usize, message: impl Into<String>) -> Self {
        FormatError::Parse {
            path: path.to_path_buf(),
            line,
            message: message.into(),
        }
    }

    fn invalid(path: &Path, message: impl Into<String>) -> Self {
        FormatError::Invalid {
            path: path.to_path_buf(),
            message: message.into(),
        }
    }
}

pub(crate) fn read_text(path: &Path) -> Result<String, FormatError> {
    std::fs::read_to_string(path).map_err(|source| FormatError::Io {
        path: path.to_path_buf(),
        source,
    })
}

pub(crate) fn write_text(path: &Path, text: &str) -> Result<(), FormatError> {
    if let Some(parent) = path.parent() {
        std::fs::create_dir_all(parent).map_err(|source| FormatError::Io {
            path: parent.to_path_buf(),
            source,
        })?;
    }
    std::fs::write(path, text).map_err(|source| FormatError::Io {
        path: path.to_path_buf(),
        source,
    })
}

/// Shortest decimal that parses back to the same bits.
pub(crate) fn num(x: f64) -> String {
    format!("{x:?}")
}

pub(crate) fn opt_num(x: Option<f64>) -> String {
    x.map(num).unwrap_or_default()
}

/// Builds a CSV document in memory so the file is written in one step.
pub(crate) struct CsvOut {
    writer: csv::Writer<Vec<u8>>,
}

impl CsvOut {
    pub(crate) fn new(header: &[&str]) -> Self {
        let mut writer = csv::WriterBuilder::new()
            .terminator(csv::Terminator::Any(b'\n'))
            .from_writer(Vec::new());
        writer.write_record(header).expect("writing to memory");
        CsvOut { writer }
    }

    pub(crate) fn row<I, S>(&mut self, fields: I)
    where
        I: IntoIterator<Item = S>,
        S: AsRef<[u8]>,
    {
        self.writer.write_record(fields).expect("writing to memory");
    }

    pub(crate) fn save(self, path: &Path) -> Result<(), FormatError> {
        let bytes = self.writer.into_inner().expect("flushing to memory");
        write_text(path, &String::from_utf8(bytes).expect("fields are UTF-8"))
    }
}

/// Opens a CSV file and checks its header row.
pub(crate) fn csv_reader(
    path: &Path,
    header: &[&str],
) -> Result<csv::Reader<std::fs::File>, FormatError> {
    let mut reader = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(|source| FormatError::Csv {
            path: path.to_path_buf(),
            source,
        })?;
    let found = reader.headers().map_err(|source| FormatError::Csv {
        path: path.to_path_buf(),
        source,
    })?;
    if found.iter().ne(header.iter().copied()) {
        return Err(FormatError::parse(
            path,
            1,
            format!(
                "expected header {:?}, found {:?}",
                header.join(","),
                found.iter().collect::<Vec<_>>().join(",")
            ),
        ));
    }
    Ok(reader)
}

/// Iterates data records with their 1-based line numbers.
pub(crate) fn records(
    path: &Path,
    reader: &mut csv::Reader<std::fs::File>,
) -> Result<Vec<(usize, csv::StringRecord)>, FormatError> {
    reader
        .records()
        .map(|r| {
            let record = r.map_err(|source| FormatError::Csv {
                path: path.to_path_buf(),
                source,
            })?;
            let line = record.position().map_or(0, |p| p.line() as usize);
            Ok((line, record))
        })
        .collect()
}
