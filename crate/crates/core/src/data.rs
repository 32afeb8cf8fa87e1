//! Chunked access to disk-resident CSV datasets, uniform sampling and score
//! table persistence.
//!
//! Input files are headerless CSV of decimal floats. When a dataset is opened
//! with `label_column`, the last field of each row is a {0,1} ground-truth
//! flag (1 = outlier) and is kept out of the feature matrix.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Result, SdcorError};

/// Dense row-major matrix of `f64` observations.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct RowMatrix {
    p: usize,
    data: Vec<f64>,
}

impl RowMatrix {
    pub fn new(p: usize) -> Self {
        RowMatrix { p, data: Vec::new() }
    }

    pub fn with_capacity(p: usize, rows: usize) -> Self {
        RowMatrix {
            p,
            data: Vec::with_capacity(p * rows),
        }
    }

    pub fn from_vec(p: usize, data: Vec<f64>) -> Result<Self> {
        if p == 0 {
            return Err(SdcorError::invalid("matrix dimensionality must be positive"));
        }
        if !data.len().is_multiple_of(p) {
            return Err(SdcorError::invalid(format!(
                "buffer of {} values is not a multiple of p={p}",
                data.len()
            )));
        }
        Ok(RowMatrix { p, data })
    }

    pub fn from_rows<R: AsRef<[f64]>>(rows: &[R]) -> Result<Self> {
        let p = rows
            .first()
            .map(|r| r.as_ref().len())
            .ok_or_else(|| SdcorError::invalid("no rows"))?;
        let mut m = RowMatrix::with_capacity(p, rows.len());
        for r in rows {
            m.try_push(r.as_ref())?;
        }
        Ok(m)
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.p
    }

    #[inline]
    pub fn len(&self) -> usize {
        if self.p == 0 {
            0
        } else {
            self.data.len() / self.p
        }
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    #[inline]
    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.p..(i + 1) * self.p]
    }

    pub fn rows(&self) -> impl ExactSizeIterator<Item = &[f64]> + '_ {
        self.data.chunks_exact(self.p.max(1))
    }

    /// Appends a row; panics on width mismatch.
    pub fn push(&mut self, row: &[f64]) {
        assert_eq!(row.len(), self.p, "row width mismatch");
        self.data.extend_from_slice(row);
    }

    pub fn try_push(&mut self, row: &[f64]) -> Result<()> {
        if row.len() != self.p {
            return Err(SdcorError::DimensionMismatch {
                expected: self.p,
                found: row.len(),
            });
        }
        self.data.extend_from_slice(row);
        Ok(())
    }

    pub fn extend(&mut self, other: &RowMatrix) {
        assert_eq!(other.p, self.p, "row width mismatch");
        self.data.extend_from_slice(&other.data);
    }

    pub fn select(&self, indices: &[usize]) -> RowMatrix {
        let mut out = RowMatrix::with_capacity(self.p, indices.len());
        for &i in indices {
            out.push(self.row(i));
        }
        out
    }

    /// Number of stored numeric cells.
    pub fn cells(&self) -> usize {
        self.data.len()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn clear(&mut self) {
        self.data.clear();
    }
}

/// One contiguous block of rows from a [`ChunkedDataset`].
#[derive(Clone, Debug)]
pub struct Chunk {
    /// Index of the first row of this chunk within the dataset.
    pub start: usize,
    pub rows: RowMatrix,
    pub labels: Option<Vec<u8>>,
}

/// Bounded-memory accessor over a headerless CSV table.
///
/// Opening validates the whole file once; iteration re-reads it and never
/// holds more than `chunk_rows` rows at a time.
#[derive(Clone, Debug)]
pub struct ChunkedDataset {
    path: PathBuf,
    n: usize,
    p: usize,
    label_column: bool,
    chunk_rows: usize,
}

pub fn open_dataset(
    path: impl AsRef<Path>,
    chunk_rows: usize,
    label_column: bool,
) -> Result<ChunkedDataset> {
    ChunkedDataset::open(path, chunk_rows, label_column)
}

impl ChunkedDataset {
    pub fn open(path: impl AsRef<Path>, chunk_rows: usize, label_column: bool) -> Result<Self> {
        if chunk_rows == 0 {
            return Err(SdcorError::invalid("chunk_rows must be positive"));
        }
        let path = path.as_ref().to_path_buf();
        let mut reader = RowReader::new(&path, label_column, None)?;
        let mut n = 0usize;
        let mut features = Vec::new();
        while let Some(parsed) = reader.next_row(&mut features)? {
            let _ = parsed;
            n += 1;
        }
        if n == 0 {
            return Err(SdcorError::EmptyDataset(path));
        }
        let p = reader.expected_width.expect("width known after first row");
        let p = if label_column { p - 1 } else { p };
        if p == 0 {
            return Err(SdcorError::invalid(format!(
                "{}: no feature columns",
                path.display()
            )));
        }
        Ok(ChunkedDataset {
            path,
            n,
            p,
            label_column,
            chunk_rows,
        })
    }

    /// Re-chunks so that one pass yields `chunks` chunks (`ceil(n/chunks)` rows each).
    pub fn with_chunk_count(mut self, chunks: usize) -> Result<Self> {
        if chunks == 0 {
            return Err(SdcorError::invalid("chunk count must be positive"));
        }
        self.chunk_rows = self.n.div_ceil(chunks).max(1);
        Ok(self)
    }

    pub fn with_chunk_rows(mut self, chunk_rows: usize) -> Result<Self> {
        if chunk_rows == 0 {
            return Err(SdcorError::invalid("chunk_rows must be positive"));
        }
        self.chunk_rows = chunk_rows;
        Ok(self)
    }

    pub fn path(&self) -> &Path {
        &self.path
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn p(&self) -> usize {
        self.p
    }

    pub fn has_labels(&self) -> bool {
        self.label_column
    }

    pub fn chunk_rows(&self) -> usize {
        self.chunk_rows
    }

    pub fn chunk_count(&self) -> usize {
        self.n.div_ceil(self.chunk_rows)
    }

    /// Starts a fresh pass over the file with an independent handle.
    pub fn chunks(&self) -> Result<ChunkIter> {
        Ok(ChunkIter {
            reader: RowReader::new(&self.path, self.label_column, Some(self.p + self.label_column as usize))?,
            p: self.p,
            chunk_rows: self.chunk_rows,
            next_start: 0,
            label_column: self.label_column,
            scratch: Vec::new(),
        })
    }

    /// Reads the full table into memory. Intended for tests and small data.
    pub fn load_all(&self) -> Result<(RowMatrix, Option<Vec<u8>>)> {
        let mut rows = RowMatrix::with_capacity(self.p, self.n);
        let mut labels = self.label_column.then(Vec::new);
        for chunk in self.chunks()? {
            let chunk = chunk?;
            rows.extend(&chunk.rows);
            if let (Some(all), Some(part)) = (labels.as_mut(), chunk.labels) {
                all.extend(part);
            }
        }
        Ok((rows, labels))
    }
}

pub struct ChunkIter {
    reader: RowReader,
    p: usize,
    chunk_rows: usize,
    next_start: usize,
    label_column: bool,
    scratch: Vec<f64>,
}

impl Iterator for ChunkIter {
    type Item = Result<Chunk>;

    fn next(&mut self) -> Option<Self::Item> {
        let mut rows = RowMatrix::with_capacity(self.p, self.chunk_rows);
        let mut labels = self.label_column.then(|| Vec::with_capacity(self.chunk_rows));
        while rows.len() < self.chunk_rows {
            match self.reader.next_row(&mut self.scratch) {
                Ok(Some(label)) => {
                    rows.push(&self.scratch[..self.p]);
                    if let Some(l) = labels.as_mut() {
                        l.push(label.unwrap_or(0));
                    }
                }
                Ok(None) => break,
                Err(e) => return Some(Err(e)),
            }
        }
        if rows.is_empty() {
            return None;
        }
        let start = self.next_start;
        self.next_start += rows.len();
        Some(Ok(Chunk { start, rows, labels }))
    }
}

/// Line-oriented CSV row parser with position-aware errors.
struct RowReader {
    path: PathBuf,
    lines: std::io::Lines<BufReader<File>>,
    line_no: usize,
    label_column: bool,
    expected_width: Option<usize>,
}

impl RowReader {
    fn new(path: &Path, label_column: bool, expected_width: Option<usize>) -> Result<Self> {
        let file = File::open(path).map_err(|e| SdcorError::io(path, e))?;
        Ok(RowReader {
            path: path.to_path_buf(),
            lines: BufReader::new(file).lines(),
            line_no: 0,
            label_column,
            expected_width,
        })
    }

    /// Parses the next non-blank row into `out` (features followed by the
    /// label value when present). Returns `Some(label)` per row.
    fn next_row(&mut self, out: &mut Vec<f64>) -> Result<Option<Option<u8>>> {
        loop {
            let line = match self.lines.next() {
                None => return Ok(None),
                Some(Err(e)) => return Err(SdcorError::io(&self.path, e)),
                Some(Ok(line)) => line,
            };
            self.line_no += 1;
            let trimmed = line.trim();
            if trimmed.is_empty() {
                continue;
            }
            out.clear();
            for (col, field) in trimmed.split(',').enumerate() {
                let field = field.trim();
                let value: f64 = field.parse().map_err(|_| SdcorError::Parse {
                    path: self.path.clone(),
                    row: self.line_no,
                    column: col + 1,
                    message: if field.is_empty() {
                        "missing value".to_string()
                    } else {
                        format!("not a number: '{field}'")
                    },
                })?;
                if !value.is_finite() {
                    return Err(SdcorError::Parse {
                        path: self.path.clone(),
                        row: self.line_no,
                        column: col + 1,
                        message: format!("non-finite value '{field}'"),
                    });
                }
                out.push(value);
            }
            match self.expected_width {
                None => self.expected_width = Some(out.len()),
                Some(w) if w != out.len() => {
                    return Err(SdcorError::Width {
                        path: self.path.clone(),
                        row: self.line_no,
                        found: out.len(),
                        expected: w,
                    })
                }
                Some(_) => {}
            }
            if self.label_column {
                let col = out.len();
                let raw = out[col - 1];
                let label = if raw == 0.0 {
                    0
                } else if raw == 1.0 {
                    1
                } else {
                    return Err(SdcorError::Parse {
                        path: self.path.clone(),
                        row: self.line_no,
                        column: col,
                        message: format!("label must be 0 or 1, got {raw}"),
                    });
                };
                return Ok(Some(Some(label)));
            }
            return Ok(Some(None));
        }
    }
}

/// Uniform sample drawn without replacement.
#[derive(Clone, Debug)]
pub struct SampleSet {
    pub rows: RowMatrix,
    /// Dataset row index of each sampled row, in sampling order.
    pub source_indices: Vec<usize>,
    pub rate: f64,
}

impl SampleSet {
    pub fn len(&self) -> usize {
        self.source_indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.source_indices.is_empty()
    }
}

/// Number of rows a sample at `rate` draws from `n` rows.
pub fn sample_size(n: usize, rate: f64) -> Result<usize> {
    if !(rate > 0.0 && rate <= 1.0) {
        return Err(SdcorError::invalid(format!(
            "sampling rate must lie in (0, 1], got {rate}"
        )));
    }
    let s = (rate * n as f64).round() as usize;
    if s < 1 {
        return Err(SdcorError::invalid(format!(
            "sampling rate {rate} over {n} rows selects no rows"
        )));
    }
    Ok(s.min(n))
}

/// Draws `s` distinct indices out of `0..n` with a partial Fisher-Yates shuffle.
pub fn sample_indices(n: usize, s: usize, seed: u64) -> Vec<usize> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut idx: Vec<usize> = (0..n).collect();
    for i in 0..s.min(n) {
        let j = rng.gen_range(i..n);
        idx.swap(i, j);
    }
    idx.truncate(s.min(n));
    idx
}

pub fn random_sample(ds: &ChunkedDataset, rate: f64, seed: u64) -> Result<SampleSet> {
    let s = sample_size(ds.n(), rate)?;
    let source_indices = sample_indices(ds.n(), s, seed);

    let mut wanted: Vec<(usize, usize)> = source_indices
        .iter()
        .enumerate()
        .map(|(slot, &row)| (row, slot))
        .collect();
    wanted.sort_unstable();

    let p = ds.p();
    let mut buf = vec![0.0; s * p];
    let mut cursor = 0;
    for chunk in ds.chunks()? {
        let chunk = chunk?;
        let end = chunk.start + chunk.rows.len();
        while cursor < wanted.len() && wanted[cursor].0 < end {
            let (row, slot) = wanted[cursor];
            buf[slot * p..(slot + 1) * p].copy_from_slice(chunk.rows.row(row - chunk.start));
            cursor += 1;
        }
        if cursor == wanted.len() {
            break;
        }
    }
    Ok(SampleSet {
        rows: RowMatrix::from_vec(p, buf)?,
        source_indices,
        rate,
    })
}

/// Writes sampled row indices, one per line, for auditing.
pub fn write_indices(path: impl AsRef<Path>, indices: &[usize]) -> Result<()> {
    let path = path.as_ref();
    let file = File::create(path).map_err(|e| SdcorError::io(path, e))?;
    let mut w = BufWriter::new(file);
    for i in indices {
        writeln!(w, "{i}").map_err(|e| SdcorError::io(path, e))?;
    }
    w.flush().map_err(|e| SdcorError::io(path, e))
}

/// Writes a feature matrix (and optional trailing label column) as headerless CSV.
pub fn write_matrix_csv(path: impl AsRef<Path>, rows: &RowMatrix, labels: Option<&[u8]>) -> Result<()> {
    let path = path.as_ref();
    if let Some(l) = labels {
        if l.len() != rows.len() {
            return Err(SdcorError::invalid("label count differs from row count"));
        }
    }
    let file = File::create(path).map_err(|e| SdcorError::io(path, e))?;
    let mut w = BufWriter::new(file);
    let io = |e| SdcorError::io(path, e);
    for (i, row) in rows.rows().enumerate() {
        for (j, v) in row.iter().enumerate() {
            if j > 0 {
                w.write_all(b",").map_err(io)?;
            }
            write!(w, "{v}").map_err(io)?;
        }
        if let Some(l) = labels {
            write!(w, ",{}", l[i]).map_err(io)?;
        }
        w.write_all(b"\n").map_err(io)?;
    }
    w.flush().map_err(io)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ScoreEntry {
    pub index: usize,
    pub score: f64,
    /// 1-based final-cluster id.
    pub cluster: usize,
    pub label: Option<u8>,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct ScoreTable {
    pub entries: Vec<ScoreEntry>,
}

impl ScoreTable {
    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn scores(&self) -> Vec<f64> {
        self.entries.iter().map(|e| e.score).collect()
    }

    /// Labels of every entry, or `None` if any entry lacks one.
    pub fn labels(&self) -> Option<Vec<u8>> {
        self.entries.iter().map(|e| e.label).collect()
    }

    /// Checks that row indices form a permutation of `0..len`.
    pub fn is_permutation(&self) -> bool {
        let mut seen = vec![false; self.entries.len()];
        for e in &self.entries {
            match seen.get_mut(e.index) {
                Some(s) if !*s => *s = true,
                _ => return false,
            }
        }
        true
    }
}

pub const SCORE_HEADER: &str = "index,score,cluster,label";

pub fn write_scores(st: &ScoreTable, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let file = File::create(path).map_err(|e| SdcorError::io(path, e))?;
    let mut w = BufWriter::new(file);
    let io = |e| SdcorError::io(path, e);
    writeln!(w, "{SCORE_HEADER}").map_err(io)?;
    for e in &st.entries {
        // `{}` on f64 prints the shortest representation that round-trips.
        match e.label {
            Some(l) => writeln!(w, "{},{},{},{}", e.index, e.score, e.cluster, l),
            None => writeln!(w, "{},{},{},", e.index, e.score, e.cluster),
        }
        .map_err(io)?;
    }
    w.flush().map_err(io)
}

pub fn read_scores(path: impl AsRef<Path>) -> Result<ScoreTable> {
    let path = path.as_ref();
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(|e| csv_error(path, e))?;
    let headers = reader.headers().map_err(|e| csv_error(path, e))?.clone();
    let expected: Vec<&str> = SCORE_HEADER.split(',').collect();
    let found: Vec<&str> = headers.iter().collect();
    if found != expected {
        return Err(SdcorError::Parse {
            path: path.to_path_buf(),
            row: 1,
            column: 1,
            message: format!("expected header '{SCORE_HEADER}'"),
        });
    }
    let mut entries = Vec::new();
    for (i, rec) in reader.records().enumerate() {
        let row = i + 2;
        let rec = rec.map_err(|e| csv_error(path, e))?;
        let field = |col: usize| -> Result<&str> {
            rec.get(col).ok_or_else(|| SdcorError::Width {
                path: path.to_path_buf(),
                row,
                found: rec.len(),
                expected: 4,
            })
        };
        let bad = |col: usize, what: &str| SdcorError::Parse {
            path: path.to_path_buf(),
            row,
            column: col + 1,
            message: format!("invalid {what}"),
        };
        let index = field(0)?.parse().map_err(|_| bad(0, "index"))?;
        let score = field(1)?.parse().map_err(|_| bad(1, "score"))?;
        let cluster = field(2)?.parse().map_err(|_| bad(2, "cluster"))?;
        let label = match field(3)? {
            "" => None,
            "0" => Some(0),
            "1" => Some(1),
            _ => return Err(bad(3, "label")),
        };
        entries.push(ScoreEntry {
            index,
            score,
            cluster,
            label,
        });
    }
    Ok(ScoreTable { entries })
}

fn csv_error(path: &Path, e: csv::Error) -> SdcorError {
    match e.into_kind() {
        csv::ErrorKind::Io(io) => SdcorError::io(path, io),
        other => SdcorError::Parse {
            path: path.to_path_buf(),
            row: 0,
            column: 0,
            message: format!("{other:?}"),
        },
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn temp_csv(contents: &str) -> tempfile::NamedTempFile {
        let mut f = tempfile::NamedTempFile::new().unwrap();
        f.write_all(contents.as_bytes()).unwrap();
        f.flush().unwrap();
        f
    }

    #[test]
    fn chunk_sizes() {
        let f = temp_csv("1,2\n3,4\n5,6\n7,8\n");
        let ds = open_dataset(f.path(), 3, false).unwrap();
        assert_eq!((ds.n(), ds.p()), (4, 2));
        let sizes: Vec<usize> = ds.chunks().unwrap().map(|c| c.unwrap().rows.len()).collect();
        assert_eq!(sizes, vec![3, 1]);
        assert_eq!(ds.chunk_count(), 2);
    }

    #[test]
    fn empty_file_is_error() {
        let f = temp_csv("");
        let err = open_dataset(f.path(), 3, false).unwrap_err();
        assert!(err.to_string().contains("empty dataset"), "{err}");
    }

    #[test]
    fn width_error_names_row() {
        let f = temp_csv("1,2\n1,2\n1,2\n1,2\n1,2\n1,2\n1,2,3\n1,2\n");
        let err = open_dataset(f.path(), 3, false).unwrap_err();
        match err {
            SdcorError::Width { row, found, expected, .. } => {
                assert_eq!((row, found, expected), (7, 3, 2));
            }
            other => panic!("unexpected {other}"),
        }
    }

    #[test]
    fn parse_error_has_position() {
        let f = temp_csv("1,2\n1,x\n");
        match open_dataset(f.path(), 3, false).unwrap_err() {
            SdcorError::Parse { row, column, .. } => assert_eq!((row, column), (2, 2)),
            other => panic!("unexpected {other}"),
        }
        let f = temp_csv("1,2\n1,\n");
        assert!(matches!(
            open_dataset(f.path(), 3, false).unwrap_err(),
            SdcorError::Parse { row: 2, column: 2, .. }
        ));
    }

    #[test]
    fn labels_are_split_off() {
        let f = temp_csv("1,2,0\n3,4,1\n");
        let ds = open_dataset(f.path(), 10, true).unwrap();
        assert_eq!(ds.p(), 2);
        let (rows, labels) = ds.load_all().unwrap();
        assert_eq!(rows.row(1), &[3.0, 4.0]);
        assert_eq!(labels.unwrap(), vec![0, 1]);

        let f = temp_csv("1,2,0\n3,4,2\n");
        assert!(open_dataset(f.path(), 10, true).is_err());
    }

    #[test]
    fn chunk_count_flag() {
        let f = temp_csv(&"1\n".repeat(25));
        let ds = open_dataset(f.path(), 1, false).unwrap().with_chunk_count(10).unwrap();
        assert_eq!(ds.chunk_rows(), 3);
        assert_eq!(ds.chunk_count(), 9);
    }

    fn numbered(n: usize) -> tempfile::NamedTempFile {
        let body: String = (0..n).map(|i| format!("{i},{}\n", i as f64 * 0.5)).collect();
        temp_csv(&body)
    }

    #[test]
    fn full_rate_sample_takes_everything() {
        let f = numbered(37);
        let ds = open_dataset(f.path(), 5, false).unwrap();
        let s = random_sample(&ds, 1.0, 3).unwrap();
        let mut idx = s.source_indices.clone();
        idx.sort_unstable();
        assert_eq!(idx, (0..37).collect::<Vec<_>>());
        for (slot, &i) in s.source_indices.iter().enumerate() {
            assert_eq!(s.rows.row(slot)[0], i as f64);
        }
    }

    #[test]
    fn sample_size_and_determinism() {
        let f = numbered(1000);
        let ds = open_dataset(f.path(), 64, false).unwrap();
        let a = random_sample(&ds, 0.005, 11).unwrap();
        let b = random_sample(&ds, 0.005, 11).unwrap();
        assert_eq!(a.len(), 5);
        assert_eq!(a.source_indices, b.source_indices);
        let mut uniq = a.source_indices.clone();
        uniq.sort_unstable();
        uniq.dedup();
        assert_eq!(uniq.len(), 5);
        assert!(random_sample(&ds, 0.0001, 1).is_err());
        assert!(random_sample(&ds, 1.5, 1).is_err());
    }

    #[test]
    fn inclusion_frequency_is_uniform() {
        let n = 200;
        let rate = 0.1;
        let s = sample_size(n, rate).unwrap();
        let trials = 2000u64;
        let mut hits = vec![0u32; n];
        for seed in 0..trials {
            for i in sample_indices(n, s, seed) {
                hits[i] += 1;
            }
        }
        let q = s as f64 / n as f64;
        let se = (q * (1.0 - q) / trials as f64).sqrt();
        for (i, &h) in hits.iter().enumerate() {
            let freq = h as f64 / trials as f64;
            assert!((freq - q).abs() <= 4.5 * se, "row {i}: {freq} vs {q}");
        }
        // The 3-standard-error band should hold for the overwhelming majority.
        let within = hits
            .iter()
            .filter(|&&h| ((h as f64 / trials as f64) - q).abs() <= 3.0 * se)
            .count();
        assert!(within as f64 >= 0.99 * n as f64 - 1.0, "{within}/{n}");
    }

    #[test]
    fn passes_are_identical_and_complete() {
        let f = numbered(23);
        let ds = open_dataset(f.path(), 4, false).unwrap();
        let (a, _) = ds.load_all().unwrap();
        let (b, _) = ds.load_all().unwrap();
        assert_eq!(a, b);
        assert_eq!(a.len(), 23);
        for i in 0..23 {
            assert_eq!(a.row(i)[0].to_bits(), (i as f64).to_bits());
        }
    }

    #[test]
    fn score_round_trip() {
        let st = ScoreTable {
            entries: vec![
                ScoreEntry { index: 2, score: 0.1 + 0.2, cluster: 1, label: Some(1) },
                ScoreEntry { index: 0, score: 1e-300, cluster: 2, label: Some(0) },
                ScoreEntry { index: 1, score: std::f64::consts::PI * 1e12, cluster: 1, label: None },
            ],
        };
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("s.csv");
        write_scores(&st, &path).unwrap();
        let back = read_scores(&path).unwrap();
        assert_eq!(back, st);
        for (a, b) in back.entries.iter().zip(&st.entries) {
            assert_eq!(a.score.to_bits(), b.score.to_bits());
        }
        assert!(read_scores(dir.path().join("missing.csv")).is_err());
    }
}
