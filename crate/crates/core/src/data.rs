//! Datasets: CSV ingestion, preprocessing shared by both pipelines, and a
//! synthetic two-level hierarchy generator.

use std::collections::HashMap;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;
use std::str::FromStr;

use ndarray::{Array2, Axis};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal, StandardNormal};

use crate::error::{Error, Result};

/// A feature matrix with optional ground-truth labels and column names.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    pub features: Array2<f64>,
    pub labels: Option<Vec<usize>>,
    pub names: Option<Vec<String>>,
}

impl Dataset {
    pub fn new(features: Array2<f64>, labels: Option<Vec<usize>>) -> Result<Self> {
        if features.nrows() == 0 || features.ncols() == 0 {
            return Err(Error::invalid("dataset needs at least one row and one column"));
        }
        if let Some(l) = &labels {
            if l.len() != features.nrows() {
                return Err(Error::invalid(format!(
                    "{} labels for {} rows",
                    l.len(),
                    features.nrows()
                )));
            }
        }
        Ok(Dataset {
            features,
            labels,
            names: None,
        })
    }

    pub fn len(&self) -> usize {
        self.features.nrows()
    }

    pub fn is_empty(&self) -> bool {
        self.features.nrows() == 0
    }

    pub fn dim(&self) -> usize {
        self.features.ncols()
    }

    pub fn num_classes(&self) -> Option<usize> {
        self.labels.as_ref().map(|l| l.iter().max().map_or(0, |m| m + 1))
    }
}

/// Which column of a CSV file holds ground-truth labels.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum LabelColumn {
    Index(usize),
    Name(String),
}

impl FromStr for LabelColumn {
    type Err = std::convert::Infallible;

    /// Integers are column indices, anything else is a header name.
    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        Ok(match s.trim().parse::<usize>() {
            Ok(i) => LabelColumn::Index(i),
            Err(_) => LabelColumn::Name(s.trim().to_string()),
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum HeaderMode {
    Present,
    Absent,
    /// Treat the first row as a header if any of its feature cells is not a number.
    #[default]
    Detect,
}

/// Loads a comma-separated numeric table.
///
/// Labels, if requested, are factorized to `0..K` in order of first
/// appearance. LF and CRLF line endings are both accepted.
pub fn load_csv(path: impl AsRef<Path>, label_column: Option<&LabelColumn>, header: HeaderMode) -> Result<Dataset> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })?;
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(file);

    let mut records = Vec::new();
    for rec in reader.records() {
        let rec = rec.map_err(|e| Error::Parse {
            line: e.position().map_or(0, |p| p.line()),
            column: None,
            reason: e.to_string(),
        })?;
        let line = rec.position().map_or(0, |p| p.line());
        if rec.iter().all(str::is_empty) {
            continue;
        }
        records.push((line, rec));
    }
    let Some((first_line, first)) = records.first() else {
        return Err(Error::Parse {
            line: 1,
            column: None,
            reason: "file contains no rows".into(),
        });
    };
    let width = first.len();

    let has_header = match header {
        HeaderMode::Present => true,
        HeaderMode::Absent => false,
        HeaderMode::Detect => {
            matches!(label_column, Some(LabelColumn::Name(_)))
                || first.iter().enumerate().any(|(i, cell)| {
                    let is_label = matches!(label_column, Some(LabelColumn::Index(j)) if *j == i);
                    !is_label && cell.parse::<f64>().is_err()
                })
        }
    };
    let names: Option<Vec<String>> = has_header.then(|| first.iter().map(str::to_string).collect());

    let label_idx = match label_column {
        None => None,
        Some(LabelColumn::Index(i)) if *i < width => Some(*i),
        Some(LabelColumn::Index(i)) => {
            return Err(Error::invalid(format!(
                "label column {i} out of range for {width} columns"
            )))
        }
        Some(LabelColumn::Name(n)) => {
            let names = names.as_ref().ok_or_else(|| {
                Error::invalid(format!("label column {n:?} given by name but the file has no header"))
            })?;
            Some(
                names
                    .iter()
                    .position(|h| h == n)
                    .ok_or_else(|| Error::invalid(format!("no column named {n:?} (line {first_line})")))?,
            )
        }
    };

    let feature_cols: Vec<usize> = (0..width).filter(|c| Some(*c) != label_idx).collect();
    if feature_cols.is_empty() {
        return Err(Error::invalid("no feature columns"));
    }

    let rows = &records[usize::from(has_header)..];
    if rows.is_empty() {
        return Err(Error::Parse {
            line: *first_line,
            column: None,
            reason: "file contains a header but no data rows".into(),
        });
    }
    let mut values = Vec::with_capacity(rows.len() * feature_cols.len());
    let mut raw_labels = Vec::new();
    for (line, rec) in rows {
        if rec.len() != width {
            return Err(Error::Parse {
                line: *line,
                column: None,
                reason: format!("expected {width} fields, found {}", rec.len()),
            });
        }
        for &c in &feature_cols {
            let cell = &rec[c];
            let v: f64 = cell.parse().map_err(|_| Error::Parse {
                line: *line,
                column: Some(c + 1),
                reason: format!("not a number: {cell:?}"),
            })?;
            values.push(v);
        }
        if let Some(li) = label_idx {
            raw_labels.push(rec[li].to_string());
        }
    }

    let features =
        Array2::from_shape_vec((rows.len(), feature_cols.len()), values).expect("row-major buffer matches shape");
    let labels = label_idx.map(|_| factorize(&raw_labels));
    let mut ds = Dataset::new(features, labels)?;
    ds.names = names.map(|n| feature_cols.iter().map(|&c| n[c].clone()).collect());
    Ok(ds)
}

fn factorize(raw: &[String]) -> Vec<usize> {
    let mut ids = HashMap::new();
    raw.iter()
        .map(|s| {
            let next = ids.len();
            *ids.entry(s.as_str()).or_insert(next)
        })
        .collect()
}

/// Writes the dataset as CSV with LF endings. Labels, when present, go in a
/// trailing `label` column. Floats use the shortest representation that
/// parses back to the same value.
pub fn write_csv(ds: &Dataset, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let io_err = |source| Error::Io {
        path: path.to_path_buf(),
        source,
    };
    let mut out = BufWriter::new(File::create(path).map_err(io_err)?);
    let mut header: Vec<String> = match &ds.names {
        Some(n) => n.clone(),
        None => (0..ds.dim()).map(|i| format!("x{i}")).collect(),
    };
    if ds.labels.is_some() {
        header.push("label".into());
    }
    writeln!(out, "{}", header.join(",")).map_err(io_err)?;
    for (i, row) in ds.features.rows().into_iter().enumerate() {
        let mut cells: Vec<String> = row.iter().map(|v| v.to_string()).collect();
        if let Some(l) = &ds.labels {
            cells.push(l[i].to_string());
        }
        writeln!(out, "{}", cells.join(",")).map_err(io_err)?;
    }
    out.flush().map_err(io_err)
}

/// Per-column standardization (population variance; constant columns
/// become zero) followed by a global rescale so the largest row norm
/// equals `scale`.
pub fn standardize_scaled(raw: &Array2<f64>, scale: f64) -> Result<Array2<f64>> {
    if raw.nrows() == 0 || raw.ncols() == 0 {
        return Err(Error::invalid("empty data matrix"));
    }
    if !(scale > 0.0 && scale.is_finite()) {
        return Err(Error::invalid(format!("scale must be positive, got {scale}")));
    }
    for (i, row) in raw.rows().into_iter().enumerate() {
        if let Some(j) = row.iter().position(|v| !v.is_finite()) {
            return Err(Error::InvalidData {
                row: i,
                reason: format!("non-finite value in column {j}"),
            });
        }
    }
    let n = raw.nrows() as f64;
    let mut out = raw.to_owned();
    for mut col in out.axis_iter_mut(Axis(1)) {
        let mean = col.sum() / n;
        let var = col.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n;
        let sd = var.sqrt();
        if sd > f64::EPSILON * mean.abs().max(1.0) {
            col.mapv_inplace(|v| (v - mean) / sd);
        } else {
            col.fill(0.0);
        }
    }
    let max_norm = out.rows().into_iter().map(|r| r.dot(&r).sqrt()).fold(0.0, f64::max);
    if max_norm > 0.0 {
        let s = scale / max_norm;
        out.mapv_inplace(|v| v * s);
    }
    Ok(out)
}

/// Parameters of the synthetic two-level hierarchy.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HierarchySpec {
    pub num_roots: usize,
    pub children_per_root: usize,
    pub points_per_leaf: usize,
    /// Standard deviation of each leaf's Gaussian cloud.
    pub leaf_spread: f64,
    /// Minimum distance between root centers. Children sit `level_gap / 4`
    /// from their root and at least that far from their siblings.
    pub level_gap: f64,
    pub dim: usize,
    pub seed: u64,
}

impl Default for HierarchySpec {
    fn default() -> Self {
        HierarchySpec {
            num_roots: 2,
            children_per_root: 2,
            points_per_leaf: 75,
            leaf_spread: 0.2,
            level_gap: 10.0,
            dim: 2,
            seed: 42,
        }
    }
}

const PLACEMENT_ATTEMPTS: usize = 100_000;

/// Generates a two-level tree of Gaussian clouds. Labels are leaf indices
/// `root * children_per_root + child`; rows are grouped by leaf.
pub fn make_hierarchical(spec: &HierarchySpec) -> Result<Dataset> {
    let HierarchySpec {
        num_roots,
        children_per_root,
        points_per_leaf,
        leaf_spread,
        level_gap,
        dim,
        seed,
    } = *spec;
    if num_roots == 0 || children_per_root == 0 || points_per_leaf == 0 || dim == 0 {
        return Err(Error::invalid("hierarchy counts and dimension must be >= 1"));
    }
    if !(leaf_spread > 0.0 && level_gap > 0.0) || !leaf_spread.is_finite() || !level_gap.is_finite() {
        return Err(Error::invalid("leaf_spread and level_gap must be positive"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);

    let extent = level_gap * num_roots as f64;
    let roots = place(&mut rng, num_roots, level_gap, |rng| {
        (0..dim).map(|_| rng.random_range(-extent..=extent)).collect()
    })
    .ok_or_else(|| Error::invalid("could not place root centers"))?;

    let child_offset = level_gap / 4.0;
    let mut leaves = Vec::with_capacity(num_roots * children_per_root);
    for root in &roots {
        let children = place(&mut rng, children_per_root, child_offset, |rng| {
            let dir = random_unit(rng, dim);
            root.iter().zip(dir).map(|(r, d)| r + child_offset * d).collect()
        })
        .ok_or_else(|| {
            Error::invalid(format!(
                "cannot fit {children_per_root} children per root in {dim} dimensions"
            ))
        })?;
        leaves.extend(children);
    }

    let noise = Normal::new(0.0, leaf_spread).expect("positive spread");
    let n = leaves.len() * points_per_leaf;
    let mut values = Vec::with_capacity(n * dim);
    let mut labels = Vec::with_capacity(n);
    for (leaf, center) in leaves.iter().enumerate() {
        for _ in 0..points_per_leaf {
            values.extend(center.iter().map(|c| c + noise.sample(&mut rng)));
            labels.push(leaf);
        }
    }
    let features = Array2::from_shape_vec((n, dim), values).expect("shape");
    Dataset::new(features, Some(labels))
}

fn random_unit(rng: &mut ChaCha8Rng, dim: usize) -> Vec<f64> {
    loop {
        let v: Vec<f64> = (0..dim).map(|_| StandardNormal.sample(rng)).collect();
        let n = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if n > 1e-12 {
            return v.into_iter().map(|x| x / n).collect();
        }
    }
}

/// Rejection sampling of `count` centers with pairwise separation >= `min_sep`.
fn place(
    rng: &mut ChaCha8Rng,
    count: usize,
    min_sep: f64,
    mut draw: impl FnMut(&mut ChaCha8Rng) -> Vec<f64>,
) -> Option<Vec<Vec<f64>>> {
    let mut placed: Vec<Vec<f64>> = Vec::with_capacity(count);
    let mut attempts = 0;
    while placed.len() < count {
        attempts += 1;
        if attempts > PLACEMENT_ATTEMPTS {
            return None;
        }
        let cand = draw(rng);
        let ok = placed.iter().all(|p| {
            let d: f64 = p.iter().zip(&cand).map(|(a, b)| (a - b) * (a - b)).sum();
            d.sqrt() >= min_sep
        });
        if ok {
            placed.push(cand);
        }
    }
    Some(placed)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Write;

    fn temp_csv(contents: &str) -> tempfile::NamedTempFile {
        let mut f = tempfile::NamedTempFile::new().unwrap();
        f.write_all(contents.as_bytes()).unwrap();
        f
    }

    #[test]
    fn loads_plain_numeric_table() {
        let f = temp_csv("1,2\n3,4\n5,6\n");
        let ds = load_csv(f.path(), None, HeaderMode::Detect).unwrap();
        assert_eq!(ds.len(), 3);
        assert_eq!(ds.dim(), 2);
        assert!(ds.labels.is_none());
        assert!(ds.names.is_none());
        assert_eq!(ds.features[[2, 1]], 6.0);
    }

    #[test]
    fn factorizes_trailing_labels() {
        let f = temp_csv("1,2,a\r\n3,4,b\r\n5,6,a\r\n");
        let ds = load_csv(f.path(), Some(&LabelColumn::Index(2)), HeaderMode::Detect).unwrap();
        assert_eq!(ds.labels, Some(vec![0, 1, 0]));
        assert_eq!(ds.dim(), 2);
    }

    #[test]
    fn label_column_by_name() {
        let f = temp_csv("class,u,v\nz,1,2\ny,3,4\nz,5,6\n");
        let ds = load_csv(f.path(), Some(&"class".parse().unwrap()), HeaderMode::Detect).unwrap();
        assert_eq!(ds.labels, Some(vec![0, 1, 0]));
        assert_eq!(ds.names, Some(vec!["u".to_string(), "v".to_string()]));
        assert_eq!(ds.features[[1, 0]], 3.0);
    }

    #[test]
    fn ragged_row_names_its_line() {
        let f = temp_csv("1,2\n3,4\n5\n");
        match load_csv(f.path(), None, HeaderMode::Absent) {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 3),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn non_numeric_cell_names_row_and_column() {
        let f = temp_csv("1,2\n3,x\n");
        match load_csv(f.path(), None, HeaderMode::Absent) {
            Err(Error::Parse { line, column, .. }) => {
                assert_eq!(line, 2);
                assert_eq!(column, Some(2));
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn missing_file_is_io_error() {
        let err = load_csv("/definitely/not/here.csv", None, HeaderMode::Detect).unwrap_err();
        assert!(matches!(err, Error::Io { .. }));
        assert!(err.to_string().contains("/definitely/not/here.csv"));
    }

    #[test]
    fn write_then_reload_is_exact() {
        let features = ndarray::array![[0.1, -1e-300], [std::f64::consts::PI, 1.0 / 3.0], [123456789.0, -0.0]];
        let ds = Dataset::new(features, Some(vec![0, 1, 1])).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("round.csv");
        write_csv(&ds, &path).unwrap();
        let back = load_csv(&path, Some(&"label".parse().unwrap()), HeaderMode::Detect).unwrap();
        assert_eq!(back.features, ds.features);
        assert_eq!(back.labels, ds.labels);
        let text = std::fs::read_to_string(&path).unwrap();
        assert!(!text.contains('\r'));
    }

    #[test]
    fn standardize_handles_constant_columns() {
        let raw = ndarray::array![[1.0, 7.0], [2.0, 7.0], [3.0, 7.0]];
        let s = standardize_scaled(&raw, 2.0).unwrap();
        assert!(s.column(1).iter().all(|v| *v == 0.0));
        let max = s.rows().into_iter().map(|r| r.dot(&r).sqrt()).fold(0.0, f64::max);
        assert!((max - 2.0).abs() < 1e-15);
        assert!(s.column(0).sum().abs() < 1e-15);
    }

    #[test]
    fn small_hierarchies() {
        let one = make_hierarchical(&HierarchySpec {
            num_roots: 1,
            children_per_root: 1,
            points_per_leaf: 5,
            ..HierarchySpec::default()
        })
        .unwrap();
        assert_eq!(one.len(), 5);
        assert_eq!(one.labels.as_deref(), Some(&[0; 5][..]));

        let four = make_hierarchical(&HierarchySpec {
            points_per_leaf: 10,
            ..HierarchySpec::default()
        })
        .unwrap();
        assert_eq!(four.len(), 40);
        assert_eq!(four.num_classes(), Some(4));
    }

    #[test]
    fn hierarchy_is_deterministic_per_seed() {
        let spec = HierarchySpec::default();
        assert_eq!(make_hierarchical(&spec).unwrap(), make_hierarchical(&spec).unwrap());
        let other = make_hierarchical(&HierarchySpec { seed: 7, ..spec }).unwrap();
        assert_ne!(other.features, make_hierarchical(&spec).unwrap().features);
    }

    #[test]
    fn hierarchy_rejects_bad_counts() {
        assert!(make_hierarchical(&HierarchySpec {
            num_roots: 0,
            ..HierarchySpec::default()
        })
        .is_err());
        assert!(make_hierarchical(&HierarchySpec {
            dim: 1,
            children_per_root: 3,
            ..HierarchySpec::default()
        })
        .is_err());
    }

    #[test]
    fn tight_leaves_are_recovered_by_nearest_centroid() {
        let ds = make_hierarchical(&HierarchySpec {
            num_roots: 3,
            children_per_root: 3,
            points_per_leaf: 40,
            leaf_spread: 0.05,
            level_gap: 10.0,
            dim: 3,
            seed: 5,
        })
        .unwrap();
        let labels = ds.labels.as_ref().unwrap();
        let k = ds.num_classes().unwrap();
        let mut centroids = vec![vec![0.0; ds.dim()]; k];
        let mut counts = vec![0.0; k];
        for (row, &l) in ds.features.rows().into_iter().zip(labels) {
            centroids[l].iter_mut().zip(row).for_each(|(c, v)| *c += v);
            counts[l] += 1.0;
        }
        for (c, n) in centroids.iter_mut().zip(&counts) {
            c.iter_mut().for_each(|v| *v /= n);
        }
        for (row, &l) in ds.features.rows().into_iter().zip(labels) {
            let nearest = (0..k)
                .min_by(|&a, &b| {
                    let da: f64 = centroids[a].iter().zip(row).map(|(c, v)| (c - v).powi(2)).sum();
                    let db: f64 = centroids[b].iter().zip(row).map(|(c, v)| (c - v).powi(2)).sum();
                    da.total_cmp(&db)
                })
                .unwrap();
            assert_eq!(nearest, l);
        }
    }
}
