//! Reader and writer for the benchmark graph-classification text format.
//!
//! A dataset `DS` lives in three files under one directory:
//!
//! * `DS_A.txt`: one edge per line, `u, v`, 1-based global vertex ids
//! * `DS_graph_indicator.txt`: line `i` holds the 1-based graph id of vertex `i`
//! * `DS_graph_labels.txt`: line `g` holds the class label of graph `g`
//!
//! Any other files (vertex labels, attributes) are ignored.

use std::collections::{BTreeSet, HashSet};
use std::fmt;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use crate::error::{Error, Result};
use crate::graph::{Dataset, Graph};

/// Something in the source files that was repaired rather than rejected.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum IngestWarning {
    SelfLoopDropped { line: usize, vertex: usize },
    DuplicateEdgeDropped { line: usize, u: usize, v: usize },
}

impl fmt::Display for IngestWarning {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            IngestWarning::SelfLoopDropped { line, vertex } => {
                write!(f, "line {line}: self-loop on vertex {vertex} dropped")
            }
            IngestWarning::DuplicateEdgeDropped { line, u, v } => {
                write!(f, "line {line}: duplicate edge ({u}, {v}) dropped")
            }
        }
    }
}

pub fn dataset_file(dir: &Path, name: &str, suffix: &str) -> PathBuf {
    dir.join(format!("{name}_{suffix}.txt"))
}

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| Error::io(path, e))
}

/// Yields `(1-based line number, trimmed content)` for non-blank lines.
fn content_lines(text: &str) -> impl Iterator<Item = (usize, &str)> {
    text.lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty())
}

fn parse_int<T: std::str::FromStr>(file: &Path, line: usize, field: &str) -> Result<T> {
    field.trim().parse().map_err(|_| Error::Parse {
        file: file.to_path_buf(),
        line,
        message: format!("expected an integer, found {:?}", field.trim()),
    })
}

fn parse_error(file: &Path, line: usize, message: impl Into<String>) -> Error {
    Error::Parse {
        file: file.to_path_buf(),
        line,
        message: message.into(),
    }
}

/// Loads `dir/<name>_*.txt`. Repairs are logged at warn level.
pub fn load_dataset(dir: impl AsRef<Path>, name: &str) -> Result<Dataset> {
    let (dataset, warnings) = load_dataset_with_warnings(dir, name)?;
    for w in &warnings {
        log::warn!("{name}: {w}");
    }
    Ok(dataset)
}

/// Like [`load_dataset`] but hands back the repairs instead of logging them.
pub fn load_dataset_with_warnings(
    dir: impl AsRef<Path>,
    name: &str,
) -> Result<(Dataset, Vec<IngestWarning>)> {
    let dir = dir.as_ref();
    let a_path = dataset_file(dir, name, "A");
    let ind_path = dataset_file(dir, name, "graph_indicator");
    let lab_path = dataset_file(dir, name, "graph_labels");
    let a_text = read(&a_path)?;
    let ind_text = read(&ind_path)?;
    let lab_text = read(&lab_path)?;

    let labels = content_lines(&lab_text)
        .map(|(line, l)| parse_int::<i64>(&lab_path, line, l))
        .collect::<Result<Vec<_>>>()?;
    let graph_count = labels.len();

    // global vertex -> (graph index, local index)
    let mut owner = Vec::new();
    let mut sizes = vec![0usize; graph_count];
    for (line, l) in content_lines(&ind_text) {
        let gid: usize = parse_int(&ind_path, line, l)?;
        if gid == 0 || gid > graph_count {
            return Err(parse_error(
                &ind_path,
                line,
                format!("graph id {gid} outside 1..={graph_count} declared by the labels file"),
            ));
        }
        owner.push((gid - 1, sizes[gid - 1]));
        sizes[gid - 1] += 1;
    }
    if let Some(empty) = sizes.iter().position(|&s| s == 0) {
        return Err(Error::InvalidGraph(format!(
            "graph {} declared in {} has no vertices",
            empty + 1,
            lab_path.display()
        )));
    }

    let vertex_total = owner.len();
    let mut warnings = Vec::new();
    let mut edges: Vec<BTreeSet<(usize, usize)>> = vec![BTreeSet::new(); graph_count];
    let mut seen_rows = HashSet::new();
    for (line, l) in content_lines(&a_text) {
        let mut parts = l.split(',');
        let (Some(a), Some(b), None) = (parts.next(), parts.next(), parts.next()) else {
            return Err(parse_error(&a_path, line, format!("expected \"u, v\", found {l:?}")));
        };
        let u: usize = parse_int(&a_path, line, a)?;
        let v: usize = parse_int(&a_path, line, b)?;
        for x in [u, v] {
            if x == 0 || x > vertex_total {
                return Err(parse_error(
                    &a_path,
                    line,
                    format!("vertex {x} outside 1..={vertex_total}"),
                ));
            }
        }
        let (gu, lu) = owner[u - 1];
        let (gv, lv) = owner[v - 1];
        if gu != gv {
            return Err(parse_error(
                &a_path,
                line,
                format!("edge ({u}, {v}) joins graphs {} and {}", gu + 1, gv + 1),
            ));
        }
        if u == v {
            warnings.push(IngestWarning::SelfLoopDropped { line, vertex: u });
            continue;
        }
        if !seen_rows.insert((u, v)) {
            warnings.push(IngestWarning::DuplicateEdgeDropped { line, u, v });
            continue;
        }
        edges[gu].insert((lu.min(lv), lu.max(lv)));
    }

    let graphs = edges
        .into_iter()
        .zip(sizes)
        .zip(labels)
        .enumerate()
        .map(|(i, ((e, n), label))| Graph::from_canonical(n, e.into_iter().collect(), label, i))
        .collect();
    Ok((Dataset::new(name, graphs), warnings))
}

/// Writes a dataset in the canonical format, each undirected edge as both
/// `(u, v)` and `(v, u)` rows in ascending order.
pub fn save_dataset(d: &Dataset, dir: impl AsRef<Path>) -> Result<()> {
    let dir = dir.as_ref();
    let write = |suffix: &str, body: &dyn Fn(&mut Vec<u8>) -> std::io::Result<()>| -> Result<()> {
        let path = dataset_file(dir, d.name(), suffix);
        let mut buf = Vec::new();
        body(&mut buf).map_err(|e| Error::io(&path, e))?;
        fs::write(&path, buf).map_err(|e| Error::io(&path, e))
    };

    write("A", &|out| {
        let mut offset = 0;
        for g in d.graphs() {
            let mut rows: Vec<(usize, usize)> = g
                .edges()
                .iter()
                .flat_map(|&(u, v)| [(u, v), (v, u)])
                .collect();
            rows.sort_unstable();
            for (u, v) in rows {
                writeln!(out, "{}, {}", u + offset + 1, v + offset + 1)?;
            }
            offset += g.vertex_count();
        }
        Ok(())
    })?;
    write("graph_indicator", &|out| {
        for (i, g) in d.graphs().iter().enumerate() {
            for _ in 0..g.vertex_count() {
                writeln!(out, "{}", i + 1)?;
            }
        }
        Ok(())
    })?;
    write("graph_labels", &|out| {
        for g in d.graphs() {
            writeln!(out, "{}", g.label())?;
        }
        Ok(())
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn write_files(dir: &Path, name: &str, a: &str, ind: &str, lab: &str) {
        fs::write(dataset_file(dir, name, "A"), a).unwrap();
        fs::write(dataset_file(dir, name, "graph_indicator"), ind).unwrap();
        fs::write(dataset_file(dir, name, "graph_labels"), lab).unwrap();
    }

    #[test]
    fn two_triangles() {
        let dir = tempfile::tempdir().unwrap();
        write_files(
            dir.path(),
            "T",
            "1, 2\n2, 1\n2,3\n3 , 2\r\n1, 3\n3, 1\n4, 5\n5, 6\n6, 4\n",
            "1\n1\n1\n2\n2\n2\n",
            "1\n2\n",
        );
        let (d, warnings) = load_dataset_with_warnings(dir.path(), "T").unwrap();
        assert!(warnings.is_empty());
        assert_eq!(d.len(), 2);
        assert_eq!(d.class_count(), 2);
        for g in d.graphs() {
            assert_eq!((g.vertex_count(), g.edge_count()), (3, 3));
        }
        assert_eq!(d.labels(), vec![1, 2]);
    }

    #[test]
    fn empty_edge_file_single_vertex() {
        let dir = tempfile::tempdir().unwrap();
        write_files(dir.path(), "S", "", "1\n", "0\n");
        let d = load_dataset(dir.path(), "S").unwrap();
        assert_eq!(d.len(), 1);
        assert_eq!(d.graphs()[0].vertex_count(), 1);
        assert_eq!(d.graphs()[0].edge_count(), 0);
    }

    #[test]
    fn repairs_are_reported() {
        let dir = tempfile::tempdir().unwrap();
        write_files(dir.path(), "R", "1, 1\n1, 2\n1, 2\n", "1\n1\n", "0\n");
        let (d, warnings) = load_dataset_with_warnings(dir.path(), "R").unwrap();
        assert_eq!(d.graphs()[0].edge_count(), 1);
        assert_eq!(
            warnings,
            vec![
                IngestWarning::SelfLoopDropped { line: 1, vertex: 1 },
                IngestWarning::DuplicateEdgeDropped { line: 3, u: 1, v: 2 },
            ]
        );
    }

    #[test]
    fn missing_file_is_named() {
        let dir = tempfile::tempdir().unwrap();
        fs::write(dataset_file(dir.path(), "M", "A"), "").unwrap();
        let err = load_dataset(dir.path(), "M").unwrap_err();
        assert!(matches!(err, Error::Io { .. }));
        assert!(err.to_string().contains("M_graph_indicator.txt"), "{err}");
    }

    #[test]
    fn out_of_range_vertex_reports_line() {
        let dir = tempfile::tempdir().unwrap();
        write_files(dir.path(), "O", "1, 2\n2, 7\n", "1\n1\n", "0\n");
        match load_dataset(dir.path(), "O").unwrap_err() {
            Error::Parse { line, file, .. } => {
                assert_eq!(line, 2);
                assert!(file.ends_with("O_A.txt"));
            }
            e => panic!("unexpected {e}"),
        }
    }

    #[test]
    fn cross_graph_edge_rejected() {
        let dir = tempfile::tempdir().unwrap();
        write_files(dir.path(), "X", "1, 2\n", "1\n2\n", "0\n1\n");
        let err = load_dataset(dir.path(), "X").unwrap_err();
        assert!(matches!(err, Error::Parse { line: 1, .. }), "{err}");
    }

    #[test]
    fn bad_indicator_rejected() {
        let dir = tempfile::tempdir().unwrap();
        write_files(dir.path(), "B", "", "1\n3\n", "0\n1\n");
        assert!(matches!(
            load_dataset(dir.path(), "B").unwrap_err(),
            Error::Parse { line: 2, .. }
        ));
        write_files(dir.path(), "E", "", "1\n1\n", "0\n1\n");
        assert!(matches!(
            load_dataset(dir.path(), "E").unwrap_err(),
            Error::InvalidGraph(_)
        ));
    }
}
