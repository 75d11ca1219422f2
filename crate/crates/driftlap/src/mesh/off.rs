//! ASCII OFF reader and writer.
//!
//! Layout: a header line `OFF`, a counts line `V F E`, `V` vertex lines of
//! three coordinates, `F` face lines `3 i j k`. Blank lines and `#` comments
//! are skipped. The writer emits 17 significant digits so `f64` coordinates
//! round-trip exactly.

use std::io::{BufRead, Write};
use std::path::Path;

use crate::error::{Error, Result};
use crate::mesh::{MeshGeometry, TriangleMesh};
use crate::num::Real;

pub fn load_off<T: Real, R: BufRead>(reader: R) -> Result<TriangleMesh<T>> {
    let mut lines = reader.lines().enumerate();

    let mut next_content = || -> Result<Option<(usize, String)>> {
        for (i, line) in lines.by_ref() {
            let line = line.map_err(|e| Error::Io {
                path: "<stream>".into(),
                source: e,
            })?;
            let trimmed = line.trim();
            if trimmed.is_empty() || trimmed.starts_with('#') {
                continue;
            }
            return Ok(Some((i + 1, trimmed.to_string())));
        }
        Ok(None)
    };

    let (line_no, header) = next_content()?.ok_or(Error::OffParse {
        line: 1,
        message: "empty stream, expected OFF header".into(),
    })?;
    if header != "OFF" {
        return Err(Error::OffParse {
            line: line_no,
            message: format!("expected OFF header, found {header:?}"),
        });
    }

    let (line_no, counts) = next_content()?.ok_or(Error::OffParse {
        line: line_no + 1,
        message: "missing counts line".into(),
    })?;
    let fields: Vec<&str> = counts.split_whitespace().collect();
    if fields.len() != 3 {
        return Err(Error::OffParse {
            line: line_no,
            message: format!("counts line must be \"V F E\", found {counts:?}"),
        });
    }
    let parse_count = |s: &str| -> Result<usize> {
        s.parse().map_err(|_| Error::OffParse {
            line: line_no,
            message: format!("invalid count {s:?}"),
        })
    };
    let n_vertices = parse_count(fields[0])?;
    let n_faces = parse_count(fields[1])?;
    let _ = parse_count(fields[2])?;

    let mut last_line = line_no;
    let mut positions: Vec<[T; 3]> = Vec::with_capacity(n_vertices);
    for _ in 0..n_vertices {
        let (line_no, content) = next_content()?.ok_or(Error::OffParse {
            line: last_line + 1,
            message: format!(
                "stream truncated: expected {n_vertices} vertex lines, got {}",
                positions.len()
            ),
        })?;
        last_line = line_no;
        let fields: Vec<&str> = content.split_whitespace().collect();
        if fields.len() != 3 {
            return Err(Error::OffParse {
                line: line_no,
                message: format!("vertex line must have 3 coordinates, found {}", fields.len()),
            });
        }
        let mut coords = [T::zero(); 3];
        for (k, f) in fields.iter().enumerate() {
            coords[k] = f.parse().map_err(|_| Error::OffParse {
                line: line_no,
                message: format!("invalid coordinate {f:?}"),
            })?;
        }
        positions.push(coords);
    }

    let mut triangles: Vec<[usize; 3]> = Vec::with_capacity(n_faces);
    for _ in 0..n_faces {
        let (line_no, content) = next_content()?.ok_or(Error::OffParse {
            line: last_line + 1,
            message: format!(
                "stream truncated: expected {n_faces} face lines, got {}",
                triangles.len()
            ),
        })?;
        last_line = line_no;
        let fields: Vec<&str> = content.split_whitespace().collect();
        let arity: usize = fields
            .first()
            .and_then(|f| f.parse().ok())
            .ok_or(Error::OffParse {
                line: line_no,
                message: format!("face line must start with a vertex count, found {content:?}"),
            })?;
        if arity != 3 {
            return Err(Error::OffParse {
                line: line_no,
                message: format!("non-triangle face at line {line_no} (got {arity} vertices)"),
            });
        }
        if fields.len() != 4 {
            return Err(Error::OffParse {
                line: line_no,
                message: format!("triangle face needs 3 indices, found {}", fields.len() - 1),
            });
        }
        let mut tri = [0usize; 3];
        for (k, f) in fields[1..].iter().enumerate() {
            let idx: usize = f.parse().map_err(|_| Error::OffParse {
                line: line_no,
                message: format!("invalid vertex index {f:?}"),
            })?;
            if idx >= n_vertices {
                return Err(Error::OffParse {
                    line: line_no,
                    message: format!("vertex index {idx} out of range (have {n_vertices})"),
                });
            }
            tri[k] = idx;
        }
        triangles.push(tri);
    }

    TriangleMesh::new(MeshGeometry::Embedded3D { positions }, triangles)
}

pub fn save_off<T: Real, W: Write>(mesh: &TriangleMesh<T>, mut writer: W) -> Result<()> {
    let positions = match mesh.geometry() {
        MeshGeometry::Embedded3D { positions } => positions,
        MeshGeometry::Periodic2D { .. } => {
            return Err(Error::GeometryMismatch(
                "OFF stores embedded 3D meshes; periodic parameter meshes have no embedding"
                    .into(),
            ))
        }
    };
    let io_err = |e: std::io::Error| Error::Io {
        path: "<stream>".into(),
        source: e,
    };
    writeln!(writer, "OFF").map_err(io_err)?;
    writeln!(writer, "{} {} 0", positions.len(), mesh.triangle_count()).map_err(io_err)?;
    for p in positions {
        writeln!(writer, "{:.16e} {:.16e} {:.16e}", p[0], p[1], p[2]).map_err(io_err)?;
    }
    for t in mesh.triangles() {
        writeln!(writer, "3 {} {} {}", t[0], t[1], t[2]).map_err(io_err)?;
    }
    Ok(())
}

pub fn load_off_path<T: Real, P: AsRef<Path>>(path: P) -> Result<TriangleMesh<T>> {
    let path = path.as_ref();
    let file = std::fs::File::open(path).map_err(|e| Error::Io {
        path: path.display().to_string(),
        source: e,
    })?;
    load_off(std::io::BufReader::new(file))
}

pub fn save_off_path<T: Real, P: AsRef<Path>>(mesh: &TriangleMesh<T>, path: P) -> Result<()> {
    let path = path.as_ref();
    let file = std::fs::File::create(path).map_err(|e| Error::Io {
        path: path.display().to_string(),
        source: e,
    })?;
    save_off(mesh, std::io::BufWriter::new(file))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::generate_icosphere;

    const TETRA: &str = "OFF\n4 4 6\n1 1 1\n1 -1 -1\n-1 1 -1\n-1 -1 1\n3 0 2 1\n3 0 1 3\n3 0 3 2\n3 1 2 3\n";

    #[test]
    fn loads_tetrahedron() {
        let mesh = load_off::<f64, _>(TETRA.as_bytes()).unwrap();
        assert_eq!(mesh.vertex_count(), 4);
        assert_eq!(mesh.triangle_count(), 4);
        assert!(mesh.validate().is_closed);
    }

    #[test]
    fn quad_face_names_the_line() {
        let text = "OFF\n4 1 0\n0 0 0\n1 0 0\n1 1 0\n0 1 0\n4 0 1 2 3\n";
        match load_off::<f64, _>(text.as_bytes()) {
            Err(Error::OffParse { line, message }) => {
                assert_eq!(line, 7);
                assert!(message.contains("non-triangle face"), "{message}");
            }
            other => panic!("expected parse error, got {other:?}"),
        }
    }

    #[test]
    fn missing_header_is_an_error() {
        let text = "NOFF\n4 4 0\n";
        assert!(matches!(
            load_off::<f64, _>(text.as_bytes()),
            Err(Error::OffParse { line: 1, .. })
        ));
    }

    #[test]
    fn out_of_range_index_is_an_error() {
        let text = "OFF\n3 1 0\n0 0 0\n1 0 0\n0 1 0\n3 0 1 9\n";
        match load_off::<f64, _>(text.as_bytes()) {
            Err(Error::OffParse { line: 6, message }) => {
                assert!(message.contains("out of range"), "{message}");
            }
            other => panic!("expected parse error, got {other:?}"),
        }
    }

    #[test]
    fn truncated_stream_is_an_error() {
        let text = "OFF\n4 4 0\n0 0 0\n1 0 0\n";
        assert!(matches!(
            load_off::<f64, _>(text.as_bytes()),
            Err(Error::OffParse { .. })
        ));
    }

    #[test]
    fn comments_and_blanks_are_skipped() {
        let text = "# a comment\nOFF\n\n4 4 6\n1 1 1\n1 -1 -1\n-1 1 -1\n-1 -1 1\n# faces\n3 0 2 1\n3 0 1 3\n3 0 3 2\n3 1 2 3\n";
        let mesh = load_off::<f64, _>(text.as_bytes()).unwrap();
        assert_eq!(mesh.vertex_count(), 4);
    }

    #[test]
    fn writer_round_trips_exactly() {
        let mesh = generate_icosphere::<f64>(2, 1.0).unwrap();
        let mut buf = Vec::new();
        save_off(&mesh, &mut buf).unwrap();
        let reloaded = load_off::<f64, _>(buf.as_slice()).unwrap();
        assert_eq!(mesh.triangles(), reloaded.triangles());
        for i in 0..mesh.vertex_count() {
            let a = mesh.position(i).unwrap();
            let b = reloaded.position(i).unwrap();
            assert_eq!(a, b, "vertex {i} must round-trip bit-exactly");
        }
    }

    #[test]
    fn periodic_mesh_refuses_off_export() {
        let torus = crate::mesh::generate_flat_torus::<f64>(4, 4, 1.0, 1.0).unwrap();
        let mut buf = Vec::new();
        assert!(matches!(
            save_off(&torus, &mut buf),
            Err(Error::GeometryMismatch(_))
        ));
    }
}
