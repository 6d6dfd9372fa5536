//! On-disk geometry cache. Purely an accelerator: a missing or unreadable
//! file is rebuilt, never trusted.
//!
//! Layout, all integers little-endian:
//!   magic "OVLG", version u32, n u32, modulus u64, generator u32,
//!   points u32, lines u32, line_size u32,
//!   point coords (points x 4 u32), line point lists (lines x line_size u32),
//!   plane normals (points x 4 u32).

use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::error::{Error, Result};
use crate::gfield::{FieldCtx, FieldElem};
use crate::linalg::Vec4;
use crate::projspace::{Geometry, DESK_GUARD};

pub const MAGIC: &[u8; 4] = b"OVLG";
pub const CACHE_VERSION: u32 = 1;

pub fn encode(g: &Geometry) -> Vec<u8> {
    let f = g.field();
    let mut out = Vec::new();
    out.extend_from_slice(MAGIC);
    for v in [CACHE_VERSION, g.n()] {
        out.extend_from_slice(&v.to_le_bytes());
    }
    out.extend_from_slice(&f.modulus().to_le_bytes());
    for v in [f.generator().0, g.num_points() as u32, g.num_lines() as u32, g.line_size() as u32] {
        out.extend_from_slice(&v.to_le_bytes());
    }
    let mut put = |xs: &mut dyn Iterator<Item = u32>| {
        for x in xs {
            out.extend_from_slice(&x.to_le_bytes());
        }
    };
    put(&mut g.points().iter().flatten().map(|e| e.0));
    put(&mut (0..g.num_lines()).flat_map(|l| g.line_points(l).iter().copied()));
    put(&mut (0..g.num_planes()).flat_map(|h| g.plane_normal(h).iter().map(|e| e.0)));
    out
}

struct Reader<'a> {
    buf: &'a [u8],
}

impl Reader<'_> {
    fn take(&mut self, k: usize) -> Result<&[u8]> {
        if self.buf.len() < k {
            return Err(Error::Cache("truncated file".into()));
        }
        let (head, tail) = self.buf.split_at(k);
        self.buf = tail;
        Ok(head)
    }

    fn u32(&mut self) -> Result<u32> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().unwrap()))
    }

    fn u64(&mut self) -> Result<u64> {
        Ok(u64::from_le_bytes(self.take(8)?.try_into().unwrap()))
    }

    fn vecs(&mut self, count: usize, f: &FieldCtx) -> Result<Vec<Vec4>> {
        (0..count)
            .map(|_| {
                let mut v = [FieldElem::ZERO; 4];
                for x in v.iter_mut() {
                    let raw = self.u32()?;
                    if raw as u64 >= f.order() {
                        return Err(Error::Cache("coordinate outside the field".into()));
                    }
                    *x = FieldElem(raw);
                }
                Ok(v)
            })
            .collect()
    }
}

pub fn decode(bytes: &[u8]) -> Result<Geometry> {
    let mut r = Reader { buf: bytes };
    if r.take(4)? != MAGIC {
        return Err(Error::Cache("bad magic".into()));
    }
    let version = r.u32()?;
    if version != CACHE_VERSION {
        return Err(Error::Cache(format!("format version {version}, expected {CACHE_VERSION}")));
    }
    let n = r.u32()?;
    let modulus = r.u64()?;
    let field = FieldCtx::with_modulus(n, modulus)?;
    if r.u32()? != field.generator().0 {
        return Err(Error::Cache("generator does not match".into()));
    }
    let (np, nl, ls) = (r.u32()? as usize, r.u32()? as usize, r.u32()? as usize);
    let q = field.order() as usize;
    if np != (q * q + 1) * (q + 1) || nl != (q * q + 1) * (q * q + q + 1) || ls != q + 1 {
        return Err(Error::Cache("table sizes do not match q".into()));
    }
    let points = r.vecs(np, &field)?;
    let line_pts = (0..nl * ls).map(|_| r.u32()).collect::<Result<Vec<u32>>>()?;
    let normals = r.vecs(np, &field)?;
    if !r.buf.is_empty() {
        return Err(Error::Cache("trailing bytes".into()));
    }
    let g = Geometry::from_parts(field, points, line_pts)?;
    if (0..np).any(|h| g.plane_normal(h) != &normals[h]) {
        return Err(Error::Cache("plane normals do not match".into()));
    }
    Ok(g)
}

/// File name keyed by (format version, n, modulus).
pub fn cache_path(dir: &Path, n: u32, modulus: u64) -> PathBuf {
    dir.join(format!("pg3-v{CACHE_VERSION}-n{n}-m{modulus:x}.bin"))
}

pub fn save(g: &Geometry, dir: &Path) -> Result<PathBuf> {
    let path = cache_path(dir, g.n(), g.field().modulus());
    fs::create_dir_all(dir).map_err(|e| Error::Cache(format!("{}: {e}", dir.display())))?;
    fs::write(&path, encode(g)).map_err(|e| Error::Cache(format!("{}: {e}", path.display())))?;
    Ok(path)
}

pub fn load(path: &Path) -> Result<Geometry> {
    let bytes = fs::read(path).map_err(|e| Error::Cache(format!("{}: {e}", path.display())))?;
    decode(&bytes)
}

/// Load from `dir` when a valid file exists, else build and (if `dir` is
/// given) write one. Write failures are errors; read failures rebuild.
pub fn load_or_build(dir: Option<&Path>, n: u32, force: bool) -> Result<Geometry> {
    if n > DESK_GUARD && !force {
        return Err(Error::SizeGuard { n, guard: DESK_GUARD });
    }
    let Some(dir) = dir else {
        return Geometry::build(n, force);
    };
    let modulus = FieldCtx::new(n)?.modulus();
    let path = cache_path(dir, n, modulus);
    if path.exists() {
        match load(&path) {
            Ok(g) => return Ok(g),
            Err(e) => eprintln!("cache: ignoring {}: {e}", path.display()),
        }
    }
    let g = Geometry::build(n, force)?;
    save(&g, dir)?;
    Ok(g)
}

#[derive(Serialize)]
pub struct GeometryJson {
    pub version: u32,
    pub n: u32,
    pub q: usize,
    pub modulus: u64,
    pub generator: u32,
    pub points: Vec<[u32; 4]>,
    pub lines: Vec<Vec<u32>>,
    pub plane_normals: Vec<[u32; 4]>,
}

/// Human-readable mirror of the binary layout.
pub fn to_json(g: &Geometry) -> GeometryJson {
    let raw = |v: &Vec4| v.map(|e| e.0);
    GeometryJson {
        version: CACHE_VERSION,
        n: g.n(),
        q: g.q(),
        modulus: g.field().modulus(),
        generator: g.field().generator().0,
        points: g.points().iter().map(raw).collect(),
        lines: (0..g.num_lines()).map(|l| g.line_points(l).to_vec()).collect(),
        plane_normals: (0..g.num_planes()).map(|h| raw(g.plane_normal(h))).collect(),
    }
}
