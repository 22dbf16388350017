//! Download and conversion of the UCI benchmark datasets.
//!
//! Raw files are cached under `<cache>/raw/<id>/`, checked against an
//! optional SHA-256 digest of their concatenated bytes, and converted to
//! `<cache>/<id>.csv` with a header `f1,…,fm,class`. A later call finds the
//! converted file and does not touch the network.

use std::fs;
use std::io::{Read, Write};
use std::path::{Path, PathBuf};

use anyhow::{anyhow, bail, Context, Result};
use sha2::{Digest, Sha256};

pub const CACHE_ENV: &str = "TREEUQ_CACHE_DIR";

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Delimiter {
    Comma,
    Whitespace,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum LabelAt {
    First,
    Last,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Missing {
    /// Rows containing `?` are dropped.
    DropRow,
    /// `y`/`n`/`?` become 1/-1/0.
    Votes,
}

/// A known dataset and how to turn its raw files into the CSV schema.
#[derive(Debug, Clone, Copy)]
pub struct DatasetInfo {
    pub id: &'static str,
    pub urls: &'static [&'static str],
    pub classes: usize,
    pub features: usize,
    pub train: usize,
    pub test: usize,
    delimiter: Delimiter,
    label: LabelAt,
    /// Raw columns (label excluded, 0-based) left out of the output.
    drop_columns: &'static [usize],
    missing: Missing,
    /// Raw lines to skip at the start of every file.
    skip_lines: usize,
}

macro_rules! uci {
    ($path:literal) => {
        concat!("https://archive.ics.uci.edu/ml/machine-learning-databases/", $path)
    };
}

pub const REGISTRY: &[DatasetInfo] = &[
    DatasetInfo {
        id: "ionosphere",
        urls: &[uci!("ionosphere/ionosphere.data")],
        classes: 2,
        features: 33,
        train: 200,
        test: 151,
        delimiter: Delimiter::Comma,
        label: LabelAt::Last,
        // The second attribute is constant.
        drop_columns: &[1],
        missing: Missing::DropRow,
        skip_lines: 0,
    },
    DatasetInfo {
        id: "wisconsin",
        urls: &[uci!("breast-cancer-wisconsin/breast-cancer-wisconsin.data")],
        classes: 2,
        features: 9,
        train: 455,
        test: 228,
        delimiter: Delimiter::Comma,
        label: LabelAt::Last,
        drop_columns: &[0],
        missing: Missing::DropRow,
        skip_lines: 0,
    },
    DatasetInfo {
        id: "image",
        urls: &[uci!("image/segmentation.data"), uci!("image/segmentation.test")],
        classes: 7,
        features: 19,
        train: 210,
        test: 2100,
        delimiter: Delimiter::Comma,
        label: LabelAt::First,
        drop_columns: &[],
        missing: Missing::DropRow,
        skip_lines: 5,
    },
    DatasetInfo {
        id: "votes",
        urls: &[uci!("voting-records/house-votes-84.data")],
        classes: 2,
        features: 16,
        train: 391,
        test: 44,
        delimiter: Delimiter::Comma,
        label: LabelAt::First,
        drop_columns: &[],
        missing: Missing::Votes,
        skip_lines: 0,
    },
    DatasetInfo {
        id: "sonar",
        urls: &[uci!("undocumented/connectionist-bench/sonar/sonar.all-data")],
        classes: 2,
        features: 60,
        train: 138,
        test: 70,
        delimiter: Delimiter::Comma,
        label: LabelAt::Last,
        drop_columns: &[],
        missing: Missing::DropRow,
        skip_lines: 0,
    },
    DatasetInfo {
        id: "vehicle",
        urls: &[
            uci!("statlog/vehicle/xaa.dat"),
            uci!("statlog/vehicle/xab.dat"),
            uci!("statlog/vehicle/xac.dat"),
            uci!("statlog/vehicle/xad.dat"),
            uci!("statlog/vehicle/xae.dat"),
            uci!("statlog/vehicle/xaf.dat"),
            uci!("statlog/vehicle/xag.dat"),
            uci!("statlog/vehicle/xah.dat"),
            uci!("statlog/vehicle/xai.dat"),
        ],
        classes: 4,
        features: 18,
        train: 564,
        test: 282,
        delimiter: Delimiter::Whitespace,
        label: LabelAt::Last,
        drop_columns: &[],
        missing: Missing::DropRow,
        skip_lines: 0,
    },
    DatasetInfo {
        id: "pima",
        urls: &["https://raw.githubusercontent.com/jbrownlee/Datasets/master/pima-indians-diabetes.data.csv"],
        classes: 2,
        features: 8,
        train: 512,
        test: 256,
        delimiter: Delimiter::Comma,
        label: LabelAt::Last,
        drop_columns: &[],
        missing: Missing::DropRow,
        skip_lines: 0,
    },
];

pub fn known_ids() -> Vec<&'static str> {
    REGISTRY.iter().map(|d| d.id).collect()
}

pub fn lookup(id: &str) -> Result<&'static DatasetInfo> {
    REGISTRY
        .iter()
        .find(|d| d.id == id)
        .ok_or_else(|| anyhow!("unknown dataset {id:?}; known: {}", known_ids().join(", ")))
}

/// `$TREEUQ_CACHE_DIR`, else `./.treeuq-cache`.
pub fn default_cache_dir() -> PathBuf {
    std::env::var_os(CACHE_ENV)
        .map(PathBuf::from)
        .unwrap_or_else(|| PathBuf::from(".treeuq-cache"))
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Fetched {
    pub path: PathBuf,
    pub sha256: String,
    pub rows: usize,
    pub from_cache: bool,
}

#[derive(Debug, Clone, Default)]
pub struct FetchOptions {
    /// Replacement source URLs (`http(s)://` or `file://`), one per raw file.
    pub urls: Vec<String>,
    /// Expected lowercase hex SHA-256 of the concatenated raw files.
    pub sha256: Option<String>,
}

pub fn fetch_dataset(id: &str, cache: &Path, opts: &FetchOptions) -> Result<Fetched> {
    let info = lookup(id)?;
    let out = cache.join(format!("{id}.csv"));
    let digest_file = cache.join(format!("{id}.sha256"));
    if out.exists() {
        let digest = fs::read_to_string(&digest_file).unwrap_or_default().trim().to_string();
        if let Some(want) = &opts.sha256 {
            if !digest.eq_ignore_ascii_case(want) {
                bail!("cached {id} has sha256 {digest}, expected {want}; delete {} to refetch", out.display());
            }
        }
        let rows = count_rows(&out)?;
        return Ok(Fetched {
            path: out,
            sha256: digest,
            rows,
            from_cache: true,
        });
    }

    let urls: Vec<&str> = if opts.urls.is_empty() {
        info.urls.to_vec()
    } else {
        opts.urls.iter().map(String::as_str).collect()
    };
    let raw_dir = cache.join("raw").join(id);
    fs::create_dir_all(&raw_dir).with_context(|| format!("creating {}", raw_dir.display()))?;

    let mut hasher = Sha256::new();
    let mut raw_files = Vec::new();
    for (i, url) in urls.iter().enumerate() {
        let bytes = download(url)?;
        hasher.update(&bytes);
        let dest = raw_dir.join(format!("part{i}"));
        fs::write(&dest, &bytes).with_context(|| format!("writing {}", dest.display()))?;
        raw_files.push(bytes);
    }
    let digest = hex::encode(hasher.finalize());
    if let Some(want) = &opts.sha256 {
        if !digest.eq_ignore_ascii_case(want) {
            let _ = fs::remove_dir_all(&raw_dir);
            bail!("checksum mismatch for {id}: got {digest}, expected {want}");
        }
    }

    let texts: Vec<String> = raw_files
        .into_iter()
        .map(|b| String::from_utf8_lossy(&b).into_owned())
        .collect();
    let table = convert(info, &texts)?;
    let tmp = cache.join(format!(".{id}.csv.partial"));
    if let Err(e) = write_table(&tmp, info.features, &table) {
        let _ = fs::remove_file(&tmp);
        return Err(e);
    }
    fs::rename(&tmp, &out).with_context(|| format!("moving into {}", out.display()))?;
    fs::write(&digest_file, format!("{digest}\n"))?;
    Ok(Fetched {
        path: out,
        sha256: digest,
        rows: table.len(),
        from_cache: false,
    })
}

fn download(url: &str) -> Result<Vec<u8>> {
    if let Some(path) = url.strip_prefix("file://") {
        return fs::read(path).with_context(|| format!("reading {path}"));
    }
    let resp = ureq::get(url).call().with_context(|| format!("downloading {url}"))?;
    let mut buf = Vec::new();
    resp.into_reader()
        .read_to_end(&mut buf)
        .with_context(|| format!("reading {url}"))?;
    Ok(buf)
}

/// Parses raw files into `(label, features)` rows.
fn convert(info: &DatasetInfo, texts: &[String]) -> Result<Vec<(String, Vec<String>)>> {
    let mut rows = Vec::new();
    for text in texts {
        for (line_no, line) in text.lines().enumerate().skip(info.skip_lines) {
            let line = line.trim();
            if line.is_empty() {
                continue;
            }
            let mut fields: Vec<&str> = match info.delimiter {
                Delimiter::Comma => line.split(',').map(str::trim).collect(),
                Delimiter::Whitespace => line.split_whitespace().collect(),
            };
            let label = match info.label {
                LabelAt::First => fields.remove(0),
                LabelAt::Last => fields.pop().unwrap_or_default(),
            }
            .to_string();
            let values: Vec<&str> = fields
                .iter()
                .enumerate()
                .filter(|(i, _)| !info.drop_columns.contains(i))
                .map(|(_, v)| *v)
                .collect();
            if values.len() != info.features {
                bail!(
                    "{}: line {} has {} features, expected {}",
                    info.id,
                    line_no + 1,
                    values.len(),
                    info.features
                );
            }
            let values = match info.missing {
                Missing::DropRow if values.contains(&"?") => continue,
                Missing::DropRow => values.iter().map(|v| v.to_string()).collect(),
                Missing::Votes => values
                    .iter()
                    .map(|v| match *v {
                        "y" => Ok("1".to_string()),
                        "n" => Ok("-1".to_string()),
                        "?" => Ok("0".to_string()),
                        other => Err(anyhow!("{}: unexpected vote {other:?}", info.id)),
                    })
                    .collect::<Result<Vec<_>>>()?,
            };
            rows.push((label, values));
        }
    }
    Ok(rows)
}

fn write_table(path: &Path, features: usize, rows: &[(String, Vec<String>)]) -> Result<()> {
    let file = fs::File::create(path).with_context(|| format!("creating {}", path.display()))?;
    let mut w = csv::Writer::from_writer(std::io::BufWriter::new(file));
    let mut header: Vec<String> = (1..=features).map(|i| format!("f{i}")).collect();
    header.push("class".into());
    w.write_record(&header)?;
    for (label, values) in rows {
        w.write_record(values.iter().map(String::as_str).chain([label.as_str()]))?;
    }
    w.into_inner()
        .map_err(|e| anyhow!("flushing {}: {}", path.display(), e.error()))?
        .flush()?;
    Ok(())
}

fn count_rows(path: &Path) -> Result<usize> {
    let mut r = csv::Reader::from_path(path).with_context(|| format!("reading {}", path.display()))?;
    Ok(r.records().count())
}
