//! Instance files.
//!
//! ```json
//! {"version": 1, "n": 2, "k": 3,
//!  "body": {"type": "table", "values": [...]}}
//! {"version": 1, "n": 2, "k": 3,
//!  "body": {"type": "blocks", "offset": 0.5,
//!           "blocks": [{"type": "unary", "params": {"element": 0, "weights": [1, 2, 3]}, "scale": 1}]}}
//! ```
//!
//! Table values are listed in mixed-radix order with element 0 most
//! significant and radix `k+1`. `offset` may be omitted and defaults to 0.
//! Numbers are written in shortest round-trip form, so write-then-read is
//! value-exact.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kernel::Dims;
use crate::oracle::{Body, OracleSpec, ScaledBlock};

pub const FORMAT_VERSION: u32 = 1;

#[derive(Serialize, Deserialize)]
struct InstanceFile {
    version: u32,
    n: usize,
    k: usize,
    body: BodyWire,
}

#[derive(Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
enum BodyWire {
    Table {
        values: Vec<f64>,
    },
    Blocks {
        #[serde(default)]
        offset: f64,
        blocks: Vec<ScaledBlock>,
    },
}

impl OracleSpec {
    pub fn to_json(&self) -> Result<String> {
        let body = match self.body() {
            Body::Table(values) => BodyWire::Table {
                values: values.clone(),
            },
            Body::Blocks { offset, blocks } => BodyWire::Blocks {
                offset: *offset,
                blocks: blocks.clone(),
            },
        };
        let file = InstanceFile {
            version: FORMAT_VERSION,
            n: self.dims().n(),
            k: self.dims().k(),
            body,
        };
        let mut s = serde_json::to_string_pretty(&file)?;
        s.push('\n');
        Ok(s)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let file: InstanceFile = serde_json::from_str(text)?;
        if file.version != FORMAT_VERSION {
            return Err(Error::InvalidSpec(format!(
                "unsupported instance version {}",
                file.version
            )));
        }
        let dims = Dims::new(file.n, file.k)?;
        let body = match file.body {
            BodyWire::Table { values } => Body::Table(values),
            BodyWire::Blocks { offset, blocks } => Body::Blocks { offset, blocks },
        };
        OracleSpec::new(dims, body)
    }
}

pub fn write_instance(path: impl AsRef<Path>, spec: &OracleSpec) -> Result<()> {
    fs::write(path, spec.to_json()?)?;
    Ok(())
}

pub fn read_instance(path: impl AsRef<Path>) -> Result<OracleSpec> {
    OracleSpec::from_json(&fs::read_to_string(path)?)
}
