//! On-disk layout of a code pair: four alist files plus `manifest.txt`.

use std::fs;
use std::path::Path;

use super::{CodePair, Construction};
use crate::binmat::{emit_alist, parse_alist, BinMatrix};
use crate::config::KeyValues;
use crate::error::{Error, Result};

const FILES: [&str; 4] = ["h1.alist", "h2.alist", "hc.alist", "ha.alist"];

impl CodePair {
    /// Manifest text: one `key = value` per line.
    pub fn manifest(&self) -> String {
        let mut out = String::new();
        out.push_str(&format!("construction = {}\n", self.construction.tag()));
        out.push_str(&format!("L = {}\n", self.len()));
        out.push_str(&format!("R1 = {}\n", self.r1()));
        out.push_str(&format!("R2 = {}\n", self.r2()));
        out.push_str(&format!("K1 = {}\n", self.k1()));
        out.push_str(&format!("K2 = {}\n", self.k2()));
        out.push_str(&format!("R1_nominal = {}\n", self.encoder1().nominal_rate()));
        out.push_str(&format!("R2_nominal = {}\n", self.encoder2().nominal_rate()));
        match self.seed {
            Some(s) => out.push_str(&format!("seed = {s}\n")),
            None => out.push_str("seed = none\n"),
        }
        out
    }

    pub fn save(&self, dir: impl AsRef<Path>) -> Result<()> {
        let dir = dir.as_ref();
        fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        for (name, m) in FILES.iter().zip([&self.h1, &self.h2, &self.hc, &self.ha]) {
            let path = dir.join(name);
            fs::write(&path, emit_alist(m)).map_err(|e| Error::io(&path, e))?;
        }
        let path = dir.join("manifest.txt");
        fs::write(&path, self.manifest()).map_err(|e| Error::io(&path, e))
    }

    pub fn load(dir: impl AsRef<Path>) -> Result<Self> {
        let dir = dir.as_ref();
        let read = |name: &str| -> Result<BinMatrix> {
            let path = dir.join(name);
            let text = fs::read_to_string(&path).map_err(|e| Error::io(&path, e))?;
            parse_alist(&text)
        };
        let [h1, h2, hc, ha] = [read(FILES[0])?, read(FILES[1])?, read(FILES[2])?, read(FILES[3])?];
        let path = dir.join("manifest.txt");
        let text = fs::read_to_string(&path).map_err(|e| Error::io(&path, e))?;
        let kv = KeyValues::parse(&text)?;
        let construction = kv.required("construction")?;
        let construction = Construction::from_tag(&construction.value)
            .ok_or_else(|| Error::Config { line: construction.line, message: format!("unknown construction {:?}", construction.value) })?;
        let seed = match kv.get("seed") {
            Some(e) if e.value != "none" => Some(e.parse::<u64>()?),
            _ => None,
        };
        CodePair::new(h1, h2, hc, ha, construction, seed)
    }
}
