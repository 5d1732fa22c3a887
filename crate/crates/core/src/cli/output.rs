use std::fmt::Write as _;
use std::fs;
use std::io;
use std::path::{Path, PathBuf};

/// Ordered `key = value` lines. Numbers carry 12 significant digits and the
/// whole file parses as TOML.
#[derive(Debug, Default, Clone)]
pub struct Summary {
    lines: Vec<(String, String)>,
}

fn format_number(x: f64) -> String {
    if x.is_nan() {
        "nan".into()
    } else if x.is_infinite() {
        if x > 0.0 {
            "inf".into()
        } else {
            "-inf".into()
        }
    } else {
        format!("{x:.11e}")
    }
}

impl Summary {
    pub fn num(&mut self, key: &str, x: f64) -> &mut Self {
        self.lines.push((key.into(), format_number(x)));
        self
    }

    pub fn int(&mut self, key: &str, x: i64) -> &mut Self {
        self.lines.push((key.into(), x.to_string()));
        self
    }

    pub fn flag(&mut self, key: &str, b: bool) -> &mut Self {
        self.lines.push((key.into(), b.to_string()));
        self
    }

    pub fn text(&mut self, key: &str, s: &str) -> &mut Self {
        self.lines.push((key.into(), format!("{s:?}")));
        self
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.lines
            .iter()
            .find(|(k, _)| k == key)
            .map(|(_, v)| v.as_str())
    }

    pub fn render(&self) -> String {
        let mut s = String::new();
        for (k, v) in &self.lines {
            let _ = writeln!(s, "{k} = {v}");
        }
        s
    }
}

/// One directory per run; files are created only when first written.
#[derive(Debug, Clone)]
pub struct RunDir {
    root: PathBuf,
    written: Vec<PathBuf>,
}

impl RunDir {
    pub fn new(root: impl Into<PathBuf>) -> Self {
        Self {
            root: root.into(),
            written: Vec::new(),
        }
    }

    pub fn root(&self) -> &Path {
        &self.root
    }

    pub fn write(&mut self, name: &str, contents: &str) -> io::Result<()> {
        fs::create_dir_all(&self.root)?;
        let path = self.root.join(name);
        fs::write(&path, contents)?;
        self.written.push(path);
        Ok(())
    }

    pub fn written(&self) -> &[PathBuf] {
        &self.written
    }
}
