use std::fs;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use asymspec_core::Error;

use crate::error::CliError;

/// Output directory whose files are written atomically (temp file, then rename).
pub struct OutDir {
    root: PathBuf,
}

impl OutDir {
    pub fn create(root: &Path) -> Result<Self, CliError> {
        fs::create_dir_all(root).map_err(|source| Error::Io { path: root.to_path_buf(), source })?;
        Ok(Self { root: root.to_path_buf() })
    }

    pub fn write<F>(&self, name: &str, body: F) -> Result<(), CliError>
    where
        F: FnOnce(&mut dyn Write) -> asymspec_core::Result<()>,
    {
        let target = self.root.join(name);
        let tmp = self.root.join(format!(".{name}.tmp"));
        let io_err = |path: &Path| {
            let path = path.to_path_buf();
            move |source| Error::Io { path, source }
        };
        let file = fs::File::create(&tmp).map_err(io_err(&tmp))?;
        let mut w = BufWriter::new(file);
        body(&mut w)?;
        w.flush().map_err(io_err(&tmp))?;
        drop(w);
        fs::rename(&tmp, &target).map_err(io_err(&target))?;
        Ok(())
    }

    pub fn json<T: serde::Serialize>(&self, name: &str, value: &T) -> Result<(), CliError> {
        self.write(name, |w| asymspec_core::export::write_json(value, w))
    }
}
