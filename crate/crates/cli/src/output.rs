use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::Serialize;
use serde_json::Value;

use crate::CliError;

pub fn write_file(path: &Path, bytes: &[u8]) -> Result<(), CliError> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
    }
    fs::write(path, bytes).map_err(|e| CliError::io(path, e))
}

/// Serializes `value` and adds a top-level `config` entry when it is an object.
pub fn write_json(path: &Path, value: &impl Serialize, config: &Value) -> Result<(), CliError> {
    let mut json = serde_json::to_value(value).map_err(|e| CliError::Input(e.to_string()))?;
    if let Value::Object(map) = &mut json {
        map.insert("config".into(), config.clone());
    }
    let text = serde_json::to_string_pretty(&json).map_err(|e| CliError::Input(e.to_string()))?;
    write_file(path, text.as_bytes())
}

/// CSV preceded by a `#` comment line carrying the configuration.
pub fn write_csv(
    path: &Path,
    config: &Value,
    body: impl FnOnce(&mut Vec<u8>) -> std::io::Result<()>,
) -> Result<(), CliError> {
    let mut buf = Vec::new();
    writeln!(buf, "# {config}").expect("writing to memory");
    body(&mut buf).expect("writing to memory");
    write_file(path, &buf)
}

pub fn sibling(path: &Path, extension: &str) -> PathBuf {
    path.with_extension(extension)
}

fn file_name(path: &Path) -> String {
    path.file_name()
        .map_or_else(String::new, |n| n.to_string_lossy().into_owned())
}

pub fn embedding_script(data: &Path) -> String {
    format!(
        "# gnuplot script\n\
         set datafile separator ','\n\
         set view equal xyz\n\
         set xyplane 0\n\
         unset key\n\
         set parametric\n\
         set isosamples 24,12\n\
         set urange [0:2*pi]\n\
         set vrange [-pi/2:pi/2]\n\
         splot cos(u)*cos(v),sin(u)*cos(v),sin(v) lc rgb '#cccccc', \\\n\
         \x20     '{}' using 1:2:3 with points pt 7 ps 1.2\n",
        file_name(data)
    )
}

pub fn dispersion_script(data: &Path) -> String {
    format!(
        "# gnuplot script\n\
         set datafile separator ','\n\
         set key autotitle columnhead\n\
         set xlabel 'cutoff'\n\
         set ylabel 'dispersion'\n\
         plot '{0}' using 1:3 with points pt 7 title 'heat state', \\\n\
         \x20    '{0}' using 1:4 with lines title 'a log(L)/L^2'\n",
        file_name(data)
    )
}

pub fn bounds_script(data: &Path) -> String {
    format!(
        "# gnuplot script\n\
         set datafile separator ','\n\
         set key autotitle columnhead\n\
         set xlabel 'geodesic distance of barycenters'\n\
         set ylabel 'distance'\n\
         set key left top\n\
         plot '{0}' using 4:3 with points pt 7 title 'truncated', \\\n\
         \x20    '{0}' using 4:5 with points pt 6 title 'lower bound', \\\n\
         \x20    x with lines dt 2 title 'geodesic'\n",
        file_name(data)
    )
}
