use std::io::{Read, Write};
use std::path::PathBuf;
use std::process::{Command, Stdio};
use std::thread;

use super::DenoiserPlugin;
use crate::error::{Error, Result};
use crate::image::{decode_pgm, encode_pgm, Image};

/// Environment variable carrying the noise-level hint to the child process.
pub const NOISE_LEVEL_ENV: &str = "RED_DENOISER_NOISE_LEVEL";

/// Runs an external program per call: one PGM on stdin, one PGM on stdout.
///
/// The input is quantized to 8 bits on the way out, so the adapter is only
/// as accurate as the PGM round trip.
#[derive(Debug, Clone)]
pub struct ExternalProcess {
    program: PathBuf,
    args: Vec<String>,
    label: String,
}

impl ExternalProcess {
    pub fn new(program: impl Into<PathBuf>, args: Vec<String>) -> Self {
        let program = program.into();
        let label = format!("external:{}", program.display());
        ExternalProcess { program, args, label }
    }

    fn fail(&self, reason: impl Into<String>) -> Error {
        Error::Denoiser { name: self.label.clone(), reason: reason.into() }
    }
}

impl DenoiserPlugin for ExternalProcess {
    fn name(&self) -> &str {
        &self.label
    }

    fn apply(&self, x: &Image, noise_level_hint: Option<f64>) -> Result<Image> {
        let mut cmd = Command::new(&self.program);
        cmd.args(&self.args).stdin(Stdio::piped()).stdout(Stdio::piped()).stderr(Stdio::piped());
        if let Some(level) = noise_level_hint {
            cmd.env(NOISE_LEVEL_ENV, level.to_string());
        }
        let mut child = cmd.spawn().map_err(|e| self.fail(format!("spawn: {e}")))?;

        let payload = encode_pgm(x);
        let mut stdin = child.stdin.take().expect("piped stdin");
        // write from a separate thread so a child that streams output early
        // cannot deadlock against a full stdout pipe
        let writer = thread::spawn(move || stdin.write_all(&payload));

        let mut stdout = Vec::new();
        child
            .stdout
            .take()
            .expect("piped stdout")
            .read_to_end(&mut stdout)
            .map_err(|e| self.fail(format!("read stdout: {e}")))?;
        let mut stderr = String::new();
        if let Some(mut err) = child.stderr.take() {
            let _ = err.read_to_string(&mut stderr);
        }
        let status = child.wait().map_err(|e| self.fail(format!("wait: {e}")))?;
        let write_result = writer.join().map_err(|_| self.fail("stdin writer panicked"))?;

        if !status.success() {
            return Err(self.fail(format!("exited with {status}: {}", stderr.trim())));
        }
        write_result.map_err(|e| self.fail(format!("write stdin: {e}")))?;
        decode_pgm(&stdout).map_err(|e| self.fail(format!("bad output: {e}")))
    }
}
