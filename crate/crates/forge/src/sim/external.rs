//! Adapter that drives an external compile/run toolchain (iverilog + vvp by
//! default) through command templates. `{out}` expands to the artifact path
//! and `{files}` to the source file list.

use std::io::Read;
use std::path::{Path, PathBuf};
use std::process::{Command, Stdio};
use std::time::{Duration, Instant};

#[derive(Debug, Clone)]
pub struct ExternalToolchain {
    pub compile_cmd: String,
    pub run_cmd: String,
}

impl ExternalToolchain {
    /// The executable named by the compile template, for probing.
    pub fn compile_exe(&self) -> Option<&str> {
        self.compile_cmd.split_whitespace().next()
    }

    pub fn compile(
        &self,
        files: &[PathBuf],
        out: &Path,
    ) -> std::io::Result<(bool, String)> {
        let argv = expand(&self.compile_cmd, files, out);
        let (prog, rest) = argv.split_first().ok_or_else(|| {
            std::io::Error::new(std::io::ErrorKind::InvalidInput, "empty compile command")
        })?;
        let output = Command::new(prog).args(rest).output()?;
        let mut diag = String::from_utf8_lossy(&output.stderr).to_string();
        if !output.status.success() && diag.is_empty() {
            diag = String::from_utf8_lossy(&output.stdout).to_string();
        }
        if !output.status.success() && diag.is_empty() {
            diag = format!("compile exited with {}", output.status);
        }
        Ok((output.status.success(), diag))
    }

    /// Run the simulation artifact, killing the process at the timeout.
    /// Returns captured stdout and whether the timeout fired.
    pub fn run(&self, out: &Path, timeout: Duration) -> std::io::Result<(String, bool)> {
        let argv = expand(&self.run_cmd, &[], out);
        let (prog, rest) = argv.split_first().ok_or_else(|| {
            std::io::Error::new(std::io::ErrorKind::InvalidInput, "empty run command")
        })?;
        let mut child = Command::new(prog)
            .args(rest)
            .stdout(Stdio::piped())
            .stderr(Stdio::null())
            .stdin(Stdio::null())
            .spawn()?;
        let mut stdout_pipe = child.stdout.take().expect("stdout piped");
        let reader = std::thread::spawn(move || {
            let mut buf = Vec::new();
            let _ = stdout_pipe.read_to_end(&mut buf);
            buf
        });
        let deadline = Instant::now() + timeout;
        let mut timed_out = false;
        loop {
            match child.try_wait()? {
                Some(_) => break,
                None => {
                    if Instant::now() >= deadline {
                        timed_out = true;
                        let _ = child.kill();
                        let _ = child.wait();
                        break;
                    }
                    std::thread::sleep(Duration::from_millis(5));
                }
            }
        }
        let buf = reader.join().unwrap_or_default();
        Ok((String::from_utf8_lossy(&buf).to_string(), timed_out))
    }
}

fn expand(template: &str, files: &[PathBuf], out: &Path) -> Vec<String> {
    let mut argv = Vec::new();
    for word in template.split_whitespace() {
        match word {
            "{files}" => argv.extend(files.iter().map(|f| f.display().to_string())),
            "{out}" => argv.push(out.display().to_string()),
            w => argv.push(w.replace("{out}", &out.display().to_string())),
        }
    }
    argv
}

/// Is `exe` runnable from PATH (or as a direct path)?
pub fn find_in_path(exe: &str) -> bool {
    if exe.contains('/') {
        return Path::new(exe).exists();
    }
    std::env::var_os("PATH")
        .map(|paths| {
            std::env::split_paths(&paths).any(|dir| {
                let p = dir.join(exe);
                p.is_file()
            })
        })
        .unwrap_or(false)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn expand_substitutes_placeholders() {
        let argv = expand(
            "iverilog -g2012 -o {out} {files}",
            &[PathBuf::from("a.v"), PathBuf::from("b.v")],
            Path::new("/tmp/sim.out"),
        );
        assert_eq!(argv, vec!["iverilog", "-g2012", "-o", "/tmp/sim.out", "a.v", "b.v"]);
    }

    #[test]
    fn probe_finds_sh() {
        assert!(find_in_path("sh"));
        assert!(!find_in_path("definitely-not-a-real-binary-xyz"));
    }

    #[test]
    fn external_runs_fake_toolchain() {
        // A shell stands in for the toolchain: "compile" copies sources to
        // the artifact, "run" prints it.
        let dir = tempfile::tempdir().unwrap();
        let src = dir.path().join("d.v");
        std::fs::write(&src, "Test Case 1 Passed\n").unwrap();
        let tc = ExternalToolchain {
            compile_cmd: "cp {files} {out}".to_string(),
            run_cmd: "cat {out}".to_string(),
        };
        let out = dir.path().join("sim.out");
        let (ok, _) = tc.compile(&[src], &out).unwrap();
        assert!(ok);
        let (stdout, timed_out) = tc.run(&out, Duration::from_secs(5)).unwrap();
        assert!(!timed_out);
        assert!(stdout.contains("Test Case 1 Passed"));
    }

    #[test]
    fn external_run_times_out() {
        let tc = ExternalToolchain {
            compile_cmd: String::new(),
            run_cmd: "sleep 30".to_string(),
        };
        let start = Instant::now();
        let (_, timed_out) = tc
            .run(Path::new("/dev/null"), Duration::from_millis(200))
            .unwrap();
        assert!(timed_out);
        assert!(start.elapsed() < Duration::from_secs(5));
    }
}
